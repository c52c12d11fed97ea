use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, Context};
use powerlaw_revivals::analysis::{
    compare, detect_classical_period, detect_revival, json_number, Autocorrelation, AutocorrelationRecorder,
    DetectionStatus,
};
use powerlaw_revivals::quantum::{
    build_wavepacket, coupling_estimate, phase_wrap_dt, solve_eigen, write_snapshot, EigenBasis, Grid, Propagator,
    WaveState,
};
use powerlaw_revivals::resonance::{default_basis_size, mathieu_char_value, mathieu_q};
use powerlaw_revivals::{recurrence_times, undriven_times, wkb_energy, DriveSpec, RecurrenceTimes};
use serde_json::{json, Map, Value};

use crate::config::{ConfigError, ExperimentConfig, InitialState, SweepTarget};

/// Runs longer than this many steps are rejected as misconfigured.
const MAX_STEPS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

/// Files produced by a command. The first artifact is printed when no
/// output directory is given.
pub struct CommandOutput {
    pub artifacts: Vec<Artifact>,
    pub metadata: Map<String, Value>,
    pub no_recurrence: bool,
}

impl CommandOutput {
    fn new(artifacts: Vec<Artifact>, metadata: Map<String, Value>) -> Self {
        Self {
            artifacts,
            metadata,
            no_recurrence: false,
        }
    }
}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    bytes.push(b'\n');
    bytes
}

/// One-row CSV from an ordered map.
fn record_csv(map: &Map<String, Value>) -> Vec<u8> {
    let header: Vec<&str> = map.keys().map(String::as_str).collect();
    let row: Vec<String> = map.values().map(csv_cell).collect();
    format!("{}\n{}\n", header.join(","), row.join(",")).into_bytes()
}

fn base_metadata(command: &str, config: Option<&ExperimentConfig>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    if let Some(c) = config {
        m.insert("config".into(), serde_json::to_value(c).expect("config serializes"));
    }
    m
}

pub fn spectrum(config: &ExperimentConfig, format: Format) -> anyhow::Result<CommandOutput> {
    let potential = config.potential_spec()?;
    let levels = config.spectrum.levels;
    if levels == 0 {
        return Err(config_err("spectrum.levels must be >= 1"));
    }
    let wkb: Vec<f64> = (0..=levels)
        .map(|n| wkb_energy(&potential, config.kbar, n as f64))
        .collect::<powerlaw_revivals::Result<_>>()?;
    let numeric = if config.spectrum.numeric {
        let grid = config.grid(levels + 8)?;
        Some(solve_eigen(&potential, config.kbar, &grid, levels)?.energies)
    } else {
        None
    };
    let rows: Vec<Map<String, Value>> = (0..levels)
        .map(|n| {
            let mut r = Map::new();
            r.insert("n".into(), json!(n));
            r.insert("E_wkb".into(), json_number(wkb[n]));
            if let Some(e) = &numeric {
                r.insert("E_numeric".into(), json_number(e[n]));
            }
            r.insert("dE".into(), json_number(wkb[n + 1] - wkb[n]));
            r
        })
        .collect();
    let (name, contents) = match format {
        Format::Json => (
            "spectrum.json",
            pretty(&Value::Array(rows.into_iter().map(Value::Object).collect())),
        ),
        Format::Csv => {
            let mut out = String::new();
            out.push_str(if numeric.is_some() {
                "n,E_wkb,E_numeric,dE\n"
            } else {
                "n,E_wkb,dE\n"
            });
            for r in &rows {
                let cells: Vec<String> = ["n", "E_wkb", "E_numeric", "dE"]
                    .iter()
                    .filter_map(|k| r.get(*k))
                    .map(csv_cell)
                    .collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            ("spectrum.csv", out.into_bytes())
        }
    };
    let mut meta = base_metadata("spectrum", Some(config));
    meta.insert("numeric".into(), json!(numeric.is_some()));
    Ok(CommandOutput::new(
        vec![Artifact {
            name: name.into(),
            contents,
        }],
        meta,
    ))
}

/// The configured drive, estimating the coupling from `basis` (solved on
/// demand) when the config leaves it out.
fn resolve_drive(config: &ExperimentConfig, basis: Option<&EigenBasis>) -> anyhow::Result<(DriveSpec, &'static str)> {
    if let Some(d) = config.explicit_drive()? {
        return Ok((d, "config"));
    }
    let owned;
    let basis = match basis {
        Some(b) => b,
        None => {
            owned = solve_basis(config)?;
            &owned
        }
    };
    let n_bar = config.n_bar_index()?;
    let v = coupling_estimate(basis, config.drive.shape, n_bar, config.drive.order)?;
    let drive = DriveSpec::new(config.drive.lambda, v, config.drive.order)?;
    Ok((drive, "estimated"))
}

fn solve_basis(config: &ExperimentConfig) -> anyhow::Result<EigenBasis> {
    let n_levels = config.n_levels()?;
    let grid = config.grid(n_levels)?;
    Ok(solve_eigen(&config.potential_spec()?, config.kbar, &grid, n_levels)?)
}

fn times_record(config: &ExperimentConfig) -> anyhow::Result<(Map<String, Value>, &'static str)> {
    let spectrum = config.spectrum_model()?;
    let (drive, source) = resolve_drive(config, None)?;
    let t: RecurrenceTimes = recurrence_times(&spectrum, &drive)?;
    let mut m = Map::new();
    for (key, value) in [
        ("t0_cl", t.t0_cl),
        ("t0_q", t.t0_q),
        ("tlam_cl", t.tlam_cl),
        ("tlam_q", t.tlam_q),
        ("delta", t.delta),
        ("mu", t.mu),
        ("m0_cl", t.m0_cl),
        ("m0_q", t.m0_q),
        ("omega_n", t.omega_n),
    ] {
        m.insert(key.into(), json_number(value));
    }
    m.insert("regime".into(), serde_json::to_value(t.regime)?);
    m.insert("zeta_sign".into(), json!(t.zeta_sign));
    m.insert("rho".into(), json_number(spectrum.rho()));
    m.insert("e_nbar".into(), json_number(spectrum.e_nbar));
    m.insert("omega".into(), json_number(spectrum.omega));
    m.insert("zeta".into(), json_number(spectrum.zeta));
    m.insert("lambda".into(), json_number(drive.lambda));
    m.insert("v_coupling".into(), json_number(drive.v_coupling));
    m.insert("order".into(), json!(drive.order));
    let q = if drive.lambda != 0.0 {
        mathieu_q(&spectrum, &drive).map_or(Value::Null, json_number)
    } else {
        json_number(0.0)
    };
    m.insert("q".into(), q);
    Ok((m, source))
}

pub fn times(config: &ExperimentConfig, format: Format) -> anyhow::Result<CommandOutput> {
    let (record, source) = times_record(config)?;
    let artifact = match format {
        Format::Json => Artifact {
            name: "times.json".into(),
            contents: pretty(&Value::Object(record)),
        },
        Format::Csv => Artifact {
            name: "times.csv".into(),
            contents: record_csv(&record),
        },
    };
    let mut meta = base_metadata("times", Some(config));
    meta.insert("v_coupling_source".into(), json!(source));
    Ok(CommandOutput::new(vec![artifact], meta))
}

pub fn mathieu(nu: f64, q: f64, basis: Option<usize>, format: Format) -> anyhow::Result<CommandOutput> {
    let basis = basis.unwrap_or_else(|| default_basis_size(nu));
    let r = mathieu_char_value(nu, q, basis).map_err(|e| match e {
        powerlaw_revivals::Error::Domain(msg) => config_err(msg),
        other => other.into(),
    })?;
    let mut m = Map::new();
    m.insert("nu".into(), json_number(r.nu));
    m.insert("q".into(), json_number(r.q));
    m.insert("a_nu".into(), json_number(r.a_nu));
    m.insert("basis_size".into(), json!(r.basis_size));
    let artifact = match format {
        Format::Json => Artifact {
            name: "mathieu.json".into(),
            contents: pretty(&Value::Object(m)),
        },
        Format::Csv => Artifact {
            name: "mathieu.csv".into(),
            contents: record_csv(&m),
        },
    };
    Ok(CommandOutput::new(vec![artifact], base_metadata("mathieu", None)))
}

struct RunPlan {
    dt: f64,
    n_steps: usize,
    stride: usize,
}

fn plan_run(config: &ExperimentConfig, grid: &Grid, t0_cl: f64, t0_q: f64) -> anyhow::Result<RunPlan> {
    let run = &config.run;
    let dt = match (run.dt, run.steps_per_period) {
        (Some(dt), _) => dt,
        (None, Some(m)) if m > 0 => 2.0 * PI / m as f64,
        (None, Some(_)) => return Err(config_err("run.steps_per_period must be >= 1")),
        (None, None) => {
            let limit = phase_wrap_dt(&config.potential_spec()?, config.kbar, grid).min(0.01 * t0_cl);
            2.0 * PI / (2.0 * PI / limit).ceil()
        }
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(config_err(format!("run.dt must be positive, got {dt}")));
    }
    let total = match (run.total_time, run.periods) {
        (Some(t), _) => t,
        (None, Some(p)) => 2.0 * PI * p,
        (None, None) if t0_q.is_finite() => 1.3 * t0_q,
        (None, None) => 20.0 * t0_cl,
    };
    let steps = (total / dt).round();
    if !(1.0..=MAX_STEPS).contains(&steps) {
        return Err(config_err(format!(
            "run of {total} time units at dt = {dt} needs {steps} steps; set run.total_time or run.periods"
        )));
    }
    let stride = run
        .stride
        .unwrap_or_else(|| ((t0_cl / (100.0 * dt)).floor() as usize).max(1));
    Ok(RunPlan {
        dt,
        n_steps: steps as usize,
        stride,
    })
}

struct EvolveRun {
    autocorrelation: Autocorrelation,
    report: Map<String, Value>,
    metadata: Map<String, Value>,
    no_recurrence: bool,
}

/// Propagate, detect and compare. Snapshots go to `out_dir/snapshots`.
fn evolve_core(config: &ExperimentConfig, out_dir: Option<&Path>) -> anyhow::Result<EvolveRun> {
    let potential = config.potential_spec()?;
    let spectrum = config.spectrum_model()?;
    let (t0_cl, t0_q) = undriven_times(&spectrum)?;

    let needs_basis = matches!(config.initial, InitialState::Levels {}) || config.explicit_drive()?.is_none();
    let basis = if needs_basis { Some(solve_basis(config)?) } else { None };
    let grid = match &basis {
        Some(b) => b.grid,
        None => config.grid(config.n_levels()?)?,
    };
    let (initial, initial_meta) = match &config.initial {
        InitialState::Levels {} => {
            let n_bar = config.n_bar_index()?;
            let b = basis.as_ref().expect("basis solved for level populations");
            let state = build_wavepacket(b, n_bar, config.sigma_n)?;
            (
                state,
                json!({"kind": "levels", "n_bar": n_bar, "sigma_n": config.sigma_n, "n_levels": b.n_levels()}),
            )
        }
        InitialState::Gaussian { x0, width, p0 } => (
            WaveState::gaussian(grid, *x0, *width, *p0, config.kbar)?,
            json!({"kind": "gaussian", "x0": x0, "width": width, "p0": p0}),
        ),
    };
    let (drive, source) = resolve_drive(config, basis.as_ref())?;
    let plan = plan_run(config, &grid, t0_cl, t0_q)?;

    let snapshot_every = config.outputs.snapshot_every;
    let snapshot_dir = match (snapshot_every, out_dir) {
        (Some(0), _) => return Err(config_err("outputs.snapshot_every must be >= 1")),
        (Some(_), None) => return Err(config_err("outputs.snapshot_every needs --out-dir")),
        (Some(_), Some(dir)) => {
            let d = dir.join("snapshots");
            std::fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))?;
            Some(d)
        }
        (None, _) => None,
    };

    let mut propagator = Propagator::new(&potential, config.kbar, drive.lambda, config.drive.shape, grid, plan.dt)?;
    let mut recorder = AutocorrelationRecorder::new();
    let mut state = initial;
    let mut sample = 0usize;
    let mut written = 0usize;
    propagator.run(&mut state, plan.n_steps, plan.stride, |s| {
        recorder.record(s)?;
        if let (Some(every), Some(dir)) = (snapshot_every, &snapshot_dir) {
            if sample.is_multiple_of(every) {
                let path = dir.join(format!("psi_{sample:06}.bin"));
                let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                write_snapshot(&mut file, s)?;
                written += 1;
            }
        }
        sample += 1;
        Ok(())
    })?;
    let ac = recorder.finish();

    let settings = config.detector;
    let classical = detect_classical_period(&ac, &settings);
    let hint = if classical.status == DetectionStatus::Detected {
        classical.time
    } else {
        t0_cl
    };
    let mut revival_note = None;
    let revival = if t0_q.is_finite() {
        match detect_revival(&ac, hint, &settings) {
            Ok(r) => Some(r),
            Err(e) => {
                revival_note = Some(format!("revival not searched: {e}"));
                None
            }
        }
    } else {
        None
    };
    let mut report = compare(&classical, revival.as_ref(), &spectrum, &drive)?;
    if let Some(note) = revival_note {
        report.note = format!("{}; {note}", report.note);
    }
    let no_recurrence = classical.status == DetectionStatus::NoRecurrence
        || revival.is_some_and(|r| r.status == DetectionStatus::NoRecurrence);

    let mut meta = Map::new();
    meta.insert("initial_state".into(), initial_meta);
    meta.insert(
        "grid".into(),
        json!({"x_min": grid.x_min(), "x_max": grid.x_max(), "n_points": grid.n_points()}),
    );
    meta.insert("dt".into(), json_number(plan.dt));
    meta.insert("n_steps".into(), json!(plan.n_steps));
    meta.insert("stride".into(), json!(plan.stride));
    meta.insert(
        "phase_wrap_dt".into(),
        json_number(phase_wrap_dt(&potential, config.kbar, &grid)),
    );
    meta.insert("v_coupling".into(), json_number(drive.v_coupling));
    meta.insert("v_coupling_source".into(), json!(source));
    meta.insert("snapshots".into(), json!(written));
    Ok(EvolveRun {
        autocorrelation: ac,
        report: report.to_json(),
        metadata: meta,
        no_recurrence,
    })
}

pub fn evolve(config: &ExperimentConfig, out_dir: Option<&Path>) -> anyhow::Result<CommandOutput> {
    let run = evolve_core(config, out_dir)?;
    let mut csv = Vec::new();
    run.autocorrelation.write_csv(&mut csv)?;
    let mut meta = base_metadata("evolve", Some(config));
    meta.extend(run.metadata);
    let mut output = CommandOutput::new(
        vec![
            Artifact {
                name: config.outputs.report.clone(),
                contents: pretty(&Value::Object(run.report)),
            },
            Artifact {
                name: config.outputs.autocorrelation.clone(),
                contents: csv,
            },
        ],
        meta,
    );
    output.no_recurrence = run.no_recurrence;
    Ok(output)
}

fn sweep_point(config: &ExperimentConfig, target: SweepTarget) -> anyhow::Result<Map<String, Value>> {
    match target {
        SweepTarget::Times => Ok(times_record(config)?.0),
        SweepTarget::Evolve => {
            let mut report = evolve_core(config, None)?.report;
            report.remove("note");
            Ok(report)
        }
    }
}

pub fn sweep(base: &Value, jobs: usize, format: Format) -> anyhow::Result<CommandOutput> {
    let config = ExperimentConfig::from_document(base)?;
    let spec = config
        .sweep
        .clone()
        .ok_or_else(|| config_err("sweep section missing"))?;
    if spec.values.is_empty() {
        return Err(config_err("sweep.values is empty"));
    }
    let points = spec
        .values
        .iter()
        .map(|v| {
            let mut doc = base.clone();
            crate::config::set_path(&mut doc, &spec.parameter, v.clone())?;
            ExperimentConfig::from_document(&doc).map_err(|e| config_err(format!("sweep value {v}: {e}")))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| anyhow!("thread pool: {e}"))?;
    let results: Vec<anyhow::Result<Map<String, Value>>> = pool.install(|| {
        use rayon::prelude::*;
        points.par_iter().map(|c| sweep_point(c, spec.target)).collect()
    });
    let mut records = Vec::with_capacity(results.len());
    for (value, result) in spec.values.iter().zip(results) {
        records.push(result.with_context(|| format!("sweep point {} = {value}", spec.parameter))?);
    }

    let contents = match format {
        Format::Csv => {
            let mut out = String::from("parameter,value,quantity,result\n");
            for (value, record) in spec.values.iter().zip(&records) {
                for (key, result) in record {
                    out.push_str(&format!(
                        "{},{},{key},{}\n",
                        spec.parameter,
                        csv_cell(value),
                        csv_cell(result)
                    ));
                }
            }
            out.into_bytes()
        }
        Format::Json => {
            let rows: Vec<Value> = spec
                .values
                .iter()
                .zip(records)
                .map(|(value, record)| json!({"value": value, "results": record}))
                .collect();
            pretty(&json!({"parameter": spec.parameter, "points": rows}))
        }
    };
    let name = match format {
        Format::Csv => "sweep.csv",
        Format::Json => "sweep.json",
    };
    let mut meta = base_metadata("sweep", Some(&config));
    meta.insert("points".into(), json!(spec.values.len()));
    Ok(CommandOutput::new(
        vec![Artifact {
            name: name.into(),
            contents,
        }],
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(doc: Value) -> ExperimentConfig {
        ExperimentConfig::from_document(&doc).unwrap()
    }

    #[test]
    fn non_finite_cells() {
        assert_eq!(csv_cell(&json_number(f64::INFINITY)), "inf");
        assert_eq!(csv_cell(&json_number(f64::NAN)), "nan");
        assert_eq!(csv_cell(&json_number(0.25)), "0.25");
        assert_eq!(csv_cell(&Value::Null), "");
    }

    #[test]
    fn harmonic_times_report_infinite_revival() {
        let c = config(json!({"potential": {"k": 2.0, "v0": 0.5}, "kbar": 1.0, "n_bar": 10}));
        let (m, source) = times_record(&c).unwrap();
        assert_eq!(m["t0_q"], "inf");
        assert_eq!(m["regime"], "harmonic");
        assert_eq!(source, "config");
    }

    #[test]
    fn estimated_coupling_is_used_when_absent() {
        let c = config(json!({
            "potential": {"k": 1.0, "domain": "truncated"}, "kbar": 1.0, "n_bar": 20,
            "drive": {"lambda": 0.01, "order": 2}
        }));
        let (m, source) = times_record(&c).unwrap();
        assert_eq!(source, "estimated");
        assert!(m["v_coupling"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn default_run_plan_respects_the_phase_limit() {
        let c = config(json!({"potential": {"k": 1.0, "domain": "truncated"}, "kbar": 1.0, "n_bar": 20}));
        let grid = c.grid(48).unwrap();
        let plan = plan_run(&c, &grid, 11.6, 1445.0).unwrap();
        assert!(plan.dt <= phase_wrap_dt(&c.potential_spec().unwrap(), 1.0, &grid));
        let per_period = 2.0 * PI / plan.dt;
        assert!((per_period - per_period.round()).abs() < 1e-9);
        assert!((plan.n_steps as f64 * plan.dt - 1.3 * 1445.0).abs() < plan.dt);
        assert!(plan.stride >= 1);
    }
}
