//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::time::Instant;

use powerlaw_revivals::analysis::{
    detect_classical_period, detect_revival, AutocorrelationRecorder, DetectionStatus, DetectorSettings,
};
use powerlaw_revivals::quantum::{
    auto_grid, build_wavepacket, phase_wrap_dt, solve_eigen, DriveShape, Grid, Propagator, WaveState,
};
use powerlaw_revivals::recurrence::{
    driven_times, driven_times_rho_form, linear, sum_rule_check, times_from_quasienergy, undriven_times,
    undriven_times_rho_form,
};
use powerlaw_revivals::resonance::{
    default_span, mathieu_char_value, mathieu_q, pendulum_matrix_eigs, quasienergy, DriveSpec,
};
use powerlaw_revivals::spectrum::{wkb_energy, DomainKind, PotentialSpec, SpectrumModel};
use powerlaw_revivals::Result;

/// Zeros a_1..a_12 of Ai.
const AIRY_ZEROS: [f64; 12] = [
    -2.338_107_410_459_767,
    -4.087_949_444_130_971,
    -5.520_559_828_095_551,
    -6.786_708_090_071_759,
    -7.944_133_587_120_853,
    -9.022_650_853_340_981,
    -10.040_174_341_558_09,
    -11.008_524_303_733_26,
    -11.936_015_563_236_26,
    -12.828_776_752_865_757,
    -13.691_489_035_210_72,
    -14.527_829_951_775_33,
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Lowest eigenvalue of the symmetric tridiagonal matrix `diag(d)`, off-diagonal `e`,
/// by Sturm-sequence bisection.
fn lowest_tridiagonal_eigenvalue(d: &[f64], e: f64) -> f64 {
    let count_below = |x: f64| {
        let mut count = 0;
        let mut q = d[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for &di in &d[1..] {
            let prev = if q == 0.0 { 1e-300 } else { q };
            q = di - x - e * e / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bound = d.iter().fold(f64::MAX, |m, &v| m.min(v)) - 2.0 * e.abs();
    let (mut lo, mut hi) = (bound, d[0] + 2.0 * e.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn harmonic_exactness() -> Result<Outcome> {
    let p = PotentialSpec::harmonic(0.5)?;
    let wkb_err = (0..=30)
        .map(|n| (wkb_energy(&p, 1.0, n as f64).unwrap() - (n as f64 + 0.5)).abs())
        .fold(0.0, f64::max);

    let levels = 30;
    let grid = auto_grid(&p, 1.0, levels, 256)?;
    let basis = solve_eigen(&p, 1.0, &grid, levels)?;
    let initial = build_wavepacket(&basis, 10, 2.0)?;
    let steps_per_period = 400;
    let dt = 2.0 * PI / steps_per_period as f64;
    let mut prop = Propagator::new(&p, 1.0, 0.0, DriveShape::Potential, grid, dt)?;
    let mut recorder = AutocorrelationRecorder::new();
    let mut state = initial.clone();
    let mut a_period = 0.0;
    prop.run(&mut state, 6 * steps_per_period, 4, |s| {
        if (s.t - 2.0 * PI).abs() < 1e-9 {
            a_period = initial.overlap(s)?.norm();
        }
        recorder.record(s)
    })?;
    let ac = recorder.finish();
    let cl = detect_classical_period(&ac, &DetectorSettings::default());
    let spectrum = SpectrumModel::new(p, 1.0, 10.0)?;
    let (t0_cl, t0_q) = undriven_times(&spectrum)?;
    let period_err = rel(cl.time, 2.0 * PI);
    let pass = wkb_err < 1e-10
        && 1.0 - a_period <= 1e-6
        && (t0_cl - 2.0 * PI).abs() < 1e-12
        && t0_q.is_infinite()
        && period_err <= 0.005;
    outcome(
        pass,
        format!(
            "max|E_wkb-(n+1/2)|={wkb_err:.1e}, 1-|A(2pi)|={:.2e}, T0_cl={t0_cl:.12}, T0_Q={t0_q}, detected T_cl err={period_err:.2e}",
            1.0 - a_period
        ),
    )
}

/// Largest `2 pi / M` (integer `M`) at or below `limit`.
fn commensurate_dt(limit: f64) -> f64 {
    2.0 * PI / (2.0 * PI / limit).ceil()
}

fn bouncer_basis(levels: usize, n_points: usize) -> Result<(PotentialSpec, powerlaw_revivals::quantum::EigenBasis)> {
    let p = PotentialSpec::bouncer(1.0)?;
    let grid = auto_grid(&p, 1.0, levels, n_points)?;
    let basis = solve_eigen(&p, 1.0, &grid, levels)?;
    Ok((p, basis))
}

fn bouncer_spectrum() -> Result<Outcome> {
    let (p, basis) = bouncer_basis(48, 512)?;
    // E_n = -a_{n+1} (kbar^2 V0^2 / 2)^(1/3)
    let scale = 0.5f64.cbrt();
    let airy_err = (0..=10)
        .map(|n| rel(basis.energies[n], -AIRY_ZEROS[n] * scale))
        .fold(0.0, f64::max);
    let wkb_err = (5..40)
        .map(|n| rel(wkb_energy(&p, 1.0, n as f64).unwrap(), basis.energies[n]))
        .fold(0.0, f64::max);
    outcome(
        airy_err <= 1e-4 && wkb_err <= 0.02,
        format!("max rel err vs Airy (n<=10) = {airy_err:.2e}, max rel WKB err (5<=n<40) = {wkb_err:.2e}"),
    )
}

fn bouncer_recurrences() -> Result<Outcome> {
    let (p, basis) = bouncer_basis(48, 512)?;
    let spectrum = SpectrumModel::new(p, 1.0, 20.0)?;
    let s = spectrum.shifted_level();
    let e = spectrum.e_nbar;
    let t0_cl = 3.0 * PI * s / e;
    let t0_q = 18.0 * PI * s * s / e;

    let initial = build_wavepacket(&basis, 20, 2.0)?;
    let dt = commensurate_dt(phase_wrap_dt(&p, 1.0, &basis.grid));
    let n_steps = (1.3 * t0_q / dt).ceil() as usize;
    let mut prop = Propagator::new(&p, 1.0, 0.0, DriveShape::Potential, basis.grid, dt)?;
    let mut recorder = AutocorrelationRecorder::new();
    let mut state = initial;
    prop.run(&mut state, n_steps, 4, |s| recorder.record(s))?;
    let ac = recorder.finish();
    let settings = DetectorSettings::default();
    let cl = detect_classical_period(&ac, &settings);
    let rv = detect_revival(&ac, cl.time, &settings)?;
    let cl_err = rel(cl.time, t0_cl);
    let q_err = rel(rv.time, t0_q);
    outcome(
        cl.status == DetectionStatus::Detected && rv.status == DetectionStatus::Detected && cl_err <= 0.05 && q_err <= 0.10,
        format!(
            "T_cl {:.4} vs {t0_cl:.4} (err {cl_err:.2e}), T_Q {:.1} vs {t0_q:.1} (err {q_err:.2e}, half revival {:?}), {n_steps} steps",
            cl.time, rv.time, rv.half_revival
        ),
    )
}

fn scaling_laws() -> Result<Outcome> {
    let bouncer = PotentialSpec::bouncer(1.0)?;
    let levels: Vec<f64> = (0..=19).map(|i| 10.0 + 10.0 * i as f64).collect();
    let mut cl = Vec::new();
    let mut q = Vec::new();
    for &n in &levels {
        let (a, b) = undriven_times(&SpectrumModel::new(bouncer, 1.0, n)?)?;
        cl.push(a);
        q.push(b);
    }
    let slope_cl = log_slope(&levels, &cl);
    let slope_q = log_slope(&levels, &q);

    let quartic = PotentialSpec::new(1.0, 4.0, DomainKind::Symmetric)?;
    let kbars: Vec<f64> = (0..=20).map(|i| 0.05 * 1.2f64.powi(i)).collect();
    let mut kcl = Vec::new();
    for &kb in &kbars {
        kcl.push(undriven_times(&SpectrumModel::new(quartic, kb, 20.0)?)?.0);
    }
    let slope_k = log_slope(&kbars, &kcl);
    outcome(
        (slope_cl - 1.0 / 3.0).abs() <= 0.05
            && (slope_q - 4.0 / 3.0).abs() <= 0.05
            && (slope_k + 1.0 / 3.0).abs() <= 0.02,
        format!("k=1: slope T0_cl {slope_cl:.4}, T0_Q {slope_q:.4}; k=4 kbar-slope T0_cl {slope_k:.4}"),
    )
}

fn mathieu_solver() -> Result<Outcome> {
    let zero_q = [0.0, 0.5, 1.7, 3.0, 6.25]
        .iter()
        .map(|&nu| (mathieu_char_value(nu, 0.0, 60).unwrap().a_nu - nu * nu).abs())
        .fold(0.0, f64::max);

    let basis = 60;
    let a0 = mathieu_char_value(0.0, 1.0, basis)?.a_nu;
    // exponential basis exp(2ijz), j in [-basis, basis]: its lowest eigenvalue is a_0
    let d: Vec<f64> = (-(basis as i64)..=basis as i64)
        .map(|j| (2.0 * j as f64).powi(2))
        .collect();
    let oracle = lowest_tridiagonal_eigenvalue(&d, 1.0);
    let oracle_err = (a0 - oracle).abs();
    let published_err = (a0 + 0.455_139).abs();

    let q = 0.1f64;
    let series = [
        (1.0, 1.0 + q - q * q / 8.0),
        (2.0, 4.0 + 5.0 * q * q / 12.0),
        (0.0, -q * q / 2.0),
        (2.5, 6.25 + q * q / (2.0 * (6.25 - 1.0))),
    ];
    let series_err = series
        .iter()
        .map(|&(nu, s)| (mathieu_char_value(nu, q, 60).unwrap().a_nu - s).abs())
        .fold(0.0, f64::max);
    outcome(
        zero_q <= 1e-10 && oracle_err <= 1e-6 && published_err <= 1e-6 && series_err <= 1e-4,
        format!(
            "max|a(0)-nu^2|={zero_q:.1e}, a_0(1)={a0:.9} (oracle diff {oracle_err:.1e}), small-q series err {series_err:.1e}"
        ),
    )
}

fn two_route_case(kbar: f64, strength: f64) -> Result<(f64, f64, f64, f64)> {
    let spectrum = SpectrumModel::new(PotentialSpec::bouncer(1.0)?, kbar, 20.0)?;
    let drive = DriveSpec::new(1.0, strength, 1)?;
    let q = mathieu_q(&spectrum, &drive)?;
    let pend = pendulum_matrix_eigs(&spectrum, &drive, default_span(q, 1))?;
    let mut max_diff = 0.0f64;
    let mut eps = Vec::new();
    for m in -5..=5i64 {
        let e_m = quasienergy(&spectrum, &drive, m)?.epsilon;
        let (e_p, _) = pend.state_for_offset(m)?;
        max_diff = max_diff.max((e_m - e_p).abs());
        eps.push(e_m);
    }
    let bandwidth = eps.iter().fold(f64::MIN, |a, &b| a.max(b)) - eps.iter().fold(f64::MAX, |a, &b| a.min(b));

    let step = 0.05;
    let closed = driven_times(&spectrum, &drive)?;
    let base = times_from_quasienergy(&spectrum, &DriveSpec::undriven(1)?, step)?;
    let (t1, t2) = times_from_quasienergy(&spectrum, &drive, step)?;
    let cl_shift_err = rel(t1 - base.0, closed.tlam_cl - closed.t0_cl * closed.delta);
    let q_shift_err = rel(t2 - base.1, closed.tlam_q - closed.t0_q);
    Ok((q, max_diff / bandwidth, cl_shift_err, q_shift_err))
}

fn two_route_quasienergy() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    // At kbar = 1 the revival shift is ~1e-10 relative, below the roundoff
    // floor of a second difference, so only the classical shift is checked.
    for (kbar, strength, check_revival) in [(1.0, 2e-4, false), (0.15, 5e-5, true)] {
        let (q, band_err, cl_err, q_err) = two_route_case(kbar, strength)?;
        pass &= q.abs() <= 0.1 && band_err <= 1e-5 && cl_err <= 0.05 && (!check_revival || q_err <= 0.05);
        let q_note = if check_revival {
            format!("{q_err:.1e}")
        } else {
            "unresolved".to_string()
        };
        parts.push(format!(
            "kbar={kbar}: q={q:.3}, route diff/bandwidth={band_err:.1e}, shift err cl={cl_err:.1e} Q={q_note}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn shift_directions() -> Result<Outcome> {
    let lambdas: Vec<f64> = (0..10).map(|i| 0.01 * i as f64).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, potential, order) in [
        ("bouncer N=2", PotentialSpec::bouncer(1.0)?, 2u32),
        ("quartic N=1", PotentialSpec::new(1.0, 4.0, DomainKind::Symmetric)?, 1),
    ] {
        let spectrum = SpectrumModel::new(potential, 1.0, 20.0)?;
        let times: Vec<_> = lambdas
            .iter()
            .map(|&l| driven_times(&spectrum, &DriveSpec::new(l, 1.0, order).unwrap()).unwrap())
            .collect();
        let mu = times[0].mu;
        let cl_up = times.windows(2).all(|w| w[1].tlam_cl > w[0].tlam_cl);
        let q_down = times.windows(2).all(|w| w[1].tlam_q < w[0].tlam_q);
        pass &= mu * mu < 1.0 && times[0].delta > 0.0 && cl_up && q_down;
        parts.push(format!(
            "{name}: mu={mu:.3}, Tlam_cl increasing={cl_up}, Tlam_Q decreasing={q_down}"
        ));
    }
    let harmonic = SpectrumModel::new(PotentialSpec::harmonic(0.5)?, 1.0, 10.0)?;
    let base = driven_times(&harmonic, &DriveSpec::undriven(2)?)?;
    let flat = lambdas.iter().all(|&l| {
        let t = driven_times(&harmonic, &DriveSpec::new(l, 1.0, 2).unwrap()).unwrap();
        t.tlam_cl == base.tlam_cl && t.tlam_q.is_infinite()
    });
    pass &= flat;
    parts.push(format!("harmonic lambda-independent={flat}"));
    outcome(pass, parts.join("; "))
}

fn consistency_identities() -> Result<Outcome> {
    let mut form_err = 0.0f64;
    for (k, kbar, n_bar, order) in [
        (1.0, 1.0, 20.0, 1u32),
        (1.5, 0.3, 8.0, 2),
        (3.0, 0.7, 15.0, 1),
        (4.0, 1.0, 20.0, 3),
        (8.0, 0.2, 40.0, 2),
    ] {
        let spectrum = SpectrumModel::new(PotentialSpec::new(1.0, k, DomainKind::Symmetric)?, kbar, n_bar)?;
        let drive = DriveSpec::new(0.05, 1.0, order)?;
        let a = driven_times(&spectrum, &drive)?;
        let b = driven_times_rho_form(&spectrum, &drive)?;
        let (c0, q0) = undriven_times_rho_form(&spectrum)?;
        for (x, y) in [
            (a.t0_cl, b.t0_cl),
            (a.t0_q, b.t0_q),
            (a.tlam_cl, b.tlam_cl),
            (a.tlam_q, b.tlam_q),
            (a.mu, b.mu),
            (a.t0_cl, c0),
            (a.t0_q, q0),
        ] {
            form_err = form_err.max(rel(x, y));
        }
    }

    let mut linear_err = 0.0f64;
    for domain in [DomainKind::Symmetric, DomainKind::Truncated] {
        let p = PotentialSpec::with_maslov(1.0, 1.0, 3, domain)?;
        let spectrum = SpectrumModel::new(p, 1.0, 20.0)?;
        let strength = 0.05;
        let t = driven_times_rho_form(&spectrum, &DriveSpec::new(1.0, strength, 1)?)?;
        let f = linear::LinearForms {
            kbar: 1.0,
            s: spectrum.shifted_level(),
            e: spectrum.e_nbar,
        };
        for (x, y) in [
            (f.t0_cl(), t.t0_cl),
            (f.t0_q(), t.t0_q),
            (f.mu(t.delta, 1), t.mu),
            (f.tlam_cl(strength, t.delta, 1), t.tlam_cl),
            (f.tlam_q(strength, t.delta, 1), t.tlam_q),
        ] {
            linear_err = linear_err.max(rel(x, y));
        }
    }

    let tight = sum_rule_check(
        &SpectrumModel::new(PotentialSpec::new(1.0, 2.05, DomainKind::Symmetric)?, 1.0, 20.0)?,
        &DriveSpec::new(0.01, 1.0, 2)?,
    )?;
    let loose = sum_rule_check(
        &SpectrumModel::new(PotentialSpec::new(1.0, 1.95, DomainKind::Symmetric)?, 1.0, 20.0)?,
        &DriveSpec::new(0.01, 1.0, 2)?,
    )?;
    outcome(
        form_err <= 1e-12 && linear_err <= 1e-12 && tight.tight.is_finite() && loose.loose.is_finite(),
        format!(
            "rho vs k forms {form_err:.1e}, k=1 forms {linear_err:.1e}; diagnostics: tight residual (rho=+0.05) {:.3e}, loose residual (rho=-0.05) {:.3e}",
            tight.tight, loose.loose
        ),
    )
}

fn evolve(p: &PotentialSpec, grid: Grid, lambda: f64, initial: &WaveState, dt: f64, steps: usize) -> Result<WaveState> {
    let mut prop = Propagator::new(p, 1.0, lambda, DriveShape::Potential, grid, dt)?;
    let mut state = initial.clone();
    prop.run(&mut state, steps, steps.max(1), |_| Ok(()))?;
    Ok(state)
}

fn distance(a: &WaveState, b: &WaveState) -> f64 {
    let dx = a.grid.dx();
    (a.psi.iter().zip(&b.psi).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * dx).sqrt()
}

fn numerical_hygiene() -> Result<Outcome> {
    let (p, basis) = bouncer_basis(48, 512)?;
    let grid = basis.grid;
    let initial = build_wavepacket(&basis, 20, 2.0)?;
    let lambda = 0.05;

    let dt = commensurate_dt(phase_wrap_dt(&p, 1.0, &grid));
    let forward = evolve(&p, grid, lambda, &initial, dt, 10_000)?;
    let drift = (forward.norm() - initial.norm()).abs();
    let back = evolve(&p, grid, lambda, &forward, -dt, 10_000)?;
    let fidelity = initial.overlap(&back)?.norm_sqr();

    let coarse = dt;
    let steps = 1000;
    let e1 = evolve(&p, grid, lambda, &initial, coarse, steps)?;
    let e2 = evolve(&p, grid, lambda, &initial, coarse / 2.0, 2 * steps)?;
    let reference = evolve(&p, grid, lambda, &initial, coarse / 8.0, 8 * steps)?;
    let ratio = distance(&e1, &reference) / distance(&e2, &reference);
    outcome(
        drift <= 1e-8 && fidelity >= 1.0 - 1e-6 && (ratio - 4.0).abs() <= 0.5,
        format!(
            "norm drift over 1e4 steps {drift:.1e}, |1-reversal fidelity| {:.1e}, dt-halving error ratio {ratio:.3}",
            (1.0 - fidelity).abs()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 9] = [
        ("harmonic exactness", harmonic_exactness),
        ("bouncer spectrum", bouncer_spectrum),
        ("undriven bouncer recurrences", bouncer_recurrences),
        ("scaling laws", scaling_laws),
        ("Mathieu solver", mathieu_solver),
        ("two-route quasienergy", two_route_quasienergy),
        ("driven-shift directions", shift_directions),
        ("consistency identities", consistency_identities),
        ("numerical hygiene", numerical_hygiene),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} {}. {name}: {detail} [{secs:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
