//! Recurrence detection in the autocorrelation `A(t) = <psi(0)|psi(t)>`.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::quantum::WaveState;
use crate::recurrence::{driven_times, undriven_times};
use crate::resonance::DriveSpec;
use crate::spectrum::SpectrumModel;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Autocorrelation {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `<psi(t)|psi(t)>` at each sample.
    pub norms: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl Autocorrelation {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn abs2(&self) -> Vec<f64> {
        self.values.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Mean sampling interval.
    pub fn sample_interval(&self) -> f64 {
        match self.times.len() {
            0 | 1 => f64::NAN,
            n => (self.times[n - 1] - self.times[0]) / (n - 1) as f64,
        }
    }

    /// CSV with columns `t,re_A,im_A,abs_A2,norm`.
    pub fn write_csv<W: Write>(&self, writer: &mut W) -> Result<()> {
        writeln!(writer, "t,re_A,im_A,abs_A2,norm")?;
        for ((t, a), n) in self.times.iter().zip(&self.values).zip(&self.norms) {
            writeln!(writer, "{t},{},{},{},{n}", a.re, a.im, a.norm_sqr())?;
        }
        Ok(())
    }
}

/// Builds an [`Autocorrelation`] one state at a time; the first state
/// recorded is the reference `psi(0)`.
#[derive(Debug, Clone, Default)]
pub struct AutocorrelationRecorder {
    initial: Option<WaveState>,
    series: Autocorrelation,
}

impl AutocorrelationRecorder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, state: &WaveState) -> Result<()> {
        let initial = self.initial.get_or_insert_with(|| state.clone());
        let a = initial.overlap(state)?;
        self.series.times.push(state.t);
        self.series.values.push(a);
        self.series.norms.push(state.norm());
        Ok(())
    }

    pub fn finish(self) -> Autocorrelation {
        self.series
    }
}

pub fn autocorrelate(trajectory: &[WaveState]) -> Result<Autocorrelation> {
    if trajectory.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let mut recorder = AutocorrelationRecorder::new();
    for state in trajectory {
        recorder.record(state)?;
    }
    Ok(recorder.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionStatus {
    Detected,
    NoRecurrence,
    /// Best revival candidate stays below the weak-revival threshold.
    WeakRevival,
    /// Every classical period is a full reconstruction (equally spaced
    /// spectrum); the reported time is the first reconstruction.
    DegenerateLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSettings {
    /// Minimum prominence of a classical-period peak in `|A|^2`.
    pub prominence: f64,
    /// Revival search starts at this many classical periods.
    pub revival_start: f64,
    /// Envelope window in classical periods.
    pub window: f64,
    pub weak_revival: f64,
    /// Envelope flatness (min/max) at which the spectrum counts as linear.
    pub degenerate_flatness: f64,
    /// A revival candidate is replaced by one near twice its time when that
    /// one reaches this fraction of its height and nothing comparable sits
    /// near half its time.
    pub partner_ratio: f64,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        Self {
            prominence: 0.1,
            revival_start: 3.0,
            window: 1.5,
            weak_revival: 0.5,
            degenerate_flatness: 0.9,
            partner_ratio: 0.75,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub time: f64,
    pub uncertainty: f64,
    pub peak_height: f64,
    pub status: DetectionStatus,
}

impl Detection {
    fn none(uncertainty: f64) -> Self {
        Self {
            time: f64::NAN,
            uncertainty,
            peak_height: f64::NAN,
            status: DetectionStatus::NoRecurrence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RevivalDetection {
    pub time: f64,
    pub uncertainty: f64,
    pub envelope_peak: f64,
    pub status: DetectionStatus,
    /// Strong reconstruction at half the revival time, if one was seen.
    pub half_revival: Option<f64>,
}

/// Vertex offset (in samples) of the parabola through `y[i-1], y[i], y[i+1]`.
fn parabolic_offset(y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() {
        return 0.0;
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        0.0
    } else {
        (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
    }
}

/// Prominence of the local maximum at `i`: its height above the higher of
/// the two lowest points separating it from taller samples (or the ends).
fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    for &v in y[..i].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn first_peak(y: &[f64], start: usize, min_prominence: f64) -> Option<usize> {
    (start.max(1)..y.len().saturating_sub(1))
        .find(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && prominence(y, i) >= min_prominence)
}

fn index_at(times: &[f64], t: f64) -> usize {
    times.partition_point(|&s| s < t)
}

/// First prominent maximum of `|A|^2` after `t = 0`, refined by a parabola
/// through the neighbouring samples. The uncertainty is one sampling interval.
pub fn detect_classical_period(ac: &Autocorrelation, settings: &DetectorSettings) -> Detection {
    let dt = ac.sample_interval();
    let y = ac.abs2();
    match first_peak(&y, 1, settings.prominence) {
        Some(i) => Detection {
            time: ac.times[i] + parabolic_offset(&y, i) * dt,
            uncertainty: dt,
            peak_height: y[i],
            status: DetectionStatus::Detected,
        },
        None => Detection::none(dt),
    }
}

/// Centred running maximum over `2 half + 1` samples.
fn sliding_max(values: &[f64], half: usize) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    let mut window: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while window.back().is_some_and(|&b| values[b] <= values[next]) {
                window.pop_back();
            }
            window.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while window.front().is_some_and(|&f| f < lo) {
            window.pop_front();
        }
        out.push(values[window[0]]);
    }
    out
}

fn max_in(y: &[f64], times: &[f64], from: f64, to: f64) -> Option<(usize, f64)> {
    let (a, b) = (index_at(times, from), index_at(times, to).min(y.len()));
    (a..b).map(|i| (i, y[i])).max_by(|p, q| p.1.total_cmp(&q.1))
}

/// Revival time from the envelope of `|A|^2` (running maximum over
/// `window * t_cl_hint`), searched from `revival_start * t_cl_hint` on.
///
/// A flat envelope marks an equally spaced spectrum. When the strongest
/// candidate has an equally strong partner near twice its time and nothing
/// comparable near half its time, it is taken to be the half revival and the
/// partner is reported instead.
pub fn detect_revival(ac: &Autocorrelation, t_cl_hint: f64, settings: &DetectorSettings) -> Result<RevivalDetection> {
    if !(t_cl_hint > 0.0 && t_cl_hint.is_finite()) {
        return Err(Error::Domain(format!(
            "classical period hint must be positive, got {t_cl_hint}"
        )));
    }
    let dt = ac.sample_interval();
    let width = settings.window * t_cl_hint;
    let half = ((0.5 * width / dt).round() as usize).max(1);
    let y = ac.abs2();
    let times = &ac.times;
    let start = index_at(times, settings.revival_start * t_cl_hint);
    if start + 2 * half + 1 >= y.len() {
        return Err(Error::Domain(format!(
            "run too short for a revival search: ends at t = {}, search starts at {}",
            times.last().copied().unwrap_or(0.0),
            settings.revival_start * t_cl_hint
        )));
    }

    let envelope = sliding_max(&y, half);
    let full = &envelope[start.max(half)..y.len() - half];
    let env_max = full.iter().copied().fold(f64::MIN, f64::max);
    let env_min = full.iter().copied().fold(f64::MAX, f64::min);
    if env_min >= settings.degenerate_flatness * env_max {
        let i = first_peak(&y, index_at(times, 0.5 * t_cl_hint), settings.prominence)
            .ok_or_else(|| Error::Domain("flat envelope without a reconstruction peak".into()))?;
        return Ok(RevivalDetection {
            time: times[i] + parabolic_offset(&y, i) * dt,
            uncertainty: width,
            envelope_peak: env_max,
            status: DetectionStatus::DegenerateLinear,
            half_revival: None,
        });
    }

    let end = *times.last().expect("non-empty series");
    let (mut best, mut height) = max_in(&y, times, times[start], end + dt).expect("non-empty search range");
    let mut half_revival = None;
    let t_g = times[best];
    let threshold = settings.partner_ratio * height;
    let partner = max_in(&y, times, 1.8 * t_g, 2.2 * t_g).filter(|&(_, v)| v >= threshold);
    let shadow = max_in(&y, times, 0.4 * t_g, 0.6 * t_g).is_some_and(|(_, v)| v >= threshold);
    if let (Some((i, v)), false) = (partner, shadow) {
        half_revival = Some(t_g);
        best = i;
        height = v;
    }

    Ok(RevivalDetection {
        time: times[best] + parabolic_offset(&y, best) * dt,
        uncertainty: width,
        envelope_peak: height,
        status: if height < settings.weak_revival {
            DetectionStatus::WeakRevival
        } else {
            DetectionStatus::Detected
        },
        half_revival,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub t_cl_detected: f64,
    pub t_cl_uncertainty: f64,
    pub t_cl_status: DetectionStatus,
    pub t_cl_peak_height: f64,
    pub t_cl_predicted: f64,
    pub t_cl_relative_error: f64,
    pub t_q_detected: f64,
    pub t_q_uncertainty: f64,
    pub t_q_status: Option<DetectionStatus>,
    pub t_q_envelope_peak: f64,
    pub t_q_predicted: f64,
    pub t_q_relative_error: f64,
    pub half_revival: Option<f64>,
    pub lambda: f64,
    /// Driven classical period including the rotating-frame factor `Delta`.
    pub tlam_cl: f64,
    pub delta: f64,
    pub mu: f64,
    /// Predicted fractional change of the classical period, `-M0_cl`.
    pub predicted_cl_shift: f64,
    /// Predicted fractional change of the revival time, `-M0_Q`.
    pub predicted_q_shift: f64,
    pub note: String,
}

impl RecurrenceReport {
    /// Flat key-value document; non-finite numbers become strings.
    pub fn to_json(&self) -> Map<String, Value> {
        let status = |s: Option<DetectionStatus>| {
            s.map_or(Value::Null, |s| serde_json::to_value(s).expect("unit enum serializes"))
        };
        let mut m = Map::new();
        m.insert("t_cl_detected".into(), json_number(self.t_cl_detected));
        m.insert("t_cl_uncertainty".into(), json_number(self.t_cl_uncertainty));
        m.insert("t_cl_status".into(), status(Some(self.t_cl_status)));
        m.insert("t_cl_peak_height".into(), json_number(self.t_cl_peak_height));
        m.insert("t_cl_predicted".into(), json_number(self.t_cl_predicted));
        m.insert("t_cl_relative_error".into(), json_number(self.t_cl_relative_error));
        m.insert("t_q_detected".into(), json_number(self.t_q_detected));
        m.insert("t_q_uncertainty".into(), json_number(self.t_q_uncertainty));
        m.insert("t_q_status".into(), status(self.t_q_status));
        m.insert("t_q_envelope_peak".into(), json_number(self.t_q_envelope_peak));
        m.insert("t_q_predicted".into(), json_number(self.t_q_predicted));
        m.insert("t_q_relative_error".into(), json_number(self.t_q_relative_error));
        m.insert(
            "half_revival".into(),
            self.half_revival.map_or(Value::Null, json_number),
        );
        m.insert("lambda".into(), json_number(self.lambda));
        m.insert("tlam_cl".into(), json_number(self.tlam_cl));
        m.insert("delta".into(), json_number(self.delta));
        m.insert("mu".into(), json_number(self.mu));
        m.insert("predicted_cl_shift".into(), json_number(self.predicted_cl_shift));
        m.insert("predicted_q_shift".into(), json_number(self.predicted_q_shift));
        m.insert("note".into(), Value::from(self.note.clone()));
        m
    }
}

fn relative_error(detected: f64, predicted: f64) -> f64 {
    if predicted.is_finite() && detected.is_finite() {
        (detected - predicted).abs() / predicted.abs()
    } else {
        f64::NAN
    }
}

/// Detected times against the closed-form predictions for `spectrum` and
/// `drive`.
///
/// Detections come from the lab-frame autocorrelation, so for a driven run
/// the classical prediction is `(1 - M0_cl) T0_cl`; the rotating-frame value
/// `Tlam_cl = (1 - M0_cl) T0_cl Delta` is reported alongside.
pub fn compare(
    classical: &Detection,
    revival: Option<&RevivalDetection>,
    spectrum: &SpectrumModel,
    drive: &DriveSpec,
) -> Result<RecurrenceReport> {
    let (t_cl_predicted, t_q_predicted, tlam_cl, delta, mu, m0_cl, m0_q, note) = if drive.lambda == 0.0 {
        let (cl, q) = undriven_times(spectrum)?;
        (cl, q, f64::NAN, f64::NAN, f64::NAN, 0.0, 0.0, "undriven".to_string())
    } else {
        let t = driven_times(spectrum, drive)?;
        (
            (1.0 - t.m0_cl) * t.t0_cl,
            t.tlam_q,
            t.tlam_cl,
            t.delta,
            t.mu,
            t.m0_cl,
            t.m0_q,
            "driven: detections are lab-frame; tlam_cl carries the rotating-frame factor delta".to_string(),
        )
    };
    let (t_q_detected, t_q_uncertainty, t_q_status, t_q_envelope_peak, half_revival) = match revival {
        Some(r) => (r.time, r.uncertainty, Some(r.status), r.envelope_peak, r.half_revival),
        None => (f64::NAN, f64::NAN, None, f64::NAN, None),
    };
    let t_q_relative_error = match t_q_status {
        Some(DetectionStatus::DegenerateLinear) | None => f64::NAN,
        Some(_) => relative_error(t_q_detected, t_q_predicted),
    };
    Ok(RecurrenceReport {
        t_cl_detected: classical.time,
        t_cl_uncertainty: classical.uncertainty,
        t_cl_status: classical.status,
        t_cl_peak_height: classical.peak_height,
        t_cl_predicted,
        t_cl_relative_error: relative_error(classical.time, t_cl_predicted),
        t_q_detected,
        t_q_uncertainty,
        t_q_status,
        t_q_envelope_peak,
        t_q_predicted,
        t_q_relative_error,
        half_revival,
        lambda: drive.lambda,
        tlam_cl,
        delta,
        mu,
        predicted_cl_shift: -m0_cl,
        predicted_q_shift: -m0_q,
        note,
    })
}

/// JSON value for `x`, with non-finite numbers as the strings `"inf"`,
/// `"-inf"` and `"nan"`.
pub fn json_number(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}
