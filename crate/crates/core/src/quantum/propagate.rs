use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{DriveShape, Grid, WaveState, POTENTIAL_CAP};
use crate::error::{ensure_positive, Error, Result};
use crate::resonance::DriveSpec;
use crate::spectrum::{DomainKind, PotentialSpec};

/// Run-time sanity limits, checked at every sampled step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationChecks {
    pub max_norm_drift: f64,
    /// Largest `|psi|` tolerated in the outer boundary strip; `None` disables the check.
    pub max_boundary_amplitude: Option<f64>,
    pub boundary_fraction: f64,
}

impl Default for PropagationChecks {
    fn default() -> Self {
        Self {
            max_norm_drift: 1e-6,
            max_boundary_amplitude: Some(1e-4),
            boundary_fraction: 0.05,
        }
    }
}

/// Strang-split propagator: half potential kick, exact kinetic step in the
/// sine basis, half potential kick. The drive is evaluated at the midpoint
/// of each step, which keeps the scheme time-reversible for `dt -> -dt`.
pub struct Propagator {
    grid: Grid,
    kbar: f64,
    dt: f64,
    lambda: f64,
    static_v: Vec<f64>,
    drive_v: Vec<f64>,
    /// Kinetic phases per sine mode, with the transform normalization folded in.
    kinetic: Vec<Complex64>,
    /// Half-step potential phases for the current step.
    kick: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    coefficients: Vec<Complex64>,
    scratch: Vec<Complex64>,
    checks: PropagationChecks,
    truncated: bool,
}

impl Propagator {
    pub fn new(
        potential: &PotentialSpec,
        kbar: f64,
        lambda: f64,
        shape: DriveShape,
        grid: Grid,
        dt: f64,
    ) -> Result<Self> {
        ensure_positive("kbar", kbar)?;
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::Domain(format!(
                "time step must be finite and non-zero, got {dt}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda must be finite, got {lambda}")));
        }
        grid.check_domain(potential)?;
        let n = grid.n_points();
        let static_v: Vec<f64> = grid.points().map(|x| potential.value(x).min(POTENTIAL_CAP)).collect();
        let drive_v: Vec<f64> = grid.points().map(|x| shape.value(potential, x)).collect();
        let norm = -1.0 / (2.0 * n as f64);
        let kinetic = (0..n)
            .map(|m| {
                let k = std::f64::consts::PI * m as f64 / grid.length();
                Complex64::from_polar(norm, -0.5 * kbar * k * k * dt)
            })
            .collect();
        let kick: Vec<Complex64> = static_v
            .iter()
            .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * kbar)))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(2 * n);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Ok(Self {
            grid,
            kbar,
            dt,
            lambda,
            static_v,
            drive_v,
            kinetic,
            kick,
            fft,
            buffer: vec![Complex64::new(0.0, 0.0); 2 * n],
            coefficients: vec![Complex64::new(0.0, 0.0); n],
            scratch,
            checks: PropagationChecks::default(),
            truncated: potential.domain() == DomainKind::Truncated,
        })
    }

    pub fn from_drive(
        potential: &PotentialSpec,
        kbar: f64,
        drive: &DriveSpec,
        shape: DriveShape,
        grid: Grid,
        dt: f64,
    ) -> Result<Self> {
        Self::new(potential, kbar, drive.lambda, shape, grid, dt)
    }

    pub fn with_checks(mut self, checks: PropagationChecks) -> Self {
        self.checks = checks;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn update_kick(&mut self, t_mid: f64) {
        if self.lambda == 0.0 {
            return;
        }
        let drive = self.lambda * t_mid.sin();
        let factor = -self.dt / (2.0 * self.kbar);
        for ((k, v), w) in self.kick.iter_mut().zip(&self.static_v).zip(&self.drive_v) {
            *k = Complex64::from_polar(1.0, (v + drive * w) * factor);
        }
    }

    fn apply_kick(&self, psi: &mut [Complex64]) {
        psi.iter_mut().zip(&self.kick).for_each(|(p, k)| *p *= k);
    }

    fn kinetic_step(&mut self, psi: &mut [Complex64]) {
        let n = self.grid.n_points();
        odd_fft(&*self.fft, &mut self.buffer, &mut self.scratch, |j| psi[j]);
        // sine coefficients are (i/2) FFT; the inverse is (i/n) FFT of the
        // odd extension, so the product -1/(2n) sits in `kinetic`
        for m in 0..n {
            self.coefficients[m] = self.buffer[m] * self.kinetic[m];
        }
        let coefficients = &self.coefficients;
        odd_fft(&*self.fft, &mut self.buffer, &mut self.scratch, |m| coefficients[m]);
        psi[1..n].copy_from_slice(&self.buffer[1..n]);
        psi[0] = Complex64::new(0.0, 0.0);
    }

    /// Advance `state` by one step `dt`.
    pub fn step(&mut self, state: &mut WaveState) {
        self.update_kick(state.t + 0.5 * self.dt);
        self.apply_kick(&mut state.psi);
        self.kinetic_step(&mut state.psi);
        self.apply_kick(&mut state.psi);
        state.t += self.dt;
    }

    fn boundary_amplitude(&self, state: &WaveState) -> f64 {
        let n = self.grid.n_points();
        let strip = ((self.checks.boundary_fraction * n as f64).ceil() as usize).max(1);
        let right = state.psi[n - strip..].iter();
        let amp = |z: &Complex64| z.norm();
        if self.truncated {
            right.map(amp).fold(0.0, f64::max)
        } else {
            right.chain(state.psi[..strip].iter()).map(amp).fold(0.0, f64::max)
        }
    }

    fn check(&self, state: &WaveState, norm0: f64) -> Result<()> {
        let drift = (state.norm() - norm0).abs();
        if drift > self.checks.max_norm_drift || !drift.is_finite() {
            return Err(Error::Stability { drift, t: state.t });
        }
        if let Some(limit) = self.checks.max_boundary_amplitude {
            let amplitude = self.boundary_amplitude(state);
            if amplitude > limit {
                return Err(Error::BoundaryReflection { amplitude, t: state.t });
            }
        }
        Ok(())
    }

    /// Take `n_steps` steps, handing the initial state and every
    /// `stride`-th state to `observer` after the run checks pass.
    pub fn run<F>(&mut self, state: &mut WaveState, n_steps: usize, stride: usize, mut observer: F) -> Result<()>
    where
        F: FnMut(&WaveState) -> Result<()>,
    {
        if state.grid != self.grid {
            return Err(Error::GridMismatch("state and propagator grids differ".into()));
        }
        if stride == 0 {
            return Err(Error::Domain("sample stride must be >= 1".into()));
        }
        let norm0 = state.norm();
        self.check(state, norm0)?;
        observer(state)?;
        for step in 1..=n_steps {
            self.step(state);
            if step % stride == 0 {
                self.check(state, norm0)?;
                observer(state)?;
            }
        }
        self.check(state, norm0)
    }
}

/// FFT of the odd extension `[0, v_1 .. v_{n-1}, 0, -v_{n-1} .. -v_1]`.
fn odd_fft(
    fft: &dyn Fft<f64>,
    buffer: &mut [Complex64],
    scratch: &mut [Complex64],
    values: impl Fn(usize) -> Complex64,
) {
    let n = buffer.len() / 2;
    let zero = Complex64::new(0.0, 0.0);
    buffer[0] = zero;
    buffer[n] = zero;
    for j in 1..n {
        let v = values(j);
        buffer[j] = v;
        buffer[2 * n - j] = -v;
    }
    fft.process_with_scratch(buffer, scratch);
}

/// Largest step for which no grid mode advances its phase by more than `2 pi`
/// per step. Beyond it the splitting couples the packet to spurious
/// high-lying grid states that leak towards the boundary.
pub fn phase_wrap_dt(potential: &PotentialSpec, kbar: f64, grid: &Grid) -> f64 {
    let k_max = std::f64::consts::PI * grid.n_points() as f64 / grid.length();
    let v_max = grid
        .points()
        .map(|x| potential.value(x).min(POTENTIAL_CAP))
        .fold(0.0, f64::max);
    2.0 * std::f64::consts::PI / (0.5 * kbar * k_max * k_max + v_max / kbar)
}

/// Propagate `state` for `n_steps` and collect every `stride`-th state,
/// starting with the initial one.
#[allow(clippy::too_many_arguments)]
pub fn propagate(
    state: &WaveState,
    potential: &PotentialSpec,
    drive: &DriveSpec,
    kbar: f64,
    dt: f64,
    n_steps: usize,
    shape: DriveShape,
    stride: usize,
) -> Result<Vec<WaveState>> {
    let mut propagator = Propagator::from_drive(potential, kbar, drive, shape, state.grid, dt)?;
    let mut current = state.clone();
    let mut samples = Vec::with_capacity(n_steps / stride.max(1) + 1);
    propagator.run(&mut current, n_steps, stride, |s| {
        samples.push(s.clone());
        Ok(())
    })?;
    Ok(samples)
}
