//! Classical periods and quantum revival times, with and without the drive.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::resonance::{quasienergy_at, DriveSpec};
use crate::spectrum::SpectrumModel;

/// Guard on `|1 - mu^2|` and `|1 - omega_N / omega|`.
const SINGULAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `rho > 0`, spacing grows with `n`.
    Tight,
    Harmonic,
    /// `-2 < rho < 0`.
    Loose,
    Free,
}

impl Regime {
    pub fn from_rho(rho: f64) -> Self {
        if rho > 0.0 {
            Regime::Tight
        } else if rho == 0.0 {
            Regime::Harmonic
        } else if rho > -2.0 {
            Regime::Loose
        } else {
            Regime::Free
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceTimes {
    pub t0_cl: f64,
    /// `+inf` for an equally spaced spectrum.
    pub t0_q: f64,
    pub tlam_cl: f64,
    pub tlam_q: f64,
    pub delta: f64,
    pub mu: f64,
    pub m0_cl: f64,
    pub m0_q: f64,
    pub omega_n: f64,
    pub regime: Regime,
    pub zeta_sign: i8,
}

impl RecurrenceTimes {
    /// `rho = -2`: the spectrum is flat and nothing recurs.
    pub fn free_particle() -> Self {
        Self {
            t0_cl: f64::INFINITY,
            t0_q: f64::INFINITY,
            tlam_cl: f64::INFINITY,
            tlam_q: f64::INFINITY,
            delta: f64::NAN,
            mu: f64::NAN,
            m0_cl: 0.0,
            m0_q: 0.0,
            omega_n: f64::NAN,
            regime: Regime::Free,
            zeta_sign: 0,
        }
    }

    /// Fractional drive-induced change of the classical period, `-M0_cl`.
    pub fn classical_shift(&self) -> f64 {
        -self.m0_cl
    }

    /// Fractional drive-induced change of the revival time, `-M0_Q`.
    pub fn revival_shift(&self) -> f64 {
        -self.m0_q
    }
}

fn check_regime(spectrum: &SpectrumModel) -> Result<()> {
    let rho = spectrum.rho();
    if rho <= -2.0 {
        return Err(Error::Regime {
            rho,
            reason: "free-particle limit: the classical period and revival time are infinite".into(),
        });
    }
    Ok(())
}

/// `(T0_cl, T0_Q)` from the local spectrum: `2 pi / omega` and
/// `2 pi / (kbar |zeta| / 2)`.
pub fn undriven_times(spectrum: &SpectrumModel) -> Result<(f64, f64)> {
    check_regime(spectrum)?;
    let t0_cl = 2.0 * PI / spectrum.omega;
    let t0_q = if spectrum.zeta == 0.0 {
        f64::INFINITY
    } else {
        4.0 * PI / (spectrum.kbar * spectrum.zeta.abs())
    };
    Ok((t0_cl, t0_q))
}

/// Same as [`undriven_times`] written through `rho`, `s = n_bar + gamma/4`
/// and `E`.
pub fn undriven_times_rho_form(spectrum: &SpectrumModel) -> Result<(f64, f64)> {
    check_regime(spectrum)?;
    let rho = spectrum.rho();
    let s = spectrum.shifted_level();
    let e = spectrum.e_nbar;
    let kbar = spectrum.kbar;
    let t0_cl = PI * kbar * (4.0 + rho) / (2.0 + rho) * s / e;
    let t0_q = if rho == 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI * kbar * (4.0 + rho).powi(2) / (rho.abs() * (2.0 + rho)) * s * s / e
    };
    Ok((t0_cl, t0_q))
}

/// `Delta = (1 - omega_N / omega)^-1`.
pub fn detuning_factor(omega: f64, order: u32) -> Result<f64> {
    let ratio = 1.0 / (order as f64 * omega);
    if (1.0 - ratio).abs() < SINGULAR_TOL {
        return Err(Error::DetuningSingularity { omega, order });
    }
    Ok(1.0 / (1.0 - ratio))
}

struct Shifts {
    m0_cl: f64,
    m0_q: f64,
}

/// `x` is the drive-strength ratio `lambda V zeta Delta^2 / omega^2`.
fn modification_factors(x: f64, mu: f64) -> Result<Shifts> {
    let gap = 1.0 - mu * mu;
    if gap.abs() < SINGULAR_TOL {
        return Err(Error::ResonanceSingularity { mu, gap });
    }
    let x2 = x * x;
    Ok(Shifts {
        m0_cl: -0.5 * x2 / (gap * gap),
        m0_q: 0.5 * x2 * (3.0 + mu * mu) / (gap * gap * gap),
    })
}

fn zeta_sign(zeta: f64) -> i8 {
    if zeta > 0.0 {
        1
    } else if zeta < 0.0 {
        -1
    } else {
        0
    }
}

fn assemble(
    spectrum: &SpectrumModel,
    drive: &DriveSpec,
    (t0_cl, t0_q): (f64, f64),
    delta: f64,
    mu: f64,
    x: f64,
) -> Result<RecurrenceTimes> {
    let regime = Regime::from_rho(spectrum.rho());
    let shifts = if spectrum.zeta == 0.0 {
        Shifts { m0_cl: 0.0, m0_q: 0.0 }
    } else {
        modification_factors(x, mu)?
    };
    let tlam_q = if t0_q.is_infinite() {
        f64::INFINITY
    } else {
        (1.0 - shifts.m0_q) * t0_q
    };
    Ok(RecurrenceTimes {
        t0_cl,
        t0_q,
        tlam_cl: (1.0 - shifts.m0_cl) * t0_cl * delta,
        tlam_q,
        delta,
        mu,
        m0_cl: shifts.m0_cl,
        m0_q: shifts.m0_q,
        omega_n: drive.omega_n(),
        regime,
        zeta_sign: zeta_sign(spectrum.zeta),
    })
}

/// Driven classical period and revival time from `omega`, `zeta`, `Delta`.
///
/// The drive shifts only nonlinear spectra; for `zeta = 0` the driven
/// period is `T0_cl Delta` and the revival time stays infinite.
pub fn driven_times(spectrum: &SpectrumModel, drive: &DriveSpec) -> Result<RecurrenceTimes> {
    let undriven = undriven_times(spectrum)?;
    let omega = spectrum.omega;
    let delta = detuning_factor(omega, drive.order)?;
    let n = drive.order as f64;
    let mu = n * spectrum.kbar * spectrum.zeta * delta / (2.0 * omega);
    let x = drive.strength() * spectrum.zeta * delta * delta / (omega * omega);
    assemble(spectrum, drive, undriven, delta, mu, x)
}

/// [`driven_times`] evaluated through `rho`, `s` and `E` only.
pub fn driven_times_rho_form(spectrum: &SpectrumModel, drive: &DriveSpec) -> Result<RecurrenceTimes> {
    let undriven = undriven_times_rho_form(spectrum)?;
    let rho = spectrum.rho();
    let s = spectrum.shifted_level();
    let e = spectrum.e_nbar;
    let omega = 2.0 * (2.0 + rho) / (spectrum.kbar * (4.0 + rho)) * e / s;
    let delta = detuning_factor(omega, drive.order)?;
    let n = drive.order as f64;
    let mu = n * rho * delta / (2.0 * (4.0 + rho) * s);
    let x = drive.strength() * rho * delta * delta / (2.0 * (2.0 + rho) * e);
    assemble(spectrum, drive, undriven, delta, mu, x)
}

/// [`driven_times`] for a driven system; with `lambda = 0` there is no
/// resonance frame, so `Tlam = T0` and the frame quantities are `NaN`.
pub fn recurrence_times(spectrum: &SpectrumModel, drive: &DriveSpec) -> Result<RecurrenceTimes> {
    if drive.lambda != 0.0 {
        return driven_times(spectrum, drive);
    }
    let (t0_cl, t0_q) = undriven_times(spectrum)?;
    Ok(RecurrenceTimes {
        t0_cl,
        t0_q,
        tlam_cl: t0_cl,
        tlam_q: t0_q,
        delta: f64::NAN,
        mu: f64::NAN,
        m0_cl: 0.0,
        m0_q: 0.0,
        omega_n: drive.omega_n(),
        regime: Regime::from_rho(spectrum.rho()),
        zeta_sign: zeta_sign(spectrum.zeta),
    })
}

/// Closed forms for the linear potential `V0 |x|`.
pub mod linear {
    use std::f64::consts::PI;

    /// Level energy of the whole-line linear potential.
    pub fn energy(kbar: f64, v0: f64, n: f64, gamma: f64) -> f64 {
        ((n + gamma / 4.0) * 3.0 * kbar * PI / (4.0 * 2f64.sqrt()) * v0).powf(2.0 / 3.0)
    }

    /// Local spectrum around `s = n_bar + gamma/4` with level energy `e`.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct LinearForms {
        pub kbar: f64,
        pub s: f64,
        pub e: f64,
    }

    impl LinearForms {
        pub fn omega(&self) -> f64 {
            2.0 / (3.0 * self.kbar) * self.e / self.s
        }

        pub fn zeta(&self) -> f64 {
            -2.0 / (9.0 * self.kbar * self.kbar) * self.e / (self.s * self.s)
        }

        pub fn t0_cl(&self) -> f64 {
            3.0 * PI * self.kbar / self.e * self.s
        }

        pub fn t0_q(&self) -> f64 {
            18.0 * PI * self.kbar / self.e * self.s * self.s
        }

        pub fn mu(&self, delta: f64, order: u32) -> f64 {
            -(order as f64) * delta / (6.0 * self.s)
        }

        fn ratio(&self, strength: f64, delta: f64) -> f64 {
            strength * delta * delta / (2.0 * self.e)
        }

        pub fn tlam_cl(&self, strength: f64, delta: f64, order: u32) -> f64 {
            let mu = self.mu(delta, order);
            let r = self.ratio(strength, delta);
            (1.0 + 0.5 * r * r / (1.0 - mu * mu).powi(2)) * self.t0_cl() * delta
        }

        pub fn tlam_q(&self, strength: f64, delta: f64, order: u32) -> f64 {
            let mu = self.mu(delta, order);
            let r = self.ratio(strength, delta);
            (1.0 - 0.5 * r * r * (3.0 + mu * mu) / (1.0 - mu * mu).powi(3)) * self.t0_q()
        }
    }
}

/// Times `T^(j) = 2 pi j! kbar / d^j eps / dn^j` from five-point central
/// differences of the quasienergy around `n_bar`, with step `step` in `n`.
///
/// `T^(1)` keeps its sign; `T^(2)` uses `|d^2 eps / dn^2|`.
pub fn times_from_quasienergy(spectrum: &SpectrumModel, drive: &DriveSpec, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Domain(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let eps = |k: f64| quasienergy_at(spectrum, drive, k * step).map(|q| q.epsilon);
    let (m2, m1, c, p1, p2) = (eps(-2.0)?, eps(-1.0)?, eps(0.0)?, eps(1.0)?, eps(2.0)?);
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * step * step);
    let kbar = spectrum.kbar;
    Ok((2.0 * PI * kbar / d1, 4.0 * PI * kbar / d2.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumRuleResiduals {
    /// `3 Tlam_cl / (4 T0_cl) + Tlam_Q / (4 T0_Q) - 1`.
    pub tight: f64,
    /// `Tlam_cl / T0_cl - Tlam_Q / (4 T0_Q)`.
    pub loose: f64,
}

/// Residuals of the approximate small-`rho` relations between driven and
/// undriven times. Diagnostic only: they hold exactly only for `Delta = 1`
/// and `mu = 0`, and the loose form does not reduce to zero at `lambda = 0`.
pub fn sum_rule_check(spectrum: &SpectrumModel, drive: &DriveSpec) -> Result<SumRuleResiduals> {
    let t = driven_times(spectrum, drive)?;
    let cl = t.tlam_cl / t.t0_cl;
    let q = if t.t0_q.is_infinite() { 1.0 } else { t.tlam_q / t.t0_q };
    Ok(SumRuleResiduals {
        tight: 0.75 * cl + 0.25 * q - 1.0,
        loose: cl - 0.25 * q,
    })
}
