//! Quasienergies of a nonlinear spectrum driven near an `N`-photon resonance.
//!
//! In the pendulum approximation the amplitudes on levels `n = n_bar + m`
//! obey a tridiagonal recursion coupling `m` to `m +- N`. Its quasienergy
//! spectrum follows from Mathieu characteristic values
//! ([`quasienergy`]) or from diagonalizing the recursion directly
//! ([`pendulum_matrix_eigs`]); the two routes are independent checks of
//! each other.

pub mod mathieu;
mod pendulum;

pub use mathieu::{default_basis_size, mathieu_char_value, min_basis_size, MathieuResult};
pub use pendulum::{default_span, pendulum_matrix, pendulum_matrix_eigs, PendulumSpectrum};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::SpectrumModel;

/// Periodic drive `lambda V(x) sin t` resonant with `N` photons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub lambda: f64,
    /// Matrix element `V = <n_bar|V|n_bar +- N>` of the drive coupling.
    pub v_coupling: f64,
    pub order: u32,
}

impl DriveSpec {
    pub fn new(lambda: f64, v_coupling: f64, order: u32) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        if !v_coupling.is_finite() {
            return Err(Error::Domain(format!("coupling must be finite, got {v_coupling}")));
        }
        if order == 0 {
            return Err(Error::Domain("resonance order must be >= 1".into()));
        }
        Ok(Self {
            lambda,
            v_coupling,
            order,
        })
    }

    pub fn undriven(order: u32) -> Result<Self> {
        Self::new(0.0, 0.0, order)
    }

    /// Product `lambda V`.
    pub fn strength(&self) -> f64 {
        self.lambda * self.v_coupling
    }

    /// Resonant frequency `omega_N = 1/N`.
    pub fn omega_n(&self) -> f64 {
        1.0 / self.order as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiEnergy {
    pub epsilon: f64,
    pub nu: f64,
    pub q: f64,
    pub a_nu: f64,
    /// Level offset `n - n_bar` the quasienergy belongs to.
    pub offset: f64,
}

fn require_nonlinear(spectrum: &SpectrumModel) -> Result<()> {
    if spectrum.zeta == 0.0 {
        return Err(Error::DegenerateSpectrum(
            "no Mathieu reduction for an equally spaced spectrum".into(),
        ));
    }
    Ok(())
}

/// Mathieu parameter `q = 4 lambda V / (N^2 kbar^2 zeta)`.
pub fn mathieu_q(spectrum: &SpectrumModel, drive: &DriveSpec) -> Result<f64> {
    require_nonlinear(spectrum)?;
    let n = drive.order as f64;
    Ok(4.0 * drive.strength() / (n * n * spectrum.kbar * spectrum.kbar * spectrum.zeta))
}

/// Floquet exponent `nu` labelling the state at level offset `offset`.
pub fn mathieu_index(spectrum: &SpectrumModel, drive: &DriveSpec, offset: f64) -> Result<f64> {
    require_nonlinear(spectrum)?;
    let n = drive.order as f64;
    let detuning = spectrum.omega - drive.omega_n();
    Ok(2.0 * offset / n + 2.0 * detuning / (n * spectrum.kbar * spectrum.zeta))
}

pub fn quasienergy(spectrum: &SpectrumModel, drive: &DriveSpec, offset: i64) -> Result<QuasiEnergy> {
    quasienergy_at(spectrum, drive, offset as f64)
}

/// Quasienergy continued to a real level offset, for finite differences in `n`.
pub fn quasienergy_at(spectrum: &SpectrumModel, drive: &DriveSpec, offset: f64) -> Result<QuasiEnergy> {
    let q = mathieu_q(spectrum, drive)?;
    let nu = mathieu_index(spectrum, drive, offset)?;
    let a_nu = mathieu_char_value(nu, q, default_basis_size(nu))?.a_nu;
    let n = drive.order as f64;
    let kbar = spectrum.kbar;
    let zeta = spectrum.zeta;
    let detuning = spectrum.omega - drive.omega_n();
    let epsilon = n * n * kbar * kbar * zeta / 8.0 * a_nu - detuning * detuning / (2.0 * zeta);
    Ok(QuasiEnergy {
        epsilon,
        nu,
        q,
        a_nu,
        offset,
    })
}
