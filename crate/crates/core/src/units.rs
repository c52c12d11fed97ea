//! Dimensionless scaling of the driven problem.
//!
//! Positions are measured in units of the potential's length scale `a`,
//! momenta in `sqrt(m hbar Omega)` and time in inverse drive periods
//! (`t = Omega tau`). The commutator of the scaled variables then carries an
//! effective Planck constant `kbar = sqrt(hbar / (m Omega)) / a`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScales {
    pub length: f64,
    pub mass: f64,
    pub hbar: f64,
    pub omega_drive: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledUnits {
    kbar: f64,
    physical: Option<PhysicalScales>,
}

impl ScaledUnits {
    pub fn new(kbar: f64) -> Result<Self> {
        ensure_positive("kbar", kbar)?;
        Ok(Self { kbar, physical: None })
    }

    pub fn from_physical(scales: PhysicalScales) -> Result<Self> {
        let kbar = derive_kbar(scales.length, scales.mass, scales.hbar, scales.omega_drive)?;
        Ok(Self {
            kbar,
            physical: Some(scales),
        })
    }

    pub fn kbar(&self) -> f64 {
        self.kbar
    }

    pub fn physical(&self) -> Option<&PhysicalScales> {
        self.physical.as_ref()
    }

    /// Scaled energy `E / (hbar Omega)`; only available with physical scales.
    pub fn scale_energy(&self, energy: f64) -> Option<Result<f64>> {
        self.physical.map(|p| scale_energy(energy, p.hbar, p.omega_drive))
    }
}

/// Effective Planck constant `(1/a) sqrt(hbar / (m omega))`.
pub fn derive_kbar(length: f64, mass: f64, hbar: f64, omega: f64) -> Result<f64> {
    ensure_positive("length scale", length)?;
    ensure_positive("mass", mass)?;
    ensure_positive("hbar", hbar)?;
    ensure_positive("omega", omega)?;
    Ok((hbar / (mass * omega)).sqrt() / length)
}

pub fn scale_energy(energy: f64, hbar: f64, omega: f64) -> Result<f64> {
    ensure_positive("hbar", hbar)?;
    ensure_positive("omega", omega)?;
    Ok(energy / (hbar * omega))
}
