//! Grid eigensolver and split-operator propagator for
//! `i kbar dpsi/dt = [-(kbar^2/2) d^2/dx^2 + V0 |x|^k + lambda V(x) sin t] psi`.
//!
//! Both work in the sine basis of the box `[x_min, x_max]` with Dirichlet
//! walls, so the eigenstates are exact stationary states of the propagator's
//! kinetic operator and a truncated potential gets its hard wall at `x = 0`
//! for free.

mod eigen;
mod propagate;
mod snapshot;

pub use eigen::{
    auto_grid, build_wavepacket, coupling_estimate, matrix_element, solve_eigen, wavepacket_coefficients, EigenBasis,
};
pub use propagate::{phase_wrap_dt, propagate, PropagationChecks, Propagator};
pub use snapshot::{read_snapshot, write_snapshot};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{DomainKind, PotentialSpec};

/// Cap on grid potential values; keeps `|x|^k` finite for very large `k`.
pub(crate) const POTENTIAL_CAP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    /// `n_points` intervals of width `(x_max - x_min) / n_points`; the wave
    /// function vanishes on both end points.
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::Domain(format!(
                "grid needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 256 || !n_points.is_power_of_two() {
            return Err(Error::Domain(format!(
                "n_points must be a power of two >= 256, got {n_points}"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid matching the domain of `potential`: `[0, extent]` when truncated,
    /// `[-extent, extent]` otherwise.
    pub fn for_potential(potential: &PotentialSpec, extent: f64, n_points: usize) -> Result<Self> {
        match potential.domain() {
            DomainKind::Symmetric => Self::new(-extent, extent, n_points),
            DomainKind::Truncated => Self::new(0.0, extent, n_points),
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.x(j))
    }

    pub(crate) fn check_domain(&self, potential: &PotentialSpec) -> Result<()> {
        if potential.domain() == DomainKind::Truncated && self.x_min != 0.0 {
            return Err(Error::GridMismatch(format!(
                "truncated potential needs x_min = 0, grid starts at {}",
                self.x_min
            )));
        }
        Ok(())
    }
}

/// Spatial profile `V(x)` of the drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveShape {
    /// `V0 |x|^k`, modulating the binding potential itself.
    #[default]
    Potential,
    /// `x`.
    Linear,
}

impl DriveShape {
    pub fn value(self, potential: &PotentialSpec, x: f64) -> f64 {
        match self {
            DriveShape::Potential => potential.value(x).min(POTENTIAL_CAP),
            DriveShape::Linear => x,
        }
    }
}

/// Wave function on a [`Grid`]. Index 0 is the left wall and always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub grid: Grid,
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl WaveState {
    pub fn new(grid: Grid, psi: Vec<Complex64>, t: f64) -> Result<Self> {
        if psi.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a grid of {} points",
                psi.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, psi, t })
    }

    /// Normalized Gaussian `exp(-(x-x0)^2/(4 width^2) + i p0 x / kbar)`.
    pub fn gaussian(grid: Grid, x0: f64, width: f64, p0: f64, kbar: f64) -> Result<Self> {
        crate::error::ensure_positive("width", width)?;
        crate::error::ensure_positive("kbar", kbar)?;
        let mut psi: Vec<Complex64> = grid
            .points()
            .map(|x| {
                let envelope = (-(x - x0).powi(2) / (4.0 * width * width)).exp();
                Complex64::from_polar(envelope, p0 * x / kbar)
            })
            .collect();
        psi[0] = Complex64::new(0.0, 0.0);
        let mut state = Self { grid, psi, t: 0.0 };
        state.normalize()?;
        Ok(state)
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain(format!("cannot normalize a state of norm {norm}")));
        }
        let scale = 1.0 / norm.sqrt();
        self.psi.iter_mut().for_each(|z| *z *= scale);
        Ok(())
    }

    /// `<self|other>` by grid quadrature.
    pub fn overlap(&self, other: &WaveState) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("states live on different grids".into()));
        }
        let sum: Complex64 = self.psi.iter().zip(&other.psi).map(|(a, b)| a.conj() * b).sum();
        Ok(sum * self.grid.dx())
    }

    /// `<psi|f(x)|psi>`.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        let dx = self.grid.dx();
        self.psi
            .iter()
            .enumerate()
            .map(|(j, z)| z.norm_sqr() * f(self.grid.x(j)))
            .sum::<f64>()
            * dx
    }
}
