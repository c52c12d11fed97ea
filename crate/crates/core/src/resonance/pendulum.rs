use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{mathieu_q, DriveSpec};
use crate::error::{Error, Result};
use crate::spectrum::SpectrumModel;

/// Boundary weight above which an eigenvector is considered cut off by the span.
const SPAN_WEIGHT_TOL: f64 = 1e-6;

/// Span large enough to hold states dominated by small offsets for Mathieu
/// parameter `q`.
pub fn default_span(q: f64, order: u32) -> usize {
    let n = order as f64;
    let wide = (8.0 * q.abs().sqrt() * n + 20.0).ceil() as usize;
    wide.max(10 * order as usize)
}

/// Hermitian recursion matrix over offsets `m in [-span, span]`.
///
/// Diagonal `kbar m (omega - 1/N) + kbar^2 m^2 zeta / 2`, coupling
/// `-i lambda V / 2` from `m` to `m + N` and its conjugate back.
pub fn pendulum_matrix(spectrum: &SpectrumModel, drive: &DriveSpec, span: usize) -> DMatrix<Complex64> {
    let dim = 2 * span + 1;
    let order = drive.order as usize;
    let detuning = spectrum.omega - drive.omega_n();
    let kbar = spectrum.kbar;
    let half_coupling = 0.5 * drive.strength();
    DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            let m = r as f64 - span as f64;
            Complex64::new(kbar * m * detuning + 0.5 * kbar * kbar * m * m * spectrum.zeta, 0.0)
        } else if c == r + order {
            Complex64::new(0.0, -half_coupling)
        } else if r == c + order {
            Complex64::new(0.0, half_coupling)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[derive(Debug, Clone)]
pub struct PendulumSpectrum {
    span: usize,
    order: u32,
    /// Ascending.
    eigenvalues: Vec<f64>,
    /// Column `i` belongs to `eigenvalues[i]`.
    eigenvectors: DMatrix<Complex64>,
}

impl PendulumSpectrum {
    pub fn span(&self) -> usize {
        self.span
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, index: usize) -> Vec<Complex64> {
        self.eigenvectors.column(index).iter().copied().collect()
    }

    /// Quasienergy of the state with the largest weight on offset `m`,
    /// with that weight. Errors if the state leaks onto the span edges.
    pub fn state_for_offset(&self, m: i64) -> Result<(f64, f64)> {
        let span = self.span as i64;
        if m.abs() > span {
            return Err(Error::Domain(format!("offset {m} outside span {span}")));
        }
        let row = (m + span) as usize;
        let (best, weight) = (0..self.eigenvalues.len())
            .map(|i| (i, self.eigenvectors[(row, i)].norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty spectrum");
        let dim = self.eigenvectors.nrows();
        let edge = self.order as usize;
        let leak: f64 = (0..edge)
            .chain(dim - edge..dim)
            .map(|r| self.eigenvectors[(r, best)].norm_sqr())
            .sum();
        if leak > SPAN_WEIGHT_TOL {
            return Err(Error::Span {
                span: self.span,
                offset: m,
                weight: leak,
            });
        }
        Ok((self.eigenvalues[best], weight))
    }
}

pub fn pendulum_matrix_eigs(spectrum: &SpectrumModel, drive: &DriveSpec, span: usize) -> Result<PendulumSpectrum> {
    let min = 10 * drive.order as usize;
    if span < min {
        return Err(Error::Domain(format!("span {span} below the minimum {min}")));
    }
    if spectrum.zeta != 0.0 {
        // only used to validate the parameters; the matrix itself exists for zeta = 0
        mathieu_q(spectrum, drive)?;
    }
    let eig = SymmetricEigen::new(pendulum_matrix(spectrum, drive, span));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = eig.eigenvectors.select_columns(order.iter());
    Ok(PendulumSpectrum {
        span,
        order: drive.order,
        eigenvalues,
        eigenvectors,
    })
}
