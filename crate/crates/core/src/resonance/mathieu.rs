//! Characteristic values of the Mathieu equation
//! `chi'' + (a - 2 q cos 2z) chi = 0`.
//!
//! For a Floquet solution `chi = exp(i nu z) P(z)` with `P` pi-periodic, the
//! Fourier coefficients over `exp(i (nu + 2j) z)` satisfy a symmetric
//! tridiagonal eigenproblem with diagonal `(nu + 2j)^2` and off-diagonal `q`.
//! Its eigenvalues are the characteristic values `a_{|nu + 2j|}` of every
//! exponent in the orbit of `nu`, and since `a_mu` increases strictly with
//! `mu >= 0`, the value belonging to `nu` is the one whose rank matches the
//! rank of `|nu|` among `|nu + 2j|`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Distance from an integer below which a non-integer `nu` sits inside the
/// `b_r -> a_r` jump of the band function and is reported as ambiguous.
const INTEGER_BAND_EDGE: f64 = 1e-9;
const CONVERGENCE_TOL: f64 = 1e-10;
const CONVERGENCE_STEP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MathieuResult {
    pub q: f64,
    pub nu: f64,
    pub a_nu: f64,
    pub basis_size: usize,
    /// Weight of the `j = 0` Fourier mode in the selected eigenvector.
    pub mode_weight: f64,
}

pub fn min_basis_size(nu: f64) -> usize {
    2 * nu.abs().ceil() as usize + 20
}

pub fn default_basis_size(nu: f64) -> usize {
    2 * nu.abs().ceil() as usize + 40
}

/// Characteristic value `a_nu(q)` from a truncated Fourier basis of
/// `basis_size` modes.
///
/// Integer `nu = r` returns the standard even-solution value `a_r(|q|)`,
/// which is the limit of the band function as `|nu| -> r` from above.
pub fn mathieu_char_value(nu: f64, q: f64, basis_size: usize) -> Result<MathieuResult> {
    if !nu.is_finite() || !q.is_finite() {
        return Err(Error::Domain(format!("nu and q must be finite, got nu={nu}, q={q}")));
    }
    let min = min_basis_size(nu);
    if basis_size < min {
        return Err(Error::Domain(format!(
            "basis size {basis_size} below the minimum {min} for nu = {nu}"
        )));
    }
    let first = solve(nu, q, basis_size)?;
    let second = solve(nu, q, basis_size + CONVERGENCE_STEP)?;
    let shift = (first.a_nu - second.a_nu).abs();
    if shift > CONVERGENCE_TOL * first.a_nu.abs().max(1.0) {
        return Err(Error::Convergence {
            nu,
            q,
            basis: basis_size,
            next_basis: basis_size + CONVERGENCE_STEP,
            shift,
        });
    }
    Ok(first)
}

fn solve(nu: f64, q: f64, basis_size: usize) -> Result<MathieuResult> {
    if nu.fract() == 0.0 {
        let a_nu = integer_order(nu.abs() as usize, q.abs(), basis_size);
        return Ok(MathieuResult {
            q,
            nu,
            a_nu,
            basis_size,
            mode_weight: f64::NAN,
        });
    }

    let half = (basis_size / 2) as i64;
    let modes: Vec<i64> = (-half..=half).collect();
    let dim = modes.len();
    // Diagonal shifted by nu^2 keeps the selected eigenvalue O(q) instead of O(nu^2).
    let matrix = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            let j = modes[r] as f64;
            4.0 * j * (nu + j)
        } else if r.abs_diff(c) == 1 {
            q
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let key = |j: i64| (nu + 2.0 * j as f64).abs();
    let rank = modes.iter().filter(|&&j| key(j) < nu.abs()).count();
    let centre = half as usize;
    let selected = order[rank];
    let a_nu = nu * nu + eig.eigenvalues[selected];
    let mode_weight = eig.eigenvectors[(centre, selected)].powi(2);

    let nearest = nu.round();
    if q != 0.0 && nearest != 0.0 && (nu - nearest).abs() < INTEGER_BAND_EDGE {
        let partner = if nu.abs() > nearest.abs() { rank - 1 } else { rank + 1 };
        let (lo, hi) = (rank.min(partner), rank.max(partner));
        return Err(Error::Ambiguity {
            nu,
            q,
            lower: nu * nu + eig.eigenvalues[order[lo]],
            upper: nu * nu + eig.eigenvalues[order[hi]],
        });
    }

    Ok(MathieuResult {
        q,
        nu,
        a_nu,
        basis_size,
        mode_weight,
    })
}

/// `a_r(q)` for `q >= 0` from the cosine-series recurrences of the even
/// Mathieu functions.
fn integer_order(r: usize, q: f64, basis_size: usize) -> f64 {
    let dim = basis_size / 2 + 1;
    let matrix = if r % 2 == 0 {
        DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                (2.0 * i as f64).powi(2)
            } else if i.abs_diff(j) == 1 {
                if i.min(j) == 0 {
                    std::f64::consts::SQRT_2 * q
                } else {
                    q
                }
            } else {
                0.0
            }
        })
    } else {
        DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                (2.0 * i as f64 + 1.0).powi(2) + if i == 0 { q } else { 0.0 }
            } else if i.abs_diff(j) == 1 {
                q
            } else {
                0.0
            }
        })
    };
    let mut values: Vec<f64> = SymmetricEigen::new(matrix).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values[r / 2]
}
