use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{DriveShape, Grid, WaveState, POTENTIAL_CAP};
use crate::error::{ensure_positive, Error, Result};
use crate::spectrum::{wkb_energy, DomainKind, PotentialSpec};

/// Fraction of the box the highest requested turning point may reach.
const TURNING_POINT_FILL: f64 = 0.7;
/// Box extent per turning point used when sizing grids automatically.
const AUTO_EXTENT: f64 = 1.6;
const TRUNCATION_TOL: f64 = 1e-8;

/// Lowest eigenstates of `H0` on a grid, each normalized to `sum |psi|^2 dx = 1`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub energies: Vec<f64>,
    /// Real grid functions, index 0 on the left wall.
    pub states: Vec<Vec<f64>>,
    pub potential: PotentialSpec,
    pub kbar: f64,
    pub grid: Grid,
}

impl EigenBasis {
    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    pub fn state(&self, n: usize) -> Result<WaveState> {
        self.superpose(&[(n, Complex64::new(1.0, 0.0))])
    }

    /// `sum_n c_n |n>`, not renormalized.
    pub fn superpose(&self, coefficients: &[(usize, Complex64)]) -> Result<WaveState> {
        let mut psi = vec![Complex64::new(0.0, 0.0); self.grid.n_points()];
        for &(n, c) in coefficients {
            let state = self
                .states
                .get(n)
                .ok_or_else(|| Error::Domain(format!("level {n} outside a basis of {} levels", self.n_levels())))?;
            psi.iter_mut().zip(state).for_each(|(p, &s)| *p += c * s);
        }
        WaveState::new(self.grid, psi, 0.0)
    }

    /// Amplitudes `<n|psi>` on every level of the basis.
    pub fn project(&self, state: &WaveState) -> Result<Vec<Complex64>> {
        if state.grid != self.grid {
            return Err(Error::GridMismatch("state and basis live on different grids".into()));
        }
        let dx = self.grid.dx();
        Ok(self
            .states
            .iter()
            .map(|s| s.iter().zip(&state.psi).map(|(&a, b)| a * b).sum::<Complex64>() * dx)
            .collect())
    }

    /// `<H0>` from the level populations of `state`.
    pub fn energy_expectation(&self, state: &WaveState) -> Result<f64> {
        let amps = self.project(state)?;
        Ok(amps.iter().zip(&self.energies).map(|(c, e)| c.norm_sqr() * e).sum())
    }
}

/// Grid whose extent is `1.6` times the WKB turning point of level
/// `n_levels - 1`.
pub fn auto_grid(potential: &PotentialSpec, kbar: f64, n_levels: usize, n_points: usize) -> Result<Grid> {
    let top = n_levels
        .checked_sub(1)
        .ok_or_else(|| Error::Domain("n_levels must be >= 1".into()))?;
    let extent = AUTO_EXTENT * turning_point(potential, kbar, top)?;
    Grid::for_potential(potential, extent, n_points)
}

fn turning_point(potential: &PotentialSpec, kbar: f64, level: usize) -> Result<f64> {
    let energy = wkb_energy(potential, kbar, level as f64)?;
    Ok((energy / potential.v0()).powf(1.0 / potential.exponent_k()))
}

/// Sine-basis (Dirichlet) kinetic matrix `-(kbar^2/2) d^2/dx^2` on the
/// interior points `1..n`.
fn kinetic_matrix(grid: &Grid, kbar: f64) -> DMatrix<f64> {
    let n = grid.n_points();
    let nf = n as f64;
    let prefactor = 0.5 * kbar * kbar * PI * PI / (2.0 * grid.length().powi(2));
    let inv_sin2 = |arg: f64| 1.0 / arg.sin().powi(2);
    DMatrix::from_fn(n - 1, n - 1, |r, c| {
        let (i, j) = (r + 1, c + 1);
        if i == j {
            prefactor * ((2.0 * nf * nf + 1.0) / 3.0 - inv_sin2(PI * i as f64 / nf))
        } else {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let diff = PI * (i as f64 - j as f64) / (2.0 * nf);
            let sum = PI * (i + j) as f64 / (2.0 * nf);
            prefactor * sign * (inv_sin2(diff) - inv_sin2(sum))
        }
    })
}

/// Lowest `n_levels` eigenstates of `-(kbar^2/2) d^2/dx^2 + V0 |x|^k` with
/// Dirichlet walls at both grid ends.
///
/// Each state's sign is fixed so that its outermost large lobe is positive;
/// with this convention Gaussian superpositions start localized at the outer
/// turning point.
pub fn solve_eigen(potential: &PotentialSpec, kbar: f64, grid: &Grid, n_levels: usize) -> Result<EigenBasis> {
    ensure_positive("kbar", kbar)?;
    grid.check_domain(potential)?;
    let n = grid.n_points();
    if n_levels == 0 || n_levels >= n {
        return Err(Error::Domain(format!("n_levels must be in 1..{n}, got {n_levels}")));
    }
    let top = n_levels - 1;
    let x_tp = turning_point(potential, kbar, top)?;
    let extent = match potential.domain() {
        DomainKind::Truncated => grid.x_max(),
        DomainKind::Symmetric => grid.x_max().min(-grid.x_min()),
    };
    if x_tp > TURNING_POINT_FILL * extent {
        return Err(Error::InsufficientGrid {
            level: top,
            turning_point: x_tp,
            suggested_x_max: AUTO_EXTENT * x_tp,
        });
    }

    let mut h = kinetic_matrix(grid, kbar);
    for i in 1..n {
        h[(i - 1, i - 1)] += potential.value(grid.x(i)).min(POTENTIAL_CAP);
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n - 1).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = 1.0 / grid.dx().sqrt();
    let mut energies = Vec::with_capacity(n_levels);
    let mut states = Vec::with_capacity(n_levels);
    for &col in order.iter().take(n_levels) {
        energies.push(eig.eigenvalues[col]);
        let mut psi = vec![0.0; n];
        for i in 1..n {
            psi[i] = eig.eigenvectors[(i - 1, col)] * scale;
        }
        let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let outer = psi
            .iter()
            .rposition(|v| v.abs() >= 0.5 * peak)
            .expect("non-zero eigenvector");
        if psi[outer] < 0.0 {
            psi.iter_mut().for_each(|v| *v = -*v);
        }
        states.push(psi);
    }
    Ok(EigenBasis {
        energies,
        states,
        potential: *potential,
        kbar,
        grid: *grid,
    })
}

/// Normalized amplitudes `c_n ~ exp(-(n - n_bar)^2 / (4 sigma^2))` for
/// `n < n_levels`.
pub fn wavepacket_coefficients(n_bar: usize, sigma_n: f64, n_levels: usize) -> Result<Vec<f64>> {
    ensure_positive("sigma_n", sigma_n)?;
    if n_bar as f64 + 4.0 * sigma_n >= n_levels as f64 {
        return Err(Error::Domain(format!(
            "n_bar + 4 sigma_n = {} must stay below n_levels = {n_levels}",
            n_bar as f64 + 4.0 * sigma_n
        )));
    }
    let amp = |n: usize| (-(n as f64 - n_bar as f64).powi(2) / (4.0 * sigma_n * sigma_n)).exp();
    let tail_end = n_levels + (12.0 * sigma_n).ceil() as usize + 10;
    let total: f64 = (0..tail_end).map(|n| amp(n).powi(2)).sum();
    let kept: Vec<f64> = (0..n_levels).map(amp).collect();
    let captured = kept.iter().map(|c| c * c).sum::<f64>() / total;
    if captured < 1.0 - TRUNCATION_TOL {
        return Err(Error::Truncation { captured });
    }
    let norm = kept.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(kept.into_iter().map(|c| c / norm).collect())
}

/// Packet with Gaussian level populations centred on `n_bar`.
pub fn build_wavepacket(basis: &EigenBasis, n_bar: usize, sigma_n: f64) -> Result<WaveState> {
    let coefficients = wavepacket_coefficients(n_bar, sigma_n, basis.n_levels())?;
    let terms: Vec<(usize, Complex64)> = coefficients
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(n, &c)| (n, Complex64::new(c, 0.0)))
        .collect();
    let mut state = basis.superpose(&terms)?;
    state.normalize()?;
    Ok(state)
}

/// `<n|V(x)|m>` by grid quadrature.
pub fn matrix_element(basis: &EigenBasis, shape: DriveShape, n: usize, m: usize) -> Result<f64> {
    let levels = basis.n_levels();
    if n >= levels || m >= levels {
        return Err(Error::Domain(format!("levels ({n}, {m}) outside a basis of {levels}")));
    }
    let grid = &basis.grid;
    let (a, b) = (&basis.states[n], &basis.states[m]);
    let sum: f64 = (0..grid.n_points())
        .map(|j| a[j] * b[j] * shape.value(&basis.potential, grid.x(j)))
        .sum();
    Ok(sum * grid.dx())
}

/// Mean of `|<n_bar|V|n_bar + N>|` and `|<n_bar|V|n_bar - N>|`.
pub fn coupling_estimate(basis: &EigenBasis, shape: DriveShape, n_bar: usize, order: u32) -> Result<f64> {
    let step = order as usize;
    if step == 0 || n_bar < step {
        return Err(Error::Domain(format!(
            "need n_bar >= N >= 1, got n_bar={n_bar}, N={order}"
        )));
    }
    let up = matrix_element(basis, shape, n_bar, n_bar + step)?.abs();
    let down = matrix_element(basis, shape, n_bar, n_bar - step)?.abs();
    Ok(0.5 * (up + down))
}
