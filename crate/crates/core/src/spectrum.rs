//! Semiclassical spectrum of the unmodulated power-law potential
//! `V0 |x|^k` and its local expansion around a mean level.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{ensure_positive, Error, Result};

pub const MIN_EXPONENT: f64 = 1e-3;
pub const MAX_EXPONENT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    /// `V0 |x|^k` on the whole line.
    Symmetric,
    /// `V0 x^k` for `x >= 0` with a hard wall at the origin.
    Truncated,
}

impl DomainKind {
    pub fn default_maslov(self) -> u8 {
        match self {
            DomainKind::Symmetric => 2,
            DomainKind::Truncated => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    v0: f64,
    exponent_k: f64,
    maslov_gamma: u8,
    domain: DomainKind,
}

impl PotentialSpec {
    /// Potential with the default Maslov index for its domain.
    pub fn new(v0: f64, exponent_k: f64, domain: DomainKind) -> Result<Self> {
        Self::with_maslov(v0, exponent_k, domain.default_maslov(), domain)
    }

    pub fn with_maslov(v0: f64, exponent_k: f64, maslov_gamma: u8, domain: DomainKind) -> Result<Self> {
        ensure_positive("V0", v0)?;
        ensure_positive("exponent k", exponent_k)?;
        if !(MIN_EXPONENT..=MAX_EXPONENT).contains(&exponent_k) {
            return Err(Error::Range(format!(
                "exponent k = {exponent_k} outside [{MIN_EXPONENT}, {MAX_EXPONENT}]"
            )));
        }
        if !(1..=4).contains(&maslov_gamma) {
            return Err(Error::Domain(format!(
                "Maslov index must be 1, 2, 3 or 4, got {maslov_gamma}"
            )));
        }
        // One hard wall plus one soft turning point.
        if domain == DomainKind::Truncated && maslov_gamma != 3 {
            return Err(Error::Domain(format!(
                "truncated domain requires Maslov index 3, got {maslov_gamma}"
            )));
        }
        Ok(Self {
            v0,
            exponent_k,
            maslov_gamma,
            domain,
        })
    }

    pub fn harmonic(v0: f64) -> Result<Self> {
        Self::new(v0, 2.0, DomainKind::Symmetric)
    }

    /// Linear potential on `x >= 0` with a hard wall: the quantum bouncer.
    pub fn bouncer(v0: f64) -> Result<Self> {
        Self::new(v0, 1.0, DomainKind::Truncated)
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn exponent_k(&self) -> f64 {
        self.exponent_k
    }

    pub fn rho(&self) -> f64 {
        self.exponent_k - 2.0
    }

    pub fn maslov_gamma(&self) -> u8 {
        self.maslov_gamma
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    /// `n + gamma/4`, the shifted quantum number entering every closed form.
    pub fn shifted_level(&self, n: f64) -> f64 {
        n + f64::from(self.maslov_gamma) / 4.0
    }

    pub fn value(&self, x: f64) -> f64 {
        self.v0 * x.abs().powf(self.exponent_k)
    }
}

fn check_level(potential: &PotentialSpec, n: f64) -> Result<f64> {
    let s = potential.shifted_level(n);
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Domain(format!(
            "n + gamma/4 must be positive, got {s} for n = {n}"
        )))
    }
}

/// WKB energy of level `n` (real-valued so derivatives can be probed).
///
/// On the whole line the phase-space area enclosed at energy `E` is
/// `2 pi kbar (n + gamma/4)`. A hard wall at the origin halves the orbit, so
/// the truncated domain quantizes with twice the shifted quantum number; the
/// exponent structure and hence `omega` and `zeta` in terms of `n + gamma/4`
/// are unchanged.
pub fn wkb_energy(potential: &PotentialSpec, kbar: f64, n: f64) -> Result<f64> {
    ensure_positive("kbar", kbar)?;
    let s = check_level(potential, n)?;
    let k = potential.exponent_k;
    let orbit = match potential.domain {
        DomainKind::Symmetric => s,
        DomainKind::Truncated => 2.0 * s,
    };
    let ln_gamma_ratio = ln_gamma(1.0 / k + 1.5) - ln_gamma(1.0 / k + 1.0) - ln_gamma(1.5);
    let ln_base = orbit.ln() + kbar.ln() + (PI / (2.0 * SQRT_2)).ln() + potential.v0.ln() / k + ln_gamma_ratio;
    let energy = (2.0 * k / (k + 2.0) * ln_base).exp();
    if energy.is_finite() && energy > 0.0 {
        Ok(energy)
    } else {
        Err(Error::Range(format!(
            "WKB energy not representable for k = {k}, n = {n}, kbar = {kbar} (ln base = {ln_base})"
        )))
    }
}

/// Level-spacing frequency `omega = dE/(kbar dn)` at `n_bar`.
pub fn frequency_omega(potential: &PotentialSpec, kbar: f64, n_bar: f64) -> Result<f64> {
    let energy = wkb_energy(potential, kbar, n_bar)?;
    let s = potential.shifted_level(n_bar);
    let k = potential.exponent_k;
    Ok(2.0 * k / (k + 2.0) * energy / (kbar * s))
}

/// Same frequency written in the nonlinearity measure `rho = k - 2`.
pub fn frequency_omega_rho_form(potential: &PotentialSpec, kbar: f64, n_bar: f64) -> Result<f64> {
    let energy = wkb_energy(potential, kbar, n_bar)?;
    let s = potential.shifted_level(n_bar);
    let rho = potential.rho();
    Ok(2.0 * (2.0 + rho) / (4.0 + rho) * energy / (kbar * s))
}

/// Spectral nonlinearity `zeta = d^2E/(kbar^2 dn^2)` at `n_bar`.
pub fn nonlinearity_zeta(potential: &PotentialSpec, kbar: f64, n_bar: f64) -> Result<f64> {
    let energy = wkb_energy(potential, kbar, n_bar)?;
    let s = potential.shifted_level(n_bar);
    let k = potential.exponent_k;
    Ok(2.0 * k * (k - 2.0) / ((k + 2.0) * (k + 2.0)) * energy / (kbar * kbar * s * s))
}

pub fn nonlinearity_zeta_rho_form(potential: &PotentialSpec, kbar: f64, n_bar: f64) -> Result<f64> {
    let energy = wkb_energy(potential, kbar, n_bar)?;
    let s = potential.shifted_level(n_bar);
    let rho = potential.rho();
    Ok(2.0 * rho * (2.0 + rho) / ((4.0 + rho) * (4.0 + rho)) * energy / (kbar * kbar * s * s))
}

/// Local expansion of the spectrum around the mean level of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumModel {
    pub potential: PotentialSpec,
    pub kbar: f64,
    pub n_bar: f64,
    pub e_nbar: f64,
    pub omega: f64,
    pub zeta: f64,
}

impl SpectrumModel {
    pub fn new(potential: PotentialSpec, kbar: f64, n_bar: f64) -> Result<Self> {
        build_spectrum_model(potential, kbar, n_bar)
    }

    pub fn rho(&self) -> f64 {
        self.potential.rho()
    }

    pub fn shifted_level(&self) -> f64 {
        self.potential.shifted_level(self.n_bar)
    }

    pub fn with_n_bar(&self, n_bar: f64) -> Result<Self> {
        build_spectrum_model(self.potential, self.kbar, n_bar)
    }

    pub fn with_kbar(&self, kbar: f64) -> Result<Self> {
        build_spectrum_model(self.potential, kbar, self.n_bar)
    }
}

pub fn build_spectrum_model(potential: PotentialSpec, kbar: f64, n_bar: f64) -> Result<SpectrumModel> {
    if !(n_bar >= 0.0) {
        return Err(Error::Domain(format!("mean level must be >= 0, got {n_bar}")));
    }
    let e_nbar = wkb_energy(&potential, kbar, n_bar)?;
    let omega = frequency_omega(&potential, kbar, n_bar)?;
    let zeta = nonlinearity_zeta(&potential, kbar, n_bar)?;
    Ok(SpectrumModel {
        potential,
        kbar,
        n_bar,
        e_nbar,
        omega,
        zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn harmonic_levels_are_exact() {
        let ho = PotentialSpec::harmonic(0.5).unwrap();
        for n in 0..40 {
            let e = wkb_energy(&ho, 1.0, n as f64).unwrap();
            // kbar sqrt(2 V0) (n + 1/2)
            assert!((e - (n as f64 + 0.5)).abs() < 1e-10, "n={n}: {e}");
        }
        let ho = PotentialSpec::harmonic(2.0).unwrap();
        let e = wkb_energy(&ho, 0.3, 3.0).unwrap();
        assert!(rel(e, 0.3 * 2.0 * 3.5) < 1e-12);
    }

    #[test]
    fn linear_formula_on_whole_line() {
        let p = PotentialSpec::with_maslov(1.0, 1.0, 3, DomainKind::Symmetric).unwrap();
        let e = wkb_energy(&p, 1.0, 0.0).unwrap();
        assert!((e - 1.160_125_397_355_051).abs() < 1e-12, "{e}");
    }

    #[test]
    fn bouncer_ground_state_near_airy_value() {
        let p = PotentialSpec::bouncer(1.0).unwrap();
        let e = wkb_energy(&p, 1.0, 0.0).unwrap();
        assert!((e - 1.841_584_276_176_433).abs() < 1e-12);
        // exact: -a_1 (1/2)^(1/3) = 1.855757...
        assert!(rel(e, 1.855_757_081_489_239) < 0.01);
    }

    #[test]
    fn box_limit() {
        let p = PotentialSpec::with_maslov(1.0, 1000.0, 4, DomainKind::Symmetric).unwrap();
        for n in 0..5 {
            let e = wkb_energy(&p, 1.0, n as f64).unwrap();
            let exact = ((n + 1) as f64).powi(2) * PI * PI / 8.0;
            assert!(rel(e, exact) < 0.01, "n={n}: {e} vs {exact}");
        }
    }

    #[test]
    fn exponent_range_enforced() {
        assert!(matches!(
            PotentialSpec::new(1.0, 5e-4, DomainKind::Symmetric),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            PotentialSpec::new(1.0, 2e6, DomainKind::Symmetric),
            Err(Error::Range(_))
        ));
        assert!(PotentialSpec::new(0.0, 2.0, DomainKind::Symmetric).is_err());
        assert!(PotentialSpec::with_maslov(1.0, 1.0, 2, DomainKind::Truncated).is_err());
        assert!(PotentialSpec::with_maslov(1.0, 1.0, 5, DomainKind::Symmetric).is_err());
    }

    #[test]
    fn extreme_exponents_stay_finite() {
        let soft = PotentialSpec::new(1.0, 1e-3, DomainKind::Symmetric).unwrap();
        let e = wkb_energy(&soft, 1.0, 10.0).unwrap();
        assert!(e.is_finite() && e > 0.0);
        let hard = PotentialSpec::with_maslov(1.0, 1e6, 4, DomainKind::Symmetric).unwrap();
        let e = wkb_energy(&hard, 1.0, 0.0).unwrap();
        assert!(rel(e, PI * PI / 8.0) < 1e-3);
    }

    #[test]
    fn level_below_minus_gamma_quarter_rejected() {
        let ho = PotentialSpec::harmonic(0.5).unwrap();
        assert!(wkb_energy(&ho, 1.0, -0.5).is_err());
        assert!(wkb_energy(&ho, 1.0, -0.4).is_ok());
    }

    #[test]
    fn harmonic_frequency_and_zeta() {
        let ho = PotentialSpec::harmonic(0.5).unwrap();
        assert!((frequency_omega(&ho, 1.0, 10.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nonlinearity_zeta(&ho, 1.0, 10.0).unwrap(), 0.0);
        let m = build_spectrum_model(ho, 1.0, 10.0).unwrap();
        assert_eq!(m.zeta, 0.0);
    }

    #[test]
    fn linear_zeta_coefficient() {
        let p = PotentialSpec::bouncer(1.0).unwrap();
        let s: f64 = 20.75;
        let e = wkb_energy(&p, 1.0, 20.0).unwrap();
        let zeta = nonlinearity_zeta(&p, 1.0, 20.0).unwrap();
        assert!(rel(zeta, -2.0 / 9.0 * e / (s * s)) < 1e-14);
        let omega = frequency_omega(&p, 1.0, 20.0).unwrap();
        assert!(rel(omega, 2.0 / 3.0 * e / s) < 1e-14);
    }

    #[test]
    fn frequency_matches_first_difference() {
        let p = PotentialSpec::bouncer(1.0).unwrap();
        let nb = 20.0;
        let fd = (wkb_energy(&p, 1.0, nb + 1.0).unwrap() - wkb_energy(&p, 1.0, nb - 1.0).unwrap()) / 2.0;
        assert!(rel(frequency_omega(&p, 1.0, nb).unwrap(), fd) <= 1.0 / nb);
    }

    #[test]
    fn quartic_zeta_matches_second_difference() {
        let p = PotentialSpec::new(1.0, 4.0, DomainKind::Symmetric).unwrap();
        let nb = 30.0;
        let e = |n: f64| wkb_energy(&p, 1.0, n).unwrap();
        let fd = e(nb + 1.0) - 2.0 * e(nb) + e(nb - 1.0);
        let zeta = nonlinearity_zeta(&p, 1.0, nb).unwrap();
        assert!(zeta > 0.0);
        assert!(rel(zeta, fd) <= 2.0 / nb);
    }

    #[test]
    fn sign_rule() {
        for (k, dom, sign) in [
            (1.0, DomainKind::Truncated, -1.0),
            (4.0, DomainKind::Symmetric, 1.0),
            (1.5, DomainKind::Symmetric, -1.0),
        ] {
            let m = build_spectrum_model(PotentialSpec::new(1.0, k, dom).unwrap(), 1.0, 12.0).unwrap();
            assert_eq!(m.zeta.signum(), sign, "k={k}");
            assert!(m.omega > 0.0);
        }
    }

    #[test]
    fn spacing_law() {
        for k in [1.0, 1.5, 3.0, 4.0, 6.0] {
            let p = PotentialSpec::new(1.0, k, DomainKind::Symmetric).unwrap();
            let gaps: Vec<f64> = (5..=100)
                .map(|n| wkb_energy(&p, 1.0, n as f64).unwrap() - wkb_energy(&p, 1.0, n as f64 - 1.0).unwrap())
                .collect();
            for w in gaps.windows(2) {
                if k > 2.0 {
                    assert!(w[1] > w[0], "k={k}");
                } else {
                    assert!(w[1] < w[0], "k={k}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn energy_strictly_increasing(k in 0.05f64..50.0, n in 0.0f64..500.0, kbar in 0.01f64..10.0) {
            let p = PotentialSpec::new(1.3, k, DomainKind::Symmetric).unwrap();
            prop_assert!(wkb_energy(&p, kbar, n + 0.5).unwrap() > wkb_energy(&p, kbar, n).unwrap());
        }

        #[test]
        fn rho_forms_agree(k in 0.05f64..50.0, n in 0.0f64..500.0, kbar in 0.01f64..10.0, v0 in 0.1f64..10.0) {
            let p = PotentialSpec::new(v0, k, DomainKind::Symmetric).unwrap();
            let w = frequency_omega(&p, kbar, n).unwrap();
            let wr = frequency_omega_rho_form(&p, kbar, n).unwrap();
            prop_assert!(rel(w, wr) < 1e-12);
            let z = nonlinearity_zeta(&p, kbar, n).unwrap();
            let zr = nonlinearity_zeta_rho_form(&p, kbar, n).unwrap();
            prop_assert!((z - zr).abs() <= 1e-12 * z.abs().max(1e-300));
        }

        #[test]
        fn omega_kbar_scaling(k in 0.2f64..20.0, n in 1.0f64..200.0, kbar in 0.01f64..5.0) {
            let p = PotentialSpec::new(1.0, k, DomainKind::Symmetric).unwrap();
            let ratio = frequency_omega(&p, 2.0 * kbar, n).unwrap() / frequency_omega(&p, kbar, n).unwrap();
            prop_assert!(rel(ratio, 2f64.powf((k - 2.0) / (k + 2.0))) < 1e-10);
        }

        #[test]
        fn derivatives_match_differences(k in 0.5f64..8.0, n in 20.0f64..200.0) {
            let p = PotentialSpec::new(1.0, k, DomainKind::Symmetric).unwrap();
            let e = |m: f64| wkb_energy(&p, 1.0, m).unwrap();
            let d1 = (e(n + 1.0) - e(n - 1.0)) / 2.0;
            prop_assert!(rel(frequency_omega(&p, 1.0, n).unwrap(), d1) <= 1.0 / n);
            if (k - 2.0).abs() > 0.05 {
                let d2 = e(n + 1.0) - 2.0 * e(n) + e(n - 1.0);
                prop_assert!(rel(nonlinearity_zeta(&p, 1.0, n).unwrap(), d2) <= 2.0 / n);
            }
        }
    }
}
