//! Recurrence times of quantum wave packets in driven power-law potentials.
//!
//! The crate goes from a potential `V0 |x|^k` to the semiclassical spectrum
//! near a level `n_bar` ([`spectrum`]), to the quasienergies of that spectrum
//! under an `N`-photon resonant drive ([`resonance`]), to closed-form classical
//! and quantum recurrence times ([`recurrence`]). [`quantum`] propagates wave
//! packets on a grid and [`analysis`] extracts the same times from the
//! autocorrelation function.
//!
//! ```
//! use powerlaw_revivals::{recurrence_times, DriveSpec, PotentialSpec, SpectrumModel};
//!
//! let spectrum = SpectrumModel::new(PotentialSpec::bouncer(1.0)?, 1.0, 20.0)?;
//! let t = recurrence_times(&spectrum, &DriveSpec::new(0.02, 1.0, 2)?)?;
//! assert!(t.tlam_q < t.t0_q);
//! # Ok::<(), powerlaw_revivals::Error>(())
//! ```

pub mod analysis;
pub mod error;
pub mod quantum;
pub mod recurrence;
pub mod resonance;
pub mod spectrum;
pub mod units;

pub use error::{Error, Result};
pub use recurrence::{driven_times, recurrence_times, undriven_times, RecurrenceTimes, Regime};
pub use resonance::{quasienergy, DriveSpec, QuasiEnergy};
pub use spectrum::{build_spectrum_model, wkb_energy, DomainKind, PotentialSpec, SpectrumModel};
pub use units::ScaledUnits;
