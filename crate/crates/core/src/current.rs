//! Persistent current as a function of threaded flux.
//!
//! All currents are in units of `I0 = 2Neh/(m*ℓ²)`, and all fluxes in units
//! of `Φ0`. For `N` electrons at zero temperature with doubly-occupied levels:
//!
//! - odd `N`:  `I/I0 = −φ` on `−1/2 < φ < 1/2`, period 1;
//! - even `N`: `I/I0 = −(φ − 1/2)` on `0 < φ < 1`, period 1;
//! - average over `N` parity: `I/I0 = −(φ − 1/4)` on `0 < φ < 1/2`, period 1/2.
//!
//! Flux reduction is floor based with half-open windows `[lo, lo + period)`.
//! Exactly at a jump the current is reported as zero, the midpoint of the jump.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::geometry::{KnotClass, TorusGeometry};
use crate::magnetostatics::{self, FieldVector, FluxError};
use crate::units::{ELECTRON_MASS, ELEMENTARY_CHARGE, PLANCK};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurrentError {
    #[error("EvenCount: the odd-N formula was called with N = {0}")]
    EvenCount(u64),
    #[error("OddCount: the even-N formula was called with N = {0}")]
    OddCount(u64),
    #[error("electron count must be at least 1")]
    NoElectrons,
    #[error("loop length and effective mass must be positive and finite")]
    InvalidSystem,
    #[error("a sweep needs at least 2 steps and a positive finite maximum field")]
    InvalidSweep,
    #[error("sweep direction must be a nonzero finite vector")]
    InvalidDirection,
    #[error(transparent)]
    Flux(#[from] FluxError),
}

pub type Result<T> = std::result::Result<T, CurrentError>;

/// `k_n = (2π/ℓ)(n − φ)` for the `n`-th eigenstate.
pub fn wavenumber(n: i64, phi: f64, ell: f64) -> f64 {
    TAU / ell * (n as f64 - phi)
}

/// Reduces `x` into `[lo, lo + period)`.
fn reduce(x: f64, lo: f64, period: f64) -> f64 {
    let r = x - period * ((x - lo) / period).floor();
    // rounding can land exactly on the upper edge
    if r >= lo + period {
        r - period
    } else {
        r
    }
}

/// Current for an odd number of electrons.
pub fn current_odd(phi: f64, n_electrons: u64) -> Result<f64> {
    if n_electrons.is_multiple_of(2) {
        return Err(CurrentError::EvenCount(n_electrons));
    }
    let r = reduce(phi, -0.5, 1.0);
    Ok(if r == -0.5 { 0.0 } else { -r })
}

/// Current for an even number of electrons.
pub fn current_even(phi: f64, n_electrons: u64) -> Result<f64> {
    if n_electrons == 0 {
        return Err(CurrentError::NoElectrons);
    }
    if n_electrons % 2 == 1 {
        return Err(CurrentError::OddCount(n_electrons));
    }
    let r = reduce(phi, 0.0, 1.0);
    Ok(if r == 0.0 { 0.0 } else { 0.5 - r })
}

/// Parity-averaged sawtooth, period 1/2, zero at `φ ≡ 0 (mod 1/2)`.
pub fn current_ensemble(phi: f64) -> f64 {
    let r = reduce(phi, 0.0, 0.5);
    if r == 0.0 {
        0.0
    } else {
        0.25 - r
    }
}

/// Current by explicit summation over occupied eigenstates.
///
/// Each level `n` carries `I_n = eħk_n/(m*ℓ)` and is doubly occupied. The
/// filled window is the one printed for the closed forms, `n ∈ [−(N−1)/2,
/// (N−1)/2]` for odd `N` and `n ∈ [−N/2+1, N/2]` for even `N`, shifted by the
/// whole number of flux quanta outside the window's validity range so the
/// Fermi sea follows the spectral flow.
///
/// Evaluated in units with `e = ħ = m* = 1`, then divided by `I0`.
pub fn brute_force_current(phi: f64, n_electrons: u64) -> Result<f64> {
    if n_electrons == 0 {
        return Err(CurrentError::NoElectrons);
    }
    let n = n_electrons as i64;
    let (lo, hi) = if n % 2 == 1 {
        let shift = (phi + 0.5).floor() as i64;
        (shift - (n - 1) / 2, shift + (n - 1) / 2)
    } else {
        let shift = phi.floor() as i64;
        (shift - n / 2 + 1, shift + n / 2)
    };
    let ell = 1.0;
    let hbar = 1.0;
    let planck = TAU * hbar;
    let total: f64 = (lo..=hi)
        .map(|level| 2.0 * hbar * wavenumber(level, phi, ell) / ell)
        .sum();
    let i0 = 2.0 * n as f64 * planck / (ell * ell);
    Ok(total / i0)
}

/// Electron count, loop length and current scale `I0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronSystem {
    pub n_electrons: u64,
    pub ell: f64,
    /// Effective mass in kg; `None` in dimensionless mode.
    pub m_star: Option<f64>,
}

impl ElectronSystem {
    pub fn dimensionless(n_electrons: u64, ell: f64) -> Result<Self> {
        if n_electrons == 0 {
            return Err(CurrentError::NoElectrons);
        }
        if !(ell.is_finite() && ell > 0.0) {
            return Err(CurrentError::InvalidSystem);
        }
        Ok(Self {
            n_electrons,
            ell,
            m_star: None,
        })
    }

    /// `ell` in metres, effective mass given as a multiple of the free electron mass.
    pub fn physical(n_electrons: u64, ell: f64, mass_ratio: f64) -> Result<Self> {
        let mut sys = Self::dimensionless(n_electrons, ell)?;
        if !(mass_ratio.is_finite() && mass_ratio > 0.0) {
            return Err(CurrentError::InvalidSystem);
        }
        sys.m_star = Some(mass_ratio * ELECTRON_MASS);
        Ok(sys)
    }

    /// `I0 = 2Neh/(m*ℓ²)` in amperes, or 1 in dimensionless mode.
    pub fn current_scale(&self) -> f64 {
        match self.m_star {
            Some(m) => {
                2.0 * self.n_electrons as f64 * ELEMENTARY_CHARGE * PLANCK
                    / (m * self.ell * self.ell)
            }
            None => 1.0,
        }
    }
}

/// One sample of a field sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// Field magnitude along the sweep direction.
    pub magnitude: f64,
    pub bz: f64,
    pub phi_over_phi0: f64,
    pub current_over_i0: f64,
}

/// Ensemble-averaged current along a field sweep, ordered by field magnitude.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurrentTrace {
    rows: Vec<TraceRow>,
}

impl CurrentTrace {
    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    /// Multiplies the field columns by `factor`, leaving flux and current alone.
    pub fn with_field_scale(mut self, factor: f64) -> Self {
        for row in &mut self.rows {
            row.magnitude *= factor;
            row.bz *= factor;
        }
        self
    }

    /// Field values where the sawtooth passes continuously through zero,
    /// linearly interpolated between rows. Jumps (negative to positive) are
    /// not zeros of the sawtooth and are skipped.
    pub fn zero_crossings(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .filter(|w| w[0].current_over_i0 > 0.0 && w[1].current_over_i0 <= 0.0)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let t = a.current_over_i0 / (a.current_over_i0 - b.current_over_i0);
                a.magnitude + t * (b.magnitude - a.magnitude)
            })
            .collect()
    }
}

/// Flux per unit field, relative to `R²`, below which a sweep treats the flux as zero.
pub const FLUX_RESOLUTION: f64 = 1e-12;

/// Sweeps the field magnitude from 0 to `b_max` along `direction` and
/// records flux and parity-averaged current at `steps` evenly spaced values.
///
/// The direction is normalized first, so for a vertical direction the
/// magnitude equals `Bz`. Flux is linear in the field, so it is computed once
/// per unit field and scaled.
pub fn sweep_current_vs_field(
    knot: KnotClass,
    geom: &TorusGeometry,
    direction: FieldVector,
    b_max: f64,
    steps: usize,
    nodes: usize,
) -> Result<CurrentTrace> {
    if steps < 2 || !(b_max.is_finite() && b_max > 0.0) {
        return Err(CurrentError::InvalidSweep);
    }
    let unit = direction
        .normalized()
        .ok_or(CurrentError::InvalidDirection)?;
    let mut unit_flux = magnetostatics::flux_numeric(knot, geom, unit, nodes)?.phi_over_phi0();
    // Rounding residue of a vanishing flux would land on the ±1/4 sawtooth jump.
    let r = geom.major();
    if unit_flux.abs() <= FLUX_RESOLUTION * r * r {
        unit_flux = 0.0;
    }
    let rows = (0..steps)
        .map(|i| {
            let magnitude = b_max * i as f64 / (steps - 1) as f64;
            let phi = unit_flux * magnitude;
            TraceRow {
                magnitude,
                bz: unit.bz * magnitude,
                phi_over_phi0: phi,
                current_over_i0: current_ensemble(phi),
            }
        })
        .collect();
    Ok(CurrentTrace { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn wavenumber_examples() {
        assert_eq!(wavenumber(0, 0.0, 1.0), 0.0);
        assert!((wavenumber(1, 0.5, TAU) - 0.5).abs() < 1e-15);
        for (n, phi, ell) in [(3, 0.2, 2.0), (-4, 0.7, 5.5)] {
            let shifted = wavenumber(n, phi + 1.0, ell);
            assert!((shifted - (wavenumber(n, phi, ell) - TAU / ell)).abs() < 1e-13);
            assert!((shifted - wavenumber(n - 1, phi, ell)).abs() < 1e-13);
        }
    }

    #[test]
    fn odd_current_examples() {
        assert_eq!(current_odd(0.0, 3).unwrap(), 0.0);
        assert!((current_odd(0.3, 5).unwrap() + 0.3).abs() < TOL);
        assert!((current_odd(-0.4, 7).unwrap() - 0.4).abs() < TOL);
        assert_eq!(current_odd(0.1, 4), Err(CurrentError::EvenCount(4)));
        assert_eq!(current_odd(0.5, 1).unwrap(), 0.0);
    }

    #[test]
    fn even_current_examples() {
        assert_eq!(current_even(0.5, 2).unwrap(), 0.0);
        assert!((current_even(0.3, 4).unwrap() - 0.2).abs() < TOL);
        assert!((current_even(0.9, 10).unwrap() + 0.4).abs() < TOL);
        assert_eq!(current_even(0.1, 3), Err(CurrentError::OddCount(3)));
        assert_eq!(current_even(0.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn ensemble_examples() {
        assert_eq!(current_ensemble(0.0), 0.0);
        assert_eq!(current_ensemble(0.25), 0.0);
        assert!((current_ensemble(0.4) + 0.15).abs() < TOL);
        assert!((current_ensemble(0.9) + 0.15).abs() < TOL);
        assert_eq!(current_ensemble(0.5), 0.0);
        assert_eq!(current_ensemble(-3.0), 0.0);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_current(0.0, 1).unwrap(), 0.0);
        assert!((brute_force_current(0.3, 5).unwrap() + 0.3).abs() < TOL);
        assert!((brute_force_current(0.3, 4).unwrap() - 0.2).abs() < TOL);
        assert!((brute_force_current(-0.4, 7).unwrap() - 0.4).abs() < TOL);
        assert!((brute_force_current(0.9, 10).unwrap() + 0.4).abs() < TOL);
        assert_eq!(brute_force_current(0.1, 0), Err(CurrentError::NoElectrons));
    }

    #[test]
    fn physical_current_scale() {
        let sys = ElectronSystem::physical(100, 1e-6, 1.0).unwrap();
        let expected = 2.0 * 100.0 * ELEMENTARY_CHARGE * PLANCK / (ELECTRON_MASS * 1e-12);
        assert!((sys.current_scale() - expected).abs() < 1e-12 * expected);
        assert_eq!(
            ElectronSystem::dimensionless(3, 2.0)
                .unwrap()
                .current_scale(),
            1.0
        );
        assert!(ElectronSystem::physical(1, 1.0, 0.0).is_err());
        assert!(ElectronSystem::dimensionless(0, 1.0).is_err());
    }

    #[test]
    fn horizontal_sweep_carries_no_current() {
        let knot = KnotClass::new(2, 3).unwrap();
        let geom = TorusGeometry::new(1.0, 0.5).unwrap();
        let trace =
            sweep_current_vs_field(knot, &geom, FieldVector::new(1.0, 0.0, 0.0), 5.0, 200, 4096)
                .unwrap();
        assert!(trace.rows().iter().all(|r| r.current_over_i0.abs() < 1e-9));
        assert_eq!(trace.rows()[0].current_over_i0, 0.0);
        assert!(
            sweep_current_vs_field(knot, &geom, FieldVector::default(), 1.0, 10, 4096).is_err()
        );
        assert!(
            sweep_current_vs_field(knot, &geom, FieldVector::vertical(1.0), 1.0, 1, 4096).is_err()
        );
    }

    proptest! {
        #[test]
        fn parity_average_matches_ensemble(phi in 1e-9f64..0.5 - 1e-9, shift in -5i32..5) {
            let phi = phi + shift as f64;
            let avg = 0.5 * (current_odd(phi, 1).unwrap() + current_even(phi, 2).unwrap());
            prop_assert!((avg - current_ensemble(phi)).abs() < 1e-12);
        }

        #[test]
        fn unit_period(phi in -10.0f64..10.0) {
            prop_assume!((phi.fract().abs() - 0.5).abs() > 1e-9 && phi.fract().abs() > 1e-9);
            prop_assert!((current_odd(phi, 3).unwrap() - current_odd(phi + 1.0, 3).unwrap()).abs() < 1e-12);
            prop_assert!((current_even(phi, 4).unwrap() - current_even(phi + 1.0, 4).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn ensemble_is_odd(phi in 1e-9f64..0.25) {
            prop_assert!((current_ensemble(-phi) + current_ensemble(phi)).abs() < 1e-15);
        }
    }
}
