//! Random minor-radius profiles by Fourier filtering.
//!
//! A profile is a finite trigonometric series
//!
//! ```text
//! ε(θ) = ε̄ + δε · f(θ),   f(θ) = Σ_{k=1..K} a_k cos(kθ) + b_k sin(kθ)
//! ```
//!
//! whose raw coefficients are independent standard normal deviates filtered by
//! `k^(-β/2)` (a power spectrum falling as `k^-β`). The series is rescaled so
//! that `max_θ |f(θ)| = 1`, which makes `δε` the exact maximum deviation from
//! the centerline `ε̄`. There is no `k = 0` term, so the mean of `ε` is `ε̄`.
//!
//! Coefficients are drawn from a ChaCha8 stream seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`, in harmonic order `a_1, b_1, a_2, b_2, ...`.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::output::{format_float, KeyValueRecord};

pub const DEFAULT_SPECTRUM_EXPONENT: f64 = 2.0;
pub const DEFAULT_MODES: usize = 32;
/// Rows in the profile CSV export.
pub const PROFILE_CSV_ROWS: usize = 512;

const MIN_SEARCH_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModulationError {
    #[error("centerline eps_mean must be positive and finite, got {0}")]
    InvalidMean(f64),
    #[error("amplitude eps_amp must be non-negative and finite, got {0}")]
    InvalidAmplitude(f64),
    #[error("spectrum exponent must be non-negative and finite, got {0}")]
    InvalidExponent(f64),
    #[error("at least one Fourier mode is required")]
    NoModes,
    #[error("AmplitudeTooLarge: eps_mean - eps_amp = {mean} - {amp} <= 0")]
    AmplitudeTooLarge { mean: f64, amp: f64 },
    #[error("DegenerateProfile: every Fourier coefficient is zero")]
    DegenerateProfile,
    #[error("malformed profile record: {0}")]
    Record(String),
}

pub type Result<T> = std::result::Result<T, ModulationError>;

/// One harmonic of the normalized series `f(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub harmonic: u32,
    pub cos: f64,
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationProfile {
    eps_mean: f64,
    eps_amp: f64,
    spectrum_exponent: f64,
    seed: u64,
    modes: Vec<FourierMode>,
    // extrema of the normalized series f
    f_min: f64,
    f_max: f64,
}

/// Builds a profile from `(ε̄, δε, β, K, seed)`.
pub fn generate_profile(
    eps_mean: f64,
    eps_amp: f64,
    spectrum_exponent: f64,
    n_modes: usize,
    seed: u64,
) -> Result<ModulationProfile> {
    check_parameters(eps_mean, eps_amp, spectrum_exponent)?;
    if n_modes == 0 {
        return Err(ModulationError::NoModes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<FourierMode> = (1..=n_modes as u32)
        .map(|k| {
            let filter = (k as f64).powf(-0.5 * spectrum_exponent);
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            FourierMode {
                harmonic: k,
                cos: a * filter,
                sin: b * filter,
            }
        })
        .collect();
    ModulationProfile::from_modes(eps_mean, eps_amp, spectrum_exponent, seed, raw)
}

fn check_parameters(eps_mean: f64, eps_amp: f64, spectrum_exponent: f64) -> Result<()> {
    if !(eps_mean.is_finite() && eps_mean > 0.0) {
        return Err(ModulationError::InvalidMean(eps_mean));
    }
    if !(eps_amp.is_finite() && eps_amp >= 0.0) {
        return Err(ModulationError::InvalidAmplitude(eps_amp));
    }
    if !(spectrum_exponent.is_finite() && spectrum_exponent >= 0.0) {
        return Err(ModulationError::InvalidExponent(spectrum_exponent));
    }
    if eps_mean - eps_amp <= 0.0 {
        return Err(ModulationError::AmplitudeTooLarge {
            mean: eps_mean,
            amp: eps_amp,
        });
    }
    Ok(())
}

impl ModulationProfile {
    /// Normalizes raw coefficients so that `max |f| = 1`.
    pub fn from_modes(
        eps_mean: f64,
        eps_amp: f64,
        spectrum_exponent: f64,
        seed: u64,
        mut modes: Vec<FourierMode>,
    ) -> Result<Self> {
        check_parameters(eps_mean, eps_amp, spectrum_exponent)?;
        if modes.is_empty() {
            return Err(ModulationError::NoModes);
        }
        if modes.iter().any(|m| m.harmonic == 0) {
            return Err(ModulationError::Record(
                "harmonic index must be at least 1".into(),
            ));
        }
        modes.sort_by_key(|m| m.harmonic);
        if modes.windows(2).any(|w| w[0].harmonic == w[1].harmonic) {
            return Err(ModulationError::Record("duplicate harmonic index".into()));
        }
        if modes.iter().all(|m| m.cos == 0.0 && m.sin == 0.0) {
            return Err(ModulationError::DegenerateProfile);
        }

        let max_harmonic = modes.last().map_or(1, |m| m.harmonic);
        let (raw_min, raw_max) = series_extrema(&modes, max_harmonic);
        let scale = raw_max.max(-raw_min);
        for m in &mut modes {
            m.cos /= scale;
            m.sin /= scale;
        }
        let (f_min, f_max) = (raw_min / scale, raw_max / scale);
        Ok(Self {
            eps_mean,
            eps_amp,
            spectrum_exponent,
            seed,
            modes,
            f_min,
            f_max,
        })
    }

    pub fn eps_mean(&self) -> f64 {
        self.eps_mean
    }

    pub fn eps_amp(&self) -> f64 {
        self.eps_amp
    }

    pub fn spectrum_exponent(&self) -> f64 {
        self.spectrum_exponent
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Normalized coefficients in harmonic order.
    pub fn modes(&self) -> &[FourierMode] {
        &self.modes
    }

    pub fn max_harmonic(&self) -> u32 {
        self.modes.last().map_or(0, |m| m.harmonic)
    }

    /// `(ε(θ), ε′(θ))`.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let (f, df) = eval_series(&self.modes, theta.rem_euclid(TAU));
        (self.eps_mean + self.eps_amp * f, self.eps_amp * df)
    }

    /// `(min_θ ε, max_θ ε)`.
    pub fn extrema(&self) -> (f64, f64) {
        (
            self.eps_mean + self.eps_amp * self.f_min,
            self.eps_mean + self.eps_amp * self.f_max,
        )
    }

    /// Flat key-value record; coefficients are listed in harmonic order.
    pub fn to_record(&self) -> KeyValueRecord {
        let mut record = KeyValueRecord::default();
        record.push("eps_mean", format_float(self.eps_mean));
        record.push("eps_amp", format_float(self.eps_amp));
        record.push("spectrum_exponent", format_float(self.spectrum_exponent));
        record.push("seed", self.seed.to_string());
        record.push("n_modes", self.modes.len().to_string());
        for m in &self.modes {
            record.push(
                "mode",
                format!(
                    "{},{},{}",
                    m.harmonic,
                    format_float(m.cos),
                    format_float(m.sin)
                ),
            );
        }
        record
    }

    /// Inverse of [`ModulationProfile::to_record`].
    ///
    /// The stored coefficients are renormalized, which is a no-op up to
    /// rounding for records produced by this crate.
    pub fn from_record(record: &KeyValueRecord) -> Result<Self> {
        let float = |key: &str| -> Result<f64> {
            let v = record
                .get(key)
                .ok_or_else(|| ModulationError::Record(format!("missing key `{key}`")))?;
            v.parse()
                .map_err(|_| ModulationError::Record(format!("`{key}` is not a number: {v}")))
        };
        let eps_mean = float("eps_mean")?;
        let eps_amp = float("eps_amp")?;
        let spectrum_exponent = float("spectrum_exponent")?;
        let seed = record
            .get("seed")
            .ok_or_else(|| ModulationError::Record("missing key `seed`".into()))?
            .parse::<u64>()
            .map_err(|e| ModulationError::Record(format!("bad seed: {e}")))?;

        let modes = record
            .get_all("mode")
            .map(|v| {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                let bad = || ModulationError::Record(format!("bad mode line `{v}`"));
                if parts.len() != 3 {
                    return Err(bad());
                }
                Ok(FourierMode {
                    harmonic: parts[0].parse().map_err(|_| bad())?,
                    cos: parts[1].parse().map_err(|_| bad())?,
                    sin: parts[2].parse().map_err(|_| bad())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = record.get("n_modes") {
            if n.parse::<usize>().ok() != Some(modes.len()) {
                return Err(ModulationError::Record(format!(
                    "n_modes = {n} but {} mode lines",
                    modes.len()
                )));
            }
        }
        Self::from_modes(eps_mean, eps_amp, spectrum_exponent, seed, modes)
    }
}

/// `(f(θ), f′(θ))` by angle-addition recurrence over the harmonics.
fn eval_series(modes: &[FourierMode], theta: f64) -> (f64, f64) {
    let (s1, c1) = theta.sin_cos();
    let (mut s, mut c) = (0.0_f64, 1.0_f64);
    let mut k = 0u32;
    let (mut f, mut df) = (0.0, 0.0);
    for m in modes {
        while k < m.harmonic {
            (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
            k += 1;
        }
        let kf = m.harmonic as f64;
        f += m.cos * c + m.sin * s;
        df += kf * (m.sin * c - m.cos * s);
    }
    (f, df)
}

fn search_grid(max_harmonic: u32) -> usize {
    MIN_SEARCH_GRID.max(8 * max_harmonic as usize)
}

/// Global minimum and maximum of the series: dense grid, then golden-section
/// refinement on the bracket around the best grid node.
fn series_extrema(modes: &[FourierMode], max_harmonic: u32) -> (f64, f64) {
    let n = search_grid(max_harmonic);
    let h = TAU / n as f64;
    let values: Vec<f64> = (0..n).map(|j| eval_series(modes, j as f64 * h).0).collect();
    let (mut imin, mut imax) = (0, 0);
    for (j, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = j;
        }
        if v > values[imax] {
            imax = j;
        }
    }
    let f = |t: f64| eval_series(modes, t).0;
    let top = golden_max(f, (imax as f64 - 1.0) * h, (imax as f64 + 1.0) * h).max(values[imax]);
    let bottom =
        -golden_max(|t| -f(t), (imin as f64 - 1.0) * h, (imin as f64 + 1.0) * h).max(-values[imin]);
    (bottom, top)
}

/// Maximum of a unimodal function on `[a, b]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(g: F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd).max(g(0.5 * (a + b)))
}

/// `PROFILE_CSV_ROWS` rows of `(θ, ε(θ))` on a uniform grid.
pub fn profile_table(profile: &ModulationProfile) -> Vec<(f64, f64)> {
    crate::quadrature::periodic_nodes(PROFILE_CSV_ROWS)
        .map(|t| (t, profile.eval(t).0))
        .collect()
}
