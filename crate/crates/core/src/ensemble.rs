//! Monte Carlo statistics of the flux excess `Δ` over distorted knots.
//!
//! Realization `i` draws its minor-radius profile from the sub-seed
//! [`sub_seed`]`(seed, i, attempt)`. Profiles that leave `0 < ε(θ) < R` are
//! rejected and redrawn with the next attempt index, up to
//! [`MAX_ATTEMPTS`] times. Each realization depends only on its own index,
//! so results are identical for any number of worker threads.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{GeometryError, KnotClass, TorusGeometry};
use crate::magnetostatics::{self, FieldVector, FluxError};
use crate::modulation::{self, ModulationError};
use crate::output::{format_float, KeyValueRecord};

pub const DEFAULT_REALIZATIONS: usize = 10_000;
pub const DEFAULT_BINS: usize = 100;
pub const MAX_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("AllRealizationsRejected: realization {index} found no profile inside 0 < eps < R in {attempts} attempts")]
    AllRealizationsRejected { index: usize, attempts: u64 },
    #[error("EmptySamples: a histogram needs at least one sample")]
    EmptySamples,
    #[error("a histogram needs at least one bin")]
    NoBins,
    #[error("non-finite sample {0}")]
    NonFiniteSample(f64),
    #[error(transparent)]
    Modulation(#[from] ModulationError),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error("failed to start worker pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, EnsembleError>;

/// SplitMix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the profile for realization `index`, attempt `attempt`:
/// `splitmix64(splitmix64(splitmix64(seed) ^ index) ^ attempt)`.
pub fn sub_seed(seed: u64, index: u64, attempt: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ index) ^ attempt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub knot: KnotClass,
    pub major: f64,
    pub eps_mean: f64,
    pub eps_amp: f64,
    pub spectrum_exponent: f64,
    pub n_modes: usize,
    pub field_direction: FieldVector,
    pub realizations: usize,
    pub seed: u64,
    pub bins: usize,
    pub nodes: usize,
}

impl EnsembleConfig {
    /// Configuration with the default spectrum, ensemble size, bins and nodes.
    pub fn new(
        knot: KnotClass,
        major: f64,
        eps_mean: f64,
        eps_amp: f64,
        field_direction: FieldVector,
    ) -> Self {
        Self {
            knot,
            major,
            eps_mean,
            eps_amp,
            spectrum_exponent: modulation::DEFAULT_SPECTRUM_EXPONENT,
            n_modes: modulation::DEFAULT_MODES,
            field_direction,
            realizations: DEFAULT_REALIZATIONS,
            seed: 0,
            bins: DEFAULT_BINS,
            nodes: magnetostatics::DEFAULT_NODES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(EnsembleError::InvalidConfig(m.to_string()));
        if self.realizations == 0 {
            return bad("realizations must be at least 1");
        }
        if self.bins == 0 {
            return bad("bins must be at least 1");
        }
        if !self.field_direction.is_finite() || self.field_direction.bz == 0.0 {
            return bad("field direction must be finite with a nonzero vertical component");
        }
        if !(self.major.is_finite() && self.major > 0.0) {
            return bad("major radius must be positive");
        }
        if self.nodes < magnetostatics::MIN_NODES {
            return bad("too few quadrature nodes");
        }
        if self.n_modes == 0 {
            return bad("at least one Fourier mode is required");
        }
        Ok(())
    }

    /// Echo of every field, in a fixed key order.
    pub fn to_record(&self) -> KeyValueRecord {
        let mut r = KeyValueRecord::default();
        r.push("p", self.knot.p().to_string());
        r.push("q", self.knot.q().to_string());
        r.push("major", format_float(self.major));
        r.push("eps_mean", format_float(self.eps_mean));
        r.push("eps_amp", format_float(self.eps_amp));
        r.push("spectrum_exponent", format_float(self.spectrum_exponent));
        r.push("n_modes", self.n_modes.to_string());
        let f = self.field_direction;
        r.push(
            "field_direction",
            format!(
                "{},{},{}",
                format_float(f.bx),
                format_float(f.by),
                format_float(f.bz)
            ),
        );
        r.push("realizations", self.realizations.to_string());
        r.push("seed", self.seed.to_string());
        r.push("bins", self.bins.to_string());
        r.push("nodes", self.nodes.to_string());
        r
    }
}

/// Binned probability density of `Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaHistogram {
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
    pub sample_count: usize,
    pub sample_mean: f64,
    pub sample_std: f64,
    pub min: f64,
    pub max: f64,
}

impl DeltaHistogram {
    /// `Σ density_i · width_i`; one for a normalized histogram.
    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| d * (self.bin_edges[i + 1] - self.bin_edges[i]))
            .sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.density.iter().filter(|&&d| d > 0.0).count()
    }

    /// Centers of local maxima after a centered moving average of width
    /// `2 * half_window + 1`. Peaks lower than `min_fraction` of the highest
    /// smoothed value are ignored.
    pub fn smoothed_peaks(&self, half_window: usize, min_fraction: f64) -> Vec<f64> {
        let n = self.density.len();
        let smooth: Vec<f64> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half_window);
                let hi = (i + half_window).min(n - 1);
                self.density[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
            })
            .collect();
        let top = smooth.iter().cloned().fold(0.0, f64::max);
        (0..n)
            .filter(|&i| {
                let left = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    smooth[i - 1]
                };
                let right = if i + 1 == n {
                    f64::NEG_INFINITY
                } else {
                    smooth[i + 1]
                };
                smooth[i] > left && smooth[i] >= right && smooth[i] >= min_fraction * top
            })
            .map(|i| 0.5 * (self.bin_edges[i] + self.bin_edges[i + 1]))
            .collect()
    }

    /// Summary statistics as key-value pairs.
    pub fn summary_record(&self) -> KeyValueRecord {
        let mut r = KeyValueRecord::default();
        r.push("sample_count", self.sample_count.to_string());
        r.push_float("mean", self.sample_mean);
        r.push_float("std", self.sample_std);
        r.push_float("min", self.min);
        r.push_float("max", self.max);
        r
    }
}

/// Uniform-bin density over `[min, max]` of the samples.
///
/// When every sample is equal the histogram collapses to a single bin a few
/// ulps wide around the common value, whatever `bins` says.
pub fn histogram(samples: &[f64], bins: usize) -> Result<DeltaHistogram> {
    if samples.is_empty() {
        return Err(EnsembleError::EmptySamples);
    }
    if bins == 0 {
        return Err(EnsembleError::NoBins);
    }
    if let Some(&bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(EnsembleError::NonFiniteSample(bad));
    }
    let n = samples.len();
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };

    let (bin_edges, counts) = if min == max {
        let half = 4.0 * f64::EPSILON * min.abs().max(1.0);
        (vec![min - half, max + half], vec![n])
    } else {
        let width = (max - min) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| min + i as f64 * width).collect();
        edges.push(max);
        let mut counts = vec![0usize; bins];
        for &v in samples {
            let idx = (((v - min) / width) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        (edges, counts)
    };
    let density = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| c as f64 / (n as f64 * (bin_edges[i + 1] - bin_edges[i])))
        .collect();
    Ok(DeltaHistogram {
        bin_edges,
        density,
        sample_count: n,
        sample_mean: mean,
        sample_std: var.sqrt(),
        min,
        max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput {
    pub histogram: DeltaHistogram,
    /// `Δ` per realization, in realization order.
    pub samples: Vec<f64>,
    /// Profiles redrawn because they left `0 < ε < R`.
    pub rejections: u64,
}

impl EnsembleOutput {
    /// Config echo followed by the run summary.
    pub fn metadata(&self, config: &EnsembleConfig) -> KeyValueRecord {
        let mut r = config.to_record();
        r.extend(&self.histogram.summary_record());
        r.push("rejections", self.rejections.to_string());
        r
    }
}

/// `Δ` for realization `index` and the number of rejected draws before it.
pub fn realization(config: &EnsembleConfig, index: usize) -> Result<(f64, u64)> {
    for attempt in 0..MAX_ATTEMPTS {
        let profile = modulation::generate_profile(
            config.eps_mean,
            config.eps_amp,
            config.spectrum_exponent,
            config.n_modes,
            sub_seed(config.seed, index as u64, attempt),
        )?;
        let geom = match TorusGeometry::modulated(config.major, profile) {
            Ok(g) => g,
            Err(GeometryError::ProfileOutOfRange { .. }) => continue,
            Err(e) => return Err(EnsembleError::InvalidConfig(e.to_string())),
        };
        let delta =
            magnetostatics::excess_delta(config.knot, &geom, config.field_direction, config.nodes)?;
        return Ok((delta, attempt));
    }
    Err(EnsembleError::AllRealizationsRejected {
        index,
        attempts: MAX_ATTEMPTS,
    })
}

/// Runs every realization on `threads` workers (0 picks the rayon default)
/// and bins the samples.
pub fn run_ensemble(config: &EnsembleConfig, threads: usize) -> Result<EnsembleOutput> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| EnsembleError::ThreadPool(e.to_string()))?;
    let results: Vec<(f64, u64)> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|i| realization(config, i))
            .collect::<Result<_>>()
    })?;
    let samples: Vec<f64> = results.iter().map(|r| r.0).collect();
    let rejections = results.iter().map(|r| r.1).sum();
    Ok(EnsembleOutput {
        histogram: histogram(&samples, config.bins)?,
        samples,
        rejections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn base(eps_amp: f64) -> EnsembleConfig {
        let mut c = EnsembleConfig::new(
            KnotClass::new(2, 3).unwrap(),
            1.0,
            0.5,
            eps_amp,
            FieldVector::vertical(1.0),
        );
        c.realizations = 64;
        c.nodes = 1024;
        c
    }

    #[test]
    fn two_sample_histogram() {
        let h = histogram(&[0.0, 1.0], 2).unwrap();
        assert_eq!(h.bin_edges, vec![0.0, 0.5, 1.0]);
        assert_eq!(h.density, vec![1.0, 1.0]);
        assert_eq!(h.sample_mean, 0.5);
    }

    #[test]
    fn equal_samples_collapse_to_one_bin() {
        let h = histogram(&[0.125; 10], 100).unwrap();
        assert_eq!(h.density.len(), 1);
        assert!((h.integral() - 1.0).abs() < 1e-12);
        assert!(h.bin_edges[0] < 0.125 && h.bin_edges[1] > 0.125);
        assert_eq!(h.sample_std, 0.0);
    }

    #[test]
    fn histogram_errors() {
        assert_eq!(histogram(&[], 3), Err(EnsembleError::EmptySamples));
        assert_eq!(histogram(&[1.0], 0), Err(EnsembleError::NoBins));
        assert!(matches!(
            histogram(&[f64::NAN], 1),
            Err(EnsembleError::NonFiniteSample(_))
        ));
    }

    #[test]
    fn normal_samples_are_centered() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let h = histogram(&xs, 100).unwrap();
        assert!(h.sample_mean.abs() < 5.0 / (n as f64).sqrt());
        assert!((h.sample_std - 1.0).abs() < 0.01);
        assert!((h.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sub_seeds_differ() {
        let a = sub_seed(7, 0, 0);
        assert_ne!(a, sub_seed(7, 1, 0));
        assert_ne!(a, sub_seed(7, 0, 1));
        assert_ne!(a, sub_seed(8, 0, 0));
        assert_eq!(a, sub_seed(7, 0, 0));
    }

    #[test]
    fn undistorted_ensemble_is_a_spike() {
        let out = run_ensemble(&base(0.0), 2).unwrap();
        assert!(out.samples.iter().all(|&d| d == out.samples[0]));
        assert!((out.samples[0] - 0.125).abs() < 1e-12);
        assert_eq!(out.histogram.occupied_bins(), 1);
        assert_eq!(out.rejections, 0);
    }

    #[test]
    fn single_realization() {
        let mut c = base(0.25);
        c.realizations = 1;
        let out = run_ensemble(&c, 1).unwrap();
        assert_eq!(out.histogram.occupied_bins(), 1);
        assert!((out.histogram.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_samples() {
        let c = base(0.25);
        let a = run_ensemble(&c, 1).unwrap();
        let b = run_ensemble(&c, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_range_profiles_are_rejected_and_counted() {
        // mean + amp > R, so some draws must be redrawn
        let mut c = base(0.3);
        c.eps_mean = 0.75;
        c.realizations = 40;
        let out = run_ensemble(&c, 2).unwrap();
        assert!(out.rejections > 0);
        assert_eq!(out.samples.len(), 40);
    }

    #[test]
    fn impossible_geometry_is_reported() {
        let mut c = base(0.1);
        c.eps_mean = 1.2;
        assert!(matches!(
            run_ensemble(&c, 1),
            Err(EnsembleError::AllRealizationsRejected {
                index: 0,
                attempts: MAX_ATTEMPTS
            })
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = base(0.1);
        c.field_direction = FieldVector::new(1.0, 0.0, 0.0);
        assert!(matches!(
            run_ensemble(&c, 1),
            Err(EnsembleError::InvalidConfig(_))
        ));
        let mut c = base(0.1);
        c.realizations = 0;
        assert!(c.validate().is_err());
        let mut c = base(0.6);
        c.realizations = 2;
        assert!(matches!(
            run_ensemble(&c, 1),
            Err(EnsembleError::Modulation(_))
        ));
    }

    #[test]
    fn metadata_echoes_config() {
        let c = base(0.0);
        let out = run_ensemble(&c, 1).unwrap();
        let meta = out.metadata(&c);
        assert_eq!(meta.get("realizations"), Some("64"));
        assert_eq!(meta.get("rejections"), Some("0"));
        assert_eq!(meta.get("sample_count"), Some("64"));
        assert!(meta.get("field_direction").is_some());
    }
}
