#![allow(clippy::excessive_precision)]
//! One-dimensional quadrature rules used by the loop integrals.
//!
//! Two rules live here: a uniform-node periodic trapezoid, which is
//! spectrally accurate for smooth `2π`-periodic integrands, and a globally
//! adaptive Gauss–Kronrod (7/15) rule with interval bisection for integrands
//! that are smooth but not band-limited (arc length has a square root).

use std::f64::consts::TAU;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not reach relative tolerance {tol:e} after {intervals} intervals (error estimate {estimate:e})")]
    NotConverged {
        tol: f64,
        intervals: usize,
        estimate: f64,
    },
    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),
}

/// Uniform nodes `θ_j = 2πj/n`, `j = 0..n`, on one period.
pub fn periodic_nodes(n: usize) -> impl Iterator<Item = f64> + Clone {
    let h = TAU / n as f64;
    (0..n).map(move |j| j as f64 * h)
}

/// Periodic trapezoid over `[0, 2π)` with `n` nodes.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(n: usize, f: F) -> f64 {
    let h = TAU / n as f64;
    periodic_nodes(n).map(f).sum::<f64>() * h
}

// Kronrod abscissae on [-1, 1] (non-negative half); odd indices are the
// Gauss-Legendre 7-point abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod quadrature.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `rel_tol * |value|` (or an absolute floor of
/// `rel_tol * 1e-300`), or `max_intervals` is exhausted.
/// The range is first split into `initial_segments` equal pieces so that
/// oscillatory integrands are resolved before the error estimate is trusted.
pub fn adaptive_gauss_kronrod<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    initial_segments: usize,
    max_intervals: usize,
) -> Result<Integral, QuadratureError> {
    if !(rel_tol > 0.0 && rel_tol.is_finite()) {
        return Err(QuadratureError::InvalidTolerance(rel_tol));
    }
    let pieces = initial_segments.max(1);
    let width = (b - a) / pieces as f64;
    let mut segments: Vec<Segment> = (0..pieces)
        .map(|i| {
            let left = a + i as f64 * width;
            let right = if i + 1 == pieces { b } else { left + width };
            gauss_kronrod_15(&f, left, right)
        })
        .collect();
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= rel_tol * value.abs() || error <= f64::MIN_POSITIVE {
            return Ok(Integral {
                value,
                error_estimate: error,
                intervals: segments.len(),
            });
        }
        if segments.len() >= max_intervals {
            return Err(QuadratureError::NotConverged {
                tol: rel_tol,
                intervals: segments.len(),
                estimate: error,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|l, r| l.1.error.total_cmp(&r.1.error))
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(gauss_kronrod_15(&f, s.a, mid));
        segments.push(gauss_kronrod_15(&f, mid, s.b));
    }
}
