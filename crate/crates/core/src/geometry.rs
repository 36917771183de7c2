//! Torus-knot curves.
//!
//! A `(p, q)` torus knot winds `p` times around the rotational axis of a
//! torus with major radius `R` and `q` times through its hole:
//!
//! ```text
//! x(θ) = [R + ε cos(qθ)] cos(pθ)
//! y(θ) = [R + ε cos(qθ)] sin(pθ)
//! z(θ) = ε sin(qθ),            0 ≤ θ < 2π
//! ```
//!
//! The minor radius `ε` is either a constant or a smooth periodic profile
//! `ε(θ)` (see [`crate::modulation`]), in which case it is evaluated pointwise.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::modulation::ModulationProfile;
use crate::quadrature::{self, QuadratureError};
use crate::vector::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("ZeroIndex: winding numbers must be nonzero, got (p, q) = ({p}, {q})")]
    ZeroIndex { p: i64, q: i64 },
    #[error("NotCoprime: (p, q) = ({p}, {q}) share the factor {gcd}; the curve is a link of {gcd} identical knots")]
    NotCoprime { p: i64, q: i64, gcd: u64 },
    #[error("major radius must be positive and finite, got {0}")]
    InvalidMajorRadius(f64),
    #[error("minor radius must satisfy 0 <= eps < R, got eps = {minor}, R = {major}")]
    InvalidMinorRadius { minor: f64, major: f64 },
    #[error("modulated minor radius leaves (0, R): range [{min}, {max}] with R = {major}")]
    ProfileOutOfRange { min: f64, max: f64, major: f64 },
    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("QuadratureFailure: {0}")]
    QuadratureFailure(#[from] QuadratureError),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The coprime pair `(p, q)` labelling a torus knot.
///
/// Negative values are allowed: `(p, -q)` is the mirror image of `(p, q)` and
/// `(-p, -q)` is the same knot traversed backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KnotClass {
    p: i64,
    q: i64,
}

impl KnotClass {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(GeometryError::ZeroIndex { p, q });
        }
        let g = gcd(p.unsigned_abs(), q.unsigned_abs());
        if g != 1 {
            return Err(GeometryError::NotCoprime { p, q, gcd: g });
        }
        Ok(Self { p, q })
    }

    /// Turns around the rotational axis.
    pub fn p(self) -> i64 {
        self.p
    }

    /// Passes through the hole.
    pub fn q(self) -> i64 {
        self.q
    }

    pub fn mirrored(self) -> Self {
        Self {
            p: self.p,
            q: -self.q,
        }
    }

    pub fn reversed(self) -> Self {
        Self {
            p: -self.p,
            q: -self.q,
        }
    }
}

/// Checks that `(p, q)` labels a single knot rather than a link.
pub fn validate_knot_class(p: i64, q: i64) -> Result<KnotClass> {
    KnotClass::new(p, q)
}

/// Minor radius of the torus tube.
#[derive(Debug, Clone, PartialEq)]
pub enum MinorRadius {
    Constant(f64),
    Modulated(ModulationProfile),
}

impl MinorRadius {
    /// `(ε(θ), ε′(θ))`.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        match self {
            MinorRadius::Constant(eps) => (*eps, 0.0),
            MinorRadius::Modulated(profile) => profile.eval(theta),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            MinorRadius::Constant(eps) => Some(*eps),
            MinorRadius::Modulated(_) => None,
        }
    }
}

/// Torus carrying the knot: major radius and (possibly modulated) minor radius.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGeometry {
    major: f64,
    minor: MinorRadius,
}

impl TorusGeometry {
    /// Constant minor radius. `eps = 0` is accepted and collapses the knot onto
    /// a `p`-fold circle of radius `R`.
    pub fn new(major: f64, minor: f64) -> Result<Self> {
        check_major(major)?;
        if !(minor.is_finite() && minor >= 0.0 && minor < major) {
            return Err(GeometryError::InvalidMinorRadius { minor, major });
        }
        Ok(Self {
            major,
            minor: MinorRadius::Constant(minor),
        })
    }

    /// Minor radius modulated along the knot; requires `0 < ε(θ) < R` everywhere.
    pub fn modulated(major: f64, profile: ModulationProfile) -> Result<Self> {
        check_major(major)?;
        let (min, max) = profile.extrema();
        if !(min > 0.0 && max < major) {
            return Err(GeometryError::ProfileOutOfRange { min, max, major });
        }
        Ok(Self {
            major,
            minor: MinorRadius::Modulated(profile),
        })
    }

    pub fn major(&self) -> f64 {
        self.major
    }

    pub fn minor(&self) -> &MinorRadius {
        &self.minor
    }

    pub fn is_modulated(&self) -> bool {
        matches!(self.minor, MinorRadius::Modulated(_))
    }
}

fn check_major(major: f64) -> Result<()> {
    if major.is_finite() && major > 0.0 {
        Ok(())
    } else {
        Err(GeometryError::InvalidMajorRadius(major))
    }
}

/// Point and tangent `dr/dθ` at the same parameter value.
pub fn curve_point_and_derivative(
    knot: KnotClass,
    geom: &TorusGeometry,
    theta: f64,
) -> (Vec3, Vec3) {
    let t = theta.rem_euclid(TAU);
    let (p, q) = (knot.p as f64, knot.q as f64);
    let (eps, deps) = geom.minor.eval(t);
    let (sin_p, cos_p) = (p * t).sin_cos();
    let (sin_q, cos_q) = (q * t).sin_cos();

    let rho = geom.major + eps * cos_q;
    let drho = deps * cos_q - q * eps * sin_q;

    let point = Vec3::new(rho * cos_p, rho * sin_p, eps * sin_q);
    let tangent = Vec3::new(
        drho * cos_p - p * rho * sin_p,
        drho * sin_p + p * rho * cos_p,
        deps * sin_q + q * eps * cos_q,
    );
    (point, tangent)
}

pub fn curve_point(knot: KnotClass, geom: &TorusGeometry, theta: f64) -> Vec3 {
    curve_point_and_derivative(knot, geom, theta).0
}

/// Exact `dr/dθ`, including the `ε′(θ)` terms of a modulated tube.
pub fn curve_derivative(knot: KnotClass, geom: &TorusGeometry, theta: f64) -> Vec3 {
    curve_point_and_derivative(knot, geom, theta).1
}

pub const DEFAULT_ARC_LENGTH_TOL: f64 = 1e-10;
const ARC_LENGTH_MAX_INTERVALS: usize = 20_000;

/// Length `∮ |dr/dθ| dθ` of the closed knot, to relative tolerance `tol`.
pub fn arc_length(knot: KnotClass, geom: &TorusGeometry, tol: f64) -> Result<f64> {
    let bandwidth = (knot.p.unsigned_abs() + knot.q.unsigned_abs()) as usize;
    let modes = match geom.minor() {
        MinorRadius::Constant(_) => 0,
        MinorRadius::Modulated(profile) => profile.max_harmonic() as usize,
    };
    let integral = quadrature::adaptive_gauss_kronrod(
        |t| curve_derivative(knot, geom, t).norm(),
        0.0,
        TAU,
        tol,
        (2 * (bandwidth + modes)).max(8),
        ARC_LENGTH_MAX_INTERVALS,
    )?;
    Ok(integral.value)
}

/// One row of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub theta: f64,
    pub point: Vec3,
}

/// `n` points at `θ_k = 2πk/n`; the point at `2π` is omitted since it repeats `θ = 0`.
pub fn sample_curve(knot: KnotClass, geom: &TorusGeometry, n: usize) -> Result<Vec<CurveSample>> {
    if n < 2 {
        return Err(GeometryError::TooFewSamples(n));
    }
    Ok(quadrature::periodic_nodes(n)
        .map(|theta| CurveSample {
            theta,
            point: curve_point(knot, geom, theta),
        })
        .collect())
}
