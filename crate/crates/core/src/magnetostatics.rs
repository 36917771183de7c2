//! Aharonov–Bohm phase and threaded flux of a torus knot in a uniform field.
//!
//! With the symmetric gauge `A = (B × r)/2` the loop integral of the vector
//! potential becomes
//!
//! ```text
//! Φτ = ½ ∮ [ Bz (x y′ − y x′) + Bx (y z′ − z y′) + By (z x′ − x z′) ] dθ
//! ```
//!
//! and the phase picked up by an electron (charge `−e`) going once around the
//! knot is `χ = −2π Φτ / Φ0`. For an ideal knot the transverse loop integrals
//! vanish and `Φτ = p Bz (πR² + πε²/2)`, independent of `q`, `Bx` and `By`.
//!
//! The vanishing needs `p ± q ≠ 0` and `p ± 2q ≠ 0`. Coprimality guarantees
//! this except for the unknotted classes `(±1, ±1)` and `(±2, ±1)`, where a
//! single harmonic survives in `∮(zx′ − xz′)`; the closed form includes it.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::geometry::{curve_point_and_derivative, KnotClass, TorusGeometry};
use crate::quadrature::periodic_nodes;
use crate::units::UnitSystem;

pub const DEFAULT_NODES: usize = 4096;
pub const MIN_NODES: usize = 16;
/// Relative tolerance on the node-halving error estimate.
pub const CONVERGENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FluxError {
    #[error("ModulatedGeometryUnsupported: the closed form needs a constant minor radius")]
    ModulatedGeometryUnsupported,
    #[error("at least {MIN_NODES} quadrature nodes are required, got {0}")]
    TooFewNodes(usize),
    #[error("QuadratureNotConverged: node-halving estimate {estimate:e} exceeds {tolerance:e} at {nodes} nodes")]
    QuadratureNotConverged {
        nodes: usize,
        estimate: f64,
        tolerance: f64,
    },
    #[error("VerticalComponentZero: the flux excess is undefined for Bz = 0")]
    VerticalComponentZero,
    #[error("field components must be finite")]
    NonFiniteField,
}

pub type Result<T> = std::result::Result<T, FluxError>;

/// Uniform magnetic field `B = (Bx, By, Bz)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldVector {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl FieldVector {
    pub const fn new(bx: f64, by: f64, bz: f64) -> Self {
        Self { bx, by, bz }
    }

    pub const fn vertical(bz: f64) -> Self {
        Self::new(0.0, 0.0, bz)
    }

    pub fn magnitude(self) -> f64 {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.bx * s, self.by * s, self.bz * s)
    }

    /// Unit vector along the field, or `None` for the zero field.
    pub fn normalized(self) -> Option<Self> {
        let m = self.magnitude();
        (m > 0.0 && m.is_finite()).then(|| self.scaled(1.0 / m))
    }

    pub fn is_finite(self) -> bool {
        self.bx.is_finite() && self.by.is_finite() && self.bz.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxMethod {
    Analytic,
    Numeric,
}

impl FluxMethod {
    pub fn name(self) -> &'static str {
        match self {
            FluxMethod::Analytic => "analytic",
            FluxMethod::Numeric => "numeric",
        }
    }
}

/// Threaded flux together with the Aharonov–Bohm phase it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxResult {
    pub phi_tau: f64,
    pub chi: f64,
    pub method: FluxMethod,
    /// Node-halving estimate; `None` for the closed form.
    pub quadrature_error_estimate: Option<f64>,
    pub units: UnitSystem,
}

impl FluxResult {
    fn new(phi_tau: f64, method: FluxMethod, quadrature_error_estimate: Option<f64>) -> Self {
        Self {
            phi_tau,
            chi: phase_from_flux(phi_tau, UnitSystem::Dimensionless),
            method,
            quadrature_error_estimate,
            units: UnitSystem::Dimensionless,
        }
    }

    /// Reinterprets the inputs in `units`; only the phase depends on `Φ0`.
    pub fn with_units(self, units: UnitSystem) -> Self {
        Self {
            chi: phase_from_flux(self.phi_tau, units),
            units,
            ..self
        }
    }

    pub fn phi_over_phi0(&self) -> f64 {
        self.phi_tau / self.units.flux_quantum()
    }
}

/// `χ = −2π Φτ / Φ0`.
pub fn phase_from_flux(phi_tau: f64, units: UnitSystem) -> f64 {
    -TAU * phi_tau / units.flux_quantum()
}

/// `Φτ = −χ Φ0 / 2π`.
pub fn flux_from_phase(chi: f64, units: UnitSystem) -> f64 {
    -chi * units.flux_quantum() / TAU
}

/// Closed form `Φτ = p Bz (πR² + πε²/2)` for a constant minor radius, plus
/// the `By` term of [`resonant_izx`] for the classes where it survives.
pub fn flux_analytic(
    knot: KnotClass,
    geom: &TorusGeometry,
    field: FieldVector,
) -> Result<FluxResult> {
    let eps = geom
        .minor()
        .as_constant()
        .ok_or(FluxError::ModulatedGeometryUnsupported)?;
    if !field.is_finite() {
        return Err(FluxError::NonFiniteField);
    }
    let r = geom.major();
    let ixy = 2.0 * knot.p() as f64 * (PI * r * r + 0.5 * PI * eps * eps);
    let phi = 0.5 * (field.bz * ixy + field.by * resonant_izx(knot, r, eps));
    Ok(FluxResult::new(phi, FluxMethod::Analytic, None))
}

/// Closed form of `∮(zx′ − xz′) dθ` for an ideal knot.
///
/// Zero unless a harmonic `p ± q` or `p ± 2q` vanishes, which for coprime
/// `(p, q)` happens only for `|p| = |q| = 1` and `|p| = 2, |q| = 1`.
/// `∮(yz′ − zy′) dθ` vanishes for every coprime pair.
pub fn resonant_izx(knot: KnotClass, major: f64, eps: f64) -> f64 {
    let sign = knot.q().signum() as f64;
    match (knot.p().unsigned_abs(), knot.q().unsigned_abs()) {
        (1, 1) => -TAU * major * eps * sign,
        (2, 1) => -PI * eps * eps * sign,
        _ => 0.0,
    }
}

/// Whether the transverse loop integrals of the ideal knot vanish identically.
pub fn obeys_zero_sum_rule(knot: KnotClass) -> bool {
    resonant_izx(knot, 1.0, 1.0) == 0.0
}

/// The three loop integrals `∮(xy′−yx′)`, `∮(yz′−zy′)`, `∮(zx′−xz′)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentIntegrals {
    pub ixy: f64,
    pub iyz: f64,
    pub izx: f64,
}

impl ComponentIntegrals {
    /// `½ (Bz Ixy + Bx Iyz + By Izx)`.
    pub fn flux(&self, field: FieldVector) -> f64 {
        0.5 * (field.bz * self.ixy + field.bx * self.iyz + field.by * self.izx)
    }
}

fn trapezoid_components(
    knot: KnotClass,
    geom: &TorusGeometry,
    nodes: usize,
    stride: usize,
) -> ComponentIntegrals {
    let mut sums = [0.0f64; 3];
    for theta in periodic_nodes(nodes).step_by(stride) {
        let (r, d) = curve_point_and_derivative(knot, geom, theta);
        sums[0] += r.x * d.y - r.y * d.x;
        sums[1] += r.y * d.z - r.z * d.y;
        sums[2] += r.z * d.x - r.x * d.z;
    }
    let h = TAU * stride as f64 / nodes as f64;
    ComponentIntegrals {
        ixy: sums[0] * h,
        iyz: sums[1] * h,
        izx: sums[2] * h,
    }
}

/// Component integrals on `nodes` points and on a grid with half as many.
fn component_integrals_pair(
    knot: KnotClass,
    geom: &TorusGeometry,
    nodes: usize,
) -> Result<(ComponentIntegrals, ComponentIntegrals)> {
    if nodes < MIN_NODES {
        return Err(FluxError::TooFewNodes(nodes));
    }
    if nodes % 2 == 1 {
        return Ok((
            trapezoid_components(knot, geom, nodes, 1),
            trapezoid_components(knot, geom, nodes / 2, 1),
        ));
    }
    // the even-indexed nodes form the coarse grid; accumulate both in one pass
    let mut full = [0.0f64; 3];
    let mut half = [0.0f64; 3];
    for (j, theta) in periodic_nodes(nodes).enumerate() {
        let (r, d) = curve_point_and_derivative(knot, geom, theta);
        let terms = [
            r.x * d.y - r.y * d.x,
            r.y * d.z - r.z * d.y,
            r.z * d.x - r.x * d.z,
        ];
        for i in 0..3 {
            full[i] += terms[i];
            if j % 2 == 0 {
                half[i] += terms[i];
            }
        }
    }
    let h = TAU / nodes as f64;
    let pack = |s: [f64; 3], step: f64| ComponentIntegrals {
        ixy: s[0] * step,
        iyz: s[1] * step,
        izx: s[2] * step,
    };
    Ok((pack(full, h), pack(half, 2.0 * h)))
}

/// The three loop integrals by periodic trapezoid on `nodes` points.
pub fn component_integrals(
    knot: KnotClass,
    geom: &TorusGeometry,
    nodes: usize,
) -> Result<ComponentIntegrals> {
    let (full, half) = component_integrals_pair(knot, geom, nodes)?;
    let scale = geom.major() * geom.major();
    let estimate = (full.ixy - half.ixy)
        .abs()
        .max((full.iyz - half.iyz).abs())
        .max((full.izx - half.izx).abs());
    check_convergence(nodes, estimate, full.ixy.abs().max(scale))?;
    Ok(full)
}

fn check_convergence(nodes: usize, estimate: f64, scale: f64) -> Result<()> {
    let tolerance = CONVERGENCE_TOL * scale.max(1.0);
    if estimate > tolerance || estimate.is_nan() {
        return Err(FluxError::QuadratureNotConverged {
            nodes,
            estimate,
            tolerance,
        });
    }
    Ok(())
}

/// Threaded flux by periodic-trapezoid quadrature of the loop integral.
///
/// Works for constant and modulated minor radii. The error estimate is the
/// change in flux between `nodes/2` and `nodes` points.
pub fn flux_numeric(
    knot: KnotClass,
    geom: &TorusGeometry,
    field: FieldVector,
    nodes: usize,
) -> Result<FluxResult> {
    if !field.is_finite() {
        return Err(FluxError::NonFiniteField);
    }
    let (full, half) = component_integrals_pair(knot, geom, nodes)?;
    let phi = full.flux(field);
    let estimate = (phi - half.flux(field)).abs();
    let r = geom.major();
    check_convergence(nodes, estimate, phi.abs().max(field.magnitude() * r * r))?;
    Ok(FluxResult::new(phi, FluxMethod::Numeric, Some(estimate)))
}

/// Fractional excess `Δ` over the bare-circle flux, `Φτ = p Bz πR² (1 + Δ)`.
pub fn excess_delta(
    knot: KnotClass,
    geom: &TorusGeometry,
    field: FieldVector,
    nodes: usize,
) -> Result<f64> {
    if field.bz == 0.0 {
        return Err(FluxError::VerticalComponentZero);
    }
    let phi = flux_numeric(knot, geom, field, nodes)?.phi_tau;
    let r = geom.major();
    Ok(phi / (knot.p() as f64 * field.bz * PI * r * r) - 1.0)
}

/// Increment of `Bz` that adds one flux quantum to `Φτ`:
/// `Φ0 / (|p| (πR² + πε²/2))`.
pub fn oscillation_period_bz(
    knot: KnotClass,
    geom: &TorusGeometry,
    units: UnitSystem,
) -> Result<f64> {
    let eps = geom
        .minor()
        .as_constant()
        .ok_or(FluxError::ModulatedGeometryUnsupported)?;
    let r = geom.major();
    let area = PI * r * r + 0.5 * PI * eps * eps;
    Ok(units.flux_quantum() / (knot.p().unsigned_abs() as f64 * area))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::generate_profile;
    use approx::assert_relative_eq;

    fn knot(p: i64, q: i64) -> KnotClass {
        KnotClass::new(p, q).unwrap()
    }

    fn torus(r: f64, eps: f64) -> TorusGeometry {
        TorusGeometry::new(r, eps).unwrap()
    }

    #[test]
    fn analytic_examples() {
        let unit = flux_analytic(knot(1, 1), &torus(1.0, 0.0), FieldVector::vertical(1.0)).unwrap();
        assert_relative_eq!(unit.phi_tau, PI, max_relative = 1e-15);
        let trefoil =
            flux_analytic(knot(2, 3), &torus(1.0, 0.5), FieldVector::vertical(1.0)).unwrap();
        assert_relative_eq!(trefoil.phi_tau, 2.25 * PI, max_relative = 1e-15);
        assert!((trefoil.phi_tau - 7.068583).abs() < 1e-6);
        for q in [1, 2, 4, 5, 7] {
            let r = flux_analytic(
                knot(3, q),
                &torus(1.0, 0.4),
                FieldVector::new(5.0, -2.0, 0.0),
            )
            .unwrap();
            assert_eq!(r.phi_tau, 0.0);
        }
    }

    #[test]
    fn unknotted_classes_pick_up_transverse_flux() {
        let g = torus(1.3, 0.4);
        let b = FieldVector::new(0.7, -1.1, 0.9);
        for (p, q) in [
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
            (2, 1),
            (2, -1),
            (-2, 1),
            (-2, -1),
        ] {
            let k = knot(p, q);
            assert!(!obeys_zero_sum_rule(k));
            let num = flux_numeric(k, &g, b, DEFAULT_NODES).unwrap().phi_tau;
            let ana = flux_analytic(k, &g, b).unwrap().phi_tau;
            assert!(
                (num - ana).abs() < 1e-12 * ana.abs().max(1.0),
                "({p},{q}): {num} vs {ana}"
            );
            let c = component_integrals(k, &g, DEFAULT_NODES).unwrap();
            assert!(c.iyz.abs() < 1e-12);
            assert!((c.izx - resonant_izx(k, 1.3, 0.4)).abs() < 1e-12);
        }
        assert!(obeys_zero_sum_rule(knot(2, 3)));
        assert!(obeys_zero_sum_rule(knot(1, 2)));
        assert!(obeys_zero_sum_rule(knot(3, 1)));
    }

    #[test]
    fn analytic_refuses_modulated_tube() {
        let profile = generate_profile(0.5, 0.1, 2.0, 8, 1).unwrap();
        let g = TorusGeometry::modulated(1.0, profile).unwrap();
        assert_eq!(
            flux_analytic(knot(2, 3), &g, FieldVector::vertical(1.0)),
            Err(FluxError::ModulatedGeometryUnsupported)
        );
        assert!(oscillation_period_bz(knot(2, 3), &g, UnitSystem::Dimensionless).is_err());
    }

    #[test]
    fn numeric_matches_closed_form_for_tilted_field() {
        let b = FieldVector::new(0.3, -0.7, 1.1);
        let g = torus(1.0, 0.5);
        let num = flux_numeric(knot(2, 3), &g, b, DEFAULT_NODES).unwrap();
        let ana = flux_analytic(knot(2, 3), &g, b).unwrap();
        assert!((num.phi_tau - ana.phi_tau).abs() <= 1e-10 * ana.phi_tau.abs().max(1.0));
        assert_eq!(num.method, FluxMethod::Numeric);
        assert!(num.quadrature_error_estimate.unwrap() < 1e-12);
    }

    #[test]
    fn numeric_q_independence_and_zero_field() {
        let g = torus(1.0, 0.5);
        let b = FieldVector::new(0.2, 0.1, 0.9);
        let a = flux_numeric(knot(2, 3), &g, b, DEFAULT_NODES)
            .unwrap()
            .phi_tau;
        let c = flux_numeric(knot(2, 5), &g, b, DEFAULT_NODES)
            .unwrap()
            .phi_tau;
        assert!((a - c).abs() < 1e-10 * a.abs());
        let z = flux_numeric(knot(2, 3), &g, FieldVector::default(), DEFAULT_NODES).unwrap();
        assert_eq!(z.phi_tau, 0.0);
    }

    #[test]
    fn phase_identity() {
        let r = flux_analytic(knot(2, 3), &torus(1.0, 0.5), FieldVector::vertical(0.3)).unwrap();
        assert_eq!(r.chi, -TAU * r.phi_tau);
        assert_relative_eq!(
            flux_from_phase(r.chi, UnitSystem::Dimensionless),
            r.phi_tau,
            max_relative = 1e-15
        );
        let phys = r.with_units(UnitSystem::Physical);
        assert_relative_eq!(
            phys.chi,
            -TAU * r.phi_tau / crate::units::FLUX_QUANTUM_SI,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            phys.phi_over_phi0(),
            r.phi_tau / crate::units::FLUX_QUANTUM_SI,
            max_relative = 1e-15
        );
    }

    #[test]
    fn component_integrals_of_ideal_trefoil() {
        let c = component_integrals(knot(2, 3), &torus(1.0, 0.5), DEFAULT_NODES).unwrap();
        assert_relative_eq!(c.ixy, 4.5 * PI, max_relative = 1e-12);
        assert!(c.iyz.abs() < 1e-9 && c.izx.abs() < 1e-9);
    }

    #[test]
    fn too_few_nodes_and_unresolved_integrand() {
        let g = torus(1.0, 0.5);
        assert_eq!(
            flux_numeric(knot(2, 3), &g, FieldVector::vertical(1.0), 8),
            Err(FluxError::TooFewNodes(8))
        );
        // bandwidth of the transverse integrands is p + 2q = 43 > 16 nodes
        let err = flux_numeric(knot(3, 20), &g, FieldVector::new(1.0, 1.0, 1.0), 16);
        assert!(
            matches!(err, Err(FluxError::QuadratureNotConverged { .. })),
            "{err:?}"
        );
    }

    #[test]
    fn odd_node_count() {
        let g = torus(1.0, 0.5);
        let r = flux_numeric(knot(2, 3), &g, FieldVector::new(0.1, 0.2, 1.0), 4097).unwrap();
        assert_relative_eq!(r.phi_tau, 2.25 * PI, max_relative = 1e-13);
    }

    #[test]
    fn excess_for_undistorted_knot() {
        let g = torus(1.0, 0.5);
        let d = excess_delta(knot(2, 3), &g, FieldVector::vertical(1.0), DEFAULT_NODES).unwrap();
        assert!((d - 0.125).abs() < 1e-12, "{d}");
        let tilted = FieldVector::new(0.5f64.sqrt(), (1.0f64 / 3.0).sqrt(), (1.0f64 / 6.0).sqrt());
        let d = excess_delta(knot(2, 3), &g, tilted, DEFAULT_NODES).unwrap();
        assert!((d - 0.125).abs() < 1e-10, "{d}");
        let tiny = torus(1.0, 1e-6);
        let d = excess_delta(knot(2, 3), &tiny, FieldVector::vertical(1.0), DEFAULT_NODES).unwrap();
        assert!(d.abs() < 1e-11);
        assert_eq!(
            excess_delta(
                knot(2, 3),
                &g,
                FieldVector::new(1.0, 0.0, 0.0),
                DEFAULT_NODES
            ),
            Err(FluxError::VerticalComponentZero)
        );
    }

    #[test]
    fn oscillation_periods() {
        let d = UnitSystem::Dimensionless;
        let p0 = oscillation_period_bz(knot(2, 3), &torus(1.0, 0.0), d).unwrap();
        assert_relative_eq!(p0, 1.0 / TAU, max_relative = 1e-15);
        assert!((p0 - 0.159155).abs() < 1e-6);
        let p1 = oscillation_period_bz(knot(2, 3), &torus(1.0, 0.5), d).unwrap();
        assert!((p1 - 0.141471).abs() < 1e-6, "{p1}");
        let phys =
            oscillation_period_bz(knot(1, 1), &torus(1e-6, 0.0), UnitSystem::Physical).unwrap();
        assert!((phys - 1.316e-3).abs() < 1e-6, "{phys}");
    }
}
