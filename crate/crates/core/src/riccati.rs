//! Riccati residuals, the one-parameter family of general solutions
//! `W_g(x; F)` built from a particular solution, and the induced family of
//! partner potentials.
//!
//! For a pair of order `σ` (`V = W² − σW' + d`) the substitution
//! `W = W_p − σ/v` turns the Riccati equation into `v' = −2σ W_p v + 1`.
//! That linear equation is integrated directly on the grid: its quadrature
//! form overflows for confining potentials.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{FactorizationPair, ParamPoint, ParametricPotential};
use crate::numgrid::{derivative_fourth_order, integrate_linear_ode_with, Grid, SampledFunction};
use crate::real::Real;

/// Relative tolerance for residuals computed with closed-form `W'`.
pub const ANALYTIC_RESIDUAL_TOL: f64 = 1e-9;
/// Relative tolerance for residuals computed with finite-difference `W'`.
pub const FD_RESIDUAL_TOL: f64 = 1e-6;
/// Absolute tolerance on `max − min` when deciding that a sampled function is
/// constant.
pub const FLATNESS_TOL: f64 = 1e-8;
/// Node neighbourhood (in grid spacings) masked in family members.
pub const NODE_MASK_SPACINGS: f64 = 2.0;
/// RK4 substeps per grid interval when integrating `v`.
pub const RK4_SUBSTEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeSource {
    Analytic,
    FiniteDifference,
}

/// Pointwise residual `W² − σW' + d − V`.
#[derive(Debug, Clone)]
pub struct ResidualReport<T> {
    pub max_abs: T,
    /// `max(1, max|V|)`, the scale tolerances are relative to.
    pub scale: T,
    pub residual: SampledFunction<T>,
    pub derivative: DerivativeSource,
}

impl<T: Real> ResidualReport<T> {
    pub fn relative(&self) -> T {
        self.max_abs / self.scale
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.relative() < T::lit(tol)
    }

    /// Passes at the default tolerance for its derivative source.
    pub fn passes_default(&self) -> bool {
        match self.derivative {
            DerivativeSource::Analytic => self.passes(ANALYTIC_RESIDUAL_TOL),
            DerivativeSource::FiniteDifference => self.passes(FD_RESIDUAL_TOL),
        }
    }
}

/// Residual of `pair` against `V(·, a)` on the grid. Uses the closed-form
/// `W'` when the pair has one and a fourth-order difference otherwise.
/// Points near poles of `V` are masked, not reported as errors.
pub fn riccati_residual<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    grid: &Grid<T>,
) -> Result<ResidualReport<T>> {
    potential.check_evaluable(a)?;
    if !potential.domain.contains_grid(grid) {
        return Err(Error::OutsideDomain {
            lo: grid.x_lo().as_f64(),
            hi: grid.x_hi().as_f64(),
            domain_lo: potential.domain.lo.as_f64(),
            domain_hi: potential.domain.hi.as_f64(),
        });
    }
    let v = potential.sample(a, grid);
    let w = pair.w.sample(a, grid);
    let dw = pair.w.sample_derivative(a, grid);
    let source = if pair.w.has_derivative() {
        DerivativeSource::Analytic
    } else {
        DerivativeSource::FiniteDifference
    };
    residual_from_samples(&v, &w, &dw, pair.energy(a), pair.sign(), source)
}

/// Residual `W² − σW' + d − V` from samples.
pub fn residual_from_samples<T: Real>(
    v: &SampledFunction<T>,
    w: &SampledFunction<T>,
    dw: &SampledFunction<T>,
    d: T,
    sign: T,
    source: DerivativeSource,
) -> Result<ResidualReport<T>> {
    let lhs = w.zip_with(dw, |w, dw| w * w - sign * dw + d)?;
    let residual = lhs.zip_with(v, |l, v| l - v)?;
    if residual.valid_count() == 0 {
        return Err(Error::DegenerateGrid("no unmasked points for the residual".into()));
    }
    Ok(ResidualReport {
        max_abs: residual.max_abs(),
        scale: T::one().max(v.max_abs()),
        residual,
        derivative: source,
    })
}

/// Family constant `F`, with `∞` standing for the particular solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyConstant<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> FamilyConstant<T> {
    /// Accepts a real number or `inf` / `∞`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "inf" | "+inf" | "∞" | "infinity" => Ok(Self::Infinite),
            _ => t
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(|v| Self::Finite(T::lit(v)))
                .ok_or_else(|| Error::ParseParams(format!("bad family constant `{t}`"))),
        }
    }
}

impl<T: Real> fmt::Display for FamilyConstant<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyConstant::Finite(v) => write!(f, "{v}"),
            FamilyConstant::Infinite => f.write_str("inf"),
        }
    }
}

/// One member of the general-solution family.
#[derive(Debug, Clone)]
pub struct PartnerFamilyMember<T> {
    pub family_constant: FamilyConstant<T>,
    /// Linearized variable; fully masked for `F = ∞`.
    pub v: SampledFunction<T>,
    pub w_g: SampledFunction<T>,
    /// `W_g'` from the linear ODE, no differencing.
    pub w_g_prime: SampledFunction<T>,
    pub v_tilde_g: SampledFunction<T>,
    /// `W_g − W_p`.
    pub gap: SampledFunction<T>,
    pub gap_prime: SampledFunction<T>,
    /// Zeros of `v`, where `W_g` has poles.
    pub nodes: Vec<T>,
}

impl<T: Real> PartnerFamilyMember<T> {
    pub fn is_regular(&self) -> bool {
        self.nodes.is_empty() && self.w_g.masked_count() == 0
    }
}

/// Builds the family member for constant `F`. The caller is expected to have
/// validated `pair` with [`riccati_residual`].
pub fn general_solution<T: Real>(
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    family_constant: FamilyConstant<T>,
    grid: &Grid<T>,
) -> Result<PartnerFamilyMember<T>> {
    let sign = pair.sign();
    let wp = pair.w.sample(a, grid);
    let wp_prime = pair.w.sample_derivative(a, grid);
    let vt_p = pair.sample_partner(a, grid);

    let y0 = match family_constant {
        FamilyConstant::Infinite => {
            let zeros = SampledFunction::constant(*grid, T::zero());
            return Ok(PartnerFamilyMember {
                family_constant,
                v: SampledFunction::with_mask(
                    *grid,
                    vec![T::infinity(); grid.len()],
                    vec![true; grid.len()],
                )?,
                w_g: wp,
                w_g_prime: wp_prime,
                v_tilde_g: vt_p,
                gap: zeros.clone(),
                gap_prime: zeros,
                nodes: Vec::new(),
            });
        }
        FamilyConstant::Finite(f) => pair.gauge.initial_value(f, grid.anchor_x(), a),
    };

    let two = T::lit(2.0);
    let fine = grid.refined(RK4_SUBSTEPS);
    let v_fine = integrate_linear_ode_with(fine, y0, |x| (-two * sign * pair.w.evaluate(x, a), T::one()));
    let v = SampledFunction::with_mask(
        *grid,
        (0..grid.len()).map(|i| v_fine.values()[i * RK4_SUBSTEPS]).collect(),
        (0..grid.len()).map(|i| v_fine.is_masked(i * RK4_SUBSTEPS)).collect(),
    )?;
    let nodes = find_nodes(&v);

    let gap = v.map(|_, v| -sign / v);
    // gap' = σ v'/v² with v' = −2σ W_p v + 1
    let gap_prime = v.zip_with(&wp, |v, w| (-two * w * v + sign) / (v * v))?;
    let mut w_g = wp.zip_with(&gap, |w, g| w + g)?;
    let mut w_g_prime = wp_prime.zip_with(&gap_prime, |w, g| w + g)?;
    let mut v_tilde_g = vt_p.zip_with(&gap_prime, |p, g| p + two * sign * g)?;
    let mut gap = gap;
    let mut gap_prime = gap_prime;

    let radius = grid.spacing() * T::lit(NODE_MASK_SPACINGS);
    for i in 0..grid.len() {
        let x = grid.x(i);
        if nodes.iter().any(|&n| (x - n).abs() <= radius) {
            for f in [&mut w_g, &mut w_g_prime, &mut v_tilde_g, &mut gap, &mut gap_prime] {
                f.mask_point(i);
            }
        }
    }

    Ok(PartnerFamilyMember {
        family_constant,
        v,
        w_g,
        w_g_prime,
        v_tilde_g,
        gap,
        gap_prime,
        nodes,
    })
}

/// Sign changes of `v` between consecutive unmasked points, located by linear
/// interpolation. Exact zeros count as nodes.
fn find_nodes<T: Real>(v: &SampledFunction<T>) -> Vec<T> {
    let grid = v.grid();
    let mut nodes = Vec::new();
    for i in 0..grid.len() {
        let Some(vi) = v.value(i) else { continue };
        if vi == T::zero() {
            nodes.push(grid.x(i));
            continue;
        }
        if i + 1 < grid.len() {
            if let Some(vj) = v.value(i + 1) {
                if vj != T::zero() && (vi < T::zero()) != (vj < T::zero()) {
                    let (xi, xj) = (grid.x(i), grid.x(i + 1));
                    nodes.push(xi - vi * (xj - xi) / (vj - vi));
                }
            }
        }
    }
    nodes
}

/// Riccati residual of a family member with `W_g'` taken by fourth-order
/// finite differences of the sampled `W_g`, ignoring points within
/// `clearance` of a node (difference stencils cannot resolve a pole).
pub fn member_residual_fd<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    member: &PartnerFamilyMember<T>,
    clearance: T,
) -> Result<ResidualReport<T>> {
    let grid = *member.w_g.grid();
    let mut v = potential.sample(a, &grid);
    for i in 0..grid.len() {
        if member.nodes.iter().any(|&n| (grid.x(i) - n).abs() < clearance) {
            v.mask_point(i);
        }
    }
    let dw = derivative_fourth_order(&member.w_g);
    residual_from_samples(
        &v,
        &member.w_g,
        &dw,
        pair.energy(a),
        pair.sign(),
        DerivativeSource::FiniteDifference,
    )
}

/// Whether two family members differ by a constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinctnessReport<T> {
    /// `max − min` of `Ṽ_g(·; F1) − Ṽ_g(·; F2)` on the common unmasked set.
    pub sup_dev_of_difference: T,
    pub mean_shift: T,
    pub common_points: usize,
    pub is_constant_shift: bool,
}

pub const MIN_COMMON_POINTS: usize = 10;

pub fn family_distinctness<T: Real>(
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    f1: FamilyConstant<T>,
    f2: FamilyConstant<T>,
    grid: &Grid<T>,
) -> Result<DistinctnessReport<T>> {
    family_distinctness_with_tol(pair, a, f1, f2, grid, T::lit(FLATNESS_TOL))
}

pub fn family_distinctness_with_tol<T: Real>(
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    f1: FamilyConstant<T>,
    f2: FamilyConstant<T>,
    grid: &Grid<T>,
    tol: T,
) -> Result<DistinctnessReport<T>> {
    if f1 == f2 {
        return Err(Error::SameFamilyConstant);
    }
    let m1 = general_solution(pair, a, f1, grid)?;
    let m2 = general_solution(pair, a, f2, grid)?;
    let diff = m1.v_tilde_g.zip_with(&m2.v_tilde_g, |x, y| x - y)?;
    let common = diff.valid_count();
    if common < MIN_COMMON_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_COMMON_POINTS,
            found: common,
        });
    }
    let flat = diff.flatness().unwrap_or_else(T::zero);
    Ok(DistinctnessReport {
        sup_dev_of_difference: flat,
        mean_shift: diff.mean().unwrap_or_else(T::zero),
        common_points: common,
        is_constant_shift: flat < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Interval, Order, Superpotential};

    fn zero_pair() -> (ParametricPotential<f64>, FactorizationPair<f64>) {
        let v = ParametricPotential::new("zero", "0", &[], Interval::real_line(), |_, _| 0.0);
        let pair = FactorizationPair::new(
            "zero",
            "zero",
            Superpotential::new("0", |_, _| 0.0).with_derivative(|_, _| 0.0),
            "0",
            |_| 0.0,
            Order::AdaggerA,
        );
        (v, pair)
    }

    fn constant_pair(c: f64) -> FactorizationPair<f64> {
        FactorizationPair::new(
            "const",
            "const",
            Superpotential::new("c", move |_, _| c).with_derivative(|_, _| 0.0),
            "0",
            |_| 0.0,
            Order::AdaggerA,
        )
    }

    #[test]
    fn trivial_residual_vanishes() {
        let (v, pair) = zero_pair();
        let g = Grid::new(0.0, 1.0, 50).unwrap();
        let r = riccati_residual(&v, &pair, &ParamPoint::empty(), &g).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert!(r.passes_default());
    }

    #[test]
    fn residual_rejects_grid_outside_domain() {
        let v = ParametricPotential::new("half", "1/r", &[], Interval::positive_half_line(), |r: f64, _| 1.0 / r);
        let (_, pair) = zero_pair();
        let g = Grid::new(-1.0, 1.0, 50).unwrap();
        assert!(matches!(
            riccati_residual(&v, &pair, &ParamPoint::empty(), &g),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn infinite_constant_is_the_particular_solution() {
        let pair = constant_pair(0.7);
        let g = Grid::new(-1.0, 1.0, 64).unwrap();
        let m = general_solution(&pair, &ParamPoint::empty(), FamilyConstant::Infinite, &g).unwrap();
        assert_eq!(m.w_g, pair.w.sample(&ParamPoint::empty(), &g));
        assert_eq!(m.v_tilde_g, pair.sample_partner(&ParamPoint::empty(), &g));
        assert!(m.nodes.is_empty());
        assert_eq!(m.gap.max_abs(), 0.0);
    }

    #[test]
    fn constant_superpotential_stationary_member() {
        let c = 0.5;
        let pair = constant_pair(c);
        let g = Grid::new(-2.0, 2.0, 101).unwrap().with_anchor(50).unwrap();
        let a = ParamPoint::empty();
        let m = general_solution(&pair, &a, FamilyConstant::Finite(1.0 / (2.0 * c)), &g).unwrap();
        assert!(m.w_g.iter_valid().all(|(_, _, w)| (w + c).abs() < 1e-14));
        assert_eq!(m.v_tilde_g.flatness().unwrap(), 0.0);
        let r = family_distinctness(&pair, &a, FamilyConstant::Finite(1.0 / (2.0 * c)), FamilyConstant::Infinite, &g)
            .unwrap();
        assert!(r.is_constant_shift);
        assert_eq!(r.sup_dev_of_difference, 0.0);
    }

    #[test]
    fn distinctness_requires_distinct_constants() {
        let pair = constant_pair(1.0);
        let g = Grid::new(0.0, 1.0, 32).unwrap();
        assert!(matches!(
            family_distinctness(&pair, &ParamPoint::empty(), FamilyConstant::Infinite, FamilyConstant::Infinite, &g),
            Err(Error::SameFamilyConstant)
        ));
    }

    #[test]
    fn nodes_located_by_interpolation() {
        // W_p = 0: v = F + (x − x0), node at x0 − F.
        let (_, pair) = zero_pair();
        let g = Grid::new(-1.0, 1.0, 201).unwrap().with_anchor_near(0.0);
        let m = general_solution(&pair, &ParamPoint::empty(), FamilyConstant::Finite(0.3337), &g).unwrap();
        assert_eq!(m.nodes.len(), 1);
        assert!((m.nodes[0] + 0.3337).abs() < 1e-12);
        let masked: Vec<usize> = (0..201).filter(|&i| m.w_g.is_masked(i)).collect();
        assert!(masked.iter().all(|&i| (g.x(i) + 0.3337).abs() <= 2.0 * g.spacing()));
        assert!(!m.v.is_masked(67));
    }

    #[test]
    fn family_constant_parsing() {
        assert_eq!(FamilyConstant::<f64>::parse("inf").unwrap(), FamilyConstant::Infinite);
        assert_eq!(FamilyConstant::<f64>::parse(" -0.5").unwrap(), FamilyConstant::Finite(-0.5));
        assert!(FamilyConstant::<f64>::parse("nan").is_err());
        assert_eq!(FamilyConstant::<f64>::Infinite.to_string(), "inf");
    }
}
