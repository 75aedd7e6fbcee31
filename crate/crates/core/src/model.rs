//! Domain vocabulary: parametric potentials, superpotentials, factorization
//! pairs, parameter maps and shape-invariance data.
//!
//! Everything here is a closed-form evaluator over `(x, a)` where `a` is a
//! named [`ParamPoint`]. Evaluators are reference-counted closures so pairs can
//! be re-parameterized (transported along a map) without copying state.

use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numgrid::{derivative_fourth_order, Grid, SampledFunction};
use crate::real::Real;

/// `f(x, a)`.
pub type PointFn<T> = Arc<dyn Fn(T, &ParamPoint<T>) -> T + Send + Sync>;
/// `f(a)`.
pub type ParamFn<T> = Arc<dyn Fn(&ParamPoint<T>) -> T + Send + Sync>;
type PredicateFn<T> = Arc<dyn Fn(&ParamPoint<T>) -> bool + Send + Sync>;
type PointsFn<T> = Arc<dyn Fn(&ParamPoint<T>) -> Vec<T> + Send + Sync>;
type MapFn<T> = Arc<dyn Fn(&ParamPoint<T>) -> ParamPoint<T> + Send + Sync>;

/// Ordered list of named parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint<T> {
    entries: Vec<(String, T)>,
}

impl<T: Real> ParamPoint<T> {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, T)>) -> Result<Self> {
        let mut point = Self::empty();
        for (name, value) in pairs {
            let name = name.into();
            if point.get(&name).is_some() {
                return Err(Error::DuplicateParameter { name });
            }
            if !value.is_finite() {
                return Err(Error::NonFiniteParameter { name });
            }
            point.entries.push((name, value));
        }
        Ok(point)
    }

    /// Parses `name=value,name=value`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::ParseParams(format!("expected name=value, got `{item}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::ParseParams(format!("bad number in `{item}`")))?;
            pairs.push((name.trim().to_string(), T::lit(value)));
        }
        Self::from_pairs(pairs)
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn require(&self, name: &str) -> Result<T> {
        self.get(name).ok_or_else(|| Error::MissingParameter {
            name: name.to_string(),
        })
    }

    /// Returns a copy with `name` set to `value` (appended when absent).
    pub fn with(&self, name: &str, value: T) -> Self {
        let mut out = self.clone();
        match out.entries.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => out.entries.push((name.to_string(), value)),
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.is_finite())
    }
}

impl<T: Real> Index<&str> for ParamPoint<T> {
    type Output = T;

    /// Panics when the parameter is absent; public operations validate
    /// parameter names before evaluating closures.
    fn index(&self, name: &str) -> &T {
        &self
            .entries
            .iter()
            .find(|(n, _)| n == name)
            .unwrap_or_else(|| panic!("parameter `{name}` missing"))
            .1
    }
}

impl<T: Real> fmt::Display for ParamPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(n, v)| format!("{n}={v}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn real_line() -> Self {
        Self {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    pub fn positive_half_line() -> Self {
        Self {
            lo: T::zero(),
            hi: T::infinity(),
        }
    }

    pub fn contains(&self, x: T) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn contains_grid(&self, grid: &Grid<T>) -> bool {
        self.contains(grid.x_lo()) && self.contains(grid.x_hi())
    }
}

/// Named predicate on parameter points.
#[derive(Clone)]
pub struct ParamConstraint<T> {
    pub description: String,
    predicate: PredicateFn<T>,
}

impl<T: Real> ParamConstraint<T> {
    pub fn new(
        description: impl Into<String>,
        predicate: impl Fn(&ParamPoint<T>) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            description: description.into(),
            predicate: Arc::new(predicate),
        }
    }

    pub fn holds(&self, a: &ParamPoint<T>) -> bool {
        (self.predicate)(a)
    }
}

impl<T> fmt::Debug for ParamConstraint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ParamConstraint").field(&self.description).finish()
    }
}

/// A family of potentials `V(x, a)`.
#[derive(Clone)]
pub struct ParametricPotential<T> {
    pub id: String,
    pub formula: String,
    pub param_names: Vec<String>,
    pub domain: Interval<T>,
    pub constraints: Vec<ParamConstraint<T>>,
    eval: PointFn<T>,
    singular_points: PointsFn<T>,
}

impl<T: Real> ParametricPotential<T> {
    pub fn new(
        id: impl Into<String>,
        formula: impl Into<String>,
        param_names: &[&str],
        domain: Interval<T>,
        eval: impl Fn(T, &ParamPoint<T>) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            formula: formula.into(),
            param_names: param_names.iter().map(|s| s.to_string()).collect(),
            domain,
            constraints: Vec::new(),
            eval: Arc::new(eval),
            singular_points: Arc::new(|_| Vec::new()),
        }
    }

    pub fn with_constraint(
        mut self,
        description: &str,
        predicate: impl Fn(&ParamPoint<T>) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.constraints.push(ParamConstraint::new(description, predicate));
        self
    }

    pub fn with_singular_points(
        mut self,
        points: impl Fn(&ParamPoint<T>) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        self.singular_points = Arc::new(points);
        self
    }

    pub fn evaluate(&self, x: T, a: &ParamPoint<T>) -> T {
        (self.eval)(x, a)
    }

    pub fn singular_points(&self, a: &ParamPoint<T>) -> Vec<T> {
        (self.singular_points)(a)
    }

    /// All required parameters present and finite. Parameter images under
    /// maps only need to pass this, not the admissibility constraints.
    pub fn check_evaluable(&self, a: &ParamPoint<T>) -> Result<()> {
        for name in &self.param_names {
            let v = a.require(name)?;
            if !v.is_finite() {
                return Err(Error::NonFiniteParameter { name: name.clone() });
            }
        }
        Ok(())
    }

    /// Evaluable and every admissibility constraint holds.
    pub fn check_admissible(&self, a: &ParamPoint<T>) -> Result<()> {
        self.check_evaluable(a)?;
        match self.constraints.iter().find(|c| !c.holds(a)) {
            Some(c) => Err(Error::Constraint {
                potential: self.id.clone(),
                predicate: c.description.clone(),
            }),
            None => Ok(()),
        }
    }

    pub fn is_admissible(&self, a: &ParamPoint<T>) -> bool {
        self.check_admissible(a).is_ok()
    }

    /// Samples `V(·, a)`; points within one spacing of a known singular point
    /// are masked.
    pub fn sample(&self, a: &ParamPoint<T>, grid: &Grid<T>) -> SampledFunction<T> {
        let poles = self.singular_points(a);
        let h = grid.spacing();
        let mut f = SampledFunction::from_fn(*grid, |x| self.evaluate(x, a));
        mask_near(&mut f, &poles, h);
        f
    }
}

impl<T: Real> fmt::Debug for ParametricPotential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricPotential")
            .field("id", &self.id)
            .field("formula", &self.formula)
            .field("domain", &self.domain)
            .finish()
    }
}

pub(crate) fn mask_near<T: Real>(f: &mut SampledFunction<T>, points: &[T], radius: T) {
    let grid = *f.grid();
    for &p in points {
        for i in 0..grid.len() {
            if (grid.x(i) - p).abs() < radius {
                f.mask_point(i);
            }
        }
    }
}

/// Superpotential `W(x, a)` with an optional closed-form `W'`.
#[derive(Clone)]
pub struct Superpotential<T> {
    pub description: String,
    eval: PointFn<T>,
    derivative: Option<PointFn<T>>,
}

impl<T: Real> Superpotential<T> {
    pub fn new(
        description: impl Into<String>,
        eval: impl Fn(T, &ParamPoint<T>) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            description: description.into(),
            eval: Arc::new(eval),
            derivative: None,
        }
    }

    pub fn with_derivative(
        mut self,
        derivative: impl Fn(T, &ParamPoint<T>) -> T + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn evaluate(&self, x: T, a: &ParamPoint<T>) -> T {
        (self.eval)(x, a)
    }

    pub fn derivative(&self, x: T, a: &ParamPoint<T>) -> Option<T> {
        self.derivative.as_ref().map(|d| d(x, a))
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn sample(&self, a: &ParamPoint<T>, grid: &Grid<T>) -> SampledFunction<T> {
        SampledFunction::from_fn(*grid, |x| self.evaluate(x, a))
    }

    /// Closed-form `W'` when available, otherwise a fourth-order finite
    /// difference of the samples.
    pub fn sample_derivative(&self, a: &ParamPoint<T>, grid: &Grid<T>) -> SampledFunction<T> {
        match &self.derivative {
            Some(d) => SampledFunction::from_fn(*grid, |x| d(x, a)),
            None => derivative_fourth_order(&self.sample(a, grid)),
        }
    }

    /// `x ↦ W(x, map(b))`.
    pub fn reparametrized(&self, description: String, map: &ParameterMap<T>) -> Self {
        let eval = Arc::clone(&self.eval);
        let m = map.clone();
        let derivative = self.derivative.as_ref().map(|d| {
            let d = Arc::clone(d);
            let m = map.clone();
            Arc::new(move |x: T, b: &ParamPoint<T>| d(x, &m.forward(b))) as PointFn<T>
        });
        Self {
            description,
            eval: Arc::new(move |x, b| eval(x, &m.forward(b))),
            derivative,
        }
    }
}

impl<T> fmt::Debug for Superpotential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Superpotential")
            .field("description", &self.description)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

/// Operator order of a factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    /// `H = A†A + d`, i.e. `V = W² − W' + d`.
    AdaggerA,
    /// `H = AA† + d`, i.e. `V = W² + W' + d`.
    AAdagger,
}

impl Order {
    /// `σ` in `V = W² − σW' + d`.
    pub fn sign<T: Real>(self) -> T {
        match self {
            Order::AdaggerA => T::one(),
            Order::AAdagger => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Order::AdaggerA => Order::AAdagger,
            Order::AAdagger => Order::AdaggerA,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Order::AdaggerA => "AdaggerA",
            Order::AAdagger => "AAdagger",
        }
    }
}

/// How the family constant `F` of the general Riccati solution is fixed.
///
/// With `μ' = 2σ W μ` and `P' = μ`, the linearized variable is
/// `v = (P + F) / μ`.
#[derive(Clone)]
pub enum FamilyGauge<T> {
    /// `μ(x0) = 1`, `P(x0) = 0` at the grid anchor, so `v(x0) = F`.
    Anchored,
    /// Closed-form `μ` and `P`, so `F` is independent of the grid anchor.
    ClosedForm { weight: PointFn<T>, primitive: PointFn<T> },
}

impl<T: Real> FamilyGauge<T> {
    /// `v(x0)` for a finite family constant.
    pub fn initial_value(&self, family_constant: T, x0: T, a: &ParamPoint<T>) -> T {
        match self {
            FamilyGauge::Anchored => family_constant,
            FamilyGauge::ClosedForm { weight, primitive } => {
                (primitive(x0, a) + family_constant) / weight(x0, a)
            }
        }
    }

    fn reparametrized(&self, map: &ParameterMap<T>) -> Self {
        match self {
            FamilyGauge::Anchored => FamilyGauge::Anchored,
            FamilyGauge::ClosedForm { weight, primitive } => {
                let (w, p) = (Arc::clone(weight), Arc::clone(primitive));
                let (m1, m2) = (map.clone(), map.clone());
                FamilyGauge::ClosedForm {
                    weight: Arc::new(move |x, b| w(x, &m1.forward(b))),
                    primitive: Arc::new(move |x, b| p(x, &m2.forward(b))),
                }
            }
        }
    }

    pub fn is_anchored(&self) -> bool {
        matches!(self, FamilyGauge::Anchored)
    }
}

impl<T> fmt::Debug for FamilyGauge<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyGauge::Anchored => f.write_str("Anchored"),
            FamilyGauge::ClosedForm { .. } => f.write_str("ClosedForm"),
        }
    }
}

/// A superpotential with its factorization energy and operator order.
#[derive(Clone)]
pub struct FactorizationPair<T> {
    pub label: String,
    pub potential_id: String,
    pub w: Superpotential<T>,
    pub energy_description: String,
    pub order: Order,
    pub gauge: FamilyGauge<T>,
    energy: ParamFn<T>,
}

impl<T: Real> FactorizationPair<T> {
    pub fn new(
        label: impl Into<String>,
        potential_id: impl Into<String>,
        w: Superpotential<T>,
        energy_description: impl Into<String>,
        energy: impl Fn(&ParamPoint<T>) -> T + Send + Sync + 'static,
        order: Order,
    ) -> Self {
        Self {
            label: label.into(),
            potential_id: potential_id.into(),
            w,
            energy_description: energy_description.into(),
            order,
            gauge: FamilyGauge::Anchored,
            energy: Arc::new(energy),
        }
    }

    pub fn with_gauge(mut self, gauge: FamilyGauge<T>) -> Self {
        self.gauge = gauge;
        self
    }

    /// Factorization energy `d(a)`.
    pub fn energy(&self, a: &ParamPoint<T>) -> T {
        (self.energy)(a)
    }

    pub fn sign(&self) -> T {
        self.order.sign()
    }

    /// `W² − σW' + d`, the potential this pair factorizes.
    pub fn potential_value(&self, x: T, a: &ParamPoint<T>) -> Result<T> {
        let w = self.w.evaluate(x, a);
        let dw = self
            .w
            .derivative(x, a)
            .ok_or_else(|| Error::MissingDerivative(self.label.clone()))?;
        Ok(w * w - self.sign() * dw + self.energy(a))
    }

    /// `W² + σW' + d`, the partner potential.
    pub fn partner_value(&self, x: T, a: &ParamPoint<T>) -> Result<T> {
        let w = self.w.evaluate(x, a);
        let dw = self
            .w
            .derivative(x, a)
            .ok_or_else(|| Error::MissingDerivative(self.label.clone()))?;
        Ok(w * w + self.sign() * dw + self.energy(a))
    }

    /// Partner potential on a grid (finite-difference `W'` when no closed
    /// form exists).
    pub fn sample_partner(&self, a: &ParamPoint<T>, grid: &Grid<T>) -> SampledFunction<T> {
        let w = self.w.sample(a, grid);
        let dw = self.w.sample_derivative(a, grid);
        let d = self.energy(a);
        let s = self.sign();
        w.zip_with(&dw, |w, dw| w * w + s * dw + d)
            .expect("samples share the grid")
    }

    /// `b ↦ (W(x, map(b)), d(map(b)))` with the same order.
    pub fn reparametrized(&self, label: String, map: &ParameterMap<T>) -> Self {
        let energy = Arc::clone(&self.energy);
        let m = map.clone();
        Self {
            label: label.clone(),
            potential_id: self.potential_id.clone(),
            w: self
                .w
                .reparametrized(format!("{} at {}", self.w.description, map.id), map),
            energy_description: format!("{} at {}", self.energy_description, map.id),
            order: self.order,
            gauge: self.gauge.reparametrized(map),
            energy: Arc::new(move |b| energy(&m.forward(b))),
        }
    }
}

impl<T> fmt::Debug for FactorizationPair<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FactorizationPair")
            .field("label", &self.label)
            .field("potential_id", &self.potential_id)
            .field("w", &self.w.description)
            .field("energy", &self.energy_description)
            .field("order", &self.order)
            .field("gauge", &self.gauge)
            .finish()
    }
}

/// Role of a parameter map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// `f` of a shape-invariance relation.
    ShapeMap,
    /// `g` leaving the potential unchanged.
    InvarianceMap,
}

/// `name ↦ scale · name + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineComponent<T> {
    pub scale: T,
    pub offset: T,
}

#[derive(Clone)]
enum MapRule<T> {
    Affine(Vec<(String, AffineComponent<T>)>),
    General {
        forward: MapFn<T>,
        inverse: MapFn<T>,
    },
}

/// Invertible transformation of parameter points. Parameters not mentioned
/// by an affine map pass through unchanged.
#[derive(Clone)]
pub struct ParameterMap<T> {
    pub id: String,
    pub kind: MapKind,
    rule: MapRule<T>,
}

impl<T: Real> ParameterMap<T> {
    /// Affine map acting on the listed parameters. Each scale must be nonzero.
    pub fn affine(id: impl Into<String>, kind: MapKind, components: &[(&str, f64, f64)]) -> Self {
        let comps = components
            .iter()
            .map(|&(name, scale, offset)| {
                assert!(scale != 0.0, "affine parameter map needs a nonzero scale");
                (
                    name.to_string(),
                    AffineComponent {
                        scale: T::lit(scale),
                        offset: T::lit(offset),
                    },
                )
            })
            .collect();
        Self {
            id: id.into(),
            kind,
            rule: MapRule::Affine(comps),
        }
    }

    pub fn identity(kind: MapKind) -> Self {
        Self {
            id: "identity".into(),
            kind,
            rule: MapRule::Affine(Vec::new()),
        }
    }

    /// Extension point for non-affine invertible maps.
    pub fn general(
        id: impl Into<String>,
        kind: MapKind,
        forward: impl Fn(&ParamPoint<T>) -> ParamPoint<T> + Send + Sync + 'static,
        inverse: impl Fn(&ParamPoint<T>) -> ParamPoint<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            id: id.into(),
            kind,
            rule: MapRule::General {
                forward: Arc::new(forward),
                inverse: Arc::new(inverse),
            },
        }
    }

    pub fn forward(&self, a: &ParamPoint<T>) -> ParamPoint<T> {
        match &self.rule {
            MapRule::Affine(comps) => comps.iter().fold(a.clone(), |acc, (name, c)| match acc.get(name) {
                Some(v) => acc.with(name, c.scale * v + c.offset),
                None => acc,
            }),
            MapRule::General { forward, .. } => forward(a),
        }
    }

    pub fn inverse(&self, a: &ParamPoint<T>) -> ParamPoint<T> {
        match &self.rule {
            MapRule::Affine(comps) => comps.iter().fold(a.clone(), |acc, (name, c)| match acc.get(name) {
                Some(v) => acc.with(name, (v - c.offset) / c.scale),
                None => acc,
            }),
            MapRule::General { inverse, .. } => inverse(a),
        }
    }

    /// `f^n(a)`.
    pub fn iterate(&self, a: &ParamPoint<T>, n: usize) -> ParamPoint<T> {
        (0..n).fold(a.clone(), |acc, _| self.forward(&acc))
    }

    /// The map `a ↦ inverse(a)` as a map in its own right.
    pub fn inverted(&self) -> Self {
        let id = format!("inverse of {}", self.id);
        match &self.rule {
            MapRule::Affine(comps) => Self {
                id,
                kind: self.kind,
                rule: MapRule::Affine(
                    comps
                        .iter()
                        .map(|(n, c)| {
                            (
                                n.clone(),
                                AffineComponent {
                                    scale: T::one() / c.scale,
                                    offset: -c.offset / c.scale,
                                },
                            )
                        })
                        .collect(),
                ),
            },
            MapRule::General { forward, inverse } => Self {
                id,
                kind: self.kind,
                rule: MapRule::General {
                    forward: Arc::clone(inverse),
                    inverse: Arc::clone(forward),
                },
            },
        }
    }
}

impl<T> fmt::Debug for ParameterMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParameterMap")
            .field("id", &self.id)
            .field("kind", &self.kind)
            .finish()
    }
}

/// Shape-invariance relation `Ṽ(x, a) = V(x, f(a)) + r_pot(f(a))` attached
/// to one factorization pair.
#[derive(Clone)]
pub struct ShapeInvarianceData<T> {
    pub pair_label: String,
    pub f: ParameterMap<T>,
    pub r_pot_description: String,
    /// `f(a)` leaves the admissible region; only the algebraic identity is
    /// meaningful (no ladder, no alternate factorization).
    pub algebraic_only: bool,
    r_pot: ParamFn<T>,
}

impl<T: Real> ShapeInvarianceData<T> {
    pub fn new(
        pair_label: impl Into<String>,
        f: ParameterMap<T>,
        r_pot_description: impl Into<String>,
        r_pot: impl Fn(&ParamPoint<T>) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            pair_label: pair_label.into(),
            f,
            r_pot_description: r_pot_description.into(),
            algebraic_only: false,
            r_pot: Arc::new(r_pot),
        }
    }

    pub fn algebraic_only(mut self) -> Self {
        self.algebraic_only = true;
        self
    }

    pub fn r_pot(&self, a: &ParamPoint<T>) -> T {
        (self.r_pot)(a)
    }
}

impl<T> fmt::Debug for ShapeInvarianceData<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShapeInvarianceData")
            .field("pair", &self.pair_label)
            .field("f", &self.f.id)
            .field("r_pot", &self.r_pot_description)
            .field("algebraic_only", &self.algebraic_only)
            .finish()
    }
}

/// Result of [`check_parameter_invariance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport<T> {
    pub max_dev: T,
    pub relative_dev: T,
    pub pass: bool,
}

/// Default relative tolerance for parameter invariance.
pub const INVARIANCE_TOL: f64 = 1e-10;

/// Checks `V(x, g(a)) = V(x, a)` pointwise on the grid.
///
/// `a` must be admissible; `g(a)` only needs to be evaluable, since the
/// shipped invariance maps send admissible points outside the physical
/// region (`λ ↦ 1 − λ` with `λ > 1`).
pub fn check_parameter_invariance<T: Real>(
    potential: &ParametricPotential<T>,
    g: &ParameterMap<T>,
    a: &ParamPoint<T>,
    grid: &Grid<T>,
) -> Result<InvarianceReport<T>> {
    potential.check_admissible(a)?;
    let b = g.forward(a);
    potential.check_evaluable(&b)?;
    let va = potential.sample(a, grid);
    let vb = potential.sample(&b, grid);
    let diff = va.zip_with(&vb, |x, y| (x - y).abs())?;
    if diff.valid_count() == 0 {
        return Err(Error::DegenerateGrid("every point masked".into()));
    }
    let max_dev = diff.max_abs();
    let relative_dev = max_dev / T::one().max(va.max_abs());
    Ok(InvarianceReport {
        max_dev,
        relative_dev,
        pass: relative_dev < T::lit(INVARIANCE_TOL),
    })
}

/// The pair `b ↦ (W(x, g(b)), d(g(b)))`, refused unless `V` is invariant
/// under `g` at `a`.
pub fn transport_factorization<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    g: &ParameterMap<T>,
    a: &ParamPoint<T>,
    grid: &Grid<T>,
) -> Result<FactorizationPair<T>> {
    let report = check_parameter_invariance(potential, g, a, grid)?;
    if !report.pass {
        return Err(Error::NotInvariant {
            potential: potential.id.clone(),
            map: g.id.clone(),
            max_dev: report.max_dev.as_f64(),
        });
    }
    Ok(pair.reparametrized(format!("{} ∘ {}", pair.label, g.id), g))
}

/// Reversed-order factorization from a shape-invariance relation:
/// `H(a) = A(f⁻¹(a)) A†(f⁻¹(a)) + d(f⁻¹(a)) − r_pot(a)`.
pub fn alternate_factorization_from_si<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    si: &ShapeInvarianceData<T>,
    a: &ParamPoint<T>,
) -> Result<FactorizationPair<T>> {
    potential.check_admissible(a)?;
    potential.check_admissible(&si.f.inverse(a))?;
    let inv = si.f.inverted();
    let moved = pair.reparametrized(String::new(), &inv);
    let energy = Arc::clone(&moved.energy);
    let r_pot = Arc::clone(&si.r_pot);
    Ok(FactorizationPair {
        label: format!("{} via {}", pair.label, inv.id),
        potential_id: pair.potential_id.clone(),
        w: Superpotential {
            description: format!("{} at {}", pair.w.description, inv.id),
            ..moved.w
        },
        energy_description: format!(
            "{} at {} − ({})",
            pair.energy_description, inv.id, si.r_pot_description
        ),
        order: pair.order.flipped(),
        gauge: FamilyGauge::Anchored,
        energy: Arc::new(move |b| energy(b) - r_pot(b)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centrifugal() -> ParametricPotential<f64> {
        ParametricPotential::new(
            "test-radial",
            "l(l+1)/r^2 + r^2",
            &["l"],
            Interval::positive_half_line(),
            |r, a| a["l"] * (a["l"] + 1.0) / (r * r) + r * r,
        )
        .with_singular_points(|_| vec![0.0])
    }

    fn grid() -> Grid<f64> {
        Grid::new(0.1, 5.0, 200).unwrap()
    }

    #[test]
    fn param_point_parse_and_lookup() {
        let a = ParamPoint::<f64>::parse("alpha=1, lambda=3.5").unwrap();
        assert_eq!(a["lambda"], 3.5);
        assert_eq!(a.to_string(), "alpha=1,lambda=3.5");
        assert!(ParamPoint::<f64>::parse("alpha=1,alpha=2").is_err());
        assert!(ParamPoint::<f64>::parse("alpha").is_err());
        assert!(ParamPoint::<f64>::parse("alpha=x").is_err());
        assert!(ParamPoint::<f64>::parse("alpha=inf").is_err());
    }

    #[test]
    fn affine_maps_invert() {
        let f = ParameterMap::<f64>::affine("l -> -l-1", MapKind::InvarianceMap, &[("l", -1.0, -1.0)]);
        let a = ParamPoint::from_pairs([("l", 2.0), ("m", 7.0)]).unwrap();
        let b = f.forward(&a);
        assert_eq!(b["l"], -3.0);
        assert_eq!(b["m"], 7.0);
        assert_eq!(f.inverse(&b), a);
        assert_eq!(f.forward(&b), a);
        assert_eq!(f.inverted().forward(&b), a);
    }

    #[test]
    fn invariance_of_centrifugal_term() {
        let v = centrifugal();
        let a = ParamPoint::from_pairs([("l", 2.0)]).unwrap();
        let g = ParameterMap::affine("l -> -l-1", MapKind::InvarianceMap, &[("l", -1.0, -1.0)]);
        let r = check_parameter_invariance(&v, &g, &a, &grid()).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_dev, 0.0);

        let shift = ParameterMap::affine("l -> l+1", MapKind::InvarianceMap, &[("l", 1.0, 1.0)]);
        let r = check_parameter_invariance(&v, &shift, &a, &grid()).unwrap();
        assert!(!r.pass);
        assert!(r.max_dev > 0.0);
    }

    #[test]
    fn constraint_errors_name_the_predicate() {
        let v = centrifugal().with_constraint("l >= 0", |a| a["l"] >= 0.0);
        let a = ParamPoint::from_pairs([("l", -2.0)]).unwrap();
        let g = ParameterMap::identity(MapKind::InvarianceMap);
        match check_parameter_invariance(&v, &g, &a, &grid()) {
            Err(Error::Constraint { predicate, .. }) => assert_eq!(predicate, "l >= 0"),
            other => panic!("unexpected {other:?}"),
        }
        let missing = ParamPoint::<f64>::empty();
        assert!(matches!(
            v.check_admissible(&missing),
            Err(Error::MissingParameter { .. })
        ));
    }

    #[test]
    fn transport_refuses_without_invariance() {
        let v = centrifugal();
        let pair = FactorizationPair::new(
            "p",
            "test-radial",
            Superpotential::new("l/r + r", |r, a: &ParamPoint<f64>| a["l"] / r + r),
            "-(2l-1)",
            |a| -(2.0 * a["l"] - 1.0),
            Order::AdaggerA,
        );
        let a = ParamPoint::from_pairs([("l", 2.0)]).unwrap();
        let shift = ParameterMap::affine("l -> l+1", MapKind::InvarianceMap, &[("l", 1.0, 1.0)]);
        assert!(matches!(
            transport_factorization(&v, &pair, &shift, &a, &grid()),
            Err(Error::NotInvariant { .. })
        ));
        let id = ParameterMap::identity(MapKind::InvarianceMap);
        let same = transport_factorization(&v, &pair, &id, &a, &grid()).unwrap();
        for x in [0.3, 1.0, 4.0] {
            assert_eq!(same.w.evaluate(x, &a), pair.w.evaluate(x, &a));
        }
        assert_eq!(same.energy(&a), pair.energy(&a));
    }

    #[test]
    fn point_masking_near_singularities() {
        let v = centrifugal();
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let s = v.sample(&ParamPoint::from_pairs([("l", 1.0)]).unwrap(), &g);
        assert!(s.is_masked(0));
        assert!(!s.is_masked(1));
    }
}
