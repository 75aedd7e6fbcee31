//! Shipped potential families with their factorizations, invariance maps and
//! shape-invariance data.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    alternate_factorization_from_si, check_parameter_invariance, transport_factorization,
    FactorizationPair, FamilyGauge, Interval, MapKind, Order, ParamPoint, ParameterMap,
    ParametricPotential, ShapeInvarianceData, Superpotential,
};
use crate::numgrid::{derivative_fourth_order, Grid, SampledFunction};
use crate::real::Real;
use crate::riccati::{riccati_residual, DerivativeSource};
use crate::shapeinv::si_residual_for;
use crate::spectra::{eigen_lowest, DiscretizedHamiltonian};

pub const RADIAL_OSCILLATOR: &str = "radial-oscillator";
pub const POSCHL_TELLER: &str = "poschl-teller";
pub const SPECIAL_FAMILY: &str = "special-family";
pub const HARMONIC_OSCILLATOR: &str = "harmonic-oscillator";
pub const ANHARMONIC_PROBE: &str = "anharmonic-probe";

/// Ids accepted by [`lookup`].
pub const IDS: [&str; 5] = [
    RADIAL_OSCILLATOR,
    POSCHL_TELLER,
    SPECIAL_FAMILY,
    HARMONIC_OSCILLATOR,
    ANHARMONIC_PROBE,
];

#[derive(Clone)]
pub struct CatalogEntry<T> {
    pub id: String,
    pub potential: ParametricPotential<T>,
    pub factorizations: Vec<FactorizationPair<T>>,
    pub invariance_maps: Vec<ParameterMap<T>>,
    pub si_data: Vec<ShapeInvarianceData<T>>,
    pub notes: String,
    pub default_grid: Grid<T>,
    pub default_params: ParamPoint<T>,
    /// Parameter points exercised by [`validate_all`].
    pub validation_params: Vec<ParamPoint<T>>,
}

impl<T: Real> CatalogEntry<T> {
    pub fn pair(&self, label: &str) -> Option<&FactorizationPair<T>> {
        self.factorizations.iter().find(|p| p.label == label)
    }

    pub fn require_pair(&self, label: &str) -> Result<&FactorizationPair<T>> {
        self.pair(label)
            .ok_or_else(|| Error::UnknownFactorization(label.to_string()))
    }

    pub fn si_for(&self, label: &str) -> Vec<&ShapeInvarianceData<T>> {
        self.si_data.iter().filter(|s| s.pair_label == label).collect()
    }
}

impl<T: Real> fmt::Debug for CatalogEntry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("factorizations", &self.factorizations.len())
            .field("invariance_maps", &self.invariance_maps.len())
            .field("si_data", &self.si_data.len())
            .finish()
    }
}

fn point<T: Real>(pairs: &[(&str, f64)]) -> ParamPoint<T> {
    ParamPoint::from_pairs(pairs.iter().map(|&(n, v)| (n, T::lit(v)))).expect("literal parameters")
}

/// `V(r, l) = l(l+1)/r² + r²` on `r > 0` with its four factorizations.
pub fn radial_oscillator<T: Real>() -> CatalogEntry<T> {
    let potential = ParametricPotential::new(
        RADIAL_OSCILLATOR,
        "l(l+1)/r^2 + r^2",
        &["l"],
        Interval::positive_half_line(),
        |r: T, a: &ParamPoint<T>| {
            let l = a["l"];
            l * (l + T::one()) / (r * r) + r * r
        },
    )
    .with_singular_points(|_| vec![T::zero()]);

    let one = T::one();
    let two = T::lit(2.0);
    let p1 = FactorizationPair::new(
        "l/r+r",
        RADIAL_OSCILLATOR,
        Superpotential::new("l/r + r", |r: T, a: &ParamPoint<T>| a["l"] / r + r)
            .with_derivative(move |r: T, a: &ParamPoint<T>| -a["l"] / (r * r) + one),
        "-(2l-1)",
        move |a: &ParamPoint<T>| -(two * a["l"] - one),
        Order::AdaggerA,
    );
    let g = ParameterMap::affine("l -> -l-1", MapKind::InvarianceMap, &[("l", -1.0, -1.0)]);
    let mut p2 = p1.reparametrized("-(l+1)/r+r".into(), &g);
    p2.w = Superpotential::new("-(l+1)/r + r", |r: T, a: &ParamPoint<T>| -(a["l"] + T::one()) / r + r)
        .with_derivative(move |r: T, a: &ParamPoint<T>| (a["l"] + one) / (r * r) + one);
    p2.energy_description = "2l+3".into();

    let down = ParameterMap::affine("l -> l-1", MapKind::ShapeMap, &[("l", 1.0, -1.0)]);
    let up = ParameterMap::affine("l -> l+1", MapKind::ShapeMap, &[("l", 1.0, 1.0)]);
    let si1 = ShapeInvarianceData::new("l/r+r", down.clone(), "2", move |_| two);
    let si2 = ShapeInvarianceData::new("-(l+1)/r+r", up.clone(), "2", move |_| two);

    let seed = point::<T>(&[("l", 2.0)]);
    let mut p3 = alternate_factorization_from_si(&potential, &p1, &si1, &seed)
        .expect("oscillator seed point is admissible");
    p3.label = "(l+1)/r+r".into();
    p3.w = Superpotential::new("(l+1)/r + r", |r: T, a: &ParamPoint<T>| (a["l"] + T::one()) / r + r)
        .with_derivative(move |r: T, a: &ParamPoint<T>| -(a["l"] + one) / (r * r) + one);
    p3.energy_description = "-(2l+3)".into();
    let mut p4 = alternate_factorization_from_si(&potential, &p2, &si2, &seed)
        .expect("oscillator seed point is admissible");
    p4.label = "-l/r+r".into();
    p4.w = Superpotential::new("-l/r + r", |r: T, a: &ParamPoint<T>| -a["l"] / r + r)
        .with_derivative(move |r: T, a: &ParamPoint<T>| a["l"] / (r * r) + one);
    p4.energy_description = "2l-1".into();

    let si3 = ShapeInvarianceData::new("(l+1)/r+r", up, "-2", move |_| -two);
    let si4 = ShapeInvarianceData::new("-l/r+r", down, "-2", move |_| -two);

    let grid = Grid::new(T::lit(1.2e-3), T::lit(12.0), 4001)
        .expect("static grid")
        .with_anchor_near(T::one());

    CatalogEntry {
        id: RADIAL_OSCILLATOR.into(),
        potential,
        factorizations: vec![p1, p2, p3, p4],
        invariance_maps: vec![g],
        si_data: vec![si1, si2, si3, si4],
        notes: "Isotropic oscillator with centrifugal barrier. The pair at l -> -l-1 \
                is the transport of l/r+r; the reversed-order pairs come from the \
                shape-invariance relations with r_pot = 2."
            .into(),
        default_grid: grid,
        default_params: point(&[("l", 1.0)]),
        validation_params: vec![point(&[("l", 1.0)]), point(&[("l", 2.0)]), point(&[("l", 3.0)])],
    }
}

/// `V(x, α, λ) = −α²λ(λ−1) sech²(αx)` with `α > 0`, `λ > 1`.
pub fn poschl_teller<T: Real>() -> CatalogEntry<T> {
    let potential = ParametricPotential::new(
        POSCHL_TELLER,
        "-alpha^2 lambda(lambda-1) sech^2(alpha x)",
        &["alpha", "lambda"],
        Interval::real_line(),
        |x: T, a: &ParamPoint<T>| {
            let (al, la) = (a["alpha"], a["lambda"]);
            let s = T::one() / (al * x).cosh();
            -al * al * la * (la - T::one()) * s * s
        },
    )
    .with_constraint("alpha > 0", |a| a["alpha"] > T::zero())
    .with_constraint("lambda > 1", |a| a["lambda"] > T::one());

    let w1 = FactorizationPair::new(
        "W1",
        POSCHL_TELLER,
        Superpotential::new("-lambda alpha tanh(alpha x)", |x: T, a: &ParamPoint<T>| {
            let al = a["alpha"];
            -a["lambda"] * al * (al * x).tanh()
        })
        .with_derivative(|x: T, a: &ParamPoint<T>| {
            let al = a["alpha"];
            let s = T::one() / (al * x).cosh();
            -a["lambda"] * al * al * s * s
        }),
        "-lambda^2 alpha^2",
        |a: &ParamPoint<T>| {
            let (al, la) = (a["alpha"], a["lambda"]);
            -la * la * al * al
        },
        Order::AdaggerA,
    );
    let g = ParameterMap::affine(
        "(alpha,lambda) -> (alpha,1-lambda)",
        MapKind::InvarianceMap,
        &[("lambda", -1.0, 1.0)],
    );
    let w2 = FactorizationPair::new(
        "W2",
        POSCHL_TELLER,
        Superpotential::new("(lambda-1) alpha tanh(alpha x)", |x: T, a: &ParamPoint<T>| {
            let al = a["alpha"];
            (a["lambda"] - T::one()) * al * (al * x).tanh()
        })
        .with_derivative(|x: T, a: &ParamPoint<T>| {
            let al = a["alpha"];
            let s = T::one() / (al * x).cosh();
            (a["lambda"] - T::one()) * al * al * s * s
        }),
        "-(1-lambda)^2 alpha^2",
        |a: &ParamPoint<T>| {
            let (al, la) = (a["alpha"], a["lambda"]);
            let m = T::one() - la;
            -m * m * al * al
        },
        Order::AdaggerA,
    );
    let zero = |_: &ParamPoint<T>| T::zero();
    let si = vec![
        ShapeInvarianceData::new(
            "W1",
            ParameterMap::affine("lambda -> lambda+1", MapKind::ShapeMap, &[("lambda", 1.0, 1.0)]),
            "0",
            zero,
        ),
        ShapeInvarianceData::new(
            "W1",
            ParameterMap::affine("lambda -> -lambda", MapKind::ShapeMap, &[("lambda", -1.0, 0.0)]),
            "0",
            zero,
        )
        .algebraic_only(),
        ShapeInvarianceData::new(
            "W2",
            ParameterMap::affine("lambda -> lambda-1", MapKind::ShapeMap, &[("lambda", 1.0, -1.0)]),
            "0",
            zero,
        ),
        ShapeInvarianceData::new(
            "W2",
            ParameterMap::affine("lambda -> 2-lambda", MapKind::ShapeMap, &[("lambda", -1.0, 2.0)]),
            "0",
            zero,
        )
        .algebraic_only(),
    ];

    CatalogEntry {
        id: POSCHL_TELLER.into(),
        potential,
        factorizations: vec![w1, w2],
        invariance_maps: vec![g],
        si_data: si,
        notes: "Modified Poschl-Teller well. W2 is W1 transported along \
                lambda -> 1-lambda. The reflected shape maps leave lambda > 1 and \
                are checked algebraically only."
            .into(),
        default_grid: Grid::new(T::lit(-12.0), T::lit(12.0), 3001)
            .expect("static grid")
            .with_anchor_near(T::zero()),
        default_params: point(&[("alpha", 1.0), ("lambda", 4.0)]),
        validation_params: vec![
            point(&[("alpha", 1.0), ("lambda", 4.0)]),
            point(&[("alpha", 1.0), ("lambda", 3.0)]),
            point(&[("alpha", 0.7), ("lambda", 2.5)]),
        ],
    }
}

/// `W_p(x, k, l) = (2k/(kx+l) − (kx+l))/4`, the only superpotential whose
/// family member at `F = 0` has a constant gap derivative. `d = 0`; any
/// constant shift of `V` is equivalent.
pub fn special_family<T: Real>() -> CatalogEntry<T> {
    let u = |x: T, a: &ParamPoint<T>| a["k"] * x + a["l"];
    let quarter = T::lit(0.25);
    let potential = ParametricPotential::new(
        SPECIAL_FAMILY,
        "(kx+l)^2/16 + 3k^2/(4(kx+l)^2)",
        &["k", "l"],
        Interval::real_line(),
        move |x: T, a: &ParamPoint<T>| {
            let (k, u) = (a["k"], u(x, a));
            u * u / T::lit(16.0) + T::lit(3.0) * k * k / (T::lit(4.0) * u * u)
        },
    )
    .with_constraint("k != 0", |a| a["k"] != T::zero())
    .with_singular_points(|a| {
        if a["k"] == T::zero() {
            Vec::new()
        } else {
            vec![-a["l"] / a["k"]]
        }
    });

    let two = T::lit(2.0);
    let pair = FactorizationPair::new(
        "W_p",
        SPECIAL_FAMILY,
        Superpotential::new("(2k/(kx+l) - (kx+l))/4", move |x: T, a: &ParamPoint<T>| {
            let u = u(x, a);
            quarter * (two * a["k"] / u - u)
        })
        .with_derivative(move |x: T, a: &ParamPoint<T>| {
            let (k, u) = (a["k"], u(x, a));
            -quarter * (two * k * k / (u * u) + k)
        }),
        "0",
        |_| T::zero(),
        Order::AdaggerA,
    )
    .with_gauge(FamilyGauge::ClosedForm {
        weight: std::sync::Arc::new(move |x: T, a: &ParamPoint<T>| {
            let u = u(x, a);
            u * (-u * u / (T::lit(4.0) * a["k"])).exp()
        }),
        primitive: std::sync::Arc::new(move |x: T, a: &ParamPoint<T>| {
            let u = u(x, a);
            -two * (-u * u / (T::lit(4.0) * a["k"])).exp()
        }),
    });
    let g = ParameterMap::affine(
        "(k,l) -> (-k,-l)",
        MapKind::InvarianceMap,
        &[("k", -1.0, 0.0), ("l", -1.0, 0.0)],
    );

    CatalogEntry {
        id: SPECIAL_FAMILY.into(),
        potential,
        factorizations: vec![pair],
        invariance_maps: vec![g],
        si_data: Vec::new(),
        notes: "Family constant F is measured in the closed-form gauge \
                v = (P + F)/mu with mu = u exp(-u^2/4k), P = -2 exp(-u^2/4k), u = kx+l, \
                so F = 0 is the member with gap = u/2. k = 0 is the constant case. \
                The default grid is anchored at its right end, where the linearized \
                equation is stable when marching towards smaller x."
            .into(),
        default_grid: Grid::new(T::lit(0.2), T::lit(6.0), 2001)
            .expect("static grid")
            .with_anchor_near(T::lit(6.0)),
        default_params: point(&[("k", 1.0), ("l", 0.0)]),
        validation_params: vec![point(&[("k", 1.0), ("l", 0.0)]), point(&[("k", 2.0), ("l", 1.0)])],
    }
}

/// `V = ω²x²` with `W = ωx` in both operator orders.
pub fn harmonic_oscillator<T: Real>() -> CatalogEntry<T> {
    let potential = ParametricPotential::new(
        HARMONIC_OSCILLATOR,
        "omega^2 x^2",
        &["omega"],
        Interval::real_line(),
        |x: T, a: &ParamPoint<T>| {
            let w = a["omega"];
            w * w * x * x
        },
    )
    .with_constraint("omega > 0", |a| a["omega"] > T::zero());
    let w = || {
        Superpotential::new("omega x", |x: T, a: &ParamPoint<T>| a["omega"] * x)
            .with_derivative(|_, a: &ParamPoint<T>| a["omega"])
    };
    let lower = FactorizationPair::new(
        "omega x",
        HARMONIC_OSCILLATOR,
        w(),
        "omega",
        |a: &ParamPoint<T>| a["omega"],
        Order::AdaggerA,
    );
    let upper = FactorizationPair::new(
        "omega x reversed",
        HARMONIC_OSCILLATOR,
        w(),
        "-omega",
        |a: &ParamPoint<T>| -a["omega"],
        Order::AAdagger,
    );
    let two = T::lit(2.0);
    let si = vec![
        ShapeInvarianceData::new(
            "omega x",
            ParameterMap::identity(MapKind::ShapeMap),
            "2 omega",
            move |a: &ParamPoint<T>| two * a["omega"],
        ),
        ShapeInvarianceData::new(
            "omega x reversed",
            ParameterMap::identity(MapKind::ShapeMap),
            "-2 omega",
            move |a: &ParamPoint<T>| -two * a["omega"],
        ),
    ];
    CatalogEntry {
        id: HARMONIC_OSCILLATOR.into(),
        potential,
        factorizations: vec![lower, upper],
        invariance_maps: vec![ParameterMap::affine(
            "omega -> omega",
            MapKind::InvarianceMap,
            &[("omega", 1.0, 0.0)],
        )],
        si_data: si,
        notes: "One-dimensional oscillator; shape invariant under the identity map.".into(),
        default_grid: Grid::new(T::lit(-10.0), T::lit(10.0), 4001)
            .expect("static grid")
            .with_anchor_near(T::zero()),
        default_params: point(&[("omega", 1.0)]),
        validation_params: vec![point(&[("omega", 1.0)]), point(&[("omega", 2.0)])],
    }
}

/// Fitted-table superpotential: piecewise cubic Lagrange interpolation.
struct Table<T> {
    x0: T,
    h: T,
    values: Vec<T>,
}

impl<T: Real> Table<T> {
    fn eval(&self, x: T) -> T {
        let n = self.values.len();
        let s = (x - self.x0) / self.h;
        if !(s >= T::zero() && s <= T::from_index(n - 1)) {
            return T::nan();
        }
        let i = s.floor().to_usize().unwrap_or(0).clamp(1, n - 3);
        let t = s - T::from_index(i);
        let (ym, y0, y1, y2) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        let one = T::one();
        let two = T::lit(2.0);
        let six = T::lit(6.0);
        -t * (t - one) * (t - two) / six * ym + (t + one) * (t - one) * (t - two) / two * y0
            - (t + one) * t * (t - two) / two * y1
            + (t + one) * t * (t - one) / six * y2
    }
}

/// `V = x² + 0.1x⁴` with `W = −ψ0'/ψ0` fitted from the numerical ground
/// state. Not shape invariant; used as a negative control.
pub fn anharmonic_probe<T: Real>() -> CatalogEntry<T> {
    let potential = ParametricPotential::new(
        ANHARMONIC_PROBE,
        "x^2 + g x^4",
        &["g"],
        Interval::real_line(),
        |x: T, a: &ParamPoint<T>| x * x + a["g"] * x * x * x * x,
    )
    .with_constraint("g >= 0", |a| a["g"] >= T::zero());
    let a0 = point::<T>(&[("g", 0.1)]);
    let solve_grid = Grid::new(T::lit(-8.0), T::lit(8.0), 4001).expect("static grid");
    let h = DiscretizedHamiltonian::discretize(&potential, &a0, &solve_grid).expect("finite potential");
    let ground = eigen_lowest(&h, 1).expect("one eigenpair");
    let e0 = ground.eigenvalues[0];
    let psi = &ground.eigenvectors[0];
    let lo = solve_grid.index_near(T::lit(-6.0));
    let hi = solve_grid.index_near(T::lit(6.0));
    let log_values: Vec<T> = psi.values().iter().map(|p| p.abs().ln()).collect();
    let log_psi = SampledFunction::from_values(solve_grid, log_values).expect("same grid");
    let dlog = derivative_fourth_order(&log_psi);
    let table = Table {
        x0: solve_grid.x(lo),
        h: solve_grid.spacing(),
        values: (lo..=hi).map(|i| -dlog.values()[i]).collect(),
    };
    let table = std::sync::Arc::new(table);
    let pair = FactorizationPair::new(
        "fitted",
        ANHARMONIC_PROBE,
        Superpotential::new("-psi0'/psi0 (fitted at g = 0.1)", move |x: T, _: &ParamPoint<T>| table.eval(x)),
        "E0 (fitted at g = 0.1)",
        move |_| e0,
        Order::AdaggerA,
    );
    CatalogEntry {
        id: ANHARMONIC_PROBE.into(),
        potential,
        factorizations: vec![pair],
        invariance_maps: Vec::new(),
        si_data: vec![ShapeInvarianceData::new(
            "fitted",
            ParameterMap::identity(MapKind::ShapeMap),
            "unknown",
            |_| T::zero(),
        )],
        notes: "Negative control: the superpotential is a numerical fit valid for g = 0.1 only.".into(),
        default_grid: Grid::new(T::lit(-4.0), T::lit(4.0), 1601)
            .expect("static grid")
            .with_anchor_near(T::zero()),
        default_params: a0,
        validation_params: Vec::new(),
    }
}

pub fn lookup<T: Real>(id: &str) -> Result<CatalogEntry<T>> {
    match id {
        RADIAL_OSCILLATOR => Ok(radial_oscillator()),
        POSCHL_TELLER => Ok(poschl_teller()),
        SPECIAL_FAMILY => Ok(special_family()),
        HARMONIC_OSCILLATOR => Ok(harmonic_oscillator()),
        ANHARMONIC_PROBE => Ok(anharmonic_probe()),
        _ => Err(Error::UnknownEntry {
            id: id.to_string(),
            known: IDS.join(", "),
        }),
    }
}

/// How a factorization in [`enumerate_factorizations`] was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Shipped,
    Transport { map: String },
    ShapeInvariance { map: String },
}

#[derive(Debug, Clone)]
pub struct DerivedFactorization<T> {
    pub pair: FactorizationPair<T>,
    pub origin: Origin,
    pub energy: T,
    pub residual_max: T,
    pub residual_relative: T,
    pub valid: bool,
}

/// Shipped pairs plus every transport along an invariance map and every
/// reversed-order pair from shape-invariance data, each validated at `a`.
/// Derived pairs duplicating a shipped one (same `W` and `d` on the grid)
/// are dropped.
pub fn enumerate_factorizations<T: Real>(
    entry: &CatalogEntry<T>,
    a: &ParamPoint<T>,
    grid: &Grid<T>,
) -> Result<Vec<DerivedFactorization<T>>> {
    entry.potential.check_admissible(a)?;
    let mut candidates: Vec<(FactorizationPair<T>, Origin)> = entry
        .factorizations
        .iter()
        .map(|p| (p.clone(), Origin::Shipped))
        .collect();
    for g in &entry.invariance_maps {
        for p in &entry.factorizations {
            if let Ok(t) = transport_factorization(&entry.potential, p, g, a, grid) {
                candidates.push((t, Origin::Transport { map: g.id.clone() }));
            }
        }
    }
    for si in entry.si_data.iter().filter(|s| !s.algebraic_only) {
        if let Some(p) = entry.pair(&si.pair_label) {
            if let Ok(alt) = alternate_factorization_from_si(&entry.potential, p, si, a) {
                candidates.push((alt, Origin::ShapeInvariance { map: si.f.id.clone() }));
            }
        }
    }

    let mut out: Vec<DerivedFactorization<T>> = Vec::new();
    for (pair, origin) in candidates {
        if origin != Origin::Shipped && out.iter().any(|o| same_pair(&o.pair, &pair, a, grid)) {
            continue;
        }
        let report = riccati_residual(&entry.potential, &pair, a, grid)?;
        out.push(DerivedFactorization {
            energy: pair.energy(a),
            residual_max: report.max_abs,
            residual_relative: report.relative(),
            valid: report.passes_default(),
            pair,
            origin,
        });
    }
    Ok(out)
}

fn same_pair<T: Real>(p: &FactorizationPair<T>, q: &FactorizationPair<T>, a: &ParamPoint<T>, grid: &Grid<T>) -> bool {
    if p.order != q.order {
        return false;
    }
    let tol = T::lit(1e-12);
    let scale = |x: T, y: T| tol * T::one().max(x.abs().max(y.abs()));
    let (dp, dq) = (p.energy(a), q.energy(a));
    if (dp - dq).abs() > scale(dp, dq) {
        return false;
    }
    grid.points().all(|x| {
        let (wp, wq) = (p.w.evaluate(x, a), q.w.evaluate(x, a));
        !(wp.is_finite() && wq.is_finite()) || (wp - wq).abs() <= scale(wp, wq)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub entry: String,
    pub check: String,
    pub params: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub outcomes: Vec<CheckOutcome>,
}

impl ValidationSummary {
    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.pass)
    }
}

/// Runs every entry invariant on the entry's validation parameters and
/// default grid: factorization residuals, invariance maps and
/// shape-invariance relations. The fitted probe is excluded.
pub fn validate_all() -> ValidationSummary {
    let entries: Vec<CatalogEntry<f64>> = vec![
        radial_oscillator(),
        poschl_teller(),
        special_family(),
        harmonic_oscillator(),
    ];
    let mut outcomes = Vec::new();
    for e in &entries {
        outcomes.extend(validate_entry(e));
    }
    ValidationSummary { outcomes }
}

pub fn validate_entry<T: Real>(e: &CatalogEntry<T>) -> Vec<CheckOutcome> {
    let mut outcomes = Vec::new();
    let grid = e.default_grid;
    let mut record = |check: String, a: &ParamPoint<T>, result: Result<(bool, String)>| {
        let (pass, detail) = result.unwrap_or_else(|err| (false, err.to_string()));
        outcomes.push(CheckOutcome {
            entry: e.id.clone(),
            check,
            params: a.to_string(),
            pass,
            detail,
        });
    };
    for a in &e.validation_params {
        for p in &e.factorizations {
            let r = riccati_residual(&e.potential, p, a, &grid).map(|r| {
                (
                    r.passes_default() && r.derivative == DerivativeSource::Analytic,
                    format!("relative residual {:e}", r.relative().as_f64()),
                )
            });
            record(format!("residual {}", p.label), a, r);
        }
        for g in &e.invariance_maps {
            let r = check_parameter_invariance(&e.potential, g, a, &grid)
                .map(|r| (r.pass, format!("relative deviation {:e}", r.relative_dev.as_f64())));
            record(format!("invariance {}", g.id), a, r);
        }
        for si in &e.si_data {
            let r = e.require_pair(&si.pair_label).and_then(|p| {
                let rep = si_residual_for(&e.potential, p, si, a, &grid)?;
                let r_pot = si.r_pot(&si.f.forward(a));
                let scale = T::lit(1e-8) * rep.scale;
                let ok = rep.pass
                    && (rep.r_pot_constant - r_pot).abs() <= scale
                    && rep.reconciliation_gap <= scale;
                Ok((
                    ok,
                    format!(
                        "flatness {:e}/{:e}, r_pot {} (expected {})",
                        rep.w_flatness.as_f64(),
                        rep.r_pot_flatness.as_f64(),
                        rep.r_pot_constant.as_f64(),
                        r_pot.as_f64()
                    ),
                ))
            });
            record(format!("shape invariance {} under {}", si.pair_label, si.f.id), a, r);
        }
    }
    outcomes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_id() {
        for id in IDS {
            assert_eq!(lookup::<f64>(id).unwrap().id, id);
        }
        match lookup::<f64>("nosuch") {
            Err(Error::UnknownEntry { known, .. }) => assert!(known.contains(POSCHL_TELLER)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn catalog_validates() {
        let s = validate_all();
        let failures: Vec<_> = s.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }

    #[test]
    fn oscillator_partner_closed_form() {
        let e = radial_oscillator::<f64>();
        let p = e.pair("l/r+r").unwrap();
        let a = point::<f64>(&[("l", 2.0)]);
        for r in [0.1, 0.5, 2.0, 7.0] {
            let want = 2.0 / (r * r) + r * r + 2.0;
            assert!((p.partner_value(r, &a).unwrap() - want).abs() < 1e-10);
        }
        let g = &e.invariance_maps[0];
        assert_eq!(g.forward(&g.forward(&a)), a);
    }

    #[test]
    fn four_oscillator_factorizations() {
        let e = radial_oscillator::<f64>();
        let a = point::<f64>(&[("l", 2.0)]);
        let all = enumerate_factorizations(&e, &a, &e.default_grid).unwrap();
        assert_eq!(all.len(), 4, "{:?}", all.iter().map(|d| &d.pair.label).collect::<Vec<_>>());
        assert!(all.iter().all(|d| d.valid));
    }

    #[test]
    fn poschl_teller_transport_is_exact() {
        let e = poschl_teller::<f64>();
        let a = point::<f64>(&[("alpha", 1.0), ("lambda", 4.0)]);
        let t = transport_factorization(&e.potential, &e.factorizations[0], &e.invariance_maps[0], &a, &e.default_grid)
            .unwrap();
        let w2 = &e.factorizations[1];
        for x in e.default_grid.points() {
            assert_eq!(t.w.evaluate(x, &a), w2.w.evaluate(x, &a));
        }
        assert_eq!(t.energy(&a), w2.energy(&a));
    }

    #[test]
    fn poschl_teller_rejects_small_lambda() {
        let e = poschl_teller::<f64>();
        let a = point::<f64>(&[("alpha", 1.0), ("lambda", 0.5)]);
        assert!(matches!(
            e.potential.check_admissible(&a),
            Err(Error::Constraint { predicate, .. }) if predicate == "lambda > 1"
        ));
    }
}
