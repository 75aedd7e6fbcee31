//! Spectral checks on a finite-difference Hamiltonian: low eigenvalues,
//! isospectrality of partners, annihilation of the ground state and the
//! ladder operators `A`, `A†`.

mod tridiag;

pub use tridiag::{SymTridiagonal, BISECTION_REL_TOL};

use crate::error::{Error, Result};
use crate::model::{FactorizationPair, Interval, ParamPoint, ParametricPotential, Superpotential};
use crate::numgrid::{derivative, derivative_fourth_order, integrate_linear_ode_with, Grid, SampledFunction};
use crate::real::Real;

/// Matching tolerance for partner spectra. Discretization error of the
/// three-point Laplacian dominates the solver accuracy.
pub const ISOSPECTRAL_TOL: f64 = 2e-3;
/// `‖Aψ0‖ / ‖ψ0‖` below this counts as annihilated.
pub const ANNIHILATION_TOL: f64 = 1e-6;
/// Boundary decay `ψ0 / max ψ0` required for normalizability.
pub const DECAY_TOL: f64 = 1e-8;
/// RK4 substeps per grid interval when integrating `log ψ0`.
const LOG_SUBSTEPS: usize = 8;

/// `−d²/dx² + V` on the interior points of a grid with Dirichlet ends.
#[derive(Debug, Clone)]
pub struct DiscretizedHamiltonian<T> {
    grid: Grid<T>,
    matrix: SymTridiagonal<T>,
}

impl<T: Real> DiscretizedHamiltonian<T> {
    /// Samples `V(·, a)`. Singular points of `V` must lie outside the
    /// closed grid interval.
    pub fn discretize(
        potential: &ParametricPotential<T>,
        a: &ParamPoint<T>,
        grid: &Grid<T>,
    ) -> Result<Self> {
        potential.check_evaluable(a)?;
        if let Some(p) = potential
            .singular_points(a)
            .into_iter()
            .find(|&p| p >= grid.x_lo() && p <= grid.x_hi())
        {
            return Err(Error::SingularPointInGrid { point: p.as_f64() });
        }
        Self::from_samples(&SampledFunction::from_fn(*grid, |x| potential.evaluate(x, a)))
    }

    /// From sampled potential values; end values are unused.
    pub fn from_samples(v: &SampledFunction<T>) -> Result<Self> {
        let grid = *v.grid();
        let n = grid.len();
        let bad = (1..n - 1)
            .filter(|&i| v.value(i).is_none_or(|x| !x.is_finite()))
            .count();
        if bad > 0 {
            return Err(Error::PartnerIrregular { count: bad });
        }
        let h = grid.spacing();
        let inv_h2 = T::one() / (h * h);
        let two = T::lit(2.0);
        let diag = (1..n - 1).map(|i| two * inv_h2 + v.values()[i]).collect();
        let off = vec![-inv_h2; n - 3];
        Ok(Self {
            grid,
            matrix: SymTridiagonal::new(diag, off),
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn matrix(&self) -> &SymTridiagonal<T> {
        &self.matrix
    }

    /// Largest admissible `k` for [`eigen_lowest`].
    pub fn max_request(&self) -> usize {
        self.grid.len() / 4
    }

    /// `Hψ` at the interior points for a full-grid `ψ` (the end values act
    /// as boundary data).
    pub fn apply(&self, psi: &SampledFunction<T>) -> Vec<T> {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let inv_h2 = T::one() / (h * h);
        let d = self.matrix.diagonal();
        let p = psi.values();
        (1..n - 1)
            .map(|i| d[i - 1] * p[i] - inv_h2 * (p[i - 1] + p[i + 1]))
            .collect()
    }
}

/// Lowest eigenpairs in ascending order. Eigenvectors are full-grid samples
/// (zero at both ends) with unit continuous norm and positive largest lobe.
#[derive(Debug, Clone)]
pub struct SpectrumResult<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<SampledFunction<T>>,
    /// `‖Hψ − Eψ‖ / ‖ψ‖` per pair.
    pub residuals: Vec<T>,
}

pub fn eigen_lowest<T: Real>(h: &DiscretizedHamiltonian<T>, k: usize) -> Result<SpectrumResult<T>> {
    let max = h.max_request();
    if k == 0 || k > max {
        return Err(Error::EigenRequest { k, max });
    }
    let m = h.matrix();
    let mut found: Vec<(T, Vec<T>)> = Vec::with_capacity(k);
    for i in 0..k {
        let e = m.eigenvalue(i)?;
        let v = m.eigenvector(e, &found);
        found.push((e, v));
    }
    let grid = *h.grid();
    let scale = T::one() / grid.spacing().sqrt();
    let mut out = SpectrumResult {
        eigenvalues: Vec::with_capacity(k),
        eigenvectors: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
    };
    for (e, v) in found {
        out.residuals.push(m.residual(e, &v));
        let peak = v.iter().fold(T::zero(), |p, x| if x.abs() > p.abs() { *x } else { p });
        let sign = if peak < T::zero() { -T::one() } else { T::one() };
        let mut values = Vec::with_capacity(grid.len());
        values.push(T::zero());
        values.extend(v.iter().map(|x| sign * scale * *x));
        values.push(T::zero());
        out.eigenvalues.push(e);
        out.eigenvectors.push(SampledFunction::from_values(grid, values)?);
    }
    Ok(out)
}

/// Comparison of the low spectra of `V` and of `Ṽ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsospectralReport<T> {
    pub spectrum_v: Vec<T>,
    pub spectrum_partner: Vec<T>,
    /// `(index in spectrum_v, index in spectrum_partner, |ΔE|)`.
    pub matched: Vec<(usize, usize, T)>,
    /// Partner levels below every matched level: `Ṽ` binds a state that `V`
    /// lacks.
    pub unmatched_partner: Vec<T>,
    /// Levels of `V` below every matched level.
    pub unmatched_v: Vec<T>,
    /// Levels above the other list's top that have no counterpart in
    /// the computed window.
    pub window_spill: Vec<T>,
    /// Other unmatched levels, which break isospectrality.
    pub stray: Vec<T>,
    pub ground_state_missing_in: Option<Side>,
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Potential,
    Partner,
}

pub fn isospectral_check<T: Real>(
    potential: &ParametricPotential<T>,
    partner: &SampledFunction<T>,
    a: &ParamPoint<T>,
    k: usize,
) -> Result<IsospectralReport<T>> {
    isospectral_check_with_tol(potential, partner, a, k, T::lit(ISOSPECTRAL_TOL))
}

pub fn isospectral_check_with_tol<T: Real>(
    potential: &ParametricPotential<T>,
    partner: &SampledFunction<T>,
    a: &ParamPoint<T>,
    k: usize,
    tol: T,
) -> Result<IsospectralReport<T>> {
    let grid = *partner.grid();
    let hv = DiscretizedHamiltonian::discretize(potential, a, &grid)?;
    let hp = DiscretizedHamiltonian::from_samples(partner)?;
    let sv = eigen_lowest(&hv, k)?.eigenvalues;
    let sp = eigen_lowest(&hp, k)?.eigenvalues;
    Ok(match_spectra(sv, sp, tol))
}

/// Greedy ascending matching with a relative tolerance `tol · max(1, |E|)`.
pub fn match_spectra<T: Real>(sv: Vec<T>, sp: Vec<T>, tol: T) -> IsospectralReport<T> {
    let close = |x: T, y: T| (x - y).abs() <= tol * T::one().max(x.abs().max(y.abs()));
    let mut used_p = vec![false; sp.len()];
    let mut matched = Vec::new();
    for (i, &e) in sv.iter().enumerate() {
        let best = sp
            .iter()
            .enumerate()
            .filter(|(j, &f)| !used_p[*j] && close(e, f))
            .min_by(|(_, x), (_, y)| {
                (**x - e).abs().partial_cmp(&(**y - e).abs()).unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(j, _)| j);
        if let Some(j) = best {
            used_p[j] = true;
            matched.push((i, j, (sp[j] - e).abs()));
        }
    }
    let used_v: Vec<bool> = (0..sv.len()).map(|i| matched.iter().any(|m| m.0 == i)).collect();
    let low_v = matched.iter().map(|m| sv[m.0]).fold(T::infinity(), T::min);
    let low_p = matched.iter().map(|m| sp[m.1]).fold(T::infinity(), T::min);
    let top_v = sv.last().copied().unwrap_or_else(T::neg_infinity);
    let top_p = sp.last().copied().unwrap_or_else(T::neg_infinity);

    let mut report = IsospectralReport {
        spectrum_v: sv.clone(),
        spectrum_partner: sp.clone(),
        matched,
        unmatched_partner: Vec::new(),
        unmatched_v: Vec::new(),
        window_spill: Vec::new(),
        stray: Vec::new(),
        ground_state_missing_in: None,
        consistent: true,
    };
    for (_, &e) in sp.iter().enumerate().filter(|(j, _)| !used_p[*j]) {
        if e < low_p {
            report.unmatched_partner.push(e);
        } else if e > top_v {
            report.window_spill.push(e);
        } else {
            report.stray.push(e);
        }
    }
    for (_, &e) in sv.iter().enumerate().filter(|(i, _)| !used_v[*i]) {
        if e < low_v {
            report.unmatched_v.push(e);
        } else if e > top_p {
            report.window_spill.push(e);
        } else {
            report.stray.push(e);
        }
    }
    let extra = report.unmatched_v.len() + report.unmatched_partner.len();
    report.ground_state_missing_in = match (report.unmatched_v.len(), report.unmatched_partner.len()) {
        (1, 0) => Some(Side::Partner),
        (0, 1) => Some(Side::Potential),
        _ => None,
    };
    report.consistent = report.stray.is_empty() && extra <= 1 && !report.matched.is_empty();
    report
}

/// Ground-state test: `Aψ0 = 0` with `A = d/dx + W` for `A†A` order,
/// `A†ψ0 = 0` for `AA†` order.
#[derive(Debug, Clone)]
pub struct AnnihilationReport<T> {
    /// Samples of `ψ0 = exp(−∫W)` scaled to peak 1.
    pub psi0: SampledFunction<T>,
    /// `‖Aψ0‖ / ‖ψ0‖`.
    pub norm_ratio: T,
    /// `ψ0` at the left and right grid ends.
    pub boundary_values: (T, T),
    /// Decay reached on each side, on the grid or by probing towards the
    /// domain boundary.
    pub decays: (bool, bool),
    /// Decay on both sides and no overflow.
    pub normalizable: bool,
}

impl<T: Real> AnnihilationReport<T> {
    pub fn annihilated(&self) -> bool {
        self.norm_ratio < T::lit(ANNIHILATION_TOL)
    }

    /// `d` qualifies as the ground energy.
    pub fn passes(&self) -> bool {
        self.normalizable && self.annihilated()
    }
}

/// Integrates `ψ0'/ψ0 = −σW` across the grid and checks `Aψ0 ≈ 0` and decay
/// at both ends. When a grid end has not decayed the check follows `W`
/// analytically towards the corresponding domain boundary.
pub fn annihilation_check<T: Real>(
    pair: &FactorizationPair<T>,
    domain: &Interval<T>,
    a: &ParamPoint<T>,
    grid: &Grid<T>,
) -> Result<AnnihilationReport<T>> {
    let w = &pair.w;
    let sign = pair.sign();
    let fine = integrate_linear_ode_with(grid.refined(LOG_SUBSTEPS), T::zero(), |x| {
        (T::zero(), -sign * w.evaluate(x, a))
    });
    let log_psi = SampledFunction::with_mask(
        *grid,
        (0..grid.len()).map(|i| fine.values()[i * LOG_SUBSTEPS]).collect(),
        (0..grid.len()).map(|i| fine.is_masked(i * LOG_SUBSTEPS)).collect(),
    )?;
    if log_psi.valid_count() < Grid::<T>::MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: Grid::<T>::MIN_POINTS,
            found: log_psi.valid_count(),
        });
    }
    let peak = log_psi.iter_valid().map(|(_, _, v)| v).fold(T::neg_infinity(), T::max);
    let psi0 = log_psi.map(|_, l| (l - peak).exp());
    let w_psi = w.sample(a, grid).zip_with(&psi0, |w, p| sign * w * p)?;
    let a_psi = derivative_fourth_order(&psi0).zip_with(&w_psi, |d, wp| d + wp)?;
    let norm_ratio = a_psi.l2_norm() / psi0.l2_norm();

    let n = grid.len();
    let left_log = log_psi.value(0);
    let right_log = log_psi.value(n - 1);
    let span = grid.x_hi() - grid.x_lo();
    let threshold = T::lit(DECAY_TOL).ln();
    let side = |end_log: Option<T>, x_end: T, boundary: T, dir: T| -> bool {
        match end_log {
            None => false,
            Some(l) if l - peak <= threshold => true,
            Some(l) => probe_decay(w, sign, a, x_end, l, peak, boundary, dir, span, threshold),
        }
    };
    let left = side(left_log, grid.x_lo(), domain.lo, -T::one());
    let right = side(right_log, grid.x_hi(), domain.hi, T::one());
    let boundary_values = (psi0.values()[0], psi0.values()[n - 1]);
    let masked = psi0.masked_count() > 0;
    Ok(AnnihilationReport {
        normalizable: left && right && !masked,
        psi0,
        norm_ratio,
        boundary_values,
        decays: (left, right),
    })
}

/// Follows `log ψ0` from `x` towards `boundary` in direction `dir`,
/// integrating `−σW` with Simpson panels. Finite boundaries are approached
/// geometrically, infinite ones with growing steps up to `10⁴` grid spans.
#[allow(clippy::too_many_arguments)]
fn probe_decay<T: Real>(
    w: &Superpotential<T>,
    sign: T,
    a: &ParamPoint<T>,
    x: T,
    log_start: T,
    peak: T,
    boundary: T,
    dir: T,
    span: T,
    threshold: T,
) -> bool {
    let mut x = x;
    let mut l = log_start;
    let mut peak = peak;
    let steps: Box<dyn Iterator<Item = T>> = if boundary.is_finite() {
        let dist = (boundary - x).abs();
        let ratio = T::lit(0.5).powf(T::lit(0.25));
        let floor = T::epsilon() * T::lit(16.0) * span.max(boundary.abs());
        Box::new(
            (1..2000)
                .map(move |k| dist * ratio.powi(k))
                .take_while(move |d| *d > floor)
                .map(move |d| boundary - dir * d),
        )
    } else {
        let limit = span * T::lit(1e4);
        let start = x;
        Box::new(
            (1..200)
                .map(move |k| span / T::lit(16.0) * T::lit(1.25).powi(k))
                .scan(T::zero(), |acc, s| {
                    *acc = *acc + s;
                    Some(*acc)
                })
                .take_while(move |d| *d <= limit)
                .map(move |d| start + dir * d),
        )
    };
    for next in steps {
        let integral = sign * simpson(|t| w.evaluate(t, a), x, next, 16);
        if !integral.is_finite() {
            return false;
        }
        l = l - integral;
        peak = peak.max(l);
        x = next;
        if l - peak <= threshold {
            return true;
        }
    }
    false
}

fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, panels: usize) -> T {
    let h = (b - a) / T::from_index(2 * panels);
    let mut s = f(a) + f(b);
    for i in 1..2 * panels {
        let c = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        s = s + c * f(a + h * T::from_index(i));
    }
    s * h / T::lit(3.0)
}

/// `Aψ = ψ' + Wψ`, or `A†ψ = −ψ' + Wψ` when `dagger` is set.
pub fn apply_ladder<T: Real>(
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    psi: &SampledFunction<T>,
    dagger: bool,
) -> Result<SampledFunction<T>> {
    let grid = *psi.grid();
    let w = pair.w.sample(a, &grid);
    let dpsi = derivative(psi);
    let s = if dagger { -T::one() } else { T::one() };
    let wpsi = w.zip_with(psi, |w, p| w * p)?;
    dpsi.zip_with(&wpsi, |d, wp| s * d + wp)
}

/// `max |(A†A + d)ψ − Hψ|` over interior points for the factorization
/// `V = W² − W' + d` and a test function `ψ` vanishing at the grid ends.
pub fn factorization_defect<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    psi: &SampledFunction<T>,
) -> Result<T> {
    let grid = *psi.grid();
    let h = DiscretizedHamiltonian::discretize(potential, a, &grid)?;
    let (outer, inner) = match pair.order {
        crate::model::Order::AdaggerA => (true, false),
        crate::model::Order::AAdagger => (false, true),
    };
    let first = apply_ladder(pair, a, psi, inner)?;
    let second = apply_ladder(pair, a, &first, outer)?;
    let d = pair.energy(a);
    let hpsi = h.apply(psi);
    let n = grid.len();
    let mut worst = T::zero();
    for i in 2..n - 2 {
        if let Some(v) = second.value(i) {
            worst = worst.max((v + d * psi.values()[i] - hpsi[i - 1]).abs());
        }
    }
    Ok(worst)
}

/// Normalized overlap of `Aψ_{n+1}` (of `V`) with `ψ̃_n` (of the partner),
/// in absolute value. Close to 1 when the intertwining holds.
pub fn intertwining_overlap<T: Real>(
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    psi_next: &SampledFunction<T>,
    partner_psi: &SampledFunction<T>,
    dagger: bool,
) -> Result<T> {
    let mapped = apply_ladder(pair, a, psi_next, dagger)?;
    let norm = mapped.l2_norm() * partner_psi.l2_norm();
    Ok((mapped.dot(partner_psi)? / norm).abs())
}

/// Half-line grid `[ε L, L]` with `V(L) ≥ e_max + 25`, `L` taken from
/// `1, 1.5, 2, …`; `None` when no such `L` exists below `10⁴`.
pub fn half_line_grid<T: Real>(
    potential: &ParametricPotential<T>,
    a: &ParamPoint<T>,
    n: usize,
    e_max: T,
    eps: T,
) -> Option<Grid<T>> {
    let margin = T::lit(25.0);
    (2..20_000)
        .map(|k| T::from_index(k) / T::lit(2.0))
        .find(|&l| potential.evaluate(l, a) >= e_max + margin)
        .and_then(|l| Grid::new(eps * l, l, n).ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Order, Superpotential};

    fn oscillator() -> ParametricPotential<f64> {
        ParametricPotential::new("ho", "x^2", &[], Interval::real_line(), |x, _| x * x)
    }

    fn oscillator_pair() -> FactorizationPair<f64> {
        FactorizationPair::new(
            "ground",
            "ho",
            Superpotential::new("x", |x, _| x).with_derivative(|_, _| 1.0),
            "1",
            |_| 1.0,
            Order::AdaggerA,
        )
    }

    #[test]
    fn harmonic_levels() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let h = DiscretizedHamiltonian::discretize(&oscillator(), &ParamPoint::empty(), &g).unwrap();
        let s = eigen_lowest(&h, 5).unwrap();
        for (n, e) in s.eigenvalues.iter().enumerate() {
            assert!((e - (2 * n + 1) as f64).abs() < 1e-3, "{n}: {e}");
        }
        for (v, r) in s.eigenvectors.iter().zip(&s.residuals) {
            assert!((v.l2_norm() - 1.0).abs() < 1e-10);
            assert!(*r < 1e-6);
        }
    }

    #[test]
    fn eigen_request_bounds() {
        let g = Grid::new(-5.0, 5.0, 40).unwrap();
        let h = DiscretizedHamiltonian::discretize(&oscillator(), &ParamPoint::empty(), &g).unwrap();
        assert_eq!(eigen_lowest(&h, 0).unwrap_err(), Error::EigenRequest { k: 0, max: 10 });
        assert!(eigen_lowest(&h, 11).is_err());
        assert!(eigen_lowest(&h, 10).is_ok());
    }

    #[test]
    fn singular_point_rejected() {
        let v = ParametricPotential::new("c", "1/x^2", &[], Interval::positive_half_line(), |x: f64, _| 1.0 / (x * x))
            .with_singular_points(|_| vec![0.0]);
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        assert!(matches!(
            DiscretizedHamiltonian::discretize(&v, &ParamPoint::empty(), &g),
            Err(Error::SingularPointInGrid { .. })
        ));
    }

    #[test]
    fn ground_state_annihilated() {
        let g = Grid::new(-8.0, 8.0, 1601).unwrap().with_anchor_near(0.0);
        let r = annihilation_check(&oscillator_pair(), &Interval::real_line(), &ParamPoint::empty(), &g).unwrap();
        assert!(r.passes(), "{:?}", r.norm_ratio);
        assert!(r.norm_ratio < 1e-6);

        let reversed = FactorizationPair::new(
            "reversed",
            "ho",
            Superpotential::new("-x", |x: f64, _: &ParamPoint<f64>| -x).with_derivative(|_, _| -1.0),
            "1",
            |_| 1.0,
            Order::AAdagger,
        );
        let r = annihilation_check(&reversed, &Interval::real_line(), &ParamPoint::empty(), &g).unwrap();
        assert!(r.passes());

        let growing = FactorizationPair::new(
            "growing",
            "ho",
            Superpotential::new("-x", |x: f64, _: &ParamPoint<f64>| -x).with_derivative(|_, _| -1.0),
            "-1",
            |_| -1.0,
            Order::AdaggerA,
        );
        let r = annihilation_check(&growing, &Interval::real_line(), &ParamPoint::empty(), &g).unwrap();
        assert!(!r.normalizable);
    }

    #[test]
    fn probing_rescues_short_grid() {
        let g = Grid::new(-3.0, 3.0, 601).unwrap().with_anchor_near(0.0);
        let r = annihilation_check(&oscillator_pair(), &Interval::real_line(), &ParamPoint::empty(), &g).unwrap();
        assert!(r.boundary_values.0 > 1e-8);
        assert!(r.normalizable);
    }

    #[test]
    fn constant_ground_state_is_not_normalizable() {
        let zero = FactorizationPair::new(
            "zero",
            "free",
            Superpotential::new("0", |_: f64, _: &ParamPoint<f64>| 0.0).with_derivative(|_, _| 0.0),
            "0",
            |_| 0.0,
            Order::AdaggerA,
        );
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        let r = annihilation_check(&zero, &Interval::real_line(), &ParamPoint::empty(), &g).unwrap();
        assert!(!r.normalizable);
        assert!(r.norm_ratio < 1e-12);
    }

    #[test]
    fn factorization_reproduces_hamiltonian() {
        let g = Grid::new(-8.0, 8.0, 1601).unwrap();
        let psi = SampledFunction::from_fn(g, |x: f64| (-x * x).exp() * (1.0 + x));
        let defect = factorization_defect(&oscillator(), &oscillator_pair(), &ParamPoint::empty(), &psi).unwrap();
        assert!(defect < 1e-3, "{defect}");
    }

    #[test]
    fn spectra_matching_classifies_extra_level() {
        let r = match_spectra(vec![3.0, 5.0, 7.0], vec![1.0, 3.0, 5.0], 1e-6);
        assert!(r.consistent);
        assert_eq!(r.unmatched_partner, vec![1.0]);
        assert_eq!(r.window_spill, vec![7.0]);
        assert_eq!(r.ground_state_missing_in, Some(Side::Potential));

        let r = match_spectra(vec![1.0, 3.0, 5.0], vec![1.0, 3.4, 5.0], 1e-6);
        assert!(!r.consistent);
        assert_eq!(r.stray.len(), 2);
    }
}
