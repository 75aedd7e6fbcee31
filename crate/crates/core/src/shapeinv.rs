//! Shape invariance: constancy of `Ṽ(x, a) − V(x, f(a))`, the derived energy
//! ladder, and shape invariance of Riccati family members.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    FactorizationPair, ParamPoint, ParameterMap, ParametricPotential, ShapeInvarianceData,
};
use crate::numgrid::Grid;
use crate::real::Real;
use crate::riccati::{general_solution, FamilyConstant, FLATNESS_TOL};
use crate::spectra::annihilation_check;

/// Relative flatness tolerance for [`si_residual`].
pub const SI_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SIReport<T> {
    /// Mean of `W²(a) − W²(f(a)) + σ(W'(a) + W'(f(a)))`.
    pub w_constant: T,
    pub w_flatness: T,
    /// Mean of `Ṽ(x, a) − V(x, f(a))`.
    pub r_pot_constant: T,
    pub r_pot_flatness: T,
    /// `d(f(a)) − d(a)`.
    pub d_shift: T,
    /// `|w_constant − d_shift − r_pot_constant|`.
    pub reconciliation_gap: T,
    /// `max(1, max |V(·, a)|)`, the scale the tolerance is relative to.
    pub scale: T,
    pub pass: bool,
}

/// Shape-invariance residuals for `pair` under `f` at `a`. Both `a` and
/// `f(a)` must be admissible.
pub fn si_residual<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    f: &ParameterMap<T>,
    grid: &Grid<T>,
) -> Result<SIReport<T>> {
    potential.check_admissible(a)?;
    potential.check_admissible(&f.forward(a))?;
    si_residual_unchecked(potential, pair, a, f, grid)
}

/// Respects [`ShapeInvarianceData::algebraic_only`]: for those relations
/// `f(a)` only needs to be evaluable.
pub fn si_residual_for<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    si: &ShapeInvarianceData<T>,
    a: &ParamPoint<T>,
    grid: &Grid<T>,
) -> Result<SIReport<T>> {
    if si.algebraic_only {
        potential.check_admissible(a)?;
        potential.check_evaluable(&si.f.forward(a))?;
        si_residual_unchecked(potential, pair, a, &si.f, grid)
    } else {
        si_residual(potential, pair, a, &si.f, grid)
    }
}

fn si_residual_unchecked<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    f: &ParameterMap<T>,
    grid: &Grid<T>,
) -> Result<SIReport<T>> {
    let b = f.forward(a);
    let s = pair.sign();
    let wa = pair.w.sample(a, grid);
    let dwa = pair.w.sample_derivative(a, grid);
    let wb = pair.w.sample(&b, grid);
    let dwb = pair.w.sample_derivative(&b, grid);

    let left = wa.zip_with(&dwa, |w, dw| w * w + s * dw)?;
    let right = wb.zip_with(&dwb, |w, dw| w * w - s * dw)?;
    let w_form = left.zip_with(&right, |l, r| l - r)?;

    let v_a = potential.sample(a, grid);
    let v_b = potential.sample(&b, grid);
    let partner = pair.sample_partner(a, grid);
    let mut pot = partner.zip_with(&v_b, |p, v| p - v)?;
    for i in 0..grid.len() {
        if v_a.is_masked(i) {
            pot.mask_point(i);
        }
    }
    let mut w_form = w_form;
    for i in 0..grid.len() {
        if pot.is_masked(i) {
            w_form.mask_point(i);
        }
    }
    let found = w_form.valid_count();
    if found < 2 {
        return Err(Error::InsufficientData { needed: 2, found });
    }
    let w_constant = w_form.mean().unwrap_or_else(T::zero);
    let r_pot_constant = pot.mean().unwrap_or_else(T::zero);
    let w_flatness = w_form.flatness().unwrap_or_else(T::zero);
    let r_pot_flatness = pot.flatness().unwrap_or_else(T::zero);
    let d_shift = pair.energy(&b) - pair.energy(a);
    let scale = T::one().max(v_a.max_abs());
    let tol = T::lit(SI_TOL) * scale;
    Ok(SIReport {
        w_constant,
        w_flatness,
        r_pot_constant,
        r_pot_flatness,
        d_shift,
        reconciliation_gap: (w_constant - d_shift - r_pot_constant).abs(),
        scale,
        pass: w_flatness < tol && r_pot_flatness < tol,
    })
}

/// Why an energy ladder stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncationReason {
    /// `f^k(a)` left the admissible parameter region.
    Inadmissible(String),
    /// The ground state at `f^k(a)` failed the normalizability check.
    NotNormalizable,
}

impl fmt::Display for TruncationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationReason::Inadmissible(p) => write!(f, "parameters leave the admissible region ({p})"),
            TruncationReason::NotNormalizable => f.write_str("ground state not normalizable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    /// Index of the first level that could not be produced.
    pub at_level: usize,
    pub params: String,
    pub reason: TruncationReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLadder<T> {
    pub levels: Vec<T>,
    pub requested: usize,
    pub truncation: Option<Truncation>,
}

impl<T> EnergyLadder<T> {
    /// Bound states found when the ladder was truncated.
    pub fn bound_state_count(&self) -> Option<usize> {
        self.truncation.as_ref().map(|_| self.levels.len())
    }
}

/// `E_n = d(fⁿ(a)) + Σ_{k=1..n} r_pot(f^k(a))` for `n < n_levels`.
///
/// Every visited parameter point has to be admissible and its ground state
/// must pass [`annihilation_check`] on `grid`. A failure at `a` itself is an
/// error; later failures truncate the ladder.
pub fn energy_ladder<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    si: &ShapeInvarianceData<T>,
    a: &ParamPoint<T>,
    n_levels: usize,
    grid: &Grid<T>,
) -> Result<EnergyLadder<T>> {
    potential.check_admissible(a)?;
    if si.algebraic_only {
        return Err(Error::Constraint {
            potential: potential.id.clone(),
            predicate: format!("shape map `{}` leaves the admissible region; no ladder", si.f.id),
        });
    }
    let domain = potential.domain;
    let gate = |p: &ParamPoint<T>| -> Result<bool> {
        Ok(annihilation_check(pair, &domain, p, grid)?.passes())
    };
    if !gate(a)? {
        return Err(Error::NonNormalizableGround {
            pair: pair.label.clone(),
            params: a.to_string(),
        });
    }
    let mut ladder = EnergyLadder {
        levels: vec![pair.energy(a)],
        requested: n_levels,
        truncation: None,
    };
    let mut current = a.clone();
    let mut shift = T::zero();
    for level in 1..n_levels {
        let next = si.f.forward(&current);
        if let Err(e) = potential.check_admissible(&next) {
            let detail = match e {
                Error::Constraint { predicate, .. } => predicate,
                other => other.to_string(),
            };
            ladder.truncation = Some(Truncation {
                at_level: level,
                params: next.to_string(),
                reason: TruncationReason::Inadmissible(detail),
            });
            break;
        }
        if !gate(&next)? {
            ladder.truncation = Some(Truncation {
                at_level: level,
                params: next.to_string(),
                reason: TruncationReason::NotNormalizable,
            });
            break;
        }
        shift = shift + si.r_pot(&next);
        ladder.levels.push(pair.energy(&next) + shift);
        current = next;
    }
    Ok(ladder)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyCheckReport<T> {
    /// `max − min` of `2·gap'` over unmasked points.
    pub lhs_flatness: T,
    /// Mean of `2·gap'`.
    pub lhs_mean: T,
    /// Mean of `Ṽ_g − Ṽ_p`, i.e. `2σ·gap'`.
    pub partner_shift: T,
    /// `max − min` of `Ṽ_g(·, a) − V(·, f(a))`.
    pub direct_flatness: T,
    pub keeps_invariance: bool,
}

/// Whether the family member for `F` keeps shape invariance under `f`,
/// i.e. whether `2·gap'` is constant.
pub fn si_family_check<T: Real>(
    potential: &ParametricPotential<T>,
    pair: &FactorizationPair<T>,
    a: &ParamPoint<T>,
    f: &ParameterMap<T>,
    family_constant: FamilyConstant<T>,
    grid: &Grid<T>,
) -> Result<FamilyCheckReport<T>> {
    let member = general_solution(pair, a, family_constant, grid)?;
    let two = T::lit(2.0);
    let lhs = member.gap_prime.map(|_, g| two * g);
    let found = lhs.valid_count();
    if found < 2 {
        return Err(Error::InsufficientData { needed: 2, found });
    }
    let lhs_flatness = lhs.flatness().unwrap_or_else(T::zero);
    let v_next = potential.sample(&f.forward(a), grid);
    let direct = member.v_tilde_g.zip_with(&v_next, |p, v| p - v)?;
    Ok(FamilyCheckReport {
        lhs_flatness,
        lhs_mean: lhs.mean().unwrap_or_else(T::zero),
        partner_shift: lhs.mean().unwrap_or_else(T::zero) * pair.sign(),
        direct_flatness: direct.flatness().unwrap_or_else(T::nan),
        keeps_invariance: lhs_flatness < T::lit(FLATNESS_TOL),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapDeviation<T> {
    pub map: String,
    /// `max − min` of `Ṽ(x, k, l) − V(x, k₁, l₁)`.
    pub flatness: T,
    pub non_constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecialFamilyOutcome<T> {
    /// `k = 0`: `W_p` is constant and so are both partners.
    Trivial,
    Checked {
        maps: Vec<MapDeviation<T>>,
        /// Every candidate map leaves a non-constant difference.
        pass: bool,
    },
}

/// `W_p(x, k, l) = (2k/(kx+l) − (kx+l))/4`: checks that neither candidate
/// parameter map `(k, l) ↦ (k, l)` nor `(k, l) ↦ (−k, −l)` makes the
/// partner a shifted copy of `V`.
pub fn special_family_si_failure<T: Real>(k: T, l: T, grid: &Grid<T>) -> Result<SpecialFamilyOutcome<T>> {
    if k == T::zero() {
        return Ok(SpecialFamilyOutcome::Trivial);
    }
    let entry = crate::catalog::special_family::<T>();
    let potential = &entry.potential;
    let pair = &entry.factorizations[0];
    let a = ParamPoint::from_pairs([("k", k), ("l", l)])?;
    let pole = -l / k;
    if grid.x_lo() <= pole && pole <= grid.x_hi() {
        return Err(Error::SingularPointInGrid { point: pole.as_f64() });
    }
    let partner = pair.sample_partner(&a, grid);
    let candidates = [
        ("(k,l) -> (k,l)", a.clone()),
        ("(k,l) -> (-k,-l)", ParamPoint::from_pairs([("k", -k), ("l", -l)])?),
    ];
    let tol = T::lit(10.0 * FLATNESS_TOL);
    let maps: Vec<MapDeviation<T>> = candidates
        .into_iter()
        .map(|(name, b)| {
            let v = potential.sample(&b, grid);
            let flatness = partner
                .zip_with(&v, |p, v| p - v)
                .ok()
                .and_then(|d| d.flatness())
                .unwrap_or_else(T::zero);
            MapDeviation {
                map: name.to_string(),
                flatness,
                non_constant: flatness >= tol,
            }
        })
        .collect();
    let pass = maps.iter().all(|m| m.non_constant);
    Ok(SpecialFamilyOutcome::Checked { maps, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn pt_point(alpha: f64, lambda: f64) -> ParamPoint<f64> {
        ParamPoint::from_pairs([("alpha", alpha), ("lambda", lambda)]).unwrap()
    }

    #[test]
    fn poschl_teller_w_constant() {
        let e = catalog::poschl_teller::<f64>();
        let pair = e.pair("W2").unwrap();
        let si = e.si_for("W2").into_iter().find(|s| !s.algebraic_only).unwrap();
        let r = si_residual(&e.potential, pair, &pt_point(1.0, 4.0), &si.f, &e.default_grid).unwrap();
        assert!(r.pass);
        assert!((r.w_constant - 5.0).abs() < 1e-9);
        assert!(r.r_pot_constant.abs() < 1e-9);
        assert!(r.reconciliation_gap < 1e-8);
    }

    #[test]
    fn oscillator_partner_shift_is_two() {
        let e = catalog::radial_oscillator::<f64>();
        let pair = e.pair("l/r+r").unwrap();
        let si = &e.si_for("l/r+r")[0];
        let a = ParamPoint::from_pairs([("l", 3.0)]).unwrap();
        let r = si_residual(&e.potential, pair, &a, &si.f, &e.default_grid).unwrap();
        assert!(r.pass);
        assert!((r.r_pot_constant - 2.0).abs() < 1e-8);
    }

    #[test]
    fn inadmissible_image_is_a_constraint_error() {
        let e = catalog::poschl_teller::<f64>();
        let pair = e.pair("W2").unwrap();
        let si = e.si_for("W2").into_iter().find(|s| !s.algebraic_only).unwrap();
        let r = si_residual(&e.potential, pair, &pt_point(1.0, 1.5), &si.f, &e.default_grid);
        assert!(matches!(r, Err(Error::Constraint { .. })));
    }

    #[test]
    fn ladders() {
        let e = catalog::poschl_teller::<f64>();
        let pair = e.pair("W2").unwrap();
        let si = e.si_for("W2").into_iter().find(|s| !s.algebraic_only).unwrap();
        let l = energy_ladder(&e.potential, pair, si, &pt_point(1.0, 4.0), 5, &e.default_grid).unwrap();
        assert_eq!(l.levels.len(), 3);
        for (got, want) in l.levels.iter().zip([-9.0, -4.0, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(l.bound_state_count(), Some(3));
        let one = energy_ladder(&e.potential, pair, si, &pt_point(1.0, 4.0), 1, &e.default_grid).unwrap();
        assert_eq!(one.levels, vec![-9.0]);
        assert!(one.truncation.is_none());

        let o = catalog::radial_oscillator::<f64>();
        let pair = o.pair("-(l+1)/r+r").unwrap();
        let si = &o.si_for("-(l+1)/r+r")[0];
        let a = ParamPoint::from_pairs([("l", 1.0)]).unwrap();
        let l = energy_ladder(&o.potential, pair, si, &a, 3, &o.default_grid).unwrap();
        assert_eq!(l.levels, vec![5.0, 9.0, 13.0]);
    }

    #[test]
    fn special_family_member() {
        let e = catalog::special_family::<f64>();
        let pair = &e.factorizations[0];
        let a = ParamPoint::from_pairs([("k", 1.0), ("l", 0.0)]).unwrap();
        let id = crate::model::ParameterMap::identity(crate::model::MapKind::ShapeMap);
        let r = si_family_check(&e.potential, pair, &a, &id, FamilyConstant::Finite(0.0), &e.default_grid).unwrap();
        assert!(r.keeps_invariance, "{:?}", r);
        assert!((r.lhs_mean - 1.0).abs() < 1e-8);
        let r = si_family_check(&e.potential, pair, &a, &id, FamilyConstant::Finite(1.0), &e.default_grid).unwrap();
        assert!(!r.keeps_invariance);
    }

    #[test]
    fn special_family_failure_and_trivial_case() {
        let g = Grid::new(0.2, 6.0, 2001).unwrap();
        assert_eq!(special_family_si_failure(0.0, 1.0, &g).unwrap(), SpecialFamilyOutcome::Trivial);
        for (k, l) in [(1.0, 0.0), (2.0, 1.0)] {
            match special_family_si_failure(k, l, &g).unwrap() {
                SpecialFamilyOutcome::Checked { pass, .. } => assert!(pass),
                other => panic!("{other:?}"),
            }
        }
        assert!(special_family_si_failure(1.0, -1.0, &g).is_err());
    }
}
