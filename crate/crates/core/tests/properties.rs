use proptest::prelude::*;

use superpartner::catalog::{self, CatalogEntry};
use superpartner::model::{transport_factorization, MapKind, ParameterMap};
use superpartner::numgrid::{cumulative_integral, derivative};
use superpartner::riccati::{general_solution, member_residual_fd, riccati_residual, FD_RESIDUAL_TOL};
use superpartner::shapeinv::{energy_ladder, si_residual};
use superpartner::{FamilyConstant, Grid, ParamPoint};

fn entries() -> Vec<CatalogEntry<f64>> {
    vec![
        catalog::radial_oscillator(),
        catalog::poschl_teller(),
        catalog::special_family(),
        catalog::harmonic_oscillator(),
    ]
}

/// Default grid at 4001 points. Half-line grids start at 1 or later
/// so the `1/x` end stays resolvable by the difference stencil.
fn fine_grid(e: &CatalogEntry<f64>) -> Grid<f64> {
    let g = e.default_grid;
    let lo = if g.x_lo() < 0.0 { g.x_lo() } else { g.x_lo().max(1.0) };
    Grid::new(lo, g.x_hi(), 4001).unwrap().with_anchor_near(g.anchor_x())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_maps_invert(scale in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], offset in -5.0..5.0f64, v in -10.0..10.0f64) {
        let f = ParameterMap::<f64>::affine("f", MapKind::ShapeMap, &[("p", scale, offset)]);
        let a = ParamPoint::from_pairs([("p", v), ("q", 1.5)]).unwrap();
        let back = f.inverse(&f.forward(&a));
        prop_assert!((back["p"] - v).abs() <= 1e-12 * (1.0 + v.abs()));
        prop_assert_eq!(back["q"], 1.5);
        let inv = f.inverted();
        prop_assert!((inv.forward(&f.forward(&a))["p"] - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn oscillator_transport_is_an_involution(l in 0.0..4.0f64) {
        let e = catalog::radial_oscillator::<f64>();
        let a = ParamPoint::from_pairs([("l", l)]).unwrap();
        let g = &e.invariance_maps[0];
        prop_assert!((g.forward(&g.forward(&a))["l"] - l).abs() < 1e-12);
        let p = &e.factorizations[0];
        let once = transport_factorization(&e.potential, p, g, &a, &e.default_grid).unwrap();
        let twice = transport_factorization(&e.potential, &once, g, &a, &e.default_grid).unwrap();
        for r in [0.01, 0.3, 1.0, 5.0] {
            prop_assert!((twice.w.evaluate(r, &a) - p.w.evaluate(r, &a)).abs() < 1e-9 * (1.0 + p.w.evaluate(r, &a).abs()));
        }
        prop_assert!((twice.energy(&a) - p.energy(&a)).abs() < 1e-12);
    }

    #[test]
    fn param_points_round_trip(a in -100.0..100.0f64, b in -1e6..1e6f64) {
        let p = ParamPoint::from_pairs([("a", a), ("b", b)]).unwrap();
        let q = ParamPoint::<f64>::parse(&p.to_string()).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn poschl_teller_reconciliation(alpha in 0.3..2.0f64, lambda in 2.05..6.0f64) {
        let e = catalog::poschl_teller::<f64>();
        let a = ParamPoint::from_pairs([("alpha", alpha), ("lambda", lambda)]).unwrap();
        for si in e.si_data.iter().filter(|s| !s.algebraic_only) {
            let pair = e.pair(&si.pair_label).unwrap();
            let r = si_residual(&e.potential, pair, &a, &si.f, &e.default_grid).unwrap();
            prop_assert!(r.pass);
            prop_assert!(r.reconciliation_gap < 1e-8);
            prop_assert!(r.r_pot_constant.abs() < 1e-8);
        }
    }

    #[test]
    fn linear_samples_differentiate_exactly(c0 in -3.0..3.0f64, c1 in -3.0..3.0f64) {
        let g = Grid::new(-1.0, 2.0, 64).unwrap();
        let f = superpartner::SampledFunction::from_fn(g, |x| c0 + c1 * x);
        let d = derivative(&f);
        prop_assert!(d.iter_valid().all(|(_, _, v)| (v - c1).abs() < 1e-11));
        let i = cumulative_integral(&superpartner::SampledFunction::constant(g, c1));
        prop_assert!(i.iter_valid().all(|(_, x, v)| (v - c1 * (x - g.anchor_x())).abs() < 1e-11));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_family_member_solves_the_same_riccati_equation(f in -5.0..5.0f64) {
        for e in entries() {
            let grid = fine_grid(&e);
            for p in &e.factorizations {
                let m = general_solution(p, &e.default_params, FamilyConstant::Finite(f), &grid).unwrap();
                if m.w_g.valid_count() < 100 {
                    continue;
                }
                let r = member_residual_fd(&e.potential, p, &e.default_params, &m, 0.5).unwrap();
                prop_assert!(
                    r.relative() < FD_RESIDUAL_TOL,
                    "{}:{} F={} relative {:e}", e.id, p.label, f, r.relative()
                );
            }
        }
    }
}

#[test]
fn catalog_residuals_at_every_validation_point() {
    for e in entries() {
        for a in &e.validation_params {
            for p in &e.factorizations {
                let r = riccati_residual(&e.potential, p, a, &e.default_grid).unwrap();
                assert!(r.passes_default(), "{}:{} at {a}: {:e}", e.id, p.label, r.relative());
            }
        }
    }
}

#[test]
fn ladders_increase_strictly() {
    let cases = [
        (catalog::poschl_teller::<f64>(), "W2", ParamPoint::from_pairs([("alpha", 1.0), ("lambda", 6.0)]).unwrap()),
        (catalog::radial_oscillator::<f64>(), "-(l+1)/r+r", ParamPoint::from_pairs([("l", 2.0)]).unwrap()),
        (catalog::harmonic_oscillator::<f64>(), "omega x", ParamPoint::from_pairs([("omega", 1.5)]).unwrap()),
    ];
    for (e, label, a) in cases {
        let pair = e.pair(label).unwrap();
        let si = e.si_for(label).into_iter().find(|s| !s.algebraic_only).unwrap();
        let l = energy_ladder(&e.potential, pair, si, &a, 6, &e.default_grid).unwrap();
        assert!(l.levels.len() >= 3, "{}: {:?}", e.id, l);
        assert!(l.levels.windows(2).all(|w| w[1] > w[0]), "{}: {:?}", e.id, l.levels);
    }
}
