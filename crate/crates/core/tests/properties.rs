//! Property tests for the module invariants, over seeded random instances.

mod common;

use std::sync::Arc;

use eqshape::ae_norm::{brute_force_norm, norm, verify_certificate};
use eqshape::fixtures;
use eqshape::gspace::{
    check_invariance, pseudometric_join, pullback_pseudometric, validate_metric, EquivariantMap,
    FiniteGSpace, FiniteGroup, FiniteMetric, GroupAction, MetricMode,
};
use eqshape::molecule::{
    act, basis_decompose, check_molecule_action, combine, embed, ActionMode, BasedSpace,
};
use eqshape::quotient::{bond, quotient};
use eqshape::rational::{int, one, ratio};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random pseudometric on `x` pulled back along a map into a random metric
/// space with trivial action.
fn random_pullback(r: &mut ChaCha8Rng, x: &FiniteGSpace) -> FiniteMetric {
    let k = r.gen_range(1..=x.len());
    let metric = common::random_metric(r, k);
    let target = FiniteGSpace::new(
        metric,
        GroupAction::trivial(x.action().group_arc().clone(), k),
    )
    .unwrap();
    let f = common::random_equivariant_map(r, x, &target);
    pullback_pseudometric(&f, target.metric()).unwrap()
}

fn random_space(r: &mut ChaCha8Rng) -> FiniteGSpace {
    let n = r.gen_range(1..=5);
    FiniteGSpace::with_trivial_action(common::random_metric(r, n)).unwrap()
}

fn fixture(r: &mut ChaCha8Rng) -> FiniteGSpace {
    let c = fixtures::catalog();
    c[r.gen_range(0..c.len())].1.clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pullbacks_are_invariant_pseudometrics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = fixture(&mut r);
        let target = FiniteGSpace::new(
            common::random_invariant_metric(&mut r, x.points(), x.action()),
            x.action().clone(),
        ).unwrap();
        let f = common::random_equivariant_map(&mut r, &x, &target);
        let mu = pullback_pseudometric(&f, target.metric()).unwrap();
        prop_assert!(validate_metric(x.points(), mu.matrix(), MetricMode::Pseudometric).unwrap().is_ok());
        prop_assert!(check_invariance(&mu, x.action()).unwrap().is_ok());
    }

    #[test]
    fn leq_is_a_partial_order_and_join_is_least(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = fixture(&mut r);
        let ms: Vec<FiniteMetric> = (0..4).map(|_| random_pullback(&mut r, &x)).collect();
        for a in &ms {
            prop_assert!(a.leq(a));
            for b in &ms {
                if a.leq(b) && b.leq(a) {
                    prop_assert_eq!(a, b);
                }
                let j = pseudometric_join(a, b).unwrap();
                prop_assert!(a.leq(&j) && b.leq(&j));
                prop_assert!(validate_metric(x.points(), j.matrix(), MetricMode::Pseudometric).unwrap().is_ok());
                prop_assert!(check_invariance(&j, x.action()).unwrap().is_ok());
                for c in &ms {
                    if a.leq(b) && b.leq(c) {
                        prop_assert!(a.leq(c));
                    }
                    if a.leq(c) && b.leq(c) {
                        prop_assert!(j.leq(c));
                    }
                }
            }
        }
    }

    #[test]
    fn generator_closure_is_a_group(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5usize);
        let pts = common::names(n);
        let gens: Vec<Vec<usize>> = (0..r.gen_range(0..=2))
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    p.swap(i, r.gen_range(0..=i));
                }
                p
            })
            .collect();
        let (g, perms) = FiniteGroup::generated_by(&pts, &gens, 200).unwrap();
        prop_assert!(g.order() <= 120);
        prop_assert!(g.validate().is_ok());
        prop_assert!(GroupAction::new(Arc::new(g), &pts, perms).is_ok());
    }

    #[test]
    fn decomposition_is_unique(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = fixture(&mut r);
        let b = if r.gen_bool(0.5) || eqshape::gspace::fixed_point_set(x.action()).is_empty() {
            BasedSpace::adjoined(x)
        } else {
            let p = eqshape::gspace::fixed_point_set(x.action())[0];
            BasedSpace::internal(x, p).unwrap()
        };
        if b.point_count() < 2 {
            return Ok(());
        }
        let m = common::random_molecule(&mut r, &b, 4);
        let d = basis_decompose(&m, &b);
        prop_assert_eq!(&d.reconstruct(&b), &m);
        prop_assert!(!d.terms.contains_key(&b.basepoint()));
        prop_assert!(m.sum().is_zero());
    }

    #[test]
    fn solver_matches_oracle_and_is_certified(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = BasedSpace::adjoined(random_space(&mut r));
        let m = common::random_molecule(&mut r, &b, 4);
        let res = norm(&m, &b).unwrap();
        prop_assert_eq!(&res.value, &brute_force_norm(&m, &b).unwrap());
        let report = verify_certificate(&m, &res, &b);
        prop_assert!(report.is_ok(), "{}", report);
    }

    #[test]
    fn norm_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = BasedSpace::adjoined(random_space(&mut r));
        let m = common::random_molecule(&mut r, &b, 4);
        let m2 = common::random_molecule(&mut r, &b, 4);
        let v = norm(&m, &b).unwrap().value;
        prop_assert!(v.is_positive());
        let alpha = ratio(r.gen_range(-5..=5), r.gen_range(1..=3));
        prop_assert_eq!(norm(&m.scale(&alpha), &b).unwrap().value, &v * alpha.abs());
        let sum = combine(&one(), &m, &one(), &m2);
        prop_assert!(norm(&sum, &b).unwrap().value <= &v + &norm(&m2, &b).unwrap().value);
    }

    #[test]
    fn embedding_is_isometric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_space(&mut r);
        let b = BasedSpace::adjoined(x.clone());
        for i in 0..x.len() {
            for j in 0..x.len() {
                let d = combine(&one(), &embed(i, &b).unwrap(), &-one(), &embed(j, &b).unwrap());
                prop_assert_eq!(&norm(&d, &b).unwrap().value, x.metric().d(i, j));
            }
        }
    }

    #[test]
    fn action_is_linear_isometric_and_equivariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = fixture(&mut r);
        let b = BasedSpace::adjoined(x.clone());
        let ms: Vec<_> = (0..3).map(|_| common::random_molecule(&mut r, &b, 4)).collect();
        prop_assert!(check_molecule_action(&b, ActionMode::Pushforward, &ms).unwrap().is_ok());
        let (a1, a2) = (ratio(r.gen_range(-4..=4), 2), int(r.gen_range(-3..=3)));
        for g in 0..x.group().order() {
            let lhs = act(g, &combine(&a1, &ms[0], &a2, &ms[1]), &b, ActionMode::Pushforward).unwrap();
            let rhs = combine(
                &a1,
                &act(g, &ms[0], &b, ActionMode::Pushforward).unwrap(),
                &a2,
                &act(g, &ms[1], &b, ActionMode::Pushforward).unwrap(),
            );
            prop_assert_eq!(lhs, rhs);
            let gm = act(g, &ms[2], &b, ActionMode::Pushforward).unwrap();
            prop_assert_eq!(norm(&gm, &b).unwrap().value, norm(&ms[2], &b).unwrap().value);
            prop_assert_eq!(
                &act(g, &ms[2], &b, ActionMode::Eq3Literal).unwrap(),
                &gm
            );
            for p in 0..x.len() {
                let gp = x.action().apply(g, p);
                prop_assert_eq!(
                    act(g, &embed(p, &b).unwrap(), &b, ActionMode::Pushforward).unwrap(),
                    embed(gp, &b).unwrap()
                );
            }
        }
    }

    #[test]
    fn linearized_bonds_do_not_increase_norms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = fixture(&mut r);
        let mu = random_pullback(&mut r, &x);
        let nu = pseudometric_join(&mu, &random_pullback(&mut r, &x)).unwrap();
        let coarse = Arc::new(quotient(&x, &mu).unwrap());
        let fine = Arc::new(quotient(&x, &nu).unwrap());
        let p = bond(&coarse, &fine).unwrap();
        prop_assert!(p.verify().is_ok());
        let m = common::random_molecule(&mut r, &fine.based, 4);
        let image = p.linearize(&m).unwrap();
        prop_assert!(norm(&image, &coarse.based).unwrap().value <= norm(&m, &fine.based).unwrap().value);
    }
}

#[test]
fn pushforward_map_is_lipschitz_bounded() {
    use eqshape::molecule::pushforward_map;
    use eqshape::properties::lipschitz_constant;
    let mut r = rng(11);
    for _ in 0..32 {
        let x = fixture(&mut r);
        let target = FiniteGSpace::new(
            common::random_invariant_metric(&mut r, x.points(), x.action()),
            x.action().clone(),
        )
        .unwrap();
        let f: EquivariantMap = common::random_equivariant_map(&mut r, &x, &target);
        let (bx, by) = (
            BasedSpace::adjoined(x.clone()),
            BasedSpace::adjoined(target),
        );
        if x.len() < 2 {
            continue;
        }
        let pts: Vec<usize> = (0..x.len()).collect();
        let m = eqshape::molecule::Molecule::from_coeffs(
            pts.iter()
                .map(|&p| (p, int(if p == 0 { -(x.len() as i64 - 1) } else { 1 }))),
        )
        .unwrap();
        let pushed = pushforward_map(&f, &m, &bx, &by).unwrap();
        let lhs = norm(&pushed, &by).unwrap().value;
        let rhs = lipschitz_constant(&f) * norm(&m, &bx).unwrap().value;
        assert!(lhs <= rhs, "{lhs} > {rhs}");
    }
}
