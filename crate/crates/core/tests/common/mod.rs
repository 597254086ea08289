//! Seeded generators shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use eqshape::gspace::{EquivariantMap, FiniteGSpace, FiniteMetric, GroupAction, MetricMode};
use eqshape::molecule::{BasedSpace, Molecule};
use eqshape::rational::{ratio, Rational};
use rand::seq::index::sample;
use rand::Rng;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// `p/q` with `q ≤ 4`, in `[1, 10]`.
pub fn random_weight<R: Rng>(rng: &mut R) -> Rational {
    let q = rng.gen_range(1..=4i64);
    ratio(rng.gen_range(q..=10 * q), q)
}

/// Shortest-path closure of a symmetric positive weight matrix.
pub fn floyd(mut d: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    let n = d.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// A metric on `n` points with entries in `[1, 10]`; the triangle
/// inequality holds by shortest-path closure.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize) -> FiniteMetric {
    let mut w = vec![vec![Rational::from_integer(0.into()); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = random_weight(rng);
            w[i][j] = v.clone();
            w[j][i] = v;
        }
    }
    FiniteMetric::new(names(n), floyd(w), MetricMode::Metric).expect("closure is a metric")
}

/// A metric invariant under `a`: one weight per orbit of unordered pairs,
/// then shortest-path closure (which commutes with the action).
pub fn random_invariant_metric<R: Rng>(
    rng: &mut R,
    points: &[String],
    a: &GroupAction,
) -> FiniteMetric {
    let n = points.len();
    let zero = Rational::from_integer(0.into());
    let mut w: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    for i in 0..n {
        w[i][i] = Some(zero.clone());
        for j in (i + 1)..n {
            if w[i][j].is_some() {
                continue;
            }
            let v = random_weight(rng);
            for g in 0..a.group().order() {
                let (gi, gj) = (a.apply(g, i), a.apply(g, j));
                w[gi][gj] = Some(v.clone());
                w[gj][gi] = Some(v.clone());
            }
        }
    }
    let w = w
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.unwrap()).collect())
        .collect();
    FiniteMetric::new(points.to_vec(), floyd(w), MetricMode::Metric).expect("invariant metric")
}

/// Support of size 2..=`max_support` over all based points, coefficients
/// `p/q` with `|p| ≤ 6`, `q ≤ 3`, the last one closing the sum.
pub fn random_molecule<R: Rng>(rng: &mut R, b: &BasedSpace, max_support: usize) -> Molecule {
    let n = b.point_count();
    let k = rng.gen_range(2..=max_support.min(n));
    let pts = sample(rng, n, k).into_vec();
    loop {
        let mut coeffs: Vec<(usize, Rational)> = pts[..k - 1]
            .iter()
            .map(|&p| {
                let mut num = rng.gen_range(-6..=6i64);
                if num == 0 {
                    num = 1;
                }
                (p, ratio(num, rng.gen_range(1..=3)))
            })
            .collect();
        let sum: Rational = coeffs.iter().map(|(_, c)| c.clone()).sum();
        if sum != Rational::from_integer(0.into()) {
            coeffs.push((pts[k - 1], -sum));
            return Molecule::from_coeffs(coeffs).unwrap();
        }
    }
}

/// An equivariant map `x → target` built from orbit representatives: each
/// representative `r` goes to a point `y` with `Stab(r) ⊆ Stab(y)`, and
/// `f(g·r) = g·y`.
pub fn random_equivariant_map<R: Rng>(
    rng: &mut R,
    x: &FiniteGSpace,
    target: &FiniteGSpace,
) -> EquivariantMap {
    let a = x.action();
    let ta = target.action();
    let mut image = vec![usize::MAX; x.len()];
    for orbit in a.orbits() {
        let r = orbit[0];
        let stab = a.stabilizer(r);
        let candidates: Vec<usize> = (0..target.len())
            .filter(|&y| stab.iter().all(|&g| ta.apply(g, y) == y))
            .collect();
        let y = candidates[rng.gen_range(0..candidates.len())];
        for g in 0..x.group().order() {
            image[a.apply(g, r)] = ta.apply(g, y);
        }
    }
    EquivariantMap::new(x.clone(), target.clone(), image).expect("shapes agree")
}
