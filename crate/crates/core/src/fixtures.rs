//! A small catalog of finite G-spaces and pseudometric families used by the
//! property suites, the acceptance gate and the documentation.

use crate::gspace::{FiniteGSpace, FiniteMetric, GroupAction, MetricMode, PseudometricFamily};
use crate::rational::{int, ratio, Rational};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn space(
    points: Vec<String>,
    d: impl Fn(usize, usize) -> Rational,
    gens: &[Vec<usize>],
) -> FiniteGSpace {
    let metric =
        FiniteMetric::from_fn(points.clone(), MetricMode::Metric, d).expect("fixture metric");
    let action = GroupAction::from_generators(&points, gens).expect("fixture action");
    FiniteGSpace::new(metric, action).expect("fixture space")
}

fn pseudo(points: &[String], d: impl Fn(usize, usize) -> Rational) -> FiniteMetric {
    FiniteMetric::from_fn(points.to_vec(), MetricMode::Pseudometric, d)
        .expect("fixture pseudometric")
}

/// `a, b, c` on a line with unit spacing; `Z2` swaps `a` and `c`.
pub fn x3_z2() -> FiniteGSpace {
    space(
        names(&["a", "b", "c"]),
        |i, j| int((i as i64 - j as i64).abs()),
        &[vec![2, 1, 0]],
    )
}

/// Two points at distance 1 swapped by `Z2`; no fixed point.
pub fn x2_swap() -> FiniteGSpace {
    space(
        names(&["a", "b"]),
        |i, j| int((i != j) as i64),
        &[vec![1, 0]],
    )
}

/// Equilateral triangle with `Z3` rotating the vertices.
pub fn triangle_z3() -> FiniteGSpace {
    space(
        names(&["p", "q", "r"]),
        |i, j| int((i != j) as i64),
        &[vec![1, 2, 0]],
    )
}

fn cycle6(i: usize, j: usize) -> Rational {
    let k = (i as i64 - j as i64).rem_euclid(6);
    int(k.min(6 - k))
}

fn hex_points() -> Vec<String> {
    (0..6).map(|i| format!("h{i}")).collect()
}

/// The 6-cycle with its graph metric and `S3 ≅ D3` generated by the
/// rotation `i ↦ i+2` and the reflection `i ↦ −i`.
pub fn hexagon_s3() -> FiniteGSpace {
    let rot = (0..6).map(|i| (i + 2) % 6).collect();
    let refl = (0..6).map(|i| (6 - i) % 6).collect();
    space(hex_points(), cycle6, &[rot, refl])
}

/// The 6-cycle with `Z3` acting by `i ↦ i+2`.
pub fn hexagon_z3() -> FiniteGSpace {
    space(
        hex_points(),
        cycle6,
        &[(0..6).map(|i| (i + 2) % 6).collect()],
    )
}

/// Corners of a 1×2 rectangle under the taxicab metric, `Z2` reflecting
/// `a ↔ b`, `c ↔ d` across the long axis.
pub fn rectangle_z2() -> FiniteGSpace {
    let xy = [(0i64, 0i64), (1, 0), (1, 2), (0, 2)];
    space(
        names(&["a", "b", "c", "d"]),
        |i, j| int((xy[i].0 - xy[j].0).abs() + (xy[i].1 - xy[j].1).abs()),
        &[vec![1, 0, 3, 2]],
    )
}

/// A single point under the trivial group.
pub fn point() -> FiniteGSpace {
    space(names(&["o"]), |_, _| int(0), &[])
}

pub fn catalog() -> Vec<(&'static str, FiniteGSpace)> {
    vec![
        ("x3_z2", x3_z2()),
        ("x2_swap", x2_swap()),
        ("triangle_z3", triangle_z3()),
        ("hexagon_s3", hexagon_s3()),
        ("hexagon_z3", hexagon_z3()),
        ("rectangle_z2", rectangle_z2()),
        ("point", point()),
    ]
}

fn family(x: &FiniteGSpace, members: Vec<(&str, FiniteMetric)>) -> PseudometricFamily {
    PseudometricFamily::ingest(x, members.into_iter().map(|(n, m)| (n.to_string(), m)))
        .expect("fixture family")
        .0
}

/// `μ` on X3 identifying `a` and `c`.
pub fn mu_ac() -> FiniteMetric {
    pseudo(&names(&["a", "b", "c"]), |i, j| {
        int(((i == 1) != (j == 1)) as i64)
    })
}

/// `{zero, μ, ρ}` on X3, totally ordered.
pub fn chain_family() -> (FiniteGSpace, PseudometricFamily) {
    let x = x3_z2();
    let f = family(
        &x,
        vec![
            ("zero", FiniteMetric::zero(x.points().to_vec()).unwrap()),
            ("mu", mu_ac()),
            ("rho", x.metric().clone()),
        ],
    );
    (x, f)
}

/// Two incomparable pseudometrics on X3 whose join is not a member.
pub fn incomparable_family() -> (FiniteGSpace, PseudometricFamily) {
    let x = x3_z2();
    let mu2 = pseudo(x.points(), |i, j| match (i.min(j), i.max(j)) {
        (0, 2) => int(1),
        (a, b) if a != b => ratio(1, 2),
        _ => int(0),
    });
    let f = family(&x, vec![("mu1", mu_ac()), ("mu2", mu2)]);
    (x, f)
}

/// The zero pseudometric alone.
pub fn single_family() -> (FiniteGSpace, PseudometricFamily) {
    let x = x3_z2();
    let f = family(
        &x,
        vec![("zero", FiniteMetric::zero(x.points().to_vec()).unwrap())],
    );
    (x, f)
}

/// `{zero, parity, ρ}` on the hexagon: parity is invariant under `D3`.
pub fn hexagon_family() -> (FiniteGSpace, PseudometricFamily) {
    let x = hexagon_s3();
    let parity = pseudo(x.points(), |i, j| int(((i + j) % 2) as i64));
    let f = family(
        &x,
        vec![
            ("zero", FiniteMetric::zero(x.points().to_vec()).unwrap()),
            ("parity", parity),
            ("rho", x.metric().clone()),
        ],
    );
    (x, f)
}

/// `{height, width, ρ}` on the rectangle: the two coordinate projections,
/// incomparable, with join equal to ρ.
pub fn rectangle_family() -> (FiniteGSpace, PseudometricFamily) {
    let x = rectangle_z2();
    let xy = [(0i64, 0i64), (1, 0), (1, 2), (0, 2)];
    let height = pseudo(x.points(), |i, j| int((xy[i].1 - xy[j].1).abs()));
    let width = pseudo(x.points(), |i, j| int((xy[i].0 - xy[j].0).abs()));
    let f = family(
        &x,
        vec![
            ("height", height),
            ("width", width),
            ("rho", x.metric().clone()),
        ],
    );
    (x, f)
}

pub fn families() -> Vec<(&'static str, FiniteGSpace, PseudometricFamily)> {
    let mut out = Vec::new();
    for (name, (x, f)) in [
        ("chain", chain_family()),
        ("incomparable", incomparable_family()),
        ("single", single_family()),
        ("hexagon", hexagon_family()),
        ("rectangle", rectangle_family()),
    ] {
        out.push((name, x, f));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gspace::fixed_point_set;

    #[test]
    fn catalog_shapes() {
        let orders: Vec<(usize, usize)> = catalog()
            .iter()
            .map(|(_, x)| (x.len(), x.group().order()))
            .collect();
        assert_eq!(
            orders,
            vec![(3, 2), (2, 2), (3, 3), (6, 6), (6, 3), (4, 2), (1, 1)]
        );
        assert_eq!(fixed_point_set(x3_z2().action()), vec![1]);
        assert!(fixed_point_set(x2_swap().action()).is_empty());
        // D3 is nonabelian
        let h = hexagon_s3();
        let g = h.group();
        assert!((0..6).any(|a| (0..6).any(|b| g.mul(a, b) != g.mul(b, a))));
    }

    #[test]
    fn families_have_expected_sizes() {
        let sizes: Vec<usize> = families().iter().map(|(_, _, f)| f.len()).collect();
        assert_eq!(sizes, vec![3, 2, 1, 3, 3]);
    }
}
