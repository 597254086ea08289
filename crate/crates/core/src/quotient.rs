//! Metric quotients `X_μ` by invariant pseudometrics, the bonding
//! projections between them, and factorization of equivariant maps through
//! the quotient by their pullback pseudometric.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gspace::{
    check_equivariance, check_invariance, pullback_pseudometric, validate_metric, EquivariantMap,
    FiniteGSpace, FiniteMetric, GroupAction, MetricMode,
};
use crate::molecule::{pushforward_map, BasedSpace, Molecule};
use crate::report::ValidationReport;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn root(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let r = self.root(p);
        self.parent[x] = r;
        r
    }

    /// Keeps the smaller index as root so roots are least members.
    fn merge(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.root(x), self.root(y));
        if rx != ry {
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            self.parent[hi] = lo;
        }
    }
}

/// The classes of `μ = 0` with the induced metric and action. Classes are
/// ordered by their representative (least member), and named `[rep]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientSpace {
    pub classes: Vec<Vec<usize>>,
    pub space: FiniteGSpace,
}

impl QuotientSpace {
    pub fn representative(&self, c: usize) -> usize {
        self.classes[c][0]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// `p_μ`: point index to class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientMap {
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub source: FiniteGSpace,
    pub mu: FiniteMetric,
    pub space: QuotientSpace,
    pub map: QuotientMap,
    /// `X_μ` with `*` adjoined at the canonical distance.
    pub based: BasedSpace,
}

impl Quotient {
    /// `p_μ` as an equivariant map `X → X_μ`.
    pub fn projection(&self) -> EquivariantMap {
        EquivariantMap::new(
            self.source.clone(),
            self.space.space.clone(),
            self.map.assignment.clone(),
        )
        .expect("quotient map shapes agree")
    }
}

pub fn class_name(points: &[String], rep: usize) -> String {
    format!("[{}]", points[rep])
}

/// Builds `X_μ`. The zero relation is computed by union-find and its
/// transitivity is re-checked on the resulting classes.
pub fn quotient(x: &FiniteGSpace, mu: &FiniteMetric) -> Result<Quotient> {
    if mu.points() != x.points() {
        return Err(Error::Dimension(
            "pseudometric is not over the space's points".into(),
        ));
    }
    let report = validate_metric(mu.points(), mu.matrix(), MetricMode::Pseudometric)?;
    if !report.is_ok() {
        return Err(Error::InvalidMetric(report));
    }
    let inv = check_invariance(mu, x.action())?;
    if !inv.is_ok() {
        return Err(Error::NotInvariant(inv));
    }

    let n = x.len();
    let pts = x.points();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if num_traits::Zero::is_zero(mu.d(i, j)) {
                uf.merge(i, j);
            }
        }
    }
    let mut class_of_root = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut assignment = vec![0; n];
    for p in 0..n {
        let r = uf.root(p);
        if class_of_root[r] == usize::MAX {
            class_of_root[r] = classes.len();
            classes.push(Vec::new());
        }
        assignment[p] = class_of_root[r];
        classes[class_of_root[r]].push(p);
    }
    for class in &classes {
        for (a, &p) in class.iter().enumerate() {
            for &q in &class[a + 1..] {
                if !num_traits::Zero::is_zero(mu.d(p, q)) {
                    return Err(Error::InconsistentZeroSet(pts[p].clone(), pts[q].clone()));
                }
            }
        }
    }

    let names: Vec<String> = classes.iter().map(|c| class_name(pts, c[0])).collect();
    let metric = FiniteMetric::from_fn(names.clone(), MetricMode::Metric, |c, d| {
        mu.d(classes[c][0], classes[d][0]).clone()
    })?;
    let perms = (0..x.group().order())
        .map(|g| {
            (0..classes.len())
                .map(|c| assignment[x.action().apply(g, classes[c][0])])
                .collect()
        })
        .collect();
    let action = GroupAction::new(x.action().group_arc().clone(), &names, perms)?;
    let space = FiniteGSpace::new(metric, action)?;
    let q = Quotient {
        source: x.clone(),
        mu: mu.clone(),
        based: BasedSpace::adjoined(space.clone()),
        space: QuotientSpace { classes, space },
        map: QuotientMap { assignment },
    };
    let report = verify_quotient(&q);
    if !report.is_ok() {
        return Err(Error::IllDefinedQuotient(report));
    }
    Ok(q)
}

/// Exhaustive re-check of the quotient: partition, zero set, metric and
/// action well-definedness over all representatives, equivariance and
/// surjectivity of `p_μ`.
pub fn verify_quotient(q: &Quotient) -> ValidationReport {
    let x = &q.source;
    let pts = x.points();
    let qs = &q.space;
    let asg = &q.map.assignment;
    let mut report = ValidationReport::new();

    let mut covered = vec![0usize; x.len()];
    for (c, class) in qs.classes.iter().enumerate() {
        for &p in class {
            covered[p] += 1;
            if asg[p] != c {
                report.fail(
                    "partition",
                    vec![pts[p].clone()],
                    "assignment disagrees with class",
                );
            }
        }
    }
    if covered.iter().any(|&k| k != 1) {
        report.fail("partition", vec![], "classes do not partition the points");
        return report;
    }
    for c in 0..qs.len() {
        if !asg.contains(&c) {
            report.fail(
                "surjective",
                vec![qs.space.points()[c].clone()],
                "class not hit",
            );
        }
    }
    for p in 0..x.len() {
        for r in 0..x.len() {
            let same = asg[p] == asg[r];
            let zero = num_traits::Zero::is_zero(q.mu.d(p, r));
            if same != zero {
                report.fail(
                    "zero_set",
                    vec![pts[p].clone(), pts[r].clone()],
                    format!("same class = {same}, mu = {}", q.mu.d(p, r)),
                );
            }
            if q.mu.d(p, r) != qs.space.metric().d(asg[p], asg[r]) {
                report.fail(
                    "metric_well_defined",
                    vec![pts[p].clone(), pts[r].clone()],
                    "class distance differs from mu on these representatives",
                );
            }
        }
    }
    let group = x.group();
    for g in 0..group.order() {
        for p in 0..x.len() {
            let lhs = asg[x.action().apply(g, p)];
            let rhs = qs.space.action().apply(g, asg[p]);
            if lhs != rhs {
                report.fail(
                    "action_well_defined",
                    vec![group.name(g).to_string(), pts[p].clone()],
                    "[gx] != g[x]",
                );
            }
        }
    }
    report.extend(check_invariance(qs.space.metric(), qs.space.action()).expect("same size"));
    report
}

/// The projection `p_{μμ′}: X_{μ′} → X_μ`, `[x]_{μ′} ↦ [x]_μ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondMap {
    /// `X_{μ′}`, the finer quotient.
    pub fine: Arc<Quotient>,
    /// `X_μ`, the coarser quotient.
    pub coarse: Arc<Quotient>,
    /// Fine class index to coarse class index.
    pub assignment: Vec<usize>,
}

/// Requires `μ ≤ μ′` (`coarse.mu ≤ fine.mu`).
pub fn bond(coarse: &Arc<Quotient>, fine: &Arc<Quotient>) -> Result<BondMap> {
    if coarse.source != fine.source {
        return Err(Error::Dimension("quotients of different spaces".into()));
    }
    if let Some((i, j)) = coarse.mu.first_excess(&fine.mu) {
        let pts = coarse.source.points();
        return Err(Error::OrderViolation {
            x: pts[i].clone(),
            y: pts[j].clone(),
            detail: format!("{} > {}", coarse.mu.d(i, j), fine.mu.d(i, j)),
        });
    }
    let assignment = fine
        .space
        .classes
        .iter()
        .map(|class| coarse.map.assignment[class[0]])
        .collect();
    let b = BondMap {
        fine: fine.clone(),
        coarse: coarse.clone(),
        assignment,
    };
    let report = b.verify();
    if !report.is_ok() {
        return Err(Error::IllDefinedQuotient(report));
    }
    Ok(b)
}

impl BondMap {
    pub fn verify(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let fine = &self.fine;
        let coarse = &self.coarse;
        let pts = fine.source.points();
        let fnames = fine.space.space.points();
        if self.assignment.len() != fine.space.len()
            || self.assignment.iter().any(|&c| c >= coarse.space.len())
        {
            report.fail("bond_shape", vec![], "assignment has the wrong shape");
            return report;
        }
        if !coarse.mu.leq(&fine.mu) {
            report.fail("order", vec![], "coarse pseudometric exceeds fine one");
        }
        for class in &fine.space.classes {
            let target = coarse.map.assignment[class[0]];
            for &p in &class[1..] {
                if coarse.map.assignment[p] != target {
                    report.fail(
                        "bond_well_defined",
                        vec![pts[class[0]].clone(), pts[p].clone()],
                        "fine-equivalent points land in different coarse classes",
                    );
                }
            }
        }
        for p in 0..fine.source.len() {
            if self.assignment[fine.map.assignment[p]] != coarse.map.assignment[p] {
                report.fail(
                    "coherence_i",
                    vec![pts[p].clone()],
                    format!(
                        "bond({}) = {} != {}",
                        fnames[fine.map.assignment[p]],
                        coarse.space.space.points()[self.assignment[fine.map.assignment[p]]],
                        coarse.space.space.points()[coarse.map.assignment[p]]
                    ),
                );
            }
        }
        let fm = fine.space.space.metric();
        let cm = coarse.space.space.metric();
        for c in 0..fine.space.len() {
            for d in (c + 1)..fine.space.len() {
                if cm.d(self.assignment[c], self.assignment[d]) > fm.d(c, d) {
                    report.fail(
                        "lipschitz",
                        vec![fnames[c].clone(), fnames[d].clone()],
                        "bond increases a distance",
                    );
                }
            }
        }
        let group = fine.source.group();
        for g in 0..group.order() {
            for c in 0..fine.space.len() {
                let lhs = self.assignment[fine.space.space.action().apply(g, c)];
                let rhs = coarse.space.space.action().apply(g, self.assignment[c]);
                if lhs != rhs {
                    report.fail(
                        "bond_equivariance",
                        vec![group.name(g).to_string(), fnames[c].clone()],
                        "p(gc) != g p(c)",
                    );
                }
            }
        }
        report
    }

    /// `self ∘ inner`, where `inner: X_{μ″} → X_{μ′}` and `self: X_{μ′} → X_μ`.
    pub fn compose(&self, inner: &BondMap) -> Result<BondMap> {
        if inner.coarse.mu != self.fine.mu {
            return Err(Error::Dimension("bonds are not composable".into()));
        }
        Ok(BondMap {
            fine: inner.fine.clone(),
            coarse: self.coarse.clone(),
            assignment: inner
                .assignment
                .iter()
                .map(|&c| self.assignment[c])
                .collect(),
        })
    }

    pub fn as_map(&self) -> EquivariantMap {
        EquivariantMap::new(
            self.fine.space.space.clone(),
            self.coarse.space.space.clone(),
            self.assignment.clone(),
        )
        .expect("bond shapes agree")
    }

    /// The linear extension `M(X_{μ′}) → M(X_μ)` between adjoined-basepoint
    /// molecule spaces.
    pub fn linearize(&self, m: &Molecule) -> Result<Molecule> {
        pushforward_map(&self.as_map(), m, &self.fine.based, &self.coarse.based)
    }
}

/// `f = φ ∘ p_μ` with `μ` the pullback of `ρ_Y` along `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub quotient: Quotient,
    /// Class index to target point index.
    pub phi: Vec<usize>,
}

pub fn factorize(f: &EquivariantMap, rho_y: &FiniteMetric) -> Result<Factorization> {
    let mu = pullback_pseudometric(f, rho_y)?;
    let q = quotient(f.source(), &mu)?;
    let phi = q
        .space
        .classes
        .iter()
        .map(|class| f.apply(class[0]))
        .collect();
    let fac = Factorization { quotient: q, phi };
    let report = verify_factorization(f, rho_y, &fac);
    if !report.is_ok() {
        return Err(Error::IllDefinedQuotient(report));
    }
    Ok(fac)
}

/// Checks that `φ` is well defined, `φ ∘ p_μ = f`, and that `φ` is an
/// injective, equivariant isometry onto `f(X)`.
pub fn verify_factorization(
    f: &EquivariantMap,
    rho_y: &FiniteMetric,
    fac: &Factorization,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let q = &fac.quotient;
    let pts = f.source().points();
    let tpts = f.target().points();
    let cnames = q.space.space.points();
    for x in 0..f.source().len() {
        let via = fac.phi[q.map.assignment[x]];
        if via != f.apply(x) {
            report.fail(
                "factorization",
                vec![pts[x].clone()],
                format!("phi(p(x)) = {} != f(x) = {}", tpts[via], tpts[f.apply(x)]),
            );
        }
    }
    for (c, class) in q.space.classes.iter().enumerate() {
        for &x in class {
            if f.apply(x) != fac.phi[c] {
                report.fail(
                    "phi_well_defined",
                    vec![pts[x].clone()],
                    "class members disagree",
                );
            }
        }
    }
    let m = q.space.space.metric();
    for c in 0..q.space.len() {
        for d in (c + 1)..q.space.len() {
            if fac.phi[c] == fac.phi[d] {
                report.fail(
                    "phi_injective",
                    vec![cnames[c].clone(), cnames[d].clone()],
                    "two classes share an image",
                );
            }
            if rho_y.d(fac.phi[c], fac.phi[d]) != m.d(c, d) {
                report.fail(
                    "phi_isometry",
                    vec![cnames[c].clone(), cnames[d].clone()],
                    format!(
                        "rho(phi c, phi d) = {} != {}",
                        rho_y.d(fac.phi[c], fac.phi[d]),
                        m.d(c, d)
                    ),
                );
            }
        }
    }
    match EquivariantMap::new(q.space.space.clone(), f.target().clone(), fac.phi.clone()) {
        Ok(phi) => report.extend_scoped("phi", check_equivariance(&phi)),
        Err(e) => report.fail("phi_shape", vec![], e.to_string()),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn x3() -> FiniteGSpace {
        let pts = names(&["a", "b", "c"]);
        let m = FiniteMetric::from_fn(pts.clone(), MetricMode::Metric, |i, j| {
            int((i as i64 - j as i64).abs())
        })
        .unwrap();
        FiniteGSpace::new(
            m,
            GroupAction::from_generators(&pts, &[vec![2, 1, 0]]).unwrap(),
        )
        .unwrap()
    }

    fn mu_ac(x: &FiniteGSpace) -> FiniteMetric {
        FiniteMetric::from_fn(x.points().to_vec(), MetricMode::Pseudometric, |i, j| {
            int(((i == 1) != (j == 1)) as i64)
        })
        .unwrap()
    }

    #[test]
    fn merging_a_and_c() {
        let x = x3();
        let q = quotient(&x, &mu_ac(&x)).unwrap();
        assert_eq!(q.space.classes, vec![vec![0, 2], vec![1]]);
        assert_eq!(q.space.space.points(), &names(&["[a]", "[b]"]));
        assert_eq!(q.space.space.metric().d(0, 1), &int(1));
        assert!(q.space.space.action().is_trivial());
        assert_eq!(q.map.assignment, vec![0, 1, 0]);
        assert!(verify_quotient(&q).is_ok());
    }

    #[test]
    fn zero_and_full_quotients() {
        let x = x3();
        let z = quotient(&x, &FiniteMetric::zero(x.points().to_vec()).unwrap()).unwrap();
        assert_eq!(z.space.len(), 1);
        let full = quotient(&x, x.metric()).unwrap();
        assert_eq!(full.space.len(), 3);
        assert_eq!(full.map.assignment, vec![0, 1, 2]);
        assert_eq!(full.space.space.metric().matrix(), x.metric().matrix());
    }

    #[test]
    fn non_invariant_pseudometric_is_rejected() {
        let x = x3();
        let skew = FiniteMetric::from_fn(x.points().to_vec(), MetricMode::Pseudometric, |i, j| {
            int(((i == 0) != (j == 0)) as i64)
        })
        .unwrap();
        match quotient(&x, &skew) {
            Err(Error::NotInvariant(r)) => assert!(!r.is_ok()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bond_chain() {
        let x = x3();
        let zero =
            Arc::new(quotient(&x, &FiniteMetric::zero(x.points().to_vec()).unwrap()).unwrap());
        let mu = Arc::new(quotient(&x, &mu_ac(&x)).unwrap());
        let rho = Arc::new(quotient(&x, x.metric()).unwrap());

        let b = bond(&mu, &rho).unwrap();
        assert_eq!(b.assignment, vec![0, 1, 0]);
        for p in 0..3 {
            assert_eq!(b.assignment[rho.map.assignment[p]], mu.map.assignment[p]);
        }
        let id = bond(&mu, &mu).unwrap();
        assert_eq!(id.assignment, vec![0, 1]);

        let outer = bond(&zero, &mu).unwrap();
        let direct = bond(&zero, &rho).unwrap();
        assert_eq!(outer.compose(&b).unwrap(), direct);

        assert!(matches!(bond(&rho, &mu), Err(Error::OrderViolation { .. })));
    }

    #[test]
    fn corrupted_bond_is_detected() {
        let x = x3();
        let mu = Arc::new(quotient(&x, &mu_ac(&x)).unwrap());
        let rho = Arc::new(quotient(&x, x.metric()).unwrap());
        let mut b = bond(&mu, &rho).unwrap();
        b.assignment[1] = 0;
        let r = b.verify();
        assert!(r.has_check("coherence_i"));
    }

    #[test]
    fn factorize_examples() {
        let x = x3();
        let ypts = names(&["u", "v"]);
        let ym =
            FiniteMetric::from_fn(ypts, MetricMode::Metric, |i, j| int((i != j) as i64)).unwrap();
        let y = FiniteGSpace::new(
            ym.clone(),
            GroupAction::trivial(x.action().group_arc().clone(), 2),
        )
        .unwrap();
        let f = EquivariantMap::new(x.clone(), y.clone(), vec![0, 1, 0]).unwrap();
        let fac = factorize(&f, &ym).unwrap();
        assert_eq!(fac.quotient.mu, mu_ac(&x));
        assert_eq!(fac.phi, vec![0, 1]);

        let c = EquivariantMap::new(x.clone(), y, vec![1, 1, 1]).unwrap();
        let fac = factorize(&c, &ym).unwrap();
        assert_eq!(fac.quotient.space.len(), 1);
        assert_eq!(fac.phi, vec![1]);

        let id = EquivariantMap::identity(x.clone());
        let fac = factorize(&id, x.metric()).unwrap();
        assert_eq!(&fac.quotient.mu, x.metric());
        assert_eq!(fac.phi, vec![0, 1, 2]);
    }
}
