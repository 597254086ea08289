use std::sync::Arc;

use super::group::{check_permutation, compose, FiniteGroup, DEFAULT_ORDER_CAP};
use super::metric::FiniteMetric;
use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// An action of a finite group on `n` points by permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    group: Arc<FiniteGroup>,
    n: usize,
    perms: Vec<Vec<usize>>,
}

/// Checks `perm(e) = id` and `perm(g)∘perm(h) = perm(gh)`.
///
/// Permutations of the wrong length, or a wrong number of them, are
/// structural errors; axiom failures are listed in the report with the
/// witnessing `(g, h, x)`.
pub fn validate_action(
    group: &FiniteGroup,
    points: &[String],
    perms: &[Vec<usize>],
) -> Result<ValidationReport> {
    let n = points.len();
    if perms.len() != group.order() {
        return Err(Error::Dimension(format!(
            "{} permutations for a group of order {}",
            perms.len(),
            group.order()
        )));
    }
    for (g, p) in perms.iter().enumerate() {
        check_permutation(p, n)
            .map_err(|m| Error::NotAPermutation(format!("element {}: {m}", group.name(g))))?;
    }
    let mut report = ValidationReport::new();
    let e = group.identity();
    for x in 0..n {
        if perms[e][x] != x {
            report.fail(
                "identity_action",
                vec![group.name(e).to_string(), points[x].clone()],
                format!("ex = {} != {}", points[perms[e][x]], points[x]),
            );
        }
    }
    for g in 0..group.order() {
        for h in 0..group.order() {
            let gh = group.mul(g, h);
            for x in 0..n {
                let lhs = perms[g][perms[h][x]];
                let rhs = perms[gh][x];
                if lhs != rhs {
                    report.fail(
                        "compatibility",
                        vec![
                            group.name(g).to_string(),
                            group.name(h).to_string(),
                            points[x].clone(),
                        ],
                        format!("g(hx) = {} != (gh)x = {}", points[lhs], points[rhs]),
                    );
                }
            }
        }
    }
    Ok(report)
}

impl GroupAction {
    pub fn new(group: Arc<FiniteGroup>, points: &[String], perms: Vec<Vec<usize>>) -> Result<Self> {
        let report = validate_action(&group, points, &perms)?;
        if !report.is_ok() {
            return Err(Error::InvalidAction(report));
        }
        Ok(GroupAction {
            group,
            n: points.len(),
            perms,
        })
    }

    pub fn trivial(group: Arc<FiniteGroup>, n: usize) -> Self {
        let perms = vec![(0..n).collect(); group.order()];
        GroupAction { group, n, perms }
    }

    /// Closes permutation generators into a group acting on `points`.
    pub fn from_generators(points: &[String], generators: &[Vec<usize>]) -> Result<Self> {
        Self::from_generators_capped(points, generators, DEFAULT_ORDER_CAP)
    }

    pub fn from_generators_capped(
        points: &[String],
        generators: &[Vec<usize>],
        cap: usize,
    ) -> Result<Self> {
        let (group, perms) = FiniteGroup::generated_by(points, generators, cap)?;
        Ok(GroupAction {
            group: Arc::new(group),
            n: points.len(),
            perms,
        })
    }

    /// Extends an assignment of permutations to the generators of a
    /// generator-presented group along its spanning words, then validates
    /// that the result really is an action.
    pub fn from_generator_images(
        group: Arc<FiniteGroup>,
        points: &[String],
        images: &[Vec<usize>],
    ) -> Result<Self> {
        let pres = group
            .presentation()
            .ok_or_else(|| Error::GroupMismatch("group is not presented by generators".into()))?;
        if images.len() != pres.generators.len() {
            return Err(Error::Dimension(format!(
                "{} generator images for {} generators",
                images.len(),
                pres.generators.len()
            )));
        }
        let n = points.len();
        for (s, p) in images.iter().enumerate() {
            check_permutation(p, n)
                .map_err(|m| Error::NotAPermutation(format!("generator {s}: {m}")))?;
        }
        let mut perms: Vec<Vec<usize>> = vec![Vec::new(); group.order()];
        perms[group.identity()] = (0..n).collect();
        // spanning words are recorded in breadth-first order, so `prev` is
        // always filled before `k`
        for (k, step) in pres.spanning.iter().enumerate() {
            if let Some((s, prev)) = *step {
                perms[k] = compose(&images[s], &perms[prev]);
            }
        }
        Self::new(group, points, perms)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn group_arc(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.perms[g][x]
    }

    pub fn perm(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn is_trivial(&self) -> bool {
        self.perms
            .iter()
            .all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
    }

    /// Group elements fixing `x`.
    pub fn stabilizer(&self, x: usize) -> Vec<usize> {
        (0..self.group.order())
            .filter(|&g| self.perms[g][x] == x)
            .collect()
    }

    /// Orbits in order of their least point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for x in 0..self.n {
            if seen[x] {
                continue;
            }
            let mut orbit: Vec<usize> = self.perms.iter().map(|p| p[x]).collect();
            orbit.sort_unstable();
            orbit.dedup();
            for &y in &orbit {
                seen[y] = true;
            }
            out.push(orbit);
        }
        out
    }
}

/// Lists every `(g, x, x′)` with `m(gx, gx′) ≠ m(x, x′)`.
pub fn check_invariance(m: &FiniteMetric, a: &GroupAction) -> Result<ValidationReport> {
    if m.len() != a.point_count() {
        return Err(Error::Dimension(format!(
            "matrix over {} points, action over {}",
            m.len(),
            a.point_count()
        )));
    }
    let pts = m.points();
    let mut report = ValidationReport::new();
    for g in 0..a.group().order() {
        for x in 0..m.len() {
            for y in (x + 1)..m.len() {
                let moved = m.d(a.apply(g, x), a.apply(g, y));
                if moved != m.d(x, y) {
                    report.fail(
                        "invariance",
                        vec![
                            a.group().name(g).to_string(),
                            pts[x].clone(),
                            pts[y].clone(),
                        ],
                        format!("d(gx,gx') = {moved} != d(x,x') = {}", m.d(x, y)),
                    );
                }
            }
        }
    }
    Ok(report)
}

/// Points fixed by every group element (checked on generators when the
/// group is generator-presented).
pub fn fixed_point_set(a: &GroupAction) -> Vec<usize> {
    let gens = a.group().generating_set();
    (0..a.point_count())
        .filter(|&x| gens.iter().all(|&g| a.apply(g, x) == x))
        .collect()
}
