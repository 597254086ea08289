use std::sync::Arc;

use super::action::{check_invariance, GroupAction};
use super::group::FiniteGroup;
use super::metric::{FiniteMetric, MetricMode};
use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// A finite metric space with an isometric group action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGSpace {
    metric: FiniteMetric,
    action: GroupAction,
}

impl FiniteGSpace {
    /// Requires a genuine metric (positive off the diagonal) that is
    /// invariant under the action.
    pub fn new(metric: FiniteMetric, action: GroupAction) -> Result<Self> {
        if !metric.is_metric() {
            let report = super::metric::validate_metric(
                metric.points(),
                metric.matrix(),
                MetricMode::Metric,
            )?;
            return Err(Error::InvalidMetric(report));
        }
        let report = check_invariance(&metric, &action)?;
        if !report.is_ok() {
            return Err(Error::NotInvariant(report));
        }
        Ok(FiniteGSpace { metric, action })
    }

    /// The space with the trivial group acting.
    pub fn with_trivial_action(metric: FiniteMetric) -> Result<Self> {
        let n = metric.len();
        Self::new(
            metric,
            GroupAction::trivial(Arc::new(FiniteGroup::trivial()), n),
        )
    }

    pub fn metric(&self) -> &FiniteMetric {
        &self.metric
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn group(&self) -> &FiniteGroup {
        self.action.group()
    }

    pub fn points(&self) -> &[String] {
        self.metric.points()
    }

    pub fn len(&self) -> usize {
        self.metric.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metric.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.metric.index_of(name)
    }
}

/// A point map between two G-spaces over the same group. Construction only
/// checks shapes; [`check_equivariance`] decides whether it commutes with
/// the actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivariantMap {
    source: FiniteGSpace,
    target: FiniteGSpace,
    image: Vec<usize>,
}

impl EquivariantMap {
    pub fn new(source: FiniteGSpace, target: FiniteGSpace, image: Vec<usize>) -> Result<Self> {
        if source.group() != target.group() {
            return Err(Error::GroupMismatch(
                "source and target are acted on by different groups".into(),
            ));
        }
        if image.len() != source.len() {
            return Err(Error::Dimension(format!(
                "map has {} images for {} source points",
                image.len(),
                source.len()
            )));
        }
        if let Some(&y) = image.iter().find(|&&y| y >= target.len()) {
            return Err(Error::Dimension(format!("image index {y} out of range")));
        }
        Ok(EquivariantMap {
            source,
            target,
            image,
        })
    }

    pub fn identity(space: FiniteGSpace) -> Self {
        let image = (0..space.len()).collect();
        EquivariantMap {
            source: space.clone(),
            target: space,
            image,
        }
    }

    pub fn source(&self) -> &FiniteGSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteGSpace {
        &self.target
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }
}

/// Lists every `(g, x)` with `f(gx) ≠ g f(x)`.
pub fn check_equivariance(f: &EquivariantMap) -> ValidationReport {
    let src = f.source.action();
    let tgt = f.target.action();
    let group = src.group();
    let mut report = ValidationReport::new();
    for g in 0..group.order() {
        for x in 0..f.source.len() {
            let lhs = f.apply(src.apply(g, x));
            let rhs = tgt.apply(g, f.apply(x));
            if lhs != rhs {
                report.fail(
                    "equivariance",
                    vec![group.name(g).to_string(), f.source.points()[x].clone()],
                    format!(
                        "f(gx) = {} != g f(x) = {}",
                        f.target.points()[lhs],
                        f.target.points()[rhs]
                    ),
                );
            }
        }
    }
    report
}

/// `μ(x, x′) = ρ_Y(f(x), f(x′))`.
pub fn pullback_pseudometric(f: &EquivariantMap, rho_y: &FiniteMetric) -> Result<FiniteMetric> {
    if rho_y.len() != f.target.len() {
        return Err(Error::Dimension(format!(
            "target metric over {} points, map target has {}",
            rho_y.len(),
            f.target.len()
        )));
    }
    let eq = check_equivariance(f);
    if !eq.is_ok() {
        return Err(Error::NotEquivariant(eq));
    }
    let inv = check_invariance(rho_y, f.target.action())?;
    if !inv.is_ok() {
        return Err(Error::NotInvariant(inv));
    }
    FiniteMetric::from_fn(
        f.source.points().to_vec(),
        MetricMode::Pseudometric,
        |i, j| rho_y.d(f.apply(i), f.apply(j)).clone(),
    )
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
        let a = GroupAction::from_generators(&pts, &[vec![2, 1, 0]]).unwrap();
        FiniteGSpace::new(m, a).unwrap()
    }

    fn y2(x: &FiniteGSpace) -> FiniteGSpace {
        let pts = names(&["u", "v"]);
        let m =
            FiniteMetric::from_fn(pts, MetricMode::Metric, |i, j| int((i != j) as i64)).unwrap();
        let a = GroupAction::trivial(x.action().group_arc().clone(), 2);
        FiniteGSpace::new(m, a).unwrap()
    }

    #[test]
    fn orbit_collapsing_map_is_equivariant() {
        let x = x3();
        let f = EquivariantMap::new(x.clone(), y2(&x), vec![0, 1, 0]).unwrap();
        assert!(check_equivariance(&f).is_ok());
    }

    #[test]
    fn orbit_splitting_map_is_not() {
        let x = x3();
        let f = EquivariantMap::new(x.clone(), y2(&x), vec![0, 1, 1]).unwrap();
        let r = check_equivariance(&f);
        assert!(r
            .violations
            .iter()
            .any(|v| v.witness == names(&["(a c)", "a"])));
        assert!(matches!(
            pullback_pseudometric(&f, y2(&x).metric()),
            Err(Error::NotEquivariant(_))
        ));
    }

    #[test]
    fn identity_is_equivariant_and_pulls_back_rho() {
        let f = EquivariantMap::identity(x3());
        assert!(check_equivariance(&f).is_ok());
        assert_eq!(
            &pullback_pseudometric(&f, x3().metric()).unwrap(),
            x3().metric()
        );
    }

    #[test]
    fn pullback_examples() {
        let x = x3();
        let y = y2(&x);
        let f = EquivariantMap::new(x.clone(), y.clone(), vec![0, 1, 0]).unwrap();
        let mu = pullback_pseudometric(&f, y.metric()).unwrap();
        assert_eq!(mu.d(0, 2), &int(0));
        assert_eq!(mu.d(0, 1), &int(1));
        assert_eq!(mu.d(1, 2), &int(1));

        let c = EquivariantMap::new(x.clone(), y.clone(), vec![1, 1, 1]).unwrap();
        let z = pullback_pseudometric(&c, y.metric()).unwrap();
        assert_eq!(z, FiniteMetric::zero(x.points().to_vec()).unwrap());
    }

    #[test]
    fn groups_must_match() {
        let x = x3();
        let other = FiniteGSpace::with_trivial_action(y2(&x).metric().clone()).unwrap();
        assert!(matches!(
            EquivariantMap::new(x, other, vec![0, 0, 0]),
            Err(Error::GroupMismatch(_))
        ));
    }

    #[test]
    fn gspace_requires_invariant_metric() {
        let pts = names(&["a", "b", "c"]);
        let m = FiniteMetric::new(
            pts.clone(),
            vec![
                vec![int(0), int(1), int(3)],
                vec![int(1), int(0), int(2)],
                vec![int(3), int(2), int(0)],
            ],
            MetricMode::Metric,
        )
        .unwrap();
        let a = GroupAction::from_generators(&pts, &[vec![2, 1, 0]]).unwrap();
        assert!(matches!(
            FiniteGSpace::new(m, a),
            Err(Error::NotInvariant(_))
        ));
    }
}
