use std::collections::HashSet;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::report::ValidationReport;

/// Whether distinct points may sit at distance zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    Metric,
    Pseudometric,
}

/// A validated distance matrix over a list of named points.
///
/// Construction through [`FiniteMetric::new`] guarantees the pseudometric
/// axioms; metric mode additionally guarantees positivity off the diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteMetric {
    points: Vec<String>,
    dist: Vec<Vec<Rational>>,
}

fn check_structure(points: &[String], dist: &[Vec<Rational>]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptySpace);
    }
    let mut seen = HashSet::new();
    for p in points {
        if !seen.insert(p.as_str()) {
            return Err(Error::Dimension(format!("duplicate point id {p:?}")));
        }
    }
    if dist.len() != points.len() {
        return Err(Error::Dimension(format!(
            "{} points but {} matrix rows",
            points.len(),
            dist.len()
        )));
    }
    for (i, row) in dist.iter().enumerate() {
        if row.len() != points.len() {
            return Err(Error::Dimension(format!(
                "row {} has {} entries, expected {}",
                points[i],
                row.len(),
                points.len()
            )));
        }
    }
    Ok(())
}

/// Checks every metric axiom and reports each violation with its witnessing
/// points. Structural problems (empty point list, non-square matrix) are
/// errors rather than violations.
pub fn validate_metric(
    points: &[String],
    dist: &[Vec<Rational>],
    mode: MetricMode,
) -> Result<ValidationReport> {
    check_structure(points, dist)?;
    let n = points.len();
    let name = |i: usize| points[i].clone();
    let mut report = ValidationReport::new();

    for i in 0..n {
        if !dist[i][i].is_zero() {
            report.fail(
                "zero_diagonal",
                vec![name(i)],
                format!("d({},{}) = {}", points[i], points[i], dist[i][i]),
            );
        }
        for j in 0..n {
            if dist[i][j].is_negative() {
                report.fail(
                    "nonnegativity",
                    vec![name(i), name(j)],
                    format!("d = {}", dist[i][j]),
                );
            }
        }
        for j in (i + 1)..n {
            if dist[i][j] != dist[j][i] {
                report.fail(
                    "symmetry",
                    vec![name(i), name(j)],
                    format!("{} != {}", dist[i][j], dist[j][i]),
                );
            }
            if mode == MetricMode::Metric && dist[i][j].is_zero() {
                report.fail(
                    "positivity",
                    vec![name(i), name(j)],
                    "distinct points at distance 0",
                );
            }
        }
    }

    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let via = &dist[i][j] + &dist[j][k];
                if dist[i][k] > via {
                    report.fail(
                        "triangle",
                        vec![name(i), name(j), name(k)],
                        format!(
                            "d({},{}) = {} > {} = d({},{}) + d({},{})",
                            points[i],
                            points[k],
                            format_rational(&dist[i][k]),
                            format_rational(&via),
                            points[i],
                            points[j],
                            points[j],
                            points[k]
                        ),
                    );
                }
            }
        }
    }
    Ok(report)
}

impl FiniteMetric {
    pub fn new(points: Vec<String>, dist: Vec<Vec<Rational>>, mode: MetricMode) -> Result<Self> {
        let report = validate_metric(&points, &dist, mode)?;
        if !report.is_ok() {
            return Err(Error::InvalidMetric(report));
        }
        Ok(FiniteMetric { points, dist })
    }

    /// Builds the matrix from a distance function, then validates it.
    pub fn from_fn(
        points: Vec<String>,
        mode: MetricMode,
        mut d: impl FnMut(usize, usize) -> Rational,
    ) -> Result<Self> {
        let n = points.len();
        let dist = (0..n).map(|i| (0..n).map(|j| d(i, j)).collect()).collect();
        Self::new(points, dist, mode)
    }

    pub fn zero(points: Vec<String>) -> Result<Self> {
        Self::from_fn(points, MetricMode::Pseudometric, |_, _| Rational::zero())
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }

    pub fn diameter(&self) -> Rational {
        self.dist
            .iter()
            .flatten()
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// True when distinct points are at positive distance.
    pub fn is_metric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| ((i + 1)..n).all(|j| !self.dist[i][j].is_zero()))
    }

    /// First pair where `self` exceeds `other`, if any.
    pub fn first_excess(&self, other: &FiniteMetric) -> Option<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| self.dist[i][j] > other.dist[i][j])
    }

    /// Entrywise order; false for matrices of different size.
    pub fn leq(&self, other: &FiniteMetric) -> bool {
        self.len() == other.len() && self.first_excess(other).is_none()
    }
}

fn same_points(mu: &FiniteMetric, nu: &FiniteMetric) -> Result<()> {
    if mu.points != nu.points {
        return Err(Error::Dimension(
            "pseudometrics live on different point sets".into(),
        ));
    }
    Ok(())
}

/// `μ ≤ μ′` iff `μ(x,x′) ≤ μ′(x,x′)` for every pair.
pub fn pseudometric_leq(mu: &FiniteMetric, mu_prime: &FiniteMetric) -> Result<bool> {
    same_points(mu, mu_prime)?;
    Ok(mu.leq(mu_prime))
}

/// Entrywise maximum, the least upper bound in the entrywise order.
pub fn pseudometric_join(mu: &FiniteMetric, mu_prime: &FiniteMetric) -> Result<FiniteMetric> {
    same_points(mu, mu_prime)?;
    FiniteMetric::from_fn(mu.points.clone(), MetricMode::Pseudometric, |i, j| {
        std::cmp::max(mu.d(i, j), mu_prime.d(i, j)).clone()
    })
}
