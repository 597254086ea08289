use super::action::check_invariance;
use super::metric::{validate_metric, FiniteMetric, MetricMode};
use super::space::FiniteGSpace;
use crate::error::{Error, Result};

/// A named, deduplicated list of invariant pseudometrics on one G-space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudometricFamily {
    points: Vec<String>,
    members: Vec<(String, FiniteMetric)>,
}

impl PseudometricFamily {
    pub fn new(base: &FiniteGSpace) -> Self {
        PseudometricFamily {
            points: base.points().to_vec(),
            members: Vec::new(),
        }
    }

    /// Ingests members in order. Duplicates (entrywise equal to an earlier
    /// member) are dropped; the returned list pairs each dropped name with
    /// the name it collapsed onto.
    pub fn ingest(
        base: &FiniteGSpace,
        named: impl IntoIterator<Item = (String, FiniteMetric)>,
    ) -> Result<(Self, Vec<(String, String)>)> {
        let mut family = Self::new(base);
        let mut dropped = Vec::new();
        for (name, mu) in named {
            let idx = family.push(base, name.clone(), mu)?;
            if family.members[idx].0 != name {
                dropped.push((name, family.members[idx].0.clone()));
            }
        }
        Ok((family, dropped))
    }

    /// Validates and adds a member, returning its index (the index of the
    /// equal earlier member if it is a duplicate).
    pub fn push(&mut self, base: &FiniteGSpace, name: String, mu: FiniteMetric) -> Result<usize> {
        if mu.points() != self.points.as_slice() {
            return Err(Error::field(
                name,
                "pseudometric is not over the base point set",
            ));
        }
        let report = validate_metric(mu.points(), mu.matrix(), MetricMode::Pseudometric)?;
        if !report.is_ok() {
            return Err(Error::InvalidMetric(report).in_field(name));
        }
        let inv = check_invariance(&mu, base.action())?;
        if !inv.is_ok() {
            return Err(Error::NotInvariant(inv).in_field(name));
        }
        if let Some(i) = self.find(&mu) {
            return Ok(i);
        }
        if self.members.iter().any(|(n, _)| *n == name) {
            return Err(Error::field(name, "duplicate pseudometric name"));
        }
        self.members.push((name, mu));
        Ok(self.members.len() - 1)
    }

    pub fn find(&self, mu: &FiniteMetric) -> Option<usize> {
        self.members.iter().position(|(_, m)| m == mu)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.members.iter().position(|(n, _)| n == name)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.members[i].0
    }

    pub fn get(&self, i: usize) -> &FiniteMetric {
        &self.members[i].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FiniteMetric)> {
        self.members.iter().map(|(n, m)| (n.as_str(), m))
    }
}
