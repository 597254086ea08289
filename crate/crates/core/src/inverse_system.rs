//! Inverse systems of quotients indexed by (pseudometric, tube radius)
//! pairs, with bonds, cones, strict verification, and diagram export.
//!
//! An entry `(μ, r)` stands for the open tube of radius `r` around the
//! embedded image of `X_μ` inside its molecule space; `r = ∞` is the whole
//! space. `(μ, r) ≤ (μ′, r′)` iff `μ ≤ μ′` and `r′ ≤ r`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ae_norm::distance_to_image;
use crate::error::{Error, Result};
use crate::gspace::{pseudometric_join, FiniteGSpace, PseudometricFamily};
use crate::molecule::{act, embed, ActionMode, BasedSpace, Molecule};
use crate::quotient::{bond, quotient, BondMap, Quotient};
use crate::rational::{format_rational, parse_rational, Rational, Q};
use crate::report::{ValidationReport, Violation};
use crate::sampling::sample_molecule;

pub const DEFAULT_JOIN_CAP: usize = 64;
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Radius {
    Finite(Rational),
    Infinite,
}

impl Radius {
    pub fn parse(s: &str) -> Result<Radius> {
        let t = s.trim();
        if matches!(t, "inf" | "∞") {
            return Ok(Radius::Infinite);
        }
        let r = parse_rational(t).map_err(|e| Error::InvalidRadius(e.to_string()))?;
        if r <= Rational::from_integer(0.into()) {
            return Err(Error::InvalidRadius(format_rational(&r)));
        }
        Ok(Radius::Finite(r))
    }
}

impl Ord for Radius {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Radius::Finite(a), Radius::Finite(b)) => a.cmp(b),
            (Radius::Finite(_), Radius::Infinite) => Ordering::Less,
            (Radius::Infinite, Radius::Finite(_)) => Ordering::Greater,
            (Radius::Infinite, Radius::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Radius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => f.write_str(&format_rational(r)),
            Radius::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Radius::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// `mu` indexes the system's (join-closed) family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub mu: usize,
    pub radius: Radius,
}

/// True iff `distance_to_image(m) < r`; always true for `∞`.
pub fn tube_contains(b: &BasedSpace, radius: &Radius, m: &Molecule) -> Result<bool> {
    m.ensure_within(b)?;
    match radius {
        Radius::Infinite => Ok(true),
        Radius::Finite(r) => Ok(distance_to_image(m, b)?.0 < *r),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemConfig {
    pub join_cap: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            join_cap: DEFAULT_JOIN_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InverseSystem {
    space: FiniteGSpace,
    family: PseudometricFamily,
    quotients: Vec<Arc<Quotient>>,
    entries: Vec<IndexEntry>,
    /// Keyed by `(λ, λ′)` with `λ ≤ λ′`; maps `X_{λ′} → X_λ`.
    bonds: BTreeMap<(usize, usize), BondMap>,
    /// `cones[λ][x] = i(p_μ(x))` in the based quotient of `λ`.
    cones: Vec<Vec<Molecule>>,
    verified: bool,
}

/// Adds `join(a,b)` members until the family is closed under pairwise join.
pub fn close_under_join(
    space: &FiniteGSpace,
    family: &PseudometricFamily,
    cap: usize,
) -> Result<PseudometricFamily> {
    let mut closed = family.clone();
    if closed.len() > cap {
        return Err(Error::JoinCapExceeded { cap });
    }
    let mut i = 0;
    while i < closed.len() {
        for j in 0..i {
            let join = pseudometric_join(closed.get(j), closed.get(i))?;
            if closed.find(&join).is_none() {
                if closed.len() >= cap {
                    return Err(Error::JoinCapExceeded { cap });
                }
                let name = format!("join({},{})", closed.name(j), closed.name(i));
                closed.push(space, name, join)?;
            }
        }
        i += 1;
    }
    Ok(closed)
}

pub fn build_system(
    space: &FiniteGSpace,
    family: &PseudometricFamily,
    radii: &[Rational],
    config: &SystemConfig,
) -> Result<InverseSystem> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let zero = Rational::from_integer(0.into());
    if let Some(r) = radii.iter().find(|r| **r <= zero) {
        return Err(Error::InvalidRadius(format_rational(r)));
    }
    let family = close_under_join(space, family, config.join_cap)?;
    let mut radii: Vec<Radius> = radii.iter().cloned().map(Radius::Finite).collect();
    radii.sort();
    radii.dedup();
    radii.push(Radius::Infinite);

    let quotients = family
        .iter()
        .map(|(_, mu)| quotient(space, mu).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let entries: Vec<IndexEntry> = (0..family.len())
        .flat_map(|mu| {
            radii.iter().map(move |r| IndexEntry {
                mu,
                radius: r.clone(),
            })
        })
        .collect();

    let mut by_mu: BTreeMap<(usize, usize), BondMap> = BTreeMap::new();
    let mut bonds = BTreeMap::new();
    for (l, el) in entries.iter().enumerate() {
        for (lp, elp) in entries.iter().enumerate() {
            if !entry_leq(&family, el, elp) {
                continue;
            }
            let b = match by_mu.get(&(el.mu, elp.mu)) {
                Some(b) => b.clone(),
                None => {
                    let b = bond(&quotients[el.mu], &quotients[elp.mu])?;
                    by_mu.insert((el.mu, elp.mu), b.clone());
                    b
                }
            };
            bonds.insert((l, lp), b);
        }
    }
    let cones = entries
        .iter()
        .map(|e| {
            let q = &quotients[e.mu];
            (0..space.len())
                .map(|x| embed(q.map.assignment[x], &q.based))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut system = InverseSystem {
        space: space.clone(),
        family,
        quotients,
        entries,
        bonds,
        cones,
        verified: false,
    };
    let report = verify_system(&system);
    if !report.is_ok() {
        return Err(Error::VerificationFailed(report));
    }
    system.verified = true;
    Ok(system)
}

fn entry_leq(family: &PseudometricFamily, a: &IndexEntry, b: &IndexEntry) -> bool {
    b.radius <= a.radius && family.get(a.mu).leq(family.get(b.mu))
}

impl InverseSystem {
    pub fn space(&self) -> &FiniteGSpace {
        &self.space
    }

    pub fn family(&self) -> &PseudometricFamily {
        &self.family
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn quotient(&self, mu: usize) -> &Arc<Quotient> {
        &self.quotients[mu]
    }

    pub fn entry_quotient(&self, l: usize) -> &Arc<Quotient> {
        &self.quotients[self.entries[l].mu]
    }

    pub fn bonds(&self) -> &BTreeMap<(usize, usize), BondMap> {
        &self.bonds
    }

    pub fn bond(&self, l: usize, lp: usize) -> Option<&BondMap> {
        self.bonds.get(&(l, lp))
    }

    /// Mutable access clears the verified flag.
    pub fn bond_mut(&mut self, l: usize, lp: usize) -> Option<&mut BondMap> {
        self.verified = false;
        self.bonds.get_mut(&(l, lp))
    }

    pub fn cone(&self, l: usize, x: usize) -> &Molecule {
        &self.cones[l][x]
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// Re-runs [`verify_system`] and updates the verified flag.
    pub fn reverify(&mut self) -> ValidationReport {
        let report = verify_system(self);
        self.verified = report.is_ok();
        report
    }

    pub fn leq(&self, l: usize, lp: usize) -> bool {
        entry_leq(&self.family, &self.entries[l], &self.entries[lp])
    }

    pub fn entry_label(&self, l: usize) -> String {
        let e = &self.entries[l];
        format!("({},{})", self.family.name(e.mu), e.radius)
    }

    pub fn entry_index(&self, mu: usize, radius: &Radius) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.mu == mu && e.radius == *radius)
    }

    /// The upper bound `(μ ∨ μ′, min(r, r′))` of two entries, if present.
    pub fn upper_bound(&self, l: usize, lp: usize) -> Option<usize> {
        let (a, b) = (&self.entries[l], &self.entries[lp]);
        let join = pseudometric_join(self.family.get(a.mu), self.family.get(b.mu)).ok()?;
        let mu = self.family.find(&join)?;
        self.entry_index(mu, &a.radius.clone().min(b.radius.clone()))
    }

    /// Strict pairs `λ < λ′` with nothing strictly between them.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.entries.len();
        let lt = |a: usize, b: usize| a != b && self.leq(a, b);
        let mut out = Vec::new();
        for l in 0..n {
            for lp in 0..n {
                if lt(l, lp) && !(0..n).any(|k| lt(l, k) && lt(k, lp)) {
                    out.push((l, lp));
                }
            }
        }
        out
    }

    pub fn tube_member(&self, l: usize, m: &Molecule) -> Result<bool> {
        let q = self.entry_quotient(l);
        tube_contains(&q.based, &self.entries[l].radius, m)
    }
}

fn labelled(report: ValidationReport, labels: &[String]) -> ValidationReport {
    let mut out = ValidationReport::new();
    for v in report.violations {
        let mut witness = labels.to_vec();
        witness.extend(v.witness);
        out.push(Violation::new(v.check, witness, v.detail));
    }
    out
}

/// Order axioms, bond presence, directedness, coherence (i) at class and
/// molecule level, coherence (ii), bond Lipschitz bounds, and equivariance of
/// bonds and cones. Every violation is listed.
pub fn verify_system(s: &InverseSystem) -> ValidationReport {
    let mut report = ValidationReport::new();
    let n = s.entries.len();
    let label = |l: usize| s.entry_label(l);
    let pts = s.space.points();

    for l in 0..n {
        if !s.leq(l, l) {
            report.fail("order_reflexive", vec![label(l)], "entry not below itself");
        }
        for lp in 0..n {
            if l != lp && s.leq(l, lp) && s.leq(lp, l) {
                report.fail(
                    "order_antisymmetric",
                    vec![label(l), label(lp)],
                    "distinct entries below each other",
                );
            }
            for k in 0..n {
                if s.leq(l, lp) && s.leq(lp, k) && !s.leq(l, k) {
                    report.fail(
                        "order_transitive",
                        vec![label(l), label(lp), label(k)],
                        "transitivity fails",
                    );
                }
            }
        }
    }

    for l in 0..n {
        for lp in 0..n {
            let expected = s.leq(l, lp);
            let present = s.bonds.contains_key(&(l, lp));
            if expected != present {
                report.fail(
                    "bond_presence",
                    vec![label(l), label(lp)],
                    format!("comparable = {expected}, bond present = {present}"),
                );
            }
            if l < lp || (l == lp && n == 1) {
                match s.upper_bound(l, lp) {
                    Some(u) if s.leq(l, u) && s.leq(lp, u) => {}
                    Some(u) => report.fail(
                        "directedness",
                        vec![label(l), label(lp), label(u)],
                        "constructed upper bound is not above both",
                    ),
                    None => report.fail(
                        "directedness",
                        vec![label(l), label(lp)],
                        "no upper bound entry in the system",
                    ),
                }
            }
        }
    }

    let group = s.space.group();
    for (l, e) in s.entries.iter().enumerate() {
        let q = &s.quotients[e.mu];
        for x in 0..s.space.len() {
            match embed(q.map.assignment[x], &q.based) {
                Ok(m) if m == s.cones[l][x] => {}
                _ => report.fail(
                    "cone_definition",
                    vec![label(l), pts[x].clone()],
                    "cone is not i∘p_μ",
                ),
            }
            for g in 0..group.order() {
                let gx = s.space.action().apply(g, x);
                match act(g, &s.cones[l][x], &q.based, ActionMode::Pushforward) {
                    Ok(m) if m == s.cones[l][gx] => {}
                    _ => report.fail(
                        "cone_equivariance",
                        vec![label(l), group.name(g).to_string(), pts[x].clone()],
                        "cone(gx) != g cone(x)",
                    ),
                }
            }
        }
    }

    for (&(l, lp), b) in &s.bonds {
        let labels = [label(l), label(lp)];
        let (el, elp) = (&s.entries[l], &s.entries[lp]);
        if *b.coarse != *s.quotients[el.mu] || *b.fine != *s.quotients[elp.mu] {
            report.fail(
                "bond_endpoints",
                labels.to_vec(),
                "bond is between the wrong quotients",
            );
            continue;
        }
        report.extend(labelled(b.verify(), &labels));
        for x in 0..s.space.len() {
            match b.linearize(&s.cones[lp][x]) {
                Ok(m) if m == s.cones[l][x] => {}
                Ok(_) => report.fail(
                    "coherence_i",
                    vec![labels[0].clone(), labels[1].clone(), pts[x].clone()],
                    "bond(cone_λ′(x)) != cone_λ(x)",
                ),
                Err(e) => report.fail(
                    "coherence_i",
                    vec![labels[0].clone(), labels[1].clone(), pts[x].clone()],
                    e.to_string(),
                ),
            }
        }
    }

    for (&(l, lp), outer) in &s.bonds {
        for (&(lp2, k), inner) in s.bonds.range((lp, 0)..(lp + 1, 0)) {
            debug_assert_eq!(lp2, lp);
            let Some(direct) = s.bonds.get(&(l, k)) else {
                continue;
            };
            let composed: Vec<usize> = inner
                .assignment
                .iter()
                .map(|&c| outer.assignment.get(c).copied().unwrap_or(usize::MAX))
                .collect();
            if composed != direct.assignment {
                report.fail(
                    "coherence_ii",
                    vec![label(l), label(lp), label(k)],
                    "bond(λ,λ′)∘bond(λ′,λ″) != bond(λ,λ″)",
                );
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TubeSoundness {
    pub bonds_checked: usize,
    pub samples_checked: usize,
    pub report: ValidationReport,
}

/// For every bond `λ ≤ λ′`, samples molecules over `X_{λ′}` and checks that
/// the linearized bond does not increase the distance to the image, and that
/// membership in the `λ′` tube implies membership in the `λ` tube.
pub fn check_tube_soundness(s: &InverseSystem, samples: usize, seed: u64) -> Result<TubeSoundness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ValidationReport::new();
    let mut samples_checked = 0;
    for (&(l, lp), b) in &s.bonds {
        let radius = &s.entries[l].radius;
        let radius_p = &s.entries[lp].radius;
        for _ in 0..samples {
            let m = sample_molecule(&mut rng, &b.fine.based, 4);
            let image = b.linearize(&m)?;
            let (d_fine, _) = distance_to_image(&m, &b.fine.based)?;
            let (d_coarse, _) = distance_to_image(&image, &b.coarse.based)?;
            let witness = || {
                let coeffs: Vec<String> = m
                    .named(&b.fine.based)
                    .map(|(p, c)| format!("{p}:{}", format_rational(c)))
                    .collect();
                vec![s.entry_label(l), s.entry_label(lp), coeffs.join(",")]
            };
            if d_coarse > d_fine {
                report.fail(
                    "tube_distance",
                    witness(),
                    format!(
                        "{} > {}",
                        format_rational(&d_coarse),
                        format_rational(&d_fine)
                    ),
                );
            }
            let inside = |d: &Rational, r: &Radius| match r {
                Radius::Infinite => true,
                Radius::Finite(r) => d < r,
            };
            if inside(&d_fine, radius_p) && !inside(&d_coarse, radius) {
                report.fail("tube_order", witness(), "the bond leaves the coarser tube");
            }
            samples_checked += 1;
        }
    }
    Ok(TubeSoundness {
        bonds_checked: s.bonds.len(),
        samples_checked,
        report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDoc {
    pub id: String,
    pub mu: String,
    pub radius: Radius,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientDoc {
    pub classes: IndexMap<String, Vec<String>>,
    pub metric: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondDoc {
    /// Entry id of `λ′`.
    pub from: String,
    /// Entry id of `λ`.
    pub to: String,
    pub covering: bool,
    pub assignment: IndexMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub points: Vec<String>,
    pub family: IndexMap<String, Vec<Vec<Q>>>,
    pub quotients: IndexMap<String, QuotientDoc>,
    pub entries: Vec<EntryDoc>,
    pub bonds: Vec<BondDoc>,
    /// Entry id to the class of each point.
    pub cones: IndexMap<String, IndexMap<String, String>>,
}

impl InverseSystem {
    pub fn to_doc(&self) -> SystemDoc {
        let q_metric = |m: &crate::gspace::FiniteMetric| {
            m.matrix()
                .iter()
                .map(|row| row.iter().cloned().map(Q).collect())
                .collect()
        };
        let family = self
            .family
            .iter()
            .map(|(n, m)| (n.to_string(), q_metric(m)))
            .collect();
        let quotients = self
            .family
            .iter()
            .zip(&self.quotients)
            .map(|((n, _), q)| {
                let names = q.space.space.points();
                let classes = q
                    .space
                    .classes
                    .iter()
                    .enumerate()
                    .map(|(c, cl)| {
                        (
                            names[c].clone(),
                            cl.iter().map(|&p| self.space.points()[p].clone()).collect(),
                        )
                    })
                    .collect();
                (
                    n.to_string(),
                    QuotientDoc {
                        classes,
                        metric: q_metric(q.space.space.metric()),
                    },
                )
            })
            .collect();
        let entries = (0..self.entries.len())
            .map(|l| EntryDoc {
                id: self.entry_label(l),
                mu: self.family.name(self.entries[l].mu).to_string(),
                radius: self.entries[l].radius.clone(),
            })
            .collect();
        let covering = self.covering_pairs();
        let bonds = self
            .bonds
            .iter()
            .map(|(&(l, lp), b)| BondDoc {
                from: self.entry_label(lp),
                to: self.entry_label(l),
                covering: covering.contains(&(l, lp)),
                assignment: b
                    .assignment
                    .iter()
                    .enumerate()
                    .map(|(c, &t)| {
                        (
                            b.fine.space.space.points()[c].clone(),
                            b.coarse.space.space.points()[t].clone(),
                        )
                    })
                    .collect(),
            })
            .collect();
        let cones = (0..self.entries.len())
            .map(|l| {
                let q = self.entry_quotient(l);
                let names = q.space.space.points();
                (
                    self.entry_label(l),
                    self.space
                        .points()
                        .iter()
                        .zip(&q.map.assignment)
                        .map(|(p, &c)| (p.clone(), names[c].clone()))
                        .collect(),
                )
            })
            .collect();
        SystemDoc {
            points: self.space.points().to_vec(),
            family,
            quotients,
            entries,
            bonds,
            cones,
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph system {\n");
        for l in 0..self.entries.len() {
            out.push_str(&format!(
                "  n{l} [label=\"{}\"];\n",
                self.entry_label(l).replace('"', "\\\"")
            ));
        }
        for (l, lp) in self.covering_pairs() {
            out.push_str(&format!("  n{lp} -> n{l};\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// Refuses unverified systems.
pub fn export_system(s: &InverseSystem, format: ExportFormat) -> Result<String> {
    if !s.verified {
        return Err(Error::Unverified);
    }
    Ok(match format {
        ExportFormat::Dot => s.to_dot(),
        ExportFormat::Json => {
            let mut text = serde_json::to_string_pretty(&s.to_doc()).expect("serializable");
            text.push('\n');
            text
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gspace::{FiniteMetric, GroupAction, MetricMode};
    use crate::rational::{int, ratio};

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

    fn chain(x: &FiniteGSpace) -> PseudometricFamily {
        let pts = x.points().to_vec();
        let mu = FiniteMetric::from_fn(pts.clone(), MetricMode::Pseudometric, |i, j| {
            int(((i == 1) != (j == 1)) as i64)
        })
        .unwrap();
        PseudometricFamily::ingest(
            x,
            vec![
                ("zero".to_string(), FiniteMetric::zero(pts).unwrap()),
                ("mu".to_string(), mu),
                ("rho".to_string(), x.metric().clone()),
            ],
        )
        .unwrap()
        .0
    }

    #[test]
    fn chain_with_one_radius() {
        let x = x3();
        let s = build_system(&x, &chain(&x), &[int(1)], &SystemConfig::default()).unwrap();
        assert_eq!(s.entries().len(), 6);
        let mut comparable = 0;
        for l in 0..6 {
            for lp in 0..6 {
                let (a, b) = (&s.entries()[l], &s.entries()[lp]);
                let expected = a.mu <= b.mu && b.radius <= a.radius;
                assert_eq!(s.leq(l, lp), expected);
                assert_eq!(s.bond(l, lp).is_some(), expected);
                comparable += expected as usize;
            }
        }
        assert_eq!(comparable, 18);
        assert!(verify_system(&s).is_ok());
        assert_eq!(s.covering_pairs().len(), 7);
    }

    #[test]
    fn chain_without_radii_is_a_path() {
        let x = x3();
        let s = build_system(&x, &chain(&x), &[], &SystemConfig::default()).unwrap();
        let dot = export_system(&s, ExportFormat::Dot).unwrap();
        assert_eq!(
            dot,
            "digraph system {\n  n0 [label=\"(zero,inf)\"];\n  n1 [label=\"(mu,inf)\"];\n  n2 [label=\"(rho,inf)\"];\n  n1 -> n0;\n  n2 -> n1;\n}\n"
        );
    }

    #[test]
    fn single_zero_member() {
        let x = x3();
        let (fam, _) = PseudometricFamily::ingest(
            &x,
            vec![(
                "zero".to_string(),
                FiniteMetric::zero(x.points().to_vec()).unwrap(),
            )],
        )
        .unwrap();
        let s = build_system(&x, &fam, &[], &SystemConfig::default()).unwrap();
        assert_eq!(s.entries().len(), 1);
        assert_eq!(s.bond(0, 0).unwrap().assignment, vec![0]);
        assert_eq!(
            export_system(&s, ExportFormat::Dot).unwrap(),
            "digraph system {\n  n0 [label=\"(zero,inf)\"];\n}\n"
        );
    }

    #[test]
    fn incomparable_pair_gets_its_join() {
        let x = x3();
        let pts = x.points().to_vec();
        let mk = |ab: Rational, ac: Rational, bc: Rational| {
            FiniteMetric::from_fn(pts.clone(), MetricMode::Pseudometric, |i, j| {
                match (i.min(j), i.max(j)) {
                    (0, 1) => ab.clone(),
                    (0, 2) => ac.clone(),
                    (1, 2) => bc.clone(),
                    _ => int(0),
                }
            })
            .unwrap()
        };
        let mu1 = mk(int(1), int(0), int(1));
        let mu2 = mk(ratio(1, 2), int(1), ratio(1, 2));
        let (fam, _) = PseudometricFamily::ingest(
            &x,
            vec![("mu1".to_string(), mu1), ("mu2".to_string(), mu2)],
        )
        .unwrap();
        let s = build_system(&x, &fam, &[int(1)], &SystemConfig::default()).unwrap();
        assert_eq!(s.family().len(), 3);
        assert_eq!(s.family().name(2), "join(mu1,mu2)");
        assert_eq!(s.family().get(2), &mk(int(1), int(1), int(1)));
        assert!(verify_system(&s).is_ok());

        let capped = build_system(&x, &fam, &[], &SystemConfig { join_cap: 2 });
        assert!(matches!(capped, Err(Error::JoinCapExceeded { cap: 2 })));
    }

    #[test]
    fn corrupted_bond_is_pinpointed_and_export_refused() {
        let x = x3();
        let mut s = build_system(&x, &chain(&x), &[int(1)], &SystemConfig::default()).unwrap();
        let mu_inf = s.entry_index(1, &Radius::Infinite).unwrap();
        let rho_inf = s.entry_index(2, &Radius::Infinite).unwrap();
        s.bond_mut(mu_inf, rho_inf).unwrap().assignment[1] = 0;
        let report = s.reverify();
        let hits: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.check == "coherence_i")
            .collect();
        assert!(!hits.is_empty());
        assert!(hits
            .iter()
            .all(|v| v.witness[0] == "(mu,inf)" && v.witness[1] == "(rho,inf)"));
        assert!(matches!(
            export_system(&s, ExportFormat::Json),
            Err(Error::Unverified)
        ));
    }

    #[test]
    fn tube_membership() {
        let x = x3();
        let s = build_system(&x, &chain(&x), &[int(1), int(2)], &SystemConfig::default()).unwrap();
        let rho = s.quotient(2).clone();
        // i(a) + (a − b): nearest image point is a, residue a − b
        let star = rho.based.basepoint();
        let m = Molecule::from_coeffs([(0, int(2)), (1, int(-1)), (star, int(-1))]).unwrap();
        assert_eq!(distance_to_image(&m, &rho.based).unwrap(), (int(1), 0));
        let oracle = (0..3)
            .map(|x| {
                let e = embed(x, &rho.based).unwrap();
                let r = crate::molecule::combine(&int(1), &m, &int(-1), &e);
                crate::ae_norm::brute_force_norm(&r, &rho.based).unwrap()
            })
            .min()
            .unwrap();
        assert_eq!(oracle, int(1));
        let at = |r: Radius| s.entry_index(2, &r).unwrap();
        assert!(s.tube_member(at(Radius::Finite(int(2))), &m).unwrap());
        assert!(!s.tube_member(at(Radius::Finite(int(1))), &m).unwrap());
        assert!(s.tube_member(at(Radius::Infinite), &m).unwrap());
        for l in 0..s.entries().len() {
            for x in 0..3 {
                assert!(s.tube_member(l, s.cone(l, x)).unwrap());
            }
        }
    }

    #[test]
    fn tube_soundness_and_deterministic_export() {
        let x = x3();
        let s = build_system(&x, &chain(&x), &[int(1)], &SystemConfig::default()).unwrap();
        let t = check_tube_soundness(&s, 16, 3).unwrap();
        assert!(t.report.is_ok(), "{}", t.report);
        assert_eq!(t.samples_checked, 16 * s.bonds().len());
        let a = export_system(&s, ExportFormat::Json).unwrap();
        assert_eq!(a, export_system(&s, ExportFormat::Json).unwrap());
        let doc: SystemDoc = serde_json::from_str(&a).unwrap();
        assert_eq!(doc, s.to_doc());
    }

    #[test]
    fn radius_parsing() {
        assert_eq!(Radius::parse("inf").unwrap(), Radius::Infinite);
        assert_eq!(Radius::parse("3/2").unwrap(), Radius::Finite(ratio(3, 2)));
        assert!(Radius::parse("0").is_err());
        assert!(Radius::parse("-1").is_err());
    }
}
