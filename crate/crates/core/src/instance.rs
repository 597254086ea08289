//! The JSON instance document: one finite G-space with named pseudometrics,
//! equivariant maps and molecules.
//!
//! ```json
//! {
//!   "points": ["a", "b", "c"],
//!   "metric": [[0, 1, 2], [1, 0, 1], [2, 1, 0]],
//!   "group": {"generators": [[2, 1, 0]]},
//!   "pseudometrics": {"mu1": [[0, 1, 0], [1, 0, 1], [0, 1, 0]]},
//!   "maps": {"f": {"target": {"points": ["u", "v"], "metric": [[0, 1], [1, 0]]},
//!                  "image": {"a": "u", "b": "v", "c": "u"}}},
//!   "molecules": {"m": {"a": 1, "b": -2, "c": 1}}
//! }
//! ```
//!
//! Groups are given either by generators (permutations as index lists) or
//! by a multiplication table over element ids together with an `action`
//! map from element id to permutation. A map target's action is given by
//! `generator_images` or `action` respectively, and is trivial if omitted.
//! Rationals are integers or `"p/q"` strings.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gspace::{
    check_equivariance, check_invariance, validate_group_table, validate_metric, EquivariantMap,
    FiniteGSpace, FiniteGroup, FiniteMetric, GroupAction, MetricMode, PseudometricFamily,
};
use crate::molecule::{BasedSpace, Molecule, STAR};
use crate::quotient::{Factorization, Quotient};
use crate::rational::{Rational, Q};
use crate::report::ValidationReport;

pub type Matrix = Vec<Vec<Q>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub points: Vec<String>,
    pub metric: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<IndexMap<String, Vec<usize>>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub pseudometrics: IndexMap<String, Matrix>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub maps: IndexMap<String, MapDoc>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub molecules: IndexMap<String, IndexMap<String, Q>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupDoc {
    Generators {
        generators: Vec<Vec<usize>>,
    },
    Table {
        elements: Vec<String>,
        table: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub target: TargetDoc,
    pub image: IndexMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDoc {
    pub points: Vec<String>,
    pub metric: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<IndexMap<String, Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_images: Option<Vec<Vec<usize>>>,
}

pub fn parse_document(text: &str) -> Result<InstanceDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn matrix(m: &Matrix) -> Vec<Vec<Rational>> {
    m.iter()
        .map(|row| row.iter().map(|q| q.0.clone()).collect())
        .collect()
}

fn to_matrix(m: &FiniteMetric) -> Matrix {
    m.matrix()
        .iter()
        .map(|row| row.iter().cloned().map(Q).collect())
        .collect()
}

/// A fully validated document.
#[derive(Debug, Clone)]
pub struct Instance {
    pub doc: InstanceDocument,
    pub space: FiniteGSpace,
    pub pseudometrics: IndexMap<String, FiniteMetric>,
    pub maps: IndexMap<String, EquivariantMap>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasepointMode {
    Adjoined,
    Internal,
}

fn perms_by_element(
    group: &FiniteGroup,
    action: &IndexMap<String, Vec<usize>>,
    field: &str,
) -> Result<Vec<Vec<usize>>> {
    if let Some(k) = action.keys().find(|k| group.index_of(k).is_none()) {
        return Err(Error::field(field, format!("unknown group element {k:?}")));
    }
    group
        .elements()
        .iter()
        .map(|g| {
            action
                .get(g)
                .cloned()
                .ok_or_else(|| Error::field(field, format!("no permutation for element {g:?}")))
        })
        .collect()
}

/// Builds an action, turning axiom failures into report entries.
fn action_or_report(
    built: Result<GroupAction>,
    scope: &str,
    field: &str,
    report: &mut ValidationReport,
) -> Result<Option<GroupAction>> {
    match built {
        Ok(a) => Ok(Some(a)),
        Err(Error::InvalidAction(r)) => {
            report.extend_scoped(scope, r);
            Ok(None)
        }
        Err(e) => Err(e.in_field(field)),
    }
}

impl InstanceDocument {
    /// Every axiom failure in the document. Structural problems (shape,
    /// unknown ids, non-permutations) are errors naming the field.
    pub fn validate(&self) -> Result<ValidationReport> {
        Ok(self.process()?.0)
    }

    pub fn build(&self) -> Result<Instance> {
        let (report, inst) = self.process()?;
        match inst {
            Some(i) if report.is_ok() => Ok(i),
            _ => Err(Error::InvalidInstance(report)),
        }
    }

    fn process(&self) -> Result<(ValidationReport, Option<Instance>)> {
        let mut report = ValidationReport::new();
        let points = &self.points;
        if points.iter().any(|p| p == STAR) {
            return Err(Error::field(
                "points",
                format!("{STAR:?} is reserved for the adjoined basepoint"),
            ));
        }
        let dist = matrix(&self.metric);
        let metric_report =
            validate_metric(points, &dist, MetricMode::Metric).map_err(|e| e.in_field("metric"))?;
        let metric_ok = metric_report.is_ok();
        report.extend_scoped("metric", metric_report);

        let action = match &self.group {
            None => {
                if self.action.is_some() {
                    return Err(Error::field("action", "an action needs a group"));
                }
                Some(GroupAction::trivial(
                    Arc::new(FiniteGroup::trivial()),
                    points.len(),
                ))
            }
            Some(GroupDoc::Generators { generators }) => {
                if self.action.is_some() {
                    return Err(Error::field(
                        "action",
                        "omit the action for generator-presented groups",
                    ));
                }
                Some(
                    GroupAction::from_generators(points, generators)
                        .map_err(|e| e.in_field("group.generators"))?,
                )
            }
            Some(GroupDoc::Table { elements, table }) => {
                let idx = |name: &String| {
                    elements.iter().position(|e| e == name).ok_or_else(|| {
                        Error::field("group.table", format!("unknown group element {name:?}"))
                    })
                };
                let table = table
                    .iter()
                    .map(|row| row.iter().map(idx).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let group_report =
                    validate_group_table(elements, &table).map_err(|e| e.in_field("group"))?;
                if !group_report.is_ok() {
                    report.extend_scoped("group", group_report);
                    return Ok((report, None));
                }
                let group = Arc::new(FiniteGroup::from_table(elements.clone(), table)?);
                let action_doc = self
                    .action
                    .as_ref()
                    .ok_or_else(|| Error::field("action", "table groups need an action"))?;
                let perms = perms_by_element(&group, action_doc, "action")?;
                action_or_report(
                    GroupAction::new(group, points, perms),
                    "action",
                    "action",
                    &mut report,
                )?
            }
        };

        let space = match (&action, metric_ok) {
            (Some(a), true) => {
                let m = FiniteMetric::new(points.clone(), dist, MetricMode::Metric)?;
                let inv = check_invariance(&m, a)?;
                let ok = inv.is_ok();
                report.extend_scoped("invariance", inv);
                ok.then(|| FiniteGSpace::new(m, a.clone())).transpose()?
            }
            _ => None,
        };

        let mut pseudometrics = IndexMap::new();
        for (name, mat) in &self.pseudometrics {
            let field = format!("pseudometrics.{name}");
            let d = matrix(mat);
            let r = validate_metric(points, &d, MetricMode::Pseudometric)
                .map_err(|e| e.in_field(field.clone()))?;
            if !r.is_ok() {
                report.extend_scoped(&field, r);
                continue;
            }
            let mu = FiniteMetric::new(points.clone(), d, MetricMode::Pseudometric)?;
            if let Some(a) = &action {
                let inv = check_invariance(&mu, a)?;
                if !inv.is_ok() {
                    report.extend_scoped(&format!("{field}.invariance"), inv);
                    continue;
                }
            }
            pseudometrics.insert(name.clone(), mu);
        }

        let mut maps = IndexMap::new();
        for (name, m) in &self.maps {
            let field = format!("maps.{name}");
            if let Some(f) =
                self.process_map(&field, m, action.as_ref(), space.as_ref(), &mut report)?
            {
                maps.insert(name.clone(), f);
            }
        }

        for (name, coeffs) in &self.molecules {
            let field = format!("molecules.{name}");
            if let Some(k) = coeffs.keys().find(|k| *k != STAR && !points.contains(k)) {
                return Err(Error::field(field, format!("unknown point {k:?}")));
            }
            let sum: Rational = coeffs.values().map(|q| q.0.clone()).sum();
            if sum != Rational::from_integer(0.into()) {
                report.fail(
                    format!("{field}.zero_sum"),
                    vec![name.clone()],
                    format!(
                        "coefficients sum to {}",
                        crate::rational::format_rational(&sum)
                    ),
                );
            }
        }
        if let Some(b) = &self.basepoint {
            if !points.contains(b) {
                return Err(Error::field("basepoint", format!("unknown point {b:?}")));
            }
        }

        let inst = space.map(|space| Instance {
            doc: self.clone(),
            space,
            pseudometrics,
            maps,
        });
        Ok((report, inst))
    }

    fn process_map(
        &self,
        field: &str,
        m: &MapDoc,
        action: Option<&GroupAction>,
        source: Option<&FiniteGSpace>,
        report: &mut ValidationReport,
    ) -> Result<Option<EquivariantMap>> {
        let t = &m.target;
        if t.points.iter().any(|p| p == STAR) {
            return Err(Error::field(
                format!("{field}.target.points"),
                format!("{STAR:?} is reserved for the adjoined basepoint"),
            ));
        }
        let d = matrix(&t.metric);
        let r = validate_metric(&t.points, &d, MetricMode::Metric)
            .map_err(|e| e.in_field(format!("{field}.target.metric")))?;
        let metric_ok = r.is_ok();
        report.extend_scoped(&format!("{field}.target.metric"), r);
        let image = self
            .points
            .iter()
            .map(|p| {
                let y = m.image.get(p).ok_or_else(|| {
                    Error::field(format!("{field}.image"), format!("no image for {p:?}"))
                })?;
                t.points.iter().position(|q| q == y).ok_or_else(|| {
                    Error::field(
                        format!("{field}.image"),
                        format!("unknown target point {y:?}"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(k) = m.image.keys().find(|k| !self.points.contains(k)) {
            return Err(Error::field(
                format!("{field}.image"),
                format!("unknown source point {k:?}"),
            ));
        }
        let Some(action) = action else {
            return Ok(None);
        };
        let group = action.group_arc().clone();
        let afield = format!("{field}.target.action");
        let target_action = match (&t.generator_images, &t.action) {
            (Some(_), Some(_)) => {
                return Err(Error::field(
                    afield,
                    "give either generator_images or action, not both",
                ))
            }
            (Some(images), None) => action_or_report(
                GroupAction::from_generator_images(group, &t.points, images),
                &afield,
                &format!("{field}.target.generator_images"),
                report,
            )?,
            (None, Some(doc)) => {
                let perms = perms_by_element(&group, doc, &afield)?;
                action_or_report(
                    GroupAction::new(group, &t.points, perms),
                    &afield,
                    &afield,
                    report,
                )?
            }
            (None, None) => Some(GroupAction::trivial(group, t.points.len())),
        };
        let (Some(ta), true) = (target_action, metric_ok) else {
            return Ok(None);
        };
        let tm = FiniteMetric::new(t.points.clone(), d, MetricMode::Metric)?;
        let inv = check_invariance(&tm, &ta)?;
        if !inv.is_ok() {
            report.extend_scoped(&format!("{field}.target.invariance"), inv);
            return Ok(None);
        }
        let Some(source) = source else {
            return Ok(None);
        };
        let target = FiniteGSpace::new(tm, ta)?;
        let f = EquivariantMap::new(source.clone(), target, image)
            .map_err(|e| e.in_field(field.to_string()))?;
        let eq = check_equivariance(&f);
        if !eq.is_ok() {
            report.extend_scoped(&format!("{field}.equivariance"), eq);
            return Ok(None);
        }
        Ok(Some(f))
    }
}

impl Instance {
    /// `mode` defaults to internal when a basepoint is named (here or in the
    /// document) and to adjoined otherwise. `allow_unfixed` admits a
    /// non-fixed internal basepoint for experiments.
    pub fn based(
        &self,
        mode: Option<BasepointMode>,
        basepoint: Option<&str>,
        allow_unfixed: bool,
    ) -> Result<BasedSpace> {
        let name = basepoint.or(self.doc.basepoint.as_deref());
        let mode = mode.unwrap_or(if name.is_some() {
            BasepointMode::Internal
        } else {
            BasepointMode::Adjoined
        });
        match mode {
            BasepointMode::Adjoined => Ok(BasedSpace::adjoined(self.space.clone())),
            BasepointMode::Internal => {
                let name = name
                    .ok_or_else(|| Error::field("basepoint", "internal mode needs a basepoint"))?;
                let x = self
                    .space
                    .index_of(name)
                    .ok_or_else(|| Error::field("basepoint", format!("unknown point {name:?}")))?;
                if allow_unfixed {
                    BasedSpace::internal_experimental(self.space.clone(), x)
                } else {
                    BasedSpace::internal(self.space.clone(), x)
                }
            }
        }
    }

    pub fn molecule(&self, name: &str, b: &BasedSpace) -> Result<Molecule> {
        let field = format!("molecules.{name}");
        let coeffs = self
            .doc
            .molecules
            .get(name)
            .ok_or_else(|| Error::field(field.clone(), "no such molecule"))?;
        Molecule::from_named(b, coeffs.iter().map(|(p, q)| (p.as_str(), q.0.clone())))
            .map_err(|e| e.in_field(field))
    }

    pub fn molecules(&self, b: &BasedSpace) -> Result<Vec<(String, Molecule)>> {
        self.doc
            .molecules
            .keys()
            .map(|n| Ok((n.clone(), self.molecule(n, b)?)))
            .collect()
    }

    pub fn pseudometric(&self, name: &str) -> Result<&FiniteMetric> {
        self.pseudometrics
            .get(name)
            .ok_or_else(|| Error::field(format!("pseudometrics.{name}"), "no such pseudometric"))
    }

    pub fn map(&self, name: &str) -> Result<&EquivariantMap> {
        self.maps
            .get(name)
            .ok_or_else(|| Error::field(format!("maps.{name}"), "no such map"))
    }

    /// All document pseudometrics, deduplicated, with the dropped names.
    pub fn family(&self) -> Result<(PseudometricFamily, Vec<(String, String)>)> {
        PseudometricFamily::ingest(
            &self.space,
            self.pseudometrics
                .iter()
                .map(|(n, m)| (n.clone(), m.clone())),
        )
    }
}

/// A document describing `x` alone, with the group as a table.
pub fn space_document(x: &FiniteGSpace) -> InstanceDocument {
    let g = x.group();
    let names = g.elements();
    let trivial = g.order() == 1;
    InstanceDocument {
        points: x.points().to_vec(),
        metric: to_matrix(x.metric()),
        group: (!trivial).then(|| GroupDoc::Table {
            elements: names.to_vec(),
            table: g
                .table()
                .iter()
                .map(|row| row.iter().map(|&k| names[k].clone()).collect())
                .collect(),
        }),
        action: (!trivial).then(|| {
            names
                .iter()
                .cloned()
                .zip(x.action().perms().iter().cloned())
                .collect()
        }),
        pseudometrics: IndexMap::new(),
        maps: IndexMap::new(),
        molecules: IndexMap::new(),
        basepoint: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientOutput {
    pub classes: IndexMap<String, Vec<String>>,
    pub assignment: IndexMap<String, String>,
    pub metric: Matrix,
    pub action: IndexMap<String, Vec<usize>>,
    /// `X_μ` as a standalone instance document.
    pub space: InstanceDocument,
}

impl QuotientOutput {
    pub fn new(q: &Quotient) -> Self {
        let x = &q.source;
        let qx = &q.space.space;
        let names = qx.points();
        QuotientOutput {
            classes: q
                .space
                .classes
                .iter()
                .enumerate()
                .map(|(c, cl)| {
                    (
                        names[c].clone(),
                        cl.iter().map(|&p| x.points()[p].clone()).collect(),
                    )
                })
                .collect(),
            assignment: x
                .points()
                .iter()
                .zip(&q.map.assignment)
                .map(|(p, &c)| (p.clone(), names[c].clone()))
                .collect(),
            metric: to_matrix(qx.metric()),
            action: qx
                .group()
                .elements()
                .iter()
                .cloned()
                .zip(qx.action().perms().iter().cloned())
                .collect(),
            space: space_document(qx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizationOutput {
    /// The pullback pseudometric on the source.
    pub mu: Matrix,
    pub quotient: QuotientOutput,
    pub phi: IndexMap<String, String>,
}

impl FactorizationOutput {
    pub fn new(fac: &Factorization, f: &EquivariantMap) -> Self {
        let names = fac.quotient.space.space.points();
        FactorizationOutput {
            mu: to_matrix(&fac.quotient.mu),
            quotient: QuotientOutput::new(&fac.quotient),
            phi: fac
                .phi
                .iter()
                .enumerate()
                .map(|(c, &y)| (names[c].clone(), f.target().points()[y].clone()))
                .collect(),
        }
    }
}
