//! The invariant suite run against a single instance: every module's
//! properties, each reported with the number of cases it was checked on
//! and every failure found.

use std::sync::Arc;

use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ae_norm::{brute_force_norm, norm, verify_certificate, OracleCaps};
use crate::error::Result;
use crate::gspace::{
    check_invariance, pseudometric_join, pullback_pseudometric, validate_action, validate_metric,
    MetricMode, PseudometricFamily,
};
use crate::instance::Instance;
use crate::inverse_system::{
    build_system, check_tube_soundness, verify_system, Radius, SystemConfig,
};
use crate::molecule::{
    act, basis_decompose, check_molecule_action, combine, embed, pushforward_map, ActionMode,
    BasedSpace, Molecule,
};
use crate::quotient::{bond, factorize, quotient, verify_factorization, verify_quotient};
use crate::rational::{format_rational, int, one, ratio, Rational};
use crate::report::{ValidationReport, Violation};
use crate::sampling::sample_molecule;

/// Failures kept per property; the total is always reported.
pub const MAX_LISTED_FAILURES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    /// Number of cases the property was evaluated on.
    pub witnesses: usize,
    pub failure_count: usize,
    pub failures: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub mode: ActionMode,
    pub seed: u64,
    pub samples: usize,
    pub radii: Vec<Rational>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            mode: ActionMode::Pushforward,
            seed: 0,
            samples: 64,
            radii: vec![int(1)],
        }
    }
}

struct Prop {
    name: &'static str,
    cases: usize,
    report: ValidationReport,
    note: Option<String>,
}

impl Prop {
    fn new(name: &'static str) -> Self {
        Prop {
            name,
            cases: 0,
            report: ValidationReport::new(),
            note: None,
        }
    }

    fn case(&mut self, ok: bool, witness: impl FnOnce() -> Vec<String>, detail: &str) {
        self.cases += 1;
        if !ok {
            self.report.fail(self.name, witness(), detail);
        }
    }

    fn absorb(&mut self, r: ValidationReport) {
        self.cases += 1;
        self.report.extend(r);
    }

    fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn finish(mut self) -> PropertyResult {
        if self.cases == 0 && self.note.is_none() {
            self.note = Some("no applicable cases in this instance".into());
        }
        let failure_count = self.report.len();
        PropertyResult {
            name: self.name.to_string(),
            passed: failure_count == 0,
            witnesses: self.cases,
            failure_count,
            failures: self
                .report
                .violations
                .into_iter()
                .take(MAX_LISTED_FAILURES)
                .collect(),
            note: self.note,
        }
    }
}

fn show(m: &Molecule, b: &BasedSpace) -> String {
    let parts: Vec<String> = m
        .named(b)
        .map(|(p, c)| format!("{p}:{}", format_rational(c)))
        .collect();
    format!("{{{}}}", parts.join(","))
}

/// Instance molecules, point embeddings, dipoles between points, and
/// `samples` seeded random molecules.
pub fn test_molecules(inst: &Instance, b: &BasedSpace, samples: usize, seed: u64) -> Vec<Molecule> {
    let mut out: Vec<Molecule> = inst
        .molecules(b)
        .map(|v| v.into_iter().map(|(_, m)| m).collect())
        .unwrap_or_default();
    for x in 0..b.space_len() {
        out.push(embed(x, b).expect("real point"));
        for y in (x + 1)..b.space_len() {
            out.push(Molecule::dipole(x, y, one()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..samples).map(|_| sample_molecule(&mut rng, b, 4)));
    out.dedup();
    out
}

pub fn run_properties(
    inst: &Instance,
    b: &BasedSpace,
    cfg: &CheckConfig,
) -> Result<Vec<PropertyResult>> {
    let family = inst.family()?.0;
    let ms = test_molecules(inst, b, cfg.samples, cfg.seed);
    let mut out = gspace_properties(inst, &family)?;
    out.extend(molecule_properties(inst, b, cfg.mode, &ms)?);
    out.extend(norm_properties(inst, b, cfg.mode, &ms)?);
    out.extend(quotient_properties(inst, &family, cfg)?);
    out.extend(system_properties(inst, &family, cfg)?);
    Ok(out)
}

fn gspace_properties(inst: &Instance, family: &PseudometricFamily) -> Result<Vec<PropertyResult>> {
    let x = &inst.space;
    let pts = x.points();
    let mut closure = Prop::new("gspace.group_axioms");
    closure.absorb(x.group().validate());
    let mut action = Prop::new("gspace.action_axioms");
    action.absorb(validate_action(x.group(), pts, x.action().perms())?);

    let mut inv = Prop::new("gspace.invariance");
    inv.absorb(check_invariance(x.metric(), x.action())?);
    for (_, mu) in family.iter() {
        inv.absorb(check_invariance(mu, x.action())?);
    }

    let mut pull = Prop::new("gspace.pullback_valid");
    for (name, f) in &inst.maps {
        let mu = pullback_pseudometric(f, f.target().metric())?;
        let mut r = validate_metric(pts, mu.matrix(), MetricMode::Pseudometric)?;
        r.extend(check_invariance(&mu, x.action())?);
        pull.absorb(labelled(r, name));
    }

    let n = family.len();
    let mut order = Prop::new("gspace.leq_partial_order");
    for i in 0..n {
        let (a, fa) = (family.get(i), family.name(i));
        order.case(a.leq(a), || vec![fa.to_string()], "not reflexive");
        for j in 0..n {
            let (bm, fb) = (family.get(j), family.name(j));
            order.case(
                i == j || !(a.leq(bm) && bm.leq(a)),
                || vec![fa.to_string(), fb.to_string()],
                "distinct members below each other",
            );
            for k in 0..n {
                let c = family.get(k);
                order.case(
                    !(a.leq(bm) && bm.leq(c)) || a.leq(c),
                    || vec![fa.to_string(), fb.to_string(), family.name(k).to_string()],
                    "not transitive",
                );
            }
        }
    }

    let mut join = Prop::new("gspace.join_lub");
    for i in 0..n {
        for j in i..n {
            let (a, bm) = (family.get(i), family.get(j));
            let jn = pseudometric_join(a, bm)?;
            let w = || vec![family.name(i).to_string(), family.name(j).to_string()];
            join.case(
                validate_metric(pts, jn.matrix(), MetricMode::Pseudometric)?.is_ok()
                    && check_invariance(&jn, x.action())?.is_ok(),
                w,
                "join is not a valid invariant pseudometric",
            );
            join.case(a.leq(&jn) && bm.leq(&jn), w, "join is not an upper bound");
            for k in 0..n {
                let c = family.get(k);
                join.case(
                    !(a.leq(c) && bm.leq(c)) || jn.leq(c),
                    || {
                        let mut v = w();
                        v.push(family.name(k).to_string());
                        v
                    },
                    "join is not least among members",
                );
            }
        }
    }
    Ok(vec![
        closure.finish(),
        action.finish(),
        inv.finish(),
        pull.finish(),
        order.finish(),
        join.finish(),
    ])
}

fn labelled(r: ValidationReport, label: &str) -> ValidationReport {
    let mut out = ValidationReport::new();
    for mut v in r.violations {
        v.witness.insert(0, label.to_string());
        out.push(v);
    }
    out
}

fn coefficient_pairs() -> [(Rational, Rational); 3] {
    [(int(1), int(1)), (int(2), ratio(-1, 2)), (int(-1), int(3))]
}

fn molecule_properties(
    inst: &Instance,
    b: &BasedSpace,
    mode: ActionMode,
    ms: &[Molecule],
) -> Result<Vec<PropertyResult>> {
    let group = b.space().group();
    let order = group.order();
    let fixed = b.basepoint_is_fixed();

    let mut zero_sum = Prop::new("molecule.zero_sum");
    let mut decomp = Prop::new("molecule.decomposition");
    let mut linear = Prop::new("molecule.linearity");
    for (k, m) in ms.iter().enumerate() {
        let d = basis_decompose(m, b);
        decomp.case(
            &d.reconstruct(b) == m,
            || vec![show(m, b)],
            "reconstruction differs",
        );
        decomp.case(
            basis_decompose(&d.reconstruct(b), b) == d,
            || vec![show(m, b)],
            "decomposition is not unique",
        );
        for g in 0..order {
            let gm = act(g, m, b, mode)?;
            zero_sum.case(
                gm.sum().is_zero(),
                || vec![show(m, b)],
                "g·m has nonzero sum",
            );
        }
        let m2 = &ms[(k + 1) % ms.len()];
        for (alpha, beta) in coefficient_pairs() {
            let c = combine(&alpha, m, &beta, m2);
            zero_sum.case(
                c.sum().is_zero(),
                || vec![show(&c, b)],
                "combination has nonzero sum",
            );
            for g in 0..order {
                let lhs = act(g, &c, b, mode)?;
                let rhs = combine(&alpha, &act(g, m, b, mode)?, &beta, &act(g, m2, b, mode)?);
                linear.case(
                    lhs == rhs,
                    || vec![group.name(g).to_string(), show(m, b), show(m2, b)],
                    "action is not linear",
                );
            }
        }
    }
    if b.is_adjoined() {
        for (name, f) in &inst.maps {
            let tb = BasedSpace::adjoined(f.target().clone());
            for (k, m) in ms.iter().enumerate() {
                let m2 = &ms[(k + 1) % ms.len()];
                let (alpha, beta) = (int(2), ratio(-1, 2));
                let lhs = pushforward_map(f, &combine(&alpha, m, &beta, m2), b, &tb)?;
                let rhs = combine(
                    &alpha,
                    &pushforward_map(f, m, b, &tb)?,
                    &beta,
                    &pushforward_map(f, m2, b, &tb)?,
                );
                zero_sum.case(
                    lhs.sum().is_zero(),
                    || vec![name.clone()],
                    "pushforward has nonzero sum",
                );
                linear.case(
                    lhs == rhs,
                    || vec![name.clone(), show(m, b), show(m2, b)],
                    "pushforward is not linear",
                );
            }
        }
    }

    let mut axioms = Prop::new("molecule.action_axioms");
    axioms.absorb(check_molecule_action(b, mode, ms)?);
    let boundary = mode == ActionMode::Eq3Literal && !fixed;
    if boundary && !axioms.report.is_ok() {
        axioms = axioms.noted(
            "expected boundary case: the literal basis formula at a non-fixed basepoint is not an action",
        );
    }

    let mut equi = Prop::new("molecule.embedding_equivariance");
    let mut agree = Prop::new("molecule.mode_agreement");
    if fixed {
        for x in 0..b.space_len() {
            for g in 0..order {
                let gx = b.space().action().apply(g, x);
                equi.case(
                    act(g, &embed(x, b)?, b, mode)? == embed(gx, b)?,
                    || vec![group.name(g).to_string(), b.name(x).to_string()],
                    "g·i(x) != i(gx)",
                );
            }
        }
        for m in ms {
            for g in 0..order {
                agree.case(
                    act(g, m, b, ActionMode::Pushforward)? == act(g, m, b, ActionMode::Eq3Literal)?,
                    || vec![group.name(g).to_string(), show(m, b)],
                    "modes disagree at a fixed basepoint",
                );
            }
        }
    } else {
        equi = equi.noted("skipped: basepoint is not fixed");
        agree = agree.noted("skipped: basepoint is not fixed");
    }
    Ok(vec![
        zero_sum.finish(),
        decomp.finish(),
        axioms.finish(),
        linear.finish(),
        equi.finish(),
        agree.finish(),
    ])
}

fn norm_properties(
    inst: &Instance,
    b: &BasedSpace,
    mode: ActionMode,
    ms: &[Molecule],
) -> Result<Vec<PropertyResult>> {
    let caps = OracleCaps::default();
    let group = b.space().group();
    let mut oracle = Prop::new("ae_norm.oracle");
    let mut certs = Prop::new("ae_norm.certificates");
    let mut axioms = Prop::new("ae_norm.norm_axioms");
    let mut invariance = Prop::new("ae_norm.act_invariance");
    let mut skipped = 0;
    let mut values = Vec::with_capacity(ms.len());
    for m in ms {
        let r = norm(m, b)?;
        certs.absorb(labelled(verify_certificate(m, &r, b), &show(m, b)));
        if m.support_len() <= caps.max_support && b.point_count() <= caps.max_points {
            let bf = brute_force_norm(m, b)?;
            oracle.case(
                bf == r.value,
                || vec![show(m, b)],
                "solver and oracle disagree",
            );
        } else {
            skipped += 1;
        }
        axioms.case(
            !r.value.is_negative() && (r.value.is_zero() == m.is_zero()),
            || vec![show(m, b)],
            "norm is negative, or zero on a nonzero molecule",
        );
        for alpha in [int(2), ratio(-1, 2)] {
            let scaled = norm(&m.scale(&alpha), b)?.value;
            axioms.case(
                scaled == &r.value * alpha.abs(),
                || vec![show(m, b), format_rational(&alpha)],
                "norm is not homogeneous",
            );
        }
        if b.basepoint_is_fixed() && mode == ActionMode::Pushforward {
            for g in 0..group.order() {
                invariance.case(
                    norm(&act(g, m, b, mode)?, b)?.value == r.value,
                    || vec![group.name(g).to_string(), show(m, b)],
                    "action changes the norm",
                );
            }
        }
        values.push(r.value);
    }
    for k in 0..ms.len() {
        let j = (k + 1) % ms.len();
        let sum = combine(&one(), &ms[k], &one(), &ms[j]);
        axioms.case(
            norm(&sum, b)?.value <= &values[k] + &values[j],
            || vec![show(&ms[k], b), show(&ms[j], b)],
            "triangle inequality fails",
        );
    }
    if skipped > 0 {
        oracle = oracle.noted(format!(
            "{skipped} molecules beyond the oracle caps skipped"
        ));
    }
    if !(b.basepoint_is_fixed() && mode == ActionMode::Pushforward) {
        invariance =
            invariance.noted("skipped: needs a fixed basepoint and the pushforward action");
    }

    let mut iso = Prop::new("ae_norm.isometry");
    for x in 0..b.space_len() {
        for y in 0..b.space_len() {
            let diff = combine(&one(), &embed(x, b)?, &-one(), &embed(y, b)?);
            iso.case(
                norm(&diff, b)?.value == *b.d(x, y),
                || vec![b.name(x).to_string(), b.name(y).to_string()],
                "‖i(x) − i(y)‖ != d(x, y)",
            );
        }
    }

    let mut contraction = Prop::new("ae_norm.pushforward_contraction");
    if b.is_adjoined() {
        let star = b.basepoint();
        for (name, f) in &inst.maps {
            let tb = BasedSpace::adjoined(f.target().clone());
            let lip = lipschitz_constant(f);
            for m in ms.iter().filter(|m| m.coeff(star).is_zero()) {
                let pushed = pushforward_map(f, m, b, &tb)?;
                contraction.case(
                    norm(&pushed, &tb)?.value <= &lip * &norm(m, b)?.value,
                    || vec![name.clone(), show(m, b)],
                    "pushforward exceeds the Lipschitz bound",
                );
            }
        }
    } else {
        contraction = contraction.noted("skipped: needs the adjoined basepoint");
    }
    Ok(vec![
        oracle.finish(),
        iso.finish(),
        axioms.finish(),
        invariance.finish(),
        contraction.finish(),
        certs.finish(),
    ])
}

/// `max d_Y(fx, fx′) / d_X(x, x′)` over distinct points; 0 for one point.
pub fn lipschitz_constant(f: &crate::gspace::EquivariantMap) -> Rational {
    let (dx, dy) = (f.source().metric(), f.target().metric());
    let mut best = Rational::zero();
    for x in 0..dx.len() {
        for y in (x + 1)..dx.len() {
            let r = dy.d(f.apply(x), f.apply(y)) / dx.d(x, y);
            if r > best {
                best = r;
            }
        }
    }
    best
}

fn quotient_properties(
    inst: &Instance,
    family: &PseudometricFamily,
    cfg: &CheckConfig,
) -> Result<Vec<PropertyResult>> {
    let x = &inst.space;
    let qs = family
        .iter()
        .map(|(_, mu)| quotient(x, mu).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let mut wd = Prop::new("quotient.well_defined");
    for (k, q) in qs.iter().enumerate() {
        wd.absorb(labelled(verify_quotient(q), family.name(k)));
    }
    let mut laws = Prop::new("quotient.bond_laws");
    let mut contraction = Prop::new("quotient.linearized_contraction");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = qs.len();
    for i in 0..n {
        for j in 0..n {
            if !family.get(i).leq(family.get(j)) {
                continue;
            }
            let bij = bond(&qs[i], &qs[j])?;
            let label = format!("{}<={}", family.name(i), family.name(j));
            laws.absorb(labelled(bij.verify(), &label));
            for k in 0..n {
                if !family.get(j).leq(family.get(k)) {
                    continue;
                }
                let bjk = bond(&qs[j], &qs[k])?;
                let bik = bond(&qs[i], &qs[k])?;
                laws.case(
                    bij.compose(&bjk)? == bik,
                    || {
                        vec![
                            family.name(i).to_string(),
                            family.name(j).to_string(),
                            family.name(k).to_string(),
                        ]
                    },
                    "bonds do not compose",
                );
            }
            for _ in 0..cfg.samples {
                let m = sample_molecule(&mut rng, &bij.fine.based, 4);
                let image = bij.linearize(&m)?;
                contraction.case(
                    norm(&image, &bij.coarse.based)?.value <= norm(&m, &bij.fine.based)?.value,
                    || vec![label.clone(), show(&m, &bij.fine.based)],
                    "linearized bond increases the norm",
                );
            }
        }
    }
    let mut fact = Prop::new("quotient.factorization");
    for (name, f) in &inst.maps {
        let rho = f.target().metric();
        let fac = factorize(f, rho)?;
        fact.absorb(labelled(verify_factorization(f, rho, &fac), name));
    }
    Ok(vec![
        wd.finish(),
        laws.finish(),
        contraction.finish(),
        fact.finish(),
    ])
}

fn system_properties(
    inst: &Instance,
    family: &PseudometricFamily,
    cfg: &CheckConfig,
) -> Result<Vec<PropertyResult>> {
    let mut verify = Prop::new("inverse_system.verify");
    let mut tubes = Prop::new("inverse_system.tube_soundness");
    let mut absorb = Prop::new("inverse_system.absorbs_maps");
    if family.is_empty() {
        let note = "skipped: the instance has no pseudometrics";
        return Ok(vec![
            verify.noted(note).finish(),
            tubes.noted(note).finish(),
            absorb.noted(note).finish(),
        ]);
    }
    let config = SystemConfig::default();
    let s = build_system(&inst.space, family, &cfg.radii, &config)?;
    verify.absorb(verify_system(&s));
    let t = check_tube_soundness(&s, cfg.samples, cfg.seed)?;
    tubes.cases = t.samples_checked;
    tubes.report.extend(t.report);

    for (name, f) in &inst.maps {
        let mu = pullback_pseudometric(f, f.target().metric())?;
        let mut extended = family.clone();
        let pulled = format!("pullback({name})");
        extended.push(&inst.space, pulled, mu.clone())?;
        let s = build_system(&inst.space, &extended, &cfg.radii, &config)?;
        let present = s
            .family()
            .find(&mu)
            .and_then(|k| s.entry_index(k, &Radius::Infinite))
            .is_some();
        absorb.case(present, || vec![name.clone()], "(μ_f, ∞) is not an entry");
        let fac = factorize(f, f.target().metric())?;
        absorb.case(
            fac.quotient.mu == mu,
            || vec![name.clone()],
            "factorization uses a different pseudometric",
        );
    }
    Ok(vec![verify.finish(), tubes.finish(), absorb.finish()])
}
