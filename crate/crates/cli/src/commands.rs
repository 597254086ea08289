use indexmap::IndexMap;
use serde_json::Value;

use eqshape::ae_norm::{brute_force_norm_capped, norm, verify_certificate, OracleCaps};
use eqshape::gspace::PseudometricFamily;
use eqshape::instance::{
    parse_document, BasepointMode, FactorizationOutput, Instance, InstanceDocument, QuotientOutput,
};
use eqshape::inverse_system::{
    build_system, check_tube_soundness, export_system, ExportFormat, InverseSystem, SystemConfig,
};
use eqshape::molecule::ActionMode;
use eqshape::properties::{run_properties, CheckConfig, PropertyResult, MAX_LISTED_FAILURES};
use eqshape::quotient::{factorize, quotient, verify_factorization, verify_quotient};
use eqshape::rational::{format_rational, parse_rational, Rational};
use eqshape::{Error, Result, ValidationReport};

use crate::{ActionArg, Artifact, Command, CommandOutput, FormatArg, GlobalArgs, ModeArg};

fn json<T: serde::Serialize>(v: &T) -> Artifact {
    Artifact::Json(serde_json::to_value(v).expect("serializable"))
}

fn load(path: &std::path::Path) -> Result<InstanceDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::field("path", format!("{}: {e}", path.display())))?;
    parse_document(&text)
}

fn result(name: &str, cases: usize, failures: ValidationReport) -> PropertyResult {
    let failure_count = failures.len();
    PropertyResult {
        name: name.to_string(),
        passed: failure_count == 0,
        witnesses: cases,
        failure_count,
        failures: failures
            .violations
            .into_iter()
            .take(MAX_LISTED_FAILURES)
            .collect(),
        note: None,
    }
}

/// One result per distinct check name in the report.
pub fn checks_from_report(scope: &str, r: &ValidationReport) -> Vec<PropertyResult> {
    let mut by: IndexMap<String, ValidationReport> = IndexMap::new();
    for v in &r.violations {
        by.entry(v.check.clone()).or_default().push(v.clone());
    }
    if by.is_empty() {
        return vec![result(scope, 1, ValidationReport::new())];
    }
    by.into_iter().map(|(n, r)| result(&n, 1, r)).collect()
}

fn config_mode(g: &GlobalArgs) -> Option<BasepointMode> {
    g.mode.map(|m| match m {
        ModeArg::Adjoined => BasepointMode::Adjoined,
        ModeArg::Internal => BasepointMode::Internal,
    })
}

fn radii(g: &GlobalArgs) -> Result<Vec<Rational>> {
    g.radii
        .iter()
        .map(|s| {
            let r = parse_rational(s.trim()).map_err(|e| Error::field("radii", e.to_string()))?;
            if r <= Rational::from_integer(0.into()) {
                return Err(Error::InvalidRadius(format_rational(&r)));
            }
            Ok(r)
        })
        .collect()
}

pub fn run(cmd: &Command, g: &GlobalArgs) -> CommandOutput {
    match cmd {
        Command::Validate { path } => validate(&load(path)?),
        Command::Norm { path, molecule } => cmd_norm(&load(path)?.build()?, molecule, g),
        Command::Quotient { path, mu } => cmd_quotient(&load(path)?.build()?, mu),
        Command::Factorize { path, map } => cmd_factorize(&load(path)?.build()?, map),
        Command::System { path, family } => {
            let format = g.format.unwrap_or(FormatArg::Json);
            cmd_system(&load(path)?.build()?, family, g, format)
        }
        Command::Export { path, family } => {
            let format = g.format.unwrap_or(FormatArg::Dot);
            cmd_system(&load(path)?.build()?, family, g, format)
        }
        Command::Check { path } => cmd_check(&load(path)?.build()?, g),
    }
}

/// Groups violations under the document component they belong to.
fn validate(doc: &InstanceDocument) -> CommandOutput {
    let report = doc.validate()?;
    let mut components: Vec<String> = vec!["metric".into()];
    if doc.group.is_some() {
        components.push("group".into());
    }
    components.push("action".into());
    components.push("invariance".into());
    components.extend(
        doc.pseudometrics
            .keys()
            .map(|n| format!("pseudometrics.{n}")),
    );
    components.extend(doc.maps.keys().map(|n| format!("maps.{n}")));
    components.extend(doc.molecules.keys().map(|n| format!("molecules.{n}")));
    let mut grouped: IndexMap<String, ValidationReport> = components
        .iter()
        .map(|c| (c.clone(), ValidationReport::new()))
        .collect();
    for v in report.violations {
        let owner = components
            .iter()
            .filter(|c| v.check == **c || v.check.starts_with(&format!("{c}.")))
            .max_by_key(|c| c.len())
            .cloned()
            .unwrap_or_else(|| v.check.clone());
        grouped.entry(owner).or_default().push(v);
    }
    Ok((
        grouped.into_iter().map(|(n, r)| result(&n, 1, r)).collect(),
        None,
    ))
}

fn cmd_norm(inst: &Instance, name: &str, g: &GlobalArgs) -> CommandOutput {
    let b = inst.based(config_mode(g), g.basepoint.as_deref(), false)?;
    let m = inst.molecule(name, &b)?;
    let r = norm(&m, &b)?;
    let mut checks = vec![result("certificate", 1, verify_certificate(&m, &r, &b))];
    if g.oracle {
        let oracle = brute_force_norm_capped(&m, &b, OracleCaps::default())?;
        let mut rep = ValidationReport::new();
        if oracle != r.value {
            rep.fail(
                "oracle",
                vec![name.to_string()],
                format!(
                    "solver {} != oracle {}",
                    format_rational(&r.value),
                    format_rational(&oracle)
                ),
            );
        }
        checks.push(result("oracle", 1, rep));
    }
    Ok((checks, Some(json(&r.to_doc(&b)))))
}

fn cmd_quotient(inst: &Instance, mu: &str) -> CommandOutput {
    let q = quotient(&inst.space, inst.pseudometric(mu)?)?;
    let checks = vec![result("quotient", 1, verify_quotient(&q))];
    Ok((checks, Some(json(&QuotientOutput::new(&q)))))
}

fn cmd_factorize(inst: &Instance, name: &str) -> CommandOutput {
    let f = inst.map(name)?;
    let rho = f.target().metric();
    let fac = factorize(f, rho)?;
    let checks = vec![result(
        "factorization",
        1,
        verify_factorization(f, rho, &fac),
    )];
    let mut out = serde_json::to_value(FactorizationOutput::new(&fac, f)).expect("serializable");
    let equal: Vec<Value> = inst
        .pseudometrics
        .iter()
        .filter(|(_, m)| **m == fac.quotient.mu)
        .map(|(n, _)| Value::String(n.clone()))
        .collect();
    out.as_object_mut()
        .expect("object")
        .insert("equal_to".into(), Value::Array(equal));
    Ok((checks, Some(Artifact::Json(out))))
}

fn selected_family(inst: &Instance, names: &[String]) -> Result<PseudometricFamily> {
    if names.is_empty() {
        return Ok(inst.family()?.0);
    }
    let mut fam = PseudometricFamily::new(&inst.space);
    for n in names {
        fam.push(&inst.space, n.clone(), inst.pseudometric(n)?.clone())?;
    }
    Ok(fam)
}

fn cmd_system(
    inst: &Instance,
    names: &[String],
    g: &GlobalArgs,
    format: FormatArg,
) -> CommandOutput {
    let family = selected_family(inst, names)?;
    let s: InverseSystem =
        build_system(&inst.space, &family, &radii(g)?, &SystemConfig::default())?;
    let mut checks = vec![result("verify_system", 1, ValidationReport::new())];
    let t = check_tube_soundness(&s, g.samples, g.seed)?;
    checks.push(result("tube_soundness", t.samples_checked, t.report));
    let format = match format {
        FormatArg::Dot => ExportFormat::Dot,
        FormatArg::Json => ExportFormat::Json,
    };
    let text = export_system(&s, format)?;
    let artifact = match format {
        ExportFormat::Dot => Artifact::Text(text),
        ExportFormat::Json => Artifact::Json(serde_json::from_str(&text).expect("valid json")),
    };
    Ok((checks, Some(artifact)))
}

fn cmd_check(inst: &Instance, g: &GlobalArgs) -> CommandOutput {
    let mode = match g.action {
        ActionArg::Pushforward => ActionMode::Pushforward,
        ActionArg::Eq3Literal => ActionMode::Eq3Literal,
    };
    let b = inst.based(
        config_mode(g),
        g.basepoint.as_deref(),
        mode == ActionMode::Eq3Literal,
    )?;
    let mut radii = radii(g)?;
    if radii.is_empty() {
        radii = CheckConfig::default().radii;
    }
    let cfg = CheckConfig {
        mode,
        seed: g.seed,
        samples: g.samples,
        radii,
    };
    Ok((run_properties(inst, &b, &cfg)?, None))
}
