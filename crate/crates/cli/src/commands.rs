//! The single-shot subcommands. Each returns a [`CommandOutput`]; writing
//! it to disk is left to the caller.

use std::path::Path;

use cbp_core::harmonics::ft_norm_power;
use cbp_core::sections::{section_volume_direct, section_volume_fourier, volume_polar, volume_with_error};
use cbp_core::settings::Settings;
use cbp_core::spherequad::montecarlo::mc_volume;
use cbp_core::theorems::{
    corollary1_verify, gamma_lemma_check, parseval_check, positivity_check, separation_verify,
    stability_verify_with, PositivityMode, StabilityReport,
};
use cbp_core::{BodySpec, Direction};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::report::{num, Outcome, Table};

pub struct CommandOutput {
    pub stem: String,
    pub outcome: Outcome,
    pub result: Value,
    pub table: Table,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
}

/// Reads a body spec from a file, or parses it directly when the argument
/// is an inline JSON object.
pub fn load_body(arg: &str) -> CliResult<BodySpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        let path = Path::new(arg);
        std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Body(e.to_string()))
}

/// Parses `"x1,x2,..."` into a normalized direction.
pub fn parse_xi(text: &str) -> CliResult<Direction> {
    let v = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("bad direction {text:?}: {e}")))?;
    Ok(Direction::new(v)?)
}

/// Directions given explicitly, a seeded random grid, or `e_1`.
pub fn directions(
    body: &BodySpec,
    xi: Option<&str>,
    grid: Option<usize>,
    seed: u64,
) -> CliResult<Vec<Direction>> {
    let n = body.n();
    let dirs = match (xi, grid) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --xi or --grid".into())),
        (Some(t), None) => vec![parse_xi(t)?],
        (None, Some(0)) => return Err(CliError::Usage("--grid needs at least one direction".into())),
        (None, Some(count)) => Direction::random(n, count, seed)?,
        (None, None) => vec![Direction::basis(n, 0)?],
    };
    if let Some(d) = dirs.iter().find(|d| d.complex_dim() != n) {
        return Err(CliError::Usage(format!(
            "direction has {} coordinates, body lives in ℝ^{}",
            d.xi().len(),
            2 * n
        )));
    }
    Ok(dirs)
}

fn xi_text(xi: &[f64]) -> String {
    xi.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" ")
}

pub fn validate(body: &BodySpec, settings: &Settings) -> CliResult<CommandOutput> {
    let report = body.validate(settings.validation_samples, settings.seed);
    let mut table = Table::new(&["check", "passed", "worst_violation", "tolerance"]);
    let mut summary = vec![format!("{}: {} samples, seed {}", report.body, report.samples, report.seed)];
    for c in &report.checks {
        table.push(vec![c.name.clone(), c.passed.to_string(), num(c.worst_violation), num(c.tolerance)]);
        summary.push(format!(
            "  {:<12} {}  worst {:.3e}  tolerance {:.1e}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.worst_violation,
            c.tolerance
        ));
    }
    let outcome = if report.passed() { Outcome::Pass } else { Outcome::Violation };
    Ok(CommandOutput {
        stem: "validate".into(),
        outcome,
        result: serde_json::to_value(&report)?,
        table,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionMethodArg {
    Direct,
    Fourier,
    Both,
}

pub fn section(
    body: &BodySpec,
    dirs: &[Direction],
    method: SectionMethodArg,
    settings: &Settings,
) -> CliResult<CommandOutput> {
    let n = body.n();
    let direct = matches!(method, SectionMethodArg::Direct | SectionMethodArg::Both);
    let fourier = matches!(method, SectionMethodArg::Fourier | SectionMethodArg::Both);
    let rule = settings.section_rule(n)?;
    let ft = if fourier {
        let p = 2.0 * n as f64 - 2.0;
        Some(ft_norm_power(body, p, settings.jmax(2 * n), &*settings.sphere_rule(n)?)?)
    } else {
        None
    };

    let mut table = Table::new(&[
        "index",
        "xi",
        "direct",
        "direct_error",
        "fourier",
        "fourier_error",
        "discrepancy",
    ]);
    let mut rows = Vec::with_capacity(dirs.len());
    let mut max_disc = 0.0f64;
    for (i, d) in dirs.iter().enumerate() {
        let dr = if direct { Some(section_volume_direct(body, d, &rule)?) } else { None };
        let fr = match &ft {
            Some(ft) => Some(section_volume_fourier(body, d, ft)?),
            None => None,
        };
        let disc = match (&dr, &fr) {
            (Some(a), Some(b)) => Some((b.value - a.value).abs() / a.value.abs()),
            _ => None,
        };
        if let Some(x) = disc {
            max_disc = max_disc.max(x);
        }
        let cell = |v: Option<f64>| v.map(num).unwrap_or_default();
        table.push(vec![
            i.to_string(),
            xi_text(d.xi()),
            cell(dr.as_ref().map(|r| r.value)),
            cell(dr.as_ref().map(|r| r.error_estimate)),
            cell(fr.as_ref().map(|r| r.value)),
            cell(fr.as_ref().map(|r| r.error_estimate)),
            cell(disc),
        ]);
        rows.push(json!({ "xi": d.xi(), "direct": dr, "fourier": fr, "discrepancy": disc }));
    }
    let warnings = ft.as_ref().map(|f| f.warnings.clone()).unwrap_or_default();
    let mut summary = vec![format!("{}: {} direction(s), method {:?}", body.label(), dirs.len(), method)];
    if dirs.len() == 1 {
        summary.push(table.rows[0][2..].join("  "));
    }
    if method == SectionMethodArg::Both {
        summary.push(format!("max relative discrepancy {max_disc:.3e}"));
    }
    summary.extend(warnings.iter().map(|w| format!("warning: {w}")));
    Ok(CommandOutput {
        stem: "section".into(),
        outcome: Outcome::Pass,
        result: json!({
            "body": body,
            "method": method,
            "directions": rows,
            "max_discrepancy": (method == SectionMethodArg::Both).then_some(max_disc),
            "warnings": warnings,
        }),
        table,
        summary,
    })
}

pub fn volume(body: &BodySpec, settings: &Settings, monte_carlo: bool) -> CliResult<CommandOutput> {
    let rule = settings.sphere_rule(body.n())?;
    let report = volume_with_error(body, &rule)?;
    let polar = volume_polar(body, &rule)?;
    let closed = body.closed_form_volume();
    let mc = if monte_carlo { Some(mc_volume(body, settings.mc_samples, settings.seed)?) } else { None };

    let mut table = Table::new(&["quantity", "value", "error"]);
    table.push(vec![format!("{:?}", report.method).to_lowercase(), num(report.value), num(report.error_estimate)]);
    table.push(vec!["polar".into(), num(polar), String::new()]);
    let mut summary = vec![format!(
        "{}: volume {:.12} ± {:.1e} ({:?})",
        body.label(),
        report.value,
        report.error_estimate,
        report.method
    )];
    if let Some(c) = closed {
        table.push(vec!["closed_form".into(), num(c), String::new()]);
        summary.push(format!("closed form {c:.12}"));
    }
    if let Some(m) = &mc {
        table.push(vec!["monte_carlo".into(), num(m.estimate), num(m.std_error)]);
        summary.push(format!(
            "monte carlo {:.6} ± {:.1e} (z = {:.2})",
            m.estimate,
            m.std_error,
            m.z_score(report.value)
        ));
    }
    Ok(CommandOutput {
        stem: "volume".into(),
        outcome: Outcome::Pass,
        result: json!({
            "body": body,
            "quadrature": report,
            "polar": polar,
            "closed_form": closed,
            "monte_carlo": mc,
            "monte_carlo_z": mc.as_ref().map(|m| m.z_score(report.value)),
        }),
        table,
        summary,
    })
}

pub fn ft(body: &BodySpec, p: f64, dirs: &[Direction], settings: &Settings) -> CliResult<CommandOutput> {
    let n = body.n();
    let jmax = settings.jmax(2 * n);
    let transform = ft_norm_power(body, p, jmax, &*settings.sphere_rule(n)?)?;
    let values = transform.eval_many(&dirs.iter().map(|d| d.xi().to_vec()).collect::<Vec<_>>());
    let mut table = Table::new(&["index", "xi", "value"]);
    for (i, (d, v)) in dirs.iter().zip(&values).enumerate() {
        table.push(vec![i.to_string(), xi_text(d.xi()), num(*v)]);
    }
    let mut summary = vec![format!(
        "{}: p = {p}, Jmax = {jmax}, tail-energy ratio {:.3e}",
        body.label(),
        transform.source_tail_energy_ratio
    )];
    if values.len() == 1 {
        summary.push(format!("value {:.12}", values[0]));
    }
    summary.extend(transform.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(CommandOutput {
        stem: "ft".into(),
        outcome: Outcome::Pass,
        result: json!({
            "body": body,
            "p": p,
            "jmax": jmax,
            "multipliers": transform.multipliers,
            "source_tail_energy_ratio": transform.source_tail_energy_ratio,
            "warnings": transform.warnings,
            "expansion_rule": transform.expansion.rule,
            "values": dirs.iter().zip(&values).map(|(d, v)| json!({"xi": d.xi(), "value": v})).collect::<Vec<_>>(),
        }),
        table,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Stability,
    Separation,
    Corollary1,
    Parseval,
    Positivity,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Assert,
    Exploratory,
}

/// Operands of `theorem`; unused ones are ignored.
#[derive(Debug, Clone, Default)]
pub struct TheoremArgs {
    pub k: Option<BodySpec>,
    pub l: Option<BodySpec>,
    pub p: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_max: Option<u32>,
    pub exploratory: bool,
    /// Largest relative Parseval error accepted.
    pub parseval_bound: f64,
}

fn need<'a>(b: &'a Option<BodySpec>, name: &str) -> CliResult<&'a BodySpec> {
    b.as_ref().ok_or_else(|| CliError::Usage(format!("this check needs --{name}")))
}

fn stability_row(table: &mut Table, r: &StabilityReport) {
    table.push(vec![
        format!("{:?}", r.check).to_lowercase(),
        r.body_k.label(),
        r.body_l.label(),
        num(r.epsilon),
        num(r.lhs),
        num(r.rhs),
        num(r.margin),
        num(r.tolerance),
        r.hypothesis_satisfied.to_string(),
        r.pass.to_string(),
    ]);
}

fn stability_line(r: &StabilityReport) -> String {
    let mut s = format!(
        "{:?} {} vs {}: ε = {:.6e}, lhs = {:.10}, rhs = {:.10}, margin = {:.4e}, tol = {:.2e}, {}",
        r.check,
        r.body_k.label(),
        r.body_l.label(),
        r.epsilon,
        r.lhs,
        r.rhs,
        r.margin,
        r.tolerance,
        if r.pass { "pass" } else { "FAIL" }
    );
    if let Some(note) = &r.note {
        s.push_str(&format!(" ({note})"));
    }
    s
}

const STABILITY_HEADER: [&str; 10] = [
    "check",
    "body_k",
    "body_l",
    "epsilon",
    "lhs",
    "rhs",
    "margin",
    "tolerance",
    "hypothesis_satisfied",
    "pass",
];

pub fn theorem(which: Which, args: &TheoremArgs, settings: &Settings) -> CliResult<CommandOutput> {
    let stem = format!("theorem-{}", format!("{which:?}").to_lowercase());
    let (outcome, result, table, summary) = match which {
        Which::Stability | Which::Separation => {
            let (k, l) = (need(&args.k, "k")?, need(&args.l, "l")?);
            let r = if which == Which::Stability {
                stability_verify_with(k, l, settings, args.epsilon)?
            } else {
                separation_verify(k, l, settings)?
            };
            let mut table = Table::new(&STABILITY_HEADER);
            stability_row(&mut table, &r);
            (Outcome::of_check(r.pass, false), serde_json::to_value(&r)?, table, vec![stability_line(&r)])
        }
        Which::Corollary1 => {
            let (k, l) = (need(&args.k, "k")?, need(&args.l, "l")?);
            let r = corollary1_verify(k, l, settings)?;
            let mut table = Table::new(&STABILITY_HEADER);
            stability_row(&mut table, &r.forward);
            stability_row(&mut table, &r.backward);
            let line = format!(
                "corollary {} vs {}: |ΔVol^a| = {:.10} ≤ {:.10}, {}",
                k.label(),
                l.label(),
                r.lhs,
                r.rhs,
                if r.pass { "pass" } else { "FAIL" }
            );
            (Outcome::of_check(r.pass, false), serde_json::to_value(&r)?, table, vec![line])
        }
        Which::Parseval => {
            let (k, l) = (need(&args.k, "k")?, need(&args.l, "l")?);
            let p = args.p.unwrap_or(2.0 * k.n() as f64 - 2.0);
            let r = parseval_check(k, l, p, settings)?;
            let pass = r.relative_error <= args.parseval_bound;
            let mut table = Table::new(&["body_k", "body_l", "p", "jmax", "lhs", "rhs", "relative_error", "pass"]);
            table.push(vec![
                k.label(),
                l.label(),
                num(p),
                r.jmax.to_string(),
                num(r.lhs),
                num(r.rhs),
                num(r.relative_error),
                pass.to_string(),
            ]);
            let mut summary = vec![format!(
                "parseval p = {p}: lhs = {:.12e}, rhs = {:.12e}, relative error {:.3e} (bound {:.1e}), {}",
                r.lhs,
                r.rhs,
                r.relative_error,
                args.parseval_bound,
                if pass { "pass" } else { "FAIL" }
            )];
            summary.extend(r.warnings.iter().map(|w| format!("warning: {w}")));
            let mut value = serde_json::to_value(&r)?;
            value["bound"] = json!(args.parseval_bound);
            value["pass"] = json!(pass);
            (Outcome::of_check(pass, !r.warnings.is_empty()), value, table, summary)
        }
        Which::Positivity => {
            let k = need(&args.k, "k")?;
            let mode = if args.exploratory { PositivityMode::Exploratory } else { PositivityMode::Assert };
            let r = positivity_check(k, settings, mode)?;
            let mut table = Table::new(&["body", "mode", "jmax", "min", "max", "pass"]);
            table.push(vec![
                k.label(),
                format!("{mode:?}").to_lowercase(),
                r.jmax.to_string(),
                num(r.min),
                num(r.max),
                r.pass.map(|p| p.to_string()).unwrap_or_default(),
            ]);
            let verdict = match r.pass {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "not asserted",
            };
            let mut summary = vec![format!(
                "positivity {}: min {:.6e} at {:?}, max {:.6e}, {verdict}",
                k.label(),
                r.min,
                r.location,
                r.max
            )];
            summary.extend(r.warnings.iter().map(|w| format!("warning: {w}")));
            let outcome = Outcome::of_check(r.pass.unwrap_or(true), !r.warnings.is_empty());
            (outcome, serde_json::to_value(&r)?, table, summary)
        }
        Which::Gamma => {
            let rows = gamma_lemma_check(args.n_max.unwrap_or(170))?;
            let mut table = Table::new(&["n", "lhs", "rhs", "pass", "strict"]);
            for r in &rows {
                table.push(vec![r.n.to_string(), num(r.lhs), num(r.rhs), r.pass.to_string(), r.strict.to_string()]);
            }
            let pass = rows.iter().all(|r| r.pass);
            let line = format!(
                "gamma lemma n = 1..{}: {}, strict for n ≥ 2: {}",
                rows.len(),
                if pass { "pass" } else { "FAIL" },
                rows.iter().skip(1).all(|r| r.strict)
            );
            (Outcome::of_check(pass, false), serde_json::to_value(&rows)?, table, vec![line])
        }
    };
    Ok(CommandOutput { stem, outcome, result, table, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_inline_and_errors() {
        let b = load_body(r#"{"n": 2, "kind": "euclidean", "params": {"radius": 1.5}}"#).unwrap();
        assert_eq!(b, BodySpec::euclidean(2, 1.5).unwrap());
        let b = load_body(r#"{"n": 3, "kind": "lq", "params": {"q": "inf"}}"#).unwrap();
        assert_eq!(b, BodySpec::polydisc(3, 1.0).unwrap());
        assert!(matches!(load_body("{not json"), Err(CliError::Body(_))));
        assert!(matches!(load_body(r#"{"n": 2, "kind": "cube", "params": {}}"#), Err(CliError::Body(_))));
        assert!(matches!(load_body("/no/such/file.json"), Err(CliError::Read { .. })));
    }

    #[test]
    fn direction_parsing() {
        let b = BodySpec::euclidean(2, 1.0).unwrap();
        let d = directions(&b, Some("3, 0, 0, 4"), None, 1).unwrap();
        assert_eq!(d[0].xi(), &[0.6, 0.0, 0.0, 0.8]);
        assert_eq!(directions(&b, None, Some(64), 1).unwrap().len(), 64);
        assert_eq!(directions(&b, None, None, 1).unwrap()[0].xi(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(directions(&b, Some("1,0"), None, 1).is_err());
        assert!(directions(&b, Some("1,x,0,0"), None, 1).is_err());
        assert!(directions(&b, Some("1,0,0,0"), Some(3), 1).is_err());
    }

    #[test]
    fn ball_section_both() {
        let b = BodySpec::euclidean(2, 1.0).unwrap();
        let out = section(&b, &[Direction::basis(2, 0).unwrap()], SectionMethodArg::Both, &Settings::default())
            .unwrap();
        let disc = out.result["max_discrepancy"].as_f64().unwrap();
        assert!(disc <= 1e-10);
        let direct = out.result["directions"][0]["direct"]["value"].as_f64().unwrap();
        assert!((direct - std::f64::consts::PI).abs() < 1e-12);
    }
}
