//! Validation and execution of scenario suites.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::{boundary_agreement, Domain, DomainKind, SmoothMap};
use crate::identities::{
    cauchy_binet_check, integral_flux, integral_form, integral_triple, krylov_leading_coefficient_check,
    kulpa_telescope, no_retraction_demo, piola_divergence_fd, piola_divergence_residual, product_rule_residual,
    theorem1_check, Rules, Tolerances, Verdict, BOUNDARY_SAMPLES, CAUCHY_BINET_TOL, FD_STEP, FLUX_FORM_TOL,
    PIOLA_FD_TOL, PIOLA_TOL, PRODUCT_RULE_TOL,
};
use crate::quadrature::default_order;
use crate::VERSION;

use super::registry::Registry;
use super::report::{scenario_status, summary_csv, CheckRecord, ScenarioReport, Status, Volatile};
use super::scenario::{locate, CheckKind, MapRef, Scenario, ScenarioFile};

/// Thresholds of the integral identities checked by `kulpa` and `krylov`.
pub const KULPA_TOL: f64 = 1e-8;
pub const KRYLOV_TOL: f64 = 1e-8;
pub const DEFAULT_POINTS: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;

/// The scenario suite shipped with the crate.
pub const PAPER_CORE: &str = include_str!("../../scenarios/paper-core.json");
pub const PAPER_CORE_NAME: &str = "paper-core";

/// One validation problem, addressed by JSON path.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Command-line overrides applied on top of every scenario.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub order: Option<usize>,
    pub seed: Option<u64>,
    pub filter: Option<glob::Pattern>,
}

/// A validated scenario with its domain and maps built.
pub struct Prepared {
    pub scenario: Scenario,
    pub domain: Domain,
    pub plus: SmoothMap,
    pub minus: Option<SmoothMap>,
    pub order: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub points: usize,
}

fn uses_bump(r: &MapRef) -> bool {
    r.any(&|m| m.name == "bump")
}

fn id_is_safe(id: &str) -> bool {
    !id.is_empty()
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !id.starts_with('.')
}

/// Parses `source`, checks every reference, and builds the scenarios that
/// pass `overrides.filter`.
pub fn prepare_suite(
    source: &str,
    registry: &Registry,
    overrides: &Overrides,
) -> std::result::Result<Vec<Prepared>, SuiteError> {
    let file: ScenarioFile = serde_json::from_str(source).map_err(|e| {
        let message = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        SuiteError::Parse {
            line: e.line(),
            column: e.column(),
            message: message.strip_suffix(&suffix).unwrap_or(&message).to_string(),
        }
    })?;
    let mut diags = Vec::new();
    let mut seen = BTreeSet::new();
    let mut prepared = Vec::new();
    for (i, s) in file.scenarios.into_iter().enumerate() {
        let at = |needle: Option<&str>| locate(source, &s.id, needle);
        let mut diag = |field: String, needle: Option<&str>, message: String| {
            diags.push(Diagnostic { field: format!("scenarios[{i}].{field}"), line: at(needle), message })
        };
        if !id_is_safe(&s.id) {
            diag("id".into(), None, format!("`{}` must be non-empty [A-Za-z0-9_.-]", s.id));
        }
        if !seen.insert(s.id.clone()) {
            diag("id".into(), None, format!("duplicate id `{}`", s.id));
        }
        let mut kinds = BTreeSet::new();
        for (j, c) in s.checks.iter().enumerate() {
            if !kinds.insert(*c) {
                diag(format!("checks[{j}]"), Some(c.name()), format!("`{}` listed twice", c.name()));
            }
            if c.needs_pair() && s.map_minus.is_none() {
                diag(format!("checks[{j}]"), Some(c.name()), format!("`{}` needs map_minus", c.name()));
            }
        }
        if s.expect.is_some() && s.map_minus.is_none() {
            diag("expect".into(), Some("expect"), "negative controls need map_minus".into());
        }
        if !registry.has_domain(&s.domain.name) {
            let name = s.domain.name.clone();
            diag("domain.name".into(), Some(&name), format!("unknown domain `{name}`"));
            continue;
        }
        let mut unknown = false;
        for (field, r) in [("map_plus", Some(&s.map_plus)), ("map_minus", s.map_minus.as_ref())] {
            if let Some((path, name)) = r.and_then(|r| registry.unknown_map(r)) {
                diag(format!("{field}.{path}"), Some(&name), format!("unknown map `{name}`"));
                unknown = true;
            }
        }
        if unknown {
            continue;
        }
        let domain = match registry.build_domain(&s.domain) {
            Ok(d) => d,
            Err(e) => {
                let name = s.domain.name.clone();
                diag("domain".into(), Some(&name), e.to_string());
                continue;
            }
        };
        for (j, c) in s.checks.iter().enumerate() {
            if c.needs_atlas() && !domain.has_atlas() {
                diag(format!("checks[{j}]"), Some(c.name()), format!("`{}` needs a boundary atlas", c.name()));
            }
            if *c == CheckKind::NoRetraction && domain.kind() != DomainKind::Ball {
                diag(format!("checks[{j}]"), Some(c.name()), "`no_retraction` needs a unit ball".into());
            }
        }
        let mut build = |field: &str, r: &MapRef| match registry.build_map(r, &domain) {
            Ok(f) if f.dim_in() == domain.dim() && f.dim_out() == domain.dim() => Some(f),
            Ok(f) => {
                diag(
                    field.into(),
                    Some(&r.name),
                    format!("`{}` is {} -> {}, not n -> n", f.name(), f.dim_in(), f.dim_out()),
                );
                None
            }
            Err(e) => {
                diag(field.into(), Some(&r.name), e.to_string());
                None
            }
        };
        let plus = build("map_plus", &s.map_plus);
        let minus = s.map_minus.as_ref().map(|r| build("map_minus", r));
        let (Some(plus), minus) = (plus, minus) else { continue };
        let minus = match minus {
            Some(Some(m)) => Some(m),
            Some(None) => continue,
            None => None,
        };
        if let Some(p) = overrides.filter.as_ref() {
            if !p.matches(&s.id) {
                continue;
            }
        }
        let has_bump = uses_bump(&s.map_plus) || s.map_minus.as_ref().is_some_and(uses_bump);
        let base = if has_bump { Tolerances::BUMP } else { Tolerances::POLYNOMIAL };
        prepared.push(Prepared {
            order: overrides.order.or(s.order).unwrap_or_else(|| default_order(domain.dim(), has_bump)),
            seed: overrides.seed.or(s.seed).unwrap_or(DEFAULT_SEED),
            tolerances: s.tolerances.map_or(base, |o| o.apply(base)),
            points: s.points.unwrap_or(DEFAULT_POINTS),
            scenario: s,
            domain,
            plus,
            minus,
        });
    }
    if diags.is_empty() {
        Ok(prepared)
    } else {
        Err(SuiteError::Invalid(diags))
    }
}

fn record<T: Serialize>(check: CheckKind, status: Status, discrepancy: f64, tolerance: f64, details: T) -> CheckRecord {
    CheckRecord {
        check,
        status,
        discrepancy: Some(discrepancy),
        tolerance,
        details: serde_json::to_value(details).unwrap_or(serde_json::Value::Null),
        error: None,
    }
}

fn within(value: f64, tol: f64) -> Status {
    if value <= tol {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn maps(p: &Prepared) -> Vec<&SmoothMap> {
    std::iter::once(&p.plus).chain(p.minus.as_ref()).collect()
}

fn pair(p: &Prepared) -> Result<&SmoothMap> {
    p.minus.as_ref().ok_or_else(|| Error::Argument("check needs map_minus".into()))
}

fn check_triple(p: &Prepared, rules: &Rules) -> Result<CheckRecord> {
    let triples = maps(p)
        .into_iter()
        .map(|f| integral_triple(f, &p.domain, &rules.volume, &rules.surface))
        .collect::<Result<Vec<_>>>()?;
    let spread = triples.iter().map(|t| t.max_spread()).fold(0.0, f64::max);
    let tol = p.tolerances.integral;
    let status = if triples.iter().all(|t| t.is_finite()) { within(spread, tol) } else { Status::Fail };
    Ok(record(CheckKind::Triple, status, spread, tol, json!({ "plus": triples[0], "minus": triples.get(1) })))
}

fn check_theorem1(p: &Prepared, rules: &Rules) -> Result<CheckRecord> {
    let c = theorem1_check(&p.scenario.id, &p.plus, pair(p)?, &p.domain, rules, p.tolerances)?;
    let status = match c.verdict {
        Verdict::Pass => Status::Pass,
        Verdict::Fail => Status::Fail,
        Verdict::HypothesisViolation => Status::HypothesisViolation,
    };
    Ok(record(CheckKind::Theorem1, status, c.discrepancy, c.tolerance.integral, &c))
}

fn check_kulpa(p: &Prepared, rules: &Rules) -> Result<CheckRecord> {
    let chain = kulpa_telescope(&p.plus, pair(p)?, &p.domain, rules)?;
    let tol = p.scenario.tolerances.and_then(|t| t.integral).unwrap_or(KULPA_TOL);
    let worst = chain.max_step_discrepancy();
    let gated = chain.steps.iter().any(|s| s.boundary_gap > p.tolerances.boundary);
    let status = if gated { Status::HypothesisViolation } else { within(worst, tol) };
    let flux = chain.steps.iter().map(|s| s.flux_discrepancy()).fold(0.0, f64::max);
    let details = json!({
        "total_change": chain.total_change(),
        "max_flux_step_discrepancy": flux,
        "steps": chain.steps,
    });
    Ok(record(CheckKind::Kulpa, status, worst, tol, details))
}

fn check_krylov(p: &Prepared, rules: &Rules, boundary_gap: Option<f64>) -> Result<CheckRecord> {
    let c = krylov_leading_coefficient_check(&p.plus, pair(p)?, &p.domain, rules)?;
    let tol = p.scenario.tolerances.and_then(|t| t.integral).unwrap_or(KRYLOV_TOL);
    let discrepancy = c.discrepancy();
    let own = (c.plus.leading() - c.volume_plus).abs().max((c.minus.leading() - c.volume_minus).abs());
    let status = match boundary_gap {
        Some(g) if g > p.tolerances.boundary => {
            if own <= tol {
                Status::HypothesisViolation
            } else {
                Status::Fail
            }
        }
        _ => within(discrepancy, tol),
    };
    Ok(record(CheckKind::Krylov, status, discrepancy, tol, &c))
}

#[derive(Debug, Default, Clone, Copy, Serialize)]
struct PiolaStats {
    max_abs_divergence: f64,
    max_fd_gap: f64,
    max_product_rule_residual: f64,
}

impl PiolaStats {
    fn merge(self, o: Self) -> Self {
        Self {
            max_abs_divergence: self.max_abs_divergence.max(o.max_abs_divergence),
            max_fd_gap: self.max_fd_gap.max(o.max_fd_gap),
            max_product_rule_residual: self.max_product_rule_residual.max(o.max_product_rule_residual),
        }
    }
}

/// `count` seeded points of `d`, uniform in the chart's reference cube.
pub fn random_points(d: &Domain, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..d.dim()).map(|_| rng.random::<f64>()).collect();
            d.volume_chart().eval_f64(&v)
        })
        .collect()
}

fn check_piola(p: &Prepared) -> Result<CheckRecord> {
    let pts = random_points(&p.domain, p.points, p.seed)?;
    let div_tol = p.scenario.tolerances.and_then(|t| t.pointwise).unwrap_or(PIOLA_TOL);
    let mut per_map = Vec::new();
    for f in maps(p) {
        let stats = pts
            .par_iter()
            .map(|x| -> Result<PiolaStats> {
                let div = piola_divergence_residual(f, x).map_err(|e| e.at(x))?;
                let fd = piola_divergence_fd(f, x, FD_STEP).map_err(|e| e.at(x))?;
                let pr = product_rule_residual(f, x).map_err(|e| e.at(x))?;
                Ok(PiolaStats {
                    max_abs_divergence: div.abs(),
                    max_fd_gap: (div - fd).abs(),
                    max_product_rule_residual: pr.relative_residual,
                })
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(PiolaStats::default(), PiolaStats::merge);
        per_map.push(stats);
    }
    let all = per_map.iter().copied().fold(PiolaStats::default(), PiolaStats::merge);
    let ok = all.max_abs_divergence <= div_tol
        && all.max_fd_gap <= PIOLA_FD_TOL
        && all.max_product_rule_residual <= PRODUCT_RULE_TOL;
    let details = json!({
        "points": pts.len(),
        "fd_step": FD_STEP,
        "fd_tolerance": PIOLA_FD_TOL,
        "product_rule_tolerance": PRODUCT_RULE_TOL,
        "plus": per_map[0],
        "minus": per_map.get(1),
    });
    let status = if ok { Status::Pass } else { Status::Fail };
    Ok(record(CheckKind::Piola, status, all.max_abs_divergence, div_tol, details))
}

fn check_cauchy_binet(p: &Prepared, rules: &Rules) -> Result<CheckRecord> {
    let tol = p.scenario.tolerances.and_then(|t| t.pointwise).unwrap_or(CAUCHY_BINET_TOL);
    let k = p.domain.dim() - 1;
    let mut nodes = 0;
    let mut worst_gap = 0.0_f64;
    let mut worst_flux_form = 0.0_f64;
    for f in maps(p) {
        for chart in p.domain.boundary_atlas() {
            let gaps = (0..rules.surface.len())
                .into_par_iter()
                .map(|idx| -> Result<f64> {
                    let mut v = vec![0.0; k];
                    rules.surface.node(idx, &mut v);
                    let u = chart.to_rectangle(&v);
                    Ok(cauchy_binet_check(f, chart, &u)?.gap())
                })
                .collect::<Result<Vec<_>>>()?;
            nodes += gaps.len();
            worst_gap = gaps.into_iter().fold(worst_gap, f64::max);
        }
        let flux = integral_flux(f, &p.domain, &rules.surface)?;
        let form = integral_form(f, &p.domain, &rules.surface)?;
        worst_flux_form = worst_flux_form.max((flux - form).abs());
    }
    let status = if worst_gap <= tol && worst_flux_form <= FLUX_FORM_TOL { Status::Pass } else { Status::Fail };
    let details = json!({
        "nodes": nodes,
        "max_flux_form_gap": worst_flux_form,
        "flux_form_tolerance": FLUX_FORM_TOL,
    });
    Ok(record(CheckKind::CauchyBinet, status, worst_gap, tol, details))
}

fn check_no_retraction(p: &Prepared, rules: &Rules) -> Result<CheckRecord> {
    let r = no_retraction_demo(&p.domain, rules)?;
    let worst = r.boundary_identity.iter().map(|b| b.max_error).fold(0.0, f64::max);
    let status = if r.holds() { Status::Pass } else { Status::Fail };
    Ok(record(CheckKind::NoRetraction, status, worst, r.integral_tolerance, &r))
}

fn run_check(p: &Prepared, rules: &Rules, kind: CheckKind, boundary_gap: Option<f64>) -> CheckRecord {
    let result = match kind {
        CheckKind::Triple => check_triple(p, rules),
        CheckKind::Theorem1 => check_theorem1(p, rules),
        CheckKind::Kulpa => check_kulpa(p, rules),
        CheckKind::Krylov => check_krylov(p, rules, boundary_gap),
        CheckKind::Piola => check_piola(p),
        CheckKind::CauchyBinet => check_cauchy_binet(p, rules),
        CheckKind::NoRetraction => check_no_retraction(p, rules),
    };
    result.unwrap_or_else(|e| {
        let tol = match kind {
            CheckKind::Piola => PIOLA_TOL,
            CheckKind::CauchyBinet => CAUCHY_BINET_TOL,
            _ => p.tolerances.integral,
        };
        CheckRecord::error(kind, tol, e.to_string())
    })
}

/// Runs every requested check; evaluation errors become `error` records.
pub fn run_scenario(p: &Prepared) -> ScenarioReport {
    let start = Instant::now();
    let s = &p.scenario;
    let boundary_gap = match (&p.minus, p.domain.has_atlas()) {
        (Some(m), true) => boundary_agreement(&p.plus, m, &p.domain, BOUNDARY_SAMPLES).ok(),
        _ => None,
    };
    let (checks, error) = match Rules::new(p.domain.dim(), p.order) {
        Ok(rules) => (s.checks.iter().map(|&k| run_check(p, &rules, k, boundary_gap)).collect(), None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let status = if error.is_some() { Status::Error } else { scenario_status(&checks, s.expect) };
    let max_discrepancy = checks.iter().filter_map(|c| c.discrepancy).reduce(f64::max);
    ScenarioReport {
        scenario: s.id.clone(),
        library_version: VERSION,
        status,
        expect: s.expect,
        domain: s.domain.clone(),
        map_plus: s.map_plus.clone(),
        map_minus: s.map_minus.clone(),
        order: p.order,
        seed: p.seed,
        tolerances: p.tolerances,
        boundary_gap,
        max_discrepancy,
        checks,
        error,
        volatile: Volatile { duration_ms: start.elapsed().as_millis() as u64 },
    }
}

/// Scenarios run in parallel; reports come back in input order.
pub fn run_prepared(prepared: &[Prepared]) -> Vec<ScenarioReport> {
    prepared.par_iter().map(run_scenario).collect()
}

pub fn run_source(
    source: &str,
    registry: &Registry,
    overrides: &Overrides,
) -> std::result::Result<Vec<ScenarioReport>, SuiteError> {
    Ok(run_prepared(&prepare_suite(source, registry, overrides)?))
}

/// Writes `<id>.json` per report and `summary.csv`, in input order.
pub fn write_reports(reports: &[ScenarioReport], dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for r in reports {
        std::fs::write(dir.join(format!("{}.json", r.scenario)), r.to_json())?;
    }
    std::fs::write(dir.join("summary.csv"), summary_csv(reports))
}

/// Scenario source text for `target`: a file path, or the built-in suite name.
pub fn load_source(target: &str) -> std::result::Result<String, SuiteError> {
    let path = Path::new(target);
    if path.exists() {
        return Ok(std::fs::read_to_string(path)?);
    }
    if target == PAPER_CORE_NAME {
        return Ok(PAPER_CORE.to_string());
    }
    Err(SuiteError::Usage(format!("no scenario file `{target}` (built-in suites: {PAPER_CORE_NAME})")))
}

/// Demo report for the ball of dimension `n` at the default bump order.
pub fn no_retraction(n: usize, order: Option<usize>) -> Result<crate::identities::NoRetractionReport> {
    let d = Domain::unit_ball(n)?;
    let rules = Rules::new(n, order.unwrap_or_else(|| default_order(n, true)))?;
    no_retraction_demo(&d, &rules)
}
