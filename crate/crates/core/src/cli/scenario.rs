//! Scenario documents: a JSON object with a `scenarios` array.

use serde::{Deserialize, Serialize};

use crate::identities::Tolerances;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub domain: DomainRef,
    pub map_plus: MapRef,
    #[serde(default)]
    pub map_minus: Option<MapRef>,
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Option<ToleranceOverrides>,
    /// Random points per map for the pointwise checks.
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub expect: Option<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DomainRef {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MapRef {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub args: Vec<MapRef>,
}

impl MapRef {
    pub fn new(name: &str, params: Vec<f64>) -> Self {
        Self { name: name.to_string(), params, args: Vec::new() }
    }

    /// Depth-first walk over this reference and its arguments.
    pub fn any(&self, pred: &impl Fn(&MapRef) -> bool) -> bool {
        pred(self) || self.args.iter().any(|a| a.any(pred))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Triple,
    Theorem1,
    Kulpa,
    Krylov,
    Piola,
    CauchyBinet,
    NoRetraction,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::CauchyBinet,
        CheckKind::Krylov,
        CheckKind::Kulpa,
        CheckKind::NoRetraction,
        CheckKind::Piola,
        CheckKind::Theorem1,
        CheckKind::Triple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Triple => "triple",
            CheckKind::Theorem1 => "theorem1",
            CheckKind::Kulpa => "kulpa",
            CheckKind::Krylov => "krylov",
            CheckKind::Piola => "piola",
            CheckKind::CauchyBinet => "cauchy_binet",
            CheckKind::NoRetraction => "no_retraction",
        }
    }

    pub fn needs_atlas(self) -> bool {
        matches!(
            self,
            CheckKind::Triple
                | CheckKind::Theorem1
                | CheckKind::Kulpa
                | CheckKind::CauchyBinet
                | CheckKind::NoRetraction
        )
    }

    pub fn needs_pair(self) -> bool {
        matches!(self, CheckKind::Theorem1 | CheckKind::Kulpa | CheckKind::Krylov)
    }

    pub fn summary(self) -> &'static str {
        match self {
            CheckKind::Triple => "volume, flux and form evaluators agree",
            CheckKind::Theorem1 => "boundary-equal pair has equal integrals",
            CheckKind::Kulpa => "each single-component replacement keeps the integral",
            CheckKind::Krylov => "leading coefficient of det(I + t f') equals the integral",
            CheckKind::Piola => "div A = 0 and grad f1 . A = det f' at random points",
            CheckKind::CauchyBinet => "A . N equals the pulled-back minor at boundary nodes",
            CheckKind::NoRetraction => "sphere-valued maps have det f' = 0; boundary-identity maps integrate to Vol(B)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    HypothesisViolation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default)]
    pub integral: Option<f64>,
    #[serde(default)]
    pub boundary: Option<f64>,
    #[serde(default)]
    pub pointwise: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            integral: self.integral.unwrap_or(base.integral),
            boundary: self.boundary.unwrap_or(base.boundary),
            pointwise: self.pointwise.unwrap_or(base.pointwise),
        }
    }
}

/// 1-based line of byte offset `at`.
pub(crate) fn line_of(source: &str, at: usize) -> usize {
    source[..at.min(source.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Best-effort source line for the scenario with `id`: the first line holding
/// `needle` after the `"id"` entry, else that entry's own line.
pub(crate) fn locate(source: &str, id: &str, needle: Option<&str>) -> Option<usize> {
    let quoted_id = serde_json::to_string(id).ok()?;
    let start = source.match_indices(&quoted_id).map(|(i, _)| i).find(|&i| {
        let before = source[..i].trim_end();
        before.strip_suffix(':').is_some_and(|b| b.trim_end().ends_with("\"id\""))
    })?;
    let hit =
        needle.and_then(|n| serde_json::to_string(n).ok()).and_then(|q| source[start..].find(&q).map(|i| start + i));
    Some(line_of(source, hit.unwrap_or(start)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_scenario() {
        let src = r#"{"scenarios": [{"id": "a", "domain": {"name": "unit_ball", "params": [2]},
            "map_plus": {"name": "identity"}, "checks": ["triple", "cauchy_binet"],
            "expect": "hypothesis-violation"}]}"#;
        let f: ScenarioFile = serde_json::from_str(src).unwrap();
        let s = &f.scenarios[0];
        assert_eq!(s.checks, vec![CheckKind::Triple, CheckKind::CauchyBinet]);
        assert_eq!(s.expect, Some(Expectation::HypothesisViolation));
        assert!(s.map_minus.is_none());
    }

    #[test]
    fn unknown_fields_and_checks_are_rejected() {
        let extra = r#"{"scenarios": [], "extra": 1}"#;
        assert!(serde_json::from_str::<ScenarioFile>(extra).is_err());
        let bad = r#"{"scenarios": [{"id": "a", "domain": {"name": "unit_ball"},
            "map_plus": {"name": "identity"}, "checks": ["nope"]}]}"#;
        let err = serde_json::from_str::<ScenarioFile>(bad).unwrap_err();
        assert_eq!(err.line(), 2);
    }

    #[test]
    fn locate_finds_field_line() {
        let src = "{\"scenarios\": [\n{\"id\": \"x\",\n \"map_plus\": {\"name\": \"bogus\"}}]}";
        assert_eq!(locate(src, "x", Some("bogus")), Some(3));
        assert_eq!(locate(src, "x", None), Some(2));
        assert_eq!(locate(src, "y", None), None);
    }

    #[test]
    fn overrides_merge() {
        let o = ToleranceOverrides { integral: Some(1e-3), ..Default::default() };
        let t = o.apply(Tolerances::POLYNOMIAL);
        assert_eq!(t.integral, 1e-3);
        assert_eq!(t.boundary, Tolerances::POLYNOMIAL.boundary);
    }
}
