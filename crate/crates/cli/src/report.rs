//! Report document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use superint::spectral::{Level, QuantumNumbers};
use superint::verify::{IdentityReport, MutationControl, RelationReport, TermBreakdown, Verdict};
use superint::ModelSpec;

use crate::json::real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub model: ModelSection,
    pub verification: VerificationSection,
    pub suites: Vec<SuiteEntry>,
    pub spectrum: Vec<LevelEntry>,
    pub oracles: Vec<OracleEntry>,
    pub wavefunction: Vec<PointValue>,
    pub summary: Summary,
    pub versions: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    pub partition: Vec<usize>,
    pub eta: f64,
    pub alpha: Vec<f64>,
    pub dimension: usize,
    pub blocks: usize,
    pub hydrogen_mode: bool,
}

impl ModelSection {
    pub fn new(spec: &ModelSpec) -> Self {
        ModelSection {
            partition: spec.partition.sizes().to_vec(),
            eta: spec.eta,
            alpha: spec.alpha.clone(),
            dimension: spec.dim(),
            blocks: spec.n_blocks(),
            hydrogen_mode: spec.n_blocks() == 1,
        }
    }
}

/// Sampling parameters shared by the suites; per-suite tolerances are in
/// the entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationSection {
    pub seed: u64,
    pub samples: usize,
    pub jet_order: usize,
    pub degree: usize,
    pub lo: f64,
    pub hi: f64,
    pub tolerance_override: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub term: String,
    #[serde(with = "real")]
    pub max_abs: f64,
    #[serde(with = "real")]
    pub fitted_multiplier: f64,
}

impl From<&TermBreakdown> for TermEntry {
    fn from(t: &TermBreakdown) -> Self {
        TermEntry {
            term: t.term.clone(),
            max_abs: t.max_abs,
            fitted_multiplier: t.fitted_multiplier,
        }
    }
}

/// One checked identity and the formula it asserts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub suite: String,
    pub name: String,
    pub formula: String,
    pub verdict: Verdict,
    #[serde(with = "real")]
    pub max_residual: f64,
    pub tolerance: f64,
    pub variant: Option<String>,
    pub seed: u64,
    pub reason: Option<String>,
    #[serde(with = "real::vec")]
    pub residuals: Vec<f64>,
    pub terms: Vec<TermEntry>,
    /// Alternative forms of the same relation, each with its own verdict.
    pub forms: Vec<SuiteEntry>,
}

impl SuiteEntry {
    pub fn from_identity(suite: &str, r: &IdentityReport) -> Self {
        SuiteEntry {
            suite: suite.to_string(),
            name: r.name.clone(),
            formula: r.formula.clone(),
            verdict: r.verdict,
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            variant: r.variant.clone(),
            seed: r.seed,
            reason: r.reason.clone(),
            residuals: r.residuals.clone(),
            terms: r.terms.iter().map(TermEntry::from).collect(),
            forms: Vec::new(),
        }
    }

    /// A relation entry: verdict and variant of the first passing form, the
    /// residual of that form (or the smallest one when none passes).
    pub fn from_forms(suite: &str, name: &str, formula: &str, verdict: Verdict, variant: Option<String>, forms: &[IdentityReport]) -> Self {
        let chosen = forms
            .iter()
            .find(|f| f.passed())
            .or_else(|| {
                forms
                    .iter()
                    .filter(|f| f.verdict == Verdict::Fail)
                    .min_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
            })
            .or(forms.first());
        SuiteEntry {
            suite: suite.to_string(),
            name: name.to_string(),
            formula: formula.to_string(),
            verdict,
            max_residual: chosen.map_or(0.0, |f| f.max_residual),
            tolerance: chosen.map_or(0.0, |f| f.tolerance),
            variant,
            seed: chosen.map_or(0, |f| f.seed),
            reason: chosen.and_then(|f| f.reason.clone()),
            residuals: Vec::new(),
            terms: Vec::new(),
            forms: forms.iter().map(|f| SuiteEntry::from_identity(suite, f)).collect(),
        }
    }

    pub fn from_relation(suite: &str, r: &RelationReport) -> Self {
        Self::from_forms(suite, &r.relation, &r.formula, r.verdict, r.variant.clone(), &r.forms)
    }

    pub fn from_control(c: &MutationControl) -> Self {
        let flipped = c.flipped();
        SuiteEntry {
            suite: "falsifiability".into(),
            name: format!("{}: {}", c.suite, c.mutation),
            formula: c.baseline.formula.clone(),
            verdict: if flipped { Verdict::Pass } else { Verdict::Fail },
            max_residual: c.mutated.max_residual,
            tolerance: c.mutated.tolerance,
            variant: None,
            seed: c.mutated.seed,
            reason: Some(format!(
                "baseline {} at {:e}, mutated {} at {:e}",
                verdict_word(c.baseline.verdict),
                c.baseline.max_residual,
                verdict_word(c.mutated.verdict),
                c.mutated.max_residual
            )),
            residuals: Vec::new(),
            terms: Vec::new(),
            forms: vec![
                SuiteEntry::from_identity(&c.suite, &c.baseline),
                SuiteEntry::from_identity(&c.suite, &c.mutated),
            ],
        }
    }

    pub fn skipped(suite: &str, name: &str, formula: &str, reason: impl Into<String>) -> Self {
        SuiteEntry::from_identity(suite, &IdentityReport::skipped(name, formula, reason))
    }

    /// A check that could not be carried out.
    pub fn errored(suite: &str, name: &str, formula: &str, error: impl std::fmt::Display) -> Self {
        SuiteEntry {
            verdict: Verdict::Fail,
            max_residual: f64::NAN,
            ..Self::skipped(suite, name, formula, format!("error: {error}"))
        }
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Skipped => "skipped",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelEntry {
    pub energy: f64,
    pub denominator: f64,
    pub multiplicity: u64,
    pub witness: QuantumNumbers,
}

impl From<&Level> for LevelEntry {
    fn from(l: &Level) -> Self {
        LevelEntry {
            energy: l.energy,
            denominator: l.denominator,
            multiplicity: l.multiplicity,
            witness: l.witness.clone(),
        }
    }
}

/// Closed-form value against a finite-difference eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub quantity: String,
    pub quantum_numbers: QuantumNumbers,
    pub closed_form: f64,
    #[serde(with = "real")]
    pub finite_difference: f64,
    /// Relative for energies, absolute for angular eigenvalues.
    #[serde(with = "real")]
    pub error: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub point: Vec<f64>,
    pub quantum_numbers: QuantumNumbers,
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Report {
    pub fn summarize(&mut self) {
        let mut s = Summary::default();
        let verdicts = self
            .suites
            .iter()
            .map(|e| e.verdict)
            .chain(self.oracles.iter().map(|o| o.verdict));
        for v in verdicts {
            match v {
                Verdict::Pass => s.passed += 1,
                Verdict::Fail => s.failed += 1,
                Verdict::Skipped => s.skipped += 1,
            }
        }
        self.summary = s;
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}
