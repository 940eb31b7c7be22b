//! Subcommand execution.

use std::collections::BTreeMap;

use superint::oracle::{angular_fd_eigen, radial_fd_eigen, Grid1D};
use superint::spectral::{self, enumerate_levels, spectral_data, QuantumNumbers};
use superint::verify::{
    check_gauge_identity, falsifiability_controls, general_potential_cases, singleton_cross_check,
    suite_conservation, suite_eigen_residual, suite_lie, suite_general_potential, suite_quadratic,
    IdentityReport, Verdict, DEFAULT_TOLERANCE, QUADRATIC_TOLERANCE,
};
use superint::{Error, ModelSpec};

use crate::config::RunConfig;
use crate::report::{
    LevelEntry, ModelSection, OracleEntry, PointValue, Report, Summary, SuiteEntry, VerificationSection,
};
use crate::CliError;

/// Tolerance of the termwise comparison with the all-singleton relations.
pub const TERMWISE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Spectrum,
    Wavefunction,
    Oracle,
    Report,
}

pub struct Outcome {
    pub report: Report,
    /// 0 when every check passed, 1 otherwise.
    pub exit_code: u8,
}

pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    if cmd == Command::Wavefunction && cfg.wavefunction.is_none() {
        return Err(CliError::config("wavefunction", "required by the wavefunction subcommand"));
    }
    let v = &cfg.verification;
    let base = v.sample_config(DEFAULT_TOLERANCE);
    let mut report = Report {
        model: ModelSection::new(&spec),
        verification: VerificationSection {
            seed: base.seed,
            samples: base.n_samples,
            jet_order: base.jet_order,
            degree: base.degree,
            lo: base.lo,
            hi: base.hi,
            tolerance_override: v.tolerance,
        },
        suites: Vec::new(),
        spectrum: Vec::new(),
        oracles: Vec::new(),
        wavefunction: Vec::new(),
        summary: Summary::default(),
        versions: versions(),
    };
    if matches!(cmd, Command::Verify | Command::Report) {
        report.suites = verify_suites(&spec, cfg);
    }
    if matches!(cmd, Command::Spectrum | Command::Report) {
        match spectrum(&spec, cfg) {
            Ok(levels) => report.spectrum = levels,
            Err(e) => report
                .suites
                .push(SuiteEntry::errored("spectrum", "level enumeration", "E = -eta^2 / n^2", e)),
        }
    }
    if matches!(cmd, Command::Oracle | Command::Report) {
        report.oracles = oracles(&spec, cfg);
    }
    if cmd == Command::Wavefunction || (cmd == Command::Report && cfg.wavefunction.is_some()) {
        report.wavefunction = wavefunction(&spec, cfg);
    }
    report.summarize();
    let exit_code = if report.all_passed() { 0 } else { 1 };
    Ok(Outcome { report, exit_code })
}

fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("report_format".to_string(), "1".to_string()),
        ("superint".to_string(), superint::VERSION.to_string()),
        ("superint-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ])
}

fn push_reports(out: &mut Vec<SuiteEntry>, suite: &str, name: &str, formula: &str, result: superint::Result<Vec<IdentityReport>>) {
    match result {
        Ok(reports) => out.extend(reports.iter().map(|r| SuiteEntry::from_identity(suite, r))),
        Err(e) => out.push(SuiteEntry::errored(suite, name, formula, e)),
    }
}

/// Every applicable suite, in a fixed order. Inapplicable checks are listed
/// as skipped with a reason code.
pub fn verify_suites(spec: &ModelSpec, cfg: &RunConfig) -> Vec<SuiteEntry> {
    let v = &cfg.verification;
    let sc = v.sample_config(DEFAULT_TOLERANCE);
    let n = spec.n_blocks();
    let mut out = Vec::new();

    push_reports(&mut out, "conservation", "conservation", "[H, I] = 0", suite_conservation(spec, &sc));

    for (label, gp, _) in general_potential_cases(spec) {
        let name = format!("extended LRL, V = {label}");
        if cfg.hydrogen_mode() && label.contains("alpha") {
            out.push(SuiteEntry::skipped("general_potential", &name, "[X_i, -Δ - η/r + V] = 0", "hydrogen_mode_no_couplings"));
            continue;
        }
        match suite_general_potential(&gp, spec.eta, spec.dim(), &sc) {
            Ok(reports) => out.extend(reports.iter().map(|r| {
                let mut e = SuiteEntry::from_identity("general_potential", r);
                e.name = format!("V = {label}: {}", e.name);
                e
            })),
            Err(e) => out.push(SuiteEntry::errored("general_potential", &name, "[X_i, -Δ - η/r + V] = 0", e)),
        }
    }

    push_reports(&mut out, "lie", "lie relations", "Lie relations among the integrals", suite_lie(spec, &sc));

    let qc = v.sample_config(QUADRATIC_TOLERANCE);
    match suite_quadratic(spec, &qc) {
        Ok(relations) => out.extend(relations.iter().map(|r| SuiteEntry::from_relation("quadratic", r))),
        Err(e) => out.push(SuiteEntry::errored("quadratic", "quadratic relations", "quadratic algebra relations", e)),
    }
    if spec.partition.is_all_singletons() && n >= 3 {
        match singleton_cross_check(spec, &v.sample_config(TERMWISE_TOLERANCE)) {
            Ok(reports) => out.extend(group_termwise(&reports)),
            Err(e) => out.push(SuiteEntry::errored("quadratic_termwise", "termwise", "general right-hand side = all-singleton right-hand side, term by term", e)),
        }
    }

    const GAUGE: &str = "G Z_p G^-1 = S_{1,p}(c) + N_p, G Y_p G^-1 = S_{p,N+d_N-1}(c) + M_p";
    if n < 3 {
        out.push(SuiteEntry::skipped("gauge", "gauge identity", GAUGE, "requires_three_blocks"));
    } else {
        let l = v.gauge_l.clone().unwrap_or_else(|| vec![0; n]);
        for p in 2..n {
            push_reports(&mut out, "gauge", &format!("gauge p={p}"), GAUGE, check_gauge_identity(spec, p, &l, &sc));
        }
    }

    let states = v.eigen_states.clone().unwrap_or_else(|| {
        let ground = QuantumNumbers::ground(spec);
        let excited = QuantumNumbers { n_r: 1, ..ground.clone() };
        vec![ground, excited]
    });
    for qn in &states {
        let name = format!("eigenfunction n_r={} J={:?} l={:?}", qn.n_r, qn.j, qn.l);
        match suite_eigen_residual(spec, qn, &sc) {
            Ok(r) => out.push(SuiteEntry::from_identity("eigen", &r)),
            Err(Error::UnsupportedRegime(why)) => {
                out.push(SuiteEntry::skipped("eigen", &name, "H Psi = E Psi", format!("unsupported_regime: {why}")))
            }
            Err(e) => out.push(SuiteEntry::errored("eigen", &name, "H Psi = E Psi", e)),
        }
    }

    if v.falsifiability {
        match falsifiability_controls(&sc) {
            Ok(controls) => out.extend(controls.iter().map(SuiteEntry::from_control)),
            Err(e) => out.push(SuiteEntry::errored("falsifiability", "mutations", "perturbed checks fail", e)),
        }
    }
    out
}

/// Termwise reports sharing a relation name become one entry whose forms are
/// the variants.
fn group_termwise(reports: &[IdentityReport]) -> Vec<SuiteEntry> {
    let mut names: Vec<&str> = Vec::new();
    for r in reports {
        if !names.contains(&r.name.as_str()) {
            names.push(&r.name);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let forms: Vec<IdentityReport> = reports.iter().filter(|r| r.name == name).cloned().collect();
            let passing = forms.iter().find(|f| f.passed());
            let verdict = if passing.is_some() {
                Verdict::Pass
            } else if forms.iter().all(|f| f.verdict == Verdict::Skipped) {
                Verdict::Skipped
            } else {
                Verdict::Fail
            };
            let variant = passing.and_then(|f| f.variant.clone());
            SuiteEntry::from_forms("quadratic_termwise", name, &forms[0].formula, verdict, variant, &forms)
        })
        .collect()
}

/// Levels up to the configured denominator.
pub fn spectrum(spec: &ModelSpec, cfg: &RunConfig) -> superint::Result<Vec<LevelEntry>> {
    let bound = match cfg.spectrum.max_denominator {
        Some(b) => b,
        None => spectral_data(spec, &QuantumNumbers::ground(spec))?.denominator + 4.0,
    };
    let levels = enumerate_levels(spec, bound)?;
    let keep = cfg.spectrum.max_levels.unwrap_or(levels.len());
    Ok(levels.iter().take(keep).map(LevelEntry::from).collect())
}

fn default_oracle_states(spec: &ModelSpec) -> Vec<QuantumNumbers> {
    let ground = QuantumNumbers::ground(spec);
    let mut states = vec![ground.clone(), QuantumNumbers { n_r: 1, ..ground.clone() }];
    if spec.n_blocks() >= 2 {
        let mut j = ground.j.clone();
        j[0] = 1;
        states.push(QuantumNumbers { j, ..ground });
    }
    states
}

fn oracle_entry(quantity: String, qn: &QuantumNumbers, closed: f64, tolerance: f64, fd: superint::Result<f64>, relative: bool) -> OracleEntry {
    match fd {
        Ok(fd) => {
            let error = if relative { (fd - closed).abs() / closed.abs() } else { (fd - closed).abs() };
            OracleEntry {
                quantity,
                quantum_numbers: qn.clone(),
                closed_form: closed,
                finite_difference: fd,
                error,
                tolerance,
                verdict: if error <= tolerance { Verdict::Pass } else { Verdict::Fail },
                reason: None,
            }
        }
        Err(e) => OracleEntry {
            quantity,
            quantum_numbers: qn.clone(),
            closed_form: closed,
            finite_difference: f64::NAN,
            error: f64::NAN,
            tolerance,
            verdict: Verdict::Fail,
            reason: Some(format!("error: {e}")),
        },
    }
}

/// Finite-difference eigenvalues against the closed forms for the
/// configured states.
pub fn oracles(spec: &ModelSpec, cfg: &RunConfig) -> Vec<OracleEntry> {
    let o = &cfg.oracle;
    let states = o.states.clone().unwrap_or_else(|| default_oracle_states(spec));
    let mut out = Vec::new();
    for qn in &states {
        let data = match spectral_data(spec, qn) {
            Ok(d) => d,
            Err(e) => {
                let mut entry = oracle_entry("energy".into(), qn, f64::NAN, o.energy_tolerance, Err(e.clone()), true);
                if matches!(e, Error::UnsupportedRegime(_)) {
                    entry.verdict = Verdict::Skipped;
                }
                out.push(entry);
                continue;
            }
        };
        if spec.eta > 0.0 {
            let fd = o
                .radial_grid
                .map(Ok)
                .unwrap_or_else(|| Grid1D::radial_for_level(spec.eta, data.denominator, data.kappa))
                .and_then(|g| radial_fd_eigen(spec.eta, data.radial_coupling(), &g, qn.n_r + 1))
                .map(|e| e[qn.n_r]);
            out.push(oracle_entry("energy".into(), qn, data.energy, o.energy_tolerance, fd, true));
        } else {
            out.push(OracleEntry {
                verdict: Verdict::Skipped,
                reason: Some("no_bound_states: eta <= 0".into()),
                ..oracle_entry("energy".into(), qn, data.energy, o.energy_tolerance, Ok(f64::NAN), true)
            });
        }
        let grid = o.angular_grid.unwrap_or_else(Grid1D::angular_default);
        for i in 1..spec.n_blocks() {
            let (sin, cos) = data.angular_coefficients(i);
            let k = qn.j[i - 1];
            let fd = angular_fd_eigen(sin, cos, i, &grid, k + 1).map(|b| b[k]);
            out.push(oracle_entry(format!("b_{i}"), qn, data.b[i - 1], o.angular_tolerance, fd, false));
        }
    }
    out
}

/// Ψ at the configured points.
pub fn wavefunction(spec: &ModelSpec, cfg: &RunConfig) -> Vec<PointValue> {
    let Some(w) = &cfg.wavefunction else {
        return Vec::new();
    };
    let qn = w.quantum_numbers.clone().unwrap_or_else(|| QuantumNumbers::ground(spec));
    w.points
        .iter()
        .map(|p| {
            let r = spectral::wavefunction_eval(spec, &qn, p);
            PointValue {
                point: p.clone(),
                quantum_numbers: qn.clone(),
                value: r.as_ref().ok().copied(),
                error: r.err().map(|e| e.to_string()),
            }
        })
        .collect()
}
