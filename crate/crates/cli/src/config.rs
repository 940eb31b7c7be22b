//! Run configuration.
//!
//! The model sits at the top level (`partition`, `eta`, `alpha`); every other
//! section is optional and filled with defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use superint::oracle::Grid1D;
use superint::spectral::QuantumNumbers;
use superint::verify::SampleConfig;
use superint::{ModelSpec, Partition};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub partition: Vec<usize>,
    pub eta: f64,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub verification: Verification,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub wavefunction: Option<WavefunctionConfig>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Verification {
    pub seed: u64,
    pub samples: usize,
    pub jet_order: usize,
    /// Degree of the random test polynomials; defaults to the jet order.
    pub degree: Option<usize>,
    /// Overrides every suite's default tolerance when set.
    pub tolerance: Option<f64>,
    /// Sampling range `|x_i| ∈ [lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    /// Block angular momenta for the gauge identity, one per block.
    pub gauge_l: Option<Vec<usize>>,
    /// States for the eigenfunction residual; ground and first radial
    /// excitation by default.
    pub eigen_states: Option<Vec<QuantumNumbers>>,
    pub falsifiability: bool,
}

impl Default for Verification {
    fn default() -> Self {
        let s = SampleConfig::default();
        Verification {
            seed: s.seed,
            samples: s.n_samples,
            jet_order: s.jet_order,
            degree: None,
            tolerance: None,
            lo: s.lo,
            hi: s.hi,
            gauge_l: None,
            eigen_states: None,
            falsifiability: true,
        }
    }
}

impl Verification {
    /// Sampling parameters with `tolerance` unless overridden.
    pub fn sample_config(&self, tolerance: f64) -> SampleConfig {
        SampleConfig {
            n_samples: self.samples,
            degree: self.degree.unwrap_or(self.jet_order),
            lo: self.lo,
            hi: self.hi,
            jet_order: self.jet_order,
            seed: self.seed,
            tolerance: self.tolerance.unwrap_or(tolerance),
            ..SampleConfig::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Largest Balmer denominator enumerated; the ground denominator plus 4
    /// by default.
    pub max_denominator: Option<f64>,
    /// Keep only the lowest levels.
    pub max_levels: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Fixed radial grid; per-level grids from the decay length otherwise.
    pub radial_grid: Option<Grid1D>,
    pub angular_grid: Option<Grid1D>,
    pub states: Option<Vec<QuantumNumbers>>,
    /// Bound on `|E_fd − E|/|E|`.
    pub energy_tolerance: f64,
    /// Bound on `|b_fd − b|`.
    pub angular_tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            radial_grid: None,
            angular_grid: None,
            states: None,
            energy_tolerance: 2e-3,
            angular_tolerance: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefunctionConfig {
    #[serde(default)]
    pub quantum_numbers: Option<QuantumNumbers>,
    pub points: Vec<Vec<f64>>,
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path == "." { "(root)".into() } else { path }, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn spec(&self) -> Result<ModelSpec, CliError> {
        let partition = Partition::new(self.partition.clone()).map_err(|e| CliError::config("partition", e))?;
        ModelSpec::new(partition, self.eta, self.alpha.clone()).map_err(|e| CliError::config("alpha", e))
    }

    /// Whether the model is the pure Coulomb problem (one block, no couplings).
    pub fn hydrogen_mode(&self) -> bool {
        self.partition.len() == 1
    }

    pub fn validate(&self) -> Result<(), CliError> {
        Partition::new(self.partition.clone()).map_err(|e| CliError::config("partition", e))?;
        if !self.eta.is_finite() {
            return Err(CliError::config("eta", "must be finite"));
        }
        let n = self.partition.len();
        if self.alpha.len() + 1 != n {
            return Err(CliError::config(
                "alpha",
                format!("expected {} entries for {n} blocks, found {}", n - 1, self.alpha.len()),
            ));
        }
        if let Some(i) = self.alpha.iter().position(|a| !a.is_finite()) {
            return Err(CliError::config(format!("alpha[{i}]"), "must be finite"));
        }
        let spec = self.spec()?;
        let v = &self.verification;
        if v.samples == 0 {
            return Err(CliError::config("verification.samples", "must be positive"));
        }
        if let Some(t) = v.tolerance {
            if !(t > 0.0) {
                return Err(CliError::config("verification.tolerance", "must be positive"));
            }
        }
        v.sample_config(1.0).validate(0).map_err(|e| {
            let field = if v.degree.is_some_and(|d| d < v.jet_order) {
                "verification.degree"
            } else {
                "verification.lo"
            };
            CliError::config(field, e)
        })?;
        if let Some(l) = &v.gauge_l {
            if l.len() != n {
                return Err(CliError::config(
                    "verification.gauge_l",
                    format!("expected {n} entries, found {}", l.len()),
                ));
            }
        }
        for (i, qn) in v.eigen_states.iter().flatten().enumerate() {
            qn.validate(&spec)
                .map_err(|e| CliError::config(format!("verification.eigen_states[{i}]"), e))?;
        }
        if let Some(d) = self.spectrum.max_denominator {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::config("spectrum.max_denominator", "must be positive and finite"));
            }
        }
        let o = &self.oracle;
        if !(o.energy_tolerance > 0.0) {
            return Err(CliError::config("oracle.energy_tolerance", "must be positive"));
        }
        if !(o.angular_tolerance > 0.0) {
            return Err(CliError::config("oracle.angular_tolerance", "must be positive"));
        }
        if let Some(g) = &o.radial_grid {
            g.validate().map_err(|e| CliError::config("oracle.radial_grid", e))?;
            if !(g.start > 0.0) {
                return Err(CliError::config("oracle.radial_grid.start", "must be positive"));
            }
        }
        if let Some(g) = &o.angular_grid {
            g.validate().map_err(|e| CliError::config("oracle.angular_grid", e))?;
            if !(g.start > 0.0 && g.end < std::f64::consts::FRAC_PI_2) {
                return Err(CliError::config("oracle.angular_grid", "must lie inside (0, pi/2)"));
            }
        }
        for (i, qn) in o.states.iter().flatten().enumerate() {
            qn.validate(&spec)
                .map_err(|e| CliError::config(format!("oracle.states[{i}]"), e))?;
        }
        if let Some(w) = &self.wavefunction {
            if let Some(qn) = &w.quantum_numbers {
                qn.validate(&spec)
                    .map_err(|e| CliError::config("wavefunction.quantum_numbers", e))?;
            }
            for (i, p) in w.points.iter().enumerate() {
                if p.len() != spec.dim() {
                    return Err(CliError::config(
                        format!("wavefunction.points[{i}]"),
                        format!("expected {} coordinates, found {}", spec.dim(), p.len()),
                    ));
                }
            }
        }
        Ok(())
    }
}
