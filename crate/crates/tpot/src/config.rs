//! Run configuration: a TOML file, then the `TPOT_OUTPUT_DIR` environment
//! variable, then command-line flags, in increasing precedence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tpot_core::geometry::Bandwidth;
use tpot_core::network::{DiagramMass, IncidenceMode, NetworkOptions};
use tpot_core::ot::SinkhornOptions;
use tpot_core::tpot::TpotParams;

use crate::error::{AppError, Result};
use crate::formats::{AlgorithmName, KernelName};

pub const OUTPUT_DIR_ENV: &str = "TPOT_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum IncidenceName {
    Binary,
    Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DiagramMassName {
    Uniform,
    Counting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub kernel: KernelName,
    pub degree: usize,
    pub top_k: Option<usize>,
    pub threshold: Option<f64>,
    pub incidence: IncidenceName,
    pub lambda: f64,
    pub diagram_mass: DiagramMassName,
    pub alpha: f64,
    pub beta: f64,
    pub eps_v: f64,
    pub eps_e: f64,
    pub algorithm: AlgorithmName,
    pub max_iter: usize,
    pub tol: f64,
    pub gauss_seidel: bool,
    pub sinkhorn_max_iter: usize,
    pub sinkhorn_tol: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub n_frames: usize,
    pub d_embed: usize,
    /// Snapshots share point order, so point `i` in one snapshot is point
    /// `i` in the next.
    pub known_correspondence: bool,
    /// JSON list of per-step ground-truth feature permutations for `track`.
    pub truth: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = TpotParams::default();
        Self {
            inputs: Vec::new(),
            kernel: KernelName::Gaussian,
            degree: 1,
            top_k: None,
            threshold: None,
            incidence: IncidenceName::Binary,
            lambda: 1.0,
            diagram_mass: DiagramMassName::Uniform,
            alpha: p.alpha,
            beta: p.beta,
            eps_v: p.eps_v,
            eps_e: p.eps_e,
            algorithm: p.algorithm.into(),
            max_iter: p.max_iter,
            tol: p.tol,
            gauss_seidel: p.gauss_seidel,
            sinkhorn_max_iter: p.sinkhorn.max_iter,
            sinkhorn_tol: p.sinkhorn.tol,
            output_dir: PathBuf::from("out"),
            seed: 0,
            n_frames: 11,
            d_embed: 2,
            known_correspondence: false,
            truth: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| AppError::Toml {
            path: origin.to_path_buf(),
            source: e,
        })
    }

    /// Reads a config file; relative input paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in cfg.inputs.iter_mut().chain(cfg.truth.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Applies `TPOT_OUTPUT_DIR` when it is set and nonempty.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(AppError::Config("degree must be at least 1".into()));
        }
        if self.top_k == Some(0) {
            return Err(AppError::Config("top_k must be positive".into()));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) || !t.is_finite() {
                return Err(AppError::Config("threshold must be positive and finite".into()));
            }
        }
        if self.incidence == IncidenceName::Smoothed && !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(AppError::Config("lambda must be positive".into()));
        }
        if self.n_frames < 2 {
            return Err(AppError::Config("n_frames must be at least 2".into()));
        }
        if self.d_embed < 1 {
            return Err(AppError::Config("d_embed must be at least 1".into()));
        }
        self.tpot_params()
            .validate()
            .map_err(|e| AppError::Config(e.to_string()))?;
        for p in self.inputs.iter().chain(self.truth.iter()) {
            if !p.exists() {
                return Err(AppError::Config(format!("input {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn network_options(&self) -> NetworkOptions {
        NetworkOptions {
            kernel: self.kernel.into(),
            laplacian_bandwidth: Bandwidth::Paper,
            degree: self.degree,
            top_k: self.top_k,
            threshold: self.threshold,
            incidence: match self.incidence {
                IncidenceName::Binary => IncidenceMode::Binary,
                IncidenceName::Smoothed => IncidenceMode::Smoothed { lambda: self.lambda },
            },
            diagram_mass: match self.diagram_mass {
                DiagramMassName::Uniform => DiagramMass::Uniform,
                DiagramMassName::Counting => DiagramMass::Counting,
            },
        }
    }

    pub fn tpot_params(&self) -> TpotParams {
        TpotParams {
            alpha: self.alpha,
            beta: self.beta,
            eps_v: self.eps_v,
            eps_e: self.eps_e,
            max_iter: self.max_iter,
            tol: self.tol,
            algorithm: self.algorithm.into(),
            gauss_seidel: self.gauss_seidel,
            sinkhorn: SinkhornOptions {
                max_iter: self.sinkhorn_max_iter,
                tol: self.sinkhorn_tol,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::from_toml_str(text, Path::new("run.toml"))
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn keys_parse() {
        let cfg = parse(
            r#"
            kernel = "sq_dist"
            degree = 1
            top_k = 9
            incidence = "smoothed"
            lambda = 2.0
            alpha = 0.1
            beta = 2.5
            algorithm = "bcd"
            gauss_seidel = true
            seed = 7
            "#,
        )
        .unwrap();
        assert_eq!(cfg.kernel, KernelName::SqDist);
        assert_eq!(cfg.top_k, Some(9));
        assert_eq!(cfg.network_options().incidence, IncidenceMode::Smoothed { lambda: 2.0 });
        let p = cfg.tpot_params();
        assert_eq!((p.alpha, p.beta), (0.1, 2.5));
        assert!(p.gauss_seidel);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn degree_zero_rejected() {
        let cfg = parse("degree = 0").unwrap();
        assert!(matches!(cfg.validate(), Err(AppError::Config(m)) if m.contains("degree")));
    }

    #[test]
    fn bad_parameters_rejected() {
        for text in ["alpha = 1.5", "eps_v = 0.0", "beta = -1.0", "n_frames = 1", "top_k = 0"] {
            assert!(parse(text).unwrap().validate().is_err(), "{text}");
        }
    }

    #[test]
    fn unknown_key_and_missing_input_rejected() {
        assert!(matches!(parse("alhpa = 0.5"), Err(AppError::Toml { .. })));
        let cfg = parse(r#"inputs = ["/definitely/not/here.csv"]"#).unwrap();
        assert!(cfg.validate().is_err());
    }
}
