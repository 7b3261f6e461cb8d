//! Run configuration: flat `key = value` files with command-line overrides.

use std::path::PathBuf;

use crate::benchmark::TableMeshKind;
use crate::error::{Error, Result};
use crate::linalg::SolverMode;
use crate::stepper::{SourceMode, StepperOptions};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "FRACFEM_OUT_DIR";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha: f64,
    /// None means the fractional Crank-Nicolson choice sigma = alpha/2.
    pub sigma: Option<f64>,
    pub t_final: f64,
    pub n: usize,
    pub m: usize,
    pub r: f64,
    pub mesh_kind: TableMeshKind,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub solver_mode: SolverMode,
    pub source_mode: SourceMode,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.5,
            sigma: None,
            t_final: 1.0,
            n: 32,
            m: 9,
            r: 4.0,
            mesh_kind: TableMeshKind::TwoPart,
            newton_tol: 1e-7,
            newton_max_iter: 50,
            solver_mode: SolverMode::Direct,
            source_mode: SourceMode::L2Projection,
            output_path: None,
        }
    }
}

impl RunConfig {
    pub fn effective_sigma(&self) -> f64 {
        self.sigma.unwrap_or(self.alpha / 2.0)
    }

    pub fn stepper_options(&self) -> StepperOptions {
        StepperOptions {
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
            solver_mode: self.solver_mode,
            source_mode: self.source_mode,
        }
    }

    /// Parse a flat key = value file ('#' starts a comment).
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key = value, got '{raw}'",
                    path.display(),
                    lineno + 1
                )));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one key/value pair (file line or CLI override).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| {
                Error::Config(format!("invalid value '{value}' for key '{key}'"))
            })
        }
        match key {
            "alpha" => self.alpha = parse(key, value)?,
            "sigma" => self.sigma = Some(parse(key, value)?),
            "t_final" | "T" => self.t_final = parse(key, value)?,
            "n" | "N" => self.n = parse(key, value)?,
            "m" | "M" => self.m = parse(key, value)?,
            "r" => self.r = parse(key, value)?,
            "mesh_kind" => {
                self.mesh_kind = match value {
                    "graded" => TableMeshKind::Graded,
                    "uniform" => TableMeshKind::Uniform,
                    "twopart" | "two_part" | "two-part" => TableMeshKind::TwoPart,
                    other => {
                        return Err(Error::Config(format!(
                            "mesh_kind must be graded | uniform | twopart, got '{other}'"
                        )))
                    }
                }
            }
            "newton_tol" => self.newton_tol = parse(key, value)?,
            "newton_max_iter" => self.newton_max_iter = parse(key, value)?,
            "solver_mode" => {
                self.solver_mode = match value {
                    "direct" => SolverMode::Direct,
                    "iterative" => SolverMode::Iterative,
                    other => {
                        return Err(Error::Config(format!(
                            "solver_mode must be direct | iterative, got '{other}'"
                        )))
                    }
                }
            }
            "source_mode" => {
                self.source_mode = match value {
                    "l2" | "l2_projection" => SourceMode::L2Projection,
                    "nodal" | "nodal_interpolation" => SourceMode::NodalInterpolation,
                    other => {
                        return Err(Error::Config(format!(
                            "source_mode must be l2 | nodal, got '{other}'"
                        )))
                    }
                }
            }
            "output_path" | "out" => self.output_path = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Enforce every downstream parameter-domain constraint up front.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if let Some(s) = self.sigma {
            if !(0.0..1.0).contains(&s) {
                return Err(Error::Config(format!("sigma must lie in [0, 1), got {s}")));
            }
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config(format!("T must be > 0, got {}", self.t_final)));
        }
        if self.n == 0 {
            return Err(Error::Config("N must be >= 1".into()));
        }
        if self.m < 3 {
            return Err(Error::Config(format!("M must be >= 3, got {}", self.m)));
        }
        if !(self.r >= 1.0) {
            return Err(Error::Config(format!("r must be >= 1, got {}", self.r)));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::Config("newton_tol must be > 0".into()));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::Config("newton_max_iter must be >= 1".into()));
        }
        // a two-part mesh with too few intervals fails only at build time;
        // surface it here so `solve` exits with a configuration error
        self.mesh_kind
            .build(self.n, self.r)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments_and_overrides() {
        let dir = std::env::temp_dir().join("fracfem_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(
            &path,
            "# benchmark setup\nalpha = 0.4\nn = 17\nm = 17  # spatial nodes\nmesh_kind = twopart\nr = 5\n",
        )
        .unwrap();
        let mut cfg = RunConfig::from_file(&path).unwrap();
        assert_eq!(cfg.alpha, 0.4);
        assert_eq!(cfg.n, 17);
        assert_eq!(cfg.m, 17);
        assert_eq!(cfg.mesh_kind, TableMeshKind::TwoPart);
        assert!((cfg.effective_sigma() - 0.2).abs() < 1e-15);
        cfg.set("sigma", "0.3").unwrap();
        assert_eq!(cfg.effective_sigma(), 0.3);
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("alpha", "x").is_err());
        assert!(cfg.set("nonsense", "1").is_err());
        cfg.set("r", "0.5").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.set("alpha", "1.5").unwrap();
        assert!(cfg.validate().is_err());
        // two-part mesh needs enough intervals
        let mut cfg = RunConfig::default();
        cfg.set("n", "1").unwrap();
        cfg.set("mesh_kind", "twopart").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn malformed_file_line_is_config_error() {
        let dir = std::env::temp_dir().join("fracfem_cfg_test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.cfg");
        std::fs::write(&path, "alpha 0.4\n").unwrap();
        assert!(matches!(RunConfig::from_file(&path), Err(Error::Config(_))));
    }
}
