//! Run configuration: JSON in, validated structs out. The schema shipped at
//! `config.schema.json` documents the same shape; validation here is what
//! gates execution (exit code 2 on violations).

use serde::Deserialize;
use szego_core::{HardyRational, PoleSum};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Partial-fraction representation of the initial datum.
    pub initial: PoleSum,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub disk: DiskConfig,
    #[serde(default)]
    pub audit: AuditConfig,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub xmin: f64,
    pub xmax: f64,
    pub n: usize,
    #[serde(default)]
    pub eta: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { xmin: -10.0, xmax: 10.0, n: 201, eta: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskConfig {
    pub modes: usize,
    pub dt: f64,
    #[serde(default = "default_pad")]
    pub pad: usize,
}

fn default_pad() -> usize {
    4
}

impl Default for DiskConfig {
    fn default() -> Self {
        DiskConfig { modes: 512, dt: 1e-3, pad: 4 }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub iterations: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig { iterations: 40 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config does not match the schema: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<(RunConfig, String), ConfigError> {
        let raw = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&raw)?;
        config.validate()?;
        Ok((config, raw))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if HardyRational::new(self.initial.clone()).is_none() {
            return fail("initial datum must have all poles strictly below the real axis".into());
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return fail("times must be finite".into());
        }
        if !(self.grid.xmin < self.grid.xmax) {
            return fail(format!("grid requires xmin < xmax, got [{}, {}]", self.grid.xmin, self.grid.xmax));
        }
        if self.grid.n < 2 {
            return fail(format!("grid.n must be >= 2, got {}", self.grid.n));
        }
        if self.grid.eta < 0.0 || !self.grid.eta.is_finite() {
            return fail(format!("grid.eta must be finite and >= 0, got {}", self.grid.eta));
        }
        if !(self.disk.dt > 0.0) || !self.disk.dt.is_finite() {
            return fail(format!("disk.dt must be positive, got {}", self.disk.dt));
        }
        if self.disk.modes < 16 {
            return fail(format!("disk.modes must be >= 16, got {}", self.disk.modes));
        }
        if self.disk.pad < 2 {
            return fail(format!("disk.pad must be >= 2, got {}", self.disk.pad));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> HardyRational {
        HardyRational::new(self.initial.clone()).expect("validated on load")
    }

    pub fn grid_points(&self) -> Vec<f64> {
        let g = &self.grid;
        let step = (g.xmax - g.xmin) / (g.n - 1) as f64;
        (0..g.n).map(|k| g.xmin + step * k as f64).collect()
    }

    /// Times sorted ascending; the integrator walks through them in order.
    pub fn sorted_times(&self) -> Vec<f64> {
        let mut t = self.times.clone();
        t.sort_by(f64::total_cmp);
        t
    }
}
