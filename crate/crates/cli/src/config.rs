//! Run configuration: a single human-editable TOML file. Every tolerance the
//! engine uses is surfaced here with defaults; a fixed config (and seed)
//! yields byte-identical artifacts.

use anyhow::{bail, Context};
use krf_core::flow::{FlowConfig, SnapshotWindow};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub snapshots: SnapshotSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_schema() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    /// u0 = amplitude * P(cos ξ).
    pub amplitude: f64,
    /// Coefficients of P, lowest degree first.
    pub poly: Vec<f64>,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection { amplitude: 0.05, poly: vec![0.0, 0.0, 1.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_end: f64,
    /// CFL constant for dt = cfl (π/N)² min e^{2u}.
    pub cfl: f64,
    /// Diagnostics record spacing.
    pub cadence: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { t_end: 5.0, cfl: 0.2, cadence: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSection {
    pub sector_cap: i32,
    /// Solve the del-bar spectrum every k-th record; values in between carry
    /// the latest solve.
    pub spectrum_every: usize,
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection { sector_cap: 8, spectrum_every: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    /// Stop when sup |ġ| falls below this.
    pub convergence: f64,
    /// Exit 4 when the potential-flow residual exceeds this (needs snapshots).
    pub h_flow_residual_max: f64,
    /// Exit 4 when the Ẏ or |Δh|² identity residuals exceed this.
    pub identity_residual_max: f64,
    /// Rate-fit window: Y inside [floor, ceiling].
    pub fit_floor: f64,
    pub fit_ceiling: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            convergence: 1e-9,
            h_flow_residual_max: 1e-4,
            identity_residual_max: 1e-3,
            fit_floor: 1e-10,
            fit_ceiling: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnapshotSection {
    /// Flow times at which full-state text snapshots are written.
    pub times: Vec<f64>,
    /// Start of a uniformly spaced window of full states kept for residual
    /// studies.
    pub window_start: Option<f64>,
    /// Number of states in the window.
    pub window_count: usize,
    /// Integrator steps between window states.
    pub window_stride: u64,
}

impl Default for SnapshotSection {
    fn default() -> Self {
        SnapshotSection { times: Vec::new(), window_start: None, window_count: 0, window_stride: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text).context("parsing config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema != 1 {
            bail!("unsupported config schema {}", self.schema);
        }
        if self.grid.n < 32 {
            bail!("grid.n = {} below the minimum of 32", self.grid.n);
        }
        if !(self.init.amplitude.abs() < 0.5) {
            bail!("init.amplitude = {} must satisfy |a| < 0.5", self.init.amplitude);
        }
        if !(self.time.cadence > 0.0) {
            bail!("time.cadence must be positive");
        }
        if !(self.time.t_end > 0.0) || !(self.time.cfl > 0.0) {
            bail!("time.t_end and time.cfl must be positive");
        }
        if self.spectral.sector_cap < 3 {
            bail!("spectral.sector_cap must be at least 3");
        }
        Ok(())
    }

    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            n: self.grid.n,
            amplitude: self.init.amplitude,
            poly: self.init.poly.clone(),
            t_end: self.time.t_end,
            cfl: self.time.cfl,
            cadence: self.time.cadence,
            convergence_tol: self.tolerances.convergence,
            snapshot_window: self.snapshots.window_start.map(|t_start| SnapshotWindow {
                t_start,
                count: self.snapshots.window_count.max(3),
                stride: self.snapshots.window_stride.max(1),
            }),
            spectrum_every: self.spectral.spectrum_every,
            sector_cap: self.spectral.sector_cap,
        }
    }
}
