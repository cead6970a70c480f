//! Run configuration: built-in defaults, overridden by an optional TOML file,
//! overridden in turn by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::spectrum::{time_scales, SystemConfig};
use crate::subplanck::SensitivityMode;
use crate::wavepacket::PacketSpec;
use crate::wigner::WignerGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Spectrum,
    Carpet,
    Wigner,
    Subplanck,
    Revivals,
    Fidelity,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Spectrum => "spectrum",
            Subcommand::Carpet => "carpet",
            Subcommand::Wigner => "wigner",
            Subcommand::Subplanck => "subplanck",
            Subcommand::Revivals => "revivals",
            Subcommand::Fidelity => "fidelity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketSection {
    pub x_bar: f64,
    pub delta_x: f64,
    pub p_bar: f64,
    /// Replaces `round(|p_bar| / pi)` in the time scales and revival predictions.
    pub n_bar_override: Option<u32>,
}

impl Default for PacketSection {
    fn default() -> Self {
        let p = PacketSpec::default();
        PacketSection {
            x_bar: p.x_bar,
            delta_x: p.delta_x,
            p_bar: p.p_bar,
            n_bar_override: None,
        }
    }
}

impl PacketSection {
    pub fn spec(&self) -> PacketSpec {
        PacketSpec {
            x_bar: self.x_bar,
            delta_x: self.delta_x,
            p_bar: self.p_bar,
        }
    }

    pub fn n_bar(&self) -> u32 {
        self.n_bar_override.unwrap_or_else(|| self.spec().n_bar())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Basename of the data files; the subcommand name when absent.
    pub name: Option<String>,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("."),
            name: None,
            formats: vec![Format::Csv, Format::Pgm],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// Levels to tabulate; the expansion's `n_max` when absent.
    pub n_levels: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarpetSection {
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
    pub nx: usize,
}

impl Default for CarpetSection {
    fn default() -> Self {
        CarpetSection {
            t0: 0.0,
            t1: 0.5,
            nt: crate::carpet::DEFAULT_NT,
            nx: crate::carpet::DEFAULT_NX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerSection {
    pub t: f64,
    pub nx: usize,
    pub np: usize,
    /// Momentum half-range; `|p_bar| + 6 / delta_x` when absent.
    pub p_max: Option<f64>,
    pub oversample: usize,
}

impl Default for WignerSection {
    fn default() -> Self {
        WignerSection {
            t: 0.25,
            nx: crate::wigner::DEFAULT_NX,
            np: crate::wigner::DEFAULT_NP,
            p_max: None,
            oversample: crate::wigner::DEFAULT_OVERSAMPLE,
        }
    }
}

impl WignerSection {
    pub fn grid(&self, packet: &PacketSpec) -> WignerGrid {
        WignerGrid {
            nx: self.nx,
            np: self.np,
            p_max: self.p_max.unwrap_or_else(|| packet.required_momentum_extent()),
            oversample: self.oversample,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubplanckSection {
    /// Evaluation time of the single report when `q2_list` is empty.
    pub t: f64,
    /// `q^2` values of a sensitivity curve; empty for a single report at `system.q_squared`.
    pub q2_list: Vec<f64>,
    pub mode: SensitivityMode,
    pub fringes: bool,
}

impl Default for SubplanckSection {
    fn default() -> Self {
        SubplanckSection {
            t: 0.25,
            q2_list: Vec::new(),
            mode: SensitivityMode::ShortTime,
            fringes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RevivalsSection {
    pub s_max: u32,
}

impl Default for RevivalsSection {
    fn default() -> Self {
        RevivalsSection { s_max: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FidelitySection {
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

impl Default for FidelitySection {
    fn default() -> Self {
        FidelitySection {
            t0: 0.9,
            t1: 1.1,
            nt: 2001,
        }
    }
}

/// Every parameter a run can use. A config file holds any subset of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub packet: PacketSection,
    pub system: SystemConfig,
    pub output: OutputSection,
    pub spectrum: SpectrumSection,
    pub carpet: CarpetSection,
    pub wigner: WignerSection,
    pub subplanck: SubplanckSection,
    pub revivals: RevivalsSection,
    pub fidelity: FidelitySection,
}

/// Sections written to the manifest of each subcommand.
pub fn manifest_sections(cmd: Subcommand) -> [&'static str; 4] {
    ["packet", "system", "output", cmd.name()]
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            precondition(format!("config file {} is unreadable: {e}", path.display()))
        })?;
        Self::from_toml(&text)
            .map_err(|e| precondition(format!("config file {}: {e}", path.display())))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| precondition(format!("invalid config: {e}")))
    }

    pub fn name(&self, cmd: Subcommand) -> String {
        self.output.name.clone().unwrap_or_else(|| cmd.name().to_string())
    }

    /// Checks every parameter `cmd` will use, before any computation.
    pub fn validate(&self, cmd: Subcommand) -> Result<()> {
        let packet = self.packet.spec();
        packet.validate()?;
        self.system.validate()?;
        if self.packet.n_bar_override == Some(0) {
            return Err(precondition("n_bar_override >= 1 required"));
        }
        if let Some(name) = &self.output.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(precondition(format!(
                    "output name must be a nonempty file stem (got {name:?})"
                )));
            }
        }
        let time = |label: &str, t: f64| {
            if t.is_finite() && t >= 0.0 {
                Ok(())
            } else {
                Err(precondition(format!("{label} >= 0 required (got {t})")))
            }
        };
        match cmd {
            Subcommand::Spectrum => {
                if self.spectrum.n_levels == Some(0) {
                    return Err(precondition("n_levels >= 1 required"));
                }
                time_scales(self.packet.n_bar(), &self.system)?;
            }
            Subcommand::Carpet => {
                let c = &self.carpet;
                time("t0", c.t0)?;
                if c.nt == 0 || c.nx < 2 {
                    return Err(precondition(format!(
                        "nt >= 1 and nx >= 2 required (got nt = {}, nx = {})",
                        c.nt, c.nx
                    )));
                }
                if c.nt > 1 && !(c.t1 > c.t0 && c.t1.is_finite()) {
                    return Err(precondition(format!(
                        "t1 > t0 required (got t0 = {}, t1 = {})",
                        c.t0, c.t1
                    )));
                }
            }
            Subcommand::Wigner => {
                time("t", self.wigner.t)?;
                self.wigner.grid(&packet).validate(&packet)?;
            }
            Subcommand::Subplanck => {
                time("t", self.subplanck.t)?;
                for &q2 in &self.subplanck.q2_list {
                    SystemConfig { q_squared: q2, ..self.system }.validate()?;
                }
            }
            Subcommand::Revivals => {
                if !self.system.is_relativistic() {
                    return Err(crate::Error::NoSuperRevival);
                }
                if self.revivals.s_max < 2 {
                    return Err(precondition(format!(
                        "s_max >= 2 required (got {})",
                        self.revivals.s_max
                    )));
                }
                time_scales(self.packet.n_bar(), &self.system)?;
            }
            Subcommand::Fidelity => {
                let f = &self.fidelity;
                time("t0", f.t0)?;
                if !(f.t1 > f.t0 && f.t1.is_finite()) {
                    return Err(precondition(format!(
                        "t1 > t0 required (got t0 = {}, t1 = {})",
                        f.t0, f.t1
                    )));
                }
                if f.nt < 3 {
                    return Err(precondition(format!("nt >= 3 required (got {})", f.nt)));
                }
            }
        }
        Ok(())
    }
}
