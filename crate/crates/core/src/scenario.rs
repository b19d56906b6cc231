//! Scenario files: a TOML description of crystal, band, grid, correlator
//! delays and requested outputs. Every dimensional key carries its unit.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::dispersion::{
    design_grating, CrystalConfig, GratingOrientation, SellmeierModel, WavelengthBand,
};
use crate::error::{Error, Result};

/// Environment variable naming the directory of bundled scenarios.
pub const SCENARIO_DIR_ENV: &str = "CHIRPSQUEEZE_SCENARIOS";

/// Smallest accepted grid.
pub const MIN_GRID_POINTS: usize = 1 << 10;

fn default_pump_phase() -> f64 {
    0.0
}

fn default_sellmeier() -> SellmeierModel {
    SellmeierModel::lithium_niobate_extraordinary()
}

/// Crystal section. When `zeta_per_m2` and `k0_per_m` are both absent the
/// grating is designed from the band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    pub length_m: f64,
    pub pump_um: f64,
    #[serde(default = "default_pump_phase")]
    pub pump_phase_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_per_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_per_m2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0_per_m: Option<f64>,
    #[serde(default)]
    pub orientation: GratingOrientation,
    #[serde(default = "default_sellmeier")]
    pub sellmeier: SellmeierModel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatorSection {
    pub tau_min_s: f64,
    pub tau_max_s: f64,
    pub tau_points: usize,
}

impl Default for CorrelatorSection {
    fn default() -> Self {
        Self {
            tau_min_s: -20e-15,
            tau_max_s: 20e-15,
            tau_points: 801,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    OpticalSpectrum,
    SqueezingSpectrum,
    SqueezingAngle,
    CompensationAngle,
    ShgFlux,
    ShgQuadrature,
    ShIncoherent,
    TransferCoeffs,
}

impl Quantity {
    pub const ALL: [Quantity; 8] = [
        Quantity::OpticalSpectrum,
        Quantity::SqueezingSpectrum,
        Quantity::SqueezingAngle,
        Quantity::CompensationAngle,
        Quantity::ShgFlux,
        Quantity::ShgQuadrature,
        Quantity::ShIncoherent,
        Quantity::TransferCoeffs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::OpticalSpectrum => "optical_spectrum",
            Quantity::SqueezingSpectrum => "squeezing_spectrum",
            Quantity::SqueezingAngle => "squeezing_angle",
            Quantity::CompensationAngle => "compensation_angle",
            Quantity::ShgFlux => "shg_flux",
            Quantity::ShgQuadrature => "shg_quadrature",
            Quantity::ShIncoherent => "sh_incoherent",
            Quantity::TransferCoeffs => "transfer_coeffs",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub quantity: Quantity,
    /// Relative paths resolve against the output directory.
    pub path: String,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub grid_points: usize,
    /// Half-width of the detuning grid; defaults to the widest range the
    /// dispersion model allows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max_rad_s: Option<f64>,
    /// Overrides the crystal's κ so that κ²/ζ equals this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_target: Option<f64>,
    pub band: WavelengthBand,
    pub crystal: CrystalSection,
    #[serde(default)]
    pub correlator: CorrelatorSection,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid_points;
        if g < MIN_GRID_POINTS || !g.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid_points must be a power of two >= {MIN_GRID_POINTS}, got {g}"
            )));
        }
        let c = &self.correlator;
        if !(c.tau_min_s < c.tau_max_s)
            || c.tau_points < 2
            || !c.tau_min_s.is_finite()
            || !c.tau_max_s.is_finite()
        {
            return Err(Error::Config(format!(
                "correlator delay range [{}, {}] s with {} points is invalid",
                c.tau_min_s, c.tau_max_s, c.tau_points
            )));
        }
        if !(self.band.min_um > 0.0 && self.band.max_um > self.band.min_um) {
            return Err(Error::Config(format!(
                "band [{}, {}] um is invalid",
                self.band.min_um, self.band.max_um
            )));
        }
        if let Some(nu) = self.nu_target {
            if !(nu >= 0.0 && nu.is_finite()) {
                return Err(Error::Config(format!("nu_target must be >= 0, got {nu}")));
            }
        }
        if self.nu_target.is_none() && self.crystal.kappa_per_m.is_none() {
            return Err(Error::Config(
                "set either nu_target or crystal.kappa_per_m".into(),
            ));
        }
        if self.crystal.zeta_per_m2.is_some() != self.crystal.k0_per_m.is_some() {
            return Err(Error::Config(
                "give both crystal.zeta_per_m2 and crystal.k0_per_m, or neither to design from the band".into(),
            ));
        }
        if let Some(w) = self.omega_max_rad_s {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config(format!(
                    "omega_max_rad_s must be > 0, got {w}"
                )));
            }
        }
        for o in &self.outputs {
            if o.path.is_empty() {
                return Err(Error::Config(format!(
                    "output {} has an empty path",
                    o.quantity.name()
                )));
            }
        }
        self.crystal.sellmeier.validate()
    }

    /// Crystal parameters with the grating designed (if requested) and κ
    /// set from `nu_target`.
    pub fn resolve_crystal(&self) -> Result<CrystalConfig> {
        let c = &self.crystal;
        let (zeta, k0) = match (c.zeta_per_m2, c.k0_per_m) {
            (Some(z), Some(k)) => (z, k),
            _ => {
                for edge in [self.band.min_um, self.band.max_um] {
                    if !c.sellmeier.contains(edge) {
                        return Err(Error::OutOfRange {
                            lambda_um: edge,
                            min_um: c.sellmeier.min_um,
                            max_um: c.sellmeier.max_um,
                            label: c.sellmeier.label.clone(),
                        });
                    }
                }
                let g = design_grating(
                    &c.sellmeier,
                    c.pump_um,
                    self.band,
                    c.length_m,
                    c.orientation,
                )?;
                (g.zeta_per_m2, g.k0_per_m)
            }
        };
        let config = CrystalConfig {
            length_m: c.length_m,
            zeta_per_m2: zeta,
            k0_per_m: k0,
            kappa_per_m: c.kappa_per_m.unwrap_or(0.0),
            pump_phase_rad: c.pump_phase_rad,
            pump_um: c.pump_um,
            sellmeier: c.sellmeier.clone(),
        };
        let config = match self.nu_target {
            Some(nu) => config.with_nu(nu),
            None => config,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Directory holding the bundled scenarios.
pub fn scenario_dir() -> PathBuf {
    std::env::var_os(SCENARIO_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios")))
}

/// Bundled scenario names (file stems), sorted.
pub fn list_scenarios(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("toml") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// A path if it exists, otherwise a bundled scenario of that name.
pub fn locate(arg: &str) -> Result<PathBuf> {
    let p = PathBuf::from(arg);
    if p.is_file() {
        return Ok(p);
    }
    let bundled = scenario_dir().join(format!("{arg}.toml"));
    if bundled.is_file() {
        return Ok(bundled);
    }
    Err(Error::Config(format!(
        "no scenario file '{arg}' and no bundled scenario of that name in {}",
        scenario_dir().display()
    )))
}
