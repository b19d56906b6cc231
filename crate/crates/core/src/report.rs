//! Running a scenario end to end: spectra, correlator, summary and the
//! requested output files.

use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::dispersion::{angular_frequency, wavelength_um, CrystalConfig, DetuningGrid};
use crate::error::{Error, Result};
use crate::pdc::{compute_spectra, in_band, SpectraResult, IN_BAND_GUARD};
use crate::scenario::{OutputFormat, Quantity, Scenario};
use crate::shg::{
    correlator_trace, first_null, sh_incoherent_spectrum, sh_lag_grid, tau_samples, CorrelatorTrace,
};

/// Residual allowed by the run-time self-checks.
pub const SELF_CHECK_LIMIT: f64 = 1e-8;

/// Approximate number of rows written for the incoherent SH spectrum.
const SH_ROWS: usize = 4096;

/// Scalars reported after every run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub nu: f64,
    pub zeta_per_m2: f64,
    pub k0_per_m: f64,
    pub band_min_um: f64,
    pub band_max_um: f64,
    pub grid_points: usize,
    /// Median |U| over in-band points.
    pub plateau_u: f64,
    /// Median S₂ over in-band points, in dB.
    pub s2_db: f64,
    /// Spread of the unwrapped squeezing angle across the band.
    pub psi_span_rad: f64,
    /// First null of Φ(τ) for τ > 0.
    pub correlation_time_s: Option<f64>,
    pub max_unitarity_residual: f64,
    pub unwrap_warnings: usize,
}

impl Summary {
    pub fn table(&self) -> String {
        let mut s = String::new();
        let rows: Vec<(&str, String)> = vec![
            ("scenario", self.scenario.clone()),
            ("nu", format!("{:.6}", self.nu)),
            ("zeta [m^-2]", format!("{:.4e}", self.zeta_per_m2)),
            ("K0 [m^-1]", format!("{:.6e}", self.k0_per_m)),
            (
                "band [um]",
                format!("{:.4} - {:.4}", self.band_min_um, self.band_max_um),
            ),
            ("grid points", self.grid_points.to_string()),
            ("plateau |U|", format!("{:.4}", self.plateau_u)),
            ("S2 plateau [dB]", format!("{:.2}", self.s2_db)),
            ("psi span [rad]", format!("{:.1}", self.psi_span_rad)),
            (
                "correlation time [fs]",
                self.correlation_time_s
                    .map(|t| format!("{:.3}", t * 1e15))
                    .unwrap_or_else(|| "n/a".into()),
            ),
            (
                "max | |A|^2-|B|^2-1 |",
                format!("{:.2e}", self.max_unitarity_residual),
            ),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "{k:<24}{v}");
        }
        s
    }
}

/// Everything a run produced.
pub struct RunOutcome {
    pub summary: Summary,
    pub config: CrystalConfig,
    pub spectra: SpectraResult,
    pub trace: CorrelatorTrace,
    pub written: Vec<PathBuf>,
}

/// Scenario with the crystal section fully resolved, as recorded in file headers.
pub fn resolved_scenario(scenario: &Scenario, config: &CrystalConfig) -> Scenario {
    let mut s = scenario.clone();
    s.crystal.zeta_per_m2 = Some(config.zeta_per_m2);
    s.crystal.k0_per_m = Some(config.k0_per_m);
    s.crystal.kappa_per_m = Some(config.kappa_per_m);
    s
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Spread of ψ over the signal detunings of the band.
pub fn psi_span(spectra: &SpectraResult, band_edges: (f64, f64)) -> f64 {
    let (lo, hi) = band_edges;
    let vals: Vec<f64> = spectra
        .grid
        .positive_range()
        .filter(|&j| spectra.grid.detunings[j] >= lo && spectra.grid.detunings[j] <= hi)
        .map(|j| spectra.psi_unwrapped[j])
        .collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if vals.is_empty() {
        0.0
    } else {
        max - min
    }
}

pub fn summarize(
    scenario: &Scenario,
    config: &CrystalConfig,
    spectra: &SpectraResult,
    trace: &CorrelatorTrace,
) -> Summary {
    let inside: Vec<usize> = spectra
        .grid
        .positive_range()
        .filter(|&j| in_band(&spectra.coeffs[j].coords, IN_BAND_GUARD))
        .collect();
    let plateau_u = median(inside.iter().map(|&j| spectra.coeffs[j].u.norm()).collect());
    let s2 = median(inside.iter().map(|&j| spectra.s_squeeze[j]).collect());
    let edges = scenario.band.detuning_edges(config.omega0());
    let max_unitarity_residual = spectra
        .coeffs
        .iter()
        .map(|c| (c.a.norm_sqr() - c.b.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    Summary {
        scenario: scenario.name.clone(),
        nu: config.nu(),
        zeta_per_m2: config.zeta_per_m2,
        k0_per_m: config.k0_per_m,
        band_min_um: scenario.band.min_um,
        band_max_um: scenario.band.max_um,
        grid_points: spectra.grid.len(),
        plateau_u,
        s2_db: 10.0 * s2.log10(),
        psi_span_rad: psi_span(spectra, edges),
        correlation_time_s: first_null(trace),
        max_unitarity_residual,
        unwrap_warnings: spectra.unwrap_suspects.len(),
    }
}

/// Column names and rows of one output quantity.
pub fn table_for(
    quantity: Quantity,
    config: &CrystalConfig,
    spectra: &SpectraResult,
    trace: &CorrelatorTrace,
) -> (Vec<&'static str>, Vec<Vec<f64>>) {
    let grid = &spectra.grid;
    let spectral = |values: &[f64]| -> Vec<Vec<f64>> {
        (0..grid.len())
            .map(|j| vec![grid.wavelength_um(j), grid.detunings[j], values[j]])
            .collect()
    };
    match quantity {
        Quantity::OpticalSpectrum => (
            vec!["wavelength_um", "detuning_rad_s", "value"],
            spectral(&spectra.s_optical),
        ),
        Quantity::SqueezingSpectrum => (
            vec!["wavelength_um", "detuning_rad_s", "value"],
            spectral(&spectra.s_squeeze),
        ),
        Quantity::SqueezingAngle | Quantity::CompensationAngle => (
            vec!["detuning_rad_s", "psi_rad", "theta0_rad"],
            (0..grid.len())
                .map(|j| {
                    vec![
                        grid.detunings[j],
                        spectra.psi_unwrapped[j],
                        spectra.theta0[j],
                    ]
                })
                .collect(),
        ),
        Quantity::ShgFlux | Quantity::ShgQuadrature => (
            vec!["tau_s", "phi_norm", "x_norm"],
            (0..trace.taus.len())
                .map(|j| vec![trace.taus[j], trace.phi[j], trace.x[j]])
                .collect(),
        ),
        Quantity::ShIncoherent => {
            let stride = (2 * grid.len()).div_ceil(SH_ROWS).max(1);
            let lags = sh_lag_grid(spectra, stride);
            let vals = sh_incoherent_spectrum(spectra, &lags);
            let wp = config.omega_pump();
            (
                vec!["wavelength_um", "detuning_rad_s", "value"],
                lags.iter()
                    .zip(&vals)
                    .map(|(&d, &v)| vec![wavelength_um(wp + d), d, v])
                    .collect(),
            )
        }
        Quantity::TransferCoeffs => (
            vec![
                "wavelength_um",
                "detuning_rad_s",
                "a_re",
                "a_im",
                "b_re",
                "b_im",
                "u_re",
                "u_im",
                "v_re",
                "v_im",
            ],
            spectra
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    vec![
                        grid.wavelength_um(j),
                        c.omega,
                        c.a.re,
                        c.a.im,
                        c.b.re,
                        c.b.im,
                        c.u.re,
                        c.u.im,
                        c.v.re,
                        c.v.im,
                    ]
                })
                .collect(),
        ),
    }
}

fn header(quantity: Quantity, resolved: &str) -> String {
    let mut h = String::new();
    let _ = writeln!(h, "# chirpsqueeze {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(h, "# quantity: {}", quantity.name());
    let _ = writeln!(h, "# resolved scenario:");
    for line in resolved.lines() {
        let _ = writeln!(h, "#   {line}");
    }
    h
}

/// CSV text: `#` header block, column names, then rows with 17 significant digits.
pub fn render_csv(
    quantity: Quantity,
    resolved: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> String {
    let mut out = header(quantity, resolved);
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonTable<'a> {
    version: &'a str,
    quantity: &'a str,
    scenario: &'a str,
    columns: &'a [&'a str],
    rows: &'a [Vec<f64>],
}

pub fn render_json(
    quantity: Quantity,
    resolved: &str,
    columns: &[&str],
    rows: &[Vec<f64>],
) -> Result<String> {
    let t = JsonTable {
        version: env!("CARGO_PKG_VERSION"),
        quantity: quantity.name(),
        scenario: resolved,
        columns,
        rows,
    };
    serde_json::to_string_pretty(&t).map_err(|e| Error::Io(e.to_string()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
    }
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
    );
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Computes everything the scenario asks for and writes its outputs under
/// `out_dir`. Fails if a self-check is violated.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome> {
    scenario.validate()?;
    let config = scenario.resolve_crystal()?;
    for edge in [scenario.band.min_um, scenario.band.max_um] {
        if !config.sellmeier.contains(edge) {
            return Err(Error::OutOfRange {
                lambda_um: edge,
                min_um: config.sellmeier.min_um,
                max_um: config.sellmeier.max_um,
                label: config.sellmeier.label.clone(),
            });
        }
    }
    let grid = DetuningGrid::covering(&config, scenario.omega_max_rad_s, scenario.grid_points)?;
    let spectra = compute_spectra(&config, &grid)?;
    let c = &scenario.correlator;
    let taus = tau_samples(c.tau_min_s, c.tau_max_s, c.tau_points)?;
    let trace = correlator_trace(&spectra, &taus, config.pump_phase_rad)?;
    let summary = summarize(scenario, &config, &spectra, &trace);

    if !(summary.max_unitarity_residual <= SELF_CHECK_LIMIT) {
        return Err(Error::Unitarity {
            residual: summary.max_unitarity_residual,
        });
    }
    let uncertainty = spectra
        .s_squeeze
        .iter()
        .zip(&spectra.s_stretch)
        .map(|(a, b)| (a * b - 1.0).abs())
        .fold(0.0, f64::max);
    if !(uncertainty <= SELF_CHECK_LIMIT) {
        return Err(Error::ToleranceNotMet(format!(
            "S1*S2 deviates from 1 by {uncertainty:e}"
        )));
    }

    let resolved = resolved_scenario(scenario, &config).to_toml()?;
    let mut written = Vec::new();
    for o in &scenario.outputs {
        let (cols, rows) = table_for(o.quantity, &config, &spectra, &trace);
        let text = match o.format {
            OutputFormat::Csv => render_csv(o.quantity, &resolved, &cols, &rows),
            OutputFormat::Json => render_json(o.quantity, &resolved, &cols, &rows)?,
        };
        let path = out_dir.join(&o.path);
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(RunOutcome {
        summary,
        config,
        spectra,
        trace,
        written,
    })
}

/// Band edges (µm) where the optical spectrum of the signal falls to half
/// its peak.
pub fn optical_half_max_edges_um(spectra: &SpectraResult) -> Option<(f64, f64)> {
    let grid = &spectra.grid;
    let pos = grid.positive_range();
    let (lo, hi) =
        crate::shg::half_max_band(&grid.detunings[pos.clone()], &spectra.s_optical[pos])?;
    let w0 = grid.omega0;
    Some((wavelength_um(w0 + hi), wavelength_um(w0 + lo)))
}

/// Signal-side detuning of a wavelength.
pub fn detuning_of(config: &CrystalConfig, lambda_um: f64) -> f64 {
    angular_frequency(lambda_um) - config.omega0()
}
