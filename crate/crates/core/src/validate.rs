//! Self-consistency checks run by `chirpsqueeze validate`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{
    design_grating, CrystalConfig, DetuningGrid, GratingOrientation, SellmeierModel, WavelengthBand,
};
use crate::error::Result;
use crate::oracle::{integrate_green, IntegrationSettings};
use crate::pdc::{
    compute_spectra, low_gain_a, low_gain_b, rosenbluth_gain, transfer_ab, ScaledCoords,
    SpectraResult,
};
use crate::specfun::{basis_function, erfi_c, pcf_d, pcf_d_reciprocal, wronskian_check, Basis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// One named check: `value` must not exceed `limit`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    /// Tab-separated report line.
    pub fn line(&self) -> String {
        format!(
            "{}\t{}\t{:.3e}\t{:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.limit
        )
    }
}

/// The 2 cm LiNbO₃ crystal with a 0.42 µm pump and a grating designed for
/// the 0.46–0.75 µm signal band.
pub fn reference_crystal(sellmeier: SellmeierModel, nu: f64) -> Result<CrystalConfig> {
    let band = WavelengthBand {
        min_um: 0.46,
        max_um: 0.75,
    };
    let g = design_grating(
        &sellmeier,
        0.42,
        band,
        0.02,
        GratingOrientation::SmallDetuningAtInput,
    )?;
    Ok(CrystalConfig {
        length_m: 0.02,
        zeta_per_m2: g.zeta_per_m2,
        k0_per_m: g.k0_per_m,
        kappa_per_m: 0.0,
        pump_phase_rad: 0.0,
        pump_um: 0.42,
        sellmeier,
    }
    .with_nu(nu))
}

pub fn max_unitarity_residual(s: &SpectraResult) -> f64 {
    s.coeffs
        .iter()
        .map(|c| (c.a.norm_sqr() - c.b.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Largest relative mismatch between Ω and −Ω of the even quantities.
pub fn max_evenness_residual(s: &SpectraResult) -> f64 {
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    let mut worst: f64 = 0.0;
    for j in 0..s.grid.len() {
        let p = s.grid.partner(j);
        let (c, d) = (&s.coeffs[j], &s.coeffs[p]);
        worst = worst
            .max((c.a - d.a).norm() / c.a.norm())
            .max((c.b - d.b).norm() / c.a.norm())
            .max(rel(c.u.norm(), d.u.norm()))
            .max(rel(s.s_optical[j], s.s_optical[p]))
            .max(rel(s.s_squeeze[j], s.s_squeeze[p]))
            .max(rel(s.theta0[j], s.theta0[p]));
        if c.b.norm() > 1e-12 {
            worst = worst.max(((c.a / c.b) - (d.a / d.b)).norm() / (c.a / c.b).norm());
        }
    }
    worst
}

pub fn max_uncertainty_residual(s: &SpectraResult) -> f64 {
    s.s_squeeze
        .iter()
        .zip(&s.s_stretch)
        .map(|(a, b)| (a * b - 1.0).abs())
        .fold(0.0, f64::max)
}

/// `count` signal detunings spread evenly over the positive half of `grid`.
pub fn sample_detunings(grid: &DetuningGrid, count: usize) -> Vec<f64> {
    let pos = grid.positive_range();
    let n = pos.len();
    (0..count)
        .map(|k| grid.detunings[pos.start + (k * (n - 1)) / (count - 1).max(1)])
        .collect()
}

/// Largest relative difference, normalized by |A|, between the closed-form
/// coefficients and the integrated Green's functions.
pub fn oracle_equivalence(
    config: &CrystalConfig,
    detunings: &[f64],
    settings: &IntegrationSettings,
) -> Result<f64> {
    let errs: Vec<f64> = detunings
        .par_iter()
        .map(|&w| {
            let c = ScaledCoords::for_detuning(config, w)?;
            let (a, b) = transfer_ab(&c)?;
            let g = integrate_green(&c, settings)?;
            Ok(((g.a_num - a).norm() / a.norm()).max((g.b_num - b).norm() / a.norm()))
        })
        .collect::<Result<_>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// Relative differences of A and B from their low-gain forms over in-band
/// detunings (those with a phase-matching point inside the crystal).
pub fn low_gain_consistency(config: &CrystalConfig, grid: &DetuningGrid) -> Result<(f64, f64)> {
    let pairs: Vec<(f64, f64)> = grid.detunings[grid.positive_range()]
        .par_iter()
        .map(|&w| {
            let c = ScaledCoords::for_detuning(config, w)?;
            if !(c.x0 < 0.0 && c.x_l > 0.0) {
                return Ok((0.0, 0.0));
            }
            let (a, b) = transfer_ab(&c)?;
            let lb = low_gain_b(&c)?;
            Ok((
                (a - low_gain_a(&c)).norm() / a.norm(),
                (b - lb).norm() / b.norm(),
            ))
        })
        .collect::<Result<_>>()?;
    Ok(pairs
        .iter()
        .fold((0.0, 0.0), |(p, q), &(a, b)| (p.max(a), q.max(b))))
}

/// Deep-band classification of the plateau check: x₀ ≤ −50√ν and x_L ≥ 10.
pub fn deep_in_band(c: &ScaledCoords) -> bool {
    c.x0 <= -50.0 * c.nu.sqrt() && c.x_l >= 10.0
}

/// Largest ||U|/e^{πν} − 1| over points selected by `select`.
pub fn plateau_deviation(
    s: &SpectraResult,
    nu: f64,
    select: impl Fn(&ScaledCoords) -> bool,
) -> f64 {
    let g = rosenbluth_gain(nu);
    s.grid
        .positive_range()
        .filter(|&j| select(&s.coeffs[j].coords))
        .map(|j| (s.coeffs[j].u.norm() / g - 1.0).abs())
        .fold(0.0, f64::max)
}

fn wronskian_residual() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for nu in [0.01, 0.146, 1.0, 3.0] {
        for k in -50..=50 {
            worst = worst.max(wronskian_check(nu, k as f64)?);
        }
    }
    Ok(worst)
}

fn gaussian_residual() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=400 {
        let x = -10.0 + 0.05 * k as f64;
        let d = pcf_d(Complex64::new(0.0, 0.0), Complex64::new(x, 0.0))?;
        worst = worst.max((d - (-x * x / 4.0).exp()).norm());
    }
    Ok(worst)
}

fn reciprocal_fd_residual() -> Result<f64> {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for nu in [0.146, 1.0] {
        for x in [-12.0, -3.3, 0.4, 2.0, 7.5, 15.0] {
            for b in [Basis::First, Basis::Second] {
                let f = |t: f64| -> Result<Complex64> { Ok(basis_function(b, t, nu)?.0) };
                let deriv = (f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?)
                    / (12.0 * h);
                let fd = (deriv + Complex64::new(0.0, x / 2.0) * f(x)?) / nu.sqrt();
                let want = pcf_d_reciprocal(b, x, nu)?;
                worst = worst.max((fd - want).norm() / want.norm());
            }
        }
    }
    Ok(worst)
}

/// Runs the checks of `level`. Errors inside a check become failed checks.
pub fn run(level: Level) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |name: &str, r: Result<f64>, limit: f64| match r {
        Ok(v) => out.push(Check::new(name, v, limit)),
        Err(e) => {
            eprintln!("{name}: {e}");
            out.push(Check::new(name, f64::INFINITY, limit))
        }
    };
    let grid_points = match level {
        Level::Fast => 1 << 11,
        Level::Full => 1 << 14,
    };
    for nu in [1e-4, 0.146, 1.0] {
        let r =
            reference_crystal(SellmeierModel::lithium_niobate_extraordinary(), nu).and_then(|c| {
                let grid = DetuningGrid::covering(&c, None, grid_points)?;
                compute_spectra(&c, &grid)
            });
        match r {
            Ok(s) => {
                push(
                    &format!("unitarity nu={nu}"),
                    Ok(max_unitarity_residual(&s)),
                    1e-8,
                );
                push(
                    &format!("evenness nu={nu}"),
                    Ok(max_evenness_residual(&s)),
                    1e-8,
                );
                push(
                    &format!("min_uncertainty nu={nu}"),
                    Ok(max_uncertainty_residual(&s)),
                    1e-8,
                );
                if level == Level::Full && nu == 0.146 {
                    push(
                        "rosenbluth_plateau nu=0.146",
                        Ok(plateau_deviation(&s, nu, deep_in_band)),
                        0.05,
                    );
                }
            }
            Err(e) => push(&format!("spectra nu={nu}"), Err(e), 0.0),
        }
    }
    push("wronskian", wronskian_residual(), 1e-8);
    push("d0_gaussian", gaussian_residual(), 1e-12);
    push(
        "erfi(1)",
        erfi_c(Complex64::new(1.0, 0.0))
            .map(|v| (v.re - 1.650_425_758_797_542_9).abs() + v.im.abs()),
        1e-10,
    );
    if level == Level::Full {
        push(
            "reciprocal_finite_difference",
            reciprocal_fd_residual(),
            1e-6,
        );
        let settings = IntegrationSettings::default();
        for nu in [1e-4, 0.146, 1.0] {
            let r = reference_crystal(SellmeierModel::lithium_niobate_extraordinary(), nu)
                .and_then(|c| {
                    let grid = DetuningGrid::covering(&c, None, 1 << 14)?;
                    oracle_equivalence(&c, &sample_detunings(&grid, 50), &settings)
                });
            push(&format!("oracle_equivalence nu={nu}"), r, 1e-6);
        }
        let r = reference_crystal(SellmeierModel::lithium_niobate_extraordinary(), 1e-4).and_then(
            |c| {
                let grid = DetuningGrid::covering(&c, None, 1 << 12)?;
                low_gain_consistency(&c, &grid)
            },
        );
        match r {
            Ok((ea, eb)) => {
                push("low_gain_a nu=1e-4", Ok(ea), 1e-3);
                push("low_gain_b nu=1e-4", Ok(eb), 1e-3);
            }
            Err(e) => push("low_gain nu=1e-4", Err(e), 1e-3),
        }
    }
    out
}
