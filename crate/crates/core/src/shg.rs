//! Second-harmonic observables of the squeezed field: the coherent SH
//! component under phase compensation, its delay dependence, and the
//! incoherent SH background.
//!
//! The coupling constant of the SH crystal is set to one throughout.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pdc::SpectraResult;

/// |UV| at the outer grid edge above this fraction of its peak means the
/// grid cuts off a significant part of the integrand.
pub const COVERAGE_LIMIT: f64 = 0.5;

/// Minimum samples per period of e^{−iΩτ} required by the quadrature.
pub const SAMPLES_PER_OSCILLATION: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompensationMode {
    ExactPsi,
    PsiPlusDelay,
    Custom,
}

/// Spectral phase θ(Ω) applied before the SH crystal, sampled on the
/// spectra grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CompensationProfile {
    pub theta: Vec<f64>,
    pub delay_tau: f64,
    pub mode: CompensationMode,
}

impl CompensationProfile {
    /// θ = ψ.
    pub fn exact_psi(spectra: &SpectraResult) -> Self {
        Self {
            theta: spectra.psi_unwrapped.clone(),
            delay_tau: 0.0,
            mode: CompensationMode::ExactPsi,
        }
    }

    /// θ(Ω) = ψ(Ω) + τΩ on the signal side (Ω > 0), θ = ψ on the idler side.
    pub fn psi_plus_delay(spectra: &SpectraResult, tau: f64) -> Self {
        let theta = spectra
            .grid
            .detunings
            .iter()
            .zip(&spectra.psi_unwrapped)
            .map(|(&w, &p)| if w > 0.0 { p + tau * w } else { p })
            .collect();
        Self {
            theta,
            delay_tau: tau,
            mode: CompensationMode::PsiPlusDelay,
        }
    }

    pub fn custom(theta: Vec<f64>) -> Self {
        Self {
            theta,
            delay_tau: 0.0,
            mode: CompensationMode::Custom,
        }
    }
}

/// Quadrature result for the coherent SH field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentField {
    pub value: Complex64,
    /// |midpoint rule − midpoint rule on a three times coarser grid|.
    pub error_estimate: f64,
    /// |UV| at the outermost grid point relative to its peak.
    pub edge_ratio: f64,
}

fn check_coverage(spectra: &SpectraResult) -> Result<f64> {
    let uv = spectra.uv_modulus();
    let peak = uv.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let edge = uv[uv.len() - 1].max(uv[0]) / peak;
    if edge > COVERAGE_LIMIT {
        return Err(Error::GridCoverage(format!(
            "|UV| at the grid edge is {:.1}% of its peak; the dispersion model does not reach far enough",
            100.0 * edge
        )));
    }
    Ok(edge)
}

/// E_coh = (1/π) ∫₀^∞ |U(Ω)V(Ω)| e^{i[2ψ(Ω) − θ(Ω) − θ(−Ω)]} dΩ by the
/// midpoint rule on the Ω > 0 half of the grid, with 2ψ = arg[U(Ω)V(−Ω)].
pub fn coherent_field(
    spectra: &SpectraResult,
    comp: &CompensationProfile,
) -> Result<CoherentField> {
    let grid = &spectra.grid;
    if comp.theta.len() != grid.len() {
        return Err(Error::Domain(format!(
            "compensation profile has {} samples, grid has {}",
            comp.theta.len(),
            grid.len()
        )));
    }
    let edge_ratio = check_coverage(spectra)?;
    let h = grid.spacing();
    if h * comp.delay_tau.abs() > 2.0 * PI / SAMPLES_PER_OSCILLATION {
        return Err(Error::ToleranceNotMet(format!(
            "delay {:e} s needs a grid spacing below {:e} rad/s (have {h:e}); increase grid points",
            comp.delay_tau,
            2.0 * PI / (SAMPLES_PER_OSCILLATION * comp.delay_tau.abs())
        )));
    }
    let mut fine = Complex64::new(0.0, 0.0);
    let mut coarse = Complex64::new(0.0, 0.0);
    for (k, j) in grid.positive_range().enumerate() {
        let c = &spectra.coeffs[j];
        let p = grid.partner(j);
        let v_neg = spectra.coeffs[p].v;
        let two_psi = (c.u * v_neg).arg();
        let f = Complex64::from_polar(
            c.u.norm() * c.v.norm(),
            two_psi - comp.theta[j] - comp.theta[p],
        );
        fine += f;
        // cells three times as wide have their midpoints on every third sample
        if k % 3 == 1 {
            coarse += f;
        }
    }
    let value = fine * h / PI;
    let coarse_value = coarse * 3.0 * h / PI;
    Ok(CoherentField {
        value,
        error_estimate: (value - coarse_value).norm(),
        edge_ratio,
    })
}

/// Coherent SH field versus signal delay, normalized so max Φ = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorTrace {
    pub taus: Vec<f64>,
    pub e_coh: Vec<Complex64>,
    pub phi: Vec<f64>,
    pub x: Vec<f64>,
    /// Peak |E_coh| before normalization.
    pub norm: f64,
}

/// Φ(τ) = |E_coh(τ)|² and X(τ) = 2 Re{e^{−iφ} E_coh(τ)} for the
/// delayed-signal compensation θ = ψ + τΩ (Ω > 0).
pub fn correlator_trace(
    spectra: &SpectraResult,
    taus: &[f64],
    pump_phase: f64,
) -> Result<CorrelatorTrace> {
    let fields: Vec<Complex64> = taus
        .par_iter()
        .map(|&t| {
            Ok(coherent_field(spectra, &CompensationProfile::psi_plus_delay(spectra, t))?.value)
        })
        .collect::<Result<_>>()?;
    let norm = fields.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    let e_coh: Vec<Complex64> = fields.iter().map(|e| e * scale).collect();
    let rot = Complex64::from_polar(1.0, -pump_phase);
    Ok(CorrelatorTrace {
        taus: taus.to_vec(),
        phi: e_coh.iter().map(|e| e.norm_sqr()).collect(),
        x: e_coh.iter().map(|e| 2.0 * (rot * e).re).collect(),
        e_coh,
        norm,
    })
}

/// Equally spaced delays from `tau_min` to `tau_max` inclusive.
pub fn tau_samples(tau_min: f64, tau_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(tau_min < tau_max) || points < 2 || !tau_min.is_finite() || !tau_max.is_finite() {
        return Err(Error::Domain(format!(
            "invalid delay range [{tau_min:e}, {tau_max:e}] with {points} points"
        )));
    }
    Ok((0..points)
        .map(|j| tau_min + (tau_max - tau_min) * j as f64 / (points - 1) as f64)
        .collect())
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Flat-band estimate (1/π) U₀V₀ ΔΩ e^{−iΩ_s τ} sinc(ΔΩ τ/2).
pub fn rectangle_approx(
    u0: f64,
    v0: f64,
    omega_s: f64,
    delta_omega: f64,
    tau: f64,
) -> Result<Complex64> {
    if !(delta_omega > 0.0) {
        return Err(Error::Domain(format!(
            "bandwidth must be positive, got {delta_omega}"
        )));
    }
    Ok(Complex64::from_polar(
        u0 * v0 * delta_omega / PI * sinc(delta_omega * tau / 2.0),
        -omega_s * tau,
    ))
}

/// Parameters of the rectangle that best stands in for the squeezing band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectangleFit {
    pub u0: f64,
    pub v0: f64,
    /// |UV|-weighted mean detuning over Ω > 0.
    pub omega_s: f64,
    /// Full width at half maximum of |UV| over Ω > 0.
    pub delta_omega: f64,
}

/// Reads the rectangle parameters off computed spectra. U₀ and V₀ are the
/// medians inside the half-maximum band.
pub fn rectangle_fit(spectra: &SpectraResult) -> Result<RectangleFit> {
    let grid = &spectra.grid;
    let pos = grid.positive_range();
    let w = &grid.detunings[pos.clone()];
    let uv: Vec<f64> = pos
        .clone()
        .map(|j| spectra.coeffs[j].u.norm() * spectra.coeffs[j].v.norm())
        .collect();
    let (lo, hi) =
        half_max_band(w, &uv).ok_or_else(|| Error::Domain("no squeezing band found".into()))?;
    let total: f64 = uv.iter().sum();
    let omega_s = w.iter().zip(&uv).map(|(a, b)| a * b).sum::<f64>() / total;
    let mut us = Vec::new();
    let mut vs = Vec::new();
    for j in pos {
        let d = grid.detunings[j];
        if d >= lo && d <= hi {
            us.push(spectra.coeffs[j].u.norm());
            vs.push(spectra.coeffs[j].v.norm());
        }
    }
    Ok(RectangleFit {
        u0: median(&mut us),
        v0: median(&mut vs),
        omega_s,
        delta_omega: hi - lo,
    })
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Outermost abscissae where `y` crosses half its maximum, linearly
/// interpolated.
pub fn half_max_band(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let peak = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return None;
    }
    let half = peak / 2.0;
    let first = y.iter().position(|&v| v >= half)?;
    let last = y.iter().rposition(|&v| v >= half)?;
    let cross = |i: usize, k: usize| {
        if y[i] == y[k] {
            x[k]
        } else {
            x[i] + (half - y[i]) * (x[k] - x[i]) / (y[k] - y[i])
        }
    };
    let lo = if first == 0 {
        x[0]
    } else {
        cross(first - 1, first)
    };
    let hi = if last + 1 == y.len() {
        x[last]
    } else {
        cross(last, last + 1)
    };
    Some((lo, hi))
}

/// First local minimum of Φ at τ > 0, refined by a parabola through the
/// neighbouring samples.
pub fn first_null(trace: &CorrelatorTrace) -> Option<f64> {
    let (t, p) = (&trace.taus, &trace.phi);
    (1..t.len() - 1)
        .find(|&j| t[j] > 0.0 && p[j] <= p[j - 1] && p[j] < p[j + 1])
        .map(|j| {
            let h = t[j + 1] - t[j];
            let den = p[j - 1] - 2.0 * p[j] + p[j + 1];
            if den > 0.0 {
                t[j] + 0.5 * h * (p[j - 1] - p[j + 1]) / den
            } else {
                t[j]
            }
        })
}

/// Mean spacing of sign changes of X(τ) inside the central lobe
/// (|τ| below the first null).
pub fn zero_crossing_spacing(trace: &CorrelatorTrace) -> Option<f64> {
    let limit = first_null(trace)?;
    let (t, x) = (&trace.taus, &trace.x);
    let mut crossings = Vec::new();
    for j in 1..t.len() {
        if t[j - 1].abs() > limit || t[j].abs() > limit {
            continue;
        }
        if (x[j - 1] < 0.0) != (x[j] < 0.0) {
            crossings.push(t[j - 1] - x[j - 1] * (t[j] - t[j - 1]) / (x[j] - x[j - 1]));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    Some((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

/// Incoherent SH spectral density at offsets δ = ω − ω_p from the pump:
/// 2 (1/2π)² ∫ |V(Ω)|² |V(δ − Ω)|² dΩ, with |V|² linearly interpolated
/// on the grid and zero outside it.
pub fn sh_incoherent_spectrum(spectra: &SpectraResult, offsets: &[f64]) -> Vec<f64> {
    let grid = &spectra.grid;
    let h = grid.spacing();
    let n = grid.len();
    let w0 = grid.detunings[0];
    let v2: Vec<f64> = spectra.coeffs.iter().map(|c| c.v.norm_sqr()).collect();
    let interp = |w: f64| -> f64 {
        let s = (w - w0) / h;
        if s < -1e-9 || s > (n - 1) as f64 + 1e-9 {
            return 0.0;
        }
        let s = s.clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let f = s - i as f64;
        v2[i] * (1.0 - f) + v2[i + 1] * f
    };
    let pref = 2.0 / (4.0 * PI * PI);
    offsets
        .par_iter()
        .map(|&d| {
            let s: f64 = grid
                .detunings
                .iter()
                .zip(&v2)
                .map(|(&w, &a)| a * interp(d - w))
                .sum();
            pref * s * h
        })
        .collect()
}

/// Offsets δ = m·h for |m| < n: the lags at which the discrete
/// autocorrelation needs no interpolation.
pub fn sh_lag_grid(spectra: &SpectraResult, stride: usize) -> Vec<f64> {
    let h = spectra.grid.spacing();
    let n = spectra.grid.len() as i64;
    let stride = stride.max(1) as i64;
    (-(n - 1)..n)
        .step_by(stride as usize)
        .map(|m| m as f64 * h)
        .collect()
}

/// Flux of the coherent SH component, |E_coh|².
pub fn coherent_flux(field: &CoherentField) -> f64 {
    field.value.norm_sqr()
}
