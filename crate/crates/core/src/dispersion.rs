//! Refractive index, wavevectors, phase mismatch and chirped-grating design.
//!
//! Frequencies are angular (rad/s); detunings Ω are measured from the
//! degenerate frequency ω₀ = ωₚ/2, so the signal sits at ω₀ + Ω and the
//! idler at ω₀ − Ω. Wavelengths are vacuum wavelengths in µm.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of a vacuum wavelength in µm.
pub fn angular_frequency(lambda_um: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (lambda_um * 1e-6)
}

/// Vacuum wavelength in µm of an angular frequency.
pub fn wavelength_um(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega * 1e6
}

/// n²(λ) = 1 + Σᵢ aᵢ λ² / (λ² − bᵢ), λ in µm, bᵢ in µm².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SellmeierModel {
    pub label: String,
    pub a: Vec<f64>,
    pub b_um2: Vec<f64>,
    pub min_um: f64,
    pub max_um: f64,
}

impl SellmeierModel {
    /// Congruent LiNbO₃, extraordinary ray (Zelmon, Small & Jundt 1997),
    /// valid 0.4–5.0 µm at room temperature.
    pub fn lithium_niobate_extraordinary() -> Self {
        Self {
            label: "LiNbO3 congruent, extraordinary (Zelmon 1997)".into(),
            a: vec![2.9804, 0.5981, 8.9543],
            b_um2: vec![0.02047, 0.0666, 416.08],
            min_um: 0.4,
            max_um: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.len() != self.b_um2.len() || self.a.is_empty() {
            return Err(Error::Config(format!(
                "sellmeier '{}': need matching non-empty a and b_um2 lists",
                self.label
            )));
        }
        if !(self.min_um > 0.0 && self.max_um > self.min_um) {
            return Err(Error::Config(format!(
                "sellmeier '{}': bad valid range",
                self.label
            )));
        }
        if self.a.iter().chain(&self.b_um2).any(|c| !c.is_finite()) {
            return Err(Error::Config(format!(
                "sellmeier '{}': non-finite coefficient",
                self.label
            )));
        }
        Ok(())
    }

    pub fn contains(&self, lambda_um: f64) -> bool {
        lambda_um >= self.min_um && lambda_um <= self.max_um
    }
}

/// n(λ); evaluation outside the model's valid range is an error.
pub fn refractive_index(model: &SellmeierModel, lambda_um: f64) -> Result<f64> {
    if !model.contains(lambda_um) {
        return Err(Error::OutOfRange {
            lambda_um,
            min_um: model.min_um,
            max_um: model.max_um,
            label: model.label.clone(),
        });
    }
    let l2 = lambda_um * lambda_um;
    let n2 = 1.0
        + model
            .a
            .iter()
            .zip(&model.b_um2)
            .map(|(a, b)| a * l2 / (l2 - b))
            .sum::<f64>();
    if !(n2 > 1.0 && n2.is_finite()) {
        return Err(Error::Domain(format!(
            "sellmeier '{}' gives n^2 = {n2} at {lambda_um} um",
            model.label
        )));
    }
    Ok(n2.sqrt())
}

/// Physical description of the crystal and its pump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfig {
    pub length_m: f64,
    pub zeta_per_m2: f64,
    pub k0_per_m: f64,
    pub kappa_per_m: f64,
    pub pump_phase_rad: f64,
    pub pump_um: f64,
    pub sellmeier: SellmeierModel,
}

impl CrystalConfig {
    pub fn validate(&self) -> Result<()> {
        self.sellmeier.validate()?;
        if !(self.length_m > 0.0) {
            return Err(Error::Config(format!(
                "length_m must be > 0, got {}",
                self.length_m
            )));
        }
        if !(self.zeta_per_m2 > 0.0) {
            return Err(Error::Config(format!(
                "zeta_per_m2 must be > 0, got {}",
                self.zeta_per_m2
            )));
        }
        if !(self.kappa_per_m >= 0.0) {
            return Err(Error::Config(format!(
                "kappa_per_m must be >= 0, got {}",
                self.kappa_per_m
            )));
        }
        if !self.sellmeier.contains(self.pump_um) {
            return Err(Error::OutOfRange {
                lambda_um: self.pump_um,
                min_um: self.sellmeier.min_um,
                max_um: self.sellmeier.max_um,
                label: self.sellmeier.label.clone(),
            });
        }
        Ok(())
    }

    /// Dimensionless coupling σ = |κ|/√ζ.
    pub fn sigma(&self) -> f64 {
        self.kappa_per_m / self.zeta_per_m2.sqrt()
    }

    /// Gain parameter ν = σ² = |κ|²/ζ.
    pub fn nu(&self) -> f64 {
        self.kappa_per_m * self.kappa_per_m / self.zeta_per_m2
    }

    /// Sets |κ| so that κ²/ζ equals `nu`.
    pub fn with_nu(mut self, nu: f64) -> Self {
        self.kappa_per_m = (nu * self.zeta_per_m2).sqrt();
        self
    }

    pub fn omega_pump(&self) -> f64 {
        angular_frequency(self.pump_um)
    }

    /// Degenerate frequency ω₀ = ωₚ/2.
    pub fn omega0(&self) -> f64 {
        self.omega_pump() / 2.0
    }

    pub fn pump_wavevector(&self) -> Result<f64> {
        Ok(refractive_index(&self.sellmeier, self.pump_um)? * self.omega_pump() / SPEED_OF_LIGHT)
    }

    /// L√ζ, the length of the crystal in scaled units.
    pub fn scaled_length(&self) -> f64 {
        self.length_m * self.zeta_per_m2.sqrt()
    }
}

/// k(Ω) = n(λ(ω₀+Ω))·(ω₀+Ω)/c in m⁻¹.
pub fn wavevector(config: &CrystalConfig, omega: f64) -> Result<f64> {
    let w = config.omega0() + omega;
    if !(w > 0.0) {
        return Err(Error::Domain(format!("non-positive optical frequency {w}")));
    }
    Ok(refractive_index(&config.sellmeier, wavelength_um(w))? * w / SPEED_OF_LIGHT)
}

/// k(Ω) + k(−Ω), summed in a fixed order so the result is exactly even.
fn wavevector_pair_sum(config: &CrystalConfig, omega: f64) -> Result<f64> {
    let m = omega.abs();
    Ok(wavevector(config, m)? + wavevector(config, -m)?)
}

/// Δ(Ω) = kₚ − [k(Ω) + k(−Ω) + K₀] in m⁻¹, exactly even in Ω.
pub fn phase_mismatch(config: &CrystalConfig, omega: f64) -> Result<f64> {
    Ok(config.pump_wavevector()? - wavevector_pair_sum(config, omega)? - config.k0_per_m)
}

/// Δ(Ω) without the grating contribution.
fn bare_mismatch(config: &CrystalConfig, omega: f64) -> Result<f64> {
    Ok(config.pump_wavevector()? - wavevector_pair_sum(config, omega)?)
}

/// Position where x = Δ/√ζ + z√ζ vanishes, i.e. the local grating period
/// phase-matches the pair (ω₀ ± Ω).
pub fn phase_matching_position(config: &CrystalConfig, omega: f64) -> Result<f64> {
    Ok(-phase_mismatch(config, omega)? / config.zeta_per_m2)
}

/// Which band edge is phase-matched at the crystal input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GratingOrientation {
    /// The pair closest to degeneracy phase-matches at z = 0 and the
    /// outermost pair at z = L.
    #[default]
    SmallDetuningAtInput,
    LargeDetuningAtInput,
}

/// A signal wavelength band; the idlers are the frequency conjugates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavelengthBand {
    pub min_um: f64,
    pub max_um: f64,
}

impl WavelengthBand {
    /// Detunings |Ω| of the two edges relative to ω₀, sorted ascending.
    pub fn detuning_edges(&self, omega0: f64) -> (f64, f64) {
        let a = (angular_frequency(self.min_um) - omega0).abs();
        let b = (angular_frequency(self.max_um) - omega0).abs();
        (a.min(b), a.max(b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GratingDesign {
    pub k0_per_m: f64,
    pub zeta_per_m2: f64,
}

/// Chooses K₀ and ζ so that the phase-matching point sweeps from z = 0 to
/// z = L as |Ω| runs across the band.
pub fn design_grating(
    sellmeier: &SellmeierModel,
    pump_um: f64,
    band: WavelengthBand,
    length_m: f64,
    orientation: GratingOrientation,
) -> Result<GratingDesign> {
    if !(length_m > 0.0) {
        return Err(Error::InfeasibleDesign(format!(
            "crystal length {length_m} m"
        )));
    }
    let probe = CrystalConfig {
        length_m,
        zeta_per_m2: 1.0,
        k0_per_m: 0.0,
        kappa_per_m: 0.0,
        pump_phase_rad: 0.0,
        pump_um,
        sellmeier: sellmeier.clone(),
    };
    let (small, large) = band.detuning_edges(probe.omega0());
    let (at_input, at_output) = match orientation {
        GratingOrientation::SmallDetuningAtInput => (small, large),
        GratingOrientation::LargeDetuningAtInput => (large, small),
    };
    let k0 = bare_mismatch(&probe, at_input)?;
    let end = bare_mismatch(&probe, at_output)? - k0;
    let zeta = -end / length_m;
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::InfeasibleDesign(format!(
            "required chirp {zeta:e} m^-2 is not positive for band {:.4}-{:.4} um",
            band.min_um, band.max_um
        )));
    }
    Ok(GratingDesign {
        k0_per_m: k0,
        zeta_per_m2: zeta,
    })
}

/// Symmetric grid of detunings on cell midpoints, Ω_j = −Ω_max + (j + ½)h.
#[derive(Clone, Debug, PartialEq)]
pub struct DetuningGrid {
    pub omega0: f64,
    pub detunings: Vec<f64>,
}

impl DetuningGrid {
    pub fn symmetric(omega0: f64, omega_max: f64, points: usize) -> Result<Self> {
        if points < 2 || points % 2 != 0 {
            return Err(Error::Config(format!(
                "grid needs an even number of points, got {points}"
            )));
        }
        if !(omega_max > 0.0) {
            return Err(Error::Config(format!(
                "grid half-width must be > 0, got {omega_max}"
            )));
        }
        let half = points / 2;
        let h = 2.0 * omega_max / points as f64;
        let positive: Vec<f64> = (0..half).map(|j| (j as f64 + 0.5) * h).collect();
        let mut detunings: Vec<f64> = positive.iter().rev().map(|w| -w).collect();
        detunings.extend_from_slice(&positive);
        Ok(Self { omega0, detunings })
    }

    /// Widest symmetric grid whose signal and idler both stay inside the
    /// Sellmeier range, optionally capped at `omega_max`.
    pub fn covering(config: &CrystalConfig, omega_max: Option<f64>, points: usize) -> Result<Self> {
        let w0 = config.omega0();
        let s = &config.sellmeier;
        let hi = angular_frequency(s.min_um) - w0;
        let lo = w0 - angular_frequency(s.max_um);
        let limit = hi.min(lo).min(w0) * (1.0 - 1e-12);
        if !(limit > 0.0) {
            return Err(Error::GridCoverage(format!(
                "degenerate wavelength {:.4} um outside sellmeier range",
                wavelength_um(w0)
            )));
        }
        let wmax = match omega_max {
            Some(w) if w <= limit => w,
            Some(w) => {
                return Err(Error::GridCoverage(format!(
                    "requested half-width {w:e} rad/s exceeds sellmeier coverage {limit:e} rad/s"
                )))
            }
            None => limit,
        };
        Self::symmetric(w0, wmax, points)
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.detunings[1] - self.detunings[0]
    }

    /// Index of −Ω for the point at index `j`.
    pub fn partner(&self, j: usize) -> usize {
        self.detunings.len() - 1 - j
    }

    /// Indices of the Ω > 0 half.
    pub fn positive_range(&self) -> std::ops::Range<usize> {
        self.detunings.len() / 2..self.detunings.len()
    }

    pub fn wavelength_um(&self, j: usize) -> f64 {
        wavelength_um(self.omega0 + self.detunings[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lnb() -> SellmeierModel {
        SellmeierModel::lithium_niobate_extraordinary()
    }

    fn reference_band() -> WavelengthBand {
        WavelengthBand {
            min_um: 0.46,
            max_um: 0.75,
        }
    }

    fn designed() -> CrystalConfig {
        let d = design_grating(
            &lnb(),
            0.42,
            reference_band(),
            0.02,
            GratingOrientation::SmallDetuningAtInput,
        )
        .unwrap();
        CrystalConfig {
            length_m: 0.02,
            zeta_per_m2: d.zeta_per_m2,
            k0_per_m: d.k0_per_m,
            kappa_per_m: 0.0,
            pump_phase_rad: 0.0,
            pump_um: 0.42,
            sellmeier: lnb(),
        }
        .with_nu(0.146)
    }

    #[test]
    fn index_at_pump() {
        let n = refractive_index(&lnb(), 0.42).unwrap();
        assert!(n > 2.2 && n < 2.5);
        // golden value from the coefficient set
        assert!((n - 2.308_406_735_863_056).abs() < 1e-12);
        assert_eq!(n, refractive_index(&lnb(), 0.42).unwrap());
    }

    #[test]
    fn index_out_of_range() {
        let m = lnb();
        assert!(matches!(
            refractive_index(&m, m.max_um + 0.01),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            refractive_index(&m, 0.39),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn index_smooth_and_above_one() {
        let m = lnb();
        let mut prev = f64::INFINITY;
        for k in 0..460 {
            let l = 0.4 + k as f64 * 0.01;
            let n = refractive_index(&m, l).unwrap();
            assert!(n > 1.0);
            assert!(n < prev, "normal dispersion across the range");
            prev = n;
        }
    }

    #[test]
    fn wavevector_at_degeneracy() {
        let c = designed();
        let k = wavevector(&c, 0.0).unwrap();
        let n = refractive_index(&lnb(), 0.84).unwrap();
        let want = 2.0 * PI * n / 0.84e-6;
        assert!((k - want).abs() / want < 1e-12);
        assert!(k > 1.0e7 && k < 2.0e7);
    }

    #[test]
    fn wavevector_increasing_over_band() {
        let c = designed();
        let (_, large) = reference_band().detuning_edges(c.omega0());
        let mut prev = f64::NEG_INFINITY;
        for j in 0..=400 {
            let w = -large + 2.0 * large * j as f64 / 400.0;
            let k = wavevector(&c, w).unwrap();
            assert!(k > prev);
            prev = k;
        }
        let w = 1e14;
        assert_ne!(wavevector(&c, w).unwrap(), wavevector(&c, -w).unwrap());
    }

    #[test]
    fn mismatch_exactly_even() {
        let c = designed();
        for w in [2.0 * PI * 50e12, 1.234e15, 3.0e13] {
            assert_eq!(
                phase_mismatch(&c, w).unwrap(),
                phase_mismatch(&c, -w).unwrap()
            );
        }
    }

    #[test]
    fn mismatch_independent_of_coupling() {
        let c = designed();
        let mut d = c.clone();
        d.kappa_per_m = 0.0;
        let w = 4.2e14;
        assert_eq!(
            phase_mismatch(&c, w).unwrap(),
            phase_mismatch(&d, w).unwrap()
        );
    }

    #[test]
    fn band_centre_phase_matched_inside() {
        let c = designed();
        let (small, large) = reference_band().detuning_edges(c.omega0());
        let d = phase_mismatch(&c, 0.5 * (small + large)).unwrap();
        assert!(d <= 0.0 && d >= -c.zeta_per_m2 * c.length_m);
    }

    #[test]
    fn design_close_to_reported_chirps() {
        let high = designed();
        let ratio = high.zeta_per_m2 / 5.64e7;
        assert!(ratio > 0.5 && ratio < 2.0, "zeta = {:e}", high.zeta_per_m2);
        let narrow = WavelengthBand {
            min_um: 0.544_164_037_854_889_6,
            max_um: 0.598_958_333_333_333_4,
        };
        let low = design_grating(
            &lnb(),
            0.42,
            narrow,
            0.02,
            GratingOrientation::SmallDetuningAtInput,
        )
        .unwrap();
        let scale = high.zeta_per_m2 / low.zeta_per_m2;
        assert!((scale - 5.0).abs() < 0.5, "chirp ratio {scale}");
        assert!((low.zeta_per_m2 / 1.14e7 - 1.0).abs() < 0.5);
    }

    #[test]
    fn design_round_trip() {
        let c = designed();
        let (small, large) = reference_band().detuning_edges(c.omega0());
        let mut prev = f64::NEG_INFINITY;
        for j in 0..=200 {
            let w = small + (large - small) * j as f64 / 200.0;
            let z = phase_matching_position(&c, w).unwrap();
            assert!(z >= -1e-12 && z <= c.length_m * (1.0 + 1e-9), "z = {z}");
            assert!(z > prev);
            prev = z;
        }
        assert!(phase_matching_position(&c, small).unwrap().abs() < 1e-12);
        assert!((phase_matching_position(&c, large).unwrap() - c.length_m).abs() < 1e-12);
    }

    #[test]
    fn scaled_length_magnitude() {
        let c = designed();
        let s = c.zeta_per_m2 * c.length_m * c.length_m;
        assert!(s > 1e3 && s < 1e5);
    }

    #[test]
    fn degenerate_or_reversed_band_is_infeasible() {
        let point = WavelengthBand {
            min_um: 0.6,
            max_um: 0.6,
        };
        assert!(matches!(
            design_grating(
                &lnb(),
                0.42,
                point,
                0.02,
                GratingOrientation::SmallDetuningAtInput
            ),
            Err(Error::InfeasibleDesign(_))
        ));
        assert!(matches!(
            design_grating(
                &lnb(),
                0.42,
                reference_band(),
                0.02,
                GratingOrientation::LargeDetuningAtInput
            ),
            Err(Error::InfeasibleDesign(_))
        ));
    }

    #[test]
    fn grid_symmetry_and_coverage() {
        let c = designed();
        let g = DetuningGrid::covering(&c, None, 1 << 12).unwrap();
        for j in 0..g.len() {
            assert_eq!(g.detunings[j], -g.detunings[g.partner(j)]);
            let w = g.omega0 + g.detunings[j];
            assert!(c.sellmeier.contains(wavelength_um(w)));
        }
        assert!(g.detunings.windows(2).all(|p| p[1] > p[0]));
        assert!(DetuningGrid::covering(&c, Some(1e16), 1024).is_err());
        assert!(DetuningGrid::symmetric(1.0, 1.0, 7).is_err());
    }
}
