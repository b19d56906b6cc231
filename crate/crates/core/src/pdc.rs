//! Bogoliubov transfer coefficients of the chirped-grating amplifier and the
//! spectra derived from them.
//!
//! With x = Δ(Ω)/√ζ + z√ζ and σ = |κ|/√ζ, the slowly varying operators obey
//! b̃′ + (ix/2) b̃ = σ b̃†, whose solutions are built from the Whittaker pair
//! φ₁(x) = D_{iν}(x e^{iπ/4}), φ₂(x) = D_{−1−iν}(−x e^{−iπ/4}), ν = σ².
//! Between x₀ = Δ/√ζ and x_L = x₀ + L√ζ this gives
//! b̃(L) = A b̃(0) + B b̃†(0), and after restoring the propagation phases
//! a(L) = U a(0) + V a†(0).

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::dispersion::{phase_mismatch, wavevector, CrystalConfig, DetuningGrid};
use crate::error::{Error, Result};
use crate::phase::unwrap_phase;
use crate::specfun::{
    erfi_c, pcf_d_polar, pcf_d_reciprocal, wronskian_closed_form, Basis, PolarArg,
};

/// Unitarity residual above which [`transfer_ab`] refuses its own output.
pub const UNITARITY_SELF_CHECK: f64 = 1e-6;

/// Scaled coordinates of one frequency pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledCoords {
    pub x0: f64,
    pub x_l: f64,
    pub sigma: f64,
    pub nu: f64,
}

impl ScaledCoords {
    /// Coordinates from the scaled endpoints and gain parameter ν ≥ 0.
    pub fn new(x0: f64, x_l: f64, nu: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Domain(format!(
                "nu must be finite and >= 0, got {nu}"
            )));
        }
        if !(x0.is_finite() && x_l.is_finite()) {
            return Err(Error::Domain(format!("non-finite endpoints {x0}, {x_l}")));
        }
        Ok(Self {
            x0,
            x_l,
            sigma: nu.sqrt(),
            nu,
        })
    }

    /// x₀ = Δ/√ζ, x_L = x₀ + L√ζ for the configured crystal.
    pub fn from_mismatch(config: &CrystalConfig, delta: f64) -> Result<Self> {
        let x0 = delta / config.zeta_per_m2.sqrt();
        Self::new(x0, x0 + config.scaled_length(), config.nu())
    }

    pub fn for_detuning(config: &CrystalConfig, omega: f64) -> Result<Self> {
        Self::from_mismatch(config, phase_mismatch(config, omega)?)
    }
}

fn d(order: Complex64, z: PolarArg) -> Result<Complex64> {
    Ok(pcf_d_polar(order, z)?.value)
}

/// A and B in closed form:
///
/// A = [D_{iν}(x_L e^{iπ/4}) D_{−iν}(−x₀ e^{−iπ/4})
///      + ν D_{−1−iν}(−x_L e^{−iπ/4}) D_{iν−1}(x₀ e^{iπ/4})] e^{−πν/2}
///
/// B = σ e^{iπ/4} [D_{−1−iν}(−x_L e^{−iπ/4}) D_{iν}(x₀ e^{iπ/4})
///      − D_{iν}(x_L e^{iπ/4}) D_{−1−iν}(−x₀ e^{−iπ/4})] e^{−πν/2}
pub fn transfer_ab(coords: &ScaledCoords) -> Result<(Complex64, Complex64)> {
    let nu = coords.nu;
    let a_up = Complex64::new(0.0, nu);
    let a_dn = Complex64::new(-1.0, -nu);
    let a_rec1 = Complex64::new(-1.0, nu);
    let a_rec2 = Complex64::new(0.0, -nu);
    let (l1, l2) = (
        PolarArg::diagonal(coords.x_l),
        PolarArg::anti_diagonal(coords.x_l),
    );
    let (o1, o2) = (
        PolarArg::diagonal(coords.x0),
        PolarArg::anti_diagonal(coords.x0),
    );

    let phi1_l = d(a_up, l1)?;
    let phi2_l = d(a_dn, l2)?;
    let damp = (-PI * nu / 2.0).exp();

    let a = (phi1_l * d(a_rec2, o2)? + nu * phi2_l * d(a_rec1, o1)?) * damp;
    let b = if nu == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        coords.sigma
            * (Complex64::i() * FRAC_PI_4).exp()
            * (phi2_l * d(a_up, o1)? - phi1_l * d(a_dn, o2)?)
            * damp
    };
    let residual = a.norm_sqr() - b.norm_sqr() - 1.0;
    if !(residual.abs() <= UNITARITY_SELF_CHECK) {
        return Err(Error::Unitarity { residual });
    }
    Ok((a, b))
}

/// Ã and B̃ from the general two-point solution with the basis functions
/// and their reciprocal partners exchanged; equal to A* and B* for a
/// unitary flow. Requires ν > 0.
pub fn transfer_ab_tilde(coords: &ScaledCoords) -> Result<(Complex64, Complex64)> {
    let (nu, x0, xl) = (coords.nu, coords.x0, coords.x_l);
    let pref = coords.sigma / wronskian_closed_form(nu);
    let phi =
        |b: Basis, x: f64| -> Result<Complex64> { Ok(crate::specfun::basis_function(b, x, nu)?.0) };
    let rec = |b: Basis, x: f64| pcf_d_reciprocal(b, x, nu);
    use Basis::{First, Second};
    let a_t = -pref * (rec(First, xl)? * phi(Second, x0)? - rec(Second, xl)? * phi(First, x0)?);
    let b_t = pref * (rec(First, xl)? * rec(Second, x0)? - rec(Second, xl)? * rec(First, x0)?);
    Ok((a_t, b_t))
}

/// A and B through the general two-point solution (determinant form),
/// independent of the closed-form bookkeeping in [`transfer_ab`].
pub fn transfer_ab_general(coords: &ScaledCoords) -> Result<(Complex64, Complex64)> {
    let (nu, x0, xl) = (coords.nu, coords.x0, coords.x_l);
    let pref = coords.sigma / wronskian_closed_form(nu);
    let phi =
        |b: Basis, x: f64| -> Result<Complex64> { Ok(crate::specfun::basis_function(b, x, nu)?.0) };
    let rec = |b: Basis, x: f64| pcf_d_reciprocal(b, x, nu);
    use Basis::{First, Second};
    let a = pref * (phi(First, xl)? * rec(Second, x0)? - phi(Second, xl)? * rec(First, x0)?);
    let b = -pref * (phi(First, xl)? * phi(Second, x0)? - phi(Second, xl)? * phi(First, x0)?);
    Ok((a, b))
}

/// Low-gain limit A → e^{−i(x_L² − x₀²)/4}.
pub fn low_gain_a(coords: &ScaledCoords) -> Complex64 {
    Complex64::new(
        0.0,
        -(coords.x_l * coords.x_l - coords.x0 * coords.x0) / 4.0,
    )
    .exp()
}

/// Low-gain limit
/// B → i e^{iπ/4} σ √(π/2) e^{−i(x_L² + x₀²)/4} {erfi[(1+i)x₀/2] − erfi[(1+i)x_L/2]}.
pub fn low_gain_b(coords: &ScaledCoords) -> Result<Complex64> {
    let one_i = Complex64::new(1.0, 1.0);
    let diff = erfi_c(one_i * coords.x0 / 2.0)? - erfi_c(one_i * coords.x_l / 2.0)?;
    let phase = Complex64::new(
        0.0,
        -(coords.x_l * coords.x_l + coords.x0 * coords.x0) / 4.0,
    )
    .exp();
    Ok(Complex64::i()
        * (Complex64::i() * FRAC_PI_4).exp()
        * coords.sigma
        * (PI / 2.0).sqrt()
        * phase
        * diff)
}

/// Common propagation phase e^{ik(Ω)L} e^{i(Δ(Ω)L + ζL²/2)/2}.
fn propagation_phase(config: &CrystalConfig, omega: f64) -> Result<Complex64> {
    let l = config.length_m;
    let k = wavevector(config, omega)?;
    let delta = phase_mismatch(config, omega)?;
    let phase = k * l + 0.5 * (delta * l + config.zeta_per_m2 * l * l / 2.0);
    Ok(Complex64::from_polar(1.0, phase))
}

/// U = A·e^{ik(Ω)L}·e^{i(ΔL + ζL²/2)/2} and V = iB·(same)·e^{iφ}.
pub fn transfer_uv(
    config: &CrystalConfig,
    omega: f64,
    a: Complex64,
    b: Complex64,
) -> Result<(Complex64, Complex64)> {
    let p = propagation_phase(config, omega)?;
    let u = a * p;
    let v = Complex64::i() * b * p * Complex64::from_polar(1.0, config.pump_phase_rad);
    Ok((u, v))
}

/// Optical spectral density S(ω₀ + Ω) = |V(Ω)|²/(2π).
pub fn optical_spectrum(v: Complex64) -> f64 {
    v.norm_sqr() / (2.0 * PI)
}

/// Quadrature spectra of one frequency pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeLevels {
    /// Squeezed quadrature, e^{−2r}.
    pub s2: f64,
    /// Stretched quadrature, e^{2r}.
    pub s1: f64,
    pub r: f64,
}

/// r = ln(|U| + |V|), S₂ = e^{−2r}, S₁ = e^{2r}.
pub fn squeezing_spectrum(u: Complex64, v: Complex64) -> Result<SqueezeLevels> {
    let residual = u.norm_sqr() - v.norm_sqr() - 1.0;
    if !(residual.abs() <= UNITARITY_SELF_CHECK) {
        return Err(Error::Unitarity { residual });
    }
    let grow = u.norm() + v.norm();
    let r = grow.ln();
    Ok(SqueezeLevels {
        s2: 1.0 / (grow * grow),
        s1: grow * grow,
        r,
    })
}

/// Principal squeezing angle ψ = ½ arg[U(Ω) V(−Ω)] in (−π/2, π/2].
pub fn squeezing_angle(u_pos: Complex64, v_neg: Complex64) -> Result<f64> {
    let m = v_neg.norm();
    if m < 1e-12 {
        return Err(Error::UndefinedAngle { magnitude: m });
    }
    Ok(0.5 * (u_pos * v_neg).arg())
}

/// θ₀(Ω) = Δ(Ω)²/(4ζ) − [k(Ω) + k(−Ω)]L/2.
pub fn compensation_angle(config: &CrystalConfig, omega: f64) -> Result<f64> {
    let delta = phase_mismatch(config, omega)?;
    let m = omega.abs();
    let ksum = wavevector(config, m)? + wavevector(config, -m)?;
    Ok(delta * delta / (4.0 * config.zeta_per_m2) - ksum * config.length_m / 2.0)
}

/// Everything known about one detuning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferCoefficients {
    pub omega: f64,
    pub coords: ScaledCoords,
    pub a: Complex64,
    pub b: Complex64,
    pub u: Complex64,
    pub v: Complex64,
    pub r: f64,
    /// Principal-value squeezing angle.
    pub psi: f64,
}

/// Spectra over a detuning grid.
#[derive(Clone, Debug)]
pub struct SpectraResult {
    pub grid: DetuningGrid,
    pub config: CrystalConfig,
    pub coeffs: Vec<TransferCoefficients>,
    pub s_optical: Vec<f64>,
    pub s_squeeze: Vec<f64>,
    pub s_stretch: Vec<f64>,
    pub psi_unwrapped: Vec<f64>,
    pub theta0: Vec<f64>,
    /// Indices where the unwrapper saw a step close to its decision limit.
    pub unwrap_suspects: Vec<usize>,
}

impl SpectraResult {
    /// |U(Ω)V(Ω)| at every grid point.
    pub fn uv_modulus(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.u.norm() * c.v.norm())
            .collect()
    }
}

/// A and B for one detuning, without the U/V dressing.
pub fn transfer_for_detuning(
    config: &CrystalConfig,
    omega: f64,
) -> Result<(ScaledCoords, Complex64, Complex64)> {
    let coords = ScaledCoords::for_detuning(config, omega)?;
    let (a, b) = transfer_ab(&coords)?;
    Ok((coords, a, b))
}

/// Evaluates the transfer coefficients on every grid point (data-parallel,
/// order-independent) and derives the spectra and angles.
pub fn compute_spectra(config: &CrystalConfig, grid: &DetuningGrid) -> Result<SpectraResult> {
    config.validate()?;
    let n = grid.len();
    // A and B depend on Ω only through Δ(Ω); evaluate the Ω > 0 half and mirror.
    let half: Vec<(ScaledCoords, Complex64, Complex64)> = grid.detunings[grid.positive_range()]
        .par_iter()
        .map(|&w| transfer_for_detuning(config, w))
        .collect::<Result<_>>()?;
    let ab = |j: usize| -> &(ScaledCoords, Complex64, Complex64) {
        let p = grid.positive_range().start;
        if j >= p {
            &half[j - p]
        } else {
            &half[grid.partner(j) - p]
        }
    };
    let uv: Vec<(Complex64, Complex64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let (_, a, b) = *ab(j);
            transfer_uv(config, grid.detunings[j], a, b)
        })
        .collect::<Result<_>>()?;

    let mut coeffs = Vec::with_capacity(n);
    let mut s_optical = Vec::with_capacity(n);
    let mut s_squeeze = Vec::with_capacity(n);
    let mut s_stretch = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    for j in 0..n {
        let (coords, a, b) = *ab(j);
        let (u, v) = uv[j];
        let (_, v_neg) = uv[grid.partner(j)];
        let lv = squeezing_spectrum(u, v)?;
        let angle = if v_neg.norm() < 1e-12 {
            // no squeezing direction; carry the neighbour's value through the unwrap
            psi.last().copied().unwrap_or(0.0)
        } else {
            squeezing_angle(u, v_neg)?
        };
        coeffs.push(TransferCoefficients {
            omega: grid.detunings[j],
            coords,
            a,
            b,
            u,
            v,
            r: lv.r,
            psi: angle,
        });
        s_optical.push(optical_spectrum(v));
        s_squeeze.push(lv.s2);
        s_stretch.push(lv.s1);
        psi.push(angle);
    }
    let unwrapped = unwrap_phase(&psi, PI);
    let theta0: Vec<f64> = grid
        .detunings
        .par_iter()
        .map(|&w| compensation_angle(config, w))
        .collect::<Result<_>>()?;
    Ok(SpectraResult {
        grid: grid.clone(),
        config: config.clone(),
        coeffs,
        s_optical,
        s_squeeze,
        s_stretch,
        psi_unwrapped: unwrapped.values,
        theta0,
        unwrap_suspects: unwrapped.suspect_steps,
    })
}

/// In the asymptotic gain region: x₀ < −x_c and x_L > x_c.
pub fn in_band(coords: &ScaledCoords, x_c: f64) -> bool {
    coords.x0 < -x_c && coords.x_l > x_c
}

/// Classification guard used by the plateau checks.
pub const IN_BAND_GUARD: f64 = 5.0;

/// Constant in-band amplitude gain e^{πν} of the chirped amplifier.
pub fn rosenbluth_gain(nu: f64) -> f64 {
    (PI * nu).exp()
}

/// (e^{πν} − √(e^{2πν} − 1))², the plateau squeezing level.
pub fn rosenbluth_squeezing(nu: f64) -> f64 {
    let g = rosenbluth_gain(nu);
    let s = g - (g * g - 1.0).sqrt();
    s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{design_grating, GratingOrientation, SellmeierModel, WavelengthBand};
    use proptest::prelude::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    pub(crate) fn reference_config() -> CrystalConfig {
        let s = SellmeierModel::lithium_niobate_extraordinary();
        let band = WavelengthBand {
            min_um: 0.46,
            max_um: 0.75,
        };
        let g = design_grating(
            &s,
            0.42,
            band,
            0.02,
            GratingOrientation::SmallDetuningAtInput,
        )
        .unwrap();
        CrystalConfig {
            length_m: 0.02,
            zeta_per_m2: g.zeta_per_m2,
            k0_per_m: g.k0_per_m,
            kappa_per_m: 0.0,
            pump_phase_rad: 0.0,
            pump_um: 0.42,
            sellmeier: s,
        }
        .with_nu(0.146)
    }

    #[test]
    fn coords_invariants() {
        let c = reference_config();
        let sc = ScaledCoords::for_detuning(&c, 1.0e15).unwrap();
        assert!((sc.x_l - sc.x0 - c.scaled_length()).abs() < 1e-12 * sc.x_l.abs().max(1.0));
        assert_eq!(sc.nu, sc.sigma * sc.sigma);
        assert!(ScaledCoords::new(0.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn vanishing_gain_gives_pure_phase() {
        for (x0, xl) in [(-40.0, 40.0), (3.0, 17.0), (-90.0, -20.0)] {
            let sc = ScaledCoords::new(x0, xl, 1e-8).unwrap();
            let (a, _) = transfer_ab(&sc).unwrap();
            assert!((a - low_gain_a(&sc)).norm() < 1e-6);
            let sc0 = ScaledCoords::new(x0, xl, 0.0).unwrap();
            let (a0, b0) = transfer_ab(&sc0).unwrap();
            assert!((a0 - low_gain_a(&sc0)).norm() < 1e-12);
            assert_eq!(b0, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn rosenbluth_gain_mid_crystal() {
        let sc = ScaledCoords::new(-40.0, 40.0, 0.146).unwrap();
        let (a, _) = transfer_ab(&sc).unwrap();
        let g = rosenbluth_gain(0.146);
        assert!((g - 1.582).abs() < 1e-3);
        assert!((a.norm() - g).abs() / g < 0.02, "|A| = {}", a.norm());
    }

    #[test]
    fn no_gain_without_phase_matching_point() {
        let sc = ScaledCoords::new(30.0, 80.0, 0.146).unwrap();
        let (_, b) = transfer_ab(&sc).unwrap();
        assert!(b.norm() < 0.1, "|B| = {}", b.norm());
    }

    #[test]
    fn closed_form_matches_general_solution() {
        for nu in [0.05, 0.146, 1.0] {
            for (x0, xl) in [
                (-3.0, 5.0),
                (-10.0, 12.0),
                (-60.0, 92.0),
                (2.0, 150.0),
                (-150.0, 2.0),
            ] {
                let sc = ScaledCoords::new(x0, xl, nu).unwrap();
                let (a, b) = transfer_ab(&sc).unwrap();
                let (ag, bg) = transfer_ab_general(&sc).unwrap();
                assert!(rel(a, ag) < 1e-9, "nu={nu} ({x0},{xl}): {a} vs {ag}");
                assert!((b - bg).norm() < 1e-9 * a.norm());
            }
        }
    }

    #[test]
    fn reference_values() {
        // 30-digit evaluations of the closed form
        let cases = [
            (
                0.146,
                -3.0,
                5.0,
                Complex64::new(-0.950_305_462_825_454_7, 1.163_318_468_077_331),
                Complex64::new(0.783_127_696_129_377_4, -0.801_935_996_449_082_8),
            ),
            (
                0.146,
                -10.0,
                12.0,
                Complex64::new(-0.012_591_159_845_591_056, 1.574_086_803_714_052),
                Complex64::new(-1.175_301_499_112_889, -0.310_763_880_005_340_4),
            ),
            (
                1.0,
                -2.0,
                3.0,
                Complex64::new(28.958_603_779_261_416, -11.225_901_905_048_034),
                Complex64::new(12.576_688_874_511_994, -28.380_424_651_152_436),
            ),
        ];
        for (nu, x0, xl, wa, wb) in cases {
            let (a, b) = transfer_ab(&ScaledCoords::new(x0, xl, nu).unwrap()).unwrap();
            assert!(rel(a, wa) < 1e-10 && rel(b, wb) < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn tilde_partners_are_conjugates() {
        for nu in [1e-4, 0.146, 1.0] {
            for (x0, xl) in [(-3.0, 5.0), (-70.0, 80.0), (12.0, 160.0), (-33.3, -1.0)] {
                let sc = ScaledCoords::new(x0, xl, nu).unwrap();
                let (a, b) = transfer_ab(&sc).unwrap();
                let (at, bt) = transfer_ab_tilde(&sc).unwrap();
                assert!(
                    (at - a.conj()).norm() <= 1e-8 * a.norm().max(1.0),
                    "nu={nu}: {at} vs {}",
                    a.conj()
                );
                assert!((bt - b.conj()).norm() <= 1e-8 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn low_gain_b_examples() {
        let sc = ScaledCoords::new(7.5, 7.5, 0.2).unwrap();
        assert!(low_gain_b(&sc).unwrap().norm() < 1e-15);
        // σ = 0.01 ⇒ ν = 1e-4; compare to the exact solution
        let sc = ScaledCoords::new(-40.0, 40.0, 1e-4).unwrap();
        let lb = low_gain_b(&sc).unwrap();
        let (_, b) = transfer_ab(&sc).unwrap();
        assert!(rel(lb, b) < 0.01, "{lb} vs {b}");
        // plateau: |erfi diff| → 2, so |B| ≈ σ √(2π)
        assert!((lb.norm() / (0.01 * (2.0 * PI).sqrt()) - 1.0).abs() < 0.05);
    }

    #[test]
    fn uv_phases_only() {
        let c = reference_config();
        let w = 9.0e14;
        let (_, a, b) = transfer_for_detuning(&c, w).unwrap();
        let (u, v) = transfer_uv(&c, w, a, b).unwrap();
        assert!((u.norm() - a.norm()).abs() < 1e-10 * a.norm());
        assert!((v.norm() - b.norm()).abs() < 1e-10 * a.norm());
        assert!(((u / v).norm() - (a / b).norm()).abs() < 1e-10 * (a / b).norm());
        assert!((u.norm_sqr() - v.norm_sqr() - 1.0).abs() < 1e-8);

        let mut flipped = c.clone();
        flipped.pump_phase_rad += PI;
        let (u2, v2) = transfer_uv(&flipped, w, a, b).unwrap();
        assert_eq!(u2, u);
        assert!((v2 + v).norm() < 1e-12 * v.norm());
    }

    #[test]
    fn spectrum_values() {
        assert_eq!(optical_spectrum(Complex64::new(0.0, 0.0)), 0.0);
        let g = rosenbluth_gain(0.146);
        let plateau = g * g - 1.0;
        assert!((plateau - 1.503).abs() < 1e-3);
        let sc = ScaledCoords::new(-60.0, 60.0, 0.146).unwrap();
        let (_, b) = transfer_ab(&sc).unwrap();
        assert!((optical_spectrum(b) * 2.0 * PI / plateau - 1.0).abs() < 0.1);
    }

    #[test]
    fn squeezing_levels() {
        let one = squeezing_spectrum(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!((one.s1, one.s2, one.r), (1.0, 1.0, 0.0));
        let s = rosenbluth_squeezing(0.146);
        assert!((s - 0.127).abs() < 1e-3, "{s}");
        assert!((10.0 * s.log10() + 8.97).abs() < 0.05);
        let sc = ScaledCoords::new(-50.0, 70.0, 0.146).unwrap();
        let (a, b) = transfer_ab(&sc).unwrap();
        let lv = squeezing_spectrum(a, b).unwrap();
        assert!((lv.s2 / s - 1.0).abs() < 0.1);
        assert!((lv.s1 * lv.s2 - 1.0).abs() < 1e-12);
        assert!(((-lv.r).exp() - (a.norm() - b.norm())).abs() < 1e-8);
        assert!(matches!(
            squeezing_spectrum(Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)),
            Err(Error::Unitarity { .. })
        ));
        // low gain: S₂ ≈ 1 − 2|B| with |B| ≈ σ√(2π)
        let sc = ScaledCoords::new(-50.0, 70.0, 1e-4).unwrap();
        let (a, b) = transfer_ab(&sc).unwrap();
        let want = 1.0 - 2.0 * 0.01 * (2.0 * PI).sqrt();
        assert!((squeezing_spectrum(a, b).unwrap().s2 - want).abs() < 5e-3);
    }

    #[test]
    fn angle_definition() {
        let c = reference_config();
        let w = 1.1e15;
        let (_, a, b) = transfer_for_detuning(&c, w).unwrap();
        let (u, _) = transfer_uv(&c, w, a, b).unwrap();
        let (_, vn) = transfer_uv(&c, -w, a, b).unwrap();
        let psi = squeezing_angle(u, vn).unwrap();
        assert!(psi > -PI / 2.0 && psi <= PI / 2.0);
        let resid = 2.0 * psi - u.arg() - vn.arg();
        let wrapped = resid - 2.0 * PI * (resid / (2.0 * PI)).round();
        assert!(wrapped.abs() < 1e-12);

        let delta = 0.3;
        let mut shifted = c.clone();
        shifted.pump_phase_rad += delta;
        let (_, vn2) = transfer_uv(&shifted, -w, a, b).unwrap();
        let psi2 = squeezing_angle(u, vn2).unwrap();
        let step = psi2 - psi - delta / 2.0;
        assert!((step - PI * (step / PI).round()).abs() < 1e-12);

        assert!(matches!(
            squeezing_angle(Complex64::new(1.0, 0.0), Complex64::new(1e-13, 0.0)),
            Err(Error::UndefinedAngle { .. })
        ));
    }

    #[test]
    fn compensation_angle_properties() {
        let c = reference_config();
        let w = 7.7e14;
        assert_eq!(
            compensation_angle(&c, w).unwrap(),
            compensation_angle(&c, -w).unwrap()
        );
        let delta = phase_mismatch(&c, w).unwrap();
        let mut doubled = c.clone();
        doubled.zeta_per_m2 *= 2.0;
        let base = compensation_angle(&c, w).unwrap();
        let ksum_part = base - delta * delta / (4.0 * c.zeta_per_m2);
        let other = compensation_angle(&doubled, w).unwrap() - ksum_part;
        assert!((other - delta * delta / (8.0 * c.zeta_per_m2)).abs() < 1e-6 * base.abs());
    }

    #[test]
    fn grid_spectra_invariants() {
        let c = reference_config();
        let grid = DetuningGrid::covering(&c, None, 1 << 11).unwrap();
        let s = compute_spectra(&c, &grid).unwrap();
        for j in 0..grid.len() {
            let p = grid.partner(j);
            let cj = &s.coeffs[j];
            assert!((cj.a.norm_sqr() - cj.b.norm_sqr() - 1.0).abs() < 1e-8);
            assert!((s.s_squeeze[j] * s.s_stretch[j] - 1.0).abs() < 1e-8);
            assert!((s.s_optical[j] - s.s_optical[p]).abs() <= 1e-10 * s.s_optical[j].max(1e-300));
            assert_eq!(cj.a, s.coeffs[p].a);
            assert_eq!(cj.b, s.coeffs[p].b);
            assert!(
                ((cj.a / cj.b) - (s.coeffs[p].a / s.coeffs[p].b)).norm()
                    < 1e-8 * (cj.a / cj.b).norm()
            );
            assert!((s.theta0[j] - s.theta0[p]).abs() <= 1e-8 * s.theta0[j].abs());
            assert!((s.s_squeeze[j] - s.s_squeeze[p]).abs() < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn unitarity_anywhere(x0 in -200.0f64..200.0, len in 0.0f64..200.0, nu in 0.0f64..1.5) {
            let sc = ScaledCoords::new(x0, x0 + len, nu).unwrap();
            let (a, b) = transfer_ab(&sc).unwrap();
            prop_assert!((a.norm_sqr() - b.norm_sqr() - 1.0).abs() < 1e-8 * a.norm_sqr().max(1.0));
        }
    }
}
