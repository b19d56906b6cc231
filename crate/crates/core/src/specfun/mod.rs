//! Special functions for the chirped-grating solution: parabolic cylinder
//! functions of complex order on rotated real axes, the Whittaker basis
//! pair built from them, and erfi.

mod erfi;
pub mod gamma;
mod pcf;

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

pub use erfi::erfi_c;
pub use pcf::{origin_values, pcf_d, pcf_d_eval, pcf_d_polar, PcfEval, PolarArg};

use crate::error::{Error, Result};

/// The orders that occur in the solution, for a given gain parameter ν.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderTag {
    /// iν
    INu,
    /// −1 − iν
    MinusOneMinusINu,
    /// iν − 1
    INuMinusOne,
    /// −iν
    MinusINu,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcfOrder {
    pub value: Complex64,
    pub tag: OrderTag,
}

impl PcfOrder {
    pub fn tagged(tag: OrderTag, nu: f64) -> Self {
        let value = match tag {
            OrderTag::INu => Complex64::new(0.0, nu),
            OrderTag::MinusOneMinusINu => Complex64::new(-1.0, -nu),
            OrderTag::INuMinusOne => Complex64::new(-1.0, nu),
            OrderTag::MinusINu => Complex64::new(0.0, -nu),
            OrderTag::General => panic!("general orders carry their own value"),
        };
        Self { value, tag }
    }

    pub fn general(value: Complex64) -> Self {
        Self {
            value,
            tag: OrderTag::General,
        }
    }
}

/// Which member of the Whittaker pair
/// φ₁(x) = D_{iν}(x e^{iπ/4}), φ₂(x) = D_{−1−iν}(−x e^{−iπ/4}).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    First,
    Second,
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::Domain(format!(
            "gain parameter nu must be positive, got {nu}"
        )));
    }
    Ok(())
}

/// φᵢ(x) with its x-derivative.
pub fn basis_function(basis: Basis, x: f64, nu: f64) -> Result<(Complex64, Complex64)> {
    let i = Complex64::i();
    match basis {
        Basis::First => {
            let ev = pcf_d_polar(Complex64::new(0.0, nu), PolarArg::diagonal(x))?;
            Ok((ev.value, (i * FRAC_PI_4).exp() * ev.derivative))
        }
        Basis::Second => {
            let ev = pcf_d_polar(Complex64::new(-1.0, -nu), PolarArg::anti_diagonal(x))?;
            Ok((ev.value, -(-i * FRAC_PI_4).exp() * ev.derivative))
        }
    }
}

/// Reciprocal function φ̃ᵢ(x) = σ⁻¹ (d/dx + ix/2) φᵢ(x), in closed form:
/// ν^{1/2} e^{3iπ/4} D_{iν−1}(x e^{iπ/4}) or ν^{−1/2} e^{−iπ/4} D_{−iν}(−x e^{−iπ/4}).
pub fn pcf_d_reciprocal(basis: Basis, x: f64, nu: f64) -> Result<Complex64> {
    check_nu(nu)?;
    let i = Complex64::i();
    match basis {
        Basis::First => {
            let d = pcf_d_polar(Complex64::new(-1.0, nu), PolarArg::diagonal(x))?.value;
            Ok(nu.sqrt() * (i * 3.0 * FRAC_PI_4).exp() * d)
        }
        Basis::Second => {
            let d = pcf_d_polar(Complex64::new(0.0, -nu), PolarArg::anti_diagonal(x))?.value;
            Ok((-i * FRAC_PI_4).exp() * d / nu.sqrt())
        }
    }
}

/// W = φ₁φ₂′ − φ₁′φ₂ as predicted in closed form, e^{−iπ/4 + πν/2}.
pub fn wronskian_closed_form(nu: f64) -> Complex64 {
    Complex64::new(PI * nu / 2.0, -FRAC_PI_4).exp()
}

/// |φ₁φ₂′ − φ₁′φ₂ − e^{−iπ/4+πν/2}| with the derivatives taken from the
/// one-step order relations D′_a(z) = −z/2·D_a + a·D_{a−1} (for φ₁) and
/// D′_a(z) = z/2·D_a − D_{a+1} (for φ₂).
pub fn wronskian_check(nu: f64, x: f64) -> Result<f64> {
    check_nu(nu)?;
    let i = Complex64::i();
    let a1 = Complex64::new(0.0, nu);
    let z1 = PolarArg::diagonal(x);
    let phi1 = pcf_d_polar(a1, z1)?.value;
    let lower = pcf_d_polar(a1 - 1.0, z1)?.value;
    let d1 = -z1.to_complex() / 2.0 * phi1 + a1 * lower;
    let dphi1 = (i * FRAC_PI_4).exp() * d1;

    let a2 = Complex64::new(-1.0, -nu);
    let z2 = PolarArg::anti_diagonal(x);
    let phi2 = pcf_d_polar(a2, z2)?.value;
    let upper = pcf_d_polar(a2 + 1.0, z2)?.value;
    let d2 = z2.to_complex() / 2.0 * phi2 - upper;
    let dphi2 = -(-i * FRAC_PI_4).exp() * d2;

    Ok((phi1 * dphi2 - dphi1 * phi2 - wronskian_closed_form(nu)).norm())
}
