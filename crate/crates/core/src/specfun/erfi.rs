//! Imaginary error function of complex argument.

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// erfi(z) = −i·erf(iz), via the Faddeeva function.
pub fn erfi_c(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("erfi of non-finite argument {z}")));
    }
    Ok(z.erfi())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Maclaurin series 2/√π Σ z^{2n+1} / (n!(2n+1)), summed in place.
    fn erfi_series(z: Complex64) -> Complex64 {
        let z2 = z * z;
        let mut power = z;
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..200 {
            let term = power / (2 * n + 1) as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
            power *= z2 / (n + 1) as f64;
        }
        sum * 2.0 / PI.sqrt()
    }

    #[test]
    fn zero_is_zero() {
        assert_eq!(
            erfi_c(Complex64::new(0.0, 0.0)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn erfi_one_matches_reference() {
        // 30-digit reference 1.650425758797542876025337729...
        let got = erfi_c(Complex64::new(1.0, 0.0)).unwrap();
        assert!((got.re - 1.650_425_758_797_542_9).abs() < 1e-10 * 1.65);
        assert_eq!(got.im, 0.0);
        assert!((got - erfi_series(Complex64::new(1.0, 0.0))).norm() < 1e-14);
    }

    #[test]
    fn antisymmetric_exactly() {
        let z = Complex64::new(0.3, 0.4);
        assert_eq!(erfi_c(-z).unwrap(), -erfi_c(z).unwrap());
    }

    #[test]
    fn high_precision_points() {
        let cases = [
            (
                Complex64::new(0.3, 0.4),
                Complex64::new(0.294_439_807_769_317_06, 0.464_437_212_979_561_4),
            ),
            (
                Complex64::new(2.0, 2.0),
                Complex64::new(0.127_291_629_463_140_8, 1.151_310_866_398_069),
            ),
            (
                Complex64::new(-30.0, -30.0),
                Complex64::new(0.008_074_569_752_417_39, -1.010_565_986_974_555),
            ),
            (
                Complex64::new(4.0, -1.0),
                Complex64::new(52_731.820_367_670_25, -456_592.304_380_945_4),
            ),
        ];
        for (z, want) in cases {
            let got = erfi_c(z).unwrap();
            assert!(
                (got - want).norm() / want.norm() < 1e-10,
                "{z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn rejects_nan() {
        assert!(matches!(
            erfi_c(Complex64::new(f64::NAN, 0.0)),
            Err(Error::Domain(_))
        ));
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(re in -3.5f64..3.5, im in -3.5f64..3.5) {
            let z = Complex64::new(re, im);
            let a = erfi_c(z.conj()).unwrap();
            let b = erfi_c(z).unwrap().conj();
            prop_assert!((a - b).norm() <= 1e-13 * (1.0 + b.norm()));
        }

        #[test]
        fn agrees_with_series_near_origin(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let z = Complex64::new(re, im);
            let got = erfi_c(z).unwrap();
            let want = erfi_series(z);
            prop_assert!((got - want).norm() <= 1e-10 * (1e-3 + want.norm()));
        }
    }
}
