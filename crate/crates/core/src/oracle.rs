//! Direct numerical integration of the scaled coupled-mode system
//!
//! u′ = −(i/2) x u + σ w,   w′ = (i/2) x w + σ u,
//!
//! where w plays the role of the conjugate operator. Integrating from the
//! basis states (1, 0) and (0, 1) gives the fundamental matrix
//! [[A, B], [B̃, Ã]], an independent check on the closed-form coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pdc::ScaledCoords;

/// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights (equal to the last stage row, FSAL).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive stepping controls. `rel_tol` targets the endpoint result; each
/// step is held to a thousandth of it. `abs_tol` is relative to the size of
/// the initial data, so the flow stays exactly linear in it. `max_step` is in
/// x units and is further reduced where the local phase rate |x|/2 exceeds one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub method_order: u32,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 1.0,
            method_order: 5,
        }
    }
}

impl IntegrationSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.rel_tol) && ok(self.abs_tol) && ok(self.max_step)) {
            return Err(Error::Domain(format!(
                "invalid integration settings {self:?}"
            )));
        }
        if self.method_order != 5 {
            return Err(Error::Domain(format!(
                "only the order-5 embedded pair is available, got order {}",
                self.method_order
            )));
        }
        Ok(())
    }

    fn step_ceiling(&self, x: f64) -> f64 {
        self.max_step / (0.5 * x.abs()).max(1.0)
    }
}

/// Numerically integrated Green's functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenPair {
    pub a_num: Complex64,
    pub b_num: Complex64,
    pub a_tilde: Complex64,
    pub b_tilde: Complex64,
    /// ||A|² − |B|² − 1|.
    pub residual_unitarity: f64,
}

type State<const N: usize> = [Complex64; N];

const LOCAL_FRACTION: f64 = 1e-3;

/// One embedded step; returns the new state and the scaled error norm.
fn dp_step<const N: usize>(
    f: &impl Fn(f64, &State<N>) -> State<N>,
    x: f64,
    y: &State<N>,
    h: f64,
    settings: &IntegrationSettings,
    size: f64,
) -> (State<N>, f64) {
    let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
    k[0] = f(x, y);
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = f(x + C[s] * h, &ys);
    }
    let mut y_new = *y;
    let mut err = [Complex64::new(0.0, 0.0); N];
    for s in 0..7 {
        for i in 0..N {
            y_new[i] += h * B5[s] * k[s][i];
            err[i] += h * E[s] * k[s][i];
        }
    }
    let mut acc = 0.0;
    for i in 0..N {
        let scale = LOCAL_FRACTION
            * (settings.abs_tol * size + settings.rel_tol * y[i].norm().max(y_new[i].norm()));
        acc += (err[i].norm() / scale).powi(2);
    }
    (y_new, (acc / N as f64).sqrt())
}

/// Integrates `f` from `x0` to `x1` with error control.
fn integrate<const N: usize>(
    f: &impl Fn(f64, &State<N>) -> State<N>,
    x0: f64,
    x1: f64,
    y0: State<N>,
    settings: &IntegrationSettings,
) -> Result<State<N>> {
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let mut x = x0;
    let mut y = y0;
    let mut h = settings.step_ceiling(x0).min((x1 - x0).abs());
    let mut steps = 0usize;
    let size = y0.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if size == 0.0 {
        return Ok(y0);
    }
    while (x1 - x) * dir > 0.0 {
        let ceiling = settings.step_ceiling(x);
        h = h.min(ceiling).min((x1 - x).abs());
        if h <= 1e-13 * (1.0 + x.abs()) {
            return Err(Error::StepUnderflow { x });
        }
        let (y_new, err) = dp_step(f, x, &y, dir * h, settings, size);
        if !err.is_finite() {
            return Err(Error::ToleranceNotMet(format!(
                "non-finite error estimate at x = {x}"
            )));
        }
        if err <= 1.0 {
            x = if (x1 - x).abs() <= h { x1 } else { x + dir * h };
            y = y_new;
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        steps += 1;
        if steps > 50_000_000 {
            return Err(Error::ToleranceNotMet(format!(
                "step budget exhausted near x = {x}"
            )));
        }
    }
    Ok(y)
}

fn coupled_rhs(sigma: f64) -> impl Fn(f64, &State<2>) -> State<2> {
    move |x, y| {
        let rot = Complex64::new(0.0, 0.5 * x);
        [-rot * y[0] + sigma * y[1], rot * y[1] + sigma * y[0]]
    }
}

/// Fundamental matrix of the flow from `x_from` to `x_to`, columns being the
/// images of (1, 0) and (0, 1).
pub fn transfer_matrix(
    sigma: f64,
    x_from: f64,
    x_to: f64,
    settings: &IntegrationSettings,
) -> Result<[[Complex64; 2]; 2]> {
    settings.validate()?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let rhs = coupled_rhs(sigma);
    let c1 = integrate(&rhs, x_from, x_to, [one, zero], settings)?;
    let c2 = integrate(&rhs, x_from, x_to, [zero, one], settings)?;
    Ok([[c1[0], c2[0]], [c1[1], c2[1]]])
}

/// Green's functions A, B (and their partners) by direct integration.
pub fn integrate_green(coords: &ScaledCoords, settings: &IntegrationSettings) -> Result<GreenPair> {
    if coords.x0 > coords.x_l {
        return Err(Error::Domain(format!(
            "integration interval reversed: {} > {}",
            coords.x0, coords.x_l
        )));
    }
    let m = transfer_matrix(coords.sigma, coords.x0, coords.x_l, settings)?;
    let (a, b) = (m[0][0], m[0][1]);
    let residual = (a.norm_sqr() - b.norm_sqr() - 1.0).abs();
    let bound = 10.0 * settings.rel_tol * a.norm_sqr();
    if residual > bound {
        return Err(Error::ToleranceNotMet(format!(
            "unitarity residual {residual:e} exceeds {bound:e}"
        )));
    }
    Ok(GreenPair {
        a_num: a,
        b_num: b,
        a_tilde: m[1][1],
        b_tilde: m[1][0],
        residual_unitarity: residual,
    })
}

/// Integrates b″ + (x²/4 + shift) b = 0 from `coords.x0` to `coords.x_l`
/// and returns `n_samples` equally spaced (x, b) pairs including both ends.
/// The propagation equation corresponds to shift = i/2 − ν.
pub fn integrate_second_order_shifted(
    coords: &ScaledCoords,
    settings: &IntegrationSettings,
    shift: Complex64,
    init_value: Complex64,
    init_slope: Complex64,
    n_samples: usize,
) -> Result<Vec<(f64, Complex64)>> {
    settings.validate()?;
    if n_samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let rhs = move |x: f64, y: &State<2>| [y[1], -(0.25 * x * x + shift) * y[0]];
    let span = coords.x_l - coords.x0;
    let mut y = [init_value, init_slope];
    let mut out = Vec::with_capacity(n_samples);
    out.push((coords.x0, init_value));
    let mut x = coords.x0;
    for j in 1..n_samples {
        let next = coords.x0 + span * j as f64 / (n_samples - 1) as f64;
        y = integrate(&rhs, x, next, y, settings)?;
        x = next;
        out.push((x, y[0]));
    }
    Ok(out)
}

/// [`integrate_second_order_shifted`] for the propagation equation itself.
pub fn integrate_second_order(
    coords: &ScaledCoords,
    settings: &IntegrationSettings,
    init_value: Complex64,
    init_slope: Complex64,
    n_samples: usize,
) -> Result<Vec<(f64, Complex64)>> {
    let shift = Complex64::new(-coords.nu, 0.5);
    integrate_second_order_shifted(coords, settings, shift, init_value, init_slope, n_samples)
}
