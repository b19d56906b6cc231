//! Phase unwrapping modulo an arbitrary period.

/// Unwrapped samples plus the indices whose raw step came close to the
/// half-period decision limit (within 10% of it).
#[derive(Clone, Debug, PartialEq)]
pub struct Unwrapped {
    pub values: Vec<f64>,
    pub suspect_steps: Vec<usize>,
}

/// Removes jumps of size `period` between consecutive samples so that every
/// step lies in (−period/2, period/2]. Index `j` in `suspect_steps` refers to
/// the step from `j − 1` to `j`.
pub fn unwrap_phase(raw: &[f64], period: f64) -> Unwrapped {
    let mut values = Vec::with_capacity(raw.len());
    let mut suspect_steps = Vec::new();
    let half = period / 2.0;
    let mut offset = 0.0;
    for (j, &p) in raw.iter().enumerate() {
        if j > 0 {
            let mut step = p - raw[j - 1];
            step -= period * (step / period).round();
            if step <= -half {
                step += period;
            }
            if step.abs() > 0.9 * half {
                suspect_steps.push(j);
            }
            offset = values[j - 1] + step - p;
        }
        values.push(p + offset);
    }
    Unwrapped {
        values,
        suspect_steps,
    }
}
