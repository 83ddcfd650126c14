//! Dormand–Prince 5(4) integrator with continuous (dense) output.

use serde::Serialize;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// difference between the 5th- and 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn tol(tol: f64) -> OdeOptions {
        OdeOptions {
            rtol: tol,
            atol: tol,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OdeStats {
    pub steps: usize,
    pub rejections: usize,
    pub evaluations: usize,
}

/// Interpolant over one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s1 = 1.0 - s;
        let r = &self.r;
        std::array::from_fn(|i| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i]))))
    }

    pub fn end(&self) -> [f64; N] {
        std::array::from_fn(|i| self.r[0][i] + self.r[1][i])
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(k, a)| a * k[i]).sum::<f64>())
}

struct Stages<const N: usize> {
    k: [[f64; N]; 7],
    y1: [f64; N],
}

fn stages<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: [f64; N], h: f64) -> Result<Stages<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = k1;
    k[1] = f(t + C[1] * h, &axpy(y, h, &[(&k[0], A2[0])]))?;
    k[2] = f(t + C[2] * h, &axpy(y, h, &[(&k[0], A3[0]), (&k[1], A3[1])]))?;
    k[3] = f(t + C[3] * h, &axpy(y, h, &[(&k[0], A4[0]), (&k[1], A4[1]), (&k[2], A4[2])]))?;
    k[4] = f(
        t + C[4] * h,
        &axpy(y, h, &[(&k[0], A5[0]), (&k[1], A5[1]), (&k[2], A5[2]), (&k[3], A5[3])]),
    )?;
    k[5] = f(
        t + h,
        &axpy(y, h, &[(&k[0], A6[0]), (&k[1], A6[1]), (&k[2], A6[2]), (&k[3], A6[3]), (&k[4], A6[4])]),
    )?;
    let y1 = axpy(
        y,
        h,
        &[(&k[0], B[0]), (&k[2], B[2]), (&k[3], B[3]), (&k[4], B[4]), (&k[5], B[5])],
    );
    k[6] = f(t + h, &y1)?;
    Ok(Stages { k, y1 })
}

fn norm<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    (v.iter().zip(scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], f0: &[f64; N], span: f64, opts: &OdeOptions) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let scale: [f64; N] = std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs());
    let (d0, d1) = (norm(y, &scale), norm(f0, &scale));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = axpy(y, h0, &[(f0, 1.0)]);
    let f1 = f(t + h0, &y1)?;
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Adaptive integration of `y' = f(t, y)` from `t0` to `t1 > t0`. The
/// observer sees every accepted step in order.
pub fn integrate_adaptive<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<OdeStats>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(&DenseStep<N>) -> Result<()>,
{
    if !(t1 > t0) {
        return Err(Error::Invalid(format!("integration end {t1} must exceed start {t0}")));
    }
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, &y, &k1, t1 - t0, opts)?;
    stats.evaluations += 1;
    let mut last_rejected = false;
    while t < t1 {
        if stats.steps + stats.rejections >= opts.max_steps {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t + h >= t1 || t + 1.01 * h >= t1;
        if last {
            h = t1 - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }
        let st = stages(&mut f, t, &y, k1, h)?;
        stats.evaluations += 6;
        let err_vec: [f64; N] = std::array::from_fn(|i| h * (0..7).map(|j| E[j] * st.k[j][i]).sum::<f64>());
        let scale: [f64; N] = std::array::from_fn(|i| opts.atol + opts.rtol * y[i].abs().max(st.y1[i].abs()));
        let err = norm(&err_vec, &scale);
        if !err.is_finite() {
            return Err(Error::StepUnderflow { t, h });
        }
        if err <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            let dense = DenseStep {
                t0: t,
                t1: t_new,
                r: dense_coefficients(&y, &st, h),
            };
            observe(&dense)?;
            stats.steps += 1;
            t = t_new;
            y = st.y1;
            k1 = st.k[6];
            let mut fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            stats.rejections += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
    Ok(stats)
}

fn dense_coefficients<const N: usize>(y: &[f64; N], st: &Stages<N>, h: f64) -> [[f64; N]; 5] {
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        let dy = st.y1[i] - y[i];
        let bspl = h * st.k[0][i] - dy;
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * st.k[6][i] - bspl;
        r[4][i] = h * (0..7).map(|j| D[j] * st.k[j][i]).sum::<f64>();
    }
    r
}

/// Fixed-step integration with the 5th-order weights; used for order checks.
pub fn integrate_fixed<const N: usize, F>(mut f: F, t0: f64, y0: [f64; N], t1: f64, steps: usize) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut k1 = f(t0, &y)?;
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let st = stages(&mut f, t, &y, k1, h)?;
        y = st.y1;
        k1 = st.k[6];
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_adaptive() {
        let mut end = [0.0; 2];
        let stats = integrate_adaptive(oscillator, 0.0, [1.0, 0.0], 10.0, &OdeOptions::tol(1e-10), |d| {
            end = d.end();
            Ok(())
        })
        .unwrap();
        assert!((end[0] - 10f64.cos()).abs() < 1e-8, "{end:?}");
        assert!(stats.steps > 10 && stats.steps < 2000);
    }

    #[test]
    fn dense_output_is_accurate_inside_steps() {
        let mut worst: f64 = 0.0;
        integrate_adaptive(oscillator, 0.0, [1.0, 0.0], 6.0, &OdeOptions::tol(1e-10), |d| {
            for k in 0..=10 {
                let t = d.t0 + (d.t1 - d.t0) * k as f64 / 10.0;
                let y = d.eval(t);
                worst = worst.max((y[0] - t.cos()).abs()).max((y[1] + t.sin()).abs());
            }
            Ok(())
        })
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn fixed_step_order_is_five() {
        let exact = 2f64.cos();
        let err = |n| (integrate_fixed(oscillator, 0.0, [1.0, 0.0], 2.0, n).unwrap()[0] - exact).abs();
        let (e1, e2) = (err(20), err(40));
        let order = (e1 / e2).log2();
        assert!(e1 / e2 >= 8.0 && order > 4.5, "order {order}");
    }

    #[test]
    fn failing_right_hand_side_propagates() {
        let r = integrate_adaptive(
            |t, y: &[f64; 1]| if t > 0.5 { Err(Error::Invalid("boom".into())) } else { Ok([y[0]]) },
            0.0,
            [1.0],
            1.0,
            &OdeOptions::tol(1e-8),
            |_| Ok(()),
        );
        assert!(matches!(r, Err(Error::Invalid(_))));
    }
}
