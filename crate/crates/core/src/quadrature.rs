//! Adaptive Gauss–Kronrod quadrature and checkpointed running integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 60;
const MAX_SEGMENTS: usize = 20_000;
const DEFAULT_SPACING: f64 = 0.125;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge on [{a}, {b}] (subdivision depth {depth}); integrand is near-singular")]
    NonConvergence { a: f64, b: f64, depth: u32 },
    #[error("integrand is not finite at {at}")]
    NonFinite { at: f64 },
}

// 15-point Kronrod abscissae (positive half, descending) and weights, with
// the embedded 7-point Gauss weights on the odd-indexed abscissae.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, depth: u32) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite { at: x })
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for (j, &x) in XGK[..7].iter().enumerate() {
        let dx = half * x;
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs: abs * half.abs(),
        depth,
    })
}

/// Adaptive integral of `f` over `[a, b]` (either orientation).
///
/// Bisects the worst segment until the summed Gauss/Kronrod discrepancy is at
/// most `tol * max(1, |result|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    assert!(tol > 0.0, "tolerance must be positive");
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    heap.push(kronrod(&mut f, a, b, 0)?);
    loop {
        let (value, error, abs) = heap
            .iter()
            .fold((0.0, 0.0, 0.0), |(v, e, s), seg| (v + seg.value, e + seg.error, s + seg.abs));
        let target = (tol * f64::max(1.0, value.abs())).max(100.0 * f64::EPSILON * abs);
        if error <= target {
            return Ok(value);
        }
        let worst = heap.pop().expect("non-empty");
        if worst.depth >= MAX_DEPTH || heap.len() + 2 > MAX_SEGMENTS {
            return Err(QuadError::NonConvergence {
                a: worst.a,
                b: worst.b,
                depth: worst.depth,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(kronrod(&mut f, worst.a, mid, worst.depth + 1)?);
        heap.push(kronrod(&mut f, mid, worst.b, worst.depth + 1)?);
    }
}

/// Running integral `t -> ∫_{t_ref}^{t} f` with lazily built checkpoints.
///
/// Checkpoints sit on a uniform lattice `t_ref + k·spacing`; a query only
/// integrates from the nearest lattice point, extending the lattice as needed,
/// so sweeping forward along a trajectory costs work proportional to the
/// distance travelled.
#[derive(Clone)]
pub struct CumulativeIntegral<F> {
    integrand: F,
    t_ref: f64,
    tol: f64,
    spacing: f64,
    forward: Vec<f64>,
    backward: Vec<f64>,
}

pub fn cumulative<F: FnMut(f64) -> f64>(integrand: F, t_ref: f64, tol: f64) -> CumulativeIntegral<F> {
    CumulativeIntegral::new(integrand, t_ref, tol)
}

impl<F: FnMut(f64) -> f64> CumulativeIntegral<F> {
    pub fn new(integrand: F, t_ref: f64, tol: f64) -> Self {
        assert!(tol > 0.0, "tolerance must be positive");
        CumulativeIntegral {
            integrand,
            t_ref,
            tol,
            spacing: DEFAULT_SPACING,
            forward: vec![0.0],
            backward: vec![0.0],
        }
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        assert!(spacing > 0.0);
        self.spacing = spacing;
        self.forward.truncate(1);
        self.backward.truncate(1);
        self
    }

    pub fn t_ref(&self) -> f64 {
        self.t_ref
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Number of lattice checkpoints computed so far (including `t_ref`).
    pub fn checkpoints(&self) -> usize {
        self.forward.len() + self.backward.len() - 1
    }

    pub fn integrand_at(&mut self, t: f64) -> f64 {
        (self.integrand)(t)
    }

    fn node(&self, k: i64) -> f64 {
        self.t_ref + k as f64 * self.spacing
    }

    pub fn value(&mut self, t: f64) -> Result<f64, QuadError> {
        let k = ((t - self.t_ref) / self.spacing).round() as i64;
        let base = if k >= 0 {
            let k = k as usize;
            while self.forward.len() <= k {
                let j = self.forward.len() as i64;
                let (lo, hi) = (self.node(j - 1), self.node(j));
                let seg = integrate(&mut self.integrand, lo, hi, self.tol)?;
                let last = *self.forward.last().expect("seeded");
                self.forward.push(last + seg);
            }
            self.forward[k]
        } else {
            let k = k.unsigned_abs() as usize;
            while self.backward.len() <= k {
                let j = self.backward.len() as i64;
                let (lo, hi) = (self.node(-(j - 1)), self.node(-j));
                let seg = integrate(&mut self.integrand, lo, hi, self.tol)?;
                let last = *self.backward.last().expect("seeded");
                self.backward.push(last + seg);
            }
            self.backward[k]
        };
        let start = self.node(k);
        Ok(base + integrate(&mut self.integrand, start, t, self.tol)?)
    }

    /// Direct integral from `t_ref`, bypassing the checkpoints.
    pub fn value_uncached(&mut self, t: f64) -> Result<f64, QuadError> {
        integrate(&mut self.integrand, self.t_ref, t, self.tol)
    }
}
