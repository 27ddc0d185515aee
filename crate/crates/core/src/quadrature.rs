//! Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    /// Target: estimated error ≤ tol · max(1, |I|).
    pub tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { tol: 1e-9, max_intervals: 1 << 16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuadError<E> {
    /// The integrand reported a problem at some node.
    Integrand(E),
    NoConvergence { value: f64, error: f64, intervals: usize },
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F, E>(f: &mut F, a: f64, b: f64) -> Result<Piece, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    Ok(Piece { a, b, value, error })
}

/// `∫_a^b f`, bisecting the interval with the largest error estimate until
/// the total estimate meets the tolerance.
pub fn integrate<F, E>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult, QuadError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut heap = BinaryHeap::new();
    let first = gk15(&mut f, a, b).map_err(QuadError::Integrand)?;
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    loop {
        if error <= opts.tol * value.abs().max(1.0) {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(QuadError::NoConvergence { value, error, intervals: heap.len() });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(QuadError::NoConvergence { value, error, intervals: heap.len() + 1 });
        }
        let left = gk15(&mut f, worst.a, mid).map_err(QuadError::Integrand)?;
        let right = gk15(&mut f, mid, worst.b).map_err(QuadError::Integrand)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum in interval order so the result does not depend on the
    // running-update rounding
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let intervals = pieces.len();
    let value = pieces.iter().map(|p| p.value).sum();
    let error = pieces.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, intervals })
}
