//! Gauss–Kronrod quadrature.
//!
//! The 15-point Kronrod rule with its embedded 7-point Gauss rule is used both
//! as a fixed high-order rule on short intervals and as the building block of
//! a globally adaptive bisection scheme.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, StefanError};

/// Kronrod abscissae on [-1, 1], positive half (the last entry is the centre).
pub(crate) const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

/// Kronrod weights matching `XGK`.
pub(crate) const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (XGK[1], XGK[3], XGK[5], centre).
pub(crate) const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

/// Kronrod value and the |K15 - G7| error estimate on one interval.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// The 15 Kronrod nodes mapped onto [a, b], ordered left to right.
pub(crate) fn kronrod_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 15];
    for j in 0..7 {
        out[j] = c - h * XGK[j];
        out[14 - j] = c + h * XGK[j];
    }
    out[7] = c;
    out
}

/// Combine integrand values at `kronrod_nodes(a, b)` into a K15/G7 estimate.
pub(crate) fn combine(a: f64, b: f64, fx: &[f64; 15]) -> Estimate {
    let h = 0.5 * (b - a);
    let mut k = WGK[7] * fx[7];
    let mut g = WG[3] * fx[7];
    for j in 0..7 {
        let pair = fx[j] + fx[14 - j];
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    Estimate {
        value: k * h,
        error: ((k - g) * h).abs(),
    }
}

/// Single application of the 15-point Kronrod rule.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let nodes = kronrod_nodes(a, b);
    let mut fx = [0.0; 15];
    for (v, &x) in fx.iter_mut().zip(nodes.iter()) {
        *v = f(x);
    }
    combine(a, b, &fx)
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b] to absolute tolerance `tol`.
///
/// Globally adaptive: the interval with the largest error estimate is bisected
/// until the summed estimate meets `tol`. The result is summed left to right so
/// it does not depend on the refinement order.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let first = gk15(&mut f, a, b);
    check_finite(&first, a, b, tol)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        lo: a,
        hi: b,
        est: first,
    });
    let mut error = first.error;
    loop {
        let value: f64 = heap.iter().map(|p| p.est.value).sum();
        let floor = 50.0 * f64::EPSILON * value.abs();
        if error <= tol.max(floor) {
            let mut pieces = heap.into_vec();
            pieces.sort_by(|x, y| x.lo.total_cmp(&y.lo));
            return Ok(pieces.iter().map(|p| p.est.value).sum());
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(StefanError::Quadrature {
                lo: a,
                hi: b,
                tol,
                estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) {
            return Err(StefanError::Quadrature {
                lo: worst.lo,
                hi: worst.hi,
                tol,
                estimate: error,
            });
        }
        let left = gk15(&mut f, worst.lo, mid);
        let right = gk15(&mut f, mid, worst.hi);
        check_finite(&left, worst.lo, mid, tol)?;
        check_finite(&right, mid, worst.hi, tol)?;
        error += left.error + right.error - worst.est.error;
        heap.push(Piece {
            lo: worst.lo,
            hi: mid,
            est: left,
        });
        heap.push(Piece {
            lo: mid,
            hi: worst.hi,
            est: right,
        });
    }
}

fn check_finite(est: &Estimate, lo: f64, hi: f64, tol: f64) -> Result<()> {
    if est.value.is_finite() && est.error.is_finite() {
        Ok(())
    } else {
        Err(StefanError::Quadrature {
            lo,
            hi,
            tol,
            estimate: f64::NAN,
        })
    }
}

struct Piece {
    lo: f64,
    hi: f64,
    est: Estimate,
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
        self.est
            .error
            .total_cmp(&other.est.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}
