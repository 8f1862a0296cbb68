//! Adaptive Gauss-Kronrod bisection shared by the one- and n-dimensional
//! integrators.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::summation::compensated_sum;

// 21-point Kronrod extension of the 10-point Gauss-Legendre rule. Abscissae
// are given for the positive half; the last entry is the centre.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

pub(crate) const RULE_POINTS: usize = 21;

#[derive(Debug, Clone, Copy)]
pub(crate) struct RuleEstimate {
    pub value: f64,
    pub error: f64,
}

/// One application of the Gauss-Kronrod pair on `[a, b]`.
pub(crate) fn gauss_kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<RuleEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let fc = f(centre)?;
    let mut res_g = 0.0;
    let mut res_k = fc * WGK[10];
    let mut res_abs = res_k.abs();
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(RuleEstimate { value, error })
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    // Largest error first; ties go to the leftmost cell.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    /// Final cells, sorted left to right.
    pub cells: Vec<(f64, f64)>,
}

fn splittable(a: f64, b: f64) -> bool {
    let mid = 0.5 * (a + b);
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    a < mid && mid < b && (b - a) > 1e3 * f64::EPSILON * scale
}

/// Globally adaptive bisection: always refine the cell with the largest
/// error estimate until the summed estimate drops below `tol`.
pub(crate) fn adaptive<F>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    max_evaluations: usize,
) -> Result<Adaptive>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = best_effort(f, a, b, tol, max_evaluations)?;
    if r.error > tol {
        return Err(Error::ToleranceNotMet {
            value: r.value,
            error_estimate: r.error,
            tol,
            evaluations: r.evaluations,
        });
    }
    Ok(r)
}

/// As [`adaptive`], but returns whatever was reached when refinement stops.
pub(crate) fn best_effort<F>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    max_evaluations: usize,
) -> Result<Adaptive>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Adaptive {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            cells: vec![(a, b)],
        });
    }
    let first = gauss_kronrod(f, a, b)?;
    let mut evaluations = RULE_POINTS;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Cell> = Vec::new();
    heap.push(Cell {
        a,
        b,
        value: first.value,
        error: first.error,
    });
    let mut total_error = first.error;

    loop {
        if total_error <= tol {
            break;
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        if !splittable(worst.a, worst.b) {
            frozen.push(worst);
            continue;
        }
        if evaluations + 2 * RULE_POINTS > max_evaluations {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = gauss_kronrod(f, worst.a, mid)?;
        let right = gauss_kronrod(f, mid, worst.b)?;
        evaluations += 2 * RULE_POINTS;
        total_error += left.error + right.error - worst.error;
        heap.push(Cell {
            a: worst.a,
            b: mid,
            value: left.value,
            error: left.error,
        });
        heap.push(Cell {
            a: mid,
            b: worst.b,
            value: right.value,
            error: right.error,
        });
    }

    let mut cells: Vec<Cell> = heap.into_vec();
    cells.extend(frozen);
    cells.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = compensated_sum(cells.iter().map(|c| c.value));
    let error = compensated_sum(cells.iter().map(|c| c.error));
    Ok(Adaptive {
        value,
        error,
        evaluations,
        cells: cells.iter().map(|c| (c.a, c.b)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        // Kronrod-21 integrates degree 31 exactly.
        let r = gauss_kronrod(&mut ok(|x: f64| x.powi(30)), 0.0, 1.0).unwrap();
        assert!((r.value - 1.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_kink() {
        let r = adaptive(
            &mut ok(|x: f64| (x - 0.3).abs()),
            0.0,
            1.0,
            1e-12,
            1_000_000,
        )
        .unwrap();
        let exact = 0.5 * (0.3f64.powi(2) + 0.7f64.powi(2));
        assert!((r.value - exact).abs() < 1e-12);
        assert!(r.cells.windows(2).all(|w| w[0].1 == w[1].0));
    }

    #[test]
    fn budget_exhaustion_reports_partial_value() {
        let err = adaptive(&mut ok(|x: f64| (1.0 / x).sin()), 1e-9, 1.0, 1e-14, 2_000).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }
}
