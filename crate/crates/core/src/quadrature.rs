//! Fixed-grid and adaptive quadrature rules.
//!
//! All fixed-grid sums accumulate in ascending node order so results are
//! bit-reproducible regardless of how the node values were produced.

/// Composite Simpson weight for node `j` of a grid with `intervals` (even) steps.
#[inline]
pub fn simpson_weight(j: usize, intervals: usize) -> f64 {
    if j == 0 || j == intervals {
        1.0
    } else if j % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Composite Simpson over pre-tabulated values on a uniform grid with spacing `h`.
///
/// `values.len() - 1` must be even and at least 2.
pub fn simpson_tabulated(values: &[f64], h: f64) -> f64 {
    let intervals = values.len() - 1;
    assert!(intervals >= 2 && intervals.is_multiple_of(2), "simpson needs an even interval count");
    let mut acc = 0.0;
    for (j, v) in values.iter().enumerate() {
        acc += simpson_weight(j, intervals) * v;
    }
    acc * h / 3.0
}

/// Composite Simpson of `f` on `[a, b]` with `intervals` steps (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let intervals = even_at_least(intervals, 2);
    let h = (b - a) / intervals as f64;
    let mut acc = 0.0;
    for j in 0..=intervals {
        acc += simpson_weight(j, intervals) * f(a + j as f64 * h);
    }
    acc * h / 3.0
}

/// Trapezoid rule for a function periodic on `[a, a + period)`, with `nodes` equispaced points.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, period: f64, nodes: usize) -> f64 {
    let h = period / nodes as f64;
    let mut acc = 0.0;
    for j in 0..nodes {
        acc += f(a + j as f64 * h);
    }
    acc * h
}

/// Smallest even number `>= max(n, floor)`.
pub fn even_at_least(n: usize, floor: usize) -> usize {
    let n = n.max(floor);
    n + (n % 2)
}

/// Smallest power of two `>= n`.
pub fn pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = hl * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * hl, ((kronrod - gauss) * hl).abs())
}

/// Globally adaptive Gauss-Kronrod (7-15) integration of `f` on `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate is below `max(abs_tol, rel_tol * |I|)` or the subdivision limit is hit.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    const MAX_SEGMENTS: usize = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut segments = vec![(a, b, v, e)];
    loop {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || segments.len() >= MAX_SEGMENTS {
            // Re-sum in ascending abscissa order for reproducibility.
            segments.sort_by(|x, y| x.0.total_cmp(&y.0));
            return segments.iter().map(|s| s.2).sum();
        }
        let worst = segments.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).map(|(i, _)| i).unwrap();
        let (lo, hi, _, _) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 4);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn gauss_kronrod_handles_oscillation() {
        let v = adaptive_gk(|x| (20.0 * x).cos(), 0.0, 3.0, 1e-13, 1e-13);
        assert!((v - (60.0f64).sin() / 20.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_trapezoid_is_spectral() {
        // integral of exp(cos x) over a period is 2 pi I0(1)
        let v = periodic_trapezoid(|x| x.cos().exp(), 0.0, 2.0 * std::f64::consts::PI, 32);
        assert!((v - 2.0 * std::f64::consts::PI * 1.266_065_877_752_008_4).abs() < 1e-13);
    }

    #[test]
    fn rounding_helpers() {
        assert_eq!(even_at_least(7, 2), 8);
        assert_eq!(even_at_least(0, 2), 2);
        assert_eq!(pow2_at_least(600), 1024);
    }
}
