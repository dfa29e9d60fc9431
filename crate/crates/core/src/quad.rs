//! Adaptive Gauss–Kronrod (7/15) quadrature.

use alloc::vec::Vec;
use num_complex::Complex64;

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

/// One G7K15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Result of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Integrates `f` over each consecutive pair of `breaks`, bisecting panels
/// until the Kronrod–Gauss difference is below `abs_tol + rel_tol·|I|`.
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Quadrature {
    let mut work: Vec<(f64, f64, Complex64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = panel(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: Complex64 = work.iter().map(|p| p.2).sum();
        let err: f64 = work.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || work.len() >= max_panels {
            return Quadrature { value: total, error: err, panels: work.len() };
        }
        let (idx, _) = work.iter().enumerate().fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (a, b, _, _) = work.swap_remove(idx);
        let m = 0.5 * (a + b);
        let (v1, e1) = panel(&f, a, m);
        let (v2, e2) = panel(&f, m, b);
        work.push((a, m, v1, e1));
        work.push((m, b, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| Complex64::new(x * x * x, 0.0), &[0.0, 2.0], 1e-14, 0.0, 10);
        assert!((q.value.re - 4.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory() {
        let w = 50.0;
        let f = |x: f64| Complex64::new(libm::cos(w * x), libm::sin(w * x));
        let breaks: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0 * 3.0).collect();
        let q = integrate(f, &breaks, 1e-13, 0.0, 1000);
        let exact = (Complex64::new(0.0, w * 3.0).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((q.value - exact).norm() < 1e-12);
    }
}
