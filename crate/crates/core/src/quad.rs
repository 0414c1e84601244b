//! Fixed-panel Gauss–Legendre and adaptive Gauss–Kronrod quadrature.

use std::f64::consts::PI;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule over equal panels.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                let mid = lo + 0.5 * h;
                let s: f64 = self
                    .nodes
                    .iter()
                    .zip(&self.weights)
                    .map(|(x, w)| w * f(mid + 0.5 * h * x))
                    .sum();
                0.5 * h * s
            })
            .sum()
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// (value, error estimate, ∫|f|) on one panel.
fn kronrod15(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let (lo, hi) = (f(c - dx), f(c + dx));
        kronrod += WGK[j] * (lo + hi);
        abs += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (lo + hi);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs(), abs * h.abs())
}

/// Outcome of an adaptive integration, with an audit of the work done.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
}

/// Gauss–Kronrod integration over `base_panels` equal panels, each bisected
/// until its error estimate falls below its share of `tol` or reaches the
/// rounding level of the panel.
pub fn adaptive(a: f64, b: f64, base_panels: usize, tol: f64, f: impl Fn(f64) -> f64) -> Adaptive {
    adaptive_with_noise(a, b, base_panels, tol, 0.0, f)
}

/// As [`adaptive`], for integrands whose values carry relative noise
/// `noise` (e.g. trigonometric factors of large arguments); panels stop
/// bisecting once their error estimate is at that level.
pub fn adaptive_with_noise(
    a: f64,
    b: f64,
    base_panels: usize,
    tol: f64,
    noise: f64,
    f: impl Fn(f64) -> f64,
) -> Adaptive {
    let base_panels = base_panels.max(1);
    let h = (b - a) / base_panels as f64;
    let floor = 50.0 * f64::EPSILON.max(noise);
    let mut out = Adaptive {
        value: 0.0,
        error: 0.0,
        panels: 0,
        evaluations: 0,
    };
    let mut stack: Vec<(f64, f64, u32)> = Vec::new();
    for p in (0..base_panels).rev() {
        stack.push((a + p as f64 * h, a + (p + 1) as f64 * h, 0));
    }
    let total = (b - a).abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e, abs) = kronrod15(lo, hi, &f);
        out.evaluations += 15;
        let budget = (tol * (hi - lo).abs() / total).max(floor * abs);
        if e <= budget || depth >= 30 {
            out.value += v;
            out.error += e;
            out.panels += 1;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // ∫ x^14 over [-1, 1] = 2/15
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((m - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn panel_rule_integrates_oscillation() {
        let rule = PanelRule::new(10);
        let v = rule.integrate(0.0, 10.0, 40, |x| (5.0 * x).cos());
        assert!((v - (50.0f64).sin() / 5.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_a_peak() {
        let r = adaptive(-50.0, 50.0, 4, 1e-12, |x| 1.0 / (1.0 + 1e4 * x * x));
        let exact = 2.0 * (5000.0f64).atan() / 100.0;
        assert!((r.value - exact).abs() < 1e-11, "{} vs {}", r.value, exact);
        assert!(r.panels > 4);
    }

    #[test]
    fn noise_floor_stops_bisection() {
        // cos of an argument near 2400 carries ~1e-13 absolute rounding.
        let f = |p: f64| (p * 60.0).cos() / (1.0 + p * p);
        let noisy = adaptive_with_noise(1.5, 40.0, 6000, 1e-19, f64::EPSILON * 2400.0, f);
        let reference = PanelRule::new(20).integrate(1.5, 40.0, 6000, f);
        assert!(noisy.panels < 20_000, "{}", noisy.panels);
        assert!((noisy.value - reference).abs() < 1e-13);
    }
}
