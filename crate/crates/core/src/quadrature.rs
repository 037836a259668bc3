//! Gauss-Legendre rules, composite panels and Chebyshev interpolation.

use num_complex::Complex64 as C64;

/// Gauss-Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1);
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_m.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }
}

/// `(P_m(x), P_m′(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of `panels` equal Gauss-Legendre panels on `[a, b]`.
pub fn composite_nodes(rule: &GaussLegendre, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + h * p as f64;
            rule.mapped(lo, lo + h).collect::<Vec<_>>()
        })
        .collect()
}

pub fn composite(f: &impl Fn(f64) -> C64, rule: &GaussLegendre, a: f64, b: f64, panels: usize) -> C64 {
    composite_nodes(rule, a, b, panels).into_iter().map(|(x, w)| f(x) * w).sum()
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: C64,
    /// Absolute change over the last panel doubling.
    pub error: f64,
    pub converged: bool,
}

/// Composite Gauss-Legendre with panel doubling until two successive
/// values agree to `rel` (or to `abs_floor` absolutely).
pub fn adaptive(
    f: &impl Fn(f64) -> C64,
    a: f64,
    b: f64,
    rel: f64,
    abs_floor: f64,
    max_panels: usize,
) -> Estimate {
    let rule = GaussLegendre::new(20);
    let mut panels = 2;
    let mut prev = composite(f, &rule, a, b, panels);
    loop {
        panels *= 2;
        let next = composite(f, &rule, a, b, panels);
        let err = (next - prev).norm();
        if err <= rel * next.norm() || err <= abs_floor {
            return Estimate { value: next, error: err, converged: true };
        }
        if panels >= max_panels {
            return Estimate { value: next, error: err, converged: false };
        }
        prev = next;
    }
}

/// Chebyshev interpolant of a real function on `[a, b]` (second-kind
/// points, barycentric evaluation).
#[derive(Clone, Debug)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl Chebyshev {
    pub fn new(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(m >= 2 && b > a);
        let nodes: Vec<f64> = (0..m)
            .map(|j| {
                let c = (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * c
            })
            .collect();
        let values = nodes.iter().map(|x| f(*x)).collect();
        Self { a, b, nodes, values }
    }

    pub fn from_values(a: f64, b: f64, values: Vec<f64>) -> Self {
        let m = values.len();
        let nodes = Self::points(a, b, m);
        Self { a, b, nodes, values }
    }

    pub fn points(a: f64, b: f64, m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| {
                let c = (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * c
            })
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.a, self.b);
        let m = self.nodes.len();
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..m {
            let d = x - self.nodes[j];
            if d == 0.0 {
                return self.values[j];
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == m - 1 {
                w *= 0.5;
            }
            num += w * self.values[j] / d;
            den += w / d;
        }
        num / den
    }
}
