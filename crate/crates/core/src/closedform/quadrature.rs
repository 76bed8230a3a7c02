//! Gauss-Legendre rules and adaptive composite integration.

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, from Newton
/// iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Rule { nodes, weights }
    }

    pub fn apply(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Bisects panels until the one-panel and two-panel estimates agree to
    /// `tol` (absolute, shared across panels), with at most `MAX_PANELS`
    /// bisections in total.
    pub fn adaptive(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        const MAX_PANELS: usize = 4096;
        let mut budget = MAX_PANELS;
        let mut total = 0.0;
        let mut stack = vec![(a, b, self.apply(f, a, b), tol)];
        while let Some((lo, hi, whole, tol)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = self.apply(f, lo, mid);
            let right = self.apply(f, mid, hi);
            if budget == 0 || (left + right - whole).abs() <= tol {
                total += left + right;
                continue;
            }
            budget -= 1;
            stack.push((mid, hi, right, 0.5 * tol));
            stack.push((lo, mid, left, 0.5 * tol));
        }
        total
    }
}
