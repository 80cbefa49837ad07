//! Gauss–Legendre rules, graded panel layouts and reproducible sums.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to the real interval [lo, hi].
    pub fn on_interval(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Nodes and (complex) weights on the straight segment from `z0` to `z1`.
    pub fn on_segment(&self, z0: Complex64, z1: Complex64) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let mid = 0.5 * (z0 + z1);
        let half = 0.5 * (z1 - z0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * *x, half * *w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        let terms: Vec<f64> = self.on_interval(lo, hi).map(|(x, w)| w * f(x)).collect();
        pairwise_sum_real(&terms)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Pairwise (cascade) summation; the association order depends only on
/// the slice length, so results are bitwise reproducible.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 8 {
        return xs.iter().fold(Complex64::new(0.0, 0.0), |acc, x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_real(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_real(&xs[..mid]) + pairwise_sum_real(&xs[mid..])
}

/// How many panels to lay down on an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanelBudget {
    /// Exactly this many panels, refined greedily where the local length
    /// scale is smallest.
    Count(usize),
    /// Split until every panel is no longer than its local length scale.
    Resolution,
}

#[derive(PartialEq)]
struct Candidate {
    badness: f64,
    lo: f64,
    hi: f64,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.badness
            .total_cmp(&other.badness)
            // Ties go to the leftmost panel.
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// Splits `[0, length]` into panels whose size follows `local_scale`,
/// evaluated at panel midpoints. Returned panels are sorted.
pub fn graded_panels<F>(length: f64, budget: PanelBudget, local_scale: F) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let min_len = length * 1e-12;
    let badness = |lo: f64, hi: f64| {
        let s = local_scale(0.5 * (lo + hi)).max(min_len);
        (hi - lo) / s
    };
    let mut heap = BinaryHeap::new();
    heap.push(Candidate { badness: badness(0.0, length), lo: 0.0, hi: length });
    let mut done = Vec::new();
    loop {
        let stop = match budget {
            PanelBudget::Count(n) => heap.len() + done.len() >= n.max(1),
            PanelBudget::Resolution => heap.is_empty(),
        };
        if stop {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let resolved = worst.badness <= 1.0 || worst.hi - worst.lo <= 2.0 * min_len;
        if matches!(budget, PanelBudget::Resolution) && resolved {
            done.push((worst.lo, worst.hi));
            continue;
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        heap.push(Candidate { badness: badness(worst.lo, mid), lo: worst.lo, hi: mid });
        heap.push(Candidate { badness: badness(mid, worst.hi), lo: mid, hi: worst.hi });
    }
    done.extend(heap.into_iter().map(|c| (c.lo, c.hi)));
    done.sort_by(|x, y| x.0.total_cmp(&y.0));
    done
}
