//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's matching algebra except where a test explicitly compares
//! against it.
#![allow(dead_code)]

use num_complex::Complex64;
use shellres::jost::match_coeffs;
use shellres::{PotentialSpec, WaveNumber};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// RK4 for `y'' = (scale·V(r) − q²) y` from `r0` to `r1`, splitting at the
/// shell edges so every step sees a constant potential.
pub fn rk4(q: Complex64, pot: &PotentialSpec, r0: f64, r1: f64, y0: (Complex64, Complex64), h: f64) -> (Complex64, Complex64) {
    let mut cuts = vec![r0];
    for edge in [pot.a, pot.b] {
        if (edge - r0) * (edge - r1) < 0.0 {
            cuts.push(edge);
        }
    }
    cuts.sort_by(|x, y| (x - r0).abs().total_cmp(&(y - r0).abs()));
    cuts.push(r1);
    let (mut y, mut dy) = y0;
    for w in cuts.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let mid = 0.5 * (s0 + s1);
        let coef = pot.scale * pot.potential_at(mid) - q * q;
        let n = ((s1 - s0).abs() / h).ceil().max(1.0) as usize;
        let step = (s1 - s0) / n as f64;
        for _ in 0..n {
            let f = |y: Complex64| coef * y;
            let k1 = (dy, f(y));
            let k2 = (dy + 0.5 * step * k1.1, f(y + 0.5 * step * k1.0));
            let k3 = (dy + 0.5 * step * k2.1, f(y + 0.5 * step * k2.0));
            let k4 = (dy + step * k3.1, f(y + step * k3.0));
            y += step / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            dy += step / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
    }
    (y, dy)
}

/// Regular solution `χ(0) = 0, χ'(0) = q` integrated out to `r`.
pub fn ode_regular(q: Complex64, pot: &PotentialSpec, r: f64) -> (Complex64, Complex64) {
    rk4(q, pot, 0.0, r, (c(0.0, 0.0), q), 2e-4)
}

/// Jost functions `(J₊, J₋)` read off the outer-region amplitudes of the
/// integrated regular solution.
pub fn ode_jost(q: Complex64, pot: &PotentialSpec) -> (Complex64, Complex64) {
    let r = pot.b + 0.5;
    let (y, dy) = ode_regular(q, pot, r);
    let outgoing = 0.5 * (y + dy / (I * q)) * (-I * q * r).exp();
    let incoming = 0.5 * (y - dy / (I * q)) * (I * q * r).exp();
    (-2.0 * I * incoming, 2.0 * I * outgoing)
}

/// `f₊` integrated inward from `e^{iqr}` beyond the shell.
pub fn ode_outgoing(q: Complex64, pot: &PotentialSpec, r: f64) -> (Complex64, Complex64) {
    let start = pot.b + 0.5;
    let e = (I * q * start).exp();
    rk4(q, pot, start, r, (e, I * q * e), 2e-4)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Composite Gauss–Legendre of order 20 over `[lo, hi]` with breakpoints,
/// panels no wider than `panel`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, lo: f64, hi: f64, breaks: &[f64], panel: f64) -> Complex64 {
    let (x, w) = gauss_legendre(20);
    let mut cuts: Vec<f64> = vec![lo, hi];
    cuts.extend(breaks.iter().copied().filter(|&t| t > lo && t < hi));
    cuts.sort_by(f64::total_cmp);
    let mut total = c(0.0, 0.0);
    for seg in cuts.windows(2) {
        let m = ((seg[1] - seg[0]) / panel).ceil().max(1.0) as usize;
        let h = (seg[1] - seg[0]) / m as f64;
        for p in 0..m {
            let mid = seg[0] + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                total += 0.5 * h * wi * f(mid + 0.5 * h * xi);
            }
        }
    }
    total
}

fn jplus_norm(q: Complex64, pot: &PotentialSpec) -> f64 {
    match_coeffs(WaveNumber(q), pot).map(|m| m.jplus.norm()).unwrap_or(f64::INFINITY)
}

/// Zeros of `J₊` in a rectangle found by a brute-force `n × n` scan of
/// `|J₊|` for local minima, each polished by repeated zooming.
pub fn scan_jplus_zeros(re: (f64, f64), im: (f64, f64), n: usize, pot: &PotentialSpec) -> Vec<Complex64> {
    let dx = (re.1 - re.0) / (n - 1) as f64;
    let dy = (im.1 - im.0) / (n - 1) as f64;
    let grid: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| jplus_norm(c(re.0 + i as f64 * dx, im.0 + j as f64 * dy), pot)).collect())
        .collect();
    let mut zeros: Vec<Complex64> = Vec::new();
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let v = grid[i][j];
            let is_min = (-1i64..=1).all(|a| {
                (-1i64..=1).all(|b| (a == 0 && b == 0) || v <= grid[(i as i64 + a) as usize][(j as i64 + b) as usize])
            });
            if !is_min {
                continue;
            }
            let mut centre = c(re.0 + i as f64 * dx, im.0 + j as f64 * dy);
            let (mut hx, mut hy) = (dx, dy);
            while hx > 1e-14 {
                let mut best = (jplus_norm(centre, pot), centre);
                for a in -10..=10 {
                    for b in -10..=10 {
                        let z = centre + c(a as f64 * hx / 10.0, b as f64 * hy / 10.0);
                        let v = jplus_norm(z, pot);
                        if v < best.0 {
                            best = (v, z);
                        }
                    }
                }
                centre = best.1;
                hx /= 4.0;
                hy /= 4.0;
            }
            let scale = match_coeffs(WaveNumber(centre), pot).map(|m| m.jminus.norm()).unwrap_or(1.0).max(1.0);
            if jplus_norm(centre, pot) < 1e-8 * scale && !zeros.iter().any(|z| (z - centre).norm() < 1e-6) {
                zeros.push(centre);
            }
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re));
    zeros
}

/// Residue of `f` at `centre` from the trapezoid rule on a circle, which is
/// spectrally accurate for a periodic integrand.
pub fn circle_residue<F: Fn(Complex64) -> Complex64>(f: F, centre: Complex64, radius: f64, nodes: usize) -> Complex64 {
    let mut sum = c(0.0, 0.0);
    for j in 0..nodes {
        let e = (I * (2.0 * std::f64::consts::PI * j as f64 / nodes as f64)).exp();
        sum += f(centre + radius * e) * radius * e;
    }
    sum / nodes as f64
}

/// `√(2/π)∫₀^{r_max} sin(kr) φ(r) dr` by composite Simpson.
pub fn sine_transform<F: Fn(f64) -> f64>(phi: F, k: f64, r_max: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = r_max / n as f64;
    let mut s = 0.0;
    for j in 0..=n {
        let r = j as f64 * h;
        let w = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s += w * (k * r).sin() * phi(r);
    }
    (2.0 / std::f64::consts::PI).sqrt() * s * h / 3.0
}

/// Sixth-order central second derivative.
pub fn second_derivative<F: Fn(f64) -> Complex64>(f: F, r: f64, h: f64) -> Complex64 {
    let c0 = -49.0 / 18.0;
    let c1 = 3.0 / 2.0;
    let c2 = -3.0 / 20.0;
    let c3 = 1.0 / 90.0;
    (c0 * f(r) + c1 * (f(r + h) + f(r - h)) + c2 * (f(r + 2.0 * h) + f(r - 2.0 * h)) + c3 * (f(r + 3.0 * h) + f(r - 3.0 * h)))
        / (h * h)
}

/// Discrete L² norm on a uniform-enough grid by the trapezoid rule.
pub fn l2(r: &[f64], v: &[Complex64]) -> f64 {
    let mut s = 0.0;
    for j in 1..r.len() {
        s += 0.5 * (r[j] - r[j - 1]) * (v[j].norm_sqr() + v[j - 1].norm_sqr());
    }
    s.sqrt()
}
