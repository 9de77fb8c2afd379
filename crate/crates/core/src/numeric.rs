//! Small numerical kernels shared across modules: compensated summation,
//! least-squares lines, polynomial extrapolation, Gauss-Legendre nodes and
//! Euler-Maclaurin power sums.

use std::f64::consts::PI;
use std::ops::AddAssign;

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier-compensated accumulator. Summation order is the caller's, so
/// results are deterministic for a fixed iteration order.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

impl LineFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit(format!(
            "line fit needs matching samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / n;
    let my = compensated_sum(ys.iter().copied()) / n;
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    if !(sxx > (scale * 1e-12).powi(2) * n) {
        return Err(Error::Fit("abscissae are degenerate".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (compensated_sum(
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2)),
    ) / n)
        .sqrt();
    Ok(LineFit {
        intercept,
        slope,
        rms,
    })
}

/// Neville evaluation at `x0` of the interpolating polynomial through the
/// points. Returns the value of the full-degree polynomial and the one of
/// degree one lower (built from the last `len - 1` points), whose difference
/// serves as an error indicator.
pub fn neville(xs: &[f64], ys: &[f64], x0: f64) -> Result<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::Fit("neville needs at least two points".into()));
    }
    let mut p = ys.to_vec();
    let mut lower = p[n - 1];
    for level in 1..n {
        for i in 0..n - level {
            let dx = xs[i] - xs[i + level];
            if dx == 0.0 {
                return Err(Error::Fit("coincident abscissae".into()));
            }
            p[i] = ((x0 - xs[i + level]) * p[i] - (x0 - xs[i]) * p[i + 1]) / dx;
        }
        if level == n - 2 {
            lower = p[1];
        }
    }
    Ok((p[0], lower))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "need at least one node");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
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
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

const EM_BASE: u64 = 64;

/// Partial sums `S(N) = sum_{n<=N} n^{-alpha}` for `alpha > 0`, exact
/// to rounding for small `N` and via Euler-Maclaurin beyond.
#[derive(Clone, Debug)]
pub struct PowerSum {
    alpha: f64,
    /// Constant term of the asymptotic expansion: zeta(alpha), or Euler's
    /// gamma when alpha = 1.
    constant: f64,
    /// Direct partial sums S(0..=EM_BASE).
    head: Vec<f64>,
}

impl PowerSum {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0, "alpha must be positive");
        let mut head = Vec::with_capacity(EM_BASE as usize + 1);
        head.push(0.0);
        let mut acc = NeumaierSum::new();
        for n in 1..=EM_BASE {
            acc.add(power_term(n as f64, alpha));
            head.push(acc.value());
        }
        let mut s = Self {
            alpha,
            constant: 0.0,
            head,
        };
        let base = EM_BASE as f64;
        s.constant = s.head[EM_BASE as usize] - s.integral(base) - s.corrections(base);
        s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn integral(&self, x: f64) -> f64 {
        if self.alpha == 1.0 {
            x.ln()
        } else {
            x.powf(1.0 - self.alpha) / (1.0 - self.alpha)
        }
    }

    fn corrections(&self, x: f64) -> f64 {
        let a = self.alpha;
        let f = x.powf(-a);
        let d1 = -a * x.powf(-a - 1.0);
        let d3 = -a * (a + 1.0) * (a + 2.0) * x.powf(-a - 3.0);
        let d5 = -a * (a + 1.0) * (a + 2.0) * (a + 3.0) * (a + 4.0) * x.powf(-a - 5.0);
        f / 2.0 + d1 / 12.0 - d3 / 720.0 + d5 / 30240.0
    }

    /// `S(n)` for an integer `n`.
    pub fn at(&self, n: u64) -> f64 {
        if n <= EM_BASE {
            return self.head[n as usize];
        }
        let x = n as f64;
        self.constant + self.integral(x) + self.corrections(x)
    }

    /// `S(e^u)` for `u` so large that the correction terms vanish.
    pub fn at_log(&self, u: f64) -> f64 {
        if self.alpha == 1.0 {
            self.constant + u
        } else {
            self.constant + ((1.0 - self.alpha) * u).exp() / (1.0 - self.alpha)
        }
    }
}

pub(crate) fn power_term(n: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        1.0 / n
    } else {
        n.powf(-alpha)
    }
}

/// `ln(1 + e^u)` without overflow.
pub fn ln_one_plus_exp(u: f64) -> f64 {
    if u > 35.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// Volume of the unit ball in R^n, which equals `Omega_{n-1} / n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    let h = n as f64 / 2.0;
    PI.powf(h) / statrs::function::gamma::gamma(h + 1.0)
}

/// Area of the unit sphere `S^{n-1}` in R^n.
pub fn sphere_area(n: u32) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / statrs::function::gamma::gamma(h)
}

/// Renders `e^{log_t}` in scientific notation, also beyond the f64 range.
pub fn format_exp(log_t: f64) -> String {
    let log10 = log_t / std::f64::consts::LN_10;
    if log10.abs() < 300.0 {
        return format!("{:.16e}", log_t.exp());
    }
    let exponent = log10.floor();
    let mantissa = format!("{:.16e}", 10f64.powf(log10 - exponent));
    let (digits, exp) = mantissa.split_once('e').expect("scientific format");
    let exp: i64 = exp.parse().expect("integer exponent");
    format!("{digits}e{}", exp + exponent as i64)
}
