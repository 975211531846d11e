//! Scalar hydrodynamic reduction `∂_s q = c(q) ∂_{t_0} q` solved along
//! straight characteristics, with the speeds `c_k(q) = 2 Re φ_k(η(q))` of a
//! Löwner family.

use alloc::vec::Vec;

use thiserror::Error;

use crate::laurent::LaurentError;
use crate::loewner::{fitted_map, LoewnerError, LoewnerFamily};

pub const NEWTON_TOL: f64 = 1e-12;
pub const NEWTON_MAX_ITER: usize = 50;
pub const COMPRESSION_FLOOR: f64 = 1e-9;
/// Truncation order and sample count of the map fit used for `k ≥ 2`.
const FIT_ORDER: usize = 16;
const FIT_SAMPLES: usize = 64;
const FIT_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HydroError {
    #[error("profile needs at least two nodes")]
    TooShort,
    #[error("profile grid must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("profile has non-finite entries")]
    NonFinite,
    #[error("profile grid and values differ in length ({grid} vs {values})")]
    LengthMismatch { grid: usize, values: usize },
    #[error("flow index k must be >= 1")]
    ZeroIndex,
    #[error("transport time must be finite and non-negative, got {0}")]
    InvalidTime(f64),
    #[error("characteristics cross: gradient catastrophe at s* = {s_star}")]
    Shock { s_star: f64 },
    #[error("implicit solve failed at t0 = {t0}")]
    SolveFailed { t0: f64 },
    #[error(transparent)]
    Loewner(#[from] LoewnerError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// `q_0(t_0)` on a grid with monotone cubic (PCHIP) interpolation and linear
/// extrapolation beyond the end nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return alloc::vec![d[0], d[0]];
    }
    let mut m = alloc::vec![0.0; n];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m[0] = end_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

impl Profile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, HydroError> {
        if grid.len() != values.len() {
            return Err(HydroError::LengthMismatch {
                grid: grid.len(),
                values: values.len(),
            });
        }
        if grid.len() < 2 {
            return Err(HydroError::TooShort);
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(HydroError::NonFinite);
        }
        if let Some(i) = grid.windows(2).position(|p| p[1] <= p[0]) {
            return Err(HydroError::NotIncreasing(i + 1));
        }
        let slopes = pchip_slopes(&grid, &values);
        Ok(Profile { grid, values, slopes })
    }

    /// Samples `f` on `grid`.
    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self, HydroError> {
        let values = grid.iter().map(|t| f(*t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value and derivative at `t`.
    pub fn eval_with_slope(&self, t: f64) -> (f64, f64) {
        let n = self.grid.len();
        if t <= self.grid[0] {
            return (self.values[0] + self.slopes[0] * (t - self.grid[0]), self.slopes[0]);
        }
        if t >= self.grid[n - 1] {
            return (
                self.values[n - 1] + self.slopes[n - 1] * (t - self.grid[n - 1]),
                self.slopes[n - 1],
            );
        }
        let i = self.grid.partition_point(|x| *x <= t) - 1;
        let h = self.grid[i + 1] - self.grid[i];
        let u = (t - self.grid[i]) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let value =
            (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * m1;
        let slope = ((6.0 * u2 - 6.0 * u) * y0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * y1
            + (3.0 * u2 - 2.0 * u) * m1)
            / h;
        (value, slope)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_slope(t).0
    }

    /// Interpolated slope at grid node `i`.
    pub fn node_slope(&self, i: usize) -> f64 {
        self.slopes[i]
    }
}

/// Five-point derivative of a speed function.
fn speed_derivative(speed: &dyn Fn(f64) -> f64, q: f64) -> f64 {
    let h = 1e-4 * q.abs().max(1.0);
    (speed(q - 2.0 * h) - 8.0 * speed(q - h) + 8.0 * speed(q + h) - speed(q + 2.0 * h)) / (12.0 * h)
}

/// `c_k(q) = 2 Re φ_k(η(q))`. For `k = 1` this is `2 e^q cos θ(q)`; for
/// `k ≥ 2` the map `z(·, q)` is fitted on `|w| = 2` first.
pub fn characteristic_speed(k: usize, family: &LoewnerFamily, q: f64) -> Result<f64, HydroError> {
    if k == 0 {
        return Err(HydroError::ZeroIndex);
    }
    let theta = family.driving().theta(q);
    if k == 1 {
        return Ok(2.0 * q.exp() * theta.cos());
    }
    let map = fitted_map(family, q, FIT_ORDER.max(k + 1), FIT_SAMPLES, FIT_RADIUS)?;
    let ak = map.ak_projection(k)?;
    Ok(2.0 * ak.phi(family.driving().eta(q)).re)
}

/// `s* = 1 / max_i d/dt_0 [c(q_0(t_0))]` over the grid nodes, or `+∞` when
/// no node compresses. Compression rates below [`COMPRESSION_FLOOR`] are
/// numerical noise of the differentiated speed and count as zero.
pub fn shock_time(initial: &Profile, speed: &dyn Fn(f64) -> f64) -> f64 {
    let worst = initial
        .values
        .iter()
        .enumerate()
        .map(|(i, q)| speed_derivative(speed, *q) * initial.node_slope(i))
        .fold(0.0, f64::max);
    if worst > COMPRESSION_FLOOR {
        1.0 / worst
    } else {
        f64::INFINITY
    }
}

/// Solves `q = q_0(t_0 + c(q) s)` by Newton iteration with a bisection
/// fallback, assuming `1 − c'(q) q_0' s > 0` (checked by the caller).
fn solve_node(initial: &Profile, speed: &dyn Fn(f64) -> f64, t0: f64, s: f64) -> Option<f64> {
    let residual = |q: f64| q - initial.eval(t0 + speed(q) * s);
    let mut q = initial.eval(t0);
    for _ in 0..NEWTON_MAX_ITER {
        let (p, dp) = initial.eval_with_slope(t0 + speed(q) * s);
        let f = q - p;
        let df = 1.0 - dp * speed_derivative(speed, q) * s;
        if !(df.is_finite() && df != 0.0) {
            break;
        }
        let dq = f / df;
        q -= dq;
        if !q.is_finite() {
            break;
        }
        if dq.abs() <= NEWTON_TOL * q.abs().max(1.0) && residual(q).abs() <= NEWTON_TOL * q.abs().max(1.0) {
            return Some(q);
        }
    }
    // residual is increasing in q before the shock; expand a bracket and bisect
    let start = initial.eval(t0);
    let mut width = 1e-3 * start.abs().max(1.0);
    let (mut lo, mut hi) = (start - width, start + width);
    let mut expansions = 0;
    while !(residual(lo) <= 0.0 && residual(hi) >= 0.0) {
        width *= 2.0;
        lo = start - width;
        hi = start + width;
        expansions += 1;
        if expansions > 80 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= NEWTON_TOL * mid.abs().max(1.0) {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Transports `initial` to time `s`: `q(t_0, s) = q_0(t_0 + c(q) s)` at every grid node.
pub fn solve_characteristics(initial: &Profile, speed: &dyn Fn(f64) -> f64, s: f64) -> Result<Profile, HydroError> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(HydroError::InvalidTime(s));
    }
    if s == 0.0 {
        return Ok(initial.clone());
    }
    let s_star = shock_time(initial, speed);
    if s >= s_star {
        return Err(HydroError::Shock { s_star });
    }
    let mut values = Vec::with_capacity(initial.grid.len());
    for t0 in &initial.grid {
        let q = solve_node(initial, speed, *t0, s).ok_or(HydroError::SolveFailed { t0: *t0 })?;
        let (_, dp) = initial.eval_with_slope(t0 + speed(q) * s);
        if 1.0 - speed_derivative(speed, q) * dp * s <= 0.0 {
            return Err(HydroError::Shock { s_star });
        }
        values.push(q);
    }
    Profile::new(initial.grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::DrivingFunction;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn pchip_reproduces_lines_and_keeps_monotonicity() {
        let p = Profile::from_fn(linspace(-1.0, 1.0, 9), |t| 3.0 * t - 1.0).unwrap();
        for t in [-1.3, -0.77, 0.1, 0.99, 1.5] {
            assert_relative_eq!(p.eval(t), 3.0 * t - 1.0, epsilon = 1e-13);
        }
        let step = Profile::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let samples: Vec<f64> = linspace(0.0, 3.0, 61).iter().map(|t| step.eval(*t)).collect();
        assert!(samples.windows(2).all(|p| p[1] >= p[0] - 1e-15));
        assert!(samples.iter().all(|v| (-1e-15..=1.0 + 1e-15).contains(v)));
    }

    #[test]
    fn profile_validation() {
        assert!(matches!(Profile::new(vec![0.0], vec![1.0]), Err(HydroError::TooShort)));
        assert!(matches!(
            Profile::new(vec![0.0, 0.0], vec![1.0, 2.0]),
            Err(HydroError::NotIncreasing(1))
        ));
        assert!(Profile::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Profile::new(vec![0.0, 1.0], vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn constant_speed_translates() {
        let p = Profile::from_fn(linspace(-2.0, 2.0, 81), |t| t.sin()).unwrap();
        let out = solve_characteristics(&p, &|_| 0.7, 0.5).unwrap();
        for (t, q) in out.grid().iter().zip(out.values()) {
            assert!((q - p.eval(t + 0.35)).abs() < 1e-12);
        }
        assert_eq!(shock_time(&p, &|_| 0.7), f64::INFINITY);
    }

    #[test]
    fn zero_time_is_identity() {
        let p = Profile::from_fn(linspace(0.0, 1.0, 5), |t| t * t).unwrap();
        assert_eq!(solve_characteristics(&p, &|q| q, 0.0).unwrap(), p);
    }

    #[test]
    fn burgers_linear_profile() {
        let p = Profile::from_fn(linspace(-2.0, 2.0, 41), |t| t).unwrap();
        assert_relative_eq!(shock_time(&p, &|q| q), 1.0, epsilon = 1e-9);
        let out = solve_characteristics(&p, &|q| q, 0.5).unwrap();
        for (t, q) in out.grid().iter().zip(out.values()) {
            assert_relative_eq!(*q, t / 0.5, epsilon = 1e-11);
        }
        assert!(matches!(
            solve_characteristics(&p, &|q| q, 1.2),
            Err(HydroError::Shock { s_star }) if (s_star - 1.0).abs() < 1e-9
        ));
    }

    #[test]
    fn sine_profile_shock_time() {
        let p = Profile::from_fn(linspace(-4.0, 4.0, 801), |t| t.sin()).unwrap();
        assert_relative_eq!(shock_time(&p, &|q| q), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn decreasing_profile_never_shocks_forward() {
        let p = Profile::from_fn(linspace(-1.0, 1.0, 11), |t| -t).unwrap();
        assert_eq!(shock_time(&p, &|q| q), f64::INFINITY);
        let out = solve_characteristics(&p, &|q| q, 3.0).unwrap();
        for (t, q) in out.grid().iter().zip(out.values()) {
            assert_relative_eq!(*q, -t / 4.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn first_speed_is_closed_form() {
        let fam = LoewnerFamily::new(
            0.0,
            1.0,
            DrivingFunction::constant(core::f64::consts::FRAC_PI_2).unwrap(),
        )
        .unwrap();
        assert!(characteristic_speed(1, &fam, 0.4).unwrap().abs() < 1e-15);
        let fam = LoewnerFamily::new(0.0, 1.0, DrivingFunction::constant(0.3).unwrap()).unwrap();
        assert_relative_eq!(
            characteristic_speed(1, &fam, 0.4).unwrap(),
            2.0 * 0.4f64.exp() * 0.3f64.cos(),
            epsilon = 1e-15
        );
        assert!(matches!(characteristic_speed(0, &fam, 0.4), Err(HydroError::ZeroIndex)));
    }

    #[test]
    fn second_speed_at_initial_time() {
        // z = r_0 w at q_0 gives φ_2(η) = 2 r_0² η²
        let fam = LoewnerFamily::new(0.0, 1.0, DrivingFunction::constant(0.3).unwrap()).unwrap();
        assert_relative_eq!(
            characteristic_speed(2, &fam, 0.0).unwrap(),
            2.0 * 2.0 * 0.6f64.cos(),
            epsilon = 1e-10
        );
    }
}
