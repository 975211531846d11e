//! Truncated Laurent maps `z(w) = r w + a_0 + a_1/w + … + a_M/w^M` and the
//! boundary machinery used by the flows: sampling on the unit circle, the
//! `(·)₊` projection of powers, analytic extension of real boundary data, and
//! the finite-difference Poisson bracket.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::fourier;
use crate::C64;

/// Smallest `|z'|` on the circle still considered a smooth (non-cusped) contour.
pub const CUSP_THRESHOLD: f64 = 1e-8;

/// Largest grid a series product may use before it is refused.
pub const SERIES_BUDGET: usize = 1 << 16;

const NEWTON_MAX_ITER: usize = 60;
const NEWTON_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LaurentError {
    #[error("leading coefficient must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("map coefficients must be finite")]
    NonFinite,
    #[error("cannot evaluate the map at w = 0")]
    ZeroArgument,
    #[error("grid size {0} is not a power of two >= 4")]
    InvalidGrid(usize),
    #[error("grid of {n} nodes is too coarse for order {order} (need >= {need})")]
    GridTooCoarse { n: usize, order: usize, need: usize },
    #[error("sample count {found} does not match grid size {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error("A_0 = log w is not a polynomial; callers handle it")]
    LogGenerator,
    #[error("z^{k} of an order-{order} map needs {needed} modes, budget is {budget}")]
    SeriesBudget {
        k: usize,
        order: usize,
        needed: usize,
        budget: usize,
    },
    #[error("boundary data is not real (max |Im| = {max_imag:e})")]
    NonReal { max_imag: f64 },
    #[error("finite-difference step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("Newton inversion at z = {z} did not converge (residual {residual:e})")]
    InversionFailed { z: C64, residual: f64 },
    #[error("z = {z} lies inside the contour (|w| = {w_abs})")]
    InsideContour { z: C64, w_abs: f64 },
    #[error("contour has a cusp at theta = {theta} (|z'| = {derivative:e})")]
    Cusp { theta: f64, derivative: f64 },
    #[error("contour self-intersects between segments {0} and {1}")]
    SelfIntersection(usize, usize),
}

/// Uniform grid `θ_j = 2πj/n` on the unit circle; `n` is a power of two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { n: 128 }
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self, LaurentError> {
        if n < 4 || !n.is_power_of_two() {
            return Err(LaurentError::InvalidGrid(n));
        }
        Ok(Grid { n })
    }

    /// Grid able to carry an order-`order` map without aliasing quadratic terms.
    pub fn for_order(order: usize) -> Self {
        let need = (4 * (order + 1)).max(8).next_power_of_two();
        Grid { n: need }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn node(&self, j: usize) -> C64 {
        C64::from_polar(1.0, self.theta(j))
    }

    pub fn nodes(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    /// Checks `n ≥ 4(M+1)`.
    pub fn supports_order(&self, order: usize) -> Result<(), LaurentError> {
        let need = 4 * (order + 1);
        if self.n < need {
            return Err(LaurentError::GridTooCoarse { n: self.n, order, need });
        }
        Ok(())
    }
}

/// Values of a function at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    pub values: Vec<C64>,
}

impl BoundarySamples {
    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        BoundarySamples {
            values: values.into_iter().map(|x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn check_grid(&self, grid: Grid) -> Result<(), LaurentError> {
        if self.values.len() != grid.len() {
            return Err(LaurentError::GridMismatch {
                expected: grid.len(),
                found: self.values.len(),
            });
        }
        Ok(())
    }
}

/// Exterior conformal map `z(w) = r w + Σ_{j=0}^{M} a_j w^{-j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMap {
    r: f64,
    coeffs: Vec<C64>,
}

impl LaurentMap {
    pub fn new(r: f64, coeffs: Vec<C64>) -> Result<Self, LaurentError> {
        if !(r.is_finite() && r > 0.0) {
            return Err(LaurentError::InvalidRadius(r));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(LaurentError::NonFinite);
        }
        Ok(LaurentMap { r, coeffs })
    }

    /// The scaled identity `z = r w`.
    pub fn circle(r: f64) -> Result<Self, LaurentError> {
        Self::new(r, Vec::new())
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `a_0 … a_M`.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> C64 {
        self.coeffs.get(j).copied().unwrap_or_default()
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Same map with the coefficient list zero-padded (never truncated) to order `order`.
    pub fn padded(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < order + 1 {
            coeffs.resize(order + 1, C64::new(0.0, 0.0));
        }
        LaurentMap { r: self.r, coeffs }
    }

    /// Area of the complement of the image of `|w| > 1`: `π(r² − Σ j|a_j|²)`.
    pub fn area(&self) -> f64 {
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| j as f64 * a.norm_sqr())
            .sum();
        PI * (self.r * self.r - tail)
    }

    pub fn evaluate(&self, w: C64) -> Result<C64, LaurentError> {
        if w == C64::new(0.0, 0.0) {
            return Err(LaurentError::ZeroArgument);
        }
        Ok(self.eval_unchecked(w))
    }

    fn eval_unchecked(&self, w: C64) -> C64 {
        let u = w.inv();
        let mut acc = C64::new(0.0, 0.0);
        for a in self.coeffs.iter().rev() {
            acc = acc * u + a;
        }
        acc + w * self.r
    }

    /// `z'(w) = r − Σ j a_j w^{-j-1}`.
    pub fn derivative(&self, w: C64) -> Result<C64, LaurentError> {
        if w == C64::new(0.0, 0.0) {
            return Err(LaurentError::ZeroArgument);
        }
        Ok(self.deriv_unchecked(w))
    }

    fn deriv_unchecked(&self, w: C64) -> C64 {
        let u = w.inv();
        let mut acc = C64::new(0.0, 0.0);
        for (j, a) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * u + a * j as f64;
        }
        // acc = Σ j a_j u^{j-1}
        C64::new(self.r, 0.0) - acc * u * u
    }

    pub fn boundary(&self, grid: Grid) -> BoundarySamples {
        BoundarySamples {
            values: grid.nodes().map(|w| self.eval_unchecked(w)).collect(),
        }
    }

    pub fn boundary_derivative(&self, grid: Grid) -> BoundarySamples {
        BoundarySamples {
            values: grid.nodes().map(|w| self.deriv_unchecked(w)).collect(),
        }
    }

    /// Smallest `|z'|` on the grid and where it occurs, plus the first pair of
    /// crossing boundary segments if the sampled contour is not simple.
    pub fn univalence(&self, grid: Grid) -> Univalence {
        let deriv = self.boundary_derivative(grid);
        let (jmin, dmin) =
            deriv
                .values
                .iter()
                .map(|d| d.norm())
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |best, (j, d)| if d < best.1 { (j, d) } else { best },
                );
        let pts = self.boundary(grid).values;
        Univalence {
            min_derivative: dmin,
            theta_at_min: grid.theta(jmin),
            crossing: first_crossing(&pts),
        }
    }

    pub fn check_univalent(&self, grid: Grid) -> Result<(), LaurentError> {
        let u = self.univalence(grid);
        if u.min_derivative < CUSP_THRESHOLD {
            return Err(LaurentError::Cusp {
                theta: u.theta_at_min,
                derivative: u.min_derivative,
            });
        }
        if let Some((i, j)) = u.crossing {
            return Err(LaurentError::SelfIntersection(i, j));
        }
        Ok(())
    }

    /// Preimage `w(z)` with `|w| ≥ 1`, by damped Newton iteration seeded at `z/r`.
    pub fn inverse_evaluate(&self, z: C64) -> Result<C64, LaurentError> {
        let scale = z.norm().max(1.0);
        let mut w = z / self.r;
        if w.norm() < 1.0 {
            w = if w.norm() > 0.0 {
                w / w.norm() * 1.5
            } else {
                C64::new(1.5, 0.0)
            };
        }
        let mut res = (self.eval_unchecked(w) - z).norm();
        let mut iter = 0;
        while res > NEWTON_TOL * scale {
            if iter == NEWTON_MAX_ITER {
                return Err(LaurentError::InversionFailed { z, residual: res });
            }
            iter += 1;
            let d = self.deriv_unchecked(w);
            if d.norm() == 0.0 {
                return Err(LaurentError::InversionFailed { z, residual: res });
            }
            let delta = (self.eval_unchecked(w) - z) / d;
            let mut lambda = 1.0;
            loop {
                let cand = w - delta * lambda;
                let cand_res = if cand.norm() > 0.0 {
                    (self.eval_unchecked(cand) - z).norm()
                } else {
                    f64::INFINITY
                };
                if cand_res < res || lambda < 1e-10 {
                    w = cand;
                    res = cand_res;
                    break;
                }
                lambda *= 0.5;
            }
            if !res.is_finite() {
                return Err(LaurentError::InversionFailed { z, residual: res });
            }
        }
        if w.norm() < 1.0 - 1e-10 {
            return Err(LaurentError::InsideContour { z, w_abs: w.norm() });
        }
        Ok(w)
    }

    /// `A_k(w) = (z^k)_{>0} + ½ (z^k)_0` as a degree-`k` polynomial.
    pub fn ak_projection(&self, k: usize) -> Result<AkPolynomial, LaurentError> {
        if k == 0 {
            return Err(LaurentError::LogGenerator);
        }
        let m = self.order();
        let span = k * (m + 1) + 1;
        let n = span.next_power_of_two().max(8);
        if n > SERIES_BUDGET {
            return Err(LaurentError::SeriesBudget {
                k,
                order: m,
                needed: n,
                budget: SERIES_BUDGET,
            });
        }
        let grid = Grid { n };
        let samples: Vec<C64> = grid.nodes().map(|w| self.eval_unchecked(w).powu(k as u32)).collect();
        let table = fourier::modes(&samples);
        let lowest = -((k * m) as isize);
        let leakage = table
            .iter()
            .enumerate()
            .filter(|(idx, _)| {
                let s = fourier::signed_mode(*idx, n);
                s < lowest || s > k as isize
            })
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let mut coeffs = vec![fourier::mode(&table, 0) * 0.5];
        coeffs.extend((1..=k).map(|p| fourier::mode(&table, p as isize)));
        Ok(AkPolynomial { coeffs, leakage })
    }

    /// `φ_k(w) = w ∂_w A_k(w)`.
    pub fn phi_k(&self, k: usize, w: C64) -> Result<C64, LaurentError> {
        Ok(self.ak_projection(k)?.phi(w))
    }

    /// Fits an order-`order` map to samples of an exterior map taken on the circle
    /// `|w| = radius` at the nodes of a power-of-two grid.
    pub fn fit_circle(radius: f64, samples: &[C64], order: usize) -> Result<Self, LaurentError> {
        let grid = Grid::new(samples.len())?;
        if grid.len() < 2 * (order + 2) {
            return Err(LaurentError::GridTooCoarse {
                n: grid.len(),
                order,
                need: 2 * (order + 2),
            });
        }
        let table = fourier::modes(samples);
        let r = fourier::mode(&table, 1).re / radius;
        let coeffs = (0..=order)
            .map(|j| fourier::mode(&table, -(j as isize)) * radius.powi(j as i32))
            .collect();
        Self::new(r, coeffs)
    }
}

/// Result of the boundary univalence witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Univalence {
    pub min_derivative: f64,
    pub theta_at_min: f64,
    pub crossing: Option<(usize, usize)>,
}

fn orient(a: C64, b: C64, c: C64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// First pair of non-adjacent crossing segments of a closed polyline.
pub fn first_crossing(pts: &[C64]) -> Option<(usize, usize)> {
    let n = pts.len();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if pts[i] == pts[j] {
                return Some((i, j));
            }
            if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Polynomial `A_k(w) = Σ_{p=0}^{k} c_p w^p` with the product's spectral leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct AkPolynomial {
    /// `c_0 … c_k`.
    pub coeffs: Vec<C64>,
    /// Energy found outside the modes a `k`-th power can occupy.
    pub leakage: f64,
}

impl AkPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn evaluate(&self, w: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c)
    }

    pub fn phi(&self, w: C64) -> C64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, (p, c)| acc * w + c * p as f64)
    }
}

/// `Φ(w) = c_0 + Σ_{k≥1} c_k w^{-k}`, analytic in `|w| > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterSeries {
    pub c0: C64,
    /// `c_1 … c_K`.
    pub tail: Vec<C64>,
}

impl OuterSeries {
    pub fn order(&self) -> usize {
        self.tail.len()
    }

    pub fn evaluate(&self, w: C64) -> C64 {
        let u = w.inv();
        let mut acc = C64::new(0.0, 0.0);
        for c in self.tail.iter().rev() {
            acc = (acc + c) * u;
        }
        acc + self.c0
    }

    /// Values on the grid; modes beyond the grid's Nyquist index are dropped.
    pub fn boundary(&self, grid: Grid) -> BoundarySamples {
        let n = grid.len();
        let mut table = vec![C64::new(0.0, 0.0); n];
        table[0] = self.c0;
        for (k, c) in self.tail.iter().enumerate().take(n / 2) {
            let idx = (n - (k + 1)) % n;
            table[idx] += c;
        }
        BoundarySamples {
            values: fourier::synthesize(&table),
        }
    }
}

/// Analytic function outside the disk whose real part on the circle equals `h`.
pub fn schwarz_extension(h: &BoundarySamples) -> Result<OuterSeries, LaurentError> {
    Grid::new(h.len())?;
    let scale = h.max_abs().max(1.0);
    let max_imag = h.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if max_imag > 1e-10 * scale {
        return Err(LaurentError::NonReal { max_imag });
    }
    let n = h.len();
    let real: Vec<C64> = h.values.iter().map(|v| C64::new(v.re, 0.0)).collect();
    let table = fourier::modes(&real);
    let c0 = C64::new(table[0].re, 0.0);
    let mut tail: Vec<C64> = (1..n / 2).map(|k| fourier::mode(&table, -(k as isize)) * 2.0).collect();
    tail.push(fourier::mode(&table, (n / 2) as isize));
    Ok(OuterSeries { c0, tail })
}

/// Spectral `∂_{log w} = -i ∂_θ` of periodic boundary samples.
pub fn log_derivative(samples: &BoundarySamples) -> BoundarySamples {
    let n = samples.len();
    let mut table = fourier::modes(&samples.values);
    for (idx, c) in table.iter_mut().enumerate() {
        let m = fourier::signed_mode(idx, n);
        if n.is_multiple_of(2) && m == (n / 2) as isize {
            *c = C64::new(0.0, 0.0);
        } else {
            *c *= m as f64;
        }
    }
    BoundarySamples {
        values: fourier::synthesize(&table),
    }
}

/// A function of `(w, t_0)` fed to [`poisson_bracket`].
///
/// The value on the circle must equal `log_winding()·ln w` (principal branch)
/// plus a smooth periodic remainder.
pub trait BoundaryFunction {
    fn value(&self, w: C64, t0: f64) -> C64;

    fn log_winding(&self) -> f64 {
        0.0
    }
}

impl<F: Fn(C64, f64) -> C64> BoundaryFunction for F {
    fn value(&self, w: C64, t0: f64) -> C64 {
        self(w, t0)
    }
}

/// `A_0 = log w`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LogW;

impl BoundaryFunction for LogW {
    fn value(&self, w: C64, _t0: f64) -> C64 {
        w.ln()
    }

    fn log_winding(&self) -> f64 {
        1.0
    }
}

fn log_w_derivative_of(f: &dyn BoundaryFunction, grid: Grid, t0: f64) -> BoundarySamples {
    let winding = f.log_winding();
    let periodic = BoundarySamples {
        values: grid
            .nodes()
            .map(|w| {
                let v = f.value(w, t0);
                if winding != 0.0 {
                    v - w.ln() * winding
                } else {
                    v
                }
            })
            .collect(),
    };
    let mut d = log_derivative(&periodic);
    for v in d.values.iter_mut() {
        *v += winding;
    }
    d
}

/// `{f, g} = ∂_{log w} f ∂_{t_0} g − ∂_{t_0} f ∂_{log w} g` on the grid; the angular
/// derivative is spectral, the `t_0` derivative a central difference.
pub fn poisson_bracket(
    f: &dyn BoundaryFunction,
    g: &dyn BoundaryFunction,
    grid: Grid,
    t0: f64,
    dt0: f64,
) -> Result<BoundarySamples, LaurentError> {
    if !(dt0 > 0.0) {
        return Err(LaurentError::NonPositiveStep(dt0));
    }
    let df_log = log_w_derivative_of(f, grid, t0);
    let dg_log = log_w_derivative_of(g, grid, t0);
    let values = grid
        .nodes()
        .enumerate()
        .map(|(j, w)| {
            let df_t = (f.value(w, t0 + dt0) - f.value(w, t0 - dt0)) / (2.0 * dt0);
            let dg_t = (g.value(w, t0 + dt0) - g.value(w, t0 - dt0)) / (2.0 * dt0);
            df_log.values[j] * dg_t - df_t * dg_log.values[j]
        })
        .collect();
    Ok(BoundarySamples { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let m = LaurentMap::new(2.0, vec![]).unwrap();
        assert_eq!(m.evaluate(c(1.0, 0.0)).unwrap(), c(2.0, 0.0));
        let m = LaurentMap::new(1.0, vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let z = m.evaluate(c(0.0, 1.0)).unwrap();
        assert!((z - c(0.0, 0.5)).norm() < 1e-15);
        let shift = c(0.2, -0.1);
        let m = LaurentMap::new(1.0, vec![shift]).unwrap();
        let w = C64::from_polar(1.0, 0.7);
        assert!((m.evaluate(w).unwrap() - (w + shift)).norm() < 1e-15);
        assert_eq!(m.evaluate(c(0.0, 0.0)), Err(LaurentError::ZeroArgument));
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(LaurentMap::new(0.0, vec![]).is_err());
        assert!(LaurentMap::new(-1.0, vec![]).is_err());
        assert!(LaurentMap::new(f64::NAN, vec![]).is_err());
    }

    #[test]
    fn boundary_derivative_examples() {
        let grid = Grid::default();
        let d = LaurentMap::new(2.0, vec![]).unwrap().boundary_derivative(grid);
        assert!(d.values.iter().all(|v| (v - c(2.0, 0.0)).norm() < 1e-15));
        let u = c(0.3, 0.2);
        let m = LaurentMap::new(1.0, vec![c(0.0, 0.0), u]).unwrap();
        let d = m.boundary_derivative(grid);
        for (j, v) in d.values.iter().enumerate() {
            let e = C64::from_polar(1.0, -2.0 * grid.theta(j));
            assert!((v - (c(1.0, 0.0) - u * e)).norm() < 1e-14);
        }
        let ellipse = LaurentMap::new(1.0, vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let un = ellipse.univalence(grid);
        assert_relative_eq!(un.min_derivative, 0.5, epsilon = 1e-14);
        assert_relative_eq!(un.theta_at_min, 0.0);
    }

    #[test]
    fn ak_projection_examples() {
        let a = LaurentMap::new(2.0, vec![]).unwrap().ak_projection(2).unwrap();
        assert!((a.coeffs[2] - c(4.0, 0.0)).norm() < 1e-13);
        assert!(a.coeffs[0].norm() < 1e-13 && a.coeffs[1].norm() < 1e-13);

        let a0 = c(0.4, -0.2);
        let a = LaurentMap::new(1.0, vec![a0]).unwrap().ak_projection(1).unwrap();
        assert!((a.coeffs[0] - a0 * 0.5).norm() < 1e-14);
        assert!((a.coeffs[1] - c(1.0, 0.0)).norm() < 1e-14);

        let u = c(0.3, 0.1);
        let a = LaurentMap::new(1.0, vec![c(0.0, 0.0), u])
            .unwrap()
            .ak_projection(2)
            .unwrap();
        assert!((a.coeffs[0] - u).norm() < 1e-14);
        assert!(a.coeffs[1].norm() < 1e-14);
        assert!((a.coeffs[2] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(a.leakage < 1e-13);

        assert_eq!(
            LaurentMap::circle(1.0).unwrap().ak_projection(0),
            Err(LaurentError::LogGenerator)
        );
    }

    #[test]
    fn ak_projection_refuses_over_budget() {
        let m = LaurentMap::new(1.0, vec![c(0.0, 0.0); 400]).unwrap();
        assert!(matches!(m.ak_projection(200), Err(LaurentError::SeriesBudget { .. })));
    }

    #[test]
    fn phi_k_examples() {
        let m = LaurentMap::new(1.7, vec![c(0.3, 0.1), c(0.05, 0.0), c(0.0, 0.02)]).unwrap();
        let w = c(0.3, 1.2);
        assert!((m.phi_k(1, w).unwrap() - w * 1.7).norm() < 1e-13);
        let m = LaurentMap::new(1.0, vec![c(0.0, 0.0), c(0.25, 0.0)]).unwrap();
        assert!((m.phi_k(2, c(1.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-13);
        let m = LaurentMap::new(2.0, vec![]).unwrap();
        assert!((m.phi_k(3, c(0.0, 1.0)).unwrap() - c(0.0, -24.0)).norm() < 1e-12);
    }

    #[test]
    fn schwarz_extension_examples() {
        let grid = Grid::new(64).unwrap();
        let one = schwarz_extension(&BoundarySamples::from_real(vec![1.0; 64])).unwrap();
        assert!((one.c0 - c(1.0, 0.0)).norm() < 1e-15);
        assert!(one.tail.iter().all(|t| t.norm() < 1e-15));

        let h = BoundarySamples::from_real((0..64).map(|j| grid.theta(j).cos()));
        let phi = schwarz_extension(&h).unwrap();
        assert!(phi.c0.norm() < 1e-15);
        assert!((phi.tail[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(phi.tail[1..].iter().all(|t| t.norm() < 1e-14));

        let h = BoundarySamples::from_real((0..64).map(|j| (2.0 * grid.theta(j)).cos() + 3.0));
        let phi = schwarz_extension(&h).unwrap();
        assert!((phi.c0 - c(3.0, 0.0)).norm() < 1e-14);
        assert!((phi.tail[1] - c(1.0, 0.0)).norm() < 1e-14);

        let bad = BoundarySamples {
            values: vec![c(1.0, 0.5); 64],
        };
        assert!(matches!(schwarz_extension(&bad), Err(LaurentError::NonReal { .. })));
    }

    #[test]
    fn poisson_bracket_examples() {
        let grid = Grid::new(32).unwrap();
        let t0 = 1.3;
        let one = poisson_bracket(&LogW, &|_w: C64, t: f64| c(t, 0.0), grid, t0, 1e-4).unwrap();
        assert!(one.values.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-10));

        let z = |w: C64, t: f64| w * t.sqrt();
        let zbar = |w: C64, t: f64| w.inv() * t.sqrt();
        let b = poisson_bracket(&z, &zbar, grid, t0, 1e-4).unwrap();
        assert!(b.values.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-8));

        let f = |w: C64, _t: f64| w * w;
        let g = |_w: C64, t: f64| c(t * t, 0.0);
        let b = poisson_bracket(&f, &g, grid, t0, 1e-3).unwrap();
        for (w, v) in grid.nodes().zip(&b.values) {
            assert!((v - w * w * 4.0 * t0).norm() < 1e-10);
        }
        assert_eq!(
            poisson_bracket(&f, &g, grid, t0, 0.0),
            Err(LaurentError::NonPositiveStep(0.0))
        );
    }

    #[test]
    fn bracket_residual_is_second_order_in_step() {
        let grid = Grid::new(16).unwrap();
        let g = |_w: C64, t: f64| c(t.exp(), 0.0);
        let t0: f64 = 0.5;
        let exact = t0.exp();
        let resid = |dt: f64| {
            let b = poisson_bracket(&LogW, &g, grid, t0, dt).unwrap();
            b.values.iter().map(|v| (v - c(exact, 0.0)).norm()).fold(0.0, f64::max)
        };
        let ratio = resid(1e-2) / resid(5e-3);
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn inverse_evaluate_examples() {
        let m = LaurentMap::new(2.0, vec![]).unwrap();
        assert!((m.inverse_evaluate(c(4.0, 0.0)).unwrap() - c(2.0, 0.0)).norm() < 1e-12);
        let shift = c(0.3, 0.4);
        let m = LaurentMap::new(1.0, vec![shift]).unwrap();
        let w0 = c(1.2, -0.9);
        assert!((m.inverse_evaluate(w0 + shift).unwrap() - w0).norm() < 1e-12);
        let ellipse = LaurentMap::new(1.0, vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let w = ellipse.inverse_evaluate(c(3.0, 0.0)).unwrap();
        let oracle = (3.0 + (9.0f64 - 2.0).sqrt()) / 2.0;
        assert!((w - c(oracle, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_inside_contour_is_reported() {
        let m = LaurentMap::new(2.0, vec![]).unwrap();
        assert!(matches!(
            m.inverse_evaluate(c(0.5, 0.0)),
            Err(LaurentError::InsideContour { .. })
        ));
    }

    #[test]
    fn univalence_flags_cusps_and_crossings() {
        let grid = Grid::default();
        assert!(LaurentMap::circle(1.0).unwrap().check_univalent(grid).is_ok());
        let cusp = LaurentMap::new(1.0, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0 / 3.0, 0.0)]).unwrap();
        assert!(matches!(cusp.check_univalent(grid), Err(LaurentError::Cusp { .. })));
        let folded = LaurentMap::new(1.0, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.6, 0.0)]).unwrap();
        assert!(folded.check_univalent(grid).is_err());
    }

    #[test]
    fn fit_recovers_coefficients() {
        let m = LaurentMap::new(1.4, vec![c(0.1, 0.2), c(0.3, 0.0), c(0.0, -0.05)]).unwrap();
        let g = Grid::new(32).unwrap();
        let samples: Vec<C64> = g.nodes().map(|w| m.evaluate(w * 2.0).unwrap()).collect();
        let fit = LaurentMap::fit_circle(2.0, &samples, 4).unwrap();
        assert_relative_eq!(fit.r(), 1.4, epsilon = 1e-13);
        for j in 0..3 {
            assert!((fit.coeff(j) - m.coeff(j)).norm() < 1e-13);
        }
        assert!(fit.coeff(3).norm() < 1e-13);
    }

    #[test]
    fn area_of_ellipse() {
        let m = LaurentMap::new(1.0, vec![c(0.0, 0.0), c(0.3, 0.0)]).unwrap();
        assert_relative_eq!(m.area(), PI * 0.91, epsilon = 1e-14);
    }
}
