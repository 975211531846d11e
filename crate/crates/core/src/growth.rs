//! Contour dynamics of smooth domains.
//!
//! A flow prescribes the outward normal velocity `V_n` of the contour
//! `γ = z(|w| = 1)`. It is realised on the map coefficients by
//! `ż(w) = w z'(w) Φ(w)` where `Φ` is analytic outside the disk with
//! `Re Φ = V_n / |z'|` on the circle, integrated with fixed-step RK4.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use thiserror::Error;

use crate::fourier;
use crate::laurent::{
    poisson_bracket, schwarz_extension, BoundarySamples, Grid, LaurentError, LaurentMap, CUSP_THRESHOLD,
};
use crate::C64;

/// Largest imaginary part of `r` silently dropped after a step.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrowthError {
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error("moments undefined: {0}")]
    NotUnivalent(LaurentError),
    #[error("origin is not enclosed by the contour (winding {0})")]
    OriginOutside(f64),
    #[error("moment vector has {t} exterior and {v} interior moments")]
    OrderMismatch { t: usize, v: usize },
    #[error("U_zzbar = {value} is not positive at theta = {theta}")]
    NonPositiveDensity { theta: f64, value: f64 },
    #[error("cusp at theta = {theta} (|z'| = {derivative:e}); smooth growth has broken down")]
    Cusp { theta: f64, derivative: f64 },
    #[error("source point {0} is not outside the contour")]
    SourceNotExterior(C64),
    #[error("flow index k must be >= 1")]
    ZeroFlowIndex,
    #[error("orientation sign must be +1 or -1, got {0}")]
    InvalidSign(f64),
    #[error("univalence lost after the step at theta = {theta}: {source}")]
    Breakdown { theta: f64, source: LaurentError },
    #[error("leading coefficient acquired an imaginary part {0:e}")]
    ImaginaryRadius(f64),
    #[error("leg must have a finite duration and at least one step")]
    InvalidLeg,
}

/// Generating function `U(z, z̄)` of the canonical transformation.
pub trait Potential: Send + Sync + fmt::Debug {
    fn value(&self, z: C64) -> f64;
    /// `∂U/∂z̄`.
    fn d_zbar(&self, z: C64) -> C64;
    /// `∂_z ∂_z̄ U`.
    fn u_zzbar(&self, z: C64) -> f64;
}

#[derive(Debug, Clone, Default)]
pub enum PotentialSpec {
    /// `U = z z̄`.
    #[default]
    Quadratic,
    Custom(Arc<dyn Potential>),
}

impl PotentialSpec {
    pub fn value(&self, z: C64) -> f64 {
        match self {
            PotentialSpec::Quadratic => z.norm_sqr(),
            PotentialSpec::Custom(p) => p.value(z),
        }
    }

    pub fn d_zbar(&self, z: C64) -> C64 {
        match self {
            PotentialSpec::Quadratic => z,
            PotentialSpec::Custom(p) => p.d_zbar(z),
        }
    }

    pub fn u_zzbar(&self, z: C64) -> f64 {
        match self {
            PotentialSpec::Quadratic => 1.0,
            PotentialSpec::Custom(p) => p.u_zzbar(z),
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, PotentialSpec::Quadratic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowKind {
    /// `∂_{t_0}` with the source at infinity.
    T0Infinity,
    /// `∂_{t_0} + D(z_0) + D̄(z̄_0)`: source at a finite exterior point.
    T0Source { z0: C64 },
    /// `∂/∂ Re t_k`.
    TkReal(usize),
    /// `∂/∂ Im t_k`.
    TkImag(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSpec {
    pub kind: FlowKind,
    sign: f64,
}

impl FlowSpec {
    pub fn new(kind: FlowKind) -> Self {
        FlowSpec { kind, sign: 1.0 }
    }

    pub fn with_sign(kind: FlowKind, sign: f64) -> Result<Self, GrowthError> {
        if sign != 1.0 && sign != -1.0 {
            return Err(GrowthError::InvalidSign(sign));
        }
        Ok(FlowSpec { kind, sign })
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }
}

/// `t_0`, exterior moments `t_1…t_K` and interior moments `v_1…v_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub t0: f64,
    pub t: Vec<C64>,
    pub v: Vec<C64>,
}

impl MomentVector {
    pub fn order(&self) -> usize {
        self.t.len()
    }
}

/// Spatial resolution shared by every operation of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Truncation order `M` of the map.
    pub order: usize,
    pub grid: Grid,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            order: 16,
            grid: Grid::default(),
        }
    }
}

impl Resolution {
    pub fn new(order: usize, grid: Grid) -> Result<Self, GrowthError> {
        grid.supports_order(order)?;
        Ok(Resolution { order, grid })
    }
}

fn winding_about_origin(pts: &[C64]) -> f64 {
    let n = pts.len();
    let total: f64 = (0..n).map(|j| (pts[(j + 1) % n] / pts[j]).arg()).sum();
    total / (2.0 * PI)
}

fn check_moment_domain(map: &LaurentMap, grid: Grid) -> Result<Vec<C64>, GrowthError> {
    map.check_univalent(grid).map_err(GrowthError::NotUnivalent)?;
    let pts = map.boundary(grid).values;
    if pts.iter().any(|z| z.norm() == 0.0) {
        return Err(GrowthError::OriginOutside(f64::NAN));
    }
    let wind = winding_about_origin(&pts);
    if (wind - 1.0).abs() > 1e-6 {
        return Err(GrowthError::OriginOutside(wind));
    }
    Ok(pts)
}

/// `(1/n) Σ_j kernel(z_j) z̄_j w_j z'_j`, the trapezoidal rule for `(1/2πi)∮ kernel z̄ dz`.
fn contour_integral(map: &LaurentMap, grid: Grid, pts: &[C64], kernel: impl Fn(C64) -> C64) -> C64 {
    let deriv = map.boundary_derivative(grid).values;
    let sum = grid
        .nodes()
        .zip(pts)
        .zip(&deriv)
        .fold(C64::new(0.0, 0.0), |acc, ((w, z), d)| {
            acc + kernel(*z) * z.conj() * w * d
        });
    sum / grid.len() as f64
}

/// `t_0 = area/π` and `t_k = (1/2πik)∮ z^{-k} z̄ dz`, `k = 1…order`.
pub fn harmonic_moments(map: &LaurentMap, grid: Grid, order: usize) -> Result<MomentVector, GrowthError> {
    let pts = check_moment_domain(map, grid)?;
    let t0 = contour_integral(map, grid, &pts, |_| C64::new(1.0, 0.0)).re;
    let t = (1..=order)
        .map(|k| contour_integral(map, grid, &pts, |z| z.powi(-(k as i32))) / k as f64)
        .collect();
    Ok(MomentVector { t0, t, v: Vec::new() })
}

/// `v_k = (1/2πi)∮ z^k z̄ dz`, `k = 1…order`.
pub fn interior_moments(map: &LaurentMap, grid: Grid, order: usize) -> Result<Vec<C64>, GrowthError> {
    let pts = check_moment_domain(map, grid)?;
    Ok((1..=order)
        .map(|k| contour_integral(map, grid, &pts, |z| z.powu(k as u32)))
        .collect())
}

/// Both moment families.
pub fn moments(map: &LaurentMap, grid: Grid, order: usize) -> Result<MomentVector, GrowthError> {
    let mut mv = harmonic_moments(map, grid, order)?;
    mv.v = interior_moments(map, grid, order)?;
    Ok(mv)
}

/// `M = Σ k t_k z^k + t_0 + Σ v_k z^{-k}` at `z = z(w)`.
pub fn orlov_shulman(map: &LaurentMap, moments: &MomentVector, w: C64) -> Result<C64, GrowthError> {
    if moments.t.len() != moments.v.len() {
        return Err(GrowthError::OrderMismatch {
            t: moments.t.len(),
            v: moments.v.len(),
        });
    }
    let z = map.evaluate(w)?;
    let zi = z.inv();
    let mut acc = C64::new(moments.t0, 0.0);
    let mut zp = C64::new(1.0, 0.0);
    let mut zn = C64::new(1.0, 0.0);
    for (k, (tk, vk)) in moments.t.iter().zip(&moments.v).enumerate() {
        zp *= z;
        zn *= zi;
        acc += tk * zp * (k + 1) as f64 + vk * zn;
    }
    Ok(acc)
}

/// Dirichlet Green function of the exterior of the contour,
/// `G = log |(w(z) − w(z_0)) / (1 − w(z) conj w(z_0))|`.
pub fn green_function(map: &LaurentMap, z: C64, z0: C64) -> Result<f64, GrowthError> {
    let w = map.inverse_evaluate(z)?;
    let w0 = map.inverse_evaluate(z0)?;
    Ok(((w - w0) / (C64::new(1.0, 0.0) - w * w0.conj())).norm().ln())
}

/// Outward normal velocity of the contour on the grid for the given flow.
pub fn normal_velocity(
    map: &LaurentMap,
    flow: &FlowSpec,
    potential: &PotentialSpec,
    grid: Grid,
) -> Result<BoundarySamples, GrowthError> {
    let deriv = map.boundary_derivative(grid).values;
    let speed: Vec<f64> = deriv.iter().map(|d| d.norm()).collect();
    if let Some((j, d)) = speed.iter().enumerate().find(|(_, d)| !(**d >= CUSP_THRESHOLD)) {
        return Err(GrowthError::Cusp {
            theta: grid.theta(j),
            derivative: *d,
        });
    }
    let pts = map.boundary(grid).values;
    let mut density = Vec::with_capacity(grid.len());
    for (j, z) in pts.iter().enumerate() {
        let u = potential.u_zzbar(*z);
        if !(u > 0.0) {
            return Err(GrowthError::NonPositiveDensity {
                theta: grid.theta(j),
                value: u,
            });
        }
        density.push(u);
    }
    let raw: Vec<f64> = match flow.kind {
        FlowKind::T0Infinity => speed.iter().zip(&density).map(|(s, u)| 1.0 / (2.0 * u * s)).collect(),
        FlowKind::T0Source { z0 } => {
            let w0 = map
                .inverse_evaluate(z0)
                .map_err(|_| GrowthError::SourceNotExterior(z0))?;
            if w0.norm() <= 1.0 + 1e-12 {
                return Err(GrowthError::SourceNotExterior(z0));
            }
            let one = C64::new(1.0, 0.0);
            grid.nodes()
                .zip(speed.iter().zip(&density))
                .map(|(w, (s, u))| {
                    // radial derivative of the explicit Green function at |w| = 1
                    let d_rho = (w * (one / (w - w0) + w0.conj() / (one - w * w0.conj()))).re;
                    -d_rho / (2.0 * u * s)
                })
                .collect()
        }
        FlowKind::TkReal(k) | FlowKind::TkImag(k) => {
            if k == 0 {
                return Err(GrowthError::ZeroFlowIndex);
            }
            let ak = map.ak_projection(k)?;
            let real = matches!(flow.kind, FlowKind::TkReal(_));
            grid.nodes()
                .zip(speed.iter().zip(&density))
                .map(|(w, (s, u))| {
                    let phi = ak.phi(w);
                    let num = if real { phi.re } else { -phi.im };
                    num / (u * s)
                })
                .collect()
        }
    };
    Ok(BoundarySamples::from_real(raw.into_iter().map(|v| v * flow.sign)))
}

/// Per-step numerical diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    /// Norm of the `ż` modes below `w^{-M}` that were discarded.
    pub leakage: f64,
    /// Largest imaginary part of `ṙ` dropped during the step.
    pub imag_residue: f64,
    /// `min |z'|` on the grid after the step.
    pub min_derivative: f64,
}

struct Rate {
    dr: f64,
    da: Vec<C64>,
    leakage: f64,
    imag: f64,
}

fn rate(map: &LaurentMap, flow: &FlowSpec, potential: &PotentialSpec, res: Resolution) -> Result<Rate, GrowthError> {
    let grid = res.grid;
    let n = grid.len();
    let vn = normal_velocity(map, flow, potential, grid)?;
    let deriv = map.boundary_derivative(grid).values;
    let h = BoundarySamples::from_real(vn.values.iter().zip(&deriv).map(|(v, d)| v.re / d.norm()));
    let phi = schwarz_extension(&h)?.boundary(grid).values;
    let product: Vec<C64> = grid
        .nodes()
        .zip(deriv.iter().zip(&phi))
        .map(|(w, (d, p))| w * d * p)
        .collect();
    let table = fourier::modes(&product);
    let m = res.order as isize;
    let top = fourier::mode(&table, 1);
    let da = (0..=res.order).map(|j| fourier::mode(&table, -(j as isize))).collect();
    let leakage = table
        .iter()
        .enumerate()
        .filter(|(idx, _)| {
            let s = fourier::signed_mode(*idx, n);
            s < -m || s > 1
        })
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(Rate {
        dr: top.re,
        da,
        leakage,
        imag: top.im.abs(),
    })
}

fn displaced(map: &LaurentMap, rate: &Rate, h: f64) -> Result<LaurentMap, GrowthError> {
    let coeffs = map.coeffs().iter().zip(&rate.da).map(|(a, d)| a + d * h).collect();
    Ok(LaurentMap::new(map.r() + rate.dr * h, coeffs)?)
}

/// Outcome of one RK4 step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub map: LaurentMap,
    pub diagnostics: StepDiagnostics,
}

/// One RK4 step of length `dt` of the coefficient ODE for `flow`.
pub fn step(
    map: &LaurentMap,
    flow: &FlowSpec,
    potential: &PotentialSpec,
    dt: f64,
    res: Resolution,
) -> Result<StepOutcome, GrowthError> {
    res.grid.supports_order(map.order().max(res.order))?;
    let res = Resolution {
        order: map.order().max(res.order),
        grid: res.grid,
    };
    let y = map.padded(res.order);
    if dt == 0.0 {
        let min_derivative = y.univalence(res.grid).min_derivative;
        return Ok(StepOutcome {
            map: map.clone(),
            diagnostics: StepDiagnostics {
                min_derivative,
                ..StepDiagnostics::default()
            },
        });
    }
    let k1 = rate(&y, flow, potential, res)?;
    let k2 = rate(&displaced(&y, &k1, dt / 2.0)?, flow, potential, res)?;
    let k3 = rate(&displaced(&y, &k2, dt / 2.0)?, flow, potential, res)?;
    let k4 = rate(&displaced(&y, &k3, dt)?, flow, potential, res)?;
    let dr = (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr) / 6.0;
    let coeffs = (0..=res.order)
        .map(|j| y.coeffs()[j] + (k1.da[j] + k2.da[j] * 2.0 + k3.da[j] * 2.0 + k4.da[j]) * (dt / 6.0))
        .collect();
    let imag_residue = [k1.imag, k2.imag, k3.imag, k4.imag].into_iter().fold(0.0, f64::max) * dt.abs();
    if imag_residue > IMAG_RESIDUE_LIMIT * y.r().max(1.0) {
        return Err(GrowthError::ImaginaryRadius(imag_residue));
    }
    let next = LaurentMap::new(y.r() + dr * dt, coeffs)?;
    let uni = next.univalence(res.grid);
    if let Err(source) = next.check_univalent(res.grid) {
        return Err(GrowthError::Breakdown {
            theta: uni.theta_at_min,
            source,
        });
    }
    let leakage = [k1.leakage, k2.leakage, k3.leakage, k4.leakage]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(StepOutcome {
        map: next,
        diagnostics: StepDiagnostics {
            leakage,
            imag_residue,
            min_derivative: uni.min_derivative,
        },
    })
}

/// A schedule entry: run `flow` for `duration` in `steps` equal RK4 steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub flow: FlowSpec,
    pub duration: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    /// Index of the leg that produced this point (`None` for the initial map).
    pub leg: Option<usize>,
    /// Elapsed flow time summed over legs.
    pub time: f64,
    pub map: LaurentMap,
    pub moments: MomentVector,
    pub diagnostics: StepDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step}: {source}")]
pub struct RunError {
    pub step: usize,
    pub source: GrowthError,
    /// Points computed before the failure.
    pub partial: Vec<TrajectoryPoint>,
}

/// Applies the schedule, recording map, moments and diagnostics after every step.
pub fn run(
    map: &LaurentMap,
    schedule: &[Leg],
    potential: &PotentialSpec,
    res: Resolution,
    moment_order: usize,
) -> Result<Vec<TrajectoryPoint>, RunError> {
    let fail = |step, source, partial| RunError { step, source, partial };
    let mut current = map.padded(res.order);
    let first = match moments(&current, res.grid, moment_order) {
        Ok(m) => m,
        Err(e) => return Err(fail(0, e, Vec::new())),
    };
    let mut out = vec![TrajectoryPoint {
        step: 0,
        leg: None,
        time: 0.0,
        map: current.clone(),
        moments: first,
        diagnostics: StepDiagnostics {
            min_derivative: current.univalence(res.grid).min_derivative,
            ..StepDiagnostics::default()
        },
    }];
    let mut time = 0.0;
    let mut index = 0;
    for (li, leg) in schedule.iter().enumerate() {
        if leg.steps == 0 || !leg.duration.is_finite() {
            return Err(fail(index + 1, GrowthError::InvalidLeg, out));
        }
        let dt = leg.duration / leg.steps as f64;
        for _ in 0..leg.steps {
            index += 1;
            let outcome = match step(&current, &leg.flow, potential, dt, res) {
                Ok(o) => o,
                Err(e) => return Err(fail(index, e, out)),
            };
            current = outcome.map;
            time += dt;
            let mv = match moments(&current, res.grid, moment_order) {
                Ok(m) => m,
                Err(e) => return Err(fail(index, e, out)),
            };
            out.push(TrajectoryPoint {
                step: index,
                leg: Some(li),
                time,
                map: current.clone(),
                moments: mv,
                diagnostics: outcome.diagnostics,
            });
        }
    }
    Ok(out)
}

/// Boundary samples of `{z(w), z̄(w^{-1})}` along the `t_0` flow, using maps
/// evolved by `±dt0`.
pub fn string_bracket(
    map: &LaurentMap,
    potential: &PotentialSpec,
    res: Resolution,
    dt0: f64,
) -> Result<BoundarySamples, GrowthError> {
    if !(dt0 > 0.0) {
        return Err(LaurentError::NonPositiveStep(dt0).into());
    }
    let flow = FlowSpec::new(FlowKind::T0Infinity);
    let center = map.padded(res.order.max(map.order()));
    let plus = step(&center, &flow, potential, dt0, res)?.map;
    let minus = step(&center, &flow, potential, -dt0, res)?.map;
    let t0 = center.area() / PI;
    let pick = |t: f64| {
        if t > t0 {
            &plus
        } else if t < t0 {
            &minus
        } else {
            &center
        }
    };
    let z = |w: C64, t: f64| pick(t).evaluate(w).unwrap_or_default();
    let zbar = |w: C64, t: f64| pick(t).evaluate(w.conj().inv()).unwrap_or_default().conj();
    Ok(poisson_bracket(&z, &zbar, res.grid, t0, dt0)?)
}

/// `max_grid |{z, z̄} U_{zz̄} − 1|`.
pub fn string_residual(
    map: &LaurentMap,
    potential: &PotentialSpec,
    res: Resolution,
    dt0: f64,
) -> Result<f64, GrowthError> {
    let bracket = string_bracket(map, potential, res, dt0)?;
    let pts = map.boundary(res.grid).values;
    Ok(bracket
        .values
        .iter()
        .zip(&pts)
        .map(|(b, z)| (b * potential.u_zzbar(*z) - 1.0).norm())
        .fold(0.0, f64::max))
}
