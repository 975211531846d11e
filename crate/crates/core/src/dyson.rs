//! Two-dimensional log-gas with weight `e^{-E}`,
//!
//! `E = −Σ_{m≠n} log|z_m − z_n| + (1/ħ) Σ_j [U(z_j) − 2 Re Σ_k t_k z_j^k]`,
//!
//! either in the plane or restricted to a curve (where `U` is replaced by a
//! confining term of the curve parameter). `t_0 = ħN`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use thiserror::Error;

use crate::growth::PotentialSpec;
use crate::laurent::{first_crossing, LaurentError, LaurentMap};
use crate::C64;

/// Positions closer than this are treated as coincident.
pub const MIN_SEPARATION: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DysonError {
    #[error("invalid gas configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("weight is not confining near {0}")]
    NotConfining(C64),
    #[error("particles {0} and {1} coincide")]
    Coincident(usize, usize),
    #[error("need at least {need} particles, have {have}")]
    TooFewParticles { have: usize, need: usize },
    #[error("state does not match the configuration")]
    StateMismatch,
    #[error("minimization did not converge (max |force| = {grad_norm:e})")]
    NotConverged { grad_norm: f64 },
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// Confining term `V(s)` along a curve; the energy carries `V/ħ`.
pub trait CurveConfinement: Send + Sync + fmt::Debug {
    fn value(&self, s: f64) -> f64;
    fn slope(&self, s: f64) -> f64;
}

#[derive(Debug, Clone)]
pub enum Confinement {
    /// `V(s) = coefficient · s²`.
    Quadratic {
        coefficient: f64,
    },
    Custom(Arc<dyn CurveConfinement>),
}

impl Confinement {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Confinement::Quadratic { coefficient } => coefficient * s * s,
            Confinement::Custom(c) => c.value(s),
        }
    }

    pub fn slope(&self, s: f64) -> f64 {
        match self {
            Confinement::Quadratic { coefficient } => 2.0 * coefficient * s,
            Confinement::Custom(c) => c.slope(s),
        }
    }
}

/// Curve carrying a one-dimensional gas, parametrized by arc length.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    RealLine,
    /// `z_0 + s·direction`, `s ≥ 0`, with a hard wall at `z_0`.
    Ray {
        origin: C64,
        direction: C64,
    },
    /// Polyline through the given points; walls at both ends.
    Parametric {
        points: Vec<C64>,
        arc: Vec<f64>,
    },
}

impl CurveSpec {
    pub fn ray(origin: C64, direction: C64) -> Result<Self, DysonError> {
        let len = direction.norm();
        if !(len > 0.0 && len.is_finite()) || !origin.re.is_finite() || !origin.im.is_finite() {
            return Err(DysonError::InvalidConfig(
                "ray needs a finite origin and non-zero direction",
            ));
        }
        Ok(CurveSpec::Ray {
            origin,
            direction: direction / len,
        })
    }

    pub fn parametric(points: Vec<C64>) -> Result<Self, DysonError> {
        if points.len() < 2 {
            return Err(DysonError::InvalidConfig("parametric curve needs two points"));
        }
        let mut arc = vec![0.0];
        for p in points.windows(2) {
            let d = (p[1] - p[0]).norm();
            if !(d > 0.0 && d.is_finite()) {
                return Err(DysonError::InvalidConfig("parametric curve has repeated points"));
            }
            arc.push(arc[arc.len() - 1] + d);
        }
        Ok(CurveSpec::Parametric { points, arc })
    }

    /// Admissible parameter range.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            CurveSpec::RealLine => (f64::NEG_INFINITY, f64::INFINITY),
            CurveSpec::Ray { .. } => (0.0, f64::INFINITY),
            CurveSpec::Parametric { arc, .. } => (0.0, arc[arc.len() - 1]),
        }
    }

    fn segment(arc: &[f64], s: f64) -> usize {
        arc.partition_point(|a| *a <= s).clamp(1, arc.len() - 1) - 1
    }

    pub fn point(&self, s: f64) -> C64 {
        match self {
            CurveSpec::RealLine => C64::new(s, 0.0),
            CurveSpec::Ray { origin, direction } => origin + direction * s,
            CurveSpec::Parametric { points, arc } => {
                let i = Self::segment(arc, s);
                let u = (s - arc[i]) / (arc[i + 1] - arc[i]);
                points[i] + (points[i + 1] - points[i]) * u
            }
        }
    }

    /// Unit tangent `dz/ds`.
    pub fn tangent(&self, s: f64) -> C64 {
        match self {
            CurveSpec::RealLine => C64::new(1.0, 0.0),
            CurveSpec::Ray { direction, .. } => *direction,
            CurveSpec::Parametric { points, arc } => {
                let i = Self::segment(arc, s);
                (points[i + 1] - points[i]) / (arc[i + 1] - arc[i])
            }
        }
    }

    fn clamp(&self, s: f64) -> f64 {
        let (lo, hi) = self.domain();
        s.clamp(lo, hi)
    }
}

#[derive(Debug, Clone)]
pub enum Measure {
    Plane(PotentialSpec),
    Curve { curve: CurveSpec, confine: Confinement },
}

/// Minimizer and sampler settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub max_iterations: usize,
    /// Convergence threshold on `max_j |force_j|`; `None` means `1e-8 N/ħ`.
    pub tolerance: Option<f64>,
    /// Metropolis sweeps used to tune the proposal scale.
    pub burn_in: usize,
    /// Sweeps between recorded Metropolis samples.
    pub thin: usize,
    /// Independent seeded starts tried by [`minimize`]; the lowest energy wins.
    pub restarts: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            max_iterations: 20_000,
            tolerance: None,
            burn_in: 200,
            thin: 1,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GasConfig {
    pub n: usize,
    pub hbar: f64,
    /// `t_1 … t_K`.
    pub times: Vec<C64>,
    pub measure: Measure,
    pub seed: u64,
    pub schedule: Schedule,
}

impl GasConfig {
    /// Quadratic plane gas with `ħ = t_0 / N`.
    pub fn plane(n: usize, t0: f64, times: Vec<C64>, seed: u64) -> Self {
        GasConfig {
            n,
            hbar: t0 / n as f64,
            times,
            measure: Measure::Plane(PotentialSpec::Quadratic),
            seed,
            schedule: Schedule::default(),
        }
    }

    pub fn t0(&self) -> f64 {
        self.hbar * self.n as f64
    }

    pub fn tolerance(&self) -> f64 {
        self.schedule.tolerance.unwrap_or(1e-8 * self.n as f64 / self.hbar)
    }

    fn is_curve(&self) -> bool {
        matches!(self.measure, Measure::Curve { .. })
    }

    /// `Σ_k t_k z^k` and its derivative.
    fn times_poly(&self, z: C64) -> (C64, C64) {
        let mut value = C64::new(0.0, 0.0);
        let mut slope = C64::new(0.0, 0.0);
        for t in self.times.iter().rev() {
            slope = slope * z + value + t;
            value = (value + t) * z;
        }
        (value, slope)
    }

    /// Single-particle term `U − 2 Re Σ t_k z^k` (before the `1/ħ`).
    fn external(&self, x: Coord) -> f64 {
        let (z, base) = match (&self.measure, x) {
            (Measure::Plane(u), Coord::Plane(z)) => (z, u.value(z)),
            (Measure::Curve { curve, confine }, Coord::Curve(s)) => (curve.point(s), confine.value(s)),
            _ => unreachable!("coordinate kind fixed by the measure"),
        };
        base - 2.0 * self.times_poly(z).0.re
    }

    pub fn validate(&self) -> Result<(), DysonError> {
        if self.n == 0 {
            return Err(DysonError::InvalidConfig("N must be positive"));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(DysonError::InvalidConfig("hbar must be positive"));
        }
        if self.times.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            return Err(DysonError::InvalidConfig("non-finite time"));
        }
        if self.schedule.thin == 0 {
            return Err(DysonError::InvalidConfig("thin must be positive"));
        }
        if self.schedule.restarts == 0 {
            return Err(DysonError::InvalidConfig("restarts must be positive"));
        }
        let far = 10.0 * self.t0().sqrt().max(1.0);
        match &self.measure {
            Measure::Plane(_) => {
                for j in 0..64 {
                    let dir = C64::from_polar(1.0, 2.0 * PI * j as f64 / 64.0);
                    let inner = self.external(Coord::Plane(dir * far));
                    let outer = self.external(Coord::Plane(dir * (2.0 * far)));
                    if !(inner > 0.0 && outer > inner) {
                        return Err(DysonError::NotConfining(dir * far));
                    }
                }
            }
            Measure::Curve { curve, .. } => {
                let (lo, hi) = curve.domain();
                for (end, sign) in [(lo, -1.0), (hi, 1.0)] {
                    if end.is_finite() {
                        continue;
                    }
                    let inner = self.external(Coord::Curve(sign * far));
                    let outer = self.external(Coord::Curve(sign * 2.0 * far));
                    if !(inner > 0.0 && outer > inner) {
                        return Err(DysonError::NotConfining(curve.point(sign * far)));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Coord {
    Plane(C64),
    Curve(f64),
}

/// Particle configuration. For curve measures `params` holds the arc-length
/// parameters and `positions` their images.
#[derive(Debug, Clone, PartialEq)]
pub struct GasState {
    pub positions: Vec<C64>,
    pub params: Option<Vec<f64>>,
    pub energy: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `max_j |force_j|` at the final configuration.
    pub grad_norm: f64,
}

impl GasState {
    /// State in the plane with its energy evaluated.
    pub fn from_positions(positions: Vec<C64>, config: &GasConfig) -> Result<Self, DysonError> {
        if config.is_curve() {
            return Err(DysonError::StateMismatch);
        }
        let x: Vec<f64> = positions.iter().flat_map(|z| [z.re, z.im]).collect();
        Self::assemble(&x, config)
    }

    /// State on the configured curve with its energy evaluated.
    pub fn from_params(params: Vec<f64>, config: &GasConfig) -> Result<Self, DysonError> {
        let Measure::Curve { curve, .. } = &config.measure else {
            return Err(DysonError::StateMismatch);
        };
        let (lo, hi) = curve.domain();
        if params.iter().any(|s| !(*s >= lo && *s <= hi)) {
            return Err(DysonError::InvalidConfig("curve parameter outside the domain"));
        }
        Self::assemble(&params, config)
    }

    fn assemble(x: &[f64], config: &GasConfig) -> Result<Self, DysonError> {
        let (positions, params) = unpack(x, config);
        if positions.len() != config.n {
            return Err(DysonError::StateMismatch);
        }
        let energy = energy_of(&positions, x, config)?;
        let grad_norm = max_force(&forces_of(&positions, x, config));
        Ok(GasState {
            positions,
            params,
            energy,
            converged: false,
            iterations: 0,
            grad_norm,
        })
    }

    fn flat(&self) -> Vec<f64> {
        match &self.params {
            Some(p) => p.clone(),
            None => self.positions.iter().flat_map(|z| [z.re, z.im]).collect(),
        }
    }
}

fn unpack(x: &[f64], config: &GasConfig) -> (Vec<C64>, Option<Vec<f64>>) {
    match &config.measure {
        Measure::Plane(_) => (x.chunks(2).map(|p| C64::new(p[0], p[1])).collect(), None),
        Measure::Curve { curve, .. } => (x.iter().map(|s| curve.point(*s)).collect(), Some(x.to_vec())),
    }
}

fn coord(x: &[f64], j: usize, config: &GasConfig) -> Coord {
    if config.is_curve() {
        Coord::Curve(x[j])
    } else {
        Coord::Plane(C64::new(x[2 * j], x[2 * j + 1]))
    }
}

fn energy_of(z: &[C64], x: &[f64], config: &GasConfig) -> Result<f64, DysonError> {
    let mut pair = 0.0;
    for m in 0..z.len() {
        for n in m + 1..z.len() {
            let d2 = (z[m] - z[n]).norm_sqr();
            if d2 < MIN_SEPARATION * MIN_SEPARATION {
                return Err(DysonError::Coincident(m, n));
            }
            // each unordered pair appears twice in Σ_{m≠n} log|z_m − z_n|
            pair -= d2.ln();
        }
    }
    let ext: f64 = (0..z.len()).map(|j| config.external(coord(x, j, config))).sum();
    Ok(pair + ext / config.hbar)
}

/// `−∂E/∂z̄_j` in the plane; `−∂E/∂s_j` (as a real number) on a curve.
fn forces_of(z: &[C64], x: &[f64], config: &GasConfig) -> Vec<C64> {
    let n = z.len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let mut repulsion = C64::new(0.0, 0.0);
        for m in 0..n {
            if m != j {
                repulsion += (z[j] - z[m]).conj().inv();
            }
        }
        let (_, dpoly) = config.times_poly(z[j]);
        match &config.measure {
            Measure::Plane(u) => {
                let d_zbar = -repulsion + (u.d_zbar(z[j]) - dpoly.conj()) / config.hbar;
                out.push(-d_zbar);
            }
            Measure::Curve { curve, confine } => {
                let s = x[j];
                let tangent = curve.tangent(s);
                // dE/ds = 2 Re(∂E/∂z̄ · conj(dz/ds)) for the pair and time terms
                let d_zbar = -repulsion - dpoly.conj() / config.hbar;
                let d_s = 2.0 * (d_zbar * tangent.conj()).re + confine.slope(s) / config.hbar;
                let (lo, hi) = curve.domain();
                let mut f = -d_s;
                if (s <= lo && f < 0.0) || (s >= hi && f > 0.0) {
                    f = 0.0;
                }
                out.push(C64::new(f, 0.0));
            }
        }
    }
    out
}

fn max_force(f: &[C64]) -> f64 {
    f.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn check_state(state: &GasState, config: &GasConfig) -> Result<Vec<f64>, DysonError> {
    if state.positions.len() != config.n || state.params.is_some() != config.is_curve() {
        return Err(DysonError::StateMismatch);
    }
    Ok(state.flat())
}

/// Energy of a state under `config`.
pub fn energy(state: &GasState, config: &GasConfig) -> Result<f64, DysonError> {
    let x = check_state(state, config)?;
    energy_of(&state.positions, &x, config)
}

/// `−∂E/∂z̄_j` for plane measures; for curves the real tangential force
/// `−∂E/∂s_j`, zeroed where it pushes into a wall.
pub fn forces(state: &GasState, config: &GasConfig) -> Result<Vec<C64>, DysonError> {
    let x = check_state(state, config)?;
    let z = &state.positions;
    for m in 0..z.len() {
        for n in m + 1..z.len() {
            if (z[m] - z[n]).norm() < MIN_SEPARATION {
                return Err(DysonError::Coincident(m, n));
            }
        }
    }
    Ok(forces_of(z, &x, config))
}

/// Seeded starting configuration: uniform in the disk of radius `√t_0`, or
/// uniform on a compact piece of the curve.
pub fn initial_state(config: &GasConfig) -> Result<GasState, DysonError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let radius = config.t0().sqrt();
    let x: Vec<f64> = match &config.measure {
        Measure::Plane(_) => (0..config.n)
            .flat_map(|_| {
                let u: f64 = StandardUniform.sample(&mut rng);
                let v: f64 = StandardUniform.sample(&mut rng);
                let z = C64::from_polar(radius * u.sqrt(), 2.0 * PI * v);
                [z.re, z.im]
            })
            .collect(),
        Measure::Curve { curve, .. } => {
            let (lo, hi) = match curve.domain() {
                (lo, hi) if hi.is_finite() => (lo, hi),
                (lo, _) if lo.is_finite() => (lo, lo + radius),
                _ => (-radius, radius),
            };
            (0..config.n)
                .map(|_| {
                    let u: f64 = StandardUniform.sample(&mut rng);
                    lo + (hi - lo) * u
                })
                .collect()
        }
    };
    GasState::assemble(&x, config)
}

/// One point of the descent trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

/// Real gradient direction in the flat coordinates.
fn flat_descent(f: &[C64], curve: bool) -> Vec<f64> {
    if curve {
        f.iter().map(|v| v.re).collect()
    } else {
        // ∇E = 2 ∂E/∂z̄ = −2 force
        f.iter().flat_map(|v| [2.0 * v.re, 2.0 * v.im]).collect()
    }
}

fn project(x: &mut [f64], config: &GasConfig) {
    if let Measure::Curve { curve, .. } = &config.measure {
        for s in x.iter_mut() {
            *s = curve.clamp(*s);
        }
    }
}

/// Gradient descent with Barzilai–Borwein steps and Armijo backtracking from
/// `start`. Energy never increases between accepted iterates.
pub fn minimize_from(start: &GasState, config: &GasConfig) -> Result<(GasState, Vec<TracePoint>), DysonError> {
    config.validate()?;
    let curve = config.is_curve();
    let mut x = check_state(start, config)?;
    let tol = config.tolerance();
    let mut z = unpack(&x, config).0;
    let mut e = energy_of(&z, &x, config)?;
    let mut f = forces_of(&z, &x, config);
    let mut d = flat_descent(&f, curve);
    let mut gmax = max_force(&f);
    let mut trace = vec![TracePoint {
        iteration: 0,
        energy: e,
        grad_norm: gmax,
    }];
    let dnorm = d.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut step = if dnorm > 0.0 {
        0.01 * config.t0().sqrt().max(1e-3) / dnorm
    } else {
        0.0
    };
    let mut iterations = 0;
    let mut converged = gmax < tol;
    while !converged && iterations < config.schedule.max_iterations {
        let mut accepted = None;
        let mut trial_step = step;
        for _ in 0..MAX_BACKTRACK {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + trial_step * b).collect();
            project(&mut xn, config);
            let zn = unpack(&xn, config).0;
            if let Ok(en) = energy_of(&zn, &xn, config) {
                let moved: f64 = xn.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
                if en <= e - ARMIJO * moved / trial_step {
                    accepted = Some((xn, zn, en));
                    break;
                }
            }
            trial_step *= 0.5;
        }
        let Some((xn, zn, en)) = accepted else { break };
        iterations += 1;
        let fnew = forces_of(&zn, &xn, config);
        let dnew = flat_descent(&fnew, curve);
        // BB1 step from the secant pair (descent directions are −∇E)
        let sy: f64 = xn
            .iter()
            .zip(&x)
            .zip(dnew.iter().zip(&d))
            .map(|((a, b), (g1, g0))| (a - b) * (g0 - g1))
            .sum();
        let ss: f64 = xn.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
        step = if sy > 0.0 { ss / sy } else { trial_step * 2.0 };
        x = xn;
        z = zn;
        e = en;
        f = fnew;
        d = dnew;
        gmax = max_force(&f);
        trace.push(TracePoint {
            iteration: iterations,
            energy: e,
            grad_norm: gmax,
        });
        converged = gmax < tol;
    }
    let params = if curve { Some(x) } else { None };
    Ok((
        GasState {
            positions: z,
            params,
            energy: e,
            converged,
            iterations,
            grad_norm: gmax,
        },
        trace,
    ))
}

/// Minimizes from the seeded initial configuration; with several restarts
/// (seeds `seed, seed + 1, …`) the converged run of lowest energy is kept.
pub fn minimize(config: &GasConfig) -> Result<GasState, DysonError> {
    Ok(minimize_traced(config)?.0)
}

pub fn minimize_traced(config: &GasConfig) -> Result<(GasState, Vec<TracePoint>), DysonError> {
    let mut best: Option<(GasState, Vec<TracePoint>)> = None;
    for r in 0..config.schedule.restarts.max(1) {
        let c = GasConfig {
            seed: config.seed.wrapping_add(r as u64),
            ..config.clone()
        };
        let start = initial_state(&c)?;
        let run = minimize_from(&start, &c)?;
        let better = match &best {
            None => true,
            Some((b, _)) => (run.0.converged, -run.0.energy) > (b.converged, -b.energy),
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Output of [`metropolis`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetropolisRun {
    pub samples: Vec<GasState>,
    /// Acceptance rate over the production sweeps.
    pub acceptance: f64,
    /// Frozen proposal scale.
    pub scale: f64,
    /// Set when the production acceptance falls outside `[1%, 99%]`.
    pub warning: Option<&'static str>,
}

struct Chain<'a> {
    config: &'a GasConfig,
    x: Vec<f64>,
    z: Vec<C64>,
    rng: ChaCha8Rng,
}

impl Chain<'_> {
    /// One Metropolis sweep over all particles; returns the number accepted.
    fn sweep(&mut self, scale: f64) -> usize {
        let config = self.config;
        let n = config.n;
        let mut accepted = 0;
        for j in 0..n {
            let old = coord(&self.x, j, config);
            let (new, znew) = match (old, &config.measure) {
                (Coord::Plane(z), _) => {
                    let a: f64 = StandardNormal.sample(&mut self.rng);
                    let b: f64 = StandardNormal.sample(&mut self.rng);
                    let zn = z + C64::new(a, b) * scale;
                    (Coord::Plane(zn), zn)
                }
                (Coord::Curve(s), Measure::Curve { curve, .. }) => {
                    let a: f64 = StandardNormal.sample(&mut self.rng);
                    let sn = s + a * scale;
                    (Coord::Curve(sn), curve.point(sn))
                }
                _ => unreachable!("coordinate kind fixed by the measure"),
            };
            let u: f64 = StandardUniform.sample(&mut self.rng);
            if let Coord::Curve(sn) = new {
                let (lo, hi) = match &config.measure {
                    Measure::Curve { curve, .. } => curve.domain(),
                    Measure::Plane(_) => unreachable!(),
                };
                if !(sn >= lo && sn <= hi) {
                    continue;
                }
            }
            let mut delta = (config.external(new) - config.external(old)) / config.hbar;
            let mut clash = false;
            for m in 0..n {
                if m == j {
                    continue;
                }
                let dn = (znew - self.z[m]).norm_sqr();
                if dn < MIN_SEPARATION * MIN_SEPARATION {
                    clash = true;
                    break;
                }
                delta -= dn.ln() - (self.z[j] - self.z[m]).norm_sqr().ln();
            }
            if clash {
                continue;
            }
            if delta <= 0.0 || u < (-delta).exp() {
                match new {
                    Coord::Plane(zn) => {
                        self.x[2 * j] = zn.re;
                        self.x[2 * j + 1] = zn.im;
                    }
                    Coord::Curve(sn) => self.x[j] = sn,
                }
                self.z[j] = znew;
                accepted += 1;
            }
        }
        accepted
    }
}

/// Metropolis–Hastings with single-particle Gaussian proposals. The proposal
/// scale is tuned towards 30–50% acceptance during burn-in, then frozen; one
/// sample is recorded every `thin` sweeps.
pub fn metropolis(config: &GasConfig, sweeps: usize) -> Result<MetropolisRun, DysonError> {
    let start = initial_state(config)?;
    let x = start.flat();
    let mut chain = Chain {
        config,
        z: start.positions.clone(),
        x,
        rng: ChaCha8Rng::seed_from_u64(config.seed ^ 0x6d65_7472_6f70_6f6c),
    };
    let n = config.n;
    let mut scale = 0.5 * (config.t0() / n as f64).sqrt();
    let window = 10;
    let mut acc = 0;
    for sweep in 1..=config.schedule.burn_in {
        acc += chain.sweep(scale);
        if sweep % window == 0 {
            let rate = acc as f64 / (window * n) as f64;
            if rate > 0.5 {
                scale *= 1.25;
            } else if rate < 0.3 {
                scale /= 1.25;
            }
            acc = 0;
        }
    }
    let mut samples = Vec::new();
    let mut total = 0;
    for sweep in 1..=sweeps {
        total += chain.sweep(scale);
        if sweep % config.schedule.thin == 0 {
            let mut s = GasState::assemble(&chain.x, config)?;
            s.iterations = sweep;
            samples.push(s);
        }
    }
    let acceptance = if sweeps == 0 {
        f64::NAN
    } else {
        total as f64 / (sweeps * n) as f64
    };
    let warning = if sweeps > 0 && !(0.01..=0.99).contains(&acceptance) {
        Some("acceptance outside [1%, 99%] after tuning")
    } else {
        None
    };
    Ok(MetropolisRun {
        samples,
        acceptance,
        scale,
        warning,
    })
}

/// Support of a gas state.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportEstimate {
    Plane {
        /// Smoothed radial maxima, pushed out by `edge_padding`, at the
        /// bin-centre angles around `center`.
        boundary: Vec<C64>,
        /// Radius `√ħ` of the disk of area `πħ` each charge occupies at
        /// equilibrium density `1/(πħ)`; the outermost charges sit this far
        /// inside the edge of the support.
        edge_padding: f64,
        center: C64,
        /// Least-squares Laurent fit of the boundary, parametrized by the polar angle.
        fitted_map: LaurentMap,
        /// Bin count actually used (reduced when bins were empty).
        bins: usize,
        warning: Option<&'static str>,
    },
    Curve {
        s_min: f64,
        s_max: f64,
        /// Particle counts in equal bins over `[s_min, s_max]`.
        histogram: Vec<usize>,
    },
}

pub const SUPPORT_BINS: usize = 32;
pub const SUPPORT_ORDER: usize = 8;

/// Radial maximum per angular bin about the centroid, smoothed once with
/// weights (¼, ½, ¼) and offset by the cell radius `√ħ`, plus a Laurent fit;
/// for curves the occupied parameter range and a histogram.
pub fn support_boundary(state: &GasState, config: &GasConfig) -> Result<SupportEstimate, DysonError> {
    check_state(state, config)?;
    if let Some(params) = &state.params {
        if params.is_empty() {
            return Err(DysonError::TooFewParticles { have: 0, need: 1 });
        }
        let s_min = params.iter().cloned().fold(f64::INFINITY, f64::min);
        let s_max = params.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let bins = SUPPORT_BINS;
        let mut histogram = vec![0; bins];
        let width = (s_max - s_min) / bins as f64;
        for s in params {
            let b = if width > 0.0 {
                (((s - s_min) / width) as usize).min(bins - 1)
            } else {
                0
            };
            histogram[b] += 1;
        }
        return Ok(SupportEstimate::Curve {
            s_min,
            s_max,
            histogram,
        });
    }
    let z = &state.positions;
    if z.len() < 32 {
        return Err(DysonError::TooFewParticles {
            have: z.len(),
            need: 32,
        });
    }
    let center = z.iter().sum::<C64>() / z.len() as f64;
    let mut bins = SUPPORT_BINS;
    let mut warning = None;
    let radii = loop {
        let mut best = vec![f64::NAN; bins];
        for p in z {
            let d = p - center;
            let phi = d.arg().rem_euclid(2.0 * PI);
            let b = ((phi / (2.0 * PI) * bins as f64) as usize).min(bins - 1);
            if !(best[b] >= d.norm()) {
                best[b] = d.norm();
            }
        }
        if best.iter().all(|r| r.is_finite()) {
            break best;
        }
        if bins <= 4 {
            return Err(DysonError::TooFewParticles {
                have: z.len(),
                need: 32,
            });
        }
        bins /= 2;
        warning = Some("empty angular bins; bin count reduced");
    };
    let edge_padding = config.hbar.sqrt();
    let smoothed: Vec<f64> = (0..bins)
        .map(|b| 0.25 * radii[(b + bins - 1) % bins] + 0.5 * radii[b] + 0.25 * radii[(b + 1) % bins] + edge_padding)
        .collect();
    let boundary: Vec<C64> = smoothed
        .iter()
        .enumerate()
        .map(|(b, r)| center + C64::from_polar(*r, 2.0 * PI * (b as f64 + 0.5) / bins as f64))
        .collect();
    if first_crossing(&boundary).is_some() {
        warning = Some("support boundary polyline self-intersects");
    }
    // rotate so that sample j sits at angle 2πj/bins, as the fit expects
    let shift = C64::from_polar(1.0, -PI / bins as f64);
    let samples: Vec<C64> = boundary.iter().map(|p| (p - center) * shift).collect();
    let order = SUPPORT_ORDER.min(bins / 2 - 2);
    let fit = LaurentMap::fit_circle(1.0, &samples, order)?;
    let mut coeffs = fit.coeffs().to_vec();
    coeffs[0] += center;
    let fitted_map = LaurentMap::new(fit.r(), coeffs)?;
    Ok(SupportEstimate::Plane {
        boundary,
        edge_padding,
        center,
        fitted_map,
        bins,
        warning,
    })
}

/// Leading-order free energy from minimized energies at `N − 1`, `N`, `N + 1`
/// with `ħ` fixed (so `Δt_0 = ħ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergy {
    /// `F(t_0) = −ħ² E_min(N)`.
    pub f: f64,
    /// `d²F/dt_0² ≈ −(E(N+1) − 2E(N) + E(N−1))`.
    pub d2f: f64,
    pub energies: [f64; 3],
}

pub fn free_energy_estimate(config: &GasConfig) -> Result<FreeEnergy, DysonError> {
    if config.n < 2 {
        return Err(DysonError::TooFewParticles {
            have: config.n,
            need: 2,
        });
    }
    let mut energies = [0.0; 3];
    for (slot, n) in energies.iter_mut().zip([config.n - 1, config.n, config.n + 1]) {
        let c = GasConfig { n, ..config.clone() };
        let state = minimize(&c)?;
        if !state.converged {
            return Err(DysonError::NotConverged {
                grad_norm: state.grad_norm,
            });
        }
        *slot = state.energy;
    }
    let h2 = config.hbar * config.hbar;
    Ok(FreeEnergy {
        f: -h2 * energies[1],
        d2f: -(energies[2] - 2.0 * energies[1] + energies[0]),
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn plane(n: usize, hbar: f64, times: Vec<C64>) -> GasConfig {
        GasConfig {
            n,
            hbar,
            times,
            measure: Measure::Plane(PotentialSpec::Quadratic),
            seed: 3,
            schedule: Schedule::default(),
        }
    }

    #[test]
    fn pair_energy_example() {
        let cfg = plane(2, 1.0, vec![]);
        let s = GasState::from_positions(vec![c(1.0, 0.0), c(-1.0, 0.0)], &cfg).unwrap();
        assert_relative_eq!(s.energy, -2.0 * 2f64.ln() + 2.0, epsilon = 1e-14);
    }

    #[test]
    fn coincident_points_are_an_error() {
        let cfg = plane(2, 1.0, vec![]);
        assert!(matches!(
            GasState::from_positions(vec![c(1.0, 0.0), c(1.0, 0.0)], &cfg),
            Err(DysonError::Coincident(0, 1))
        ));
    }

    #[test]
    fn single_particle_minimum() {
        let t1 = c(0.3, 0.0);
        let cfg = plane(1, 0.5, vec![t1]);
        let s = GasState::from_positions(vec![c(0.3, 0.0)], &cfg).unwrap();
        assert!(forces(&s, &cfg).unwrap()[0].norm() < 1e-15);
        assert_relative_eq!(s.energy, -0.09 / 0.5, epsilon = 1e-14);
        let m = minimize(&cfg).unwrap();
        assert!(m.converged);
        assert!((m.positions[0] - t1.conj()).norm() < 1e-8);
        let cfg = plane(1, 1.0, vec![c(0.2, 0.4)]);
        let m = minimize(&cfg).unwrap();
        assert!((m.positions[0] - c(0.2, -0.4)).norm() < 1e-8);
    }

    #[test]
    fn translation_covariance() {
        let cfg = plane(3, 0.7, vec![]);
        let z = vec![c(0.1, 0.2), c(-0.4, 0.3), c(0.5, -0.6)];
        let shift = c(0.3, -0.1);
        let e0 = GasState::from_positions(z.clone(), &cfg).unwrap().energy;
        let e1 = GasState::from_positions(z.iter().map(|p| p + shift).collect(), &cfg)
            .unwrap()
            .energy;
        let sum: C64 = z.iter().sum();
        // Σ_j |z_j + c|² − |z_j|² = 2 Re(c̄ Σ z_j) + N|c|²
        let expected = (2.0 * (shift.conj() * sum).re + 3.0 * shift.norm_sqr()) / 0.7;
        assert_relative_eq!(e1 - e0, expected, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_pair_forces_are_antisymmetric() {
        let cfg = plane(2, 1.0, vec![]);
        let s = GasState::from_positions(vec![c(0.8, 0.0), c(-0.8, 0.0)], &cfg).unwrap();
        let f = forces(&s, &cfg).unwrap();
        assert!((f[0] + f[1]).norm() < 1e-15);
        // equilibrium of the pair: 1/(2x) = x/ħ at x = √(ħ/2)
        let x = 0.5f64.sqrt();
        let s = GasState::from_positions(vec![c(x, 0.0), c(-x, 0.0)], &cfg).unwrap();
        assert!(max_force(&forces(&s, &cfg).unwrap()) < 1e-14);
    }

    #[test]
    fn forces_match_finite_differences() {
        let cfg = plane(4, 0.3, vec![c(0.1, 0.05), c(0.02, -0.03)]);
        let z = vec![c(0.1, 0.2), c(-0.4, 0.3), c(0.5, -0.6), c(0.0, -0.1)];
        let s = GasState::from_positions(z.clone(), &cfg).unwrap();
        let f = forces(&s, &cfg).unwrap();
        let delta = c(0.3, -0.7);
        for j in 0..4 {
            let mut errs = [0.0; 2];
            for (slot, eps) in errs.iter_mut().zip([1e-4, 5e-5]) {
                let mut zz = z.clone();
                zz[j] += delta * eps;
                let e = GasState::from_positions(zz, &cfg).unwrap().energy;
                // dE = 2 Re(δ conj(∂E/∂z̄)) with ∂E/∂z̄ = −force
                *slot = (e - s.energy - 2.0 * (delta * eps * (-f[j]).conj()).re).abs();
            }
            assert!(errs[0] / errs[1] > 3.0 && errs[0] / errs[1] < 5.0, "{errs:?}");
        }
    }

    #[test]
    fn energy_decreases_along_descent() {
        let cfg = plane(24, 1.0 / 24.0, vec![]);
        let (state, trace) = minimize_traced(&cfg).unwrap();
        assert!(trace.windows(2).all(|p| p[1].energy <= p[0].energy));
        assert!(state.converged);
    }

    #[test]
    fn curve_pair_on_real_line() {
        // V = s²/2: pair equilibrium 2/(2x) = x/ħ, x = √ħ
        let cfg = GasConfig {
            n: 2,
            hbar: 0.25,
            times: vec![],
            measure: Measure::Curve {
                curve: CurveSpec::RealLine,
                confine: Confinement::Quadratic { coefficient: 0.5 },
            },
            seed: 1,
            schedule: Schedule::default(),
        };
        let m = minimize(&cfg).unwrap();
        let mut p = m.params.unwrap();
        p.sort_by(f64::total_cmp);
        assert!((p[0] + 0.5).abs() < 1e-8 && (p[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn ray_wall_is_saturated_by_strong_pull() {
        let cfg = GasConfig {
            n: 40,
            hbar: 1.0 / 40.0,
            times: vec![c(-3.0, 0.0)],
            measure: Measure::Curve {
                curve: CurveSpec::ray(c(0.5, 0.0), c(1.0, 0.0)).unwrap(),
                confine: Confinement::Quadratic { coefficient: 0.5 },
            },
            seed: 9,
            schedule: Schedule::default(),
        };
        let m = minimize(&cfg).unwrap();
        let SupportEstimate::Curve { s_min, s_max, .. } = support_boundary(&m, &cfg).unwrap() else {
            panic!()
        };
        assert_eq!(s_min, 0.0);
        assert!(s_max > 0.0);
    }

    #[test]
    fn non_confining_times_are_rejected() {
        let cfg = plane(4, 0.25, vec![c(0.0, 0.0), c(0.0, 0.0), c(0.1, 0.0)]);
        assert!(matches!(cfg.validate(), Err(DysonError::NotConfining(_))));
        let cfg = plane(4, -1.0, vec![]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn synthetic_ring_support() {
        let cfg = plane(64, 1.0 / 64.0, vec![]);
        let z: Vec<C64> = (0..64)
            .map(|j| C64::from_polar(1.3, 2.0 * PI * j as f64 / 64.0 + 0.01))
            .collect();
        let s = GasState::from_positions(z, &cfg).unwrap();
        let SupportEstimate::Plane {
            boundary,
            center,
            fitted_map,
            bins,
            ..
        } = support_boundary(&s, &cfg).unwrap()
        else {
            panic!()
        };
        assert_eq!(bins, 32);
        let r = 1.3 + 0.125;
        assert!(boundary.iter().all(|p| ((p - center).norm() - r).abs() < 1e-12));
        assert_relative_eq!(fitted_map.r(), r, epsilon = 1e-12);
    }

    #[test]
    fn single_gaussian_particle_mean_square() {
        let cfg = GasConfig {
            schedule: Schedule {
                burn_in: 200,
                ..Schedule::default()
            },
            ..plane(1, 0.5, vec![])
        };
        let run = metropolis(&cfg, 40_000).unwrap();
        let mean: f64 = run.samples.iter().map(|s| s.positions[0].norm_sqr()).sum::<f64>() / run.samples.len() as f64;
        assert!((mean - 0.5).abs() < 0.03, "{mean}");
        assert!(run.warning.is_none());
        let again = metropolis(&cfg, 100).unwrap();
        let first = metropolis(&cfg, 100).unwrap();
        assert_eq!(again, first);
    }

    #[test]
    fn single_particle_free_energy_pieces() {
        // E_min = −|t_1|²/ħ for one particle
        let cfg = plane(1, 0.5, vec![c(0.3, 0.4)]);
        let m = minimize(&cfg).unwrap();
        assert_relative_eq!(m.energy, -0.25 / 0.5, epsilon = 1e-12);
        assert_relative_eq!(-0.25 * m.energy, 0.5 * 0.25, epsilon = 1e-12);
    }
}
