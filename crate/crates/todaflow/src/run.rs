//! Scenario execution: runs the module pipeline and writes its artifacts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io;
use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};
use thiserror::Error;
use todaflow_core::dyson::{self, SupportEstimate};
use todaflow_core::growth::{self, GrowthError, TrajectoryPoint};
use todaflow_core::hydro::{self, HydroError, Profile};
use todaflow_core::loewner::{self, Advance, LoewnerError};
use todaflow_core::{Grid, LaurentMap, C64};

use crate::config::{
    DysonSpec, GasMode, GrowSpec, HydroSpec, LoewnerSpec, MomentsSpec, ResolutionSpec, Scenario, ScenarioConfig,
    SpeedSpec,
};
use crate::output::{complex_columns, header, pair, real, Artifacts, Breakdown, InputRecord, Manifest, MapJson};
use crate::svg::Shape;

pub const MANIFEST: &str = "manifest.json";
const CIRCLE_POINTS: usize = 256;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write output to {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Breakdown,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: RunStatus,
    pub manifest: Manifest,
    pub directory: PathBuf,
}

impl RunReport {
    /// 0 on success, 2 on numerical breakdown.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Ok => 0,
            RunStatus::Breakdown => 2,
        }
    }
}

#[derive(Default)]
struct Outcome {
    breakdown: Option<Breakdown>,
    warnings: Vec<String>,
    diagnostics: BTreeMap<String, Value>,
}

impl Outcome {
    fn diag(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.to_string(), value.into());
    }

    fn real(&mut self, key: &str, x: f64) {
        // JSON has no infinities; those are reported as null
        self.diag(key, if x.is_finite() { json!(x) } else { Value::Null });
    }

    fn fail(&mut self, kind: &str, message: String, step: Option<usize>) {
        log::warn!("{kind} breakdown: {message}");
        self.breakdown = Some(Breakdown {
            kind: kind.to_string(),
            message,
            step,
        });
    }

    fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{message}");
        self.warnings.push(message);
    }
}

/// Executes the scenario, writing artifacts and `manifest.json` into the
/// output directory. Breakdowns keep the partial outputs.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let dir = config.output.directory.clone();
    let io_err = |source| RunError::Io {
        path: dir.clone(),
        source,
    };
    let mut art = Artifacts::create(&dir, config.output.formats).map_err(io_err)?;
    log::info!("running {} scenario into {}", config.scenario.name(), dir.display());
    let outcome = match &config.scenario {
        Scenario::Grow(g) => grow(g, config.resolution, &mut art),
        Scenario::Loewner(l) => run_loewner(l, config.seed, &mut art),
        Scenario::Hydro(h) => run_hydro(h, config.seed, &mut art),
        Scenario::Dyson(d) => run_dyson(d, config.seed, &mut art),
        Scenario::Moments(m) => run_moments(m, config.resolution, &mut art),
    }
    .map_err(io_err)?;
    let status = if outcome.breakdown.is_some() {
        RunStatus::Breakdown
    } else {
        RunStatus::Ok
    };
    let manifest = Manifest {
        tool: "todaflow".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        core_version: todaflow_core::VERSION.to_string(),
        scenario: config.scenario.name().to_string(),
        seed: config.seed,
        inputs: config.inputs.iter().map(InputRecord::from).collect(),
        formats: config.output.formats.names().iter().map(|s| s.to_string()).collect(),
        status: match status {
            RunStatus::Ok => "ok",
            RunStatus::Breakdown => "breakdown",
        }
        .to_string(),
        complete: status == RunStatus::Ok,
        breakdown: outcome.breakdown,
        warnings: outcome.warnings,
        diagnostics: outcome.diagnostics,
        files: art.files().to_vec(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    std::fs::write(dir.join(MANIFEST), bytes).map_err(io_err)?;
    Ok(RunReport {
        status,
        manifest,
        directory: dir,
    })
}

fn xy(points: impl IntoIterator<Item = C64>) -> Vec<(f64, f64)> {
    points.into_iter().map(|z| (z.re, z.im)).collect()
}

fn circle(center: C64, radius: f64) -> Vec<(f64, f64)> {
    xy((0..CIRCLE_POINTS).map(|j| center + C64::from_polar(radius, 2.0 * PI * j as f64 / CIRCLE_POINTS as f64)))
}

fn growth_kind(e: &GrowthError) -> &'static str {
    match e {
        GrowthError::Cusp { .. } => "cusp",
        GrowthError::Breakdown { .. } | GrowthError::NotUnivalent(_) => "univalence",
        GrowthError::SourceNotExterior(_) => "absorption",
        _ => "numerical",
    }
}

fn loewner_kind(e: &LoewnerError) -> &'static str {
    match e {
        LoewnerError::Breakdown { .. } | LoewnerError::InsufficientData { .. } => "absorption",
        _ => "numerical",
    }
}

fn hydro_kind(e: &HydroError) -> &'static str {
    match e {
        HydroError::Shock { .. } => "shock",
        HydroError::Loewner(l) => loewner_kind(l),
        _ => "numerical",
    }
}

/// Up to `count` evenly spaced indices into `0..len`, always including the last.
fn snapshot_indices(len: usize, count: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    if count <= 1 || len == 1 {
        return vec![len - 1];
    }
    let mut out: Vec<usize> = (0..count).map(|i| i * (len - 1) / (count - 1)).collect();
    out.dedup();
    out
}

fn grow(spec: &GrowSpec, res: ResolutionSpec, art: &mut Artifacts) -> io::Result<Outcome> {
    let mut out = Outcome::default();
    let resolution = res.resolution();
    let points = match growth::run(&spec.map, &spec.legs, &spec.potential, resolution, spec.moment_order) {
        Ok(p) => p,
        Err(e) => {
            out.fail(growth_kind(&e.source), e.source.to_string(), Some(e.step));
            e.partial
        }
    };
    let Some(last) = points.last() else {
        return Ok(out);
    };
    let width = points.iter().map(|p| p.map.coeffs().len()).max().unwrap_or(0);

    let mut cols = header(&["step", "leg", "time", "t0", "r"]);
    cols.extend(complex_columns("a", width, 0));
    cols.extend(header(&["leakage", "imag_residue", "min_derivative"]));
    let rows = points.iter().map(|p| {
        let mut row = vec![
            p.step.to_string(),
            p.leg.map(|l| l.to_string()).unwrap_or_default(),
            real(p.time),
            real(p.moments.t0),
            real(p.map.r()),
        ];
        for j in 0..width {
            let a = p.map.coeff(j);
            row.push(real(a.re));
            row.push(real(a.im));
        }
        row.push(real(p.diagnostics.leakage));
        row.push(real(p.diagnostics.imag_residue));
        row.push(real(p.diagnostics.min_derivative));
        row
    });
    art.csv("trajectory.csv", &cols, rows)?;
    art.csv(
        "moments.csv",
        &header(&["step", "k", "re_tk", "im_tk", "re_vk", "im_vk"]),
        points.iter().flat_map(moment_rows),
    )?;

    let snaps = snapshot_indices(points.len(), spec.snapshots);
    let contours: Vec<Vec<(f64, f64)>> = snaps
        .iter()
        .map(|&i| xy(points[i].map.boundary(res.grid()).values))
        .collect();
    art.json(
        "trajectory.json",
        &json!({
            "points": points.iter().map(|p| json!({
                "step": p.step,
                "time": p.time,
                "t0": p.moments.t0,
                "map": MapJson::from(&p.map),
            })).collect::<Vec<_>>(),
        }),
    )?;
    art.json(
        "contours.json",
        &snaps
            .iter()
            .zip(&contours)
            .map(|(&i, c)| {
                json!({
                    "step": points[i].step,
                    "t0": points[i].moments.t0,
                    "points": c.iter().map(|(x, y)| [*x, *y]).collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
    )?;
    art.json("final_map.json", &MapJson::from(&last.map))?;
    let shapes: Vec<Shape> = contours
        .into_iter()
        .map(|points| Shape::Path { points, closed: true })
        .collect();
    art.svg("contours.svg", &shapes)?;

    let first = &points[0];
    let drift = first
        .moments
        .t
        .iter()
        .zip(&last.moments.t)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    out.diag("steps", last.step);
    out.real("final_r", last.map.r());
    out.real("final_t0", last.moments.t0);
    out.real("max_moment_drift", drift);
    out.real(
        "max_leakage",
        points.iter().map(|p| p.diagnostics.leakage).fold(0.0, f64::max),
    );
    out.real(
        "max_imag_residue",
        points.iter().map(|p| p.diagnostics.imag_residue).fold(0.0, f64::max),
    );
    out.real(
        "min_derivative",
        points
            .iter()
            .map(|p| p.diagnostics.min_derivative)
            .fold(f64::INFINITY, f64::min),
    );
    Ok(out)
}

fn moment_rows(p: &TrajectoryPoint) -> Vec<Vec<String>> {
    (0..p.moments.t.len())
        .map(|i| {
            let t = p.moments.t[i];
            let v = p.moments.v.get(i).copied().unwrap_or_default();
            vec![
                p.step.to_string(),
                (i + 1).to_string(),
                real(t.re),
                real(t.im),
                real(v.re),
                real(v.im),
            ]
        })
        .collect()
}

fn run_loewner(spec: &LoewnerSpec, seed: u64, art: &mut Artifacts) -> io::Result<Outcome> {
    let mut out = Outcome::default();
    let family = match spec.family(seed) {
        Ok(f) => f,
        Err(e) => {
            out.fail(loewner_kind(&e), e.to_string(), None);
            return Ok(out);
        }
    };
    let span = spec.q_max - spec.q0;
    let qs: Vec<f64> = (0..spec.trace_points)
        .map(|i| {
            if i + 1 == spec.trace_points {
                spec.q_max
            } else {
                spec.q0 + span * i as f64 / (spec.trace_points - 1) as f64
            }
        })
        .collect();

    let mut tips = Vec::with_capacity(qs.len());
    for &q in &qs {
        match loewner::tip(&family, q) {
            Ok(z) => tips.push(z),
            Err(e) => {
                out.fail(loewner_kind(&e), e.to_string(), Some(tips.len()));
                break;
            }
        }
    }
    art.csv(
        "trace.csv",
        &header(&["q", "re_tip", "im_tip"]),
        qs.iter()
            .zip(&tips)
            .map(|(q, z)| vec![real(*q), real(z.re), real(z.im)]),
    )?;

    let mut eta_rows = Vec::new();
    let (mut eta_err, mut eta_spread) = (0.0f64, 0.0f64);
    if out.breakdown.is_none() {
        for i in 1..=spec.eta_samples {
            let q = spec.q0 + span * i as f64 / (spec.eta_samples + 1) as f64;
            match loewner::extract_eta(&family, q, spec.dq) {
                Ok(est) => {
                    let exact = family.driving().eta(q);
                    eta_err = eta_err.max((est.eta - exact).norm());
                    eta_spread = eta_spread.max(est.spread);
                    eta_rows.push(vec![
                        real(q),
                        real(est.eta.re),
                        real(est.eta.im),
                        real(est.spread),
                        est.alive.to_string(),
                        real(exact.re),
                        real(exact.im),
                    ]);
                }
                Err(e) => {
                    out.fail(loewner_kind(&e), e.to_string(), None);
                    break;
                }
            }
        }
    }
    art.csv(
        "eta.csv",
        &header(&[
            "q",
            "re_eta",
            "im_eta",
            "spread",
            "alive",
            "re_eta_driving",
            "im_eta_driving",
        ]),
        eta_rows,
    )?;

    let mut cap_rows = Vec::new();
    let mut cap_err = 0.0f64;
    if out.breakdown.is_none() {
        for &q in &qs {
            match loewner::capacity(&family, q) {
                Ok((r, diff)) => {
                    cap_err = cap_err.max((r.ln() - q).abs());
                    cap_rows.push(vec![real(q), real(r), real(r.ln() - q), real(diff)]);
                }
                Err(e) => {
                    out.fail(loewner_kind(&e), e.to_string(), None);
                    break;
                }
            }
        }
    }
    art.csv(
        "capacity.csv",
        &header(&["q", "r", "log_r_minus_q", "fit_difference"]),
        cap_rows,
    )?;

    let q_end = qs[tips.len().saturating_sub(1)];
    let mut absorbed = 0;
    match family.track(q_end) {
        Ok(tracked) => {
            let pairs: Vec<Value> = family
                .z_samples()
                .iter()
                .zip(&tracked)
                .map(|(z, a)| match a {
                    Advance::Alive(w) => json!({"z": pair(*z), "w": pair(*w)}),
                    Advance::Absorbed { q } => {
                        absorbed += 1;
                        json!({"z": pair(*z), "w": Value::Null, "absorbed_at": q})
                    }
                })
                .collect();
            art.json("family.json", &json!({"q": q_end, "r0": family.r0(), "pairs": pairs}))?;
        }
        Err(e) => {
            if out.breakdown.is_none() {
                out.fail(loewner_kind(&e), e.to_string(), None);
            }
        }
    }
    art.svg(
        "trace.svg",
        &[
            Shape::Path {
                points: circle(C64::new(0.0, 0.0), family.r0()),
                closed: true,
            },
            Shape::Path {
                points: xy(tips.iter().copied()),
                closed: false,
            },
        ],
    )?;

    if let Some(z) = tips.last() {
        out.diag("final_tip", json!(pair(*z)));
    }
    out.real("max_abs_im_tip", tips.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
    out.real("max_eta_error", eta_err);
    out.real("max_eta_spread", eta_spread);
    out.real("max_capacity_error", cap_err);
    out.diag("absorbed_points", absorbed);
    Ok(out)
}

fn run_hydro(spec: &HydroSpec, seed: u64, art: &mut Artifacts) -> io::Result<Outcome> {
    let mut out = Outcome::default();
    let mut table: Option<Profile> = None;
    let mut closed_k1: Option<todaflow_core::LoewnerFamily> = None;
    match &spec.speed {
        SpeedSpec::Table(p) => table = Some(p.clone()),
        SpeedSpec::Loewner {
            k,
            family,
            table_points,
        } => {
            let fam = match family.family(seed) {
                Ok(f) => f,
                Err(e) => {
                    out.fail(loewner_kind(&e), e.to_string(), None);
                    return Ok(out);
                }
            };
            let qs: Vec<f64> = (0..*table_points)
                .map(|i| fam.q0() + (fam.q_max() - fam.q0()) * i as f64 / (*table_points - 1) as f64)
                .collect();
            let mut cs = Vec::with_capacity(qs.len());
            for &q in &qs {
                match hydro::characteristic_speed(*k, &fam, q) {
                    Ok(c) => cs.push(c),
                    Err(e) => {
                        out.fail(hydro_kind(&e), e.to_string(), None);
                        return Ok(out);
                    }
                }
            }
            table = Some(Profile::new(qs, cs).expect("increasing finite table"));
            if *k == 1 {
                closed_k1 = Some(fam);
            }
        }
        _ => {}
    }
    if let Some(t) = &table {
        art.csv(
            "speed.csv",
            &header(&["q", "c"]),
            t.grid().iter().zip(t.values()).map(|(q, c)| vec![real(*q), real(*c)]),
        )?;
    }
    let speed = |q: f64| -> f64 {
        match &spec.speed {
            SpeedSpec::Constant(c) => *c,
            SpeedSpec::Linear { a, b } => a + b * q,
            _ => match &closed_k1 {
                Some(fam) => 2.0 * q.exp() * fam.driving().theta(q).cos(),
                None => table.as_ref().expect("tabulated").eval(q),
            },
        }
    };
    let initial = &spec.profile;
    let s_star = hydro::shock_time(initial, &speed);
    out.real("s", spec.s);
    out.real("s_star", s_star);
    out.diag("shock_free", !s_star.is_finite());
    art.csv(
        "initial.csv",
        &header(&["t0", "q"]),
        initial
            .grid()
            .iter()
            .zip(initial.values())
            .map(|(t, q)| vec![real(*t), real(*q)]),
    )?;
    let mut shapes = vec![Shape::Path {
        points: initial
            .grid()
            .iter()
            .copied()
            .zip(initial.values().iter().copied())
            .collect(),
        closed: false,
    }];
    let solved = match hydro::solve_characteristics(initial, &speed, spec.s) {
        Ok(p) => Some(p),
        Err(e) => {
            out.fail(hydro_kind(&e), e.to_string(), None);
            None
        }
    };
    if let Some(p) = &solved {
        art.csv(
            "solution.csv",
            &header(&["t0", "q"]),
            p.grid().iter().zip(p.values()).map(|(t, q)| vec![real(*t), real(*q)]),
        )?;
        shapes.push(Shape::Path {
            points: p.grid().iter().copied().zip(p.values().iter().copied()).collect(),
            closed: false,
        });
    }
    art.json(
        "solution.json",
        &json!({
            "s": spec.s,
            "s_star": if s_star.is_finite() { json!(s_star) } else { Value::Null },
            "t0": initial.grid(),
            "q_initial": initial.values(),
            "q": solved.as_ref().map(|p| p.values().to_vec()),
        }),
    )?;
    art.svg("profile.svg", &shapes)?;
    Ok(out)
}

fn run_dyson(spec: &DysonSpec, seed: u64, art: &mut Artifacts) -> io::Result<Outcome> {
    let mut out = Outcome::default();
    let gas = spec.gas(seed);
    out.real("hbar", gas.hbar);
    out.real("t0", gas.t0());
    let state = match spec.mode {
        GasMode::Minimize => match dyson::minimize_traced(&gas) {
            Ok((state, trace)) => {
                art.csv(
                    "energy.csv",
                    &header(&["iteration", "energy", "grad_norm"]),
                    trace
                        .iter()
                        .map(|t| vec![t.iteration.to_string(), real(t.energy), real(t.grad_norm)]),
                )?;
                out.diag("converged", state.converged);
                out.diag("iterations", state.iterations);
                out.real("grad_norm", state.grad_norm);
                out.real("tolerance", gas.tolerance());
                if !state.converged {
                    out.warn(format!(
                        "minimizer stopped after {} iterations with max |force| = {:e} (tolerance {:e})",
                        state.iterations,
                        state.grad_norm,
                        gas.tolerance()
                    ));
                }
                state
            }
            Err(e) => {
                out.fail("numerical", e.to_string(), None);
                return Ok(out);
            }
        },
        GasMode::Metropolis { sweeps } => match dyson::metropolis(&gas, sweeps) {
            Ok(run) => {
                art.csv(
                    "samples.csv",
                    &header(&["sample", "index", "re_z", "im_z"]),
                    run.samples.iter().enumerate().flat_map(|(s, st)| {
                        st.positions
                            .iter()
                            .enumerate()
                            .map(move |(i, z)| vec![s.to_string(), i.to_string(), real(z.re), real(z.im)])
                    }),
                )?;
                out.real("acceptance", run.acceptance);
                out.real("proposal_scale", run.scale);
                out.diag("samples", run.samples.len());
                if let Some(w) = run.warning {
                    out.warn(w);
                }
                match run.samples.last() {
                    Some(s) => s.clone(),
                    None => {
                        out.fail("numerical", "sampler produced no samples".to_string(), None);
                        return Ok(out);
                    }
                }
            }
            Err(e) => {
                out.fail("numerical", e.to_string(), None);
                return Ok(out);
            }
        },
    };
    out.real("energy", state.energy);
    art.csv(
        "state.csv",
        &header(&["index", "re_z", "im_z"]),
        state
            .positions
            .iter()
            .enumerate()
            .map(|(i, z)| vec![i.to_string(), real(z.re), real(z.im)]),
    )?;
    let mut shapes = vec![Shape::Dots(xy(state.positions.iter().copied()))];
    match dyson::support_boundary(&state, &gas) {
        Ok(SupportEstimate::Plane {
            boundary,
            edge_padding,
            center,
            fitted_map,
            bins,
            warning,
        }) => {
            if let Some(w) = warning {
                out.warn(w);
            }
            let radii: Vec<f64> = boundary.iter().map(|z| (z - center).norm()).collect();
            let mean = radii.iter().sum::<f64>() / radii.len() as f64;
            out.real("support_r", fitted_map.r());
            out.real("support_mean_radius", mean);
            art.json(
                "support.json",
                &json!({
                    "boundary": boundary.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
                    "fitted_map": MapJson::from(&fitted_map),
                    "center": pair(center),
                    "edge_padding": edge_padding,
                    "bins": bins,
                }),
            )?;
            shapes.push(Shape::Path {
                points: xy(boundary),
                closed: true,
            });
        }
        Ok(SupportEstimate::Curve {
            s_min,
            s_max,
            histogram,
        }) => {
            let (a, b) = match &gas.measure {
                dyson::Measure::Curve { curve, .. } => (curve.point(s_min), curve.point(s_max)),
                dyson::Measure::Plane(_) => unreachable!("curve estimate from a curve gas"),
            };
            out.real("support_s_min", s_min);
            out.real("support_s_max", s_max);
            art.json(
                "support.json",
                &json!({
                    "s_min": s_min,
                    "s_max": s_max,
                    "endpoints": [pair(a), pair(b)],
                    "histogram": histogram,
                }),
            )?;
        }
        Err(e) => out.warn(format!("support estimate unavailable: {e}")),
    }
    art.svg("gas.svg", &shapes)?;
    if spec.free_energy {
        match dyson::free_energy_estimate(&gas) {
            Ok(fe) => {
                out.real("free_energy", fe.f);
                out.real("free_energy_d2", fe.d2f);
                art.json(
                    "free_energy.json",
                    &json!({"t0": gas.t0(), "f": fe.f, "d2f": fe.d2f, "energies": fe.energies}),
                )?;
            }
            Err(e) => out.fail("numerical", e.to_string(), None),
        }
    }
    Ok(out)
}

fn run_moments(spec: &MomentsSpec, res: ResolutionSpec, art: &mut Artifacts) -> io::Result<Outcome> {
    let mut out = Outcome::default();
    let grid: Grid = res.grid();
    let map: &LaurentMap = &spec.map;
    let mv = match growth::moments(map, grid, spec.order) {
        Ok(m) => m,
        Err(e) => {
            out.fail(growth_kind(&e), e.to_string(), None);
            return Ok(out);
        }
    };
    art.csv(
        "moments.csv",
        &header(&["k", "re_tk", "im_tk", "re_vk", "im_vk"]),
        (0..mv.t.len()).map(|i| {
            let (t, v) = (mv.t[i], mv.v[i]);
            vec![(i + 1).to_string(), real(t.re), real(t.im), real(v.re), real(v.im)]
        }),
    )?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut identity = 0.0f64;
    for (j, w) in grid.nodes().enumerate() {
        let z = map.evaluate(w).expect("boundary of a valid map");
        match growth::orlov_shulman(map, &mv, w) {
            Ok(m) => {
                identity = identity.max((m - z.norm_sqr()).norm());
                rows.push(vec![
                    real(grid.theta(j)),
                    real(z.re),
                    real(z.im),
                    real(m.re),
                    real(m.im),
                    real(z.norm_sqr()),
                ]);
            }
            Err(e) => {
                out.fail(growth_kind(&e), e.to_string(), None);
                break;
            }
        }
    }
    art.csv(
        "orlov.csv",
        &header(&["theta", "re_z", "im_z", "re_m", "im_m", "abs_z_squared"]),
        rows,
    )?;
    art.json(
        "moments.json",
        &json!({
            "t0": mv.t0,
            "t": mv.t.iter().map(|c| pair(*c)).collect::<Vec<_>>(),
            "v": mv.v.iter().map(|c| pair(*c)).collect::<Vec<_>>(),
        }),
    )?;
    art.svg(
        "contour.svg",
        &[Shape::Path {
            points: xy(map.boundary(grid).values),
            closed: true,
        }],
    )?;
    out.real("t0", mv.t0);
    out.real("max_orlov_identity_error", identity);
    Ok(out)
}
