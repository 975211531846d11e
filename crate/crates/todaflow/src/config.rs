//! Scenario configuration: strict JSON schema, validated up front.
//!
//! Every problem found is reported with the JSON pointer of the offending
//! value; parsing never stops at the first one.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;
use todaflow_core::dyson::{Confinement, CurveSpec, GasConfig, Measure, Schedule};
use todaflow_core::growth::{FlowKind, FlowSpec, Leg, PotentialSpec, Resolution};
use todaflow_core::hydro::Profile;
use todaflow_core::loewner::{LoewnerError, BASE_STEP};
use todaflow_core::{DrivingFunction, Grid, LaurentMap, LoewnerFamily, C64};

const SCENARIOS: [&str; 5] = ["grow", "loewner", "hydro", "dyson", "moments"];
const DEFAULT_ORDER: usize = 16;
const DEFAULT_GRID: usize = 128;
const DEFAULT_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// JSON pointer of the offending value (`""` is the document root).
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pointer.is_empty() {
            write!(f, "(root): {}", self.message)
        } else {
            write!(f, "{}: {}", self.pointer, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Syntax(String),
    #[error("invalid config:\n{}", list(.0))]
    Invalid(Vec<ConfigIssue>),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn list(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

impl ConfigError {
    pub fn issues(&self) -> &[ConfigIssue] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            csv: true,
            json: true,
            svg: true,
        }
    }
}

impl Formats {
    /// Parses a comma-separated list such as `csv,svg`.
    pub fn parse_list(text: &str) -> Result<Self, String> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            f.set(item)?;
        }
        Ok(f)
    }

    fn set(&mut self, name: &str) -> Result<(), String> {
        match name {
            "csv" => self.csv = true,
            "json" => self.json = true,
            "svg" => self.svg = true,
            other => return Err(format!("unknown format {other:?} (expected csv, json or svg)")),
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.csv {
            v.push("csv");
        }
        if self.json {
            v.push("json");
        }
        if self.svg {
            v.push("svg");
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub formats: Formats,
}

/// Resolution overrides: series order `M`, grid size `n` and the default
/// number of steps per growth leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionSpec {
    pub order: usize,
    pub n: usize,
    pub steps: usize,
}

impl ResolutionSpec {
    pub fn resolution(&self) -> Resolution {
        Resolution {
            order: self.order,
            grid: self.grid(),
        }
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n).expect("grid size validated")
    }
}

#[derive(Debug, Clone)]
pub struct GrowSpec {
    pub map: LaurentMap,
    pub potential: PotentialSpec,
    pub legs: Vec<Leg>,
    pub moment_order: usize,
    /// Number of contour snapshots drawn.
    pub snapshots: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DrivingSpec {
    Constant(f64),
    PiecewiseLinear(Vec<(f64, f64)>),
    Brownian { kappa: f64, dq_grid: f64 },
}

impl DrivingSpec {
    pub fn build(&self, seed: u64, q0: f64, q_max: f64) -> Result<DrivingFunction, LoewnerError> {
        match self {
            DrivingSpec::Constant(theta) => DrivingFunction::constant(*theta),
            DrivingSpec::PiecewiseLinear(knots) => DrivingFunction::piecewise_linear(knots.clone()),
            DrivingSpec::Brownian { kappa, dq_grid } => DrivingFunction::brownian(*kappa, seed, *dq_grid, q0, q_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerSpec {
    pub q0: f64,
    pub q_max: f64,
    pub driving: DrivingSpec,
    /// Points `z` whose preimages are followed; `None` uses the default ring.
    pub tracked_points: Option<Vec<C64>>,
    pub trace_points: usize,
    pub eta_samples: usize,
    pub dq: f64,
    pub base_step: f64,
}

impl LoewnerSpec {
    pub fn family(&self, seed: u64) -> Result<LoewnerFamily, LoewnerError> {
        let driving = self.driving.build(seed, self.q0, self.q_max)?;
        let family = match &self.tracked_points {
            Some(points) => LoewnerFamily::with_samples(self.q0, self.q_max, driving, points.clone())?,
            None => LoewnerFamily::new(self.q0, self.q_max, driving)?,
        };
        family.with_base_step(self.base_step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpeedSpec {
    Constant(f64),
    /// `c(q) = a + b q`; `"burgers"` is `a = 0, b = 1`.
    Linear {
        a: f64,
        b: f64,
    },
    /// Monotone-cubic interpolation of `(q, c)` pairs.
    Table(Profile),
    /// `c_k(q)` of a Löwner family, tabulated on `table_points` nodes.
    Loewner {
        k: usize,
        family: LoewnerSpec,
        table_points: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HydroSpec {
    pub profile: Profile,
    pub speed: SpeedSpec,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    RealLine,
    Ray { origin: C64, direction: C64 },
    Parametric(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSpec {
    Plane,
    Curve { curve: CurveKind, coefficient: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GasMode {
    Minimize,
    Metropolis { sweeps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DysonSpec {
    pub n: usize,
    pub hbar: f64,
    pub times: Vec<C64>,
    pub measure: MeasureSpec,
    pub mode: GasMode,
    pub schedule: Schedule,
    pub free_energy: bool,
}

impl DysonSpec {
    pub fn gas(&self, seed: u64) -> GasConfig {
        let measure = match &self.measure {
            MeasureSpec::Plane => Measure::Plane(PotentialSpec::Quadratic),
            MeasureSpec::Curve { curve, coefficient } => Measure::Curve {
                curve: match curve {
                    CurveKind::RealLine => CurveSpec::RealLine,
                    CurveKind::Ray { origin, direction } => CurveSpec::ray(*origin, *direction).expect("ray validated"),
                    CurveKind::Parametric(points) => CurveSpec::parametric(points.clone()).expect("curve validated"),
                },
                confine: Confinement::Quadratic {
                    coefficient: *coefficient,
                },
            },
        };
        GasConfig {
            n: self.n,
            hbar: self.hbar,
            times: self.times.clone(),
            measure,
            seed,
            schedule: self.schedule,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsSpec {
    pub map: LaurentMap,
    pub order: usize,
}

#[derive(Debug, Clone)]
pub enum Scenario {
    Grow(GrowSpec),
    Loewner(LoewnerSpec),
    Hydro(HydroSpec),
    Dyson(DysonSpec),
    Moments(MomentsSpec),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Grow(_) => "grow",
            Scenario::Loewner(_) => "loewner",
            Scenario::Hydro(_) => "hydro",
            Scenario::Dyson(_) => "dyson",
            Scenario::Moments(_) => "moments",
        }
    }
}

/// A file read while parsing, hashed for the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub output: OutputSpec,
    pub resolution: ResolutionSpec,
    /// The config text itself comes first.
    pub inputs: Vec<InputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses config text; relative paths inside it resolve against the working directory.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_in(text, Path::new("."), "<text>")
}

/// Reads and parses a config file; relative paths resolve against its directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_in(&text, base, &path.display().to_string())
}

fn parse_config_in(text: &str, base: &Path, label: &str) -> Result<ScenarioConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let mut ck = Checker {
        issues: Vec::new(),
        base: base.to_path_buf(),
        inputs: vec![InputFile {
            path: label.to_string(),
            sha256: sha256_hex(text.as_bytes()),
        }],
    };
    let config = ck.root(&root);
    match config {
        Some(c) if ck.issues.is_empty() => Ok(ScenarioConfig { inputs: ck.inputs, ..c }),
        _ => {
            if ck.issues.is_empty() {
                ck.push("", "invalid config");
            }
            Err(ConfigError::Invalid(ck.issues))
        }
    }
}

fn child(ptr: &str, key: &str) -> String {
    format!("{ptr}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn index(ptr: &str, i: usize) -> String {
    format!("{ptr}/{i}")
}

struct Checker {
    issues: Vec<ConfigIssue>,
    base: PathBuf,
    inputs: Vec<InputFile>,
}

impl Checker {
    fn push(&mut self, pointer: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            pointer: pointer.to_string(),
            message: message.into(),
        });
    }

    fn object<'a>(&mut self, v: &'a Value, ptr: &str, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Some(m) = v.as_object() else {
            self.push(ptr, "expected an object");
            return None;
        };
        for key in m.keys() {
            if !allowed.contains(&key.as_str()) {
                self.push(
                    &child(ptr, key),
                    format!("unknown key (allowed: {})", allowed.join(", ")),
                );
            }
        }
        Some(m)
    }

    fn required<'a>(&mut self, m: &'a Map<String, Value>, ptr: &str, key: &str) -> Option<&'a Value> {
        let v = m.get(key);
        if v.is_none() {
            self.push(&child(ptr, key), "missing required key");
        }
        v
    }

    /// Object with exactly one key, returned with its value.
    fn tagged<'a>(&mut self, v: &'a Value, ptr: &str, tags: &[&str]) -> Option<(&'a str, &'a Value)> {
        let m = self.object(v, ptr, tags)?;
        if m.len() != 1 {
            self.push(ptr, format!("expected exactly one of: {}", tags.join(", ")));
            return None;
        }
        let (k, v) = m.iter().next().expect("one entry");
        tags.contains(&k.as_str()).then_some((k.as_str(), v))
    }

    fn number(&mut self, v: &Value, ptr: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.push(ptr, "expected a finite number");
                None
            }
        }
    }

    fn integer(&mut self, v: &Value, ptr: &str) -> Option<u64> {
        let out = v.as_u64();
        if out.is_none() {
            self.push(ptr, "expected a non-negative integer");
        }
        out
    }

    fn boolean(&mut self, v: &Value, ptr: &str) -> Option<bool> {
        let out = v.as_bool();
        if out.is_none() {
            self.push(ptr, "expected true or false");
        }
        out
    }

    fn string<'a>(&mut self, v: &'a Value, ptr: &str) -> Option<&'a str> {
        let out = v.as_str();
        if out.is_none() {
            self.push(ptr, "expected a string");
        }
        out
    }

    fn array<'a>(&mut self, v: &'a Value, ptr: &str) -> Option<&'a Vec<Value>> {
        let out = v.as_array();
        if out.is_none() {
            self.push(ptr, "expected an array");
        }
        out
    }

    fn complex(&mut self, v: &Value, ptr: &str) -> Option<C64> {
        match v.as_array().map(Vec::as_slice) {
            Some([re, im]) => {
                let re = self.number(re, &index(ptr, 0));
                let im = self.number(im, &index(ptr, 1));
                Some(C64::new(re?, im?))
            }
            _ => {
                self.push(ptr, "expected a complex number [re, im]");
                None
            }
        }
    }

    fn complex_list(&mut self, v: &Value, ptr: &str) -> Option<Vec<C64>> {
        let items = self.array(v, ptr)?;
        let parsed: Vec<Option<C64>> = items
            .iter()
            .enumerate()
            .map(|(i, x)| self.complex(x, &index(ptr, i)))
            .collect();
        parsed.into_iter().collect()
    }

    fn real_list(&mut self, v: &Value, ptr: &str) -> Option<Vec<f64>> {
        let items = self.array(v, ptr)?;
        let parsed: Vec<Option<f64>> = items
            .iter()
            .enumerate()
            .map(|(i, x)| self.number(x, &index(ptr, i)))
            .collect();
        parsed.into_iter().collect()
    }

    fn opt_number(&mut self, m: &Map<String, Value>, ptr: &str, key: &str) -> Option<Option<f64>> {
        match m.get(key) {
            None => Some(None),
            Some(v) => self.number(v, &child(ptr, key)).map(Some),
        }
    }

    fn opt_integer(&mut self, m: &Map<String, Value>, ptr: &str, key: &str) -> Option<Option<u64>> {
        match m.get(key) {
            None => Some(None),
            Some(v) => self.integer(v, &child(ptr, key)).map(Some),
        }
    }

    /// Optional integer within `[min, max]`, falling back to `default`.
    fn count(&mut self, m: &Map<String, Value>, ptr: &str, key: &str, default: usize, min: usize, max: usize) -> usize {
        match self.opt_integer(m, ptr, key) {
            Some(Some(x)) if (min as u64..=max as u64).contains(&x) => x as usize,
            Some(Some(_)) => {
                self.push(&child(ptr, key), format!("must lie in [{min}, {max}]"));
                default
            }
            _ => default,
        }
    }

    /// Optional number satisfying `ok`, falling back to `default`.
    fn real(
        &mut self,
        m: &Map<String, Value>,
        ptr: &str,
        key: &str,
        default: f64,
        ok: fn(f64) -> bool,
        what: &str,
    ) -> f64 {
        match self.opt_number(m, ptr, key) {
            Some(Some(x)) if ok(x) => x,
            Some(Some(_)) => {
                self.push(&child(ptr, key), format!("must be {what}"));
                default
            }
            _ => default,
        }
    }

    fn root(&mut self, root: &Value) -> Option<ScenarioConfig> {
        let mut allowed = vec!["scenario", "seed", "output", "resolution"];
        allowed.extend(SCENARIOS);
        let m = self.object(root, "", &allowed)?;

        let present: Vec<&str> = SCENARIOS.iter().copied().filter(|s| m.contains_key(*s)).collect();
        let declared = m.get("scenario").and_then(|v| self.string(v, "/scenario"));
        if let Some(d) = declared {
            if !SCENARIOS.contains(&d) {
                self.push(
                    "/scenario",
                    format!("unknown scenario {d:?} (expected one of {})", SCENARIOS.join(", ")),
                );
            }
        }
        let chosen = match present.as_slice() {
            [] => {
                self.push("", format!("no scenario section; add one of {}", SCENARIOS.join(", ")));
                None
            }
            [one] => {
                if let Some(d) = declared {
                    if SCENARIOS.contains(&d) && d != *one {
                        self.push(
                            "/scenario",
                            format!("declares {d:?} but the section present is {one:?}"),
                        );
                    }
                }
                Some(*one)
            }
            many => {
                let names: Vec<String> = many.iter().map(|s| format!("/{s}")).collect();
                self.push(
                    "",
                    format!("exactly one scenario section allowed, found {}", names.join(" and ")),
                );
                None
            }
        };

        let seed = match m.get("seed") {
            None => 0,
            Some(v) => self.integer(v, "/seed").unwrap_or(0),
        };
        let output = self.output(m.get("output"));
        let resolution = self.resolution(m.get("resolution"));

        let name = chosen?;
        let section = &m[name];
        let ptr = format!("/{name}");
        let scenario = match name {
            "grow" => Scenario::Grow(self.grow(section, &ptr, resolution?)?),
            "loewner" => Scenario::Loewner(self.loewner(section, &ptr, seed)?),
            "hydro" => Scenario::Hydro(self.hydro(section, &ptr, seed)?),
            "dyson" => Scenario::Dyson(self.dyson(section, &ptr, seed)?),
            "moments" => Scenario::Moments(self.moments(section, &ptr, resolution?)?),
            _ => unreachable!("scenario names are fixed"),
        };
        Some(ScenarioConfig {
            scenario,
            seed,
            output: output?,
            resolution: resolution?,
            inputs: Vec::new(),
        })
    }

    fn output(&mut self, v: Option<&Value>) -> Option<OutputSpec> {
        let mut out = OutputSpec {
            directory: PathBuf::from("out"),
            formats: Formats::default(),
        };
        let Some(v) = v else { return Some(out) };
        let m = self.object(v, "/output", &["directory", "formats"])?;
        if let Some(d) = m.get("directory") {
            let d = self.string(d, "/output/directory")?;
            if d.is_empty() {
                self.push("/output/directory", "must not be empty");
                return None;
            }
            out.directory = PathBuf::from(d);
        }
        if let Some(f) = m.get("formats") {
            let items = self.array(f, "/output/formats")?;
            let mut formats = Formats {
                csv: false,
                json: false,
                svg: false,
            };
            for (i, item) in items.iter().enumerate() {
                let p = index("/output/formats", i);
                let name = self.string(item, &p)?;
                if let Err(e) = formats.set(name) {
                    self.push(&p, e);
                }
            }
            out.formats = formats;
        }
        Some(out)
    }

    fn resolution(&mut self, v: Option<&Value>) -> Option<ResolutionSpec> {
        let mut res = ResolutionSpec {
            order: DEFAULT_ORDER,
            n: DEFAULT_GRID,
            steps: DEFAULT_STEPS,
        };
        let Some(v) = v else { return Some(res) };
        let m = self.object(v, "/resolution", &["M", "n", "steps"])?;
        res.order = self.count(m, "/resolution", "M", DEFAULT_ORDER, 0, 4096);
        res.n = self.count(m, "/resolution", "n", DEFAULT_GRID, 4, 1 << 20);
        res.steps = self.count(m, "/resolution", "steps", DEFAULT_STEPS, 1, 100_000_000);
        if Grid::new(res.n).is_err() {
            self.push("/resolution/n", "must be a power of two");
            return None;
        }
        if let Err(e) = Grid::new(res.n).expect("checked").supports_order(res.order) {
            self.push("/resolution", e.to_string());
            return None;
        }
        Some(res)
    }

    fn map(&mut self, v: &Value, ptr: &str, res: ResolutionSpec) -> Option<LaurentMap> {
        let m = self.object(v, ptr, &["r", "coeffs"])?;
        let r = self
            .required(m, ptr, "r")
            .and_then(|v| self.number(v, &child(ptr, "r")));
        let coeffs = match m.get("coeffs") {
            None => Some(Vec::new()),
            Some(c) => self.complex_list(c, &child(ptr, "coeffs")),
        };
        let (r, coeffs) = (r?, coeffs?);
        if !(r > 0.0) {
            self.push(&child(ptr, "r"), "must be positive");
            return None;
        }
        if coeffs.len() > res.order + 1 {
            self.push(
                &child(ptr, "coeffs"),
                format!(
                    "{} coefficients exceed resolution order M = {}",
                    coeffs.len(),
                    res.order
                ),
            );
            return None;
        }
        let map = match LaurentMap::new(r, coeffs) {
            Ok(map) => map,
            Err(e) => {
                self.push(ptr, e.to_string());
                return None;
            }
        };
        if let Err(e) = map.check_univalent(res.grid()) {
            self.push(ptr, e.to_string());
            return None;
        }
        Some(map)
    }

    fn grow(&mut self, v: &Value, ptr: &str, res: ResolutionSpec) -> Option<GrowSpec> {
        let m = self.object(v, ptr, &["map", "potential", "legs", "moment_order", "snapshots"])?;
        let map = self
            .required(m, ptr, "map")
            .and_then(|v| self.map(v, &child(ptr, "map"), res));
        if let Some(p) = m.get("potential") {
            let p_ptr = child(ptr, "potential");
            if let Some(name) = self.string(p, &p_ptr) {
                if name != "quadratic" {
                    self.push(&p_ptr, "only \"quadratic\" is supported from a config file");
                }
            }
        }
        let moment_order = self.count(m, ptr, "moment_order", res.order.max(1), 1, 4096);
        let snapshots = self.count(m, ptr, "snapshots", 9, 1, 10_000);
        let legs_ptr = child(ptr, "legs");
        let legs_v = self.required(m, ptr, "legs").and_then(|v| self.array(v, &legs_ptr));
        let map = map?;
        let legs_v = legs_v?;
        if legs_v.is_empty() {
            self.push(&legs_ptr, "need at least one leg");
            return None;
        }
        if let Err(e) = res.grid().supports_order(moment_order) {
            self.push(&child(ptr, "moment_order"), e.to_string());
        }
        let mut t0 = map.area() / std::f64::consts::PI;
        let mut legs = Vec::with_capacity(legs_v.len());
        for (i, leg) in legs_v.iter().enumerate() {
            let lp = index(&legs_ptr, i);
            if let Some(l) = self.leg(leg, &lp, &map, res, &mut t0) {
                legs.push(l);
            }
        }
        (legs.len() == legs_v.len()).then_some(GrowSpec {
            map,
            potential: PotentialSpec::Quadratic,
            legs,
            moment_order,
            snapshots,
        })
    }

    fn leg(&mut self, v: &Value, ptr: &str, map: &LaurentMap, res: ResolutionSpec, t0: &mut f64) -> Option<Leg> {
        let m = self.object(v, ptr, &["flow", "duration", "until_t0", "steps", "sign"])?;
        let flow_ptr = child(ptr, "flow");
        let kind = self.required(m, ptr, "flow").and_then(|f| self.flow(f, &flow_ptr, map));
        let sign = match self.opt_number(m, ptr, "sign") {
            Some(Some(s)) if s == 1.0 || s == -1.0 => s,
            Some(Some(_)) => {
                self.push(&child(ptr, "sign"), "must be 1 or -1");
                return None;
            }
            Some(None) => 1.0,
            None => return None,
        };
        let steps = self.count(m, ptr, "steps", res.steps, 1, 100_000_000);
        let kind = kind?;
        let moves_t0 = matches!(kind, FlowKind::T0Infinity | FlowKind::T0Source { .. });
        let duration = match (m.get("duration"), m.get("until_t0")) {
            (Some(_), Some(_)) => {
                self.push(ptr, "give either duration or until_t0, not both");
                return None;
            }
            (None, None) => {
                self.push(&child(ptr, "duration"), "missing required key (or until_t0)");
                return None;
            }
            (Some(d), None) => {
                let d = self.number(d, &child(ptr, "duration"))?;
                if !(d > 0.0) {
                    self.push(&child(ptr, "duration"), "must be positive");
                    return None;
                }
                d
            }
            (None, Some(u)) => {
                let u_ptr = child(ptr, "until_t0");
                let target = self.number(u, &u_ptr)?;
                if !moves_t0 {
                    self.push(&u_ptr, "only t0 flows change t0");
                    return None;
                }
                let d = (target - *t0) * sign;
                if !(d > 0.0) {
                    self.push(&u_ptr, format!("target must be reached forward from t0 = {}", *t0));
                    return None;
                }
                d
            }
        };
        if moves_t0 {
            *t0 += sign * duration;
            if !(*t0 > 0.0) {
                self.push(ptr, "leg would shrink the domain to zero area");
                return None;
            }
        }
        let flow = FlowSpec::with_sign(kind, sign).ok()?;
        Some(Leg { flow, duration, steps })
    }

    fn flow(&mut self, v: &Value, ptr: &str, map: &LaurentMap) -> Option<FlowKind> {
        if let Some(s) = v.as_str() {
            if s == "t0" {
                return Some(FlowKind::T0Infinity);
            }
            self.push(ptr, "expected \"t0\" or one of {t0_source, tk_real, tk_imag}");
            return None;
        }
        let (tag, body) = self.tagged(v, ptr, &["t0_source", "tk_real", "tk_imag"])?;
        let body_ptr = child(ptr, tag);
        match tag {
            "t0_source" => {
                let z0 = self.complex(body, &body_ptr)?;
                match map.inverse_evaluate(z0) {
                    Ok(w) if w.norm() > 1.0 => Some(FlowKind::T0Source { z0 }),
                    _ => {
                        self.push(&body_ptr, "source must lie outside the initial contour");
                        None
                    }
                }
            }
            _ => {
                let k = self.integer(body, &body_ptr)?;
                if k == 0 {
                    self.push(&body_ptr, "flow index must be >= 1");
                    return None;
                }
                let k = k as usize;
                Some(if tag == "tk_real" {
                    FlowKind::TkReal(k)
                } else {
                    FlowKind::TkImag(k)
                })
            }
        }
    }

    fn driving(&mut self, v: &Value, ptr: &str) -> Option<DrivingSpec> {
        let (tag, body) = self.tagged(v, ptr, &["constant", "piecewise_linear", "brownian"])?;
        let p = child(ptr, tag);
        match tag {
            "constant" => self.number(body, &p).map(DrivingSpec::Constant),
            "piecewise_linear" => {
                let items = self.array(body, &p)?;
                let mut knots = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    let ip = index(&p, i);
                    match item.as_array().map(Vec::as_slice) {
                        Some([q, th]) => {
                            let q = self.number(q, &index(&ip, 0));
                            let th = self.number(th, &index(&ip, 1));
                            knots.push((q?, th?));
                        }
                        _ => {
                            self.push(&ip, "expected a knot [q, theta]");
                            return None;
                        }
                    }
                }
                if let Err(e) = DrivingFunction::piecewise_linear(knots.clone()) {
                    self.push(&p, e.to_string());
                    return None;
                }
                Some(DrivingSpec::PiecewiseLinear(knots))
            }
            _ => {
                let m = self.object(body, &p, &["kappa", "dq_grid"])?;
                let kappa = self.real(m, &p, "kappa", 1.0, |x| x >= 0.0, "non-negative");
                let dq_grid = self.real(m, &p, "dq_grid", 1e-3, |x| x > 0.0, "positive");
                Some(DrivingSpec::Brownian { kappa, dq_grid })
            }
        }
    }

    fn loewner(&mut self, v: &Value, ptr: &str, seed: u64) -> Option<LoewnerSpec> {
        let m = self.object(
            v,
            ptr,
            &[
                "q0",
                "q_max",
                "driving",
                "tracked_points",
                "trace_points",
                "eta_samples",
                "dq",
                "base_step",
            ],
        )?;
        self.loewner_body(m, ptr, seed, true)
    }

    fn loewner_body(&mut self, m: &Map<String, Value>, ptr: &str, seed: u64, full: bool) -> Option<LoewnerSpec> {
        let q0 = self.real(m, ptr, "q0", 0.0, |_| true, "finite");
        let q_max = self
            .required(m, ptr, "q_max")
            .and_then(|v| self.number(v, &child(ptr, "q_max")));
        let driving = self
            .required(m, ptr, "driving")
            .and_then(|v| self.driving(v, &child(ptr, "driving")));
        let tracked_points = match m.get("tracked_points") {
            None => Some(None),
            Some(v) => self.complex_list(v, &child(ptr, "tracked_points")).map(Some),
        };
        let (trace_points, eta_samples, dq, base_step) = if full {
            (
                self.count(m, ptr, "trace_points", 51, 2, 1_000_000),
                self.count(m, ptr, "eta_samples", 10, 0, 1_000_000),
                self.real(m, ptr, "dq", 1e-4, |x| x > 0.0, "positive"),
                self.real(m, ptr, "base_step", BASE_STEP, |x| x > 0.0, "positive"),
            )
        } else {
            (2, 0, 1e-4, BASE_STEP)
        };
        let q_max = q_max?;
        if !(q_max > q0) {
            self.push(&child(ptr, "q_max"), "must exceed q0");
            return None;
        }
        let spec = LoewnerSpec {
            q0,
            q_max,
            driving: driving?,
            tracked_points: tracked_points?,
            trace_points,
            eta_samples,
            dq,
            base_step,
        };
        if let Some(points) = &spec.tracked_points {
            let r0 = q0.exp();
            for (i, z) in points.iter().enumerate() {
                if !(z.norm() > r0) {
                    self.push(
                        &index(&child(ptr, "tracked_points"), i),
                        format!("point must lie outside |z| = {r0}"),
                    );
                }
            }
            if points.len() < 2 {
                self.push(&child(ptr, "tracked_points"), "need at least two points");
            }
        }
        if spec.eta_samples > 0 && 2.0 * spec.dq >= (q_max - q0) / (spec.eta_samples + 1) as f64 {
            self.push(&child(ptr, "dq"), "too large for the eta sample spacing");
        }
        if let Err(e) = spec.family(seed) {
            self.push(ptr, e.to_string());
            return None;
        }
        Some(spec)
    }

    fn read_csv_columns(&mut self, v: &Value, ptr: &str, columns: [&str; 2]) -> Option<(Vec<f64>, Vec<f64>)> {
        let rel = self.string(v, ptr)?;
        let path = self.base.join(rel);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                self.push(ptr, format!("cannot read {}: {e}", path.display()));
                return None;
            }
        };
        self.inputs.push(InputFile {
            path: rel.to_string(),
            sha256: sha256_hex(&bytes),
        });
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(bytes.as_slice());
        let header = match reader.headers() {
            Ok(h) => h.clone(),
            Err(e) => {
                self.push(ptr, format!("bad CSV header: {e}"));
                return None;
            }
        };
        let pos: Vec<Option<usize>> = columns.iter().map(|c| header.iter().position(|h| h == *c)).collect();
        let (Some(a), Some(b)) = (pos[0], pos[1]) else {
            self.push(ptr, format!("CSV needs columns {} and {}", columns[0], columns[1]));
            return None;
        };
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (line, record) in reader.records().enumerate() {
            let parsed = record.ok().and_then(|r| {
                let x = r.get(a)?.parse::<f64>().ok()?;
                let y = r.get(b)?.parse::<f64>().ok()?;
                Some((x, y))
            });
            match parsed {
                Some((x, y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                None => {
                    self.push(ptr, format!("unreadable CSV row {}", line + 2));
                    return None;
                }
            }
        }
        Some((xs, ys))
    }

    fn profile_from(&mut self, xs: Vec<f64>, ys: Vec<f64>, ptr: &str) -> Option<Profile> {
        match Profile::new(xs, ys) {
            Ok(p) => Some(p),
            Err(e) => {
                self.push(ptr, e.to_string());
                None
            }
        }
    }

    fn hydro(&mut self, v: &Value, ptr: &str, seed: u64) -> Option<HydroSpec> {
        let m = self.object(v, ptr, &["profile", "speed", "s"])?;
        let p_ptr = child(ptr, "profile");
        let profile = self.required(m, ptr, "profile").and_then(|pv| {
            let (tag, body) = self.tagged(pv, &p_ptr, &["table", "csv"])?;
            let bp = child(&p_ptr, tag);
            let (xs, ys) = if tag == "csv" {
                self.read_csv_columns(body, &bp, ["t0", "q"])?
            } else {
                self.pair_table(body, &bp, ["t0", "q"])?
            };
            self.profile_from(xs, ys, &bp)
        });
        let speed = self
            .required(m, ptr, "speed")
            .and_then(|sv| self.speed(sv, &child(ptr, "speed"), seed));
        let s = self
            .required(m, ptr, "s")
            .and_then(|sv| self.number(sv, &child(ptr, "s")));
        let s = s?;
        if s < 0.0 {
            self.push(&child(ptr, "s"), "must be non-negative");
            return None;
        }
        Some(HydroSpec {
            profile: profile?,
            speed: speed?,
            s,
        })
    }

    fn pair_table(&mut self, v: &Value, ptr: &str, keys: [&str; 2]) -> Option<(Vec<f64>, Vec<f64>)> {
        let m = self.object(v, ptr, &keys)?;
        let a = self
            .required(m, ptr, keys[0])
            .and_then(|x| self.real_list(x, &child(ptr, keys[0])));
        let b = self
            .required(m, ptr, keys[1])
            .and_then(|x| self.real_list(x, &child(ptr, keys[1])));
        Some((a?, b?))
    }

    fn speed(&mut self, v: &Value, ptr: &str, seed: u64) -> Option<SpeedSpec> {
        if let Some(s) = v.as_str() {
            if s == "burgers" {
                return Some(SpeedSpec::Linear { a: 0.0, b: 1.0 });
            }
            self.push(
                ptr,
                "expected \"burgers\" or one of {constant, linear, table, csv, loewner}",
            );
            return None;
        }
        let (tag, body) = self.tagged(v, ptr, &["constant", "linear", "table", "csv", "loewner"])?;
        let bp = child(ptr, tag);
        match tag {
            "constant" => self.number(body, &bp).map(SpeedSpec::Constant),
            "linear" => {
                let m = self.object(body, &bp, &["a", "b"])?;
                let a = self.real(m, &bp, "a", 0.0, |_| true, "finite");
                let b = self.real(m, &bp, "b", 0.0, |_| true, "finite");
                Some(SpeedSpec::Linear { a, b })
            }
            "table" => {
                let (q, c) = self.pair_table(body, &bp, ["q", "c"])?;
                self.profile_from(q, c, &bp).map(SpeedSpec::Table)
            }
            "csv" => {
                let (q, c) = self.read_csv_columns(body, &bp, ["q", "c"])?;
                self.profile_from(q, c, &bp).map(SpeedSpec::Table)
            }
            _ => {
                let m = self.object(body, &bp, &["k", "q0", "q_max", "driving", "table_points"])?;
                let k = self.count(m, &bp, "k", 1, 1, 64);
                let table_points = self.count(m, &bp, "table_points", 33, 2, 100_000);
                let family = self.loewner_body(m, &bp, seed, false)?;
                Some(SpeedSpec::Loewner {
                    k,
                    family,
                    table_points,
                })
            }
        }
    }

    fn curve(&mut self, v: &Value, ptr: &str) -> Option<CurveKind> {
        if let Some(s) = v.as_str() {
            if s == "real_line" {
                return Some(CurveKind::RealLine);
            }
            self.push(ptr, "expected \"real_line\", {ray} or {parametric}");
            return None;
        }
        let (tag, body) = self.tagged(v, ptr, &["ray", "parametric"])?;
        let bp = child(ptr, tag);
        if tag == "ray" {
            let m = self.object(body, &bp, &["origin", "direction"])?;
            let origin = match m.get("origin") {
                None => Some(C64::new(0.0, 0.0)),
                Some(o) => self.complex(o, &child(&bp, "origin")),
            };
            let direction = self
                .required(m, &bp, "direction")
                .and_then(|d| self.complex(d, &child(&bp, "direction")));
            let (origin, direction) = (origin?, direction?);
            if let Err(e) = CurveSpec::ray(origin, direction) {
                self.push(&bp, e.to_string());
                return None;
            }
            Some(CurveKind::Ray { origin, direction })
        } else {
            let points = self.complex_list(body, &bp)?;
            if let Err(e) = CurveSpec::parametric(points.clone()) {
                self.push(&bp, e.to_string());
                return None;
            }
            Some(CurveKind::Parametric(points))
        }
    }

    fn measure(&mut self, v: Option<&Value>, ptr: &str) -> Option<MeasureSpec> {
        let Some(v) = v else { return Some(MeasureSpec::Plane) };
        if let Some(s) = v.as_str() {
            if s == "plane" {
                return Some(MeasureSpec::Plane);
            }
            self.push(ptr, "expected \"plane\" or {curve, confine}");
            return None;
        }
        let m = self.object(v, ptr, &["curve", "confine"])?;
        let curve = self
            .required(m, ptr, "curve")
            .and_then(|c| self.curve(c, &child(ptr, "curve")));
        let coefficient = match m.get("confine") {
            None => Some(0.5),
            Some(c) => {
                let cp = child(ptr, "confine");
                self.object(c, &cp, &["quadratic"]).and_then(|cm| {
                    let x = self.required(cm, &cp, "quadratic")?;
                    let x = self.number(x, &child(&cp, "quadratic"))?;
                    if x > 0.0 {
                        Some(x)
                    } else {
                        self.push(&child(&cp, "quadratic"), "must be positive");
                        None
                    }
                })
            }
        };
        Some(MeasureSpec::Curve {
            curve: curve?,
            coefficient: coefficient?,
        })
    }

    fn dyson(&mut self, v: &Value, ptr: &str, seed: u64) -> Option<DysonSpec> {
        let m = self.object(
            v,
            ptr,
            &[
                "N",
                "hbar",
                "t0",
                "times",
                "measure",
                "mode",
                "sweeps",
                "max_iterations",
                "tolerance",
                "burn_in",
                "thin",
                "restarts",
                "free_energy",
            ],
        )?;
        let n = self
            .required(m, ptr, "N")
            .and_then(|x| self.integer(x, &child(ptr, "N")));
        let n = match n {
            Some(0) => {
                self.push(&child(ptr, "N"), "must be positive");
                None
            }
            Some(n) if n > 1_000_000 => {
                self.push(&child(ptr, "N"), "too many particles");
                None
            }
            other => other.map(|n| n as usize),
        };
        let hbar = match (m.get("hbar"), m.get("t0")) {
            (Some(_), Some(_)) => {
                self.push(ptr, "give either hbar or t0, not both");
                None
            }
            (None, None) => {
                self.push(&child(ptr, "hbar"), "missing required key (or t0)");
                None
            }
            (Some(h), None) => {
                let h = self.number(h, &child(ptr, "hbar"));
                match h {
                    Some(h) if h > 0.0 => Some(h),
                    Some(_) => {
                        self.push(&child(ptr, "hbar"), "must be positive");
                        None
                    }
                    None => None,
                }
            }
            (None, Some(t)) => match (self.number(t, &child(ptr, "t0")), n) {
                (Some(t), Some(n)) if t > 0.0 => Some(t / n as f64),
                (Some(_), _) if n.is_some() => {
                    self.push(&child(ptr, "t0"), "must be positive");
                    None
                }
                _ => None,
            },
        };
        let times = match m.get("times") {
            None => Some(Vec::new()),
            Some(t) => self.complex_list(t, &child(ptr, "times")),
        };
        let measure = self.measure(m.get("measure"), &child(ptr, "measure"));
        let mode = match m.get("mode") {
            None => Some("minimize"),
            Some(x) => self.string(x, &child(ptr, "mode")),
        };
        let sweeps = self.count(m, ptr, "sweeps", 1000, 1, 100_000_000);
        let mode = match mode {
            Some("minimize") => {
                if m.contains_key("sweeps") {
                    self.push(&child(ptr, "sweeps"), "only used with mode \"metropolis\"");
                }
                Some(GasMode::Minimize)
            }
            Some("metropolis") => Some(GasMode::Metropolis { sweeps }),
            Some(_) => {
                self.push(&child(ptr, "mode"), "expected \"minimize\" or \"metropolis\"");
                None
            }
            None => None,
        };
        let d = Schedule::default();
        let tolerance = match self.opt_number(m, ptr, "tolerance") {
            Some(Some(t)) if t > 0.0 => Some(t),
            Some(Some(_)) => {
                self.push(&child(ptr, "tolerance"), "must be positive");
                None
            }
            _ => None,
        };
        let schedule = Schedule {
            max_iterations: self.count(m, ptr, "max_iterations", d.max_iterations, 1, usize::MAX),
            tolerance,
            burn_in: self.count(m, ptr, "burn_in", d.burn_in, 0, usize::MAX),
            thin: self.count(m, ptr, "thin", d.thin, 1, usize::MAX),
            restarts: self.count(m, ptr, "restarts", d.restarts, 1, 10_000),
        };
        let free_energy = match m.get("free_energy") {
            None => Some(false),
            Some(x) => self.boolean(x, &child(ptr, "free_energy")),
        };
        let spec = DysonSpec {
            n: n?,
            hbar: hbar?,
            times: times?,
            measure: measure?,
            mode: mode?,
            schedule,
            free_energy: free_energy?,
        };
        if spec.free_energy && spec.n < 2 {
            self.push(&child(ptr, "free_energy"), "needs N >= 2");
        }
        if let Err(e) = spec.gas(seed).validate() {
            let at = if spec.times.is_empty() {
                ptr.to_string()
            } else {
                child(ptr, "times")
            };
            self.push(&at, e.to_string());
            return None;
        }
        Some(spec)
    }

    fn moments(&mut self, v: &Value, ptr: &str, res: ResolutionSpec) -> Option<MomentsSpec> {
        let m = self.object(v, ptr, &["map", "order"])?;
        let map = self
            .required(m, ptr, "map")
            .and_then(|x| self.map(x, &child(ptr, "map"), res));
        let order = self.count(m, ptr, "order", res.order.max(1), 1, 4096);
        if let Err(e) = res.grid().supports_order(order) {
            self.push(&child(ptr, "order"), e.to_string());
            return None;
        }
        Some(MomentsSpec { map: map?, order })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pointers(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(ConfigError::Invalid(issues)) => issues.into_iter().map(|i| i.pointer).collect(),
            Err(e) => panic!("unexpected error {e}"),
            Ok(_) => panic!("config accepted"),
        }
    }

    #[test]
    fn minimal_grow_config_is_valid() {
        let c = parse_config(r#"{"grow": {"map": {"r": 1}, "legs": [{"flow": "t0", "until_t0": 4}]}}"#).unwrap();
        let Scenario::Grow(g) = c.scenario else { panic!() };
        assert_eq!(g.legs.len(), 1);
        assert!((g.legs[0].duration - 3.0).abs() < 1e-15);
        assert_eq!(g.legs[0].steps, DEFAULT_STEPS);
        assert_eq!(c.seed, 0);
        assert_eq!(c.output.formats, Formats::default());
    }

    #[test]
    fn two_sections_are_named() {
        let err = parse_config(r#"{"grow": {}, "dyson": {}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("/grow") && msg.contains("/dyson"), "{msg}");
    }

    #[test]
    fn negative_hbar_points_at_field() {
        let p = pointers(r#"{"dyson": {"N": 10, "hbar": -0.1}}"#);
        assert_eq!(p, vec!["/dyson/hbar"]);
    }

    #[test]
    fn unknown_keys_and_missing_keys_all_reported() {
        let p = pointers(r#"{"seeed": 1, "grow": {"map": {"r": 1, "cofs": []}}}"#);
        assert!(p.contains(&"/seeed".to_string()));
        assert!(p.contains(&"/grow/map/cofs".to_string()));
        assert!(p.contains(&"/grow/legs".to_string()));
    }

    #[test]
    fn pointer_escaping() {
        assert_eq!(child("/a", "b/c~d"), "/a/b~1c~0d");
    }

    #[test]
    fn rejects_nonunivalent_map_and_bad_flow() {
        let p = pointers(
            r#"{"grow": {"map": {"r": 1, "coeffs": [[0,0],[0,0],[0.9,0]]},
                "legs": [{"flow": {"tk_real": 0}, "duration": 1}]}}"#,
        );
        assert!(p.contains(&"/grow/map".to_string()), "{p:?}");
    }

    #[test]
    fn leg_errors() {
        let p = pointers(
            r#"{"grow": {"map": {"r": 1}, "legs": [
                {"flow": {"tk_real": 0}, "duration": 1},
                {"flow": "t0", "until_t0": 0.5},
                {"flow": {"tk_imag": 2}, "until_t0": 3},
                {"flow": "t0", "duration": 1, "sign": 2},
                {"flow": {"t0_source": [0.5, 0]}, "duration": 1}
            ]}}"#,
        );
        assert_eq!(
            p,
            vec![
                "/grow/legs/0/flow/tk_real",
                "/grow/legs/1/until_t0",
                "/grow/legs/2/until_t0",
                "/grow/legs/3/sign",
                "/grow/legs/4/flow/t0_source"
            ]
        );
    }

    #[test]
    fn declared_scenario_must_match() {
        let p = pointers(r#"{"scenario": "dyson", "moments": {"map": {"r": 1}}}"#);
        assert_eq!(p, vec!["/scenario"]);
    }

    #[test]
    fn resolution_must_fit_grid() {
        let p = pointers(r#"{"resolution": {"M": 40, "n": 64}, "moments": {"map": {"r": 1}}}"#);
        assert_eq!(p, vec!["/resolution"]);
        let p = pointers(r#"{"resolution": {"n": 100}, "moments": {"map": {"r": 1}}}"#);
        assert_eq!(p, vec!["/resolution/n"]);
    }

    #[test]
    fn loewner_and_dyson_sections() {
        let c =
            parse_config(r#"{"seed": 7, "loewner": {"q_max": 0.5, "driving": {"brownian": {"kappa": 2}}}}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert!(matches!(c.scenario, Scenario::Loewner(_)));
        let c = parse_config(
            r#"{"dyson": {"N": 8, "t0": 2, "measure": {"curve": "real_line", "confine": {"quadratic": 1}},
                "mode": "metropolis", "sweeps": 10}}"#,
        )
        .unwrap();
        let Scenario::Dyson(d) = c.scenario else { panic!() };
        assert_eq!(d.hbar, 0.25);
        assert_eq!(d.mode, GasMode::Metropolis { sweeps: 10 });
        let p = pointers(r#"{"loewner": {"q0": 1, "q_max": 0.5, "driving": {"linear": 1}}}"#);
        assert_eq!(p, vec!["/loewner/driving/linear", "/loewner/q_max"]);
    }

    #[test]
    fn non_confining_times_rejected() {
        let p = pointers(r#"{"dyson": {"N": 8, "t0": 1, "times": [[0,0],[0.7,0]]}}"#);
        assert_eq!(p, vec!["/dyson/times"]);
    }

    #[test]
    fn hydro_inline_and_csv() {
        let c = parse_config(
            r#"{"hydro": {"profile": {"table": {"t0": [0, 1, 2], "q": [0, 1, 2]}}, "speed": "burgers", "s": 0.5}}"#,
        )
        .unwrap();
        let Scenario::Hydro(h) = c.scenario else { panic!() };
        assert_eq!(h.speed, SpeedSpec::Linear { a: 0.0, b: 1.0 });
        let dir = std::env::temp_dir().join(format!("todaflow-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("p.csv"), "t0,q\n0,1\n1,2\n2,2.5\n").unwrap();
        let cfg = dir.join("c.json");
        fs::write(
            &cfg,
            r#"{"hydro": {"profile": {"csv": "p.csv"}, "speed": {"constant": 1}, "s": 1}}"#,
        )
        .unwrap();
        let c = load_config(&cfg).unwrap();
        assert_eq!(c.inputs.len(), 2);
        let Scenario::Hydro(h) = c.scenario else { panic!() };
        assert_eq!(h.profile.values(), &[1.0, 2.0, 2.5]);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn formats_list() {
        assert_eq!(
            Formats::parse_list("csv, svg").unwrap(),
            Formats {
                csv: true,
                json: false,
                svg: true
            }
        );
        assert!(Formats::parse_list("png").is_err());
    }
}
