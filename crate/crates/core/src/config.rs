//! Run configuration: UTF-8 `key = value` lines, `#` starts a comment.
//!
//! ```text
//! grid.n = 32
//! grid.box_length = 4
//! grid.boundary = fixed          # or periodic
//! target = s2                    # or su2
//! initializer = hopf_projection  # constant | hedgehog | hopf_projection | torus_wrap | random_smooth
//! initializer.k = 1
//! flow.max_iters = 2000
//! output.snapshot_every = 500
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;

use crate::coset::{FieldMap, TargetSpace};
use crate::error::{ConfigError, Result};
use crate::fields;
use crate::forms::{BoundaryMode, Grid3};
use crate::lie::Quat;
use crate::minimizer::FlowConfig;
use crate::topology::HopfMethod;

pub const DEFAULT_N: usize = 32;
pub const DEFAULT_BOX_LENGTH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub n: usize,
    pub box_length: f64,
    pub boundary: BoundaryMode,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid3> {
        Grid3::new(self.n, self.box_length, self.boundary)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Initializer {
    /// Constant map; `None` means the base point of the target.
    Constant { value: Option<Quat> },
    /// Hedgehog with profile `f(r) = kπ·max(0, 1 − r/R)`.
    Hedgehog { k: f64, radius: Option<f64> },
    /// `Ad(u)i` for the hedgehog `u`.
    HopfProjection { k: f64, radius: Option<f64> },
    /// Degree-`winding` wrap of the 2-torus spanned by `axes`.
    TorusWrap { axes: [usize; 2], winding: i32, mirror: bool },
    RandomSmooth { seed: u64, correlation_length: Option<f64>, amplitude: f64 },
}

impl Initializer {
    pub fn name(&self) -> &'static str {
        match self {
            Initializer::Constant { .. } => "constant",
            Initializer::Hedgehog { .. } => "hedgehog",
            Initializer::HopfProjection { .. } => "hopf_projection",
            Initializer::TorusWrap { .. } => "torus_wrap",
            Initializer::RandomSmooth { .. } => "random_smooth",
        }
    }

    fn compatible_with(&self, target: TargetSpace) -> bool {
        match self {
            Initializer::Constant { .. } | Initializer::RandomSmooth { .. } => true,
            Initializer::Hedgehog { .. } => target == TargetSpace::GroupSU2,
            Initializer::HopfProjection { .. } | Initializer::TorusWrap { .. } => {
                target == TargetSpace::SphereS2
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Every `log_every`-th trace row goes to energy.csv (the last row
    /// always does).
    pub log_every: usize,
    /// Snapshot cadence in iterations; 0 writes only the final field.
    pub snapshot_every: usize,
    pub emit_vtk: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub target: TargetSpace,
    pub initializer: Initializer,
    pub flow: FlowConfig,
    pub output: OutputConfig,
    pub hopf_method: HopfMethod,
    pub identities_samples: usize,
    pub identities_seed: u64,
    pub convergence_sizes: Vec<usize>,
}

const KEYS: &[&str] = &[
    "grid.n",
    "grid.box_length",
    "grid.boundary",
    "target",
    "initializer",
    "initializer.k",
    "initializer.radius",
    "initializer.value",
    "initializer.axes",
    "initializer.winding",
    "initializer.mirror",
    "initializer.seed",
    "initializer.correlation_length",
    "initializer.amplitude",
    "flow.step_init",
    "flow.backtrack_factor",
    "flow.armijo_c",
    "flow.grad_tol",
    "flow.max_iters",
    "flow.invariant_check_every",
    "flow.skyrme_weight",
    "output.dir",
    "output.log_every",
    "output.snapshot_every",
    "output.emit_vtk",
    "invariants.method",
    "identities.samples",
    "identities.seed",
    "convergence.sizes",
];

/// Which initializers accept each `initializer.*` parameter.
fn parameter_applies(key: &str, init: &str) -> bool {
    match key {
        "initializer.k" | "initializer.radius" => matches!(init, "hedgehog" | "hopf_projection"),
        "initializer.value" => init == "constant",
        "initializer.axes" | "initializer.winding" | "initializer.mirror" => init == "torus_wrap",
        "initializer.seed" | "initializer.correlation_length" | "initializer.amplitude" => {
            init == "random_smooth"
        }
        _ => true,
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.0)
    }

    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<T>().map(Some).map_err(|_| {
                ConfigError::TypeMismatch {
                    line,
                    key: key.to_string(),
                    expected,
                    value: v.to_string(),
                }
                .into()
            }),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parse(key, "a real number")?;
        match v {
            Some(x) if !x.is_finite() => Err(self.mismatch(key, "a finite real number")),
            _ => Ok(v),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        let v = self.real(key)?;
        match v {
            Some(x) if x <= 0.0 => Err(self.invalid(key, format!("`{key}` must be positive"))),
            _ => Ok(v),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.parse(key, "a nonnegative integer")
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some((_, "true" | "yes" | "1")) => Ok(Some(true)),
            Some((_, "false" | "no" | "0")) => Ok(Some(false)),
            Some(_) => Err(self.mismatch(key, "a boolean (true/false)")),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some((_, v)) => v
                .split(',')
                .map(|t| t.trim().parse::<T>())
                .collect::<std::result::Result<Vec<T>, _>>()
                .map(Some)
                .map_err(|_| self.mismatch(key, expected)),
        }
    }

    fn mismatch(&self, key: &str, expected: &'static str) -> crate::error::Error {
        let (line, v) = self.raw(key).unwrap_or((0, ""));
        ConfigError::TypeMismatch {
            line,
            key: key.to_string(),
            expected,
            value: v.to_string(),
        }
        .into()
    }

    fn invalid(&self, key: &str, message: String) -> crate::error::Error {
        ConfigError::Invalid {
            line: self.line(key),
            message,
        }
        .into()
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError::Malformed {
                line,
                text: raw.trim().to_string(),
            }
            .into());
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Malformed {
                line,
                text: raw.trim().to_string(),
            }
            .into());
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey {
                line,
                key: k.to_string(),
            }
            .into());
        }
        if let Some((first, _)) = map.get(k) {
            return Err(ConfigError::Invalid {
                line,
                message: format!("`{k}` already set on line {first}"),
            }
            .into());
        }
        map.insert(k.to_string(), (line, v.to_string()));
    }
    Ok(Entries { map })
}

fn parse_initializer(e: &Entries, name: &str) -> Result<Initializer> {
    for key in e.map.keys().filter(|k| k.starts_with("initializer.")) {
        if !parameter_applies(key, name) {
            return Err(e.invalid(key, format!("`{key}` does not apply to initializer `{name}`")));
        }
    }
    let k = e.real("initializer.k")?.unwrap_or(1.0);
    let radius = e.positive("initializer.radius")?;
    Ok(match name {
        "constant" => {
            let value = match e.list::<f64>("initializer.value", "four comma-separated reals")? {
                None => None,
                Some(v) if v.len() == 4 => Some(Quat::new(v[0], v[1], v[2], v[3])),
                Some(_) => return Err(e.mismatch("initializer.value", "four comma-separated reals")),
            };
            Initializer::Constant { value }
        }
        "hedgehog" => Initializer::Hedgehog { k, radius },
        "hopf_projection" => Initializer::HopfProjection { k, radius },
        "torus_wrap" => {
            let axes = match e.list::<usize>("initializer.axes", "two axis indices, e.g. `0,1`")? {
                None => [0, 1],
                Some(v) if v.len() == 2 && v[0] < 3 && v[1] < 3 && v[0] != v[1] => [v[0], v[1]],
                Some(_) => {
                    return Err(e.invalid(
                        "initializer.axes",
                        "`initializer.axes` must name two distinct axes in 0..=2".into(),
                    ))
                }
            };
            let winding = e.parse::<i32>("initializer.winding", "an integer")?.unwrap_or(1);
            let mirror = e.boolean("initializer.mirror")?.unwrap_or(false);
            Initializer::TorusWrap {
                axes,
                winding,
                mirror,
            }
        }
        "random_smooth" => {
            let seed = e.parse::<u64>("initializer.seed", "a nonnegative integer")?.unwrap_or(0);
            let correlation_length = e.positive("initializer.correlation_length")?;
            let amplitude = e.real("initializer.amplitude")?.unwrap_or(1.0);
            Initializer::RandomSmooth {
                seed,
                correlation_length,
                amplitude,
            }
        }
        other => {
            return Err(ConfigError::TypeMismatch {
                line: e.line("initializer"),
                key: "initializer".into(),
                expected: "one of constant, hedgehog, hopf_projection, torus_wrap, random_smooth",
                value: other.to_string(),
            }
            .into())
        }
    })
}

/// Parses and validates a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = tokenize(text)?;

    let n = e.count("grid.n")?.unwrap_or(DEFAULT_N);
    if n < 4 {
        return Err(e.invalid("grid.n", format!("grid.n must be at least 4, got {n}")));
    }
    let box_length = e.positive("grid.box_length")?.unwrap_or(DEFAULT_BOX_LENGTH);
    let boundary = match e.raw("grid.boundary").map(|r| r.1) {
        None | Some("fixed") => BoundaryMode::FixedBoundary,
        Some("periodic") => BoundaryMode::Periodic,
        Some(_) => return Err(e.mismatch("grid.boundary", "`periodic` or `fixed`")),
    };
    let grid = GridConfig {
        n,
        box_length,
        boundary,
    };

    let target = match e.raw("target").map(|r| r.1) {
        Some("s2") => TargetSpace::SphereS2,
        Some("su2") => TargetSpace::GroupSU2,
        Some(_) => return Err(e.mismatch("target", "`su2` or `s2`")),
        None => {
            return Err(ConfigError::Invalid {
                line: 0,
                message: "missing required key `target`".into(),
            }
            .into())
        }
    };
    let init_name = match e.raw("initializer") {
        Some((_, v)) => v.to_string(),
        None => {
            return Err(ConfigError::Invalid {
                line: 0,
                message: "missing required key `initializer`".into(),
            }
            .into())
        }
    };
    let initializer = parse_initializer(&e, &init_name)?;
    if !initializer.compatible_with(target) {
        return Err(ConfigError::IncompatibleInitializer {
            line: e.line("initializer").max(e.line("target")),
            initializer: init_name,
            target: target.name().to_string(),
        }
        .into());
    }
    if let Initializer::Constant { value: Some(q) } = initializer {
        if target.deviation(q) > crate::coset::TARGET_TOL {
            return Err(e.invalid(
                "initializer.value",
                format!("constant value is not a point of {}", target.name()),
            ));
        }
    }

    let d = FlowConfig::default();
    let flow = FlowConfig {
        step_init: e.positive("flow.step_init")?,
        backtrack_factor: e.real("flow.backtrack_factor")?.unwrap_or(d.backtrack_factor),
        armijo_c: e.real("flow.armijo_c")?.unwrap_or(d.armijo_c),
        grad_tol: e.positive("flow.grad_tol")?,
        max_iters: e.count("flow.max_iters")?.unwrap_or(d.max_iters),
        invariant_check_every: e
            .count("flow.invariant_check_every")?
            .unwrap_or(d.invariant_check_every),
        skyrme_weight: e.real("flow.skyrme_weight")?.unwrap_or(d.skyrme_weight),
    };
    if let Err(err) = flow.validate() {
        let line = e
            .map
            .iter()
            .filter(|(k, _)| k.starts_with("flow."))
            .map(|(_, (l, _))| *l)
            .min()
            .unwrap_or(0);
        return Err(ConfigError::Invalid {
            line,
            message: err.to_string(),
        }
        .into());
    }

    let output = OutputConfig {
        dir: e.raw("output.dir").map_or_else(|| PathBuf::from("out"), |r| PathBuf::from(r.1)),
        log_every: e.count("output.log_every")?.unwrap_or(1),
        snapshot_every: e.count("output.snapshot_every")?.unwrap_or(0),
        emit_vtk: e.boolean("output.emit_vtk")?.unwrap_or(false),
    };
    if output.log_every == 0 {
        return Err(e.invalid("output.log_every", "output.log_every must be positive".into()));
    }

    let hopf_method = match e.raw("invariants.method").map(|r| r.1) {
        None | Some("poisson") => HopfMethod::PoissonGauge,
        Some("lift") => HopfMethod::LiftCS,
        Some(_) => return Err(e.mismatch("invariants.method", "`poisson` or `lift`")),
    };
    let identities_samples = e.count("identities.samples")?.unwrap_or(8);
    if identities_samples == 0 {
        return Err(e.invalid("identities.samples", "identities.samples must be positive".into()));
    }
    let identities_seed = e.parse::<u64>("identities.seed", "a nonnegative integer")?.unwrap_or(0);
    let convergence_sizes = e
        .list::<usize>("convergence.sizes", "comma-separated grid sizes")?
        .unwrap_or_else(|| vec![16, 32, 48]);
    if convergence_sizes.len() < 2 || convergence_sizes.iter().any(|&m| m < 4) {
        return Err(e.invalid(
            "convergence.sizes",
            "convergence.sizes needs at least two sizes, each at least 4".into(),
        ));
    }

    Ok(RunConfig {
        grid,
        target,
        initializer,
        flow,
        output,
        hopf_method,
        identities_samples,
        identities_seed,
        convergence_sizes,
    })
}

/// Initial field for `cfg` on its own grid.
pub fn make_initializer(cfg: &RunConfig) -> Result<FieldMap> {
    make_initializer_on(cfg, cfg.grid.build()?)
}

/// Initial field for `cfg` on an arbitrary grid (refinement studies).
pub fn make_initializer_on(cfg: &RunConfig, g: Grid3) -> Result<FieldMap> {
    match &cfg.initializer {
        Initializer::Constant { value } => {
            FieldMap::constant(g, cfg.target, value.unwrap_or(cfg.target.base_point()))
        }
        Initializer::Hedgehog { k, radius } => fields::hedgehog(g, *k, *radius),
        Initializer::HopfProjection { k, radius } => fields::hopf_projection(g, *k, *radius),
        Initializer::TorusWrap {
            axes,
            winding,
            mirror,
        } => {
            let normal = 3 - axes[0] - axes[1];
            // axes given against the cyclic order flip the orientation
            let cyclic = (axes[0] + 1) % 3 == axes[1];
            fields::torus_wrap(g, normal, *winding, *mirror != !cyclic)
        }
        Initializer::RandomSmooth {
            seed,
            correlation_length,
            amplitude,
        } => fields::random_smooth(
            g,
            cfg.target,
            *seed,
            correlation_length.unwrap_or(0.25 * g.box_length()),
            *amplitude,
        ),
    }
}
