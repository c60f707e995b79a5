//! Experiment driver behind the `locbc` binary.
//!
//! Settings are resolved in four layers: built-in defaults, then a preset,
//! then a `key=value` config file, then command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use locbc_core::channel::{dmc_capacity, DEFAULT_CAPACITY_MAX_ITER};
use locbc_core::degradation::certificate_for;
use locbc_core::export::{curve_csv, fmt_num, matrix_csv, points_csv, LogBase};
use locbc_core::pg22::{self, classify_region, gamma_curve, pg22_capacity, Pg22Pattern};
use locbc_core::region::{boundary_sweep, filter_time_sharing, sample_achievable_points, SweepSettings};
use locbc_core::{
    check_degraded, erasure_region_contains, gaussian_binomial, validate_channel, Cmlobc,
    DegradationOrder, ErasurePattern, Error, Lattice, LatticeParams, PointTag, RatePoint,
};
use serde::Serialize;
use serde_json::json;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 1;

/// Environment variable bounding the worker threads of the region task.
pub const THREADS_ENV: &str = "LOC_REGION_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Lattice,
    Channel,
    Degrade,
    Capacity,
    Region,
    Pg22,
    ErasureCheck,
}

impl Task {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "lattice" => Task::Lattice,
            "channel" => Task::Channel,
            "degrade" => Task::Degrade,
            "capacity" => Task::Capacity,
            "region" => Task::Region,
            "pg22" => Task::Pg22,
            "erasure-check" => Task::ErasureCheck,
            other => return Err(CliError::usage(format!("unknown task {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(String),
    Io(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Domain(_) | Error::Precondition(_) | Error::Infeasible { .. } => {
                CliError::Usage(e.to_string())
            }
            Error::CapacityNotConverged { .. } | Error::BoundaryNotConverged { .. } | Error::Solver(_) => {
                CliError::Solver(e.to_string())
            }
            Error::Io(_) | Error::Json(_) => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub q: u32,
    pub m: usize,
    pub l: usize,
    pub eps1: Option<Vec<f64>>,
    pub eps2: Option<Vec<f64>>,
    pub rho1: f64,
    pub rho2: f64,
    pub x_size: usize,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub n: usize,
    pub seed: Option<u64>,
    pub u_size: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
    pub restarts: usize,
    pub points: usize,
    /// Not part of the recorded metadata, so results do not depend on where they are written.
    #[serde(skip)]
    pub out: PathBuf,
    pub format: Format,
    pub log_base: String,
    pub preset: Option<String>,
}

impl ExperimentConfig {
    pub fn defaults(task: Task) -> Self {
        Self {
            task,
            q: 2,
            m: 3,
            l: 2,
            eps1: None,
            eps2: None,
            rho1: 0.1,
            rho2: 0.3,
            x_size: 7,
            r1: None,
            r2: None,
            n: 10_000,
            seed: None,
            u_size: None,
            tol: 1e-12,
            max_iter: 100_000,
            mu_min: 1e-3,
            mu_max: 1e3,
            mu_points: 41,
            restarts: 8,
            points: pg22::DEFAULT_CURVE_POINTS,
            out: PathBuf::from("out"),
            format: Format::Csv,
            log_base: "nats".into(),
            preset: None,
        }
    }

    /// Apply a named example. `example5` reads the current `rho1`, `rho2`.
    pub fn apply_preset(&mut self, name: &str) -> CliResult<()> {
        let (e1, e2): (Vec<f64>, Vec<f64>) = match name {
            "example1" => (vec![0.05, 0.24, 0.71], vec![0.30, 0.15, 0.55]),
            "example2" => (vec![0.05, 0.20, 0.75], vec![0.30, 0.15, 0.55]),
            "example3" => (vec![0.01, 0.1, 0.89], vec![0.09, 0.3, 0.61]),
            "example4" => (vec![0.0, 0.1, 0.9], vec![0.0, 0.3, 0.7]),
            "example5" => (
                vec![self.rho1, 0.0, 1.0 - self.rho1],
                vec![self.rho2, 0.0, 1.0 - self.rho2],
            ),
            other => return Err(CliError::usage(format!("unknown preset {other:?}"))),
        };
        (self.q, self.m, self.l) = (2, 3, 2);
        self.eps1 = Some(e1);
        self.eps2 = Some(e2);
        self.preset = Some(name.to_string());
        Ok(())
    }

    /// Set one `key = value` pair. Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let bad = |what: &str| CliError::usage(format!("invalid value {value:?} for {key}: {what}"));
        fn num<T: std::str::FromStr>(v: &str) -> Option<T> {
            v.parse().ok()
        }
        match key.as_str() {
            "task" => self.task = Task::parse(value)?,
            "q" => self.q = num(value).ok_or_else(|| bad("expected an integer"))?,
            "m" => self.m = num(value).ok_or_else(|| bad("expected an integer"))?,
            "l" => self.l = num(value).ok_or_else(|| bad("expected an integer"))?,
            "eps1" => self.eps1 = Some(parse_list(value).ok_or_else(|| bad("expected a list"))?),
            "eps2" => self.eps2 = Some(parse_list(value).ok_or_else(|| bad("expected a list"))?),
            "rho1" => self.rho1 = num(value).ok_or_else(|| bad("expected a number"))?,
            "rho2" => self.rho2 = num(value).ok_or_else(|| bad("expected a number"))?,
            "x-size" => self.x_size = num(value).ok_or_else(|| bad("expected an integer"))?,
            "r1" => self.r1 = Some(num(value).ok_or_else(|| bad("expected a number"))?),
            "r2" => self.r2 = Some(num(value).ok_or_else(|| bad("expected a number"))?),
            "n" => self.n = num(value).ok_or_else(|| bad("expected an integer"))?,
            "seed" => self.seed = Some(num(value).ok_or_else(|| bad("expected an integer"))?),
            "u-size" => self.u_size = Some(num(value).ok_or_else(|| bad("expected an integer"))?),
            "tol" => self.tol = num(value).ok_or_else(|| bad("expected a number"))?,
            "max-iter" => self.max_iter = num(value).ok_or_else(|| bad("expected an integer"))?,
            "mu-min" => self.mu_min = num(value).ok_or_else(|| bad("expected a number"))?,
            "mu-max" => self.mu_max = num(value).ok_or_else(|| bad("expected a number"))?,
            "mu-points" => self.mu_points = num(value).ok_or_else(|| bad("expected an integer"))?,
            "restarts" => self.restarts = num(value).ok_or_else(|| bad("expected an integer"))?,
            "points" => self.points = num(value).ok_or_else(|| bad("expected an integer"))?,
            "out" => self.out = PathBuf::from(value),
            "format" => {
                self.format = match value {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(bad("expected csv or json")),
                }
            }
            "log-base" => {
                LogBase::parse(value, self.q.max(2)).map_err(|_| bad("expected nats, bits or qary"))?;
                self.log_base = value.to_string();
            }
            "preset" => self.apply_preset(value)?,
            _ => return Err(CliError::usage(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Resolve defaults, preset, file entries and flag entries in that order.
    ///
    /// The preset is taken from the flags if present there, else from the file.
    /// Preset patterns for `example5` see `rho1`/`rho2` from both layers.
    pub fn resolve(
        task: Task,
        file: &[(String, String)],
        flags: &[(String, String)],
    ) -> CliResult<Self> {
        let mut cfg = Self::defaults(task);
        let is_preset = |k: &str| k.trim() == "preset";
        let last_preset = |layer: &[(String, String)]| {
            layer.iter().filter(|(k, _)| is_preset(k)).map(|(_, v)| v.trim().to_string()).next_back()
        };
        let preset = last_preset(flags).or_else(|| last_preset(file));
        if let Some(name) = preset {
            // rho values feed example5, so read them first.
            for (k, v) in file.iter().chain(flags) {
                if matches!(k.trim(), "rho1" | "rho2") {
                    cfg.set(k, v)?;
                }
            }
            cfg.apply_preset(&name)?;
        }
        for (k, v) in file.iter().chain(flags) {
            if !is_preset(k) && k.trim() != "task" {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("tol", self.tol),
            ("mu-min", self.mu_min),
            ("mu-max", self.mu_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::usage(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("n", self.n),
            ("max-iter", self.max_iter),
            ("mu-points", self.mu_points),
            ("restarts", self.restarts),
            ("x-size", self.x_size),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(CliError::usage(format!("{name} must be at least 1")));
            }
        }
        if self.points < 2 {
            return Err(CliError::usage("points must be at least 2"));
        }
        if self.u_size == Some(0) {
            return Err(CliError::usage("u-size must be at least 1"));
        }
        if self.task == Task::Region && self.seed.is_none() {
            return Err(CliError::usage("region sampling needs an explicit --seed"));
        }
        Ok(())
    }

    fn log_base(&self) -> CliResult<LogBase> {
        LogBase::parse(&self.log_base, self.q).map_err(|e| CliError::usage(e.to_string()))
    }

    fn params(&self) -> CliResult<LatticeParams> {
        Ok(LatticeParams::new(self.q, self.m, self.l)?)
    }

    fn pattern(&self, which: u8) -> CliResult<ErasurePattern> {
        let v = if which == 1 { &self.eps1 } else { &self.eps2 };
        let v = v
            .as_ref()
            .ok_or_else(|| CliError::usage(format!("eps{which} is required for this task")))?;
        Ok(ErasurePattern::new(v.clone())?)
    }

    fn broadcast(&self) -> CliResult<Cmlobc> {
        Ok(Cmlobc::new(self.params()?, self.pattern(1)?, self.pattern(2)?)?)
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse().ok()).collect()
}

/// Parse a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Named output file and its full contents.
pub type Artifact = (String, String);

/// Write every artifact to a temporary name first, then rename them all.
pub fn write_atomically(dir: &Path, artifacts: &[Artifact]) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    let mut staged = Vec::new();
    for (name, body) in artifacts {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, body) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(e.into());
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, fin) in staged {
        fs::rename(tmp, fin)?;
    }
    Ok(())
}

fn json_text<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Run a resolved experiment and return the artifacts it produced (already written).
pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    let artifacts = match cfg.task {
        Task::Lattice => task_lattice(cfg)?,
        Task::Channel => task_channel(cfg)?,
        Task::Degrade => task_degrade(cfg)?,
        Task::Capacity => task_capacity(cfg)?,
        Task::Region => {
            let threads = match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse::<usize>().ok().filter(|&t| t > 0).ok_or_else(
                    || CliError::usage(format!("{THREADS_ENV} must be a positive integer")),
                )?),
                Err(_) => None,
            };
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                builder = builder.num_threads(t);
            }
            let pool = builder.build().map_err(|e| CliError::Solver(e.to_string()))?;
            pool.install(|| task_region(cfg))?
        }
        Task::Pg22 => task_pg22(cfg)?,
        Task::ErasureCheck => task_erasure(cfg)?,
    };
    write_atomically(&cfg.out, &artifacts)?;
    Ok(artifacts)
}

fn task_lattice(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    let params = cfg.params()?;
    let sizes: Vec<(usize, String)> = (0..=params.m())
        .map(|k| Ok((k, gaussian_binomial(params.m(), k, params.q())?.to_string())))
        .collect::<Result<_, Error>>()?;
    Ok(match cfg.format {
        Format::Csv => {
            let mut s = String::from("dim,count\n");
            for (k, c) in &sizes {
                s.push_str(&format!("{k},{c}\n"));
            }
            vec![("layers.csv".into(), s)]
        }
        Format::Json => {
            let layers: Vec<_> = sizes.iter().map(|(k, c)| json!({"dim": k, "count": c})).collect();
            let body = json!({
                "q": params.q(), "m": params.m(), "l": params.l(),
                "input_size": params.input_size(), "output_size": params.output_size(),
                "layers": layers,
            });
            vec![("lattice.json".into(), json_text(&body)?)]
        }
    })
}

fn task_channel(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    let params = cfg.params()?;
    let lattice = std::sync::Arc::new(Lattice::new(params));
    let mut out = Vec::new();
    let mut reports = Vec::new();
    for which in [1u8, 2] {
        let present = if which == 1 { cfg.eps1.is_some() } else { cfg.eps2.is_some() };
        if !present {
            if which == 1 {
                return Err(CliError::usage("eps1 is required for this task"));
            }
            continue;
        }
        let ch = locbc_core::ChannelMatrix::build(lattice.clone(), cfg.pattern(which)?)?;
        let report = validate_channel(&ch);
        if cfg.format == Format::Csv {
            out.push((format!("channel{which}.csv"), matrix_csv(ch.matrix())));
        }
        reports.push(json!({
            "channel": which,
            "eps": ch.eps(),
            "shape": [ch.input_size(), ch.output_size()],
            "clean": report.is_clean(),
            "report": report,
            "matrix": if cfg.format == Format::Json {
                Some(ch.matrix().row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
            } else {
                None
            },
        }));
    }
    out.push(("channel.json".into(), json_text(&reports)?));
    Ok(out)
}

fn order_name(o: DegradationOrder) -> &'static str {
    match o {
        DegradationOrder::Y2DegradedFromY1 => "Y2DegradedFromY1",
        DegradationOrder::Y1DegradedFromY2 => "Y1DegradedFromY2",
        DegradationOrder::Equivalent => "Equivalent",
        DegradationOrder::Incomparable => "Incomparable",
    }
}

fn task_degrade(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    let params = cfg.params()?;
    let (e1, e2) = (cfg.pattern(1)?, cfg.pattern(2)?);
    Cmlobc::new(params, e1.clone(), e2.clone())?;
    let order = check_degraded(&e1, &e2, params.l() < params.m())?;
    let mut out = Vec::new();
    let mut verdict = json!({
        "q": params.q(), "m": params.m(), "l": params.l(),
        "eps1": e1, "eps2": e2,
        "order": order_name(order),
        "strongly_degraded": locbc_core::check_strong_degraded(&e1, &e2)?,
    });
    // Certificate in whichever direction holds.
    let pair = match order {
        DegradationOrder::Y2DegradedFromY1 | DegradationOrder::Equivalent => Some((&e1, &e2, "Y1->Y2")),
        DegradationOrder::Y1DegradedFromY2 => Some((&e2, &e1, "Y2->Y1")),
        DegradationOrder::Incomparable => None,
    };
    if let Some((from, to, direction)) = pair {
        let lattice = Lattice::new(params);
        let (cert, s_from, s_to) = certificate_for(&lattice, from, to)?;
        let report = locbc_core::verify_certificate(&s_from, &cert, &s_to)?;
        verdict["certificate_residual"] = json!(cert.residual);
        verdict["certificate_pass"] = json!(report.pass);
        let lambda = cert.lambda.as_ref().map(|l| {
            l.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>()
        });
        let body = json!({
            "direction": direction,
            "lambda": lambda,
            "residual": cert.residual,
            "report": report,
        });
        out.push(("certificate.json".into(), json_text(&body)?));
        if cfg.format == Format::Csv {
            out.push(("t_matrix.csv".into(), matrix_csv(&cert.t_matrix)));
        } else {
            let t: Vec<Vec<f64>> =
                cert.t_matrix.row_iter().map(|r| r.iter().copied().collect()).collect();
            out.push(("t_matrix.json".into(), json_text(&t)?));
        }
    }
    out.insert(0, ("verdict.json".into(), json_text(&verdict)?));
    Ok(out)
}

fn task_capacity(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    let base = cfg.log_base()?;
    let params = cfg.params()?;
    let lattice = std::sync::Arc::new(Lattice::new(params));
    let mut rows = Vec::new();
    for which in [1u8, 2] {
        let present = if which == 1 { cfg.eps1.is_some() } else { cfg.eps2.is_some() };
        if !present {
            if which == 1 {
                return Err(CliError::usage("eps1 is required for this task"));
            }
            continue;
        }
        let ch = locbc_core::ChannelMatrix::build(lattice.clone(), cfg.pattern(which)?)?;
        let cap = dmc_capacity(ch.matrix(), cfg.tol, cfg.max_iter.max(DEFAULT_CAPACITY_MAX_ITER))?;
        let closed = if (params.q(), params.m(), params.l()) == (2, 3, 2) {
            Some(base.from_nats(pg22_capacity(&Pg22Pattern::try_from(ch.eps().clone())?)))
        } else {
            None
        };
        rows.push((which, base.from_nats(cap.nats), base.from_nats(cap.gap), cap.iterations, closed, cap.input));
    }
    Ok(match cfg.format {
        Format::Csv => {
            let mut s = String::from("channel,capacity,gap,iterations,closed_form\n");
            for (w, c, g, it, closed, _) in &rows {
                let closed = closed.map(fmt_num).unwrap_or_default();
                s.push_str(&format!("{w},{},{},{it},{closed}\n", fmt_num(*c), fmt_num(*g)));
            }
            vec![("capacity.csv".into(), s)]
        }
        Format::Json => {
            let body: Vec<_> = rows
                .iter()
                .map(|(w, c, g, it, closed, input)| {
                    json!({"channel": w, "capacity": c, "gap": g, "iterations": it,
                           "closed_form": closed, "unit": base.name(), "input": input})
                })
                .collect();
            vec![("capacity.json".into(), json_text(&body)?)]
        }
    })
}

fn task_region(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    let base = cfg.log_base()?;
    let ch = cfg.broadcast()?;
    let seed = cfg.seed.expect("validated");
    let u_size = cfg.u_size.unwrap_or(ch.params.input_size());
    let order = ch.degradation_order()?;
    if !order.y2_degraded() {
        return Err(CliError::usage(format!(
            "region needs Y2 degraded from Y1 for the boundary sweep, found {}",
            order_name(order)
        )));
    }
    let before = sample_achievable_points(&ch, cfg.n, seed, u_size)?;
    let after = filter_time_sharing(&before)?;
    let settings = SweepSettings {
        mu_min: cfg.mu_min,
        mu_max: cfg.mu_max,
        mu_points: cfg.mu_points,
        restarts: cfg.restarts,
        seed,
        u_size,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
    };
    let sweep = boundary_sweep(&ch, &settings)?;
    let corners = [
        RatePoint::new(before.c1, 0.0, PointTag::TimeSharing),
        RatePoint::new(0.0, before.c2, PointTag::TimeSharing),
    ];
    Ok(match cfg.format {
        Format::Csv => {
            let mut boundary = String::from("mu,r1,r2,objective,iterations\n");
            for run in &sweep {
                boundary.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_num(run.mu),
                    fmt_num(base.from_nats(run.point.r1)),
                    fmt_num(base.from_nats(run.point.r2)),
                    fmt_num(base.from_nats(run.objective())),
                    run.iterations
                ));
            }
            vec![
                ("before.csv".into(), points_csv(&before.points, base)),
                ("after.csv".into(), points_csv(&after.points, base)),
                ("boundary.csv".into(), boundary),
                ("timeshare.csv".into(), points_csv(&corners, base)),
            ]
        }
        Format::Json => {
            let conv = |pts: &[RatePoint]| -> Vec<serde_json::Value> {
                pts.iter()
                    .map(|p| {
                        json!({"r1": base.from_nats(p.r1), "r2": base.from_nats(p.r2),
                               "tag": p.tag, "seed": p.seed})
                    })
                    .collect()
            };
            let boundary: Vec<_> = sweep
                .iter()
                .map(|r| {
                    json!({"mu": r.mu, "r1": base.from_nats(r.point.r1),
                           "r2": base.from_nats(r.point.r2),
                           "objective": base.from_nats(r.objective()), "iterations": r.iterations})
                })
                .collect();
            let body = json!({
                "metadata": {
                    "config": cfg, "unit": base.name(), "samples": before.metadata.samples,
                    "seed": seed, "u_size": u_size, "capacity_tol": before.metadata.capacity_tol,
                },
                "c1": base.from_nats(before.c1),
                "c2": base.from_nats(before.c2),
                "before": conv(&before.points),
                "after": conv(&after.points),
                "boundary": boundary,
                "timeshare": conv(&corners),
            });
            vec![("region.json".into(), json_text(&body)?)]
        }
    })
}

fn task_pg22(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    let base = cfg.log_base()?;
    let e1 = Pg22Pattern::try_from(cfg.pattern(1)?)?;
    let e2 = Pg22Pattern::try_from(cfg.pattern(2)?)?;
    let class = classify_region(&e1, &e2);
    let curve = gamma_curve(&e1, &e2, cfg.points)?;
    let summary = json!({
        "case": class.case,
        "discriminant": class.discriminant,
        "c1": base.from_nats(pg22_capacity(&e1)),
        "c2": base.from_nats(pg22_capacity(&e2)),
        "unit": base.name(),
    });
    Ok(match cfg.format {
        Format::Csv => vec![
            ("curve.csv".into(), curve_csv(&curve, base)),
            ("summary.json".into(), json_text(&summary)?),
        ],
        Format::Json => {
            let pts: Vec<_> = curve
                .iter()
                .map(|c| json!({"sigma": c.sigma, "r1": base.from_nats(c.r1), "r2": base.from_nats(c.r2)}))
                .collect();
            let body = json!({"summary": summary, "curve": pts});
            vec![("pg22.json".into(), json_text(&body)?)]
        }
    })
}

fn task_erasure(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    let (r1, r2) = match (cfg.r1, cfg.r2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(CliError::usage("erasure-check needs --r1 and --r2 (nats)")),
    };
    let pt = RatePoint::new(r1, r2, PointTag::Analytic);
    let inside = erasure_region_contains(cfg.rho1, cfg.rho2, cfg.x_size, &pt)?;
    let lx = (cfg.x_size as f64).ln();
    let (c1, c2) = ((1.0 - cfg.rho1) * lx, (1.0 - cfg.rho2) * lx);
    Ok(match cfg.format {
        Format::Csv => vec![(
            "check.csv".into(),
            format!(
                "rho1,rho2,x_size,r1,r2,c1,c2,contained\n{},{},{},{},{},{},{},{}\n",
                fmt_num(cfg.rho1),
                fmt_num(cfg.rho2),
                cfg.x_size,
                fmt_num(r1),
                fmt_num(r2),
                fmt_num(c1),
                fmt_num(c2),
                inside
            ),
        )],
        Format::Json => vec![(
            "check.json".into(),
            json_text(&json!({
                "rho1": cfg.rho1, "rho2": cfg.rho2, "x_size": cfg.x_size,
                "r1": r1, "r2": r2, "c1": c1, "c2": c2, "contained": inside,
            }))?,
        )],
    })
}
