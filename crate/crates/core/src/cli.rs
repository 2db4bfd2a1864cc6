//! The `ims` command-line driver.
//!
//! Every output begins with `#` header lines echoing the resolved run
//! configuration; CSV or JSON follows. Exit codes: 0 success, 1 computation
//! error or failed verification, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{ImsError, Result};
use crate::experiments::{run_suite, search_lower_bound, summarize, Lab, SCHEMA_VERSION};
use crate::families::{self, FamilyKind};
use crate::norms::{growth_norm, GridSpec};
use crate::quadrature::{cache::CACHE_ENV, QuadConfig, ResultCache};
use crate::spectrum::{RadiusLadder, Spectrometer, SpectrumConfig, SpectrumEstimate, ALPHA_HI, ALPHA_LO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "ims", version, about = "Integral means spectra of univalent maps")]
pub struct Cli {
    #[command(flatten)]
    pub opts: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// First ladder rung k (r_k = 1 - 2^-k)
    #[arg(long, global = true)]
    pub k_min: Option<u32>,
    /// Last ladder rung k (at most 15)
    #[arg(long, global = true)]
    pub k_max: Option<u32>,
    /// Rungs in the fitting window
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Relative tolerance of each mean integral
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    /// Starting trapezoid points per boundary-peak width
    #[arg(long, global = true)]
    pub density: Option<f64>,
    /// Result cache file (default: $IMS_CACHE)
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Recorded in the header; all sampling grids are deterministic
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write results to FILE instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key = value configuration file, overridden by flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Accept catalog parameters outside their valid range (maps lose certification)
    #[arg(long, global = true)]
    pub unchecked: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum estimates at a list of exponents
    Spectrum {
        map: String,
        /// Comma-separated exponents
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        t: Vec<f64>,
        /// Also report the area-criterion estimate
        #[arg(long)]
        area: bool,
    },
    /// Spectrum estimates on an arithmetic grid A:B:STEP
    Curve {
        map: String,
        #[arg(long = "t-range", allow_hyphen_values = true)]
        t_range: String,
    },
    /// Weighted growth norm of the pre-Schwarzian (j=1) or Schwarzian (j=2)
    Norms {
        map: String,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        j: u32,
        /// Take the norm of MAP itself rather than of its (pre-)Schwarzian
        #[arg(long)]
        raw: bool,
    },
    /// Run a verification suite and emit JSON check reports
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Golden-section lower-bound search over a one-parameter family
    Search {
        /// fgamma | ggamma | kscaled
        family: String,
        /// A:B inside the family's valid range
        #[arg(long)]
        interval: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 12)]
        budget: usize,
    },
    /// The map catalog
    Families {
        #[command(subcommand)]
        action: FamiliesAction,
    },
    /// Result cache maintenance
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum FamiliesAction {
    List,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CacheAction {
    Stats,
    Gc,
}

/// Fully resolved configuration, echoed into every output header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub k_min: u32,
    pub k_max: u32,
    pub window: usize,
    pub rtol: f64,
    pub density: f64,
    pub cache: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    pub seed: u64,
    pub unchecked: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SpectrumConfig::default();
        RunConfig {
            k_min: s.ladder.k_min,
            k_max: s.ladder.k_max,
            window: s.window,
            rtol: s.rtol,
            density: s.quad.density,
            cache: None,
            format: Format::Csv,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: 0,
            unchecked: false,
        }
    }
}

fn usage(msg: impl Into<String>) -> ImsError {
    ImsError::InvalidArgument(msg.into())
}

/// Parses a `key = value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| usage(format!("config line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Defaults, then the config file, then `IMS_CACHE`, then flags.
    pub fn resolve(opts: &GlobalOpts) -> Result<Self> {
        let mut c = RunConfig::default();
        if let Some(path) = &opts.config {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
            for (k, v) in parse_config_file(&text)? {
                let bad = |e: &dyn std::fmt::Display| usage(format!("config key {k}: {e}"));
                match k.as_str() {
                    "k_min" => c.k_min = v.parse().map_err(|e| bad(&e))?,
                    "k_max" => c.k_max = v.parse().map_err(|e| bad(&e))?,
                    "window" => c.window = v.parse().map_err(|e| bad(&e))?,
                    "rtol" => c.rtol = v.parse().map_err(|e| bad(&e))?,
                    "density" => c.density = v.parse().map_err(|e| bad(&e))?,
                    "cache" => c.cache = Some(PathBuf::from(v)),
                    "format" => c.format = Format::from_str(&v, true).map_err(|e| bad(&e))?,
                    "threads" => c.threads = v.parse().map_err(|e| bad(&e))?,
                    "seed" => c.seed = v.parse().map_err(|e| bad(&e))?,
                    "unchecked" => c.unchecked = v.parse().map_err(|e| bad(&e))?,
                    _ => return Err(usage(format!("unknown config key '{k}'"))),
                }
            }
        }
        if c.cache.is_none() {
            c.cache = std::env::var_os(CACHE_ENV).filter(|p| !p.is_empty()).map(PathBuf::from);
        }
        if let Some(v) = opts.k_min {
            c.k_min = v;
        }
        if let Some(v) = opts.k_max {
            c.k_max = v;
        }
        if let Some(v) = opts.window {
            c.window = v;
        }
        if let Some(v) = opts.rtol {
            c.rtol = v;
        }
        if let Some(v) = opts.density {
            c.density = v;
        }
        if let Some(v) = &opts.cache {
            c.cache = Some(v.clone());
        }
        if let Some(v) = opts.format {
            c.format = v;
        }
        if let Some(v) = opts.threads {
            c.threads = v;
        }
        if let Some(v) = opts.seed {
            c.seed = v;
        }
        c.unchecked |= opts.unchecked;
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let ladder = RadiusLadder::new(self.k_min, self.k_max)?;
        if self.window < 2 || self.window > ladder.len() {
            return Err(usage(format!("window must be in [2, {}]", ladder.len())));
        }
        if !(self.rtol > 0.0 && self.rtol < 1e-2) {
            return Err(usage("rtol must be in (0, 1e-2)"));
        }
        if !(self.density >= 1.0 && self.density.is_finite()) {
            return Err(usage("density must be >= 1"));
        }
        if self.threads == 0 {
            return Err(usage("threads must be >= 1"));
        }
        Ok(())
    }

    pub fn spectrum_config(&self) -> Result<SpectrumConfig> {
        Ok(SpectrumConfig {
            ladder: RadiusLadder::new(self.k_min, self.k_max)?,
            window: self.window,
            rtol: self.rtol,
            quad: QuadConfig { density: self.density, ..QuadConfig::default() },
        })
    }

    fn header_lines(&self) -> Vec<(String, String)> {
        let q = QuadConfig::default();
        vec![
            ("k_min".into(), self.k_min.to_string()),
            ("k_max".into(), self.k_max.to_string()),
            ("window".into(), self.window.to_string()),
            ("rtol".into(), format!("{:e}", self.rtol)),
            ("density".into(), format!("{:?}", self.density)),
            ("n_min".into(), q.n_min.to_string()),
            ("n_max".into(), q.n_max.to_string()),
            ("cache".into(), self.cache.as_ref().map_or("none".into(), |p| p.display().to_string())),
            ("format".into(), format!("{:?}", self.format).to_lowercase()),
            ("threads".into(), self.threads.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("unchecked".into(), self.unchecked.to_string()),
        ]
    }
}

/// Parses `A:B:STEP` into the grid `A, A+STEP, ...` up to `B`.
pub fn parse_t_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("bad number '{s}' in t-range")));
    let [a, b, step] = parts.as_slice() else {
        return Err(usage(format!("t-range '{text}' must be A:B:STEP")));
    };
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if !(a.is_finite() && b.is_finite() && step > 0.0 && b >= a) {
        return Err(usage("t-range needs finite A <= B and STEP > 0"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(usage("t-range has too many points"));
    }
    Ok((0..=n).map(|i| a + step * i as f64).collect())
}

/// Parses `A:B`.
pub fn parse_interval(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text.split_once(':').ok_or_else(|| usage(format!("interval '{text}' must be A:B")))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| usage(format!("bad number '{s}' in interval")));
    Ok((num(a)?, num(b)?))
}

struct Output {
    header: Vec<(String, String)>,
    body: Vec<u8>,
    trailer: Vec<String>,
    failed: bool,
}

impl Output {
    fn new(command: &str, config: &RunConfig) -> Self {
        let mut header = vec![
            ("ims".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("schema_version".into(), SCHEMA_VERSION.to_string()),
            ("command".into(), command.to_string()),
        ];
        header.extend(config.header_lines());
        Output { header, body: Vec::new(), trailer: Vec::new(), failed: false }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    fn json(&mut self, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| ImsError::Evaluation(e.to_string()))?;
        self.body.extend_from_slice(text.as_bytes());
        self.body.push(b'\n');
        Ok(())
    }

    fn csv(&mut self, columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let werr = |e: csv::Error| ImsError::Evaluation(e.to_string());
        w.write_record(columns).map_err(werr)?;
        for r in rows {
            w.write_record(r).map_err(werr)?;
        }
        self.body.extend(w.into_inner().map_err(|e| ImsError::Evaluation(e.to_string()))?);
        Ok(())
    }

    fn render(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (k, v) in &self.header {
            out.extend(format!("# {k} = {v}\n").into_bytes());
        }
        out.extend_from_slice(&self.body);
        for line in &self.trailer {
            out.extend(format!("# {line}\n").into_bytes());
        }
        out
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn estimate_row(t: f64, e: &Result<SpectrumEstimate>) -> Vec<String> {
    match e {
        Ok(e) => vec![
            num(t),
            num(e.beta_hat),
            e.regime.as_str().to_string(),
            e.window.to_string(),
            num(e.fit_residual),
            num(e.slope_min()),
            num(e.slope_max()),
        ],
        Err(_) => vec![num(t), "NaN".into(), "Error".into(), String::new(), String::new(), String::new(), String::new()],
    }
}

const SPECTRUM_COLUMNS: [&str; 7] = ["t", "beta_hat", "regime", "window", "fit_residual", "slope_min", "slope_max"];

fn estimate_json(t: f64, e: &Result<SpectrumEstimate>) -> serde_json::Value {
    match e {
        Ok(e) => json!({
            "t": t,
            "beta_hat": e.beta_hat,
            "regime": e.regime.as_str(),
            "window": e.window,
            "fit_residual": e.fit_residual,
            "slope_min": e.slope_min(),
            "slope_max": e.slope_max(),
            "ls_slope": e.ls_slope,
            "log_means": e.log_means,
        }),
        Err(err) => json!({ "t": t, "error": err.to_string() }),
    }
}

fn open_cache(config: &RunConfig) -> Result<Option<Arc<ResultCache>>> {
    config.cache.as_ref().map(|p| ResultCache::open(p).map(Arc::new)).transpose()
}

fn spectrum_table(
    out: &mut Output,
    config: &RunConfig,
    map_text: &str,
    ts: &[f64],
    area: bool,
    errors: &mut Vec<String>,
) -> Result<()> {
    if let Some(t) = ts.iter().find(|t| !t.is_finite()) {
        return Err(usage(format!("non-finite exponent {t}")));
    }
    let parsed = families::parse_map(map_text, config.unchecked)?;
    out.meta("map", map_text.trim());
    out.meta("canonical", parsed.map.canonical());
    out.meta("map_id", parsed.map.map_id());
    out.meta("certificate", format!("{:?}", parsed.map.certificate));
    let cache = open_cache(config)?;
    let spec = Spectrometer::new(&parsed.map, config.spectrum_config()?, cache.clone());
    let rows = spec.estimate_many(ts)?;
    let areas: Vec<Option<Result<f64>>> =
        ts.iter().map(|&t| area.then(|| spec.estimate_area(t, ALPHA_LO, ALPHA_HI))).collect();
    if let Some(c) = &cache {
        c.flush()?;
    }
    for (t, r) in ts.iter().zip(&rows) {
        if let Err(e) = r {
            errors.push(format!("t={t}: {e}"));
        }
    }
    for (t, a) in ts.iter().zip(&areas) {
        if let Some(Err(e)) = a {
            errors.push(format!("t={t} (area): {e}"));
        }
    }
    match config.format {
        Format::Csv => {
            let mut cols = SPECTRUM_COLUMNS.to_vec();
            if area {
                cols.push("beta_area");
            }
            let table: Vec<Vec<String>> = ts
                .iter()
                .zip(&rows)
                .zip(&areas)
                .map(|((&t, r), a)| {
                    let mut row = estimate_row(t, r);
                    if let Some(a) = a {
                        row.push(a.as_ref().map_or("NaN".into(), |v| num(*v)));
                    }
                    row
                })
                .collect();
            out.csv(&cols, &table)
        }
        Format::Json => {
            let table: Vec<serde_json::Value> = ts
                .iter()
                .zip(&rows)
                .zip(&areas)
                .map(|((&t, r), a)| {
                    let mut v = estimate_json(t, r);
                    if let Some(a) = a {
                        v["beta_area"] = a.as_ref().map_or(json!(null), |x| json!(x));
                    }
                    v
                })
                .collect();
            out.json(&json!({
                "schema_version": SCHEMA_VERSION,
                "map": map_text.trim(),
                "map_id": parsed.map.map_id(),
                "rows": table,
            }))
        }
    }
}

fn execute(cli: &Cli, config: &RunConfig, out: &mut Output, errors: &mut Vec<String>) -> Result<()> {
    match &cli.command {
        Command::Spectrum { map, t, area } => spectrum_table(out, config, map, t, *area, errors),
        Command::Curve { map, t_range } => {
            let ts = parse_t_range(t_range)?;
            out.meta("t_range", t_range);
            spectrum_table(out, config, map, &ts, false, errors)
        }
        Command::Norms { map, j, raw } => {
            let parsed = families::parse_map(map, config.unchecked)?;
            let phi = match (raw, j) {
                (true, _) => parsed.map.clone(),
                (false, 1) => parsed.map.pre_schwarzian(),
                (false, _) => parsed.map.schwarzian(),
            };
            out.meta("map", map.trim());
            out.meta("map_id", parsed.map.map_id());
            out.meta("quantity", if *raw { "map" } else if *j == 1 { "pre_schwarzian" } else { "schwarzian" });
            let grid = GridSpec::default();
            out.meta("grid", format!("{} radii to {}, {} angles", grid.radii().len(), grid.r_max(), grid.angular_steps));
            let rep = growth_norm(&phi, *j, &grid)?;
            match config.format {
                Format::Json => out.json(&json!({ "schema_version": SCHEMA_VERSION, "map": map.trim(), "report": rep })),
                Format::Csv => {
                    let mut rows = vec![vec![
                        "norm".into(),
                        num(rep.witness.norm()),
                        num(rep.value),
                        num(rep.witness.re),
                        num(rep.witness.im),
                    ]];
                    rows.extend(rep.tail_profile.iter().map(|(r, v)| {
                        vec!["tail".into(), num(*r), num(*v), String::new(), String::new()]
                    }));
                    out.csv(&["kind", "r", "value", "witness_re", "witness_im"], &rows)
                }
            }
        }
        Command::Verify { suite } => {
            let lab = Lab::new(config.spectrum_config()?, open_cache(config)?);
            out.meta("suite", suite);
            let reports = run_suite(&lab, suite)?;
            let summary = summarize(&reports);
            out.json(&reports)?;
            out.trailer.push(summary.line());
            out.failed = !summary.ok();
            Ok(())
        }
        Command::Search { family, interval, t, budget } => {
            let kind = FamilyKind::parse(family)?;
            let interval = parse_interval(interval)?;
            let lab = Lab::new(config.spectrum_config()?, open_cache(config)?);
            out.meta("family", kind.name());
            let o = search_lower_bound(&lab, kind, interval, *t, *budget)?;
            if o.violation {
                out.trailer.push("VIOLATION".into());
                out.failed = true;
            }
            match config.format {
                Format::Json => out.json(&o),
                Format::Csv => {
                    let opt = |v: Option<f64>| v.map_or("NaN".into(), num);
                    let mut rows: Vec<Vec<String>> = o
                        .probes
                        .iter()
                        .map(|p| vec!["probe".into(), String::new(), num(p.param), opt(p.beta_hat)])
                        .collect();
                    let x = &o.extrapolation;
                    rows.push(vec!["near".into(), String::new(), num(x.near.param), opt(x.near.beta_hat)]);
                    rows.push(vec!["far".into(), String::new(), num(x.far.param), opt(x.far.beta_hat)]);
                    rows.push(vec!["star".into(), String::new(), num(o.param_star), num(o.beta_star)]);
                    rows.push(vec!["family_sup".into(), String::new(), num(x.boundary), opt(x.family_sup)]);
                    rows.push(vec!["limit".into(), x.limit_map.clone(), num(x.boundary), opt(x.limit_beta)]);
                    for r in &o.comparison {
                        let role = if r.violation { "VIOLATION" } else { r.kind };
                        rows.push(vec![format!("row:{role}"), r.label.into(), String::new(), num(r.value)]);
                    }
                    out.csv(&["role", "label", "param", "value"], &rows)
                }
            }
        }
        Command::Families { action: FamiliesAction::List } => {
            let cat = families::catalog();
            match config.format {
                Format::Json => out.json(&json!({ "schema_version": SCHEMA_VERSION, "families": cat })),
                Format::Csv => {
                    let rows: Vec<Vec<String>> = cat
                        .iter()
                        .map(|e| {
                            vec![
                                e.name.into(),
                                e.syntax.into(),
                                e.valid_range.into(),
                                e.reference_beta.clone(),
                                e.kinks.into(),
                            ]
                        })
                        .collect();
                    out.csv(&["name", "syntax", "valid_range", "reference_beta", "kinks"], &rows)
                }
            }
        }
        Command::Cache { action } => {
            let path = config.cache.as_ref().ok_or_else(|| usage(format!("no cache: pass --cache or set {CACHE_ENV}")))?;
            let cache = ResultCache::open(path)?;
            let stats = match action {
                CacheAction::Stats => cache.stats()?,
                CacheAction::Gc => cache.gc()?,
            };
            match config.format {
                Format::Json => out.json(&json!({ "schema_version": SCHEMA_VERSION, "path": path, "stats": stats })),
                Format::Csv => out.csv(
                    &["records", "duplicate_lines", "malformed_lines", "file_bytes"],
                    &[vec![
                        stats.records.to_string(),
                        stats.duplicate_lines.to_string(),
                        stats.malformed_lines.to_string(),
                        stats.file_bytes.to_string(),
                    ]],
                ),
            }
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum { .. } => "spectrum",
        Command::Curve { .. } => "curve",
        Command::Norms { .. } => "norms",
        Command::Verify { .. } => "verify",
        Command::Search { .. } => "search",
        Command::Families { .. } => "families list",
        Command::Cache { action: CacheAction::Stats } => "cache stats",
        Command::Cache { action: CacheAction::Gc } => "cache gc",
    }
}

fn exit_code(e: &ImsError) -> i32 {
    match e {
        ImsError::Parse { .. } | ImsError::Range { .. } | ImsError::InvalidArgument(_) | ImsError::LadderTooShort { .. } => 2,
        _ => 1,
    }
}

/// Runs the driver on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let config = match RunConfig::resolve(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(config.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return 1;
        }
    };
    let mut out = Output::new(command_name(&cli.command), &config);
    let mut errors = Vec::new();
    if let Err(e) = pool.install(|| execute(&cli, &config, &mut out, &mut errors)) {
        let _ = writeln!(stderr, "error: {e}");
        return exit_code(&e);
    }
    let bytes = out.render();
    let written = match &cli.opts.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return 1;
    }
    for e in &errors {
        let _ = writeln!(stderr, "error: {e}");
    }
    if out.failed || !errors.is_empty() {
        1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_range_grid() {
        assert_eq!(parse_t_range("-1:1:0.5").unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(parse_t_range("0:1:0.3").unwrap().len(), 4);
        assert!(parse_t_range("1:0:0.1").is_err());
        assert!(parse_t_range("0:1").is_err());
    }

    #[test]
    fn config_file_syntax() {
        let m = parse_config_file("# comment\nwindow = 5\nk-max=12 # trailing\n\n").unwrap();
        assert_eq!(m["window"], "5");
        assert_eq!(m["k_max"], "12");
        assert!(parse_config_file("window 5").is_err());
    }

    #[test]
    fn interval_syntax() {
        assert_eq!(parse_interval("0.1:0.9").unwrap(), (0.1, 0.9));
        assert!(parse_interval("0.1").is_err());
    }
}
