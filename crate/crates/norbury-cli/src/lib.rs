//! Front end for the identity checks: argument and config handling,
//! pipelines per subcommand, and report emission.

use clap::{Args, Parser, Subcommand};
use norbury::curves::{enumerate_arcs, pairs_csv, PairKind};
use norbury::identity::{
    band_decomposition_check, bordered_identity_check, calibration_width, enumerate_for, full_circle_width,
    sum_alternative_with, sum_identity_with, width, SeriesReport,
};
use norbury::limitset::{gap_images, height_extremes, modulus_identity_check, orbit_points, render_svg, sample_csv};
use norbury::repbuild::{bend, build_bordered, build_family, Boundary, Representation, SurfaceId};
use norbury::{GroupWord, SurfaceSpec, C64};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use std::fmt;
use std::path::{Path, PathBuf};

pub const SCHEMA: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "norbury", version, about = "Numerical checks of cusped identities on nonorientable surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Sum the cusped identity and compare with 1/2.
    Verify(Opts),
    /// Alternative form over band boundaries and pants outside bands.
    #[command(name = "verify-alt")]
    VerifyAlt(Opts),
    /// Regrouping and trace-relation residuals for every band.
    Bands(Opts),
    /// Bordered identity with the cusp replaced by a boundary of length --l1.
    Bordered(Opts),
    /// Width formula over the full circle and between two gap endpoints.
    Width(Opts),
    /// Horo-core modulus against the partitioned sums.
    Modulus(Opts),
    /// List cusp pairs as CSV.
    Enumerate(Opts),
    /// Sample the limit curve and draw one period as SVG.
    Render(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::VerifyAlt(_) => "verify-alt",
            Command::Bands(_) => "bands",
            Command::Bordered(_) => "bordered",
            Command::Width(_) => "width",
            Command::Modulus(_) => "modulus",
            Command::Enumerate(_) => "enumerate",
            Command::Render(_) => "render",
        }
    }

    fn opts(&self) -> &Opts {
        match self {
            Command::Verify(o)
            | Command::VerifyAlt(o)
            | Command::Bands(o)
            | Command::Bordered(o)
            | Command::Width(o)
            | Command::Modulus(o)
            | Command::Enumerate(o)
            | Command::Render(o) => o,
        }
    }
}

/// Flags shared by every subcommand. A `--config` JSON file may set any of
/// them under the same (kebab-case) names; flags on the command line win.
#[derive(Args, Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Opts {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Subcommand named in a config file; must match the one invoked.
    #[arg(skip)]
    pub command: Option<String>,
    /// Surface family: N12, N21 or N13.
    #[arg(long)]
    pub surface: Option<String>,
    /// Surface spec file {"crosscaps", "punctures", "cusp"}.
    #[arg(long)]
    pub surface_spec: Option<PathBuf>,
    /// Family parameters (repeat or list).
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub param: Option<Vec<f64>>,
    /// Load a representation JSON instead of building one.
    #[arg(long)]
    pub rep: Option<PathBuf>,
    /// Write the representation used to this path.
    #[arg(long)]
    pub save_rep: Option<PathBuf>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// 2-sided curve to bend along.
    #[arg(long)]
    pub bend_curve: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub bend_re: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub bend_im: Option<f64>,
    #[arg(long)]
    pub bend_steps: Option<usize>,
    /// Boundary length replacing the distinguished cusp.
    #[arg(long)]
    pub l1: Option<f64>,
    /// Length replacing the second cusp of N12.
    #[arg(long)]
    pub l2: Option<f64>,
    /// Gap-end word opening the width window.
    #[arg(long)]
    pub xi: Option<String>,
    /// Gap-end word closing the width window.
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub max_word_len: Option<usize>,
    /// Primary tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Secondary tolerance (agreement, regrouping or sum cancellation).
    #[arg(long)]
    pub tol2: Option<f64>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($a:expr, $b:expr; $($f:ident),*) => {
        Opts { $($f: $a.$f.clone().or($b.$f.clone()),)* }
    };
}

impl Opts {
    fn merged(&self, cfg: &Opts) -> Opts {
        merge_fields!(self, cfg; config, command, surface, surface_spec, param, rep, save_rep, cutoff, bend_curve,
            bend_re, bend_im, bend_steps, l1, l2, xi, eta, max_word_len, tol, tol2, out, csv, svg)
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute { kind: String, message: String },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Compute { kind, message } => write!(f, "{kind}: {message}"),
        }
    }
}

fn compute<E: fmt::Debug + fmt::Display>(e: E) -> CliError {
    let dbg = format!("{e:?}");
    let kind = dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
    CliError::Compute { kind, message: e.to_string() }
}

fn usage(m: impl Into<String>) -> CliError {
    CliError::Usage(m.into())
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub opts: Opts,
    pub cutoff: f64,
    pub max_word_len: usize,
}

fn load_config(path: &Path) -> Result<Opts, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

pub fn resolve(cmd: &Command) -> Result<RunConfig, CliError> {
    let cli = cmd.opts();
    let opts = match &cli.config {
        Some(p) => cli.merged(&load_config(p)?),
        None => cli.clone(),
    };
    if let Some(c) = &opts.command {
        if c != cmd.name() {
            return Err(usage(format!("config is for {c:?}, invoked {:?}", cmd.name())));
        }
    }
    let cutoff = opts.cutoff.unwrap_or(18.0);
    if !(cutoff >= 4.0) || !cutoff.is_finite() {
        return Err(usage(format!("cutoff must be at least 4 (got {cutoff})")));
    }
    for (name, t) in [("tol", opts.tol), ("tol2", opts.tol2)] {
        if let Some(t) = t {
            if !(t > 0.0) {
                return Err(usage(format!("{name} must be positive")));
            }
        }
    }
    let max_word_len = opts.max_word_len.unwrap_or(8);
    if max_word_len == 0 {
        return Err(usage("max-word-len must be positive"));
    }
    if let Some(s) = opts.bend_steps {
        if s == 0 {
            return Err(usage("bend-steps must be positive"));
        }
    }
    Ok(RunConfig { command: cmd.name(), opts, cutoff, max_word_len })
}

fn surface_id(o: &Opts) -> Result<SurfaceId, CliError> {
    match (&o.surface, &o.surface_spec) {
        (Some(_), Some(_)) => Err(usage("give either --surface or --surface-spec")),
        (Some(s), None) => s.parse().map_err(|_| usage(format!("unknown surface {s:?}"))),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            let spec: SurfaceSpec = serde_json::from_str(&text).map_err(|e| usage(format!("bad surface spec: {e}")))?;
            SurfaceId::from_spec(spec).map_err(|e| usage(e.to_string()))
        }
        (None, None) => Ok(SurfaceId::N12),
    }
}

fn params(o: &Opts, id: SurfaceId) -> Result<Vec<f64>, CliError> {
    let p = o.param.clone().unwrap_or_else(|| id.default_params());
    if p.len() != id.param_count() {
        return Err(usage(format!("{id} takes {} parameter(s), got {}", id.param_count(), p.len())));
    }
    Ok(p)
}

fn parse_word(rep: &Representation, s: &str) -> Result<GroupWord, CliError> {
    rep.surface.parse(s).map_err(|e| usage(e.to_string()))
}

fn bend_t(o: &Opts) -> Option<C64> {
    if o.bend_re.is_none() && o.bend_im.is_none() {
        None
    } else {
        Some(C64::new(o.bend_re.unwrap_or(0.0), o.bend_im.unwrap_or(0.0)))
    }
}

fn representation(cfg: &RunConfig) -> Result<Representation, CliError> {
    let o = &cfg.opts;
    let base = if let Some(p) = &o.rep {
        let text = std::fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("bad representation file: {e}")))?;
        Representation::from_json(&v).map_err(compute)?
    } else {
        let id = surface_id(o)?;
        let p = params(o, id)?;
        if cfg.command == "bordered" {
            if id != SurfaceId::N12 {
                return Err(usage("bordered runs on N12"));
            }
            let l1 = o.l1.ok_or_else(|| usage("bordered needs --l1"))?;
            if !(l1 > 0.0) {
                return Err(usage("l1 must be positive"));
            }
            let l2 = o.l2.unwrap_or(0.0);
            if l2 < 0.0 {
                return Err(usage("l2 must be non-negative"));
            }
            build_bordered(p[0], Boundary { l1, l2 }).map_err(compute)?
        } else {
            build_family(id, &p).map_err(compute)?
        }
    };
    let rep = match (&o.bend_curve, bend_t(o)) {
        (Some(c), t) => {
            let w = parse_word(&base, c)?;
            bend(&base, &w, t.unwrap_or_default(), o.bend_steps.unwrap_or(16)).map_err(compute)?
        }
        (None, Some(_)) => return Err(usage("a bend parameter needs --bend-curve")),
        (None, None) => base,
    };
    if let Some(p) = &o.save_rep {
        write_file(p, &(serde_json::to_string_pretty(&rep.to_json()).expect("json") + "\n"))?;
    }
    Ok(rep)
}

fn write_file(p: &Path, s: &str) -> Result<(), CliError> {
    std::fs::write(p, s).map_err(|e| CliError::Compute { kind: "Io".into(), message: format!("{}: {e}", p.display()) })
}

/// Report fields common to every subcommand.
fn header(cfg: &RunConfig, rep: &Representation) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(cfg.command));
    m.insert("surface".into(), json!(rep.id.to_string()));
    m.insert("params".into(), json!(rep.params));
    let o = &cfg.opts;
    let bend = o.bend_curve.as_ref().map(|c| {
        let t = bend_t(o).unwrap_or_default();
        json!({"curve": c, "t_re": t.re, "t_im": t.im, "steps": o.bend_steps.unwrap_or(16)})
    });
    m.insert("bend".into(), json!(bend));
    m
}

fn series_fields(m: &mut Map<String, Value>, r: &SeriesReport) {
    m.insert("value_re".into(), json!(r.value.re));
    m.insert("value_im".into(), json!(r.value.im));
    m.insert("target".into(), json!(r.target));
    m.insert("term_count".into(), json!(r.term_count));
    m.insert("cutoff".into(), json!(r.cutoff));
    m.insert("tail_estimate".into(), json!(r.tail_estimate));
}

fn ledger_csv(r: &SeriesReport) -> String {
    let mut s = String::from("kind,alpha_word,beta_word,re_length,value_re,value_im\n");
    for t in &r.ledger {
        s.push_str(&format!("{},{},{},{},{},{}\n", t.kind, t.alpha, t.beta, t.re_length, t.value.re, t.value.im));
    }
    s
}

/// Runs the resolved command; returns the JSON report and whether it passed.
pub fn execute(cfg: &RunConfig) -> Result<(Value, bool), CliError> {
    let rep = representation(cfg)?;
    let o = &cfg.opts;
    let mut m = header(cfg, &rep);
    let cutoff = cfg.cutoff;
    let pass = match cfg.command {
        "verify" => {
            let tol = o.tol.unwrap_or(1e-3);
            let en = enumerate_for(&rep, cutoff).map_err(compute)?;
            let r = sum_identity_with(&rep, &en, cutoff).map_err(compute)?;
            series_fields(&mut m, &r);
            if let Some(p) = &o.csv {
                write_file(p, &ledger_csv(&r))?;
            }
            r.error() < tol && r.tail_estimate < tol
        }
        "verify-alt" => {
            let (tol, tol2) = (o.tol.unwrap_or(1e-3), o.tol2.unwrap_or(2e-3));
            let en = enumerate_for(&rep, cutoff).map_err(compute)?;
            let alt = sum_alternative_with(&rep, &en, cutoff).map_err(compute)?;
            let id = sum_identity_with(&rep, &en, cutoff).map_err(compute)?;
            series_fields(&mut m, &alt);
            let diff = (alt.value - id.value).norm();
            m.insert("identity_re".into(), json!(id.value.re));
            m.insert("identity_im".into(), json!(id.value.im));
            m.insert("difference".into(), json!(diff));
            if let Some(p) = &o.csv {
                write_file(p, &ledger_csv(&alt))?;
            }
            alt.error() < tol && diff < tol2
        }
        "bands" => {
            let tol = o.tol.unwrap_or(1e-9);
            let tol2 = o.tol2.unwrap_or(if rep.is_fuchsian() { 1e-9 } else { 1e-8 });
            let en = enumerate_for(&rep, cutoff).map_err(compute)?;
            let mut rows = Vec::new();
            let (mut worst_t, mut worst_r) = (0.0f64, 0.0f64);
            for p in en.pairs.iter().filter(|p| p.kind == PairKind::Moebius && p.length_sum() <= cutoff) {
                let r = band_decomposition_check(p, &rep).map_err(compute)?;
                worst_t = worst_t.max(r.trace);
                worst_r = worst_r.max(r.regroup);
                rows.push(json!({
                    "mu": rep.surface.render(&p.alpha),
                    "mu_prime": rep.surface.render(&p.beta),
                    "trace_residual": r.trace,
                    "regroup_residual": r.regroup,
                }));
            }
            m.insert("cutoff".into(), json!(cutoff));
            m.insert("bands".into(), json!(rows));
            m.insert("max_trace_residual".into(), json!(worst_t));
            m.insert("max_regroup_residual".into(), json!(worst_r));
            !rows.is_empty() && worst_t < tol && worst_r < tol2
        }
        "bordered" => {
            let tol = o.tol.unwrap_or(1e-2);
            let r = bordered_identity_check(&rep, cutoff).map_err(compute)?;
            series_fields(&mut m, &r);
            let rel = (r.value - r.target).norm() / r.target;
            m.insert("relative_error".into(), json!(rel));
            rel < tol
        }
        "width" => {
            let tol = o.tol.unwrap_or(1e-3);
            let en = enumerate_for(&rep, cutoff).map_err(compute)?;
            let full = full_circle_width(&rep, &en, cutoff).map_err(compute)?;
            let window = match (&o.xi, &o.eta) {
                (Some(x), Some(e)) => {
                    width(&rep, &en, &parse_word(&rep, x)?, &parse_word(&rep, e)?, cutoff).map_err(compute)?
                }
                (None, None) => calibration_width(&rep, &en, cutoff).map_err(compute)?,
                _ => return Err(usage("give both --xi and --eta")),
            };
            let w = |r: &norbury::identity::WidthReport| {
                json!({
                    "sum_re": r.sum.re, "sum_im": r.sum.im,
                    "expected_re": r.expected.re, "expected_im": r.expected.im,
                    "window": [r.window.0, r.window.1], "terms": r.terms, "residual": r.residual(),
                })
            };
            m.insert("cutoff".into(), json!(cutoff));
            m.insert("full_circle".into(), w(&full));
            m.insert("window".into(), w(&window));
            full.residual() < tol && window.residual() < tol
        }
        "modulus" => {
            let (tol, tol2) = (o.tol.unwrap_or(5e-3), o.tol2.unwrap_or(1e-3));
            let en = enumerate_for(&rep, cutoff).map_err(compute)?;
            let r = modulus_identity_check(&rep, &en, cutoff, cfg.max_word_len).map_err(compute)?;
            let e = &r.extremes;
            m.insert("cutoff".into(), json!(cutoff));
            m.insert("max_word_len".into(), json!(cfg.max_word_len));
            m.insert("modulus".into(), json!(e.modulus));
            m.insert("endpoint_modulus".into(), json!(r.endpoint_modulus));
            m.insert("z_minus".into(), json!([e.z_minus.z.re, e.z_minus.z.im, e.z_minus.direction]));
            m.insert("z_plus".into(), json!([e.z_plus.z.re, e.z_plus.z.im, e.z_plus.direction]));
            m.insert("ties".into(), json!([e.ties.0, e.ties.1]));
            m.insert("sigma_plus".into(), json!([r.sigma_plus.re, r.sigma_plus.im]));
            m.insert("sigma_minus".into(), json!([r.sigma_minus.re, r.sigma_minus.im]));
            m.insert("residuals".into(), json!(r.residuals));
            if o.csv.is_some() || o.svg.is_some() {
                let s = orbit_points(&rep, cfg.max_word_len);
                if let Some(p) = &o.csv {
                    write_file(p, &sample_csv(&s, &rep))?;
                }
                if let Some(p) = &o.svg {
                    write_file(p, &render_svg(&s, Some(e), &gap_images(&rep, &en)))?;
                }
            }
            r.residuals[0] < tol && r.residuals[1] < tol && r.residuals[2] < tol2
        }
        "enumerate" => {
            let en = enumerate_arcs(&rep, cutoff).map_err(compute)?;
            m.insert("cutoff".into(), json!(cutoff));
            m.insert("arcs".into(), json!(en.arcs.len()));
            m.insert("pairs".into(), json!(en.pairs.len()));
            m.insert("moebius_pairs".into(), json!(en.pairs.iter().filter(|p| p.kind == PairKind::Moebius).count()));
            m.insert("gap_mismatches".into(), json!(en.gap_mismatches));
            if let Some(p) = &o.csv {
                write_file(p, &pairs_csv(&en.pairs, &rep.surface))?;
            }
            en.gap_mismatches == 0
        }
        "render" => {
            let s = orbit_points(&rep, cfg.max_word_len);
            let ext = if rep.is_fuchsian() { None } else { Some(height_extremes(&rep, cfg.max_word_len).map_err(compute)?) };
            let en = enumerate_arcs(&rep.base(), cutoff.min(12.0)).map_err(compute)?;
            let svg = render_svg(&s, ext.as_ref(), &gap_images(&rep, &en));
            match &o.svg {
                Some(p) => write_file(p, &svg)?,
                None => return Err(usage("render needs --svg")),
            }
            if let Some(p) = &o.csv {
                write_file(p, &sample_csv(&s, &rep))?;
            }
            m.insert("points".into(), json!(s.points.len()));
            m.insert("max_word_len".into(), json!(cfg.max_word_len));
            if let Some(e) = &ext {
                m.insert("modulus".into(), json!(e.modulus));
            }
            true
        }
        other => return Err(usage(format!("unknown command {other}"))),
    };
    m.insert("pass".into(), json!(pass));
    Ok((Value::Object(m), pass))
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("NORBURY_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| usage(format!("NORBURY_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(usage("NORBURY_THREADS must be positive"));
        }
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn diagnostic(e: &CliError) -> String {
    let (kind, message) = match e {
        CliError::Usage(m) => ("Usage".to_string(), m.clone()),
        CliError::Compute { kind, message } => (kind.clone(), message.clone()),
    };
    json!({"schema": SCHEMA, "error": {"kind": kind, "message": message}}).to_string()
}

/// Parses `argv` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = init_threads().and_then(|_| resolve(&cli.command)).and_then(|cfg| {
        let (report, pass) = execute(&cfg)?;
        let text = serde_json::to_string_pretty(&report).expect("json") + "\n";
        match &cfg.opts.out {
            Some(p) => write_file(p, &text)?,
            None => print!("{text}"),
        }
        Ok(pass)
    });
    match outcome {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("{}", json!({"schema": SCHEMA, "error": {"kind": "ToleranceExceeded", "message": "a residual exceeded its tolerance"}}));
            1
        }
        Err(e) => {
            eprintln!("{}", diagnostic(&e));
            match e {
                CliError::Usage(_) => 2,
                CliError::Compute { .. } => 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("norbury-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    fn run_args(args: &[&str]) -> i32 {
        run(std::iter::once("norbury").chain(args.iter().copied()))
    }

    fn read_json(p: &Path) -> Value {
        serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
    }

    #[test]
    fn verify_n12_passes() {
        let out = tmp("n12.json");
        let code = run_args(&["verify", "--surface", "N12", "--param", "1.0", "--cutoff", "18", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let v = read_json(&out);
        assert_eq!(v["schema"], 1);
        assert!((v["value_re"].as_f64().unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn verify_bent_n21_passes() {
        let out = tmp("bent.json");
        let code = run_args(&[
            "verify", "--surface", "N21", "--bend-im", "0.1", "--bend-curve", "aa", "--cutoff", "18", "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let v = read_json(&out);
        assert!((v["value_re"].as_f64().unwrap() - 0.5).abs() < 1e-3);
        assert!(v["value_im"].as_f64().unwrap().abs() < 1e-3);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_args(&["verify", "--cutoff", "2"]), 2);
        assert_eq!(run_args(&["frobnicate"]), 2);
        assert_eq!(run_args(&["verify", "--surface", "N99"]), 2);
        assert_eq!(run_args(&["verify", "--surface", "N21", "--param", "1"]), 2);
        assert_eq!(run_args(&["verify", "--bend-im", "0.1"]), 2);
        assert_eq!(run_args(&["verify", "--tol", "-1"]), 2);
        assert_eq!(run_args(&["render", "--surface", "N12"]), 2);
        assert_eq!(run_args(&["bordered", "--surface", "N12"]), 2);
    }

    #[test]
    fn failures_exit_1() {
        // a tolerance no truncated series can meet
        assert_eq!(run_args(&["verify", "--surface", "N21", "--cutoff", "8", "--tol", "1e-12", "--out", tmp("tight.json").to_str().unwrap()]), 1);
        // a 1-sided bending curve
        assert_eq!(run_args(&["verify", "--surface", "N21", "--bend-curve", "a", "--bend-im", "0.1"]), 1);
    }

    #[test]
    fn reports_are_bit_identical() {
        let (a, b) = (tmp("det_a.json"), tmp("det_b.json"));
        for p in [&a, &b] {
            let code = run_args(&[
                "verify", "--surface", "N21", "--param", "1", "1.5", "--bend-curve", "ab", "--bend-im", "0.1", "--out",
                p.to_str().unwrap(),
            ]);
            assert_eq!(code, 0);
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn config_mirrors_flags() {
        let cfg = tmp("cfg.json");
        std::fs::write(
            &cfg,
            r#"{"command": "verify", "surface": "N21", "param": [1.0, 1.5], "bend-curve": "ab", "bend-im": 0.1, "cutoff": 16}"#,
        )
        .unwrap();
        let (a, b) = (tmp("cfg_a.json"), tmp("cfg_b.json"));
        assert_eq!(run_args(&["verify", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]), 0);
        let flags = [
            "verify", "--surface", "N21", "--param", "1", "1.5", "--bend-curve", "ab", "--bend-im", "0.1", "--cutoff", "16",
            "--out", b.to_str().unwrap(),
        ];
        assert_eq!(run_args(&flags), 0);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        // flags override the file
        let c = tmp("cfg_c.json");
        assert_eq!(run_args(&["verify", "--config", cfg.to_str().unwrap(), "--cutoff", "18", "--out", c.to_str().unwrap()]), 0);
        assert_eq!(read_json(&c)["cutoff"], 18.0);
        // wrong subcommand and unknown keys are usage errors
        assert_eq!(run_args(&["bands", "--config", cfg.to_str().unwrap()]), 2);
        std::fs::write(&cfg, r#"{"surfce": "N21"}"#).unwrap();
        assert_eq!(run_args(&["verify", "--config", cfg.to_str().unwrap()]), 2);
    }

    #[test]
    fn thread_cap_is_validated() {
        std::env::set_var("NORBURY_THREADS", "zero");
        let bad = run_args(&["verify", "--surface", "N12"]);
        std::env::set_var("NORBURY_THREADS", "2");
        let good = run_args(&["verify", "--surface", "N12", "--out", tmp("threads.json").to_str().unwrap()]);
        std::env::remove_var("NORBURY_THREADS");
        assert_eq!(bad, 2);
        assert_eq!(good, 0);
    }

    #[test]
    fn artifacts_have_expected_columns() {
        let csv = tmp("pairs.csv");
        let out = tmp("enum.json");
        assert_eq!(run_args(&["enumerate", "--surface", "N21", "--cutoff", "10", "--csv", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]), 0);
        let text = std::fs::read_to_string(&csv).unwrap();
        assert_eq!(text.lines().next().unwrap(), "kind,alpha_word,beta_word,parity,re_len_alpha,re_len_beta,direction");
        assert_eq!(text.lines().count() - 1, read_json(&out)["pairs"].as_u64().unwrap() as usize);

        let (svg, samples, rep) = (tmp("c.svg"), tmp("samples.csv"), tmp("rep.json"));
        let code = run_args(&[
            "render", "--surface", "N21", "--bend-curve", "ab", "--bend-im", "0.1", "--max-word-len", "5", "--svg",
            svg.to_str().unwrap(), "--csv", samples.to_str().unwrap(), "--save-rep", rep.to_str().unwrap(), "--out",
            tmp("render.json").to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
        assert_eq!(std::fs::read_to_string(&samples).unwrap().lines().next().unwrap(), "re,im,word,direction");

        // a saved representation reproduces the run
        let (a, b) = (tmp("rep_a.json"), tmp("rep_b.json"));
        assert_eq!(run_args(&["verify", "--surface", "N21", "--bend-curve", "ab", "--bend-im", "0.1", "--out", a.to_str().unwrap()]), 0);
        assert_eq!(run_args(&["verify", "--rep", rep.to_str().unwrap(), "--out", b.to_str().unwrap()]), 0);
        let (va, vb) = (read_json(&a), read_json(&b));
        assert_eq!(va["value_re"], vb["value_re"]);
        assert_eq!(va["value_im"], vb["value_im"]);
    }
}
