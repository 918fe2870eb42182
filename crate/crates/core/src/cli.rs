//! Command-line front end. Every run writes its artifacts plus a `run.json`
//! manifest echoing the resolved configuration into `--out`.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bargmann_fock::{self as bf, EntireFunctionSpec, TimeFunctionSpec};
use crate::error::Error;
use crate::gabor_core as gc;
use crate::indicator_lab::{self as il, DirectionSet, IndicatorProfile};
use crate::output::{complex_cells, Cell, Table};
use crate::phase_space::{self as ps, PhasePoint, PointSetSpec};
use crate::special_functions as sf;

/// Subcommand -> library operation. Each operation is reachable from exactly one subcommand.
pub const SUBCOMMANDS: &[(&str, &str)] = &[
    ("points", "phase_space::generate_points"),
    ("count", "phase_space::count_sector"),
    ("density", "phase_space::angular_density"),
    ("invsq", "phase_space::inverse_square_partial_sum"),
    ("eval-s", "special_functions::eval_s"),
    ("mlf", "special_functions::eval_mittag_leffler_half"),
    ("growth-scan", "special_functions::growth_ratio_scan"),
    ("shift", "gabor_core::tf_shift_eval"),
    ("inner", "gabor_core::gauss_inner_product"),
    ("gram", "gabor_core::gram_section"),
    ("biorth", "gabor_core::biorthogonal_residual"),
    ("complete", "gabor_core::completeness_residual"),
    ("bargmann", "bargmann_fock::bargmann_transform"),
    ("fock-norm", "bargmann_fock::fock_norm_truncated"),
    ("fock-probe", "bargmann_fock::fock_membership_probe"),
    ("growth-check", "bargmann_fock::fock_growth_check"),
    ("indicator", "indicator_lab::estimate_indicator"),
    ("levin", "indicator_lab::levin_density"),
    ("jensen", "indicator_lab::jensen_check"),
    ("envelope", "indicator_lab::h_envelope"),
    ("level-check", "indicator_lab::level_inequality_check"),
    ("convexity", "indicator_lab::convexity_floor_check"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "gaussian-gabor",
    version,
    about = "Gaussian Gabor systems on phase-space point sets: densities, Fock norms, indicators",
    arg_required_else_help = true,
    after_help = "Point sets: axes | lattice:A:B | lattice-minus:A:B:X:Y | explicit (with --points X:Y,...)\n\
Time functions: gaussian | shifted:X:Y | monomial:K\n\
Entire functions: one | monomial:N | expq:RE:IM | s | mlf:SCALE | quot(F;RE:IM) | prod(F;F;...)\n\
Angles are in radians. The envelope H uses midpoints (t_j + t_{j+1})/2 as sector boundaries."
)]
pub struct Cli {
    /// Output directory for artifacts and run.json
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for randomized sweeps
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Log progress to stderr
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct SetArgs {
    /// Point set: axes | lattice:A:B | lattice-minus:A:B:X:Y | explicit
    #[arg(long, default_value = "axes")]
    pub set: String,
    /// Points for --set explicit, as X:Y,X:Y,...
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_point)]
    pub points: Vec<PhasePoint>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    /// Indicator profile file (CSV with a `h` column, or JSON)
    #[arg(long, conflicts_with = "func")]
    pub profile: Option<PathBuf>,
    /// Estimate the profile of this function instead
    #[arg(long)]
    pub func: Option<String>,
    #[arg(long, default_value_t = 256)]
    pub thetas: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,11,12,13,14,15,16,17,18,19,20,21,22,23,24,25")]
    pub r: Vec<f64>,
}

#[derive(Debug, Subcommand, Serialize)]
#[command(rename_all = "kebab-case")]
pub enum Command {
    /// Points of a set with modulus < radius
    Points {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        radius: f64,
    },
    /// Points with |p| < r and angle in (theta, vartheta]
    #[command(allow_negative_numbers = true)]
    Count {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = TAU)]
        vartheta: f64,
    },
    /// Sector counts divided by pi r^2 along a ladder
    Density {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = TAU)]
        vartheta: f64,
    },
    /// Sum of lambda^-2 over |lambda| < r
    Invsq {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        r: f64,
    },
    /// s(z) = (z^2 - 1) z^-2 sin(pi z^2 / 2)
    EvalS {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true, value_parser = parse_complex)]
        z: Vec<Complex64>,
    },
    /// Mittag-Leffler E_1/2(z)
    Mlf {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true, value_parser = parse_complex)]
        z: Vec<Complex64>,
    },
    /// |s| exp(-(pi/2) r^2 |sin 2 theta|) on a polar grid
    GrowthScan {
        #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
        r: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        thetas: usize,
        #[arg(long, default_value_t = sf::DEFAULT_EXCLUSION_EPSILON)]
        epsilon: f64,
    },
    /// Time-frequency shifted Gaussian e^{2 pi i y t} g(t - x)
    #[command(allow_negative_numbers = true)]
    Shift {
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 0.0)]
        y: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        t: Vec<f64>,
    },
    /// <rho_lambda g, rho_mu g>
    Inner {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        lambda: PhasePoint,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        mu: PhasePoint,
    },
    /// Gram matrix of a finite section
    Gram {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        radius: f64,
        /// Also write the full matrix
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Biorthogonal-system residual of a finite section
    Biorth {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0.0)]
        reg: f64,
    },
    /// Distance from a time function to the span of finite sections
    Complete {
        #[command(flatten)]
        set: SetArgs,
        /// gaussian | shifted:X:Y | monomial:K
        #[arg(long, default_value = "gaussian", allow_hyphen_values = true)]
        target: String,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
    },
    /// Bargmann transform of a time function
    Bargmann {
        #[arg(long, default_value = "gaussian", allow_hyphen_values = true)]
        target: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true, value_parser = parse_complex)]
        z: Vec<Complex64>,
    },
    /// Truncated squared Fock norm over |z| < radius
    FockNorm {
        #[arg(long, allow_hyphen_values = true)]
        func: String,
        #[arg(long)]
        radius: f64,
    },
    /// Truncated Fock norms along a ladder with a membership verdict
    FockProbe {
        #[arg(long, allow_hyphen_values = true)]
        func: String,
        #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
        r: Vec<f64>,
    },
    /// max |F| e^{-(pi/2)|z|^2} per radius
    GrowthCheck {
        #[arg(long, allow_hyphen_values = true)]
        func: String,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
        r: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        thetas: usize,
    },
    /// Indicator h(theta) estimated on a radius ladder
    Indicator {
        #[arg(long, allow_hyphen_values = true)]
        func: String,
        #[arg(long, default_value_t = 256)]
        thetas: usize,
        #[arg(long, value_delimiter = ',', default_value = "10,11,12,13,14,15,16,17,18,19,20,21,22,23,24,25")]
        r: Vec<f64>,
    },
    /// (1/pi^2) times the integral of an indicator profile
    Levin {
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Both sides of Jensen's formula
    Jensen {
        #[arg(long, allow_hyphen_values = true)]
        func: String,
        #[arg(long)]
        r: f64,
    },
    /// Envelope H(theta; directions)
    Envelope {
        #[arg(long, value_delimiter = ',', required = true)]
        dirs: Vec<f64>,
        /// Angles to evaluate at (default: 512-point grid)
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
        /// Also integrate H over [0, 2 pi]
        #[arg(long)]
        integrate: bool,
    },
    /// Integral of H against 2 pi
    LevelCheck {
        #[arg(long, value_delimiter = ',', required_unless_present = "random")]
        dirs: Vec<f64>,
        /// Check this many seeded random admissible direction sets
        #[arg(long, conflicts_with = "dirs")]
        random: Option<usize>,
    },
    /// Trigonometric-convexity floor margin of an indicator profile
    Convexity {
        #[command(flatten)]
        profile: ProfileArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Points { .. } => "points",
            Command::Count { .. } => "count",
            Command::Density { .. } => "density",
            Command::Invsq { .. } => "invsq",
            Command::EvalS { .. } => "eval-s",
            Command::Mlf { .. } => "mlf",
            Command::GrowthScan { .. } => "growth-scan",
            Command::Shift { .. } => "shift",
            Command::Inner { .. } => "inner",
            Command::Gram { .. } => "gram",
            Command::Biorth { .. } => "biorth",
            Command::Complete { .. } => "complete",
            Command::Bargmann { .. } => "bargmann",
            Command::FockNorm { .. } => "fock-norm",
            Command::FockProbe { .. } => "fock-probe",
            Command::GrowthCheck { .. } => "growth-check",
            Command::Indicator { .. } => "indicator",
            Command::Levin { .. } => "levin",
            Command::Jensen { .. } => "jensen",
            Command::Envelope { .. } => "envelope",
            Command::LevelCheck { .. } => "level-check",
            Command::Convexity { .. } => "convexity",
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => CliError::Usage(m),
            e => CliError::Numerical(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn parse_reals(s: &str, n: usize, what: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != n {
        return Err(format!("expected {what}, got `{s}`"));
    }
    parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}` in `{s}`: {e}")))
        .collect()
}

pub fn parse_point(s: &str) -> std::result::Result<PhasePoint, String> {
    let v = parse_reals(s, 2, "X:Y")?;
    Ok(PhasePoint::new(v[0], v[1]))
}

pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    if !s.contains(':') {
        let re = s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))?;
        return Ok(Complex64::new(re, 0.0));
    }
    let v = parse_reals(s, 2, "RE:IM")?;
    Ok(Complex64::new(v[0], v[1]))
}

pub fn parse_point_set(set: &str, points: &[PhasePoint]) -> std::result::Result<PointSetSpec, String> {
    let (head, rest) = set.split_once(':').unwrap_or((set, ""));
    let spec = match head {
        "axes" if rest.is_empty() => PointSetSpec::AxesTheorem1,
        "lattice" => {
            let v = parse_reals(rest, 2, "lattice:A:B")?;
            PointSetSpec::lattice(v[0], v[1])
        }
        "lattice-minus" => {
            let v = parse_reals(rest, 4, "lattice-minus:A:B:X:Y")?;
            PointSetSpec::LatticeMinusPoint {
                a: v[0],
                b: v[1],
                omitted: PhasePoint::new(v[2], v[3]),
            }
        }
        "explicit" if rest.is_empty() => {
            if points.is_empty() {
                return Err("--set explicit needs --points".into());
            }
            PointSetSpec::explicit(points.to_vec())
        }
        _ => return Err(format!("unknown point set `{set}`")),
    };
    if !matches!(spec, PointSetSpec::Explicit { .. }) && !points.is_empty() {
        return Err("--points is only used with --set explicit".into());
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

pub fn parse_time_function(s: &str) -> std::result::Result<TimeFunctionSpec, String> {
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let f = match head {
        "gaussian" if rest.is_empty() => TimeFunctionSpec::Gaussian,
        "shifted" => {
            let v = parse_reals(rest, 2, "shifted:X:Y")?;
            TimeFunctionSpec::ShiftedGaussian { x: v[0], y: v[1] }
        }
        "monomial" => TimeFunctionSpec::MonomialGaussian {
            k: rest.parse().map_err(|e| format!("monomial degree `{rest}`: {e}"))?,
        },
        _ => return Err(format!("unknown time function `{s}`")),
    };
    f.validate().map_err(|e| e.to_string())?;
    Ok(f)
}

/// Split on `;` outside parentheses.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

pub fn parse_entire_function(s: &str) -> std::result::Result<EntireFunctionSpec, String> {
    let s = s.trim();
    if let Some(body) = s.strip_prefix("quot(").and_then(|b| b.strip_suffix(')')) {
        let parts = split_top_level(body);
        if parts.len() != 2 {
            return Err(format!("expected quot(F;RE:IM), got `{s}`"));
        }
        let base = parse_entire_function(parts[0])?;
        let root = parse_complex(parts[1])?;
        return EntireFunctionSpec::quotient_by_linear(base, root).map_err(|e| e.to_string());
    }
    if let Some(body) = s.strip_prefix("prod(").and_then(|b| b.strip_suffix(')')) {
        let factors = split_top_level(body)
            .into_iter()
            .map(parse_entire_function)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let f = EntireFunctionSpec::Product { factors };
        f.validate().map_err(|e| e.to_string())?;
        return Ok(f);
    }
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let f = match head {
        "one" if rest.is_empty() => EntireFunctionSpec::One,
        "s" if rest.is_empty() => EntireFunctionSpec::SFunction,
        "monomial" => EntireFunctionSpec::Monomial {
            n: rest.parse().map_err(|e| format!("monomial degree `{rest}`: {e}"))?,
        },
        "expq" => {
            let v = parse_reals(rest, 2, "expq:RE:IM")?;
            EntireFunctionSpec::ExpQuadratic {
                c: Complex64::new(v[0], v[1]),
            }
        }
        "mlf" => EntireFunctionSpec::MittagLefflerHalf {
            scale: rest.parse().map_err(|e| format!("scale `{rest}`: {e}"))?,
        },
        _ => return Err(format!("unknown entire function `{s}`")),
    };
    f.validate().map_err(|e| e.to_string())?;
    Ok(f)
}

fn set_of(a: &SetArgs) -> CliResult<PointSetSpec> {
    parse_point_set(&a.set, &a.points).map_err(CliError::Usage)
}

fn func_of(s: &str) -> CliResult<EntireFunctionSpec> {
    parse_entire_function(s).map_err(CliError::Usage)
}

fn target_of(s: &str) -> CliResult<TimeFunctionSpec> {
    parse_time_function(s).map_err(CliError::Usage)
}

/// One output file: a table for CSV and a value for JSON.
pub struct Artifact {
    pub stem: String,
    pub table: Table,
    pub json: Value,
}

fn artifact(stem: &str, table: Table, json: impl Serialize) -> CliResult<Artifact> {
    Ok(Artifact {
        stem: stem.to_string(),
        table,
        json: serde_json::to_value(json).map_err(|e| CliError::Io(e.to_string()))?,
    })
}

fn read_profile(path: &Path) -> CliResult<IndicatorProfile> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        return serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())));
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Usage(e.to_string()))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "h")
        .ok_or_else(|| CliError::Usage(format!("{}: no `h` column", path.display())))?;
    let mut h = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Usage(e.to_string()))?;
        let v = rec[col]
            .parse::<f64>()
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        h.push(v);
    }
    Ok(IndicatorProfile::from_values(h)?)
}

fn profile_of(p: &ProfileArgs) -> CliResult<IndicatorProfile> {
    match (&p.profile, &p.func) {
        (Some(path), None) => read_profile(path),
        (None, Some(f)) => Ok(il::estimate_indicator(&func_of(f)?, p.thetas, &p.r)?),
        _ => usage("pass exactly one of --profile or --func"),
    }
}

fn points_table(points: &[PhasePoint]) -> Table {
    let mut t = Table::new(&["xi", "eta", "modulus", "angle"]);
    for p in points {
        t.push(vec![p.xi.into(), p.eta.into(), p.modulus().into(), p.angle().into()]);
    }
    t
}

fn log_value_row(z: Complex64, l: sf::LogValue) -> Vec<Cell> {
    let [zr, zi] = complex_cells(z);
    let (vr, vi) = match l.to_complex() {
        Ok(v) => (Cell::Real(v.re), Cell::Real(v.im)),
        Err(_) => (Cell::from("overflow"), Cell::from("overflow")),
    };
    vec![zr, zi, vr, vi, l.ln_abs.into(), l.arg.into()]
}

fn execute(cmd: &Command, seed: u64) -> CliResult<(Vec<Artifact>, String)> {
    let mut out = Vec::new();
    let summary;
    match cmd {
        Command::Points { set, radius } => {
            let pts = ps::generate_points(&set_of(set)?, *radius)?;
            summary = format!("{} points", pts.len());
            out.push(artifact("points", points_table(&pts), &pts)?);
        }
        Command::Count { set, r, theta, vartheta } => {
            let c = ps::count_sector(&set_of(set)?, *r, *theta, *vartheta)?;
            let mut t = Table::new(&["r", "theta", "vartheta", "count", "density"]);
            t.push(vec![c.r.into(), c.theta.into(), c.vartheta.into(), c.count.into(), c.density().into()]);
            summary = format!("count {}", c.count);
            out.push(artifact("count", t, json!({ "count": c, "density": c.density() }))?);
        }
        Command::Density { set, r, theta, vartheta } => {
            let d = ps::angular_density(&set_of(set)?, *theta, *vartheta, r)?;
            let mut t = Table::new(&["r", "theta", "vartheta", "count", "density"]);
            for i in 0..d.r_ladder.len() {
                t.push(vec![
                    d.r_ladder[i].into(),
                    d.theta.into(),
                    d.vartheta.into(),
                    d.counts[i].into(),
                    d.values[i].into(),
                ]);
            }
            summary = format!("density {:.6}", d.extrapolated);
            out.push(artifact("density", t, &d)?);
        }
        Command::Invsq { set, r } => {
            let v = ps::inverse_square_partial_sum(&set_of(set)?, *r)?;
            let [re, im] = complex_cells(v);
            let mut t = Table::new(&["r", "re", "im"]);
            t.push(vec![(*r).into(), re, im]);
            summary = format!("sum {v}");
            out.push(artifact("invsq", t, json!({ "r": r, "sum": v }))?);
        }
        Command::EvalS { z } => {
            let mut t = Table::new(&["z_re", "z_im", "re", "im", "log_abs", "arg"]);
            let mut vals = Vec::new();
            for &w in z {
                let l = sf::log_s(w)?;
                t.push(log_value_row(w, l));
                vals.push(json!({ "z": w, "log": l, "value": l.to_complex().ok() }));
            }
            summary = format!("{} values", z.len());
            out.push(artifact("eval_s", t, vals)?);
        }
        Command::Mlf { z } => {
            let mut t = Table::new(&["z_re", "z_im", "re", "im", "log_abs", "arg", "branch"]);
            let mut vals = Vec::new();
            for &w in z {
                let split = sf::mittag_leffler_half_split(w)?;
                let l = split.log_value();
                let mut row = log_value_row(w, l);
                row.push(format!("{:?}", split.branch).to_lowercase().into());
                t.push(row);
                vals.push(json!({ "z": w, "log": l, "value": l.to_complex().ok(), "split": split }));
            }
            summary = format!("{} values", z.len());
            out.push(artifact("mlf", t, vals)?);
        }
        Command::GrowthScan { r, thetas, epsilon } => {
            let rep = sf::growth_ratio_scan(r, *thetas, *epsilon)?;
            let mut t = Table::new(&["r", "theta", "log_abs_s", "model_exponent", "ratio", "excluded_flag"]);
            for s in &rep.samples {
                t.push(vec![
                    s.r.into(),
                    s.theta.into(),
                    s.log_abs_s.into(),
                    s.model_exponent.into(),
                    s.ratio.into(),
                    s.excluded.into(),
                ]);
            }
            summary = format!(
                "min ratio {:.6}, max ratio {:.6}, excluded {}",
                rep.min_ratio, rep.max_ratio, rep.excluded
            );
            out.push(artifact("growth_scan", t, &rep)?);
        }
        Command::Shift { x, y, t: ts } => {
            let mut t = Table::new(&["t", "re", "im"]);
            let mut vals = Vec::new();
            for &s in ts {
                let v = gc::tf_shift_eval(*x, *y, s);
                let [re, im] = complex_cells(v);
                t.push(vec![s.into(), re, im]);
                vals.push(json!({ "t": s, "value": v }));
            }
            summary = format!("{} values", ts.len());
            out.push(artifact("shift", t, json!({ "x": x, "y": y, "values": vals }))?);
        }
        Command::Inner { lambda, mu } => {
            let v = gc::gauss_inner_product(*lambda, *mu);
            let [re, im] = complex_cells(v);
            let mut t = Table::new(&["lambda_xi", "lambda_eta", "mu_xi", "mu_eta", "re", "im", "modulus"]);
            t.push(vec![lambda.xi.into(), lambda.eta.into(), mu.xi.into(), mu.eta.into(), re, im, v.norm().into()]);
            summary = format!("inner product {v}");
            out.push(artifact("inner", t, json!({ "lambda": lambda, "mu": mu, "value": v }))?);
        }
        Command::Gram { set, radius, dump_matrix } => {
            let g = gc::gram_section(&set_of(set)?, *radius)?;
            let s = g.summary();
            let mut t = Table::new(&["n", "sigma_min", "sigma_max", "condition"]);
            t.push(vec![g.len().into(), s.sigma_min.into(), s.sigma_max.into(), s.condition.into()]);
            summary = format!("{} points, sigma_min {:e}, sigma_max {:e}", g.len(), s.sigma_min, s.sigma_max);
            out.push(artifact("gram", t, &s)?);
            if *dump_matrix {
                let mut m = Table::new(&["i", "j", "re", "im"]);
                let mut rows = Vec::new();
                for i in 0..g.len() {
                    let mut row = Vec::new();
                    for j in 0..g.len() {
                        let [re, im] = complex_cells(g.entries[(i, j)]);
                        m.push(vec![i.into(), j.into(), re, im]);
                        row.push(g.entries[(i, j)]);
                    }
                    rows.push(row);
                }
                out.push(artifact("gram_matrix", m, rows)?);
            }
        }
        Command::Biorth { set, radius, reg } => {
            let b = gc::biorthogonal_residual(&set_of(set)?, *radius, *reg)?;
            let mut t = Table::new(&["n", "regularization", "deviation", "sigma_min", "sigma_max"]);
            t.push(vec![
                b.points.len().into(),
                b.regularization.into(),
                b.residual_matrix_deviation.into(),
                b.sigma_min.into(),
                b.sigma_max.into(),
            ]);
            summary = format!("deviation {:e} (regularization {:e})", b.residual_matrix_deviation, b.regularization);
            out.push(artifact("biorth", t, &b)?);
        }
        Command::Complete { set, target, r } => {
            let rep = gc::completeness_residual(&target_of(target)?, &set_of(set)?, r)?;
            let mut t = Table::new(&["r", "points", "residual", "regularization"]);
            for i in 0..rep.radii.len() {
                t.push(vec![
                    rep.radii[i].into(),
                    rep.point_counts[i].into(),
                    rep.residuals[i].into(),
                    rep.regularization[i].into(),
                ]);
            }
            summary = format!("residuals {:?}", rep.residuals);
            out.push(artifact("complete", t, &rep)?);
        }
        Command::Bargmann { target, z } => {
            let f = target_of(target)?;
            let mut t = Table::new(&["z_re", "z_im", "re", "im"]);
            let mut vals = Vec::new();
            for &w in z {
                let v = bf::bargmann_transform(&f, w)?;
                let [zr, zi] = complex_cells(w);
                let [re, im] = complex_cells(v);
                t.push(vec![zr, zi, re, im]);
                vals.push(json!({ "z": w, "value": v }));
            }
            summary = format!("{} values", z.len());
            out.push(artifact("bargmann", t, json!({ "target": f, "values": vals }))?);
        }
        Command::FockNorm { func, radius } => {
            let f = func_of(func)?;
            let v = bf::fock_norm_truncated(&f, *radius)?;
            let mut t = Table::new(&["R", "value"]);
            t.push(vec![(*radius).into(), v.into()]);
            summary = format!("truncated norm^2 {v:.12}");
            out.push(artifact("fock_norm", t, json!({ "function": f, "R": radius, "value": v }))?);
        }
        Command::FockProbe { func, r } => {
            let f = func_of(func)?;
            let l = bf::fock_membership_probe(&f, r)?;
            let verdict = format!("{:?}", l.verdict).to_lowercase();
            let mut t = Table::new(&["R", "value", "increment", "verdict"]);
            for i in 0..l.r_ladder.len() {
                t.push(vec![l.r_ladder[i].into(), l.values[i].into(), l.increments[i].into(), verdict.clone().into()]);
            }
            summary = format!(
                "verdict {verdict} (heuristic), last relative increment {:.3e}",
                l.last_relative_increment
            );
            out.push(artifact("fock_probe", t, &l)?);
        }
        Command::GrowthCheck { func, r, thetas } => {
            let rep = bf::fock_growth_check(&func_of(func)?, r, *thetas)?;
            let mut grid = Table::new(&["r", "theta", "log_weighted"]);
            for s in &rep.samples {
                grid.push(vec![s.r.into(), s.theta.into(), s.log_weighted.into()]);
            }
            let mut rungs = Table::new(&["r", "max_weighted", "log_max_weighted"]);
            for i in 0..rep.r_list.len() {
                rungs.push(vec![rep.r_list[i].into(), rep.rung_max[i].into(), rep.rung_log_max[i].into()]);
            }
            summary = format!("rung maxima {:?}", rep.rung_max);
            out.push(artifact("growth_check_rungs", rungs, json!({ "r": rep.r_list, "max": rep.rung_max, "log_max": rep.rung_log_max }))?);
            out.push(artifact("growth_check_grid", grid, &rep.samples)?);
        }
        Command::Indicator { func, thetas, r } => {
            let p = il::estimate_indicator(&func_of(func)?, *thetas, r)?;
            let mut t = Table::new(&["theta", "h", "residual"]);
            for i in 0..p.thetas.len() {
                t.push(vec![p.thetas[i].into(), p.h_values[i].into(), p.fit_residuals[i].into()]);
            }
            summary = format!("levin density {:.6}", il::levin_density(&p));
            out.push(artifact("indicator", t, &p)?);
        }
        Command::Levin { profile } => {
            let p = profile_of(profile)?;
            let d = il::levin_density(&p);
            let mut t = Table::new(&["density"]);
            t.push(vec![d.into()]);
            summary = format!("levin density {d:.6}");
            out.push(artifact("levin", t, json!({ "density": d, "theta_count": p.thetas.len() }))?);
        }
        Command::Jensen { func, r } => {
            let j = il::jensen_check(&func_of(func)?, *r)?;
            let mut t = Table::new(&["r", "lhs", "rhs", "zero_count"]);
            t.push(vec![j.r.into(), j.lhs.into(), j.rhs.into(), j.zero_count.into()]);
            summary = format!("lhs {:.12}, rhs {:.12}", j.lhs, j.rhs);
            out.push(artifact("jensen", t, &j)?);
        }
        Command::Envelope { dirs, theta, integrate } => {
            let d = DirectionSet::new(dirs.clone())?;
            let grid: Vec<f64> = if theta.is_empty() {
                (0..512).map(|k| TAU * k as f64 / 512.0).collect()
            } else {
                theta.clone()
            };
            let mut t = Table::new(&["theta", "H"]);
            let mut vals = Vec::new();
            for &a in &grid {
                let h = il::h_envelope(&d, a);
                t.push(vec![a.into(), h.into()]);
                vals.push(json!({ "theta": a, "H": h }));
            }
            out.push(artifact("envelope", t, json!({ "directions": d, "values": vals }))?);
            if *integrate {
                let v = il::envelope_integral(&d);
                let mut t = Table::new(&["integral"]);
                t.push(vec![v.into()]);
                summary = format!("integral {v:.10}");
                out.push(artifact("envelope_integral", t, json!({ "integral": v }))?);
            } else {
                summary = format!("{} values", grid.len());
            }
        }
        Command::LevelCheck { dirs, random } => {
            let sets = match random {
                Some(n) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..*n).map(|_| DirectionSet::random_admissible(&mut rng)).collect()
                }
                None => vec![DirectionSet::new(dirs.clone())?],
            };
            let mut t = Table::new(&["index", "directions", "max_gap", "integral", "passes"]);
            let mut vals = Vec::new();
            let mut passed = 0;
            for (i, d) in sets.iter().enumerate() {
                let l = il::level_inequality_check(d)?;
                passed += l.passes as usize;
                let list = d.angles().iter().map(|a| format!("{a:.17e}")).collect::<Vec<_>>().join(" ");
                t.push(vec![i.into(), list.into(), d.max_gap().into(), l.integral.into(), l.passes.into()]);
                vals.push(json!({ "directions": d, "check": l }));
            }
            summary = format!("{passed}/{} sets pass", sets.len());
            out.push(artifact("level_check", t, vals)?);
        }
        Command::Convexity { profile } => {
            let p = profile_of(profile)?;
            let rep = il::convexity_floor_check(&p);
            let mut t = Table::new(&["index", "theta", "h", "min_margin"]);
            for &i in &rep.maxima {
                t.push(vec![i.into(), p.thetas[i].into(), p.h_values[i].into(), rep.min_margin.into()]);
            }
            summary = format!("{} maxima, min margin {:.6}", rep.maxima.len(), rep.min_margin);
            out.push(artifact("convexity", t, &rep)?);
        }
    }
    Ok((out, summary))
}

fn write_artifacts(cli: &Cli, artifacts: &[Artifact]) -> CliResult<Vec<String>> {
    fs::create_dir_all(&cli.out)?;
    let mut names = Vec::new();
    for a in artifacts {
        let name = match cli.format {
            Format::Csv => format!("{}.csv", a.stem),
            Format::Json => format!("{}.json", a.stem),
        };
        let path = cli.out.join(&name);
        match cli.format {
            Format::Csv => {
                let f = fs::File::create(&path)?;
                a.table.write_csv(f).map_err(|e| CliError::Io(e.to_string()))?;
            }
            Format::Json => {
                let text = serde_json::to_string_pretty(&a.json).map_err(|e| CliError::Io(e.to_string()))?;
                fs::write(&path, text + "\n")?;
            }
        }
        names.push(name);
    }
    let manifest = json!({
        "program": "gaussian-gabor",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": cli.command.name(),
        "config": cli,
        "artifacts": names,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(cli.out.join("run.json"), text + "\n")?;
    Ok(names)
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::max_level()
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("[{}] {}", record.level(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLogger = StderrLogger;

/// Run the CLI on `argv` (including the program name); returns the exit status.
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
    let _ = log::set_logger(&LOGGER);
    log::set_max_level(if cli.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    });
    let result = execute(&cli.command, cli.seed).and_then(|(artifacts, summary)| {
        let names = write_artifacts(&cli, &artifacts)?;
        Ok((names, summary))
    });
    match result {
        Ok((names, summary)) => {
            println!("{}: {summary}", cli.command.name());
            for n in names {
                println!("wrote {}", cli.out.join(n).display());
            }
            0
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("run with --help for usage");
            2
        }
        Err(CliError::Numerical(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(CliError::Io(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}
