//! Command-line front end: argument parsing, dispatch to the library, and
//! JSON or text reports.
//!
//! Exit codes: 0 on success, 1 when the library reports a domain error,
//! 2 on usage errors (bad flags, unreadable input files, malformed JSON).

use std::fmt;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

mod commands;
mod input;

/// Accepted range for every tolerance flag.
pub const TOL_RANGE: (f64, f64) = (1e-15, 1e-1);
/// Tolerance used when neither `--tol` nor `HEIGHTLAB_TOL` is given.
pub const DEFAULT_TOL: f64 = 1e-9;
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "heightlab", version, about = "Height pairings, canonical heights, Arakelov degrees and spreads")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tame symbol T_p{f,g} at one place of P¹.
    Tame {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// A place: `inf`, a rational number, or a monic polynomial in t of degree ≤ 2.
        #[arg(long)]
        at: String,
    },
    /// Weil reciprocity product over all places.
    Weil {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
    },
    /// m = 0 Archimedean pairing ⟨∂ξ₁′, ξ₂⟩.
    Pair0(Pair0Args),
    /// Both sides of the m = 0 reciprocity law on P¹.
    Recip0(Recip0Args),
    /// m = 1 real regulator pairing of a K₁-cycle with a symbol.
    Pair1(Pair1Args),
    /// Winding number of a function along the contour of a K₁-cycle.
    Winding(WindingArgs),
    /// Néron–Tate canonical height.
    Ntheight {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        point: String,
    },
    /// Néron–Tate pairing ⟨P, Q⟩.
    Ntpair {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Graded height pairing of the product-of-curves example.
    Ex5 {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        p1: String,
        #[arg(long)]
        q1: String,
        #[arg(long)]
        p2: String,
        #[arg(long)]
        q2: String,
        /// Genera of the further curves, comma separated.
        #[arg(long, default_value = "1")]
        genera: String,
    },
    /// Principal Arakelov divisor of an element of Q or Q(√d).
    Arakelov {
        /// d of Q(√d); 1 means Q.
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// `a,b` for a + b·ω (ω = √d, or (1+√d)/2 when d ≡ 1 mod 4).
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    /// Spread of a polynomial with constant coefficients.
    Spread(SpreadArgs),
}

#[derive(Args, Debug)]
pub struct Pair0Args {
    /// ξ₁′ = (f, P¹).
    #[arg(long, conflicts_with = "input")]
    pub f: Option<String>,
    /// ξ₂ as a P¹ divisor such as "(2) - (3)".
    #[arg(long, conflicts_with = "input")]
    pub xi2: Option<String>,
    /// JSON file with "xi1" (precycle) and "xi2" (0-cycle).
    #[arg(long)]
    pub input: Option<String>,
}

#[derive(Args, Debug)]
pub struct Recip0Args {
    #[arg(long, conflicts_with = "input")]
    pub f: Option<String>,
    #[arg(long, conflicts_with = "input")]
    pub g: Option<String>,
    /// JSON file with precycles "xi1" and "xi2".
    #[arg(long)]
    pub input: Option<String>,
}

#[derive(Args, Debug)]
pub struct NumericArgs {
    /// Quadrature tolerance (default: HEIGHTLAB_TOL or 1e-9).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Smallest allowed relative size of a linear form at quadrature nodes.
    #[arg(long, default_value_t = 1e-8)]
    pub guard: f64,
    #[arg(long, default_value = "ccw")]
    pub orientation: String,
}

#[derive(Args, Debug)]
pub struct Pair1Args {
    /// `paper`: the coordinate-line cycle against {f1, w − p}.
    #[arg(long, conflicts_with = "input")]
    pub example: Option<String>,
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    pub f1: String,
    #[arg(long, default_value = "0.3+0.3*i", allow_hyphen_values = true)]
    pub p: String,
    /// JSON file with "xi" (K₁-precycle), "f1" and "f2" (form products).
    #[arg(long)]
    pub input: Option<String>,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Args, Debug)]
pub struct WindingArgs {
    #[arg(long, conflicts_with = "input")]
    pub example: Option<String>,
    #[arg(long, default_value = "0.3+0.3*i", allow_hyphen_values = true)]
    pub p: String,
    /// JSON file with "xi" (K₁-precycle) and "f" (form product).
    #[arg(long)]
    pub input: Option<String>,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    /// `[a1,a2,a3,a4,a6]`.
    #[arg(long)]
    pub curve: String,
    /// Height tolerance (default: HEIGHTLAB_TOL, else 1e-6).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 12)]
    pub max_doublings: u32,
}

#[derive(Args, Debug)]
pub struct SpreadArgs {
    #[arg(long, conflicts_with = "example")]
    pub expr: Option<String>,
    /// `ex000` or `ec`.
    #[arg(long)]
    pub example: Option<String>,
    /// Invert the coefficient denominator with an extra variable.
    #[arg(long)]
    pub over_z: bool,
    /// `relation` or `eliminate` (π written as the square of √π's variable).
    #[arg(long)]
    pub pi_mode: Option<String>,
    /// Extra constants to adjoin, comma separated, e.g. "sqrt(5)".
    #[arg(long)]
    pub adjoin: Option<String>,
    /// Verification threshold 10^-digits.
    #[arg(long, default_value_t = 30)]
    pub digits: u32,
}

/// A failure with its type name, message and exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError { kind: "UsageError".into(), message: msg.into(), exit_code: 2 }
    }

    fn domain<E: fmt::Debug + fmt::Display>(enum_name: &str, e: &E) -> Self {
        let debug = format!("{:?}", e);
        let variant: String = debug.chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect();
        CliError { kind: format!("{}::{}", enum_name, variant), message: e.to_string(), exit_code: 1 }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<heightlab::funcfield::FuncFieldError> for CliError {
    fn from(e: heightlab::funcfield::FuncFieldError) -> Self {
        CliError::domain("FuncFieldError", &e)
    }
}

impl From<heightlab::arch_pairing::PairingError> for CliError {
    fn from(e: heightlab::arch_pairing::PairingError) -> Self {
        match e {
            heightlab::arch_pairing::PairingError::FuncField(inner) => inner.into(),
            e => CliError::domain("PairingError", &e),
        }
    }
}

impl From<heightlab::klm::KlmError> for CliError {
    fn from(e: heightlab::klm::KlmError) -> Self {
        CliError::domain("KlmError", &e)
    }
}

impl From<heightlab::neron_tate::NtError> for CliError {
    fn from(e: heightlab::neron_tate::NtError) -> Self {
        CliError::domain("NtError", &e)
    }
}

impl From<heightlab::arakelov::ArakelovError> for CliError {
    fn from(e: heightlab::arakelov::ArakelovError) -> Self {
        CliError::domain("ArakelovError", &e)
    }
}

impl From<heightlab::spreads::SpreadError> for CliError {
    fn from(e: heightlab::spreads::SpreadError) -> Self {
        CliError::domain("SpreadError", &e)
    }
}

/// A command's output: a JSON body plus the lines shown in text mode.
#[derive(Debug, Default)]
pub struct Report {
    pub inputs: Map<String, Value>,
    pub result: Map<String, Value>,
    pub terms: Vec<Value>,
    pub text: Vec<String>,
}

impl Report {
    fn input(&mut self, k: &str, v: impl Into<Value>) {
        self.inputs.insert(k.into(), v.into());
    }

    fn result(&mut self, k: &str, v: impl Into<Value>) {
        self.result.insert(k.into(), v.into());
    }

    fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }
}

/// Settings taken from the environment.
#[derive(Clone, Debug, Default)]
pub struct Env {
    /// Raw value of HEIGHTLAB_TOL.
    pub tol: Option<String>,
}

impl Env {
    pub fn from_process() -> Self {
        Env { tol: std::env::var("HEIGHTLAB_TOL").ok() }
    }

    /// `--tol` if given, else HEIGHTLAB_TOL, else `fallback`; range-checked.
    fn tolerance(&self, flag: Option<f64>, fallback: f64) -> Result<f64, CliError> {
        let tol = match (flag, &self.tol) {
            (Some(t), _) => t,
            (None, Some(s)) => s.trim().parse().map_err(|_| CliError::usage(format!("HEIGHTLAB_TOL='{}' is not a number", s)))?,
            (None, None) => fallback,
        };
        if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
            return Err(CliError::usage(format!("tolerance {} outside [{:e}, {:e}]", tol, TOL_RANGE.0, TOL_RANGE.1)));
        }
        Ok(tol)
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Tame { .. } => "tame",
        Command::Weil { .. } => "weil",
        Command::Pair0(_) => "pair0",
        Command::Recip0(_) => "recip0",
        Command::Pair1(_) => "pair1",
        Command::Winding(_) => "winding",
        Command::Ntheight { .. } => "ntheight",
        Command::Ntpair { .. } => "ntpair",
        Command::Ex5 { .. } => "ex5",
        Command::Arakelov { .. } => "arakelov",
        Command::Spread(_) => "spread",
    }
}

fn render_json(command: &str, status: &str, body: Map<String, Value>) -> String {
    let mut top = Map::new();
    top.insert("schema".into(), json!(SCHEMA_VERSION));
    top.insert("command".into(), json!(command));
    top.insert("status".into(), json!(status));
    top.extend(body);
    serde_json::to_string_pretty(&Value::Object(top)).expect("serializable")
}

/// Run one invocation; `args` includes the program name.
pub fn run<I, S>(args: I, env: &Env, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{}", text);
            } else {
                let _ = write!(err, "{}", text);
            }
            return code;
        }
    };
    let name = command_name(&cli.command);
    let outcome = commands::dispatch(&cli.command, env);
    let io = match (&outcome, cli.format) {
        (Ok(r), Format::Json) => {
            let mut body = Map::new();
            body.insert("inputs".into(), Value::Object(r.inputs.clone()));
            body.insert("result".into(), Value::Object(r.result.clone()));
            body.insert("terms".into(), Value::Array(r.terms.clone()));
            writeln!(out, "{}", render_json(name, "ok", body))
        }
        (Ok(r), Format::Text) => r.text.iter().try_for_each(|l| writeln!(out, "{}", l)),
        (Err(e), fmt) => {
            if fmt == Format::Json {
                let mut body = Map::new();
                body.insert("error".into(), json!({"type": e.kind, "message": e.message}));
                let _ = writeln!(out, "{}", render_json(name, "error", body));
            }
            writeln!(err, "error: {}", e)
        }
    };
    match (outcome, io) {
        (_, Err(_)) => 2,
        (Ok(_), Ok(())) => 0,
        (Err(e), Ok(())) => e.exit_code,
    }
}
