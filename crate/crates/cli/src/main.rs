use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crtube::harness::{self, Family, GridSpec, ReportConfig, ResidualReport, Tolerances};
use crtube::selftest::run_selftest;
use crtube::{CounterexampleSpec, Error, Params};

const EXPR_GRAMMAR: &str = "expr := term (('+'|'-') term)*; term := unary (('*'|'/') unary)*; \
unary := '-' unary | power; power := atom ('^' unary)?; \
atom := number | variable | parameter | func '(' expr (',' expr)? ')' | '(' expr ')'; \
func := exp | log | sqrt | sin | cos | pow";
const GRID_GRAMMAR: &str = "grid := min:max:n,min:max:n (t1 axis first, n >= 2)";

/// Curvature residuals and verification campaigns for Levi-degenerate tubes in C^3.
#[derive(Parser, Debug)]
#[command(name = "crtube", version)]
struct Cli {
    /// Print checks and summaries to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Residuals of a closed-form rho(t1, t2), or of the family given by p(v), q(v).
    Residuals {
        #[arg(long, conflicts_with_all = ["p", "q"], required_unless_present = "p")]
        rho: Option<String>,
        #[arg(long, requires = "q")]
        p: Option<String>,
        #[arg(long, requires = "p")]
        q: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Verification campaigns.
    Verify {
        #[command(subcommand)]
        which: Verify,
    },
    /// The worked logarithmic example with pole at t2 = C.
    Example31 {
        #[arg(long = "C", allow_hyphen_values = true)]
        c: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Invariant suites of the jet kernel, the expression language and the conic identities.
    Selftest,
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// Random conic pairs with Q = cP.
    Theorem21 {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// The family q = C (p' - p'(0)) for a profile p(v).
    Counterexample {
        #[arg(long)]
        p: String,
        #[arg(long = "C", allow_hyphen_values = true)]
        c: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Closed form rho against the tau-construction for a profile p(v).
    Prop32 {
        #[arg(long)]
        p: String,
        #[arg(long = "C", allow_hyphen_values = true)]
        c: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Parameter binding `name=value`, repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Grid `min:max:n,min:max:n`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Zero tolerance for normalized residuals; the nonzero threshold is its square root.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let k = k.trim();
    if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad parameter name {k:?}"));
    }
    let v: f64 = v.trim().parse().map_err(|_| format!("bad value {v:?} for {k}"))?;
    Ok((k.to_string(), v))
}

enum Failure {
    Verdict,
    Usage(Error, &'static str),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let grammar = match &e {
            Error::Config { path, .. } if path == "grid" => GRID_GRAMMAR,
            Error::Expr(crtube::expr::ExprError::Parse { .. })
            | Error::Expr(crtube::expr::ExprError::UnknownFunction { .. })
            | Error::Expr(crtube::expr::ExprError::ArityMismatch { .. }) => EXPR_GRAMMAR,
            _ => "",
        };
        Failure::Usage(e, grammar)
    }
}

impl Common {
    fn grid(&self) -> Result<GridSpec, Error> {
        self.grid.as_deref().map_or(Ok(GridSpec::default()), GridSpec::parse)
    }

    fn tolerances(&self) -> Result<Tolerances, Error> {
        match self.tol {
            None => Ok(Tolerances::default()),
            Some(t) if t > 0.0 && t < 1.0 => Ok(Tolerances::new(t)),
            Some(t) => Err(Error::config("tol", format!("need 0 < tol < 1, got {t}"))),
        }
    }

    fn params(&self) -> Params {
        self.params.iter().cloned().collect()
    }

    fn config(&self) -> Result<ReportConfig, Error> {
        Ok(ReportConfig {
            grid: self.grid()?,
            tolerances: self.tolerances()?,
            params: self.params(),
            ..ReportConfig::default()
        })
    }

    fn emit(&self, report: &ResidualReport, verbose: bool) -> Result<(), Failure> {
        let text = match self.format {
            Format::Json => report.to_json() + "\n",
            Format::Csv => report.to_csv(),
        };
        match &self.out {
            Some(path) => fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?,
            None => {
                let mut out = io::stdout().lock();
                match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                    Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                        return Err(Failure::Runtime(format!("stdout: {e}")))
                    }
                    _ => {}
                }
            }
        }
        if verbose {
            let m = &report.meta;
            eprintln!("{}: {}", m.family, m.description);
            eprintln!("grid {}, {} points kept, {} excluded", m.grid, report.points.len(), m.excluded);
            for c in &report.checks {
                eprintln!("  {:<28} measured {:.3e} {:?} {:.3e}", c.name, c.measured, c.kind, c.threshold);
            }
            for (k, v) in &report.verdicts {
                match report.expected.get(k) {
                    Some(e) => eprintln!("  verdict {k} = {v} (expected {e})"),
                    None => eprintln!("  verdict {k} = {v}"),
                }
            }
        }
        if report.passed {
            Ok(())
        } else {
            eprintln!("verdict mismatch: {}", report.failures().join(", "));
            Err(Failure::Verdict)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Residuals { rho, p, q, common } => {
            let mut cfg = common.config()?;
            let family = if rho.is_some() { Family::Expr } else { Family::Pq };
            (cfg.rho, cfg.p, cfg.q) = (rho, p, q);
            common.emit(&harness::run_report(family, &cfg)?, verbose)
        }
        Command::Example31 { c, common } => {
            let cfg = ReportConfig { c: Some(c), ..common.config()? };
            common.emit(&harness::run_report(Family::Example31, &cfg)?, verbose)
        }
        Command::Verify { which } => match which {
            Verify::Theorem21 { trials, seed, common } => {
                let r = harness::verify_theorem21(trials, seed, &common.grid()?, &common.tolerances()?)?;
                common.emit(&r, verbose)
            }
            Verify::Counterexample { p, c, common } => {
                let spec = CounterexampleSpec::from_expr(&p, c, &common.params())?;
                let r = harness::verify_counterexample(&spec, &common.grid()?, &common.tolerances()?)?;
                common.emit(&r, verbose)
            }
            Verify::Prop32 { p, c, common } => {
                let spec = CounterexampleSpec::from_expr(&p, c, &common.params())?;
                let r = harness::verify_prop32(&spec, &common.grid()?, &common.tolerances()?)?;
                common.emit(&r, verbose)
            }
        },
        Command::Selftest => {
            let cases = run_selftest()?;
            let mut ok = true;
            for c in &cases {
                ok &= c.passed;
                let mark = if c.passed { "pass" } else { "FAIL" };
                println!("{mark} {:<9} {:<50} {:.3e} (threshold {:.1e})", c.suite, c.name, c.measured, c.threshold);
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::Verdict)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Usage(e, grammar)) => {
            eprintln!("error: {e}");
            if !grammar.is_empty() {
                eprintln!("  {grammar}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
