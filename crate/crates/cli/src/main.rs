//! `fig8`: representations, torsions and surgery tables for the
//! figure-eight knot.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 invalid mathematical
//! input, 3 verification failure.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fig8_core::config::Tolerances;
use fig8_core::numeric::{fmt_f64, parse_cx};
use fig8_core::riley::{solve_t, Branch, RileyPoint};
use fig8_core::surgery::{self, GridSpec, SurgerySlope};
use fig8_core::torsion::{self, TorsionReport};
use fig8_core::verify::{self, VerifyConfig, VerifySummary};
use fig8_core::{Cx, Error};

#[derive(Debug, Parser)]
#[command(
    name = "fig8",
    version,
    about = "SL(2,C) representations and Reidemeister torsion of figure-eight knot surgeries"
)]
struct Cli {
    /// TOML file with `format`, `seed`, `samples`, `[tolerances]` and `[grid]`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format [default: pretty].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Bound on |R12| (scaled) for a point to count as on the variety.
    #[arg(long, global = true)]
    tol_variety: Option<f64>,
    /// Relative agreement required between independent computations.
    #[arg(long, global = true)]
    tol_compare: Option<f64>,
    /// |u^2 (u^2 - 5)| at or below this is degenerate.
    #[arg(long, global = true)]
    tol_degeneracy: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Both roots t of the Riley polynomial at s.
    Riley {
        /// Meridian eigenvalue as "re,im" (or "re").
        #[arg(long, allow_hyphen_values = true, value_parser = parse_cx)]
        s: Cx,
    },
    /// Every torsion quantity at one variety point.
    Torsion {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_cx)]
        s: Cx,
        /// "+" or "-".
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        branch: Branch,
    },
    /// Characters satisfying x^p l^q = 1, one row each.
    Surgery {
        #[arg(long, allow_hyphen_values = true)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
        /// Radii of the seed circles, comma separated.
        #[arg(long, value_delimiter = ',')]
        grid_circles: Option<Vec<f64>>,
        /// Seeds per circle.
        #[arg(long)]
        grid_angles: Option<usize>,
    },
    /// Runs every closed form against its oracle.
    Verify {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Pretty,
    Json,
    Csv,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    format: Option<Format>,
    seed: Option<u64>,
    samples: Option<usize>,
    tolerances: Option<Tolerances>,
    grid: Option<GridSpec>,
}

/// Configuration after merging the file with the flags.
struct RunConfig {
    format: Format,
    tol: Tolerances,
    grid: GridSpec,
    seed: u64,
    samples: usize,
}

enum Failure {
    Usage(String),
    Math(Error),
    Verification,
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Parse errors are the caller's fault; everything else the library
/// rejects is invalid mathematical input.
impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Usage(e.to_string()),
            e => Failure::Math(e),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Math(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(3),
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let defaults = VerifyConfig::default();
    let mut cfg = RunConfig {
        format: file.format.unwrap_or(Format::Pretty),
        tol: file.tolerances.unwrap_or_default(),
        grid: file.grid.unwrap_or_default(),
        seed: file.seed.unwrap_or(defaults.seed),
        samples: file.samples.unwrap_or(defaults.samples),
    };
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(v) = cli.tol_variety {
        cfg.tol.variety = v;
    }
    if let Some(v) = cli.tol_compare {
        cfg.tol.compare = v;
    }
    if let Some(v) = cli.tol_degeneracy {
        cfg.tol.degeneracy = v;
    }
    match &cli.command {
        Command::Surgery {
            grid_circles,
            grid_angles,
            ..
        } => {
            if let Some(r) = grid_circles {
                cfg.grid.radii = r.clone();
            }
            if let Some(a) = grid_angles {
                cfg.grid.angles = *a;
            }
        }
        Command::Verify { samples, seed } => {
            if let Some(n) = samples {
                cfg.samples = *n;
            }
            if let Some(s) = seed {
                cfg.seed = *s;
            }
        }
        _ => {}
    }
    let bad = cfg.tol.invalid_fields();
    if !bad.is_empty() {
        return Err(Failure::Usage(format!(
            "tolerances must be positive: {}",
            bad.join(", ")
        )));
    }
    cfg.grid.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Riley { s } => cmd_riley(s, &cfg, &mut out),
        Command::Torsion { s, branch } => cmd_torsion(s, branch, &cfg, &mut out),
        Command::Surgery { p, q, .. } => cmd_surgery(p, q, &cfg, &mut out),
        Command::Verify { .. } => cmd_verify(&cfg, &mut out),
    }
}

/// Twelve decimals; values that round to zero print without a sign.
fn fmt_cx(z: Cx) -> String {
    let clean = |x: f64| if x.abs() < 5e-13 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{re:.12} {sign} {:.12}i", im.abs())
}

fn fmt_opt(z: Option<Cx>) -> String {
    z.map_or_else(|| "-".to_string(), fmt_cx)
}

fn write_csv(out: &mut impl Write, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_io)?;
    for r in rows {
        w.write_record(r).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Failure {
    Failure::Io(e.into())
}

fn cmd_riley(s: Cx, cfg: &RunConfig, out: &mut impl Write) -> Result<(), Failure> {
    let pair = solve_t(s)?;
    let points = [pair.plus, pair.minus];
    match cfg.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&points)?)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| {
                    vec![
                        fmt_f64(p.s.re),
                        fmt_f64(p.s.im),
                        fmt_f64(p.t.re),
                        fmt_f64(p.t.im),
                        p.branch.to_string(),
                        fmt_f64(p.residual),
                    ]
                })
                .collect();
            write_csv(
                out,
                &["s_re", "s_im", "t_re", "t_im", "branch", "residual"],
                &rows,
            )?;
        }
        Format::Pretty => {
            writeln!(out, "s = {}", fmt_cx(s))?;
            for p in &points {
                writeln!(
                    out,
                    "  branch {}: t = {}   |R12| = {:.3e}",
                    p.branch,
                    fmt_cx(p.t),
                    p.residual
                )?;
            }
            if pair.coincident {
                writeln!(out, "  (branches coincide: discriminant vanishes)")?;
            }
        }
    }
    Ok(())
}

fn pretty_report(r: &TorsionReport) -> String {
    let mut s = String::new();
    let p = &r.point;
    let _ = writeln!(
        s,
        "point       s = {}  t = {}  branch {}",
        fmt_cx(p.s),
        fmt_cx(p.t),
        p.branch
    );
    let _ = writeln!(
        s,
        "            |R12| = {:.3e}  u = {}",
        p.residual,
        fmt_cx(r.u)
    );
    let _ = writeln!(s, "status      {}", r.status());
    let _ = writeln!(s, "tau(E(K))   closed  {}", fmt_cx(r.tau_exterior_closed));
    let oracle = r.tau_exterior_oracle.map(|o| o.value);
    let _ = writeln!(s, "            oracle  {} (up to sign)", fmt_opt(oracle));
    let _ = writeln!(s, "tau(N)      u-form  {}", fmt_opt(r.tau_solid_closed));
    let _ = writeln!(s, "            trace   {}", fmt_opt(r.tau_solid_trace));
    let _ = writeln!(s, "tau(M)      formula {}", fmt_opt(r.tau_surgered));
    let _ = writeln!(s, "            value   {}", fmt_opt(r.tau_m));
    for (k, v) in &r.consistency_flags {
        let _ = writeln!(s, "check       {k}: {}", if *v { "pass" } else { "FAIL" });
    }
    for n in &r.notes {
        let _ = writeln!(s, "note        {n}");
    }
    s
}

fn cmd_torsion(
    s: Cx,
    branch: Branch,
    cfg: &RunConfig,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let point = RileyPoint::on_branch(s, branch)?;
    let report = torsion::full_report(&point, &cfg.tol)?;
    match cfg.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Csv => write_csv(out, &TorsionReport::CSV_HEADER, &[report.csv_record()])?,
        Format::Pretty => write!(out, "{}", pretty_report(&report))?,
    }
    Ok(())
}

fn cmd_surgery(p: i64, q: i64, cfg: &RunConfig, out: &mut impl Write) -> Result<(), Failure> {
    let slope = SurgerySlope::new(p, q)?;
    let outcome = surgery::solve_surgery(slope, &cfg.grid, &cfg.tol)?;
    let rows = &outcome.solutions;
    match cfg.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(rows)?)?,
        Format::Csv => {
            let recs: Vec<Vec<String>> = rows.iter().map(|r| r.csv_record()).collect();
            write_csv(out, &surgery::CSV_HEADER, &recs)?;
        }
        Format::Pretty => {
            writeln!(
                out,
                "slope {slope}: {} characters from {} seeds ({} seeds did not converge)",
                rows.len(),
                cfg.grid.seeds().len(),
                outcome.failures.len()
            )?;
            for r in rows {
                writeln!(
                    out,
                    "u = {}  tau(M) = {}  s = {}  t = {}  res = {:.1e}/{:.1e}{}",
                    fmt_cx(r.u),
                    fmt_opt(r.torsion),
                    fmt_cx(r.point.s),
                    fmt_cx(r.point.t),
                    r.variety_residual,
                    r.relation_residual,
                    if r.flags.is_empty() {
                        String::new()
                    } else {
                        format!("  [{}]", r.flags.join(", "))
                    }
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, out: &mut impl Write) -> Result<(), Failure> {
    let summary: VerifySummary = verify::run(&VerifyConfig {
        samples: cfg.samples,
        seed: cfg.seed,
        tol: cfg.tol,
        grid: cfg.grid.clone(),
    });
    match cfg.format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = summary
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.clone(),
                        c.cases.to_string(),
                        fmt_f64(c.max_residual),
                        fmt_f64(c.threshold),
                        c.passed.to_string(),
                    ]
                })
                .collect();
            write_csv(
                out,
                &["check", "cases", "max_residual", "threshold", "passed"],
                &rows,
            )?;
        }
        Format::Pretty => writeln!(out, "{summary}")?,
    }
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
