use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tin_core::covopt::{optimize_tin, OptimizationReport, OptimizeOptions};
use tin_core::genie::{theorem1_verify, Theorem1Status};
use tin_core::regime::{classify, linspace, monotonicity_violations, sweep_csv, sweep_threshold, RegimeVerdict};
use tin_core::{selftest, tin_sum_rate, ChannelInput, CovariancePair, SymmetricVectorChannel, ThresholdQuery, VectorKind};

mod input;

use input::{load_channel, load_covariances, CliError};

#[derive(Parser, Debug)]
#[command(name = "tin", version, about = "TIN optimality in two-user Gaussian interference channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; `sweep` defaults to csv, everything else to text.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// TIN sum rate at given covariances, or at the optimised ones.
    Rate {
        #[command(flatten)]
        channel: ChannelArgs,
        /// JSON file with `Q1`/`Q2` (or an optimize report with `q_star`).
        #[arg(long)]
        cov: Option<PathBuf>,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Maximise the TIN sum rate over input covariances.
    Optimize {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Low-interference threshold h0 for one (θ, P).
    Threshold {
        #[arg(long)]
        theta: f64,
        #[arg(long = "P")]
        power: f64,
    },
    /// Threshold table over a θ grid and a list of powers.
    Sweep {
        #[arg(long, default_value_t = 50)]
        theta_steps: usize,
        #[arg(long, default_value_t = 0.01)]
        theta_min: f64,
        #[arg(long, default_value_t = FRAC_PI_2)]
        theta_max: f64,
        #[arg(long = "P", value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0, 100.0])]
        powers: Vec<f64>,
    },
    /// Certify a symmetric MISO/SIMO channel as low-interference.
    Classify {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Exit with status 1 unless certified.
        #[arg(long)]
        strict: bool,
    },
    /// Look for a genie certificate at a full-rank TIN optimum.
    Verify {
        #[command(flatten)]
        channel: ChannelArgs,
        #[command(flatten)]
        opt: OptArgs,
        /// Exit with status 1 unless certified.
        #[arg(long)]
        strict: bool,
    },
    /// Run the built-in invariant suite.
    Selftest,
}

#[derive(Args, Debug)]
struct ChannelArgs {
    /// Channel JSON: `{H11, H12, H21, H22, P1, P2}` or `{kind, theta, h, P}`.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    theta: Option<f64>,
    #[arg(long, conflicts_with = "input")]
    h: Option<f64>,
    #[arg(long = "P", conflicts_with = "input")]
    power: Option<f64>,
    #[arg(long, value_enum, default_value_t = KindArg::Miso)]
    kind: KindArg,
}

#[derive(Args, Debug)]
struct OptArgs {
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Miso,
    Simo,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

impl ChannelArgs {
    fn load(&self) -> Result<ChannelInput, CliError> {
        if let Some(path) = &self.input {
            return load_channel(path);
        }
        let (Some(theta), Some(h), Some(p)) = (self.theta, self.h, self.power) else {
            return Err(CliError::Input(
                "give a channel with --input, or all of --theta, --h and --P".into(),
            ));
        };
        let kind = match self.kind {
            KindArg::Miso => VectorKind::Miso,
            KindArg::Simo => VectorKind::Simo,
        };
        Ok(ChannelInput::Vector(SymmetricVectorChannel::new(theta, h, p, kind)?))
    }
}

impl OptArgs {
    fn options(&self, seed: u64) -> OptimizeOptions {
        OptimizeOptions {
            restarts: self.restarts,
            tol: self.tol,
            max_iter: self.max_iter,
            seed,
            ..OptimizeOptions::default()
        }
    }
}

struct Rendered {
    body: String,
    failed: bool,
}

impl Rendered {
    fn ok(body: String) -> Self {
        Rendered { body, failed: false }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialise") + "\n"
}

fn covariance_json(q: &CovariancePair) -> Value {
    json!({ "Q1": q.q1.to_rows(), "Q2": q.q2.to_rows() })
}

fn report_json(r: &OptimizationReport) -> Value {
    json!({
        "rate": r.rate,
        "kkt_residual": r.kkt_residual,
        "converged": r.converged,
        "restarts_used": r.restarts_used,
        "iterations": r.iterations,
        "rank_flags": r.rank_flags,
        "q_star": covariance_json(&r.q_star),
        "local_optima": r.local_optima.iter().map(|o| json!({
            "rate": o.rate,
            "kkt_residual": o.kkt_residual,
            "converged": o.converged,
            "hits": o.hits,
            "q": covariance_json(&o.q),
        })).collect::<Vec<_>>(),
    })
}

fn matrix_text(name: &str, q: &tin_core::SymMatrix) -> String {
    let rows: Vec<String> = q
        .to_rows()
        .iter()
        .map(|r| r.iter().map(|x| format!("{x:>12.6}")).collect::<Vec<_>>().join(" "))
        .collect();
    format!("{name} =\n  {}\n", rows.join("\n  "))
}

fn report_text(r: &OptimizationReport) -> String {
    let mut s = format!(
        "TIN sum rate     {:.12} bits\nKKT residual     {:.3e}\nconverged        {}\nrestarts         {}\n",
        r.rate, r.kkt_residual, r.converged, r.restarts_used
    );
    for (i, f) in r.rank_flags.iter().enumerate() {
        s += &format!("rank Q{}          {:?} (λmin/λmax = {:.3e})\n", i + 1, f.class, f.min_eig_ratio);
    }
    s += &matrix_text("Q1*", &r.q_star.q1);
    s += &matrix_text("Q2*", &r.q_star.q2);
    if r.local_optima.len() > 1 {
        s += &format!("{} distinct local optima:\n", r.local_optima.len());
        for o in &r.local_optima {
            s += &format!("  rate {:.12}  kkt {:.2e}  hits {}\n", o.rate, o.kkt_residual, o.hits);
        }
    }
    s
}

fn verdict_text(v: &RegimeVerdict) -> String {
    let mut s = format!(
        "{:?} channel θ = {}, P = {}, h = {}\nthreshold h0 = {:.15}\nclassification: {}\n",
        v.kind,
        v.theta,
        v.power,
        v.h,
        v.h0,
        if v.certified() { "certified low-interference" } else { "uncertified" }
    );
    for c in &v.evidence {
        let margin = c.margin.map_or("-".to_string(), |m| format!("{m:+.3e}"));
        s += &format!(
            "  [{}] {:<16} margin {:>11}  {}\n",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            margin,
            c.detail
        );
    }
    if let Some(d) = v.diff_rate {
        s += &format!("genie-aided minus TIN rate at the optimum: {d:.3e}\n");
    }
    s
}

fn run(cli: &Cli) -> Result<Rendered, CliError> {
    let format = cli.format.unwrap_or(match cli.command {
        Command::Sweep { .. } => Format::Csv,
        _ => Format::Text,
    });
    let unsupported = |what: &str| CliError::Input(format!("--format csv is not available for `{what}`"));

    match &cli.command {
        Command::Rate { channel, cov, opt } => {
            let ch = channel.load()?.to_matrices();
            let (q, source) = match cov {
                Some(path) => (load_covariances(path)?, "given"),
                None => (optimize_tin(&ch, &opt.options(cli.seed))?.q_star, "optimised"),
            };
            q.check_feasible(&ch)?;
            let rate = tin_sum_rate(&ch, &q)?;
            Ok(Rendered::ok(match format {
                Format::Text => format!("TIN sum rate at {source} covariances: {rate:.12} bits\n"),
                Format::Json => pretty(&json!({ "rate": rate, "covariances": source, "q": covariance_json(&q) })),
                Format::Csv => format!("rate\n{rate:.16e}\n"),
            }))
        }
        Command::Optimize { channel, opt } => {
            let ch = channel.load()?.to_matrices();
            let r = optimize_tin(&ch, &opt.options(cli.seed))?;
            Ok(Rendered::ok(match format {
                Format::Text => report_text(&r),
                Format::Json => pretty(&report_json(&r)),
                Format::Csv => return Err(unsupported("optimize")),
            }))
        }
        Command::Threshold { theta, power } => {
            let q = ThresholdQuery::new(*theta, *power)?;
            let h0 = tin_core::threshold_h0(&q);
            Ok(Rendered::ok(match format {
                Format::Text => format!("h0(θ = {theta}, P = {power}) = {h0:.15}\n"),
                Format::Json => pretty(&json!({ "theta": theta, "P": power, "h0": h0, "sin_theta": theta.sin() })),
                Format::Csv => sweep_csv(&sweep_threshold(&[*theta], &[*power])?),
            }))
        }
        Command::Sweep {
            theta_steps,
            theta_min,
            theta_max,
            powers,
        } => {
            if *theta_steps == 0 {
                return Err(CliError::Input("--theta-steps must be positive".into()));
            }
            let rows = sweep_threshold(&linspace(*theta_min, *theta_max, *theta_steps), powers)?;
            let violations = monotonicity_violations(&rows, 1e-9);
            for (t, lo, hi, excess) in &violations {
                eprintln!("note: h0 at θ = {t} is larger for P = {hi} than for P = {lo} (by {excess:e})");
            }
            Ok(Rendered::ok(match format {
                Format::Csv | Format::Text => sweep_csv(&rows),
                Format::Json => pretty(&json!({ "rows": rows, "monotonicity_violations": violations.len() })),
            }))
        }
        Command::Classify { channel, strict } => {
            let ChannelInput::Vector(sch) = channel.load()? else {
                return Err(CliError::Input(
                    "classify needs a symmetric vector channel ({kind, theta, h, P})".into(),
                ));
            };
            let v = classify(&sch)?;
            let body = match format {
                Format::Text => verdict_text(&v),
                Format::Json => pretty(&serde_json::to_value(&v).expect("verdicts serialise")),
                Format::Csv => return Err(unsupported("classify")),
            };
            Ok(Rendered {
                body,
                failed: *strict && !v.certified(),
            })
        }
        Command::Verify { channel, opt, strict } => {
            let ch = channel.load()?.to_matrices();
            let r = optimize_tin(&ch, &opt.options(cli.seed))?;
            let v = theorem1_verify(&ch, &r);
            let body = match format {
                Format::Text => {
                    let mut s = format!(
                        "verdict: {}\n{}\n",
                        serde_json::to_value(v.status).expect("status serialises").as_str().unwrap_or("?"),
                        v.detail
                    );
                    if v.status == Theorem1Status::NoGenieFound {
                        s += "(the genie search is heuristic: this does not show that TIN is suboptimal)\n";
                    }
                    if let (Some(sm), Some(d)) = (v.smartness_residual, v.diff_rate) {
                        s += &format!("smartness residual {sm:.3e}, genie-aided minus TIN rate {d:.3e}\n");
                    }
                    s + &report_text(&r)
                }
                Format::Json => pretty(&json!({
                    "verdict": v.status,
                    "detail": v.detail,
                    "smartness_residual": v.smartness_residual,
                    "diff_rate": v.diff_rate,
                    "genie": v.genie.as_ref().map(|g| json!({
                        "A1": tin_core::channel::matrix_to_rows(&g.a1),
                        "A2": tin_core::channel::matrix_to_rows(&g.a2),
                        "Sigma1": g.sigma1.to_rows(),
                        "Sigma2": g.sigma2.to_rows(),
                    })),
                    "optimization": report_json(&r),
                })),
                Format::Csv => return Err(unsupported("verify")),
            };
            Ok(Rendered {
                body,
                failed: *strict && v.status != Theorem1Status::Certified,
            })
        }
        Command::Selftest => {
            let report = selftest::run(cli.seed);
            let body = match format {
                Format::Text => {
                    let mut s = String::new();
                    for c in &report.checks {
                        s += &format!("[{}] {:<36} {}\n", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
                    }
                    s + &format!("{} passed, {} failed\n", report.passed(), report.failed())
                }
                Format::Json => pretty(&json!({
                    "passed": report.passed(),
                    "failed": report.failed(),
                    "checks": report.checks,
                })),
                Format::Csv => return Err(unsupported("selftest")),
            };
            Ok(Rendered {
                body,
                failed: report.failed() > 0,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rendered = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered.body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", rendered.body),
    }
    if rendered.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
