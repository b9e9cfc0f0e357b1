use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use isplab::analysis::cyclic_approx;
use isplab::construction::{advance_stage, build, DEFAULT_MAX_HORIZON};
use isplab::literal::parse_vector;
use isplab::persist::{peek_mode, verify_state, SpaceConfig, StateFile, WitnessFile};
use isplab::scalar::{from_rational, parse_rational};
use isplab::schedule::nn_schedule;
use isplab::space::IspVerdict;
use isplab::suites::{lemma_suites, SuiteResult};
use isplab::{ConstructionState, Error, Rational, Real, Scalar, ScalarMode};
use serde_json::json;

#[derive(Parser)]
#[command(name = "isplab", version, about = "Build and certify an operator without invariant subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rational,
    Binary64,
}

impl From<ModeArg> for ScalarMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Rational => ScalarMode::Rational,
            ModeArg::Binary64 => ScalarMode::Binary64,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide the invariant subspace property for a space config.
    Classify { config: PathBuf },
    /// Build (or extend) a construction and write its state file.
    Build {
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        stages: usize,
        #[arg(long)]
        out: PathBuf,
        /// Override the config's scalar mode.
        #[arg(long, value_enum)]
        scalar_mode: Option<ModeArg>,
        /// Extend this state file instead of starting over.
        #[arg(long)]
        from: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_HORIZON)]
        max_horizon: u64,
    },
    /// Re-check certificates and run the randomized lemma suites.
    Verify {
        state: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Find a polynomial Q with p_N(Q(T)x - u_0) < eps.
    Cyclic {
        state: PathBuf,
        /// Sum of c*e(n,k) / c*e(n) terms.
        #[arg(long)]
        vector: String,
        #[arg(long, default_value_t = 1)]
        norm: u32,
        #[arg(long, default_value = "1/4")]
        eps: String,
        /// Witness file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize stages, growth and certificate margins.
    Report { state: PathBuf },
}

/// A failure with its exit-code class.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Horizon(_) | Error::HorizonLimit { .. } | Error::LevelExhausted { .. } => 3,
            Error::Certificate { .. } => 4,
            Error::Witness(_) | Error::Precondition(_) => 5,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fmt = cli.format;
    let res = match cli.command {
        Command::Classify { config } => classify(&config, fmt),
        Command::Build { config, stages, out, scalar_mode, from, max_horizon } => {
            build_cmd(&config, stages, &out, scalar_mode.map(Into::into), from.as_deref(), max_horizon, fmt)
        }
        Command::Verify { state, seed } => on_state(&state, |mode, text| match mode {
            ScalarMode::Rational => verify::<Rational>(text, seed, fmt),
            ScalarMode::Binary64 => verify::<Real>(text, seed, fmt),
        }),
        Command::Cyclic { state, vector, norm, eps, out } => on_state(&state, |mode, text| match mode {
            ScalarMode::Rational => cyclic::<Rational>(text, &vector, norm, &eps, out.as_deref(), fmt),
            ScalarMode::Binary64 => cyclic::<Real>(text, &vector, norm, &eps, out.as_deref(), fmt),
        }),
        Command::Report { state } => on_state(&state, |mode, text| match mode {
            ScalarMode::Rational => report::<Rational>(text, fmt),
            ScalarMode::Binary64 => report::<Real>(text, fmt),
        }),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn on_state(path: &Path, run: impl FnOnce(ScalarMode, &str) -> CliResult) -> CliResult {
    let text = read(path)?;
    run(peek_mode(&text)?, &text)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn classify(config: &Path, fmt: Format) -> CliResult {
    let cfg = SpaceConfig::from_json(&read(config)?)?;
    let space = isplab::SpaceDescriptor::by_name(&cfg.space)?;
    let verdict = space.classify_isp()?;
    match fmt {
        Format::Text => println!("{verdict}"),
        Format::Json => {
            let detail = match &verdict {
                IspVerdict::Satisfies { j0 } => json!({ "j0": j0 }),
                IspVerdict::Fails { infinite_levels } => json!({ "infinite_levels": infinite_levels }),
            };
            print_json(&json!({
                "space": cfg.space,
                "isp": verdict.satisfies_isp(),
                "verdict": verdict.to_string(),
                "detail": detail,
            }));
        }
    }
    Ok(())
}

fn build_cmd(
    config: &Path,
    stages: usize,
    out: &Path,
    mode: Option<ScalarMode>,
    from: Option<&Path>,
    max_horizon: u64,
    fmt: Format,
) -> CliResult {
    if stages == 0 {
        return Err(fail(2, "--stages must be at least 1"));
    }
    let mut cfg = SpaceConfig::from_json(&read(config)?)?;
    if let Some(m) = mode {
        cfg.scalar_mode = m;
    }
    let prior = from.map(read).transpose()?;
    match cfg.scalar_mode {
        ScalarMode::Rational => build_as::<Rational>(&cfg, stages, out, prior.as_deref(), max_horizon, fmt),
        ScalarMode::Binary64 => build_as::<Real>(&cfg, stages, out, prior.as_deref(), max_horizon, fmt),
    }
}

fn build_as<S: Scalar>(
    cfg: &SpaceConfig,
    stages: usize,
    out: &Path,
    prior: Option<&str>,
    max_horizon: u64,
    fmt: Format,
) -> CliResult {
    let space = cfg.descriptor()?;
    let st = match prior {
        None => build::<S>(&space, stages, max_horizon)?,
        Some(text) => {
            let mut st = ConstructionState::<S>::from_json(text)?;
            if st.space().name() != space.name() {
                return Err(fail(2, format!("state is for '{}', config names '{}'", st.space().name(), space.name())));
            }
            st.set_max_horizon(max_horizon);
            while st.stages_done() < stages {
                st = advance_stage(&st)?;
            }
            st
        }
    };
    write(out, &st.to_json())?;
    match fmt {
        Format::Text => println!(
            "built {} stage(s) of {} ({}): horizon {}, wrote {}",
            st.stages_done(),
            space.name(),
            S::MODE,
            st.horizon(),
            out.display()
        ),
        Format::Json => print_json(&json!({
            "space": space.name(),
            "scalar_mode": S::MODE,
            "stages": st.stages_done(),
            "horizon": st.horizon(),
            "out": out.display().to_string(),
        })),
    }
    Ok(())
}

fn verify<S: Scalar>(text: &str, seed: u64, fmt: Format) -> CliResult {
    let file: StateFile = serde_json::from_str(text).map_err(|e| fail(2, format!("bad state file: {e}")))?;
    let st = ConstructionState::<S>::from_file_unchecked(&file)?;
    let outcome = verify_state(&st, &file)?;
    let suites: Vec<SuiteResult> = if outcome.passed() { lemma_suites(&st, seed)? } else { Vec::new() };
    let ok = outcome.passed() && suites.iter().all(SuiteResult::passed);
    match fmt {
        Format::Text => {
            for r in &outcome.reports {
                let verdict = if r.passed() { "ok" } else { "FAILED" };
                println!("stage {}: {verdict}", r.stage);
                for c in r.failures() {
                    println!("  {} failed at {} (margin {:e})", c.condition, c.location, c.margin);
                }
            }
            for m in &outcome.mismatches {
                println!("mismatch: {m}");
            }
            for s in &suites {
                match s.worst_ratio {
                    Some(w) => println!("{}: {}/{} hold (worst lhs/rhs {w:.3e})", s.name, s.held, s.instances),
                    None => println!("{}: {}/{} hold", s.name, s.held, s.instances),
                }
            }
            println!("{}", if ok { "verify: ok" } else { "verify: FAILED" });
        }
        Format::Json => print_json(&json!({
            "ok": ok,
            "reports": outcome.reports,
            "mismatches": outcome.mismatches,
            "suites": suites,
        })),
    }
    if ok {
        Ok(())
    } else {
        let first = outcome
            .failed_conditions()
            .first()
            .map(|(n, c)| format!("condition {c} fails at stage {n}"))
            .or_else(|| outcome.mismatches.first().cloned())
            .or_else(|| suites.iter().find(|s| !s.passed()).map(|s| format!("suite '{}' failed", s.name)))
            .unwrap_or_default();
        Err(fail(4, first))
    }
}

fn cyclic<S: Scalar>(text: &str, vector: &str, norm: u32, eps: &str, out: Option<&Path>, fmt: Format) -> CliResult {
    let st = ConstructionState::<S>::from_json(text)?;
    let x = parse_vector(st.space(), vector)?;
    if x.is_zero() {
        return Err(fail(2, "vector literal is zero"));
    }
    if norm == 0 {
        return Err(fail(2, "--norm must be at least 1"));
    }
    let eps = parse_rational(eps)?;
    if eps <= Rational::zero() {
        return Err(fail(2, "--eps must be positive"));
    }
    let x = isplab::FinVector::from_pairs(isplab::Frame::E, x.iter().map(|(k, c)| (k, from_rational::<S>(c))));
    let w = cyclic_approx(&st, &x, norm, &from_rational::<S>(&eps))?;
    let file = WitnessFile::from_witness(&st, &w);
    let body = serde_json::to_string_pretty(&file).expect("witness serializes");
    match out {
        Some(path) => {
            write(path, &body)?;
            match fmt {
                Format::Text => println!(
                    "witness: stage {}, deg Q = {}, achieved error {} < {}, budget {}, wrote {}",
                    w.stage,
                    w.q.degree().unwrap_or(0),
                    w.achieved_error,
                    eps,
                    if w.budget_flag { "held" } else { "exceeded" },
                    path.display()
                ),
                Format::Json => println!("{body}"),
            }
        }
        None => println!("{body}"),
    }
    Ok(())
}

fn report<S: Scalar>(text: &str, fmt: Format) -> CliResult {
    let st = ConstructionState::<S>::from_json(text)?;
    let n = st.stages_done();
    match fmt {
        Format::Text => {
            println!("{} ({}), {n} stage(s), horizon {}", st.space().name(), S::MODE, st.horizon());
            println!(
                "{:>5} {:>4} {:>12} {:>12} {:>14} {:>14} {:>14}",
                "n", "N_n", "a_n", "Delta_n+1", "s_n+1", "D_n", "L_n"
            );
            for m in 1..=n {
                println!(
                    "{m:>5} {:>4} {:>12} {:>12} {:>14} {:>14} {:>14}",
                    nn_schedule(m),
                    st.a(m),
                    st.delta(m + 1),
                    st.s(m + 1),
                    short(st.d(m)),
                    short(st.l(m))
                );
            }
            for r in st.certificates() {
                println!("stage {} certificates ({}):", r.stage, &r.digest[..16]);
                for c in &r.checks {
                    println!(
                        "  {:<14} {:>5} on [{}, {}) x{:<8} margin {:>10.3e}",
                        c.condition.id(),
                        if c.pass { "ok" } else { "FAIL" },
                        c.range.0,
                        c.range.1,
                        c.instances,
                        c.margin
                    );
                }
            }
        }
        Format::Json => {
            let stages: Vec<_> = (1..=n)
                .map(|m| {
                    json!({
                        "stage": m,
                        "N": nn_schedule(m),
                        "a": st.a(m),
                        "Delta_next": st.delta(m + 1),
                        "s_next": st.s(m + 1),
                        "D": st.d(m).to_string(),
                        "L": st.l(m).to_string(),
                    })
                })
                .collect();
            print_json(&json!({
                "space": st.space().name(),
                "scalar_mode": S::MODE,
                "stages": stages,
                "certificates": st.certificates(),
            }));
        }
    }
    Ok(())
}

/// Compact rendering for table cells; exact values stay in the JSON output.
fn short<S: Scalar>(v: &S) -> String {
    let f = v.to_f64();
    if f == 0.0 {
        "0".into()
    } else if f.is_finite() {
        format!("{f:.4e}")
    } else {
        format!("~2^{:.1}", v.log2())
    }
}
