//! Command-line front end: enumerate words, evaluate word limits and joint
//! moments, classify ensembles, and run matrix simulations, with JSON/CSV
//! output suitable for tables.
//!
//! Exit codes: 0 success; 1 the run produced output but a numeric result is
//! flagged or a verdict is inconclusive; 2 usage error; 3 I/O error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use patmat::{
    classify, closed_form_p, default_battery, extrapolated_p, fourth_moment_decay,
    limit_joint_moment, limit_joint_moment_with, mc_volume, p_limit, simulate_moment,
    CountMode, Error, InputDistribution, LimitConfig, Monomial, Pattern, PEstimate, Verdict, Word,
};

#[derive(Parser)]
#[command(
    name = "patmat",
    version,
    about = "Limiting joint moments of patterned random matrices",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for parallel sections (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the pair-matched words of an even length.
    Words(WordsArgs),
    /// Limit p(w) of one word under one pattern.
    Pofw(PofwArgs),
    /// Limiting joint moment of a monomial in independent matrices.
    Moment(MomentArgs),
    /// Compare a pattern against the free/classical/half-independent references.
    Classify(ClassifyArgs),
    /// Monte Carlo estimate of a joint moment by direct matrix simulation.
    Simulate(SimulateArgs),
    /// Fourth-moment decay rate of the simulated trace across dimensions.
    Decay(DecayArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    /// Closed form where one exists, extrapolated counting otherwise.
    Auto,
    /// Closed form only; error when the pattern/word pair has none.
    Exact,
    /// Finite-n counting extrapolated in 1/n, even when a closed form exists.
    Extrapolate,
    /// Monte Carlo volume of the link constraint systems (Toeplitz/Hankel).
    Mc,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Strict,
    Relaxed,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DistArg {
    Rademacher,
    Gaussian,
}

impl From<DistArg> for InputDistribution {
    fn from(d: DistArg) -> InputDistribution {
        match d {
            DistArg::Rademacher => InputDistribution::Rademacher,
            DistArg::Gaussian => InputDistribution::StandardGaussian,
        }
    }
}

#[derive(Args)]
struct WordsArgs {
    /// Word length (even, at most 16).
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct PofwArgs {
    #[arg(long)]
    pattern: String,
    /// Pair-matched word, lowercase letters named by first occurrence.
    #[arg(long)]
    word: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Dimensions for finite-n counting (comma separated, ascending).
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<u32>>,
    /// Counting mode; default strict for words up to length 6, relaxed above.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Monte Carlo sample count for --method mc.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct MomentArgs {
    #[arg(long)]
    pattern: String,
    /// Comma-separated colors, e.g. 1,2,3,1,2,3.
    #[arg(long)]
    monomial: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<u32>>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Monte Carlo sample count for --method mc.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    pattern: String,
    /// One monomial per line (comma-separated colors); default battery when absent.
    #[arg(long)]
    battery_file: Option<PathBuf>,
    /// Absolute disagreement below this never witnesses a refutation.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    monomial: String,
    /// Matrix dimension.
    #[arg(long, default_value_t = 500)]
    n: u32,
    #[arg(long, default_value_t = 200)]
    reps: u64,
    #[arg(long, value_enum, default_value_t = DistArg::Rademacher)]
    dist: DistArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct DecayArgs {
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    monomial: String,
    /// Dimensions for the log-log fit (comma separated, ascending).
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
    n_grid: Vec<u32>,
    #[arg(long, default_value_t = 200)]
    reps: u64,
    #[arg(long, value_enum, default_value_t = DistArg::Rademacher)]
    dist: DistArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// A rendered run: the config echo and results payload plus the flag that
/// decides between exit 0 and exit 1.
struct Outcome {
    config: serde_json::Value,
    results: serde_json::Value,
    /// Lines for text format (only where text output is defined).
    text: Option<Vec<String>>,
    /// CSV header + rows.
    csv: (Vec<&'static str>, Vec<Vec<String>>),
    flagged: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // A second build_global in-process is harmless; the pool is set once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let format = cli_format(&cli.command);
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let rendered = match render(&outcome, format) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&cli.out, &rendered) {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    if outcome.flagged {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cli_format(command: &Command) -> Format {
    match command {
        Command::Words(a) => a.format,
        Command::Pofw(a) => a.format,
        Command::Moment(a) => a.format,
        Command::Classify(a) => a.format,
        Command::Simulate(a) => a.format,
        Command::Decay(a) => a.format,
    }
}

fn run(command: &Command) -> Result<Outcome, Error> {
    match command {
        Command::Words(a) => run_words(a),
        Command::Pofw(a) => run_pofw(a),
        Command::Moment(a) => run_moment(a),
        Command::Classify(a) => run_classify(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Decay(a) => run_decay(a),
    }
}

fn parse_pattern(s: &str) -> Result<Pattern, Error> {
    s.parse::<Pattern>()
}

fn limit_config(n_grid: &Option<Vec<u32>>, mode: Option<ModeArg>) -> Result<LimitConfig, Error> {
    let mut config = LimitConfig::default();
    if let Some(grid) = n_grid {
        config.n_grid = grid.clone();
    }
    config.mode = mode.map(|m| match m {
        ModeArg::Strict => CountMode::Strict,
        ModeArg::Relaxed => CountMode::Relaxed,
    });
    config.validate()?;
    Ok(config)
}

/// Per-word estimator for the chosen method (shared by pofw and moment).
fn estimate_word(
    pattern: Pattern,
    word: &Word,
    method: MethodArg,
    config: &LimitConfig,
    samples: u64,
    seed: u64,
) -> Result<PEstimate, Error> {
    match method {
        MethodArg::Auto => p_limit(pattern, word, config),
        MethodArg::Exact => match closed_form_p(pattern, word) {
            Some(_) => p_limit(pattern, word, config),
            None => Err(Error::InvalidArgument(format!(
                "no closed form for p({word}) under {pattern}; use --method extrapolate or mc"
            ))),
        },
        MethodArg::Extrapolate => extrapolated_p(pattern, word, config),
        MethodArg::Mc => mc_volume(pattern, word, samples, seed),
    }
}

fn run_words(a: &WordsArgs) -> Result<Outcome, Error> {
    let words = patmat::enumerate_pair_matched(a.k)?;
    let config = json!({ "subcommand": "words", "k": a.k });
    let rows: Vec<serde_json::Value> = words
        .iter()
        .map(|w| {
            json!({
                "word": w.to_string(),
                "catalan": w.is_catalan(),
                "symmetric": w.is_symmetric(),
            })
        })
        .collect();
    let results = json!({ "k": a.k, "count": words.len(), "words": rows });
    let text = words.iter().map(|w| w.to_string()).collect();
    let csv_rows = words
        .iter()
        .map(|w| {
            vec![
                w.to_string(),
                w.is_catalan().to_string(),
                w.is_symmetric().to_string(),
            ]
        })
        .collect();
    Ok(Outcome {
        config,
        results,
        text: Some(text),
        csv: (vec!["word", "catalan", "symmetric"], csv_rows),
        flagged: false,
    })
}

fn opt_rational_string(r: &Option<num_rational::Rational64>) -> String {
    r.map(|r| r.to_string()).unwrap_or_default()
}

fn run_pofw(a: &PofwArgs) -> Result<Outcome, Error> {
    let pattern = parse_pattern(&a.pattern)?;
    let word = Word::parse(&a.word)?;
    if !word.is_pair_matched() {
        return Err(Error::NotPairMatched(a.word.clone()));
    }
    let config = limit_config(&a.n_grid, a.mode)?;
    let estimate = estimate_word(pattern, &word, a.method, &config, a.samples, a.seed)?;
    let config_echo = json!({
        "subcommand": "pofw",
        "pattern": pattern,
        "word": word.to_string(),
        "method": a.method,
        "n_grid": config.n_grid,
        "mode": a.mode,
        "samples": a.samples,
        "seed": a.seed,
    });
    let mut results = serde_json::to_value(&estimate).expect("estimate serializes");
    let obj = results.as_object_mut().expect("estimate is an object");
    obj.insert("word".into(), json!(word.to_string()));
    obj.insert("pattern".into(), json!(pattern));
    let flagged = estimate.flagged;
    let csv_row = vec![
        word.to_string(),
        pattern.name().to_string(),
        json_str(&serde_json::to_value(estimate.method).unwrap()),
        estimate.value.to_string(),
        opt_rational_string(&estimate.exact),
        estimate.std_error.to_string(),
        estimate.flagged.to_string(),
        serde_json::to_string(&estimate.diagnostics).expect("diagnostics serialize"),
    ];
    Ok(Outcome {
        config: config_echo,
        results,
        text: None,
        csv: (
            vec![
                "word",
                "pattern",
                "method",
                "value",
                "exact",
                "std_error",
                "flagged",
                "diagnostics",
            ],
            vec![csv_row],
        ),
        flagged,
    })
}

/// Unquote a JSON string value for CSV cells.
fn json_str(v: &serde_json::Value) -> String {
    v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())
}

fn run_moment(a: &MomentArgs) -> Result<Outcome, Error> {
    let pattern = parse_pattern(&a.pattern)?;
    let q = Monomial::parse(&a.monomial)?;
    let config = limit_config(&a.n_grid, a.mode)?;
    let moment = match a.method {
        MethodArg::Auto => limit_joint_moment(pattern, &q, &config)?,
        _ => limit_joint_moment_with(pattern, &q, |p, w| {
            estimate_word(p, w, a.method, &config, a.samples, a.seed)
        })?,
    };
    let config_echo = json!({
        "subcommand": "moment",
        "pattern": pattern,
        "monomial": q,
        "method": a.method,
        "n_grid": config.n_grid,
        "mode": a.mode,
        "samples": a.samples,
        "seed": a.seed,
    });
    let contributions: Vec<serde_json::Value> = moment
        .contributions
        .iter()
        .map(|(w, est)| {
            json!({
                "colored_word": w.to_string(),
                "word": w.drop_colors().to_string(),
                "estimate": est,
            })
        })
        .collect();
    let results = json!({
        "pattern": pattern,
        "monomial": q,
        "method": a.method,
        "value": moment.value,
        "exact": moment.exact.map(|r| r.to_string()),
        "std_error": moment.std_error,
        "flagged": moment.flagged,
        "words": moment.contributions.len(),
        "contributions": contributions,
    });
    let csv_row = vec![
        pattern.name().to_string(),
        q.to_string(),
        json_str(&serde_json::to_value(a.method).unwrap()),
        moment.value.to_string(),
        opt_rational_string(&moment.exact),
        moment.std_error.to_string(),
        moment.flagged.to_string(),
        moment.contributions.len().to_string(),
    ];
    Ok(Outcome {
        config: config_echo,
        results,
        text: None,
        csv: (
            vec![
                "pattern",
                "monomial",
                "method",
                "value",
                "exact",
                "std_error",
                "flagged",
                "words",
            ],
            vec![csv_row],
        ),
        flagged: moment.flagged,
    })
}

fn run_classify(a: &ClassifyArgs) -> Result<Outcome, Error> {
    let pattern = parse_pattern(&a.pattern)?;
    let battery = match &a.battery_file {
        None => default_battery(),
        Some(path) => {
            let contents = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidArgument(format!("cannot read battery file {}: {e}", path.display()))
            })?;
            let mut battery = Vec::new();
            for line in contents.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                battery.push(Monomial::parse(line)?);
            }
            if battery.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "battery file {} contains no monomials",
                    path.display()
                )));
            }
            battery
        }
    };
    let config = limit_config(&a.n_grid, None)?;
    let report = classify(pattern, &battery, a.tolerance, &config)?;
    let config_echo = json!({
        "subcommand": "classify",
        "pattern": pattern,
        "battery": battery,
        "battery_file": a.battery_file,
        "tolerance": a.tolerance,
        "n_grid": config.n_grid,
    });
    let flagged = report.rows.iter().any(|r| r.flagged)
        || [&report.free, &report.classical, &report.half_independent]
            .iter()
            .any(|v| v.verdict == Verdict::Inconclusive);
    let verdicts = [
        report.free.verdict.to_string(),
        report.classical.verdict.to_string(),
        report.half_independent.verdict.to_string(),
    ];
    let csv_rows = report
        .rows
        .iter()
        .map(|row| {
            vec![
                report.pattern.name().to_string(),
                row.monomial.to_string(),
                row.ensemble.to_string(),
                opt_rational_string(&row.ensemble_exact),
                row.std_error.to_string(),
                row.flagged.to_string(),
                row.free.to_string(),
                row.classical.to_string(),
                row.half_independent.to_string(),
                verdicts[0].clone(),
                verdicts[1].clone(),
                verdicts[2].clone(),
            ]
        })
        .collect();
    let results = serde_json::to_value(&report).expect("report serializes");
    Ok(Outcome {
        config: config_echo,
        results,
        text: None,
        csv: (
            vec![
                "pattern",
                "monomial",
                "ensemble",
                "ensemble_exact",
                "std_error",
                "flagged",
                "free",
                "classical",
                "half_independent",
                "free_verdict",
                "classical_verdict",
                "half_independent_verdict",
            ],
            csv_rows,
        ),
        flagged,
    })
}

fn run_simulate(a: &SimulateArgs) -> Result<Outcome, Error> {
    let pattern = parse_pattern(&a.pattern)?;
    let q = Monomial::parse(&a.monomial)?;
    let stats = simulate_moment(pattern, &q, a.n, a.reps, a.dist.into(), a.seed)?;
    let limit = limit_joint_moment(pattern, &q, &LimitConfig::default())?;
    let abs_error = (stats.mean - limit.value).abs();
    let config_echo = json!({
        "subcommand": "simulate",
        "pattern": pattern,
        "monomial": q,
        "n": a.n,
        "reps": a.reps,
        "dist": a.dist,
        "seed": a.seed,
    });
    let results = json!({
        "pattern": pattern,
        "monomial": q,
        "n": a.n,
        "reps": a.reps,
        "dist": a.dist,
        "seed": a.seed,
        "mean": stats.mean,
        "std_error": stats.std_error,
        "limit": limit.value,
        "limit_flagged": limit.flagged,
        "abs_error": abs_error,
        "per_replicate": stats.per_replicate,
    });
    let csv_row = vec![
        pattern.name().to_string(),
        q.to_string(),
        a.n.to_string(),
        a.reps.to_string(),
        stats.mean.to_string(),
        stats.std_error.to_string(),
        limit.value.to_string(),
        abs_error.to_string(),
    ];
    Ok(Outcome {
        config: config_echo,
        results,
        text: None,
        csv: (
            vec![
                "pattern",
                "monomial",
                "n",
                "reps",
                "mean",
                "std_error",
                "limit",
                "abs_error",
            ],
            vec![csv_row],
        ),
        flagged: limit.flagged,
    })
}

fn run_decay(a: &DecayArgs) -> Result<Outcome, Error> {
    let pattern = parse_pattern(&a.pattern)?;
    let q = Monomial::parse(&a.monomial)?;
    let fit = fourth_moment_decay(pattern, &q, &a.n_grid, a.reps, a.dist.into(), a.seed)?;
    let config_echo = json!({
        "subcommand": "decay",
        "pattern": pattern,
        "monomial": q,
        "n_grid": a.n_grid,
        "reps": a.reps,
        "dist": a.dist,
        "seed": a.seed,
    });
    let results = serde_json::to_value(&fit).expect("fit serializes");
    let opt_f64 = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let csv_rows = fit
        .n_grid
        .iter()
        .zip(&fit.fourth_moment_estimates)
        .map(|(n, estimate)| {
            vec![
                pattern.name().to_string(),
                q.to_string(),
                n.to_string(),
                a.reps.to_string(),
                estimate.to_string(),
                opt_f64(fit.slope),
                opt_f64(fit.intercept),
            ]
        })
        .collect();
    Ok(Outcome {
        config: config_echo,
        results,
        text: None,
        csv: (
            vec![
                "pattern",
                "monomial",
                "n",
                "reps",
                "fourth_moment",
                "slope",
                "intercept",
            ],
            csv_rows,
        ),
        flagged: fit.fit_error.is_some(),
    })
}

fn render(outcome: &Outcome, format: Format) -> Result<String, Error> {
    match format {
        Format::Text => {
            let lines = outcome.text.as_ref().ok_or_else(|| {
                Error::InvalidArgument(
                    "text output is only defined for the words subcommand; use json or csv".into(),
                )
            })?;
            let mut s = lines.join("\n");
            if !s.is_empty() {
                s.push('\n');
            }
            Ok(s)
        }
        Format::Json => {
            let timestamp = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap_or_default()
                .as_secs();
            let record = json!({
                "config": outcome.config,
                "results": outcome.results,
                "version": env!("CARGO_PKG_VERSION"),
                "timestamp": timestamp,
            });
            let mut s = serde_json::to_string_pretty(&record).expect("record serializes");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let (header, rows) = &outcome.csv;
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(header).expect("csv header");
            for row in rows {
                writer.write_record(row).expect("csv row");
            }
            let bytes = writer.into_inner().expect("csv flush");
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
    }
}

fn emit(out: &Option<PathBuf>, rendered: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, rendered),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(rendered.as_bytes())?;
            lock.flush()
        }
    }
}
