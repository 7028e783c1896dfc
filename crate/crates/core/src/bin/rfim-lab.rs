use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use rfim_core::lab::decay::run_decay_experiment;
use rfim_core::lab::influence::summarize;
use rfim_core::lab::report::{decay_plot, influence_plot, prepare_output, write_csv_file, write_summary};
use rfim_core::lab::{
    run_goodbox_calibration, run_influence_sweep, run_partition_experiment, run_verify_suite, ExperimentConfig,
    LabError, VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "rfim-lab",
    version,
    about = "Random-field Ising experiments and invariant checks"
)]
#[command(after_help = ExperimentConfig::help_text())]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file with `key = value` lines.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set workers=4`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Record wall time per task in the CSV `seconds` column.
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary influence sweep over (T, eps, N, replica).
    Simulate(Common),
    /// Law of |B u B'| and its tail slope.
    Decay(Common),
    /// Good-box probabilities under wired and free boundaries, and c_g.
    Goodbox(Common),
    /// Exact-oracle invariant suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Multiply FK cluster factors in the reference weight by 1 + DELTA
        /// (negative control).
        #[arg(long, value_name = "DELTA", default_value_t = 0.0, hide = true)]
        perturb_cosh: f64,
    },
    /// Padded partitions of sampled B u B' sets.
    Partition(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| LabError::Config {
                key: "--config".into(),
                msg: format!("{}: {e}", path.display()),
            })?;
            ExperimentConfig::from_text(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for o in &common.overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(cfg: &ExperimentConfig, out: &Path, timing: bool) -> Result<(), LabError> {
    let start = Instant::now();
    let records = run_influence_sweep(cfg, timing)?;
    write_csv_file(&out.join("influence.csv"), &records)?;
    let summary = summarize(&records);
    std::fs::write(out.join("influence.svg"), influence_plot(&records).to_svg())?;
    let insane: Vec<String> = records
        .iter()
        .filter(|r| !r.fkg_ok())
        .map(|r| {
            format!(
                "T={} eps={} N={} replica={}: m_hat={} stderr={}",
                r.t, r.eps, r.n, r.replica, r.m_hat, r.stderr
            )
        })
        .collect();
    write_summary(
        out,
        "simulate",
        cfg,
        start.elapsed().as_secs_f64(),
        &serde_json::json!({ "records": records, "averages": summary, "sanity_failures": insane }),
    )?;
    for s in &summary {
        println!(
            "T={} eps={} N={}: m = {:.5} ± {:.5} ({} replicas)",
            s.t, s.eps, s.n, s.m_mean, s.stderr, s.replicas
        );
    }
    if insane.is_empty() {
        Ok(())
    } else {
        Err(LabError::Invariant(format!(
            "m_hat + 3 stderr < 0 for {}",
            insane.join("; ")
        )))
    }
}

fn decay(cfg: &ExperimentConfig, out: &Path) -> Result<(), LabError> {
    let start = Instant::now();
    let rec = run_decay_experiment(cfg)?;
    write_csv_file(&out.join("decay.csv"), &rec.bins)?;
    std::fs::write(out.join("decay.svg"), decay_plot(&rec.bins).to_svg())?;
    write_summary(out, "decay", cfg, start.elapsed().as_secs_f64(), &rec)?;
    match &rec.fit {
        Some(f) => println!(
            "slope {:.5} (95% CI {:.5} .. {:.5}) over {} bins, {} samples",
            f.slope, f.slope_ci.0, f.slope_ci.1, rec.fit_bins, rec.samples
        ),
        None => println!(
            "fewer than 3 bins with >= 30 counts ({} samples): no slope",
            rec.samples
        ),
    }
    if rec.violations.is_empty() {
        Ok(())
    } else {
        Err(LabError::Invariant(format!(
            "{} violations, first: {}",
            rec.violations.len(),
            rec.violations[0]
        )))
    }
}

fn goodbox(cfg: &ExperimentConfig, out: &Path) -> Result<(), LabError> {
    let start = Instant::now();
    let rep = run_goodbox_calibration(cfg)?;
    write_csv_file(&out.join("goodbox.csv"), &rep.rows)?;
    let mut suggested = cfg.clone();
    suggested.c_g = rep.suggested_c_g;
    std::fs::write(out.join("suggested.conf"), suggested.to_text())?;
    write_summary(out, "goodbox", cfg, start.elapsed().as_secs_f64(), &rep)?;
    for r in &rep.rows {
        println!(
            "T={} q={} {}: P(good) = {:.4} ± {:.4}",
            r.t, r.q, r.bc, r.prob, r.stderr
        );
    }
    let bound = if rep.suggested_is_lower_bound {
        " (lower bound)"
    } else {
        ""
    };
    println!("suggested c_g = {}{bound}", rep.suggested_c_g);
    Ok(())
}

fn partition(cfg: &ExperimentConfig, out: &Path) -> Result<(), LabError> {
    let start = Instant::now();
    let outcome = run_partition_experiment(cfg)?;
    write_csv_file(&out.join("partition_summary.csv"), &outcome.summaries)?;
    if let Some((sites, p)) = &outcome.example {
        let file = std::fs::File::create(out.join("partition.csv"))?;
        p.write_csv(sites, file)?;
    }
    write_summary(out, "partition", cfg, start.elapsed().as_secs_f64(), &outcome.summaries)?;
    for s in &outcome.summaries {
        println!(
            "q={}: boundary fraction {:.5} ± {:.5} over {} sets",
            s.q, s.mean_fraction, s.stderr, s.sets
        );
    }
    Ok(())
}

fn verify(cfg: &ExperimentConfig, out: &Path, perturb: f64) -> Result<(), LabError> {
    let report = run_verify_suite(&VerifyOptions {
        cosh_perturbation: perturb,
    });
    std::fs::write(out.join("verify.json"), serde_json::to_string_pretty(&report)?)?;
    write_summary(out, "verify", cfg, report.seconds, &report)?;
    let failed: Vec<&str> = report.failures().map(|c| c.id.as_str()).collect();
    println!(
        "{} checks, {} failed, {:.1}s",
        report.checks.len(),
        failed.len(),
        report.seconds
    );
    for id in &failed {
        println!("FAIL {id}");
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(LabError::Invariant(format!("{} suite checks failed", failed.len())))
    }
}

fn run(cli: Cli) -> Result<(), LabError> {
    let (common, perturb) = match &cli.command {
        Command::Simulate(c) | Command::Decay(c) | Command::Goodbox(c) | Command::Partition(c) => (c, 0.0),
        Command::Verify { common, perturb_cosh } => (common, *perturb_cosh),
    };
    let cfg = load(common)?;
    if matches!(cli.command, Command::Decay(_) | Command::Partition(_)) {
        rfim_core::lab::decay::decay_grid(&cfg)?;
    }
    let out = cfg.output.clone();
    prepare_output(&out)?;
    match cli.command {
        Command::Simulate(_) => simulate(&cfg, &out, common.timing),
        Command::Decay(_) => decay(&cfg, &out),
        Command::Goodbox(_) => goodbox(&cfg, &out),
        Command::Partition(_) => partition(&cfg, &out),
        Command::Verify { .. } => verify(&cfg, &out, perturb),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rfim-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
