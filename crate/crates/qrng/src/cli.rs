//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{self, Format};
use crate::config::{self, Entry, RunConfig};
use crate::error::{exit, Error, Result};
use crate::fsio;

#[derive(Debug, Parser)]
#[command(
    name = "qrng",
    version,
    about = "Simulate, correlate, extract and test a photon-branching random bit source"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Bin,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Bin => Format::Bin,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Key-value configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Master seed (decimal or 0x hex); required by simulate and pipeline.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Output encoding: bin or csv for tags and bits, csv or json for curves
    /// and reports.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Scene preset (reference or bright).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Simulated time in ns.
    #[arg(long, global = true, value_name = "NS")]
    pub duration_ns: Option<String>,
    /// Override any configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scene into a tag file and its JSON sidecar.
    Simulate,
    /// Correlate detector pairs and fit the antibunching dip.
    G2 {
        /// Tag file (PTAG, or CSV by extension).
        #[arg(long)]
        tags: PathBuf,
        /// Detector pair such as R1:T1; repeatable.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        /// Histogram bin width (default 0.1)
        #[arg(long, value_name = "NS")]
        bin_width_ns: Option<String>,
        /// Largest lag kept on either side of zero (default 10)
        #[arg(long, value_name = "NS")]
        max_lag_ns: Option<String>,
    },
    /// Encode tags into bits and debias them.
    Extract {
        #[arg(long)]
        tags: PathBuf,
        /// reflection_pair or reflection_transmission.
        #[arg(long)]
        encoding: Option<String>,
    },
    /// Run the statistical battery on a bit file.
    Test {
        /// Bit file (QBIT, or 0/1 text by .csv/.txt extension).
        #[arg(long)]
        bits: PathBuf,
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Summarize a run directory.
    Report {
        #[arg(long, value_name = "DIR")]
        run: PathBuf,
    },
    /// simulate, g2, extract, test and report in one go.
    Pipeline,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let c = &cli.common;
    let mut entries = Vec::new();
    if let Some(path) = &c.config {
        let data = fsio::read(path)?;
        let text = String::from_utf8(data).map_err(|e| {
            Error::validation(format!(
                "{}: not UTF-8 text at byte {}",
                path.display(),
                e.utf8_error().valid_up_to()
            ))
        })?;
        entries.extend(config::parse_entries(&text, &path.display().to_string())?);
    }
    if let Some(p) = &c.preset {
        entries.push(Entry::flag("preset", p.clone(), "--preset"));
    }
    if let Some(s) = &c.seed {
        entries.push(Entry::flag("seed", s.clone(), "--seed"));
    }
    if let Some(d) = &c.duration_ns {
        entries.push(Entry::flag("duration_ns", d.clone(), "--duration-ns"));
    }
    for s in &c.set {
        entries.push(Entry::from_assignment(s)?);
    }
    match &cli.command {
        Command::G2 {
            pairs,
            bin_width_ns,
            max_lag_ns,
            ..
        } => {
            if !pairs.is_empty() {
                entries.push(Entry::flag("g2.pairs", pairs.join(","), "--pair"));
            }
            if let Some(v) = bin_width_ns {
                entries.push(Entry::flag("g2.bin_width_ns", v.clone(), "--bin-width-ns"));
            }
            if let Some(v) = max_lag_ns {
                entries.push(Entry::flag("g2.max_lag_ns", v.clone(), "--max-lag-ns"));
            }
        }
        Command::Extract { encoding: Some(e), .. } => entries.push(Entry::flag("encoding", e.clone(), "--encoding")),
        Command::Test { alpha: Some(a), .. } => entries.push(Entry::flag("tests.alpha", a.clone(), "--alpha")),
        _ => {}
    }
    RunConfig::from_entries(&entries)
}

fn show(path: &Path) -> String {
    path.display().to_string()
}

/// Runs a parsed command line, printing a short summary on stdout.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = &cli.common.out;
    let format = cli.common.format.map(Format::from);
    match &cli.command {
        Command::Simulate => {
            let s = commands::simulate(&cfg, out, format)?;
            println!(
                "{} events in {} ns ({:.0}/s): R1 {}, R2 {}, T1 {} -> {}",
                s.events,
                s.duration_ns,
                s.total_rate_per_s,
                s.counts[&qrng_core::Detector::R1],
                s.counts[&qrng_core::Detector::R2],
                s.counts[&qrng_core::Detector::T1],
                show(&out.join(&s.file))
            );
        }
        Command::G2 { tags, .. } => {
            cfg.validate_g2()?;
            for f in commands::g2(tags, &cfg.g2, out, format)? {
                match &f.fit {
                    Some(fit) => println!(
                        "{}: g2(0) = {:.4}, tau0 = {:.4} ns{}",
                        f.pair,
                        fit.g2_at_zero,
                        fit.tau0_ns,
                        if f.identified { "" } else { " (flagged: not identified)" }
                    ),
                    None => println!("{}: no fit ({})", f.pair, f.error.as_deref().unwrap_or("unknown")),
                }
            }
        }
        Command::Extract { tags, .. } => {
            let r = commands::extract(tags, &cfg.encoding, out, format)?;
            let retention = r
                .report
                .retention
                .map_or_else(|| "undefined".into(), |x| format!("{x:.4}"));
            println!(
                "raw {} -> stage1 {} -> unbiased {} bits (retention {retention})",
                r.raw.bits, r.stage1.bits, r.unbiased.bits
            );
        }
        Command::Test { bits, .. } => {
            let report = commands::test(bits, &cfg.tests, out, format)?;
            for r in &report.records {
                let status = match r.pass {
                    Some(true) => "pass".to_string(),
                    Some(false) => "FAIL".to_string(),
                    None => format!("skipped ({})", r.skipped.as_deref().unwrap_or("")),
                };
                let p = r.min_p_value.map_or_else(String::new, |p| format!("{p:.6}"));
                println!("{:<28} {:>10} {status}", r.test.name(), p);
            }
            commands::require_pass(&report)?;
        }
        Command::Report { run } => {
            commands::report(run, out, format)?;
            println!("wrote summary to {}", show(out));
        }
        Command::Pipeline => {
            let r = commands::pipeline(&cfg, out, format)?;
            println!(
                "{} events, {} raw bits, {} unbiased bits, battery {:?}",
                r.sidecar.events, r.rates.raw.bits, r.rates.unbiased.bits, r.battery.verdict
            );
            commands::require_pass(&r.battery)?;
        }
    }
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::VALIDATION } else { exit::OK };
        }
    };
    match run(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
