use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bilanz::mining::MinSupport;
use bilanz::pipeline::{
    emit, parse_report_formats, run, ConfigFile, OntologyOutput, PipelineConfig, ReportFormat,
};
use bilanz::statement::Format;

#[derive(Parser)]
#[command(name = "bilanz", version, about = "Balance-sheet bankruptcy screening")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score, cluster and mine a corpus of statements.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Statement files or directories of them.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<Format>,
    /// Fraction in (0, 1] or an absolute transaction count.
    #[arg(long)]
    min_support: Option<MinSupport>,
    #[arg(long)]
    min_confidence: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, env = "BILANZ_SEED")]
    seed: Option<u64>,
    /// Relative tolerance for the accounting identity.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Use book equity when market value of equity is missing.
    #[arg(long)]
    x4_fallback: bool,
    /// Only mine firm-periods with instances under this class.
    #[arg(long)]
    scope: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated: json, csv.
    #[arg(long, value_parser = parse_report_formats)]
    report: Option<BTreeSet<ReportFormat>>,
    /// merged or per-firm.
    #[arg(long)]
    ontology: Option<OntologyOutput>,
    #[arg(long)]
    top_rules: Option<usize>,
    /// JSON file with the same keys as these flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<PipelineConfig, bilanz::pipeline::PipelineError> {
        let mut config = PipelineConfig::default();
        if let Some(path) = &self.config {
            ConfigFile::load(path)?.apply(&mut config);
        }
        let flags = ConfigFile {
            input: (!self.input.is_empty()).then_some(self.input),
            format: self.format,
            min_support: self.min_support,
            min_confidence: self.min_confidence,
            bins: self.bins,
            k: self.k,
            seed: self.seed,
            tolerance: self.tolerance,
            x4_fallback: self.x4_fallback.then_some(true),
            scope: self.scope,
            out: self.out,
            report: self.report.map(|r| r.into_iter().collect()),
            ontology: self.ontology,
            top_rules: self.top_rules,
        };
        flags.apply(&mut config);
        Ok(config)
    }
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let result = args.into_config().and_then(|config| {
        let output = run(&config)?;
        emit(&output, &config)?;
        Ok(output.report)
    });
    match result {
        Ok(report) => {
            for f in report.unparsed.iter() {
                eprintln!("warning: {}: {}", f.source, f.error);
            }
            for f in report.firms.iter().filter(|f| !f.errors.is_empty()) {
                eprintln!("warning: {}: {}", f.key, f.errors.join("; "));
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
