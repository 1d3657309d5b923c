//! `plse`: batch front end for deriving, reducing and analysing product-line
//! variability models.
//!
//! Exit codes: 0 success, 1 model or I/O error (including an invalid
//! configuration), 2 usage error, 3 enumeration budget exceeded.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use plse_core::configuration::{enumerate_valid, unconstrained_count, validate_config, DEFAULT_BUDGET};
use plse_core::error::ConfigError;
use plse_core::ingest::{
    parse_configuration, parse_layered_model, parse_trace, parse_variability_model, serialize_trace,
    serialize_variability_model,
};
use plse_core::reduction::{reduce, ReductionTrace};
use plse_core::{derive_initial_vm, ProductLineModel, ReductionReport, RefinementMode, VpId};

#[derive(Parser)]
#[command(name = "plse", version, about = "Derive, reduce and analyse product-line variability models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Derive a variability model from a layered-model document.
    Derive {
        /// Input document (stdin when omitted or `-`).
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Output document (stdout when omitted or `-`).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Only create refinement edges witnessed by an interaction.
        #[arg(long)]
        strict_alg1: bool,
    },
    /// Merge variation points until no further merge applies.
    Reduce {
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the reduction trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare a model before and after reduction.
    Report {
        before: PathBuf,
        after: PathBuf,
        /// Trace of the reduction; inferred by re-reducing when omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Also write the JSON report here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long, env = "PLSE_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Count, enumerate or validate configurations.
    #[command(group(ArgGroup::new("mode").required(true).args(["count", "enumerate", "validate"])))]
    Configs {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        count: bool,
        #[arg(long)]
        enumerate: bool,
        /// Configuration document to check.
        #[arg(long, value_name = "CONFIG")]
        validate: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long, env = "PLSE_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

enum Failure {
    Model(anyhow::Error),
    Budget(String),
    /// Already reported on stdout.
    Rejected,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Model(e)
    }
}

type Outcome = Result<(), Failure>;

fn read_input(path: Option<&Path>) -> anyhow::Result<Vec<u8>> {
    match path {
        Some(p) if p != Path::new("-") => fs::read(p).with_context(|| format!("reading {}", p.display())),
        _ => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf).context("reading stdin")?;
            Ok(buf)
        }
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        _ => io::stdout().write_all(bytes).context("writing stdout"),
    }
}

fn load_model(path: Option<&Path>) -> anyhow::Result<ProductLineModel> {
    let bytes = read_input(path)?;
    let name = path.map_or("<stdin>".into(), |p| p.display().to_string());
    parse_variability_model(&bytes).with_context(|| format!("parsing {name}"))
}

fn vp_ids(plm: &ProductLineModel) -> BTreeSet<&VpId> {
    plm.vm.variation_points.keys().collect()
}

fn cmd_derive(input: Option<&Path>, output: Option<&Path>, strict: bool) -> Outcome {
    let bytes = read_input(input)?;
    let (model, products) = parse_layered_model(&bytes).context("parsing layered model")?;
    let mode = if strict { RefinementMode::InteractionWitnessed } else { RefinementMode::Unconditional };
    let plm = derive_initial_vm(&model, products.as_ref(), mode).context("deriving variability model")?;
    write_output(output, &serialize_variability_model(&plm))?;
    Ok(())
}

fn cmd_reduce(input: Option<&Path>, output: Option<&Path>, trace_path: Option<&Path>) -> Outcome {
    let plm = load_model(input)?;
    let (reduced, trace) = reduce(&plm);
    write_output(output, &serialize_variability_model(&reduced))?;
    if let Some(p) = trace_path {
        fs::write(p, serialize_trace(&trace)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

/// The trace explaining `before -> after`: the given one (checked), none
/// when nothing changed, or the one obtained by reducing `before` again.
fn resolve_trace(before: &ProductLineModel, after: &ProductLineModel, trace: Option<&Path>) -> anyhow::Result<ReductionTrace> {
    let removed = vp_ids(before).len().saturating_sub(vp_ids(after).len());
    if let Some(p) = trace {
        let trace = parse_trace(&read_input(Some(p))?).with_context(|| format!("parsing {}", p.display()))?;
        if trace.merges.len() != removed {
            bail!("trace has {} merges but {removed} variation points were removed", trace.merges.len());
        }
        if let Some(m) = trace.merges.iter().find(|m| after.vm.variation_points.contains_key(&m.target_vp)) {
            bail!("merged variation point `{}` is still present after reduction", m.target_vp);
        }
        return Ok(trace);
    }
    if vp_ids(before) == vp_ids(after) {
        return Ok(ReductionTrace::default());
    }
    let (again, trace) = reduce(before);
    if vp_ids(&again) != vp_ids(after) {
        bail!("`after` is not the reduction of `before`; pass --trace");
    }
    Ok(trace)
}

fn cmd_report(before: &Path, after: &Path, trace: Option<&Path>, output: Option<&Path>, format: Format, budget: u64) -> Outcome {
    let before = load_model(Some(before))?;
    let after = load_model(Some(after))?;
    let trace = resolve_trace(&before, &after, trace)?;
    let report = ReductionReport::new(&before, &after, &trace, budget);
    if let Some(p) = output {
        fs::write(p, report.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    let text = match format {
        Format::Table => report.to_table().into_bytes(),
        Format::Json => report.to_json(),
    };
    write_output(None, &text)?;
    Ok(())
}

fn budget_failure(e: ConfigError) -> Failure {
    match e {
        ConfigError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
        other => Failure::Model(other.into()),
    }
}

fn cmd_configs(input: &Path, count: bool, enumerate: bool, validate: Option<&Path>, format: Format, budget: u64) -> Outcome {
    let plm = load_model(Some(input))?;
    let mut out = String::new();
    if count {
        let total = unconstrained_count(&plm.vm).to_string();
        let valid = enumerate_valid(&plm, budget).map(|v| v.len());
        match (format, &valid) {
            (Format::Table, Ok(n)) => out = format!("{total} unconstrained, {n} valid\n"),
            (Format::Table, Err(_)) => out = format!("{total} unconstrained, valid count over budget\n"),
            (Format::Json, Ok(n)) => out = format!("{{\"unconstrained\": \"{total}\", \"valid\": \"{n}\"}}\n"),
            (Format::Json, Err(_)) => out = format!("{{\"unconstrained\": \"{total}\", \"valid\": null}}\n"),
        }
        write_output(None, out.as_bytes())?;
        return valid.map(|_| ()).map_err(budget_failure);
    }
    if enumerate {
        let all = enumerate_valid(&plm, budget).map_err(budget_failure)?;
        for cfg in &all {
            match format {
                Format::Table => out.push_str(&format!("{cfg}\n")),
                Format::Json => {
                    let ids: Vec<String> = cfg.selection.iter().map(|v| format!("\"{v}\"")).collect();
                    out.push_str(&format!("[{}]\n", ids.join(", ")));
                }
            }
        }
        write_output(None, out.as_bytes())?;
        return Ok(());
    }
    let path = validate.ok_or_else(|| anyhow!("no mode selected"))?;
    let cfg = parse_configuration(&read_input(Some(path))?).with_context(|| format!("parsing {}", path.display()))?;
    let violations = validate_config(&plm, &cfg).map_err(|e| Failure::Model(e.into()))?;
    if violations.is_empty() {
        out.push_str(&format!("{cfg} is valid\n"));
    } else {
        for v in &violations {
            out.push_str(&format!("{v}\n"));
        }
    }
    write_output(None, out.as_bytes())?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Rejected)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Derive { input, output, strict_alg1 } => cmd_derive(input.as_deref(), output.as_deref(), *strict_alg1),
        Command::Reduce { input, output, trace } => cmd_reduce(input.as_deref(), output.as_deref(), trace.as_deref()),
        Command::Report { before, after, trace, output, format, budget } => {
            cmd_report(before, after, trace.as_deref(), output.as_deref(), *format, *budget)
        }
        Command::Configs { input, count, enumerate, validate, format, budget } => {
            cmd_configs(input, *count, *enumerate, validate.as_deref(), *format, *budget)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Model(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Rejected) => ExitCode::from(1),
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
