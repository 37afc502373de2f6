//! `svgmres`: run solver variants on generated or Matrix Market systems and
//! write per-cycle convergence histories as CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use svgmres::bench::{run_experiment, ExperimentPreset, MatrixSource, RhsSpec, VariantSpec};
use svgmres::diagnostics::run_identity_suite;
use svgmres::Variant;

#[derive(Parser, Debug)]
#[command(
    name = "svgmres",
    version,
    about = "Augmented restarted GMRES benchmark harness"
)]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve and write the convergence history (the default command).
    Run(RunArgs),
    /// Check the step-length identities on random dense systems.
    LemmaCheck(LemmaArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Built-in preset (identity, example1, example4) or a file-backed one
    /// (example2, example3, table1; these need --matrix).
    #[arg(long)]
    preset: Option<String>,
    /// Matrix Market path, gen:laplacian1d:N, gen:bidiag:N:S or gen:identity:N.
    #[arg(long)]
    matrix: Option<String>,
    /// ones, e1en, or a Matrix Market vector path.
    #[arg(long)]
    rhs: Option<String>,
    #[arg(long)]
    variant: Option<VariantArg>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_cycles: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 when a variant does not converge.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Largest deviation still reported as a pass.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum VariantArg {
    Plain,
    Sv,
    Hr,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Plain => Variant::Plain,
            VariantArg::Sv => Variant::Sv,
            VariantArg::Hr => Variant::Hr,
        }
    }
}

fn build_preset(args: &RunArgs) -> Result<ExperimentPreset> {
    let matrix = args
        .matrix
        .as_deref()
        .map(str::parse::<MatrixSource>)
        .transpose()?;
    let rhs = args.rhs.as_deref().map(str::parse::<RhsSpec>).transpose()?;
    let mut preset = match (&args.preset, &matrix) {
        (Some(name), Some(MatrixSource::File(path)))
            if ExperimentPreset::builtin(name).is_none() =>
        {
            ExperimentPreset::with_matrix_file(
                name,
                path.clone(),
                rhs.clone().unwrap_or(RhsSpec::Ones),
            )
            .with_context(|| format!("unknown preset '{name}'"))?
        }
        (Some(name), _) => ExperimentPreset::builtin(name).with_context(|| {
            format!("unknown preset '{name}' (file-backed presets need --matrix <path>)")
        })?,
        (None, Some(_)) => ExperimentPreset::new(
            "custom",
            MatrixSource::Identity(1),
            RhsSpec::Ones,
            Vec::new(),
        ),
        (None, None) => bail!("either --preset or --matrix is required"),
    };
    if let Some(m) = matrix {
        preset.matrix = m;
    }
    if let Some(r) = rhs {
        preset.rhs = r;
    }
    if args.variant.is_some() || preset.variants.is_empty() {
        let variant: Variant = args.variant.unwrap_or(VariantArg::Sv).into();
        let m = args.m.unwrap_or(20);
        let k = match variant {
            Variant::Plain => 0,
            _ => args.k.unwrap_or(4),
        };
        preset.variants = vec![VariantSpec { variant, m, k }];
    } else if args.m.is_some() || args.k.is_some() {
        bail!("--m and --k apply to a single --variant");
    }
    if let Some(t) = args.tol {
        preset.tol = t;
    }
    if let Some(c) = args.max_cycles {
        preset.max_cycles = c;
    }
    Ok(preset)
}

fn run(args: &RunArgs) -> Result<bool> {
    let preset = build_preset(args)?;
    let outcome = run_experiment(&preset)?;
    match &args.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            outcome.write_csv(BufWriter::new(file))?;
        }
        None => outcome.write_csv(io::stdout().lock())?,
    }
    for r in &outcome.runs {
        let last = r.report.record.last();
        eprintln!(
            "{:<12} {:>4} cycles  {:>6} products  relres {:.3e}  {:?}",
            r.spec.label(),
            last.map_or(0, |e| e.cycle),
            last.map_or(0, |e| e.paper_mvp),
            r.report.final_relres,
            r.report.stop_reason,
        );
    }
    Ok(outcome.all_converged())
}

fn lemma_check(args: &LemmaArgs) -> Result<bool> {
    if args.n == 0 || args.n > 100 {
        bail!("--n must be between 1 and 100");
    }
    let s = run_identity_suite(args.seed, args.n, args.trials)?;
    let mut out = io::stdout().lock();
    for (name, dev) in [
        ("singular-vector step", s.singular_step),
        ("subspace singular-vector step", s.subspace_step),
        ("error gap", s.error_gap),
    ] {
        let verdict = if dev <= args.tol { "pass" } else { "fail" };
        writeln!(
            out,
            "{verdict} {name}: max deviation {dev:.3e} over {} trials",
            s.trials
        )?;
    }
    if s.rejected > 0 {
        writeln!(
            out,
            "({} draws above condition number {:e} were redrawn)",
            s.rejected,
            svgmres::diagnostics::MAX_INSTANCE_CONDITION
        )?;
    }
    Ok(s.passes(args.tol))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, strict) = match &cli.command {
        Some(Command::LemmaCheck(a)) => (lemma_check(a), true),
        Some(Command::Run(a)) => (run(a), a.strict),
        None => (run(&cli.run), cli.run.strict),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if strict => ExitCode::from(2),
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
