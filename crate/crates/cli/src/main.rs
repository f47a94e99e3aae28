//! `cogk`: run, check, format and inspect cognitive models.
//!
//! Exit status is 0 on success, 1 when the input has diagnostics and 2
//! when a run fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cogkernel::dsl::{self, diag, parse_env, EnvScript};
use cogkernel::runtime::{trace, Runtime};
use cogkernel::Mode;

#[derive(Parser)]
#[command(name = "cogk", version, about = "Dual-mode cognitive kernel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Actr,
    Soar,
}

#[derive(Subcommand)]
enum Command {
    /// Run a model and optionally write its trace.
    Run {
        model: PathBuf,
        /// Environment script; defaults to the model's `env` file.
        #[arg(long)]
        env: Option<PathBuf>,
        /// Must agree with the mode the model declares.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_cycles: Option<u64>,
        /// Trace output (JSON Lines).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Declarative store to load before the run.
        #[arg(long)]
        dm_in: Option<PathBuf>,
        /// Where to save the declarative store after the run.
        #[arg(long)]
        dm_out: Option<PathBuf>,
    },
    /// Check a model and print its diagnostics.
    Validate { model: PathBuf },
    /// Print a model in canonical form.
    Fmt { model: PathBuf },
    /// Show working memory and events at one cycle of a trace.
    Inspect {
        trace: PathBuf,
        #[arg(long)]
        cycle: u64,
    },
}

enum Failure {
    Input(String),
    Run(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Run(_) => 2,
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn report(file: &Path, diags: &[diag::Diagnostic]) {
    let mut diags = diags.to_vec();
    diag::sort(&mut diags);
    for d in &diags {
        eprintln!("{}", d.render(&file.display().to_string()));
    }
}

fn load_env(path: &Path) -> Result<EnvScript, Failure> {
    let src = read(path)?;
    parse_env(&src).map_err(|diags| {
        report(path, &diags);
        Failure::Input(format!("{}: invalid environment script", path.display()))
    })
}

#[allow(clippy::too_many_arguments)]
fn run(
    model_path: &Path,
    env: Option<PathBuf>,
    mode: Option<ModeArg>,
    seed: Option<u64>,
    max_cycles: Option<u64>,
    trace_out: Option<PathBuf>,
    dm_in: Option<PathBuf>,
    dm_out: Option<PathBuf>,
) -> Result<(), Failure> {
    let src = read(model_path)?;
    let (model, diags) = dsl::load(&src);
    report(model_path, &diags);
    let Some(mut model) = model else {
        return Err(Failure::Input(format!("{}: model has errors", model_path.display())));
    };
    if let Some(m) = mode {
        let want = match m {
            ModeArg::Actr => Mode::Actr,
            ModeArg::Soar => Mode::Soar,
        };
        if want != model.mode {
            return Err(Failure::Input(format!(
                "{}: model declares mode {}, not {}",
                model_path.display(),
                model.mode.word(),
                want.word()
            )));
        }
    }
    if let Some(s) = seed {
        model.config.seed = s;
    }
    if let Some(n) = max_cycles {
        model.config.max_cycles = n;
    }
    let env_path = env.or_else(|| {
        model.env.as_ref().map(|e| model_path.parent().unwrap_or(Path::new(".")).join(e))
    });
    let env = env_path.as_deref().map(load_env).transpose()?;

    let mut rt = Runtime::new(&model, env).map_err(|e| Failure::Run(e.to_string()))?;
    if let Some(p) = &dm_in {
        rt.load_dm(p).map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?;
    }
    let result = rt.run();
    if let Some(p) = &trace_out {
        std::fs::write(p, rt.trace_jsonl()).map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?;
    }
    let summary = result.map_err(|e| Failure::Run(format!("cycle {}: {e}", rt.cycle() + 1)))?;
    if let Some(p) = &dm_out {
        rt.save_dm(p).map_err(|e| Failure::Run(format!("{}: {e}", p.display())))?;
    }
    println!("{} cycles, {} ms, stopped by {:?}", summary.cycles, summary.time_ms, summary.reason);
    Ok(())
}

fn validate(path: &Path) -> Result<(), Failure> {
    let src = read(path)?;
    let (model, diags) = dsl::load(&src);
    report(path, &diags);
    match model {
        Some(_) => {
            println!("{}: ok", path.display());
            Ok(())
        }
        None => Err(Failure::Input(format!("{}: model has errors", path.display()))),
    }
}

fn fmt(path: &Path) -> Result<(), Failure> {
    let src = read(path)?;
    let (ast, diags) = dsl::parse(&src);
    if diag::has_errors(&diags) {
        report(path, &diags);
        return Err(Failure::Input(format!("{}: cannot format a file with syntax errors", path.display())));
    }
    print!("{}", dsl::print_model(&ast));
    Ok(())
}

fn inspect(path: &Path, cycle: u64) -> Result<(), Failure> {
    let text = read(path)?;
    let records = trace::from_jsonl(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let Some((wm, r)) = trace::replay_to(&records, cycle) else {
        return Err(Failure::Input(format!("{}: no record for cycle {cycle}", path.display())));
    };
    println!("cycle {} at {} ms ({})", r.cycle, r.time_ms, r.phase);
    for f in &r.fired {
        let b: Vec<String> = f.bindings.iter().map(|(k, v)| format!("?{k}={v}")).collect();
        println!("fired {} {}", f.production, b.join(" "));
    }
    for i in &r.impasses {
        println!("impasse {} {} {} [{}]", i.event, i.kind, i.state, i.candidates.join(" "));
    }
    for e in &r.retrievals {
        println!("{} {} {} {}", e.event, e.kind, e.buffer, e.result.as_deref().unwrap_or("-"));
    }
    for l in &r.learning {
        println!("learn {} {}", l.kind, l.rule);
    }
    for (name, b) in &r.buffers {
        println!("buffer {name} {}", b.status);
    }
    println!("working memory ({} elements)", wm.len());
    for t in wm {
        println!("  {t}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { model, env, mode, seed, max_cycles, trace, dm_in, dm_out } => {
            run(&model, env, mode, seed, max_cycles, trace, dm_in, dm_out)
        }
        Command::Validate { model } => validate(&model),
        Command::Fmt { model } => fmt(&model),
        Command::Inspect { trace, cycle } => inspect(&trace, cycle),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(m) | Failure::Run(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
