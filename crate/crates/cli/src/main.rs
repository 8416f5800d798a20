use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use czono::analyzer::{
    analyze, bench, bundled_corpus, check_soundness, parse, AnalysisKind, AnalyzerConfig, CorpusEntry, Precision,
};
use czono::MulMode;

mod report;

#[derive(Parser)]
#[command(name = "czono", version, about = "Constrained zonotope analysis of real-valued programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Float64,
    Rational,
}

#[derive(Clone, Copy, ValueEnum)]
enum MulArg {
    Centered,
    AtZero,
}

#[derive(Subcommand)]
enum Command {
    /// Print the invariant at every program point.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Also print affine forms and noise boxes.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 3)]
        unroll: usize,
        #[arg(long, value_enum, default_value_t = PrecisionArg::Float64)]
        precision: PrecisionArg,
        /// Check the result against N concrete runs.
        #[arg(long, value_name = "N")]
        check: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4096)]
        max_symbols: usize,
        /// Plain interval analysis instead of constrained zonotopes.
        #[arg(long)]
        baseline: bool,
        #[arg(long, value_enum, default_value_t = MulArg::Centered)]
        mul: MulArg,
    },
    /// Compare constrained ranges with the interval baseline on a corpus.
    Bench {
        /// Directory of `.real` programs; the bundled corpus by default.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(1)
    })
}

fn load_dir(dir: &Path) -> Result<Vec<CorpusEntry>, ExitCode> {
    let entries = std::fs::read_dir(dir).map_err(|e| {
        eprintln!("{}: {e}", dir.display());
        ExitCode::from(1)
    })?;
    let mut out = Vec::new();
    for entry in entries.flatten() {
        let path = entry.path();
        if path.extension().is_some_and(|x| x == "real") {
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            out.push(CorpusEntry { name, source: read(&path)? });
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Analyze { file, json, trace, unroll, precision, check, seed, max_symbols, baseline, mul } => {
            let src = read(&file)?;
            let program = parse(&src).map_err(|d| {
                eprintln!("{}:{d}", file.display());
                ExitCode::from(1)
            })?;
            let cfg = AnalyzerConfig {
                kind: if baseline { AnalysisKind::IntervalBaseline } else { AnalysisKind::Constrained },
                unroll,
                max_symbols,
                precision: match precision {
                    PrecisionArg::Float64 => Precision::Float64,
                    PrecisionArg::Rational => Precision::Rational,
                },
                mul_mode: match mul {
                    MulArg::Centered => MulMode::Centered,
                    MulArg::AtZero => MulMode::AtZero,
                },
                seed,
                ..AnalyzerConfig::default()
            };
            let result = analyze(&program, &cfg).map_err(|e| {
                eprintln!("{}: {e}", file.display());
                ExitCode::from(1)
            })?;
            let soundness = check.map(|n| check_soundness(&program, &result, n, seed));
            if json {
                let doc = report::to_json(&result, soundness.as_ref());
                println!("{}", serde_json::to_string_pretty(&doc).expect("report serializes"));
            } else {
                print!("{}", report::to_text(&result, trace));
                if let Some(s) = &soundness {
                    print!("soundness: {s}");
                }
            }
            Ok(match soundness {
                Some(s) if !s.is_sound() => ExitCode::from(2),
                _ => ExitCode::SUCCESS,
            })
        }
        Command::Bench { dir, samples, seed } => {
            let corpus = match dir {
                Some(d) => load_dir(&d)?,
                None => bundled_corpus(),
            };
            let cfg = AnalyzerConfig { samples, seed, ..AnalyzerConfig::default() };
            println!("{:<10} {:<4} {:<24} {:<24} {:<24}", "program", "var", "constrained", "interval", "sampled");
            let mut flagged = 0;
            for (name, row) in bench(&corpus, &cfg) {
                match row {
                    Ok(r) => {
                        flagged += usize::from(r.wider_than_baseline());
                        println!("{r}");
                    }
                    Err(e) => println!("{name:<10} error: {e}"),
                }
            }
            println!("{flagged} rows wider than the interval baseline");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|code| code)
}
