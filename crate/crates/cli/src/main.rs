use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rex_core::bench::{run_bench, sample_pairs, BenchStrategy};
use rex_core::doc::{explanation_doc, ranked_docs};
use rex_core::enumerate::{general_enum, EnumOptions, EnumStrategy, DEFAULT_MAX_EXPLANATIONS};
use rex_core::gen::{generate, DegreeShape, GenSpec};
use rex_core::kb::{EntityId, KnowledgeBase};
use rex_core::measures::{Aggregate, MeasureId};
use rex_core::pattern::{canonical_form, match_instances, Explanation, Var, DEFAULT_MAX_VARS};
use rex_core::rank::{dcg_score, rank, RankConfig, RelevanceLabels};

#[derive(Parser)]
#[command(name = "rex", version, about = "Explain how two entities of a knowledge graph are related")]
struct Cli {
    /// Worker threads for merges and global distributions (1 = sequential).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the explanations of a pair.
    Explain(ExplainArgs),
    /// List every minimal explanation of a pair.
    Enumerate(EnumerateArgs),
    /// Write a synthetic knowledge base.
    Gen(GenArgs),
    /// Time enumeration strategies on sampled pairs and print CSV.
    Bench(BenchArgs),
    /// Score a relevance label file.
    Eval(EvalArgs),
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    kb: PathBuf,
    #[arg(long)]
    start: String,
    #[arg(long)]
    end: String,
    /// Pattern size limit in variables.
    #[arg(long, default_value_t = 5)]
    max_size: usize,
    #[arg(long, default_value = "prioritized+prune")]
    strategy: EnumStrategy,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value = "size+local-dist")]
    measure: MeasureId,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Prune during ranking (default: whenever the measure allows it).
    #[arg(long, overrides_with = "no_prune")]
    prune: bool,
    #[arg(long, overrides_with = "prune")]
    no_prune: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Example instances shown per explanation.
    #[arg(long, default_value_t = 3)]
    instances: usize,
    /// Start entities sampled for the global distribution.
    #[arg(long, default_value_t = 100)]
    sample_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Aggregate behind the distributional measures.
    #[arg(long, default_value = "count")]
    aggregate: Aggregate,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Re-check every explanation against direct matching and minimality.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = 3)]
    instances: usize,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1000)]
    nodes: usize,
    #[arg(long, default_value_t = 8)]
    labels: usize,
    #[arg(long, default_value_t = 0.25)]
    undirected_fraction: f64,
    #[arg(long, default_value_t = 6.0)]
    avg_degree: f64,
    /// `uniform` or `power-law:EXP`.
    #[arg(long, default_value = "power-law:2.5")]
    shape: DegreeShape,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    kb: PathBuf,
    #[arg(long, default_value_t = 10)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated: `naive-enum` and/or `path+union` combinations.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "naive+basic,naive+prune,basic+basic,basic+prune,prioritized+basic,prioritized+prune"
    )]
    strategies: Vec<BenchStrategy>,
    #[arg(long, default_value_t = 5)]
    max_size: usize,
    /// Per-run budget in seconds; naive runs over budget are skipped.
    #[arg(long)]
    budget_secs: Option<u64>,
    /// CSV file (stdout if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Ten lines, one relevance label (0, 1 or 2) each.
    #[arg(long)]
    labels: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads == 0 {
        bail!("--threads must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("configuring the thread pool")?;
    let opts = enum_options(cli.threads > 1)?;
    match cli.command {
        Command::Explain(args) => explain(args, opts),
        Command::Enumerate(args) => enumerate(args, opts),
        Command::Gen(args) => gen(args),
        Command::Bench(args) => bench(args, opts),
        Command::Eval(args) => eval(args),
    }
}

fn enum_options(parallel: bool) -> Result<EnumOptions> {
    let max_explanations = match std::env::var("REX_MAX_EXPLANATIONS") {
        Ok(v) => v
            .parse()
            .with_context(|| format!("REX_MAX_EXPLANATIONS=`{v}` is not a count"))?,
        Err(_) => DEFAULT_MAX_EXPLANATIONS,
    };
    Ok(EnumOptions {
        max_explanations,
        parallel,
        ..EnumOptions::default()
    })
}

fn load_pair(args: &PairArgs) -> Result<(KnowledgeBase, EntityId, EntityId)> {
    let kb = KnowledgeBase::load(&args.kb)?;
    let start = kb.resolve(&args.start)?;
    let end = kb.resolve(&args.end)?;
    if start == end {
        bail!("start and end must be different entities");
    }
    Ok((kb, start, end))
}

fn explain(args: ExplainArgs, opts: EnumOptions) -> Result<()> {
    let prune = if args.no_prune {
        false
    } else if args.prune {
        if !args.measure.supports_pruning() {
            bail!("--prune cannot be used with measure `{}`", args.measure);
        }
        true
    } else {
        args.measure.supports_pruning()
    };
    let (kb, start, end) = load_pair(&args.pair)?;
    let cfg = RankConfig {
        n: args.pair.max_size,
        k: args.k,
        measure: args.measure,
        strategy: args.pair.strategy,
        prune,
        aggregate: args.aggregate,
        sample_size: args.sample_size,
        seed: args.seed,
        enum_options: opts,
    };
    let result = rank(&kb, start, end, &cfg)?;
    let mut out = io::stdout().lock();
    match args.format {
        Format::Structured => {
            serde_json::to_writer_pretty(&mut out, &ranked_docs(&kb, &result.entries, args.instances))?;
            writeln!(out)?;
        }
        Format::Text => {
            if result.entries.is_empty() {
                writeln!(out, "no explanation connects {} and {}", args.pair.start, args.pair.end)?;
            }
            for (i, e) in result.entries.iter().enumerate() {
                writeln!(out, "{:>3}. score {}", i + 1, e.score)?;
                write_explanation(&mut out, &kb, &e.explanation, args.instances)?;
            }
        }
    }
    Ok(())
}

fn write_explanation(out: &mut impl Write, kb: &KnowledgeBase, re: &Explanation, instances: usize) -> Result<()> {
    writeln!(
        out,
        "     {}  [size {}, count {}, level {}]",
        re.pattern.describe(kb),
        re.pattern.num_vars(),
        re.count(),
        re.level
    )?;
    for inst in re.instances.iter().take(instances) {
        let bindings: Vec<String> = re
            .pattern
            .non_targets()
            .map(|v: Var| format!("{v}={}", kb.name(inst.get(v))))
            .collect();
        if !bindings.is_empty() {
            writeln!(out, "       e.g. {}", bindings.join(", "))?;
        }
    }
    Ok(())
}

fn enumerate(args: EnumerateArgs, opts: EnumOptions) -> Result<()> {
    let (kb, start, end) = load_pair(&args.pair)?;
    let out = general_enum(&kb, start, end, args.pair.max_size, args.pair.strategy, &opts)?;
    let mut explanations = out.explanations;
    explanations.sort_by_cached_key(|e| {
        (
            e.pattern.num_vars(),
            e.pattern.edges().len(),
            canonical_form(&e.pattern, e.pattern.num_vars().max(DEFAULT_MAX_VARS)).ok(),
        )
    });
    if args.verify {
        for e in &explanations {
            if !e.pattern.is_minimal() {
                bail!("not minimal: {}", e.pattern.describe(&kb));
            }
            if match_instances(&kb, &e.pattern, start, end)? != e.instances {
                bail!("instance set differs from direct matching: {}", e.pattern.describe(&kb));
            }
        }
    }
    let mut w = io::stdout().lock();
    match args.format {
        Format::Structured => {
            let docs: Vec<_> = explanations
                .iter()
                .map(|e| explanation_doc(&kb, e, args.instances))
                .collect();
            serde_json::to_writer_pretty(&mut w, &docs)?;
            writeln!(w)?;
        }
        Format::Text => {
            writeln!(w, "{} minimal explanations", explanations.len())?;
            for e in &explanations {
                write_explanation(&mut w, &kb, e, args.instances)?;
            }
            if args.verify {
                writeln!(w, "verified {} explanations", explanations.len())?;
            }
        }
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = GenSpec {
        nodes: args.nodes,
        labels: args.labels,
        undirected_fraction: args.undirected_fraction,
        avg_degree: args.avg_degree,
        shape: args.shape,
        seed: args.seed,
    };
    let text = generate(&spec)?;
    match args.output {
        Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn bench(args: BenchArgs, mut opts: EnumOptions) -> Result<()> {
    let kb = KnowledgeBase::load(&args.kb)?;
    opts.time_budget = args.budget_secs.map(Duration::from_secs);
    let pairs = sample_pairs(&kb, args.pairs, args.seed);
    let rows = run_bench(&kb, &pairs, &args.strategies, args.max_size, &opts)?;
    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut csv = csv::Writer::from_writer(sink);
    if rows.is_empty() {
        csv.write_record(["pair", "class", "strategy", "wall_ms", "paths", "merges", "explanations", "duplicates"])?;
    }
    for row in &rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let text = fs::read_to_string(&args.labels).with_context(|| format!("reading {}", args.labels.display()))?;
    let labels = RelevanceLabels::parse(&text)?;
    println!("{:.3}", dcg_score(&labels));
    Ok(())
}
