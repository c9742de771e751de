use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tropitest::io::{self, EmbeddingDump, Manifest, ManifestEntry};
use tropitest::pipeline::{
    self, compute_barcodes, embed_collections, load_collection, test_embeddings, BarcodeParams,
    EmbedParams, InputKind, MaxScale, PipelineConfig,
};
use tropitest::synthgeo::sample_shape;
use tropitest::tropical::MPolicy;
use tropitest::{EssentialPolicy, Error, Result, ShapeSpec, SortedEmbedding};

/// Two-sample tests for collections of point clouds via persistence
/// barcodes and tropical coordinates.
#[derive(Parser)]
#[command(name = "tropitest", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample noisy point clouds from a shape description.
    Synth(SynthArgs),
    /// Compute persistence barcodes of a collection.
    Ph(PhArgs),
    /// Turn barcode collections into sorted tropical embeddings.
    Embed(EmbedArgs),
    /// Permutation test between two embedding dumps.
    Test(TestArgs),
    /// Run every stage from a JSON config.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Shape description {"kind", "parameters", "ambient_dim"}, inline or as a file.
    #[arg(long)]
    spec: String,
    /// Number of clouds.
    #[arg(long)]
    count: usize,
    /// Points per cloud.
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Standard deviation of the Gaussian noise.
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Cloud i is drawn with seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Pointclouds,
    DistanceMatrices,
}

#[derive(Clone, Copy, ValueEnum)]
enum EssentialArg {
    Truncate,
    Drop,
}

#[derive(Clone, Copy, ValueEnum)]
enum MPolicyArg {
    DataDriven,
    Universal,
}

#[derive(Args)]
struct PhArgs {
    /// Manifest file or directory of CSV files.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "pointclouds")]
    kind: KindArg,
    /// Homology dimension.
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Largest simplex dimension; defaults to dim + 1.
    #[arg(long)]
    max_dim: Option<usize>,
    /// `auto` (enclosing radius) or a number.
    #[arg(long, default_value = "auto")]
    max_scale: String,
    #[arg(long, value_enum, default_value = "truncate")]
    essential: EssentialArg,
    /// Output directory for barcode JSON files and their manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    /// Barcode collection (manifest or directory). Repeat together with
    /// --out to embed several collections with a shared n and m.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    /// One output file per --in, in the same order.
    #[arg(long = "out", required = true)]
    outputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "data-driven")]
    m_policy: MPolicyArg,
    /// Explicit m, overriding the policy.
    #[arg(long)]
    m: Option<u64>,
    /// Clip bars violating b <= m*l instead of failing.
    #[arg(long)]
    clip: bool,
    /// Expected homology dimension of the barcodes.
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 999)]
    perms: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result file; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the report path of the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn synth(args: SynthArgs) -> Result<()> {
    let (text, source) = if args.spec.trim_start().starts_with('{') {
        (args.spec.clone(), "--spec".to_string())
    } else {
        (io::read_to_string(Path::new(&args.spec))?, args.spec.clone())
    };
    let spec: ShapeSpec =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{source}: {e}")))?;
    spec.validate()?;
    if args.count == 0 {
        return Err(Error::Parameter("count must be positive".into()));
    }
    io::ensure_dir(&args.out)?;
    let mut manifest = Manifest::default();
    for i in 0..args.count {
        let pc = sample_shape(&spec, args.points, args.noise, args.seed.wrapping_add(i as u64))?;
        let name = format!("cloud_{i:04}.csv");
        io::write_point_cloud_csv(&args.out.join(&name), &pc)?;
        manifest.clouds.push(ManifestEntry {
            path: name,
            label: format!("cloud_{i:04}"),
        });
    }
    manifest.write(&args.out.join(io::MANIFEST_NAME))
}

fn ph(args: PhArgs) -> Result<()> {
    let kind = match args.kind {
        KindArg::Pointclouds => InputKind::Pointclouds,
        KindArg::DistanceMatrices => InputKind::DistanceMatrices,
    };
    let params = BarcodeParams {
        homology_dim: args.dim,
        max_dim: args.max_dim.unwrap_or(args.dim + 1),
        max_scale: args.max_scale.parse::<MaxScale>()?,
        essential_policy: match args.essential {
            EssentialArg::Truncate => EssentialPolicy::Truncate,
            EssentialArg::Drop => EssentialPolicy::Drop,
        },
    };
    let collection = load_collection(&args.input, kind)?;
    let barcodes = compute_barcodes(&collection.objects, &params)?;
    io::ensure_dir(&args.out)?;
    let mut manifest = Manifest::default();
    for (i, (barcode, label)) in barcodes.iter().zip(&collection.labels).enumerate() {
        let name = format!("barcode_{i:04}.json");
        io::write_barcode_json(&args.out.join(&name), barcode)?;
        manifest.clouds.push(ManifestEntry {
            path: name,
            label: label.clone(),
        });
    }
    manifest.write(&args.out.join(io::MANIFEST_NAME))
}

fn embed(args: EmbedArgs) -> Result<()> {
    if args.inputs.len() != args.outputs.len() {
        return Err(Error::Parameter(format!(
            "{} --in but {} --out arguments",
            args.inputs.len(),
            args.outputs.len()
        )));
    }
    let params = BarcodeParams::new(args.dim);
    let collections = args
        .inputs
        .iter()
        .map(|p| compute_barcodes(&load_collection(p, InputKind::Barcodes)?.objects, &params))
        .collect::<Result<Vec<_>>>()?;
    let embedded = embed_collections(
        &collections,
        &EmbedParams {
            m_policy: match args.m_policy {
                MPolicyArg::DataDriven => MPolicy::DataDriven,
                MPolicyArg::Universal => MPolicy::Universal,
            },
            m: args.m,
            clip: args.clip,
        },
    )?;
    for (i, out) in args.outputs.iter().enumerate() {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            io::ensure_dir(parent)?;
        }
        embedded.dump(i).write(out)?;
    }
    eprintln!("n = {}, m = {}, d = {}", embedded.n, embedded.m.get(), embedded.d());
    Ok(())
}

fn read_embeddings(path: &Path) -> Result<Vec<SortedEmbedding>> {
    EmbeddingDump::read(path)?
        .vectors
        .into_iter()
        .map(SortedEmbedding::new)
        .collect::<Result<_>>()
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn test(args: TestArgs) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let a = read_embeddings(&args.a)?;
    let b = read_embeddings(&args.b)?;
    let result = test_embeddings(&a, &b, args.alpha, args.perms, args.seed)?;
    match &args.out {
        Some(out) => io::write_test_result(out, &result)?,
        None => print!(
            "{}",
            io::canonical_json(&serde_json::to_value(&result).expect("serializable"))
        ),
    }
    Ok(())
}

fn run_pipeline(args: PipelineArgs) -> Result<()> {
    let mut config = PipelineConfig::from_file(&args.config)?;
    if let Some(out) = args.out {
        config.out = Some(std::path::absolute(&out).map_err(|e| Error::Io { path: out, source: e })?);
    }
    let report = pipeline::run_pipeline(&config)?;
    if config.out.is_none() {
        print!(
            "{}",
            io::canonical_json(&serde_json::to_value(&report).expect("serializable"))
        );
    }
    let r = &report.result;
    eprintln!(
        "statistic = {:.6e}, critical value = {:.6e}, p = {:.4}, reject = {}",
        r.statistic, r.critical_value, r.p_value, r.reject
    );
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("TROPITEST_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("TROPITEST_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot configure the thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = std::panic::catch_unwind(|| {
        configure_threads()?;
        match cli.command {
            Command::Synth(a) => synth(a),
            Command::Ph(a) => ph(a),
            Command::Embed(a) => embed(a),
            Command::Test(a) => test(a),
            Command::Pipeline(a) => run_pipeline(a),
        }
    });
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
