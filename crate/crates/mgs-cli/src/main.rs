// SPDX-License-Identifier: Apache-2.0

//! `mgs`: generate, reorder, compress and benchmark web-scale graphs.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mgs_cli::bench::{
    self, codec_name, feature_ablation, parse_codec, run_matrix, spread, BenchRow, Dataset,
    OrderingKind, CSV_HEADER, WINDOW_SWEEP,
};
use mgs_cli::files;
use mgs_cli::gen::{generate, GenKind, GenSpec};
use mgs_core::codec::CodecId;
use mgs_core::container::{self, EncodeOptions, GraphReader, Mode};
use mgs_core::graph::{DirectedGraph, Partition};
use mgs_core::kernel::CostModel;
use mgs_core::ordering::ordering_diagnostics;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "mgs", version, about = "Graph compression toolkit")]
struct Cli {
    /// key=value defaults, one per line; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic graph (er, web or lfr).
    Generate(GenerateArgs),
    /// Compute an ordering permutation for an edge list.
    Order(OrderArgs),
    /// Compress an edge list into a graph file.
    Compress(CompressArgs),
    /// Expand a graph file back into an edge list.
    Decompress(IoArgs),
    /// Check that a graph file decodes to the given edge list.
    Verify(VerifyArgs),
    /// Print facts about a graph file.
    Stats(StatsArgs),
    /// Run the ordering-by-codec benchmark matrix.
    Bench(BenchArgs),
    /// Cumulative feature walk on one graph.
    Ablate(AblateArgs),
    /// Compress one graph across the window sweep.
    Sweep(SweepArgs),
}

/// Defaults loaded from --config; a flag given on the command line
/// overrides the config value of the same name.
struct Cfg(BTreeMap<String, String>);

impl Cfg {
    fn load(path: Option<&Path>) -> Result<Self> {
        Ok(Cfg(match path {
            Some(p) => files::read_config(p)?,
            None => BTreeMap::new(),
        }))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => match raw.parse() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key {key}={raw}: {e}"),
            },
        }
    }
}

fn pick<T: FromStr>(flag: Option<T>, cfg: &Cfg, key: &str, default: T) -> Result<T>
where
    T::Err: Display,
{
    Ok(flag.or(cfg.get(key)?).unwrap_or(default))
}

fn pick_opt<T: FromStr>(flag: Option<T>, cfg: &Cfg, key: &str) -> Result<Option<T>>
where
    T::Err: Display,
{
    Ok(flag.or(cfg.get(key)?))
}

fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "children" => Ok(Mode::Children),
        "index" => Ok(Mode::Index),
        _ => bail!("unknown mode {s:?} (children, index)"),
    }
}

fn parse_cost_model(s: &str) -> Result<CostModel> {
    match s {
        "exact" => Ok(CostModel::Exact),
        "fast" => Ok(CostModel::Fast),
        _ => bail!("unknown cost model {s:?} (exact, fast)"),
    }
}

fn parse_family(s: &str) -> Result<mgs_core::bits::CodeFamily> {
    match s {
        "fibonacci" | "fib" => Ok(mgs_core::bits::CodeFamily::Fibonacci),
        "zeta3" => Ok(mgs_core::bits::CodeFamily::Zeta(3)),
        _ => bail!("unknown code family {s:?} (fibonacci, zeta3)"),
    }
}

/// Synthetic dataset specs: er:N:P, web:N:AVG, lfr:N:AVG:MU.
fn parse_synthetic(s: &str) -> Result<GenKind> {
    let parts: Vec<&str> = s.split(':').collect();
    let need = |i: usize| -> Result<&str> {
        parts.get(i).copied().with_context(|| format!("spec {s:?} is missing field {i}"))
    };
    match parts[0] {
        "er" => Ok(GenKind::Er { n: need(1)?.parse()?, p: need(2)?.parse()? }),
        "web" => Ok(GenKind::web(need(1)?.parse()?, need(2)?.parse()?)),
        "lfr" => Ok(GenKind::lfr(need(1)?.parse()?, need(2)?.parse()?, need(3)?.parse()?)),
        other => bail!("unknown synthetic kind {other:?} (er, web, lfr)"),
    }
}

fn load_input(
    input: Option<&Path>,
    synthetic: Option<&str>,
    seed: u64,
) -> Result<(String, DirectedGraph, bool)> {
    match (input, synthetic) {
        (Some(path), None) => {
            let g = files::read_graph(path)?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("input").to_string();
            Ok((name, g, false))
        }
        (None, Some(spec)) => {
            let kind = parse_synthetic(spec)?;
            let gend = generate(&GenSpec { kind, seed })?;
            Ok((spec.replace(':', "_"), gend.graph, true))
        }
        _ => bail!("give exactly one of --input and --synthetic"),
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// er, web or lfr.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: Option<u32>,
    /// Edge probability (er).
    #[arg(long)]
    p: Option<f64>,
    /// Mean outdegree (web, lfr).
    #[arg(long)]
    avg_deg: Option<f64>,
    /// Degree cap (lfr).
    #[arg(long)]
    max_deg: Option<u32>,
    /// Outdegree power-law exponent (web, lfr).
    #[arg(long)]
    deg_exponent: Option<f64>,
    /// Community size power-law exponent (lfr).
    #[arg(long)]
    community_exponent: Option<f64>,
    /// Inter-community mixing fraction (lfr).
    #[arg(long)]
    mu: Option<f64>,
    /// Local link window (web).
    #[arg(long)]
    locality_width: Option<u32>,
    /// Fraction of global links (web).
    #[arg(long)]
    long_link_frac: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the planted communities (lfr only).
    #[arg(long)]
    communities_out: Option<PathBuf>,
}

fn cmd_generate(a: GenerateArgs, cfg: &Cfg) -> Result<()> {
    let n = pick_opt(a.n, cfg, "n")?.context("--n is required")?;
    let seed = pick(a.seed, cfg, "seed", 0)?;
    let kind = match a.kind.as_str() {
        "er" => GenKind::Er {
            n,
            p: pick_opt(a.p, cfg, "p")?.context("er needs --p")?,
        },
        "web" => GenKind::Web {
            n,
            avg_deg: pick(a.avg_deg, cfg, "avg_deg", 8.0)?,
            locality_width: pick(a.locality_width, cfg, "locality_width", 200)?,
            long_link_frac: pick(a.long_link_frac, cfg, "long_link_frac", 0.1)?,
            deg_exponent: pick(a.deg_exponent, cfg, "deg_exponent", 2.2)?,
        },
        "lfr" => GenKind::Lfr {
            n,
            avg_deg: pick(a.avg_deg, cfg, "avg_deg", 15.0)?,
            max_deg: pick(a.max_deg, cfg, "max_deg", 50)?,
            deg_exponent: pick(a.deg_exponent, cfg, "deg_exponent", 2.5)?,
            community_exponent: pick(a.community_exponent, cfg, "community_exponent", 1.5)?,
            mu: pick_opt(a.mu, cfg, "mu")?.context("lfr needs --mu")?,
        },
        other => bail!("unknown kind {other:?} (er, web, lfr)"),
    };
    let gend = generate(&GenSpec { kind, seed })?;
    files::write_graph(&a.out, &gend.graph)?;
    if let Some(path) = &a.communities_out {
        let part = gend.communities.as_ref().context("only lfr has planted communities")?;
        files::write_communities(path, part)?;
    }
    println!(
        "generated n={} m={} -> {}",
        gend.graph.vertex_count(),
        gend.graph.edge_count(),
        a.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct OrderArgs {
    #[arg(long)]
    input: PathBuf,
    /// original, llp or leiden_llp.
    #[arg(long)]
    ordering: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Window for the gap diagnostics printed after ordering.
    #[arg(long)]
    window: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_order(a: OrderArgs, cfg: &Cfg) -> Result<()> {
    let g = files::read_graph(&a.input)?;
    let seed = pick(a.seed, cfg, "seed", 0)?;
    let window = pick(a.window, cfg, "window", 64)?;
    let kind = OrderingKind::parse(&pick(a.ordering, cfg, "ordering", "leiden_llp".into())?)?;
    let ds = Dataset { name: String::new(), graph: g, synthetic: true, seed };
    let perm = bench::permutation_for(&ds, kind);
    files::write_permutation(&a.out, &perm)?;
    let report = ordering_diagnostics(&ds.graph, &perm, window);
    println!(
        "ordering={} gap_entropy={:.4} unit_gap_fraction={:.4} -> {}",
        kind.as_str(),
        report.gap_entropy,
        report.unit_gap_fraction,
        a.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// bv, bg, cs or cg.
    #[arg(long)]
    codec: Option<String>,
    #[arg(long)]
    window: Option<u32>,
    /// children or index.
    #[arg(long)]
    mode: Option<String>,
    /// Index sampling stride.
    #[arg(long)]
    stride: Option<u32>,
    /// CG cluster count; vertices split into contiguous equal runs.
    #[arg(long)]
    clusters: Option<u32>,
    /// Explicit CG communities file ("vertex cluster" lines).
    #[arg(long)]
    communities: Option<PathBuf>,
    /// exact or fast.
    #[arg(long)]
    cost_model: Option<String>,
    /// fibonacci or zeta3.
    #[arg(long)]
    family: Option<String>,
    /// Relabel the graph by this permutation before compressing.
    #[arg(long)]
    order_file: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn cmd_compress(a: CompressArgs, cfg: &Cfg) -> Result<()> {
    let g = files::read_graph(&a.input)?;
    let g = match &a.order_file {
        Some(p) => g.apply_permutation(&files::read_permutation(p, g.vertex_count())?)?,
        None => g,
    };
    let codec = parse_codec(&pick(a.codec, cfg, "codec", "bg".into())?)?;
    let opts = EncodeOptions {
        codec,
        window: pick(a.window, cfg, "window", 64)?,
        family: parse_family(&pick(a.family, cfg, "family", "fibonacci".into())?)?,
        mode: parse_mode(&pick(a.mode, cfg, "mode", "children".into())?)?,
        stride: pick(a.stride, cfg, "stride", 64)?,
        cost_model: parse_cost_model(&pick(a.cost_model, cfg, "cost_model", "exact".into())?)?,
    };
    let part = cg_partition(&a.communities, a.clusters, cfg, &g, codec)?;
    let bytes = container::compress(&g, &opts, part.as_ref())?;
    fs::write(&a.out, &bytes).with_context(|| format!("writing {}", a.out.display()))?;
    let m = g.edge_count();
    println!(
        "compressed n={} m={} bytes={} bpe={:.4} -> {}",
        g.vertex_count(),
        m,
        bytes.len(),
        container::bpe(bytes.len(), m.max(1))?,
        a.out.display()
    );
    Ok(())
}

/// CG cluster layout: an explicit communities file wins, then --clusters K
/// as contiguous equal runs, then the codec default (one cluster).
fn cg_partition(
    communities: &Option<PathBuf>,
    clusters: Option<u32>,
    cfg: &Cfg,
    g: &DirectedGraph,
    codec: CodecId,
) -> Result<Option<Partition>> {
    if codec != CodecId::Cg {
        return Ok(None);
    }
    if let Some(path) = communities {
        return Ok(Some(files::read_communities(path, g.vertex_count())?));
    }
    let n = g.vertex_count();
    Ok(match pick_opt(clusters, cfg, "clusters")? {
        Some(k) => {
            if k == 0 || k > n.max(1) {
                bail!("--clusters must be in 1..=n");
            }
            Some(bench::chunk_partition(n, n.div_ceil(k)))
        }
        None => None,
    })
}

#[derive(Args)]
struct IoArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_decompress(a: IoArgs) -> Result<()> {
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let g = container::decompress(&bytes)?;
    files::write_graph(&a.out, &g)?;
    println!("decompressed n={} m={} -> {}", g.vertex_count(), g.edge_count(), a.out.display());
    Ok(())
}

#[derive(Args)]
struct VerifyArgs {
    /// The original edge list.
    #[arg(long)]
    original: PathBuf,
    /// The graph file to check.
    #[arg(long)]
    compressed: PathBuf,
    /// Permutation applied when the file was compressed.
    #[arg(long)]
    order_file: Option<PathBuf>,
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let g = files::read_graph(&a.original)?;
    let g = match &a.order_file {
        Some(p) => g.apply_permutation(&files::read_permutation(p, g.vertex_count())?)?,
        None => g,
    };
    let bytes =
        fs::read(&a.compressed).with_context(|| format!("reading {}", a.compressed.display()))?;
    let back = container::decompress(&bytes)?;
    if back == g {
        println!("verified n={} m={}", g.vertex_count(), g.edge_count());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("verification failed: decoded graph differs from the input");
        Ok(ExitCode::FAILURE)
    }
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let reader = GraphReader::open(&bytes)?;
    let lists = reader.decode_all()?;
    let m: u64 = lists.iter().map(|l| l.len() as u64).sum();
    println!("codec: {}", codec_name(reader.codec()));
    println!("family: {:?}", reader.family());
    println!("window: {}", reader.window());
    println!("vertices: {}", reader.vertex_count());
    println!("edges: {m}");
    println!("bytes: {}", bytes.len());
    if m > 0 {
        println!("bpe: {:.4}", container::bpe(bytes.len(), m)?);
    }
    println!("indexed: {}", reader.is_indexed());
    if reader.is_indexed() {
        println!("index_samples: {}", reader.sample_entries());
    }
    let sizes = reader.cluster_sizes();
    if !sizes.is_empty() {
        println!("clusters: {}", sizes.len());
    }
    Ok(())
}

#[derive(Args)]
struct BenchArgs {
    /// CSV output path for the matrix rows.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated window list.
    #[arg(long)]
    windows: Option<String>,
    /// Comma-separated codec list.
    #[arg(long)]
    codecs: Option<String>,
    /// Vertex count per synthetic dataset.
    #[arg(long)]
    n: Option<u32>,
    /// Extra edge-list datasets.
    #[arg(long)]
    input: Vec<PathBuf>,
}

fn standard_corpus(n: u32, seed: u64) -> Result<Vec<Dataset>> {
    let p = 0.005;
    let mut out = Vec::new();
    let mut push = |name: String, kind: GenKind| -> Result<()> {
        let gend = generate(&GenSpec { kind, seed })?;
        out.push(Dataset { name, graph: gend.graph, synthetic: true, seed });
        Ok(())
    };
    push(format!("er_{n}"), GenKind::Er { n, p })?;
    push(format!("web_{n}"), GenKind::web(n, 8.0))?;
    for mu in [0.1, 0.5, 0.9] {
        push(format!("lfr_{n}_mu{mu}"), GenKind::lfr(n, 15.0, mu))?;
    }
    Ok(out)
}

fn cmd_bench(a: BenchArgs, cfg: &Cfg) -> Result<()> {
    let seed = pick(a.seed, cfg, "seed", 0)?;
    let n = pick(a.n, cfg, "n", 10_000)?;
    let windows = match pick_opt(a.windows, cfg, "windows")? {
        Some(s) => parse_list::<u32>(&s)?,
        None => vec![8, 64],
    };
    let codecs = match pick_opt(a.codecs, cfg, "codecs")? {
        Some(s) => s.split(',').map(parse_codec).collect::<Result<Vec<_>>>()?,
        None => vec![CodecId::BvBaseline, CodecId::Bg, CodecId::Cs, CodecId::Cg],
    };
    let mut datasets = standard_corpus(n, seed)?;
    for path in &a.input {
        let g = files::read_graph(path)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("input").to_string();
        datasets.push(Dataset { name, graph: g, synthetic: false, seed });
    }
    let (rows, deltas) = run_matrix(&datasets, &codecs, &windows)?;
    write_rows(&a.out, &rows)?;
    for d in &deltas {
        println!("transfer dataset={} codec={} w={} delta_bpe={:+.4}", d.dataset, d.codec, d.window, d.delta);
    }
    let kernel = ["bg", "cs", "cg"];
    for ds in &datasets {
        for &w in &windows {
            let subset: Vec<&_> = deltas
                .iter()
                .filter(|d| d.dataset == ds.name && d.window == w && kernel.contains(&d.codec.as_str()))
                .collect();
            if subset.len() == kernel.len() {
                println!("spread dataset={} w={} bpe={:.4}", ds.name, w, spread(&subset));
            }
        }
    }
    println!("wrote {} rows -> {}", rows.len(), a.out.display());
    Ok(())
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    s.split(',')
        .map(|x| x.trim().parse().map_err(|e| anyhow::anyhow!("bad list item {x:?}: {e}")))
        .collect()
}

fn write_rows(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// er:N:P, web:N:AVG or lfr:N:AVG:MU; default web:10000:8.
    #[arg(long)]
    synthetic: Option<String>,
    /// Ordering applied before the walk.
    #[arg(long)]
    ordering: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Optional CSV output (step,bpe,delta).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_ablate(a: AblateArgs, cfg: &Cfg) -> Result<()> {
    let seed = pick(a.seed, cfg, "seed", 0)?;
    let synthetic = a.synthetic.or(if a.input.is_none() { Some("web:10000:8".into()) } else { None });
    let (name, g, synth) = load_input(a.input.as_deref(), synthetic.as_deref(), seed)?;
    let kind = OrderingKind::parse(&pick(a.ordering, cfg, "ordering", "leiden_llp".into())?)?;
    let ds = Dataset { name, graph: g, synthetic: synth, seed };
    let h = ds.graph.apply_permutation(&bench::permutation_for(&ds, kind))?;
    let steps = feature_ablation(&h)?;
    let mut csv = String::from("step,bpe,delta\n");
    println!("{:<28} {:>8} {:>8}", "step", "bpe", "delta");
    for s in &steps {
        println!("{:<28} {:>8.4} {:>+8.4}", s.name, s.bpe, s.delta);
        csv.push_str(&format!("{},{:.4},{:.4}\n", s.name, s.bpe, s.delta));
    }
    if let Some(path) = &a.out {
        fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// er:N:P, web:N:AVG or lfr:N:AVG:MU.
    #[arg(long)]
    synthetic: Option<String>,
    #[arg(long)]
    ordering: Option<String>,
    /// Comma-separated codec list.
    #[arg(long)]
    codecs: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn cmd_sweep(a: SweepArgs, cfg: &Cfg) -> Result<()> {
    let seed = pick(a.seed, cfg, "seed", 0)?;
    let (name, g, synth) = load_input(a.input.as_deref(), a.synthetic.as_deref(), seed)?;
    let codecs = match pick_opt(a.codecs, cfg, "codecs")? {
        Some(s) => s.split(',').map(parse_codec).collect::<Result<Vec<_>>>()?,
        None => vec![CodecId::Bg],
    };
    let kind = OrderingKind::parse(&pick(a.ordering, cfg, "ordering", "leiden_llp".into())?)?;
    let ds = Dataset { name, graph: g, synthetic: synth, seed };
    let h = ds.graph.apply_permutation(&bench::permutation_for(&ds, kind))?;
    let mut rows = Vec::new();
    for &codec in &codecs {
        for w in WINDOW_SWEEP {
            let (bpe, enc, dec) = bench::measure_cell(&h, codec, w, None)?;
            rows.push(BenchRow {
                dataset: ds.name.clone(),
                ordering: kind.as_str().to_string(),
                codec: codec_name(codec).to_string(),
                params: format!("w={w}"),
                bpe,
                encode_us_per_edge: enc,
                decode_us_per_edge: dec,
            });
        }
    }
    write_rows(&a.out, &rows)?;
    println!("wrote {} rows -> {}", rows.len(), a.out.display());
    Ok(())
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    let cfg = Cfg::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a, &cfg).map(|()| ExitCode::SUCCESS),
        Cmd::Order(a) => cmd_order(a, &cfg).map(|()| ExitCode::SUCCESS),
        Cmd::Compress(a) => cmd_compress(a, &cfg).map(|()| ExitCode::SUCCESS),
        Cmd::Decompress(a) => cmd_decompress(a).map(|()| ExitCode::SUCCESS),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Stats(a) => cmd_stats(a).map(|()| ExitCode::SUCCESS),
        Cmd::Bench(a) => cmd_bench(a, &cfg).map(|()| ExitCode::SUCCESS),
        Cmd::Ablate(a) => cmd_ablate(a, &cfg).map(|()| ExitCode::SUCCESS),
        Cmd::Sweep(a) => cmd_sweep(a, &cfg).map(|()| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
