//! `gridposet`: command-line front end. Every invocation prints one JSON
//! document with sorted keys; big integers and rationals are strings.

mod cache;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

use gridposet::chains::{balanced_partition, balanced_window, scd, verify_partition, PartitionCertificate};
use gridposet::extremal::{
    is_p_free, max_l_chain_free, max_p_free_with, pipeline_bound_with, BoundCertificate, CapMode,
    DEFAULT_FREE_BUDGET,
};
use gridposet::grid::{level_profile, theta_ratio, width_grid, GridShape, Subset, SubsetFile};
use gridposet::lubell::{claim1_construct, claim2_blocks, conjecture_ratio, lubell_mass, Ratio};
use gridposet::patterns::{
    contains_pattern, extremal_weight_with, is_permutation_pattern, is_strict_permutation_pattern,
    poset_to_pattern, Pattern, PatternFile, DEFAULT_EXTREMAL_BUDGET,
};
use gridposet::poset::{dimension_with_budget, Poset, PosetFile, DEFAULT_DIMENSION_BUDGET};
use gridposet::{Error, Exec};

use cache::{cache_key, Cache};

const EXIT_DOMAIN: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "gridposet", version, about = "Exact invariants and searches for grid posets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Append-only result cache for long searches.
    #[arg(long, global = true, env = "GRIDPOSET_CACHE")]
    cache_file: Option<PathBuf>,
    /// Human-readable output instead of one compact JSON line.
    #[arg(long, global = true)]
    pretty: bool,
    /// Accepted for compatibility; every algorithm is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Search budget (meaning depends on the command).
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Re-check results and exit 3 on failure.
    #[arg(long, global = true)]
    verify: bool,
    /// Write the certificate, witness subset or document to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated sides, e.g. `2,3,4`.
    #[arg(long, value_delimiter = ',')]
    sides: Option<Vec<usize>>,
}

#[derive(Args, Clone)]
struct PosetArgs {
    /// Built-in poset: `K`, `V`, `chain<l>`, `antichain<a>`, `standard<n>`.
    #[arg(long)]
    poset: Option<String>,
    #[arg(long)]
    poset_file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PatternArgs {
    #[arg(long)]
    pattern_file: Option<PathBuf>,
    /// Pattern sides, e.g. `3,3`.
    #[arg(long)]
    dims: Option<String>,
    /// Pattern ones, e.g. `1,2;2,3;3,1`.
    #[arg(long)]
    ones: Option<String>,
}

#[derive(Args, Clone)]
struct HostArgs {
    #[arg(long)]
    host_file: Option<PathBuf>,
    #[arg(long)]
    host_dims: Option<String>,
    #[arg(long)]
    host_ones: Option<String>,
}

#[derive(Args, Clone)]
struct SubsetArgs {
    /// Subset document `{"sides": [...], "points": [...]}`.
    #[arg(long)]
    subset_file: Option<PathBuf>,
    /// Inline points as 1-based coordinates, e.g. `1,1;1,2`.
    #[arg(long)]
    points: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Width of the grid (largest level).
    Width(GridArgs),
    /// Exact level sizes.
    Levels(GridArgs),
    /// Order dimension and a realizer.
    Dimension(PosetArgs),
    /// Symmetric chain decomposition.
    Scd(GridArgs),
    /// Balanced chain partition of `[k]^n`.
    ChainPartition(GridArgs),
    /// Re-check a chain-partition or pipeline certificate.
    VerifyCert {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Submatrix containment of a pattern in a host.
    PatternContains {
        #[command(flatten)]
        pattern: PatternArgs,
        #[command(flatten)]
        host: HostArgs,
    },
    /// Largest weight of an `m x ... x m` pattern avoiding a pattern.
    PatternExtremal {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        pattern: PatternArgs,
    },
    /// Permutation pattern of a poset from a minimum realizer.
    PosetPattern(PosetArgs),
    /// Exact largest P-free subset of a grid.
    MaxFree {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        poset: PosetArgs,
    },
    /// Block-decomposition upper bound on P-free subsets of `[k]^n`.
    Pipeline {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        poset: PosetArgs,
        /// Use `min(size, c_P m^(d-1))` block caps instead of exact search.
        #[arg(long)]
        c_p: Option<u64>,
    },
    /// Largest subset with no chain of size `l`.
    Erdos {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        l: usize,
    },
    /// Lubell mass of a subset.
    Lubell {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        subset: SubsetArgs,
    },
    /// K-free construction with mass growing like log k.
    Claim1(GridArgs),
    /// Lower-half block decomposition and its two level inequalities.
    Claim2 {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        subset: SubsetArgs,
    },
    /// Mass and mass per log2 k of a P-free subset.
    Ratio {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        poset: PosetArgs,
        #[command(flatten)]
        subset: SubsetArgs,
        /// Use the K-free construction as the subset.
        #[arg(long)]
        claim1: bool,
    },
}

enum Failure {
    Lib(Error),
    Usage(String),
    Io(String),
    Verify(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Out<T> = Result<T, Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Out<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, text: &str) -> Out<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn big(n: &BigUint) -> Value {
    Value::String(n.to_string())
}

fn coords(shape: &GridShape, indices: impl IntoIterator<Item = usize>) -> Value {
    indices.into_iter().map(|i| shape.point(i).coords).collect::<Vec<_>>().into()
}

impl GridArgs {
    fn shape(&self) -> Out<GridShape> {
        match (&self.sides, self.k, self.n) {
            (Some(s), None, None) => Ok(GridShape::new(s.clone())?),
            (None, Some(k), Some(n)) => Ok(GridShape::uniform(k, n)?),
            _ => Err(Failure::Usage("give either --sides or both --k and --n".into())),
        }
    }

    fn uniform(&self) -> Out<(usize, usize)> {
        self.shape()?
            .as_uniform()
            .ok_or_else(|| Failure::Usage("this command needs --k and --n".into()))
    }
}

impl PosetArgs {
    fn load(&self) -> Out<(Poset, Value)> {
        match (&self.poset, &self.poset_file) {
            (Some(name), None) => Ok((Poset::named(name)?, json!(name))),
            (None, Some(path)) => {
                let file = PosetFile::from_text(&read(path)?)?;
                let key = serde_json::to_value(&file).expect("serializable");
                Ok((file.to_poset()?, key))
            }
            _ => Err(Failure::Usage("give exactly one of --poset or --poset-file".into())),
        }
    }
}

fn load_pattern(file: &Option<PathBuf>, dims: &Option<String>, ones: &Option<String>, what: &str) -> Out<Pattern> {
    match (file, dims, ones) {
        (Some(path), None, None) => Ok(PatternFile::from_text(&read(path)?)?.to_pattern()?),
        (None, Some(d), Some(o)) => Ok(Pattern::parse_inline(d, o)?),
        _ => Err(Failure::Usage(format!("give a {what} file or both dims and ones"))),
    }
}

fn pattern_doc(a: &Pattern) -> Value {
    json!({ "dims": a.dims(), "ones": a.ones().collect::<Vec<_>>() })
}

impl SubsetArgs {
    fn load(&self, shape: &GridShape) -> Out<Subset> {
        let s = match (&self.subset_file, &self.points) {
            (Some(path), None) => SubsetFile::from_text(&read(path)?)?.to_subset()?,
            (None, Some(text)) => {
                let pts = Pattern::parse_inline(
                    &shape.sides().iter().map(usize::to_string).collect::<Vec<_>>().join(","),
                    text,
                )?;
                let idx = pts.ones().map(|c| shape.index_of_digits(&c.iter().map(|x| x - 1).collect::<Vec<_>>()));
                Subset::from_indices(shape, idx)?
            }
            _ => return Err(Failure::Usage("give exactly one of --subset-file or --points".into())),
        };
        if s.shape() != shape {
            return Err(Failure::Lib(Error::ShapeMismatch));
        }
        Ok(s)
    }
}

struct Ctx {
    cache: Option<Cache>,
    budget: Option<usize>,
    verify: bool,
    out: Option<PathBuf>,
}

impl Ctx {
    /// Looks the result up in the cache, computing and storing it on a miss.
    fn cached(&self, op: &str, params: Value, compute: impl FnOnce() -> Out<Value>) -> Out<Value> {
        let Some(cache) = &self.cache else {
            return compute();
        };
        let key = cache_key(op, &params);
        if let Some(v) = cache.lookup(&key).map_err(|e| io_err(cache.path(), e))? {
            return Ok(v);
        }
        let v = compute()?;
        cache.store(&key, &v).map_err(|e| io_err(cache.path(), e))?;
        Ok(v)
    }

    fn verified(&self, doc: Value, ok: bool) -> Out<Value> {
        if self.verify && !ok {
            Err(Failure::Verify(doc))
        } else {
            Ok(doc)
        }
    }
}

fn run(cmd: &Command, ctx: &Ctx) -> Out<Value> {
    match cmd {
        Command::Width(g) => {
            let shape = g.shape()?;
            Ok(json!({ "sides": shape.sides(), "width": big(&width_grid(&shape)) }))
        }
        Command::Levels(g) => {
            let shape = g.shape()?;
            let profile = level_profile(&shape);
            let theta = match shape.as_uniform() {
                Some((k, n)) if k >= 2 => json!(theta_ratio(k, n)?.to_string()),
                _ => Value::Null,
            };
            Ok(json!({
                "sides": shape.sides(),
                "levels": profile.sizes.iter().map(big).collect::<Vec<_>>(),
                "width": big(&profile.width),
                "width_rank": profile.width_rank,
                "theta_ratio": theta,
            }))
        }
        Command::Dimension(pa) => {
            let (p, key) = pa.load()?;
            let budget = ctx.budget.unwrap_or(DEFAULT_DIMENSION_BUDGET);
            ctx.cached("dimension", json!({ "poset": key, "budget": budget }), || {
                let (d, r) = dimension_with_budget(&p, budget)?;
                let seqs: Vec<Vec<usize>> = (0..r.order_count()).map(|i| r.sequence(i)).collect();
                Ok(json!({ "size": p.size(), "dimension": d, "realizer": seqs }))
            })
        }
        Command::Scd(g) => {
            let shape = g.shape()?;
            let part = scd(&shape)?;
            let width = width_grid(&shape);
            let report = verify_partition(&shape, &part, 1, shape.max_rank() + 1);
            let saturated = part.chains.iter().all(|c| c.is_saturated(&shape));
            let symmetric = part.chains.iter().all(|c| c.is_symmetric(&shape));
            let count_is_width = BigUint::from(part.chains.len()) == width;
            let ok = report.ok() && saturated && symmetric && count_is_width;
            let mut doc = json!({
                "sides": shape.sides(),
                "count": part.chains.len(),
                "width": big(&width),
                "chains": part.chains.iter().map(|c| c.points.clone()).collect::<Vec<_>>(),
            });
            if ctx.verify {
                doc["verification"] = json!({
                    "ok": ok,
                    "partition": report,
                    "saturated": saturated,
                    "symmetric": symmetric,
                    "count_equals_width": count_is_width,
                });
            }
            ctx.verified(doc, ok)
        }
        Command::ChainPartition(g) => {
            let shape = g.shape()?;
            let (low, high) = balanced_window(&shape)?;
            let part = balanced_partition(&shape)?;
            let cert = PartitionCertificate { partition: part, low, high };
            if let Some(path) = &ctx.out {
                write(path, &cert.to_text())?;
            }
            let report = cert.verify();
            let ok = report.ok();
            let mut doc = json!({
                "sides": shape.sides(),
                "window": [low, high],
                "count": cert.partition.chains.len(),
                "sizes": cert.partition.sizes(),
                "chains": cert.partition.chains.iter().map(|c| c.points.clone()).collect::<Vec<_>>(),
            });
            if ctx.verify {
                doc["verification"] = json!({ "ok": ok, "partition": report });
            }
            ctx.verified(doc, ok)
        }
        Command::VerifyCert { cert } => {
            let text = read(cert)?;
            let doc = if text.starts_with("chain-partition") {
                let c = PartitionCertificate::from_text(&text)?;
                let report = c.verify();
                json!({ "kind": "chain-partition", "ok": report.ok(), "report": report })
            } else {
                let c = BoundCertificate::from_text(&text)?;
                let report = c.verify();
                json!({ "kind": "pipeline", "ok": report.ok, "problems": report.problems, "total": c.total })
            };
            let ok = doc["ok"] == json!(true);
            if ok {
                Ok(doc)
            } else {
                Err(Failure::Verify(doc))
            }
        }
        Command::PatternContains { pattern, host } => {
            let a = load_pattern(&pattern.pattern_file, &pattern.dims, &pattern.ones, "pattern")?;
            let m = load_pattern(&host.host_file, &host.host_dims, &host.host_ones, "host")?;
            let w = contains_pattern(&m, &a)?;
            Ok(json!({
                "contained": w.is_some(),
                "witness": w.map(|w| w.index_rows),
            }))
        }
        Command::PatternExtremal { m, pattern } => {
            let a = load_pattern(&pattern.pattern_file, &pattern.dims, &pattern.ones, "pattern")?;
            let budget = ctx.budget.unwrap_or(DEFAULT_EXTREMAL_BUDGET);
            ctx.cached("pattern-extremal", json!({ "m": m, "pattern": pattern_doc(&a), "budget": budget }), || {
                let (w, witness) = extremal_weight_with(*m, &a, budget, Exec::default())?;
                Ok(json!({ "m": m, "weight": w, "witness": pattern_doc(&witness) }))
            })
        }
        Command::PosetPattern(pa) => {
            let (p, _) = pa.load()?;
            let budget = ctx.budget.unwrap_or(DEFAULT_DIMENSION_BUDGET);
            let (d, r) = dimension_with_budget(&p, budget)?;
            let a = poset_to_pattern(&p, &r)?;
            let seqs: Vec<Vec<usize>> = (0..r.order_count()).map(|i| r.sequence(i)).collect();
            Ok(json!({
                "dimension": d,
                "realizer": seqs,
                "pattern": pattern_doc(&a),
                "permutation": is_permutation_pattern(&a),
                "strict_permutation": is_strict_permutation_pattern(&a),
            }))
        }
        Command::MaxFree { grid, poset } => {
            let shape = grid.shape()?;
            let (p, key) = poset.load()?;
            let budget = ctx.budget.unwrap_or(DEFAULT_FREE_BUDGET);
            let params = json!({ "sides": shape.sides(), "poset": key, "budget": budget });
            let doc = ctx.cached("max-free", params, || {
                let (count, witness) = max_p_free_with(&shape, &p, budget, Exec::default())?;
                Ok(json!({
                    "sides": shape.sides(),
                    "count": count,
                    "witness": coords(&shape, witness.iter()),
                    "witness_indices": witness.indices(),
                }))
            })?;
            let indices: Vec<usize> = serde_json::from_value(doc["witness_indices"].clone())
                .map_err(|e| Failure::Io(format!("cached max-free entry: {e}")))?;
            let witness = Subset::from_indices(&shape, indices)?;
            if let Some(path) = &ctx.out {
                write(path, &witness.to_file().to_text())?;
            }
            let ok = !ctx.verify || is_p_free(&witness, &p)?;
            ctx.verified(doc, ok)
        }
        Command::Pipeline { grid, poset, c_p } => {
            let shape = grid.shape()?;
            let (p, key) = poset.load()?;
            let budget = ctx.budget.unwrap_or(DEFAULT_FREE_BUDGET);
            let mode = c_p.map_or(CapMode::ExactSearch, CapMode::PatternCap);
            let params = json!({ "sides": shape.sides(), "poset": key, "budget": budget, "mode": mode });
            let cert_value = ctx.cached("pipeline", params, || {
                let cert = pipeline_bound_with(&shape, &p, mode, budget, Exec::default())?;
                Ok(serde_json::to_value(&cert).expect("serializable"))
            })?;
            let cert: BoundCertificate = serde_json::from_value(cert_value)
                .map_err(|e| Failure::Io(format!("cached pipeline entry: {e}")))?;
            if let Some(path) = &ctx.out {
                write(path, &cert.to_text())?;
            }
            let mut doc = json!({
                "sides": cert.sides,
                "dimension": cert.dimension,
                "cap_mode": cert.cap_mode,
                "factors": cert.factors.iter().map(|f| json!({
                    "sides": f.sides,
                    "window": [f.low, f.high],
                    "chains": f.chains.len(),
                })).collect::<Vec<_>>(),
                "blocks": cert.blocks.len(),
                "total": cert.total,
            });
            let ok = if ctx.verify {
                let report = cert.verify();
                doc["verification"] = json!({ "ok": report.ok, "problems": report.problems });
                report.ok
            } else {
                true
            };
            ctx.verified(doc, ok)
        }
        Command::Erdos { grid, l } => {
            let shape = grid.shape()?;
            let b = max_l_chain_free(&shape, *l)?;
            Ok(json!({ "sides": shape.sides(), "l": l, "exact": big(&b.exact), "width_bound": big(&b.width_bound) }))
        }
        Command::Lubell { grid, subset } => {
            let shape = grid.shape()?;
            let s = subset.load(&shape)?;
            let r = lubell_mass(&s);
            Ok(json!({
                "sides": shape.sides(),
                "size": s.len(),
                "total": r.total.to_string(),
                "levels": r.per_level.iter().filter(|l| l.count > 0).map(|l| json!({
                    "level": l.level,
                    "count": l.count,
                    "level_size": big(&l.level_size),
                    "contribution": l.contribution.to_string(),
                })).collect::<Vec<_>>(),
                "table": r.to_table(),
            }))
        }
        Command::Claim1(g) => {
            let (k, n) = g.uniform()?;
            let c = claim1_construct(k, n)?;
            let shape = c.subset.shape().clone();
            if let Some(path) = &ctx.out {
                write(path, &c.subset.to_file().to_text())?;
            }
            let mass = c.mass();
            let masses = mass.per_block.clone().unwrap_or_default();
            Ok(json!({
                "k": k,
                "n": n,
                "s": c.s,
                "points": coords(&shape, c.subset.iter()),
                "blocks": c.blocks.iter().zip(&masses).map(|(b, m)| json!({
                    "i": b.i,
                    "r": b.r,
                    "points": coords(&shape, b.points.iter().copied()),
                    "mass": m.mass.to_string(),
                })).collect::<Vec<_>>(),
                "mass": mass.total.to_string(),
            }))
        }
        Command::Claim2 { grid, subset } => {
            let (k, n) = grid.uniform()?;
            let shape = GridShape::uniform(k, n)?;
            let s = match (&subset.subset_file, &subset.points) {
                (None, None) => None,
                _ => Some(subset.load(&shape)?),
            };
            let r = claim2_blocks(k, n, s.as_ref())?;
            let ok = r.inequalities_hold();
            let doc = json!({
                "k": k,
                "n": n,
                "half_sum": r.half_sum,
                "s": r.s,
                "lower_half_size": big(&r.lower_half_size),
                "uncovered": r.uncovered.map(|(a, b)| [a, b]),
                "uncovered_size": big(&r.uncovered_size),
                "inequalities_hold": ok,
                "blocks": r.blocks.iter().map(|b| json!({
                    "i": b.i,
                    "sums": [b.sum_low, b.sum_high],
                    "levels": b.levels.map(|(a, c)| [a, c]),
                    "empty": b.levels.is_none(),
                    "size": big(&b.size),
                    "lower": b.lower.as_ref().map(|l| json!({
                        "level": l.level,
                        "level_size": big(&l.level_size),
                        "bound": l.bound.to_string(),
                        "holds": l.holds,
                    })),
                    "upper": b.upper.iter().map(|u| json!({
                        "r": u.r,
                        "level_size": big(&u.level_size),
                        "binomial": big(&u.binomial),
                        "holds": u.holds,
                    })).collect::<Vec<_>>(),
                    "mass": b.mass.as_ref().map(|m| m.to_string()),
                })).collect::<Vec<_>>(),
            });
            ctx.verified(doc, ok)
        }
        Command::Ratio { grid, poset, subset, claim1 } => {
            let (k, n) = grid.uniform()?;
            let shape = GridShape::uniform(k, n)?;
            let (p, _) = poset.load()?;
            let s = if *claim1 { claim1_construct(k, n)?.subset } else { subset.load(&shape)? };
            let r = conjecture_ratio(&p, k, n, &s)?;
            let (ratio, exact) = match r.ratio {
                Ratio::Exact(q) => (json!(q.to_string()), true),
                Ratio::Approximate(x) => (json!(x), false),
            };
            Ok(json!({ "k": k, "n": n, "size": s.len(), "mass": r.mass.to_string(), "ratio": ratio, "exact": exact }))
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Width(_) => "width",
        Command::Levels(_) => "levels",
        Command::Dimension(_) => "dimension",
        Command::Scd(_) => "scd",
        Command::ChainPartition(_) => "chain-partition",
        Command::VerifyCert { .. } => "verify-cert",
        Command::PatternContains { .. } => "pattern-contains",
        Command::PatternExtremal { .. } => "pattern-extremal",
        Command::PosetPattern(_) => "poset-pattern",
        Command::MaxFree { .. } => "max-free",
        Command::Pipeline { .. } => "pipeline",
        Command::Erdos { .. } => "erdos",
        Command::Lubell { .. } => "lubell",
        Command::Claim1(_) => "claim1",
        Command::Claim2 { .. } => "claim2",
        Command::Ratio { .. } => "ratio",
    }
}

/// Scalars as `key<TAB>value` lines, then any text table.
fn render_pretty(doc: &Value) -> String {
    let mut out = String::new();
    let mut table = None;
    if let Value::Object(map) = doc {
        for (k, v) in map {
            match (k.as_str(), v) {
                ("table", Value::String(t)) => table = Some(t.clone()),
                (_, Value::String(s)) => out.push_str(&format!("{k}\t{s}\n")),
                (_, Value::Array(items)) if items.iter().any(|x| x.is_object()) => {
                    out.push_str(&format!("{k}\n"));
                    for item in items {
                        out.push_str(&format!("  {item}\n"));
                    }
                }
                _ => out.push_str(&format!("{k}\t{v}\n")),
            }
        }
    }
    if let Some(t) = table {
        out.push('\n');
        out.push_str(&t);
    }
    out
}

fn render(doc: &Value, pretty: bool) -> String {
    if pretty {
        render_pretty(doc)
    } else {
        format!("{doc}\n")
    }
}

/// Result of one invocation: exit code, standard output, standard error.
struct Outcome {
    code: u8,
    stdout: String,
    stderr: String,
}

fn execute(cli: &Cli) -> Outcome {
    let ctx = Ctx {
        cache: cli.cache_file.as_ref().map(Cache::new),
        budget: cli.budget,
        verify: cli.verify,
        out: cli.out.clone(),
    };
    let name = command_name(&cli.command);
    let doc_out = |mut doc: Value| {
        doc["command"] = json!(name);
        render(&doc, cli.pretty)
    };
    match run(&cli.command, &ctx) {
        Ok(doc) => Outcome { code: 0, stdout: doc_out(doc), stderr: String::new() },
        Err(Failure::Verify(doc)) => {
            Outcome { code: EXIT_VERIFY, stdout: doc_out(doc), stderr: "error: verification failed\n".into() }
        }
        Err(Failure::Usage(msg)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n\nRun `gridposet {name} --help` for usage.\n"),
        },
        Err(failure) => {
            let (kind, code, msg) = match failure {
                Failure::Lib(Error::BudgetExceeded(m)) => ("budget", EXIT_BUDGET, format!("search budget exceeded: {m}")),
                Failure::Lib(e @ Error::ConstructionFailed(_)) => ("verification", EXIT_VERIFY, e.to_string()),
                Failure::Lib(e) => ("domain", EXIT_DOMAIN, e.to_string()),
                Failure::Io(m) => ("io", EXIT_DOMAIN, m),
                Failure::Usage(_) | Failure::Verify(_) => unreachable!("handled above"),
            };
            Outcome {
                code,
                stdout: doc_out(json!({ "error": { "kind": kind, "message": msg } })),
                stderr: format!("error: {msg}\n"),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = execute(&cli);
    // a closed pipe downstream is not an error worth a panic
    let _ = std::io::stdout().lock().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().lock().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code)
}
