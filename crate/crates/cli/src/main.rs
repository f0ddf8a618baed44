use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use cuttree::cutting::{cut_complete, cut_k, cut_one, CutKind, CutRecordJson};
use cuttree::icrt::{build_pn, genealogy_matrix, line_break, survival_eta1, Genealogy, RealTree, ThetaParam};
use cuttree::ptree::sample_ptree;
use cuttree::rng::{self, SimRng};
use cuttree::shuffle::{reverse_record, shuff_complete, shuff_k};
use cuttree::stats::Verdict;
use cuttree::verify::{self, DEFAULT_SEED, SUITES};
use cuttree::{Error, ProbWeights, RootedTree};

const CSV_HELP: &str = "\
CSV columns (--format csv):
  sample-tree        replica,vertex,parent      (parent 0 marks the root)
  cut                vertex,parent,cut_index,mark
  shuff              vertex,parent
  icrt line-break    vertex,parent,length,position,kind
  icrt survival      r,survival
  icrt genealogy     replica,target,l_infinity
  build-pn           vertex,p
  verify             name,statistic,threshold,pass,seed,n_samples
  bench              op,n,reps,seconds_per_op";

#[derive(Parser)]
#[command(name = "cuttree", version, about = "Cut, shuffle and verify random p-trees and ICRTs", after_help = CSV_HELP)]
struct Cli {
    /// Master seed; falls back to CUTTREE_SEED, then a built-in default.
    #[arg(long, global = true, env = "CUTTREE_SEED")]
    seed: Option<u64>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for replica-parallel commands.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample p-trees with the weighted Aldous-Broder walk.
    SampleTree {
        #[command(flatten)]
        weights: WeightArgs,
        /// Number of trees.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Cut a tree: isolate one vertex, several vertices, or everything.
    Cut(CutArgs),
    /// Shuffle a tree or a cut record, or undo a recorded cut exactly.
    Shuff(ShuffArgs),
    /// Continuum side: line-breaking, the analytic survival function, genealogies.
    Icrt {
        #[command(subcommand)]
        cmd: IcrtCmd,
    },
    /// Weights on 1..n whose scaled values match a given theta.
    BuildPn {
        /// JSON array [theta0, theta1, ...] or a single number.
        #[arg(long)]
        theta: String,
        #[arg(short)]
        n: usize,
    },
    /// Run a named verification suite, or `all`.
    Verify { suite: String },
    /// Time the main operations.
    Bench {
        /// Tree sizes.
        #[arg(short, value_delimiter = ',', default_values_t = [1_000usize, 10_000, 100_000])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
}

#[derive(Args)]
struct WeightArgs {
    /// Number of vertices (uniform weights unless --weights is given).
    #[arg(short)]
    n: Option<usize>,
    /// Weights as a JSON array, or @file.
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Args)]
#[group(id = "mode", required = true, multiple = false, args = ["one", "k", "complete"])]
struct CutArgs {
    /// Isolate a single vertex.
    #[arg(long)]
    one: bool,
    /// Isolate several vertices.
    #[arg(long)]
    k: bool,
    /// Cut until nothing is left.
    #[arg(long)]
    complete: bool,
    /// Tree JSON file (`-` for stdin); a fresh p-tree is sampled otherwise.
    #[arg(long)]
    tree: Option<String>,
    #[command(flatten)]
    weights: WeightArgs,
    /// Comma-separated targets; sampled from p when absent.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<usize>,
    /// Number of sampled targets for --k.
    #[arg(long, default_value_t = 2)]
    count: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ShuffMode {
    One,
    K,
    Complete,
    ReverseExact,
}

#[derive(Args)]
struct ShuffArgs {
    #[arg(long, value_enum)]
    mode: ShuffMode,
    /// Cut record JSON or bare tree JSON (`-` for stdin).
    #[arg(long)]
    input: String,
    /// Weights as a JSON array, or @file; uniform when absent.
    #[arg(long)]
    weights: Option<String>,
    /// Targets for bare trees; taken from the record otherwise.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<usize>,
}

#[derive(Subcommand)]
enum IcrtCmd {
    /// Build the reduced tree R_k by Poisson line-breaking.
    LineBreak {
        #[arg(long)]
        theta: String,
        #[arg(short, default_value_t = 1)]
        k: usize,
    },
    /// P(eta_1 > r).
    Survival {
        #[arg(long)]
        theta: String,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<f64>,
    },
    /// Estimate the genealogy of the cut process seen from k targets.
    Genealogy {
        #[arg(long)]
        theta: String,
        #[arg(short, default_value_t = 2)]
        k: usize,
        /// Auxiliary leaves used for mass estimates (default 50 k).
        #[arg(short)]
        m: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
struct Fail {
    code: u8,
    msg: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Json(_) => 3,
            Error::UnknownSuite(_) => 2,
            _ => 1,
        };
        Fail { code, msg: e.to_string() }
    }
}

fn fail(msg: impl Into<String>) -> Fail {
    Fail { code: 1, msg: msg.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Fail> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let mut r = rng::master(seed);
    let out = match &cli.cmd {
        Cmd::SampleTree { weights, count } => {
            let w = weights_from(weights)?;
            let trees: Vec<RootedTree> = (0..*count)
                .into_par_iter()
                .map(|i| sample_ptree(&w, &mut rng::replica(seed, i as u64)))
                .collect::<Result<_, _>>()?;
            match cli.format {
                Format::Json if *count == 1 => json(&trees[0]),
                Format::Json => json(&trees),
                Format::Csv => {
                    let mut s = String::from("replica,vertex,parent\n");
                    for (i, t) in trees.iter().enumerate() {
                        for v in 1..=t.n() {
                            s += &format!("{i},{v},{}\n", t.parent(v).unwrap_or(0));
                        }
                    }
                    s
                }
            }
        }
        Cmd::Cut(args) => cut(args, cli.format, &mut r)?,
        Cmd::Shuff(args) => shuff(args, cli.format, &mut r)?,
        Cmd::Icrt { cmd } => icrt(cmd, cli.format, seed, &mut r)?,
        Cmd::BuildPn { theta, n } => {
            let w = build_pn(&parse_theta(theta)?, *n)?;
            match cli.format {
                Format::Json => json(&w.as_slice()),
                Format::Csv => {
                    let mut s = String::from("vertex,p\n");
                    for (i, p) in w.as_slice().iter().enumerate() {
                        s += &format!("{},{p}\n", i + 1);
                    }
                    s
                }
            }
        }
        Cmd::Verify { suite } => {
            let verdicts = match verify::run_suite(suite, seed) {
                Err(Error::UnknownSuite(name)) => {
                    let mut msg = format!("unknown suite `{name}`; available suites:\n");
                    for (n, d) in SUITES {
                        msg += &format!("  {n:<16} {d}\n");
                    }
                    msg += "  all              every suite above";
                    return Err(Fail { code: 2, msg });
                }
                other => other?,
            };
            emit(cli, &verdicts_out(&verdicts, cli.format))?;
            return Ok(if verdicts.iter().all(|v| v.pass) { 0 } else { 1 });
        }
        Cmd::Bench { n, reps } => bench(n, *reps, cli.format, &mut r)?,
    };
    emit(cli, &out)?;
    Ok(0)
}

fn emit(cli: &Cli, s: &str) -> Result<(), Fail> {
    match &cli.out {
        Some(p) => fs::write(p, s).map_err(|e| fail(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(s.as_bytes())
            .map_err(|e| fail(e.to_string())),
    }
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn read_input(path: &str) -> Result<String, Fail> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| fail(e.to_string()))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| fail(format!("{path}: {e}")))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, Fail> {
    serde_json::from_str(text).map_err(|e| Fail {
        code: 3,
        msg: format!("malformed {what} JSON at line {}, column {}: {e}", e.line(), e.column()),
    })
}

/// Inline JSON or `@file`.
fn inline_or_file(arg: &str) -> Result<String, Fail> {
    match arg.strip_prefix('@') {
        Some(p) => read_input(p),
        None => Ok(arg.to_string()),
    }
}

fn parse_weights(arg: &str) -> Result<ProbWeights, Fail> {
    let v: Vec<f64> = parse_json(&inline_or_file(arg)?, "weights")?;
    Ok(ProbWeights::new(v)?)
}

fn weights_from(a: &WeightArgs) -> Result<ProbWeights, Fail> {
    match (&a.weights, a.n) {
        (Some(w), n) => {
            let w = parse_weights(w)?;
            if n.is_some_and(|n| n != w.n()) {
                return Err(fail(format!("-n {} disagrees with {} weights", n.unwrap(), w.n())));
            }
            Ok(w)
        }
        (None, Some(0)) => Err(fail("-n must be positive")),
        (None, Some(n)) => Ok(ProbWeights::uniform(n)),
        (None, None) => Err(fail("give -n or --weights")),
    }
}

fn parse_theta(arg: &str) -> Result<ThetaParam, Fail> {
    let text = inline_or_file(arg)?;
    let v: Vec<f64> = match serde_json::from_str::<f64>(&text) {
        Ok(x) => vec![x],
        Err(_) => parse_json(&text, "theta")?,
    };
    let (theta, rescaled) = ThetaParam::normalized(&v)?;
    if rescaled {
        eprintln!("warning: theta rescaled to unit sum of squares: {:?}", theta.to_vec());
    }
    Ok(theta)
}

fn tree_csv(t: &RootedTree) -> String {
    let mut s = String::from("vertex,parent\n");
    for v in 1..=t.n() {
        s += &format!("{v},{}\n", t.parent(v).unwrap_or(0));
    }
    s
}

fn cut(a: &CutArgs, format: Format, r: &mut SimRng) -> Result<String, Fail> {
    let (tree, w) = match &a.tree {
        Some(path) => {
            let t: RootedTree = parse_json(&read_input(path)?, "tree")?;
            let w = match &a.weights.weights {
                Some(w) => parse_weights(w)?,
                None => ProbWeights::uniform(t.n()),
            };
            (t, w)
        }
        None => {
            let w = weights_from(&a.weights)?;
            (sample_ptree(&w, r)?, w)
        }
    };
    let mut targets = a.targets.clone();
    if targets.is_empty() {
        let k = if a.one { 1 } else { a.count };
        targets = (0..k).map(|_| w.sample(r)).collect();
    }
    let rec: CutRecordJson = if a.one {
        if targets.len() != 1 {
            return Err(fail("--one takes a single target"));
        }
        (&cut_one(&tree, targets[0], &w, r)?).into()
    } else if a.k {
        (&cut_k(&tree, &targets, &w, r)?).into()
    } else {
        (&cut_complete(&tree, &w, r)?).into()
    };
    Ok(match format {
        Format::Json => json(&rec),
        Format::Csv => {
            let mut s = String::from("vertex,parent,cut_index,mark\n");
            let t = &rec.cut_tree;
            for v in 1..=t.n() {
                let idx = rec.cuts.iter().position(|&x| x == v).map(|i| (i + 1).to_string()).unwrap_or_default();
                let mark = rec.marks.get(&v).map(|m| m.to_string()).unwrap_or_default();
                s += &format!("{v},{},{idx},{mark}\n", t.parent(v).unwrap_or(0));
            }
            s
        }
    })
}

fn shuff(a: &ShuffArgs, format: Format, r: &mut SimRng) -> Result<String, Fail> {
    let text = read_input(&a.input)?;
    let value: serde_json::Value = parse_json(&text, "input")?;
    let record: Option<CutRecordJson> = if value.get("kind").is_some() {
        Some(parse_json(&text, "cut record")?)
    } else {
        None
    };
    let tree: RootedTree = match &record {
        Some(rec) => rec.cut_tree.clone(),
        None => parse_json(&text, "tree")?,
    };
    let w = match &a.weights {
        Some(w) => parse_weights(w)?,
        None => ProbWeights::uniform(tree.n()),
    };
    let targets = if !a.targets.is_empty() {
        a.targets.clone()
    } else if let Some(rec) = &record {
        rec.targets.clone()
    } else {
        Vec::new()
    };
    let out = match a.mode {
        ShuffMode::ReverseExact => {
            let rec = record.ok_or_else(|| fail("reverse-exact needs a cut record"))?;
            reverse_record(&rec)?
        }
        ShuffMode::Complete => shuff_complete(&tree, &w, r)?,
        ShuffMode::One | ShuffMode::K => {
            if targets.is_empty() {
                return Err(fail("no targets: pass --targets or a cut record"));
            }
            if a.mode == ShuffMode::One && targets.len() != 1 {
                return Err(fail("--mode one takes a single target"));
            }
            if record.as_ref().is_some_and(|rec| rec.kind == CutKind::Complete) {
                eprintln!("warning: shuffling a complete cut record along explicit targets");
            }
            shuff_k(&tree, &targets, &w, r)?
        }
    };
    Ok(match format {
        Format::Json => json(&out),
        Format::Csv => tree_csv(&out),
    })
}

fn icrt(cmd: &IcrtCmd, format: Format, seed: u64, r: &mut SimRng) -> Result<String, Fail> {
    Ok(match cmd {
        IcrtCmd::LineBreak { theta, k } => {
            let rt = line_break(&parse_theta(theta)?, *k, r)?;
            match format {
                Format::Json => json(&rt),
                Format::Csv => real_tree_csv(&rt),
            }
        }
        IcrtCmd::Survival { theta, r: rs } => {
            let th = parse_theta(theta)?;
            if let Some(x) = rs.iter().find(|x| !(**x >= 0.0)) {
                return Err(fail(format!("r = {x} must be nonnegative")));
            }
            #[derive(Serialize)]
            struct Point {
                r: f64,
                survival: f64,
            }
            let pts: Vec<Point> = rs.iter().map(|&x| Point { r: x, survival: survival_eta1(&th, x) }).collect();
            match format {
                Format::Json if pts.len() == 1 => json(&pts[0]),
                Format::Json => json(&pts),
                Format::Csv => {
                    let mut s = String::from("r,survival\n");
                    for p in &pts {
                        s += &format!("{},{}\n", p.r, p.survival);
                    }
                    s
                }
            }
        }
        IcrtCmd::Genealogy { theta, k, m, horizon, replicas } => {
            let th = parse_theta(theta)?;
            let m = m.unwrap_or(50 * k);
            let runs: Vec<Genealogy> = (0..*replicas)
                .into_par_iter()
                .map(|i| genealogy_matrix(&th, *k, m, *horizon, &mut rng::replica(seed, i as u64)))
                .collect::<Result<_, _>>()?;
            for (i, g) in runs.iter().enumerate().filter(|(_, g)| g.truncated) {
                eprintln!(
                    "warning: replica {i} stopped at the horizon with residual mass {:.3e}",
                    g.residual_mass
                );
            }
            match format {
                Format::Json if runs.len() == 1 => json(&runs[0]),
                Format::Json => json(&runs),
                Format::Csv => {
                    let mut s = String::from("replica,target,l_infinity\n");
                    for (i, g) in runs.iter().enumerate() {
                        for (j, l) in g.l_infinity.iter().enumerate() {
                            s += &format!("{i},{},{l}\n", j + 1);
                        }
                    }
                    s
                }
            }
        }
    })
}

fn real_tree_csv(rt: &RealTree) -> String {
    let mut s = String::from("vertex,parent,length,position,kind\n");
    for (i, v) in rt.vertices.iter().enumerate() {
        let kind = serde_json::to_value(v.kind).expect("serializable");
        let label = kind["kind"].as_str().unwrap_or("").to_string();
        let label = match kind.get("index") {
            Some(ix) => format!("{label}{ix}"),
            None => label,
        };
        let parent = v.parent.map(|p| p.to_string()).unwrap_or_default();
        s += &format!("{i},{parent},{},{},{label}\n", v.length, v.position);
    }
    s
}

fn verdicts_out(vs: &[Verdict], format: Format) -> String {
    match format {
        Format::Json => json(vs),
        Format::Csv => {
            let mut s = String::from("name,statistic,threshold,pass,seed,n_samples\n");
            for v in vs {
                s += &format!("{},{},{},{},{},{}\n", v.name, v.statistic, v.threshold, v.pass, v.seed, v.n_samples);
            }
            s
        }
    }
}

fn bench(sizes: &[usize], reps: usize, format: Format, r: &mut SimRng) -> Result<String, Fail> {
    #[derive(Serialize)]
    struct Row {
        op: &'static str,
        n: usize,
        reps: usize,
        seconds_per_op: f64,
    }
    let reps = reps.max(1);
    let mut rows = Vec::new();
    let mut time = |op: &'static str, n: usize, f: &mut dyn FnMut(&mut SimRng) -> Result<(), Error>| -> Result<(), Fail> {
        let start = Instant::now();
        for _ in 0..reps {
            f(r)?;
        }
        rows.push(Row {
            op,
            n,
            reps,
            seconds_per_op: start.elapsed().as_secs_f64() / reps as f64,
        });
        Ok(())
    };
    for &n in sizes {
        let w = ProbWeights::uniform(n);
        let t = sample_ptree(&w, &mut rng::master(0))?;
        time("sample-tree", n, &mut |r| sample_ptree(&w, r).map(|_| ()))?;
        time("cut-one", n, &mut |r| {
            let v = w.sample(r);
            cut_one(&t, v, &w, r).map(|_| ())
        })?;
        time("cut-k4", n, &mut |r| {
            let targets: Vec<usize> = (0..4).map(|_| r.random_range(1..=n)).collect();
            cut_k(&t, &targets, &w, r).map(|_| ())
        })?;
        time("cut-complete", n, &mut |r| cut_complete(&t, &w, r).map(|_| ()))?;
        time("shuff-complete", n, &mut |r| shuff_complete(&t, &w, r).map(|_| ()))?;
    }
    let th = ThetaParam::brownian();
    for &n in sizes {
        time("line-break", n, &mut |r| line_break(&th, n, r).map(|_| ()))?;
    }
    Ok(match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut s = String::from("op,n,reps,seconds_per_op\n");
            for row in &rows {
                s += &format!("{},{},{},{}\n", row.op, row.n, row.reps, row.seconds_per_op);
            }
            s
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_accepts_numbers_and_arrays() {
        assert_eq!(parse_theta("1").unwrap().to_vec(), vec![1.0]);
        assert_eq!(parse_theta("[0.6, 0.8]").unwrap().to_vec(), vec![0.6, 0.8]);
        assert_eq!(parse_theta("[0.6, 0.8").err().unwrap().code, 3);
        assert_eq!(parse_theta("[0.5, 0.5]").err().unwrap().code, 1);
    }

    #[test]
    fn weights_need_a_size() {
        let none = WeightArgs { n: None, weights: None };
        assert!(weights_from(&none).is_err());
        let both = WeightArgs { n: Some(3), weights: Some("[0.5, 0.5]".into()) };
        assert!(weights_from(&both).is_err());
        let ok = WeightArgs { n: None, weights: Some("[0.25, 0.75]".into()) };
        assert_eq!(weights_from(&ok).ok().unwrap().n(), 2);
    }
}
