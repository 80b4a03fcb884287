use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use abptk::field::DEFAULT_PRIME;
use abptk::hardpoly::{
    gen_dmpy, gen_dmpy_smabp, gen_pry, gen_pry_formula, gen_ry, random_interval_formula,
    random_roabp, random_rof, random_strict_interval_abp, BlockStructure, LambdaAssignment,
    WAssignment,
};
use abptk::models::{Abp, Formula};
use abptk::partitions::{sample_arc_partition, sample_db, sample_equipartition, Partition};
use abptk::pit::{roabp_pit, strict_interval_pit, PitResult};
use abptk::rank::pd_rank;
use abptk::transforms::{depth_reduce_interval, strict_interval_to_roabp};
use abptk::{Error, MultilinearPoly};

#[derive(Parser)]
#[command(name = "abptk", about = "Algebraic branching program toolkit", version)]
struct Cli {
    /// Field modulus (prime).
    #[arg(long, global = true, default_value_t = DEFAULT_PRIME)]
    prime: u64,
    /// Master seed for all randomized operations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for experiments (default: rayon's choice).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an explicit polynomial family member (ry | pry | dmpy).
    GenPoly {
        family: String,
        #[arg(long)]
        n: usize,
        /// Block size for pry.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random model instance
    /// (rof | roabp | interval-formula | strict-interval | pry-formula | dmpy-smabp).
    GenModel {
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 40)]
        size: usize,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank of a polynomial's coefficient matrix under a partition.
    Rank {
        #[arg(long = "in")]
        input: PathBuf,
        /// Partition file ({"Y": [...]}); alternative to --y.
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Comma-separated Y-side variable indices.
        #[arg(long)]
        y: Option<String>,
    },
    /// Sample a partition (equi | db | arc).
    SamplePartition {
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a strict-interval ABP into a ROABP.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        emit_stats: bool,
    },
    /// Rebalance an interval formula to logarithmic depth.
    DepthReduce {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-expand input and output and fail loudly on mismatch.
        #[arg(long)]
        verify: bool,
    },
    /// White-box identity test; exit code mirrors the verdict (0 = zero).
    Pit {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run every applicable structural checker on a model file.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run a named experiment suite and emit its JSON report.
    Experiment {
        #[arg(long)]
        name: String,
        /// Experiment parameters as a JSON object.
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a CSV flattening of the per-trial records.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_file(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))
}

fn need_r(r: Option<usize>) -> Result<usize, Error> {
    r.ok_or_else(|| Error::Precondition("this command needs --r".into()))
}

fn run(cli: Cli) -> Result<u8, Error> {
    let (prime, seed) = (cli.prime, cli.seed);
    match cli.cmd {
        Cmd::GenPoly { family, n, r, out } => {
            let f = match family.as_str() {
                "ry" => {
                    let vars: Vec<usize> = (0..n).collect();
                    gen_ry(&vars, n, &WAssignment::seeded(prime, seed)?)?
                }
                "pry" => gen_pry(
                    &BlockStructure::new(n, need_r(r)?)?,
                    &WAssignment::seeded(prime, seed)?,
                )?,
                "dmpy" => gen_dmpy(n, &LambdaAssignment::seeded(prime, seed)?)?,
                other => {
                    return Err(Error::Precondition(format!(
                        "unknown family {other:?}; expected ry, pry or dmpy"
                    )))
                }
            };
            emit(&f.to_json(), &out)?;
            Ok(0)
        }
        Cmd::GenModel { kind, n, width, size, r, out } => {
            let text = match kind.as_str() {
                "rof" => random_rof(n, seed, prime)?.to_json(),
                "roabp" => random_roabp(n, width, seed, prime)?.to_json(),
                "interval-formula" => random_interval_formula(n, size, seed, prime)?.to_json(),
                "strict-interval" => random_strict_interval_abp(n, size, seed, prime)?.to_json(),
                "pry-formula" => gen_pry_formula(
                    &BlockStructure::new(n, need_r(r)?)?,
                    &WAssignment::seeded(prime, seed)?,
                )?
                .to_json(),
                "dmpy-smabp" => {
                    gen_dmpy_smabp(n, &LambdaAssignment::seeded(prime, seed)?)?.to_json()
                }
                other => {
                    return Err(Error::Precondition(format!(
                        "unknown model kind {other:?}"
                    )))
                }
            };
            emit(&text, &out)?;
            Ok(0)
        }
        Cmd::Rank { input, partition, y } => {
            let f = MultilinearPoly::from_json(&read_file(&input)?)?;
            let part = match (partition, y) {
                (Some(path), None) => Partition::from_json(&read_file(&path)?)?,
                (None, Some(list)) => {
                    let ys = list
                        .split(',')
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.trim()
                                .parse::<usize>()
                                .map_err(|_| Error::Precondition(format!("bad index {s:?}")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Partition::new(f.num_vars(), ys)?
                }
                _ => {
                    return Err(Error::Precondition(
                        "provide exactly one of --partition or --y".into(),
                    ))
                }
            };
            let rank = pd_rank(&f, &part)?;
            println!("{}", json!({"rank": rank}));
            Ok(0)
        }
        Cmd::SamplePartition { kind, n, r, out } => {
            let text = match kind.as_str() {
                "equi" => sample_equipartition(n, seed)?.to_json(),
                "db" => sample_db(&BlockStructure::new(n, need_r(r)?)?, seed)?.to_json(),
                "arc" => {
                    let (pairing, part) = sample_arc_partition(n, seed)?;
                    let mut v: Value = serde_json::from_str(&part.to_json())?;
                    let pv: Value = serde_json::from_str(&pairing.to_json())?;
                    v["pairs"] = pv["pairs"].clone();
                    serde_json::to_string_pretty(&v)?
                }
                other => {
                    return Err(Error::Precondition(format!(
                        "unknown partition kind {other:?}; expected equi, db or arc"
                    )))
                }
            };
            emit(&text, &out)?;
            Ok(0)
        }
        Cmd::Convert { input, out, emit_stats } => {
            let p = Abp::from_json(&read_file(&input)?)?;
            let q = strict_interval_to_roabp(&p)?;
            if emit_stats {
                let stats = json!({
                    "in_size": p.num_nodes(),
                    "out_size": q.num_nodes(),
                    "bound": 2 * p.num_vars() * p.num_nodes(),
                });
                eprintln!("{stats}");
            }
            emit(&q.to_json(), &out)?;
            Ok(0)
        }
        Cmd::DepthReduce { input, out, verify } => {
            let f = Formula::from_json(&read_file(&input)?)?;
            let g = depth_reduce_interval(&f)?;
            if verify && f.expand()? != g.expand()? {
                eprintln!("verification failed: output polynomial differs from input");
                return Ok(1);
            }
            emit(&g.to_json(), &out)?;
            Ok(0)
        }
        Cmd::Pit { input } => {
            let p = Abp::from_json(&read_file(&input)?)?;
            let res = if p.check_oblivious_roabp().report.verdict {
                roabp_pit(&p)?
            } else {
                strict_interval_pit(&p)?
            };
            match res {
                PitResult::Zero => {
                    println!("{}", json!({"verdict": "zero"}));
                    Ok(0)
                }
                PitResult::NonZero { witness_mask, witness_point } => {
                    println!(
                        "{}",
                        json!({
                            "verdict": "nonzero",
                            "witness_mask": witness_mask,
                            "witness_point": witness_point,
                        })
                    );
                    Ok(1)
                }
            }
        }
        Cmd::Validate { input } => {
            let v: Value = serde_json::from_str(&read_file(&input)?)?;
            let kind = v.get("kind").and_then(Value::as_str).unwrap_or_else(|| {
                if v.get("terms").is_some() {
                    "poly"
                } else if v.get("Y").is_some() {
                    "partition"
                } else {
                    "unknown"
                }
            });
            match kind {
                "formula" => {
                    let f = Formula::from_value(&v)?;
                    let sml = f.check_syntactic_multilinear();
                    let rof = f.check_rof();
                    let interval = f.check_interval_formula();
                    for (name, rep) in [
                        ("syntactic-multilinear", &sml),
                        ("read-once", &rof),
                        ("interval-formula", &interval),
                    ] {
                        match (&rep.verdict, &rep.witness) {
                            (true, _) => println!("{name}: ok"),
                            (false, w) => {
                                println!("{name}: FAIL ({})", w.as_deref().unwrap_or(""))
                            }
                        }
                    }
                    println!("size: {}, depth: {}, max-read: {}", f.size(), f.depth(), f.max_read());
                }
                "abp" => {
                    let p = Abp::from_value(&v)?;
                    let sml = p.check_syntactic_multilinear();
                    let roabp = p.check_oblivious_roabp();
                    let si = p.check_strict_interval();
                    match (&sml.verdict, &sml.witness) {
                        (true, _) => println!("syntactic-multilinear: ok"),
                        (false, w) => {
                            println!("syntactic-multilinear: FAIL ({})", w.as_deref().unwrap_or(""))
                        }
                    }
                    match (&roabp.report.verdict, roabp.order) {
                        (true, Some(order)) => println!("roabp: ok (order {order:?})"),
                        _ => println!(
                            "roabp: FAIL ({})",
                            roabp.report.witness.as_deref().unwrap_or("")
                        ),
                    }
                    match (&si.report.verdict, &si.report.witness) {
                        (true, _) => println!("strict-interval: ok"),
                        (false, w) => {
                            println!("strict-interval: FAIL ({})", w.as_deref().unwrap_or(""))
                        }
                    }
                    println!("size: {} nodes, {} layers", p.num_nodes(), p.layers().len());
                }
                "poly" => {
                    let f = MultilinearPoly::from_json(&serde_json::to_string(&v)?)?;
                    println!("polynomial: ok ({} terms over {} variables)", f.num_terms(), f.num_vars());
                }
                "partition" => {
                    let part = Partition::from_json(&serde_json::to_string(&v)?)?;
                    println!(
                        "partition: ok (|Y| = {}, |Z| = {}, equi: {})",
                        part.y_size(),
                        part.z_size(),
                        part.is_equi()
                    );
                }
                other => {
                    return Err(Error::Precondition(format!(
                        "cannot infer model kind (found {other:?})"
                    )))
                }
            }
            Ok(0)
        }
        Cmd::Experiment { name, params, out, csv } => {
            let map: Map<String, Value> = match params {
                None => Map::new(),
                Some(text) => serde_json::from_str(&text)?,
            };
            let (report, ok) = abptk_cli::run_experiment(&name, &map, prime, seed, cli.threads)?;
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(path) = csv {
                fs::write(&path, abptk_cli::report_to_csv(&report)).map_err(|e| {
                    Error::Precondition(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            emit(&text, &out)?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Error::Json(msg)) => {
            eprintln!("parse error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
