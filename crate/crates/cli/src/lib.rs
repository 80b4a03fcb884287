//! Named experiment suites and report plumbing for the `abptk` binary.
//!
//! Reports are deterministic for a fixed (experiment, params, seed)
//! triple: per-trial seeds are derived as `seed ^ trial_index`, trials
//! may run in parallel but are merged in index order, and JSON object
//! keys serialize sorted, so the emitted bytes never depend on the
//! thread count.

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use abptk::hardpoly::{
    enum_arc_pairings, gen_dmpy, gen_dmpy_smabp, gen_pry, gen_ry, random_interval_formula,
    random_roabp, random_rof, random_strict_interval_abp, BlockStructure, LambdaAssignment,
    WAssignment,
};
use abptk::partitions::{sample_db, Pairing, Partition, SplitMix64};
use abptk::pit::{roabp_pit, strict_interval_pit, PitResult};
use abptk::rank::pd_rank;
use abptk::transforms::{depth_bound, depth_reduce_interval, strict_interval_to_roabp};
use abptk::{Error, Result};

pub const EXPERIMENTS: &[&str] = &[
    "pry-full-rank",
    "ry-all-partitions",
    "dmpy-full-rank",
    "rof-deficit-mc",
    "convert-corpus",
    "pit-corpus",
    "depthred-corpus",
];

fn param_usize(params: &Map<String, Value>, key: &str, default: usize) -> Result<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| Error::Precondition(format!("parameter {key:?} must be an integer"))),
    }
}

fn trial_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

struct Outcome {
    params: Value,
    trials: Vec<Value>,
    summary: Value,
    ok: bool,
}

/// Runs a named experiment and returns its JSON report. `ok` in the
/// summary (and the bool here) flags whether every checked invariant
/// held.
pub fn run_experiment(
    name: &str,
    params: &Map<String, Value>,
    prime: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<(Value, bool)> {
    let body = || -> Result<Outcome> {
        match name {
            "pry-full-rank" => pry_full_rank(params, prime, seed),
            "ry-all-partitions" => ry_all_partitions(params, prime, seed),
            "dmpy-full-rank" => dmpy_full_rank(params, prime, seed),
            "rof-deficit-mc" => rof_deficit_mc(params, prime, seed),
            "convert-corpus" => convert_corpus(params, prime, seed),
            "pit-corpus" => pit_corpus(params, prime, seed),
            "depthred-corpus" => depthred_corpus(params, prime, seed),
            other => Err(Error::Precondition(format!(
                "unknown experiment {other:?}; expected one of {EXPERIMENTS:?}"
            ))),
        }
    };
    let outcome = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?
            .install(body)?,
        None => body()?,
    };
    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": name,
        "prime": prime,
        "seed": seed,
        "params": outcome.params,
        "trials": outcome.trials,
        "summary": outcome.summary,
    });
    Ok((report, outcome.ok))
}

fn pry_full_rank(params: &Map<String, Value>, prime: u64, seed: u64) -> Result<Outcome> {
    let n = param_usize(params, "n", 8)?;
    let r = param_usize(params, "r", 4)?;
    let trials = param_usize(params, "trials", 20)?;
    let w_draws = param_usize(params, "w_draws", 3)?;
    let bs = BlockStructure::new(n, r)?;
    let expected = 1u64 << (n / 2);
    let results: Vec<Result<Value>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(seed, t);
            let part = sample_db(&bs, ts)?;
            let mut ranks = Vec::new();
            let mut reseeds = 0usize;
            for d in 0..w_draws {
                let w = WAssignment::seeded(prime, ts.wrapping_add(1 + d as u64))?;
                let f = gen_pry(&bs, &w)?;
                let mut rank = pd_rank(&f, &part)? as u64;
                // an unlucky W draw may hit a root of the rank polynomial;
                // one fresh draw is permitted per slot
                if rank != expected {
                    reseeds += 1;
                    let w2 = WAssignment::seeded(prime, ts.wrapping_add(0x5EED + d as u64))?;
                    rank = pd_rank(&gen_pry(&bs, &w2)?, &part)? as u64;
                }
                ranks.push(rank);
            }
            let ok = ranks.iter().all(|&x| x == expected);
            Ok(json!({
                "trial": t,
                "y_mask": part.y_mask(),
                "ranks": ranks,
                "reseeds": reseeds,
                "ok": ok,
            }))
        })
        .collect();
    let trials_v = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ok = trials_v.iter().all(|v| v["ok"] == json!(true));
    Ok(Outcome {
        params: json!({"n": n, "r": r, "trials": trials, "w_draws": w_draws}),
        trials: trials_v,
        summary: json!({"expected_rank": expected, "ok": ok}),
        ok,
    })
}

fn ry_all_partitions(params: &Map<String, Value>, prime: u64, seed: u64) -> Result<Outcome> {
    let m = param_usize(params, "m", 6)?;
    let vars: Vec<usize> = (0..m).collect();
    let w = WAssignment::seeded(prime, seed)?;
    let f = gen_ry(&vars, m, &w)?;
    let expected = 1u64 << (m / 2);
    let parts = Partition::enumerate_equi(m)?;
    let results: Vec<Result<Value>> = parts
        .par_iter()
        .enumerate()
        .map(|(i, part)| {
            let rank = pd_rank(&f, part)? as u64;
            Ok(json!({
                "trial": i,
                "y_mask": part.y_mask(),
                "rank": rank,
                "ok": rank == expected,
            }))
        })
        .collect();
    let trials_v = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ok = trials_v.iter().all(|v| v["ok"] == json!(true));
    Ok(Outcome {
        params: json!({"m": m}),
        trials: trials_v,
        summary: json!({"expected_rank": expected, "partitions": parts.len(), "ok": ok}),
        ok,
    })
}

/// A bichromatic coloring of a pairing: one endpoint of each pair per side.
fn pairing_partition(pairing: &Pairing, seed: u64) -> Result<Partition> {
    let mut rng = SplitMix64::new(seed);
    let mut ys = Vec::new();
    for &(a, b) in pairing.pairs() {
        ys.push(if rng.below(2) == 0 { a } else { b });
    }
    Partition::new(pairing.num_vars(), ys)
}

fn dmpy_full_rank(params: &Map<String, Value>, prime: u64, seed: u64) -> Result<Outcome> {
    let n = param_usize(params, "n", 8)?;
    let colorings = param_usize(params, "colorings", 5)?;
    let expected = 1u64 << (n / 2);
    let lambda = LambdaAssignment::seeded(prime, seed)?;
    let f = gen_dmpy(n, &lambda)?;
    let tags = LambdaAssignment::seeded(prime, seed.wrapping_add(1))?;
    let g = gen_dmpy_smabp(n, &tags)?.expand()?;
    let pairings = enum_arc_pairings(n)?;
    let results: Vec<Result<Value>> = pairings
        .par_iter()
        .enumerate()
        .map(|(i, pairing)| {
            let mut records = Vec::new();
            let mut ok = true;
            for c in 0..colorings {
                let part = pairing_partition(pairing, trial_seed(seed, i * colorings + c))?;
                let rank = pd_rank(&f, &part)? as u64;
                let smabp_rank = pd_rank(&g, &part)? as u64;
                ok &= rank == expected && smabp_rank == expected;
                records.push(json!({
                    "y_mask": part.y_mask(),
                    "rank": rank,
                    "smabp_rank": smabp_rank,
                }));
            }
            Ok(json!({
                "trial": i,
                "pairing": pairing.key(),
                "colorings": records,
                "ok": ok,
            }))
        })
        .collect();
    let trials_v = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ok = trials_v.iter().all(|v| v["ok"] == json!(true));
    Ok(Outcome {
        params: json!({"n": n, "colorings": colorings}),
        trials: trials_v,
        summary: json!({"expected_rank": expected, "pairings": pairings.len(), "ok": ok}),
        ok,
    })
}

fn rof_deficit_mc(params: &Map<String, Value>, prime: u64, seed: u64) -> Result<Outcome> {
    let n = param_usize(params, "n", 16)?;
    let r = param_usize(params, "r", 4)?;
    let trials = param_usize(params, "trials", 100)?;
    let bs = BlockStructure::new(n, r)?;
    let cap = 1u64 << (n / 2);
    let results: Vec<Result<Value>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(seed, t);
            let f = random_rof(n, ts, prime)?.expand()?;
            let part = sample_db(&bs, ts.wrapping_add(0x9E37))?;
            let rank = pd_rank(&f, &part)? as u64;
            Ok(json!({
                "trial": t,
                "rank": rank,
                "deficit": cap - rank,
                "ok": rank <= cap,
            }))
        })
        .collect();
    let trials_v = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ok = trials_v.iter().all(|v| v["ok"] == json!(true));
    let mut histogram: std::collections::BTreeMap<u64, usize> = Default::default();
    let mut max_rank = 0u64;
    for v in &trials_v {
        let d = v["deficit"].as_u64().unwrap_or(0);
        *histogram.entry(d).or_insert(0) += 1;
        max_rank = max_rank.max(v["rank"].as_u64().unwrap_or(0));
    }
    let hist_json: Map<String, Value> = histogram
        .into_iter()
        .map(|(d, c)| (d.to_string(), json!(c)))
        .collect();
    Ok(Outcome {
        params: json!({"n": n, "r": r, "trials": trials}),
        trials: trials_v,
        summary: json!({"rank_cap": cap, "max_rank": max_rank, "deficit_histogram": hist_json, "ok": ok}),
        ok,
    })
}

fn convert_corpus(params: &Map<String, Value>, prime: u64, seed: u64) -> Result<Outcome> {
    let n = param_usize(params, "n", 8)?;
    let size = param_usize(params, "size", 40)?;
    let trials = param_usize(params, "trials", 100)?;
    let results: Vec<Result<Value>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let p = random_strict_interval_abp(n, size, trial_seed(seed, t), prime)?;
            let q = strict_interval_to_roabp(&p)?;
            let s = p.num_nodes();
            let bound = 2 * n * s;
            let is_roabp = q.check_oblivious_roabp().report.verdict;
            let equal = q.expand()? == p.expand()?;
            let within = q.num_nodes() <= bound;
            Ok(json!({
                "trial": t,
                "in_size": s,
                "out_size": q.num_nodes(),
                "bound": bound,
                "ok": is_roabp && equal && within,
            }))
        })
        .collect();
    let trials_v = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ok = trials_v.iter().all(|v| v["ok"] == json!(true));
    let max_out = trials_v
        .iter()
        .map(|v| v["out_size"].as_u64().unwrap_or(0))
        .max()
        .unwrap_or(0);
    Ok(Outcome {
        params: json!({"n": n, "size": size, "trials": trials}),
        trials: trials_v,
        summary: json!({"max_out_size": max_out, "ok": ok}),
        ok,
    })
}

fn pit_corpus(params: &Map<String, Value>, prime: u64, seed: u64) -> Result<Outcome> {
    let n = param_usize(params, "n", 8)?;
    let roabp_trials = param_usize(params, "roabp_trials", 200)?;
    let si_trials = param_usize(params, "si_trials", 100)?;
    let zero_trials = param_usize(params, "zero_trials", 50)?;
    let total = roabp_trials + si_trials + zero_trials;
    let results: Vec<Result<Value>> = (0..total)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(seed, t);
            let (kind, p) = if t < roabp_trials {
                ("roabp", random_roabp(n, 3, ts, prime)?)
            } else if t < roabp_trials + si_trials {
                ("strict-interval", random_strict_interval_abp(n, 36, ts, prime)?)
            } else {
                // forced-zero fixture: P glued with -P
                let q = random_roabp(n, 3, ts, prime)?;
                let neg = negate(&q)?;
                ("forced-zero", abptk::transforms::sum_roabps(&q, &neg)?)
            };
            let res = if kind == "strict-interval" {
                strict_interval_pit(&p)?
            } else {
                roabp_pit(&p)?
            };
            let f = p.expand()?;
            let mut ok = res.is_zero() == f.is_zero();
            if kind == "forced-zero" {
                ok &= res.is_zero();
            }
            if let PitResult::NonZero { witness_mask, witness_point } = &res {
                ok &= f.coeff(*witness_mask as u32) != 0;
                ok &= p.eval(witness_point)? != 0;
            }
            Ok(json!({
                "trial": t,
                "kind": kind,
                "verdict": if res.is_zero() { "zero" } else { "nonzero" },
                "ok": ok,
            }))
        })
        .collect();
    let trials_v = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ok = trials_v.iter().all(|v| v["ok"] == json!(true));
    let zeros = trials_v
        .iter()
        .filter(|v| v["verdict"] == json!("zero"))
        .count();
    Ok(Outcome {
        params: json!({"n": n, "roabp_trials": roabp_trials, "si_trials": si_trials, "zero_trials": zero_trials}),
        trials: trials_v,
        summary: json!({"zero_verdicts": zeros, "ok": ok}),
        ok,
    })
}

/// Negates a program by scaling its source edges by -1.
fn negate(p: &abptk::models::Abp) -> Result<abptk::models::Abp> {
    let modulus = p.modulus();
    let s = p.source();
    let edges: Vec<abptk::models::Edge> = p
        .edges()
        .iter()
        .map(|e| {
            let label = if e.from == s {
                match e.label {
                    abptk::models::EdgeLabel::Const(c) => {
                        abptk::models::EdgeLabel::Const(c * (modulus - 1) % modulus)
                    }
                    abptk::models::EdgeLabel::Var { index, coeff } => {
                        abptk::models::EdgeLabel::Var {
                            index,
                            coeff: coeff * (modulus - 1) % modulus,
                        }
                    }
                }
            } else {
                e.label
            };
            abptk::models::Edge { from: e.from, to: e.to, label }
        })
        .collect();
    abptk::models::Abp::new(p.num_vars(), modulus, p.layers().to_vec(), edges)
}

fn depthred_corpus(params: &Map<String, Value>, prime: u64, seed: u64) -> Result<Outcome> {
    let n = param_usize(params, "n", 8)?;
    let size = param_usize(params, "size", 80)?;
    let trials = param_usize(params, "trials", 100)?;
    let results: Vec<Result<Value>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let f = random_interval_formula(n, size, trial_seed(seed, t), prime)?;
            let g = depth_reduce_interval(&f)?;
            let s = f.binarize().size();
            let bound = depth_bound(s);
            let ok = g.check_interval_formula().verdict
                && g.expand()? == f.expand()?
                && g.depth() <= bound;
            Ok(json!({
                "trial": t,
                "in_size": s,
                "in_depth": f.depth(),
                "out_size": g.size(),
                "out_depth": g.depth(),
                "depth_bound": bound,
                "ok": ok,
            }))
        })
        .collect();
    let trials_v = results.into_iter().collect::<Result<Vec<_>>>()?;
    let ok = trials_v.iter().all(|v| v["ok"] == json!(true));
    // measured size exponent: max log(out)/log(in) over non-trivial inputs
    let exponent = trials_v
        .iter()
        .filter_map(|v| {
            let i = v["in_size"].as_u64()? as f64;
            let o = v["out_size"].as_u64()? as f64;
            (i > 2.0).then(|| o.ln() / i.ln())
        })
        .fold(0.0f64, f64::max);
    Ok(Outcome {
        params: json!({"n": n, "size": size, "trials": trials}),
        trials: trials_v,
        summary: json!({"max_size_exponent": (exponent * 1000.0).round() / 1000.0, "ok": ok}),
        ok,
    })
}

/// Flattens a report's trial records into CSV; columns are the sorted
/// keys of the first record, nested values rendered as JSON.
pub fn report_to_csv(report: &Value) -> String {
    let Some(trials) = report.get("trials").and_then(Value::as_array) else {
        return String::new();
    };
    let Some(first) = trials.first().and_then(Value::as_object) else {
        return String::new();
    };
    let columns: Vec<&String> = first.keys().collect();
    let mut out = String::new();
    out.push_str(&columns.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","));
    out.push('\n');
    for t in trials {
        let row: Vec<String> = columns
            .iter()
            .map(|c| match t.get(c.as_str()) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => s.clone(),
                Some(other) => other.to_string().replace(',', ";"),
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use abptk::field::DEFAULT_PRIME;

    #[test]
    fn reports_are_deterministic_across_thread_counts() {
        let params = Map::new();
        let (a, ok_a) =
            run_experiment("convert-corpus", &params, DEFAULT_PRIME, 7, Some(1)).unwrap();
        let (b, ok_b) =
            run_experiment("convert-corpus", &params, DEFAULT_PRIME, 7, Some(4)).unwrap();
        assert!(ok_a && ok_b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn unknown_experiment_is_rejected() {
        let params = Map::new();
        assert!(run_experiment("no-such", &params, DEFAULT_PRIME, 0, None).is_err());
    }

    #[test]
    fn csv_flattening() {
        let report = json!({"trials": [
            {"trial": 0, "rank": 4, "ok": true},
            {"trial": 1, "rank": 2, "ok": false},
        ]});
        let csv = report_to_csv(&report);
        assert_eq!(csv, "ok,rank,trial\ntrue,4,0\nfalse,2,1\n");
    }
}
