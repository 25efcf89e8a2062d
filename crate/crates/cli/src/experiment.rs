//! Experiment runner: expands a config into (instance, algorithm, seed)
//! tasks, runs them in a fixed-size thread pool, and writes a
//! deterministically ordered CSV. Rows are sorted before writing, so the
//! output is byte-identical at any parallelism degree; wall times are
//! reported to stderr and embedded in the file only on request.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;
use sinrsched_core::*;

use crate::commands::{self, fmt_g6, CalibrationOpts, ScheduleSpec};
use crate::Globals;

pub const CSV_HEADER: &str = "instance,n,delta,algorithm,params,slots,weight,verified,flags,ms,seed";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    instances: Vec<Value>,
    algorithms: Vec<AlgoSpec>,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
    #[serde(default = "default_parallelism")]
    parallelism: usize,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default = "default_cache")]
    cache: PathBuf,
    #[serde(default = "default_cal_trials")]
    cal_trials: u64,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_parallelism() -> usize {
    1
}

fn default_cache() -> PathBuf {
    PathBuf::from("gamma-cache.json")
}

fn default_cal_trials() -> u64 {
    64
}

#[derive(Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
struct AlgoSpec {
    algo: String,
    #[serde(default)]
    gamma: Option<Value>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    tau: Option<f64>,
    #[serde(default)]
    probs: Option<String>,
    #[serde(default)]
    cap: Option<usize>,
    #[serde(default)]
    order: Option<String>,
}

fn get_f64(map: &serde_json::Map<String, Value>, key: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_f64()
            .map(Some)
            .ok_or_else(|| Error::Parse(format!("field {key} must be a number"))),
    }
}

fn get_u64(map: &serde_json::Map<String, Value>, key: &str) -> Result<Option<u64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(Some)
            .ok_or_else(|| Error::Parse(format!("field {key} must be a nonnegative integer"))),
    }
}

/// Builds an instance from a config entry and returns its canonical id.
fn instance_from_value(value: &Value, base: &Path) -> Result<(String, Instance)> {
    let map = value
        .as_object()
        .ok_or_else(|| Error::Parse("instance entries must be objects".into()))?;
    if let Some(file) = map.get("file") {
        let rel = file
            .as_str()
            .ok_or_else(|| Error::Parse("instance file must be a string".into()))?;
        let path = base.join(rel);
        let inst = Instance::load(&path)?;
        let id = Path::new(rel)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| rel.to_string());
        return Ok((id, inst));
    }
    let gen = map
        .get("generator")
        .and_then(|g| g.as_str())
        .ok_or_else(|| Error::Parse("instance entries need `file` or `generator`".into()))?;
    let mut id_parts: Vec<String> = map
        .iter()
        .filter(|(k, _)| k.as_str() != "generator")
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    id_parts.sort();
    let id = format!("{gen}:{}", id_parts.join(";"));
    let alpha = get_f64(map, "alpha")?.unwrap_or(commands::DEFAULT_ALPHA);
    let beta = get_f64(map, "beta")?;
    let noise = get_f64(map, "noise")?.unwrap_or(0.0);
    let seed = get_u64(map, "seed")?.unwrap_or(0);
    let inst = match gen {
        "random" => {
            let weights = match map.get("weights").and_then(|w| w.as_str()) {
                None | Some("unit") => WeightDist::Unit,
                Some(text) => match text.strip_prefix("uniform:") {
                    Some(rest) => {
                        let p: Vec<&str> = rest.split(',').collect();
                        if p.len() != 2 {
                            return Err(Error::Parse(format!("weights {text}")));
                        }
                        WeightDist::Uniform(
                            p[0].parse().map_err(|_| Error::Parse(text.into()))?,
                            p[1].parse().map_err(|_| Error::Parse(text.into()))?,
                        )
                    }
                    None => return Err(Error::Parse(format!("weights {text}"))),
                },
            };
            gen_random(&RandomConfig {
                n: get_u64(map, "n")?.unwrap_or(16) as usize,
                dim: get_u64(map, "dim")?.unwrap_or(2) as usize,
                side: get_f64(map, "side")?.unwrap_or(100.0),
                len_min: get_f64(map, "len_min")?.unwrap_or(1.0),
                len_max: get_f64(map, "len_max")?.unwrap_or(4.0),
                weights,
                params: SinrParams::new(alpha, beta.unwrap_or(commands::DEFAULT_BETA), noise)?,
                seed,
            })?
        }
        "firstfit-tree" => gen_firstfit_tree(
            get_u64(map, "k")?.ok_or_else(|| Error::Parse("firstfit-tree needs k".into()))? as u32,
            get_f64(map, "delta")?.unwrap_or(0.0),
            get_f64(map, "x")?,
            alpha,
        )?,
        "randomized-tree" => {
            gen_randomized_tree(&RandomizedTreeConfig {
                levels: get_u64(map, "levels")?.unwrap_or(1) as u32,
                fanout_exp: get_f64(map, "b")?.unwrap_or(1.0),
                copies: get_u64(map, "copies")?.unwrap_or(1) as usize,
                delta: get_f64(map, "delta")?.unwrap_or(0.5),
                alpha,
                beta: beta.unwrap_or(2.0),
                min_sep: get_f64(map, "min_sep")?.unwrap_or(3.0),
            })?
            .0
        }
        "weighted-plane" => gen_weighted_plane(
            get_u64(map, "t")?.ok_or_else(|| Error::Parse("weighted-plane needs t".into()))? as u32,
            get_u64(map, "q")?.unwrap_or(2) as u32,
            alpha,
        )?,
        "general-metric" => gen_general_metric(
            get_u64(map, "k")?.ok_or_else(|| Error::Parse("general-metric needs k".into()))? as u32,
            get_f64(map, "gamma_m")?.unwrap_or(6.0),
            alpha,
        )?,
        other => return Err(Error::Parse(format!("unknown generator `{other}`"))),
    };
    Ok((id, inst))
}

struct Task {
    inst_idx: usize,
    algo_idx: usize,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Row {
    instance: String,
    algorithm: String,
    params: String,
    seed: u64,
    n: usize,
    delta: String,
    slots: String,
    weight: String,
    verified: bool,
    flags: String,
    ms: u64,
}

impl Row {
    fn sort_key(&self) -> (String, String, String, u64) {
        (
            self.instance.clone(),
            self.algorithm.clone(),
            self.params.clone(),
            self.seed,
        )
    }

    fn to_csv(&self, timings: bool) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.n,
            self.delta,
            self.algorithm,
            self.params,
            self.slots,
            self.weight,
            self.verified,
            self.flags,
            if timings { self.ms } else { 0 },
            self.seed
        )
    }
}

fn spec_for(algo: &AlgoSpec, gamma: String, cal: CalibrationOpts) -> ScheduleSpec {
    ScheduleSpec {
        algo: algo.algo.clone(),
        gamma,
        delta: algo.delta.unwrap_or(0.9),
        tau: algo.tau,
        order: algo.order.clone().unwrap_or_else(|| "increasing".into()),
        probs: algo.probs.clone().unwrap_or_else(|| "constant:0.5".into()),
        cap: algo.cap.unwrap_or(1000),
        cal,
    }
}

pub fn run(
    config_path: &Path,
    parallel_override: Option<usize>,
    timings: bool,
    globals: &Globals,
) -> Result<()> {
    let started = Instant::now();
    let text = std::fs::read_to_string(config_path)?;
    let config: Config =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config: {e}")))?;
    if config.instances.is_empty() || config.algorithms.is_empty() {
        return Err(Error::InvalidParam(
            "config needs at least one instance and one algorithm".into(),
        ));
    }
    let base = config_path.parent().unwrap_or_else(|| Path::new("."));

    let mut instances = Vec::new();
    for value in &config.instances {
        instances.push(instance_from_value(value, base)?);
    }

    // Resolve every auto-gamma up front (sequentially: the cache is a file),
    // so the parallel phase runs pure tasks only.
    let cal = CalibrationOpts {
        cache: base.join(&config.cache),
        recalibrate: false,
        cal_trials: config.cal_trials,
    };
    let mut resolved_gamma: Vec<Vec<String>> = Vec::new();
    for (_, inst) in &instances {
        let mut per_algo = Vec::new();
        for algo in &config.algorithms {
            let needs_gamma = matches!(algo.algo.as_str(), "conflict" | "capacity");
            let gamma_text = match (&algo.gamma, needs_gamma) {
                (_, false) => String::new(),
                (Some(Value::String(s)), true) if s == "auto" => String::from("auto"),
                (Some(v), true) => v
                    .as_f64()
                    .ok_or_else(|| Error::Parse("gamma must be a number or \"auto\"".into()))?
                    .to_string(),
                (None, true) => String::from("auto"),
            };
            let resolved = if gamma_text == "auto" {
                let tau = algo.tau.unwrap_or(0.8);
                let delta = algo.delta.unwrap_or(0.9);
                commands::resolve_gamma(inst, "auto", delta, tau, &cal, globals.seed)?.to_string()
            } else {
                gamma_text
            };
            per_algo.push(resolved);
        }
        resolved_gamma.push(per_algo);
    }

    let mut tasks = Vec::new();
    for inst_idx in 0..instances.len() {
        for algo_idx in 0..config.algorithms.len() {
            for &seed in &config.seeds {
                tasks.push(Task { inst_idx, algo_idx, seed });
            }
        }
    }

    let parallelism = parallel_override.unwrap_or(config.parallelism).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    let rows: Result<Vec<Row>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| {
                let (id, inst) = &instances[task.inst_idx];
                let algo = &config.algorithms[task.algo_idx];
                let gamma = &resolved_gamma[task.inst_idx][task.algo_idx];
                run_task(id, inst, algo, gamma, task.seed, &cal)
            })
            .collect()
    });
    let mut rows = rows?;
    rows.sort_by_key(|r| r.sort_key());

    let mut out_text = String::from(CSV_HEADER);
    out_text.push('\n');
    for row in &rows {
        out_text.push_str(&row.to_csv(timings));
        out_text.push('\n');
    }
    let out_path = globals
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(|p| base.join(p)))
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    std::fs::write(&out_path, out_text)?;
    eprintln!(
        "{} rows -> {} in {:?} (parallelism {parallelism})",
        rows.len(),
        out_path.display(),
        started.elapsed()
    );
    Ok(())
}

fn run_task(
    id: &str,
    inst: &Instance,
    algo: &AlgoSpec,
    gamma: &str,
    seed: u64,
    cal: &CalibrationOpts,
) -> Result<Row> {
    let t0 = Instant::now();
    let delta_col = inst.delta().map(fmt_g6).unwrap_or_default();
    let (params, slots, weight, verified, flags) = match algo.algo.as_str() {
        "capacity" => {
            let delta = algo.delta.unwrap_or(0.9);
            let tau = algo.tau.unwrap_or(0.8);
            let gamma: f64 = gamma
                .parse()
                .map_err(|_| Error::Parse(format!("resolved gamma {gamma}")))?;
            let result = wcapacity_conflict(inst, gamma, delta, tau)?;
            let verified = result.report.as_ref().is_none_or(|r| r.feasible);
            if !verified {
                return Err(Error::VerificationFailed(format!(
                    "capacity set failed verification on {id}"
                )));
            }
            (
                format!("delta={delta};gamma={gamma};tau={tau}"),
                String::new(),
                fmt_g6(result.weight),
                verified,
                result.flags.join(";"),
            )
        }
        _ => {
            let spec = spec_for(algo, gamma.to_string(), cal.clone());
            let (sched, _rounds) = commands::run_schedule(inst, &spec, seed)?;
            if !sched.re_verify(inst)? {
                return Err(Error::VerificationFailed(format!(
                    "schedule failed re-verification on {id}"
                )));
            }
            (
                sched.params_string(),
                sched.slot_count().to_string(),
                String::new(),
                sched.verified(),
                sched.flags.join(";"),
            )
        }
    };
    Ok(Row {
        instance: id.to_string(),
        algorithm: algo.algo.clone(),
        params,
        seed,
        n: inst.n(),
        delta: delta_col,
        slots,
        weight,
        verified,
        flags,
        ms: t0.elapsed().as_millis() as u64,
    })
}
