//! Subcommand implementations shared between the CLI surface and the
//! experiment runner.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use sinrsched_core::*;

use crate::cache::cached_gamma;
use crate::Globals;

pub const DEFAULT_ALPHA: f64 = 3.0;
pub const DEFAULT_BETA: f64 = 1.0;

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// `%g`-style formatting with 6 significant digits; used for every float in
/// the results CSV so files are byte-stable.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let prec = (5 - exp).max(0) as usize;
        let s = format!("{x:.prec$}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() || s == "-" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[derive(Subcommand, Debug, Clone)]
pub enum Family {
    /// Uniform random links in a box
    Random {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 100.0)]
        side: f64,
        #[arg(long, default_value_t = 1.0)]
        len_min: f64,
        #[arg(long, default_value_t = 4.0)]
        len_max: f64,
        /// `unit` or `uniform:<a>,<b>`
        #[arg(long, default_value = "unit")]
        weights: String,
    },
    /// Layered tree on the line that defeats first-fit
    FirstfitTree {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Length ratio between layers (defaults just above the bound)
        #[arg(long)]
        x: Option<f64>,
    },
    /// Layered clique tree that defeats fixed-probability schedules
    RandomizedTree {
        #[arg(long, default_value_t = 1)]
        levels: u32,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 3.0)]
        min_sep: f64,
    },
    /// Recursive weighted planar grid
    WeightedPlane {
        #[arg(long)]
        t: u32,
        #[arg(long, default_value_t = 2)]
        q: u32,
    },
    /// Equilength weighted family in an explicit metric
    GeneralMetric {
        #[arg(long, alias = "K")]
        k: u32,
        #[arg(long, default_value_t = 6.0)]
        gamma_m: f64,
    },
    /// Weak-link reduction of an existing instance
    Weaken {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p_max: f64,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
    },
}

fn parse_weights(text: &str) -> Result<WeightDist> {
    if text == "unit" {
        return Ok(WeightDist::Unit);
    }
    if let Some(rest) = text.strip_prefix("uniform:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 2 {
            let a: f64 = parts[0].parse().map_err(|_| Error::Parse(text.into()))?;
            let b: f64 = parts[1].parse().map_err(|_| Error::Parse(text.into()))?;
            return Ok(WeightDist::Uniform(a, b));
        }
    }
    Err(Error::InvalidParam(format!("weights must be `unit` or `uniform:<a>,<b>`, got {text}")))
}

pub fn build_instance(family: &Family, globals: &Globals) -> Result<Instance> {
    let alpha = globals.alpha.unwrap_or(DEFAULT_ALPHA);
    let noise = globals.noise.unwrap_or(0.0);
    match family {
        Family::Random { n, dim, side, len_min, len_max, weights } => {
            let cfg = RandomConfig {
                n: *n,
                dim: *dim,
                side: *side,
                len_min: *len_min,
                len_max: *len_max,
                weights: parse_weights(weights)?,
                params: SinrParams::new(alpha, globals.beta.unwrap_or(DEFAULT_BETA), noise)?,
                seed: globals.seed,
            };
            gen_random(&cfg)
        }
        Family::FirstfitTree { k, delta, x } => gen_firstfit_tree(*k, *delta, *x, alpha),
        Family::RandomizedTree { levels, b, copies, delta, min_sep } => {
            let cfg = RandomizedTreeConfig {
                levels: *levels,
                fanout_exp: *b,
                copies: *copies,
                delta: *delta,
                alpha,
                // identical copies must genuinely collide, so the threshold
                // defaults above 1 here
                beta: globals.beta.unwrap_or(2.0),
                min_sep: *min_sep,
            };
            gen_randomized_tree(&cfg).map(|(inst, _)| inst)
        }
        Family::WeightedPlane { t, q } => gen_weighted_plane(*t, *q, alpha),
        Family::GeneralMetric { k, gamma_m } => gen_general_metric(*k, *gamma_m, alpha),
        Family::Weaken { input, p_max, tau } => {
            let src = Instance::load(input)?;
            weaken(&src, &WeakLinkConfig { p_max: *p_max, tau: *tau })
        }
    }
}

pub fn generate(family: Family, globals: &Globals) -> Result<()> {
    let inst = build_instance(&family, globals)?;
    write_or_print(&globals.out, &inst.to_json())?;
    eprintln!("generated {} links", inst.n());
    Ok(())
}

// ---------------------------------------------------------------------------
// schedule / capacity
// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone)]
pub struct CalibrationOpts {
    /// Calibration cache file
    #[arg(long, default_value = "gamma-cache.json")]
    pub cache: PathBuf,
    /// Recalibrate even on a cache hit
    #[arg(long, default_value_t = false)]
    pub recalibrate: bool,
    /// Trials per calibration run
    #[arg(long = "cal-trials", default_value_t = 64)]
    pub cal_trials: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ScheduleSpec {
    /// `conflict`, `first-fit`, `length-class`, or `randomized`
    #[arg(long)]
    pub algo: String,
    /// Separation constant for `conflict`; `auto` calibrates
    #[arg(long, default_value = "auto")]
    pub gamma: String,
    #[arg(long, default_value_t = 0.9)]
    pub delta: f64,
    /// Power exponent (defaults: 0.8 for `conflict`, 0 for the baselines)
    #[arg(long)]
    pub tau: Option<f64>,
    /// First-fit order: `increasing` or `custom:<ids>`
    #[arg(long, default_value = "increasing")]
    pub order: String,
    /// Randomized probabilities: `constant:<p>`, `harmonic:<c>`, `custom:<list>`
    #[arg(long, default_value = "constant:0.5")]
    pub probs: String,
    /// Round cap for `randomized`
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
    #[command(flatten)]
    pub cal: CalibrationOpts,
}

pub fn resolve_gamma(
    inst: &Instance,
    gamma: &str,
    delta: f64,
    tau: f64,
    cal: &CalibrationOpts,
    seed: u64,
) -> Result<f64> {
    if gamma != "auto" {
        return gamma
            .parse::<f64>()
            .map_err(|_| Error::InvalidParam(format!("gamma must be a number or `auto`, got {gamma}")));
    }
    let m = inst.space().doubling_dim().ok_or(Error::DimensionUnknown)? as usize;
    let params = inst.params();
    cached_gamma(
        &cal.cache,
        params.alpha,
        m,
        delta,
        tau,
        params.beta,
        cal.cal_trials,
        seed,
        cal.recalibrate,
    )
}

pub fn parse_probs(text: &str, cap: usize) -> Result<ProbSequence> {
    if let Some(p) = text.strip_prefix("constant:") {
        let p: f64 = p.parse().map_err(|_| Error::Parse(text.into()))?;
        return ProbSequence::constant(p, cap);
    }
    if let Some(c) = text.strip_prefix("harmonic:") {
        let c: f64 = c.parse().map_err(|_| Error::Parse(text.into()))?;
        return ProbSequence::harmonic(c, cap);
    }
    if let Some(list) = text.strip_prefix("custom:") {
        let probs: std::result::Result<Vec<f64>, _> =
            list.split(',').map(|p| p.parse::<f64>()).collect();
        let probs = probs.map_err(|_| Error::Parse(text.into()))?;
        return ProbSequence::custom(probs, cap);
    }
    Err(Error::InvalidParam(format!(
        "probs must be constant:<p>, harmonic:<c>, or custom:<list>, got {text}"
    )))
}

/// Runs a scheduling algorithm and returns the schedule plus rounds used
/// (randomized only).
pub fn run_schedule(
    inst: &Instance,
    spec: &ScheduleSpec,
    seed: u64,
) -> Result<(Schedule, Option<usize>)> {
    match spec.algo.as_str() {
        "conflict" => {
            let tau = spec.tau.unwrap_or(0.8);
            let gamma = resolve_gamma(inst, &spec.gamma, spec.delta, tau, &spec.cal, seed)?;
            Ok((schedule_conflict(inst, gamma, spec.delta, tau)?, None))
        }
        "first-fit" => {
            let order = if spec.order == "increasing" {
                FirstFitOrder::IncreasingLength
            } else if let Some(ids) = spec.order.strip_prefix("custom:") {
                let ids: std::result::Result<Vec<usize>, _> =
                    ids.split(',').map(|i| i.parse::<usize>()).collect();
                FirstFitOrder::Custom(ids.map_err(|_| Error::Parse(spec.order.clone()))?)
            } else {
                return Err(Error::InvalidParam(format!(
                    "order must be `increasing` or `custom:<ids>`, got {}",
                    spec.order
                )));
            };
            Ok((first_fit(inst, spec.tau.unwrap_or(0.0), order)?, None))
        }
        "length-class" => Ok((length_class_schedule(inst, spec.tau.unwrap_or(0.0))?, None)),
        "randomized" => {
            let probs = parse_probs(&spec.probs, spec.cap)?;
            let (s, rounds) = randomized_schedule(inst, spec.tau.unwrap_or(0.0), &probs, seed)?;
            Ok((s, Some(rounds)))
        }
        other => Err(Error::InvalidParam(format!(
            "unknown algorithm `{other}` (conflict, first-fit, length-class, randomized)"
        ))),
    }
}

pub fn schedule(file: &Path, spec: ScheduleSpec, globals: &Globals) -> Result<()> {
    let inst = Instance::load(file)?;
    let (sched, rounds) = run_schedule(&inst, &spec, globals.seed)?;
    if !sched.re_verify(&inst)? {
        return Err(Error::VerificationFailed("schedule failed re-verification".into()));
    }
    let mut line = format!(
        "slots={} verified={} flags=[{}]",
        sched.slot_count(),
        sched.verified(),
        sched.flags.join(",")
    );
    if let Some(r) = rounds {
        line.push_str(&format!(" rounds={r}"));
    }
    println!("{line}");
    if globals.out.is_some() {
        write_or_print(
            &globals.out,
            &serde_json::to_string_pretty(&sched.to_json()).expect("schedule json"),
        )?;
    }
    Ok(())
}

pub fn capacity(
    file: &Path,
    gamma: &str,
    delta: f64,
    tau: f64,
    cal: &CalibrationOpts,
    globals: &Globals,
) -> Result<()> {
    let inst = Instance::load(file)?;
    let gamma = resolve_gamma(&inst, gamma, delta, tau, cal, globals.seed)?;
    let result = wcapacity_conflict(&inst, gamma, delta, tau)?;
    let verified = result.report.as_ref().is_none_or(|r| r.feasible);
    if !verified {
        return Err(Error::VerificationFailed("capacity set failed verification".into()));
    }
    println!(
        "weight={} links={} kemp={} verified={} flags=[{}]",
        fmt_g6(result.weight),
        result.links.len(),
        result.kemp,
        verified,
        result.flags.join(",")
    );
    if globals.out.is_some() {
        let json = serde_json::json!({
            "algorithm": "capacity",
            "params": {"gamma": gamma, "delta": delta, "tau": tau},
            "links": result.links,
            "weight": result.weight,
            "kemp": result.kemp,
            "verified": verified,
            "flags": result.flags,
        });
        write_or_print(&globals.out, &serde_json::to_string_pretty(&json).expect("json"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// feasible / oracle / calibrate
// ---------------------------------------------------------------------------

fn parse_links(text: Option<&str>, n: usize) -> Result<Vec<usize>> {
    match text {
        None => Ok((0..n).collect()),
        Some(t) => t
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("link id {s}"))))
            .collect(),
    }
}

fn parse_power(text: &str, inst: &Instance) -> Result<PowerAssignment> {
    let scheme = match text {
        "uniform" => PowerScheme::uniform(),
        "linear" => PowerScheme::linear(),
        "mean" => PowerScheme::mean(),
        other => {
            if let Some(t) = other.strip_prefix("tau:") {
                let tau: f64 = t.parse().map_err(|_| Error::Parse(other.into()))?;
                PowerScheme::new(tau, 1.0)?
            } else {
                return Err(Error::InvalidParam(format!(
                    "power must be uniform, linear, mean, or tau:<t>, got {other}"
                )));
            }
        }
    };
    Ok(scheme.assignment(inst))
}

fn parse_mode(text: &str) -> Result<AffectanceMode> {
    match text {
        "normalized" => Ok(AffectanceMode::Normalized),
        "exact" => Ok(AffectanceMode::Exact),
        other => Err(Error::InvalidParam(format!("mode must be normalized or exact, got {other}"))),
    }
}

pub fn feasible(
    file: &Path,
    links: Option<&str>,
    p: Option<f64>,
    power: &str,
    mode: &str,
    globals: &Globals,
) -> Result<()> {
    let inst = Instance::load(file)?;
    let set = parse_links(links, inst.n())?;
    let powers = parse_power(power, &inst)?;
    let report = check_feasible(
        &inst,
        &set,
        &powers,
        p.unwrap_or(inst.params().beta),
        parse_mode(mode)?,
    )?;
    print!("{}", report.to_text());
    if globals.out.is_some() {
        write_or_print(
            &globals.out,
            &serde_json::to_string_pretty(&report).expect("report json"),
        )?;
    }
    Ok(())
}

#[derive(Subcommand, Debug, Clone)]
pub enum OracleKind {
    /// Exact minimum slot count (n <= 15)
    MinSchedule {
        /// `optimal` or `fixed:<tau>`
        #[arg(long, default_value = "optimal")]
        power_mode: String,
    },
    /// Exact chromatic number of the conflict graph (n <= 20)
    Chromatic {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
    },
    /// Exact maximum-weight independent set of the conflict graph (n <= 25)
    Mwis {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
    },
    /// Export the conflict graph as an edge list (`n`, then `u v` per line)
    Edges {
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
    },
}

pub fn oracle(file: &Path, what: OracleKind, globals: &Globals) -> Result<()> {
    let inst = Instance::load(file)?;
    match what {
        OracleKind::MinSchedule { power_mode } => {
            let mode = if power_mode == "optimal" {
                PowerMode::Optimal
            } else if let Some(t) = power_mode.strip_prefix("fixed:") {
                let tau: f64 = t.parse().map_err(|_| Error::Parse(power_mode.clone()))?;
                PowerMode::Fixed(PowerScheme::new(tau, 1.0)?)
            } else {
                return Err(Error::InvalidParam(format!(
                    "power-mode must be optimal or fixed:<tau>, got {power_mode}"
                )));
            };
            println!("min_slots={}", exact_min_schedule(&inst, mode)?);
        }
        OracleKind::Chromatic { gamma, delta } => {
            let graph = build_graph(&inst, ConflictParams::new(gamma, delta)?)?;
            println!("chromatic={}", exact_chromatic(&graph)?);
        }
        OracleKind::Mwis { gamma, delta } => {
            let graph = build_graph(&inst, ConflictParams::new(gamma, delta)?)?;
            let best = exact_mwis(&graph, &inst.weights())?;
            let weight: f64 = best.iter().map(|&i| inst.links()[i].weight).sum();
            println!(
                "mwis_weight={} links=[{}]",
                fmt_g6(weight),
                best.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
            );
        }
        OracleKind::Edges { gamma, delta } => {
            let graph = build_graph(&inst, ConflictParams::new(gamma, delta)?)?;
            write_or_print(&globals.out, &graph.to_edge_list())?;
        }
    }
    Ok(())
}

pub fn calibrate(
    m: usize,
    delta: f64,
    tau: f64,
    trials: u64,
    cal: &CalibrationOpts,
    globals: &Globals,
) -> Result<()> {
    let gamma = cached_gamma(
        &cal.cache,
        globals.alpha.unwrap_or(DEFAULT_ALPHA),
        m,
        delta,
        tau,
        globals.beta.unwrap_or(DEFAULT_BETA),
        trials,
        globals.seed,
        cal.recalibrate,
    )?;
    println!("gamma={gamma}");
    Ok(())
}
