//! End-to-end scheduling and capacity algorithms: the conflict-graph
//! scheduler and weighted-capacity solver, the first-fit, length-class, and
//! randomized baselines, exact small-instance oracles, and empirical
//! calibration of the separation constant.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::conflict::{build_graph, color_classes, greedy_color, mwis, ConflictParams};
use crate::error::{Error, Result};
use crate::feasibility::{
    check_feasible, exists_power, greedy_feasible_partition, valid_tau_interval, AffCtx,
    FeasibilityReport, BUDGET_SLACK,
};
use crate::generate::{gen_random, RandomConfig, WeightDist};
use crate::instance::{Instance, SinrParams};
use crate::power::{AffectanceMode, PowerAssignment, PowerScheme};

/// Raised when a greedy color class failed the power-scheme feasibility check
/// and had to be re-split: the separation constant was too small for the
/// instance.
pub const FLAG_GAMMA_TOO_SMALL: &str = "gamma-too-small";
/// Raised when the randomized baseline hit its round cap with links left.
pub const FLAG_CAP_REACHED: &str = "cap-reached";
/// Raised when `beta <= 1`, where the separation-based lower-bound diagnostic
/// has no guaranteed constant.
pub const FLAG_LOWER_BOUND_NA: &str = "lower-bound-diagnostic-na";

/// One slot: a verified-feasible set of links.
#[derive(Debug, Clone)]
pub struct Slot {
    pub links: Vec<usize>,
    pub report: FeasibilityReport,
}

/// An ordered partition of (a subset of) the instance's links into verified
/// feasible slots, all under one power assignment.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub algorithm: String,
    pub params: Vec<(String, String)>,
    pub power: PowerAssignment,
    pub mode: AffectanceMode,
    pub slots: Vec<Slot>,
    pub flags: Vec<String>,
    /// False only when a round cap left links unscheduled.
    pub complete: bool,
}

impl Schedule {
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn verified(&self) -> bool {
        self.slots.iter().all(|s| s.report.feasible)
    }

    pub fn covered_links(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.slots.iter().flat_map(|s| s.links.iter().copied()).collect();
        v.sort_unstable();
        v
    }

    /// Recomputes every slot's feasibility from scratch; a complete schedule
    /// must also partition the instance's links.
    pub fn re_verify(&self, inst: &Instance) -> Result<bool> {
        if self.complete {
            let covered = self.covered_links();
            if covered != (0..inst.n()).collect::<Vec<_>>() {
                return Ok(false);
            }
        }
        for slot in &self.slots {
            let p = slot.report.p;
            let rep = check_feasible(inst, &slot.links, &self.power, p, self.mode)?;
            if !rep.feasible {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "algorithm": self.algorithm,
            "params": self.params.iter().cloned().collect::<std::collections::BTreeMap<String, String>>(),
            "slots": self.slots.iter().map(|s| s.links.clone()).collect::<Vec<_>>(),
            "verified": self.verified(),
            "flags": self.flags,
        })
    }
}

fn empty_schedule(algorithm: &str, params: Vec<(String, String)>) -> Schedule {
    Schedule {
        algorithm: algorithm.to_string(),
        params,
        power: PowerAssignment::new(Vec::new()).expect("empty assignment"),
        mode: AffectanceMode::Normalized,
        slots: Vec::new(),
        flags: Vec::new(),
        complete: true,
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Validates the conflict-scheduler parameter triple against the instance and
/// returns the doubling dimension.
fn conflict_preconditions(inst: &Instance, delta: f64, tau: f64) -> Result<f64> {
    let m = inst.space().doubling_dim().ok_or(Error::DimensionUnknown)?;
    let alpha = inst.params().alpha;
    if alpha <= m {
        return Err(Error::AlphaNotFading { alpha, m });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!("delta must lie in (0, 1), got {delta}")));
    }
    match valid_tau_interval(alpha, m, delta)? {
        None => Err(Error::EmptyTauInterval {
            delta,
            delta0: crate::feasibility::delta0(alpha, m),
        }),
        Some((lo, hi)) => {
            if tau > lo && tau < hi {
                Ok(m)
            } else {
                Err(Error::TauOutsideInterval { tau, lo, hi })
            }
        }
    }
}

/// Conflict-graph scheduler: colors the `(gamma, delta)` conflict graph
/// greedily in non-increasing length order and emits the color classes as
/// slots, each verified feasible under the `tau` power scheme. A class that
/// fails verification is re-split greedily and the schedule is flagged
/// `gamma-too-small`.
pub fn schedule_conflict(
    inst: &Instance,
    gamma: f64,
    delta: f64,
    tau: f64,
) -> Result<Schedule> {
    conflict_preconditions(inst, delta, tau)?;
    let params = vec![
        ("gamma".into(), fmt_f64(gamma)),
        ("delta".into(), fmt_f64(delta)),
        ("tau".into(), fmt_f64(tau)),
    ];
    let mut flags = Vec::new();
    if inst.params().beta <= 1.0 {
        flags.push(FLAG_LOWER_BOUND_NA.to_string());
    }
    if inst.is_empty() {
        let mut s = empty_schedule("conflict", params);
        s.flags = flags;
        return Ok(s);
    }
    let beta = inst.params().beta;
    let graph = build_graph(inst, ConflictParams::new(gamma, delta)?)?;
    let classes = color_classes(&greedy_color(&graph));
    let scheme = PowerScheme::new(tau, 1.0)?;
    let power = scheme.assignment(inst);
    let mut slots = Vec::new();
    let mut resplit = false;
    for class in classes {
        let report = check_feasible(inst, &class, &power, beta, AffectanceMode::Normalized)?;
        if report.feasible {
            slots.push(Slot { links: class, report });
        } else {
            resplit = true;
            let parts =
                greedy_feasible_partition(inst, &class, &power, beta, AffectanceMode::Normalized)?;
            for part in parts {
                let rep = check_feasible(inst, &part, &power, beta, AffectanceMode::Normalized)?;
                if !rep.feasible {
                    return Err(Error::VerificationFailed(
                        "re-split slot failed its feasibility recheck".into(),
                    ));
                }
                slots.push(Slot { links: part, report: rep });
            }
        }
    }
    if resplit {
        flags.push(FLAG_GAMMA_TOO_SMALL.to_string());
    }
    Ok(Schedule {
        algorithm: "conflict".into(),
        params,
        power,
        mode: AffectanceMode::Normalized,
        slots,
        flags,
        complete: true,
    })
}

/// Weighted-capacity result: a verified feasible set and the measured
/// approximation factor of the independent-set heuristic.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub links: Vec<usize>,
    pub weight: f64,
    pub power: PowerAssignment,
    pub kemp: usize,
    pub flags: Vec<String>,
    pub report: Option<FeasibilityReport>,
}

/// Conflict-graph weighted capacity: local-ratio weighted independent set on
/// the `(gamma, delta)` graph; the returned set is verified feasible under
/// the `tau` scheme (re-split to its heaviest feasible part and flagged if
/// the separation constant proves too small).
pub fn wcapacity_conflict(
    inst: &Instance,
    gamma: f64,
    delta: f64,
    tau: f64,
) -> Result<CapacityResult> {
    conflict_preconditions(inst, delta, tau)?;
    let mut flags = Vec::new();
    if inst.params().beta <= 1.0 {
        flags.push(FLAG_LOWER_BOUND_NA.to_string());
    }
    let scheme = PowerScheme::new(tau, 1.0)?;
    let power = scheme.assignment(inst);
    if inst.is_empty() {
        return Ok(CapacityResult {
            links: Vec::new(),
            weight: 0.0,
            power,
            kemp: 0,
            flags,
            report: None,
        });
    }
    let beta = inst.params().beta;
    let graph = build_graph(inst, ConflictParams::new(gamma, delta)?)?;
    let heuristic = mwis(&graph, &inst.weights())?;
    let mut links = heuristic.links;
    let mut report = check_feasible(inst, &links, &power, beta, AffectanceMode::Normalized)?;
    if !report.feasible {
        flags.push(FLAG_GAMMA_TOO_SMALL.to_string());
        let parts =
            greedy_feasible_partition(inst, &links, &power, beta, AffectanceMode::Normalized)?;
        let weights = inst.weights();
        let best = parts
            .into_iter()
            .max_by(|a, b| {
                let wa: f64 = a.iter().map(|&i| weights[i]).sum();
                let wb: f64 = b.iter().map(|&i| weights[i]).sum();
                wa.partial_cmp(&wb).unwrap()
            })
            .unwrap_or_default();
        links = best;
        report = check_feasible(inst, &links, &power, beta, AffectanceMode::Normalized)?;
        if !report.feasible {
            return Err(Error::VerificationFailed(
                "capacity set failed its feasibility recheck after re-split".into(),
            ));
        }
    }
    let weights = inst.weights();
    let weight = links.iter().map(|&i| weights[i]).sum();
    Ok(CapacityResult { links, weight, power, kemp: heuristic.kemp, flags, report: Some(report) })
}

/// Processing order for the first-fit baseline.
#[derive(Debug, Clone)]
pub enum FirstFitOrder {
    IncreasingLength,
    Custom(Vec<usize>),
}

/// Incremental first-fit core: places each link of `order` into the first
/// slot where the whole slot (existing members and the newcomer) stays within
/// the incoming-affectance budget.
fn first_fit_slots(
    inst: &Instance,
    ctx: &AffCtx,
    order: &[usize],
    budget: f64,
) -> Vec<Vec<usize>> {
    struct SlotState {
        members: Vec<usize>,
        incoming: Vec<f64>,
    }
    let mut slots: Vec<SlotState> = Vec::new();
    'links: for &x in order {
        'slots: for slot in slots.iter_mut() {
            let mut in_x = 0.0;
            for (idx, &j) in slot.members.iter().enumerate() {
                if slot.incoming[idx] + ctx.aff(inst, x, j) > budget {
                    continue 'slots;
                }
                in_x += ctx.aff(inst, j, x);
            }
            if in_x > budget {
                continue 'slots;
            }
            for (idx, &j) in slot.members.iter().enumerate() {
                slot.incoming[idx] += ctx.aff(inst, x, j);
            }
            slot.members.push(x);
            slot.incoming.push(in_x);
            continue 'links;
        }
        slots.push(SlotState { members: vec![x], incoming: vec![0.0] });
    }
    slots
        .into_iter()
        .map(|s| {
            let mut m = s.members;
            m.sort_unstable();
            m
        })
        .collect()
}

fn finalize_slots(
    inst: &Instance,
    power: &PowerAssignment,
    beta: f64,
    sets: Vec<Vec<usize>>,
) -> Result<Vec<Slot>> {
    let mut slots = Vec::with_capacity(sets.len());
    for set in sets {
        let report = check_feasible(inst, &set, power, beta, AffectanceMode::Normalized)?;
        if !report.feasible {
            return Err(Error::VerificationFailed(
                "greedy slot failed its feasibility recheck".into(),
            ));
        }
        slots.push(Slot { links: set, report });
    }
    Ok(slots)
}

/// First-fit baseline: processes links in increasing length order (or a
/// custom permutation) and assigns each to the first slot that remains
/// feasible under the `tau_power` scheme with the link added.
pub fn first_fit(inst: &Instance, tau_power: f64, order: FirstFitOrder) -> Result<Schedule> {
    let scheme = PowerScheme::new(tau_power, 1.0)?;
    let params = vec![
        ("tau".into(), fmt_f64(tau_power)),
        (
            "order".into(),
            match order {
                FirstFitOrder::IncreasingLength => "increasing-length".to_string(),
                FirstFitOrder::Custom(_) => "custom".to_string(),
            },
        ),
    ];
    if inst.is_empty() {
        return Ok(empty_schedule("first-fit", params));
    }
    let order_ids = match order {
        FirstFitOrder::IncreasingLength => {
            let lengths = inst.lengths();
            let mut ids: Vec<usize> = (0..inst.n()).collect();
            ids.sort_by(|&a, &b| lengths[a].partial_cmp(&lengths[b]).unwrap().then(a.cmp(&b)));
            ids
        }
        FirstFitOrder::Custom(ids) => {
            let mut seen = vec![false; inst.n()];
            for &i in &ids {
                if i >= inst.n() || seen[i] {
                    return Err(Error::InvalidParam(
                        "custom order must be a permutation of the link ids".into(),
                    ));
                }
                seen[i] = true;
            }
            if ids.len() != inst.n() {
                return Err(Error::InvalidParam(
                    "custom order must cover every link".into(),
                ));
            }
            ids
        }
    };
    let beta = inst.params().beta;
    let power = scheme.assignment(inst);
    let ctx = AffCtx::new(inst, &power, AffectanceMode::Normalized)?;
    let budget = (1.0 / beta) * (1.0 - BUDGET_SLACK);
    let sets = first_fit_slots(inst, &ctx, &order_ids, budget);
    let slots = finalize_slots(inst, &power, beta, sets)?;
    Ok(Schedule {
        algorithm: "first-fit".into(),
        params,
        power,
        mode: AffectanceMode::Normalized,
        slots,
        flags: Vec::new(),
        complete: true,
    })
}

/// Length-class baseline: splits the instance into dyadic length classes and
/// runs first-fit within each class independently, concatenating the slots.
pub fn length_class_schedule(inst: &Instance, tau_power: f64) -> Result<Schedule> {
    let scheme = PowerScheme::new(tau_power, 1.0)?;
    let params = vec![("tau".into(), fmt_f64(tau_power))];
    if inst.is_empty() {
        return Ok(empty_schedule("length-class", params));
    }
    let beta = inst.params().beta;
    let power = scheme.assignment(inst);
    let ctx = AffCtx::new(inst, &power, AffectanceMode::Normalized)?;
    let budget = (1.0 / beta) * (1.0 - BUDGET_SLACK);
    let lengths = inst.lengths();
    let mut sets = Vec::new();
    for class in inst.length_classes()? {
        let mut order = class;
        order.sort_by(|&a, &b| lengths[a].partial_cmp(&lengths[b]).unwrap().then(a.cmp(&b)));
        sets.extend(first_fit_slots(inst, &ctx, &order, budget));
    }
    let slots = finalize_slots(inst, &power, beta, sets)?;
    Ok(Schedule {
        algorithm: "length-class".into(),
        params,
        power,
        mode: AffectanceMode::Normalized,
        slots,
        flags: Vec::new(),
        complete: true,
    })
}

/// Per-round transmission probabilities for the randomized baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSequence {
    kind: ProbKind,
    cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum ProbKind {
    Constant(f64),
    Harmonic(f64),
    Custom(Vec<f64>),
}

impl ProbSequence {
    pub fn constant(p: f64, cap: usize) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParam(format!("probability must lie in (0, 1], got {p}")));
        }
        Self::with_cap(ProbKind::Constant(p), cap)
    }

    /// Round `r` transmits with probability `min(1, c / r)`.
    pub fn harmonic(c: f64, cap: usize) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParam(format!("harmonic constant must be positive, got {c}")));
        }
        Self::with_cap(ProbKind::Harmonic(c), cap)
    }

    /// Explicit per-round probabilities; the last entry repeats past the end.
    pub fn custom(list: Vec<f64>, cap: usize) -> Result<Self> {
        if list.is_empty() {
            return Err(Error::InvalidParam("custom probability list is empty".into()));
        }
        if list.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(Error::InvalidParam("probabilities must lie in (0, 1]".into()));
        }
        Self::with_cap(ProbKind::Custom(list), cap)
    }

    fn with_cap(kind: ProbKind, cap: usize) -> Result<Self> {
        if cap < 1 {
            return Err(Error::InvalidParam("round cap must be >= 1".into()));
        }
        Ok(ProbSequence { kind, cap })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn prob(&self, round: usize) -> f64 {
        match &self.kind {
            ProbKind::Constant(p) => *p,
            ProbKind::Harmonic(c) => (c / round as f64).min(1.0),
            ProbKind::Custom(v) => v[(round - 1).min(v.len() - 1)],
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            ProbKind::Constant(p) => format!("constant:{p}"),
            ProbKind::Harmonic(c) => format!("harmonic:{c}"),
            ProbKind::Custom(v) => format!(
                "custom:{}",
                v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

/// Randomized baseline: in each round every unscheduled link transmits
/// independently with the round's probability, and a transmitter succeeds if
/// its incoming affectance from the other transmitters stays within `1/beta`
/// under the `tau_power` scheme. Successful links form the round's slot.
/// Deterministic for a fixed seed; returns the rounds used. Hitting the cap
/// flags the schedule and leaves it incomplete.
pub fn randomized_schedule(
    inst: &Instance,
    tau_power: f64,
    probs: &ProbSequence,
    seed: u64,
) -> Result<(Schedule, usize)> {
    let scheme = PowerScheme::new(tau_power, 1.0)?;
    let params = vec![
        ("tau".into(), fmt_f64(tau_power)),
        ("probs".into(), probs.describe()),
        ("cap".into(), probs.cap.to_string()),
        ("seed".into(), seed.to_string()),
    ];
    if inst.is_empty() {
        return Ok((empty_schedule("randomized", params), 0));
    }
    let beta = inst.params().beta;
    let power = scheme.assignment(inst);
    let ctx = AffCtx::new(inst, &power, AffectanceMode::Normalized)?;

    // Group links with identical geometry (co-located copies): their mutual
    // affectance and their effect on third parties coincide, which collapses
    // the per-round cost to group counts.
    let group_of = geometry_groups(inst);
    let groups: usize = group_of.iter().copied().max().map_or(0, |g| g + 1);
    let mut rep = vec![usize::MAX; groups];
    for (link, &g) in group_of.iter().enumerate() {
        if rep[g] == usize::MAX {
            rep[g] = link;
        }
    }
    // cross[u][v]: affectance of one u-member onto one v-member;
    // within[v]: affectance between two distinct co-located v-members.
    let mut cross = vec![0.0; groups * groups];
    for u in 0..groups {
        for v in 0..groups {
            if u != v {
                cross[u * groups + v] = ctx.aff(inst, rep[u], rep[v]);
            }
        }
    }
    let within: Vec<f64> = (0..groups).map(|v| ctx.factor[rep[v]]).collect();

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut remaining: Vec<bool> = vec![true; inst.n()];
    let mut left = inst.n();
    let mut slots_sets: Vec<Vec<usize>> = Vec::new();
    let mut rounds_used = probs.cap;
    let mut transmitting: Vec<usize> = Vec::new();
    let mut count = vec![0usize; groups];
    for round in 1..=probs.cap {
        let p = probs.prob(round);
        transmitting.clear();
        count.iter_mut().for_each(|c| *c = 0);
        for link in 0..inst.n() {
            if remaining[link] && rng.random::<f64>() < p {
                transmitting.push(link);
                count[group_of[link]] += 1;
            }
        }
        let mut slot = Vec::new();
        for &link in &transmitting {
            let g = group_of[link];
            let mut sum = (count[g] - 1) as f64 * within[g];
            for (u, &c) in count.iter().enumerate() {
                if u != g && c > 0 {
                    sum += c as f64 * cross[u * groups + g];
                }
            }
            if sum <= 1.0 / beta {
                slot.push(link);
            }
        }
        if !slot.is_empty() {
            for &link in &slot {
                remaining[link] = false;
            }
            left -= slot.len();
            slots_sets.push(slot);
        }
        if left == 0 {
            rounds_used = round;
            break;
        }
    }
    let complete = left == 0;
    let slots = finalize_slots(inst, &power, beta, slots_sets)?;
    let mut flags = Vec::new();
    if !complete {
        flags.push(FLAG_CAP_REACHED.to_string());
    }
    Ok((
        Schedule {
            algorithm: "randomized".into(),
            params,
            power,
            mode: AffectanceMode::Normalized,
            slots,
            flags,
            complete,
        },
        rounds_used,
    ))
}

/// Groups link ids by identical sender/receiver geometry.
fn geometry_groups(inst: &Instance) -> Vec<usize> {
    use std::collections::BTreeMap;
    let mut key_of = BTreeMap::new();
    let mut group_of = vec![0usize; inst.n()];
    for (i, link) in inst.links().iter().enumerate() {
        let key: Vec<u64> = match inst.space() {
            crate::space::Space::Euclidean { points, .. } => points[link.sender]
                .iter()
                .chain(points[link.receiver].iter())
                .map(|c| c.to_bits())
                .collect(),
            crate::space::Space::Matrix(_) => {
                vec![link.sender as u64, link.receiver as u64]
            }
        };
        let next = key_of.len();
        group_of[i] = *key_of.entry(key).or_insert(next);
    }
    group_of
}

/// Power regime for the exact minimum-schedule oracle.
#[derive(Debug, Clone)]
pub enum PowerMode {
    Fixed(PowerScheme),
    Optimal,
}

const EXACT_SCHEDULE_CAP: usize = 15;

/// Exact minimum number of feasible slots by subset-feasibility enumeration
/// and set-partition dynamic programming over bitmasks. Feasibility of a
/// subset is monotone, so masks with an infeasible sub-mask are skipped
/// without running the checker.
pub fn exact_min_schedule(inst: &Instance, mode: PowerMode) -> Result<usize> {
    let n = inst.n();
    if n == 0 {
        return Ok(0);
    }
    if n > EXACT_SCHEDULE_CAP {
        return Err(Error::TooLarge { what: "exact_min_schedule", n, cap: EXACT_SCHEDULE_CAP });
    }
    let beta = inst.params().beta;
    let power = match &mode {
        PowerMode::Fixed(scheme) => Some(scheme.assignment(inst)),
        PowerMode::Optimal => None,
    };
    let full: usize = (1 << n) - 1;
    let mut feasible = vec![false; full + 1];
    let ids_of = |mask: usize| -> Vec<usize> {
        (0..n).filter(|i| mask & (1 << i) != 0).collect()
    };
    for mask in 1..=full {
        if mask.count_ones() == 1 {
            feasible[mask] = true;
            continue;
        }
        let mut mm = mask;
        let mut children_ok = true;
        while mm != 0 {
            let bit = mm & mm.wrapping_neg();
            if !feasible[mask ^ bit] {
                children_ok = false;
                break;
            }
            mm ^= bit;
        }
        if !children_ok {
            continue;
        }
        let ids = ids_of(mask);
        feasible[mask] = match &power {
            Some(pa) => check_feasible(inst, &ids, pa, beta, AffectanceMode::Normalized)?.feasible,
            None => exists_power(inst, &ids, AffectanceMode::Normalized)?.0,
        };
    }
    let mut dp = vec![usize::MAX; full + 1];
    dp[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let mut best = usize::MAX;
        let mut sub = mask;
        loop {
            if sub & low != 0 && feasible[sub] && dp[mask ^ sub] != usize::MAX {
                best = best.min(1 + dp[mask ^ sub]);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
        dp[mask] = best;
    }
    Ok(dp[full])
}

// ---------------------------------------------------------------------------
// Gamma calibration.
// ---------------------------------------------------------------------------

/// Geometric grid the calibration walks: 1, 1.5, 2, then x1.5 up to 512.
pub fn gamma_grid() -> Vec<f64> {
    let mut grid = vec![1.0, 1.5, 2.0];
    loop {
        let next = grid.last().unwrap() * 1.5;
        if next > 512.0 {
            break;
        }
        grid.push(next);
    }
    grid
}

/// Deterministic sample family used by calibration and the acceptance runs:
/// trial `index` draws a box instance whose size, length spread, and density
/// cycle through a fixed schedule.
pub fn calibration_sample(
    alpha: f64,
    beta: f64,
    dim: usize,
    seed: u64,
    index: u64,
) -> Result<Instance> {
    let n = 6 + ((index * 7) % 59) as usize;
    let len_max = 2f64.powi(1 + (index % 5) as i32);
    let side = len_max * (1.5 + (index % 7) as f64) * (n as f64).powf(1.0 / dim as f64) / 2.0;
    let cfg = RandomConfig {
        n,
        dim,
        side,
        len_min: 1.0,
        len_max,
        weights: WeightDist::Unit,
        params: SinrParams::new(alpha, beta, 0.0)?,
        seed: seed
            .wrapping_mul(0x9E3779B97F4A7C15)
            .wrapping_add(index.wrapping_mul(0xD1B54A32D192ED03)),
    };
    gen_random(&cfg)
}

/// Whether every greedy color class of the `(gamma, delta)` graph passes the
/// feasibility check under the `tau` scheme.
pub fn conflict_classes_feasible(
    inst: &Instance,
    gamma: f64,
    delta: f64,
    tau: f64,
) -> Result<bool> {
    if inst.is_empty() {
        return Ok(true);
    }
    let beta = inst.params().beta;
    let graph = build_graph(inst, ConflictParams::new(gamma, delta)?)?;
    let power = PowerScheme::new(tau, 1.0)?.assignment(inst);
    for class in color_classes(&greedy_color(&graph)) {
        if !check_feasible(inst, &class, &power, beta, AffectanceMode::Normalized)?.feasible {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest grid gamma for which every greedy color class of the conflict
/// graph is feasible under the `tau` scheme across `trials` random instances
/// of dimension `m`. Deterministic per seed.
pub fn calibrate_gamma(
    alpha: f64,
    m: usize,
    delta: f64,
    tau: f64,
    beta: f64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    match valid_tau_interval(alpha, m as f64, delta)? {
        None => {
            return Err(Error::EmptyTauInterval {
                delta,
                delta0: crate::feasibility::delta0(alpha, m as f64),
            })
        }
        Some((lo, hi)) => {
            if !(tau > lo && tau < hi) {
                return Err(Error::TauOutsideInterval { tau, lo, hi });
            }
        }
    }
    'grid: for gamma in gamma_grid() {
        for t in 0..trials {
            let inst = calibration_sample(alpha, beta, m, seed, t)?;
            if !conflict_classes_feasible(&inst, gamma, delta, tau)? {
                continue 'grid;
            }
        }
        return Ok(gamma);
    }
    Err(Error::GridExhausted(512.0))
}

/// Memo for calibration results, keyed by the full parameter tuple.
#[derive(Debug, Default)]
pub struct GammaCache {
    entries: HashMap<[u64; 5], f64>,
}

impl GammaCache {
    pub fn new() -> Self {
        Self::default()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn get_or_calibrate(
        &mut self,
        alpha: f64,
        m: usize,
        delta: f64,
        tau: f64,
        beta: f64,
        trials: u64,
        seed: u64,
    ) -> Result<f64> {
        let key = [
            alpha.to_bits(),
            m as u64,
            delta.to_bits(),
            tau.to_bits(),
            beta.to_bits(),
        ];
        if let Some(&g) = self.entries.get(&key) {
            return Ok(g);
        }
        let g = calibrate_gamma(alpha, m, delta, tau, beta, trials, seed)?;
        self.entries.insert(key, g);
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Link;
    use crate::space::Space;

    fn line(coords: &[(f64, f64)], alpha: f64, beta: f64) -> Instance {
        let mut points = Vec::new();
        let mut links = Vec::new();
        for &(s, r) in coords {
            let i = points.len();
            points.push(vec![s]);
            points.push(vec![r]);
            links.push(Link::new(i, i + 1));
        }
        Instance::new(
            Space::euclidean(1, points).unwrap(),
            links,
            SinrParams::new(alpha, beta, 0.0).unwrap(),
        )
        .unwrap()
    }

    fn far_apart(n: usize) -> Instance {
        let coords: Vec<(f64, f64)> = (0..n).map(|i| (1e6 * i as f64, 1e6 * i as f64 + 1.0)).collect();
        line(&coords, 3.0, 1.0)
    }

    fn colocated(n: usize, beta: f64) -> Instance {
        let coords: Vec<(f64, f64)> = (0..n).map(|_| (0.0, 1.0)).collect();
        line(&coords, 3.0, beta)
    }

    #[test]
    fn conflict_scheduler_trivial_cases() {
        let empty = Instance::new(
            Space::euclidean(1, vec![]).unwrap(),
            vec![],
            SinrParams::new(3.0, 1.0, 0.0).unwrap(),
        )
        .unwrap();
        let s = schedule_conflict(&empty, 2.0, 0.9, 0.8).unwrap();
        assert_eq!(s.slot_count(), 0);

        let single = line(&[(0.0, 1.0)], 3.0, 1.0);
        let s = schedule_conflict(&single, 2.0, 0.9, 0.8).unwrap();
        assert_eq!(s.slot_count(), 1);
        assert!(s.verified());
        assert!(s.re_verify(&single).unwrap());
        // beta = 1: the lower-bound diagnostic flag is raised
        assert!(s.flags.iter().any(|f| f == FLAG_LOWER_BOUND_NA));
    }

    #[test]
    fn conflict_scheduler_rejects_bad_tau() {
        let single = line(&[(0.0, 1.0)], 3.0, 1.0);
        // m=1, alpha=3: delta0 = 3/5; delta=0.5 -> empty interval
        assert!(matches!(
            schedule_conflict(&single, 2.0, 0.5, 0.8),
            Err(Error::EmptyTauInterval { .. })
        ));
        // delta=0.9: interval (0.4, 0.9); tau=0.95 outside
        assert!(matches!(
            schedule_conflict(&single, 2.0, 0.9, 0.95),
            Err(Error::TauOutsideInterval { .. })
        ));
    }

    #[test]
    fn conflict_scheduler_separates_colocated_links() {
        let inst = colocated(4, 1.5);
        let s = schedule_conflict(&inst, 2.0, 0.9, 0.8).unwrap();
        assert_eq!(s.slot_count(), 4);
        assert!(s.verified());
        assert!(s.re_verify(&inst).unwrap());
    }

    #[test]
    fn capacity_trivial_cases() {
        let mut single = line(&[(0.0, 1.0)], 3.0, 1.0);
        // re-weight to 7
        single = Instance::new(
            single.space().clone(),
            vec![Link::weighted(0, 1, 7.0)],
            single.params(),
        )
        .unwrap();
        let cap = wcapacity_conflict(&single, 2.0, 0.9, 0.8).unwrap();
        assert_eq!(cap.links, vec![0]);
        assert_eq!(cap.weight, 7.0);

        // two co-located links, weights 5 and 3: only the heavy one fits
        let space = Space::euclidean(1, vec![vec![0.0], vec![1.0], vec![0.0], vec![1.0]]).unwrap();
        let inst = Instance::new(
            space,
            vec![Link::weighted(0, 1, 5.0), Link::weighted(2, 3, 3.0)],
            SinrParams::new(3.0, 1.5, 0.0).unwrap(),
        )
        .unwrap();
        let cap = wcapacity_conflict(&inst, 2.0, 0.9, 0.8).unwrap();
        assert_eq!(cap.links, vec![0]);
        assert_eq!(cap.weight, 5.0);
    }

    #[test]
    fn first_fit_extremes() {
        let friendly = far_apart(6);
        let s = first_fit(&friendly, 0.0, FirstFitOrder::IncreasingLength).unwrap();
        assert_eq!(s.slot_count(), 1);
        assert!(s.re_verify(&friendly).unwrap());

        let hostile = colocated(5, 2.0);
        let s = first_fit(&hostile, 0.0, FirstFitOrder::IncreasingLength).unwrap();
        assert_eq!(s.slot_count(), 5);
    }

    #[test]
    fn first_fit_custom_order_validated() {
        let inst = far_apart(3);
        assert!(first_fit(&inst, 0.0, FirstFitOrder::Custom(vec![0, 0, 1])).is_err());
        assert!(first_fit(&inst, 0.0, FirstFitOrder::Custom(vec![2, 0, 1])).is_ok());
    }

    #[test]
    fn length_class_equals_first_fit_on_equilength() {
        let inst = far_apart(5); // all lengths equal
        let a = first_fit(&inst, 0.5, FirstFitOrder::IncreasingLength).unwrap();
        let b = length_class_schedule(&inst, 0.5).unwrap();
        assert_eq!(
            a.slots.iter().map(|s| s.links.clone()).collect::<Vec<_>>(),
            b.slots.iter().map(|s| s.links.clone()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn length_class_bounded_by_class_count() {
        // mutually feasible links spanning many dyadic classes
        let mut coords = Vec::new();
        let mut x = 0.0;
        for t in 0..11 {
            let l = 2.0_f64.powi(t);
            coords.push((x, x + l));
            x += l + 1e9; // far enough that everything is feasible together
        }
        let inst = line(&coords, 3.0, 1.0);
        let s = length_class_schedule(&inst, 0.5).unwrap();
        let classes = inst.length_classes().unwrap().len();
        assert_eq!(classes, 11);
        assert_eq!(s.slot_count(), classes);
        assert!(s.slot_count() >= classes);
    }

    #[test]
    fn randomized_single_link_first_round() {
        let inst = line(&[(0.0, 1.0)], 3.0, 1.0);
        let probs = ProbSequence::constant(1.0, 10).unwrap();
        let (s, rounds) = randomized_schedule(&inst, 0.0, &probs, 42).unwrap();
        assert_eq!(rounds, 1);
        assert_eq!(s.slot_count(), 1);
        assert!(s.complete);
    }

    #[test]
    fn randomized_colocated_pair_never_succeeds() {
        let inst = colocated(2, 2.0);
        let probs = ProbSequence::constant(1.0, 50).unwrap();
        let (s, rounds) = randomized_schedule(&inst, 0.0, &probs, 7).unwrap();
        assert_eq!(rounds, 50);
        assert!(!s.complete);
        assert!(s.flags.iter().any(|f| f == FLAG_CAP_REACHED));
        assert_eq!(s.slot_count(), 0);
    }

    #[test]
    fn randomized_is_reproducible() {
        let inst = far_apart(20);
        let probs = ProbSequence::constant(0.4, 100).unwrap();
        let (a, ra) = randomized_schedule(&inst, 0.0, &probs, 99).unwrap();
        let (b, rb) = randomized_schedule(&inst, 0.0, &probs, 99).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(
            a.slots.iter().map(|s| s.links.clone()).collect::<Vec<_>>(),
            b.slots.iter().map(|s| s.links.clone()).collect::<Vec<_>>()
        );
        let (c, _) = randomized_schedule(&inst, 0.0, &probs, 100).unwrap();
        // different seed almost surely schedules differently in some round
        let same = a.slots.iter().map(|s| &s.links).eq(c.slots.iter().map(|s| &s.links));
        assert!(!same || a.slot_count() == 1);
    }

    #[test]
    fn exact_min_schedule_extremes() {
        let friendly = far_apart(6);
        assert_eq!(
            exact_min_schedule(&friendly, PowerMode::Fixed(PowerScheme::uniform())).unwrap(),
            1
        );
        let hostile = colocated(4, 2.0);
        assert_eq!(
            exact_min_schedule(&hostile, PowerMode::Fixed(PowerScheme::uniform())).unwrap(),
            4
        );
        assert_eq!(exact_min_schedule(&hostile, PowerMode::Optimal).unwrap(), 4);
    }

    #[test]
    fn exact_min_schedule_bounds_greedy() {
        let mut state = 0xABCDEFu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for trial in 0..5 {
            let coords: Vec<(f64, f64)> = (0..8)
                .map(|_| {
                    let s = (next() % 4000) as f64 / 100.0;
                    let l = 1.0 + (next() % 100) as f64 / 100.0;
                    (s, s + l)
                })
                .collect();
            let inst = line(&coords, 3.0, 1.0);
            let opt = exact_min_schedule(&inst, PowerMode::Fixed(PowerScheme::uniform())).unwrap();
            let ff = first_fit(&inst, 0.0, FirstFitOrder::IncreasingLength).unwrap();
            assert!(opt <= ff.slot_count(), "trial {trial}");
            let opt_power = exact_min_schedule(&inst, PowerMode::Optimal).unwrap();
            assert!(opt_power <= opt);
        }
    }

    #[test]
    fn gamma_grid_shape() {
        let grid = gamma_grid();
        assert_eq!(&grid[..5], &[1.0, 1.5, 2.0, 3.0, 4.5]);
        assert!(*grid.last().unwrap() <= 512.0);
    }

    #[test]
    fn calibration_is_deterministic_and_beta_monotone() {
        let g1 = calibrate_gamma(3.0, 1, 0.9, 0.8, 1.0, 8, 5).unwrap();
        let g1b = calibrate_gamma(3.0, 1, 0.9, 0.8, 1.0, 8, 5).unwrap();
        assert_eq!(g1, g1b);
        assert!(g1 >= 1.0);
        let g2 = calibrate_gamma(3.0, 1, 0.9, 0.8, 2.0, 8, 5).unwrap();
        assert!(g2 >= g1);
        let mut cache = GammaCache::new();
        let c1 = cache.get_or_calibrate(3.0, 1, 0.9, 0.8, 1.0, 8, 5).unwrap();
        let c2 = cache.get_or_calibrate(3.0, 1, 0.9, 0.8, 1.0, 8, 5).unwrap();
        assert_eq!(c1, g1);
        assert_eq!(c2, g1);
    }
}
