//! Feasibility checking, signal strengthening, the tau-interval arithmetic,
//! and the optimal-power existence oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::power::{reception_factor, AffectanceMode, PowerAssignment};

/// Relative slack applied when greedy procedures admit a link against a
/// budget, so that an independent recomputation of the same sums cannot flip
/// the verdict through summation-order rounding.
pub(crate) const BUDGET_SLACK: f64 = 1e-12;

/// Per-link affectance sums of a set, with the margin to the `1/p` threshold.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub p: f64,
    pub worst_link: usize,
    pub margin: f64,
    pub per_link: Vec<LinkAffectance>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkAffectance {
    pub link: usize,
    pub sum: f64,
}

impl FeasibilityReport {
    /// Plain-text rendering; margins carry 12 significant digits.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(
            out,
            "feasible={} p={} worst_link={} margin={:.11e}",
            self.feasible, self.p, self.worst_link, self.margin
        )
        .unwrap();
        for row in &self.per_link {
            writeln!(out, "  link {} affectance {:.11e}", row.link, row.sum).unwrap();
        }
        out
    }
}

/// Internal snapshot for repeated affectance evaluation over one instance:
/// lengths, powers, and reception factors are materialized once.
pub(crate) struct AffCtx {
    pub alpha: f64,
    pub lengths: Vec<f64>,
    pub lt_alpha: Vec<f64>,
    pub powers: Vec<f64>,
    pub factor: Vec<f64>,
}

impl AffCtx {
    pub fn new(inst: &Instance, powers: &PowerAssignment, mode: AffectanceMode) -> Result<Self> {
        if powers.len() != inst.n() {
            return Err(Error::InvalidParam(format!(
                "assignment covers {} links, instance has {}",
                powers.len(),
                inst.n()
            )));
        }
        let alpha = inst.params().alpha;
        let lengths = inst.lengths();
        let lt_alpha = lengths.iter().map(|l| l.powf(alpha)).collect();
        let mut factor = Vec::with_capacity(inst.n());
        for i in 0..inst.n() {
            factor.push(reception_factor(inst, powers, i, mode)?);
        }
        Ok(AffCtx {
            alpha,
            lengths,
            lt_alpha,
            powers: powers.as_slice().to_vec(),
            factor,
        })
    }

    /// Affectance of `source` on `target`; zero for the self pair.
    pub fn aff(&self, inst: &Instance, source: usize, target: usize) -> f64 {
        if source == target {
            return 0.0;
        }
        let d = inst
            .sr_distance(source, target)
            .expect("ids validated at context construction");
        if d == 0.0 {
            return f64::INFINITY;
        }
        self.factor[target] * self.powers[source] * self.lt_alpha[target]
            / (self.powers[target] * d.powf(self.alpha))
    }
}

fn sorted_ids(inst: &Instance, set: &[usize]) -> Result<Vec<usize>> {
    let mut ids: Vec<usize> = set.to_vec();
    ids.sort_unstable();
    ids.dedup();
    for &i in &ids {
        inst.link(i)?;
    }
    Ok(ids)
}

/// Checks whether `set` is `p`-feasible under `powers`: every member's
/// incoming affectance sum must stay within `1/p`.
pub fn check_feasible(
    inst: &Instance,
    set: &[usize],
    powers: &PowerAssignment,
    p: f64,
    mode: AffectanceMode,
) -> Result<FeasibilityReport> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidParam(format!("p must be positive, got {p}")));
    }
    let ids = sorted_ids(inst, set)?;
    if ids.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let ctx = AffCtx::new(inst, powers, mode)?;
    let mut per_link = Vec::with_capacity(ids.len());
    let mut worst = ids[0];
    let mut worst_sum = f64::NEG_INFINITY;
    for &i in &ids {
        let mut sum = 0.0;
        for &j in &ids {
            sum += ctx.aff(inst, j, i);
        }
        if sum > worst_sum {
            worst_sum = sum;
            worst = i;
        }
        per_link.push(LinkAffectance { link: i, sum });
    }
    let margin = 1.0 / p - worst_sum;
    Ok(FeasibilityReport {
        feasible: margin >= 0.0,
        p,
        worst_link: worst,
        margin,
        per_link,
    })
}

/// Greedily splits `set` into parts that are `p`-feasible under `powers`,
/// processing links in non-increasing length order (ties by ascending id)
/// and placing each into the first part that keeps every member's incoming
/// and outgoing affectance sums within the `1/p` budget.
pub(crate) fn greedy_feasible_partition(
    inst: &Instance,
    set: &[usize],
    powers: &PowerAssignment,
    p: f64,
    mode: AffectanceMode,
) -> Result<Vec<Vec<usize>>> {
    let ids = sorted_ids(inst, set)?;
    let ctx = AffCtx::new(inst, powers, mode)?;
    let budget = (1.0 / p) * (1.0 - BUDGET_SLACK);

    let mut order = ids.clone();
    order.sort_by(|&a, &b| {
        ctx.lengths[b]
            .partial_cmp(&ctx.lengths[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    struct Part {
        members: Vec<usize>,
        incoming: Vec<f64>,
        outgoing: Vec<f64>,
    }
    let mut parts: Vec<Part> = Vec::new();

    'links: for &x in &order {
        'parts: for part in parts.iter_mut() {
            let mut in_x = 0.0;
            let mut out_x = 0.0;
            for (idx, &j) in part.members.iter().enumerate() {
                let a_xj = ctx.aff(inst, x, j);
                let a_jx = ctx.aff(inst, j, x);
                if part.incoming[idx] + a_xj > budget || part.outgoing[idx] + a_jx > budget {
                    continue 'parts;
                }
                in_x += a_jx;
                out_x += a_xj;
            }
            if in_x > budget || out_x > budget {
                continue 'parts;
            }
            for (idx, &j) in part.members.iter().enumerate() {
                part.incoming[idx] += ctx.aff(inst, x, j);
                part.outgoing[idx] += ctx.aff(inst, j, x);
            }
            part.members.push(x);
            part.incoming.push(in_x);
            part.outgoing.push(out_x);
            continue 'links;
        }
        parts.push(Part {
            members: vec![x],
            incoming: vec![0.0],
            outgoing: vec![0.0],
        });
    }

    Ok(parts
        .into_iter()
        .map(|p| {
            let mut m = p.members;
            m.sort_unstable();
            m
        })
        .collect())
}

/// Signal strengthening: partitions a verified `p`-feasible set into at most
/// `ceil(2 * p_target / p)` parts, each verified `p_target`-feasible. The
/// input not being `p`-feasible and the part bound being exceeded are
/// reported as distinct errors.
pub fn strengthen_partition(
    inst: &Instance,
    set: &[usize],
    powers: &PowerAssignment,
    p: f64,
    p_target: f64,
    mode: AffectanceMode,
) -> Result<Vec<Vec<usize>>> {
    if !(p_target.is_finite() && p_target > 0.0) {
        return Err(Error::InvalidParam(format!("p_target must be positive, got {p_target}")));
    }
    let input = check_feasible(inst, set, powers, p, mode)?;
    if !input.feasible {
        return Err(Error::NotPFeasible { p });
    }
    let parts = greedy_feasible_partition(inst, set, powers, p_target, mode)?;
    let bound = (2.0 * p_target / p).ceil() as usize;
    if parts.len() > bound {
        return Err(Error::PartitionBound { parts: parts.len(), bound });
    }
    for part in &parts {
        let rep = check_feasible(inst, part, powers, p_target, mode)?;
        if !rep.feasible {
            return Err(Error::VerificationFailed(format!(
                "strengthened part failed the {p_target}-feasibility recheck (margin {})",
                rep.margin
            )));
        }
    }
    Ok(parts)
}

/// Threshold `delta0 = (alpha - m + 1) / (2(alpha - m) + 1)` below which the
/// tau interval is empty.
pub fn delta0(alpha: f64, m: f64) -> f64 {
    (alpha - m + 1.0) / (2.0 * (alpha - m) + 1.0)
}

/// Open interval of power exponents `tau` for which independent sets of the
/// conflict graph with separation exponent `delta` are feasible:
/// `(1 - delta*(alpha-m)/alpha, 1 - (1-delta)*(alpha-m+1)/alpha)`.
/// Returns `None` when the interval is empty, which happens exactly when
/// `delta <= delta0(alpha, m)`.
pub fn valid_tau_interval(alpha: f64, m: f64, delta: f64) -> Result<Option<(f64, f64)>> {
    if !(m.is_finite() && m >= 1.0) {
        return Err(Error::InvalidParam(format!("doubling dimension must be >= 1, got {m}")));
    }
    if alpha <= m {
        return Err(Error::AlphaNotFading { alpha, m });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!("delta must lie in (0, 1), got {delta}")));
    }
    let lo = 1.0 - delta * (alpha - m) / alpha;
    let hi = 1.0 - (1.0 - delta) * (alpha - m + 1.0) / alpha;
    Ok(if lo < hi { Some((lo, hi)) } else { None })
}

// ---------------------------------------------------------------------------
// Optimal-power existence: monotone fixed-point iteration, cross-checkable
// against a spectral-radius test on the normalized gain matrix.
// ---------------------------------------------------------------------------

const FP_MAX_ITERS: usize = 10_000;
const FP_REL_TOL: f64 = 1e-10;
const FP_BLOWUP: f64 = 1e12;
const WITNESS_HEADROOM: f64 = 1e-6;

/// Decides whether some power assignment makes `set` feasible, iterating the
/// interference fixed point `P <- beta * (N * l^alpha + G P)` from the noise
/// floor. The iteration converges exactly when the set is feasible; on
/// success the returned assignment is verified by [`check_feasible`] at
/// `p = beta`. Noise-free instances are decided with a unit virtual noise
/// term, which changes only the scale of the witness, not feasibility.
pub fn exists_power(
    inst: &Instance,
    set: &[usize],
    mode: AffectanceMode,
) -> Result<(bool, Option<PowerAssignment>)> {
    let ids = sorted_ids(inst, set)?;
    if ids.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let params = inst.params();
    let alpha = params.alpha;
    let beta = params.beta;
    let noise_eff = if params.noise > 0.0 { params.noise } else { 1.0 };

    let m = ids.len();
    let lengths: Vec<f64> = ids
        .iter()
        .map(|&i| inst.link_length(i))
        .collect::<Result<_>>()?;
    // gain[i][j]: interference coupling from member j into member i's constraint
    let mut gain = vec![vec![0.0; m]; m];
    for (ti, &i) in ids.iter().enumerate() {
        let li_a = lengths[ti].powf(alpha);
        for (tj, &j) in ids.iter().enumerate() {
            if ti == tj {
                continue;
            }
            let d = inst.sr_distance(j, i)?;
            if d == 0.0 {
                return Ok((false, None)); // unbounded interference
            }
            gain[ti][tj] = beta * li_a / d.powf(alpha);
        }
    }
    let floor: Vec<f64> = lengths.iter().map(|l| beta * noise_eff * l.powf(alpha)).collect();
    let floor_max = floor.iter().cloned().fold(0.0, f64::max);

    let mut p = floor.clone();
    let mut deltas: Vec<f64> = Vec::with_capacity(FP_MAX_ITERS);
    let mut converged = false;
    for _ in 0..FP_MAX_ITERS {
        let mut q = floor.clone();
        let mut max_rel = 0.0_f64;
        let mut max_q = 0.0_f64;
        let mut max_delta = 0.0_f64;
        for i in 0..m {
            let mut acc = q[i];
            for j in 0..m {
                acc += gain[i][j] * p[j];
            }
            q[i] = acc;
            let delta = (q[i] - p[i]).abs();
            max_delta = max_delta.max(delta);
            max_rel = max_rel.max(delta / p[i]);
            max_q = max_q.max(q[i]);
        }
        p = q;
        deltas.push(max_delta);
        if !max_q.is_finite() || max_q > FP_BLOWUP * floor_max {
            return Ok((false, None));
        }
        if max_rel < FP_REL_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        // Near-critical spectral radius: classify by the trend of the
        // increments over the tail of the run.
        let tail = 2_000.min(deltas.len() / 2);
        let recent = deltas[deltas.len() - 1];
        let earlier = deltas[deltas.len() - 1 - tail];
        if recent >= earlier {
            return Ok((false, None));
        }
        // Shrinking increments: geometric tail, extrapolate to the fixed point.
        let ratio = (recent / earlier).powf(1.0 / tail as f64);
        if ratio < 1.0 {
            let boost = deltas[deltas.len() - 1] * ratio / (1.0 - ratio);
            for v in p.iter_mut() {
                *v += boost;
            }
        }
    }

    // Scale up slightly so the witness clears the threshold strictly, then
    // verify it end to end.
    let mut scale = 1.0 + WITNESS_HEADROOM;
    for _ in 0..3 {
        let mut powers = vec![0.0; inst.n()];
        for (t, &i) in ids.iter().enumerate() {
            powers[i] = p[t] * scale;
        }
        let all_lengths = inst.lengths();
        for (i, w) in powers.iter_mut().enumerate() {
            if *w == 0.0 {
                *w = beta * noise_eff * all_lengths[i].powf(alpha) * scale;
            }
        }
        let assignment = PowerAssignment::new(powers)?;
        let report = check_feasible(inst, &ids, &assignment, beta, mode)?;
        if report.feasible {
            return Ok((true, Some(assignment)));
        }
        scale *= 1.0 + 1e-3;
    }
    Ok((false, None))
}

/// Spectral radius of the normalized gain matrix `G[i][j] = l_i^alpha /
/// d(s_j, r_i)^alpha` over `set`, estimated to near machine precision by
/// repeated squaring (Gelfand's formula). Feasibility with unconstrained
/// power corresponds to `rho < 1/beta` (noise-free case).
pub fn spectral_radius_gain(inst: &Instance, set: &[usize]) -> Result<f64> {
    let ids = sorted_ids(inst, set)?;
    if ids.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let alpha = inst.params().alpha;
    let m = ids.len();
    let mut a = vec![0.0; m * m];
    for (ti, &i) in ids.iter().enumerate() {
        let li_a = inst.link_length(i)?.powf(alpha);
        for (tj, &j) in ids.iter().enumerate() {
            if ti == tj {
                continue;
            }
            let d = inst.sr_distance(j, i)?;
            if d == 0.0 {
                return Ok(f64::INFINITY);
            }
            a[ti * m + tj] = li_a / d.powf(alpha);
        }
    }
    Ok(spectral_radius(&mut a, m))
}

fn spectral_radius(a: &mut [f64], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let max0 = a.iter().cloned().fold(0.0, f64::max);
    if max0 == 0.0 {
        return 0.0;
    }
    for v in a.iter_mut() {
        *v /= max0;
    }
    let mut log_scale = max0.ln();
    let mut weight = 1.0_f64; // log_scale approximates ln ||A^(2^k)|| / 2^k via weight
    let squarings = 50;
    let mut cur = a.to_vec();
    let mut next = vec![0.0; n * n];
    for _ in 0..squarings {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += cur[i * n + k] * cur[k * n + j];
                }
                next[i * n + j] = acc;
            }
        }
        let m = next.iter().cloned().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0; // nilpotent
        }
        for v in next.iter_mut() {
            *v /= m;
        }
        std::mem::swap(&mut cur, &mut next);
        weight *= 2.0;
        log_scale += m.ln() / weight;
    }
    log_scale.exp()
}

/// Noise-free feasibility verdict from the spectral test, paired with the
/// radius estimate: feasible iff `rho(G) < 1/beta`.
pub fn spectral_feasible(inst: &Instance, set: &[usize]) -> Result<(bool, f64)> {
    let rho = spectral_radius_gain(inst, set)?;
    Ok((rho < 1.0 / inst.params().beta, rho))
}
