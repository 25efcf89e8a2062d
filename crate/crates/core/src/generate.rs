//! Deterministic instance constructions: random fading-metric instances, the
//! adversarial line trees for the first-fit and randomized baselines, the
//! weighted planar grid, the general-metric weighted family, and the
//! weak-link reduction transform.
//!
//! Placements that would otherwise sit exactly on an independence threshold
//! are pulled inward by a small relative margin so that every intended
//! conflict is strict under floating point; the pullback strengthens, never
//! weakens, the blocking properties the constructions exist to exhibit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::instance::{Instance, Link, SinrParams};
use crate::power::{affectance, AffectanceMode, PowerAssignment};
use crate::space::{DistanceMatrix, Space};

const EDGE_PULLBACK: f64 = 1e-9;

/// Weight distribution for random instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDist {
    Unit,
    Uniform(f64, f64),
}

/// Configuration for [`gen_random`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomConfig {
    pub n: usize,
    pub dim: usize,
    pub side: f64,
    pub len_min: f64,
    pub len_max: f64,
    pub weights: WeightDist,
    pub params: SinrParams,
    pub seed: u64,
}

impl RandomConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParam("dimension must be >= 1".into()));
        }
        if !(self.side.is_finite() && self.side > 0.0) {
            return Err(Error::InvalidParam("box side must be positive".into()));
        }
        if !(self.len_min > 0.0 && self.len_max >= self.len_min) {
            return Err(Error::InvalidParam("need 0 < len_min <= len_max".into()));
        }
        if let WeightDist::Uniform(a, b) = self.weights {
            if !(a > 0.0 && b >= a) {
                return Err(Error::InvalidParam("need 0 < a <= b for uniform weights".into()));
            }
        }
        Ok(())
    }
}

/// Uniform random instance in a box: senders uniform, lengths uniform in the
/// configured range, receiver direction uniform on the sphere. Bit-identical
/// for a fixed seed.
pub fn gen_random(cfg: &RandomConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut points = Vec::with_capacity(2 * cfg.n);
    let mut links = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let sender: Vec<f64> = (0..cfg.dim).map(|_| rng.random::<f64>() * cfg.side).collect();
        let len = cfg.len_min + rng.random::<f64>() * (cfg.len_max - cfg.len_min);
        let dir = random_direction(&mut rng, cfg.dim);
        let receiver: Vec<f64> = sender.iter().zip(&dir).map(|(s, d)| s + len * d).collect();
        let weight = match cfg.weights {
            WeightDist::Unit => 1.0,
            WeightDist::Uniform(a, b) => a + rng.random::<f64>() * (b - a),
        };
        let si = points.len();
        points.push(sender);
        points.push(receiver);
        links.push(Link::weighted(si, si + 1, weight));
    }
    Instance::new(Space::euclidean(cfg.dim, points)?, links, cfg.params)
}

fn random_direction(rng: &mut ChaCha12Rng, dim: usize) -> Vec<f64> {
    if dim == 1 {
        return vec![if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

// ---------------------------------------------------------------------------
// First-fit adversarial tree on the line.
// ---------------------------------------------------------------------------

/// Line realization of the layered binary tree that defeats first-fit under
/// the `P_delta` scheme. Layer-`t` nodes carry links of length `x^(k-t)`;
/// each node has one child in every layer below it. A child sits to the
/// right of its parent's receiver within the gap `l_parent^(1-delta) *
/// l_child^delta`, which pins its interference on the parent at (just above)
/// the SINR threshold; children are packed right-anchored, shorter ones
/// pulled left just far enough to clear the longer siblings' subtrees.
/// Returns `2^k` links with length ratio exactly `x^k`.
pub fn gen_firstfit_tree(k: u32, delta: f64, x: Option<f64>, alpha: f64) -> Result<Instance> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParam(format!("delta must lie in [0, 1), got {delta}")));
    }
    if k > 22 {
        return Err(Error::TooLarge { what: "gen_firstfit_tree", n: 1 << k, cap: 1 << 22 });
    }
    let bound = 16f64.powf(1.0 / (1.0 - delta));
    let x = match x {
        Some(v) => {
            if v <= bound {
                return Err(Error::InvalidParam(format!(
                    "x = {v} is below the construction bound {bound}"
                )));
            }
            v
        }
        None => bound.floor() + 1.0,
    };
    let k = k as usize;
    let len: Vec<f64> = (0..=k).map(|t| x.powi((k - t) as i32)).collect();
    // For delta <= 1/2 the nominal parent-child gap coincides with the
    // separation threshold the pair is meant to violate. With delta = 0 and
    // integer x all coordinates are exact integers, so the boundary is
    // deterministic; otherwise pull gaps in by a relative 1e-4, which beats
    // the coordinate cancellation error at any supported depth.
    let pull = if delta == 0.0 || delta >= 0.55 { 1.0 } else { 1.0 - 1e-4 };
    // extent[t]: width of the subtree of a layer-t node, from its sender to
    // the rightmost point below it (the longest child anchors the right end).
    let mut extent = vec![0.0; k + 1];
    extent[k] = len[k];
    for t in (0..k).rev() {
        extent[t] = len[t] + len[t] * x.powf(-delta) * pull + extent[t + 1];
        if extent[t] > 4.0 * len[t] {
            return Err(Error::ConstraintUnsatisfiable(format!(
                "subtree extent {} exceeds 4x the link length {} at layer {t}",
                extent[t], len[t]
            )));
        }
    }

    struct Builder<'a> {
        len: &'a [f64],
        extent: &'a [f64],
        delta: f64,
        pull: f64,
        k: usize,
        points: Vec<Vec<f64>>,
        links: Vec<Link>,
    }
    impl Builder<'_> {
        fn place(&mut self, layer: usize, s: f64) -> Result<()> {
            let r = s + self.len[layer];
            let pi = self.points.len();
            self.points.push(vec![s]);
            self.points.push(vec![r]);
            self.links.push(Link::new(pi, pi + 1));
            if layer == self.k {
                return Ok(());
            }
            // child layers k (shortest) .. layer+1 (longest), right-anchored
            let child_layers: Vec<usize> = ((layer + 1)..=self.k).rev().collect();
            let q = child_layers.len();
            let mut gaps = vec![0.0; q];
            for j in (0..q).rev() {
                let c = child_layers[j];
                let nominal = self.len[layer].powf(1.0 - self.delta)
                    * self.len[c].powf(self.delta)
                    * self.pull;
                gaps[j] = if j + 1 == q {
                    nominal
                } else {
                    let c_right = child_layers[j + 1];
                    let limit = gaps[j + 1] - 2.0 * self.len[c_right] - self.extent[c];
                    nominal.min(limit)
                };
                if gaps[j] <= 0.0 {
                    return Err(Error::ConstraintUnsatisfiable(format!(
                        "children of a layer-{layer} node do not fit; increase x"
                    )));
                }
            }
            for (j, &c) in child_layers.iter().enumerate() {
                self.place(c, r + gaps[j])?;
            }
            Ok(())
        }
    }
    let mut b =
        Builder { len: &len, extent: &extent, delta, pull, k, points: Vec::new(), links: Vec::new() };
    b.place(0, 0.0)?;
    debug_assert_eq!(b.links.len(), 1usize << k);
    Instance::new(
        Space::euclidean(1, b.points)?,
        b.links,
        SinrParams::new(alpha, 1.0, 0.0)?,
    )
}

/// Tree structure of [`gen_firstfit_tree`]: `parents[v]` is the tree parent
/// of the node carrying link `v` (root maps to itself). Mirrors the id order
/// the generator emits, so tests can separate adjacent from non-adjacent
/// pairs.
pub fn firstfit_tree_parents(k: u32) -> Vec<usize> {
    let k = k as usize;
    let mut parents = Vec::with_capacity(1 << k);
    fn rec(layer: usize, k: usize, parent: usize, out: &mut Vec<usize>) {
        let me = out.len();
        out.push(parent);
        for c in ((layer + 1)..=k).rev() {
            rec(c, k, me, out);
        }
    }
    rec(0, k, 0, &mut parents);
    parents
}

// ---------------------------------------------------------------------------
// Randomized-baseline adversarial tree on the line.
// ---------------------------------------------------------------------------

/// Configuration for [`gen_randomized_tree`].
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedTreeConfig {
    /// Tree height; the root is level 0, leaves level `levels`.
    pub levels: u32,
    /// Fanout exponent `b`: the arity is `ceil(log2(n)^b)`.
    pub fanout_exp: f64,
    /// Number of identical co-located copies per tree node.
    pub copies: usize,
    /// Separation exponent of the power scheme the construction targets.
    pub delta: f64,
    pub alpha: f64,
    /// SINR threshold embedded in the instance. Must exceed 1 so that
    /// co-located copies genuinely collide.
    pub beta: f64,
    /// Minimum sibling separation in units of the child length; raising it
    /// forces a larger level-ratio exponent so that conflict-graph slots stay
    /// proportional to the copy count.
    pub min_sep: f64,
}

impl Default for RandomizedTreeConfig {
    fn default() -> Self {
        RandomizedTreeConfig {
            levels: 1,
            fanout_exp: 1.0,
            copies: 1,
            delta: 0.5,
            alpha: 3.0,
            beta: 2.0,
            min_sep: 3.0,
        }
    }
}

/// Summary of a generated randomized-tree instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedTreeShape {
    pub fanout: usize,
    pub tree_size: usize,
    pub n: usize,
    pub level_ratio_exp: u32,
    pub lengths: Vec<f64>,
}

/// Complete `ceil(log2(n)^b)`-ary layered line construction: level-`t` links
/// shrink by `2^(1/delta) * log2(n)^(d(t+1))` per level, every node's
/// children sit in a window just inside its receiver, and each link is
/// replaced by `copies` identical co-located copies. The four window
/// constraints (sibling separation, window depth bounds, sender clearance)
/// are verified for every parent group; the level-ratio exponent `d` starts
/// at `ceil(2b/(alpha*delta))` and is raised until the windows fit.
pub fn gen_randomized_tree(cfg: &RandomizedTreeConfig) -> Result<(Instance, RandomizedTreeShape)> {
    if cfg.levels < 1 {
        return Err(Error::InvalidParam("levels must be >= 1".into()));
    }
    if cfg.fanout_exp < 1.0 {
        return Err(Error::InvalidParam("fanout exponent must be >= 1".into()));
    }
    if cfg.copies < 1 {
        return Err(Error::InvalidParam("copies must be >= 1".into()));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidParam(format!("delta must lie in (0, 1), got {}", cfg.delta)));
    }
    if cfg.beta <= 1.0 {
        return Err(Error::InvalidParam(
            "beta must exceed 1 so identical copies collide".into(),
        ));
    }
    if cfg.min_sep < 2.0 {
        return Err(Error::InvalidParam("min_sep must be >= 2".into()));
    }
    let levels = cfg.levels as usize;

    // Self-consistent fanout: F = ceil(log2(n)^b) with n = copies * tree size.
    let tree_size = |f: usize| -> usize {
        let mut total = 1usize;
        let mut level = 1usize;
        for _ in 0..levels {
            level = level.saturating_mul(f);
            total = total.saturating_add(level);
        }
        total
    };
    let mut fanout = 2usize;
    for _ in 0..64 {
        let n = cfg.copies * tree_size(fanout);
        let next = (((n.max(4) as f64).log2()).powf(cfg.fanout_exp)).ceil() as usize;
        let next = next.max(2);
        if next == fanout {
            break;
        }
        fanout = next;
    }
    let size = tree_size(fanout);
    let n = cfg.copies * size;
    if n > 2_000_000 {
        return Err(Error::TooLarge { what: "gen_randomized_tree", n, cap: 2_000_000 });
    }
    let logn = (n as f64).log2();
    let c = 2f64.powf(1.0 / cfg.delta);

    let d0 = (2.0 * cfg.fanout_exp / (cfg.alpha * cfg.delta)).ceil() as u32;
    let mut chosen = None;
    'fit: for d in d0..(d0 + 64) {
        let mut lengths = vec![0.0; levels + 1];
        lengths[levels] = 1.0;
        for t in (0..levels).rev() {
            lengths[t] = c * lengths[t + 1] * logn.powi((d * (t as u32 + 1)) as i32);
            if !lengths[t].is_finite() {
                continue 'fit;
            }
        }
        let ok = (0..levels).all(|t| {
            let w = lengths[t].powf(1.0 - cfg.delta) * lengths[t + 1].powf(cfg.delta);
            let spacing = (w * (1.0 - EDGE_PULLBACK) - w / 2.0) / (fanout.max(2) - 1) as f64;
            spacing - lengths[t + 1] >= cfg.min_sep * lengths[t + 1]
                && w + lengths[t + 1] <= lengths[t] / 2.0
        });
        if ok {
            chosen = Some((d, lengths));
            break;
        }
    }
    let (d, lengths) = chosen.ok_or_else(|| {
        Error::ConstraintUnsatisfiable(
            "no level-ratio exponent satisfies the window constraints at this size".into(),
        )
    })?;

    struct Builder<'a> {
        cfg: &'a RandomizedTreeConfig,
        lengths: &'a [f64],
        fanout: usize,
        levels: usize,
        points: Vec<Vec<f64>>,
        links: Vec<Link>,
    }
    impl Builder<'_> {
        fn emit(&mut self, s: f64, r: f64) {
            for _ in 0..self.cfg.copies {
                let pi = self.points.len();
                self.points.push(vec![s]);
                self.points.push(vec![r]);
                self.links.push(Link::new(pi, pi + 1));
            }
        }

        /// Places a level-`t` node with sender `s` and receiver `r`; its
        /// children sit in a window just inside `r`, their bodies extending
        /// `dir_in` (the direction from `r` back toward `s`), so each child's
        /// sender is the endpoint nearest the parent's receiver.
        fn place(&mut self, t: usize, s: f64, r: f64, dir_in: f64) -> Result<()> {
            self.emit(s, r);
            if t == self.levels {
                return Ok(());
            }
            let l = self.lengths[t];
            let lc = self.lengths[t + 1];
            let w = l.powf(1.0 - self.cfg.delta) * lc.powf(self.cfg.delta);
            if w + lc > l / 2.0 {
                return Err(Error::ConstraintUnsatisfiable(
                    "child window reaches past half of the parent link".into(),
                ));
            }
            let w_eff = w * (1.0 - EDGE_PULLBACK);
            let spacing = (w_eff - w / 2.0) / (self.fanout - 1) as f64;
            if spacing - lc < 2.0 * lc {
                return Err(Error::ConstraintUnsatisfiable(
                    "sibling windows cannot hold the fanout at separation 2".into(),
                ));
            }
            for j in 0..self.fanout {
                let offset = w_eff - j as f64 * spacing;
                debug_assert!(offset >= w / 2.0 - 1e-9 * w && offset <= w);
                let sc = r + dir_in * offset;
                let rc = sc + dir_in * lc;
                self.place(t + 1, sc, rc, -dir_in)?;
            }
            Ok(())
        }
    }

    let mut b = Builder {
        cfg,
        lengths: &lengths,
        fanout,
        levels,
        points: Vec::new(),
        links: Vec::new(),
    };
    // root: sender at 0, receiver at l_0; the child window opens leftward
    b.place(0, 0.0, lengths[0], -1.0)?;
    debug_assert_eq!(b.links.len(), n);
    let inst = Instance::new(
        Space::euclidean(1, b.points)?,
        b.links,
        SinrParams::new(cfg.alpha, cfg.beta, 0.0)?,
    )?;
    verify_randomized_tree_constraints(&inst, cfg, &lengths, fanout)?;
    Ok((inst, RandomizedTreeShape { fanout, tree_size: size, n, level_ratio_exp: d, lengths }))
}

/// Post-construction check of the four window constraints for every
/// parent-children group, driven purely by geometry.
fn verify_randomized_tree_constraints(
    inst: &Instance,
    cfg: &RandomizedTreeConfig,
    lengths: &[f64],
    fanout: usize,
) -> Result<()> {
    let lens = inst.lengths();
    let level_of = |l: f64| -> usize {
        lengths
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - l).abs().partial_cmp(&(b.1 - l).abs()).unwrap())
            .unwrap()
            .0
    };
    // group representative links (first copy of each node), keyed by level
    let mut reps: Vec<Vec<usize>> = vec![Vec::new(); lengths.len()];
    let mut i = 0;
    while i < inst.n() {
        reps[level_of(lens[i])].push(i);
        i += cfg.copies;
    }
    for t in 0..(lengths.len() - 1) {
        let w = lengths[t].powf(1.0 - cfg.delta) * lengths[t + 1].powf(cfg.delta);
        for &p in &reps[t] {
            let rp = inst.link(p)?.receiver;
            let sp = inst.link(p)?.sender;
            // children of p: level t+1 reps whose window anchor is rp
            let mut kids: Vec<usize> = Vec::new();
            for &c in &reps[t + 1] {
                let d = dist_link_point(inst, c, rp);
                if d <= w * (1.0 + 1e-9) {
                    kids.push(c);
                }
            }
            if kids.len() != fanout {
                return Err(Error::ConstraintUnsatisfiable(format!(
                    "parent group at level {t} resolved {} children, expected {fanout}",
                    kids.len()
                )));
            }
            for (a, &ca) in kids.iter().enumerate() {
                let d_r = dist_link_point(inst, ca, rp);
                if !(d_r >= w / 2.0 * (1.0 - 1e-12) && d_r <= w) {
                    return Err(Error::ConstraintUnsatisfiable(format!(
                        "child-receiver distance {d_r} outside [{}, {w}]",
                        w / 2.0
                    )));
                }
                let d_s = dist_link_point(inst, ca, sp);
                if d_s < lengths[t] / 2.0 {
                    return Err(Error::ConstraintUnsatisfiable(
                        "child too close to the parent sender".into(),
                    ));
                }
                for &cb in kids.iter().skip(a + 1) {
                    if inst.link_gap(ca, cb)? < 2.0 * lengths[t + 1] {
                        return Err(Error::ConstraintUnsatisfiable(
                            "sibling links closer than twice their length".into(),
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn dist_link_point(inst: &Instance, link: usize, point: usize) -> f64 {
    let l = inst.link(link).unwrap();
    inst.space()
        .distance(l.sender, point)
        .min(inst.space().distance(l.receiver, point))
}

// ---------------------------------------------------------------------------
// Weighted planar hard instance.
// ---------------------------------------------------------------------------

/// Recursive weighted plane construction: level-`t` main link of length
/// `(3q)^t` and weight `q^(2t)`, with a `q x q` grid of level-`(t-1)`
/// sub-instances stacked above it. Grid pitches carry small pads (x pitch
/// `3*l`, a half-length base pad, and a virtual half-height for single
/// links) so that all pairs are strictly separation-1 independent; the
/// bounding-height invariant `h_t <= 2*l_t` is asserted.
pub fn gen_weighted_plane(t: u32, q: u32, alpha: f64) -> Result<Instance> {
    if q < 2 {
        return Err(Error::InvalidParam(format!("q must be >= 2, got {q}")));
    }
    let t = t as usize;
    let q = q as usize;
    // n_t = 1 + q^2 * n_{t-1}
    let mut n = 1usize;
    for _ in 0..t {
        n = n.saturating_mul(q * q).saturating_add(1);
    }
    if n > 200_000 {
        return Err(Error::TooLarge { what: "gen_weighted_plane", n, cap: 200_000 });
    }
    let mut len = vec![0.0; t + 1];
    let mut height = vec![0.0; t + 1];
    let mut width = vec![0.0; t + 1];
    for level in 0..=t {
        len[level] = (3.0 * q as f64).powi(level as i32);
        if level == 0 {
            height[0] = 0.5 * len [0];
            width[0] = len[0];
        } else {
            height[level] = len[level] + q as f64 * (len[level - 1] + height[level - 1]);
            width[level] = 3.0 * (q as f64 - 1.0) * len[level - 1] + width[level - 1];
            if height[level] > 2.0 * len[level] {
                return Err(Error::ConstraintUnsatisfiable(format!(
                    "height {} exceeds twice the main length {} at level {level}",
                    height[level], len[level]
                )));
            }
            if width[level] > len[level] {
                return Err(Error::ConstraintUnsatisfiable(format!(
                    "grid width {} exceeds the main length {} at level {level}",
                    width[level], len[level]
                )));
            }
        }
    }

    let mut points = Vec::with_capacity(2 * n);
    let mut links = Vec::with_capacity(n);
    #[allow(clippy::too_many_arguments)]
    fn rec(
        level: usize,
        ox: f64,
        oy: f64,
        q: usize,
        len: &[f64],
        height: &[f64],
        points: &mut Vec<Vec<f64>>,
        links: &mut Vec<Link>,
    ) {
        let pi = points.len();
        points.push(vec![ox, oy]);
        points.push(vec![ox + len[level], oy]);
        links.push(Link::weighted(pi, pi + 1, (q as f64).powi(2 * level as i32)));
        if level == 0 {
            return;
        }
        let pitch_y = len[level - 1] + height[level - 1];
        for gi in 0..q {
            for gj in 0..q {
                rec(
                    level - 1,
                    ox + 3.0 * gi as f64 * len[level - 1],
                    oy + len[level] + 0.5 * len[level - 1] + gj as f64 * pitch_y,
                    q,
                    len,
                    height,
                    points,
                    links,
                );
            }
        }
    }
    rec(t, 0.0, 0.0, q, &len, &height, &mut points, &mut links);
    debug_assert_eq!(links.len(), n);
    Instance::new(
        Space::euclidean(2, points)?,
        links,
        SinrParams::new(alpha, 1.0, 0.0)?,
    )
}

// ---------------------------------------------------------------------------
// General-metric weighted family.
// ---------------------------------------------------------------------------

/// Equilength links in an explicit (non-fading) metric: set `k` holds
/// `4^(k-1)` links of weight `1/4^(k-1)`, every inter-link node distance is
/// `t_k + t_k'` with `t_k = (gamma_m * 4^(k-1))^(1/alpha)`. Total weight is
/// `k_sets`; the power assignment `P(i) = 2^-k` keeps the whole set feasible
/// while any uniform-power subset can carry only bounded weight.
pub fn gen_general_metric(k_sets: u32, gamma_m: f64, alpha: f64) -> Result<Instance> {
    if k_sets < 1 {
        return Err(Error::InvalidParam("need at least one set".into()));
    }
    if k_sets > 7 {
        let n = (4usize.pow(k_sets) - 1) / 3;
        return Err(Error::TooLarge { what: "gen_general_metric", n, cap: (4usize.pow(7) - 1) / 3 });
    }
    if gamma_m < 6.0 {
        return Err(Error::InvalidParam(format!("gamma must be >= 6, got {gamma_m}")));
    }
    if alpha <= 1.0 {
        return Err(Error::InvalidParam(format!("alpha must exceed 1, got {alpha}")));
    }
    let mut set_of = Vec::new();
    let mut radius = Vec::new();
    for k in 1..=k_sets {
        let count = 4usize.pow(k - 1);
        let t_k = (gamma_m * count as f64).powf(1.0 / alpha);
        for _ in 0..count {
            set_of.push(k);
            radius.push(t_k);
        }
    }
    let n = set_of.len();
    let np = 2 * n;
    let mut upper = Vec::with_capacity(np * (np - 1) / 2);
    for a in 0..np {
        for b in (a + 1)..np {
            let (la, lb) = (a / 2, b / 2);
            upper.push(if la == lb { 1.0 } else { radius[la] + radius[lb] });
        }
    }
    let space = Space::Matrix(DistanceMatrix::new(np, upper)?);
    let links = (0..n)
        .map(|i| Link::weighted(2 * i, 2 * i + 1, 1.0 / 4f64.powi(set_of[i] as i32 - 1)))
        .collect();
    Instance::new(space, links, SinrParams::new(alpha, 1.0, 0.0)?)
}

/// The feasibility witness of the general-metric family: `P(i) = 2^-k` for
/// links of set `k`.
pub fn general_metric_witness(k_sets: u32) -> Result<PowerAssignment> {
    if k_sets < 1 {
        return Err(Error::InvalidParam("need at least one set".into()));
    }
    let mut powers = Vec::new();
    for k in 1..=k_sets {
        let count = 4usize.pow(k - 1);
        powers.extend(std::iter::repeat_n(0.5f64.powi(k as i32), count));
    }
    PowerAssignment::new(powers)
}

// ---------------------------------------------------------------------------
// Weak-link reduction.
// ---------------------------------------------------------------------------

/// Configuration for [`weaken`]: a maximum power and the oblivious scheme
/// exponent the reduced instance targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLinkConfig {
    pub p_max: f64,
    pub tau: f64,
}

/// Effective length `e(x) = c(x)^(1/alpha) * x` of a link of length `x`
/// under maximum power.
pub fn effective_length(x: f64, l_max: f64, alpha: f64) -> f64 {
    let c = 1.0 / (1.0 - (x / l_max).powf(alpha));
    c.powf(1.0 / alpha) * x
}

/// Closed-form inverse of [`effective_length`]:
/// `f(y) = y / (1 + (y/l_max)^alpha)^(1/alpha)`.
pub fn effective_length_inverse(y: f64, l_max: f64, alpha: f64) -> f64 {
    y / (1.0 + (y / l_max).powf(alpha)).powf(1.0 / alpha)
}

/// Maps an instance onto weak links only: the whole length range is squeezed
/// into `[l_max / 2^(1/alpha), l_max)` where `l_max = (P_max / (beta N))^(1/alpha)`,
/// sender positions scale by `X = 2^(1/alpha) * lhat / l_min` and every
/// receiver sits at horizontal offset `f(X * l)` from its sender.
pub fn weaken(inst: &Instance, cfg: &WeakLinkConfig) -> Result<Instance> {
    let params = inst.params();
    if params.noise <= 0.0 {
        return Err(Error::NoiseRequired);
    }
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    if !(0.0..1.0).contains(&cfg.tau) {
        return Err(Error::InvalidParam(format!("tau must lie in [0, 1), got {}", cfg.tau)));
    }
    let dim = match inst.space() {
        Space::Euclidean { dim, .. } if *dim <= 2 => *dim,
        Space::Euclidean { .. } => {
            return Err(Error::InvalidParam("weaken expects a 1-D or 2-D euclidean source".into()))
        }
        Space::Matrix(_) => {
            return Err(Error::InvalidParam("weaken expects a euclidean source".into()))
        }
    };
    let lengths = inst.lengths();
    let l_min = lengths.iter().cloned().fold(f64::MAX, f64::min);
    if cfg.p_max <= params.beta * params.noise * l_min.powf(params.alpha) {
        return Err(Error::InvalidParam(
            "p_max must exceed beta * noise * (min source length)^alpha".into(),
        ));
    }
    let l_max = (cfg.p_max / (params.beta * params.noise)).powf(1.0 / params.alpha);
    let l_hat = l_max / 2f64.powf(1.0 / params.alpha);
    let x_scale = 2f64.powf(1.0 / params.alpha) * l_hat / l_min;

    let mut points = Vec::with_capacity(2 * inst.n());
    let mut links = Vec::with_capacity(inst.n());
    for (i, link) in inst.links().iter().enumerate() {
        let s_old = match inst.space() {
            Space::Euclidean { points, .. } => points[link.sender].clone(),
            Space::Matrix(_) => unreachable!(),
        };
        let sx = s_old[0] * x_scale;
        let sy = if dim == 2 { s_old[1] * x_scale } else { 0.0 };
        let l_new = effective_length_inverse(x_scale * lengths[i], l_max, params.alpha);
        if !(l_new >= l_hat * (1.0 - 1e-12) && l_new < l_max) {
            return Err(Error::VerificationFailed(format!(
                "reduced length {l_new} escaped the weak band [{l_hat}, {l_max})"
            )));
        }
        let pi = points.len();
        points.push(vec![sx, sy]);
        points.push(vec![sx + l_new, sy]);
        links.push(Link::weighted(pi, pi + 1, link.weight));
    }
    Instance::new(Space::euclidean(2, points)?, links, params)
}

/// Measures, over all ordered pairs of a weak instance, the ratio of
/// exact-mode uniform-power affectance to exact-mode `P_tau` affectance with
/// both schemes pinned to `p_max` at length `l_max`. Returns
/// `(band, min_ratio, max_ratio)` where `band = max(max, 1/min)`.
pub fn weak_ratio_band(inst: &Instance, cfg: &WeakLinkConfig) -> Result<(f64, f64, f64)> {
    let params = inst.params();
    if params.noise <= 0.0 {
        return Err(Error::NoiseRequired);
    }
    let l_max = (cfg.p_max / (params.beta * params.noise)).powf(1.0 / params.alpha);
    let uniform = PowerAssignment::uniform(inst.n(), cfg.p_max)?;
    let scale = cfg.p_max / l_max.powf(cfg.tau * params.alpha);
    let tau_powers = PowerAssignment::new(
        inst.lengths()
            .into_iter()
            .map(|l| scale * l.powf(cfg.tau * params.alpha))
            .collect(),
    )?;
    let mut min_ratio = f64::MAX;
    let mut max_ratio = f64::MIN;
    for i in 0..inst.n() {
        for j in 0..inst.n() {
            if i == j {
                continue;
            }
            let au = affectance(inst, &uniform, i, j, AffectanceMode::Exact)?;
            let at = affectance(inst, &tau_powers, i, j, AffectanceMode::Exact)?;
            let ratio = au / at;
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
        }
    }
    if inst.n() < 2 {
        return Ok((1.0, 1.0, 1.0));
    }
    Ok((max_ratio.max(1.0 / min_ratio), min_ratio, max_ratio))
}
