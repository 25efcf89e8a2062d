//! Conflict graphs over link sets: pairwise independence predicates, graph
//! construction, greedy coloring and local-ratio weighted independent sets
//! over the length-based elimination order, exact small-graph oracles, and
//! the iterated-exponent count used by the chromatic-gap diagnostics.

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Separation parameters `(gamma, delta)`. `delta = 0` selects the constant
/// separation predicate; `delta` in `(0, 1)` scales separation with the
/// longer link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictParams {
    pub gamma: f64,
    pub delta: f64,
}

impl ConflictParams {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParam(format!("gamma must be positive, got {gamma}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParam(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(ConflictParams { gamma, delta })
    }
}

/// Pairwise independence: with `l_max = max(l_i, l_j)` and `l_min` the other,
/// links are independent iff `d(i,j) > gamma * l_max^delta * l_min^(1-delta)`.
pub fn independent(inst: &Instance, params: ConflictParams, i: usize, j: usize) -> Result<bool> {
    if i == j {
        return Err(Error::SameLink(i));
    }
    let li = inst.link_length(i)?;
    let lj = inst.link_length(j)?;
    let (lmax, lmin) = if li >= lj { (li, lj) } else { (lj, li) };
    let threshold = params.gamma * lmax.powf(params.delta) * lmin.powf(1.0 - params.delta);
    Ok(inst.link_gap(i, j)? > threshold)
}

/// Undirected conflict graph: vertices are link ids, edges join conflicting
/// (non-independent) pairs. Carries the elimination order used by the greedy
/// algorithms: non-increasing length, ties by ascending id.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
    order: Vec<usize>,
    params: Option<ConflictParams>,
}

impl ConflictGraph {
    fn empty(n: usize, order: Vec<usize>, params: Option<ConflictParams>) -> Self {
        let words = n.div_ceil(64);
        ConflictGraph { n, words, adj: vec![0; n * words], order, params }
    }

    /// Builds a graph from explicit edges with the identity order; intended
    /// for tests and the exact oracles.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n, (0..n).collect(), None);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownLink(u.max(v)));
            }
            if u == v {
                return Err(Error::SameLink(u));
            }
            g.set_edge(u, v);
        }
        Ok(g)
    }

    fn set_edge(&mut self, u: usize, v: usize) {
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> Option<ConflictParams> {
        self.params
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        u != v && self.adj[u * self.words + v / 64] & (1 << (v % 64)) != 0
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.adj[u * self.words..(u + 1) * self.words];
        row.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            let mut out = Vec::new();
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
            out
        })
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u * self.words..(u + 1) * self.words]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).sum::<usize>() / 2
    }

    /// Plain edge-list export: first line `n`, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(out, "{}", self.n).unwrap();
        for u in 0..self.n {
            for v in self.neighbors(u) {
                if u < v {
                    writeln!(out, "{u} {v}").unwrap();
                }
            }
        }
        out
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.adj[u * self.words..(u + 1) * self.words]
    }
}

/// Builds the conflict graph of an instance under `(gamma, delta)`.
pub fn build_graph(inst: &Instance, params: ConflictParams) -> Result<ConflictGraph> {
    let n = inst.n();
    let lengths = inst.lengths();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lengths[b].partial_cmp(&lengths[a]).unwrap().then(a.cmp(&b)));
    let mut g = ConflictGraph::empty(n, order, Some(params));
    for i in 0..n {
        for j in (i + 1)..n {
            if !independent(inst, params, i, j)? {
                g.set_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Greedy coloring in the graph's stored order: each vertex takes the
/// smallest color unused among already-colored neighbors.
pub fn greedy_color(graph: &ConflictGraph) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let mut color = vec![UNSET; graph.n()];
    let mut used = vec![false; graph.n() + 1];
    for &v in graph.order() {
        let mut touched = Vec::new();
        for u in graph.neighbors(v) {
            if color[u] != UNSET {
                used[color[u]] = true;
                touched.push(color[u]);
            }
        }
        let mut c = 0;
        while used[c] {
            c += 1;
        }
        color[v] = c;
        for t in touched {
            used[t] = false;
        }
    }
    color
}

/// Groups a coloring into classes: ascending color index, members ascending.
pub fn color_classes(colors: &[usize]) -> Vec<Vec<usize>> {
    let k = colors.iter().copied().max().map_or(0, |c| c + 1);
    let mut classes = vec![Vec::new(); k];
    for (v, &c) in colors.iter().enumerate() {
        classes[c].push(v);
    }
    classes
}

/// Result of the local-ratio weighted independent set heuristic. `kemp` is
/// the measured clique-cover number of right-neighborhoods in the elimination
/// order; the returned weight is guaranteed to be at least `optimum / kemp`.
#[derive(Debug, Clone)]
pub struct MwisResult {
    pub links: Vec<usize>,
    pub weight: f64,
    pub kemp: usize,
}

/// Local-ratio maximum weight independent set over the elimination order:
/// on the forward pass each positive-residual vertex subtracts its residual
/// from its closed right-neighborhood; the backward pass adds vertices
/// greedily while keeping independence.
pub fn mwis(graph: &ConflictGraph, weights: &[f64]) -> Result<MwisResult> {
    let n = graph.n();
    if weights.len() != n {
        return Err(Error::InvalidParam(format!(
            "weights cover {} vertices, graph has {n}",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidParam("weights must be positive".into()));
    }
    let mut pos = vec![0usize; n];
    for (idx, &v) in graph.order().iter().enumerate() {
        pos[v] = idx;
    }
    let mut residual = weights.to_vec();
    let mut stack = Vec::new();
    for &v in graph.order() {
        if residual[v] <= 0.0 {
            continue;
        }
        let r = residual[v];
        residual[v] = 0.0;
        for u in graph.neighbors(v) {
            if pos[u] > pos[v] {
                residual[u] -= r;
            }
        }
        stack.push(v);
    }
    let mut chosen = vec![false; n];
    for &v in stack.iter().rev() {
        if graph.neighbors(v).all(|u| !chosen[u]) {
            chosen[v] = true;
        }
    }
    let links: Vec<usize> = (0..n).filter(|&v| chosen[v]).collect();
    let weight = links.iter().map(|&v| weights[v]).sum();
    Ok(MwisResult { links, weight, kemp: right_clique_cover(graph) })
}

/// Greedy clique-cover number of right-neighborhoods: for each vertex, cover
/// the neighbors appearing later in the elimination order by repeatedly
/// extracting maximal cliques; the maximum cover size over vertices bounds
/// the local-ratio approximation factor.
pub fn right_clique_cover(graph: &ConflictGraph) -> usize {
    let n = graph.n();
    let words = n.div_ceil(64);
    let mut pos = vec![0usize; n];
    for (idx, &v) in graph.order().iter().enumerate() {
        pos[v] = idx;
    }
    let mut kemp = 0usize;
    let mut right = vec![0u64; words];
    let mut cand = vec![0u64; words];
    for v in 0..n {
        right.iter_mut().for_each(|w| *w = 0);
        for u in graph.neighbors(v) {
            if pos[u] > pos[v] {
                right[u / 64] |= 1 << (u % 64);
            }
        }
        let mut cliques = 0usize;
        while let Some(seed) = lowest_bit(&right) {
            cliques += 1;
            // grow a maximal clique inside the remaining right-neighbors
            clear_bit(&mut right, seed);
            cand.copy_from_slice(&right);
            and_row(&mut cand, graph.row(seed));
            while let Some(u) = lowest_bit(&cand) {
                clear_bit(&mut right, u);
                clear_bit(&mut cand, u);
                and_row(&mut cand, graph.row(u));
            }
        }
        kemp = kemp.max(cliques);
    }
    kemp
}

fn lowest_bit(words: &[u64]) -> Option<usize> {
    for (w, &bits) in words.iter().enumerate() {
        if bits != 0 {
            return Some(w * 64 + bits.trailing_zeros() as usize);
        }
    }
    None
}

fn clear_bit(words: &mut [u64], i: usize) {
    words[i / 64] &= !(1 << (i % 64));
}

fn and_row(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d &= *s;
    }
}

// ---------------------------------------------------------------------------
// Exact oracles (small graphs only).
// ---------------------------------------------------------------------------

const CHROMATIC_CAP: usize = 20;
const MWIS_CAP: usize = 25;

/// Exact chromatic number by memoized dynamic programming over vertex
/// subsets: the class containing the lowest remaining vertex can be assumed
/// to be a maximal independent set, enumerated Bron-Kerbosch style on the
/// complement graph.
pub fn exact_chromatic(graph: &ConflictGraph) -> Result<usize> {
    let n = graph.n();
    if n > CHROMATIC_CAP {
        return Err(Error::TooLarge { what: "exact_chromatic", n, cap: CHROMATIC_CAP });
    }
    if n == 0 {
        return Ok(0);
    }
    // complement adjacency (self excluded), as masks
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut nbar = vec![0u32; n];
    let mut nadj = vec![0u32; n];
    for v in 0..n {
        let mut adj = 0u32;
        for u in graph.neighbors(v) {
            adj |= 1 << u;
        }
        nadj[v] = adj;
        nbar[v] = full & !adj & !(1 << v);
    }
    let mut memo = std::collections::HashMap::new();
    fn solve(
        mask: u32,
        nbar: &[u32],
        memo: &mut std::collections::HashMap<u32, u32>,
        bound: u32,
    ) -> u32 {
        if mask == 0 {
            return 0;
        }
        if bound == 0 {
            return u32::MAX;
        }
        if let Some(&v) = memo.get(&mask) {
            return v;
        }
        let v = mask.trailing_zeros() as usize;
        let mut best = u32::MAX;
        // enumerate maximal independent sets (cliques of the complement)
        // within mask that contain v
        let mut stack = vec![(1u32 << v, mask & nbar[v], 0u32)];
        while let Some((r, p, x)) = stack.pop() {
            if p == 0 && x == 0 {
                let sub = solve(mask & !r, nbar, memo, best.saturating_sub(1).min(bound - 1));
                if sub != u32::MAX && sub + 1 < best {
                    best = sub + 1;
                    if best == 1 {
                        break;
                    }
                }
                continue;
            }
            // pivot on the candidate dominating the most of p
            let pool = p | x;
            let mut pivot = pool.trailing_zeros() as usize;
            let mut hits = 0u32;
            let mut scan = pool;
            while scan != 0 {
                let u = scan.trailing_zeros() as usize;
                scan &= scan - 1;
                let h = (p & nbar[u]).count_ones();
                if h > hits {
                    hits = h;
                    pivot = u;
                }
            }
            let mut cand = p & !nbar[pivot];
            let mut pp = p;
            let mut xx = x;
            while cand != 0 {
                let u = cand.trailing_zeros() as usize;
                cand &= cand - 1;
                stack.push((r | (1 << u), pp & nbar[u], xx & nbar[u]));
                pp &= !(1 << u);
                xx |= 1 << u;
            }
        }
        memo.insert(mask, best);
        best
    }
    let colors = solve(full, &nbar, &mut memo, n as u32 + 1);
    let _ = nadj;
    Ok(colors as usize)
}

/// Exact maximum-weight independent set by branch and bound.
pub fn exact_mwis(graph: &ConflictGraph, weights: &[f64]) -> Result<Vec<usize>> {
    let n = graph.n();
    if n > MWIS_CAP {
        return Err(Error::TooLarge { what: "exact_mwis", n, cap: MWIS_CAP });
    }
    if weights.len() != n {
        return Err(Error::InvalidParam(format!(
            "weights cover {} vertices, graph has {n}",
            weights.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    let mut closed = vec![0u32; n]; // v plus neighbors
    for (v, entry) in closed.iter_mut().enumerate() {
        let mut m = 1u32 << v;
        for u in graph.neighbors(v) {
            m |= 1 << u;
        }
        *entry = m;
    }
    struct Bb<'a> {
        order: &'a [usize],
        weights: &'a [f64],
        closed: &'a [u32],
        best_w: f64,
        best: u32,
    }
    impl Bb<'_> {
        fn run(&mut self, mask: u32, acc_w: f64, acc: u32, from: usize) {
            let remaining: f64 = self.order[from..]
                .iter()
                .filter(|&&v| mask & (1 << v) != 0)
                .map(|&v| self.weights[v])
                .sum();
            if acc_w + remaining <= self.best_w {
                return;
            }
            let next = self.order[from..]
                .iter()
                .position(|&v| mask & (1 << v) != 0)
                .map(|off| from + off);
            match next {
                None => {
                    if acc_w > self.best_w {
                        self.best_w = acc_w;
                        self.best = acc;
                    }
                }
                Some(idx) => {
                    let v = self.order[idx];
                    self.run(mask & !self.closed[v], acc_w + self.weights[v], acc | (1 << v), idx + 1);
                    self.run(mask & !(1u32 << v), acc_w, acc, idx + 1);
                }
            }
        }
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut bb = Bb { order: &order, weights, closed: &closed, best_w: f64::NEG_INFINITY, best: 0 };
    bb.run(full, 0.0, 0, 0);
    let mut out: Vec<usize> = (0..n).filter(|&v| bb.best & (1 << v) != 0).collect();
    out.sort_unstable();
    Ok(out)
}

/// Number of times the map `x -> x^delta` must be applied to bring `x`
/// down to 2; returns 1 when `x <= 2`.
pub fn f_star(delta: f64, x: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(x.is_finite() && x >= 1.0) {
        return Err(Error::InvalidParam(format!("x must be >= 1, got {x}")));
    }
    if x <= 2.0 {
        return Ok(1);
    }
    let mut y = x;
    let mut count = 0usize;
    while y > 2.0 && count < 10_000 {
        y = y.powf(delta);
        count += 1;
    }
    Ok(count.max(1))
}
