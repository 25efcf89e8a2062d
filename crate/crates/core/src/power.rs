//! Oblivious power schemes, power assignments, and affectance.
//!
//! Affectance is interference normalized by received signal strength: link
//! sets are feasible exactly when every link's incoming affectance sum stays
//! below the SINR threshold's reciprocal. The default mode drops the noise
//! correction factor (`c_i = 1`); exact mode keeps it and rejects links that
//! cannot overcome noise under the given assignment.

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Power scheme of the form `P(i) = scale * l_i^(tau * alpha)`.
/// `tau = 0` is uniform power, `tau = 1` linear, `tau = 1/2` mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerScheme {
    pub tau: f64,
    pub scale: f64,
}

impl PowerScheme {
    pub fn new(tau: f64, scale: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) || !tau.is_finite() {
            return Err(Error::InvalidParam(format!("tau must lie in [0, 1], got {tau}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParam(format!("power scale must be positive, got {scale}")));
        }
        Ok(PowerScheme { tau, scale })
    }

    pub fn uniform() -> Self {
        PowerScheme { tau: 0.0, scale: 1.0 }
    }

    pub fn linear() -> Self {
        PowerScheme { tau: 1.0, scale: 1.0 }
    }

    pub fn mean() -> Self {
        PowerScheme { tau: 0.5, scale: 1.0 }
    }

    /// Power assigned to link `i`.
    pub fn power(&self, inst: &Instance, i: usize) -> Result<f64> {
        let l = inst.link_length(i)?;
        Ok(self.scale * l.powf(self.tau * inst.params().alpha))
    }

    /// Materializes the scheme into a per-link assignment.
    pub fn assignment(&self, inst: &Instance) -> PowerAssignment {
        let alpha = inst.params().alpha;
        let powers = inst
            .lengths()
            .into_iter()
            .map(|l| self.scale * l.powf(self.tau * alpha))
            .collect();
        PowerAssignment { powers }
    }
}

/// Transmit power per link id; every power is positive and the domain covers
/// all instance links.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAssignment {
    powers: Vec<f64>,
}

impl PowerAssignment {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        for (i, &p) in powers.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidParam(format!("power of link {i} must be positive, got {p}")));
            }
        }
        Ok(PowerAssignment { powers })
    }

    pub fn uniform(n: usize, level: f64) -> Result<Self> {
        Self::new(vec![level; n])
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn get(&self, i: usize) -> Result<f64> {
        self.powers.get(i).copied().ok_or(Error::UnknownLink(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.powers
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.powers.iter().map(|p| p * factor).collect())
    }
}

/// Whether affectance carries the noise correction factor `c_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffectanceMode {
    /// `c_i = 1`; the standard assumption when signals comfortably exceed noise.
    Normalized,
    /// `c_i = 1 / (1 - beta * N * l_i^alpha / P(i))`; errors on links whose
    /// power cannot overcome noise.
    Exact,
}

/// The factor `c_i` for link `i` under the given assignment and mode.
pub fn reception_factor(
    inst: &Instance,
    powers: &PowerAssignment,
    i: usize,
    mode: AffectanceMode,
) -> Result<f64> {
    match mode {
        AffectanceMode::Normalized => {
            inst.link(i)?;
            Ok(1.0)
        }
        AffectanceMode::Exact => {
            let params = inst.params();
            let p = powers.get(i)?;
            let floor = params.beta * params.noise * inst.link_length(i)?.powf(params.alpha);
            if p <= floor {
                return Err(Error::WeakLink { link: i, power: p, floor });
            }
            Ok(1.0 / (1.0 - floor / p))
        }
    }
}

/// Affectance of link `source` on link `target`:
/// `c_t * P(source) * l_t^alpha / (P(target) * d(s_source, r_target)^alpha)`.
/// Zero when `source == target`; infinite when the source's sender sits on
/// the target's receiver.
pub fn affectance(
    inst: &Instance,
    powers: &PowerAssignment,
    source: usize,
    target: usize,
    mode: AffectanceMode,
) -> Result<f64> {
    if source == target {
        inst.link(source)?;
        return Ok(0.0);
    }
    let c = reception_factor(inst, powers, target, mode)?;
    let alpha = inst.params().alpha;
    let lt = inst.link_length(target)?;
    let d = inst.sr_distance(source, target)?;
    if d == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(c * powers.get(source)? * lt.powf(alpha) / (powers.get(target)? * d.powf(alpha)))
}

/// Additive extension of affectance over a set: total affectance of `set` on
/// `target`, self-term excluded. Summation runs in ascending link id order so
/// results are deterministic regardless of the caller's set order.
pub fn set_affectance(
    inst: &Instance,
    powers: &PowerAssignment,
    set: &[usize],
    target: usize,
    mode: AffectanceMode,
) -> Result<f64> {
    let mut ids: Vec<usize> = set.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut sum = 0.0;
    for j in ids {
        sum += affectance(inst, powers, j, target, mode)?;
    }
    Ok(sum)
}

/// Pairwise bound `l_i^(tau*alpha) * l_j^((1-tau)*alpha) / d(i,j)^alpha`,
/// which dominates the affectance of `i` on `j` under the `tau` scheme
/// because it uses the minimum link-to-link distance in the denominator.
pub fn f_tau(inst: &Instance, tau: f64, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::SameLink(i));
    }
    let d = inst.link_gap(i, j)?;
    if d == 0.0 {
        return Err(Error::ZeroDistance { i, j });
    }
    let alpha = inst.params().alpha;
    let li = inst.link_length(i)?;
    let lj = inst.link_length(j)?;
    Ok(li.powf(tau * alpha) * lj.powf((1.0 - tau) * alpha) / d.powf(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Link, SinrParams};
    use crate::space::Space;

    fn line(coords: &[(f64, f64)], alpha: f64, beta: f64, noise: f64) -> Instance {
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
            SinrParams::new(alpha, beta, noise).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn uniform_scheme_is_constant() {
        let inst = line(&[(0.0, 1.0), (5.0, 9.0)], 3.0, 1.0, 0.0);
        let s = PowerScheme::new(0.0, 2.5).unwrap();
        assert_eq!(s.power(&inst, 0).unwrap(), 2.5);
        assert_eq!(s.power(&inst, 1).unwrap(), 2.5);
    }

    #[test]
    fn linear_scheme_power() {
        let inst = line(&[(0.0, 2.0)], 3.0, 1.0, 0.0);
        assert_eq!(PowerScheme::linear().power(&inst, 0).unwrap(), 8.0);
    }

    #[test]
    fn mean_scheme_power() {
        let inst = line(&[(0.0, 4.0)], 2.0, 1.0, 0.0);
        // l^(tau*alpha) = 4^1
        assert_eq!(PowerScheme::mean().power(&inst, 0).unwrap(), 4.0);
    }

    #[test]
    fn self_affectance_is_zero() {
        let inst = line(&[(0.0, 1.0)], 3.0, 1.0, 0.0);
        let p = PowerAssignment::uniform(1, 1.0).unwrap();
        assert_eq!(affectance(&inst, &p, 0, 0, AffectanceMode::Normalized).unwrap(), 0.0);
    }

    #[test]
    fn unit_ratio_at_length_distance() {
        // d(s_1, r_0) = l_0 = 1 with uniform power: affectance 1.
        let inst = line(&[(0.0, 1.0), (2.0, 3.0)], 3.0, 1.0, 0.0);
        let p = PowerAssignment::uniform(2, 1.0).unwrap();
        assert_eq!(affectance(&inst, &p, 1, 0, AffectanceMode::Normalized).unwrap(), 1.0);
    }

    #[test]
    fn inverse_cube_at_double_distance() {
        // d(s_1, r_0) = 2, l_0 = 1, alpha = 3 -> (1/2)^3.
        let inst = line(&[(0.0, 1.0), (3.0, 4.0)], 3.0, 1.0, 0.0);
        let p = PowerAssignment::uniform(2, 1.0).unwrap();
        assert_eq!(affectance(&inst, &p, 1, 0, AffectanceMode::Normalized).unwrap(), 0.125);
    }

    #[test]
    fn set_affectance_basics() {
        // interferer senders at 3 and -1, both at distance 2 from r_0 = 1
        let inst = line(&[(0.0, 1.0), (3.0, 4.0), (-1.0, -2.0)], 3.0, 1.0, 0.0);
        let p = PowerAssignment::uniform(3, 1.0).unwrap();
        // self-only set sums to zero
        assert_eq!(set_affectance(&inst, &p, &[0], 0, AffectanceMode::Normalized).unwrap(), 0.0);
        // two symmetric interferers at distance 2 each contribute 1/8
        let s = set_affectance(&inst, &p, &[0, 1, 2], 0, AffectanceMode::Normalized).unwrap();
        assert_eq!(s, 0.25);
        // monotone under set inclusion
        let sub = set_affectance(&inst, &p, &[1], 0, AffectanceMode::Normalized).unwrap();
        assert!(sub <= s);
    }

    #[test]
    fn exact_mode_rejects_weak_links() {
        let inst = line(&[(0.0, 2.0)], 3.0, 1.0, 1.0);
        // floor = beta*N*l^alpha = 8; power 8 is exactly the floor -> weak
        let p = PowerAssignment::uniform(1, 8.0).unwrap();
        assert!(matches!(
            reception_factor(&inst, &p, 0, AffectanceMode::Exact),
            Err(Error::WeakLink { link: 0, .. })
        ));
        // above the floor the factor is finite and > 1
        let p = PowerAssignment::uniform(1, 16.0).unwrap();
        let c = reception_factor(&inst, &p, 0, AffectanceMode::Exact).unwrap();
        assert_eq!(c, 2.0);
    }

    #[test]
    fn f_tau_hand_values() {
        // l_0 = l_1 = d(0,1) = 1 -> everything cancels.
        let inst = line(&[(0.0, 1.0), (2.0, 3.0)], 3.0, 1.0, 0.0);
        assert_eq!(f_tau(&inst, 0.7, 0, 1).unwrap(), 1.0);
        // tau=0: l_i^0 * l_j^(alpha) / d^alpha = 4/16 with alpha=2.
        let inst = line(&[(0.0, 1.0), (5.0, 7.0)], 2.0, 1.0, 0.0);
        assert_eq!(f_tau(&inst, 0.0, 0, 1).unwrap(), 0.25);
    }

    #[test]
    fn f_tau_zero_distance_rejected() {
        let inst = line(&[(0.0, 1.0), (1.0, 2.0)], 3.0, 1.0, 0.0);
        assert!(matches!(
            f_tau(&inst, 0.5, 0, 1),
            Err(Error::ZeroDistance { .. })
        ));
    }
}
