//! Shared fixtures for the benchmark targets.

use sinrsched_core::*;

pub fn box_instance(n: usize, seed: u64) -> Instance {
    let cfg = RandomConfig {
        n,
        dim: 2,
        side: 40.0 * (n as f64).sqrt(),
        len_min: 1.0,
        len_max: 8.0,
        weights: WeightDist::Uniform(1.0, 4.0),
        params: SinrParams::new(3.0, 1.0, 0.0).unwrap(),
        seed,
    };
    gen_random(&cfg).unwrap()
}
