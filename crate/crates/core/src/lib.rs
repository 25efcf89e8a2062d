//! Wireless link scheduling in the SINR (physical) interference model.
//!
//! The crate models link instances in euclidean or explicit metric spaces,
//! checks SINR feasibility through affectance sums under oblivious power
//! schemes, builds separation-based conflict graphs, and implements the
//! conflict-graph scheduler and weighted-capacity solver alongside the
//! first-fit, length-class, and randomized baselines. Exact small-instance
//! oracles (chromatic number, weighted independent set, minimum schedule,
//! optimal-power existence) back every heuristic with an independent check,
//! and the generators reproduce the adversarial instance families the
//! algorithms are measured against.

pub mod conflict;
pub mod error;
pub mod feasibility;
pub mod generate;
pub mod instance;
pub mod power;
pub mod schedule;
pub mod space;

pub use conflict::{
    build_graph, color_classes, exact_chromatic, exact_mwis, f_star, greedy_color, independent,
    mwis, right_clique_cover, ConflictGraph, ConflictParams, MwisResult,
};
pub use error::{Error, Result};
pub use feasibility::{
    check_feasible, delta0, exists_power, spectral_feasible, spectral_radius_gain,
    strengthen_partition, valid_tau_interval, FeasibilityReport, LinkAffectance,
};
pub use generate::{
    effective_length, effective_length_inverse, firstfit_tree_parents, gen_firstfit_tree,
    gen_general_metric, gen_random, gen_randomized_tree, gen_weighted_plane,
    general_metric_witness, weak_ratio_band, weaken, RandomConfig, RandomizedTreeConfig,
    RandomizedTreeShape, WeakLinkConfig, WeightDist,
};
pub use instance::{Instance, Link, SinrParams};
pub use power::{
    affectance, f_tau, reception_factor, set_affectance, AffectanceMode, PowerAssignment,
    PowerScheme,
};
pub use schedule::{
    calibrate_gamma, calibration_sample, conflict_classes_feasible, exact_min_schedule, first_fit,
    gamma_grid, length_class_schedule, randomized_schedule, schedule_conflict, wcapacity_conflict,
    CapacityResult, FirstFitOrder, GammaCache, PowerMode, ProbSequence, Schedule, Slot,
    FLAG_CAP_REACHED, FLAG_GAMMA_TOO_SMALL, FLAG_LOWER_BOUND_NA,
};
