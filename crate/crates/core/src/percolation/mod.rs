//! Bernoulli site percolation: Newman-Ziff sweeps, fixed-`p` curves and the
//! threshold estimators built on them.

mod bottleneck;
mod connection;
mod sweep;
mod threshold;
pub mod unionfind;

pub use connection::{
    boundary_cluster_count, connection_profile, connection_profiles, count_boundary_clusters, decay_rate_fit,
    decay_rate_fit_window, estimate_pu, sample_pairs, ClusterCounts, DecayFit, DecayVerdict, PuEstimate, PuOptions,
    TauOptions, TauProfile, PU_LABEL,
};
pub use sweep::{
    canonical_curve, estimate_theta, exhaustive_microcanonical, nz_sweep, nz_sweep_with, onset_fractions, Binomial,
    CanonicalCurve, MicrocanonicalCurve, SweepOptions,
};
pub use bottleneck::{root_boundary_thresholds, shell_thresholds, NO_SHELL};
pub use threshold::{estimate_pc, CrossingRule, PcEstimate, PcOptions, SizeCrossing};
