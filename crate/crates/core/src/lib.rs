//! Constant-dimension multiplicative linear operator broadcast channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] enumerates the subspaces of `F_q^m` and builds the
//!   (stochastic) inclusion incidence matrices between dimension layers.
//! * [`channel`] assembles CMLOC channel matrices from erasure patterns and
//!   computes single-channel capacities.
//! * [`degradation`] decides the stochastic degradation order of a two-user
//!   CMLOBC, builds explicit degrading channels and checks them against an
//!   independent linear-programming oracle.
//! * [`info`] and [`region`] hold information measures, rate-point sampling,
//!   the time-sharing filter and the weighted-sum boundary solver.
//! * [`pg22`] has closed forms for the Fano-plane lattice `(q, m, l) = (2, 3, 2)`.
//! * [`export`] renders CSV/JSON artifacts with a fixed numeric format.

pub mod channel;
pub mod degradation;
pub mod error;
pub mod export;
pub mod info;
pub mod lattice;
pub mod lp;
pub mod matrix;
pub mod pg22;
pub mod region;
pub mod rng;

pub use channel::{
    build_cmloc, cmloc_capacity, normalized_rates, validate_channel, Capacity, ChannelMatrix,
    ChannelReport, ChannelSpec, Cmlobc, ErasurePattern,
};
pub use degradation::{
    check_degraded, check_strong_degraded, construct_degrading_channel, construct_lambda,
    lp_degradation_oracle, verify_certificate, CertificateReport, DegradationCertificate,
    DegradationOrder, LpVerdict,
};
pub use error::{Error, Result};
pub use info::{broadcast_rates, mutual_information, JointDistribution, PointTag, RatePoint};
pub use lattice::{
    enumerate_subspaces, gaussian_binomial, incidence_matrix, subspace_contains, IncidenceMatrix,
    Lattice, LatticeParams, Subspace,
};
pub use matrix::Matrix;
pub use pg22::{CurveCase, CurveClassification, Pg22Pattern};
pub use region::{
    ba_boundary_point, boundary_sweep, erasure_region_contains, filter_time_sharing,
    sample_achievable_points, sweep_runs, verify_lemma5, weighted_sum_bound_check, BoundaryRun,
    RegionEstimate, SweepSettings,
};
