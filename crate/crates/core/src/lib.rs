//! Measurement-conditioned nonlinear quantum maps on qubits.
//!
//! Post-selecting one outcome of a two-copy XOR-gate measurement turns the
//! linear evolution of an ensemble into a nonlinear map on the single-copy
//! state: every density-matrix element is squared and the result is
//! renormalized. This crate simulates that squaring map and what it drives:
//!
//! - [`density`]: the squaring map S on D x D density matrices, the
//!   two-copy XOR-protocol oracle it abbreviates, single-qubit rotations,
//!   and the composed conditional step F = R S.
//! - [`pure`]: the pure-qubit reduction. In the coordinate z = a0/a1 the
//!   step becomes the degree-2 rational map F_p(z) = (z^2 + p)/(1 - p* z^2)
//!   on the Riemann sphere, with p = tan(x) e^{i phi}.
//! - [`sphere`]: the sphere itself - points, the chordal metric, and
//!   overflow-safe arithmetic near infinity.
//! - [`dynamics`]: orbits of F_p, attracting-cycle discovery via the
//!   critical points {0, infinity}, convergence classification, and
//!   Lyapunov-exponent estimates.
//! - [`render`]: grayscale Julia-set images from convergence speed
//!   (dark = fast, grey = slow, white = no convergence).
//! - [`purify`]: the two-qubit purification protocol - iterating
//!   F = R1 R2 S toward a Bell-like target, its metastable period-2
//!   transient, and the chaotic breakdown of that transient.
//!
//! Everything is deterministic: no hidden randomness, no
//! scheduling-dependent results (parallel rendering partitions the image
//! into disjoint rows).

pub mod density;
pub mod dynamics;
pub mod error;
pub mod pure;
pub mod purify;
pub mod render;
pub mod sphere;

pub use density::{
    build_unitary, measurement_probability, qubit_step, rotate, squaring_map, tensor_product,
    xor_protocol_oracle, DensityMatrix, RotationParams, UnitaryMatrix, DEGENERATE_THRESHOLD,
    EIGENVALUE_FLOOR, HERMITICITY_TOL,
};
pub use dynamics::{
    classify_point, find_attracting_cycles, iterate_orbit, lyapunov_estimate, Classification,
    CycleRecord, LyapunovEstimate, OrbitRecord, DEFAULT_EPS, DEFAULT_MAX_ITER, LOG_FLOOR,
};
pub use error::{DensityViolation, Error, Result};
pub use pure::{
    apply_map, coordinate_from_pure_density, coordinate_to_state, critical_points,
    param_from_rotation, spherical_derivative, state_to_coordinate, MapParam, PureState,
};
pub use purify::{
    detect_transient_breakdown, fidelity, make_initial_rho0, make_target, run_protocol,
    two_qubit_step, ProtocolParams, StepRecord, Trajectory, DEFAULT_BREAKDOWN_TOL,
};
pub use render::{
    render, to_grayscale, to_grayscale_gamma, write_pgm, ConvergenceGrid, GridSpec, ImageBuffer,
};
pub use sphere::{chordal_distance, is_close, SpherePoint};
