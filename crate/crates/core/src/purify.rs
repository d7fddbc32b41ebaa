//! The two-qubit purification protocol: iterate F = R1 R2 S on 4x4 density
//! matrices, track fidelity to the Bell-like target, and quantify the
//! metastable period-2 transient and its chaotic breakdown.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::{
    build_unitary, conjugate_hermitian, measurement_probability, squaring_map, DensityMatrix,
    RotationParams,
};
use crate::error::{DensityViolation, Error, Result};
use serde::{Deserialize, Serialize};

/// Default tolerance for [`detect_transient_breakdown`]: well above
/// round-off, well below the O(1) chaotic fidelity excursions.
pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-3;

/// Rotation angles (x1, phi1) for qubit 1 and (x2, phi2) for qubit 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub rot1: RotationParams,
    pub rot2: RotationParams,
}

impl ProtocolParams {
    pub fn new(x1: f64, phi1: f64, x2: f64, phi2: f64) -> Result<Self> {
        Ok(ProtocolParams {
            rot1: RotationParams::new(x1, phi1)?,
            rot2: RotationParams::new(x2, phi2)?,
        })
    }
}

/// One recorded protocol step. `success_probability` is the probability of
/// the conditioning measurement outcome consumed by this step; step 0 is
/// the initial state, before any measurement, and carries probability 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub fidelity: f64,
    pub purity: f64,
    pub success_probability: f64,
}

/// A protocol run. `degenerate_halt_step` records the step at which a
/// degenerate measurement stopped the run early, if any; the recorded
/// states all precede the halt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub degenerate_halt_step: Option<usize>,
}

/// The projector onto (|01> + |10>)/sqrt(2) in the product basis
/// |00>, |01>, |10>, |11>: entries 0.5 on the central 2x2 block.
pub fn make_target() -> DensityMatrix {
    let mut entries = vec![Complex64::new(0.0, 0.0); 16];
    for i in [1usize, 2] {
        for j in [1usize, 2] {
            entries[i * 4 + j] = Complex64::new(0.5, 0.0);
        }
    }
    DensityMatrix::new(4, &entries).expect("target projector is a valid state")
}

/// The protocol's initial state: diagonal (0.1, 0.45, 0.45, 0) with 0.445
/// on the central off-diagonal pair. Its fidelity to the target is 0.895.
pub fn make_initial_rho0() -> DensityMatrix {
    let mut entries = vec![Complex64::new(0.0, 0.0); 16];
    for (i, v) in [(0usize, 0.1), (1, 0.45), (2, 0.45), (3, 0.0)] {
        entries[i * 4 + i] = Complex64::new(v, 0.0);
    }
    for (i, j) in [(1usize, 2usize), (2, 1)] {
        entries[i * 4 + j] = Complex64::new(0.445, 0.0);
    }
    DensityMatrix::new(4, &entries).expect("central block has eigenvalues 0.45 +- 0.445")
}

/// F = Tr(rho rho_target), real for Hermitian inputs.
///
/// # Errors
/// [`Error::DimensionMismatch`] on unequal dims; [`Error::NonRealFidelity`]
/// if rounding ever produced an imaginary part above 1e-12.
pub fn fidelity(rho: &DensityMatrix, target: &DensityMatrix) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: rho.dim(),
        });
    }
    let d = rho.dim();
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            tr += rho.entry(i, j) * target.entry(j, i);
        }
    }
    if tr.im.abs() >= 1e-12 {
        return Err(Error::NonRealFidelity { imag: tr.im });
    }
    Ok(tr.re)
}

/// U(x1, phi1) tensor U(x2, phi2) as a 4x4 matrix.
fn joint_unitary(params: &ProtocolParams) -> DMatrix<Complex64> {
    let u1 = build_unitary(params.rot1);
    let u2 = build_unitary(params.rot2);
    let m1 = DMatrix::from_fn(2, 2, |i, j| u1.matrix()[(i, j)]);
    let m2 = DMatrix::from_fn(2, 2, |i, j| u2.matrix()[(i, j)]);
    m1.kronecker(&m2)
}

/// One protocol step: the squaring map S, then the local rotations
/// R1 tensor R2 (with re-projection onto the Hermitian part, an invariant
/// of the exact map that floating-point products leak).
///
/// # Errors
/// [`Error::DegenerateMeasurement`] propagated from S; dimension and
/// density-matrix violations as such.
pub fn two_qubit_step(rho: &DensityMatrix, params: &ProtocolParams) -> Result<DensityMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let squared = squaring_map(rho)?;
    DensityMatrix::from_matrix(conjugate_hermitian(squared.matrix(), &joint_unitary(params)))
}

/// Iterates [`two_qubit_step`] from rho0, recording step, fidelity to the
/// target, purity Tr(rho^2), and the per-step success probability.
///
/// A degenerate measurement halts the run early and is recorded on the
/// trajectory, not thrown. Every state is re-validated after every step;
/// an eigenvalue below the -1e-10 floor aborts with the step index and the
/// offending matrix attached rather than being silently clamped.
pub fn run_protocol(
    rho0: &DensityMatrix,
    params: &ProtocolParams,
    steps: usize,
) -> Result<Trajectory> {
    if rho0.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho0.dim(),
        });
    }
    let target = make_target();
    let u = joint_unitary(params);
    let mut rho = rho0.clone();
    let mut traj = Trajectory {
        records: Vec::with_capacity(steps + 1),
        degenerate_halt_step: None,
    };
    traj.records.push(StepRecord {
        step: 0,
        fidelity: fidelity(&rho, &target)?,
        purity: rho.purity(),
        success_probability: 1.0,
    });
    for step in 1..=steps {
        let success_probability = measurement_probability(&rho);
        let squared = match squaring_map(&rho) {
            Ok(s) => s,
            Err(Error::DegenerateMeasurement { .. }) => {
                traj.degenerate_halt_step = Some(step);
                break;
            }
            Err(e) => return Err(e),
        };
        let raw = conjugate_hermitian(squared.matrix(), &u);
        rho = match DensityMatrix::from_matrix(raw.clone()) {
            Ok(next) => next,
            Err(Error::InvalidDensityMatrix(DensityViolation::NotPositiveSemidefinite {
                min_eigenvalue,
            })) => {
                return Err(Error::PositivityViolation {
                    step,
                    min_eigenvalue,
                    dump: format_matrix(&raw),
                });
            }
            Err(e) => return Err(e),
        };
        traj.records.push(StepRecord {
            step,
            fidelity: fidelity(&rho, &target)?,
            purity: rho.purity(),
            success_probability,
        });
    }
    Ok(traj)
}

fn format_matrix(m: &DMatrix<Complex64>) -> String {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let e = m[(i, j)];
                    format!("{:+.17e}{:+.17e}i", e.re, e.im)
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Finds where an established period-2 fidelity pattern breaks down.
///
/// Same-parity differences d_k = |f(k) - f(k-2)| are scanned from k = 2.
/// The pattern counts as established at the first pair of consecutive
/// differences both at or below tol (transients from a generic start are
/// ignored up to that point); the breakdown is the first later step whose
/// difference exceeds tol. Absent (None) means the pattern, once formed,
/// persisted to the end - or never formed at all.
///
/// # Errors
/// [`Error::InvalidTolerance`] for non-positive or non-finite tol.
pub fn detect_transient_breakdown(traj: &Trajectory, tol: f64) -> Result<Option<usize>> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidTolerance {
            name: "tol",
            value: tol,
        });
    }
    let f: Vec<f64> = traj.records.iter().map(|r| r.fidelity).collect();
    let diff = |k: usize| (f[k] - f[k - 2]).abs();
    let mut armed_at: Option<usize> = None;
    for k in 2..f.len() {
        match armed_at {
            None => {
                if k + 1 < f.len() && diff(k) <= tol && diff(k + 1) <= tol {
                    armed_at = Some(k + 1);
                }
            }
            Some(armed) => {
                if k > armed && diff(k) > tol {
                    return Ok(Some(k));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    /// In this U(x, phi) parameterization the period-2 regime sits at
    /// phi = pi/2 (the analytic condition is e^{2 i phi} = -tan^2 x).
    fn pi4_params() -> ProtocolParams {
        ProtocolParams::new(FRAC_PI_4, FRAC_PI_2, FRAC_PI_4, FRAC_PI_2).unwrap()
    }

    #[test]
    fn target_examples() {
        let t = make_target();
        assert_abs_diff_eq!(fidelity(&t, &t).unwrap(), 1.0, epsilon = 1e-15);
        let trace: f64 = (0..4).map(|i| t.entry(i, i).re).sum();
        assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.purity(), 1.0, epsilon = 1e-15);
        assert_eq!(squaring_map(&t).unwrap(), t);
    }

    #[test]
    fn rho0_examples() {
        let rho0 = make_initial_rho0();
        let t = make_target();
        assert_abs_diff_eq!(fidelity(&rho0, &t).unwrap(), 0.895, epsilon = 1e-12);
        let trace: f64 = (0..4).map(|i| rho0.entry(i, i).re).sum();
        assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-15);
        assert!(rho0.min_eigenvalue() >= -1e-12, "eigenvalues 0.45 +- 0.445, 0.1, 0");
        assert_abs_diff_eq!(measurement_probability(&rho0), 0.415, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_orthogonal_support_is_zero() {
        let mut entries = vec![Complex64::new(0.0, 0.0); 16];
        entries[0] = Complex64::new(1.0, 0.0);
        let basis = DensityMatrix::new(4, &entries).unwrap();
        assert_eq!(fidelity(&basis, &make_target()).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_rejects_dimension_mismatch() {
        let qubit = DensityMatrix::new(
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            fidelity(&qubit, &make_target()),
            Err(Error::DimensionMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn zero_angle_step_fixes_s_fixed_points() {
        let zero = ProtocolParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let t = make_target();
        assert_eq!(two_qubit_step(&t, &zero).unwrap(), t);

        let mut entries = vec![Complex64::new(0.0, 0.0); 16];
        entries[0] = Complex64::new(1.0, 0.0);
        let basis = DensityMatrix::new(4, &entries).unwrap();
        assert_eq!(two_qubit_step(&basis, &zero).unwrap(), basis);
    }

    #[test]
    fn target_is_second_order_fixed_point() {
        let params = pi4_params();
        let t = make_target();
        let once = two_qubit_step(&t, &params).unwrap();
        let twice = two_qubit_step(&once, &params).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((twice.entry(i, j) - t.entry(i, j)).norm());
            }
        }
        assert!(worst < 1e-10, "period-2 recurrence off by {worst:e}");
        // The partner state is orthogonal to the target.
        assert!(fidelity(&once, &t).unwrap() < 1e-10);
    }

    #[test]
    fn run_from_target_alternates_exactly() {
        let traj = run_protocol(&make_target(), &pi4_params(), 10).unwrap();
        assert_eq!(traj.records.len(), 11);
        assert!(traj.degenerate_halt_step.is_none());
        let f: Vec<f64> = traj.records.iter().map(|r| r.fidelity).collect();
        for k in 2..f.len() {
            assert_abs_diff_eq!(f[k], f[k - 2], epsilon = 1e-9);
        }
        for k in (0..f.len()).step_by(2) {
            assert_abs_diff_eq!(f[k], 1.0, epsilon = 1e-9);
        }
        assert_eq!(detect_transient_breakdown(&traj, 1e-6).unwrap(), None);
    }

    #[test]
    fn purification_run_converges_on_even_steps() {
        let traj = run_protocol(&make_initial_rho0(), &pi4_params(), 40).unwrap();
        let f: Vec<f64> = traj.records.iter().map(|r| r.fidelity).collect();
        assert_abs_diff_eq!(f[0], 0.895, epsilon = 1e-12);

        let even: Vec<f64> = f.iter().copied().step_by(2).collect();
        let crossing = even
            .iter()
            .position(|&v| v > 1.0 - 1e-6)
            .expect("fidelity must cross 1 - 1e-6 within 40 steps");
        for w in even[..=crossing].windows(2) {
            assert!(w[1] > w[0], "even-step fidelity must rise until it saturates");
        }
        for (i, &v) in f.iter().enumerate().skip(1).step_by(2) {
            assert!(v < 0.1, "odd step {i} fidelity {v} (orthogonal partner)");
        }
        // The p1/4 regime is stable: the period-2 pattern never breaks.
        assert_eq!(detect_transient_breakdown(&traj, 1e-6).unwrap(), None);
    }

    #[test]
    fn chaotic_run_breaks_down() {
        let params = ProtocolParams::new(0.293 * PI, FRAC_PI_2, 0.293 * PI, FRAC_PI_2).unwrap();
        let traj = run_protocol(&make_initial_rho0(), &params, 1000).unwrap();
        let breakdown = detect_transient_breakdown(&traj, DEFAULT_BREAKDOWN_TOL).unwrap();
        let k = breakdown.expect("metastable transient must end");
        assert!((4..=400).contains(&k), "breakdown at {k}");
    }

    #[test]
    fn detector_examples() {
        // Synthetic exact period-2 pattern: never fires.
        let mk = |fids: &[f64]| Trajectory {
            records: fids
                .iter()
                .enumerate()
                .map(|(step, &fidelity)| StepRecord {
                    step,
                    fidelity,
                    purity: 1.0,
                    success_probability: 1.0,
                })
                .collect(),
            degenerate_halt_step: None,
        };
        let periodic = mk(&[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(detect_transient_breakdown(&periodic, 1e-6).unwrap(), None);

        // Pattern forms (d2 = d3 = 0), then breaks at step 6.
        let breaking = mk(&[0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.5, 0.1]);
        assert_eq!(detect_transient_breakdown(&breaking, 1e-3).unwrap(), Some(6));

        // A transient before the pattern forms is not a breakdown.
        let transient = mk(&[0.3, 0.6, 0.8, 0.1, 0.9, 0.1, 0.9, 0.1, 0.9]);
        assert_eq!(detect_transient_breakdown(&transient, 1e-3).unwrap(), None);

        // Never forms: absent.
        let chaotic = mk(&[0.1, 0.5, 0.9, 0.2, 0.7, 0.4]);
        assert_eq!(detect_transient_breakdown(&chaotic, 1e-3).unwrap(), None);

        assert!(detect_transient_breakdown(&periodic, 0.0).is_err());
        assert!(detect_transient_breakdown(&periodic, -1.0).is_err());
        assert!(detect_transient_breakdown(&periodic, f64::NAN).is_err());
    }

    #[test]
    fn random_angle_runs_keep_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let params = ProtocolParams::new(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            )
            .unwrap();
            let traj = run_protocol(&make_initial_rho0(), &params, 100).unwrap();
            assert!(traj.degenerate_halt_step.is_none());
            assert_eq!(traj.records.len(), 101);
            for r in &traj.records {
                assert!(r.fidelity >= -1e-10 && r.fidelity <= 1.0 + 1e-10, "f = {}", r.fidelity);
                assert!(r.purity >= 0.25 - 1e-10 && r.purity <= 1.0 + 1e-10, "purity = {}", r.purity);
                assert!(
                    r.success_probability > 0.0 && r.success_probability <= 1.0 + 1e-12,
                    "probability = {}",
                    r.success_probability
                );
            }
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        let qubit = DensityMatrix::new(
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let params = pi4_params();
        assert!(two_qubit_step(&qubit, &params).is_err());
        assert!(run_protocol(&qubit, &params, 3).is_err());
    }
}
