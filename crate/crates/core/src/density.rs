//! Density-matrix level dynamics: the element-squaring map S, single-qubit
//! rotations R, the composed step F = R S, and the XOR-protocol oracle that
//! derives S from the underlying two-copy circuit.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DensityViolation, Error, Result};

/// Tolerance for the Hermiticity and unit-trace invariants.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Smallest eigenvalue a state may carry; accumulated rounding must not
/// reject valid states, so the floor sits well below working precision.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Below this diagonal square sum the conditioning outcome has effectively
/// zero probability and renormalization is meaningless.
pub const DEGENERATE_THRESHOLD: f64 = 1e-15;

/// A D x D Hermitian, unit-trace, positive-semidefinite matrix.
///
/// Valid by construction: every public constructor (and the JSON loader)
/// checks all three invariants and reports the first one that fails.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    m: DMatrix<Complex64>,
}

/// The pair (x, phi) of angles, in radians, defining the unitary
/// U = [[cos x, sin x e^{i phi}], [-sin x e^{-i phi}, cos x]].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub x: f64,
    pub phi: f64,
}

impl RotationParams {
    pub fn new(x: f64, phi: f64) -> Result<Self> {
        for (name, value) in [("x", x), ("phi", phi)] {
            if !value.is_finite() {
                return Err(Error::NonFiniteParameter { name, value });
            }
        }
        Ok(RotationParams { x, phi })
    }
}

/// A 2 x 2 unitary, guaranteed unitary within 1e-12.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryMatrix {
    m: Matrix2<Complex64>,
}

impl UnitaryMatrix {
    /// Validates unitarity of an arbitrary 2 x 2 matrix.
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        let prod = m.adjoint() * m;
        let mut deviation: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                deviation = deviation.max((prod[(i, j)] - expect).norm());
            }
        }
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix { m })
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.m
    }
}

impl DensityMatrix {
    /// Builds a density matrix from row-major entries, validating all
    /// invariants.
    pub fn new(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 {
            return Err(DensityViolation::ZeroDim.into());
        }
        if entries.len() != dim * dim {
            return Err(DensityViolation::EntryCount {
                expected: dim * dim,
                got: entries.len(),
            }
            .into());
        }
        let m = DMatrix::from_row_slice(dim, dim, entries);
        Self::from_matrix(m)
    }

    /// Builds from an owned nalgebra matrix, validating all invariants.
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let dim = m.nrows();
        if dim == 0 {
            return Err(DensityViolation::ZeroDim.into());
        }
        validate(&m)?;
        Ok(DensityMatrix { dim, m })
    }

    /// Bypasses validation. Only for tests that need states outside the
    /// physical cone (e.g. exercising the degenerate-measurement path, which
    /// is unreachable from valid states).
    #[cfg(test)]
    pub(crate) fn new_unchecked(dim: usize, entries: &[Complex64]) -> Self {
        DensityMatrix {
            dim,
            m: DMatrix::from_row_slice(dim, dim, entries),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Tr(rho^2); equals the sum of |entry|^2 for Hermitian matrices.
    pub fn purity(&self) -> f64 {
        self.m.iter().map(|e| e.norm_sqr()).sum()
    }

    /// Smallest eigenvalue (all are real up to the Hermiticity tolerance).
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_min_eigenvalue(&self.m)
    }

    /// Row-major copy of the entries.
    pub fn entries_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(self.m[(i, j)]);
            }
        }
        out
    }
}

fn validate(m: &DMatrix<Complex64>) -> Result<()> {
    let dim = m.nrows();
    let mut herm_dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let e = m[(i, j)];
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(DensityViolation::NonFiniteEntry { row: i, col: j }.into());
            }
            if j >= i {
                herm_dev = herm_dev.max((e - m[(j, i)].conj()).norm());
            }
        }
    }
    if herm_dev > HERMITICITY_TOL {
        return Err(DensityViolation::NotHermitian { deviation: herm_dev }.into());
    }
    let trace: Complex64 = (0..dim).map(|i| m[(i, i)]).sum();
    let trace_dev = (trace - Complex64::new(1.0, 0.0)).norm();
    if trace_dev > HERMITICITY_TOL {
        return Err(DensityViolation::TraceNotUnit {
            trace: trace.re,
            deviation: trace_dev,
        }
        .into());
    }
    let min_eig = hermitian_min_eigenvalue(m);
    if min_eig < EIGENVALUE_FLOOR {
        return Err(DensityViolation::NotPositiveSemidefinite {
            min_eigenvalue: min_eig,
        }
        .into());
    }
    Ok(())
}

/// Eigenvalues of a Hermitian H = A + iB via the real symmetric embedding
/// [[A, -B], [B, A]], whose spectrum is that of H with doubled multiplicity.
pub(crate) fn hermitian_min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let d = m.nrows();
    let mut s = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let e = m[(i, j)];
            s[(i, j)] = e.re;
            s[(i + d, j + d)] = e.re;
            s[(i, j + d)] = -e.im;
            s[(i + d, j)] = e.im;
        }
    }
    let eig = SymmetricEigen::new(s);
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Post-selection success probability of the squaring map: sum of squared
/// diagonal entries. Lies in [1/D, 1] for any valid state by Cauchy-Schwarz.
pub fn measurement_probability(rho: &DensityMatrix) -> f64 {
    diag_square_sum(rho.matrix())
}

fn diag_square_sum(m: &DMatrix<Complex64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re * m[(i, i)].re).sum()
}

/// The nonlinear squaring map S: entry(i,j) -> N entry(i,j)^2 with
/// N = 1 / sum_i entry(i,i)^2. Entries are squared as complex numbers, so
/// off-diagonal phases double.
///
/// # Errors
/// [`Error::DegenerateMeasurement`] if the diagonal square sum is at or
/// below [`DEGENERATE_THRESHOLD`]. Unreachable from valid states (the sum is
/// at least 1/D); the check guards non-validated internal callers.
pub fn squaring_map(rho: &DensityMatrix) -> Result<DensityMatrix> {
    squaring_map_raw(rho.matrix()).and_then(DensityMatrix::from_matrix)
}

fn squaring_map_raw(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let sum = diag_square_sum(m);
    if sum <= DEGENERATE_THRESHOLD {
        return Err(Error::DegenerateMeasurement {
            sum,
            threshold: DEGENERATE_THRESHOLD,
        });
    }
    Ok(m.map(|e| e * e / sum))
}

/// The unitary of the single-qubit rotation,
/// U = [[cos x, sin x e^{i phi}], [-sin x e^{-i phi}, cos x]].
pub fn build_unitary(params: RotationParams) -> UnitaryMatrix {
    let (c, s) = (params.x.cos(), params.x.sin());
    let phase = Complex64::from_polar(1.0, params.phi);
    let m = Matrix2::new(
        Complex64::new(c, 0.0),
        s * phase,
        -s * phase.conj(),
        Complex64::new(c, 0.0),
    );
    // Unitary by construction: rows are orthonormal for any (x, phi).
    UnitaryMatrix { m }
}

/// The rotation R rho = U rho U-dagger (single qubit).
///
/// The exact map preserves Hermiticity but floating-point products do not,
/// and downstream period-2 dynamics amplifies any leaked non-Hermitian
/// component; the result is therefore projected back onto the Hermitian
/// part, which is an invariant of the exact map.
pub fn rotate(rho: &DensityMatrix, u: &UnitaryMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    let big = DMatrix::from_fn(2, 2, |i, j| u.m[(i, j)]);
    DensityMatrix::from_matrix(conjugate_hermitian(rho.matrix(), &big))
}

/// U rho U-dagger followed by projection onto the Hermitian part.
pub(crate) fn conjugate_hermitian(
    rho: &DMatrix<Complex64>,
    u: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let raw = u * rho * u.adjoint();
    let half = Complex64::new(0.5, 0.0);
    DMatrix::from_fn(raw.nrows(), raw.ncols(), |i, j| {
        (raw[(i, j)] + raw[(j, i)].conj()) * half
    })
}

/// One step of the conditional dynamics, F = R S.
pub fn qubit_step(rho: &DensityMatrix, params: RotationParams) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    rotate(&squaring_map(rho)?, &build_unitary(params))
}

/// Kronecker product of two states (the joint state of independent copies).
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let m = a.matrix().kronecker(b.matrix());
    // Hermitian, unit-trace, PSD by construction from valid factors.
    DensityMatrix {
        dim: a.dim() * b.dim(),
        m,
    }
}

/// Derives the squaring map from first principles: builds rho (x) rho,
/// applies the XOR gate |i>|j> -> |i>|i-j mod D> as an index permutation,
/// projects the second copy onto |0>, and renormalizes.
///
/// Agrees with [`squaring_map`] entrywise to 1e-12; that agreement is the
/// verification contract for S.
pub fn xor_protocol_oracle(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = rho.dim();
    let joint = tensor_product(rho, rho);
    // XOR permutation on product indices: a = i*D + j maps to i*D + (i-j mod D).
    let perm: Vec<usize> = (0..d * d)
        .map(|a| {
            let (i, j) = (a / d, a % d);
            i * d + (i + d - j) % d
        })
        .collect();
    // (U_xor rho U_xor^dagger)[perm(a), perm(b)] = rho[a, b]; read off the
    // block with the second subsystem in |0> on both sides.
    let mut projected = DMatrix::<Complex64>::zeros(d, d);
    let mut inverse = vec![0usize; d * d];
    for (src, &dst) in perm.iter().enumerate() {
        inverse[dst] = src;
    }
    for i in 0..d {
        for k in 0..d {
            projected[(i, k)] = joint.matrix()[(inverse[i * d], inverse[k * d])];
        }
    }
    let norm: f64 = (0..d).map(|i| projected[(i, i)].re).sum();
    if norm <= DEGENERATE_THRESHOLD {
        return Err(Error::DegenerateMeasurement {
            sum: norm,
            threshold: DEGENERATE_THRESHOLD,
        });
    }
    DensityMatrix::from_matrix(projected.map(|e| e / norm))
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixRepr {
    dim: usize,
    entries: Vec<(f64, f64)>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DensityMatrixRepr {
            dim: self.dim,
            entries: self
                .entries_row_major()
                .iter()
                .map(|e| (e.re, e.im))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let repr = DensityMatrixRepr::deserialize(deserializer)?;
        let entries: Vec<Complex64> = repr
            .entries
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect();
        DensityMatrix::new(repr.dim, &entries).map_err(serde::de::Error::custom)
    }
}
