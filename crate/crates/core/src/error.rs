use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The conditioning measurement outcome has (numerically) zero
    /// probability: the diagonal square sum fell at or below the threshold,
    /// so renormalization is meaningless.
    #[error("degenerate measurement: diagonal square sum {sum:e} is at or below {threshold:e}")]
    DegenerateMeasurement { sum: f64, threshold: f64 },

    /// Matrix dimensions do not match what the operation requires.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An input failed one of the density-matrix invariants.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(#[from] DensityViolation),

    /// The claimed unitary is not unitary within tolerance.
    #[error("matrix is not unitary: max |U\u{2020}U - I| entry = {deviation:e}")]
    NotUnitary { deviation: f64 },

    /// The pure-state amplitudes are not normalized within tolerance.
    #[error("pure state not normalized: |a0|\u{b2}+|a1|\u{b2} = {norm}")]
    NotNormalized { norm: f64 },

    /// x is too close to an odd multiple of pi/2; p = tan(x)e^{i phi} has no
    /// finite value there.
    #[error("singular rotation: |cos x| = {cos_abs:e} at x = {x}; the coordinate chart breaks down")]
    SingularRotation { x: f64, cos_abs: f64 },

    /// A map parameter or angle was NaN or infinite.
    #[error("non-finite parameter: {name} = {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },

    /// A tolerance or other strictly-positive argument was not positive.
    #[error("invalid tolerance: {name} = {value} (must be positive and finite)")]
    InvalidTolerance { name: &'static str, value: f64 },

    /// Neither critical orbit revisited itself within the iteration budget.
    #[error("no attracting cycle found within {max_iter} iterations")]
    NoCycleFound { max_iter: usize },

    /// A grid specification was degenerate.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A trajectory state left the positive-semidefinite cone beyond
    /// tolerance; the step index and offending matrix are attached for
    /// diagnosis rather than being clamped away.
    #[error("positivity violated at step {step}: min eigenvalue {min_eigenvalue:e}\n{dump}")]
    PositivityViolation {
        step: usize,
        min_eigenvalue: f64,
        dump: String,
    },

    /// Trace of rho times the target acquired a non-negligible imaginary
    /// part, which contradicts Hermiticity of the inputs.
    #[error("fidelity has non-real trace: imaginary part {imag:e}")]
    NonRealFidelity { imag: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which density-matrix invariant failed, with the measured deviation.
#[derive(Debug, Error)]
pub enum DensityViolation {
    #[error("entry count {got} does not match dim\u{b2} = {expected}")]
    EntryCount { expected: usize, got: usize },
    #[error("dim must be positive")]
    ZeroDim,
    #[error("entry ({row},{col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("not Hermitian: max |entry(i,j) - conj(entry(j,i))| = {deviation:e} (tolerance 1e-12)")]
    NotHermitian { deviation: f64 },
    #[error("trace {trace} differs from 1 by {deviation:e} (tolerance 1e-12)")]
    TraceNotUnit { trace: f64, deviation: f64 },
    #[error("not positive semidefinite: min eigenvalue {min_eigenvalue:e} (floor -1e-10)")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
