//! Truncated single- and two-mode Fock-space linear algebra.
//!
//! All matrices are dense `DMatrix<Complex64>`. A truncation of dimension `d`
//! keeps the levels `|0⟩..|d-1⟩`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance used for structural identities (Hermiticity, exact algebra).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Iteration cap for [`dominant_eigenvalue`].
pub const POWER_ITERATION_CAP: usize = 100_000;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Truncation dimension of a single bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockDim(usize);

impl FockDim {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension {
                dim,
                reason: "at least one Fock level is required",
            });
        }
        Ok(Self(dim))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for FockDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// State vector in a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    dim: FockDim,
    amplitudes: CVector,
}

impl FockVector {
    pub fn from_amplitudes(amplitudes: CVector) -> Result<Self> {
        let dim = FockDim::new(amplitudes.len())?;
        Ok(Self { dim, amplitudes })
    }

    pub fn basis(n: usize, dim: FockDim) -> Result<Self> {
        if n >= dim.get() {
            return Err(Error::InvalidDimension {
                dim: dim.get(),
                reason: "basis level outside the truncation",
            });
        }
        let mut amplitudes = CVector::zeros(dim.get());
        amplitudes[n] = ONE;
        Ok(Self { dim, amplitudes })
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn projector(&self) -> FockOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        FockOperator {
            dim: self.dim,
            matrix: m,
            hermitian: true,
        }
    }
}

/// Square operator on a single truncated mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dim: FockDim,
    matrix: CMatrix,
    hermitian: bool,
}

impl FockOperator {
    /// Wraps a square matrix without any structural claim.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = square_dim(&matrix)?;
        Ok(Self {
            dim: FockDim::new(dim)?,
            matrix,
            hermitian: false,
        })
    }

    /// Wraps a matrix that must be Hermitian within [`STRUCTURAL_TOL`] (relative to its largest entry).
    pub fn new_hermitian(matrix: CMatrix) -> Result<Self> {
        let dim = square_dim(&matrix)?;
        let scale = matrix.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
        let defect = hermitian_defect(&matrix);
        if defect > STRUCTURAL_TOL * scale {
            return Err(domain(
                "hermitian defect",
                defect,
                "matrix is not Hermitian",
            ));
        }
        Ok(Self {
            dim: FockDim::new(dim)?,
            matrix,
            hermitian: true,
        })
    }

    pub(crate) fn from_parts(matrix: CMatrix, hermitian: bool) -> Self {
        let dim = FockDim(matrix.nrows());
        Self {
            dim,
            matrix,
            hermitian,
        }
    }

    pub fn identity(dim: FockDim) -> Self {
        Self::from_parts(CMatrix::identity(dim.get(), dim.get()), true)
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `⟨v|self|v⟩`; for a density matrix and a pure target this is the fidelity.
    pub fn expectation(&self, v: &FockVector) -> Result<Complex64> {
        check_dim(self.dim.get(), v.dim().get())?;
        Ok(v.amplitudes.dotc(&(&self.matrix * &v.amplitudes)))
    }

    /// Real eigenvalues in ascending order. Only meaningful for Hermitian operators.
    pub fn eigenvalues(&self) -> DVector<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Zero-pads into a larger truncation.
    pub fn embed(&self, dim: FockDim) -> Result<Self> {
        let d = self.dim.get();
        if dim.get() < d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: dim.get(),
            });
        }
        let mut m = CMatrix::zeros(dim.get(), dim.get());
        m.view_mut((0, 0), (d, d)).copy_from(&self.matrix);
        Ok(Self::from_parts(m, self.hermitian))
    }

    /// Compresses onto the first `dim` levels (`P ρ P`).
    pub fn crop(&self, dim: FockDim) -> Result<Self> {
        if dim.get() > self.dim.get() {
            return Err(Error::DimensionMismatch {
                expected: self.dim.get(),
                found: dim.get(),
            });
        }
        let m = self.matrix.view((0, 0), (dim.get(), dim.get())).into_owned();
        Ok(Self::from_parts(m, self.hermitian))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(&self.matrix * Complex64::from(factor), self.hermitian)
    }
}

/// Operator on `output ⊗ input`, flattened as `m * dim_in + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeOperator {
    dim_out: FockDim,
    dim_in: FockDim,
    matrix: CMatrix,
}

impl TwoModeOperator {
    pub fn new(dim_out: FockDim, dim_in: FockDim, matrix: CMatrix) -> Result<Self> {
        let total = dim_out.get() * dim_in.get();
        let d = square_dim(&matrix)?;
        check_dim(total, d)?;
        Ok(Self {
            dim_out,
            dim_in,
            matrix,
        })
    }

    pub fn dim_out(&self) -> FockDim {
        self.dim_out
    }

    pub fn dim_in(&self) -> FockDim {
        self.dim_in
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    #[inline]
    pub fn index(&self, m: usize, p: usize) -> usize {
        m * self.dim_in.get() + p
    }

    /// `⟨m,p|X|n,q⟩`.
    #[inline]
    pub fn element(&self, m: usize, p: usize, n: usize, q: usize) -> Complex64 {
        self.matrix[(self.index(m, p), self.index(n, q))]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// Selects the factor kept by [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Output,
    Input,
}

/// Truncated coherent state `e^{-|α|²/2} Σ αⁿ/√n! |n⟩`.
pub fn coherent_state(alpha: Complex64, dim: FockDim) -> FockVector {
    let mut amplitudes = CVector::zeros(dim.get());
    let mut a = Complex64::from((-0.5 * alpha.norm_sqr()).exp());
    amplitudes[0] = a;
    for n in 1..dim.get() {
        a = a * alpha / (n as f64).sqrt();
        amplitudes[n] = a;
    }
    FockVector { dim, amplitudes }
}

/// Exact overlap `⟨α|β⟩ = exp((-|α|² - |β|² + 2 ᾱβ)/2)`.
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    ((-alpha.norm_sqr() - beta.norm_sqr() + 2.0 * alpha.conj() * beta) * 0.5).exp()
}

/// Thermal state `(1-x) Σ xⁿ |n⟩⟨n|` truncated to `dim` levels.
pub fn thermal_state(x: f64, dim: FockDim) -> Result<FockOperator> {
    if !(0.0..1.0).contains(&x) {
        return Err(domain("x", x, "thermal parameter must satisfy 0 <= x < 1"));
    }
    let diag = CVector::from_iterator(
        dim.get(),
        (0..dim.get()).map(|n| Complex64::from((1.0 - x) * x.powi(n as i32))),
    );
    Ok(FockOperator::from_parts(CMatrix::from_diagonal(&diag), true))
}

#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub annihilation: CMatrix,
    pub creation: CMatrix,
    pub number: CMatrix,
}

pub fn mode_operators(dim: FockDim) -> Result<ModeOperators> {
    let d = dim.get();
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "mode operators need at least two levels",
        });
    }
    let mut annihilation = CMatrix::zeros(d, d);
    for n in 1..d {
        annihilation[(n - 1, n)] = Complex64::from((n as f64).sqrt());
    }
    let creation = annihilation.adjoint();
    let number = CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        (0..d).map(|n| Complex64::from(n as f64)),
    ));
    Ok(ModeOperators {
        annihilation,
        creation,
        number,
    })
}

/// Kronecker product `a ⊗ b` with `a` on the output mode.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> Result<TwoModeOperator> {
    let da = FockDim::new(square_dim(a)?)?;
    let db = FockDim::new(square_dim(b)?)?;
    TwoModeOperator::new(da, db, a.kronecker(b))
}

pub fn partial_trace(x: &TwoModeOperator, keep: Mode) -> FockOperator {
    let (d_out, d_in) = (x.dim_out.get(), x.dim_in.get());
    let hermitian = hermitian_defect(&x.matrix) <= STRUCTURAL_TOL;
    match keep {
        Mode::Output => {
            let m = CMatrix::from_fn(d_out, d_out, |i, j| {
                (0..d_in).map(|p| x.element(i, p, j, p)).sum()
            });
            FockOperator::from_parts(m, hermitian)
        }
        Mode::Input => {
            let m = CMatrix::from_fn(d_in, d_in, |i, j| {
                (0..d_out).map(|k| x.element(k, i, k, j)).sum()
            });
            FockOperator::from_parts(m, hermitian)
        }
    }
}

/// `exp(K)` together with its unitarity defect `max |U U† - I|`.
#[derive(Debug, Clone)]
pub struct Unitary {
    pub matrix: CMatrix,
    pub defect: f64,
}

/// Exponentiates an anti-Hermitian generator through the eigendecomposition of `iK`.
pub fn unitary_from_generator(k: &CMatrix) -> Result<Unitary> {
    let d = square_dim(k)?;
    let scale = k.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    let defect = (k + k.adjoint()).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if defect > 1e-10 * scale {
        return Err(Error::NotAntiHermitian { defect });
    }
    let h = k * Complex64::i();
    // Symmetrize away rounding so the Hermitian solver sees an exact Hermitian input.
    let h = (&h + h.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(h);
    let phases = CVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l)),
    );
    let v = &eig.eigenvectors;
    let mut vp = v.clone();
    for (j, mut col) in vp.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    let matrix = vp * v.adjoint();
    let defect = unitarity_defect(&matrix);
    Ok(Unitary { matrix, defect })
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let d = u.nrows();
    (u * u.adjoint() - CMatrix::identity(d, d))
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest eigenvalue and a unit eigenvector.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: CVector,
    pub iterations: usize,
}

/// Power iteration for a Hermitian positive semidefinite matrix.
///
/// Stops when successive Rayleigh quotients satisfy `|λ_{k+1} - λ_k| < tol·λ_{k+1}`.
pub fn dominant_eigenvalue(h: &CMatrix, tol: f64) -> Result<Eigenpair> {
    dominant_eigenvalue_capped(h, tol, POWER_ITERATION_CAP)
}

pub fn dominant_eigenvalue_capped(h: &CMatrix, tol: f64, max_iter: usize) -> Result<Eigenpair> {
    let d = square_dim(h)?;
    // All-ones start with a deterministic aperiodic perturbation.
    let mut v = CVector::from_iterator(
        d,
        (0..d).map(|j| {
            let t = ((j as f64 + 1.0) * 0.618_033_988_749_895).fract();
            Complex64::new(1.0 + 0.1 * (t - 0.5), 0.01 * (t - 0.5))
        }),
    );
    v.normalize_mut();
    let mut last = f64::NAN;
    for it in 1..=max_iter {
        let w = h * &v;
        let value = v.dotc(&w).re;
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(Eigenpair {
                value: 0.0,
                vector: v,
                iterations: it,
            });
        }
        v = w / Complex64::from(norm);
        if (value - last).abs() < tol * value.abs() {
            let value = v.dotc(&(h * &v)).re;
            return Ok(Eigenpair {
                value,
                vector: v,
                iterations: it,
            });
        }
        last = value;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_value: last,
        last_vector: Box::new(v),
    })
}

/// `Re Tr[H^p]` by binary exponentiation.
pub fn trace_power(h: &CMatrix, p: u32) -> Result<f64> {
    let d = square_dim(h)?;
    if p == 0 {
        return Err(domain("p", 0.0, "trace power needs p >= 1"));
    }
    let mut result: Option<CMatrix> = None;
    let mut base = h.clone();
    let mut e = p;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r * &base,
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = &base * &base;
    }
    let r = result.unwrap_or_else(|| CMatrix::identity(d, d));
    Ok(r.trace().re)
}

/// Eigenvalues (ascending) of the Hermitian part of `h`.
pub fn hermitian_eigenvalues(h: &CMatrix) -> DVector<f64> {
    let sym = (h + h.adjoint()) * Complex64::from(0.5);
    let mut ev = SymmetricEigen::new(sym).eigenvalues;
    ev.as_mut_slice().sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Half the trace norm of `a - b`.
pub fn trace_distance(a: &FockOperator, b: &FockOperator) -> Result<f64> {
    check_dim(a.dim.get(), b.dim.get())?;
    let diff = &a.matrix - &b.matrix;
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

/// Displacement operator `D(α)` compressed to `dim` levels.
///
/// Built by exponentiating `αa† - ᾱa` in a padded truncation and cropping, so the
/// retained block is free of the edge reflection of a bare truncated exponential.
pub fn displacement(alpha: Complex64, dim: FockDim) -> Result<CMatrix> {
    let pad = dim.get() + 40 + (8.0 * alpha.norm_sqr()).ceil() as usize;
    let ops = mode_operators(FockDim::new(pad)?)?;
    let gen = &ops.creation * alpha - &ops.annihilation * alpha.conj();
    let u = unitary_from_generator(&gen)?;
    Ok(u.matrix.view((0, 0), (dim.get(), dim.get())).into_owned())
}

/// `D ρ D†`.
pub fn conjugate(rho: &FockOperator, u: &CMatrix) -> Result<FockOperator> {
    check_dim(rho.dim.get(), u.nrows())?;
    Ok(FockOperator::from_parts(
        u * &rho.matrix * u.adjoint(),
        rho.hermitian,
    ))
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn square_dim(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
