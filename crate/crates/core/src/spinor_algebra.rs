//! 2x2 spinor algebra for SL(2,C), tensor-power representations, the little
//! group E(2), and intertwiner-space computation.
//!
//! The basic dictionary is the momentum-matrix isomorphism
//!
//!   P = p0*s0 + p1*s1 + p2*s2 + p3*s3 = [[p0+p3, p1-i*p2], [p1+i*p2, p0-p3]]
//!
//! (s0 = identity, s1..s3 the Pauli matrices), with det P equal to the
//! Minkowski square p0^2 - p1^2 - p2^2 - p3^2. A matrix A in SL(2,C) acts by
//! P -> A P A*, which defines the Lorentz transformation Lambda_A on momenta;
//! A and -A give the same Lambda_A.
//!
//! Finite-dimensional representations D^(j/2,k/2)(A) = (tensor^j A) x
//! (tensor^k conj(A)) are realized on the full 2^(j+k)-dimensional tensor
//! space, not the symmetric subspace; the symmetrizer is available separately.
//! This matches the explicit 4x4 matrices used downstream (field-strength
//! projection, tensor-square fibre weights), and embedded one-particle vectors
//! are rank-one tensor powers, hence automatically symmetric.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{max_abs, C64, CMat, CVec};

/// 2x2 complex matrix; SL(2,C) group elements and momentum matrices.
pub type Spin2Matrix = Matrix2<C64>;

/// Real four-vector (p0, p1, p2, p3) in natural units, signature (+,-,-,-).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourVector {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl FourVector {
    pub fn new(p0: f64, p1: f64, p2: f64, p3: f64) -> Self {
        Self { p0, p1, p2, p3 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Base point of the forward light cone: (1, 0, 0, 1).
    pub fn cone_base_point() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn components(&self) -> [f64; 4] {
        [self.p0, self.p1, self.p2, self.p3]
    }

    pub fn from_components(c: [f64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    /// Minkowski inner product p0*q0 - p1*q1 - p2*q2 - p3*q3.
    pub fn minkowski_dot(&self, q: &FourVector) -> f64 {
        self.p0 * q.p0 - self.p1 * q.p1 - self.p2 * q.p2 - self.p3 * q.p3
    }

    /// Minkowski square p.p.
    pub fn minkowski_sq(&self) -> f64 {
        self.minkowski_dot(self)
    }

    /// Euclidean square p0^2 + |p_vec|^2 (used by Schwartz seminorms).
    pub fn euclidean_sq(&self) -> f64 {
        self.p0 * self.p0 + self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3
    }

    pub fn spatial_norm(&self) -> f64 {
        (self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3).sqrt()
    }

    /// Spatial reflection (p0, -p1, -p2, -p3).
    pub fn parity_flip(&self) -> Self {
        Self::new(self.p0, -self.p1, -self.p2, -self.p3)
    }

    pub fn negate(&self) -> Self {
        Self::new(-self.p0, -self.p1, -self.p2, -self.p3)
    }

    pub fn add(&self, q: &FourVector) -> Self {
        Self::new(self.p0 + q.p0, self.p1 + q.p1, self.p2 + q.p2, self.p3 + q.p3)
    }

    pub fn sub(&self, q: &FourVector) -> Self {
        Self::new(self.p0 - q.p0, self.p1 - q.p1, self.p2 - q.p2, self.p3 - q.p3)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.p0, s * self.p1, s * self.p2, s * self.p3)
    }

    /// Forward light cone membership: |p.p| <= tol * p0^2 and p0 > 0.
    pub fn is_on_forward_cone(&self, tol: f64) -> bool {
        self.p0 > 0.0 && self.minkowski_sq().abs() <= tol * self.p0 * self.p0
    }

    /// Forward mass-shell membership: |p.p - m^2| <= tol * m^2 and p0 > 0.
    pub fn is_on_forward_shell(&self, mass: f64, tol: f64) -> bool {
        self.p0 > 0.0 && (self.minkowski_sq() - mass * mass).abs() <= tol * mass * mass
    }
}

/// Errors from spinor-algebra operations.
#[derive(Debug, Error)]
pub enum SpinorError {
    #[error("matrix is not self-adjoint (defect {0:.3e} exceeds 1e-10)")]
    NotSelfAdjoint(f64),
    #[error("matrix is not unimodular (|det - 1| = {0:.3e} exceeds 1e-12)")]
    NotUnimodular(f64),
}

/// Representation label: D^(j/2,k/2) acting on the full tensor space of
/// dimension 2^(j+k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepLabel {
    /// Number of undotted (unconjugated) tensor factors.
    pub j: u32,
    /// Number of dotted (conjugated) tensor factors.
    pub k: u32,
}

impl RepLabel {
    pub fn new(j: u32, k: u32) -> Self {
        Self { j, k }
    }

    /// Dimension of the full tensor space, 2^(j+k).
    pub fn dim(&self) -> usize {
        1usize << (self.j + self.k)
    }

    /// Dimension of the symmetric subspace, (j+1)(k+1).
    pub fn symmetric_dim(&self) -> usize {
        ((self.j + 1) * (self.k + 1)) as usize
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// P = p0*s0 + sum_i p_i*s_i as an explicit 2x2 matrix.
pub fn momentum_to_matrix(p: &FourVector) -> Spin2Matrix {
    Spin2Matrix::new(
        c(p.p0 + p.p3, 0.0),
        c(p.p1, -p.p2),
        c(p.p1, p.p2),
        c(p.p0 - p.p3, 0.0),
    )
}

/// Inverse of [`momentum_to_matrix`] via Pauli traces. Rejects input whose
/// self-adjointness defect exceeds 1e-10.
pub fn matrix_to_momentum(m: &Spin2Matrix) -> Result<FourVector, SpinorError> {
    let defect = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(SpinorError::NotSelfAdjoint(defect));
    }
    let p0 = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let p3 = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let p1 = 0.5 * (m[(1, 0)].re + m[(0, 1)].re);
    let p2 = 0.5 * (m[(1, 0)].im - m[(0, 1)].im);
    Ok(FourVector::new(p0, p1, p2, p3))
}

/// |det A - 1|, the unimodularity defect.
pub fn unimodular_defect(a: &Spin2Matrix) -> f64 {
    (a.determinant() - c(1.0, 0.0)).norm()
}

/// Lambda_A p, defined by A P A* = P'. Requires |det A - 1| <= 1e-12.
pub fn lorentz_action(a: &Spin2Matrix, p: &FourVector) -> Result<FourVector, SpinorError> {
    let defect = unimodular_defect(a);
    if defect > 1e-12 {
        return Err(SpinorError::NotUnimodular(defect));
    }
    let m = a * momentum_to_matrix(p) * a.adjoint();
    // A P A* is self-adjoint up to rounding; symmetrize before reading off p.
    let m = (m + m.adjoint()).scale(0.5);
    matrix_to_momentum(&m)
}

/// Entrywise complex conjugate.
pub fn conj2(a: &Spin2Matrix) -> Spin2Matrix {
    a.conjugate()
}

/// Copy a 2x2 matrix into a dynamically sized one.
pub fn to_dmat(a: &Spin2Matrix) -> CMat {
    CMat::from_fn(2, 2, |i, j| a[(i, j)])
}

/// D^(j/2,k/2)(A) = (tensor^j A) x (tensor^k conj(A)) on the full
/// 2^(j+k)-dimensional tensor space. Label (0,0) gives the 1x1 identity.
pub fn rep_apply(label: RepLabel, a: &Spin2Matrix) -> CMat {
    let a_d = to_dmat(a);
    let a_conj = to_dmat(&a.conjugate());
    let mut out = CMat::identity(1, 1);
    for _ in 0..label.j {
        out = out.kronecker(&a_d);
    }
    for _ in 0..label.k {
        out = out.kronecker(&a_conj);
    }
    out
}

fn permutation_matrices_dim(factors: u32) -> CMat {
    // Symmetrizer on (C^2)^{tensor factors}: average of all factor
    // permutations. Basis index digits are big-endian (first factor most
    // significant), matching the Kronecker convention of `rep_apply`.
    let n = factors as usize;
    let dim = 1usize << n;
    let mut s = CMat::zeros(dim, dim);
    if n == 0 {
        s[(0, 0)] = c(1.0, 0.0);
        return s;
    }
    let perms: Vec<Vec<usize>> = itertools::Itertools::permutations(0..n, n).collect();
    let weight = 1.0 / perms.len() as f64;
    for perm in &perms {
        for col in 0..dim {
            let digit = |l: usize| (col >> (n - 1 - l)) & 1;
            let mut row = 0usize;
            for (l, &src) in perm.iter().enumerate() {
                row |= digit(src) << (n - 1 - l);
            }
            s[(row, col)] += c(weight, 0.0);
        }
    }
    s
}

/// Orthoprojection onto the symmetric subspace Sym^j x Sym^k of the full
/// tensor space; commutes with every `rep_apply(label, .)`.
pub fn symmetrizer(label: RepLabel) -> CMat {
    permutation_matrices_dim(label.j).kronecker(&permutation_matrices_dim(label.k))
}

fn symmetric_basis_dim(factors: u32) -> CMat {
    // Columns: orthonormal basis of Sym^factors (C^2), indexed by the number
    // r of lowered (second) factors; each column is the normalized sum of all
    // tensor-basis vectors whose digits contain exactly r ones.
    let n = factors as usize;
    let dim = 1usize << n;
    let mut q = CMat::zeros(dim, n + 1);
    let mut counts = vec![0usize; n + 1];
    for idx in 0..dim {
        counts[idx.count_ones() as usize] += 1;
    }
    for idx in 0..dim {
        let r = idx.count_ones() as usize;
        q[(idx, r)] = c(1.0 / (counts[r] as f64).sqrt(), 0.0);
    }
    q
}

/// Isometry from C^((j+1)(k+1)) onto the symmetric subspace of the full
/// tensor space: columns are an orthonormal basis of Sym^j x Sym^k.
pub fn symmetric_basis(label: RepLabel) -> CMat {
    symmetric_basis_dim(label.j).kronecker(&symmetric_basis_dim(label.k))
}

/// Compression Q* M Q of a full-tensor-space matrix to the symmetric
/// subspace; for M = rep_apply(label, A) this is the classical
/// (j+1)(k+1)-dimensional irreducible realization.
pub fn restrict_symmetric(label: RepLabel, m: &CMat) -> CMat {
    let q = symmetric_basis(label);
    q.adjoint() * m * q
}

/// Little-group element [[e^{i theta/2}, e^{-i theta/2} z], [0, e^{-i theta/2}]]
/// of the two-fold cover of the Euclidean group E(2); theta in [0, 4pi),
/// z complex. Stabilizes the cone base point (1,0,0,1) under `lorentz_action`.
pub fn euclidean2_element(theta: f64, z: C64) -> Spin2Matrix {
    let half = C64::from_polar(1.0, 0.5 * theta);
    Spin2Matrix::new(half, half.conj() * z, c(0.0, 0.0), half.conj())
}

/// Orthonormal basis (Frobenius inner product) of the space of matrices M
/// with M * Da(g) = Db(g) * M for every g in the generating sample.
///
/// `gen_a` and `gen_b` must list the two representations' matrices for the
/// same group elements, in the same order. The nullspace is found by singular
/// value thresholding: sigma < 1e-10 * sigma_max counts as zero. An empty
/// result is valid (no nontrivial intertwiner).
pub fn intertwiner_space(gen_a: &[CMat], gen_b: &[CMat]) -> Vec<CMat> {
    assert_eq!(gen_a.len(), gen_b.len(), "generator lists must pair up");
    assert!(!gen_a.is_empty(), "need at least one generator");
    let dim_a = gen_a[0].nrows();
    let dim_b = gen_b[0].nrows();
    let unknowns = dim_a * dim_b;
    // vec(M Da) = (Da^T kron I) vec(M), vec(Db M) = (I kron Db) vec(M),
    // column-major vectorization; M is dim_b x dim_a.
    let mut rows = CMat::zeros(gen_a.len() * unknowns, unknowns);
    for (g, (da, db)) in gen_a.iter().zip(gen_b.iter()).enumerate() {
        let block = da.transpose().kronecker(&CMat::identity(dim_b, dim_b))
            - CMat::identity(dim_a, dim_a).kronecker(db);
        rows.view_mut((g * unknowns, 0), (unknowns, unknowns))
            .copy_from(&block);
    }
    let mut basis = Vec::new();
    for v in nullspace(&rows, 1e-10) {
        // Undo the column-major vectorization.
        let mut m = CMat::zeros(dim_b, dim_a);
        for col in 0..dim_a {
            for r in 0..dim_b {
                m[(r, col)] = v[col * dim_b + r];
            }
        }
        basis.push(m);
    }
    basis
}

/// Orthonormal basis of the numerical nullspace of `m`: right singular
/// vectors whose singular value is at most `rtol * sigma_max`. A zero matrix
/// yields the full space; an empty result means trivial kernel.
pub fn nullspace(m: &CMat, rtol: f64) -> Vec<CVec> {
    // Pad wide matrices with zero rows so the decomposition reports every
    // right singular direction.
    let work = if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        let mut padded = CMat::zeros(m.ncols(), m.ncols());
        padded.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        padded
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut basis = Vec::new();
    for (idx, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma_max == 0.0 || sigma <= rtol * sigma_max {
            // Right singular vector = conjugated row of V^H.
            let row = v_t.row(idx);
            basis.push(CVec::from_iterator(row.len(), row.iter().map(|z| z.conj())));
        }
    }
    basis
}

/// Residual of `m` after projecting onto the span of an orthonormal matrix
/// basis (Frobenius inner product); zero iff `m` lies in the span.
pub fn span_residual(basis: &[CMat], m: &CMat) -> f64 {
    let mut residual = m.clone();
    for b in basis {
        let coeff: C64 = b.iter().zip(m.iter()).map(|(x, y)| x.conj() * y).sum();
        residual -= b.map(|z| z * coeff);
    }
    max_abs(&residual)
}
