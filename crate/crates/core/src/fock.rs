//! Truncated Fock spaces over finite embedded one-particle bases, and the
//! free field operators acting on them.
//!
//! The one-particle space is the span of finitely many embedded vectors,
//! orthonormalized in the net inner product. On the antisymmetric
//! (fermionic) or symmetric (bosonic) truncated Fock space over that span,
//! ladder operators realize the canonical (anti)commutation relations, and
//! the free fields are
//!
//!   phi(f) = (c*(v_f) + c(v_f)) / sqrt(2),
//!
//! with v_f = P (embed f) for the two-spinor net (P the projection onto the
//! first two blocks, a basis projection: P + Gamma_W P Gamma_W = 1) and
//! v_f = embed f for the tensor-square net. Everything downstream is
//! finite-dimensional linear algebra: self-adjointness, the CAR/CCR, the
//! C*-norm bound |phi_W(f)| <= |embed f|, vacuum two-point functions
//! computed two independent ways, covariance at matrix-element level, and
//! positivity of the one-particle energy form.
//!
//! The anticommutation relations hold exactly only when the fermionic
//! truncation is at least the mode count (the full exterior algebra);
//! truncating below that loses them on the top sector, in exactly the way
//! the bosonic relations always hold only below the truncation. Both
//! restrictions are part of the tested contract.

use std::collections::HashMap;

use thiserror::Error;

use crate::embeddings::{
    block_signs, embed, kron_power, net_pairing, net_pairing_weighted, net_shape,
    v_action_samples, BlockSign, EmbeddedVector, EmbeddingError,
};
use crate::little_group::ChartGuard;
use crate::momentum_grid::{weight_matrix, ConeGrid, InnerProductKind};
use crate::spinor_algebra::{FourVector, RepLabel, Spin2Matrix};
use crate::test_functions::{covariant_transform, TestFunction};
use crate::wave_equations::EquationId;
use crate::{tree_sum, C64, CMat, CVec};

/// Errors from Fock-space assembly and field evaluation.
#[derive(Debug, Error)]
pub enum FockError {
    #[error("need at least one vector")]
    EmptyInput,
    #[error("all input vectors are zero")]
    AllZero,
    #[error("mode index {index} out of range for {modes} modes")]
    IndexOutOfRange { index: usize, modes: usize },
    #[error("one-particle rank {rank} does not match Fock mode count {modes}")]
    RankMismatch { rank: usize, modes: usize },
    #[error("statistics {statistics:?} does not quantize model {model:?}")]
    StatisticsMismatch { model: EquationId, statistics: Statistics },
    #[error("function outside basis span: residual {residual:.3e} > {tolerance:.3e}")]
    OutsideSpan { residual: f64, tolerance: f64 },
    #[error("truncated space dimension {dim} exceeds the supported {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Exchange statistics of the truncated Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Fermi,
    Bose,
}

const MAX_MODES: usize = 8;
const MAX_DIM: usize = 2048;

/// Occupation-number realization of a truncated Fock space.
pub struct FockSpace {
    pub statistics: Statistics,
    pub modes: usize,
    pub truncation: usize,
    /// Occupation vectors, ordered by particle number then lexicographically.
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockSpace {
    pub fn new(
        statistics: Statistics,
        modes: usize,
        truncation: usize,
    ) -> Result<Self, FockError> {
        if modes == 0 || modes > MAX_MODES {
            return Err(FockError::InvalidArgument(format!(
                "mode count {modes} outside 1..={MAX_MODES}"
            )));
        }
        if truncation == 0 {
            return Err(FockError::InvalidArgument(
                "truncation must allow at least one particle".into(),
            ));
        }
        let mut states = Vec::new();
        let cap = match statistics {
            Statistics::Fermi => 1u8,
            Statistics::Bose => truncation as u8,
        };
        for total in 0..=truncation {
            let mut prefix = Vec::with_capacity(modes);
            enumerate_states(modes, total, cap, &mut prefix, &mut states);
        }
        if states.len() > MAX_DIM {
            return Err(FockError::DimensionTooLarge { dim: states.len(), max: MAX_DIM });
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self { statistics, modes, truncation, states, index })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Index of the no-particle state.
    pub fn vacuum_index(&self) -> usize {
        0
    }
}

fn enumerate_states(
    modes: usize,
    remaining: usize,
    cap: u8,
    prefix: &mut Vec<u8>,
    out: &mut Vec<Vec<u8>>,
) {
    if prefix.len() == modes {
        if remaining == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    let slots_left = modes - prefix.len() - 1;
    for n in 0..=(cap as usize).min(remaining) {
        if remaining - n > slots_left * cap as usize {
            continue;
        }
        prefix.push(n as u8);
        enumerate_states(modes, remaining - n, cap, prefix, out);
        prefix.pop();
    }
}

/// Which ladder operator to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// Dense operator on a truncated Fock space.
#[derive(Clone)]
pub struct FockOperator {
    pub matrix: CMat,
}

impl FockOperator {
    pub fn self_adjoint_defect(&self) -> f64 {
        crate::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Operator norm of a self-adjoint matrix (largest |eigenvalue|).
    pub fn hermitian_norm(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        sym.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &l| m.max(l.abs()))
    }

    /// Matrix element at the vacuum.
    pub fn vacuum_element(&self) -> C64 {
        self.matrix[(0, 0)]
    }
}

/// Creation or annihilation operator for a single mode. Creation out of the
/// top truncation sector maps to zero; fermionic signs follow the ordered
/// occupation convention c*(e_i)|S> = (-1)^{#occupied below i} |S + e_i>.
pub fn ladder(space: &FockSpace, index: usize, kind: LadderKind) -> Result<FockOperator, FockError> {
    if index >= space.modes {
        return Err(FockError::IndexOutOfRange { index, modes: space.modes });
    }
    let creator = creator_matrix(space, index);
    let matrix = match kind {
        LadderKind::Create => creator,
        LadderKind::Annihilate => creator.adjoint(),
    };
    Ok(FockOperator { matrix })
}

fn creator_matrix(space: &FockSpace, mode: usize) -> CMat {
    let dim = space.dim();
    let mut m = CMat::zeros(dim, dim);
    for (col, s) in space.states.iter().enumerate() {
        let total: usize = s.iter().map(|&n| n as usize).sum();
        if total >= space.truncation {
            continue;
        }
        match space.statistics {
            Statistics::Fermi => {
                if s[mode] == 1 {
                    continue;
                }
                let swaps = s[..mode].iter().filter(|&&n| n == 1).count();
                let mut t = s.clone();
                t[mode] = 1;
                let row = space.index[&t];
                m[(row, col)] = C64::new(if swaps % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
            }
            Statistics::Bose => {
                let mut t = s.clone();
                t[mode] += 1;
                let row = space.index[&t];
                m[(row, col)] = C64::new((s[mode] as f64 + 1.0).sqrt(), 0.0);
            }
        }
    }
    m
}

/// c*(v) (linear in v) or c(v) (antilinear in v) for v given by coefficients
/// in the orthonormal mode basis.
pub fn ladder_combination(
    space: &FockSpace,
    coefficients: &CVec,
    kind: LadderKind,
) -> Result<FockOperator, FockError> {
    if coefficients.len() != space.modes {
        return Err(FockError::RankMismatch { rank: coefficients.len(), modes: space.modes });
    }
    let dim = space.dim();
    let mut matrix = CMat::zeros(dim, dim);
    for (mode, &c) in coefficients.iter().enumerate() {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let single = ladder(space, mode, kind)?;
        let factor = match kind {
            LadderKind::Create => c,
            LadderKind::Annihilate => c.conj(),
        };
        matrix += single.matrix * factor;
    }
    Ok(FockOperator { matrix })
}

/// Orthonormalized span of embedded vectors under the model inner product.
pub struct OneParticleBasis<'g> {
    pub model: EquationId,
    /// Orthonormal members spanning the input.
    pub members: Vec<EmbeddedVector<'g>>,
    /// Expansion of the inputs in the members: s_i = sum_a expansion[(a,i)] e_a.
    pub expansion: CMat,
    /// Input Gram matrix under the net pairing.
    pub gram: CMat,
    pub rank_tolerance: f64,
}

impl<'g> OneParticleBasis<'g> {
    pub fn rank(&self) -> usize {
        self.members.len()
    }

    pub fn grid(&self) -> &'g ConeGrid {
        self.members[0].grid()
    }

    /// max |expansion^* expansion - gram|: how well the orthonormal
    /// coefficients reproduce the input geometry.
    pub fn gram_reconstruction_defect(&self) -> f64 {
        crate::max_abs(&(self.expansion.adjoint() * &self.expansion - &self.gram))
    }

    /// max |<e_a, e_b> - delta_ab| over the members.
    pub fn orthonormality_defect(&self) -> Result<f64, FockError> {
        let mut defect = 0.0f64;
        for a in 0..self.rank() {
            for b in a..self.rank() {
                let p = net_pairing(&self.members[a], &self.members[b])?;
                let target = if a == b { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                defect = defect.max((p - target).norm());
            }
        }
        Ok(defect)
    }
}

fn embedded_axpy(w: &mut EmbeddedVector, c: C64, e: &EmbeddedVector) {
    for (wb, eb) in w.blocks.iter_mut().zip(&e.blocks) {
        for (wv, ev) in wb.values.iter_mut().zip(&eb.values) {
            *wv += ev * c;
        }
    }
}

fn embedded_scale(w: &mut EmbeddedVector, s: f64) {
    let c = C64::new(s, 0.0);
    for wb in w.blocks.iter_mut() {
        for wv in wb.values.iter_mut() {
            *wv *= c;
        }
    }
}

/// Modified Gram-Schmidt with a re-orthogonalization pass, under the net
/// pairing of the vectors' model. Directions of norm below
/// rank_tolerance * (largest input norm) are dropped.
pub fn orthonormalize<'g>(
    vectors: &[EmbeddedVector<'g>],
    rank_tolerance: f64,
) -> Result<OneParticleBasis<'g>, FockError> {
    if vectors.is_empty() {
        return Err(FockError::EmptyInput);
    }
    let model = vectors[0].model;
    let d = vectors.len();
    let mut gram = CMat::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let p = net_pairing(&vectors[i], &vectors[j])?;
            gram[(i, j)] = p;
            gram[(j, i)] = p.conj();
        }
    }
    let max_norm = (0..d)
        .map(|i| gram[(i, i)].re.max(0.0).sqrt())
        .fold(0.0f64, f64::max);
    if max_norm == 0.0 {
        return Err(FockError::AllZero);
    }
    let mut members: Vec<EmbeddedVector<'g>> = Vec::new();
    let mut coefficients = CMat::zeros(d, d);
    for i in 0..d {
        let mut w = vectors[i].clone();
        for _pass in 0..2 {
            for (a, e) in members.iter().enumerate() {
                let c = net_pairing(e, &w)?;
                embedded_axpy(&mut w, -c, e);
                coefficients[(a, i)] += c;
            }
        }
        let norm = net_pairing(&w, &w)?.re.max(0.0).sqrt();
        if norm < rank_tolerance * max_norm {
            continue;
        }
        embedded_scale(&mut w, 1.0 / norm);
        coefficients[(members.len(), i)] = C64::new(norm, 0.0);
        members.push(w);
    }
    let rank = members.len();
    let expansion = coefficients.view((0, 0), (rank, d)).into_owned();
    Ok(OneParticleBasis { model, members, expansion, gram, rank_tolerance })
}

/// Projection onto the positive-sign half of the four-block net: blocks
/// three and four are zeroed. Together with its Gamma_W conjugate this is a
/// resolution of the identity.
pub fn block_projection<'g>(v: &EmbeddedVector<'g>) -> Result<EmbeddedVector<'g>, FockError> {
    if v.model != EquationId::Weyl {
        return Err(FockError::Embedding(EmbeddingError::UnsupportedModel(v.model)));
    }
    let mut out = v.clone();
    for block in out.blocks.iter_mut().skip(2) {
        for value in block.values.iter_mut() {
            value.fill(C64::new(0.0, 0.0));
        }
    }
    Ok(out)
}

/// Coefficients of v in the orthonormal members, plus the net norm of the
/// residual v - sum_a t_a e_a. The residual is formed explicitly rather than
/// read off norm differences, whose noise floor sqrt(eps)|v| would mask it.
pub fn expand_in_basis(
    basis: &OneParticleBasis,
    v: &EmbeddedVector,
) -> Result<(CVec, f64), FockError> {
    let mut t = CVec::zeros(basis.rank());
    let mut r = v.clone();
    for (a, e) in basis.members.iter().enumerate() {
        let c = net_pairing(e, v)?;
        t[a] = c;
        embedded_axpy(&mut r, -c, e);
    }
    let residual = net_pairing(&r, &r)?.re.max(0.0).sqrt();
    Ok((t, residual))
}

fn one_particle_vector<'g>(
    basis: &OneParticleBasis<'g>,
    space: &FockSpace,
    embedded: &EmbeddedVector<'g>,
) -> Result<EmbeddedVector<'g>, FockError> {
    match (basis.model, space.statistics) {
        (EquationId::Weyl, Statistics::Fermi) => block_projection(embedded),
        (EquationId::MaxwellF, Statistics::Bose) => Ok(embedded.clone()),
        (model, statistics) => Err(FockError::StatisticsMismatch { model, statistics }),
    }
}

/// Free field operator phi(f) = (c*(v) + c(v))/sqrt(2) built from an
/// already-embedded vector. `scale_hint` widens the span gate for data whose
/// embedding is itself tiny (for instance derivative test data): the
/// residual is measured against max(|v|, scale_hint).
pub fn field_operator_from_embedded(
    embedded: &EmbeddedVector,
    basis: &OneParticleBasis,
    space: &FockSpace,
    span_tolerance: f64,
    scale_hint: f64,
) -> Result<FockOperator, FockError> {
    if basis.rank() != space.modes {
        return Err(FockError::RankMismatch { rank: basis.rank(), modes: space.modes });
    }
    let v = one_particle_vector(basis, space, embedded)?;
    let (t, residual) = expand_in_basis(basis, &v)?;
    let gate = net_pairing(&v, &v)?.re.max(0.0).sqrt().max(scale_hint);
    if gate > 0.0 && residual > span_tolerance * gate {
        return Err(FockError::OutsideSpan {
            residual: residual / gate,
            tolerance: span_tolerance,
        });
    }
    let create = ladder_combination(space, &t, LadderKind::Create)?;
    let annihilate = ladder_combination(space, &t, LadderKind::Annihilate)?;
    let matrix = (create.matrix + annihilate.matrix) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(FockOperator { matrix })
}

/// Free field operator for a covariant test function: embed, project to the
/// one-particle space (statistics-dependent), expand, and assemble.
pub fn field_operator(
    f: &TestFunction,
    basis: &OneParticleBasis,
    space: &FockSpace,
) -> Result<FockOperator, FockError> {
    let embedded = embed(&basis.model, f, basis.grid())?;
    field_operator_from_embedded(&embedded, basis, space, 1e-8, 0.0)
}

/// Vacuum two-point function computed two independent ways.
#[derive(Debug, Clone, Copy)]
pub struct TwoPointMoment {
    /// <Omega, phi(f) phi(k) Omega> via the operator matrices.
    pub via_operators: C64,
    /// (1/2) <v_f, v_k> via the one-particle pairing.
    pub via_pairing: C64,
}

pub fn two_point(
    f: &TestFunction,
    k: &TestFunction,
    basis: &OneParticleBasis,
    space: &FockSpace,
) -> Result<TwoPointMoment, FockError> {
    let phi_f = field_operator(f, basis, space)?;
    let phi_k = field_operator(k, basis, space)?;
    let via_operators = (phi_f.matrix.row(0) * phi_k.matrix.column(0))[(0, 0)];
    let vf = one_particle_vector(basis, space, &embed(&basis.model, f, basis.grid())?)?;
    let vk = one_particle_vector(basis, space, &embed(&basis.model, k, basis.grid())?)?;
    let via_pairing = net_pairing(&vf, &vk)? * 0.5;
    Ok(TwoPointMoment { via_operators, via_pairing })
}

/// Matrix-element covariance comparison.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceReport {
    /// <embed f1, V(g) embed f2>, V applied analytically per node.
    pub lhs: C64,
    /// <embed f1, embed(T(g) f2)>.
    pub rhs: C64,
    pub skipped: usize,
    pub total: usize,
}

/// Both sides of the covariance identity, restricted to the grid nodes whose
/// transformed image stays inside the section chart (both sums range over
/// the same kept nodes). `projected` additionally inserts the block
/// projection on both sides, exercising that it commutes with the
/// block-diagonal representation.
pub fn covariance_matrix_elements(
    model: &EquationId,
    a_matrix: &Spin2Matrix,
    translation: &FourVector,
    f1: &TestFunction,
    f2: &TestFunction,
    grid: &ConeGrid,
    projected: bool,
) -> Result<CovarianceReport, FockError> {
    let (nblocks, n) = net_shape(model)?;
    if projected && *model != EquationId::Weyl {
        return Err(FockError::InvalidArgument(
            "block projection only applies to the four-block net".into(),
        ));
    }
    let active = if projected { 2 } else { nblocks };
    let e1 = embed(model, f1, grid)?;
    let label = RepLabel { j: n, k: 0 };
    let transformed = covariant_transform(a_matrix, translation, f2, label);
    let e2t = embed(model, &transformed, grid)?;
    let samples = v_action_samples(model, a_matrix, translation, f2, grid)?;
    let total = samples.nodes.len();
    let skipped = samples.skipped;
    if skipped * 100 > total {
        return Err(FockError::Embedding(EmbeddingError::TooManySkipped { skipped, total }));
    }
    let signs = block_signs(model)?;
    let guard = ChartGuard::default();
    let mut lhs_terms = Vec::with_capacity(total);
    let mut rhs_terms = Vec::with_capacity(total);
    for (i, node) in samples.nodes.iter().enumerate() {
        let Some(v_values) = node else { continue };
        let p = &grid.nodes[i];
        let bplus = kron_power(
            &weight_matrix(InnerProductKind::BetaPlus, p, 2, &guard)
                .map_err(EmbeddingError::from)?,
            n,
        );
        let bminus = bplus.conjugate();
        let mut lhs = C64::new(0.0, 0.0);
        let mut rhs = C64::new(0.0, 0.0);
        for (b, sign) in signs.iter().enumerate().take(active) {
            let weight = match sign {
                BlockSign::Plus => &bplus,
                BlockSign::Minus => &bminus,
            };
            let u = &e1.blocks[b].values[i];
            lhs += u.dotc(&(weight * &v_values[b]));
            rhs += u.dotc(&(weight * &e2t.blocks[b].values[i]));
        }
        let w = C64::new(grid.weights[i], 0.0);
        lhs_terms.push(lhs * w);
        rhs_terms.push(rhs * w);
    }
    Ok(CovarianceReport {
        lhs: tree_sum(&lhs_terms),
        rhs: tree_sum(&rhs_terms),
        skipped,
        total,
    })
}

/// Smallest eigenvalue of the one-particle energy form <e_a, p0 e_b>.
pub fn spectral_positivity(basis: &OneParticleBasis) -> Result<f64, FockError> {
    if basis.members.is_empty() {
        return Err(FockError::EmptyInput);
    }
    let m = basis.rank();
    let mut form = CMat::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let p = net_pairing_weighted(&basis.members[a], &basis.members[b], |q| q.p0)?;
            form[(a, b)] = p;
            form[(b, a)] = p.conj();
        }
    }
    let hermitian = (&form + form.adjoint()) * C64::new(0.5, 0.0);
    Ok(hermitian
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &l| m.min(l)))
}

/// Energy expectation <v, p0 v> / <v, v> of a single embedded vector.
pub fn energy_expectation(v: &EmbeddedVector) -> Result<f64, FockError> {
    let num = net_pairing_weighted(v, v, |q| q.p0)?.re;
    let den = net_pairing(v, v)?.re;
    if den <= 0.0 {
        return Err(FockError::AllZero);
    }
    Ok(num / den)
}
