//! Embeddings of covariant test functions into the canonical light-cone
//! nets, and the pairings built on top of them.
//!
//! The embedding is multiplication by a momentum-dependent insert after
//! restricting the Fourier transform to the cone. With N = [[0,1],[0,0]] and
//! H_p the cone section, the two-spinor insert is
//!
//!   W(p) = H_p N conj(H_p)^{-1}
//!        = (1/2) [[-(p1 - i p2), p0 + p3], [-(p0 - p3), p1 + i p2]],
//!
//! and a helicity-n/2 block applies its n-fold tensor power. Positive blocks
//! act on f_hat, negative blocks on the conjugated reflection (Gamma_0 f)^;
//! the two-spinor net carries four blocks (both reflections), tensor models
//! carry two. Ranges land inside the solution spaces of the relativistic
//! wave equations by construction, since N kills the second section column.
//!
//! On the embedded side the module provides the conjugation structure
//! (componentwise Gamma_0, the sandwiched Gamma_1, and the block-permuting
//! net conjugation Gamma_W), the canonical phase representations U_pm, the
//! scalar isomorphisms of each block, intertwining defects against the
//! covariant action, causal pairings of compactly supported data, the
//! regulated equal-time oscillatory integrals behind them, and the sharp
//! continuity bound with constant pi^2/8.

use std::f64::consts::PI;
use std::io;

use rayon::prelude::*;
use thiserror::Error;

use crate::little_group::{
    massless_section, sl2_inverse, wigner_element, ChartGuard, SectionError,
};
use crate::momentum_grid::{
    inner_product, weight_matrix, ConeFunction, ConeGrid, GridError, InnerProductKind,
};
use crate::spinor_algebra::{
    conj2, lorentz_action, rep_apply, to_dmat, FourVector, RepLabel, Spin2Matrix,
};
use crate::test_functions::{covariant_transform, GaussianPacket, TestFunction};
use crate::wave_equations::{rwe_residual, EquationId, WaveEquationError};
use crate::{tree_sum, C64, CMat, CVec};

/// Errors from embedding and pairing operations.
#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("model {0:?} has no light-cone net")]
    UnsupportedModel(EquationId),
    #[error("fibre dimension mismatch: model wants {expected}, data has {got}")]
    FibreMismatch { expected: usize, got: usize },
    #[error("{skipped} of {total} transformed nodes left the section chart")]
    TooManySkipped { skipped: usize, total: usize },
    #[error("separation must be nonzero and purely spatial, got {0:?}")]
    NotSpatial(FourVector),
    #[error("block leaves the embedded solution space: defect {defect:.3e} > {tolerance:.3e}")]
    NotInSolutionSpace { defect: f64, tolerance: f64 },
    #[error("sampled scalars admit no off-grid evaluation; pass analytic data")]
    NoInterpolation,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error(transparent)]
    WaveEquation(#[from] WaveEquationError),
}

/// Helicity sign of a transform block: positive blocks are column ranges of
/// tensor powers of H_p, negative blocks of conj(H_p).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSign {
    Plus,
    Minus,
}

/// (number of blocks, tensor power of the two-spinor insert) for a model.
pub fn net_shape(model: &EquationId) -> Result<(usize, u32), EmbeddingError> {
    match model {
        EquationId::Weyl => Ok((4, 1)),
        EquationId::MaxwellF => Ok((2, 2)),
        EquationId::Helicity(n) => Ok((2, *n)),
        other => Err(EmbeddingError::UnsupportedModel(*other)),
    }
}

/// Alternating helicity signs of a model's blocks.
pub fn block_signs(model: &EquationId) -> Result<Vec<BlockSign>, EmbeddingError> {
    let (blocks, _) = net_shape(model)?;
    Ok((0..blocks)
        .map(|b| if b % 2 == 0 { BlockSign::Plus } else { BlockSign::Minus })
        .collect())
}

pub(crate) fn kron_power(m: &CMat, n: u32) -> CMat {
    let mut out = m.clone();
    for _ in 1..n {
        out = out.kronecker(m);
    }
    out
}

fn kron_vec_power(v: &CVec, n: u32) -> CVec {
    let mut out = v.clone();
    for _ in 1..n {
        out = out.kronecker(v);
    }
    out
}

fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

const NILPOTENT: Spin2Matrix = Spin2Matrix::new(
    C64::new(0.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(0.0, 0.0),
    C64::new(0.0, 0.0),
);

/// Positive-helicity two-spinor insert H_p N conj(H_p)^{-1}.
pub fn plus_insert2(p: &FourVector, guard: &ChartGuard) -> Result<Spin2Matrix, SectionError> {
    let h = massless_section(p, guard)?;
    Ok(h * NILPOTENT * sl2_inverse(&conj2(&h)))
}

/// A covariant test function pushed into a canonical net: one cone function
/// per transform block, alternating helicity signs.
#[derive(Clone)]
pub struct EmbeddedVector<'g> {
    pub model: EquationId,
    pub blocks: Vec<ConeFunction<'g>>,
}

impl<'g> EmbeddedVector<'g> {
    pub fn grid(&self) -> &'g ConeGrid {
        self.blocks[0].grid
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].dim
    }

    /// Columnar dump, one block section per component.
    pub fn write_dump<W: io::Write>(&self, out: &mut W) -> io::Result<()> {
        for (i, block) in self.blocks.iter().enumerate() {
            writeln!(out, "# block {} of {}", i, self.model.name())?;
            block.write_dump(out)?;
        }
        Ok(())
    }

    /// The four two-spinor blocks stacked into one eight-dimensional fibre.
    pub fn stack(&self) -> Result<ConeFunction<'g>, EmbeddingError> {
        let grid = self.grid();
        let dim: usize = self.blocks.iter().map(|b| b.dim).sum();
        let values: Vec<CVec> = (0..grid.len())
            .map(|i| {
                let mut v = CVec::zeros(dim);
                let mut at = 0;
                for block in &self.blocks {
                    v.rows_mut(at, block.dim).copy_from(&block.values[i]);
                    at += block.dim;
                }
                v
            })
            .collect();
        Ok(ConeFunction { grid, dim, values })
    }
}

/// Embed from already-restricted transform samples: `fp[i]` = f_hat at node
/// p_i, `fm[i]` = f_hat at -p_i.
pub fn embed_from_samples<'g>(
    model: &EquationId,
    grid: &'g ConeGrid,
    fp: &[CVec],
    fm: &[CVec],
) -> Result<EmbeddedVector<'g>, EmbeddingError> {
    let (nblocks, n) = net_shape(model)?;
    let expected = model.fibre_dim();
    if fp.len() != grid.len() || fm.len() != grid.len() {
        return Err(EmbeddingError::InvalidArgument(format!(
            "sample count {}/{} does not match grid size {}",
            fp.len(),
            fm.len(),
            grid.len()
        )));
    }
    let guard = ChartGuard::default();
    let per_node: Result<Vec<Vec<CVec>>, EmbeddingError> = grid
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            if fp[i].len() != expected || fm[i].len() != expected {
                return Err(EmbeddingError::FibreMismatch {
                    expected,
                    got: fp[i].len().max(fm[i].len()),
                });
            }
            let wp = kron_power(&to_dmat(&plus_insert2(p, &guard)?), n);
            let wm = wp.conjugate();
            let blocks = if nblocks == 4 {
                vec![
                    &wp * &fp[i],
                    &wm * conj_vec(&fm[i]),
                    &wp * &fm[i],
                    &wm * conj_vec(&fp[i]),
                ]
            } else {
                vec![&wp * &fp[i], &wm * conj_vec(&fm[i])]
            };
            Ok(blocks)
        })
        .collect();
    let per_node = per_node?;
    let dim = 1usize << n;
    let blocks = (0..nblocks)
        .map(|b| ConeFunction {
            grid,
            dim,
            values: per_node.iter().map(|node| node[b].clone()).collect(),
        })
        .collect();
    Ok(EmbeddedVector { model: *model, blocks })
}

/// Embed a covariant test function: restrict its transform to the cone
/// nodes (and their reflections) and apply the block inserts.
pub fn embed<'g>(
    model: &EquationId,
    f: &TestFunction,
    grid: &'g ConeGrid,
) -> Result<EmbeddedVector<'g>, EmbeddingError> {
    net_shape(model)?;
    let expected = model.fibre_dim();
    if f.dim() != expected {
        return Err(EmbeddingError::FibreMismatch { expected, got: f.dim() });
    }
    let minus: Vec<FourVector> = grid.nodes.iter().map(|p| p.negate()).collect();
    let fp = f.fourier_batch(&grid.nodes);
    let fm = f.fourier_batch(&minus);
    embed_from_samples(model, grid, &fp, &fm)
}

/// Embed analytic momentum data given directly as a function of p.
pub fn embed_from_fourier<'g, F>(
    model: &EquationId,
    grid: &'g ConeGrid,
    fhat: F,
) -> Result<EmbeddedVector<'g>, EmbeddingError>
where
    F: Fn(&FourVector) -> CVec + Sync,
{
    let fp: Vec<CVec> = grid.nodes.par_iter().map(|p| fhat(p)).collect();
    let fm: Vec<CVec> = grid.nodes.par_iter().map(|p| fhat(&p.negate())).collect();
    embed_from_samples(model, grid, &fp, &fm)
}

/// Full net inner product sum_b int <u_b, (tensor^n B_sign)(p) v_b> dmu0.
pub fn net_pairing(u: &EmbeddedVector, v: &EmbeddedVector) -> Result<C64, EmbeddingError> {
    net_pairing_weighted(u, v, |_| 1.0)
}

/// Net inner product with an extra real node factor, e.g. p0 for the energy
/// form of the one-particle space.
pub fn net_pairing_weighted<F>(
    u: &EmbeddedVector,
    v: &EmbeddedVector,
    node_factor: F,
) -> Result<C64, EmbeddingError>
where
    F: Fn(&FourVector) -> f64 + Sync,
{
    if u.model != v.model {
        return Err(EmbeddingError::InvalidArgument(format!(
            "pairing across models {} and {}",
            u.model.name(),
            v.model.name()
        )));
    }
    let grid = u.grid();
    if !std::ptr::eq(grid, v.grid()) {
        return Err(EmbeddingError::Grid(GridError::GridMismatch));
    }
    let signs = block_signs(&u.model)?;
    let (_, n) = net_shape(&u.model)?;
    let guard = ChartGuard::default();
    let terms: Result<Vec<C64>, EmbeddingError> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let bplus = kron_power(
                &weight_matrix(InnerProductKind::BetaPlus, &grid.nodes[i], 2, &guard)?,
                n,
            );
            let bminus = bplus.conjugate();
            let mut term = C64::new(0.0, 0.0);
            for (b, sign) in signs.iter().enumerate() {
                let weight = match sign {
                    BlockSign::Plus => &bplus,
                    BlockSign::Minus => &bminus,
                };
                term += u.blocks[b].values[i].dotc(&(weight * &v.blocks[b].values[i]));
            }
            Ok(term * C64::new(grid.weights[i] * node_factor(&grid.nodes[i]), 0.0))
        })
        .collect();
    Ok(tree_sum(&terms?))
}

/// Componentwise conjugation Gamma_0.
pub fn gamma0<'g>(f: &ConeFunction<'g>) -> ConeFunction<'g> {
    ConeFunction {
        grid: f.grid,
        dim: f.dim,
        values: f.values.iter().map(conj_vec).collect(),
    }
}

/// Sandwiched conjugation conj(H_p) Gamma_0 H_p^{-1} on a two-spinor block.
/// Collapses to componentwise conjugation because the section factors cancel
/// under the antilinear middle map; the sandwich is kept literal so that
/// cancellation stays a checked fact rather than an assumption.
pub fn gamma1<'g>(f: &ConeFunction<'g>) -> Result<ConeFunction<'g>, EmbeddingError> {
    if f.dim != 2 {
        return Err(EmbeddingError::FibreMismatch { expected: 2, got: f.dim });
    }
    let guard = ChartGuard::default();
    let values: Result<Vec<CVec>, EmbeddingError> = f
        .grid
        .nodes
        .par_iter()
        .zip(&f.values)
        .map(|(p, v)| {
            let h = massless_section(p, &guard)?;
            let inner = to_dmat(&sl2_inverse(&h)) * v;
            Ok(to_dmat(&conj2(&h)) * conj_vec(&inner))
        })
        .collect();
    Ok(ConeFunction { grid: f.grid, dim: 2, values: values? })
}

/// Net conjugation Gamma_W: reverse the four blocks and conjugate
/// componentwise. An antilinear involution exchanging helicity signs.
pub fn gamma_w<'g>(v: &EmbeddedVector<'g>) -> Result<EmbeddedVector<'g>, EmbeddingError> {
    if v.model != EquationId::Weyl {
        return Err(EmbeddingError::UnsupportedModel(v.model));
    }
    let blocks = (0..4).map(|b| gamma0(&v.blocks[3 - b])).collect();
    Ok(EmbeddedVector { model: v.model, blocks })
}

/// Maximum over nodes and blocks of the relative wave-equation residual.
/// Negative blocks solve the conjugate equation, so they are conjugated
/// before the residual is formed.
pub fn block_wave_defect(v: &EmbeddedVector) -> Result<f64, EmbeddingError> {
    let signs = block_signs(&v.model)?;
    let guard = ChartGuard::default();
    let grid = v.grid();
    let defects: Result<Vec<f64>, EmbeddingError> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = &grid.nodes[i];
            let mut worst = 0.0f64;
            for (b, sign) in signs.iter().enumerate() {
                let phi = match sign {
                    BlockSign::Plus => v.blocks[b].values[i].clone(),
                    BlockSign::Minus => conj_vec(&v.blocks[b].values[i]),
                };
                let res = rwe_residual(&v.model, &phi, p, 0.0, &guard)?;
                let scale = p.p0 * phi.camax() + f64::MIN_POSITIVE;
                worst = worst.max(res.camax() / scale);
            }
            Ok(worst)
        })
        .collect();
    Ok(defects?.into_iter().fold(0.0, f64::max))
}

/// Extract the scalar chi with phi(p) = (tensor^n of the signed section)
/// (chi e_0^{tensor n}); errors if any node leaves the solution space by
/// more than `tolerance` relative to |phi(p)|.
pub fn iso_to_scalar<'g>(
    model: &EquationId,
    block: &ConeFunction<'g>,
    sign: BlockSign,
    tolerance: f64,
) -> Result<ConeFunction<'g>, EmbeddingError> {
    let (_, n) = net_shape(model)?;
    let dim = 1usize << n;
    if block.dim != dim {
        return Err(EmbeddingError::FibreMismatch { expected: dim, got: block.dim });
    }
    let guard = ChartGuard::default();
    let per_node: Result<Vec<(C64, f64)>, EmbeddingError> = block
        .grid
        .nodes
        .par_iter()
        .zip(&block.values)
        .map(|(p, v)| {
            let h = massless_section(p, &guard)?;
            let base = match sign {
                BlockSign::Plus => h,
                BlockSign::Minus => conj2(&h),
            };
            let dinv = kron_power(&to_dmat(&sl2_inverse(&base)), n);
            let y = &dinv * v;
            let chi = y[0];
            let column = kron_vec_power(&to_dmat(&base).column(0).into_owned(), n);
            let recon = column * chi;
            let defect = (v - recon).camax() / (v.camax() + f64::MIN_POSITIVE);
            Ok((chi, defect))
        })
        .collect();
    let per_node = per_node?;
    let worst = per_node.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    if worst > tolerance {
        return Err(EmbeddingError::NotInSolutionSpace { defect: worst, tolerance });
    }
    Ok(ConeFunction {
        grid: block.grid,
        dim: 1,
        values: per_node
            .into_iter()
            .map(|(chi, _)| CVec::from_vec(vec![chi]))
            .collect(),
    })
}

/// Inverse of [`iso_to_scalar`]: chi times the leading section column power.
pub fn scalar_lift<'g>(
    sign: BlockSign,
    n: u32,
    chi: &ConeFunction<'g>,
) -> Result<ConeFunction<'g>, EmbeddingError> {
    if chi.dim != 1 {
        return Err(EmbeddingError::FibreMismatch { expected: 1, got: chi.dim });
    }
    let guard = ChartGuard::default();
    let values: Result<Vec<CVec>, EmbeddingError> = chi
        .grid
        .nodes
        .par_iter()
        .zip(&chi.values)
        .map(|(p, c)| {
            let h = massless_section(p, &guard)?;
            let base = match sign {
                BlockSign::Plus => h,
                BlockSign::Minus => conj2(&h),
            };
            let column = kron_vec_power(&to_dmat(&base).column(0).into_owned(), n);
            Ok(column * c[0])
        })
        .collect();
    Ok(ConeFunction { grid: chi.grid, dim: 1usize << n, values: values? })
}

/// Scalar input to the canonical representations: analytic data can be
/// evaluated at transformed momenta, sampled data cannot.
pub enum ScalarData<'a, 'g> {
    Analytic(&'a (dyn Fn(&FourVector) -> C64 + Sync)),
    Sampled(&'a ConeFunction<'g>),
}

/// Canonical representation U_pm(g) chi (p) =
/// e^{-i<p,a>} (e^{pm i theta(A,p)/2})^n chi(Lambda_A^{-1} p). Sampled input
/// is accepted only for pure translations; no interpolation is ever done.
pub fn canonical_rep_apply<'g>(
    sign: BlockSign,
    phase_power: u32,
    a_matrix: &Spin2Matrix,
    translation: &FourVector,
    chi: &ScalarData<'_, 'g>,
    grid: &'g ConeGrid,
) -> Result<ConeFunction<'g>, EmbeddingError> {
    let identity = (a_matrix - Spin2Matrix::identity())
        .iter()
        .all(|z| z.norm() == 0.0);
    let guard = ChartGuard::default();
    let values: Result<Vec<CVec>, EmbeddingError> = grid
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let translation_phase = C64::new(0.0, -p.minkowski_dot(translation)).exp();
            let (helicity_phase, q) = if identity {
                (C64::new(1.0, 0.0), *p)
            } else {
                let w = wigner_element(a_matrix, p, &guard)?;
                let base = match sign {
                    BlockSign::Plus => w.phase.conj(),
                    BlockSign::Minus => w.phase,
                };
                let q = lorentz_action(&sl2_inverse(a_matrix), p)
                    .expect("unimodular by construction");
                (base.powu(phase_power), q)
            };
            let sample = match chi {
                ScalarData::Analytic(f) => f(&q),
                ScalarData::Sampled(f) => {
                    if !identity {
                        return Err(EmbeddingError::NoInterpolation);
                    }
                    if !std::ptr::eq(f.grid, grid) {
                        return Err(EmbeddingError::Grid(GridError::GridMismatch));
                    }
                    if f.dim != 1 {
                        return Err(EmbeddingError::FibreMismatch { expected: 1, got: f.dim });
                    }
                    f.values[i][0]
                }
            };
            Ok(CVec::from_vec(vec![translation_phase * helicity_phase * sample]))
        })
        .collect();
    Ok(ConeFunction { grid, dim: 1, values: values? })
}

/// Outcome of an intertwining comparison.
#[derive(Debug, Clone, Copy)]
pub struct IntertwiningReport {
    /// max over kept nodes and blocks of |embed(T(g)f) - V(g) embed(f)|,
    /// relative to the largest embedded value.
    pub defect: f64,
    /// Nodes whose transformed image left the section chart.
    pub skipped: usize,
    pub total: usize,
    pub scale: f64,
}

/// The transformed-block representation V(g) applied analytically to the
/// embedding of f, sampled at the grid nodes: per kept node the block values
/// phase * fibre-factor * insert(q) * (f_hat or conj f_hat)(+-q) with
/// q = Lambda_A^{-1} p. Nodes whose q leaves the section chart are None.
pub struct VActionSamples {
    pub nodes: Vec<Option<Vec<CVec>>>,
    pub skipped: usize,
}

pub fn v_action_samples(
    model: &EquationId,
    a_matrix: &Spin2Matrix,
    translation: &FourVector,
    f: &TestFunction,
    grid: &ConeGrid,
) -> Result<VActionSamples, EmbeddingError> {
    let (nblocks, n) = net_shape(model)?;
    let expected = model.fibre_dim();
    if f.dim() != expected {
        return Err(EmbeddingError::FibreMismatch { expected, got: f.dim() });
    }
    let guard = ChartGuard::default();
    let a_inv = sl2_inverse(a_matrix);
    let a_n = kron_power(&to_dmat(a_matrix), n);
    let a_bar_n = a_n.conjugate();
    let nodes: Result<Vec<Option<Vec<CVec>>>, EmbeddingError> = grid
        .nodes
        .par_iter()
        .map(|p| {
            let q = lorentz_action(&a_inv, p).expect("unimodular by construction");
            let insert_q = match plus_insert2(&q, &guard) {
                Ok(m) => m,
                Err(SectionError::OutOfChart { .. }) => return Ok(None),
                Err(e) => return Err(e.into()),
            };
            let wq_plus = kron_power(&to_dmat(&insert_q), n);
            let wq_minus = wq_plus.conjugate();
            let f_q = f.fourier(&q);
            let f_mq = f.fourier(&q.negate());
            let phase_m = C64::new(0.0, -p.minkowski_dot(translation)).exp();
            let phase_p = phase_m.conj();
            let all = [
                (&a_n * (&wq_plus * &f_q)) * phase_m,
                (&a_bar_n * (&wq_minus * conj_vec(&f_mq))) * phase_m,
                (&a_n * (&wq_plus * &f_mq)) * phase_p,
                (&a_bar_n * (&wq_minus * conj_vec(&f_q))) * phase_p,
            ];
            Ok(Some(all.into_iter().take(nblocks).collect()))
        })
        .collect();
    let nodes = nodes?;
    let skipped = nodes.iter().filter(|t| t.is_none()).count();
    Ok(VActionSamples { nodes, skipped })
}

/// Compare embedding-then-transforming against transforming-then-embedding
/// for a Gaussian packet (its transform evaluates anywhere). Nodes whose
/// image q = Lambda_A^{-1} p leaves the chart are skipped and counted;
/// more than one percent skipped is an error.
pub fn intertwining_defect(
    model: &EquationId,
    a_matrix: &Spin2Matrix,
    translation: &FourVector,
    f: &GaussianPacket,
    grid: &ConeGrid,
) -> Result<IntertwiningReport, EmbeddingError> {
    let (nblocks, n) = net_shape(model)?;
    let expected = model.fibre_dim();
    if f.polarization.len() != expected {
        return Err(EmbeddingError::FibreMismatch { expected, got: f.polarization.len() });
    }
    let base = TestFunction::Gaussian(f.clone());
    let label = RepLabel { j: n, k: 0 };
    let transformed = covariant_transform(a_matrix, translation, &base, label);
    let lhs = embed(model, &transformed, grid)?;
    let samples = v_action_samples(model, a_matrix, translation, &base, grid)?;
    let total = samples.nodes.len();
    let skipped = samples.skipped;
    if skipped * 100 > total {
        return Err(EmbeddingError::TooManySkipped { skipped, total });
    }
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (i, node) in samples.nodes.iter().enumerate() {
        let Some(rhs) = node else { continue };
        for b in 0..nblocks {
            diff = diff.max((&rhs[b] - &lhs.blocks[b].values[i]).camax());
            scale = scale.max(lhs.blocks[b].values[i].camax());
        }
    }
    let defect = diff / (scale + f64::MIN_POSITIVE);
    Ok(IntertwiningReport { defect, skipped, total, scale })
}

/// Net pairing of two embedded compactly supported functions. For
/// spacelike-separated supports the two-spinor pairing vanishes entirely and
/// the tensor-square pairing has vanishing imaginary part; the caller reads
/// off whichever component its model's causality statement concerns.
pub fn causality_pairing(
    model: &EquationId,
    f: &TestFunction,
    k: &TestFunction,
    grid: &ConeGrid,
) -> Result<C64, EmbeddingError> {
    for func in [f, k] {
        if !matches!(func, TestFunction::Bump(_)) {
            return Err(EmbeddingError::InvalidArgument(
                "causality pairing needs compactly supported data".into(),
            ));
        }
    }
    let ef = embed(model, f, grid)?;
    let ek = embed(model, k, grid)?;
    net_pairing(&ef, &ek)
}

/// Result of a regulated equal-time oscillatory integral.
#[derive(Debug, Clone)]
pub struct PauliJordanResult {
    /// Richardson limit of the regulated values as epsilon -> 0.
    pub extrapolant: C64,
    /// Difference of the last two extrapolation diagonals, plus a quadrature
    /// floor; the claimed accuracy of `extrapolant`.
    pub error_estimate: f64,
    /// I(epsilon) in the order the epsilons were given.
    pub regulated: Vec<C64>,
    /// Magnitude of the opposite-parity combination at the largest epsilon;
    /// the natural scale against which the vanishing one is judged.
    pub opposite_scale: f64,
}

const PJ_RADIAL_ORDER: usize = 1024;
const PJ_POLAR_ORDER: usize = 1024;
const PJ_AZIMUTH_ORDER: usize = 8;
const PJ_RADIAL_CUTOFF: f64 = 400.0;

/// Regulated integral int (e^{i<p,x>} -+ e^{-i<p,x>}) beta(p) e^{-eps p0}
/// dmu0 over the cone for purely spatial x (minus for even degree, plus for
/// odd), Richardson-extrapolated to eps -> 0 along a halving sequence.
///
/// beta must be a polynomial matrix entry of homogeneity `degree` (only the
/// parity of `degree` enters the combination). The rule is a dedicated
/// product quadrature with the polar axis aligned to x, sized for the
/// oscillation r |x| e^{-eps r} up to the radial cutoff; cutoff and orders
/// are fixed so results are bit-reproducible.
pub fn pauli_jordan_regulated<F>(
    x: &FourVector,
    beta: F,
    degree: usize,
    epsilons: &[f64],
) -> Result<PauliJordanResult, EmbeddingError>
where
    F: Fn(&FourVector) -> C64,
{
    if x.p0 != 0.0 || x.spatial_norm() == 0.0 {
        return Err(EmbeddingError::NotSpatial(*x));
    }
    if epsilons.len() < 2 {
        return Err(EmbeddingError::InvalidArgument(
            "need at least two regulator values".into(),
        ));
    }
    for pair in epsilons.windows(2) {
        if !(pair[1] > 0.0) || (pair[0] / pair[1] - 2.0).abs() > 1e-9 {
            return Err(EmbeddingError::InvalidArgument(
                "regulators must halve at each step".into(),
            ));
        }
    }
    let radius = x.spatial_norm();
    let x_hat = [x.p1 / radius, x.p2 / radius, x.p3 / radius];
    // Orthonormal triad with the polar axis along x, so the oscillation
    // e^{-i r R u} is independent of the azimuth.
    let helper = if x_hat[0].abs() <= x_hat[1].abs() && x_hat[0].abs() <= x_hat[2].abs() {
        [1.0, 0.0, 0.0]
    } else if x_hat[1].abs() <= x_hat[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let mut e1 = cross(x_hat, helper);
    let norm1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for c in &mut e1 {
        *c /= norm1;
    }
    let e2 = cross(x_hat, e1);

    let (t_r, w_r) = crate::momentum_grid::gauss_legendre(PJ_RADIAL_ORDER);
    let (t_u, w_u) = crate::momentum_grid::gauss_legendre(PJ_POLAR_ORDER);
    let even = degree % 2 == 0;
    let mut main = vec![C64::new(0.0, 0.0); epsilons.len()];
    let mut opposite = C64::new(0.0, 0.0);
    for jr in 0..PJ_RADIAL_ORDER {
        let r = 0.5 * PJ_RADIAL_CUTOFF * (t_r[jr] + 1.0);
        let wr = 0.5 * PJ_RADIAL_CUTOFF * w_r[jr] * 0.5 * r;
        let decay: Vec<f64> = epsilons.iter().map(|eps| (-eps * r).exp()).collect();
        for ju in 0..PJ_POLAR_ORDER {
            let u = t_u[ju];
            let su = (1.0 - u * u).max(0.0).sqrt();
            // e^{i<p,x>} = e^{-i p.x} = e^{-i r R u} on the polar axis.
            let forward = C64::new(0.0, -r * radius * u).exp();
            let (combo_main, combo_opposite) = if even {
                (forward - forward.conj(), forward + forward.conj())
            } else {
                (forward + forward.conj(), forward - forward.conj())
            };
            let w_angle = w_u[ju] * 2.0 * PI / PJ_AZIMUTH_ORDER as f64;
            for kphi in 0..PJ_AZIMUTH_ORDER {
                let phi = 2.0 * PI * kphi as f64 / PJ_AZIMUTH_ORDER as f64;
                let (s, c) = phi.sin_cos();
                let p = FourVector::new(
                    r,
                    r * (su * (c * e1[0] + s * e2[0]) + u * x_hat[0]),
                    r * (su * (c * e1[1] + s * e2[1]) + u * x_hat[1]),
                    r * (su * (c * e1[2] + s * e2[2]) + u * x_hat[2]),
                );
                let b = beta(&p) * (wr * w_angle);
                for (acc, d) in main.iter_mut().zip(&decay) {
                    *acc += combo_main * b * *d;
                }
                opposite += combo_opposite * b * decay[0];
            }
        }
    }

    // Richardson tableau for a smooth series in epsilon with halving steps.
    let m = epsilons.len();
    let mut tableau = vec![main.clone()];
    for j in 1..m {
        let prev = &tableau[j - 1];
        let factor = (1u64 << j) as f64;
        let column: Vec<C64> = (0..m - j)
            .map(|k| (prev[k + 1] * factor - prev[k]) / (factor - 1.0))
            .collect();
        tableau.push(column);
    }
    let extrapolant = tableau[m - 1][0];
    let previous_diagonal = tableau[m - 2][0];
    let error_estimate =
        (extrapolant - previous_diagonal).norm() + 1e-12 * main[0].norm();
    Ok(PauliJordanResult {
        extrapolant,
        error_estimate,
        regulated: main,
        opposite_scale: opposite.norm(),
    })
}

/// Sharp constant pi^2/8 = int d^3p (1+|p|^2)^{-2-2} in the one-particle
/// continuity bound.
pub fn continuity_constant() -> f64 {
    PI * PI / 8.0
}

/// (left, right) sides of the continuity bound
/// |embed_1 f|_+^2 <= (pi^2/8) (sum_C |f_hat^C|_{4,0})^2 for a Gaussian
/// packet; left is the positive block's squared net norm on the grid, right
/// uses per-component Schwartz seminorms.
pub fn continuity_check(
    f: &TestFunction,
    grid: &ConeGrid,
) -> Result<(f64, f64), EmbeddingError> {
    let packet = match f {
        TestFunction::Gaussian(g) if g.polarization.len() == 2 => g,
        _ => {
            return Err(EmbeddingError::InvalidArgument(
                "continuity check wants a two-component Gaussian packet".into(),
            ))
        }
    };
    let embedded = embed(&EquationId::Weyl, f, grid)?;
    let lhs = inner_product(
        InnerProductKind::BetaPlus,
        &embedded.blocks[0],
        &embedded.blocks[0],
    )?
    .re;
    let mut seminorm_sum = 0.0;
    for component in 0..2 {
        let mut polarization = CVec::zeros(2);
        polarization[component] = packet.polarization[component];
        let projected = TestFunction::Gaussian(GaussianPacket::new(
            packet.x0,
            packet.width,
            packet.k0,
            polarization,
        ));
        seminorm_sum += crate::test_functions::schwartz_seminorm(&projected, (4, 0));
    }
    Ok((lhs, continuity_constant() * seminorm_sum * seminorm_sum))
}

/// Pairings on the vector-potential fibre.
#[derive(Debug, Clone, Copy)]
pub struct PotentialPairing {
    /// int <phi, eta psi> dmu0.
    pub eta_pair: C64,
    /// The two transverse scalar products int conj(chi_i) chi_i' dmu0; their
    /// sum reproduces `eta_pair` on the solution space.
    pub factor_scalars: [C64; 2],
}

/// Indefinite pairing and transverse factorization for four-component data
/// solving the vector-potential scalar constraint. Errors if either input
/// leaves the solution space by more than `tolerance` at any node.
pub fn vector_potential_pairings(
    phi: &ConeFunction,
    psi: &ConeFunction,
    tolerance: f64,
) -> Result<PotentialPairing, EmbeddingError> {
    if phi.dim != 4 || psi.dim != 4 {
        return Err(EmbeddingError::FibreMismatch { expected: 4, got: phi.dim.max(psi.dim) });
    }
    if !std::ptr::eq(phi.grid, psi.grid) {
        return Err(EmbeddingError::Grid(GridError::GridMismatch));
    }
    let guard = ChartGuard::default();
    let grid = phi.grid;
    let label = RepLabel { j: 1, k: 1 };
    let per_node: Result<Vec<(C64, C64)>, EmbeddingError> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let p = &grid.nodes[i];
            for v in [&phi.values[i], &psi.values[i]] {
                let res = rwe_residual(&EquationId::MaxwellA, v, p, 0.0, &guard)?;
                let defect = res.camax() / (p.p0 * v.camax() + f64::MIN_POSITIVE);
                if defect > tolerance {
                    return Err(EmbeddingError::NotInSolutionSpace { defect, tolerance });
                }
            }
            let h = massless_section(p, &guard)?;
            let dinv = rep_apply(label, &sl2_inverse(&h));
            let y_phi = &dinv * &phi.values[i];
            let y_psi = &dinv * &psi.values[i];
            let w = C64::new(grid.weights[i], 0.0);
            Ok((
                w * y_phi[1].conj() * y_psi[1],
                w * y_phi[2].conj() * y_psi[2],
            ))
        })
        .collect();
    let per_node = per_node?;
    let s1: Vec<C64> = per_node.iter().map(|t| t.0).collect();
    let s2: Vec<C64> = per_node.iter().map(|t| t.1).collect();
    let eta_pair = inner_product(InnerProductKind::EtaPm, phi, psi)?;
    Ok(PotentialPairing {
        eta_pair,
        factor_scalars: [tree_sum(&s1), tree_sum(&s2)],
    })
}

/// Build vector-potential data D(H_p)(chi_0, chi_1, chi_2, 0) from three
/// analytic scalars; solves the scalar constraint by construction.
pub fn potential_lift<'g, F>(
    grid: &'g ConeGrid,
    chis: F,
) -> Result<ConeFunction<'g>, EmbeddingError>
where
    F: Fn(&FourVector) -> [C64; 3] + Sync,
{
    let guard = ChartGuard::default();
    let label = RepLabel { j: 1, k: 1 };
    let values: Result<Vec<CVec>, EmbeddingError> = grid
        .nodes
        .par_iter()
        .map(|p| {
            let h = massless_section(p, &guard)?;
            let d = rep_apply(label, &h);
            let c = chis(p);
            Ok(&d * CVec::from_vec(vec![c[0], c[1], c[2], C64::new(0.0, 0.0)]))
        })
        .collect();
    Ok(ConeFunction { grid, dim: 4, values: values? })
}

/// Map an embedded tensor-square pair into the vector-potential fibre:
/// (phi_+, phi_-) with scalars (chi_+, chi_-) goes to
/// D(H_p)(0, chi_+, chi_-, 0). Isometric for the eta pairing against the
/// two-block net norm.
pub fn phi_af<'g>(
    f_embedded: &EmbeddedVector<'g>,
    tolerance: f64,
) -> Result<ConeFunction<'g>, EmbeddingError> {
    if f_embedded.model != EquationId::MaxwellF {
        return Err(EmbeddingError::UnsupportedModel(f_embedded.model));
    }
    let chi_plus = iso_to_scalar(
        &EquationId::MaxwellF,
        &f_embedded.blocks[0],
        BlockSign::Plus,
        tolerance,
    )?;
    let chi_minus = iso_to_scalar(
        &EquationId::MaxwellF,
        &f_embedded.blocks[1],
        BlockSign::Minus,
        tolerance,
    )?;
    let guard = ChartGuard::default();
    let grid = f_embedded.grid();
    let label = RepLabel { j: 1, k: 1 };
    let values: Result<Vec<CVec>, EmbeddingError> = grid
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let h = massless_section(p, &guard)?;
            let d = rep_apply(label, &h);
            Ok(&d * CVec::from_vec(vec![
                C64::new(0.0, 0.0),
                chi_plus.values[i][0],
                chi_minus.values[i][0],
                C64::new(0.0, 0.0),
            ]))
        })
        .collect();
    Ok(ConeFunction { grid, dim: 4, values: values? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum_grid::{build_grid, grid_norm, GridKind};
    use crate::spinor_algebra::momentum_to_matrix;
    use crate::test_functions::CompactBump;
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn small_grid(seed: u64) -> ConeGrid {
        build_grid(GridKind::Cone, 8, 8, 12, 14.0, seed)
    }

    fn packet2(seed: u64) -> GaussianPacket {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut component = |range: std::ops::Range<f64>| rng.random_range(range);
        GaussianPacket::new(
            FourVector::new(
                component(-0.5..0.5),
                component(-0.5..0.5),
                component(-0.5..0.5),
                component(-0.5..0.5),
            ),
            1.0 + component(0.0..0.5),
            FourVector::new(
                component(-1.0..1.0),
                component(-1.0..1.0),
                component(-1.0..1.0),
                component(-1.0..1.0),
            ),
            CVec::from_vec(vec![
                c(component(-1.0..1.0), component(-1.0..1.0)),
                c(component(-1.0..1.0), component(-1.0..1.0)),
            ]),
        )
    }

    #[test]
    fn plus_insert_matches_closed_form() {
        let guard = ChartGuard::default();
        let grid = small_grid(3);
        for p in grid.nodes.iter().step_by(37) {
            let built = plus_insert2(p, &guard).unwrap();
            let closed = Matrix2::new(
                c(-p.p1, p.p2),
                c(p.p0 + p.p3, 0.0),
                c(-(p.p0 - p.p3), 0.0),
                c(p.p1, p.p2),
            )
            .map(|z| z * 0.5);
            let defect = (built - closed).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(defect <= 1e-12 * p.p0, "insert defect {defect:.3e}");
        }
    }

    #[test]
    fn embedded_blocks_solve_their_wave_equations() {
        let grid = small_grid(5);
        for n in 1u32..=4 {
            let model = match n {
                1 => EquationId::Weyl,
                2 => EquationId::MaxwellF,
                k => EquationId::Helicity(k),
            };
            let dim = model.fibre_dim();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
            let polarization =
                CVec::from_fn(dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let f = TestFunction::Gaussian(GaussianPacket::new(
                FourVector::new(0.2, -0.1, 0.3, 0.0),
                1.1,
                FourVector::new(0.5, 0.2, -0.4, 0.3),
                polarization,
            ));
            let embedded = embed(&model, &f, &grid).unwrap();
            let defect = block_wave_defect(&embedded).unwrap();
            assert!(defect <= 1e-10, "helicity {n} residual {defect:.3e}");
        }
    }

    #[test]
    fn weyl_embedding_is_gamma_w_invariant() {
        let grid = small_grid(7);
        let f = TestFunction::Gaussian(packet2(42));
        let embedded = embed(&EquationId::Weyl, &f, &grid).unwrap();
        let flipped = gamma_w(&embedded).unwrap();
        let mut defect = 0.0f64;
        let mut scale = 0.0f64;
        for b in 0..4 {
            for i in 0..grid.len() {
                defect = defect
                    .max((&flipped.blocks[b].values[i] - &embedded.blocks[b].values[i]).camax());
                scale = scale.max(embedded.blocks[b].values[i].camax());
            }
        }
        assert!(defect <= 1e-10 * scale, "Gamma_W invariance defect {defect:.3e}");
    }

    #[test]
    fn gamma_w_is_an_antiunitary_involution() {
        let grid = small_grid(9);
        let u = embed(&EquationId::Weyl, &TestFunction::Gaussian(packet2(1)), &grid).unwrap();
        let v = embed(&EquationId::Weyl, &TestFunction::Gaussian(packet2(2)), &grid).unwrap();
        let gu = gamma_w(&u).unwrap();
        let gv = gamma_w(&v).unwrap();
        let ggu = gamma_w(&gu).unwrap();
        let mut defect = 0.0f64;
        for b in 0..4 {
            for i in 0..grid.len() {
                defect = defect.max((&ggu.blocks[b].values[i] - &u.blocks[b].values[i]).camax());
            }
        }
        assert!(defect <= 1e-12, "involution defect {defect:.3e}");
        let lhs = net_pairing(&gu, &gv).unwrap();
        let rhs = net_pairing(&v, &u).unwrap();
        let scale = rhs.norm() + 1e-300;
        assert!(
            (lhs - rhs).norm() <= 1e-10 * scale,
            "antiunitarity defect {:.3e}",
            (lhs - rhs).norm() / scale
        );
    }

    #[test]
    fn gamma1_sandwich_collapses_to_componentwise_conjugation() {
        let grid = small_grid(11);
        let f = embed(&EquationId::Weyl, &TestFunction::Gaussian(packet2(3)), &grid).unwrap();
        let block = &f.blocks[0];
        let sandwiched = gamma1(block).unwrap();
        let direct = gamma0(block);
        let mut defect = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..grid.len() {
            defect = defect.max((&sandwiched.values[i] - &direct.values[i]).camax());
            scale = scale.max(direct.values[i].camax());
        }
        assert!(defect <= 1e-13 * scale, "sandwich defect {defect:.3e}");
    }

    #[test]
    fn net_pairing_matches_stacked_weyl_kind() {
        let grid = small_grid(13);
        let u = embed(&EquationId::Weyl, &TestFunction::Gaussian(packet2(5)), &grid).unwrap();
        let v = embed(&EquationId::Weyl, &TestFunction::Gaussian(packet2(6)), &grid).unwrap();
        let direct = net_pairing(&u, &v).unwrap();
        let stacked = inner_product(
            InnerProductKind::WeylNet,
            &u.stack().unwrap(),
            &v.stack().unwrap(),
        )
        .unwrap();
        assert!(
            (direct - stacked).norm() <= 1e-12 * stacked.norm().max(1e-300),
            "pairing mismatch {:.3e} vs {:.3e}",
            direct,
            stacked
        );
    }

    #[test]
    fn derivative_data_embeds_to_zero() {
        // f_hat = -i conj(P(p)) h_hat is the transform of first-order
        // derivative data; every block insert kills it through
        // N diag(2,0) = 0.
        let grid = small_grid(15);
        let h = packet2(77);
        let h_fn = TestFunction::Gaussian(h);
        let fhat = |p: &FourVector| {
            (to_dmat(&conj2(&momentum_to_matrix(p))) * h_fn.fourier(p)) * c(0.0, -1.0)
        };
        let embedded = embed_from_fourier(&EquationId::Weyl, &grid, fhat).unwrap();
        let data = ConeFunction::from_fn(&grid, 2, fhat);
        let scale = grid_norm(InnerProductKind::L2, &data).unwrap();
        for block in &embedded.blocks {
            let norm = grid_norm(InnerProductKind::L2, block).unwrap();
            assert!(norm <= 1e-9 * scale, "derivative data norm {norm:.3e}");
        }
    }

    #[test]
    fn scalar_chain_matches_independent_multiplier() {
        // Block 1 extraction == multiply the restricted transform by the
        // distinguished row of the conjugate inverse section power.
        let grid = small_grid(17);
        let guard = ChartGuard::default();
        for (model, n) in [(EquationId::Weyl, 1u32), (EquationId::MaxwellF, 2)] {
            let dim = model.fibre_dim();
            let mut rng = ChaCha8Rng::seed_from_u64(200 + n as u64);
            let pol = CVec::from_fn(dim, |_, _| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let f = TestFunction::Gaussian(GaussianPacket::new(
                FourVector::new(0.1, 0.2, -0.3, 0.1),
                1.2,
                FourVector::new(0.3, -0.5, 0.2, 0.4),
                pol,
            ));
            let embedded = embed(&model, &f, &grid).unwrap();
            let chi = iso_to_scalar(&model, &embedded.blocks[0], BlockSign::Plus, 1e-8).unwrap();
            let row_index = (1usize << n) - 1;
            let mut defect = 0.0f64;
            let mut scale = 0.0f64;
            for (i, p) in grid.nodes.iter().enumerate() {
                let h = massless_section(p, &guard).unwrap();
                let minv = kron_power(&to_dmat(&sl2_inverse(&conj2(&h))), n);
                let direct = (minv.row(row_index) * f.fourier(p))[0];
                defect = defect.max((chi.values[i][0] - direct).norm());
                scale = scale.max(direct.norm());
            }
            assert!(
                defect <= 1e-11 * scale,
                "chain defect {defect:.3e} for power {n}"
            );
        }
    }

    #[test]
    fn iso_to_scalar_round_trips_and_rejects_junk() {
        let grid = small_grid(19);
        let chi_fn = |p: &FourVector| c((-0.7 * p.p0).exp(), 0.2 * (-0.5 * p.p0).exp());
        let chi = ConeFunction::from_fn(&grid, 1, |p| CVec::from_vec(vec![chi_fn(p)]));
        for (sign, n) in [(BlockSign::Plus, 1u32), (BlockSign::Minus, 1), (BlockSign::Plus, 2)] {
            let lifted = scalar_lift(sign, n, &chi).unwrap();
            let back = iso_to_scalar(
                &if n == 1 { EquationId::Weyl } else { EquationId::MaxwellF },
                &lifted,
                sign,
                1e-10,
            )
            .unwrap();
            let mut defect = 0.0f64;
            for i in 0..grid.len() {
                defect = defect.max((back.values[i][0] - chi.values[i][0]).norm());
            }
            assert!(defect <= 1e-12, "round trip defect {defect:.3e}");
        }
        // Junk data is far from any lift.
        let junk = ConeFunction::from_fn(&grid, 2, |p| {
            CVec::from_vec(vec![c((0.3 * p.p1).sin() + 0.4, 0.3), c(0.9, -0.2)])
        });
        assert!(matches!(
            iso_to_scalar(&EquationId::Weyl, &junk, BlockSign::Plus, 1e-10),
            Err(EmbeddingError::NotInSolutionSpace { .. })
        ));
    }

    #[test]
    fn block_isometry_onto_scalars() {
        // |phi|_net^2 == |chi|_L2^2 for lifted blocks of both signs.
        let grid = small_grid(23);
        let chi = ConeFunction::from_fn(&grid, 1, |p| {
            CVec::from_vec(vec![c((-0.6 * p.p0).exp(), 0.1 * (-0.4 * p.p0).exp())])
        });
        let l2 = inner_product(InnerProductKind::L2, &chi, &chi).unwrap().re;
        for (sign, kind) in [
            (BlockSign::Plus, InnerProductKind::BetaPlus),
            (BlockSign::Minus, InnerProductKind::BetaMinus),
        ] {
            let lifted = scalar_lift(sign, 1, &chi).unwrap();
            let net = inner_product(kind, &lifted, &lifted).unwrap().re;
            assert_relative_eq!(net, l2, max_relative = 1e-10);
        }
    }

    #[test]
    fn canonical_rep_identity_translation_and_unitarity() {
        let grid = build_grid(GridKind::Cone, 20, 16, 28, 16.0, 29);
        let chi1 = |p: &FourVector| c(0.0, 0.0) + (-0.8 * p.p0).exp() * c(1.0, 0.3);
        let chi2 = |p: &FourVector| (-0.6 * p.p0).exp() * c(0.4, -0.9);
        let sampled1 = ConeFunction::from_fn(&grid, 1, |p| CVec::from_vec(vec![chi1(p)]));
        let identity = Spin2Matrix::identity();
        let zero = FourVector::zero();

        // Identity acts as the identity on sampled data.
        let u_id = canonical_rep_apply(
            BlockSign::Plus,
            1,
            &identity,
            &zero,
            &ScalarData::Sampled(&sampled1),
            &grid,
        )
        .unwrap();
        for i in 0..grid.len() {
            assert!((u_id.values[i][0] - sampled1.values[i][0]).norm() <= 1e-15);
        }

        // Pure translation multiplies by the exact phase.
        let shift = FourVector::new(0.3, -0.2, 0.5, 0.1);
        let u_shift = canonical_rep_apply(
            BlockSign::Plus,
            1,
            &identity,
            &shift,
            &ScalarData::Sampled(&sampled1),
            &grid,
        )
        .unwrap();
        for (i, p) in grid.nodes.iter().enumerate() {
            let expected = sampled1.values[i][0] * c(0.0, -p.minkowski_dot(&shift)).exp();
            assert!((u_shift.values[i][0] - expected).norm() <= 1e-15);
        }

        // Sampled data rejects genuine transformations.
        let xi = 0.4f64;
        let boost = Spin2Matrix::new(
            c((0.5 * xi).cosh(), 0.0),
            c((0.5 * xi).sinh(), 0.0),
            c((0.5 * xi).sinh(), 0.0),
            c((0.5 * xi).cosh(), 0.0),
        );
        assert!(matches!(
            canonical_rep_apply(
                BlockSign::Plus,
                1,
                &boost,
                &zero,
                &ScalarData::Sampled(&sampled1),
                &grid,
            ),
            Err(EmbeddingError::NoInterpolation)
        ));

        // Unitarity of a boosted action on analytic scalars, as a quadrature
        // statement: the grid is not boost invariant, so the defect is the
        // quadrature error of the transported integrand.
        let f1 = ConeFunction::from_fn(&grid, 1, |p| CVec::from_vec(vec![chi1(p)]));
        let f2 = ConeFunction::from_fn(&grid, 1, |p| CVec::from_vec(vec![chi2(p)]));
        let before = inner_product(InnerProductKind::L2, &f1, &f2).unwrap();
        let u1 = canonical_rep_apply(
            BlockSign::Plus,
            1,
            &boost,
            &shift,
            &ScalarData::Analytic(&chi1),
            &grid,
        )
        .unwrap();
        let u2 = canonical_rep_apply(
            BlockSign::Plus,
            1,
            &boost,
            &shift,
            &ScalarData::Analytic(&chi2),
            &grid,
        )
        .unwrap();
        let after = inner_product(InnerProductKind::L2, &u1, &u2).unwrap();
        let rel = (after - before).norm() / before.norm();
        assert!(rel <= 1e-5, "unitarity defect {rel:.3e}");
    }

    #[test]
    fn scalar_iso_intertwines_canonical_representation() {
        // Phi_+ V_1(g) = U_+(g) Phi_+ on an analytic positive block.
        let grid = small_grid(31);
        let guard = ChartGuard::default();
        let chi = |p: &FourVector| (-0.7 * p.p0).exp() * c(0.8, -0.25);
        let xi = 0.5f64;
        let a = Spin2Matrix::new(
            c((0.5 * xi).exp(), 0.0),
            c(0.2, 0.1),
            c(0.0, 0.0),
            c((-0.5 * xi).exp(), 0.0),
        );
        let shift = FourVector::new(0.2, 0.1, -0.3, 0.4);
        let a_inv = sl2_inverse(&a);
        //

        let v_phi = ConeFunction::from_fn(&grid, 2, |p| {
            let q = lorentz_action(&a_inv, p).unwrap();
            let h_q = massless_section(&q, &guard).unwrap();
            let phi_q = to_dmat(&h_q).column(0).into_owned() * chi(&q);
            let phase = c(0.0, -p.minkowski_dot(&shift)).exp();
            (to_dmat(&a) * phi_q) * phase
        });
        let lhs = iso_to_scalar(&EquationId::Weyl, &v_phi, BlockSign::Plus, 1e-8).unwrap();
        let rhs = canonical_rep_apply(
            BlockSign::Plus,
            1,
            &a,
            &shift,
            &ScalarData::Analytic(&chi),
            &grid,
        )
        .unwrap();
        let mut defect = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..grid.len() {
            defect = defect.max((lhs.values[i][0] - rhs.values[i][0]).norm());
            scale = scale.max(rhs.values[i][0].norm());
        }
        assert!(defect <= 1e-8 * scale, "intertwining defect {defect:.3e}");
    }

    #[test]
    fn intertwining_defect_identity_and_moderate_boost() {
        let grid = build_grid(GridKind::Cone, 10, 8, 14, 14.0, 33);
        let f = packet2(55);
        let identity = Spin2Matrix::identity();
        let report = intertwining_defect(
            &EquationId::Weyl,
            &identity,
            &FourVector::zero(),
            &f,
            &grid,
        )
        .unwrap();
        assert_eq!(report.skipped, 0);
        assert!(report.defect <= 1e-13, "identity defect {:.3e}", report.defect);

        let xi = 0.6f64;
        let boost = Spin2Matrix::new(
            c((0.5 * xi).cosh(), 0.0),
            c((0.5 * xi).sinh(), 0.0),
            c((0.5 * xi).sinh(), 0.0),
            c((0.5 * xi).cosh(), 0.0),
        );
        let report = intertwining_defect(
            &EquationId::Weyl,
            &boost,
            &FourVector::new(0.4, -0.2, 0.3, 0.1),
            &f,
            &grid,
        )
        .unwrap();
        assert!(report.defect <= 1e-8, "boost defect {:.3e}", report.defect);
    }

    #[test]
    fn intertwining_defect_for_tensor_square_under_fixing_subgroup() {
        // Elements conjugated from the phase-and-shear subgroup, moderate
        // parameters.
        let grid = build_grid(GridKind::Cone, 10, 8, 14, 14.0, 35);
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let pol = CVec::from_fn(4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let f = GaussianPacket::new(
            FourVector::new(0.1, -0.2, 0.2, 0.3),
            1.2,
            FourVector::new(0.4, 0.3, -0.2, 0.1),
            pol,
        );
        let base = massless_section(
            &FourVector::new(1.3, 0.3, -0.4, 1.2),
            &ChartGuard::default(),
        )
        .unwrap();
        let e2 = crate::spinor_algebra::euclidean2_element(0.7, c(0.3, -0.2));
        let g = base * e2 * sl2_inverse(&base);
        let report = intertwining_defect(
            &EquationId::MaxwellF,
            &g,
            &FourVector::new(0.2, 0.1, 0.0, -0.3),
            &f,
            &grid,
        )
        .unwrap();
        assert!(report.defect <= 1e-8, "tensor defect {:.3e}", report.defect);
    }

    #[test]
    fn intertwining_rejects_chart_crossing_boosts() {
        let grid = build_grid(GridKind::Cone, 10, 8, 14, 14.0, 37);
        let xi = 8.0f64;
        let boost = Spin2Matrix::new(
            c((0.5 * xi).exp(), 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c((-0.5 * xi).exp(), 0.0),
        );
        assert!(matches!(
            intertwining_defect(
                &EquationId::Weyl,
                &boost,
                &FourVector::zero(),
                &packet2(63),
                &grid,
            ),
            Err(EmbeddingError::TooManySkipped { .. })
        ));
    }

    #[test]
    fn causality_smoke_spacelike_suppression_and_positivity() {
        // Medium-grid smoke check with a loose bound; the sized version with
        // pinned tolerances and refinement runs in the acceptance suite.
        let grid = build_grid(GridKind::Cone, 16, 12, 24, 20.0, 39);
        let f = TestFunction::Bump(CompactBump::with_order(
            FourVector::new(0.0, 2.0, 0.0, 0.0),
            0.5,
            CVec::from_vec(vec![c(1.0, 0.2), c(-0.4, 0.6)]),
            16,
        ));
        let k = TestFunction::Bump(CompactBump::with_order(
            FourVector::new(0.0, -2.0, 0.0, 0.0),
            0.5,
            CVec::from_vec(vec![c(0.3, -0.8), c(0.9, 0.1)]),
            16,
        ));
        let ff = causality_pairing(&EquationId::Weyl, &f, &f, &grid).unwrap();
        assert!(ff.im.abs() <= 1e-12 * ff.re && ff.re > 0.0, "self pairing {ff:.3e}");
        let kk = causality_pairing(&EquationId::Weyl, &k, &k, &grid).unwrap();
        let fk = causality_pairing(&EquationId::Weyl, &f, &k, &grid).unwrap();
        let scale = (ff.re * kk.re).sqrt();
        assert!(
            fk.norm() <= 2e-2 * scale,
            "spacelike pairing {:.3e} of scale {scale:.3e}",
            fk.norm()
        );
        // Gaussian data is rejected: no compact support.
        let g = TestFunction::Gaussian(packet2(40));
        assert!(matches!(
            causality_pairing(&EquationId::Weyl, &g, &k, &grid),
            Err(EmbeddingError::InvalidArgument(_))
        ));
    }

    #[test]
    fn pauli_jordan_even_scalar_vanishes_against_opposite_scale() {
        let x = FourVector::new(0.0, 1.0, 0.0, 0.0);
        let result =
            pauli_jordan_regulated(&x, |_| c(1.0, 0.0), 0, &[0.4, 0.2, 0.1, 0.05]).unwrap();
        assert!(result.opposite_scale > 1.0, "scale {:.3e}", result.opposite_scale);
        assert!(
            result.extrapolant.norm() <= 1e-3 * result.opposite_scale,
            "even extrapolant {:.3e} vs scale {:.3e}",
            result.extrapolant.norm(),
            result.opposite_scale
        );
    }

    #[test]
    fn pauli_jordan_odd_contraction_weight_extrapolates_to_zero() {
        let x = FourVector::new(0.0, 2.0, 0.0, 0.0);
        // Entry (0,0) of the contraction weight: (p0 - p3)/2, degree one.
        let result = pauli_jordan_regulated(
            &x,
            |p| c(0.5 * (p.p0 - p.p3), 0.0),
            1,
            &[0.4, 0.2, 0.1, 0.05],
        )
        .unwrap();
        let i0 = result.regulated[0].norm();
        assert!(i0 > 1e-3, "regulated values should be visibly nonzero, got {i0:.3e}");
        assert!(
            result.extrapolant.norm() <= result.error_estimate + 1e-9 * i0,
            "odd extrapolant {:.3e} exceeds estimate {:.3e}",
            result.extrapolant.norm(),
            result.error_estimate
        );
        // The estimate itself must be a small fraction of the raw values:
        // extrapolation gained precision.
        assert!(
            result.error_estimate <= 0.1 * i0,
            "no extrapolation gain: {:.3e} vs {:.3e}",
            result.error_estimate,
            i0
        );
    }

    #[test]
    fn pauli_jordan_rejects_bad_arguments() {
        let beta = |_: &FourVector| c(1.0, 0.0);
        let eps = [0.4, 0.2];
        assert!(matches!(
            pauli_jordan_regulated(&FourVector::new(0.1, 1.0, 0.0, 0.0), beta, 0, &eps),
            Err(EmbeddingError::NotSpatial(_))
        ));
        assert!(matches!(
            pauli_jordan_regulated(&FourVector::zero(), beta, 0, &eps),
            Err(EmbeddingError::NotSpatial(_))
        ));
        assert!(matches!(
            pauli_jordan_regulated(&FourVector::new(0.0, 1.0, 0.0, 0.0), beta, 0, &[0.4]),
            Err(EmbeddingError::InvalidArgument(_))
        ));
        assert!(matches!(
            pauli_jordan_regulated(&FourVector::new(0.0, 1.0, 0.0, 0.0), beta, 0, &[0.4, 0.3]),
            Err(EmbeddingError::InvalidArgument(_))
        ));
    }

    #[test]
    fn continuity_constant_matches_radial_oracle() {
        // int d^3p (1+|p|^2)^{-4} = 4 pi int r^2 (1+r^2)^{-4} dr = pi^2/8,
        // via a mapped GL rule r = t/(1-t).
        let (nodes, weights) = crate::momentum_grid::gauss_legendre(200);
        let mut total = 0.0;
        for (t, w) in nodes.iter().zip(&weights) {
            let s = 0.5 * (t + 1.0);
            let r = s / (1.0 - s);
            let jac = 0.5 / ((1.0 - s) * (1.0 - s));
            total += w * jac * 4.0 * PI * r * r / (1.0 + r * r).powi(4);
        }
        assert_relative_eq!(total, continuity_constant(), max_relative = 1e-10);
    }

    #[test]
    fn continuity_bound_holds_on_sample_packets() {
        let grid = build_grid(GridKind::Cone, 16, 12, 20, 18.0, 41);
        for seed in 0..5 {
            let f = TestFunction::Gaussian(packet2(300 + seed));
            let (lhs, rhs) = continuity_check(&f, &grid).unwrap();
            assert!(
                lhs <= rhs,
                "continuity violated: {lhs:.6e} > {rhs:.6e} at seed {seed}"
            );
            assert!(lhs > 0.0 && rhs.is_finite());
        }
    }

    #[test]
    fn potential_pairings_factor_through_transverse_scalars() {
        let grid = small_grid(43);
        let chis_a = |p: &FourVector| {
            [
                c((-0.5 * p.p0).exp(), 0.1),
                c((-0.7 * p.p0).exp(), -0.2 * (-0.4 * p.p0).exp()),
                c(0.3 * (-0.6 * p.p0).exp(), 0.4),
            ]
        };
        let chis_b = |p: &FourVector| {
            [
                c(0.2, (-0.6 * p.p0).exp()),
                c(0.5 * (-0.5 * p.p0).exp(), 0.0),
                c((-0.8 * p.p0).exp(), -0.3),
            ]
        };
        let phi = potential_lift(&grid, chis_a).unwrap();
        let psi = potential_lift(&grid, chis_b).unwrap();
        let pairing = vector_potential_pairings(&phi, &psi, 1e-8).unwrap();
        let factored = pairing.factor_scalars[0] + pairing.factor_scalars[1];
        let scale = pairing.eta_pair.norm().max(1e-300);
        assert!(
            (pairing.eta_pair - factored).norm() <= 1e-10 * scale,
            "eta {:.6e} vs factored {:.6e}",
            pairing.eta_pair,
            factored
        );

        // Degenerate data D(H)(chi,0,0,0) is null for the pairing.
        let degenerate = potential_lift(&grid, |p| {
            [c((-0.5 * p.p0).exp(), 0.2), c(0.0, 0.0), c(0.0, 0.0)]
        })
        .unwrap();
        let null = vector_potential_pairings(&degenerate, &degenerate, 1e-8).unwrap();
        let deg_scale = grid_norm(InnerProductKind::L2, &degenerate).unwrap().powi(2);
        assert!(
            null.eta_pair.norm() <= 1e-12 * deg_scale,
            "degenerate self pairing {:.3e}",
            null.eta_pair.norm()
        );

        // Transverse data self-pairs to the plain scalar norms.
        let transverse = potential_lift(&grid, |p| {
            [
                c(0.0, 0.0),
                c((-0.5 * p.p0).exp(), 0.0),
                c(0.0, (-0.7 * p.p0).exp()),
            ]
        })
        .unwrap();
        let self_pair = vector_potential_pairings(&transverse, &transverse, 1e-8).unwrap();
        let expected = self_pair.factor_scalars[0].re + self_pair.factor_scalars[1].re;
        assert_relative_eq!(self_pair.eta_pair.re, expected, max_relative = 1e-10);
        assert!(self_pair.eta_pair.re > 0.0);

        // Non-solutions are rejected.
        let junk = ConeFunction::from_fn(&grid, 4, |p| {
            CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(p.p0, 0.0)])
        });
        assert!(matches!(
            vector_potential_pairings(&junk, &phi, 1e-8),
            Err(EmbeddingError::NotInSolutionSpace { .. })
        ));
    }

    #[test]
    fn tensor_pair_maps_isometrically_into_the_potential_fibre() {
        let grid = small_grid(45);
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let pol = CVec::from_fn(4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let f = TestFunction::Gaussian(GaussianPacket::new(
            FourVector::new(0.0, 0.1, -0.2, 0.3),
            1.3,
            FourVector::new(0.2, -0.3, 0.4, 0.0),
            pol,
        ));
        let embedded = embed(&EquationId::MaxwellF, &f, &grid).unwrap();
        let potential = phi_af(&embedded, 1e-8).unwrap();
        let eta_norm = vector_potential_pairings(&potential, &potential, 1e-8)
            .unwrap()
            .eta_pair;
        let net_norm = net_pairing(&embedded, &embedded).unwrap();
        assert!(
            (eta_norm - net_norm).norm() <= 1e-10 * net_norm.re,
            "isometry defect {:.3e} (eta {:.6e}, net {:.6e})",
            (eta_norm - net_norm).norm(),
            eta_norm,
            net_norm
        );
    }

    #[test]
    fn embedding_errors_are_reported() {
        let grid = small_grid(49);
        let f = TestFunction::Gaussian(packet2(51));
        assert!(matches!(
            embed(&EquationId::MaxwellF, &f, &grid),
            Err(EmbeddingError::FibreMismatch { expected: 4, got: 2 })
        ));
        assert!(matches!(
            embed(&EquationId::Dirac, &{
                let mut rng = ChaCha8Rng::seed_from_u64(1);
                TestFunction::Gaussian(GaussianPacket::new(
                    FourVector::zero(),
                    1.0,
                    FourVector::zero(),
                    CVec::from_fn(4, |_, _| c(rng.random_range(-1.0..1.0), 0.0)),
                ))
            }, &grid),
            Err(EmbeddingError::UnsupportedModel(EquationId::Dirac))
        ));
    }

    #[test]
    fn embedded_vector_dump_has_block_headers() {
        let grid = small_grid(53);
        let f = TestFunction::Gaussian(packet2(55));
        let embedded = embed(&EquationId::Weyl, &f, &grid).unwrap();
        let mut out = Vec::new();
        embedded.write_dump(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.matches("# block ").count(), 4);
        assert_eq!(text.matches("# mnl-cone v1 d=2").count(), 4);
    }
}
