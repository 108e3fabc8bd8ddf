//! Quadrature grids on the forward light cone and forward mass shells, with
//! the weighted fibre inner products used by the one-particle spaces.
//!
//! The invariant measure is mu_0 = d^3p / (2 p0) on the cone and
//! d^3p / (2 sqrt(|p|^2 + m^2)) on the shell of mass m. Nodes come from a
//! product rule: Gauss-Legendre in cos(theta), the trapezoid rule in phi
//! (exact for trigonometric polynomials on the periodic circle), and
//! Gauss-Legendre in a mapped radius r = r_max t^2, whose Jacobian 2 r_max t
//! tames the integrable radial density near r = 0. Radial truncation at
//! r_max leaves a tail bounded by (r_max + 1) e^{-r_max} relative to the
//! exponential test moment; the bound is exposed per grid rather than hidden.
//!
//! A seeded random rotation tilts the polar axis before the nodes are laid
//! down, so no node comes within ten chart guards of the excluded ray
//! p3 = -p0 where the little-group section breaks down. Node directions are
//! built with the transverse radius sqrt((1-cos)(1+cos)), which keeps the
//! Minkowski square of every node at relative machine precision even after
//! the rotation.
//!
//! Inner products are weighted sums sum_i w_i <f(p_i), B(p_i) g(p_i)> with a
//! p-dependent weight per kind:
//!
//! | kind       | fibre | B(p)                                              |
//! |------------|-------|---------------------------------------------------|
//! | l2         | any   | identity                                          |
//! | beta_plus  | 2     | (H_p^-1)* diag(1,0) H_p^-1, rank one              |
//! | beta_minus | 2     | entrywise conjugate of beta_plus                  |
//! | weyl_net   | 8     | blockdiag(B_+, B_-, B_+, B_-)                     |
//! | f_net      | 4     | (conj H_p^-1)* diag(0,1) (conj H_p^-1), squared   |
//! |            |       | as a Kronecker factor: conj(Pd) (x) conj(Pd)      |
//! | eta_pm     | 4     | constant spinorial eta                            |
//!
//! beta_plus evaluates the positive-helicity solution pairing: on fibres
//! H_p (chi, 0)^T it reduces exactly to the scalar product of the chi's.
//! f_net is the homogeneous degree-two kernel that appears when the same
//! pairing is pushed to test-function side for the field-strength net; it is
//! rank one and positive semidefinite but not an isometry weight. eta_pm is
//! indefinite by design.
//!
//! Sums are reduced with a fixed pairwise tree in node order, so results are
//! bit-identical across runs and thread counts.

use std::io;

use nalgebra::{Matrix2, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::little_group::{massless_section, sl2_inverse, ChartGuard, SectionError};
use crate::spinor_algebra::{conj2, to_dmat, FourVector};
use crate::wave_equations::eta_spinorial;
use crate::{tree_sum, C64, CMat, CVec};

/// Which hypersurface the grid samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    /// Forward light cone, measure d^3p / (2 p0).
    Cone,
    /// Forward mass shell of the given mass, measure d^3p / (2 E_m(p)).
    Shell(f64),
}

/// Errors from grid-level operations.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("fibre dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Section(#[from] SectionError),
}

/// Product quadrature rule on the cone or a mass shell.
///
/// Nodes are ordered radius-major: for each radial node, all polar nodes,
/// and for each polar node all azimuthal nodes. The ordering is part of the
/// deterministic contract; reductions pair terms in this order.
#[derive(Debug, Clone)]
pub struct ConeGrid {
    pub kind: GridKind,
    pub nodes: Vec<FourVector>,
    pub weights: Vec<f64>,
    /// Rotation applied to the spatial node directions. Recorded so runs can
    /// be reproduced and the tilt away from the excluded ray audited.
    pub axis_rotation: Matrix3<f64>,
    pub r_max: f64,
    pub seed: u64,
}

impl ConeGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mass of the shell, or None on the cone.
    pub fn mass(&self) -> Option<f64> {
        match self.kind {
            GridKind::Cone => None,
            GridKind::Shell(m) => Some(m),
        }
    }

    /// Smallest chart margin (p0+p3)/p0 over the nodes.
    pub fn min_margin(&self) -> f64 {
        let guard = ChartGuard::default();
        self.nodes
            .iter()
            .map(|p| guard.margin(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Relative defect of the exponential test moment against its exact
    /// value: |sum_i w_i e^{-p0_i} - 2 pi| / (2 pi). Cone grids only.
    pub fn exp_moment_defect(&self) -> Option<f64> {
        match self.kind {
            GridKind::Shell(_) => None,
            GridKind::Cone => {
                let terms: Vec<f64> = self
                    .nodes
                    .iter()
                    .zip(&self.weights)
                    .map(|(p, w)| w * (-p.p0).exp())
                    .collect();
                let total = crate::tree_sum_f64(&terms);
                let exact = 2.0 * std::f64::consts::PI;
                Some((total - exact).abs() / exact)
            }
        }
    }

    /// Upper bound on the relative radial truncation error of the
    /// exponential test moment: (r_max + 1) e^{-r_max}. On a shell the
    /// integrand decays at least as fast, so the same bound applies.
    pub fn truncation_tail_estimate(&self) -> f64 {
        (self.r_max + 1.0) * (-self.r_max).exp()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Deterministic for a given n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x =
            (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and its derivative at x, by the three-term
/// recurrence. Valid for x strictly inside (-1, 1).
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let dp = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Build a product quadrature grid.
///
/// Radial rule: Gauss-Legendre on t in [0, 1] mapped by r = r_max t^2.
/// Polar rule: Gauss-Legendre in cos(theta). Azimuthal rule: trapezoid.
/// A rotation drawn from the seed tilts the polar axis until every node
/// direction keeps a chart margin of at least ten defaults.
pub fn build_grid(
    kind: GridKind,
    n_r: usize,
    n_theta: usize,
    n_phi: usize,
    r_max: f64,
    seed: u64,
) -> ConeGrid {
    assert!(n_r >= 2 && n_theta >= 2 && n_phi >= 2, "need at least two nodes per axis");
    assert!(r_max > 0.0, "r_max must be positive");
    if let GridKind::Shell(m) = kind {
        assert!(m > 0.0, "shell mass must be positive");
    }

    let (t_nodes, t_weights) = gauss_legendre(n_r);
    let (c_nodes, c_weights) = gauss_legendre(n_theta);
    let phi_weight = std::f64::consts::TAU / n_phi as f64;

    // Unit directions before rotation, with the transverse radius computed
    // as sqrt((1-c)(1+c)) so each direction is a unit vector to one ulp.
    let mut directions = Vec::with_capacity(n_theta * n_phi);
    for &c in &c_nodes {
        let rho = ((1.0 - c) * (1.0 + c)).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = std::f64::consts::TAU * k as f64 / n_phi as f64;
            directions.push(Vector3::new(rho * phi.cos(), rho * phi.sin(), c));
        }
    }

    // Tilt the axis until every direction clears the excluded ray by a
    // factor of ten in chart margin. Generic rotations succeed immediately;
    // the loop is a guarantee, not an expectation.
    let margin_floor = 10.0 * ChartGuard::default().delta_chart;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis_rotation = loop {
        let rot = crate::sampling::rotation(&mut rng);
        let worst = directions
            .iter()
            .map(|u| 1.0 + (rot * u).z)
            .fold(f64::INFINITY, f64::min);
        if worst >= margin_floor {
            break rot;
        }
    };

    let n_nodes = n_r * n_theta * n_phi;
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    for (ir, &tx) in t_nodes.iter().enumerate() {
        // Map [-1, 1] to t in [0, 1], then r = r_max t^2.
        let t = 0.5 * (tx + 1.0);
        let w_t = 0.5 * t_weights[ir];
        let r = r_max * t * t;
        let dr_dt = 2.0 * r_max * t;
        for (ic, &w_c) in c_weights.iter().enumerate() {
            for k in 0..n_phi {
                let v = axis_rotation * directions[ic * n_phi + k];
                let p0 = match kind {
                    GridKind::Cone => r,
                    GridKind::Shell(m) => (r * r + m * m).sqrt(),
                };
                nodes.push(FourVector::new(p0, r * v.x, r * v.y, r * v.z));
                weights.push(w_t * dr_dt * w_c * phi_weight * r * r / (2.0 * p0));
            }
        }
    }

    ConeGrid { kind, nodes, weights, axis_rotation, r_max, seed }
}

/// Fibre-weighted inner products on grid functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerProductKind {
    /// Plain componentwise l2 pairing, any fibre dimension.
    L2,
    /// Positive-helicity solution pairing on fibre dimension 2.
    BetaPlus,
    /// Negative-helicity solution pairing, the conjugate weight.
    BetaMinus,
    /// Block pairing on the doubled helicity space, fibre dimension 8.
    WeylNet,
    /// Degree-two homogeneous causality kernel, fibre dimension 4.
    FNet,
    /// Constant indefinite spinorial eta pairing, fibre dimension 4.
    EtaPm,
}

impl InnerProductKind {
    /// Fibre dimension the kind requires, or None when any dimension works.
    pub fn required_dim(&self) -> Option<usize> {
        match self {
            InnerProductKind::L2 => None,
            InnerProductKind::BetaPlus | InnerProductKind::BetaMinus => Some(2),
            InnerProductKind::WeylNet => Some(8),
            InnerProductKind::FNet | InnerProductKind::EtaPm => Some(4),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InnerProductKind::L2 => "l2",
            InnerProductKind::BetaPlus => "beta_plus",
            InnerProductKind::BetaMinus => "beta_minus",
            InnerProductKind::WeylNet => "weyl_net",
            InnerProductKind::FNet => "f_net",
            InnerProductKind::EtaPm => "eta_pm",
        }
    }
}

fn beta_plus_matrix2(p: &FourVector, guard: &ChartGuard) -> Result<Matrix2<C64>, SectionError> {
    let h_inv = sl2_inverse(&massless_section(p, guard)?);
    let selector = Matrix2::new(
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    );
    Ok(h_inv.adjoint() * selector * h_inv)
}

fn f_net_factor(p: &FourVector, guard: &ChartGuard) -> Result<Matrix2<C64>, SectionError> {
    let hb_inv = conj2(&sl2_inverse(&massless_section(p, guard)?));
    let selector = Matrix2::new(
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
    );
    Ok(hb_inv.adjoint() * selector * hb_inv)
}

/// Weight matrix B(p) for a kind, at fibre dimension `dim`.
pub fn weight_matrix(
    kind: InnerProductKind,
    p: &FourVector,
    dim: usize,
    guard: &ChartGuard,
) -> Result<CMat, GridError> {
    if let Some(required) = kind.required_dim() {
        if required != dim {
            return Err(GridError::DimensionMismatch { expected: required, got: dim });
        }
    }
    match kind {
        InnerProductKind::L2 => Ok(CMat::identity(dim, dim)),
        InnerProductKind::BetaPlus => Ok(to_dmat(&beta_plus_matrix2(p, guard)?)),
        InnerProductKind::BetaMinus => Ok(to_dmat(&conj2(&beta_plus_matrix2(p, guard)?))),
        InnerProductKind::WeylNet => {
            let plus = to_dmat(&beta_plus_matrix2(p, guard)?);
            let minus = plus.conjugate();
            let mut block = CMat::zeros(8, 8);
            for (i, b) in [&plus, &minus, &plus, &minus].into_iter().enumerate() {
                block.view_mut((2 * i, 2 * i), (2, 2)).copy_from(b);
            }
            Ok(block)
        }
        InnerProductKind::FNet => {
            let factor = to_dmat(&f_net_factor(p, guard)?);
            Ok(factor.kronecker(&factor))
        }
        InnerProductKind::EtaPm => Ok(eta_spinorial()),
    }
}

/// Fibre-vector-valued function sampled on a grid.
#[derive(Clone)]
pub struct ConeFunction<'g> {
    pub grid: &'g ConeGrid,
    pub dim: usize,
    pub values: Vec<CVec>,
}

impl<'g> ConeFunction<'g> {
    /// Sample a fibre function at every grid node, in parallel but in a
    /// deterministic node order.
    pub fn from_fn<F>(grid: &'g ConeGrid, dim: usize, f: F) -> Self
    where
        F: Fn(&FourVector) -> CVec + Sync,
    {
        let values: Vec<CVec> = grid
            .nodes
            .par_iter()
            .map(|p| {
                let v = f(p);
                assert_eq!(v.len(), dim, "fibre function returned wrong dimension");
                v
            })
            .collect();
        Self { grid, dim, values }
    }

    /// Columnar text dump: header `# mnl-cone v1 d=<dim>`, then one node per
    /// line as `p0 p1 p2 p3 w Re(v_1) Im(v_1) ... Re(v_d) Im(v_d)`.
    pub fn write_dump<W: io::Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# mnl-cone v1 d={}", self.dim)?;
        for (i, p) in self.grid.nodes.iter().enumerate() {
            write!(
                out,
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                p.p0, p.p1, p.p2, p.p3, self.grid.weights[i]
            )?;
            for component in self.values[i].iter() {
                write!(out, " {:.17e} {:.17e}", component.re, component.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Weighted inner product sum_i w_i <f(p_i), B(p_i) g(p_i)>, antilinear in
/// the first slot, reduced with a fixed pairwise tree.
pub fn inner_product(
    kind: InnerProductKind,
    f: &ConeFunction,
    g: &ConeFunction,
) -> Result<C64, GridError> {
    if !std::ptr::eq(f.grid, g.grid) {
        return Err(GridError::GridMismatch);
    }
    if f.dim != g.dim {
        return Err(GridError::DimensionMismatch { expected: f.dim, got: g.dim });
    }
    if let Some(required) = kind.required_dim() {
        if required != f.dim {
            return Err(GridError::DimensionMismatch { expected: required, got: f.dim });
        }
    }
    let guard = ChartGuard::default();
    let terms: Result<Vec<C64>, GridError> = (0..f.grid.len())
        .into_par_iter()
        .map(|i| {
            let w = f.grid.weights[i];
            let term = match kind {
                InnerProductKind::L2 => f.values[i].dotc(&g.values[i]),
                _ => {
                    let b = weight_matrix(kind, &f.grid.nodes[i], f.dim, &guard)?;
                    f.values[i].dotc(&(&b * &g.values[i]))
                }
            };
            Ok(C64::new(w, 0.0) * term)
        })
        .collect();
    Ok(tree_sum(&terms?))
}

/// Norm induced by a (positive semidefinite) inner product kind.
pub fn grid_norm(kind: InnerProductKind, f: &ConeFunction) -> Result<f64, GridError> {
    Ok(inner_product(kind, f, f)?.re.max(0.0).sqrt())
}
