//! Relativistic wave equations as invariant orthoprojections on fibres.
//!
//! Each supported equation is an orthoprojection pi on a finite fibre carrying
//! a representation of SL(2,C):
//!
//!   weyl        pi = diag(1,0)            on D^(1/2,0), fibre C^2
//!   maxwell_F   pi = diag(1,0) x diag(1,0) on D^(1,0),   fibre C^4
//!   maxwell_A   pi = diag(1,1,1,0)         on D^(1/2,1/2), fibre C^4
//!   dirac       pi = 1/2 [[1,0,1,0],...]   on A + (A*)^{-1}, fibre C^4
//!   proca       pi = 1/2 [[1,0,0,-1],...]  on D^(1/2,1/2), fibre C^4
//!   helicity(n) pi = diag(1,0)^{x n}       on D^(n/2,0), fibre C^(2^n)
//!
//! The momentum-space form is pi(p) = D(H_p) pi D(H_p)^{-1} with the light-cone
//! or mass-shell section H_p; a fibre function solves the wave equation iff
//! pi(p) phi(p) = phi(p), equivalently iff the first-order residual operator
//! annihilates phi: the Weyl operator W(p) = p0 s0 - sum p_i s_i, the
//! contraction with P-dagger on the first tensor slot (F and helicity cases),
//! the scalar divergence form (A case), or gamma(p) - m (Dirac case).
//!
//! The A-equation machinery also carries the unitary W_s exchanging the
//! spinorial and vector components and the spinorial metric eta with
//! W_s^{-1} diag(-1,1,1,1) W_s = eta; the pairing <phi, eta phi> is positive
//! exactly on the two transverse components.

use thiserror::Error;

use crate::little_group::{massive_section, massless_section, sl2_inverse, ChartGuard, SectionError};
use crate::spinor_algebra::{
    momentum_to_matrix, rep_apply, to_dmat, FourVector, RepLabel, Spin2Matrix,
};
use crate::{C64, CMat, CVec};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Names one of the supported relativistic wave equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EquationId {
    Weyl,
    MaxwellF,
    MaxwellA,
    Dirac,
    Proca,
    /// Massless equation of helicity n/2 on the n-fold tensor power; n >= 1.
    /// helicity(1) reproduces the weyl projection, helicity(2) the maxwell_F
    /// projection.
    Helicity(u32),
}

impl EquationId {
    pub fn fibre_dim(&self) -> usize {
        self.rep().dim()
    }

    pub fn rep(&self) -> FibreRep {
        match self {
            EquationId::Weyl => FibreRep::Tensor(RepLabel::new(1, 0)),
            EquationId::MaxwellF => FibreRep::Tensor(RepLabel::new(2, 0)),
            EquationId::MaxwellA | EquationId::Proca => FibreRep::Tensor(RepLabel::new(1, 1)),
            EquationId::Dirac => FibreRep::DiracSum,
            EquationId::Helicity(n) => {
                assert!(*n >= 1, "helicity order must be at least 1");
                FibreRep::Tensor(RepLabel::new(*n, 0))
            }
        }
    }

    /// Massive equations take a mass parameter and use the mass-shell section.
    pub fn is_massive(&self) -> bool {
        matches!(self, EquationId::Dirac | EquationId::Proca)
    }

    pub fn name(&self) -> String {
        match self {
            EquationId::Weyl => "weyl".into(),
            EquationId::MaxwellF => "maxwell_F".into(),
            EquationId::MaxwellA => "maxwell_A".into(),
            EquationId::Dirac => "dirac".into(),
            EquationId::Proca => "proca".into(),
            EquationId::Helicity(n) => format!("helicity({n})"),
        }
    }

    /// The registry rows dumped by `mnl tables`.
    pub fn registry() -> Vec<EquationId> {
        vec![
            EquationId::Weyl,
            EquationId::MaxwellF,
            EquationId::MaxwellA,
            EquationId::Dirac,
            EquationId::Proca,
            EquationId::Helicity(1),
            EquationId::Helicity(2),
            EquationId::Helicity(3),
        ]
    }
}

/// Fibre representation of SL(2,C) attached to an equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FibreRep {
    /// D^(j/2,k/2)(A) = A^{x j} x conj(A)^{x k} on the full tensor space.
    Tensor(RepLabel),
    /// Doubled spinor representation diag(A, (A*)^{-1}) on C^4.
    DiracSum,
}

impl FibreRep {
    pub fn dim(&self) -> usize {
        match self {
            FibreRep::Tensor(label) => label.dim(),
            FibreRep::DiracSum => 4,
        }
    }

    pub fn apply(&self, a: &Spin2Matrix) -> CMat {
        match self {
            FibreRep::Tensor(label) => rep_apply(*label, a),
            FibreRep::DiracSum => {
                let lower = sl2_inverse(a).adjoint();
                let mut d = CMat::zeros(4, 4);
                d.view_mut((0, 0), (2, 2)).copy_from(&to_dmat(a));
                d.view_mut((2, 2), (2, 2)).copy_from(&to_dmat(&lower));
                d
            }
        }
    }
}

/// An equation's fibre orthoprojection together with its representation.
#[derive(Debug, Clone)]
pub struct Projection {
    pub equation: EquationId,
    pub matrix: CMat,
    pub rep: FibreRep,
}

/// Momentum-space projection pi(p) = D(H_p) pi D(H_p)^{-1}.
#[derive(Debug, Clone)]
pub struct MomentumProjection {
    pub p: FourVector,
    pub matrix: CMat,
}

impl MomentumProjection {
    /// ||pi(p)^2 - pi(p)||, preserved by the similarity up to rounding.
    pub fn idempotency_defect(&self) -> f64 {
        crate::max_abs(&(&self.matrix * &self.matrix - &self.matrix))
    }
}

#[derive(Debug, Error)]
pub enum WaveEquationError {
    #[error("fibre dimension mismatch: equation needs {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("massless equation takes mass 0, got {0}")]
    MassOnMasslessEquation(f64),
    #[error(transparent)]
    Section(#[from] SectionError),
}

/// The registry matrix of the equation's fibre orthoprojection.
pub fn projection_for(eq: &EquationId) -> Projection {
    let one = c(1.0, 0.0);
    let half = c(0.5, 0.0);
    let matrix = match eq {
        EquationId::Weyl => {
            CMat::from_diagonal(&CVec::from_vec(vec![one, c(0.0, 0.0)]))
        }
        EquationId::MaxwellF => {
            let d2 = CMat::from_diagonal(&CVec::from_vec(vec![one, c(0.0, 0.0)]));
            d2.kronecker(&d2)
        }
        EquationId::MaxwellA => CMat::from_diagonal(&CVec::from_vec(vec![
            one,
            one,
            one,
            c(0.0, 0.0),
        ])),
        EquationId::Dirac => {
            let mut m = CMat::zeros(4, 4);
            for i in 0..4 {
                m[(i, i)] = half;
                m[(i, (i + 2) % 4)] = half;
            }
            m
        }
        EquationId::Proca => {
            let mut m = CMat::zeros(4, 4);
            m[(0, 0)] = half;
            m[(0, 3)] = -half;
            m[(3, 0)] = -half;
            m[(3, 3)] = half;
            m[(1, 1)] = one;
            m[(2, 2)] = one;
            m
        }
        EquationId::Helicity(n) => {
            assert!(*n >= 1, "helicity order must be at least 1");
            let d2 = CMat::from_diagonal(&CVec::from_vec(vec![one, c(0.0, 0.0)]));
            let mut m = CMat::identity(1, 1);
            for _ in 0..*n {
                m = m.kronecker(&d2);
            }
            m
        }
    };
    Projection {
        equation: *eq,
        matrix,
        rep: eq.rep(),
    }
}

/// Invariance diagnostics of an orthoprojection under a sampled little group:
/// d1 = max ||pi D(L) pi - D(L) pi|| (the range of pi is D-invariant) and
/// d2 = max ||pi D(L)* D(L) pi - pi|| (D restricted to the range is
/// isometric). Both vanish for admissible equation projections; d2 famously
/// fails for the naive full projection of the A-equation.
pub fn invariance_defect(
    pi: &CMat,
    rep: RepLabel,
    sample: &[Spin2Matrix],
) -> Result<(f64, f64), WaveEquationError> {
    if pi.nrows() != rep.dim() || pi.ncols() != rep.dim() {
        return Err(WaveEquationError::DimensionMismatch {
            expected: rep.dim(),
            got: pi.nrows(),
        });
    }
    let mut d1 = 0.0f64;
    let mut d2 = 0.0f64;
    for l in sample {
        let d = rep_apply(rep, l);
        let dp = &d * pi;
        d1 = d1.max(crate::max_abs(&(pi * &dp - &dp)));
        d2 = d2.max(crate::max_abs(&(pi * d.adjoint() * &dp - pi)));
    }
    Ok((d1, d2))
}

/// The Weyl operator W(p) = p0 s0 - sum p_i s_i; equals twice the massless
/// P-dagger and (H_p^{-1})* diag(0,2) H_p^{-1} on the cone.
pub fn weyl_operator(p: &FourVector) -> Spin2Matrix {
    momentum_to_matrix(&p.parity_flip())
}

/// Massless P-dagger = (p0 s0 - sum p_i s_i)/2, the fibre weight of the
/// positive-helicity scalar product.
pub fn p_dagger_massless(p: &FourVector) -> Spin2Matrix {
    weyl_operator(p).map(|z| z * 0.5)
}

/// Massive P-dagger = (p0 s0 - sum p_i s_i)/m = (H_p^{-1})* H_p^{-1} on the
/// mass-m shell.
pub fn p_dagger_massive(p: &FourVector, mass: f64) -> Spin2Matrix {
    weyl_operator(p).map(|z| z / mass)
}

/// Dirac matrix gamma(p) = [[0, P],[P-hat, 0]] with P-hat the parity flip;
/// gamma(p)^2 = p.p on any fibre vector.
pub fn gamma_matrix(p: &FourVector) -> CMat {
    let mut g = CMat::zeros(4, 4);
    g.view_mut((0, 2), (2, 2))
        .copy_from(&to_dmat(&momentum_to_matrix(p)));
    g.view_mut((2, 0), (2, 2))
        .copy_from(&to_dmat(&weyl_operator(p)));
    g
}

/// Unitary change of basis between the spinorial components of the A-equation
/// fibre and vector components: psi = W_s phi.
pub fn w_s() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = CMat::zeros(4, 4);
    w[(0, 0)] = c(s, 0.0);
    w[(0, 3)] = c(s, 0.0);
    w[(1, 1)] = c(s, 0.0);
    w[(1, 2)] = c(s, 0.0);
    w[(2, 1)] = c(0.0, s);
    w[(2, 2)] = c(0.0, -s);
    w[(3, 0)] = c(s, 0.0);
    w[(3, 3)] = c(-s, 0.0);
    w
}

/// Spinorial form of the Minkowski metric on the A-equation fibre:
/// eta = W_s^{-1} diag(-1,1,1,1) W_s, invariant under D^(1/2,1/2)(A)* . D(A),
/// positive on the two transverse components and null on the other two.
pub fn eta_spinorial() -> CMat {
    let mut e = CMat::zeros(4, 4);
    e[(0, 3)] = c(-1.0, 0.0);
    e[(3, 0)] = c(-1.0, 0.0);
    e[(1, 1)] = c(1.0, 0.0);
    e[(2, 2)] = c(1.0, 0.0);
    e
}

/// pi(p) = D(H_p) pi D(H_p)^{-1} with the appropriate section. Massless
/// equations require mass = 0 and the chart guard; massive equations use the
/// positive mass-shell section.
pub fn momentum_projection(
    eq: &EquationId,
    p: &FourVector,
    mass: f64,
    guard: &ChartGuard,
) -> Result<MomentumProjection, WaveEquationError> {
    let proj = projection_for(eq);
    let h = if eq.is_massive() {
        massive_section(p, mass)?
    } else {
        if mass != 0.0 {
            return Err(WaveEquationError::MassOnMasslessEquation(mass));
        }
        massless_section(p, guard)?
    };
    let d = proj.rep.apply(&h);
    let d_inv = proj.rep.apply(&sl2_inverse(&h));
    Ok(MomentumProjection {
        p: *p,
        matrix: &d * &proj.matrix * &d_inv,
    })
}

/// First-order residual of the equation at momentum p. Zero exactly on the
/// range of pi(p):
///
///   weyl        W(p) phi                      (C^2)
///   maxwell_F   (P-dagger x 1) phi            (C^4, first-slot contraction)
///   helicity(n) (P-dagger x 1^{x(n-1)}) phi   (C^(2^n))
///   maxwell_A   the scalar -(p0-p3) phi0 + (p1+i p2) phi1
///                 + (p1-i p2) phi2 - (p0+p3) phi3   (C^1)
///   dirac       (gamma(p) - m) phi            (C^4)
///   proca       (pi(p) - 1) phi               (C^4)
pub fn rwe_residual(
    eq: &EquationId,
    phi: &CVec,
    p: &FourVector,
    mass: f64,
    guard: &ChartGuard,
) -> Result<CVec, WaveEquationError> {
    let expected = eq.fibre_dim();
    if phi.len() != expected {
        return Err(WaveEquationError::DimensionMismatch {
            expected,
            got: phi.len(),
        });
    }
    if !eq.is_massive() {
        if mass != 0.0 {
            return Err(WaveEquationError::MassOnMasslessEquation(mass));
        }
        // Chart and cone admission, same policy as the section.
        massless_section(p, guard)?;
    }
    match eq {
        EquationId::Weyl => Ok(to_dmat(&weyl_operator(p)) * phi),
        EquationId::MaxwellF => {
            let contraction = to_dmat(&p_dagger_massless(p)).kronecker(&CMat::identity(2, 2));
            Ok(contraction * phi)
        }
        EquationId::Helicity(n) => {
            let rest = 1usize << (*n as usize - 1);
            let contraction =
                to_dmat(&p_dagger_massless(p)).kronecker(&CMat::identity(rest, rest));
            Ok(contraction * phi)
        }
        EquationId::MaxwellA => {
            let scalar = -c(p.p0 - p.p3, 0.0) * phi[0]
                + c(p.p1, p.p2) * phi[1]
                + c(p.p1, -p.p2) * phi[2]
                - c(p.p0 + p.p3, 0.0) * phi[3];
            Ok(CVec::from_vec(vec![scalar]))
        }
        EquationId::Dirac => {
            massive_section(p, mass)?;
            Ok(gamma_matrix(p) * phi - phi.map(|z| z * mass))
        }
        EquationId::Proca => {
            let pi_p = momentum_projection(eq, p, mass, guard)?;
            Ok(&pi_p.matrix * phi - phi)
        }
    }
}
