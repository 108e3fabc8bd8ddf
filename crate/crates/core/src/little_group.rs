//! Closed-form sections of the momentum-orbit bundles and Wigner little-group
//! elements.
//!
//! On the punctured forward light cone (chart excluding the ray p3 = -p0) the
//! section is
//!
//!   H_p = (2 p0 (p0+p3))^{-1/2} * [[-sqrt(p0)(p0+p3), (p1-i p2)/sqrt(p0)],
//!                                  [-sqrt(p0)(p1+i p2), -(p0+p3)/sqrt(p0)]]
//!
//! with H_p diag(2,0) H_p* = P and det H_p = 1; it maps the base point
//! (1,0,0,1) to -identity. On the mass-m shell the section is the positive
//! matrix H_p = (m + P)/sqrt(2m(m+p0)), mapping (m,0,0,0) to the identity.
//!
//! For A in SL(2,C) and p in the chart, the Wigner element
//! H_p^{-1} A H_q with q = Lambda_A^{-1} p lies in the little group: E(2)
//! (upper triangular with unimodular diagonal) in the massless case, SU(2) in
//! the massive case. Its (2,2) entry is the helicity phase e^{-i theta(A,p)/2},
//! with the closed form (-b(p1+i p2) + d(p0+p3)) / |...| for A = [[a,b],[c,d]].

use thiserror::Error;

use crate::spinor_algebra::{
    lorentz_action, momentum_to_matrix, unimodular_defect, FourVector, Spin2Matrix,
};
use crate::C64;

/// Guard for the light-cone chart that excludes the ray p3 = -p0.
#[derive(Debug, Clone, Copy)]
pub struct ChartGuard {
    /// Minimal admissible value of (p0+p3)/p0.
    pub delta_chart: f64,
}

impl Default for ChartGuard {
    fn default() -> Self {
        Self { delta_chart: 1e-8 }
    }
}

impl ChartGuard {
    /// Chart coordinate (p0+p3)/p0. The section matrix itself stays bounded
    /// on the chart (H* H = diag(p0, 1/p0) exactly), but its derivative in
    /// the margin direction grows like margin^(-1/2), so evaluation near the
    /// excluded ray is ill conditioned and the guard keeps it away.
    pub fn margin(&self, p: &FourVector) -> f64 {
        (p.p0 + p.p3) / p.p0
    }

    pub fn admits(&self, p: &FourVector) -> bool {
        p.p0 > 0.0 && self.margin(p) >= self.delta_chart
    }
}

/// Errors from section evaluation.
#[derive(Debug, Error)]
pub enum SectionError {
    #[error("point leaves the section chart: (p0+p3)/p0 = {margin:.3e} < {delta:.3e}")]
    OutOfChart { margin: f64, delta: f64 },
    #[error("point is not on the forward light cone: |p.p| = {defect:.3e}, p0 = {p0:.3e}")]
    NotOnCone { defect: f64, p0: f64 },
    #[error("point is not on the forward mass-{mass} shell: |p.p - m^2| = {defect:.3e}")]
    NotOnShell { defect: f64, mass: f64 },
    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),
}

/// Wigner little-group element H_p^{-1} A H_q together with its phase entry.
#[derive(Debug, Clone)]
pub struct WignerElement {
    /// The little-group matrix L = H_p^{-1} A H_q.
    pub matrix: Spin2Matrix,
    /// L[(1,1)] = e^{-i theta(A,p)/2}, unimodular up to rounding.
    pub phase: C64,
}

impl WignerElement {
    /// |L21|; zero for exact E(2) membership.
    pub fn lower_left_defect(&self) -> f64 {
        self.matrix[(1, 0)].norm()
    }

    /// ||phase| - 1|.
    pub fn phase_modulus_defect(&self) -> f64 {
        (self.phase.norm() - 1.0).abs()
    }

    /// |det L - 1|.
    pub fn unimodular_defect(&self) -> f64 {
        unimodular_defect(&self.matrix)
    }

    /// Deviation of L from unitarity (massive case lands in SU(2)).
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.matrix.adjoint() * self.matrix - Spin2Matrix::identity();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Section of the punctured forward light cone. Satisfies
/// H_p diag(2,0) H_p* = P and det H_p = 1.
pub fn massless_section(p: &FourVector, guard: &ChartGuard) -> Result<Spin2Matrix, SectionError> {
    if p.p0 <= 0.0 {
        return Err(SectionError::NotOnCone {
            defect: p.minkowski_sq().abs(),
            p0: p.p0,
        });
    }
    let margin = guard.margin(p);
    if margin < guard.delta_chart {
        return Err(SectionError::OutOfChart {
            margin,
            delta: guard.delta_chart,
        });
    }
    let cone_defect = p.minkowski_sq().abs();
    if cone_defect > 1e-10 * p.p0 * p.p0 {
        return Err(SectionError::NotOnCone {
            defect: cone_defect,
            p0: p.p0,
        });
    }
    let root_p0 = p.p0.sqrt();
    let scale = 1.0 / (2.0 * p.p0 * (p.p0 + p.p3)).sqrt();
    let h11 = C64::new(-root_p0 * (p.p0 + p.p3), 0.0);
    let h12 = C64::new(p.p1 / root_p0, -p.p2 / root_p0);
    let h21 = C64::new(-root_p0 * p.p1, -root_p0 * p.p2);
    let h22 = C64::new(-(p.p0 + p.p3) / root_p0, 0.0);
    Ok(Spin2Matrix::new(h11, h12, h21, h22).map(|z| z * scale))
}

/// Section of the forward mass-m shell: H_p = (m + P)/sqrt(2m(m+p0)),
/// self-adjoint and positive, with H_p (m sigma0) H_p* = P and det H_p = 1.
pub fn massive_section(p: &FourVector, mass: f64) -> Result<Spin2Matrix, SectionError> {
    if mass <= 0.0 {
        return Err(SectionError::NonPositiveMass(mass));
    }
    let scale_ref = mass * mass + p.euclidean_sq();
    let defect = (p.minkowski_sq() - mass * mass).abs();
    if p.p0 <= 0.0 || defect > 1e-10 * scale_ref {
        return Err(SectionError::NotOnShell { defect, mass });
    }
    let m_plus_p = momentum_to_matrix(p) + Spin2Matrix::identity().map(|z| z * mass);
    let scale = 1.0 / (2.0 * mass * (mass + p.p0)).sqrt();
    Ok(m_plus_p.map(|z| z * scale))
}

/// Exact SL(2,C) inverse via the adjugate (valid since det = 1).
pub fn sl2_inverse(a: &Spin2Matrix) -> Spin2Matrix {
    Spin2Matrix::new(a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)])
}

/// Closed form of the Wigner phase e^{-i theta(A,p)/2} for A = [[a,b],[c,d]]:
/// (-b(p1+i p2) + d(p0+p3)) normalized to modulus one.
pub fn wigner_phase_closed_form(a: &Spin2Matrix, p: &FourVector) -> C64 {
    let b = a[(0, 1)];
    let d = a[(1, 1)];
    let w = -b * C64::new(p.p1, p.p2) + d * C64::new(p.p0 + p.p3, 0.0);
    w / w.norm()
}

/// Massless Wigner element H_p^{-1} A H_q, q = Lambda_A^{-1} p. Lands in E(2);
/// its (2,2) entry is the phase. Chart errors at either endpoint propagate.
pub fn wigner_element(
    a: &Spin2Matrix,
    p: &FourVector,
    guard: &ChartGuard,
) -> Result<WignerElement, SectionError> {
    let h_p = massless_section(p, guard)?;
    let a_inv = sl2_inverse(a);
    let q = lorentz_action(&a_inv, p).expect("unimodular by construction");
    let h_q = massless_section(&q, guard)?;
    let l = sl2_inverse(&h_p) * a * h_q;
    Ok(WignerElement {
        matrix: l,
        phase: l[(1, 1)],
    })
}

/// Massive Wigner rotation H_p^{-1} A H_q on the mass-m shell; lands in SU(2).
pub fn massive_wigner_element(
    a: &Spin2Matrix,
    p: &FourVector,
    mass: f64,
) -> Result<WignerElement, SectionError> {
    let h_p = massive_section(p, mass)?;
    let a_inv = sl2_inverse(a);
    let q = lorentz_action(&a_inv, p).expect("unimodular by construction");
    let h_q = massive_section(&q, mass)?;
    let l = sl2_inverse(&h_p) * a * h_q;
    Ok(WignerElement {
        matrix: l,
        phase: l[(1, 1)],
    })
}

/// Spectral condition number of a section matrix. The light-cone section
/// satisfies H_p* H_p = diag(p0, 1/p0) exactly, so this equals max(p0, 1/p0)
/// independently of the direction of p: the matrix itself never degrades near
/// the excluded ray. What does degrade there is the evaluation map; see
/// [`section_boundary_sensitivity`].
pub fn section_condition_number(h: &Spin2Matrix) -> f64 {
    // Singular values of a 2x2: from the eigenvalues of H* H.
    let g = h.adjoint() * h;
    let tr = g[(0, 0)].re + g[(1, 1)].re;
    let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let lo = (0.5 * tr - disc).max(0.0);
    let hi = 0.5 * tr + disc;
    (hi / lo.max(f64::MIN_POSITIVE)).sqrt()
}

/// Sensitivity of the section to the chart margin: central finite difference
/// of H along the margin direction at fixed radius r and azimuth phi,
/// ||H(margin + h) - H(margin - h)|| / (2h) with h = margin/100. Entries like
/// sqrt((p0+p3)/2) make this grow like margin^(-1/2) near the excluded ray;
/// the harness records the measured log-log exponent (expected -1/2).
pub fn section_boundary_sensitivity(
    r: f64,
    phi: f64,
    margin: f64,
    guard: &ChartGuard,
) -> Result<f64, SectionError> {
    let h = margin / 100.0;
    let hi = massless_section(
        &crate::sampling::cone_point_explicit(r, (margin + h) - 1.0, phi),
        guard,
    )?;
    let lo = massless_section(
        &crate::sampling::cone_point_explicit(r, (margin - h) - 1.0, phi),
        guard,
    )?;
    Ok((hi - lo).norm() / (2.0 * h * r))
}
