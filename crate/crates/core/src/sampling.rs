//! Seeded samplers for momenta and group elements, shared by unit tests and
//! the verification harness.
//!
//! Cone points are constructed so the Minkowski square vanishes to relative
//! machine precision even very close to the excluded ray: with p0 = r and
//! p3 = r cos(theta) fixed first, the transverse radius is taken as
//! sqrt((p0+p3)(p0-p3)), so p1^2 + p2^2 reproduces p0^2 - p3^2 without the
//! cancellation error that squaring sin(theta) would introduce. Identities
//! divided by the chart margin (p0+p3)/p0 then stay at machine precision.

use nalgebra::{Matrix2, Matrix3};
use rand::Rng;

use crate::spinor_algebra::{FourVector, Spin2Matrix};
use crate::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Forward-cone point with radius in `r_range` and chart margin at least
/// `min_margin`.
pub fn cone_point(rng: &mut impl Rng, r_range: (f64, f64), min_margin: f64) -> FourVector {
    let r = rng.random_range(r_range.0..r_range.1);
    let cos_theta = rng.random_range((min_margin - 1.0)..1.0);
    cone_point_explicit(r, cos_theta, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Forward-cone point at exactly the given radius, polar cosine, and azimuth.
pub fn cone_point_explicit(r: f64, cos_theta: f64, phi: f64) -> FourVector {
    let p3 = r * cos_theta;
    let rho = ((r + p3) * (r - p3)).max(0.0).sqrt();
    FourVector::new(r, rho * phi.cos(), rho * phi.sin(), p3)
}

/// Forward mass-shell point with spatial components uniform in a cube.
pub fn shell_point(rng: &mut impl Rng, mass: f64, p_max: f64) -> FourVector {
    let px = rng.random_range(-p_max..p_max);
    let py = rng.random_range(-p_max..p_max);
    let pz = rng.random_range(-p_max..p_max);
    FourVector::new((mass * mass + px * px + py * py + pz * pz).sqrt(), px, py, pz)
}

/// Haar-ish random SU(2) element via a normalized quaternion.
pub fn su2(rng: &mut impl Rng) -> Spin2Matrix {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|x| x * x).sum();
        if n2 < 1e-3 || n2 > 1.0 {
            continue;
        }
        let n = n2.sqrt();
        let (q0, q1, q2, q3) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        return Matrix2::new(c(q0, q3), c(q2, q1), c(-q2, q1), c(q0, -q3));
    }
}

/// Random SL(2,C) element U1 * diag(e^{s/2}, e^{-s/2}) * U2 with rapidity
/// s uniform in [0, max_rapidity] and U1, U2 random SU(2).
pub fn sl2_bounded(rng: &mut impl Rng, max_rapidity: f64) -> Spin2Matrix {
    let s = rng.random_range(0.0..max_rapidity);
    let boost = Matrix2::new(
        c((0.5 * s).exp(), 0.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c((-0.5 * s).exp(), 0.0),
    );
    su2(rng) * boost * su2(rng)
}

/// Random little-group element with theta in [0, 4 pi) and |z| <= z_max.
pub fn e2_element(rng: &mut impl Rng, z_max: f64) -> Spin2Matrix {
    let theta = rng.random_range(0.0..4.0 * std::f64::consts::PI);
    let z = C64::new(
        rng.random_range(-z_max..z_max),
        rng.random_range(-z_max..z_max),
    );
    crate::spinor_algebra::euclidean2_element(theta, z)
}

/// Haar-ish random rotation matrix, the adjoint image of a random quaternion.
pub fn rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|x| x * x).sum();
        if n2 < 1e-3 || n2 > 1.0 {
            continue;
        }
        let n = n2.sqrt();
        let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        return Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        );
    }
}

/// Random spacetime translation with components in [-a_max, a_max].
pub fn translation(rng: &mut impl Rng, a_max: f64) -> FourVector {
    FourVector::new(
        rng.random_range(-a_max..a_max),
        rng.random_range(-a_max..a_max),
        rng.random_range(-a_max..a_max),
        rng.random_range(-a_max..a_max),
    )
}

/// Random complex number in the closed disc of the given radius.
pub fn complex_in_disc(rng: &mut impl Rng, radius: f64) -> C64 {
    loop {
        let z = C64::new(
            rng.random_range(-radius..radius),
            rng.random_range(-radius..radius),
        );
        if z.norm() <= radius {
            return z;
        }
    }
}
