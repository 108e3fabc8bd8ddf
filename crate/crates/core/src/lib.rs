//! Numerical spinor calculus on the forward light cone.
//!
//! The crate builds, bottom up: exact 2x2 spinor algebra and finite
//! tensor-power representations of SL(2,C) (`spinor_algebra`); closed-form
//! sections of the momentum-space bundles together with Wigner little-group
//! elements and phases (`little_group`); the invariant orthoprojections that
//! encode relativistic wave equations and their momentum-space forms
//! (`wave_equations`); quadrature grids for the Lorentz invariant measure on
//! the cone and on mass shells (`momentum_grid`); spacetime test functions
//! with evaluable Fourier transforms (`test_functions`); embeddings of test
//! functions into the canonical one-particle spaces, with conjugation
//! structures and causality pairings (`embeddings`); truncated Fock spaces
//! with CAR/CCR ladder operators and field operators (`fock`); and the
//! verification harness behind the `mnl` CLI (`harness`).

pub mod embeddings;
pub mod fock;
pub mod harness;
pub mod little_group;
pub mod momentum_grid;
pub mod sampling;
pub mod spinor_algebra;
pub mod test_functions;
pub mod wave_equations;

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dynamically sized complex column vector.
pub type CVec = nalgebra::DVector<C64>;

/// Largest entry modulus of a complex matrix; the defect norm used by the
/// exactness checks in this crate (entries are O(1) throughout).
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Pairwise tree sum of complex values. Summation order depends only on the
/// slice length, so accumulated results are bit-identical run to run.
pub fn tree_sum(xs: &[C64]) -> C64 {
    match xs.len() {
        0 => C64::new(0.0, 0.0),
        1 => xs[0],
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            tree_sum(lo) + tree_sum(hi)
        }
    }
}

/// Pairwise tree sum of real values.
pub fn tree_sum_f64(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            tree_sum_f64(lo) + tree_sum_f64(hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_sequential_on_smooth_data() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let seq: f64 = xs.iter().sum();
        assert!((tree_sum_f64(&xs) - seq).abs() < 1e-12);
    }

    #[test]
    fn tree_sum_empty_is_zero() {
        assert_eq!(tree_sum(&[]), C64::new(0.0, 0.0));
        assert_eq!(tree_sum_f64(&[]), 0.0);
    }
}
