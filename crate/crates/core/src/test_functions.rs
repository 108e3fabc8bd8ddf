//! Vector-valued spacetime test functions with evaluable Fourier transforms,
//! the covariant transformation law, Schwartz seminorms, and support
//! geometry.
//!
//! Fourier convention: f_hat(p) = int e^{-i<p,x>} f(x) d^4x with the
//! Minkowski pairing <p,x> = p0 x0 - p.x and no 2 pi prefactor. Restricting
//! to translations produces exactly the e^{-i<p,a>} phases of the canonical
//! representations; any global sign error would be caught by the
//! intertwining checks downstream.
//!
//! Two families are provided. Gaussian packets have a closed-form transform
//! (2 pi)^2 w^4 e^{-i<p-k0, x0>} e^{-w^2 |p-k0|_E^2 / 2}, so they can be
//! evaluated at arbitrary Lorentz-transformed momenta without interpolation.
//! Compact bumps exp(-1/(1-|u|^2)) live exactly on a closed Euclidean ball
//! in R^4, as the causality statements require. Their profile is 4D-radial,
//! so the Minkowski transform factors as e^{-i<p,x0>} Hhat(|p|_E) with Hhat
//! a real 1D radial transform; one two-axis Gauss-Legendre rule per distinct
//! Euclidean norm covers a whole momentum grid (a cone grid has only n_r
//! distinct norms). [`TensorQuadrature`] keeps the generic 4D box rule for
//! non-radial integrands and as an independent oracle in tests.
//!
//! The covariant action is (T(g) f)(x) = D(conj A) f(Lambda_A^{-1}(x - a)),
//! applied lazily; on the Fourier side it becomes
//! e^{-i<p,a>} D(conj A) f_hat(Lambda_A^{-1} p).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::momentum_grid::gauss_legendre;
use crate::spinor_algebra::{
    conj2, lorentz_action, rep_apply, unimodular_defect, FourVector, RepLabel, Spin2Matrix,
};
use crate::{C64, CMat, CVec};

/// Signs eta_u in <p,x> = sum_u eta_u p_u x_u.
const MINK_SIGNS: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Errors from catalog parsing. Evaluation itself is total.
#[derive(Debug, Error)]
pub enum TestFunctionError {
    #[error("catalog parse error: {0}")]
    Catalog(String),
}

/// Gaussian packet v exp(-|x-x0|_E^2 / (2 w^2)) e^{i<k0,x>}.
#[derive(Debug, Clone)]
pub struct GaussianPacket {
    pub x0: FourVector,
    pub width: f64,
    pub k0: FourVector,
    pub polarization: CVec,
}

impl GaussianPacket {
    pub fn new(x0: FourVector, width: f64, k0: FourVector, polarization: CVec) -> Self {
        assert!(width > 0.0, "width must be positive");
        Self { x0, width, k0, polarization }
    }

    fn scalar_at(&self, x: &FourVector) -> C64 {
        let d = x.sub(&self.x0);
        let gauss = (-d.euclidean_sq() / (2.0 * self.width * self.width)).exp();
        let phase = C64::new(0.0, self.k0.minkowski_dot(x)).exp();
        phase * gauss
    }

    /// Closed-form transform: (2 pi)^2 w^4 e^{-i<q,x0>} e^{-w^2 |q|_E^2 / 2}
    /// with q = p - k0.
    fn scalar_fourier(&self, p: &FourVector) -> C64 {
        let q = p.sub(&self.k0);
        let w2 = self.width * self.width;
        let amplitude = (2.0 * std::f64::consts::PI).powi(2)
            * w2
            * w2
            * (-0.5 * w2 * q.euclidean_sq()).exp();
        C64::new(0.0, -q.minkowski_dot(&self.x0)).exp() * amplitude
    }
}

/// Bump v exp(-1/(1-|u|^2)) on the closed Euclidean ball |x - x0| <= radius,
/// u = (x - x0)/radius. Exactly zero outside.
#[derive(Debug, Clone)]
pub struct CompactBump {
    pub x0: FourVector,
    pub radius: f64,
    pub polarization: CVec,
    /// Gauss-Legendre order per axis of the radial transform rule.
    pub order: usize,
    profile: OnceLock<RadialProfile>,
}

impl CompactBump {
    pub fn new(x0: FourVector, radius: f64, polarization: CVec) -> Self {
        Self::with_order(x0, radius, polarization, 24)
    }

    pub fn with_order(
        x0: FourVector,
        radius: f64,
        polarization: CVec,
        order: usize,
    ) -> Self {
        assert!(radius > 0.0, "radius must be positive");
        assert!(order >= 2, "need at least two quadrature nodes per axis");
        Self { x0, radius, polarization, order, profile: OnceLock::new() }
    }

    fn scalar_at(&self, x: &FourVector) -> C64 {
        let u2 = x.sub(&self.x0).euclidean_sq() / (self.radius * self.radius);
        if u2 >= 1.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new((-1.0 / (1.0 - u2)).exp(), 0.0)
        }
    }

    fn profile(&self) -> &RadialProfile {
        self.profile.get_or_init(|| {
            let r2 = self.radius * self.radius;
            RadialProfile::sample(self.radius, self.order, |rho| {
                let u2 = rho * rho / r2;
                if u2 >= 1.0 { 0.0 } else { (-1.0 / (1.0 - u2)).exp() }
            })
        })
    }

    /// e^{-i<p,x0>} Hhat(|p|_E): the phase shifts the center to the origin,
    /// where the radial profile has a real rotation-invariant transform.
    fn scalar_fourier(&self, p: &FourVector) -> C64 {
        C64::new(0.0, -p.minkowski_dot(&self.x0)).exp() * self.profile().transform(p.euclidean_sq().sqrt())
    }

    /// Transform of the scalar profile at many momenta. The radial factor is
    /// memoized per distinct Euclidean norm, so product grids pay for one
    /// profile integral per radial shell.
    pub fn profile_fourier_batch(&self, ps: &[FourVector]) -> Vec<C64> {
        let profile = self.profile();
        let mut memo: HashMap<u64, f64> = HashMap::new();
        ps.iter()
            .map(|p| {
                let k = p.euclidean_sq().sqrt();
                let radial =
                    *memo.entry(k.to_bits()).or_insert_with(|| profile.transform(k));
                C64::new(0.0, -p.minkowski_dot(&self.x0)).exp() * radial
            })
            .collect()
    }
}

/// Two-axis Gauss-Legendre rule for the transform of a 4D-radial profile:
/// Hhat(k) = 4 pi int_0^R h(rho) rho^3 int_0^pi cos(k rho cos psi) sin^2 psi
/// dpsi drho, real and even in k.
#[derive(Debug, Clone)]
struct RadialProfile {
    rho: Vec<f64>,
    /// h(rho) rho^3 w_rho at the radial nodes.
    rho_weighted: Vec<f64>,
    cos_psi: Vec<f64>,
    /// sin^2(psi) w_psi at the angular nodes.
    psi_weighted: Vec<f64>,
}

impl RadialProfile {
    fn sample(radius: f64, order: usize, h: impl Fn(f64) -> f64) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        let mut rho = Vec::with_capacity(order);
        let mut rho_weighted = Vec::with_capacity(order);
        let mut cos_psi = Vec::with_capacity(order);
        let mut psi_weighted = Vec::with_capacity(order);
        for (t, w) in nodes.iter().zip(&weights) {
            let r = radius * (t + 1.0) / 2.0;
            rho.push(r);
            rho_weighted.push(h(r) * r.powi(3) * w * radius / 2.0);
            let psi = std::f64::consts::PI * (t + 1.0) / 2.0;
            cos_psi.push(psi.cos());
            psi_weighted.push(psi.sin().powi(2) * w * std::f64::consts::PI / 2.0);
        }
        Self { rho, rho_weighted, cos_psi, psi_weighted }
    }

    fn transform(&self, k: f64) -> f64 {
        let mut total = 0.0;
        for (i, &r) in self.rho.iter().enumerate() {
            let kr = k * r;
            let mut inner = 0.0;
            for (j, &c) in self.cos_psi.iter().enumerate() {
                inner += self.psi_weighted[j] * (kr * c).cos();
            }
            total += self.rho_weighted[i] * inner;
        }
        4.0 * std::f64::consts::PI * total
    }
}

/// Lazily transformed function D(conj A) f(Lambda_A^{-1}(x - a)).
#[derive(Debug, Clone)]
pub struct TransformedTestFunction {
    pub base: Box<TestFunction>,
    pub a_matrix: Spin2Matrix,
    pub translation: FourVector,
    pub label: RepLabel,
    fibre_matrix: CMat,
    a_inverse: Spin2Matrix,
}

/// A spacetime test function with an evaluable Fourier transform.
#[derive(Debug, Clone)]
pub enum TestFunction {
    Gaussian(GaussianPacket),
    Bump(CompactBump),
    Transformed(TransformedTestFunction),
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Gaussian(g) => g.polarization.len(),
            TestFunction::Bump(b) => b.polarization.len(),
            TestFunction::Transformed(t) => t.base.dim(),
        }
    }

    /// Pointwise value in position space.
    pub fn evaluate(&self, x: &FourVector) -> CVec {
        match self {
            TestFunction::Gaussian(g) => &g.polarization * g.scalar_at(x),
            TestFunction::Bump(b) => &b.polarization * b.scalar_at(x),
            TestFunction::Transformed(t) => {
                let y = lorentz_action(&t.a_inverse, &x.sub(&t.translation))
                    .expect("unimodularity checked at construction");
                &t.fibre_matrix * t.base.evaluate(&y)
            }
        }
    }

    /// Fourier transform at arbitrary real momentum.
    pub fn fourier(&self, p: &FourVector) -> CVec {
        match self {
            TestFunction::Gaussian(g) => &g.polarization * g.scalar_fourier(p),
            TestFunction::Bump(b) => &b.polarization * b.scalar_fourier(p),
            TestFunction::Transformed(t) => {
                let q = lorentz_action(&t.a_inverse, p)
                    .expect("unimodularity checked at construction");
                let phase = C64::new(0.0, -p.minkowski_dot(&t.translation)).exp();
                (&t.fibre_matrix * t.base.fourier(&q)) * phase
            }
        }
    }

    /// Transforms at many momenta; identical values to [`Self::fourier`]
    /// node by node, but compact bumps contract their quadrature in batch.
    pub fn fourier_batch(&self, ps: &[FourVector]) -> Vec<CVec> {
        match self {
            TestFunction::Gaussian(_) => ps.iter().map(|p| self.fourier(p)).collect(),
            TestFunction::Bump(b) => b
                .profile_fourier_batch(ps)
                .into_iter()
                .map(|s| &b.polarization * s)
                .collect(),
            TestFunction::Transformed(t) => {
                let qs: Vec<FourVector> = ps
                    .iter()
                    .map(|p| {
                        lorentz_action(&t.a_inverse, p)
                            .expect("unimodularity checked at construction")
                    })
                    .collect();
                let base = t.base.fourier_batch(&qs);
                ps.iter()
                    .zip(base)
                    .map(|(p, v)| {
                        let phase = C64::new(0.0, -p.minkowski_dot(&t.translation)).exp();
                        (&t.fibre_matrix * v) * phase
                    })
                    .collect()
            }
        }
    }

    /// Search region (center, half-widths) containing the essential support
    /// of the Fourier transform, for sup-norm searches.
    fn fourier_search_box(&self) -> (FourVector, [f64; 4]) {
        match self {
            TestFunction::Gaussian(g) => {
                let half = 12.0 / g.width + 2.0;
                (g.k0, [half; 4])
            }
            TestFunction::Bump(b) => {
                let half = 30.0 / b.radius;
                (FourVector::zero(), [half; 4])
            }
            TestFunction::Transformed(t) => {
                let (c, h) = t.base.fourier_search_box();
                map_box(&t.a_matrix, &c, &h)
            }
        }
    }
}

/// Axis-aligned bounding box of the Lorentz image of a box.
fn map_box(a: &Spin2Matrix, center: &FourVector, half: &[f64; 4]) -> (FourVector, [f64; 4]) {
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for corner in 0..16 {
        let mut c = center.components();
        for (axis, half_width) in half.iter().enumerate() {
            let sign = if corner >> axis & 1 == 1 { 1.0 } else { -1.0 };
            c[axis] += sign * half_width;
        }
        let image = lorentz_action(a, &FourVector::from_components(c))
            .expect("unimodularity checked at construction");
        for (axis, value) in image.components().iter().enumerate() {
            lo[axis] = lo[axis].min(*value);
            hi[axis] = hi[axis].max(*value);
        }
    }
    let center = FourVector::from_components(std::array::from_fn(|i| 0.5 * (lo[i] + hi[i])));
    (center, std::array::from_fn(|i| 0.5 * (hi[i] - lo[i])))
}

/// Covariant action (T(g) f)(x) = D(conj A) f(Lambda_A^{-1}(x-a)), as a lazy
/// wrapper. The fibre factor is D^{(j,k)} evaluated at conj(A), so the label
/// (0,1) reproduces plain conj(A) on a two-dimensional fibre.
pub fn covariant_transform(
    a_matrix: &Spin2Matrix,
    translation: &FourVector,
    f: &TestFunction,
    label: RepLabel,
) -> TestFunction {
    assert!(
        unimodular_defect(a_matrix) <= 1e-12,
        "transform requires a unimodular matrix"
    );
    assert_eq!(label.dim(), f.dim(), "rep label must match the fibre dimension");
    let fibre_matrix = rep_apply(label, &conj2(a_matrix));
    TestFunction::Transformed(TransformedTestFunction {
        base: Box::new(f.clone()),
        a_matrix: *a_matrix,
        translation: *translation,
        label,
        fibre_matrix,
        a_inverse: crate::little_group::sl2_inverse(a_matrix),
    })
}

/// Cached tensor-product Gauss-Legendre rule over an axis-aligned box,
/// supporting O(n^4) Fourier evaluation per momentum via axiswise phase
/// contraction instead of a fresh 4D sum of exponentials.
#[derive(Debug, Clone)]
pub struct TensorQuadrature {
    center: FourVector,
    half: [f64; 4],
    order: usize,
    nodes: Vec<f64>,
    /// Weighted samples (product GL weight times Jacobian times value),
    /// axis-0 major.
    weighted_values: Vec<C64>,
    /// Real and imaginary parts of the samples as (order^3, order) matrices,
    /// built on first batched transform.
    split: OnceLock<(DMatrix<f64>, DMatrix<f64>)>,
}

impl TensorQuadrature {
    /// Sample w(x) f(x) on the tensor grid of the box.
    pub fn sample<F>(center: FourVector, half: [f64; 4], order: usize, f: F) -> Self
    where
        F: Fn(&FourVector) -> C64 + Sync,
    {
        let (nodes, weights) = gauss_legendre(order);
        let n = order;
        let weighted_values: Vec<C64> = (0..n * n * n * n)
            .into_par_iter()
            .map(|idx| {
                let il = [idx / (n * n * n), idx / (n * n) % n, idx / n % n, idx % n];
                let x = FourVector::from_components(std::array::from_fn(|axis| {
                    center.components()[axis] + half[axis] * nodes[il[axis]]
                }));
                let w: f64 = (0..4).map(|axis| weights[il[axis]] * half[axis]).product();
                f(&x) * w
            })
            .collect();
        Self { center, half, order, nodes, weighted_values, split: OnceLock::new() }
    }

    /// int e^{-i<p,x>} f(x) d^4x over the box.
    pub fn fourier(&self, p: &FourVector) -> C64 {
        let n = self.order;
        let pc = p.components();
        let tables: [Vec<C64>; 4] = std::array::from_fn(|axis| {
            (0..n)
                .map(|m| {
                    let x = self.center.components()[axis] + self.half[axis] * self.nodes[m];
                    C64::new(0.0, -MINK_SIGNS[axis] * pc[axis] * x).exp()
                })
                .collect()
        });
        // Contract the innermost axis first, then fold outward.
        let mut g3 = vec![C64::new(0.0, 0.0); n * n * n];
        for (block, out) in g3.iter_mut().enumerate() {
            let base = block * n;
            let mut acc = C64::new(0.0, 0.0);
            for (l, phase) in tables[3].iter().enumerate() {
                acc += phase * self.weighted_values[base + l];
            }
            *out = acc;
        }
        let mut g2 = vec![C64::new(0.0, 0.0); n * n];
        for (block, out) in g2.iter_mut().enumerate() {
            let base = block * n;
            let mut acc = C64::new(0.0, 0.0);
            for (k, phase) in tables[2].iter().enumerate() {
                acc += phase * g3[base + k];
            }
            *out = acc;
        }
        let mut g1 = vec![C64::new(0.0, 0.0); n];
        for (block, out) in g1.iter_mut().enumerate() {
            let base = block * n;
            let mut acc = C64::new(0.0, 0.0);
            for (j, phase) in tables[1].iter().enumerate() {
                acc += phase * g2[base + j];
            }
            *out = acc;
        }
        let mut acc = C64::new(0.0, 0.0);
        for (i, phase) in tables[0].iter().enumerate() {
            acc += phase * g1[i];
        }
        acc
    }

    /// Plain integral of f over the box.
    pub fn integral(&self) -> C64 {
        self.fourier(&FourVector::zero())
    }

    /// Phase table for one axis at momentum component pc.
    fn phase_table(&self, axis: usize, pc: f64) -> Vec<C64> {
        (0..self.order)
            .map(|m| {
                let x = self.center.components()[axis] + self.half[axis] * self.nodes[m];
                C64::new(0.0, -MINK_SIGNS[axis] * pc * x).exp()
            })
            .collect()
    }

    fn split_values(&self) -> &(DMatrix<f64>, DMatrix<f64>) {
        self.split.get_or_init(|| {
            let n = self.order;
            let rows = n * n * n;
            let re = DMatrix::from_fn(rows, n, |r, c| self.weighted_values[r * n + c].re);
            let im = DMatrix::from_fn(rows, n, |r, c| self.weighted_values[r * n + c].im);
            (re, im)
        })
    }

    /// Same values as [`Self::fourier`] at many momenta. The dominant
    /// innermost-axis contraction is lifted to four real matrix products over
    /// momentum chunks so it runs through the blocked multiplier; the three
    /// outer axes are folded per momentum as usual.
    pub fn fourier_batch(&self, ps: &[FourVector]) -> Vec<C64> {
        let n = self.order;
        let (vr, vi) = self.split_values();
        let mut out = Vec::with_capacity(ps.len());
        for chunk in ps.chunks(128) {
            let m = chunk.len();
            let mut tr = DMatrix::<f64>::zeros(n, m);
            let mut ti = DMatrix::<f64>::zeros(n, m);
            for (col, p) in chunk.iter().enumerate() {
                for (l, phase) in self.phase_table(3, p.components()[3]).iter().enumerate() {
                    tr[(l, col)] = phase.re;
                    ti[(l, col)] = phase.im;
                }
            }
            let g3r = vr * &tr - vi * &ti;
            let g3i = vr * &ti + vi * &tr;
            for (col, p) in chunk.iter().enumerate() {
                out.push(self.fold_outer_axes(p, g3r.column(col), g3i.column(col)));
            }
        }
        out
    }

    /// Fold axes 2, 1, 0 of a precontracted innermost axis.
    fn fold_outer_axes(
        &self,
        p: &FourVector,
        g3r: nalgebra::DVectorView<f64>,
        g3i: nalgebra::DVectorView<f64>,
    ) -> C64 {
        let n = self.order;
        let pc = p.components();
        let t2 = self.phase_table(2, pc[2]);
        let t1 = self.phase_table(1, pc[1]);
        let t0 = self.phase_table(0, pc[0]);
        let mut g2 = vec![C64::new(0.0, 0.0); n * n];
        for (block, out) in g2.iter_mut().enumerate() {
            let base = block * n;
            let mut acc = C64::new(0.0, 0.0);
            for (k, phase) in t2.iter().enumerate() {
                acc += phase * C64::new(g3r[base + k], g3i[base + k]);
            }
            *out = acc;
        }
        let mut g1 = vec![C64::new(0.0, 0.0); n];
        for (block, out) in g1.iter_mut().enumerate() {
            let base = block * n;
            let mut acc = C64::new(0.0, 0.0);
            for (j, phase) in t1.iter().enumerate() {
                acc += phase * g2[base + j];
            }
            *out = acc;
        }
        let mut acc = C64::new(0.0, 0.0);
        for (i, phase) in t0.iter().enumerate() {
            acc += phase * g1[i];
        }
        acc
    }
}

/// Schwartz-type seminorm sup_p (1 + |p|_E^2)^2 max_C |f_hat^C(p)|,
/// approximated on a deterministic search lattice with local pattern
/// refinement. Only the weight order (4, 0) is supported.
pub fn schwartz_seminorm(f: &TestFunction, order: (u32, u32)) -> f64 {
    schwartz_seminorm_with_lattice(f, order, 18)
}

/// Same, with the lattice resolution per axis exposed (18^4 is about 10^5
/// points, the default search budget).
pub fn schwartz_seminorm_with_lattice(
    f: &TestFunction,
    order: (u32, u32),
    per_axis: usize,
) -> f64 {
    assert_eq!(order, (4, 0), "only the (4,0) seminorm is implemented");
    let (center, half) = f.fourier_search_box();
    let value = |p: &FourVector| {
        let weight = (1.0 + p.euclidean_sq()).powi(2);
        weight * f.fourier(p).camax()
    };
    let n = per_axis;
    let scored: Vec<(f64, FourVector)> = (0..n * n * n * n)
        .into_par_iter()
        .map(|idx| {
            let il = [idx / (n * n * n), idx / (n * n) % n, idx / n % n, idx % n];
            let p = FourVector::from_components(std::array::from_fn(|axis| {
                let t = -1.0 + 2.0 * (il[axis] as f64 + 0.5) / n as f64;
                center.components()[axis] + half[axis] * t
            }));
            (value(&p), p)
        })
        .collect();
    let (mut best, mut at) = scored
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty lattice");
    // Pattern refinement: shrink a 3^4 stencil around the incumbent.
    let mut step: [f64; 4] = std::array::from_fn(|axis| 2.0 * half[axis] / n as f64);
    for _ in 0..24 {
        let mut improved = false;
        for idx in 0..81 {
            let il = [idx / 27 % 3, idx / 9 % 3, idx / 3 % 3, idx % 3];
            let p = FourVector::from_components(std::array::from_fn(|axis| {
                at.components()[axis] + (il[axis] as f64 - 1.0) * step[axis]
            }));
            let v = value(&p);
            if v > best {
                best = v;
                at = p;
                improved = true;
            }
        }
        if !improved {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }
    best
}

/// Conservative sufficient condition for spacelike separation of the
/// supports: the spatial gap between the balls exceeds their maximal
/// temporal spread, so every difference x - y with x in B(x0,r), y in
/// B(y0,s) is spacelike.
pub fn spacelike_separated(f: &CompactBump, k: &CompactBump) -> bool {
    let d = f.x0.sub(&k.x0);
    let pad = f.radius + k.radius;
    d.spatial_norm() - pad > d.p0.abs() + pad
}

/// Named collection of test functions, serializable to a key-value text
/// catalog for reproducible suites.
pub struct Catalog {
    pub entries: Vec<(String, TestFunction)>,
}

impl Catalog {
    /// Render to the catalog text format. Only base functions (Gaussians and
    /// bumps) are representable; transforms are built at run time.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, f) in &self.entries {
            let _ = writeln!(out, "[{name}]");
            match f {
                TestFunction::Gaussian(g) => {
                    let _ = writeln!(out, "type = gaussian");
                    let _ = writeln!(out, "x0 = {}", join_four(&g.x0));
                    let _ = writeln!(out, "width = {:.17e}", g.width);
                    let _ = writeln!(out, "k0 = {}", join_four(&g.k0));
                    let _ = writeln!(out, "v = {}", join_fibre(&g.polarization));
                }
                TestFunction::Bump(b) => {
                    let _ = writeln!(out, "type = bump");
                    let _ = writeln!(out, "x0 = {}", join_four(&b.x0));
                    let _ = writeln!(out, "radius = {:.17e}", b.radius);
                    let _ = writeln!(out, "order = {}", b.order);
                    let _ = writeln!(out, "v = {}", join_fibre(&b.polarization));
                }
                TestFunction::Transformed(_) => {
                    panic!("transformed functions are not catalog entries")
                }
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, TestFunctionError> {
        let mut entries = Vec::new();
        let mut name: Option<String> = None;
        let mut fields: Vec<(String, String)> = Vec::new();
        let flush = |name: &mut Option<String>,
                         fields: &mut Vec<(String, String)>,
                         entries: &mut Vec<(String, TestFunction)>|
         -> Result<(), TestFunctionError> {
            if let Some(n) = name.take() {
                entries.push((n, parse_entry(fields)?));
            }
            fields.clear();
            Ok(())
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(section) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                flush(&mut name, &mut fields, &mut entries)?;
                name = Some(section.to_string());
            } else if let Some((key, value)) = line.split_once('=') {
                fields.push((key.trim().to_string(), value.trim().to_string()));
            } else {
                return Err(TestFunctionError::Catalog(format!("unparseable line: {line}")));
            }
        }
        flush(&mut name, &mut fields, &mut entries)?;
        Ok(Self { entries })
    }
}

fn join_four(p: &FourVector) -> String {
    let c = p.components();
    format!("{:.17e} {:.17e} {:.17e} {:.17e}", c[0], c[1], c[2], c[3])
}

fn join_fibre(v: &CVec) -> String {
    v.iter()
        .map(|z| format!("{:.17e},{:.17e}", z.re, z.im))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_entry(fields: &[(String, String)]) -> Result<TestFunction, TestFunctionError> {
    let get = |key: &str| -> Result<&str, TestFunctionError> {
        fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| TestFunctionError::Catalog(format!("missing key {key}")))
    };
    let four = |key: &str| -> Result<FourVector, TestFunctionError> {
        let parts: Vec<f64> = get(key)?
            .split_whitespace()
            .map(|s| s.parse().map_err(|e| TestFunctionError::Catalog(format!("{key}: {e}"))))
            .collect::<Result<_, _>>()?;
        if parts.len() != 4 {
            return Err(TestFunctionError::Catalog(format!("{key}: need 4 components")));
        }
        Ok(FourVector::from_components([parts[0], parts[1], parts[2], parts[3]]))
    };
    let scalar = |key: &str| -> Result<f64, TestFunctionError> {
        get(key)?
            .parse()
            .map_err(|e| TestFunctionError::Catalog(format!("{key}: {e}")))
    };
    let fibre = |key: &str| -> Result<CVec, TestFunctionError> {
        let parts: Vec<C64> = get(key)?
            .split_whitespace()
            .map(|pair| {
                let (re, im) = pair
                    .split_once(',')
                    .ok_or_else(|| TestFunctionError::Catalog(format!("{key}: bad pair")))?;
                Ok(C64::new(
                    re.parse()
                        .map_err(|e| TestFunctionError::Catalog(format!("{key}: {e}")))?,
                    im.parse()
                        .map_err(|e| TestFunctionError::Catalog(format!("{key}: {e}")))?,
                ))
            })
            .collect::<Result<_, TestFunctionError>>()?;
        if parts.is_empty() {
            return Err(TestFunctionError::Catalog(format!("{key}: empty fibre")));
        }
        Ok(CVec::from_iterator(parts.len(), parts.into_iter()))
    };
    match get("type")? {
        "gaussian" => Ok(TestFunction::Gaussian(GaussianPacket::new(
            four("x0")?,
            scalar("width")?,
            four("k0")?,
            fibre("v")?,
        ))),
        "bump" => {
            let order = get("order")?.parse().map_err(|e| {
                TestFunctionError::Catalog(format!("order: {e}"))
            })?;
            Ok(TestFunction::Bump(CompactBump::with_order(
                four("x0")?,
                scalar("radius")?,
                fibre("v")?,
                order,
            )))
        }
        other => Err(TestFunctionError::Catalog(format!("unknown type {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fibre(parts: &[(f64, f64)]) -> CVec {
        CVec::from_iterator(parts.len(), parts.iter().map(|&(re, im)| c(re, im)))
    }

    fn sample_packet() -> GaussianPacket {
        GaussianPacket::new(
            FourVector::new(0.3, -0.2, 0.5, 0.1),
            0.8,
            FourVector::new(1.1, 0.4, -0.6, 0.2),
            fibre(&[(1.0, 0.2), (-0.3, 0.5)]),
        )
    }

    #[test]
    fn bump_radial_transform_matches_tensor_quadrature_oracle() {
        // The order-128 radial rule is self-converged (order 64 already sits
        // at machine precision for k up to 40); the 4D tensor rule is an
        // independent instrument that agrees at its own, slower-converging
        // accuracy.
        let x0 = FourVector::new(0.4, -0.3, 0.2, 0.6);
        let truth_bump = CompactBump::with_order(x0, 0.9, fibre(&[(1.0, 0.0)]), 128);
        let converged = TestFunction::Bump(CompactBump::with_order(x0, 0.9, fibre(&[(1.0, 0.0)]), 64));
        let truth = TestFunction::Bump(truth_bump.clone());
        let oracle =
            TensorQuadrature::sample(x0, [truth_bump.radius; 4], 64, |x| truth_bump.scalar_at(x));
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let scale = truth.fourier(&FourVector::zero())[0].norm();
        for i in 0..40 {
            // Mix grid-like cone momenta with arbitrary off-cone ones.
            let p = if i % 2 == 0 {
                sampling::cone_point(&mut rng, (0.1, 6.0), 1e-3)
            } else {
                FourVector::new(
                    rng.random_range(-6.0..6.0),
                    rng.random_range(-4.0..4.0),
                    rng.random_range(-4.0..4.0),
                    rng.random_range(-4.0..4.0),
                )
            };
            let want = truth.fourier(&p)[0];
            let self_defect = (converged.fourier(&p)[0] - want).norm();
            let cross_defect = (oracle.fourier(&p) - want).norm();
            assert!(
                self_defect <= 1e-13 * scale,
                "radial self-convergence defect {:.3e} at k {:.3}",
                self_defect / scale,
                p.euclidean_sq().sqrt()
            );
            assert!(
                cross_defect <= 5e-9 * scale,
                "tensor-rule cross-check defect {:.3e} at k {:.3}",
                cross_defect / scale,
                p.euclidean_sq().sqrt()
            );
        }
        // The zero-momentum value is the plain volume integral.
        let zero_defect = (truth.fourier(&FourVector::zero())[0] - oracle.integral()).norm();
        assert!(
            zero_defect <= 5e-9 * scale,
            "volume integral defect {:.3e} (radial {:.12e}, tensor {:.12e})",
            zero_defect / scale,
            truth.fourier(&FourVector::zero())[0].re,
            oracle.integral().re
        );
    }

    /// 1D oracle: int e^{-i omega x} e^{-(x-c)^2/(2 w^2)} dx by plain
    /// quadrature on [c - 12w, c + 12w].
    fn gauss_axis_oracle(omega: f64, center: f64, width: f64) -> C64 {
        let (nodes, weights) = gauss_legendre(400);
        let mut acc = c(0.0, 0.0);
        for (x, w) in nodes.iter().zip(&weights) {
            let t = center + 12.0 * width * x;
            let value =
                c(0.0, -omega * t).exp() * (-(t - center).powi(2) / (2.0 * width * width)).exp();
            acc += value * (w * 12.0 * width);
        }
        acc
    }

    #[test]
    fn gaussian_closed_form_matches_axiswise_quadrature_oracle() {
        let packet = sample_packet();
        let f = TestFunction::Gaussian(packet.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let p = FourVector::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            // Separable product of 1D transforms; axis u carries frequency
            // eta_u (p_u - k0_u) once the modulation is folded in.
            let mut oracle = c(1.0, 0.0);
            for axis in 0..4 {
                let omega =
                    MINK_SIGNS[axis] * (p.components()[axis] - packet.k0.components()[axis]);
                oracle *= gauss_axis_oracle(omega, packet.x0.components()[axis], packet.width);
            }
            let expected = &packet.polarization * oracle;
            let got = f.fourier(&p);
            let defect = (&got - &expected).camax() / expected.camax();
            assert!(defect <= 1e-10, "closed-form defect {defect:.3e}");
        }
    }

    #[test]
    fn batched_transform_matches_pointwise_evaluation() {
        let bump = CompactBump::with_order(
            FourVector::new(0.3, -0.2, 0.1, 0.4),
            0.8,
            CVec::from_vec(vec![c(1.0, 0.5), c(-0.3, 0.2)]),
            12,
        );
        let f = covariant_transform(
            &Spin2Matrix::new(c(1.1, 0.0), c(0.2, 0.1), c(0.0, 0.0), c(1.0 / 1.1, 0.0)),
            &FourVector::new(0.4, 0.0, -0.3, 0.2),
            &TestFunction::Bump(bump),
            RepLabel { j: 1, k: 0 },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // 200 momenta exercise several 128-wide chunks.
        let ps: Vec<FourVector> = (0..200)
            .map(|_| {
                FourVector::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                )
            })
            .collect();
        let batch = f.fourier_batch(&ps);
        let scale: f64 = batch.iter().map(|v| v.camax()).fold(0.0, f64::max);
        for (p, got) in ps.iter().zip(&batch) {
            let defect = (got - f.fourier(p)).camax();
            assert!(defect <= 1e-13 * scale, "batch defect {defect:.3e}");
        }
    }

    #[test]
    fn gaussian_satisfies_parseval_against_closed_form() {
        let packet = sample_packet();
        let w = packet.width;
        // Half-width 6.5 w keeps the truncated |f|^2 tail below 1e-18 while
        // GL-48 resolves the Gaussian with margin to spare.
        let quad = TensorQuadrature::sample(packet.x0, [6.5 * w; 4], 48, |x| {
            let v = packet.scalar_at(x);
            c(v.norm_sqr(), 0.0)
        });
        let numeric = quad.integral().re * packet.polarization.norm_squared();
        let exact = std::f64::consts::PI.powi(2) * w.powi(4) * packet.polarization.norm_squared();
        let rel = (numeric - exact).abs() / exact;
        assert!(rel <= 1e-9, "Parseval defect {rel:.3e}");
    }

    #[test]
    fn bump_support_is_exactly_the_closed_ball() {
        let bump = CompactBump::new(
            FourVector::new(0.5, -0.3, 0.2, 0.0),
            1.2,
            fibre(&[(1.0, 0.0)]),
        );
        let f = TestFunction::Bump(bump.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..500 {
            let dir: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-9);
            let inside = FourVector::from_components(std::array::from_fn(|i| {
                bump.x0.components()[i] + 0.999 * bump.radius * dir[i] / norm
            }));
            let outside = FourVector::from_components(std::array::from_fn(|i| {
                bump.x0.components()[i] + 1.001 * bump.radius * dir[i] / norm
            }));
            assert!(f.evaluate(&inside).camax() > 0.0);
            assert_eq!(f.evaluate(&outside).camax(), 0.0);
        }
    }

    #[test]
    fn bump_zero_mode_matches_radial_oracle() {
        // The profile is smooth but not analytic at the boundary sphere, so
        // the tensor rule converges like order^-8 rather than geometrically:
        // measured defects 5.1e-6 at order 24 and 8.7e-8 at order 40.
        let bump =
            CompactBump::with_order(FourVector::zero(), 0.9, fibre(&[(2.0, 0.0)]), 56);
        let f = TestFunction::Bump(bump.clone());
        // int_{B(0,rho)} profile = rho^4 * 2 pi^2 int_0^1 r^3 e^{-1/(1-r^2)} dr.
        let (nodes, weights) = gauss_legendre(400);
        let radial: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| {
                let r = 0.5 * (x + 1.0);
                let density = if r < 1.0 { (-1.0 / (1.0 - r * r)).exp() } else { 0.0 };
                0.5 * w * r.powi(3) * density
            })
            .sum();
        let exact = bump.radius.powi(4) * 2.0 * std::f64::consts::PI.powi(2) * radial;
        let got = f.fourier(&FourVector::zero());
        let rel = (got[0].re - 2.0 * exact).abs() / (2.0 * exact);
        assert!(got[0].im.abs() <= 1e-14 * exact);
        assert!(rel <= 3e-8, "zero-mode defect {rel:.3e}");

        // Default order: good to about 1e-5, which downstream tolerances
        // must respect when they integrate bump transforms.
        let default_bump =
            TestFunction::Bump(CompactBump::new(FourVector::zero(), 0.9, fibre(&[(2.0, 0.0)])));
        let rel_default =
            (default_bump.fourier(&FourVector::zero())[0].re - 2.0 * exact).abs() / (2.0 * exact);
        assert!(rel_default <= 1e-5, "default-order defect {rel_default:.3e}");
    }

    #[test]
    fn identity_transform_changes_nothing() {
        let f = TestFunction::Gaussian(sample_packet());
        let g = covariant_transform(
            &Spin2Matrix::identity(),
            &FourVector::zero(),
            &f,
            RepLabel { j: 0, k: 1 },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..50 {
            let x = sampling::translation(&mut rng, 2.0);
            assert!((g.evaluate(&x) - f.evaluate(&x)).camax() <= 1e-14);
            assert!((g.fourier(&x) - f.fourier(&x)).camax() <= 1e-12);
        }
    }

    #[test]
    fn pure_translation_preserves_fourier_magnitude() {
        let f = TestFunction::Gaussian(sample_packet());
        let a = FourVector::new(0.7, -0.4, 0.2, 1.1);
        let g = covariant_transform(&Spin2Matrix::identity(), &a, &f, RepLabel { j: 0, k: 1 });
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..100 {
            let p = sampling::translation(&mut rng, 3.0);
            let lhs = g.fourier(&p).norm();
            let rhs = f.fourier(&p).norm();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-12));
        }
    }

    #[test]
    fn transformed_bump_support_is_the_mapped_ball() {
        let bump = CompactBump::new(
            FourVector::new(0.2, 0.1, -0.3, 0.4),
            0.8,
            fibre(&[(1.0, 0.5), (0.0, 1.0)]),
        );
        let f = TestFunction::Bump(bump.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let a = sampling::sl2_bounded(&mut rng, 0.7);
        let shift = FourVector::new(0.3, -0.2, 0.5, 0.1);
        let g = covariant_transform(&a, &shift, &f, RepLabel { j: 0, k: 1 });
        for _ in 0..1000 {
            let dir: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-9);
            let boundary = |scale: f64| {
                let x = FourVector::from_components(std::array::from_fn(|i| {
                    bump.x0.components()[i] + scale * bump.radius * dir[i] / norm
                }));
                lorentz_action(&a, &x).unwrap().add(&shift)
            };
            assert!(g.evaluate(&boundary(0.99)).camax() > 0.0);
            assert_eq!(g.evaluate(&boundary(1.01)).camax(), 0.0);
        }
    }

    #[test]
    fn transformed_fourier_matches_direct_numeric_transform() {
        // Both routes must be resolved well past the 1e-6 agreement bound:
        // order 40 on the unit ball, order 48 on the tightest axis-aligned
        // box around the Lorentz image of the ball (half-width = radius
        // times the row norm of the Lorentz matrix), so node densities stay
        // comparable.
        let bump = CompactBump::with_order(
            FourVector::new(0.0, 0.2, -0.1, 0.3),
            1.0,
            fibre(&[(1.0, -0.4)]),
            40,
        );
        let f = TestFunction::Bump(bump.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let a = sampling::sl2_bounded(&mut rng, 0.3);
        let shift = FourVector::new(0.4, -0.1, 0.2, -0.3);
        let g = covariant_transform(&a, &shift, &f, RepLabel { j: 0, k: 0 });

        // Direct route: sample the transformed position-space function over
        // the bounding box of its support and transform numerically.
        let columns: Vec<[f64; 4]> = (0..4)
            .map(|j| {
                let e = FourVector::from_components(std::array::from_fn(|i| {
                    if i == j {
                        1.0
                    } else {
                        0.0
                    }
                }));
                lorentz_action(&a, &e).unwrap().components()
            })
            .collect();
        let half: [f64; 4] = std::array::from_fn(|i| {
            let row_norm: f64 = (0..4).map(|j| columns[j][i] * columns[j][i]).sum::<f64>().sqrt();
            bump.radius * row_norm + 1e-9
        });
        let center = lorentz_action(&a, &bump.x0).unwrap().add(&shift);
        let direct = TensorQuadrature::sample(center, half, 48, |x| g.evaluate(x)[0]);

        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for _ in 0..100 {
            let p = sampling::translation(&mut rng, 1.2);
            let lhs = g.fourier(&p)[0];
            let rhs = direct.fourier(&p);
            worst = worst.max((lhs - rhs).norm());
            scale = scale.max(lhs.norm());
        }
        assert!(worst <= 1e-6 * scale, "relative defect {:.3e}", worst / scale);
    }

    #[test]
    fn seminorm_vanishes_on_zero_and_scales_linearly() {
        let zero = TestFunction::Gaussian(GaussianPacket::new(
            FourVector::zero(),
            1.0,
            FourVector::zero(),
            fibre(&[(0.0, 0.0)]),
        ));
        assert_eq!(schwartz_seminorm(&zero, (4, 0)), 0.0);

        let packet = sample_packet();
        let mut doubled = packet.clone();
        doubled.polarization *= c(2.0, 0.0);
        let s1 = schwartz_seminorm(&TestFunction::Gaussian(packet), (4, 0));
        let s2 = schwartz_seminorm(&TestFunction::Gaussian(doubled), (4, 0));
        assert!(s1 > 0.0);
        assert!((s2 - 2.0 * s1).abs() <= 1e-12 * s1, "homogeneity defect");
    }

    #[test]
    fn seminorm_is_stable_under_lattice_doubling() {
        let f = TestFunction::Gaussian(sample_packet());
        let coarse = schwartz_seminorm_with_lattice(&f, (4, 0), 18);
        let fine = schwartz_seminorm_with_lattice(&f, (4, 0), 36);
        let rel = (fine - coarse).abs() / fine;
        assert!(rel <= 1e-3, "lattice sensitivity {rel:.3e}");
    }

    #[test]
    fn spacelike_separation_matches_worked_examples() {
        let ball = |t: f64, x: f64| {
            CompactBump::new(FourVector::new(t, x, 0.0, 0.0), 0.5, fibre(&[(1.0, 0.0)]))
        };
        assert!(spacelike_separated(&ball(0.0, 2.0), &ball(0.0, -2.0)));
        let same = ball(0.0, 2.0);
        assert!(!spacelike_separated(&same, &same.clone()));
        assert!(!spacelike_separated(&ball(0.0, 0.0), &ball(3.0, 0.0)));
    }

    #[test]
    fn catalog_round_trips_parameters() {
        let catalog = Catalog {
            entries: vec![
                (
                    "packet_a".to_string(),
                    TestFunction::Gaussian(sample_packet()),
                ),
                (
                    "bump_b".to_string(),
                    TestFunction::Bump(CompactBump::with_order(
                        FourVector::new(0.1, 0.2, 0.3, 0.4),
                        0.7,
                        fibre(&[(1.0, -0.5), (0.2, 0.0)]),
                        20,
                    )),
                ),
            ],
        };
        let text = catalog.to_text();
        let parsed = Catalog::parse(&text).unwrap();
        assert_eq!(parsed.entries.len(), 2);
        assert_eq!(parsed.entries[0].0, "packet_a");
        let x = FourVector::new(0.4, -0.7, 0.2, 0.9);
        for (original, round_tripped) in catalog.entries.iter().zip(&parsed.entries) {
            assert!(
                (original.1.evaluate(&x) - round_tripped.1.evaluate(&x)).camax() <= 1e-15
            );
        }
        assert!(Catalog::parse("not a section").is_err());
        assert!(Catalog::parse("[x]\ntype = unknown\n").is_err());
    }
}
