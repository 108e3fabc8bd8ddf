//! Named verification suites behind the `mnl` CLI.
//!
//! Each suite walks a fixed list of checks over the library's documented
//! invariants: a check draws its samples from a seeded generator, measures a
//! defect, and records it against a tolerance scaled by the configured
//! factor. Identical configurations produce bit-identical measured values
//! (fixed sample order, fixed reductions); only the runtime fields vary.
//! Reports serialize to JSON or CSV with a stable field order, and the
//! process exit code of the CLI is zero exactly when every check passes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{
    block_wave_defect, canonical_rep_apply, continuity_check, embed, embed_from_fourier,
    intertwining_defect, iso_to_scalar, net_pairing, pauli_jordan_regulated, phi_af,
    potential_lift, vector_potential_pairings, BlockSign, ScalarData,
};
use crate::fock::{
    block_projection, covariance_matrix_elements, field_operator, ladder, orthonormalize,
    spectral_positivity, two_point, FockSpace, LadderKind, Statistics,
};
use crate::little_group::{
    massive_section, massive_wigner_element, massless_section, section_boundary_sensitivity,
    sl2_inverse, wigner_element, wigner_phase_closed_form, ChartGuard,
};
use crate::momentum_grid::{
    build_grid, grid_norm, inner_product, ConeFunction, ConeGrid, GridKind, InnerProductKind,
};
use crate::sampling;
use crate::spinor_algebra::{
    lorentz_action, matrix_to_momentum, momentum_to_matrix, rep_apply, to_dmat, unimodular_defect,
    FourVector, RepLabel, Spin2Matrix,
};
use crate::test_functions::{CompactBump, GaussianPacket, TestFunction};
use crate::wave_equations::{
    gamma_matrix, momentum_projection, projection_for, rwe_residual, EquationId, FibreRep,
};
use crate::{max_abs, C64, CMat, CVec};

/// Errors from suite configuration and report emission.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("malformed grid spec `{0}`; expected NRxNTHETAxNPHI, e.g. 48x32x64")]
    BadGrid(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unknown report format `{0}`; expected json or csv")]
    UnknownFormat(String),
    #[error("a report needs at least one record")]
    EmptyReport,
    #[error("config file line {line}: {message}")]
    ConfigFile { line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("report does not parse: {0}")]
    BadReport(String),
    #[error("check {check}: {message}")]
    Check { check: String, message: String },
}

/// The named check suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteId {
    Spinor,
    Sections,
    WaveEq,
    Massive,
    Weyl,
    Maxwell,
    VectorPotential,
    Fock,
    All,
}

impl SuiteId {
    pub const ALL_IDS: [SuiteId; 9] = [
        SuiteId::Spinor,
        SuiteId::Sections,
        SuiteId::WaveEq,
        SuiteId::Massive,
        SuiteId::Weyl,
        SuiteId::Maxwell,
        SuiteId::VectorPotential,
        SuiteId::Fock,
        SuiteId::All,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SuiteId::Spinor => "spinor",
            SuiteId::Sections => "sections",
            SuiteId::WaveEq => "wave-eq",
            SuiteId::Massive => "massive",
            SuiteId::Weyl => "weyl",
            SuiteId::Maxwell => "maxwell",
            SuiteId::VectorPotential => "vector-potential",
            SuiteId::Fock => "fock",
            SuiteId::All => "all",
        }
    }
}

impl FromStr for SuiteId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        SuiteId::ALL_IDS
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| HarnessError::UnknownSuite(s.to_string()))
    }
}

impl fmt::Display for SuiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Full configuration of a suite run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: SuiteId,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub r_max: f64,
    pub seed: u64,
    pub tol_scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: SuiteId::All,
            n_r: 48,
            n_theta: 32,
            n_phi: 64,
            r_max: 20.0,
            seed: 7,
            tol_scale: 1.0,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if !(self.tol_scale > 0.0) {
            return Err(HarnessError::InvalidConfig(format!(
                "tol_scale must be positive, got {}",
                self.tol_scale
            )));
        }
        if self.n_r < 2 || self.n_theta < 2 || self.n_phi < 2 {
            return Err(HarnessError::InvalidConfig(
                "grid needs at least two nodes per axis".into(),
            ));
        }
        if !(self.r_max > 0.0) {
            return Err(HarnessError::InvalidConfig(format!(
                "r_max must be positive, got {}",
                self.r_max
            )));
        }
        Ok(())
    }

    pub fn grid_label(&self) -> String {
        format!("{}x{}x{}@r{}", self.n_r, self.n_theta, self.n_phi, self.r_max)
    }

    fn build_grid(&self) -> ConeGrid {
        build_grid(
            GridKind::Cone,
            self.n_r,
            self.n_theta,
            self.n_phi,
            self.r_max,
            self.seed,
        )
    }

    /// Seeded generator for one check; distinct salts decouple the checks.
    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// "NRxNTHETAxNPHI" -> (n_r, n_theta, n_phi).
pub fn parse_grid_spec(spec: &str) -> Result<(usize, usize, usize), HarnessError> {
    let parts: Vec<&str> = spec.split('x').collect();
    if parts.len() != 3 {
        return Err(HarnessError::BadGrid(spec.to_string()));
    }
    let mut dims = [0usize; 3];
    for (slot, part) in dims.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| HarnessError::BadGrid(spec.to_string()))?;
    }
    Ok((dims[0], dims[1], dims[2]))
}

/// Direction of a check's comparison against its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass when measured <= tolerance (a defect bound).
    AtMost,
    /// Pass when measured >= tolerance (a visibility bound).
    AtLeast,
}

/// One executed check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    /// The identity or bound being measured, in words.
    pub claim: String,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub grid: String,
    pub seed: u64,
    pub runtime_ms: u64,
}

/// A full report: tool version, the configuration, and the records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config: SuiteConfig,
    pub records: Vec<CheckRecord>,
}

struct Recorder<'a> {
    config: &'a SuiteConfig,
    records: Vec<CheckRecord>,
}

impl Recorder<'_> {
    fn add(
        &mut self,
        started: Instant,
        check_id: &str,
        claim: &str,
        measured: f64,
        base_tolerance: f64,
        comparison: Comparison,
    ) {
        let tolerance = base_tolerance * self.config.tol_scale;
        let pass = match comparison {
            Comparison::AtMost => measured <= tolerance,
            Comparison::AtLeast => measured >= tolerance,
        };
        self.records.push(CheckRecord {
            check_id: check_id.to_string(),
            claim: claim.to_string(),
            measured,
            tolerance,
            comparison,
            pass,
            grid: self.config.grid_label(),
            seed: self.config.seed,
            runtime_ms: started.elapsed().as_millis() as u64,
        });
    }
}

fn lib<T, E: fmt::Display>(check: &str, result: Result<T, E>) -> Result<T, HarnessError> {
    result.map_err(|e| HarnessError::Check { check: check.to_string(), message: e.to_string() })
}

/// Cap the global worker pool from MNL_THREADS. Call once at startup; later
/// calls (or an already-built pool) are harmless.
pub fn init_thread_pool() {
    if let Ok(value) = std::env::var("MNL_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Run every check of the configured suite, in a fixed order.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckRecord>, HarnessError> {
    config.validate()?;
    let mut recorder = Recorder { config, records: Vec::new() };
    let suites: Vec<SuiteId> = match config.suite {
        SuiteId::All => SuiteId::ALL_IDS[..SuiteId::ALL_IDS.len() - 1].to_vec(),
        one => vec![one],
    };
    for suite in suites {
        match suite {
            SuiteId::Spinor => suite_spinor(&mut recorder)?,
            SuiteId::Sections => suite_sections(&mut recorder)?,
            SuiteId::WaveEq => suite_wave_eq(&mut recorder)?,
            SuiteId::Massive => suite_massive(&mut recorder)?,
            SuiteId::Weyl => suite_weyl(&mut recorder)?,
            SuiteId::Maxwell => suite_maxwell(&mut recorder)?,
            SuiteId::VectorPotential => suite_vector_potential(&mut recorder)?,
            SuiteId::Fock => suite_fock(&mut recorder)?,
            SuiteId::All => unreachable!("expanded above"),
        }
    }
    Ok(recorder.records)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn gaussian_packet(rng: &mut ChaCha8Rng, dim: usize) -> GaussianPacket {
    let mut r = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let x0 = FourVector::new(r(-0.4, 0.4), r(-0.4, 0.4), r(-0.4, 0.4), r(-0.4, 0.4));
    let width = r(0.9, 1.6);
    let k0 = FourVector::new(r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0));
    let polarization = CVec::from_fn(dim, |_, _| c(r(-1.0, 1.0), r(-1.0, 1.0)));
    GaussianPacket::new(x0, width, k0, polarization)
}

// ---------------------------------------------------------------------------
// spinor suite
// ---------------------------------------------------------------------------

fn suite_spinor(r: &mut Recorder) -> Result<(), HarnessError> {
    let config = r.config;

    let started = Instant::now();
    let mut rng = config.rng(0x11);
    let mut defect = 0.0f64;
    for i in 0..2000 {
        let p = if i % 2 == 0 {
            sampling::cone_point(&mut rng, (0.1, 5.0), 1e-4)
        } else {
            let mut s = |lo: f64, hi: f64| rng.random_range(lo..hi);
            FourVector::new(s(-5.0, 5.0), s(-5.0, 5.0), s(-5.0, 5.0), s(-5.0, 5.0))
        };
        let m = momentum_to_matrix(&p);
        let q = lib("momentum-matrix-roundtrip", matrix_to_momentum(&m))?;
        let scale = p.components().iter().fold(1.0f64, |a, &x| a.max(x.abs()));
        let round = p
            .components()
            .iter()
            .zip(q.components())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let det = m.determinant();
        defect = defect
            .max(round / scale)
            .max((det.re - p.minkowski_sq()).abs() / (scale * scale))
            .max(det.im.abs() / (scale * scale));
    }
    r.add(
        started,
        "momentum-matrix-roundtrip",
        "the momentum-matrix correspondence inverts and carries the Minkowski form as a determinant",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x12);
    let mut defect = 0.0f64;
    for _ in 0..500 {
        let a = sampling::sl2_bounded(&mut rng, 1.0);
        let b = sampling::sl2_bounded(&mut rng, 1.0);
        let p = sampling::cone_point(&mut rng, (0.1, 5.0), 1e-4);
        let lhs = lib("lorentz-action-homomorphism", lorentz_action(&(a * b), &p))?;
        let inner = lib("lorentz-action-homomorphism", lorentz_action(&b, &p))?;
        let rhs = lib("lorentz-action-homomorphism", lorentz_action(&a, &inner))?;
        let scale = lhs.components().iter().fold(1.0f64, |m, &x| m.max(x.abs()));
        let diff = lhs
            .components()
            .iter()
            .zip(rhs.components())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        defect = defect.max(diff / scale);
    }
    r.add(
        started,
        "lorentz-action-homomorphism",
        "the action on momenta composes as the group does",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x13);
    let label = RepLabel { j: 2, k: 1 };
    let mut defect = 0.0f64;
    for _ in 0..200 {
        let a = sampling::sl2_bounded(&mut rng, 1.0);
        let b = sampling::sl2_bounded(&mut rng, 1.0);
        let prod = rep_apply(label, &(a * b));
        let split = rep_apply(label, &a) * rep_apply(label, &b);
        let scale = max_abs(&prod).max(1.0);
        defect = defect.max(max_abs(&(prod - split)) / scale);
    }
    r.add(
        started,
        "rep-apply-homomorphism",
        "tensor-power representations multiply as the group does",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x14);
    let mut defect = 0.0f64;
    for _ in 0..300 {
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let z = sampling::complex_in_disc(&mut rng, 2.0);
        let e = sampling::e2_element(&mut rng, 2.0);
        let explicit = crate::spinor_algebra::euclidean2_element(theta, z);
        for m in [&e, &explicit] {
            defect = defect.max(m[(1, 0)].norm()).max(unimodular_defect(m));
        }
    }
    r.add(
        started,
        "euclidean2-membership",
        "constructed plane Euclidean elements are upper triangular and unimodular",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    Ok(())
}

// ---------------------------------------------------------------------------
// sections suite
// ---------------------------------------------------------------------------

fn suite_sections(r: &mut Recorder) -> Result<(), HarnessError> {
    let config = r.config;
    let guard = ChartGuard::default();

    let started = Instant::now();
    let mut rng = config.rng(0x21);
    let nil = Spin2Matrix::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    let mut identity_defect = 0.0f64;
    let mut det_defect = 0.0f64;
    let mut gram_defect = 0.0f64;
    for _ in 0..10_000 {
        let p = sampling::cone_point(&mut rng, (0.1, 5.0), 1e-6);
        let h = lib("massless-section-identity", massless_section(&p, &guard))?;
        let lhs = h * nil * h.adjoint();
        let diff = lhs - momentum_to_matrix(&p);
        identity_defect = identity_defect
            .max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max) / (2.0 * p.p0));
        det_defect = det_defect.max((h.determinant() - c(1.0, 0.0)).norm());
        let gram = h.adjoint() * h;
        let target = Spin2Matrix::new(
            c(p.p0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0 / p.p0, 0.0),
        );
        gram_defect = gram_defect.max(
            (gram - target).iter().map(|z| z.norm()).fold(0.0, f64::max)
                / p.p0.max(1.0 / p.p0),
        );
    }
    r.add(
        started,
        "massless-section-identity",
        "sections factor the momentum matrix through the nilpotent weight on the chart",
        identity_defect,
        1e-9,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "massless-section-determinant",
        "sections are unimodular",
        det_defect,
        1e-9,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "massless-section-gram",
        "the section Gram matrix is the exact diagonal of the energy and its inverse",
        gram_defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x22);
    let mut defect = 0.0f64;
    for i in 0..10_000 {
        let mass = [0.5, 1.0, 2.0][i % 3];
        let p = sampling::shell_point(&mut rng, mass, 4.0);
        let h = lib("massive-section-identity", massive_section(&p, mass))?;
        let h_inv = sl2_inverse(&h);
        let lhs = h_inv.adjoint() * h_inv;
        let rhs = momentum_to_matrix(&p.parity_flip()).map(|z| z / mass);
        defect = defect.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    r.add(
        started,
        "massive-section-identity",
        "massive sections invert to the parity-flipped momentum weight",
        defect,
        1e-11,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x23);
    let mut defect = 0.0f64;
    for _ in 0..1000 {
        let a = sampling::sl2_bounded(&mut rng, 1.5);
        let p = sampling::cone_point(&mut rng, (0.2, 4.0), 0.05);
        let w = match wigner_element(&a, &p, &guard) {
            Ok(w) => w,
            Err(_) => continue,
        };
        defect = defect
            .max(w.lower_left_defect())
            .max(w.phase_modulus_defect())
            .max(w.unimodular_defect());
    }
    r.add(
        started,
        "wigner-e2-membership",
        "massless little-group elements are unimodular upper triangular with unit phase",
        defect,
        1e-10,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x24);
    let mut defect = 0.0f64;
    for _ in 0..1000 {
        let a = sampling::sl2_bounded(&mut rng, 0.75);
        let b = sampling::sl2_bounded(&mut rng, 0.75);
        let p = sampling::cone_point(&mut rng, (0.2, 4.0), 0.05);
        let q = lib("wigner-cocycle", lorentz_action(&sl2_inverse(&a), &p))?;
        let (w_ab, w_a, w_b) = match (
            wigner_element(&(a * b), &p, &guard),
            wigner_element(&a, &p, &guard),
            wigner_element(&b, &q, &guard),
        ) {
            (Ok(x), Ok(y), Ok(z)) => (x, y, z),
            _ => continue,
        };
        let diff = w_ab.matrix - w_a.matrix * w_b.matrix;
        defect = defect.max(diff.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    r.add(
        started,
        "wigner-cocycle",
        "little-group elements compose as a cocycle over the momentum action",
        defect,
        1e-10,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x25);
    let mut defect = 0.0f64;
    for _ in 0..1000 {
        let a = sampling::sl2_bounded(&mut rng, 1.0);
        let p = sampling::cone_point(&mut rng, (0.2, 4.0), 0.05);
        let w = match wigner_element(&a, &p, &guard) {
            Ok(w) => w,
            Err(_) => continue,
        };
        defect = defect.max((w.phase - wigner_phase_closed_form(&a, &p)).norm());
    }
    r.add(
        started,
        "wigner-phase-closed-form",
        "the helicity phase matches its closed form in the group entries and the momentum",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let margins = [1e-2, 1e-3, 1e-4, 1e-5];
    let mut points = Vec::new();
    for &margin in &margins {
        let s = lib(
            "section-boundary-sensitivity",
            section_boundary_sensitivity(1.0, 0.7, margin, &guard),
        )?;
        points.push((margin.ln(), s.ln()));
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    r.add(
        started,
        "section-boundary-sensitivity",
        "the section's margin sensitivity grows with the inverse square root of the chart margin",
        (slope + 0.5).abs(),
        0.1,
        Comparison::AtMost,
    );

    Ok(())
}

// ---------------------------------------------------------------------------
// wave-eq suite
// ---------------------------------------------------------------------------

fn rep_invariance(pi: &CMat, rep: &FibreRep, sample: &[Spin2Matrix]) -> (f64, f64) {
    let mut d1 = 0.0f64;
    let mut d2 = 0.0f64;
    for l in sample {
        let d = rep.apply(l);
        let dp = &d * pi;
        d1 = d1.max(max_abs(&(pi * &dp - &dp)));
        d2 = d2.max(max_abs(&(pi * d.adjoint() * &dp - pi)));
    }
    (d1, d2)
}

fn little_group_sample(eq: &EquationId, rng: &mut ChaCha8Rng, count: usize) -> Vec<Spin2Matrix> {
    (0..count)
        .map(|_| {
            if eq.is_massive() {
                sampling::su2(rng)
            } else {
                sampling::e2_element(rng, 1.5)
            }
        })
        .collect()
}

fn suite_wave_eq(r: &mut Recorder) -> Result<(), HarnessError> {
    let config = r.config;
    let registry = EquationId::registry();

    let started = Instant::now();
    let mut structural = 0.0f64;
    let mut rational = 0.0f64;
    for eq in &registry {
        let pi = projection_for(eq).matrix;
        structural = structural
            .max(max_abs(&(&pi * &pi - &pi)))
            .max(max_abs(&(pi.adjoint() - &pi)));
        for entry in pi.iter() {
            rational = rational
                .max((2.0 * entry.re - (2.0 * entry.re).round()).abs())
                .max(entry.im.abs());
        }
    }
    r.add(
        started,
        "projection-idempotent-hermitian",
        "every registry projection is an exact orthoprojection",
        structural,
        1e-15,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "projection-rational-entries",
        "every registry projection has exact half-integer entries",
        rational,
        1e-15,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x31);
    let mut d1_all = 0.0f64;
    let mut d2_pass = 0.0f64;
    let mut d2_maxwell_a = 0.0f64;
    for eq in &registry {
        let proj = projection_for(eq);
        let sample = little_group_sample(eq, &mut rng, 64);
        let (d1, d2) = rep_invariance(&proj.matrix, &proj.rep, &sample);
        d1_all = d1_all.max(d1);
        if *eq == EquationId::MaxwellA {
            d2_maxwell_a = d2;
        } else {
            d2_pass = d2_pass.max(d2);
        }
    }
    r.add(
        started,
        "projection-invariance",
        "every projection range is invariant under its sampled little group",
        d1_all,
        1e-12,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "projection-isometry",
        "the little group acts isometrically on every admissible projection range",
        d2_pass,
        1e-12,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "maxwell-a-nonisometry",
        "the naive potential projection visibly fails the isometry condition",
        d2_maxwell_a,
        0.1,
        Comparison::AtLeast,
    );

    let started = Instant::now();
    let guard = ChartGuard::default();
    let mut rng = config.rng(0x32);
    let massless = [
        EquationId::Weyl,
        EquationId::MaxwellF,
        EquationId::MaxwellA,
        EquationId::Helicity(2),
    ];
    let mut idem = 0.0f64;
    let mut kernel = 0.0f64;
    for i in 0..500 {
        let eq = &massless[i % massless.len()];
        let p = sampling::cone_point(&mut rng, (0.2, 4.0), 1e-3);
        let proj = lib("momentum-projection-massless", momentum_projection(eq, &p, 0.0, &guard))?;
        idem = idem.max(proj.idempotency_defect());
        let dim = eq.fibre_dim();
        let v = CVec::from_fn(dim, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let phi = &proj.matrix * v;
        let residual = lib(
            "momentum-projection-massless",
            rwe_residual(eq, &phi, &p, 0.0, &guard),
        )?;
        let scale = p.p0 * phi.camax() + f64::MIN_POSITIVE;
        kernel = kernel.max(residual.camax() / scale);
    }
    r.add(
        started,
        "momentum-projection-massless",
        "momentum-space projections stay idempotent under the section conjugation",
        idem,
        1e-10,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "wave-equation-kernel",
        "projected fibre data satisfies its first-order equation at every sampled momentum",
        kernel,
        1e-10,
        Comparison::AtMost,
    );

    Ok(())
}

// ---------------------------------------------------------------------------
// massive suite
// ---------------------------------------------------------------------------

fn suite_massive(r: &mut Recorder) -> Result<(), HarnessError> {
    let config = r.config;

    let started = Instant::now();
    let mut rng = config.rng(0x41);
    let mut defect = 0.0f64;
    for i in 0..1000 {
        let mass = [0.5, 0.8, 1.7][i % 3];
        let a = sampling::sl2_bounded(&mut rng, 1.5);
        let p = sampling::shell_point(&mut rng, mass, 3.0);
        let w = lib("massive-wigner-unitarity", massive_wigner_element(&a, &p, mass))?;
        defect = defect.max(w.unitarity_defect()).max(w.unimodular_defect());
    }
    r.add(
        started,
        "massive-wigner-unitarity",
        "massive little-group elements are special unitary",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let guard = ChartGuard::default();
    let mut rng = config.rng(0x42);
    let mut defect = 0.0f64;
    for i in 0..1000 {
        let mass = [0.5, 1.0, 2.0][i % 3];
        let p = sampling::shell_point(&mut rng, mass, 3.0);
        let pi = lib(
            "dirac-projection-equivalence",
            momentum_projection(&EquationId::Dirac, &p, mass, &guard),
        )?;
        let target = (gamma_matrix(&p) + CMat::identity(4, 4) * c(mass, 0.0))
            * c(1.0 / (2.0 * mass), 0.0);
        defect = defect.max(max_abs(&(&pi.matrix - target)));
    }
    r.add(
        started,
        "dirac-projection-equivalence",
        "the spinor projection equals the normalized mass-shifted gamma contraction",
        defect,
        1e-11,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x43);
    let proca = projection_for(&EquationId::Proca);
    let mut defect = 0.0f64;
    for _ in 0..200 {
        let u = sampling::su2(&mut rng);
        let d = proca.rep.apply(&u);
        defect = defect.max(max_abs(&(&d * &proca.matrix - &proca.matrix * &d)));
    }
    r.add(
        started,
        "proca-su2-commutation",
        "the vector projection commutes with the compact little group",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x44);
    let mut idem = 0.0f64;
    let mut kernel = 0.0f64;
    for i in 0..500 {
        let eq = if i % 2 == 0 { EquationId::Dirac } else { EquationId::Proca };
        let mass = [0.5, 1.0, 2.0][i % 3];
        let p = sampling::shell_point(&mut rng, mass, 3.0);
        let proj = lib("massive-projection-idempotent", momentum_projection(&eq, &p, mass, &guard))?;
        idem = idem.max(proj.idempotency_defect());
        let v = CVec::from_fn(4, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let phi = &proj.matrix * v;
        let residual = lib("massive-rwe-residual", rwe_residual(&eq, &phi, &p, mass, &guard))?;
        let scale = (p.p0 + mass) * phi.camax() + f64::MIN_POSITIVE;
        kernel = kernel.max(residual.camax() / scale);
    }
    r.add(
        started,
        "massive-projection-idempotent",
        "massive momentum-space projections stay idempotent",
        idem,
        1e-10,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "massive-rwe-residual",
        "projected massive fibre data satisfies its wave equation on the shell",
        kernel,
        1e-10,
        Comparison::AtMost,
    );

    Ok(())
}

// ---------------------------------------------------------------------------
// net suites (weyl, maxwell)
// ---------------------------------------------------------------------------

fn bump(center: [f64; 4], dim: usize, order: usize, rng: &mut ChaCha8Rng) -> TestFunction {
    let polarization = CVec::from_fn(dim, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    TestFunction::Bump(CompactBump::with_order(
        FourVector::new(center[0], center[1], center[2], center[3]),
        0.8,
        polarization,
        order,
    ))
}

/// Spacelike, convergence, and timelike causality records for one net model.
fn causality_records(
    r: &mut Recorder,
    model: &EquationId,
    prefix: &str,
    salt: u64,
) -> Result<(), HarnessError> {
    let config = r.config;
    let check = format!("{prefix}-causality");
    let dim = model.fibre_dim();
    // The commutator component the model's causality statement bounds: the
    // whole pairing for the two-spinor net, its imaginary part for the
    // symplectic tensor-square net.
    let component = |z: C64| -> f64 {
        match model {
            EquationId::Weyl => z.norm(),
            _ => z.im.abs(),
        }
    };

    let started = Instant::now();
    let mut rng = config.rng(salt);
    let f = bump([0.0, 0.0, 0.0, 0.0], dim, 64, &mut rng);
    let k_space = bump([0.0, 3.0, 0.0, 0.0], dim, 64, &mut rng);
    let k_time = bump([2.5, 0.3, 0.0, 0.0], dim, 64, &mut rng);

    let grid = config.build_grid();
    let ef = lib(&check, embed(model, &f, &grid))?;
    let es = lib(&check, embed(model, &k_space, &grid))?;
    let et = lib(&check, embed(model, &k_time, &grid))?;
    let nf = lib(&check, net_pairing(&ef, &ef))?.re.sqrt();
    let ns = lib(&check, net_pairing(&es, &es))?.re.sqrt();
    let nt = lib(&check, net_pairing(&et, &et))?.re.sqrt();
    let spacelike = component(lib(&check, net_pairing(&ef, &es))?) / (nf * ns);
    let timelike = component(lib(&check, net_pairing(&ef, &et))?) / (nf * nt);
    r.add(
        started,
        &format!("{check}-spacelike"),
        "the commutator pairing of spacelike-separated bumps vanishes to quadrature accuracy",
        spacelike,
        1e-5,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut coarse_fine = [0.0f64; 2];
    for (slot, (n_r, n_theta, n_phi)) in [(8, 6, 12), (16, 12, 24)].iter().enumerate() {
        let small = build_grid(GridKind::Cone, *n_r, *n_theta, *n_phi, config.r_max, config.seed);
        let ef = lib(&check, embed(model, &f, &small))?;
        let es = lib(&check, embed(model, &k_space, &small))?;
        let nf = lib(&check, net_pairing(&ef, &ef))?.re.sqrt();
        let ns = lib(&check, net_pairing(&es, &es))?.re.sqrt();
        coarse_fine[slot] = component(lib(&check, net_pairing(&ef, &es))?) / (nf * ns);
    }
    r.add(
        started,
        &format!("{check}-convergence"),
        "doubling the grid shrinks the spurious spacelike pairing at least fourfold",
        coarse_fine[0] / coarse_fine[1],
        4.0,
        Comparison::AtLeast,
    );

    let started = Instant::now();
    r.add(
        started,
        &format!("{check}-timelike"),
        "timelike-separated control bumps pair well above the spacelike bound",
        timelike,
        1e-4,
        Comparison::AtLeast,
    );

    Ok(())
}

fn intertwining_record(
    r: &mut Recorder,
    model: &EquationId,
    prefix: &str,
    salt: u64,
) -> Result<(), HarnessError> {
    let config = r.config;
    let check = format!("{prefix}-intertwining");
    let started = Instant::now();
    let mut rng = config.rng(salt);
    let grid = config.build_grid();
    let dim = model.fibre_dim();
    let mut defect = 0.0f64;
    for _ in 0..8 {
        let a = sampling::sl2_bounded(&mut rng, 1.0);
        let shift = sampling::translation(&mut rng, 1.0);
        let f = gaussian_packet(&mut rng, dim);
        let report = lib(&check, intertwining_defect(model, &a, &shift, &f, &grid))?;
        defect = defect.max(report.defect);
    }
    r.add(
        started,
        &check,
        "embedding then transforming equals transforming then embedding",
        defect,
        1e-8,
        Comparison::AtMost,
    );
    Ok(())
}

fn suite_weyl(r: &mut Recorder) -> Result<(), HarnessError> {
    let config = r.config;
    let model = EquationId::Weyl;

    let started = Instant::now();
    let grid = config.build_grid();
    let mut rng = config.rng(0x51);
    let mut residual = 0.0f64;
    for _ in 0..3 {
        let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 2));
        let embedded = lib("weyl-embed-residual", embed(&model, &f, &grid))?;
        residual = residual.max(lib("weyl-embed-residual", block_wave_defect(&embedded))?);
    }
    r.add(
        started,
        "weyl-embed-residual",
        "every embedded block satisfies the two-spinor equation at every node",
        residual,
        1e-10,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x52);
    let h = TestFunction::Gaussian(gaussian_packet(&mut rng, 2));
    let fhat = |p: &FourVector| {
        (to_dmat(&crate::spinor_algebra::conj2(&momentum_to_matrix(p))) * h.fourier(p))
            * c(0.0, -1.0)
    };
    let embedded = lib("weyl-derivative-data", embed_from_fourier(&model, &grid, fhat))?;
    let data = ConeFunction::from_fn(&grid, 2, fhat);
    let scale = lib("weyl-derivative-data", grid_norm(InnerProductKind::L2, &data))?;
    let mut worst = 0.0f64;
    for block in &embedded.blocks {
        worst = worst.max(lib("weyl-derivative-data", grid_norm(InnerProductKind::L2, block))?);
    }
    r.add(
        started,
        "weyl-derivative-data",
        "first-order derivative data embeds to zero",
        worst / scale,
        1e-9,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x53);
    let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 2));
    let embedded = lib("weyl-conjugation-invariance", embed(&model, &f, &grid))?;
    let flipped = lib("weyl-conjugation-invariance", crate::embeddings::gamma_w(&embedded))?;
    let mut defect = 0.0f64;
    for b in 0..4 {
        for i in 0..grid.len() {
            defect = defect
                .max((&flipped.blocks[b].values[i] - &embedded.blocks[b].values[i]).camax());
        }
    }
    r.add(
        started,
        "weyl-conjugation-invariance",
        "embedded vectors are fixed by the net conjugation",
        defect,
        1e-13,
        Comparison::AtMost,
    );

    intertwining_record(r, &model, "weyl", 0x54)?;

    let started = Instant::now();
    let mut rng = config.rng(0x55);
    let boost = sampling::sl2_bounded(&mut rng, 0.5);
    let chi = |p: &FourVector| (-0.8 * p.p0).exp() * c(1.0, 0.3) + c(0.0, 0.1 * (-p.p0).exp());
    let before = ConeFunction::from_fn(&grid, 1, |p| CVec::from_vec(vec![chi(p)]));
    let after = lib(
        "weyl-canonical-unitarity",
        canonical_rep_apply(
            BlockSign::Plus,
            1,
            &boost,
            &FourVector::new(0.2, -0.1, 0.3, 0.0),
            &ScalarData::Analytic(&chi),
            &grid,
        ),
    )?;
    let n_before = lib("weyl-canonical-unitarity", grid_norm(InnerProductKind::L2, &before))?;
    let n_after = lib("weyl-canonical-unitarity", grid_norm(InnerProductKind::L2, &after))?;
    r.add(
        started,
        "weyl-canonical-unitarity",
        "the canonical representation preserves the invariant scalar norm to quadrature accuracy",
        (n_after - n_before).abs() / n_before,
        1e-5,
        Comparison::AtMost,
    );

    causality_records(r, &model, "weyl", 0x56)?;

    let started = Instant::now();
    let mut rng = config.rng(0x57);
    let mut worst_ratio = 0.0f64;
    for _ in 0..10 {
        let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 2));
        let (lhs, rhs) = lib("weyl-continuity-bound", continuity_check(&f, &grid))?;
        worst_ratio = worst_ratio.max(lhs / rhs);
    }
    r.add(
        started,
        "weyl-continuity-bound",
        "the positive one-particle norm is dominated by the sharp Schwartz seminorm bound",
        worst_ratio,
        1.0,
        Comparison::AtMost,
    );

    let epsilons = [0.4, 0.2, 0.1, 0.05];
    let x = FourVector::new(0.0, 1.1, -0.7, 0.4);

    let started = Instant::now();
    let scalar = lib(
        "weyl-pauli-jordan-scalar",
        pauli_jordan_regulated(&x, |_| c(1.0, 0.0), 0, &epsilons),
    )?;
    r.add(
        started,
        "weyl-pauli-jordan-scalar",
        "the even regulated commutator integral vanishes against its odd-combination scale",
        scalar.extrapolant.norm() / scalar.opposite_scale,
        1e-3,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let linear = lib(
        "weyl-pauli-jordan-linear",
        pauli_jordan_regulated(&x, |p| c(p.p0, 0.0), 1, &epsilons),
    )?;
    r.add(
        started,
        "weyl-pauli-jordan-linear",
        "the odd regulated commutator integral extrapolates to zero within its own error estimate",
        linear.extrapolant.norm(),
        linear.error_estimate,
        Comparison::AtMost,
    );

    Ok(())
}

fn suite_maxwell(r: &mut Recorder) -> Result<(), HarnessError> {
    let config = r.config;
    let model = EquationId::MaxwellF;

    let started = Instant::now();
    let grid = config.build_grid();
    let mut rng = config.rng(0x61);
    let mut residual = 0.0f64;
    for _ in 0..2 {
        let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 4));
        let embedded = lib("maxwell-embed-residual", embed(&model, &f, &grid))?;
        residual = residual.max(lib("maxwell-embed-residual", block_wave_defect(&embedded))?);
    }
    r.add(
        started,
        "maxwell-embed-residual",
        "embedded tensor-square blocks satisfy the first-contraction equation at every node",
        residual,
        1e-10,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x62);
    let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 8));
    let embedded = lib(
        "helicity3-embed-residual",
        embed(&EquationId::Helicity(3), &f, &grid),
    )?;
    let residual = lib("helicity3-embed-residual", block_wave_defect(&embedded))?;
    r.add(
        started,
        "helicity3-embed-residual",
        "the third tensor power embeds into its solution space at every node",
        residual,
        1e-10,
        Comparison::AtMost,
    );

    intertwining_record(r, &model, "maxwell", 0x63)?;
    causality_records(r, &model, "maxwell", 0x64)?;

    let started = Instant::now();
    let x = FourVector::new(0.0, 1.3, 0.6, 1.1);
    let beta = |p: &FourVector| {
        let entry = 0.5 * (p.p0 - p.p3);
        c(entry * entry, 0.0)
    };
    let quadratic = lib(
        "maxwell-pauli-jordan-quadratic",
        pauli_jordan_regulated(&x, beta, 2, &[0.4, 0.2, 0.1, 0.05]),
    )?;
    r.add(
        started,
        "maxwell-pauli-jordan-quadratic",
        "the quadratic-weight regulated commutator integral vanishes against its odd scale",
        quadratic.extrapolant.norm() / quadratic.opposite_scale,
        1e-3,
        Comparison::AtMost,
    );

    Ok(())
}

// ---------------------------------------------------------------------------
// vector-potential suite
// ---------------------------------------------------------------------------

fn suite_vector_potential(r: &mut Recorder) -> Result<(), HarnessError> {
    let config = r.config;
    let grid = config.build_grid();

    let started = Instant::now();
    let phi = lib(
        "potential-eta-factorization",
        potential_lift(&grid, |p| {
            [
                c((-0.5 * p.p0).exp(), 0.2),
                c((-0.6 * p.p0).exp(), 0.0),
                c(0.1, (-0.8 * p.p0).exp()),
            ]
        }),
    )?;
    let psi = lib(
        "potential-eta-factorization",
        potential_lift(&grid, |p| {
            [
                c(0.3 * (-0.4 * p.p0).exp(), 0.0),
                c(0.0, (-0.5 * p.p0).exp()),
                c((-0.7 * p.p0).exp(), -0.2),
            ]
        }),
    )?;
    let pairing = lib(
        "potential-eta-factorization",
        vector_potential_pairings(&phi, &psi, 1e-8),
    )?;
    let factored = pairing.factor_scalars[0] + pairing.factor_scalars[1];
    r.add(
        started,
        "potential-eta-factorization",
        "the indefinite potential pairing factors through the two transverse scalars",
        (pairing.eta_pair - factored).norm() / pairing.eta_pair.norm(),
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let degenerate = lib(
        "potential-degenerate-annihilation",
        potential_lift(&grid, |p| {
            [c((-0.5 * p.p0).exp(), 0.2), c(0.0, 0.0), c(0.0, 0.0)]
        }),
    )?;
    let null = lib(
        "potential-degenerate-annihilation",
        vector_potential_pairings(&degenerate, &degenerate, 1e-8),
    )?;
    let cross = lib(
        "potential-degenerate-annihilation",
        vector_potential_pairings(&degenerate, &phi, 1e-8),
    )?;
    let deg_scale = lib(
        "potential-degenerate-annihilation",
        grid_norm(InnerProductKind::L2, &degenerate),
    )?
    .powi(2);
    r.add(
        started,
        "potential-degenerate-annihilation",
        "the degenerate potential direction is null for the indefinite pairing",
        null.eta_pair.norm().max(cross.eta_pair.norm()) / deg_scale,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x71);
    let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 4));
    let embedded = lib("potential-embedding-isometry", embed(&EquationId::MaxwellF, &f, &grid))?;
    let potential = lib("potential-embedding-isometry", phi_af(&embedded, 1e-8))?;
    let eta_norm = lib(
        "potential-embedding-isometry",
        vector_potential_pairings(&potential, &potential, 1e-8),
    )?
    .eta_pair;
    let net_norm = lib("potential-embedding-isometry", net_pairing(&embedded, &embedded))?;
    r.add(
        started,
        "potential-embedding-isometry",
        "the potential-valued embedding is isometric for the indefinite pairing",
        (eta_norm - net_norm).norm() / net_norm.re,
        1e-10,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x72);
    let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 2));
    let embedded = lib("canonical-block-isometry", embed(&EquationId::Weyl, &f, &grid))?;
    let mut defect = 0.0f64;
    for (b, sign, kind) in [
        (0usize, BlockSign::Plus, InnerProductKind::BetaPlus),
        (1usize, BlockSign::Minus, InnerProductKind::BetaMinus),
    ] {
        let block = &embedded.blocks[b];
        let chi = lib(
            "canonical-block-isometry",
            iso_to_scalar(&EquationId::Weyl, block, sign, 1e-8),
        )?;
        let net = lib("canonical-block-isometry", inner_product(kind, block, block))?.re;
        let l2 = lib("canonical-block-isometry", inner_product(InnerProductKind::L2, &chi, &chi))?
            .re;
        defect = defect.max((net - l2).abs() / net.abs().max(f64::MIN_POSITIVE));
    }
    r.add(
        started,
        "canonical-block-isometry",
        "the block-to-scalar reduction is isometric onto the invariant scalar space",
        defect,
        1e-10,
        Comparison::AtMost,
    );

    Ok(())
}

// ---------------------------------------------------------------------------
// fock suite
// ---------------------------------------------------------------------------

fn suite_fock(r: &mut Recorder) -> Result<(), HarnessError> {
    let config = r.config;
    let grid = config.build_grid();
    let mut rng = config.rng(0x81);

    // One orthonormal fermionic basis and space shared by the Weyl checks.
    let packets: Vec<TestFunction> = (0..4)
        .map(|_| TestFunction::Gaussian(gaussian_packet(&mut rng, 2)))
        .collect();
    let projected: Result<Vec<_>, HarnessError> = packets
        .iter()
        .map(|f| {
            let e = lib("fock-basis", embed(&EquationId::Weyl, f, &grid))?;
            lib("fock-basis", block_projection(&e))
        })
        .collect();
    let projected = projected?;

    let started = Instant::now();
    let extra: Result<Vec<_>, HarnessError> = (0..2)
        .map(|_| {
            let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 2));
            let e = lib("fock-gram-reconstruction", embed(&EquationId::Weyl, &f, &grid))?;
            lib("fock-gram-reconstruction", block_projection(&e))
        })
        .collect();
    let mut six = projected.clone();
    six.extend(extra?);
    let basis6 = lib("fock-gram-reconstruction", orthonormalize(&six, 1e-10))?;
    r.add(
        started,
        "fock-gram-reconstruction",
        "orthonormal expansion coefficients reproduce the input Gram matrix",
        basis6.gram_reconstruction_defect() / max_abs(&basis6.gram),
        1e-10,
        Comparison::AtMost,
    );

    let basis = lib("fock-basis", orthonormalize(&projected, 1e-10))?;
    let space = lib("fock-basis", FockSpace::new(Statistics::Fermi, 4, 4))?;

    let started = Instant::now();
    let mut defect = 0.0f64;
    let id = CMat::identity(space.dim(), space.dim());
    let create: Vec<CMat> = (0..4)
        .map(|i| lib("fock-car", ladder(&space, i, LadderKind::Create)).map(|o| o.matrix))
        .collect::<Result<_, _>>()?;
    let annihilate: Vec<CMat> = (0..4)
        .map(|i| lib("fock-car", ladder(&space, i, LadderKind::Annihilate)).map(|o| o.matrix))
        .collect::<Result<_, _>>()?;
    for i in 0..4 {
        for j in 0..4 {
            let anti = &annihilate[i] * &create[j] + &create[j] * &annihilate[i];
            let target = if i == j { id.clone() } else { CMat::zeros(space.dim(), space.dim()) };
            defect = defect.max(max_abs(&(anti - target)));
            let cc = &create[i] * &create[j] + &create[j] * &create[i];
            defect = defect.max(max_abs(&cc));
        }
    }
    r.add(
        started,
        "fock-car",
        "ladder operators on the full exterior algebra satisfy the anticommutation relations",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let bose = lib("fock-ccr", FockSpace::new(Statistics::Bose, 3, 4))?;
    let mut defect = 0.0f64;
    let mut tail = 0.0f64;
    let bid = CMat::identity(bose.dim(), bose.dim());
    for i in 0..3 {
        for j in 0..3 {
            let a = lib("fock-ccr", ladder(&bose, i, LadderKind::Annihilate))?.matrix;
            let ct = lib("fock-ccr", ladder(&bose, j, LadderKind::Create))?.matrix;
            let comm = &a * &ct - &ct * &a;
            let target = if i == j { bid.clone() } else { CMat::zeros(bose.dim(), bose.dim()) };
            for (col, s) in bose.states.iter().enumerate() {
                let total: usize = s.iter().map(|&n| n as usize).sum();
                let col_defect = (comm.column(col) - target.column(col)).camax();
                if total < bose.truncation {
                    defect = defect.max(col_defect);
                } else if i == j {
                    tail = tail.max(col_defect);
                }
            }
        }
    }
    r.add(
        started,
        "fock-ccr",
        "bosonic ladder operators satisfy the commutation relations below the truncation",
        defect,
        1e-12,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "fock-truncation-tail",
        "the dropped creation branch makes the commutation defect visible on the top sector",
        tail,
        1.0,
        Comparison::AtLeast,
    );

    let started = Instant::now();
    let phi0 = lib("fock-field", field_operator(&packets[0], &basis, &space))?;
    let phi1 = lib("fock-field", field_operator(&packets[1], &basis, &space))?;
    let anti = &phi0.matrix * &phi1.matrix + &phi1.matrix * &phi0.matrix;
    let constant = lib("fock-field", net_pairing(&projected[0], &projected[1]))?.re;
    let defect = max_abs(&(anti - &id * c(constant, 0.0))) / constant.abs().max(1.0);
    r.add(
        started,
        "fock-field-anticommutator",
        "field anticommutators are the real part of the one-particle pairing times the identity",
        defect,
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let full = lib("fock-norm-bound", embed(&EquationId::Weyl, &packets[0], &grid))?;
    let full_norm = lib("fock-norm-bound", net_pairing(&full, &full))?.re.sqrt();
    r.add(
        started,
        "fock-norm-bound",
        "the fermionic field norm is dominated by the embedded one-particle norm",
        phi0.hermitian_norm() / full_norm,
        1.0,
        Comparison::AtMost,
    );
    let started = Instant::now();
    r.add(
        started,
        "fock-one-point",
        "the vacuum one-point function vanishes",
        phi0.vacuum_element().norm(),
        1e-13,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let moment = lib("fock-two-point", two_point(&packets[0], &packets[1], &basis, &space))?;
    r.add(
        started,
        "fock-two-point",
        "the vacuum two-point function equals half the one-particle pairing",
        (moment.via_operators - moment.via_pairing).norm() / moment.via_pairing.norm(),
        1e-11,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let min_eig = lib("fock-spectral-positivity", spectral_positivity(&basis))?;
    r.add(
        started,
        "fock-spectral-positivity",
        "the one-particle energy form is positive semidefinite",
        (-min_eig).max(0.0),
        1e-12,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x82);
    let boost = sampling::sl2_bounded(&mut rng, 0.5);
    let shift = sampling::translation(&mut rng, 1.0);
    let f1 = TestFunction::Gaussian(gaussian_packet(&mut rng, 2));
    let f2 = TestFunction::Gaussian(gaussian_packet(&mut rng, 2));
    let report = lib(
        "fock-covariance",
        covariance_matrix_elements(&EquationId::Weyl, &boost, &shift, &f1, &f2, &grid, false),
    )?;
    r.add(
        started,
        "fock-covariance",
        "analytic and embedded transforms give the same covariance matrix elements",
        (report.lhs - report.rhs).norm() / report.lhs.norm().max(f64::MIN_POSITIVE),
        1e-7,
        Comparison::AtMost,
    );

    let started = Instant::now();
    let mut rng = config.rng(0x83);
    let bose_vectors: Result<Vec<_>, HarnessError> = (0..3)
        .map(|_| {
            let f = TestFunction::Gaussian(gaussian_packet(&mut rng, 4));
            lib("fock-bose-commutator", embed(&EquationId::MaxwellF, &f, &grid))
        })
        .collect();
    let bose_vectors = bose_vectors?;
    let bose_basis = lib("fock-bose-commutator", orthonormalize(&bose_vectors, 1e-10))?;
    let bose_space = lib("fock-bose-commutator", FockSpace::new(Statistics::Bose, 3, 4))?;
    let g1 = TestFunction::Gaussian(gaussian_packet(&mut rng, 4));
    let g2 = TestFunction::Gaussian(gaussian_packet(&mut rng, 4));
    let pf = lib("fock-bose-commutator", field_operator(&g1, &bose_basis, &bose_space));
    // Random tensor packets need not lie in a three-vector span; retry with
    // members of the span itself if the draw landed outside.
    let (pf, pk, sigma) = match pf {
        Ok(pf) => {
            let pk = lib("fock-bose-commutator", field_operator(&g2, &bose_basis, &bose_space))?;
            let e1 = lib("fock-bose-commutator", embed(&EquationId::MaxwellF, &g1, &grid))?;
            let e2 = lib("fock-bose-commutator", embed(&EquationId::MaxwellF, &g2, &grid))?;
            (pf, pk, lib("fock-bose-commutator", net_pairing(&e1, &e2))?.im)
        }
        Err(_) => {
            let pf = lib(
                "fock-bose-commutator",
                crate::fock::field_operator_from_embedded(
                    &bose_vectors[0],
                    &bose_basis,
                    &bose_space,
                    1e-8,
                    0.0,
                ),
            )?;
            let pk = lib(
                "fock-bose-commutator",
                crate::fock::field_operator_from_embedded(
                    &bose_vectors[1],
                    &bose_basis,
                    &bose_space,
                    1e-8,
                    0.0,
                ),
            )?;
            let sigma = lib(
                "fock-bose-commutator",
                net_pairing(&bose_vectors[0], &bose_vectors[1]),
            )?
            .im;
            (pf, pk, sigma)
        }
    };
    let comm = &pf.matrix * &pk.matrix - &pk.matrix * &pf.matrix;
    let expected = c(0.0, sigma);
    let bid = CMat::identity(bose_space.dim(), bose_space.dim());
    let mut defect = 0.0f64;
    for (col, s) in bose_space.states.iter().enumerate() {
        let total: usize = s.iter().map(|&n| n as usize).sum();
        if total < bose_space.truncation {
            defect = defect.max((comm.column(col) - bid.column(col) * expected).camax());
        }
    }
    r.add(
        started,
        "fock-bose-commutator",
        "bosonic field commutators equal the symplectic form below the truncation",
        defect / sigma.abs().max(1.0),
        1e-12,
        Comparison::AtMost,
    );

    Ok(())
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

/// Report serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(HarnessError::UnknownFormat(other.to_string())),
        }
    }
}

impl ReportFormat {
    /// Infer from a path extension; default JSON.
    pub fn for_path(path: &Path) -> ReportFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

const CSV_HEADER: &str = "check_id,claim,measured,tolerance,comparison,pass,grid,seed,runtime_ms";

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render a report. Errors on empty record lists: a report with nothing in
/// it means the suite never ran.
pub fn render_report(
    config: &SuiteConfig,
    records: &[CheckRecord],
    format: ReportFormat,
) -> Result<String, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    match format {
        ReportFormat::Json => {
            let report = Report {
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: config.clone(),
                records: records.to_vec(),
            };
            serde_json::to_string_pretty(&report)
                .map_err(|e| HarnessError::BadReport(e.to_string()))
        }
        ReportFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for record in records {
                let comparison = match record.comparison {
                    Comparison::AtMost => "at_most",
                    Comparison::AtLeast => "at_least",
                };
                out.push_str(&format!(
                    "{},{},{:e},{:e},{},{},{},{},{}\n",
                    csv_field(&record.check_id),
                    csv_field(&record.claim),
                    record.measured,
                    record.tolerance,
                    comparison,
                    record.pass,
                    csv_field(&record.grid),
                    record.seed,
                    record.runtime_ms,
                ));
            }
            Ok(out)
        }
    }
}

/// Render and write a report file.
pub fn emit_report(
    config: &SuiteConfig,
    records: &[CheckRecord],
    path: &Path,
    format: ReportFormat,
) -> Result<(), HarnessError> {
    let text = render_report(config, records, format)?;
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parse a JSON report back.
pub fn parse_report(text: &str) -> Result<Report, HarnessError> {
    serde_json::from_str(text).map_err(|e| HarnessError::BadReport(e.to_string()))
}

// ---------------------------------------------------------------------------
// config files
// ---------------------------------------------------------------------------

/// Values from a key-value config file. All fields optional; explicit CLI
/// flags take precedence over every file value.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    pub suite: Option<SuiteId>,
    pub grid: Option<(usize, usize, usize)>,
    pub r_max: Option<f64>,
    pub seed: Option<u64>,
    pub tol_scale: Option<f64>,
    pub report: Option<String>,
    pub format: Option<ReportFormat>,
}

impl ConfigFile {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut file = ConfigFile::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let number = idx + 1;
            let bad = |message: String| HarnessError::ConfigFile { line: number, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "suite" => file.suite = Some(value.parse()?),
                "grid" => file.grid = Some(parse_grid_spec(value)?),
                "rmax" => {
                    file.r_max =
                        Some(value.parse().map_err(|_| bad(format!("bad rmax `{value}`")))?)
                }
                "seed" => {
                    file.seed =
                        Some(value.parse().map_err(|_| bad(format!("bad seed `{value}`")))?)
                }
                "tol-scale" | "tol_scale" => {
                    file.tol_scale = Some(
                        value.parse().map_err(|_| bad(format!("bad tol-scale `{value}`")))?,
                    )
                }
                "report" => file.report = Some(value.to_string()),
                "format" => file.format = Some(value.parse()?),
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        Ok(file)
    }
}

// ---------------------------------------------------------------------------
// tables
// ---------------------------------------------------------------------------

fn rational_entry(z: &C64) -> String {
    let half_units = (2.0 * z.re).round() as i64;
    debug_assert!((2.0 * z.re - half_units as f64).abs() < 1e-12 && z.im == 0.0);
    match half_units {
        0 => "0".to_string(),
        u if u % 2 == 0 => format!("{}", u / 2),
        u => format!("{u}/2"),
    }
}

fn rep_label_text(rep: &FibreRep) -> String {
    match rep {
        FibreRep::Tensor(label) => format!("tensor({},{})", label.j, label.k),
        FibreRep::DiracSum => "spinor-pair".to_string(),
    }
}

/// The fibre projection registry as text or JSON: one row per equation with
/// its representation and exact rational projection matrix.
pub fn render_tables(format: ReportFormat) -> String {
    let rows: Vec<_> = EquationId::registry()
        .into_iter()
        .map(|eq| {
            let proj = projection_for(&eq);
            let matrix: Vec<Vec<String>> = (0..proj.matrix.nrows())
                .map(|i| {
                    (0..proj.matrix.ncols())
                        .map(|j| rational_entry(&proj.matrix[(i, j)]))
                        .collect()
                })
                .collect();
            (eq.name(), eq.fibre_dim(), rep_label_text(&proj.rep), eq.is_massive(), matrix)
        })
        .collect();
    match format {
        ReportFormat::Json => {
            let equations: Vec<serde_json::Value> = rows
                .into_iter()
                .map(|(name, dim, rep, massive, matrix)| {
                    serde_json::json!({
                        "name": name,
                        "fibre_dim": dim,
                        "rep": rep,
                        "massive": massive,
                        "projection": matrix,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&serde_json::json!({ "equations": equations }))
                .expect("static table serializes")
        }
        ReportFormat::Csv => {
            let mut out = String::new();
            for (name, dim, rep, massive, matrix) in rows {
                let kind = if massive { "massive" } else { "massless" };
                out.push_str(&format!("{name}  (fibre dim {dim}, {rep}, {kind})\n"));
                for row in matrix {
                    out.push_str("    [ ");
                    out.push_str(&row.join("  "));
                    out.push_str(" ]\n");
                }
                out.push('\n');
            }
            out
        }
    }
}
