//! Release gate: every criterion below must hold on the default
//! configuration before a cut. One line is printed per criterion; the test
//! fails if any line fails, after all lines have printed.
//!
//! The heavy criteria reuse the records of a single timed `all`-suite run,
//! so the gate doubles as the ten-minute runtime budget check.

use std::time::Instant;

use mnl::embeddings::{continuity_check, intertwining_defect};
use mnl::harness::{run_suite, CheckRecord, SuiteConfig, SuiteId};
use mnl::momentum_grid::{build_grid, GridKind};
use mnl::sampling;
use mnl::spinor_algebra::FourVector;
use mnl::test_functions::GaussianPacket;
use mnl::wave_equations::EquationId;
use mnl::{C64, CVec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn criterion(&mut self, number: usize, label: &str, ok: bool, detail: String) {
        let status = if ok { "PASS" } else { "FAIL" };
        println!("criterion {number:>2}: {status}  {label}  [{detail}]");
        if !ok {
            self.failures.push(format!("criterion {number}: {label} ({detail})"));
        }
    }
}

fn rec<'a>(records: &'a [CheckRecord], id: &str) -> &'a CheckRecord {
    records
        .iter()
        .find(|r| r.check_id == id)
        .unwrap_or_else(|| panic!("no record with id `{id}`"))
}

fn all_pass(records: &[CheckRecord], ids: &[&str]) -> bool {
    ids.iter().all(|id| rec(records, id).pass)
}

fn runtime_ms(records: &[CheckRecord], ids: &[&str]) -> u64 {
    ids.iter().map(|id| rec(records, id).runtime_ms).sum()
}

fn packet(rng: &mut ChaCha8Rng, dim: usize) -> GaussianPacket {
    let mut r = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let x0 = FourVector::new(r(-0.4, 0.4), r(-0.4, 0.4), r(-0.4, 0.4), r(-0.4, 0.4));
    let width = r(0.9, 1.6);
    let k0 = FourVector::new(r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0), r(-1.0, 1.0));
    let polarization = CVec::from_fn(dim, |_, _| C64::new(r(-1.0, 1.0), r(-1.0, 1.0)));
    GaussianPacket::new(x0, width, k0, polarization)
}

#[test]
fn release_criteria() {
    let mut gate = Gate { failures: Vec::new() };
    let config = SuiteConfig::default();

    let all_started = Instant::now();
    let records = run_suite(&config).expect("the full suite runs without errors");
    let all_elapsed = all_started.elapsed();

    // 1. Section identities at scale, in bounded time.
    let section_ids = [
        "massless-section-identity",
        "massless-section-determinant",
        "massless-section-gram",
        "massive-section-identity",
    ];
    let section_time = runtime_ms(&records, &section_ids);
    gate.criterion(
        1,
        "massless and massive section identities hold at 1e-9 / 1e-11 over 10^4 draws in <5 s",
        all_pass(&records, &section_ids) && section_time < 5000,
        format!(
            "identity {:.2e}, massive {:.2e}, {} ms",
            rec(&records, "massless-section-identity").measured,
            rec(&records, "massive-section-identity").measured,
            section_time
        ),
    );

    // 2. Little-group membership and the cocycle law, in bounded time.
    let wigner_ids = ["wigner-e2-membership", "wigner-cocycle"];
    let wigner_time = runtime_ms(&records, &wigner_ids);
    gate.criterion(
        2,
        "little-group elements are plane-Euclidean and compose as a cocycle at 1e-10 in <5 s",
        all_pass(&records, &wigner_ids) && wigner_time < 5000,
        format!(
            "membership {:.2e}, cocycle {:.2e}, {} ms",
            rec(&records, "wigner-e2-membership").measured,
            rec(&records, "wigner-cocycle").measured,
            wigner_time
        ),
    );

    // 3. The projection table: exact entries, invariance, isometry, and the
    //    deliberate counterexample.
    gate.criterion(
        3,
        "fibre projections are exactly rational, invariant, isometric except the potential row",
        all_pass(
            &records,
            &[
                "projection-idempotent-hermitian",
                "projection-rational-entries",
                "projection-invariance",
                "projection-isometry",
                "maxwell-a-nonisometry",
            ],
        ),
        format!(
            "invariance {:.2e}, isometry {:.2e}, counterexample {:.2}",
            rec(&records, "projection-invariance").measured,
            rec(&records, "projection-isometry").measured,
            rec(&records, "maxwell-a-nonisometry").measured
        ),
    );

    // 4. Massive closed forms: the spinor projection and the vector
    //    little-group commutation.
    gate.criterion(
        4,
        "the spinor projection matches its closed form at 1e-11; the vector one commutes at 1e-12",
        all_pass(&records, &["dirac-projection-equivalence", "proca-su2-commutation"]),
        format!(
            "spinor {:.2e}, vector {:.2e}",
            rec(&records, "dirac-projection-equivalence").measured,
            rec(&records, "proca-su2-commutation").measured
        ),
    );

    // 5. Embedded data solves its equations; derivative data embeds to zero.
    gate.criterion(
        5,
        "embedded blocks solve their wave equations at 1e-10 for helicities 1..3; derivative data dies at 1e-9",
        all_pass(
            &records,
            &[
                "weyl-embed-residual",
                "maxwell-embed-residual",
                "helicity3-embed-residual",
                "weyl-derivative-data",
            ],
        ),
        format!(
            "residuals {:.2e}/{:.2e}/{:.2e}, derivative {:.2e}",
            rec(&records, "weyl-embed-residual").measured,
            rec(&records, "maxwell-embed-residual").measured,
            rec(&records, "helicity3-embed-residual").measured,
            rec(&records, "weyl-derivative-data").measured
        ),
    );

    // 6. Intertwining at scale: 50 sampled group elements per model on the
    //    default grid, within a minute.
    let started = Instant::now();
    let grid = build_grid(GridKind::Cone, config.n_r, config.n_theta, config.n_phi, config.r_max, config.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    let mut worst = 0.0f64;
    for model in [EquationId::Weyl, EquationId::MaxwellF] {
        for _ in 0..50 {
            let a = sampling::sl2_bounded(&mut rng, 1.0);
            let shift = sampling::translation(&mut rng, 1.0);
            let f = packet(&mut rng, model.fibre_dim());
            let report = intertwining_defect(&model, &a, &shift, &f, &grid)
                .expect("intertwining defect evaluates");
            worst = worst.max(report.defect);
        }
    }
    let intertwining_elapsed = started.elapsed();
    gate.criterion(
        6,
        "covariant-to-canonical intertwining holds at 1e-8 over 50 group elements per model in <60 s",
        worst <= 1e-8 && intertwining_elapsed.as_secs() < 60,
        format!("worst {:.2e}, {:.1} s", worst, intertwining_elapsed.as_secs_f64()),
    );

    // 7. Causality: spacelike suppression with grid-doubling convergence, a
    //    visible timelike control, and the regulated-integral oracle.
    let weyl_space = rec(&records, "weyl-causality-spacelike");
    let weyl_time = rec(&records, "weyl-causality-timelike");
    let maxwell_space = rec(&records, "maxwell-causality-spacelike");
    let maxwell_time = rec(&records, "maxwell-causality-timelike");
    let contrast_weyl = weyl_time.measured / weyl_space.measured;
    let contrast_maxwell = maxwell_time.measured / maxwell_space.measured;
    gate.criterion(
        7,
        "spacelike pairings vanish at 1e-5 with 4x shrink under doubling, 10x timelike contrast, and vanishing regulated integrals",
        all_pass(
            &records,
            &[
                "weyl-causality-spacelike",
                "weyl-causality-convergence",
                "maxwell-causality-spacelike",
                "maxwell-causality-convergence",
                "weyl-pauli-jordan-scalar",
                "weyl-pauli-jordan-linear",
                "maxwell-pauli-jordan-quadratic",
            ],
        ) && contrast_weyl > 10.0
            && contrast_maxwell > 10.0,
        format!(
            "spacelike {:.2e}/{:.2e}, shrink {:.1}/{:.1}, contrast {:.0}/{:.0}",
            weyl_space.measured,
            maxwell_space.measured,
            rec(&records, "weyl-causality-convergence").measured,
            rec(&records, "maxwell-causality-convergence").measured,
            contrast_weyl,
            contrast_maxwell
        ),
    );

    // 8. The canonical and potential pictures are isometric to the net one.
    gate.criterion(
        8,
        "block-scalar and potential embeddings are isometric at 1e-10 with exact null directions at 1e-12",
        all_pass(
            &records,
            &[
                "canonical-block-isometry",
                "potential-embedding-isometry",
                "potential-eta-factorization",
                "potential-degenerate-annihilation",
            ],
        ),
        format!(
            "block {:.2e}, potential {:.2e}, factorization {:.2e}",
            rec(&records, "canonical-block-isometry").measured,
            rec(&records, "potential-embedding-isometry").measured,
            rec(&records, "potential-eta-factorization").measured
        ),
    );

    // 9. Field operators: the ladder algebras, norm bound, moments,
    //    positivity, and covariance.
    gate.criterion(
        9,
        "ladder algebras hold at 1e-12 below truncation, fields are norm-bounded with positive energy and covariant moments",
        all_pass(
            &records,
            &[
                "fock-car",
                "fock-ccr",
                "fock-field-anticommutator",
                "fock-norm-bound",
                "fock-two-point",
                "fock-spectral-positivity",
                "fock-covariance",
                "fock-bose-commutator",
            ],
        ),
        format!(
            "car {:.2e}, ccr {:.2e}, two-point {:.2e}, covariance {:.2e}",
            rec(&records, "fock-car").measured,
            rec(&records, "fock-ccr").measured,
            rec(&records, "fock-two-point").measured,
            rec(&records, "fock-covariance").measured
        ),
    );

    // 10. The continuity bound with its sharp constant, over 50 packets.
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0117);
    let mut violations = 0usize;
    let mut max_ratio = 0.0f64;
    for _ in 0..50 {
        let f = mnl::test_functions::TestFunction::Gaussian(packet(&mut rng, 2));
        let (lhs, rhs) = continuity_check(&f, &grid).expect("continuity bound evaluates");
        if lhs > rhs {
            violations += 1;
        }
        max_ratio = max_ratio.max(lhs / rhs);
    }
    gate.criterion(
        10,
        "the one-particle norm obeys the sharp seminorm bound on all 50 packets",
        violations == 0,
        format!(
            "violations {violations}, max ratio {:.3}, {:.1} s",
            max_ratio,
            started.elapsed().as_secs_f64()
        ),
    );

    // 11. Reproducibility and budget: bit-identical reruns, honest failures
    //     under scaled tolerances, and the full run inside ten minutes.
    let fast = SuiteConfig {
        suite: SuiteId::Spinor,
        n_r: 6,
        n_theta: 6,
        n_phi: 8,
        r_max: 14.0,
        ..SuiteConfig::default()
    };
    let first = run_suite(&fast).expect("spinor suite runs");
    let second = run_suite(&fast).expect("spinor suite runs");
    let identical = first.len() == second.len()
        && first.iter().zip(&second).all(|(a, b)| {
            a.check_id == b.check_id
                && a.measured.to_bits() == b.measured.to_bits()
                && a.tolerance.to_bits() == b.tolerance.to_bits()
                && a.pass == b.pass
        });
    let scaled = SuiteConfig { tol_scale: 1e-6, ..fast };
    let scaled_records = run_suite(&scaled).expect("scaled suite runs");
    let honest_failure = scaled_records.iter().any(|r| !r.pass);
    let in_budget = all_elapsed.as_secs() < 600;
    gate.criterion(
        11,
        "reruns are bit-identical, scaled-down tolerances fail honestly, and the full suite fits in 10 min",
        identical && honest_failure && in_budget,
        format!(
            "identical {identical}, scaled failures {}, all-suite {:.1} s",
            scaled_records.iter().filter(|r| !r.pass).count(),
            all_elapsed.as_secs_f64()
        ),
    );

    assert!(
        gate.failures.is_empty(),
        "failed criteria:\n{}",
        gate.failures.join("\n")
    );
}
