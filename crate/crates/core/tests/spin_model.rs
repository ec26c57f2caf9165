use faer::Side;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wgqed::jc_model::{jc_from_physical, peak_splitting};
use wgqed::spin_model::{
    collective_mode, driven_impurity_spectrum, emission_budget, evolve, evolve_with, local_field, mode_decay_rate,
    retrieval_efficiency, steady_state_weak_drive, weak_drive_spectrum, CollectiveMode, EvolveMethod, Generator,
    GuidedInput, ModeKind, Solver,
};
use wgqed::transfer_matrix::{chain_spectrum, driven_impurity_spectrum_analytic};
use wgqed::{ChainGeometry, PhaseMode, PhysicalParams, Role, Site};

fn params(g1d: f64, gp: f64) -> PhysicalParams {
    PhysicalParams::new(g1d, gp).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn reproduces_transfer_matrix_spectra() {
    let p = params(0.25, 1.0);
    let deltas: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.25).collect();
    let chains = [
        ChainGeometry::build_mirror_chain(1, 0.5).unwrap(),
        ChainGeometry::build_mirror_chain(17, 0.5).unwrap(),
        ChainGeometry::build_mirror_chain(200, 0.5).unwrap(),
        ChainGeometry::build_mirror_chain(60, 0.31).unwrap(),
        ChainGeometry::build_cavity_chain(50, 0.5, 0.75).unwrap(),
    ];
    for g in &chains {
        let tm = chain_spectrum(g, &p, &deltas, PhaseMode::Approx).unwrap();
        for solver in [Solver::Dense, Solver::Structured] {
            let sm = weak_drive_spectrum(g, &p, &deltas, solver).unwrap();
            for (a, b) in sm.rows.iter().zip(&tm.rows) {
                assert!(rel(a.reflectance, b.reflectance) < 1e-6, "{} {a:?} {b:?}", g.len());
                assert!(rel(a.transmittance, b.transmittance) < 1e-6, "{} {a:?} {b:?}", g.len());
            }
        }
    }
}

#[test]
fn driven_impurity_backends_agree() {
    let p = params(0.25, 1.0);
    let deltas: Vec<f64> = (-30..=30).map(|k| k as f64 * 0.5).collect();
    for n_m in [1usize, 10, 50] {
        let g = ChainGeometry::build_cavity_chain(n_m, 0.5, 0.75).unwrap();
        let a = driven_impurity_spectrum_analytic(&g, &p, &deltas, PhaseMode::Approx).unwrap();
        let s = driven_impurity_spectrum(&g, &p, &deltas, Solver::Auto).unwrap();
        for (x, y) in a.rows.iter().zip(&s.rows) {
            assert!(rel(y.intracavity.unwrap(), x.intracavity.unwrap()) < 1e-9, "{n_m} {x:?} {y:?}");
            assert!(rel(y.transmitted.unwrap(), x.transmitted.unwrap()) < 1e-9, "{n_m} {x:?} {y:?}");
            assert!(rel(y.reflectance, x.reflectance) < 1e-9);
        }
    }
    // No mirrors: unit resonant peak.
    let g = ChainGeometry::new(vec![Site::new(0.0, Role::Impurity)]).unwrap();
    let s = driven_impurity_spectrum(&g, &p, &[0.0], Solver::Dense).unwrap();
    assert!((s.rows[0].intracavity.unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn mirror_atoms_see_the_same_local_field() {
    let p = params(0.25, 1.0);
    let g = ChainGeometry::build_mirror_chain(100, 0.5).unwrap();
    let gen = Generator::new(&g, &p).unwrap();
    let input = GuidedInput::from_left(Complex64::new(1.0, 0.0));
    let c = steady_state_weak_drive(&gen, 0.0, &input.drive(&gen), Solver::Structured).unwrap();
    let want = (1.0f64 / 26.0).powi(2);
    let h = (0.5 * p.gamma_1d).sqrt();
    for j in 0..100 {
        let e = local_field(&gen, &c, input, j);
        assert!(rel(e.norm_sqr(), want) < 1e-10, "{j}: {}", e.norm_sqr());
        // Each atom responds to its local field like an isolated atom.
        let isolated = -Complex64::new(0.0, h) * e / Complex64::new(-0.5 * p.gamma_prime, 0.0);
        assert!((isolated - c[j]).norm() < 1e-12);
    }
}

fn cavity(n_m: usize) -> (ChainGeometry, Generator) {
    let g = ChainGeometry::build_cavity_chain(n_m, 0.5, 0.75).unwrap();
    let gen = Generator::new(&g, &params(0.25, 1.0)).unwrap();
    (g, gen)
}

#[test]
fn sub_and_super_radiance() {
    for n_m in [1usize, 5, 50, 1000] {
        let (g, gen) = cavity(n_m);
        let n_a = 2.0 * n_m as f64;
        let cav = collective_mode(&g, ModeKind::Cavity).unwrap();
        let rad = collective_mode(&g, ModeKind::Radiant).unwrap();
        assert!(gen.waveguide_rate(&cav.vector) <= 1e-12 * 0.25);
        assert!((mode_decay_rate(&gen, &cav) - 1.0).abs() < 1e-10);
        assert!((mode_decay_rate(&gen, &rad) - (n_a * 0.25 + 1.0)).abs() < 1e-10);
        let imp = CollectiveMode::custom(gen.unit_vector(n_m)).unwrap();
        assert!((mode_decay_rate(&gen, &imp) - 1.25).abs() < 1e-10);
    }
}

#[test]
fn impurity_couples_to_the_cavity_mode_with_g() {
    for n_m in [1usize, 10, 450, 1000] {
        let (g, gen) = cavity(n_m);
        let jc = jc_from_physical(2 * n_m, &params(0.25, 1.0)).unwrap();
        let cav = collective_mode(&g, ModeKind::Cavity).unwrap().vector;
        let rad = collective_mode(&g, ModeKind::Radiant).unwrap().vector;
        let imp = gen.unit_vector(n_m);
        let coupling = gen.matrix_element(&imp, &cav);
        assert!((coupling - Complex64::new(0.0, -jc.g)).norm() < 1e-12 * jc.g.max(1.0));
        assert!((gen.matrix_element(&cav, &cav) + 0.5).norm() < 1e-12);
        assert!(gen.matrix_element(&imp, &rad).norm() < 1e-12);
        // The cavity mode is closed under G apart from the impurity.
        let gc = gen.applied(&cav);
        for j in 0..gen.dim() {
            let want = if j == n_m { coupling } else { -0.5 * cav[j] };
            assert!((gc[j] - want).norm() < 1e-12, "{n_m} {j}");
        }
    }
}

#[test]
fn cavity_excitation_decays_only_into_free_space() {
    let g = ChainGeometry::build_cavity_chain(50, 0.5, 0.75).unwrap().without_impurities();
    let gen = Generator::new(&g, &params(0.25, 1.0)).unwrap();
    let cav = collective_mode(&g, ModeKind::Cavity).unwrap().vector;
    let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
    let tr = evolve(&gen, &cav, &times).unwrap();
    for (t, p) in times.iter().zip(tr.projection(&cav)) {
        assert!((p - (-t).exp()).abs() < 1e-12, "{t}: {p}");
    }
}

#[test]
fn radiant_excitation_is_retrieved_into_the_waveguide() {
    let p = params(0.25, 1.0);
    for n_a in [10usize, 900] {
        let g = ChainGeometry::build_cavity_chain(n_a / 2, 0.5, 0.75).unwrap().without_impurities();
        let gen = Generator::new(&g, &p).unwrap();
        let rad = collective_mode(&g, ModeKind::Radiant).unwrap().vector;
        let budget = emission_budget(&gen, &rad, 1e3, 1e-16).unwrap();
        let eta = retrieval_efficiency(n_a, &p).unwrap();
        assert!((budget.waveguide - eta).abs() < 1e-6, "{n_a}: {budget:?} vs {eta}");
        assert!((budget.free_space - (1.0 - eta)).abs() < 1e-6);
    }
}

#[test]
fn large_cavity_splits_at_twice_g() {
    let p = params(0.25, 1.0);
    let g = ChainGeometry::build_cavity_chain(1500, 0.5, 0.75).unwrap();
    let gen = Generator::new(&g, &p).unwrap();
    let jc = jc_from_physical(3000, &p).unwrap();
    let peak = 2.0 * jc.g / p.gamma_total();
    let deltas: Vec<f64> = (-300..=300).map(|k| k as f64 * 0.05).collect();
    let imp = gen.unit_vector(1500);
    let pop: Vec<f64> = deltas
        .iter()
        .map(|&d| steady_state_weak_drive(&gen, p.to_rate(d), &imp, Solver::Structured).unwrap()[1500].norm_sqr())
        .collect();
    let peaks = wgqed::jc_model::local_maxima(&deltas, &pop);
    let mut top: Vec<_> = peaks.clone();
    top.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (a, b) = (top[0].0.max(top[1].0), top[0].0.min(top[1].0));
    assert!(rel(a, peak) < 0.05 && rel(-b, peak) < 0.05, "{a} {b} vs ±{peak}");
}

#[test]
fn splitting_survives_missing_mirror_atoms() {
    let p = params(0.25, 1.0);
    let full = ChainGeometry::build_cavity_chain(450, 0.5, 0.75).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let filling: f64 = rng.gen_range(0.5..=1.0);
        let sites: Vec<Site> = full
            .sites()
            .iter()
            .copied()
            .filter(|s| s.role == Role::Impurity || rng.gen::<f64>() < filling)
            .collect();
        let n_actual = sites.len() - 1;
        let g = ChainGeometry::new(sites).unwrap();
        let law = p.gamma_1d * (n_actual as f64).sqrt();
        let peak = law / p.gamma_total();
        let deltas: Vec<f64> = (-160..=160).map(|k| k as f64 * 0.01 * peak).collect();
        let s = driven_impurity_spectrum(&g, &p, &deltas, Solver::Structured).unwrap();
        let split = peak_splitting(&s).unwrap();
        worst = worst.max(rel(split, law));
        assert!(rel(split, law) < 0.05, "seed {seed}, fill {filling:.3}, N {n_actual}: {split} vs {law}");
    }
    assert!(worst > 0.0);
}

fn random_chain(positions: &[f64], impurity: usize) -> ChainGeometry {
    let mut z: Vec<f64> = positions.to_vec();
    z.sort_by(f64::total_cmp);
    z.dedup();
    let sites = z
        .iter()
        .enumerate()
        .map(|(j, &x)| Site::new(x, if j == impurity % z.len() { Role::Impurity } else { Role::Mirror }))
        .collect();
    ChainGeometry::new(sites).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_structure(
        positions in proptest::collection::vec(-20.0f64..20.0, 1..40),
        g1d in 0.01f64..3.0,
        gp in 0.0f64..2.0,
    ) {
        let g = random_chain(&positions, 0);
        let gen = Generator::new(&g, &params(g1d, gp)).unwrap();
        let n = gen.dim();
        let h = gen.h_dd();
        let d = gen.d_mat();
        for j in 0..n {
            for k in 0..n {
                prop_assert!((h[(j, k)] - h[(k, j)]).abs() <= 1e-14);
                prop_assert!((d[(j, k)] - d[(k, j)]).abs() <= 1e-14);
            }
        }
        let mut ev = d.self_adjoint_eigenvalues(Side::Lower).unwrap();
        ev.sort_by(|a, b| b.total_cmp(a));
        prop_assert!(*ev.last().unwrap() >= -1e-10 * g1d);
        if n > 2 {
            prop_assert!(ev[2].abs() <= 1e-10 * n as f64 * g1d);
        }
        // G = −i h − d/2 − Γ′/2.
        let dense = gen.no_jump();
        for j in 0..n {
            for k in 0..n {
                let mut want = Complex64::new(-0.5 * d[(j, k)], -h[(j, k)]);
                if j == k {
                    want -= 0.5 * gp;
                }
                prop_assert!((dense[(j, k)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn no_jump_norm_never_grows(
        positions in proptest::collection::vec(-5.0f64..5.0, 1..25),
        g1d in 0.01f64..2.0,
        gp in 0.0f64..1.0,
        start in 0usize..25,
    ) {
        let g = random_chain(&positions, start);
        let gen = Generator::new(&g, &params(g1d, gp)).unwrap();
        let c0 = gen.unit_vector(start % gen.dim());
        let times: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
        for m in [EvolveMethod::Dense, EvolveMethod::Structured] {
            let norms = evolve_with(&gen, &c0, &times, m).unwrap().norms();
            for w in norms.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{m:?} {w:?}");
            }
        }
    }
}
