use std::time::Instant;

use wgqed::jc_model::{jc_from_physical, peak_splitting, rabi_population_analytic};
use wgqed::spin_model::{collective_mode, evolve, driven_impurity_spectrum, Generator, ModeKind, Solver};
use wgqed::transfer_matrix::driven_impurity_spectrum_analytic;
use wgqed::{ChainGeometry, PhaseMode, PhysicalParams};

#[test]
fn full_cavity_follows_damped_rabi_oscillation() {
    let p = PhysicalParams::new(0.25, 1.0).unwrap();
    let start = Instant::now();
    let g = ChainGeometry::build_cavity_chain(450, 0.5, 0.75).unwrap();
    let gen = Generator::new(&g, &p).unwrap();
    let jc = jc_from_physical(900, &p).unwrap();
    let times: Vec<f64> = (0..=400).map(|k| k as f64 * 2.0 / p.gamma_total() / 400.0).collect();
    let tr = evolve(&gen, &gen.unit_vector(450), &times).unwrap();
    let reference = rabi_population_analytic(&jc, &times);
    let cav = collective_mode(&g, ModeKind::Cavity).unwrap().vector;
    let pe = tr.population(450);
    let pc = tr.projection(&cav);
    let mut worst = 0.0f64;
    for i in 0..times.len() {
        worst = worst.max((pe[i] - reference.states[i][0].norm_sqr()).abs());
        worst = worst.max((pc[i] - reference.states[i][1].norm_sqr()).abs());
    }
    assert!(worst <= 1e-3, "max deviation {worst}");
    assert!(worst <= 1e-9, "reduction should be exact, got {worst}");
    assert!(start.elapsed().as_secs_f64() < 10.0, "{:?}", start.elapsed());
}

#[test]
fn splitting_follows_square_root_law_for_large_cavities() {
    let p = PhysicalParams::new(0.25, 1.0).unwrap();
    for n_a in [900usize, 3000] {
        let g = ChainGeometry::build_cavity_chain(n_a / 2, 0.5, 0.75).unwrap();
        let law = p.gamma_1d * (n_a as f64).sqrt();
        let deltas: Vec<f64> = (-1500..=1500).map(|k| k as f64 * 0.02).collect();
        let a = driven_impurity_spectrum_analytic(&g, &p, &deltas, PhaseMode::Exact).unwrap();
        let s = driven_impurity_spectrum(&g, &p, &deltas, Solver::Structured).unwrap();
        for t in [a, s] {
            let split = peak_splitting(&t).unwrap();
            assert!((split / law - 1.0).abs() < 0.05, "{n_a}: {split} vs {law}");
        }
    }
}
