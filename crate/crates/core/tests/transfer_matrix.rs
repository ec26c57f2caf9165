use num_complex::Complex64;
use proptest::prelude::*;
use wgqed::transfer_matrix::{
    chain_response, chain_spectrum, driven_impurity_spectrum_analytic, finesse, single_atom_coeffs, TransferMatrix,
};
use wgqed::{ChainGeometry, PhaseMode, PhysicalParams, Role, Site};

fn params(g1d: f64, gp: f64) -> PhysicalParams {
    PhysicalParams::new(g1d, gp).unwrap()
}

/// Brute-force reference: multiply explicit 2x2 matrices atom by atom with
/// `exp` from the standard library for the phases.
fn naive_chain(n: usize, spacing: f64, p: &PhysicalParams, delta: f64, k: f64) -> (f64, f64) {
    let r1 = single_atom_coeffs(p.to_rate(delta), p);
    let atom = [[(r1.t * r1.t - r1.r * r1.r) / r1.t, r1.r / r1.t], [-r1.r / r1.t, 1.0 / r1.t]];
    let ph = Complex64::new(0.0, 2.0 * std::f64::consts::PI * spacing * k).exp();
    let mut m = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
    for j in 0..n {
        let mut cell = atom;
        if j > 0 {
            cell[0][0] *= ph;
            cell[1][0] *= ph;
            cell[0][1] /= ph;
            cell[1][1] /= ph;
        }
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                out[a][b] = cell[a][0] * m[0][b] + cell[a][1] * m[1][b];
            }
        }
        m = out;
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    ((m[1][0] / m[1][1]).norm_sqr(), (det / m[1][1]).norm_sqr())
}

#[test]
fn matches_naive_product() {
    let p = params(0.3, 1.0).with_omega_a_over_gamma(1e3).unwrap();
    let g = ChainGeometry::build_mirror_chain(57, 0.5).unwrap();
    for delta in [-40.0, -3.0, 0.0, 0.9, 12.0] {
        let k = p.wavenumber_turns(p.to_rate(delta), PhaseMode::Exact);
        let (r, t) = naive_chain(57, 0.5, &p, delta, k);
        let row = chain_spectrum(&g, &p, &[delta], PhaseMode::Exact).unwrap().rows[0];
        assert!((row.reflectance - r).abs() < 1e-11, "{delta}");
        assert!((row.transmittance - t).abs() < 1e-11, "{delta}");
    }
}

#[test]
fn finesse_anchors() {
    let p = params(0.25, 1.0);
    let f450 = finesse(&ChainGeometry::build_mirror_chain(450, 0.5).unwrap(), &p, 0.0).unwrap();
    let f1500 = finesse(&ChainGeometry::build_mirror_chain(1500, 0.5).unwrap(), &p, 0.0).unwrap();
    assert!((166.0..=186.0).contains(&f450), "{f450}");
    assert!((560.0..=620.0).contains(&f1500), "{f1500}");
}

#[test]
fn leading_order_mirror_leakage() {
    // 1 - R = (2x + 1)/(1 + x)^2 with x = N_M Γ1D/Γ′; the leading term 2/x
    // carries a relative error 3/(2x), so 2% holds from x = 75 on.
    let p = params(0.25, 1.0);
    for n in [300usize, 400, 1000, 4000] {
        let x = n as f64 * 0.25;
        let g = ChainGeometry::build_mirror_chain(n, 0.5).unwrap();
        let r = chain_spectrum(&g, &p, &[0.0], PhaseMode::Approx).unwrap().rows[0].reflectance;
        let exact = (2.0 * x + 1.0) / (1.0 + x).powi(2);
        assert!(((1.0 - r) / exact - 1.0).abs() < 1e-9);
        assert!(((1.0 - r) / (2.0 / x) - 1.0).abs() < 0.02, "{n}");
    }
    let g = ChainGeometry::build_mirror_chain(200, 0.5).unwrap();
    let r = chain_spectrum(&g, &p, &[0.0], PhaseMode::Approx).unwrap().rows[0].reflectance;
    let off = 1.0 - (1.0 - r) / (2.0 / 50.0);
    assert!((off - 152.0 / 5202.0).abs() < 1e-9, "{off}");
}

#[test]
fn deep_band_gap_saturation() {
    // Inside the gap but off resonance the leakage stops falling with N_M.
    let p = params(0.25, 1.0);
    let scale = (1.0 / (p.omega_a() * p.gamma_1d)).sqrt();
    for delta in [300.0, 1000.0] {
        let leak = |n: usize| {
            let g = ChainGeometry::build_mirror_chain(n, 0.5).unwrap();
            1.0 - chain_spectrum(&g, &p, &[delta], PhaseMode::Exact).unwrap().rows[0].reflectance
        };
        let (a, b) = (leak(100_000), leak(200_000));
        assert!((a / b - 1.0).abs() < 0.01, "{delta}: {a} {b}");
        assert!(a > 0.1 * scale && a < 10.0 * scale, "{delta}: 1-R = {a}, scale {scale}");
    }
    // Exactly on resonance there is no dispersion and no floor.
    let g = ChainGeometry::build_mirror_chain(100_000, 0.5).unwrap();
    let r = chain_spectrum(&g, &p, &[0.0], PhaseMode::Exact).unwrap().rows[0].reflectance;
    assert!(((1.0 - r) / (2.0 / 25_000.0) - 1.0).abs() < 1e-3);
}

#[test]
fn exact_and_approx_phases_agree_near_resonance() {
    let p = params(0.25, 1.0);
    let deltas: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.25).collect();
    for n in [10usize, 100, 1000] {
        let g = ChainGeometry::build_mirror_chain(n, 0.5).unwrap();
        let a = chain_spectrum(&g, &p, &deltas, PhaseMode::Approx).unwrap();
        let e = chain_spectrum(&g, &p, &deltas, PhaseMode::Exact).unwrap();
        for (ra, re) in a.rows.iter().zip(&e.rows) {
            assert!((ra.reflectance / re.reflectance - 1.0).abs() < 1e-4, "{n} {ra:?} {re:?}");
            assert!((ra.loss / re.loss - 1.0).abs() < 1e-4, "{n} {ra:?} {re:?}");
            if n <= 100 {
                assert!((ra.transmittance / re.transmittance - 1.0).abs() < 1e-4, "{n} {ra:?} {re:?}");
            }
        }
    }
}

#[test]
fn weak_transmission_is_phase_sensitive() {
    // At N_M = 1000 and δ = -10 the transmitted intensity is 2.5e-3 and the
    // accumulated dispersion shifts it by 0.4%. Reference values from a
    // 40-digit evaluation of the same matrix product.
    let p = params(0.25, 1.0);
    let g = ChainGeometry::build_mirror_chain(1000, 0.5).unwrap();
    let a = chain_spectrum(&g, &p, &[-10.0], PhaseMode::Approx).unwrap().rows[0];
    let e = chain_spectrum(&g, &p, &[-10.0], PhaseMode::Exact).unwrap().rows[0];
    assert!((a.transmittance / 0.002489817083549394566736 - 1.0).abs() < 1e-10);
    assert!((e.transmittance / 0.002480267601568754159438 - 1.0).abs() < 1e-10);
    assert!((a.reflectance / 0.989593435432986711739349 - 1.0).abs() < 1e-10);
    assert!((e.reflectance / 0.989602885125864815111048 - 1.0).abs() < 1e-10);
}

fn find_peak(deltas: &[f64], ys: &[f64], lo: f64, hi: f64) -> f64 {
    let (i, _) = deltas
        .iter()
        .zip(ys)
        .enumerate()
        .filter(|(_, (d, _))| **d >= lo && **d <= hi)
        .max_by(|a, b| a.1 .1.total_cmp(b.1 .1))
        .unwrap();
    // Parabolic refinement through the neighbours.
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let h = deltas[i + 1] - deltas[i];
    deltas[i] + 0.5 * h * (y0 - y2) / (y0 - 2.0 * y1 + y2)
}

#[test]
fn cavity_normal_mode_splitting() {
    let p = params(0.25, 1.0);
    let g = ChainGeometry::build_cavity_chain(1500, 0.5, 0.75).unwrap();
    let deltas: Vec<f64> = (-3000..=3000).map(|k| k as f64 * 0.01).collect();
    let t = driven_impurity_spectrum_analytic(&g, &p, &deltas, PhaseMode::Exact).unwrap();
    let ic = t.intracavity().unwrap();
    let plus = find_peak(&deltas, &ic, 1.0, 30.0);
    let minus = find_peak(&deltas, &ic, -30.0, -1.0);
    let want = 3000f64.sqrt() * 0.2;
    assert!((plus / want - 1.0).abs() < 0.05, "{plus} vs {want}");
    assert!((minus / -want - 1.0).abs() < 0.05, "{minus} vs {want}");
    let centre = ic[3000];
    let top = ic.iter().cloned().fold(0.0, f64::max);
    assert!(centre < 0.1 * top, "valley {centre} vs peak {top}");
    for row in &t.rows {
        assert!((row.reflectance + row.transmittance + row.loss - 1.0).abs() < 1e-12);
        assert!(row.transmitted.unwrap() <= row.intracavity.unwrap());
    }
}

#[test]
fn symmetric_chain_reflects_equally_from_both_sides() {
    let p = params(0.4, 1.0);
    let g = ChainGeometry::build_mirror_chain(33, 0.5).unwrap();
    for delta in [-5.0, 0.0, 0.3, 8.0] {
        let port = chain_response(&g, &p, p.to_rate(delta), PhaseMode::Exact).unwrap();
        assert!((port.r_left.norm_sqr() - port.r_right.norm_sqr()).abs() < 1e-12);
    }
}

#[test]
fn transparent_sites_are_ignored() {
    let p = params(0.25, 1.0);
    let a = ChainGeometry::build_mirror_chain(5, 0.5).unwrap();
    let mut sites = a.sites().to_vec();
    sites.push(Site::new(10.3, Role::Transparent));
    let b = ChainGeometry::new(sites).unwrap();
    let ta = chain_spectrum(&a, &p, &[0.0, 1.7], PhaseMode::Exact).unwrap();
    let tb = chain_spectrum(&b, &p, &[0.0, 1.7], PhaseMode::Exact).unwrap();
    assert_eq!(ta, tb);
}

#[test]
fn propagation_is_unimodular() {
    for d in [0.0, 0.1, 0.5, 3.3] {
        let m = TransferMatrix::propagation(d, 1.0 + 1e-5);
        assert!((m.det().norm() - 1.0).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_accounted(
        g1d in 0.01f64..3.0,
        gp in 0.0f64..2.0,
        n in 1usize..300,
        spacing in 0.1f64..2.0,
        delta in -100.0f64..100.0,
    ) {
        prop_assume!(g1d + gp > 0.05);
        let p = PhysicalParams::new(g1d, gp).unwrap().with_omega_a_over_gamma(1e4).unwrap();
        let g = ChainGeometry::build_mirror_chain(n, spacing).unwrap();
        let row = chain_spectrum(&g, &p, &[delta], PhaseMode::Exact).unwrap().rows[0];
        prop_assert!((row.reflectance + row.transmittance + row.loss - 1.0).abs() < 1e-12);
        prop_assert!(row.loss > -1e-10);
        if gp == 0.0 {
            prop_assert!(row.loss.abs() < 1e-10);
        }
    }

    #[test]
    fn composition_is_associative(a in -3.0f64..3.0, b in 0.0f64..2.0, c in -3.0f64..3.0) {
        let p = params(0.25, 1.0);
        let x = TransferMatrix::from_scatter(single_atom_coeffs(a, &p)).unwrap();
        let y = TransferMatrix::propagation(b, 1.0);
        let z = TransferMatrix::from_scatter(single_atom_coeffs(c, &p)).unwrap();
        let l = x.then(&y).then(&z);
        let r = x.then(&y.then(&z));
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((l.m[i][j] - r.m[i][j]).norm() < 1e-12);
            }
        }
    }
}
