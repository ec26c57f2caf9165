//! Pipelines producing the plot-ready data for each figure panel.
//!
//! All use Γ1D = Γ′/4 and ω_A/Γ = 5.4·10⁷ unless a panel states otherwise,
//! and ignore the physical parameters of the run config.

use rayon::prelude::*;

use wgqed::jc_model::{jc_from_physical, rabi_population_analytic};
use wgqed::spin_model::{
    driven_impurity_spectrum, evolve_with, local_field, reconstruct_fields, steady_state_weak_drive,
    EvolveMethod, Generator, GuidedInput, Solver,
};
use wgqed::state_transfer::{default_duration, LambdaSystem, PulseSchedule, TransferModel};
use wgqed::table::{fmt_csv, write_csv};
use wgqed::transfer_matrix::{chain_spectrum, driven_impurity_spectrum_analytic, finesse, SpectrumTable};
use wgqed::{ChainGeometry, PhaseMode, PhysicalParams, Role};

use crate::commands::{normal_modes, splitting_grid, transfer_optimum};
use crate::config::{ExperimentConfig, GeometrySpec, TransferModelKind};
use crate::error::{CliError, CliResult};
use crate::grid::GridSpec;
use crate::output::Artifact;

pub const FIGURES: [&str; 10] =
    ["fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig4c", "fig4c_models"];

fn figure_params() -> PhysicalParams {
    PhysicalParams::new(0.25, 1.0).expect("valid figure parameters")
}

pub fn run_figure(name: &str) -> CliResult<Vec<Artifact>> {
    match name {
        "fig2a" => fig2a(),
        "fig2b" => fig2b(),
        "fig2c" => fig2c(),
        "fig3a" => fig3ab("fig3a.csv", true),
        "fig3b" => fig3ab("fig3b.csv", false),
        "fig3c" => fig3c(),
        "fig3d" => fig3d(),
        "fig3e" => fig3e(),
        "fig4c" => fig4c(),
        "fig4c_models" => fig4c_models(),
        other => Err(CliError::Config(format!("unknown figure '{other}' (known: {})", FIGURES.join(", ")))),
    }
}

fn row(values: &[f64]) -> Vec<String> {
    values.iter().map(|&v| fmt_csv(v)).collect()
}

fn error_code(r: &CliResult<Vec<f64>>) -> String {
    r.as_ref().err().map_or(String::new(), |e| e.code().to_string())
}

/// Splits a detuning grid into chunks evaluated in parallel.
fn par_spectrum<F>(deltas: &[f64], f: F) -> CliResult<SpectrumTable>
where
    F: Fn(&[f64]) -> wgqed::Result<SpectrumTable> + Sync,
{
    let parts = deltas.par_chunks(64).map(&f).collect::<wgqed::Result<Vec<_>>>()?;
    let half_linewidth = parts[0].half_linewidth;
    Ok(SpectrumTable { half_linewidth, rows: parts.into_iter().flat_map(|t| t.rows).collect() })
}

/// Mirror reflectance for N_M = 10³, 10⁴, 10⁵ with exact phases.
fn fig2a() -> CliResult<Vec<Artifact>> {
    let p = figure_params();
    let deltas = GridSpec::linear(-5000.0, 5000.0, 4001).resolve()?;
    let tables = [1_000usize, 10_000, 100_000]
        .par_iter()
        .map(|&n| {
            let g = ChainGeometry::build_mirror_chain(n, 0.5)?;
            Ok((n, chain_spectrum(&g, &p, &deltas, PhaseMode::Exact)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let csv = write_csv(
        &["N_M", "delta", "R", "T", "L"],
        tables.iter().flat_map(|(n, t)| {
            t.rows.iter().map(move |r| row(&[*n as f64, r.delta, r.reflectance, r.transmittance, r.loss]))
        }),
    );
    Ok(vec![Artifact::new("fig2a.csv", csv)])
}

/// Finesse π/(1 − R) versus N_M at δ = 0, 30, 100, 300, 1000.
fn fig2b() -> CliResult<Vec<Artifact>> {
    let p = figure_params();
    let mut sizes: Vec<usize> = GridSpec::Geometric { from: 10.0, to: 1e6, points: 61 }
        .resolve()?
        .iter()
        .map(|x| x.round() as usize)
        .collect();
    sizes.dedup();
    let cells: Vec<(f64, usize)> =
        [0.0, 30.0, 100.0, 300.0, 1000.0].iter().flat_map(|&d| sizes.iter().map(move |&n| (d, n))).collect();
    let results: Vec<CliResult<Vec<f64>>> = cells
        .par_iter()
        .map(|&(d, n)| Ok(vec![finesse(&ChainGeometry::build_mirror_chain(n, 0.5)?, &p, d)?]))
        .collect();
    let csv = write_csv(
        &["delta", "N_M", "finesse", "error"],
        cells.iter().zip(&results).map(|(&(d, n), r)| {
            let mut out = row(&[d, n as f64, r.as_ref().map_or(f64::NAN, |v| v[0])]);
            out.push(error_code(r));
            out
        }),
    );
    Ok(vec![Artifact::new("fig2b.csv", csv)])
}

/// Site-number coordinate: mirror atom k on either side sits at ±k and the
/// impurity at 0, linear in between.
fn site_coordinate(z: f64, d_i: f64, d_m: f64) -> f64 {
    if z.abs() <= d_i {
        z / d_i
    } else {
        z.signum() * (1.0 + (z.abs() - d_i) / d_m)
    }
}

/// Intra-cavity intensity profile with the impurity driven on resonance,
/// N_A = 900.
fn fig2c() -> CliResult<Vec<Artifact>> {
    let p = figure_params();
    let (n_side, d_m, d_i) = (450usize, 0.5, 0.75);
    let geom = ChainGeometry::build_cavity_chain(n_side, d_m, d_i)?;
    let gen = Generator::new(&geom, &p)?;
    let imp = n_side;
    let amps = steady_state_weak_drive(&gen, 0.0, &gen.unit_vector(imp), Solver::Auto)?;
    let reference = 2.0 * p.gamma_1d / p.gamma_total().powi(2);
    let none = GuidedInput::none();

    let reach = d_i + 40.0 * d_m;
    let zs = GridSpec::linear(-reach, reach, 4001).resolve()?;
    let field: Vec<Vec<String>> = zs
        .par_iter()
        .map(|&z| {
            let (r, l) = reconstruct_fields(&gen, &amps, none, z);
            row(&[site_coordinate(z, d_i, d_m), z, (r + l).norm_sqr() / reference])
        })
        .collect();
    let sites: Vec<Vec<String>> = gen
        .sites()
        .iter()
        .enumerate()
        .map(|(slot, s)| {
            let local = local_field(&gen, &amps, none, slot);
            let role = if s.role == Role::Impurity { 1.0 } else { 0.0 };
            row(&[site_coordinate(s.position, d_i, d_m), s.position, role, local.norm_sqr() / reference])
        })
        .collect();
    Ok(vec![
        Artifact::new("fig2c_field.csv", write_csv(&["j", "z", "intensity"], field)),
        Artifact::new("fig2c_sites.csv", write_csv(&["j", "z", "impurity", "intensity"], sites)),
    ])
}

/// Driven-impurity spectra at N_A = 3000: `Ic` (panel a) or `Tc` (panel b)
/// from both backends.
fn fig3ab(name: &str, intracavity: bool) -> CliResult<Vec<Artifact>> {
    let p = figure_params();
    let geom = ChainGeometry::build_cavity_chain(1500, 0.5, 0.75)?;
    let deltas = GridSpec::linear(-30.0, 30.0, 1201).resolve()?;
    let tm = par_spectrum(&deltas, |d| driven_impurity_spectrum_analytic(&geom, &p, d, PhaseMode::Exact))?;
    let spin = par_spectrum(&deltas, |d| driven_impurity_spectrum(&geom, &p, d, Solver::Structured))?;
    let pick = |t: &SpectrumTable| if intracavity { t.intracavity() } else { t.rows.iter().map(|r| r.transmitted).collect() };
    let (a, b) = (pick(&tm).unwrap_or_default(), pick(&spin).unwrap_or_default());
    let header = if intracavity { ["delta", "Ic", "Ic_spin"] } else { ["delta", "Tc", "Tc_spin"] };
    let csv = write_csv(&header, deltas.iter().enumerate().map(|(i, &d)| row(&[d, a[i], b[i]])));
    Ok(vec![Artifact::new(name, csv)])
}

/// Normal-mode peak positions versus N_A for Γ1D = Γ′/4 and 2Γ′/3.
fn fig3c() -> CliResult<Vec<Artifact>> {
    let mut sizes: Vec<usize> = GridSpec::Geometric { from: 10.0, to: 3e5, points: 46 }
        .resolve()?
        .iter()
        .map(|x| 2 * (0.5 * x).round() as usize)
        .collect();
    sizes.dedup();
    let cells: Vec<(f64, usize)> = [0.25, 2.0 / 3.0].iter().flat_map(|&g| sizes.iter().map(move |&n| (g, n))).collect();
    let results: Vec<CliResult<Vec<f64>>> = cells
        .par_iter()
        .map(|&(g1d, n_a)| {
            let p = PhysicalParams::new(g1d, 1.0)?;
            let geom = ChainGeometry::build_cavity_chain(n_a / 2, 0.5, 0.75)?;
            let deltas = splitting_grid(&p, n_a).resolve()?;
            let t = driven_impurity_spectrum_analytic(&geom, &p, &deltas, PhaseMode::Exact)?;
            let (lo, hi) = normal_modes(&t)?;
            Ok(vec![lo, hi])
        })
        .collect();
    let csv = write_csv(
        &["gamma_1d", "NA", "omega_minus", "omega_plus", "law", "error"],
        cells.iter().zip(&results).map(|(&(g1d, n_a), r)| {
            let (lo, hi) = r.as_ref().map_or((f64::NAN, f64::NAN), |v| (v[0], v[1]));
            let mut out = row(&[g1d, n_a as f64, lo, hi, 0.5 * g1d * (n_a as f64).sqrt()]);
            out.push(error_code(r));
            out
        }),
    );
    Ok(vec![Artifact::new("fig3c.csv", csv)])
}

/// `Ic` versus the impurity detuning δ_I for several mirror-impurity
/// offsets δ_AI, N_A = 3000.
fn fig3d() -> CliResult<Vec<Artifact>> {
    let p = figure_params();
    let base = ChainGeometry::build_cavity_chain(1500, 0.5, 0.75)?;
    let offsets = GridSpec::linear(-20.0, 20.0, 17).resolve()?;
    let delta_i = GridSpec::linear(-30.0, 30.0, 601).resolve()?;
    let blocks = offsets
        .par_iter()
        .map(|&d_ai| {
            // ω_I − ω_A = −δ_AI Γ/2, and the probe sits at δ_A = δ_I − δ_AI.
            let geom = base.clone().with_detuning_offset(1500, -p.to_rate(d_ai))?;
            let deltas: Vec<f64> = delta_i.iter().map(|d| d - d_ai).collect();
            let t = driven_impurity_spectrum_analytic(&geom, &p, &deltas, PhaseMode::Exact)?;
            let ic = t.intracavity().unwrap_or_default();
            Ok(delta_i.iter().zip(ic).map(|(&d, y)| row(&[d_ai, d, y])).collect::<Vec<_>>())
        })
        .collect::<CliResult<Vec<_>>>()?;
    let csv = write_csv(&["delta_AI", "delta_I", "Ic"], blocks.into_iter().flatten());
    Ok(vec![Artifact::new("fig3d.csv", csv)])
}

/// Vacuum Rabi oscillation of the impurity for N_A = 900 against the
/// damped Jaynes-Cummings solution and free-space decay.
fn fig3e() -> CliResult<Vec<Artifact>> {
    let p = figure_params();
    let geom = ChainGeometry::build_cavity_chain(450, 0.5, 0.75)?;
    let gen = Generator::new(&geom, &p)?;
    let gamma = p.gamma_total();
    let times = GridSpec::linear(0.0, 5.0 / gamma, 501).resolve()?;
    let tr = evolve_with(&gen, &gen.unit_vector(450), &times, EvolveMethod::Auto)?;
    let jc = rabi_population_analytic(&jc_from_physical(900, &p)?, &times).population(0);
    let pe = tr.population(450);
    let csv = write_csv(
        &["t", "gamma_t", "P_e", "P_e_jc", "P_free"],
        times.iter().enumerate().map(|(i, &t)| row(&[t, gamma * t, pe[i], jc[i], (-gamma * t).exp()])),
    );
    Ok(vec![Artifact::new("fig3e.csv", csv)])
}

fn transfer_config(ratio: f64, n_a: usize, model: TransferModelKind) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    cfg.params = PhysicalParams::new(ratio, 1.0)?;
    cfg.geometry = Some(GeometrySpec::TwoImpurity { n_m_outer: n_a / 2, gap_sites: 10 });
    cfg.transfer.model = model;
    Ok(cfg)
}

/// Optimized transfer fidelity of the five-level model over Γ1D/Γ′ and N_A.
fn fig4c() -> CliResult<Vec<Artifact>> {
    let ratios = GridSpec::values(vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]).resolve()?;
    let sizes = [100usize, 200, 500, 1000, 2000, 3000];
    let cells: Vec<(f64, usize)> = ratios.iter().flat_map(|&r| sizes.iter().map(move |&n| (r, n))).collect();
    let results: Vec<CliResult<Vec<f64>>> = cells
        .par_iter()
        .map(|&(ratio, n_a)| {
            let cfg = transfer_config(ratio, n_a, TransferModelKind::Reduced)?;
            let jc = jc_from_physical(n_a, &cfg.params)?;
            let (omega0, result, _) = transfer_optimum(&cfg, &TransferModel::Reduced(LambdaSystem::from_jc(&jc)))?;
            Ok(vec![jc.cooperativity, omega0, result.fidelity, 1.0 - result.fidelity])
        })
        .collect();
    let csv = write_csv(
        &["gamma1d_ratio", "NA", "C", "omega0_star", "fidelity", "one_minus_F", "error"],
        cells.iter().zip(&results).map(|(&(ratio, n_a), r)| {
            let v = r.as_ref().map_or(vec![f64::NAN; 4], Clone::clone);
            let mut out = row(&[ratio, n_a as f64, v[0], v[1], v[2], v[3]]);
            out.push(error_code(r));
            out
        }),
    );
    Ok(vec![Artifact::new("fig4c.csv", csv)])
}

/// Five-level model against the full chain at N_A = 100: each optimized on
/// its own, plus the five-level model with the waveguide coupling between
/// the impurities.
fn fig4c_models() -> CliResult<Vec<Artifact>> {
    let n_a = 100;
    let ratios = [0.05, 0.25, 1.0];
    let rows = ratios
        .par_iter()
        .map(|&ratio| {
            let reduced_cfg = transfer_config(ratio, n_a, TransferModelKind::Reduced)?;
            let jc = jc_from_physical(n_a, &reduced_cfg.params)?;
            let sys = LambdaSystem::from_jc(&jc);
            let (w_red, f_red, _) = transfer_optimum(&reduced_cfg, &TransferModel::Reduced(sys))?;
            let full_cfg = transfer_config(ratio, n_a, TransferModelKind::Full)?;
            let full = TransferModel::Full { geom: full_cfg.geometry()?, params: full_cfg.params };
            let (w_full, f_full, _) = transfer_optimum(&full_cfg, &full)?;
            let schedule = PulseSchedule::counter_intuitive(w_red, default_duration(jc.g))?;
            let full_at_red = full.fidelity(&schedule, 1000)?.fidelity;
            let collective = TransferModel::Reduced(sys.with_collective_decay(reduced_cfg.params.gamma_1d)?);
            let coll_at_red = collective.fidelity(&schedule, 1000)?.fidelity;
            Ok(row(&[
                ratio,
                n_a as f64,
                jc.cooperativity,
                w_red,
                f_red.fidelity,
                w_full,
                f_full.fidelity,
                full_at_red,
                coll_at_red,
            ]))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let csv = write_csv(
        &[
            "gamma1d_ratio",
            "NA",
            "C",
            "omega0_reduced",
            "fidelity_reduced",
            "omega0_full",
            "fidelity_full",
            "fidelity_full_at_reduced",
            "fidelity_collective_at_reduced",
        ],
        rows,
    );
    Ok(vec![Artifact::new("fig4c_models.csv", csv)])
}

/// Runs the named figures (all when `names` is empty) in a fixed order.
pub fn run_figures(names: &[String]) -> CliResult<Vec<Artifact>> {
    let list: Vec<&str> = if names.is_empty() { FIGURES.to_vec() } else { names.iter().map(String::as_str).collect() };
    for n in &list {
        if !FIGURES.contains(n) {
            return Err(CliError::Config(format!("unknown figure '{n}' (known: {})", FIGURES.join(", "))));
        }
    }
    let mut out = Vec::new();
    for n in list {
        out.extend(run_figure(n)?);
    }
    Ok(out)
}
