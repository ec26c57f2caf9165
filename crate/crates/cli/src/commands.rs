//! Direct runs of the single-configuration commands, and the scalar
//! metrics each of them contributes to a sweep row.

use std::f64::consts::PI;

use wgqed::jc_model::{jc_from_physical, local_maxima, rabi_population_analytic};
use wgqed::spin_model::{
    collective_mode, driven_impurity_spectrum, emission_budget, evolve_with, mode_decay_rate,
    retrieval_efficiency, weak_drive_spectrum, CollectiveMode, Generator, ModeKind,
};
use wgqed::state_transfer::{
    optimize_omega0, LambdaSystem, PulseSchedule, TransferModel, TransferResult,
};
use wgqed::table::{fmt_csv, write_csv};
use wgqed::transfer_matrix::{chain_spectrum, driven_impurity_spectrum_analytic, SpectrumTable};
use wgqed::{ChainGeometry, PhysicalParams, Role};

use crate::config::{Backend, Command, Drive, ExperimentConfig, GeometrySpec, InitialState, TransferModelKind};
use crate::error::{CliError, CliResult};
use crate::grid::GridSpec;
use crate::output::Artifact;

/// Named scalar results of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub columns: Vec<&'static str>,
    pub values: Vec<f64>,
}

impl Metrics {
    pub fn to_csv(&self) -> String {
        write_csv(&self.columns, [self.values.iter().map(|&v| fmt_csv(v)).collect()])
    }
}

/// Column names of `target` for a given configuration, known before any
/// evaluation so failed sweep cells can still be laid out.
pub fn metric_columns(cfg: &ExperimentConfig) -> CliResult<Vec<&'static str>> {
    Ok(match cfg.command {
        Command::Spectrum => match cfg.drive {
            Drive::Probe => vec!["delta", "R", "T", "L", "finesse"],
            Drive::Impurity => vec!["delta", "R", "T", "L", "finesse", "Ic", "Tc"],
        },
        Command::Cavity => vec![
            "NA",
            "g",
            "kappa",
            "gamma",
            "C",
            "finesse",
            "omega_minus",
            "omega_plus",
            "splitting",
            "splitting_law",
        ],
        Command::Modes => vec![
            "NA",
            "cavity_waveguide_rate",
            "cavity_decay",
            "radiant_decay",
            "radiant_expected",
            "impurity_decay",
            "impurity_expected",
            "retrieval",
            "retrieval_dynamic",
        ],
        Command::Transfer => vec!["gamma1d_ratio", "NA", "C", "omega0_star", "fidelity", "one_minus_F"],
        other => {
            return Err(CliError::Config(format!("{} does not produce scalar metrics", other.name())));
        }
    })
}

pub fn metrics(cfg: &ExperimentConfig) -> CliResult<Metrics> {
    let columns = metric_columns(cfg)?;
    let values = match cfg.command {
        Command::Spectrum => spectrum_point(cfg)?,
        Command::Cavity => cavity_metrics(cfg)?.0,
        Command::Modes => modes_metrics(cfg)?,
        Command::Transfer => transfer_metrics(cfg)?.0,
        _ => unreachable!("metric_columns rejects the other commands"),
    };
    debug_assert_eq!(columns.len(), values.len());
    Ok(Metrics { columns, values })
}

/// Runs one non-sweep, non-figure command.
pub fn run_single(cfg: &ExperimentConfig) -> CliResult<Vec<Artifact>> {
    match cfg.command {
        Command::Spectrum => {
            let table = spectrum_table(cfg, &cfg.deltas()?)?;
            Ok(vec![Artifact::new("spectrum.csv", table.to_csv())])
        }
        Command::Cavity => {
            let (values, table) = cavity_metrics(cfg)?;
            let row = Metrics { columns: metric_columns(cfg)?, values };
            Ok(vec![Artifact::new("cavity.csv", row.to_csv()), Artifact::new("cavity_spectrum.csv", table.to_csv())])
        }
        Command::Dynamics => Ok(vec![Artifact::new("dynamics.csv", dynamics_csv(cfg)?)]),
        Command::Modes => Ok(vec![Artifact::new("modes.csv", metrics(cfg)?.to_csv())]),
        Command::Transfer => {
            let (values, schedule) = transfer_metrics(cfg)?;
            let row = Metrics { columns: metric_columns(cfg)?, values };
            Ok(vec![
                Artifact::new("transfer.csv", row.to_csv()),
                Artifact::new("schedule.csv", schedule.to_csv(cfg.transfer.schedule_points)),
            ])
        }
        Command::Sweep | Command::Figures => {
            Err(CliError::Config(format!("{} is not a single run", cfg.command.name())))
        }
    }
}

pub fn spectrum_table(cfg: &ExperimentConfig, deltas: &[f64]) -> CliResult<SpectrumTable> {
    let geom = cfg.geometry()?;
    let p = &cfg.params;
    Ok(match (cfg.drive, cfg.backend) {
        (Drive::Probe, Backend::TransferMatrix) => chain_spectrum(&geom, p, deltas, cfg.phase_mode)?,
        (Drive::Probe, Backend::SpinModel) => weak_drive_spectrum(&geom, p, deltas, cfg.solver)?,
        (Drive::Impurity, Backend::TransferMatrix) => {
            driven_impurity_spectrum_analytic(&geom, p, deltas, cfg.phase_mode)?
        }
        (Drive::Impurity, Backend::SpinModel) => driven_impurity_spectrum(&geom, p, deltas, cfg.solver)?,
    })
}

fn spectrum_point(cfg: &ExperimentConfig) -> CliResult<Vec<f64>> {
    let table = spectrum_table(cfg, &[cfg.delta])?;
    let row = &table.rows[0];
    let finesse = if row.reflectance < 1.0 { PI / (1.0 - row.reflectance) } else { f64::INFINITY };
    let mut out = vec![row.delta, row.reflectance, row.transmittance, row.loss, finesse];
    if cfg.drive == Drive::Impurity {
        out.push(row.intracavity.unwrap_or(f64::NAN));
        out.push(row.transmitted.unwrap_or(f64::NAN));
    }
    Ok(out)
}

fn count_mirrors(geom: &ChainGeometry) -> usize {
    geom.count(Role::Mirror)
}

/// The mirror atoms left of the first impurity, as a chain of their own.
fn left_mirror(geom: &ChainGeometry) -> CliResult<ChainGeometry> {
    let imp = geom
        .sites()
        .iter()
        .find(|s| s.role == Role::Impurity)
        .ok_or_else(|| wgqed::Error::UnsupportedGeometry("no impurity".into()))?
        .position;
    let sites: Vec<_> = geom.sites().iter().filter(|s| s.role == Role::Mirror && s.position < imp).copied().collect();
    Ok(ChainGeometry::new(sites)?)
}

/// Default δ grid that resolves both normal-mode peaks of a cavity of
/// `n_a` mirror atoms.
pub fn splitting_grid(params: &PhysicalParams, n_a: usize) -> GridSpec {
    let peak = 0.5 * params.gamma_1d * (n_a as f64).sqrt() / params.half_linewidth();
    let span = 2.0 * peak + 10.0;
    GridSpec::linear(-span, span, 4001)
}

/// Positions (rate units) of the two highest maxima of `Ic`, ascending.
pub fn normal_modes(table: &SpectrumTable) -> CliResult<(f64, f64)> {
    let ys = table.intracavity().ok_or_else(|| CliError::Config("spectrum has no Ic column".into()))?;
    let mut peaks = local_maxima(&table.deltas(), &ys);
    if peaks.len() < 2 {
        return Err(wgqed::Error::NoSplitting.into());
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (a, b) = (peaks[0].0 * table.half_linewidth, peaks[1].0 * table.half_linewidth);
    Ok((a.min(b), a.max(b)))
}

fn cavity_metrics(cfg: &ExperimentConfig) -> CliResult<(Vec<f64>, SpectrumTable)> {
    let geom = cfg.geometry()?;
    let p = &cfg.params;
    let n_a = count_mirrors(&geom);
    let jc = jc_from_physical(n_a, p)?;
    let mirror = left_mirror(&geom)?;
    let finesse = wgqed::transfer_matrix::finesse(&mirror, p, cfg.delta)?;
    let deltas = match &cfg.detuning {
        Some(g) => g.resolve()?,
        None => splitting_grid(p, n_a).resolve()?,
    };
    let mut driven = cfg.clone();
    driven.drive = Drive::Impurity;
    let table = spectrum_table(&driven, &deltas)?;
    let (lo, hi) = normal_modes(&table)?;
    let law = p.gamma_1d * (n_a as f64).sqrt();
    Ok((vec![n_a as f64, jc.g, jc.kappa, jc.gamma, jc.cooperativity, finesse, lo, hi, hi - lo, law], table))
}

fn modes_metrics(cfg: &ExperimentConfig) -> CliResult<Vec<f64>> {
    let geom = cfg.geometry()?;
    let p = &cfg.params;
    let gen = Generator::new(&geom, p)?;
    let n_a = count_mirrors(&geom);
    let cav = collective_mode(&geom, ModeKind::Cavity)?;
    let rad = collective_mode(&geom, ModeKind::Radiant)?;
    let (imp_decay, imp_expected) = match gen.impurities().first() {
        Some(&slot) => (mode_decay_rate(&gen, &CollectiveMode::custom(gen.unit_vector(slot))?), p.gamma_total()),
        None => (f64::NAN, f64::NAN),
    };

    let bare = geom.clone().without_impurities();
    let bare_gen = Generator::new(&bare, p)?;
    let bare_rad = collective_mode(&bare, ModeKind::Radiant)?;
    let budget = emission_budget(&bare_gen, &bare_rad.vector, 1e4, 1e-16)?;
    Ok(vec![
        n_a as f64,
        gen.waveguide_rate(&cav.vector),
        mode_decay_rate(&gen, &cav),
        mode_decay_rate(&gen, &rad),
        n_a as f64 * p.gamma_1d + p.gamma_prime,
        imp_decay,
        imp_expected,
        retrieval_efficiency(n_a, p)?,
        budget.waveguide,
    ])
}

fn transfer_model(cfg: &ExperimentConfig) -> CliResult<(TransferModel, usize)> {
    let Some(GeometrySpec::TwoImpurity { n_m_outer, .. }) = cfg.geometry else {
        return Err(CliError::Config("transfer needs a two_impurity geometry".into()));
    };
    let n_a = 2 * n_m_outer;
    Ok(match cfg.transfer.model {
        TransferModelKind::Reduced => {
            (TransferModel::Reduced(LambdaSystem::from_jc(&jc_from_physical(n_a, &cfg.params)?)), n_a)
        }
        TransferModelKind::Full => (TransferModel::Full { geom: cfg.geometry()?, params: cfg.params }, n_a),
    })
}

/// Ω₀* (optimized unless fixed) and the resulting fidelity.
pub fn transfer_optimum(cfg: &ExperimentConfig, model: &TransferModel) -> CliResult<(f64, TransferResult, bool)> {
    let g = model.coupling()?;
    let duration = cfg.transfer.duration_for(g);
    let (omega0, warning) = match cfg.transfer.omega0 {
        Some(w) => (w, false),
        None => {
            let [lo, hi] = cfg.transfer.bracket;
            let best = optimize_omega0(model, duration, (lo * g, hi * g))?;
            (best.x, best.warning)
        }
    };
    let result = model.fidelity(&PulseSchedule::counter_intuitive(omega0, duration)?, 1000)?;
    Ok((omega0, result, warning))
}

fn transfer_metrics(cfg: &ExperimentConfig) -> CliResult<(Vec<f64>, PulseSchedule)> {
    let (model, n_a) = transfer_model(cfg)?;
    let (omega0, result, warning) = transfer_optimum(cfg, &model)?;
    if warning {
        eprintln!("warning: fidelity optimum at the bracket edge or not unimodal");
    }
    let jc = jc_from_physical(n_a, &cfg.params)?;
    let schedule = PulseSchedule::counter_intuitive(omega0, cfg.transfer.duration_for(model.coupling()?))?;
    let ratio = cfg.params.gamma_1d / cfg.params.gamma_prime;
    Ok((
        vec![ratio, n_a as f64, jc.cooperativity, omega0, result.fidelity, 1.0 - result.fidelity],
        schedule,
    ))
}

fn dynamics_csv(cfg: &ExperimentConfig) -> CliResult<String> {
    let geom = cfg.geometry()?;
    let p = &cfg.params;
    let gen = Generator::new(&geom, p)?;
    let times = match &cfg.time {
        Some(g) => g.resolve()?,
        None => GridSpec::linear(0.0, 5.0 / p.gamma_total(), 501).resolve()?,
    };
    let imp = gen.impurities().first().copied();
    let mode = |kind| collective_mode(&geom, kind).map(|m| m.vector).ok();
    let (cav, rad) = (mode(ModeKind::Cavity), mode(ModeKind::Radiant));
    let state0 = match cfg.initial {
        InitialState::Impurity => imp.map(|s| gen.unit_vector(s)),
        InitialState::Cavity => cav.clone(),
        InitialState::Radiant => rad.clone(),
    }
    .ok_or_else(|| wgqed::Error::UnsupportedGeometry("initial state is not defined for this geometry".into()))?;
    let tr = evolve_with(&gen, &state0, &times, cfg.evolve)?;

    let nan = vec![f64::NAN; times.len()];
    let proj = |v: &Option<Vec<_>>| v.as_ref().map_or_else(|| nan.clone(), |v| tr.projection(v));
    let p_imp = imp.map_or_else(|| nan.clone(), |s| tr.population(s));
    let (p_cav, p_rad) = (proj(&cav), proj(&rad));
    let (p_jc, p_free) = match (cfg.initial, imp) {
        (InitialState::Impurity, Some(_)) => {
            let jc = jc_from_physical(count_mirrors(&geom), p)?;
            let jc_tr = rabi_population_analytic(&jc, &times);
            (jc_tr.population(0), times.iter().map(|t| (-p.gamma_total() * t).exp()).collect())
        }
        _ => (nan.clone(), nan.clone()),
    };
    let norms = tr.norms();
    Ok(write_csv(
        &["t", "norm", "P_impurity", "P_cavity", "P_radiant", "P_jc", "P_free"],
        (0..times.len()).map(|i| {
            [times[i], norms[i], p_imp[i], p_cav[i], p_rad[i], p_jc[i], p_free[i]].iter().map(|&v| fmt_csv(v)).collect()
        }),
    ))
}
