//! Commands that run one configured instance: solve, integrate, compare, align.

use std::path::PathBuf;

use lindyn::analysis::{alignment_direction, norm_trajectories, state_zeta, Profile, RescalingCase};
use lindyn::dynamics::printed_first_layer;
use lindyn::io::{trajectory_csv, weights_json};
use lindyn::oracle::{integrate_at, integrate_reduced, ConservationReport};
use lindyn::{closed_form_params, model_output, solve, to_pq, SolutionKind, SolveOptions, Trajectory64};
use serde::Serialize;

use super::{emit, to_json};
use crate::config::{Instance, RunConfig};
use crate::error::{CliError, CliResult};

pub const COMPARE_TOL: f64 = 1e-6;

#[derive(Debug, Serialize)]
struct Summary {
    method: &'static str,
    beta: u32,
    #[serde(rename = "P")]
    p_stat: f64,
    #[serde(rename = "Q")]
    q_stat: f64,
    #[serde(rename = "S")]
    s_stat: f64,
    t_c: Option<f64>,
    alpha_plus: Option<f64>,
    alpha_minus: Option<f64>,
    zeta0: Option<f64>,
    zeta_inf: Option<f64>,
    degenerate: bool,
    final_output: f64,
    final_loss: f64,
    converged_at: Option<f64>,
    samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    conservation: Option<ConservationReport<f64>>,
    phase_of_instance: &'static str,
}

fn write_outputs(cfg: &RunConfig, csv: Option<PathBuf>, traj: &Trajectory64, summary: &Summary) -> CliResult<()> {
    if let Some(path) = csv.or_else(|| cfg.output.csv.clone()) {
        emit(Some(&path), &trajectory_csv(traj))?;
    }
    if let Some(path) = &cfg.output.weights {
        std::fs::write(path, weights_json(&traj.states)?)?;
    }
    let json = to_json(summary)?;
    if let Some(path) = &cfg.output.summary {
        std::fs::write(path, &json)?;
    }
    emit(None, &json)
}

fn summary(method: &'static str, inst: &Instance, traj: &Trajectory64) -> CliResult<Summary> {
    let pq = to_pq(&inst.init, &inst.data, &inst.hp)?;
    let last = traj.samples.last().ok_or_else(|| CliError::Runtime("empty trajectory".into()))?;
    Ok(Summary {
        method,
        beta: inst.hp.beta,
        p_stat: pq.p_stat(),
        q_stat: pq.q_stat(),
        s_stat: pq.s_stat(),
        t_c: None,
        alpha_plus: None,
        alpha_minus: None,
        zeta0: state_zeta(&inst.init, &inst.data.x),
        zeta_inf: last.zeta,
        degenerate: false,
        final_output: last.output,
        final_loss: last.loss,
        converged_at: traj.converged_at,
        samples: traj.len(),
        conservation: None,
        phase_of_instance: "n/a",
    })
}

fn t_c(inst: &Instance) -> CliResult<Option<f64>> {
    if inst.hp.beta != 1 {
        return Ok(None);
    }
    let pq = to_pq(&inst.init, &inst.data, &inst.hp)?;
    Ok(Some(closed_form_params(&pq, &inst.data, &inst.hp)?.t_c))
}

/// Closed-form trajectory (β = 1) with its summary.
fn closed_form(cfg: &RunConfig, inst: &Instance) -> CliResult<(Trajectory64, Summary)> {
    let pq = to_pq(&inst.init, &inst.data, &inst.hp)?;
    let params = closed_form_params(&pq, &inst.data, &inst.hp)?;
    let times = cfg.times(Some(params.t_c))?;
    let (traj, kind) = solve(&pq, &inst.data, &inst.hp, &times, &SolveOptions::default())?;
    let mut s = summary("closed_form", inst, &traj)?;
    let report = alignment_direction(&params, pq.s_stat());
    s.t_c = Some(params.t_c);
    s.alpha_plus = params.alpha_plus;
    s.alpha_minus = params.alpha_minus;
    if params.alpha_plus.is_some() {
        s.zeta_inf = Some(report.zeta_inf);
    }
    s.degenerate = kind == SolutionKind::Degenerate;
    Ok((traj, s))
}

fn reduced(cfg: &RunConfig, inst: &Instance) -> CliResult<(Trajectory64, Summary)> {
    let times = cfg.times(t_c(inst)?)?;
    let pq = to_pq(&inst.init, &inst.data, &inst.hp)?;
    let run = integrate_reduced(&pq, &inst.data, &inst.hp, &cfg.oracle(*times.last().unwrap())?, &times)?;
    let s = summary("reduced_ode", inst, &run.trajectory)?;
    Ok((run.trajectory, s))
}

pub fn cmd_solve(cfg: &RunConfig, reduced_ode: bool, csv: Option<PathBuf>) -> CliResult<()> {
    let inst = cfg.instance()?;
    let (traj, s) = if reduced_ode {
        reduced(cfg, &inst)?
    } else if inst.hp.beta == 1 {
        closed_form(cfg, &inst)?
    } else {
        return Err(CliError::Config(format!(
            "the closed form needs beta = 1 (got {}); pass --reduced-ode",
            inst.hp.beta
        )));
    };
    write_outputs(cfg, csv, &traj, &s)
}

pub fn cmd_integrate(cfg: &RunConfig, csv: Option<PathBuf>) -> CliResult<()> {
    let inst = cfg.instance()?;
    let times = cfg.times(t_c(&inst)?)?;
    let run = integrate_at(&inst.init, &inst.data, &inst.hp, &cfg.oracle(*times.last().unwrap())?, &times)?;
    let mut s = summary("oracle", &inst, &run.trajectory)?;
    s.conservation = Some(run.audit);
    write_outputs(cfg, csv, &run.trajectory, &s)
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub seed: Option<u64>,
    pub beta: u32,
    pub reference: &'static str,
    pub candidate: &'static str,
    pub max_divergence: f64,
    pub t_at_max: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn compare_one(cfg: &RunConfig, inject_printed_first_layer: bool) -> CliResult<CompareReport> {
    let inst = cfg.instance()?;
    let times = cfg.times(t_c(&inst)?)?;
    let oracle = cfg.oracle(*times.last().unwrap())?;
    let full = integrate_at(&inst.init, &inst.data, &inst.hp, &oracle, &times)?.trajectory;
    let (candidate, outputs) = if inst.hp.beta == 1 {
        let pq = to_pq(&inst.init, &inst.data, &inst.hp)?;
        let (traj, _) = solve(&pq, &inst.data, &inst.hp, &times, &SolveOptions::default())?;
        let outputs = if inject_printed_first_layer {
            traj.states
                .iter()
                .map(|s| {
                    let pq_t = to_pq(s, &inst.data, &inst.hp)?;
                    let mut bent = s.clone();
                    bent.w = printed_first_layer(&inst.init.w, &pq_t, &inst.data, &inst.hp);
                    Ok(model_output(&bent, &inst.data.x, &inst.hp))
                })
                .collect::<CliResult<Vec<_>>>()?
        } else {
            traj.outputs()
        };
        ("closed_form", outputs)
    } else {
        if inject_printed_first_layer {
            return Err(CliError::Config("fault injection applies to the beta = 1 closed form only".into()));
        }
        let pq = to_pq(&inst.init, &inst.data, &inst.hp)?;
        ("reduced_ode", integrate_reduced(&pq, &inst.data, &inst.hp, &oracle, &times)?.trajectory.outputs())
    };
    let (mut worst, mut t_at) = (0.0f64, 0.0);
    for ((a, b), &t) in outputs.iter().zip(full.outputs()).zip(&times) {
        let gap = (a - b).abs();
        if gap > worst || gap.is_nan() {
            (worst, t_at) = (gap, t);
        }
    }
    Ok(CompareReport {
        seed: None,
        beta: inst.hp.beta,
        reference: "oracle",
        candidate,
        max_divergence: worst,
        t_at_max: t_at,
        tolerance: COMPARE_TOL,
        pass: worst <= COMPARE_TOL,
    })
}

pub fn cmd_compare(cfg: &RunConfig, seeds: Option<u64>, inject_printed_first_layer: bool) -> CliResult<()> {
    let reports = match seeds {
        None => vec![compare_one(cfg, inject_printed_first_layer)?],
        Some(n) => {
            if !cfg.has_seed() {
                return Err(CliError::Config("--seeds needs a seeded init or synthetic data".into()));
            }
            (0..n)
                .map(|seed| {
                    let mut c = cfg.clone();
                    c.set_seed(seed);
                    let mut r = compare_one(&c, inject_printed_first_layer)?;
                    r.seed = Some(seed);
                    Ok(r)
                })
                .collect::<CliResult<Vec<_>>>()?
        }
    };
    let failed = reports.iter().filter(|r| !r.pass).count();
    let text = if seeds.is_some() { to_json(&reports)? } else { to_json(&reports[0])? };
    emit(None, &text)?;
    if failed > 0 {
        return Err(CliError::Verification(format!(
            "{failed} of {} comparisons exceed {COMPARE_TOL:e}",
            reports.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct AlignSummary {
    alignment: lindyn::analysis::AlignmentReport<f64>,
    rescaling: Option<RescalingSummary>,
}

#[derive(Debug, Serialize)]
struct RescalingSummary {
    case_id: RescalingCase,
    u_norm_profile: Profile,
    w_norm_profile: Profile,
    alpha_plus: f64,
    alpha_star: f64,
    boundary: bool,
}

pub fn cmd_align(cfg: &RunConfig, csv: Option<PathBuf>) -> CliResult<()> {
    let inst = cfg.instance()?;
    if inst.hp.beta != 1 {
        return Err(CliError::Config(format!("align needs beta = 1, got {}", inst.hp.beta)));
    }
    let pq = to_pq(&inst.init, &inst.data, &inst.hp)?;
    let params = closed_form_params(&pq, &inst.data, &inst.hp)?;
    let times = cfg.times(Some(params.t_c))?;
    let (traj, _) = solve(&pq, &inst.data, &inst.hp, &times, &SolveOptions::default())?;
    let alignment = alignment_direction(&params, pq.s_stat());
    let rescaling = match norm_trajectories(&params, pq.s_stat(), &inst.hp) {
        Ok(r) => Some(RescalingSummary {
            case_id: r.case_id,
            u_norm_profile: r.u_norm_profile,
            w_norm_profile: r.w_norm_profile,
            alpha_plus: r.alpha_plus,
            alpha_star: r.alpha_star,
            boundary: r.boundary,
        }),
        Err(lindyn::Error::DegenerateRequired) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = csv.or_else(|| cfg.output.csv.clone()) {
        let mut out = String::from("t,zeta,u_norm,w_norm\n");
        for s in &traj.samples {
            let z = s.zeta.map(|z| z.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{z},{},{}\n", s.t, s.u_norm, s.w_norm));
        }
        emit(Some(&path), &out)?;
    }
    emit(None, &to_json(&AlignSummary { alignment, rescaling })?)
}
