//! Built-in invariant suite and the list of corrected formulas.

use lindyn::errata::errata_report;
use lindyn::init::{gaussian, seeded_rng};
use lindyn::oracle::{integrate_at, integrate_reduced, IntegratorConfig};
use lindyn::phase::{abc_transform, classify_phase, reference_phases, table, PqCase, ScalingExponents};
use lindyn::{
    closed_form_params, solve_from_state, to_pq, EffectiveData64, Hyperparams64, Rational64, SolveOptions,
    WeightState64,
};
use rand::Rng;

use crate::error::{CliError, CliResult};

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn worked_instance() -> CliResult<Check> {
    let hp = Hyperparams64::linear(1.0, 1.0, 1, 1)?;
    let data = EffectiveData64::from_point(vec![1.0], 1.0)?;
    let init = WeightState64::new(vec![0.0], vec![vec![1.0]]);
    let params = closed_form_params(&to_pq(&init, &data, &hp)?, &data, &hp)?;
    let ap = params.alpha_plus.unwrap_or(f64::NAN);
    let (traj, _) = solve_from_state(&init, &data, &hp, &[0.0, 40.0 * params.t_c], &SolveOptions::default())?;
    let end = traj.last().expect("two samples");
    let pass = (params.t_c - 0.894427).abs() <= 1e-6
        && (ap - 4.236068).abs() <= 1e-6
        && (end.u[0] - 0.78615).abs() <= 1e-5
        && (end.w[0][0] - 1.27202).abs() <= 1e-5;
    Ok(Check {
        name: "worked instance",
        pass,
        detail: format!("t_c = {:.6}, alpha+ = {ap:.6}, endpoint ({:.5}, {:.5})", params.t_c, end.u[0], end.w[0][0]),
    })
}

fn random_instance(seed: u64, beta: u32) -> CliResult<(Hyperparams64, EffectiveData64, WeightState64)> {
    let mut rng = seeded_rng(seed, 7);
    let d = rng.random_range(1..=8);
    let d0 = rng.random_range(1..=4);
    let hp = Hyperparams64::new(rng.random_range(0.2..2.0), rng.random_range(0.2..2.0), 1.0 / d as f64, beta, d, d0)?;
    let x: Vec<f64> = (0..d0).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = rng.random_range(-1.5..1.5);
    let data = EffectiveData64::from_point(x, y)?;
    let init = gaussian(d, d0, 0.6, 0.6, &mut rng);
    Ok((hp, data, init))
}

fn closed_form_vs_oracle() -> CliResult<Check> {
    let (mut worst, mut drift) = (0.0f64, 0.0f64);
    for seed in 0..10 {
        let (hp, data, init) = random_instance(seed, 1)?;
        let t_c = closed_form_params(&to_pq(&init, &data, &hp)?, &data, &hp)?.t_c;
        let times: Vec<f64> = (0..=100).map(|k| 20.0 * t_c * k as f64 / 100.0).collect();
        let (closed, _) = solve_from_state(&init, &data, &hp, &times, &SolveOptions::default())?;
        let run = integrate_at(&init, &data, &hp, &IntegratorConfig::new(20.0 * t_c), &times)?;
        for (a, b) in closed.outputs().iter().zip(run.trajectory.outputs()) {
            worst = worst.max((a - b).abs());
        }
        drift = drift.max(run.audit.max_drift());
    }
    Ok(Check {
        name: "closed form vs oracle",
        pass: worst <= 1e-6 && drift <= 1e-8,
        detail: format!("10 instances, max divergence {worst:.2e}, conservation drift {drift:.2e}"),
    })
}

fn reduced_vs_full() -> CliResult<Check> {
    let mut worst = 0.0f64;
    for (seed, beta) in [(0, 2), (1, 2), (2, 3)] {
        let (hp, data, init) = random_instance(100 + seed, beta)?;
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.2).collect();
        let cfg = IntegratorConfig::new(10.0);
        let full = integrate_at(&init, &data, &hp, &cfg, &times)?.trajectory;
        let red = integrate_reduced(&to_pq(&init, &data, &hp)?, &data, &hp, &cfg, &times)?.trajectory;
        for (a, b) in full.outputs().iter().zip(red.outputs()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(Check { name: "general-beta reduction", pass: worst <= 1e-6, detail: format!("3 instances, max divergence {worst:.2e}") })
}

fn phase_table() -> Check {
    let cells = table();
    let mut mismatches = 0;
    for (block, phases) in reference_phases() {
        for (cell, expected) in cells.iter().filter(|c| c.block == block).zip(phases) {
            if cell.phase != expected {
                mismatches += 1;
            }
        }
    }
    Check { name: "phase table", pass: cells.len() == 20 && mismatches == 0, detail: format!("{} cells, {mismatches} mismatches", cells.len()) }
}

fn abc_symmetry() -> Check {
    let mut rng = seeded_rng(3, 0);
    let mut q = || Rational64::new(rng.random_range(-8..=8), rng.random_range(1..=4));
    let mut broken = 0;
    for _ in 0..200 {
        let s = ScalingExponents::new(q(), q(), q(), q(), q(), q());
        let theta = q();
        let case = PqCase::InfiniteWidthIndependent;
        if classify_phase(&s, case) != classify_phase(&abc_transform(&s, theta), case) {
            broken += 1;
        }
    }
    Check { name: "abc symmetry", pass: broken == 0, detail: format!("200 tuples, {broken} changed phase") }
}

pub fn cmd_verify() -> CliResult<()> {
    let checks = vec![worked_instance()?, closed_form_vs_oracle()?, reduced_vs_full()?, phase_table(), abc_symmetry()];
    let errata = errata_report();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.pass);
    }
    println!();
    println!("documented discrepancies ({}):", errata.len());
    for e in &errata {
        let ok = e.confirmed();
        failed += usize::from(!ok);
        println!("{} {}", if ok { "CONFIRMED" } else { "UNCONFIRMED" }, e.topic);
        println!("    printed:     {} (defect {:.2e})", e.printed, e.printed_defect);
        println!("    implemented: {} (defect {:.2e})", e.implemented, e.implemented_defect);
    }
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} checks failed")));
    }
    Ok(())
}
