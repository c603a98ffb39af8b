//! Scratch probe for flow-termination behavior (not part of the suite).

use nprg::grid::Grid1D;
use nprg::grid_flow::{evolve_grid, FlowConfig};
use nprg::observables::extract_from_grid_trajectory;
use nprg::oracle::solve_auto;
use nprg::potentials::{double_well, Polynomial1D};

fn main() {
    // 1. Tightened-guard abort on the flat-cored well.
    let t0 = std::time::Instant::now();
    let cfg = FlowConfig {
        lambda0: 1.0,
        snapshot_lambdas: vec![0.95],
        spinodal_guard: 0.05,
        ..FlowConfig::default()
    };
    let grid = Grid1D::new(-6.0, 6.0, 301).unwrap();
    let v0 = Polynomial1D::new(vec![
        0.0, 0.0, -0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.5e-4,
    ]);
    let traj = evolve_grid(&v0, &grid, &cfg).unwrap();
    println!(
        "plateau guard=0.05: {:?}, steps = {}, elapsed = {:.2?}",
        traj.termination,
        traj.steps,
        t0.elapsed()
    );

    // 2. Acceptance-style double wells: runtime + ΔE accuracy vs oracle.
    for &n in &[401usize, 801] {
        for &l0 in &[0.15f64, 0.2, 0.3, 0.5] {
            let t0 = std::time::Instant::now();
            let grid = Grid1D::new(-8.0, 8.0, n).unwrap();
            let cfg = FlowConfig::default();
            let v = double_well(l0);
            let traj = evolve_grid(&v, &grid, &cfg).unwrap();
            let term = format!("{:?}", traj.termination);
            let de = extract_from_grid_trajectory(&traj).map(|s| s.m_eff);
            let sol = solve_auto(&v, 2).unwrap();
            let oracle_gap = sol.energies[1] - sol.energies[0];
            match de {
                Ok(m) => println!(
                    "n={n} l0={l0}: {} steps={} {:.2?}  dE={:.6} oracle={:.6} rel={:+.3e}",
                    term,
                    traj.steps,
                    t0.elapsed(),
                    m,
                    oracle_gap,
                    m / oracle_gap - 1.0
                ),
                Err(e) => println!(
                    "n={n} l0={l0}: {} steps={} {:.2?}  extract err: {e}",
                    term,
                    traj.steps,
                    t0.elapsed()
                ),
            }
        }
    }
}
