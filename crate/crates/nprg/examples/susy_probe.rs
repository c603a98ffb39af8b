//! Scratch probe: two-field flow failures by order and tolerance.

use nprg::grid_flow::FlowConfig;
use nprg::observables::{two_field_gap, TruncatedSeriesPotential};
use nprg::potentials::{rotate_to_normal_coordinates, two_particle_bare, Interaction};
use nprg::two_field::evolve_two_field;

fn probe(interaction: &Interaction, order: usize, rel_tol: f64) {
    let bare = two_particle_bare(0.2, interaction, order);
    let rotated = rotate_to_normal_coordinates(&bare);
    let mut cfg = FlowConfig::default();
    cfg.rel_tol = rel_tol;
    match evolve_two_field(&rotated, &cfg) {
        Ok(traj) => {
            let last = traj.snapshots.last().unwrap();
            let gap = two_field_gap(&TruncatedSeriesPotential { series: &last.v });
            println!(
                "  {interaction:?} N={order} rel_tol={rel_tol:.0e}: {:?} at lambda={:.4}; gap={:?}",
                traj.termination, last.lambda, gap
            );
        }
        Err(e) => println!("  {interaction:?} N={order}: setup error {e}"),
    }
}

fn main() {
    for interaction in [
        Interaction::Linear { c: 0.0 },
        Interaction::Quadratic { c2: 0.05 },
        Interaction::Quadratic { c2: -0.05 },
        Interaction::Quartic { c4: 0.01 },
        Interaction::Quartic { c4: -0.01 },
    ] {
        probe(&interaction, 10, 1e-9);
    }
}
