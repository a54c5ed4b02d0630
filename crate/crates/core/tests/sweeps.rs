use std::f64::consts::PI;

use perpcool::physics::{AtomicSpecies, CrystalState, ParBeam, PerpBeam};
use perpcool::sweep::{
    solve_physical_cell, sweep_physical, zero_torque_curve, Axis, CellStatus, SweepOptions,
    ZeroTorqueOptions,
};

const MHZ: f64 = 2.0 * PI * 1e6;

fn fig4() -> (AtomicSpecies, PerpBeam, CrystalState) {
    (
        AtomicSpecies::beryllium9(),
        PerpBeam::new(0.5, 30e-6, 14e-6, -25.0 * MHZ).unwrap(),
        CrystalState::new(225e-6, 2.77e9, 2.0 * PI * 45e3).unwrap(),
    )
}

fn window(n: usize) -> (Axis, Axis) {
    (
        Axis::linspace("detuning", "rad/s", -32.0 * MHZ, -18.0 * MHZ, n).unwrap(),
        Axis::linspace("offset", "m", 4e-6, 24e-6, n).unwrap(),
    )
}

#[test]
fn refining_the_grid_keeps_nodes_and_the_minimum() {
    let (species, beam, crystal) = fig4();
    let opts = SweepOptions::default();
    let (a1, a2) = window(9);
    let coarse = sweep_physical(&species, &beam, &crystal, &ParBeam::off(), &a1, &a2, &opts).unwrap();
    let (b1, b2) = window(17);
    let fine = sweep_physical(&species, &beam, &crystal, &ParBeam::off(), &b1, &b2, &opts).unwrap();

    for i in 0..9 {
        for j in 0..9 {
            let (c, f) = (coarse.cell(i, j), fine.cell(2 * i, 2 * j));
            assert_eq!(c.status, f.status);
            if let (Some(x), Some(y)) = (c.temperature, f.temperature) {
                assert!((x / y - 1.0).abs() < 1e-9, "({i},{j}): {x} vs {y}");
            }
        }
    }
    let (_, _, tc) = coarse.minimum().unwrap();
    let (_, _, tf) = fine.minimum().unwrap();
    assert!(tf <= tc * (1.0 + 1e-9));
    assert!(tc / tf - 1.0 < 0.02, "coarse {tc} fine {tf}");
    assert!(coarse.spot_check.failed.is_empty() && fine.spot_check.failed.is_empty());
    assert!(fine.cells.iter().all(|c| c.status == CellStatus::Converged));
}

#[test]
fn physical_sweeps_do_not_depend_on_worker_count() {
    let (species, beam, crystal) = fig4();
    let (a1, a2) = window(4);
    let mut opts = SweepOptions::default();
    opts.workers = 1;
    let one = sweep_physical(&species, &beam, &crystal, &ParBeam::off(), &a1, &a2, &opts).unwrap();
    opts.workers = 3;
    let three = sweep_physical(&species, &beam, &crystal, &ParBeam::off(), &a1, &a2, &opts).unwrap();
    assert_eq!(one, three);
}

#[test]
fn zero_torque_points_separate_opposite_torques() {
    let (species, beam, crystal) = fig4();
    let opts = SweepOptions::default();
    let zt = ZeroTorqueOptions {
        scan_points: 7,
        bracket_width: 0.05e-6,
    };
    let detunings = Axis::new("detuning", "rad/s", vec![-27.0 * MHZ, -25.0 * MHZ, -23.0 * MHZ]).unwrap();
    let curve = zero_torque_curve(
        &species,
        &beam,
        &crystal,
        &ParBeam::off(),
        &detunings,
        (0.0, 30e-6),
        &zt,
        &opts,
    )
    .unwrap();
    assert!(!curve.points.is_empty());
    for p in &curve.points {
        let torque_at = |d: f64| {
            let b = beam.with_detuning(p.detuning).unwrap().with_offset(d).unwrap();
            solve_physical_cell(&species, &b, &crystal, &ParBeam::off(), &opts).unwrap().1.unwrap()
        };
        let below = torque_at(p.offset - 0.5e-6);
        let above = torque_at(p.offset + 0.5e-6);
        assert!(below.signum() != above.signum(), "{p:?}: {below} {above}");
        assert!(p.torque.abs() < 0.1 * below.abs().max(above.abs()), "{p:?}");
        let far = torque_at(p.offset + 5e-6).abs();
        assert!(p.torque.abs() < 0.02 * far, "{p:?} vs {far}");
    }
}
