mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semnav::planner::{rollout, select_velocity, Command, UavState};

use common::oracle::{closed_form_pose, heading_gap};

#[test]
fn rollout_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    use rand::Rng;
    for _ in 0..1000 {
        let (x, y) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let theta = rng.gen_range(-3.14..3.14);
        let v = rng.gen_range(0.0..3.0);
        let omega = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(-2.0..2.0) };
        let dt = rng.gen_range(0.01..0.5);
        let steps = rng.gen_range(1..=40);
        let traj = rollout(&UavState::at_rest(x, y, theta), Command::new(v, omega), dt, steps);
        let last = traj.last().unwrap();
        let (ex, ey, eth) = closed_form_pose(x, y, theta, v, omega, dt * steps as f64);
        assert!((last.x - ex).abs() < 1e-9, "x {} vs {ex}", last.x);
        assert!((last.y - ey).abs() < 1e-9, "y {} vs {ey}", last.y);
        assert!(heading_gap(last.theta, eth) < 1e-9);
    }
}

#[test]
fn select_velocity_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut recoveries = 0;
    for i in 0..300 {
        let case = common::random_case(&mut rng);
        let got = select_velocity(&case.request(), &case.config);
        let want = common::oracle_choice(&case);
        assert_eq!(
            (got.command.v, got.command.omega, got.recovery),
            (want.v, want.omega, want.recovery),
            "case {i}"
        );
        if !want.recovery {
            assert_eq!(got.score, want.score, "case {i}");
        }
        recoveries += want.recovery as usize;
    }
    // The generator should exercise both paths.
    assert!(recoveries < 300);
}

#[test]
fn tie_break_prefers_faster_then_straighter() {
    // Zero weights make every candidate tie at score 0.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut case = common::random_case(&mut rng);
    case.config.weights = semnav::planner::ObjectiveWeights {
        alpha: 0.0,
        beta: 0.0,
        gamma: 0.0,
        epsilon: 0.0,
    };
    case.obstacles = semnav::planner::OccupancyGrid::empty(*case.costmap.geometry());
    case.state = UavState::new(case.state.x, case.state.y, 0.0, 0.0, 0.0);
    let got = select_velocity(&case.request(), &case.config);
    let want = common::oracle_choice(&case);
    assert_eq!((got.command.v, got.command.omega), (want.v, want.omega));
    let l = &case.config.limits;
    assert_eq!(got.command.v, (l.a_lin * case.config.dt).min(l.v_max));
}
