mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sgsfm::calibration::{
    cluster_groups, fitness, ga_calibrate, synthetic_dataset, GaConfig, SyntheticConfig, ThetaBounds, ThetaVector,
    GENE_COUNT,
};
use sgsfm::data::{self, AgentKind, Frame, TrajectoryRecord};
use sgsfm::evaluation::{compute_aade, compute_afde, compute_ci, threshold_curve, Model};
use sgsfm::geometry::{rotate, unit};
use sgsfm::model::{
    anisotropy, limit_total_force, longitudinal_magnitude, pedestrian_model_step, pedestrian_repulsive_force,
    vehicle_repulsive_force, ModelParams,
};
use sgsfm::simulator::{fundamental_scenario, run_process};
use sgsfm::{ParameterSet, PedestrianBody, PedestrianProfile, PedestrianState, Vec2, VehicleState};

fn vec2(range: f64) -> impl Strategy<Value = Vec2> {
    (-range..range, -range..range).prop_map(|(x, y)| Vec2::new(x, y))
}

fn vehicle() -> impl Strategy<Value = VehicleState> {
    (vec2(10.0), -PI..PI, 0.0..5.0f64, 1.0..3.0f64, 1.0..3.0f64, 0.5..1.2f64).prop_map(|(p, h, v, lf, lr, hw)| {
        VehicleState {
            position: p,
            heading: h,
            speed: v,
            center_to_front: lf,
            center_to_rear: lr,
            half_width: hw,
        }
    })
}

fn polyline(n: usize, step: f64) -> impl Strategy<Value = Vec<Vec2>> {
    prop::collection::vec(vec2(step), n).prop_map(|steps| {
        let mut p = Vec2::zeros();
        steps
            .into_iter()
            .map(|s| {
                p += s;
                p
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vehicle_force_decays_laterally(veh in vehicle(), beta in 0.5..3.6f64, frac in 0.0..1.0f64, side in prop::bool::ANY) {
        let p = ModelParams { veh_decay: beta, ..ModelParams::default() };
        let x = -veh.center_to_rear + frac * (veh.center_to_rear + veh.front_impact_distance(p.prediction_horizon));
        let sign = if side { 1.0 } else { -1.0 };
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let local = Vec2::new(x, sign * (veh.half_width + 0.01 + 0.15 * i as f64));
            let f = vehicle_repulsive_force(&PedestrianState::at_rest(veh.to_world(local)), &veh, &p);
            let lateral = rotate(f, -veh.heading);
            prop_assert!(lateral.x.abs() < 1e-9 * f.norm().max(1.0));
            prop_assert!(lateral.y * sign > 0.0);
            prop_assert!(f.norm() < last);
            last = f.norm();
        }
    }

    #[test]
    fn pedestrian_force_decays_with_distance(dir in -PI..PI, v in vec2(2.0), beta in 0.5..3.0f64) {
        let p = ModelParams { ped_decay: beta, ..ModelParams::default() };
        let other = PedestrianState::at_rest(Vec2::new(3.0, -1.0));
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let ego = PedestrianState::new(other.position + unit(dir) * (0.1 + 0.2 * i as f64), v);
            let m = pedestrian_repulsive_force(&ego, &other, &p, 0.25).norm();
            prop_assert!(m < last);
            last = m;
        }
    }

    #[test]
    fn longitudinal_weight_is_bounded_and_continuous(lr in 0.5..3.0f64, lf in 0.5..20.0f64, d in 0.5..1.0f64, x in -30.0..30.0f64) {
        let m = longitudinal_magnitude(x, lr, lf, d);
        prop_assert!((0.0..=1.0).contains(&m));
        for (joint, value) in [(lf, 1.0), (lf + d, 0.0)] {
            for eps in [0.0, 1e-11] {
                prop_assert!((longitudinal_magnitude(joint - eps, lr, lf, d) - value).abs() <= 1e-9);
                prop_assert!((longitudinal_magnitude(joint + eps, lr, lf, d) - value).abs() <= 1e-9);
            }
        }
        // Lipschitz inside the ramp
        let h = 1e-6;
        if x > lf && x + h < lf + d {
            prop_assert!((longitudinal_magnitude(x + h, lr, lf, d) - m).abs() <= h / d * (1.0 + 1e-6));
        }
    }

    #[test]
    fn anisotropy_in_range(v in vec2(3.0), off in vec2(5.0), alpha in 0.0..=1.0f64) {
        let a = anisotropy(v, off, alpha);
        prop_assert!(a >= alpha - 1e-12 && a <= 1.0 + 1e-12);
    }

    #[test]
    fn limiter_respects_bounds(force in vec2(50_000.0), dir in -PI..PI, frac in 0.0..=1.0f64, dt in 0.01..1.0f64) {
        let body = PedestrianBody::default();
        let profile = PedestrianProfile::new(body, 1.3, Vec2::new(5.0, 5.0));
        let v = unit(dir) * (frac * body.max_speed);
        let f = limit_total_force(force, v, &profile, dt);
        prop_assert!((f / body.mass).norm() <= body.max_accel * (1.0 + 1e-9));
        prop_assert!((v + f / body.mass * dt).norm() <= body.max_speed * (1.0 + 1e-9));
    }

    #[test]
    fn model_step_is_pure_and_speed_capped(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = common::random_scene(&mut rng);
        let body = PedestrianBody::default();
        let mut ego = scene.ego;
        if ego.speed() > body.max_speed {
            ego.velocity *= body.max_speed / ego.speed();
        }
        let profile = PedestrianProfile::new(body, 1.3, scene.destination);
        let a = pedestrian_model_step(&ego, &profile, &scene.surroundings(), &scene.params, 0.5);
        let b = pedestrian_model_step(&ego, &profile, &scene.surroundings(), &scene.params, 0.5);
        prop_assert_eq!(a, b);
        prop_assert!(a.is_finite());
        prop_assert!(a.speed() <= body.max_speed * (1.0 + 1e-9));
    }

    #[test]
    fn displacement_metrics_are_rigid_invariant(gt in polyline(12, 1.0), noise in polyline(12, 0.3), angle in -PI..PI, shift in vec2(100.0), k0 in 1usize..20) {
        let sim: Vec<Vec2> = gt.iter().zip(&noise).map(|(g, n)| g + n).collect();
        let t = |v: &Vec<Vec2>| -> Vec<Vec2> { v.iter().map(|p| rotate(*p, angle) + shift).collect() };
        let (a0, f0) = (compute_aade(&sim, &gt, k0).unwrap(), compute_afde(&sim, &gt, k0).unwrap());
        let (a1, f1) = (compute_aade(&t(&sim), &t(&gt), k0).unwrap(), compute_afde(&t(&sim), &t(&gt), k0).unwrap());
        prop_assert!(a0 >= 0.0 && f0 >= 0.0);
        prop_assert!((a0 - a1).abs() <= 1e-9 * (1.0 + a0));
        prop_assert!((f0 - f1).abs() <= 1e-9 * (1.0 + f0));
    }

    #[test]
    fn collision_index_in_unit_interval(traj in polyline(15, 2.0), veh in vehicle()) {
        let vehicles = vec![vec![veh]; traj.len()];
        let ci = compute_ci(&traj, &vehicles).unwrap();
        prop_assert!((0.0..=1.0).contains(&ci));
        let far: Vec<Vec2> = traj.iter().map(|p| p + Vec2::new(1000.0, 0.0)).collect();
        prop_assert_eq!(compute_ci(&far, &vehicles).unwrap(), 0.0);
    }

    #[test]
    fn threshold_curve_monotone(values in prop::collection::vec(0.0..5.0f64, 1..40), mut ts in prop::collection::vec(0.0..6.0f64, 1..20)) {
        ts.sort_by(f64::total_cmp);
        let max = values.iter().copied().fold(0.0, f64::max);
        ts.push(max + 1e-6);
        let c = threshold_curve(&values, &ts);
        prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.iter().all(|f| (0.0..=1.0).contains(f)));
        prop_assert_eq!(*c.last().unwrap(), 1.0);
    }

    #[test]
    fn decoded_genes_stay_in_bounds(genes in prop::array::uniform7(-1000.0..1000.0f64)) {
        let b = ThetaBounds::default();
        let t = ThetaVector::from_genes(&genes, &b);
        prop_assert!(b.contains(&t));
        prop_assert_eq!(t.genes().len(), GENE_COUNT);
    }

    #[test]
    fn parameter_files_round_trip(pd in 0.5..3.0f64, vd in 0.5..3.6f64, tau in 2.0..5.0f64, k in 200.0..800.0f64, n in 40u32..60, r in 3.0..7.0f64, m in 50.0..500.0f64) {
        let mut set = ParameterSet::default();
        set.model = ThetaVector { ped_decay: pd, veh_decay: vd, prediction_horizon: tau, longitudinal_buffer: 0.7, nav_gain: k, direction_count: 2 * n, nav_range: r }.apply(&set.model);
        set.body.mass = m;
        prop_assert_eq!(ParameterSet::from_json_str(&set.to_json_string()).unwrap(), set);
    }
}

fn walk_records(scenario: &str, id: &str, start: Vec2, steps: &[Vec2], t0: usize, dt: f64) -> Vec<TrajectoryRecord> {
    let mut p = start;
    let mut out = Vec::new();
    for (k, s) in std::iter::once(&Vec2::zeros()).chain(steps).enumerate() {
        p += s;
        out.push(TrajectoryRecord {
            scenario_id: scenario.into(),
            time_s: (t0 + k) as f64 * dt,
            agent_id: id.into(),
            kind: AgentKind::Pedestrian,
            x_m: p.x,
            y_m: p.y,
            heading_rad: None,
            length_m: None,
            width_m: None,
        });
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_round_trip_and_sample_count(
        walkers in prop::collection::vec((vec2(20.0), prop::collection::vec((0.3..0.9f64, -PI..PI), 2..25), 0usize..10), 1..6),
        car in prop::collection::vec(vec2(2.0), 3..30),
    ) {
        let dt = 0.5;
        let mut records = Vec::new();
        for (i, (start, moves, t0)) in walkers.iter().enumerate() {
            let steps: Vec<Vec2> = moves.iter().map(|(len, ang)| unit(*ang) * *len).collect();
            records.extend(walk_records("s", &format!("p{i}"), *start, &steps, *t0, dt));
        }
        let car_recs: Vec<TrajectoryRecord> = walk_records("s", "car", Vec2::new(0.0, 30.0), &car, 0, dt)
            .into_iter()
            .enumerate()
            .map(|(k, r)| TrajectoryRecord {
                kind: AgentKind::Vehicle,
                heading_rad: Some(0.01 * k as f64),
                length_m: Some(4.5),
                width_m: Some(1.8),
                ..r
            })
            .collect();
        records.extend(car_recs);

        let mut buf = Vec::new();
        data::write_records(&mut buf, &records).unwrap();
        let scenarios = data::read_dataset(buf.as_slice(), dt).unwrap();
        prop_assert_eq!(scenarios.len(), 1);
        let sc = &scenarios[0];
        for r in &records {
            let agent = sc.agents.iter().find(|a| a.id == r.agent_id).unwrap();
            let step = (r.time_s / dt).round() as i64;
            let p = agent.positions[(step - agent.start_step) as usize];
            prop_assert!((p - Vec2::new(r.x_m, r.y_m)).norm() <= 1e-6);
        }
        let mut again = Vec::new();
        data::write_dataset(&mut again, &scenarios).unwrap();
        prop_assert_eq!(&data::read_dataset(again.as_slice(), dt).unwrap(), &scenarios);

        let samples = data::extract_samples(sc);
        prop_assert_eq!(samples.len(), walkers.len());
        for s in &samples {
            prop_assert!(s.desired_speed > 0.0);
            prop_assert!(s.destination != *s.ego.last().unwrap());
            prop_assert!(s.validate().is_ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn simulation_is_deterministic(index in 0usize..12, seed in 0u64..100) {
        let cfg = fundamental_scenario(index, 2, 2.0, seed);
        let params = ParameterSet::default();
        let a = run_process(&cfg, &params).unwrap();
        let b = run_process(&cfg, &params).unwrap();
        prop_assert_eq!(&a, &b);
        let n = cfg.step_count() + 1;
        prop_assert!(a.pedestrians.iter().all(|t| t.len() == n));
        prop_assert!(a.pedestrians.iter().flatten().all(|s| s.is_finite()));
    }

    #[test]
    fn ga_is_elitist_and_bounded(seed in 0u64..1000) {
        let base = ParameterSet::default();
        let samples = synthetic_dataset(&common::theta_true(), &base, &SyntheticConfig { count: 4, seed, ..SyntheticConfig::default() });
        let cfg = GaConfig { population: 10, elites: 2, generations: 4, seed, ..GaConfig::default() };
        let res = ga_calibrate(&samples, &base, &cfg, &ThetaVector::default()).unwrap();
        prop_assert_eq!(res.trace.len(), cfg.generations + 1);
        prop_assert!(res.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(cfg.bounds.contains(&res.best));
        prop_assert!(res.best_fitness >= 0.0);
        prop_assert_eq!(res.best_fitness, fitness(&res.best, &samples, &base));
    }

    #[test]
    fn cv_baseline_ignores_surroundings(seed in 0u64..1000) {
        let base = ParameterSet::default();
        let busy = synthetic_dataset(&ThetaVector::default(), &base, &SyntheticConfig { count: 3, seed, max_others: 3, ..SyntheticConfig::default() });
        for (i, s) in busy.iter().enumerate() {
            let mut empty = s.clone();
            empty.frames = vec![Frame::default(); s.frames.len()];
            let with = Model::ConstantVelocity.simulate(i, s, &base);
            prop_assert_eq!(&with, &Model::ConstantVelocity.simulate(i, &empty, &base));
            let step = s.desired_speed * s.dt;
            prop_assert!(with.windows(2).all(|w| (w[1] - w[0]).norm() <= step * (1.0 + 1e-9)));
        }
    }

    #[test]
    fn clustering_assigns_every_sample_once(genes in prop::collection::vec(prop::array::uniform7(0.0..1000.0f64), 3..30), k in 1usize..4, seed in 0u64..100) {
        let b = ThetaBounds::default();
        let features: Vec<ThetaVector> = genes.iter().map(|g| ThetaVector::from_genes(g, &b)).collect();
        let c = cluster_groups(&features, k, seed).unwrap();
        prop_assert_eq!(c.assignments.len(), features.len());
        prop_assert!(c.assignments.iter().all(|a| *a < k));
        prop_assert_eq!(c.centroids.len(), k);
    }
}
