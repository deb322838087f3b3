use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uav_relay::baselines::{
    default_hover, greedy_profile, greedy_ratio, greedy_strategy, semicircle_init, static_strategy, straight_line_init,
    ArcSide, GreedyOptions, Strategy,
};
use uav_relay::model::{causality_residuals, rate, slot_geometry, validate_trajectory};
use uav_relay::profile::{optimize_profile, ProfileOptions};
use uav_relay::{Protocol, Scenario, ScenarioParams, Trajectory};

/// Same-slot spending rate as a function of the ratio, written out directly.
fn spend_all(s: &ScenarioParams<f64>, w: [f64; 2], protocol: Protocol, rho: f64) -> f64 {
    let d2sr = w[0] * w[0] + w[1] * w[1] + s.altitude * s.altitude;
    let d2rd = (w[0] - 2.0).powi(2) + w[1] * w[1] + s.altitude * s.altitude;
    let p = (1.0 + s.source_power * s.gamma0 / d2sr) * s.noise_power * (1.0 - rho);
    let x = s.source_power * s.gamma0 * rho / ((rho + s.rel_noise) * d2sr);
    let y = p * s.gamma0 / d2rd;
    let base = 1.0 + s.source_power * s.gamma;
    let half = |v: f64| 0.5 * v.log2();
    match protocol {
        Protocol::Af => half(base + x * y / (1.0 + x + y)),
        Protocol::Df => half(1.0 + x).min(half(base + y)),
    }
}

#[test]
fn greedy_ratio_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let params = ScenarioParams::<f64>::default();
    let s = params.clone().build().unwrap();
    for _ in 0..40 {
        let w = [rng.gen_range(-1.0..3.0), rng.gen_range(-1.5..1.5)];
        let g = slot_geometry(&s, w);
        for protocol in Protocol::ALL {
            let rho = greedy_ratio(&s, &g, protocol);
            let best = (0..=20000).map(|k| spend_all(&params, w, protocol, k as f64 / 20000.0)).fold(f64::MIN, f64::max);
            let got = spend_all(&params, w, protocol, rho);
            assert!(got >= best - 1e-6, "{protocol} at {w:?}: {got} < {best}");
        }
    }
}

#[test]
fn greedy_profile_spends_each_harvest() {
    let s = Scenario::<f64>::reference();
    for traj in [straight_line_init(&s).unwrap(), semicircle_init(&s, ArcSide::AwayFromSource).unwrap()] {
        for protocol in Protocol::ALL {
            let prof = greedy_profile(&s, &traj, protocol).unwrap();
            assert!(causality_residuals(&s, &traj, &prof).unwrap().iter().all(|&r| r == 0.0));
            assert!(prof.rho.iter().all(|&r| (0.0..=1.0).contains(&r)));
        }
    }
}

#[test]
fn static_strategy_is_the_profile_optimum_at_the_hover_point() {
    let s = ScenarioParams { num_slots: 2, max_step: 3.0, ..ScenarioParams::default() }.build().unwrap();
    let g = slot_geometry(&s, [0.0, 1.0]);
    let harvest = |rho: f64| uav_relay::model::harvested_energy(&s, &g, rho).unwrap();
    for protocol in Protocol::ALL {
        let res = static_strategy(&s, protocol, default_hover(), &ProfileOptions::default()).unwrap();
        assert_eq!(res.strategy, Strategy::Static);
        assert!(res.trajectory.points.iter().all(|&p| p == [0.0, 1.0]));
        // every grid point is a causal profile, so the optimum is at least the grid maximum
        let mut best = f64::MIN;
        for i in 0..=100 {
            let r1 = i as f64 / 100.0;
            for j in 0..=100 {
                let r2 = j as f64 / 100.0;
                let total = harvest(r1) + harvest(r2);
                for k in 0..=100 {
                    let p1 = harvest(r1) * k as f64 / 100.0;
                    let v = rate(&s, &g, protocol, p1, r1).unwrap() + rate(&s, &g, protocol, (total - p1).max(0.0), r2).unwrap();
                    best = best.max(v);
                }
            }
        }
        assert!(res.throughput >= best - 1e-9, "{protocol}: {} < {best}", res.throughput);
        let hover = Trajectory::new(vec![[0.0, 1.0]; 2]);
        let direct = optimize_profile(&s, &hover, protocol, &ProfileOptions { check_endpoints: false, ..Default::default() })
            .unwrap();
        assert_eq!(direct.throughput, res.throughput);
    }
}

#[test]
fn greedy_strategy_improves_on_its_start() {
    let s = ScenarioParams { num_slots: 12, max_step: 0.5, ..ScenarioParams::default() }.build().unwrap();
    let init = semicircle_init(&s, ArcSide::TowardSource).unwrap();
    for protocol in Protocol::ALL {
        let res = greedy_strategy(&s, protocol, &init, &GreedyOptions::default()).unwrap();
        assert!(res.trace.windows(2).all(|w| w[1] > w[0]));
        assert!(validate_trajectory(&s, &res.trajectory).feasible);
        assert!(causality_residuals(&s, &res.trajectory, &res.profile).unwrap().iter().all(|&r| r == 0.0));
    }
}
