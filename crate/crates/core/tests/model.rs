use proptest::prelude::*;

use uav_relay::model::{
    af_rate, causality_residuals, df_rate, harvested_energy, is_causal, slot_geometry, total_throughput,
};
use uav_relay::pipeline::format_sig;
use uav_relay::profile::{optimize_profile, ProfileOptions};
use uav_relay::{Profile, Protocol, Scenario, ScenarioParams, SlotGeometry, Trajectory};

fn reference() -> Scenario<f64> {
    Scenario::reference()
}

#[test]
fn worked_examples() {
    let s = reference();
    let above_source = slot_geometry(&s, [0.0, 0.0]);
    assert!((above_source.d2_sr - 0.09).abs() < 1e-15);
    assert!((above_source.d2_rd - 4.09).abs() < 1e-15);
    // 0.5 * log2(1 + 0.01 + x*y/(1+x+y)), x = 0.2/0.09, y = 1/4.09
    let x: f64 = 0.5 / 2.5 / 0.09;
    let y: f64 = 1.0 / 4.09;
    let af = 0.5 * (1.01 + x * y / (1.0 + x + y)).log2();
    assert!((af_rate(&s, &above_source, 1.0, 0.5).unwrap() - af).abs() < 1e-15);
    assert!((af - 0.1112).abs() < 5e-5);
    let df = 0.5 * (1.01 + y).log2();
    assert!((df_rate(&s, &above_source, 1.0, 0.5).unwrap() - df).abs() < 1e-15);
    assert!((df - 0.16357).abs() < 2e-5);
    assert!((af_rate(&s, &above_source, 0.0, 0.7).unwrap() - 0.5 * 1.01f64.log2()).abs() < 1e-15);
    assert_eq!(df_rate(&s, &above_source, 3.0, 0.0).unwrap(), 0.0);

    let hover = slot_geometry(&s, [0.0, 1.0]);
    assert!((hover.d2_sr - 1.09).abs() < 1e-15);
    let full = harvested_energy(&s, &hover, 0.0).unwrap();
    assert!((full - (1.0 + 1.0 / 1.09)).abs() < 1e-15);
    assert!((full - 1.91743).abs() < 5e-6);
    assert_eq!(harvested_energy(&s, &hover, 1.0).unwrap(), 0.0);
}

#[test]
fn domain_errors() {
    let s = reference();
    let g = slot_geometry(&s, [1.0, 0.0]);
    assert!(af_rate(&s, &g, -1e-3, 0.5).is_err());
    assert!(df_rate(&s, &g, 1.0, 1.5).is_err());
    assert!(harvested_energy(&s, &g, -0.1).is_err());
    assert!(Profile::new(vec![1.0], vec![0.5, 0.5]).is_err());
    assert!(ScenarioParams::<f64> { altitude: 0.0, ..ScenarioParams::default() }.build().is_err());
    assert!(ScenarioParams::<f64> { num_slots: 0, ..ScenarioParams::default() }.build().is_err());
}

#[test]
fn first_slot_overspending_is_flagged() {
    let s = ScenarioParams::<f64> { num_slots: 2, max_step: 3.0, ..ScenarioParams::default() }.build().unwrap();
    let t = Trajectory::new(vec![[0.0, 1.0], [1.0, 0.0]]);
    let h1 = harvested_energy(&s, &slot_geometry(&s, [0.0, 1.0]), 0.0).unwrap();
    let prof = Profile::new(vec![h1 + 0.1, 0.0], vec![0.0, 0.0]).unwrap();
    let res = causality_residuals(&s, &t, &prof).unwrap();
    assert!(res[0] < 0.0 && !is_causal(&res));
}

#[test]
fn df_profile_with_a_slot_next_to_the_source() {
    // slot 3 harvests far more than it can use; the price must not collapse to zero there
    let points = vec![[1.6510403179638784, 0.0], [1.9053911697633665, 0.0], [-0.13919241533751478, 0.0], [1.2762898722396785, 0.0]];
    let s = ScenarioParams::<f64> {
        num_slots: 4,
        max_step: 5.0,
        source_power: 1.4528004120555762,
        start: points[0],
        end: points[3],
        ..ScenarioParams::default()
    }
    .build()
    .unwrap();
    let t = Trajectory::new(points);
    let sol = optimize_profile(&s, &t, Protocol::Df, &ProfileOptions::default()).unwrap();
    let greedy = uav_relay::baselines::greedy_profile(&s, &t, Protocol::Df).unwrap();
    assert!(sol.throughput >= total_throughput(&s, &t, &greedy, Protocol::Df).unwrap());
    assert!(sol.gap().abs() < 1e-9);
}

fn geometry() -> impl Strategy<Value = SlotGeometry<f64>> {
    (-1.0..3.0f64, -1.5..1.5f64).prop_map(|(x, y)| slot_geometry(&reference(), [x, y]))
}

proptest! {
    #[test]
    fn rates_are_nonnegative_and_grow_with_power(g in geometry(), p in 0.0..5.0f64, dp in 0.0..1.0f64, rho in 0.0..=1.0f64) {
        let s = reference();
        for f in [af_rate::<f64>, df_rate::<f64>] {
            let a = f(&s, &g, p, rho).unwrap();
            let b = f(&s, &g, p + dp, rho).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn df_rate_never_exceeds_its_relay_free_bound(g in geometry(), p in 0.0..5.0f64, rho in 0.0..=1.0f64) {
        let s = reference();
        let first = 0.5 * (1.0 + rho / (rho + 2.0) / g.d2_sr).log2();
        prop_assert!(df_rate(&s, &g, p, rho).unwrap() <= first + 1e-15);
    }

    #[test]
    fn harvest_is_linear_in_the_split(g in geometry(), rho in 0.0..=1.0f64) {
        let s = reference();
        let full = harvested_energy(&s, &g, 0.0).unwrap();
        prop_assert!((harvested_energy(&s, &g, rho).unwrap() - full * (1.0 - rho)).abs() <= 1e-14 * full);
    }

    #[test]
    fn residuals_are_running_differences(
        pts in prop::collection::vec((-1.0..3.0f64, -1.5..1.5f64), 1..12),
        spend in prop::collection::vec((0.0..3.0f64, 0.0..=1.0f64), 12),
    ) {
        let n = pts.len();
        let s = ScenarioParams::<f64> { num_slots: n, max_step: 5.0, ..ScenarioParams::default() }.build().unwrap();
        let t = Trajectory::new(pts.iter().map(|&(x, y)| [x, y]).collect());
        let prof = Profile::new(spend[..n].iter().map(|v| v.0).collect(), spend[..n].iter().map(|v| v.1).collect()).unwrap();
        let res = causality_residuals(&s, &t, &prof).unwrap();
        let mut acc = 0.0;
        for i in 0..n {
            acc += harvested_energy(&s, &slot_geometry(&s, t.points[i]), prof.rho[i]).unwrap() - prof.power[i];
            prop_assert!((res[i] - acc).abs() <= 1e-12 * (1.0 + acc.abs()));
        }
    }

    #[test]
    fn printed_numbers_round_trip(v in prop::num::f64::NORMAL) {
        let s = format_sig(v);
        let back: f64 = s.parse().unwrap();
        prop_assert_eq!(format_sig(back), s.clone());
        prop_assert!((back - v).abs() <= 5e-12 * v.abs(), "{} -> {}", v, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimized_profiles_are_causal_and_beat_greedy(
        pts in prop::collection::vec((-0.5..2.5f64, -1.0..1.0f64), 4),
        ps in 0.5..2.0f64,
    ) {
        let points: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
        let s = ScenarioParams::<f64> {
            num_slots: 4,
            max_step: 5.0,
            source_power: ps,
            start: points[0],
            end: points[3],
            ..ScenarioParams::default()
        }
        .build()
        .unwrap();
        let t = Trajectory::new(points);
        for protocol in Protocol::ALL {
            let sol = optimize_profile(&s, &t, protocol, &ProfileOptions::default()).unwrap();
            prop_assert!(is_causal(&causality_residuals(&s, &t, &sol.profile).unwrap()));
            let greedy = uav_relay::baselines::greedy_profile(&s, &t, protocol).unwrap();
            let g = total_throughput(&s, &t, &greedy, protocol).unwrap();
            prop_assert!(sol.throughput >= g - 1e-6, "{}: {} < greedy {}", protocol, sol.throughput, g);
            prop_assert!(sol.gap() >= -1e-9);
        }
    }
}
