//! Property tests over the geometry and motion primitives.

use greenwave_core::{
    cross_green_s, forward_green_s, speed_change_position, stop_profile, Direction, Node,
    NodePlan, WavePath,
};
use proptest::prelude::*;

fn arb_plan() -> impl Strategy<Value = NodePlan> {
    // 3..8 segments with lengths in [0.2, 3] km.
    prop::collection::vec(0.2f64..3.0, 3..8).prop_map(|lengths| {
        let mut odo = 0.0;
        let mut nodes = vec![Node { odometer_km: 0.0, site: None }];
        for l in lengths {
            odo += l;
            nodes.push(Node { odometer_km: odo, site: None });
        }
        NodePlan::new(nodes, 120.0, false).unwrap()
    })
}

proptest! {
    #[test]
    fn xi_symmetric_and_bounded(plan in arb_plan(), frac in 0.0f64..1.0) {
        let (lo, hi) = plan.span_km();
        let o = lo + frac * (hi - lo);
        let pos = plan.segment_of(o).unwrap();
        prop_assert!(pos.xi >= 0.0 && pos.xi <= 0.5 + 1e-12);
        let lower = plan.nodes()[pos.segment].odometer_km;
        let f = (o - lower) / pos.l_g_km;
        prop_assert!((pos.xi - f.min(1.0 - f)).abs() < 1e-9);
    }

    #[test]
    fn green_split_complements(xi in 0.0f64..0.4999, t_g in 10.0f64..300.0) {
        let sum = forward_green_s(xi, t_g).unwrap() + cross_green_s(xi, t_g).unwrap();
        prop_assert!((sum - 2.0 * t_g).abs() < 1e-9);
    }

    #[test]
    fn wave_head_monotone_and_clamped(plan in arb_plan(), t in -100.0f64..1500.0) {
        let path = WavePath::from_plan(&plan, Direction::Northbound);
        let (lo, hi) = plan.span_km();
        let p = path.head_position_km(t);
        prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        let later = path.head_position_km(t + 0.5);
        prop_assert!(later >= p - 1e-12);
    }

    #[test]
    fn speed_change_position_is_continuous(
        x0 in -100.0f64..100.0,
        v0 in 0.0f64..30.0,
        dv in 0.1f64..20.0,
        a in 0.5f64..4.0,
        t0 in 0.0f64..100.0,
        up in proptest::bool::ANY,
    ) {
        let (v1, a) = if up { (v0 + dv, a) } else { ((v0 - dv).max(0.0), -a) };
        prop_assume!(v1 != v0);
        let f = |t: f64| speed_change_position(t, x0, v0, v1, a, t0).unwrap();
        let ramp_end = t0 + (v1 - v0) / a;
        for junction in [t0, ramp_end] {
            let eps = 1e-3;
            let v_left = (f(junction) - f(junction - eps)) / eps;
            let v_right = (f(junction + eps) - f(junction)) / eps;
            prop_assert!((v_left - v_right).abs() < 0.05,
                "speed jump at {junction}: {v_left} vs {v_right}");
        }
    }

    #[test]
    fn stop_profile_monotone_no_overshoot(
        v0 in 0.5f64..35.0,
        d in 1.0f64..400.0,
        t0 in 0.0f64..50.0,
    ) {
        let t_stop = 2.0 * d / v0;
        let mut prev = f64::MIN;
        for i in 0..=200 {
            let t = t0 + (t_stop + 5.0) * i as f64 / 200.0;
            let x = stop_profile(t, t0, 0.0, v0, d).unwrap();
            prop_assert!(x <= d + 1e-9);
            prop_assert!(x >= prev - 1e-9);
            prev = x;
        }
        prop_assert!((stop_profile(t0 + t_stop + 10.0, t0, 0.0, v0, d).unwrap() - d).abs() < 1e-9);
    }
}
