use serde::Serialize;

use super::RewardCoeffs;

/// The four reward terms of one step and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub distance: f64,
    pub success: f64,
    pub collision: f64,
    pub time: f64,
    pub total: f64,
}

/// Distance progress, success bonus, collision penalty and time penalty.
/// The distance term is the per-step decrease of tip-to-target distance.
pub fn compute_reward(
    prev_distance: f64,
    distance: f64,
    collided: bool,
    succeeded: bool,
    coeffs: &RewardCoeffs,
) -> RewardBreakdown {
    let distance_term = coeffs.w_dist * (prev_distance - distance);
    let success = if succeeded { coeffs.r_success } else { 0.0 };
    let collision = if collided { coeffs.r_collision } else { 0.0 };
    let time = coeffs.r_time;
    RewardBreakdown {
        distance: distance_term,
        success,
        collision,
        time,
        total: distance_term + success + collision + time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn idle_step_costs_time_only() {
        let c = RewardCoeffs::default();
        let r = compute_reward(0.2, 0.2, false, false, &c);
        assert_eq!((r.distance, r.success, r.collision, r.time, r.total), (0.0, 0.0, 0.0, -0.01, -0.01));
    }

    #[test]
    fn ten_millimeters_of_progress() {
        let r = compute_reward(0.110, 0.100, false, false, &RewardCoeffs::default());
        approx::assert_abs_diff_eq!(r.distance, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn simultaneous_events_all_count() {
        let c = RewardCoeffs::default();
        let r = compute_reward(0.004, 0.002, true, true, &c);
        assert_eq!(r.success, 10.0);
        assert_eq!(r.collision, -1.0);
        assert_eq!(r.total, r.distance + r.success + r.collision + r.time);
    }

    proptest! {
        #[test]
        fn total_is_exact_sum(prev in 0.0f64..1.0, d in 0.0f64..1.0, col: bool, suc: bool,
                              w in 0.0f64..1000.0, rs in 0.0f64..100.0, rc in -10.0f64..0.0, rt in -1.0f64..-1e-6) {
            let c = RewardCoeffs { w_dist: w, r_success: rs, r_collision: rc, r_time: rt };
            let r = compute_reward(prev, d, col, suc, &c);
            prop_assert_eq!(r.total, r.distance + r.success + r.collision + r.time);
            prop_assert!(r.collision <= 0.0 && r.time < 0.0);
            prop_assert!(r.success == 0.0 || r.success == rs);
        }

        #[test]
        fn approach_beats_retreat(d in 0.01f64..1.0, step in 1e-4f64..0.01) {
            let c = RewardCoeffs::default();
            let toward = compute_reward(d, d - step, false, false, &c);
            let away = compute_reward(d, d + step, false, false, &c);
            prop_assert!(toward.distance > away.distance);
            prop_assert!(toward.distance > 0.0);
        }
    }
}
