use lolypop_core::adaptation::{
    festive_select, lolypop_select, tune_in, DecisionContext, FestiveConfig, FestiveState, LolypopConfig,
};
use proptest::prelude::*;

fn p_entry() -> impl Strategy<Value = f64> {
    prop_oneof![Just(-1.0), 0.0..=1.0f64, Just(1.0)]
}

fn context() -> impl Strategy<Value = DecisionContext> {
    (prop::collection::vec(p_entry(), 1..9), 0.0..=1.0f64, prop::option::of(0usize..9)).prop_map(
        |(p_success, omega_t, j_prev)| DecisionContext { t_r: 10.2, t_p: 13.0, omega_t, j_prev, p_success },
    )
}

proptest! {
    #[test]
    fn frozen_when_transitions_exceeded(ctx in context(), sigma in 0.0..=1.0f64, omega in 0.0..=1.0f64) {
        let cfg = LolypopConfig::new(sigma, omega);
        let j = lolypop_select(&ctx, &cfg).unwrap();
        prop_assert!(j < ctx.p_success.len());
        if ctx.omega_t > omega {
            prop_assert!(j <= ctx.j_prev.unwrap_or(0));
        }
    }

    #[test]
    fn monotone_in_sigma(ctx in context(), s1 in 0.0..=1.0f64, s2 in 0.0..=1.0f64, omega in 0.0..=1.0f64) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let a = lolypop_select(&ctx, &LolypopConfig::new(lo, omega)).unwrap();
        let b = lolypop_select(&ctx, &LolypopConfig::new(hi, omega)).unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn local_in_entries_above_choice(ctx in context(), sigma in 0.0..0.9f64, noise in prop::collection::vec(0.0..1.0f64, 9)) {
        let cfg = LolypopConfig::new(sigma, 1.0);
        let j = lolypop_select(&ctx, &cfg).unwrap();
        if ctx.p_success.iter().all(|&p| p == -1.0) {
            return Ok(());
        }
        let mut changed = ctx.clone();
        for (k, p) in changed.p_success.iter_mut().enumerate().skip(j + 1) {
            // Any value still failing the bound.
            *p = if noise[k] < 0.2 { -1.0 } else { (1.0 - sigma) * noise[k] * 0.999 };
        }
        prop_assert_eq!(lolypop_select(&changed, &cfg).unwrap(), j);
    }

    #[test]
    fn tune_in_definition(t in 2.0..1000.0f64, tau in 0.5..4.0f64, extra in 0.0..3.0f64) {
        let delta = 2.0 * tau + extra * tau;
        let eps = 1e-6;
        let i = tune_in(t, tau, delta).unwrap();
        let deadline_ok = |i: u64| i as f64 * tau + delta >= t + tau - eps;
        prop_assert!(deadline_ok(i));
        // Minimal: the previous segment no longer has enough slack.
        if i > 0 {
            prop_assert!(!deadline_ok(i - 1) || (i as f64 - 1.0) * tau + delta < t + tau + eps);
        }
        // Already published, or the next one to be published.
        let available = (i as f64 + 1.0) * tau <= t + eps;
        prop_assert!(available || i as f64 * tau <= t + eps);
    }

    #[test]
    fn festive_one_step_and_gate(
        throughputs in prop::collection::vec(0.0..3e7f64, 1..120),
        k in 1usize..8,
        alpha in 0.0..30.0f64,
        p in 0.05..=1.0f64,
    ) {
        let rates = [1e5, 2e5, 4e5, 7e5, 1.4e6, 2.7e6, 5.3e6, 1e7, 2e7];
        let cfg = FestiveConfig { alpha, p, k, ..FestiveConfig::default() };
        let mut s = FestiveState::new(&cfg);
        let mut selections = vec![];
        for &x in &throughputs {
            let j = festive_select(&s, &rates, &cfg);
            s.record_selection(j);
            s.record_throughput(x);
            selections.push(j);
        }
        prop_assert_eq!(selections[0], 0);
        let mut last_up: Option<usize> = None;
        for (n, w) in selections.windows(2).enumerate() {
            prop_assert!(w[0].abs_diff(w[1]) <= 1);
            if w[1] > w[0] {
                if let Some(u) = last_up {
                    prop_assert!(n + 1 - u >= k, "up at {} after up at {u}, k={k}", n + 1);
                }
                last_up = Some(n + 1);
            }
        }
    }
}
