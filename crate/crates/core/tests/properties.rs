use gsp_mediator::{
    auction_revenue, compare, effective_ctr, fitness_sweep, generate_scenario, mediator_score,
    revenue_closed_form, s_auction_price_scores, sne_price_scores, verify_sne, CtrCurve,
    GeneratorParams, MediatorProfile, SneVerdict, Tolerance,
};
use proptest::prelude::*;

fn ctr_curve() -> impl Strategy<Value = CtrCurve> {
    (0.05f64..=1.0, prop::collection::vec(0.1f64..0.95, 0..10)).prop_map(|(top, ratios)| {
        let mut gammas = vec![top];
        for r in ratios {
            let next = gammas.last().unwrap() * r;
            gammas.push(next);
        }
        CtrCurve::new(gammas).unwrap()
    })
}

fn ranked_scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..100.0, 0..20).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        v
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn revenue_recursion_matches_closed_form(ctr in ctr_curve(), s in ranked_scores()) {
        let r = sne_price_scores(&ctr, &s).unwrap();
        let direct = auction_revenue(&ctr, &r).unwrap();
        let closed = revenue_closed_form(&ctr, &s).unwrap();
        prop_assert!(close(direct, closed, 1e-12), "{direct} vs {closed}");
    }

    #[test]
    fn prices_lie_under_the_next_score(ctr in ctr_curve(), s in ranked_scores()) {
        let r = sne_price_scores(&ctr, &s).unwrap();
        prop_assert_eq!(r.len(), ctr.slots());
        for (i, &price) in r.iter().enumerate() {
            let next = s.get(i + 1).copied().unwrap_or(0.0);
            prop_assert!(price >= 0.0);
            prop_assert!(price <= next * (1.0 + 1e-12), "r_{} = {price} > s = {next}", i + 2);
        }
        for w in r.windows(2) {
            prop_assert!(w[0] >= w[1] * (1.0 - 1e-12), "prices not decreasing: {w:?}");
        }
    }

    #[test]
    fn recursion_is_an_equilibrium(ctr in ctr_curve(), s in ranked_scores()) {
        let r = sne_price_scores(&ctr, &s).unwrap();
        let verdict = verify_sne(&ctr, &s, &r, Tolerance::DEFAULT).unwrap();
        prop_assert_eq!(verdict, SneVerdict::Pass);
    }

    #[test]
    fn prices_scale_with_scores(ctr in ctr_curve(), s in ranked_scores(), c in 0.01f64..100.0) {
        let r = sne_price_scores(&ctr, &s).unwrap();
        let scaled: Vec<f64> = s.iter().map(|x| x * c).collect();
        let rc = sne_price_scores(&ctr, &scaled).unwrap();
        for (a, b) in r.iter().zip(&rc) {
            prop_assert!(close(a * c, *b, 1e-12));
        }
    }

    #[test]
    fn sub_auction_prices_ignore_slot_and_fitness(
        ctr in ctr_curve(),
        s in ranked_scores(),
        pick in (0usize..100, 0usize..100, 0.01f64..=0.99),
    ) {
        let k = ctr.slots();
        let secondary = 1 + pick.0 % k;
        let slot = 1 + pick.1 % k;
        let fitness = pick.2 / ctr.top();
        let m = MediatorProfile::new("m", 1.0, fitness, secondary).unwrap();
        let reduced = s_auction_price_scores(&ctr, secondary, &s).unwrap();
        let eff = effective_ctr(&ctr, slot, &m).unwrap().as_ctr_curve().unwrap();
        let full = sne_price_scores(&eff, &s).unwrap();
        prop_assert_eq!(reduced.len(), full.len());
        for (a, b) in reduced.iter().zip(&full) {
            prop_assert!(close(*a, *b, 1e-10), "{a} vs {b}");
        }
    }

    #[test]
    fn mediator_score_is_linear_in_fitness(
        ctr in ctr_curve(),
        s in ranked_scores(),
        pick in (0usize..100, 0.01f64..=0.49),
    ) {
        let secondary = 1 + pick.0 % ctr.slots();
        let f = pick.1 / ctr.top();
        let m = MediatorProfile::new("m", 1.0, f, secondary).unwrap();
        let one = mediator_score(&ctr, &m, &s).unwrap();
        let two = mediator_score(&ctr, &m.with_fitness(2.0 * f), &s).unwrap();
        prop_assert!(close(one.summation, one.closed_form, 1e-12));
        prop_assert!(close(2.0 * one.value(), two.value(), 1e-12));
    }

    #[test]
    fn market_identities_hold(seed in any::<u64>(), index in 0u64..1000) {
        let params = GeneratorParams { max_advertisers: 20, ..GeneratorParams::default() };
        let scenario = generate_scenario(seed, index, &params).unwrap();
        let report = compare(&scenario).unwrap();
        let violations = report.violations(Tolerance::DEFAULT);
        prop_assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn mediator_score_grows_along_a_sweep(seed in any::<u64>()) {
        let params = GeneratorParams { max_advertisers: 12, max_slots: 5, ..GeneratorParams::default() };
        let scenario = generate_scenario(seed, 0, &params).unwrap();
        let f_max = 0.99 / scenario.ctr.top();
        let rows = fitness_sweep(&scenario, 0.01, f_max, 25, Tolerance::DEFAULT).unwrap();
        for w in rows.windows(2) {
            prop_assert!(w[1].mediator_score >= w[0].mediator_score);
            // A better mediator never ranks worse.
            let rank = |r: Option<usize>| r.unwrap_or(usize::MAX);
            prop_assert!(rank(w[1].mediator_rank) <= rank(w[0].mediator_rank));
        }
    }
}
