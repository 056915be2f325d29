//! Invariant checks: property tests over the market primitives and
//! seeded-random batteries over the solvers.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use prfpp::forward::{build_prfpp, OutcomeTree, PeriodParams, PeriodSolution, ScenarioPath};
use prfpp::market::{
    pairwise_return_covariance, unconditional_up_prob, AgentPreferences, AgentSpec,
    CommonNoiseParams, MarketPeriodParams,
};
use prfpp::mfg::{
    mfe_decomposition, sample_population, solve_mfg_fixed_point, ParamDistribution, PopulationSpec,
};
use prfpp::nash::{
    best_response, two_agent_equilibrium, two_agent_joint_probs, BestResponseInputs,
};

fn prob() -> impl Strategy<Value = f64> {
    0.02..0.98_f64
}

fn market_strategy() -> impl Strategy<Value = (MarketPeriodParams, CommonNoiseParams)> {
    (1.01..2.0_f64, 0.3..0.99_f64, prob(), prob(), prob()).prop_filter_map(
        "regime order",
        |(u, d, pa, pb, pcn)| {
            let (hi, lo) = if pa > pb { (pa, pb) } else { (pb, pa) };
            if hi - lo < 1e-6 {
                return None;
            }
            let cn = CommonNoiseParams::new(pcn).ok()?;
            let m = MarketPeriodParams::new(u, d, hi, lo, &cn).ok()?;
            Some((m, cn))
        },
    )
}

proptest! {
    #[test]
    fn risk_neutral_prob_interior_and_excess_sign((m, _cn) in market_strategy()) {
        let q = m.risk_neutral_up_prob();
        prop_assert!(q > 0.0 && q < 1.0);
        // excess return positive iff p(1-q) > (1-p)q
        let excess_positive = m.expected_excess_return() > 0.0;
        let odds_positive = m.p * (1.0 - q) > (1.0 - m.p) * q;
        prop_assert_eq!(excess_positive, odds_positive);
    }

    #[test]
    fn regime_drift_gap_identity((m, _cn) in market_strategy()) {
        let (bull, bear) = m.regime_drifts();
        let gap = (m.p_bull - m.p_bear) * (m.u - m.d);
        prop_assert!((bull - bear - gap).abs() <= 1e-15 * gap.abs().max(1.0));
        prop_assert!(bull > bear);
    }

    #[test]
    fn covariance_nonnegative_with_shared_levels(
        (m1, cn) in market_strategy(),
        pb in prob(),
        pr in prob(),
    ) {
        prop_assume!(pb - pr > 1e-6);
        let m2 = MarketPeriodParams::new(m1.u, m1.d, pb, pr, &cn).unwrap();
        let cov = pairwise_return_covariance(&cn, &m1, &m2).unwrap();
        prop_assert!(cov >= -1e-15, "covariance {cov} negative");
    }

    #[test]
    fn covariance_vanishes_without_regime_exposure((m1, cn) in market_strategy(), p in prob()) {
        let flat = MarketPeriodParams::without_common_noise(m1.u, m1.d, p).unwrap();
        let cov = pairwise_return_covariance(&cn, &flat, &flat).unwrap();
        prop_assert_eq!(cov, 0.0);
    }

    #[test]
    fn unconditional_prob_affine_in_pcn(pb in prob(), pr in prob()) {
        prop_assume!(pb > pr);
        let at = |pcn: f64| {
            unconditional_up_prob(&CommonNoiseParams::new(pcn).unwrap(), pb, pr).unwrap()
        };
        // affine: the midpoint value is the average of the endpoints
        let (a, b) = (0.2, 0.8);
        let mid = at(0.5 * (a + b));
        prop_assert!((mid - 0.5 * (at(a) + at(b))).abs() < 1e-15);
        // endpoints approach the conditional probabilities
        prop_assert!((at(1.0 - 1e-9) - pb).abs() < 1e-8);
        prop_assert!((at(1e-9) - pr).abs() < 1e-8);
    }

    #[test]
    fn joint_probs_sum_to_one((m1, cn) in market_strategy(), (m2, _) in market_strategy()) {
        let a1 = AgentSpec::new(AgentPreferences::new(2.0, 0.5, 0.0).unwrap(), m1);
        let a2 = AgentSpec::new(AgentPreferences::new(3.0, 0.5, 0.0).unwrap(), m2);
        let j = two_agent_joint_probs(&a1, &a2, &cn).unwrap();
        prop_assert!((j.sum() - 1.0).abs() < 1e-12);
        prop_assert!(j.determinant() > 0.0);
    }

    #[test]
    fn mfe_decomposition_sums_exactly(
        (m, cn) in market_strategy(),
        gamma in 0.5..6.0_f64,
        theta in 0.0..1.0_f64,
        y in 0.0..3.0_f64,
    ) {
        let agent = AgentSpec::new(AgentPreferences::new(gamma, theta, 0.0).unwrap(), m);
        let (merton, competition) = mfe_decomposition(&agent, &cn, y);
        let direct = prfpp::mfg::mfe_strategy(&agent, &cn, y);
        prop_assert!((merton + competition - direct).abs() <= 1e-14 * direct.abs().max(1.0));
    }
}

fn uniform(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn random_two_agents(rng: &mut ChaCha12Rng) -> (AgentSpec, AgentSpec, CommonNoiseParams) {
    let cn = CommonNoiseParams::new(uniform(rng, 0.25, 0.75)).unwrap();
    let agent = |rng: &mut ChaCha12Rng| {
        let pr = uniform(rng, 0.15, 0.45);
        let pb = uniform(rng, 0.5, 0.85);
        let m = MarketPeriodParams::new(
            uniform(rng, 1.05, 1.4),
            uniform(rng, 0.6, 0.95),
            pb,
            pr,
            &cn,
        )
        .unwrap();
        AgentSpec::new(
            AgentPreferences::new(uniform(rng, 1.0, 6.0), uniform(rng, 0.1, 1.0), 0.0).unwrap(),
            m,
        )
    };
    (agent(rng), agent(rng), cn)
}

#[test]
fn two_agent_root_respects_singularity_bound() {
    let mut rng = ChaCha12Rng::seed_from_u64(1001);
    for i in 0..100 {
        let (a1, a2, cn) = random_two_agents(&mut rng);
        let sol = two_agent_equilibrium(&a1, &a2, &cn, 1e-8)
            .unwrap_or_else(|e| panic!("draw {i}: {e}"));
        let j = two_agent_joint_probs(&a1, &a2, &cn).unwrap();
        let q1 = a1.market.risk_neutral_up_prob();
        let y_sing = (j.p11 * (1.0 - q1) / (j.p01 * q1))
            .powf(a2.prefs.theta * a2.prefs.gamma / ((2.0 - a1.prefs.theta) * a1.prefs.gamma));
        let y = sol.fixed_point_y.unwrap();
        assert!(y > 0.0 && y < y_sing, "draw {i}: y* = {y} vs singularity {y_sing}");
    }
}

#[test]
fn two_agent_equilibrium_is_mutual_best_response() {
    let mut rng = ChaCha12Rng::seed_from_u64(1002);
    for i in 0..100 {
        let (a1, a2, cn) = random_two_agents(&mut rng);
        let sol = two_agent_equilibrium(&a1, &a2, &cn, 1e-8).unwrap();
        let br1 =
            best_response(&BestResponseInputs::new(a1, vec![(a2, sol.strategies[1])], cn)).unwrap();
        let br2 =
            best_response(&BestResponseInputs::new(a2, vec![(a1, sol.strategies[0])], cn)).unwrap();
        assert!(
            (br1 - sol.strategies[0]).abs() < 1e-8 && (br2 - sol.strategies[1]).abs() < 1e-8,
            "draw {i}: residuals {:.2e}, {:.2e}",
            (br1 - sol.strategies[0]).abs(),
            (br2 - sol.strategies[1]).abs()
        );
    }
}

#[test]
fn two_agent_labels_permute() {
    let mut rng = ChaCha12Rng::seed_from_u64(1003);
    for _ in 0..50 {
        let (a1, a2, cn) = random_two_agents(&mut rng);
        let ab = two_agent_equilibrium(&a1, &a2, &cn, 1e-8).unwrap();
        let ba = two_agent_equilibrium(&a2, &a1, &cn, 1e-8).unwrap();
        assert!((ab.strategies[0] - ba.strategies[1]).abs() < 1e-8);
        assert!((ab.strategies[1] - ba.strategies[0]).abs() < 1e-8);
    }
}

#[test]
fn opponent_level_improvements_never_hurt() {
    // pi_1 is nondecreasing in the rival's u and d
    let mut rng = ChaCha12Rng::seed_from_u64(1004);
    let h = 1e-4;
    for i in 0..100 {
        let (a1, a2, cn) = random_two_agents(&mut rng);
        let base = two_agent_equilibrium(&a1, &a2, &cn, 1e-9).unwrap().strategies[0];
        let mut up = a2;
        up.market.u += h;
        let du = two_agent_equilibrium(&a1, &up, &cn, 1e-9).unwrap().strategies[0] - base;
        let mut down = a2;
        down.market.d += h;
        let dd = two_agent_equilibrium(&a1, &down, &cn, 1e-9).unwrap().strategies[0] - base;
        assert!(du >= -1e-10, "draw {i}: pi_1 fell by {du} when u_2 rose");
        assert!(dd >= -1e-10, "draw {i}: pi_1 fell by {dd} when d_2 rose");
    }
}

#[test]
fn bad_own_stock_forces_short_position() {
    // p_bull(1) < 1/2 < q(1) implies a short position whatever the rival
    let mut rng = ChaCha12Rng::seed_from_u64(1005);
    for i in 0..100 {
        let (_, a2, cn) = random_two_agents(&mut rng);
        let pb = uniform(&mut rng, 0.2, 0.49);
        let pr = uniform(&mut rng, 0.02, pb - 0.1_f64.min(pb / 2.0));
        // q > 1/2 means d closer to 1 than u: pick u - 1 < 1 - d
        let d = uniform(&mut rng, 0.7, 0.9);
        let u = 1.0 + uniform(&mut rng, 0.2, 0.9) * (1.0 - d);
        let m1 = MarketPeriodParams::new(u, d, pb, pr, &cn).unwrap();
        assert!(m1.risk_neutral_up_prob() > 0.5);
        let a1 = AgentSpec::new(
            AgentPreferences::new(uniform(&mut rng, 1.0, 6.0), uniform(&mut rng, 0.1, 1.0), 0.0)
                .unwrap(),
            m1,
        );
        let sol = two_agent_equilibrium(&a1, &a2, &cn, 1e-8).unwrap();
        let y = sol.fixed_point_y.unwrap();
        assert!(y < 1.0, "draw {i}: y* = {y} should be below 1");
        assert!(sol.strategies[0] < 0.0, "draw {i}: pi_1 = {} should be short", sol.strategies[0]);
    }
}

#[test]
fn positive_excess_populations_have_positive_fixed_points() {
    let mut rng = ChaCha12Rng::seed_from_u64(1006);
    let mut tested = 0;
    while tested < 60 {
        // windows high enough that every draw has positive expected excess
        let d_lo = uniform(&mut rng, 0.88, 0.93);
        let u_lo = uniform(&mut rng, 1.1, 1.2);
        let bear_lo = uniform(&mut rng, 0.4, 0.5);
        let bull_lo = uniform(&mut rng, 0.55, 0.65);
        let spec = PopulationSpec {
            gamma: ParamDistribution::Uniform(1.0, 3.0),
            theta: ParamDistribution::Uniform(0.1, 0.6),
            u: ParamDistribution::Uniform(u_lo, u_lo + 0.05),
            d: ParamDistribution::Uniform(d_lo, d_lo + 0.03),
            p_bull: ParamDistribution::Uniform(bull_lo, bull_lo + 0.05),
            p_bear: ParamDistribution::Uniform(bear_lo, bear_lo + 0.04),
            p_cn: uniform(&mut rng, 0.3, 0.7),
            allow_equal_regimes: false,
        };
        if spec.validate().is_err() {
            continue;
        }
        // worst-case corner of the support must still have positive excess
        let p_min = spec.p_cn * bull_lo + (1.0 - spec.p_cn) * bear_lo;
        let worst = p_min * (u_lo - 1.0) + (1.0 - p_min) * (d_lo - 1.0);
        if worst <= 0.0 {
            continue;
        }
        tested += 1;
        let pop = sample_population(&spec, 256, tested as u64).unwrap();
        for a in &pop.agents {
            assert!(a.market.expected_excess_return() > 0.0);
        }
        let sol = solve_mfg_fixed_point(&pop, 1e-12, 10_000).unwrap();
        assert!(sol.y_star > 0.0, "y* = {} not positive", sol.y_star);
        // self-consistency of the defining identity
        let implied: f64 = pop
            .agents
            .iter()
            .zip(&sol.strategies)
            .map(|(a, pi)| {
                let (b, r) = a.market.regime_drifts();
                pi * (b - r)
            })
            .sum::<f64>()
            / pop.agents.len() as f64;
        assert!((implied - sol.y_star).abs() < 1e-10);
        // competition components stay nonnegative
        for a in &pop.agents {
            let (_, competition) = mfe_decomposition(a, &pop.cn, sol.y_star);
            assert!(competition >= -1e-12, "competition component {competition}");
        }
    }
}

#[test]
fn forward_utilities_increasing_and_concave() {
    let cn = CommonNoiseParams::new(0.6).unwrap();
    let m1 = MarketPeriodParams::new(1.1, 0.9, 0.6, 0.36, &cn).unwrap();
    let m2 = MarketPeriodParams::new(1.1, 0.9, 0.46, 0.2, &cn).unwrap();
    let agents = vec![
        AgentPreferences::new(10.0, 0.9, 0.0).unwrap(),
        AgentPreferences::new(10.0, 0.9, 0.0).unwrap(),
    ];
    let path = ScenarioPath {
        agents: agents.clone(),
        periods: vec![PeriodParams { markets: vec![m1, m2], cn }; 2],
    };
    let a1 = AgentSpec::new(agents[0], m1);
    let a2 = AgentSpec::new(agents[1], m2);
    let sol = two_agent_equilibrium(&a1, &a2, &cn, 1e-10).unwrap();
    let fp = build_prfpp(
        &path,
        &[PeriodSolution::Nash(sol.clone()), PeriodSolution::Nash(sol)],
    )
    .unwrap();
    let h = 1e-4;
    for agent in 0..2 {
        for t in 0..=2 {
            let mut x = -0.5;
            while x <= 0.5 {
                let lo = fp.evaluate_utility(agent, t, x - h).unwrap();
                let mid = fp.evaluate_utility(agent, t, x).unwrap();
                let hi = fp.evaluate_utility(agent, t, x + h).unwrap();
                assert!(hi > mid && mid > lo, "U_t not strictly increasing at {x}");
                assert!(hi - 2.0 * mid + lo < 0.0, "U_t not strictly concave at {x}");
                x += 0.25;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn tree_probabilities_sum_to_one_everywhere(
        (m1, cn) in market_strategy(),
        pa in 0.02..0.98_f64,
        pb in 0.02..0.98_f64,
        horizon in 1..3_usize,
    ) {
        let (hi, lo) = if pa > pb { (pa, pb) } else { (pb, pa) };
        prop_assume!(hi - lo > 1e-6);
        let m2 = MarketPeriodParams::new(m1.u, 0.8 * m1.d, hi, lo, &cn).unwrap();
        let path = ScenarioPath {
            agents: vec![
                AgentPreferences::new(2.0, 0.4, 0.0).unwrap(),
                AgentPreferences::new(3.0, 0.6, 0.0).unwrap(),
            ],
            periods: vec![PeriodParams { markets: vec![m1, m2], cn }; horizon],
        };
        let tree = OutcomeTree::build(&path).unwrap();
        for atoms in &tree.periods {
            let total: f64 = atoms.iter().map(|a| a.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-14);
        }
    }
}
