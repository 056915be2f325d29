//! Finite-population equilibrium solvers.
//!
//! * best response of one agent to fixed competitor policies,
//! * the symmetric equilibrium of the homogeneous N-agent game via a scalar
//!   fixed point in y = exp((1-θ/N)γ(u-d)π),
//! * the heterogeneous 2-agent equilibrium via a bracketed root between the
//!   left/right transforms of the coupled system,
//! * an experimental Gauss-Seidel best-response iteration for heterogeneous
//!   N > 2, where no equilibrium theory exists.
//!
//! Root finding is bisection throughout: the maps are monotone with proven
//! brackets, and bisection is unconditionally robust there.

use crate::error::{Error, Result, Violations};
use crate::market::{AgentPreferences, AgentSpec, CommonNoiseParams, MarketPeriodParams};

/// Exponent magnitude beyond which e^x is treated as a range error instead of
/// silently overflowing to infinity.
pub const EXP_GUARD: f64 = 700.0;

/// Bisection width target on the fixed-point variable y (relative for y > 1).
/// Iteration count is capped anyway, so this only buys extra digits.
const Y_TOL: f64 = 1e-14;
const MAX_BISECT: usize = 200;

fn guarded_exp(x: f64, what: &str) -> Result<f64> {
    if x.abs() > EXP_GUARD {
        return Err(Error::Overflow(format!(
            "exponent {x:.3e} in {what} exceeds the guard {EXP_GUARD}"
        )));
    }
    Ok(x.exp())
}

/// One agent's view of the single-period game: her own spec, every
/// competitor's spec and current dollar strategy, the common noise, and the
/// population size N = 1 + number of competitors.
#[derive(Debug, Clone)]
pub struct BestResponseInputs {
    pub me: AgentSpec,
    pub others: Vec<(AgentSpec, f64)>,
    pub cn: CommonNoiseParams,
    pub n_agents: usize,
}

impl BestResponseInputs {
    pub fn new(me: AgentSpec, others: Vec<(AgentSpec, f64)>, cn: CommonNoiseParams) -> Self {
        let n_agents = 1 + others.len();
        BestResponseInputs { me, others, cn, n_agents }
    }

    fn check(&self) -> Result<()> {
        let mut v = Violations::new();
        if self.n_agents != 1 + self.others.len() {
            v.push(format!(
                "n_agents = {} but 1 + len(others) = {}",
                self.n_agents,
                1 + self.others.len()
            ));
        }
        if self.me.prefs.theta > 0.0 && self.n_agents < 2 {
            v.push("competition weight theta > 0 requires at least 2 agents");
        }
        if let Err(e) = self.me.validate_relaxed() {
            v.0.extend(e.0);
        }
        for (j, (spec, pi)) in self.others.iter().enumerate() {
            if let Err(e) = spec.validate_relaxed() {
                v.0.extend(e.0.into_iter().map(|m| format!("opponent {j}: {m}")));
            }
            if !pi.is_finite() {
                v.push(format!("opponent {j}: strategy must be finite, got {pi}"));
            }
        }
        v.into_result()?;
        Ok(())
    }
}

/// Intermediate best-response coefficients.
///
/// `a1`/`a2` weight the up/down outcomes of the agent's own stock after the
/// competitors' positions are integrated out regime by regime; `c_bull[j]` and
/// `c_bear[j]` are opponent j's regime-conditional moment factors. `b1`/`b2`
/// close the optimal value: a1*b1 + a2*b2 equals minus the optimal
/// single-period expected utility at zero relative wealth, with
/// b1 = ρ^-(1-q), b2 = ρ^q for ρ = (1-q)a1/(q a2).
#[derive(Debug, Clone)]
pub struct ResponseCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c_bull: Vec<f64>,
    pub c_bear: Vec<f64>,
}

impl ResponseCoefficients {
    /// The factor dividing into the forward process per period:
    /// a1*b1 + a2*b2.
    pub fn value_factor(&self) -> f64 {
        self.a1 * self.b1 + self.a2 * self.b2
    }

    /// Optimal log-ratio ln((1-q) a1 / (q a2)); the best response is this
    /// divided by γ(1-θ/N)(u-d).
    pub fn log_ratio(&self, q: f64) -> f64 {
        ((1.0 - q) * self.a1 / (q * self.a2)).ln()
    }
}

pub fn response_coefficients(inputs: &BestResponseInputs) -> Result<ResponseCoefficients> {
    inputs.check()?;
    let me = &inputs.me;
    let gamma = me.prefs.gamma;
    let weight = gamma * me.prefs.theta / inputs.n_agents as f64;

    let mut c_bull = Vec::with_capacity(inputs.others.len());
    let mut c_bear = Vec::with_capacity(inputs.others.len());
    // products of C factors accumulated in log space, exponentiated once
    let mut log_c1 = 0.0;
    let mut log_c0 = 0.0;
    for (spec, pi) in &inputs.others {
        let m = &spec.market;
        let eu = guarded_exp(weight * pi * (m.u - 1.0), "opponent C factor")?;
        let ed = guarded_exp(weight * pi * (m.d - 1.0), "opponent C factor")?;
        let c1 = m.p_bull * eu + (1.0 - m.p_bull) * ed;
        let c0 = m.p_bear * eu + (1.0 - m.p_bear) * ed;
        log_c1 += c1.ln();
        log_c0 += c0.ln();
        c_bull.push(c1);
        c_bear.push(c0);
    }
    let prod_c1 = guarded_exp(log_c1, "product of bull C factors")?;
    let prod_c0 = guarded_exp(log_c0, "product of bear C factors")?;

    let m = &me.market;
    let p_cn = inputs.cn.p_cn;
    let a1 = m.p_bull * p_cn * prod_c1 + m.p_bear * (1.0 - p_cn) * prod_c0;
    let a2 = (1.0 - m.p_bull) * p_cn * prod_c1 + (1.0 - m.p_bear) * (1.0 - p_cn) * prod_c0;
    let q = m.risk_neutral_up_prob();
    let rho = (1.0 - q) * a1 / (q * a2);
    let b1 = rho.powf(-(1.0 - q));
    let b2 = rho.powf(q);
    Ok(ResponseCoefficients { a1, a2, b1, b2, c_bull, c_bear })
}

/// Optimal dollar position of `inputs.me` against the given competitor
/// strategies: ln((1-q)A¹/(qA²)) / (γ(1-θ/N)(u-d)).
pub fn best_response(inputs: &BestResponseInputs) -> Result<f64> {
    let me = &inputs.me;
    let scale = 1.0 - me.prefs.theta / inputs.n_agents as f64;
    if scale <= 0.0 {
        return Err(Error::Domain(format!(
            "1 - theta/N = {scale} is not positive (theta = {}, N = {})",
            me.prefs.theta, inputs.n_agents
        )));
    }
    let coeffs = response_coefficients(inputs)?;
    let q = me.market.risk_neutral_up_prob();
    Ok(coeffs.log_ratio(q) / (me.prefs.gamma * scale * (me.market.u - me.market.d)))
}

/// A¹B¹ + A²B², i.e. minus the optimal single-period expected utility of
/// relative wealth at zero wealth. This is the factor the forward process
/// divides by each period.
pub fn best_response_value_factor(inputs: &BestResponseInputs) -> Result<f64> {
    let scale = 1.0 - inputs.me.prefs.theta / inputs.n_agents as f64;
    if scale <= 0.0 {
        return Err(Error::Domain(format!(
            "1 - theta/N = {scale} is not positive"
        )));
    }
    Ok(response_coefficients(inputs)?.value_factor())
}

/// Equilibrium of a finite game: per-agent strategies, the scalar fixed-point
/// variable of the solver that produced it (when one exists), and the
/// per-agent per-period utility-update factors A¹B¹ + A²B².
#[derive(Debug, Clone)]
pub struct NashSolution {
    pub strategies: Vec<f64>,
    pub fixed_point_y: Option<f64>,
    pub update_factors: Vec<f64>,
}

/// Evaluate the homogeneous-game fixed-point map
/// f(y) = (1-q)/q * (p¹ p_cn r(y) + p⁰ (1-p_cn)) / ((1-p¹) p_cn r(y) + (1-p⁰)(1-p_cn)),
/// r(y) = ((p¹ y^{θ/(N-θ)} + 1-p¹)/(p⁰ y^{θ/(N-θ)} + 1-p⁰))^{N-1},
/// in a form stable for large N (r evaluated in log space).
pub fn homogeneous_fixed_point_map(
    y: f64,
    n: usize,
    prefs: &AgentPreferences,
    m: &MarketPeriodParams,
    cn: &CommonNoiseParams,
) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("fixed-point map requires y > 0, got {y}")));
    }
    if n < 1 {
        return Err(Error::Domain("population size must be at least 1".into()));
    }
    let theta = prefs.theta;
    let nf = n as f64;
    if theta >= nf {
        return Err(Error::Domain(format!("theta = {theta} must be < N = {n}")));
    }
    let e = theta / (nf - theta);
    let ye = y.powf(e);
    let log_r = (nf - 1.0)
        * (((m.p_bull * ye + (1.0 - m.p_bull)).ln()) - ((m.p_bear * ye + (1.0 - m.p_bear)).ln()));
    Ok(ratio_with_log_weight(m, cn, log_r))
}

/// (1-q)/q * (p¹ p_cn e^s + p⁰(1-p_cn)) / ((1-p¹) p_cn e^s + (1-p⁰)(1-p_cn)),
/// dividing through by e^s when s > 0 so nothing overflows.
fn ratio_with_log_weight(m: &MarketPeriodParams, cn: &CommonNoiseParams, s: f64) -> f64 {
    let q = m.risk_neutral_up_prob();
    let lead = (1.0 - q) / q;
    let p_cn = cn.p_cn;
    if s >= 0.0 {
        let w = (-s).exp();
        lead * (m.p_bull * p_cn + m.p_bear * (1.0 - p_cn) * w)
            / ((1.0 - m.p_bull) * p_cn + (1.0 - m.p_bear) * (1.0 - p_cn) * w)
    } else {
        let w = s.exp();
        lead * (m.p_bull * p_cn * w + m.p_bear * (1.0 - p_cn))
            / ((1.0 - m.p_bull) * p_cn * w + (1.0 - m.p_bear) * (1.0 - p_cn))
    }
}

/// Symmetric equilibrium of the homogeneous N-agent game.
///
/// The map f is increasing and concave with f(0) > 0 and a finite limit
/// f(+inf), so the diagonal crossing is unique; it is found by bracketed
/// bisection and the returned strategy is ln(y*) / (γ(1-θ/N)(u-d)).
pub fn homogeneous_equilibrium(
    n: usize,
    prefs: &AgentPreferences,
    m: &MarketPeriodParams,
    cn: &CommonNoiseParams,
    tol: f64,
) -> Result<NashSolution> {
    if tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    prefs.validate().map_err(Error::Invalid)?;
    m.validate_relaxed().map_err(Error::Invalid)?;
    if n < 1 {
        return Err(Error::Domain("population size must be at least 1".into()));
    }
    if prefs.theta >= n as f64 {
        return Err(Error::Domain(format!(
            "theta = {} must be < N = {n}",
            prefs.theta
        )));
    }

    // f(+inf) in stable form: scale the bull term by s = (p0/p1)^(N-1) <= 1.
    let nf = n as f64;
    let s = ((nf - 1.0) * (m.p_bear.ln() - m.p_bull.ln())).exp();
    let q = m.risk_neutral_up_prob();
    let f_inf = (1.0 - q) / q * (m.p_bull * cn.p_cn + m.p_bear * (1.0 - cn.p_cn) * s)
        / ((1.0 - m.p_bull) * cn.p_cn + (1.0 - m.p_bear) * (1.0 - cn.p_cn) * s);

    let f = |y: f64| homogeneous_fixed_point_map(y, n, prefs, m, cn);

    let mut lo = 1e-8_f64.min(f_inf);
    let mut expansions = 0;
    while f(lo)? <= lo {
        lo *= 0.5;
        expansions += 1;
        if expansions > MAX_BISECT {
            return Err(Error::Solver(
                "homogeneous bracket expansion failed on the lower endpoint".into(),
            ));
        }
    }
    let mut hi = 2.0 * f_inf;
    expansions = 0;
    while f(hi)? >= hi {
        hi *= 2.0;
        expansions += 1;
        if expansions > MAX_BISECT {
            return Err(Error::Solver(
                "homogeneous bracket expansion failed on the upper endpoint".into(),
            ));
        }
    }

    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > mid {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < Y_TOL * mid.max(1.0) {
            break;
        }
    }
    let y_star = 0.5 * (lo + hi);
    let residual = (f(y_star)? - y_star).abs();
    if residual > tol {
        return Err(Error::Solver(format!(
            "homogeneous fixed point residual {residual:.3e} exceeds tol {tol:.3e} \
             (bracket [{lo:.6e}, {hi:.6e}])"
        )));
    }

    let pi = y_star.ln() / (prefs.gamma * (1.0 - prefs.theta / nf) * (m.u - m.d));
    let factor = homogeneous_value_factor(n, prefs, m, cn, pi)?;
    Ok(NashSolution {
        strategies: vec![pi; n],
        fixed_point_y: Some(y_star),
        update_factors: vec![factor; n],
    })
}

/// A¹B¹ + A²B² for a homogeneous game where all N-1 opponents play `pi`,
/// with the (N-1)-fold C products kept in log space.
fn homogeneous_value_factor(
    n: usize,
    prefs: &AgentPreferences,
    m: &MarketPeriodParams,
    cn: &CommonNoiseParams,
    pi: f64,
) -> Result<f64> {
    let weight = prefs.gamma * prefs.theta / n as f64;
    let eu = guarded_exp(weight * pi * (m.u - 1.0), "homogeneous C factor")?;
    let ed = guarded_exp(weight * pi * (m.d - 1.0), "homogeneous C factor")?;
    let c1 = m.p_bull * eu + (1.0 - m.p_bull) * ed;
    let c0 = m.p_bear * eu + (1.0 - m.p_bear) * ed;
    let nm1 = (n - 1) as f64;
    // factor = A1^q A2^(1-q) ((q/(1-q))^(1-q) + ((1-q)/q)^q); evaluate the
    // A's relative to the common magnitude e^(max log-product).
    let (l1, l0) = (nm1 * c1.ln(), nm1 * c0.ln());
    let base = l1.max(l0);
    let w1 = (l1 - base).exp();
    let w0 = (l0 - base).exp();
    let a1 = m.p_bull * cn.p_cn * w1 + m.p_bear * (1.0 - cn.p_cn) * w0;
    let a2 = (1.0 - m.p_bull) * cn.p_cn * w1 + (1.0 - m.p_bear) * (1.0 - cn.p_cn) * w0;
    let q = m.risk_neutral_up_prob();
    let scale = guarded_exp(base, "homogeneous A coefficient")?;
    let rho = (1.0 - q) * a1 / (q * a2);
    Ok(scale * (a1 * rho.powf(-(1.0 - q)) + a2 * rho.powf(q)))
}

/// Joint law of the two Bernoulli indicators (B¹, B²) after integrating out
/// the regime: `pab` = P[B¹ = a, B² = b].
#[derive(Debug, Clone, Copy)]
pub struct TwoAgentJointProbs {
    pub p11: f64,
    pub p01: f64,
    pub p10: f64,
    pub p00: f64,
}

impl TwoAgentJointProbs {
    pub fn sum(&self) -> f64 {
        self.p11 + self.p01 + self.p10 + self.p00
    }

    /// p11 p00 - p01 p10; strictly positive when both agents' bull
    /// probabilities exceed their bear probabilities, zero when either agent
    /// carries no common-noise exposure.
    pub fn determinant(&self) -> f64 {
        self.p11 * self.p00 - self.p01 * self.p10
    }
}

pub fn two_agent_joint_probs(
    a1: &AgentSpec,
    a2: &AgentSpec,
    cn: &CommonNoiseParams,
) -> Result<TwoAgentJointProbs> {
    let mut v = Violations::new();
    if let Err(e) = a1.validate_relaxed() {
        v.0.extend(e.0.into_iter().map(|m| format!("agent 1: {m}")));
    }
    if let Err(e) = a2.validate_relaxed() {
        v.0.extend(e.0.into_iter().map(|m| format!("agent 2: {m}")));
    }
    v.into_result()?;

    let (m1, m2) = (&a1.market, &a2.market);
    let pc = cn.p_cn;
    let probs = TwoAgentJointProbs {
        p11: pc * m2.p_bull * m1.p_bull + (1.0 - pc) * m2.p_bear * m1.p_bear,
        p01: pc * m2.p_bull * (1.0 - m1.p_bull) + (1.0 - pc) * m2.p_bear * (1.0 - m1.p_bear),
        p10: pc * (1.0 - m2.p_bull) * m1.p_bull + (1.0 - pc) * (1.0 - m2.p_bear) * m1.p_bear,
        p00: pc * (1.0 - m2.p_bull) * (1.0 - m1.p_bull)
            + (1.0 - pc) * (1.0 - m2.p_bear) * (1.0 - m1.p_bear),
    };
    debug_assert!((probs.sum() - 1.0).abs() < 1e-12);
    Ok(probs)
}

/// Heterogeneous 2-agent forward Nash equilibrium.
///
/// Solves L(y) = R(y) (the transformed coupled best-response system) by
/// bisection on (ε, y_sing), where y_sing = (p¹¹(1-q¹)/(p⁰¹q¹))^(θ²γ²/((2-θ¹)γ¹))
/// is the singular point R blows up at from the left. Strategies follow from
/// π¹ = 2 ln y* / ((u¹-d¹)γ²θ²) and the agent-2 closed form.
///
/// Degenerate cases are decoupled exactly: an opponent whose market has
/// p_bull == p_bear contributes constant C factors, so the other agent's best
/// response is opponent-independent; θ² == 0 likewise decouples agent 2.
pub fn two_agent_equilibrium(
    a1: &AgentSpec,
    a2: &AgentSpec,
    cn: &CommonNoiseParams,
    tol: f64,
) -> Result<NashSolution> {
    if tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let joint = two_agent_joint_probs(a1, a2, cn)?;

    let decoupled_1 = a2.market.p_bull == a2.market.p_bear; // agent 1's BR ignores pi2
    let decoupled_2 = a1.market.p_bull == a1.market.p_bear || a2.prefs.theta == 0.0;
    if decoupled_1 || decoupled_2 {
        return two_agent_decoupled(a1, a2, cn, decoupled_1, decoupled_2);
    }

    let q1 = a1.market.risk_neutral_up_prob();
    let q2 = a2.market.risk_neutral_up_prob();
    let (g1, g2) = (a1.prefs.gamma, a2.prefs.gamma);
    let (t1, t2) = (a1.prefs.theta, a2.prefs.theta);
    let exp_l = g1 * t1 / (g2 * (2.0 - t2));
    let exp_r = (2.0 - t1) * g1 / (t2 * g2);
    let c = (1.0 - q1) / q1;

    let left = |y: f64| {
        ((1.0 - q2) * (joint.p11 * y + joint.p01) / (q2 * (joint.p10 * y + joint.p00)))
            .powf(exp_l)
    };
    let right = |y: f64| {
        let t = y.powf(exp_r);
        (joint.p10 * c - joint.p00 * t) / (-joint.p11 * c + joint.p01 * t)
    };

    let y_sing = (joint.p11 * c / joint.p01).powf(1.0 / exp_r);
    let lo0 = 1e-14 * y_sing;
    let hi0 = (1.0 - 1e-12) * y_sing;
    let g_lo = left(lo0) - right(lo0);
    let g_hi = left(hi0) - right(hi0);
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Solver(format!(
            "no sign change in the 2-agent bracket: L-R = {g_lo:.6e} at y = {lo0:.6e}, \
             {g_hi:.6e} at y = {hi0:.6e} (L = {:.6e}/{:.6e}, R = {:.6e}/{:.6e}, y_sing = {y_sing:.6e})",
            left(lo0),
            left(hi0),
            right(lo0),
            right(hi0)
        )));
    }

    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if left(mid) - right(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < Y_TOL * mid.max(1.0) {
            break;
        }
    }
    let y_star = 0.5 * (lo + hi);
    let (l, r) = (left(y_star), right(y_star));
    let rel_residual = (l - r).abs() / l.abs().max(r.abs()).max(1e-300);
    if rel_residual > tol.max(1e-10) {
        return Err(Error::Solver(format!(
            "2-agent root residual |L-R| = {:.3e} (relative {rel_residual:.3e}) exceeds tolerance \
             at y = {y_star:.12e}",
            (l - r).abs()
        )));
    }

    let pi1 = 2.0 * y_star.ln() / ((a1.market.u - a1.market.d) * g2 * t2);
    let pi2 = ((1.0 - q2) * (joint.p11 * y_star + joint.p01)
        / (q2 * (joint.p10 * y_star + joint.p00)))
        .ln()
        / (g2 * (1.0 - t2 / 2.0) * (a2.market.u - a2.market.d));

    let f1 = best_response_value_factor(&BestResponseInputs::new(
        *a1,
        vec![(*a2, pi2)],
        *cn,
    ))?;
    let f2 = best_response_value_factor(&BestResponseInputs::new(
        *a2,
        vec![(*a1, pi1)],
        *cn,
    ))?;
    Ok(NashSolution {
        strategies: vec![pi1, pi2],
        fixed_point_y: Some(y_star),
        update_factors: vec![f1, f2],
    })
}

fn two_agent_decoupled(
    a1: &AgentSpec,
    a2: &AgentSpec,
    cn: &CommonNoiseParams,
    decoupled_1: bool,
    decoupled_2: bool,
) -> Result<NashSolution> {
    // A decoupled agent's best response does not depend on the opponent's
    // strategy, so evaluating it at 0 already gives the equilibrium value.
    let (pi1, pi2) = if decoupled_1 && decoupled_2 {
        (
            best_response(&BestResponseInputs::new(*a1, vec![(*a2, 0.0)], *cn))?,
            best_response(&BestResponseInputs::new(*a2, vec![(*a1, 0.0)], *cn))?,
        )
    } else if decoupled_1 {
        let pi1 = best_response(&BestResponseInputs::new(*a1, vec![(*a2, 0.0)], *cn))?;
        let pi2 = best_response(&BestResponseInputs::new(*a2, vec![(*a1, pi1)], *cn))?;
        (pi1, pi2)
    } else {
        let pi2 = best_response(&BestResponseInputs::new(*a2, vec![(*a1, 0.0)], *cn))?;
        let pi1 = best_response(&BestResponseInputs::new(*a1, vec![(*a2, pi2)], *cn))?;
        (pi1, pi2)
    };
    let f1 = best_response_value_factor(&BestResponseInputs::new(*a1, vec![(*a2, pi2)], *cn))?;
    let f2 = best_response_value_factor(&BestResponseInputs::new(*a2, vec![(*a1, pi1)], *cn))?;
    let fixed_point_y = if a2.prefs.theta > 0.0 {
        Some((a2.prefs.gamma * a2.prefs.theta * (a1.market.u - a1.market.d) * pi1 / 2.0).exp())
    } else {
        None
    };
    Ok(NashSolution {
        strategies: vec![pi1, pi2],
        fixed_point_y,
        update_factors: vec![f1, f2],
    })
}

/// Result of the experimental heterogeneous best-response iteration.
#[derive(Debug, Clone)]
pub enum IterationOutcome {
    Converged(ConvergedIteration),
    NotConverged(NonConvergenceReport),
}

#[derive(Debug, Clone)]
pub struct ConvergedIteration {
    pub solution: NashSolution,
    pub sweeps: usize,
    /// Always true: no equilibrium theory backs heterogeneous N > 2, so a
    /// converged profile is a numerical candidate, not a guarantee.
    pub experimental: bool,
}

/// Structured non-convergence report: the iteration history instead of an
/// exception.
#[derive(Debug, Clone)]
pub struct NonConvergenceReport {
    pub sweeps: usize,
    pub last_strategies: Vec<f64>,
    /// Max strategy change per sweep.
    pub history: Vec<f64>,
    pub max_change: f64,
    pub experimental: bool,
}

/// Gauss-Seidel best-response sweeps for N heterogeneous agents. Damping 0.5
/// kicks in once any agent's updates alternate in sign twice in a row. The
/// converged profile is re-verified against every agent's best response.
pub fn best_response_iteration(
    agents: &[AgentSpec],
    cn: &CommonNoiseParams,
    tol: f64,
    max_iter: usize,
) -> Result<IterationOutcome> {
    if agents.len() < 2 {
        return Err(Error::Domain("best-response iteration requires N >= 2".into()));
    }
    if tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let n = agents.len();
    let mut strategies = vec![0.0_f64; n];
    let mut last_delta = vec![0.0_f64; n];
    let mut flips = vec![0_u32; n];
    let mut damping = 1.0_f64;
    let mut history = Vec::new();

    let mut sweeps = 0;
    while sweeps < max_iter {
        sweeps += 1;
        let mut max_change = 0.0_f64;
        for i in 0..n {
            let others: Vec<(AgentSpec, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (agents[j], strategies[j]))
                .collect();
            let br = best_response(&BestResponseInputs::new(agents[i], others, *cn))?;
            let delta = damping * (br - strategies[i]);
            if delta * last_delta[i] < 0.0 {
                flips[i] += 1;
                if flips[i] >= 2 {
                    damping = 0.5;
                }
            } else {
                flips[i] = 0;
            }
            last_delta[i] = delta;
            strategies[i] += delta;
            max_change = max_change.max(delta.abs());
        }
        history.push(max_change);
        if max_change < tol {
            // post hoc: each strategy must satisfy its own best-response
            // equation, not merely have stopped moving
            let mut worst = 0.0_f64;
            for i in 0..n {
                let others: Vec<(AgentSpec, f64)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (agents[j], strategies[j]))
                    .collect();
                let br = best_response(&BestResponseInputs::new(agents[i], others, *cn))?;
                worst = worst.max((br - strategies[i]).abs());
            }
            if worst > tol {
                return Ok(IterationOutcome::NotConverged(NonConvergenceReport {
                    sweeps,
                    last_strategies: strategies,
                    history,
                    max_change: worst,
                    experimental: true,
                }));
            }
            let mut factors = Vec::with_capacity(n);
            for i in 0..n {
                let others: Vec<(AgentSpec, f64)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (agents[j], strategies[j]))
                    .collect();
                factors.push(best_response_value_factor(&BestResponseInputs::new(
                    agents[i], others, *cn,
                ))?);
            }
            return Ok(IterationOutcome::Converged(ConvergedIteration {
                solution: NashSolution {
                    strategies,
                    fixed_point_y: None,
                    update_factors: factors,
                },
                sweeps,
                experimental: true,
            }));
        }
    }
    let max_change = history.last().copied().unwrap_or(f64::NAN);
    Ok(IterationOutcome::NotConverged(NonConvergenceReport {
        sweeps,
        last_strategies: strategies,
        history,
        max_change,
        experimental: true,
    }))
}
