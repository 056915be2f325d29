//! Cross-stock return covariance induced by the common regime variable:
//! closed form against a Monte Carlo estimate, plus the uncorrelated and
//! perfectly-correlated limits.

use prfpp::market::{pairwise_return_covariance, CommonNoiseParams, MarketPeriodParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn mc_covariance(
    cn: &CommonNoiseParams,
    m1: &MarketPeriodParams,
    m2: &MarketPeriodParams,
    n: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut r1 = Vec::with_capacity(n);
    let mut r2 = Vec::with_capacity(n);
    for _ in 0..n {
        let bull = rng.random::<f64>() < cn.p_cn;
        let p1 = if bull { m1.p_bull } else { m1.p_bear };
        let p2 = if bull { m2.p_bull } else { m2.p_bear };
        r1.push(if rng.random::<f64>() < p1 { m1.u } else { m1.d });
        r2.push(if rng.random::<f64>() < p2 { m2.u } else { m2.d });
    }
    let mean1 = r1.iter().sum::<f64>() / n as f64;
    let mean2 = r2.iter().sum::<f64>() / n as f64;
    let products: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| (a - mean1) * (b - mean2)).collect();
    let cov = products.iter().sum::<f64>() / (n - 1) as f64;
    let var = products.iter().map(|p| (p - cov) * (p - cov)).sum::<f64>() / (n - 1) as f64;
    (cov, (var / n as f64).sqrt())
}

fn main() -> prfpp::Result<()> {
    let cn = CommonNoiseParams::new(0.6)?;
    let m = MarketPeriodParams::new(1.2, 0.9, 0.6, 0.4, &cn)?;
    let formula = pairwise_return_covariance(&cn, &m, &m)?;
    let (mc, se) = mc_covariance(&cn, &m, &m, 1_000_000, 9);
    println!("benchmark pair: formula {formula:.6e}, MC {mc:.6e} ({:+.2} SE)", (mc - formula) / se);

    let independent = MarketPeriodParams::without_common_noise(1.2, 0.9, 0.52)?;
    println!(
        "no common-noise exposure: formula {:.1e} (exactly zero)",
        pairwise_return_covariance(&cn, &independent, &independent)?
    );

    let tight = MarketPeriodParams::new(1.2, 0.9, 1.0 - 1e-9, 1e-9, &cn)?;
    let limit = (tight.u - tight.d).powi(2) * cn.p_cn * (1.0 - cn.p_cn);
    println!(
        "perfectly correlated limit: formula {:.6e} vs (u-d)^2 p_cn (1-p_cn) = {limit:.6e}",
        pairwise_return_covariance(&cn, &tight, &tight)?
    );
    Ok(())
}
