//! Cross-validation of the closed forms against the Monte-Carlo channel
//! oracle, and of the sampler against analytic distributions. The full
//! reference-grid comparison lives in the CLI crate's acceptance suite;
//! these are the standalone checks for this crate.

use hbd_core::mc::{mc_outage, sample_rician_power};
use hbd_core::outage::{self, moment_exponential, moment_rician, NodeMode, SeriesControl};
use hbd_core::scenario::{db_to_linear, RatePlan, ScenarioConfig, SiProfile};
use hbd_core::specfun::marcum_q1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg_v(omega_db: f64, alpha_12: f64, epsilon: f64) -> ScenarioConfig {
    ScenarioConfig {
        omega_x: db_to_linear(omega_db),
        alpha_g2: 1.0,
        alpha_12,
        si: SiProfile {
            alpha_gg: 1.0,
            epsilon,
            phase_noise_power: db_to_linear(-15.0),
            k_si: 15.0,
        },
        rates: RatePlan {
            r1_hbd: 0.5,
            rgs_hbd: 0.5,
        },
        k_x1: 15.0,
        k_xgs: 15.0,
        k_y1: 15.0,
    }
}

#[test]
fn closed_forms_within_monte_carlo_error_bars() {
    let ctl = SeriesControl::default();
    let n = 2_000_000u64;
    let cells = [
        (NodeMode::GsHbd, 0.0, 0.5, 0.01),
        (NodeMode::GsHbd, 10.0, 0.5, 0.001),
        (NodeMode::As2Ii, 0.0, 0.5, 0.01),
        (NodeMode::As2Ii, 10.0, 0.1, 0.01),
        (NodeMode::As2Sic, 5.0, 5.0, 0.01),
        (NodeMode::As2Sic, 0.0, 10.0, 0.01),
        (NodeMode::GsHd, 0.0, 0.5, 0.01),
        (NodeMode::As2Hd, 6.0, 0.5, 0.01),
    ];
    for (mode, odb, a12, eps) in cells {
        let cfg = cfg_v(odb, a12, eps);
        let analytic = outage::outage(mode, &cfg, &ctl).unwrap();
        assert!(analytic.converged && analytic.convergence_bound_satisfied);
        let mc = mc_outage(mode, &cfg, n, 42);
        let diff = (analytic.probability - mc.probability).abs();
        assert!(
            diff <= 3.0 * mc.std_error.max(1e-9),
            "{mode:?} O={odb} a12={a12} eps={eps}: analytic {} vs mc {} (3se {})",
            analytic.probability,
            mc.probability,
            3.0 * mc.std_error
        );
    }
}

#[test]
fn rician_sampler_cdf_matches_marcum_survival() {
    // Empirical CDF of K = 15 power draws against 1 - Q1, sup-distance
    // below 1e-3 at 1e7 samples.
    let n = 10_000_000usize;
    let k = 15.0;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut draws: Vec<f64> = (0..n).map(|_| sample_rician_power(k, 1.0, &mut rng)).collect();
    draws.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sup = 0.0f64;
    for (i, &z) in draws.iter().enumerate().step_by(997) {
        let emp = (i + 1) as f64 / n as f64;
        let cdf = 1.0 - marcum_q1((2.0 * k).sqrt(), (2.0 * (1.0 + k) * z).sqrt());
        sup = sup.max((emp - cdf).abs());
    }
    assert!(sup < 1e-3, "sup-distance {sup}");
}

#[test]
fn rayleigh_degeneration_passes_ks_test() {
    // K = 0 draws against the exponential CDF; Kolmogorov-Smirnov statistic
    // below the p = 0.01 critical value 1.628/sqrt(n).
    let n = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let mut draws: Vec<f64> = (0..n).map(|_| sample_rician_power(0.0, 1.0, &mut rng)).collect();
    draws.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d = 0.0f64;
    for (i, &z) in draws.iter().enumerate() {
        let cdf = 1.0 - (-z).exp();
        let hi = (i + 1) as f64 / n as f64 - cdf;
        let lo = cdf - i as f64 / n as f64;
        d = d.max(hi.max(lo));
    }
    assert!(
        d * (n as f64).sqrt() < 1.628,
        "KS statistic {d} rejects at p = 0.01"
    );
}

#[test]
fn rician_moments_match_sample_moments() {
    // E{Z^3} for mean 2, K 15 over 1e8 draws, within 3 standard errors of
    // the sample mean.
    let n = 100_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(8_128);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let z = sample_rician_power(15.0, 2.0, &mut rng);
        let z3 = z * z * z;
        sum += z3;
        sum_sq += z3 * z3;
    }
    let mean = sum / n as f64;
    let var = sum_sq / n as f64 - mean * mean;
    let se = (var / n as f64).sqrt();
    let analytic = moment_rician(3, 2.0, 15.0);
    assert!(
        (analytic - mean).abs() <= 3.0 * se,
        "E(Z^3) = {analytic} vs sample {mean} +- {se}"
    );
}

#[test]
fn exponential_moments_match_sample_moments() {
    // Fourth moment of the SI estimation-error power at mean 0.01 * Omega.
    let mean_power = 0.01 * 10.0;
    let n = 10_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(65_537);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..n {
        let z: f64 = mean_power * rng.sample::<f64, _>(rand_distr::Exp1);
        let z4 = z * z * z * z;
        sum += z4;
        sum_sq += z4 * z4;
    }
    let mean = sum / n as f64;
    let var = sum_sq / n as f64 - mean * mean;
    let se = (var / n as f64).sqrt();
    let analytic = moment_exponential(4, mean_power);
    assert!(
        (analytic - mean).abs() <= 3.0 * se,
        "E(Z^4) = {analytic} vs sample {mean} +- {se}"
    );
}
