//! Monte-Carlo outage estimation by direct simulation of the received-power
//! model: the independent cross-check for every closed form.
//!
//! Sampling is split into fixed-size chunks, each driven by its own ChaCha
//! substream derived from (master seed, mode, chunk index). Chunk counts add
//! associatively, so estimates are bit-identical regardless of how the
//! chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::outage::NodeMode;
use crate::scenario::{ScenarioConfig, Thresholds};

/// An empirical outage frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub probability: f64,
    /// sqrt(p (1 - p) / samples) for the empirical p.
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// One draw of a Rician-power RV: mean_power * |h|^2 with
/// h = sqrt(K/(K+1)) + CN(0, 1/(K+1)). K = 0 degenerates to an
/// exponentially distributed power. A nonpositive mean yields 0.
pub fn sample_rician_power<R: Rng + ?Sized>(k: f64, mean_power: f64, rng: &mut R) -> f64 {
    if mean_power <= 0.0 {
        return 0.0;
    }
    let los = (k / (k + 1.0)).sqrt();
    let sigma = (0.5 / (k + 1.0)).sqrt();
    let re: f64 = los + sigma * rng.sample::<f64, _>(StandardNormal);
    let im: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
    mean_power * (re * re + im * im)
}

fn mode_index(mode: NodeMode) -> u64 {
    match mode {
        NodeMode::GsHbd => 0,
        NodeMode::As2Ii => 1,
        NodeMode::As2Sic => 2,
        NodeMode::GsHd => 3,
        NodeMode::As2Hd => 4,
    }
}

/// Exact outage event logic for one channel realization.
fn outage_event<R: Rng + ?Sized>(
    mode: NodeMode,
    cfg: &ScenarioConfig,
    t: &Thresholds,
    rng: &mut R,
) -> bool {
    match mode {
        NodeMode::GsHbd => {
            let x1 = sample_rician_power(cfg.k_x1, cfg.omega_x, rng);
            let y_phase = sample_rician_power(cfg.si.k_si, cfg.si_phase_mean(), rng);
            let est_mean = cfg.si_estimation_mean();
            let y_est = if est_mean > 0.0 {
                est_mean * rng.sample::<f64, _>(Exp1)
            } else {
                0.0
            };
            x1 <= t.gamma_gs_hbd * (1.0 + y_phase + y_est)
        }
        NodeMode::As2Ii => {
            let x_gs = sample_rician_power(cfg.k_xgs, cfg.soi_as2_mean(), rng);
            let y1 = sample_rician_power(cfg.k_y1, cfg.interference_as2_mean(), rng);
            x_gs <= t.gamma_2_hbd * (1.0 + y1)
        }
        NodeMode::As2Sic => {
            let x_gs = sample_rician_power(cfg.k_xgs, cfg.soi_as2_mean(), rng);
            let y1 = sample_rician_power(cfg.k_y1, cfg.interference_as2_mean(), rng);
            // Stage 1 decodes and cancels the interferer against the SOI
            // acting as noise; stage 2 decodes the SOI interference-free.
            let stage1_cancels = y1 >= t.gamma_gs_hbd * (1.0 + x_gs);
            let stage2_decodes = x_gs >= t.gamma_2_hbd;
            !(stage1_cancels && stage2_decodes)
        }
        NodeMode::GsHd => sample_rician_power(cfg.k_x1, cfg.omega_x, rng) <= t.gamma_gs_hd,
        NodeMode::As2Hd => {
            sample_rician_power(cfg.k_xgs, cfg.soi_as2_mean(), rng) <= t.gamma_2_hd
        }
    }
}

const CHUNK: u64 = 1 << 18;

/// Empirical outage frequency over `samples` channel realizations.
///
/// Reproducible: the estimate is a pure function of (mode, cfg, samples,
/// seed), independent of thread count and scheduling.
pub fn mc_outage(mode: NodeMode, cfg: &ScenarioConfig, samples: u64, seed: u64) -> McEstimate {
    assert!(samples >= 1);
    let t = cfg.thresholds();
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((mode_index(mode) << 32) | chunk);
            let n = CHUNK.min(samples - chunk * CHUNK);
            let mut hits = 0u64;
            for _ in 0..n {
                if outage_event(mode, cfg, &t, &mut rng) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = hits as f64 / samples as f64;
    McEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{db_to_linear, RatePlan, SiProfile};

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
    fn rician_sample_mean_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        for &(k, mean) in &[(0.0, 1.0), (15.0, 2.5)] {
            let sum: f64 = (0..n).map(|_| sample_rician_power(k, mean, &mut rng)).sum();
            let avg = sum / n as f64;
            // var of the power is (2K+1)/(K+1)^2 * mean^2; 3 SE window
            let var = (2.0 * k + 1.0) / ((k + 1.0) * (k + 1.0)) * mean * mean;
            let se = (var / n as f64).sqrt();
            assert!(
                (avg - mean).abs() < 3.0 * se,
                "k={k}: avg {avg} vs mean {mean}"
            );
        }
    }

    #[test]
    fn rayleigh_degeneration_matches_exponential_cdf() {
        // K = 0: power is exponential. Check a few CDF points at 3 SE.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000usize;
        let draws: Vec<f64> = (0..n).map(|_| sample_rician_power(0.0, 1.0, &mut rng)).collect();
        for &x in &[0.1, 0.5, 1.0, 2.0] {
            let emp = draws.iter().filter(|&&v| v <= x).count() as f64 / n as f64;
            let exact = 1.0 - (-x).exp();
            let se = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!((emp - exact).abs() < 3.5 * se, "x={x}: {emp} vs {exact}");
        }
    }

    #[test]
    fn determinism_bit_for_bit() {
        let cfg = cfg_v(10.0, 0.5, 0.01);
        let a = mc_outage(NodeMode::As2Ii, &cfg, 500_000, 42);
        let b = mc_outage(NodeMode::As2Ii, &cfg, 500_000, 42);
        assert_eq!(a, b);
        let c = mc_outage(NodeMode::As2Ii, &cfg, 500_000, 43);
        assert_ne!(a.probability, c.probability);
    }

    #[test]
    fn zero_thresholds_zero_outage() {
        let mut cfg = cfg_v(10.0, 5.0, 0.01);
        cfg.rates = RatePlan {
            r1_hbd: 0.0,
            rgs_hbd: 0.0,
        };
        for mode in NodeMode::ALL {
            let e = mc_outage(mode, &cfg, 100_000, 1);
            assert_eq!(e.probability, 0.0, "{mode:?}");
        }
    }

    #[test]
    fn hd_rayleigh_closed_form() {
        let mut cfg = cfg_v(0.0, 0.5, 0.01);
        cfg.k_x1 = 0.0;
        let e = mc_outage(NodeMode::GsHd, &cfg, 10_000_000, 5);
        let exact = 1.0 - (-1.0f64).exp();
        assert!((e.probability - exact).abs() < 3.0 * e.std_error);
    }

    #[test]
    fn se_halves_when_samples_quadruple() {
        let cfg = cfg_v(5.0, 0.5, 0.01);
        let mut ratios = Vec::new();
        for seed in 0..10 {
            let small = mc_outage(NodeMode::As2Ii, &cfg, 100_000, seed);
            let large = mc_outage(NodeMode::As2Ii, &cfg, 400_000, seed);
            ratios.push(large.std_error / small.std_error);
        }
        let avg: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((avg - 0.5).abs() < 0.1, "avg ratio {avg}");
    }

    #[test]
    fn sic_union_bound() {
        let cfg = cfg_v(5.0, 5.0, 0.01);
        let t = cfg.thresholds();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let (mut outage, mut s1_fail, mut s2_fail) = (0u64, 0u64, 0u64);
        for _ in 0..n {
            let x = sample_rician_power(cfg.k_xgs, cfg.soi_as2_mean(), &mut rng);
            let y = sample_rician_power(cfg.k_y1, cfg.interference_as2_mean(), &mut rng);
            let f1 = y < t.gamma_gs_hbd * (1.0 + x);
            let f2 = x < t.gamma_2_hbd;
            if f1 {
                s1_fail += 1;
            }
            if f2 {
                s2_fail += 1;
            }
            if f1 || f2 {
                outage += 1;
            }
        }
        assert!(outage <= s1_fail + s2_fail);
        assert!(outage >= s1_fail.max(s2_fail));
    }

    #[test]
    fn ii_outage_monotone_in_interference() {
        let mut prev = 0.0;
        for &a12 in &[0.1, 0.5, 1.0, 5.0, 10.0] {
            let cfg = cfg_v(10.0, a12, 0.01);
            let e = mc_outage(NodeMode::As2Ii, &cfg, 1_000_000, 9);
            assert!(
                e.probability >= prev - 3.0 * e.std_error,
                "a12={a12}: {} after {prev}",
                e.probability
            );
            prev = e.probability;
        }
    }
}
