//! Finite-SNR diversity gains.
//!
//! Fixed-rate: d_f = -(Omega / P) dP/dOmega, assembled from the per-term
//! power-of-Omega derivatives of each outage series. Variable-rate (finite
//! SNR DMT): the transmission rate tracks rf log2(1 + Omega) (HD: 2 rf), so
//! the threshold moves with Omega and the per-term rate-variation factor is
//! [`g_func`]. System level aggregates by min.
//!
//! Every numerator series reuses the outage kernels with the scale factored
//! out of Omega (alpha evaluated at the per-link scaling, unit threshold for
//! the variable forms) and normalized interference moments, so the terms
//! are explicit in powers of Omega.

use thiserror::Error;

use crate::outage::{
    self, ln_moment_exponential, ln_moment_rician, outage_as2_ii_at, outage_as2_sic_at,
    outage_gs_hbd_at, outage_hd_at, Detector, Mode, Node, NodeMode, OutageError, OutageResult,
    SeriesControl,
};
use crate::scenario::{variable_rate_threshold, Duplex, ScenarioConfig};
use crate::series::{sum_outer_series, SeriesOutcome};
use crate::specfun::{ln_binomial, ln_factorial};

/// Rate regime a diversity gain refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    Fixed,
    Variable,
}

/// Outage below this is treated as numerically degenerate: the logarithmic
/// derivative would divide by (near) zero.
pub const DEGENERATE_OUTAGE: f64 = 1e-300;

/// A finite-SNR diversity gain with evaluation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityResult {
    pub gain: f64,
    pub mode: Mode,
    pub rate_mode: RateMode,
    /// Finite-SNR multiplexing gain; only present for [`RateMode::Variable`].
    pub rf: Option<f64>,
    /// Outer terms consumed per component series (outage first, then the
    /// derivative series in closed-form order).
    pub component_terms: Vec<usize>,
}

#[derive(Debug, Clone, Error)]
pub enum DiversityError {
    #[error(transparent)]
    Outage(#[from] OutageError),
    #[error("outage series converged-flag is false (mode {:?}); gain undefined", .0.mode)]
    OutageNotConverged(OutageResult),
    #[error("outage {0:.3e} is below {DEGENERATE_OUTAGE:.0e}; log-derivative undefined")]
    DegenerateOutage(f64),
    #[error("multiplexing gain {0} outside [0, 1]")]
    MultiplexingGainOutOfRange(f64),
    #[error("derivative series did not settle within the term budget")]
    DerivativeNotConverged,
    #[error("rf must be supplied exactly when rate_mode is Variable")]
    RfArgumentMismatch,
}

/// Rate-variation decay factor of the variable-rate scheme,
///   g(i, j, Omega, rf) = ((1+Omega)^rf - 1)^i Omega^j
///     [ ((1+Omega)^rf - 1) j / Omega + (i+1) rf (1+Omega)^(rf-1) ].
pub fn g_func(i: i64, j: i64, omega: f64, rf: f64) -> f64 {
    let (sign, ln) = ln_g(i, j, omega, rf);
    sign * ln.exp()
}

/// Signed log form of [`g_func`]; sign 0 encodes an exact zero.
fn ln_g(i: i64, j: i64, omega: f64, rf: f64) -> (f64, f64) {
    let gamma = (rf * (1.0 + omega).ln()).exp_m1();
    if gamma == 0.0 && i != 0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let bracket = gamma * j as f64 / omega + (i + 1) as f64 * rf * (1.0 + omega).powf(rf - 1.0);
    if bracket == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let ln = i as f64 * if i == 0 { 0.0 } else { gamma.ln() } + j as f64 * omega.ln()
        + bracket.abs().ln();
    (bracket.signum(), ln)
}

/// Normalized moment argument: which interfering-power family and its
/// Omega-free scale (mean power divided by the reference SNR).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerDist {
    Rician { k: f64, scale: f64 },
    Exponential { scale: f64 },
}

/// Normalized l-th moment M{Z^l} = E{Z^l} / Omega^l; Omega-free by
/// construction.
pub fn normalized_moment(l: u32, dist: PowerDist) -> f64 {
    ln_normalized_moment(l, dist).exp()
}

fn ln_normalized_moment(l: u32, dist: PowerDist) -> f64 {
    match dist {
        PowerDist::Rician { k, scale } => ln_moment_rician(l, scale, k),
        PowerDist::Exponential { scale } => ln_moment_exponential(l, scale),
    }
}

// ---------------------------------------------------------------------------
// Numerator assembly
// ---------------------------------------------------------------------------

// Per-term derivative factor: for a P-term proportional to gamma^{ge+1}
// Omega^{pe}, the fixed-rate derivative contributes pe * Omega^{pe-1} and the
// variable-rate one contributes g(ge, pe, Omega, rf).
#[derive(Clone, Copy)]
enum DerivFactor {
    Fixed { omega: f64 },
    Variable { omega: f64, rf: f64 },
}

impl DerivFactor {
    fn eval(&self, gamma_exp: i64, power_exp: i64) -> (f64, f64) {
        match *self {
            DerivFactor::Fixed { omega } => {
                if power_exp == 0 {
                    (0.0, f64::NEG_INFINITY)
                } else {
                    (
                        (power_exp as f64).signum(),
                        (power_exp.unsigned_abs() as f64).ln()
                            + (power_exp - 1) as f64 * omega.ln(),
                    )
                }
            }
            DerivFactor::Variable { omega, rf } => ln_g(gamma_exp, power_exp, omega, rf),
        }
    }

    // Threshold inside the alpha kernel: the configured one for fixed rate,
    // unit for variable rate (the threshold powers live in g).
    fn alpha_gamma(&self, fixed_gamma: f64) -> f64 {
        match self {
            DerivFactor::Fixed { .. } => fixed_gamma,
            DerivFactor::Variable { .. } => 1.0,
        }
    }
}

fn alpha_logs(scale: f64, k: f64, gamma: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n as u32)
        .map(|q| {
            let v = outage::alpha_term(q, scale, k, gamma);
            // recover signed-log form
            if v == 0.0 {
                (0.0, f64::NEG_INFINITY)
            } else {
                (v.signum(), v.abs().ln())
            }
        })
        .collect()
}

/// GS derivative series: compositions l1+l2+l3 = q+1 against the two
/// normalized residual-SI moment families; Omega exponent l1+l2-q-1.
fn gs_numerator(
    cfg: &ScenarioConfig,
    gamma: f64,
    factor: DerivFactor,
    ctl: &SeriesControl,
) -> SeriesOutcome {
    let alphas = alpha_logs(1.0, cfg.k_x1, factor.alpha_gamma(gamma), ctl.max_terms);
    let m_phase: Vec<f64> = (0..=ctl.max_terms as u32)
        .map(|l| {
            ln_normalized_moment(
                l,
                PowerDist::Rician {
                    k: cfg.si.k_si,
                    scale: cfg.si.alpha_gg * cfg.si.phase_noise_power,
                },
            )
        })
        .collect();
    let m_est: Vec<f64> = (0..=ctl.max_terms as u32)
        .map(|l| {
            ln_normalized_moment(
                l,
                PowerDist::Exponential {
                    scale: cfg.si.alpha_gg * cfg.si.epsilon,
                },
            )
        })
        .collect();
    sum_outer_series(ctl, |q| {
        let (sa, la) = alphas[q as usize];
        if sa == 0.0 {
            return 0.0;
        }
        let qp1 = q as u64 + 1;
        let ln_qp1_fact = ln_factorial(qp1);
        let mut total = 0.0;
        for l1 in 0..=qp1 {
            for l2 in 0..=(qp1 - l1) {
                let l3 = qp1 - l1 - l2;
                let power_exp = (l1 + l2) as i64 - qp1 as i64;
                let (sf, lf) = factor.eval(q as i64, power_exp);
                if sf == 0.0 {
                    continue;
                }
                let ln = la + ln_qp1_fact
                    - ln_factorial(l1)
                    - ln_factorial(l2)
                    - ln_factorial(l3)
                    + m_phase[l1 as usize]
                    + m_est[l2 as usize]
                    + lf;
                total += sa * sf * ln.exp();
            }
        }
        total
    })
}

/// Single-interferer derivative series (AS-2 II, and the SIC stage-1 term):
/// binomial moments, Omega exponent l-q-1.
fn binom_numerator(
    alpha_scale: f64,
    alpha_k: f64,
    gamma: f64,
    moments: &[f64],
    factor: DerivFactor,
    ctl: &SeriesControl,
) -> SeriesOutcome {
    let alphas = alpha_logs(alpha_scale, alpha_k, factor.alpha_gamma(gamma), ctl.max_terms);
    sum_outer_series(ctl, |q| {
        let (sa, la) = alphas[q as usize];
        if sa == 0.0 {
            return 0.0;
        }
        let qp1 = q as u64 + 1;
        let mut total = 0.0;
        for l in 0..=qp1 {
            let power_exp = l as i64 - qp1 as i64;
            let (sf, lf) = factor.eval(q as i64, power_exp);
            if sf == 0.0 {
                continue;
            }
            let ln = la + ln_binomial(qp1, l) + moments[l as usize] + lf;
            total += sa * sf * ln.exp();
        }
        total
    })
}

/// Interference-free derivative series (HD pair, and the SIC stage-2
/// principal term): Omega exponent -m-1.
fn single_numerator(
    alpha_scale: f64,
    alpha_k: f64,
    gamma: f64,
    factor: DerivFactor,
    ctl: &SeriesControl,
) -> SeriesOutcome {
    let alphas = alpha_logs(alpha_scale, alpha_k, factor.alpha_gamma(gamma), ctl.max_terms);
    sum_outer_series(ctl, |m| {
        let (sa, la) = alphas[m as usize];
        if sa == 0.0 {
            return 0.0;
        }
        let (sf, lf) = factor.eval(m as i64, -(m as i64) - 1);
        if sf == 0.0 {
            return 0.0;
        }
        sa * sf * (la + lf).exp()
    })
}

/// SIC triple-product derivative series; Omega exponent -n-2, threshold
/// exponent j+n+2. Carries the same (n-i+1) PDF coefficient as the outage
/// form. For the fixed-rate factor the gamma_2 powers appear explicitly;
/// for the variable-rate factor they live inside g.
fn sic_triple_numerator(
    cfg: &ScenarioConfig,
    gamma_gs: f64,
    gamma_2: f64,
    factor: DerivFactor,
    ctl: &SeriesControl,
) -> SeriesOutcome {
    let fixed_rate = matches!(factor, DerivFactor::Fixed { .. });
    if fixed_rate && (gamma_2 == 0.0 || gamma_gs == 0.0) {
        return SeriesOutcome {
            sum: 0.0,
            terms_used: 0,
            stopped: true,
            max_abs_term: 0.0,
        };
    }
    let a_int = alpha_logs(
        cfg.alpha_12,
        cfg.k_y1,
        factor.alpha_gamma(gamma_gs),
        ctl.max_terms,
    );
    let a_soi = alpha_logs(cfg.alpha_g2, cfg.k_xgs, 1.0, ctl.max_terms);
    let ln_g2 = if fixed_rate { gamma_2.ln() } else { 0.0 };
    sum_outer_series(ctl, |n| {
        let n = n as usize;
        let mut total = 0.0;
        for i in 0..=n {
            let (s_int, ln_int) = a_int[i];
            let (s_soi, ln_soi) = a_soi[n - i];
            if s_int == 0.0 || s_soi == 0.0 {
                continue;
            }
            let pdf_coeff = ((n - i) as f64 + 1.0).ln();
            for j in 0..=(i as u64 + 1) {
                let p = (j + (n - i) as u64 + 1) as f64;
                let gamma_exp = j as i64 + n as i64 + 1;
                let (sf, lf) = factor.eval(gamma_exp, -(n as i64) - 2);
                if sf == 0.0 {
                    continue;
                }
                let mut ln = ln_int + ln_soi + pdf_coeff + ln_binomial(i as u64 + 1, j)
                    - p.ln()
                    + lf;
                if fixed_rate {
                    ln += p * ln_g2;
                }
                total += s_int * s_soi * sf * ln.exp();
            }
        }
        total
    })
}

// ---------------------------------------------------------------------------
// Gain assembly
// ---------------------------------------------------------------------------

fn check_outage(r: Result<OutageResult, OutageError>) -> Result<OutageResult, DiversityError> {
    let r = r?;
    if !r.converged {
        return Err(DiversityError::OutageNotConverged(r));
    }
    if r.probability < DEGENERATE_OUTAGE {
        return Err(DiversityError::DegenerateOutage(r.probability));
    }
    Ok(r)
}

fn numerator_ok(out: &SeriesOutcome, ctl: &SeriesControl) -> Result<(), DiversityError> {
    if out.stopped && outage::precision_ok(out.noise_floor(), out.sum, ctl) {
        Ok(())
    } else {
        Err(DiversityError::DerivativeNotConverged)
    }
}

// Derivative series get twice the term budget the outage actually consumed,
// so truncation-order interactions with the FD cross-check stay below
// tolerance.
fn numerator_ctl(ctl: &SeriesControl, outage_terms: usize) -> SeriesControl {
    SeriesControl {
        max_terms: ctl.max_terms.max(2 * outage_terms),
        ..*ctl
    }
}

struct Pieces {
    outage: OutageResult,
    numerators: Vec<SeriesOutcome>,
    // signs with which the numerator sums combine (the SIC triple term
    // enters negatively)
    signs: Vec<f64>,
}

fn pieces(
    mode: NodeMode,
    cfg: &ScenarioConfig,
    factor: DerivFactor,
    thresholds: (f64, f64),
    ctl: &SeriesControl,
) -> Result<Pieces, DiversityError> {
    let (gamma_node, gamma_other) = thresholds;
    match mode {
        NodeMode::GsHbd => {
            let outage = check_outage(outage_gs_hbd_at(cfg, gamma_node, ctl))?;
            let nctl = numerator_ctl(ctl, outage.terms_used);
            let num = gs_numerator(cfg, gamma_node, factor, &nctl);
            numerator_ok(&num, &nctl)?;
            Ok(Pieces {
                outage,
                numerators: vec![num],
                signs: vec![1.0],
            })
        }
        NodeMode::As2Ii => {
            let outage = check_outage(outage_as2_ii_at(cfg, gamma_node, ctl))?;
            let nctl = numerator_ctl(ctl, outage.terms_used);
            let moments: Vec<f64> = (0..=nctl.max_terms as u32)
                .map(|l| {
                    ln_normalized_moment(
                        l,
                        PowerDist::Rician {
                            k: cfg.k_y1,
                            scale: cfg.alpha_12,
                        },
                    )
                })
                .collect();
            let num = binom_numerator(cfg.alpha_g2, cfg.k_xgs, gamma_node, &moments, factor, &nctl);
            numerator_ok(&num, &nctl)?;
            Ok(Pieces {
                outage,
                numerators: vec![num],
                signs: vec![1.0],
            })
        }
        NodeMode::As2Sic => {
            // gamma_node applies to the interferer-detection stage (rate of
            // AS-1), gamma_other to the SOI stage.
            let outage = check_outage(outage_as2_sic_at(cfg, gamma_node, gamma_other, ctl))?;
            let nctl = numerator_ctl(ctl, outage.terms_used);
            let moments: Vec<f64> = (0..=nctl.max_terms as u32)
                .map(|l| {
                    ln_normalized_moment(
                        l,
                        PowerDist::Rician {
                            k: cfg.k_xgs,
                            scale: cfg.alpha_g2,
                        },
                    )
                })
                .collect();
            let n1 = binom_numerator(cfg.alpha_12, cfg.k_y1, gamma_node, &moments, factor, &nctl);
            let n2 = single_numerator(cfg.alpha_g2, cfg.k_xgs, gamma_other, factor, &nctl);
            let n3 = sic_triple_numerator(cfg, gamma_node, gamma_other, factor, &nctl);
            for n in [&n1, &n2, &n3] {
                numerator_ok(n, &nctl)?;
            }
            Ok(Pieces {
                outage,
                numerators: vec![n1, n2, n3],
                signs: vec![1.0, 1.0, -1.0],
            })
        }
        NodeMode::GsHd => {
            let outage = check_outage(outage_hd_at(Node::Gs, cfg, gamma_node, ctl))?;
            let nctl = numerator_ctl(ctl, outage.terms_used);
            let num = single_numerator(1.0, cfg.k_x1, gamma_node, factor, &nctl);
            numerator_ok(&num, &nctl)?;
            Ok(Pieces {
                outage,
                numerators: vec![num],
                signs: vec![1.0],
            })
        }
        NodeMode::As2Hd => {
            let outage = check_outage(outage_hd_at(Node::As2, cfg, gamma_node, ctl))?;
            let nctl = numerator_ctl(ctl, outage.terms_used);
            let num = single_numerator(cfg.alpha_g2, cfg.k_xgs, gamma_node, factor, &nctl);
            numerator_ok(&num, &nctl)?;
            Ok(Pieces {
                outage,
                numerators: vec![num],
                signs: vec![1.0],
            })
        }
    }
}

fn gain_from(cfg: &ScenarioConfig, p: &Pieces) -> f64 {
    let num: f64 = p
        .numerators
        .iter()
        .zip(&p.signs)
        .map(|(n, s)| s * n.sum)
        .sum();
    -cfg.omega_x / p.outage.probability * num
}

fn result_from(
    mode: NodeMode,
    rate_mode: RateMode,
    rf: Option<f64>,
    cfg: &ScenarioConfig,
    p: Pieces,
) -> DiversityResult {
    let mut component_terms = vec![p.outage.terms_used];
    component_terms.extend(p.numerators.iter().map(|n| n.terms_used));
    DiversityResult {
        gain: gain_from(cfg, &p),
        mode: mode.as_mode(),
        rate_mode,
        rf,
        component_terms,
    }
}

/// Fixed-rate finite-SNR diversity gain at the scenario's configured
/// thresholds.
pub fn df_fixed(
    mode: NodeMode,
    cfg: &ScenarioConfig,
    ctl: &SeriesControl,
) -> Result<DiversityResult, DiversityError> {
    let t = cfg.thresholds();
    let thresholds = match mode {
        NodeMode::GsHbd => (t.gamma_gs_hbd, 0.0),
        NodeMode::As2Ii => (t.gamma_2_hbd, 0.0),
        NodeMode::As2Sic => (t.gamma_gs_hbd, t.gamma_2_hbd),
        NodeMode::GsHd => (t.gamma_gs_hd, 0.0),
        NodeMode::As2Hd => (t.gamma_2_hd, 0.0),
    };
    let factor = DerivFactor::Fixed { omega: cfg.omega_x };
    let p = pieces(mode, cfg, factor, thresholds, ctl)?;
    Ok(result_from(mode, RateMode::Fixed, None, cfg, p))
}

/// Variable-rate finite-SNR diversity gain (finite-SNR DMT point) at
/// multiplexing gain `rf`: the rate is rf log2(1+Omega) per node (HD modes
/// run twice that), so thresholds follow (1+Omega)^rf - 1.
pub fn df_variable(
    mode: NodeMode,
    cfg: &ScenarioConfig,
    rf: f64,
    ctl: &SeriesControl,
) -> Result<DiversityResult, DiversityError> {
    if !(0.0..=1.0).contains(&rf) {
        return Err(DiversityError::MultiplexingGainOutOfRange(rf));
    }
    let omega = cfg.omega_x;
    let (gamma, rf_eff) = match mode {
        NodeMode::GsHd | NodeMode::As2Hd => {
            (variable_rate_threshold(omega, rf, Duplex::Hd), 2.0 * rf)
        }
        _ => (variable_rate_threshold(omega, rf, Duplex::Hbd), rf),
    };
    let factor = DerivFactor::Variable { omega, rf: rf_eff };
    let p = pieces(mode, cfg, factor, (gamma, gamma), ctl)?;
    Ok(result_from(mode, RateMode::Variable, Some(rf), cfg, p))
}

fn combine_min(a: DiversityResult, b: DiversityResult) -> DiversityResult {
    let mut component_terms = a.component_terms.clone();
    component_terms.extend_from_slice(&b.component_terms);
    DiversityResult {
        gain: a.gain.min(b.gain),
        mode: Mode::System,
        rate_mode: a.rate_mode,
        rf: a.rf,
        component_terms,
    }
}

fn rf_for(rate_mode: RateMode, rf: Option<f64>) -> Result<Option<f64>, DiversityError> {
    match (rate_mode, rf) {
        (RateMode::Fixed, None) => Ok(None),
        (RateMode::Variable, Some(v)) => Ok(Some(v)),
        _ => Err(DiversityError::RfArgumentMismatch),
    }
}

fn df_node(
    mode: NodeMode,
    rate_mode: RateMode,
    cfg: &ScenarioConfig,
    rf: Option<f64>,
    ctl: &SeriesControl,
) -> Result<DiversityResult, DiversityError> {
    match rate_mode {
        RateMode::Fixed => df_fixed(mode, cfg, ctl),
        RateMode::Variable => df_variable(mode, cfg, rf.expect("checked by rf_for"), ctl),
    }
}

/// System-level hybrid-duplex diversity gain: min over the GS and the AS-2
/// detector in use.
pub fn df_system(
    detector: Detector,
    rate_mode: RateMode,
    cfg: &ScenarioConfig,
    rf: Option<f64>,
    ctl: &SeriesControl,
) -> Result<DiversityResult, DiversityError> {
    let rf = rf_for(rate_mode, rf)?;
    let gs = df_node(NodeMode::GsHbd, rate_mode, cfg, rf, ctl)?;
    let as2_mode = match detector {
        Detector::Ii => NodeMode::As2Ii,
        Detector::Sic => NodeMode::As2Sic,
    };
    let as2 = df_node(as2_mode, rate_mode, cfg, rf, ctl)?;
    Ok(combine_min(gs, as2))
}

/// System-level half-duplex diversity gain: min over the two HD nodes.
pub fn df_system_hd(
    rate_mode: RateMode,
    cfg: &ScenarioConfig,
    rf: Option<f64>,
    ctl: &SeriesControl,
) -> Result<DiversityResult, DiversityError> {
    let rf = rf_for(rate_mode, rf)?;
    let gs = df_node(NodeMode::GsHd, rate_mode, cfg, rf, ctl)?;
    let as2 = df_node(NodeMode::As2Hd, rate_mode, cfg, rf, ctl)?;
    Ok(combine_min(gs, as2))
}

/// Fixed-rate gain evaluated far above the operating range, for checking
/// the asymptotic limits (HD modes approach 1, interference-limited HBD
/// modes approach 0).
pub fn asymptotic_check(
    mode: NodeMode,
    cfg: &ScenarioConfig,
    omega_high: f64,
) -> Result<f64, DiversityError> {
    let high = cfg.with_omega_x(omega_high);
    Ok(df_fixed(mode, &high, &SeriesControl::default())?.gain)
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
    fn g_func_reference_points() {
        // rf = 0 kills the factor for every index pair.
        for i in 0..4 {
            for j in -3..3 {
                assert_eq!(g_func(i, j, 10.0, 0.0), 0.0, "i={i} j={j}");
            }
        }
        // i = j = 0, rf = 1: bracket collapses to (1+Omega)^0 = 1.
        assert!((g_func(0, 0, 10.0, 1.0) - 1.0).abs() < 1e-14);
        // frozen high-precision reference
        assert!(
            (g_func(2, -3, 10.0, 0.5) - (-1.302_619_917_092_934_2e-3)).abs() < 1e-17,
            "got {}",
            g_func(2, -3, 10.0, 0.5)
        );
    }

    #[test]
    fn normalized_moment_reference_points() {
        assert_eq!(
            normalized_moment(0, PowerDist::Rician { k: 15.0, scale: 0.3 }),
            1.0
        );
        assert!(
            (normalized_moment(1, PowerDist::Rician { k: 0.0, scale: 1.0 }) - 1.0).abs() < 1e-14
        );
        assert!(
            (normalized_moment(2, PowerDist::Exponential { scale: 0.01 }) - 2e-4).abs() < 1e-18
        );
    }

    // Central log-log finite difference of the closed-form outage, the
    // independent oracle for every fixed-rate gain.
    fn df_fd(mode: NodeMode, cfg: &ScenarioConfig, step_db: f64) -> f64 {
        let ctl = SeriesControl::default();
        let up = cfg.with_omega_x(cfg.omega_x * db_to_linear(step_db / 2.0));
        let dn = cfg.with_omega_x(cfg.omega_x * db_to_linear(-step_db / 2.0));
        let pu = outage::outage(mode, &up, &ctl).unwrap().probability;
        let pd = outage::outage(mode, &dn, &ctl).unwrap().probability;
        -(pu.ln() - pd.ln()) / (up.omega_x.ln() - dn.omega_x.ln())
    }

    #[test]
    fn fixed_gain_matches_finite_difference() {
        let ctl = SeriesControl::default();
        for &odb in &[0.0, 5.0, 10.0, 20.0, 30.0] {
            for (mode, a12, eps) in [
                (NodeMode::GsHbd, 0.5, 0.01),
                (NodeMode::As2Ii, 0.5, 0.01),
                (NodeMode::As2Sic, 5.0, 0.01),
                (NodeMode::GsHd, 0.5, 0.01),
                (NodeMode::As2Hd, 0.5, 0.01),
            ] {
                let cfg = cfg_v(odb, a12, eps);
                let d = df_fixed(mode, &cfg, &ctl).unwrap().gain;
                let fd = df_fd(mode, &cfg, 0.01);
                assert!(
                    (d - fd).abs() <= 1e-3 * fd.abs().max(1e-6),
                    "{mode:?} O={odb}: closed {d} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn variable_gain_matches_definition_derivative() {
        // d_f* against the numerical derivative of P(omega + d, gamma(omega + d)).
        let ctl = SeriesControl::default();
        let omega = 10.0;
        for &(mode, a12) in &[
            (NodeMode::GsHbd, 0.5),
            (NodeMode::As2Ii, 0.1),
            (NodeMode::As2Sic, 10.0),
            (NodeMode::GsHd, 0.5),
        ] {
            for &rf in &[0.1, 0.3, 0.5] {
                let cfg = cfg_v(10.0, a12, 0.001);
                let d = match df_variable(mode, &cfg, rf, &ctl) {
                    Ok(r) => r.gain,
                    Err(DiversityError::DerivativeNotConverged) if mode == NodeMode::GsHd => {
                        continue; // HD threshold outruns f64 at high rf
                    }
                    Err(e) => panic!("{mode:?} rf={rf}: {e}"),
                };
                let hd = matches!(mode, NodeMode::GsHd | NodeMode::As2Hd);
                let e = if hd { 2.0 * rf } else { rf };
                let h = 1e-4 * omega;
                let p_at = |om: f64| {
                    let gamma = (e * (1.0 + om).ln()).exp_m1();
                    // rates chosen so the configured threshold equals gamma
                    let mut c = cfg.with_omega_x(om);
                    let r = (1.0 + gamma).log2() / if hd { 2.0 } else { 1.0 };
                    c.rates = RatePlan {
                        r1_hbd: r,
                        rgs_hbd: r,
                    };
                    outage::outage(mode, &c, &ctl).unwrap().probability
                };
                let p0 = p_at(omega);
                let fd = -omega / p0 * (p_at(omega + h) - p_at(omega - h)) / (2.0 * h);
                let tol = 1e-3 * fd.abs().max(1e-6);
                assert!(
                    (d - fd).abs() <= tol.max(2e-4 * d.abs()),
                    "{mode:?} rf={rf}: closed {d} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn hd_variable_gain_zero_at_half_multiplexing() {
        // rf = 0.5 makes the HD threshold track Omega exactly: the outage is
        // scale-invariant and the DMT point is 0.
        let cfg = cfg_v(10.0, 0.5, 0.01);
        let d = df_variable(NodeMode::GsHd, &cfg, 0.5, &SeriesControl::default()).unwrap();
        assert!(d.gain.abs() < 1e-9, "got {}", d.gain);
    }

    #[test]
    fn system_gain_is_min() {
        let ctl = SeriesControl::default();
        let cfg = cfg_v(10.0, 0.5, 0.001);
        let gs = df_fixed(NodeMode::GsHbd, &cfg, &ctl).unwrap().gain;
        let ii = df_fixed(NodeMode::As2Ii, &cfg, &ctl).unwrap().gain;
        let sys = df_system(Detector::Ii, RateMode::Fixed, &cfg, None, &ctl).unwrap();
        assert_eq!(sys.gain, gs.min(ii));
        assert!(sys.gain <= gs && sys.gain <= ii);
        assert_eq!(sys.mode, Mode::System);

        let hd = df_system_hd(RateMode::Fixed, &cfg, None, &ctl).unwrap();
        let g = df_fixed(NodeMode::GsHd, &cfg, &ctl).unwrap().gain;
        let a = df_fixed(NodeMode::As2Hd, &cfg, &ctl).unwrap().gain;
        assert_eq!(hd.gain, g.min(a));
    }

    #[test]
    fn rf_argument_consistency() {
        let ctl = SeriesControl::default();
        let cfg = cfg_v(10.0, 0.5, 0.01);
        assert!(matches!(
            df_system(Detector::Ii, RateMode::Fixed, &cfg, Some(0.5), &ctl),
            Err(DiversityError::RfArgumentMismatch)
        ));
        assert!(matches!(
            df_system(Detector::Ii, RateMode::Variable, &cfg, None, &ctl),
            Err(DiversityError::RfArgumentMismatch)
        ));
        assert!(matches!(
            df_variable(NodeMode::GsHbd, &cfg, 1.2, &ctl),
            Err(DiversityError::MultiplexingGainOutOfRange(_))
        ));
    }

    #[test]
    fn hd_fixed_gain_positive_and_decays_toward_one() {
        let ctl = SeriesControl::default();
        for odb in (0..=30).step_by(2) {
            let cfg = cfg_v(odb as f64, 0.5, 0.01);
            let d = df_fixed(NodeMode::GsHd, &cfg, &ctl).unwrap().gain;
            assert!(d > 0.0, "O={odb}: {d}");
        }
        let far = asymptotic_check(NodeMode::GsHd, &cfg_v(10.0, 0.5, 0.01), 1e6).unwrap();
        assert!((far - 1.0).abs() < 0.02, "limit {far}");
    }

    #[test]
    fn interference_limited_gains_vanish_asymptotically() {
        let base = cfg_v(10.0, 0.5, 0.01);
        let g = asymptotic_check(NodeMode::GsHbd, &base, 1e6).unwrap();
        assert!(g.abs() < 0.05, "GS HBD limit {g}");
        let g = asymptotic_check(NodeMode::As2Ii, &base, 1e6).unwrap();
        assert!(g.abs() < 0.05, "AS2 II limit {g}");
        let strong = cfg_v(10.0, 10.0, 0.01);
        let g = asymptotic_check(NodeMode::As2Sic, &strong, 1e6).unwrap();
        assert!(g.abs() < 0.05, "AS2 SIC limit {g}");
    }

    #[test]
    fn degenerate_outage_is_reported() {
        // Absurdly high SNR with a tiny threshold drives the HD outage
        // under the degenerate floor.
        let mut cfg = cfg_v(10.0, 0.5, 0.01);
        cfg.omega_x = 1e297;
        cfg.rates = RatePlan {
            r1_hbd: 1e-3,
            rgs_hbd: 1e-3,
        };
        match df_fixed(NodeMode::GsHd, &cfg, &SeriesControl::default()) {
            Err(DiversityError::DegenerateOutage(_)) => {}
            other => panic!("expected DegenerateOutage, got {other:?}"),
        }
    }
}
