//! Closed-form outage probabilities for the five duplex/detector
//! configurations, the system-level worst case, and an independent 2-D
//! quadrature oracle for the SIC closed form.
//!
//! Every closed form is a series in the Rician-power CDF expansion kernel
//! [`alpha_term`]; interference enters through moments of the interfering
//! powers. Per-term factorial/power products are evaluated in log space with
//! explicit sign tracking, then accumulated in linear space under the
//! truncation policy of [`SeriesControl`].
//!
//! A result is `converged` only when three conditions hold: the stopping
//! rule fired, the raw partial sum landed within `rel_tol` of [0, 1], and
//! the cancellation noise floor of the alternating sum (largest term times
//! machine epsilon times term count) stayed below `100 * rel_tol` relative
//! to the sum. The last guard matters for large-K, large-threshold corners
//! where the series is mathematically convergent but f64 cancellation
//! dominates first.

use thiserror::Error;

use crate::quad::{adaptive_simpson, QuadError};
use crate::scenario::ScenarioConfig;
use crate::series::{sum_outer_series, LogSumExp, SeriesOutcome};
use crate::specfun::{bessel_i0_scaled, hyp1f1_neg_int, laguerre0, ln_binomial, ln_factorial, marcum_q1};

/// Truncation and tolerance policy for all infinite series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Hard cap on outer terms.
    pub max_terms: usize,
    /// Relative threshold of the stopping rule.
    pub rel_tol: f64,
    /// Number of consecutive sub-threshold terms required to stop.
    pub consecutive_small: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 200,
            rel_tol: 1e-10,
            consecutive_small: 3,
        }
    }
}

/// Configuration a result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    GsHbd,
    As2Ii,
    As2Sic,
    GsHd,
    As2Hd,
    System,
}

/// Per-node mode selector (everything except the system-level aggregate).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeMode {
    GsHbd,
    As2Ii,
    As2Sic,
    GsHd,
    As2Hd,
}

impl NodeMode {
    pub const ALL: [NodeMode; 5] = [
        NodeMode::GsHbd,
        NodeMode::As2Ii,
        NodeMode::As2Sic,
        NodeMode::GsHd,
        NodeMode::As2Hd,
    ];

    pub fn as_mode(self) -> Mode {
        match self {
            NodeMode::GsHbd => Mode::GsHbd,
            NodeMode::As2Ii => Mode::As2Ii,
            NodeMode::As2Sic => Mode::As2Sic,
            NodeMode::GsHd => Mode::GsHd,
            NodeMode::As2Hd => Mode::As2Hd,
        }
    }
}

/// Receiving node selector for the half-duplex outages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Gs,
    As2,
}

/// Detector at AS-2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Ii,
    Sic,
}

/// An outage probability plus convergence diagnostics.
///
/// `probability` is clamped to [0, 1] only when `converged`; otherwise it is
/// the raw partial sum, kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    pub probability: f64,
    pub terms_used: usize,
    pub converged: bool,
    /// The analytic sufficient convergence bound of the corresponding
    /// closed form held for these parameters.
    pub convergence_bound_satisfied: bool,
    pub mode: Mode,
}

#[derive(Debug, Clone, Error)]
pub enum OutageError {
    /// The stopping rule did not fire within `max_terms`. Carries the raw
    /// partial sum and diagnostics.
    #[error("series did not converge in {} terms (mode {:?}, raw partial sum {:.6e})",
            .0.terms_used, .0.mode, .0.probability)]
    NonConvergent(OutageResult),
    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature tolerance not reached: {0}")]
    ToleranceNotReached(String),
    #[error("invalid parameter {name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

// ---------------------------------------------------------------------------
// Series kernel and moments
// ---------------------------------------------------------------------------

/// Signed log form of [`alpha_term`]: (sign, ln|alpha|). Sign 0 encodes an
/// exactly zero term.
fn alpha_signed_log(q: u32, omega: f64, k: f64, gamma: f64) -> (f64, f64) {
    if gamma == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let lag = laguerre0(q, k);
    if lag == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let sign = if q % 2 == 0 { lag.signum() } else { -lag.signum() };
    let ln = -k + lag.abs().ln() - ln_factorial(q as u64 + 1)
        + (q as f64 + 1.0) * ((1.0 + k) * gamma / omega).ln();
    (sign, ln)
}

/// Rician power CDF expansion kernel
///   alpha(q, Omega, K, gamma) = (-1)^q e^{-K} L_q(K) / (1+q)! ((1+K) gamma / Omega)^{q+1},
/// evaluated in log space with sign tracking.
pub fn alpha_term(q: u32, omega: f64, k: f64, gamma: f64) -> f64 {
    debug_assert!(omega > 0.0 && k >= 0.0 && gamma >= 0.0);
    let (sign, ln) = alpha_signed_log(q, omega, k, gamma);
    sign * ln.exp()
}

/// ln E{Z^l} for a Rician-power RV with the given mean and K factor:
///   E{Z^l} = Gamma(1+l) (mean/(1+K))^l 1F1(-l, 1; -K).
pub(crate) fn ln_moment_rician(l: u32, mean_power: f64, k: f64) -> f64 {
    if l == 0 {
        return 0.0;
    }
    if mean_power == 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_factorial(l as u64) + l as f64 * (mean_power / (1.0 + k)).ln() + hyp1f1_neg_int(l, k).ln()
}

/// ln E{Z^l} for an exponentially distributed power with the given mean:
///   E{Z^l} = Gamma(1+l) mean^l.
pub(crate) fn ln_moment_exponential(l: u32, mean_power: f64) -> f64 {
    if l == 0 {
        return 0.0;
    }
    if mean_power == 0.0 {
        return f64::NEG_INFINITY;
    }
    ln_factorial(l as u64) + l as f64 * mean_power.ln()
}

/// l-th raw moment of a Rician-power RV. The first moment is the mean power
/// exactly; the zeroth is 1.
pub fn moment_rician(l: u32, mean_power: f64, k: f64) -> f64 {
    debug_assert!(mean_power > 0.0 && k >= 0.0);
    ln_moment_rician(l, mean_power, k).exp()
}

/// l-th raw moment of an exponentially distributed power.
pub fn moment_exponential(l: u32, mean_power: f64) -> f64 {
    debug_assert!(mean_power >= 0.0);
    ln_moment_exponential(l, mean_power).exp()
}

fn alpha_table(omega: f64, k: f64, gamma: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n as u32)
        .map(|q| alpha_signed_log(q, omega, k, gamma))
        .collect()
}

fn rician_moment_table(mean: f64, k: f64, n: usize) -> Vec<f64> {
    (0..=n as u32).map(|l| ln_moment_rician(l, mean, k)).collect()
}

fn exponential_moment_table(mean: f64, n: usize) -> Vec<f64> {
    (0..=n as u32)
        .map(|l| ln_moment_exponential(l, mean))
        .collect()
}

// ---------------------------------------------------------------------------
// Raw series evaluators (explicit thresholds; shared with `diversity`)
// ---------------------------------------------------------------------------

/// Plain Rician-power CDF series sum_m alpha(m, omega, k, gamma); the
/// half-duplex outage and every interference-free reduction.
pub(crate) fn rician_cdf_series(omega: f64, k: f64, gamma: f64, ctl: &SeriesControl) -> SeriesOutcome {
    let alphas = alpha_table(omega, k, gamma, ctl.max_terms);
    sum_outer_series(ctl, |q| {
        let (sign, ln) = alphas[q as usize];
        sign * ln.exp()
    })
}

/// CDF series of the SOI at threshold gamma * (1 + Z) for one interferer Z:
///   sum_q alpha(q, omega_soi, k_soi, gamma) sum_{l<=q+1} C(q+1, l) E{Z^l}.
fn cdf_one_interferer_series(
    omega_soi: f64,
    k_soi: f64,
    gamma: f64,
    ln_moments: &[f64],
    ctl: &SeriesControl,
) -> SeriesOutcome {
    let alphas = alpha_table(omega_soi, k_soi, gamma, ctl.max_terms);
    sum_outer_series(ctl, |q| {
        let (sign, ln) = alphas[q as usize];
        if sign == 0.0 {
            return 0.0;
        }
        let qp1 = q as u64 + 1;
        let mut inner = LogSumExp::new();
        for l in 0..=qp1 {
            inner.push(ln_binomial(qp1, l) + ln_moments[l as usize]);
        }
        sign * (ln + inner.ln_total()).exp()
    })
}

/// GS hybrid-duplex series at an explicit threshold: the double sum over q
/// and compositions l1+l2+l3 = q+1 with the two residual-SI moment families.
pub(crate) fn gs_hbd_series(cfg: &ScenarioConfig, gamma: f64, ctl: &SeriesControl) -> SeriesOutcome {
    let alphas = alpha_table(cfg.omega_x, cfg.k_x1, gamma, ctl.max_terms);
    let m_phase = rician_moment_table(cfg.si_phase_mean(), cfg.si.k_si, ctl.max_terms + 1);
    let m_est = exponential_moment_table(cfg.si_estimation_mean(), ctl.max_terms + 1);
    sum_outer_series(ctl, |q| {
        let (sign, ln) = alphas[q as usize];
        if sign == 0.0 {
            return 0.0;
        }
        let qp1 = q as u64 + 1;
        let ln_qp1_fact = ln_factorial(qp1);
        let mut inner = LogSumExp::new();
        for l1 in 0..=qp1 {
            for l2 in 0..=(qp1 - l1) {
                let l3 = qp1 - l1 - l2;
                inner.push(
                    ln_qp1_fact - ln_factorial(l1) - ln_factorial(l2) - ln_factorial(l3)
                        + m_phase[l1 as usize]
                        + m_est[l2 as usize],
                );
            }
        }
        sign * (ln + inner.ln_total()).exp()
    })
}

/// AS-2 interference-ignorant series at an explicit threshold.
pub(crate) fn as2_ii_series(cfg: &ScenarioConfig, gamma_2: f64, ctl: &SeriesControl) -> SeriesOutcome {
    let m_int = rician_moment_table(cfg.interference_as2_mean(), cfg.k_y1, ctl.max_terms + 1);
    cdf_one_interferer_series(cfg.soi_as2_mean(), cfg.k_xgs, gamma_2, &m_int, ctl)
}

pub(crate) struct SicSeries {
    pub p1: SeriesOutcome,
    /// 1 - Q1(...) term: exact scalar, no truncation.
    pub marcum_cdf: f64,
    pub triple: SeriesOutcome,
}

impl SicSeries {
    pub(crate) fn total(&self) -> f64 {
        self.p1.sum + self.marcum_cdf - self.triple.sum
    }
}

/// The three components of the SIC closed form at explicit thresholds.
///
/// The triple Cauchy-product sum carries the factor (n-i+1) restoring the
/// (j+1) coefficient of the Rician-power PDF expansion
/// f(x) = sum_j (j+1) alpha(j, ., ., 1) x^j; without it the closed form
/// disagrees with direct integration of the outage region by ~1e-6.
pub(crate) fn as2_sic_series(
    cfg: &ScenarioConfig,
    gamma_gs: f64,
    gamma_2: f64,
    ctl: &SeriesControl,
) -> SicSeries {
    let omega_int = cfg.interference_as2_mean();
    let omega_soi = cfg.soi_as2_mean();

    // Stage 1: interference-detection outage, CDF of Y1 at gamma_gs (1 + X_gs).
    let m_soi = rician_moment_table(omega_soi, cfg.k_xgs, ctl.max_terms + 1);
    let p1 = cdf_one_interferer_series(omega_int, cfg.k_y1, gamma_gs, &m_soi, ctl);

    // Stage 2 principal term: CDF of X_gs at gamma_2.
    let marcum_cdf = 1.0
        - marcum_q1(
            (2.0 * cfg.k_xgs).sqrt(),
            (2.0 * (1.0 + cfg.k_xgs) * gamma_2 / omega_soi).sqrt(),
        );

    // Stage 2 correction: triple Cauchy-product series.
    let triple = if gamma_2 == 0.0 || gamma_gs == 0.0 {
        SeriesOutcome {
            sum: 0.0,
            terms_used: 0,
            stopped: true,
            max_abs_term: 0.0,
        }
    } else {
        let a_int = alpha_table(omega_int, cfg.k_y1, gamma_gs, ctl.max_terms);
        let a_soi = alpha_table(omega_soi, cfg.k_xgs, 1.0, ctl.max_terms);
        let ln_g2 = gamma_2.ln();
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
                let sign = s_int * s_soi;
                for j in 0..=(i as u64 + 1) {
                    let p = (j + (n - i) as u64 + 1) as f64;
                    let ln = ln_int
                        + ln_soi
                        + pdf_coeff
                        + ln_binomial(i as u64 + 1, j)
                        + p * ln_g2
                        - p.ln();
                    total += sign * ln.exp();
                }
            }
            total
        })
    };

    SicSeries {
        p1,
        marcum_cdf,
        triple,
    }
}

// ---------------------------------------------------------------------------
// Result assembly
// ---------------------------------------------------------------------------

/// Noise-floor acceptance: the cancellation residue must sit two orders of
/// magnitude under the stopping tolerance relative to the finished sum, with
/// an absolute floor of 1e-14 (representation-level noise in a probability,
/// far below every tolerance used downstream).
pub(crate) fn precision_ok(noise: f64, sum: f64, ctl: &SeriesControl) -> bool {
    noise <= (100.0 * ctl.rel_tol * sum.abs()).max(1e-14)
}

fn assemble(
    mode: Mode,
    raw_sum: f64,
    terms_used: usize,
    stopped: bool,
    noise: f64,
    bound_ok: bool,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    let in_range = raw_sum >= -ctl.rel_tol && raw_sum <= 1.0 + ctl.rel_tol;
    let converged = stopped && in_range && precision_ok(noise, raw_sum, ctl);
    let probability = if converged {
        raw_sum.clamp(0.0, 1.0)
    } else {
        raw_sum
    };
    let result = OutageResult {
        probability,
        terms_used,
        converged,
        convergence_bound_satisfied: bound_ok,
        mode,
    };
    if stopped {
        Ok(result)
    } else {
        Err(OutageError::NonConvergent(result))
    }
}

fn assemble_single(
    mode: Mode,
    out: SeriesOutcome,
    bound_ok: bool,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    assemble(
        mode,
        out.sum,
        out.terms_used,
        out.stopped,
        out.noise_floor(),
        bound_ok,
        ctl,
    )
}

// ---------------------------------------------------------------------------
// Analytic convergence bounds (sufficient conditions of the closed forms)
// ---------------------------------------------------------------------------

fn gs_hbd_bound_ok(cfg: &ScenarioConfig, gamma: f64) -> bool {
    let scale = cfg.si.alpha_gg * cfg.si.epsilon;
    if scale == 0.0 {
        return true;
    }
    gamma <= 1.0 / (3.0 * (1.0 + cfg.k_x1) * scale)
}

fn as2_ii_bound_ok(cfg: &ScenarioConfig, gamma_2: f64) -> bool {
    if cfg.alpha_12 == 0.0 {
        return true;
    }
    gamma_2 <= cfg.alpha_g2 * (1.0 + cfg.k_y1) / (2.0 * (1.0 + cfg.k_xgs) * cfg.alpha_12)
}

fn as2_sic_bound_ok(cfg: &ScenarioConfig, gamma_gs: f64) -> bool {
    gamma_gs <= (cfg.alpha_12 / (1.0 + cfg.k_y1)) / (2.0 * cfg.alpha_g2 / (1.0 + cfg.k_xgs))
}

// ---------------------------------------------------------------------------
// Public outage operations
// ---------------------------------------------------------------------------

/// Outage probability at the FD-enabled GS in hybrid-duplex operation,
/// against the combined Rician + exponential residual self-interference.
pub fn outage_gs_hbd(cfg: &ScenarioConfig, ctl: &SeriesControl) -> Result<OutageResult, OutageError> {
    let gamma = cfg.thresholds().gamma_gs_hbd;
    outage_gs_hbd_at(cfg, gamma, ctl)
}

pub(crate) fn outage_gs_hbd_at(
    cfg: &ScenarioConfig,
    gamma: f64,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    let out = gs_hbd_series(cfg, gamma, ctl);
    assemble_single(Mode::GsHbd, out, gs_hbd_bound_ok(cfg, gamma), ctl)
}

/// Outage probability at AS-2 with the interference-ignorant detector.
pub fn outage_as2_ii(cfg: &ScenarioConfig, ctl: &SeriesControl) -> Result<OutageResult, OutageError> {
    let gamma_2 = cfg.thresholds().gamma_2_hbd;
    outage_as2_ii_at(cfg, gamma_2, ctl)
}

pub(crate) fn outage_as2_ii_at(
    cfg: &ScenarioConfig,
    gamma_2: f64,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    let out = as2_ii_series(cfg, gamma_2, ctl);
    assemble_single(Mode::As2Ii, out, as2_ii_bound_ok(cfg, gamma_2), ctl)
}

/// Outage probability at AS-2 with the two-stage SIC detector.
///
/// When the sufficient convergence bound fails, the result is still
/// evaluated and returned with `convergence_bound_satisfied = false`; the
/// caller decides whether to trust the flagged value.
pub fn outage_as2_sic(cfg: &ScenarioConfig, ctl: &SeriesControl) -> Result<OutageResult, OutageError> {
    let t = cfg.thresholds();
    outage_as2_sic_at(cfg, t.gamma_gs_hbd, t.gamma_2_hbd, ctl)
}

pub(crate) fn outage_as2_sic_at(
    cfg: &ScenarioConfig,
    gamma_gs: f64,
    gamma_2: f64,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    if !(cfg.alpha_12 > 0.0) {
        return Err(OutageError::Domain {
            name: "alpha_12",
            value: cfg.alpha_12,
            reason: "the SIC closed form requires a nonzero interferer",
        });
    }
    let s = as2_sic_series(cfg, gamma_gs, gamma_2, ctl);
    let noise = s.p1.noise_floor() + s.triple.noise_floor() + 4.0 * f64::EPSILON;
    assemble(
        Mode::As2Sic,
        s.total(),
        s.p1.terms_used.max(s.triple.terms_used),
        s.p1.stopped && s.triple.stopped,
        noise,
        as2_sic_bound_ok(cfg, gamma_gs),
        ctl,
    )
}

/// Half-duplex outage probability at either node (no interference, doubled
/// rate exponent in the threshold).
pub fn outage_hd(
    node: Node,
    cfg: &ScenarioConfig,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    let t = cfg.thresholds();
    match node {
        Node::Gs => outage_hd_at(node, cfg, t.gamma_gs_hd, ctl),
        Node::As2 => outage_hd_at(node, cfg, t.gamma_2_hd, ctl),
    }
}

pub(crate) fn outage_hd_at(
    node: Node,
    cfg: &ScenarioConfig,
    gamma: f64,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    let (mode, omega, k) = match node {
        Node::Gs => (Mode::GsHd, cfg.omega_x, cfg.k_x1),
        Node::As2 => (Mode::As2Hd, cfg.soi_as2_mean(), cfg.k_xgs),
    };
    let out = rician_cdf_series(omega, k, gamma, ctl);
    assemble_single(mode, out, true, ctl)
}

/// Outage for one per-node mode at the scenario's configured thresholds.
pub fn outage(
    mode: NodeMode,
    cfg: &ScenarioConfig,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    match mode {
        NodeMode::GsHbd => outage_gs_hbd(cfg, ctl),
        NodeMode::As2Ii => outage_as2_ii(cfg, ctl),
        NodeMode::As2Sic => outage_as2_sic(cfg, ctl),
        NodeMode::GsHd => outage_hd(Node::Gs, cfg, ctl),
        NodeMode::As2Hd => outage_hd(Node::As2, cfg, ctl),
    }
}

fn combine_max(a: OutageResult, b: OutageResult) -> OutageResult {
    OutageResult {
        probability: a.probability.max(b.probability),
        terms_used: a.terms_used.max(b.terms_used),
        converged: a.converged && b.converged,
        convergence_bound_satisfied: a.convergence_bound_satisfied && b.convergence_bound_satisfied,
        mode: Mode::System,
    }
}

/// Worst-case system outage in hybrid-duplex operation,
/// max(Pr outage at GS, Pr outage at AS-2 with the chosen detector).
pub fn outage_system(
    detector: Detector,
    cfg: &ScenarioConfig,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    let gs = outage_gs_hbd(cfg, ctl)?;
    let as2 = match detector {
        Detector::Ii => outage_as2_ii(cfg, ctl)?,
        Detector::Sic => outage_as2_sic(cfg, ctl)?,
    };
    Ok(combine_max(gs, as2))
}

/// Worst-case system outage in half-duplex operation.
pub fn outage_system_hd(
    cfg: &ScenarioConfig,
    ctl: &SeriesControl,
) -> Result<OutageResult, OutageError> {
    let gs = outage_hd(Node::Gs, cfg, ctl)?;
    let as2 = outage_hd(Node::As2, cfg, ctl)?;
    Ok(combine_max(gs, as2))
}

// ---------------------------------------------------------------------------
// Quadrature oracle for the SIC closed form
// ---------------------------------------------------------------------------

/// Rician-power density with mean `m` and factor `k`, written through the
/// scaled Bessel form so the exponentials never overflow.
fn rician_power_pdf(z: f64, m: f64, k: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    let c = (1.0 + k) / m;
    let arg = 2.0 * (k * (1.0 + k) * z / m).sqrt();
    c * (-k - c * z + arg).exp() * bessel_i0_scaled(arg)
}

/// Upper truncation point covering at least the 1 - 1e-12 quantile of a
/// Rician-power RV: from Q1(a, b) <= exp(-(b-a)^2/2) with b = a + 7.5.
fn rician_power_upper(m: f64, k: f64) -> f64 {
    let b = (2.0 * k).sqrt() + 7.5;
    m * b * b / (2.0 * (1.0 + k))
}

/// Direct 2-D integration of the SIC outage region, the independent oracle
/// for the SIC closed form. The outage event splits into
///   P1 = Pr{Y1 < g_gs (1 + X_gs)}   (interferer not decodable)
///   P2 = Pr{Y1 >= g_gs (1 + X_gs), X_gs < g_2}   (SOI fails after SIC)
/// and both are integrated with nested adaptive Simpson rules over the two
/// Rician-power densities, domains truncated at the 1 - 1e-12 quantiles.
pub fn sic_quadrature(cfg: &ScenarioConfig, abs_tol: f64) -> Result<f64, OutageError> {
    if !(abs_tol > 0.0) {
        return Err(OutageError::Domain {
            name: "abs_tol",
            value: abs_tol,
            reason: "must be > 0",
        });
    }
    let t = cfg.thresholds();
    sic_quadrature_at(cfg, t.gamma_gs_hbd, t.gamma_2_hbd, abs_tol)
}

pub(crate) fn sic_quadrature_at(
    cfg: &ScenarioConfig,
    gamma_gs: f64,
    gamma_2: f64,
    abs_tol: f64,
) -> Result<f64, OutageError> {
    if !(cfg.alpha_12 > 0.0) {
        return Err(OutageError::Domain {
            name: "alpha_12",
            value: cfg.alpha_12,
            reason: "SIC requires a nonzero interferer",
        });
    }
    let (m_soi, k_soi) = (cfg.soi_as2_mean(), cfg.k_xgs);
    let (m_int, k_int) = (cfg.interference_as2_mean(), cfg.k_y1);
    let x_max = rician_power_upper(m_soi, k_soi);
    let y_max = rician_power_upper(m_int, k_int);
    let inner_tol = abs_tol / 8.0;
    let outer_tol = abs_tol / 8.0;

    let wrap = |e: QuadError| OutageError::ToleranceNotReached(e.to_string());

    // Pr{Y1 < y_hi} for the interferer, by quadrature of its own density.
    let cdf_int = |y_hi: f64| -> Result<f64, QuadError> {
        if y_hi <= 0.0 {
            return Ok(0.0);
        }
        adaptive_simpson(
            |y| rician_power_pdf(y, m_int, k_int),
            0.0,
            y_hi.min(y_max),
            inner_tol,
        )
    };

    let p1 = adaptive_simpson(
        |x| {
            let f = rician_power_pdf(x, m_soi, k_soi);
            if f == 0.0 {
                0.0
            } else {
                f * cdf_int(gamma_gs * (1.0 + x)).unwrap_or(f64::NAN)
            }
        },
        0.0,
        x_max,
        outer_tol,
    )
    .map_err(wrap)?;

    let p2_hi = gamma_2.min(x_max);
    let p2 = if p2_hi <= 0.0 {
        0.0
    } else {
        adaptive_simpson(
            |x| {
                let f = rician_power_pdf(x, m_soi, k_soi);
                if f == 0.0 {
                    return 0.0;
                }
                let lo = gamma_gs * (1.0 + x);
                if lo >= y_max {
                    return 0.0;
                }
                let tail = adaptive_simpson(
                    |y| rician_power_pdf(y, m_int, k_int),
                    lo,
                    y_max,
                    inner_tol,
                )
                .unwrap_or(f64::NAN);
                f * tail
            },
            0.0,
            p2_hi,
            outer_tol,
        )
        .map_err(wrap)?
    };

    if !(p1 + p2).is_finite() {
        return Err(OutageError::ToleranceNotReached(
            "inner integral did not converge".into(),
        ));
    }
    Ok(p1 + p2)
}
