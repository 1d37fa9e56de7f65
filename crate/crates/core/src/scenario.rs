//! System parameterization for the three-node topology: link-budget
//! arithmetic, rate/threshold derivation, and self-interference accounting.
//!
//! Power conventions: every stored power or power ratio is linear and
//! noise-normalized. Scenario files may carry any such field in dB through
//! the `_db` key suffix (converted once on load). The two link-budget
//! helpers ([`omega_from_budget`], [`si_suppression_db`]) take transmit
//! power and noise variance in watts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// 10^(db/10).
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// 10 log10(linear).
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid {name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("scenario file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Distribution descriptor for a received-power random variable: Rician
/// K factor plus mean power (linear, noise-normalized). K = 0 degenerates
/// to an exponentially distributed power (Rayleigh fading).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianPower {
    pub k_factor: f64,
    pub mean_power: f64,
}

impl RicianPower {
    pub fn new(k_factor: f64, mean_power: f64) -> Result<Self, ScenarioError> {
        if !(k_factor >= 0.0) {
            return Err(ScenarioError::Domain {
                name: "k_factor",
                value: k_factor,
                reason: "must be >= 0",
            });
        }
        if !(mean_power > 0.0) {
            return Err(ScenarioError::Domain {
                name: "mean_power",
                value: mean_power,
                reason: "must be > 0",
            });
        }
        Ok(Self {
            k_factor,
            mean_power,
        })
    }
}

/// Geometry of one link relative to the reference link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Reference distance (km).
    pub d_ref_km: f64,
    /// Distance of this link (km).
    pub d_link_km: f64,
    /// Path-loss exponent n.
    pub path_loss_exponent: f64,
}

/// Residual self-interference profile at the full-duplex ground station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiProfile {
    /// Residual-SI power scaling. Zero means an interference-free GS.
    pub alpha_gg: f64,
    /// SI channel-estimation error variance.
    pub epsilon: f64,
    /// Oscillator phase-noise power, linear, already normalized by the
    /// receiver noise variance.
    pub phase_noise_power: f64,
    /// Rician K factor of the phase-noise SI power component.
    pub k_si: f64,
}

/// Per-node hybrid-duplex rates (bits/s/Hz). The half-duplex rates are
/// derived, never stored: R_hd = 2 * R_hbd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePlan {
    pub r1_hbd: f64,
    pub rgs_hbd: f64,
}

impl RatePlan {
    pub fn r1_hd(&self) -> f64 {
        2.0 * self.r1_hbd
    }

    pub fn rgs_hd(&self) -> f64 {
        2.0 * self.rgs_hbd
    }
}

/// SINR thresholds for both duplex modes, derived from a [`RatePlan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub gamma_gs_hbd: f64,
    pub gamma_2_hbd: f64,
    pub gamma_gs_hd: f64,
    pub gamma_2_hd: f64,
}

/// Duplex mode selector for variable-rate thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Duplex {
    Hbd,
    Hd,
}

/// Full parameterization of the three-node system.
///
/// `omega_x` is the average received SNR of the reference (AS-1 to GS) link;
/// every other link mean power is `omega_x` scaled by the corresponding
/// `alpha`. All values linear.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub omega_x: f64,
    /// GS -> AS-2 mean-power scaling.
    pub alpha_g2: f64,
    /// AS-1 -> AS-2 interference mean-power scaling.
    pub alpha_12: f64,
    pub si: SiProfile,
    pub rates: RatePlan,
    pub k_x1: f64,
    pub k_xgs: f64,
    pub k_y1: f64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        fn nonneg(name: &'static str, v: f64) -> Result<(), ScenarioError> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ScenarioError::Domain {
                    name,
                    value: v,
                    reason: "must be finite and >= 0",
                })
            }
        }
        fn positive(name: &'static str, v: f64) -> Result<(), ScenarioError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ScenarioError::Domain {
                    name,
                    value: v,
                    reason: "must be finite and > 0",
                })
            }
        }
        positive("omega_x", self.omega_x)?;
        positive("alpha_g2", self.alpha_g2)?;
        nonneg("alpha_12", self.alpha_12)?;
        nonneg("alpha_gg", self.si.alpha_gg)?;
        nonneg("epsilon", self.si.epsilon)?;
        nonneg("phase_noise_power", self.si.phase_noise_power)?;
        nonneg("k_si", self.si.k_si)?;
        nonneg("k_x1", self.k_x1)?;
        nonneg("k_xgs", self.k_xgs)?;
        nonneg("k_y1", self.k_y1)?;
        nonneg("r1_hbd", self.rates.r1_hbd)?;
        nonneg("rgs_hbd", self.rates.rgs_hbd)?;
        Ok(())
    }

    /// Same scenario at a different reference SNR (sweep/asymptotics helper).
    pub fn with_omega_x(&self, omega_x: f64) -> Self {
        Self {
            omega_x,
            ..self.clone()
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        thresholds(&self.rates)
    }

    /// Mean power of the Rician (phase-noise) residual-SI component at GS.
    pub fn si_phase_mean(&self) -> f64 {
        self.omega_x * self.si.alpha_gg * self.si.phase_noise_power
    }

    /// Mean power of the exponentially distributed (channel-estimation
    /// error) residual-SI component at GS.
    pub fn si_estimation_mean(&self) -> f64 {
        self.omega_x * self.si.alpha_gg * self.si.epsilon
    }

    /// Mean power of the signal of interest at AS-2.
    pub fn soi_as2_mean(&self) -> f64 {
        self.omega_x * self.alpha_g2
    }

    /// Mean power of the AS-1 interference at AS-2.
    pub fn interference_as2_mean(&self) -> f64 {
        self.omega_x * self.alpha_12
    }

    // -- scenario file I/O ---------------------------------------------------

    /// Parse from the flat key-value scenario format (TOML syntax). Any
    /// field may instead be given with a `_db` suffix and is converted as
    /// 10^(v/10) on load. Unknown, duplicate, or missing keys are errors.
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| ScenarioError::Parse(format!("{e}")))?;
        let mut values: BTreeMap<&'static str, f64> = BTreeMap::new();
        for (key, value) in &table {
            let (base, db) = match key.strip_suffix("_db") {
                Some(b) => (b, true),
                None => (key.as_str(), false),
            };
            let canonical = FIELDS
                .iter()
                .copied()
                .find(|f| *f == base)
                .ok_or_else(|| ScenarioError::Parse(format!("unknown key `{key}`")))?;
            let raw = match value {
                toml::Value::Float(f) => *f,
                toml::Value::Integer(i) => *i as f64,
                other => {
                    return Err(ScenarioError::Parse(format!(
                        "key `{key}` must be numeric, got {other}"
                    )))
                }
            };
            let linear = if db { db_to_linear(raw) } else { raw };
            if values.insert(canonical, linear).is_some() {
                return Err(ScenarioError::Parse(format!(
                    "key `{canonical}` given more than once (linear and _db forms conflict)"
                )));
            }
        }
        let get = |name: &'static str| -> Result<f64, ScenarioError> {
            values
                .get(name)
                .copied()
                .ok_or_else(|| ScenarioError::Parse(format!("missing key `{name}`")))
        };
        let cfg = Self {
            omega_x: get("omega_x")?,
            alpha_g2: get("alpha_g2")?,
            alpha_12: get("alpha_12")?,
            si: SiProfile {
                alpha_gg: get("alpha_gg")?,
                epsilon: get("epsilon")?,
                phase_noise_power: get("phase_noise_power")?,
                k_si: get("k_si")?,
            },
            rates: RatePlan {
                r1_hbd: get("r1_hbd")?,
                rgs_hbd: get("rgs_hbd")?,
            },
            k_x1: get("k_x1")?,
            k_xgs: get("k_xgs")?,
            k_y1: get("k_y1")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serialize to the flat key-value format, all values linear.
    pub fn to_toml_string(&self) -> String {
        let pairs: [(&str, f64); 12] = [
            ("omega_x", self.omega_x),
            ("alpha_g2", self.alpha_g2),
            ("alpha_12", self.alpha_12),
            ("alpha_gg", self.si.alpha_gg),
            ("epsilon", self.si.epsilon),
            ("phase_noise_power", self.si.phase_noise_power),
            ("k_si", self.si.k_si),
            ("k_x1", self.k_x1),
            ("k_xgs", self.k_xgs),
            ("k_y1", self.k_y1),
            ("r1_hbd", self.rates.r1_hbd),
            ("rgs_hbd", self.rates.rgs_hbd),
        ];
        let mut out = String::new();
        for (key, value) in pairs {
            let v = toml::Value::Float(value);
            let _ = writeln!(out, "{key} = {v}");
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        Ok(std::fs::write(path, self.to_toml_string())?)
    }
}

const FIELDS: [&str; 12] = [
    "omega_x",
    "alpha_g2",
    "alpha_12",
    "alpha_gg",
    "epsilon",
    "phase_noise_power",
    "k_si",
    "k_x1",
    "k_xgs",
    "k_y1",
    "r1_hbd",
    "rgs_hbd",
];

/// Average received SNR from the free-space link budget
///   Omega = P_t / ((4 pi 10^9 / 3 10^8)^2 f_c^2 d^2 sigma^2)
/// with transmit power and noise variance in watts, carrier frequency in
/// MHz, distance in km, and the proportionality constant fixed to 1.
pub fn omega_from_budget(
    pt_watts: f64,
    fc_mhz: f64,
    d_km: f64,
    noise_var: f64,
) -> Result<f64, ScenarioError> {
    for (name, v) in [
        ("pt_watts", pt_watts),
        ("fc_mhz", fc_mhz),
        ("d_km", d_km),
        ("noise_var", noise_var),
    ] {
        if !(v > 0.0) {
            return Err(ScenarioError::Domain {
                name,
                value: v,
                reason: "must be > 0",
            });
        }
    }
    let c = 4.0 * std::f64::consts::PI * 1e9 / 3e8;
    Ok(pt_watts / (c * c * fc_mhz * fc_mhz * d_km * d_km * noise_var))
}

/// Mean-power scaling of a link relative to the reference link,
/// (d_ref / d_link)^n.
pub fn alpha_scale(geom: &LinkGeometry) -> f64 {
    (geom.d_ref_km / geom.d_link_km).powf(geom.path_loss_exponent)
}

/// SINR thresholds for both duplex modes: gamma_hbd = 2^R - 1 and
/// gamma_hd = 2^(2R) - 1 per node.
pub fn thresholds(rates: &RatePlan) -> Thresholds {
    Thresholds {
        gamma_gs_hbd: 2f64.powf(rates.r1_hbd) - 1.0,
        gamma_2_hbd: 2f64.powf(rates.rgs_hbd) - 1.0,
        gamma_gs_hd: 2f64.powf(2.0 * rates.r1_hbd) - 1.0,
        gamma_2_hd: 2f64.powf(2.0 * rates.rgs_hbd) - 1.0,
    }
}

/// Overall SI suppression 10 log10(1 / (alpha_gg * epsilon * sigma_g^2)) in
/// dB, with the noise variance in watts (the normalization that reproduces
/// the 163-175 dB suppression window for sigma^2 = -115 dBm).
pub fn si_suppression_db(si: &SiProfile, noise_var: f64) -> Result<f64, ScenarioError> {
    for (name, v) in [
        ("alpha_gg", si.alpha_gg),
        ("epsilon", si.epsilon),
        ("noise_var", noise_var),
    ] {
        if !(v > 0.0) {
            return Err(ScenarioError::Domain {
                name,
                value: v,
                reason: "must be > 0",
            });
        }
    }
    Ok(linear_to_db(1.0 / (si.alpha_gg * si.epsilon * noise_var)))
}

/// Variable-rate threshold (1+Omega)^rf - 1 (HBD) or (1+Omega)^(2 rf) - 1
/// (HD, twice the rate for the same airtime).
pub fn variable_rate_threshold(omega: f64, rf: f64, duplex: Duplex) -> f64 {
    let e = match duplex {
        Duplex::Hbd => rf,
        Duplex::Hd => 2.0 * rf,
    };
    (e * (1.0 + omega).ln()).exp_m1()
}
