//! Outage probability, finite-SNR diversity gain, and diversity-multiplexing
//! tradeoff analysis for a hybrid-duplex link (one full-duplex ground station
//! and two half-duplex air stations sharing spectrum) over Rician fading,
//! cross-validated by a seeded Monte-Carlo channel oracle.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`specfun`] | Laguerre polynomials, terminating ₁F₁, Bessel I₀, Marcum Q₁ |
//! | [`scenario`] | System parameterization, link budget, rate thresholds |
//! | [`outage`] | Closed-form outage series for all duplex/detector modes, quadrature oracle |
//! | [`diversity`] | Finite-SNR diversity gains and finite-SNR DMT curves |
//! | [`mc`] | Reproducible Monte-Carlo outage estimation |
//!
//! All closed forms evaluate factorial/power products in log space with sign
//! tracking; series truncation and precision accounting are controlled by
//! [`outage::SeriesControl`].

pub mod diversity;
pub mod mc;
pub mod outage;
pub mod scenario;
pub mod specfun;

mod quad;
mod series;
