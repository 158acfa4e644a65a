//! Physical-layer model of the power-splitting full-duplex AF relay.
//!
//! Everything here works on power gains (`|h|^2`, `|g|^2`, `|f|^2`); complex
//! amplitudes only appear in [`crate::oracle`].

use crate::error::{Error, Result};

/// Static scenario constants.
///
/// Powers are in watts, distances in meters, `block_duration` in seconds.
/// `sinr_threshold` is kept in sync with `rate` by [`SystemParams::with_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub source_power: f64,
    /// Noise variance, identical at the relay and the destination.
    pub noise_power: f64,
    /// Source to relay distance.
    pub d1: f64,
    /// Relay to destination distance.
    pub d2: f64,
    pub path_loss_exp: f64,
    /// Energy conversion efficiency of the harvester.
    pub eh_efficiency: f64,
    /// Target rate in bits/s/Hz.
    pub rate: f64,
    /// Outage threshold `2^rate - 1`.
    pub sinr_threshold: f64,
    pub mean_h2: f64,
    pub mean_g2: f64,
    pub mean_f2: f64,
    pub block_duration: f64,
}

impl Default for SystemParams {
    /// Unit powers and distances, `R = 3`, `eta = 0.4`, `m = 3`, unit-mean
    /// channels.
    fn default() -> Self {
        Self {
            source_power: 1.0,
            noise_power: 1.0,
            d1: 1.0,
            d2: 1.0,
            path_loss_exp: 3.0,
            eh_efficiency: 0.4,
            rate: 3.0,
            sinr_threshold: 7.0,
            mean_h2: 1.0,
            mean_g2: 1.0,
            mean_f2: 1.0,
            block_duration: 1.0,
        }
    }
}

impl SystemParams {
    /// Sets the rate and the matching outage threshold `2^rate - 1`.
    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self.sinr_threshold = rate.exp2() - 1.0;
        self
    }

    /// Sets the transmit SNR `P_s / sigma^2` in dB by scaling the noise power.
    ///
    /// The loop-interference mean is rescaled so the INR is preserved.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        let inr = self.mean_f2 / self.noise_power;
        self.noise_power = self.source_power / db_to_linear(snr_db);
        self.mean_f2 = inr * self.noise_power;
        self
    }

    /// Sets the loop-interference INR `lambda_f / sigma^2` in dB.
    pub fn with_inr_db(mut self, inr_db: f64) -> Self {
        self.mean_f2 = db_to_linear(inr_db) * self.noise_power;
        self
    }

    pub fn with_distances(mut self, d1: f64, d2: f64) -> Self {
        self.d1 = d1;
        self.d2 = d2;
        self
    }

    pub fn snr(&self) -> f64 {
        self.source_power / self.noise_power
    }

    pub fn inr(&self) -> f64 {
        self.mean_f2 / self.noise_power
    }

    /// `d1^m`
    pub fn path_loss_sr(&self) -> f64 {
        self.d1.powf(self.path_loss_exp)
    }

    /// `d2^m`
    pub fn path_loss_rd(&self) -> f64 {
        self.d2.powf(self.path_loss_exp)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        }
        positive("source_power", self.source_power)?;
        positive("noise_power", self.noise_power)?;
        positive("d1", self.d1)?;
        positive("d2", self.d2)?;
        positive("mean_h2", self.mean_h2)?;
        positive("mean_g2", self.mean_g2)?;
        positive("mean_f2", self.mean_f2)?;
        positive("block_duration", self.block_duration)?;
        if !(self.eh_efficiency > 0.0 && self.eh_efficiency < 1.0) {
            return Err(Error::InvalidParams(format!(
                "eh_efficiency must lie in (0, 1), got {}",
                self.eh_efficiency
            )));
        }
        if !(self.path_loss_exp >= 2.0 && self.path_loss_exp.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "path_loss_exp must be >= 2, got {}",
                self.path_loss_exp
            )));
        }
        if !(self.sinr_threshold >= 0.0 && self.sinr_threshold.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "sinr_threshold must be non-negative, got {}",
                self.sinr_threshold
            )));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One block-fading draw of the three channel power gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    /// `|h|^2`, source to relay.
    pub h2: f64,
    /// `|g|^2`, relay to destination.
    pub g2: f64,
    /// `|f|^2`, relay loop-back.
    pub f2: f64,
}

impl ChannelRealization {
    pub fn new(h2: f64, g2: f64, f2: f64) -> Self {
        debug_assert!(h2 >= 0.0 && g2 >= 0.0 && f2 >= 0.0);
        Self { h2, g2, f2 }
    }

    /// The part of the realization known to a relay without second-hop CSI.
    pub fn partial(&self) -> PartialCsi {
        PartialCsi {
            h2: self.h2,
            f2: self.f2,
        }
    }
}

/// First-hop and loop-back gains only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialCsi {
    pub h2: f64,
    pub f2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSnrs {
    /// `P_s |h|^2 / (d1^m sigma^2)`
    pub gamma_sr: f64,
    /// Cascaded `P_s |h|^2 |g|^2 / (d1^m d2^m sigma^2)`.
    pub gamma_rd: f64,
}

pub fn link_snrs(params: &SystemParams, ch: &ChannelRealization) -> LinkSnrs {
    let gamma_sr = source_relay_snr(params, ch.h2);
    LinkSnrs {
        gamma_sr,
        gamma_rd: gamma_sr * ch.g2 / params.path_loss_rd(),
    }
}

pub fn source_relay_snr(params: &SystemParams, h2: f64) -> f64 {
    params.source_power * h2 / (params.path_loss_sr() * params.noise_power)
}

/// A `(rho, beta)` relay control pair.
///
/// `feasible` means the non-oscillation condition `beta (1 - rho) |f|^2 < 1`
/// and the harvested-power budget both hold for the realization the decision
/// was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayDecision {
    pub rho: f64,
    pub beta: f64,
    pub feasible: bool,
}

impl RelayDecision {
    /// Relay parked at `rho = 1`, silent, counted as an outage.
    pub fn certain_outage() -> Self {
        Self {
            rho: 1.0,
            beta: 0.0,
            feasible: false,
        }
    }

    /// Decision that spends the whole harvested budget at splitting ratio `rho`.
    pub fn at_max_power(params: &SystemParams, ch: &ChannelRealization, rho: f64) -> Self {
        let gamma_sr = source_relay_snr(params, ch.h2);
        match max_power_gain_snr(gamma_sr, ch.f2, params.eh_efficiency, rho) {
            Some(beta) => Self {
                rho,
                beta,
                feasible: loop_gain(rho, beta, ch.f2) < 1.0,
            },
            None => Self {
                rho,
                beta: 0.0,
                feasible: false,
            },
        }
    }

    pub fn loop_gain(&self, f2: f64) -> f64 {
        loop_gain(self.rho, self.beta, f2)
    }
}

/// `(1 - rho) beta |f|^2`
pub fn loop_gain(rho: f64, beta: f64, f2: f64) -> f64 {
    (1.0 - rho) * beta * f2
}

/// `eps = 1 - eta rho |f|^2`. The max-power gain is non-oscillatory exactly
/// when this is positive.
pub fn harvest_margin(eta: f64, rho: f64, f2: f64) -> f64 {
    1.0 - eta * rho * f2
}

/// Largest relay gain the harvested energy can sustain at ratio `rho`.
///
/// `None` when the denominator `(1 - rho) gamma_sr - eta rho |f|^2 + 1` is not
/// positive: the power balance then has no finite solution.
pub fn max_power_gain(params: &SystemParams, ch: &ChannelRealization, rho: f64) -> Option<f64> {
    max_power_gain_snr(
        source_relay_snr(params, ch.h2),
        ch.f2,
        params.eh_efficiency,
        rho,
    )
}

pub fn max_power_gain_snr(gamma_sr: f64, f2: f64, eta: f64, rho: f64) -> Option<f64> {
    let denom = (1.0 - rho) * gamma_sr - eta * rho * f2 + 1.0;
    if denom > 0.0 {
        Some(eta * rho * gamma_sr / denom)
    } else {
        None
    }
}

/// Relay transmit power from the geometric sum over all loop echoes.
pub fn relay_tx_power(
    params: &SystemParams,
    ch: &ChannelRealization,
    decision: &RelayDecision,
) -> Result<f64> {
    let lg = decision.loop_gain(ch.f2);
    if lg >= 1.0 {
        return Err(Error::Oscillatory { loop_gain: lg });
    }
    let input = (1.0 - decision.rho) * params.source_power * ch.h2 / params.path_loss_sr()
        + params.noise_power;
    Ok(decision.beta * input / (1.0 - lg))
}

/// Energy harvested over one block when the relay transmits at `relay_power`.
pub fn harvested_energy(
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: f64,
    relay_power: f64,
) -> f64 {
    max_relay_power(params, ch, rho, relay_power) * params.block_duration
}

/// Power budget `E_h / T` given the relay's own transmit power.
pub fn max_relay_power(
    params: &SystemParams,
    ch: &ChannelRealization,
    rho: f64,
    relay_power: f64,
) -> f64 {
    params.eh_efficiency
        * rho
        * (params.source_power * ch.h2 / params.path_loss_sr() + ch.f2 * relay_power)
}

/// Destination power split into desired, loop-interference and noise parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrBreakdown {
    pub desired_power: f64,
    pub loop_power: f64,
    pub noise_power_out: f64,
    pub esinr: f64,
}

impl SinrBreakdown {
    pub fn from_components(desired_power: f64, loop_power: f64, noise_power_out: f64) -> Self {
        Self {
            desired_power,
            loop_power,
            noise_power_out,
            esinr: desired_power / (loop_power + noise_power_out),
        }
    }

    pub fn total(&self) -> f64 {
        self.desired_power + self.loop_power + self.noise_power_out
    }
}

/// End-to-end SINR for an arbitrary (non-oscillatory) decision.
pub fn esinr(
    params: &SystemParams,
    ch: &ChannelRealization,
    decision: &RelayDecision,
) -> Result<SinrBreakdown> {
    let lg = decision.loop_gain(ch.f2);
    if lg >= 1.0 {
        return Err(Error::Oscillatory { loop_gain: lg });
    }
    let (rho, beta) = (decision.rho, decision.beta);
    let first_hop = (1.0 - rho) * params.source_power * ch.h2 / params.path_loss_sr();
    let second_hop = beta * ch.g2 / params.path_loss_rd();
    let desired = first_hop * second_hop;
    let looped = (first_hop + params.noise_power) * second_hop * lg / (1.0 - lg);
    let noise = (second_hop + 1.0) * params.noise_power;
    Ok(SinrBreakdown::from_components(desired, looped, noise))
}

/// Total destination power `|g|^2 P_r / d2^m + sigma^2`.
pub fn received_power(
    params: &SystemParams,
    ch: &ChannelRealization,
    decision: &RelayDecision,
) -> Result<f64> {
    let pr = relay_tx_power(params, ch, decision)?;
    Ok(ch.g2 * pr / params.path_loss_rd() + params.noise_power)
}

/// Closed-form e-SINR when the relay gain sits at the max-power bound.
///
/// Only meaningful where `1 - eta rho |f|^2 > 0`; callers check feasibility.
pub fn reduced_esinr(snrs: &LinkSnrs, f2: f64, eta: f64, rho: f64) -> f64 {
    let eps = harvest_margin(eta, rho, f2);
    let (gsr, grd) = (snrs.gamma_sr, snrs.gamma_rd);
    let er = eta * rho;
    let num = eps * er * (1.0 - rho) * gsr * grd;
    let den = (1.0 - rho) * (eps + er * er * grd * f2) * gsr + eps * (eps + er * grd);
    num / den
}

/// e-SINR a scheme actually achieves: zero for infeasible blocks.
pub fn achieved_esinr(snrs: &LinkSnrs, f2: f64, eta: f64, decision: &RelayDecision) -> f64 {
    if !decision.feasible {
        return 0.0;
    }
    let g = reduced_esinr(snrs, f2, eta, decision.rho);
    if g.is_finite() && g > 0.0 {
        g
    } else {
        0.0
    }
}
