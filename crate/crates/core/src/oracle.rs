//! Sampled-symbol simulator of the full-duplex relay loop.
//!
//! The relay is run in the time domain, `x_r(k) = sqrt(beta) y_r(k - tau)`,
//! with complex channels, QPSK source symbols and complex Gaussian noise.
//! Because the loop is linear, the source-driven and relay-noise-driven parts
//! of the relay state are propagated separately; the destination powers are
//! then split empirically by least-squares projection onto the delayed
//! source symbol and the delayed relay noise sample.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{ChannelRealization, RelayDecision, SinrBreakdown, SystemParams};

/// Tail bound on the geometric loop echoes discarded by the warm-up.
pub const TAIL_BOUND: f64 = 1e-12;

/// Longest warm-up accepted; loops this close to oscillation are rejected.
pub const MAX_WARMUP: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolStreamConfig {
    pub num_symbols: usize,
    /// Relay processing delay in symbols, at least one.
    pub processing_delay: usize,
    /// Number of loop echoes covered by the warm-up; the warm-up lasts
    /// `recursion_truncation * processing_delay` symbols.
    pub recursion_truncation: usize,
    pub h: Complex64,
    pub g: Complex64,
    pub f: Complex64,
    pub seed: u64,
}

impl SymbolStreamConfig {
    /// Complex channels with the realization's magnitudes and uniform phases.
    pub fn from_realization(
        ch: &ChannelRealization,
        decision: &RelayDecision,
        num_symbols: usize,
        processing_delay: usize,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_c4a7);
        let mut phase = || Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        Self {
            num_symbols,
            processing_delay,
            recursion_truncation: required_truncation(decision.loop_gain(ch.f2)),
            h: ch.h2.sqrt() * phase(),
            g: ch.g2.sqrt() * phase(),
            f: ch.f2.sqrt() * phase(),
            seed,
        }
    }

    pub fn realization(&self) -> ChannelRealization {
        ChannelRealization::new(self.h.norm_sqr(), self.g.norm_sqr(), self.f.norm_sqr())
    }
}

/// Smallest echo count `J` with `loop_gain^J <= TAIL_BOUND`.
pub fn required_truncation(loop_gain: f64) -> usize {
    if loop_gain <= 0.0 {
        return 1;
    }
    if loop_gain >= 1.0 {
        return usize::MAX;
    }
    (TAIL_BOUND.ln() / loop_gain.ln()).ceil().max(1.0) as usize
}

/// Measured powers from one simulated stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub breakdown: SinrBreakdown,
    /// `E|x_r|^2`
    pub relay_power: f64,
    /// `E|y_d|^2`
    pub received_power: f64,
}

pub fn simulate_powers(
    cfg: &SymbolStreamConfig,
    params: &SystemParams,
    decision: &RelayDecision,
) -> Result<SinrBreakdown> {
    simulate(cfg, params, decision).map(|r| r.breakdown)
}

struct Loop {
    tau: usize,
    source_state: Vec<Complex64>,
    noise_state: Vec<Complex64>,
    symbols: Vec<Complex64>,
    relay_noise: Vec<Complex64>,
    slot: usize,
}

/// One symbol period: relay outputs and the delayed excitations they carry.
struct Step {
    x_source: Complex64,
    x_noise: Complex64,
    s_delayed: Complex64,
    nr_delayed: Complex64,
}

impl Loop {
    fn new(tau: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); tau];
        Self {
            tau,
            source_state: z.clone(),
            noise_state: z.clone(),
            symbols: z.clone(),
            relay_noise: z,
            slot: 0,
        }
    }

    fn step(
        &mut self,
        gain: f64,
        src: Complex64,
        loop_ch: Complex64,
        s: Complex64,
        nr: Complex64,
    ) -> Step {
        let i = self.slot;
        let x_source = gain * self.source_state[i];
        let x_noise = gain * self.noise_state[i];
        let out = Step {
            x_source,
            x_noise,
            s_delayed: self.symbols[i],
            nr_delayed: self.relay_noise[i],
        };
        self.source_state[i] = src * s + loop_ch * x_source;
        self.noise_state[i] = loop_ch * x_noise + nr;
        self.symbols[i] = s;
        self.relay_noise[i] = nr;
        self.slot = (i + 1) % self.tau;
        out
    }
}

fn qpsk<R: Rng>(rng: &mut R) -> Complex64 {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(
        if rng.gen() { a } else { -a },
        if rng.gen() { a } else { -a },
    )
}

fn cgauss<R: Rng>(rng: &mut R, std: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std
}

/// Runs the relay loop and measures every destination power component.
pub fn simulate(
    cfg: &SymbolStreamConfig,
    params: &SystemParams,
    decision: &RelayDecision,
) -> Result<OracleReport> {
    let ch = cfg.realization();
    let lg = decision.loop_gain(ch.f2);
    if lg >= 1.0 {
        return Err(Error::Oscillatory { loop_gain: lg });
    }
    if cfg.processing_delay == 0 {
        return Err(Error::InvalidParams(
            "processing_delay must be at least 1".into(),
        ));
    }
    if cfg.num_symbols == 0 {
        return Err(Error::InvalidParams("num_symbols must be positive".into()));
    }

    let (rho, beta) = (decision.rho, decision.beta);
    let src = ((1.0 - rho) * params.source_power / params.path_loss_sr()).sqrt() * cfg.h;
    let loop_ch = (1.0 - rho).sqrt() * cfg.f;
    let gain = beta.sqrt();
    let dest = cfg.g / params.path_loss_rd().sqrt();
    let noise_std = (params.noise_power / 2.0).sqrt();

    let mut lp = Loop::new(cfg.processing_delay);

    // Warm-up inputs come from their own generator and are drawn newest
    // first, so a deeper warm-up only prepends older excitation whose echoes
    // have decayed below the tail bound.
    let warmup = cfg
        .recursion_truncation
        .saturating_mul(cfg.processing_delay);
    if warmup > MAX_WARMUP {
        return Err(Error::InvalidParams(format!(
            "warm-up of {warmup} symbols exceeds {MAX_WARMUP}"
        )));
    }
    let mut warm_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    warm_rng.set_stream(1);
    let history: Vec<_> = (0..warmup)
        .map(|_| (qpsk(&mut warm_rng), cgauss(&mut warm_rng, noise_std)))
        .collect();
    for &(s, nr) in history.iter().rev() {
        lp.step(gain, src, loop_ch, s, nr);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let zero = Complex64::new(0.0, 0.0);
    let (mut total, mut relay) = (0.0, 0.0);
    let (mut ys_pow, mut yn_pow, mut nd_pow, mut s_pow, mut nr_pow) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut ys_s, mut yn_nr) = (zero, zero);
    for _ in 0..cfg.num_symbols {
        let s = qpsk(&mut rng);
        let nr = cgauss(&mut rng, noise_std);
        let nd = cgauss(&mut rng, noise_std);
        let st = lp.step(gain, src, loop_ch, s, nr);

        let yd_source = dest * st.x_source;
        let yd_noise = dest * st.x_noise;
        let yd = yd_source + yd_noise + nd;

        total += yd.norm_sqr();
        relay += (st.x_source + st.x_noise).norm_sqr();
        ys_pow += yd_source.norm_sqr();
        yn_pow += yd_noise.norm_sqr();
        nd_pow += nd.norm_sqr();
        s_pow += st.s_delayed.norm_sqr();
        nr_pow += st.nr_delayed.norm_sqr();
        ys_s += yd_source * st.s_delayed.conj();
        yn_nr += yd_noise * st.nr_delayed.conj();
    }
    let n = cfg.num_symbols as f64;

    // Projection of the source-driven output onto s(k - tau) is the desired
    // term; the residual is the source echo.
    let desired = if s_pow > 0.0 {
        ys_s.norm_sqr() / s_pow
    } else {
        0.0
    };
    let source_echo = (ys_pow - desired).max(0.0);
    // Same split for relay noise: first pass versus its echoes.
    let first_pass = if nr_pow > 0.0 {
        yn_nr.norm_sqr() / nr_pow
    } else {
        0.0
    };
    let noise_echo = (yn_pow - first_pass).max(0.0);

    Ok(OracleReport {
        breakdown: SinrBreakdown::from_components(
            desired / n,
            (source_echo + noise_echo) / n,
            (first_pass + nd_pow) / n,
        ),
        relay_power: relay / n,
        received_power: total / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::esinr;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn truncation_depth() {
        assert_eq!(required_truncation(0.0), 1);
        assert_eq!(required_truncation(0.1), 12);
        assert_eq!(required_truncation(1.0), usize::MAX);
    }

    #[test]
    fn silent_relay_leaves_noise_only() {
        let p = SystemParams::default();
        let ch = ChannelRealization::new(1.0, 1.0, 0.2);
        let d = RelayDecision {
            rho: 0.5,
            beta: 0.0,
            feasible: true,
        };
        let cfg = SymbolStreamConfig::from_realization(&ch, &d, 200_000, 1, 3);
        let b = simulate_powers(&cfg, &p, &d).unwrap();
        assert_eq!(b.desired_power, 0.0);
        assert_eq!(b.loop_power, 0.0);
        assert!(rel(b.noise_power_out, p.noise_power) < 0.01);
    }

    #[test]
    fn no_loop_channel_gives_single_echo() {
        let p = SystemParams {
            source_power: 5.0,
            d1: 1.2,
            d2: 0.8,
            ..SystemParams::default()
        };
        let ch = ChannelRealization::new(0.7, 1.3, 0.0);
        let d = RelayDecision {
            rho: 0.4,
            beta: 2.0,
            feasible: true,
        };
        let cfg = SymbolStreamConfig::from_realization(&ch, &d, 100_000, 2, 9);
        let b = simulate_powers(&cfg, &p, &d).unwrap();
        assert!(b.loop_power < 1e-12);
        let want = (1.0 - 0.4) * 2.0 * 5.0 * 0.7 * 1.3 / (p.path_loss_sr() * p.path_loss_rd());
        assert!(rel(b.desired_power, want) < 0.01);
    }

    #[test]
    fn oscillatory_decision_rejected() {
        let p = SystemParams::default();
        let ch = ChannelRealization::new(1.0, 1.0, 4.0);
        let d = RelayDecision {
            rho: 0.5,
            beta: 1.0,
            feasible: true,
        };
        let cfg = SymbolStreamConfig {
            recursion_truncation: 1,
            ..SymbolStreamConfig::from_realization(&ch, &RelayDecision { beta: 0.0, ..d }, 10, 1, 0)
        };
        assert!(matches!(
            simulate(&cfg, &p, &d),
            Err(Error::Oscillatory { .. })
        ));
    }

    #[test]
    fn matches_analytic_breakdown() {
        // gamma_sr = 100, gamma_rd = 50, f2 = 0.1, eta = 0.4, rho = 0.6
        let p = SystemParams {
            source_power: 100.0,
            ..SystemParams::default()
        };
        let ch = ChannelRealization::new(1.0, 0.5, 0.1);
        let d = RelayDecision::at_max_power(&p, &ch, 0.6);
        let cfg = SymbolStreamConfig::from_realization(&ch, &d, 1_000_000, 3, 21);
        let got = simulate(&cfg, &p, &d).unwrap();
        let want = esinr(&p, &ch, &d).unwrap();
        assert!(rel(got.breakdown.esinr, want.esinr) < 0.01);
        assert!(rel(got.breakdown.desired_power, want.desired_power) < 0.01);
        assert!(rel(got.breakdown.loop_power, want.loop_power) < 0.01);
        assert!(rel(got.breakdown.noise_power_out, want.noise_power_out) < 0.01);
        assert!(rel(got.received_power, want.total()) < 0.01);
        let pr = crate::model::relay_tx_power(&p, &ch, &d).unwrap();
        assert!(rel(got.relay_power, pr) < 0.01);
    }

    #[test]
    fn deeper_warmup_changes_little() {
        let p = SystemParams {
            source_power: 30.0,
            ..SystemParams::default()
        };
        let ch = ChannelRealization::new(1.0, 0.8, 0.5);
        let d = RelayDecision::at_max_power(&p, &ch, 0.5);
        let cfg = SymbolStreamConfig::from_realization(&ch, &d, 200_000, 2, 5);
        let a = simulate(&cfg, &p, &d).unwrap();
        let b = simulate(
            &SymbolStreamConfig {
                recursion_truncation: 2 * cfg.recursion_truncation,
                ..cfg
            },
            &p,
            &d,
        )
        .unwrap();
        assert!(rel(a.breakdown.esinr, b.breakdown.esinr) < 1e-9);
        assert!(rel(a.relay_power, b.relay_power) < 1e-9);
    }
}
