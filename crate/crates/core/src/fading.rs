//! Rayleigh block fading and Monte Carlo outage estimation.
//!
//! Trials are cut into fixed-size chunks. Chunk `k` of stream `s` draws from
//! a ChaCha8 generator seeded with the run seed and positioned on stream
//! `(s << 32) | k`, so an estimate depends only on the seed, the stream id and
//! the trial count, never on how chunks are scheduled across threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::model::{
    achieved_esinr, harvest_margin, link_snrs, ChannelRealization, RelayDecision, SystemParams,
};
use crate::optimizer::{OutageCoefficients, Scheme};

/// Trials per independently seeded chunk.
pub const CHUNK_TRIALS: u64 = 1 << 14;

/// Default Monte Carlo size per curve point.
pub const DEFAULT_TRIALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RngSpec {
    pub seed: u64,
    /// Independent substream; must fit in 32 bits.
    pub stream_id: u32,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u32) -> Self {
        Self { seed, stream_id }
    }

    /// Generator for one chunk of this stream.
    pub fn chunk_rng(&self, chunk: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((u64::from(self.stream_id) << 32) | u64::from(chunk));
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_out: f64,
    pub outages: u64,
    pub trials: u64,
    /// Normal-approximation 95% half-width.
    pub half_width_95: f64,
}

impl OutageEstimate {
    pub fn from_counts(outages: u64, trials: u64) -> Self {
        assert!(trials > 0 && outages <= trials);
        let p = outages as f64 / trials as f64;
        Self {
            p_out: p,
            outages,
            trials,
            half_width_95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    /// Standard error `sqrt(p (1 - p) / n)`.
    pub fn std_error(&self) -> f64 {
        self.half_width_95 / 1.96
    }

    /// Exact two-sided Clopper-Pearson interval at confidence `1 - alpha`.
    pub fn clopper_pearson(&self, alpha: f64) -> (f64, f64) {
        let (k, n) = (self.outages as f64, self.trials as f64);
        let lo = if self.outages == 0 {
            0.0
        } else {
            Beta::new(k, n - k + 1.0)
                .map(|b| b.inverse_cdf(alpha / 2.0))
                .unwrap_or(0.0)
        };
        let hi = if self.outages == self.trials {
            1.0
        } else {
            Beta::new(k + 1.0, n - k)
                .map(|b| b.inverse_cdf(1.0 - alpha / 2.0))
                .unwrap_or(1.0)
        };
        (lo, hi)
    }
}

/// Independent exponential power gains with the configured means.
pub fn draw_channel<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelRealization {
    let h2: f64 = rng.sample(Exp1);
    let g2: f64 = rng.sample(Exp1);
    let f2: f64 = rng.sample(Exp1);
    ChannelRealization::new(
        h2 * params.mean_h2,
        g2 * params.mean_g2,
        f2 * params.mean_f2,
    )
}

/// Whether a decision leaves the block in outage.
pub fn in_outage(params: &SystemParams, ch: &ChannelRealization, decision: &RelayDecision) -> bool {
    if !decision.feasible {
        return true;
    }
    let snrs = link_snrs(params, ch);
    // `!(x >= t)` so that a NaN SINR counts as an outage.
    !(achieved_esinr(&snrs, ch.f2, params.eh_efficiency, decision) >= params.sinr_threshold)
}

fn chunk_sizes(trials: u64) -> impl IndexedParallelIterator<Item = (u32, u64)> {
    let chunks = u32::try_from(trials.div_ceil(CHUNK_TRIALS)).expect("too many trials");
    (0..chunks).into_par_iter().map(move |k| {
        let start = u64::from(k) * CHUNK_TRIALS;
        (k, CHUNK_TRIALS.min(trials - start))
    })
}

/// Outage probability of one scheme.
pub fn outage_mc(
    params: &SystemParams,
    scheme: Scheme,
    trials: u64,
    rng: RngSpec,
) -> OutageEstimate {
    outage_mc_many(params, &[scheme], trials, rng)[0]
}

/// Outage probabilities of several schemes evaluated on the same channel
/// draws. Each entry equals what [`outage_mc`] returns for that scheme alone.
pub fn outage_mc_many(
    params: &SystemParams,
    schemes: &[Scheme],
    trials: u64,
    rng: RngSpec,
) -> Vec<OutageEstimate> {
    if trials == 0 {
        return schemes
            .iter()
            .map(|_| OutageEstimate {
                p_out: f64::NAN,
                outages: 0,
                trials: 0,
                half_width_95: f64::NAN,
            })
            .collect();
    }
    let counts = chunk_sizes(trials)
        .map(|(k, n)| {
            let mut r = rng.chunk_rng(k);
            let mut counts = vec![0u64; schemes.len()];
            for _ in 0..n {
                let ch = draw_channel(params, &mut r);
                for (c, s) in counts.iter_mut().zip(schemes) {
                    if in_outage(params, &ch, &s.decide(params, &ch)) {
                        *c += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; schemes.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    counts
        .into_iter()
        .map(|c| OutageEstimate::from_counts(c, trials))
        .collect()
}

/// Outage probability over the second-hop fading alone, for a relay that
/// knows `|h|^2` and `|f|^2` and splits at `rho` with the max-power gain.
///
/// Returns one whenever no second-hop gain can avoid outage: the relay would
/// oscillate, `|h|^2 = 0`, or `G2 <= 0`.
pub fn conditional_outage_analytic(params: &SystemParams, h2: f64, f2: f64, rho: f64) -> f64 {
    if h2 <= 0.0 || harvest_margin(params.eh_efficiency, rho, f2) <= 0.0 {
        return 1.0;
    }
    let oc = OutageCoefficients::new(params, f2, rho);
    let (g1, g2) = (oc.g1(h2), oc.g2(h2));
    if g2 <= 0.0 {
        return 1.0;
    }
    let ratio = g1 / g2;
    if ratio < 0.0 {
        return 1.0;
    }
    -(-ratio / params.mean_g2).exp_m1()
}

/// Monte Carlo counterpart of [`conditional_outage_analytic`]: `|h|^2`,
/// `|f|^2` and `rho` fixed, `|g|^2` redrawn per trial.
pub fn conditional_outage_mc(
    params: &SystemParams,
    h2: f64,
    f2: f64,
    rho: f64,
    draws: u64,
    rng: RngSpec,
) -> OutageEstimate {
    let outages: u64 = chunk_sizes(draws)
        .map(|(k, n)| {
            let mut r = rng.chunk_rng(k);
            let base = ChannelRealization::new(h2, 0.0, f2);
            let decision = RelayDecision::at_max_power(params, &base, rho);
            (0..n)
                .filter(|_| {
                    let g2: f64 = r.sample::<f64, _>(Exp1) * params.mean_g2;
                    in_outage(params, &ChannelRealization::new(h2, g2, f2), &decision)
                })
                .count() as u64
        })
        .sum();
    OutageEstimate::from_counts(outages, draws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_means() {
        let p = SystemParams::default();
        let mut rng = RngSpec::new(7, 0).chunk_rng(0);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| draw_channel(&p, &mut rng).h2).sum::<f64>() / n as f64;
        assert!((0.99..=1.01).contains(&mean), "{mean}");

        let p = SystemParams::default().with_inr_db(40.0);
        let mut rng = RngSpec::new(8, 0).chunk_rng(0);
        let mean: f64 = (0..n).map(|_| draw_channel(&p, &mut rng).f2).sum::<f64>() / n as f64;
        assert!((mean / 1e4 - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn replay_is_identical() {
        let p = SystemParams::default();
        let draw = |spec: RngSpec| {
            let mut r = spec.chunk_rng(3);
            (0..100)
                .map(|_| draw_channel(&p, &mut r))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(RngSpec::new(1, 2)), draw(RngSpec::new(1, 2)));
        assert_ne!(draw(RngSpec::new(1, 2)), draw(RngSpec::new(1, 3)));
    }

    #[test]
    fn zero_threshold_never_outage() {
        let p = SystemParams {
            sinr_threshold: 0.0,
            rate: 0.0,
            mean_f2: 1e-6,
            ..SystemParams::default()
        }
        .with_snr_db(30.0);
        // Fixed ratio with a negligible loop keeps every block feasible.
        let est = outage_mc(&p, Scheme::Fixed(0.5), 20_000, RngSpec::new(1, 0));
        assert_eq!(est.p_out, 0.0);
    }

    #[test]
    fn unreachable_destination() {
        let p = SystemParams {
            mean_g2: 1e-12,
            ..SystemParams::default()
        }
        .with_snr_db(30.0);
        for s in [Scheme::FullCsi, Scheme::PartialCsi, Scheme::Fixed(0.3)] {
            assert_eq!(outage_mc(&p, s, 20_000, RngSpec::new(2, 0)).p_out, 1.0);
        }
    }

    #[test]
    fn many_matches_single() {
        let p = SystemParams::default().with_inr_db(30.0).with_snr_db(35.0);
        let schemes = [Scheme::FullCsi, Scheme::Fixed(0.5)];
        let spec = RngSpec::new(11, 4);
        let many = outage_mc_many(&p, &schemes, 40_000, spec);
        for (s, m) in schemes.iter().zip(&many) {
            assert_eq!(outage_mc(&p, *s, 40_000, spec), *m);
        }
    }

    #[test]
    fn half_width_formula() {
        let e = OutageEstimate::from_counts(100, 10_000);
        assert!((e.half_width_95 - 1.96 * (0.01 * 0.99 / 1e4f64).sqrt()).abs() < 1e-15);
        let (lo, hi) = e.clopper_pearson(0.05);
        assert!(lo < 0.01 && hi > 0.01);
        assert!((hi - lo) > 2.0 * e.half_width_95 * 0.9);
        assert_eq!(
            OutageEstimate::from_counts(0, 10).clopper_pearson(0.05).0,
            0.0
        );
    }

    #[test]
    fn analytic_edge_cases() {
        let p = SystemParams::default().with_snr_db(30.0);
        assert_eq!(conditional_outage_analytic(&p, 0.0, 0.1, 0.3), 1.0);
        let far = SystemParams { mean_g2: 1e12, ..p };
        assert!(conditional_outage_analytic(&far, 1.0, 1e-3, 0.3) < 1e-9);
        // oscillatory split
        assert_eq!(conditional_outage_analytic(&p, 1.0, 100.0, 0.5), 1.0);
    }
}
