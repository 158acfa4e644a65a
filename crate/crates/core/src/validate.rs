//! Runtime self-checks of the solver, optimizers, outage model and signal
//! oracle, sized for a quick run from the command line.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::fading::{conditional_outage_analytic, draw_channel, in_outage};
use crate::model::{
    esinr, link_snrs, reduced_esinr, relay_tx_power, ChannelRealization, RelayDecision,
    SystemParams,
};
use crate::optimizer::{feasible_rho_limit, full_csi, joint_exhaustive, Q1Problem};
use crate::oracle::{simulate, SymbolStreamConfig};
use crate::quartic::{real_roots, QuarticCoeffs, RESIDUAL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs every check; `scale` multiplies the default sample sizes.
pub fn run_all(scale: f64, seed: u64) -> Vec<CheckResult> {
    let n = |base: usize| ((base as f64 * scale).ceil() as usize).max(1);
    vec![
        quartic_planted(n(10_000), seed),
        optimizer_grid(n(1_000), seed),
        joint_dominates(n(50), seed),
        conditional_outage(n(100), seed),
        signal_oracle(n(5), seed),
    ]
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_params<R: Rng>(r: &mut R) -> SystemParams {
    let d1 = r.gen_range(0.3..1.7);
    SystemParams {
        eh_efficiency: r.gen_range(0.2..0.8),
        ..SystemParams::default()
    }
    .with_rate(r.gen_range(0.5..4.0))
    .with_distances(d1, 2.0 - d1)
    .with_snr_db(r.gen_range(10.0..50.0))
    .with_inr_db(r.gen_range(0.0..40.0))
}

/// Planted real roots in `[-3, 3]`, at least 0.05 apart, recovered to 1e-7.
pub fn quartic_planted(cases: usize, seed: u64) -> CheckResult {
    let mut r = rng(seed, 1);
    let (mut missed, mut worst) = (0, 0.0f64);
    for _ in 0..cases {
        let mut roots: Vec<f64> = Vec::new();
        while roots.len() < 4 {
            let x = r.gen_range(-3.0..3.0);
            if roots.iter().all(|y| (x - y).abs() >= 0.05) {
                roots.push(x);
            }
        }
        roots.sort_by(f64::total_cmp);
        let lead = r.gen_range(0.1..10.0);
        let (s1, s2, s3, s4) = elementary(&roots);
        let q = QuarticCoeffs::new(lead, -lead * s1, lead * s2, -lead * s3, lead * s4);
        match real_roots(&q) {
            Ok(got) => {
                if got.len() != 4 || got.iter().zip(&roots).any(|(g, w)| (g - w).abs() > 1e-7) {
                    missed += 1;
                }
                for x in got.iter() {
                    worst = worst.max(q.scaled_residual(x));
                }
            }
            Err(_) => missed += 1,
        }
    }
    CheckResult {
        name: "quartic planted roots",
        passed: missed == 0 && worst <= RESIDUAL_TOL,
        detail: format!("{missed}/{cases} missed; largest scaled residual {worst:.1e}"),
    }
}

fn elementary(r: &[f64]) -> (f64, f64, f64, f64) {
    let s1 = r.iter().sum();
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            s2 += r[i] * r[j];
            for k in j + 1..4 {
                s3 += r[i] * r[j] * r[k];
            }
        }
    }
    (s1, s2, s3, r.iter().product())
}

/// Full-CSI ratio against a 1000-point grid of the max-power e-SINR.
pub fn optimizer_grid(cases: usize, seed: u64) -> CheckResult {
    let mut r = rng(seed, 2);
    let (mut failures, mut worst_residual) = (0, 0.0f64);
    for _ in 0..cases {
        let p = random_params(&mut r);
        let ch = draw_channel(&p, &mut r);
        let snrs = link_snrs(&p, &ch);
        let eta = p.eh_efficiency;
        let hi = feasible_rho_limit(ch.f2, eta);
        let value = |rho: f64| {
            let d = RelayDecision::at_max_power(&p, &ch, rho);
            if d.feasible {
                reduced_esinr(&snrs, ch.f2, eta, rho).max(0.0)
            } else {
                0.0
            }
        };
        let best = (1..=1000)
            .map(|k| value(hi * k as f64 / 1001.0))
            .fold(0.0, f64::max);
        let out = full_csi(&p, &ch);
        if out.esinr < best * (1.0 - 1e-6) {
            failures += 1;
        }
        let q = Q1Problem::new(&snrs, ch.f2, eta).coeffs();
        if let Ok(roots) = real_roots(&q) {
            for x in roots.iter() {
                worst_residual = worst_residual.max(q.scaled_residual(x));
            }
        }
    }
    CheckResult {
        name: "full-CSI optimizer vs grid",
        passed: failures == 0 && worst_residual <= RESIDUAL_TOL,
        detail: format!("{failures}/{cases} below grid; largest Q1 residual {worst_residual:.1e}"),
    }
}

/// The joint grid search is never more than 1% below the max-power policy,
/// which bounds the grid-resolution loss at these grid sizes.
pub fn joint_dominates(cases: usize, seed: u64) -> CheckResult {
    let mut r = rng(seed, 3);
    let mut failures = 0;
    for _ in 0..cases {
        let p = random_params(&mut r);
        let ch = draw_channel(&p, &mut r);
        let full = full_csi(&p, &ch).esinr;
        let joint = joint_exhaustive(&p, &ch, 400, 100).esinr;
        if joint < full * (1.0 - 1e-2) {
            failures += 1;
        }
    }
    CheckResult {
        name: "joint search vs full CSI",
        passed: failures == 0,
        detail: format!("{failures}/{cases} with joint below full CSI by more than 1%"),
    }
}

/// Conditional outage formula against Monte Carlo over `|g|^2`.
pub fn conditional_outage(cases: usize, seed: u64) -> CheckResult {
    let mut r = rng(seed, 4);
    let draws = 20_000;
    let mut within = 0;
    for _ in 0..cases {
        let p = random_params(&mut r);
        let ch = draw_channel(&p, &mut r);
        let rho = r.gen_range(0.05..0.95);
        let want = conditional_outage_analytic(&p, ch.h2, ch.f2, rho);
        let d = RelayDecision::at_max_power(&p, &ch, rho);
        let hits = (0..draws)
            .filter(|_| {
                let g2 = r.sample::<f64, _>(Exp1) * p.mean_g2;
                in_outage(&p, &ChannelRealization { g2, ..ch }, &d)
            })
            .count();
        let got = hits as f64 / draws as f64;
        if (got - want).abs() <= 3.0 * (want * (1.0 - want) / draws as f64).sqrt() {
            within += 1;
        }
    }
    CheckResult {
        name: "conditional outage vs Monte Carlo",
        passed: within as f64 >= 0.95 * cases as f64,
        detail: format!("{within}/{cases} within 3 sigma"),
    }
}

/// Sampled-symbol powers against the analytic decomposition.
pub fn signal_oracle(cases: usize, seed: u64) -> CheckResult {
    let mut r = rng(seed, 5);
    let (mut done, mut failures, mut worst) = (0, 0, 0.0f64);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    while done < cases {
        let p = random_params(&mut r);
        let ch = draw_channel(&p, &mut r);
        let d = RelayDecision::at_max_power(&p, &ch, r.gen_range(0.05..0.95));
        if !d.feasible || d.loop_gain(ch.f2) > 0.5 || ch.f2 == 0.0 {
            continue;
        }
        done += 1;
        let cfg =
            SymbolStreamConfig::from_realization(&ch, &d, 1_000_000, r.gen_range(1..5), r.gen());
        let (Ok(got), Ok(want), Ok(pr)) = (
            simulate(&cfg, &p, &d),
            esinr(&p, &ch, &d),
            relay_tx_power(&p, &ch, &d),
        ) else {
            failures += 1;
            continue;
        };
        let e = [
            rel(got.breakdown.esinr, want.esinr),
            rel(got.breakdown.desired_power, want.desired_power),
            rel(got.breakdown.loop_power, want.loop_power),
            rel(got.breakdown.noise_power_out, want.noise_power_out),
            rel(got.relay_power, pr),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        worst = worst.max(e);
        if e >= 0.01 {
            failures += 1;
        }
    }
    CheckResult {
        name: "signal oracle vs analytic powers",
        passed: failures == 0,
        detail: format!(
            "{failures}/{cases} off by >= 1%; largest relative error {:.3}%",
            100.0 * worst
        ),
    }
}
