//! Power-splitting ratio selection.
//!
//! Three policies are provided: the full-CSI optimizer, which maximizes the
//! max-power e-SINR over `rho`; the partial-CSI optimizer, which maximizes
//! the high-SINR conditional-outage surrogate using only `|h|^2` and `|f|^2`;
//! and the fixed-ratio baseline. [`joint_exhaustive`] grid-searches the joint
//! `(rho, beta)` problem and serves as an optimality reference.

use crate::model::{
    harvest_margin, link_snrs, max_power_gain_snr, reduced_esinr, source_relay_snr,
    ChannelRealization, LinkSnrs, PartialCsi, RelayDecision, SystemParams,
};
use crate::quartic::{roots_in_interval, QuarticCoeffs};

/// Open-interval endpoints are evaluated this far inside the interval.
pub const ENDPOINT_OFFSET: f64 = 1e-9;

/// Stationarity quartic of the max-power e-SINR in `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q1Problem {
    pub gamma_sr: f64,
    pub gamma_rd: f64,
    pub f2: f64,
    pub eta: f64,
}

impl Q1Problem {
    pub fn new(snrs: &LinkSnrs, f2: f64, eta: f64) -> Self {
        Self {
            gamma_sr: snrs.gamma_sr,
            gamma_rd: snrs.gamma_rd,
            f2,
            eta,
        }
    }

    pub fn coeffs(&self) -> QuarticCoeffs {
        let Self {
            gamma_sr: gs,
            gamma_rd: gr,
            f2: f,
            eta: e,
        } = *self;
        let a0 = 1.0 + gs;
        let a1 = -2.0 * (1.0 + e * f) * (1.0 + gs);
        let a2 = gs - e * gr + e * e * f * f * (1.0 + gs) + e * f * (5.0 + gs * (4.0 - e * gr));
        let a3 = -2.0 * e * f * (gs + e * f * (2.0 + gs) - e * (1.0 + gs) * gr);
        let a4 = e * e * f * (e * f + gs) * (f - gr);
        QuarticCoeffs::from_ascending([a0, a1, a2, a3, a4])
    }
}

/// Stationarity quartic of the high-SINR surrogate `G~(rho)`.
///
/// The `rho^2` coefficient is `gs (1 + eta f (1 + g0)(4 + eta f)) - eta^2 g0 f^2`;
/// this is what differentiating `G~` gives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q2Problem {
    pub gamma_sr: f64,
    pub gamma_0: f64,
    pub f2: f64,
    pub eta: f64,
}

impl Q2Problem {
    pub fn coeffs(&self) -> QuarticCoeffs {
        let Self {
            gamma_sr: gs,
            gamma_0: g0,
            f2: f,
            eta: e,
        } = *self;
        let c0 = gs - g0;
        let c1 = 2.0 * e * g0 * f - 2.0 * gs * (1.0 + e * f * (1.0 + g0));
        let c2 = gs * (1.0 + e * f * (1.0 + g0) * (4.0 + e * f)) - e * e * g0 * f * f;
        let c3 = -2.0 * e * gs * f * (1.0 + e * f) * (1.0 + g0);
        let c4 = e * e * gs * f * f * (1.0 + g0);
        QuarticCoeffs::from_ascending([c0, c1, c2, c3, c4])
    }
}

/// The `a, b, c, d` coefficients of the conditional outage event
/// `|g|^2 < G1 / G2` with `G1 = a |h|^2 + b` and `G2 = c |h|^4 + d |h|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl OutageCoefficients {
    pub fn new(params: &SystemParams, f2: f64, rho: f64) -> Self {
        let (ps, s2, g0, e) = (
            params.source_power,
            params.noise_power,
            params.sinr_threshold,
            params.eh_efficiency,
        );
        let (l1, l2) = (params.path_loss_sr(), params.path_loss_rd());
        let eps = harvest_margin(e, rho, f2);
        Self {
            a: ps * l1 * l2 * s2 * g0 * (1.0 - rho) * eps,
            b: l1 * l1 * l2 * s2 * s2 * g0 * eps * eps,
            c: e * rho * ps * ps * (1.0 - rho) * (1.0 - e * rho * (1.0 + g0) * f2),
            d: ps * l1 * s2 * e * rho * g0 * (e * rho * f2 - 1.0),
        }
    }

    pub fn g1(&self, h2: f64) -> f64 {
        self.a * h2 + self.b
    }

    pub fn g2(&self, h2: f64) -> f64 {
        self.c * h2 * h2 + self.d * h2
    }

    /// High-SINR approximation of `G2 / G1`.
    pub fn gtilde(&self, h2: f64) -> f64 {
        (self.c * h2 + self.d) / self.a
    }
}

/// Conditions under which the partial-CSI search intervals are meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    C1,
    C2,
    C3,
    None,
}

/// How the first region's CSI condition is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RegionRule {
    /// `gamma_sr > gamma_0`: exactly when `(0, rho1)` is non-empty.
    #[default]
    Exact,
    /// Additionally requires `|f|^2 < 1 / (eta (1 + gamma_0))`, so that
    /// `|f|^2 < F1(rho)` holds for every `rho` in `(0, 1)`.
    Literal,
}

/// Outage thresholds at a particular `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageThresholds {
    pub h1: f64,
    pub h2: f64,
    pub f1: f64,
    pub f2: f64,
}

impl OutageThresholds {
    pub fn new(params: &SystemParams, f2: f64, rho: f64) -> Self {
        let (ps, s2, g0, e) = (
            params.source_power,
            params.noise_power,
            params.sinr_threshold,
            params.eh_efficiency,
        );
        let l1 = params.path_loss_sr();
        let eps = harvest_margin(e, rho, f2);
        Self {
            h1: l1 * s2 * g0 * eps / (ps * (1.0 - rho) * (1.0 - e * rho * f2 * (1.0 + g0))),
            h2: l1 * s2 * eps / (ps * (rho - 1.0)),
            f1: 1.0 / (e * rho * (1.0 + g0)),
            f2: 1.0 / (e * rho),
        }
    }
}

/// CSI classification for the partial-CSI optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialCsiRegions {
    pub gamma_sr: f64,
    /// Boundary of the first search interval `(0, rho1)`.
    pub rho1: f64,
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
}

impl PartialCsiRegions {
    pub fn classify(params: &SystemParams, csi: &PartialCsi, rule: RegionRule) -> Self {
        let gs = source_relay_snr(params, csi.h2);
        let (g0, e, f) = (params.sinr_threshold, params.eh_efficiency, csi.f2);
        let c1 = gs > g0 && (rule == RegionRule::Exact || f < 1.0 / (e * (1.0 + g0)));
        Self {
            gamma_sr: gs,
            rho1: rho1(gs, g0, f, e),
            c1,
            c2: f > 1.0 / e && gs < g0,
            c3: f > 1.0 / e && gs > e * f - 1.0,
        }
    }

    /// Search interval associated with a constraint, before offsetting.
    pub fn interval(&self, which: Constraint, f2: f64, eta: f64) -> Option<(f64, f64)> {
        let (lo, hi) = match which {
            Constraint::C1 => (0.0, self.rho1),
            Constraint::C2 => (self.rho1, 1.0),
            Constraint::C3 => (
                1.0 / (eta * f2),
                (1.0 + self.gamma_sr) / (self.gamma_sr + eta * f2),
            ),
            Constraint::None => return None,
        };
        let (lo, hi) = (lo.max(0.0), hi.min(1.0));
        (lo.is_finite() && hi.is_finite() && hi - lo > 2.0 * ENDPOINT_OFFSET).then_some((lo, hi))
    }

    pub fn satisfied(&self) -> impl Iterator<Item = Constraint> {
        [
            (self.c1, Constraint::C1),
            (self.c2, Constraint::C2),
            (self.c3, Constraint::C3),
        ]
        .into_iter()
        .filter_map(|(on, c)| on.then_some(c))
    }
}

/// Smaller root in `rho` of `gs (1 - rho)(1 - eta rho f2 (1 + g0)) = g0 (1 - eta rho f2)`,
/// i.e. where `|h|^2` crosses `H1(rho)`.
pub fn rho1(gamma_sr: f64, gamma_0: f64, f2: f64, eta: f64) -> f64 {
    let (gs, g0, f, e) = (gamma_sr, gamma_0, f2, eta);
    let den = 2.0 * e * gs * f * (1.0 + g0);
    if den == 0.0 {
        // Quadratic degenerates to gs (1 - rho) = g0.
        return if gs > 0.0 {
            1.0 - g0 / gs
        } else {
            f64::NEG_INFINITY
        };
    }
    let t = e * g0 * f - gs * (e * f * (1.0 + g0) - 1.0);
    let root = (t * t + 4.0 * e * gs * g0 * g0 * f).sqrt();
    -root / den + (gs - e * g0 * f) / den + 0.5
}

/// Full-CSI result together with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullCsiOutcome {
    pub decision: RelayDecision,
    /// Max-power e-SINR at the chosen ratio (zero when infeasible).
    pub esinr: f64,
    /// The chosen ratio is a root of Q1 rather than an interval endpoint.
    pub stationary: bool,
    /// When Q1 has exactly two roots in `(0, 1)`: whether the chosen ratio is
    /// the one picked by the `|f|^2 >= gamma_rd` ordinal rule.
    pub ordinal_agrees: Option<bool>,
}

/// Upper end of the `rho` range where the max-power gain is non-oscillatory.
pub fn feasible_rho_limit(f2: f64, eta: f64) -> f64 {
    if f2 > 0.0 {
        (1.0 / (eta * f2)).min(1.0)
    } else {
        1.0
    }
}

pub fn full_csi_rho(params: &SystemParams, ch: &ChannelRealization) -> RelayDecision {
    full_csi(params, ch).decision
}

pub fn full_csi(params: &SystemParams, ch: &ChannelRealization) -> FullCsiOutcome {
    let snrs = link_snrs(params, ch);
    let eta = params.eh_efficiency;
    let q1 = Q1Problem::new(&snrs, ch.f2, eta).coeffs();
    let hi = feasible_rho_limit(ch.f2, eta);

    let roots = roots_in_interval(&q1, 0.0, hi)
        .map(|r| r.roots().to_vec())
        .unwrap_or_default();
    let endpoints = [ENDPOINT_OFFSET, hi - ENDPOINT_OFFSET];

    let eval = |rho: f64| {
        let d = RelayDecision::at_max_power(params, ch, rho);
        let g = if d.feasible {
            reduced_esinr(&snrs, ch.f2, eta, rho)
        } else {
            0.0
        };
        (d, if g.is_finite() { g.max(0.0) } else { 0.0 })
    };

    let mut best: Option<(RelayDecision, f64, bool)> = None;
    let candidates = roots
        .iter()
        .map(|&r| (r, true))
        .chain(endpoints.iter().map(|&r| (r, false)));
    for (rho, stationary) in candidates {
        let (d, g) = eval(rho);
        if best.is_none_or(|(_, bg, _)| g > bg) {
            best = Some((d, g, stationary));
        }
    }
    let (decision, esinr, stationary) = best.expect("endpoints always evaluated");

    let ordinal_agrees = roots_in_interval(&q1, 0.0, 1.0).ok().and_then(|all| {
        (all.len() == 2).then(|| {
            let pick = if ch.f2 >= snrs.gamma_rd {
                all.roots()[0]
            } else {
                all.roots()[1]
            };
            (pick - decision.rho).abs() <= 1e-9 * (1.0 + pick.abs())
        })
    });

    FullCsiOutcome {
        decision,
        esinr,
        stationary,
        ordinal_agrees,
    }
}

/// Partial-CSI result together with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialCsiOutcome {
    pub decision: RelayDecision,
    pub regions: PartialCsiRegions,
    /// Region that produced the decision; `None` for the certain-outage branch.
    pub chosen: Constraint,
    pub stationary: bool,
    /// Surrogate value at the chosen ratio.
    pub gtilde: f64,
}

pub fn partial_csi_rho(params: &SystemParams, csi: &PartialCsi) -> RelayDecision {
    partial_csi(params, csi, RegionRule::Exact).decision
}

/// Maximizes `G~(rho)` over the non-oscillatory part of every search
/// interval whose CSI condition holds.
pub fn partial_csi(params: &SystemParams, csi: &PartialCsi, rule: RegionRule) -> PartialCsiOutcome {
    let regions = PartialCsiRegions::classify(params, csi, rule);
    let eta = params.eh_efficiency;
    let q2 = Q2Problem {
        gamma_sr: regions.gamma_sr,
        gamma_0: params.sinr_threshold,
        f2: csi.f2,
        eta,
    }
    .coeffs();
    let gt = |rho: f64| OutageCoefficients::new(params, csi.f2, rho).gtilde(csi.h2);
    // g2 is never read: the gain only depends on h2 and f2.
    let ch = ChannelRealization::new(csi.h2, 0.0, csi.f2);

    let mut best: Option<PartialCsiOutcome> = None;
    for which in regions.satisfied() {
        let Some((lo, hi)) = regions.interval(which, csi.f2, eta) else {
            continue;
        };
        // Only the non-oscillatory part of a region can be used.
        let hi = hi.min(feasible_rho_limit(csi.f2, eta));
        if hi - lo <= 2.0 * ENDPOINT_OFFSET {
            continue;
        }
        let roots = roots_in_interval(&q2, lo, hi)
            .map(|r| r.roots().to_vec())
            .unwrap_or_default();
        let candidates = roots
            .iter()
            .map(|&r| (r, true))
            .chain([(lo + ENDPOINT_OFFSET, false), (hi - ENDPOINT_OFFSET, false)]);

        let mut region_best: Option<(f64, f64, bool)> = None;
        for (rho, stationary) in candidates {
            let g = gt(rho);
            if g.is_finite() && region_best.is_none_or(|(_, bg, _)| g > bg) {
                region_best = Some((rho, g, stationary));
            }
        }
        let Some((rho, g, stationary)) = region_best else {
            continue;
        };
        let decision = RelayDecision::at_max_power(params, &ch, rho);
        if !decision.feasible {
            continue;
        }
        if best.is_none_or(|b| g > b.gtilde) {
            best = Some(PartialCsiOutcome {
                decision,
                regions,
                chosen: which,
                stationary,
                gtilde: g,
            });
        }
    }

    best.unwrap_or(PartialCsiOutcome {
        decision: RelayDecision::certain_outage(),
        regions,
        chosen: Constraint::None,
        stationary: false,
        gtilde: 0.0,
    })
}

pub fn fixed_rho(params: &SystemParams, ch: &ChannelRealization, rho: f64) -> RelayDecision {
    RelayDecision::at_max_power(params, ch, rho)
}

/// e-SINR for an arbitrary gain, in terms of link SNRs.
pub fn esinr_general(snrs: &LinkSnrs, f2: f64, rho: f64, beta: f64) -> f64 {
    let (gs, gr) = (snrs.gamma_sr, snrs.gamma_rd);
    let loop_ = (1.0 - rho) * f2;
    let num = (1.0 - rho) * gs * gr;
    let den = gs / beta + gr + ((1.0 - rho) * gs + 1.0) * gr * loop_ / (1.0 / beta - loop_);
    num / den
}

/// Result of the joint grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcome {
    pub decision: RelayDecision,
    pub esinr: f64,
    /// Gain index of the best point equals the top of its `beta` range.
    pub beta_at_bound: bool,
}

/// The `rho` values visited by [`joint_exhaustive`]: `grid` interior points
/// of the range where the power budget admits a positive gain.
pub fn joint_rho_grid(params: &SystemParams, ch: &ChannelRealization, grid: usize) -> Vec<f64> {
    let gs = source_relay_snr(params, ch.h2);
    let rho_top = ((1.0 + gs) / (gs + params.eh_efficiency * ch.f2)).min(1.0);
    (1..=grid)
        .map(|i| rho_top * i as f64 / (grid + 1) as f64)
        .collect()
}

/// Grid search over `rho` and `beta` maximizing the e-SINR under the
/// harvested-power and non-oscillation constraints.
///
/// `rho` is gridded over the part of `(0, 1)` where the power budget admits
/// a positive gain; for each `rho`, `beta` runs over `(0, beta_max]`.
pub fn joint_exhaustive(
    params: &SystemParams,
    ch: &ChannelRealization,
    grid_rho: usize,
    grid_beta: usize,
) -> JointOutcome {
    let snrs = link_snrs(params, ch);
    let eta = params.eh_efficiency;
    let gs = snrs.gamma_sr;

    let mut best = JointOutcome {
        decision: RelayDecision::certain_outage(),
        esinr: 0.0,
        beta_at_bound: false,
    };
    for rho in joint_rho_grid(params, ch, grid_rho) {
        let Some(bound) = max_power_gain_snr(gs, ch.f2, eta, rho) else {
            continue;
        };
        let stable = if ch.f2 > 0.0 {
            (1.0 - 1e-9) / ((1.0 - rho) * ch.f2)
        } else {
            f64::INFINITY
        };
        let beta_top = bound.min(stable);
        for j in 1..=grid_beta {
            let beta = beta_top * j as f64 / grid_beta as f64;
            let g = esinr_general(&snrs, ch.f2, rho, beta);
            if g.is_finite() && g > best.esinr {
                best = JointOutcome {
                    decision: RelayDecision {
                        rho,
                        beta,
                        feasible: true,
                    },
                    esinr: g,
                    beta_at_bound: j == grid_beta,
                };
            }
        }
    }
    best
}

/// A power-splitting policy as used by the outage simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    FullCsi,
    PartialCsi,
    /// Partial CSI with the first region gated by the loop-gain condition too.
    PartialCsiLiteral,
    Fixed(f64),
}

impl Scheme {
    pub fn decide(&self, params: &SystemParams, ch: &ChannelRealization) -> RelayDecision {
        match *self {
            Scheme::FullCsi => full_csi_rho(params, ch),
            Scheme::PartialCsi => partial_csi(params, &ch.partial(), RegionRule::Exact).decision,
            Scheme::PartialCsiLiteral => {
                partial_csi(params, &ch.partial(), RegionRule::Literal).decision
            }
            Scheme::Fixed(rho) => fixed_rho(params, ch, rho),
        }
    }

    /// Stable label used in CSV output and config files.
    pub fn label(&self) -> String {
        match self {
            Scheme::FullCsi => "full".to_string(),
            Scheme::PartialCsi => "partial".to_string(),
            Scheme::PartialCsiLiteral => "partial-literal".to_string(),
            Scheme::Fixed(rho) => format!("fixed-{rho}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "full" => Some(Scheme::FullCsi),
            "partial" => Some(Scheme::PartialCsi),
            "partial-literal" => Some(Scheme::PartialCsiLiteral),
            other => {
                let rho: f64 = other.strip_prefix("fixed-")?.parse().ok()?;
                (rho > 0.0 && rho < 1.0).then_some(Scheme::Fixed(rho))
            }
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::achieved_esinr;

    fn params_for(gamma_sr: f64) -> SystemParams {
        SystemParams {
            source_power: gamma_sr,
            ..SystemParams::default()
        }
    }

    /// Finite-difference derivative of the max-power e-SINR.
    fn fd_slope(snrs: &LinkSnrs, f2: f64, eta: f64, rho: f64) -> f64 {
        let h = 1e-6 * rho.max(1e-3);
        (reduced_esinr(snrs, f2, eta, rho + h) - reduced_esinr(snrs, f2, eta, rho - h)) / (2.0 * h)
    }

    #[test]
    fn q1_constant_terms() {
        let q = Q1Problem {
            gamma_sr: 100.0,
            gamma_rd: 50.0,
            f2: 0.1,
            eta: 0.4,
        };
        let c = q.coeffs();
        assert_eq!(c.a0, 101.0);
        let q = Q1Problem { f2: 60.0, ..q };
        assert!(q.coeffs().a4 > 0.0);
        let q = Q1Problem { f2: 40.0, ..q };
        assert!(q.coeffs().a4 < 0.0);
    }

    #[test]
    fn q1_roots_are_critical_points() {
        let snrs = LinkSnrs {
            gamma_sr: 100.0,
            gamma_rd: 50.0,
        };
        let q = Q1Problem::new(&snrs, 0.1, 0.4).coeffs();
        let roots = roots_in_interval(&q, 0.0, 1.0).unwrap();
        assert!(!roots.is_empty());
        for r in roots.iter() {
            let slope = fd_slope(&snrs, 0.1, 0.4, r);
            assert!(slope.abs() < 1e-4, "slope {slope} at {r}");
        }
    }

    #[test]
    fn q2_roots_are_critical_points_of_gtilde() {
        let p = params_for(200.0);
        let (f2, h2) = (0.05, 1.0);
        let q = Q2Problem {
            gamma_sr: 200.0,
            gamma_0: 7.0,
            f2,
            eta: 0.4,
        }
        .coeffs();
        let r1 = rho1(200.0, 7.0, f2, 0.4);
        let roots = roots_in_interval(&q, 0.0, r1).unwrap();
        assert_eq!(roots.len(), 1);
        let r = roots.roots()[0];
        let h = 1e-7;
        let gt = |rho: f64| OutageCoefficients::new(&p, f2, rho).gtilde(h2);
        let slope = (gt(r + h) - gt(r - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-4 * gt(r).abs(), "slope {slope}");
    }

    #[test]
    fn rho1_is_the_h1_crossing() {
        for &(gs, f) in &[(100.0, 0.05), (50.0, 0.5), (2000.0, 3.0), (9.0, 0.01)] {
            let r = rho1(gs, 7.0, f, 0.4);
            assert!(r > 0.0 && r < 1.0);
            let lhs = gs * (1.0 - r) * (1.0 - 0.4 * r * f * 8.0);
            let rhs = 7.0 * (1.0 - 0.4 * r * f);
            assert!((lhs - rhs).abs() < 1e-9 * rhs, "{gs} {f}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn full_csi_zero_loop_matches_grid() {
        // gamma_sr = gamma_rd = 10, f2 = 0
        let p = params_for(10.0);
        let ch = ChannelRealization::new(1.0, 1.0, 0.0);
        let out = full_csi(&p, &ch);
        assert!(out.stationary && out.decision.feasible);
        let obj = |r: f64| 0.4 * r * (1.0 - r) * 100.0 / ((1.0 - r) * 10.0 + 1.0 + 0.4 * r * 10.0);
        let n = 1_000_000;
        let best = (1..n)
            .map(|k| k as f64 / n as f64)
            .max_by(|a, b| obj(*a).total_cmp(&obj(*b)))
            .unwrap();
        assert!(
            (out.decision.rho - best).abs() < 1e-4,
            "{} vs {best}",
            out.decision.rho
        );
    }

    #[test]
    fn full_csi_vanishing_second_hop() {
        let p = params_for(10.0);
        let ch = ChannelRealization::new(1.0, 1e-14, 0.2);
        let out = full_csi(&p, &ch);
        assert!(out.esinr < 1e-10);
        assert!(out.stationary);
    }

    #[test]
    fn full_csi_beats_fixed_at_strong_loop() {
        let g = 10f64.powf(3.5);
        let p = params_for(g);
        let ch = ChannelRealization::new(1.0, 1.0, 1e3);
        let out = full_csi(&p, &ch);
        assert!(out.decision.feasible && out.esinr > 0.0);
        let snrs = link_snrs(&p, &ch);
        for rho in [0.3, 0.5, 0.7] {
            let d = fixed_rho(&p, &ch, rho);
            assert!(out.esinr >= achieved_esinr(&snrs, ch.f2, 0.4, &d));
        }
    }

    #[test]
    fn fixed_rho_examples() {
        let p = params_for(10.0);
        let d = fixed_rho(&p, &ChannelRealization::new(1.0, 1.0, 0.0), 0.5);
        assert!((d.beta - 1.0 / 3.0).abs() < 1e-15 && d.feasible);
        // 0.7 * 1 - 0.12 * 100 + 1 < 0
        let d = fixed_rho(
            &SystemParams::default(),
            &ChannelRealization::new(1.0, 1.0, 100.0),
            0.3,
        );
        assert!(!d.feasible);
    }

    #[test]
    fn partial_csi_no_constraint_is_certain_outage() {
        // gamma_sr = 5 < 7 and f2 = 1 < 1/eta
        let p = params_for(5.0);
        let out = partial_csi(&p, &PartialCsi { h2: 1.0, f2: 1.0 }, RegionRule::Exact);
        assert_eq!(out.chosen, Constraint::None);
        assert_eq!(out.decision, RelayDecision::certain_outage());
    }

    #[test]
    fn partial_csi_c1_matches_gtilde_grid() {
        let p = params_for(100.0);
        let csi = PartialCsi { h2: 1.0, f2: 1e-6 };
        let out = partial_csi(&p, &csi, RegionRule::Literal);
        assert_eq!(out.chosen, Constraint::C1);
        assert!(out.stationary);
        let r1 = out.regions.rho1;
        let gt = |rho: f64| OutageCoefficients::new(&p, csi.f2, rho).gtilde(csi.h2);
        let n = 1_000_000;
        let best = (1..n)
            .map(|k| r1 * k as f64 / n as f64)
            .max_by(|a, b| gt(*a).total_cmp(&gt(*b)))
            .unwrap();
        assert!((out.decision.rho - best).abs() < 1e-4);
    }

    #[test]
    fn partial_csi_c1_boundary_shrinks_interval() {
        // gamma_sr barely above gamma_0, f2 approaching 1/(eta (1 + g0))
        let p = params_for(7.5);
        let edge = 1.0 / (0.4 * 8.0);
        let mut prev_rho1 = f64::INFINITY;
        for k in 1..=20 {
            let f2 = edge * (1.0 - 0.5f64.powi(k));
            let out = partial_csi(&p, &PartialCsi { h2: 1.0, f2 }, RegionRule::Literal);
            assert_eq!(out.chosen, Constraint::C1);
            let r1 = out.regions.rho1;
            assert!(r1 > 0.0 && r1 <= prev_rho1 + 1e-15);
            assert!(out.decision.rho > 0.0 && out.decision.rho < r1);
            prev_rho1 = r1;
        }
        assert!(prev_rho1 < 0.07);
    }

    #[test]
    fn literal_rule_rejects_moderate_loop() {
        let p = params_for(1000.0);
        let csi = PartialCsi { h2: 1.0, f2: 0.5 };
        assert_eq!(
            partial_csi(&p, &csi, RegionRule::Literal).chosen,
            Constraint::None
        );
        let exact = partial_csi(&p, &csi, RegionRule::Exact);
        assert_eq!(exact.chosen, Constraint::C1);
        assert!(exact.decision.feasible);
    }

    #[test]
    fn thresholds_bracket_outage_rows() {
        let p = params_for(100.0);
        let t = OutageThresholds::new(&p, 0.1, 0.3);
        assert!(t.f1 < t.f2);
        let oc = OutageCoefficients::new(&p, 0.1, 0.3);
        // G2 changes sign at H1 when f2 < F1
        assert!(oc.g2(t.h1 * 1.001) > 0.0 && oc.g2(t.h1 * 0.999) < 0.0);
    }

    #[test]
    fn joint_zero_loop_gain_at_bound() {
        let p = params_for(10.0);
        let ch = ChannelRealization::new(1.0, 1.0, 0.0);
        let out = joint_exhaustive(&p, &ch, 200, 200);
        assert!(out.beta_at_bound);
    }

    #[test]
    fn scheme_labels_round_trip() {
        for s in [
            Scheme::FullCsi,
            Scheme::PartialCsi,
            Scheme::PartialCsiLiteral,
            Scheme::Fixed(0.3),
        ] {
            assert_eq!(Scheme::parse(&s.label()), Some(s));
        }
        assert_eq!(Scheme::parse("fixed-1.5"), None);
        assert_eq!(Scheme::parse("bogus"), None);
    }
}
