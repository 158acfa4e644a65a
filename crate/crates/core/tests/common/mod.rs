//! Reference computations shared by the integration tests. They are written
//! from the power definitions, independently of the library's reduced forms.
#![allow(dead_code)]

use fdrelay::model::{ChannelRealization, SystemParams};
use nalgebra::Matrix4;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Destination SINR from first principles for any stable `(rho, beta)`.
pub fn sinr(p: &SystemParams, ch: &ChannelRealization, rho: f64, beta: f64) -> f64 {
    let first_hop = (1.0 - rho) * p.source_power * ch.h2 / p.d1.powf(p.path_loss_exp);
    let second_hop = beta * ch.g2 / p.d2.powf(p.path_loss_exp);
    let l = (1.0 - rho) * beta * ch.f2;
    assert!(l < 1.0, "unstable loop");
    let desired = first_hop * second_hop;
    let looped = (first_hop + p.noise_power) * second_hop * l / (1.0 - l);
    let noise = (second_hop + 1.0) * p.noise_power;
    desired / (looped + noise)
}

/// Gain that spends exactly the harvested power, from the power balance
/// `P_r = eta rho (P_s |h|^2 / d1^m + |f|^2 P_r)`. `None` when no positive
/// balance exists.
pub fn max_power_beta(p: &SystemParams, h2: f64, f2: f64, rho: f64) -> Option<f64> {
    let s = p.source_power * h2 / p.d1.powf(p.path_loss_exp);
    let er = p.eh_efficiency * rho;
    let margin = 1.0 - er * f2;
    if margin <= 0.0 {
        return None;
    }
    let pr = er * s / margin;
    let x = (1.0 - rho) * s + p.noise_power;
    Some(pr / (x + (1.0 - rho) * f2 * pr))
}

/// SINR with the gain at the power bound; zero where no bound exists.
pub fn sinr_at_bound(p: &SystemParams, ch: &ChannelRealization, rho: f64) -> f64 {
    match max_power_beta(p, ch.h2, ch.f2, rho) {
        Some(b) => sinr(p, ch, rho, b),
        None => 0.0,
    }
}

/// Upper end of the `rho` range with a positive power balance.
pub fn rho_limit(p: &SystemParams, f2: f64) -> f64 {
    if f2 > 0.0 {
        (1.0 / (p.eh_efficiency * f2)).min(1.0)
    } else {
        1.0
    }
}

/// Random but physically sensible operating point.
pub fn random_params<R: Rng>(r: &mut R) -> SystemParams {
    let d1 = r.gen_range(0.3..1.7);
    SystemParams {
        eh_efficiency: r.gen_range(0.2..0.8),
        path_loss_exp: r.gen_range(2.0..4.0),
        ..SystemParams::default()
    }
    .with_rate(r.gen_range(0.5..4.0))
    .with_distances(d1, 2.0 - d1)
    .with_snr_db(r.gen_range(10.0..50.0))
    .with_inr_db(r.gen_range(0.0..40.0))
}

pub fn random_channel<R: Rng>(p: &SystemParams, r: &mut R) -> ChannelRealization {
    let e = |r: &mut R| r.sample::<f64, _>(Exp1);
    ChannelRealization::new(e(r) * p.mean_h2, e(r) * p.mean_g2, e(r) * p.mean_f2)
}

/// Real eigenvalues of the companion matrix of `sum c[i] x^i`, the leading
/// coefficient `c[4]` being non-zero. Eigenvalues with imaginary part above
/// `imag_tol` are dropped.
pub fn companion_real_roots(c: [f64; 5], imag_tol: f64) -> Vec<f64> {
    let a = c.map(|x| x / c[4]);
    let m = Matrix4::new(
        0.0, 0.0, 0.0, -a[0], 1.0, 0.0, 0.0, -a[1], 0.0, 1.0, 0.0, -a[2], 0.0, 0.0, 1.0, -a[3],
    );
    let mut out: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= imag_tol)
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

pub fn horner(c: &[f64; 5], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// `|p(x)| / max(max|c_i|, sum |c_i| |x|^i)`.
pub fn scaled_residual(c: &[f64; 5], x: f64) -> f64 {
    let m = c.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mag: f64 = c
        .iter()
        .enumerate()
        .map(|(i, a)| a.abs() * x.abs().powi(i as i32))
        .sum();
    horner(c, x).abs() / mag.max(m)
}

/// Sign-change scan over `n` points of `(lo, hi)` refined by bisection.
pub fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let xs: Vec<f64> = (1..n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 || b - a < 1e-15 {
                a = m;
                b = m;
                break;
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Coefficients (ascending) of `lead * prod (x - r_i) * (x^2 + px + q)^k`.
pub fn expand(lead: f64, real: &[f64], quad: Option<(f64, f64)>) -> [f64; 5] {
    let mut c = vec![lead];
    let mul = |c: &Vec<f64>, f: &[f64]| {
        let mut out = vec![0.0; c.len() + f.len() - 1];
        for (i, a) in c.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    };
    for &r in real {
        c = mul(&c, &[-r, 1.0]);
    }
    if let Some((p, q)) = quad {
        c = mul(&c, &[q, p, 1.0]);
    }
    assert_eq!(c.len(), 5);
    [c[0], c[1], c[2], c[3], c[4]]
}

/// Planted quartic: random real roots in `[-3, 3]` at least `sep` apart,
/// plus a complex pair when only two real roots are planted.
pub fn planted_quartic<R: Rng>(r: &mut R, sep: f64) -> ([f64; 5], Vec<f64>) {
    let n_real = if r.gen_bool(0.5) { 4 } else { 2 };
    let mut roots: Vec<f64> = Vec::new();
    while roots.len() < n_real {
        let x = r.gen_range(-3.0..3.0);
        if roots.iter().all(|y: &f64| (x - *y).abs() >= sep) {
            roots.push(x);
        }
    }
    roots.sort_by(f64::total_cmp);
    let lead = r.gen_range(0.1..10.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 };
    let quad = (n_real == 2).then(|| {
        let (re, im) = (r.gen_range(-3.0..3.0), r.gen_range(0.1..3.0));
        (-2.0 * re, re * re + im * im)
    });
    (expand(lead, &roots, quad), roots)
}
