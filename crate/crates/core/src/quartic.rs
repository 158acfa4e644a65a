//! Real roots of polynomials of degree at most four.
//!
//! The primary path is Ferrari's resolvent-cubic construction. Whenever a
//! discriminant in that construction cancels badly, or a polished root fails
//! its residual check, the solver falls back to critical-point isolation:
//! the derivative's real roots split the line into monotone pieces and each
//! sign change is bisected to machine precision.

use crate::error::{Error, Result};

/// Discriminants smaller than this multiple of their own magnitude scale are
/// treated as ill-conditioned.
const CANCELLATION: f64 = 1e6 * f64::EPSILON;

/// Returned roots must satisfy `|Q(r)| <= RESIDUAL_TOL * max(1, scale(r))`
/// on the max-normalized polynomial.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Coefficients of `a4 x^4 + a3 x^3 + a2 x^2 + a1 x + a0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub a4: f64,
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl QuarticCoeffs {
    pub fn new(a4: f64, a3: f64, a2: f64, a1: f64, a0: f64) -> Self {
        Self { a4, a3, a2, a1, a0 }
    }

    /// Builds from ascending coefficients `[c0, c1, c2, c3, c4]`.
    pub fn from_ascending(c: [f64; 5]) -> Self {
        Self::new(c[4], c[3], c[2], c[1], c[0])
    }

    pub fn ascending(&self) -> [f64; 5] {
        [self.a0, self.a1, self.a2, self.a3, self.a4]
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.ascending(), x)
    }

    pub fn max_abs(&self) -> f64 {
        self.ascending().iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// `|Q(x)| / max|a_i|`, the residual measure used by the root contract.
    pub fn scaled_residual(&self, x: f64) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let c = self.ascending().map(|a| a / m);
        horner(&c, x).abs() / magnitude_scale(&c, x).max(1.0)
    }
}

/// Real roots in ascending order, with multiplicities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RealRoots {
    roots: Vec<f64>,
    multiplicity: Vec<usize>,
}

impl RealRoots {
    fn from_pairs(mut pairs: Vec<(f64, usize)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (roots, multiplicity) = pairs.into_iter().unzip();
        Self {
            roots,
            multiplicity,
        }
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.roots.iter().copied()
    }

    fn retain(&mut self, keep: impl Fn(f64) -> bool) {
        let (roots, multiplicity) = self
            .roots
            .iter()
            .zip(&self.multiplicity)
            .filter(|(r, _)| keep(**r))
            .map(|(r, m)| (*r, *m))
            .unzip();
        self.roots = roots;
        self.multiplicity = multiplicity;
    }
}

/// Which route produced a root set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    ClosedForm,
    Isolation,
}

/// All real roots of `q`, ascending. Leading zero coefficients lower the
/// degree.
pub fn real_roots(q: &QuarticCoeffs) -> Result<RealRoots> {
    real_roots_traced(q).map(|(r, _)| r)
}

/// Like [`real_roots`], also reporting whether the closed form was trusted.
pub fn real_roots_traced(q: &QuarticCoeffs) -> Result<(RealRoots, SolverPath)> {
    let coeffs = normalized(q)?;
    if coeffs.len() == 1 {
        return Ok((RealRoots::default(), SolverPath::ClosedForm));
    }
    if let Some(pairs) = closed_form(&coeffs) {
        return Ok((RealRoots::from_pairs(pairs), SolverPath::ClosedForm));
    }
    Ok((
        RealRoots::from_pairs(isolate(&coeffs)),
        SolverPath::Isolation,
    ))
}

/// Real roots by critical-point isolation and bisection only.
pub fn real_roots_isolation(q: &QuarticCoeffs) -> Result<RealRoots> {
    let coeffs = normalized(q)?;
    if coeffs.len() == 1 {
        return Ok(RealRoots::default());
    }
    Ok(RealRoots::from_pairs(isolate(&coeffs)))
}

/// Real roots strictly inside `(lo, hi)`.
pub fn roots_in_interval(q: &QuarticCoeffs, lo: f64, hi: f64) -> Result<RealRoots> {
    if !(lo < hi) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    let mut roots = real_roots(q)?;
    roots.retain(|r| r > lo && r < hi);
    Ok(roots)
}

/// Ascending coefficients divided by max |a_i|, with leading zeros removed.
fn normalized(q: &QuarticCoeffs) -> Result<Vec<f64>> {
    let asc = q.ascending();
    if asc.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCoefficient);
    }
    let m = q.max_abs();
    if m == 0.0 {
        return Err(Error::IdenticallyZero);
    }
    let mut c: Vec<f64> = asc.iter().map(|a| a / m).collect();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    Ok(c)
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn magnitude_scale(c: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    c.iter().rev().fold(0.0, |acc, a| acc * ax + a.abs())
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| i as f64 * a)
        .collect()
}

fn residual_ok(c: &[f64], x: f64) -> bool {
    horner(c, x).abs() <= RESIDUAL_TOL * magnitude_scale(c, x).max(1.0)
}

/// Damped Newton steps; a step is kept only if it lowers `|P|`.
fn polish(c: &[f64], mut x: f64) -> f64 {
    let dc = derivative(c);
    let mut fx = horner(c, x).abs();
    for _ in 0..8 {
        if fx == 0.0 {
            break;
        }
        let d = horner(&dc, x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let mut step = horner(c, x) / d;
        let mut improved = false;
        for _ in 0..4 {
            let xn = x - step;
            let fn_ = horner(c, xn).abs();
            if fn_ < fx {
                x = xn;
                fx = fn_;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    x
}

/// Closed-form roots, or `None` when the construction is ill-conditioned.
fn closed_form(c: &[f64]) -> Option<Vec<(f64, usize)>> {
    let lead = *c.last()?;
    let monic: Vec<f64> = c.iter().map(|a| a / lead).collect();
    let raw = match c.len() - 1 {
        1 => vec![-monic[0]],
        2 => quadratic(monic[1], monic[0])?,
        3 => cubic(monic[2], monic[1], monic[0])?.roots,
        4 => ferrari(monic[3], monic[2], monic[1], monic[0])?,
        _ => unreachable!("degree bounded by four"),
    };
    let mut roots: Vec<f64> = Vec::with_capacity(raw.len());
    for r in raw {
        let r = polish(c, r);
        if !r.is_finite() || !residual_ok(c, r) {
            return None;
        }
        roots.push(r);
    }
    roots.sort_by(f64::total_cmp);
    // Coincident roots from separate factors are a multiplicity question the
    // closed form cannot answer reliably.
    for w in roots.windows(2) {
        if w[1] - w[0] <= 1e-6 * (1.0 + w[0].abs().max(w[1].abs())) {
            return None;
        }
    }
    Some(roots.into_iter().map(|r| (r, 1)).collect())
}

/// Real roots of `x^2 + b x + c`, or `None` near a double root.
fn quadratic(b: f64, c: f64) -> Option<Vec<f64>> {
    let disc = b * b - 4.0 * c;
    if disc.abs() <= CANCELLATION * (b * b + 4.0 * c.abs()) {
        return None;
    }
    if disc < 0.0 {
        return Some(Vec::new());
    }
    let s = disc.sqrt();
    let q = -0.5 * (b + b.signum() * s);
    if q == 0.0 {
        // b == 0 and c < 0
        let r = (-c).sqrt();
        return Some(vec![-r, r]);
    }
    Some(vec![q, c / q])
}

struct CubicRoots {
    roots: Vec<f64>,
}

/// Real roots of `x^3 + b x^2 + c x + d`, or `None` when the discriminant
/// cancels.
fn cubic(b: f64, c: f64, d: f64) -> Option<CubicRoots> {
    let shift = b / 3.0;
    let p = c - b * shift;
    let q = 2.0 * shift * shift * shift - c * shift + d;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let scale = half_q * half_q + third_p.abs().powi(3);
    if scale == 0.0 {
        // triple root
        return None;
    }
    if disc.abs() <= CANCELLATION * scale {
        return None;
    }
    let roots = if disc > 0.0 {
        let a = -half_q.signum() * (half_q.abs() + disc.sqrt()).cbrt();
        let t = if a == 0.0 { 0.0 } else { a - third_p / a };
        vec![t - shift]
    } else {
        let r = 2.0 * (-third_p).sqrt();
        let cos_arg = (half_q / (third_p * (-third_p).sqrt())).clamp(-1.0, 1.0);
        let phi = cos_arg.acos() / 3.0;
        let tau = std::f64::consts::TAU / 3.0;
        (0..3)
            .map(|k| r * (phi - tau * k as f64).cos() - shift)
            .collect()
    };
    Some(CubicRoots { roots })
}

/// Largest real root of `x^3 + b x^2 + c x + d`, tolerating a badly
/// conditioned discriminant.
fn largest_cubic_root(b: f64, c: f64, d: f64) -> f64 {
    let coeffs = [d, c, b, 1.0];
    let guess = match cubic(b, c, d) {
        Some(cr) => cr.roots.into_iter().fold(f64::NEG_INFINITY, f64::max),
        None => isolate(&coeffs)
            .into_iter()
            .map(|(r, _)| r)
            .fold(f64::NEG_INFINITY, f64::max),
    };
    polish(&coeffs, guess)
}

/// Ferrari's method on the monic quartic `x^4 + b x^3 + c x^2 + d x + e`.
fn ferrari(b: f64, c: f64, d: f64, e: f64) -> Option<Vec<f64>> {
    let shift = b / 4.0;
    let b2 = b * b;
    let p = c - 3.0 * b2 / 8.0;
    let q = d - b * c / 2.0 + b2 * b / 8.0;
    let r = e - b * d / 4.0 + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0;

    let y_scale = p
        .abs()
        .sqrt()
        .max(r.abs().sqrt().sqrt())
        .max(q.abs().cbrt());
    if y_scale == 0.0 {
        // x^4 after the shift: quadruple root
        return None;
    }

    let m = largest_cubic_root(p, p * p / 4.0 - r, -q * q / 8.0);
    let ys = if m > 1e-12 * y_scale * y_scale {
        let s = (2.0 * m).sqrt();
        let t = q / (2.0 * s);
        let mut ys = quadratic(-s, p / 2.0 + m + t)?;
        ys.extend(quadratic(s, p / 2.0 + m - t)?);
        ys
    } else {
        // biquadratic in y^2
        let zs = quadratic(p, r)?;
        let mut ys = Vec::new();
        for z in zs {
            if z.abs() <= CANCELLATION * y_scale * y_scale {
                return None;
            }
            if z > 0.0 {
                let y = z.sqrt();
                ys.push(-y);
                ys.push(y);
            }
        }
        ys
    };
    Some(ys.into_iter().map(|y| y - shift).collect())
}

/// Real roots with multiplicity by recursion on the derivative.
///
/// Between consecutive critical points the polynomial is monotone, so each
/// such piece holds at most one root, found by bisection on a sign change. A
/// critical point where the polynomial vanishes to rounding is a multiple
/// root whose multiplicity is one more than its multiplicity in the
/// derivative.
fn isolate(c: &[f64]) -> Vec<(f64, usize)> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(-c[0] / c[1], 1)];
    }
    let lead = c[n];
    let bound = 1.0 + c[..n].iter().fold(0.0f64, |m, a| m.max((a / lead).abs()));
    let crit = isolate(&derivative(c));

    let touches = |x: f64| horner(c, x).abs() <= 16.0 * f64::EPSILON * magnitude_scale(c, x);

    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut knots: Vec<(f64, bool)> = vec![(-bound, false)];
    for &(x, mult) in &crit {
        if x <= -bound || x >= bound {
            continue;
        }
        let zero = touches(x);
        if zero {
            out.push((x, mult + 1));
        }
        knots.push((x, zero));
    }
    knots.push((bound, false));

    for w in knots.windows(2) {
        let ((a, a_zero), (b, b_zero)) = (w[0], w[1]);
        if a_zero || b_zero {
            continue;
        }
        let (fa, fb) = (horner(c, a), horner(c, b));
        if fa == 0.0 {
            out.push((a, 1));
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        out.push((bisect(c, a, b, fa), 1));
    }
    if horner(c, bound) == 0.0 {
        out.push((bound, 1));
    }
    out
}

fn bisect(c: &[f64], mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = horner(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    if horner(c, a).abs() <= horner(c, b).abs() {
        a
    } else {
        b
    }
}
