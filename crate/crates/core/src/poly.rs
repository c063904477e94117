//! Dense real polynomials in ascending coefficient order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real polynomial, `coeffs[i]` multiplies `t^i`.
///
/// Exact trailing zeros are trimmed on construction; near-zero ones are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![1.0] }
    }

    /// `t - root`
    pub fn linear(root: f64) -> Self {
        Polynomial::new(vec![-root, 1.0])
    }

    /// `(t - alpha)^2 + beta^2`
    pub fn quadratic_pair(alpha: f64, beta: f64) -> Self {
        Polynomial::new(vec![alpha * alpha + beta * beta, -2.0 * alpha, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * t + p;
            p = p * t + c;
        }
        (p, dp)
    }

    /// `sum |c_i| |t|^i`, the natural magnitude of rounding in `eval(t)`.
    pub fn eval_scale(&self, t: f64) -> f64 {
        let at = t.abs();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * at + c.abs())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Divide through by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        let lc = self.leading();
        let mut coeffs: Vec<f64> = self.coeffs.iter().map(|c| c / lc).collect();
        let n = coeffs.len();
        coeffs[n - 1] = 1.0;
        Polynomial { coeffs }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        mul(self, other)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        Polynomial::new(
            (0..n)
                .map(|i| get(&self.coeffs, i) - get(&other.coeffs, i))
                .collect(),
        )
    }

    /// Coefficients of `p(s + shift)` as a polynomial in `s`.
    pub fn taylor_shift(&self, shift: f64) -> Polynomial {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                c[j] += shift * c[j + 1];
            }
        }
        Polynomial::new(c)
    }

    /// Quotient and remainder of division by `t - root`.
    pub fn deflate_linear(&self, root: f64) -> (Polynomial, f64) {
        let n = self.coeffs.len();
        if n == 1 {
            return (Polynomial::zero(), self.coeffs[0]);
        }
        let mut q = vec![0.0; n - 1];
        let mut acc = 0.0;
        for i in (0..n).rev() {
            acc = acc * root + self.coeffs[i];
            if i > 0 {
                q[i - 1] = acc;
            }
        }
        (Polynomial::new(q), acc)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::textio::parse::format_poly(self, 't'))
    }
}

/// Coefficient convolution.
pub fn mul(p: &Polynomial, q: &Polynomial) -> Polynomial {
    let mut out = vec![0.0; p.coeffs.len() + q.coeffs.len() - 1];
    for (i, &a) in p.coeffs.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in q.coeffs.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    Polynomial::new(out)
}

/// Long division `p = q * d + rem` with `deg rem < deg d`.
pub fn divmod(p: &Polynomial, d: &Polynomial) -> Result<(Polynomial, Polynomial)> {
    if d.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let dn = d.degree();
    let lead = d.leading();
    if p.degree() < dn {
        return Ok((Polynomial::zero(), p.clone()));
    }
    let mut rem = p.coeffs.clone();
    let mut q = vec![0.0; p.degree() - dn + 1];
    for k in (0..q.len()).rev() {
        let c = rem[k + dn] / lead;
        q[k] = c;
        rem[k + dn] = 0.0;
        for j in 0..dn {
            rem[k + j] -= c * d.coeffs[j];
        }
    }
    rem.truncate(dn.max(1));
    Ok((Polynomial::new(q), Polynomial::new(rem)))
}

/// Bisection on a sign change of `f` over `[lo, hi]`.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
/// Stops once the bracket is narrower than `width` or after `max_iter` halvings.
/// Returns the final bracket.
pub(crate) fn bisect<F>(f: F, mut lo: f64, mut hi: f64, width: f64, max_iter: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let flo = f(lo);
    if flo == 0.0 {
        return (lo, lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return (hi, hi);
    }
    let neg_lo = flo < 0.0;
    for _ in 0..max_iter {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return (mid, mid);
        }
        if (fm < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Cauchy-type bound `1 + max_{i<n} |a_i / a_n|` on the moduli of the zeros.
pub fn cauchy_bound(p: &Polynomial) -> f64 {
    let n = p.degree();
    let lead = p.leading();
    1.0 + p.coeffs[..n]
        .iter()
        .fold(0.0_f64, |m, c| m.max((c / lead).abs()))
}

/// Real root of `p` inside `[lo, hi]` where `p` changes sign, bisected and then
/// polished by at most five Newton steps that stay inside `[lo, hi]`.
pub(crate) fn bracketed_root(p: &Polynomial, lo: f64, hi: f64) -> f64 {
    let bound = lo.abs().max(hi.abs());
    let (a, b) = bisect(|t| p.eval(t), lo, hi, 1e-14 * bound.max(1.0), 200);
    let mut x = 0.5 * (a + b);
    let mut fx = p.eval(x).abs();
    for _ in 0..5 {
        if fx == 0.0 {
            break;
        }
        let (v, dv) = p.eval_with_derivative(x);
        if dv == 0.0 || !dv.is_finite() {
            break;
        }
        let next = x - v / dv;
        if !(lo..=hi).contains(&next) {
            break;
        }
        let fn_ = p.eval(next).abs();
        if fn_ >= fx {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

/// A real zero of an odd-degree polynomial.
pub fn odd_real_root(p: &Polynomial, tol: f64) -> Result<f64> {
    let n = p.degree();
    if n % 2 == 0 || p.leading() == 0.0 {
        return Err(Error::contract(format!(
            "odd_real_root needs odd degree, got degree {n}"
        )));
    }
    if p.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::contract("non-finite coefficient"));
    }
    let b = cauchy_bound(p);
    let root = bracketed_root(p, -b, b);
    let scale = 1.0 + p.norm_inf();
    let residual = p.eval(root).abs();
    if residual > tol * scale && residual > tol * p.eval_scale(root) {
        return Err(Error::numerical("odd_real_root", residual));
    }
    Ok(root)
}

/// Outcome of solving a real quadratic without complex arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadOutcome {
    /// Two real roots with `r1 <= r2`.
    Real(f64, f64),
    /// The quadratic is a positive multiple of `(t - alpha)^2 + beta^2`, `beta > 0`.
    Pair { alpha: f64, beta: f64 },
}

pub fn solve_quadratic(p: &Polynomial) -> Result<QuadOutcome> {
    if p.degree() != 2 {
        return Err(Error::contract(format!(
            "solve_quadratic needs degree 2, got {}",
            p.degree()
        )));
    }
    let (c0, c1, c2) = (p.coeffs[0], p.coeffs[1], p.coeffs[2]);
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc >= 0.0 {
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        let (r1, r2) = if q == 0.0 {
            (0.0, 0.0)
        } else {
            (q / c2, c0 / q)
        };
        Ok(QuadOutcome::Real(r1.min(r2), r1.max(r2)))
    } else {
        let alpha = -c1 / (2.0 * c2);
        let beta = (-disc).sqrt() / (2.0 * c2.abs());
        Ok(QuadOutcome::Pair { alpha, beta })
    }
}

/// `(t^2 - a t + b)(t^2 - c t + d)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticSplit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl QuarticSplit {
    pub fn first(&self) -> Polynomial {
        Polynomial::new(vec![self.b, -self.a, 1.0])
    }

    pub fn second(&self) -> Polynomial {
        Polynomial::new(vec![self.d, -self.c, 1.0])
    }

    pub fn expand(&self) -> Polynomial {
        mul(&self.first(), &self.second())
    }
}

/// Split a quartic into two real quadratics by Descartes' method.
///
/// The quartic is depressed to `s^4 + P s^2 + Q s + R`, a nonnegative root
/// `z = u^2` of the resolvent `z^3 + 2P z^2 + (P^2 - 4R) z - Q^2` gives
/// `(s^2 + u s + v)(s^2 - u s + w)`, and the shift is undone.
pub fn quartic_split(p: &Polynomial) -> Result<QuarticSplit> {
    if p.degree() != 4 {
        return Err(Error::contract(format!(
            "quartic_split needs degree 4, got {}",
            p.degree()
        )));
    }
    let p = if p.leading() == 1.0 {
        p.clone()
    } else {
        p.monic()
    };
    let h = p.coeffs[3] / 4.0;
    let dep = p.taylor_shift(-h);
    let dc = dep.coeffs();
    let get = |i: usize| dc.get(i).copied().unwrap_or(0.0);
    let (pp, qq, rr) = (get(2), get(1), get(0));
    let scale = 1.0_f64.max(pp.abs()).max(rr.abs()).max(pp * pp);

    let (u, v, w) = if qq.abs() <= 1e-12 * scale {
        let disc = pp * pp - 4.0 * rr;
        if disc >= 0.0 {
            // s^4 + P s^2 + R = (s^2 - r1)(s^2 - r2)
            let sq = disc.sqrt();
            let big = -0.5 * (pp + pp.signum() * sq);
            let (r1, r2) = if big == 0.0 {
                (0.0, 0.0)
            } else {
                let other = rr / big;
                (big.max(other), big.min(other))
            };
            (0.0, -r1, -r2)
        } else {
            let sr = rr.sqrt();
            let z = -pp + 2.0 * sr;
            (z.sqrt(), sr, sr)
        }
    } else {
        let z = resolvent_root(pp, qq, rr)?;
        let u = z.sqrt();
        let v = 0.5 * (pp + z - qq / u);
        let w = 0.5 * (pp + z + qq / u);
        (u, v, w)
    };

    // (s^2 + u s + v) with s = t + h
    let a = -(2.0 * h + u);
    let b = h * h + u * h + v;
    let c = -(2.0 * h - u);
    let d = h * h - u * h + w;
    Ok(QuarticSplit { a, b, c, d })
}

/// Largest nonnegative root of the Descartes resolvent cubic for `Q != 0`.
fn resolvent_root(pp: f64, qq: f64, rr: f64) -> Result<f64> {
    let cubic = Polynomial::new(vec![-qq * qq, pp * pp - 4.0 * rr, 2.0 * pp, 1.0]);
    let hi = cauchy_bound(&cubic);
    if !(cubic.eval(0.0) < 0.0 && cubic.eval(hi) > 0.0) {
        return Err(Error::BracketFailure);
    }
    let z0 = bracketed_root(&cubic, 0.0, hi);
    // Other real roots come from the deflated quadratic; the largest one keeps u away from 0.
    let (quot, _) = cubic.deflate_linear(z0);
    let mut best = z0;
    if let Ok(QuadOutcome::Real(_, r2)) = solve_quadratic(&quot) {
        if r2 > best {
            best = polish_newton(&cubic, r2, 0.0, hi);
        }
    }
    if best <= 0.0 {
        return Err(Error::BracketFailure);
    }
    Ok(best)
}

fn polish_newton(p: &Polynomial, mut x: f64, lo: f64, hi: f64) -> f64 {
    let mut fx = p.eval(x).abs();
    for _ in 0..8 {
        let (v, dv) = p.eval_with_derivative(x);
        if v == 0.0 || dv == 0.0 {
            break;
        }
        let next = x - v / dv;
        if !(lo..=hi).contains(&next) {
            break;
        }
        let fn_ = p.eval(next).abs();
        if fn_ >= fx {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly(&[1.0, 0.0, 1.0]).eval(2.0), 5.0);
        assert_eq!(poly(&[-1.0, 0.0, 0.0, 1.0]).eval(1.0), 0.0);
        assert_eq!(poly(&[4.0, 0.0, 5.0, 0.0, 1.0]).eval(1.0), 10.0);
    }

    #[test]
    fn mul_examples() {
        let p = mul(&poly(&[-1.0, 1.0]), &poly(&[1.0, 0.0, 1.0]));
        assert_eq!(p.coeffs(), &[-1.0, 1.0, -1.0, 1.0]);
        let q = poly(&[3.0, -2.0, 7.0]);
        assert_eq!(mul(&q, &Polynomial::one()), q);
        let r = mul(&poly(&[1.0, 0.0, 1.0]), &poly(&[4.0, 0.0, 1.0]));
        assert_eq!(r.coeffs(), &[4.0, 0.0, 5.0, 0.0, 1.0]);
    }

    #[test]
    fn divmod_examples() {
        let p = poly(&[-1.0, 1.0, -1.0, 1.0]);
        let (q, r) = divmod(&p, &poly(&[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(q.coeffs(), &[-1.0, 1.0]);
        assert!(r.is_zero());

        let (q, r) = divmod(&p, &poly(&[1.0, -2.0, 1.0])).unwrap();
        assert_eq!(q.coeffs(), &[1.0, 1.0]);
        assert_eq!(r.coeffs(), &[-2.0, 2.0]);
        // (t+1)(t^2-2t+1) + 2t - 2 expands back to p
        let back = mul(&q, &poly(&[1.0, -2.0, 1.0])).sub(&r.scale(-1.0));
        assert_eq!(back, p);

        let (q, r) = divmod(&p, &Polynomial::one()).unwrap();
        assert_eq!(q, p);
        assert!(r.is_zero());
    }

    #[test]
    fn divmod_by_zero() {
        assert!(matches!(
            divmod(&poly(&[1.0, 1.0]), &Polynomial::zero()),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn odd_root_examples() {
        assert_eq!(
            odd_real_root(&poly(&[-1.0, 0.0, 0.0, 1.0]), 1e-12).unwrap(),
            1.0
        );
        let r = odd_real_root(&poly(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 1e-12).unwrap();
        assert!(r.abs() < 1e-2 && r.powi(5).abs() <= 1e-12);

        // independent oracle: plain bisection on x^3 - 2 over [1, 2]
        let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid * mid * mid - 2.0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = odd_real_root(&poly(&[-2.0, 0.0, 0.0, 1.0]), 1e-12).unwrap();
        assert!((r - lo).abs() < 1e-9);
        assert!((r - 1.259921).abs() < 1e-6);
    }

    #[test]
    fn odd_root_rejects_even_degree() {
        assert!(matches!(
            odd_real_root(&poly(&[1.0, 0.0, 1.0]), 1e-12),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(
            solve_quadratic(&poly(&[2.0, -3.0, 1.0])).unwrap(),
            QuadOutcome::Real(1.0, 2.0)
        );
        assert_eq!(
            solve_quadratic(&poly(&[1.0, 0.0, 1.0])).unwrap(),
            QuadOutcome::Pair {
                alpha: 0.0,
                beta: 1.0
            }
        );
        assert_eq!(
            solve_quadratic(&poly(&[5.0, -2.0, 1.0])).unwrap(),
            QuadOutcome::Pair {
                alpha: 1.0,
                beta: 2.0
            }
        );
        // negative leading coefficient still gives beta > 0
        assert_eq!(
            solve_quadratic(&poly(&[-5.0, 2.0, -1.0])).unwrap(),
            QuadOutcome::Pair {
                alpha: 1.0,
                beta: 2.0
            }
        );
        assert!(solve_quadratic(&poly(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn quartic_examples() {
        let s = quartic_split(&poly(&[4.0, 0.0, 5.0, 0.0, 1.0])).unwrap();
        assert_eq!((s.a, s.b, s.c, s.d), (0.0, 1.0, 0.0, 4.0));

        let s = quartic_split(&poly(&[1.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
        let r2 = std::f64::consts::SQRT_2;
        assert!((s.a + r2).abs() < 1e-12 && (s.b - 1.0).abs() < 1e-12);
        assert!((s.c - r2).abs() < 1e-12 && (s.d - 1.0).abs() < 1e-12);
        let e = s.expand();
        for (x, y) in e.coeffs().iter().zip([1.0, 0.0, 0.0, 0.0, 1.0]) {
            assert!((x - y).abs() < 1e-12);
        }

        let s = quartic_split(&poly(&[0.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!((s.a, s.b, s.c, s.d), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn quartic_with_odd_term() {
        // (t^2 - 3t + 5)(t^2 + t - 2)
        let p = mul(&poly(&[5.0, -3.0, 1.0]), &poly(&[-2.0, 1.0, 1.0]));
        let s = quartic_split(&p).unwrap();
        let e = s.expand();
        for (x, y) in e.coeffs().iter().zip(p.coeffs()) {
            assert!((x - y).abs() < 1e-10 * p.norm_inf());
        }
    }

    #[test]
    fn quartic_rejects_wrong_degree() {
        assert!(quartic_split(&poly(&[1.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let p = poly(&[3.0, -1.0, 0.5, 2.0]);
        let q = p.taylor_shift(1.5);
        for s in [-2.0, 0.0, 0.3, 4.0] {
            assert!((q.eval(s) - p.eval(s + 1.5)).abs() < 1e-12 * p.eval_scale(s + 1.5));
        }
    }

    #[test]
    fn deflate_linear_exact() {
        let p = poly(&[-1.0, 1.0, -1.0, 1.0]);
        let (q, r) = p.deflate_linear(1.0);
        assert_eq!(q.coeffs(), &[1.0, 0.0, 1.0]);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn exact_zeros_trimmed_only() {
        assert_eq!(Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]).degree(), 1);
        assert_eq!(Polynomial::new(vec![1.0, 1e-300]).degree(), 1);
        assert!(Polynomial::new(vec![]).is_zero());
    }
}
