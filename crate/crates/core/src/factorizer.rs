//! Peeling factors off a polynomial with true pairs of its companion matrix.

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::matrix::{balance, companion};
use crate::poly::{divmod, mul, solve_quadratic, Polynomial, QuadOutcome};
use crate::truepair::{true_pair, true_pair_traced, TraceEvent};

/// `constant * prod (t - root) * prod ((t - alpha)^2 + beta^2)`, every `beta > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub constant: f64,
    pub linear_roots: Vec<f64>,
    pub quad_pairs: Vec<(f64, f64)>,
    pub residual: f64,
}

impl Factorization {
    pub fn degree(&self) -> usize {
        self.linear_roots.len() + 2 * self.quad_pairs.len()
    }

    /// Expanded product of the factors.
    pub fn expand(&self) -> Polynomial {
        let mut p = Polynomial::new(vec![self.constant]);
        for &r in &self.linear_roots {
            p = mul(&p, &Polynomial::linear(r));
        }
        for &(al, be) in &self.quad_pairs {
            p = mul(&p, &Polynomial::quadratic_pair(al, be));
        }
        p
    }

    /// Sort roots ascending and pairs ascending by `(alpha, beta)`.
    /// Signed zeros are normalized to `+0.0` first.
    pub fn canonicalize(&mut self) {
        for r in self.linear_roots.iter_mut() {
            *r += 0.0;
        }
        for (a, b) in self.quad_pairs.iter_mut() {
            *a += 0.0;
            *b += 0.0;
        }
        self.linear_roots.sort_by(f64::total_cmp);
        self.quad_pairs
            .sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Factor {
    Linear(f64),
    Quadratic { alpha: f64, beta: f64 },
}

impl Factor {
    pub fn to_poly(&self) -> Polynomial {
        match *self {
            Factor::Linear(r) => Polynomial::linear(r),
            Factor::Quadratic { alpha, beta } => Polynomial::quadratic_pair(alpha, beta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeelPath {
    RemainderZero,
    EigenRemainder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeelResult {
    pub factor: Factor,
    pub quotient: Polynomial,
    pub path: PeelPath,
}

/// Everything `factor` learned on the way.
#[derive(Clone, Debug, Default)]
pub struct FactorLog {
    pub peels: Vec<PeelPath>,
    pub trace: Vec<TraceEvent>,
}

/// Split `p` into one factor and a quotient using a true pair of its companion matrix.
pub fn peel(p: &Polynomial, cfg: &Config) -> Result<PeelResult> {
    peel_inner(p, cfg, None)
}

fn peel_inner(
    p: &Polynomial,
    cfg: &Config,
    mut trace: Option<&mut Vec<TraceEvent>>,
) -> Result<PeelResult> {
    check_peelable(p)?;
    let mut first_err = None;
    for sigma in peel_shifts(p) {
        // a true pair (alpha, beta) of the companion of p(s + sigma) gives (alpha + sigma, beta) for p
        let q = if sigma == 0.0 {
            p.clone()
        } else {
            p.taylor_shift(sigma)
        };
        let (a, _) = balance(&companion(&q)?);
        let tp = match trace.as_deref_mut() {
            Some(events) => true_pair_traced(&a, cfg).map(|(tp, ev)| {
                events.extend(ev);
                tp
            }),
            None => true_pair(&a, cfg),
        };
        let err = match tp {
            Ok(tp) => match peel_with_pair(p, tp.alpha + sigma, tp.beta, cfg) {
                Ok(pr) => return Ok(pr),
                Err(e) => e,
            },
            Err(e @ Error::LimitExceeded { .. }) => return Err(e),
            Err(e) => e,
        };
        first_err.get_or_insert(err);
    }
    Err(first_err.expect("at least one shift is tried"))
}

/// Shifts tried in order when the true-pair recursion fails numerically: none,
/// the root centroid, then points around it at fractions of the root radius.
/// Shifting keeps the sums of roots seen by the first lift but changes the
/// products seen by the second.
fn peel_shifts(p: &Polynomial) -> Vec<f64> {
    let n = p.degree();
    let c = -p.coeffs()[n - 1] / n as f64;
    let centered = p.taylor_shift(c);
    // Fujiwara-type radius of the centered roots
    let rad = (1..=n)
        .map(|k| centered.coeffs()[n - k].abs().powf(1.0 / k as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut out = vec![0.0];
    for s in [
        c,
        c + 0.3 * rad,
        c - 0.45 * rad,
        c + 0.8 * rad,
        c - 1.1 * rad,
    ] {
        if s.is_finite() && !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn check_peelable(p: &Polynomial) -> Result<()> {
    if p.degree() < 3 {
        return Err(Error::contract(format!(
            "peel needs degree >= 3, got {}",
            p.degree()
        )));
    }
    if p.leading() != 1.0 {
        return Err(Error::contract("peel needs a monic polynomial"));
    }
    Ok(())
}

/// Peel using a given true pair `(alpha, beta)` of the companion matrix.
///
/// Divides by `r(t) = (t - alpha)^2 + beta^2`. A vanishing remainder yields the
/// quadratic factor; a remainder `a t - b` with `a != 0` yields the root `b / a`.
pub fn peel_with_pair(p: &Polynomial, alpha: f64, beta: f64, cfg: &Config) -> Result<PeelResult> {
    check_peelable(p)?;
    let beta = beta.abs();
    let scale = p.norm_inf();
    let rem_small = |rem: &Polynomial| rem.norm_inf() <= cfg.tau_rem * scale;

    let r = Polynomial::quadratic_pair(alpha, beta);
    let (q, rem) = divmod(p, &r)?;
    if rem_small(&rem) {
        return Ok(quadratic_peel(p, alpha, beta, q));
    }

    // A complex pair carried in from a lifted recursion may be slightly off; polish it on p.
    if beta > cfg.tau_split {
        if let Some((pa, pb)) = polish_pair(p, alpha, beta) {
            let (q2, rem2) = divmod(p, &Polynomial::quadratic_pair(pa, pb))?;
            if rem_small(&rem2) {
                return Ok(quadratic_peel(p, pa, pb, q2));
            }
        }
    }

    let c = rem.coeffs();
    let lin = c.get(1).copied().unwrap_or(0.0);
    let b = -c[0];
    if lin.abs() <= cfg.tau_rem * scale {
        return Err(Error::numerical(
            "peel: remainder is a nonzero constant",
            rem.norm_inf(),
        ));
    }
    let lambda = newton_root(p, b / lin);
    let res = p.eval(lambda).abs();
    if !(res <= cfg.tau_root * p.eval_scale(lambda)) {
        return Err(Error::numerical("peel: p(b/a) does not vanish", res));
    }
    let (quotient, _) = p.deflate_linear(lambda);
    Ok(PeelResult {
        factor: Factor::Linear(lambda),
        quotient,
        path: PeelPath::EigenRemainder,
    })
}

fn quadratic_peel(p: &Polynomial, alpha: f64, beta: f64, q: Polynomial) -> PeelResult {
    let (alpha, beta, quotient) = match polish_pair(p, alpha, beta) {
        Some((pa, pb)) => {
            let (q2, rem2) =
                divmod(p, &Polynomial::quadratic_pair(pa, pb)).expect("nonzero divisor");
            let (_, rem1) =
                divmod(p, &Polynomial::quadratic_pair(alpha, beta)).expect("nonzero divisor");
            if rem2.norm_inf() < rem1.norm_inf() {
                (pa, pb, q2)
            } else {
                (alpha, beta, q)
            }
        }
        None => (alpha, beta, q),
    };
    PeelResult {
        factor: Factor::Quadratic { alpha, beta },
        quotient,
        path: PeelPath::RemainderZero,
    }
}

/// Guarded Newton iteration; a step is kept only if it reduces `|p|`.
pub(crate) fn newton_root(p: &Polynomial, x0: f64) -> f64 {
    let mut x = x0;
    let mut fx = p.eval(x).abs();
    for _ in 0..50 {
        if fx == 0.0 {
            break;
        }
        let (v, dv) = p.eval_with_derivative(x);
        if dv == 0.0 || !dv.is_finite() {
            break;
        }
        let next = x - v / dv;
        let fn_ = p.eval(next).abs();
        if !(fn_ < fx) {
            break;
        }
        x = next;
        fx = fn_;
    }
    x
}

/// Bairstow iteration for `t^2 - r t - s` dividing `p`.
///
/// Returns the polished `(r, s)`, or `None` if the iteration breaks down.
fn bairstow_polish(p: &Polynomial, mut r: f64, mut s: f64) -> Option<(f64, f64)> {
    let a = p.coeffs();
    let n = p.degree();
    if n < 2 {
        return None;
    }
    if n == 2 {
        return Some((-a[1] / a[2], -a[0] / a[2]));
    }
    let mut b = vec![0.0; n + 1];
    let mut c = vec![0.0; n + 1];
    let rem_norm = |b: &[f64]| b[0].abs().max(b[1].abs());
    let mut last = f64::INFINITY;
    for _ in 0..60 {
        b[n] = a[n];
        b[n - 1] = a[n - 1] + r * b[n];
        for i in (0..n - 1).rev() {
            b[i] = a[i] + r * b[i + 1] + s * b[i + 2];
        }
        c[n] = b[n];
        c[n - 1] = b[n - 1] + r * c[n];
        for i in (1..n - 1).rev() {
            c[i] = b[i] + r * c[i + 1] + s * c[i + 2];
        }
        let rn = rem_norm(&b);
        if rn == 0.0 {
            break;
        }
        let det = c[2] * c[2] - c[3] * c[1];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dr = (-b[1] * c[2] + b[0] * c[3]) / det;
        let ds = (-b[0] * c[2] + b[1] * c[1]) / det;
        if !dr.is_finite() || !ds.is_finite() {
            return None;
        }
        r += dr;
        s += ds;
        let step = dr.abs().max(ds.abs());
        if step <= 1e-15 * (1.0 + r.abs() + s.abs()) {
            break;
        }
        if rn > 1e3 * last {
            return None;
        }
        last = rn;
    }
    (r.is_finite() && s.is_finite()).then_some((r, s))
}

/// Polish `(t - alpha)^2 + beta^2` as a factor of `p`; `None` if the result is
/// no longer a negative-discriminant quadratic.
fn polish_pair(p: &Polynomial, alpha: f64, beta: f64) -> Option<(f64, f64)> {
    let (r, s) = bairstow_polish(p, 2.0 * alpha, -(alpha * alpha + beta * beta))?;
    // t^2 - r t - s = (t - r/2)^2 + (-s - r^2/4)
    let b2 = -s - r * r / 4.0;
    (b2 > 0.0).then(|| (r / 2.0, b2.sqrt()))
}

/// Factor `p` into linear and negative-discriminant quadratic factors.
pub fn factor(p: &Polynomial, cfg: &Config) -> Result<Factorization> {
    factor_logged(p, cfg).map(|(f, _)| f)
}

/// [`factor`], also returning the peel paths taken and, when `cfg.trace` is
/// set, the true-pair trace of every peel.
pub fn factor_logged(p: &Polynomial, cfg: &Config) -> Result<(Factorization, FactorLog)> {
    if p.is_zero() {
        return Err(Error::contract("cannot factor the zero polynomial"));
    }
    if p.degree() == 0 {
        return Err(Error::contract("cannot factor a constant"));
    }
    if p.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::contract("non-finite coefficient"));
    }
    let constant = p.leading();
    let mut cur = p.monic();
    let mut log = FactorLog::default();
    let mut roots = Vec::new();
    let mut pairs = Vec::new();
    let push = |f: Factor, roots: &mut Vec<f64>, pairs: &mut Vec<(f64, f64)>| match f {
        Factor::Linear(r) => roots.push(r),
        Factor::Quadratic { alpha, beta } if beta <= cfg.tau_split => {
            roots.push(alpha);
            roots.push(alpha);
        }
        Factor::Quadratic { alpha, beta } => pairs.push((alpha, beta)),
    };
    while cur.degree() >= 3 {
        let trace = cfg.trace.then_some(&mut log.trace);
        let pr = peel_inner(&cur, cfg, trace)?;
        log.peels.push(pr.path);
        push(pr.factor, &mut roots, &mut pairs);
        cur = pr.quotient.monic();
    }
    match cur.degree() {
        2 => match solve_quadratic(&cur)? {
            QuadOutcome::Real(r1, r2) => {
                roots.push(r1);
                roots.push(r2);
            }
            QuadOutcome::Pair { alpha, beta } => {
                push(Factor::Quadratic { alpha, beta }, &mut roots, &mut pairs)
            }
        },
        1 => roots.push(-cur.coeffs()[0]),
        _ => {}
    }
    let mut f = Factorization {
        constant,
        linear_roots: roots,
        quad_pairs: pairs,
        residual: 0.0,
    };
    f.canonicalize();
    f.residual = verify(&f, p).relative_residual;
    Ok((f, log))
}

/// Polish every factor against `p`; never returns a worse residual than the input.
pub fn refine(f: &Factorization, p: &Polynomial, _cfg: &Config) -> Factorization {
    let monic = if p.is_zero() {
        return f.clone();
    } else {
        p.monic()
    };
    let mut out = f.clone();
    for r in out.linear_roots.iter_mut() {
        let polished = newton_root(&monic, *r);
        if monic.eval(polished).abs() <= monic.eval(*r).abs() {
            *r = polished;
        }
    }
    for pair in out.quad_pairs.iter_mut() {
        if let Some((al, be)) = polish_pair(&monic, pair.0, pair.1) {
            let before = divmod(&monic, &Polynomial::quadratic_pair(pair.0, pair.1))
                .map(|(_, r)| r.norm_inf())
                .unwrap_or(f64::INFINITY);
            let after = divmod(&monic, &Polynomial::quadratic_pair(al, be))
                .map(|(_, r)| r.norm_inf())
                .unwrap_or(f64::INFINITY);
            if after <= before {
                *pair = (al, be);
            }
        }
    }
    out.canonicalize();
    out.residual = verify(&out, p).relative_residual;
    if out.residual <= f.residual || !f.residual.is_finite() {
        out
    } else {
        f.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub max_coeff_diff: f64,
    pub relative_residual: f64,
    pub expected_degree: usize,
    pub factor_degree: usize,
    pub degree_ok: bool,
}

/// Expand the factorization and compare it with `p` coefficient by coefficient.
pub fn verify(f: &Factorization, p: &Polynomial) -> VerifyReport {
    let e = f.expand();
    let diff = e.sub(p).norm_inf();
    let norm = p.norm_inf();
    VerifyReport {
        max_coeff_diff: diff,
        relative_residual: if norm > 0.0 { diff / norm } else { diff },
        expected_degree: p.degree(),
        factor_degree: f.degree(),
        degree_ok: f.degree() == p.degree(),
    }
}
