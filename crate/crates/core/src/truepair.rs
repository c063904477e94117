//! True pairs of real operators.
//!
//! A true pair of `A` is `(alpha, beta)` with a nonzero `v` such that
//! `((A - alpha I)^2 + beta^2 I) v = 0`. Odd dimensions are handled by a real
//! eigenvalue. Even dimensions are lifted to the symmetric matrices, where
//! `L1(X) = AX + XA^t` and `L2(X) = AXA^t` commute and act on a space with one
//! fewer factor of two in its dimension. A common true pair of `L1, L2` is
//! found by restricting to null or range spaces of `(L1 - alpha)^2 + beta^2`
//! until the dimension parity allows a direct answer, and a true pair of `A`
//! is then read off from the common vector `B`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{DimChain, Error, Result};
use crate::matrix::{
    apply_l1, apply_l2, dot, inverse_iteration, lift_operators, norm2, normalize_canonical,
    null_basis, range_basis, real_eigen_odd, restrict, Matrix, SymBasis,
};
use crate::poly::{quartic_split, Polynomial};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruePair {
    pub alpha: f64,
    pub beta: f64,
    /// Unit vector, first non-negligible entry positive.
    pub vector: Vec<f64>,
    /// `|((A - alpha I)^2 + beta^2 I) v|_2`
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonTruePair {
    pub s_pair: (f64, f64),
    pub t_pair: (f64, f64),
    pub vector: Vec<f64>,
    pub residuals: (f64, f64),
}

/// Exponent of the largest power of two dividing a dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Evenness(pub u32);

pub fn evenness(n: usize) -> Result<Evenness> {
    if n == 0 {
        return Err(Error::contract("evenness of dimension 0"));
    }
    Ok(Evenness(n.trailing_zeros()))
}

/// Dimensions reached by lifting `n` until it is odd: `8 -> 36 -> 666 -> 222111`.
pub fn lift_chain(n: usize) -> Vec<usize> {
    let mut chain = vec![n];
    let mut d = n;
    while d > 0 && d % 2 == 0 {
        d = d * (d + 1) / 2;
        chain.push(d);
    }
    chain
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceKind {
    #[serde(rename = "base_odd")]
    BaseOdd,
    #[serde(rename = "lift")]
    Lift,
    #[serde(rename = "subspace_null")]
    SubspaceNull,
    #[serde(rename = "subspace_range")]
    SubspaceRange,
    #[serde(rename = "total_space")]
    TotalSpace,
    #[serde(rename = "case1")]
    Case1,
    #[serde(rename = "case1A")]
    Case1A,
    #[serde(rename = "case1B")]
    Case1B,
    #[serde(rename = "case2")]
    Case2,
    #[serde(rename = "disc_real")]
    DiscReal,
    #[serde(rename = "disc_complex")]
    DiscComplex,
}

/// One step of the recursion. `detail["depth"]` is the recursion depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: TraceKind,
    pub dim: usize,
    pub detail: BTreeMap<String, f64>,
}

impl TraceEvent {
    pub fn depth(&self) -> usize {
        self.detail.get("depth").copied().unwrap_or(0.0) as usize
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.detail.get(key).copied()
    }
}

/// Check the recursion shape: every lift is followed at the next depth by
/// work on dimension `n(n+1)/2`, and every subspace step strictly shrinks.
pub fn check_trace_shape(events: &[TraceEvent]) -> std::result::Result<(), String> {
    for (i, ev) in events.iter().enumerate() {
        match ev.kind {
            TraceKind::Lift => {
                let lifted = ev.dim * (ev.dim + 1) / 2;
                if ev.get("lifted_dim") != Some(lifted as f64) {
                    return Err(format!(
                        "event {i}: lift of {} does not record {lifted}",
                        ev.dim
                    ));
                }
                if let Some(next) = events.get(i + 1) {
                    if next.depth() == ev.depth() + 1 && next.dim != lifted {
                        return Err(format!(
                            "event {i}: child dimension {} != {lifted}",
                            next.dim
                        ));
                    }
                }
            }
            TraceKind::SubspaceNull | TraceKind::SubspaceRange => {
                let sub = ev.get("sub_dim").unwrap_or(f64::NAN);
                if !(sub < ev.dim as f64 && sub >= 1.0) {
                    return Err(format!(
                        "event {i}: subspace dim {sub} not below {}",
                        ev.dim
                    ));
                }
                if let Some(next) = events.get(i + 1) {
                    if next.depth() == ev.depth() + 1 && next.dim as f64 != sub {
                        return Err(format!("event {i}: child dimension {} != {sub}", next.dim));
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn pair_residual(a: &Matrix, alpha: f64, beta: f64, v: &[f64]) -> f64 {
    norm2(&a.true_pair_operator(alpha, beta).mul_vec(v))
}

fn pair_bound(a: &Matrix, tol: f64) -> f64 {
    let s = 1.0 + a.norm_inf();
    tol * s * s
}

struct Solver<'a> {
    cfg: &'a Config,
    events: Option<Vec<TraceEvent>>,
    depth: usize,
}

impl<'a> Solver<'a> {
    fn new(cfg: &'a Config, record: bool) -> Self {
        Solver {
            cfg,
            events: record.then(Vec::new),
            depth: 0,
        }
    }

    fn emit(&mut self, kind: TraceKind, dim: usize, detail: &[(&str, f64)]) {
        if let Some(events) = self.events.as_mut() {
            let mut map: BTreeMap<String, f64> =
                detail.iter().map(|(k, v)| (k.to_string(), *v)).collect();
            map.insert("depth".into(), self.depth as f64);
            events.push(TraceEvent {
                kind,
                dim,
                detail: map,
            });
        }
    }

    /// Residual tolerance for accepting a pair. Inner levels only steer the
    /// search, and lifted operators are far less well conditioned than the
    /// matrix they came from, so they get the looser subspace tolerance.
    fn accept_tol(&self) -> f64 {
        if self.depth == 0 {
            self.cfg.tol
        } else {
            self.cfg.tol.max(self.cfg.subspace_tol)
        }
    }

    fn check_chain(&self, n: usize) -> Result<()> {
        let chain = lift_chain(n);
        if chain[1..].iter().any(|&d| d > self.cfg.max_lift_dim) {
            return Err(Error::LimitExceeded {
                chain: DimChain(chain),
                max: self.cfg.max_lift_dim,
            });
        }
        Ok(())
    }

    fn true_pair(&mut self, a: &Matrix) -> Result<TruePair> {
        let n = a.rows();
        if n == 0 || !a.is_square() {
            return Err(Error::contract("true_pair needs a nonempty square matrix"));
        }
        if n % 2 == 1 {
            let (lambda, v) = real_eigen_odd(a, self.cfg.tol, self.cfg.pivot_tol)?;
            self.emit(TraceKind::BaseOdd, n, &[("lambda", lambda)]);
            return self.finish(a, lambda, 0.0, v, "base case");
        }
        self.check_chain(n)?;
        let lifted = n * (n + 1) / 2;
        self.emit(TraceKind::Lift, n, &[("lifted_dim", lifted as f64)]);
        let (m1, m2) = lift_operators(a);
        self.depth += 1;
        let ctp = self.common_true_pair(&m1, &m2);
        self.depth -= 1;
        self.extract(a, &ctp?, Some((&m1, &m2)))
    }

    fn finish(
        &self,
        a: &Matrix,
        alpha: f64,
        beta: f64,
        mut v: Vec<f64>,
        ctx: &str,
    ) -> Result<TruePair> {
        if !normalize_canonical(&mut v) {
            return Err(Error::numerical(
                format!("true_pair {ctx}: zero vector"),
                f64::NAN,
            ));
        }
        let beta = beta.abs();
        let residual = pair_residual(a, alpha, beta, &v);
        if !(residual <= pair_bound(a, self.accept_tol())) {
            return Err(Error::numerical(format!("true_pair {ctx}"), residual));
        }
        Ok(TruePair {
            alpha,
            beta,
            vector: v,
            residual,
        })
    }

    fn common_true_pair(&mut self, s: &Matrix, t: &Matrix) -> Result<CommonTruePair> {
        let n = s.rows();
        if n == 0 || !s.is_square() || t.rows() != n || !t.is_square() {
            return Err(Error::contract(
                "common_true_pair needs two square matrices of equal size",
            ));
        }
        let (ns, nt) = (s.norm_inf(), t.norm_inf());
        let defect = s.matmul(t).sub(&t.matmul(s)).norm_inf();
        let bound = self.cfg.subspace_tol * (1.0 + ns) * (1.0 + nt);
        if defect > bound {
            return Err(Error::NotCommuting { defect, bound });
        }
        if n == 1 {
            self.emit(
                TraceKind::BaseOdd,
                1,
                &[("sigma", s[(0, 0)]), ("tau", t[(0, 0)])],
            );
            return Ok(CommonTruePair {
                s_pair: (s[(0, 0)], 0.0),
                t_pair: (t[(0, 0)], 0.0),
                vector: vec![1.0],
                residuals: (0.0, 0.0),
            });
        }
        let k = evenness(n)?.0 + 1;
        let block = 1usize << k;

        let sp = self.true_pair(s)?;
        let (alpha, beta) = (sp.alpha, sp.beta);
        let op = s.true_pair_operator(alpha, beta);
        // For a real pair, ker(S - alpha) is invariant too and much better
        // conditioned than the kernel of its square.
        let mut ops = Vec::with_capacity(2);
        if beta == 0.0 {
            ops.push(s.shift(alpha));
        }
        ops.push(op);

        let base = self.cfg.pivot_tol;
        let ladder = [
            base,
            base * 10.0,
            base * 100.0,
            base * 1e-2,
            base * 1e3,
            base * 1e-4,
        ];
        let mut last_err = None;
        for op in &ops {
            for &ptol in &ladder {
                let kernel = null_basis(op, ptol);
                if kernel.is_empty() {
                    continue;
                }
                if kernel.dim() == n {
                    self.emit(
                        TraceKind::TotalSpace,
                        n,
                        &[("alpha", alpha), ("beta", beta)],
                    );
                    self.depth += 1;
                    let tp = self.true_pair(t);
                    self.depth -= 1;
                    let tp = tp?;
                    return self.finish_common(s, t, (alpha, beta), (tp.alpha, tp.beta), tp.vector);
                }
                let (sub, kind) = if kernel.dim() % block != 0 {
                    (kernel, TraceKind::SubspaceNull)
                } else {
                    (range_basis(op, ptol), TraceKind::SubspaceRange)
                };
                if sub.is_empty() || sub.dim() >= n {
                    continue;
                }
                // a rank decision is only accepted if both operators leave the subspace invariant
                let tol = self.cfg.subspace_tol;
                let restricted =
                    restrict(s, &sub, tol).and_then(|rs| Ok((rs, restrict(t, &sub, tol)?)));
                let (rs, rt) = match restricted {
                    Ok(pair) => pair,
                    Err(e) => {
                        last_err = Some(e);
                        continue;
                    }
                };
                self.emit(
                    kind,
                    n,
                    &[
                        ("sub_dim", sub.dim() as f64),
                        ("alpha", alpha),
                        ("beta", beta),
                    ],
                );
                self.depth += 1;
                let inner = self.common_true_pair(&rs, &rt);
                self.depth -= 1;
                let inner = inner?;
                return self.finish_common(
                    s,
                    t,
                    inner.s_pair,
                    inner.t_pair,
                    sub.lift(&inner.vector),
                );
            }
        }
        Err(last_err
            .unwrap_or_else(|| Error::numerical("common_true_pair: empty kernel", sp.residual)))
    }

    fn finish_common(
        &self,
        s: &Matrix,
        t: &Matrix,
        s_pair: (f64, f64),
        t_pair: (f64, f64),
        mut v: Vec<f64>,
    ) -> Result<CommonTruePair> {
        if !normalize_canonical(&mut v) {
            return Err(Error::numerical("common_true_pair: zero vector", f64::NAN));
        }
        let tol = self.accept_tol();
        let settle = |m: &Matrix, pair: (f64, f64)| {
            let r = pair_residual(m, pair.0, pair.1, &v);
            if r == 0.0 {
                return (pair, r);
            }
            let mut best = (pair, r);
            for p2 in fitted_pairs(m, &v) {
                let r2 = pair_residual(m, p2.0, p2.1, &v);
                if r2 < best.1 {
                    best = (p2, r2);
                }
            }
            best
        };
        let (s_pair, rs) = settle(s, s_pair);
        let (t_pair, rt) = settle(t, t_pair);
        if !(rs <= pair_bound(s, tol)) {
            return Err(Error::numerical("common_true_pair: first operator", rs));
        }
        if !(rt <= pair_bound(t, tol)) {
            return Err(Error::numerical("common_true_pair: second operator", rt));
        }
        Ok(CommonTruePair {
            s_pair: (s_pair.0, s_pair.1.abs()),
            t_pair: (t_pair.0, t_pair.1.abs()),
            vector: v,
            residuals: (rs, rt),
        })
    }

    /// Read a true pair of `a` off a common true pair of its lifted operators.
    fn extract(
        &mut self,
        a: &Matrix,
        ctp: &CommonTruePair,
        lifted: Option<(&Matrix, &Matrix)>,
    ) -> Result<TruePair> {
        let n = a.rows();
        let sb = SymBasis::new(n);
        if ctp.vector.len() != sb.dim() {
            return Err(Error::contract(format!(
                "extract_from_common: vector of length {} for a {n}x{n} matrix",
                ctp.vector.len()
            )));
        }
        let owned;
        let (m1, m2) = match lifted {
            Some(pair) => pair,
            None => {
                owned = lift_operators(a);
                (&owned.0, &owned.1)
            }
        };
        let b = sb.unvech(&ctp.vector);
        if b.max_abs() == 0.0 {
            return Err(Error::contract("extract_from_common: zero matrix B"));
        }
        let (alpha, beta) = ctp.s_pair;
        let (gamma, delta) = ctp.t_pair;

        let l1b = apply_l1(a, &b).sub(&b.scale(alpha));
        let l2b = apply_l2(a, &b).sub(&b.scale(gamma));
        let d = l1b.scale(delta).sub(&l2b.scale(beta));
        let d_norm = d.norm_inf();
        let tau_case = self.cfg.tol
            * b.norm_inf()
            * (delta.abs() * (m1.norm_inf() + alpha.abs())
                + beta.abs() * (m2.norm_inf() + gamma.abs())
                + 1.0);

        let first_case2 = d_norm > tau_case;
        let mut cases = vec![first_case2];
        if d_norm > 0.0 {
            cases.push(!first_case2);
        }

        let bound = pair_bound(a, self.accept_tol());
        let mut failed: Vec<(f64, f64, Vec<f64>, f64)> = Vec::new();
        for case2 in cases {
            let (beta_eff, bm) = if case2 {
                (-beta, d.clone())
            } else {
                (beta, b.clone())
            };
            let kind = if case2 {
                TraceKind::Case2
            } else {
                TraceKind::Case1
            };
            // (-t^2 + alpha t - gamma)^2 + (delta - beta t)^2
            let quartic = Polynomial::new(vec![
                gamma * gamma + delta * delta,
                -(2.0 * alpha * gamma + 2.0 * beta_eff * delta),
                alpha * alpha + 2.0 * gamma + beta_eff * beta_eff,
                -2.0 * alpha,
                1.0,
            ]);
            let split = quartic_split(&quartic)?;
            let q = quartic.coeffs();
            self.emit(
                kind,
                n,
                &[
                    ("d_norm", d_norm),
                    ("tau_case", tau_case),
                    ("q0", q[0]),
                    ("q1", q[1]),
                    ("q2", q[2]),
                    ("q3", q[3]),
                    ("q4", q[4]),
                    ("a", split.a),
                    ("b", split.b),
                    ("c", split.c),
                    ("d", split.d),
                ],
            );

            let a2 = a.matmul(a);
            let quad_op = |c: f64, dd: f64| a2.sub(&a.scale(c)).shift(-dd);
            let cm = quad_op(split.c, split.d).matmul(&bm);
            let c_norm = cm.norm_inf();
            let an = a.norm_inf();
            let tau_c =
                self.cfg.tol * bm.norm_inf() * (an * an + split.c.abs() * an + split.d.abs() + 1.0);
            let case_1a = c_norm <= tau_c;

            // (label, quadratic coefficients (c', d'), matrix whose columns are tried)
            let mut subcases: Vec<(TraceKind, f64, f64, Matrix)> = Vec::new();
            if case_1a {
                subcases.push((TraceKind::Case1A, split.c, split.d, bm.clone()));
                if c_norm > 0.0 {
                    subcases.push((TraceKind::Case1B, split.a, split.b, cm.clone()));
                }
            } else {
                subcases.push((TraceKind::Case1B, split.a, split.b, cm.clone()));
                subcases.push((TraceKind::Case1A, split.c, split.d, bm.clone()));
            }
            subcases.push((TraceKind::Case1A, split.a, split.b, bm.clone()));
            if c_norm > 0.0 {
                subcases.push((TraceKind::Case1B, split.c, split.d, cm.clone()));
            }

            for (label, qc, qd, xm) in subcases {
                self.emit(
                    label,
                    n,
                    &[("c_norm", c_norm), ("tau_c", tau_c), ("qc", qc), ("qd", qd)],
                );
                for x in ordered_columns(&xm) {
                    for (al, be, v) in self.candidates(a, qc, qd, x) {
                        let mut v = v;
                        if !normalize_canonical(&mut v) {
                            continue;
                        }
                        let r = pair_residual(a, al, be, &v);
                        // refitting can only lower the residual; it matters when the
                        // quartic had a nearly repeated root
                        let mut found = (r <= bound).then(|| (al, be, v.clone(), r));
                        for (al2, be2, mut v2) in refitted_candidates(a, &v, self.cfg.tol) {
                            if !normalize_canonical(&mut v2) {
                                continue;
                            }
                            let r2 = pair_residual(a, al2, be2, &v2);
                            if r2 <= bound && found.as_ref().map_or(true, |f| r2 < f.3) {
                                found = Some((al2, be2, v2, r2));
                            }
                        }
                        if let Some((alpha, beta, vector, residual)) = found {
                            // at the top level a few cheap polishing steps on `a` buy accuracy
                            let (alpha, beta, vector, residual) =
                                if self.depth == 0 && residual > 0.0 {
                                    polish_pair(a, alpha, beta, vector, residual)
                                } else {
                                    (alpha, beta, vector, residual)
                                };
                            return Ok(TruePair {
                                alpha,
                                beta,
                                vector,
                                residual,
                            });
                        }
                        if r.is_finite() {
                            failed.push((al, be, v, r));
                        }
                    }
                }
            }
        }

        // Last resort: polish the most promising candidates on `a` itself.
        failed.sort_by(|x, y| x.3.total_cmp(&y.3));
        let mut best = f64::INFINITY;
        for (al, be, v, r) in failed.into_iter().take(4) {
            let (al, be, v, r2) = polish_pair(a, al, be, v, r);
            if r2 <= bound {
                return Ok(TruePair {
                    alpha: al,
                    beta: be.abs(),
                    vector: v,
                    residual: r2,
                });
            }
            best = best.min(r2);
        }
        Err(Error::numerical("extract_from_common", best))
    }

    /// True-pair candidates from a vector annihilated by `A^2 - c A + d I`.
    fn candidates(&mut self, a: &Matrix, c: f64, d: f64, x: Vec<f64>) -> Vec<(f64, f64, Vec<f64>)> {
        let n = a.rows();
        let disc = c * c - 4.0 * d;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let (g, h) = ((c + sq) / 2.0, (c - sq) / 2.0);
            self.emit(
                TraceKind::DiscReal,
                n,
                &[("disc", disc), ("gamma", g), ("delta", h)],
            );
        } else {
            let (al, be) = (c / 2.0, (-disc).sqrt() / 2.0);
            self.emit(
                TraceKind::DiscComplex,
                n,
                &[("disc", disc), ("alpha", al), ("beta", be)],
            );
        }
        pair_candidates(a, c, d, x, self.cfg.tol)
    }
}

fn pair_candidates(a: &Matrix, c: f64, d: f64, x: Vec<f64>, tol: f64) -> Vec<(f64, f64, Vec<f64>)> {
    let disc = c * c - 4.0 * d;
    if disc < 0.0 {
        return vec![(c / 2.0, (-disc).sqrt() / 2.0, x)];
    }
    let sq = disc.sqrt();
    let (g, h) = ((c + sq) / 2.0, (c - sq) / 2.0);
    let y = a.shift(h).mul_vec(&x);
    let tau = tol * (1.0 + a.norm_inf()) * norm2(&x);
    let mut out = Vec::with_capacity(4);
    if norm2(&y) <= tau {
        out.push((h, 0.0, x.clone()));
        out.push((g, 0.0, y));
    } else {
        out.push((g, 0.0, y));
        out.push((h, 0.0, x.clone()));
    }
    let z = a.shift(g).mul_vec(&x);
    out.push((g, 0.0, x));
    out.push((h, 0.0, z));
    out
}

/// How `A` acts on the Krylov space of `v`, read off by least squares.
struct KrylovFit {
    /// Rayleigh quotient `v'Av / v'v`.
    rayleigh: f64,
    /// `(c, d)` with `A^2 v ~ c Av - d v`, unless `Av` is parallel to `v`.
    quad: Option<(f64, f64)>,
}

/// Recomputing the pair from the vector removes the error a nearly repeated
/// quartic root leaves in the quadratic coefficients.
fn krylov_fit(a: &Matrix, v: &[f64]) -> Option<KrylovFit> {
    let nv = norm2(v);
    if !(nv > 0.0) {
        return None;
    }
    let q1: Vec<f64> = v.iter().map(|x| x / nv).collect();
    let y = a.mul_vec(&q1);
    let lam = dot(&q1, &y);
    let perp: Vec<f64> = y.iter().zip(&q1).map(|(yi, qi)| yi - lam * qi).collect();
    let np = norm2(&perp);
    let quad = (np > f64::EPSILON * (1.0 + a.norm_inf())).then(|| {
        let q2: Vec<f64> = perp.iter().map(|x| x / np).collect();
        let z = a.mul_vec(&y);
        let (z1, z2) = (dot(&q1, &z), dot(&q2, &z));
        // z = c y - d q1 with y = lam q1 + np q2
        let c = z2 / np;
        (c, c * lam - z1)
    });
    Some(KrylovFit {
        rayleigh: lam,
        quad: quad.filter(|(c, d)| c.is_finite() && d.is_finite()),
    })
}

/// Pairs for which `v` itself may be a true-pair vector.
fn fitted_pairs(a: &Matrix, v: &[f64]) -> Vec<(f64, f64)> {
    let Some(fit) = krylov_fit(a, v) else {
        return Vec::new();
    };
    let mut out = vec![(fit.rayleigh, 0.0)];
    if let Some((c, d)) = fit.quad {
        let disc = c * c - 4.0 * d;
        if disc < 0.0 {
            out.push((c / 2.0, (-disc).sqrt() / 2.0));
        }
    }
    out
}

/// Candidates obtained by refitting the pair to a candidate vector.
fn refitted_candidates(a: &Matrix, v: &[f64], tol: f64) -> Vec<(f64, f64, Vec<f64>)> {
    let Some(fit) = krylov_fit(a, v) else {
        return Vec::new();
    };
    let mut out = vec![(fit.rayleigh, 0.0, v.to_vec())];
    if let Some((c, d)) = fit.quad {
        out.extend(pair_candidates(a, c, d, v.to_vec(), tol));
    }
    out
}

/// Alternate inverse iteration on `(A - alpha I)^2 + beta^2 I` with a refit
/// of the pair to the new vector; stops when the residual stops dropping.
fn polish_pair(
    a: &Matrix,
    alpha: f64,
    beta: f64,
    v: Vec<f64>,
    residual: f64,
) -> (f64, f64, Vec<f64>, f64) {
    let mut cur = (alpha, beta, v, residual);
    let mut stalls = 0;
    for _ in 0..40 {
        if cur.3 == 0.0 {
            break;
        }
        let op = a.true_pair_operator(cur.0, cur.1);
        let mut w = inverse_iteration(&op, &cur.2, 1);
        if !normalize_canonical(&mut w) {
            break;
        }
        let mut next = (cur.0, cur.1, pair_residual(a, cur.0, cur.1, &w));
        for (al, be) in fitted_pairs(a, &w) {
            let r = pair_residual(a, al, be, &w);
            if r < next.2 {
                next = (al, be, r);
            }
        }
        if next.2 < cur.3 {
            stalls = if next.2 > 0.5 * cur.3 { stalls + 1 } else { 0 };
            cur = (next.0, next.1, w, next.2);
        } else {
            stalls += 1;
        }
        if stalls >= 3 {
            break;
        }
    }
    cur
}

/// Nonzero columns, largest Euclidean norm first (ties keep column order).
fn ordered_columns(m: &Matrix) -> Vec<Vec<f64>> {
    let mut cols: Vec<(f64, Vec<f64>)> = (0..m.cols())
        .map(|j| {
            let c = m.column(j);
            (norm2(&c), c)
        })
        .collect();
    let top = cols.iter().fold(0.0_f64, |mx, c| mx.max(c.0));
    cols.retain(|c| c.0 > 1e-14 * top && c.0 > 0.0);
    cols.sort_by(|x, y| y.0.total_cmp(&x.0));
    cols.into_iter().map(|c| c.1).collect()
}

/// A true pair of the square matrix `a`.
pub fn true_pair(a: &Matrix, cfg: &Config) -> Result<TruePair> {
    let mut s = Solver::new(cfg, false);
    s.check_chain(a.rows())?;
    s.true_pair(a)
}

/// [`true_pair`] together with the recursion trace.
pub fn true_pair_traced(a: &Matrix, cfg: &Config) -> Result<(TruePair, Vec<TraceEvent>)> {
    let mut s = Solver::new(cfg, true);
    s.check_chain(a.rows())?;
    let tp = s.true_pair(a)?;
    Ok((tp, s.events.unwrap_or_default()))
}

/// A common true pair of two commuting operators.
pub fn common_true_pair(s: &Matrix, t: &Matrix, cfg: &Config) -> Result<CommonTruePair> {
    Solver::new(cfg, false).common_true_pair(s, t)
}

pub fn common_true_pair_traced(
    s: &Matrix,
    t: &Matrix,
    cfg: &Config,
) -> Result<(CommonTruePair, Vec<TraceEvent>)> {
    let mut solver = Solver::new(cfg, true);
    let ctp = solver.common_true_pair(s, t)?;
    Ok((ctp, solver.events.unwrap_or_default()))
}

/// A true pair of `a` from a common true pair of its lifted operators.
pub fn extract_from_common(a: &Matrix, ctp: &CommonTruePair, cfg: &Config) -> Result<TruePair> {
    Solver::new(cfg, false).extract(a, ctp, None)
}

pub fn extract_from_common_traced(
    a: &Matrix,
    ctp: &CommonTruePair,
    cfg: &Config,
) -> Result<(TruePair, Vec<TraceEvent>)> {
    let mut solver = Solver::new(cfg, true);
    let tp = solver.extract(a, ctp, None)?;
    Ok((tp, solver.events.unwrap_or_default()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    fn rot() -> Matrix {
        m(&[&[0.0, -1.0], &[1.0, 0.0]])
    }

    #[test]
    fn evenness_examples() {
        assert_eq!(evenness(3).unwrap(), Evenness(0));
        assert_eq!(evenness(12).unwrap(), Evenness(2));
        assert_eq!(evenness(8).unwrap(), Evenness(3));
        assert!(evenness(0).is_err());
    }

    #[test]
    fn chain_of_eight() {
        assert_eq!(lift_chain(8), vec![8, 36, 666, 222111]);
        assert_eq!(lift_chain(4), vec![4, 10, 55]);
        assert_eq!(lift_chain(7), vec![7]);
    }

    #[test]
    fn rotation_true_pair() {
        let tp = true_pair(&rot(), &Config::default()).unwrap();
        assert_eq!((tp.alpha, tp.beta, tp.residual), (0.0, 1.0, 0.0));
    }

    #[test]
    fn scalar_true_pair() {
        let tp = true_pair(&m(&[&[2.0]]), &Config::default()).unwrap();
        assert_eq!(
            (tp.alpha, tp.beta, tp.vector.clone()),
            (2.0, 0.0, vec![1.0])
        );
    }

    #[test]
    fn companion_quartic_true_pair() {
        let a = crate::matrix::companion(&Polynomial::new(vec![4.0, 0.0, 5.0, 0.0, 1.0])).unwrap();
        let tp = true_pair(&a, &Config::default()).unwrap();
        assert!(tp.alpha.abs() < 1e-6);
        assert!(
            (tp.beta - 1.0).abs() < 1e-6 || (tp.beta - 2.0).abs() < 1e-6,
            "{tp:?}"
        );
        let bound = 1e-8 * (1.0 + a.norm_inf()).powi(2);
        assert!(tp.residual <= bound);
    }

    #[test]
    fn common_examples() {
        let cfg = Config::default();
        let (m1, m2) = lift_operators(&rot());
        let ctp = common_true_pair(&m1, &m2, &cfg).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(ctp.s_pair, (0.0, 0.0));
        assert_eq!(ctp.t_pair, (1.0, 0.0));
        assert!((ctp.vector[0] - s).abs() < 1e-15 && ctp.vector[1] == 0.0);

        let ctp = common_true_pair(&m(&[&[2.0]]), &m(&[&[3.0]]), &cfg).unwrap();
        assert_eq!(
            (ctp.s_pair, ctp.t_pair, ctp.vector),
            ((2.0, 0.0), (3.0, 0.0), vec![1.0])
        );

        let ctp = common_true_pair(&rot(), &rot(), &cfg).unwrap();
        assert_eq!(ctp.s_pair, (0.0, 1.0));
        assert_eq!(ctp.t_pair, (0.0, 1.0));
    }

    #[test]
    fn common_rejects_non_commuting() {
        let s = m(&[&[1.0, 1.0], &[0.0, 2.0]]);
        let t = m(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert!(matches!(
            common_true_pair(&s, &t, &Config::default()),
            Err(Error::NotCommuting { .. })
        ));
    }

    #[test]
    fn extract_diag() {
        let ctp = CommonTruePair {
            s_pair: (2.0, 0.0),
            t_pair: (1.0, 0.0),
            vector: vec![1.0, 0.0, 0.0],
            residuals: (0.0, 0.0),
        };
        let tp = extract_from_common(&Matrix::diag(&[1.0, 2.0]), &ctp, &Config::default()).unwrap();
        assert_eq!((tp.alpha, tp.beta, tp.vector), (1.0, 0.0, vec![1.0, 0.0]));
    }

    #[test]
    fn limit_exceeded_for_eight() {
        let err = true_pair(&Matrix::identity(8), &Config::default()).unwrap_err();
        match err {
            Error::LimitExceeded { chain, max } => {
                assert_eq!(chain.0, vec![8, 36, 666, 222111]);
                assert_eq!(max, 300);
                assert_eq!(chain.to_string(), "8 → 36 → 666 → 222111");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn traced_shape_is_consistent() {
        let a = m(&[
            &[0.3, -0.7, 0.1, 0.9],
            &[0.5, 0.2, -0.4, 0.0],
            &[-0.6, 0.8, 0.1, 0.3],
            &[0.2, -0.1, 0.7, -0.5],
        ]);
        let (tp, ev) = true_pair_traced(&a, &Config::default()).unwrap();
        assert!(tp.residual <= 1e-8 * (1.0 + a.norm_inf()).powi(2));
        check_trace_shape(&ev).unwrap();
        assert_eq!(ev[0].kind, TraceKind::Lift);
        assert_eq!(ev[0].dim, 4);
    }
}
