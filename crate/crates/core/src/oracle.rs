//! Independent cross-checks: a Bairstow factorizer that shares no code path
//! with the true-pair method, a generator of polynomials with known
//! factorizations, and a comparison of two factorizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::factorizer::{verify, Factorization};
use crate::poly::{odd_real_root, Polynomial};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    /// Number of linear factors.
    pub m: usize,
    /// Number of quadratic factors.
    pub k: usize,
    pub root_range: (f64, f64),
    pub beta_range: (f64, f64),
    pub min_separation: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(m: usize, k: usize, seed: u64) -> Self {
        InstanceSpec {
            m,
            k,
            root_range: (-2.0, 2.0),
            beta_range: (0.2, 1.5),
            min_separation: 0.1,
            seed,
        }
    }

    /// Split `degree` into linear and quadratic counts using the seed.
    pub fn for_degree(degree: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let k = rng.gen_range(0..=degree / 2);
        InstanceSpec::new(degree - 2 * k, k, seed)
    }
}

/// Draw roots and pairs under the separation constraint and expand them.
pub fn random_poly(spec: &InstanceSpec) -> Result<(Polynomial, Factorization)> {
    let (lo, hi) = spec.root_range;
    let (blo, bhi) = spec.beta_range;
    if spec.m + 2 * spec.k == 0 || !(lo < hi) || !(0.0 < blo && blo <= bhi) {
        return Err(Error::contract("random_poly: empty ranges or zero degree"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // every zero as a point (re, im); pairs contribute their upper-half-plane member
    let mut points: Vec<(f64, f64)> = Vec::new();
    let far = |pts: &[(f64, f64)], x: (f64, f64)| {
        pts.iter()
            .all(|p| ((p.0 - x.0).powi(2) + (p.1 - x.1).powi(2)).sqrt() >= spec.min_separation)
    };
    let mut attempts = 0usize;
    let mut draw =
        |rng: &mut ChaCha8Rng, pts: &mut Vec<(f64, f64)>, imag: bool| -> Result<(f64, f64)> {
            loop {
                attempts += 1;
                if attempts > 10_000 {
                    return Err(Error::contract("random_poly: rejection sampling exhausted"));
                }
                let re = rng.gen_range(lo..=hi);
                let im = if imag { rng.gen_range(blo..=bhi) } else { 0.0 };
                if far(pts, (re, im)) {
                    pts.push((re, im));
                    return Ok((re, im));
                }
            }
        };
    let mut roots = Vec::with_capacity(spec.m);
    for _ in 0..spec.m {
        roots.push(draw(&mut rng, &mut points, false)?.0);
    }
    let mut pairs = Vec::with_capacity(spec.k);
    for _ in 0..spec.k {
        pairs.push(draw(&mut rng, &mut points, true)?);
    }
    let mut truth = Factorization {
        constant: 1.0,
        linear_roots: roots,
        quad_pairs: pairs,
        residual: 0.0,
    };
    truth.canonicalize();
    let p = truth.expand();
    Ok((p, truth))
}

/// One Bairstow run for `t^2 + u t + v` dividing `a` (ascending, monic-ish).
fn bairstow_run(a: &[f64], mut u: f64, mut v: f64, max_iter: usize) -> Option<(f64, f64)> {
    let n = a.len() - 1;
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    let mut b = vec![0.0; n + 1];
    let mut c = vec![0.0; n + 1];
    for _ in 0..max_iter {
        // synthetic division by t^2 + u t + v
        b[n] = a[n];
        b[n - 1] = a[n - 1] - u * b[n];
        for i in (0..n - 1).rev() {
            b[i] = a[i] - u * b[i + 1] - v * b[i + 2];
        }
        c[n] = b[n];
        c[n - 1] = b[n - 1] - u * c[n];
        for i in (1..n - 1).rev() {
            c[i] = b[i] - u * c[i + 1] - v * c[i + 2];
        }
        let (g, h) = (c[2], c[3]);
        let det = g * g - h * c[1];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        // Newton in (r, s) = (-u, -v)
        let dr = (-b[1] * g + b[0] * h) / det;
        let ds = (-b[0] * g + b[1] * c[1]) / det;
        u -= dr;
        v -= ds;
        if !u.is_finite() || !v.is_finite() || u.abs() > 1e8 * scale || v.abs() > 1e8 * scale {
            return None;
        }
        if dr.abs() + ds.abs() <= 1e-14 * (1.0 + u.abs() + v.abs()) {
            return Some((u, v));
        }
    }
    // accept if the remainder is tiny even without a converged step
    let mut bb = a.to_vec();
    for i in (2..=n).rev() {
        let q = bb[i];
        bb[i - 1] -= u * q;
        bb[i - 2] -= v * q;
        bb[i] = 0.0;
    }
    (bb[0].abs().max(bb[1].abs()) <= 1e-12 * scale).then_some((u, v))
}

fn divide_quadratic(a: &[f64], u: f64, v: f64) -> Vec<f64> {
    let n = a.len() - 1;
    let mut rem = a.to_vec();
    let mut q = vec![0.0; n - 1];
    for i in (2..=n).rev() {
        let c = rem[i];
        q[i - 2] = c;
        rem[i - 1] -= u * c;
        rem[i - 2] -= v * c;
    }
    q
}

fn quadratic_roots(u: f64, v: f64, roots: &mut Vec<f64>, pairs: &mut Vec<(f64, f64)>) {
    let disc = u * u - 4.0 * v;
    if disc >= 0.0 {
        let q = -0.5 * (u + u.signum() * disc.sqrt());
        if q == 0.0 {
            roots.extend([0.0, 0.0]);
        } else {
            roots.extend([q, v / q]);
        }
    } else {
        pairs.push((-u / 2.0, (-disc).sqrt() / 2.0));
    }
}

/// Full factorization by Bairstow's method with seeded random restarts.
pub fn bairstow_factor(p: &Polynomial, cfg: &Config) -> Result<Factorization> {
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::contract("bairstow_factor needs degree >= 1"));
    }
    let constant = p.leading();
    let original = p.monic();
    let mut cur: Vec<f64> = original.coeffs().to_vec();
    let mut roots = Vec::new();
    let mut pairs = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    if (cur.len() - 1) % 2 == 1 {
        let poly = Polynomial::new(cur.clone());
        let r0 = odd_real_root(&poly, 1e-6)?;
        let r = newton(&original, r0);
        roots.push(r);
        let (q, _) = poly.deflate_linear(r);
        cur = q.into_coeffs();
    }

    while cur.len() - 1 > 2 {
        let n = cur.len() - 1;
        let bound = 1.0 + cur[..n].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut guess = (cur[n - 1] / cur[n], cur[n - 2] / cur[n]);
        let mut found = None;
        for _ in 0..=cfg.max_restarts {
            if let Some(uv) = bairstow_run(&cur, guess.0, guess.1, 200) {
                found = Some(uv);
                break;
            }
            guess = (rng.gen_range(-bound..bound), rng.gen_range(-bound..bound));
        }
        let (u, v) = found.ok_or(Error::NonConvergence {
            restarts: cfg.max_restarts,
        })?;
        // polish against the undeflated polynomial
        let (u, v) = match bairstow_run(original.coeffs(), u, v, 50) {
            Some((pu, pv))
                if (pu - u).abs() + (pv - v).abs() <= 1e-3 * (1.0 + u.abs() + v.abs()) =>
            {
                (pu, pv)
            }
            _ => (u, v),
        };
        quadratic_roots(u, v, &mut roots, &mut pairs);
        cur = divide_quadratic(&cur, u, v);
    }
    match cur.len() - 1 {
        2 => quadratic_roots(cur[1] / cur[2], cur[0] / cur[2], &mut roots, &mut pairs),
        1 => roots.push(-cur[0] / cur[1]),
        _ => {}
    }
    for r in roots.iter_mut() {
        *r = newton(&original, *r);
    }
    let mut f = Factorization {
        constant,
        linear_roots: roots,
        quad_pairs: pairs,
        residual: 0.0,
    };
    f.canonicalize();
    f.residual = verify(&f, p).relative_residual;
    Ok(f)
}

fn newton(p: &Polynomial, mut x: f64) -> f64 {
    let mut fx = p.eval(x).abs();
    for _ in 0..30 {
        let (v, dv) = p.eval_with_derivative(x);
        if v == 0.0 || dv == 0.0 {
            break;
        }
        let next = x - v / dv;
        let fnext = p.eval(next).abs();
        if !(fnext < fx) {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub equal: bool,
    pub max_distance: f64,
    pub unmatched_linear: Vec<f64>,
    pub unmatched_quadratic: Vec<(f64, f64)>,
    pub constant_diff: f64,
}

/// Sort both factorizations canonically and match them item by item.
///
/// Items whose partner lies farther than `tol`, and leftovers when the counts
/// differ, are reported as unmatched (from both sides).
pub fn compare(f1: &Factorization, f2: &Factorization, tol: f64) -> CompareReport {
    let (mut a, mut b) = (f1.clone(), f2.clone());
    a.canonicalize();
    b.canonicalize();
    let mut max_distance: f64 = 0.0;
    let mut unmatched_linear = Vec::new();
    let mut unmatched_quadratic = Vec::new();

    for (x, y) in a.linear_roots.iter().zip(&b.linear_roots) {
        let d = (x - y).abs();
        max_distance = max_distance.max(d);
        if !(d <= tol) {
            unmatched_linear.extend([*x, *y]);
        }
    }
    let (la, lb) = (a.linear_roots.len(), b.linear_roots.len());
    unmatched_linear.extend_from_slice(if la > lb {
        &a.linear_roots[lb..]
    } else {
        &b.linear_roots[la..]
    });

    for (x, y) in a.quad_pairs.iter().zip(&b.quad_pairs) {
        let d = ((x.0 - y.0).powi(2) + (x.1 - y.1).powi(2)).sqrt();
        max_distance = max_distance.max(d);
        if !(d <= tol) {
            unmatched_quadratic.extend([*x, *y]);
        }
    }
    let (qa, qb) = (a.quad_pairs.len(), b.quad_pairs.len());
    unmatched_quadratic.extend_from_slice(if qa > qb {
        &a.quad_pairs[qb..]
    } else {
        &b.quad_pairs[qa..]
    });

    let constant_diff = (a.constant - b.constant).abs();
    let equal = unmatched_linear.is_empty()
        && unmatched_quadratic.is_empty()
        && constant_diff <= tol * a.constant.abs().max(1.0);
    CompareReport {
        equal,
        max_distance,
        unmatched_linear,
        unmatched_quadratic,
        constant_diff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::mul;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn bairstow_examples() {
        let cfg = Config::default();
        let f = bairstow_factor(&poly(&[1.0, 0.0, 1.0]), &cfg).unwrap();
        assert_eq!(f.quad_pairs, vec![(0.0, 1.0)]);

        let f = bairstow_factor(&poly(&[-6.0, 11.0, -6.0, 1.0]), &cfg).unwrap();
        for (r, e) in f.linear_roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - e).abs() < 1e-8);
        }

        let mut p = Polynomial::one();
        for j in 1..=6 {
            p = mul(&p, &Polynomial::linear(j as f64));
        }
        let f = bairstow_factor(&p, &cfg).unwrap();
        assert_eq!(f.linear_roots.len(), 6);
        for (r, e) in f.linear_roots.iter().zip(1..=6) {
            assert!((r - e as f64).abs() < 1e-6, "{:?}", f.linear_roots);
            assert!(p.eval(*r).abs() <= 1e-6 * p.eval_scale(*r));
        }
    }

    #[test]
    fn bairstow_eighth_degree() {
        let p = poly(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let f = bairstow_factor(&p, &Config::default()).unwrap();
        assert_eq!(f.quad_pairs.len(), 4);
        assert!(f.residual <= 1e-8);
    }

    #[test]
    fn random_poly_examples() {
        let spec = InstanceSpec::new(1, 1, 42);
        let (p, truth) = random_poly(&spec).unwrap();
        assert_eq!(p.degree(), 3);
        assert!(truth.expand().sub(&p).norm_inf() <= 1e-14);
        let (p2, truth2) = random_poly(&spec).unwrap();
        assert_eq!(p, p2);
        assert_eq!(truth, truth2);

        for seed in 0..1000 {
            let spec = InstanceSpec::new(3, 0, seed);
            let (_, t) = random_poly(&spec).unwrap();
            let r = &t.linear_roots;
            for i in 0..r.len() {
                for j in i + 1..r.len() {
                    assert!((r[i] - r[j]).abs() >= 0.1);
                }
            }
        }
    }

    #[test]
    fn random_poly_exhausts() {
        let mut spec = InstanceSpec::new(5, 0, 1);
        spec.root_range = (0.0, 0.1);
        assert!(random_poly(&spec).is_err());
    }

    #[test]
    fn compare_examples() {
        let f = Factorization {
            constant: 1.0,
            linear_roots: vec![1.0, -2.0],
            quad_pairs: vec![(0.0, 1.0)],
            residual: 0.0,
        };
        let r = compare(&f, &f, 1e-9);
        assert!(r.equal && r.max_distance == 0.0);

        let mut g = f.clone();
        g.linear_roots.reverse();
        assert!(compare(&f, &g, 1e-9).equal);

        let a = Factorization {
            constant: 1.0,
            linear_roots: vec![],
            quad_pairs: vec![(0.0, 1.0)],
            residual: 0.0,
        };
        let mut b = a.clone();
        b.quad_pairs = vec![(0.0, 2.0)];
        let r = compare(&a, &b, 1e-6);
        assert!(!r.equal);
        assert!((r.max_distance - 1.0).abs() < 1e-15);
        assert_eq!(r.unmatched_quadratic, vec![(0.0, 1.0), (0.0, 2.0)]);

        let mut c = a.clone();
        c.quad_pairs.clear();
        c.linear_roots = vec![0.0, 0.0];
        let r = compare(&a, &c, 1e-6);
        assert!(!r.equal);
        assert_eq!(r.unmatched_quadratic, vec![(0.0, 1.0)]);
    }
}
