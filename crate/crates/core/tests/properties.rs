//! Property-based invariants across the library.

use proptest::prelude::*;

use realfactor::factorizer::{factor, refine, verify, Factorization};
use realfactor::matrix::{
    apply_l1, apply_l2, companion, det_shifted, lift_operators, Matrix, SymBasis,
};
use realfactor::poly::{divmod, mul, quartic_split, solve_quadratic, Polynomial, QuadOutcome};
use realfactor::textio::json::{to_json, OutputDoc, TraceDoc};
use realfactor::textio::{format_poly, parse_poly};
use realfactor::truepair::{check_trace_shape, true_pair, true_pair_traced};
use realfactor::Config;

fn coeff() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

/// Polynomial of exact degree `lo..=hi` with a leading coefficient away from zero.
fn poly(lo: usize, hi: usize) -> impl Strategy<Value = Polynomial> {
    (lo..=hi)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(coeff(), d),
                prop_oneof![-5.0..-0.5f64, 0.5..5.0f64],
            )
        })
        .prop_map(|(mut c, lead)| {
            c.push(lead);
            Polynomial::new(c)
        })
}

fn square(lo: usize, hi: usize) -> impl Strategy<Value = Matrix> {
    (lo..=hi).prop_flat_map(|n| {
        prop::collection::vec(-1.0..1.0f64, n * n)
            .prop_map(move |v| Matrix::from_fn(n, n, |i, j| v[i * n + j]))
    })
}

fn symmetric(n: usize, v: &[f64]) -> Matrix {
    Matrix::from_fn(n, n, |i, j| v[i.min(j) * n + i.max(j)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn format_then_parse_is_identity(p in poly(0, 10)) {
        let text = format_poly(&p, 't');
        prop_assert_eq!(parse_poly(&text, 't').unwrap(), p);
    }

    #[test]
    fn division_identity(p in poly(0, 9), d in poly(1, 4)) {
        let (q, r) = divmod(&p, &d).unwrap();
        prop_assert!(r.is_zero() || r.degree() < d.degree());
        let back = mul(&q, &d).sub(&p).sub(&r.scale(-1.0));
        let scale = 1.0 + p.norm_inf() + q.norm_inf() * d.norm_inf();
        prop_assert!(back.norm_inf() <= 1e-11 * scale, "defect {:e}", back.norm_inf());
    }

    #[test]
    fn quartic_split_reconstructs(c in prop::collection::vec(coeff(), 4)) {
        let mut c = c;
        c.push(1.0);
        let p = Polynomial::new(c);
        let s = quartic_split(&p).unwrap();
        prop_assert!(s.expand().sub(&p).norm_inf() <= 1e-10 * p.norm_inf());
    }

    #[test]
    fn quadratic_branch_matches_discriminant(c0 in coeff(), c1 in coeff(), c2 in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64]) {
        let p = Polynomial::new(vec![c0, c1, c2]);
        let disc = c1 * c1 - 4.0 * c2 * c0;
        match solve_quadratic(&p).unwrap() {
            QuadOutcome::Real(r1, r2) => {
                prop_assert!(disc >= 0.0);
                prop_assert!(r1 <= r2);
                for r in [r1, r2] {
                    let (v, dv) = p.eval_with_derivative(r);
                    prop_assert!(v.abs() <= 1e-8 * (1.0 + dv.abs() + p.norm_inf() * (1.0 + r.abs()).powi(2)));
                }
            }
            QuadOutcome::Pair { alpha, beta } => {
                prop_assert!(disc < 0.0 && beta > 0.0);
                let q = Polynomial::quadratic_pair(alpha, beta).scale(c2);
                prop_assert!(q.sub(&p).norm_inf() <= 1e-10 * p.norm_inf());
            }
        }
    }

    #[test]
    fn lift_operators_commute(a in square(1, 5)) {
        let (m1, m2) = lift_operators(&a);
        let defect = m1.matmul(&m2).sub(&m2.matmul(&m1)).norm_inf();
        prop_assert!(defect <= 1e-12 * (1.0 + m1.norm_inf() * m2.norm_inf()));
    }

    #[test]
    fn lifts_act_on_symmetric_coordinates(a in square(1, 5), v in prop::collection::vec(-1.0..1.0f64, 25)) {
        let n = a.rows();
        let sb = SymBasis::new(n);
        let x = symmetric(n, &v);
        prop_assert_eq!(sb.unvech(&sb.vech(&x)), x.clone());
        let (m1, m2) = lift_operators(&a);
        let y1 = sb.unvech(&m1.mul_vec(&sb.vech(&x)));
        let y2 = sb.unvech(&m2.mul_vec(&sb.vech(&x)));
        prop_assert!(y1.sub(&apply_l1(&a, &x)).norm_inf() <= 1e-12);
        prop_assert!(y2.sub(&apply_l2(&a, &x)).norm_inf() <= 1e-12);
        let l2 = apply_l2(&a, &x);
        prop_assert!(l2.sub(&l2.transpose()).norm_inf() <= 1e-14);
    }

    #[test]
    fn companion_determinant_is_the_monic_polynomial(p in poly(1, 7), t in -3.0..3.0f64) {
        let m = p.monic();
        let c = companion(&m).unwrap();
        let (d, e) = (det_shifted(&c, t), m.eval(t));
        prop_assert!((d - e).abs() <= 1e-9 * (1.0 + m.eval_scale(t)), "{} vs {}", d, e);
    }

    #[test]
    fn diagonal_pairs_are_real_eigenvalues(d in prop::collection::vec(-5.0..5.0f64, 1..7)) {
        let cfg = Config::default();
        let tp = true_pair(&Matrix::diag(&d), &cfg).unwrap();
        let s = cfg.tol.sqrt();
        prop_assert!(tp.beta <= s);
        prop_assert!(d.iter().any(|x| (x - tp.alpha).abs() <= s), "alpha {} not near {:?}", tp.alpha, d);
    }

    #[test]
    fn true_pair_is_sound(a in square(1, 6)) {
        let tp = true_pair(&a, &Config::default()).unwrap();
        let r = a.true_pair_operator(tp.alpha, tp.beta).mul_vec(&tp.vector);
        let r = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let norm = tp.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(tp.beta >= 0.0 && (norm - 1.0).abs() <= 1e-9);
        prop_assert!(r <= 1e-8 * (1.0 + a.norm_inf()).powi(2), "residual {:e}", r);
    }

    #[test]
    fn traces_have_a_terminating_shape(a in square(1, 6)) {
        let mut cfg = Config::default();
        cfg.trace = true;
        let (_, events) = true_pair_traced(&a, &cfg).unwrap();
        prop_assert!(!events.is_empty());
        prop_assert!(check_trace_shape(&events).is_ok(), "{:?}", check_trace_shape(&events));
        let json = to_json(&TraceDoc { events: events.clone() }).unwrap();
        let back: TraceDoc = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.events, events);
    }

    #[test]
    fn factorization_reproduces_the_input(p in poly(1, 7)) {
        let cfg = Config::default();
        let f = refine(&factor(&p, &cfg).unwrap(), &p, &cfg);
        let rep = verify(&f, &p);
        prop_assert!(rep.degree_ok);
        prop_assert!(f.quad_pairs.iter().all(|&(_, b)| b > 0.0));
        prop_assert!(rep.relative_residual <= 1e-6, "residual {:e}", rep.relative_residual);
    }

    #[test]
    fn output_doc_round_trips(p in poly(0, 6), roots in prop::collection::vec(coeff(), 0..4),
                              pairs in prop::collection::vec((coeff(), 0.01..10.0f64), 0..3), ms in 0.0..1e4f64) {
        let f = Factorization { constant: p.leading(), linear_roots: roots, quad_pairs: pairs, residual: 0.5 };
        let doc = OutputDoc::new(&p, "paper", &f, ms);
        let back: OutputDoc = serde_json::from_str(&to_json(&doc).unwrap()).unwrap();
        prop_assert_eq!(&back, &doc);
        let g = back.factorization();
        prop_assert_eq!((g.constant, g.linear_roots, g.quad_pairs), (f.constant, f.linear_roots, f.quad_pairs));
    }
}
