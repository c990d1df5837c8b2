use millerpole::polyalg::{rational_close, roots, Polynomial, RationalFunction};
use num_complex::Complex64;
use proptest::prelude::*;

fn p(c: &[f64]) -> Polynomial {
    Polynomial::new(c.to_vec())
}

#[test]
fn products() {
    assert_eq!((&p(&[1.0, 1.0]) * &p(&[1.0, 1.0])).coeffs(), &[1.0, 2.0, 1.0]);
    assert!((&p(&[3.0, 1.0, 4.0]) * &Polynomial::zero()).is_zero());
    let q = &p(&[1.0, 1.0]) * &p(&[1.0, 0.1]);
    assert_eq!(q.coeffs()[0], 1.0);
    assert!((q.coeffs()[1] - 1.1).abs() < 1e-15);
    assert!((q.coeffs()[2] - 0.1).abs() < 1e-15);
}

#[test]
fn simple_roots() {
    assert_eq!(roots(&p(&[2.0, 1.0])).unwrap().as_slice(), &[Complex64::new(-2.0, 0.0)]);
    let r = roots(&p(&[-1.0, 0.0, 1.0])).unwrap();
    let mut re = r.real();
    re.sort_by(f64::total_cmp);
    assert!((re[0] + 1.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12);
    assert!(roots(&p(&[5.0])).is_err());
    assert!(roots(&Polynomial::zero()).is_err());
}

#[test]
fn three_decade_factors() {
    let q = &(&p(&[1.0, 1.0]) * &p(&[10.0, 1.0])) * &p(&[100.0, 1.0]);
    let r = roots(&q).unwrap();
    for (z, want) in r.iter().zip([-1.0, -10.0, -100.0]) {
        assert!((z.re - want).abs() <= 1e-9 * want.abs() && z.im.abs() <= 1e-9 * want.abs());
    }
}

#[test]
fn residual_bound_on_circuit_scale_polynomial() {
    // time constants spread over twelve decades
    let q = Polynomial::from_roots(&[-1e-2, -3e4, -7e10]);
    let r = roots(&q).unwrap();
    let scale = q.max_abs_coeff();
    for z in r.iter() {
        let res = q.eval(*z).norm() / (scale * z.norm().max(1.0).powi(3));
        assert!(res <= 1e-9, "residual {res:e} at {z}");
    }
}

fn separated_roots() -> impl Strategy<Value = Vec<f64>> {
    // magnitudes at least a decade apart, random signs
    (1usize..=5, -3.0f64..3.0, prop::collection::vec((1.0f64..3.0, any::<bool>()), 5)).prop_map(|(n, start, steps)| {
        let mut mag = 10f64.powf(start);
        let mut out = Vec::with_capacity(n);
        for &(step, neg) in steps.iter().take(n) {
            out.push(if neg { -mag } else { mag });
            mag *= 10f64.powf(step);
        }
        out
    })
}

proptest! {
    #[test]
    fn roots_of_expansion_recover_factors(rs in separated_roots()) {
        let q = Polynomial::from_roots(&rs);
        let found = roots(&q).unwrap();
        prop_assert_eq!(found.len(), rs.len());
        let mut want = rs.clone();
        want.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        for (z, w) in found.iter().zip(&want) {
            prop_assert!((z - Complex64::new(*w, 0.0)).norm() <= 1e-9 * w.abs(), "{} vs {}", z, w);
        }
    }

    #[test]
    fn open_loop_when_beta_is_zero(n in prop::collection::vec(-1e3f64..1e3, 1..4), d in prop::collection::vec(0.1f64..1e3, 1..4)) {
        let a = RationalFunction::new(Polynomial::new(n), Polynomial::new(d)).unwrap();
        prop_assert_eq!(rational_close(&a, &RationalFunction::zero()).unwrap(), a);
    }

    #[test]
    fn non_real_roots_come_in_conjugate_pairs(c in prop::collection::vec(-10.0f64..10.0, 3..7)) {
        let q = Polynomial::new(c);
        prop_assume!(q.degree().unwrap_or(0) >= 1);
        if let Ok(r) = roots(&q) {
            prop_assert!(r.is_conjugate_closed(1e-9));
            prop_assert_eq!(r.len(), q.degree().unwrap());
        }
    }

    #[test]
    fn canonicalization_idempotent(n in prop::collection::vec(-1e3f64..1e3, 1..4), d in prop::collection::vec(-1e3f64..1e3, 1..4)) {
        prop_assume!(d.iter().any(|x| *x != 0.0));
        let r = RationalFunction::new(Polynomial::new(n), Polynomial::new(d)).unwrap();
        let again = RationalFunction::new(r.num().clone(), r.den().clone()).unwrap();
        prop_assert_eq!(&r, &again);
        let den = r.den();
        let norm = if den.coeff(0) != 0.0 { den.coeff(0) } else { *den.leading().unwrap() };
        prop_assert_eq!(norm, 1.0);
    }
}
