use num_rational::BigRational;
use tpcert_core::bessel::{bessel_i_exact, bessel_i_quadrature, bessel_i_rational, generating_partial_sum, quadrature_nodes_for, BesselOrder};
use tpcert_core::scalar::{parse_rational, pi};
use tpcert_core::{CertifiedReal, PrecisionPolicy, Sign};

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

fn int(j: i64) -> BesselOrder {
    BesselOrder::Integer(j)
}

fn grid() -> impl Iterator<Item = BigRational> {
    (1..=40).map(|i| BigRational::new(i.into(), 2.into()))
}

#[test]
fn negative_orders_mirror_positive_ones() {
    for x in grid().step_by(5) {
        for j in 0..=12 {
            assert_eq!(bessel_i_rational(&int(j), &x, 128).unwrap(), bessel_i_rational(&int(-j), &x, 128).unwrap());
        }
    }
}

#[test]
fn positive_on_the_positive_axis() {
    for x in grid() {
        for j in -20..=20 {
            assert_eq!(bessel_i_rational(&int(j), &x, 96).unwrap().sign(), Sign::Positive, "I_{j}({x})");
        }
    }
}

#[test]
fn three_term_recurrence() {
    for x in ["0.25", "1", "3.5", "12"].map(q) {
        let xb = CertifiedReal::from_rational(&x, 160);
        for j in 1..=15 {
            let lhs = &bessel_i_rational(&int(j - 1), &x, 160).unwrap() - &bessel_i_rational(&int(j + 1), &x, 160).unwrap();
            let rhs = bessel_i_rational(&int(j), &x, 160).unwrap().mul_i64(2 * j).div(&xb).unwrap();
            assert!(lhs.overlaps(&rhs), "j={j} x={x}");
        }
    }
}

#[test]
fn half_integer_orders_are_elementary() {
    for x in ["0.5", "2", "7.25"].map(q) {
        let xb = CertifiedReal::from_rational(&x, 160);
        let pref = CertifiedReal::from_i64(2).div(&(&pi(160) * &xb)).unwrap().sqrt().unwrap();
        let (ep, em) = (xb.exp(), (-&xb).exp());
        let sinh = (&ep - &em).mul_pow2(-1);
        let cosh = (&ep + &em).mul_pow2(-1);
        let plus = bessel_i_rational(&BesselOrder::Real(q("1/2")), &x, 160).unwrap();
        let three = bessel_i_rational(&BesselOrder::Real(q("3/2")), &x, 160).unwrap();
        assert!(plus.overlaps(&(&pref * &sinh)), "x={x}");
        assert!(three.overlaps(&(&pref * &(&cosh - &sinh.div(&xb).unwrap()))), "x={x}");
    }
}

#[test]
fn series_and_quadrature_overlap() {
    for x in ["0.1", "2.5", "17"] {
        let xq = q(x);
        for j in [0u64, 3, 9, 20] {
            let s = bessel_i_rational(&int(j as i64), &xq, 160).unwrap();
            let n = quadrature_nodes_for(j, x.parse().unwrap(), 1e-35);
            let t = bessel_i_quadrature(j, &xq, n, 160).unwrap();
            assert!(s.overlaps(&t), "j={j} x={x}");
            assert!(t.rad_f64() < 1e-30);
        }
    }
}

#[test]
fn escalation_meets_tight_targets() {
    let r = bessel_i_exact(&int(7), &q("9.5"), 1e-80, &PrecisionPolicy::default()).unwrap();
    assert!(r.met);
    assert!(r.value.rad_le(1e-80));
    assert!(r.precision > 64);
}

#[test]
fn generating_function_away_from_one() {
    for (y, z) in [("1", "2"), ("3", "1/2"), ("0.5", "3")] {
        let (y, z) = (q(y), q(z));
        let s = generating_partial_sum(&y, &z, 60, 160).unwrap();
        let arg = &CertifiedReal::from_rational(&y, 160) * &CertifiedReal::from_rational(&(&z + z.recip()), 160);
        let e = arg.mul_pow2(-1).exp();
        assert!((&s - &e).abs().upper_f64() < 1e-20, "y={y} z={z}");
    }
}
