use num_rational::BigRational;
use tpcert_core::heatflow::{
    f_direct, flow_integrate, flow_rhs, flow_rhs_shifts, index_window, l2_bound, residual_check, richardson_ratio, truncation_bound, Offsets,
};
use tpcert_core::kernels::{build_bessel_matrix, ArgumentTuple, IndexTuple};
use tpcert_core::positivity::det_certified;
use tpcert_core::scalar::parse_rational;
use tpcert_core::{PrecisionPolicy, Sign};

fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap()
}

#[test]
fn windows_are_complete_and_ordered() {
    let w = index_window(1, 2).unwrap();
    let names: Vec<String> = w.members().iter().map(|k| k.to_string()).collect();
    assert_eq!(names, ["(0)", "(1)", "(2)"]);
    let w = index_window(3, 6).unwrap();
    assert_eq!(w.len(), 35);
    for (i, k) in w.members().iter().enumerate() {
        assert_eq!(w.position(k.as_slice()), Some(i));
        assert!(k.as_slice().windows(2).all(|p| p[0] < p[1]));
    }
    assert!(index_window(3, 1).is_err());
}

#[test]
fn residual_is_second_order() {
    let cases = [(1usize, vec![], 16u32, "0.7"), (2, vec!["0.5"], 10, "1.2"), (3, vec!["0.5", "1.5"], 8, "0.4")];
    for (m, w, kmax, x1) in cases {
        let w = Offsets::parse(&w).unwrap();
        let window = index_window(m, kmax).unwrap();
        let h = q("1e-3");
        let rep = residual_check(&q(x1), &w, &window, &h, 1e-300).unwrap();
        assert!(rep.max_interior_relative < 1e-4, "m={m}: {}", rep.max_interior_relative);
        let ratio = richardson_ratio(&q(x1), &w, &window, &h, 1e-300).unwrap();
        assert!((3.5..=4.5).contains(&ratio), "m={m}: {ratio}");
    }
}

#[test]
fn initial_condition_reduces_dimension() {
    let policy = PrecisionPolicy::default();
    let w = Offsets::parse(&["1", "2.5"]).unwrap();
    let window = index_window(3, 6).unwrap();
    let f0 = f_direct(&q("0"), &w, &window, 1e-25, &policy).unwrap();
    let x = ArgumentTuple::new(w.as_slice().to_vec()).unwrap();
    for (k, v) in window.members().iter().zip(&f0) {
        if k.as_slice()[0] == 0 {
            let sub = IndexTuple::new(k.as_slice()[1..].to_vec()).unwrap();
            let d = det_certified(&build_bessel_matrix(&sub, &x, 1e-25, &policy).unwrap(), &policy).unwrap().value;
            assert!(v.overlaps(&d), "k={k}");
        } else {
            assert!(v.contains_zero(), "k={k}");
        }
    }
}

#[test]
fn direct_values_are_positive() {
    let policy = PrecisionPolicy::default();
    let w = Offsets::parse(&["0.75"]).unwrap();
    let window = index_window(2, 12).unwrap();
    for x1 in ["0.1", "1", "3"] {
        for v in f_direct(&q(x1), &w, &window, 1e-25, &policy).unwrap() {
            assert_eq!(v.sign(), Sign::Positive);
        }
    }
}

#[test]
fn flow_matches_direct_and_stays_in_cone() {
    let policy = PrecisionPolicy::default();
    let w = Offsets::parse(&["0.5", "1"]).unwrap();
    let window = index_window(3, 12).unwrap();
    let t = flow_integrate(&w, &window, 0.5, 1e-3, &[0.25]).unwrap();
    assert!(t.min_component >= -1e-12);
    let direct = f_direct(&q("0.5"), &w, &window, 1e-20, &policy).unwrap();
    let bound = t.truncation_bound.expect("window is wide enough");
    for (i, d) in direct.iter().enumerate() {
        if window.is_interior(i) {
            assert!((t.last().f[i] - d.mid_f64()).abs() <= bound + 1e-10, "{}", window.members()[i]);
        }
    }
}

#[test]
fn enlarging_the_window_moves_less_than_the_bound() {
    let w = Offsets::parse(&["1"]).unwrap();
    let small = index_window(2, 12).unwrap();
    let large = index_window(2, 18).unwrap();
    let a = flow_integrate(&w, &small, 0.8, 1e-3, &[]).unwrap();
    let b = flow_integrate(&w, &large, 0.8, 1e-3, &[]).unwrap();
    let bound = truncation_bound(&small, &q("0.8"), &w).unwrap().unwrap().upper_f64();
    for (i, k) in small.members().iter().enumerate() {
        let j = large.position(k.as_slice()).unwrap();
        assert!((a.last().f[i] - b.last().f[j]).abs() <= bound + 1e-12, "k={k}");
    }
}

#[test]
fn rhs_is_a_positive_combination_of_neighbours() {
    for (m, kmax) in [(1usize, 6u32), (2, 6), (3, 6)] {
        let window = index_window(m, kmax).unwrap();
        for i in 0..window.len() {
            let st = window.stencil(i);
            assert!(st.iter().all(|&(t, h)| t != i && h >= 1), "{}", window.members()[i]);
        }
        let f: Vec<f64> = (0..window.len()).map(|i| 1.0 + (i % 5) as f64).collect();
        let a = flow_rhs(&window, &f).unwrap();
        let b = flow_rhs_shifts(&window, &f).unwrap();
        for i in 0..window.len() {
            assert!(a[i] > 0.0);
            assert!((a[i] - b[i]).abs() <= 1e-12 * a[i].abs());
        }
    }
}

#[test]
fn l2_bound_holds_in_three_dimensions() {
    let window = index_window(3, 12).unwrap();
    let rep = l2_bound(&q("1.5"), 3, &window).unwrap();
    assert!(rep.holds);
    assert!(rep.partial_sum_max.certainly_lt(&rep.c_r_rigorous));
}
