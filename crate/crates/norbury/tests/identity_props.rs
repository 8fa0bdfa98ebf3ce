use norbury::curves::PairKind;
use norbury::identity::{
    band_decomposition_check, bordered_identity_check, bordered_trace_residual, calibration_width, enumerate_for,
    full_circle_width, norbury_d, norbury_d_hat, norbury_e_pair_hat, norbury_r, norbury_r_hat, pairwise_sum,
    reglued_check, sum_alternative_with, sum_identity, sum_identity_with, summand, IdentityError,
};
use norbury::mobius::{MatrixRep, C64};
use norbury::repbuild::{bend, build_bordered, build_family, Boundary, Representation, SurfaceId};
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn n21() -> Representation {
    build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap()
}

fn bent(t: C64) -> Representation {
    let base = n21();
    let ab = base.surface.parse("ab").unwrap();
    bend(&base, &ab, t, 64).unwrap()
}

#[test]
fn cusped_identity_on_the_fuchsian_locus() {
    let r = sum_identity(&build_family(SurfaceId::N12, &[1.0]).unwrap(), 18.0).unwrap();
    assert!(r.error() < 1e-3, "{}", r.value);
    let r = sum_identity(&n21(), 18.0).unwrap();
    assert!(r.error() < 1e-3, "{}", r.value);
    assert!(r.value.im.abs() < 1e-12);
}

#[test]
fn cusped_identity_off_the_fuchsian_locus() {
    let r = sum_identity(&bent(C64::new(0.0, 0.1)), 18.0).unwrap();
    assert!((r.value.re - 0.5).abs() < 1e-3 && r.value.im.abs() < 1e-3, "{}", r.value);
}

#[test]
fn fuchsian_partial_sums_increase_towards_one_half() {
    let rep = n21();
    let en = enumerate_for(&rep, 20.0).unwrap();
    let mut last = (0.0, 0usize, f64::INFINITY);
    for cutoff in [6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0] {
        let r = sum_identity_with(&rep, &en, cutoff).unwrap();
        assert!(r.value.re <= 0.5 + 1e-12);
        if r.term_count > last.1 {
            assert!(r.value.re > last.0, "{cutoff}: {} after {}", r.value.re, last.0);
        } else {
            assert_eq!(r.value.re, last.0);
        }
        assert!(r.tail_estimate <= last.2, "tail grew at {cutoff}");
        last = (r.value.re, r.term_count, r.tail_estimate);
    }
    for t in sum_identity_with(&rep, &en, 20.0).unwrap().ledger {
        assert!(t.value.re > 0.0 && t.value.im == 0.0);
    }
}

#[test]
fn summation_order_does_not_matter() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let rep = bent(C64::new(0.0, 0.1));
    let r = sum_identity(&rep, 18.0).unwrap();
    let vals: Vec<C64> = r.ledger.iter().map(|t| t.value).collect();
    let mut runner = TestRunner::deterministic();
    for _ in 0..50 {
        let perm = Just(vals.clone()).prop_shuffle().new_tree(&mut runner).unwrap().current();
        let naive: C64 = perm.iter().sum();
        assert!((naive - r.value).norm() < 1e-12);
        assert!((pairwise_sum(&perm) - r.value).norm() < 1e-12);
    }
}

#[test]
fn summands_are_conjugation_invariant() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let entry = (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| C64::new(a, b));
    let strat = (entry.clone(), entry.clone(), entry.clone(), entry).prop_filter_map("singular", |(a, b, cc, d)| {
        let det = a * d - b * cc;
        (det.norm() > 0.1).then(|| {
            let s = det.sqrt();
            MatrixRep::new(a / s, b / s, cc / s, d / s, 1)
        })
    });
    let mut runner = TestRunner::deterministic();
    for rep in [n21(), bent(C64::new(0.05, 0.1))] {
        let en = enumerate_for(&rep, 12.0).unwrap();
        for _ in 0..10 {
            let g = strat.new_tree(&mut runner).unwrap().current();
            let conj = rep.conjugated(&g);
            for p in &en.pairs {
                let (s0, s1) = (summand(p, &rep).unwrap(), summand(p, &conj).unwrap());
                assert!((s0 - s1).norm() < 1e-10, "{s0} vs {s1}");
            }
        }
    }
}

#[test]
fn real_bend_leaves_the_sum_unchanged() {
    let r0 = sum_identity(&n21(), 18.0).unwrap();
    for t in [0.2, -0.4] {
        let r = sum_identity(&bent(c(t)), 18.0).unwrap();
        assert!(r.value.im.abs() < 1e-9);
        assert!((r.value - r0.value).norm() < 1e-6 + r.tail_estimate + r0.tail_estimate, "{} vs {}", r.value, r0.value);
    }
}

#[test]
fn band_regrouping_and_trace_relation() {
    for rep in [build_family(SurfaceId::N12, &[1.0]).unwrap(), n21(), build_family(SurfaceId::N21, &[1.2, 1.2]).unwrap()] {
        let en = enumerate_for(&rep, 18.0).unwrap();
        for p in en.pairs.iter().filter(|p| p.kind == PairKind::Moebius) {
            let r = band_decomposition_check(p, &rep).unwrap();
            assert!(r.regroup < 1e-10 && r.trace < 1e-10 * (1.0 + p.length_sum().exp()), "{r:?}");
        }
    }
    let rep = bent(C64::new(0.0, 0.1));
    let en = enumerate_for(&rep, 18.0).unwrap();
    for p in en.pairs.iter().filter(|p| p.kind == PairKind::Moebius) {
        assert!(band_decomposition_check(p, &rep).unwrap().regroup < 1e-9);
    }
}

#[test]
fn alternative_identity_on_n12() {
    let rep = build_family(SurfaceId::N12, &[1.0]).unwrap();
    let en = enumerate_for(&rep, 18.0).unwrap();
    let alt = sum_alternative_with(&rep, &en, 18.0).unwrap();
    let id = sum_identity_with(&rep, &en, 18.0).unwrap();
    assert!(alt.error() < 1e-3);
    assert!((alt.value - id.value).norm() < 2e-3);
}

#[test]
fn hatted_limits() {
    let x = c(1e-6);
    let lim = |s: f64| 2.0 / ((s / 2.0).exp() + 1.0);
    let d = norbury_d_hat(x, c(1.0), c(1.0)).unwrap().re;
    assert!((d - lim(2.0)).abs() / lim(2.0) < 1e-4);
    let r = norbury_r_hat(x, x, c(1.5)).unwrap().re;
    assert!((r - lim(1.5)).abs() / lim(1.5) < 1e-4);
    // a band with a cusp boundary: sinh(ℓμ/2) sinh(ℓμ′/2) = 1
    for lmu in [0.5f64, 1.0, 2.0] {
        let lmu2 = 2.0 * (1.0 / (lmu / 2.0).sinh()).asinh();
        for nu in [0.0, 1e-6] {
            let e = norbury_e_pair_hat(x, c(nu), c(lmu), c(lmu2)).unwrap().re;
            assert!((e - lim(nu)).abs() / lim(nu) < 1e-4, "{e}");
        }
    }
    assert!(matches!(norbury_r_hat(c(-1.0), c(1.0), c(1.0)), Err(IdentityError::DomainError(_))));
    assert!(matches!(norbury_d_hat(c(-1e-3), c(1.0), c(1.0)), Err(IdentityError::DomainError(_))));
}

proptest! {
    #[test]
    fn d_plus_x_is_r_plus_r(x in 0.0f64..5.0, y in 0.0f64..5.0, z in 0.0f64..5.0) {
        let (x, y, z) = (c(x), c(y), c(z));
        let lhs = norbury_d(x, y, z) + x;
        let rhs = norbury_r(x, y, z) + norbury_r(x, z, y);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hatted_values_are_continuous_at_zero(y in 0.1f64..4.0, z in 0.1f64..4.0) {
        let h0 = norbury_d_hat(c(0.0), c(y), c(z)).unwrap();
        let h1 = norbury_d_hat(c(1e-7), c(y), c(z)).unwrap();
        prop_assert!((h0 - h1).norm() < 1e-5);
        prop_assert!((h0.re - 2.0 / (((y + z) / 2.0).exp() + 1.0)).abs() < 1e-12);
    }
}

#[test]
fn bordered_identity_examples() {
    for l1 in [1.0, 0.5, 1e-3] {
        let rep = build_bordered(1.0, Boundary { l1, l2: 0.0 }).unwrap();
        let r = bordered_identity_check(&rep, 18.0).unwrap();
        assert!((r.value.re - l1).abs() / l1 < 1e-2, "{l1}: {}", r.value);
        assert!(bordered_trace_residual(&rep).unwrap() < 1e-9);
        let g = reglued_check(&rep).unwrap();
        assert!((g.l1a + g.l1b - l1).abs() < 1e-12);
        assert!((g.e_pair - g.r_pair).abs() < 1e-9 * l1.max(1e-3), "{g:?}");
    }
    let rep = build_bordered(1.0, Boundary { l1: 0.5, l2: 0.0 }).unwrap();
    assert!((bordered_identity_check(&rep, 18.0).unwrap().value.re - 0.5).abs() < 1e-3);
}

#[test]
fn widths() {
    for rep in [n21(), build_family(SurfaceId::N12, &[1.0]).unwrap(), bent(C64::new(0.0, 0.1))] {
        let en = enumerate_for(&rep, 18.0).unwrap();
        let full = full_circle_width(&rep, &en, 18.0).unwrap();
        assert!((full.sum - 1.0).norm() < 1e-3, "{}", full.sum);
        assert!((full.expected - 1.0).norm() < 1e-12);
        let cal = calibration_width(&rep, &en, 18.0).unwrap();
        assert!(cal.residual() < 1e-3, "{cal:?}");
    }
}
