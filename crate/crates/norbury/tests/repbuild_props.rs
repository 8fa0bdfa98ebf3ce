use norbury::mobius::{apply, fixed_points, MatrixRep, Point, C64};
use norbury::repbuild::{bend, build_family, validate, Representation, SurfaceId};
use norbury::surface::GroupWord;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = GroupWord> {
    let r = rank as i32;
    proptest::collection::vec((1..=r, proptest::bool::ANY), 0..max_len)
        .prop_map(|v| GroupWord::from_letters(&v.into_iter().map(|(l, inv)| if inv { -l } else { l }).collect::<Vec<_>>()))
}

fn samples(rank: usize, max_len: usize, n: usize) -> Vec<GroupWord> {
    let mut runner = TestRunner::deterministic();
    let s = word(rank, max_len);
    (0..n).map(|_| s.new_tree(&mut runner).unwrap().current()).collect()
}

fn families() -> Vec<Representation> {
    vec![
        build_family(SurfaceId::N12, &[1.0]).unwrap(),
        build_family(SurfaceId::N12, &[0.5]).unwrap(),
        build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap(),
        build_family(SurfaceId::N21, &[1.2, 1.2]).unwrap(),
        build_family(SurfaceId::N13, &SurfaceId::N13.default_params()).unwrap(),
    ]
}

fn bent_n21(t: C64) -> Representation {
    let base = build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap();
    let ab = base.surface.parse("ab").unwrap();
    bend(&base, &ab, t, 64).unwrap()
}


#[test]
fn homomorphism_on_1000_word_pairs() {
    let mut reps = families();
    reps.push(bent_n21(C64::new(0.0, 0.1)));
    for rep in reps {
        let ws = samples(rep.rank(), 10, 2000);
        for pair in ws.chunks(2) {
            let (u, v) = (&pair[0], &pair[1]);
            let lhs = rep.evaluate(&u.mul(v));
            let (mu, mv) = (rep.evaluate(u), rep.evaluate(v));
            let rhs = mu * mv;
            let scale = (mu.max_abs() * mv.max_abs()).max(1.0);
            assert!(lhs.distance(&rhs) < 1e-10 * scale, "{} {}", rep.surface.render(u), rep.surface.render(v));
            assert_eq!(lhs.det_sign, rhs.det_sign);
        }
    }
}

#[test]
fn det_sign_tracks_sidedness() {
    for rep in families() {
        for w in samples(rep.rank(), 12, 300) {
            let expected = if rep.surface.is_one_sided(&w) { -1 } else { 1 };
            assert_eq!(rep.evaluate(&w).det_sign, expected);
        }
    }
}

#[test]
fn build_family_output_validates() {
    for rep in families() {
        let report = validate(&rep);
        assert!(report.ok(), "{:?}", report.first_failure());
        for p in &rep.surface.peripheral_words {
            let tr = rep.evaluate(p).trace();
            assert!((tr - 2.0).norm().min((tr + 2.0).norm()) < 1e-9);
        }
        let m = rep.meridian_image();
        assert!(m.distance(&MatrixRep::translation()) < 1e-12);
    }
}

#[test]
fn one_sided_images_swap_half_planes() {
    let i = Point::Finite(C64::new(0.0, 1.0));
    for rep in families() {
        for w in samples(rep.rank(), 10, 400) {
            if !rep.surface.is_one_sided(&w) {
                continue;
            }
            let m = rep.evaluate(&w);
            // Im(A·i) = −1/|ci + d|² is below double precision for huge entries
            if m.max_abs() > 1e4 {
                continue;
            }
            let scale = m.max_abs().powi(2).max(1.0);
            assert!(m.trace().im.abs() < 1e-12 * scale);
            for p in fixed_points(&m).unwrap().points() {
                if let Point::Finite(z) = p {
                    assert!(z.im.abs() < 1e-9 * (1.0 + z.norm()), "{z}");
                }
            }
            match apply(&m, i) {
                Point::Finite(z) => assert!(z.im < 0.0, "{}", rep.surface.render(&w)),
                Point::Infinity => panic!("i mapped to infinity"),
            }
        }
    }
}

#[test]
fn real_bend_keeps_lengths_real() {
    for t in [0.3, -0.7, 1.1] {
        let rep = bent_n21(C64::new(t, 0.0));
        for w in samples(rep.rank(), 8, 200) {
            if w.cyclically_reduced().is_empty() || rep.evaluate(&w).is_parabolic() {
                continue;
            }
            let l = rep.length(&w).unwrap().value;
            assert!(l.im.abs() < 1e-9, "{} {l}", rep.surface.render(&w));
        }
    }
}

#[test]
fn bend_fixes_curves_off_the_bending_curve() {
    let base = build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap();
    let rep = bent_n21(C64::new(0.05, 0.2));
    for s in ["ab", "abab", "aabb"] {
        let w = base.surface.parse(s).unwrap();
        let before = base.evaluate(&w).trace();
        let after = rep.evaluate(&w).trace();
        assert!((before - after).norm() < 1e-10 * (1.0 + before.norm()), "{s}");
    }
    let base = build_family(SurfaceId::N13, &SurfaceId::N13.default_params()).unwrap();
    let xy = base.surface.parse("xy").unwrap();
    let rep = bend(&base, &xy, C64::new(0.0, 0.15), 64).unwrap();
    for s in ["a", "x", "y", "xy", "xyxY"] {
        let w = base.surface.parse(s).unwrap();
        let l0 = base.length(&w).unwrap().value;
        let l1 = rep.length(&w).unwrap().value;
        assert!((l0 - l1).norm() < 1e-10, "{s}: {l0} vs {l1}");
    }
}

#[test]
fn zero_bend_is_identity() {
    let base = build_family(SurfaceId::N21, &[1.0, 1.5]).unwrap();
    let rep = bent_n21(C64::new(0.0, 0.0));
    for (m, n) in base.images.iter().zip(&rep.images) {
        assert_eq!(m, n);
    }
}

#[test]
fn fuchsian_lengths_are_real_and_positive() {
    for rep in families() {
        for w in samples(rep.rank(), 8, 200) {
            let w = w.cyclically_reduced();
            if w.is_empty() {
                continue;
            }
            let l = rep.length(&w).unwrap().value;
            if rep.evaluate(&w).is_parabolic() {
                assert_eq!(l, C64::new(0.0, 0.0));
            } else {
                assert!(l.im.abs() < 1e-9 && l.re > 0.0, "{} {l}", rep.surface.render(&w));
            }
        }
    }
}
