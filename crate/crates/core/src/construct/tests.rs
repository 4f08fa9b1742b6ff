use super::*;
use crate::catalog;
use crate::classify::{classify_with, overlap_profile, ClassLabel};
use crate::rational::{int, ratio};
use crate::tiling::verify_wavelet_set;
use crate::wavelet::{check_tq_orthogonality, verify_all};

fn b2() -> DilationMatrix {
    catalog::matrix("dyadic1d").unwrap()
}

fn config() -> CompletionConfig {
    CompletionConfig {
        tolerance: ratio(1, 1_000_000),
        max_iter: 500,
        max_pieces: DEFAULT_MAX_PIECES,
        guide: None,
        exchange: true,
    }
}

#[test]
fn fixed_points_dyadic() {
    let fp = fixed_point_set(&b2(), &[1], 1, [-1, 1]).unwrap();
    assert_eq!(fp.lattice_basis[(0, 0)], int(-2));
    assert_eq!(fp.g_points, vec![(-1, vec![int(1)]), (1, vec![int(-2)])]);
    assert_eq!(fp.limit_points, vec![vec![int(0)], vec![int(-1)]]);
    let far = fixed_point_set(&b2(), &[1], 1, [40]).unwrap();
    let g = &far.g_points[0].1[0];
    assert!((g + int(1)).abs() < ratio(1, 1 << 30));
}

#[test]
fn fixed_points_satisfy_their_equations() {
    for (_, m) in catalog::all_matrices() {
        let k = choose_kr(&m, 1);
        let fp = fixed_point_set(&m, &k, 1, (-5..=5).filter(|&j| j != 0)).unwrap();
        let kq: Vec<Rational> = k.iter().map(|&v| int(v)).collect();
        for (j, x) in &fp.g_points {
            let lhs: Vec<Rational> = m.apply_b(-*j, x).iter().zip(&kq).map(|(a, b)| a - b).collect();
            assert_eq!(&lhs, x);
        }
        // column i of the basis is the fixed point for α = e_i
        for i in 0..m.n() {
            let x: Vec<Rational> = (0..m.n()).map(|r| fp.lattice_basis[(r, i)].clone()).collect();
            let mut lhs = m.apply_b(-1, &x);
            lhs[i] -= int(1);
            assert_eq!(lhs, x);
        }
    }
}

#[test]
fn quincunx_lattice_basis() {
    let q = catalog::matrix("quincunx").unwrap();
    let fp = fixed_point_set(&q, &[1, 1], 1, []).unwrap();
    let expected = q.b_inv().sub(&Matrix::identity(2)).inverse().unwrap();
    assert_eq!(fp.lattice_basis, expected);
    assert!(fixed_point_set(&q, &[1, 1], 0, []).is_err());
}

#[test]
fn seed_rejects_nonpositive_epsilon() {
    assert!(SeedSpec::new(&b2(), 0, vec![1], 1, vec![ratio(3, 5)], int(0)).is_err());
}

#[test]
fn seed_checks() {
    let m = b2();
    let seed = build_seed(&m, 0, 1, 7).unwrap();
    let check = check_seed(&m, &seed).unwrap();
    assert!(check.passed(), "{check:?}");
    assert!(check.origin_epsilon.unwrap().is_positive());
    assert!(check.tile_room.unwrap().half_width.is_positive());

    let at_origin = SeedSpec::new(&m, 0, vec![1], 1, vec![int(0)], ratio(1, 64)).unwrap();
    let c = check_seed(&m, &at_origin).unwrap();
    assert!(!c.origin_clear && !c.passed());

    let huge = SeedSpec::new(&m, 0, vec![1], 1, vec![ratio(1, 2)], int(2)).unwrap();
    let c = check_seed(&m, &huge).unwrap();
    assert!(!c.translation_disjoint);
}

#[test]
fn shannon_is_already_complete() {
    let c = complete_to_wavelet_set(&b2(), &catalog::shannon_set(), &config()).unwrap();
    assert!(c.exact);
    assert_eq!(c.iterations, 0);
    assert_eq!(c.w, catalog::shannon_set());
}

#[test]
fn empty_seed_completes() {
    let m = b2();
    let c = complete_to_wavelet_set(&m, &FrequencySet::empty(1), &config()).unwrap();
    assert!(c.exact);
    assert!(verify_wavelet_set(&c.w, &m, 2000, 1).unwrap().passed());
}

#[test]
fn residuals_never_increase() {
    let m = b2();
    for r in 0..3 {
        let seed = build_seed(&m, r, 1, 100 + r as u64).unwrap();
        let cfg = config().with_guide(reference_set(&m, &seed.k_r));
        let c = complete_to_wavelet_set(&m, &seed.seed_set(&m).unwrap(), &cfg).unwrap();
        assert!(c.exact);
        for pair in c.history.windows(2) {
            assert!(pair[1].translation <= pair[0].translation);
            assert!(pair[1].dilation <= pair[0].dilation);
        }
    }
}

#[test]
fn psi_r_dyadic_pipeline() {
    let m = b2();
    for r in [0u32, 2] {
        let report = construct(&m, r, 1, 7, &config()).unwrap();
        assert!(report.exact);
        assert!(verify_wavelet_set(&report.w, &m, 1000, 1).unwrap().passed());
        let w = assemble_psi_r(&m, &report, false).unwrap();
        let c = classify_with(&w, 1000, 3).unwrap();
        assert_eq!(c.label, ClassLabel::Finite(r));
        let k = report.seed.k_r[0];
        let mut ks: Vec<i64> = c.profile.conflicts.iter().map(|c| c.k[0]).collect();
        ks.sort();
        assert_eq!(ks, vec![-2 * k, -k, k, 2 * k]);
    }
}

#[test]
fn support_matches_regions() {
    let m = b2();
    let report = construct(&m, 1, 1, 3, &config()).unwrap();
    let w = assemble_psi_r(&m, &report, false).unwrap();
    let i = &report.seed.i;
    let bk = m.apply_b_int(1, &report.seed.k_r);
    let expected = report.w.union(&i.dilate(&m, -1)).unwrap().union(&i.translate(&bk)).unwrap();
    assert_eq!(w.support().volume().unwrap(), expected.volume().unwrap());
    assert_eq!(w.support().difference(&expected).unwrap().volume().unwrap(), int(0));
    assert_eq!(expected.difference(w.support()).unwrap().volume().unwrap(), int(0));
}

#[test]
fn tamper_breaks_orthogonality() {
    let m = b2();
    for r in [0u32, 1] {
        let report = construct(&m, r, 1, 11, &config()).unwrap();
        let w = assemble_psi_r(&m, &report, false).unwrap();
        assert!(verify_all(&w, 1000, 5).unwrap().passed);
        let bad = sign_flip_tamper(&w).unwrap();
        let c = check_tq_orthogonality(&bad, 1000, 5).unwrap();
        assert!(!c.ok);
        let wit = &c.witnesses[0];
        assert!(wit.sum.rational == int(1) || wit.sum.rational == int(-1), "{wit:?}");
        assert_eq!(overlap_profile(&bad).unwrap().min_ord(), Some(r));
    }
}

#[test]
fn inexact_reports_are_refused() {
    let m = b2();
    let mut report = construct(&m, 0, 1, 5, &config()).unwrap();
    report.exact = false;
    report.residual_translation = ratio(1, 1 << 24);
    assert!(matches!(assemble_psi_r(&m, &report, false), Err(Error::Inexact { .. })));
    assert!(assemble_psi_r(&m, &report, true).is_ok());
}

#[test]
fn journe_family_members_are_wavelet_sets() {
    let m = b2();
    for r in 0..4 {
        let w = catalog::journe_family(r);
        assert_eq!(w.volume().unwrap(), int(1));
        assert!(verify_wavelet_set(&w, &m, 2000, 5).unwrap().passed(), "r = {r}");
    }
    assert_eq!(catalog::journe_family(1), catalog::journe_set());
}

#[test]
fn reference_set_only_for_dyadic_nonzero_order() {
    let m = b2();
    assert!(reference_set(&m, &[1]).is_none());
    assert!(reference_set(&m, &[3]).is_none());
    assert!(reference_set(&m, &[6]).is_none());
    assert_eq!(reference_set(&m, &[-2]), Some(catalog::journe_family(1)));
    assert_eq!(reference_set(&m, &[8]), Some(catalog::journe_family(3)));
}

#[test]
fn dyadic_seed_without_guide_stalls() {
    let m = b2();
    let seed = build_seed(&m, 1, 1, 3).unwrap();
    let r = complete_to_wavelet_set(&m, &seed.seed_set(&m).unwrap(), &config().with_exchange(false));
    assert!(matches!(r, Err(Error::NoProgress { .. })), "{r:?}");
}

#[test]
fn exchange_steps_finish_a_stalled_completion() {
    let m = b2();
    let seed = build_seed(&m, 1, 1, 3).unwrap();
    let s = seed.seed_set(&m).unwrap();
    let c = complete_to_wavelet_set(&m, &s, &config()).unwrap();
    let tol = ratio(1, 1_000_000);
    assert!(c.residual_translation < tol && c.residual_dilation < tol);
    assert!(c.history.windows(2).all(|p| p[1].translation <= p[0].translation && p[1].dilation <= p[0].dilation));
    assert_eq!(s.difference(&c.w).unwrap().volume().unwrap(), int(0));
    let report = verify_wavelet_set(&c.w, &m, 2000, 1).unwrap();
    assert!(report.passed(), "{:?}", report.witnesses.first());
}

#[test]
fn construct_prefers_exact_greedy_completions() {
    let m = b2();
    let report = construct(&m, 0, 1, 11, &config()).unwrap();
    assert!(report.exact);
    assert!(report.attempts > 1);
}
