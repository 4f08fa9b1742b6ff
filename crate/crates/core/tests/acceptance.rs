//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use latticewave::catalog;
use latticewave::classify::{classify_with, overlap_profile, overlap_profile_of, ClassLabel, OverlapProfile};
use latticewave::construct::{
    assemble_psi_r, check_seed, construct, fixed_point_set, sign_flip_tamper, CompletionConfig, ConstructionReport,
};
use latticewave::freqset::{translation_window, FrequencySet, Overlap};
use latticewave::lattice::{character_sum, choose_kr, digit_set, digit_set_b, ord_b, DilationMatrix};
use latticewave::matrix::Matrix;
use latticewave::rational::{self, Rational};
use latticewave::tiling::verify_wavelet_set;
use latticewave::wavelet::{check_norm, check_tq_orthogonality, verify_all, PiecewiseWavelet};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SAMPLES: usize = 10_000;
const SEED: u64 = 7;

type Outcome = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: latticewave::Error) -> String {
    e.to_string()
}

struct Line {
    id: u32,
    name: &'static str,
    limit: Duration,
    elapsed: Duration,
    outcome: Outcome,
}

fn timed(id: u32, name: &'static str, limit_s: u64, f: impl FnOnce() -> Outcome) -> Line {
    let t = Instant::now();
    let outcome = f();
    Line { id, name, limit: Duration::from_secs(limit_s), elapsed: t.elapsed(), outcome }
}

fn q(v: i64) -> Rational {
    rational::int(v)
}

fn qv(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| q(x)).collect()
}

fn criterion1() -> Outcome {
    for (name, m) in catalog::all_matrices() {
        let d = digit_set(&m);
        ensure(d.len() as u64 == m.det_abs(), || format!("{name}: {} digits, |det A| = {}", d.len(), m.det_abs()))?;
        let db = digit_set_b(&m);
        ensure(db.len() as u64 == m.det_abs(), || format!("{name}: {} B-digits", db.len()))?;
    }
    Ok(())
}

fn criterion2() -> Outcome {
    for (name, m) in catalog::all_matrices() {
        let digits = digit_set(&m);
        for nu in digit_set_b(&m).digits() {
            let s = character_sum(&m, &digits, nu).map_err(err)?;
            let expected = if nu.iter().all(|&x| x == 0) { m.det_abs() as i64 } else { 0 };
            let value = s.as_integer();
            ensure(value == Some(expected.into()), || {
                format!("{name}, nu = {nu:?}: sum {:?}, expected {expected}", s.reduced)
            })?;
        }
    }
    Ok(())
}

fn shift_piece(k: &FrequencySet, i: usize, by: &Rational) -> FrequencySet {
    let mut pieces = k.pieces().to_vec();
    let offset: Vec<Rational> = (0..k.n()).map(|_| by.clone()).collect();
    pieces[i] = pieces[i].translate(&offset);
    FrequencySet::from_pieces(k.n(), pieces)
}

fn criterion3() -> Outcome {
    let m = catalog::matrix("dyadic1d").map_err(err)?;
    for name in catalog::SET_NAMES {
        let (k, _) = catalog::set(name).expect("catalog set");
        let first = verify_wavelet_set(&k, &m, SAMPLES, SEED).map_err(err)?;
        ensure(first.passed(), || format!("{name} fails: {:?}", first.witnesses.first()))?;
        ensure(first.samples_used >= SAMPLES, || format!("{name}: only {} samples", first.samples_used))?;
        let again = verify_wavelet_set(&k, &m, SAMPLES, SEED).map_err(err)?;
        let same = serde_json::to_string(&first).unwrap() == serde_json::to_string(&again).unwrap();
        ensure(same, || format!("{name}: reports differ for one seed"))?;
        for i in 0..k.len() {
            let bad = shift_piece(&k, i, &rational::ratio(1, 8));
            let r = verify_wavelet_set(&bad, &m, SAMPLES, SEED).map_err(err)?;
            ensure(!r.passed() && !r.witnesses.is_empty(), || format!("{name} with piece {i} shifted passes"))?;
        }
    }
    Ok(())
}

/// Catalog sets, two deeper members of the Journé family and a quincunx completion.
fn wavelet_sets(quincunx: &ConstructionReport) -> Vec<(String, FrequencySet, DilationMatrix)> {
    let dyadic = catalog::matrix("dyadic1d").unwrap();
    let mut sets: Vec<(String, FrequencySet, DilationMatrix)> =
        catalog::SET_NAMES.iter().map(|&n| (n.to_string(), catalog::set(n).unwrap().0, dyadic.clone())).collect();
    for r in [2, 3] {
        sets.push((format!("journe-family-{r}"), catalog::journe_family(r), dyadic.clone()));
    }
    sets.push(("quincunx completion".into(), quincunx.w.clone(), catalog::matrix("quincunx").unwrap()));
    sets
}

fn criterion4(sets: &[(String, FrequencySet, DilationMatrix)]) -> Outcome {
    for (name, k, m) in sets {
        let t = Instant::now();
        let tiling = verify_wavelet_set(k, m, SAMPLES, SEED).map_err(err)?;
        ensure(tiling.passed(), || format!("{name} is not a wavelet set"))?;
        let w = PiecewiseWavelet::indicator(k.clone(), m.clone()).map_err(err)?;
        let report = verify_all(&w, SAMPLES, SEED).map_err(err)?;
        ensure(report.passed, || format!("chi of {name} fails verify_all"))?;
        ensure(report.norm.value.is_one(), || format!("chi of {name} has norm {}", report.norm.value))?;
        let secs = t.elapsed();
        ensure(secs < Duration::from_secs(30), || format!("{name} took {secs:?}"))?;
    }
    Ok(())
}

struct Built {
    label: String,
    r: u32,
    report: ConstructionReport,
    wavelet: PiecewiseWavelet,
}

fn build(matrix: &str, r: u32) -> Result<Built, String> {
    let m = catalog::matrix(matrix).map_err(err)?;
    let tol = rational::ratio(1, 1_000_000);
    let config = CompletionConfig::new(tol.clone(), 500);
    let label = format!("{matrix} r={r}");
    let report = construct(&m, r, 1, SEED, &config).map_err(|e| format!("{label}: {e}"))?;
    ensure(report.seed_check.passed(), || format!("{label}: seed check fails"))?;
    let recheck = check_seed(&m, &report.seed).map_err(err)?;
    ensure(recheck.passed(), || format!("{label}: independent seed check fails"))?;
    ensure(report.residual_translation < tol && report.residual_dilation < tol, || {
        format!(
            "{label}: residuals {} / {}",
            rational::format(&report.residual_translation),
            rational::format(&report.residual_dilation)
        )
    })?;
    ensure(report.iterations <= 500, || format!("{label}: {} iterations", report.iterations))?;
    let monotone =
        report.history.windows(2).all(|p| p[1].translation <= p[0].translation && p[1].dilation <= p[0].dilation);
    ensure(monotone, || format!("{label}: residual history is not monotone"))?;
    let wavelet = assemble_psi_r(&m, &report, !report.exact).map_err(err)?;
    let c = classify_with(&wavelet, SAMPLES, SEED).map_err(|e| format!("{label}: {e}"))?;
    ensure(c.verification.passed, || format!("{label}: verify_all fails"))?;
    ensure(c.label == ClassLabel::Finite(r), || format!("{label}: classified {}", c.label))?;
    Ok(Built { label, r, report, wavelet })
}

fn pipeline(matrix: &str, rs: &[u32], out: &mut Vec<Built>) -> Outcome {
    for &r in rs {
        out.push(build(matrix, r)?);
    }
    Ok(())
}

/// `ord_B` by repeated exact solves of `B x = k`.
fn ord_oracle(b: &Matrix, k: &[i64]) -> u32 {
    let mut x = qv(k);
    let mut r = 0;
    loop {
        let next = b.solve(&x).expect("nonsingular");
        if !next.iter().all(rational::is_integer) {
            return r;
        }
        x = next;
        r += 1;
    }
}

fn check_profile(name: &str, support: &FrequencySet, m: &DilationMatrix, p: &OverlapProfile) -> Outcome {
    let (lo, hi) = support.bounding_box().expect("nonempty support");
    let mut expected = Vec::new();
    for k in translation_window(&lo, &hi, &(lo.clone(), hi.clone())) {
        if k.iter().all(|&x| x == 0) {
            continue;
        }
        if support.translate(&k).intersects(support).map_err(err)? == Overlap::PositiveMeasureOverlap {
            expected.push(k);
        }
    }
    let mut found: Vec<Vec<i64>> = p.conflicts.iter().map(|c| c.k.clone()).collect();
    expected.sort();
    found.sort();
    ensure(found == expected, || format!("{name}: conflicts {found:?}, brute force {expected:?}"))?;
    for c in &p.conflicts {
        ensure(c.ord == ord_oracle(m.b(), &c.k), || format!("{name}: ord of {:?}", c.k))?;
    }
    ensure(p.is_symmetric(), || format!("{name}: conflict set is not symmetric"))?;
    let top = p.min_ord().unwrap_or(0) + 3;
    for r in 0..top {
        ensure(!p.in_lr(r + 1) || p.in_lr(r), || format!("{name}: L_{} not inside L_{r}", r + 1))?;
        let in_mr = p.in_lr(r) && !p.in_lr(r + 1);
        ensure(in_mr == (p.label() == ClassLabel::Finite(r)), || format!("{name}: M_{r} inconsistent with L_r"))?;
    }
    Ok(())
}

fn criterion7(sets: &[(String, FrequencySet, DilationMatrix)], built: &[Built]) -> Outcome {
    for (name, k, m) in sets {
        let p = overlap_profile_of(k, m).map_err(err)?;
        check_profile(name, k, m, &p)?;
        ensure(p.label() == ClassLabel::Infinity, || format!("{name}: MSF classified {}", p.label()))?;
        let w = PiecewiseWavelet::indicator(k.clone(), m.clone()).map_err(err)?;
        let c = classify_with(&w, 2_000, SEED).map_err(err)?;
        ensure(c.label == ClassLabel::Infinity, || format!("{name}: classify gives {}", c.label))?;
    }
    for b in built {
        let p = overlap_profile(&b.wavelet).map_err(err)?;
        check_profile(&b.label, b.wavelet.support(), b.wavelet.matrix(), &p)?;
        ensure(p.label() == ClassLabel::Finite(b.r), || format!("{}: profile gives {}", b.label, p.label()))?;
    }
    Ok(())
}

/// `B^e` for `e >= 0` by repeated multiplication.
fn b_power(m: &DilationMatrix, e: u32) -> Matrix {
    (0..e).fold(Matrix::identity(m.n()), |acc, _| m.b().mul(&acc))
}

fn criterion8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (name, m) in catalog::all_matrices() {
        for _ in 0..1000 {
            let k0: Vec<i64> = loop {
                let v: Vec<i64> = (0..m.n()).map(|_| rng.gen_range(-50..=50)).collect();
                if v.iter().any(|&x| x != 0) {
                    break v;
                }
            };
            let k = m.apply_b_int(rng.gen_range(0..=8), &k0);
            let got = ord_b(&m, &k).map_err(err)?;
            let want = ord_oracle(m.b(), &k);
            ensure(got == want, || format!("{name}: ord_b({k:?}) = {got}, oracle {want}"))?;
        }
        let id = Matrix::identity(m.n());
        for r in 0..3 {
            let k = choose_kr(&m, r);
            let kq = qv(&k);
            for p in [1, 2, -1] {
                let fp = fixed_point_set(&m, &k, p, -4..=4).map_err(err)?;
                let bp = b_power(&m, p.unsigned_abs());
                let (lhs, rhs) = if p > 0 { (id.sub(&bp), bp.clone()) } else { (bp.sub(&id), id.clone()) };
                ensure(lhs.mul(&fp.lattice_basis) == rhs, || format!("{name}: lattice basis for p = {p}"))?;
                ensure(fp.g_points.len() == 8, || format!("{name}: {} g points", fp.g_points.len()))?;
                for (j, x) in &fp.g_points {
                    let bj = b_power(&m, j.unsigned_abs());
                    let x_plus_k: Vec<Rational> = x.iter().zip(&kq).map(|(a, b)| a + b).collect();
                    let ok = if *j > 0 { bj.mul_vec(&x_plus_k) == *x } else { bj.mul_vec(x) == x_plus_k };
                    ensure(ok, || format!("{name}: g point for j = {j}, k = {k:?}"))?;
                }
                let neg_k: Vec<Rational> = kq.iter().map(|v| -v).collect();
                let zero = vec![Rational::zero(); m.n()];
                ensure(fp.limit_points == vec![zero, neg_k], || format!("{name}: limit points"))?;
            }
        }
    }
    Ok(())
}

fn positive_half(k: &FrequencySet) -> FrequencySet {
    let pieces = k.pieces().iter().filter(|p| p.bounding_box().0[0] >= Rational::zero()).cloned().collect();
    FrequencySet::from_pieces(k.n(), pieces)
}

fn criterion9(built: &[Built]) -> Outcome {
    for b in built {
        let tampered = sign_flip_tamper(&b.wavelet).map_err(err)?;
        let check = check_tq_orthogonality(&tampered, 2_000, SEED).map_err(err)?;
        ensure(!check.ok, || format!("{}: tampered wavelet passes", b.label))?;
        let hit = check.witnesses.iter().any(|w| w.sum.rational.is_one() && w.sum.sqrt2.is_zero());
        ensure(hit, || format!("{}: no witness with sum 1", b.label))?;
    }
    let m = catalog::matrix("dyadic1d").map_err(err)?;
    for name in catalog::SET_NAMES {
        let half = positive_half(&catalog::set(name).unwrap().0);
        ensure(half.volume().map_err(err)? == rational::ratio(1, 2), || format!("{name}: half has wrong volume"))?;
        let w = PiecewiseWavelet::indicator(half, m.clone()).map_err(err)?;
        let norm = check_norm(&w).map_err(err)?;
        ensure(!norm.ok && norm.value == rational::ratio(1, 2), || format!("{name}: half-volume norm {}", norm.value))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let mut lines = vec![
        timed(1, "digit-set cardinality", 1, criterion1),
        timed(2, "character-sum identity", 1, criterion2),
        timed(3, "wavelet-set verifier and perturbations", 10, criterion3),
    ];
    let mut dyadic = Vec::new();
    let c5 = timed(5, "pipeline n=1, B=2, r=0..3", 120, || pipeline("dyadic1d", &[0, 1, 2, 3], &mut dyadic));
    let mut quincunx = Vec::new();
    let c6 = timed(6, "pipeline quincunx, r=0,1", 600, || pipeline("quincunx", &[0, 1], &mut quincunx));
    let completion = quincunx.first().map(|b| b.report.clone());
    let sets = completion.as_ref().map(wavelet_sets);
    lines.push(timed(4, "MSF cross-check", 30 * sets.as_ref().map_or(1, |s| s.len() as u64), || match &sets {
        Some(s) => criterion4(s),
        None => Err("no quincunx completion to cross-check".into()),
    }));
    lines.push(c5);
    lines.push(c6);
    let built: Vec<Built> = dyadic.into_iter().chain(quincunx).collect();
    lines.push(timed(7, "classification axioms", 60, || match &sets {
        Some(s) => criterion7(s, &built),
        None => Err("no quincunx completion to classify".into()),
    }));
    lines.push(timed(8, "exactness oracle", 10, criterion8));
    lines.push(timed(9, "negative controls", 10, || criterion9(&built)));
    lines.sort_by_key(|l| l.id);

    let mut failed = false;
    for l in &lines {
        let slow = l.elapsed > l.limit;
        let verdict = if l.outcome.is_ok() && !slow { "PASS" } else { "FAIL" };
        failed |= verdict == "FAIL";
        let mut detail = format!("{:.2} s, limit {} s", l.elapsed.as_secs_f64(), l.limit.as_secs());
        if let Err(e) = &l.outcome {
            detail.push_str(&format!("; {e}"));
        } else if slow {
            detail.push_str("; over time limit");
        }
        println!("criterion {} {verdict}: {} ({detail})", l.id, l.name);
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
