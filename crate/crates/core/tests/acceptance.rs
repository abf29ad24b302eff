//! End-to-end acceptance checks. Run with
//! `cargo test -p svdrefine --test acceptance`; prints one line per criterion
//! and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use svdrefine::bench::{gen_prescribed, gen_random, init_svd, init_svd_counted, random_unitary};
use svdrefine::bench::experiment::measurement_bits;
use svdrefine::coupler::{check_bounds, coupling_residual, solve_regular};
use svdrefine::refiner::{ds_revisited_step, ds_step, hp_step, refine, RefineOptions};
use svdrefine::residual::{big_k, kappa, svd_residual};
use svdrefine::spectra::{deflate_with_quantity, deflation_quantity_from_norms, prescribed_deflation_threshold, residual_norms};
use svdrefine::stiefel::{polar_step, stiefel_defect};
use svdrefine::{Complex, Matrix, Mode, MpFloat, OpCounter, Real, SvdTriplet};

type M = Matrix<MpFloat>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mp(x: f64, bits: u32) -> MpFloat {
    MpFloat::from_f64_at(x, bits)
}

/// Strictly decreasing values with every gap, and the smallest value, at
/// least `0.1`.
fn gapped_spectrum(q: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut s = vec![0.1 + rng.random::<f64>()];
    for _ in 1..q {
        let last = *s.last().unwrap();
        s.push(last + 0.1 + rng.random::<f64>());
    }
    s.reverse();
    s
}

fn stiefel(m: usize, n: usize, bits: u32, rng: &mut ChaCha8Rng) -> M {
    let q: M = random_unitary(m, bits, rng);
    q.block(0..m, 0..n)
}

fn c1_coupler(ops: &mut OpCounter) -> Outcome {
    let bits = 128;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tol = mp(16.0, bits).mul_pow2(-128);
    let (mut worst, mut violations, mut residual_fails) = (0.0f64, 0usize, 0usize);
    let mut first_violation = String::new();
    for k in 0..500u64 {
        let q = rng.random_range(1..=12);
        let l = rng.random_range(q..=12);
        let sigma: Vec<MpFloat> = gapped_spectrum(q, &mut rng).iter().map(|&x| mp(x, bits)).collect();
        let delta: M = gen_random(l, q, bits, 1000 + k);
        let sol = solve_regular(&delta, &sigma, ops).expect("distinct positive spectrum");
        let smat = Matrix::from_real_diag(&sigma, l, q);
        let r = coupling_residual(&delta, &sol, &smat).paper_norm();
        let dn = delta.paper_norm();
        if r > tol.clone() * &dn {
            residual_fails += 1;
        }
        worst = worst.max((r / &dn).to_f64() / 2f64.powi(-128));
        let b = check_bounds(&sol, &delta, &kappa(&sigma));
        if !b.ok() {
            if violations == 0 {
                first_violation = format!("; first violation (l={l}, q={q}): {}", b.violations.join(", "));
            }
            violations += 1;
        }
    }
    outcome(
        residual_fails == 0 && violations == 0,
        format!(
            "500 instances, worst residual {worst:.2} * 2^-128 ||Delta||, {residual_fails} residual failures, {violations} bound violations{first_violation}"
        ),
    )
}

/// `Q + t N` with `t` chosen so that the defect is `target` to about 1e-6
/// relative.
fn near_stiefel(q: &M, n: &M, target: f64) -> M {
    let bits = q.precision();
    let at = |t: f64| q.add(&n.scale(&mp(t, bits)));
    let defect = |t: f64| stiefel_defect(&at(t), &mut OpCounter::new()).to_f64();
    let mut hi = 1e-6;
    while defect(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if defect(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn c2_stiefel(ops: &mut OpCounter) -> Outcome {
    let bits = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let slack = mp(1.0, bits) + &mp(1.0, bits).mul_pow2(-20);
    let (mut fails, mut out_of_range) = (0, 0);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..200u64 {
        let p = [1, 2, 3, 5][(k % 4) as usize];
        let target = 10f64.powf(rng.random_range(-4.0..(0.3f64).log10()));
        let q = stiefel(8, 5, bits, &mut rng);
        let n: M = gen_random(8, 5, bits, 2000 + k);
        let w = near_stiefel(&q, &n, target);
        let eps = stiefel_defect(&w, ops);
        let e = eps.to_f64();
        if !(1e-4 * (1.0 - 1e-5)..=0.3 * (1.0 + 1e-5)).contains(&e) {
            out_of_range += 1;
        }
        let w1 = polar_step(&w, p, ops).expect("defect below one");
        let eps1 = stiefel_defect(&w1, ops);
        let bound = eps.powi(p as i32 + 1) * &slack;
        if eps1 > bound {
            fails += 1;
        }
        // log2 of measured / eps^(p+1)
        worst = worst.max(eps1.log2() - (p as f64 + 1.0) * eps.log2());
    }
    outcome(
        fails == 0 && out_of_range == 0,
        format!(
            "200 matrices 8x5, p in {{1,2,3,5}}, {fails} bound failures, {out_of_range} defects out of range, max log2(eps1 / eps^(p+1)) = {worst:.3}"
        ),
    )
}

fn c3_order(ops: &mut OpCounter) -> Outcome {
    let base = 64;
    let n = 16;
    let mut ok = true;
    let mut parts = Vec::new();
    let top = RefineOptions::new(6, base, 3).schedule.bits(3, 6, u32::MAX);
    let m: M = gen_random(n, n, top, 3);
    let t0 = init_svd_counted(&m.with_precision(measurement_bits(base)), base, &mut OpCounter::new())
        .expect("initial SVD");
    for p in 1..=6 {
        let opts = RefineOptions::new(p, base, 3);
        match refine(&m, &t0, &opts) {
            Ok(out) => {
                ops.merge(&out.trace.total_ops());
                let r = &out.trace.records;
                let ratio = r[3].epsilon.log2() / r[2].epsilon.log2();
                let pp = (p + 1) as f64;
                let good = (0.8 * pp..=1.3 * pp).contains(&ratio);
                ok &= good;
                parts.push(format!("p={p}: {ratio:.3}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("p={p}: {e}"));
            }
        }
    }
    outcome(ok, format!("last-step ratio log2 eps3 / log2 eps2: {}", parts.join(", ")))
}

/// `(M, U, V, Sigma)` with `U`, `V` unitary and `U^* M V - Sigma` of size
/// `eps / (kappa^(5/4) K^(2/5))`.
fn ds_instance(n: usize, eps: f64, bits: u32, seed: u64) -> (M, SvdTriplet<MpFloat>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma: Vec<MpFloat> = gapped_spectrum(n, &mut rng)
        .iter()
        .map(|&x| mp(x, bits))
        .collect();
    let u: M = random_unitary(n, bits, &mut rng);
    let v: M = random_unitary(n, bits, &mut rng);
    let g: M = gen_random(n, n, bits, seed ^ 0x5eed);
    let scale = mp(eps, bits) / &(hyp_factor(&sigma, 5, 4, 2, 5) * &g.paper_norm());
    let d = g.scale(&scale);
    let s = Matrix::from_real_diag(&sigma, n, n);
    let m = u.matmul(&s.add(&d)).matmul(&v.adjoint());
    (m, SvdTriplet::new(u, v, &sigma).unwrap())
}

/// `kappa^(a/b) K^(c/d)`.
fn hyp_factor(sigma: &[MpFloat], a: i32, b: u32, c: i32, d: u32) -> MpFloat {
    kappa(sigma).pow_frac(a, b) * &big_k(sigma).pow_frac(c, d)
}

fn c4_davies_smith(ops: &mut OpCounter) -> Outcome {
    let bits = 256;
    let (mut ds_fail, mut rev_fail, mut rev_better) = (0, 0, 0);
    let (mut ds_worst, mut rev_worst) = (0.0f64, 0.0f64);
    let total = 50;
    for k in 0..total {
        let target = [0.02, 0.05, 0.1][k % 3];
        let n = 2 + k % 5;
        let (m, t) = ds_instance(n, target, bits, 4000 + k as u64);
        let sigma = t.spectrum();
        let d = svd_residual(&m, &t).unwrap().paper_norm();
        let eps = hyp_factor(&sigma, 5, 4, 2, 5) * &d;
        assert!(hyp_factor(&sigma, 6, 5, 3, 10) * &d <= eps);
        let e = eps.to_f64();
        let (t1, _) = ds_step(&t, &m, ops).expect("regular instance");
        let (t2, _) = ds_revisited_step(&t, &m, ops).expect("regular instance");
        let r1 = svd_residual(&m, &t1).unwrap().paper_norm().to_f64();
        let r2 = svd_residual(&m, &t2).unwrap().paper_norm().to_f64();
        let b1 = (8.0 + 18.0 * e + 33.0 * e * e) * e.powi(3);
        let b2 = (6.0 + 21.0 * e + 54.0 * e * e) * e.powi(3);
        ds_fail += usize::from(e > 0.1 * (1.0 + 1e-12) || r1 > b1);
        rev_fail += usize::from(r2 > b2);
        rev_better += usize::from(r2 <= r1);
        ds_worst = ds_worst.max(r1 / b1);
        rev_worst = rev_worst.max(r2 / b2);
    }
    let share = rev_better as f64 / total as f64;
    outcome(
        ds_fail == 0 && rev_fail == 0 && share >= 0.8,
        format!(
            "{total} instances, DS {ds_fail} failures (max measured/bound {ds_worst:.3}), revisited {rev_fail} failures (max {rev_worst:.3}), revisited <= DS on {:.0}%",
            100.0 * share
        ),
    )
}

fn c5_cauchy() -> Outcome {
    let base = 64;
    let mb = measurement_bits(base);
    let m: M = svdrefine::bench::gen_cauchy(200, mb);
    let t0 = init_svd(&m, base).expect("initial SVD").with_precision(mb);
    let (d, eu, ev) = residual_norms(&t0, &m).unwrap();
    let k = big_k(&t0.spectrum());
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, want_q) in [(1, 11), (2, 15), (3, 15)] {
        let e = deflation_quantity_from_norms(&d, &eu, &ev, &k, p);
        match deflate_with_quantity(&t0, e) {
            Ok(r) => {
                let head = want_q - 1;
                let good = r.q() == want_q
                    && r.indices[..head] == (0..head).collect::<Vec<_>>()[..]
                    && r.indices[head] >= head;
                ok &= good;
                parts.push(format!("p={p}: q={} indices {:?}", r.q(), r.indices));
            }
            Err(err) => {
                ok = false;
                parts.push(format!("p={p}: {err}"));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn c6_table() -> Outcome {
    let p1 = [14, 46, 86, 126, 166, 206, 246, 286, 326, 366];
    let p2 = [11, 33, 59, 86, 113, 139, 166, 193, 219, 246];
    let sizes = [4, 20, 40, 60, 80, 100, 120, 140, 160, 180];
    let mut bad = Vec::new();
    for (i, &s) in sizes.iter().enumerate() {
        for (p, want) in [(1, p1[i]), (2, p2[i])] {
            let got = prescribed_deflation_threshold(s, p);
            if got != want {
                bad.push(format!("(p={p}, 4n={s}): {got} != {want}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("20 cells, {} mismatches {}", bad.len(), bad.join(", ")))
}

fn c7_prescribed() -> Outcome {
    let base = 64;
    let mb = measurement_bits(base);
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [1, 5, 10] {
        let (m, _) = gen_prescribed::<MpFloat>(n, mb, 7);
        let t0 = init_svd(&m, base).expect("initial SVD").with_precision(mb);
        let (d, eu, ev) = residual_norms(&t0, &m).unwrap();
        let k = big_k(&t0.spectrum());
        let one = mp(1.0, mb);
        for p in [1, 2, 3] {
            let e = deflation_quantity_from_norms(&d, &eu, &ev, &k, p);
            match deflate_with_quantity(&t0, e) {
                Ok(r) => {
                    let q_plus = r.triplet.spectrum().iter().filter(|s| **s > one).count();
                    ok &= q_plus == n;
                    parts.push(format!("4n={} p={p}: q+={q_plus}", 4 * n));
                }
                Err(err) => {
                    ok = false;
                    parts.push(format!("4n={} p={p}: {err}", 4 * n));
                }
            }
        }
    }
    outcome(ok, parts.join(", "))
}

fn c8_cluster(ops: &mut OpCounter) -> Outcome {
    let base = 64;
    let p = 3;
    let mut opts = RefineOptions::new(p, base, 3);
    opts.keep_iterates = true;
    opts.divergence_guard = false;
    let top = opts.schedule.bits(3, p, u32::MAX);
    let (m, _) = gen_prescribed::<MpFloat>(2, top, 8);
    let t0 = init_svd(&m.with_precision(measurement_bits(base)), base).expect("initial SVD");
    let mode = Mode::parse("cluster:3,3,1,1").unwrap();
    let t0 = SvdTriplet::from_parts(t0.u, t0.v, t0.sigma, mode.clone()).unwrap();
    let out = match refine(&m, &t0, &opts) {
        Ok(out) => out,
        Err(e) => return outcome(false, format!("refinement failed: {e}")),
    };
    ops.merge(&out.trace.total_ops());
    let part = t0.partition().unwrap().clone();
    let blocks = part.block_index();
    let mut off_block = 0;
    for t in &out.iterates {
        let s = &t.sigma;
        for i in 0..s.rows() {
            for j in 0..s.cols() {
                let same = i < blocks.len() && j < blocks.len() && blocks[i] == blocks[j];
                if !same && !s[(i, j)].is_zero() {
                    off_block += 1;
                }
            }
        }
    }
    let residuals: Vec<f64> = out.trace.records.iter().map(|r| r.delta_norm.log2()).collect();
    let last = out.triplet.clone();
    let final_res = svd_residual(&m.with_precision(last.precision()), &last).unwrap().paper_norm();
    let reached = final_res.log2() < -100.0;
    outcome(
        off_block == 0 && reached,
        format!(
            "partition {}, {off_block} nonzero off-block entries, log2 residual by iterate {:?}",
            part.to_spec(),
            residuals.iter().map(|x| x.round() as i64).collect::<Vec<_>>()
        ),
    )
}

fn c9_no_factorizations(refinement: &OpCounter) -> Outcome {
    let mut init = OpCounter::new();
    let m: M = gen_random(4, 3, 64, 9);
    init_svd_counted(&m, 64, &mut init).unwrap();
    outcome(
        refinement.factorizations == 0 && init.factorizations == 1,
        format!(
            "refinement work: {} matrix products, {} factorizations (initial SVD counts {})",
            refinement.matrix_mults, refinement.factorizations, init.factorizations
        ),
    )
}

/// A column-selected signed permutation with unit phases, so that
/// `U Sigma V^*` is exact.
fn phase_permutation(m: usize, n: usize, bits: u32, rng: &mut ChaCha8Rng) -> M {
    let mut perm: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut a = Matrix::zeros(m, n, bits);
    for j in 0..n {
        let z = match rng.random_range(0..4) {
            0 => Complex::new(mp(1.0, bits), mp(0.0, bits)),
            1 => Complex::new(mp(-1.0, bits), mp(0.0, bits)),
            2 => Complex::new(mp(0.0, bits), mp(1.0, bits)),
            _ => Complex::new(mp(0.0, bits), mp(-1.0, bits)),
        };
        a[(perm[j], j)] = z;
    }
    a
}

fn c10_fixed_points(ops: &mut OpCounter) -> Outcome {
    let bits = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut moved, mut worst) = (0, f64::NEG_INFINITY);
    for k in 0..50 {
        let n = rng.random_range(1..=6);
        let rows = n + rng.random_range(0..=3);
        let sigma: Vec<MpFloat> = gapped_spectrum(n, &mut rng).iter().map(|&x| mp(x, bits)).collect();
        // Half of the instances are exact in binary, the other half exact up
        // to rounding of random unitary factors.
        let (u, v) = if k % 2 == 0 {
            (phase_permutation(rows, n, bits, &mut rng), phase_permutation(n, n, bits, &mut rng))
        } else {
            (stiefel(rows, n, bits, &mut rng), random_unitary(n, bits, &mut rng))
        };
        let s = Matrix::from_real_diag(&sigma, n, n);
        let m = u.matmul(&s).matmul(&v.adjoint());
        let t = SvdTriplet::new(u, v, &sigma).unwrap();
        let p = 1 + k % 4;
        let images = [
            hp_step(&t, &m, p, ops).map(|x| x.0),
            ds_step(&t, &m, ops).map(|x| x.0),
            ds_revisited_step(&t, &m, ops).map(|x| x.0),
        ];
        let tol = (bits as f64 - 16.0) * -1.0;
        for img in images {
            let img = img.expect("regular instance");
            let change = [
                img.u.sub(&t.u).max_abs(),
                img.v.sub(&t.v).max_abs(),
                img.sigma.sub(&t.sigma).max_abs(),
            ];
            for c in change {
                if c.is_zero() {
                    continue;
                }
                let l = c.log2() - big_k(&sigma).log2();
                worst = worst.max(l);
                if l > tol {
                    moved += 1;
                }
            }
        }
    }
    let worst = if worst.is_finite() { format!("2^{worst:.0}") } else { "0".into() };
    outcome(
        moved == 0,
        format!("50 instances x 3 maps at {bits} bits, largest relative change {worst}, {moved} over 2^-240"),
    )
}

fn main() -> ExitCode {
    let mut refinement_ops = OpCounter::new();
    let mut results: Vec<(usize, &str, Outcome, Duration, Duration)> = Vec::new();
    macro_rules! run {
        ($n:expr, $name:expr, $limit:expr, $f:expr) => {{
            let start = Instant::now();
            let o = $f;
            results.push(($n, $name, o, start.elapsed(), Duration::from_secs_f64($limit)));
            let r = results.last().unwrap();
            report(r.0, r.1, &r.2, r.3, r.4);
        }};
    }
    run!(1, "coupler exactness and bounds", 10.0, c1_coupler(&mut refinement_ops));
    run!(2, "Stiefel one-step contraction", 30.0, c2_stiefel(&mut refinement_ops));
    run!(3, "order of convergence", 120.0, c3_order(&mut refinement_ops));
    run!(4, "Davies-Smith bounds", 20.0, c4_davies_smith(&mut refinement_ops));
    run!(5, "Cauchy deflation indices", 60.0, c5_cauchy());
    run!(6, "deflation threshold table", 1.0, c6_table());
    run!(7, "prescribed spectrum representatives", 120.0, c7_prescribed());
    run!(8, "cluster structure preservation", 60.0, c8_cluster(&mut refinement_ops));
    run!(9, "no factorizations", 1.0, c9_no_factorizations(&refinement_ops));
    run!(10, "fixed points", 5.0, c10_fixed_points(&mut OpCounter::new()));

    let failed = results.iter().filter(|r| !(r.2.pass && r.3 <= r.4)).count();
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn report(n: usize, name: &str, o: &Outcome, took: Duration, limit: Duration) {
    let in_time = took <= limit;
    let verdict = if o.pass && in_time { "PASS" } else { "FAIL" };
    let time = format!("{:.2}s of {:.0}s", took.as_secs_f64(), limit.as_secs_f64());
    let late = if in_time { "" } else { " (over time budget)" };
    println!("criterion {n:>2} {verdict}: {name} [{time}{late}] {}", o.detail);
}
