//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ncinterp::criteria::{
    build_schur_matrix, build_toeplitz, caratheodory_value, classical_caratheodory, classical_cf, nc_caratheodory_check,
    nc_cf_check, Budget, CFInstance, CaratheodoryInstance, CheckOptions, Verdict,
};
use ncinterp::linalg::{
    hermitian_part, identity, inverse_guarded, max_abs_diff, random_complex_gaussian, real, spectral_norm,
    unitarity_residual, CMat, MAX_CONDITION,
};
use ncinterp::ncpoly::{cayley_h_to_s, eval_left, eval_right, extract_coefficients, herm_eval, NcPoly};
use ncinterp::realization::gen_feasible_instance;
use ncinterp::repro::{random_one_variable, two_letter_instance};
use ncinterp::tuples::{
    check_gn, random_contractive, random_gn, random_unitary_tuple, sample_graded, sample_nilpotent, schur_tensor,
    shift_tuple, sub_seed, tensor_pencil, two_step_pair, SampleParams,
};
use ncinterp::words::{AdmissibleSet, Word};

type Criterion = (&'static str, Option<Duration>, fn() -> Line);

struct Line {
    passed: bool,
    detail: String,
}

fn line(passed: bool, detail: String) -> Line {
    Line { passed, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Line) -> Line {
    let start = Instant::now();
    let mut l = f();
    let took = start.elapsed();
    match limit {
        Some(limit) => {
            l.passed &= took <= limit;
            l.detail = format!("{}; {took:.2?} (limit {limit:?})", l.detail);
        }
        None => l.detail = format!("{}; {took:.2?}", l.detail),
    }
    l
}

fn random_admissible(n_vars: usize, max_words: usize, rng: &mut ChaCha8Rng) -> AdmissibleSet {
    let pool = AdmissibleSet::lambda_m(n_vars, 3).unwrap();
    let mut words = BTreeSet::from([Word::empty()]);
    let target = rng.random_range(1..=max_words);
    while words.len() < target {
        let candidates: Vec<&Word> = pool
            .iter()
            .filter(|v| !words.contains(*v))
            .filter(|v| v.drop_first().is_none_or(|x| words.contains(&x)))
            .filter(|v| v.drop_last().is_none_or(|x| words.contains(&x)))
            .collect();
        let Some(next) = candidates.choose(rng) else { break };
        words.insert((*next).clone());
    }
    AdmissibleSet::new(n_vars, words).unwrap()
}

fn random_poly(lambda: &AdmissibleSet, out_dim: usize, in_dim: usize, rng: &mut ChaCha8Rng) -> NcPoly {
    let mut p = NcPoly::zero(lambda.n_vars(), out_dim, in_dim, lambda.max_len());
    for w in lambda.iter() {
        p.set(w.clone(), random_complex_gaussian(out_dim, in_dim, rng)).unwrap();
    }
    p
}

fn two_letter_example() -> Line {
    let own = two_letter_instance(&["", "1", "2", "1.2", "2.1"]).unwrap();
    let wider = two_letter_instance(&["", "1", "2", "1.2", "2.1", "1.1"]).unwrap();
    let det = herm_eval(wider.data(), &two_step_pair()).unwrap().determinant().re;
    let lmin = caratheodory_value(&wider, &two_step_pair()).unwrap();
    let opts = CheckOptions::default();
    let wide = nc_caratheodory_check(&wider, &opts).unwrap();
    let narrow = nc_caratheodory_check(&own, &opts).unwrap();
    let ok = (det + 1.0 / 16.0).abs() <= 1e-9
        && lmin < 0.0
        && wide.verdict == Verdict::InfeasibleWithWitness
        && narrow.verdict == Verdict::NoViolationFound
        && narrow.trials > 2000;
    line(
        ok,
        format!(
            "det = {det:.12}, lambda_min = {lmin:.6}, wider: {:?} ({:.6}), own: {:?} after {} trials",
            wide.verdict, wide.violation, narrow.verdict, narrow.trials
        ),
    )
}

fn classical_equivalence() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let budget = Budget { samples: 200, ..Budget::default() };
    let (mut agree, mut total, mut infeasible) = (0, 0, 0);
    for i in 0..250u64 {
        let m = rng.random_range(0..=4usize);
        let d = if i < 200 { 1 } else { rng.random_range(1..=3usize) };
        let (c, s) = random_one_variable(m, d, &mut rng);
        // the shift is schedule entry 0; samples stay within dimension m + 1
        let opts = CheckOptions {
            budget: Budget { max_dim: Some(m + 1), ..budget.clone() },
            seed: sub_seed(7, i),
            ..CheckOptions::default()
        };
        let toeplitz = classical_caratheodory(&c, opts.tol).unwrap();
        let nc = nc_caratheodory_check(&CaratheodoryInstance::one_variable(&c).unwrap(), &opts).unwrap();
        agree += usize::from(toeplitz == (nc.verdict == Verdict::NoViolationFound));
        let schur = classical_cf(&s, opts.tol).unwrap();
        let nc = nc_cf_check(&CFInstance::one_variable(&s).unwrap(), &opts).unwrap();
        agree += usize::from(schur == (nc.verdict == Verdict::NoViolationFound));
        infeasible += usize::from(!toeplitz) + usize::from(!schur);
        total += 2;
    }
    line(agree == total, format!("{agree}/{total} verdicts agree ({infeasible} infeasible), {} samples each", budget.samples))
}

fn structural_identities() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trials = 200;
    let mut shift_res: f64 = 0.0;
    for _ in 0..trials {
        let m = rng.random_range(0..=4usize);
        let d = rng.random_range(1..=3usize);
        let sh = shift_tuple(&AdmissibleSet::lambda_m(1, m).unwrap()).unwrap();
        let mut c: Vec<CMat> = (0..=m).map(|_| random_complex_gaussian(d, d, &mut rng)).collect();
        c[0] = hermitian_part(&c[0]);
        let mut p = NcPoly::zero(1, d, d, m);
        for (k, ck) in c.iter().enumerate() {
            let ck = if k == 0 { ck * real(0.5) } else { ck.clone() };
            p.set(Word::from_letters(&vec![1; k]), ck).unwrap();
        }
        let l = eval_left(&p, &sh).unwrap();
        shift_res = shift_res.max(max_abs_diff(&(&l + l.adjoint()), &build_toeplitz(&c).unwrap()));
        let s: Vec<CMat> = (0..=m).map(|_| random_complex_gaussian(d, d + 1, &mut rng)).collect();
        let q = CFInstance::one_variable(&s).unwrap().poly();
        shift_res = shift_res.max(max_abs_diff(&eval_left(&q, &sh).unwrap(), &build_schur_matrix(&s).unwrap()));
    }

    let (mut gn_res, mut pencil_res, mut contr_res, mut closure_res): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for t in 0..trials as u64 {
        let n_vars = rng.random_range(1..=3usize);
        let dim = n_vars + rng.random_range(0..=3usize);
        let g = random_gn(dim, n_vars, sub_seed(30, t));
        let report = check_gn(&g, 1e-9);
        gn_res = gn_res.max(report.worst_residual);
        pencil_res = pencil_res.max(report.detail[4].1);
        let k = rng.random_range(1..=3usize);
        let u = random_unitary_tuple(n_vars, k, sub_seed(31, t));
        pencil_res = pencil_res
            .max(unitarity_residual(&tensor_pencil(&u, &g).unwrap()))
            .max(unitarity_residual(&tensor_pencil(&g, &u).unwrap()));

        // contractive C: both pencils are contractions; strictly contractive C:
        // norm at most max ‖C_k‖
        let c = random_contractive(n_vars, k, 1.0, true, sub_seed(32, t));
        let excess = |x: &CMat, bound: f64| (spectral_norm(x) - bound).max(0.0);
        contr_res = contr_res
            .max(excess(&tensor_pencil(&g, &c).unwrap(), 1.0))
            .max(excess(&tensor_pencil(&c, &g).unwrap(), 1.0));
        let r = rng.random_range(0.1..0.99);
        let d = random_contractive(n_vars, k, r, false, sub_seed(33, t));
        let bound = d.norms().into_iter().fold(0.0, f64::max);
        contr_res = contr_res
            .max(excess(&tensor_pencil(&g, &d).unwrap(), bound))
            .max(excess(&tensor_pencil(&d, &g).unwrap(), bound));

        closure_res = closure_res
            .max(check_gn(&schur_tensor(&g, &u).unwrap(), 1e-9).worst_residual)
            .max(check_gn(&schur_tensor(&u, &g).unwrap(), 1e-9).worst_residual);
    }
    let ok = shift_res <= 1e-13 && gn_res <= 1e-9 && pencil_res <= 1e-9 && contr_res <= 1e-9 && closure_res <= 1e-9;
    line(
        ok,
        format!(
            "{trials} trials each: shift {shift_res:.1e}, G_N {gn_res:.1e}, pencils {pencil_res:.1e}, \
             contractivity {contr_res:.1e}, Schur-tensor closure {closure_res:.1e}"
        ),
    )
}

fn forward_soundness() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for i in 0..100u64 {
        let n_vars = rng.random_range(1..=3usize);
        let dim_y = rng.random_range(1..=2usize);
        let dim_h = rng.random_range(n_vars.max(dim_y)..=8);
        let lambda = random_admissible(n_vars, 12, &mut rng);
        let (inst, _) = gen_feasible_instance(n_vars, &lambda, dim_h, dim_y, sub_seed(40, i)).unwrap();
        let opts = CheckOptions { seed: i, ..CheckOptions::default() };
        let report = nc_caratheodory_check(&inst, &opts).unwrap();
        worst = worst.min(report.violation);
        if report.verdict != Verdict::NoViolationFound {
            failures.push(i);
        }
    }
    line(failures.is_empty(), format!("100 instances, infeasible: {failures:?}, smallest lambda_min seen {worst:.3e}"))
}

fn cayley_exactness() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let n_vars = rng.random_range(1..=3usize);
        let d = rng.random_range(1..=2usize);
        let lambda = random_admissible(n_vars, 12, &mut rng);
        let order = lambda.max_len();
        let params = SampleParams::new(lambda.len().max(2));
        let t = if i % 2 == 0 {
            sample_graded(&lambda, sub_seed(50, i), &params)
        } else {
            sample_nilpotent(&lambda, sub_seed(50, i), &params)
        };
        // f supported on every word up to the order, constant term near I
        let full = AdmissibleSet::lambda_m(n_vars, order).unwrap();
        let mut f = random_poly(&full, d, d, &mut rng).scale(real(0.3));
        f.set(Word::empty(), identity(d) + random_complex_gaussian(d, d, &mut rng) * real(0.1)).unwrap();

        let ft = eval_right(&f, &t).unwrap();
        let id = identity(ft.nrows());
        let direct = (&ft - &id) * inverse_guarded(&(&ft + &id), MAX_CONDITION).unwrap();
        let series = eval_right(&cayley_h_to_s(&f, order).unwrap(), &t).unwrap();
        worst = worst.max(max_abs_diff(&direct, &series));
    }
    line(worst <= 1e-8, format!("100 trials, worst residual {worst:.2e}"))
}

fn extraction_round_trip() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut largest = 0;
    for _ in 0..100 {
        let n_vars = rng.random_range(1..=3usize);
        let (dy, du) = (rng.random_range(1..=2usize), rng.random_range(1..=2usize));
        let lambda = random_admissible(n_vars, 12, &mut rng);
        largest = largest.max(lambda.len());
        let p = random_poly(&lambda, dy, du, &mut rng);
        let got = extract_coefficients(|t| eval_right(&p, t), &lambda, dy, du).unwrap();
        for w in lambda.iter() {
            worst = worst.max(max_abs_diff(&got[w], &p.coeff(w)));
        }
        // evaluation happened in dimension #Λ
        assert_eq!(shift_tuple(&lambda).unwrap().dim(), lambda.len());
    }
    line(worst <= 1e-9, format!("100 trials, #Lambda up to {largest}, worst coefficient error {worst:.2e}"))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("two-letter example on its own and a wider index set", Some(Duration::from_secs(10)), two_letter_example),
        ("classical equivalence for one variable", Some(Duration::from_secs(60)), classical_equivalence),
        ("structural identities", None, structural_identities),
        ("forward soundness of generated instances", Some(Duration::from_secs(300)), forward_soundness),
        ("Cayley exactness on nilpotent tuples", None, cayley_exactness),
        ("coefficient extraction round trip", None, extraction_round_trip),
    ];
    let mut all = true;
    for (k, (name, limit, f)) in criteria.into_iter().enumerate() {
        let l = timed(limit, f);
        all &= l.passed;
        println!("{} criterion {}: {name}: {}", if l.passed { "PASS" } else { "FAIL" }, k + 1, l.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
