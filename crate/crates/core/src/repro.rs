//! Scripted scenarios: the two-letter example whose data pass on their own
//! index set but fail on a wider one, the single-letter example that stays
//! feasible on every wider set without `g1^{m+1}`, and the one-variable
//! agreement sweep against the Toeplitz and Schur matrices.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::criteria::{
    caratheodory_value, classical_caratheodory, classical_cf, nc_caratheodory_check, nc_cf_check, scheduled_candidate,
    Budget, CFInstance, CaratheodoryInstance, CheckOptions, Verdict,
};
use crate::error::{Error, Result};
use crate::linalg::{self, identity, random_complex_gaussian, real, CMat};
use crate::ncpoly::herm_eval;
use crate::tuples::{sub_seed, two_step_pair};
use crate::words::{AdmissibleSet, Word};

pub const SCENARIOS: [&str; 3] = ["example-4-9", "example-4-10", "classical-equivalence"];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub lines: Vec<String>,
}

impl Outcome {
    fn new(name: &str) -> Self {
        Outcome { name: name.to_string(), passed: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }
}

pub fn run(name: &str, seed: u64) -> Result<Outcome> {
    match name {
        "example-4-9" => two_letter_example(seed),
        "example-4-10" => single_letter_example(seed),
        "classical-equivalence" => classical_equivalence(seed, 200, 50),
        _ => Err(Error::InvalidData(format!("unknown scenario {name:?}; expected one of {}", SCENARIOS.join(", ")))),
    }
}

fn scalar(x: f64) -> CMat {
    CMat::from_element(1, 1, real(x))
}

/// `p(z) = 1/2 + z1/2 + z2/2 + z1z2/4 + z2z1/4` restricted to `keys`.
pub fn two_letter_instance(keys: &[&str]) -> Result<CaratheodoryInstance> {
    let lambda = AdmissibleSet::from_keys(2, keys)?;
    let coeffs = [("", 1.0), ("1", 0.5), ("2", 0.5), ("1.2", 0.25), ("2.1", 0.25)]
        .iter()
        .map(|(k, x)| Ok((k.parse::<Word>()?, scalar(*x))))
        .collect::<Result<BTreeMap<_, _>>>()?;
    CaratheodoryInstance::from_coeffs(lambda, 1, coeffs)
}

pub fn two_letter_example(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new("example-4-9");
    let own = two_letter_instance(&["", "1", "2", "1.2", "2.1"])?;
    let wider = two_letter_instance(&["", "1", "2", "1.2", "2.1", "1.1"])?;
    let pair = two_step_pair();

    let m = herm_eval(wider.data(), &pair)?;
    let det = m.determinant().re;
    out.check((det + 1.0 / 16.0).abs() <= 1e-9, format!("det 2Re p(T) = {det:.12} (expected -1/16)"));
    let lmin = caratheodory_value(&wider, &pair)?;
    out.check(lmin < 0.0, format!("lambda_min 2Re p(T) = {lmin:.6}"));

    let opts = CheckOptions { seed, ..CheckOptions::default() };
    let report = nc_caratheodory_check(&wider, &opts)?;
    out.check(
        report.verdict == Verdict::InfeasibleWithWitness,
        format!("wider index set: {:?} (violation {:.6}, {} trials)", report.verdict, report.violation, report.trials),
    );
    let report = nc_caratheodory_check(&own, &opts)?;
    out.check(
        report.verdict == Verdict::NoViolationFound,
        format!("own index set: {:?} (worst {:.6}, {} trials)", report.verdict, report.violation, report.trials),
    );
    Ok(out)
}

/// Data on `{∅, g1, …, g1^m}` over two letters built from a one-variable
/// Carathéodory function, so the Toeplitz matrix is positive semidefinite.
fn single_letter_instance(m: usize, rng: &mut ChaCha8Rng) -> Result<CaratheodoryInstance> {
    // f = (1/2)(1 + az)(1 - az)^{-1} with |a| < 1: c_0 = 1, c_k = a^k
    let a = linalg::c64(rng.random_range(-0.9..0.9), rng.random_range(-0.4..0.4));
    let mut coeffs = BTreeMap::new();
    let mut power = linalg::c64(1.0, 0.0);
    for k in 0..=m {
        let c = if k == 0 { identity(1) } else { CMat::from_element(1, 1, power) };
        coeffs.insert(Word::from_letters(&vec![1; k]), c);
        power *= a;
    }
    let lambda = AdmissibleSet::new(2, coeffs.keys().cloned())?;
    CaratheodoryInstance::from_coeffs(lambda, 1, coeffs)
}

pub fn single_letter_example(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new("example-4-10");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = Budget { samples: 300, ..Budget::default() };
    for m in 1..=3 {
        let inst = single_letter_instance(m, &mut rng)?;
        let opts = CheckOptions { budget: budget.clone(), seed: sub_seed(seed, m as u64), ..CheckOptions::default() };

        let mut second_zero = true;
        for i in 0..=opts.budget.samples {
            let t = scheduled_candidate(inst.lambda(), &opts, i)?;
            second_zero &= linalg::is_all_zero(t.mat(2));
        }
        out.check(second_zero, format!("m = {m}: every sampled tuple has T2 = 0"));

        let c: Vec<CMat> = (0..=m).map(|k| inst.data().coeff(&Word::from_letters(&vec![1; k]))).collect();
        let toeplitz = classical_caratheodory(&c, opts.tol)?;
        let own = nc_caratheodory_check(&inst, &opts)?;
        out.check(
            toeplitz && own.verdict == Verdict::NoViolationFound,
            format!("m = {m}: Toeplitz feasible = {toeplitz}, own index set {:?}", own.verdict),
        );

        let full = inst.with_lambda(AdmissibleSet::lambda_m(2, m)?)?;
        let wide = nc_caratheodory_check(&full, &opts)?;
        out.check(
            wide.verdict == Verdict::NoViolationFound,
            format!("m = {m}: all words up to length {m}: {:?} (worst {:.6})", wide.verdict, wide.violation),
        );
    }
    Ok(out)
}

/// Random one-variable data: `c_0` Hermitian near `I`, the rest Gaussian with
/// a random scale so both verdicts occur.
pub fn random_one_variable(m: usize, d: usize, rng: &mut ChaCha8Rng) -> (Vec<CMat>, Vec<CMat>) {
    let scale: f64 = rng.random_range(0.05..0.8);
    let mut c: Vec<CMat> = (0..=m).map(|_| random_complex_gaussian(d, d, rng) * real(scale)).collect();
    c[0] = identity(d) + linalg::hermitian_part(&c[0]) * real(0.5);
    let scale: f64 = rng.random_range(0.1..0.7);
    let s: Vec<CMat> = (0..=m).map(|_| random_complex_gaussian(d, d, rng) * real(scale)).collect();
    (c, s)
}

pub fn classical_equivalence(seed: u64, scalar_count: usize, matrix_count: usize) -> Result<Outcome> {
    let mut out = Outcome::new("classical-equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = Budget { samples: 100, ..Budget::default() };
    let (mut agree, mut total, mut infeasible) = (0usize, 0usize, 0usize);
    for i in 0..scalar_count + matrix_count {
        let m = rng.random_range(0..=4usize);
        let d = if i < scalar_count { 1 } else { rng.random_range(1..=3usize) };
        let (c, s) = random_one_variable(m, d, &mut rng);
        let opts = CheckOptions { budget: budget.clone(), seed: sub_seed(seed, i as u64), ..CheckOptions::default() };

        let toeplitz = classical_caratheodory(&c, opts.tol)?;
        let nc = nc_caratheodory_check(&CaratheodoryInstance::one_variable(&c)?, &opts)?;
        agree += usize::from(toeplitz == (nc.verdict == Verdict::NoViolationFound));
        infeasible += usize::from(!toeplitz);

        let schur = classical_cf(&s, opts.tol)?;
        let nc = nc_cf_check(&CFInstance::one_variable(&s)?, &opts)?;
        agree += usize::from(schur == (nc.verdict == Verdict::NoViolationFound));
        infeasible += usize::from(!schur);
        total += 2;
    }
    out.check(
        agree == total,
        format!("{agree}/{total} verdicts agree ({infeasible} infeasible, {scalar_count} scalar + {matrix_count} matrix instances)"),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario_is_an_error() {
        assert!(run("example-9", 0).is_err());
    }

    #[test]
    fn two_letter_example_passes() {
        let out = two_letter_example(0).unwrap();
        assert!(out.passed, "{:#?}", out.lines);
    }

    #[test]
    fn single_letter_example_passes() {
        let out = single_letter_example(3).unwrap();
        assert!(out.passed, "{:#?}", out.lines);
    }

    #[test]
    fn small_classical_sweep_agrees() {
        let out = classical_equivalence(5, 20, 5).unwrap();
        assert!(out.passed, "{:#?}", out.lines);
    }
}
