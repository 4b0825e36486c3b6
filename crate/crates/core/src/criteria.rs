//! Feasibility tests for the Carathéodory and Carathéodory–Fejér problems.
//!
//! One-variable data are decided exactly by the Toeplitz and Schur matrices.
//! For `N` variables a problem is infeasible iff some contractive,
//! `Λ`-jointly nilpotent matrix tuple `T` makes `2 Re p(T)` fail to be
//! positive semidefinite (resp. makes `‖q(T)‖ > 1`). The checks here search
//! for such a tuple: a hit is an exact certificate, a miss is only evidence.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, hermitian_function, min_eigenvalue, real, spectral_norm, zeros, CMat, C64};
use crate::ncpoly::{eval_right, herm_eval, HermitianData, NcPoly};
use crate::tuples::{
    block_triangular_nilpotent, check_contractive, check_lambda_nilpotent, sample_graded, sample_nilpotent,
    shift_tuple, sub_seed, MatrixTuple, SampleParams,
};
use crate::words::{AdmissibleSet, Word};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_OPT_ITERS: usize = 50;
/// Tolerance used when re-validating a witness before it is reported.
pub const WITNESS_CLASS_TOL: f64 = 1e-10;
/// Initial step of the refinement search.
pub const DEFAULT_STEP: f64 = 0.25;
/// Number of best-scoring samples handed to the refinement search.
pub const REFINE_CANDIDATES: usize = 3;

/// Block Toeplitz matrix with `c_0` on the diagonal, `c_k` on the `k`-th
/// block subdiagonal and `c_k*` on the `k`-th block superdiagonal.
pub fn build_toeplitz(c: &[CMat]) -> Result<CMat> {
    let d = block_dim(c)?;
    if c[0].ncols() != d {
        return Err(Error::DimensionMismatch("Toeplitz blocks must be square".into()));
    }
    let m = c.len();
    let mut out = zeros(m * d, m * d);
    for i in 0..m {
        for j in 0..m {
            let block = if i >= j { c[i - j].clone() } else { c[j - i].adjoint() };
            out.view_mut((i * d, j * d), (d, d)).copy_from(&block);
        }
    }
    Ok(out)
}

/// Lower-triangular block Toeplitz matrix with `s_k` on the `k`-th block
/// subdiagonal.
pub fn build_schur_matrix(s: &[CMat]) -> Result<CMat> {
    let (dy, du) = block_shape(s)?;
    let m = s.len();
    let mut out = zeros(m * dy, m * du);
    for i in 0..m {
        for j in 0..=i {
            out.view_mut((i * dy, j * du), (dy, du)).copy_from(&s[i - j]);
        }
    }
    Ok(out)
}

fn block_shape(blocks: &[CMat]) -> Result<(usize, usize)> {
    let first = blocks.first().ok_or_else(|| Error::InvalidData("no coefficients given".into()))?;
    let shape = first.shape();
    if blocks.iter().any(|b| b.shape() != shape) {
        return Err(Error::DimensionMismatch("coefficients have different shapes".into()));
    }
    Ok(shape)
}

fn block_dim(blocks: &[CMat]) -> Result<usize> {
    Ok(block_shape(blocks)?.0)
}

/// `λ_min` of the Toeplitz matrix.
pub fn toeplitz_min_eigenvalue(c: &[CMat]) -> Result<f64> {
    Ok(min_eigenvalue(&build_toeplitz(c)?))
}

/// Feasible iff the Toeplitz matrix is positive semidefinite up to `tol`.
pub fn classical_caratheodory(c: &[CMat], tol: f64) -> Result<bool> {
    Ok(toeplitz_min_eigenvalue(c)? >= -tol)
}

pub fn schur_norm(s: &[CMat]) -> Result<f64> {
    Ok(spectral_norm(&build_schur_matrix(s)?))
}

/// Feasible iff the Schur matrix is contractive up to `tol`.
pub fn classical_cf(s: &[CMat], tol: f64) -> Result<bool> {
    Ok(schur_norm(s)? <= 1.0 + tol)
}

/// Carathéodory data: `{c_w}_{w∈Λ}` with `c_∅ ⪰ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianData", into = "HermitianData")]
pub struct CaratheodoryInstance {
    data: HermitianData,
}

/// Lower bound accepted for `λ_min(c_∅)`.
pub const CONSTANT_TERM_FLOOR: f64 = -1e-10;

impl TryFrom<HermitianData> for CaratheodoryInstance {
    type Error = Error;

    fn try_from(data: HermitianData) -> Result<Self> {
        CaratheodoryInstance::new(data)
    }
}

impl From<CaratheodoryInstance> for HermitianData {
    fn from(inst: CaratheodoryInstance) -> Self {
        inst.data
    }
}

impl CaratheodoryInstance {
    pub fn new(data: HermitianData) -> Result<Self> {
        if data.lambda().is_empty() {
            return Err(Error::InvalidData("the index set is empty".into()));
        }
        let c0 = data.coeff(&Word::empty());
        let low = min_eigenvalue(&c0);
        if data.dim() > 0 && low < CONSTANT_TERM_FLOOR {
            return Err(Error::InvalidData(format!("constant coefficient is not positive semidefinite (λ_min = {low:.3e})")));
        }
        Ok(CaratheodoryInstance { data })
    }

    pub fn from_coeffs(lambda: AdmissibleSet, dim: usize, coeffs: BTreeMap<Word, CMat>) -> Result<Self> {
        CaratheodoryInstance::new(HermitianData::new(lambda, dim, coeffs)?)
    }

    /// One-variable data `c_0, …, c_m` on `Λ_m`.
    pub fn one_variable(c: &[CMat]) -> Result<Self> {
        let d = block_dim(c)?;
        let lambda = AdmissibleSet::lambda_m(1, c.len() - 1)?;
        let coeffs = c.iter().enumerate().map(|(k, m)| (Word::from_letters(&vec![1; k]), m.clone())).collect();
        CaratheodoryInstance::from_coeffs(lambda, d, coeffs)
    }

    pub fn data(&self) -> &HermitianData {
        &self.data
    }

    pub fn lambda(&self) -> &AdmissibleSet {
        self.data.lambda()
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    /// The same data tested against a wider index set.
    pub fn with_lambda(&self, wider: AdmissibleSet) -> Result<Self> {
        CaratheodoryInstance::new(self.data.with_lambda(wider)?)
    }

    /// `c̃_w = c_∅^{-1/2} c_w c_∅^{-1/2}`; requires `c_∅ ≻ 0`.
    pub fn normalized(&self) -> Result<Self> {
        let c0 = self.data.coeff(&Word::empty());
        let low = min_eigenvalue(&c0);
        if !(low > 0.0) || linalg::condition_number(&c0) > linalg::MAX_CONDITION {
            return Err(Error::Singular("normalization needs an invertible constant coefficient".into()));
        }
        let r = hermitian_function(&c0, |x| 1.0 / x.sqrt());
        let coeffs = self.data.coeffs().iter().map(|(w, c)| (w.clone(), &r * c * &r)).collect();
        let mut out = CaratheodoryInstance::from_coeffs(self.lambda().clone(), self.dim(), coeffs)?;
        // the congruence of c_∅ is the identity up to rounding; store it exactly
        let mut fixed = out.data.coeffs().clone();
        fixed.insert(Word::empty(), linalg::identity(self.dim()));
        out.data = HermitianData::new(self.lambda().clone(), self.dim(), fixed)?;
        Ok(out)
    }
}

/// Carathéodory–Fejér data `{s_w}_{w∈Λ}`, each `out_dim × in_dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CfRepr", into = "CfRepr")]
pub struct CFInstance {
    lambda: AdmissibleSet,
    out_dim: usize,
    in_dim: usize,
    coeffs: BTreeMap<Word, CMat>,
}

#[derive(Serialize, Deserialize)]
struct CfRepr {
    lambda: AdmissibleSet,
    out_dim: usize,
    in_dim: usize,
    #[serde(with = "json::coeff_map")]
    coeffs: BTreeMap<Word, CMat>,
}

impl TryFrom<CfRepr> for CFInstance {
    type Error = Error;

    fn try_from(r: CfRepr) -> Result<Self> {
        CFInstance::new(r.lambda, r.out_dim, r.in_dim, r.coeffs)
    }
}

impl From<CFInstance> for CfRepr {
    fn from(i: CFInstance) -> Self {
        CfRepr { lambda: i.lambda, out_dim: i.out_dim, in_dim: i.in_dim, coeffs: i.coeffs }
    }
}

impl CFInstance {
    pub fn new(lambda: AdmissibleSet, out_dim: usize, in_dim: usize, coeffs: BTreeMap<Word, CMat>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidData("the index set is empty".into()));
        }
        for (w, c) in &coeffs {
            if !lambda.contains(w) {
                return Err(Error::InvalidData(format!("coefficient key {w:?} is not in the index set")));
            }
            if c.shape() != (out_dim, in_dim) {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient at {w:?} is {}x{}, expected {out_dim}x{in_dim}",
                    c.nrows(),
                    c.ncols()
                )));
            }
        }
        Ok(CFInstance { lambda, out_dim, in_dim, coeffs })
    }

    /// One-variable data `s_0, …, s_m` on `Λ_m`.
    pub fn one_variable(s: &[CMat]) -> Result<Self> {
        let (dy, du) = block_shape(s)?;
        let lambda = AdmissibleSet::lambda_m(1, s.len() - 1)?;
        let coeffs = s.iter().enumerate().map(|(k, m)| (Word::from_letters(&vec![1; k]), m.clone())).collect();
        CFInstance::new(lambda, dy, du, coeffs)
    }

    pub fn lambda(&self) -> &AdmissibleSet {
        &self.lambda
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn coeffs(&self) -> &BTreeMap<Word, CMat> {
        &self.coeffs
    }

    pub fn with_lambda(&self, wider: AdmissibleSet) -> Result<Self> {
        CFInstance::new(wider, self.out_dim, self.in_dim, self.coeffs.clone())
    }

    /// `q(z) = Σ_{w∈Λ} s_w z^w`
    pub fn poly(&self) -> NcPoly {
        NcPoly::from_coeffs(
            self.lambda.n_vars(),
            self.out_dim,
            self.in_dim,
            self.lambda.max_len(),
            self.coeffs.iter().map(|(w, c)| (w.clone(), c.clone())),
        )
        .expect("keys were validated against Λ")
    }

    fn map_coeffs(&self, out_dim: usize, in_dim: usize, f: impl Fn(&CMat) -> CMat) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|(w, c)| (w.clone(), f(c))).collect();
        CFInstance::new(self.lambda.clone(), out_dim, in_dim, coeffs)
    }

    /// `q̃ = −W* q` where `s_∅ = W|s_∅|` is a polar decomposition, so that
    /// `q̃_∅ = −|s_∅|` is self-adjoint and negative semidefinite. Requires
    /// square coefficients.
    pub fn polar_normalized(&self) -> Result<Self> {
        if self.out_dim != self.in_dim {
            return Err(Error::DimensionMismatch("polar normalization needs square coefficients".into()));
        }
        let s0 = self.coeffs.get(&Word::empty()).cloned().unwrap_or_else(|| zeros(self.out_dim, self.in_dim));
        let w = polar_unitary(&s0);
        let wa = w.adjoint() * real(-1.0);
        self.map_coeffs(self.out_dim, self.in_dim, |c| &wa * c)
    }

    /// `s̃_w = [[0, 0], [s_w, 0]]` acting on `U ⊕ Y`; square coefficients with
    /// the same evaluation norms.
    pub fn square_embedded(&self) -> Result<Self> {
        let n = self.in_dim + self.out_dim;
        let (du, dy) = (self.in_dim, self.out_dim);
        self.map_coeffs(n, n, |c| {
            let mut m = zeros(n, n);
            m.view_mut((du, 0), (dy, du)).copy_from(c);
            m
        })
    }
}

/// Unitary factor of a polar decomposition `A = W|A|`.
pub fn polar_unitary(a: &CMat) -> CMat {
    let n = a.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    u * v_t
}

/// Compression of degenerate data to the range of `c_∅`.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// Orthonormal basis `Q` of `ran c_∅`; `None` when no reduction happened.
    pub basis: Option<CMat>,
    pub kernel_residual: f64,
}

/// If `c_∅` is singular (`λ_min < tol`), checks `ker c_∅ ⊆ ker c_w` and
/// `ker c_∅ ⊆ ker c_w*` up to `√tol` and returns the compressed data
/// `Q* c_w Q` on `ran c_∅`. A failed inclusion means no interpolant exists.
pub fn reduce_degenerate(inst: &CaratheodoryInstance, tol: f64) -> Result<(CaratheodoryInstance, Reduction)> {
    let c0 = inst.data.coeff(&Word::empty());
    let (values, vectors) = linalg::hermitian_eigen(&c0);
    if values.first().is_none_or(|&low| low >= tol) {
        return Ok((inst.clone(), Reduction { basis: None, kernel_residual: 0.0 }));
    }
    let kernel: Vec<usize> = (0..values.len()).filter(|&i| values[i] < tol).collect();
    let range: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= tol).collect();
    let k = vectors.select_columns(&kernel);
    let q = vectors.select_columns(&range);
    let mut residual: f64 = 0.0;
    for c in inst.data.coeffs().values() {
        residual = residual.max(spectral_norm(&(c * &k))).max(spectral_norm(&(c.adjoint() * &k)));
    }
    if residual > tol.sqrt() {
        return Err(Error::DataInconsistent(format!(
            "the kernel of the constant coefficient is not annihilated by the data (residual {residual:.3e})"
        )));
    }
    let qa = q.adjoint();
    let coeffs = inst.data.coeffs().iter().map(|(w, c)| (w.clone(), &qa * c * &q)).collect();
    let mut reduced: BTreeMap<Word, CMat> = coeffs;
    reduced.insert(Word::empty(), linalg::hermitian_part(&reduced[&Word::empty()]));
    let out = CaratheodoryInstance::from_coeffs(inst.lambda().clone(), range.len(), reduced)?;
    Ok((out, Reduction { basis: Some(q), kernel_residual: residual }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Caratheodory,
    Cf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    InfeasibleWithWitness,
    NoViolationFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Random samples on top of the deterministic candidates.
    pub samples: usize,
    /// Largest sampled dimension; `None` means `#Λ`.
    pub max_dim: Option<usize>,
    /// Sweeps of the refinement search per refined candidate.
    pub opt_iters: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { samples: DEFAULT_SAMPLES, max_dim: None, opt_iters: DEFAULT_OPT_ITERS }
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub budget: Budget,
    pub seed: u64,
    pub tol: f64,
    /// Tuples evaluated right after the shift; each must be contractive and
    /// `Λ`-jointly nilpotent.
    pub candidates: Vec<MatrixTuple>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { budget: Budget::default(), seed: 0, tol: DEFAULT_TOL, candidates: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub problem: Problem,
    pub verdict: Verdict,
    /// `λ_min(2 Re p(T))` (Carathéodory) or `‖q(T)‖ − 1` (CF) at the reported
    /// tuple: the witness when infeasible, else the worst tuple seen.
    pub violation: f64,
    pub witness: Option<MatrixTuple>,
    pub trials: usize,
    pub seed: u64,
    pub budget: Budget,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl FeasibilityReport {
    pub fn is_infeasible(&self) -> bool {
        self.verdict == Verdict::InfeasibleWithWitness
    }
}

/// `λ_min(2 Re p(T))`
pub fn caratheodory_value(inst: &CaratheodoryInstance, t: &MatrixTuple) -> Result<f64> {
    Ok(min_eigenvalue(&herm_eval(&inst.data, t)?))
}

/// `‖q(T)‖ − 1`
pub fn cf_value(q: &NcPoly, t: &MatrixTuple) -> Result<f64> {
    Ok(spectral_norm(&eval_right(q, t)?) - 1.0)
}

pub fn nc_caratheodory_check(inst: &CaratheodoryInstance, opts: &CheckOptions) -> Result<FeasibilityReport> {
    let score = |t: &MatrixTuple| caratheodory_value(inst, t).map(|v| -v);
    run_check(Problem::Caratheodory, inst.lambda(), &score, opts)
}

pub fn nc_cf_check(inst: &CFInstance, opts: &CheckOptions) -> Result<FeasibilityReport> {
    let q = inst.poly();
    let score = |t: &MatrixTuple| cf_value(&q, t);
    run_check(Problem::Cf, inst.lambda(), &score, opts)
}

/// Candidate number `index` of the deterministic schedule: the shift, then
/// the caller's candidates, then random samples cycling through the sampler
/// families. The tuples are not conjugated: both objectives are invariant
/// under unitary similarity, so conjugation would not change any score.
pub fn scheduled_candidate(lambda: &AdmissibleSet, opts: &CheckOptions, index: usize) -> Result<MatrixTuple> {
    if index == 0 {
        return shift_tuple(lambda);
    }
    let extra = opts.candidates.len();
    if index <= extra {
        return Ok(opts.candidates[index - 1].clone());
    }
    let r = index - 1 - extra;
    let seed = sub_seed(opts.seed, r as u64);
    let max_dim = opts.budget.max_dim.unwrap_or(lambda.len()).max(1);
    let params = SampleParams { max_dim, conjugate: false, direct_sums: true };
    let m = lambda.max_len();
    Ok(match r % 3 {
        0 => sample_nilpotent(lambda, seed, &params),
        2 if lambda.is_full_lambda_m() && max_dim > m => {
            let blocks = random_block_dims(m + 1, max_dim, seed);
            block_triangular_nilpotent(lambda.n_vars(), &blocks, seed)
        }
        _ => sample_graded(lambda, seed, &params),
    })
}

fn random_block_dims(blocks: usize, max_dim: usize, seed: u64) -> Vec<usize> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sub_seed(seed, u64::MAX));
    let mut dims = vec![1; blocks];
    let spare = max_dim - blocks;
    let extra = rng.random_range(0..=spare);
    for _ in 0..extra {
        let i = rng.random_range(0..blocks);
        dims[i] += 1;
    }
    dims
}

fn validate_candidates(lambda: &AdmissibleSet, opts: &CheckOptions) -> Result<()> {
    for (i, t) in opts.candidates.iter().enumerate() {
        if t.n_vars() != lambda.n_vars() {
            return Err(Error::DimensionMismatch(format!("candidate {} has {} matrices", i + 1, t.n_vars())));
        }
        let c = check_contractive(t, WITNESS_CLASS_TOL);
        let n = check_lambda_nilpotent(t, lambda, WITNESS_CLASS_TOL);
        if !c.verdict || !n.verdict {
            return Err(Error::InvalidData(format!(
                "candidate {} is not a contractive Λ-jointly nilpotent tuple (norm excess {:.3e}, boundary residual {:.3e})",
                i + 1,
                c.worst_residual,
                n.worst_residual
            )));
        }
    }
    Ok(())
}

fn nan_low(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

/// Sort key: higher score first, then lower index.
fn ranked(mut scored: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored
}

fn run_check<S>(problem: Problem, lambda: &AdmissibleSet, score: &S, opts: &CheckOptions) -> Result<FeasibilityReport>
where
    S: Fn(&MatrixTuple) -> Result<f64> + Sync,
{
    let start = Instant::now();
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidData("tolerance must be positive".into()));
    }
    validate_candidates(lambda, opts)?;
    let total = 1 + opts.candidates.len() + opts.budget.samples;

    let scored: Vec<(usize, f64)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let t = scheduled_candidate(lambda, opts, i)?;
            Ok((i, nan_low(score(&t)?)))
        })
        .collect::<Result<_>>()?;
    let ranking = ranked(scored);

    // refine the best few; refined tuples compete with the raw samples
    let objective = |t: &MatrixTuple| score(t).map(nan_low).unwrap_or(f64::NEG_INFINITY);
    let top: Vec<(usize, f64)> = ranking.iter().take(REFINE_CANDIDATES).copied().collect();
    let mut pool: Vec<(usize, f64, MatrixTuple)> = top
        .par_iter()
        .map(|&(i, s)| {
            let t = scheduled_candidate(lambda, opts, i)?;
            if opts.budget.opt_iters == 0 {
                return Ok((i, s, t));
            }
            let refined = witness_search(objective, &t, lambda, opts.budget.opt_iters, DEFAULT_STEP);
            let rs = objective(&refined);
            Ok(if rs > s { (i, rs, refined) } else { (i, s, t) })
        })
        .collect::<Result<_>>()?;
    pool.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let sign = match problem {
        Problem::Caratheodory => -1.0,
        Problem::Cf => 1.0,
    };
    for (_, s, t) in &pool {
        if *s <= opts.tol {
            break;
        }
        // fresh exact re-validation of the certificate
        let contractive = check_contractive(t, WITNESS_CLASS_TOL).verdict;
        let nilpotent = check_lambda_nilpotent(t, lambda, WITNESS_CLASS_TOL).verdict;
        let again = score(t)?;
        if contractive && nilpotent && again > opts.tol {
            return Ok(FeasibilityReport {
                problem,
                verdict: Verdict::InfeasibleWithWitness,
                violation: sign * again,
                witness: Some(t.clone()),
                trials: total,
                seed: opts.seed,
                budget: opts.budget.clone(),
                elapsed: start.elapsed(),
            });
        }
    }
    let worst = pool.first().map_or(f64::NEG_INFINITY, |p| p.1);
    Ok(FeasibilityReport {
        problem,
        verdict: Verdict::NoViolationFound,
        violation: sign * worst,
        witness: None,
        trials: total,
        seed: opts.seed,
        budget: opts.budget.clone(),
        elapsed: start.elapsed(),
    })
}

/// Deterministic pattern search that increases `objective` over the nonzero
/// entries of `start`.
///
/// Each entry `r e^{iθ}` is moved in modulus (`r ± step`, and `r → 1`) and in
/// phase (`θ ± step`); a move is kept only if, after rescaling every matrix
/// of norm above 1 back to norm 1, the tuple is still `Λ`-jointly nilpotent
/// and the objective strictly improves. A sweep without improvement halves
/// the step. The first move tried normalizes every matrix to norm 1. The
/// result never scores below `start`.
///
/// Unitary conjugation is not searched: the callers' objectives are
/// invariant under it.
pub fn witness_search<F>(objective: F, start: &MatrixTuple, lambda: &AdmissibleSet, iters: usize, step: f64) -> MatrixTuple
where
    F: Fn(&MatrixTuple) -> f64,
{
    let admissible = |t: &MatrixTuple| {
        check_contractive(t, WITNESS_CLASS_TOL).verdict && check_lambda_nilpotent(t, lambda, WITNESS_CLASS_TOL).verdict
    };
    let mut best = start.clone();
    let mut best_value = objective(&best);
    if !best_value.is_finite() && best_value != f64::INFINITY {
        best_value = f64::NEG_INFINITY;
    }

    let normalized = normalize_all(&best);
    if admissible(&normalized) {
        let v = objective(&normalized);
        if v > best_value {
            best = normalized;
            best_value = v;
        }
    }

    let support: Vec<(usize, usize, usize)> = (0..best.n_vars())
        .flat_map(|k| {
            let m = &best.mats()[k];
            (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| (k, i, j)))
        })
        .filter(|&(k, i, j)| best.mats()[k][(i, j)].norm() > 0.0)
        .collect();
    if support.is_empty() {
        return best;
    }

    let mut step = step;
    for _ in 0..iters {
        let mut improved = false;
        for &(k, i, j) in &support {
            for mv in 0..5 {
                let z = best.mats()[k][(i, j)];
                let (r, theta) = (z.norm(), z.arg());
                let moved = match mv {
                    0 => C64::from_polar(r + step, theta),
                    1 => C64::from_polar((r - step).max(0.0), theta),
                    2 => C64::from_polar(1.0, theta),
                    3 => C64::from_polar(r, theta + step),
                    _ => C64::from_polar(r, theta - step),
                };
                if moved == z {
                    continue;
                }
                let mut mats = best.mats().to_vec();
                mats[k][(i, j)] = moved;
                let candidate = MatrixTuple::new(mats).expect("shape unchanged").clamp_to_contractive();
                if !admissible(&candidate) {
                    continue;
                }
                let v = objective(&candidate);
                if v > best_value {
                    best = candidate;
                    best_value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
            if step < 1e-12 {
                break;
            }
        }
    }
    best
}

fn normalize_all(t: &MatrixTuple) -> MatrixTuple {
    let mats = t
        .mats()
        .iter()
        .map(|m| {
            let n = spectral_norm(m);
            if n > 0.0 {
                m * real(1.0 / n)
            } else {
                m.clone()
            }
        })
        .collect();
    MatrixTuple::new(mats).expect("shape unchanged")
}
