//! Matrix N-tuples: class membership checks, jointly nilpotent samplers and
//! tensor constructions.
//!
//! Words act on tuples by `T^w = T_{i1} T_{i2} ··· T_{im}` for
//! `w = g_{i1} ··· g_{im}`, so the last letter of a word is applied first.

use std::collections::{BTreeSet, HashMap};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{
    self, complex_gaussian, haar_unitary, identity, kron, random_complex_gaussian, real, spectral_norm, zeros,
    CMat, C64,
};
use crate::words::{AdmissibleSet, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixTupleRepr", into = "MatrixTupleRepr")]
pub struct MatrixTuple {
    dim: usize,
    mats: Vec<CMat>,
}

#[derive(Serialize, Deserialize)]
struct MatrixTupleRepr {
    n_vars: usize,
    dim: usize,
    #[serde(with = "json::matrix_list")]
    mats: Vec<CMat>,
}

impl TryFrom<MatrixTupleRepr> for MatrixTuple {
    type Error = Error;

    fn try_from(r: MatrixTupleRepr) -> Result<Self> {
        if r.mats.len() != r.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "tuple declares n_vars = {} but holds {} matrices",
                r.n_vars,
                r.mats.len()
            )));
        }
        let t = MatrixTuple::new(r.mats)?;
        if t.dim != r.dim && r.n_vars > 0 {
            return Err(Error::DimensionMismatch(format!("tuple declares dim = {} but holds {}", r.dim, t.dim)));
        }
        Ok(t)
    }
}

impl From<MatrixTuple> for MatrixTupleRepr {
    fn from(t: MatrixTuple) -> Self {
        MatrixTupleRepr { n_vars: t.mats.len(), dim: t.dim, mats: t.mats }
    }
}

impl MatrixTuple {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::InvalidData("a tuple needs at least one matrix".into()));
        };
        let dim = first.nrows();
        for (k, m) in mats.iter().enumerate() {
            if m.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {} is {}x{}, expected {dim}x{dim}",
                    k + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(MatrixTuple { dim, mats })
    }

    pub fn zero(n_vars: usize, dim: usize) -> Self {
        MatrixTuple { dim, mats: vec![zeros(dim, dim); n_vars] }
    }

    pub fn n_vars(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    /// `T_k`, 1-based.
    pub fn mat(&self, k: usize) -> &CMat {
        &self.mats[k - 1]
    }

    pub fn word_power(&self, w: &Word) -> CMat {
        let mut out = identity(self.dim);
        for &k in w.letters() {
            out *= self.mat(k);
        }
        out
    }

    /// `T^w` for every requested word, sharing prefixes.
    pub fn word_powers<'a>(&self, words: impl IntoIterator<Item = &'a Word>) -> HashMap<Word, CMat> {
        let mut cache: HashMap<Word, CMat> = HashMap::new();
        for w in words {
            self.power_cached(w, &mut cache);
        }
        cache
    }

    fn power_cached(&self, w: &Word, cache: &mut HashMap<Word, CMat>) {
        if cache.contains_key(w) {
            return;
        }
        let value = match (w.drop_last(), w.last()) {
            (Some(prefix), Some(k)) => {
                self.power_cached(&prefix, cache);
                &cache[&prefix] * self.mat(k)
            }
            _ => identity(self.dim),
        };
        cache.insert(w.clone(), value);
    }

    pub fn scaled(&self, x: C64) -> MatrixTuple {
        MatrixTuple { dim: self.dim, mats: self.mats.iter().map(|m| m * x).collect() }
    }

    /// `(U* T_1 U, …, U* T_N U)`
    pub fn conjugated(&self, u: &CMat) -> MatrixTuple {
        let ua = u.adjoint();
        MatrixTuple { dim: u.ncols(), mats: self.mats.iter().map(|m| &ua * m * u).collect() }
    }

    pub fn direct_sum(&self, other: &MatrixTuple) -> Result<MatrixTuple> {
        same_arity(self, other)?;
        let mats = self.mats.iter().zip(&other.mats).map(|(a, b)| linalg::direct_sum(a, b)).collect();
        Ok(MatrixTuple { dim: self.dim + other.dim, mats })
    }

    pub fn norms(&self) -> Vec<f64> {
        self.mats.iter().map(spectral_norm).collect()
    }

    /// Divides every matrix whose norm exceeds 1 by that norm.
    pub fn clamp_to_contractive(&self) -> MatrixTuple {
        let mats = self
            .mats
            .iter()
            .map(|m| {
                let n = spectral_norm(m);
                if n > 1.0 {
                    m * real(1.0 / n)
                } else {
                    m.clone()
                }
            })
            .collect();
        MatrixTuple { dim: self.dim, mats }
    }
}

fn same_arity(a: &MatrixTuple, b: &MatrixTuple) -> Result<()> {
    if a.n_vars() != b.n_vars() {
        return Err(Error::DimensionMismatch(format!("{}-tuple paired with a {}-tuple", a.n_vars(), b.n_vars())));
    }
    Ok(())
}

/// Outcome of a residual-based class membership test.
///
/// `verdict` holds exactly when `worst_residual <= tolerance`.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub class_name: String,
    pub verdict: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub detail: Vec<(String, f64)>,
}

impl ClassReport {
    fn from_detail(class_name: &str, tolerance: f64, detail: Vec<(String, f64)>, counted: usize) -> Self {
        let worst_residual = detail.iter().take(counted).map(|(_, r)| *r).fold(0.0, f64::max);
        ClassReport {
            class_name: class_name.to_string(),
            verdict: worst_residual <= tolerance,
            worst_residual,
            tolerance,
            detail,
        }
    }
}

/// `‖T_k‖ ≤ 1 + tol` for all `k`.
pub fn check_contractive(t: &MatrixTuple, tol: f64) -> ClassReport {
    let detail: Vec<(String, f64)> =
        t.norms().iter().enumerate().map(|(k, n)| (format!("norm(T{}) - 1", k + 1), (n - 1.0).max(0.0))).collect();
    let counted = detail.len();
    ClassReport::from_detail("contractive", tol, detail, counted)
}

/// `‖T_k‖ ≤ 1 − tol` for all `k`. Residuals are the excess over `1 − tol`,
/// reported against a zero tolerance.
pub fn check_strictly_contractive(t: &MatrixTuple, tol: f64) -> ClassReport {
    let detail: Vec<(String, f64)> = t
        .norms()
        .iter()
        .enumerate()
        .map(|(k, n)| (format!("norm(T{}) - (1 - tol)", k + 1), (n - (1.0 - tol)).max(0.0)))
        .collect();
    let counted = detail.len();
    ClassReport::from_detail("strictly contractive", 0.0, detail, counted)
}

/// Number of random unimodular points used by [`check_gn`].
pub const GN_PENCIL_SAMPLES: usize = 10;
const GN_PENCIL_SEED: u64 = 0x5eed_0f9a;

/// `ζ_1 G_1 + … + ζ_N G_N`
pub fn zeta_pencil(g: &MatrixTuple, zeta: &[C64]) -> CMat {
    let mut out = zeros(g.dim, g.dim);
    for (m, z) in g.mats.iter().zip(zeta) {
        out += m * *z;
    }
    out
}

/// The four orthogonality conditions
/// `Σ G_k*G_k = I`, `G_k*G_j = 0`, `Σ G_kG_k* = I`, `G_kG_j* = 0` (`k ≠ j`).
///
/// The detail also records the worst unitarity defect of `ζ·G` over
/// [`GN_PENCIL_SAMPLES`] fixed random points of the torus; it does not enter
/// the verdict.
pub fn check_gn(g: &MatrixTuple, tol: f64) -> ClassReport {
    let n = g.dim;
    let mut sum_ad = zeros(n, n);
    let mut sum_da = zeros(n, n);
    let mut cross_ad: f64 = 0.0;
    let mut cross_da: f64 = 0.0;
    for (k, a) in g.mats.iter().enumerate() {
        sum_ad += a.adjoint() * a;
        sum_da += a * a.adjoint();
        for (j, b) in g.mats.iter().enumerate() {
            if j != k {
                cross_ad = cross_ad.max(spectral_norm(&(a.adjoint() * b)));
                cross_da = cross_da.max(spectral_norm(&(a * b.adjoint())));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(GN_PENCIL_SEED);
    let pencil = (0..GN_PENCIL_SAMPLES)
        .map(|_| {
            let zeta: Vec<C64> =
                (0..g.n_vars()).map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect();
            linalg::unitarity_residual(&zeta_pencil(g, &zeta))
        })
        .fold(0.0, f64::max);
    let detail = vec![
        ("sum G_k* G_k - I".to_string(), spectral_norm(&(sum_ad - identity(n)))),
        ("G_k* G_j, k != j".to_string(), cross_ad),
        ("sum G_k G_k* - I".to_string(), spectral_norm(&(sum_da - identity(n)))),
        ("G_k G_j*, k != j".to_string(), cross_da),
        ("zeta pencil unitarity".to_string(), pencil),
    ];
    ClassReport::from_detail("G_N", tol, detail, 4)
}

pub fn check_unitary_tuple(u: &MatrixTuple, tol: f64) -> ClassReport {
    let mut detail = Vec::new();
    for (k, m) in u.mats.iter().enumerate() {
        let id = identity(u.dim);
        detail.push((format!("U{}* U{} - I", k + 1, k + 1), spectral_norm(&(m.adjoint() * m - &id))));
        detail.push((format!("U{} U{}* - I", k + 1, k + 1), spectral_norm(&(m * m.adjoint() - &id))));
    }
    let counted = detail.len();
    ClassReport::from_detail("unitary", tol, detail, counted)
}

/// `max_{b ∈ boundary(Λ)} ‖T^b‖ ≤ tol`.
pub fn check_lambda_nilpotent(t: &MatrixTuple, lambda: &AdmissibleSet, tol: f64) -> ClassReport {
    let boundary = lambda.boundary();
    let powers = t.word_powers(boundary.iter());
    let detail: Vec<(String, f64)> =
        boundary.iter().map(|b| (format!("norm(T^{b:?})"), spectral_norm(&powers[b]))).collect();
    let counted = detail.len();
    ClassReport::from_detail("Lambda-nilpotent", tol, detail, counted)
}

/// Basis of `H_Λ` in reverse canonical order: longest words first, `∅` last.
///
/// With this ordering every shift matrix is strictly lower triangular, and for
/// `Λ = Λ_m` in one variable the shift is the standard lower shift.
pub fn basis(lambda: &AdmissibleSet) -> Vec<Word> {
    lambda.iter().rev().cloned().collect()
}

pub fn basis_index(lambda: &AdmissibleSet, w: &Word) -> usize {
    let rank = lambda.words().range(..w.clone()).count();
    lambda.len() - 1 - rank
}

/// Backward shifts on `H_Λ`: `S_k` sends the basis vector `w'g_k` to `w'`
/// and annihilates words that do not end in `g_k`.
///
/// Then `S^w v = v'` when `v = v'w` and `0` otherwise, so `S^w ∅`-components
/// pick out single words and `S^w = 0` for every `w ∉ Λ`.
pub fn shift_tuple(lambda: &AdmissibleSet) -> Result<MatrixTuple> {
    weighted_shift(lambda, lambda.words(), |_, _| real(1.0))
}

/// Shift restricted to `support ⊆ Λ` (which must contain `∅` and be closed
/// under deleting the last letter), with the entry for `v ↦ v'` scaled by
/// `weight(k, v)`. The basis is `support` in reverse canonical order.
pub fn weighted_shift(
    lambda: &AdmissibleSet,
    support: &BTreeSet<Word>,
    mut weight: impl FnMut(usize, &Word) -> C64,
) -> Result<MatrixTuple> {
    if lambda.is_empty() {
        return Err(Error::InvalidData("the shift needs a non-empty index set".into()));
    }
    for v in support {
        if !lambda.contains(v) || v.drop_last().is_some_and(|p| !support.contains(&p)) {
            return Err(Error::InvalidData(format!("support is not a prefix-closed subset of Λ at {v:?}")));
        }
    }
    let order: Vec<&Word> = support.iter().rev().collect();
    let index: HashMap<&Word, usize> = order.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let n = order.len();
    let mut mats = vec![zeros(n, n); lambda.n_vars()];
    for v in &order {
        if let (Some(prefix), Some(k)) = (v.drop_last(), v.last()) {
            mats[k - 1][(index[&prefix], index[v])] = weight(k, v);
        }
    }
    MatrixTuple::new(mats)
}

/// Deterministic sub-seed for trial `index` of a run seeded with `seed`
/// (splitmix64 finalizer over the combined state).
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct SampleParams {
    pub max_dim: usize,
    pub conjugate: bool,
    pub direct_sums: bool,
}

impl SampleParams {
    pub fn new(max_dim: usize) -> Self {
        SampleParams { max_dim: max_dim.max(1), conjugate: true, direct_sums: true }
    }
}

fn random_weight<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let modulus = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.0..=1.0) };
    let phase = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..std::f64::consts::TAU) };
    C64::from_polar(modulus, phase)
}

/// Normalizes each nonzero matrix to norm 1, or with small probability to a
/// random norm below 1.
fn rescale<R: Rng + ?Sized>(t: MatrixTuple, rng: &mut R) -> MatrixTuple {
    let mats = t
        .mats
        .into_iter()
        .map(|m| {
            let n = spectral_norm(&m);
            if n == 0.0 {
                return m;
            }
            let target = if rng.random_bool(0.8) { 1.0 } else { rng.random_range(0.3..1.0) };
            m * real(target / n)
        })
        .collect();
    MatrixTuple { dim: t.dim, mats }
}

/// Random subset of `Λ` containing `∅`, closed under deleting the last
/// letter, with at most `max_size` words.
fn random_tree<R: Rng + ?Sized>(lambda: &AdmissibleSet, max_size: usize, rng: &mut R) -> BTreeSet<Word> {
    if lambda.len() <= max_size && rng.random_bool(0.5) {
        return lambda.words().clone();
    }
    let target = rng.random_range(1..=max_size.min(lambda.len()));
    let mut chosen = BTreeSet::from([Word::empty()]);
    while chosen.len() < target {
        let frontier: Vec<Word> = chosen
            .iter()
            .flat_map(|v| (1..=lambda.n_vars()).map(move |k| v.append(k)))
            .filter(|c| lambda.contains(c) && !chosen.contains(c))
            .collect();
        let Some(next) = frontier.choose(rng) else { break };
        chosen.insert(next.clone());
    }
    chosen
}

fn sample_weighted_shift<R: Rng + ?Sized>(lambda: &AdmissibleSet, max_dim: usize, conjugate: bool, rng: &mut R) -> MatrixTuple {
    let support = random_tree(lambda, max_dim, rng);
    let t = weighted_shift(lambda, &support, |_, _| {
        if rng.random_bool(0.5) {
            complex_gaussian(rng)
        } else {
            random_weight(rng)
        }
    })
    .expect("a random tree is a valid shift support");
    let t = rescale(t, rng);
    if conjugate {
        let u = haar_unitary(t.dim, rng);
        t.conjugated(&u)
    } else {
        t
    }
}

/// A random member of `C^N ∩ Nilp_N(Λ)` built from the backward shift.
///
/// The shift is restricted to a random prefix-closed part of `Λ` of size at
/// most `max_dim`, every nonzero entry gets an independent random weight,
/// each matrix is rescaled to norm at most 1, and the result is conjugated by
/// a Haar unitary. With `direct_sums`, a second independent sample may be
/// appended block-diagonally. For `Λ = {∅}` this is the zero tuple.
///
/// Coverage caveat: it is not known whether these samples, together with
/// [`sample_graded`], reach all of `C^N ∩ Nilp_N(Λ)`.
pub fn sample_nilpotent(lambda: &AdmissibleSet, seed: u64, params: &SampleParams) -> MatrixTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = sample_weighted_shift(lambda, params.max_dim, params.conjugate, &mut rng);
    if params.direct_sums && first.dim < params.max_dim && rng.random_bool(0.25) {
        let second = sample_weighted_shift(lambda, params.max_dim - first.dim, params.conjugate, &mut rng);
        let sum = first.direct_sum(&second).expect("same arity");
        if params.conjugate {
            let u = haar_unitary(sum.dim, &mut rng);
            return sum.conjugated(&u);
        }
        return sum;
    }
    first
}

/// Words labelling paths that end at each node of a labelled DAG on nodes
/// `0..dim`, where an edge `(a, b, k)` with `a < b` means `T_k e_a ∋ e_b`.
fn path_words(dim: usize, edges: &[(usize, usize, usize)]) -> Vec<BTreeSet<Word>> {
    let mut words: Vec<BTreeSet<Word>> = vec![BTreeSet::from([Word::empty()]); dim];
    for b in 0..dim {
        for &(a, to, k) in edges {
            if to == b {
                let incoming: Vec<Word> = words[a].iter().map(|y| y.prepend(k)).collect();
                words[b].extend(incoming);
            }
        }
    }
    words
}

/// A random member of `C^N ∩ Nilp_N(Λ)` supported on a labelled DAG.
///
/// Nodes are basis vectors `0..dim`; an edge `a → b` (`a < b`) with label `k`
/// puts a random weight at `T_k[b, a]`. An entry of `T^w` is a sum over paths
/// spelling `w`, so the tuple is `Λ`-nilpotent as soon as every path word lies
/// in `Λ`; edges that would break this are rejected while the graph grows.
/// This family contains weighted shifts on any prefix-closed support, all
/// strictly lower-triangular patterns for `Λ_m`, and tuples such as a
/// two-step shift paired with a single off-diagonal entry, which are not
/// unitarily equivalent to weighted shifts.
pub fn sample_graded(lambda: &AdmissibleSet, seed: u64, params: &SampleParams) -> MatrixTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_vars = lambda.n_vars();
    let dim = rng.random_range(1..=params.max_dim.max(1));
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    if dim >= 2 {
        let attempts = rng.random_range(1..=3 * dim * n_vars);
        for _ in 0..attempts {
            let a = rng.random_range(0..dim - 1);
            let b = rng.random_range(a + 1..dim);
            let k = rng.random_range(1..=n_vars);
            if edges.contains(&(a, b, k)) {
                continue;
            }
            edges.push((a, b, k));
            let ok = path_words(dim, &edges).iter().flatten().all(|w| lambda.contains(w));
            if !ok {
                edges.pop();
            }
        }
    }
    let mut mats = vec![zeros(dim, dim); n_vars];
    for &(a, b, k) in &edges {
        mats[k - 1][(b, a)] = random_weight(&mut rng);
    }
    let t = rescale(MatrixTuple { dim, mats }, &mut rng);
    if params.conjugate {
        let u = haar_unitary(dim, &mut rng);
        t.conjugated(&u)
    } else {
        t
    }
}

/// Random strictly lower block-triangular tuple for blocks of the given sizes,
/// each matrix rescaled to norm 1 (or left at zero). Any product of
/// `block_dims.len()` factors vanishes, so the tuple lies in `Nilp_N(Λ_m)` for
/// `m = block_dims.len() − 1`.
pub fn block_triangular_nilpotent(n_vars: usize, block_dims: &[usize], seed: u64) -> MatrixTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim: usize = block_dims.iter().sum();
    let offsets: Vec<usize> = block_dims.iter().scan(0, |acc, &d| {
        let start = *acc;
        *acc += d;
        Some(start)
    }).collect();
    let mats = (0..n_vars)
        .map(|_| {
            let mut m = zeros(dim, dim);
            for (bi, &di) in block_dims.iter().enumerate() {
                for (bj, &dj) in block_dims.iter().enumerate().take(bi) {
                    let block = random_complex_gaussian(di, dj, &mut rng);
                    m.view_mut((offsets[bi], offsets[bj]), (di, dj)).copy_from(&block);
                }
            }
            let n = spectral_norm(&m);
            if n > 0.0 {
                m * real(1.0 / n)
            } else {
                m
            }
        })
        .collect();
    MatrixTuple { dim, mats }
}

/// Random member of `G_N`: `G_k = G⁰ P_k` with `G⁰` Haar unitary and
/// `P_1, …, P_N` spectral projections onto a random partition of a Haar
/// orthonormal basis. When `dim ≥ n_vars` every `P_k` is nonzero.
pub fn random_gn(dim: usize, n_vars: usize, seed: u64) -> MatrixTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g0 = haar_unitary(dim, &mut rng);
    let projections = random_resolution(dim, n_vars, &mut rng);
    MatrixTuple { dim, mats: projections.iter().map(|p| &g0 * p).collect() }
}

/// Orthogonal projections summing to the identity, from a random partition of
/// a Haar orthonormal basis.
pub fn random_resolution<R: Rng + ?Sized>(dim: usize, n_vars: usize, rng: &mut R) -> Vec<CMat> {
    let basis = haar_unitary(dim, rng);
    let mut groups: Vec<usize> = (0..dim).map(|i| if i < n_vars { i } else { rng.random_range(0..n_vars) }).collect();
    groups.shuffle(rng);
    (0..n_vars)
        .map(|k| {
            let mut p = zeros(dim, dim);
            for (i, &g) in groups.iter().enumerate() {
                if g == k {
                    let col = basis.column(i);
                    p += col * col.adjoint();
                }
            }
            p
        })
        .collect()
}

/// Complex Householder reflection `I − 2vv*/‖v‖²`.
pub fn householder(v: &CMat) -> CMat {
    let n = v.nrows();
    let norm2 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    identity(n) - (v * v.adjoint()) * real(2.0 / norm2)
}

/// Tuple of unitaries, each a product of `dim` random Householder reflections
/// times a random diagonal phase.
pub fn random_unitary_tuple(n_vars: usize, dim: usize, seed: u64) -> MatrixTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats = (0..n_vars)
        .map(|_| {
            let mut u = CMat::from_diagonal(&nalgebra::DVector::from_fn(dim, |_, _| {
                C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
            }));
            for _ in 0..dim {
                u = householder(&random_complex_gaussian(dim, 1, &mut rng)) * u;
            }
            u
        })
        .collect();
    MatrixTuple { dim, mats }
}

/// Random tuple with every `‖T_k‖` equal to `radius` (or drawn uniformly in
/// `[0, radius]` when `exact` is false).
pub fn random_contractive(n_vars: usize, dim: usize, radius: f64, exact: bool, seed: u64) -> MatrixTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats = (0..n_vars)
        .map(|_| {
            let m = random_complex_gaussian(dim, dim, &mut rng);
            let r = if exact { radius } else { rng.random_range(0.0..=radius) };
            let n = spectral_norm(&m);
            m * real(r / n)
        })
        .collect();
    MatrixTuple { dim, mats }
}

/// `(X_1 ⊗ Y_1, …, X_N ⊗ Y_N)`
pub fn schur_tensor(x: &MatrixTuple, y: &MatrixTuple) -> Result<MatrixTuple> {
    same_arity(x, y)?;
    let mats = x.mats.iter().zip(&y.mats).map(|(a, b)| kron(a, b)).collect();
    Ok(MatrixTuple { dim: x.dim * y.dim, mats })
}

/// `Σ_k X_k ⊗ Y_k`
pub fn tensor_pencil(x: &MatrixTuple, y: &MatrixTuple) -> Result<CMat> {
    same_arity(x, y)?;
    let mut out = zeros(x.dim * y.dim, x.dim * y.dim);
    for (a, b) in x.mats.iter().zip(&y.mats) {
        out += kron(a, b);
    }
    Ok(out)
}

/// The pair `(T1, T2)` on `C³` with `T1` the two-step upper shift and `T2` the
/// single entry `E_{12}`. `T1² ≠ 0`, while `T1T2 = 0`, `T2T1 = E_{13}` and
/// every word of length three vanishes.
pub fn two_step_pair() -> MatrixTuple {
    let t1 = linalg::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
    let t2 = linalg::from_real_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
    MatrixTuple { dim: 3, mats: vec![t1, t2] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, from_real_rows, max_abs_diff, unitarity_residual};
    use proptest::prelude::*;
    use rand::Rng;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn set(n: usize, keys: &[&str]) -> AdmissibleSet {
        AdmissibleSet::from_keys(n, keys).unwrap()
    }

    fn lambda_49() -> AdmissibleSet {
        set(2, &["", "1", "2", "1.2", "2.1"])
    }

    #[test]
    fn contractive_checks() {
        assert!(check_contractive(&MatrixTuple::zero(2, 3), 1e-8).verdict);
        assert!(check_contractive(&shift_tuple(&lambda_49()).unwrap(), 1e-8).verdict);
        let big = MatrixTuple::new(vec![identity(2) * real(2.0), zeros(2, 2)]).unwrap();
        let report = check_contractive(&big, 1e-8);
        assert!(!report.verdict);
        assert!((report.worst_residual - 1.0).abs() < 1e-12);
        assert!(!check_strictly_contractive(&shift_tuple(&lambda_49()).unwrap(), 1e-8).verdict);
        assert!(check_strictly_contractive(&MatrixTuple::zero(1, 2), 1e-8).verdict);
    }

    #[test]
    fn gn_examples() {
        let coord = MatrixTuple::new(vec![
            from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]),
            from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]),
        ])
        .unwrap();
        assert!(check_gn(&coord, 1e-10).verdict);
        let scalar = MatrixTuple::new(vec![identity(1), zeros(1, 1), zeros(1, 1)]).unwrap();
        assert!(check_gn(&scalar, 1e-10).verdict);
        let scalar = MatrixTuple::new(vec![identity(1) * c64(0.6, 0.8), zeros(1, 1)]).unwrap();
        assert!(check_gn(&scalar, 1e-10).verdict);
        let mixed = MatrixTuple::new(vec![identity(2) * real(0.5f64.sqrt()), identity(2) * real(0.5f64.sqrt())]).unwrap();
        let report = check_gn(&mixed, 1e-10);
        assert!(!report.verdict);
        // oracle: G1*G2 = I/2 has norm 1/2
        assert!((report.detail[1].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unitary_examples() {
        let ids = MatrixTuple::new(vec![identity(3), identity(3)]).unwrap();
        assert!(check_unitary_tuple(&ids, 1e-10).verdict);
        assert!(check_unitary_tuple(&random_unitary_tuple(3, 4, 9), 1e-10).verdict);
        assert!(!check_unitary_tuple(&shift_tuple(&lambda_49()).unwrap(), 1e-10).verdict);
    }

    #[test]
    fn nilpotency_of_the_two_step_pair() {
        let t = two_step_pair();
        assert!(!check_lambda_nilpotent(&t, &lambda_49(), 1e-10).verdict);
        let wider = set(2, &["", "1", "2", "1.2", "2.1", "1.1"]);
        assert!(check_lambda_nilpotent(&t, &wider, 1e-10).verdict);
        assert!(check_lambda_nilpotent(&shift_tuple(&lambda_49()).unwrap(), &lambda_49(), 1e-12).verdict);
    }

    #[test]
    fn one_variable_shift_is_the_lower_shift() {
        let s = shift_tuple(&set(1, &["", "1"])).unwrap();
        assert_eq!(s.mat(1), &from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]));
        for m in 0..5 {
            let s = shift_tuple(&AdmissibleSet::lambda_m(1, m).unwrap()).unwrap();
            assert_eq!(s.dim(), m + 1);
            let expected = CMat::from_fn(m + 1, m + 1, |i, j| real(if i == j + 1 { 1.0 } else { 0.0 }));
            assert_eq!(s.mat(1), &expected);
        }
    }

    #[test]
    fn shift_pair_entries() {
        let lambda = lambda_49();
        let s = shift_tuple(&lambda).unwrap();
        let idx = |k: &str| basis_index(&lambda, &w(k));
        let mut s1 = zeros(5, 5);
        s1[(idx(""), idx("1"))] = real(1.0);
        s1[(idx("2"), idx("2.1"))] = real(1.0);
        let mut s2 = zeros(5, 5);
        s2[(idx(""), idx("2"))] = real(1.0);
        s2[(idx("1"), idx("1.2"))] = real(1.0);
        assert_eq!(s.mat(1), &s1);
        assert_eq!(s.mat(2), &s2);
        assert!(s.mats().iter().all(|m| (0..5).all(|i| (i..5).all(|j| m[(i, j)] == real(0.0)))));
    }

    #[test]
    fn shift_detects_every_word() {
        // S^w e_w = e_∅ and S^u e_v = 0 for distinct u, v of one length
        let lambda = set(2, &["", "1", "2", "1.1", "1.2", "2.1", "1.1.2", "2.1.1", "1.2.1"]);
        let s = shift_tuple(&lambda).unwrap();
        let root = basis_index(&lambda, &Word::empty());
        for u in lambda.iter() {
            let p = s.word_power(u);
            for v in lambda.iter().filter(|v| v.len() == u.len()) {
                let expected = if u == v { real(1.0) } else { real(0.0) };
                assert_eq!(p[(root, basis_index(&lambda, v))], expected);
            }
        }
        for b in lambda.boundary() {
            assert!(linalg::is_all_zero(&s.word_power(&b)));
        }
    }

    #[test]
    fn shift_rejects_empty_set() {
        let empty = AdmissibleSet::new(1, []).unwrap();
        assert!(shift_tuple(&empty).is_err());
    }

    #[test]
    fn unit_weights_give_the_shift() {
        let lambda = lambda_49();
        let t = weighted_shift(&lambda, lambda.words(), |_, _| real(1.0)).unwrap();
        assert_eq!(t, shift_tuple(&lambda).unwrap());
    }

    #[test]
    fn trivial_index_set_gives_zero_samples() {
        let lambda = set(2, &[""]);
        for seed in 0..20 {
            let t = sample_nilpotent(&lambda, seed, &SampleParams::new(3));
            assert!(t.mats().iter().all(linalg::is_all_zero));
            let t = sample_graded(&lambda, seed, &SampleParams::new(3));
            assert!(t.mats().iter().all(linalg::is_all_zero));
        }
    }

    #[test]
    fn block_triangular_examples() {
        let t = block_triangular_nilpotent(2, &[2], 1);
        assert!(t.mats().iter().all(linalg::is_all_zero));
        let t = block_triangular_nilpotent(2, &[1, 1, 1], 3);
        for word in Word::all_of_length(2, 3) {
            assert!(linalg::max_abs(&t.word_power(&word)) < 1e-15);
        }
        assert!(t.mats().iter().all(|m| (0..3).all(|i| (i..3).all(|j| m[(i, j)] == real(0.0)))));
    }

    #[test]
    fn graded_family_contains_the_two_step_pattern() {
        // the two-step pair, reindexed so that it is lower triangular
        let pair = two_step_pair();
        let rev = CMat::from_fn(3, 3, |i, j| real(if i + j == 2 { 1.0 } else { 0.0 }));
        let lower = pair.conjugated(&rev);
        let edges = vec![(0, 1, 1), (1, 2, 1), (1, 2, 2)];
        let words = path_words(3, &edges);
        let wider = set(2, &["", "1", "2", "1.2", "2.1", "1.1"]);
        assert!(words.iter().flatten().all(|w| wider.contains(w)));
        assert!(!words.iter().flatten().all(|w| lambda_49().contains(w)));
        let mut mats = vec![zeros(3, 3); 2];
        for &(a, b, k) in &edges {
            mats[k - 1][(b, a)] = real(1.0);
        }
        assert_eq!(MatrixTuple::new(mats).unwrap(), lower);
    }

    #[test]
    fn random_gn_coordinate_case() {
        let g = random_gn(3, 3, 5);
        assert!(check_gn(&g, 1e-10).verdict);
        assert!(g.mats().iter().all(|m| !linalg::is_all_zero(m)));
    }

    #[test]
    fn schur_tensor_with_identities() {
        let x = random_contractive(2, 2, 1.0, true, 4);
        let ids = MatrixTuple::new(vec![identity(3), identity(3)]).unwrap();
        let st = schur_tensor(&x, &ids).unwrap();
        for k in 1..=2 {
            assert_eq!(st.mat(k), &kron(x.mat(k), &identity(3)));
        }
    }

    #[test]
    fn json_round_trip() {
        let t = sample_graded(&lambda_49(), 3, &SampleParams::new(4));
        let text = serde_json::to_string(&t).unwrap();
        let back: MatrixTuple = serde_json::from_str(&text).unwrap();
        assert_eq!(t, back);
        assert!(serde_json::from_str::<MatrixTuple>(r#"{"n_vars":2,"dim":1,"mats":[[[1]]]}"#).is_err());
    }

    #[test]
    fn sub_seeds_are_distinct() {
        let seeds: BTreeSet<u64> = (0..1000).map(|i| sub_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
    }

    fn random_admissible(n_vars: usize, seed: u64) -> AdmissibleSet {
        // grow from ∅ by adding words whose both deletions are present
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = AdmissibleSet::lambda_m(n_vars, 3).unwrap();
        let mut words = BTreeSet::from([Word::empty()]);
        let target = rng.random_range(1..=10);
        while words.len() < target {
            let candidates: Vec<&Word> = full
                .iter()
                .filter(|v| !words.contains(*v))
                .filter(|v| v.drop_first().is_none_or(|x| words.contains(&x)))
                .filter(|v| v.drop_last().is_none_or(|x| words.contains(&x)))
                .collect();
            let Some(next) = candidates.choose(&mut rng) else { break };
            words.insert((*next).clone());
        }
        AdmissibleSet::new(n_vars, words).unwrap()
    }

    #[test]
    fn samplers_stay_in_class_over_many_seeds() {
        for seed in 0..1000u64 {
            let lambda = random_admissible(1 + (seed % 3) as usize, seed);
            let params = SampleParams::new(lambda.len());
            for t in [sample_nilpotent(&lambda, seed, &params), sample_graded(&lambda, seed, &params)] {
                assert!(t.dim() <= params.max_dim);
                assert!(check_lambda_nilpotent(&t, &lambda, 1e-10).verdict, "seed {seed}");
                assert!(check_contractive(&t, 1e-10).verdict, "seed {seed}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn conjugation_preserves_nilpotency(seed in any::<u64>()) {
            let lambda = random_admissible(2, seed);
            let t = sample_graded(&lambda, seed, &SampleParams { max_dim: 5, conjugate: false, direct_sums: false });
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = haar_unitary(t.dim(), &mut rng);
            let before = check_lambda_nilpotent(&t, &lambda, 1e-10).verdict;
            let after = check_lambda_nilpotent(&t.conjugated(&u), &lambda, 1e-10).verdict;
            prop_assert_eq!(before, after);
            let wider = AdmissibleSet::lambda_m(2, 0).unwrap();
            let before = check_lambda_nilpotent(&t, &wider, 1e-10).verdict;
            let after = check_lambda_nilpotent(&t.conjugated(&u), &wider, 1e-10).verdict;
            prop_assert_eq!(before, after);
        }

        #[test]
        fn block_triangular_is_lambda_m_nilpotent(seed in any::<u64>(), n_vars in 1usize..4, m in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dims: Vec<usize> = (0..=m).map(|_| rng.random_range(1..3)).collect();
            let t = block_triangular_nilpotent(n_vars, &dims, seed);
            let lambda = AdmissibleSet::lambda_m(n_vars, m).unwrap();
            prop_assert!(check_lambda_nilpotent(&t, &lambda, 1e-12).verdict);
            prop_assert!(check_contractive(&t, 1e-12).verdict);
        }

        #[test]
        fn random_gn_is_in_gn(seed in any::<u64>(), n_vars in 1usize..4, extra in 0usize..4) {
            let g = random_gn(n_vars + extra, n_vars, seed);
            let report = check_gn(&g, 1e-10);
            prop_assert!(report.verdict);
            prop_assert!(report.detail[4].1 <= 1e-10);
            let sum = g.mats().iter().fold(zeros(g.dim(), g.dim()), |acc, m| acc + m.adjoint() * m);
            prop_assert!(max_abs_diff(&sum, &identity(g.dim())) <= 1e-12);
        }

        #[test]
        fn pencils_of_unitaries_and_gn_are_unitary(seed in any::<u64>(), n_vars in 1usize..4, d in 1usize..4) {
            let g = random_gn(n_vars + d - 1, n_vars, seed);
            let u = random_unitary_tuple(n_vars, d, sub_seed(seed, 1));
            prop_assert!(unitarity_residual(&tensor_pencil(&u, &g).unwrap()) <= 1e-9);
            prop_assert!(unitarity_residual(&tensor_pencil(&g, &u).unwrap()) <= 1e-9);
        }
    }
}
