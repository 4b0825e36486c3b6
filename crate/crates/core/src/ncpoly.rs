//! Truncated non-commutative series with matrix coefficients.
//!
//! An [`NcPoly`] is `Σ_w f_w z^w` over words of length at most `order`, with
//! every `f_w` of shape `out_dim × in_dim`. Only nonzero coefficients are
//! stored and nothing is thresholded, so algebra on exactly representable
//! data stays exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, c64, hermitian_part, identity, inverse_guarded, kron, real, zeros, CMat, C64, MAX_CONDITION};
use crate::tuples::MatrixTuple;
use crate::words::{AdmissibleSet, Word};

/// Largest row or column count an evaluation may produce.
pub const EVAL_DIM_CAP: usize = 1 << 13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NcPolyRepr", into = "NcPolyRepr")]
pub struct NcPoly {
    n_vars: usize,
    order: usize,
    out_dim: usize,
    in_dim: usize,
    coeffs: BTreeMap<Word, CMat>,
}

#[derive(Serialize, Deserialize)]
struct NcPolyRepr {
    n_vars: usize,
    order: usize,
    out_dim: usize,
    in_dim: usize,
    #[serde(with = "json::coeff_map")]
    coeffs: BTreeMap<Word, CMat>,
}

impl TryFrom<NcPolyRepr> for NcPoly {
    type Error = Error;

    fn try_from(r: NcPolyRepr) -> Result<Self> {
        NcPoly::from_coeffs(r.n_vars, r.out_dim, r.in_dim, r.order, r.coeffs)
    }
}

impl From<NcPoly> for NcPolyRepr {
    fn from(p: NcPoly) -> Self {
        NcPolyRepr { n_vars: p.n_vars, order: p.order, out_dim: p.out_dim, in_dim: p.in_dim, coeffs: p.coeffs }
    }
}

impl NcPoly {
    pub fn zero(n_vars: usize, out_dim: usize, in_dim: usize, order: usize) -> Self {
        NcPoly { n_vars, order, out_dim, in_dim, coeffs: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, order: usize, c: CMat) -> Self {
        let mut p = NcPoly::zero(n_vars, c.nrows(), c.ncols(), order);
        p.insert_unchecked(Word::empty(), c);
        p
    }

    pub fn identity(n_vars: usize, dim: usize, order: usize) -> Self {
        NcPoly::constant(n_vars, order, identity(dim))
    }

    pub fn from_coeffs(
        n_vars: usize,
        out_dim: usize,
        in_dim: usize,
        order: usize,
        coeffs: impl IntoIterator<Item = (Word, CMat)>,
    ) -> Result<Self> {
        let mut p = NcPoly::zero(n_vars, out_dim, in_dim, order);
        for (w, c) in coeffs {
            p.set(w, c)?;
        }
        Ok(p)
    }

    /// Scalar (1×1) series from `(word, value)` pairs.
    pub fn scalar(n_vars: usize, order: usize, terms: &[(Word, C64)]) -> Result<Self> {
        let mut p = NcPoly::zero(n_vars, 1, 1, order);
        for (w, x) in terms {
            let prev = p.coeff(w);
            p.set(w.clone(), prev + CMat::from_element(1, 1, *x))?;
        }
        Ok(p)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn order(&self) -> usize {
        self.order
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

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &CMat)> {
        self.coeffs.iter()
    }

    pub fn get(&self, w: &Word) -> Option<&CMat> {
        self.coeffs.get(w)
    }

    /// Coefficient at `w`, zero when absent.
    pub fn coeff(&self, w: &Word) -> CMat {
        self.coeffs.get(w).cloned().unwrap_or_else(|| zeros(self.out_dim, self.in_dim))
    }

    /// Sets a coefficient; an exactly zero matrix removes the entry.
    pub fn set(&mut self, w: Word, c: CMat) -> Result<()> {
        if w.len() > self.order {
            return Err(Error::InvalidData(format!(
                "word {w:?} is longer than the truncation order {}",
                self.order
            )));
        }
        if w.max_letter() > self.n_vars {
            return Err(Error::InvalidData(format!("word {w:?} uses a letter above n_vars = {}", self.n_vars)));
        }
        if c.shape() != (self.out_dim, self.in_dim) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient at {w:?} is {}x{}, expected {}x{}",
                c.nrows(),
                c.ncols(),
                self.out_dim,
                self.in_dim
            )));
        }
        self.insert_unchecked(w, c);
        Ok(())
    }

    fn insert_unchecked(&mut self, w: Word, c: CMat) {
        if linalg::is_all_zero(&c) {
            self.coeffs.remove(&w);
        } else {
            self.coeffs.insert(w, c);
        }
    }

    fn accumulate(&mut self, w: Word, c: CMat) {
        match self.coeffs.remove(&w) {
            Some(prev) => self.insert_unchecked(w, prev + c),
            None => self.insert_unchecked(w, c),
        }
    }

    /// Longest stored word; 0 for the zero series.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().next_back().map_or(0, Word::len)
    }

    pub fn truncate(&self, order: usize) -> NcPoly {
        let mut p = NcPoly::zero(self.n_vars, self.out_dim, self.in_dim, order);
        for (w, c) in &self.coeffs {
            if w.len() <= order {
                p.coeffs.insert(w.clone(), c.clone());
            }
        }
        p
    }

    fn check_same_shape(&self, other: &NcPoly) -> Result<()> {
        if self.n_vars != other.n_vars || self.out_dim != other.out_dim || self.in_dim != other.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "series shapes differ: ({}, {}x{}) vs ({}, {}x{})",
                self.n_vars, self.out_dim, self.in_dim, other.n_vars, other.out_dim, other.in_dim
            )));
        }
        Ok(())
    }

    /// Sum, truncated at the smaller of the two orders.
    pub fn add(&self, other: &NcPoly) -> Result<NcPoly> {
        self.check_same_shape(other)?;
        let mut out = self.truncate(self.order.min(other.order));
        for (w, c) in &other.coeffs {
            if w.len() <= out.order {
                out.accumulate(w.clone(), c.clone());
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &NcPoly) -> Result<NcPoly> {
        self.add(&other.scale(real(-1.0)))
    }

    pub fn scale(&self, x: C64) -> NcPoly {
        let mut out = NcPoly::zero(self.n_vars, self.out_dim, self.in_dim, self.order);
        for (w, c) in &self.coeffs {
            out.insert_unchecked(w.clone(), c * x);
        }
        out
    }

    /// `Σ_w f_w* z^w`; the coefficientwise adjoint (not the series adjoint).
    pub fn coeff_adjoint(&self) -> NcPoly {
        let mut out = NcPoly::zero(self.n_vars, self.in_dim, self.out_dim, self.order);
        for (w, c) in &self.coeffs {
            out.coeffs.insert(w.clone(), c.adjoint());
        }
        out
    }

    /// Largest entrywise difference over all coefficients.
    pub fn max_coeff_diff(&self, other: &NcPoly) -> f64 {
        let mut words: Vec<&Word> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        words.sort();
        words.dedup();
        words
            .into_iter()
            .map(|w| {
                let a = self.coeff(w);
                let b = other.coeff(w);
                if a.shape() != b.shape() {
                    return f64::INFINITY;
                }
                linalg::max_abs_diff(&a, &b)
            })
            .fold(0.0, f64::max)
    }

    pub fn multiply(&self, other: &NcPoly, order: usize) -> Result<NcPoly> {
        multiply(self, other, order)
    }

    pub fn eval_right(&self, t: &MatrixTuple) -> Result<CMat> {
        eval_right(self, t)
    }

    pub fn eval_left(&self, t: &MatrixTuple) -> Result<CMat> {
        eval_left(self, t)
    }
}

/// `(ab)_w = Σ_{w=uv} a_u b_v` for `|w| ≤ order`.
pub fn multiply(a: &NcPoly, b: &NcPoly, order: usize) -> Result<NcPoly> {
    if a.n_vars != b.n_vars {
        return Err(Error::DimensionMismatch(format!("n_vars differ: {} vs {}", a.n_vars, b.n_vars)));
    }
    if a.in_dim != b.out_dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{} coefficients",
            a.out_dim, a.in_dim, b.out_dim, b.in_dim
        )));
    }
    let mut out = NcPoly::zero(a.n_vars, a.out_dim, b.in_dim, order);
    for (u, au) in &a.coeffs {
        if u.len() > order {
            break;
        }
        for (v, bv) in &b.coeffs {
            if u.len() + v.len() > order {
                break;
            }
            out.accumulate(u.concat(v), au * bv);
        }
    }
    Ok(out)
}

/// Series inverse `Σ_k (I − f_∅⁻¹ f)^k f_∅⁻¹`, truncated at `order`.
pub fn invert(f: &NcPoly, order: usize) -> Result<NcPoly> {
    if f.out_dim != f.in_dim {
        return Err(Error::DimensionMismatch(format!(
            "only square coefficients invert, got {}x{}",
            f.out_dim, f.in_dim
        )));
    }
    let f0 = f.coeff(&Word::empty());
    let f0_inv = inverse_guarded(&f0, MAX_CONDITION)
        .map_err(|e| Error::Singular(format!("constant term is not invertible ({e})")))?;
    // g = I − f_∅⁻¹ f has no constant term
    let mut g = NcPoly::zero(f.n_vars, f.out_dim, f.in_dim, order);
    for (w, c) in &f.coeffs {
        if !w.is_empty() && w.len() <= order {
            g.insert_unchecked(w.clone(), -(&f0_inv * c));
        }
    }
    let head = NcPoly::constant(f.n_vars, order, f0_inv);
    let mut phi = head.clone();
    for _ in 0..order {
        phi = head.add(&multiply(&g, &phi, order)?)?;
    }
    Ok(phi)
}

/// `F = (f − I)(f + I)⁻¹`
pub fn cayley_h_to_s(f: &NcPoly, order: usize) -> Result<NcPoly> {
    let id = NcPoly::identity(f.n_vars, f.out_dim, order);
    let num = f.truncate(order).sub(&id)?;
    let den = f.truncate(order).add(&id)?;
    multiply(&num, &invert(&den, order)?, order)
}

/// `h = (I + F)(I − F)⁻¹`
pub fn cayley_s_to_h(big_f: &NcPoly, order: usize) -> Result<NcPoly> {
    let id = NcPoly::identity(big_f.n_vars, big_f.out_dim, order);
    let num = id.add(&big_f.truncate(order))?;
    let den = id.sub(&big_f.truncate(order))?;
    multiply(&num, &invert(&den, order)?, order)
}

fn check_eval(p: &NcPoly, t: &MatrixTuple) -> Result<()> {
    if p.n_vars != t.n_vars() {
        return Err(Error::DimensionMismatch(format!(
            "series in {} variables evaluated on a {}-tuple",
            p.n_vars,
            t.n_vars()
        )));
    }
    let rows = p.out_dim.saturating_mul(t.dim());
    let cols = p.in_dim.saturating_mul(t.dim());
    if rows > EVAL_DIM_CAP || cols > EVAL_DIM_CAP {
        return Err(Error::Resource(format!("evaluation would be {rows}x{cols}, above the cap {EVAL_DIM_CAP}")));
    }
    Ok(())
}

/// `Σ_w p_w ⊗ T^w` with `T^w = T_{i1}···T_{im}`.
pub fn eval_right(p: &NcPoly, t: &MatrixTuple) -> Result<CMat> {
    check_eval(p, t)?;
    let n = t.dim();
    let powers = t.word_powers(p.coeffs.keys());
    let mut out = zeros(p.out_dim * n, p.in_dim * n);
    for (w, c) in &p.coeffs {
        out += kron(c, &powers[w]);
    }
    Ok(out)
}

/// `Σ_w T^w ⊗ p_w`
pub fn eval_left(p: &NcPoly, t: &MatrixTuple) -> Result<CMat> {
    check_eval(p, t)?;
    let n = t.dim();
    let powers = t.word_powers(p.coeffs.keys());
    let mut out = zeros(n * p.out_dim, n * p.in_dim);
    for (w, c) in &p.coeffs {
        out += kron(&powers[w], c);
    }
    Ok(out)
}

/// Self-adjoint interpolation data `{c_w}_{w∈Λ}`; the starred half
/// `c_{w*} = c_w*` is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HermitianDataRepr", into = "HermitianDataRepr")]
pub struct HermitianData {
    lambda: AdmissibleSet,
    dim: usize,
    coeffs: BTreeMap<Word, CMat>,
}

#[derive(Serialize, Deserialize)]
struct HermitianDataRepr {
    lambda: AdmissibleSet,
    dim: usize,
    #[serde(with = "json::coeff_map")]
    coeffs: BTreeMap<Word, CMat>,
}

impl TryFrom<HermitianDataRepr> for HermitianData {
    type Error = Error;

    fn try_from(r: HermitianDataRepr) -> Result<Self> {
        HermitianData::new(r.lambda, r.dim, r.coeffs)
    }
}

impl From<HermitianData> for HermitianDataRepr {
    fn from(d: HermitianData) -> Self {
        HermitianDataRepr { lambda: d.lambda, dim: d.dim, coeffs: d.coeffs }
    }
}

/// Tolerance on `c_∅ = c_∅*`.
pub const SELF_ADJOINT_TOL: f64 = 1e-12;

impl HermitianData {
    pub fn new(lambda: AdmissibleSet, dim: usize, coeffs: BTreeMap<Word, CMat>) -> Result<Self> {
        for (w, c) in &coeffs {
            if !lambda.contains(w) {
                return Err(Error::InvalidData(format!("coefficient key {w:?} is not in the index set")));
            }
            if c.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient at {w:?} is {}x{}, expected {dim}x{dim}",
                    c.nrows(),
                    c.ncols()
                )));
            }
        }
        if let Some(c0) = coeffs.get(&Word::empty()) {
            let skew = linalg::max_abs_diff(c0, &c0.adjoint());
            if skew > SELF_ADJOINT_TOL {
                return Err(Error::InvalidData(format!("constant coefficient is not self-adjoint (residual {skew:.3e})")));
            }
        }
        let coeffs = coeffs.into_iter().filter(|(_, c)| !linalg::is_all_zero(c)).collect();
        Ok(HermitianData { lambda, dim, coeffs })
    }

    pub fn lambda(&self) -> &AdmissibleSet {
        &self.lambda
    }

    pub fn n_vars(&self) -> usize {
        self.lambda.n_vars()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &BTreeMap<Word, CMat> {
        &self.coeffs
    }

    pub fn coeff(&self, w: &Word) -> CMat {
        self.coeffs.get(w).cloned().unwrap_or_else(|| zeros(self.dim, self.dim))
    }

    /// `p(z) = c_∅/2 + Σ_{w≠∅} c_w z^w`, truncated at the longest word of `Λ`.
    pub fn analytic_poly(&self) -> NcPoly {
        let mut p = NcPoly::zero(self.n_vars(), self.dim, self.dim, self.lambda.max_len());
        for (w, c) in &self.coeffs {
            let c = if w.is_empty() { hermitian_part(c) * real(0.5) } else { c.clone() };
            p.insert_unchecked(w.clone(), c);
        }
        p
    }

    /// Same data indexed by a wider set `Λ̃ ⊇ Λ`.
    pub fn with_lambda(&self, wider: AdmissibleSet) -> Result<Self> {
        HermitianData::new(wider, self.dim, self.coeffs.clone())
    }
}

/// `c_∅ ⊗ I + Σ_{w≠∅} (c_w ⊗ T^w + c_w* ⊗ (T^w)*)`, i.e. `2 Re p(T)`.
pub fn herm_eval(data: &HermitianData, t: &MatrixTuple) -> Result<CMat> {
    let p = data.analytic_poly();
    check_eval(&p, t)?;
    let n = t.dim();
    let powers = t.word_powers(data.coeffs.keys().filter(|w| !w.is_empty()));
    let mut m = zeros(data.dim * n, data.dim * n);
    for (w, c) in &data.coeffs {
        if !w.is_empty() {
            m += kron(c, &powers[w]);
        }
    }
    let c0 = hermitian_part(&data.coeff(&Word::empty()));
    let sym = &m + m.adjoint();
    Ok(kron(&c0, &identity(n)) + sym)
}

/// Scale applied to the sample points used by [`extract_coefficients`].
pub const EXTRACTION_RADIUS: f64 = 0.9;

/// Recovers the coefficients `{p_v}_{v∈Λ}` of an unknown series from its
/// right evaluations `Σ p_w ⊗ T^w` on scaled shift tuples.
///
/// Homogeneous degrees are separated by evaluating at `λ_j S` for
/// `λ_j = 0.9 ω^j`, `ω = e^{2πi/(m+1)}`, and inverting the resulting
/// Vandermonde (DFT) system. On the shift, `S^w v = ∅` exactly when `w = v`
/// among words of one length, so `p_v` is the block of the degree-`|v|` part
/// that maps `v` to `∅`.
pub fn extract_coefficients<F>(
    mut evaluate: F,
    lambda: &AdmissibleSet,
    out_dim: usize,
    in_dim: usize,
) -> Result<BTreeMap<Word, CMat>>
where
    F: FnMut(&MatrixTuple) -> Result<CMat>,
{
    let s = crate::tuples::shift_tuple(lambda)?;
    let n = s.dim();
    let m = lambda.max_len();
    let points = m + 1;
    let omega = |k: f64| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / points as f64);

    let mut evals = Vec::with_capacity(points);
    for j in 0..points {
        let lam = omega(j as f64) * EXTRACTION_RADIUS;
        let value = evaluate(&s.scaled(lam))?;
        if value.shape() != (out_dim * n, in_dim * n) {
            return Err(Error::DimensionMismatch(format!(
                "callback returned {}x{}, expected {}x{}",
                value.nrows(),
                value.ncols(),
                out_dim * n,
                in_dim * n
            )));
        }
        evals.push(value);
    }

    let root = crate::tuples::basis_index(lambda, &Word::empty());
    let mut out = BTreeMap::new();
    for v in lambda.iter() {
        let k = v.len();
        let col = crate::tuples::basis_index(lambda, v);
        let mut block = zeros(out_dim, in_dim);
        for (j, e) in evals.iter().enumerate() {
            let weight = omega(-((j * k) as f64));
            for a in 0..out_dim {
                for b in 0..in_dim {
                    block[(a, b)] += e[(a * n + root, b * n + col)] * weight;
                }
            }
        }
        let scale = 1.0 / (points as f64 * EXTRACTION_RADIUS.powi(k as i32));
        out.insert(v.clone(), block * c64(scale, 0.0));
    }
    Ok(out)
}
