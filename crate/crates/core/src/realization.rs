//! Moment realizations `c_w = V*G^wV`, colligation transfer series, and
//! forward generation of feasible Carathéodory instances.
//!
//! Normalization: instances use `c_∅ = I` with the Herglotz series
//! `f = I/2 + Σ_{w≠∅} V*G^wV z^w`. The unit-constant series `2f` (constant
//! term `I`) is the one that matches Cayley transforms of transfer series;
//! [`unit_herglotz_coeffs`] is the only place that conversion happens.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::CaratheodoryInstance;
use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{self, haar_unitary, identity, isometry_residual, random_isometry, real, spectral_norm, zeros, CMat};
use crate::ncpoly::NcPoly;
use crate::tuples::{check_gn, random_gn, random_resolution, sub_seed, MatrixTuple};
use crate::words::{AdmissibleSet, Word};

pub const ISOMETRY_TOL: f64 = 1e-12;
pub const GN_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;
pub const PROJECTION_TOL: f64 = 1e-12;

/// `(G, V)` with `G ∈ G_N` on `C^{d_H}` and `V: C^{d_Y} → C^{d_H}` an isometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RealizationRepr", into = "RealizationRepr")]
pub struct HerglotzRealization {
    g: MatrixTuple,
    v: CMat,
}

#[derive(Serialize, Deserialize)]
struct RealizationRepr {
    g: MatrixTuple,
    #[serde(with = "json::matrix")]
    v: CMat,
}

impl TryFrom<RealizationRepr> for HerglotzRealization {
    type Error = Error;

    fn try_from(r: RealizationRepr) -> Result<Self> {
        HerglotzRealization::new(r.g, r.v)
    }
}

impl From<HerglotzRealization> for RealizationRepr {
    fn from(r: HerglotzRealization) -> Self {
        RealizationRepr { g: r.g, v: r.v }
    }
}

impl HerglotzRealization {
    pub fn new(g: MatrixTuple, v: CMat) -> Result<Self> {
        if v.nrows() != g.dim() {
            return Err(Error::DimensionMismatch(format!("V has {} rows, G acts on C^{}", v.nrows(), g.dim())));
        }
        let iso = isometry_residual(&v);
        if iso > ISOMETRY_TOL {
            return Err(Error::InvalidData(format!("V is not an isometry (residual {iso:.3e})")));
        }
        let report = check_gn(&g, GN_TOL);
        if !report.verdict {
            return Err(Error::InvalidData(format!("G fails the G_N conditions (residual {:.3e})", report.worst_residual)));
        }
        Ok(HerglotzRealization { g, v })
    }

    pub fn g(&self) -> &MatrixTuple {
        &self.g
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    pub fn out_dim(&self) -> usize {
        self.v.ncols()
    }

    fn moment(&self, power: &CMat) -> CMat {
        self.v.adjoint() * power * &self.v
    }
}

/// `c_w = V*G^wV` for every `w ∈ Λ`.
pub fn moments(r: &HerglotzRealization, lambda: &AdmissibleSet) -> BTreeMap<Word, CMat> {
    let powers = r.g.word_powers(lambda.iter());
    lambda.iter().map(|w| (w.clone(), r.moment(&powers[w]))).collect()
}

fn all_words(n_vars: usize, order: usize) -> impl Iterator<Item = Word> {
    (0..=order).flat_map(move |len| Word::all_of_length(n_vars, len))
}

/// `f_∅ = I/2`, `f_w = V*G^wV` for `1 ≤ |w| ≤ order`.
pub fn herglotz_coeffs(r: &HerglotzRealization, order: usize) -> NcPoly {
    let d = r.out_dim();
    let words: Vec<Word> = all_words(r.g.n_vars(), order).collect();
    let powers = r.g.word_powers(words.iter());
    let mut f = NcPoly::zero(r.g.n_vars(), d, d, order);
    for w in &words {
        let c = if w.is_empty() { identity(d) * real(0.5) } else { r.moment(&powers[w]) };
        f.set(w.clone(), c).expect("shape and length are in range");
    }
    f
}

/// `2f`: the same series with constant term `I`.
pub fn unit_herglotz_coeffs(r: &HerglotzRealization, order: usize) -> NcPoly {
    herglotz_coeffs(r, order).scale(real(2.0))
}

/// Unitary colligation `[[A, B], [C, D]]` on `C^{d_H} ⊕ C^{d_Y}` with a
/// resolution of the identity `P_1 + … + P_N = I` on `C^{d_H}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ColligationRepr", into = "ColligationRepr")]
pub struct Colligation {
    a: CMat,
    b: CMat,
    c: CMat,
    d: CMat,
    projections: Vec<CMat>,
}

#[derive(Serialize, Deserialize)]
struct ColligationRepr {
    #[serde(with = "json::matrix")]
    a: CMat,
    #[serde(with = "json::matrix")]
    b: CMat,
    #[serde(with = "json::matrix")]
    c: CMat,
    #[serde(with = "json::matrix")]
    d: CMat,
    #[serde(with = "json::matrix_list")]
    projections: Vec<CMat>,
}

impl TryFrom<ColligationRepr> for Colligation {
    type Error = Error;

    fn try_from(r: ColligationRepr) -> Result<Self> {
        Colligation::new(r.a, r.b, r.c, r.d, r.projections)
    }
}

impl From<Colligation> for ColligationRepr {
    fn from(c: Colligation) -> Self {
        ColligationRepr { a: c.a, b: c.b, c: c.c, d: c.d, projections: c.projections }
    }
}

impl Colligation {
    pub fn new(a: CMat, b: CMat, c: CMat, d: CMat, projections: Vec<CMat>) -> Result<Self> {
        let h = a.nrows();
        let y = d.nrows();
        let shapes_ok = a.shape() == (h, h)
            && b.shape() == (h, y)
            && c.shape() == (y, h)
            && d.shape() == (y, y)
            && !projections.is_empty()
            && projections.iter().all(|p| p.shape() == (h, h));
        if !shapes_ok {
            return Err(Error::DimensionMismatch("colligation blocks have inconsistent shapes".into()));
        }
        let u = block_matrix(&a, &b, &c, &d);
        let res = linalg::unitarity_residual(&u);
        if res > UNITARY_TOL {
            return Err(Error::InvalidData(format!("colligation is not unitary (residual {res:.3e})")));
        }
        let mut sum = zeros(h, h);
        let mut worst: f64 = 0.0;
        for (k, p) in projections.iter().enumerate() {
            sum += p;
            worst = worst.max(spectral_norm(&(p * p - p))).max(spectral_norm(&(p - p.adjoint())));
            for q in projections.iter().skip(k + 1) {
                worst = worst.max(spectral_norm(&(p * q)));
            }
        }
        worst = worst.max(spectral_norm(&(sum - identity(h))));
        if worst > PROJECTION_TOL {
            return Err(Error::InvalidData(format!("projections do not resolve the identity (residual {worst:.3e})")));
        }
        Ok(Colligation { a, b, c, d, projections })
    }

    pub fn n_vars(&self) -> usize {
        self.projections.len()
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn d(&self) -> &CMat {
        &self.d
    }

    pub fn projections(&self) -> &[CMat] {
        &self.projections
    }
}

fn block_matrix(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let (h, y) = (a.nrows(), d.nrows());
    let mut u = zeros(h + y, h + y);
    u.view_mut((0, 0), (h, h)).copy_from(a);
    u.view_mut((0, h), (h, y)).copy_from(b);
    u.view_mut((h, 0), (y, h)).copy_from(c);
    u.view_mut((h, h), (y, y)).copy_from(d);
    u
}

/// `F_∅ = D` and `F_{g_{i1}…g_{im}} = C P_{i1} A P_{i2} A ··· A P_{im} B`.
pub fn transfer_coeffs(col: &Colligation, order: usize) -> NcPoly {
    let y = col.d.nrows();
    let n_vars = col.n_vars();
    let mut f = NcPoly::zero(n_vars, y, y, order);
    f.set(Word::empty(), col.d.clone()).expect("shape checked");
    // states[w] = P_{i1} A ··· A P_{im} B
    let mut states: BTreeMap<Word, CMat> = BTreeMap::new();
    for len in 1..=order {
        for w in Word::all_of_length(n_vars, len) {
            let k = w.first().expect("non-empty");
            let state = match w.drop_first() {
                Some(rest) if !rest.is_empty() => &col.projections[k - 1] * &col.a * &states[&rest],
                _ => &col.projections[k - 1] * &col.b,
            };
            f.set(w.clone(), &col.c * &state).expect("shape checked");
            states.insert(w, state);
        }
    }
    f
}

/// For `D = 0` and `CC* = I`: `G_k = P_k(A + BC)`, `V = C*`.
pub fn diagonal_transform(col: &Colligation) -> Result<HerglotzRealization> {
    let dres = linalg::max_abs(&col.d);
    if dres > 1e-10 {
        return Err(Error::InvalidData(format!("the feedthrough block D must vanish (max entry {dres:.3e})")));
    }
    let coiso = isometry_residual(&col.c.adjoint());
    if coiso > 1e-10 {
        return Err(Error::InvalidData(format!("C is not a coisometry (residual {coiso:.3e})")));
    }
    let g0 = &col.a + &col.b * &col.c;
    let g = MatrixTuple::new(col.projections.iter().map(|p| p * &g0).collect())?;
    HerglotzRealization::new(g, col.c.adjoint())
}

/// Random colligation with `D = 0`: for an isometry `E: C^{d_Y} → C^{d_H}`
/// and Haar unitaries `Q1, Q2`, take `A = Q1(I − EE*)Q2`, `B = Q1E`,
/// `C = E*Q2`. The block matrix is `diag(Q1, I)·M·diag(Q2, I)` with the
/// self-adjoint unitary `M = [[I − EE*, E], [E*, 0]]`.
pub fn random_colligation(dim_h: usize, dim_y: usize, n_vars: usize, seed: u64) -> Result<Colligation> {
    if dim_y > dim_h {
        return Err(Error::InvalidData(format!("need dim_y ≤ dim_h, got {dim_y} > {dim_h}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_isometry(dim_h, dim_y, &mut rng);
    let q1 = haar_unitary(dim_h, &mut rng);
    let q2 = haar_unitary(dim_h, &mut rng);
    let a = &q1 * (identity(dim_h) - &e * e.adjoint()) * &q2;
    let b = &q1 * &e;
    let c = e.adjoint() * &q2;
    let projections = random_resolution(dim_h, n_vars, &mut rng);
    Colligation::new(a, b, c, zeros(dim_y, dim_y), projections)
}

/// Feasible instance `c_w = V*G^wV` on `Λ` together with its realization.
///
/// `G` comes from [`random_gn`] and `V` is the first `dim_y` columns of a
/// Haar unitary. Since `V` is an isometry, `c_∅` is stored as exactly `I`.
pub fn gen_feasible_instance(
    n_vars: usize,
    lambda: &AdmissibleSet,
    dim_h: usize,
    dim_y: usize,
    seed: u64,
) -> Result<(CaratheodoryInstance, HerglotzRealization)> {
    if lambda.n_vars() != n_vars {
        return Err(Error::DimensionMismatch(format!("index set is over {} letters, not {n_vars}", lambda.n_vars())));
    }
    if dim_h < n_vars.max(dim_y) || dim_y == 0 {
        return Err(Error::InvalidData(format!("need dim_h ≥ max(n_vars, dim_y) and dim_y ≥ 1, got dim_h = {dim_h}")));
    }
    let g = random_gn(dim_h, n_vars, sub_seed(seed, 0));
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 1));
    let v = random_isometry(dim_h, dim_y, &mut rng);
    let realization = HerglotzRealization::new(g, v)?;
    let mut coeffs = moments(&realization, lambda);
    if coeffs.contains_key(&Word::empty()) {
        coeffs.insert(Word::empty(), identity(dim_y));
    }
    let inst = CaratheodoryInstance::from_coeffs(lambda.clone(), dim_y, coeffs)?;
    Ok((inst, realization))
}

/// Generated instance plus the realization that certifies it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub g: MatrixTuple,
    #[serde(with = "json::matrix")]
    pub v: CMat,
    pub lambda: AdmissibleSet,
    pub instance: crate::instance::InstanceFile,
}
