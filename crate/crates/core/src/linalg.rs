//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Condition-number ceiling for every inverse taken inside series arithmetic.
pub const MAX_CONDITION: f64 = 1e12;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn scalar(x: C64) -> CMat {
    CMat::from_element(1, 1, x)
}

/// Builds a matrix from real row-major rows.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    CMat::from_fn(r, c, |i, j| real(rows[i][j]))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * real(0.5)
}

/// Eigenvalues of the hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

/// Eigen-decomposition of the hermitian part, eigenvalues ascending with
/// matching eigenvector columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Applies a real function to the spectrum of a hermitian matrix.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = hermitian_eigen(m);
    let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| real(f(x))),
    ));
    &vectors * diag * vectors.adjoint()
}

pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Inverse with a condition-number guard.
pub fn inverse_guarded(m: &CMat, max_condition: f64) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let cond = condition_number(m);
    if !(cond <= max_condition) {
        return Err(Error::Singular(format!("condition number {cond:.3e} exceeds {max_condition:.1e}")));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("LU factorization failed".into()))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in comparison");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_all_zero(m: &CMat) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// `max(‖U*U − I‖, ‖UU* − I‖)` in spectral norm.
pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    let m = u.ncols();
    let a = spectral_norm(&(u.adjoint() * u - identity(m)));
    let b = spectral_norm(&(u * u.adjoint() - identity(n)));
    a.max(b)
}

/// `‖V*V − I‖`
pub fn isometry_residual(v: &CMat) -> f64 {
    spectral_norm(&(v.adjoint() * v - identity(v.ncols())))
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a complex Gaussian sample, with the phases
/// of `diag(R)` moved into `Q` so the factorization is unique.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = random_complex_gaussian(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { real(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// First `cols` columns of a Haar unitary of size `rows`.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    assert!(cols <= rows, "an isometry needs cols <= rows");
    haar_unitary(rows, rng).columns(0, cols).into_owned()
}

/// Permutation `P` with `P (A ⊗ B) Pᵀ = B ⊗ A` for `A` of size `n_a` and `B` of size `n_b`.
pub fn tensor_swap(n_a: usize, n_b: usize) -> CMat {
    let n = n_a * n_b;
    let mut p = zeros(n, n);
    for i in 0..n_a {
        for j in 0..n_b {
            p[(j * n_a + i, i * n_b + j)] = real(1.0);
        }
    }
    p
}

/// Block-diagonal sum `A ⊕ B`.
pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}
