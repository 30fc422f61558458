//! Dense complex linear algebra with explicit tolerances.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Vectorization is row-major:
//! `vec(X)[i * cols + j] = X[(i, j)]`, so that `vec(A X Bᵀ) = (A ⊗ B) vec(X)`
//! and the map `X ↦ Σ E X F†` is represented by `Σ E ⊗ conj(F)`.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const EIG_EPS: f64 = f64::EPSILON;
/// Schur sweeps allowed per unit of dimension before giving up.
const SWEEPS_PER_DIM: usize = 500;

/// Relative tolerance policy threaded through every rank and
/// magnitude-one decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Tolerance {
    pub const DEFAULT: f64 = 1e-9;

    pub fn new(tol: f64) -> Result<Self> {
        if tol.is_finite() && tol > 0.0 && tol < 1.0 {
            Ok(Tolerance(tol))
        } else {
            Err(Error::Invalid(format!("tolerance must lie in (0, 1), got {tol}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Scale used for eigenvalue clustering (gap-based splits).
    pub fn cluster_gap(self) -> f64 {
        self.0.sqrt()
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(Self::DEFAULT)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: CVector,
}

/// An isometry `V` (orthonormal columns) identifying a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    columns: CMatrix,
}

impl SubspaceBasis {
    /// Wraps columns that are already orthonormal. The caller is trusted;
    /// see [`SubspaceBasis::isometry_defect`].
    pub fn from_isometry(columns: CMatrix) -> Self {
        SubspaceBasis { columns }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        SubspaceBasis { columns: CMatrix::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        SubspaceBasis { columns: CMatrix::identity(ambient_dim, ambient_dim) }
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut columns = CMatrix::zeros(ambient_dim, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            columns[(i, c)] = Complex64::new(1.0, 0.0);
        }
        SubspaceBasis { columns }
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.columns
    }

    pub fn into_matrix(self) -> CMatrix {
        self.columns
    }

    pub fn projector(&self) -> CMatrix {
        &self.columns * self.columns.adjoint()
    }

    /// `‖V†V − I‖` in operator norm.
    pub fn isometry_defect(&self) -> f64 {
        let k = self.dim();
        if k == 0 {
            return 0.0;
        }
        op_norm(&(self.columns.adjoint() * &self.columns - CMatrix::identity(k, k)))
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self, tol: Tolerance) -> SubspaceBasis {
        let n = self.ambient_dim();
        let residual = CMatrix::identity(n, n) - self.projector();
        let cols: Vec<CVector> = residual.column_iter().map(|c| c.into_owned()).collect();
        let basis = orthonormalize(&cols, tol);
        // the complement has exactly n - k dimensions; guard against drift
        let want = n - self.dim();
        if basis.dim() > want {
            let trimmed = basis.columns.columns(0, want).into_owned();
            SubspaceBasis { columns: trimmed }
        } else {
            basis
        }
    }

    /// Concatenates the columns of several frames.
    pub fn concat(ambient_dim: usize, parts: &[&CMatrix]) -> CMatrix {
        let total: usize = parts.iter().map(|p| p.ncols()).sum();
        let mut out = CMatrix::zeros(ambient_dim, total);
        let mut at = 0;
        for p in parts {
            out.columns_mut(at, p.ncols()).copy_from(p);
            at += p.ncols();
        }
        out
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn check_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

pub fn check_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Thin singular value decomposition `A = U Σ V†`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: DVector<f64>,
    pub v_t: CMatrix,
}

impl Svd {
    #[cfg(test)]
    fn residual(&self, a: &CMatrix) -> f64 {
        let sig = CMatrix::from_diagonal(&self.singular_values.map(|v| Complex64::new(v, 0.0)));
        (&self.u * sig * &self.v_t - a).norm()
    }
}

/// Thin SVD, singular values in nonincreasing order. nalgebra's complex SVD
/// returns wrong factors for some inputs, so this goes through faer.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Svd { u: CMatrix::zeros(m, 0), singular_values: DVector::zeros(0), v_t: CMatrix::zeros(0, n) };
    }
    let f = faer::Mat::<Complex64>::from_fn(m, n, |i, j| a[(i, j)]);
    let Ok(s) = f.thin_svd() else {
        let s = nalgebra::SVD::new(a.clone(), true, true);
        return Svd {
            u: s.u.expect("requested u"),
            singular_values: s.singular_values,
            v_t: s.v_t.expect("requested v_t"),
        };
    };
    let (u, v, sig) = (s.U(), s.V(), s.S().column_vector());
    Svd {
        u: CMatrix::from_fn(m, k, |i, j| u[(i, j)]),
        singular_values: DVector::from_fn(k, |i, _| sig[i].re),
        v_t: CMatrix::from_fn(k, n, |i, j| v[(j, i)].conj()),
    }
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = svd(a).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value.
pub fn op_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Row-major vectorization.
pub fn vec_row(x: &CMatrix) -> CVector {
    let (r, c) = x.shape();
    CVector::from_fn(r * c, |k, _| x[(k / c, k % c)])
}

/// Inverse of [`vec_row`].
pub fn unvec_row(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    assert_eq!(v.len(), rows * cols, "vector length does not match shape");
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

pub fn conj(a: &CMatrix) -> CMatrix {
    a.map(|z| z.conj())
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Phase of `z` in `[0, 2π)`, with values within `tol` of `2π` folded to 0.
pub fn phase_0_2pi(z: Complex64, tol: f64) -> f64 {
    wrap_0_2pi(z.arg(), tol)
}

pub fn wrap_0_2pi(theta: f64, tol: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t > TAU - tol {
        0.0
    } else {
        t
    }
}

/// Normalizes an angle into `(−π, π]`.
pub fn wrap_pi(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t > std::f64::consts::PI {
        t - TAU
    } else {
        t
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let se = SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vectors.set_column(c, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Groups sorted real values into runs separated by gaps larger than `gap`.
pub fn cluster_sorted(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > gap {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// All eigenpairs of a general complex matrix, with algebraic multiplicity.
///
/// Isolated eigenvalues get their vector from back-substitution on the Schur
/// form. Clusters of (numerically) repeated eigenvalues share an SVD null
/// space of `A − λI`; if the cluster is defective there are fewer independent
/// vectors than eigenvalues and vectors are reused.
pub fn eig(a: &CMatrix) -> Result<Vec<EigenPair>> {
    let n = check_square(a)?;
    check_finite(a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(a.clone(), EIG_EPS, SWEEPS_PER_DIM * n).ok_or(Error::EigenNoConvergence { dim: n })?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = frobenius(a).max(f64::MIN_POSITIVE);

    // cluster eigenvalues that agree to well above roundoff
    let merge = 1e-7 * scale.max(1.0);
    let mut cluster_of = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if cluster_of[i] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![i];
        cluster_of[i] = id;
        let mut frontier = vec![i];
        while let Some(j) = frontier.pop() {
            for k in 0..n {
                if cluster_of[k] == usize::MAX && (values[k] - values[j]).norm() <= merge {
                    cluster_of[k] = id;
                    members.push(k);
                    frontier.push(k);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }

    let mut vectors: Vec<Option<CVector>> = vec![None; n];
    for members in &clusters {
        if members.len() == 1 {
            let i = members[0];
            vectors[i] = Some(schur_eigenvector(&q, &t, i, scale));
            continue;
        }
        let mean = members.iter().map(|&i| values[i]).sum::<Complex64>() / members.len() as f64;
        let shifted = a - CMatrix::identity(n, n) * mean;
        let svd = svd(&shifted);
        let v_t = &svd.v_t;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
        // directions whose residual is at the level of the cluster spread
        let spread = members.iter().map(|&i| (values[i] - mean).norm()).fold(0.0, f64::max);
        let cutoff = (spread * 10.0).max(1e-12 * scale);
        let null: Vec<CVector> = idx
            .iter()
            .take(members.len())
            .filter(|&&k| svd.singular_values[k] <= cutoff)
            .map(|&k| v_t.row(k).adjoint())
            .collect();
        if null.is_empty() {
            for &i in members {
                vectors[i] = Some(schur_eigenvector(&q, &t, i, scale));
            }
        } else {
            for (slot, &i) in members.iter().enumerate() {
                vectors[i] = Some(null[slot % null.len()].clone());
            }
        }
    }

    Ok(values
        .into_iter()
        .zip(vectors)
        .map(|(value, v)| EigenPair { value, vector: v.expect("every eigenvalue assigned") })
        .collect())
}

fn schur_eigenvector(q: &CMatrix, t: &CMatrix, i: usize, scale: f64) -> CVector {
    let n = t.nrows();
    let lambda = t[(i, i)];
    let small = f64::EPSILON * scale.max(1.0);
    let mut x = CVector::zeros(n);
    x[i] = Complex64::new(1.0, 0.0);
    for j in (0..i).rev() {
        let mut s = Complex64::new(0.0, 0.0);
        for k in (j + 1)..=i {
            s += t[(j, k)] * x[k];
        }
        let mut d = t[(j, j)] - lambda;
        if d.norm() < small {
            d = Complex64::new(small, 0.0);
        }
        x[j] = -s / d;
    }
    let v = q * x;
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Eigenpairs with `|λ| ≥ 1 − tol`, sorted by descending modulus (moduli
/// within `tol` count as equal) and then ascending phase in `[0, 2π)`.
pub fn peripheral_eigenpairs(a: &CMatrix, tol: Tolerance) -> Result<Vec<EigenPair>> {
    let t = tol.value();
    let mut pairs: Vec<EigenPair> = eig(a)?.into_iter().filter(|p| p.value.norm() >= 1.0 - t).collect();
    sort_canonical(&mut pairs, t);
    Ok(pairs)
}

/// Canonical eigenvalue order: descending modulus, then ascending phase.
pub fn sort_canonical(pairs: &mut [EigenPair], tol: f64) {
    pairs.sort_by(|x, y| {
        let (mx, my) = (x.value.norm(), y.value.norm());
        if (mx - my).abs() > tol {
            return my.total_cmp(&mx);
        }
        phase_0_2pi(x.value, tol).total_cmp(&phase_0_2pi(y.value, tol))
    });
}

/// Orthonormal basis of `{x : ‖Ax‖ ≤ tol·‖A‖}`, from the right singular
/// vectors with `σ ≤ tol·σ_max`.
pub fn null_space(a: &CMatrix, tol: Tolerance) -> SubspaceBasis {
    null_space_scaled(a, tol, 0.0)
}

/// As [`null_space`] with cutoff `tol·max(σ_max, scale)`, for matrices whose
/// natural size is known (such as `M − I`) and that may vanish up to
/// roundoff.
pub fn null_space_scaled(a: &CMatrix, tol: Tolerance, scale: f64) -> SubspaceBasis {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return SubspaceBasis::empty(0);
    }
    // pad wide matrices so the SVD returns a full set of right vectors
    let work = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = svd(&work);
    let v_t = &svd.v_t;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.value() * smax.max(scale);
    let mut keep: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff || smax == 0.0)
        .map(|(k, &s)| (s, k))
        .collect();
    keep.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut basis = CMatrix::zeros(cols, keep.len());
    for (c, &(_, k)) in keep.iter().enumerate() {
        basis.set_column(c, &v_t.row(k).adjoint());
    }
    SubspaceBasis::from_isometry(basis)
}

/// Unitary factor `U` of the polar decomposition `X = U P`.
pub fn polar_unitary(x: &CMatrix, tol: Tolerance) -> Result<CMatrix> {
    let n = check_square(x)?;
    check_finite(x)?;
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let svd = svd(x);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if smin <= tol.value() * smax {
        return Err(Error::NearSingular { smallest: smin, largest: smax });
    }
    Ok(svd.u * svd.v_t)
}

/// Gram–Schmidt with column pivoting. Vectors whose residual drops to
/// `tol·max‖v‖` or below are discarded.
pub fn orthonormalize(vectors: &[CVector], tol: Tolerance) -> SubspaceBasis {
    let Some(first) = vectors.first() else {
        return SubspaceBasis::empty(0);
    };
    let n = first.len();
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cutoff = tol.value() * scale.max(f64::MIN_POSITIVE);
    let mut work: Vec<CVector> = vectors.to_vec();
    let mut basis: Vec<CVector> = Vec::new();
    while !work.is_empty() && basis.len() < n {
        let (best, norm) =
            work.iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= cutoff {
            break;
        }
        let mut q = work.swap_remove(best);
        // second pass keeps orthogonality at roundoff level
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&q);
                q -= b * proj;
            }
        }
        let qn = q.norm();
        if qn <= cutoff {
            continue;
        }
        q /= Complex64::new(qn, 0.0);
        for v in work.iter_mut() {
            let proj = q.dotc(v);
            *v -= &q * proj;
        }
        basis.push(q);
    }
    let mut m = CMatrix::zeros(n, basis.len());
    for (c, b) in basis.iter().enumerate() {
        m.set_column(c, b);
    }
    SubspaceBasis::from_isometry(m)
}

/// Orthonormalizes Hermitian matrices under `⟨A, B⟩ = tr(A B)` using real
/// coefficients only, so the output stays Hermitian.
pub fn orthonormalize_hermitian(mats: &[CMatrix], tol: Tolerance) -> Vec<CMatrix> {
    let scale = mats.iter().map(frobenius).fold(0.0, f64::max);
    let cutoff = tol.value() * scale.max(f64::MIN_POSITIVE);
    let inner = |a: &CMatrix, b: &CMatrix| -> f64 { a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum() };
    let mut work: Vec<CMatrix> = mats.iter().map(hermitian_part).collect();
    let mut out: Vec<CMatrix> = Vec::new();
    while !work.is_empty() {
        let (best, norm) =
            work.iter()
                .enumerate()
                .map(|(i, m)| (i, frobenius(m)))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if norm <= cutoff {
            break;
        }
        let mut q = work.swap_remove(best);
        for _ in 0..2 {
            for b in &out {
                let p = inner(b, &q);
                q -= b * Complex64::new(p, 0.0);
            }
        }
        let qn = frobenius(&q);
        if qn <= cutoff {
            continue;
        }
        q /= Complex64::new(qn, 0.0);
        for m in work.iter_mut() {
            let p = inner(&q, m);
            *m -= &q * Complex64::new(p, 0.0);
        }
        out.push(q);
    }
    out
}
