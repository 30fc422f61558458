//! Channels in Kraus form.

use num_complex::Complex64;

use crate::numerics::{self, check_finite, check_square, conj, kron, op_norm, CMatrix, SubspaceBasis, Tolerance};
use crate::{Error, Result};

/// A linear map `X ↦ Σ E_k X E_k†` on `D × D` matrices.
///
/// Trace preservation is not enforced at construction; see
/// [`KrausChannel::cptp_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<CMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub trace_preserving: bool,
    /// `‖Σ E_k†E_k − I‖` in operator norm.
    pub defect: f64,
    /// Always true for a Kraus-form map.
    pub completely_positive: bool,
}

/// Representation of `X ↦ Σ E_{k,p} X E_{k,q}†` on operators from the
/// `q` subspace into the `p` subspace.
#[derive(Debug, Clone)]
pub struct CrossMap {
    pub left_basis: SubspaceBasis,
    pub right_basis: SubspaceBasis,
    pub rep: CMatrix,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::EmptyKraus)?;
        let dim = check_square(first)?;
        for e in &kraus {
            let d = check_square(e)?;
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d });
            }
            check_finite(e)?;
        }
        Ok(KrausChannel { dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        KrausChannel { dim, kraus: vec![CMatrix::identity(dim, dim)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// `max_k ‖E_k‖`, the scale for invariance and relation residuals.
    pub fn kraus_scale(&self) -> f64 {
        self.kraus.iter().map(op_norm).fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.nrows().max(x.ncols()) });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for e in &self.kraus {
            out += e * x * e.adjoint();
        }
        out
    }

    /// `Σ E_k ⊗ conj(E_k)`, so that `vec(apply(X)) = M vec(X)` with
    /// row-major `vec`.
    pub fn matrix_rep(&self) -> CMatrix {
        let n = self.dim * self.dim;
        let mut m = CMatrix::zeros(n, n);
        for e in &self.kraus {
            m += kron(e, &conj(e));
        }
        m
    }

    pub fn cptp_report(&self, tol: Tolerance) -> CptpReport {
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for e in &self.kraus {
            s += e.adjoint() * e;
        }
        let defect = op_norm(&(s - CMatrix::identity(self.dim, self.dim)));
        CptpReport { trace_preserving: defect <= tol.value(), defect, completely_positive: true }
    }

    pub fn is_cptp(&self, tol: Tolerance) -> bool {
        self.cptp_report(tol).trace_preserving
    }

    /// The dual map, Kraus `{E_k†}`.
    pub fn adjoint(&self) -> Self {
        KrausChannel { dim: self.dim, kraus: self.kraus.iter().map(|e| e.adjoint()).collect() }
    }

    /// Worst leakage `max_k ‖(I − VV†) E_k V‖` and the Kraus index attaining it.
    pub fn invariance_residual(&self, v: &SubspaceBasis) -> (usize, f64) {
        let vm = v.matrix();
        let mut worst = (0, 0.0);
        for (k, e) in self.kraus.iter().enumerate() {
            let ev = e * vm;
            let leak = &ev - vm * (vm.adjoint() * &ev);
            let r = op_norm(&leak);
            if r > worst.1 {
                worst = (k, r);
            }
        }
        worst
    }

    fn check_invariant(&self, v: &SubspaceBasis, tol: Tolerance) -> Result<()> {
        if v.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.ambient_dim() });
        }
        let (kraus_index, residual) = self.invariance_residual(v);
        if residual > tol.value() * self.kraus_scale().max(f64::MIN_POSITIVE) {
            return Err(Error::NotInvariant { kraus_index, residual });
        }
        Ok(())
    }

    /// Kraus operators compressed to the subspace, `V†E_kV`, without an
    /// invariance check.
    pub fn compress(&self, v: &SubspaceBasis) -> Vec<CMatrix> {
        let vm = v.matrix();
        self.kraus.iter().map(|e| vm.adjoint() * e * vm).collect()
    }

    /// Restriction to an invariant subspace.
    pub fn restrict(&self, v: &SubspaceBasis, tol: Tolerance) -> Result<Self> {
        self.check_invariant(v, tol)?;
        Ok(KrausChannel { dim: v.dim(), kraus: self.compress(v) })
    }

    pub fn cross_map(&self, vp: &SubspaceBasis, vq: &SubspaceBasis, tol: Tolerance) -> Result<CrossMap> {
        self.check_invariant(vp, tol)?;
        self.check_invariant(vq, tol)?;
        let ep = self.compress(vp);
        let eq = self.compress(vq);
        Ok(CrossMap { left_basis: vp.clone(), right_basis: vq.clone(), rep: cross_rep(&ep, &eq) })
    }
}

/// `Σ_k A_k ⊗ conj(B_k)`.
pub fn cross_rep(a: &[CMatrix], b: &[CMatrix]) -> CMatrix {
    let (dp, dq) = (a[0].nrows(), b[0].nrows());
    let mut rep = CMatrix::zeros(dp * dq, dp * dq);
    for (x, y) in a.iter().zip(b) {
        rep += kron(x, &conj(y));
    }
    rep
}

/// `tr(A†B)`.
pub fn trace_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `max_k ‖A_k − e^{iθ} U B_k U†‖` in operator norm.
pub fn relation_residual(a: &[CMatrix], b: &[CMatrix], theta: f64, u: &CMatrix) -> f64 {
    let ph = numerics::cis(theta);
    a.iter().zip(b).map(|(x, y)| op_norm(&(x - u * y * u.adjoint() * ph))).fold(0.0, f64::max)
}
