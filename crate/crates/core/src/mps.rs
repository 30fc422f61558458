//! Translation-invariant MPS tensors: irreducibility, repeated-tensor
//! detection through the mixed transfer map, dense expansion, and reduction
//! of a weighted tensor family to a basis of pairwise non-repeated tensors.

use num_complex::Complex64;

use crate::channel::{cross_rep, relation_residual, KrausChannel};
use crate::fixedpoint::is_irreducible;
use crate::numerics::{
    c, check_finite, cis, op_norm, peripheral_eigenpairs, polar_unitary, unvec_row, wrap_pi, CMatrix, CVector,
    Tolerance,
};
use crate::{Error, Result};

/// Default bound on `d^n` for [`expand`].
pub const EXPAND_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MpsTensor {
    phys_dim: usize,
    bond_dim: usize,
    matrices: Vec<CMatrix>,
}

impl MpsTensor {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        let first = matrices.first().ok_or(Error::EmptyKraus)?;
        let bond_dim = first.nrows();
        for a in &matrices {
            if a.nrows() != a.ncols() {
                return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
            }
            if a.nrows() != bond_dim {
                return Err(Error::DimensionMismatch { expected: bond_dim, found: a.nrows() });
            }
            check_finite(a)?;
        }
        Ok(MpsTensor { phys_dim: matrices.len(), bond_dim, matrices })
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn bond_dim(&self) -> usize {
        self.bond_dim
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// `X ↦ Σ_k A_k X A_k†`.
    pub fn channel(&self) -> KrausChannel {
        KrausChannel::new(self.matrices.clone()).expect("validated matrices")
    }

    /// `{e^{iθ} U A_k U†}`.
    pub fn twisted(&self, theta: f64, u: &CMatrix) -> MpsTensor {
        let ph = cis(theta);
        let matrices = self.matrices.iter().map(|a| u * a * u.adjoint() * ph).collect();
        MpsTensor { matrices, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTensor {
    pub tensor: MpsTensor,
    pub weights: Vec<Complex64>,
}

impl WeightedTensor {
    pub fn new(tensor: MpsTensor, weight: Complex64) -> Self {
        WeightedTensor { tensor, weights: vec![weight] }
    }
}

/// When `repeated`, `A_k = e^{iθ} U B_k U†` for every `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedVerdict {
    pub repeated: bool,
    pub theta: Option<f64>,
    pub intertwiner: Option<CMatrix>,
}

impl RepeatedVerdict {
    fn no() -> Self {
        RepeatedVerdict { repeated: false, theta: None, intertwiner: None }
    }
}

/// `Σ_k A_k ⊗ conj(B_k)`, the representation of `X ↦ Σ_k A_k X B_k†`.
pub fn transfer_map(a: &MpsTensor, b: &MpsTensor) -> Result<CMatrix> {
    if a.phys_dim != b.phys_dim {
        return Err(Error::DimensionMismatch { expected: a.phys_dim, found: b.phys_dim });
    }
    Ok(cross_rep(&a.matrices, &b.matrices))
}

pub fn is_irreducible_tensor(a: &MpsTensor, tol: Tolerance) -> Result<bool> {
    let ch = a.channel();
    if !ch.is_cptp(tol) {
        return Ok(false);
    }
    is_irreducible(&ch, tol)
}

pub fn is_repeated(a: &MpsTensor, b: &MpsTensor, tol: Tolerance) -> Result<RepeatedVerdict> {
    if a.phys_dim != b.phys_dim {
        return Err(Error::DimensionMismatch { expected: a.phys_dim, found: b.phys_dim });
    }
    if !is_irreducible_tensor(a, tol)? {
        return Err(Error::NotIrreducible("first tensor"));
    }
    if !is_irreducible_tensor(b, tol)? {
        return Err(Error::NotIrreducible("second tensor"));
    }
    if a.bond_dim != b.bond_dim {
        return Ok(RepeatedVerdict::no());
    }
    let t = transfer_map(a, b)?;
    let peripheral = peripheral_eigenpairs(&t, tol)?;
    let Some(pair) = peripheral.first() else {
        return Ok(RepeatedVerdict::no());
    };
    let d = a.bond_dim;
    let u = polar_unitary(&unvec_row(&pair.vector, d, d), tol).map_err(|e| {
        Error::Inconsistency(format!(
            "peripheral eigenvector of the transfer map is not proportional to a unitary ({e})"
        ))
    })?;
    let theta = wrap_pi(pair.value.arg());
    let residual = relation_residual(&a.matrices, &b.matrices, theta, &u);
    let scale = a.matrices.iter().map(op_norm).fold(0.0, f64::max);
    let bound = (tol.value() * scale).max(1e3 * f64::EPSILON);
    if residual > bound {
        return Err(Error::Inconsistency(format!(
            "transfer map has a peripheral eigenvalue but the recovered relation fails (residual {residual:e} > {bound:e})"
        )));
    }
    Ok(RepeatedVerdict { repeated: true, theta: Some(theta), intertwiner: Some(u) })
}

/// `tr(A_{k₁} ⋯ A_{k_n})` indexed by `k₁` most significant.
pub fn expand(a: &MpsTensor, n: usize) -> Result<CVector> {
    expand_with_cap(a, n, EXPAND_CAP)
}

pub fn expand_with_cap(a: &MpsTensor, n: usize, cap: u128) -> Result<CVector> {
    if n == 0 {
        return Err(Error::Invalid("expansion length must be at least 1".into()));
    }
    let d = a.phys_dim as u128;
    let size = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(d)).unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::ExpansionTooLarge { size, cap });
    }
    let mut out = CVector::zeros(size as usize);
    let id = CMatrix::identity(a.bond_dim, a.bond_dim);
    descend(&a.matrices, &id, n, 0, &mut out);
    Ok(out)
}

fn descend(mats: &[CMatrix], prefix: &CMatrix, remaining: usize, index: usize, out: &mut CVector) {
    let d = mats.len();
    if remaining == 1 {
        for (k, a) in mats.iter().enumerate() {
            // tr(P A) without forming the product
            let mut t = c(0.0, 0.0);
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    t += prefix[(i, j)] * a[(j, i)];
                }
            }
            out[index * d + k] = t;
        }
        return;
    }
    for (k, a) in mats.iter().enumerate() {
        descend(mats, &(prefix * a), remaining - 1, index * d + k, out);
    }
}

/// Greedy reduction to pairwise non-repeated representatives. A tensor with
/// `B = e^{iθ} U A U†` against representative `A` has its weights multiplied
/// by `e^{iθ}`, since `μⁿ V_n(B) = (μ e^{iθ})ⁿ V_n(A)`.
pub fn basis_dedup(tensors: &[WeightedTensor], tol: Tolerance) -> Result<Vec<WeightedTensor>> {
    let mut reps: Vec<WeightedTensor> = Vec::new();
    for incoming in tensors {
        let mut merged = false;
        for rep in reps.iter_mut() {
            if incoming.tensor.phys_dim != rep.tensor.phys_dim {
                continue;
            }
            let v = is_repeated(&incoming.tensor, &rep.tensor, tol)?;
            if let (true, Some(theta)) = (v.repeated, v.theta) {
                let ph = cis(theta);
                rep.weights.extend(incoming.weights.iter().map(|w| w * ph));
                merged = true;
                break;
            }
        }
        if !merged {
            if !is_irreducible_tensor(&incoming.tensor, tol)? {
                return Err(Error::NotIrreducible("basis member"));
            }
            reps.push(incoming.clone());
        }
    }
    Ok(reps)
}

/// `Σ_rep Σ_μ μⁿ · expand(rep, n)`.
pub fn mps_sum(tensors: &[WeightedTensor], n: usize) -> Result<CVector> {
    let mut total: Option<CVector> = None;
    for wt in tensors {
        let v = expand(&wt.tensor, n)?;
        let coeff: Complex64 = wt.weights.iter().map(|w| w.powu(n as u32)).sum();
        let term = v * coeff;
        total = Some(match total {
            None => term,
            Some(t) if t.len() == term.len() => t + term,
            Some(t) => return Err(Error::DimensionMismatch { expected: t.len(), found: term.len() }),
        });
    }
    total.ok_or(Error::Invalid("empty tensor list".into()))
}
