//! Brute-force cross-checks that avoid the code paths they check:
//! Cesàro power averaging for stationary states, restriction plus a plain
//! SVD for minimality, and dense reconstruction of the Kraus operators from
//! a decomposition.

use serde::Serialize;

use crate::channel::KrausChannel;
use crate::numerics::{eigh, hermitian_part, kron, op_norm, svd, unvec_row, CMatrix, SubspaceBasis, Tolerance};
use crate::structure::StructureDecomposition;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub discrepancy: f64,
    pub details: String,
}

impl OracleReport {
    pub fn passes(&self, bound: f64) -> bool {
        self.discrepancy <= bound
    }
}

/// `(1/N) Σ_{n=1..N} ℰⁿ(I/D)` for the first power of two `N ≤ n_max` at
/// which the average moved by at most `tol` (Frobenius) since `N/2`.
pub fn cesaro_stationary(channel: &KrausChannel, n_max: usize, tol: f64) -> Result<CMatrix> {
    let d = channel.dim();
    let mut x = CMatrix::identity(d, d) / crate::numerics::c(d as f64, 0.0);
    let mut sum = CMatrix::zeros(d, d);
    let mut previous: Option<CMatrix> = None;
    let mut checkpoint = 1;
    let mut last_change = f64::INFINITY;
    for n in 1..=n_max {
        x = channel.apply_unchecked(&x);
        sum += &x;
        if n == checkpoint {
            let avg = &sum / crate::numerics::c(n as f64, 0.0);
            if let Some(prev) = &previous {
                last_change = (&avg - prev).norm();
                if last_change <= tol {
                    return Ok(normalize(avg));
                }
            }
            previous = Some(avg);
            checkpoint *= 2;
        }
    }
    Err(Error::NoConvergence { n_max, last_change })
}

fn normalize(x: CMatrix) -> CMatrix {
    let h = hermitian_part(&x);
    let t = h.trace();
    h / t
}

/// Eigenvectors of a density matrix with eigenvalue above `rel · λ_max`.
pub fn support(rho: &CMatrix, rel: f64) -> SubspaceBasis {
    let (vals, vecs) = eigh(&hermitian_part(rho));
    let max = vals.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > rel * max).collect();
    let mut cols = CMatrix::zeros(rho.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        cols.set_column(j, &vecs.column(i));
    }
    SubspaceBasis::from_isometry(cols)
}

/// Operator-norm distance between the projectors onto two subspaces (1 when
/// the dimensions differ).
pub fn support_distance(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    if a.dim() != b.dim() {
        return 1.0;
    }
    op_norm(&(a.projector() - b.projector()))
}

/// Discrepancy `(#fixed points − 1) + (dim − rank of the fixed state)` of the
/// channel restricted to `candidate`; zero iff the restriction is
/// irreducible.
pub fn check_minimality(channel: &KrausChannel, candidate: &SubspaceBasis, tol: Tolerance) -> Result<OracleReport> {
    let restricted = channel.restrict(candidate, tol)?;
    let dim = restricted.dim();
    let m = restricted.matrix_rep() - CMatrix::identity(dim * dim, dim * dim);
    let svd = svd(&m);
    let sv = &svd.singular_values;
    let scale = sv.max().max(1.0);
    let null: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= tol.value() * scale).collect();
    let nullity = null.len();
    let mut rank = 0;
    if nullity == 1 {
        let v_t = &svd.v_t;
        let v = v_t.row(null[0]).adjoint();
        let x = unvec_row(&v, dim, dim);
        // fix the global phase by the trace before taking the Hermitian part
        let t = x.trace();
        let x = if t.norm() > 0.0 { x * (t.conj() / t.norm()) } else { x };
        let (vals, _) = eigh(&hermitian_part(&x));
        let max = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        rank = vals.iter().filter(|&&v| v.abs() > tol.value().sqrt() * max).count();
    }
    let discrepancy = (nullity as f64 - 1.0).abs() + (dim - rank) as f64;
    Ok(OracleReport {
        name: "minimality".into(),
        discrepancy,
        details: format!("dim {dim}, fixed points {nullity}, stationary rank {rank}"),
    })
}

/// `T_k` (recurrent rows, decay columns) and `K_k` read off a channel in the
/// frame of a decomposition.
#[derive(Debug, Clone)]
pub struct DecayBlocks {
    pub transfer: Vec<CMatrix>,
    pub decay: Vec<CMatrix>,
}

impl DecayBlocks {
    pub fn read_off(channel: &KrausChannel, dec: &StructureDecomposition) -> Self {
        let recurrent: Vec<&CMatrix> = dec.blocks.iter().map(|b| b.frame.matrix()).collect();
        let r = SubspaceBasis::concat(channel.dim(), &recurrent);
        let k = dec.decay.matrix();
        DecayBlocks {
            transfer: channel.kraus().iter().map(|e| r.adjoint() * e * k).collect(),
            decay: channel.kraus().iter().map(|e| k.adjoint() * e * k).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub kraus: Vec<CMatrix>,
    /// `max_k ‖E_k^rebuilt − E_k‖` (operator norm).
    pub residual: f64,
}

/// `E_k = Q [[⊕_l U_l ⊗ E_{k,l}, T_k], [0, K_k]] Q†` with `Q = [W | K]`.
pub fn reconstruct_channel(
    channel: &KrausChannel,
    dec: &StructureDecomposition,
    decay: &DecayBlocks,
) -> Result<Reconstruction> {
    let d = channel.dim();
    let q = dec.full_frame();
    if q.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: q.ncols() });
    }
    let rec: usize = dec.blocks.iter().map(|b| b.m * b.b_dim).sum();
    let kd = d - rec;
    let mut kraus = Vec::with_capacity(channel.kraus().len());
    let mut residual: f64 = 0.0;
    for (k, e) in channel.kraus().iter().enumerate() {
        let mut b = CMatrix::zeros(d, d);
        let mut at = 0;
        for block in &dec.blocks {
            let size = block.m * block.b_dim;
            b.view_mut((at, at), (size, size)).copy_from(&kron(&block.unitary(), &block.base_kraus[k]));
            at += size;
        }
        if kd > 0 {
            b.view_mut((0, rec), (rec, kd)).copy_from(&decay.transfer[k]);
            b.view_mut((rec, rec), (kd, kd)).copy_from(&decay.decay[k]);
        }
        let rebuilt = &q * b * q.adjoint();
        residual = residual.max(op_norm(&(&rebuilt - e)));
        kraus.push(rebuilt);
    }
    Ok(Reconstruction { kraus, residual })
}
