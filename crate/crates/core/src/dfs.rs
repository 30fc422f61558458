//! Decoherence-free subsystems read off a block decomposition, a membership
//! test for candidate subsystems, randomized verification of
//! `ℰ(ρ_A ⊗ ρ_B) = U ρ_A U† ⊗ σ_B`, and capacities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::KrausChannel;
use crate::construct::random_density;
use crate::numerics::{frobenius, kron, op_norm, CMatrix, SubspaceBasis, Tolerance};
use crate::structure::StructureDecomposition;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct DfsBlock {
    pub block_index: usize,
    pub subsystem_dim: usize,
    pub unitary: CMatrix,
    /// Isometry from `C^m ⊗ ℬ` (copy index outer) into the ambient space.
    pub embed: SubspaceBasis,
    pub cosubsystem_dim: usize,
}

impl DfsBlock {
    /// The subsystem `V ⊗ ℬ` for a candidate `V ⊆ C^m`, with the unitary
    /// compressed to `V`. When `V` is not spanned by eigenvectors of the
    /// block unitary the result is not a decoherence-free subsystem and
    /// [`verify_definition`] reports it.
    pub fn restrict_to(&self, candidate: &SubspaceBasis) -> Result<DfsBlock> {
        if candidate.ambient_dim() != self.subsystem_dim {
            return Err(Error::DimensionMismatch { expected: self.subsystem_dim, found: candidate.ambient_dim() });
        }
        let v = candidate.matrix();
        let lift = kron(v, &CMatrix::identity(self.cosubsystem_dim, self.cosubsystem_dim));
        Ok(DfsBlock {
            block_index: self.block_index,
            subsystem_dim: candidate.dim(),
            unitary: v.adjoint() * &self.unitary * v,
            embed: SubspaceBasis::from_isometry(self.embed.matrix() * lift),
            cosubsystem_dim: self.cosubsystem_dim,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DfsVerificationReport {
    pub samples: usize,
    pub max_factorization_error: f64,
    pub max_unitary_error: f64,
    pub seed: u64,
}

/// One maximal decoherence-free subsystem `C^{m_l}` per block.
pub fn maximal_dfs(dec: &StructureDecomposition) -> Vec<DfsBlock> {
    dec.blocks
        .iter()
        .enumerate()
        .map(|(l, b)| DfsBlock {
            block_index: l,
            subsystem_dim: b.m,
            unitary: b.unitary(),
            embed: b.frame.clone(),
            cosubsystem_dim: b.b_dim,
        })
        .collect()
}

/// Whether `candidate ⊆ C^{m_l}` carries a decoherence-free subsystem, i.e.
/// its projector commutes with `U_l`.
pub fn is_dfs(dec: &StructureDecomposition, l: usize, candidate: &SubspaceBasis, tol: Tolerance) -> Result<bool> {
    let block = dec
        .blocks
        .get(l)
        .ok_or_else(|| Error::Invalid(format!("block index {l} out of range ({} blocks)", dec.blocks.len())))?;
    if candidate.ambient_dim() != block.m {
        return Err(Error::DimensionMismatch { expected: block.m, found: candidate.ambient_dim() });
    }
    let p = candidate.projector();
    let u = block.unitary();
    Ok(op_norm(&(&p * &u - &u * &p)) <= tol.value())
}

fn partial_traces(tau: &CMatrix, m: usize, b: usize) -> (CMatrix, CMatrix) {
    let mut ta = CMatrix::zeros(m, m);
    let mut tb = CMatrix::zeros(b, b);
    for p in 0..m {
        for q in 0..m {
            for i in 0..b {
                ta[(p, q)] += tau[(p * b + i, q * b + i)];
            }
        }
        for i in 0..b {
            for j in 0..b {
                tb[(i, j)] += tau[(p * b + i, p * b + j)];
            }
        }
    }
    (ta, tb)
}

/// `(factorization error, unitary error)` for one product input. Leakage of
/// the output outside the subsystem is added to the factorization error.
pub fn product_input_errors(
    channel: &KrausChannel,
    dfs: &DfsBlock,
    rho_a: &CMatrix,
    rho_b: &CMatrix,
) -> Result<(f64, f64)> {
    let w = dfs.embed.matrix();
    let (m, b) = (dfs.subsystem_dim, dfs.cosubsystem_dim);
    if rho_a.shape() != (m, m) {
        return Err(Error::DimensionMismatch { expected: m, found: rho_a.nrows() });
    }
    if rho_b.shape() != (b, b) {
        return Err(Error::DimensionMismatch { expected: b, found: rho_b.nrows() });
    }
    let input = w * kron(rho_a, rho_b) * w.adjoint();
    let out = channel.apply(&input)?;
    let tau = w.adjoint() * &out * w;
    let leakage = frobenius(&(&out - w * &tau * w.adjoint()));
    let (ta, tb) = partial_traces(&tau, m, b);
    let factorization = frobenius(&(&tau - kron(&ta, &tb))) + leakage;
    let expected = &dfs.unitary * rho_a * dfs.unitary.adjoint();
    let unitary = frobenius(&(ta - expected));
    Ok((factorization, unitary))
}

/// Maxima over `samples` random product inputs `ρ_A ⊗ ρ_B`.
pub fn verify_definition(
    channel: &KrausChannel,
    dfs: &DfsBlock,
    samples: usize,
    seed: u64,
) -> Result<DfsVerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = DfsVerificationReport { samples, max_factorization_error: 0.0, max_unitary_error: 0.0, seed };
    for _ in 0..samples {
        let rho_a = random_density(dfs.subsystem_dim, &mut rng);
        let rho_b = random_density(dfs.cosubsystem_dim, &mut rng);
        let (f, u) = product_input_errors(channel, dfs, &rho_a, &rho_b)?;
        report.max_factorization_error = report.max_factorization_error.max(f);
        report.max_unitary_error = report.max_unitary_error.max(u);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Capacity {
    pub block_index: usize,
    pub dfs_qubits: f64,
    pub noiseless_qubits: f64,
}

pub fn capacity_report(dec: &StructureDecomposition) -> Vec<Capacity> {
    dec.blocks
        .iter()
        .enumerate()
        .map(|(l, b)| Capacity {
            block_index: l,
            dfs_qubits: (b.m as f64).log2(),
            noiseless_qubits: (b.phase_clusters().into_iter().max().unwrap_or(1) as f64).log2(),
        })
        .collect()
}
