//! Structure of quantum channels: minimal invariant subspaces, coherences
//! between them, the block decomposition into decoherence-free subsystems,
//! and the same spectral machinery applied to matrix product state tensors.
//!
//! A channel is given by Kraus operators `{E_k}` acting as
//! `X ↦ Σ E_k X E_k†`. The decomposition splits the ambient space into blocks
//! `C^m ⊗ B` on which every Kraus operator acts as `diag(e^{iθ_1}, …) ⊗ E_k`,
//! plus a decaying remainder. Each `C^m` factor is a maximal
//! decoherence-free subsystem.
//!
//! ```
//! use dfskit::{construct, structure, Tolerance};
//!
//! let channel = construct::paper_example();
//! let tol = Tolerance::default();
//! let dec = structure::structure_decomposition(&channel, tol, 7).unwrap();
//! assert_eq!(dec.blocks.len(), 1);
//! assert_eq!(dec.blocks[0].m, 4);
//! assert_eq!(dec.decay.dim(), 4);
//! ```

pub mod channel;
pub mod construct;
pub mod dfs;
mod error;
pub mod fixedpoint;
pub mod io;
pub mod mps;
pub mod numerics;
pub mod oracle;
pub mod report;
pub mod structure;

pub use channel::{CptpReport, CrossMap, KrausChannel};
pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector, EigenPair, SubspaceBasis, Tolerance};
pub use structure::{Block, CoherenceKind, CoherenceVerdict, MinimalSubspace, StructureDecomposition};
