//! Serializable summaries of a decomposition and its DFS listing, with a
//! plain-text rendering.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::channel::KrausChannel;
use crate::dfs::capacity_report;
use crate::structure::{verify_block_form, BlockFormReport, Mode, StructureDecomposition};

/// Rounds to 9 decimals, mapping `-0` to `0`.
pub fn round9(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// `p/q·π` label for `theta` when it lies within `tol` of such a multiple
/// with `q ≤ 12`.
pub fn pi_label(theta: f64, tol: f64) -> Option<String> {
    for q in 1..=12i64 {
        let p = (theta * q as f64 / PI).round() as i64;
        if (theta - p as f64 * PI / q as f64).abs() <= tol {
            let g = gcd(p.abs(), q);
            let (p, q) = (p / g.max(1), q / g.max(1));
            return Some(match (p, q) {
                (0, _) => "0".to_string(),
                (1, 1) => "π".to_string(),
                (-1, 1) => "-π".to_string(),
                (p, 1) => format!("{p}π"),
                (1, q) => format!("π/{q}"),
                (-1, q) => format!("-π/{q}"),
                (p, q) => format!("{p}π/{q}"),
            });
        }
    }
    None
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

const LABEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockReport {
    pub m: usize,
    pub b_dim: usize,
    pub phases: Vec<f64>,
    pub phase_labels: Vec<Option<String>>,
    pub period: usize,
    pub fix_dim_contribution: usize,
    pub dfs_qubits: f64,
    pub noiseless_qubits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub frame_defect: f64,
    pub inter_block: f64,
    pub decay_to_recurrent: f64,
    pub intra_block: f64,
}

impl From<BlockFormReport> for Residuals {
    fn from(r: BlockFormReport) -> Self {
        Residuals {
            frame_defect: r.frame_defect,
            inter_block: r.inter_block,
            decay_to_recurrent: r.decay_to_recurrent,
            intra_block: r.intra_block,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub mode: &'static str,
    pub dim: usize,
    pub blocks: Vec<BlockReport>,
    pub decay_dim: usize,
    pub fix_dim: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub residuals: Residuals,
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Full => "full",
        Mode::Noiseless => "noiseless",
    }
}

impl DecompositionReport {
    pub fn new(channel: &KrausChannel, dec: &StructureDecomposition, tolerance: f64, seed: u64) -> Self {
        let caps = capacity_report(dec);
        let blocks = dec
            .blocks
            .iter()
            .zip(&caps)
            .map(|(b, cap)| BlockReport {
                m: b.m,
                b_dim: b.b_dim,
                phases: b.phases.iter().map(|&p| round9(p)).collect(),
                phase_labels: b.phases.iter().map(|&p| pi_label(p, LABEL_TOL)).collect(),
                period: b.period,
                fix_dim_contribution: b.fix_dim(),
                dfs_qubits: round9(cap.dfs_qubits),
                noiseless_qubits: round9(cap.noiseless_qubits),
            })
            .collect();
        DecompositionReport {
            mode: mode_name(dec.mode),
            dim: channel.dim(),
            blocks,
            decay_dim: dec.decay.dim(),
            fix_dim: dec.fix_dim(),
            tolerance,
            seed,
            residuals: verify_block_form(channel, dec).into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "dimension {} ({} mode), tolerance {:e}, seed {}",
            self.dim, self.mode, self.tolerance, self.seed
        );
        for (l, b) in self.blocks.iter().enumerate() {
            let phases: Vec<String> = b
                .phases
                .iter()
                .zip(&b.phase_labels)
                .map(|(p, lab)| match lab {
                    Some(lab) => format!("{p:.9} (={lab})"),
                    None => format!("{p:.9}"),
                })
                .collect();
            let _ = writeln!(
                s,
                "block {l}: C^{} ⊗ B, dim B = {}, period {}, phases [{}], fix contribution {}",
                b.m,
                b.b_dim,
                b.period,
                phases.join(", "),
                b.fix_dim_contribution
            );
        }
        let _ = writeln!(s, "decay dimension {}", self.decay_dim);
        let _ = writeln!(s, "fixed-point dimension {}", self.fix_dim);
        let r = &self.residuals;
        let _ = writeln!(
            s,
            "residuals: frame {:.1e}, inter-block {:.1e}, decay→recurrent {:.1e}, intra-block {:.1e}",
            r.frame_defect, r.inter_block, r.decay_to_recurrent, r.intra_block
        );
        s
    }
}

fn qubits(x: f64) -> String {
    let unit = if (x - 1.0).abs() < 1e-12 { "qubit" } else { "qubits" };
    if (x - x.round()).abs() < 1e-12 {
        format!("{} {unit}", x.round() as i64)
    } else {
        format!("{x:.3} {unit}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfsEntry {
    pub block_index: usize,
    pub subsystem_dim: usize,
    pub cosubsystem_dim: usize,
    pub phases: Vec<f64>,
    pub dfs_qubits: f64,
    pub noiseless_qubits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfsListing {
    pub dfs: Vec<DfsEntry>,
    pub tolerance: f64,
    pub seed: u64,
}

impl DfsListing {
    pub fn new(dec: &StructureDecomposition, tolerance: f64, seed: u64) -> Self {
        let caps = capacity_report(dec);
        let dfs = dec
            .blocks
            .iter()
            .zip(caps)
            .enumerate()
            .map(|(l, (b, cap))| DfsEntry {
                block_index: l,
                subsystem_dim: b.m,
                cosubsystem_dim: b.b_dim,
                phases: b.phases.iter().map(|&p| round9(p)).collect(),
                dfs_qubits: round9(cap.dfs_qubits),
                noiseless_qubits: round9(cap.noiseless_qubits),
            })
            .collect();
        DfsListing { dfs, tolerance, seed }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.dfs {
            let _ = writeln!(
                s,
                "DFS: C^{}, store {} (noiseless: {})",
                e.subsystem_dim,
                qubits(e.dfs_qubits),
                qubits(e.noiseless_qubits)
            );
        }
        s
    }
}
