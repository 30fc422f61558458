//! Independent checks behind `--verify`.

use dfskit::dfs::{maximal_dfs, verify_definition};
use dfskit::numerics::{CMatrix, SubspaceBasis, Tolerance};
use dfskit::oracle::{
    cesaro_stationary, check_minimality, reconstruct_channel, support, support_distance, DecayBlocks,
};
use dfskit::structure::verify_block_form;
use dfskit::{KrausChannel, StructureDecomposition};

const CESARO_N_MAX: usize = 1 << 20;
const CESARO_TOL: f64 = 1e-4;
const SUPPORT_REL: f64 = 1e-3;
const SUPPORT_DIST: f64 = 1e-3;
const DEFINITION_SAMPLES: usize = 100;

pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, error: None }
    }

    fn failed(name: impl Into<String>, error: String) -> Self {
        Check { name: name.into(), value: f64::NAN, bound: 0.0, error: Some(error) }
    }

    pub fn passes(&self) -> bool {
        self.error.is_none() && self.value <= self.bound
    }

    pub fn line(&self) -> String {
        let status = if self.passes() { "ok" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("verify {status} {}: {e}", self.name),
            None => format!("verify {status} {}: {:.3e} (bound {:.1e})", self.name, self.value, self.bound),
        }
    }
}

/// Block form, recurrent support against a Cesàro average, minimality of
/// every copy, dense reconstruction and the subsystem definition on random
/// product inputs.
pub fn run(channel: &KrausChannel, dec: &StructureDecomposition, tol: Tolerance, seed: u64) -> Vec<Check> {
    let bound = 10.0 * tol.value();
    let mut checks = vec![Check::new("block form", verify_block_form(channel, dec).max_constrained(), bound)];

    let frames: Vec<&CMatrix> = dec.blocks.iter().map(|b| b.frame.matrix()).collect();
    let recurrent = SubspaceBasis::from_isometry(SubspaceBasis::concat(channel.dim(), &frames));
    checks.push(match cesaro_stationary(channel, CESARO_N_MAX, CESARO_TOL) {
        Ok(rho) => {
            Check::new("stationary support", support_distance(&support(&rho, SUPPORT_REL), &recurrent), SUPPORT_DIST)
        }
        Err(e) => Check::failed("stationary support", e.to_string()),
    });

    let mut worst = 0.0f64;
    let mut err = None;
    for b in &dec.blocks {
        for p in 0..b.m {
            let copy = SubspaceBasis::from_isometry(b.frame.matrix().columns(p * b.b_dim, b.b_dim).into_owned());
            match check_minimality(channel, &copy, tol) {
                Ok(r) => worst = worst.max(r.discrepancy),
                Err(e) => err = Some(e.to_string()),
            }
        }
    }
    checks.push(match err {
        Some(e) => Check::failed("minimality", e),
        None => Check::new("minimality", worst, 0.0),
    });

    checks.push(match reconstruct_channel(channel, dec, &DecayBlocks::read_off(channel, dec)) {
        Ok(r) => Check::new("reconstruction", r.residual, bound),
        Err(e) => Check::failed("reconstruction", e.to_string()),
    });

    for dfs in maximal_dfs(dec) {
        let name = format!("definition (block {})", dfs.block_index);
        checks.push(match verify_definition(channel, &dfs, DEFINITION_SAMPLES, seed) {
            Ok(r) => Check::new(name, r.max_factorization_error.max(r.max_unitary_error), bound),
            Err(e) => Check::failed(name, e.to_string()),
        });
    }
    checks
}
