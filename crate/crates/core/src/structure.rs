//! Minimal subspaces, coherences between them, and the unique block
//! decomposition of a channel.
//!
//! The pipeline is:
//!
//! 1. split off the decay subspace `𝒦` (support complement of the maximal
//!    stationary state);
//! 2. on the recurrent part, take the fixed-point algebra `𝒜` of the dual
//!    channel, find its center, and split `𝒜` into its simple blocks; the
//!    eigenspaces of a generic Hermitian element of each block are the
//!    minimal subspaces;
//! 3. test every pair of minimal subspaces for a coherence, i.e. a
//!    unit-modulus eigenvalue of the cross map `X ↦ Σ E_{k,p} X E_{k,q}†`,
//!    whose eigenvector polar-decomposes into the intertwiner `U` with
//!    `E_{k,p} = e^{iθ} U E_{k,q} U†`;
//! 4. group minimal subspaces into classes, align phases inside each class
//!    and emit one block `diag(e^{iθ_1}, …, e^{iθ_m}) ⊗ E_{k,l}` per class.
//!
//! Phases are only defined up to a common shift, and modulo `2π/g` when the
//! base channel of a block has period `g` (its own Kraus set is then
//! unitarily equivalent to `e^{2πi/g}` times itself). Reported phases use the
//! representative in `[0, 2π/g)` and the anchor that makes the sorted phase
//! list lexicographically smallest.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{relation_residual, KrausChannel};
use crate::construct::gaussian;
use crate::fixedpoint::{fixed_point_space, maximal_stationary_state, RecurrentSplit};
use crate::numerics::{
    self, cis, cluster_sorted, eigh, frobenius, kron, null_space_scaled, op_norm, orthonormalize_hermitian,
    peripheral_eigenpairs, polar_unitary, unvec_row, vec_row, wrap_0_2pi, wrap_pi, CMatrix, SubspaceBasis, Tolerance,
};
use crate::{Error, Result};

/// Maximum number of random generic-element draws.
pub const MAX_DRAWS: usize = 16;

/// Phases closer than this are treated as equal when clustering and
/// canonicalizing.
pub const PHASE_EQ: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct MinimalSubspace {
    pub basis: SubspaceBasis,
    pub index: usize,
}

impl MinimalSubspace {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoherenceKind {
    None,
    Stationary,
    Continuous,
}

/// Outcome of a coherence test between minimal subspaces `p` and `q`.
///
/// When `kind` is not `None`, `E_{k,p} = e^{iθ} U E_{k,q} U†` holds for every
/// Kraus index, with `E_{k,x}` the Kraus operators compressed to `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVerdict {
    pub kind: CoherenceKind,
    pub theta: Option<f64>,
    pub intertwiner: Option<CMatrix>,
    /// Worst relation residual measured during validation.
    pub residual: f64,
}

impl CoherenceVerdict {
    pub fn none() -> Self {
        CoherenceVerdict { kind: CoherenceKind::None, theta: None, intertwiner: None, residual: 0.0 }
    }

    pub fn is_coherent(&self) -> bool {
        self.kind != CoherenceKind::None
    }
}

/// Which coherences join minimal subspaces into a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Any unit-modulus cross-map eigenvalue (decoherence-free blocks).
    Full,
    /// Only eigenvalue 1 (noiseless blocks, the fixed-point decomposition).
    Noiseless,
}

impl Mode {
    fn joins(self, kind: CoherenceKind) -> bool {
        match self {
            Mode::Full => kind != CoherenceKind::None,
            Mode::Noiseless => kind == CoherenceKind::Stationary,
        }
    }
}

/// One block `C^m ⊗ B` of the decomposition.
#[derive(Debug, Clone)]
pub struct Block {
    pub m: usize,
    pub b_dim: usize,
    /// Isometry whose column `p·b_dim + j` is the `j`-th `B`-vector of copy `p`.
    pub frame: SubspaceBasis,
    /// `θ_{l,p}` in `[0, 2π)`, ascending, first entry 0.
    pub phases: Vec<f64>,
    /// `E_{k,l}` on `B`.
    pub base_kraus: Vec<CMatrix>,
    /// Unique stationary state of the base channel.
    pub rho: CMatrix,
    /// Number of peripheral eigenvalues of the base channel.
    pub period: usize,
}

impl Block {
    /// `U_l = diag(e^{iθ_{l,p}})`.
    pub fn unitary(&self) -> CMatrix {
        CMatrix::from_diagonal(&numerics::CVector::from_iterator(self.m, self.phases.iter().map(|&t| cis(t))))
    }

    /// Sizes of runs of equal phases.
    pub fn phase_clusters(&self) -> Vec<usize> {
        phase_cluster_sizes(&self.phases)
    }

    /// `dim fix(X ↦ U_l X U_l†)`.
    pub fn fix_dim(&self) -> usize {
        self.phase_clusters().iter().map(|s| s * s).sum()
    }
}

pub(crate) fn phase_cluster_sizes(phases: &[f64]) -> Vec<usize> {
    let mut sorted: Vec<f64> = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && circular_distance(sorted[j], sorted[i]) <= PHASE_EQ {
            j += 1;
        }
        sizes.push(j - i);
        i = j;
    }
    // the last run may wrap around to the first
    if sizes.len() > 1 && circular_distance(sorted[0], *sorted.last().unwrap()) <= PHASE_EQ {
        let last = sizes.pop().unwrap();
        sizes[0] += last;
    }
    sizes
}

fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Debug, Clone)]
pub struct StructureDecomposition {
    pub blocks: Vec<Block>,
    pub decay: SubspaceBasis,
    pub mode: Mode,
    pub ambient_dim: usize,
}

impl StructureDecomposition {
    /// `Σ_l dim fix(𝒰_l)`, which equals `dim fix(ℰ)`.
    pub fn fix_dim(&self) -> usize {
        self.blocks.iter().map(Block::fix_dim).sum()
    }

    /// `[W_1 | … | W_L | K]`.
    pub fn full_frame(&self) -> CMatrix {
        let mut parts: Vec<&CMatrix> = self.blocks.iter().map(|b| b.frame.matrix()).collect();
        parts.push(self.decay.matrix());
        SubspaceBasis::concat(self.ambient_dim, &parts)
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_combination(basis: &[CMatrix], rng: &mut ChaCha8Rng) -> CMatrix {
    let (r, c) = basis[0].shape();
    let mut out = CMatrix::zeros(r, c);
    for a in basis {
        out += a * numerics::c(gaussian(rng), 0.0);
    }
    out
}

fn require_cptp(channel: &KrausChannel, tol: Tolerance) -> Result<()> {
    let rep = channel.cptp_report(tol);
    if rep.trace_preserving {
        Ok(())
    } else {
        Err(Error::Invalid(format!("channel is not trace preserving (defect {:e})", rep.defect)))
    }
}

/// Minimal subspaces together with the recurrent/decay split.
pub fn minimal_decomposition(
    channel: &KrausChannel,
    tol: Tolerance,
    seed: u64,
) -> Result<(RecurrentSplit, Vec<MinimalSubspace>)> {
    require_cptp(channel, tol)?;
    let split = maximal_stationary_state(channel, tol)?;
    let vr = split.recurrent.matrix().clone();
    let r = vr.ncols();
    let restricted = channel.restrict(&split.recurrent, tol)?;
    let algebra = fixed_point_space(&restricted.adjoint(), tol)?.hermitian_basis;
    let n = algebra.len();
    let mut rng = rng_for(seed);
    let gap = tol.cluster_gap();

    let mut last_failure = String::new();
    for _ in 0..MAX_DRAWS {
        // center of the algebra: elements commuting with two generic members
        let x = random_combination(&algebra, &mut rng);
        let y = random_combination(&algebra, &mut rng);
        let mut system = CMatrix::zeros(2 * r * r, n);
        for (i, a) in algebra.iter().enumerate() {
            let cx = vec_row(&(a * &x - &x * a));
            let cy = vec_row(&(a * &y - &y * a));
            system.view_mut((0, i), (r * r, 1)).copy_from(&cx);
            system.view_mut((r * r, i), (r * r, 1)).copy_from(&cy);
        }
        let coeffs = null_space_scaled(&system, tol, frobenius(&x) + frobenius(&y));
        let mut central = Vec::with_capacity(2 * coeffs.dim());
        for col in coeffs.matrix().column_iter() {
            let mut z = CMatrix::zeros(r, r);
            for (i, a) in algebra.iter().enumerate() {
                z += a * col[i];
            }
            central.push(&z + z.adjoint());
            central.push((&z - z.adjoint()) * numerics::c(0.0, 1.0));
        }
        let central = orthonormalize_hermitian(&central, tol);
        let leak =
            central.iter().flat_map(|z| algebra.iter().map(move |a| frobenius(&(z * a - a * z)))).fold(0.0, f64::max);
        if central.is_empty() || leak > gap {
            last_failure = format!("center candidate fails to commute with the algebra (residual {leak:e})");
            continue;
        }

        let z = random_combination(&central, &mut rng);
        let (zvals, zvecs) = eigh(&z);
        let block_ranges = cluster_sorted(&zvals, gap * spectral_scale(&zvals));

        let mut minimals = Vec::new();
        let mut algebra_dim = 0;
        let mut ok = true;
        for range in &block_ranges {
            let vl = zvecs.columns(range.start, range.len()).into_owned();
            let h = random_combination(&algebra, &mut rng);
            let hl = vl.adjoint() * h * &vl;
            let (hvals, hvecs) = eigh(&hl);
            let copies = cluster_sorted(&hvals, gap * spectral_scale(&hvals));
            let size = copies[0].len();
            if copies.iter().any(|c| c.len() != size) {
                ok = false;
                last_failure = format!(
                    "generic element has unequal eigenvalue multiplicities {:?} in a block",
                    copies.iter().map(|c| c.len()).collect::<Vec<_>>()
                );
                break;
            }
            algebra_dim += copies.len() * copies.len();
            for cl in copies {
                let local = hvecs.columns(cl.start, cl.len()).into_owned();
                let basis = &vr * &vl * local;
                minimals.push(MinimalSubspace { basis: SubspaceBasis::from_isometry(basis), index: minimals.len() });
            }
        }
        if !ok {
            continue;
        }
        if algebra_dim != n {
            last_failure = format!("block shapes account for {algebra_dim} algebra dimensions, expected {n}");
            continue;
        }
        return Ok((split, minimals));
    }
    Err(Error::RetryExhausted { attempts: MAX_DRAWS, detail: last_failure })
}

/// Largest absolute eigenvalue of a sorted spectrum; the clustering gap
/// is relative to it.
fn spectral_scale(sorted: &[f64]) -> f64 {
    sorted.first().map_or(0.0, |v| v.abs()).max(sorted.last().map_or(0.0, |v| v.abs())).max(f64::MIN_POSITIVE)
}

/// A maximal family of mutually orthogonal minimal subspaces spanning the
/// recurrent subspace.
pub fn minimal_subspaces(channel: &KrausChannel, tol: Tolerance, seed: u64) -> Result<Vec<MinimalSubspace>> {
    minimal_decomposition(channel, tol, seed).map(|(_, m)| m)
}

/// Tests for a coherence between `p` and `q`. The peripheral eigenvalue with
/// the smallest phase in `[0, 2π)` is used, so a stationary coherence is
/// preferred whenever one exists.
pub fn coherence(
    channel: &KrausChannel,
    p: &MinimalSubspace,
    q: &MinimalSubspace,
    tol: Tolerance,
) -> Result<CoherenceVerdict> {
    if p.dim() != q.dim() {
        return Ok(CoherenceVerdict::none());
    }
    let cm = channel.cross_map(&p.basis, &q.basis, tol)?;
    let peripheral = peripheral_eigenpairs(&cm.rep, tol)?;
    let Some(pair) = peripheral.first() else {
        return Ok(CoherenceVerdict::none());
    };
    let d = p.dim();
    let x = unvec_row(&pair.vector, d, d);
    let u = polar_unitary(&x, tol).map_err(|e| {
        Error::Inconsistency(format!(
            "peripheral eigenvector between minimal subspaces {} and {} is not proportional to a unitary ({e})",
            p.index, q.index
        ))
    })?;
    let mut theta = wrap_pi(pair.value.arg());
    let kind = if theta.abs() <= tol.value() {
        theta = 0.0;
        CoherenceKind::Stationary
    } else {
        CoherenceKind::Continuous
    };
    let ep = channel.compress(&p.basis);
    let eq = channel.compress(&q.basis);
    let residual = relation_residual(&ep, &eq, theta, &u);
    let bound = relation_bound(channel, tol);
    if residual > bound {
        return Err(Error::Inconsistency(format!(
            "coherence between minimal subspaces {} and {} fails the Kraus relation (residual {residual:e} > {bound:e})",
            p.index, q.index
        )));
    }
    Ok(CoherenceVerdict { kind, theta: Some(theta), intertwiner: Some(u), residual })
}

/// Acceptance bound for Kraus relations: `tol · max_k ‖E_k‖`, floored at a
/// few hundred ulps so exact relations are never rejected for roundoff.
fn relation_bound(channel: &KrausChannel, tol: Tolerance) -> f64 {
    (tol.value() * channel.kraus_scale()).max(1e3 * f64::EPSILON)
}

/// Pairwise verdicts for `p < q`, indexed as `table[p][q]`.
#[derive(Debug, Clone)]
pub struct CoherenceTable {
    verdicts: Vec<Vec<Option<CoherenceVerdict>>>,
}

impl CoherenceTable {
    pub fn get(&self, p: usize, q: usize) -> Option<&CoherenceVerdict> {
        let (a, b) = if p < q { (p, q) } else { (q, p) };
        self.verdicts.get(a).and_then(|row| row.get(b)).and_then(|v| v.as_ref())
    }
}

pub fn coherence_table(channel: &KrausChannel, minimals: &[MinimalSubspace], tol: Tolerance) -> Result<CoherenceTable> {
    let m = minimals.len();
    let mut verdicts = vec![vec![None; m]; m];
    for p in 0..m {
        for q in (p + 1)..m {
            verdicts[p][q] = Some(coherence(channel, &minimals[p], &minimals[q], tol)?);
        }
    }
    Ok(CoherenceTable { verdicts })
}

/// Partition of minimal-subspace indices under the coherence relation of
/// `mode`. Every pair inside a class is checked directly; a pair that is
/// joined only through transitivity is reported as an inconsistency.
pub fn equivalence_classes(
    channel: &KrausChannel,
    minimals: &[MinimalSubspace],
    mode: Mode,
    tol: Tolerance,
) -> Result<Vec<Vec<usize>>> {
    let table = coherence_table(channel, minimals, tol)?;
    classes_from_table(&table, minimals.len(), mode)
}

pub fn classes_from_table(table: &CoherenceTable, m: usize, mode: Mode) -> Result<Vec<Vec<usize>>> {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for p in 0..m {
        for q in (p + 1)..m {
            if table.get(p, q).is_some_and(|v| mode.joins(v.kind)) {
                let (a, b) = (find(&mut parent, p), find(&mut parent, q));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_to_class = vec![usize::MAX; m];
    for x in 0..m {
        let r = find(&mut parent, x);
        if root_to_class[r] == usize::MAX {
            root_to_class[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[root_to_class[r]].push(x);
    }
    for class in &classes {
        for (i, &p) in class.iter().enumerate() {
            for &q in &class[i + 1..] {
                if !table.get(p, q).is_some_and(|v| mode.joins(v.kind)) {
                    return Err(Error::Inconsistency(format!(
                        "minimal subspaces {p} and {q} are related only through transitivity"
                    )));
                }
            }
        }
    }
    Ok(classes)
}

/// A class after phase alignment, in member order.
#[derive(Debug, Clone)]
pub struct AlignedClass {
    /// `θ_q` with `E_{k,q} = e^{iθ_q} U_q E_{k,anchor} U_q†`, in `[0, 2π)`.
    pub phases: Vec<f64>,
    /// `V_q U_q`: coordinates in which member `q` acts as `e^{iθ_q} E_{k,anchor}`.
    pub frames: Vec<CMatrix>,
    /// Kraus operators of every member after removing its phase, in its frame.
    pub aligned_kraus: Vec<Vec<CMatrix>>,
    pub base_kraus: Vec<CMatrix>,
}

/// Removes the continuous part of each coherence to the anchor: member `q`
/// with verdict `E_{k,q} = e^{iθ} U E_{k,anchor} U†` gets `E'_{k,q} = e^{−iθ} E_{k,q}`
/// and its phase `θ` is recorded. The first entry of `members` is the anchor;
/// its verdict is ignored.
pub fn phase_align(
    channel: &KrausChannel,
    members: &[(&MinimalSubspace, &CoherenceVerdict)],
    tol: Tolerance,
) -> Result<AlignedClass> {
    let (anchor, _) = members.first().ok_or(Error::Invalid("empty class".into()))?;
    let base_kraus = channel.compress(&anchor.basis);
    let mut phases = Vec::with_capacity(members.len());
    let mut frames = Vec::with_capacity(members.len());
    let mut aligned = Vec::with_capacity(members.len());
    for (i, (member, verdict)) in members.iter().enumerate() {
        if i == 0 {
            phases.push(0.0);
            frames.push(anchor.basis.matrix().clone());
            aligned.push(base_kraus.clone());
            continue;
        }
        let (Some(theta), Some(u)) = (verdict.theta, verdict.intertwiner.as_ref()) else {
            return Err(Error::Invalid(format!("member {} has no coherence with the anchor", member.index)));
        };
        let frame = member.basis.matrix() * u;
        let back = cis(-theta);
        aligned.push(channel.kraus().iter().map(|e| frame.adjoint() * e * &frame * back).collect());
        phases.push(wrap_0_2pi(theta, tol.value()));
        frames.push(frame);
    }
    Ok(AlignedClass { phases, frames, aligned_kraus: aligned, base_kraus })
}

/// Number of unit-modulus eigenvalues of an irreducible channel.
fn period(kraus: &[CMatrix], tol: Tolerance) -> Result<usize> {
    let rep = crate::channel::cross_rep(kraus, kraus);
    Ok(peripheral_eigenpairs(&rep, tol)?.len().max(1))
}

/// Lexicographic comparison with phase tolerance.
fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > PHASE_EQ {
            return x < y;
        }
    }
    false
}

fn relative_phases(phases: &[f64], anchor: usize, modulus: f64) -> Vec<f64> {
    let mut rel: Vec<f64> = phases
        .iter()
        .map(|&p| {
            let r = (p - phases[anchor]).rem_euclid(modulus);
            if modulus - r <= PHASE_EQ {
                0.0
            } else {
                r
            }
        })
        .collect();
    rel.sort_by(f64::total_cmp);
    rel
}

fn build_block(
    channel: &KrausChannel,
    minimals: &[MinimalSubspace],
    class: &[usize],
    mode: Mode,
    tol: Tolerance,
) -> Result<Block> {
    let identity_verdict = CoherenceVerdict::none();
    let first = &minimals[class[0]];
    let base0 = channel.compress(&first.basis);
    let g = period(&base0, tol)?;

    let verdicts_to = |anchor: usize| -> Result<Vec<CoherenceVerdict>> {
        class
            .iter()
            .map(|&q| {
                if q == anchor {
                    Ok(identity_verdict.clone())
                } else {
                    coherence(channel, &minimals[q], &minimals[anchor], tol)
                }
            })
            .collect()
    };

    let mut anchor = class[0];
    let mut verdicts = verdicts_to(anchor)?;
    if mode == Mode::Full && class.len() > 1 {
        let phases: Vec<f64> =
            verdicts.iter().map(|v| v.theta.map(|t| wrap_0_2pi(t, tol.value())).unwrap_or(0.0)).collect();
        let modulus = TAU / g as f64;
        let mut best = 0;
        let mut best_list = relative_phases(&phases, 0, modulus);
        for a in 1..class.len() {
            let list = relative_phases(&phases, a, modulus);
            if lex_less(&list, &best_list) {
                best = a;
                best_list = list;
            }
        }
        if best != 0 {
            anchor = class[best];
            verdicts = verdicts_to(anchor)?;
        }
    }
    if mode == Mode::Noiseless && verdicts.iter().any(|v| v.kind == CoherenceKind::Continuous) {
        return Err(Error::Inconsistency("noiseless class contains a non-stationary coherence".into()));
    }

    // anchor first, then the rest in class order
    let mut order: Vec<usize> = Vec::with_capacity(class.len());
    let anchor_pos = class.iter().position(|&q| q == anchor).expect("anchor in class");
    order.push(anchor_pos);
    order.extend((0..class.len()).filter(|&i| i != anchor_pos));
    let members: Vec<(&MinimalSubspace, &CoherenceVerdict)> =
        order.iter().map(|&i| (&minimals[class[i]], &verdicts[i])).collect();
    let aligned = phase_align(channel, &members, tol)?;

    let mut slots: Vec<usize> = (0..aligned.phases.len()).collect();
    slots.sort_by(|&a, &b| {
        let (x, y) = (aligned.phases[a], aligned.phases[b]);
        if (x - y).abs() <= PHASE_EQ {
            a.cmp(&b)
        } else {
            x.total_cmp(&y)
        }
    });
    let b_dim = first.dim();
    let frames: Vec<&CMatrix> = slots.iter().map(|&s| &aligned.frames[s]).collect();
    let frame = SubspaceBasis::concat(channel.dim(), &frames);
    let phases: Vec<f64> =
        slots.iter().map(|&s| if mode == Mode::Noiseless { 0.0 } else { aligned.phases[s] }).collect();
    let base = KrausChannel::new(aligned.base_kraus.clone())?;
    let rho = maximal_stationary_state(&base, tol)?.stationary;
    Ok(Block {
        m: class.len(),
        b_dim,
        frame: SubspaceBasis::from_isometry(frame),
        phases,
        base_kraus: aligned.base_kraus,
        rho,
        period: g,
    })
}

fn block_key(b: &Block) -> (usize, usize, Vec<i64>) {
    let rounded = b.phases.iter().map(|p| (p / PHASE_EQ).round() as i64).collect();
    (b.m, b.b_dim, rounded)
}

fn decompose(channel: &KrausChannel, tol: Tolerance, seed: u64, mode: Mode) -> Result<StructureDecomposition> {
    let (split, minimals) = minimal_decomposition(channel, tol, seed)?;
    let classes = equivalence_classes(channel, &minimals, mode, tol)?;
    let mut blocks =
        classes.iter().map(|class| build_block(channel, &minimals, class, mode, tol)).collect::<Result<Vec<_>>>()?;
    blocks.sort_by_key(block_key);
    let dec = StructureDecomposition { blocks, decay: split.decay, mode, ambient_dim: channel.dim() };
    let report = verify_block_form(channel, &dec);
    let gate = 10.0 * relation_bound(channel, tol);
    if report.max_constrained() > gate {
        return Err(Error::Inconsistency(format!(
            "block form residual {:e} exceeds {gate:e}",
            report.max_constrained()
        )));
    }
    Ok(dec)
}

/// The unique decomposition into coherence blocks plus the decay subspace.
pub fn structure_decomposition(channel: &KrausChannel, tol: Tolerance, seed: u64) -> Result<StructureDecomposition> {
    decompose(channel, tol, seed, Mode::Full)
}

/// The same pipeline under stationary coherences only: the fixed-point
/// (noiseless) decomposition, with every phase equal to 0.
pub fn noiseless_decomposition(channel: &KrausChannel, tol: Tolerance, seed: u64) -> Result<StructureDecomposition> {
    decompose(channel, tol, seed, Mode::Noiseless)
}

pub fn decomposition(channel: &KrausChannel, tol: Tolerance, seed: u64, mode: Mode) -> Result<StructureDecomposition> {
    decompose(channel, tol, seed, mode)
}

/// Residuals of the Kraus operators against the block form, per category,
/// after the change of basis to `[W_1 | … | W_L | K]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BlockFormReport {
    /// `‖Q†Q − I‖` for the full frame `Q`.
    pub frame_defect: f64,
    /// Couplings between different blocks.
    pub inter_block: f64,
    /// Lower-left block (recurrent columns, decay rows); must vanish.
    pub decay_to_recurrent: f64,
    /// Deviation from `diag(e^{iθ}) ⊗ E_{k,l}` inside blocks.
    pub intra_block: f64,
    /// Largest `‖T_k‖` (unconstrained).
    pub transfer_norm: f64,
    /// Largest `‖K_k‖` (unconstrained).
    pub decay_norm: f64,
}

impl BlockFormReport {
    pub fn max_constrained(&self) -> f64 {
        self.frame_defect.max(self.inter_block).max(self.decay_to_recurrent).max(self.intra_block)
    }
}

pub fn verify_block_form(channel: &KrausChannel, dec: &StructureDecomposition) -> BlockFormReport {
    let q = dec.full_frame();
    let d = channel.dim();
    let mut report = BlockFormReport::default();
    if q.shape() != (d, d) {
        report.frame_defect = f64::INFINITY;
        return report;
    }
    report.frame_defect = op_norm(&(q.adjoint() * &q - CMatrix::identity(d, d)));
    let sizes: Vec<usize> = dec.blocks.iter().map(|b| b.m * b.b_dim).collect();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let rec: usize = sizes.iter().sum();
    let kd = d - rec;
    let unitaries: Vec<CMatrix> = dec.blocks.iter().map(Block::unitary).collect();
    for (k, e) in channel.kraus().iter().enumerate() {
        let b = q.adjoint() * e * &q;
        for (l, block) in dec.blocks.iter().enumerate() {
            for (l2, _) in dec.blocks.iter().enumerate() {
                if l != l2 {
                    let off = b.view((offsets[l], offsets[l2]), (sizes[l], sizes[l2])).into_owned();
                    report.inter_block = report.inter_block.max(op_norm(&off));
                }
            }
            let diag = b.view((offsets[l], offsets[l]), (sizes[l], sizes[l])).into_owned();
            let expect = kron(&unitaries[l], &block.base_kraus[k]);
            report.intra_block = report.intra_block.max(op_norm(&(diag - expect)));
        }
        if kd > 0 {
            let lower = b.view((rec, 0), (kd, rec)).into_owned();
            report.decay_to_recurrent = report.decay_to_recurrent.max(op_norm(&lower));
            let t = b.view((0, rec), (rec, kd)).into_owned();
            report.transfer_norm = report.transfer_norm.max(op_norm(&t));
            let kk = b.view((rec, rec), (kd, kd)).into_owned();
            report.decay_norm = report.decay_norm.max(op_norm(&kk));
        }
    }
    report
}
