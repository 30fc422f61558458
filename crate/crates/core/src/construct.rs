//! Channel and tensor constructors: the 12-dimensional worked example,
//! random unitaries and states, and channels synthesized directly in block
//! form (used as ground truth by the test suites and benchmarks).

use nalgebra::QR;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{cross_rep, KrausChannel};
use crate::numerics::{self, c, cis, kron, CMatrix};

/// Basis index of `|a⟩_A ⊗ |b⟩_B` in the 4 × 3 example.
fn ab(a: usize, b: usize) -> usize {
    a * 3 + b
}

fn signed_sector_op(signs: &[f64; 4], out_b: usize, in_b: usize, weight: f64) -> CMatrix {
    let mut e = CMatrix::zeros(12, 12);
    for (a, s) in signs.iter().enumerate() {
        e[(ab(a, out_b), ab(a, in_b))] = c(s * weight, 0.0);
    }
    e
}

/// The worked example on `C^4 ⊗ C^3`:
/// `E_1 = Σ_a s_a |a0⟩⟨a1|`, `E_2 = Σ_a s_a |a1⟩⟨a0|`, `E_3 = Σ_a s_a |a0⟩⟨a2|`
/// with signs `s = (1, 1, −1, −1)`.
pub fn paper_example() -> KrausChannel {
    let s = [1.0, 1.0, -1.0, -1.0];
    KrausChannel::new(vec![
        signed_sector_op(&s, 0, 1, 1.0),
        signed_sector_op(&s, 1, 0, 1.0),
        signed_sector_op(&s, 0, 2, 1.0),
    ])
    .expect("well-formed Kraus set")
}

/// Variant of [`paper_example`] whose base channel on `span{|0⟩,|1⟩}_B` is
/// aperiodic, so the sign pattern cannot be gauged away: the `−1` sectors
/// are continuously but not stationarily coherent with the `+1` sectors.
pub fn sign_twisted_example() -> KrausChannel {
    let s = [1.0, 1.0, -1.0, -1.0];
    let h = 0.5f64.sqrt();
    let mut lazy = signed_sector_op(&s, 0, 0, h);
    lazy += signed_sector_op(&s, 1, 1, h);
    KrausChannel::new(vec![
        signed_sector_op(&s, 0, 1, h),
        signed_sector_op(&s, 1, 0, h),
        lazy,
        signed_sector_op(&s, 0, 2, 1.0),
    ])
    .expect("well-formed Kraus set")
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = 0.5f64.sqrt();
    CMatrix::from_fn(rows, cols, |_, _| c(s * gaussian(rng), s * gaussian(rng)))
}

/// Haar-random unitary (QR of a Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let (q, r) = QR::new(random_matrix(n, n, rng)).unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let col = q.column(j) * ph;
        q.set_column(j, &col);
    }
    q
}

/// Random density matrix `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(n, n, rng);
    let rho = &g * g.adjoint();
    let t = crate::channel::trace(&rho);
    rho / t
}

/// Random pure state as a unit column vector.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> numerics::CVector {
    let v = random_matrix(n, 1, rng).column(0).into_owned();
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// `n_kraus` blocks of a random `(n_kraus·d) × d` isometry: a trace
/// preserving Kraus set, irreducible and aperiodic with probability one
/// when `n_kraus ≥ 2`.
pub fn random_kraus<R: Rng + ?Sized>(d: usize, n_kraus: usize, rng: &mut R) -> Vec<CMatrix> {
    let g = random_matrix(n_kraus * d, d, rng);
    let q = QR::new(g).q();
    (0..n_kraus).map(|k| q.rows(k * d, d).into_owned()).collect()
}

pub fn random_channel<R: Rng + ?Sized>(d: usize, n_kraus: usize, rng: &mut R) -> KrausChannel {
    KrausChannel::new(random_kraus(d, n_kraus, rng)).expect("square Kraus")
}

/// One coherence block `diag(e^{iθ_p}) ⊗ E_{k}` of a synthesized channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub m: usize,
    pub b_dim: usize,
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub blocks: Vec<BlockSpec>,
    pub decay_dim: usize,
    pub n_kraus: usize,
}

impl ChannelSpec {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.m * b.b_dim).sum::<usize>() + self.decay_dim
    }
}

#[derive(Debug, Clone)]
pub struct Synthesized {
    pub spec: ChannelSpec,
    pub channel: KrausChannel,
    /// Unitary taking block coordinates to the ambient basis.
    pub frame: CMatrix,
    /// Base Kraus operators `E_{k,l}` per block.
    pub base_kraus: Vec<Vec<CMatrix>>,
}

/// Builds `E_k = Q · [[⊕_l U_l ⊗ E_{k,l}, T_k], [0, K_k]] · Q†` with random
/// irreducible bases, random decay couplings and a random frame `Q`
/// (identity when `rotate` is false). The decay part is resampled until
/// its own map is strictly contracting.
pub fn synthesize<R: Rng + ?Sized>(spec: &ChannelSpec, rotate: bool, rng: &mut R) -> Synthesized {
    let n = spec.n_kraus;
    let rec: usize = spec.blocks.iter().map(|b| b.m * b.b_dim).sum();
    let dim = rec + spec.decay_dim;
    let base_kraus: Vec<Vec<CMatrix>> = spec.blocks.iter().map(|b| random_kraus(b.b_dim, n, rng)).collect();

    let mut blocks: Vec<CMatrix> = vec![CMatrix::zeros(dim, dim); n];
    let mut at = 0;
    for (spec_l, base) in spec.blocks.iter().zip(&base_kraus) {
        assert_eq!(spec_l.phases.len(), spec_l.m, "one phase per copy");
        let u =
            CMatrix::from_diagonal(&numerics::CVector::from_iterator(spec_l.m, spec_l.phases.iter().map(|&t| cis(t))));
        let size = spec_l.m * spec_l.b_dim;
        for (k, e) in base.iter().enumerate() {
            blocks[k].view_mut((at, at), (size, size)).copy_from(&kron(&u, e));
        }
        at += size;
    }

    if spec.decay_dim > 0 {
        let kd = spec.decay_dim;
        loop {
            // stacked recurrent columns [R_1; R_2; ...] form an isometry; the
            // decay columns must be orthonormal and orthogonal to them
            let mut s_r = CMatrix::zeros(n * dim, rec);
            for (k, b) in blocks.iter().enumerate() {
                s_r.view_mut((k * dim, 0), (dim, rec)).copy_from(&b.columns(0, rec));
            }
            let mut g = CMatrix::zeros(n * dim, kd);
            for k in 0..n {
                g.view_mut((k * dim, 0), (dim, kd)).copy_from(&random_matrix(dim, kd, rng));
            }
            let g = &g - &s_r * (s_r.adjoint() * &g);
            let s_k = QR::new(g).q();
            let mut trial = blocks.clone();
            for (k, t) in trial.iter_mut().enumerate() {
                t.view_mut((0, rec), (dim, kd)).copy_from(&s_k.rows(k * dim, dim));
            }
            let kk: Vec<CMatrix> = trial.iter().map(|b| b.view((rec, rec), (kd, kd)).into_owned()).collect();
            let radius = numerics::eig(&cross_rep(&kk, &kk))
                .map(|ev| ev.iter().map(|p| p.value.norm()).fold(0.0, f64::max))
                .unwrap_or(1.0);
            if radius < 0.95 {
                blocks = trial;
                break;
            }
        }
    }

    let frame = if rotate { random_unitary(dim, rng) } else { CMatrix::identity(dim, dim) };
    let kraus: Vec<CMatrix> = blocks.iter().map(|b| &frame * b * frame.adjoint()).collect();
    Synthesized { spec: spec.clone(), channel: KrausChannel::new(kraus).expect("square Kraus"), frame, base_kraus }
}

/// Draws a random block layout with `L ≤ max_blocks`, `m_l ≤ max_m`,
/// total dimension at most `max_dim`. Phases are drawn from multiples of
/// `π/3` half of the time so equal-phase clusters occur.
pub fn random_spec<R: Rng + ?Sized>(max_dim: usize, max_blocks: usize, max_m: usize, rng: &mut R) -> ChannelSpec {
    loop {
        let l = rng.random_range(1..=max_blocks);
        let mut blocks = Vec::with_capacity(l);
        for _ in 0..l {
            let m = rng.random_range(1..=max_m);
            let b_dim = rng.random_range(1..=3);
            let discrete = rng.random_bool(0.5);
            let mut phases = vec![0.0];
            for _ in 1..m {
                let t = if discrete {
                    rng.random_range(0..6) as f64 * std::f64::consts::PI / 3.0
                } else {
                    rng.random_range(0.0..std::f64::consts::TAU)
                };
                phases.push(t);
            }
            blocks.push(BlockSpec { m, b_dim, phases });
        }
        let rec: usize = blocks.iter().map(|b| b.m * b.b_dim).sum();
        if rec > max_dim {
            continue;
        }
        let decay_dim = rng.random_range(0..=(max_dim - rec).min(3));
        return ChannelSpec { blocks, decay_dim, n_kraus: rng.random_range(2..=3) };
    }
}
