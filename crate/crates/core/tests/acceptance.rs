//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use dfskit::channel::KrausChannel;
use dfskit::construct::{self, paper_example, random_spec, sign_twisted_example, synthesize, Synthesized};
use dfskit::dfs::{capacity_report, maximal_dfs, verify_definition};
use dfskit::fixedpoint::maximal_stationary_state;
use dfskit::mps::{expand, is_repeated, MpsTensor};
use dfskit::numerics::{cis, eig, frobenius, null_space, CMatrix, SubspaceBasis, Tolerance};
use dfskit::oracle::{cesaro_stationary, check_minimality, support, support_distance};
use dfskit::report::DecompositionReport;
use dfskit::structure::{
    coherence, minimal_subspaces, noiseless_decomposition, structure_decomposition, CoherenceKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: Tolerance = Tolerance(1e-9);
const SEED: u64 = 7;

const PHASE_TOL: f64 = 1e-8;
const RUNTIME_LIMIT_S: f64 = 5.0;
const DEFINITION_TOL: f64 = 1e-8;
const ROUNDTRIP_INSTANCES: usize = 50;
const PERIPHERAL_TOL: f64 = 1e-9;
const RELATION_TOL: f64 = 1e-8;
const REPEATED_PAIRS: usize = 50;
const REPEATED_TOL: f64 = 1e-8;
const ORACLE_CHANNELS: usize = 50;
const CESARO_TOL: f64 = 1e-4;
const CESARO_N_MAX: usize = 1 << 20;
const SUPPORT_REL: f64 = 1e-3;
const SUPPORT_DIST: f64 = 1e-3;
const MINIMALITY_TOL: f64 = 1e-9;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Synthesized channels with `D ≤ 12`, `L ≤ 2`, `m_l ≤ 4`.
fn synthetic_corpus(n: usize, seed: u64) -> Vec<Synthesized> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let spec = random_spec(12, 2, 4, &mut rng);
            synthesize(&spec, true, &mut rng)
        })
        .collect()
}

fn full_corpus() -> Vec<(String, KrausChannel)> {
    let mut out = vec![
        ("example".to_string(), paper_example()),
        ("twisted example".to_string(), sign_twisted_example()),
        ("identity".to_string(), KrausChannel::identity(3)),
    ];
    for (i, s) in synthetic_corpus(ROUNDTRIP_INSTANCES, 1000).into_iter().enumerate() {
        out.push((format!("synthetic #{i}"), s.channel));
    }
    out
}

fn criterion_1() -> Outcome {
    let ch = paper_example();
    let start = Instant::now();
    let dec = match structure_decomposition(&ch, TOL, SEED) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("decomposition failed: {e}")),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let shape: Vec<(usize, usize)> = dec.blocks.iter().map(|b| (b.m, b.b_dim)).collect();
    let mut phases = dec.blocks.first().map(|b| b.phases.clone()).unwrap_or_default();
    phases.sort_by(f64::total_cmp);
    let expected = [0.0, 0.0, PI, PI];
    let phases_ok = phases.len() == 4 && phases.iter().zip(expected).all(|(p, e)| circ(*p, e) <= PHASE_TOL);
    let pass = shape == vec![(4, 2)] && phases_ok && dec.decay.dim() == 4 && elapsed < RUNTIME_LIMIT_S;
    outcome(
        pass,
        format!(
            "blocks {shape:?}, phases {phases:.9?} (expected {{0,0,π,π}}), decay dim {}, {elapsed:.3}s",
            dec.decay.dim()
        ),
    )
}

fn criterion_2() -> Outcome {
    let ch = paper_example();
    let nl = match noiseless_decomposition(&ch, TOL, SEED) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("noiseless decomposition failed: {e}")),
    };
    let full = match structure_decomposition(&ch, TOL, SEED) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("decomposition failed: {e}")),
    };
    let shape: Vec<(usize, usize)> = nl.blocks.iter().map(|b| (b.m, b.b_dim)).collect();
    let cap = capacity_report(&full);
    let (dfs_q, nl_q) = cap.first().map_or((f64::NAN, f64::NAN), |c| (c.dfs_qubits, c.noiseless_qubits));
    let pass = shape == vec![(2, 2), (2, 2)] && nl.decay.dim() == 4 && cap.len() == 1 && dfs_q == 2.0 && nl_q == 1.0;
    outcome(
        pass,
        format!(
            "noiseless blocks {shape:?} (expected [(2, 2), (2, 2)]), decay dim {}, capacity DFS {dfs_q} qubits vs noiseless {nl_q} (expected 2 vs 1)",
            nl.decay.dim()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut channels = vec![paper_example()];
    channels.extend(synthetic_corpus(30, 3000).into_iter().map(|s| s.channel));
    let (mut worst_f, mut worst_u) = (0.0f64, 0.0f64);
    let mut checked = 0;
    for (i, ch) in channels.iter().enumerate() {
        let dec = match structure_decomposition(ch, TOL, SEED) {
            Ok(d) => d,
            Err(e) => return outcome(false, format!("channel {i}: {e}")),
        };
        for dfs in maximal_dfs(&dec) {
            match verify_definition(ch, &dfs, 100, SEED + i as u64) {
                Ok(r) => {
                    worst_f = worst_f.max(r.max_factorization_error);
                    worst_u = worst_u.max(r.max_unitary_error);
                    checked += 1;
                }
                Err(e) => return outcome(false, format!("channel {i}: {e}")),
            }
        }
    }
    outcome(
        worst_f <= DEFINITION_TOL && worst_u <= DEFINITION_TOL,
        format!("{checked} subsystems, max factorization error {worst_f:.2e}, max unitary error {worst_u:.2e}"),
    )
}

/// Gauge-canonical phase list: anchor chosen so the sorted relative phases
/// are lexicographically smallest.
fn canonical(phases: &[f64]) -> Vec<f64> {
    let mut best: Option<Vec<f64>> = None;
    for a in phases {
        let mut rel: Vec<f64> = phases
            .iter()
            .map(|p| {
                let r = (p - a).rem_euclid(TAU);
                if TAU - r <= 1e-9 {
                    0.0
                } else {
                    r
                }
            })
            .collect();
        rel.sort_by(f64::total_cmp);
        let smaller = match &best {
            None => true,
            Some(b) => rel.iter().zip(b).find(|(x, y)| (*x - *y).abs() > 1e-9).is_some_and(|(x, y)| x < y),
        };
        if smaller {
            best = Some(rel);
        }
    }
    best.unwrap_or_default()
}

type BlockKey = (usize, usize, Vec<f64>);

fn sorted_keys(mut keys: Vec<BlockKey>) -> Vec<BlockKey> {
    keys.sort_by(|a, b| {
        (a.0, a.1).cmp(&(b.0, b.1)).then_with(|| {
            a.2.iter().zip(&b.2).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    keys
}

fn criterion_4() -> Outcome {
    let corpus = synthetic_corpus(ROUNDTRIP_INSTANCES, 1000);
    let mut worst = 0.0f64;
    for (i, s) in corpus.iter().enumerate() {
        let dec = match structure_decomposition(&s.channel, TOL, SEED) {
            Ok(d) => d,
            Err(e) => return outcome(false, format!("instance {i}: {e}")),
        };
        let expected = sorted_keys(s.spec.blocks.iter().map(|b| (b.m, b.b_dim, canonical(&b.phases))).collect());
        let got = sorted_keys(dec.blocks.iter().map(|b| (b.m, b.b_dim, canonical(&b.phases))).collect());
        let shapes = |k: &[BlockKey]| k.iter().map(|x| (x.0, x.1)).collect::<Vec<_>>();
        if shapes(&expected) != shapes(&got) {
            return outcome(
                false,
                format!("instance {i}: blocks {:?}, expected {:?}", shapes(&got), shapes(&expected)),
            );
        }
        if dec.decay.dim() != s.spec.decay_dim {
            return outcome(
                false,
                format!("instance {i}: decay dim {} expected {}", dec.decay.dim(), s.spec.decay_dim),
            );
        }
        for (e, g) in expected.iter().zip(&got) {
            for (x, y) in e.2.iter().zip(&g.2) {
                worst = worst.max(circ(*x, *y));
            }
        }
    }
    outcome(worst <= PHASE_TOL, format!("{ROUNDTRIP_INSTANCES} instances, max phase-difference error {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let corpus = synthetic_corpus(ROUNDTRIP_INSTANCES, 1000);
    let (mut worst_eig, mut worst_rel, mut worst_sym) = (0.0f64, 0.0f64, 0.0f64);
    let (mut pairs, mut triples) = (0usize, 0usize);
    for (i, s) in corpus.iter().enumerate() {
        // constructed coherent pairs, in the construction frame
        let mut offset = 0;
        for b in &s.spec.blocks {
            let copy = |p: usize| {
                let cols = s.frame.columns(offset + p * b.b_dim, b.b_dim).into_owned();
                SubspaceBasis::from_isometry(cols)
            };
            for p in 0..b.m {
                for q in 0..b.m {
                    if p == q {
                        continue;
                    }
                    let theta = b.phases[p] - b.phases[q];
                    let cm = match s.channel.cross_map(&copy(q), &copy(p), TOL) {
                        Ok(cm) => cm,
                        Err(e) => return outcome(false, format!("instance {i}: {e}")),
                    };
                    let target = cis(-theta);
                    let dist = eig(&cm.rep)
                        .map(|ev| ev.iter().map(|x| (x.value - target).norm()).fold(f64::INFINITY, f64::min))
                        .unwrap_or(f64::INFINITY);
                    worst_eig = worst_eig.max(dist);
                    pairs += 1;
                }
            }
            offset += b.m * b.b_dim;
        }

        // verdicts on the computed minimal subspaces
        let mins = match minimal_subspaces(&s.channel, TOL, SEED) {
            Ok(m) => m,
            Err(e) => return outcome(false, format!("instance {i}: {e}")),
        };
        let n = mins.len();
        let mut related = vec![vec![false; n]; n];
        for p in 0..n {
            for q in 0..n {
                if p == q {
                    related[p][q] = true;
                    continue;
                }
                let v = match coherence(&s.channel, &mins[p], &mins[q], TOL) {
                    Ok(v) => v,
                    Err(e) => return outcome(false, format!("instance {i}: {e}")),
                };
                let w = match coherence(&s.channel, &mins[q], &mins[p], TOL) {
                    Ok(v) => v,
                    Err(e) => return outcome(false, format!("instance {i}: {e}")),
                };
                if v.kind != w.kind {
                    return outcome(false, format!("instance {i}: asymmetric verdict for ({p}, {q})"));
                }
                if v.kind != CoherenceKind::None {
                    let (t, u) = (v.theta.unwrap(), v.intertwiner.clone().unwrap());
                    let ep = s.channel.compress(&mins[p].basis);
                    let eq = s.channel.compress(&mins[q].basis);
                    worst_rel = worst_rel.max(dfskit::channel::relation_residual(&ep, &eq, t, &u));
                    worst_sym = worst_sym.max(circ(t, -w.theta.unwrap()));
                    related[p][q] = true;
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    if related[p][q] && related[q][r] {
                        triples += 1;
                        if !related[p][r] {
                            return outcome(false, format!("instance {i}: transitivity fails for ({p}, {q}, {r})"));
                        }
                    }
                }
            }
        }
    }
    let pass = worst_eig <= PERIPHERAL_TOL && worst_rel <= RELATION_TOL && worst_sym <= RELATION_TOL;
    outcome(
        pass,
        format!(
            "{pairs} constructed pairs, max |λ − e^(−iθ)| {worst_eig:.2e}; max relation residual {worst_rel:.2e}; max symmetry phase error {worst_sym:.2e}; {triples} triples transitive"
        ),
    )
}

fn random_tensor(rng: &mut ChaCha8Rng) -> MpsTensor {
    let bond = rng.random_range(1..=6);
    let phys = rng.random_range(2..=5);
    MpsTensor::new(construct::random_kraus(bond, phys, rng)).expect("square")
}

fn proportional(a: &dfskit::CVector, b: &dfskit::CVector) -> bool {
    let overlap = a.dotc(b).norm();
    overlap >= (1.0 - 1e-6) * a.norm() * b.norm()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6000);
    let (mut worst_phase, mut worst_u, mut worst_expand) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..REPEATED_PAIRS {
        let b = random_tensor(&mut rng);
        let w = construct::random_unitary(b.bond_dim(), &mut rng);
        let theta0 = rng.random_range(-PI..PI);
        // A_k = e^{iθ₀} W B_k W†
        let a = b.twisted(theta0, &w);
        let v = match is_repeated(&a, &b, TOL) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("pair {i}: {e}")),
        };
        if !v.repeated {
            return outcome(false, format!("repeated pair {i} not detected"));
        }
        worst_phase = worst_phase.max(circ(v.theta.unwrap(), theta0));
        let g = v.intertwiner.unwrap() * w.adjoint();
        let c = g[(0, 0)];
        worst_u = worst_u.max(frobenius(&(g - CMatrix::identity(b.bond_dim(), b.bond_dim()) * c)));
        for n in 1..=5 {
            let (ea, eb) = (expand(&a, n).unwrap(), expand(&b, n).unwrap());
            worst_expand = worst_expand.max((ea - eb * cis(n as f64 * theta0)).norm());
        }
    }
    let mut rejected = 0;
    let mut drawn = 0;
    while rejected < REPEATED_PAIRS {
        let a = random_tensor(&mut rng);
        let b = random_tensor(&mut rng);
        if a.phys_dim() != b.phys_dim() {
            continue;
        }
        drawn += 1;
        // reject accidental repeats with the dense expansion
        if (1..=4).any(|n| proportional(&expand(&a, n).unwrap(), &expand(&b, n).unwrap())) {
            continue;
        }
        match is_repeated(&a, &b, TOL) {
            Ok(v) if !v.repeated => rejected += 1,
            Ok(_) => return outcome(false, format!("non-repeated pair {drawn} reported as repeated")),
            Err(e) => return outcome(false, format!("non-repeated pair {drawn}: {e}")),
        }
    }
    let pass = worst_phase <= REPEATED_TOL && worst_u <= REPEATED_TOL && worst_expand <= REPEATED_TOL;
    outcome(
        pass,
        format!(
            "{REPEATED_PAIRS} repeated detected (max phase error {worst_phase:.2e}, intertwiner error {worst_u:.2e}, expansion error {worst_expand:.2e}); {rejected} non-repeated rejected"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7000);
    let mut worst_support = 0.0f64;
    for i in 0..ORACLE_CHANNELS {
        let ch = if i % 2 == 0 {
            let d = rng.random_range(1..=6);
            construct::random_channel(d, rng.random_range(1..=3), &mut rng)
        } else {
            synthesize(&random_spec(6, 2, 3, &mut rng), true, &mut rng).channel
        };
        let split = match maximal_stationary_state(&ch, TOL) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("channel {i}: {e}")),
        };
        let rho = match cesaro_stationary(&ch, CESARO_N_MAX, CESARO_TOL) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("channel {i}: Cesàro oracle: {e}")),
        };
        let dist = support_distance(&support(&rho, SUPPORT_REL), &split.recurrent);
        worst_support = worst_support.max(dist);
    }
    let mut minimal_checked = 0;
    let mut worst_min = 0.0f64;
    let mut fix_mismatch = Vec::new();
    for (name, ch) in full_corpus() {
        let mins = match minimal_subspaces(&ch, TOL, SEED) {
            Ok(m) => m,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        for m in &mins {
            match check_minimality(&ch, &m.basis, TOL) {
                Ok(r) => worst_min = worst_min.max(r.discrepancy),
                Err(e) => return outcome(false, format!("{name}: {e}")),
            }
            minimal_checked += 1;
        }
        let d = ch.dim();
        let nullity = null_space(&(ch.matrix_rep() - CMatrix::identity(d * d, d * d)), TOL).dim();
        match structure_decomposition(&ch, TOL, SEED) {
            Ok(dec) if dec.fix_dim() == nullity => {}
            Ok(dec) => fix_mismatch.push(format!("{name}: {} vs {nullity}", dec.fix_dim())),
            Err(e) => return outcome(false, format!("{name}: {e}")),
        }
    }
    let pass = worst_support <= SUPPORT_DIST && worst_min <= MINIMALITY_TOL && fix_mismatch.is_empty();
    outcome(
        pass,
        format!(
            "{ORACLE_CHANNELS} channels, max support distance {worst_support:.2e}; {minimal_checked} minimal subspaces, max discrepancy {worst_min:.1}; fix-dim mismatches {fix_mismatch:?}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut compared = 0;
    for (name, ch) in full_corpus() {
        for dec_fn in [structure_decomposition, noiseless_decomposition] {
            let run = || dec_fn(&ch, TOL, SEED).map(|d| DecompositionReport::new(&ch, &d, TOL.value(), SEED).to_json());
            match (run(), run()) {
                (Ok(a), Ok(b)) if a == b => compared += 1,
                (Ok(_), Ok(_)) => return outcome(false, format!("{name}: reports differ")),
                (Err(e), _) | (_, Err(e)) => return outcome(false, format!("{name}: {e}")),
            }
        }
    }
    outcome(true, format!("{compared} report pairs byte-identical"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("worked example, full decomposition", criterion_1),
        ("worked example, noiseless mode and capacity", criterion_2),
        ("subsystem definition on product inputs", criterion_3),
        ("roundtrip decomposition", criterion_4),
        ("coherence biconditional suite", criterion_5),
        ("repeated-tensor suite", criterion_6),
        ("oracle agreement", criterion_7),
        ("determinism", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} {id} {name}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
