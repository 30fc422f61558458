//! Fixed points, the maximal stationary state and the recurrent/decay split.

use nalgebra::LU;

use crate::channel::{trace, KrausChannel};
use crate::numerics::{
    self, c, null_space_scaled, orthonormalize_hermitian, unvec_row, vec_row, CMatrix, SubspaceBasis, Tolerance,
};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct FixedPointSpace {
    pub channel_dim: usize,
    pub basis: Vec<CMatrix>,
    /// Same span, Hermitian and orthonormal under `tr(A B)`.
    pub hermitian_basis: Vec<CMatrix>,
}

impl FixedPointSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Debug, Clone)]
pub struct RecurrentSplit {
    pub recurrent: SubspaceBasis,
    pub decay: SubspaceBasis,
    pub stationary: CMatrix,
}

fn shifted_rep(channel: &KrausChannel) -> CMatrix {
    let n = channel.dim() * channel.dim();
    channel.matrix_rep() - CMatrix::identity(n, n)
}

pub fn fixed_point_space(channel: &KrausChannel, tol: Tolerance) -> Result<FixedPointSpace> {
    let d = channel.dim();
    let null = null_space_scaled(&shifted_rep(channel), tol, 1.0);
    let basis: Vec<CMatrix> = null.matrix().column_iter().map(|v| unvec_row(&v.into_owned(), d, d)).collect();
    let mut herm = Vec::with_capacity(2 * basis.len());
    for x in &basis {
        herm.push(x + x.adjoint());
        herm.push((x - x.adjoint()) * c(0.0, 1.0));
    }
    let hermitian_basis = orthonormalize_hermitian(&herm, tol);
    if hermitian_basis.len() != basis.len() {
        return Err(Error::Inconsistency(format!(
            "fixed-point space has complex dimension {} but its Hermitian span has dimension {}",
            basis.len(),
            hermitian_basis.len()
        )));
    }
    Ok(FixedPointSpace { channel_dim: d, basis, hermitian_basis })
}

/// Spectral projector of `matrix_rep` at eigenvalue 1, `R (L†R)⁻¹ L†`.
///
/// The eigenvalue 1 of a trace-preserving map is semisimple, so right and
/// left null spaces of `M − I` have equal dimension and `L†R` is invertible.
pub fn fixed_point_projector(channel: &KrausChannel, tol: Tolerance) -> Result<CMatrix> {
    let shifted = shifted_rep(channel);
    let right = null_space_scaled(&shifted, tol, 1.0);
    let left = null_space_scaled(&shifted.adjoint(), tol, 1.0);
    if right.is_empty() {
        return Err(Error::NoStationaryState);
    }
    if right.dim() != left.dim() {
        return Err(Error::Inconsistency(format!(
            "eigenvalue 1 has {} right but {} left eigenvectors",
            right.dim(),
            left.dim()
        )));
    }
    let (r, l) = (right.matrix(), left.matrix());
    let overlap = l.adjoint() * r;
    let inv = LU::new(overlap).try_inverse().ok_or(Error::Inconsistency(
        "eigenvalue 1 is not semisimple (left/right eigenvectors are orthogonal)".into(),
    ))?;
    Ok(r * inv * l.adjoint())
}

pub fn maximal_stationary_state(channel: &KrausChannel, tol: Tolerance) -> Result<RecurrentSplit> {
    let d = channel.dim();
    let proj = fixed_point_projector(channel, tol)?;
    let seed = CMatrix::identity(d, d) / c(d as f64, 0.0);
    let rho = unvec_row(&(proj * vec_row(&seed)), d, d);
    let rho = numerics::hermitian_part(&rho);
    let (values, vectors) = numerics::eigh(&rho);
    let max = values.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::NoStationaryState);
    }
    let t = tol.value();
    // clip roundoff negatives and renormalize
    let clipped: Vec<f64> = values.iter().map(|&v| if v < 0.0 && v >= -t * max.max(1.0) { 0.0 } else { v }).collect();
    if clipped.iter().any(|&v| v < 0.0) {
        return Err(Error::Inconsistency("projected stationary state is not positive".into()));
    }
    let total: f64 = clipped.iter().sum();
    let support: Vec<usize> = (0..d).filter(|&i| clipped[i] > t * max).collect();
    let kernel: Vec<usize> = (0..d).filter(|&i| clipped[i] <= t * max).collect();
    let mut stationary = CMatrix::zeros(d, d);
    for &i in &support {
        let v = vectors.column(i);
        stationary += v * v.adjoint() * c(clipped[i] / total, 0.0);
    }
    let pick = |idx: &[usize]| {
        let mut m = CMatrix::zeros(d, idx.len());
        for (col, &i) in idx.iter().enumerate() {
            m.set_column(col, &vectors.column(i));
        }
        SubspaceBasis::from_isometry(m)
    };
    Ok(RecurrentSplit { recurrent: pick(&support), decay: pick(&kernel), stationary })
}

/// One stationary state, and it has full rank.
pub fn is_irreducible(channel: &KrausChannel, tol: Tolerance) -> Result<bool> {
    let fix_dim = null_space_scaled(&shifted_rep(channel), tol, 1.0).dim();
    if fix_dim != 1 {
        return Ok(false);
    }
    let split = maximal_stationary_state(channel, tol)?;
    Ok(split.decay.is_empty())
}

/// Largest residual `‖ℰ(X) − X‖` over a fixed-point basis.
pub fn fixed_point_residual(channel: &KrausChannel, space: &FixedPointSpace) -> f64 {
    space.basis.iter().map(|x| numerics::frobenius(&(channel.apply_unchecked(x) - x))).fold(0.0, f64::max)
}

/// `tr(P_𝒦 ℰⁿ(I/D))` for `n = 1..=steps`.
pub fn decay_profile(channel: &KrausChannel, decay: &SubspaceBasis, steps: usize) -> Vec<f64> {
    let d = channel.dim();
    let p = decay.projector();
    let mut x = CMatrix::identity(d, d) / c(d as f64, 0.0);
    (0..steps)
        .map(|_| {
            x = channel.apply_unchecked(&x);
            trace(&(&p * &x)).re
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{self, paper_example};
    use crate::numerics::{cis, frobenius};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_channel() -> KrausChannel {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.0, 0.0);
        let mut b = CMatrix::zeros(2, 2);
        b[(1, 1)] = c(1.0, 0.0);
        KrausChannel::new(vec![a, b]).unwrap()
    }

    fn damping() -> KrausChannel {
        let h = 0.5f64.sqrt();
        let e1 = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
        let e2 = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        KrausChannel::new(vec![e1, e2]).unwrap()
    }

    /// The 2-level base channel of the worked example.
    fn flip() -> KrausChannel {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        KrausChannel::new(vec![a.clone(), a.transpose()]).unwrap()
    }

    #[test]
    fn identity_fixed_points() {
        let fp = fixed_point_space(&KrausChannel::identity(2), Tolerance::default()).unwrap();
        assert_eq!(fp.dim(), 4);
        assert_eq!(fp.hermitian_basis.len(), 4);
    }

    #[test]
    fn unitary_channel_commutant() {
        // U = diag(1, e^{i}): brute force on the 4x4 rep gives the diagonal matrices
        let u = CMatrix::from_diagonal(&numerics::CVector::from_column_slice(&[c(1.0, 0.0), cis(1.0)]));
        let ch = KrausChannel::new(vec![u]).unwrap();
        let fp = fixed_point_space(&ch, Tolerance::default()).unwrap();
        assert_eq!(fp.dim(), 2);
        for x in &fp.basis {
            assert!(x[(0, 1)].norm() < 1e-12 && x[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn paper_example_fixed_point_dimension() {
        // Brute force: 𝓛(C^4) ⊗ I' in the gauge where the −1 sectors are
        // conjugated by Z on span{|0>,|1>}_B, i.e. 16 complex dimensions.
        let ch = paper_example();
        let tol = Tolerance::default();
        let fp = fixed_point_space(&ch, tol).unwrap();
        assert_eq!(fp.dim(), 16);
        assert!(fixed_point_residual(&ch, &fp) <= 1e-12);
        // explicit fixed points: |a><b| ⊗ I' for equal signs, |a><b| ⊗ Z' otherwise
        let s = [1.0, 1.0, -1.0, -1.0];
        for a in 0..4 {
            for b in 0..4 {
                let mut x = CMatrix::zeros(12, 12);
                let second = if s[a] == s[b] { 1.0 } else { -1.0 };
                x[(a * 3, b * 3)] = c(1.0, 0.0);
                x[(a * 3 + 1, b * 3 + 1)] = c(second, 0.0);
                let y = ch.apply(&x).unwrap();
                assert!(frobenius(&(y - &x)) < 1e-14, "sector pair ({a},{b})");
            }
        }
        // the null space reproduces the same count
        assert_eq!(crate::numerics::null_space(&(ch.matrix_rep() - CMatrix::identity(144, 144)), tol).dim(), 16);
    }

    #[test]
    fn identity_stationary_state() {
        let split = maximal_stationary_state(&KrausChannel::identity(3), Tolerance::default()).unwrap();
        assert!(frobenius(&(split.stationary - CMatrix::identity(3, 3) / c(3.0, 0.0))) < 1e-14);
        assert!(split.decay.is_empty());
    }

    #[test]
    fn paper_example_recurrent_split() {
        let ch = paper_example();
        let split = maximal_stationary_state(&ch, Tolerance::default()).unwrap();
        assert_eq!(split.recurrent.dim(), 8);
        assert_eq!(split.decay.dim(), 4);
        // decay = H_A ⊗ span{|2>_B}
        let expect = SubspaceBasis::coordinate(12, &[2, 5, 8, 11]).projector();
        assert!(frobenius(&(split.decay.projector() - expect)) < 1e-12);
        assert!(frobenius(&(ch.apply(&split.stationary).unwrap() - &split.stationary)) < 1e-12);
        assert!((trace(&split.stationary) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn damping_state_is_ground_state() {
        let split = maximal_stationary_state(&damping(), Tolerance::default()).unwrap();
        let mut g = CMatrix::zeros(2, 2);
        g[(0, 0)] = c(1.0, 0.0);
        assert!(frobenius(&(split.stationary - g)) < 1e-12);
        assert_eq!(split.decay.dim(), 1);
        assert!(split.decay.matrix()[(1, 0)].norm() > 1.0 - 1e-12);
    }

    #[test]
    fn irreducibility() {
        let tol = Tolerance::default();
        assert!(!is_irreducible(&KrausChannel::identity(2), tol).unwrap());
        assert!(is_irreducible(&flip(), tol).unwrap());
        assert!(!is_irreducible(&diag_channel(), tol).unwrap());
        let split = maximal_stationary_state(&flip(), tol).unwrap();
        assert!(frobenius(&(split.stationary - CMatrix::identity(2, 2) * c(0.5, 0.0))) < 1e-14);
    }

    #[test]
    fn stationary_state_properties_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let tol = Tolerance::default();
        for _ in 0..20 {
            let spec = construct::random_spec(8, 2, 3, &mut rng);
            let s = construct::synthesize(&spec, true, &mut rng);
            let split = maximal_stationary_state(&s.channel, tol).unwrap();
            let rho = &split.stationary;
            assert!((trace(rho) - c(1.0, 0.0)).norm() < 1e-10);
            assert!(numerics::eigh(rho).0.iter().all(|&l| l >= -1e-12));
            assert!(frobenius(&(s.channel.apply(rho).unwrap() - rho)) < 1e-10);
            assert_eq!(split.decay.dim(), spec.decay_dim);
            assert_eq!(split.recurrent.dim() + split.decay.dim(), spec.dim());

            // fixed points vanish on and next to the decay subspace
            let fp = fixed_point_space(&s.channel, tol).unwrap();
            let pk = split.decay.projector();
            let pr = split.recurrent.projector();
            for x in &fp.basis {
                let leak = frobenius(&(&pk * x * &pk)) + frobenius(&(&pk * x * &pr)) + frobenius(&(&pr * x * &pk));
                assert!(leak <= 1e-9, "leak {leak}");
            }
        }
    }

    #[test]
    fn decay_mass_vanishes() {
        let ch = paper_example();
        let split = maximal_stationary_state(&ch, Tolerance::default()).unwrap();
        let prof = decay_profile(&ch, &split.decay, 200);
        assert!(*prof.last().unwrap() <= 1e-6);
    }
}
