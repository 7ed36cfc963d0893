//! Seeded random matrices: Ginibre draws, Haar unitaries, random states.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{c64, CMatrix, CVector};

/// RNG for restart `index` of a run seeded with `seed`. Streams never overlap,
/// so restarts can run in any order or on any worker.
pub fn restart_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `rows × cols` matrix of i.i.d. standard complex normals.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re * scale, im * scale)
    })
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
///
/// Gram–Schmidt produces an `R` factor with positive diagonal, which is the
/// phase convention that makes `Q` exactly Haar.
pub fn haar_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let g = ginibre(dim, dim, rng);
        let mut columns: Vec<CVector> = Vec::with_capacity(dim);
        let mut degenerate = false;
        for j in 0..dim {
            let mut v = g.column(j);
            for _ in 0..2 {
                for c in &columns {
                    let proj = c.inner(&v);
                    v = &v - &c.scale(proj);
                }
            }
            let norm = v.norm();
            if norm < 1e-12 {
                degenerate = true;
                break;
            }
            columns.push(v.scale_real(1.0 / norm));
        }
        if !degenerate {
            return CMatrix::from_columns(&columns);
        }
    }
}

/// Haar-random `dim × dim` unitary, deterministic in `seed`.
pub fn haar_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(dim, &mut rng)
}

/// Haar-random unit vector.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    ginibre(dim, 1, rng).column(0).normalized()
}

/// Density matrix `G G† / tr(G G†)` with `G` a `dim × rank` Ginibre matrix.
/// For `rank = dim` this is the Hilbert–Schmidt measure.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    assert!(rank >= 1 && rank <= dim, "rank must be in 1..=dim");
    let g = ginibre(dim, rank, rng);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr).hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_unitary_is_a_phase() {
        let u = haar_unitary(1, 5);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seeded_draws_repeat() {
        assert_eq!(haar_unitary(4, 99), haar_unitary(4, 99));
        assert_ne!(haar_unitary(4, 99), haar_unitary(4, 100));
    }

    #[test]
    fn streams_differ() {
        let a = haar_unitary_with(3, &mut restart_rng(7, 0));
        let b = haar_unitary_with(3, &mut restart_rng(7, 1));
        assert_ne!(a, b);
        assert_eq!(a, haar_unitary_with(3, &mut restart_rng(7, 0)));
    }

    #[test]
    fn random_density_is_a_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(4, 2, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!(rho.hermiticity_error() < 1e-15);
    }
}
