//! Independent reference computations and instance generators shared by the
//! integration tests. Nothing here calls the crate's eigen, permutation or
//! partial-trace code.

#![allow(dead_code)]

use num_complex::Complex64;
use qsslab_core::linalg::{haar_unitary_with, random_density, CMatrix, CVector};
use qsslab_core::states::QuantumState;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_rows(r: &[Vec<Complex64>]) -> CMatrix {
    CMatrix::from_fn(r.len(), r[0].len(), |i, j| r[i][j])
}

fn kron_rows(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let (ar, ac, br, bc) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ac * bc]; ar * br];
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn eye(n: usize) -> Vec<Vec<Complex64>> {
    (0..n).map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0)).collect()).collect()
}

/// Characteristic polynomial `x^n + c_1 x^{n-1} + … + c_n` by the
/// Faddeev–LeVerrier recursion; returns `[1, c_1, …, c_n]`.
pub fn char_poly(m: &CMatrix) -> Vec<Complex64> {
    let a = rows(m);
    let n = a.len();
    let mut coeffs = vec![c(1.0, 0.0)];
    let mut mk = vec![vec![c(0.0, 0.0); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let prev = matmul(&a, &mk);
        let ck_1 = coeffs[k - 1];
        mk = (0..n).map(|i| (0..n).map(|j| prev[i][j] + if i == j { ck_1 } else { c(0.0, 0.0) }).collect()).collect();
        let am = matmul(&a, &mk);
        let tr: Complex64 = (0..n).map(|i| am[i][i]).sum();
        coeffs.push(-tr / k as f64);
    }
    coeffs
}

/// All roots of a monic polynomial by Durand–Kerner iteration.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |x: Complex64| coeffs.iter().fold(c(0.0, 0.0), |acc, &k| acc * x + k);
    let seed = c(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let denom: Complex64 = (0..n).filter(|&j| j != i).map(|j| z[i] - z[j]).product();
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-16 {
            break;
        }
    }
    z
}

/// `σ_y ⊗ σ_y` written out from the Pauli matrix.
fn sigma_yy() -> Vec<Vec<Complex64>> {
    let sy = vec![vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]];
    kron_rows(&sy, &sy)
}

/// `λ′` as square roots of the eigenvalues of the non-Hermitian `ρ ρ̃`,
/// found as polynomial roots. Reliable for states with a simple spectrum.
pub fn lambda_primes_oracle(rho: &CMatrix) -> [f64; 4] {
    let yy = sigma_yy();
    let r = rows(rho);
    let conj: Vec<Vec<Complex64>> = r.iter().map(|row| row.iter().map(|z| z.conj()).collect()).collect();
    let tilde = matmul(&matmul(&yy, &conj), &yy);
    let prod = from_rows(&matmul(&r, &tilde));
    let mut l: Vec<f64> = poly_roots(&char_poly(&prod)).iter().map(|z| z.re.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    [l[0], l[1], l[2], l[3]]
}

pub fn concurrence_oracle(rho: &CMatrix) -> f64 {
    let l = lambda_primes_oracle(rho);
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

pub fn werner_concurrence(p: f64) -> f64 {
    ((3.0 * p - 1.0) / 2.0).max(0.0)
}

/// `Σ_k (I ⊗ ⟨k|) M (I ⊗ |k⟩)` (keep A) or `Σ_k (⟨k| ⊗ I) M (|k⟩ ⊗ I)` (keep
/// B), with the sandwiching matrices built explicitly.
pub fn partial_trace_oracle(m: &CMatrix, d_a: usize, d_b: usize, keep_a: bool) -> CMatrix {
    let mr = rows(m);
    let (dk, dt) = if keep_a { (d_a, d_b) } else { (d_b, d_a) };
    let mut out = vec![vec![c(0.0, 0.0); dk]; dk];
    for k in 0..dt {
        let ket: Vec<Vec<Complex64>> = (0..dt).map(|i| vec![c(if i == k { 1.0 } else { 0.0 }, 0.0)]).collect();
        let right = if keep_a { kron_rows(&eye(d_a), &ket) } else { kron_rows(&ket, &eye(d_b)) };
        let left: Vec<Vec<Complex64>> =
            (0..right[0].len()).map(|i| (0..right.len()).map(|j| right[j][i].conj()).collect()).collect();
        let term = matmul(&matmul(&left, &mr), &right);
        for i in 0..dk {
            for j in 0..dk {
                out[i][j] += term[i][j];
            }
        }
    }
    from_rows(&out)
}

/// `Σ_{kl} (I ⊗ E_kl) M (I ⊗ E_kl)`, which transposes the B factor.
pub fn partial_transpose_b_oracle(m: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    let mr = rows(m);
    let d = d_a * d_b;
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for k in 0..d_b {
        for l in 0..d_b {
            let e: Vec<Vec<Complex64>> = (0..d_b)
                .map(|i| (0..d_b).map(|j| c(if i == k && j == l { 1.0 } else { 0.0 }, 0.0)).collect())
                .collect();
            let s = kron_rows(&eye(d_a), &e);
            let term = matmul(&matmul(&s, &mr), &s);
            for i in 0..d {
                for j in 0..d {
                    out[i][j] += term[i][j];
                }
            }
        }
    }
    from_rows(&out)
}

/// Bilateral CNOT on the 16-dimensional joint state in storage order
/// `[SS_A, SS_B, AS_A, AS_B]`, written as a basis permutation, followed by
/// projection of both ancillas. Returns `(label, probability, post_state)`.
pub fn cnot16_oracle(rho_s: &CMatrix, rho_a: &CMatrix) -> Vec<(String, f64, Option<CMatrix>)> {
    let idx = |sa: usize, sb: usize, aa: usize, ab: usize| 8 * sa + 4 * sb + 2 * aa + ab;
    let joint = kron_rows(&rows(rho_s), &rows(rho_a));
    let mut image = [0usize; 16];
    for sa in 0..2 {
        for sb in 0..2 {
            for aa in 0..2 {
                for ab in 0..2 {
                    image[idx(sa, sb, aa, ab)] = idx(sa, sb, aa ^ sa, ab ^ sb);
                }
            }
        }
    }
    let mut evolved = vec![vec![c(0.0, 0.0); 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            evolved[image[i]][image[j]] = joint[i][j];
        }
    }
    let mut out = Vec::new();
    for aa in 0..2 {
        for ab in 0..2 {
            let block = CMatrix::from_fn(4, 4, |i, j| evolved[idx(i / 2, i % 2, aa, ab)][idx(j / 2, j % 2, aa, ab)]);
            let p = block.trace().re;
            let post = (p > 1e-12).then(|| block.scale_real(1.0 / p));
            out.push((format!("{aa}{ab}"), p, post));
        }
    }
    out
}

/// Haar-distributed eigenbasis with a spectrum drawn uniformly from the
/// simplex, redrawn until every eigenvalue exceeds `1e-6`.
pub fn haar_full_rank<R: Rng>(dims: &[usize], rng: &mut R) -> QuantumState {
    let dim: usize = dims.iter().product();
    loop {
        let e: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = e.iter().sum();
        let spectrum: Vec<f64> = e.iter().map(|x| x / s).collect();
        if spectrum.iter().any(|&x| x < 1e-6) {
            continue;
        }
        let u = haar_unitary_with(dim, rng);
        let m = u.conjugate(&CMatrix::diag_real(&spectrum)).hermitian_part();
        return QuantumState::new(m, dims.to_vec()).expect("valid state");
    }
}

pub fn random_state<R: Rng>(dims: Vec<usize>, rank: usize, rng: &mut R) -> QuantumState {
    let d: usize = dims.iter().product();
    QuantumState::new(random_density(d, rank, rng), dims).expect("valid state")
}

/// Probability vector of length `n` with every entry in `(lo, hi)`; a single
/// entry is forced to 1.
pub fn random_weights<R: Rng>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    loop {
        let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = e.iter().sum();
        let w: Vec<f64> = e.iter().map(|x| x / s).collect();
        if w.iter().all(|&x| x > lo && x < hi) {
            return w;
        }
    }
}

pub fn haar_qubit<R: Rng>(rng: &mut R) -> CVector {
    haar_unitary_with(2, rng).column(0)
}

pub fn random_complex_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}
