//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation first phase-rotates the pivot column so the pivot element
//! becomes real, then applies the standard real Jacobi rotation; the
//! accumulated unitary gives the eigenvectors. Sweeps run in a fixed cyclic
//! order, so results are bit-reproducible. Convergence is declared when the
//! off-diagonal Frobenius norm drops below `1e-12` of the matrix norm, which
//! is unconditional for Hermitian input.
//!
//! Eigenvalues are returned in ascending order with a deterministic
//! degeneracy tie-break (original pivot order), and each eigenvector is
//! phase-fixed so its largest-magnitude component is real positive.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative off-diagonal Frobenius tolerance.
const OFF_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Matching eigenvectors as columns.
    pub vectors: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy)]
pub struct JacobiFailure {
    pub off_norm: f64,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a[(p, q)].norm_sqr();
        }
    }
    (2.0 * s).sqrt()
}

/// Diagonalizes a Hermitian matrix. The caller guarantees hermiticity; only
/// the upper triangle and real diagonal parts are trusted.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> Result<HermitianEigen, JacobiFailure> {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "matrix must be square");
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: DMatrix::zeros(0, 0) });
    }

    let mut a = h.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let target = OFF_TOL * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(JacobiFailure { off_norm: off, sweeps });
        }
        sweeps += 1;
        // skip rotations on elements already negligible within this sweep
        let skip = target / (n as f64);
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= skip {
                    continue;
                }
                // Scaling basis column q by u = conj(apq)/r makes the pivot
                // real (= r); then the real Jacobi rotation zeroes it.
                let u = (apq / r).conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a[(j, p)];
                    let ajq = a[(j, q)] * u; // column-q phase fold
                    a[(j, p)] = ajp * c - ajq * s;
                    a[(j, q)] = ajq * c + ajp * s;
                    a[(p, j)] = a[(j, p)].conj();
                    a[(q, j)] = a[(j, q)].conj();
                }
                a[(p, p)] = Complex64::new(app - t * r, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * r, 0.0);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let vjp = v[(j, p)];
                    let vjq = v[(j, q)] * u;
                    v[(j, p)] = vjp * c - vjq * s;
                    v[(j, q)] = vjq * c + vjp * s;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        fix_phase(col.as_mut_slice());
        vectors.set_column(dst, &col);
    }
    Ok(HermitianEigen { values, vectors })
}

/// Rotates a vector's global phase so its largest-magnitude component is
/// real positive (first index wins ties).
pub fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = v[best] / v[best].norm();
    let corr = phase.conj();
    for z in v.iter_mut() {
        *z *= corr;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex64> {
        // deterministic xorshift fill
        let mut state = seed.max(1);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                if i == j {
                    h[(i, j)] = Complex64::new(next() * 4.0, 0.0);
                } else {
                    let z = Complex64::new(next(), next());
                    h[(i, j)] = z;
                    h[(j, i)] = z.conj();
                }
            }
        }
        h
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let mut h = DMatrix::<Complex64>::zeros(3, 3);
        h[(0, 0)] = Complex64::new(3.0, 0.0);
        h[(1, 1)] = Complex64::new(1.0, 0.0);
        h[(2, 2)] = Complex64::new(2.0, 0.0);
        let e = hermitian_eigen(&h).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn reconstructs_random_hermitian() {
        for seed in 1..6u64 {
            let n = 3 + (seed as usize % 5) * 4;
            let h = random_hermitian(n, seed * 7919);
            let e = hermitian_eigen(&h).unwrap();
            // residual ||H v - lambda v|| per column
            for c in 0..n {
                let v = e.vectors.column(c);
                let res = (&h * v) - v * Complex64::new(e.values[c], 0.0);
                assert!(res.norm() < 1e-10 * h.norm().max(1.0), "residual {}", res.norm());
            }
            // orthonormality
            let gram = e.vectors.adjoint() * &e.vectors;
            let eye = DMatrix::<Complex64>::identity(n, n);
            assert!((gram - eye).norm() < 1e-10);
            // ascending
            for c in 1..n {
                assert!(e.values[c] >= e.values[c - 1]);
            }
        }
    }

    #[test]
    fn matches_nalgebra_on_real_symmetric() {
        for seed in [11u64, 29, 57] {
            let n = 8;
            let mut h = random_hermitian(n, seed);
            // strip imaginary parts -> real symmetric
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] = Complex64::new(h[(i, j)].re, 0.0);
                }
            }
            let real = h.map(|z| z.re);
            let reference = real.symmetric_eigen();
            let mut expected: Vec<f64> = reference.eigenvalues.iter().copied().collect();
            expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let e = hermitian_eigen(&h).unwrap();
            for (got, want) in e.values.iter().zip(expected.iter()) {
                assert_abs_diff_eq!(got, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn deterministic_bitwise() {
        let h = random_hermitian(9, 12345);
        let a = hermitian_eigen(&h).unwrap();
        let b = hermitian_eigen(&h).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors.as_slice(), b.vectors.as_slice());
    }

    #[test]
    fn phase_fix_makes_leading_entry_positive() {
        let mut v = [Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.4)];
        fix_phase(&mut v);
        assert!(v[1].im.abs() < 1e-15);
        assert!(v[1].re > 0.0);
    }
}
