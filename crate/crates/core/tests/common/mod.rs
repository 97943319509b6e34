#![allow(clippy::needless_range_loop)]

//! Independent reference implementations shared by the integration tests.
//! Deliberately naive: direct sums and textbook elimination, no library code.
#![allow(dead_code)]

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `X[k] = n^-1/2 sum_t x[t] e^{-j 2 pi k t / n}`
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * t % n) as f64 / n as f64))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// `x[t] = n^-1/2 sum_k X[k] e^{+j 2 pi k t / n}`
pub fn naive_idft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|t| {
            x.iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * t % n) as f64 / n as f64))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Dense row-major complex matrix as nested vectors.
pub type Dense = Vec<Vec<Complex64>>;

pub fn adjoint(a: &Dense) -> Dense {
    let (r, c) = (a.len(), a[0].len());
    (0..c).map(|j| (0..r).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..p).map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Dense, x: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Solve `A y = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut m: Vec<Vec<Complex64>> = a.iter().zip(b).map(|(r, v)| r.iter().copied().chain([*v]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
        m.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                for c in col..=n {
                    let v = m[col][c];
                    m[row][c] -= f * v;
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// Orthonormal basis of the null space of `h` (rows x cols, full row rank)
/// by Gram-Schmidt on the identity after removing the row space.
pub fn null_space_basis(h: &Dense) -> Dense {
    let cols = h[0].len();
    let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(p, q)| p.conj() * q).sum::<Complex64>();
    // orthonormal basis of the row space: conjugated rows span range(H^H)
    let mut basis: Dense = Vec::new();
    let reduce = |v: Vec<Complex64>, basis: &mut Dense| -> Option<Vec<Complex64>> {
        let mut w = v;
        for _ in 0..2 {
            for q in basis.iter() {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n = dot(&w, &w).re.sqrt();
        (n > 1e-8).then(|| w.iter().map(|v| v / n).collect())
    };
    for row in h {
        let v: Vec<Complex64> = row.iter().map(|x| x.conj()).collect();
        if let Some(q) = reduce(v, &mut basis) {
            basis.push(q);
        }
    }
    let n_row = basis.len();
    for i in 0..cols {
        let mut e = vec![ZERO; cols];
        e[i] = Complex64::new(1.0, 0.0);
        if let Some(q) = reduce(e, &mut basis) {
            basis.push(q);
        }
    }
    basis.split_off(n_row)
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}
