//! Small dense helpers on fixed 4x4 storage. Dimensions 2 and 3 use the
//! leading block; trailing rows and columns are zero.

use nalgebra::{DMatrix, SymmetricEigen};

pub type Mat4 = [[f64; 4]; 4];

/// Lower Cholesky factor of the leading `n x n` block, or `None` if the
/// matrix is not positive definite.
pub fn cholesky(g: &Mat4, n: usize) -> Option<Mat4> {
    let mut l = [[0.0; 4]; 4];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solve L y = b, then Lᵀ x = y.
fn cholesky_solve(l: &Mat4, n: usize, b: &[f64; 4]) -> [f64; 4] {
    let mut y = [0.0; 4];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 4];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Inverse of an SPD matrix from its Cholesky factor.
pub fn spd_inverse(l: &Mat4, n: usize) -> Mat4 {
    let mut inv = [[0.0; 4]; 4];
    for j in 0..n {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        let col = cholesky_solve(l, n, &e);
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    // Symmetrise to kill the last bit of solve asymmetry.
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (inv[i][j] + inv[j][i]);
            inv[i][j] = v;
            inv[j][i] = v;
        }
    }
    inv
}

/// det of the SPD matrix with Cholesky factor `l`.
pub fn det_from_cholesky(l: &Mat4, n: usize) -> f64 {
    let mut d = 1.0;
    for (i, row) in l.iter().enumerate().take(n) {
        d *= row[i];
    }
    d * d
}

/// Eigenvalues of the leading symmetric block, ascending. Cold path, used
/// for error reports.
pub fn sym_eigenvalues(g: &Mat4, n: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(n, n, |i, j| g[i][j]);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Generalized symmetric eigenproblem `A v = λ G v` with `G` positive
/// definite: eigenvalues ascending, eigenvectors G-orthonormal (columns of
/// the returned matrix, one per eigenvalue).
pub fn generalized_sym_eigen(a: &Mat4, g: &Mat4, n: usize) -> Option<(Vec<f64>, Vec<[f64; 4]>)> {
    let l = cholesky(g, n)?;
    // B = L⁻¹ A L⁻ᵀ, assembled column by column.
    let mut b = [[0.0; 4]; 4];
    // First W = L⁻¹ A  (solve L wᵢ = column i of A for the row space),
    // done as: for each column c of A, solve L y = c.
    let mut w = [[0.0; 4]; 4];
    for j in 0..n {
        let mut col = [0.0; 4];
        for i in 0..n {
            col[i] = a[i][j];
        }
        // forward solve only
        let mut y = [0.0; 4];
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        for i in 0..n {
            w[i][j] = y[i];
        }
    }
    // Then B = W L⁻ᵀ, i.e. solve L bᵀ-rows: B Lᵀ = W  =>  for each row of W,
    // forward-solve with L against the transposed system.
    for i in 0..n {
        let mut y = [0.0; 4];
        for jj in 0..n {
            let mut s = w[i][jj];
            for k in 0..jj {
                s -= l[jj][k] * y[k];
            }
            y[jj] = s / l[jj][jj];
        }
        for jj in 0..n {
            b[i][jj] = y[jj];
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (b[i][j] + b[j][i]);
            b[i][j] = v;
            b[j][i] = v;
        }
    }
    let m = DMatrix::from_fn(n, n, |i, j| b[i][j]);
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &idx in &order {
        values.push(eig.eigenvalues[idx]);
        let y: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        // Back-substitute Lᵀ u = y so that uᵀ G u = yᵀ y = 1.
        let mut u = [0.0; 4];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k][i] * u[k];
            }
            u[i] = s / l[i][i];
        }
        vectors.push(u);
    }
    Some((values, vectors))
}

/// Deterministic pairwise (tree) summation in slice order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
