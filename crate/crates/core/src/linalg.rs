//! Small dense linear algebra: symmetric eigendecomposition, one-sided
//! Jacobi SVD and randomized truncated SVD.

use rand::Rng;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).take(self.rows).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues in decreasing order with unit eigenvectors as matrix columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Eigenvector signs are fixed so the entry of largest magnitude is positive.
pub fn symmetric_eigen(a: &Mat) -> SymmetricEigen {
    assert_eq!(a.rows, a.cols, "square matrix required");
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Mat::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_sign(&mut col);
        for (k, x) in col.into_iter().enumerate() {
            vectors[(k, dst)] = x;
        }
    }
    SymmetricEigen { values, vectors }
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Thin SVD `A = U diag(s) Vt` with singular values in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub vt: Mat,
}

/// One-sided (Hestenes) Jacobi SVD of an `m x n` matrix with `m >= n`.
fn jacobi_svd_tall(a: &Mat) -> Svd {
    let (m, n) = (a.rows, a.cols);
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut v = Mat::identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let tiny = norms.iter().copied().fold(0.0, f64::max) * 1e-14;
    let mut u = Mat::zeros(m, n);
    let mut vt = Mat::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        let nonzero = sigma > tiny && sigma > 0.0;
        s.push(if nonzero { sigma } else { 0.0 });
        // Sign convention: largest-magnitude entry of each right vector positive.
        let mut vcol = v.column(src);
        let before = vcol.clone();
        fix_sign(&mut vcol);
        let flip = if vcol != before { -1.0 } else { 1.0 };
        for (k, x) in vcol.into_iter().enumerate() {
            vt[(dst, k)] = x;
        }
        if nonzero {
            for i in 0..m {
                u[(i, dst)] = flip * w[(i, src)] / sigma;
            }
        }
    }
    Svd { u, s, vt }
}

/// Exact thin SVD of any matrix via one-sided Jacobi.
pub fn svd(a: &Mat) -> Svd {
    if a.rows >= a.cols {
        jacobi_svd_tall(a)
    } else {
        let t = jacobi_svd_tall(&a.transpose());
        Svd {
            u: t.vt.transpose(),
            s: t.s,
            vt: t.u.transpose(),
        }
    }
}

/// Orthonormalize columns in place (modified Gram-Schmidt, two passes).
/// Columns that vanish numerically are zeroed.
fn orthonormalize_columns(a: &mut Mat) {
    let (m, n) = (a.rows, a.cols);
    for j in 0..n {
        let original: f64 = (0..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt();
        for _pass in 0..2 {
            for k in 0..j {
                let dot: f64 = (0..m).map(|i| a[(i, j)] * a[(i, k)]).sum();
                for i in 0..m {
                    let aik = a[(i, k)];
                    a[(i, j)] -= dot * aik;
                }
            }
        }
        let norm: f64 = (0..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt();
        if norm <= 1e-12 * original.max(f64::MIN_POSITIVE) || norm == 0.0 {
            for i in 0..m {
                a[(i, j)] = 0.0;
            }
        } else {
            for i in 0..m {
                a[(i, j)] /= norm;
            }
        }
    }
}

/// Randomized truncated SVD returning the leading `k` triplets.
///
/// The sketch width is `k + oversampling`, capped at `min(rows, cols)`; at
/// the cap the range is captured exactly and the result equals a full SVD.
pub fn randomized_svd<R: Rng>(
    a: &Mat,
    k: usize,
    oversampling: usize,
    power_iters: usize,
    rng: &mut R,
) -> Svd {
    let (m, n) = (a.rows, a.cols);
    let full = m.min(n);
    let k = k.min(full);
    let l = (k + oversampling).min(full);
    let mut omega = Mat::zeros(n, l);
    for x in omega.data.iter_mut() {
        *x = rng.random::<f64>() * 2.0 - 1.0;
    }
    let at = a.transpose();
    let mut q = a.matmul(&omega);
    orthonormalize_columns(&mut q);
    for _ in 0..power_iters {
        let mut z = at.matmul(&q);
        orthonormalize_columns(&mut z);
        q = a.matmul(&z);
        orthonormalize_columns(&mut q);
    }
    let b = q.transpose().matmul(a);
    let small = svd(&b);
    let u_full = q.matmul(&small.u);
    let mut u = Mat::zeros(m, k);
    let mut vt = Mat::zeros(k, n);
    for j in 0..k {
        for i in 0..m {
            u[(i, j)] = u_full[(i, j)];
        }
        for c in 0..n {
            vt[(j, c)] = small.vt[(j, c)];
        }
    }
    let mut s = small.s;
    s.truncate(k);
    Svd { u, s, vt }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn reconstruct(svd: &Svd) -> Mat {
        let mut us = svd.u.clone();
        for j in 0..svd.s.len() {
            for i in 0..us.rows {
                us[(i, j)] *= svd.s[j];
            }
        }
        us.matmul(&svd.vt)
    }

    #[test]
    fn eigen_of_diagonal_sorted() {
        let a = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]);
        let e = symmetric_eigen(&a);
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![0.0, 1.0]);
    }

    #[test]
    fn eigen_reconstructs() {
        let a = Mat::from_rows(&[
            vec![4.0, 1.0, -2.0],
            vec![1.0, 2.0, 0.5],
            vec![-2.0, 0.5, 3.0],
        ]);
        let e = symmetric_eigen(&a);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| e.vectors[(i, k)] * e.values[k] * e.vectors[(j, k)]).sum();
                assert!((r - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_wide_and_tall_reconstruct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (r, c) in [(5, 3), (3, 6), (4, 4)] {
            let mut a = Mat::zeros(r, c);
            a.data.iter_mut().for_each(|x| *x = rng.random::<f64>());
            let d = svd(&a);
            let diff: f64 = reconstruct(&d).data.iter().zip(&a.data).map(|(x, y)| (x - y).powi(2)).sum();
            assert!(diff.sqrt() < 1e-12, "{r}x{c}: {diff}");
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_deficient_has_zero_tail() {
        let a = Mat::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let d = randomized_svd(&a, 2, 0, 0, &mut rng);
        assert!((d.s[0] - (70.0f64).sqrt()).abs() < 1e-12);
        assert_eq!(d.s[1], 0.0);
    }
}
