//! Dense f64 matrices: gemm, blocked LU with partial pivoting, inverse,
//! and midpoint-radius matrix products with rigorous floating-point error
//! inflation (used where full interval matrix products would be too slow).
//!
//! All parallel kernels split work along fixed chunk boundaries, so results
//! are bit-identical regardless of thread count.

use crate::error::{Error, Result};
use crate::interval::{next_up, Interval};
use rayon::prelude::*;

const U_EPS: f64 = f64::EPSILON; // 2^-52; generous vs the true unit roundoff

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }

    pub fn abs(&self) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.abs()).collect(),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// C = alpha*A*B + beta*C, parallel over fixed column chunks of B/C.
pub fn gemm(alpha: f64, a: &Mat, b: &Mat, beta: f64, c: &mut Mat) {
    assert_eq!(a.cols, b.rows);
    assert_eq!(c.rows, a.rows);
    assert_eq!(c.cols, b.cols);
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if m == 0 || n == 0 || k == 0 {
        if beta != 1.0 {
            c.data.iter_mut().for_each(|x| *x *= beta);
        }
        return;
    }
    const CHUNK: usize = 512;
    let nchunks = n.div_ceil(CHUNK);
    let a_ptr = a.data.as_ptr() as usize;
    let b_ptr = b.data.as_ptr() as usize;
    let c_ptr = c.data.as_mut_ptr() as usize;
    (0..nchunks).into_par_iter().for_each(|ci| {
        let j0 = ci * CHUNK;
        let j1 = (j0 + CHUNK).min(n);
        let nc = j1 - j0;
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                nc,
                alpha,
                a_ptr as *const f64,
                k as isize,
                1,
                (b_ptr as *const f64).add(j0),
                n as isize,
                1,
                beta,
                (c_ptr as *mut f64).add(j0),
                n as isize,
                1,
            );
        }
    });
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut c = Mat::zeros(a.rows, b.cols);
    gemm(1.0, a, b, 0.0, &mut c);
    c
}

/// LU factorization with partial pivoting, blocked right-looking.
/// On return `a` holds L (unit lower) and U packed; `piv[k]` is the row
/// swapped into position k at step k.
pub fn lu_factor(a: &mut Mat, piv: &mut Vec<usize>) -> Result<()> {
    let n = a.rows;
    assert_eq!(n, a.cols);
    piv.clear();
    piv.resize(n, 0);
    const NB: usize = 64;
    let mut k0 = 0;
    while k0 < n {
        let kb = NB.min(n - k0);
        // unblocked panel factorization on columns k0..k0+kb
        for k in k0..k0 + kb {
            let mut p = k;
            let mut mx = a.at(k, k).abs();
            for i in k + 1..n {
                let v = a.at(i, k).abs();
                if v > mx {
                    mx = v;
                    p = i;
                }
            }
            if mx == 0.0 {
                return Err(Error::JacobianSingular);
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    let t = a.at(k, j);
                    *a.at_mut(k, j) = a.at(p, j);
                    *a.at_mut(p, j) = t;
                }
            }
            let d = a.at(k, k);
            for i in k + 1..n {
                let l = a.at(i, k) / d;
                *a.at_mut(i, k) = l;
                if l != 0.0 {
                    for j in k + 1..k0 + kb {
                        let u = a.at(k, j);
                        *a.at_mut(i, j) -= l * u;
                    }
                }
            }
        }
        let rest = k0 + kb;
        if rest < n {
            // U block row: solve L11 * X = A[k0..rest, rest..]
            for k in k0..rest {
                for i in k + 1..rest {
                    let l = a.at(i, k);
                    if l != 0.0 {
                        for j in rest..n {
                            let u = a.at(k, j);
                            *a.at_mut(i, j) -= l * u;
                        }
                    }
                }
            }
            // trailing update A22 -= L21 * U12, via gemm on copied blocks
            let m2 = n - rest;
            let mut l21 = Mat::zeros(m2, kb);
            for i in 0..m2 {
                for j in 0..kb {
                    *l21.at_mut(i, j) = a.at(rest + i, k0 + j);
                }
            }
            let mut u12 = Mat::zeros(kb, m2);
            for i in 0..kb {
                for j in 0..m2 {
                    *u12.at_mut(i, j) = a.at(k0 + i, rest + j);
                }
            }
            let mut upd = Mat::zeros(m2, m2);
            gemm(1.0, &l21, &u12, 0.0, &mut upd);
            for i in 0..m2 {
                for j in 0..m2 {
                    *a.at_mut(rest + i, rest + j) -= upd.at(i, j);
                }
            }
        }
        k0 += kb;
    }
    Ok(())
}

/// Solve A x = b given the packed LU factorization.
pub fn lu_solve_vec(lu: &Mat, piv: &[usize], b: &[f64]) -> Vec<f64> {
    let n = lu.rows;
    let mut x = b.to_vec();
    for k in 0..n {
        x.swap(k, piv[k]);
        let xk = x[k];
        if xk != 0.0 {
            for i in k + 1..n {
                x[i] -= lu.at(i, k) * xk;
            }
        }
    }
    for k in (0..n).rev() {
        x[k] /= lu.at(k, k);
        let xk = x[k];
        if xk != 0.0 {
            for i in 0..k {
                x[i] -= lu.at(i, k) * xk;
            }
        }
    }
    x
}

/// Dense inverse via blocked LU; parallel over column chunks of the identity.
pub fn invert(a: &Mat) -> Result<Mat> {
    let n = a.rows;
    let mut lu = a.clone();
    let mut piv = Vec::new();
    lu_factor(&mut lu, &mut piv)?;
    let mut inv = Mat::zeros(n, n);
    const CHUNK: usize = 128;
    let cols: Vec<usize> = (0..n).collect();
    let results: Vec<(usize, Vec<Vec<f64>>)> = cols
        .par_chunks(CHUNK)
        .map(|chunk| {
            let start = chunk[0];
            let sols: Vec<Vec<f64>> = chunk
                .iter()
                .map(|&j| {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    lu_solve_vec(&lu, &piv, &e)
                })
                .collect();
            (start, sols)
        })
        .collect();
    for (start, sols) in results {
        for (dj, sol) in sols.iter().enumerate() {
            let j = start + dj;
            for i in 0..n {
                *inv.at_mut(i, j) = sol[i];
            }
        }
    }
    Ok(inv)
}

/// Midpoint-radius interval matrix: every entry lies in [mid - rad, mid + rad].
#[derive(Debug, Clone)]
pub struct MatMR {
    pub mid: Mat,
    pub rad: Mat,
}

impl MatMR {
    pub fn zeros(rows: usize, cols: usize) -> MatMR {
        MatMR {
            mid: Mat::zeros(rows, cols),
            rad: Mat::zeros(rows, cols),
        }
    }

    pub fn from_point(m: Mat) -> MatMR {
        let rad = Mat::zeros(m.rows, m.cols);
        MatMR { mid: m, rad }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        let mid = v.mid();
        let r = next_up(next_up(v.hi() - mid).max(next_up(mid - v.lo())));
        *self.mid.at_mut(i, j) = mid;
        *self.rad.at_mut(i, j) = r;
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        let m = self.mid.at(i, j);
        let r = self.rad.at(i, j);
        Interval::new((m - r).next_down(), (m + r).next_up())
    }
}

/// Rigorous product of a point matrix with a midpoint-radius matrix.
///
/// mid = fl(A*Bmid); the floating error is absorbed into
/// rad = |A|*Brad + gamma*|A|*|Bmid| with outward inflation.
pub fn mr_gemm_point_left(a: &Mat, b: &MatMR) -> MatMR {
    let k = a.cols;
    let gamma = (k as f64 + 2.0) * U_EPS;
    let mut mid = Mat::zeros(a.rows, b.mid.cols);
    gemm(1.0, a, &b.mid, 0.0, &mut mid);
    let aabs = a.abs();
    let babs = b.mid.abs();
    let mut r1 = Mat::zeros(a.rows, b.mid.cols);
    gemm(1.0, &aabs, &b.rad, 0.0, &mut r1);
    let mut r2 = Mat::zeros(a.rows, b.mid.cols);
    gemm(1.0, &aabs, &babs, 0.0, &mut r2);
    let infl = 1.0 + (k as f64 + 4.0) * U_EPS;
    let mut rad = Mat::zeros(a.rows, b.mid.cols);
    for idx in 0..rad.data.len() {
        rad.data[idx] = next_up(next_up((r1.data[idx] + gamma * r2.data[idx]) * infl) + f64::MIN_POSITIVE);
    }
    MatMR { mid, rad }
}

/// Upper bounds on the weighted column sums sum_i w_i |M_ij| / w_j
/// of a midpoint-radius matrix; the max over j is the weighted operator norm.
pub fn mr_weighted_colsums_upper(m: &MatMR, row_w: &[f64], col_w: &[f64]) -> Vec<f64> {
    let rows = m.mid.rows;
    let cols = m.mid.cols;
    assert_eq!(row_w.len(), rows);
    assert_eq!(col_w.len(), cols);
    let infl = 1.0 + (rows as f64 + 4.0) * U_EPS;
    (0..cols)
        .into_par_iter()
        .map(|j| {
            let mut acc = 0.0f64;
            for i in 0..rows {
                let v = m.mid.at(i, j).abs() + m.rad.at(i, j);
                acc += row_w[i] * v;
            }
            next_up(next_up(acc * infl) / col_w[j] * (1.0 + 2.0 * U_EPS))
        })
        .collect()
}

/// Upper bound on a sum of n nonnegative f64 values computed in floats.
pub fn sum_upper(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0f64;
    let mut n = 0usize;
    for v in values {
        debug_assert!(v >= 0.0);
        acc += v;
        n += 1;
    }
    next_up(acc * (1.0 + (n as f64 + 2.0) * U_EPS))
}
