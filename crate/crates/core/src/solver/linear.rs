use crate::error::{Error, Result};
use rayon::prelude::*;

const PAR_MIN: usize = 16_384;
const CHUNK: usize = 4_096;

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in input order, so the result does not depend on threading.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len() / 2);
        let mut vals: Vec<f64> = Vec::with_capacity(t.len() / 2);
        let mut last = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            s += self.vals[k] * x[self.cols[k]];
        }
        s
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        if self.n >= PAR_MIN {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    /// Writes the matrix in MatrixMarket coordinate format.
    pub fn to_matrix_market(&self) -> String {
        let mut s = format!(
            "%%MatrixMarket matrix coordinate real general\n{} {} {}\n",
            self.n,
            self.n,
            self.nnz()
        );
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s.push_str(&format!(
                    "{} {} {:.16e}\n",
                    i + 1,
                    self.cols[k] + 1,
                    self.vals[k]
                ));
            }
        }
        s
    }
}

/// Dot product with a fixed chunked reduction order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let part = |(x, y): (&[f64], &[f64])| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let partials: Vec<f64> = if a.len() >= PAR_MIN {
        a.par_chunks(CHUNK)
            .zip(b.par_chunks(CHUNK))
            .map(part)
            .collect()
    } else {
        a.chunks(CHUNK).zip(b.chunks(CHUNK)).map(part).collect()
    };
    partials.iter().sum()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CgStats {
    pub iters: usize,
    pub rel_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive semidefinite
/// consistent system, starting from the contents of `x`.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<CgStats> {
    let n = a.n();
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::SingularSystem(format!(
            "nonpositive diagonal at unknown {i}"
        )));
    }
    let mut r = vec![0.0; n];
    a.mul(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let bnorm = dot(b, b).sqrt();
    let scale = bnorm.max(dot(&r, &r).sqrt());
    if scale == 0.0 {
        return Ok(CgStats::default());
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt();
    let mut it = 0;
    while res > rel_tol * scale {
        if it >= max_iter {
            return Err(Error::NonConvergence {
                iters: it,
                residual: res / scale,
            });
        }
        a.mul(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt();
        it += 1;
    }
    Ok(CgStats {
        iters: it,
        rel_residual: res / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let m =
            CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 2.0), (0, 0, 0.5), (0, 1, 3.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.diagonal(), vec![1.5, 2.0]);
        let mut y = vec![0.0; 2];
        m.mul(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![4.5, 2.0]);
    }

    #[test]
    fn cg_solves_discrete_laplacian() {
        let n = 200;
        let a = laplace_1d(n);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let mut b = vec![0.0; n];
        a.mul(&xs, &mut b);
        let mut x = vec![0.0; n];
        let st = pcg(&a, &b, &mut x, 1e-12, 10 * n).unwrap();
        assert!(st.rel_residual <= 1e-12);
        for i in 0..n {
            assert!((x[i] - xs[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let n = 100;
        let a = laplace_1d(n);
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        assert!(matches!(
            pcg(&a, &b, &mut x, 1e-14, 3),
            Err(Error::NonConvergence { iters: 3, .. })
        ));
    }
}
