//! Small dense complex linear algebra helpers shared across the crate.
//!
//! Channel matrices are modest (at most a few thousand entries per link), so a
//! plain row-major buffer is all that is needed; the heavy numerical work
//! happens in the real-valued sparse solver in [`crate::conic`].

use num_complex::Complex64;

pub type C64 = Complex64;

/// 3-D point / direction in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Vec3) -> f64 {
        self.sub(o).norm()
    }
}

/// Hermitian inner product `a^H b`.
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm.
pub fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Euclidean norm.
pub fn norm(a: &[C64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x` elementwise.
pub fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Self { rows: r, cols: c, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `A x` for a length-`cols` vector.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "matvec dimension");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for (r, o) in out.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = C64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *o = acc;
        }
        out
    }

    /// `A^H y` for a length-`rows` vector.
    pub fn adjoint_vec(&self, y: &[C64]) -> Vec<C64> {
        assert_eq!(y.len(), self.rows, "adjoint_vec dimension");
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for r in 0..self.rows {
            let yr = y[r];
            let row = self.row(r);
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * yr;
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        norm(&self.data)
    }

    /// Euclidean norm of column `c`.
    pub fn col_norm(&self, c: usize) -> f64 {
        (0..self.rows)
            .map(|r| self.get(r, c).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Horizontal concatenation `[A | B | ...]`.
    pub fn hstack(mats: &[&CMat]) -> CMat {
        assert!(!mats.is_empty());
        let rows = mats[0].rows;
        assert!(mats.iter().all(|m| m.rows == rows), "hstack row mismatch");
        let cols: usize = mats.iter().map(|m| m.cols).sum();
        let mut out = CMat::zeros(rows, cols);
        for r in 0..rows {
            let mut off = 0;
            for m in mats {
                for c in 0..m.cols {
                    out.set(r, off + c, m.get(r, c));
                }
                off += m.cols;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_vec_matches_manual() {
        let a = CMat::from_rows(vec![
            vec![C64::new(1.0, 1.0), C64::new(0.0, 2.0)],
            vec![C64::new(3.0, 0.0), C64::new(-1.0, 1.0)],
        ]);
        let y = vec![C64::new(1.0, -1.0), C64::new(0.5, 0.0)];
        let out = a.adjoint_vec(&y);
        // out[c] = sum_r conj(A[r][c]) * y[r]
        for c in 0..2 {
            let manual: C64 = (0..2).map(|r| a.get(r, c).conj() * y[r]).sum();
            assert!((out[c] - manual).norm() < 1e-14);
        }
    }

    #[test]
    fn hstack_layout() {
        let a = CMat::from_rows(vec![vec![C64::new(1.0, 0.0)], vec![C64::new(2.0, 0.0)]]);
        let b = CMat::from_rows(vec![vec![C64::new(3.0, 0.0)], vec![C64::new(4.0, 0.0)]]);
        let s = CMat::hstack(&[&a, &b]);
        assert_eq!(s.cols, 2);
        assert_eq!(s.get(0, 1).re, 3.0);
        assert_eq!(s.get(1, 0).re, 2.0);
    }
}
