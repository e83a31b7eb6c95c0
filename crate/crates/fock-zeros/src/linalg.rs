//! Dense complex linear algebra for the small witness systems: full-pivot
//! Gaussian elimination with a rank decision relative to the leading pivot,
//! and right null space extraction by back substitution.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    a: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            a: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        CMatrix {
            rows: r,
            cols: c,
            a: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.cols + j] = v;
    }

    pub fn frobenius(&self) -> f64 {
        self.a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.at(i, j) * x[j])
                    .sum::<Complex64>()
            })
            .collect()
    }
}

#[derive(Debug)]
pub struct Nullspace {
    /// Unit-norm vectors, largest component rotated to the positive real
    /// axis; one per free column, deterministic order.
    pub vectors: Vec<Vec<Complex64>>,
    pub rank: usize,
}

/// Right null space by full-pivot elimination. A pivot counts toward the
/// rank while its magnitude exceeds rel_tol times the first (largest) pivot.
pub fn nullspace(m: &CMatrix, rel_tol: f64) -> Nullspace {
    let rows = m.rows;
    let cols = m.cols;
    let mut a = m.clone();
    let mut col_of: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    let mut first_pivot = 0.0_f64;

    for step in 0..rows.min(cols) {
        let mut pm = 0.0;
        let (mut pi, mut pj) = (step, step);
        for i in step..rows {
            for j in step..cols {
                let mag = a.at(i, j).norm();
                if mag > pm {
                    pm = mag;
                    pi = i;
                    pj = j;
                }
            }
        }
        if step == 0 {
            first_pivot = pm;
        }
        if pm == 0.0 || pm <= rel_tol * first_pivot {
            break;
        }
        if pi != step {
            for j in 0..cols {
                let (x, y) = (a.at(step, j), a.at(pi, j));
                a.set(step, j, y);
                a.set(pi, j, x);
            }
        }
        if pj != step {
            for i in 0..rows {
                let (x, y) = (a.at(i, step), a.at(i, pj));
                a.set(i, step, y);
                a.set(i, pj, x);
            }
            col_of.swap(step, pj);
        }
        rank += 1;
        let pivot = a.at(step, step);
        for i in step + 1..rows {
            let factor = a.at(i, step) / pivot;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in step..cols {
                let v = a.at(i, j) - factor * a.at(step, j);
                a.set(i, j, v);
            }
        }
    }

    let mut vectors = Vec::with_capacity(cols - rank);
    for free in rank..cols {
        let mut y = vec![Complex64::new(0.0, 0.0); cols];
        y[free] = Complex64::new(1.0, 0.0);
        for i in (0..rank).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for (j, yj) in y.iter().enumerate().take(cols).skip(i + 1) {
                s += a.at(i, j) * yj;
            }
            y[i] = -s / a.at(i, i);
        }
        let mut x = vec![Complex64::new(0.0, 0.0); cols];
        for (permuted, &original) in col_of.iter().enumerate() {
            x[original] = y[permuted];
        }
        normalize(&mut x);
        vectors.push(x);
    }
    Nullspace { vectors, rank }
}

/// Unit norm, then rotate so the component of largest magnitude (first on
/// ties) is positive real.
fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let mut anchor = 0;
    let mut best = 0.0;
    for (i, c) in v.iter().enumerate() {
        if c.norm() > best {
            best = c.norm();
            anchor = i;
        }
    }
    let phase = v[anchor] / v[anchor].norm();
    let scale = phase.conj() / norm;
    for c in v.iter_mut() {
        *c *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(m: &CMatrix, x: &[Complex64]) -> f64 {
        m.apply(x).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn one_by_two_real() {
        let m = CMatrix::from_rows(vec![vec![c(2.0, 0.0), c(-1.0, 0.0)]]);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.rank, 1);
        assert_eq!(ns.vectors.len(), 1);
        let v = &ns.vectors[0];
        // proportional to (1, 2); anchor is the second component
        assert!((v[0].re - 1.0 / 5.0_f64.sqrt()).abs() < 1e-14);
        assert!((v[1].re - 2.0 / 5.0_f64.sqrt()).abs() < 1e-14);
        assert!(v[0].im.abs() < 1e-15 && v[1].im.abs() < 1e-15);
        assert!(residual(&m, v) < 1e-14);
    }

    #[test]
    fn two_by_three_rank_two() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        ]);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.rank, 2);
        assert_eq!(ns.vectors.len(), 1);
        let v = &ns.vectors[0];
        let s = 3.0_f64.sqrt().recip();
        assert!((v[0].re - s).abs() < 1e-14);
        assert!((v[1].re - s).abs() < 1e-14);
        assert!((v[2].re + s).abs() < 1e-14);
        assert!(residual(&m, v) < 1e-14);
    }

    #[test]
    fn complex_entries_and_phase_anchor() {
        // i c0 + c1 = 0 has null vector (1, -i)/sqrt(2) after anchoring
        let m = CMatrix::from_rows(vec![vec![c(0.0, 1.0), c(1.0, 0.0)]]);
        let ns = nullspace(&m, 1e-12);
        let v = &ns.vectors[0];
        let s = 2.0_f64.sqrt().recip();
        assert!((v[0] - c(s, 0.0)).norm() < 1e-14);
        assert!((v[1] - c(0.0, -s)).norm() < 1e-14);
        assert!(residual(&m, v) < 1e-14);
    }

    #[test]
    fn zero_matrix_has_full_nullity() {
        let m = CMatrix::zeros(1, 2);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.rank, 0);
        assert_eq!(ns.vectors.len(), 2);
    }

    #[test]
    fn random_wide_matrix_residual_is_tiny() {
        // fixed pseudo-random entries; rank 3, nullity 1
        let mut seed = 0x2545F4914F6CDD1D_u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let rows: Vec<Vec<Complex64>> = (0..3)
            .map(|_| (0..4).map(|_| c(next(), next())).collect())
            .collect();
        let m = CMatrix::from_rows(rows);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.rank, 3);
        assert_eq!(ns.vectors.len(), 1);
        let v = &ns.vectors[0];
        let unit: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        assert!((unit - 1.0).abs() < 1e-12);
        assert!(residual(&m, v) < 1e-12 * m.frobenius());
    }
}
