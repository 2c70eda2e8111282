//! Dense LU factorization with partial pivoting. The systems solved here
//! have a few dozen unknowns at most.

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|x| *x = 0.0);
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * x[c]).sum())
            .collect()
    }
}

/// Column whose pivot vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular(pub usize);

const PIVOT_FLOOR: f64 = 1e-300;

/// Solve `a x = b` in place: `a` is overwritten by its factors and `b` by
/// the solution.
pub fn lu_solve(a: &mut DenseMatrix, b: &mut [f64]) -> Result<(), Singular> {
    let n = a.n;
    debug_assert_eq!(b.len(), n);
    let d = &mut a.data;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|r| (r, d[r * n + k].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if !(pmax > PIVOT_FLOOR) {
            return Err(Singular(k));
        }
        if p != k {
            for c in 0..n {
                d.swap(k * n + c, p * n + c);
            }
            b.swap(k, p);
        }
        let piv = d[k * n + k];
        for r in k + 1..n {
            let m = d[r * n + k] / piv;
            if m == 0.0 {
                continue;
            }
            d[r * n + k] = m;
            for c in k + 1..n {
                d[r * n + c] -= m * d[k * n + c];
            }
            b[r] -= m * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= d[k * n + c] * b[c];
        }
        b[k] = s / d[k * n + k];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[f64]]) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows.len());
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m.add(r, c, *v);
            }
        }
        m
    }

    #[test]
    fn needs_pivoting() {
        let a = from_rows(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        let x = [1.0, -2.0, 0.5];
        let mut b = a.mul_vec(&x);
        let mut f = a.clone();
        lu_solve(&mut f, &mut b).unwrap();
        for (u, v) in b.iter().zip(x) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_reports_column() {
        let mut a = from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let mut b = vec![1.0, 2.0];
        assert_eq!(lu_solve(&mut a, &mut b), Err(Singular(1)));
    }

    #[test]
    fn wide_dynamic_range() {
        // gmin-scale and source-scale entries side by side.
        let a = from_rows(&[
            &[1e-12 + 1e-3, -1e-3, 1.0],
            &[-1e-3, 1e-3 + 1e-12, 0.0],
            &[1.0, 0.0, 0.0],
        ]);
        let x = [3.3, 3.3, -3.3e-12];
        let mut b = a.mul_vec(&x);
        let mut f = a.clone();
        lu_solve(&mut f, &mut b).unwrap();
        assert!((b[0] - 3.3).abs() < 1e-12);
        assert!((b[1] - 3.3).abs() < 1e-9);
    }
}
