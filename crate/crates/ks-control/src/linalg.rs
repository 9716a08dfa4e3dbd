//! Banded linear algebra: storage, LU factorization with partial pivoting,
//! and a monolithic solver for 2x2 block systems with banded blocks.
//!
//! All matrices here are square and small-banded (the finite-element
//! discretization produces tridiagonal blocks), so a dense band LU with row
//! pivoting is both robust and fast: factorization is O(n * bw^2) and each
//! solve is O(n * bw).

use thiserror::Error;

/// Relative pivot threshold: a pivot below `PIVOT_RTOL * max_row_norm`
/// is treated as a structural singularity.
pub const PIVOT_RTOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum LinalgError {
    /// Encountered a pivot too small relative to the matrix scale.
    #[error("singular matrix: pivot {pivot:.3e} below threshold at elimination step {step}")]
    SingularMatrix { step: usize, pivot: f64 },
    /// Matrix/vector dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Square banded matrix in row-major band storage.
///
/// Entry `(i, j)` is stored iff `-lower <= j - i <= upper`; everything
/// outside the band is implicitly zero.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    /// `data[i * stride + (j - i + lower)]` holds entry (i, j).
    data: Vec<f64>,
}

impl BandedMatrix {
    /// Zero matrix of size `n` with the given bandwidths.
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        assert!(n > 0, "empty matrix");
        assert!(lower < n && upper < n, "bandwidths must be < n");
        let stride = lower + upper + 1;
        BandedMatrix { n, lower, upper, data: vec![0.0; n * stride] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    #[inline]
    fn stride(&self) -> usize {
        self.lower + self.upper + 1
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.lower >= i && j <= i + self.upper && j < self.n
    }

    /// Entry (i, j); zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[i * self.stride() + (j + self.lower - i)]
        } else {
            0.0
        }
    }

    /// Set entry (i, j). Panics if (i, j) lies outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.stride();
        self.data[i * s + (j + self.lower - i)] = v;
    }

    /// Add `v` to entry (i, j). Panics if (i, j) lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.stride();
        self.data[i * s + (j + self.lower - i)] += v;
    }

    /// Overwrite row `i` with `e_i` (used for Dirichlet rows).
    pub fn set_unit_row(&mut self, i: usize) {
        self.zero_row(i);
        self.set(i, i, 1.0);
    }

    /// Zero out the stored band of row `i`.
    pub fn zero_row(&mut self, i: usize) {
        let s = self.stride();
        for k in 0..s {
            self.data[i * s + k] = 0.0;
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.lower);
            let jhi = (i + self.upper).min(self.n - 1);
            let mut acc = 0.0;
            for j in jlo..=jhi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Largest row 1-norm, used to scale the pivot threshold.
    pub fn max_row_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.lower);
            let jhi = (i + self.upper).min(self.n - 1);
            let r: f64 = (jlo..=jhi).map(|j| self.get(i, j).abs()).sum();
            m = m.max(r);
        }
        m
    }

    /// Dense copy, for oracles and debugging.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }
}

/// LU factorization of a banded matrix with partial (row) pivoting.
///
/// Row interchanges widen the upper band by at most `lower`, so the factor
/// is stored with `upper + lower` superdiagonals.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    lower: usize,
    /// Upper bandwidth of U, = upper + lower of the original matrix.
    upper_w: usize,
    /// Band storage of L (below diagonal, multipliers) and U (diagonal and above).
    data: Vec<f64>,
    /// `pivot[k]` = row swapped into position at elimination step k.
    pivot: Vec<usize>,
}

impl BandedLu {
    /// Factor `a` as P A = L U. Fails if a pivot falls below the relative
    /// threshold [`PIVOT_RTOL`].
    pub fn factor(a: &BandedMatrix) -> Result<Self, LinalgError> {
        let n = a.n;
        let kl = a.lower;
        let upper_w = (a.upper + a.lower).min(n - 1);
        let stride = kl + upper_w + 1;
        let mut data = vec![0.0; n * stride];
        // Copy A into the widened band layout.
        for i in 0..n {
            let jlo = i.saturating_sub(a.lower);
            let jhi = (i + a.upper).min(n - 1);
            for j in jlo..=jhi {
                data[i * stride + (j + kl - i)] = a.get(i, j);
            }
        }
        let threshold = PIVOT_RTOL * a.max_row_norm();
        let mut pivot = vec![0usize; n];

        // idx(i, j) valid for j in [i - kl, i + upper_w]
        let idx = |i: usize, j: usize| i * stride + (j + kl - i);

        for k in 0..n {
            // Partial pivoting over the rows that carry column k.
            let imax = (k + kl).min(n - 1);
            let mut p = k;
            let mut pmag = data[idx(k, k)].abs();
            for i in (k + 1)..=imax {
                let mag = data[idx(i, k)].abs();
                if mag > pmag {
                    pmag = mag;
                    p = i;
                }
            }
            if pmag < threshold || !pmag.is_finite() {
                return Err(LinalgError::SingularMatrix { step: k, pivot: data[idx(p, k)] });
            }
            pivot[k] = p;
            if p != k {
                // Swap the stored segments of rows k and p over columns [k, k + upper_w].
                let jhi = (k + upper_w).min(n - 1);
                for j in k..=jhi {
                    data.swap(idx(k, j), idx(p, j));
                }
            }
            let pivval = data[idx(k, k)];
            let ihi = (k + kl).min(n - 1);
            let jhi = (k + upper_w).min(n - 1);
            for i in (k + 1)..=ihi {
                let m = data[idx(i, k)] / pivval;
                data[idx(i, k)] = m; // store multiplier in place of the eliminated entry
                if m != 0.0 {
                    for j in (k + 1)..=jhi {
                        data[idx(i, j)] -= m * data[idx(k, j)];
                    }
                }
            }
        }
        Ok(BandedLu { n, lower: kl, upper_w, data, pivot })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve A x = b for a single right-hand side.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "solve dimension mismatch");
        let stride = self.lower + self.upper_w + 1;
        let idx = |i: usize, j: usize| i * stride + (j + self.lower - i);
        let mut x = b.to_vec();
        // Forward substitution with the recorded row interchanges.
        for k in 0..self.n {
            let p = self.pivot[k];
            if p != k {
                x.swap(k, p);
            }
            let ihi = (k + self.lower).min(self.n - 1);
            for i in (k + 1)..=ihi {
                x[i] -= self.data[idx(i, k)] * x[k];
            }
        }
        // Back substitution on U.
        for k in (0..self.n).rev() {
            let jhi = (k + self.upper_w).min(self.n - 1);
            let mut acc = x[k];
            for j in (k + 1)..=jhi {
                acc -= self.data[idx(k, j)] * x[j];
            }
            x[k] = acc / self.data[idx(k, k)];
        }
        x
    }
}

/// Factor and solve in one call.
pub fn solve_banded(a: &BandedMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if b.len() != a.n {
        return Err(LinalgError::DimensionMismatch(format!(
            "matrix is {}x{} but rhs has length {}",
            a.n,
            a.n,
            b.len()
        )));
    }
    Ok(BandedLu::factor(a)?.solve(b))
}

/// A 2x2 block system
/// ```text
/// [ A11 A12 ] [x1]   [rhs1]
/// [ A21 A22 ] [x2] = [rhs2]
/// ```
/// with four equally sized banded blocks.
#[derive(Debug, Clone)]
pub struct BlockSystem2x2 {
    pub a11: BandedMatrix,
    pub a12: BandedMatrix,
    pub a21: BandedMatrix,
    pub a22: BandedMatrix,
    pub rhs1: Vec<f64>,
    pub rhs2: Vec<f64>,
}

/// Factored form of the interleaved 2x2 block matrix, reusable across
/// right-hand sides (the time stepper factors once per run).
#[derive(Debug, Clone)]
pub struct BlockLu {
    lu: BandedLu,
    n: usize,
}

impl BlockLu {
    /// Interleave the blocks into a single banded matrix
    /// (unknown ordering x1_0, x2_0, x1_1, x2_1, ...) and factor it.
    ///
    /// For tridiagonal blocks the interleaved bandwidth is 3, which keeps the
    /// band solve O(n).
    pub fn factor(
        a11: &BandedMatrix,
        a12: &BandedMatrix,
        a21: &BandedMatrix,
        a22: &BandedMatrix,
    ) -> Result<Self, LinalgError> {
        let n = a11.n();
        for (name, blk) in [("a12", a12), ("a21", a21), ("a22", a22)] {
            if blk.n() != n {
                return Err(LinalgError::DimensionMismatch(format!(
                    "block {name} is {}x{} but a11 is {n}x{n}",
                    blk.n(),
                    blk.n()
                )));
            }
        }
        let bw = |m: &BandedMatrix| m.lower_bandwidth().max(m.upper_bandwidth());
        let blk_bw = bw(a11).max(bw(a12)).max(bw(a21)).max(bw(a22));
        // Row 2i+r, column 2j+c: |2(j-i)| <= 2*blk_bw, plus 1 for the intra-pair offset.
        let band = (2 * blk_bw + 1).min(2 * n - 1);
        let mut full = BandedMatrix::zeros(2 * n, band, band);
        let mut scatter = |blk: &BandedMatrix, roff: usize, coff: usize| {
            for i in 0..n {
                let jlo = i.saturating_sub(blk.lower_bandwidth());
                let jhi = (i + blk.upper_bandwidth()).min(n - 1);
                for j in jlo..=jhi {
                    let v = blk.get(i, j);
                    if v != 0.0 {
                        full.set(2 * i + roff, 2 * j + coff, v);
                    }
                }
            }
        };
        scatter(a11, 0, 0);
        scatter(a12, 0, 1);
        scatter(a21, 1, 0);
        scatter(a22, 1, 1);
        Ok(BlockLu { lu: BandedLu::factor(&full)?, n })
    }

    /// Solve for (x1, x2) given the two right-hand-side halves.
    pub fn solve(&self, rhs1: &[f64], rhs2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(rhs1.len(), self.n, "rhs1 dimension mismatch");
        assert_eq!(rhs2.len(), self.n, "rhs2 dimension mismatch");
        let mut b = vec![0.0; 2 * self.n];
        for i in 0..self.n {
            b[2 * i] = rhs1[i];
            b[2 * i + 1] = rhs2[i];
        }
        let x = self.lu.solve(&b);
        let mut x1 = vec![0.0; self.n];
        let mut x2 = vec![0.0; self.n];
        for i in 0..self.n {
            x1[i] = x[2 * i];
            x2[i] = x[2 * i + 1];
        }
        (x1, x2)
    }
}

/// Solve a 2x2 block system by interleaved banded LU.
pub fn solve_block2x2(sys: &BlockSystem2x2) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let lu = BlockLu::factor(&sys.a11, &sys.a12, &sys.a21, &sys.a22)?;
    if sys.rhs1.len() != sys.a11.n() || sys.rhs2.len() != sys.a11.n() {
        return Err(LinalgError::DimensionMismatch(format!(
            "rhs halves have lengths {} and {}, blocks are {}x{}",
            sys.rhs1.len(),
            sys.rhs2.len(),
            sys.a11.n(),
            sys.a11.n()
        )));
    }
    Ok(lu.solve(&sys.rhs1, &sys.rhs2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, lo: f64, di: f64, up: f64) -> BandedMatrix {
        let mut a = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, di);
            if i > 0 {
                a.set(i, i - 1, lo);
            }
            if i + 1 < n {
                a.set(i, i + 1, up);
            }
        }
        a
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let mut a = BandedMatrix::zeros(5, 0, 0);
        for i in 0..5 {
            a.set(i, i, 1.0);
        }
        let b = vec![3.0, -1.0, 0.5, 2.0, 9.0];
        let x = solve_banded(&a, &b).unwrap();
        for i in 0..5 {
            assert!((x[i] - b[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn tridiagonal_solve_matches_known_solution() {
        // A x = b with A = tridiag(-1, 2, -1), x = [1, 2, 3]: b = [0, 0, 4].
        let a = tridiag(3, -1.0, 2.0, -1.0);
        let x = solve_banded(&a, &[0.0, 0.0, 4.0]).unwrap();
        let expect = [1.0, 2.0, 3.0];
        for i in 0..3 {
            assert!((x[i] - expect[i]).abs() < 1e-12, "x[{i}] = {}", x[i]);
        }
    }

    #[test]
    fn pivoting_handles_zero_leading_diagonal() {
        // Without row interchanges the first pivot would be zero.
        let mut a = BandedMatrix::zeros(2, 1, 1);
        a.set(0, 0, 0.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 0.0);
        let x = solve_banded(&a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-15);
        assert!((x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        // Row of zeros => rank deficient.
        a.set(0, 0, 1.0);
        a.set(2, 2, 1.0);
        match solve_banded(&a, &[1.0, 1.0, 1.0]) {
            Err(LinalgError::SingularMatrix { .. }) => {}
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn residual_is_small_for_random_banded_system() {
        // Deterministic pseudo-random band entries; check ||Ax - b||_inf.
        let n = 40;
        let mut a = BandedMatrix::zeros(n, 2, 2);
        let mut state = 123456789u64;
        let mut next = || {
            // xorshift64
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 2000) as f64 / 1000.0 - 1.0
        };
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                a.set(i, j, next());
            }
            a.add(i, i, 4.0); // keep it comfortably nonsingular
        }
        let b: Vec<f64> = (0..n).map(|_| next()).collect();
        let x = solve_banded(&a, &b).unwrap();
        let r = a.matvec(&x);
        let resid = r.iter().zip(&b).map(|(ri, bi)| (ri - bi).abs()).fold(0.0f64, f64::max);
        let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(resid <= 1e-10 * (1.0 + bnorm), "residual {resid}");
    }

    #[test]
    fn block_solve_interleaves_correctly() {
        // [ I  D ] [x1]   [b1]      with D = diag(2): x2 = b2, x1 = b1 - 2 b2.
        // [ 0  I ] [x2] = [b2]
        let n = 4;
        let mut eye = BandedMatrix::zeros(n, 0, 0);
        let mut two = BandedMatrix::zeros(n, 0, 0);
        let zero = BandedMatrix::zeros(n, 0, 0);
        for i in 0..n {
            eye.set(i, i, 1.0);
            two.set(i, i, 2.0);
        }
        let sys = BlockSystem2x2 {
            a11: eye.clone(),
            a12: two,
            a21: zero,
            a22: eye,
            rhs1: vec![1.0, 2.0, 3.0, 4.0],
            rhs2: vec![0.5, 0.5, 0.5, 0.5],
        };
        let (x1, x2) = solve_block2x2(&sys).unwrap();
        for i in 0..n {
            assert!((x2[i] - 0.5).abs() < 1e-14);
            assert!((x1[i] - (sys.rhs1[i] - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn block_lu_is_reusable_across_rhs() {
        let n = 6;
        let a11 = tridiag(n, -1.0, 3.0, -1.0);
        let a12 = tridiag(n, 0.5, 1.0, 0.5);
        let a21 = tridiag(n, 0.0, -2.0, 1.0);
        let a22 = tridiag(n, -1.0, 4.0, -1.0);
        let lu = BlockLu::factor(&a11, &a12, &a21, &a22).unwrap();
        for trial in 0..3 {
            let b1: Vec<f64> = (0..n).map(|i| (i + trial) as f64).collect();
            let b2: Vec<f64> = (0..n).map(|i| 1.0 - i as f64 * 0.25).collect();
            let (x1, x2) = lu.solve(&b1, &b2);
            // Residual of both block rows.
            let r1 = a11.matvec(&x1);
            let r1b = a12.matvec(&x2);
            let r2 = a21.matvec(&x1);
            let r2b = a22.matvec(&x2);
            for i in 0..n {
                assert!((r1[i] + r1b[i] - b1[i]).abs() < 1e-11);
                assert!((r2[i] + r2b[i] - b2[i]).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn bandwidth_one_system_of_size_one() {
        let mut a = BandedMatrix::zeros(1, 0, 0);
        a.set(0, 0, -4.0);
        let x = solve_banded(&a, &[8.0]).unwrap();
        assert!((x[0] + 2.0).abs() < 1e-15);
    }
}
