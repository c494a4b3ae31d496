//! Dense LU factorisation of the basis with product-form eta updates.

/// Pivots smaller than this are treated as zero.
pub(crate) const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
struct Eta {
    row: usize,
    col: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct BasisFactor {
    m: usize,
    /// Combined L (strictly below the diagonal, unit diagonal implied) and U.
    lu: Vec<f64>,
    /// Row permutation: row `k` of the factored matrix is row `perm[k]` of B.
    perm: Vec<usize>,
    etas: Vec<Eta>,
}

/// Outcome of a factorisation that found a (near) singular basis.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    /// Basis positions whose columns turned out to be dependent.
    pub positions: Vec<usize>,
    /// Rows left without a pivot, one per position.
    pub rows: Vec<usize>,
}

impl BasisFactor {
    /// Factors the `m x m` matrix whose column `k` is `cols[k]` (sparse).
    pub(crate) fn factor(m: usize, cols: &[&[(usize, f64)]]) -> Result<Self, Singular> {
        debug_assert_eq!(cols.len(), m);
        // Column-major dense copy.
        let mut a = vec![0.0; m * m];
        for (k, col) in cols.iter().enumerate() {
            for &(i, v) in col.iter() {
                a[k * m + i] += v;
            }
        }
        // Gaussian elimination column by column with partial row pivoting.
        // `w` is row-major: U on and above the diagonal, L multipliers below.
        let mut perm: Vec<usize> = (0..m).collect();
        let mut w = vec![0.0; m * m];
        let mut bad = Vec::new();
        let mut k = 0;
        for pos in 0..m {
            let mut c: Vec<f64> = (0..m).map(|r| a[pos * m + perm[r]]).collect();
            for s in 0..k {
                let piv = c[s];
                if piv != 0.0 {
                    for r in s + 1..m {
                        let l = w[r * m + s];
                        if l != 0.0 {
                            c[r] -= l * piv;
                        }
                    }
                }
            }
            let (best, mag) = (k..m)
                .map(|r| (r, c[r].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if mag <= PIVOT_TOL {
                bad.push(pos);
                continue;
            }
            if best != k {
                c.swap(best, k);
                perm.swap(best, k);
                for s in 0..k {
                    w.swap(best * m + s, k * m + s);
                }
            }
            let piv = c[k];
            for r in 0..=k {
                w[r * m + k] = c[r];
            }
            for r in k + 1..m {
                w[r * m + k] = c[r] / piv;
            }
            k += 1;
        }
        if !bad.is_empty() {
            return Err(Singular {
                positions: bad,
                rows: perm[k..].to_vec(),
            });
        }
        Ok(BasisFactor {
            m,
            lu: w,
            perm,
            etas: Vec::new(),
        })
    }

    pub(crate) fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B x = b` in place.
    pub(crate) fn ftran(&self, b: &mut [f64]) {
        let m = self.m;
        let mut y: Vec<f64> = self.perm.iter().map(|&r| b[r]).collect();
        for i in 0..m {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[i * m + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..m).rev() {
            let mut s = y[i];
            for j in i + 1..m {
                s -= self.lu[i * m + j] * y[j];
            }
            y[i] = s / self.lu[i * m + i];
        }
        b.copy_from_slice(&y);
        for eta in &self.etas {
            let xr = b[eta.row] / eta.col[eta.row];
            for (i, &a) in eta.col.iter().enumerate() {
                if i != eta.row && a != 0.0 {
                    b[i] -= a * xr;
                }
            }
            b[eta.row] = xr;
        }
    }

    /// Solves `B^T y = c` in place.
    pub(crate) fn btran(&self, c: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.row];
            for (i, &a) in eta.col.iter().enumerate() {
                if i != eta.row && a != 0.0 {
                    s -= a * c[i];
                }
            }
            c[eta.row] = s / eta.col[eta.row];
        }
        // (P^T L U)^T y = c  =>  U^T z = c, L^T w = z, y = P^T w.
        let mut z = c.to_vec();
        for i in 0..m {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[j * m + i] * z[j];
            }
            z[i] = s / self.lu[i * m + i];
        }
        for i in (0..m).rev() {
            let mut s = z[i];
            for j in i + 1..m {
                s -= self.lu[j * m + i] * z[j];
            }
            z[i] = s;
        }
        for (k, &r) in self.perm.iter().enumerate() {
            c[r] = z[k];
        }
    }

    /// Records the replacement of basis position `row` by a column whose
    /// FTRAN image is `alpha`.
    pub(crate) fn update(&mut self, row: usize, alpha: Vec<f64>) {
        self.etas.push(Eta { row, col: alpha });
    }
}
