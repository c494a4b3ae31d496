//! Textbook two-phase dense tableau simplex with Bland's rule. Shares no
//! code with the library's bounded revised simplex.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

/// `min c·x` subject to `rows` and `lo <= x <= hi` (finite `lo`).
#[derive(Debug, Clone)]
pub struct DenseLp {
    pub c: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Rel, f64)>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

struct Tableau {
    /// `m` constraint rows, each `ncols + 1` wide (rhs last).
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.t[r][col];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    fn reduced(&self, cost: &[f64], j: usize) -> f64 {
        cost[j]
            - self
                .basis
                .iter()
                .enumerate()
                .map(|(i, &b)| cost[b] * self.t[i][j])
                .sum::<f64>()
    }

    fn value(&self, cost: &[f64]) -> f64 {
        let rhs = self.ncols;
        self.basis.iter().enumerate().map(|(i, &b)| cost[b] * self.t[i][rhs]).sum()
    }

    /// Minimises `cost` over columns with `allowed[j]`; false when unbounded.
    fn optimise(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        let rhs = self.ncols;
        loop {
            let Some(col) = (0..self.ncols).find(|&j| allowed[j] && self.reduced(cost, j) < -PIVOT_TOL) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[col] > PIVOT_TOL {
                    let ratio = row[rhs] / row[col];
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => ratio < r - 1e-12 || (ratio <= r + 1e-12 && self.basis[i] < b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

impl DenseLp {
    /// Returns the status and, when optimal, the objective value.
    pub fn solve(&self) -> (Outcome, f64) {
        let n = self.c.len();
        // Shift to x' = x - lo >= 0 and turn finite upper bounds into rows.
        let mut rows: Vec<(Vec<f64>, Rel, f64)> = Vec::new();
        for (a, rel, b) in &self.rows {
            let shift: f64 = a.iter().zip(&self.lo).map(|(x, l)| x * l).sum();
            rows.push((a.clone(), *rel, b - shift));
        }
        for j in 0..n {
            if self.hi[j].is_finite() {
                let mut a = vec![0.0; n];
                a[j] = 1.0;
                rows.push((a, Rel::Le, self.hi[j] - self.lo[j]));
            }
        }
        for (a, rel, b) in rows.iter_mut() {
            if *b < 0.0 {
                a.iter_mut().for_each(|v| *v = -*v);
                *b = -*b;
                *rel = match rel {
                    Rel::Le => Rel::Ge,
                    Rel::Ge => Rel::Le,
                    Rel::Eq => Rel::Eq,
                };
            }
        }
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.1 != Rel::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Rel::Le).count();
        let ncols = n + n_slack + n_art;
        let mut t = vec![vec![0.0; ncols + 1]; m];
        let mut basis = vec![0; m];
        let (mut s, mut art) = (n, n + n_slack);
        let mut is_art = vec![false; ncols];
        for (i, (a, rel, b)) in rows.iter().enumerate() {
            t[i][..n].copy_from_slice(a);
            t[i][ncols] = *b;
            match rel {
                Rel::Le => {
                    t[i][s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Rel::Ge => {
                    t[i][s] = -1.0;
                    s += 1;
                    t[i][art] = 1.0;
                    basis[i] = art;
                    is_art[art] = true;
                    art += 1;
                }
                Rel::Eq => {
                    t[i][art] = 1.0;
                    basis[i] = art;
                    is_art[art] = true;
                    art += 1;
                }
            }
        }
        let mut tab = Tableau { t, basis, ncols };

        let phase1: Vec<f64> = (0..ncols).map(|j| if is_art[j] { 1.0 } else { 0.0 }).collect();
        let everything = vec![true; ncols];
        tab.optimise(&phase1, &everything);
        if tab.value(&phase1) > FEAS_TOL {
            return (Outcome::Infeasible, f64::NAN);
        }
        // Drive zero-valued artificials out of the basis where possible.
        for i in 0..m {
            if is_art[tab.basis[i]] {
                if let Some(j) = (0..ncols).find(|&j| !is_art[j] && tab.t[i][j].abs() > PIVOT_TOL) {
                    tab.pivot(i, j);
                }
            }
        }
        let mut phase2 = vec![0.0; ncols];
        phase2[..n].copy_from_slice(&self.c);
        let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
        if !tab.optimise(&phase2, &allowed) {
            return (Outcome::Unbounded, f64::NAN);
        }
        let shift: f64 = self.c.iter().zip(&self.lo).map(|(c, l)| c * l).sum();
        (Outcome::Optimal, tab.value(&phase2) + shift)
    }
}
