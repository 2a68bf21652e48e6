//! Dense primal simplex for `max c.x` subject to `A x <= b`, `x >= 0`,
//! `b >= 0`, with columns that can be appended between solves.
//!
//! The slack basis is feasible from the start, so no phase one is needed.
//! Slack columns are kept in the tableau: their entries hold `B^-1` and
//! their reduced costs are the row duals.

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
/// Degenerate pivots tolerated under Dantzig's rule before falling back to
/// Bland's rule.
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone)]
pub struct Lp {
    rows: usize,
    /// Column-major tableau, slack columns first.
    cols: Vec<Vec<f64>>,
    /// Reduced costs `z_j - c_j`; optimal when none is negative.
    reduced: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    objective: f64,
    pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Lp {
    pub fn new(b: Vec<f64>) -> Self {
        let rows = b.len();
        let cols = (0..rows)
            .map(|i| {
                let mut c = vec![0.0; rows];
                c[i] = 1.0;
                c
            })
            .collect();
        Lp {
            rows,
            cols,
            reduced: vec![0.0; rows],
            rhs: b,
            basis: (0..rows).collect(),
            objective: 0.0,
            pivots: 0,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Structural column count.
    pub fn num_columns(&self) -> usize {
        self.cols.len() - self.rows
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Row duals of the current basis.
    pub fn duals(&self) -> &[f64] {
        &self.reduced[..self.rows]
    }

    /// Appends a column given sparsely as `(row, coefficient)` pairs and
    /// returns its structural index.
    pub fn add_column(&mut self, cost: f64, entries: &[(usize, f64)]) -> usize {
        let mut col = vec![0.0; self.rows];
        let mut rc = -cost;
        for &(r, a) in entries {
            rc += self.reduced[r] * a;
            for (i, v) in col.iter_mut().enumerate() {
                *v += self.cols[r][i] * a;
            }
        }
        self.cols.push(col);
        self.reduced.push(rc);
        self.cols.len() - 1 - self.rows
    }

    /// Value of structural column `j` in the current basic solution.
    pub fn value(&self, j: usize) -> f64 {
        let idx = j + self.rows;
        self.basis
            .iter()
            .position(|&b| b == idx)
            .map_or(0.0, |i| self.rhs[i].max(0.0))
    }

    pub fn solve(&mut self, max_pivots: usize) -> Status {
        let mut streak = 0;
        let start = self.pivots;
        loop {
            if self.pivots - start >= max_pivots {
                return Status::IterationLimit;
            }
            let bland = streak >= DEGENERATE_STREAK;
            let entering = if bland {
                self.reduced.iter().position(|&r| r < -COST_EPS)
            } else {
                self.reduced
                    .iter()
                    .enumerate()
                    .filter(|(_, &r)| r < -COST_EPS)
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(j, _)| j)
            };
            let Some(q) = entering else {
                return Status::Optimal;
            };

            let col = &self.cols[q];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                if col[i] > PIVOT_EPS {
                    let ratio = self.rhs[i].max(0.0) / col[i];
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-15
                                || (ratio <= lr + 1e-15 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((p, ratio)) = leave else {
                return Status::Unbounded;
            };
            streak = if ratio <= 1e-15 { streak + 1 } else { 0 };
            self.pivot(p, q);
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.cols[q][p];
        let factors: Vec<f64> = self.cols[q].iter().map(|v| v / piv).collect();
        let rq = self.reduced[q];

        for j in 0..self.cols.len() {
            let a = self.cols[j][p];
            if a == 0.0 {
                continue;
            }
            let col = &mut self.cols[j];
            for (i, v) in col.iter_mut().enumerate() {
                if i == p {
                    *v = a / piv;
                } else {
                    *v -= factors[i] * a;
                }
            }
            self.reduced[j] -= rq * a / piv;
        }
        let b = self.rhs[p];
        for (i, v) in self.rhs.iter_mut().enumerate() {
            if i == p {
                *v = b / piv;
            } else {
                *v -= factors[i] * b;
            }
        }
        self.objective -= rq * b / piv;
        // exact zeros keep the entering column clean
        for (i, v) in self.cols[q].iter_mut().enumerate() {
            *v = if i == p { 1.0 } else { 0.0 };
        }
        self.reduced[q] = 0.0;
        self.basis[p] = q;
        self.pivots += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y : x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = Lp::new(vec![4.0, 12.0, 18.0]);
        let x = lp.add_column(3.0, &[(0, 1.0), (2, 3.0)]);
        let y = lp.add_column(5.0, &[(1, 2.0), (2, 2.0)]);
        assert_eq!(lp.solve(100), Status::Optimal);
        assert!((lp.objective() - 36.0).abs() < 1e-12);
        assert!((lp.value(x) - 2.0).abs() < 1e-12);
        assert!((lp.value(y) - 6.0).abs() < 1e-12);
        // duals: (0, 1.5, 1)
        let y_dual = lp.duals();
        assert!((y_dual[1] - 1.5).abs() < 1e-12 && (y_dual[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn column_added_after_solve() {
        let mut lp = Lp::new(vec![4.0, 12.0, 18.0]);
        lp.add_column(3.0, &[(0, 1.0), (2, 3.0)]);
        lp.solve(100);
        let y = lp.add_column(5.0, &[(1, 2.0), (2, 2.0)]);
        assert_eq!(lp.solve(100), Status::Optimal);
        assert!((lp.objective() - 36.0).abs() < 1e-12);
        assert!((lp.value(y) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = Lp::new(vec![1.0]);
        lp.add_column(1.0, &[(0, -1.0)]);
        assert_eq!(lp.solve(100), Status::Unbounded);
    }
}
