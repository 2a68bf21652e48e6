use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense `n x n` matrix of demand rates in bits per second. Diagonal
/// entries are kept but never routed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandMatrix {
    n: usize,
    rates: Vec<f64>,
}

impl DemandMatrix {
    pub fn zeros(n: usize) -> Self {
        DemandMatrix {
            n,
            rates: vec![0.0; n * n],
        }
    }

    /// Row-major rates.
    pub fn from_rows(n: usize, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "demand matrix needs {} entries, got {}",
                n * n,
                rates.len()
            )));
        }
        if let Some(bad) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(Error::InvalidParameter(format!("demand rate {bad} is not a nonnegative number")));
        }
        Ok(DemandMatrix { n, rates })
    }

    /// `m[s][perm[s]] = rate` for every `s` with `perm[s] != s`.
    pub fn permutation(perm: &[usize], rate: f64) -> Self {
        let n = perm.len();
        let mut m = DemandMatrix::zeros(n);
        for (s, &d) in perm.iter().enumerate() {
            if s != d {
                m.set(s, d, rate);
            }
        }
        m
    }

    /// Every off-diagonal pair gets `node_rate / (n - 1)`.
    pub fn all_to_all(n: usize, node_rate: f64) -> Self {
        let mut m = DemandMatrix::zeros(n);
        if n > 1 {
            let r = node_rate / (n - 1) as f64;
            for s in 0..n {
                for d in (0..n).filter(|&d| d != s) {
                    m.set(s, d, r);
                }
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: usize, d: usize) -> f64 {
        self.rates[s * self.n + d]
    }

    pub fn set(&mut self, s: usize, d: usize, rate: f64) {
        self.rates[s * self.n + d] = rate;
    }

    /// Off-diagonal pairs with positive demand, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |s| {
            (0..self.n)
                .filter(move |&d| d != s)
                .map(move |d| (s, d, self.get(s, d)))
                .filter(|&(_, _, m)| m > 0.0)
        })
    }

    /// `M`, the sum of all off-diagonal demand.
    pub fn total(&self) -> f64 {
        self.pairs().map(|(_, _, m)| m).sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.pairs().map(|(_, _, m)| m).fold(0.0, f64::max)
    }

    pub fn scaled(&self, k: f64) -> Self {
        DemandMatrix {
            n: self.n,
            rates: self.rates.iter().map(|r| r * k).collect(),
        }
    }

    pub fn row_sum(&self, s: usize) -> f64 {
        (0..self.n).map(|d| self.get(s, d)).sum()
    }

    pub fn col_sum(&self, d: usize) -> f64 {
        (0..self.n).map(|s| self.get(s, d)).sum()
    }

    /// Every row and column sums to its node capacity, within `tol` relative.
    pub fn is_saturated(&self, node_capacity: &[f64], tol: f64) -> bool {
        node_capacity.len() == self.n
            && (0..self.n).all(|u| {
                let c = node_capacity[u];
                let slack = tol * c.abs().max(1.0);
                (self.row_sum(u) - c).abs() <= slack && (self.col_sum(u) - c).abs() <= slack
            })
    }
}
