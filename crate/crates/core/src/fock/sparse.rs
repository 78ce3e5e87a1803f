use crate::algebra::{Coefficient, Ring, C64};

/// Square sparse complex matrix stored as sorted rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        Self { dim, rows: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, rows: (0..dim).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect() }
    }

    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
            rows[i].push((j, v));
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            merged.retain(|e| e.1 != C64::new(0.0, 0.0));
            *row = merged;
        }
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, C64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rows[i].binary_search_by_key(&j, |e| e.0).map(|p| self.rows[i][p].1).unwrap_or_default()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector length does not match operator dimension");
        self.rows.iter().map(|row| row.iter().map(|(j, a)| a * v[*j]).sum()).collect()
    }

    /// Largest entry magnitude with row and column both in `mask`.
    pub fn max_abs_on(&self, mask: &[bool]) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .filter(|(i, _)| mask[*i])
            .flat_map(|(_, row)| row.iter().filter(|(j, _)| mask[*j]).map(|(_, v)| v.norm()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.iter().flatten().map(|(_, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
                    let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
                    let entry = if take_a {
                        i += 1;
                        a[i - 1]
                    } else if take_b {
                        j += 1;
                        (b[j - 1].0, b[j - 1].1 * sign)
                    } else {
                        i += 1;
                        j += 1;
                        (a[i - 1].0, a[i - 1].1 + b[j - 1].1 * sign)
                    };
                    if entry.1 != C64::new(0.0, 0.0) {
                        out.push(entry);
                    }
                }
                out
            })
            .collect();
        Self { dim: self.dim, rows }
    }
}

impl Ring for SparseOp {
    fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                for &(k, a) in row {
                    for &(j, b) in &other.rows[k] {
                        if acc[j] == C64::new(0.0, 0.0) {
                            touched.push(j);
                        }
                        acc[j] += a * b;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let out: Vec<(usize, C64)> = touched
                    .iter()
                    .map(|&j| (j, std::mem::take(&mut acc[j])))
                    .filter(|e| e.1 != C64::new(0.0, 0.0))
                    .collect();
                touched.clear();
                out
            })
            .collect();
        Self { dim: self.dim, rows }
    }

    fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Coefficient for SparseOp {
    fn scale(&self, c: C64) -> Self {
        if c == C64::new(0.0, 0.0) {
            return Self::zero(self.dim);
        }
        Self { dim: self.dim, rows: self.rows.iter().map(|r| r.iter().map(|(j, v)| (*j, v * c)).collect()).collect() }
    }

    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
}
