//! Compressed sparse row storage for relation and meta-path adjacencies.
//!
//! Column indices are stored as `u32`; every node-type population in a
//! graph must therefore fit below `u32::MAX`. A missing value array means
//! every stored entry equals one (the usual case for raw relations).

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseAdjacency {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Option<Vec<f64>>,
}

/// Tuning knobs for the sparse product.
#[derive(Debug, Clone, Copy)]
pub struct ProductOptions {
    /// Rows per independently computed block.
    pub block_rows: usize,
    /// Upper-bound output density above which blocks are computed one at a
    /// time instead of in parallel, bounding the number of live partial
    /// results.
    pub streaming_density: f64,
}

impl Default for ProductOptions {
    fn default() -> Self {
        ProductOptions {
            block_rows: 2048,
            streaming_density: 0.05,
        }
    }
}

struct Block {
    lengths: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseAdjacency {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseAdjacency {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            values: None,
        }
    }

    /// Builds a binary adjacency from `(row, col)` pairs, sorting and
    /// dropping duplicates.
    pub fn from_pairs(n_rows: usize, n_cols: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c) in pairs {
            if r >= n_rows || c >= n_cols {
                return Err(Error::contract(format!(
                    "entry ({r}, {c}) outside a {n_rows}x{n_cols} adjacency"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut indices = vec![0u32; pairs.len()];
        for &(r, c) in pairs {
            indices[fill[r]] = c as u32;
            fill[r] += 1;
        }
        let mut indptr = Vec::with_capacity(n_rows + 1);
        indptr.push(0);
        let mut out = Vec::with_capacity(indices.len());
        for r in 0..n_rows {
            let row = &mut indices[counts[r]..counts[r + 1]];
            row.sort_unstable();
            let mut last = None;
            for &c in row.iter() {
                if last != Some(c) {
                    out.push(c);
                    last = Some(c);
                }
            }
            indptr.push(out.len());
        }
        Ok(SparseAdjacency {
            n_rows,
            n_cols,
            indptr,
            indices: out,
            values: None,
        })
    }

    /// Wraps raw CSR arrays without checking them. Use [`check`](Self::check)
    /// to list violated invariants.
    pub fn from_raw_parts(
        n_rows: usize,
        n_cols: usize,
        indptr: Vec<usize>,
        indices: Vec<u32>,
        values: Option<Vec<f64>>,
    ) -> Self {
        SparseAdjacency {
            n_rows,
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    /// Lists every structural problem: malformed row pointers, unsorted or
    /// duplicate columns, out-of-range columns, value-length mismatch.
    pub fn check(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.indptr.len() != self.n_rows + 1
            || self.indptr.first() != Some(&0)
            || self.indptr.last() != Some(&self.indices.len())
            || self.indptr.windows(2).any(|w| w[0] > w[1])
        {
            issues.push("malformed row pointer array".to_string());
            return issues;
        }
        if let Some(values) = &self.values {
            if values.len() != self.indices.len() {
                issues.push(format!(
                    "value array has {} entries for {} stored indices",
                    values.len(),
                    self.indices.len()
                ));
            }
        }
        for r in 0..self.n_rows {
            let row = self.row(r);
            for (k, &c) in row.iter().enumerate() {
                if c as usize >= self.n_cols {
                    issues.push(format!(
                        "entry ({r}, {c}) out of range: only {} columns",
                        self.n_cols
                    ));
                }
                if k > 0 && row[k - 1] >= c {
                    issues.push(format!(
                        "row {r}: column {c} duplicated or not strictly increasing"
                    ));
                }
            }
        }
        issues
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn density(&self) -> f64 {
        let cells = self.n_rows as f64 * self.n_cols as f64;
        if cells == 0.0 {
            0.0
        } else {
            self.nnz() as f64 / cells
        }
    }

    pub fn is_binary(&self) -> bool {
        self.values.is_none()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u32] {
        &self.indices[self.indptr[r]..self.indptr[r + 1]]
    }

    #[inline]
    pub fn row_len(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    /// `(col, value)` pairs of one row; binary matrices report 1.0.
    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        let values = self.values.as_deref();
        span.map(move |k| (self.indices[k] as usize, values.map_or(1.0, |v| v[k])))
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        match &self.values {
            None => self.row_len(r) as f64,
            Some(v) => v[self.indptr[r]..self.indptr[r + 1]].iter().sum(),
        }
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for r in 0..self.n_rows {
            for (c, v) in self.row_entries(r) {
                sums[c] += v;
            }
        }
        sums
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = self.row(r);
        match row.binary_search(&(c as u32)) {
            Ok(k) => self.values.as_ref().map_or(1.0, |v| v[self.indptr[r] + k]),
            Err(_) => 0.0,
        }
    }

    /// Iterates over all stored `(row, col)` positions in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).iter().map(move |&c| (r, c as usize)))
    }

    pub fn pattern(&self) -> SparseAdjacency {
        SparseAdjacency {
            values: None,
            ..self.clone()
        }
    }

    pub fn same_pattern(&self, other: &SparseAdjacency) -> bool {
        self.shape() == other.shape()
            && self.indptr == other.indptr
            && self.indices == other.indices
    }

    pub fn transpose(&self) -> SparseAdjacency {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut indices = vec![0u32; self.nnz()];
        let mut values = self.values.as_ref().map(|_| vec![0.0; self.nnz()]);
        for r in 0..self.n_rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k] as usize;
                let dst = fill[c];
                indices[dst] = r as u32;
                if let (Some(out), Some(src)) = (values.as_mut(), self.values.as_ref()) {
                    out[dst] = src[k];
                }
                fill[c] += 1;
            }
        }
        SparseAdjacency {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            indptr: counts,
            indices,
            values,
        }
    }

    /// Scales each non-empty row to sum to one. Empty rows stay empty.
    pub fn row_normalized(&self) -> SparseAdjacency {
        let mut values = Vec::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            let sum = self.row_sum(r);
            values.extend(self.row_entries(r).map(|(_, v)| v / sum));
        }
        SparseAdjacency {
            values: Some(values),
            ..self.clone()
        }
    }

    /// `D_r^{-1/2} B D_c^{-1/2}`, the off-diagonal block of the symmetric
    /// normalization of the bipartite lift `[[0, B], [Bᵀ, 0]]`.
    pub fn symmetric_bipartite_normalized(&self) -> SparseAdjacency {
        let row_deg: Vec<f64> = (0..self.n_rows).map(|r| self.row_sum(r)).collect();
        let col_deg = self.col_sums();
        let mut values = Vec::with_capacity(self.nnz());
        for (r, deg) in row_deg.iter().enumerate() {
            for (c, v) in self.row_entries(r) {
                values.push(v / (deg.sqrt() * col_deg[c].sqrt()));
            }
        }
        SparseAdjacency {
            values: Some(values),
            ..self.clone()
        }
    }

    /// Sparse product `self · rhs` (row-wise Gustavson accumulation).
    ///
    /// The result always carries explicit values; for binary inputs they are
    /// path counts.
    pub fn matmul(&self, rhs: &SparseAdjacency, opts: &ProductOptions) -> Result<SparseAdjacency> {
        if self.n_cols != rhs.n_rows {
            return Err(Error::contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, rhs.n_rows, rhs.n_cols
            )));
        }
        let block_rows = opts.block_rows.max(1);
        let starts: Vec<usize> = (0..self.n_rows).step_by(block_rows).collect();
        let compute =
            |&start: &usize| self.product_block(rhs, start, (start + block_rows).min(self.n_rows));

        let cells = self.n_rows as f64 * rhs.n_cols as f64;
        let bound = self.product_flops(rhs) as f64;
        let blocks: Vec<Block> = if cells > 0.0 && bound / cells > opts.streaming_density {
            starts.iter().map(compute).collect()
        } else {
            starts.par_iter().map(compute).collect()
        };

        let total: usize = blocks.iter().map(|b| b.indices.len()).sum();
        let mut indptr = Vec::with_capacity(self.n_rows + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        for block in blocks {
            for len in block.lengths {
                let next = indptr.last().copied().unwrap_or(0) + len;
                indptr.push(next);
            }
            indices.extend(block.indices);
            values.extend(block.values);
        }
        Ok(SparseAdjacency {
            n_rows: self.n_rows,
            n_cols: rhs.n_cols,
            indptr,
            indices,
            values: Some(values),
        })
    }

    fn product_flops(&self, rhs: &SparseAdjacency) -> usize {
        self.indices.iter().map(|&k| rhs.row_len(k as usize)).sum()
    }

    fn product_block(&self, rhs: &SparseAdjacency, start: usize, end: usize) -> Block {
        let mut acc = vec![0.0f64; rhs.n_cols];
        let mut seen = vec![false; rhs.n_cols];
        let mut touched: Vec<u32> = Vec::new();
        let mut block = Block {
            lengths: Vec::with_capacity(end - start),
            indices: Vec::new(),
            values: Vec::new(),
        };
        for r in start..end {
            for (k, a) in self.row_entries(r) {
                for (c, b) in rhs.row_entries(k) {
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c as u32);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            block.lengths.push(touched.len());
            for &c in &touched {
                let c = c as usize;
                block.indices.push(c as u32);
                block.values.push(acc[c]);
                acc[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
        }
        block
    }

    /// Dense row-major copy; intended for small matrices in tests and reports.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in self.row_entries(r) {
                row[c] = v;
            }
        }
        out
    }
}
