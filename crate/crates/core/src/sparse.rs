//! Compressed sparse row storage with a sparsity pattern that can be shared
//! between matrices assembled on the same connectivity.

use std::sync::Arc;

use crate::mesh::SurfaceMesh;

/// Row offsets and sorted column indices of a symmetric pattern derived from
/// triangle connectivity, plus the slot of every element-matrix entry.
#[derive(Debug)]
pub struct SparsityPattern {
    n: usize,
    row_offsets: Vec<usize>,
    columns: Vec<usize>,
    diagonal: Vec<usize>,
    /// `element_slots[t][a][b]` is the value index of entry
    /// `(triangles[t][a], triangles[t][b])`.
    element_slots: Vec<[[usize; 3]; 3]>,
}

impl SparsityPattern {
    pub fn from_mesh(mesh: &SurfaceMesh) -> Self {
        let n = mesh.node_count();
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for tri in mesh.triangles() {
            for &a in tri {
                for &b in tri {
                    rows[a].push(b);
                }
            }
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut columns = Vec::new();
        row_offsets.push(0);
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            columns.extend_from_slice(row);
            row_offsets.push(columns.len());
        }
        let mut pattern = SparsityPattern {
            n,
            row_offsets,
            columns,
            diagonal: Vec::new(),
            element_slots: Vec::new(),
        };
        pattern.diagonal = (0..n)
            .map(|i| pattern.slot(i, i).expect("diagonal present"))
            .collect();
        pattern.element_slots = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut slots = [[0; 3]; 3];
                for a in 0..3 {
                    for b in 0..3 {
                        slots[a][b] = pattern.slot(tri[a], tri[b]).expect("entry present");
                    }
                }
                slots
            })
            .collect();
        pattern
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.columns.len()
    }

    /// Value index of entry `(i, j)`, if it is structurally nonzero.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_offsets[i];
        let row = &self.columns[start..self.row_offsets[i + 1]];
        row.binary_search(&j).ok().map(|k| start + k)
    }

    pub fn row(&self, i: usize) -> (&[usize], std::ops::Range<usize>) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.columns[range.clone()], range)
    }

    pub fn diagonal_slots(&self) -> &[usize] {
        &self.diagonal
    }

    pub fn element_slots(&self, t: usize) -> &[[usize; 3]; 3] {
        &self.element_slots[t]
    }
}

#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        CsrMatrix { pattern, values }
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.pattern
            .diagonal_slots()
            .iter()
            .map(|&k| self.values[k])
            .collect()
    }

    /// `y = A x`
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, range) = self.pattern.row(i);
            *yi = cols
                .iter()
                .zip(&self.values[range])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Dense copy, for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut dense = vec![vec![0.0; n]; n];
        for (i, row) in dense.iter_mut().enumerate() {
            let (cols, range) = self.pattern.row(i);
            for (&j, &v) in cols.iter().zip(&self.values[range]) {
                row[j] = v;
            }
        }
        dense
    }
}
