//! Monolithic systems built from per-field blocks.
//!
//! A [`BlockStructure`] fixes the sparsity pattern of the whole system once:
//! the registered block patterns, an explicit diagonal for every row (so
//! essential rows can carry a unit diagonal), and optionally one bordering
//! row/column enforcing a weighted mean on one field. Assembling values then
//! only scatters block values through precomputed index maps.

use std::collections::BTreeMap;

use super::SparseMatrix;
use crate::space::EssentialBc;
use crate::{Error, Result};

#[derive(Debug, Clone)]
struct BlockEntry {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// Position of each block entry in the monolithic value array.
    slots: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Multiplier {
    weights: Vec<f64>,
    /// Slots of `(field row, multiplier column)` and `(multiplier row, field column)`.
    col_slots: Vec<usize>,
    row_slots: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BlockStructure {
    offsets: Vec<usize>,
    pattern: SparseMatrix,
    blocks: BTreeMap<(usize, usize), BlockEntry>,
    multiplier: Option<Multiplier>,
}

impl BlockStructure {
    /// `sizes[i]` is the dimension of field `i`. Each `(i, j, m)` registers the
    /// pattern of `m` as the coupling from field `j` (columns) into field `i`
    /// (rows). `multiplier = (i, w)` appends one row/column with `w` placed in
    /// the rows and columns of field `i`.
    pub fn new(
        sizes: &[usize],
        blocks: &[(usize, usize, &SparseMatrix)],
        multiplier: Option<(usize, &[f64])>,
    ) -> Result<Self> {
        let mut offsets = vec![0];
        for s in sizes {
            offsets.push(offsets.last().unwrap() + s);
        }
        let nf = *offsets.last().unwrap();
        let n = nf + usize::from(multiplier.is_some());

        let mut seen = BTreeMap::new();
        for &(i, j, m) in blocks {
            if i >= sizes.len() || j >= sizes.len() {
                return Err(Error::InvalidArgument(format!("block ({i}, {j}) refers to a missing field")));
            }
            if m.nrows() != sizes[i] || m.ncols() != sizes[j] {
                return Err(Error::DimensionMismatch(format!(
                    "block ({i}, {j}) is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    sizes[i],
                    sizes[j]
                )));
            }
            if seen.insert((i, j), m).is_some() {
                return Err(Error::InvalidArgument(format!("block ({i}, {j}) registered twice")));
            }
        }
        if let Some((b, w)) = multiplier {
            if b >= sizes.len() || w.len() != sizes[b] {
                return Err(Error::DimensionMismatch("multiplier weights do not match the field size".into()));
            }
        }

        let mut rows: Vec<Vec<usize>> = (0..n).map(|r| vec![r]).collect();
        for (&(i, j), m) in &seen {
            for r in 0..m.nrows() {
                rows[offsets[i] + r].extend(m.row(r).0.iter().map(|c| offsets[j] + c));
            }
        }
        if let Some((b, _)) = multiplier {
            for r in offsets[b]..offsets[b + 1] {
                rows[r].push(nf);
                rows[nf].push(r);
            }
        }
        let pattern = SparseMatrix::from_rows(n, n, rows);

        let blocks = seen
            .iter()
            .map(|(&(i, j), m)| {
                let mut slots = Vec::with_capacity(m.nnz());
                for r in 0..m.nrows() {
                    for &c in m.row(r).0 {
                        slots.push(pattern.find(offsets[i] + r, offsets[j] + c).expect("entry in pattern"));
                    }
                }
                let entry = BlockEntry { row_ptr: m.row_ptr().to_vec(), col_idx: m.col_idx().to_vec(), slots };
                ((i, j), entry)
            })
            .collect();

        let multiplier = multiplier.map(|(b, w)| {
            let range = offsets[b]..offsets[b + 1];
            Multiplier {
                weights: w.to_vec(),
                col_slots: range.clone().map(|r| pattern.find(r, nf).unwrap()).collect(),
                row_slots: range.map(|c| pattern.find(nf, c).unwrap()).collect(),
            }
        });

        Ok(Self { offsets, pattern, blocks, multiplier })
    }

    pub fn dim(&self) -> usize {
        self.pattern.nrows()
    }

    pub fn num_fields(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn offset(&self, field: usize) -> usize {
        self.offsets[field]
    }

    pub fn field_range(&self, field: usize) -> std::ops::Range<usize> {
        self.offsets[field]..self.offsets[field + 1]
    }

    /// Index of the multiplier unknown, if any.
    pub fn multiplier_index(&self) -> Option<usize> {
        self.multiplier.as_ref().map(|_| self.offsets[self.num_fields()])
    }

    /// Zero-valued monolithic matrix.
    pub fn pattern(&self) -> &SparseMatrix {
        &self.pattern
    }

    /// Sum `scale * m` into block `(i, j)` for every part. Each `m` must have
    /// exactly the registered pattern of its block. Multiplier entries are
    /// filled from the stored weights.
    pub fn assemble(&self, parts: &[(usize, usize, &SparseMatrix, f64)]) -> Result<SparseMatrix> {
        let mut a = self.pattern.zeroed();
        for &(i, j, m, s) in parts {
            self.add_block(&mut a, i, j, m, s)?;
        }
        if let Some(mult) = &self.multiplier {
            let vals = a.values_mut();
            for (k, &w) in mult.weights.iter().enumerate() {
                vals[mult.col_slots[k]] = w;
                vals[mult.row_slots[k]] = w;
            }
        }
        Ok(a)
    }

    /// `a += scale * m` in block `(i, j)` of a matrix built from this structure.
    pub fn add_block(&self, a: &mut SparseMatrix, i: usize, j: usize, m: &SparseMatrix, scale: f64) -> Result<()> {
        let entry = self
            .blocks
            .get(&(i, j))
            .ok_or_else(|| Error::InvalidArgument(format!("block ({i}, {j}) was not registered")))?;
        if m.row_ptr() != entry.row_ptr || m.col_idx() != entry.col_idx {
            return Err(Error::DimensionMismatch(format!("block ({i}, {j}) pattern differs from the registered one")));
        }
        if !a.same_pattern(&self.pattern) {
            return Err(Error::DimensionMismatch("matrix was not built from this block structure".into()));
        }
        let vals = a.values_mut();
        for (&slot, &v) in entry.slots.iter().zip(m.values()) {
            vals[slot] += scale * v;
        }
        Ok(())
    }

    /// Concatenate per-field vectors (multiplier slot set to zero).
    pub fn join(&self, parts: &[&[f64]]) -> Result<Vec<f64>> {
        if parts.len() != self.num_fields() {
            return Err(Error::DimensionMismatch("wrong number of field vectors".into()));
        }
        let mut out = Vec::with_capacity(self.dim());
        for (f, p) in parts.iter().enumerate() {
            if p.len() != self.offsets[f + 1] - self.offsets[f] {
                return Err(Error::DimensionMismatch(format!("field {f} vector has wrong length")));
            }
            out.extend_from_slice(p);
        }
        out.resize(self.dim(), 0.0);
        Ok(out)
    }

    pub fn field<'a>(&self, x: &'a [f64], field: usize) -> &'a [f64] {
        &x[self.field_range(field)]
    }
}

/// Symmetric elimination of homogeneous essential conditions: constrained
/// rows and columns are zeroed, the diagonal set to one and the right-hand
/// side entry to zero. Every constrained dof must have a stored diagonal.
/// Applying it twice changes nothing.
pub fn apply_essential(a: &mut SparseMatrix, rhs: Option<&mut [f64]>, bc: &EssentialBc) -> Result<()> {
    let n = a.nrows();
    let mut constrained = vec![false; n];
    for &d in bc.dofs() {
        if d >= n || a.find(d, d).is_none() {
            return Err(Error::DimensionMismatch(format!("constrained dof {d} has no diagonal entry")));
        }
        constrained[d] = true;
    }
    for i in 0..n {
        let (start, end) = (a.row_ptr()[i], a.row_ptr()[i + 1]);
        for k in start..end {
            let j = a.col_idx()[k];
            if constrained[i] || constrained[j] {
                a.values_mut()[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
    if let Some(b) = rhs {
        bc.apply_to(b);
    }
    Ok(())
}
