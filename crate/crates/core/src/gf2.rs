//! Dense linear algebra over GF(2) with row provenance.
//!
//! Every row of a [`Gf2System`] carries the set of original row indices that
//! were XOR-ed together to produce it. Elimination keeps that set up to date,
//! so an inconsistent row (all-zero coefficients, rhs 1) directly names the
//! input equations that contradict each other.

use std::fmt;

/// Packed bit vector. Bit `i` lives in word `i / 64` at position `i % 64`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                row.set(i, true);
            }
        }
        row
    }

    /// Row of length `len` with the listed indices toggled (repeats cancel).
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut row = Self::zeros(len);
        for i in indices {
            row.flip(i);
        }
        row
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        assert_eq!(self.len, other.len, "bit row length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the bitwise AND with `other`.
    pub fn dot(&self, other: &BitRow) -> bool {
        assert_eq!(self.len, other.len, "bit row length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Index of the lowest set bit at or after `from`.
    pub fn first_one_from(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut w = from / 64;
        let mut word = self.words[w] & (!0u64 << (from % 64));
        loop {
            if word != 0 {
                let i = w * 64 + word.trailing_zeros() as usize;
                return (i < self.len).then_some(i);
            }
            w += 1;
            if w >= self.words.len() {
                return None;
            }
            word = self.words[w];
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + bit)
            })
        })
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: Vec<BitRow>,
    cols: usize,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitRow::zeros(cols); rows],
            cols,
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitRow>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length != cols");
        Self { rows, cols }
    }

    /// Parses rows written as strings of `0`/`1`.
    pub fn from_strs(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| BitRow::from_bits(&r.bytes().map(|b| b == b'1').collect::<Vec<_>>()))
            .collect();
        Self::from_rows(cols, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &BitRow {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value)
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, x: &BitRow) -> BitRow {
        let bits: Vec<bool> = self.rows.iter().map(|r| r.dot(x)).collect();
        BitRow::from_bits(&bits)
    }
}

/// `matrix · x = rhs`, with per-row provenance over the original row indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2System {
    pub matrix: Gf2Matrix,
    pub rhs: BitRow,
    pub provenance: Vec<BitRow>,
}

impl Gf2System {
    /// Fresh system: each row's provenance is the singleton of its own index.
    pub fn new(matrix: Gf2Matrix, rhs: BitRow) -> Self {
        let m = matrix.n_rows();
        assert_eq!(rhs.len(), m, "rhs length must equal row count");
        let provenance = (0..m).map(|r| BitRow::from_indices(m, [r])).collect();
        Self {
            matrix,
            rhs,
            provenance,
        }
    }

    /// Builds a system from rows given as column index lists (repeats cancel).
    pub fn from_sparse(cols: usize, rows: &[(Vec<usize>, bool)]) -> Self {
        let matrix = Gf2Matrix::from_rows(
            cols,
            rows.iter()
                .map(|(idx, _)| BitRow::from_indices(cols, idx.iter().copied()))
                .collect(),
        );
        let rhs = BitRow::from_bits(&rows.iter().map(|(_, b)| *b).collect::<Vec<_>>());
        Self::new(matrix, rhs)
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    /// Number of original rows the provenance sets range over.
    pub fn n_original_rows(&self) -> usize {
        self.provenance.first().map_or(0, |p| p.len())
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (s, d) = (src, dst);
        let src_row = self.matrix.rows[s].clone();
        self.matrix.rows[d].xor_assign(&src_row);
        if self.rhs.get(s) {
            self.rhs.flip(d);
        }
        let src_prov = self.provenance[s].clone();
        self.provenance[d].xor_assign(&src_prov);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.matrix.rows.swap(a, b);
        self.provenance.swap(a, b);
        let (ra, rb) = (self.rhs.get(a), self.rhs.get(b));
        self.rhs.set(a, rb);
        self.rhs.set(b, ra);
    }
}

/// Reduced row echelon form. Rows `0..rank` carry the pivots in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedSystem {
    pub system: Gf2System,
    pub pivots: Vec<usize>,
}

impl ReducedSystem {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.system.n_cols()];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.system.n_cols())
            .filter(|&c| !is_pivot[c])
            .collect()
    }

    /// First row past the rank with rhs 1, i.e. the `0 = 1` contradiction.
    pub fn conflict_row(&self) -> Option<usize> {
        (self.rank()..self.system.n_rows()).find(|&r| self.system.rhs.get(r))
    }
}

/// Gauss-Jordan elimination. Pivot columns are taken left to right; the
/// pivot row is the lowest-index remaining row with a one in that column.
pub fn row_reduce(system: &Gf2System) -> ReducedSystem {
    let mut sys = system.clone();
    let (m, n) = (sys.n_rows(), sys.n_cols());
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| sys.matrix.rows[r].get(col)) else {
            continue;
        };
        sys.swap_rows(rank, p);
        for r in 0..m {
            if r != rank && sys.matrix.rows[r].get(col) {
                sys.xor_row_into(rank, r);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    ReducedSystem {
        system: sys,
        pivots,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gf2Outcome {
    Solution {
        assignment: BitRow,
        free_columns: Vec<usize>,
    },
    /// Original rows whose XOR is `0 = 1`.
    Inconsistent { provenance: Vec<usize> },
}

impl Gf2Outcome {
    pub fn is_solution(&self) -> bool {
        matches!(self, Gf2Outcome::Solution { .. })
    }
}

/// Solves the system; free columns are assigned 0.
pub fn solve(system: &Gf2System) -> Gf2Outcome {
    solve_reduced(&row_reduce(system))
}

pub fn solve_reduced(reduced: &ReducedSystem) -> Gf2Outcome {
    if let Some(r) = reduced.conflict_row() {
        return Gf2Outcome::Inconsistent {
            provenance: reduced.system.provenance[r].ones().collect(),
        };
    }
    let mut assignment = BitRow::zeros(reduced.system.n_cols());
    for (r, &col) in reduced.pivots.iter().enumerate() {
        if reduced.system.rhs.get(r) {
            assignment.set(col, true);
        }
    }
    Gf2Outcome::Solution {
        assignment,
        free_columns: reduced.free_columns(),
    }
}

/// Checks that the cited original rows XOR to the zero vector with rhs 1.
pub fn certifies_inconsistency(system: &Gf2System, rows: &[usize]) -> bool {
    let mut acc = BitRow::zeros(system.n_cols());
    let mut rhs = false;
    for &r in rows {
        if r >= system.n_rows() {
            return false;
        }
        acc.xor_assign(system.matrix.row(r));
        rhs ^= system.rhs.get(r);
    }
    acc.is_zero() && rhs
}
