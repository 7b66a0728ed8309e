//! Bit-packed vectors and matrices over F2, with rank / kernel / solve
//! via deterministic Gaussian elimination.
//!
//! Bit order: bit `j` (0-based) is the coefficient of the standard basis
//! vector `e_j`, stored least-significant-bit-first within each 64-bit word.
//! Serialization to hex uses `ceil(k/8)` bytes, LSB-first within each byte.

use crate::error::Error;

const WORD_BITS: usize = 64;

/// A length-`k` vector over F2.
///
/// All bit positions `>= k` are kept zero in the packed storage.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitRow {
    dim: usize,
    words: Vec<u64>,
}

fn words_for(dim: usize) -> usize {
    dim.div_ceil(WORD_BITS)
}

impl BitRow {
    pub fn zeros(dim: usize) -> Self {
        BitRow {
            dim,
            words: vec![0; words_for(dim)],
        }
    }

    /// Row whose bit `j` equals bit `j` of `value`. Requires `dim <= 64`.
    pub fn from_low_bits(dim: usize, value: u64) -> Self {
        assert!(dim <= 64, "from_low_bits supports dim <= 64");
        let mut row = BitRow::zeros(dim);
        if dim > 0 {
            let mask = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 };
            row.words[0] = value & mask;
        }
        row
    }

    pub fn from_indices(dim: usize, ones: &[usize]) -> Self {
        let mut row = BitRow::zeros(dim);
        for &j in ones {
            row.set(j, true);
        }
        row
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.dim, "bit index {} out of range {}", j, self.dim);
        (self.words[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, bit: bool) {
        assert!(j < self.dim, "bit index {} out of range {}", j, self.dim);
        let mask = 1u64 << (j % WORD_BITS);
        if bit {
            self.words[j / WORD_BITS] |= mask;
        } else {
            self.words[j / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitRow) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                out.push(wi * WORD_BITS + j);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Hex encoding: `ceil(dim/8)` bytes, bit `j` at byte `j/8`, bit `j%8`
    /// (LSB-first), bytes emitted in order, two lowercase digits each.
    pub fn to_hex(&self) -> String {
        let n_bytes = self.dim.div_ceil(8);
        let mut s = String::with_capacity(n_bytes * 2);
        for b in 0..n_bytes {
            let word = self.words[b * 8 / WORD_BITS];
            let byte = (word >> ((b * 8) % WORD_BITS)) as u8;
            s.push_str(&format!("{:02x}", byte));
        }
        s
    }

    pub fn from_hex(dim: usize, hex: &str) -> Result<Self, Error> {
        let n_bytes = dim.div_ceil(8);
        if hex.len() != n_bytes * 2 {
            return Err(Error::Parse(format!(
                "row hex length {} does not match dimension {} (expected {} digits)",
                hex.len(),
                dim,
                n_bytes * 2
            )));
        }
        let mut row = BitRow::zeros(dim);
        for b in 0..n_bytes {
            let byte = u8::from_str_radix(&hex[b * 2..b * 2 + 2], 16)
                .map_err(|e| Error::Parse(format!("bad hex byte in row: {e}")))?;
            for j in 0..8 {
                let pos = b * 8 + j;
                let bit = (byte >> j) & 1 == 1;
                if bit {
                    if pos >= dim {
                        return Err(Error::Parse(format!(
                            "nonzero padding bit at position {} (dimension {})",
                            pos, dim
                        )));
                    }
                    row.set(pos, true);
                }
            }
        }
        Ok(row)
    }
}

/// An ordered list of `BitRow`s of identical dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    dim: usize,
    rows: Vec<BitRow>,
}

impl BitMatrix {
    pub fn new(dim: usize, rows: Vec<BitRow>) -> Result<Self, Error> {
        for (i, r) in rows.iter().enumerate() {
            if r.dim() != dim {
                return Err(Error::Structure(format!(
                    "row {} has dimension {}, expected {}",
                    i,
                    r.dim(),
                    dim
                )));
            }
        }
        Ok(BitMatrix { dim, rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &BitRow {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    /// XOR of the rows selected by `indices` (an empty selection is zero).
    pub fn xor_rows<I: IntoIterator<Item = usize>>(&self, indices: I) -> BitRow {
        let mut acc = BitRow::zeros(self.dim);
        for i in indices {
            acc.xor_assign(&self.rows[i]);
        }
        acc
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut rows = vec![BitRow::zeros(self.rows.len()); self.dim];
        for (i, r) in self.rows.iter().enumerate() {
            for j in r.ones() {
                rows[j].set(i, true);
            }
        }
        BitMatrix {
            dim: self.rows.len(),
            rows,
        }
    }

    /// Dimension of the row span over F2.
    ///
    /// Elimination processes columns ascending and always picks the
    /// lowest-index unused row as pivot, so results are deterministic.
    pub fn rank(&self) -> usize {
        let mut work: Vec<BitRow> = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.dim {
            let Some(pivot) = (rank..work.len()).find(|&i| work[i].get(col)) else {
                continue;
            };
            work.swap(rank, pivot);
            let pivot_row = work[rank].clone();
            for (i, row) in work.iter_mut().enumerate() {
                if i != rank && row.get(col) {
                    row.xor_assign(&pivot_row);
                }
            }
            rank += 1;
            if rank == work.len() {
                break;
            }
        }
        rank
    }

    /// Basis of the left kernel `{ y in F2^n : y^T * M = 0 }`.
    ///
    /// Every returned vector has dimension `n`; selecting its set bits as
    /// row indices and XOR-ing those rows gives the zero row. The basis has
    /// exactly `n - rank` elements.
    pub fn kernel_basis(&self) -> Vec<BitRow> {
        let n = self.rows.len();
        // Augment each row with an indicator of which original rows it combines.
        let mut work: Vec<BitRow> = self.rows.clone();
        let mut tags: Vec<BitRow> = (0..n).map(|i| BitRow::from_indices(n, &[i])).collect();
        let mut rank = 0;
        for col in 0..self.dim {
            let Some(pivot) = (rank..n).find(|&i| work[i].get(col)) else {
                continue;
            };
            work.swap(rank, pivot);
            tags.swap(rank, pivot);
            let pivot_row = work[rank].clone();
            let pivot_tag = tags[rank].clone();
            for i in 0..n {
                if i != rank && work[i].get(col) {
                    work[i].xor_assign(&pivot_row);
                    tags[i].xor_assign(&pivot_tag);
                }
            }
            rank += 1;
            if rank == n {
                break;
            }
        }
        (rank..n).map(|i| tags[i].clone()).collect()
    }

    /// If `x` lies in the row span, returns an indicator `y in F2^n` with
    /// `XOR of selected rows = x`, supported on pivot rows only (so
    /// `weight(y) <= rank`). Otherwise `None`.
    pub fn solve_combination(&self, x: &BitRow) -> Option<BitRow> {
        assert_eq!(x.dim(), self.dim, "target dimension mismatch");
        let n = self.rows.len();
        // Reduced echelon basis built from pivot rows, tagged by original index.
        let mut basis: Vec<(usize, BitRow, BitRow)> = Vec::new(); // (pivot col, row, tag)
        let mut rank = 0;
        'rows: for i in 0..n {
            let mut row = self.rows[i].clone();
            let mut tag = BitRow::from_indices(n, &[i]);
            for (col, brow, btag) in &basis {
                if row.get(*col) {
                    row.xor_assign(brow);
                    tag.xor_assign(btag);
                }
            }
            let Some(col) = row.ones().first().copied() else {
                continue 'rows;
            };
            // Back-substitute into existing basis rows to keep them reduced.
            for (_, brow, btag) in basis.iter_mut() {
                if brow.get(col) {
                    brow.xor_assign(&row);
                    btag.xor_assign(&tag);
                }
            }
            basis.push((col, row, tag));
            rank += 1;
            if rank == self.dim {
                break;
            }
        }
        let mut residual = x.clone();
        let mut selector = BitRow::zeros(n);
        for (col, brow, btag) in &basis {
            if residual.get(*col) {
                residual.xor_assign(brow);
                selector.xor_assign(btag);
            }
        }
        if residual.is_zero() {
            Some(selector)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn matrix(dim: usize, rows: &[&[usize]]) -> BitMatrix {
        BitMatrix::new(
            dim,
            rows.iter().map(|r| BitRow::from_indices(dim, r)).collect(),
        )
        .unwrap()
    }

    /// Brute-force span of the rows (all 2^n subset XORs), as a sorted set.
    fn span_by_enumeration(m: &BitMatrix) -> Vec<BitRow> {
        assert!(m.n() <= 20);
        let mut out: Vec<BitRow> = (0u64..1 << m.n())
            .map(|mask| m.xor_rows((0..m.n()).filter(|&i| (mask >> i) & 1 == 1)))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn rank_zero_matrix() {
        let m = matrix(4, &[&[], &[], &[]]);
        assert_eq!(m.rank(), 0);
    }

    #[test]
    fn rank_identity() {
        let m = matrix(4, &[&[0], &[1], &[2], &[3]]);
        assert_eq!(m.rank(), 4);
    }

    #[test]
    fn rank_dependent_rows() {
        // 1100, 0110, 1010: third = first xor second.
        let m = matrix(4, &[&[0, 1], &[1, 2], &[0, 2]]);
        let span = span_by_enumeration(&m);
        assert_eq!(span.len(), 4); // 2^2 distinct values
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn kernel_full_rank_is_empty() {
        let m = matrix(3, &[&[0], &[1], &[2]]);
        assert!(m.kernel_basis().is_empty());
    }

    #[test]
    fn kernel_duplicate_rows() {
        let m = matrix(2, &[&[0], &[0]]);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], BitRow::from_indices(2, &[0, 1]));
    }

    #[test]
    fn kernel_three_rows() {
        // rows 10, 01, 11 over k=2: kernel {111}. Brute force: of the 8
        // indicator vectors only 000 and 111 annihilate the rows.
        let m = matrix(2, &[&[0], &[1], &[0, 1]]);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], BitRow::from_indices(3, &[0, 1, 2]));
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10);
            let k = rng.gen_range(1..=10);
            let rows = (0..n)
                .map(|_| {
                    let mut r = BitRow::zeros(k);
                    for j in 0..k {
                        r.set(j, rng.gen());
                    }
                    r
                })
                .collect();
            let m = BitMatrix::new(k, rows).unwrap();
            let basis = m.kernel_basis();
            assert_eq!(m.rank() + basis.len(), n);
            for y in &basis {
                assert!(m.xor_rows(y.ones()).is_zero());
            }
            // Basis vectors are independent.
            let bm = BitMatrix::new(n, basis.clone()).unwrap();
            assert_eq!(bm.rank(), basis.len());
        }
    }

    #[test]
    fn solve_zero_target() {
        let m = matrix(3, &[&[0], &[1]]);
        let y = m.solve_combination(&BitRow::zeros(3)).unwrap();
        assert!(y.is_zero());
    }

    #[test]
    fn solve_identity_basis_vector() {
        let m = matrix(4, &[&[0], &[1], &[2], &[3]]);
        let y = m.solve_combination(&BitRow::from_indices(4, &[2])).unwrap();
        assert_eq!(y, BitRow::from_indices(4, &[2]));
    }

    #[test]
    fn solve_three_rows() {
        // rows 110, 011, 101; x = 101. Brute force over all 8 subsets says
        // {row0,row1} and {row2} both work; contract only requires validity.
        let m = matrix(3, &[&[0, 1], &[1, 2], &[0, 2]]);
        let x = BitRow::from_indices(3, &[0, 2]);
        let y = m.solve_combination(&x).unwrap();
        assert_eq!(m.xor_rows(y.ones()), x);
        assert!(y.weight() <= m.rank());
    }

    #[test]
    fn solve_out_of_span() {
        let m = matrix(3, &[&[0], &[1]]);
        assert!(m.solve_combination(&BitRow::from_indices(3, &[2])).is_none());
    }

    #[test]
    fn solve_random_trials() {
        // Spec-level invariant: over >= 1000 random trials with n,k <= 64,
        // solving a target in the span reproduces it exactly.
        let mut rng = StdRng::seed_from_u64(42);
        for trial in 0..1000 {
            let n = rng.gen_range(1..=64);
            let k = rng.gen_range(1..=64);
            let rows: Vec<BitRow> = (0..n)
                .map(|_| {
                    let mut r = BitRow::zeros(k);
                    for j in 0..k {
                        r.set(j, rng.gen());
                    }
                    r
                })
                .collect();
            let m = BitMatrix::new(k, rows).unwrap();
            // Random element of the row span.
            let x = m.xor_rows((0..n).filter(|_| rng.gen::<bool>()));
            let y = m
                .solve_combination(&x)
                .unwrap_or_else(|| panic!("trial {trial}: span member not solved"));
            assert_eq!(m.xor_rows(y.ones()), x);
            assert!(y.weight() <= m.rank());
        }
    }

    #[test]
    fn transpose_involution() {
        let m = matrix(3, &[&[0, 2], &[1], &[], &[0, 1, 2]]);
        assert_eq!(m.transpose().transpose(), m);
        assert_eq!(m.transpose().n(), 3);
        assert_eq!(m.transpose().dim(), 4);
    }

    #[test]
    fn hex_round_trip_examples() {
        let r = BitRow::from_indices(3, &[0, 2]);
        assert_eq!(r.to_hex(), "05");
        assert_eq!(BitRow::from_hex(3, "05").unwrap(), r);
        let r = BitRow::from_low_bits(12, 0x9a5);
        assert_eq!(r.to_hex(), "a509");
        assert_eq!(BitRow::from_hex(12, "a509").unwrap(), r);
    }

    #[test]
    fn hex_rejects_padding_and_length() {
        assert!(BitRow::from_hex(3, "08").is_err()); // bit 3 set, dim 3
        assert!(BitRow::from_hex(3, "0a0").is_err()); // wrong length
        assert!(BitRow::from_hex(3, "zz").is_err());
    }

    proptest::proptest! {
        #[test]
        fn prop_rank_plus_kernel_is_n(
            n in 1usize..12, k in 1usize..12, seed in 0u64..1000
        ) {
            let mut rng = StdRng::seed_from_u64(seed);
            let rows = (0..n).map(|_| {
                let mut r = BitRow::zeros(k);
                for j in 0..k { r.set(j, rng.gen()); }
                r
            }).collect();
            let m = BitMatrix::new(k, rows).unwrap();
            proptest::prop_assert_eq!(m.rank() + m.kernel_basis().len(), n);
        }

        #[test]
        fn prop_hex_round_trip(dim in 1usize..130, seed in 0u64..1000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let mut r = BitRow::zeros(dim);
            for j in 0..dim { r.set(j, rng.gen()); }
            let hex = r.to_hex();
            proptest::prop_assert_eq!(BitRow::from_hex(dim, &hex).unwrap(), r);
        }
    }
}
