//! Rank-enumeration properties of component codes: information functions,
//! split information functions, minimum distance (by codeword enumeration and
//! by independent sets of generator columns) and the rank-deficiency sums
//! that enter the stability condition.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::binmat::{BinaryMatrix, MatrixError};
use crate::subsets::{binomial, masks_of_size};

/// Longest supported component code.
pub const MAX_CODE_LENGTH: usize = 32;
/// Largest dimension accepted by [`ComponentCode::min_distance_bruteforce`].
pub const MAX_BRUTEFORCE_DIMENSION: usize = 24;

/// Below this many subsets an enumeration runs on the calling thread.
const PARALLEL_THRESHOLD: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("code length {n} exceeds the supported maximum {max}", max = MAX_CODE_LENGTH)]
    TooLong { n: usize },
    #[error("component code needs 1 <= k < n, got n = {n}, k = {k}")]
    BadDimensions { n: usize, k: usize },
    #[error("generator matrix is rank deficient (rank {rank}, k = {k})")]
    RankDeficient { rank: usize, k: usize },
    #[error("brute-force distance needs k <= {max}, got k = {k}", max = MAX_BRUTEFORCE_DIMENSION)]
    DimensionTooLarge { k: usize },
    #[error("invalid column selection: {0}")]
    InvalidSelection(String),
}

/// An `(n, k)` binary linear block code with a fixed generator matrix.
///
/// The generator rows are the `k` information bits; the `n` columns are the
/// code bits (the graph edges of the node).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComponentCode {
    gen: BinaryMatrix,
}

/// `values[g]` is the sum of ranks over all `g`-column submatrices of G.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfoFunctionTable {
    pub n: usize,
    pub k: usize,
    pub values: Vec<u128>,
}

impl InfoFunctionTable {
    #[inline]
    pub fn get(&self, g: usize) -> u128 {
        self.values[g]
    }
}

/// Split information functions `ẽ_{g,h}`: rank sums over `g` columns of G
/// joined with `h` columns of `I_k`.
///
/// A table may be restricted to a subset of `g` values; missing rows read as
/// `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitInfoFunctionTable {
    pub n: usize,
    pub k: usize,
    rows: Vec<Option<Vec<u128>>>,
}

impl SplitInfoFunctionTable {
    pub fn get(&self, g: usize, h: usize) -> Option<u128> {
        self.rows.get(g)?.as_ref().map(|row| row[h])
    }

    /// Row `g` (indexed by `h = 0..=k`), if it was computed.
    pub fn row(&self, g: usize) -> Option<&[u128]> {
        self.rows.get(g)?.as_deref()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(Option::is_some)
    }
}

/// Rank deficiencies summed over `(n-2)`-column submatrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaParams {
    /// `Δ_{n-2}`, independent of the representation.
    pub delta_n2: u128,
    /// `delta_n2_kz[z]` is `Δ_{n-2,k-z}`: `n-2` generator columns joined
    /// with `k-z` identity columns. Depends on the representation.
    pub delta_n2_kz: Vec<u128>,
}

/// Adds per-size rank sums of `rank(mask)` over `masks`, split by a key.
fn accumulate<F, K>(masks: impl Iterator<Item = u64>, rank: F, key: K, table: &mut [u128])
where
    F: Fn(u64) -> usize,
    K: Fn(u64) -> usize,
{
    for mask in masks {
        table[key(mask)] += rank(mask) as u128;
    }
}

/// Rank sums over every mask in `0..2^bits`, bucketed by `key`, possibly in
/// parallel. Sums are exact, so the result does not depend on scheduling.
fn enumerate_all<F, K>(bits: usize, buckets: usize, rank: F, key: K) -> Vec<u128>
where
    F: Fn(u64) -> usize + Sync,
    K: Fn(u64) -> usize + Sync,
{
    let total = 1u64 << bits;
    if total <= PARALLEL_THRESHOLD {
        let mut table = vec![0u128; buckets];
        accumulate(0..total, &rank, &key, &mut table);
        return table;
    }
    let chunk = PARALLEL_THRESHOLD;
    (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut table = vec![0u128; buckets];
            accumulate(c * chunk..(c + 1) * chunk, &rank, &key, &mut table);
            table
        })
        .reduce(
            || vec![0u128; buckets],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

impl ComponentCode {
    /// Wraps a generator matrix; requires `1 <= k < n <= 32` and full row rank.
    pub fn new(gen: BinaryMatrix) -> Result<Self, CodeError> {
        let (k, n) = (gen.rows(), gen.cols());
        if n > MAX_CODE_LENGTH {
            return Err(CodeError::TooLong { n });
        }
        if k == 0 || k >= n {
            return Err(CodeError::BadDimensions { n, k });
        }
        let rank = gen.rank();
        if rank != k {
            return Err(CodeError::RankDeficient { rank, k });
        }
        Ok(Self { gen })
    }

    /// `(j, 1)` repetition code.
    pub fn repetition(j: usize) -> Result<Self, CodeError> {
        let row = if j >= 64 { u64::MAX } else { (1u64 << j) - 1 };
        Self::new(BinaryMatrix::from_row_words(&[row], j)?)
    }

    /// `(j, j-1)` single parity-check code in systematic form `[I | 1]`.
    pub fn single_parity_check(j: usize) -> Result<Self, CodeError> {
        if j < 2 {
            return Err(CodeError::BadDimensions { n: j, k: j.saturating_sub(1) });
        }
        let words: Vec<u64> = (0..j - 1).map(|i| (1u64 << i) | (1u64 << (j - 1))).collect();
        Self::new(BinaryMatrix::from_row_words(&words, j)?)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.gen.cols()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.gen.rows()
    }

    pub fn generator(&self) -> &BinaryMatrix {
        &self.gen
    }

    /// True for a repetition code: one row, all ones.
    pub fn is_repetition(&self) -> bool {
        self.k() == 1 && self.gen.row_word(0) == self.gen.full_column_mask()
    }

    /// True for a single parity-check code: `k = n-1` and every row has even
    /// weight (then the row space is the whole even-weight code).
    pub fn is_single_parity_check(&self) -> bool {
        self.k() + 1 == self.n() && self.gen.row_words().iter().all(|w| w.count_ones() % 2 == 0)
    }

    fn column_rank(&self, mask: u64) -> usize {
        self.gen.rank_of_columns(mask)
    }

    /// `ẽ_g` for every `g = 0..=n`.
    pub fn info_functions(&self) -> InfoFunctionTable {
        let n = self.n();
        let values = enumerate_all(n, n + 1, |m| self.column_rank(m), |m| m.count_ones() as usize);
        InfoFunctionTable { n, k: self.k(), values }
    }

    /// `ẽ_g` for a single `g`, enumerating only the `C(n, g)` subsets.
    pub fn info_function_at(&self, g: usize) -> u128 {
        masks_of_size(self.n(), g)
            .map(|m| self.column_rank(m) as u128)
            .sum()
    }

    /// Full split table, `O(2^(n+k))` rank evaluations.
    pub fn split_info_functions(&self) -> SplitInfoFunctionTable {
        let (n, k) = (self.n(), self.k());
        let aug = self.gen.augment_identity().expect("n + k fits one word for n <= 32");
        let gmask = self.gen.full_column_mask();
        let flat = enumerate_all(
            n + k,
            (n + 1) * (k + 1),
            |m| aug.rank_of_columns(m),
            |m| (m & gmask).count_ones() as usize * (k + 1) + (m >> n).count_ones() as usize,
        );
        let rows = flat.chunks(k + 1).map(|c| Some(c.to_vec())).collect();
        SplitInfoFunctionTable { n, k, rows }
    }

    /// Split table restricted to the requested generator-column counts.
    ///
    /// Cost is `Σ C(n, g) · 2^k` rank evaluations, which keeps the rows needed
    /// for the stability condition (`g ≥ n-2`) cheap for long codes.
    pub fn split_info_functions_for(&self, g_values: &[usize]) -> SplitInfoFunctionTable {
        let (n, k) = (self.n(), self.k());
        let aug = self.gen.augment_identity().expect("n + k fits one word for n <= 32");
        let mut rows: Vec<Option<Vec<u128>>> = vec![None; n + 1];
        for &g in g_values {
            if g > n || rows[g].is_some() {
                continue;
            }
            let gen_masks: Vec<u64> = masks_of_size(n, g).collect();
            let row = gen_masks
                .par_iter()
                .map(|&gm| {
                    let mut acc = vec![0u128; k + 1];
                    for im in 0..1u64 << k {
                        acc[im.count_ones() as usize] += aug.rank_of_columns(gm | (im << n)) as u128;
                    }
                    acc
                })
                .reduce(
                    || vec![0u128; k + 1],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                );
            rows[g] = Some(row);
        }
        SplitInfoFunctionTable { n, k, rows }
    }

    /// Minimum Hamming weight over the `2^k - 1` nonzero codewords.
    pub fn min_distance_bruteforce(&self) -> Result<usize, CodeError> {
        let k = self.k();
        if k > MAX_BRUTEFORCE_DIMENSION {
            return Err(CodeError::DimensionTooLarge { k });
        }
        // Gray-code walk: one row XOR per codeword.
        let mut word = 0u64;
        let mut best = usize::MAX;
        for i in 1u64..1 << k {
            word ^= self.gen.row_word(i.trailing_zeros() as usize);
            best = best.min(word.count_ones() as usize);
        }
        Ok(best)
    }

    /// Whether removing the columns in `removed` lowers the rank.
    fn is_independent_set(&self, removed: u64) -> bool {
        self.column_rank(self.gen.full_column_mask() & !removed) < self.k()
    }

    /// Smallest number of columns whose removal lowers the rank of G.
    pub fn min_independent_set_size(&self) -> usize {
        let n = self.n();
        (1..=n)
            .find(|&t| masks_of_size(n, t).any(|m| self.is_independent_set(m)))
            .expect("removing every column always drops the rank")
    }

    /// All independent sets of exactly `t` columns, as sorted index lists.
    pub fn independent_sets_of_size(&self, t: usize) -> Vec<Vec<usize>> {
        masks_of_size(self.n(), t)
            .filter(|&m| self.is_independent_set(m))
            .map(crate::subsets::mask_to_indices)
            .collect()
    }

    /// Whether some nonzero codeword has weight at most `t`.
    pub fn has_independent_set_at_most(&self, t: usize) -> bool {
        (1..=t.min(self.n())).any(|s| masks_of_size(self.n(), s).any(|m| self.is_independent_set(m)))
    }

    /// Minimum distance by whichever exact method is cheaper for this code.
    pub fn min_distance(&self) -> usize {
        if self.k() <= MAX_BRUTEFORCE_DIMENSION {
            self.min_distance_bruteforce().expect("k within bound")
        } else {
            self.min_independent_set_size()
        }
    }

    /// `k - rank` of G with the listed columns removed.
    pub fn rank_drop_of_removal(&self, removed: &[usize]) -> Result<usize, CodeError> {
        let mut mask = 0u64;
        for &c in removed {
            if c >= self.n() {
                return Err(CodeError::InvalidSelection(format!(
                    "column {c} out of range for n = {}",
                    self.n()
                )));
            }
            if mask >> c & 1 == 1 {
                return Err(CodeError::InvalidSelection(format!("column {c} listed twice")));
            }
            mask |= 1 << c;
        }
        Ok(self.k() - self.column_rank(self.gen.full_column_mask() & !mask))
    }

    /// `Δ_{n-2}` and `Δ_{n-2,k-z}` for every `z = 0..=k`.
    pub fn delta_params(&self) -> DeltaParams {
        let (n, k) = (self.n(), self.k());
        let pairs = binomial(n, 2);
        let delta_n2 = k as u128 * pairs - self.info_function_at(n - 2);
        let split = self.split_info_functions_for(&[n - 2]);
        let row = split.row(n - 2).expect("row n-2 was requested");
        let delta_n2_kz = (0..=k)
            .map(|z| k as u128 * pairs * binomial(k, z) - row[k - z])
            .collect();
        DeltaParams { delta_n2, delta_n2_kz }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(text: &str) -> ComponentCode {
        ComponentCode::new(text.parse().unwrap()).unwrap()
    }

    fn spc32() -> ComponentCode {
        code("101\n011")
    }

    fn hamming74() -> ComponentCode {
        code("1000110\n0100101\n0010011\n0001111")
    }

    /// Literal definition: build every augmented submatrix and take its rank.
    fn split_by_submatrices(c: &ComponentCode) -> Vec<Vec<u128>> {
        let (n, k) = (c.n(), c.k());
        let aug = c.generator().augment_identity().unwrap();
        let mut table = vec![vec![0u128; k + 1]; n + 1];
        for mask in 0u64..1 << (n + k) {
            let idx = crate::subsets::mask_to_indices(mask);
            let g = idx.iter().filter(|&&i| i < n).count();
            let h = idx.len() - g;
            table[g][h] += aug.select_columns(&idx).unwrap().rank() as u128;
        }
        table
    }

    #[test]
    fn construction_checks() {
        assert!(matches!(
            ComponentCode::new("110\n110".parse().unwrap()),
            Err(CodeError::RankDeficient { rank: 1, k: 2 })
        ));
        assert!(matches!(
            ComponentCode::new("10\n01".parse().unwrap()),
            Err(CodeError::BadDimensions { n: 2, k: 2 })
        ));
        let wide: BinaryMatrix = "1".repeat(33).parse().unwrap();
        assert!(matches!(ComponentCode::new(wide), Err(CodeError::TooLong { n: 33 })));
        assert_eq!(ComponentCode::repetition(4).unwrap().generator().to_text(), "1111");
        assert_eq!(ComponentCode::single_parity_check(3).unwrap().generator().to_text(), "101\n011");
    }

    #[test]
    fn info_function_examples() {
        let c = spc32();
        let e = c.info_functions();
        assert_eq!(e.get(0), 0);
        assert_eq!(e.get(1), 3);
        assert_eq!(e.get(3), 2);
        let h = hamming74().info_functions();
        assert_eq!(h.get(7), 4);
        assert_eq!(h.values.len(), 8);
    }

    #[test]
    fn info_function_single_entry_matches_table() {
        let c = hamming74();
        let e = c.info_functions();
        for g in 0..=7 {
            assert_eq!(c.info_function_at(g), e.get(g));
        }
    }

    #[test]
    fn info_function_n_minus_one_is_n_k() {
        // d_min >= 2: removing any single column keeps full rank.
        for c in [spc32(), hamming74(), ComponentCode::repetition(5).unwrap()] {
            let e = c.info_functions();
            assert_eq!(e.get(c.n() - 1), (c.n() * c.k()) as u128);
        }
    }

    #[test]
    fn split_info_function_examples() {
        let rep2 = code("11");
        let s = rep2.split_info_functions();
        assert_eq!(s.get(1, 0), Some(2));
        assert_eq!(s.get(0, 1), Some(1));
        assert_eq!(s.get(2, 1), Some(1));
        assert_eq!(s.get(0, 0), Some(0));
        let s = spc32().split_info_functions();
        assert_eq!(s.get(0, 2), Some(2));
        assert!(s.is_complete());
    }

    #[test]
    fn split_table_matches_submatrix_definition() {
        for c in [spc32(), hamming74(), code("11"), code("1101\n0111")] {
            let s = c.split_info_functions();
            let oracle = split_by_submatrices(&c);
            for (g, want) in oracle.iter().enumerate() {
                assert_eq!(s.row(g).unwrap(), &want[..]);
            }
        }
    }

    #[test]
    fn restricted_split_rows_match_full_table() {
        let c = hamming74();
        let full = c.split_info_functions();
        let part = c.split_info_functions_for(&[5, 6, 7]);
        assert!(!part.is_complete());
        assert_eq!(part.get(4, 0), None);
        for g in 5..=7 {
            assert_eq!(part.row(g), full.row(g));
        }
    }

    #[test]
    fn split_table_zero_h_column_is_plain_table() {
        for c in [spc32(), hamming74(), code("11101\n01011")] {
            let s = c.split_info_functions();
            let e = c.info_functions();
            for g in 0..=c.n() {
                assert_eq!(s.get(g, 0), Some(e.get(g)));
            }
        }
    }

    #[test]
    fn min_distance_examples() {
        for j in 2..=7 {
            let rep = ComponentCode::repetition(j).unwrap();
            assert_eq!(rep.min_distance_bruteforce().unwrap(), j);
            assert_eq!(rep.min_independent_set_size(), j);
        }
        assert_eq!(spc32().min_distance_bruteforce().unwrap(), 2);
        assert_eq!(spc32().min_independent_set_size(), 2);
        assert_eq!(hamming74().min_distance_bruteforce().unwrap(), 3);
        assert_eq!(hamming74().min_independent_set_size(), 3);
    }

    #[test]
    fn bruteforce_rejects_large_dimension() {
        let c = ComponentCode::single_parity_check(26).unwrap();
        assert_eq!(c.min_distance_bruteforce(), Err(CodeError::DimensionTooLarge { k: 25 }));
        assert_eq!(c.min_distance(), 2);
    }

    #[test]
    fn rank_drop_examples() {
        let c = spc32();
        assert_eq!(c.rank_drop_of_removal(&[]).unwrap(), 0);
        assert_eq!(c.rank_drop_of_removal(&[0]).unwrap(), 0);
        assert_eq!(c.rank_drop_of_removal(&[0, 2]).unwrap(), 1);
        assert!(matches!(c.rank_drop_of_removal(&[3]), Err(CodeError::InvalidSelection(_))));
        assert!(matches!(c.rank_drop_of_removal(&[1, 1]), Err(CodeError::InvalidSelection(_))));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(hamming74().delta_params().delta_n2, 0);
        let d = spc32().delta_params();
        assert_eq!(d.delta_n2, 3);
        // z = 0, 1, 2  <->  k - z = 2, 1, 0 identity columns
        assert_eq!(d.delta_n2_kz, vec![0, 2, 3]);
        let rep2 = code("11").delta_params();
        assert_eq!(rep2.delta_n2, 1);
        assert_eq!(rep2.delta_n2_kz, vec![0, 1]);
    }

    #[test]
    fn delta_from_full_tables() {
        for c in [spc32(), hamming74(), code("11101\n01011"), code("1100\n0011")] {
            let (n, k) = (c.n(), c.k());
            let d = c.delta_params();
            let e = c.info_functions();
            let s = c.split_info_functions();
            let pairs = binomial(n, 2);
            assert_eq!(d.delta_n2, k as u128 * pairs - e.get(n - 2));
            for z in 0..=k {
                assert_eq!(
                    d.delta_n2_kz[z],
                    k as u128 * pairs * binomial(k, z) - s.get(n - 2, k - z).unwrap()
                );
            }
            assert_eq!(d.delta_n2_kz[k], d.delta_n2);
        }
    }

    #[test]
    fn spc_delta_identity() {
        for j in 2..=9 {
            let c = ComponentCode::single_parity_check(j).unwrap();
            let d = c.delta_params();
            assert_eq!(2 * d.delta_n2, (j as u128) * (j as u128 - 1));
            assert_eq!(d.delta_n2_kz[0], 0);
        }
    }

    #[test]
    fn classification() {
        assert!(code("111").is_repetition());
        assert!(!code("110").is_repetition());
        assert!(spc32().is_single_parity_check());
        assert!(code("110\n011").is_single_parity_check());
        assert!(!code("100\n011").is_single_parity_check());
        assert!(!hamming74().is_single_parity_check());
        assert!(ComponentCode::single_parity_check(2).unwrap().is_repetition());
    }
}
