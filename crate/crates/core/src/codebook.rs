//! Spatial-modulation codebook: which `N_RF` of the `N_M` antenna groups are
//! switched on for each spatial symbol.

use std::fmt;

use crate::error::{Error, Result};
use crate::params::SystemGeometry;

/// Largest codebook [`build_codebook`] will materialize.
pub const MAX_CODEBOOK_SIZE: u64 = 1 << 20;

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) is divisible by (i + 1); split the divisor to avoid
        // overflowing the intermediate product.
        let d = i as u128 + 1;
        let g = gcd(c, d);
        c = (c / g).checked_mul((n - i) as u128 / (d / g))?;
    }
    Some(c)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `M = 2^floor(log2 C(n_m, n_rf))`, in exact integer arithmetic.
pub fn num_spatial_schemes(n_m: usize, n_rf: usize) -> Result<u64> {
    if n_rf == 0 {
        return Err(Error::infeasible("n_rf >= 1"));
    }
    if n_rf >= n_m {
        return Err(Error::infeasible("n_rf < n_m"));
    }
    let c = binomial(n_m as u64, n_rf as u64)
        .ok_or_else(|| Error::infeasible("C(n_m, n_rf) fits in 128 bits"))?;
    let m = 1u128 << (127 - c.leading_zeros());
    u64::try_from(m).map_err(|_| Error::infeasible("spatial scheme count fits in 64 bits"))
}

/// The first `M` group subsets in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialCodebook {
    patterns: Vec<Vec<usize>>,
    n_m: usize,
    n_rf: usize,
    n_k: usize,
}

impl SpatialCodebook {
    pub fn m_count(&self) -> usize {
        self.patterns.len()
    }

    /// Spatial bits per channel use, `log2 M`.
    pub fn spatial_bits(&self) -> u32 {
        self.patterns.len().trailing_zeros()
    }

    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }

    pub fn pattern(&self, m: usize) -> Result<&[usize]> {
        self.patterns
            .get(m)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: m,
                len: self.patterns.len(),
            })
    }

    pub fn n_m(&self) -> usize {
        self.n_m
    }

    pub fn n_rf(&self) -> usize {
        self.n_rf
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    pub fn n_t(&self) -> usize {
        self.n_m * self.n_k
    }
}

impl fmt::Display for SpatialCodebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "codebook: M={} (N_M={}, N_RF={}, N_K={})",
            self.m_count(),
            self.n_m,
            self.n_rf,
            self.n_k
        )?;
        for (m, p) in self.patterns.iter().enumerate() {
            writeln!(f, "{m:>6}: {p:?}")?;
        }
        Ok(())
    }
}

/// Advances `c` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

pub fn build_codebook(geom: &SystemGeometry) -> Result<SpatialCodebook> {
    geom.check()?;
    let m = num_spatial_schemes(geom.n_m, geom.n_rf)?;
    if m > MAX_CODEBOOK_SIZE {
        return Err(Error::infeasible(format!("M <= {MAX_CODEBOOK_SIZE} (got {m})")));
    }
    let mut patterns = Vec::with_capacity(m as usize);
    let mut cur: Vec<usize> = (0..geom.n_rf).collect();
    loop {
        patterns.push(cur.clone());
        if patterns.len() as u64 == m || !next_combination(&mut cur, geom.n_m) {
            break;
        }
    }
    Ok(SpatialCodebook {
        patterns,
        n_m: geom.n_m,
        n_rf: geom.n_rf,
        n_k: geom.n_k,
    })
}

/// The 0/1 antenna-selection matrix `C_m` (`N_T x N_RF`), stored by group.
///
/// Column `j` has ones on rows `groups[j] * n_k .. (groups[j] + 1) * n_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMatrix {
    groups: Vec<usize>,
    n_k: usize,
    n_t: usize,
}

impl SelectionMatrix {
    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    pub fn rows(&self) -> usize {
        self.n_t
    }

    pub fn cols(&self) -> usize {
        self.groups.len()
    }

    /// Antenna rows fed by RF chain `j`.
    pub fn antennas(&self, j: usize) -> std::ops::Range<usize> {
        let g = self.groups[j];
        g * self.n_k..(g + 1) * self.n_k
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        u8::from(self.antennas(col).contains(&row))
    }

    /// Dense row-major `N_T x N_RF` entries.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.n_t)
            .map(|r| (0..self.cols()).map(|c| self.get(r, c)).collect())
            .collect()
    }
}

pub fn selection_matrix(book: &SpatialCodebook, m: usize) -> Result<SelectionMatrix> {
    Ok(SelectionMatrix {
        groups: book.pattern(m)?.to_vec(),
        n_k: book.n_k,
        n_t: book.n_t(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_counts() {
        assert_eq!(num_spatial_schemes(16, 14).unwrap(), 64);
        assert_eq!(num_spatial_schemes(2, 1).unwrap(), 2);
        assert_eq!(num_spatial_schemes(4, 2).unwrap(), 4);
        assert_eq!(num_spatial_schemes(16, 8).unwrap(), 8192);
        assert_eq!(num_spatial_schemes(16, 15).unwrap(), 16);
    }

    #[test]
    fn infeasible_counts_name_constraint() {
        match num_spatial_schemes(16, 16) {
            Err(Error::Infeasible { constraint }) => assert_eq!(constraint, "n_rf < n_m"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(num_spatial_schemes(4, 0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 14), Some(120));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(binomial(128, 64), Some(23951146041928082866135587776380551750));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn small_codebooks() {
        let book = build_codebook(&SystemGeometry::new(2, 2, 4, 1)).unwrap();
        assert_eq!(book.patterns(), &[vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2]]);
        assert_eq!(book.spatial_bits(), 2);
        let book = build_codebook(&SystemGeometry::new(1, 1, 2, 2)).unwrap();
        assert_eq!(book.patterns(), &[vec![0], vec![1]]);
    }

    #[test]
    fn selection_columns() {
        let book = build_codebook(&SystemGeometry::new(1, 1, 2, 2)).unwrap();
        let c1 = selection_matrix(&book, 1).unwrap();
        assert_eq!(c1.to_dense(), vec![vec![0], vec![0], vec![1], vec![1]]);
        let c0 = selection_matrix(&book, 0).unwrap();
        assert_eq!(c0.to_dense(), vec![vec![1], vec![1], vec![0], vec![0]]);
        assert!(matches!(
            selection_matrix(&book, 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn reference_codebook_display() {
        let book = build_codebook(&SystemGeometry::reference()).unwrap();
        let text = book.to_string();
        assert!(text.starts_with("codebook: M=64"));
        assert_eq!(text.lines().count(), 65);
    }
}
