use super::{Caps, RowConfiguration};
use crate::error::{Error, Result};
use crate::matrix::TransitionMatrix;
use crate::subset::SymbolSubset;

/// Support of the level-matrix product `B_0 B_1 ⋯ B_{n-1}`, where `B_m`
/// is the 0/1 matrix of allowed transitions from configurations of `L_m` to
/// configurations of `L_{m+1}`.
///
/// Columns are stored as the set of rows with a nonzero entry, so
/// `columns[ξ]` is the set of root symbols `i` with `ξ ∈ F_n(i)`.
#[derive(Clone, PartialEq, Eq)]
pub struct LevelSupports {
    pub d: usize,
    pub k: usize,
    pub n: u32,
    pub columns: Vec<SymbolSubset>,
}

impl LevelSupports {
    pub fn width(&self) -> usize {
        self.k.pow(self.n)
    }

    pub fn entry(&self, i: usize, column: usize) -> bool {
        self.columns[column].contains(i)
    }

    /// Row `i` as a 0/1 string over the lexicographically ordered columns.
    pub fn row_string(&self, i: usize) -> String {
        self.columns
            .iter()
            .map(|c| if c.contains(i) { '1' } else { '0' })
            .collect()
    }

    pub fn column_label(&self, column: usize) -> RowConfiguration {
        RowConfiguration::from_index(self.d, self.width(), column as u64)
    }
}

/// Computes the product one level at a time over the boolean semiring.
///
/// `(M_m B_m)(i, ξ') = OR_ξ M_m(i, ξ) ∧ B_m(ξ, ξ')`, and `B_m(ξ, ξ') = 1`
/// exactly when each block of `k` consecutive sites of `ξ'` lies in the
/// follower set of the corresponding site of `ξ`. The sum runs over the
/// parents `ξ` of each column, which are the products of the common
/// predecessor sets of the blocks.
pub fn level_matrix_supports(a: &TransitionMatrix, k: usize, n: u32, caps: &Caps) -> Result<LevelSupports> {
    if k == 0 {
        return Err(Error::Precondition("tree dimension k must be at least 1".into()));
    }
    caps.check_leaves(a.d(), k, n)?;
    let d = a.d();
    let pred = a.predecessors();

    // Common predecessors of every k-block, indexed like a configuration.
    let block_count = d.pow(k as u32);
    let block_parents: Vec<Vec<usize>> = (0..block_count as u64)
        .map(|b| {
            let block = RowConfiguration::from_index(d, k, b);
            block
                .symbols()
                .iter()
                .fold(SymbolSubset::full(d), |acc, &s| acc.intersection(pred[s as usize]))
                .iter()
                .collect()
        })
        .collect();

    let mut columns: Vec<SymbolSubset> = (0..d).map(SymbolSubset::singleton).collect();
    let mut width = 1usize;
    for _ in 0..n {
        let child_width = width * k;
        let child_count = d.pow(child_width as u32);
        let mut next = Vec::with_capacity(child_count);
        let mut parents: Vec<&[usize]> = Vec::with_capacity(width);
        for column in 0..child_count {
            parents.clear();
            // Blocks from the most significant end.
            let mut rest = column;
            let mut blocks = vec![0usize; width];
            for slot in blocks.iter_mut().rev() {
                *slot = rest % block_count;
                rest /= block_count;
            }
            parents.extend(blocks.iter().map(|&b| block_parents[b].as_slice()));
            next.push(or_over_parents(&columns, &parents, d));
        }
        columns = next;
        width = child_width;
    }
    Ok(LevelSupports {
        d,
        k,
        n,
        columns,
    })
}

fn or_over_parents(columns: &[SymbolSubset], parents: &[&[usize]], d: usize) -> SymbolSubset {
    if parents.iter().any(|p| p.is_empty()) {
        return SymbolSubset::EMPTY;
    }
    let mut acc = SymbolSubset::EMPTY;
    let mut odometer = vec![0usize; parents.len()];
    loop {
        let index = odometer
            .iter()
            .zip(parents)
            .fold(0usize, |i, (&o, p)| i * d + p[o]);
        acc = acc.union(columns[index]);
        let mut pos = parents.len();
        loop {
            if pos == 0 {
                return acc;
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < parents[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displayed_two_symbol_product() {
        let a = TransitionMatrix::parse("11|10").unwrap();
        let level = level_matrix_supports(&a, 2, 1, &Caps::default()).unwrap();
        assert_eq!(level.row_string(0), "1111");
        assert_eq!(level.row_string(1), "1000");
        assert_eq!(level.column_label(1).to_string(), "12");
    }

    #[test]
    fn two_symbol_product_depth_two() {
        // Root 2 forces 11 on L_1 and 1 may be followed by anything, so
        // both roots reach all 16 configurations of L_2.
        let a = TransitionMatrix::parse("11|10").unwrap();
        let level = level_matrix_supports(&a, 2, 2, &Caps::default()).unwrap();
        assert_eq!(level.row_string(0), "1".repeat(16));
        assert_eq!(level.row_string(1), "1".repeat(16));
    }

    #[test]
    fn full_matrix_is_all_ones() {
        let a = TransitionMatrix::all_ones(2).unwrap();
        let level = level_matrix_supports(&a, 2, 1, &Caps::default()).unwrap();
        assert!(level.columns.iter().all(|&c| c == SymbolSubset::full(2)));
    }

    #[test]
    fn guard_applies() {
        let a = TransitionMatrix::all_ones(3).unwrap();
        assert!(matches!(
            level_matrix_supports(&a, 2, 4, &Caps::default()),
            Err(Error::Capacity { cap: "leaves", .. })
        ));
    }
}
