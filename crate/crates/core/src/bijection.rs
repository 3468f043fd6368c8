//! The bijection between good k-colored partitions of `[n]` and flattened
//! k-Stirling permutations of order `n`.
//!
//! Each block `x_1 < x_2 < ... < x_l` becomes a subword built around the `k`
//! copies of its minimum. The gaps to the left of those copies are numbered
//! `k, k-1, ..., 1` from left to right (that is, gap 1 sits just before the
//! last copy), and the `k` copies of each later element `x` are appended to
//! gap `color(x)`. The image is the concatenation of the block subwords in
//! standard block order.

use std::collections::BTreeMap;

use crate::partitions::{Block, ColoredPartition};
use crate::words::{run_leaders_weakly_increase, StirlingWord};
use crate::{Error, Result};

/// Maps a good k-colored partition to its flattened k-Stirling permutation.
pub fn phi(p: &ColoredPartition) -> Result<StirlingWord> {
    p.check()
        .map_err(|v| Error::domain(format!("not a good {}-colored partition: {v}", p.k())))?;
    Ok(phi_unchecked(p))
}

pub(crate) fn phi_unchecked(p: &ColoredPartition) -> StirlingWord {
    let k = p.k();
    let mut letters = Vec::with_capacity(p.n() * k);
    let mut gaps: Vec<Vec<u32>> = vec![Vec::new(); k + 1];
    for block in p.blocks() {
        block_subword(block, k, &mut gaps, &mut letters);
    }
    StirlingWord::from_parts_unchecked(letters, p.n(), k)
}

fn block_subword(block: &Block, k: usize, gaps: &mut [Vec<u32>], out: &mut Vec<u32>) {
    for gap in gaps.iter_mut() {
        gap.clear();
    }
    let min = block.minimum();
    for &(x, color) in &block.0[1..] {
        gaps[color as usize].extend(std::iter::repeat_n(x, k));
    }
    for gap in (1..=k).rev() {
        out.extend_from_slice(&gaps[gap]);
        out.push(min);
    }
}

/// Recovers the good k-colored partition whose image is `w`.
///
/// Repeatedly cuts off the longest suffix whose letters are all at least its
/// final letter `a`. That suffix is one block with minimum `a`; every other
/// letter is colored by how many copies of `a` lie to its right.
pub fn phi_inverse(w: &StirlingWord) -> Result<ColoredPartition> {
    let k = w.multiplicity();
    if !w.is_valid_stirling() {
        return Err(Error::domain(format!("'{w}' is not a {k}-Stirling permutation")));
    }
    if !run_leaders_weakly_increase(w.letters()) {
        return Err(Error::domain(format!("'{w}' is not flattened")));
    }

    let mut rest = w.letters();
    let mut blocks = Vec::new();
    while let Some(&alpha) = rest.last() {
        let cut = rest.iter().rposition(|&x| x < alpha).map_or(0, |i| i + 1);
        let suffix = &rest[cut..];
        blocks.push(decode_block(suffix, alpha, k)?);
        rest = &rest[..cut];
    }
    blocks.reverse();

    let p = ColoredPartition::new(w.order(), k, blocks)?;
    if phi_unchecked(&p).letters() != w.letters() {
        return Err(Error::domain(format!("'{w}' is not in the image of the bijection")));
    }
    Ok(p)
}

fn decode_block(suffix: &[u32], alpha: u32, k: usize) -> Result<Block> {
    let mut colors: BTreeMap<u32, u32> = BTreeMap::new();
    let mut alphas_to_right = 0u32;
    for &x in suffix.iter().rev() {
        if x == alpha {
            alphas_to_right += 1;
            continue;
        }
        let color = alphas_to_right.min(k as u32);
        if *colors.entry(x).or_insert(color) != color {
            return Err(Error::domain(format!(
                "copies of {x} straddle a copy of block minimum {alpha}"
            )));
        }
    }
    if alphas_to_right as usize != k {
        return Err(Error::domain(format!(
            "block with minimum {alpha} holds {alphas_to_right} copies of it, expected {k}"
        )));
    }
    let mut pairs = Vec::with_capacity(colors.len() + 1);
    pairs.push((alpha, 1));
    pairs.extend(colors);
    Ok(Block(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_WORD: &str = "1 2 2 2 2 6 6 6 6 1 4 4 4 4 1 1 3 3 3 3 5 5 5 5";
    const EXAMPLE_PARTITION: &str = "1_1 2_3 4_2 6_3 | 3_1 | 5_1";

    #[test]
    fn worked_example_forward() {
        let p = ColoredPartition::parse(EXAMPLE_PARTITION, 4).unwrap();
        let w = phi(&p).unwrap();
        assert_eq!(w.to_string(), EXAMPLE_WORD);
        let compact: String = w.letters().iter().map(|d| d.to_string()).collect();
        assert_eq!(compact, "122226666144441133335555");
    }

    #[test]
    fn worked_example_inverse() {
        let w = StirlingWord::parse(EXAMPLE_WORD, 4).unwrap();
        let p = phi_inverse(&w).unwrap();
        assert_eq!(p.to_string(), EXAMPLE_PARTITION);
    }

    #[test]
    fn gap_numbering_is_right_to_left() {
        // Color 1 lands just before the last copy of the minimum, color k before the first.
        let p = ColoredPartition::parse("1_1 | 2_1 3_1", 3).unwrap();
        assert_eq!(phi(&p).unwrap().letters(), &[1, 1, 1, 2, 2, 3, 3, 3, 2]);
        let p = ColoredPartition::parse("1_1 | 2_1 3_3", 3).unwrap();
        assert_eq!(phi(&p).unwrap().letters(), &[1, 1, 1, 3, 3, 3, 2, 2, 2]);
    }

    #[test]
    fn small_cases() {
        let p = ColoredPartition::parse("1_1 2_1", 2).unwrap();
        assert_eq!(phi(&p).unwrap().letters(), &[1, 2, 2, 1]);
        let w = StirlingWord::parse("1 2 2 1", 2).unwrap();
        assert_eq!(phi_inverse(&w).unwrap(), p);

        for (n, k) in [(1, 1), (4, 1), (3, 2), (5, 4)] {
            let blocks = (1..=n as u32).map(|e| Block(vec![(e, 1)])).collect();
            let singles = ColoredPartition::new(n, k, blocks).unwrap();
            let w = phi(&singles).unwrap();
            assert_eq!(w, StirlingWord::sorted(n, k));
            assert_eq!(phi_inverse(&w).unwrap(), singles);
        }
    }

    #[test]
    fn k_one() {
        let p = ColoredPartition::parse("1_1 | 2_1 4_1 | 3_1", 1).unwrap();
        let w = phi(&p).unwrap();
        assert_eq!(w.letters(), &[1, 4, 2, 3]);
        assert_eq!(phi_inverse(&w).unwrap(), p);
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad = ColoredPartition::parse("1_1 2_2", 2).unwrap();
        assert!(matches!(phi(&bad), Err(Error::Domain(_))));
        let not_stirling = StirlingWord::parse("2 1 1 2", 2).unwrap();
        let err = phi_inverse(&not_stirling).unwrap_err().to_string();
        assert!(err.contains("Stirling"), "{err}");
        let not_flat = StirlingWord::parse("2 2 1 1", 2).unwrap();
        let err = phi_inverse(&not_flat).unwrap_err().to_string();
        assert!(err.contains("flattened"), "{err}");
    }
}
