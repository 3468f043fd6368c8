//! Good k-colored set partitions of `[n]` in standard block notation.
//!
//! A colored partition assigns each element of `[n]` a color in `1..=k`.
//! It is *good* when
//!
//! 1. the minimum of every block has color 1, and
//! 2. every element of the block containing 1 has color at most `k - 1`.
//!
//! For `k = 1` rule 2 leaves no color for anything but 1 itself, so the
//! first block is exactly `{1}`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One block as `(element, color)` pairs, elements ascending once normalized.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Block(pub Vec<(u32, u32)>);

impl Block {
    pub fn minimum(&self) -> u32 {
        self.0[0].0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|&(e, _)| e)
    }

    /// Number of distinct colors among the non-minimum elements.
    pub fn distinct_nonmin_colors(&self) -> usize {
        self.0[1..].iter().map(|&(_, c)| c).collect::<BTreeSet<_>>().len()
    }

    /// Size `k + 1` and every color `1..=k` used by a non-minimum element.
    pub fn is_saturated(&self, k: usize) -> bool {
        self.len() == k + 1 && self.distinct_nonmin_colors() == k
    }
}

/// Which defining property a colored partition fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ColorOutOfRange {
        element: u32,
        color: u32,
    },
    /// Rule 1.
    MinimumNotColorOne {
        element: u32,
        color: u32,
    },
    /// Rule 2.
    FirstBlockColor {
        element: u32,
        color: u32,
    },
    /// `k = 1` admits only `{1}` as first block.
    FirstBlockNotSingleton,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ColorOutOfRange { element, color } => {
                write!(f, "element {element} has color {color} outside 1..=k")
            }
            Violation::MinimumNotColorOne { element, color } => {
                write!(f, "rule 1: block minimum {element} has color {color}, expected 1")
            }
            Violation::FirstBlockColor { element, color } => {
                write!(
                    f,
                    "rule 2: element {element} of the first block has color {color} > k-1"
                )
            }
            Violation::FirstBlockNotSingleton => {
                write!(f, "k = 1 requires the first block to be {{1}}")
            }
        }
    }
}

/// A k-colored partition of `[n]` stored in standard block notation.
///
/// The constructors only check that the blocks partition `[n]`; the coloring
/// rules are checked by [`ColoredPartition::validate`], or enforced up front
/// by [`ColoredPartition::new`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PartitionJson", into = "PartitionJson")]
pub struct ColoredPartition {
    n: usize,
    k: usize,
    blocks: Vec<Block>,
    #[serde(skip)]
    reordered: bool,
}

impl ColoredPartition {
    /// Normalizes and requires a good k-colored partition.
    pub fn new(n: usize, k: usize, blocks: Vec<Block>) -> Result<Self> {
        let p = Self::normalized(n, k, blocks)?;
        p.check().map_err(|v| Error::domain(v.to_string()))?;
        Ok(p)
    }

    /// Sorts each block and orders blocks by minimum, checking only that the
    /// blocks partition `[n]` and that colors are positive.
    pub fn normalized(n: usize, k: usize, blocks: Vec<Block>) -> Result<Self> {
        if k == 0 {
            return Err(Error::malformed("k must be positive"));
        }
        let mut seen = vec![false; n + 1];
        let mut reordered = false;
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::malformed("empty block"));
            }
            for &(e, c) in &block.0 {
                let idx = e as usize;
                if idx == 0 || idx > n {
                    return Err(Error::malformed(format!("element {e} outside 1..={n}")));
                }
                if seen[idx] {
                    return Err(Error::malformed(format!("element {e} appears twice")));
                }
                if c == 0 {
                    return Err(Error::malformed(format!("element {e} has color 0")));
                }
                seen[idx] = true;
            }
            if block.0.windows(2).any(|w| w[0].0 > w[1].0) {
                reordered = true;
                block.0.sort_unstable();
            }
        }
        if let Some(missing) = (1..=n).find(|&e| !seen[e]) {
            return Err(Error::malformed(format!("element {missing} is in no block")));
        }
        if blocks.windows(2).any(|w| w[0].minimum() > w[1].minimum()) {
            reordered = true;
            blocks.sort_unstable_by_key(Block::minimum);
        }
        Ok(ColoredPartition {
            n,
            k,
            blocks,
            reordered,
        })
    }

    /// Caller guarantees standard block notation and both coloring rules.
    pub(crate) fn from_parts_unchecked(n: usize, k: usize, blocks: Vec<Block>) -> Self {
        ColoredPartition {
            n,
            k,
            blocks,
            reordered: false,
        }
    }

    /// Parses `"1_1 2_3 4_2 6_3 | 3_1 | 5_1"`; `n` is the number of elements.
    pub fn parse(text: &str, k: usize) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut n = 0;
        for chunk in text.split('|') {
            let mut block = Vec::new();
            for tok in chunk.split_whitespace() {
                let (e, c) = tok
                    .split_once('_')
                    .ok_or_else(|| Error::malformed(format!("'{tok}' is not of the form element_color")))?;
                let e: u32 = e
                    .parse()
                    .map_err(|_| Error::malformed(format!("bad element in '{tok}'")))?;
                let c: u32 = c
                    .parse()
                    .map_err(|_| Error::malformed(format!("bad color in '{tok}'")))?;
                block.push((e, c));
            }
            n += block.len();
            blocks.push(Block(block));
        }
        Self::normalized(n, k, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Whether normalization had to reorder the input.
    pub fn was_reordered(&self) -> bool {
        self.reordered
    }

    /// The first violated rule, if any.
    pub fn check(&self) -> std::result::Result<(), Violation> {
        let k = self.k as u32;
        for (i, block) in self.blocks.iter().enumerate() {
            for (j, &(element, color)) in block.0.iter().enumerate() {
                if color > k {
                    return Err(Violation::ColorOutOfRange { element, color });
                }
                if j == 0 && color != 1 {
                    return Err(Violation::MinimumNotColorOne { element, color });
                }
                if i == 0 && j > 0 {
                    if k == 1 {
                        return Err(Violation::FirstBlockNotSingleton);
                    }
                    if color > k - 1 {
                        return Err(Violation::FirstBlockColor { element, color });
                    }
                }
            }
        }
        Ok(())
    }

    /// True iff this is a good k-colored partition.
    pub fn validate(&self) -> bool {
        self.check().is_ok()
    }

    /// Sum over blocks of the distinct colors on non-minimum elements; equals
    /// the number of descents of the image word.
    pub fn block_descent_count(&self) -> usize {
        self.blocks.iter().map(Block::distinct_nonmin_colors).sum()
    }

    /// The color of every element, indexed by element (index 0 unused).
    pub fn coloring(&self) -> Vec<u32> {
        let mut colors = vec![0; self.n + 1];
        for block in &self.blocks {
            for &(e, c) in &block.0 {
                colors[e as usize] = c;
            }
        }
        colors
    }
}

// Equality ignores the `reordered` flag.
impl PartialEq for ColoredPartition {
    fn eq(&self, other: &Self) -> bool {
        (self.n, self.k, &self.blocks) == (other.n, other.k, &other.blocks)
    }
}

impl Eq for ColoredPartition {}

impl std::hash::Hash for ColoredPartition {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.n, self.k, &self.blocks).hash(state);
    }
}

impl PartialOrd for ColoredPartition {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ColoredPartition {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.k, &self.blocks).cmp(&(other.n, other.k, &other.blocks))
    }
}

pub fn validate(p: &ColoredPartition) -> bool {
    p.validate()
}

pub fn is_saturated(block: &Block, k: usize) -> bool {
    block.is_saturated(k)
}

pub fn block_descent_count(p: &ColoredPartition) -> usize {
    p.block_descent_count()
}

impl fmt::Display for ColoredPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            for (j, (e, c)) in block.0.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{e}_{c}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionJson {
    n: usize,
    k: usize,
    blocks: Vec<Vec<[u32; 2]>>,
}

impl TryFrom<PartitionJson> for ColoredPartition {
    type Error = Error;

    fn try_from(value: PartitionJson) -> Result<Self> {
        let blocks = value
            .blocks
            .into_iter()
            .map(|b| Block(b.into_iter().map(|[e, c]| (e, c)).collect()))
            .collect();
        ColoredPartition::normalized(value.n, value.k, blocks)
    }
}

impl From<ColoredPartition> for PartitionJson {
    fn from(p: ColoredPartition) -> Self {
        PartitionJson {
            n: p.n,
            k: p.k,
            blocks: p
                .blocks
                .into_iter()
                .map(|b| b.0.into_iter().map(|(e, c)| [e, c]).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn block(pairs: &[(u32, u32)]) -> Block {
        Block(pairs.to_vec())
    }

    #[test]
    fn good_partition_examples() {
        let text = "1_1 2_3 4_2 | 3_1 | 5_1";
        assert!(ColoredPartition::parse(text, 4).unwrap().validate());
        let p3 = ColoredPartition::parse(text, 3).unwrap();
        assert!(!p3.validate());
        assert_eq!(p3.check(), Err(Violation::FirstBlockColor { element: 2, color: 3 }));
        assert!(ColoredPartition::parse(text, 3)
            .and_then(|p| ColoredPartition::new(p.n(), 3, p.blocks().to_vec()))
            .is_err());
        assert!(ColoredPartition::parse("1_1", 1).unwrap().validate());
    }

    #[test]
    fn k_one_first_block() {
        assert!(ColoredPartition::parse("1_1 | 2_1 3_1", 1).unwrap().validate());
        let p = ColoredPartition::parse("1_1 2_1 | 3_1", 1).unwrap();
        assert_eq!(p.check(), Err(Violation::FirstBlockNotSingleton));
    }

    #[test]
    fn rule_one() {
        let p = ColoredPartition::parse("1_1 | 2_2 3_1", 2).unwrap();
        assert_eq!(p.check(), Err(Violation::MinimumNotColorOne { element: 2, color: 2 }));
    }

    #[test]
    fn structural_errors() {
        assert!(ColoredPartition::parse("1_1 | 1_1", 2).is_err());
        assert!(ColoredPartition::parse("1_1 3_1", 2).is_err());
        assert!(ColoredPartition::parse("1_0 2_1", 2).is_err());
        assert!(ColoredPartition::parse("1-1", 2).is_err());
        assert!(ColoredPartition::normalized(2, 2, vec![block(&[(1, 1)]), block(&[])]).is_err());
    }

    #[test]
    fn saturated_blocks() {
        assert!(block(&[(2, 1), (5, 1), (6, 2)]).is_saturated(2));
        assert!(!block(&[(2, 1), (5, 2), (6, 2)]).is_saturated(2));
        assert!(!block(&[(2, 1), (5, 2)]).is_saturated(2));
    }

    #[test]
    fn descent_counts() {
        let p = ColoredPartition::parse("1_1 2_3 4_2 6_3 | 3_1 | 5_1", 4).unwrap();
        assert_eq!(p.block_descent_count(), 2);
        let singles = ColoredPartition::parse("1_1 | 2_1 | 3_1 | 4_1", 3).unwrap();
        assert_eq!(singles.block_descent_count(), 0);
        let p = ColoredPartition::parse("1_1 2_1 | 3_1 4_2", 2).unwrap();
        assert_eq!(p.block_descent_count(), 2);
    }

    #[test]
    fn normalization_reorders() {
        let p = ColoredPartition::parse("5_1 | 4_2 1_1 2_3 | 3_1", 4).unwrap();
        assert!(p.was_reordered());
        assert_eq!(p.to_string(), "1_1 2_3 4_2 | 3_1 | 5_1");
        assert!(p.validate());
        let q = ColoredPartition::parse(&p.to_string(), 4).unwrap();
        assert!(!q.was_reordered());
        assert_eq!(p, q);
    }

    #[test]
    fn json_form() {
        let p = ColoredPartition::parse("1_1 2_3 | 3_1", 4).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"n":3,"k":4,"blocks":[[[1,1],[2,3]],[[3,1]]]}"#);
        let back: ColoredPartition = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        /// Shuffling the listing never changes the normalized value or its verdict.
        #[test]
        fn normalization_is_canonical(
            assignment in proptest::collection::vec((0usize..4, 1u32..4), 1..8),
            seed in any::<u64>(),
        ) {
            let n = assignment.len();
            let mut groups: Vec<Vec<(u32, u32)>> = vec![Vec::new(); 4];
            for (i, &(g, c)) in assignment.iter().enumerate() {
                groups[g].push((i as u32 + 1, c));
            }
            let blocks: Vec<Block> = groups.into_iter().filter(|g| !g.is_empty()).map(Block).collect();
            let canonical = ColoredPartition::normalized(n, 3, blocks.clone()).unwrap();

            let mut shuffled = blocks;
            let len = shuffled.len();
            shuffled.rotate_left((seed as usize) % len);
            for b in &mut shuffled {
                b.0.reverse();
            }
            let again = ColoredPartition::normalized(n, 3, shuffled).unwrap();
            prop_assert_eq!(&again, &canonical);
            prop_assert_eq!(again.validate(), canonical.validate());
        }
    }
}
