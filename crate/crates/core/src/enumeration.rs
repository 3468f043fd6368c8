//! Exhaustive, lazy generators for `Q_n^k`, its flattened subset and the
//! good k-colored partitions of `[n]`.
//!
//! All streams are depth-first and deterministic. They hold one live word or
//! partition at a time, so `Q_8^2` (about two million words) streams in
//! `O(nk)` memory.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::bijection::phi_unchecked;
use crate::counting::FlattenedCounter;
use crate::partitions::{Block, ColoredPartition};
use crate::words::{run_leaders_weakly_increase, StirlingWord};
use crate::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Upper bound on the number of objects a generator may be asked to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub limit: u64,
    /// Ignore the limit.
    pub force: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            limit: DEFAULT_BUDGET,
            force: false,
        }
    }
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, force: false }
    }

    pub fn unlimited() -> Self {
        Budget {
            limit: u64::MAX,
            force: true,
        }
    }

    pub fn check(&self, predicted: &BigUint) -> Result<()> {
        if self.force || predicted.to_u64().is_some_and(|p| p <= self.limit) {
            Ok(())
        } else {
            Err(Error::Budget {
                predicted: predicted.to_string(),
                budget: self.limit,
            })
        }
    }
}

fn check_order(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(Error::domain(format!(
            "order and multiplicity must be at least 1 (got n={n}, k={k})"
        )));
    }
    Ok(())
}

/// `|Q_n^k| = prod_{i=0}^{n-1} (ik + 1)`.
pub fn stirling_count(n: usize, k: usize) -> BigUint {
    (0..n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i * k + 1))
}

/// Every k-Stirling permutation of order `n`, built by inserting the block
/// `j^k` into each of the `(j-1)k + 1` gaps of every word over `1..j-1`.
#[derive(Clone, Debug)]
pub struct StirlingWords {
    n: usize,
    k: usize,
    word: Vec<u32>,
    /// `positions[j]`: gap where letter `j` was inserted.
    positions: Vec<usize>,
    /// Lowest level the odometer may advance; levels below it are pinned.
    first_free: usize,
    started: bool,
    done: bool,
}

impl StirlingWords {
    fn with_prefix(n: usize, k: usize, pinned_second: Option<usize>) -> Self {
        let mut word = vec![1u32; k];
        let mut positions = vec![0usize; n + 1];
        if let (Some(g), true) = (pinned_second, n >= 2) {
            positions[2] = g;
        }
        for (j, &at) in positions.iter().enumerate().skip(2) {
            word.splice(at..at, std::iter::repeat_n(j as u32, k));
        }
        StirlingWords {
            n,
            k,
            word,
            positions,
            first_free: if pinned_second.is_some() { 3 } else { 2 },
            started: false,
            done: false,
        }
    }

    /// Advances and exposes the next word without allocating.
    pub fn advance(&mut self) -> Option<&[u32]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.word);
        }
        let k = self.k;
        let mut level = self.n;
        loop {
            if level < self.first_free {
                self.done = true;
                return None;
            }
            let at = self.positions[level];
            self.word.drain(at..at + k);
            self.positions[level] += 1;
            let at = self.positions[level];
            if at <= (level - 1) * k {
                self.word.splice(at..at, std::iter::repeat_n(level as u32, k));
                for deeper in level + 1..=self.n {
                    self.positions[deeper] = 0;
                    self.word.splice(0..0, std::iter::repeat_n(deeper as u32, k));
                }
                return Some(&self.word);
            }
            level -= 1;
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn multiplicity(&self) -> usize {
        self.k
    }

    /// Independent sub-streams, one per insertion gap of the letter 2.
    /// Their concatenation is the full stream.
    pub fn split(self) -> Vec<StirlingWords> {
        if self.n < 2 || self.started {
            return vec![self];
        }
        (0..=self.k)
            .map(|g| StirlingWords::with_prefix(self.n, self.k, Some(g)))
            .collect()
    }
}

impl Iterator for StirlingWords {
    type Item = StirlingWord;

    fn next(&mut self) -> Option<StirlingWord> {
        let (n, k) = (self.n, self.k);
        self.advance()
            .map(|letters| StirlingWord::from_parts_unchecked(letters.to_vec(), n, k))
    }
}

pub fn gen_stirling(n: usize, k: usize, budget: Budget) -> Result<StirlingWords> {
    check_order(n, k)?;
    budget.check(&stirling_count(n, k))?;
    Ok(StirlingWords::with_prefix(n, k, None))
}

/// Flattened members of `Q_n^k`, by filtering [`gen_stirling`].
pub fn gen_flattened(n: usize, k: usize, budget: Budget) -> Result<impl Iterator<Item = StirlingWord>> {
    Ok(gen_stirling(n, k, budget)?.filter(|w| run_leaders_weakly_increase(w.letters())))
}

/// Flattened members of `Q_n^k`, as images of [`gen_gcp`].
pub fn gen_flattened_via_bijection(n: usize, k: usize, budget: Budget) -> Result<impl Iterator<Item = StirlingWord>> {
    Ok(gen_gcp(n, k, budget)?.map(|p| phi_unchecked(&p)))
}

/// Calls `f` on the letters of every flattened word, without allocating.
pub fn for_each_flattened(words: &mut StirlingWords, mut f: impl FnMut(&[u32])) {
    while let Some(letters) = words.advance() {
        if run_leaders_weakly_increase(letters) {
            f(letters);
        }
    }
}

/// Every good k-colored partition of `[n]`.
///
/// Set partitions come in restricted-growth-string order; for each one the
/// colors of the non-minimum elements run through an odometer (first block
/// over `1..=k-1`, other blocks over `1..=k`).
#[derive(Clone, Debug)]
pub struct GoodPartitions {
    n: usize,
    k: usize,
    /// Restricted growth string: block index of each element.
    rgs: Vec<usize>,
    /// Non-minimum elements (0-based) and their color limits.
    free: Vec<(usize, u32)>,
    colors: Vec<u32>,
    started: bool,
    done: bool,
}

impl GoodPartitions {
    fn new(n: usize, k: usize) -> Self {
        // k = 1 keeps element 1 alone in its block.
        let floor = usize::from(k == 1);
        let mut rgs = vec![floor; n];
        rgs[0] = 0;
        let mut it = GoodPartitions {
            n,
            k,
            rgs,
            free: Vec::new(),
            colors: Vec::new(),
            started: false,
            done: false,
        };
        it.reset_colors();
        it
    }

    fn reset_colors(&mut self) {
        self.free.clear();
        let mut blocks_seen = 0;
        for (i, &b) in self.rgs.iter().enumerate() {
            if b == blocks_seen {
                blocks_seen += 1;
            } else {
                let limit = if b == 0 { self.k - 1 } else { self.k };
                self.free.push((i, limit as u32));
            }
        }
        self.colors = vec![1; self.free.len()];
    }

    fn next_coloring(&mut self) -> bool {
        for (digit, &(_, limit)) in self.colors.iter_mut().zip(&self.free).rev() {
            if *digit < limit {
                *digit += 1;
                return true;
            }
            *digit = 1;
        }
        false
    }

    fn next_rgs(&mut self) -> bool {
        let floor = usize::from(self.k == 1);
        let mut prefix_max = Vec::with_capacity(self.n);
        let mut m = 0;
        for &b in &self.rgs {
            m = m.max(b);
            prefix_max.push(m);
        }
        for i in (1..self.n).rev() {
            if self.rgs[i] <= prefix_max[i - 1] {
                self.rgs[i] += 1;
                for later in &mut self.rgs[i + 1..] {
                    *later = floor;
                }
                return true;
            }
        }
        false
    }

    fn current(&self) -> ColoredPartition {
        let block_count = self.rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); block_count];
        let mut free = self.free.iter().zip(&self.colors).peekable();
        for (i, &b) in self.rgs.iter().enumerate() {
            let color = match free.peek() {
                Some(((idx, _), &c)) if *idx == i => {
                    free.next();
                    c
                }
                _ => 1,
            };
            blocks[b].push((i as u32 + 1, color));
        }
        ColoredPartition::from_parts_unchecked(self.n, self.k, blocks.into_iter().map(Block).collect())
    }
}

impl Iterator for GoodPartitions {
    type Item = ColoredPartition;

    fn next(&mut self) -> Option<ColoredPartition> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
        } else if !self.next_coloring() {
            if !self.next_rgs() {
                self.done = true;
                return None;
            }
            self.reset_colors();
        }
        Some(self.current())
    }
}

pub fn gen_gcp(n: usize, k: usize, budget: Budget) -> Result<GoodPartitions> {
    check_order(n, k)?;
    budget.check(&FlattenedCounter::new(k).count(n)?)?;
    Ok(GoodPartitions::new(n, k))
}
