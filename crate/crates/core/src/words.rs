//! Words over the multiset `{1^k, ..., n^k}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A word containing each of `1..=order` exactly `multiplicity` times.
///
/// Construction checks the multiset property only. Whether the word is a
/// k-Stirling permutation, or a flattened one, is answered separately by
/// [`StirlingWord::is_valid_stirling`] and [`StirlingWord::is_flattened`],
/// so the type can also carry negative examples.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "WordJson", into = "WordJson")]
pub struct StirlingWord {
    letters: Vec<u32>,
    order: usize,
    multiplicity: usize,
}

/// Descent, run, plateau and ascent counts of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordStats {
    pub descents: usize,
    /// Maximal weakly increasing contiguous subwords; 0 only for the empty word.
    pub runs: usize,
    pub plateaus: usize,
    pub ascents: usize,
}

impl WordStats {
    pub const EMPTY: WordStats = WordStats {
        descents: 0,
        runs: 0,
        plateaus: 0,
        ascents: 0,
    };

    pub fn is_empty(&self) -> bool {
        self.runs == 0
    }

    /// Single left-to-right scan over adjacent pairs.
    pub fn of_letters(letters: &[u32]) -> WordStats {
        if letters.is_empty() {
            return WordStats::EMPTY;
        }
        let mut stats = WordStats {
            descents: 0,
            runs: 1,
            plateaus: 0,
            ascents: 0,
        };
        for pair in letters.windows(2) {
            match pair[0].cmp(&pair[1]) {
                std::cmp::Ordering::Greater => {
                    stats.descents += 1;
                    stats.runs += 1;
                }
                std::cmp::Ordering::Equal => stats.plateaus += 1,
                std::cmp::Ordering::Less => stats.ascents += 1,
            }
        }
        stats
    }
}

impl StirlingWord {
    pub fn new(letters: Vec<u32>, order: usize, multiplicity: usize) -> Result<Self> {
        if multiplicity == 0 {
            return Err(Error::malformed("multiplicity must be positive"));
        }
        let expected_len = order
            .checked_mul(multiplicity)
            .ok_or_else(|| Error::malformed("order * multiplicity overflows"))?;
        if letters.len() != expected_len {
            return Err(Error::malformed(format!(
                "word has {} letters, expected order {} x multiplicity {} = {}",
                letters.len(),
                order,
                multiplicity,
                expected_len
            )));
        }
        let mut counts = vec![0usize; order + 1];
        for (pos, &letter) in letters.iter().enumerate() {
            let value = letter as usize;
            if value == 0 || value > order {
                return Err(Error::malformed(format!(
                    "letter {letter} at position {pos} is outside 1..={order}"
                )));
            }
            counts[value] += 1;
        }
        if let Some(value) = (1..=order).find(|&v| counts[v] != multiplicity) {
            return Err(Error::malformed(format!(
                "letter {value} occurs {} times, expected {multiplicity}",
                counts[value]
            )));
        }
        Ok(StirlingWord {
            letters,
            order,
            multiplicity,
        })
    }

    /// Builds a word whose order is inferred from its length.
    pub fn with_multiplicity(letters: Vec<u32>, multiplicity: usize) -> Result<Self> {
        if multiplicity == 0 {
            return Err(Error::malformed("multiplicity must be positive"));
        }
        if !letters.len().is_multiple_of(multiplicity) {
            return Err(Error::malformed(format!(
                "length {} is not a multiple of {multiplicity}",
                letters.len()
            )));
        }
        let order = letters.len() / multiplicity;
        Self::new(letters, order, multiplicity)
    }

    /// The sorted word `1^k 2^k ... n^k`.
    pub fn sorted(order: usize, multiplicity: usize) -> Self {
        let letters = (1..=order as u32)
            .flat_map(|v| std::iter::repeat_n(v, multiplicity))
            .collect();
        StirlingWord {
            letters,
            order,
            multiplicity,
        }
    }

    /// Caller guarantees the multiset property.
    pub(crate) fn from_parts_unchecked(letters: Vec<u32>, order: usize, multiplicity: usize) -> Self {
        debug_assert_eq!(letters.len(), order * multiplicity);
        StirlingWord {
            letters,
            order,
            multiplicity,
        }
    }

    /// Parses the space-separated text form, e.g. `"1 2 2 1"`.
    pub fn parse(text: &str, multiplicity: usize) -> Result<Self> {
        let letters = parse_letters(text)?;
        Self::with_multiplicity(letters, multiplicity)
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<u32> {
        self.letters
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// True iff every letter strictly between two consecutive copies of `i`
    /// is larger than `i`, for every `i`.
    pub fn is_valid_stirling(&self) -> bool {
        stirling_property(&self.letters, self.order, self.multiplicity)
    }

    /// True iff the word is a k-Stirling permutation whose run leaders are
    /// weakly increasing. Errors if the word is not k-Stirling at all.
    pub fn is_flattened(&self) -> Result<bool> {
        if !self.is_valid_stirling() {
            return Err(Error::domain(format!(
                "'{self}' is not a {}-Stirling permutation",
                self.multiplicity
            )));
        }
        Ok(run_leaders_weakly_increase(&self.letters))
    }

    pub fn stats(&self) -> WordStats {
        WordStats::of_letters(&self.letters)
    }

    /// Leading letter of every run, left to right.
    pub fn run_leaders(&self) -> Vec<u32> {
        let mut leaders = Vec::new();
        for (i, &letter) in self.letters.iter().enumerate() {
            if i == 0 || self.letters[i - 1] > letter {
                leaders.push(letter);
            }
        }
        leaders
    }
}

pub fn is_valid_stirling(w: &StirlingWord) -> bool {
    w.is_valid_stirling()
}

pub fn is_flattened(w: &StirlingWord) -> Result<bool> {
    w.is_flattened()
}

pub fn word_stats(w: &StirlingWord) -> WordStats {
    w.stats()
}

/// Stack scan: a letter seen for the first time must exceed every value that
/// is still waiting for more copies, and a repeated letter must be the most
/// recently opened value.
pub(crate) fn stirling_property(letters: &[u32], order: usize, multiplicity: usize) -> bool {
    let mut seen = vec![0usize; order + 1];
    let mut open: Vec<u32> = Vec::with_capacity(order);
    for &x in letters {
        let count = &mut seen[x as usize];
        if *count == 0 {
            if open.last().is_some_and(|&top| top > x) {
                return false;
            }
            open.push(x);
        } else if open.last() != Some(&x) {
            return false;
        }
        *count += 1;
        if *count == multiplicity {
            open.pop();
        }
    }
    true
}

pub(crate) fn run_leaders_weakly_increase(letters: &[u32]) -> bool {
    let Some(&first) = letters.first() else {
        return true;
    };
    let mut last_leader = first;
    for pair in letters.windows(2) {
        if pair[0] > pair[1] {
            if pair[1] < last_leader {
                return false;
            }
            last_leader = pair[1];
        }
    }
    true
}

pub(crate) fn parse_letters(text: &str) -> Result<Vec<u32>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<u32>()
                .map_err(|_| Error::malformed(format!("'{tok}' is not a positive integer letter")))
        })
        .collect()
}

impl fmt::Display for StirlingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, letter) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct WordJson {
    letters: String,
    order: usize,
    multiplicity: usize,
}

impl TryFrom<WordJson> for StirlingWord {
    type Error = Error;

    fn try_from(value: WordJson) -> Result<Self> {
        StirlingWord::new(parse_letters(&value.letters)?, value.order, value.multiplicity)
    }
}

impl From<StirlingWord> for WordJson {
    fn from(w: StirlingWord) -> Self {
        WordJson {
            letters: w.to_string(),
            order: w.order,
            multiplicity: w.multiplicity,
        }
    }
}
