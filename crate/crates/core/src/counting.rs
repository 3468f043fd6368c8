//! Exact counts of flattened k-Stirling permutations: totals via recurrence,
//! via a Stirling-number identity and via a convergent series, plus the
//! closed forms for two runs, three runs and (for `k = 2`) maximum runs.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::{for_each_flattened, gen_stirling, stirling_count, Budget};
use crate::{Error, Result};

pub fn binomial(n: u64, r: u64) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn pow(base: u64, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), exp)
}

fn require_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("order n must be at least 1"));
    }
    Ok(())
}

fn require_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::domain("multiplicity k must be at least 1"));
    }
    Ok(())
}

/// Stirling number of the second kind.
///
/// `S(0,0) = 1`, `S(a,0) = 0` for `a >= 1`, and zero whenever `b > a` or an
/// argument is negative.
pub fn stirling2(a: i64, b: i64) -> BigUint {
    if a < 0 || b < 0 || b > a {
        return BigUint::zero();
    }
    let (a, b) = (a as usize, b as usize);
    Stirling2Table::new(a).get(a, b)
}

/// Triangle of `S(i, j)` for `0 <= j <= i <= max`.
#[derive(Clone, Debug)]
pub struct Stirling2Table {
    rows: Vec<Vec<BigUint>>,
}

impl Stirling2Table {
    pub fn new(max: usize) -> Self {
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for i in 1..=max {
            let prev = &rows[i - 1];
            let mut row = vec![BigUint::zero(); i + 1];
            for j in 1..=i {
                let mut v = if j < i { &prev[j] * j } else { BigUint::zero() };
                v += &prev[j - 1];
                row[j] = v;
            }
            rows.push(row);
        }
        Stirling2Table { rows }
    }

    pub fn get(&self, a: usize, b: usize) -> BigUint {
        self.rows.get(a).and_then(|row| row.get(b)).cloned().unwrap_or_default()
    }
}

/// Memoized `|flt(Q_n^k)|` for one fixed `k`, grown on demand.
///
/// Not shared implicitly: callers that want to share one across threads wrap
/// it in a lock.
#[derive(Clone, Debug)]
pub struct FlattenedCounter {
    k: usize,
    /// `values[n]` for `n >= 1`; index 0 unused.
    values: Vec<BigUint>,
}

impl FlattenedCounter {
    pub fn new(k: usize) -> Self {
        FlattenedCounter {
            k,
            values: vec![BigUint::zero(), BigUint::one()],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `f(m+1) = (k-1) f(m) + sum_{r=1}^{m} C(m-1, r-1) k^{r-1} f(m-r+1)`, `f(1) = 1`.
    pub fn count(&mut self, n: usize) -> Result<BigUint> {
        require_order(n)?;
        require_k(self.k)?;
        let k = self.k as u64;
        while self.values.len() <= n {
            let m = self.values.len() - 1;
            let mut next = &self.values[m] * (k - 1);
            let mut k_pow = BigUint::one();
            for r in 1..=m {
                next += binomial(m as u64 - 1, r as u64 - 1) * &k_pow * &self.values[m - r + 1];
                k_pow *= k;
            }
            self.values.push(next);
        }
        Ok(self.values[n].clone())
    }
}

pub fn count_flattened_recurrence(n: usize, k: usize) -> Result<BigUint> {
    require_k(k)?;
    FlattenedCounter::new(k).count(n)
}

/// `sum_{i=0}^{m} C(m,i) (k-1)^i sum_{r=0}^{m-i} k^{m-i-r} S(m-i, r)` with `m = n - 1`.
pub fn count_flattened_identity(n: usize, k: usize) -> Result<BigUint> {
    require_order(n)?;
    require_k(k)?;
    let m = n - 1;
    let table = Stirling2Table::new(m);
    let k = k as u64;
    let mut total = BigUint::zero();
    for i in 0..=m {
        let rest = m - i;
        let inner: BigUint = (0..=rest).map(|r| pow(k, rest - r) * table.get(rest, r)).sum();
        total += binomial(m as u64, i as u64) * pow(k - 1, i) * inner;
    }
    Ok(total)
}

/// A binary fixed-point real: `mantissa / 2^frac_bits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPoint {
    pub mantissa: BigInt,
    pub frac_bits: u32,
}

impl FixedPoint {
    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), BigInt::one() << self.frac_bits)
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.to_rational();
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    }

    pub fn round(&self) -> BigInt {
        if self.frac_bits == 0 {
            return self.mantissa.clone();
        }
        (&self.mantissa + (BigInt::one() << (self.frac_bits - 1))) >> self.frac_bits
    }

    /// Decimal expansion truncated to `digits` places.
    pub fn to_decimal(&self, digits: usize) -> String {
        let sign = if self.mantissa.is_negative() { "-" } else { "" };
        let abs = self.mantissa.abs();
        let int = &abs >> self.frac_bits;
        let frac = abs - (&int << self.frac_bits);
        let scaled = (frac * num_traits::pow(BigInt::from(10), digits)) >> self.frac_bits;
        format!("{sign}{int}.{:0>width$}", scaled.to_string(), width = digits)
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(30))
    }
}

#[derive(Clone, Debug)]
pub struct SeriesApproximation {
    pub approximation: FixedPoint,
    pub rounded: BigUint,
    /// Number of series terms summed.
    pub terms: usize,
}

const SERIES_TERM_CAP: usize = 100_000;

/// `e^{-1/k} sum_{r>=0} (kr+k-1)^n / (r! k^r)`, the count of order `n + 1`.
///
/// Summation stops once the term ratio has dropped below 1/2 (it decreases
/// monotonically in `r`) and the geometric tail bound is below
/// `2^{-precision_bits/2}` of the partial sum.
pub fn count_flattened_series_approx(n: usize, k: usize, precision_bits: u32) -> Result<SeriesApproximation> {
    require_k(k)?;
    if precision_bits < 64 {
        return Err(Error::domain(format!(
            "precision_bits must be at least 64, got {precision_bits}"
        )));
    }
    let guard = 32;
    let work_bits = precision_bits + guard;
    let one = BigUint::one() << work_bits;
    let k64 = k as u64;

    let term = |r: u64, den: &BigUint| -> (BigUint, BigUint) {
        (num_traits::pow(BigUint::from(k64 * r + k64 - 1), n), den.clone())
    };

    let mut sum = BigUint::zero();
    // Exact partial sum kept as a rational for the stopping test.
    let mut exact_partial = BigRational::zero();
    let mut den = BigUint::one();
    let mut r: u64 = 0;
    let mut terms = 0;
    loop {
        if terms >= SERIES_TERM_CAP {
            return Err(Error::Numeric(format!(
                "series for n={n}, k={k} did not converge within {SERIES_TERM_CAP} terms (partial sum {})",
                exact_partial
            )));
        }
        let (num, d) = term(r, &den);
        sum += (&num << work_bits) / &d;
        exact_partial += BigRational::new(BigInt::from(num), BigInt::from(d));
        terms += 1;

        let den_next = &den * (r + 1) * k64;
        let den_after = &den_next * (r + 2) * k64;
        let (next_num, _) = term(r + 1, &den_next);
        let (after_num, _) = term(r + 2, &den_after);
        let next = BigRational::new(BigInt::from(next_num), BigInt::from(den_next.clone()));
        let after = BigRational::new(BigInt::from(after_num), BigInt::from(den_after));
        let ratio_small = &after * BigInt::from(2) < next;
        if ratio_small && !exact_partial.is_zero() {
            let tail_bound = &next * BigInt::from(2);
            let threshold = &exact_partial / BigRational::from_integer(BigInt::one() << (precision_bits / 2));
            if tail_bound < threshold {
                break;
            }
        }
        den = den_next;
        r += 1;
    }

    // e^{-1/k} by its alternating series, summed well past the working precision.
    let mut exp_fixed = BigInt::zero();
    let mut exp_den = BigUint::one();
    let mut j: u64 = 0;
    loop {
        let t = BigInt::from(&one / &exp_den);
        if t.is_zero() {
            break;
        }
        if j.is_multiple_of(2) {
            exp_fixed += t;
        } else {
            exp_fixed -= t;
        }
        j += 1;
        exp_den *= j * k64;
    }

    let product = (BigInt::from(sum) * exp_fixed) >> work_bits;
    let approximation = FixedPoint {
        mantissa: product >> guard,
        frac_bits: precision_bits,
    };
    let rounded = approximation
        .round()
        .to_biguint()
        .ok_or_else(|| Error::Numeric("negative series value".into()))?;
    Ok(SeriesApproximation {
        approximation,
        rounded,
        terms,
    })
}

fn to_nonnegative(value: BigInt, what: &str) -> Result<BigUint> {
    value
        .to_biguint()
        .ok_or_else(|| Error::Consistency(format!("{what} evaluated to a negative number")))
}

/// Flattened words with exactly two runs: `(2k-1)(2^{n-1}-1) - k(n-1)`.
pub fn count_runs_2(n: usize, k: usize) -> Result<BigUint> {
    require_order(n)?;
    require_k(k)?;
    let k = BigInt::from(k);
    let two_pow = BigInt::one() << (n - 1);
    let value = (&k * 2 - 1) * (two_pow - 1) - &k * (n - 1);
    to_nonnegative(value, "two-run formula")
}

/// Flattened words with exactly three runs.
///
/// Four contributions: one non-singleton block containing 1, one not
/// containing 1, two non-singleton blocks one of which contains 1, and two
/// non-singleton blocks avoiding 1.
pub fn count_runs_3(n: usize, k: usize) -> Result<BigUint> {
    require_order(n)?;
    require_k(k)?;
    let kk = BigInt::from(k);
    let n_i = BigInt::from(n);
    let three_pow = |e: usize| num_traits::pow(BigInt::from(3), e);
    let two_pow = |e: usize| BigInt::one() << e;

    let one_block_with_one = (&kk - 1) * (&kk - 2) * (three_pow(n - 1) - two_pow(n) + 1);
    let one_block_without_one = &kk * (&kk - 1) * (three_pow(n) - two_pow(n) * 6 + &n_i * 6 + 3);

    let pair_sum = |lo: usize| -> BigInt {
        let mut total = BigUint::zero();
        let m = (n - 1) as u64;
        for i in lo..=n.saturating_sub(3) {
            let rest = m - i as u64;
            let inner: BigUint = (2..=rest).map(|j| binomial(rest, j)).sum();
            total += binomial(m, i as u64) * inner;
        }
        BigInt::from_biguint(Sign::Plus, total)
    };
    let (pairs_with_one, pairs_without_one) = if n >= 4 {
        (pair_sum(1), pair_sum(2))
    } else {
        (BigInt::zero(), BigInt::zero())
    };

    // Everything over a common denominator of 12.
    let twelfths: BigInt = one_block_with_one * 6
        + one_block_without_one
        + &kk * (&kk - 1) * pairs_with_one * 12
        + &kk * &kk * pairs_without_one * 6;
    let (q, rem) = twelfths.div_rem(&BigInt::from(12));
    if !rem.is_zero() {
        return Err(Error::Consistency(format!(
            "three-run formula not integral at n={n}, k={k}"
        )));
    }
    to_nonnegative(q, "three-run formula")
}

/// Flattened 2-Stirling permutations of order `n` with the maximum number of
/// runs. With `m = (n-1)/3`: `(3m+1)!/(m! 3^m)` when `n = 3m+1` or `3m+2`, and
/// `(9m+10)/4 * (3m+2)!/(m! 3^m)` when `n = 3m+3`.
pub fn count_max_runs_k2(n: usize) -> Result<BigUint> {
    require_order(n)?;
    let m = (n - 1) / 3;
    let denom = factorial(m as u64) * pow(3, m);
    let value = if n.is_multiple_of(3) {
        let num = factorial(3 * m as u64 + 2) * (9 * m as u64 + 10);
        let den = denom * 4u32;
        let (q, rem) = num.div_rem(&den);
        if !rem.is_zero() {
            return Err(Error::Consistency(format!("max-run formula not integral at n={n}")));
        }
        q
    } else {
        factorial(3 * m as u64 + 1) / denom
    };
    Ok(value)
}

/// `ceil(kn / (k+1))`, the largest run count of a flattened word.
pub fn max_runs_bound(n: usize, k: usize) -> usize {
    (k * n).div_ceil(k + 1)
}

/// Counts flattened words of order `n` by run count. Entry `s - 1` holds the
/// number with `s` runs; trailing zeros are dropped.
pub fn run_distribution_bruteforce(n: usize, k: usize, budget: Budget) -> Result<Vec<BigUint>> {
    let streams = gen_stirling(n, k, budget)?.split();
    let width = max_runs_bound(n, k) + 1;
    let tallies: Vec<Vec<u64>> = streams
        .into_par_iter()
        .map(|mut stream| {
            let mut tally = vec![0u64; width];
            for_each_flattened(&mut stream, |letters| {
                let runs = 1 + letters.windows(2).filter(|p| p[0] > p[1]).count();
                tally[runs - 1] += 1;
            });
            tally
        })
        .collect();
    let mut merged = vec![0u64; width];
    for tally in tallies {
        for (m, t) in merged.iter_mut().zip(tally) {
            *m += t;
        }
    }
    while merged.last() == Some(&0) {
        merged.pop();
    }
    Ok(merged.into_iter().map(BigUint::from).collect())
}

/// Where the run-refined columns of a [`CountTable`] come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunSource {
    /// Exhaustive enumeration; rows over budget get totals only.
    BruteForce,
    /// Coefficients of the bivariate descent generating function.
    Egf,
}

/// One row of a count table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub n: usize,
    /// `|Q_n^k|`.
    #[serde(with = "crate::bigser")]
    pub stirling_total: BigUint,
    /// `|flt(Q_n^k)|`.
    #[serde(with = "crate::bigser")]
    pub total: BigUint,
    /// Entry `s - 1` counts flattened words with `s` runs.
    #[serde(with = "crate::bigser::opt_vec", default)]
    pub run_refined: Option<Vec<BigUint>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub k: usize,
    pub rows: Vec<CountRow>,
    /// Rows whose run columns were skipped for budget reasons.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notices: Vec<String>,
}

impl CountTable {
    pub fn build(k: usize, max_n: usize, budget: Budget, source: RunSource) -> Result<CountTable> {
        require_k(k)?;
        let mut counter = FlattenedCounter::new(k);
        let totals: Vec<BigUint> = (1..=max_n).map(|n| counter.count(n)).collect::<Result<_>>()?;

        let runs: Vec<Option<Vec<BigUint>>> = match source {
            RunSource::Egf if max_n > 0 => {
                let egf = crate::series::descent_egf(k, max_n - 1);
                (1..=max_n)
                    .map(|n| {
                        let poly = crate::series::extract_descent_polynomial(&egf, n - 1)?;
                        Ok(Some(poly.coeffs().iter().map(|c| c.magnitude().clone()).collect()))
                    })
                    .collect::<Result<_>>()?
            }
            RunSource::Egf => Vec::new(),
            RunSource::BruteForce => (1..=max_n)
                .into_par_iter()
                .map(|n| match run_distribution_bruteforce(n, k, budget) {
                    Ok(row) => Ok(Some(row)),
                    Err(Error::Budget { .. }) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_>>()?,
        };

        let mut notices = Vec::new();
        let rows = (1..=max_n)
            .zip(totals)
            .zip(runs)
            .map(|((n, total), run_refined)| {
                if run_refined.is_none() {
                    notices.push(format!(
                        "n={n}: run columns omitted, enumeration exceeds budget {}",
                        budget.limit
                    ));
                }
                CountRow {
                    n,
                    stirling_total: stirling_count(n, k),
                    total,
                    run_refined,
                }
            })
            .collect();
        Ok(CountTable { k, rows, notices })
    }

    fn run_columns(&self) -> usize {
        self.rows
            .iter()
            .filter_map(|r| r.run_refined.as_ref().map(Vec::len))
            .max()
            .unwrap_or(0)
    }

    fn cells(&self, row: &CountRow) -> Vec<String> {
        let mut cells = vec![row.n.to_string(), row.stirling_total.to_string(), row.total.to_string()];
        for s in 0..self.run_columns() {
            cells.push(
                row.run_refined
                    .as_ref()
                    .and_then(|r| r.get(s))
                    .map(ToString::to_string)
                    .unwrap_or_default(),
            );
        }
        cells
    }

    fn header(&self) -> Vec<String> {
        // Pipes are escaped so the cells survive Markdown table syntax.
        let mut h = vec!["n".to_string(), "\\|Q_n\\|".to_string(), "\\|flt(Q_n)\\|".to_string()];
        h.extend((1..=self.run_columns()).map(|s| format!("\\|flt_{s}(Q_n)\\|")));
        h
    }

    pub fn to_markdown(&self) -> String {
        let header = self.header();
        let mut out = format!("| {} |\n", header.join(" | "));
        out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
        for row in &self.rows {
            out.push_str(&format!("| {} |\n", self.cells(row).join(" | ")));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let header: Vec<String> = std::iter::once("n".to_string())
            .chain(["stirling_total".to_string(), "flattened_total".to_string()])
            .chain((1..=self.run_columns()).map(|s| format!("runs_{s}")))
            .collect();
        let mut out = header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&self.cells(row).join(","));
            out.push('\n');
        }
        out
    }
}
