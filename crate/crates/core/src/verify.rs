//! The full cross-validation sweep: every counting route against every other
//! and against exhaustive enumeration, within an enumeration budget.
//!
//! Checks never panic on a mismatch. Each one reports what it compared and
//! the first disagreement it found, so `flatstir verify` can print a report
//! and choose its exit code.

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::bijection::{phi, phi_inverse};
use crate::counting::{
    count_flattened_identity, count_flattened_series_approx, count_max_runs_k2, count_runs_2, count_runs_3,
    max_runs_bound, run_distribution_bruteforce, FlattenedCounter,
};
use crate::enumeration::{for_each_flattened, gen_gcp, gen_stirling, stirling_count, Budget};
use crate::partitions::ColoredPartition;
use crate::poly::IntPolynomial;
use crate::series::{descent_egf, descent_polynomial, egf_flattened, extract_descent_polynomial};
use crate::words::{StirlingWord, WordStats};
use crate::Result;

/// Reference totals and run-refined counts for `k = 2`, orders 1 through 10.
pub const REFERENCE_K2: [(u64, u64, &[u64]); 10] = [
    (1, 1, &[1]),
    (3, 2, &[1, 1]),
    (15, 6, &[1, 5]),
    (105, 24, &[1, 15, 8]),
    (945, 116, &[1, 37, 70, 8]),
    (10395, 648, &[1, 83, 374, 190]),
    (135135, 4088, &[1, 177, 1596, 2034, 280]),
    (2027025, 28640, &[1, 367, 6012, 15260, 6720, 280]),
    (34459425, 219920, &[1, 749, 20994, 93764, 88732, 15680]),
    (654729075, 1832224, &[1, 1515, 69842, 508538, 866796, 363132, 22400]),
];

/// Reference descent polynomials as `(n, k, coefficients)`.
pub const REFERENCE_POLYNOMIALS: [(usize, usize, &[i64]); 6] = [
    (3, 3, &[1, 9, 2]),
    (4, 3, &[1, 26, 36]),
    (5, 3, &[1, 63, 251, 90]),
    (3, 4, &[1, 13, 6]),
    (4, 4, &[1, 37, 84, 6]),
    (5, 4, &[1, 89, 546, 372]),
];

pub const WORKED_EXAMPLE_PARTITION: &str = "1_1 2_3 4_2 6_3 | 3_1 | 5_1";
pub const WORKED_EXAMPLE_WORD: &str = "1 2 2 2 2 6 6 6 6 1 4 4 4 4 1 1 3 3 3 3 5 5 5 5";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    /// Largest order enumerated exhaustively.
    pub max_n: usize,
    /// Largest multiplicity enumerated exhaustively.
    pub max_k: usize,
    /// Per-cell cap on enumerated objects; larger cells are skipped.
    pub budget: u64,
    /// Largest order for the non-enumerative count comparisons.
    pub count_max_n: usize,
    /// Largest multiplicity for the non-enumerative count comparisons.
    pub count_max_k: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_n: 8,
            max_k: 4,
            budget: 3_000_000,
            count_max_n: 25,
            count_max_k: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// How many comparisons were made, or the first mismatch.
    pub detail: String,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<Check>,
    /// Cells left out because they exceed the budget.
    pub skipped: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{verdict} {:<22} {:>7} ms  {}\n",
                c.name, c.elapsed_ms, c.detail
            ));
        }
        for s in &self.skipped {
            out.push_str(&format!("skip {s}\n"));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

/// Outcome of one check body: number of comparisons, or the first mismatch.
type Outcome = std::result::Result<usize, String>;

fn run(name: &str, body: impl FnOnce() -> Result<Outcome>) -> Check {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok(Ok(n)) => (true, format!("{n} comparisons")),
        Ok(Err(mismatch)) => (false, mismatch),
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        name: name.to_string(),
        passed,
        detail,
        elapsed_ms: start.elapsed().as_millis() as u64,
    }
}

macro_rules! ensure_eq {
    ($left:expr, $right:expr, $($ctx:tt)+) => {{
        let (l, r) = (&$left, &$right);
        if l != r {
            return Ok(Err(format!("{}: {:?} != {:?}", format!($($ctx)+), l, r)));
        }
    }};
}

fn big_vec(values: &[u64]) -> Vec<BigUint> {
    values.iter().map(|&v| BigUint::from(v)).collect()
}

/// `(n, k)` cells small enough to enumerate.
struct Cells {
    stirling: Vec<(usize, usize)>,
    partitions: Vec<(usize, usize)>,
    skipped: Vec<String>,
}

fn cells(config: &VerifyConfig) -> Cells {
    let budget = Budget::new(config.budget);
    let mut out = Cells {
        stirling: Vec::new(),
        partitions: Vec::new(),
        skipped: Vec::new(),
    };
    for k in 1..=config.max_k {
        let mut counter = FlattenedCounter::new(k);
        for n in 1..=config.max_n {
            if budget.check(&stirling_count(n, k)).is_ok() {
                out.stirling.push((n, k));
            } else {
                out.skipped
                    .push(format!("enumeration of Q_{n}^{k}: {} words", stirling_count(n, k)));
            }
            let gcp = counter.count(n).expect("n >= 1");
            if budget.check(&gcp).is_ok() {
                out.partitions.push((n, k));
            } else {
                out.skipped.push(format!("good partitions n={n} k={k}: {gcp} objects"));
            }
        }
    }
    out
}

pub fn run_all(config: &VerifyConfig) -> VerifyReport {
    let budget = Budget::new(config.budget);
    let cells = cells(config);
    let checks = vec![
        run("reference-totals", reference_totals),
        run("count-agreement", || count_agreement(config)),
        run("series-approximation", series_approximation),
        run("bell-numbers", bell_numbers),
        run("run-distribution", || run_distributions(&cells.stirling, budget)),
        run("closed-form-runs", || closed_form_runs(&cells.stirling, budget)),
        run("word-statistics", || word_statistics(&cells.stirling, budget)),
        run("bijection", || bijection(&cells.partitions, &cells.stirling, budget)),
        run("worked-example", worked_example),
        run("descent-polynomials", || descent_polynomials(&cells.stirling, budget)),
        run("specializations", || specializations(config)),
    ];
    VerifyReport {
        config: *config,
        checks,
        skipped: cells.skipped,
    }
}

fn reference_totals() -> Result<Outcome> {
    let egf = egf_flattened(2, REFERENCE_K2.len());
    let mut counter = FlattenedCounter::new(2);
    for (i, &(stirling, total, _)) in REFERENCE_K2.iter().enumerate() {
        let n = i + 1;
        let total = BigUint::from(total);
        ensure_eq!(stirling_count(n, 2), BigUint::from(stirling), "|Q_{n}^2|");
        ensure_eq!(counter.count(n)?, total, "recurrence n={n}");
        ensure_eq!(count_flattened_identity(n, 2)?, total, "identity n={n}");
        ensure_eq!(egf.egf_count(n - 1)?, total, "egf n={n}");
    }
    Ok(Ok(REFERENCE_K2.len() * 4))
}

fn count_agreement(config: &VerifyConfig) -> Result<Outcome> {
    let mut compared = 0;
    for k in 1..=config.count_max_k {
        let egf = egf_flattened(k, config.count_max_n);
        let mut counter = FlattenedCounter::new(k);
        for n in 1..=config.count_max_n {
            let rec = counter.count(n)?;
            ensure_eq!(
                count_flattened_identity(n, k)?,
                rec,
                "identity vs recurrence n={n} k={k}"
            );
            ensure_eq!(egf.egf_count(n - 1)?, rec, "egf vs recurrence n={n} k={k}");
            compared += 2;
        }
    }
    Ok(Ok(compared))
}

fn series_approximation() -> Result<Outcome> {
    let tolerance = BigRational::new(BigInt::one(), BigInt::from(1_000_000));
    let mut compared = 0;
    for k in 1..=4 {
        let mut counter = FlattenedCounter::new(k);
        for n in 1..=15 {
            let exact = counter.count(n)?;
            let approx = count_flattened_series_approx(n - 1, k, 128)?;
            ensure_eq!(approx.rounded, exact, "rounded approximation n={n} k={k}");
            let exact = BigRational::from_integer(BigInt::from(exact));
            let rel = ((approx.approximation.to_rational() - &exact) / &exact).abs();
            if rel >= tolerance {
                return Ok(Err(format!(
                    "relative error {} at n={n} k={k}",
                    rel.to_f64().unwrap_or(f64::NAN)
                )));
            }
            compared += 1;
        }
    }
    Ok(Ok(compared))
}

/// Bell numbers from the Bell triangle: each row starts with the last entry
/// of the previous row and adds the entry above.
pub fn bell_triangle(count: usize) -> Vec<BigUint> {
    let mut bells = vec![BigUint::one()];
    let mut row = vec![BigUint::one()];
    while bells.len() < count {
        let mut next = vec![row.last().expect("row is nonempty").clone()];
        for v in &row {
            let sum = next.last().expect("next is nonempty") + v;
            next.push(sum);
        }
        bells.push(next[0].clone());
        row = next;
    }
    bells.truncate(count);
    bells
}

fn bell_numbers() -> Result<Outcome> {
    let bells = bell_triangle(21);
    let mut counter = FlattenedCounter::new(1);
    for (m, bell) in bells.iter().enumerate() {
        ensure_eq!(
            counter.count(m + 1)?,
            *bell,
            "k=1 count of order {} vs Bell({m})",
            m + 1
        );
    }
    Ok(Ok(bells.len()))
}

fn run_distributions(cells: &[(usize, usize)], budget: Budget) -> Result<Outcome> {
    let mut compared = 0;
    for &(n, k) in cells {
        let runs = run_distribution_bruteforce(n, k, budget)?;
        let total: BigUint = runs.iter().sum();
        ensure_eq!(
            total,
            FlattenedCounter::new(k).count(n)?,
            "sum of run counts n={n} k={k}"
        );
        ensure_eq!(runs.len(), max_runs_bound(n, k), "largest run count n={n} k={k}");
        if k == 2 {
            if let Some((_, _, reference)) = REFERENCE_K2.get(n - 1) {
                ensure_eq!(runs, big_vec(reference), "reference row n={n}");
            }
        }
        compared += 1;
    }
    Ok(Ok(compared))
}

fn closed_form_runs(cells: &[(usize, usize)], budget: Budget) -> Result<Outcome> {
    let mut compared = 0;
    for &(n, k) in cells {
        let runs = run_distribution_bruteforce(n, k, budget)?;
        let column = |s: usize| runs.get(s - 1).cloned().unwrap_or_default();
        ensure_eq!(count_runs_2(n, k)?, column(2), "two-run count n={n} k={k}");
        ensure_eq!(count_runs_3(n, k)?, column(3), "three-run count n={n} k={k}");
        compared += 2;
        if k == 2 {
            ensure_eq!(
                count_max_runs_k2(n)?,
                column(max_runs_bound(n, 2)),
                "max-run count n={n}"
            );
            compared += 1;
        }
    }
    Ok(Ok(compared))
}

fn word_statistics(cells: &[(usize, usize)], budget: Budget) -> Result<Outcome> {
    let mut words = 0usize;
    for &(n, k) in cells {
        let mut stream = gen_stirling(n, k, budget)?;
        let mut bad: Option<(Vec<u32>, WordStats)> = None;
        for_each_flattened(&mut stream, |letters| {
            let s = WordStats::of_letters(letters);
            if bad.is_none() && (s.runs != s.descents + 1 || s.descents + s.plateaus + s.ascents != n * k - 1) {
                bad = Some((letters.to_vec(), s));
            }
            words += 1;
        });
        if let Some((letters, s)) = bad {
            return Ok(Err(format!("statistics identity fails on {letters:?}: {s:?}")));
        }
    }
    Ok(Ok(words))
}

fn bijection(partitions: &[(usize, usize)], stirling: &[(usize, usize)], budget: Budget) -> Result<Outcome> {
    let mut compared = 0;
    for &(n, k) in partitions {
        let compare_images = stirling.contains(&(n, k));
        let mut images = BTreeSet::new();
        for p in gen_gcp(n, k, budget)? {
            let w = phi(&p)?;
            let back = phi_inverse(&w)?;
            ensure_eq!(back, p, "round trip n={n} k={k}");
            ensure_eq!(
                w.stats().descents,
                p.block_descent_count(),
                "descents of the image of {p}"
            );
            if compare_images {
                images.insert(w.into_letters());
            }
            compared += 1;
        }
        if compare_images {
            let mut filtered = BTreeSet::new();
            let mut stream = gen_stirling(n, k, budget)?;
            for_each_flattened(&mut stream, |letters| {
                filtered.insert(letters.to_vec());
            });
            if images != filtered {
                return Ok(Err(format!(
                    "image of the bijection differs from the flattened set at n={n} k={k} ({} vs {} words)",
                    images.len(),
                    filtered.len()
                )));
            }
        }
    }
    Ok(Ok(compared))
}

fn worked_example() -> Result<Outcome> {
    let p = ColoredPartition::parse(WORKED_EXAMPLE_PARTITION, 4)?;
    let w = StirlingWord::parse(WORKED_EXAMPLE_WORD, 4)?;
    ensure_eq!(phi(&p)?, w, "forward image");
    ensure_eq!(phi_inverse(&w)?, p, "inverse image");
    Ok(Ok(2))
}

fn descent_polynomials(cells: &[(usize, usize)], budget: Budget) -> Result<Outcome> {
    let mut compared = 0;
    for &(n, k) in cells {
        let from_egf = descent_polynomial(n, k)?;
        let brute = crate::analysis::descent_polynomial_bruteforce(n, k, budget)?;
        ensure_eq!(from_egf, brute, "descent polynomial n={n} k={k}");
        compared += 1;
    }
    for &(n, k, coeffs) in &REFERENCE_POLYNOMIALS {
        ensure_eq!(
            descent_polynomial(n, k)?,
            IntPolynomial::from_i64(coeffs),
            "reference polynomial n={n} k={k}"
        );
        compared += 1;
    }
    Ok(Ok(compared))
}

fn specializations(config: &VerifyConfig) -> Result<Outcome> {
    let order = config.count_max_n;
    let mut compared = 0;
    for k in 1..=config.count_max_k.min(5) {
        let collapsed = descent_egf(k, order).eval_t(&BigRational::one());
        let totals = egf_flattened(k, order);
        for n in 0..=order {
            ensure_eq!(collapsed.coeff(n), totals.coeff(n), "t = 1 coefficient z^{n} k={k}");
            compared += 1;
        }
        let egf = descent_egf(k, order.min(12));
        for n in 0..=order.min(12) {
            let p = extract_descent_polynomial(&egf, n)?;
            if p.coeffs().iter().any(|c| c.is_negative()) || p.coeff(0) != BigInt::one() {
                return Ok(Err(format!("descent polynomial z^{n} k={k} is {p}")));
            }
            if !p.is_zero() && p.degree().unwrap_or(0) + 1 != max_runs_bound(n + 1, k) {
                return Ok(Err(format!("degree of {p} at order {} k={k}", n + 1)));
            }
            compared += 1;
        }
    }
    Ok(Ok(compared))
}
