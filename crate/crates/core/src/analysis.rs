//! Descent polynomials by enumeration, and evidence gathering for the open
//! questions about them: unimodality, real-rootedness, and the joint
//! distribution of descents, plateaus and ascents.
//!
//! Nothing here asserts a conjecture; verdicts are reported, not enforced.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumeration::{for_each_flattened, gen_stirling, Budget};
use crate::poly::{IntPolynomial, RatPolynomial};
use crate::series::{descent_egf, extract_descent_polynomial};
use crate::words::WordStats;
use crate::{Error, Result};

/// `sum over flattened words of order n of t^des`, by enumeration.
pub fn descent_polynomial_bruteforce(n: usize, k: usize, budget: Budget) -> Result<IntPolynomial> {
    Ok(joint_distribution(n, k, budget)?.descent_marginal())
}

/// Coefficients weakly rise and then weakly fall. The zero polynomial counts
/// as unimodal.
pub fn is_unimodal(p: &IntPolynomial) -> bool {
    let c = p.coeffs();
    let mut i = 0;
    while i + 1 < c.len() && c[i] <= c[i + 1] {
        i += 1;
    }
    while i + 1 < c.len() && c[i] >= c[i + 1] {
        i += 1;
    }
    i + 1 >= c.len()
}

/// Exact test that every complex root of `p` is real.
///
/// Reduces to the square-free part `p / gcd(p, p')`, then counts its distinct
/// real roots inside the Cauchy bound with a Sturm sequence and compares with
/// its degree.
pub fn is_real_rooted(p: &IntPolynomial) -> Result<bool> {
    if p.is_zero() {
        return Err(Error::domain("real-rootedness of the zero polynomial is undefined"));
    }
    let p = p.to_rational();
    let square_free = if p.degree() == Some(0) {
        p
    } else {
        p.div_rem(&p.gcd(&p.derivative())).0
    };
    let degree = square_free.degree().unwrap_or(0);
    if degree == 0 {
        return Ok(true);
    }
    Ok(distinct_real_roots(&square_free) == degree)
}

/// Distinct real roots of a nonconstant polynomial.
pub fn distinct_real_roots(p: &RatPolynomial) -> usize {
    let bound = cauchy_bound(p);
    let chain = sturm_chain(p);
    sign_variations(&chain, &-bound.clone()) - sign_variations(&chain, &bound)
}

/// `1 + max |a_i / a_d|`; every root lies strictly inside it.
fn cauchy_bound(p: &RatPolynomial) -> BigRational {
    let lead = p.leading().expect("nonzero polynomial").abs();
    let d = p.degree().unwrap_or(0);
    let max = p.coeffs()[..d]
        .iter()
        .map(|c| c.abs() / &lead)
        .max()
        .unwrap_or_else(BigRational::zero);
    max + BigRational::from_integer(BigInt::from(1))
}

fn sturm_chain(p: &RatPolynomial) -> Vec<RatPolynomial> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let len = chain.len();
        if chain[len - 1].is_zero() {
            chain.pop();
            break;
        }
        let rem = chain[len - 2].div_rem(&chain[len - 1]).1;
        if rem.is_zero() {
            break;
        }
        chain.push(rem.neg());
    }
    chain
}

fn sign_variations(chain: &[RatPolynomial], x: &BigRational) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|q| q.eval(x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Tally of `(descents, plateaus, ascents)` over the flattened words of one order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "JointJson", from = "JointJson")]
pub struct JointDistribution {
    pub n: usize,
    pub k: usize,
    pub counts: BTreeMap<(usize, usize, usize), u64>,
}

impl JointDistribution {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn descent_marginal(&self) -> IntPolynomial {
        let mut coeffs: Vec<BigInt> = Vec::new();
        for (&(des, _, _), &count) in &self.counts {
            if coeffs.len() <= des {
                coeffs.resize(des + 1, BigInt::zero());
            }
            coeffs[des] += count;
        }
        IntPolynomial::new(coeffs)
    }

    /// Rows `{"des","plat","asc","count"}`, the JSON form used by the CLI.
    pub fn rows(&self) -> Vec<JointRow> {
        self.counts
            .iter()
            .map(|(&(des, plat, asc), &count)| JointRow { des, plat, asc, count })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointRow {
    pub des: usize,
    pub plat: usize,
    pub asc: usize,
    pub count: u64,
}

/// JSON keys must be strings, so the tuple-keyed map travels as rows.
#[derive(Serialize, Deserialize)]
struct JointJson {
    n: usize,
    k: usize,
    rows: Vec<JointRow>,
}

impl From<JointDistribution> for JointJson {
    fn from(d: JointDistribution) -> Self {
        JointJson {
            rows: d.rows(),
            n: d.n,
            k: d.k,
        }
    }
}

impl From<JointJson> for JointDistribution {
    fn from(j: JointJson) -> Self {
        let counts = j.rows.into_iter().map(|r| ((r.des, r.plat, r.asc), r.count)).collect();
        JointDistribution { n: j.n, k: j.k, counts }
    }
}

/// Exhaustive `(des, plat, asc)` tally; per-thread maps merged at the end.
pub fn joint_distribution(n: usize, k: usize, budget: Budget) -> Result<JointDistribution> {
    let streams = gen_stirling(n, k, budget)?.split();
    let parts: Vec<BTreeMap<(usize, usize, usize), u64>> = streams
        .into_par_iter()
        .map(|mut stream| {
            let mut tally = BTreeMap::new();
            for_each_flattened(&mut stream, |letters| {
                let s = WordStats::of_letters(letters);
                *tally.entry((s.descents, s.plateaus, s.ascents)).or_insert(0) += 1;
            });
            tally
        })
        .collect();
    let mut counts = BTreeMap::new();
    for part in parts {
        for (key, v) in part {
            *counts.entry(key).or_insert(0) += v;
        }
    }
    Ok(JointDistribution { n, k, counts })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureEntry {
    pub n: usize,
    pub k: usize,
    pub polynomial: IntPolynomial,
    pub unimodal: bool,
    pub real_rooted: bool,
}

/// Unimodality and real-rootedness verdicts for every descent polynomial of
/// orders `1..=max_n`, taken from the generating function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub k: usize,
    pub max_n: usize,
    pub entries: Vec<ConjectureEntry>,
}

impl ConjectureReport {
    pub fn build(k: usize, max_n: usize) -> Result<Self> {
        if k == 0 || max_n == 0 {
            return Err(Error::domain("conjecture report needs k >= 1 and max_n >= 1"));
        }
        let egf = descent_egf(k, max_n - 1);
        let polys: Vec<IntPolynomial> = (1..=max_n)
            .map(|n| extract_descent_polynomial(&egf, n - 1))
            .collect::<Result<_>>()?;
        let entries = polys
            .into_par_iter()
            .enumerate()
            .map(|(i, polynomial)| {
                Ok(ConjectureEntry {
                    n: i + 1,
                    k,
                    unimodal: is_unimodal(&polynomial),
                    real_rooted: is_real_rooted(&polynomial)?,
                    polynomial,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ConjectureReport { k, max_n, entries })
    }

    pub fn all_unimodal(&self) -> bool {
        self.entries.iter().all(|e| e.unimodal)
    }

    pub fn all_real_rooted(&self) -> bool {
        self.entries.iter().all(|e| e.real_rooted)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| n | k | polynomial | unimodal | real-rooted |\n|---|---|---|---|---|\n");
        for e in &self.entries {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} |\n",
                e.n,
                e.k,
                e.polynomial,
                yes_no(e.unimodal),
                yes_no(e.real_rooted)
            ));
        }
        out
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn unimodality() {
        assert!(is_unimodal(&poly(&[1, 37, 70, 8])));
        assert!(!is_unimodal(&poly(&[1, 0, 1])));
        assert!(is_unimodal(&poly(&[5])));
        assert!(is_unimodal(&IntPolynomial::zero()));
        assert!(is_unimodal(&poly(&[2, 2, 2])));
        assert!(!is_unimodal(&poly(&[3, 1, 2, 1])));
    }

    #[test]
    fn real_rootedness() {
        assert!(is_real_rooted(&poly(&[1, 2, 1])).unwrap());
        assert!(!is_real_rooted(&poly(&[1, 1, 1])).unwrap());
        assert!(is_real_rooted(&poly(&[1, 37, 70, 8])).unwrap());
        assert!(is_real_rooted(&poly(&[7])).unwrap());
        assert!(is_real_rooted(&poly(&[0, 0, 3])).unwrap());
        // (t^2 + 1)(t - 1): one real root, degree 3.
        assert!(!is_real_rooted(&poly(&[-1, 1, -1, 1])).unwrap());
        // (t+1)^3 (t-2)^2
        let p = poly(&[1, 3, 3, 1]).to_rational().mul(&poly(&[4, -4, 1]).to_rational());
        let ints: Vec<i64> = p.coeffs().iter().map(|c| c.to_integer().try_into().unwrap()).collect();
        assert!(is_real_rooted(&poly(&ints)).unwrap());
        assert!(is_real_rooted(&IntPolynomial::zero()).is_err());
    }

    #[test]
    fn sturm_counts() {
        // (t-1)(t-2)(t-3)
        let p = poly(&[-6, 11, -6, 1]).to_rational();
        assert_eq!(distinct_real_roots(&p), 3);
        let p = poly(&[1, 0, 1]).to_rational();
        assert_eq!(distinct_real_roots(&p), 0);
    }

    #[test]
    fn brute_force_polynomials() {
        let b = Budget::default();
        assert_eq!(descent_polynomial_bruteforce(3, 3, b).unwrap(), poly(&[1, 9, 2]));
        assert_eq!(
            descent_polynomial_bruteforce(5, 4, b).unwrap(),
            poly(&[1, 89, 546, 372])
        );
        for k in 1..5 {
            assert_eq!(descent_polynomial_bruteforce(1, k, b).unwrap(), poly(&[1]));
        }
    }

    #[test]
    fn joint_small() {
        let b = Budget::default();
        let j = joint_distribution(1, 2, b).unwrap();
        assert_eq!(j.counts, BTreeMap::from([((0, 1, 0), 1)]));
        // 1122 -> (0,2,1); 1221 -> (1,1,1)
        let j = joint_distribution(2, 2, b).unwrap();
        assert_eq!(j.counts, BTreeMap::from([((0, 2, 1), 1), ((1, 1, 1), 1)]));
        let j = joint_distribution(5, 2, b).unwrap();
        assert_eq!(j.descent_marginal(), poly(&[1, 37, 70, 8]));
        assert_eq!(j.total(), 116);
        for &(d, p, a) in j.counts.keys() {
            assert_eq!(d + p + a, 9);
        }
        let json = serde_json::to_string(&j).unwrap();
        assert_eq!(serde_json::from_str::<JointDistribution>(&json).unwrap(), j);
    }

    #[test]
    fn report() {
        let r = ConjectureReport::build(2, 6).unwrap();
        assert_eq!(r.entries.len(), 6);
        assert!(r.all_unimodal() && r.all_real_rooted());
        assert!(r
            .to_markdown()
            .contains("| 5 | 2 | 1 + 37*t + 70*t^2 + 8*t^3 | yes | yes |"));
    }

    proptest! {
        #[test]
        fn reversal_preserves_real_rootedness(c in proptest::collection::vec(-6i64..7, 1..6)) {
            let p = poly(&c);
            prop_assume!(!p.is_zero() && !p.coeff(0).is_zero());
            prop_assert_eq!(is_real_rooted(&p).unwrap(), is_real_rooted(&p.reversed()).unwrap());
        }

        #[test]
        fn products_of_linear_factors_are_real_rooted(roots in proptest::collection::vec(-5i64..6, 1..5)) {
            let mut p = poly(&[1]).to_rational();
            for r in roots {
                p = p.mul(&poly(&[-r, 1]).to_rational());
            }
            let ints: Vec<i64> = p.coeffs().iter().map(|c| c.to_integer().try_into().unwrap()).collect();
            prop_assert!(is_real_rooted(&poly(&ints)).unwrap());
        }
    }
}
