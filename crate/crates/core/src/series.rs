//! Truncated power series in `z` with exact coefficients.
//!
//! Coefficients are stored as ordinary coefficients `a_n` of `z^n`. The
//! exponential-generating-function reading `c_n = n! a_n` is applied only
//! when a count or polynomial is extracted.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::counting::{factorial, Stirling2Table};
use crate::poly::{IntPolynomial, RatPolynomial};
use crate::{Error, Result};

/// Default truncation order for generating-function work.
pub const DEFAULT_ORDER: usize = 32;

/// Exact coefficient ring for [`TruncatedSeries`].
pub trait Coefficient: Clone + PartialEq + fmt::Debug {
    fn zero_value() -> Self;
    fn one_value() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &BigRational) -> Self;
}

impl Coefficient for BigRational {
    fn zero_value() -> Self {
        Zero::zero()
    }
    fn one_value() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &BigRational) -> Self {
        self * c
    }
}

impl Coefficient for RatPolynomial {
    fn zero_value() -> Self {
        RatPolynomial::default()
    }
    fn one_value() -> Self {
        RatPolynomial::constant(One::one())
    }
    fn is_zero(&self) -> bool {
        RatPolynomial::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        RatPolynomial::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RatPolynomial::mul(self, other)
    }
    fn neg(&self) -> Self {
        RatPolynomial::neg(self)
    }
    fn scale(&self, c: &BigRational) -> Self {
        RatPolynomial::scale(self, c)
    }
}

/// `a_0 + a_1 z + ... + a_N z^N`, exact through `z^N`.
///
/// Binary operations truncate to the smaller of the two orders.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
}

/// Series in `z` over the rationals.
pub type RationalSeries = TruncatedSeries<BigRational>;

/// Series in `z` whose coefficients are rational polynomials in `t`.
pub type BivariateSeries = TruncatedSeries<RatPolynomial>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn inv_factorial(n: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(factorial(n as u64)))
}

impl<C: Coefficient> TruncatedSeries<C> {
    /// Pads or truncates `coeffs` to exactly `order + 1` entries.
    pub fn from_coeffs(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.resize(order + 1, C::zero_value());
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::from_coeffs(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::from_coeffs(vec![C::one_value()], order)
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &C {
        &self.coeffs[n]
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::from_coeffs(
            self.coeffs[..=order.min(self.order())].to_vec(),
            order.min(self.order()),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        TruncatedSeries {
            coeffs: (0..=order).map(|i| self.coeffs[i].add(&other.coeffs[i])).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(C::neg).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut coeffs = vec![C::zero_value(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
                }
            }
        }
        TruncatedSeries { coeffs }
    }

    /// `self^e` by repeated squaring; `self^0 = 1`.
    pub fn int_pow(&self, mut e: u64) -> Self {
        let mut result = Self::one(self.order());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `exp(self)` for a series with zero constant term, from
    /// `n b_n = sum_{j=1}^{n} j a_j b_{n-j}`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::domain(
                "exp needs a zero constant term; exp of a nonzero constant is not exact",
            ));
        }
        let order = self.order();
        let mut out: Vec<C> = Vec::with_capacity(order + 1);
        out.push(C::one_value());
        for n in 1..=order {
            let mut acc = C::zero_value();
            for j in 1..=n {
                let a = &self.coeffs[j];
                if a.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(&out[n - j]).scale(&rat(j as i64)));
            }
            out.push(acc.scale(&BigRational::new(BigInt::one(), BigInt::from(n))));
        }
        Ok(TruncatedSeries { coeffs: out })
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> TruncatedSeries<D> {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

impl RationalSeries {
    /// `e^{cz}`: coefficients `c^n / n!`.
    pub fn exp_linear(c: &BigRational, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut power = BigRational::one();
        for n in 0..=order {
            coeffs.push(&power * inv_factorial(n));
            power *= c;
        }
        TruncatedSeries { coeffs }
    }

    /// The variable `z`.
    pub fn z(order: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); order + 1];
        if order >= 1 {
            coeffs[1] = BigRational::one();
        }
        TruncatedSeries { coeffs }
    }

    /// `n! a_n`, the exponential-generating-function coefficient.
    pub fn egf_coeff(&self, n: usize) -> BigRational {
        &self.coeffs[n] * BigRational::from_integer(BigInt::from(factorial(n as u64)))
    }

    /// `n! a_n`, required to be a nonnegative integer.
    pub fn egf_count(&self, n: usize) -> Result<BigUint> {
        let c = self.egf_coeff(n);
        if !c.is_integer() {
            return Err(Error::Consistency(format!(
                "EGF coefficient {n} is {c}, not an integer"
            )));
        }
        c.to_integer()
            .to_biguint()
            .ok_or_else(|| Error::Consistency(format!("EGF coefficient {n} is negative")))
    }

    pub fn lift(&self) -> BivariateSeries {
        self.map(|c| RatPolynomial::constant(c.clone()))
    }
}

impl BivariateSeries {
    /// Substitutes a value for `t` in every coefficient.
    pub fn eval_t(&self, t: &BigRational) -> RationalSeries {
        self.map(|p| p.eval(t))
    }
}

/// `exp((k-1) z + (e^{kz} - 1)/k)`; `n! a_n = |flt(Q_{n+1}^k)|`.
pub fn egf_flattened(k: usize, order: usize) -> RationalSeries {
    let kk = rat(k as i64);
    let mut inner = RationalSeries::exp_linear(&kk, order).scale(&kk.recip());
    inner.coeffs[0] = BigRational::zero();
    if order >= 1 {
        inner.coeffs[1] += rat(k as i64 - 1);
    }
    inner.exp().expect("constant term is zero by construction")
}

/// `H_j(z) = sum_n S(n-1, j) z^n / n!`, with `S(m, j) = 0` for `m < 0`.
pub fn h_series(j: usize, order: usize) -> RationalSeries {
    let table = Stirling2Table::new(order.saturating_sub(1));
    h_series_from_table(j, order, &table)
}

fn h_series_from_table(j: usize, order: usize, table: &Stirling2Table) -> RationalSeries {
    let coeffs = (0..=order)
        .map(|n| {
            if n == 0 {
                return BigRational::zero();
            }
            BigRational::from_integer(BigInt::from(table.get(n - 1, j))) * inv_factorial(n)
        })
        .collect();
    TruncatedSeries { coeffs }
}

/// `k! / (k-j)!` as an exact integer.
fn falling_factorial(k: usize, j: usize) -> BigUint {
    ((k - j + 1)..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(t(e^z - 1) + 1)^{k-1} exp(z + sum_{j=1}^{k} k!/(k-j)! H_j(z) t^j)`.
///
/// `n!` times the coefficient of `z^n` is the descent polynomial of the
/// flattened k-Stirling permutations of order `n + 1`.
pub fn descent_egf(k: usize, order: usize) -> BivariateSeries {
    let t = RatPolynomial::monomial(BigRational::one(), 1);

    let mut weight = RationalSeries::exp_linear(&BigRational::one(), order).lift();
    for (n, c) in weight.coeffs.iter_mut().enumerate() {
        *c = if n == 0 {
            RatPolynomial::constant(BigRational::one())
        } else {
            c.mul(&t)
        };
    }
    let prefactor = weight.int_pow(k.saturating_sub(1) as u64);

    let table = Stirling2Table::new(order.saturating_sub(1));
    let mut exponent = RationalSeries::z(order).lift();
    for j in 1..=k {
        let scale = BigRational::from_integer(BigInt::from(falling_factorial(k, j)));
        let t_j = RatPolynomial::monomial(scale, j);
        let h = h_series_from_table(j, order, &table).map(|c| t_j.scale(c));
        exponent = exponent.add(&h);
    }
    let exp = exponent.exp().expect("constant term is zero by construction");
    prefactor.mul(&exp)
}

/// `n!` times the `z^n` coefficient, which must be an integer polynomial
/// with nonnegative coefficients.
pub fn extract_descent_polynomial(series: &BivariateSeries, n: usize) -> Result<IntPolynomial> {
    if n > series.order() {
        return Err(Error::domain(format!(
            "coefficient {n} requested from a series truncated at order {}",
            series.order()
        )));
    }
    let scale = BigRational::from_integer(BigInt::from(factorial(n as u64)));
    let mut coeffs = Vec::new();
    for (i, c) in series.coeff(n).coeffs().iter().enumerate() {
        let v = c * &scale;
        if !v.is_integer() || v < BigRational::zero() {
            return Err(Error::Consistency(format!(
                "t^{i} coefficient of z^{n} scales to {v}, not a nonnegative integer"
            )));
        }
        coeffs.push(v.to_integer());
    }
    Ok(IntPolynomial::new(coeffs))
}

/// Descent polynomial of flattened k-Stirling permutations of order `n`,
/// read off the generating function.
pub fn descent_polynomial(n: usize, k: usize) -> Result<IntPolynomial> {
    if n == 0 || k == 0 {
        return Err(Error::domain(format!("need n >= 1 and k >= 1 (got n={n}, k={k})")));
    }
    extract_descent_polynomial(&descent_egf(k, n - 1), n - 1)
}

impl<C: fmt::Display> fmt::Display for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
