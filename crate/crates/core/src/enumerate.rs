//! Exact counts of possible boards.
//!
//! Everything is computed in arbitrary-precision integers or rationals;
//! decimal renderings are produced from the exact values with
//! round-half-up at the requested number of significant digits.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Cells that may host a component (2..=99).
pub const USABLE_CELLS: usize = 98;

/// Largest component count with all entrances and exits distinct.
pub const MAX_DISTINCT_COMPONENTS: usize = USABLE_CELLS / 2;

/// Component cap of the "uncluttered" family.
pub const UNCLUTTERED_MAX: usize = 20;

/// Significant digits used for the default decimal rendering.
pub const DISPLAY_DIGITS: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("component count {0} outside 0..=49")]
    OutOfRange(usize),
}

struct Tables {
    factorial: Vec<BigUint>,
    binomial: Vec<Vec<BigUint>>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut factorial = vec![BigUint::one()];
        for k in 1..=USABLE_CELLS {
            let next = &factorial[k - 1] * BigUint::from(k);
            factorial.push(next);
        }
        let mut binomial: Vec<Vec<BigUint>> = Vec::with_capacity(USABLE_CELLS + 1);
        for n in 0..=USABLE_CELLS {
            let mut row = vec![BigUint::one(); n + 1];
            for k in 1..n {
                row[k] = &binomial[n - 1][k - 1] + &binomial[n - 1][k];
            }
            binomial.push(row);
        }
        Tables { factorial, binomial }
    })
}

/// `n!` for `n <= 98`.
pub fn factorial(n: usize) -> BigUint {
    tables().factorial[n].clone()
}

/// `C(n, k)` for `n <= 98`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        BigUint::zero()
    } else {
        tables().binomial[n][k].clone()
    }
}

/// An exact count (or exact rational bound) with its decimal rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigCount {
    value: BigRational,
}

impl BigCount {
    pub fn from_integer(n: BigUint) -> Self {
        BigCount {
            value: BigRational::from_integer(BigInt::from(n)),
        }
    }

    pub fn from_rational(value: BigRational) -> Self {
        BigCount { value }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn is_integer(&self) -> bool {
        self.value.is_integer()
    }

    /// The exact integer value, if this count is an integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.value.to_integer())
    }

    /// Exact decimal digits for integers, `p/q` otherwise.
    pub fn exact_string(&self) -> String {
        if self.is_integer() {
            self.value.numer().to_string()
        } else {
            format!("{}/{}", self.value.numer(), self.value.denom())
        }
    }

    /// Scientific notation with `digits` significant digits.
    pub fn scientific(&self, digits: usize) -> String {
        to_scientific(&self.value, digits)
    }

    pub fn decimal_approx(&self) -> String {
        self.scientific(DISPLAY_DIGITS)
    }

    pub fn to_f64(&self) -> f64 {
        self.decimal_approx().parse().unwrap_or(f64::NAN)
    }

    /// `|self / reference - 1|`, computed exactly then converted.
    pub fn relative_error(&self, reference: &BigRational) -> f64 {
        let diff = (&self.value - reference) / reference;
        diff.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    /// Relative error against a decimal literal such as `"7.6432896116e93"`.
    pub fn relative_error_to(&self, reference: &str) -> f64 {
        self.relative_error(&parse_scientific(reference).expect("valid decimal literal"))
    }

    pub fn ratio(&self, denominator: &BigCount) -> BigRational {
        &self.value / &denominator.value
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.decimal_approx())
    }
}

impl Serialize for BigCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BigCount", 2)?;
        st.serialize_field("exact", &self.exact_string())?;
        st.serialize_field("approx", &self.decimal_approx())?;
        st.end()
    }
}

/// Renders a positive rational in scientific notation with round-half-up.
pub fn to_scientific(value: &BigRational, digits: usize) -> String {
    assert!(digits >= 1);
    if value.is_zero() {
        return format!("{:.*}e0", digits - 1, 0.0);
    }
    let sign = if value.is_negative() { "-" } else { "" };
    let v = value.abs();
    let (num, den) = (v.numer().clone(), v.denom().clone());

    // exponent e with 10^e <= v < 10^(e+1)
    let mut e = num.to_string().len() as i64 - den.to_string().len() as i64;
    let ten = BigInt::from(10);
    let pow = |k: i64| ten.pow(k.unsigned_abs() as u32);
    let ge_pow10 = |k: i64| {
        if k >= 0 {
            num >= &den * pow(k)
        } else {
            &num * pow(k) >= den
        }
    };
    while !ge_pow10(e) {
        e -= 1;
    }
    while ge_pow10(e + 1) {
        e += 1;
    }

    // scaled = v * 10^(digits - 1 - e), rounded half up
    let shift = digits as i64 - 1 - e;
    let (sn, sd) = if shift >= 0 {
        (&num * pow(shift), den.clone())
    } else {
        (num.clone(), &den * pow(-shift))
    };
    let (q, r) = sn.div_rem(&sd);
    let mut mantissa = if &r * 2 >= sd { q + 1 } else { q };
    if mantissa == pow(digits as i64) {
        mantissa /= 10;
        e += 1;
    }
    let m = mantissa.to_string();
    if digits == 1 {
        format!("{sign}{m}e{e}")
    } else {
        format!("{sign}{}.{}e{e}", &m[..1], &m[1..])
    }
}

/// Parses `d.ddd e±k` decimal notation into an exact rational.
pub fn parse_scientific(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10).pow(scale.unsigned_abs() as u32);
    Some(if scale >= 0 {
        BigRational::from_integer(n * ten)
    } else {
        BigRational::new(n, ten)
    })
}

/// Boards with `n` components and all entrances and exits distinct:
/// `C(98, 2n) · C(2n, n) · n!`.
pub fn count_boards(n: usize) -> Result<BigCount, EnumerateError> {
    if n > MAX_DISTINCT_COMPONENTS {
        return Err(EnumerateError::OutOfRange(n));
    }
    Ok(BigCount::from_integer(count_boards_raw(n)))
}

fn count_boards_raw(n: usize) -> BigUint {
    binomial(USABLE_CELLS, 2 * n) * binomial(2 * n, n) * factorial(n)
}

/// Sum of [`count_boards`] over `0..=max_n`.
pub fn total_boards_up_to(max_n: usize) -> Result<BigCount, EnumerateError> {
    if max_n > MAX_DISTINCT_COMPONENTS {
        return Err(EnumerateError::OutOfRange(max_n));
    }
    Ok(BigCount::from_integer((0..=max_n).map(count_boards_raw).sum()))
}

pub fn total_boards() -> BigCount {
    total_boards_up_to(MAX_DISTINCT_COMPONENTS).expect("49 is in range")
}

/// One term of the barrier-placement sum: the lowest barrier chute starts at
/// `lowest`, and its six exits are chosen from `2..lowest` and arranged.
pub fn barrier_placement_term(lowest: usize) -> BigUint {
    binomial(lowest - 2, 6) * factorial(6)
}

/// Ways to place one six-chute barrier: `Σ_{M=8}^{94} C(M-2, 6) · 6!`.
pub fn barrier_placements() -> BigCount {
    BigCount::from_integer((8..=94).map(barrier_placement_term).sum())
}

fn barrier_bound_raw(max_n: usize) -> BigUint {
    let placements: BigUint = (8..=94).map(barrier_placement_term).sum();
    (6..=max_n)
        .map(|n| {
            let rest = n - 6;
            &placements * binomial(86, 2 * rest) * binomial(2 * rest, rest) * factorial(rest)
        })
        .sum()
}

/// Upper bound on the number of boards (up to `max_n` components) that
/// contain a chute-barrier. Boards with several barriers are overcounted.
pub fn chute_barrier_upper_bound_up_to(max_n: usize) -> Result<BigCount, EnumerateError> {
    if max_n > MAX_DISTINCT_COMPONENTS {
        return Err(EnumerateError::OutOfRange(max_n));
    }
    Ok(BigCount::from_integer(barrier_bound_raw(max_n)))
}

pub fn chute_barrier_upper_bound() -> BigCount {
    chute_barrier_upper_bound_up_to(MAX_DISTINCT_COMPONENTS).expect("49 is in range")
}

/// Lower bound on boards without a chute-barrier (hence ultimately
/// winnable), with its share of all boards.
#[derive(Debug, Clone, Serialize)]
pub struct WinnableBound {
    pub max_components: usize,
    pub total: BigCount,
    pub barrier_bound: BigCount,
    pub without_barrier: BigCount,
    #[serde(serialize_with = "ser_fraction")]
    pub fraction: BigRational,
}

impl WinnableBound {
    pub fn fraction_f64(&self) -> f64 {
        self.fraction.to_f64().unwrap_or(f64::NAN)
    }
}

fn ser_fraction<S: Serializer>(f: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_scientific(f, 15))
}

pub fn winnable_lower_bound_up_to(max_n: usize) -> Result<WinnableBound, EnumerateError> {
    let total = total_boards_up_to(max_n)?;
    let barrier_bound = chute_barrier_upper_bound_up_to(max_n)?;
    let without = total.value() - barrier_bound.value();
    let fraction = &without / total.value();
    Ok(WinnableBound {
        max_components: max_n,
        total,
        barrier_bound,
        without_barrier: BigCount::from_rational(without),
        fraction,
    })
}

pub fn winnable_lower_bound() -> WinnableBound {
    winnable_lower_bound_up_to(MAX_DISTINCT_COMPONENTS).expect("49 is in range")
}

/// How the distinct-exit components are assigned in the shared-exit
/// overcount term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PermutationFactor {
    /// `N! / n!`. Reproduces the reference bound values
    /// 1.3135349305e127 and 1.2801985919e134.
    #[default]
    FactorialRatio,
    /// `N! / (N - n)!`, the number of ordered choices of `n` components.
    FallingFactorial,
}

/// Overcount of shared-exit boards with `n_comp` components and `n_exit`
/// distinct exits.
pub fn shared_exit_term(n_comp: usize, n_exit: usize, factor: PermutationFactor) -> BigUint {
    debug_assert!(1 <= n_exit && n_exit <= n_comp);
    let perm = match factor {
        PermutationFactor::FactorialRatio => factorial(n_comp) / factorial(n_exit),
        PermutationFactor::FallingFactorial => factorial(n_comp) / factorial(n_comp - n_exit),
    };
    binomial(USABLE_CELLS, n_comp + n_exit)
        * binomial(n_comp + n_exit, n_comp)
        * perm
        * BigUint::from(n_exit).pow((n_comp - n_exit) as u32)
}

#[derive(Debug, Clone, Serialize)]
pub struct SharedExitBounds {
    pub factor: PermutationFactor,
    pub lower: BigCount,
    pub upper: BigCount,
}

/// Crude bounds on the number of boards when exits may be shared, summed
/// over `n = 1..=N` distinct exits and `N = 1..=49` components. The lower
/// bound divides each term by `(N/n)^n`.
pub fn shared_exit_bounds_with(factor: PermutationFactor) -> SharedExitBounds {
    let mut upper = BigUint::zero();
    let mut lower = BigRational::zero();
    for n_comp in 1..=MAX_DISTINCT_COMPONENTS {
        for n_exit in 1..=n_comp {
            let term = shared_exit_term(n_comp, n_exit, factor);
            let scale = BigRational::new(
                BigInt::from(n_exit).pow(n_exit as u32),
                BigInt::from(n_comp).pow(n_exit as u32),
            );
            lower += BigRational::from_integer(BigInt::from(term.clone())) * scale;
            upper += term;
        }
    }
    SharedExitBounds {
        factor,
        lower: BigCount::from_rational(lower),
        upper: BigCount::from_integer(upper),
    }
}

pub fn shared_exit_bounds() -> SharedExitBounds {
    shared_exit_bounds_with(PermutationFactor::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(count_boards(0).unwrap().exact_string(), "1");
        assert_eq!(count_boards(1).unwrap().exact_string(), "9506");
        assert_eq!(count_boards(2).unwrap().exact_string(), "43347360");
        assert_eq!(count_boards(50), Err(EnumerateError::OutOfRange(50)));
    }

    #[test]
    fn barrier_terms() {
        assert_eq!(barrier_placement_term(8), BigUint::from(720u32));
        assert_eq!(barrier_placement_term(9), BigUint::from(5040u32));
        let single = chute_barrier_upper_bound_up_to(6).unwrap();
        assert_eq!(single, barrier_placements());
    }

    #[test]
    fn shared_exit_single_term() {
        for f in [PermutationFactor::FactorialRatio, PermutationFactor::FallingFactorial] {
            assert_eq!(shared_exit_term(1, 1, f), BigUint::from(9506u32));
        }
    }

    #[test]
    fn scientific_rendering() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(to_scientific(&r(9506, 1), 3), "9.51e3");
        assert_eq!(to_scientific(&r(9506, 1), 11), "9.5060000000e3");
        assert_eq!(to_scientific(&r(1, 3), 4), "3.333e-1");
        assert_eq!(to_scientific(&r(2, 3), 4), "6.667e-1");
        assert_eq!(to_scientific(&r(9995, 1), 3), "1.00e4");
        assert_eq!(to_scientific(&r(125, 1000), 2), "1.3e-1");
        assert_eq!(to_scientific(&r(1, 1), 1), "1e0");
        assert_eq!(to_scientific(&r(-15, 10), 2), "-1.5e0");
        assert_eq!(to_scientific(&r(100, 1), 3), "1.00e2");
    }

    #[test]
    fn scientific_parse() {
        assert_eq!(parse_scientific("1.5e2").unwrap(), BigRational::from_integer(150.into()));
        assert_eq!(
            parse_scientific("2.5e-1").unwrap(),
            BigRational::new(1.into(), 4.into())
        );
        assert!(parse_scientific("x").is_none());
    }
}
