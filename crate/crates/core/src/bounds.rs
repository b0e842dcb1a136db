//! Closed-form cost and time bounds, evaluated exactly.
//!
//! Every logarithm is base 2 and every `⌈log₂ x⌉` is taken from the bit
//! length of `x - 1`; no floating point is involved. Fractional bounds are
//! [`Rational`]s; integer schedule costs are compared against their floor.
//!
//! The lower bound is the form
//!
//! ```text
//! n·(2 − 2(k−1)/k² − ⌈log₂ k⌉/k) − 2/k² + ⌈log₂ k⌉/k − 1
//! ```
//!
//! i.e. the `n` factor multiplies the whole parenthesised term. Some
//! renderings of this bound misplace a closing parenthesis; this is the form
//! the counting argument actually produces.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algorithms::{lbckt_case, DispatchCase};
use crate::error::{Error, Result};
use crate::ktree::CompleteKTree;

pub type Rational = BigRational;

/// `⌈log₂ x⌉` for `x ≥ 1` (0 for `x ≤ 1`).
pub fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

pub(crate) fn ceil_log2_big(x: &BigUint) -> u32 {
    if x <= &BigUint::one() {
        0
    } else {
        (x - 1u32).bits() as u32
    }
}

fn int(x: impl Into<BigInt>) -> Rational {
    Rational::from_integer(x.into())
}

fn frac(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Rational {
    Rational::new(a.into(), b.into())
}

fn pow(k: u64, e: u32) -> BigUint {
    BigUint::from(k).pow(e)
}

fn check(k: u64, r: u32) -> Result<()> {
    if k < 2 || r < 1 {
        Err(Error::InvalidParams { k, r })
    } else {
        Ok(())
    }
}

fn vertex_count(k: u64, r: u32) -> Rational {
    int((pow(k, r + 1) - 1u32) / (k - 1))
}

/// Cost of the general tree scheme, `(n − 1)·⌈log₂ n⌉`.
pub fn farley_bound(n: u64) -> Result<u128> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("farley bound needs n >= 2, got {n}")));
    }
    Ok(u128::from(n - 1) * u128::from(ceil_log2(u128::from(n))))
}

/// Lower bound on the minimum broadcast cost `B(u)` in a complete k-tree.
/// With `leaf_originator` the bound is lowered by one, matching the case of
/// an originator on the last level.
pub fn cost_lower_bound(k: u64, r: u32, leaf_originator: bool) -> Result<Rational> {
    check(k, r)?;
    let n = vertex_count(k, r);
    let log_k = int(ceil_log2(u128::from(k)));
    let k2 = u128::from(k) * u128::from(k);
    let factor = int(2) - frac(2 * (k - 1), k2) - &log_k / int(k);
    let mut bound = n * factor - frac(2, k2) + log_k / int(k) - int(1);
    if leaf_originator {
        bound -= int(1);
    }
    Ok(bound)
}

/// Cost bound of the level-by-level algorithm:
/// `(2 − ⌈log₂(k+1)⌉/k)·n + ⌈log₂(k+1)⌉/k − 2`.
pub fn alg1_upper(k: u64, r: u32) -> Result<Rational> {
    check(k, r)?;
    let n = vertex_count(k, r);
    let s = frac(ceil_log2(u128::from(k) + 1), k);
    Ok((int(2) - &s) * n + s - int(2))
}

/// Cost bound of the two-round algorithm. Defined for `r ≥ 2` only.
pub fn alg2_upper(k: u64, r: u32) -> Result<Rational> {
    check(k, r)?;
    if r < 2 {
        return Err(Error::OutOfRange(format!(
            "two-round bound needs r >= 2, got {r}"
        )));
    }
    let n = vertex_count(k, r);
    let s = ceil_log2(u128::from(k) + 1);
    let (k_, km1) = (u128::from(k), u128::from(k - 1));
    let factor = int(2) - frac(km1 * u128::from(s), k_ * k_) + frac(1, k_ * km1);
    Ok(factor * n - int(2 * (u64::from(r) - 1)) + frac(k_, km1 * km1) + frac(1, k_)
        - frac(s, k_ * k_))
}

/// Cost bound of broadcasting to the leaves and back up.
pub fn alg3_upper(k: u64, r: u32) -> Result<Rational> {
    check(k, r)?;
    let n = vertex_count(k, r);
    let kr = pow(k, r);
    let r_ = u64::from(r);
    Ok((int(2) + frac(1, k - 1)) * n + int(2 * r_ * u64::from(ceil_log2_big(&kr)))
        - int(2 * u64::from(ceil_log2_big(&(kr + 1u32))))
        - int(3 * r_)
        - frac(r_ + 1, k - 1))
}

/// Upper bound on the cost of informing level `j` from the root.
pub fn to_level_cost_bound(k: u64, j: u32) -> Result<Rational> {
    check(k, j)?;
    let kj = pow(k, j);
    let j_ = u64::from(j);
    let head = frac(BigInt::from(2 * k) * BigInt::from(&kj - 1u32), k - 1);
    Ok(head + int(2 * j_ * u64::from(ceil_log2_big(&kj)))
        - int(2 * u64::from(ceil_log2_big(&(kj + 1u32))))
        - int(2 * j_)
        + int(2))
}

/// Cost of the level-`j`-members' calls in round `m` of the level broadcast:
/// `2(j−m+1)·[k^m − k^(m−1) − (⌈log₂(k^m+1)⌉ − ⌈log₂(k^(m−1)+1)⌉)]`.
pub fn to_level_round_cost(k: u64, j: u32, m: u32) -> Result<Rational> {
    check(k, j)?;
    if m == 0 || m > j {
        return Err(Error::OutOfRange(format!("round {m} not in 1..={j}")));
    }
    let km = pow(k, m);
    let km1 = pow(k, m - 1);
    let originator_calls = i64::from(ceil_log2_big(&(&km + 1u32))) - i64::from(ceil_log2_big(&(&km1 + 1u32)));
    let members = BigInt::from(km) - BigInt::from(km1) - originator_calls;
    Ok(int(members * (2 * i64::from(j - m + 1))))
}

/// Sum of the per-round costs plus the originator's `2j⌈log₂ k^j⌉` term;
/// the unsimplified form of [`to_level_cost_bound`].
pub fn to_level_cost_sum(k: u64, j: u32) -> Result<Rational> {
    let mut total = int(2 * u64::from(j) * u64::from(ceil_log2_big(&pow(k, j))));
    for m in 1..=j {
        total += to_level_round_cost(k, j, m)?;
    }
    Ok(total)
}

/// Cost of the one-step up-call phase from level `j`: `Σ_{i=1..j} i·k^(j−i)`,
/// less the `j`-edge call into the root when the root is the originator.
pub fn from_level_cost(k: u64, j: u32, originator_is_root: bool) -> Result<u128> {
    check(k, j)?;
    let overflow = || Error::Overflow { k, r: j };
    let mut total = 0u128;
    for i in 1..=j {
        let term = u128::from(k)
            .checked_pow(j - i)
            .and_then(|p| p.checked_mul(u128::from(i)))
            .ok_or_else(overflow)?;
        total = total.checked_add(term).ok_or_else(overflow)?;
    }
    if originator_is_root {
        total -= u128::from(j);
    }
    Ok(total)
}

/// Floor of a rational as an `i128`.
pub fn floor(x: &Rational) -> i128 {
    x.floor().to_integer().to_i128().expect("bound fits in i128")
}

/// Ceiling of a rational as an `i128`.
pub fn ceil(x: &Rational) -> i128 {
    x.ceil().to_integer().to_i128().expect("bound fits in i128")
}

/// `a` for integers, `a/b` otherwise (reduced).
pub fn format_exact(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering rounded half away from zero to at most `places`
/// digits, trailing zeros trimmed.
pub fn format_decimal(x: &Rational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = (x.abs() * int(scale.clone()) + frac(1, 2)).floor().to_integer();
    let (whole, rest) = (&scaled / &scale, &scaled % &scale);
    let sign = if x.is_negative() && !scaled.is_zero() { "-" } else { "" };
    let mut s = format!("{sign}{whole}");
    if !rest.is_zero() {
        let digits = format!("{:0>width$}", rest.to_string(), width = places as usize);
        s.push('.');
        s.push_str(digits.trim_end_matches('0'));
    }
    s
}

/// Every bound for one `(k, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub k: u64,
    pub r: u32,
    pub n: u64,
    /// `⌈log₂ n⌉`
    pub time_limit: u32,
    pub farley: u128,
    pub lower: Rational,
    pub case: DispatchCase,
    pub upper_alg1: Rational,
    /// `None` when `r < 2`.
    pub upper_alg2: Option<Rational>,
    pub upper_alg3: Rational,
    /// Level-broadcast bound at `j = r − 1` (`None` when `r < 2`).
    pub to_level_below_leaves: Option<Rational>,
    pub to_level_leaves: Rational,
    /// Up-call phase cost from the root's point of view at `j = r − 1`.
    pub from_level_below_leaves: Option<u128>,
    pub from_level_leaves: u128,
}

impl BoundsReport {
    /// The bound of the algorithm the dispatcher selects.
    pub fn dispatched_upper(&self) -> &Rational {
        use crate::algorithms::Algorithm;
        match self.case.algorithm {
            Algorithm::Alg1 => &self.upper_alg1,
            Algorithm::Alg2 => self
                .upper_alg2
                .as_ref()
                .expect("dispatcher never selects the two-round algorithm for r < 2"),
            Algorithm::Alg3 => &self.upper_alg3,
        }
    }
}

pub fn report(k: u64, r: u32, leaf_originator: bool) -> Result<BoundsReport> {
    let tree = CompleteKTree::new(k, r)?;
    let n = tree.n();
    let below = (r >= 2).then_some(r - 1);
    Ok(BoundsReport {
        k,
        r,
        n,
        time_limit: ceil_log2(u128::from(n)),
        farley: farley_bound(n)?,
        lower: cost_lower_bound(k, r, leaf_originator)?,
        case: lbckt_case(k, r)?,
        upper_alg1: alg1_upper(k, r)?,
        upper_alg2: below.map(|_| alg2_upper(k, r)).transpose()?,
        upper_alg3: alg3_upper(k, r)?,
        to_level_below_leaves: below.map(|j| to_level_cost_bound(k, j)).transpose()?,
        to_level_leaves: to_level_cost_bound(k, r)?,
        from_level_below_leaves: below.map(|j| from_level_cost(k, j, true)).transpose()?,
        from_level_leaves: from_level_cost(k, r, true)?,
    })
}
