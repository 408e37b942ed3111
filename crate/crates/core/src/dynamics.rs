//! The Collatz map and the family `S(m) = ((q - 1) m + r) / p^e`.
//!
//! Here `q = p^ell` for a prime `p`, `r` is not divisible by `p`, and `e` is
//! maximal, so `S` maps the integers coprime to `p` into themselves and fixes
//! `r`. The Collatz map on odd integers is `p = 2, ell = 2, r = 1`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::pattern::{Direction, Pattern, PatternRle};

/// Primes up to this bound are checked exactly; larger `p` are accepted
/// unchecked and flagged.
pub const PRIMALITY_CHECK_LIMIT: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("p = {0} is not prime")]
    NotPrime(BigUint),
    #[error("exponent ell must be ≥ 1")]
    ZeroExponent,
    #[error("r must be ≥ 1")]
    ZeroOffset,
    #[error("r = {r} is divisible by p = {p}")]
    OffsetDivisible { p: BigUint, r: BigUint },
    #[error("m must be ≥ 1")]
    NonPositive,
    #[error("m = {m} is divisible by p = {p}")]
    OutsideDomain { p: BigUint, m: BigUint },
    #[error("m must be odd")]
    Even,
    #[error("w must be odd")]
    EvenMultiplier,
    #[error("w = {w} is divisible by p = {p}")]
    MultiplierDivisible { p: BigUint, w: BigUint },
    #[error("run length must be ≥ 1")]
    ZeroRun,
    #[error("step budget must be ≥ 1")]
    ZeroSteps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsParams {
    p: BigUint,
    ell: u32,
    q: BigUint,
    r: BigUint,
    primality_assumed: bool,
}

impl DynamicsParams {
    pub fn new(p: BigUint, ell: u32, r: BigUint) -> Result<Self, DynamicsError> {
        let primality_assumed = match p.to_u64() {
            Some(small) if small < PRIMALITY_CHECK_LIMIT => {
                if !is_prime_u64(small) {
                    return Err(DynamicsError::NotPrime(p));
                }
                false
            }
            _ => true,
        };
        if ell == 0 {
            return Err(DynamicsError::ZeroExponent);
        }
        if r.is_zero() {
            return Err(DynamicsError::ZeroOffset);
        }
        if r.is_multiple_of(&p) {
            return Err(DynamicsError::OffsetDivisible { p, r });
        }
        let q = num_traits::pow(p.clone(), ell as usize);
        Ok(Self {
            p,
            ell,
            q,
            r,
            primality_assumed,
        })
    }

    pub fn from_u64(p: u64, ell: u32, r: u64) -> Result<Self, DynamicsError> {
        Self::new(BigUint::from(p), ell, BigUint::from(r))
    }

    /// `p = 2, ell = 2, r = 1`.
    pub fn collatz() -> Self {
        Self {
            p: BigUint::from(2u32),
            ell: 2,
            q: BigUint::from(4u32),
            r: BigUint::one(),
            primality_assumed: false,
        }
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn r(&self) -> &BigUint {
        &self.r
    }

    /// `p` was too large to check and is taken on trust.
    pub fn primality_assumed(&self) -> bool {
        self.primality_assumed
    }

    pub fn is_collatz(&self) -> bool {
        self.ell == 2 && self.p == BigUint::from(2u32) && self.r.is_one()
    }

    pub fn check_domain(&self, m: &BigUint) -> Result<(), DynamicsError> {
        if m.is_zero() {
            return Err(DynamicsError::NonPositive);
        }
        if m.is_multiple_of(&self.p) {
            return Err(DynamicsError::OutsideDomain {
                p: self.p.clone(),
                m: m.clone(),
            });
        }
        Ok(())
    }

    /// One step without domain validation.
    pub(crate) fn step_unchecked(&self, m: &BigUint) -> (BigUint, u64) {
        let mut n = (&self.q - 1u32) * m + &self.r;
        if self.p == BigUint::from(2u32) {
            let e = n.trailing_zeros().unwrap_or(0);
            n >>= e;
            return (n, e);
        }
        let mut e = 0;
        loop {
            let (quot, rem) = n.div_rem(&self.p);
            if !rem.is_zero() {
                break;
            }
            n = quot;
            e += 1;
        }
        (n, e)
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub next: BigUint,
    pub exponent: u64,
}

pub fn step(params: &DynamicsParams, m: &BigUint) -> Result<Step, DynamicsError> {
    params.check_domain(m)?;
    let (next, exponent) = params.step_unchecked(m);
    Ok(Step { next, exponent })
}

/// `C(m) = (3m + 1) / 2^e` on odd `m`.
pub fn collatz(m: &BigUint) -> Result<BigUint, DynamicsError> {
    if m.is_zero() {
        return Err(DynamicsError::NonPositive);
    }
    if m.is_even() {
        return Err(DynamicsError::Even);
    }
    Ok(DynamicsParams::collatz().step_unchecked(m).0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub start: BigUint,
    /// `S^0(m), S^1(m), ...`
    pub values: Vec<BigUint>,
    /// `exponents[j]` is the `e` used to go from `values[j]` to `values[j+1]`.
    pub exponents: Vec<u64>,
    /// The trajectory reached the fixed point `r`; nothing past it is recorded.
    pub reached_fixed_point: bool,
}

pub fn trajectory(
    params: &DynamicsParams,
    m: &BigUint,
    steps: usize,
) -> Result<Trajectory, DynamicsError> {
    params.check_domain(m)?;
    let mut values = vec![m.clone()];
    let mut exponents = Vec::new();
    let mut reached_fixed_point = false;
    for _ in 0..steps {
        let cur = values.last().expect("nonempty");
        if cur == params.r() {
            reached_fixed_point = true;
            break;
        }
        let (next, e) = params.step_unchecked(cur);
        values.push(next);
        exponents.push(e);
    }
    if !reached_fixed_point && values.last() == Some(params.r()) && values.len() > 1 {
        reached_fixed_point = true;
    }
    Ok(Trajectory {
        start: m.clone(),
        values,
        exponents,
        reached_fixed_point,
    })
}

/// Maximal strictly monotone runs over the first `steps` steps from `m`.
/// An equal consecutive pair (a fixed point) ends the extraction.
pub fn extract_pattern(
    params: &DynamicsParams,
    m: &BigUint,
    steps: usize,
) -> Result<PatternRle, DynamicsError> {
    params.check_domain(m)?;
    if steps == 0 {
        return Err(DynamicsError::ZeroSteps);
    }
    let mut runs: Vec<u64> = Vec::new();
    let mut leading = Direction::Fixed;
    let mut current = Direction::Fixed;
    let mut cur = m.clone();
    let mut exhausted = true;
    for _ in 0..steps {
        let (next, _) = params.step_unchecked(&cur);
        let dir = match next.cmp(&cur) {
            std::cmp::Ordering::Greater => Direction::Increasing,
            std::cmp::Ordering::Less => Direction::Decreasing,
            std::cmp::Ordering::Equal => {
                exhausted = false;
                break;
            }
        };
        if runs.is_empty() {
            leading = dir;
            runs.push(1);
        } else if dir == current {
            *runs.last_mut().expect("nonempty") += 1;
        } else {
            runs.push(1);
        }
        current = dir;
        cur = next;
    }
    Ok(PatternRle {
        leading_direction: leading,
        runs,
        truncated: exhausted,
    })
}

/// Outcome of checking a trajectory prefix against a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCheck {
    pub ok: bool,
    /// Zero-based index `j` of the first comparison `S^j(m)` vs `S^{j+1}(m)`
    /// that has the wrong direction.
    pub failure_index: Option<u64>,
}

/// Checks that `m` rises for `v_1` steps, falls for `v_2`, and so on. Only
/// the first `pattern.total_steps()` steps are constrained.
pub fn verify_pattern(
    params: &DynamicsParams,
    m: &BigUint,
    pattern: &Pattern,
) -> Result<PatternCheck, DynamicsError> {
    params.check_domain(m)?;
    let mut cur = m.clone();
    let mut index = 0u64;
    for (i, &v) in pattern.runs().iter().enumerate() {
        let want = Pattern::direction_of(i);
        for _ in 0..v {
            let (next, _) = params.step_unchecked(&cur);
            let ok = match want {
                Direction::Increasing => next > cur,
                _ => next < cur,
            };
            if !ok {
                return Ok(PatternCheck {
                    ok: false,
                    failure_index: Some(index),
                });
            }
            cur = next;
            index += 1;
        }
    }
    Ok(PatternCheck {
        ok: true,
        failure_index: None,
    })
}

fn check_odd_multiplier(v: u32, w: &BigUint) -> Result<(), DynamicsError> {
    if v == 0 {
        return Err(DynamicsError::ZeroRun);
    }
    if w.is_even() {
        return Err(DynamicsError::EvenMultiplier);
    }
    Ok(())
}

/// Collatz values `2 * 3^j * 2^(v-j) * w - 1` for `j = 0..=v`, a strictly
/// increasing run starting at `m = 2^(v+1) w - 1`.
pub fn increasing_segment(v: u32, w: &BigUint) -> Result<Vec<BigUint>, DynamicsError> {
    check_odd_multiplier(v, w)?;
    let base = w << 1u32;
    Ok((0..=v)
        .map(|j| num_traits::pow(BigUint::from(3u32), j as usize) * (&base << (v - j)) - 1u32)
        .collect())
}

/// Collatz values `2 * 3^j * 4^(v-j) * w + 1` for `j = 0..=v`, a strictly
/// decreasing run starting at `m = 2 * 4^v * w + 1`.
pub fn decreasing_segment(v: u32, w: &BigUint) -> Result<Vec<BigUint>, DynamicsError> {
    check_odd_multiplier(v, w)?;
    let base = w << 1u32;
    Ok((0..=v)
        .map(|j| num_traits::pow(BigUint::from(3u32), j as usize) * (&base << (2 * (v - j))) + 1u32)
        .collect())
}

/// Values `p (q-1)^j q^(v-j) w + r` for `j = 0..=v`: the strictly decreasing
/// run of `S` starting at `m = p q^v w + r`.
pub fn general_segment(
    params: &DynamicsParams,
    v: u32,
    w: &BigUint,
) -> Result<Vec<BigUint>, DynamicsError> {
    if v == 0 {
        return Err(DynamicsError::ZeroRun);
    }
    if w.is_zero() {
        return Err(DynamicsError::NonPositive);
    }
    if w.is_multiple_of(params.p()) {
        return Err(DynamicsError::MultiplierDivisible {
            p: params.p().clone(),
            w: w.clone(),
        });
    }
    let q_minus_one = params.q() - 1u32;
    let base = params.p() * w;
    Ok((0..=v)
        .map(|j| {
            &base
                * num_traits::pow(q_minus_one.clone(), j as usize)
                * num_traits::pow(params.q().clone(), (v - j) as usize)
                + params.r()
        })
        .collect())
}

/// The exact ratio `(S(m) - r) / (m - r)`, or `None` when `m = r`.
pub fn contraction_ratio(
    params: &DynamicsParams,
    m: &BigUint,
) -> Result<Option<BigRational>, DynamicsError> {
    params.check_domain(m)?;
    if m == params.r() {
        return Ok(None);
    }
    let (next, _) = params.step_unchecked(m);
    let r = BigInt::from(params.r().clone());
    let num = BigInt::from(next) - &r;
    let den = BigInt::from(m.clone()) - &r;
    Ok(Some(BigRational::new(num, den)))
}
