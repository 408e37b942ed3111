//! Constructing odd integers with a prescribed Collatz run pattern.
//!
//! Run `i` of the pattern is realized by a multiplier `w_i`: an increasing run
//! of length `v` starts at `2 * 2^v * w - 1` and ends at `2 * 3^v * w - 1`, a
//! decreasing run starts at `2 * 4^v * w + 1` and ends at `2 * 3^v * w + 1`.
//! Gluing consecutive runs together gives one linear equation per junction,
//!
//! ```text
//! 3^v_i w_i - 4^v_{i+1} w_{i+1} =  1    (run i+1 decreasing)
//! 3^v_i w_i - 2^v_{i+1} w_{i+1} = -1    (run i+1 increasing)
//! ```
//!
//! and the chain solver supplies odd positive `w`'s for the whole system.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::chain::{ChainError, ChainSystem, SolutionCertificate};
use crate::dynamics::{verify_pattern, DynamicsParams};
use crate::pattern::{Direction, Pattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForgeError {
    #[error("a pattern with a single run has no junction system")]
    SingleRun,
    #[error("chain solver failed: {0}")]
    Chain(#[from] ChainError),
    #[error("internal error: forged m = {m} does not realize pattern {pattern} (first bad step {failure_index:?})")]
    VerificationFailed {
        m: BigUint,
        pattern: Pattern,
        failure_index: Option<u64>,
    },
    #[error("witness has not been verified")]
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub m: BigUint,
    /// One odd positive multiplier per run.
    pub w: Vec<BigUint>,
    pub pattern: Pattern,
    /// Absent for single-run patterns.
    pub certificate: Option<SolutionCertificate>,
    pub verified: bool,
}

/// The junction system of a pattern with at least two runs.
pub fn build_system(pattern: &Pattern) -> Result<ChainSystem, ForgeError> {
    let runs = pattern.runs();
    if runs.len() < 2 {
        return Err(ForgeError::SingleRun);
    }
    let n = runs.len() - 1;
    let three = BigUint::from(3u32);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for i in 0..n {
        a.push(num_traits::pow(three.clone(), runs[i] as usize));
        let next = runs[i + 1] as usize;
        match Pattern::direction_of(i + 1) {
            Direction::Decreasing => {
                b.push(BigUint::one() << (2 * next));
                h.push(BigInt::one());
            }
            _ => {
                b.push(BigUint::one() << next);
                h.push(-BigInt::one());
            }
        }
    }
    Ok(ChainSystem::new(a, b, h)?)
}

/// Builds the canonical witness for `pattern` and checks it by direct
/// iteration. A verification failure is a defect, never a property of the
/// input.
pub fn forge(pattern: &Pattern) -> Result<Witness, ForgeError> {
    let v1 = pattern.runs()[0] as usize;
    let (w, certificate) = if pattern.len() == 1 {
        (vec![BigUint::one()], None)
    } else {
        let cert = build_system(pattern)?.solve_odd_positive()?;
        (cert.lifted.clone(), Some(cert))
    };
    let m = (&w[0] << (v1 + 1)) - 1u32;
    let check = verify_pattern(&DynamicsParams::collatz(), &m, pattern)
        .expect("forged m is odd and positive");
    if !check.ok {
        return Err(ForgeError::VerificationFailed {
            m,
            pattern: pattern.clone(),
            failure_index: check.failure_index,
        });
    }
    Ok(Witness {
        m,
        w,
        pattern: pattern.clone(),
        certificate,
        verified: true,
    })
}

/// The trajectory values at the end of each run, preceded by `m`.
pub fn segment_boundaries(witness: &Witness) -> Result<Vec<BigUint>, ForgeError> {
    if !witness.verified {
        return Err(ForgeError::Unverified);
    }
    let three = BigUint::from(3u32);
    let mut out = Vec::with_capacity(witness.w.len() + 1);
    out.push(witness.m.clone());
    for (i, (&v, w)) in witness.pattern.runs().iter().zip(&witness.w).enumerate() {
        let core = (num_traits::pow(three.clone(), v as usize) * w) << 1u32;
        out.push(match Pattern::direction_of(i) {
            Direction::Increasing => core - 1u32,
            _ => core + 1u32,
        });
    }
    Ok(out)
}

const SCAN_BLOCK: u64 = 1 << 12;

/// Least odd `m ≤ bound` realizing `pattern`, by exhaustive ascending scan.
///
/// Blocks of candidates are checked in parallel a batch at a time; the first
/// batch containing a hit yields the minimum over its blocks, so the answer
/// is the same as a sequential scan.
pub fn minimal_witness(pattern: &Pattern, bound: u64) -> Option<u64> {
    let batch = SCAN_BLOCK * rayon::current_num_threads().max(1) as u64 * 4;
    let mut lo = 1u64;
    while lo <= bound {
        let hi = lo.saturating_add(batch - 1).min(bound);
        let starts: Vec<u64> = (lo..=hi).step_by(SCAN_BLOCK as usize).collect();
        let hit = starts
            .par_iter()
            .filter_map(|&start| {
                let end = start.saturating_add(SCAN_BLOCK - 1).min(hi);
                first_odd(start)
                    .and_then(|s| (s..=end).step_by(2).find(|&m| realizes_u64(m, pattern)))
            })
            .min();
        if hit.is_some() {
            return hit;
        }
        match hi.checked_add(1) {
            Some(next) => lo = next,
            None => break,
        }
    }
    None
}

fn first_odd(n: u64) -> Option<u64> {
    if n % 2 == 1 {
        Some(n)
    } else {
        n.checked_add(1)
    }
}

/// Pattern check in native arithmetic, deferring to the exact path if a
/// value outgrows `u128`.
fn realizes_u64(m: u64, pattern: &Pattern) -> bool {
    let mut cur = u128::from(m);
    for (i, &v) in pattern.runs().iter().enumerate() {
        let rising = Pattern::direction_of(i) == Direction::Increasing;
        for _ in 0..v {
            let Some(t) = cur.checked_mul(3).and_then(|t| t.checked_add(1)) else {
                return verify_pattern(&DynamicsParams::collatz(), &BigUint::from(m), pattern)
                    .map(|c| c.ok)
                    .unwrap_or(false);
            };
            let next = t >> t.trailing_zeros();
            if (next > cur) != rising || next == cur {
                return false;
            }
            cur = next;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{trajectory, DynamicsParams};

    fn pat(v: &[u32]) -> Pattern {
        Pattern::new(v.to_vec()).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn bigs(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| big(x)).collect()
    }

    #[test]
    fn build_system_examples() {
        let s = build_system(&pat(&[1, 1])).unwrap();
        assert_eq!(s, ChainSystem::from_u64(&[3], &[4], &[1]).unwrap());
        let s = build_system(&pat(&[1, 1, 1])).unwrap();
        assert_eq!(
            s,
            ChainSystem::from_u64(&[3, 3], &[4, 2], &[1, -1]).unwrap()
        );
        let s = build_system(&pat(&[2, 1])).unwrap();
        assert_eq!(s, ChainSystem::from_u64(&[9], &[4], &[1]).unwrap());
        assert_eq!(build_system(&pat(&[3])), Err(ForgeError::SingleRun));
    }

    #[test]
    fn forge_examples() {
        let w = forge(&pat(&[1, 1])).unwrap();
        assert_eq!((w.m.clone(), w.w.clone()), (big(27), bigs(&[7, 5])));
        assert!(w.verified);
        let w = forge(&pat(&[1, 1, 1])).unwrap();
        assert_eq!((w.m.clone(), w.w.clone()), (big(59), bigs(&[15, 11, 17])));
        let w = forge(&pat(&[3])).unwrap();
        assert_eq!((w.m.clone(), w.w.clone()), (big(15), bigs(&[1])));
        assert!(w.certificate.is_none());
    }

    #[test]
    fn boundaries_examples() {
        let cases: [(&[u32], &[u64]); 3] = [
            (&[1, 1], &[27, 41, 31]),
            (&[1, 1, 1], &[59, 89, 67, 101]),
            (&[2, 1], &[39, 89, 67]),
        ];
        for (v, want) in cases {
            let w = forge(&pat(v)).unwrap();
            assert_eq!(segment_boundaries(&w).unwrap(), bigs(want));
        }
    }

    #[test]
    fn boundaries_match_trajectory() {
        let w = forge(&pat(&[3, 1, 4, 2])).unwrap();
        let t = trajectory(&DynamicsParams::collatz(), &w.m, 10).unwrap();
        let b = segment_boundaries(&w).unwrap();
        let mut offset = 0usize;
        assert_eq!(b[0], t.values[0]);
        for (i, &v) in w.pattern.runs().iter().enumerate() {
            offset += v as usize;
            assert_eq!(b[i + 1], t.values[offset]);
        }
    }

    #[test]
    fn boundaries_require_verification() {
        let mut w = forge(&pat(&[1, 1])).unwrap();
        w.verified = false;
        assert_eq!(segment_boundaries(&w), Err(ForgeError::Unverified));
    }

    #[test]
    fn minimal_examples() {
        assert_eq!(minimal_witness(&pat(&[1, 1]), 100), Some(3));
        assert_eq!(minimal_witness(&pat(&[1, 1, 1]), 100), Some(19));
        assert_eq!(minimal_witness(&pat(&[50]), 100), None);
        assert_eq!(minimal_witness(&pat(&[1]), 1), None);
        assert_eq!(minimal_witness(&pat(&[1]), 3), Some(3));
    }

    #[test]
    fn minimal_scan_crosses_blocks() {
        // 2^14 - 1 is the least odd m rising 13 steps in a row
        assert_eq!(minimal_witness(&pat(&[13]), 1 << 20), Some((1 << 14) - 1));
    }

    #[test]
    fn minimal_near_u64_max_terminates() {
        assert_eq!(
            minimal_witness(&pat(&[1]), u64::MAX).map(|m| m % 2),
            Some(1)
        );
    }
}
