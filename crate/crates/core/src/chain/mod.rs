//! Exact solver for bidiagonal chain systems.
//!
//! A chain system of size `n` is the `n × (n+1)` integer system
//!
//! ```text
//! a[k] * x[k] - b[k] * x[k+1] = h[k]      for k in 0..n
//! ```
//!
//! with every `a[k]` odd and positive, every `b[k]` even and positive, and
//! every `a[i]` coprime to every `b[j]`. Under those conditions the map
//! `x -> M x` is onto `Z^n`, its kernel is spanned by a single positive
//! primitive vector whose first `n` entries are even and whose last entry is
//! odd, and every odd right-hand side admits an odd positive solution.
//!
//! Indices throughout are zero-based: `b[k]` is the magnitude of the
//! superdiagonal entry in row `k`, i.e. it multiplies `x[k+1]`.

mod snf;

pub use snf::{
    smith_normal_form, smith_normal_form_bounded, IntMatrix, SnfError, DEFAULT_SNF_BOUND,
};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("chain system needs at least one equation")]
    Empty,
    #[error("length mismatch: {a} diagonal, {b} superdiagonal, {h} right-hand side entries")]
    LengthMismatch { a: usize, b: usize, h: usize },
    #[error("a[{index}] must be positive")]
    NonPositiveDiagonal { index: usize },
    #[error("b[{index}] must be positive")]
    NonPositiveSuperdiagonal { index: usize },
    #[error("a[{index}] must be odd")]
    EvenDiagonal { index: usize },
    #[error("b[{index}] must be even")]
    OddSuperdiagonal { index: usize },
    #[error("gcd(a[{a_index}], b[{b_index}]) > 1")]
    NotCoprime { a_index: usize, b_index: usize },
    #[error("vector has {got} entries, expected {expected}")]
    VectorLength { expected: usize, got: usize },
    #[error("no integer solution: congruence at row {row} is unsolvable")]
    Unsolvable { row: usize },
    #[error("h[{index}] is even; odd lifting needs an odd right-hand side")]
    EvenRhs { index: usize },
    #[error("vector is not a solution of the system")]
    NotASolution,
    #[error("kernel vector does not belong to this system")]
    KernelMismatch,
}

/// The `n × (n+1)` bidiagonal system together with its right-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSystem {
    coeff_a: Vec<BigUint>,
    coeff_b: Vec<BigUint>,
    rhs: Vec<BigInt>,
}

/// The unique positive primitive generator of the kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelVector {
    entries: Vec<BigUint>,
}

impl KernelVector {
    pub fn entries(&self) -> &[BigUint] {
        &self.entries
    }

    pub fn to_signed(&self) -> Vec<BigInt> {
        self.entries.iter().cloned().map(BigInt::from).collect()
    }
}

/// A particular solution, the odd positive solution derived from it, and
/// the kernel multiple separating the two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionCertificate {
    pub particular: Vec<BigInt>,
    pub lifted: Vec<BigUint>,
    pub shift: BigUint,
}

/// Determinants of the two square submatrices obtained by deleting the first
/// or the last column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerMinors {
    pub det_drop_first: BigInt,
    pub det_drop_last: BigInt,
    pub coprime: bool,
}

impl ChainSystem {
    pub fn new(
        coeff_a: Vec<BigUint>,
        coeff_b: Vec<BigUint>,
        rhs: Vec<BigInt>,
    ) -> Result<Self, ChainError> {
        if coeff_a.len() != coeff_b.len() || coeff_a.len() != rhs.len() {
            return Err(ChainError::LengthMismatch {
                a: coeff_a.len(),
                b: coeff_b.len(),
                h: rhs.len(),
            });
        }
        if coeff_a.is_empty() {
            return Err(ChainError::Empty);
        }
        for (index, a) in coeff_a.iter().enumerate() {
            if a.is_zero() {
                return Err(ChainError::NonPositiveDiagonal { index });
            }
            if a.is_even() {
                return Err(ChainError::EvenDiagonal { index });
            }
        }
        for (index, b) in coeff_b.iter().enumerate() {
            if b.is_zero() {
                return Err(ChainError::NonPositiveSuperdiagonal { index });
            }
            if b.is_odd() {
                return Err(ChainError::OddSuperdiagonal { index });
            }
        }
        for (a_index, a) in coeff_a.iter().enumerate() {
            for (b_index, b) in coeff_b.iter().enumerate() {
                if !a.gcd(b).is_one() {
                    return Err(ChainError::NotCoprime { a_index, b_index });
                }
            }
        }
        Ok(Self {
            coeff_a,
            coeff_b,
            rhs,
        })
    }

    /// Convenience constructor from machine integers.
    pub fn from_u64(a: &[u64], b: &[u64], h: &[i64]) -> Result<Self, ChainError> {
        Self::new(
            a.iter().map(|&v| BigUint::from(v)).collect(),
            b.iter().map(|&v| BigUint::from(v)).collect(),
            h.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    /// Number of equations `n`; there are `n + 1` unknowns.
    pub fn len(&self) -> usize {
        self.coeff_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeff_a.is_empty()
    }

    pub fn coeff_a(&self) -> &[BigUint] {
        &self.coeff_a
    }

    pub fn coeff_b(&self) -> &[BigUint] {
        &self.coeff_b
    }

    pub fn rhs(&self) -> &[BigInt] {
        &self.rhs
    }

    /// Dense form of `M`, for the Smith normal form oracle.
    pub fn matrix(&self) -> IntMatrix {
        let n = self.len();
        let mut m = IntMatrix::zeros(n, n + 1);
        for k in 0..n {
            m.set(k, k, BigInt::from(self.coeff_a[k].clone()));
            m.set(k, k + 1, -BigInt::from(self.coeff_b[k].clone()));
        }
        m
    }

    /// `M x`, exactly.
    pub fn apply(&self, x: &[BigInt]) -> Result<Vec<BigInt>, ChainError> {
        let n = self.len();
        if x.len() != n + 1 {
            return Err(ChainError::VectorLength {
                expected: n + 1,
                got: x.len(),
            });
        }
        Ok((0..n)
            .map(|k| {
                BigInt::from_biguint(Sign::Plus, self.coeff_a[k].clone()) * &x[k]
                    - BigInt::from_biguint(Sign::Plus, self.coeff_b[k].clone()) * &x[k + 1]
            })
            .collect())
    }

    /// The positive primitive kernel generator, built from the closed form
    /// `z[i] = prod(a[..i]) * prod(b[i..])` and reduced by the gcd.
    pub fn kernel_primitive(&self) -> KernelVector {
        let n = self.len();
        // suffix[i] = b[i] * ... * b[n-1]
        let mut suffix = vec![BigUint::one(); n + 1];
        for i in (0..n).rev() {
            suffix[i] = &suffix[i + 1] * &self.coeff_b[i];
        }
        let mut prefix = BigUint::one();
        let mut entries = Vec::with_capacity(n + 1);
        for (i, tail) in suffix.iter().enumerate() {
            entries.push(&prefix * tail);
            if let Some(a) = self.coeff_a.get(i) {
                prefix *= a;
            }
        }
        let g = entries.iter().fold(BigUint::zero(), |acc, e| acc.gcd(e));
        if !g.is_one() {
            for e in entries.iter_mut() {
                *e /= &g;
            }
        }
        KernelVector { entries }
    }

    /// An integer solution of `M x = h` with `x[0]` the least nonnegative
    /// value for which one exists.
    ///
    /// Forward sweep: the admissible values of `x[0]` form one residue class
    /// `r mod modulus`. Row `k` expresses `x[k+1]` as an affine function of
    /// the class parameter; requiring it to be integral is a single linear
    /// congruence modulo `b[k]`, which refines the class.
    pub fn particular_solution(&self) -> Result<Vec<BigInt>, ChainError> {
        let n = self.len();
        // x[0] = residue + modulus * t
        let mut residue = BigInt::zero();
        let mut modulus = BigInt::one();
        // x[k] = offset + slope * t for the current row k
        let mut offset = BigInt::zero();
        let mut slope = BigInt::one();

        for k in 0..n {
            let a = BigInt::from(self.coeff_a[k].clone());
            let b = BigInt::from(self.coeff_b[k].clone());
            let h = &self.rhs[k];

            // need a*(offset + slope*t) - h ≡ 0 (mod b)
            let coeff = (&a * &slope).mod_floor(&b);
            let target = (h - &a * &offset).mod_floor(&b);
            let (t0, step) = solve_linear_congruence(&coeff, &target, &b)
                .ok_or(ChainError::Unsolvable { row: k })?;

            residue += &modulus * &t0;
            modulus *= &step;
            offset += &slope * &t0;
            slope *= &step;

            let num = &a * &offset - h;
            debug_assert!(num.is_multiple_of(&b));
            offset = num / &b;
            slope = &a * &slope / &b;
        }

        let mut x = Vec::with_capacity(n + 1);
        x.push(residue.mod_floor(&modulus));
        for k in 0..n {
            let a = BigInt::from(self.coeff_a[k].clone());
            let b = BigInt::from(self.coeff_b[k].clone());
            let num = &a * &x[k] - &self.rhs[k];
            let (q, rem) = num.div_mod_floor(&b);
            if !rem.is_zero() {
                return Err(ChainError::Unsolvable { row: k });
            }
            x.push(q);
        }
        Ok(x)
    }

    /// Adds the least `k ≥ 0` multiple of `z` to `x` that makes every entry
    /// positive and the last entry odd.
    ///
    /// Requires an odd right-hand side, which forces `x[0..n]` odd; the
    /// kernel's even entries preserve that, and its odd last entry flips the
    /// parity of the last coordinate with each unit of `k`.
    pub fn odd_positive_lift(
        &self,
        x: &[BigInt],
        z: &KernelVector,
    ) -> Result<SolutionCertificate, ChainError> {
        let n = self.len();
        if let Some(index) = self.rhs.iter().position(|h| h.is_even()) {
            return Err(ChainError::EvenRhs { index });
        }
        if self.apply(x)? != self.rhs {
            return Err(ChainError::NotASolution);
        }
        let zs = z.to_signed();
        if zs.len() != n + 1 || self.apply(&zs)?.iter().any(|v| !v.is_zero()) {
            return Err(ChainError::KernelMismatch);
        }

        // smallest k with x[i] + k z[i] ≥ 1 for all i
        let one = BigInt::one();
        let mut k = BigInt::zero();
        for (xi, zi) in x.iter().zip(&zs) {
            let need = (&one - xi).div_ceil(zi);
            if need > k {
                k = need;
            }
        }
        if (&x[n] + &k * &zs[n]).is_even() {
            k += 1;
        }

        let lifted: Vec<BigUint> = x
            .iter()
            .zip(&zs)
            .map(|(xi, zi)| {
                let g = xi + &k * zi;
                debug_assert!(g.is_positive() && g.is_odd());
                g.to_biguint().expect("lifted entry is positive")
            })
            .collect();
        Ok(SolutionCertificate {
            particular: x.to_vec(),
            lifted,
            shift: k.to_biguint().expect("shift is nonnegative"),
        })
    }

    /// Particular solution, kernel, and lift in one call.
    pub fn solve_odd_positive(&self) -> Result<SolutionCertificate, ChainError> {
        if let Some(index) = self.rhs.iter().position(|h| h.is_even()) {
            return Err(ChainError::EvenRhs { index });
        }
        let x = self.particular_solution()?;
        let z = self.kernel_primitive();
        self.odd_positive_lift(&x, &z)
    }

    pub fn corner_minor_certificate(&self) -> CornerMinors {
        let prod_b: BigUint = self.coeff_b.iter().product();
        let prod_a: BigUint = self.coeff_a.iter().product();
        let coprime = prod_a.gcd(&prod_b).is_one();
        let sign = if self.len().is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        };
        CornerMinors {
            det_drop_first: BigInt::from_biguint(sign, prod_b),
            det_drop_last: BigInt::from(prod_a),
            coprime,
        }
    }
}

/// Solves `coeff * t ≡ target (mod modulus)` for `modulus > 0`. Returns the
/// least nonnegative solution and the modulus of the solution class.
fn solve_linear_congruence(
    coeff: &BigInt,
    target: &BigInt,
    modulus: &BigInt,
) -> Option<(BigInt, BigInt)> {
    let g = coeff.gcd(modulus);
    if !target.is_multiple_of(&g) {
        return None;
    }
    let step = modulus / &g;
    if step.is_one() {
        return Some((BigInt::zero(), step));
    }
    let reduced = (coeff / &g).mod_floor(&step);
    let inv = mod_inverse(&reduced, &step)?;
    let t0 = ((target / &g) * inv).mod_floor(&step);
    Some((t0, step))
}

fn mod_inverse(value: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    let e = value.extended_gcd(modulus);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(modulus))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn uints(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn constructor_accepts_smallest_instances() {
        assert!(ChainSystem::from_u64(&[3], &[4], &[1]).is_ok());
        assert!(ChainSystem::from_u64(&[3, 3], &[4, 2], &[1, -1]).is_ok());
    }

    #[test]
    fn constructor_errors_carry_index() {
        assert_eq!(
            ChainSystem::from_u64(&[3], &[3], &[1]),
            Err(ChainError::OddSuperdiagonal { index: 0 })
        );
        assert_eq!(
            ChainSystem::from_u64(&[3, 4], &[4, 2], &[1, 1]),
            Err(ChainError::EvenDiagonal { index: 1 })
        );
        assert_eq!(
            ChainSystem::from_u64(&[3, 0], &[4, 2], &[1, 1]),
            Err(ChainError::NonPositiveDiagonal { index: 1 })
        );
        assert_eq!(
            ChainSystem::from_u64(&[3], &[0], &[1]),
            Err(ChainError::NonPositiveSuperdiagonal { index: 0 })
        );
        assert_eq!(
            ChainSystem::from_u64(&[3, 5], &[4, 6], &[1, 1]),
            Err(ChainError::NotCoprime {
                a_index: 0,
                b_index: 1
            })
        );
        assert_eq!(
            ChainSystem::from_u64(&[3], &[4, 2], &[1]),
            Err(ChainError::LengthMismatch { a: 1, b: 2, h: 1 })
        );
        assert_eq!(ChainSystem::from_u64(&[], &[], &[]), Err(ChainError::Empty));
    }

    #[test]
    fn apply_examples() {
        let s = ChainSystem::from_u64(&[3], &[4], &[1]).unwrap();
        assert_eq!(s.apply(&ints(&[3, 2])).unwrap(), ints(&[1]));
        assert_eq!(s.apply(&ints(&[0, 0])).unwrap(), ints(&[0]));
        assert_eq!(s.apply(&ints(&[4, 3])).unwrap(), ints(&[0]));
        assert_eq!(
            s.apply(&ints(&[1])),
            Err(ChainError::VectorLength {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn kernel_examples() {
        let cases: [(&[u64], &[u64], &[u64]); 3] = [
            (&[3], &[4], &[4, 3]),
            (&[3, 3], &[4, 2], &[8, 6, 9]),
            (&[9], &[4], &[4, 9]),
        ];
        for (a, b, z) in cases {
            let s = ChainSystem::from_u64(a, b, &vec![1; a.len()]).unwrap();
            assert_eq!(s.kernel_primitive().entries(), uints(z).as_slice());
        }
    }

    #[test]
    fn particular_examples() {
        let s = ChainSystem::from_u64(&[3], &[4], &[1]).unwrap();
        assert_eq!(s.particular_solution().unwrap(), ints(&[3, 2]));
        let s = ChainSystem::from_u64(&[3, 3], &[4, 2], &[1, -1]).unwrap();
        assert_eq!(s.particular_solution().unwrap(), ints(&[7, 5, 8]));
        let s = ChainSystem::from_u64(&[9], &[4], &[1]).unwrap();
        assert_eq!(s.particular_solution().unwrap(), ints(&[1, 2]));
    }

    #[test]
    fn particular_with_non_power_of_two_b() {
        // b's share the factor 2 with each other but not with the a's
        let s = ChainSystem::from_u64(&[7, 11, 13], &[6, 10, 4], &[3, -8, 1]).unwrap();
        let x = s.particular_solution().unwrap();
        assert_eq!(s.apply(&x).unwrap(), s.rhs());
        // x[0] is least nonnegative within the class mod z[0]
        let z0 = BigInt::from(s.kernel_primitive().entries()[0].clone());
        assert!(!x[0].is_negative() && x[0] < z0);
    }

    #[test]
    fn lift_examples() {
        let s = ChainSystem::from_u64(&[3], &[4], &[1]).unwrap();
        let c = s
            .odd_positive_lift(&ints(&[3, 2]), &s.kernel_primitive())
            .unwrap();
        assert_eq!(c.lifted, uints(&[7, 5]));
        assert_eq!(c.shift, BigUint::one());

        let s = ChainSystem::from_u64(&[3, 3], &[4, 2], &[1, -1]).unwrap();
        let c = s
            .odd_positive_lift(&ints(&[7, 5, 8]), &s.kernel_primitive())
            .unwrap();
        assert_eq!(c.lifted, uints(&[15, 11, 17]));
        assert_eq!(c.shift, BigUint::one());

        // already odd positive: 3*7 - 4*5 = 1
        let s = ChainSystem::from_u64(&[3], &[4], &[1]).unwrap();
        let c = s
            .odd_positive_lift(&ints(&[7, 5]), &s.kernel_primitive())
            .unwrap();
        assert_eq!(c.lifted, uints(&[7, 5]));
        assert!(c.shift.is_zero());
    }

    #[test]
    fn lift_handles_negative_particular() {
        let s = ChainSystem::from_u64(&[3], &[4], &[1]).unwrap();
        // 3*(-5) - 4*(-4) = 1
        let c = s
            .odd_positive_lift(&ints(&[-5, -4]), &s.kernel_primitive())
            .unwrap();
        assert_eq!(c.lifted, uints(&[7, 5]));
        assert_eq!(c.shift, BigUint::from(3u32));
    }

    #[test]
    fn lift_rejects_bad_input() {
        let s = ChainSystem::from_u64(&[3], &[4], &[2]).unwrap();
        assert_eq!(
            s.odd_positive_lift(&ints(&[2, 1]), &s.kernel_primitive()),
            Err(ChainError::EvenRhs { index: 0 })
        );
        let s = ChainSystem::from_u64(&[3], &[4], &[1]).unwrap();
        assert_eq!(
            s.odd_positive_lift(&ints(&[1, 1]), &s.kernel_primitive()),
            Err(ChainError::NotASolution)
        );
        let other = ChainSystem::from_u64(&[9], &[4], &[1]).unwrap();
        assert_eq!(
            s.odd_positive_lift(&ints(&[3, 2]), &other.kernel_primitive()),
            Err(ChainError::KernelMismatch)
        );
    }

    #[test]
    fn solve_examples() {
        type Case<'a> = (&'a [u64], &'a [u64], &'a [i64], &'a [u64]);
        let cases: [Case; 3] = [
            (&[3], &[4], &[1], &[7, 5]),
            (&[3, 3], &[4, 2], &[1, -1], &[15, 11, 17]),
            (&[9], &[4], &[1], &[5, 11]),
        ];
        for (a, b, h, g) in cases {
            let s = ChainSystem::from_u64(a, b, h).unwrap();
            assert_eq!(s.solve_odd_positive().unwrap().lifted, uints(g));
        }
    }

    #[test]
    fn corner_minor_examples() {
        let s = ChainSystem::from_u64(&[3], &[4], &[1]).unwrap();
        let c = s.corner_minor_certificate();
        assert_eq!(c.det_drop_first, BigInt::from(-4));
        assert_eq!(c.det_drop_last, BigInt::from(3));
        assert!(c.coprime);
        let s = ChainSystem::from_u64(&[3, 3], &[4, 2], &[1, -1]).unwrap();
        let c = s.corner_minor_certificate();
        assert_eq!(c.det_drop_first, BigInt::from(8));
        assert_eq!(c.det_drop_last, BigInt::from(9));
        assert!(c.coprime);
    }

    #[test]
    fn congruence_solver() {
        let (t, step) =
            solve_linear_congruence(&BigInt::from(6), &BigInt::from(4), &BigInt::from(10)).unwrap();
        assert_eq!(
            (t.clone(), step.clone()),
            (BigInt::from(4), BigInt::from(5))
        );
        assert!(Integer::is_multiple_of(
            &(BigInt::from(6) * t - 4),
            &BigInt::from(10)
        ));
        assert!(
            solve_linear_congruence(&BigInt::from(4), &BigInt::from(1), &BigInt::from(8)).is_none()
        );
    }
}
