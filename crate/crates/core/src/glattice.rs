//! First cohomology of a finite cyclic group acting on a lattice.
//!
//! A [`GLattice`] is `Z^n` with the action of `Z/k` generated by a
//! finite-order unimodular matrix `g0`. `H^1` is computed directly as
//! `ker N / im(g0 - 1)` and, independently, from counts of fixed vectors modulo
//! `k` and modulo an auxiliary prime `q`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::zlinalg::{
    cokernel, fixed_card_mod, is_prime, kernel_basis, prime_divisors, rank_mod, solve_integer,
    AbelianGroup, IntMatrix,
};

/// Iterated powers are abandoned past this order.
pub const ORDER_BOUND: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GLattice {
    g0: IntMatrix,
    order: usize,
}

/// Outcome of the fixed-dimension triviality test for `H^1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Certificate {
    ProvenTrivial,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H1Report {
    pub group: AbelianGroup,
    pub card_oracle: BigUint,
    pub card_formula: BigUint,
    pub card_prime_formula: Option<BigUint>,
    pub q_used: u64,
    pub certificate: Certificate,
}

/// Validates `g0` and computes its order.
pub fn make_glattice(g0: IntMatrix) -> Result<GLattice> {
    if !g0.is_square() {
        return Err(Error::NotSquare {
            rows: g0.rows(),
            cols: g0.cols(),
        });
    }
    let det = g0.determinant()?;
    if det.abs() != BigInt::one() {
        return Err(Error::NotUnimodular(det.abs().to_string()));
    }
    let n = BigInt::from(g0.rows());
    let mut power = g0.clone();
    let mut order = 1;
    while !power.is_identity() {
        // Powers of a finite-order matrix have roots of unity as eigenvalues,
        // so their traces stay within [-n, n].
        if power.trace().abs() > n || order >= ORDER_BOUND {
            return Err(Error::InfiniteOrder(ORDER_BOUND));
        }
        power = &power * &g0;
        order += 1;
    }
    Ok(GLattice { g0, order })
}

/// Smallest prime not dividing `k`.
pub fn smallest_coprime_prime(k: usize) -> u64 {
    (2u64..)
        .find(|&p| is_prime(p) && (k as u64) % p != 0)
        .expect("primes are unbounded")
}

impl GLattice {
    pub fn rank(&self) -> usize {
        self.g0.rows()
    }

    pub fn g0(&self) -> &IntMatrix {
        &self.g0
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `g0 - I`, whose kernel is the fixed sublattice.
    pub fn g0_minus_identity(&self) -> IntMatrix {
        &self.g0 - &IntMatrix::identity(self.rank())
    }

    /// Norm element `N = I + g0 + ... + g0^{k-1}`.
    pub fn norm_matrix(&self) -> IntMatrix {
        let n = self.rank();
        let mut sum = IntMatrix::zeros(n, n);
        let mut power = IntMatrix::identity(n);
        for _ in 0..self.order {
            for i in 0..n {
                for j in 0..n {
                    sum[(i, j)] += &power[(i, j)];
                }
            }
            power = &power * &self.g0;
        }
        sum
    }

    /// Dimension of the fixed space of the action on `A ⊗ Z/p`.
    pub fn fixed_dim_mod(&self, p: u64) -> Result<usize> {
        Ok(self.rank() - rank_mod(&self.g0_minus_identity(), p)?)
    }

    /// `H^1(Z/k, A) = ker N / im(g0 - 1)`, always finite.
    pub fn h1_oracle(&self) -> Result<AbelianGroup> {
        let kernel = kernel_basis(&self.norm_matrix());
        let image = self.g0_minus_identity();
        let mut coords = Vec::with_capacity(image.cols());
        for j in 0..image.cols() {
            let c = solve_integer(&kernel, &image.column(j)).ok_or_else(|| {
                Error::Internal("im(g0 - 1) is not contained in ker N".to_string())
            })?;
            coords.push(c);
        }
        let relations = IntMatrix::from_columns(kernel.cols(), &coords)?;
        let group = cokernel(&relations);
        if !group.is_finite() {
            return Err(Error::Internal(format!("H^1 came out infinite: {group}")));
        }
        Ok(group)
    }

    fn check_coprime(&self, q: u64) -> Result<()> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if (self.order as u64).gcd(&q) != 1 {
            return Err(Error::NotCoprime {
                q,
                order: self.order,
            });
        }
        Ok(())
    }

    /// `card (A ⊗ Z/k)^G · k^{-rank (A ⊗ Z/q)^G}` with exact division.
    pub fn h1_card_formula(&self, q: u64) -> Result<BigUint> {
        self.check_coprime(q)?;
        let k = self.order as u64;
        if k == 1 {
            return Ok(BigUint::one());
        }
        let fixed = fixed_card_mod(&self.g0_minus_identity(), k)?;
        let exponent = self.fixed_dim_mod(q)?;
        let denominator = BigUint::from(k).pow(exponent as u32);
        let (quotient, remainder) = fixed.div_rem(&denominator);
        if remainder != BigUint::ZERO {
            return Err(Error::Internal(format!(
                "fixed count {fixed} not divisible by {denominator}"
            )));
        }
        Ok(quotient)
    }

    /// `p^{dim (A ⊗ Z/p)^G - dim (A ⊗ Z/q)^G}` for a group of prime order `p`.
    pub fn h1_card_prime_formula(&self, q: u64) -> Result<BigUint> {
        let p = self.order as u64;
        if !is_prime(p) {
            return Err(Error::OrderNotPrime(self.order));
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if q == p {
            return Err(Error::SamePrime(q));
        }
        let dim_p = self.fixed_dim_mod(p)?;
        let dim_q = self.fixed_dim_mod(q)?;
        let exponent = dim_p.checked_sub(dim_q).ok_or_else(|| {
            Error::Internal(format!(
                "fixed dimension mod {p} ({dim_p}) below mod {q} ({dim_q})"
            ))
        })?;
        Ok(BigUint::from(p).pow(exponent as u32))
    }

    /// `ProvenTrivial` when the fixed dimension mod every prime divisor of `k`
    /// equals the fixed dimension mod `q`.
    pub fn h1_triviality_certificate(&self, q: u64) -> Result<Certificate> {
        self.check_coprime(q)?;
        let dim_q = self.fixed_dim_mod(q)?;
        for p in prime_divisors(self.order as u64) {
            if self.fixed_dim_mod(p)? != dim_q {
                return Ok(Certificate::Inconclusive);
            }
        }
        Ok(Certificate::ProvenTrivial)
    }

    /// `(A_G, Tors A_G)` with `A_G = A / im(g0 - 1)`.
    pub fn coinvariants(&self) -> (AbelianGroup, AbelianGroup) {
        let coinv = cokernel(&self.g0_minus_identity());
        let tors = coinv.torsion_part();
        (coinv, tors)
    }

    /// Runs every route to `H^1` and fails if any two disagree.
    pub fn h1_report(&self, q: Option<u64>) -> Result<H1Report> {
        let q = q.unwrap_or_else(|| smallest_coprime_prime(self.order));
        let group = self.h1_oracle()?;
        let card_oracle = group.torsion_order();
        let card_formula = self.h1_card_formula(q)?;
        let card_prime_formula = if is_prime(self.order as u64) {
            Some(self.h1_card_prime_formula(q)?)
        } else {
            None
        };
        let certificate = self.h1_triviality_certificate(q)?;
        if card_formula != card_oracle {
            return Err(Error::Internal(format!(
                "H^1 formula gives {card_formula}, oracle gives {card_oracle}"
            )));
        }
        if let Some(c) = &card_prime_formula {
            if *c != card_oracle {
                return Err(Error::Internal(format!(
                    "prime-order formula gives {c}, oracle gives {card_oracle}"
                )));
            }
        }
        if certificate == Certificate::ProvenTrivial && !group.is_trivial() {
            return Err(Error::Internal(format!(
                "triviality certificate contradicted by H^1 = {group}"
            )));
        }
        Ok(H1Report {
            group,
            card_oracle,
            card_formula,
            card_prime_formula,
            q_used: q,
            certificate,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(rows: &[&[i64]]) -> GLattice {
        make_glattice(IntMatrix::from_i64(rows)).unwrap()
    }

    fn rot3() -> GLattice {
        lattice(&[&[0, -1], &[1, -1]])
    }

    #[test]
    fn construction() {
        assert_eq!(make_glattice(IntMatrix::identity(2)).unwrap().order(), 1);
        assert_eq!(rot3().order(), 3);
        assert_eq!(
            make_glattice(IntMatrix::from_i64(&[&[2, 0], &[0, 1]])),
            Err(Error::NotUnimodular("2".into()))
        );
        assert!(matches!(
            make_glattice(IntMatrix::from_i64(&[&[1, 1], &[1, 0]])),
            Err(Error::InfiniteOrder(_))
        ));
        assert!(matches!(
            make_glattice(IntMatrix::from_i64(&[&[1, 1, 0]])),
            Err(Error::NotSquare { .. })
        ));
        // unipotent: traces stay small, the iteration bound must catch it
        assert!(matches!(
            make_glattice(IntMatrix::from_i64(&[&[1, 1], &[0, 1]])),
            Err(Error::InfiniteOrder(_))
        ));
    }

    #[test]
    fn oracle_examples() {
        assert!(make_glattice(IntMatrix::identity(3))
            .unwrap()
            .h1_oracle()
            .unwrap()
            .is_trivial());
        let neg = lattice(&[&[-1]]);
        assert_eq!(neg.h1_oracle().unwrap().to_string(), "Z/2");
        let swap = lattice(&[&[0, 1], &[1, 0]]);
        assert!(swap.h1_oracle().unwrap().is_trivial());
        assert_eq!(rot3().h1_oracle().unwrap().to_string(), "Z/3");
        let minus_id = lattice(&[&[-1, 0], &[0, -1]]);
        assert_eq!(minus_id.h1_oracle().unwrap().to_string(), "Z/2 + Z/2");
    }

    #[test]
    fn card_formula_examples() {
        let trivial = make_glattice(IntMatrix::identity(2)).unwrap();
        assert_eq!(trivial.h1_card_formula(5).unwrap(), BigUint::one());
        assert_eq!(
            lattice(&[&[-1]]).h1_card_formula(3).unwrap(),
            BigUint::from(2u32)
        );
        assert_eq!(rot3().h1_card_formula(2).unwrap(), BigUint::from(3u32));
        assert_eq!(
            rot3().h1_card_formula(3),
            Err(Error::NotCoprime { q: 3, order: 3 })
        );
        assert_eq!(rot3().h1_card_formula(4), Err(Error::NotPrime(4)));
    }

    #[test]
    fn prime_formula_examples() {
        assert_eq!(
            lattice(&[&[-1]]).h1_card_prime_formula(3).unwrap(),
            BigUint::from(2u32)
        );
        let swap = lattice(&[&[0, 1], &[1, 0]]);
        assert_eq!(swap.h1_card_prime_formula(3).unwrap(), BigUint::one());
        let z4 = lattice(&[&[0, -1], &[1, 0]]);
        assert_eq!(z4.h1_card_prime_formula(3), Err(Error::OrderNotPrime(4)));
        assert_eq!(rot3().h1_card_prime_formula(3), Err(Error::SamePrime(3)));
    }

    #[test]
    fn prime_formula_exponent_from_fixed_dims() {
        // identity has order 1, so a "trivial Z_p action" is only visible
        // through its fixed dimensions, which agree for every prime
        let l = make_glattice(IntMatrix::block_diagonal(&[
            IntMatrix::from_i64(&[&[0, -1], &[1, -1]]),
            IntMatrix::identity(1),
        ]))
        .unwrap();
        assert_eq!(l.fixed_dim_mod(2).unwrap(), 1);
        assert_eq!(l.fixed_dim_mod(3).unwrap(), 2);
        assert_eq!(l.h1_card_prime_formula(2).unwrap(), BigUint::from(3u32));
        let trivial = make_glattice(IntMatrix::identity(3)).unwrap();
        assert_eq!(trivial.fixed_dim_mod(2).unwrap(), 3);
        assert_eq!(trivial.fixed_dim_mod(5).unwrap(), 3);
        assert_eq!(
            trivial.h1_card_prime_formula(2),
            Err(Error::OrderNotPrime(1))
        );
    }

    #[test]
    fn certificate_examples() {
        let swap = lattice(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            swap.h1_triviality_certificate(3).unwrap(),
            Certificate::ProvenTrivial
        );
        assert_eq!(
            lattice(&[&[-1]]).h1_triviality_certificate(3).unwrap(),
            Certificate::Inconclusive
        );
        let trivial = make_glattice(IntMatrix::identity(2)).unwrap();
        assert_eq!(
            trivial.h1_triviality_certificate(5).unwrap(),
            Certificate::ProvenTrivial
        );
    }

    #[test]
    fn coinvariant_examples() {
        let (ag, tors) = lattice(&[&[-1]]).coinvariants();
        assert_eq!(
            (ag.to_string(), tors.to_string()),
            ("Z/2".into(), "Z/2".into())
        );
        let (ag, tors) = make_glattice(IntMatrix::identity(2))
            .unwrap()
            .coinvariants();
        assert_eq!(ag, AbelianGroup::free(2));
        assert!(tors.is_trivial());
        let (ag, tors) = lattice(&[&[-1, 0], &[0, -1]]).coinvariants();
        assert_eq!(ag.to_string(), "Z/2 + Z/2");
        assert_eq!(ag, tors);
    }

    #[test]
    fn report_for_rot3() {
        let r = rot3().h1_report(None).unwrap();
        assert_eq!(r.q_used, 2);
        assert_eq!(r.card_oracle, BigUint::from(3u32));
        assert_eq!(r.card_prime_formula, Some(BigUint::from(3u32)));
        assert_eq!(r.certificate, Certificate::Inconclusive);
    }

    #[test]
    fn coprime_prime_choice() {
        assert_eq!(smallest_coprime_prime(1), 2);
        assert_eq!(smallest_coprime_prime(2), 3);
        assert_eq!(smallest_coprime_prime(6), 5);
        assert_eq!(smallest_coprime_prime(12), 5);
    }
}
