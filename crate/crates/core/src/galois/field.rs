use std::fmt;

use crate::error::{Error, Result};

/// A residue modulo the field's prime. Only meaningful together with the
/// [`Field`] that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(pub(crate) u64);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Prime field GF(p) together with its smallest primitive element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    p: u64,
    g: u64,
}

impl Field {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let factors = prime_factors(p - 1);
        let g = (2..p)
            .find(|&c| factors.iter().all(|&q| pow_mod(c, (p - 1) / q, p) != 1))
            .ok_or(Error::NoPrimitiveElement(p))?;
        Ok(Field { p, g })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn generator(&self) -> Elem {
        Elem(self.g)
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> Elem {
        Elem(v % self.p)
    }

    pub fn elem_signed(&self, v: i64) -> Elem {
        Elem(v.rem_euclid(self.p as i64) as u64)
    }

    /// Checks that `v` is already a canonical residue.
    pub fn checked_elem(&self, v: u64) -> Result<Elem> {
        if v < self.p {
            Ok(Elem(v))
        } else {
            Err(Error::Parse(format!(
                "symbol {v} is not below p = {}",
                self.p
            )))
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let s = a.0 as u128 + b.0 as u128;
        Elem((s % self.p as u128) as u64)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        if a.0 >= b.0 {
            Elem(a.0 - b.0)
        } else {
            Elem(self.p - (b.0 - a.0))
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if a.0 == 0 {
            a
        } else {
            Elem(self.p - a.0)
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        Elem(((a.0 as u128 * b.0 as u128) % self.p as u128) as u64)
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.0 == 0 {
            return Err(Error::ZeroToNegativePower);
        }
        Ok(Elem(pow_mod(a.0, self.p - 2, self.p)))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `e^exp`; negative exponents use the multiplicative inverse.
    pub fn pow(&self, e: Elem, exp: i64) -> Result<Elem> {
        if exp == 0 {
            return Ok(Elem::ONE);
        }
        if e.0 == 0 {
            return if exp < 0 {
                Err(Error::ZeroToNegativePower)
            } else {
                Ok(Elem::ZERO)
            };
        }
        // nonzero elements have order dividing p - 1
        let order = (self.p - 1) as i64;
        let r = exp.rem_euclid(order) as u64;
        Ok(Elem(pow_mod(e.0, r, self.p)))
    }

    /// `g^exp` with the exponent taken modulo p - 1.
    pub fn gen_pow(&self, exp: i64) -> Elem {
        self.pow(self.generator(), exp)
            .expect("generator is nonzero")
    }

    pub fn dot(&self, a: &[Elem], b: &[Elem]) -> Elem {
        debug_assert_eq!(a.len(), b.len());
        let p = self.p as u128;
        let mut acc: u128 = 0;
        for (x, y) in a.iter().zip(b) {
            acc = (acc + x.0 as u128 * y.0 as u128) % p;
        }
        Elem(acc as u64)
    }

    /// Multiplicative order of a nonzero element, by brute force. Test helper.
    pub fn order(&self, e: Elem) -> Option<u64> {
        if e.0 == 0 {
            return None;
        }
        let mut acc = e.0;
        let mut k = 1;
        while acc != 1 {
            acc = ((acc as u128 * e.0 as u128) % self.p as u128) as u64;
            k += 1;
        }
        Some(k)
    }
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut acc: u128 = 1 % m128;
    let mut b = base as u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime that is `>= n`.
pub fn next_prime(mut n: u64) -> u64 {
    while !is_prime(n) {
        n += 1;
    }
    n
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // brute force: smallest c in 2..p with multiplicative order p - 1
    fn brute_generator(p: u64) -> u64 {
        (2..p)
            .find(|&c| {
                let mut acc = c;
                let mut k = 1;
                while acc != 1 {
                    acc = acc * c % p;
                    k += 1;
                }
                k == p - 1
            })
            .unwrap()
    }

    #[test]
    fn generators_match_brute_force() {
        assert_eq!(brute_generator(7), 3);
        assert_eq!(brute_generator(13), 2);
        assert_eq!(Field::new(7).unwrap().generator().value(), 3);
        assert_eq!(Field::new(13).unwrap().generator().value(), 2);
        for p in [3u64, 5, 11, 17, 19, 23, 29, 31, 37, 41, 43, 101] {
            let f = Field::new(p).unwrap();
            assert_eq!(f.generator().value(), brute_generator(p), "p = {p}");
            assert_eq!(f.order(f.generator()), Some(p - 1));
        }
    }

    #[test]
    fn rejects_non_primes_and_two() {
        assert_eq!(Field::new(2), Err(Error::NotPrime(2)));
        assert_eq!(Field::new(9), Err(Error::NotPrime(9)));
        assert_eq!(Field::new(1), Err(Error::NotPrime(1)));
    }

    #[test]
    fn pow_cases() {
        let f = Field::new(7).unwrap();
        assert_eq!(f.pow(f.elem(3), -1).unwrap(), f.elem(5));
        assert_eq!(f.pow(f.generator(), 0).unwrap(), Elem::ONE);
        assert_eq!(f.pow(f.elem(3), 6).unwrap(), Elem::ONE);
        assert_eq!(f.pow(Elem::ZERO, -2), Err(Error::ZeroToNegativePower));
        assert_eq!(f.pow(Elem::ZERO, 3).unwrap(), Elem::ZERO);
    }

    proptest! {
        #[test]
        fn inverse_and_negation(pi in 0usize..3, a in 0u64..1000) {
            let p = [7u64, 13, 101][pi];
            let f = Field::new(p).unwrap();
            let a = f.elem(a);
            prop_assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
            }
        }

        #[test]
        fn negative_pow_inverts(a in 1u64..100, k in 0i64..40) {
            let f = Field::new(101).unwrap();
            let a = f.elem(a);
            let pos = f.pow(a, k).unwrap();
            let neg = f.pow(a, -k).unwrap();
            prop_assert_eq!(f.mul(pos, neg), Elem::ONE);
        }
    }
}
