//! The two coefficient fields used for evaluation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub const MERSENNE_61: u64 = (1u64 << 61) - 1;

pub trait FieldOps: Sync {
    type Elem: Clone + PartialEq + std::fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    /// `None` when the rational's denominator vanishes in this field.
    fn from_rational(&self, r: &BigRational) -> Option<Self::Elem>;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, e: i32) -> Option<Self::Elem> {
        let base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = self.one();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            n >>= 1;
            if n > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        Some(acc)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Option<PrimeField> {
        is_prime_u64(p).then_some(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn mul_mod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn pow_mod(&self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_mod(acc, a);
            }
            a = self.mul_mod(a, a);
            e >>= 1;
        }
        acc
    }

    fn reduce_big(&self, n: &BigInt) -> u64 {
        let m = n.mod_floor(&BigInt::from(self.p));
        m.to_u64().expect("reduced below modulus")
    }
}

impl FieldOps for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1
    }

    fn from_rational(&self, r: &BigRational) -> Option<u64> {
        let n = self.reduce_big(r.numer());
        let d = self.reduce_big(r.denom());
        let dinv = self.inv(&d)?;
        Some(self.mul_mod(n, dinv))
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = *a as u128 + *b as u128;
        (s % self.p as u128) as u64
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mul_mod(*a, *b)
    }

    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    fn inv(&self, a: &u64) -> Option<u64> {
        if *a % self.p == 0 {
            return None;
        }
        Some(self.pow_mod(*a, self.p - 2))
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct RationalField;

impl FieldOps for RationalField {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn from_rational(&self, r: &BigRational) -> Option<BigRational> {
        Some(r.clone())
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
}

/// A fraction kept unreduced; equality compares cross products.
#[derive(Clone, Debug)]
pub struct Fraction {
    pub num: BigInt,
    pub den: BigInt,
}

impl Fraction {
    pub fn reduce(&self) -> BigRational {
        BigRational::new(self.num.clone(), self.den.clone())
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Fraction) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

/// The rationals without a gcd after every operation. Faster than
/// [`RationalField`] when the operands have thousands of digits and a
/// program is evaluated once.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct FractionField;

impl FieldOps for FractionField {
    type Elem = Fraction;

    fn zero(&self) -> Fraction {
        Fraction { num: BigInt::zero(), den: BigInt::one() }
    }

    fn one(&self) -> Fraction {
        Fraction { num: BigInt::one(), den: BigInt::one() }
    }

    fn from_rational(&self, r: &BigRational) -> Option<Fraction> {
        Some(Fraction { num: r.numer().clone(), den: r.denom().clone() })
    }

    fn add(&self, a: &Fraction, b: &Fraction) -> Fraction {
        if a.den == b.den {
            return Fraction { num: &a.num + &b.num, den: a.den.clone() };
        }
        Fraction { num: &a.num * &b.den + &b.num * &a.den, den: &a.den * &b.den }
    }

    fn mul(&self, a: &Fraction, b: &Fraction) -> Fraction {
        Fraction { num: &a.num * &b.num, den: &a.den * &b.den }
    }

    fn neg(&self, a: &Fraction) -> Fraction {
        Fraction { num: -&a.num, den: a.den.clone() }
    }

    fn inv(&self, a: &Fraction) -> Option<Fraction> {
        (!a.num.is_zero()).then(|| Fraction { num: a.den.clone(), den: a.num.clone() })
    }

    fn is_zero(&self, a: &Fraction) -> bool {
        a.num.is_zero()
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powm = |mut a: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulm(acc, a);
            }
            a = mulm(a, a);
            e >>= 1;
        }
        acc
    };
    let mut d = n - 1;
    let mut r = 0;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = powm(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mulm(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p`, `p/q` or `-p/q` into a rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mersenne_is_prime_and_neighbours_are_not() {
        assert!(is_prime_u64(MERSENNE_61));
        assert!(!is_prime_u64(MERSENNE_61 - 2));
        assert!(!is_prime_u64(1 << 61));
        assert!(is_prime_u64(97));
        assert!(!is_prime_u64(91));
        // a strong pseudoprime to bases 2 and 3
        assert!(!is_prime_u64(1_373_653));
    }

    #[test]
    fn prime_field_inverse() {
        let f = PrimeField::new(MERSENNE_61).unwrap();
        let a = 123_456_789u64;
        let ai = f.inv(&a).unwrap();
        assert_eq!(f.mul(&a, &ai), 1);
        assert_eq!(f.inv(&0), None);
        let half = f.from_rational(&BigRational::new(1.into(), 2.into())).unwrap();
        assert_eq!(f.add(&half, &half), 1);
        let m = f.from_rational(&BigRational::new((-3).into(), 1.into())).unwrap();
        assert_eq!(f.add(&m, &3), 0);
        assert_eq!(f.pow(&2, -1), Some(half));
    }

    #[test]
    fn rational_strings() {
        let r = parse_rational("-6/4").unwrap();
        assert_eq!(rational_to_string(&r), "-3/2");
        assert_eq!(rational_to_string(&parse_rational("5").unwrap()), "5/1");
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
