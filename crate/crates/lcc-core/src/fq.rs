//! Arithmetic over prime fields F_q, 2 <= q <= 2^16.
//!
//! Elements carry their modulus; mixing moduli is a programming error and
//! panics. Only prime q is accepted: the coupling argument needs nothing
//! beyond generic field arithmetic, and prime fields avoid any polynomial
//! representation choice.

use crate::error::Error;

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime_modulus(q: u32) -> Result<(), Error> {
    if q < 2 || q > 1 << 16 {
        return Err(Error::Precondition(format!(
            "field modulus {q} out of range [2, 2^16]"
        )));
    }
    if !is_prime(q) {
        return Err(Error::Precondition(format!("field modulus {q} is not prime")));
    }
    Ok(())
}

/// A residue in [0, q) for prime q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FqElement {
    value: u32,
    q: u32,
}

impl FqElement {
    pub fn new(value: u32, q: u32) -> Self {
        debug_assert!(q >= 2);
        FqElement { value: value % q, q }
    }

    pub fn zero(q: u32) -> Self {
        FqElement { value: 0, q }
    }

    pub fn one(q: u32) -> Self {
        FqElement { value: 1 % q, q }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check(&self, other: &FqElement) {
        assert_eq!(self.q, other.q, "mixed field moduli {} and {}", self.q, other.q);
    }

    pub fn add(self, other: FqElement) -> FqElement {
        self.check(&other);
        FqElement::new(self.value + other.value, self.q)
    }

    pub fn sub(self, other: FqElement) -> FqElement {
        self.check(&other);
        FqElement::new(self.value + self.q - other.value, self.q)
    }

    pub fn mul(self, other: FqElement) -> FqElement {
        self.check(&other);
        FqElement::new(
            ((self.value as u64 * other.value as u64) % self.q as u64) as u32,
            self.q,
        )
    }

    pub fn neg(self) -> FqElement {
        FqElement::new(self.q - self.value, self.q)
    }

    /// Multiplicative inverse; zero has none.
    pub fn inv(self) -> Result<FqElement, Error> {
        if self.value == 0 {
            return Err(Error::Domain("inversion of zero".into()));
        }
        // Fermat: a^(q-2) mod q.
        let mut base = self.value as u64;
        let mut exp = self.q as u64 - 2;
        let q = self.q as u64;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % q;
            }
            base = base * base % q;
            exp >>= 1;
        }
        Ok(FqElement::new(acc as u32, self.q))
    }
}

/// A length-`k` vector over F_q.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqVector {
    q: u32,
    vals: Vec<u32>,
}

impl FqVector {
    pub fn zeros(q: u32, dim: usize) -> Self {
        FqVector {
            q,
            vals: vec![0; dim],
        }
    }

    pub fn from_values(q: u32, vals: Vec<u32>) -> Result<Self, Error> {
        if let Some(v) = vals.iter().find(|&&v| v >= q) {
            return Err(Error::Structure(format!(
                "vector entry {v} not a residue mod {q}"
            )));
        }
        Ok(FqVector { q, vals })
    }

    pub fn unit(q: u32, dim: usize, i: usize) -> Self {
        let mut v = FqVector::zeros(q, dim);
        v.vals[i] = 1 % q;
        v
    }

    pub fn dim(&self) -> usize {
        self.vals.len()
    }

    pub fn modulus(&self) -> u32 {
        self.q
    }

    pub fn get(&self, i: usize) -> FqElement {
        FqElement::new(self.vals[i], self.q)
    }

    pub fn set(&mut self, i: usize, e: FqElement) {
        assert_eq!(e.modulus(), self.q);
        self.vals[i] = e.value();
    }

    pub fn values(&self) -> &[u32] {
        &self.vals
    }

    /// self += coeff * other
    pub fn add_scaled(&mut self, coeff: FqElement, other: &FqVector) {
        assert_eq!(self.q, other.q);
        assert_eq!(self.vals.len(), other.vals.len());
        let q = self.q as u64;
        let c = coeff.value() as u64;
        for (a, &b) in self.vals.iter_mut().zip(&other.vals) {
            *a = ((*a as u64 + c * b as u64) % q) as u32;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|&v| v == 0)
    }

    /// Hamming weight (number of nonzero entries).
    pub fn weight(&self) -> usize {
        self.vals.iter().filter(|&&v| v != 0).count()
    }

    /// Indices of nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.vals.len()).filter(|&i| self.vals[i] != 0).collect()
    }

    pub fn hamming_distance(&self, other: &FqVector) -> usize {
        assert_eq!(self.q, other.q);
        assert_eq!(self.vals.len(), other.vals.len());
        self.vals
            .iter()
            .zip(&other.vals)
            .filter(|(a, b)| a != b)
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inv_by_scan() {
        // q=5: the residue x with 2x = 1 mod 5 is 3.
        let expected = (1..5).find(|&x| 2 * x % 5 == 1).unwrap();
        assert_eq!(expected, 3);
        assert_eq!(FqElement::new(2, 5).inv().unwrap().value(), 3);
        for q in [2u32, 3, 5, 7, 11, 13, 251] {
            for a in 1..q.min(40) {
                let inv = FqElement::new(a, q).inv().unwrap();
                assert_eq!(FqElement::new(a, q).mul(inv).value(), 1);
            }
        }
    }

    #[test]
    fn inv_zero_fails() {
        assert!(FqElement::zero(7).inv().is_err());
    }

    #[test]
    fn add_char_two() {
        assert_eq!(
            FqElement::new(1, 2).add(FqElement::new(1, 2)),
            FqElement::zero(2)
        );
    }

    #[test]
    fn mul_with_negation() {
        // q=7: 3 * (-3) = 3 * 4 = 12 = 5 mod 7.
        let a = FqElement::new(3, 7);
        assert_eq!(a.mul(a.neg()).value(), 5);
    }

    #[test]
    fn field_axioms_small() {
        for q in [2u32, 3, 5, 7] {
            for a in 0..q {
                for b in 0..q {
                    let ea = FqElement::new(a, q);
                    let eb = FqElement::new(b, q);
                    assert_eq!(ea.add(eb), eb.add(ea));
                    assert_eq!(ea.mul(eb), eb.mul(ea));
                    assert_eq!(ea.add(ea.neg()), FqElement::zero(q));
                    assert_eq!(ea.sub(eb), ea.add(eb.neg()));
                    for c in 0..q {
                        let ec = FqElement::new(c, q);
                        assert_eq!(ea.mul(eb.add(ec)), ea.mul(eb).add(ea.mul(ec)));
                    }
                }
            }
        }
    }

    #[test]
    fn primality() {
        assert!(is_prime(2));
        assert!(is_prime(65521));
        assert!(!is_prime(1));
        assert!(!is_prime(4));
        assert!(check_prime_modulus(4).is_err());
        assert!(check_prime_modulus(1 << 17).is_err());
        assert!(check_prime_modulus(13).is_ok());
    }

    #[test]
    fn vector_ops() {
        let mut v = FqVector::zeros(5, 3);
        v.add_scaled(FqElement::new(2, 5), &FqVector::from_values(5, vec![1, 2, 0]).unwrap());
        assert_eq!(v.values(), &[2, 4, 0]);
        assert_eq!(v.weight(), 2);
        assert_eq!(v.support(), vec![0, 1]);
        let w = FqVector::from_values(5, vec![2, 0, 0]).unwrap();
        assert_eq!(v.hamming_distance(&w), 1);
        assert!(FqVector::from_values(5, vec![5]).is_err());
    }
}
