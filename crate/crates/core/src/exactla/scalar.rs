//! Exact field elements: arbitrary-precision rationals and prime-field residues.
//!
//! Every scalar carries its field tag and arithmetic never mixes tags. Rationals
//! are kept in lowest terms with positive denominator (enforced by `BigRational`);
//! residues satisfy `0 <= v < p` with `p` prime.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The ground field of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    /// The rationals.
    Rational,
    /// The prime field with `p` elements, `p` prime and `p < 2^31`.
    Fp(u64),
}

impl Field {
    pub fn fp(p: u64) -> Result<Field, Error> {
        if p < 2 || p >= (1 << 31) || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        Ok(Field::Fp(p))
    }

    pub fn zero(&self) -> Scalar {
        match self {
            Field::Rational => Scalar::Rat(BigRational::zero()),
            Field::Fp(p) => Scalar::Fp { p: *p, v: 0 },
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            Field::Rational => Scalar::Rat(BigRational::one()),
            Field::Fp(p) => Scalar::Fp { p: *p, v: 1 },
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            Field::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
            Field::Fp(p) => {
                let m = n.rem_euclid(*p as i64) as u64;
                Scalar::Fp { p: *p, v: m }
            }
        }
    }

    /// Smallest element of exact multiplicative order `k`, if one exists.
    ///
    /// Over the rationals only k = 1, 2 are possible (1 and -1). Used by the
    /// zoo to build cyclic cocycles.
    pub fn root_of_unity(&self, k: u64) -> Option<Scalar> {
        if k == 1 {
            return Some(self.one());
        }
        match self {
            Field::Rational => (k == 2).then(|| self.from_i64(-1)),
            Field::Fp(p) => {
                for v in 2..*p {
                    let s = Scalar::Fp { p: *p, v };
                    if !s.pow(k).is_one() {
                        continue;
                    }
                    // exact order k, not a proper divisor
                    if (1..k).filter(|d| k % d == 0).all(|d| !s.pow(d).is_one()) {
                        return Some(s);
                    }
                }
                None
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Rational => write!(f, "rational"),
            Field::Fp(p) => write!(f, "fp:{p}"),
        }
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(de::Error::custom)
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "rational" {
            return Ok(Field::Rational);
        }
        if let Some(p) = s.strip_prefix("fp:") {
            let p: u64 = p.parse().map_err(|_| Error::BadField(s.to_string()))?;
            return Field::fp(p);
        }
        Err(Error::BadField(s.to_string()))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An exact field element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Fp { p: u64, v: u64 },
}

impl Scalar {
    pub fn field(&self) -> Field {
        match self {
            Scalar::Rat(_) => Field::Rational,
            Scalar::Fp { p, .. } => Field::Fp(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Fp { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Fp { v, .. } => *v == 1,
        }
    }

    pub fn rational(num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        Scalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: if *v == 0 { 0 } else { p - v },
            },
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Fp { p, v }, Scalar::Fp { p: q, v: w }) => {
                assert_eq!(p, q, "field mismatch: fp:{p} vs fp:{q}");
                Scalar::Fp { p: *p, v: (v + w) % p }
            }
            _ => panic!("field mismatch: {} vs {}", self.field(), other.field()),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Fp { p, v }, Scalar::Fp { p: q, v: w }) => {
                assert_eq!(p, q, "field mismatch: fp:{p} vs fp:{q}");
                Scalar::Fp { p: *p, v: (v * w) % p }
            }
            _ => panic!("field mismatch: {} vs {}", self.field(), other.field()),
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        match self {
            Scalar::Rat(r) => Some(Scalar::Rat(r.recip())),
            Scalar::Fp { p, v } => {
                // Fermat: v^(p-2) mod p
                let mut acc: u64 = 1;
                let mut base = *v % p;
                let mut e = p - 2;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * base % p;
                    }
                    base = base * base % p;
                    e >>= 1;
                }
                Some(Scalar::Fp { p: *p, v: acc })
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Option<Scalar> {
        other.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, mut e: u64) -> Scalar {
        let mut acc = self.field().one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Parses the serialized form: `"p"`, `"p/q"` (rational, `/1` permitted) — the
    /// prime-field object form is handled by the `Deserialize` impl.
    pub fn parse_rational(s: &str) -> Result<Scalar, Error> {
        let bad = || Error::BadScalar(s.to_string());
        let (num, den) = match s.split_once('/') {
            None => (s.trim(), "1"),
            Some((n, d)) => (n.trim(), d.trim()),
        };
        let n = BigInt::from_str(num).map_err(|_| bad())?;
        let d = BigInt::from_str(den).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Scalar::Rat(BigRational::new(n, d)))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { p, v } => write!(f, "{v} (mod {p})"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Rat(_) => ser.serialize_str(&self.to_string()),
            Scalar::Fp { p, v } => {
                let mut st = ser.serialize_struct("Scalar", 2)?;
                st.serialize_field("p", p)?;
                st.serialize_field("v", v)?;
                st.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;

        impl<'de> Visitor<'de> for V {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a rational string \"p/q\", an integer, or {{\"p\":…,\"v\":…}}")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Scalar, E> {
                Scalar::parse_rational(s).map_err(|e| E::custom(e.to_string()))
            }

            fn visit_i64<E: de::Error>(self, n: i64) -> Result<Scalar, E> {
                Ok(Field::Rational.from_i64(n))
            }

            fn visit_u64<E: de::Error>(self, n: u64) -> Result<Scalar, E> {
                Ok(Scalar::Rat(BigRational::from_integer(BigInt::from(n))))
            }

            fn visit_map<A: de::MapAccess<'de>>(self, mut map: A) -> Result<Scalar, A::Error> {
                let mut p: Option<u64> = None;
                let mut v: Option<i64> = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "p" => p = Some(map.next_value()?),
                        "v" => v = Some(map.next_value()?),
                        other => return Err(de::Error::unknown_field(other, &["p", "v"])),
                    }
                }
                let p = p.ok_or_else(|| de::Error::missing_field("p"))?;
                let v = v.ok_or_else(|| de::Error::missing_field("v"))?;
                let field = Field::fp(p).map_err(|e| de::Error::custom(e.to_string()))?;
                Ok(field.from_i64(v))
            }
        }

        de.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roundtrip() {
        let s = Scalar::parse_rational("-6/4").unwrap();
        assert_eq!(s, Scalar::rational(-3, 2));
        assert_eq!(s.to_string(), "-3/2");
        assert_eq!(Scalar::parse_rational("5/1").unwrap().to_string(), "5");
    }

    #[test]
    fn fp_arithmetic() {
        let f = Field::fp(5).unwrap();
        let two = f.from_i64(2);
        let three = f.from_i64(-2);
        assert_eq!(three, f.from_i64(3));
        assert_eq!(two.mul(&three), f.one());
        assert_eq!(two.inv().unwrap(), f.from_i64(3));
    }

    #[test]
    fn bad_primes_rejected() {
        assert!(Field::fp(1).is_err());
        assert!(Field::fp(4).is_err());
        assert!(Field::fp(6).is_err());
        assert!(Field::fp(7).is_ok());
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(Field::Rational.root_of_unity(2), Some(Scalar::rational(-1, 1)));
        assert_eq!(Field::Rational.root_of_unity(3), None);
        let i = Field::fp(5).unwrap().root_of_unity(4).unwrap();
        assert_eq!(i.pow(2), Field::fp(5).unwrap().from_i64(-1));
    }

    #[test]
    #[should_panic(expected = "field mismatch")]
    fn mixing_fields_panics() {
        let _ = Scalar::rational(1, 1).add(&Field::fp(5).unwrap().one());
    }

    #[test]
    fn json_forms() {
        let s: Scalar = serde_json::from_str("\"3/9\"").unwrap();
        assert_eq!(s, Scalar::rational(1, 3));
        let s: Scalar = serde_json::from_str("{\"p\":7,\"v\":-1}").unwrap();
        assert_eq!(s, Field::fp(7).unwrap().from_i64(6));
        assert_eq!(serde_json::to_string(&s).unwrap(), "{\"p\":7,\"v\":6}");
        assert_eq!(
            serde_json::to_string(&Scalar::rational(4, -6)).unwrap(),
            "\"-2/3\""
        );
    }
}
