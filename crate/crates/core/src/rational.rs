//! Exact rationals and the `"p/q"` string encoding used by every schema.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
    let den: BigInt = den.parse().map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

/// Always `p/q`, including integers (`3/1`).
pub fn format(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

pub fn pow_i(base: &Rational, exp: i32) -> Rational {
    if exp >= 0 {
        pow(base, exp as u32)
    } else {
        pow(&base.recip(), exp.unsigned_abs())
    }
}

pub fn floor(q: &Rational) -> BigInt {
    q.floor().to_integer()
}

pub fn ceil(q: &Rational) -> BigInt {
    q.ceil().to_integer()
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

pub fn max_abs(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least common multiple of the denominators.
pub fn common_denominator(v: &[Rational]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub mod serde_rational {
    //! Serde adapters: rationals travel as `"p/q"` strings.
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::Rational;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(crate::rational::format))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter().map(|s| crate::rational::parse(s).map_err(serde::de::Error::custom)).collect()
        }
    }

    pub mod option {
        use super::Rational;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            v.as_ref().map(crate::rational::format).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| crate::rational::parse(&s).map_err(serde::de::Error::custom))
                .transpose()
        }
    }

    pub mod vecvec {
        use super::Rational;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let strings: Vec<Vec<String>> =
                v.iter().map(|row| row.iter().map(crate::rational::format).collect()).collect();
            strings.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
            let raw = Vec::<Vec<String>>::deserialize(d)?;
            raw.iter()
                .map(|row| row.iter().map(|s| crate::rational::parse(s).map_err(serde::de::Error::custom)).collect())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse("-4").unwrap(), int(-4));
        assert_eq!(format(&int(3)), "3/1");
        assert_eq!(format(&ratio(-2, 4)), "-1/2");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn floor_ceil_negative() {
        assert_eq!(floor(&ratio(-1, 2)), BigInt::from(-1));
        assert_eq!(ceil(&ratio(-1, 2)), BigInt::from(0));
        assert_eq!(pow_i(&int(2), -3), ratio(1, 8));
    }
}
