//! Directed rational bounds for powers with rational exponents, exact
//! comparisons of power products, and logarithm enclosures.

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{fmt_fraction, from_uint, int, is_power_of_two, Rational};
use crate::error::{Error, Result};

pub const MIN_PRECISION: u32 = 8;
pub const DEFAULT_PRECISION: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

/// A rational lower or upper bound on `base^exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedBound {
    pub value: Rational,
    pub direction: Direction,
    pub base: BigUint,
    pub exponent: Rational,
    /// Bound on `(upper - lower) / lower`; zero when the power is exact.
    pub relative_error_bound: Rational,
}

impl DirectedBound {
    pub fn is_exact(&self) -> bool {
        self.relative_error_bound.is_zero()
    }
}

/// Two-sided enclosure `lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn exact(x: Rational) -> Self {
        Enclosure { lo: x.clone(), hi: x }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn get(&self, dir: Direction) -> &Rational {
        match dir {
            Direction::Lower => &self.lo,
            Direction::Upper => &self.hi,
        }
    }

    pub fn scale(&self, c: &Rational) -> Enclosure {
        debug_assert!(!c.is_negative());
        Enclosure {
            lo: &self.lo * c,
            hi: &self.hi * c,
        }
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Enclosure {
            lo: &self.lo * &other.lo,
            hi: &self.hi * &other.hi,
        }
    }

    pub fn recip(&self) -> Enclosure {
        Enclosure {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        }
    }
}

/// Directed bound on `p^e`; the relative gap between the lower and upper
/// bound is at most `2^-precision`, and zero whenever the power is rational.
pub fn pow_bound(p: &BigUint, e: &Rational, precision: u32, direction: Direction) -> Result<DirectedBound> {
    let enc = pow_enclosure(p, e, precision)?;
    let rel = if enc.is_exact() {
        Rational::zero()
    } else {
        Rational::new(BigInt::one(), BigInt::one() << precision)
    };
    Ok(DirectedBound {
        value: enc.get(direction).clone(),
        direction,
        base: p.clone(),
        exponent: e.clone(),
        relative_error_bound: rel,
    })
}

/// Both directed bounds on `p^e` at once.
pub fn pow_enclosure(p: &BigUint, e: &Rational, precision: u32) -> Result<Enclosure> {
    if *p < BigUint::from(2u32) {
        return Err(Error::InvalidArgument(format!("pow_bound base must be >= 2, got {p}")));
    }
    if precision < MIN_PRECISION {
        return Err(Error::InvalidArgument(format!(
            "pow_bound precision must be >= {MIN_PRECISION}, got {precision}"
        )));
    }
    let u = e.numer();
    let v = e.denom().to_biguint().expect("positive denominator");
    if u.is_zero() {
        return Ok(Enclosure::exact(Rational::one()));
    }
    let mag = u.magnitude().clone();
    let (whole, frac) = mag.div_rem(&v);

    // p^(mag/v) = base^whole_pow * base^(frac_num/v)
    let (int_part, root_base, root_num): (BigUint, BigUint, BigUint) = if is_power_of_two(p) {
        let n = BigUint::from(p.bits() - 1);
        let t = &n * &mag;
        let (w2, f2) = t.div_rem(&v);
        let w2 = w2.to_u64().ok_or_else(|| Error::capacity("exact", "power-of-two exponent too large"))?;
        (BigUint::one() << w2, BigUint::from(2u32), f2)
    } else {
        let w = whole
            .to_u32()
            .ok_or_else(|| Error::capacity("exact", "integer exponent too large"))?;
        (p.pow(w), p.clone(), frac)
    };

    let enc = if root_num.is_zero() {
        Enclosure::exact(from_uint(&int_part))
    } else {
        let vv = v.to_u32().ok_or_else(|| Error::capacity("exact", "exponent denominator too large"))?;
        let fnum = root_num.to_u32().expect("less than denominator");
        let x = root_base.pow(fnum);
        let r = x.nth_root(vv);
        if r.pow(vv) == x {
            Enclosure::exact(from_uint(&(int_part * r)))
        } else {
            let s = precision as usize + 2;
            let scaled = &x << (s * vv as usize);
            let rr = scaled.nth_root(vv);
            let den = BigInt::one() << s;
            let ip = BigInt::from(int_part);
            Enclosure {
                lo: Rational::new(&ip * BigInt::from(rr.clone()), den.clone()),
                hi: Rational::new(&ip * BigInt::from(rr + 1u32), den),
            }
        }
    };
    Ok(if u.is_negative() { enc.recip() } else { enc })
}

/// Enclosure of `x^e` for a positive rational base.
pub fn rational_pow_enclosure(x: &Rational, e: &Rational, precision: u32) -> Result<Enclosure> {
    if !x.is_positive() {
        return Err(Error::InvalidArgument(format!("power base must be positive, got {x}")));
    }
    let prec = precision + 2;
    let part = |n: &BigInt| -> Result<Enclosure> {
        let n = n.to_biguint().expect("positive");
        if n.is_one() {
            Ok(Enclosure::exact(Rational::one()))
        } else {
            pow_enclosure(&n, e, prec)
        }
    };
    let num = part(x.numer())?;
    let den = part(x.denom())?;
    Ok(num.mul(&den.recip()))
}

/// Exact value `coeff * prod(base_i ^ exp_i)` with positive coefficient and
/// integer bases, compared exactly against rationals by raising both sides
/// to the common exponent denominator.
#[derive(Debug, Clone)]
pub struct PowerProduct {
    pub coeff: Rational,
    pub factors: Vec<(BigUint, Rational)>,
}

impl PowerProduct {
    pub fn new(coeff: Rational) -> Self {
        PowerProduct {
            coeff,
            factors: Vec::new(),
        }
    }

    pub fn times(mut self, base: &BigUint, exp: Rational) -> Self {
        self.factors.push((base.clone(), exp));
        self
    }

    pub fn scaled(mut self, c: &Rational) -> Self {
        self.coeff *= c;
        self
    }

    /// Exact three-way comparison `self` vs `rhs`.
    pub fn cmp_rational(&self, rhs: &Rational) -> Ordering {
        assert!(!self.coeff.is_negative(), "power product coefficient must be non-negative");
        if self.coeff.is_zero() {
            return Rational::zero().cmp(rhs);
        }
        if !rhs.is_positive() {
            return Ordering::Greater;
        }
        let mut v = BigInt::one();
        for (_, e) in &self.factors {
            v = v.lcm(e.denom());
        }
        let vv = v.to_u32().expect("exponent denominator lcm fits in u32");
        // left = cn^v * rd^v * prod(b^(u>0)), right = rn^v * cd^v * prod(b^(-u))
        let mut left = (self.coeff.numer() * rhs.denom()).magnitude().pow(vv);
        let mut right = (rhs.numer() * self.coeff.denom()).magnitude().pow(vv);
        for (b, e) in &self.factors {
            let scale = (&v / e.denom()) * e.numer();
            let side = if scale.is_negative() { &mut right } else { &mut left };
            let k = scale.magnitude().to_u64().expect("exponent fits in u64");
            if is_power_of_two(b) {
                *side <<= (b.bits() - 1) * k;
            } else {
                *side *= b.pow(k as u32);
            }
        }
        left.cmp(&right)
    }

    pub fn lt(&self, rhs: &Rational) -> bool {
        self.cmp_rational(rhs) == Ordering::Less
    }

    pub fn le(&self, rhs: &Rational) -> bool {
        self.cmp_rational(rhs) != Ordering::Greater
    }

    /// Rational enclosure of the value.
    pub fn enclosure(&self, precision: u32) -> Result<Enclosure> {
        let mut enc = Enclosure::exact(self.coeff.clone());
        for (b, e) in &self.factors {
            enc = enc.mul(&pow_enclosure(b, e, precision + 4)?);
        }
        Ok(enc)
    }

    pub fn describe(&self) -> String {
        let mut s = fmt_fraction(&self.coeff);
        for (b, e) in &self.factors {
            let base = match super::rational::log2_exact(b) {
                Some(n) => format!("2^{n}"),
                None => b.to_string(),
            };
            s.push_str(&format!("*({base})^({})", fmt_fraction(e)));
        }
        s
    }
}

/// Certified enclosure of `log2(x)` for positive rational `x`, accurate to
/// roughly `frac_bits` fractional bits.
pub fn log2_enclosure(x: &Rational, frac_bits: u32) -> Enclosure {
    assert!(x.is_positive(), "log2 of non-positive value");
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    // integer part n with 2^n <= x < 2^(n+1)
    let mut n = num.bits() as i64 - den.bits() as i64;
    let ge_pow = |n: i64| -> bool {
        if n >= 0 {
            *num >= den << (n as u64)
        } else {
            (num << ((-n) as u64)) >= *den
        }
    };
    if !ge_pow(n) {
        n -= 1;
    }
    debug_assert!(ge_pow(n) && !ge_pow(n + 1));

    let p = frac_bits as u64 + 24;
    let one = BigUint::one() << p;
    let two = BigUint::one() << (p + 1);
    // y = x / 2^n scaled by 2^p
    let (sn, sd) = if n >= 0 {
        (num << p, den << (n as u64))
    } else {
        (num << (p + (-n) as u64), den.clone())
    };
    let (q, r) = sn.div_rem(&sd);
    let mut lo = q.clone();
    let mut hi = if r.is_zero() { q } else { q + 1u32 };
    if lo == one && hi == one {
        return Enclosure::exact(int(n));
    }
    let mut bits = BigUint::zero();
    let mut j = 0u32;
    while j < frac_bits {
        let l2 = &lo * &lo;
        let h2 = &hi * &hi;
        lo = &l2 >> p;
        hi = {
            let (qq, rr) = h2.div_rem(&one);
            if rr.is_zero() {
                qq
            } else {
                qq + 1u32
            }
        };
        bits <<= 1;
        j += 1;
        if lo >= two {
            bits |= BigUint::one();
            lo >>= 1;
            hi = {
                let odd = hi.bit(0);
                let h = &hi >> 1;
                if odd {
                    h + 1u32
                } else {
                    h
                }
            };
        } else if hi < two {
            // bit is zero
        } else {
            break;
        }
    }
    let scale = Rational::new(BigInt::one(), BigInt::one() << j);
    let base = int(n) + from_uint(&bits) * &scale;
    let tail_hi = if hi <= two { int(1) } else { int(2) };
    Enclosure {
        lo: base.clone(),
        hi: base + tail_hi * scale,
    }
}

/// Enclosure of `ln 2` with an error below `2^-100`.
pub fn ln2_enclosure() -> &'static Enclosure {
    static LN2: OnceLock<Enclosure> = OnceLock::new();
    LN2.get_or_init(|| {
        let terms = 110u32;
        let mut s = Rational::zero();
        for k in 1..=terms {
            s += Rational::new(BigInt::one(), BigInt::from(k) * (BigInt::one() << k));
        }
        let tail = Rational::new(BigInt::one(), BigInt::from(terms + 1) * (BigInt::one() << terms));
        Enclosure { lo: s.clone(), hi: s + tail }
    })
}

/// Enclosure of the natural logarithm of a positive integer `m >= 1`.
pub fn ln_enclosure(m: &BigUint, frac_bits: u32) -> Enclosure {
    let l2 = match super::rational::log2_exact(m) {
        Some(n) => Enclosure::exact(int(n)),
        None => log2_enclosure(&from_uint(m), frac_bits),
    };
    l2.mul(ln2_enclosure())
}

/// Enclosure of `log(x) / log(y)` for rationals `x >= 1`, `y > 1`.
pub fn log_ratio_enclosure(x: &Rational, y: &Rational, frac_bits: u32) -> Enclosure {
    let lx = log2_enclosure(x, frac_bits);
    let ly = log2_enclosure(y, frac_bits);
    assert!(ly.lo.is_positive(), "log ratio denominator must exceed 1");
    let lo = if lx.lo.is_negative() {
        &lx.lo / &ly.lo
    } else {
        &lx.lo / &ly.hi
    };
    Enclosure {
        lo,
        hi: &lx.hi / &ly.lo,
    }
}
