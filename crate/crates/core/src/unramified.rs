//! The truncated unramified base ring W(k)/p^P, realized as
//! (Z/p^P)[u]/(m~(u)) for the monic lift m~ of the residue modulus.
//!
//! Coefficient arithmetic for tower elements happens here.  Elements carry no
//! back-reference; operations take the ring context explicitly.

use num::bigint::BigInt;
use num::{Integer, One, Zero};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::residue::{ResidueElement, ResidueField};

/// Ring context: the residue field, the precision exponent P, and cached
/// constants p, p^P and the lifted modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseRing {
    field: Arc<ResidueField>,
    precision: u32,
    p: BigInt,
    p_pow: BigInt,
    /// Monic lift of the residue modulus, length f+1, entries in [0, p).
    modulus: Vec<BigInt>,
}

/// An element of W(k)/p^P: coordinates on 1, u, ..., u^{f-1}, reduced into
/// [0, p^P).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unram {
    coords: Vec<BigInt>,
}

impl BaseRing {
    pub fn new(field: Arc<ResidueField>, precision: u32) -> Result<BaseRing> {
        if precision == 0 {
            return Err(Error::InvalidConfig("precision_P must be >= 1".into()));
        }
        let p = BigInt::from(field.p());
        let p_pow = p.pow(precision);
        let modulus = field.modulus().iter().map(|&c| BigInt::from(c)).collect();
        Ok(BaseRing {
            field,
            precision,
            p,
            p_pow,
            modulus,
        })
    }

    pub fn field(&self) -> &Arc<ResidueField> {
        &self.field
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn p_big(&self) -> &BigInt {
        &self.p
    }

    pub fn p_pow(&self) -> &BigInt {
        &self.p_pow
    }

    fn f(&self) -> usize {
        self.field.f()
    }

    fn reduce_coord(&self, c: &BigInt) -> BigInt {
        c.mod_floor(&self.p_pow)
    }

    pub fn zero(&self) -> Unram {
        Unram {
            coords: vec![BigInt::zero(); self.f()],
        }
    }

    pub fn one(&self) -> Unram {
        let mut coords = vec![BigInt::zero(); self.f()];
        coords[0] = BigInt::one();
        Unram { coords }
    }

    pub fn from_i64(&self, n: i64) -> Unram {
        let mut coords = vec![BigInt::zero(); self.f()];
        coords[0] = self.reduce_coord(&BigInt::from(n));
        Unram { coords }
    }

    pub fn from_coords(&self, coords: &[BigInt]) -> Result<Unram> {
        if coords.len() > self.f() {
            return Err(Error::Parse(format!(
                "coefficient with {} coordinates in a degree-{} base ring",
                coords.len(),
                self.f()
            )));
        }
        let mut c: Vec<BigInt> = coords.iter().map(|x| self.reduce_coord(x)).collect();
        c.resize(self.f(), BigInt::zero());
        Ok(Unram { coords: c })
    }

    /// Canonical lift of a residue element (coordinates as integers).
    pub fn lift(&self, x: &ResidueElement) -> Unram {
        let coords = x.coords().iter().map(|&c| BigInt::from(c)).collect();
        Unram { coords }
    }

    pub fn add(&self, a: &Unram, b: &Unram) -> Unram {
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| self.reduce_coord(&(x + y)))
            .collect();
        Unram { coords }
    }

    pub fn sub(&self, a: &Unram, b: &Unram) -> Unram {
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| self.reduce_coord(&(x - y)))
            .collect();
        Unram { coords }
    }

    pub fn neg(&self, a: &Unram) -> Unram {
        let coords = a.coords.iter().map(|x| self.reduce_coord(&(-x))).collect();
        Unram { coords }
    }

    pub fn mul(&self, a: &Unram, b: &Unram) -> Unram {
        let f = self.f();
        if f == 1 {
            return Unram {
                coords: vec![self.reduce_coord(&(&a.coords[0] * &b.coords[0]))],
            };
        }
        let mut prod = vec![BigInt::zero(); 2 * f - 1];
        for (i, x) in a.coords.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coords.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        // Reduce by the monic lifted modulus.
        for top in (f..2 * f - 1).rev() {
            let lead = std::mem::replace(&mut prod[top], BigInt::zero());
            if lead.is_zero() {
                continue;
            }
            let base = top - f;
            for (i, m) in self.modulus.iter().take(f).enumerate() {
                if !m.is_zero() {
                    let t = &lead * m;
                    prod[base + i] -= t;
                }
            }
        }
        prod.truncate(f);
        let coords = prod.iter().map(|x| self.reduce_coord(x)).collect();
        Unram { coords }
    }

    pub fn mul_i64(&self, a: &Unram, n: i64) -> Unram {
        let nn = BigInt::from(n);
        let coords = a
            .coords
            .iter()
            .map(|x| self.reduce_coord(&(x * &nn)))
            .collect();
        Unram { coords }
    }

    pub fn mul_bigint(&self, a: &Unram, n: &BigInt) -> Unram {
        let coords = a
            .coords
            .iter()
            .map(|x| self.reduce_coord(&(x * n)))
            .collect();
        Unram { coords }
    }

    /// p-adic valuation, or None for the zero class.  Valid because reduction
    /// mod p maps the power basis onto a k-basis.
    pub fn val_p(&self, a: &Unram) -> Option<u32> {
        let mut best: Option<u32> = None;
        for c in &a.coords {
            if c.is_zero() {
                continue;
            }
            let mut v = 0u32;
            let mut rest = c.clone();
            while (&rest % &self.p).is_zero() {
                rest /= &self.p;
                v += 1;
            }
            best = Some(match best {
                None => v,
                Some(b) => b.min(v),
            });
            if best == Some(0) {
                break;
            }
        }
        best
    }

    /// Exact division by p^t; requires val_p >= t.
    pub fn div_p_exact(&self, a: &Unram, t: u32) -> Result<Unram> {
        let pt = self.p.pow(t);
        let mut coords = Vec::with_capacity(a.coords.len());
        for c in &a.coords {
            let (q, r) = c.div_rem(&pt);
            if !r.is_zero() {
                return Err(Error::PrecisionExhausted(format!(
                    "coefficient not divisible by p^{t}"
                )));
            }
            coords.push(q);
        }
        Ok(Unram { coords })
    }

    /// Image in the residue field.
    pub fn residue(&self, a: &Unram) -> ResidueElement {
        let p = self.p_u64();
        let coords: Vec<u64> = a
            .coords
            .iter()
            .map(|c| {
                let r = c.mod_floor(&self.p);
                // r in [0, p), fits u64
                u64::try_from(&r).unwrap_or(0) % p
            })
            .collect();
        self.field.element(&coords).expect("coords fit the field")
    }

    fn p_u64(&self) -> u64 {
        self.field.p()
    }

    /// Teichmueller lift: the unique (q-1)-st root of unity congruent to c,
    /// computed by iterating x -> x^q to the fixed point mod p^P.
    pub fn teichmuller(&self, c: &ResidueElement) -> Unram {
        if c.is_zero() {
            return self.zero();
        }
        let q = self.field.order();
        let mut x = self.lift(c);
        for _ in 0..self.precision {
            let next = self.pow_u64(&x, q);
            if next == x {
                break;
            }
            x = next;
        }
        x
    }

    pub fn pow_u64(&self, a: &Unram, mut exp: u64) -> Unram {
        let mut result = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        result
    }

    /// Inverse of a unit (val_p = 0), by residue-field inversion and Newton
    /// lifting x' = x(2 - ax).
    pub fn inv_unit(&self, a: &Unram) -> Result<Unram> {
        match self.val_p(a) {
            None => Err(Error::DivisionByZero(
                "inverse of 0 in the base ring".into(),
            )),
            Some(v) if v > 0 => Err(Error::DivisionByZero(
                "inverse of a non-unit in the base ring".into(),
            )),
            Some(_) => {
                let r = self.residue(a);
                let rinv = r.inv()?;
                let mut x = self.lift(&rinv);
                let two = self.from_i64(2);
                // Each step doubles the p-adic accuracy.
                let mut known: u64 = 1;
                while known < self.precision as u64 {
                    let ax = self.mul(a, &x);
                    let corr = self.sub(&two, &ax);
                    x = self.mul(&x, &corr);
                    known *= 2;
                }
                Ok(x)
            }
        }
    }

    pub fn is_zero(&self, a: &Unram) -> bool {
        a.coords.iter().all(|c| c.is_zero())
    }

    /// Canonical decimal-string coordinates (non-negative, reduced).
    pub fn to_strings(&self, a: &Unram) -> Vec<String> {
        a.coords.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_strings(&self, strs: &[String]) -> Result<Unram> {
        let mut coords = Vec::with_capacity(strs.len());
        for s in strs {
            let v: BigInt = s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer literal {s:?}")))?;
            coords.push(v);
        }
        self.from_coords(&coords)
    }
}

impl Unram {
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }
}
