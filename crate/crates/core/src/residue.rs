//! Residue fields F_{p^f} presented by an explicit monic modulus over F_p.
//!
//! Elements are coordinate vectors on the power basis 1, u, ..., u^{f-1} of
//! F_p[u]/(modulus).  The supported range (p <= 97, f <= 8) is enforced at
//! construction, and the modulus is checked for irreducibility.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest supported characteristic.
pub const MAX_P: u64 = 97;
/// Largest supported extension degree over F_p.
pub const MAX_F: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueField {
    p: u64,
    f: usize,
    /// Monic modulus, length f+1, coefficients reduced into [0, p).
    modulus: Vec<u64>,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// ---- dense polynomial helpers over F_p (little-endian coefficient vectors) ----

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    // m is monic of degree m.len()-1.
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap() % p;
        let k = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &mi) in m.iter().enumerate() {
                let idx = k + i;
                let sub = (lead * mi) % p;
                r[idx] = (r[idx] + p - sub) % p;
            }
        }
        r.pop();
        poly_trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn poly_mul_mod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_pow_mod(base: &[u64], mut exp: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = base.to_vec();
    while exp > 0 {
        if exp & 1 == 1 {
            result = poly_mul_mod(&result, &b, m, p);
        }
        b = poly_mul_mod(&b, &b, m, p);
        exp >>= 1;
    }
    result
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !y.is_empty() {
        // Make y monic before taking the remainder.
        let lead = *y.last().unwrap();
        let inv = mod_inv_scalar(lead, p);
        let monic: Vec<u64> = y.iter().map(|&c| (c * inv) % p).collect();
        let r = poly_rem(&x, &monic, p);
        x = y;
        y = r;
    }
    x
}

fn mod_inv_scalar(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0 mod p.
    let mut result = 1u64;
    let mut base = a % p;
    let mut exp = p - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = (result * base) % p;
        }
        base = (base * base) % p;
        exp >>= 1;
    }
    result
}

impl ResidueField {
    /// Builds F_{p^f} = F_p[u]/(modulus).  `modulus` is little-endian of
    /// length f+1 and must be monic and irreducible.
    pub fn new(p: u64, f: usize, modulus: &[u64]) -> Result<Arc<ResidueField>> {
        if !is_prime(p) {
            return Err(Error::InvalidConfig(format!("p = {p} is not prime")));
        }
        if p > MAX_P {
            return Err(Error::UnsupportedConfig(format!(
                "p = {p} exceeds the supported bound {MAX_P}"
            )));
        }
        if f == 0 || f > MAX_F {
            return Err(Error::UnsupportedConfig(format!(
                "f = {f} outside the supported range 1..={MAX_F}"
            )));
        }
        if modulus.len() != f + 1 {
            return Err(Error::InvalidConfig(format!(
                "modulus has {} coefficients, expected f+1 = {}",
                modulus.len(),
                f + 1
            )));
        }
        let modulus: Vec<u64> = modulus.iter().map(|&c| c % p).collect();
        if modulus[f] != 1 {
            return Err(Error::InvalidConfig("modulus is not monic".into()));
        }
        let field = ResidueField { p, f, modulus };
        if !field.modulus_irreducible() {
            return Err(Error::InvalidConfig("modulus is reducible over F_p".into()));
        }
        Ok(Arc::new(field))
    }

    /// The prime field F_p, presented with modulus u.
    pub fn prime_field(p: u64) -> Result<Arc<ResidueField>> {
        ResidueField::new(p, 1, &[0, 1])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// q = p^f.
    pub fn order(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    /// Irreducibility over F_p: u^{p^f} == u mod (modulus), and for every
    /// prime divisor d of f, gcd(u^{p^{f/d}} - u, modulus) is constant.
    fn modulus_irreducible(&self) -> bool {
        if self.f == 1 {
            return true;
        }
        let p = self.p;
        let m = &self.modulus;
        let x = vec![0u64, 1];
        // u^(p^k) by iterated p-th powers.
        let frob = |start: &[u64], times: usize| -> Vec<u64> {
            let mut cur = start.to_vec();
            for _ in 0..times {
                cur = poly_pow_mod(&cur, p, m, p);
            }
            cur
        };
        let xq = frob(&x, self.f);
        let mut diff = xq;
        // diff -= x
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        poly_trim(&mut diff);
        if !diff.is_empty() {
            return false;
        }
        let mut d = 2;
        let mut rest = self.f;
        let mut prime_divisors = vec![];
        while d * d <= rest {
            if rest.is_multiple_of(d) {
                prime_divisors.push(d);
                while rest.is_multiple_of(d) {
                    rest /= d;
                }
            }
            d += 1;
        }
        if rest > 1 {
            prime_divisors.push(rest);
        }
        for d in prime_divisors {
            let mut g = frob(&x, self.f / d);
            if g.len() < 2 {
                g.resize(2, 0);
            }
            g[1] = (g[1] + p - 1) % p;
            poly_trim(&mut g);
            let gcd = poly_gcd(&g, m, p);
            if gcd.len() > 1 {
                return false;
            }
        }
        true
    }

    pub fn zero(self: &Arc<Self>) -> ResidueElement {
        ResidueElement {
            field: Arc::clone(self),
            coords: vec![0; self.f],
        }
    }

    pub fn one(self: &Arc<Self>) -> ResidueElement {
        let mut coords = vec![0; self.f];
        coords[0] = 1;
        ResidueElement {
            field: Arc::clone(self),
            coords,
        }
    }

    /// Element from coordinates on the power basis (reduced mod p, padded).
    pub fn element(self: &Arc<Self>, coords: &[u64]) -> Result<ResidueElement> {
        if coords.len() > self.f {
            return Err(Error::Parse(format!(
                "coordinate list of length {} for a field of degree {}",
                coords.len(),
                self.f
            )));
        }
        let mut c: Vec<u64> = coords.iter().map(|&x| x % self.p).collect();
        c.resize(self.f, 0);
        Ok(ResidueElement {
            field: Arc::clone(self),
            coords: c,
        })
    }

    /// Element from possibly-signed coordinates.
    pub fn element_signed(self: &Arc<Self>, coords: &[i64]) -> Result<ResidueElement> {
        let p = self.p as i64;
        let c: Vec<u64> = coords.iter().map(|&x| (x.rem_euclid(p)) as u64).collect();
        self.element(&c)
    }

    /// The k-th element under the fixed enumeration: coordinates are the
    /// base-p digits of k, least significant first.  Used for deterministic
    /// tie-breaking and exhaustive loops.
    pub fn enumerate(self: &Arc<Self>, k: u64) -> ResidueElement {
        let mut coords = vec![0u64; self.f];
        let mut rest = k;
        for c in coords.iter_mut() {
            *c = rest % self.p;
            rest /= self.p;
        }
        ResidueElement {
            field: Arc::clone(self),
            coords,
        }
    }
}

/// An element of a residue field, as coordinates on the power basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueElement {
    field: Arc<ResidueField>,
    coords: Vec<u64>,
}

impl ResidueElement {
    pub fn field(&self) -> &Arc<ResidueField> {
        &self.field
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Position of this element under the fixed enumeration.
    pub fn enumeration_index(&self) -> u64 {
        let mut idx = 0u64;
        for &c in self.coords.iter().rev() {
            idx = idx * self.field.p + c;
        }
        idx
    }

    fn check_same_field(&self, other: &ResidueElement) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(format!(
                "F_{{{}^{}}} vs F_{{{}^{}}}",
                self.field.p, self.field.f, other.field.p, other.field.f
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &ResidueElement) -> Result<ResidueElement> {
        self.check_same_field(other)?;
        let p = self.field.p;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        Ok(ResidueElement {
            field: Arc::clone(&self.field),
            coords,
        })
    }

    pub fn sub(&self, other: &ResidueElement) -> Result<ResidueElement> {
        self.check_same_field(other)?;
        let p = self.field.p;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| (a + p - b) % p)
            .collect();
        Ok(ResidueElement {
            field: Arc::clone(&self.field),
            coords,
        })
    }

    pub fn neg(&self) -> ResidueElement {
        let p = self.field.p;
        ResidueElement {
            field: Arc::clone(&self.field),
            coords: self.coords.iter().map(|&a| (p - a) % p).collect(),
        }
    }

    pub fn mul(&self, other: &ResidueElement) -> Result<ResidueElement> {
        self.check_same_field(other)?;
        let p = self.field.p;
        let prod = poly_mul_mod(&self.coords, &other.coords, &self.field.modulus, p);
        let mut coords = prod;
        coords.resize(self.field.f, 0);
        Ok(ResidueElement {
            field: Arc::clone(&self.field),
            coords,
        })
    }

    pub fn pow(&self, mut exp: u64) -> ResidueElement {
        let mut result = self.field.one();
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base).expect("same field");
            }
            base = base.mul(&base).expect("same field");
            exp >>= 1;
        }
        result
    }

    /// Multiplicative inverse; DivisionByZero on 0.
    pub fn inv(&self) -> Result<ResidueElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero(
                "inverse of zero in a residue field".into(),
            ));
        }
        // a^(q-2) with q = p^f; the unit group has order q-1.
        Ok(self.pow(self.field.order() - 2))
    }

    /// x -> x^{p^s}.
    pub fn frobenius(&self, s: u32) -> ResidueElement {
        let mut cur = self.clone();
        let reduced = (s as usize) % self.field.f;
        for _ in 0..reduced {
            cur = cur.pow(self.field.p);
        }
        cur
    }

    /// Inverse of `frobenius(_, s)`; well defined because Frobenius has order
    /// f on F_{p^f}.
    pub fn frobenius_inverse(&self, s: u32) -> ResidueElement {
        let f = self.field.f as u32;
        let back = (f - (s % f)) % f;
        self.frobenius(back)
    }
}

impl fmt::Display for ResidueElement {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(out, ",")?;
            }
            write!(out, "{c}")?;
        }
        write!(out, "]")
    }
}
