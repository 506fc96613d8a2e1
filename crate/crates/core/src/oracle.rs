//! Independent brute-force oracle for the Galois oscillation.
//!
//! Instead of the coefficient formula, this module realizes K_n inside the
//! explicit number field L = Q[z, t]/(Phi_{p^n}(z), t^{p^n} - p), enumerates
//! every conjugation t -> z^a t, and computes v(sigma x - x) through the
//! field norm down to Q: the prime p has a single, totally ramified prime of
//! L above it for the supported configurations, so v(y) = v_p(N(y))/[L:Q]
//! with v normalized by v(p) = 1.  Everything is exact rational arithmetic;
//! nothing is shared with the formula being checked.
//!
//! The degree of L is p^n * phi(p^n); configurations beyond degree 8 (and any
//! ramified or non-prime-field base) are rejected as UnsupportedConfig.

use num::rational::BigRational;
use num::{BigInt, One, Zero};

use crate::error::{Error, Result};
use crate::tower::TowerElement;
use crate::valuation::{padic_val_rational, Valuation};

/// Q[z]/(Phi_{p^n}) tensor Q[t]/(t^{p^n} - p): coefficients indexed by
/// [t-power][z-power], with t-degree < p^n and z-degree < phi(p^n).
#[derive(Debug, Clone)]
struct FieldCtx {
    p: i64,
    /// p^n.
    n_pow: usize,
    /// phi(p^n) = p^{n-1}(p-1).
    phi: usize,
    /// Cyclotomic polynomial Phi_{p^n}, little-endian, degree phi.
    cyclo: Vec<BigRational>,
}

type Elem = Vec<Vec<BigRational>>; // [t][z]

impl FieldCtx {
    fn new(p: i64, n: u32) -> FieldCtx {
        let n_pow = (p as usize).pow(n);
        let phi = n_pow / p as usize * (p as usize - 1);
        // Phi_{p^n}(X) = sum_{k < p} X^{k p^{n-1}}.
        let mut cyclo = vec![BigRational::zero(); phi + 1];
        let step = n_pow / p as usize;
        for k in 0..p as usize {
            cyclo[k * step] = BigRational::one();
        }
        FieldCtx {
            p,
            n_pow,
            phi,
            cyclo,
        }
    }

    fn degree(&self) -> usize {
        self.n_pow * self.phi
    }

    fn zero(&self) -> Elem {
        vec![vec![BigRational::zero(); self.phi]; self.n_pow]
    }

    fn is_zero(&self, a: &Elem) -> bool {
        a.iter().all(|row| row.iter().all(|c| c.is_zero()))
    }

    fn add(&self, a: &Elem, b: &Elem) -> Elem {
        let mut out = a.clone();
        for (ro, rb) in out.iter_mut().zip(b) {
            for (co, cb) in ro.iter_mut().zip(rb) {
                *co += cb;
            }
        }
        out
    }

    fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        let mut out = a.clone();
        for (ro, rb) in out.iter_mut().zip(b) {
            for (co, cb) in ro.iter_mut().zip(rb) {
                *co -= cb;
            }
        }
        out
    }

    /// Reduces a z-polynomial of arbitrary degree modulo Phi_{p^n}.
    fn reduce_z(&self, mut poly: Vec<BigRational>) -> Vec<BigRational> {
        while poly.len() > self.phi {
            let top = poly.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            // Phi is monic: X^{deg+phi} reduces to -top * (lower part of Phi).
            let deg = poly.len() - self.phi;
            for (i, c) in self.cyclo.iter().take(self.phi).enumerate() {
                if !c.is_zero() {
                    let t = &top * c;
                    poly[deg + i] -= t;
                }
            }
        }
        poly.resize(self.phi, BigRational::zero());
        poly
    }

    /// z^k as a reduced z-polynomial (k arbitrary, using z^{p^n} = 1).
    fn z_pow(&self, k: usize) -> Vec<BigRational> {
        let k = k % self.n_pow;
        let mut poly = vec![BigRational::zero(); k + 1];
        poly[k] = BigRational::one();
        self.reduce_z(poly)
    }

    fn mul_z(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let mut wide = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    wide[i + j] += x * y;
                }
            }
        }
        self.reduce_z(wide)
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let mut out = self.zero();
        let p_rat = BigRational::from_integer(BigInt::from(self.p));
        for (i, ra) in a.iter().enumerate() {
            if ra.iter().all(|c| c.is_zero()) {
                continue;
            }
            for (j, rb) in b.iter().enumerate() {
                if rb.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let prod = self.mul_z(ra, rb);
                let (slot, scale) = if i + j >= self.n_pow {
                    (i + j - self.n_pow, Some(&p_rat)) // t^{p^n} = p
                } else {
                    (i + j, None)
                };
                for (k, c) in prod.into_iter().enumerate() {
                    match scale {
                        Some(p) => out[slot][k] += c * p,
                        None => out[slot][k] += c,
                    }
                }
            }
        }
        out
    }

    /// A monomial c * t^exp with exp of either sign (t^{-1} = t^{p^n - 1}/p).
    fn t_monomial(&self, c: BigRational, exp: i64) -> Elem {
        let n = self.n_pow as i64;
        let k = exp.rem_euclid(n);
        let drops = (k - exp) / n; // number of p-denominators introduced
        let p_rat = BigRational::from_integer(BigInt::from(self.p));
        let mut value = c;
        for _ in 0..drops {
            value /= &p_rat;
        }
        let mut out = self.zero();
        out[k as usize][0] = value;
        out
    }

    /// The conjugation t -> z^a t applied coefficient-wise.
    fn conjugate(&self, x: &Elem, a: usize) -> Elem {
        let mut out = self.zero();
        for (b, row) in x.iter().enumerate() {
            if row.iter().all(|c| c.is_zero()) {
                continue;
            }
            let twist = self.z_pow(a * b % self.n_pow);
            let rotated = self.mul_z(row, &twist);
            for (k, c) in rotated.into_iter().enumerate() {
                out[b][k] += c;
            }
        }
        out
    }

    /// Field norm N_{L/Q}: determinant of the multiplication-by-x matrix on
    /// the basis z^a t^b, by rational Gaussian elimination.
    fn norm(&self, x: &Elem) -> BigRational {
        let d = self.degree();
        let mut mat = vec![vec![BigRational::zero(); d]; d];
        for b in 0..self.n_pow {
            for a in 0..self.phi {
                // x * (z^a t^b), expressed in the basis, fills one column.
                let mut basis = self.zero();
                basis[b][a] = BigRational::one();
                let prod = self.mul(x, &basis);
                let col = b * self.phi + a;
                for (bb, row) in prod.iter().enumerate() {
                    for (aa, c) in row.iter().enumerate() {
                        mat[bb * self.phi + aa][col] = c.clone();
                    }
                }
            }
        }
        // Determinant with partial pivoting (exact, so any nonzero pivot works).
        let mut det = BigRational::one();
        for col in 0..d {
            let pivot = (col..d).find(|&r| !mat[r][col].is_zero());
            let pivot = match pivot {
                Some(r) => r,
                None => return BigRational::zero(),
            };
            if pivot != col {
                mat.swap(pivot, col);
                det = -det;
            }
            let pv = mat[col][col].clone();
            det *= &pv;
            let (upper, lower) = mat.split_at_mut(col + 1);
            let pivot_row = &upper[col];
            for row in lower.iter_mut() {
                if row[col].is_zero() {
                    continue;
                }
                let factor = &row[col] / &pv;
                for (entry, pc) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *entry -= &factor * pc;
                }
            }
        }
        det
    }
}

/// Symmetric lift of a truncated base-ring residue to an integer in
/// (-p^P/2, p^P/2].
fn symmetric_lift(modulus: &BigInt, c: &BigInt) -> BigInt {
    let half = modulus / BigInt::from(2);
    if c > &half {
        c - modulus
    } else {
        c.clone()
    }
}

/// Brute-force oscillation: min over a in [1, p^n) of v(sigma_a x - x),
/// with sigma_a(pi_n) = zeta^a pi_n computed in the explicit cyclotomic
/// composite.  Only tiny unramified prime-field configurations are supported.
pub fn cyclotomic_oracle_oscillation(x: &TowerElement) -> Result<Valuation> {
    let cfg = x.config();
    let p = cfg.p();
    let n = x.level();
    if cfg.e() != 1 || cfg.field().f() != 1 {
        return Err(Error::UnsupportedConfig(
            "oracle requires e = 1 over a prime field".into(),
        ));
    }
    if !matches!((p, n), (2, 1) | (2, 2) | (3, 1)) {
        return Err(Error::UnsupportedConfig(format!(
            "oracle supports (p, n) in {{(2,1), (2,2), (3,1)}}, got ({p}, {n})"
        )));
    }
    // The tower convention pins E(T) = T - p, so pi = p exactly in L.
    let expected = {
        let base = cfg.base();
        vec![base.from_i64(-(p as i64)), base.one()]
    };
    if cfg.eisenstein() != expected.as_slice() {
        return Err(Error::UnsupportedConfig(
            "oracle requires the pi = p convention E(T) = T - p".into(),
        ));
    }
    let ctx = FieldCtx::new(p as i64, n);
    // Assemble x as an element of L via symmetric lifts of its coefficients.
    let modulus = cfg.base().p_pow().clone();
    let mut xl = ctx.zero();
    for (j, c) in x.coeffs().iter().enumerate() {
        let lifted = symmetric_lift(&modulus, &c.coords()[0]);
        if lifted.is_zero() {
            continue;
        }
        let mono = ctx.t_monomial(BigRational::from_integer(lifted), j as i64 - x.shift());
        xl = ctx.add(&xl, &mono);
    }
    let degree = ctx.degree() as i64;
    let mut min: Valuation = Valuation::Infinite;
    for a in 1..ctx.n_pow {
        let diff = ctx.sub(&ctx.conjugate(&xl, a), &xl);
        if ctx.is_zero(&diff) {
            continue; // this conjugate fixes x
        }
        let norm = ctx.norm(&diff);
        let vp = padic_val_rational(&norm, p).expect("norm of a nonzero element is nonzero");
        let v = Valuation::Exact(crate::valuation::rat(vp, degree));
        min = min.min(&v)?;
    }
    Ok(min)
}
