//! Exact arithmetic in the Kummer tower K_n = K(pi_n), pi_n^{p^n} = pi.
//!
//! K is totally ramified of degree e over the unramified base F = Frac W(k),
//! cut out by a monic Eisenstein polynomial E.  A level-n element is stored as
//! a polynomial of degree < e p^n in pi_n over the truncated base W(k)/p^P,
//! reduced modulo the composed relation E(pi_n^{p^n}) = 0, together with a
//! global power-of-pi_n shift for non-integral elements.  All coefficients are
//! classes modulo p^P; an element is known modulo pi_n^M with M = e p^n P
//! (minus its shift), and every operation tracks the certified valuation
//! window instead of silently rounding.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::rational::BigRational;
use num::{BigInt, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residue::{ResidueElement, ResidueField};
use crate::unramified::{BaseRing, Unram};
use crate::valuation::Valuation;

/// Hard cap on the ring dimension e p^n, to keep configurations at desk scale.
const MAX_RING_DIM: u64 = 200_000;

/// Tower configuration: residue field, ramification polynomial, precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerConfig {
    base: BaseRing,
    e: u32,
    /// Monic Eisenstein polynomial of degree e over the base, little-endian.
    eisenstein: Vec<Unram>,
}

impl TowerConfig {
    /// General constructor; checks the Eisenstein condition exactly:
    /// monic, v_p of every lower coefficient >= 1, v_p of the constant = 1.
    pub fn new(
        field: Arc<ResidueField>,
        e: u32,
        eisenstein: Vec<Unram>,
        precision: u32,
    ) -> Result<Arc<TowerConfig>> {
        if e == 0 {
            return Err(Error::InvalidConfig("e must be >= 1".into()));
        }
        let base = BaseRing::new(field, precision)?;
        if eisenstein.len() != e as usize + 1 {
            return Err(Error::InvalidConfig(format!(
                "Eisenstein polynomial has {} coefficients, expected e+1 = {}",
                eisenstein.len(),
                e + 1
            )));
        }
        if eisenstein[e as usize] != base.one() {
            return Err(Error::InvalidConfig(
                "Eisenstein polynomial must be monic".into(),
            ));
        }
        for (i, c) in eisenstein.iter().take(e as usize).enumerate() {
            let v = base.val_p(c);
            let ok = match v {
                None => i != 0, // zero coefficient is fine except in degree 0
                Some(v) if i == 0 => v == 1,
                Some(v) => v >= 1,
            };
            if !ok {
                return Err(Error::InvalidConfig(format!(
                    "coefficient {i} violates the Eisenstein condition"
                )));
            }
        }
        Ok(Arc::new(TowerConfig {
            base,
            e,
            eisenstein,
        }))
    }

    /// e = 1 with E(T) = T - p, i.e. K = F and pi = p.
    pub fn unramified(field: Arc<ResidueField>, precision: u32) -> Result<Arc<TowerConfig>> {
        let base = BaseRing::new(field.clone(), precision)?;
        let eis = vec![base.from_i64(-(field.p() as i64)), base.one()];
        TowerConfig::new(field, 1, eis, precision)
    }

    /// E(T) = T^e - p, a convenient totally ramified degree-e base.
    pub fn totally_ramified(
        field: Arc<ResidueField>,
        e: u32,
        precision: u32,
    ) -> Result<Arc<TowerConfig>> {
        let base = BaseRing::new(field.clone(), precision)?;
        let mut eis = vec![base.zero(); e as usize + 1];
        eis[0] = base.from_i64(-(field.p() as i64));
        eis[e as usize] = base.one();
        TowerConfig::new(field, e, eis, precision)
    }

    pub fn base(&self) -> &BaseRing {
        &self.base
    }

    pub fn field(&self) -> &Arc<ResidueField> {
        self.base.field()
    }

    pub fn p(&self) -> u64 {
        self.base.field().p()
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn precision(&self) -> u32 {
        self.base.precision()
    }

    pub fn eisenstein(&self) -> &[Unram] {
        &self.eisenstein
    }

    /// e p^level, the rank of O_{K_n} over the unramified base.
    pub fn ring_dim(&self, level: u32) -> Result<usize> {
        let p = self.p();
        let mut dim: u64 = self.e as u64;
        for _ in 0..level {
            dim = dim
                .checked_mul(p)
                .ok_or_else(|| Error::UnsupportedConfig("tower level overflow".into()))?;
            if dim > MAX_RING_DIM {
                return Err(Error::UnsupportedConfig(format!(
                    "ring dimension e*p^level exceeds {MAX_RING_DIM}"
                )));
            }
        }
        Ok(dim as usize)
    }

    /// p^level as i64 (guarded by ring_dim).
    pub fn p_pow_level(&self, level: u32) -> Result<i64> {
        self.ring_dim(level)?;
        Ok((self.p() as i64).pow(level))
    }
}

/// An element of K_n known modulo a precision cutoff.
#[derive(Debug, Clone)]
pub struct TowerElement {
    config: Arc<TowerConfig>,
    level: u32,
    /// x = pi_n^{-shift} * sum coeffs[j] pi_n^j; shift >= 0.
    shift: i64,
    coeffs: Vec<Unram>,
    /// Certified cutoff: the element is known modulo terms of valuation >= prec.
    prec: BigRational,
    /// True only for the canonical zero (constructed as a literal zero and
    /// propagated through operations that provably preserve it).
    exact_zero: bool,
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl TowerElement {
    // ---- constructors ----

    pub fn zero(config: &Arc<TowerConfig>, level: u32) -> Result<TowerElement> {
        let dim = config.ring_dim(level)?;
        Ok(TowerElement {
            config: Arc::clone(config),
            level,
            shift: 0,
            coeffs: vec![config.base.zero(); dim],
            prec: BigRational::from_integer(BigInt::from(config.precision())),
            exact_zero: true,
        })
    }

    pub fn one(config: &Arc<TowerConfig>, level: u32) -> Result<TowerElement> {
        TowerElement::from_unram(config, level, config.base.one())
    }

    /// Constant from the unramified base.
    pub fn from_unram(config: &Arc<TowerConfig>, level: u32, c: Unram) -> Result<TowerElement> {
        let dim = config.ring_dim(level)?;
        if config.base.is_zero(&c) {
            return TowerElement::zero(config, level);
        }
        let mut coeffs = vec![config.base.zero(); dim];
        coeffs[0] = c;
        Ok(TowerElement {
            config: Arc::clone(config),
            level,
            shift: 0,
            coeffs,
            prec: BigRational::from_integer(BigInt::from(config.precision())),
            exact_zero: false,
        })
    }

    pub fn from_i64(config: &Arc<TowerConfig>, level: u32, n: i64) -> Result<TowerElement> {
        TowerElement::from_unram(config, level, config.base.from_i64(n))
    }

    /// [c] pi_n^index with a Teichmueller-lifted digit c.
    pub fn teich_monomial(
        config: &Arc<TowerConfig>,
        level: u32,
        index: i64,
        digit: &ResidueElement,
    ) -> Result<TowerElement> {
        if digit.field() != config.field() {
            return Err(Error::FieldMismatch(
                "digit from a different residue field".into(),
            ));
        }
        let lift = config.base.teichmuller(digit);
        TowerElement::monomial(config, level, index, lift)
    }

    /// c * pi_n^index for a base coefficient c.
    pub fn monomial(
        config: &Arc<TowerConfig>,
        level: u32,
        index: i64,
        c: Unram,
    ) -> Result<TowerElement> {
        if config.base.is_zero(&c) {
            return TowerElement::zero(config, level);
        }
        let dim = config.ring_dim(level)? as i64;
        let shift = if index < 0 { -index } else { 0 };
        let slot = index + shift;
        let mut coeffs = vec![config.base.zero(); dim as usize];
        let mut el = if slot < dim {
            coeffs[slot as usize] = c;
            TowerElement {
                config: Arc::clone(config),
                level,
                shift,
                coeffs,
                prec: BigRational::zero(), // fixed below
                exact_zero: false,
            }
        } else {
            // Large positive index: reduce through the ring relation.
            coeffs[0] = c;
            let base = TowerElement {
                config: Arc::clone(config),
                level,
                shift: 0,
                coeffs,
                prec: BigRational::from_integer(BigInt::from(config.precision())),
                exact_zero: false,
            };
            return base.mul_uniformizer_pow(index);
        };
        el.prec = el.window_cap();
        Ok(el.canonicalized())
    }

    /// pi_n at the given level.
    pub fn uniformizer(config: &Arc<TowerConfig>, level: u32) -> Result<TowerElement> {
        TowerElement::monomial(config, level, 1, config.base.one())
    }

    /// eta_m = pi_m^{-1} represented at `level` >= m (index -p^{level-m}).
    pub fn eta(config: &Arc<TowerConfig>, level: u32, m: u32) -> Result<TowerElement> {
        if m > level {
            return Err(Error::UnsupportedConfig(format!(
                "eta_{m} is not an element of level-{level} arithmetic"
            )));
        }
        let idx = -config.p_pow_level(level - m)?;
        TowerElement::monomial(config, level, idx, config.base.one())
    }

    // ---- accessors ----

    pub fn config(&self) -> &Arc<TowerConfig> {
        &self.config
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn coeffs(&self) -> &[Unram] {
        &self.coeffs
    }

    pub fn precision_cutoff(&self) -> &BigRational {
        &self.prec
    }

    fn dim(&self) -> i64 {
        self.coeffs.len() as i64
    }

    /// Representational window: nothing beyond valuation P - shift/(e p^n) is
    /// stored.
    fn window_cap(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.config.precision()))
            - rational(self.shift, 1) / rational(self.dim(), 1)
    }

    /// True when both elements have identical canonical representations.
    pub fn same_repr(&self, other: &TowerElement) -> bool {
        self.config == other.config
            && self.level == other.level
            && self.shift == other.shift
            && self.coeffs == other.coeffs
    }

    pub fn is_zero_repr(&self) -> bool {
        self.coeffs.iter().all(|c| self.config.base.is_zero(c))
    }

    fn canonicalized(mut self) -> TowerElement {
        if self.is_zero_repr() {
            self.shift = 0;
            return self;
        }
        while self.shift > 0 && self.config.base.is_zero(&self.coeffs[0]) {
            self.coeffs.remove(0);
            self.coeffs.push(self.config.base.zero());
            self.shift -= 1;
        }
        self
    }

    fn cap_prec(mut self) -> TowerElement {
        let cap = self.window_cap();
        if self.prec > cap {
            self.prec = cap;
        }
        self
    }

    /// Minimal weight (pi_n-adic valuation times e p^n, relative to the shift)
    /// over all nonzero slots, with its slot index.  The weights of distinct
    /// slots are pairwise distinct, so the minimizing slot is unique.
    fn min_weight(&self) -> Option<(i64, usize)> {
        let dim = self.dim();
        let mut best: Option<(i64, usize)> = None;
        for (j, c) in self.coeffs.iter().enumerate() {
            if let Some(vp) = self.config.base.val_p(c) {
                let w = vp as i64 * dim + j as i64 - self.shift;
                if best.is_none_or(|(bw, _)| w < bw) {
                    best = Some((w, j));
                }
            }
        }
        best
    }

    /// Valuation of the represented part, as a rational (None for zero repr).
    fn repr_valuation(&self) -> Option<BigRational> {
        self.min_weight().map(|(w, _)| rational(w, self.dim()))
    }

    // ---- valuation ----

    /// Exact valuation when a nonzero digit exists below the cutoff;
    /// AtLeast(cutoff) otherwise; Infinite exactly for the canonical zero at
    /// full precision and zero shift.
    pub fn valuation(&self) -> Valuation {
        match self.repr_valuation() {
            None => {
                if self.exact_zero {
                    Valuation::Infinite
                } else {
                    Valuation::AtLeast(self.prec.clone())
                }
            }
            Some(v) => {
                if v < self.prec {
                    Valuation::Exact(v)
                } else {
                    Valuation::AtLeast(self.prec.clone())
                }
            }
        }
    }

    // ---- ring operations ----

    fn check_config(&self, other: &TowerElement) -> Result<()> {
        if self.config != other.config {
            return Err(Error::ConfigMismatch(
                "operands from different tower configurations".into(),
            ));
        }
        Ok(())
    }

    /// Embeds both operands into the higher of the two levels.
    fn aligned(&self, other: &TowerElement) -> Result<(TowerElement, TowerElement)> {
        self.check_config(other)?;
        let target = self.level.max(other.level);
        Ok((self.embed(target)?, other.embed(target)?))
    }

    /// Canonical inclusion K_n -> K_{n'} via pi_n = pi_{n'}^{p^{n'-n}}.
    pub fn embed(&self, target_level: u32) -> Result<TowerElement> {
        if target_level == self.level {
            return Ok(self.clone());
        }
        if target_level < self.level {
            return Err(Error::UnsupportedConfig(
                "embed goes up the tower; use coefficients to descend".into(),
            ));
        }
        let step = self.config.p_pow_level(target_level - self.level)?;
        let dim = self.config.ring_dim(target_level)?;
        let mut coeffs = vec![self.config.base.zero(); dim];
        for (j, c) in self.coeffs.iter().enumerate() {
            if !self.config.base.is_zero(c) {
                coeffs[j * step as usize] = c.clone();
            }
        }
        Ok(TowerElement {
            config: Arc::clone(&self.config),
            level: target_level,
            shift: self.shift * step,
            coeffs,
            prec: self.prec.clone(),
            exact_zero: self.exact_zero,
        })
    }

    pub fn neg(&self) -> TowerElement {
        TowerElement {
            config: Arc::clone(&self.config),
            level: self.level,
            shift: self.shift,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| self.config.base.neg(c))
                .collect(),
            prec: self.prec.clone(),
            exact_zero: self.exact_zero,
        }
    }

    pub fn add(&self, other: &TowerElement) -> Result<TowerElement> {
        let (a, b) = self.aligned(other)?;
        if a.exact_zero {
            return Ok(b);
        }
        if b.exact_zero {
            return Ok(a);
        }
        let shift = a.shift.max(b.shift);
        let au = a.slots_at_shift(shift)?;
        let bu = b.slots_at_shift(shift)?;
        let coeffs: Vec<Unram> = au
            .iter()
            .zip(&bu)
            .map(|(x, y)| a.config.base.add(x, y))
            .collect();
        let prec = a.prec.clone().min(b.prec.clone());
        let el = TowerElement {
            config: Arc::clone(&a.config),
            level: a.level,
            shift,
            coeffs,
            prec,
            exact_zero: false,
        }
        .canonicalized()
        .cap_prec();
        el.reliability_check()
    }

    pub fn sub(&self, other: &TowerElement) -> Result<TowerElement> {
        self.add(&other.neg())
    }

    /// Rewrites the coefficient vector relative to a larger shift, folding any
    /// overflow through the ring relation.
    fn slots_at_shift(&self, new_shift: i64) -> Result<Vec<Unram>> {
        debug_assert!(new_shift >= self.shift);
        let delta = (new_shift - self.shift) as usize;
        if delta == 0 {
            return Ok(self.coeffs.clone());
        }
        let dim = self.coeffs.len();
        let mut wide = vec![self.config.base.zero(); dim + delta];
        for (j, c) in self.coeffs.iter().enumerate() {
            wide[j + delta] = c.clone();
        }
        Ok(self.reduce_wide(wide))
    }

    /// Reduces a coefficient vector of length >= dim modulo E(pi_n^{p^n}),
    /// using pi^{dim} = -(c_{e-1} pi^{(e-1)p^n} + ... + c_0).
    fn reduce_wide(&self, mut wide: Vec<Unram>) -> Vec<Unram> {
        let dim = self.coeffs.len();
        let pn = dim / self.config.e as usize; // p^level
        let base = &self.config.base;
        for top in (dim..wide.len()).rev() {
            let lead = std::mem::replace(&mut wide[top], base.zero());
            if base.is_zero(&lead) {
                continue;
            }
            let start = top - dim;
            for l in 0..self.config.e as usize {
                let c = &self.config.eisenstein[l];
                if base.is_zero(c) {
                    continue;
                }
                let t = base.mul(&lead, c);
                let idx = start + l * pn;
                let cur = std::mem::replace(&mut wide[idx], base.zero());
                wide[idx] = base.sub(&cur, &t);
            }
        }
        wide.truncate(dim);
        wide
    }

    pub fn mul(&self, other: &TowerElement) -> Result<TowerElement> {
        let (a, b) = self.aligned(other)?;
        if a.exact_zero || b.exact_zero {
            return TowerElement::zero(&a.config, a.level);
        }
        let base = &a.config.base;
        let dim = a.coeffs.len();
        let mut wide = vec![base.zero(); 2 * dim - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if base.is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if base.is_zero(y) {
                    continue;
                }
                let t = base.mul(x, y);
                let cur = std::mem::replace(&mut wide[i + j], base.zero());
                wide[i + j] = base.add(&cur, &t);
            }
        }
        let coeffs = a.reduce_wide(wide);
        // Error analysis: x y = (xr + xe)(yr + ye); the three error terms have
        // valuations >= v(xr) + prec_y, v(yr) + prec_x, prec_x + prec_y.
        let va = a.repr_valuation().unwrap_or_else(|| a.prec.clone());
        let vb = b.repr_valuation().unwrap_or_else(|| b.prec.clone());
        let prec = (va + &b.prec)
            .min(vb + &a.prec)
            .min(a.prec.clone() + &b.prec);
        let el = TowerElement {
            config: Arc::clone(&a.config),
            level: a.level,
            shift: a.shift + b.shift,
            coeffs,
            prec,
            exact_zero: false,
        }
        .canonicalized()
        .cap_prec();
        el.reliability_check()
    }

    /// Scalar multiplication by a base-ring constant.
    pub fn mul_base(&self, c: &Unram) -> Result<TowerElement> {
        let base = &self.config.base;
        if base.is_zero(c) || self.exact_zero {
            return TowerElement::zero(&self.config, self.level);
        }
        let vc = base.val_p(c).unwrap() as i64;
        let coeffs = self.coeffs.iter().map(|x| base.mul(x, c)).collect();
        let prec = self.prec.clone() + rational(vc, 1);
        let el = TowerElement {
            config: Arc::clone(&self.config),
            level: self.level,
            shift: self.shift,
            coeffs,
            prec,
            exact_zero: false,
        }
        .canonicalized()
        .cap_prec();
        el.reliability_check()
    }

    /// Multiplication by pi_n^k (k of either sign).
    pub fn mul_uniformizer_pow(&self, k: i64) -> Result<TowerElement> {
        if self.exact_zero {
            return Ok(self.clone());
        }
        let offset = rational(k, self.dim());
        if k <= 0 {
            let el = TowerElement {
                config: Arc::clone(&self.config),
                level: self.level,
                shift: self.shift - k,
                coeffs: self.coeffs.clone(),
                prec: self.prec.clone() + offset,
                exact_zero: false,
            }
            .canonicalized()
            .cap_prec();
            return el.reliability_check();
        }
        // Positive power: cancel against the shift first, then push slots up.
        let cancel = k.min(self.shift);
        let push = (k - cancel) as usize;
        let coeffs = if push == 0 {
            self.coeffs.clone()
        } else {
            let dim = self.coeffs.len();
            let mut wide = vec![self.config.base.zero(); dim + push];
            for (j, c) in self.coeffs.iter().enumerate() {
                wide[j + push] = c.clone();
            }
            self.reduce_wide(wide)
        };
        let el = TowerElement {
            config: Arc::clone(&self.config),
            level: self.level,
            shift: self.shift - cancel,
            coeffs,
            prec: self.prec.clone() + offset,
            exact_zero: false,
        }
        .canonicalized()
        .cap_prec();
        el.reliability_check()
    }

    pub fn pow(&self, exp: u64) -> Result<TowerElement> {
        let mut result = TowerElement::one(&self.config, self.level)?;
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Raises PrecisionExhausted when the certified window leaves no reliable
    /// digit in the representation.
    fn reliability_check(self) -> Result<TowerElement> {
        if let Some(v) = self.repr_valuation() {
            if self.prec <= v && !self.exact_zero {
                return Err(Error::PrecisionExhausted(
                    "result has no reliable digits at the working precision".into(),
                ));
            }
        }
        Ok(self)
    }

    // ---- base decomposition ----

    /// Writes x = sum_{i < p^n} a_i pi_n^i with a_i in K, returning the a_i as
    /// level-0 elements (Laurent shifts folded into the a_i as powers of pi).
    pub fn coefficients_over_base(&self) -> Result<Vec<TowerElement>> {
        let pn = self.config.p_pow_level(self.level)?;
        let e = self.config.e as i64;
        let base = &self.config.base;
        // Collect (pi-power tau, coefficient) per residue i.
        let mut per_i: Vec<Vec<(i64, Unram)>> = vec![vec![]; pn as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            if base.is_zero(c) {
                continue;
            }
            let t = j as i64 - self.shift; // pi_n-index
            let i = t.rem_euclid(pn);
            let tau = (t - i) / pn;
            per_i[i as usize].push((tau, c.clone()));
        }
        let mut out = Vec::with_capacity(pn as usize);
        for (i, terms) in per_i.into_iter().enumerate() {
            let mut el = if terms.is_empty() {
                TowerElement::zero(&self.config, 0)?
            } else {
                let tau_min = terms.iter().map(|(t, _)| *t).min().unwrap();
                let shift0 = (-tau_min).max(0);
                let mut coeffs = vec![base.zero(); e as usize];
                for (tau, c) in terms {
                    // The tau values for a fixed residue i span fewer than e
                    // consecutive integers, so the slot always fits.
                    let slot = tau + shift0;
                    debug_assert!(slot >= 0 && slot < e);
                    coeffs[slot as usize] = c;
                }
                TowerElement {
                    config: Arc::clone(&self.config),
                    level: 0,
                    shift: shift0,
                    coeffs,
                    prec: BigRational::from_integer(BigInt::from(self.config.precision())),
                    exact_zero: false,
                }
                .canonicalized()
            };
            if !el.exact_zero {
                // The digit at pi_n-index i + p^n tau is reliable iff its
                // valuation is below the cutoff.
                el.prec = self.prec.clone() - rational(i as i64, e * pn);
                el = el.cap_prec();
            }
            out.push(el);
        }
        Ok(out)
    }

    /// Inverse of `coefficients_over_base`: assembles sum a_i pi_level^i from
    /// level-0 coefficients.
    pub fn from_base_coefficients(
        config: &Arc<TowerConfig>,
        level: u32,
        coeffs: &[TowerElement],
    ) -> Result<TowerElement> {
        let pn = config.p_pow_level(level)?;
        if coeffs.len() as i64 > pn {
            return Err(Error::UnsupportedConfig(format!(
                "{} base coefficients for level {level} (max p^level = {pn})",
                coeffs.len()
            )));
        }
        let mut acc = TowerElement::zero(config, level)?;
        for (i, a) in coeffs.iter().enumerate() {
            if a.level() != 0 {
                return Err(Error::UnsupportedConfig(
                    "base coefficients must be level-0 elements".into(),
                ));
            }
            let term = a.embed(level)?.mul_uniformizer_pow(i as i64)?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// The part of x supported on pi_n-indices divisible by `step`, i.e. the
    /// slot-wise projection onto the subfield generated by pi_n^{step}.
    pub(crate) fn retain_index_multiples(&self, step: i64) -> TowerElement {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                if (j as i64 - self.shift).rem_euclid(step) == 0 {
                    c.clone()
                } else {
                    self.config.base.zero()
                }
            })
            .collect();
        TowerElement {
            config: Arc::clone(&self.config),
            level: self.level,
            shift: self.shift,
            coeffs,
            prec: self.prec.clone(),
            exact_zero: self.exact_zero,
        }
        .canonicalized()
    }

    /// Minimal weight over the slots whose pi_n-index is NOT divisible by
    /// `step` (the complement of `retain_index_multiples`), with its index.
    pub(crate) fn dropped_min_weight(&self, step: i64) -> Option<(i64, i64)> {
        let dim = self.dim();
        let mut best: Option<(i64, i64)> = None;
        for (j, c) in self.coeffs.iter().enumerate() {
            let t = j as i64 - self.shift;
            if t.rem_euclid(step) == 0 {
                continue;
            }
            if let Some(vp) = self.config.base.val_p(c) {
                let w = vp as i64 * dim + t;
                if best.is_none_or(|(bw, _)| w < bw) {
                    best = Some((w, t));
                }
            }
        }
        best
    }

    // ---- Teichmueller expansion ----

    /// Residue of an element of valuation >= 0 (its class modulo pi_n).
    pub fn residue(&self) -> Result<ResidueElement> {
        match self.valuation() {
            Valuation::Infinite => Ok(self.config.field().zero()),
            Valuation::AtLeast(c) => {
                if c > BigRational::zero() {
                    Ok(self.config.field().zero())
                } else {
                    Err(Error::PrecisionExhausted(
                        "residue undetermined at the working precision".into(),
                    ))
                }
            }
            Valuation::Exact(v) => {
                if v < BigRational::zero() {
                    return Err(Error::SupportViolation(
                        "residue of a non-integral element".into(),
                    ));
                }
                if !v.is_zero() {
                    return Ok(self.config.field().zero());
                }
                self.leading_unit_residue()
            }
        }
    }

    /// Residue of x pi_n^{-w} where w is the exact leading index, read off the
    /// minimizing slot: the monomial there is p^t u' pi_n^{j-s} with u' a base
    /// unit, and p pi_n^{-e p^n} reduces to res(-c_0/p)^{-1} by the Eisenstein
    /// relation.
    fn leading_unit_residue(&self) -> Result<ResidueElement> {
        let (_, slot) = self
            .min_weight()
            .ok_or_else(|| Error::DivisionByZero("leading digit of zero".into()))?;
        let base = &self.config.base;
        let vp = base.val_p(&self.coeffs[slot]).expect("nonzero slot");
        let unit_part = base.div_p_exact(&self.coeffs[slot], vp)?;
        let mut r = base.residue(&unit_part);
        if vp > 0 {
            let c0_over_p = base.div_p_exact(&self.config.eisenstein[0], 1)?;
            let pi_dim_over_p = base.residue(&base.neg(&c0_over_p));
            r = r.mul(&pi_dim_over_p.pow(vp as u64).inv()?)?;
        }
        Ok(r)
    }

    /// Teichmueller digits on the index window [lo, hi): the unique expansion
    /// x = sum [c_i] pi_n^i obtained by iterated leading-digit extraction.
    /// Zero digits are omitted.  Errors with PrecisionExhausted if the window
    /// reaches past the certified cutoff.
    pub fn teichmuller_digits(&self, lo: i64, hi: i64) -> Result<BTreeMap<i64, ResidueElement>> {
        let dim = self.dim();
        let mut digits = BTreeMap::new();
        let mut y = self.clone();
        loop {
            match y.valuation() {
                Valuation::Infinite => break,
                Valuation::AtLeast(c) => {
                    // All remaining digits sit at or above the cutoff.
                    if c * rational(dim, 1) >= rational(hi, 1) {
                        break;
                    }
                    return Err(Error::PrecisionExhausted(format!(
                        "digits past the certified cutoff were requested (window hi = {hi})"
                    )));
                }
                Valuation::Exact(v) => {
                    let idx_rat = v * rational(dim, 1);
                    debug_assert!(idx_rat.is_integer());
                    let idx = idx_rat.to_integer();
                    let idx = i64::try_from(&idx)
                        .map_err(|_| Error::UnsupportedConfig("digit index overflow".into()))?;
                    if idx >= hi {
                        break;
                    }
                    let digit = y.leading_unit_residue()?;
                    debug_assert!(!digit.is_zero());
                    let term = TowerElement::teich_monomial(&self.config, self.level, idx, &digit)?;
                    y = y.sub(&term)?;
                    if idx >= lo {
                        digits.insert(idx, digit);
                    }
                }
            }
        }
        Ok(digits)
    }

    /// Resums a digit map into an element (for round-trip checks).
    pub fn from_teich_digits(
        config: &Arc<TowerConfig>,
        level: u32,
        digits: &BTreeMap<i64, ResidueElement>,
    ) -> Result<TowerElement> {
        let mut acc = TowerElement::zero(config, level)?;
        for (&idx, digit) in digits {
            let term = TowerElement::teich_monomial(config, level, idx, digit)?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    // ---- serialization ----

    pub fn to_file(&self) -> ElementFile {
        let base = &self.config.base;
        ElementFile {
            config: ConfigFile {
                p: self.config.p(),
                f: self.config.field().f(),
                modulus: self.config.field().modulus().to_vec(),
                e: self.config.e,
                eisenstein: self
                    .config
                    .eisenstein
                    .iter()
                    .map(|c| base.to_strings(c))
                    .collect(),
                precision_p: self.config.precision(),
            },
            level: self.level,
            shift: self.shift,
            coeffs: self.coeffs.iter().map(|c| base.to_strings(c)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("serialization cannot fail")
    }

    pub fn from_file(file: &ElementFile, precision_override: Option<u32>) -> Result<TowerElement> {
        let config = file.config.build(precision_override)?;
        let dim = config.ring_dim(file.level)?;
        if file.coeffs.len() != dim {
            return Err(Error::Parse(format!(
                "coefficient vector of length {}, expected e*p^level = {}",
                file.coeffs.len(),
                dim
            )));
        }
        if file.shift < 0 {
            return Err(Error::Parse("shift must be non-negative".into()));
        }
        let coeffs: Result<Vec<Unram>> = file
            .coeffs
            .iter()
            .map(|s| config.base.from_strings(s))
            .collect();
        let coeffs = coeffs?;
        let exact_zero = coeffs.iter().all(|c| config.base.is_zero(c)) && file.shift == 0;
        let el = TowerElement {
            config,
            level: file.level,
            shift: file.shift,
            coeffs,
            prec: BigRational::zero(),
            exact_zero,
        };
        let mut el = el.canonicalized();
        el.prec = el.window_cap();
        Ok(el)
    }

    pub fn from_json(json: &str, precision_override: Option<u32>) -> Result<TowerElement> {
        let file: ElementFile =
            serde_json::from_str(json).map_err(|e| Error::Parse(format!("element file: {e}")))?;
        TowerElement::from_file(&file, precision_override)
    }
}

/// On-disk form of a tower configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConfigFile {
    pub p: u64,
    pub f: usize,
    pub modulus: Vec<u64>,
    pub e: u32,
    /// Base-ring coefficients of the Eisenstein polynomial, little-endian,
    /// each a list of f signed decimal strings.
    pub eisenstein: Vec<Vec<String>>,
    #[serde(rename = "precision_P")]
    pub precision_p: u32,
}

impl ConfigFile {
    pub fn build(&self, precision_override: Option<u32>) -> Result<Arc<TowerConfig>> {
        let precision = precision_override.unwrap_or(self.precision_p);
        let field = ResidueField::new(self.p, self.f, &self.modulus)?;
        let base = BaseRing::new(field.clone(), precision)?;
        let eis: Result<Vec<Unram>> = self
            .eisenstein
            .iter()
            .map(|c| base.from_strings(c))
            .collect();
        TowerConfig::new(field, self.e, eis?, precision)
    }
}

/// On-disk form of a tower element (textual, canonical).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ElementFile {
    pub config: ConfigFile,
    pub level: u32,
    pub shift: i64,
    pub coeffs: Vec<Vec<String>>,
}
