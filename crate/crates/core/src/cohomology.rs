//! Invariant classes along the Kummer tower and their digit combinatorics.
//!
//! An element of the tower whose Galois oscillation is nonnegative represents
//! a class of the first cohomology of the integer ring (modulo the rational
//! part, which is quotiented away).  This module validates such
//! representatives, reads off their Teichmueller digit sequences, relates the
//! sequences to twist recurrences in both directions (a linear-dependence
//! search forward, an additive witness polynomial with certified approximate
//! roots backward), and implements the index bookkeeping that controls the
//! module structure in the ramified case.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

use crate::ax;
use crate::error::{Error, Result};
use crate::linalg;
use crate::residue::ResidueElement;
use crate::tower::{TowerConfig, TowerElement};
use crate::twistrec::{self, TwistRelation, TwistSequence};
use crate::unramified::Unram;
use crate::valuation::{rat, Valuation};

// ---- invariant classes ----

/// A representative of a cohomology class, normalized modulo the rational
/// part and checked against the oscillation and valuation bounds.
#[derive(Debug, Clone)]
pub struct InvariantClass {
    rep: TowerElement,
    validated: bool,
    oscillation: Valuation,
    valuation: Valuation,
}

impl InvariantClass {
    pub fn rep(&self) -> &TowerElement {
        &self.rep
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn oscillation(&self) -> &Valuation {
        &self.oscillation
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn config(&self) -> &Arc<TowerConfig> {
        self.rep.config()
    }

    pub fn level(&self) -> u32 {
        self.rep.level()
    }

    fn require_validated(&self) -> Result<()> {
        if self.validated {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "operation requires a validated invariant class".into(),
            ))
        }
    }
}

/// Normalizes x modulo the base field (subtracting its best rational
/// approximant) and checks the two bounds a cohomology class representative
/// must satisfy: oscillation >= 0 and valuation >= -1/(p-1).
///
/// The second bound follows from the first through the defect identity, so a
/// validated class always satisfies both; a failed check leaves `validated`
/// false rather than erroring, so corrupted inputs can be inspected.
pub fn validate_invariant(x: &TowerElement) -> Result<InvariantClass> {
    let rep = x.sub(&ax::best_approximant(x, 0)?)?;
    let oscillation = ax::galois_oscillation(&rep)?.oscillation;
    let valuation = rep.valuation();
    let p = rep.config().p() as i64;
    let lambda_ok = oscillation.ge_bound(&BigRational::zero())?;
    let v_ok = valuation.ge_bound(&rat(-1, p - 1))?;
    assert!(
        !lambda_ok || v_ok,
        "nonnegative oscillation must force the valuation bound"
    );
    Ok(InvariantClass {
        rep,
        validated: lambda_ok && v_ok,
        oscillation,
        valuation,
    })
}

/// Smallest n with pi^n times the class integral, i.e. the order of the class
/// under multiplication by the uniformizer of the base field.  Always at most
/// ceil(e/(p-1)); the bound is asserted.
pub fn torsion_check(cls: &InvariantClass) -> Result<u32> {
    cls.require_validated()?;
    let e = cls.config().e() as i64;
    let p = cls.config().p() as i64;
    let n = match &cls.valuation {
        Valuation::Infinite => 0,
        Valuation::Exact(v) => {
            if *v >= BigRational::zero() {
                0
            } else {
                let scaled = (-v.clone() * rat(e, 1)).ceil().to_integer();
                u32::try_from(&scaled)
                    .map_err(|_| Error::UnsupportedConfig("torsion order overflow".into()))?
            }
        }
        Valuation::AtLeast(c) => {
            if *c >= BigRational::zero() {
                0
            } else {
                return Err(Error::PrecisionExhausted(
                    "torsion order undetermined at the working precision".into(),
                ));
            }
        }
    };
    let bound = ((e + p - 2) / (p - 1)) as u32; // ceil(e/(p-1))
    assert!(n <= bound, "torsion order above the structural bound");
    Ok(n)
}

/// Negative-index Teichmueller digits of the normalized representative.
fn negative_digits(cls: &InvariantClass) -> Result<BTreeMap<i64, ResidueElement>> {
    let dim = cls.config().ring_dim(cls.level())? as i64;
    cls.rep.teichmuller_digits(-dim, 0)
}

/// Splits a positive integer as j * p^w with p not dividing j.
fn split_p_power(mut a: i64, p: i64) -> (i64, u32) {
    let mut w = 0;
    while a % p == 0 {
        a /= p;
        w += 1;
    }
    (a, w)
}

/// Digit table of a validated class for e <= p-1: row j-1 holds the sequence
/// x_{j,1}, ..., x_{j,count} read off the coefficient of eta_m^j (the
/// monomial of index -j p^{n-m}).  The negative Teichmueller support of a
/// validated class lies in exactly these monomials; anything else raises
/// SupportViolation as a cross-check on the validation bounds.
pub fn psi_digit_table(cls: &InvariantClass, count: usize) -> Result<Vec<Vec<ResidueElement>>> {
    cls.require_validated()?;
    let config = cls.config();
    let e = config.e() as i64;
    let p = config.p() as i64;
    if e > p - 1 {
        return Err(Error::UnsupportedConfig(format!(
            "digit sequences need e <= p-1, got e = {e}"
        )));
    }
    let n = cls.level();
    let field = config.field();
    let mut table = vec![vec![field.zero(); count]; e as usize];
    for (&idx, digit) in &negative_digits(cls)? {
        let (j, w) = split_p_power(-idx, p);
        if w >= n {
            return Err(Error::SupportViolation(format!(
                "negative digit at index {idx} lies in the base field"
            )));
        }
        if j > e {
            return Err(Error::SupportViolation(format!(
                "negative digit at index {idx} outside the eta monomials"
            )));
        }
        let m = (n - w) as usize;
        if m <= count {
            table[(j - 1) as usize][m - 1] = digit.clone();
        }
    }
    Ok(table)
}

/// Digit sequence x_1, ..., x_count of a validated class in the unramified
/// case (e = 1), where the digit x_m sits on eta_m.
pub fn psi_digits(cls: &InvariantClass, count: usize) -> Result<Vec<ResidueElement>> {
    if cls.config().e() != 1 {
        return Err(Error::UnsupportedConfig(
            "the flat digit sequence is the e = 1 case; use psi_digit_table".into(),
        ));
    }
    Ok(psi_digit_table(cls, count)?.remove(0))
}

/// The Frobenius-twisted class sequence xi_0 = rep, xi_{s+1} = xi_s^p - t_s
/// eta_0, where t_s is the Teichmueller digit of xi_s^p at the index of eta_0
/// (the only digit of xi_s^p below the negative support of a class).  Each
/// xi_s is again a class representative and its digit sequence is the s-fold
/// Frobenius of the s-shifted digit sequence of the input.
pub fn xi_tower_sequence(cls: &InvariantClass, s_max: usize) -> Result<Vec<TowerElement>> {
    cls.require_validated()?;
    let config = cls.config();
    if config.e() != 1 {
        return Err(Error::UnsupportedConfig(
            "the twisted class sequence is an e = 1 construction".into(),
        ));
    }
    let n = cls.level();
    let dim = config.ring_dim(n)? as i64;
    let p = config.p();
    let mut xis = vec![cls.rep.clone()];
    for _ in 0..s_max {
        let power = xis.last().expect("nonempty").pow(p)?;
        let bottom = power.teichmuller_digits(-dim, -dim + 1)?;
        let next = match bottom.get(&-dim) {
            Some(t) => power.sub(&TowerElement::teich_monomial(config, n, -dim, t)?)?,
            None => power,
        };
        xis.push(next);
    }
    Ok(xis)
}

/// Finds coefficients (delta_0, ..., delta_r), not all divisible by p, with
/// sum delta_s xi_s integral modulo the base field, and returns their mod-p
/// reduction as a twist relation.
///
/// A linear combination is integral modulo the base field exactly when its
/// Teichmueller digits at every negative non-base index (the base slots are
/// the multiples of p^n) vanish: once the digit residues cancel at an index
/// -a, the remainder there is p pi_n^{-a}, of positive valuation, which
/// cannot carry into any other negative digit.  The search is therefore
/// linear algebra over the residue field on the digit residues — digits, not
/// raw coefficient slots, because a power-and-subtract representation may
/// store a unit at -a as a p-divisible coefficient in a deeper slot.  A
/// finite digit sum only determines its stream up to the deepest position it
/// carries, so for an order-r candidate the rows stop r digit positions above
/// that floor: deeper indices would constrain digits the representation never
/// recorded.  r grows until a kernel appears.
#[allow(non_snake_case)] // K is the base field, not a word
pub fn find_K_linear_dependence(xis: &[TowerElement]) -> Result<TwistRelation> {
    let first = xis
        .first()
        .ok_or_else(|| Error::InvalidConfig("no elements to relate".into()))?;
    let config = first.config();
    if config.e() != 1 {
        return Err(Error::UnsupportedConfig(
            "the dependence search is an e = 1 construction".into(),
        ));
    }
    let n = first.level();
    for x in xis {
        if x.config().as_ref() != config.as_ref() || x.level() != n {
            return Err(Error::ConfigMismatch(
                "elements from different towers or levels".into(),
            ));
        }
    }
    let dim = config.ring_dim(n)? as i64;
    let field = config.field();
    let digit_maps: Vec<BTreeMap<i64, ResidueElement>> = xis
        .iter()
        .map(|x| x.teichmuller_digits(-dim, 0))
        .collect::<Result<_>>()?;
    // Union of the negative non-base digit depths across all inputs; an empty
    // union means every input is the zero class.
    let mut support: BTreeSet<i64> = BTreeSet::new();
    for digits in &digit_maps {
        for &idx in digits.keys() {
            if (-idx) % dim != 0 {
                support.insert(-idx);
            }
        }
    }
    if support.is_empty() {
        return Err(Error::InvalidConfig(
            "all inputs represent the zero class".into(),
        ));
    }
    // Deepest digit determined by the first input's stream; below it the
    // finite representation carries no information about the class.
    let a_floor = digit_maps[0]
        .keys()
        .filter_map(|&idx| ((-idx) % dim != 0).then_some(-idx))
        .min()
        .unwrap_or(dim);
    let r_cap = xis
        .len()
        .saturating_sub(1)
        .min(n.saturating_sub(1) as usize);
    for r in 1..=r_cap {
        let a_min = a_floor * config.p_pow_level(r as u32)?;
        let rows: Vec<Vec<ResidueElement>> = support
            .iter()
            .filter(|&&a| a >= a_min)
            .map(|&a| {
                digit_maps
                    .iter()
                    .take(r + 1)
                    .map(|digits| digits.get(&-a).cloned().unwrap_or_else(|| field.zero()))
                    .collect()
            })
            .collect();
        if rows.is_empty() {
            continue;
        }
        let basis = linalg::kernel_basis(field, rows)?;
        if basis.is_empty() {
            continue;
        }
        let best = basis
            .into_iter()
            .min_by_key(|v| {
                v.iter()
                    .map(|c| c.enumeration_index())
                    .collect::<Vec<u64>>()
            })
            .expect("nonempty kernel");
        let rel = TwistRelation::new(Arc::clone(field), best)?;
        return Ok(rel.canonicalized().0);
    }
    Err(Error::NoDependenceFound(format!(
        "no integral dependence up to order {r_cap} at level {n}"
    )))
}

// ---- witness polynomials ----

/// The additive polynomial P(X) = c + delta_0 X + delta_1 X^p + ... +
/// delta_r X^{p^r} attached to a twist relation and a digit stream, whose
/// approximate roots built from the shifted digits realize the stream as a
/// class digit sequence.  The constant is c = -(c_1 eta_1 + ... + c_r eta_r)
/// with c_t = sum_{s=r+1-t}^{r} delta_s [x_{t+s}]^{p^s}: the head of
/// sum_s delta_s xi^{p^s} for xi carrying the digits x_{r+1}, x_{r+2}, ...,
/// so that evaluation telescopes against the recurrence window by window.
#[derive(Debug, Clone)]
pub struct AdditiveWitnessPolynomial {
    config: Arc<TowerConfig>,
    relation: TwistRelation,
    /// x_1..x_{2r}, the prefix extended through the recurrence.
    digits: TwistSequence,
    /// Teichmueller lifts of d_0..d_r.
    deltas: Vec<Unram>,
    /// -(c_1 eta_1 + ... + c_r eta_r), represented at level r.
    constant: TowerElement,
}

impl AdditiveWitnessPolynomial {
    pub fn config(&self) -> &Arc<TowerConfig> {
        &self.config
    }

    pub fn relation(&self) -> &TwistRelation {
        &self.relation
    }

    pub fn order(&self) -> usize {
        self.relation.order()
    }

    pub fn digits(&self) -> &TwistSequence {
        &self.digits
    }

    pub fn constant(&self) -> &TowerElement {
        &self.constant
    }

    /// P(x), evaluated exactly in the tower arithmetic.
    pub fn evaluate(&self, x: &TowerElement) -> Result<TowerElement> {
        let base = self.config.base();
        let p = self.config.p();
        let mut acc = self.constant.clone();
        let mut power = x.clone();
        for (s, delta) in self.deltas.iter().enumerate() {
            if s > 0 {
                power = power.pow(p)?;
            }
            if !base.is_zero(delta) {
                acc = acc.add(&power.mul_base(delta)?)?;
            }
        }
        Ok(acc)
    }

    /// The stage-n approximate root xi_n = sum_{i=r+1}^{n+r} [x_i] eta_i,
    /// represented at level n + r.
    pub fn approximate_root(&self, n: u32) -> Result<TowerElement> {
        let r = self.order();
        let level = n + r as u32;
        let seed = &self.digits.terms()[..r];
        let stream = twistrec::extend_sequence(&self.relation, seed, n as usize + r)?;
        let mut xi = TowerElement::zero(&self.config, level)?;
        for i in (r + 1)..=(n as usize + r) {
            let digit = &stream.terms()[i - 1];
            if digit.is_zero() {
                continue;
            }
            let idx = -self.config.p_pow_level(level - i as u32)?;
            xi = xi.add(&TowerElement::teich_monomial(
                &self.config,
                level,
                idx,
                digit,
            )?)?;
        }
        Ok(xi)
    }
}

/// Assembles the witness polynomial for a relation with d_r != 0 from a digit
/// prefix (at least the first r digits; longer prefixes are checked for
/// consistency with the recurrence before the needed digits are extended).
pub fn build_witness_polynomial(
    config: &Arc<TowerConfig>,
    rel: &TwistRelation,
    digit_prefix: &[ResidueElement],
) -> Result<AdditiveWitnessPolynomial> {
    if config.e() != 1 {
        return Err(Error::UnsupportedConfig(
            "witness polynomials are an e = 1 construction".into(),
        ));
    }
    if config.field() != rel.field() {
        return Err(Error::FieldMismatch(
            "relation over a different residue field than the tower".into(),
        ));
    }
    let r = rel.order();
    if rel.coeffs()[r].is_zero() {
        return Err(Error::LeadingCoefficientZero(
            "witness assembly needs d_r != 0".into(),
        ));
    }
    if digit_prefix.len() < r {
        return Err(Error::InvalidConfig(format!(
            "digit prefix of length {} cannot seed an order-{r} recurrence",
            digit_prefix.len()
        )));
    }
    let want = (2 * r).max(digit_prefix.len());
    let digits = twistrec::extend_sequence(rel, &digit_prefix[..r], want)?;
    for (i, given) in digit_prefix.iter().enumerate() {
        if given != &digits.terms()[i] {
            return Err(Error::InvalidConfig(format!(
                "digit prefix entry {} contradicts the recurrence",
                i + 1
            )));
        }
    }
    let base = config.base();
    let p = config.p();
    let deltas: Vec<Unram> = rel.coeffs().iter().map(|d| base.teichmuller(d)).collect();
    let mut constant = TowerElement::zero(config, r as u32)?;
    for t in 1..=r {
        let mut c_t = base.zero();
        for (s, delta) in deltas.iter().enumerate().skip(r + 1 - t) {
            let exp = p
                .checked_pow(s as u32)
                .ok_or_else(|| Error::UnsupportedConfig("Frobenius power overflow".into()))?;
            let lift = base.teichmuller(&digits.terms()[t + s - 1]);
            c_t = base.add(&c_t, &base.mul(delta, &base.pow_u64(&lift, exp)));
        }
        if base.is_zero(&c_t) {
            continue;
        }
        let eta_t = TowerElement::eta(config, r as u32, t as u32)?;
        constant = constant.sub(&eta_t.mul_base(&c_t)?)?;
    }
    Ok(AdditiveWitnessPolynomial {
        config: Arc::clone(config),
        relation: rel.clone(),
        digits,
        deltas,
        constant,
    })
}

/// v(P(xi_n)) for the stage-n approximate root: always >= -1/p^{n+1}, and
/// nondecreasing in n (telescoping kills every full recurrence window, so
/// only the top digit survives below zero).
pub fn approximate_root_defect(pol: &AdditiveWitnessPolynomial, n: u32) -> Result<Valuation> {
    let root = pol.approximate_root(n)?;
    Ok(pol.evaluate(&root)?.valuation())
}

/// Exact binomial coefficient as a big integer.
fn binomial_bigint(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Coefficient valuations of the stage-n refinement polynomial
/// Q(y) = P(xi_n + y eta_{N+1}) with N = n + r: the polynomial whose integral
/// root supplies the next digit of an exact root of P.  Degree p^r; the
/// constant coefficient is P(xi_n) and the leading one is delta_r eta_{n+1},
/// both of valuation >= -1/p^{n+1}, so the Newton polygon certifies a root of
/// nonnegative valuation.
pub fn stage_coefficient_valuations(
    pol: &AdditiveWitnessPolynomial,
    n: u32,
) -> Result<BTreeMap<usize, Valuation>> {
    let r = pol.order();
    let config = pol.config();
    let base = config.base();
    let p = config.p();
    let top_level = n + r as u32 + 1;
    let xi = pol.approximate_root(n)?.embed(top_level)?;
    let mut out = BTreeMap::new();
    out.insert(0, pol.evaluate(&xi)?.valuation());
    let degree = p
        .checked_pow(r as u32)
        .ok_or_else(|| Error::UnsupportedConfig("stage degree overflow".into()))?;
    for j in 1..=degree {
        let mut acc = TowerElement::zero(config, top_level)?;
        for (s, delta) in pol.deltas.iter().enumerate() {
            let ps = p.pow(s as u32);
            if ps < j || base.is_zero(delta) {
                continue;
            }
            let coeff = base.mul_bigint(delta, &binomial_bigint(ps, j));
            if base.is_zero(&coeff) {
                continue;
            }
            let term = xi
                .pow(ps - j)?
                .mul_base(&coeff)?
                .mul_uniformizer_pow(-(j as i64))?;
            acc = acc.add(&term)?;
        }
        out.insert(j as usize, acc.valuation());
    }
    Ok(out)
}

// ---- Newton polygons ----

/// Lower convex hull of the finite coefficient valuations of a polynomial;
/// the roots of valuation < infinity have valuations equal to the negated
/// slopes, with multiplicities given by the horizontal lengths.  (Zero roots
/// coming from vanishing low coefficients are not reported as segments.)
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPolygon {
    segments: Vec<(BigRational, i64)>,
}

impl NewtonPolygon {
    /// (slope, horizontal length) pairs in ascending slope order.
    pub fn segments(&self) -> &[(BigRational, i64)] {
        &self.segments
    }

    /// True iff some root has strictly positive valuation (a slope < 0).
    pub fn has_positive_valuation_root(&self) -> bool {
        self.segments.iter().any(|(s, _)| *s < BigRational::zero())
    }

    /// True iff some root is integral, i.e. has valuation >= 0 (a slope <= 0).
    pub fn has_nonnegative_valuation_root(&self) -> bool {
        self.segments.iter().any(|(s, _)| *s <= BigRational::zero())
    }
}

/// Builds the Newton polygon from a map degree -> coefficient valuation.
/// Needs at least two finite (exact) points including the top degree; lower
/// bounds are accepted only when they certifiably lie on or above the hull.
pub fn newton_polygon(points: &BTreeMap<usize, Valuation>) -> Result<NewtonPolygon> {
    let (_, top_val) = points
        .iter()
        .next_back()
        .ok_or_else(|| Error::DegenerateInput("no coefficients given".into()))?;
    if !matches!(top_val, Valuation::Exact(_)) {
        return Err(Error::DegenerateInput(
            "the leading coefficient valuation must be finite and exact".into(),
        ));
    }
    let finite: Vec<(i64, BigRational)> = points
        .iter()
        .filter_map(|(&j, v)| match v {
            Valuation::Exact(q) => Some((j as i64, q.clone())),
            _ => None,
        })
        .collect();
    if finite.len() < 2 {
        return Err(Error::DegenerateInput(
            "a polygon needs at least two finite coefficients".into(),
        ));
    }
    // Monotone-chain lower hull over points already sorted by degree.
    let mut hull: Vec<(i64, BigRational)> = Vec::new();
    for (x, y) in finite {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2].clone();
            let (x2, y2) = hull[hull.len() - 1].clone();
            // Pop the middle point unless the slopes strictly increase.
            let lhs = (&y2 - &y1) * rat(x - x2, 1);
            let rhs = (&y - &y2) * rat(x2 - x1, 1);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let segments: Vec<(BigRational, i64)> = hull
        .windows(2)
        .map(|w| {
            let (x1, y1) = &w[0];
            let (x2, y2) = &w[1];
            ((y2 - y1) / rat(x2 - x1, 1), x2 - x1)
        })
        .collect();
    // A lower bound below (or left of) the certified hull leaves the polygon
    // ambiguous.
    for (&j, v) in points {
        if let Valuation::AtLeast(c) = v {
            let j = j as i64;
            let covered = j >= hull[0].0 && hull_value(&hull, j).is_some_and(|h| *c >= h);
            if !covered {
                return Err(Error::PrecisionExhausted(format!(
                    "coefficient {j} is only bounded below and may cut the hull"
                )));
            }
        }
    }
    Ok(NewtonPolygon { segments })
}

/// Height of the hull at abscissa j (None outside its span).
fn hull_value(hull: &[(i64, BigRational)], j: i64) -> Option<BigRational> {
    hull.windows(2)
        .find(|w| w[0].0 <= j && j <= w[1].0)
        .map(|w| {
            let (x1, y1) = &w[0];
            let (x2, y2) = &w[1];
            y1 + (y2 - y1) * rat(j - x1, 1) / rat(x2 - x1, 1)
        })
        .or_else(|| (hull.len() == 1 && hull[0].0 == j).then(|| hull[0].1.clone()))
}

// ---- ramified index bookkeeping ----

/// The index combinatorics controlling the finite generation of the classes
/// modulo pi^r-torsion: tau = floor(e/(p-1)), rho = floor(ep/(p-1)), the set
/// I of canonical slots (i, gamma_{i,j}), and its filtered subset I_r.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    p: u64,
    e: u32,
    r: u32,
    tau: u32,
    rho: u32,
    pairs: Vec<(u32, u32)>,
    restricted: Vec<(u32, u32)>,
}

impl IndexSet {
    pub fn tau(&self) -> u32 {
        self.tau
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    /// The slots (i, gamma_{i,j}) for i up to the cutoff past which the
    /// filtered set is provably empty.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// I_r: the slots with r p^i < gamma.
    pub fn restricted(&self) -> &[(u32, u32)] {
        &self.restricted
    }

    /// The sharp generator bound pe/(r(p-1)^2).
    pub fn bound(&self) -> BigRational {
        rat(
            (self.p * self.e as u64) as i64,
            (self.r as i64) * (self.p as i64 - 1).pow(2),
        )
    }

    /// Whether |I_r| actually stays within the sharp bound.  The comparison
    /// is reported rather than asserted because the enumeration refutes the
    /// sharp constant on parts of the desk grid (e.g. p = 3, e = 12, r = 1
    /// yields 10 slots against a stated cap of 9); only the coarser cap
    /// e p^2/(r(p-1)^2), one factor of p weaker, survives enumeration.
    pub fn bound_holds(&self) -> bool {
        let count = BigRational::from_integer(self.restricted.len().into());
        count <= self.bound()
    }
}

/// gamma_{i,j}: the largest s in [tau+1, rho] congruent to j modulo p^i.
fn gamma_slot(j: u64, step: u64, rho: u64) -> u64 {
    j + ((rho - j) / step) * step
}

/// Enumerates tau, rho, and the slot sets for the given (p, e, r).
/// rho - tau = e always.  Each admissible i contributes at most p^i distinct
/// residue slots, and summing the geometric series over r p^i < rho gives
/// |I_r| < (p/(p-1)) (rho/r) <= e p^2/(r(p-1)^2); that cap is asserted.  The
/// sharper constant pe/(r(p-1)^2) fails on this very enumeration (see
/// [`IndexSet::bound_holds`]), so it is exposed as data instead.
pub fn index_sets(p: u64, e: u32, r: u32) -> Result<IndexSet> {
    if p < 2 || e < 1 || r < 1 {
        return Err(Error::InvalidConfig(
            "index sets need p >= 2, e >= 1, r >= 1".into(),
        ));
    }
    if e as u64 > 1 << 20 || p > 1 << 20 {
        return Err(Error::UnsupportedConfig(
            "index parameters too large".into(),
        ));
    }
    let tau = (e as u64 / (p - 1)) as u32;
    let rho = (e as u64 * p / (p - 1)) as u32;
    assert_eq!(rho - tau, e, "the slot window must have length e");
    let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut i = 1u32;
    loop {
        let step = match p.checked_pow(i) {
            Some(s) if (r as u64) * s < rho as u64 => s,
            _ => break,
        };
        for j in (tau + 1)..=rho {
            if (j as u64).is_multiple_of(step) {
                continue;
            }
            let gamma = gamma_slot(j as u64, step, rho as u64) as u32;
            pairs.insert((i, gamma));
        }
        i += 1;
    }
    let pairs: Vec<(u32, u32)> = pairs.into_iter().collect();
    let restricted: Vec<(u32, u32)> = pairs
        .iter()
        .copied()
        .filter(|&(i, gamma)| (r as u64) * p.pow(i) < gamma as u64)
        .collect();
    let count = restricted.len() as u128;
    let cap_num = (e as u128) * (p as u128).pow(2);
    let cap_den = (r as u128) * ((p - 1) as u128).pow(2);
    assert!(
        count * cap_den <= cap_num,
        "the filtered slot count exceeds the geometric-series cap"
    );
    Ok(IndexSet {
        p,
        e,
        r,
        tau,
        rho,
        pairs,
        restricted,
    })
}

/// Canonical negative-support decomposition of a validated class in the
/// ramified case: each Teichmueller digit [c] at index -j0 p^w (p not
/// dividing j0) is the monomial [c] eta_i^{j0} with i = n - w; it is
/// regrouped onto the canonical slot (i', gamma) with i' = i + t for the
/// least t >= 0 with j0 p^t > tau, absorbing eta_{i'}^{j'} = pi^lambda
/// eta_{i'}^gamma into the base-field coefficient beta.  The map sends
/// (i, gamma) to beta_{i,gamma} as a level-0 element; the regrouped sum
/// resums exactly to the negative part of the representative (asserted).
pub fn ramified_support(cls: &InvariantClass) -> Result<BTreeMap<(u32, u32), TowerElement>> {
    cls.require_validated()?;
    let config = cls.config();
    let p = config.p();
    let e = config.e() as u64;
    let n = cls.level();
    let tau = e / (p - 1);
    let rho = e * p / (p - 1);
    let digits = negative_digits(cls)?;
    let mut out: BTreeMap<(u32, u32), TowerElement> = BTreeMap::new();
    for (&idx, digit) in &digits {
        let (j0, w) = split_p_power(-idx, p as i64);
        if w >= n {
            return Err(Error::SupportViolation(format!(
                "negative digit at index {idx} lies in the base field"
            )));
        }
        let j0 = j0 as u64;
        if j0 > rho {
            return Err(Error::SupportViolation(format!(
                "negative digit at index {idx} outside the validated support"
            )));
        }
        let i = n - w;
        let mut t = 0u32;
        let mut j = j0;
        while j <= tau {
            j *= p;
            t += 1;
        }
        debug_assert!(j <= rho, "lifting a digit past tau stays within rho");
        let ii = i + t;
        let step = p
            .checked_pow(ii)
            .ok_or_else(|| Error::UnsupportedConfig("slot index overflow".into()))?;
        let gamma = gamma_slot(j, step, rho);
        let lambda = ((gamma - j) / step) as i64;
        let term = TowerElement::teich_monomial(config, 0, lambda, digit)?;
        let slot = (ii, gamma as u32);
        let entry = match out.remove(&slot) {
            Some(beta) => beta.add(&term)?,
            None => term,
        };
        out.insert(slot, entry);
    }
    // Round trip: the regrouped sum must reproduce the digit expansion.
    let top = out.keys().map(|&(i, _)| i).max().unwrap_or(0).max(n);
    let mut resum = TowerElement::zero(config, top)?;
    for (&(i, gamma), beta) in &out {
        let scale = config.p_pow_level(top - i)?;
        let idx = -(gamma as i64)
            .checked_mul(scale)
            .ok_or_else(|| Error::UnsupportedConfig("slot index overflow".into()))?;
        resum = resum.add(&beta.embed(top)?.mul_uniformizer_pow(idx)?)?;
    }
    let negative = TowerElement::from_teich_digits(config, n, &digits)?.embed(top)?;
    assert!(
        resum.sub(&negative)?.is_zero_repr(),
        "regrouped support failed to resum to the digit expansion"
    );
    Ok(out)
}
