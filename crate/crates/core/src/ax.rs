//! The Galois oscillation functional and optimal lower-level approximation.
//!
//! For x in K_n the oscillation Lambda(x) = inf_sigma v(sigma x - x) over the
//! Galois group of the normalized tower measures how far x is from being
//! Galois-invariant, i.e. from lying in K.  It is computed by an exact
//! coefficient formula: writing x = sum a_i pi_n^i with a_i in K,
//!
//! ```text
//! Lambda(x) = min over i in [1, p^n) with a_i != 0 of
//!             v(a_i) + i/(e p^n) + p^{v_p(i)} / (p^{n-1}(p-1)),
//! ```
//!
//! and the best approximation of x from the subfield K_m is obtained by simply
//! keeping the coefficients whose index is divisible by p^{n-m}.  The residual
//! defect always misses the value group of K_m, which certifies optimality,
//! and oscillation and defects are linked by the identity
//!
//! ```text
//! Lambda(x) = min over 0 <= m <= n of (defect(x, m) + 1/(p^m(p-1))),
//! ```
//!
//! whose constant 1/(p^m(p-1)) is optimal (it improves the classical
//! Ax bound p/(p-1)^2).

use num::rational::BigRational;

use crate::error::Result;
use crate::tower::TowerElement;
use crate::valuation::{rat, Valuation};

/// One candidate term of the oscillation formula.
#[derive(Debug, Clone)]
pub struct OscTerm {
    /// Coefficient index i, 1 <= i < p^n.
    pub index: i64,
    /// v(a_i), the valuation of the K-coefficient.
    pub coefficient_valuation: Valuation,
    /// The exact offset i/(e p^n) + p^{v_p(i)}/(p^{n-1}(p-1)).
    pub offset: BigRational,
    /// coefficient_valuation + offset.
    pub term: Valuation,
}

/// Result of the oscillation computation: the value, the per-index terms, and
/// the (provably unique) minimizing index when the value is finite.
#[derive(Debug, Clone)]
pub struct OscillationReport {
    pub level: u32,
    pub oscillation: Valuation,
    pub terms: Vec<OscTerm>,
    pub argmin_index: Option<i64>,
}

/// p-adic valuation of a nonzero integer.
fn vp_int(mut n: i64, p: i64) -> u32 {
    debug_assert!(n != 0);
    n = n.abs();
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Computes Lambda(x) = inf_sigma v(sigma x - x) by the coefficient formula.
/// Infinite exactly when all a_i with i >= 1 vanish (x in K).
pub fn galois_oscillation(x: &TowerElement) -> Result<OscillationReport> {
    let n = x.level();
    let cfg = x.config();
    let p = cfg.p() as i64;
    let e = cfg.e() as i64;
    let pn = cfg.p_pow_level(n)?;
    let coeffs = x.coefficients_over_base()?;
    let mut terms = Vec::new();
    let mut value = Valuation::Infinite;
    for (i, ai) in coeffs.iter().enumerate().skip(1) {
        let i = i as i64;
        let va = ai.valuation();
        if va.is_infinite() {
            continue; // a_i = 0 contributes no conjugate difference
        }
        let offset = rat(i, e * pn) + rat(p.pow(vp_int(i, p)), p.pow(n - 1) * (p - 1));
        let term = va.add_rat(&offset);
        value = value.min(&term)?;
        terms.push(OscTerm {
            index: i,
            coefficient_valuation: va,
            offset,
            term,
        });
    }
    let argmin_index = match &value {
        Valuation::Exact(v) => {
            let hits: Vec<i64> = terms
                .iter()
                .filter(|t| t.term.as_exact() == Some(v))
                .map(|t| t.index)
                .collect();
            // Distinct finite terms: two indices can never tie.  A tie would
            // be a bug in this library, not a property of the input.
            assert_eq!(hits.len(), 1, "oscillation argmin must be unique");
            Some(hits[0])
        }
        _ => None,
    };
    Ok(OscillationReport {
        level: n,
        oscillation: value,
        terms,
        argmin_index,
    })
}

/// The optimal approximation of x from K_m: keep exactly the coefficients
/// whose pi_n-index is divisible by p^{n-m}.  For m >= n this is x itself.
pub fn best_approximant(x: &TowerElement, m: u32) -> Result<TowerElement> {
    let n = x.level();
    if m >= n {
        return Ok(x.clone());
    }
    let step = x.config().p_pow_level(n - m)?;
    Ok(x.retain_index_multiples(step))
}

/// v(x - best_approximant(x, m)) by the closed formula
/// min over p^{n-m}-indivisible indices t of (v_p(u_t) + t/(e p^n)),
/// cross-checked against the direct subtraction.
pub fn approximation_defect(x: &TowerElement, m: u32) -> Result<Valuation> {
    let n = x.level();
    if m >= n {
        return Ok(Valuation::Infinite);
    }
    let cfg = x.config();
    let p = cfg.p() as i64;
    let e = cfg.e() as i64;
    let step = cfg.p_pow_level(n - m)?;
    let dim = e * cfg.p_pow_level(n)?;
    let formula = match x.dropped_min_weight(step) {
        None => Valuation::Infinite, // every stored index already lies in K_m
        Some((w, _)) => {
            let v = rat(w, dim);
            if v < *x.precision_cutoff() {
                Valuation::Exact(v)
            } else {
                Valuation::AtLeast(x.precision_cutoff().clone())
            }
        }
    };
    // Cross-check: the subtraction route must agree wherever it is decisive.
    let y = best_approximant(x, m)?;
    let direct = x.sub(&y)?.valuation();
    match (&formula, &direct) {
        (Valuation::Exact(a), Valuation::Exact(b)) => assert_eq!(a, b),
        (Valuation::AtLeast(a), Valuation::AtLeast(b)) => assert_eq!(a, b),
        (Valuation::Infinite, Valuation::AtLeast(_))
        | (Valuation::Infinite, Valuation::Infinite) => {}
        other => panic!("defect formula and subtraction disagree: {other:?}"),
    }
    // Optimality certificate: a finite defect never lies in the value group
    // of K_m, so no further correction from K_m can improve it.
    if let Valuation::Exact(v) = &formula {
        let scaled = v * rat(e * p.pow(m), 1);
        assert!(
            !scaled.is_integer(),
            "finite defect must avoid the K_m value group"
        );
    }
    Ok(formula)
}

/// Both sides of the oscillation identity, with the per-level terms.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub oscillation: Valuation,
    pub defect_side: Valuation,
    /// (m, defect(x, m), 1/(p^m(p-1)), sum) for 0 <= m <= n.
    pub per_level: Vec<(u32, Valuation, BigRational, Valuation)>,
    /// The m achieving the minimum, when the defect side is finite.
    pub tight_m: Option<u32>,
    pub holds: bool,
}

/// Verifies Lambda(x) = min_m (defect(x, m) + 1/(p^m(p-1))) by computing both
/// sides independently.
pub fn oscillation_identity(x: &TowerElement) -> Result<IdentityReport> {
    let n = x.level();
    let p = x.config().p() as i64;
    let lhs = galois_oscillation(x)?.oscillation;
    let mut per_level = Vec::new();
    let mut rhs = Valuation::Infinite;
    for m in 0..=n {
        let defect = approximation_defect(x, m)?;
        let constant = rat(1, p.pow(m) * (p - 1));
        let sum = defect.add_rat(&constant);
        rhs = rhs.min(&sum)?;
        per_level.push((m, defect, constant, sum));
    }
    let tight_m = match &rhs {
        Valuation::Exact(v) => per_level
            .iter()
            .find(|(_, _, _, s)| s.as_exact() == Some(v))
            .map(|(m, _, _, _)| *m),
        _ => None,
    };
    let holds = lhs == rhs;
    Ok(IdentityReport {
        oscillation: lhs,
        defect_side: rhs,
        per_level,
        tight_m,
        holds,
    })
}

/// The uniform-bound equivalence: Lambda(x) >= A holds if and only if every
/// level satisfies defect(x, m) >= A - 1/(p^m(p-1)).  Returns both sides,
/// each decided independently.
pub fn oscillation_bound_equivalence(x: &TowerElement, a: &BigRational) -> Result<(bool, bool)> {
    let n = x.level();
    let p = x.config().p() as i64;
    let via_oscillation = galois_oscillation(x)?.oscillation.ge_bound(a)?;
    let mut via_defects = true;
    for m in 0..=n {
        let threshold = a - rat(1, p.pow(m) * (p - 1));
        if !approximation_defect(x, m)?.ge_bound(&threshold)? {
            via_defects = false;
        }
    }
    Ok((via_oscillation, via_defects))
}

/// The optimal approximation constant 1/(p^m(p-1)) together with the constant
/// p/(p-1)^2 from Ax's original bound (which the optimal one improves).
pub fn ax_constants(p: u64, m: u32) -> (BigRational, BigRational) {
    let p = p as i64;
    let optimal = rat(1, p.pow(m) * (p - 1));
    let ax_original = rat(p, (p - 1) * (p - 1));
    (optimal, ax_original)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue::ResidueField;
    use crate::tower::TowerConfig;
    use num::One;
    use std::sync::Arc;

    fn cfg(p: u64, e: u32, prec: u32) -> Arc<TowerConfig> {
        let field = ResidueField::prime_field(p).unwrap();
        if e == 1 {
            TowerConfig::unramified(field, prec).unwrap()
        } else {
            TowerConfig::totally_ramified(field, e, prec).unwrap()
        }
    }

    #[test]
    fn oscillation_of_pi1_at_p3() {
        let c = cfg(3, 1, 8);
        let pi = TowerElement::uniformizer(&c, 1).unwrap();
        let report = galois_oscillation(&pi).unwrap();
        assert_eq!(report.oscillation, Valuation::Exact(rat(5, 6)));
        assert_eq!(report.argmin_index, Some(1));
    }

    #[test]
    fn oscillation_of_pi2_plus_pi1_at_p2() {
        let c = cfg(2, 1, 8);
        let x = TowerElement::uniformizer(&c, 2)
            .unwrap()
            .add(&TowerElement::uniformizer(&c, 1).unwrap())
            .unwrap();
        let report = galois_oscillation(&x).unwrap();
        assert_eq!(report.oscillation, Valuation::Exact(rat(3, 4)));
        assert_eq!(report.argmin_index, Some(1));
        // The two candidate terms are 1/4 + 1/2 and 2/4 + 1.
        assert_eq!(report.terms.len(), 2);
        assert_eq!(report.terms[0].term, Valuation::Exact(rat(3, 4)));
        assert_eq!(report.terms[1].term, Valuation::Exact(rat(3, 2)));
    }

    #[test]
    fn oscillation_of_base_field_elements_is_infinite() {
        let c = cfg(3, 1, 8);
        let x = TowerElement::from_i64(&c, 2, 10).unwrap();
        let report = galois_oscillation(&x).unwrap();
        assert!(report.oscillation.is_infinite());
        assert!(report.terms.is_empty());
    }

    #[test]
    fn approximant_keeps_subfield_part() {
        let c = cfg(2, 1, 8);
        let pi2 = TowerElement::uniformizer(&c, 2).unwrap();
        let pi1 = TowerElement::uniformizer(&c, 1).unwrap();
        let x = pi2.add(&pi1).unwrap();
        let y = best_approximant(&x, 1).unwrap();
        assert!(y.same_repr(&pi1.embed(2).unwrap()));
        assert_eq!(
            approximation_defect(&x, 1).unwrap(),
            Valuation::Exact(rat(1, 4))
        );
    }

    #[test]
    fn defect_of_pi1_from_base_at_p3() {
        let c = cfg(3, 1, 8);
        let pi = TowerElement::uniformizer(&c, 1).unwrap();
        let y = best_approximant(&pi, 0).unwrap();
        assert!(y.is_zero_repr());
        assert_eq!(
            approximation_defect(&pi, 0).unwrap(),
            Valuation::Exact(rat(1, 3))
        );
    }

    #[test]
    fn defect_closed_formula_example() {
        // x = 2 + pi_2 + p pi_2^3 at p=2: min over odd j of v(a_j) + j/4.
        let c = cfg(2, 1, 8);
        let x = TowerElement::from_i64(&c, 2, 2)
            .unwrap()
            .add(&TowerElement::uniformizer(&c, 2).unwrap())
            .unwrap()
            .add(&TowerElement::monomial(&c, 2, 3, c.base().from_i64(2)).unwrap())
            .unwrap();
        assert_eq!(
            approximation_defect(&x, 1).unwrap(),
            Valuation::Exact(rat(1, 4))
        );
        assert_eq!(approximation_defect(&x, 2).unwrap(), Valuation::Infinite);
    }

    #[test]
    fn defect_infinite_inside_subfield() {
        // 1 + pi_2^2 lies in K_1 when p = 2.
        let c = cfg(2, 1, 8);
        let x = TowerElement::one(&c, 2)
            .unwrap()
            .add(&TowerElement::monomial(&c, 2, 2, c.base().one()).unwrap())
            .unwrap();
        assert_eq!(approximation_defect(&x, 1).unwrap(), Valuation::Infinite);
        assert_eq!(approximation_defect(&x, 3).unwrap(), Valuation::Infinite);
    }

    #[test]
    fn identity_on_worked_examples() {
        let c3 = cfg(3, 1, 8);
        let pi = TowerElement::uniformizer(&c3, 1).unwrap();
        let rep = oscillation_identity(&pi).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.oscillation, Valuation::Exact(rat(5, 6)));
        assert_eq!(rep.defect_side, Valuation::Exact(rat(5, 6)));
        assert_eq!(rep.tight_m, Some(0));

        let c2 = cfg(2, 1, 8);
        let x = TowerElement::uniformizer(&c2, 2)
            .unwrap()
            .add(&TowerElement::uniformizer(&c2, 1).unwrap())
            .unwrap();
        let rep = oscillation_identity(&x).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.oscillation, Valuation::Exact(rat(3, 4)));
        assert_eq!(rep.tight_m, Some(1));

        let k = TowerElement::from_i64(&c2, 2, 7).unwrap();
        let rep = oscillation_identity(&k).unwrap();
        assert!(rep.holds);
        assert!(rep.oscillation.is_infinite());
        assert!(rep.defect_side.is_infinite());
    }

    #[test]
    fn bound_equivalence_at_and_above_the_oscillation() {
        let c = cfg(3, 1, 8);
        let pi = TowerElement::uniformizer(&c, 1).unwrap();
        let (a, b) = oscillation_bound_equivalence(&pi, &rat(5, 6)).unwrap();
        assert!(a && b);
        let (a, b) = oscillation_bound_equivalence(&pi, &rat(6, 7)).unwrap();
        assert!(!a && !b);
        let k = TowerElement::from_i64(&c, 1, 9).unwrap();
        let (a, b) = oscillation_bound_equivalence(&k, &rat(100, 1)).unwrap();
        assert!(a && b);
    }

    #[test]
    fn constants_examples() {
        assert_eq!(ax_constants(2, 0), (rat(1, 1), rat(2, 1)));
        assert_eq!(ax_constants(3, 1), (rat(1, 6), rat(3, 4)));
        for p in [2u64, 3, 5, 7, 11] {
            let (opt, ax) = ax_constants(p, 0);
            assert!(opt <= ax, "the optimal constant improves Ax's at p={p}");
            assert!((opt * rat(p as i64 - 1, 1)).is_one());
        }
    }

    #[test]
    fn ramified_oscillation_and_identity() {
        // e = 2, p = 3: v(pi_1) = 1/6, Lambda(pi_1) = 1/6 + 1/2 = 2/3.
        let c = cfg(3, 2, 8);
        let pi = TowerElement::uniformizer(&c, 1).unwrap();
        let report = galois_oscillation(&pi).unwrap();
        assert_eq!(report.oscillation, Valuation::Exact(rat(2, 3)));
        let rep = oscillation_identity(&pi).unwrap();
        assert!(rep.holds);
        // defect(pi_1, 0) = 1/6 and the m = 0 constant is 1/2.
        assert_eq!(rep.per_level[0].1, Valuation::Exact(rat(1, 6)));
    }
}
