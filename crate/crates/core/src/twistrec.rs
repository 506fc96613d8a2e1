//! Frobenius-twisted (semilinear) recurrences over the residue field.
//!
//! A sequence (x_1, x_2, ...) in k is twist-recurrent of order r for
//! coefficients (d_0, ..., d_r) when every window satisfies
//!
//! ```text
//! d_0 x_n + d_1 x_{n+1}^p + ... + d_r x_{n+r}^{p^r} = 0.
//! ```
//!
//! The relation is semilinear in the sequence (Frobenius powers appear), but
//! perfectly linear in the coefficients d_s once the Frobenius powers of the
//! data are tabulated — detection is therefore a kernel computation over k.
//! Solution sets are vector spaces over the prime field F_p (Frobenius is
//! additive and fixes F_p), but not in general over k; an explicit
//! counterexample over F_4 is kept under test.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::residue::{ResidueElement, ResidueField};

/// Coefficients (d_0, ..., d_r) of a twisted recurrence; not all zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistRelation {
    field: Arc<ResidueField>,
    coeffs: Vec<ResidueElement>,
}

impl TwistRelation {
    pub fn new(field: Arc<ResidueField>, coeffs: Vec<ResidueElement>) -> Result<TwistRelation> {
        if coeffs.is_empty() || coeffs.iter().all(|c| c.is_zero()) {
            return Err(Error::InvalidConfig(
                "a twist relation needs at least one nonzero coefficient".into(),
            ));
        }
        for c in &coeffs {
            if c.field() != &field {
                return Err(Error::FieldMismatch(
                    "relation coefficient from a different field".into(),
                ));
            }
        }
        Ok(TwistRelation { field, coeffs })
    }

    pub fn from_signed(field: &Arc<ResidueField>, coeffs: &[&[i64]]) -> Result<TwistRelation> {
        let elems: Result<Vec<_>> = coeffs.iter().map(|c| field.element_signed(c)).collect();
        TwistRelation::new(Arc::clone(field), elems?)
    }

    pub fn field(&self) -> &Arc<ResidueField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[ResidueElement] {
        &self.coeffs
    }

    /// Order r (one less than the coefficient count, zero coefficients kept:
    /// whether d_0 or d_r vanishes governs backward/forward solvability, so
    /// the stored form is exactly what the caller gave).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The same relation with zero coefficients trimmed from both ends.
    /// Trimming the d_0 end shifts all windows, so the result is reported as
    /// (relation, window_shift).
    pub fn canonicalized(&self) -> (TwistRelation, usize) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero()).unwrap();
        let tail = self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap();
        let rel = TwistRelation {
            field: Arc::clone(&self.field),
            coeffs: self.coeffs[lead..=tail].to_vec(),
        };
        (rel, lead)
    }

    pub fn to_file(&self) -> RelationFile {
        RelationFile {
            field: FieldDescriptor::of(&self.field),
            coeffs: self.coeffs.iter().map(|c| c.coords().to_vec()).collect(),
        }
    }

    pub fn from_file(file: &RelationFile) -> Result<TwistRelation> {
        let field = file.field.build()?;
        let coeffs: Result<Vec<_>> = file.coeffs.iter().map(|c| field.element(c)).collect();
        TwistRelation::new(field, coeffs?)
    }
}

/// A finite sequence (x_1, x_2, ...) over k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistSequence {
    field: Arc<ResidueField>,
    terms: Vec<ResidueElement>,
}

impl TwistSequence {
    pub fn new(field: Arc<ResidueField>, terms: Vec<ResidueElement>) -> Result<TwistSequence> {
        for t in &terms {
            if t.field() != &field {
                return Err(Error::FieldMismatch(
                    "sequence term from a different field".into(),
                ));
            }
        }
        Ok(TwistSequence { field, terms })
    }

    pub fn from_signed(field: &Arc<ResidueField>, terms: &[&[i64]]) -> Result<TwistSequence> {
        let elems: Result<Vec<_>> = terms.iter().map(|c| field.element_signed(c)).collect();
        TwistSequence::new(Arc::clone(field), elems?)
    }

    pub fn field(&self) -> &Arc<ResidueField> {
        &self.field
    }

    pub fn terms(&self) -> &[ResidueElement] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_file(&self) -> SequenceFile {
        SequenceFile {
            field: FieldDescriptor::of(&self.field),
            terms: self.terms.iter().map(|c| c.coords().to_vec()).collect(),
        }
    }

    pub fn from_file(file: &SequenceFile) -> Result<TwistSequence> {
        let field = file.field.build()?;
        let terms: Result<Vec<_>> = file.terms.iter().map(|c| field.element(c)).collect();
        TwistSequence::new(field, terms?)
    }
}

/// Serialized residue field: p, f, and the modulus of the F_p[x] quotient.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FieldDescriptor {
    pub p: u64,
    pub f: usize,
    pub modulus: Vec<u64>,
}

impl FieldDescriptor {
    pub fn of(field: &Arc<ResidueField>) -> FieldDescriptor {
        FieldDescriptor {
            p: field.p(),
            f: field.f(),
            modulus: field.modulus().to_vec(),
        }
    }

    pub fn build(&self) -> Result<Arc<ResidueField>> {
        ResidueField::new(self.p, self.f, &self.modulus)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RelationFile {
    pub field: FieldDescriptor,
    /// Coefficients d_0..d_r as coordinate lists over F_p.
    pub coeffs: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SequenceFile {
    pub field: FieldDescriptor,
    /// Terms x_1, x_2, ... as coordinate lists over F_p.
    pub terms: Vec<Vec<u64>>,
}

fn check_fields(seq: &TwistSequence, rel: &TwistRelation) -> Result<()> {
    if seq.field != rel.field {
        return Err(Error::FieldMismatch(
            "sequence and relation over different fields".into(),
        ));
    }
    Ok(())
}

/// The window sum d_0 x_n + ... + d_r x_{n+r}^{p^r} starting at 0-based `n`.
fn window_sum(seq: &[ResidueElement], rel: &TwistRelation, n: usize) -> Result<ResidueElement> {
    let mut acc = rel.field.zero();
    for (s, d) in rel.coeffs.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        let term = d.mul(&seq[n + s].frobenius(s as u32))?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// True iff every window of the sequence satisfies the relation.
pub fn check_relation(seq: &TwistSequence, rel: &TwistRelation) -> Result<bool> {
    check_fields(seq, rel)?;
    let r = rel.order();
    if seq.len() < r + 1 {
        return Err(Error::WindowTooShort(format!(
            "{} terms cannot host an order-{r} window",
            seq.len()
        )));
    }
    for n in 0..=(seq.len() - r - 1) {
        if !window_sum(&seq.terms, rel, n)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Finds the smallest order r <= r_max whose coefficient kernel is nonzero,
/// returning the canonical kernel vector (the basis vector from the reduced
/// echelon kernel whose coordinate tuple is lexicographically first under the
/// field enumeration).  The relation is linear in (d_0..d_r): each window
/// contributes one row (x_n, x_{n+1}^p, ..., x_{n+r}^{p^r}).
pub fn find_relation(seq: &TwistSequence, r_max: usize) -> Result<Option<TwistRelation>> {
    if seq.is_empty() || seq.len() < 2 * r_max {
        return Err(Error::WindowTooShort(format!(
            "{} terms are too few to search orders up to {r_max} reliably",
            seq.len()
        )));
    }
    for r in 0..=r_max {
        let rows = seq.len() - r;
        let mat: Vec<Vec<ResidueElement>> = (0..rows)
            .map(|n| {
                (0..=r)
                    .map(|s| seq.terms[n + s].frobenius(s as u32))
                    .collect()
            })
            .collect();
        let basis = linalg::kernel_basis(&seq.field, mat)?;
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
            .expect("nonempty basis");
        return Ok(Some(TwistRelation::new(Arc::clone(&seq.field), best)?));
    }
    Ok(None)
}

/// Generates `count` terms from `seed` (length r) by forward recursion
/// x_{n+r} = frobenius_inverse(-d_r^{-1} (d_0 x_n + ... ), r); requires
/// d_r != 0 and the perfectness of k (Frobenius is invertible).
pub fn extend_sequence(
    rel: &TwistRelation,
    seed: &[ResidueElement],
    count: usize,
) -> Result<TwistSequence> {
    let r = rel.order();
    if rel.coeffs[r].is_zero() {
        return Err(Error::LeadingCoefficientZero(
            "forward extension needs d_r != 0".into(),
        ));
    }
    if seed.len() != r {
        return Err(Error::InvalidConfig(format!(
            "seed length {} differs from the order {r}",
            seed.len()
        )));
    }
    let mut terms: Vec<ResidueElement> = Vec::with_capacity(count);
    for s in seed {
        if s.field() != &rel.field {
            return Err(Error::FieldMismatch("seed from a different field".into()));
        }
        terms.push(s.clone());
    }
    let neg_inv = rel.coeffs[r].inv()?.neg();
    while terms.len() < count {
        let n = terms.len() - r;
        let mut acc = rel.field.zero();
        for (s, d) in rel.coeffs.iter().take(r).enumerate() {
            if d.is_zero() {
                continue;
            }
            acc = acc.add(&d.mul(&terms[n + s].frobenius(s as u32))?)?;
        }
        let rhs = neg_inv.mul(&acc)?; // x_{n+r}^{p^r}
        terms.push(rhs.frobenius_inverse(r as u32));
    }
    terms.truncate(count);
    TwistSequence::new(Arc::clone(&rel.field), terms)
}

/// Exhaustive count of the length-`length` sequences satisfying the relation
/// on every window.  Deliberately brute force: this is the oracle the
/// dimension statement is checked against.
pub fn solution_count(rel: &TwistRelation, length: usize) -> Result<u64> {
    let q = rel.field.order();
    let r = rel.order();
    if q > 4 || r > 2 {
        return Err(Error::UnsupportedConfig(
            "exhaustive counting is capped at q <= 4, r <= 2".into(),
        ));
    }
    let total = q.checked_pow(length as u32).filter(|&t| t <= 1 << 24);
    let total = match total {
        Some(t) => t,
        None => {
            return Err(Error::UnsupportedConfig(
                "q^length exceeds the enumeration budget".into(),
            ))
        }
    };
    if length < r + 1 {
        return Err(Error::WindowTooShort(format!(
            "length {length} below order {r} + 1"
        )));
    }
    let mut count = 0u64;
    let mut terms = vec![rel.field.zero(); length];
    for code in 0..total {
        let mut c = code;
        for t in terms.iter_mut() {
            *t = rel.field.enumerate(c % q);
            c /= q;
        }
        let seq = TwistSequence {
            field: Arc::clone(&rel.field),
            terms: terms.clone(),
        };
        if check_relation(&seq, rel)? {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> Arc<ResidueField> {
        // F_4 = F_2[w]/(w^2 + w + 1).
        ResidueField::new(2, 2, &[1, 1, 1]).unwrap()
    }

    #[test]
    fn check_relation_examples() {
        let f3 = ResidueField::prime_field(3).unwrap();
        let zero_seq = TwistSequence::from_signed(&f3, &[&[0], &[0], &[0], &[0]]).unwrap();
        let rel = TwistRelation::from_signed(&f3, &[&[1], &[2]]).unwrap();
        assert!(check_relation(&zero_seq, &rel).unwrap());

        // Constant c with relation (1, -1): c - c^p = 0 by Fermat.
        let const_seq = TwistSequence::from_signed(&f3, &[&[2], &[2], &[2], &[2]]).unwrap();
        let rel = TwistRelation::from_signed(&f3, &[&[1], &[-1]]).unwrap();
        assert!(check_relation(&const_seq, &rel).unwrap());

        // F_4: (w, w^2, w, w^2, ...) satisfies (1, 1).
        let k = f4();
        let w = k.element(&[0, 1]).unwrap();
        let w2 = w.mul(&w).unwrap();
        let seq = TwistSequence::new(
            Arc::clone(&k),
            vec![w.clone(), w2.clone(), w.clone(), w2.clone()],
        )
        .unwrap();
        let rel = TwistRelation::new(Arc::clone(&k), vec![k.one(), k.one()]).unwrap();
        assert!(check_relation(&seq, &rel).unwrap());

        // ...but the constant sequence w does not satisfy (1, 1).
        let bad = TwistSequence::new(Arc::clone(&k), vec![w.clone(), w.clone(), w]).unwrap();
        assert!(!check_relation(&bad, &rel).unwrap());
    }

    #[test]
    fn window_too_short() {
        let f2 = ResidueField::prime_field(2).unwrap();
        let seq = TwistSequence::from_signed(&f2, &[&[1]]).unwrap();
        let rel = TwistRelation::from_signed(&f2, &[&[1], &[1]]).unwrap();
        assert!(matches!(
            check_relation(&seq, &rel),
            Err(Error::WindowTooShort(_))
        ));
    }

    #[test]
    fn find_relation_on_constant_sequence() {
        let f5 = ResidueField::prime_field(5).unwrap();
        let three: &[i64] = &[3];
        let seq = TwistSequence::from_signed(&f5, &[three; 6]).unwrap();
        let rel = find_relation(&seq, 2).unwrap().unwrap();
        assert_eq!(rel.order(), 1);
        // The kernel is the (1, -1) line; the canonical basis vector has its
        // free coordinate set to 1, i.e. (-1, 1).
        assert_eq!(rel.coeffs()[0], rel.coeffs()[1].neg());
        assert_eq!(rel.coeffs()[1], f5.one());
        assert!(check_relation(&seq, &rel).unwrap());
    }

    #[test]
    fn find_relation_on_period_three_pattern() {
        // 1,0,1,1,0,1,1 over F_2 has no order-1 relation; the kernel first
        // appears at order 2 with coefficients (1, 1, 1).
        let f2 = ResidueField::prime_field(2).unwrap();
        let seq =
            TwistSequence::from_signed(&f2, &[&[1], &[0], &[1], &[1], &[0], &[1], &[1]]).unwrap();
        let rel = find_relation(&seq, 3).unwrap().unwrap();
        assert_eq!(rel.order(), 2);
        let one = f2.one();
        assert_eq!(rel.coeffs(), &[one.clone(), one.clone(), one]);
        assert!(check_relation(&seq, &rel).unwrap());
    }

    #[test]
    fn extend_examples() {
        let f3 = ResidueField::prime_field(3).unwrap();
        let rel = TwistRelation::from_signed(&f3, &[&[1], &[-1]]).unwrap();
        let c = f3.element(&[2]).unwrap();
        let seq = extend_sequence(&rel, std::slice::from_ref(&c), 5).unwrap();
        assert!(seq.terms().iter().all(|t| *t == c), "constant continuation");

        // F_4, relation (1, 1), seed w: alternates w, w^2, w, w^2, ...
        let k = f4();
        let w = k.element(&[0, 1]).unwrap();
        let w2 = w.mul(&w).unwrap();
        let rel = TwistRelation::new(Arc::clone(&k), vec![k.one(), k.one()]).unwrap();
        let seq = extend_sequence(&rel, std::slice::from_ref(&w), 6).unwrap();
        assert_eq!(
            seq.terms(),
            &[w.clone(), w2.clone(), w.clone(), w2.clone(), w.clone(), w2]
        );
        assert!(check_relation(&seq, &rel).unwrap());

        // Zero seed stays zero.
        let z = extend_sequence(&rel, &[k.zero()], 4).unwrap();
        assert!(z.terms().iter().all(|t| t.is_zero()));
    }

    #[test]
    fn extend_requires_invertible_top_coefficient() {
        let f2 = ResidueField::prime_field(2).unwrap();
        let rel = TwistRelation::from_signed(&f2, &[&[1], &[0]]).unwrap();
        assert!(matches!(
            extend_sequence(&rel, &[f2.one()], 3),
            Err(Error::LeadingCoefficientZero(_))
        ));
    }

    #[test]
    fn solution_counts() {
        let f2 = ResidueField::prime_field(2).unwrap();
        let rel = TwistRelation::from_signed(&f2, &[&[1], &[1]]).unwrap();
        assert_eq!(solution_count(&rel, 5).unwrap(), 2);

        // Order 0: only the zero sequence.
        let rel0 = TwistRelation::from_signed(&f2, &[&[1]]).unwrap();
        assert_eq!(solution_count(&rel0, 6).unwrap(), 1);

        // d_0 d_r != 0 gives q^r across small fields.
        let f3 = ResidueField::prime_field(3).unwrap();
        let rel = TwistRelation::from_signed(&f3, &[&[2], &[1]]).unwrap();
        assert_eq!(solution_count(&rel, 5).unwrap(), 3);
        let rel = TwistRelation::from_signed(&f3, &[&[1], &[2], &[1]]).unwrap();
        assert_eq!(solution_count(&rel, 6).unwrap(), 9);
        let k = f4();
        let rel = TwistRelation::new(Arc::clone(&k), vec![k.one(), k.one()]).unwrap();
        assert_eq!(solution_count(&rel, 5).unwrap(), 4);
    }

    #[test]
    fn solution_sets_are_prime_field_linear_but_not_k_linear() {
        // Sum of two solutions of (1,1) over F_4 is a solution; the w-scaling
        // of one is not.
        let k = f4();
        let w = k.element(&[0, 1]).unwrap();
        let rel = TwistRelation::new(Arc::clone(&k), vec![k.one(), k.one()]).unwrap();
        let s1 = extend_sequence(&rel, std::slice::from_ref(&w), 6).unwrap();
        let s2 = extend_sequence(&rel, &[k.one()], 6).unwrap();
        let sum_terms: Result<Vec<_>> = s1
            .terms()
            .iter()
            .zip(s2.terms())
            .map(|(a, b)| a.add(b))
            .collect();
        let sum = TwistSequence::new(Arc::clone(&k), sum_terms.unwrap()).unwrap();
        assert!(check_relation(&sum, &rel).unwrap());

        let scaled_terms: Result<Vec<_>> = s1.terms().iter().map(|a| a.mul(&w)).collect();
        let scaled = TwistSequence::new(Arc::clone(&k), scaled_terms.unwrap()).unwrap();
        assert!(
            !check_relation(&scaled, &rel).unwrap(),
            "k-scaling must break the twisted relation over F_4"
        );
    }

    #[test]
    fn shift_frobenius_closure() {
        let f3 = ResidueField::prime_field(3).unwrap();
        let rel = TwistRelation::from_signed(&f3, &[&[1], &[2], &[2]]).unwrap();
        let seed = [f3.element(&[1]).unwrap(), f3.element(&[2]).unwrap()];
        let seq = extend_sequence(&rel, &seed, 8).unwrap();
        assert!(check_relation(&seq, &rel).unwrap());
        let shifted: Vec<_> = seq.terms()[1..].iter().map(|t| t.frobenius(1)).collect();
        let shifted = TwistSequence::new(Arc::clone(&f3), shifted).unwrap();
        assert!(check_relation(&shifted, &rel).unwrap());
    }

    #[test]
    fn round_trip_extend_find_check() {
        let f3 = ResidueField::prime_field(3).unwrap();
        let rel = TwistRelation::from_signed(&f3, &[&[1], &[1], &[2]]).unwrap();
        let seed = [f3.element(&[2]).unwrap(), f3.element(&[1]).unwrap()];
        let seq = extend_sequence(&rel, &seed, 10).unwrap();
        let found = find_relation(&seq, 2).unwrap().unwrap();
        assert!(check_relation(&seq, &found).unwrap());
        assert!(found.order() <= 2);
    }

    #[test]
    fn canonicalize_trims_and_reports_shift() {
        let f2 = ResidueField::prime_field(2).unwrap();
        let rel = TwistRelation::from_signed(&f2, &[&[0], &[1], &[1], &[0]]).unwrap();
        let (canon, shift) = rel.canonicalized();
        assert_eq!(shift, 1);
        assert_eq!(canon.order(), 1);
    }

    #[test]
    fn serialization_round_trip() {
        let k = f4();
        let w = k.element(&[0, 1]).unwrap();
        let rel = TwistRelation::new(Arc::clone(&k), vec![k.one(), w.clone()]).unwrap();
        let rel2 = TwistRelation::from_file(&rel.to_file()).unwrap();
        assert_eq!(rel, rel2);
        let seq = extend_sequence(&rel, &[w], 5).unwrap();
        let seq2 = TwistSequence::from_file(&seq.to_file()).unwrap();
        assert_eq!(seq, seq2);
    }
}
