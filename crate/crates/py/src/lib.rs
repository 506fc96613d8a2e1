//! Python bindings for the Kummer-tower arithmetic library.
//!
//! The main value types — tower configurations, tower elements, invariant
//! classes, witness polynomials, index sets — come across as Python classes;
//! exact rationals and valuations cross the boundary as their canonical
//! display strings ("a/b", "+inf", ">= a/b") so that no precision is lost to
//! floats.  Residue-field data uses plain coordinate lists, matching the
//! file formats of the command-line tool.

// pyo3 0.22's #[pymethods]/#[pyfunction] expansions wrap every returned
// PyResult in an extra error conversion, which clippy reports against the
// annotated functions; the handwritten code performs no such conversions.
#![allow(clippy::useless_conversion)]

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use axtower::cohomology;
use axtower::error::Error;
use axtower::residue::{ResidueElement, ResidueField};
use axtower::tower;
use axtower::twistrec::{self, TwistRelation, TwistSequence};
use axtower::valuation::{format_rat, Valuation};
use axtower::{apf, ax, oracle};

fn domain(err: Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn field_of(p: u64, f: usize, modulus: Option<Vec<u64>>) -> PyResult<Arc<ResidueField>> {
    match modulus {
        Some(m) => ResidueField::new(p, f, &m).map_err(domain),
        None if f == 1 => ResidueField::prime_field(p).map_err(domain),
        None => Err(PyValueError::new_err(
            "a residue field with f > 1 needs an explicit modulus",
        )),
    }
}

fn sequence_of(field: &Arc<ResidueField>, terms: Vec<Vec<i64>>) -> PyResult<TwistSequence> {
    let refs: Vec<&[i64]> = terms.iter().map(Vec::as_slice).collect();
    TwistSequence::from_signed(field, &refs).map_err(domain)
}

fn relation_of(field: &Arc<ResidueField>, coeffs: Vec<Vec<i64>>) -> PyResult<TwistRelation> {
    let refs: Vec<&[i64]> = coeffs.iter().map(Vec::as_slice).collect();
    TwistRelation::from_signed(field, &refs).map_err(domain)
}

fn coords_out(elements: &[ResidueElement]) -> Vec<Vec<u64>> {
    elements.iter().map(|e| e.coords().to_vec()).collect()
}

/// A Kummer tower over Q_p (or its unramified extension with residue field
/// F_{p^f}), totally ramified of degree e below, carrying the certified
/// working precision.
#[pyclass(name = "TowerConfig", frozen)]
struct PyTowerConfig {
    inner: Arc<tower::TowerConfig>,
}

#[pymethods]
impl PyTowerConfig {
    #[new]
    #[pyo3(signature = (p, e = 1, precision = 24, f = 1, modulus = None))]
    fn new(p: u64, e: u32, precision: u32, f: usize, modulus: Option<Vec<u64>>) -> PyResult<Self> {
        let field = field_of(p, f, modulus)?;
        let inner = tower::TowerConfig::totally_ramified(field, e, precision).map_err(domain)?;
        Ok(PyTowerConfig { inner })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn e(&self) -> u32 {
        self.inner.e()
    }

    #[getter]
    fn f(&self) -> usize {
        self.inner.field().f()
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.inner.precision()
    }

    fn zero(&self, level: u32) -> PyResult<PyElement> {
        tower::TowerElement::zero(&self.inner, level)
            .map(PyElement::of)
            .map_err(domain)
    }

    fn one(&self, level: u32) -> PyResult<PyElement> {
        tower::TowerElement::one(&self.inner, level)
            .map(PyElement::of)
            .map_err(domain)
    }

    /// pi_level, the canonical uniformizer at the given tower level.
    fn uniformizer(&self, level: u32) -> PyResult<PyElement> {
        tower::TowerElement::uniformizer(&self.inner, level)
            .map(PyElement::of)
            .map_err(domain)
    }

    /// eta_m = pi_level^{-p^{level-m}}, the m-th negative digit carrier.
    fn eta(&self, level: u32, m: u32) -> PyResult<PyElement> {
        tower::TowerElement::eta(&self.inner, level, m)
            .map(PyElement::of)
            .map_err(domain)
    }

    /// The canonical image of an integer at the given level.
    #[pyo3(name = "from_int")]
    fn integer(&self, level: u32, n: i64) -> PyResult<PyElement> {
        tower::TowerElement::from_i64(&self.inner, level, n)
            .map(PyElement::of)
            .map_err(domain)
    }

    /// [digit] * pi_level^index with a Teichmueller-lifted residue digit.
    fn teich_monomial(&self, level: u32, index: i64, digit: Vec<i64>) -> PyResult<PyElement> {
        let d = self.inner.field().element_signed(&digit).map_err(domain)?;
        tower::TowerElement::teich_monomial(&self.inner, level, index, &d)
            .map(PyElement::of)
            .map_err(domain)
    }

    fn __repr__(&self) -> String {
        format!(
            "TowerConfig(p={}, e={}, f={}, precision={})",
            self.inner.p(),
            self.inner.e(),
            self.inner.field().f(),
            self.inner.precision()
        )
    }
}

/// An exact element of the truncated tower ring at some level.
#[pyclass(name = "Element", frozen)]
#[derive(Clone)]
struct PyElement {
    inner: tower::TowerElement,
}

impl PyElement {
    fn of(inner: tower::TowerElement) -> PyElement {
        PyElement { inner }
    }
}

#[pymethods]
impl PyElement {
    #[getter]
    fn level(&self) -> u32 {
        self.inner.level()
    }

    fn valuation(&self) -> String {
        self.inner.valuation().to_string()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero_repr()
    }

    fn add(&self, other: &PyElement) -> PyResult<PyElement> {
        self.inner
            .add(&other.inner)
            .map(PyElement::of)
            .map_err(domain)
    }

    fn sub(&self, other: &PyElement) -> PyResult<PyElement> {
        self.inner
            .sub(&other.inner)
            .map(PyElement::of)
            .map_err(domain)
    }

    fn neg(&self) -> PyElement {
        PyElement::of(self.inner.neg())
    }

    fn pow(&self, k: u64) -> PyResult<PyElement> {
        self.inner.pow(k).map(PyElement::of).map_err(domain)
    }

    /// Multiplication by pi_0^k (k may be negative).
    fn mul_uniformizer_pow(&self, k: i64) -> PyResult<PyElement> {
        self.inner
            .mul_uniformizer_pow(k)
            .map(PyElement::of)
            .map_err(domain)
    }

    /// Re-express the element at a higher tower level.
    fn embed(&self, level: u32) -> PyResult<PyElement> {
        self.inner.embed(level).map(PyElement::of).map_err(domain)
    }

    /// Teichmueller digits with index in [lo, hi), as {index: coords}.
    fn teichmuller_digits(&self, lo: i64, hi: i64) -> PyResult<BTreeMap<i64, Vec<u64>>> {
        let digits = self.inner.teichmuller_digits(lo, hi).map_err(domain)?;
        Ok(digits
            .into_iter()
            .map(|(i, d)| (i, d.coords().to_vec()))
            .collect())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __add__(&self, other: &PyElement) -> PyResult<PyElement> {
        self.add(other)
    }

    fn __sub__(&self, other: &PyElement) -> PyResult<PyElement> {
        self.sub(other)
    }

    fn __neg__(&self) -> PyElement {
        self.neg()
    }

    fn __repr__(&self) -> String {
        format!(
            "Element(level={}, valuation={})",
            self.inner.level(),
            self.inner.valuation()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (text, precision = None))]
fn element_from_json(text: &str, precision: Option<u32>) -> PyResult<PyElement> {
    tower::TowerElement::from_json(text, precision)
        .map(PyElement::of)
        .map_err(domain)
}

// ---- oscillation ----

/// Galois oscillation Lambda(x) = inf_sigma v(sigma x - x), as a valuation
/// string.
#[pyfunction]
fn oscillation(x: &PyElement) -> PyResult<String> {
    ax::galois_oscillation(&x.inner)
        .map(|r| r.oscillation.to_string())
        .map_err(domain)
}

#[pyfunction]
fn best_approximant(x: &PyElement, m: u32) -> PyResult<PyElement> {
    ax::best_approximant(&x.inner, m)
        .map(PyElement::of)
        .map_err(domain)
}

/// v(x - best_approximant(x, m)).
#[pyfunction]
fn approximation_defect(x: &PyElement, m: u32) -> PyResult<String> {
    ax::approximation_defect(&x.inner, m)
        .map(|v| v.to_string())
        .map_err(domain)
}

/// Both sides of the oscillation identity:
/// (oscillation, min over m of defect + 1/(p^m(p-1)), holds).
#[pyfunction]
fn oscillation_identity(x: &PyElement) -> PyResult<(String, String, bool)> {
    let report = ax::oscillation_identity(&x.inner).map_err(domain)?;
    Ok((
        report.oscillation.to_string(),
        report.defect_side.to_string(),
        report.holds,
    ))
}

/// The oscillation recomputed by brute force over the explicit conjugates.
#[pyfunction]
fn oracle_oscillation(x: &PyElement) -> PyResult<String> {
    oracle::cyclotomic_oracle_oscillation(&x.inner)
        .map(|v| v.to_string())
        .map_err(domain)
}

/// (1/(p^m(p-1)), p/(p-1)^2): the optimal constant and the classical one.
#[pyfunction]
#[pyo3(signature = (p, m = 0))]
fn ax_constants(p: u64, m: u32) -> (String, String) {
    let (optimal, classical) = ax::ax_constants(p, m);
    (format_rat(&optimal), format_rat(&classical))
}

// ---- ramification numerics ----

/// (different, stated expression, agree) for the level-n extension.
#[pyfunction]
fn different_valuation(n: u32, p: u64, e: u32) -> PyResult<(String, String, bool)> {
    let cmp = apf::different_valuation(n, p, e).map_err(domain)?;
    Ok((
        format_rat(&cmp.derivative),
        format_rat(&cmp.stated),
        cmp.agree,
    ))
}

/// (integral, agrees with the different, stated system agrees too).
#[pyfunction]
fn herbrand_integral(n: u32, p: u64, e: u32) -> PyResult<(String, bool, bool)> {
    let report = apf::herbrand_integral_check(n, p, e).map_err(domain)?;
    Ok((
        format_rat(&report.integral),
        report.agrees,
        report.stated_agrees,
    ))
}

// ---- twisted recurrences ----

/// Whether every window of the sequence satisfies d_0 x_n + d_1 x_{n+1}^p +
/// ... + d_r x_{n+r}^{p^r} = 0.
#[pyfunction]
#[pyo3(signature = (p, coeffs, terms, f = 1, modulus = None))]
fn twist_check(
    p: u64,
    coeffs: Vec<Vec<i64>>,
    terms: Vec<Vec<i64>>,
    f: usize,
    modulus: Option<Vec<u64>>,
) -> PyResult<bool> {
    let field = field_of(p, f, modulus)?;
    let rel = relation_of(&field, coeffs)?;
    let seq = sequence_of(&field, terms)?;
    twistrec::check_relation(&seq, &rel).map_err(domain)
}

/// Smallest-order relation satisfied by the sequence (coefficient coordinate
/// lists), or None.
#[pyfunction]
#[pyo3(signature = (p, terms, r_max = None, f = 1, modulus = None))]
fn twist_find(
    p: u64,
    terms: Vec<Vec<i64>>,
    r_max: Option<usize>,
    f: usize,
    modulus: Option<Vec<u64>>,
) -> PyResult<Option<Vec<Vec<u64>>>> {
    let field = field_of(p, f, modulus)?;
    let seq = sequence_of(&field, terms)?;
    let r_max = r_max.unwrap_or(seq.len() / 2);
    Ok(twistrec::find_relation(&seq, r_max)
        .map_err(domain)?
        .map(|rel| coords_out(rel.coeffs())))
}

/// Forward extension of a seed to `count` terms.
#[pyfunction]
#[pyo3(signature = (p, coeffs, seed, count, f = 1, modulus = None))]
fn twist_extend(
    p: u64,
    coeffs: Vec<Vec<i64>>,
    seed: Vec<Vec<i64>>,
    count: usize,
    f: usize,
    modulus: Option<Vec<u64>>,
) -> PyResult<Vec<Vec<u64>>> {
    let field = field_of(p, f, modulus)?;
    let rel = relation_of(&field, coeffs)?;
    let seed = sequence_of(&field, seed)?;
    let seq = twistrec::extend_sequence(&rel, seed.terms(), count).map_err(domain)?;
    Ok(coords_out(seq.terms()))
}

/// Exhaustive count of length-`length` solutions of the relation.
#[pyfunction]
#[pyo3(signature = (p, coeffs, length, f = 1, modulus = None))]
fn twist_count(
    p: u64,
    coeffs: Vec<Vec<i64>>,
    length: usize,
    f: usize,
    modulus: Option<Vec<u64>>,
) -> PyResult<u64> {
    let field = field_of(p, f, modulus)?;
    let rel = relation_of(&field, coeffs)?;
    twistrec::solution_count(&rel, length).map_err(domain)
}

// ---- cohomology ----

/// A cocycle-certificate wrapper: the normalized representative with its
/// oscillation and valuation checks.
#[pyclass(name = "InvariantClass", frozen)]
struct PyInvariantClass {
    inner: cohomology::InvariantClass,
}

#[pymethods]
impl PyInvariantClass {
    #[getter]
    fn validated(&self) -> bool {
        self.inner.is_validated()
    }

    #[getter]
    fn oscillation(&self) -> String {
        self.inner.oscillation().to_string()
    }

    #[getter]
    fn valuation(&self) -> String {
        self.inner.valuation().to_string()
    }

    /// The normalized representative (the input minus its best approximant).
    fn rep(&self) -> PyElement {
        PyElement::of(self.inner.rep().clone())
    }

    /// Order of the class under multiplication by the base uniformizer.
    fn torsion(&self) -> PyResult<u32> {
        cohomology::torsion_check(&self.inner).map_err(domain)
    }

    /// The digit stream x_1..x_count (e = 1), as coordinate lists.
    fn psi(&self, count: usize) -> PyResult<Vec<Vec<u64>>> {
        cohomology::psi_digits(&self.inner, count)
            .map(|d| coords_out(&d))
            .map_err(domain)
    }

    /// One digit stream per eta-power row, for e <= p - 1.
    fn psi_table(&self, count: usize) -> PyResult<Vec<Vec<Vec<u64>>>> {
        let rows = cohomology::psi_digit_table(&self.inner, count).map_err(domain)?;
        Ok(rows.iter().map(|row| coords_out(row)).collect())
    }

    /// Valuations along the xi-tower sequence xi_0, ..., xi_{s_max}.
    fn xi_valuations(&self, s_max: usize) -> PyResult<Vec<String>> {
        let xis = cohomology::xi_tower_sequence(&self.inner, s_max).map_err(domain)?;
        Ok(xis.iter().map(|x| x.valuation().to_string()).collect())
    }

    /// Coefficients of a linear dependence among xi_0..xi_{s_max} over the
    /// base field, reduced mod p — the twist relation of the digit stream.
    #[pyo3(signature = (s_max = None))]
    fn dependence(&self, s_max: Option<usize>) -> PyResult<Vec<Vec<u64>>> {
        let s_max = s_max.unwrap_or_else(|| self.inner.level().saturating_sub(1) as usize);
        let xis = cohomology::xi_tower_sequence(&self.inner, s_max).map_err(domain)?;
        let rel = cohomology::find_K_linear_dependence(&xis).map_err(domain)?;
        Ok(coords_out(rel.coeffs()))
    }

    /// Canonical slot decomposition {(i, gamma): valuation of beta}.
    fn support(&self) -> PyResult<Vec<((u32, u32), String)>> {
        let support = cohomology::ramified_support(&self.inner).map_err(domain)?;
        Ok(support
            .iter()
            .map(|(&slot, beta)| (slot, beta.valuation().to_string()))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "InvariantClass(validated={}, oscillation={}, valuation={})",
            self.inner.is_validated(),
            self.inner.oscillation(),
            self.inner.valuation()
        )
    }
}

/// Normalize an element and check the invariant-class conditions
/// (oscillation >= 0 and valuation >= -1/(p-1)).
#[pyfunction]
fn validate_invariant(x: &PyElement) -> PyResult<PyInvariantClass> {
    cohomology::validate_invariant(&x.inner)
        .map(|inner| PyInvariantClass { inner })
        .map_err(domain)
}

/// The additive polynomial c + delta_0 X + delta_1 X^p + ... attached to a
/// twist relation, whose stage-n approximate roots realize the digit stream.
#[pyclass(name = "WitnessPolynomial", frozen)]
struct PyWitnessPolynomial {
    inner: cohomology::AdditiveWitnessPolynomial,
}

#[pymethods]
impl PyWitnessPolynomial {
    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn digits(&self) -> Vec<Vec<u64>> {
        coords_out(self.inner.digits().terms())
    }

    fn constant(&self) -> PyElement {
        PyElement::of(self.inner.constant().clone())
    }

    /// xi_n = sum [x_i] eta_i, the stage-n approximate root.
    fn approximate_root(&self, n: u32) -> PyResult<PyElement> {
        self.inner
            .approximate_root(n)
            .map(PyElement::of)
            .map_err(domain)
    }

    /// v(P(xi_n)); the contract is >= -1/p^{n+1}, nondecreasing in n.
    fn defect(&self, n: u32) -> PyResult<String> {
        cohomology::approximate_root_defect(&self.inner, n)
            .map(|v| v.to_string())
            .map_err(domain)
    }

    /// Coefficient valuations of the stage-n refinement polynomial, as
    /// (degree, valuation) pairs.
    fn stage_valuations(&self, n: u32) -> PyResult<Vec<(usize, String)>> {
        let points = cohomology::stage_coefficient_valuations(&self.inner, n).map_err(domain)?;
        Ok(points.iter().map(|(&j, v)| (j, v.to_string())).collect())
    }

    fn __repr__(&self) -> String {
        format!("WitnessPolynomial(order={})", self.inner.order())
    }
}

/// Build the witness polynomial of a relation from a digit prefix (e = 1).
#[pyfunction]
#[pyo3(signature = (p, coeffs, prefix, precision = 24, f = 1, modulus = None))]
fn witness_polynomial(
    p: u64,
    coeffs: Vec<Vec<i64>>,
    prefix: Vec<Vec<i64>>,
    precision: u32,
    f: usize,
    modulus: Option<Vec<u64>>,
) -> PyResult<PyWitnessPolynomial> {
    let field = field_of(p, f, modulus)?;
    let rel = relation_of(&field, coeffs)?;
    let seed = sequence_of(&field, prefix)?;
    let config = tower::TowerConfig::unramified(field, precision).map_err(domain)?;
    cohomology::build_witness_polynomial(&config, &rel, seed.terms())
        .map(|inner| PyWitnessPolynomial { inner })
        .map_err(domain)
}

/// Segments as (slope, length) pairs, plus the two root certificates.
type NewtonSummary = (Vec<(String, i64)>, bool, bool);

/// Lower convex hull of (degree, valuation) points: returns
/// (segments as (slope, length) pairs, has positive-valuation root,
/// has nonnegative-valuation root).  Valuations parse as "a/b", "+inf",
/// or ">= a/b".
#[pyfunction]
fn newton_polygon(points: Vec<(usize, String)>) -> PyResult<NewtonSummary> {
    let mut map = BTreeMap::new();
    for (degree, text) in &points {
        let val = Valuation::parse(text)
            .ok_or_else(|| PyValueError::new_err(format!("bad valuation {text:?}")))?;
        if map.insert(*degree, val).is_some() {
            return Err(PyValueError::new_err(format!(
                "degree {degree} given twice"
            )));
        }
    }
    let polygon = cohomology::newton_polygon(&map).map_err(domain)?;
    let segments = polygon
        .segments()
        .iter()
        .map(|(slope, len)| (format_rat(slope), *len))
        .collect();
    Ok((
        segments,
        polygon.has_positive_valuation_root(),
        polygon.has_nonnegative_valuation_root(),
    ))
}

/// Index combinatorics (tau, rho, I, I_r) for a ramification datum (p, e, r).
#[pyclass(name = "IndexSet", frozen)]
struct PyIndexSet {
    inner: cohomology::IndexSet,
}

#[pymethods]
impl PyIndexSet {
    #[getter]
    fn tau(&self) -> u32 {
        self.inner.tau()
    }

    #[getter]
    fn rho(&self) -> u32 {
        self.inner.rho()
    }

    #[getter]
    fn pairs(&self) -> Vec<(u32, u32)> {
        self.inner.pairs().to_vec()
    }

    #[getter]
    fn restricted(&self) -> Vec<(u32, u32)> {
        self.inner.restricted().to_vec()
    }

    /// The sharp generator bound pe/(r(p-1)^2), as a rational string.
    #[getter]
    fn bound(&self) -> String {
        format_rat(&self.inner.bound())
    }

    /// Whether |I_r| actually stays within the sharp bound (it does not on
    /// the whole desk grid; see the library documentation).
    #[getter]
    fn bound_holds(&self) -> bool {
        self.inner.bound_holds()
    }

    fn __repr__(&self) -> String {
        format!(
            "IndexSet(tau={}, rho={}, |I_r|={})",
            self.inner.tau(),
            self.inner.rho(),
            self.inner.restricted().len()
        )
    }
}

#[pyfunction]
fn index_sets(p: u64, e: u32, r: u32) -> PyResult<PyIndexSet> {
    cohomology::index_sets(p, e, r)
        .map(|inner| PyIndexSet { inner })
        .map_err(domain)
}

#[pymodule]
fn axtower_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTowerConfig>()?;
    m.add_class::<PyElement>()?;
    m.add_class::<PyInvariantClass>()?;
    m.add_class::<PyWitnessPolynomial>()?;
    m.add_class::<PyIndexSet>()?;
    m.add_function(wrap_pyfunction!(element_from_json, m)?)?;
    m.add_function(wrap_pyfunction!(oscillation, m)?)?;
    m.add_function(wrap_pyfunction!(best_approximant, m)?)?;
    m.add_function(wrap_pyfunction!(approximation_defect, m)?)?;
    m.add_function(wrap_pyfunction!(oscillation_identity, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_oscillation, m)?)?;
    m.add_function(wrap_pyfunction!(ax_constants, m)?)?;
    m.add_function(wrap_pyfunction!(different_valuation, m)?)?;
    m.add_function(wrap_pyfunction!(herbrand_integral, m)?)?;
    m.add_function(wrap_pyfunction!(twist_check, m)?)?;
    m.add_function(wrap_pyfunction!(twist_find, m)?)?;
    m.add_function(wrap_pyfunction!(twist_extend, m)?)?;
    m.add_function(wrap_pyfunction!(twist_count, m)?)?;
    m.add_function(wrap_pyfunction!(validate_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(witness_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(newton_polygon, m)?)?;
    m.add_function(wrap_pyfunction!(index_sets, m)?)?;
    Ok(())
}
