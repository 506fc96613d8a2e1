//! Exact linear algebra over a residue field: reduced row echelon form and
//! kernel bases.  Shared by the recurrence detector and the class-dependence
//! solver; kept deterministic so downstream output is reproducible.

use std::sync::Arc;

use crate::error::Result;
use crate::residue::{ResidueElement, ResidueField};

/// Reduced row echelon form in place; returns the pivot column of each
/// nonzero row, in order.
pub(crate) fn rref(mat: &mut [Vec<ResidueElement>]) -> Result<Vec<usize>> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let pivot_row = (row..rows).find(|&r| !mat[r][col].is_zero());
        let pivot_row = match pivot_row {
            Some(r) => r,
            None => continue,
        };
        mat.swap(row, pivot_row);
        let inv = mat[row][col].inv()?;
        for entry in &mut mat[row][col..] {
            *entry = entry.mul(&inv)?;
        }
        let pivot = mat[row].clone();
        for (r, target) in mat.iter_mut().enumerate() {
            if r == row || target[col].is_zero() {
                continue;
            }
            let factor = target[col].clone();
            for (entry, pv) in target[col..].iter_mut().zip(&pivot[col..]) {
                let t = factor.mul(pv)?;
                *entry = entry.sub(&t)?;
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    Ok(pivots)
}

/// Canonical kernel basis of the matrix (one vector per free column, with a 1
/// in the free column and the pivot columns solved from the RREF).
pub(crate) fn kernel_basis(
    field: &Arc<ResidueField>,
    mut mat: Vec<Vec<ResidueElement>>,
) -> Result<Vec<Vec<ResidueElement>>> {
    let cols = if mat.is_empty() { 0 } else { mat[0].len() };
    let pivots = rref(&mut mat)?;
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; cols];
        for &c in &pivots {
            v[c] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..cols {
        if is_pivot[free] {
            continue;
        }
        let mut vec = vec![field.zero(); cols];
        vec[free] = field.one();
        for (r, &pc) in pivots.iter().enumerate() {
            // Row r reads x_{pc} + sum over later columns = 0.
            vec[pc] = mat[r][free].neg();
        }
        basis.push(vec);
    }
    Ok(basis)
}
