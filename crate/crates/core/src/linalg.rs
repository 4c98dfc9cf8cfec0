//! Small exact linear algebra over the rationals.

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

pub type Matrix = Vec<Vec<Q>>;

/// `x^T A x`.
pub fn quadratic_form(a: &Matrix, x: &[Q]) -> Q {
    let mut acc = Q::zero();
    for (i, row) in a.iter().enumerate() {
        if x[i].is_zero() {
            continue;
        }
        let mut r = Q::zero();
        for (j, aij) in row.iter().enumerate() {
            if !x[j].is_zero() {
                r += aij * &x[j];
            }
        }
        acc += &x[i] * r;
    }
    acc
}

/// Decides positive semidefiniteness of a symmetric rational matrix.
///
/// Returns `None` when `A` is PSD, otherwise a vector `x` with
/// `x^T A x < 0`. Works by symmetric Gaussian elimination on positive
/// pivots; a zero pivot with a nonzero off-diagonal entry, or a negative
/// diagonal entry, yields the certificate directly.
pub fn psd_certificate(a: &Matrix) -> Option<Vec<Q>> {
    let n = a.len();
    let active: Vec<usize> = (0..n).collect();
    let x = certificate(a.clone(), active)?;
    let mut full = vec![Q::zero(); n];
    for (i, v) in x {
        full[i] = v;
    }
    debug_assert!(quadratic_form(a, &full).is_negative());
    Some(full)
}

pub fn is_psd(a: &Matrix) -> bool {
    psd_certificate(a).is_none()
}

// `m` is indexed by original indices; `active` lists the live ones.
fn certificate(mut m: Matrix, mut active: Vec<usize>) -> Option<Vec<(usize, Q)>> {
    // eliminated pivots, innermost last: (index, pivot value, row snapshot)
    let mut pivots: Vec<(usize, Q, Vec<(usize, Q)>)> = Vec::new();
    let found: Vec<(usize, Q)> = loop {
        if active.is_empty() {
            return None;
        }
        if let Some(&i) = active.iter().find(|&&i| m[i][i].is_negative()) {
            break vec![(i, Q::one())];
        }
        let mut zero_pivot_witness = None;
        for &i in &active {
            if m[i][i].is_zero() {
                if let Some(&j) = active.iter().find(|&&j| j != i && !m[i][j].is_zero()) {
                    zero_pivot_witness = Some((i, j));
                    break;
                }
            }
        }
        if let Some((i, j)) = zero_pivot_witness {
            // (t e_i + e_j)^T M (t e_i + e_j) = 2 t m_ij + m_jj = -1
            let t = -(&m[j][j] + Q::one()) / (Q::from_integer(2.into()) * &m[i][j]);
            break vec![(i, t), (j, Q::one())];
        }
        // drop zero rows, then eliminate the largest positive pivot
        active.retain(|&i| !m[i][i].is_zero());
        let &p = active.iter().max_by(|&&x, &&y| m[x][x].cmp(&m[y][y]))?;
        active.retain(|&i| i != p);
        let row: Vec<(usize, Q)> = active.iter().map(|&j| (j, m[p][j].clone())).collect();
        let piv = m[p][p].clone();
        for &(i, ref mi) in &row {
            if mi.is_zero() {
                continue;
            }
            let f = mi / &piv;
            for &(j, ref mj) in &row {
                if !mj.is_zero() {
                    let upd = &f * mj;
                    m[i][j] -= upd;
                }
            }
        }
        pivots.push((p, piv, row));
    };
    // lift the certificate back through the eliminated pivots
    let mut x: std::collections::BTreeMap<usize, Q> = found.into_iter().collect();
    while let Some((p, piv, row)) = pivots.pop() {
        let mut s = Q::zero();
        for (j, mpj) in &row {
            if let Some(xj) = x.get(j) {
                s += mpj * xj;
            }
        }
        x.insert(p, -s / piv);
    }
    Some(x.into_iter().collect())
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn determinant(a: &Matrix) -> Q {
    let n = a.len();
    let mut m = a.clone();
    let mut det = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Q::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..n {
                let upd = &f * &m[col][c];
                m[r][c] -= upd;
            }
        }
    }
    det
}
