//! Small dense complex linear algebra: SVD nullspace of tall systems and
//! closed-form 2×2 eigenproblems.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::rf::matrix::{Complex, ComplexMatrix2};

/// Right singular vector of the smallest singular value of an `m × 4`
/// system, together with all four singular values in descending order.
#[derive(Debug, Clone)]
pub struct Nullspace {
    pub vector: [Complex; 4],
    pub singular_values: [f64; 4],
}

impl Nullspace {
    /// `s3 / s1`: how far the system is from having a second null direction.
    pub fn rank_margin(&self) -> f64 {
        let s = &self.singular_values;
        if s[0] > 0.0 {
            s[2] / s[0]
        } else {
            0.0
        }
    }

    /// `s4 / s3`: zero when the rows are exactly consistent.
    pub fn quality(&self) -> f64 {
        let s = &self.singular_values;
        if s[2] > 0.0 {
            s[3] / s[2]
        } else {
            f64::INFINITY
        }
    }
}

/// Computes the smallest right singular vector of `rows`. Systems with fewer
/// than four rows are padded with zero rows, which leaves the right singular
/// subspace unchanged.
pub fn nullspace4(rows: &[[Complex; 4]]) -> Result<Nullspace> {
    if rows.is_empty() {
        return Err(Error::Precondition("empty linear system".into()));
    }
    let m = rows.len().max(4);
    let mut g = DMatrix::<Complex>::zeros(m, 4);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            g[(i, j)] = *v;
        }
    }
    if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Precondition("non-finite entries in linear system".into()));
    }
    let svd = g.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Precondition("SVD did not produce right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut singular_values = [0.0; 4];
    for (k, &i) in order.iter().enumerate() {
        singular_values[k] = svd.singular_values[i];
    }
    let last = order[3];
    // rows of v_t are v_iᴴ
    let vector = [
        v_t[(last, 0)].conj(),
        v_t[(last, 1)].conj(),
        v_t[(last, 2)].conj(),
        v_t[(last, 3)].conj(),
    ];
    Ok(Nullspace {
        vector,
        singular_values,
    })
}

/// The two eigenvalues of a 2×2 matrix, via the stable quadratic formula.
pub fn eigenvalues2(m: &ComplexMatrix2) -> (Complex, Complex) {
    let half_tr = m.trace() * 0.5;
    let det = m.det();
    let disc = (half_tr * half_tr - det).sqrt();
    let big = if (half_tr + disc).norm() >= (half_tr - disc).norm() {
        half_tr + disc
    } else {
        half_tr - disc
    };
    if big.norm() == 0.0 {
        return (big, big);
    }
    (big, det / big)
}

/// Eigenvector of `m` for eigenvalue `lambda`, scaled so its second
/// component is 1; returns the first component.
pub fn eigvec_ratio(m: &ComplexMatrix2, lambda: Complex) -> Option<Complex> {
    // Rows of (m - λI) annihilate the eigenvector; use the larger row.
    let r1 = (m.e11 - lambda, m.e12);
    let r2 = (m.e21, m.e22 - lambda);
    let n1 = r1.0.norm_sqr() + r1.1.norm_sqr();
    let n2 = r2.0.norm_sqr() + r2.1.norm_sqr();
    // row (p, q): p x + q y = 0 → x/y = -q/p
    let (p, q) = if n1 >= n2 { r1 } else { r2 };
    let scale = n1.max(n2).sqrt();
    if p.norm() <= 1e-14 * scale {
        return None;
    }
    Some(-q / p)
}
