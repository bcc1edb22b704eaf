//! Small dense matrices stored row-major in flat slices.
//!
//! Dimensions here are the hypersurface dimension `n` (or `n + 1`), so
//! everything is a handful of entries and is done by direct elimination.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::abs;
use crate::{Error, Result};

/// Determinant by Gaussian elimination with partial pivoting. `a` is
/// overwritten.
pub fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if abs(a[row * n + col]) > abs(a[piv * n + col]) {
                piv = row;
            }
        }
        let p = a[piv * n + col];
        if p == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        det *= p;
        for row in col + 1..n {
            let factor = a[row * n + col] / p;
            if factor != 0.0 {
                for k in col..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
            }
        }
    }
    det
}

pub fn det(a: &[f64], n: usize) -> f64 {
    let mut work = a.to_vec();
    det_in_place(&mut work, n)
}

/// Gauss–Jordan inverse with partial pivoting into `out`.
pub fn invert_into(a: &[f64], n: usize, out: &mut [f64], work: &mut Vec<f64>) -> Result<()> {
    work.clear();
    work.extend_from_slice(a);
    for (i, v) in out.iter_mut().enumerate() {
        *v = if i / n == i % n { 1.0 } else { 0.0 };
    }
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if abs(work[row * n + col]) > abs(work[piv * n + col]) {
                piv = row;
            }
        }
        let p = work[piv * n + col];
        if p == 0.0 || !p.is_finite() {
            return Err(Error::SingularMetric);
        }
        if piv != col {
            for k in 0..n {
                work.swap(col * n + k, piv * n + k);
                out.swap(col * n + k, piv * n + k);
            }
        }
        let inv_p = 1.0 / p;
        for k in 0..n {
            work[col * n + k] *= inv_p;
            out[col * n + k] *= inv_p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = work[row * n + col];
            if factor != 0.0 {
                for k in 0..n {
                    work[row * n + k] -= factor * work[col * n + k];
                    out[row * n + k] -= factor * out[col * n + k];
                }
            }
        }
    }
    Ok(())
}

pub fn invert(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; n * n];
    let mut work = Vec::with_capacity(n * n);
    invert_into(a, n, &mut out, &mut work)?;
    Ok(out)
}

pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = 1.0;
    }
    out
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, abs(x - y)))
}

/// Inverse of `M + η ηᵀ` given `M⁻¹`, by the Sherman–Morrison formula
/// `M⁻¹ − M⁻¹ηηᵀM⁻¹ / (1 + ηᵀM⁻¹η)`.
pub fn sherman_morrison(m_inv: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    let n = eta.len();
    let mut m_inv_eta = vec![0.0; n];
    // rows of M⁻¹ η and columns of ηᵀ M⁻¹ differ when M⁻¹ is not symmetric
    let mut eta_m_inv = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            m_inv_eta[i] += m_inv[i * n + j] * eta[j];
            eta_m_inv[i] += eta[j] * m_inv[j * n + i];
        }
    }
    let denom = 1.0 + crate::math::dot(eta, &m_inv_eta);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularMetric);
    }
    let mut out = m_inv.to_vec();
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] -= m_inv_eta[i] * eta_m_inv[j] / denom;
        }
    }
    Ok(out)
}

/// Sherman–Morrison for a diagonal `M`, given its diagonal.
pub fn sherman_morrison_diag(m_diag: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    let n = m_diag.len();
    if m_diag.iter().any(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::SingularMetric);
    }
    let w: Vec<f64> = eta.iter().zip(m_diag).map(|(e, d)| e / d).collect();
    let denom = 1.0 + crate::math::dot(eta, &w);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = 1.0 / m_diag[i];
        for j in 0..n {
            out[i * n + j] -= w[i] * w[j] / denom;
        }
    }
    Ok(out)
}

/// Least-squares fit of `y` against the basis columns, by normal equations.
/// Used for slopes and short tail expansions, never for anything ill-posed.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let k = rows.first().map_or(0, Vec::len);
    let mut ata = vec![0.0; k * k];
    let mut aty = vec![0.0; k];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..k {
            aty[i] += row[i] * yi;
            for j in 0..k {
                ata[i * k + j] += row[i] * row[j];
            }
        }
    }
    let inv = invert(&ata, k)?;
    Ok((0..k)
        .map(|i| (0..k).map(|j| inv[i * k + j] * aty[j]).sum())
        .collect())
}

/// Slope of the least-squares line through `(x, y)`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let m = x.len();
    if m < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / m as f64;
    let my = y.iter().sum::<f64>() / m as f64;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    slope.is_finite().then_some(slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_known_matrix() {
        let a = [4.0, 7.0, 2.0, 6.0];
        let inv = invert(&a, 2).unwrap();
        let expected = [0.6, -0.7, -0.2, 0.4];
        assert!(max_abs_diff(&inv, &expected) < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        assert_eq!(invert(&[1.0, 2.0, 2.0, 4.0], 2), Err(Error::SingularMetric));
        assert_eq!(det(&[1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }

    #[test]
    fn determinant_with_pivoting() {
        let a = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 3.0];
        assert!((det(&a, 3) + 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_update_leaves_inverse_unchanged() {
        let d = [1.0, 4.0, 0.25];
        let inv = sherman_morrison_diag(&d, &[0.0; 3]).unwrap();
        let expected = [1.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 4.0];
        assert!(max_abs_diff(&inv, &expected) < 1e-15);
    }

    #[test]
    fn rank_one_update_matches_dense() {
        let m = [2.0, 0.5, 0.0, 0.5, 3.0, 0.1, 0.0, 0.1, 1.5];
        let eta = [0.3, -1.2, 0.7];
        let mut g = m.to_vec();
        for i in 0..3 {
            for j in 0..3 {
                g[i * 3 + j] += eta[i] * eta[j];
            }
        }
        let sm = sherman_morrison(&invert(&m, 3).unwrap(), &eta).unwrap();
        assert!(max_abs_diff(&sm, &invert(&g, 3).unwrap()) < 1e-13);
    }

    #[test]
    fn slope_of_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        assert!((fit_slope(&x, &y).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(fit_slope(&[1.0], &[2.0]), None);
    }

    #[test]
    fn least_squares_recovers_polynomial() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x, x * x]).collect();
        let y: Vec<f64> = xs.iter().map(|&x| 1.5 - 2.0 * x + 0.25 * x * x).collect();
        let c = least_squares(&rows, &y).unwrap();
        assert!((c[0] - 1.5).abs() < 1e-10 && (c[1] + 2.0).abs() < 1e-10);
        assert!((c[2] - 0.25).abs() < 1e-10);
    }
}
