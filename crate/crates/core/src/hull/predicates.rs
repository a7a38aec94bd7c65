//! Orientation of `D+1` points in `R^D`: sign of the determinant with rows `(p_i, 1)`.
//!
//! A floating-point evaluation is trusted when it clears a forward error bound.
//! Otherwise the determinant is recomputed exactly with big integers, and exact
//! zeros are resolved by simulation of simplicity: coordinate `j` of point `i`
//! is perturbed by `ε^(2^(i·D + j))`.

use num_bigint::BigInt;
use num_traits::{Float, Signed, Zero};

pub(crate) struct Orienter<'a> {
    pts: &'a [Vec<f64>],
    dim: usize,
}

impl<'a> Orienter<'a> {
    pub fn new(pts: &'a [Vec<f64>], dim: usize) -> Self {
        Self { pts, dim }
    }

    /// Sign in {-1, +1} of the homogeneous determinant of the listed points, in order.
    pub fn sign(&self, ids: &[usize]) -> i32 {
        debug_assert_eq!(ids.len(), self.dim + 1);
        if let Some(s) = self.float_sign(ids) {
            return s;
        }
        let exact = self.exact_rows(ids);
        let s = bareiss_sign(exact.clone());
        if s != 0 {
            return s;
        }
        self.sos_sign(ids, &exact)
    }

    /// Determinant of the differences `p_i - p_0`, which equals the homogeneous
    /// determinant times `(-1)^D`; trusted only when it clears the error bound.
    fn float_sign(&self, ids: &[usize]) -> Option<i32> {
        let n = self.dim;
        let p0 = &self.pts[ids[0]];
        let mut m = vec![0.0f64; n * n];
        let mut norm_prod = 1.0f64;
        for (r, &id) in ids[1..].iter().enumerate() {
            let p = &self.pts[id];
            let mut s = 0.0;
            for c in 0..n {
                let v = p[c] - p0[c];
                m[r * n + c] = v;
                s += v * v;
            }
            norm_prod *= s.sqrt();
        }
        let det = lu_det(&mut m, n);
        // elimination error plus the rounding of the differences
        let bound = (4.0 * (n * n) as f64 * (1u64 << n) as f64 + 2.0 * n as f64 + 2.0) * f64::EPSILON * norm_prod;
        if !det.is_finite() || !bound.is_finite() {
            return None;
        }
        let flip = if n.is_multiple_of(2) { 1 } else { -1 };
        if det > bound {
            Some(flip)
        } else if det < -bound {
            Some(-flip)
        } else {
            None
        }
    }

    fn exact_rows(&self, ids: &[usize]) -> Vec<Vec<BigInt>> {
        ids.iter()
            .map(|&id| {
                let mut row: Vec<f64> = self.pts[id][..self.dim].to_vec();
                row.push(1.0);
                integer_row(&row)
            })
            .collect()
    }

    fn sos_sign(&self, ids: &[usize], exact: &[Vec<BigInt>]) -> i32 {
        let n = self.dim + 1;
        // perturbable entries sorted by priority: smaller exponent dominates
        let mut entries: Vec<(usize, usize, usize)> = Vec::with_capacity(n * self.dim);
        for (r, &id) in ids.iter().enumerate() {
            for c in 0..self.dim {
                entries.push((id * self.dim + c, r, c));
            }
        }
        entries.sort_unstable();
        let total = entries.len();
        let limit: u64 = if total >= 63 { u64::MAX } else { 1u64 << total };
        let mut mask: u64 = 1;
        while mask < limit {
            let mut rows_used = 0u64;
            let mut cols_used = 0u64;
            let mut ok = true;
            let mut bits = mask;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let (_, r, c) = entries[j];
                if rows_used & (1 << r) != 0 || cols_used & (1 << c) != 0 {
                    ok = false;
                    break;
                }
                rows_used |= 1 << r;
                cols_used |= 1 << c;
            }
            if ok {
                let mut m: Vec<Vec<BigInt>> = exact.to_vec();
                let mut bits = mask;
                while bits != 0 {
                    let j = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let (_, r, c) = entries[j];
                    let mut row = vec![BigInt::zero(); n];
                    row[c] = BigInt::from(1);
                    m[r] = row;
                }
                let s = bareiss_sign(m);
                if s != 0 {
                    return s;
                }
            }
            mask += 1;
        }
        // unreachable for distinct point ids: the all-unit term is ±1
        1
    }
}

fn lu_det(m: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if m[i * n + k].abs() > m[piv * n + k].abs() {
                piv = i;
            }
        }
        if m[piv * n + k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let p = m[k * n + k];
        det *= p;
        for i in k + 1..n {
            let f = m[i * n + k] / p;
            if f != 0.0 {
                for j in k + 1..n {
                    m[i * n + j] -= f * m[k * n + j];
                }
            }
        }
    }
    det
}

/// Scales a row of doubles by a power of two so every entry is an exact integer.
fn integer_row(row: &[f64]) -> Vec<BigInt> {
    let parts: Vec<(u64, i16, i8)> = row
        .iter()
        .map(|v| {
            let (m, e, s) = v.integer_decode();
            let tz = if m == 0 { 0 } else { m.trailing_zeros() };
            (m >> tz, e + tz as i16, s)
        })
        .collect();
    let emin = parts
        .iter()
        .filter(|p| p.0 != 0)
        .map(|p| p.1)
        .min()
        .unwrap_or(0);
    parts
        .iter()
        .map(|&(m, e, s)| {
            if m == 0 {
                BigInt::zero()
            } else {
                let v = BigInt::from(m) << ((e - emin) as usize);
                if s < 0 {
                    -v
                } else {
                    v
                }
            }
        })
        .collect()
}

fn bareiss_sign(mut m: Vec<Vec<BigInt>>) -> i32 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        let piv = (k..n).find(|&i| !m[i][k].is_zero());
        let Some(piv) = piv else {
            return 0;
        };
        if piv != k {
            m.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let d = &m[n - 1][n - 1];
    if d.is_zero() {
        0
    } else if d.is_positive() {
        sign
    } else {
        -sign
    }
}
