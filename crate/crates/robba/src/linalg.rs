//! Gaussian elimination over Q_p with full pivoting on minimal valuation.

use crate::error::{Error, Result};
use crate::padic::PadicScalar;

pub type Matrix = Vec<Vec<PadicScalar>>;

/// Reduced echelon data: the reduced rows and, per pivot row, its column.
struct Echelon {
    rows: Matrix,
    pivots: Vec<usize>,
}

/// Row-reduces using pivots drawn only from the first `ncols` columns.
fn echelon(mut m: Matrix, ncols: usize) -> Result<Echelon> {
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut used = vec![false; ncols];
    for r in 0..nrows {
        let mut best: Option<(usize, usize, i64)> = None;
        for (i, row) in m.iter().enumerate().skip(r) {
            for (j, x) in row.iter().enumerate().take(ncols) {
                if used[j] {
                    continue;
                }
                if let Some(v) = x.valuation() {
                    if best.is_none_or(|b| v < b.2) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((i, j, _)) = best else { break };
        m.swap(r, i);
        used[j] = true;
        let inv = m[r][j].inv()?;
        for x in m[r].iter_mut() {
            *x = *x * inv;
        }
        let pivot_row = m[r].clone();
        for (i2, row) in m.iter_mut().enumerate() {
            if i2 == r {
                continue;
            }
            let f = row[j];
            if f.is_exact_zero() {
                continue;
            }
            for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                *x = *x - f * *y;
            }
        }
        pivots.push(j);
    }
    Ok(Echelon { rows: m, pivots })
}

pub fn rank(a: &Matrix) -> Result<usize> {
    let n = a.first().map_or(0, |r| r.len());
    Ok(echelon(a.clone(), n)?.pivots.len())
}

/// One solution of `a x = b` (free variables set to zero).
pub fn solve(a: &Matrix, b: &[PadicScalar]) -> Result<Vec<PadicScalar>> {
    if a.len() != b.len() {
        return Err(Error::Mismatch("right-hand side length".into()));
    }
    let n = a.first().map_or(0, |r| r.len());
    let aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, y)| {
            let mut r = row.clone();
            r.push(*y);
            r
        })
        .collect();
    let e = echelon(aug, n)?;
    for row in e.rows.iter().skip(e.pivots.len()) {
        if !row[n].is_zero() {
            return Err(Error::Domain("inconsistent linear system".into()));
        }
    }
    let ctx = b
        .first()
        .or_else(|| a.first().and_then(|r| r.first()))
        .map(|x| x.ctx())
        .ok_or_else(|| Error::Domain("empty system".into()))?;
    let mut x = vec![ctx.zero(); n];
    for (r, &c) in e.pivots.iter().enumerate() {
        x[c] = e.rows[r][n];
    }
    Ok(x)
}

/// Basis of the right kernel of `a`, one vector per free column.
pub fn kernel(a: &Matrix) -> Result<Vec<Vec<PadicScalar>>> {
    let n = a.first().map_or(0, |r| r.len());
    if n == 0 {
        return Ok(Vec::new());
    }
    let ctx = a[0][0].ctx();
    let e = echelon(a.clone(), n)?;
    let mut out = Vec::new();
    for f in 0..n {
        if e.pivots.contains(&f) {
            continue;
        }
        let mut v = vec![ctx.zero(); n];
        v[f] = ctx.one();
        for (r, &c) in e.pivots.iter().enumerate() {
            v[c] = -e.rows[r][f];
        }
        out.push(v);
    }
    Ok(out)
}

pub fn mat_vec(a: &Matrix, x: &[PadicScalar]) -> Vec<PadicScalar> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(x[0].ctx().zero(), |acc, (u, v)| acc + *u * *v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicCtx;

    #[test]
    fn solves_small_system() {
        let k = PadicCtx::new(3, 10).unwrap();
        let a = vec![vec![k.int(3), k.int(1)], vec![k.int(1), k.int(2)]];
        let b = vec![k.int(5), k.int(5)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x, vec![k.int(1), k.int(2)]);
    }

    #[test]
    fn kernel_of_rank_one() {
        let k = PadicCtx::new(5, 8).unwrap();
        let a = vec![
            vec![k.int(1), k.int(2), k.int(3)],
            vec![k.int(2), k.int(4), k.int(6)],
        ];
        assert_eq!(rank(&a).unwrap(), 1);
        let ker = kernel(&a).unwrap();
        assert_eq!(ker.len(), 2);
        for v in &ker {
            for y in mat_vec(&a, v) {
                assert!(y.is_zero());
            }
        }
    }
}
