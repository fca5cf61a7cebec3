//! Tiny dense kernels for the `k x k` systems that show up per candidate set.

/// In-place Cholesky of a row-major `k x k` SPD matrix; lower factor is
/// left in the lower triangle. Returns `false` if a pivot is not safely
/// positive.
pub(crate) fn cholesky(g: &mut [f64], k: usize) -> bool {
    let scale = (0..k).map(|i| g[i * k + i].abs()).fold(0.0, f64::max);
    let tol = scale * 1e-12;
    for j in 0..k {
        let mut d = g[j * k + j];
        for p in 0..j {
            d -= g[j * k + p] * g[j * k + p];
        }
        if !(d > tol) {
            return false;
        }
        let d = d.sqrt();
        g[j * k + j] = d;
        for i in j + 1..k {
            let mut s = g[i * k + j];
            for p in 0..j {
                s -= g[i * k + p] * g[j * k + p];
            }
            g[i * k + j] = s / d;
        }
    }
    true
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky`].
pub(crate) fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * k + p] * b[p];
        }
        b[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for p in i + 1..k {
            s -= l[p * k + i] * b[p];
        }
        b[i] = s / l[i * k + i];
    }
}

/// Diagonal of `G^{-1}` from the Cholesky factor of `G`.
pub(crate) fn inverse_diagonal(l: &[f64], k: usize, out: &mut [f64]) {
    let mut e = vec![0.0; k];
    for i in 0..k {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[i] = 1.0;
        cholesky_solve(l, k, &mut e);
        out[i] = e[i];
    }
}

/// Least squares `min ||y - C v||` by modified Gram-Schmidt over the given
/// columns. Returns `(v, residual vector)`, or `None` when a column is
/// numerically dependent on the previous ones.
pub(crate) fn least_squares(cols: &[&[f64]], y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = cols.len();
    let n = y.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut r = vec![0.0; k * k];
    for (j, col) in cols.iter().enumerate() {
        let mut v = col.to_vec();
        let orig = norm(&v);
        for (i, qi) in q.iter().enumerate() {
            let proj = dot(qi, &v);
            r[i * k + j] = proj;
            for (vv, qq) in v.iter_mut().zip(qi) {
                *vv -= proj * qq;
            }
        }
        let nv = norm(&v);
        if !(nv > 1e-10 * orig.max(f64::MIN_POSITIVE)) {
            return None;
        }
        r[j * k + j] = nv;
        v.iter_mut().for_each(|x| *x /= nv);
        q.push(v);
    }
    let mut res = y.to_vec();
    let mut qty = vec![0.0; k];
    for (i, qi) in q.iter().enumerate() {
        qty[i] = dot(qi, &res);
        for (rr, qq) in res.iter_mut().zip(qi) {
            *rr -= qty[i] * qq;
        }
    }
    let mut v = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for p in i + 1..k {
            s -= r[i * k + p] * v[p];
        }
        v[i] = s / r[i * k + i];
    }
    debug_assert_eq!(res.len(), n);
    Some((v, res))
}

/// `||y - P y||^2` where `P` projects onto the span of `cols`; columns that
/// are numerically dependent on earlier ones are skipped.
pub(crate) fn projection_residual_sq(cols: &[&[f64]], y: &[f64]) -> f64 {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for col in cols {
        let mut v = col.to_vec();
        let orig = norm(&v);
        for qi in &q {
            let proj = dot(qi, &v);
            for (vv, qq) in v.iter_mut().zip(qi) {
                *vv -= proj * qq;
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * orig && nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
            q.push(v);
        }
    }
    let mut res = y.to_vec();
    for qi in &q {
        let c = dot(qi, &res);
        for (rr, qq) in res.iter_mut().zip(qi) {
            *rr -= c * qq;
        }
    }
    dot(&res, &res)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `C(m, k)` as a float (exact for the sizes that pass a work cap).
pub fn binomial(m: usize, k: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    let k = k.min(m - k);
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}
