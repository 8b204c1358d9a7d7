//! Dense rank and null-space helpers on top of nalgebra's SVD.

use nalgebra::DMatrix;

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Scales every nonzero column to unit Euclidean norm.
pub fn normalize_columns(a: &mut DMatrix<f64>) {
    for mut c in a.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= n;
        }
    }
}

fn padded(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.nrows() >= a.ncols() {
        a.clone()
    } else {
        let mut p = DMatrix::zeros(a.ncols(), a.ncols());
        p.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
        p
    }
}

/// Numerical rank with cutoff `tol * max(sigma)`.
pub fn rank(a: &DMatrix<f64>, tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let s = a.clone().svd(false, false).singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > tol * smax).count()
}

/// Dimension of the kernel of `a` after column normalization.
pub fn nullity(a: &DMatrix<f64>, tol: f64) -> usize {
    if a.ncols() == 0 {
        return 0;
    }
    if a.nrows() == 0 {
        return a.ncols();
    }
    let mut b = a.clone();
    normalize_columns(&mut b);
    a.ncols() - rank(&b, tol)
}

/// Orthonormal basis of the kernel of `a`, as columns.
pub fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    null_space_scaled(a, tol, 0.0)
}

/// Kernel with cutoff `tol * max(sigma_max, scale)`, for matrices that may be
/// zero up to rounding relative to a known reference magnitude.
pub fn null_space_scaled(a: &DMatrix<f64>, tol: f64, scale: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let p = padded(a);
    let svd = p.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max).max(scale);
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= tol * smax)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.solve(b, tol * smax.max(f64::MIN_POSITIVE)).expect("SVD factors present")
}
