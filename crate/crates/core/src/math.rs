//! Small numeric helpers that work without `std`.

pub(crate) use libm::{acos, cos, fabs, sin, sqrt};

/// Degrees to radians.
pub fn deg(x: f64) -> f64 {
    x * core::f64::consts::PI / 180.0
}

/// Radians to degrees.
pub fn to_deg(x: f64) -> f64 {
    x * 180.0 / core::f64::consts::PI
}

/// Revolutions per minute to radians per second.
pub fn rpm(x: f64) -> f64 {
    x * 2.0 * core::f64::consts::PI / 60.0
}

/// Sign with a zero deadband: `sgn(0) == 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `1e-14` times the largest entry of `a`.
pub(crate) fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |m, v| m.max(fabs(*v)));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let tiny = 1e-14 * scale;

    for col in 0..N {
        let mut pivot = col;
        for row in col + 1..N {
            if fabs(a[row][col]) > fabs(a[pivot][col]) {
                pivot = row;
            }
        }
        if fabs(a[pivot][col]) <= tiny {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);

        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }

    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for k in row + 1..N {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// `‖a x − b‖` for a dense square system.
pub(crate) fn residual<const N: usize>(a: &[[f64; N]; N], x: &[f64; N], b: &[f64; N]) -> f64 {
    let mut r = [0.0; N];
    for (i, row) in a.iter().enumerate() {
        r[i] = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>() - b[i];
    }
    norm(&r)
}
