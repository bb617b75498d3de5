//! Test-side reference implementations, deliberately independent of the
//! library's numerics (no Cholesky, no nalgebra eigensolvers, no Schur
//! complements).

#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn jacobi_min(m: &DMatrix<f64>) -> f64 {
    jacobi_eigenvalues(m)[0]
}

/// Characteristic polynomial coefficients (monic, highest degree first) by
/// Faddeev-LeVerrier.
pub fn char_poly(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut coeffs = vec![1.0];
    let mut mk = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        mk = m * (&mk + &id * coeffs[k - 1]);
        coeffs.push(-mk.trace() / k as f64);
    }
    coeffs
}

/// Real parts of all polynomial roots by Durand-Kerner.
pub fn poly_roots(coeffs: &[f64]) -> Vec<f64> {
    type C = nalgebra::Complex<f64>;
    let n = coeffs.len() - 1;
    let eval = |z: C| coeffs.iter().fold(C::new(0.0, 0.0), |acc, &c| acc * z + c);
    let bound = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<C> = (0..n)
        .map(|k| C::from_polar(bound, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = C::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 * bound {
            break;
        }
    }
    let mut r: Vec<f64> = z.iter().map(|c| c.re).collect();
    r.sort_by(f64::total_cmp);
    r
}

/// `L = diag(G·1) − G`, built element by element.
pub fn laplacian_ref(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (0..n).map(|k| g[(i, k)]).sum::<f64>() - g[(i, i)]
        } else {
            -g[(i, j)]
        }
    })
}

pub fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `2Cγ L_s + 2cγ D̂` written out directly.
pub fn lmi_matrix(ls: &DMatrix<f64>, pinned: &[bool], coupling: f64, gain: f64, gamma: f64) -> DMatrix<f64> {
    let n = ls.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j && pinned[i] { 1.0 } else { 0.0 };
        2.0 * coupling * gamma * ls[(i, j)] + 2.0 * gain * gamma * d
    })
}

/// Minimal gain by a coarse grid then bisection, using Jacobi eigenvalues.
/// `None` if infeasible at `c_max`.
pub fn grid_min_gain(
    ls: &DMatrix<f64>,
    pinned: &[bool],
    coupling: f64,
    gamma: f64,
    delta: f64,
    c_max: f64,
) -> Option<f64> {
    let ok = |c: f64| jacobi_min(&lmi_matrix(ls, pinned, coupling, c, gamma)) >= delta;
    if !ok(c_max) {
        return None;
    }
    if ok(0.0) {
        return Some(0.0);
    }
    let steps = 200;
    let mut lo = 0.0;
    let mut hi = c_max;
    for k in 1..=steps {
        let c = c_max * k as f64 / steps as f64;
        if ok(c) {
            hi = c;
            lo = c_max * (k - 1) as f64 / steps as f64;
            break;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Minimum pinning count by scanning all bitmasks, Jacobi test at `c_max`.
pub fn exhaustive_min_count(ls: &DMatrix<f64>, coupling: f64, gamma: f64, delta: f64, c_max: f64) -> Option<usize> {
    let n = ls.nrows();
    (0u32..(1 << n))
        .filter(|mask| {
            let pinned: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            jacobi_min(&lmi_matrix(ls, &pinned, coupling, c_max, gamma)) >= delta
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Random adjacency with zero diagonal and entries in `{0} ∪ [lo, 1]`.
pub fn adjacency(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DMatrix<f64>> {
    n.prop_flat_map(|n| {
        proptest::collection::vec(prop_oneof![Just(0.0), 0.05f64..1.0], n * n).prop_map(move |v| {
            let mut g = DMatrix::from_vec(n, n, v);
            for i in 0..n {
                g[(i, i)] = 0.0;
            }
            g
        })
    })
}

/// Property-test config without on-disk failure persistence.
pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}
