//! LMI feasibility of a pinning configuration, reduced to eigenvalue tests.
//!
//! With `Q = q·I_m` and `Γ = γ·I_m` the Kronecker inequality
//! `2Cγ L_s ⊗ Q + 2cγ D̂ ⊗ Q ⪰ δ I` holds iff the N×N matrix
//! `M(c) = 2Cγ L_s + 2cγ D̂` satisfies `q·λ_min(M(c)) ≥ δ`. `q` only rescales
//! the inequality, so it is fixed to 1 and everything here works on `M(c)`.
//!
//! `λ_min(M(c))` is nondecreasing in `c` (the pinning term is PSD), so the
//! smallest admissible gain is well defined on `[0, c_max]`. It is located
//! from a Schur complement on the unpinned block, to within the relative
//! bisection tolerance, with plain bisection as the fallback.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::MultiNetworkSystem;

const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityParams {
    /// Strictness constant δ on the right-hand side of the LMI.
    pub delta: f64,
    /// Lyapunov weight, `Q = q·I`.
    pub q: f64,
    /// Upper bound on the pinning gain.
    pub c_max: f64,
    /// Relative bisection tolerance on the gain.
    pub bisection_tol: f64,
    pub max_iterations: usize,
}

impl Default for StabilityParams {
    fn default() -> Self {
        Self {
            delta: 1.0,
            q: 1.0,
            c_max: 50.0,
            bisection_tol: 1e-6,
            max_iterations: 60,
        }
    }
}

impl StabilityParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} must be > 0")))
            }
        };
        positive("delta", self.delta)?;
        positive("q", self.q)?;
        positive("c_max", self.c_max)?;
        positive("bisection_tol", self.bisection_tol)?;
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be >= 1"));
        }
        Ok(())
    }
}

/// Outcome of testing one pinning configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub feasible: bool,
    /// Gain at which the LMI holds; `None` when infeasible.
    pub gain: Option<f64>,
    /// `λ_min(M(c)) − δ` at the reported gain (at `c_max` or the fixed gain when infeasible).
    pub margin: f64,
    /// Infeasibility measure, 0 iff feasible.
    pub xi: f64,
}

/// How the pinning gain is chosen when testing a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// Smallest feasible gain in `[0, c_max]`, by bisection.
    Minimal,
    /// Test the LMI at exactly this gain.
    Fixed(f64),
}

fn check_inputs(ls: &DMatrix<f64>, pinned: &[bool], coupling: f64, gamma: f64) -> Result<()> {
    if !ls.is_square() {
        return Err(Error::NotSquare {
            rows: ls.nrows(),
            cols: ls.ncols(),
        });
    }
    if pinned.len() != ls.nrows() {
        return Err(Error::DimensionMismatch {
            what: "pinning vector vs symmetric Laplacian",
            expected: ls.nrows(),
            got: pinned.len(),
        });
    }
    if !(coupling > 0.0) {
        return Err(Error::param("coupling_strength", "must be > 0"));
    }
    if !(gamma > 0.0) {
        return Err(Error::param("gamma", "must be > 0"));
    }
    Ok(())
}

/// `M = 2Cγ L_s + 2cγ D̂`, with `D̂ = diag(pinned)`.
pub fn stability_matrix(
    ls: &DMatrix<f64>,
    pinned: &[bool],
    coupling: f64,
    gain: f64,
    gamma: f64,
) -> Result<DMatrix<f64>> {
    check_inputs(ls, pinned, coupling, gamma)?;
    if !(gain >= 0.0) {
        return Err(Error::param("gain", format!("{gain} must be >= 0")));
    }
    Ok(matrix_at(&(ls * (2.0 * coupling * gamma)), pinned, gain, gamma))
}

fn matrix_at(base: &DMatrix<f64>, pinned: &[bool], gain: f64, gamma: f64) -> DMatrix<f64> {
    let mut m = base.clone();
    for (i, _) in pinned.iter().enumerate().filter(|(_, &p)| p) {
        m[(i, i)] += 2.0 * gain * gamma;
    }
    m
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::Empty("matrix"));
    }
    let scale = m.amax().max(1.0);
    let asymmetry = max_asymmetry(m);
    if asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(m.clone().symmetric_eigenvalues().min())
}

/// `M − δI ≻ 0`, tested by attempting a Cholesky factorisation.
fn exceeds(m: &DMatrix<f64>, delta: f64) -> bool {
    let mut shifted = m.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] -= delta;
    }
    match Cholesky::new(shifted) {
        Some(chol) => chol
            .l_dirty()
            .diagonal()
            .iter()
            .all(|d| d.is_finite() && *d > 0.0),
        None => false,
    }
}

/// `λ_min(M) − δ` for `M − δI ≻ 0`. Inverse iteration on the Cholesky
/// factor converges in a few steps when the margin is small next to the rest
/// of the spectrum, which is the usual case at a minimal gain.
fn margin_above(m: &DMatrix<f64>, delta: f64) -> f64 {
    let n = m.nrows();
    let mut shifted = m.clone();
    for i in 0..n {
        shifted[(i, i)] -= delta;
    }
    if let Some(chol) = Cholesky::new(shifted.clone()) {
        let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618).fract());
        v /= v.norm();
        let mut prev = f64::INFINITY;
        for _ in 0..30 {
            let w = chol.solve(&v);
            // Rayleigh quotient of the shifted matrix at the new iterate
            let wn = w.norm();
            if !(wn.is_finite() && wn > 0.0) {
                break;
            }
            v = w / wn;
            let rq = v.dot(&(&shifted * &v));
            let residual = (&shifted * &v - &v * rq).norm();
            if residual <= 1e-10 * shifted.amax().max(1.0) || (prev - rq).abs() <= 1e-15 * rq.abs() {
                return rq;
            }
            prev = rq;
        }
    }
    m.clone().symmetric_eigenvalues().min() - delta
}

fn frobenius_gap(m: &DMatrix<f64>, delta: f64) -> f64 {
    let mut shifted = m.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] -= delta;
    }
    shifted.norm()
}

fn infeasible(m: &DMatrix<f64>, params: &StabilityParams) -> FeasibilityResult {
    let margin = m.clone().symmetric_eigenvalues().min() - params.delta;
    FeasibilityResult {
        feasible: false,
        gain: None,
        margin,
        xi: frobenius_gap(m, params.delta),
    }
}

/// Smallest gain `c ∈ [0, c_max]` with `λ_min(M(c)) ≥ δ`.
///
/// When even `c_max` fails, the result is infeasible and
/// `ξ = ‖M(c_max) − δI‖_F`.
pub fn solve_min_gain(
    ls: &DMatrix<f64>,
    pinned: &[bool],
    coupling: f64,
    gamma: f64,
    params: &StabilityParams,
) -> Result<FeasibilityResult> {
    check_inputs(ls, pinned, coupling, gamma)?;
    params.validate()?;
    let base = ls * (2.0 * coupling * gamma);
    let delta = params.delta;

    let at_max = matrix_at(&base, pinned, params.c_max, gamma);
    if !exceeds(&at_max, delta) {
        return Ok(infeasible(&at_max, params));
    }

    // c* is the exact boundary; step just past it, then confirm.
    let step = 1.0 + params.bisection_tol;
    let gain = match schur_boundary(&base, pinned, gamma, delta) {
        Some(c) if c > 0.0 && c * step < params.c_max && exceeds(&matrix_at(&base, pinned, c * step, gamma), delta) => {
            c * step
        }
        _ if exceeds(&base, delta) => 0.0,
        lower => bisect(&base, pinned, gamma, params, lower.unwrap_or(0.0)),
    };
    let m = matrix_at(&base, pinned, gain, gamma);
    Ok(FeasibilityResult {
        feasible: true,
        gain: Some(gain),
        margin: margin_above(&m, delta),
        xi: 0.0,
    })
}

fn bisect(base: &DMatrix<f64>, pinned: &[bool], gamma: f64, params: &StabilityParams, lo: f64) -> f64 {
    let (mut lo, mut hi) = (lo.clamp(0.0, params.c_max), params.c_max);
    for _ in 0..params.max_iterations {
        if hi - lo <= params.bisection_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if exceeds(&matrix_at(base, pinned, mid, gamma), params.delta) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Gain at which `M(c) − δI` becomes singular, from the Schur complement on
/// the unpinned block: with `A = M(0) − δI`, `M(c) − δI ≻ 0` iff
/// `A_uu ≻ 0` and `2cγ > λ_max(A_pu A_uu⁻¹ A_up − A_pp)`.
fn schur_boundary(base: &DMatrix<f64>, pinned: &[bool], gamma: f64, delta: f64) -> Option<f64> {
    let p: Vec<usize> = (0..pinned.len()).filter(|&i| pinned[i]).collect();
    let u: Vec<usize> = (0..pinned.len()).filter(|&i| !pinned[i]).collect();
    if p.is_empty() {
        return None;
    }
    let mut a = base.clone();
    for i in 0..a.nrows() {
        a[(i, i)] -= delta;
    }
    let a_pp = a.select_rows(&p).select_columns(&p);
    let s = if u.is_empty() {
        -a_pp
    } else {
        let a_up = a.select_rows(&u).select_columns(&p);
        let chol = Cholesky::new(a.select_rows(&u).select_columns(&u))?;
        let x = chol.solve(&a_up);
        let mut s = a_up.transpose() * x - a_pp;
        // symmetrise away rounding
        s = (&s + s.transpose()) * 0.5;
        s
    };
    let lmax = s.symmetric_eigenvalues().max();
    lmax.is_finite().then(|| (lmax / (2.0 * gamma)).max(0.0))
}

/// Tests the LMI at exactly `gain`; `ξ = ‖M(gain) − δI‖_F` when it fails.
pub fn check_at_gain(
    ls: &DMatrix<f64>,
    pinned: &[bool],
    coupling: f64,
    gamma: f64,
    gain: f64,
    params: &StabilityParams,
) -> Result<FeasibilityResult> {
    params.validate()?;
    let m = stability_matrix(ls, pinned, coupling, gain, gamma)?;
    if exceeds(&m, params.delta) {
        let margin = margin_above(&m, params.delta);
        Ok(FeasibilityResult {
            feasible: true,
            gain: Some(gain),
            margin,
            xi: 0.0,
        })
    } else {
        Ok(infeasible(&m, params))
    }
}

/// Dispatches on [`GainMode`].
pub fn evaluate_pinning(
    ls: &DMatrix<f64>,
    pinned: &[bool],
    coupling: f64,
    gamma: f64,
    mode: GainMode,
    params: &StabilityParams,
) -> Result<FeasibilityResult> {
    match mode {
        GainMode::Minimal => solve_min_gain(ls, pinned, coupling, gamma, params),
        GainMode::Fixed(c) => check_at_gain(ls, pinned, coupling, gamma, c, params),
    }
}

/// `ξ_m = Σ_k ξ_k`.
pub fn infeasibility_multi(results: &[FeasibilityResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Empty("per-network feasibility results"));
    }
    Ok(results.iter().map(|r| r.xi).sum())
}

/// Gain above which the all-pinned configuration is guaranteed feasible:
/// `(δ − 2Cγ·λ_min(L_s)) / (2γ)`.
pub fn all_pinned_gain_bound(ls: &DMatrix<f64>, coupling: f64, gamma: f64, delta: f64) -> Result<f64> {
    let lmin = min_eigenvalue(ls)?;
    Ok((delta - 2.0 * coupling * gamma * lmin) / (2.0 * gamma))
}

/// The summed N×N form `Σ_k 2[C⁽ᵏ⁾γ⁽ᵏ⁾ L_s⁽ᵏ⁾ + c⁽ᵏ⁾γ⁽ᵏ⁾ D̂⁽ᵏ⁾]`, each
/// network's block embedded at its global node ids.
///
/// `pins[k]` is indexed by network k's local rows. This is a diagnostic; the
/// optimisation itself requires each network's LMI separately.
pub fn joint_stability_matrix(
    sys: &MultiNetworkSystem,
    pins: &[Vec<bool>],
    gains: &[f64],
) -> Result<DMatrix<f64>> {
    let k = sys.num_networks();
    if pins.len() != k || gains.len() != k {
        return Err(Error::DimensionMismatch {
            what: "per-network pins/gains vs network count",
            expected: k,
            got: pins.len().min(gains.len()),
        });
    }
    let n = sys.total_nodes();
    let mut joint = DMatrix::zeros(n, n);
    for (net, (p, &c)) in sys.networks().iter().zip(pins.iter().zip(gains)) {
        let block = stability_matrix(
            &net.laplacian().symmetric_part,
            p,
            net.coupling_strength(),
            c,
            net.gamma(),
        )?;
        let ids = net.node_ids();
        for a in 0..ids.len() {
            for b in 0..ids.len() {
                joint[(ids[a], ids[b])] += block[(a, b)];
            }
        }
    }
    Ok(joint)
}
