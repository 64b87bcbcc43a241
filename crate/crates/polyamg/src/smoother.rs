//! The polynomial smoother: best uniform approximation of 1/x on an
//! interval, degree selection, and stable application to matrices.
//!
//! The smoother `R = q_m(A)` uses the polynomial `q_m` of degree `m` that
//! minimizes `max |1/x - q(x)|` over `[lambda0, lambda1]`. Its weighted
//! error `E_m = max |1 - x q_m(x)|` has the closed form
//! `delta^m (kappa - 1) / 2` with `kappa = lambda1/lambda0` and
//! `delta = (sqrt(kappa)-1)/(sqrt(kappa)+1)`; construction is by Remez
//! exchange and is validated against that closed form.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Chebyshev-basis helpers shared by the smoother and the multilevel
/// stabilization polynomial.
pub(crate) mod cheb {
    /// Values of T_0..T_deg at `t` by the three-term recurrence.
    pub fn values(t: f64, deg: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(deg + 1);
        v.push(1.0);
        if deg >= 1 {
            v.push(t);
        }
        for j in 2..=deg {
            v.push(2.0 * t * v[j - 1] - v[j - 2]);
        }
        v
    }

    /// Evaluates a Chebyshev series at `t` by the Clenshaw recurrence.
    pub fn eval(coeffs: &[f64], t: f64) -> f64 {
        let d = coeffs.len().saturating_sub(1);
        if coeffs.is_empty() {
            return 0.0;
        }
        if d == 0 {
            return coeffs[0];
        }
        let mut b1 = coeffs[d];
        let mut b2 = 0.0;
        for k in (1..d).rev() {
            let next = 2.0 * t * b1 - b2 + coeffs[k];
            b2 = b1;
            b1 = next;
        }
        t * b1 - b2 + coeffs[0]
    }

    /// Given the Chebyshev coefficients (in `t(x) = (x - mid)/half`) of a
    /// polynomial `N` with `N(0) = 0`, returns the coefficients of
    /// `q(x) = N(x)/x` in the same basis, plus the back-substitution
    /// residual on the T_0 equation (zero in exact arithmetic).
    pub fn divide_by_x(c: &[f64], mid: f64, half: f64) -> (Vec<f64>, f64) {
        let m = c.len() - 2; // q has degree m when N has degree m+1
        let hh = half / 2.0;
        let mut q = vec![0.0; m + 1];
        if m == 0 {
            // t * q0 T_0 = mid * q0 T_0 + half * q0 T_1.
            q[0] = c[1] / half;
            return (q, mid * c[1] / half - c[0]);
        }
        q[m] = c[m + 1] / hh;
        for j in (1..=m).rev() {
            let upper = if j < m { q[j + 1] } else { 0.0 };
            let num = c[j] - mid * q[j] - hh * upper;
            if j == 1 {
                q[0] = num / half;
            } else {
                q[j - 1] = num / hh;
            }
        }
        let q1 = if m >= 1 { q[1] } else { 0.0 };
        let residual = mid * q[0] + hh * q1 - c[0];
        (q, residual)
    }
}

/// The value `delta = (sqrt(kappa) - 1)/(sqrt(kappa) + 1)`.
pub fn delta(kappa: f64) -> f64 {
    let s = kappa.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// The closed-form weighted error `E_m = delta^m (kappa - 1)/2` of the
/// best degree-`m` uniform approximation to 1/x.
pub fn error_em(m: usize, kappa: f64) -> Result<f64> {
    if !(kappa > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "error_em needs kappa > 1, got {kappa}"
        )));
    }
    Ok(delta(kappa).powi(m as i32) * (kappa - 1.0) / 2.0)
}

/// Smallest degree `m` with
/// `m >= (1/|ln delta|) max{ |ln(2 rho/(kappa-1))|, |ln(2/(lambda1 (kappa-1)))| }`,
/// which guarantees both `E_m < rho` and positivity of `q_m(lambda1)`.
pub fn min_degree(rho: f64, kappa: f64, lambda1: f64) -> Result<usize> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "min_degree needs 0 < rho < 1, got {rho}"
        )));
    }
    if !(kappa > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "min_degree needs kappa > 1, got {kappa}"
        )));
    }
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "min_degree needs lambda1 > 0, got {lambda1}"
        )));
    }
    let d = delta(kappa);
    let t1 = (2.0 * rho / (kappa - 1.0)).ln().abs();
    let t2 = (2.0 / (lambda1 * (kappa - 1.0))).ln().abs();
    let bound = t1.max(t2) / d.ln().abs();
    Ok(bound.ceil().max(0.0) as usize)
}

/// The best degree-`m` uniform approximation to 1/x on `[lambda0, lambda1]`,
/// as Chebyshev coefficients of the mapped variable, together with the
/// error polynomial and the equioscillation data.
#[derive(Debug, Clone)]
pub struct InverseApprox {
    /// Left interval endpoint.
    pub lambda0: f64,
    /// Right interval endpoint.
    pub lambda1: f64,
    /// Polynomial degree.
    pub degree: usize,
    /// Coefficients of q in the Chebyshev basis of t(x) = (2x-l1-l0)/(l1-l0),
    /// length m+1.
    pub q_cheb: Vec<f64>,
    /// Coefficients of the error polynomial g(x) = 1 - x q(x), length m+2.
    pub g_cheb: Vec<f64>,
    /// Signed uniform error level h of 1/x - q at the alternation points.
    pub level: f64,
    /// The m+2 alternation points, ascending; first is lambda0, last lambda1.
    pub alternation: Vec<f64>,
}

impl InverseApprox {
    /// Evaluates q at a scalar x (valid for any x, also outside the interval).
    pub fn q_at(&self, x: f64) -> f64 {
        let (mid, half) = self.map();
        cheb::eval(&self.q_cheb, (x - mid) / half)
    }

    /// Evaluates the weighted error 1 - x q(x) at a scalar x.
    pub fn weighted_error_at(&self, x: f64) -> f64 {
        1.0 - x * self.q_at(x)
    }

    /// The weighted uniform error E_m = max |1 - x q(x)| = |h| * lambda1.
    pub fn weighted_error(&self) -> f64 {
        self.level.abs() * self.lambda1
    }

    fn map(&self) -> (f64, f64) {
        (
            (self.lambda1 + self.lambda0) / 2.0,
            (self.lambda1 - self.lambda0) / 2.0,
        )
    }
}

const REMEZ_MAX_ITER: usize = 100;
const REMEZ_SPREAD_TOL: f64 = 1e-12;
const BISECT_STEPS: usize = 80;
const TERNARY_STEPS: usize = 200;

/// Runs the Remez exchange for the best uniform approximation of 1/x.
///
/// The iteration works on the error polynomial g(x) = 1 - x q(x) of degree
/// m+1, anchored by the constraint g(0) = 1, with reference conditions
/// g(x_i) = (-1)^i h x_i that encode equioscillation of 1/x - q. The
/// converged error level is validated against the closed form; q is
/// recovered by Chebyshev division of 1 - g by x.
pub fn best_inverse_approx(lambda0: f64, lambda1: f64, m: usize) -> Result<InverseApprox> {
    if !(lambda0 > 0.0 && lambda0 < lambda1 && lambda1.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "approximation interval needs 0 < lambda0 < lambda1, got [{lambda0}, {lambda1}]"
        )));
    }
    let mid = (lambda1 + lambda0) / 2.0;
    let half = (lambda1 - lambda0) / 2.0;
    let t_of = |x: f64| (x - mid) / half;
    let n_refs = m + 2;

    // Chebyshev points of [lambda0, lambda1], ascending.
    let mut refs: Vec<f64> = (0..n_refs)
        .map(|i| {
            let angle = std::f64::consts::PI * (n_refs - 1 - i) as f64 / (n_refs - 1) as f64;
            mid + half * angle.cos()
        })
        .collect();

    let mut g = vec![0.0; m + 2];
    let mut h = 0.0;
    let mut spread = f64::INFINITY;
    let mut converged = false;

    for _ in 0..REMEZ_MAX_ITER {
        let (g_new, h_new) = solve_reference_system(&refs, m, mid, half)?;
        g = g_new;
        h = h_new;

        let g_at = |x: f64| cheb::eval(&g, t_of(x));
        let err_at = |x: f64| g_at(x) / x; // 1/x - q(x)

        // Roots of g between consecutive references (g alternates sign there).
        let mut roots = Vec::with_capacity(n_refs - 1);
        for w in refs.windows(2) {
            roots.push(bisect_root(&g_at, w[0], w[1]));
        }

        // One extremum of |1/x - q| per bracket, endpoints included.
        let mut new_refs = Vec::with_capacity(n_refs);
        let mut brackets = Vec::with_capacity(n_refs);
        brackets.push((lambda0, roots[0]));
        for w in roots.windows(2) {
            brackets.push((w[0], w[1]));
        }
        brackets.push((roots[n_refs - 2], lambda1));
        for (lo, hi) in brackets {
            new_refs.push(maximize_abs(&err_at, lo, hi));
        }

        let levels: Vec<f64> = new_refs.iter().map(|&x| err_at(x).abs()).collect();
        let max_level = levels.iter().fold(0.0_f64, |a, &b| a.max(b));
        let min_level = levels.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        spread = (max_level - min_level) / max_level;
        refs = new_refs;
        if spread <= REMEZ_SPREAD_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::RemezStalled {
            iterations: REMEZ_MAX_ITER,
            spread,
        });
    }

    // Validate the converged level against the closed form.
    let kappa = lambda1 / lambda0;
    let expected = error_em(m, kappa)?;
    let measured = h.abs() * lambda1;
    if (measured - expected).abs() > 1e-6 * expected.max(f64::MIN_POSITIVE) {
        return Err(Error::ApproximationMismatch { measured, expected });
    }

    // q = (1 - g)/x in the mapped Chebyshev basis.
    let mut n_cheb: Vec<f64> = g.iter().map(|c| -c).collect();
    n_cheb[0] += 1.0;
    let (q_cheb, residual) = cheb::divide_by_x(&n_cheb, mid, half);
    let scale = n_cheb.iter().map(|c| c.abs()).fold(1.0, f64::max);
    if residual.abs() > 1e-8 * scale {
        return Err(Error::ApproximationMismatch {
            measured: residual.abs(),
            expected: 0.0,
        });
    }

    Ok(InverseApprox {
        lambda0,
        lambda1,
        degree: m,
        q_cheb,
        g_cheb: g,
        level: h,
        alternation: refs,
    })
}

/// Solves for the error-polynomial coefficients and level given reference
/// points: rows g(x_i) - (-1)^i h x_i = 0 plus the constraint g(0) = 1,
/// with row equilibration and one step of iterative refinement.
fn solve_reference_system(refs: &[f64], m: usize, mid: f64, half: f64) -> Result<(Vec<f64>, f64)> {
    let n = m + 3; // m+2 coefficients of g, plus h
    let mut raw = crate::dense::DenseMatrix::zeros(n, n);
    let mut rhs = vec![0.0; n];
    for (i, &x) in refs.iter().enumerate() {
        let tv = cheb::values((x - mid) / half, m + 1);
        for (j, &t) in tv.iter().enumerate() {
            raw.set(i, j, t);
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        raw.set(i, n - 1, -sign * x);
    }
    let t0 = cheb::values(-mid / half, m + 1);
    for (j, &t) in t0.iter().enumerate() {
        raw.set(n - 1, j, t);
    }
    rhs[n - 1] = 1.0;

    // Row equilibration in the infinity norm.
    let mut eq = raw.clone();
    let mut rhs_eq = rhs.clone();
    let mut scales = vec![1.0; n];
    for i in 0..n {
        let s = eq.row(i).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if s > 0.0 {
            scales[i] = s;
            for j in 0..n {
                eq.set(i, j, eq.get(i, j) / s);
            }
            rhs_eq[i] /= s;
        }
    }
    let mut sol = crate::dense::solve_linear(&eq, &rhs_eq)?;

    // One step of iterative refinement against the unequilibrated system.
    let ax = raw.matvec(&sol);
    let resid: Vec<f64> = rhs
        .iter()
        .zip(&ax)
        .zip(&scales)
        .map(|((b, a), s)| (b - a) / s)
        .collect();
    let corr = crate::dense::solve_linear(&eq, &resid)?;
    for (s, c) in sol.iter_mut().zip(&corr) {
        *s += c;
    }

    let h = sol[n - 1];
    sol.truncate(m + 2);
    Ok((sol, h))
}

/// Bisection for a sign change of `f` on [lo, hi].
fn bisect_root(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    for _ in 0..BISECT_STEPS {
        let midpoint = 0.5 * (lo + hi);
        let fm = f(midpoint);
        if (fm >= 0.0) == (flo >= 0.0) {
            lo = midpoint;
        } else {
            hi = midpoint;
        }
    }
    0.5 * (lo + hi)
}

/// Ternary search for the maximum of |f| on [lo, hi], with the bracket
/// endpoints kept as candidates (the global maximum may sit on the
/// boundary, e.g. at lambda1).
fn maximize_abs(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..TERNARY_STEPS {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1).abs() < f(m2).abs() {
            a = m1;
        } else {
            b = m2;
        }
    }
    let interior = 0.5 * (a + b);
    [lo, interior, hi]
        .into_iter()
        .max_by(|&x, &y| f(x).abs().total_cmp(&f(y).abs()))
        .unwrap()
}

/// A validated, ready-to-apply polynomial smoother `R = q_m(A)`.
#[derive(Debug, Clone)]
pub struct PolySmoother {
    /// Left endpoint of the approximation interval.
    pub lambda0: f64,
    /// Right endpoint (intended spectral upper bound of A).
    pub lambda1: f64,
    /// Polynomial degree.
    pub degree: usize,
    /// Chebyshev coefficients of q_m in t(x) = (2x-l1-l0)/(l1-l0), length m+1.
    pub cheb_coeffs: Vec<f64>,
    /// Interval ratio lambda1/lambda0.
    pub kappa: f64,
    /// The contraction base (sqrt(kappa)-1)/(sqrt(kappa)+1).
    pub delta: f64,
    approx: InverseApprox,
}

impl PolySmoother {
    /// Builds the smoother, enforcing strict positivity of q_m on (0, lambda1].
    ///
    /// Positivity makes `q_m(A)` SPD for SPD-spectrum `A`; when it fails the
    /// error advises a larger degree.
    pub fn build(lambda0: f64, lambda1: f64, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidArgument(format!(
                "smoother degree must be at least 1, got {m}"
            )));
        }
        let approx = best_inverse_approx(lambda0, lambda1, m)?;
        if approx.q_at(lambda1) <= 0.0 {
            return Err(Error::IndefiniteSmoother { degree: m, lambda1 });
        }
        // Dense positivity sample of (0, lambda1].
        const SAMPLES: usize = 10_000;
        for i in 1..=SAMPLES {
            let x = lambda1 * i as f64 / SAMPLES as f64;
            if approx.q_at(x) <= 0.0 {
                return Err(Error::IndefiniteSmoother { degree: m, lambda1 });
            }
        }
        Ok(Self {
            lambda0,
            lambda1,
            degree: m,
            cheb_coeffs: approx.q_cheb.clone(),
            kappa: lambda1 / lambda0,
            delta: delta(lambda1 / lambda0),
            approx,
        })
    }

    /// The weighted uniform error E_m of the underlying approximation.
    pub fn error(&self) -> f64 {
        self.approx.weighted_error()
    }

    /// The m+2 equioscillation points of 1/x - q_m, ascending.
    pub fn alternation_points(&self) -> &[f64] {
        &self.approx.alternation
    }

    /// The signed equioscillation level of 1/x - q_m.
    pub fn alternation_level(&self) -> f64 {
        self.approx.level
    }

    /// Scalar evaluation of q_m.
    pub fn q_at(&self, x: f64) -> f64 {
        self.approx.q_at(x)
    }

    /// Applies `q_m(A)` to `r` by the Clenshaw recurrence in the mapped
    /// operator `T = (2A - (l1+l0) I)/(l1-l0)`, using exactly m SpMVs.
    pub fn apply(&self, a: &SparseMatrix, r: &[f64]) -> Result<Vec<f64>> {
        let n = a.nrows();
        if a.ncols() != n || r.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "smoother apply on {}x{} operator with vector length {}",
                n,
                a.ncols(),
                r.len()
            )));
        }
        let mid = (self.lambda1 + self.lambda0) / 2.0;
        let half = (self.lambda1 - self.lambda0) / 2.0;
        let c = &self.cheb_coeffs;
        let m = self.degree;
        // T v = (A v - mid v)/half, evaluated on the fly.
        let mut scratch = vec![0.0; n];
        let mut t_apply = |v: &[f64], out: &mut Vec<f64>| -> Result<()> {
            a.spmv_into(v, &mut scratch)?;
            out.clear();
            out.extend(scratch.iter().zip(v).map(|(av, vi)| (av - mid * vi) / half));
            Ok(())
        };

        let mut b1: Vec<f64> = r.iter().map(|&ri| c[m] * ri).collect();
        let mut b2 = vec![0.0; n];
        let mut tb = Vec::with_capacity(n);
        for k in (1..m).rev() {
            t_apply(&b1, &mut tb)?;
            let next: Vec<f64> = (0..n).map(|i| 2.0 * tb[i] - b2[i] + c[k] * r[i]).collect();
            b2 = std::mem::replace(&mut b1, next);
        }
        t_apply(&b1, &mut tb)?;
        Ok((0..n).map(|i| tb[i] - b2[i] + c[0] * r[i]).collect())
    }

    /// One smoothing step: `y + q_m(A)(f - A y)`.
    pub fn smoothed_iterate(&self, a: &SparseMatrix, f: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let ay = a.spmv(y)?;
        let r: Vec<f64> = f.iter().zip(&ay).map(|(fi, ai)| fi - ai).collect();
        let correction = self.apply(a, &r)?;
        Ok(y.iter().zip(&correction).map(|(yi, ci)| yi + ci).collect())
    }
}
