//! Closed forms and bounds for both Bloch operator norms: the sharp
//! constant `C = Gamma(2+n+alpha)/Gamma((2+n+alpha)/2)^2`, the
//! Forelli-Rudin-type integral `J_{c,t}` in series, closed and boundary
//! form, sphere and ball moments of `|z^eta|`, the one-parameter integral
//! `ell(t)` whose maximum over `[0, pi/2]` equals the invariant seminorm,
//! and the grid scan probing where that maximum sits.

use crate::ballgeom::{Params, Point};
use crate::complex::ONE;
use crate::error::{Error, Result};
use crate::integrate::{
    mc_integrate_vector, reduce_marginal, stratified_singular_vector, Execution, IntegralEstimate,
    Method, QuadratureSpec, SamplerKind, VectorIntegrand,
};
use crate::specfun::{self, HypParams};
use serde::Serialize;

/// A real multi-index with entries > -1 (fractional entries are allowed;
/// the moment formulas hold for arbitrary real exponents above -1).
#[derive(Debug, Clone)]
pub struct MultiIndex {
    pub entries: Vec<f64>,
}

impl MultiIndex {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|e| *e <= -1.0) {
            return Err(Error::precondition(
                "multi-index entries must exceed -1".to_string(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }
}

/// The sharp beta-seminorm constant `C_{alpha,n}`.
pub fn c_const(p: &Params) -> f64 {
    p.c_const
}

/// `J_{c,t}(z)` in the hypergeometric closed form,
/// `Gamma(1+n) Gamma(1+t) F(l1, l1, 1+n+t, r^2) / Gamma(1+n+t)`,
/// `l1 = (n+1+t+c)/2`, evaluated at `|z| = r`.
pub fn j_ct_closed(c: f64, t: f64, r: f64, p: &Params) -> Result<f64> {
    if t <= -1.0 {
        return Err(Error::precondition(format!("J_(c,t) needs t > -1, got {t}")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("radius r = {r} not in [0,1)")));
    }
    let n = p.nf();
    let l1 = (n + 1.0 + t + c) / 2.0;
    let hyp = specfun::hyp2f1(&HypParams::new(l1, l1, 1.0 + n + t, r * r)?)?;
    let ln_pref =
        specfun::log_gamma(1.0 + n)? + specfun::log_gamma(1.0 + t)? - specfun::log_gamma(1.0 + n + t)?;
    Ok(ln_pref.exp() * hyp)
}

/// Boundary value `J_{c,t}(z/|z|) = Gamma(1+n) Gamma(1+t) Gamma(-c) /
/// Gamma((1-c+n+t)/2)^2`, finite exactly when c < 0.
pub fn j_ct_boundary(c: f64, t: f64, p: &Params) -> Result<f64> {
    if c >= 0.0 {
        return Err(Error::divergence(format!(
            "J_(c,t) diverges on the sphere for c = {c} >= 0"
        )));
    }
    if t <= -1.0 {
        return Err(Error::precondition(format!("J_(c,t) needs t > -1, got {t}")));
    }
    let n = p.nf();
    let ln = specfun::log_gamma(1.0 + n)? + specfun::log_gamma(1.0 + t)?
        + specfun::log_gamma(-c)?
        - 2.0 * specfun::log_gamma(0.5 * (1.0 - c + n + t))?;
    Ok(ln.exp())
}

/// Truncated-series value of `J_{c,t}` with a geometric tail bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u32,
}

/// `J_{c,t}(z)` by its defining series
/// `Gamma(n+1) Gamma(1+t)/Gamma(n+1+t) sum_k (l1)_k^2 r^{2k} / ((n+1+t)_k k!)`.
pub fn j_ct_series(c: f64, t: f64, r: f64, p: &Params, terms: u32) -> Result<SeriesValue> {
    if t <= -1.0 || terms < 1 {
        return Err(Error::precondition(
            "series needs t > -1 and at least one term".to_string(),
        ));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("radius r = {r} not in [0,1)")));
    }
    let n = p.nf();
    let l1 = (n + 1.0 + t + c) / 2.0;
    let cc = n + 1.0 + t;
    let z = r * r;
    let pref = (specfun::log_gamma(1.0 + n)? + specfun::log_gamma(1.0 + t)?
        - specfun::log_gamma(cc)?)
    .exp();
    let ratio = |k: f64| z * (k + l1) * (k + l1) / ((k + 1.0) * (cc + k));
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut used = 1;
    for k in 0..terms.saturating_sub(1) {
        term *= ratio(k as f64);
        sum += term;
        used += 1;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    // the term ratio tends to r^2; bound the tail by a geometric series at
    // the largest ratio seen near the truncation point
    let kf = used as f64;
    let mut q: f64 = z;
    for i in 0..50 {
        q = q.max(ratio(kf + i as f64));
    }
    let tail_bound = if q < 1.0 {
        (term * q / (1.0 - q)).abs() * pref
    } else {
        f64::INFINITY
    };
    Ok(SeriesValue {
        value: pref * sum,
        tail_bound,
        terms: used,
    })
}

/// Direct Monte Carlo estimate of the defining integral
/// `int (1-|w|^2)^t |1 - <z,w>|^{-(n+1+t+c)} dv(w)` (unweighted volume
/// measure) at `z = r e_1`.
pub fn j_ct_mc(c: f64, t: f64, r: f64, p: &Params, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    if t <= -1.0 {
        return Err(Error::precondition(format!("J_(c,t) needs t > -1, got {t}")));
    }
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("radius r = {r} not in [0,1)")));
    }
    let unweighted = Params::new(p.n, 0.0)?;
    let exponent = p.nf() + 1.0 + t + c;
    struct J {
        r: f64,
        t: f64,
        exponent: f64,
    }
    impl VectorIntegrand for J {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, w: &Point, _aux: &[f64], out: &mut [f64]) {
            let base = ONE - w.coords[0].scale(self.r); // 1 - <z, w> for z = r e_1
            out[0] = (1.0 - w.norm_sqr()).powf(self.t) * base.abs_powf(-self.exponent);
        }
    }
    Ok(mc_integrate_vector(
        &J { r, t, exponent },
        &unweighted,
        SamplerKind::BallValpha,
        spec,
    )?[0])
}

/// Sphere moment `int_S |zeta^eta| dsigma = (n-1)! prod Gamma(1+eta_i/2) /
/// Gamma(n + |eta|/2)`.
pub fn sphere_moment(eta: &MultiIndex) -> Result<f64> {
    let n = eta.entries.len() as f64;
    let mut ln = specfun::log_gamma(n)? - specfun::log_gamma(n + eta.total() / 2.0)?;
    for e in &eta.entries {
        ln += specfun::log_gamma(1.0 + e / 2.0)?;
    }
    Ok(ln.exp())
}

/// Ball moment `int_B |z^eta| dv_alpha = Gamma(1+alpha+n) prod
/// Gamma(1+eta_i/2) / Gamma(1+alpha+|eta|/2+n)`.
pub fn ball_moment(eta: &MultiIndex, p: &Params) -> Result<f64> {
    if eta.entries.len() != p.n {
        return Err(Error::precondition(format!(
            "multi-index length {} does not match n = {}",
            eta.entries.len(),
            p.n
        )));
    }
    let n = p.nf();
    let mut ln = specfun::log_gamma(1.0 + p.alpha + n)?
        - specfun::log_gamma(1.0 + p.alpha + eta.total() / 2.0 + n)?;
    for e in &eta.entries {
        ln += specfun::log_gamma(1.0 + e / 2.0)?;
    }
    Ok(ln.exp())
}

struct EllIntegrand {
    theta: f64,
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
}

impl VectorIntegrand for EllIntegrand {
    fn dim(&self) -> usize {
        self.cos_t.len()
    }
    fn eval(&self, w: &Point, _aux: &[f64], out: &mut [f64]) {
        let gap = ONE - w.coords[0];
        let w2 = w.coords[1];
        let weight = self.theta * gap.abs_powf(-self.theta);
        for (i, o) in out.iter_mut().enumerate() {
            *o = (gap.scale(self.cos_t[i]) + w2.scale(self.sin_t[i])).abs() * weight;
        }
    }
}

/// Evaluates `ell` on several angles in a single sampling pass. Shared
/// sample paths act as common random numbers, so comparisons between grid
/// values subtract most of the Monte Carlo noise.
pub fn ell_multi(ts: &[f64], p: &Params, spec: &QuadratureSpec) -> Result<Vec<IntegralEstimate>> {
    if p.n < 2 {
        return Err(Error::precondition(
            "ell(t) is defined for n >= 2 (it involves w_2)".to_string(),
        ));
    }
    if ts.iter().any(|t| !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(t)) {
        return Err(Error::domain("ell angles must lie in [0, pi/2]".to_string()));
    }
    let (eff, reduced) = if spec.reduction && p.n > 2 {
        (reduce_marginal(p, 2)?, true)
    } else {
        (*p, p.n == 2)
    };
    let integrand = EllIntegrand {
        theta: p.theta,
        cos_t: ts.iter().map(|t| t.cos()).collect(),
        sin_t: ts.iter().map(|t| t.sin()).collect(),
    };
    if spec.stratify {
        stratified_singular_vector(
            &integrand,
            &eff,
            None,
            p.theta,
            spec,
            Execution::Auto,
            Method::McStratified,
        )
    } else {
        let method = if reduced && p.n > 2 {
            Method::McReduced
        } else {
            Method::Mc
        };
        let mut est = mc_integrate_vector(&integrand, &eff, SamplerKind::BallValpha, spec)?;
        for e in &mut est {
            e.method = method;
        }
        Ok(est)
    }
}

/// `ell(t) = (n+1+alpha) int |(1-w_1) cos t + w_2 sin t| / |w_1-1|^{n+1+alpha} dv_alpha`,
/// computed after marginal reduction to the 2-ball with dyadic-shell
/// stratification near `w_1 = 1`.
pub fn ell(t: f64, p: &Params, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    Ok(ell_multi(&[t], p, spec)?[0])
}

/// Closed endpoint values `(ell(0), ell(pi/2)) = (C, (pi/2) C)`.
///
/// The second value is recomputed through the series route (squared
/// binomial coefficients against ball moments, summed by the Gauss
/// theorem) and the two expressions must agree to 1e-8 relative.
pub fn ell_endpoints(p: &Params) -> Result<(f64, f64)> {
    let ell0 = p.c_const;
    let ell_pi2 = std::f64::consts::FRAC_PI_2 * p.c_const;
    // series route: (n+1+alpha) Gamma(3/2) Gamma(1+alpha+n) / Gamma(alpha+n+3/2)
    //               * F(s, s, alpha+n+3/2, 1),  s = (n+1+alpha)/2
    let s = p.theta / 2.0;
    let c = p.alpha + p.nf() + 1.5;
    let pref = (specfun::log_gamma(1.5)? + specfun::log_gamma(1.0 + p.alpha + p.nf())?
        - specfun::log_gamma(c)?)
    .exp();
    let series_route = p.theta * pref * specfun::hyp2f1_at_1(s, s, c)?;
    let rel = (series_route - ell_pi2).abs() / ell_pi2;
    if rel > 1e-8 {
        return Err(Error::consistency(format!(
            "ell(pi/2) closed-form routes disagree by {rel:.3e}"
        )));
    }
    Ok((ell0, ell_pi2))
}

/// One row of a scan: the estimate at angle `t` plus the proven pointwise
/// bounds `max(cos t * ell(0), sin t * ell(pi/2)) <= ell(t) <= cos t *
/// ell(0) + sin t * ell(pi/2)` (lower bound by the `w_2 -> -w_2`
/// symmetrization, upper bound by the triangle inequality).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Grid scan of `ell` over `[0, pi/2]` with common random numbers.
#[derive(Debug, Clone, Serialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub samples: u64,
    pub method: Method,
    pub argmax_t: f64,
    pub max_value: f64,
    pub max_std_error: f64,
    /// closed-form `ell(0) = C`
    pub ell0_closed: f64,
    /// closed-form `ell(pi/2) = (pi/2) C`
    pub ell_pi2_closed: f64,
    /// the conjectured invariant-norm value `(pi/2) C`, reported as a
    /// comparison line only
    pub conjecture_value: f64,
    /// proven upper bound `(sqrt(pi^2+4)/2) C`
    pub upper_bound: f64,
    /// true when `ell(pi/2) >= ell(t) - 2 sigma_t` on the whole grid, i.e.
    /// the scan is consistent with the maximum sitting at pi/2
    pub conjecture_verdict: bool,
}

/// Scans `ell` on `grid_points` uniformly spaced angles (single sampling
/// pass, shared paths across the grid).
pub fn ell_scan(p: &Params, grid_points: usize, spec: &QuadratureSpec) -> Result<ScanResult> {
    if grid_points < 9 {
        return Err(Error::precondition(format!(
            "scan needs at least 9 grid points, got {grid_points}"
        )));
    }
    let (ell0, ell_pi2) = ell_endpoints(p)?;
    let ts: Vec<f64> = (0..grid_points)
        .map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / (grid_points - 1) as f64)
        .collect();
    let estimates = ell_multi(&ts, p, spec)?;
    let rows: Vec<ScanRow> = ts
        .iter()
        .zip(&estimates)
        .map(|(t, e)| ScanRow {
            t: *t,
            estimate: e.value,
            std_error: e.std_error,
            lower_bound: (t.cos() * ell0).max(t.sin() * ell_pi2),
            upper_bound: t.cos() * ell0 + t.sin() * ell_pi2,
        })
        .collect();
    let (argmax_idx, max_est) = estimates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap())
        .map(|(i, e)| (i, *e))
        .unwrap();
    let verdict = rows
        .iter()
        .all(|r| ell_pi2 >= r.estimate - 2.0 * r.std_error);
    Ok(ScanResult {
        samples: max_est.samples,
        method: max_est.method,
        argmax_t: ts[argmax_idx],
        max_value: max_est.value,
        max_std_error: max_est.std_error,
        ell0_closed: ell0,
        ell_pi2_closed: ell_pi2,
        conjecture_value: ell_pi2,
        upper_bound: (std::f64::consts::PI.powi(2) + 4.0).sqrt() / 2.0 * p.c_const,
        conjecture_verdict: verdict,
        rows,
    })
}

/// The four closed-form operator-norm bounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormBounds {
    /// `C <= ||P||_B <= 1 + C`
    pub beta_lower: f64,
    pub beta_upper: f64,
    /// `(pi/2) C <= ||P||_B~ <= 1 + (sqrt(pi^2+4)/2) C`
    pub invariant_lower: f64,
    pub invariant_upper: f64,
}

pub fn norm_bounds(p: &Params) -> NormBounds {
    let c = p.c_const;
    NormBounds {
        beta_lower: c,
        beta_upper: 1.0 + c,
        invariant_lower: std::f64::consts::FRAC_PI_2 * c,
        invariant_upper: 1.0 + (std::f64::consts::PI.powi(2) + 4.0).sqrt() / 2.0 * c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec_n(samples: u64) -> QuadratureSpec {
        QuadratureSpec::new(42, samples, 16).unwrap()
    }

    fn assert_close(got: f64, want: f64, tol: f64, msg: &str) {
        assert!(
            (got - want).abs() <= tol * (1.0 + want.abs()),
            "{msg}: got {got}, want {want}"
        );
    }

    #[test]
    fn sharp_constant_values() {
        assert_close(
            c_const(&Params::new(1, 0.0).unwrap()),
            8.0 / PI,
            1e-13,
            "C_{0,1}",
        );
        assert_close(c_const(&Params::new(2, 0.0).unwrap()), 6.0, 1e-13, "C_{0,2}");
        assert_close(c_const(&Params::new(1, 1.0).unwrap()), 6.0, 1e-13, "C_{1,1}");
    }

    #[test]
    fn j_closed_at_center() {
        let p1 = Params::new(1, 0.0).unwrap();
        assert_close(j_ct_closed(-1.0, 0.0, 0.0, &p1).unwrap(), 1.0, 1e-12, "J(0)");
        // r = 0, general t: Gamma(n+1) Gamma(1+t) / Gamma(n+1+t)
        let p2 = Params::new(2, 0.0).unwrap();
        let t = 1.4;
        let want = (specfun::log_gamma(3.0).unwrap() + specfun::log_gamma(1.0 + t).unwrap()
            - specfun::log_gamma(3.0 + t).unwrap())
        .exp();
        assert_close(j_ct_closed(-1.0, t, 0.0, &p2).unwrap(), want, 1e-11, "J(0), t");
    }

    #[test]
    fn j_closed_approaches_boundary_value() {
        // n=1, t=0, c=-1: boundary value 4/pi
        let p = Params::new(1, 0.0).unwrap();
        let bnd = j_ct_boundary(-1.0, 0.0, &p).unwrap();
        assert_close(bnd, 4.0 / PI, 1e-12, "J on the sphere");
        let near = j_ct_closed(-1.0, 0.0, 0.999, &p).unwrap();
        assert!((near - bnd).abs() / bnd < 0.01, "r=0.999: {near} vs {bnd}");
        let nearer = j_ct_closed(-1.0, 0.0, 0.9999, &p).unwrap();
        assert!((nearer - bnd).abs() < (near - bnd).abs(), "monotone approach");
    }

    #[test]
    fn boundary_consistency_with_sharp_constant() {
        // (1+n+alpha) c_alpha J_boundary(-1, alpha) = C_{alpha,n}
        for &(n, alpha) in &[(1usize, 0.0), (2, 0.0), (2, 1.0)] {
            let p = Params::new(n, alpha).unwrap();
            let lhs = p.theta * p.c_alpha * j_ct_boundary(-1.0, alpha, &p).unwrap();
            assert!(
                (lhs - p.c_const).abs() <= 1e-10 * p.c_const,
                "({n},{alpha}): {lhs} vs {}",
                p.c_const
            );
        }
    }

    #[test]
    fn j_boundary_rejects_nonnegative_c() {
        let p = Params::new(1, 0.0).unwrap();
        assert!(j_ct_boundary(0.0, 0.0, &p).is_err());
        assert!(j_ct_boundary(0.5, 0.0, &p).is_err());
    }

    #[test]
    fn series_matches_closed_form() {
        let p1 = Params::new(1, 0.0).unwrap();
        let s = j_ct_series(-1.0, 0.0, 0.5, &p1, 100).unwrap();
        let c = j_ct_closed(-1.0, 0.0, 0.5, &p1).unwrap();
        assert!((s.value - c).abs() < 1e-10, "{} vs {c}", s.value);

        // one term at r = 0 is exactly the center value
        let s0 = j_ct_series(-1.0, 0.7, 0.0, &p1, 1).unwrap();
        let c0 = j_ct_closed(-1.0, 0.7, 0.0, &p1).unwrap();
        assert_close(s0.value, c0, 1e-12, "single term at r = 0");
        assert_eq!(s0.terms, 1);

        let p2 = Params::new(2, 0.0).unwrap();
        let s = j_ct_series(-1.0, 1.0, 0.9, &p2, 2000).unwrap();
        let c = j_ct_closed(-1.0, 1.0, 0.9, &p2).unwrap();
        assert!(
            (s.value - c).abs() <= s.tail_bound + 1e-10 * c.abs(),
            "series {} vs closed {c}, tail {}",
            s.value,
            s.tail_bound
        );
    }

    #[test]
    fn j_boundary_is_the_radial_limit_of_the_series() {
        // n=2, t=0, c=-0.5: the boundary value is finite and the series
        // approaches it as r -> 1, at the (1-r^2)^{1/2} rate dictated by
        // the exponent -c. At r = 0.999 the remaining gap is 8.60% (the
        // value below is pinned against a 25-digit reference).
        let p = Params::new(2, 0.0).unwrap();
        let bnd = j_ct_boundary(-0.5, 0.0, &p).unwrap();
        assert!(bnd.is_finite() && bnd > 0.0);
        assert_close(bnd, 4.196_766_574_279_453, 1e-12, "boundary value");
        let s = j_ct_series(-0.5, 0.0, 0.999, &p, 60_000).unwrap();
        assert_close(s.value, 3.835_659_655_799_50, 1e-10, "series at 0.999");
        let mut last_gap = f64::INFINITY;
        for &r in &[0.99, 0.999, 0.9999] {
            let s = j_ct_series(-0.5, 0.0, r, &p, 400_000).unwrap();
            let gap = (s.value - bnd).abs() / bnd;
            assert!(gap < last_gap, "gap not shrinking at r = {r}");
            last_gap = gap;
        }
        assert!(last_gap < 0.03, "gap at r = 0.9999: {last_gap}");
    }

    #[test]
    fn j_mc_agrees_with_closed_form() {
        let spec = spec_n(100_000);
        for &(n, c, t, r) in &[(1usize, -1.0, 0.0, 0.5), (2, -1.0, 1.0, 0.5), (2, -1.0, 0.0, 0.0)]
        {
            let p = Params::new(n, 0.0).unwrap();
            let mc = j_ct_mc(c, t, r, &p, &spec).unwrap();
            let closed = j_ct_closed(c, t, r, &p).unwrap();
            // the epsilon covers the r = 0 case, where the integrand is
            // constant and the estimate is exact up to closed-form roundoff
            assert!(
                (mc.value - closed).abs() <= 3.0 * mc.std_error + 1e-12,
                "(n={n},c={c},t={t},r={r}): {} vs {closed}",
                mc.value
            );
        }
    }

    #[test]
    fn sphere_moment_values() {
        // sigma is a probability measure
        let eta0 = MultiIndex::new(vec![0.0, 0.0]).unwrap();
        assert_close(sphere_moment(&eta0).unwrap(), 1.0, 1e-13, "eta = 0");
        // n = 1: |zeta| = 1 on the circle
        let eta1 = MultiIndex::new(vec![1.0]).unwrap();
        assert_close(sphere_moment(&eta1).unwrap(), 1.0, 1e-13, "n = 1");
        // n = 2, eta = (1,0): Gamma(3/2)/Gamma(5/2) = 2/3
        let eta = MultiIndex::new(vec![1.0, 0.0]).unwrap();
        assert_close(sphere_moment(&eta).unwrap(), 2.0 / 3.0, 1e-13, "(1,0)");
        assert!(MultiIndex::new(vec![-1.0, 0.0]).is_err());
    }

    #[test]
    fn ball_moment_values() {
        let p = Params::new(2, 0.0).unwrap();
        let eta0 = MultiIndex::new(vec![0.0, 0.0]).unwrap();
        assert_close(ball_moment(&eta0, &p).unwrap(), 1.0, 1e-13, "eta = 0");
        // (2,0): Gamma(3)Gamma(2)/Gamma(4) = 1/3
        let eta = MultiIndex::new(vec![2.0, 0.0]).unwrap();
        assert_close(ball_moment(&eta, &p).unwrap(), 1.0 / 3.0, 1e-13, "(2,0)");
        // the Lemma-ika ingredient at k = 1: Gamma(3)Gamma(3/2)Gamma(2)/Gamma(4.5)
        let eta = MultiIndex::new(vec![2.0, 1.0]).unwrap();
        let want = (specfun::log_gamma(3.0).unwrap() + specfun::log_gamma(1.5).unwrap()
            + specfun::log_gamma(2.0).unwrap()
            - specfun::log_gamma(4.5).unwrap())
        .exp();
        assert_close(ball_moment(&eta, &p).unwrap(), want, 1e-12, "(2,1)");
        assert!(ball_moment(&MultiIndex::new(vec![1.0]).unwrap(), &p).is_err());
    }

    #[test]
    fn moment_formulas_against_mc() {
        let spec = spec_n(100_000);
        let p = Params::new(2, 0.0).unwrap();
        for entries in [vec![1.0, 0.0], vec![2.0, 1.0], vec![0.5, 0.5]] {
            let eta = MultiIndex::new(entries.clone()).unwrap();
            let closed = ball_moment(&eta, &p).unwrap();
            let e = entries.clone();
            let mc = crate::integrate::mc_integrate(
                move |w: &Point| {
                    w.coords
                        .iter()
                        .zip(&e)
                        .map(|(c, k)| c.abs().powf(*k))
                        .product()
                },
                &p,
                &spec,
            )
            .unwrap();
            assert!(
                mc.within_sigma(closed, 3.0),
                "ball {entries:?}: {} vs {closed}",
                mc.value
            );
        }
    }

    #[test]
    fn ika_series_terms_match_hypergeometric_terms() {
        // binom(-theta/2, k)^2 * ball_moment((2k,1,0,...)) equals
        // prefactor * (s)_k^2 / ((c)_k k!) term by term
        for &(n, alpha) in &[(2usize, 0.0), (2, 1.0), (3, 0.5)] {
            let p = Params::new(n, alpha).unwrap();
            let s = p.theta / 2.0;
            let c = p.alpha + p.nf() + 1.5;
            let pref = (specfun::log_gamma(1.5).unwrap()
                + specfun::log_gamma(1.0 + p.alpha + p.nf()).unwrap()
                - specfun::log_gamma(c).unwrap())
            .exp();
            for k in 0..30u32 {
                let mut entries = vec![0.0; n];
                entries[0] = 2.0 * k as f64;
                entries[1] = 1.0;
                let eta = MultiIndex::new(entries).unwrap();
                let lhs = specfun::real_binomial(-p.theta / 2.0, k).powi(2)
                    * ball_moment(&eta, &p).unwrap();
                let rhs = pref * specfun::pochhammer(s, k).powi(2)
                    / (specfun::pochhammer(c, k) * specfun::pochhammer(1.0, k));
                assert_close(lhs, rhs, 1e-11, &format!("({n},{alpha}) term {k}"));
            }
        }
    }

    #[test]
    fn endpoints_closed_forms() {
        let p = Params::new(2, 0.0).unwrap();
        let (e0, e1) = ell_endpoints(&p).unwrap();
        assert_close(e0, 6.0, 1e-12, "ell(0)");
        assert_close(e1, 3.0 * PI, 1e-12, "ell(pi/2)");
        // the ratio is pi/2 by construction
        assert_close(e1 / e0, PI / 2.0, 1e-14, "ratio");
        // fractional weights exercise the series route too
        for &(n, alpha) in &[(2usize, 1.0), (3, 0.5), (2, -0.3)] {
            let p = Params::new(n, alpha).unwrap();
            let (e0, e1) = ell_endpoints(&p).unwrap();
            assert_close(e0, p.c_const, 1e-12, "ell(0) = C");
            assert_close(e1, PI / 2.0 * p.c_const, 1e-12, "ell(pi/2)");
        }
    }

    #[test]
    fn ell_requires_dimension_two() {
        let p = Params::new(1, 0.0).unwrap();
        assert!(ell(0.3, &p, &spec_n(1_600)).is_err());
    }

    #[test]
    fn ell_hits_endpoints() {
        let p = Params::new(2, 0.0).unwrap();
        let spec = spec_n(150_000);
        let e0 = ell(0.0, &p, &spec).unwrap();
        assert!(e0.within_sigma(6.0, 3.0), "{e0:?}");
        let e1 = ell(PI / 2.0, &p, &spec).unwrap();
        assert!(e1.within_sigma(3.0 * PI, 3.0), "{e1:?}");
    }

    #[test]
    fn ell_reduction_consistency() {
        // full-dimension (no reduction) vs reduced at (3, 0.5)
        let p = Params::new(3, 0.5).unwrap();
        let spec = spec_n(80_000);
        let reduced = ell(0.7, &p, &spec).unwrap();
        let full = ell(0.7, &p, &spec.with_seed(99).without_reduction()).unwrap();
        assert!(
            reduced.agrees_with(&full, 3.0),
            "reduced {} vs full {}",
            reduced.value,
            full.value
        );
    }

    #[test]
    fn scan_shape_and_bounds() {
        let p = Params::new(2, 0.0).unwrap();
        let spec = spec_n(100_000);
        let scan = ell_scan(&p, 9, &spec).unwrap();
        assert_eq!(scan.rows.len(), 9);
        assert_eq!(scan.rows[0].t, 0.0);
        assert_close(scan.rows[8].t, PI / 2.0, 1e-14, "grid end");
        for row in &scan.rows {
            assert!(
                row.estimate <= row.upper_bound + 3.0 * row.std_error,
                "triangle bound at t={}: {} vs {}",
                row.t,
                row.estimate,
                row.upper_bound
            );
            assert!(
                row.estimate >= row.lower_bound - 3.0 * row.std_error,
                "symmetrization bound at t={}",
                row.t
            );
        }
        assert!(scan.max_value <= scan.upper_bound + 3.0 * scan.max_std_error);
        assert!(scan.max_value >= scan.conjecture_value - 2.0 * scan.max_std_error);
        assert!(ell_scan(&p, 5, &spec).is_err(), "grid too coarse");
    }

    #[test]
    fn scan_argmax_stable_under_doubling() {
        let p = Params::new(2, 0.0).unwrap();
        let a = ell_scan(&p, 13, &spec_n(50_000)).unwrap();
        let b = ell_scan(&p, 13, &spec_n(100_000)).unwrap();
        assert_eq!(a.argmax_t.to_bits(), b.argmax_t.to_bits());
    }

    #[test]
    fn norm_bound_values() {
        let p = Params::new(1, 0.0).unwrap();
        let b = norm_bounds(&p);
        assert_close(b.beta_lower, 8.0 / PI, 1e-13, "beta lower");
        assert_close(b.beta_upper, 1.0 + 8.0 / PI, 1e-13, "beta upper");

        let p = Params::new(2, 0.0).unwrap();
        let b = norm_bounds(&p);
        assert_close(b.beta_lower, 6.0, 1e-13, "n=2 beta lower");
        assert_close(b.beta_upper, 7.0, 1e-13, "n=2 beta upper");
        assert_close(b.invariant_lower, 3.0 * PI, 1e-13, "n=2 invariant lower");
        assert_close(
            b.invariant_upper,
            1.0 + 3.0 * (PI * PI + 4.0).sqrt(),
            1e-13,
            "n=2 invariant upper",
        );
        assert!(b.beta_lower <= b.beta_upper && b.invariant_lower <= b.invariant_upper);
    }
}
