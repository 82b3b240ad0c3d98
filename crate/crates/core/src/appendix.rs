//! Stationarity analysis behind the invariant-norm conjecture at
//! `(n, alpha) = (2, 0)`.
//!
//! The substitution `a_1 = w_2/(1-w_1)`, `a_2 = w_1` turns
//! `I(t) = ell(t)/3` into an integral of `|cos t + a_1 sin t|` over the
//! region `B' = { |a_1|^2 <= R0(a_2) }`, `R0 = (1-p^2)/(1+p^2-2p cos s)`
//! for `a_2 = p e^{is}`. The innermost angular integral is the
//! circumference `h(t; R)` of an ellipse with axes `cos t + R sin t` and
//! `|cos t - R sin t|`, available in closed elliptic form. Note the radial
//! variable runs up to `sqrt(R0)`: the region constraint bounds `|a_1|^2`,
//! not `|a_1|` (the normalization is validated against the endpoint values
//! `I(0) = 2`, `I(pi/2) = pi`).

use crate::ballgeom::{Params, Point};
use crate::complex::ONE;
use crate::error::{Error, Result};
use crate::integrate::{
    stratified_singular_vector, Execution, IntegralEstimate, Method, QuadratureSpec,
    VectorIntegrand,
};
use crate::quad;
use crate::rng::derive_seed;
use crate::specfun::{elliptic_e, elliptic_k, EllipticParam};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// `R0(p, s) = (1-p^2)/(1+p^2-2p cos s)`, the squared radial bound of the
/// `a_1` fibre. Blows up as `(p, s) -> (1, 0)`; callers integrate, never
/// evaluate at the corner.
pub fn r0(p: f64, s: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::domain(format!("R0 needs 0 < p < 1, got {p}")));
    }
    Ok((1.0 - p * p) / (1.0 + p * p - 2.0 * p * s.cos()))
}

/// Axes and squared eccentricity of the ellipse traced by
/// `|cos t + R e^{i sigma} sin t|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EllipseAxes {
    pub a_axis: f64,
    pub b_axis: f64,
    /// parameter `m = eps^2 = 2 R sin(2t) / (cos t + R sin t)^2`
    pub m: f64,
}

impl EllipseAxes {
    pub fn new(radius: f64, t: f64) -> Result<Self> {
        if radius < 0.0 || !(0.0..=FRAC_PI_2 + 1e-12).contains(&t) {
            return Err(Error::domain(format!(
                "ellipse axes need R >= 0 and t in [0, pi/2], got R = {radius}, t = {t}"
            )));
        }
        let a_axis = t.cos() + radius * t.sin();
        let b_axis = (t.cos() - radius * t.sin()).abs();
        let m = if a_axis == 0.0 {
            0.0
        } else {
            (2.0 * radius * (2.0 * t).sin() / (a_axis * a_axis)).clamp(0.0, 1.0)
        };
        Ok(Self { a_axis, b_axis, m })
    }
}

/// `h(t; R) = int_0^{2pi} |cos t + R e^{i sigma} sin t| d sigma` by
/// adaptive quadrature (1e-10 absolute).
pub fn h_direct(radius: f64, t: f64) -> f64 {
    let c = t.cos();
    let rs = radius * t.sin();
    // integrand is even around sigma = pi
    let q = quad::tanh_sinh(
        0.0,
        PI,
        |sigma| {
            let re = c + rs * sigma.cos();
            let im = rs * sigma.sin();
            re.hypot(im)
        },
        1e-12,
    );
    2.0 * q.value
}

/// The same circumference in closed form, `4 a E(m)`.
pub fn h_closed(radius: f64, t: f64) -> Result<f64> {
    let axes = EllipseAxes::new(radius, t)?;
    if axes.a_axis == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * axes.a_axis * elliptic_e(EllipticParam::new(axes.m)?)?)
}

/// The derivative display
/// `csc(2t) K(m) (-cos t + R sin t) + cot(2t) E(m) (cos t + R sin t)`.
///
/// Exploratory: the displayed expression differs from the numerical
/// derivative of `h_closed` by a constant factor (see
/// [`h_prime_consistency`]); its endpoint limits still vanish, which is
/// all the stationarity argument uses.
pub fn h_prime_closed(radius: f64, t: f64) -> Result<f64> {
    if !(0.0 < t && t < FRAC_PI_2) {
        return Err(Error::domain(
            "h' display is singular at the endpoints; use limits instead".to_string(),
        ));
    }
    let axes = EllipseAxes::new(radius, t)?;
    let m = EllipticParam::new(axes.m)?;
    let k = elliptic_k(m)?;
    let e = elliptic_e(m)?;
    let two_t = 2.0 * t;
    Ok(two_t.sin().recip() * k * (-t.cos() + radius * t.sin())
        + (two_t.cos() / two_t.sin()) * e * (t.cos() + radius * t.sin()))
}

/// Comparison of the displayed derivative against a Richardson-refined
/// central difference of `h_closed`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HPrimeCheck {
    pub radius: f64,
    pub t: f64,
    pub displayed: f64,
    pub finite_difference: f64,
    /// `finite_difference / displayed` (NaN when the display vanishes)
    pub ratio: f64,
}

pub fn h_prime_consistency(radius: f64, t: f64) -> Result<HPrimeCheck> {
    let displayed = h_prime_closed(radius, t)?;
    let fd = |h: f64| -> Result<f64> {
        Ok((h_closed(radius, t + h)? - h_closed(radius, t - h)?) / (2.0 * h))
    };
    // central differences are O(h^2); one Richardson step cancels it
    let coarse = fd(2e-4)?;
    let fine = fd(1e-4)?;
    let finite_difference = (4.0 * fine - coarse) / 3.0;
    Ok(HPrimeCheck {
        radius,
        t,
        displayed,
        finite_difference,
        ratio: finite_difference / displayed,
    })
}

struct SubstitutedIntegrand {
    t: f64,
}

impl VectorIntegrand for SubstitutedIntegrand {
    fn dim(&self) -> usize {
        1
    }
    fn aux(&self) -> usize {
        1
    }
    fn eval(&self, a2: &Point, aux: &[f64], out: &mut [f64]) {
        let z = a2.coords[0];
        let r0 = (1.0 - z.norm_sqr()) / (ONE - z).norm_sqr();
        // radial sub-sample: R^2 uniform on [0, R0]
        let radius = (r0 * aux[0]).sqrt();
        out[0] = r0 * h_closed(radius, self.t).unwrap() / PI;
    }
}

/// Monte Carlo estimate of `I(t) = ell(t)/3` at `(n, alpha) = (2, 0)`
/// through the substitution: `a_2` is sampled on the disc (stratified in
/// `|1 - a_2|`, the image of the kernel singularity), the `a_1`-fibre is
/// handled by the closed ellipse circumference plus one radial uniform.
pub fn i_of_t(t: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&t) {
        return Err(Error::domain(format!("I(t) needs t in [0, pi/2], got {t}")));
    }
    let disc = Params::new(1, 0.0)?;
    Ok(stratified_singular_vector(
        &SubstitutedIntegrand { t },
        &disc,
        None,
        2.0,
        spec,
        Execution::Auto,
        Method::McStratified,
    )?[0])
}

/// A one-sided finite-difference slope with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopeEstimate {
    pub step: f64,
    pub slope: f64,
    pub std_error: f64,
}

/// Stationarity evidence at the endpoints of `[0, pi/2]`.
#[derive(Debug, Clone, Serialize)]
pub struct StationarityReport {
    /// `I` at the evaluation angles (independent streams per angle)
    pub values: Vec<(f64, IntegralEstimate)>,
    pub slopes_at_zero: Vec<SlopeEstimate>,
    pub slopes_at_pi_half: Vec<SlopeEstimate>,
    /// Richardson extrapolation `2 S(h) - S(2h)` of the two smallest
    /// steps; cancels the O(h) truncation that a raw one-sided slope
    /// carries at a stationary point
    pub richardson_zero: SlopeEstimate,
    pub richardson_pi_half: SlopeEstimate,
    /// one-sided second difference at pi/2 (negative supports a maximum
    /// there; reported, never asserted)
    pub second_difference_pi_half: (f64, f64),
    /// endpoint limits of the displayed h' (they vanish)
    pub h_prime_limits: Vec<(f64, f64, f64)>,
}

const STATIONARITY_STEPS: [f64; 3] = [0.02, 0.04, 0.08];

/// One-sided slopes of `I` at 0 and pi/2 for steps 0.02/0.04/0.08, with a
/// Richardson check. Each angle uses an independent stream family so the
/// slope errors are honest.
pub fn stationarity_report(spec: &QuadratureSpec) -> Result<StationarityReport> {
    let mut angles = vec![0.0];
    for h in STATIONARITY_STEPS {
        angles.push(h);
    }
    for h in STATIONARITY_STEPS {
        angles.push(FRAC_PI_2 - h);
    }
    angles.push(FRAC_PI_2);

    let mut values = Vec::with_capacity(angles.len());
    for (idx, t) in angles.iter().enumerate() {
        let local = spec.with_seed(derive_seed(spec.seed, idx as u64));
        values.push((*t, i_of_t(*t, &local)?));
    }
    let est = |i: usize| values[i].1;

    let slope = |near: IntegralEstimate, far: IntegralEstimate, h: f64, sign: f64| SlopeEstimate {
        step: h,
        slope: sign * (far.value - near.value) / h,
        std_error: (far.std_error.powi(2) + near.std_error.powi(2)).sqrt() / h,
    };

    // layout: [0, 0.02, 0.04, 0.08, pi/2-0.02, pi/2-0.04, pi/2-0.08, pi/2]
    let at_zero: Vec<SlopeEstimate> = (0..3)
        .map(|i| slope(est(0), est(1 + i), STATIONARITY_STEPS[i], 1.0))
        .collect();
    let at_pi: Vec<SlopeEstimate> = (0..3)
        .map(|i| slope(est(4 + i), est(7), STATIONARITY_STEPS[i], 1.0))
        .collect();

    // Richardson on the two smallest steps: R = 2 S(h) - S(2h); the shared
    // endpoint evaluation is accounted for explicitly
    let richardson = |s_h: SlopeEstimate, s_2h: SlopeEstimate, shared_sigma: f64| {
        let h = s_h.step;
        let var_h = s_h.std_error.powi(2) - (shared_sigma / h).powi(2);
        let var_2h = s_2h.std_error.powi(2) - (shared_sigma / (2.0 * h)).powi(2);
        // 2 S(h) - S(2h) reuses the base point with net weight -2/h + 1/(2h)
        let base_w = -2.0 / h + 1.0 / (2.0 * h);
        let var = 4.0 * var_h.max(0.0) + var_2h.max(0.0) + (base_w * shared_sigma).powi(2);
        SlopeEstimate {
            step: h,
            slope: 2.0 * s_h.slope - s_2h.slope,
            std_error: var.sqrt(),
        }
    };
    let richardson_zero = richardson(at_zero[0], at_zero[1], est(0).std_error);
    let richardson_pi_half = richardson(at_pi[0], at_pi[1], est(7).std_error);

    // one-sided second difference at pi/2 with h = 0.04:
    // (I(pi/2) - 2 I(pi/2-h) + I(pi/2-2h)) / h^2
    let h = 0.04;
    let d2 = (est(7).value - 2.0 * est(4).value + est(5).value) / (h * h);
    let d2_sigma = (est(7).std_error.powi(2)
        + 4.0 * est(4).std_error.powi(2)
        + est(5).std_error.powi(2))
    .sqrt()
        / (h * h);

    let mut h_prime_limits = Vec::new();
    for radius in [0.25, 1.0, 2.5] {
        for t in [1e-4, FRAC_PI_2 - 1e-4] {
            h_prime_limits.push((radius, t, h_prime_closed(radius, t)?));
        }
    }

    Ok(StationarityReport {
        values,
        slopes_at_zero: at_zero,
        slopes_at_pi_half: at_pi,
        richardson_zero,
        richardson_pi_half,
        second_difference_pi_half: (d2, d2_sigma),
        h_prime_limits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn r0_values() {
        // s = pi: (1-p)/(1+p)
        for &p in &[0.2, 0.5, 0.9] {
            assert_close(r0(p, PI).unwrap(), (1.0 - p) / (1.0 + p), 1e-13, "s = pi");
        }
        // p -> 0: R0 -> 1
        assert_close(r0(1e-9, 1.3).unwrap(), 1.0, 1e-8, "p -> 0");
        assert_close(r0(0.5, FRAC_PI_2).unwrap(), 0.6, 1e-14, "p=1/2, s=pi/2");
        assert!(r0(0.0, 1.0).is_err());
        assert!(r0(1.0, 1.0).is_err());
    }

    #[test]
    fn h_direct_degenerate_cases() {
        assert_close(h_direct(0.7, 0.0), 2.0 * PI, 1e-10, "t = 0");
        assert_close(h_direct(0.7, FRAC_PI_2), 2.0 * PI * 0.7, 1e-10, "t = pi/2");
    }

    #[test]
    fn h_closed_matches_direct() {
        assert_close(h_closed(1.0, PI / 4.0).unwrap(), h_direct(1.0, PI / 4.0), 1e-9, "R=1");
        assert_close(h_closed(0.5, 1.0).unwrap(), h_direct(0.5, 1.0), 1e-9, "R=1/2");
        assert_close(h_closed(0.0, 0.3).unwrap(), 2.0 * PI * 0.3_f64.cos(), 1e-10, "circle");
        assert_close(h_closed(0.0, 0.0).unwrap(), 2.0 * PI, 1e-12, "t = 0");
    }

    #[test]
    fn h_dual_route_grid() {
        // 20 x 20 grid, R in [0,3], t in [0, pi/2]: max deviation <= 1e-9
        let mut max_dev = 0.0_f64;
        for i in 0..20 {
            for j in 0..20 {
                let radius = 3.0 * i as f64 / 19.0;
                let t = FRAC_PI_2 * j as f64 / 19.0;
                let dev = (h_closed(radius, t).unwrap() - h_direct(radius, t)).abs();
                max_dev = max_dev.max(dev);
            }
        }
        assert!(max_dev <= 1e-9, "max deviation {max_dev:e}");
    }

    #[test]
    fn ellipse_axes_invariants() {
        for i in 0..15 {
            for j in 0..=15 {
                let radius = 3.0 * i as f64 / 14.0;
                let t = FRAC_PI_2 * j as f64 / 15.0;
                let axes = EllipseAxes::new(radius, t).unwrap();
                assert!(axes.a_axis >= axes.b_axis - 1e-15);
                assert!((0.0..=1.0).contains(&axes.m), "m = {}", axes.m);
            }
        }
        assert!(EllipseAxes::new(-0.1, 0.3).is_err());
    }

    #[test]
    fn h_prime_display_scales_like_the_derivative() {
        // the displayed expression tracks h'/4; both the ratio and the
        // endpoint limits are what the stationarity argument needs
        for &(radius, t) in &[(0.5, 0.7), (1.5, 0.4), (0.8, 1.2)] {
            let check = h_prime_consistency(radius, t).unwrap();
            assert!(
                (check.ratio - 4.0).abs() < 1e-4,
                "fd/displayed = {} at (R={radius}, t={t})",
                check.ratio
            );
        }
        assert!(h_prime_closed(0.5, 0.0).is_err());
        assert!(h_prime_closed(0.5, FRAC_PI_2).is_err());
    }

    #[test]
    fn h_prime_endpoint_limits_vanish() {
        for &radius in &[0.25, 1.0, 2.5] {
            let near_zero = h_prime_closed(radius, 1e-5).unwrap();
            let near_pi2 = h_prime_closed(radius, FRAC_PI_2 - 1e-5).unwrap();
            assert!(near_zero.abs() < 1e-3, "t->0 limit: {near_zero}");
            assert!(near_pi2.abs() < 1e-3, "t->pi/2 limit: {near_pi2}");
        }
    }

    #[test]
    fn i_endpoint_values() {
        let spec = spec_n(120_000);
        let i0 = i_of_t(0.0, &spec).unwrap();
        assert!(i0.within_sigma(2.0, 3.0), "I(0): {i0:?}");
        let ipi2 = i_of_t(FRAC_PI_2, &spec).unwrap();
        assert!(ipi2.within_sigma(PI, 3.0), "I(pi/2): {ipi2:?}");
    }

    #[test]
    fn i_matches_ell_at_interior_angle() {
        let spec = spec_n(150_000);
        let p = Params::new(2, 0.0).unwrap();
        let t = PI / 4.0;
        let i = i_of_t(t, &spec).unwrap();
        let l = crate::norms::ell(t, &p, &spec.with_seed(7)).unwrap();
        let scaled = IntegralEstimate {
            value: 3.0 * i.value,
            std_error: 3.0 * i.std_error,
            samples: i.samples,
            method: i.method,
        };
        assert!(
            scaled.agrees_with(&l, 3.0),
            "3 I = {} vs ell = {}",
            scaled.value,
            l.value
        );
    }

    #[test]
    fn stationarity_slopes_vanish() {
        let spec = spec_n(100_000);
        let report = stationarity_report(&spec).unwrap();
        for s in [&report.richardson_zero, &report.richardson_pi_half] {
            assert!(
                s.slope.abs() <= 3.0 * s.std_error,
                "Richardson slope {} +- {}",
                s.slope,
                s.std_error
            );
        }
        for (_, _, v) in &report.h_prime_limits {
            assert!(v.abs() < 1e-2, "h' endpoint limit {v}");
        }
    }
}
