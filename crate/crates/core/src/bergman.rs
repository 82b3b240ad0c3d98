//! The weighted Bergman kernel, the projection `P_alpha` by Monte Carlo
//! quadrature, its gradient and invariant gradient, the comparison
//! functions `F_zeta`, the extremal symbols `g_k` with their limits `G_k`,
//! and the boundary integral `Phi`.
//!
//! The kernel is `K(z, w) = (1 - <z,w>)^{-(n+1+alpha)}`; since
//! `Re(1 - <z,w>) > 0` on `B x B`, the principal branch of the power is
//! well defined and positive on positive reals.

use crate::ballgeom::{dot, inner, Automorphism, Params, Point};
use crate::complex::{Complex, ONE};
use crate::error::{Error, Result};
use crate::integrate::{
    mc_integrate_vector, stratified_singular_vector, ComplexEstimate, Execution, IntegralEstimate,
    Method, QuadratureSpec, SamplerKind, VectorIntegrand,
};
use std::sync::Arc;

/// A bounded measurable symbol `g` on the ball, with a flag recording a
/// certified bound `||g||_inf <= 1`.
#[derive(Clone)]
pub struct Symbol {
    f: Arc<dyn Fn(&Point) -> Complex + Send + Sync>,
    pub unimodular: bool,
}

impl Symbol {
    pub fn from_fn<F: Fn(&Point) -> Complex + Send + Sync + 'static>(
        f: F,
        unimodular: bool,
    ) -> Self {
        Self {
            f: Arc::new(f),
            unimodular,
        }
    }

    pub fn constant(c: Complex) -> Self {
        let bounded = c.abs() <= 1.0;
        Self::from_fn(move |_| c, bounded)
    }

    /// The coordinate symbol `w -> w_j` (0-indexed).
    pub fn coordinate(j: usize) -> Self {
        Self::from_fn(move |w| w.coords[j], true)
    }

    pub fn conj_coordinate(j: usize) -> Self {
        Self::from_fn(move |w| w.coords[j].conj(), true)
    }

    pub fn eval(&self, w: &Point) -> Complex {
        (self.f)(w)
    }
}

/// A complex gradient vector with its Euclidean norm (which equals the
/// maximum of `|<grad, zeta>|` over unit `zeta`).
#[derive(Debug, Clone)]
pub struct GradientValue {
    pub vector: Vec<Complex>,
    pub norm: f64,
}

impl GradientValue {
    fn new(vector: Vec<Complex>) -> Self {
        let norm = vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        Self { vector, norm }
    }
}

/// Monte Carlo estimate of a complex vector (componentwise errors).
#[derive(Debug, Clone)]
pub struct VectorEstimate {
    pub components: Vec<ComplexEstimate>,
}

impl VectorEstimate {
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.value().norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// First-order propagated standard error of the norm.
    pub fn norm_std_error(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return self
                .components
                .iter()
                .map(|c| c.std_error_re.powi(2) + c.std_error_im.powi(2))
                .sum::<f64>()
                .sqrt();
        }
        let mut acc = 0.0;
        for c in &self.components {
            acc += (c.re * c.std_error_re).powi(2) + (c.im * c.std_error_im).powi(2);
        }
        acc.sqrt() / n
    }
}

fn check_in_ball(label: &str, z: &Point) -> Result<()> {
    if !z.is_in_ball() {
        return Err(Error::domain(format!("{label} must satisfy |z| < 1")));
    }
    Ok(())
}

fn check_unit(label: &str, zeta: &Point) -> Result<()> {
    if !zeta.is_on_sphere() {
        return Err(Error::precondition(format!(
            "{label} must be a unit vector, |.| = {}",
            zeta.norm()
        )));
    }
    Ok(())
}

/// The weighted Bergman kernel `K(z, w) = (1 - <z,w>)^{-(n+1+alpha)}`.
pub fn kernel(z: &Point, w: &Point, p: &Params) -> Result<Complex> {
    check_in_ball("z", z)?;
    check_in_ball("w", w)?;
    let base = ONE - inner(z, w)?;
    Ok(base.powf(-p.theta))
}

/// Holomorphic gradient of the kernel in `z`:
/// `(1+n+alpha) conj(w) (1 - <z,w>)^{-(n+2+alpha)}`.
pub fn kernel_gradient(z: &Point, w: &Point, p: &Params) -> Result<GradientValue> {
    check_in_ball("z", z)?;
    check_in_ball("w", w)?;
    let base = ONE - inner(z, w)?;
    let factor = base.powf(-(p.theta + 1.0)).scale(p.theta);
    Ok(GradientValue::new(
        w.coords.iter().map(|c| c.conj() * factor).collect(),
    ))
}

struct ComplexIntegrand<F>(F);

impl<F: Fn(&Point) -> Complex + Sync> VectorIntegrand for ComplexIntegrand<F> {
    fn dim(&self) -> usize {
        2
    }
    fn eval(&self, w: &Point, _aux: &[f64], out: &mut [f64]) {
        let v = (self.0)(w);
        out[0] = v.re;
        out[1] = v.im;
    }
}

struct ComplexVectorIntegrand<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&Point, &mut [Complex]) + Sync> VectorIntegrand for ComplexVectorIntegrand<F> {
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn eval(&self, w: &Point, _aux: &[f64], out: &mut [f64]) {
        let mut buf = vec![Complex::new(0.0, 0.0); self.n];
        (self.f)(w, &mut buf);
        for (j, c) in buf.iter().enumerate() {
            out[2 * j] = c.re;
            out[2 * j + 1] = c.im;
        }
    }
}

fn pack_complex(est: &[IntegralEstimate]) -> ComplexEstimate {
    ComplexEstimate {
        re: est[0].value,
        im: est[1].value,
        std_error_re: est[0].std_error,
        std_error_im: est[1].std_error,
        samples: est[0].samples,
        method: est[0].method,
    }
}

fn pack_vector(est: &[IntegralEstimate], n: usize) -> VectorEstimate {
    VectorEstimate {
        components: (0..n)
            .map(|j| ComplexEstimate {
                re: est[2 * j].value,
                im: est[2 * j + 1].value,
                std_error_re: est[2 * j].std_error,
                std_error_im: est[2 * j + 1].std_error,
                samples: est[2 * j].samples,
                method: est[2 * j].method,
            })
            .collect(),
    }
}

/// `P_alpha g(z) = int K(z, w) g(w) dv_alpha(w)` by plain Monte Carlo.
pub fn project(g: &Symbol, z: &Point, p: &Params, spec: &QuadratureSpec) -> Result<ComplexEstimate> {
    check_in_ball("z", z)?;
    let z = z.clone();
    let g = g.clone();
    let p_copy = *p;
    let est = mc_integrate_vector(
        &ComplexIntegrand(move |w: &Point| {
            let base = ONE - inner(&z, w).unwrap();
            base.powf(-p_copy.theta) * g.eval(w)
        }),
        p,
        SamplerKind::BallValpha,
        spec,
    )?;
    Ok(pack_complex(&est))
}

/// Gradient of the projection, `int grad_z K(z, w) g(w) dv_alpha(w)`.
pub fn project_gradient(
    g: &Symbol,
    z: &Point,
    p: &Params,
    spec: &QuadratureSpec,
) -> Result<VectorEstimate> {
    check_in_ball("z", z)?;
    let zc = z.clone();
    let g = g.clone();
    let p_copy = *p;
    let n = p.n;
    let est = mc_integrate_vector(
        &ComplexVectorIntegrand {
            n,
            f: move |w: &Point, out: &mut [Complex]| {
                let base = ONE - inner(&zc, w).unwrap();
                let factor = base.powf(-(p_copy.theta + 1.0)).scale(p_copy.theta);
                let gv = g.eval(w);
                for (j, c) in w.coords.iter().enumerate() {
                    out[j] = c.conj() * factor * gv;
                }
            },
        },
        p,
        SamplerKind::BallValpha,
        spec,
    )?;
    Ok(pack_vector(&est, n))
}

fn stratify_for(spec: &QuadratureSpec, z_norm: f64) -> bool {
    spec.stratify && z_norm > 0.9
}

fn singular_center(z: &Point) -> Option<Point> {
    let norm = z.norm();
    if norm == 0.0 {
        return None;
    }
    let unit = z.scale(1.0 / norm);
    // e_1 needs no rotation
    let is_e1 = unit.coords[0].im == 0.0
        && (unit.coords[0].re - 1.0).abs() < 1e-14
        && unit.coords.iter().skip(1).all(|c| c.abs() < 1e-14);
    if is_e1 {
        None
    } else {
        Some(unit)
    }
}

fn scalar_estimate<F: Fn(&Point) -> f64 + Sync>(
    f: F,
    p: &Params,
    spec: &QuadratureSpec,
    stratify: bool,
    center: Option<&Point>,
    q: f64,
) -> Result<IntegralEstimate> {
    struct S<F>(F);
    impl<F: Fn(&Point) -> f64 + Sync> VectorIntegrand for S<F> {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, w: &Point, _aux: &[f64], out: &mut [f64]) {
            out[0] = (self.0)(w);
        }
    }
    if stratify {
        Ok(stratified_singular_vector(
            &S(f),
            p,
            center,
            q,
            spec,
            Execution::Auto,
            Method::McStratified,
        )?[0])
    } else {
        Ok(mc_integrate_vector(&S(f), p, SamplerKind::BallValpha, spec)?[0])
    }
}

/// The comparison function
/// `F_zeta(z) = (1+n+alpha) int (1-|z|^2) |<w, conj zeta>| / |1-<z,w>|^{n+2+alpha} dv_alpha(w)`,
/// stratified near the boundary (`|z| > 0.9`).
pub fn f_zeta(z: &Point, zeta: &Point, p: &Params, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    check_in_ball("z", z)?;
    check_unit("zeta", zeta)?;
    let one_minus_z2 = 1.0 - z.norm_sqr();
    let exponent = p.theta + 1.0; // n + 2 + alpha
    let pref = p.theta * one_minus_z2;
    let zc = z.clone();
    let zetac = zeta.clone();
    let f = move |w: &Point| {
        let base = ONE - inner(&zc, w).unwrap();
        pref * dot(w, &zetac).unwrap().abs() * base.abs_powf(-exponent)
    };
    scalar_estimate(
        f,
        p,
        spec,
        stratify_for(spec, z.norm()),
        singular_center(z).as_ref(),
        exponent,
    )
}

/// The Mobius-transformed representation of the same quantity:
/// `F_zeta(z) = (1+n+alpha) int |<phi_z(omega), conj zeta>| / |1-<z,omega>|^{n+alpha} dv_alpha(omega)`.
pub fn f_zeta_transformed(
    z: &Point,
    zeta: &Point,
    p: &Params,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    check_in_ball("z", z)?;
    check_unit("zeta", zeta)?;
    let exponent = p.theta - 1.0; // n + alpha
    let auto = Automorphism::new(z.clone())?;
    let zc = z.clone();
    let zetac = zeta.clone();
    let theta = p.theta;
    let f = move |w: &Point| {
        let phi_w = crate::ballgeom::mobius_apply(&auto, w).unwrap();
        let base = ONE - inner(&zc, w).unwrap();
        theta * dot(&phi_w, &zetac).unwrap().abs() * base.abs_powf(-exponent)
    };
    scalar_estimate(
        f,
        p,
        spec,
        stratify_for(spec, z.norm()),
        singular_center(z).as_ref(),
        exponent,
    )
}

/// Invariant gradient of `f = P_alpha g` at `a`:
/// `theta int (conj w - conj a) (1 - <a,w>)^theta g(phi_a(w)) / |1 - <w,a>|^{2 theta} dv_alpha(w)`.
/// The prefactor `(1-|a|^2)^{theta - n - 1 - alpha}` is identically 1 since
/// `theta = n + 1 + alpha`.
pub fn invariant_gradient(
    g: &Symbol,
    a: &Point,
    p: &Params,
    spec: &QuadratureSpec,
) -> Result<VectorEstimate> {
    check_in_ball("a", a)?;
    let auto = Automorphism::new(a.clone())?;
    let ac = a.clone();
    let g = g.clone();
    let theta = p.theta;
    let n = p.n;
    let est = mc_integrate_vector(
        &ComplexVectorIntegrand {
            n,
            f: move |w: &Point, out: &mut [Complex]| {
                let base = ONE - inner(&ac, w).unwrap(); // 1 - <a, w>
                let phi_w = crate::ballgeom::mobius_apply(&auto, w).unwrap();
                let gv = g.eval(&phi_w);
                // |1 - <w,a>|^{2 theta} = |1 - <a,w>|^{2 theta}
                let denom = base.norm_sqr().powf(theta);
                let factor = base.powf(theta) * gv * (theta / denom);
                for (j, (wk, ak)) in w.coords.iter().zip(&ac.coords).enumerate() {
                    out[j] = (wk.conj() - ak.conj()) * factor;
                }
            },
        },
        p,
        SamplerKind::BallValpha,
        spec,
    )?;
    Ok(pack_vector(&est, n))
}

/// The unimodular extremal symbol of index k:
/// `g_k(w) = (w_1/|w_1|) |1 - <z_k,w>|^{n+2+alpha} / (1 - <w,z_k>)^{n+2+alpha}`
/// with `z_k = (k/(k+1)) e_1`; the measure-zero set `w_1 = 0` maps to 0.
pub fn extremal_symbol(k: u32, p: &Params) -> Result<Symbol> {
    if k < 1 {
        return Err(Error::precondition("extremal symbol index k >= 1".to_string()));
    }
    let r = k as f64 / (k as f64 + 1.0);
    let e = p.theta + 1.0;
    Ok(Symbol::from_fn(
        move |w| {
            let w1 = w.coords[0];
            let a = w1.abs();
            if a == 0.0 {
                return Complex::new(0.0, 0.0);
            }
            let phase = w1.scale(1.0 / a);
            // <w, z_k> = r w_1 and |1 - <z_k,w>| = |1 - r w_1|
            let base = ONE - w1.scale(r);
            phase * base.powf(-e).scale(base.abs_powf(e))
        },
        true,
    ))
}

/// `G_k = (1+n+alpha) int (1-|z_k|^2) |w_1| / |1 - <z_k,w>|^{n+2+alpha} dv_alpha(w)`,
/// the gradient pairing of the extremal symbol; converges to the sharp
/// constant as k grows. Stratified for large k (`|z_k| > 0.9`).
pub fn g_limit(k: u32, p: &Params, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    if k < 1 {
        return Err(Error::precondition("G_k needs k >= 1".to_string()));
    }
    let r = k as f64 / (k as f64 + 1.0);
    let exponent = p.theta + 1.0;
    let pref = p.theta * (1.0 - r * r);
    let f = move |w: &Point| {
        let w1 = w.coords[0];
        let base = ONE - w1.scale(r);
        pref * w1.abs() * base.abs_powf(-exponent)
    };
    scalar_estimate(f, p, spec, stratify_for(spec, r), None, exponent)
}

/// The boundary integral of the final remark,
/// `Phi(zeta) = int (conj w - conj zeta)(1 - <zeta,w>)^{n+1+alpha} / |1 - <w,zeta>|^{2(n+1+alpha)} dv_alpha(w)`,
/// which vanishes identically on the sphere. Always stratified (the
/// integrand has infinite plain-MC variance).
pub fn phi_boundary(zeta: &Point, p: &Params, spec: &QuadratureSpec) -> Result<VectorEstimate> {
    check_unit("zeta", zeta)?;
    let zetac = zeta.clone();
    let theta = p.theta;
    let n = p.n;
    let integrand = ComplexVectorIntegrand {
        n,
        f: move |w: &Point, out: &mut [Complex]| {
            let base = ONE - inner(&zetac, w).unwrap(); // 1 - <zeta, w>
            let denom = base.norm_sqr().powf(theta); // |1 - <w,zeta>|^{2 theta}
            let factor = base.powf(theta).scale(1.0 / denom);
            for (j, (wk, zk)) in w.coords.iter().zip(&zetac.coords).enumerate() {
                out[j] = (wk.conj() - zk.conj()) * factor;
            }
        },
    };
    let center = singular_center(zeta);
    let est = if spec.stratify {
        stratified_singular_vector(
            &integrand,
            p,
            center.as_ref(),
            p.theta,
            spec,
            Execution::Auto,
            Method::McStratified,
        )?
    } else {
        mc_integrate_vector(&integrand, p, SamplerKind::BallValpha, spec)?
    };
    Ok(pack_vector(&est, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use crate::rng::SplitMix64;
    use crate::specfun::{elliptic_e, EllipticParam};

    fn spec_n(samples: u64) -> QuadratureSpec {
        QuadratureSpec::new(42, samples, 16).unwrap()
    }

    fn assert_close(got: f64, want: f64, tol: f64, msg: &str) {
        assert!(
            (got - want).abs() <= tol * (1.0 + want.abs()),
            "{msg}: got {got}, want {want}"
        );
    }

    fn random_ball_point(n: usize, cap: f64, rng: &mut SplitMix64) -> Point {
        let p = Params::new(n, 0.0).unwrap();
        let w = crate::integrate::sample_ball_valpha(&p, rng);
        w.scale(cap)
    }

    #[test]
    fn kernel_examples() {
        let p = Params::new(1, 0.0).unwrap();
        let z0 = Point::zero(1);
        let w = Point::real_e1(1, 0.3);
        let k = kernel(&z0, &w, &p).unwrap();
        assert_close(k.re, 1.0, 1e-14, "K(0, w) = 1");
        assert!(k.im.abs() < 1e-15);

        let z = Point::real_e1(1, 0.5);
        let k = kernel(&z, &z, &p).unwrap();
        assert_close(k.re, 0.75_f64.powi(-2), 1e-13, "K(0.5, 0.5)");
    }

    #[test]
    fn kernel_conjugate_symmetry() {
        let mut rng = SplitMix64::new(3, 0);
        let p = Params::new(2, 0.7).unwrap();
        for _ in 0..100 {
            let z = random_ball_point(2, 0.95, &mut rng);
            let w = random_ball_point(2, 0.95, &mut rng);
            let a = kernel(&z, &w, &p).unwrap();
            let b = kernel(&w, &z, &p).unwrap().conj();
            assert!((a.re - b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_gradient_examples() {
        let p = Params::new(1, 0.0).unwrap();
        let z = Point::real_e1(1, 0.5);
        let g = kernel_gradient(&z, &Point::zero(1), &p).unwrap();
        assert!(g.norm < 1e-15, "w = 0 gives the zero vector");

        let p2 = Params::new(2, 0.5).unwrap();
        let w = Point::new(vec![Complex::new(0.2, 0.1), Complex::new(-0.3, 0.0)]);
        let g = kernel_gradient(&Point::zero(2), &w, &p2).unwrap();
        for (gj, wj) in g.vector.iter().zip(&w.coords) {
            let want = wj.conj().scale(p2.theta);
            assert!((gj.re - want.re).abs() < 1e-13 && (gj.im - want.im).abs() < 1e-13);
        }

        let g = kernel_gradient(&z, &Point::real_e1(1, 0.5), &p).unwrap();
        assert_close(g.vector[0].re, 2.0 * 0.5 * 0.75_f64.powi(-3), 1e-12, "n=1 formula");
    }

    #[test]
    fn kernel_gradient_matches_finite_differences() {
        let p = Params::new(2, 0.5).unwrap();
        let mut rng = SplitMix64::new(17, 0);
        let h = 1e-6;
        for _ in 0..20 {
            let z = random_ball_point(2, 0.7, &mut rng);
            let w = random_ball_point(2, 0.7, &mut rng);
            let grad = kernel_gradient(&z, &w, &p).unwrap();
            for j in 0..2 {
                let mut zp = z.clone();
                zp.coords[j].re += h;
                let mut zm = z.clone();
                zm.coords[j].re -= h;
                let fd = (kernel(&zp, &w, &p).unwrap() - kernel(&zm, &w, &p).unwrap())
                    .scale(1.0 / (2.0 * h));
                let scale = grad.vector[j].abs().max(1.0);
                assert!(
                    (fd - grad.vector[j]).abs() <= 1e-6 * scale,
                    "component {j}: fd {fd:?} vs {:?}",
                    grad.vector[j]
                );
            }
        }
    }

    #[test]
    fn projection_reproduces_constants_and_monomials() {
        let p = Params::new(1, 0.0).unwrap();
        let spec = spec_n(100_000);
        let z = Point::real_e1(1, 0.5);

        let one = project(&Symbol::constant(ONE), &z, &p, &spec).unwrap();
        assert!((one.re - 1.0).abs() <= 3.0 * one.std_error_re + 1e-12);
        assert!(one.im.abs() <= 3.0 * one.std_error_im + 1e-12);

        // P reproduces holomorphic monomials: P[w_1](z) = z_1
        let coord = project(&Symbol::coordinate(0), &z, &p, &spec).unwrap();
        assert!(
            (coord.re - 0.5).abs() <= 3.0 * coord.std_error_re,
            "{coord:?}"
        );
        assert!(coord.im.abs() <= 3.0 * coord.std_error_im);

        // anti-holomorphic part is annihilated at z = 0
        let anti = project(&Symbol::conj_coordinate(0), &Point::zero(1), &p, &spec).unwrap();
        assert!(anti.modulus() <= 3.0 * anti.std_error_mod() + 1e-12, "{anti:?}");
    }

    #[test]
    fn f_zeta_at_center() {
        // n=1, alpha=0, z=0, zeta=1: 2 int |w| dv = 4/3
        let p = Params::new(1, 0.0).unwrap();
        let spec = spec_n(150_000);
        let est = f_zeta(&Point::zero(1), &Point::basis(1, 0), &p, &spec).unwrap();
        assert!(est.within_sigma(4.0 / 3.0, 3.0), "{est:?}");
    }

    #[test]
    fn f_zeta_bounded_by_sharp_constant() {
        let p = Params::new(2, 1.0).unwrap();
        let spec = spec_n(80_000);
        for &r in &[0.0, 0.4, 0.95] {
            let z = Point::real_e1(2, r);
            let est = f_zeta(&z, &Point::basis(2, 0), &p, &spec).unwrap();
            assert!(
                est.value <= p.c_const + 3.0 * est.std_error,
                "r={r}: {} vs C={}",
                est.value,
                p.c_const
            );
        }
    }

    #[test]
    fn f_zeta_transformed_agrees() {
        let spec = spec_n(120_000);
        // z = 0: phi_0 = -Id leaves |<., zeta>| invariant
        let p = Params::new(2, 0.0).unwrap();
        let z0 = Point::zero(2);
        let zeta = Point::basis(2, 0);
        let a = f_zeta(&z0, &zeta, &p, &spec).unwrap();
        let b = f_zeta_transformed(&z0, &zeta, &p, &spec.with_seed(77)).unwrap();
        assert!(a.agrees_with(&b, 3.0), "{} vs {}", a.value, b.value);

        // interior point, n = 1
        let p1 = Params::new(1, 0.0).unwrap();
        let z = Point::real_e1(1, 0.5);
        let zeta1 = Point::basis(1, 0);
        let a = f_zeta(&z, &zeta1, &p1, &spec).unwrap();
        let b = f_zeta_transformed(&z, &zeta1, &p1, &spec.with_seed(78)).unwrap();
        assert!(a.agrees_with(&b, 3.0), "{} vs {}", a.value, b.value);
    }

    #[test]
    fn invariant_gradient_of_constants_vanishes() {
        let p = Params::new(2, 0.5).unwrap();
        let spec = spec_n(60_000);
        let a = Point::real_e1(2, 0.4);
        let est = invariant_gradient(&Symbol::constant(ONE), &a, &p, &spec).unwrap();
        for c in &est.components {
            assert!(c.modulus() <= 3.0 * c.std_error_mod() + 1e-12, "{c:?}");
        }
    }

    #[test]
    fn invariant_gradient_one_dim_identity() {
        // n = 1: |grad~ f(a)| = (1-|a|^2) |grad f(a)|
        let p = Params::new(1, 0.0).unwrap();
        let spec = spec_n(150_000);
        let g = extremal_symbol(3, &p).unwrap();
        let a = Point::real_e1(1, 0.4);
        let inv = invariant_gradient(&g, &a, &p, &spec).unwrap();
        let grad = project_gradient(&g, &a, &p, &spec.with_seed(99)).unwrap();
        let lhs = inv.norm();
        let rhs = (1.0 - 0.16) * grad.norm();
        let sigma = (inv.norm_std_error().powi(2)
            + ((1.0 - 0.16) * grad.norm_std_error()).powi(2))
        .sqrt();
        assert!(
            (lhs - rhs).abs() <= 3.0 * sigma,
            "lhs {lhs} vs rhs {rhs} (sigma {sigma})"
        );
    }

    #[test]
    fn extremal_symbol_is_unimodular() {
        let p = Params::new(2, 0.5).unwrap();
        let g = extremal_symbol(4, &p).unwrap();
        assert!(g.unimodular);
        let mut rng = SplitMix64::new(23, 0);
        for _ in 0..200 {
            let w = random_ball_point(2, 0.97, &mut rng);
            if w.coords[0].abs() == 0.0 {
                continue;
            }
            let v = g.eval(&w).abs();
            assert!((v - 1.0).abs() < 1e-12, "|g_k| = {v}");
        }
        // real w with 0 < w_1 < 1: all factors positive real
        let w = Point::real_e1(2, 0.6);
        let v = g.eval(&w);
        assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-13);
        // w_1 = 0 maps to 0
        let w0 = Point::new(vec![Complex::new(0.0, 0.0), Complex::new(0.3, 0.0)]);
        assert_eq!(g.eval(&w0).abs(), 0.0);
    }

    #[test]
    fn extremal_integrand_is_nonnegative_real() {
        // <grad_z K(z_k, w) g_k(w), e_1> = theta |w_1| / |1 - r w_1|^{theta+1}
        let p = Params::new(2, 0.5).unwrap();
        let k = 5;
        let r = 5.0 / 6.0;
        let g = extremal_symbol(k, &p).unwrap();
        let z = Point::real_e1(2, r);
        let mut rng = SplitMix64::new(29, 0);
        for _ in 0..100 {
            let w = random_ball_point(2, 0.95, &mut rng);
            if w.coords[0].abs() < 1e-14 {
                continue;
            }
            let grad = kernel_gradient(&z, &w, &p).unwrap();
            let paired = grad.vector[0] * g.eval(&w); // <grad K * g, e_1>
            let base = ONE - w.coords[0].scale(r);
            let want = p.theta * w.coords[0].abs() * base.abs_powf(-(p.theta + 1.0));
            assert!(paired.im.abs() <= 1e-10 * want, "imaginary part {}", paired.im);
            assert_close(paired.re, want, 1e-10, "nonnegative real integrand");
        }
    }

    /// Deterministic disc-quadrature oracle for `F_{e_1}(r e_1)` at n=1,
    /// alpha=0. The angular integral has the closed elliptic form
    /// `int_0^{2pi} (A - B cos)^{-3/2} = 4 E(2B/(A+B)) / ((A-B) sqrt(A+B))`.
    fn f_e1_disc_oracle(r: f64) -> f64 {
        let integrand = |rho: f64| {
            let a = r * rho;
            let m = 4.0 * a / ((1.0 + a) * (1.0 + a));
            let e = elliptic_e(EllipticParam::new(m).unwrap()).unwrap();
            4.0 * rho * rho * e / ((1.0 - a) * (1.0 - a) * (1.0 + a))
        };
        let q = quad::tanh_sinh(0.0, 1.0, integrand, 1e-12);
        2.0 * (1.0 - r * r) / std::f64::consts::PI * q.value
    }

    #[test]
    fn g_k_matches_disc_quadrature_oracle() {
        let p = Params::new(1, 0.0).unwrap();
        let spec = spec_n(200_000);
        // G_k = F_{e_1}(z_k) for z_k = (k/(k+1)) e_1
        for k in [1u32, 3] {
            let r = k as f64 / (k as f64 + 1.0);
            let oracle = f_e1_disc_oracle(r);
            let est = g_limit(k, &p, &spec).unwrap();
            assert!(
                est.within_sigma(oracle, 3.0),
                "k={k}: {} vs oracle {}",
                est.value,
                oracle
            );
        }
    }

    #[test]
    fn boundary_surrogate_gap_is_borderline() {
        // The exact value at the r = 0.99 surrogate is F = 2.4187339003...,
        // i.e. 5.0165% below the limit 8/pi (cross-checked against a
        // 30-digit reference). A "within 5%" gate on this surrogate is
        // therefore unattainable no matter the sample budget; the r =
        // 0.995 point (k = 200 in the extremal sequence at n = 1) sits at
        // 2.996% and does converge inside 5%.
        let c = 8.0 / std::f64::consts::PI;
        let f = f_e1_disc_oracle(0.99);
        assert!(f <= c * (1.0 + 1e-9), "Lemma bound violated: {f} > {c}");
        assert!((f - 2.418_733_900_322_95).abs() < 1e-10, "oracle drifted: {f}");
        let gap = (c - f) / c;
        assert!(
            (gap - 0.050_165).abs() < 1e-4,
            "borderline gap moved: {:.4}%",
            100.0 * gap
        );
        let f995 = f_e1_disc_oracle(0.995);
        assert!((c - f995) / c < 0.05, "k=200 surrogate must converge inside 5%");
    }

    #[test]
    fn phi_boundary_vanishes() {
        let p = Params::new(1, 0.0).unwrap();
        let spec = spec_n(100_000);
        let est = phi_boundary(&Point::basis(1, 0), &p, &spec).unwrap();
        for c in &est.components {
            assert!(
                c.modulus() <= 3.0 * c.std_error_mod(),
                "Phi component {c:?} not within 3 sigma of 0"
            );
        }
        assert_eq!(est.components[0].method, Method::McStratified);
    }

    #[test]
    fn preconditions_are_enforced() {
        let p = Params::new(1, 0.0).unwrap();
        let outside = Point::real_e1(1, 1.0);
        assert!(kernel(&outside, &Point::zero(1), &p).is_err());
        assert!(f_zeta(&Point::zero(1), &Point::real_e1(1, 0.5), &p, &spec_n(1_600)).is_err());
        assert!(phi_boundary(&Point::real_e1(1, 0.5), &p, &spec_n(1_600)).is_err());
        assert!(extremal_symbol(0, &p).is_err());
    }
}
