//! The unit ball of `C^n`, its weighted probability measures `v_alpha`, and
//! the Mobius automorphism machinery.
//!
//! `v_alpha` is the probability measure `c_alpha (1-|z|^2)^alpha dv` on the
//! ball, `c_alpha = C(n+alpha, n)`, with `dv` the volume measure normalized
//! to `v(B) = 1`. The automorphism `phi_a` swaps `0` and `a`; by convention
//! `phi_0 = -Id`, which keeps the involution property literal.

use crate::complex::{Complex, ONE, ZERO};
use crate::error::{Error, Result};
use crate::specfun;
use serde::Serialize;

/// How close to the unit sphere automorphism base points may get. The
/// extremal sequence uses `a_k = k/(k+1) e_1`, which stays inside this
/// guard for k up to 1e8.
pub const BASE_POINT_GUARD: f64 = 1e-9;

/// Below this modulus the base point is treated as 0 (`phi_0 = -Id`).
pub const ZERO_BASE_THRESHOLD: f64 = 1e-14;

/// Dimension and weight `(n, alpha)` with the derived constants every
/// closed form needs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Params {
    pub n: usize,
    pub alpha: f64,
    /// Normalizing constant `c_alpha = C(n+alpha, n)` of `v_alpha`.
    pub c_alpha: f64,
    /// `theta = n + 1 + alpha`, the kernel exponent.
    pub theta: f64,
    /// `theta' = c_alpha * theta`.
    pub theta_prime: f64,
    /// `C = Gamma(2+n+alpha) / Gamma((2+n+alpha)/2)^2`, the sharp
    /// Bloch-seminorm constant.
    pub c_const: f64,
}

impl Params {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::precondition("dimension n must be >= 1".to_string()));
        }
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::precondition(format!(
                "weight exponent alpha must be > -1, got {alpha}"
            )));
        }
        let nf = n as f64;
        let c_alpha = specfun::real_binomial(nf + alpha, n as u32);
        let theta = nf + 1.0 + alpha;
        let s = 2.0 + nf + alpha;
        let c_const =
            (specfun::log_gamma(s)? - 2.0 * specfun::log_gamma(s / 2.0)?).exp();
        Ok(Self {
            n,
            alpha,
            c_alpha,
            theta,
            theta_prime: c_alpha * theta,
            c_const,
        })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }
}

/// A point of `C^n` with its Euclidean norm structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<Complex>,
}

impl Point {
    pub fn new(coords: Vec<Complex>) -> Self {
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![ZERO; n],
        }
    }

    /// Standard basis vector `e_j` (0-indexed).
    pub fn basis(n: usize, j: usize) -> Self {
        let mut coords = vec![ZERO; n];
        coords[j] = ONE;
        Self { coords }
    }

    /// Real multiple `r e_1`.
    pub fn real_e1(n: usize, r: f64) -> Self {
        let mut coords = vec![ZERO; n];
        coords[0] = Complex::new(r, 0.0);
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_in_ball(&self) -> bool {
        self.norm() < 1.0
    }

    pub fn is_on_sphere(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c.scale(s)).collect(),
        }
    }
}

/// Hermitian inner product `<z, w> = sum z_k conj(w_k)`.
pub fn inner(z: &Point, w: &Point) -> Result<Complex> {
    if z.dim() != w.dim() {
        return Err(Error::precondition(format!(
            "dimension mismatch: {} vs {}",
            z.dim(),
            w.dim()
        )));
    }
    let mut acc = ZERO;
    for (a, b) in z.coords.iter().zip(&w.coords) {
        acc += *a * b.conj();
    }
    Ok(acc)
}

/// Bilinear dot `sum z_k w_k`, i.e. `<z, conj(w)>`.
pub fn dot(z: &Point, w: &Point) -> Result<Complex> {
    if z.dim() != w.dim() {
        return Err(Error::precondition(format!(
            "dimension mismatch: {} vs {}",
            z.dim(),
            w.dim()
        )));
    }
    let mut acc = ZERO;
    for (a, b) in z.coords.iter().zip(&w.coords) {
        acc += *a * *b;
    }
    Ok(acc)
}

/// The involutive automorphism `phi_a` of the ball determined by its base
/// point `a` (`phi_a(0) = a`, `phi_a(a) = 0`).
#[derive(Debug, Clone)]
pub struct Automorphism {
    pub base: Point,
}

impl Automorphism {
    pub fn new(base: Point) -> Result<Self> {
        let r = base.norm();
        if r > 1.0 - BASE_POINT_GUARD {
            return Err(Error::precondition(format!(
                "automorphism base |a| = {r} too close to the sphere (guard 1e-9)"
            )));
        }
        Ok(Self { base })
    }
}

/// Applies `phi_a` to a ball point:
///
/// ```text
/// phi_a(w) = (a - P_a w - sqrt(1-|a|^2) Q_a w) / (1 - <w, a>)
/// ```
///
/// where `P_a` projects onto the complex line through `a` and `Q_a = Id - P_a`.
/// For `a = 0` this degenerates to `-w`.
pub fn mobius_apply(auto: &Automorphism, w: &Point) -> Result<Point> {
    let a = &auto.base;
    if w.dim() != a.dim() {
        return Err(Error::precondition("dimension mismatch".to_string()));
    }
    if !w.is_in_ball() {
        return Err(Error::domain(format!(
            "mobius_apply needs |w| < 1, got {}",
            w.norm()
        )));
    }
    let a_sq = a.norm_sqr();
    if a_sq.sqrt() < ZERO_BASE_THRESHOLD {
        return Ok(Point {
            coords: w.coords.iter().map(|c| -*c).collect(),
        });
    }
    let ip = inner(w, a)?; // <w, a>
    let s = (1.0 - a_sq).sqrt();
    let proj_coeff = ip * (1.0 / a_sq);
    let denom = ONE - ip;
    let coords = a
        .coords
        .iter()
        .zip(&w.coords)
        .map(|(ak, wk)| {
            let p = proj_coeff * *ak; // P_a w component
            let q = *wk - p; // Q_a w component
            (*ak - p - q * s) / denom
        })
        .collect();
    Ok(Point { coords })
}

/// Real Jacobian of `phi_a` at `w` (viewing `C^n` as `R^{2n}`):
/// `((1-|a|^2)/|1-<w,a>|^2)^{n+1}`.
pub fn real_jacobian(auto: &Automorphism, w: &Point) -> Result<f64> {
    let a = &auto.base;
    if !w.is_in_ball() {
        return Err(Error::domain("real_jacobian needs |w| < 1".to_string()));
    }
    let n = w.dim() as f64;
    let base = (1.0 - a.norm_sqr()) / (ONE - inner(w, a)?).norm_sqr();
    Ok(base.powf(n + 1.0))
}

/// Density of the pulled-back measure: `dv_alpha(phi_a(w)) =
/// ((1-|a|^2)/|1-<w,a>|^2)^{n+1+alpha} dv_alpha(w)`.
pub fn pullback_density(auto: &Automorphism, w: &Point, p: &Params) -> Result<f64> {
    let a = &auto.base;
    if !w.is_in_ball() {
        return Err(Error::domain("pullback_density needs |w| < 1".to_string()));
    }
    let base = (1.0 - a.norm_sqr()) / (ONE - inner(w, a)?).norm_sqr();
    Ok(base.powf(p.theta))
}

/// Residuals of the two automorphism identities at `(a, w)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityReport {
    /// `| (1-|phi_a(w)|^2) - (1-|a|^2)(1-|w|^2)/|1-<w,a>|^2 |`
    pub relation1: f64,
    /// `| (1-<w,a>)(1-<phi_a(w),a>) - (1-|a|^2) |`
    pub relation2: f64,
}

pub fn identity_checks(auto: &Automorphism, w: &Point) -> Result<IdentityReport> {
    let a = &auto.base;
    let phi_w = mobius_apply(auto, w)?;
    let ip = inner(w, a)?;
    let lhs1 = 1.0 - phi_w.norm_sqr();
    let rhs1 = (1.0 - a.norm_sqr()) * (1.0 - w.norm_sqr()) / (ONE - ip).norm_sqr();
    let lhs2 = (ONE - ip) * (ONE - inner(&phi_w, a)?);
    let rhs2 = Complex::new(1.0 - a.norm_sqr(), 0.0);
    Ok(IdentityReport {
        relation1: (lhs1 - rhs1).abs(),
        relation2: (lhs2 - rhs2).abs(),
    })
}

/// A deterministic unitary with first column `zeta` (unit vector), used to
/// rotate stratified samples so their singular axis aligns with `zeta`.
/// Returns the columns of the matrix.
pub fn unitary_with_first_column(zeta: &Point) -> Result<Vec<Point>> {
    if !zeta.is_on_sphere() {
        return Err(Error::precondition(format!(
            "rotation target must be a unit vector, |zeta| = {}",
            zeta.norm()
        )));
    }
    let n = zeta.dim();
    let mut cols: Vec<Vec<Complex>> = Vec::with_capacity(n);
    cols.push(zeta.coords.clone());
    // Gram-Schmidt over the standard basis, skipping the coordinate most
    // parallel to zeta to keep the construction well conditioned.
    let skip = (0..n)
        .max_by(|&i, &j| {
            zeta.coords[i]
                .norm_sqr()
                .partial_cmp(&zeta.coords[j].norm_sqr())
                .unwrap()
        })
        .unwrap();
    for j in 0..n {
        if j == skip {
            continue;
        }
        let mut v = vec![ZERO; n];
        v[j] = ONE;
        for col in &cols {
            // v -= <v, col> col
            let mut ip = ZERO;
            for (vk, ck) in v.iter().zip(col.iter()) {
                ip += *vk * ck.conj();
            }
            for (vk, ck) in v.iter_mut().zip(col.iter()) {
                *vk = *vk - ip * *ck;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::consistency(
                "Gram-Schmidt breakdown building rotation".to_string(),
            ));
        }
        for vk in &mut v {
            *vk = vk.scale(1.0 / norm);
        }
        cols.push(v);
    }
    Ok(cols.into_iter().map(Point::new).collect())
}

/// Applies the unitary given by its columns: `w = sum_j omega_j col_j`.
pub fn apply_unitary(cols: &[Point], omega: &Point) -> Point {
    let n = cols.len();
    let mut out = vec![ZERO; n];
    for (j, c) in omega.coords.iter().enumerate() {
        for (o, colk) in out.iter_mut().zip(&cols[j].coords) {
            *o += *c * *colk;
        }
    }
    Point::new(out)
}
