//! Sampling and Monte Carlo integration over `(B, v_alpha)`.
//!
//! # Determinism contract
//!
//! Every estimate is a pure function of `(seed, samples, chunks)`. The
//! sample budget is split into `chunks` independent streams (stream `c` of
//! the seed family drives chunk `c`), partial sums are reduced in fixed
//! chunk order, and the result is bit-identical whether the chunks run on
//! a rayon pool (`parallel` feature, default) or sequentially.
//!
//! # Stream layout
//!
//! - plain integration: chunk `c` uses stream `c`;
//! - stratified integration: stratum `s`, chunk `c` uses stream
//!   `s * chunks + c`;
//! - per sample, draws occur in a fixed order: direction normals, then the
//!   radius uniform, then any auxiliary uniforms the integrand requested.
//!
//! # Stratification
//!
//! Kernels carrying a factor `|1 - w_1|^{-q}` concentrate mass (and, for
//! the interesting exponents, an infinite second moment) near the boundary
//! point `e_1`. `stratified_singular` partitions the ball by dyadic shells
//! in `rho = |1 - w_1|`: an outer cap `[1, 2)`, shells `[2^-j, 2^{1-j})`,
//! and a core `(0, 2^-J)`. Shell probabilities come from a one-dimensional
//! quadrature of the marginal law of `w_1`; within a shell, points follow
//! the exact conditional law via rejection in `(r, psi)` polar coordinates
//! of `w_1 = r e^{i psi}`. Sample counts decay like `2^{-j/2}` (the shells'
//! contribution scale for the kernels above), which keeps every stratum
//! variance finite and the recombined estimate unbiased.

use crate::ballgeom::{apply_unitary, unitary_with_first_column, Params, Point};
use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::specfun;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Mutex;

/// Estimation method tag carried by every numeric result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mc,
    McReduced,
    McStratified,
    RadialQuadrature,
}

/// Controls every stochastic computation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureSpec {
    pub seed: u64,
    pub samples: u64,
    pub chunks: u64,
    /// Use the marginal-reduction rule when the integrand only depends on
    /// the first few coordinates.
    pub reduction: bool,
    /// Use dyadic-shell stratification for singular kernels.
    pub stratify: bool,
    /// Largest kernel exponent `q` accepted by `stratified_singular`;
    /// `None` means `n + 2 + alpha` at the point of use.
    pub singular_exponent_guard: Option<f64>,
}

impl QuadratureSpec {
    pub fn new(seed: u64, samples: u64, chunks: u64) -> Result<Self> {
        if samples < 1_000 {
            return Err(Error::precondition(format!(
                "any reported estimate needs >= 1000 samples, got {samples}"
            )));
        }
        if chunks == 0 || samples % chunks != 0 {
            return Err(Error::precondition(format!(
                "chunk count {chunks} must divide the sample budget {samples}"
            )));
        }
        Ok(Self {
            seed,
            samples,
            chunks,
            reduction: true,
            stratify: true,
            singular_exponent_guard: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn without_reduction(mut self) -> Self {
        self.reduction = false;
        self
    }

    pub fn without_stratification(mut self) -> Self {
        self.stratify = false;
        self
    }
}

impl Default for QuadratureSpec {
    /// seed 42, 10^6 samples, 64 chunks.
    fn default() -> Self {
        Self::new(42, 1_000_000, 64).unwrap()
    }
}

/// A Monte Carlo (or quadrature) estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub method: Method,
}

impl IntegralEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            std_error: 0.0,
            samples: 0,
            method,
        }
    }

    /// `|value - target|` in units of this estimate's standard error.
    pub fn sigma_distance(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        self.sigma_distance(target) <= k
    }

    /// Two-estimate agreement at `k` combined standard errors.
    pub fn agrees_with(&self, other: &IntegralEstimate, k: f64) -> bool {
        let sigma = (self.std_error.powi(2) + other.std_error.powi(2)).sqrt();
        let d = (self.value - other.value).abs();
        if sigma > 0.0 {
            d <= k * sigma
        } else {
            d == 0.0
        }
    }
}

/// Complex-valued estimate (componentwise errors).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexEstimate {
    pub re: f64,
    pub im: f64,
    pub std_error_re: f64,
    pub std_error_im: f64,
    pub samples: u64,
    pub method: Method,
}

impl ComplexEstimate {
    pub fn value(&self) -> Complex {
        Complex::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.value().abs()
    }

    /// Standard error of the modulus bound, `sqrt(se_re^2 + se_im^2)`.
    pub fn std_error_mod(&self) -> f64 {
        self.std_error_re.hypot(self.std_error_im)
    }
}

/// Execution strategy for the chunk fan-out. `Auto` uses rayon when the
/// `parallel` feature is enabled; results are bit-identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Auto,
    Sequential,
}

/// Vector-valued integrand evaluated at sampled points. `dim` values are
/// produced per sample; `aux` extra uniform draws in `(0, 1]` are supplied
/// per sample when requested (drawn from the same stream as the point).
pub trait VectorIntegrand: Sync {
    fn dim(&self) -> usize;
    fn aux(&self) -> usize {
        0
    }
    fn eval(&self, w: &Point, aux: &[f64], out: &mut [f64]);
}

struct FnIntegrand<F>(F);

impl<F: Fn(&Point) -> f64 + Sync> VectorIntegrand for FnIntegrand<F> {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, w: &Point, _aux: &[f64], out: &mut [f64]) {
        out[0] = (self.0)(w);
    }
}

/// Uniform point on the sphere `S^{2n-1}`: 2n standard normals, normalized.
pub fn sample_sphere(n: usize, rng: &mut SplitMix64) -> Point {
    loop {
        let mut coords = Vec::with_capacity(n);
        let mut norm_sqr = 0.0;
        for _ in 0..n {
            let (x, y) = rng.normal_pair();
            norm_sqr += x * x + y * y;
            coords.push(Complex::new(x, y));
        }
        if norm_sqr > 1e-300 {
            let inv = norm_sqr.sqrt().recip();
            return Point::new(coords.into_iter().map(|c| c.scale(inv)).collect());
        }
    }
}

/// Inverse CDF of the `Beta(n, alpha+1)` radial law in `r^2`.
fn beta_radius_sq(n: usize, alpha: f64, u: f64) -> f64 {
    let a = n as f64;
    let b = alpha + 1.0;
    if b == 1.0 {
        u.powf(1.0 / a)
    } else if n == 1 {
        1.0 - (1.0 - u).powf(1.0 / b)
    } else {
        specfun::betainc_inv(a, b, u).expect("valid Beta parameters")
    }
}

/// Exact draw from `v_alpha`: sphere direction times a radius with
/// `r^2 ~ Beta(n, alpha+1)`, both by inverse CDF (no rejection).
pub fn sample_ball_valpha(p: &Params, rng: &mut SplitMix64) -> Point {
    let dir = sample_sphere(p.n, rng);
    let u = rng.uniform();
    let r = beta_radius_sq(p.n, p.alpha, u).sqrt();
    dir.scale(r)
}

/// Marginal reduction: the law of the first `k` complex coordinates under
/// `v_alpha` on the n-ball is `v_{alpha+n-k}` on the k-ball. `k = n` is the
/// identity.
pub fn reduce_marginal(p: &Params, k: usize) -> Result<Params> {
    if k < 1 || k > p.n {
        return Err(Error::precondition(format!(
            "marginal reduction needs 1 <= k <= n, got k = {k}, n = {}",
            p.n
        )));
    }
    Params::new(k, p.alpha + (p.n - k) as f64)
}

#[derive(Clone)]
struct ChunkAccum {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    count: u64,
    non_finite: u64,
}

impl ChunkAccum {
    fn new(dim: usize) -> Self {
        Self {
            sum: vec![0.0; dim],
            sumsq: vec![0.0; dim],
            count: 0,
            non_finite: 0,
        }
    }

    fn add(&mut self, values: &[f64]) {
        self.count += 1;
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                self.non_finite += 1;
                continue;
            }
            self.sum[i] += v;
            self.sumsq[i] += v * v;
        }
    }
}

fn execute<T: Send, F: Fn(usize) -> T + Sync + Send>(count: usize, f: F, exec: Execution) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Auto {
            use rayon::prelude::*;
            return (0..count).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..count).map(f).collect()
}

fn split_counts(total: u64, chunks: u64) -> Vec<u64> {
    let chunks = chunks.min(total).max(1);
    let base = total / chunks;
    let rem = total % chunks;
    (0..chunks)
        .map(|c| base + u64::from(c < rem))
        .collect()
}

/// What the plain engine samples from.
#[derive(Debug, Clone, Copy)]
pub enum SamplerKind {
    BallValpha,
    Sphere,
}

fn run_plain<V: VectorIntegrand>(
    integrand: &V,
    p: &Params,
    sampler: SamplerKind,
    spec: &QuadratureSpec,
    exec: Execution,
    method: Method,
) -> Result<Vec<IntegralEstimate>> {
    let dim = integrand.dim();
    let aux_n = integrand.aux();
    let per_chunk = spec.samples / spec.chunks;
    let accums = execute(
        spec.chunks as usize,
        |c| {
            let mut rng = SplitMix64::new(spec.seed, c as u64);
            let mut acc = ChunkAccum::new(dim);
            let mut out = vec![0.0; dim];
            let mut aux = vec![0.0; aux_n];
            for _ in 0..per_chunk {
                let w = match sampler {
                    SamplerKind::BallValpha => sample_ball_valpha(p, &mut rng),
                    SamplerKind::Sphere => sample_sphere(p.n, &mut rng),
                };
                for a in aux.iter_mut() {
                    *a = rng.uniform_open();
                }
                integrand.eval(&w, &aux, &mut out);
                acc.add(&out);
            }
            acc
        },
        exec,
    );

    let mut total = ChunkAccum::new(dim);
    for acc in &accums {
        total.count += acc.count;
        total.non_finite += acc.non_finite;
        for i in 0..dim {
            total.sum[i] += acc.sum[i];
            total.sumsq[i] += acc.sumsq[i];
        }
    }
    if total.non_finite > 0 {
        return Err(Error::integration(format!(
            "{} non-finite integrand values",
            total.non_finite
        )));
    }
    let n = total.count as f64;
    Ok((0..dim)
        .map(|i| {
            let mean = total.sum[i] / n;
            let var = ((total.sumsq[i] - total.sum[i] * total.sum[i] / n) / (n - 1.0)).max(0.0);
            IntegralEstimate {
                value: mean,
                std_error: (var / n).sqrt(),
                samples: total.count,
                method,
            }
        })
        .collect())
}

/// Plain Monte Carlo estimate of `int_B f dv_alpha`.
pub fn mc_integrate<F: Fn(&Point) -> f64 + Sync>(
    f: F,
    p: &Params,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    mc_integrate_exec(f, p, spec, Execution::Auto)
}

/// Same as [`mc_integrate`] with an explicit execution mode (the benches
/// compare the two; outputs are bit-identical).
pub fn mc_integrate_exec<F: Fn(&Point) -> f64 + Sync>(
    f: F,
    p: &Params,
    spec: &QuadratureSpec,
    exec: Execution,
) -> Result<IntegralEstimate> {
    Ok(run_plain(
        &FnIntegrand(f),
        p,
        SamplerKind::BallValpha,
        spec,
        exec,
        Method::Mc,
    )?[0])
}

/// Vector-valued plain Monte Carlo over `v_alpha` or the sphere measure.
pub fn mc_integrate_vector<V: VectorIntegrand>(
    integrand: &V,
    p: &Params,
    sampler: SamplerKind,
    spec: &QuadratureSpec,
) -> Result<Vec<IntegralEstimate>> {
    run_plain(integrand, p, sampler, spec, Execution::Auto, Method::Mc)
}

// ---------------------------------------------------------------------------
// stratified sampling near w_1 = 1
// ---------------------------------------------------------------------------

const SHELL_COUNT: usize = 40; // dyadic shells below rho = 1
const SHELL_MIN_SAMPLES: u64 = 32;

#[derive(Debug, Clone)]
struct Stratum {
    lo: f64,
    hi: f64,
    prob: f64,
    /// smallest radius |w_1| compatible with the shell
    r_lo: f64,
    /// half-width of the angular proposal window
    psi_max: f64,
}

#[derive(Debug, Clone)]
struct ShellTable {
    /// marginal exponent of |w_1|: density prop. to r (1-r^2)^beta
    beta: f64,
    strata: Vec<Stratum>,
}

fn shell_bounds() -> Vec<(f64, f64)> {
    let mut bounds = Vec::with_capacity(SHELL_COUNT + 1);
    bounds.push((1.0, 2.0));
    for j in 1..SHELL_COUNT {
        bounds.push((2f64.powi(-(j as i32)), 2f64.powi(1 - j as i32)));
    }
    bounds.push((0.0, 2f64.powi(1 - SHELL_COUNT as i32)));
    bounds
}

/// Angular measure of `{ psi : |1 - r e^{i psi}| in [a, b] }` at fixed r.
///
/// Uses `rho^2 = (1-r)^2 + 4 r sin^2(psi/2)`, i.e.
/// `psi_x = 2 asin( sqrt((x - (1-r))(x + (1-r)) / (4r)) )`, with `1-r`
/// supplied exactly by the caller; the naive cosine form loses the
/// `(1-r)^2` term below f64 epsilon on the deep shells. The window is
/// symmetric in the sign of psi, hence the factor 2.
fn psi_window(r: f64, one_minus_r: f64, a: f64, b: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let gap = one_minus_r.abs();
    let half_angle = |x: f64| -> f64 {
        if x <= gap {
            return 0.0;
        }
        if x >= 1.0 + r {
            return std::f64::consts::PI;
        }
        let s2 = (x - gap) * (x + gap) / (4.0 * r);
        2.0 * s2.sqrt().min(1.0).asin()
    };
    2.0 * (half_angle(b) - half_angle(a)).max(0.0)
}

fn shell_probability(beta: f64, a: f64, b: f64) -> f64 {
    let r_lo = (1.0 - b).max(a - 1.0).max(0.0);
    if r_lo >= 1.0 {
        return 0.0;
    }
    // 1 - r^2 in terms of the quadrature variable keeps precision near r = 1
    let density = |r: f64, one_minus_r: f64| {
        let om_r2 = one_minus_r * (1.0 + r);
        r * om_r2.powf(beta) * psi_window(r, one_minus_r, a, b)
    };
    // integrand kinks where the arccos clamps activate
    let mut cuts: Vec<f64> = [1.0 - b, 1.0 - a, a - 1.0, b - 1.0]
        .into_iter()
        .filter(|&x| x > r_lo + 1e-15 && x < 1.0 - 1e-15)
        .collect();
    cuts.push(r_lo);
    cuts.push(1.0);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let q = crate::quad::tanh_sinh_01(
            |s, s1| {
                let r = lo * s1 + hi * s;
                let one_minus_r = (1.0 - lo) * s1 + (1.0 - hi) * s;
                density(r, one_minus_r)
            },
            1e-11,
        );
        total += q.value * (hi - lo);
    }
    total * (1.0 + beta) / std::f64::consts::PI
}

fn build_shell_table(beta: f64) -> Result<ShellTable> {
    let mut strata = Vec::new();
    let mut total = 0.0;
    for (lo, hi) in shell_bounds() {
        let prob = shell_probability(beta, lo, hi).max(0.0);
        let r_lo = (1.0 - hi).max(lo - 1.0).max(0.0);
        let psi_max = if hi >= 1.0 {
            std::f64::consts::PI
        } else if hi >= 0.5 {
            std::f64::consts::FRAC_PI_2
        } else {
            (hi / (1.0 - hi)).min(1.0).asin() * 1.000_000_1
        };
        total += prob;
        strata.push(Stratum {
            lo,
            hi,
            prob,
            r_lo,
            psi_max,
        });
    }
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::consistency(format!(
            "shell probabilities sum to {total}, expected 1"
        )));
    }
    for s in &mut strata {
        s.prob /= total;
    }
    Ok(ShellTable { beta, strata })
}

fn shell_table(beta: f64) -> Result<ShellTable> {
    static CACHE: Mutex<Option<HashMap<u64, ShellTable>>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap();
    let map = guard.get_or_insert_with(HashMap::new);
    if let Some(t) = map.get(&beta.to_bits()) {
        return Ok(t.clone());
    }
    let table = build_shell_table(beta)?;
    map.insert(beta.to_bits(), table.clone());
    Ok(table)
}

/// Draws `w_1 = r e^{i psi}` from the marginal law conditioned on
/// `|1 - w_1| in [lo, hi)`. Exact rejection: radius from its conditional
/// law by inverse CDF, angle uniform on the proposal window, accept when
/// the point lands in the shell.
fn sample_shell_w1(table: &ShellTable, s: &Stratum, rng: &mut SplitMix64) -> Result<(Complex, f64)> {
    let bp1 = table.beta + 1.0;
    let g_lo = (1.0 - s.r_lo * s.r_lo).powf(bp1);
    for _ in 0..100_000 {
        let u = rng.uniform();
        let g = g_lo * (1.0 - u);
        let om_r2 = g.powf(1.0 / bp1); // 1 - r^2, exact in the proposal law
        let r = (1.0 - om_r2).sqrt();
        let one_minus_r = om_r2 / (1.0 + r);
        let psi = s.psi_max * (2.0 * rng.uniform() - 1.0);
        let half = (0.5 * psi).sin();
        let re_gap = one_minus_r + r * 2.0 * half * half; // 1 - r cos psi
        let rho = re_gap.hypot(r * psi.sin());
        if rho >= s.lo && rho < s.hi {
            return Ok((Complex::new(r * psi.cos(), r * psi.sin()), rho));
        }
    }
    Err(Error::integration(
        "shell rejection sampler failed to accept".to_string(),
    ))
}

fn stratified_allocation(samples: u64, n_strata: usize) -> Vec<u64> {
    let weights: Vec<f64> = (0..n_strata).map(|j| 2f64.powf(-(j as f64) / 2.0)).collect();
    let total_w: f64 = weights.iter().sum();
    weights
        .iter()
        .map(|w| ((samples as f64 * w / total_w).round() as u64).max(SHELL_MIN_SAMPLES))
        .collect()
}

/// Stratified estimate of `int_B f dv_alpha` for integrands singular along
/// `w_1 = 1` like `|1 - w_1|^{-q}`; `center` rotates the singular axis to
/// an arbitrary unit vector (`None` = `e_1`).
pub fn stratified_singular_vector<V: VectorIntegrand>(
    integrand: &V,
    p: &Params,
    center: Option<&Point>,
    q: f64,
    spec: &QuadratureSpec,
    exec: Execution,
    method: Method,
) -> Result<Vec<IntegralEstimate>> {
    let guard = spec
        .singular_exponent_guard
        .unwrap_or(p.nf() + 2.0 + p.alpha);
    if q > guard + 1e-12 {
        return Err(Error::precondition(format!(
            "singular exponent q = {q} beyond guard {guard}"
        )));
    }
    let beta = p.alpha + p.nf() - 1.0;
    let table = shell_table(beta)?;
    let rotation = match center {
        Some(zeta) => Some(unitary_with_first_column(zeta)?),
        None => None,
    };
    let sub_params = if p.n > 1 {
        Some(Params::new(p.n - 1, p.alpha)?)
    } else {
        None
    };

    let dim = integrand.dim();
    let aux_n = integrand.aux();
    let n_strata = table.strata.len();
    let alloc = stratified_allocation(spec.samples, n_strata);

    // flat task list: (stratum, stream, count)
    let mut tasks = Vec::new();
    for (s_idx, m) in alloc.iter().enumerate() {
        let counts = split_counts(*m, spec.chunks);
        for (c_idx, cnt) in counts.iter().enumerate() {
            if *cnt > 0 {
                tasks.push((s_idx, s_idx as u64 * spec.chunks + c_idx as u64, *cnt));
            }
        }
    }

    let results: Vec<(usize, std::result::Result<ChunkAccum, String>)> = execute(
        tasks.len(),
        |t_idx| {
            let (s_idx, stream, count) = tasks[t_idx];
            let stratum = &table.strata[s_idx];
            let mut rng = SplitMix64::new(spec.seed, stream);
            let mut acc = ChunkAccum::new(dim);
            let mut out = vec![0.0; dim];
            let mut aux = vec![0.0; aux_n];
            for _ in 0..count {
                let w1 = match sample_shell_w1(&table, stratum, &mut rng) {
                    Ok((c, _)) => c,
                    Err(e) => return (s_idx, Err(e.to_string())),
                };
                let mut coords = Vec::with_capacity(p.n);
                coords.push(w1);
                if let Some(sp) = &sub_params {
                    let tail_scale = (1.0 - w1.norm_sqr()).max(0.0).sqrt();
                    let u = sample_ball_valpha(sp, &mut rng);
                    coords.extend(u.coords.iter().map(|c| c.scale(tail_scale)));
                }
                let omega = Point::new(coords);
                let w = match &rotation {
                    Some(cols) => apply_unitary(cols, &omega),
                    None => omega,
                };
                for a in aux.iter_mut() {
                    *a = rng.uniform_open();
                }
                integrand.eval(&w, &aux, &mut out);
                acc.add(&out);
            }
            (s_idx, Ok(acc))
        },
        exec,
    );

    // merge chunk accumulators per stratum, in fixed order
    let mut per_stratum: Vec<ChunkAccum> = (0..n_strata).map(|_| ChunkAccum::new(dim)).collect();
    for (s_idx, res) in results {
        let acc = res.map_err(Error::integration)?;
        let tgt = &mut per_stratum[s_idx];
        tgt.count += acc.count;
        tgt.non_finite += acc.non_finite;
        for i in 0..dim {
            tgt.sum[i] += acc.sum[i];
            tgt.sumsq[i] += acc.sumsq[i];
        }
    }
    let bad: u64 = per_stratum.iter().map(|a| a.non_finite).sum();
    if bad > 0 {
        return Err(Error::integration(format!(
            "{bad} non-finite integrand values in stratified run"
        )));
    }

    let total_samples: u64 = per_stratum.iter().map(|a| a.count).sum();
    let mut estimates = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut value = 0.0;
        let mut var = 0.0;
        let mut contributions = Vec::with_capacity(n_strata);
        for (s, acc) in table.strata.iter().zip(&per_stratum) {
            let m = acc.count as f64;
            let mean = acc.sum[i] / m;
            let sv = ((acc.sumsq[i] - acc.sum[i] * acc.sum[i] / m) / (m - 1.0)).max(0.0);
            value += s.prob * mean;
            var += s.prob * s.prob * sv / m;
            contributions.push((s.prob * mean, s.prob * s.prob * sv / m));
        }
        // Non-integrable kernels show up as shell contributions that keep
        // growing towards the core. Scan the deepest strata for a run of
        // statistically significant increases; sampling noise cannot fake
        // one because insignificant contributions are ignored.
        let k = contributions.len();
        let mut increases = 0;
        let mut last_significant: Option<f64> = None;
        for (c, var) in &contributions[k.saturating_sub(12)..] {
            let mag = c.abs();
            if mag <= 5.0 * var.sqrt() {
                continue;
            }
            if let Some(prev) = last_significant {
                if mag > 1.5 * prev {
                    increases += 1;
                }
            }
            last_significant = Some(mag);
        }
        if increases >= 3 {
            return Err(Error::integration(
                "shell contributions grow towards w_1 = 1; integrand likely non-integrable"
                    .to_string(),
            ));
        }
        estimates.push(IntegralEstimate {
            value,
            std_error: var.sqrt(),
            samples: total_samples,
            method,
        });
    }
    Ok(estimates)
}

/// Scalar stratified estimate with singular axis `e_1` (the spec's shells
/// `|1 - w_1| in [2^{-j-1}, 2^{-j}]`).
pub fn stratified_singular<F: Fn(&Point) -> f64 + Sync>(
    f: F,
    p: &Params,
    q: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    Ok(stratified_singular_vector(
        &FnIntegrand(f),
        p,
        None,
        q,
        spec,
        Execution::Auto,
        Method::McStratified,
    )?[0])
}

/// Exposes the shell probabilities for diagnostics and tests.
pub fn shell_probabilities(p: &Params) -> Result<Vec<(f64, f64, f64)>> {
    let beta = p.alpha + p.nf() - 1.0;
    let table = shell_table(beta)?;
    Ok(table.strata.iter().map(|s| (s.lo, s.hi, s.prob)).collect())
}
