//! Integration rules for the balance integrals.
//!
//! Velocity integrals carry an explicit `exp(-v^2)` weight and are done with
//! Gauss-Hermite rules. Spatial integrals use a globally adaptive 10/21-point
//! Gauss-Kronrod scheme; [`integrate_disk_xy`] nests two of them over a disk.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Gauss-Hermite nodes and weights for the weight function `exp(-v^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermiteRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Abscissae in ascending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Approximates `∫ exp(-v²) f(v) dv` over the real line.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Builds the `order`-point Gauss-Hermite rule. Nodes are the eigenvalues
/// of the Jacobi matrix, isolated by Sturm-sequence bisection and polished
/// by Newton steps on the orthonormal Hermite recurrence; weights follow from
/// the derivative at each node.
pub fn gauss_hermite(order: usize) -> Result<GaussHermiteRule> {
    if !(1..=200).contains(&order) {
        return Err(Error::OrderOutOfRange(order));
    }
    let n = order;
    let half = n / 2;
    let bound = (2.0 * n as f64).sqrt() + 1.0;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];

    // Negative nodes: the k-th smallest eigenvalue, k < n/2.
    for k in 0..half {
        let (mut lo, mut hi) = (-bound, 0.0);
        if k > 0 {
            lo = x[k - 1];
        }
        while hi - lo > 1e-15 * hi.abs().max(lo.abs()).max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if sturm_count(n, mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut z = 0.5 * (lo + hi);
        for _ in 0..3 {
            let (p, dp, _) = hermite_eval(n, z);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.abs() > (hi - lo).max(1e-14) {
                break;
            }
            z -= step;
        }
        x[k] = z;
        x[n - 1 - k] = -z;
    }
    for k in 0..half {
        let (_, dp, scale) = hermite_eval(n, x[k]);
        // w = 2 / H'_n(x)², with H' carried as dp · 10^(100·scale)
        w[k] = 2.0 / (dp * dp) * 1e-200_f64.powi(scale);
        w[n - 1 - k] = w[k];
    }
    if n % 2 == 1 {
        let (_, dp, scale) = hermite_eval(n, 0.0);
        x[half] = 0.0;
        w[half] = 2.0 / (dp * dp) * 1e-200_f64.powi(scale);
    }
    Ok(GaussHermiteRule {
        nodes: x,
        weights: w,
    })
}

/// Number of eigenvalues of the Hermite Jacobi matrix below `z`.
fn sturm_count(n: usize, z: f64) -> usize {
    let mut count = 0;
    let mut q = -z;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let prev = if q == 0.0 { f64::EPSILON } else { q };
        q = -z - (i as f64 / 2.0) / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Orthonormal Hermite `p_n(z)`, its derivative, and the power of 10^100 by
/// which both were scaled down.
fn hermite_eval(n: usize, z: f64) -> (f64, f64, i32) {
    const PI_M4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    let mut scale = 0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        if p1.abs() > 1e100 {
            p1 *= 1e-100;
            p2 *= 1e-100;
            scale += 1;
        }
    }
    (p1, (2.0 * n as f64).sqrt() * p2, scale)
}

/// Tolerances for the adaptive rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid("rel_tol", self.rel_tol, "must be positive"));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid("abs_tol", self.abs_tol, "must be non-negative"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::invalid(
                "max_subdivisions",
                self.max_subdivisions as f64,
                "must be at least 1",
            ));
        }
        Ok(())
    }
}

/// A value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

// Kronrod 21-point abscissae (positive half, descending) with the 10-point
// Gauss rule embedded at the odd indices.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_969_773_405,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

fn kronrod21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [[0.0; N]; 21];
    for (j, &x) in XGK.iter().enumerate() {
        if j == 10 {
            fv[10] = f(center)?;
        } else {
            fv[j] = f(center - half * x)?;
            fv[20 - j] = f(center + half * x)?;
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        let mut resk = WGK[10] * fv[10][c];
        let mut resg = 0.0;
        let mut resabs = WGK[10] * fv[10][c].abs();
        for j in 0..10 {
            let pair = fv[j][c] + fv[20 - j][c];
            resk += WGK[j] * pair;
            resabs += WGK[j] * (fv[j][c].abs() + fv[20 - j][c].abs());
            if j % 2 == 1 {
                resg += WG[j / 2] * pair;
            }
        }
        let mean = 0.5 * resk;
        let mut resasc = WGK[10] * (fv[10][c] - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv[j][c] - mean).abs() + (fv[20 - j][c] - mean).abs());
        }
        let h = half.abs();
        let resasc = resasc * h;
        let resabs = resabs * h;
        let mut err = ((resk - resg) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        value[c] = resk * half;
        error[c] = err;
    }
    Ok(Segment { a, b, value, error })
}

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand.
///
/// `points` are the sorted interval endpoints, including both limits; the
/// integrand is never evaluated exactly on them. Convergence requires every
/// component to satisfy `error <= max(abs_tol[c], rel_tol * |value|)`.
pub(crate) fn integrate_points<const N: usize, F>(
    mut f: F,
    points: &[f64],
    rel_tol: f64,
    abs_tol: [f64; N],
    max_subdivisions: usize,
) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    debug_assert!(points.len() >= 2);
    let mut segments: Vec<Segment<N>> = Vec::with_capacity(points.len() + 16);
    for pair in points.windows(2) {
        if pair[1] > pair[0] {
            segments.push(kronrod21(&mut f, pair[0], pair[1])?);
        }
    }
    if segments.is_empty() {
        return Ok(([0.0; N], [0.0; N]));
    }

    loop {
        let mut value = [0.0; N];
        let mut error = [0.0; N];
        for s in &segments {
            for c in 0..N {
                value[c] += s.value[c];
                error[c] += s.error[c];
            }
        }
        let mut tol = [0.0; N];
        let mut done = true;
        for c in 0..N {
            tol[c] = abs_tol[c].max(rel_tol * value[c].abs());
            if error[c] > tol[c] {
                done = false;
            }
        }
        if done {
            return Ok((value, error));
        }
        if segments.len() >= max_subdivisions {
            return Err(Error::QuadratureNotConverged {
                estimate: value[0],
                error: error[0],
                subdivisions: segments.len(),
            });
        }

        let badness = |s: &Segment<N>| {
            (0..N)
                .map(|c| s.error[c] / tol[c].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        let (worst, _) = segments
            .iter()
            .enumerate()
            .map(|(i, s)| (i, badness(s)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // interval at floating-point resolution
            return Err(Error::QuadratureNotConverged {
                estimate: value[0],
                error: error[0],
                subdivisions: segments.len() + 1,
            });
        }
        segments.push(kronrod21(&mut f, s.a, mid)?);
        segments.push(kronrod21(&mut f, mid, s.b)?);
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate_1d<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    if !(a < b) {
        return Err(Error::invalid("b", b, "upper limit must exceed lower limit"));
    }
    let (value, error) = integrate_points(
        |x| Ok([f(x)]),
        &[a, b],
        spec.rel_tol,
        [spec.abs_tol],
        spec.max_subdivisions,
    )?;
    Ok(Estimate {
        value: value[0],
        error: error[0],
    })
}

/// Integral of `f(x, y)` over the disk of the given radius centred on the
/// origin, as nested adaptive integrals with exact circular `y` limits.
pub fn integrate_disk_xy<F>(f: F, radius: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_disk_xy_split(f, radius, &[], spec)
}

/// As [`integrate_disk_xy`], with extra `y` break points handed to the inner
/// integral wherever they fall inside the chord.
pub fn integrate_disk_xy_split<F>(
    f: F,
    radius: f64,
    y_breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(f64, f64) -> f64,
{
    let (value, error) = integrate_disk_vec(
        |x, y| Ok([f(x, y)]),
        radius,
        y_breaks,
        spec.rel_tol,
        [spec.abs_tol],
        spec.max_subdivisions,
    )?;
    Ok(Estimate {
        value: value[0],
        error: error[0],
    })
}

/// Vector-valued nested disk integral. Inner-integral error estimates are
/// integrated along `x` and added to the outer error.
pub(crate) fn integrate_disk_vec<const N: usize, F>(
    f: F,
    radius: f64,
    y_breaks: &[f64],
    rel_tol: f64,
    abs_tol: [f64; N],
    max_subdivisions: usize,
) -> Result<([f64; N], [f64; N])>
where
    F: Fn(f64, f64) -> Result<[f64; N]>,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("radius", radius, "must be positive"));
    }
    // Inner tolerances are tightened so that they do not dominate the outer
    // error budget; per unit length of x.
    let inner_rel = rel_tol * 0.25;
    let mut inner_abs = abs_tol;
    for t in inner_abs.iter_mut() {
        *t *= 0.25 / (2.0 * radius);
    }

    // Outer components: N integrals followed by N inner error integrals.
    // Const-generic arithmetic is not available, so run the outer integral
    // per component pair through a dynamic buffer.
    let outer = |x: f64| -> Result<([f64; N], [f64; N])> {
        let half_chord = (radius * radius - x * x).max(0.0).sqrt();
        if half_chord == 0.0 {
            return Ok(([0.0; N], [0.0; N]));
        }
        let mut pts = vec![-half_chord];
        let mut inner: Vec<f64> = y_breaks
            .iter()
            .copied()
            .filter(|&y| y > -half_chord && y < half_chord)
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        pts.extend(inner);
        pts.push(half_chord);
        integrate_points(|y| f(x, y), &pts, inner_rel, inner_abs, max_subdivisions)
    };

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        let mut comp_abs = [0.0; 2];
        comp_abs[0] = abs_tol[c];
        comp_abs[1] = f64::INFINITY;
        let (v, e) = integrate_points(
            |x| outer(x).map(|(val, err)| [val[c], err[c]]),
            &[-radius, radius],
            rel_tol,
            comp_abs,
            max_subdivisions,
        )?;
        value[c] = v[0];
        error[c] = e[0] + v[1].abs();
    }
    Ok((value, error))
}

/// Integrals of the form `∫ exp(-v²) [1, v] / (width_sq + (center - slope v)²) dv`
/// over the real line: a Gaussian-weighted Lorentzian and its first moment.
///
/// Gauss-Hermite is used while the Lorentzian half-width in `v` units,
/// `sqrt(width_sq) / |slope|`, stays at or above `fallback_below`; narrower
/// peaks go to adaptive Gauss-Kronrod on `[-8, 8]` with break points around
/// the peak.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityQuadrature {
    rule: GaussHermiteRule,
    fallback_below: f64,
    fallback_rel_tol: f64,
}

/// Gauss-Hermite order used for velocity integrals unless configured.
pub const DEFAULT_HERMITE_ORDER: usize = 40;

/// Half-width (in units of the thermal velocity) below which the velocity
/// integral leaves Gauss-Hermite. Order 40 holds ~1e-8 relative accuracy
/// down to about this width.
pub const DEFAULT_FALLBACK_HALF_WIDTH: f64 = 1.2;

const VELOCITY_CUTOFF: f64 = 8.0;

impl Default for VelocityQuadrature {
    fn default() -> Self {
        VelocityQuadrature::new(DEFAULT_HERMITE_ORDER, DEFAULT_FALLBACK_HALF_WIDTH)
            .expect("default velocity quadrature is valid")
    }
}

impl VelocityQuadrature {
    pub fn new(order: usize, fallback_below: f64) -> Result<Self> {
        if !(fallback_below >= 0.0 && fallback_below.is_finite()) {
            return Err(Error::invalid(
                "fallback_below",
                fallback_below,
                "must be non-negative",
            ));
        }
        Ok(VelocityQuadrature {
            rule: gauss_hermite(order)?,
            fallback_below,
            fallback_rel_tol: 1e-11,
        })
    }

    pub fn rule(&self) -> &GaussHermiteRule {
        &self.rule
    }

    pub fn fallback_below(&self) -> f64 {
        self.fallback_below
    }

    /// Whether a Lorentzian with this width and slope takes the adaptive path.
    pub fn uses_fallback(&self, width_sq: f64, slope: f64) -> bool {
        width_sq.sqrt() < self.fallback_below * slope.abs()
    }

    pub fn lorentzian_moments(&self, width_sq: f64, center: f64, slope: f64) -> Result<[f64; 2]> {
        if self.uses_fallback(width_sq, slope) {
            self.adaptive_moments(width_sq, center, slope)
        } else {
            Ok(hermite_moments(&self.rule, width_sq, center, slope))
        }
    }

    /// The adaptive path regardless of width.
    pub fn adaptive_moments(&self, width_sq: f64, center: f64, slope: f64) -> Result<[f64; 2]> {
        let peak = if slope != 0.0 { center / slope } else { 0.0 };
        let hw = if slope != 0.0 {
            width_sq.sqrt() / slope.abs()
        } else {
            f64::INFINITY
        };
        let mut pts = vec![-VELOCITY_CUTOFF, VELOCITY_CUTOFF];
        if hw.is_finite() {
            for m in [-10.0, -1.0, 0.0, 1.0, 10.0] {
                let p = peak + m * hw;
                if p > -VELOCITY_CUTOFF && p < VELOCITY_CUTOFF {
                    pts.push(p);
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        // Scale for the absolute floor: the largest either moment can be.
        let scale = SQRT_PI / width_sq;
        let (value, _) = integrate_points(
            |v| {
                let d = center - slope * v;
                let g = (-v * v).exp() / (width_sq + d * d);
                Ok([g, v * g])
            },
            &pts,
            self.fallback_rel_tol,
            [1e-14 * scale, 1e-14 * scale],
            4000,
        )?;
        Ok(value)
    }
}

#[inline]
pub(crate) fn hermite_moments(
    rule: &GaussHermiteRule,
    width_sq: f64,
    center: f64,
    slope: f64,
) -> [f64; 2] {
    let mut m0 = 0.0;
    let mut m1 = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let d = center - slope * x;
        let g = w / (width_sq + d * d);
        m0 += g;
        m1 += x * g;
    }
    [m0, m1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn hermite_order_one_and_two_closed_forms() {
        let r1 = gauss_hermite(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_relative_eq!(r1.weights()[0], PI.sqrt(), max_relative = 1e-14);

        let r2 = gauss_hermite(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(r2.nodes()[0], -s, max_relative = 1e-14);
        assert_relative_eq!(r2.nodes()[1], s, max_relative = 1e-14);
        for &w in r2.weights() {
            assert_relative_eq!(w, PI.sqrt() / 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn hermite_order_range_is_enforced() {
        assert_eq!(gauss_hermite(0), Err(Error::OrderOutOfRange(0)));
        assert_eq!(gauss_hermite(201), Err(Error::OrderOutOfRange(201)));
        assert!(gauss_hermite(200).is_ok());
    }

    #[test]
    fn hermite_rules_sum_and_symmetry() {
        for n in [1, 2, 3, 7, 20, 40, 41, 80, 150, 200] {
            let r = gauss_hermite(n).unwrap();
            let sum: f64 = r.weights().iter().sum();
            assert_relative_eq!(sum, PI.sqrt(), max_relative = 1e-12);
            for i in 0..n {
                assert_eq!(r.nodes()[i], -r.nodes()[n - 1 - i]);
                assert_eq!(r.weights()[i], r.weights()[n - 1 - i]);
            }
            assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
        }
    }

    // ∫ v^{2j} e^{-v²} dv = Γ(j + 1/2)
    fn even_moment(j: u32) -> f64 {
        let mut g = PI.sqrt();
        for i in 0..j {
            g *= i as f64 + 0.5;
        }
        g
    }

    #[test]
    fn hermite_integrates_even_moments_exactly() {
        for n in [5, 12, 40] {
            let r = gauss_hermite(n).unwrap();
            for j in 0..n as u32 {
                if 2 * j > 2 * n as u32 - 1 || j > 20 {
                    break;
                }
                let est = r.integrate(|v| v.powi(2 * j as i32));
                assert_relative_eq!(est, even_moment(j), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn hermite_order_forty_second_moment() {
        let r = gauss_hermite(40).unwrap();
        let est = r.integrate(|v| v * v);
        assert!((est - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn kronrod_rule_is_exact_for_low_degree_polynomials() {
        let spec = QuadratureSpec::new(1e-12, 1e-13, 1).unwrap();
        for p in 0..=29 {
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            let est = integrate_1d(|x| x.powi(p), -1.0, 1.0, &QuadratureSpec { max_subdivisions: 50, ..spec })
                .unwrap();
            assert!((est.value - exact).abs() < 1e-14, "degree {p}: {}", est.value);
        }
    }

    #[test]
    fn polynomial_and_semicircle() {
        let spec = QuadratureSpec::default();
        let sq = integrate_1d(|x| x * x, 0.0, 1.0, &spec).unwrap();
        assert_relative_eq!(sq.value, 1.0 / 3.0, max_relative = 1e-12);

        let semi = integrate_1d(|x| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, &spec).unwrap();
        assert_relative_eq!(semi.value, PI / 2.0, max_relative = 1e-8);
        assert!(semi.error <= 1e-8 * semi.value);
    }

    #[test]
    fn sharp_lorentzian_matches_arctan() {
        let (a, b) = (0.0, 1.0);
        let hw = 1e-3;
        let x0 = 0.37;
        let spec = QuadratureSpec::new(1e-9, 0.0, 2000).unwrap();
        let est = integrate_1d(|x| 1.0 / ((x - x0).powi(2) + hw * hw), a, b, &spec).unwrap();
        let exact = (((b - x0) / hw).atan() - ((a - x0) / hw).atan()) / hw;
        assert_relative_eq!(est.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn bad_limits_and_specs_are_rejected() {
        let spec = QuadratureSpec::default();
        assert!(integrate_1d(|x| x, 1.0, 1.0, &spec).is_err());
        assert!(QuadratureSpec::new(0.0, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-6, 0.0, 0).is_err());
    }

    #[test]
    fn subdivision_budget_exhaustion_reports_best_estimate() {
        let spec = QuadratureSpec::new(1e-14, 0.0, 3).unwrap();
        match integrate_1d(|x| 1.0 / (x * x + 1e-10), -1.0, 1.0, &spec) {
            Err(Error::QuadratureNotConverged {
                estimate,
                subdivisions,
                ..
            }) => {
                assert!(estimate > 0.0);
                assert_eq!(subdivisions, 3);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn disk_area_density_and_odd_integrands() {
        let r = 225e-6;
        let spec = QuadratureSpec::new(1e-10, 1e-30, 2000).unwrap();
        let area = integrate_disk_xy(|_, _| 1.0, r, &spec).unwrap();
        assert_relative_eq!(area.value, PI * r * r, max_relative = 1e-9);

        let dens = integrate_disk_xy(
            |x, y| (1.0 - (x * x + y * y) / (r * r)).max(0.0).sqrt(),
            r,
            &spec,
        )
        .unwrap();
        assert_relative_eq!(dens.value, 2.0 / 3.0 * PI * r * r, max_relative = 1e-8);

        let abs = 1e-20;
        let odd = integrate_disk_xy(
            |x, y| y * (1.0 + x * x / (r * r)),
            r,
            &QuadratureSpec::new(1e-10, abs, 2000).unwrap(),
        )
        .unwrap();
        assert!(odd.value.abs() <= abs, "{}", odd.value);
    }

    #[test]
    fn splitting_the_interval_agrees_within_error_estimates() {
        let spec = QuadratureSpec::new(1e-10, 0.0, 2000).unwrap();
        let f = |x: f64| (-(x - 0.3).powi(2) * 40.0).exp() / (1.0 + x * x);
        let whole = integrate_1d(f, -2.0, 3.0, &spec).unwrap();
        let left = integrate_1d(f, -2.0, 0.41, &spec).unwrap();
        let right = integrate_1d(f, 0.41, 3.0, &spec).unwrap();
        let diff = (whole.value - left.value - right.value).abs();
        assert!(diff <= whole.error + left.error + right.error + 1e-15);
    }

    #[test]
    fn lorentzian_moments_agree_between_paths() {
        let vq = VelocityQuadrature::default();
        for &(w2, c, s) in &[
            (1.0, 0.0, 0.3),
            (2.0, -3.0, 0.5),
            (1.3, 4.0, 0.8),
            (1.0, -1.0, 0.05),
        ] {
            let gh = hermite_moments(vq.rule(), w2, c, s);
            let ad = vq.adaptive_moments(w2, c, s).unwrap();
            assert_relative_eq!(gh[0], ad[0], max_relative = 1e-6);
            assert!((gh[1] - ad[1]).abs() <= 1e-6 * ad[0].abs().max(ad[1].abs()));
        }
    }

    #[test]
    fn narrow_lorentzians_take_the_adaptive_path() {
        let vq = VelocityQuadrature::default();
        assert!(vq.uses_fallback(1.0, 10.0));
        assert!(!vq.uses_fallback(1.0, 0.5));
        // half-width 0.01: compare against the closed form for a delta-like peak
        let slope = 100.0;
        let center = 50.0; // peak at v = 0.5
        let m = vq.lorentzian_moments(1.0, center, slope).unwrap();
        // brute-force midpoint sums, step far below the 0.01 half-width
        let steps = 2_000_000;
        let h = 16.0 / steps as f64;
        let (mut r0, mut r1) = (0.0, 0.0);
        for i in 0..steps {
            let v = -8.0 + (i as f64 + 0.5) * h;
            let f = (-v * v).exp() / (1.0 + (center - slope * v).powi(2));
            r0 += f * h;
            r1 += v * f * h;
        }
        assert_relative_eq!(m[0], r0, max_relative = 1e-8);
        assert_relative_eq!(m[1], r1, max_relative = 1e-8);
        // and the delta-peak limit is close
        let approx0 = PI / slope * (-0.25f64).exp();
        assert_relative_eq!(m[0], approx0, max_relative = 2e-2);
    }
}
