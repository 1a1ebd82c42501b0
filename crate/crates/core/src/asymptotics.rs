//! Closed-form large-`n` limits, evaluated in double precision.
//!
//! Coordinates are normalized: a location `(ell, m)` of the order-`n`
//! diamond maps to `(ell/n, m/n)` inside `|x| + |y| <= 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::exact::{self, LatticeLocation};

/// Default radius of the neighbourhood of the two singular points inside
/// which results are flagged rather than trusted.
pub const DEFAULT_SINGULAR_RADIUS: f64 = 0.05;

const BOUNDARY_SLACK: f64 = 1e-12;

/// A point `(x, y)` of the normalized diamond `|x| + |y| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedPoint {
    pub x: f64,
    pub y: f64,
}

impl NormalizedPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) || x.abs() + y.abs() > 1.0 + BOUNDARY_SLACK {
            return domain(format!("point ({x}, {y}) lies outside |x|+|y| <= 1"));
        }
        Ok(NormalizedPoint { x, y })
    }

    pub fn of(loc: LatticeLocation) -> Self {
        let (x, y) = loc.normalized();
        NormalizedPoint { x, y }
    }

    pub fn radius_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// Gradient `(s, t) = (dH/dx, dH/dy)` of the limiting average height function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tilt {
    pub s: f64,
    pub t: f64,
}

impl Tilt {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !(s.is_finite() && t.is_finite()) || s.abs() + t.abs() > 2.0 + BOUNDARY_SLACK {
            return domain(format!("tilt ({s}, {t}) lies outside |s|+|t| <= 2"));
        }
        Ok(Tilt { s, t })
    }
}

/// Bias parameter `p` of the Gibbs distribution, in floating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiasParameter(f64);

impl BiasParameter {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("bias must satisfy 0 < p < 1, got {p}"));
        }
        Ok(BiasParameter(p))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// The bias seen by vertical dominos after a quarter turn.
    pub fn complement(&self) -> Self {
        BiasParameter(1.0 - self.0)
    }
}

/// A placement value together with a flag marking points inside the
/// exclusion neighbourhood of a singular point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flagged {
    pub value: f64,
    pub near_singular: bool,
}

/// Limiting north-going placement probability at `(x, y)`.
///
/// Zero in the frozen region below the singular chord, one above it, and the
/// arctangent law inside the inscribed circle.  The two singular points
/// `(+-1/2, 1/2)` themselves get the midpoint value `1/2`.
pub fn arctan_placement(pt: NormalizedPoint) -> f64 {
    biased_placement_value(pt.x, pt.y, 0.5)
}

/// [`arctan_placement`] with a singular-neighbourhood flag.
pub fn arctan_placement_flagged(pt: NormalizedPoint, exclusion_radius: f64) -> Flagged {
    Flagged {
        value: arctan_placement(pt),
        near_singular: near_singular(pt, 0.5, exclusion_radius),
    }
}

/// Distance from `pt` to the nearer of the singular points `(+-p, 1-p)`.
pub fn singular_distance(pt: NormalizedPoint, p: f64) -> f64 {
    let dy = pt.y - (1.0 - p);
    let d1 = ((pt.x - p).powi(2) + dy * dy).sqrt();
    let d2 = ((pt.x + p).powi(2) + dy * dy).sqrt();
    d1.min(d2)
}

fn near_singular(pt: NormalizedPoint, p: f64, radius: f64) -> bool {
    singular_distance(pt, p) < radius
}

fn biased_placement_value(x: f64, y: f64, p: f64) -> f64 {
    let q = 1.0 - p;
    // p - p^2 - (1-p) x^2 - p y^2 is p(1-p) times (1 - x^2/p - y^2/(1-p))
    let inside = p * q - q * x * x - p * y * y;
    if inside > 0.0 {
        0.5 + (1.0 / PI) * ((y - q) / inside.sqrt()).atan()
    } else if y < q {
        0.0
    } else if y > q {
        1.0
    } else {
        0.5
    }
}

/// Limiting north-going placement probability under bias `p`.
pub fn biased_arctan_placement(pt: NormalizedPoint, bias: BiasParameter) -> f64 {
    biased_placement_value(pt.x, pt.y, bias.0)
}

/// [`biased_arctan_placement`] with a singular-neighbourhood flag.
pub fn biased_arctan_placement_flagged(pt: NormalizedPoint, bias: BiasParameter, exclusion_radius: f64) -> Flagged {
    Flagged {
        value: biased_arctan_placement(pt, bias),
        near_singular: near_singular(pt, bias.0, exclusion_radius),
    }
}

/// The four limiting placement probabilities `(north, east, south, west)`
/// near `(x, y)`, obtained from the north-going law by quarter turns.
pub fn directional_placements(pt: NormalizedPoint) -> [f64; 4] {
    let (x, y) = (pt.x, pt.y);
    [
        biased_placement_value(x, y, 0.5),
        biased_placement_value(-y, x, 0.5),
        biased_placement_value(-x, -y, 0.5),
        biased_placement_value(y, -x, 0.5),
    ]
}

/// Biased counterpart of [`directional_placements`]; east and west use the
/// complementary bias because a quarter turn exchanges the orientations.
pub fn biased_directional_placements(pt: NormalizedPoint, bias: BiasParameter) -> [f64; 4] {
    let (x, y, p) = (pt.x, pt.y, bias.0);
    [
        biased_placement_value(x, y, p),
        biased_placement_value(-y, x, 1.0 - p),
        biased_placement_value(-x, -y, p),
        biased_placement_value(y, -x, 1.0 - p),
    ]
}

/// Zero set of `mix (2x^2 + 2y^2 - 1) + (1 - mix)(2y - 1)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelEllipse {
    pub level: f64,
    pub mix: f64,
}

impl LevelEllipse {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.mix * (2.0 * x * x + 2.0 * y * y - 1.0) + (1.0 - self.mix) * (2.0 * y - 1.0).powi(2)
    }

    /// The `y` values on the ellipse above abscissa `x` (zero, one or two).
    pub fn ys_at(&self, x: f64) -> Vec<f64> {
        let lam = self.mix;
        let a = 4.0 - 2.0 * lam;
        let b = -4.0 * (1.0 - lam);
        let c = 2.0 * lam * x * x + 1.0 - 2.0 * lam;
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Vec::new();
        }
        let r = disc.sqrt();
        if r == 0.0 {
            return vec![-b / (2.0 * a)];
        }
        vec![(-b - r) / (2.0 * a), (-b + r) / (2.0 * a)]
    }

    /// Points of the level set `P = level` itself (the arc on the correct
    /// side of the singular chord), sampled at `count` abscissae.
    pub fn level_points(&self, count: usize) -> Vec<NormalizedPoint> {
        let mut out = Vec::new();
        for i in 0..count {
            let x = -FRAC_1_SQRT_2 + (i as f64 + 0.5) * (2.0 * FRAC_1_SQRT_2) / count as f64;
            for y in self.ys_at(x) {
                let on_side = if self.level < 0.5 {
                    y < 0.5
                } else if self.level > 0.5 {
                    y > 0.5
                } else {
                    true
                };
                if on_side && x * x + y * y < 0.5 && x.abs() + y.abs() <= 1.0 {
                    out.push(NormalizedPoint { x, y });
                }
            }
        }
        out
    }
}

/// The ellipse carrying the level sets `P = level` and `P = 1 - level`.
/// The mixing weight comes from inverting the arctangent law:
/// `mix = T / (1 + T)` with `T = tan^2(pi (level - 1/2))`.
pub fn level_curve(level: f64) -> Result<LevelEllipse> {
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("level must lie strictly between 0 and 1, got {level}"));
    }
    let t = (PI * (level - 0.5)).tan().powi(2);
    Ok(LevelEllipse {
        level,
        mix: t / (1.0 + t),
    })
}

/// Limiting normalized average height function.
pub fn average_height(pt: NormalizedPoint) -> f64 {
    let (x, y) = (pt.x, pt.y);
    let [pn, pe, ps, pw] = directional_placements(pt);
    2.0 * (y * pn - y * ps + (1.0 - x) * pe + (1.0 + x) * pw)
}

/// Tilt `(2 pw - 2 pe, 2 pn - 2 ps)` of the average height function.
pub fn height_tilt(pt: NormalizedPoint) -> Tilt {
    let [pn, pe, ps, pw] = directional_placements(pt);
    Tilt {
        s: 2.0 * (pw - pe),
        t: 2.0 * (pn - ps),
    }
}

/// Tilt components and their Jacobian with respect to `(x, y)`, valid
/// strictly inside the circle `x^2 + y^2 < 1/2`.
fn tilt_and_jacobian(x: f64, y: f64) -> ((f64, f64), [[f64; 2]; 2]) {
    let d2 = 1.0 - 2.0 * x * x - 2.0 * y * y;
    let d = d2.sqrt();
    // atan(g / d) with g linear; d/dx atan(g/d) = (g_x d - g d_x) / (d^2 + g^2)
    let dd_dx = -2.0 * x / d;
    let dd_dy = -2.0 * y / d;
    let term = |g: f64, gx: f64, gy: f64| {
        let den = d2 + g * g;
        ((g / d).atan(), (gx * d - g * dd_dx) / den, (gy * d - g * dd_dy) / den)
    };
    // t = (2/pi)[atan((2y-1)/d) + atan((2y+1)/d)]
    let (t1, t1x, t1y) = term(2.0 * y - 1.0, 0.0, 2.0);
    let (t2, t2x, t2y) = term(2.0 * y + 1.0, 0.0, 2.0);
    // s = -(2/pi)[atan((2x+1)/d) + atan((2x-1)/d)]
    let (s1, s1x, s1y) = term(2.0 * x + 1.0, 2.0, 0.0);
    let (s2, s2x, s2y) = term(2.0 * x - 1.0, 2.0, 0.0);
    let k = 2.0 / PI;
    (
        (-k * (s1 + s2), k * (t1 + t2)),
        [[-k * (s1x + s2x), -k * (s1y + s2y)], [k * (t1x + t2x), k * (t1y + t2y)]],
    )
}

/// Both sides of the two tilt ratio identities at a temperate point:
/// `cos(pi t/2) / cos(pi s/2) = (1 - x^2 - 3y^2) / (1 - 3x^2 - y^2)` and
/// `sin(pi t/2) / sin(pi s/2) = -y/x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussRatios {
    pub cos_ratio: f64,
    pub cos_expected: f64,
    /// `None` on the axis `x = 0`, where both sides are undefined.
    pub sin: Option<(f64, f64)>,
}

impl GaussRatios {
    pub fn max_residual(&self) -> f64 {
        let c = (self.cos_ratio - self.cos_expected).abs();
        self.sin.map_or(c, |(a, b)| c.max((a - b).abs()))
    }
}

pub fn gauss_ratios(pt: NormalizedPoint) -> Result<GaussRatios> {
    let (x, y) = (pt.x, pt.y);
    if pt.radius_sq() >= 0.5 {
        return domain(format!("({x}, {y}) is not in the temperate zone"));
    }
    let tilt = height_tilt(pt);
    let (hs, ht) = (0.5 * PI * tilt.s, 0.5 * PI * tilt.t);
    let sin = (x != 0.0).then(|| (ht.sin() / hs.sin(), -y / x));
    Ok(GaussRatios {
        cos_ratio: ht.cos() / hs.cos(),
        cos_expected: (1.0 - x * x - 3.0 * y * y) / (1.0 - 3.0 * x * x - y * y),
        sin,
    })
}

const TILT_ITERATIONS: usize = 200;
const TILT_TOLERANCE: f64 = 1e-13;

/// Inverts [`height_tilt`] on the temperate zone: the unique point inside the
/// inscribed circle whose tilt is `(s, t)`.
pub fn tilt_to_position(tilt: Tilt) -> Result<NormalizedPoint> {
    let (s, t) = (tilt.s, tilt.t);
    if !(s.is_finite() && t.is_finite()) || s.abs() + t.abs() >= 2.0 {
        return domain(format!("tilt ({s}, {t}) must satisfy |s|+|t| < 2"));
    }
    if s == 0.0 && t == 0.0 {
        return Ok(NormalizedPoint { x: 0.0, y: 0.0 });
    }
    // sign(s) = -sign(x), sign(t) = sign(y); |s| = |t| exactly on |x| = |y|
    if s.abs() == t.abs() {
        return diagonal_inverse(s, t);
    }
    newton_inverse(s, t)
}

fn diagonal_inverse(s: f64, t: f64) -> Result<NormalizedPoint> {
    let sx = -s.signum();
    let sy = t.signum();
    let target = t.abs();
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let ((_, tt), _) = tilt_and_jacobian(sx * mid, sy * mid);
        if tt.abs() < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let r = 0.5 * (lo + hi);
    Ok(NormalizedPoint { x: sx * r, y: sy * r })
}

fn newton_inverse(s: f64, t: f64) -> Result<NormalizedPoint> {
    let residual = |x: f64, y: f64| {
        let ((ss, tt), _) = tilt_and_jacobian(x, y);
        ((ss - s), (tt - t))
    };
    // the tilt is about (-4x/pi, 4y/pi) near the origin
    let mut x = -s * PI / 8.0;
    let mut y = t * PI / 8.0;
    let scale = (x * x + y * y).sqrt();
    if scale > 0.6 {
        x *= 0.6 / scale;
        y *= 0.6 / scale;
    }
    for _ in 0..TILT_ITERATIONS {
        let ((ss, tt), j) = tilt_and_jacobian(x, y);
        let (rs, rt) = (ss - s, tt - t);
        let norm = rs.hypot(rt);
        if norm < TILT_TOLERANCE {
            return Ok(NormalizedPoint { x, y });
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (j[1][1] * rs - j[0][1] * rt) / det;
        let dy = (-j[1][0] * rs + j[0][0] * rt) / det;
        // damped step: halve until the point stays in the disk and the
        // residual decreases
        let mut lambda = 1.0;
        loop {
            let (nx, ny) = (x - lambda * dx, y - lambda * dy);
            if nx * nx + ny * ny < 0.5 && nx * x >= 0.0 && ny * y >= 0.0 {
                let (a, b) = residual(nx, ny);
                if a.hypot(b) < norm {
                    x = nx;
                    y = ny;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::Numerical(format!(
                    "tilt inversion stalled at ({x}, {y}) for tilt ({s}, {t})"
                )));
            }
        }
    }
    let (a, b) = residual(x, y);
    if a.hypot(b) < 1e-10 {
        return Ok(NormalizedPoint { x, y });
    }
    Err(Error::Numerical(format!(
        "tilt inversion did not converge for tilt ({s}, {t})"
    )))
}

/// `u(x,y,t) = 1/(pi sqrt(t^2 - 2x^2 - 2y^2))` inside the cone
/// `x^2 + y^2 < t^2/2`, zero outside, `+inf` exactly on the cone.
pub fn wave_kernel(x: f64, y: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return domain(format!("wave kernel needs t > 0, got {t}"));
    }
    let q = t * t - 2.0 * x * x - 2.0 * y * y;
    Ok(if q > 0.0 {
        1.0 / (PI * q.sqrt())
    } else if q == 0.0 {
        f64::INFINITY
    } else {
        0.0
    })
}

/// Saddle-point data for one creation rate inside the arctic circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleData {
    /// Critical point in the upper half plane.
    pub z1: Complex64,
    /// `4 / (pi sqrt(n^2 - 2 ell^2 - 2 m^2))` with `n` one less than the order.
    pub envelope: f64,
    /// Phase of the saddle contribution (principal branches).
    pub phase: f64,
    /// `envelope * cos^2(phase)`.
    pub estimate: f64,
}

/// Saddle-point estimate of the creation rate `Cr(ell, m; order)`.
pub fn creation_rate_estimate(loc: LatticeLocation) -> Result<SaddleData> {
    let n = loc.n - 1;
    let (ell, m) = (loc.ell, loc.m);
    if n < 1 || (ell + m - n).rem_euclid(2) != 0 || ell.abs() + m.abs() > n {
        return domain(format!("{loc} carries no creation rate"));
    }
    let nf = n as f64;
    let q = nf * nf - 2.0 * (ell * ell + m * m) as f64;
    if q <= 0.0 {
        return domain(format!(
            "{loc} lies on or outside the arctic circle; use decay_bound_check there"
        ));
    }
    let a = ((ell + m + n) / 2) as f64;
    let b = ((ell - m + n) / 2) as f64;
    let u = (ell + m) as f64 / nf;
    let v = (ell - m) as f64 / nf;
    let z1 = Complex64::new(-v, (1.0 - u * u - v * v).sqrt()) / (1.0 - u);
    let one = Complex64::new(1.0, 0.0);
    let log_f = (one + z1).ln() * (nf - b) + (one - z1).ln() * b - z1.ln() * a;
    let second = -(nf - b) / ((one + z1) * (one + z1)) - b / ((one - z1) * (one - z1)) + a / (z1 * z1);
    let phase = (log_f - z1.ln() - second.ln() * 0.5).im;
    let envelope = 4.0 / (PI * q.sqrt());
    Ok(SaddleData {
        z1,
        envelope,
        phase,
        estimate: envelope * phase.cos().powi(2),
    })
}

/// Envelope `2 / (pi sqrt((p - p^2) n^2 - (1-p) ell^2 - p m^2))` of the biased
/// creation rate at `(ell, m; order)`, with `n` one less than the order.
pub fn biased_creation_rate_envelope(loc: LatticeLocation, bias: BiasParameter) -> Result<f64> {
    let n = (loc.n - 1) as f64;
    let p = bias.0;
    let (ell, m) = (loc.ell as f64, loc.m as f64);
    let q = (p - p * p) * n * n - (1.0 - p) * ell * ell - p * m * m;
    if loc.n < 2 || q <= 0.0 {
        return domain(format!("{loc} lies on or outside the arctic ellipse for p = {p}"));
    }
    Ok(2.0 / (PI * q.sqrt()))
}

/// Least-squares line with its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// One sampled order of a decay check.
#[derive(Clone, Debug, PartialEq)]
pub struct DecaySample {
    pub location: LatticeLocation,
    /// `ln Cr` at the location.
    pub ln_creation: f64,
    /// `ln Pl` below the singular chord, `ln (1 - Pl)` above it.
    pub ln_defect: f64,
}

/// Exponential-decay fits of creation rates and frozen-region defects
/// outside the arctic circle.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub point: NormalizedPoint,
    pub samples: Vec<DecaySample>,
    pub creation_fit: LineFit,
    pub defect_fit: LineFit,
}

/// Fits `ln Cr` and the log frozen-region defect against `n` at the lattice
/// points nearest `pt`.
pub fn decay_bound_check(pt: NormalizedPoint, n_values: &[i64]) -> Result<DecayReport> {
    if pt.radius_sq() <= 0.5 {
        return domain(format!(
            "({}, {}) lies inside the arctic circle; decay checks apply outside it",
            pt.x, pt.y
        ));
    }
    if n_values.len() < 2 {
        return domain("decay fit needs at least two orders");
    }
    let upper = pt.y > 0.5;
    let mut samples = Vec::new();
    for &n in n_values {
        let loc = LatticeLocation::nearest(pt.x, pt.y, n);
        let cr = exact::creation_rate(loc);
        let pl = exact::placement_probability(loc);
        let defect = if upper {
            num_traits::One::one()
        } else {
            num_rational::BigRational::from_integer(0.into())
        };
        let defect = if upper { defect - pl } else { pl };
        samples.push(DecaySample {
            location: loc,
            ln_creation: exact::ln_abs_rational(&cr),
            ln_defect: exact::ln_abs_rational(&defect),
        });
    }
    let ns: Vec<f64> = samples.iter().map(|s| s.location.n as f64).collect();
    let cr: Vec<f64> = samples.iter().map(|s| s.ln_creation).collect();
    let de: Vec<f64> = samples.iter().map(|s| s.ln_defect).collect();
    if cr.iter().chain(&de).any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "an exact value vanished; move the point or change the orders".into(),
        ));
    }
    Ok(DecayReport {
        point: pt,
        creation_fit: linear_fit(&ns, &cr),
        defect_fit: linear_fit(&ns, &de),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> NormalizedPoint {
        NormalizedPoint::new(x, y).unwrap()
    }

    #[test]
    fn arctan_examples() {
        assert!((arctan_placement(pt(0.0, 0.0)) - 0.25).abs() < 1e-15);
        assert!((arctan_placement(pt(0.0, 2.0 / 3.0)) - 0.75).abs() < 1e-12);
        assert_eq!(arctan_placement(pt(0.6, -0.4)), 0.0);
        assert_eq!(arctan_placement(pt(0.1, 0.9)), 1.0);
        assert!(NormalizedPoint::new(0.8, 0.8).is_err());
    }

    #[test]
    fn singular_points_are_flagged() {
        let f = arctan_placement_flagged(pt(0.5, 0.5), DEFAULT_SINGULAR_RADIUS);
        assert!(f.near_singular);
        assert_eq!(f.value, 0.5);
        let g = arctan_placement_flagged(pt(-0.47, 0.52), DEFAULT_SINGULAR_RADIUS);
        assert!(g.near_singular);
        assert!(!arctan_placement_flagged(pt(0.0, 0.0), DEFAULT_SINGULAR_RADIUS).near_singular);
    }

    #[test]
    fn biased_examples() {
        let half = BiasParameter::new(0.5).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.1), (-0.2, 0.55), (0.6, -0.3)] {
            assert_eq!(biased_arctan_placement(pt(x, y), half), arctan_placement(pt(x, y)));
        }
        for p in [0.2, 1.0 / 3.0, 0.7] {
            let b = BiasParameter::new(p).unwrap();
            assert!((biased_arctan_placement(pt(0.0, 1.0 - p), b) - 0.5).abs() < 1e-15);
        }
        assert!(BiasParameter::new(1.0).is_err());
    }

    #[test]
    fn directional_examples() {
        let d = directional_placements(pt(0.0, 0.0));
        for v in d {
            assert!((v - 0.25).abs() < 1e-15);
        }
        assert_eq!(directional_placements(pt(0.0, 0.8)), [1.0, 0.0, 0.0, 0.0]);
        for &(x, y) in &[(0.1, 0.2), (-0.4, 0.3), (0.2, -0.6), (0.45, 0.45)] {
            let s: f64 = directional_placements(pt(x, y)).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            for p in [0.25, 0.6] {
                let s: f64 = biased_directional_placements(pt(x, y), BiasParameter::new(p).unwrap())
                    .iter()
                    .sum();
                assert!((s - 1.0).abs() < 1e-12, "p={p} ({x},{y}) sum {s}");
            }
        }
    }

    #[test]
    fn level_curve_examples() {
        assert_eq!(level_curve(0.5).unwrap().mix, 0.0);
        assert!(level_curve(1e-9).unwrap().mix > 1.0 - 1e-12);
        let e = level_curve(0.25).unwrap();
        assert!(e.eval(0.0, 0.0).abs() < 1e-12);
        assert!(e.eval(0.0, 2.0 / 3.0).abs() < 1e-12);
        assert!(level_curve(0.0).is_err());
        assert!(level_curve(1.0).is_err());
    }

    #[test]
    fn level_curves_are_level_sets() {
        for i in 1..10 {
            let level = i as f64 / 10.0;
            let e = level_curve(level).unwrap();
            let pts = e.level_points(64);
            assert!(!pts.is_empty());
            for p in pts {
                let v = arctan_placement(p);
                assert!((v - level).abs() < 1e-9, "level {level} at {p:?}: {v}");
            }
        }
    }

    #[test]
    fn average_height_examples() {
        assert!((average_height(pt(0.0, 1.0)) - 2.0).abs() < 1e-12);
        assert!((average_height(pt(0.0, -1.0)) - 2.0).abs() < 1e-12);
        assert!(average_height(pt(1.0, 0.0)).abs() < 1e-12);
        assert!((average_height(pt(0.3, 0.3)) - 1.0).abs() < 1e-12);
        assert!((average_height(pt(-0.2, -0.2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tilt_examples() {
        let t0 = height_tilt(pt(0.0, 0.0));
        assert!(t0.s.abs() < 1e-15 && t0.t.abs() < 1e-15);
        let tn = height_tilt(pt(0.0, 0.8));
        assert_eq!((tn.s, tn.t), (0.0, 2.0));
    }

    #[test]
    fn tilt_matches_finite_differences() {
        let h = 1e-4;
        for &(x, y) in &[(0.1, 0.2), (-0.3, 0.25), (0.05, -0.4), (0.4, 0.1)] {
            let t = height_tilt(pt(x, y));
            let dx = (average_height(pt(x + h, y)) - average_height(pt(x - h, y))) / (2.0 * h);
            let dy = (average_height(pt(x, y + h)) - average_height(pt(x, y - h))) / (2.0 * h);
            assert!((t.s - dx).abs() < 1e-6, "{x},{y}: {} vs {dx}", t.s);
            assert!((t.t - dy).abs() < 1e-6, "{x},{y}: {} vs {dy}", t.t);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let h = 1e-6;
        for &(x, y) in &[(0.1, 0.2), (-0.3, 0.25), (0.05, -0.4)] {
            let (_, j) = tilt_and_jacobian(x, y);
            let ((s1, t1), _) = tilt_and_jacobian(x + h, y);
            let ((s0, t0), _) = tilt_and_jacobian(x - h, y);
            assert!((j[0][0] - (s1 - s0) / (2.0 * h)).abs() < 1e-6);
            assert!((j[1][0] - (t1 - t0) / (2.0 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn tilt_inversion_round_trips() {
        assert_eq!(tilt_to_position(Tilt::new(0.0, 0.0).unwrap()).unwrap(), pt(0.0, 0.0));
        let target = pt(0.2, -0.3);
        let back = tilt_to_position(height_tilt(target)).unwrap();
        assert!((back.x - 0.2).abs() < 1e-8 && (back.y + 0.3).abs() < 1e-8);
        let diag = pt(-0.3, 0.3);
        let back = tilt_to_position(height_tilt(diag)).unwrap();
        assert!((back.x - diag.x).abs() < 1e-8 && (back.y - diag.y).abs() < 1e-8);
        assert!(tilt_to_position(Tilt { s: 1.5, t: 0.5 }).is_err());
    }

    #[test]
    fn wave_kernel_examples() {
        assert!((wave_kernel(0.0, 0.0, 1.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(wave_kernel(1.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(wave_kernel(0.5, 0.5, 1.0).unwrap(), f64::INFINITY);
        assert!(wave_kernel(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn wave_kernel_solves_wave_equation() {
        let h = 1e-3;
        for &(x, y, t) in &[(0.1, 0.2, 1.0), (-0.3, 0.1, 1.5), (0.0, 0.0, 0.8)] {
            let u = |a: f64, b: f64, c: f64| wave_kernel(a, b, c).unwrap();
            let utt = (u(x, y, t + h) - 2.0 * u(x, y, t) + u(x, y, t - h)) / (h * h);
            let uxx = (u(x + h, y, t) - 2.0 * u(x, y, t) + u(x - h, y, t)) / (h * h);
            let uyy = (u(x, y + h, t) - 2.0 * u(x, y, t) + u(x, y - h, t)) / (h * h);
            assert!((utt - 0.5 * (uxx + uyy)).abs() < 1e-4, "{utt} vs {}", 0.5 * (uxx + uyy));
        }
    }

    #[test]
    fn saddle_envelope_at_center() {
        for order in [51i64, 101, 201] {
            let d = creation_rate_estimate(LatticeLocation::new(0, 0, order)).unwrap();
            let n = (order - 1) as f64;
            assert!((d.envelope - 4.0 / (PI * n)).abs() < 1e-15);
            assert!(d.estimate >= 0.0 && d.estimate <= d.envelope);
            let r2 = d.z1.norm_sqr();
            assert!((r2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_point_lies_on_circle() {
        let loc = LatticeLocation::new(10, 21, 100);
        let d = creation_rate_estimate(loc).unwrap();
        let n = 99.0;
        let u = (10.0 + 21.0) / n;
        assert!((d.z1.norm_sqr() - (1.0 + u) / (1.0 - u)).abs() < 1e-12);
        assert!(creation_rate_estimate(LatticeLocation::new(70, 21, 100)).is_err());
        assert!(creation_rate_estimate(LatticeLocation::new(0, 0, 100)).is_err());
    }

    #[test]
    fn biased_envelope_examples() {
        let p = BiasParameter::new(0.3).unwrap();
        let order = 101;
        let e = biased_creation_rate_envelope(LatticeLocation::new(0, 0, order), p).unwrap();
        let n = 100.0;
        assert!((e - 2.0 / (PI * n * (0.3f64 - 0.09).sqrt())).abs() < 1e-15);
        let half = BiasParameter::new(0.5).unwrap();
        let loc = LatticeLocation::new(4, 9, 100);
        let eb = biased_creation_rate_envelope(loc, half).unwrap();
        let eu = creation_rate_estimate(loc).unwrap().envelope;
        assert!((eb - eu).abs() < 1e-15);
    }

    #[test]
    fn line_fit_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = linear_fit(&xs, &ys);
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_ratio_identities() {
        for i in -6..=6 {
            for j in -6..=6 {
                let pt = NormalizedPoint {
                    x: 0.1 * i as f64 + 0.013,
                    y: 0.1 * j as f64 - 0.007,
                };
                if pt.radius_sq() >= 0.49 {
                    continue;
                }
                let r = gauss_ratios(pt).unwrap();
                assert!(r.max_residual() < 1e-9, "{pt:?} {r:?}");
            }
        }
        assert!(gauss_ratios(NormalizedPoint::new(0.6, 0.4).unwrap()).is_err());
    }
}
