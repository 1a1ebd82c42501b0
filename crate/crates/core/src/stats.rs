//! Monte Carlo aggregation over shuffled samples, and comparisons against
//! the exact and asymptotic formulas.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::Deserialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::asymptotics::{self, BiasParameter, NormalizedPoint};
use crate::error::{domain, Error, Result};
use crate::exact::{self, BiasValue, LatticeLocation, PlacementGrid};
use crate::geometry::{
    aztec_diamond, height_from_tiling, north_equivalent, polar_classify, space_location, DominoClass, DominoSpace,
    PolarLabel, Region, Tiling, Vertex,
};
use crate::shuffle::{sample_biased, sample_state, RandomSeed};

/// Per-space occupation counts over a batch of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalGrid {
    pub n: i64,
    pub bias: BiasValue,
    pub samples: u64,
    pub counts: BTreeMap<DominoSpace, u64>,
}

impl EmpiricalGrid {
    pub fn count(&self, space: &DominoSpace) -> u64 {
        self.counts.get(space).copied().unwrap_or(0)
    }

    pub fn frequency(&self, space: &DominoSpace) -> f64 {
        self.count(space) as f64 / self.samples as f64
    }

    /// `sqrt(f (1 - f) / samples)`.
    pub fn stderr(&self, space: &DominoSpace) -> f64 {
        binomial_stderr(self.frequency(space), self.samples)
    }

    /// Counts at the north-going spaces, keyed by location.
    pub fn north(&self) -> BTreeMap<LatticeLocation, u64> {
        self.counts
            .iter()
            .filter(|(s, _)| s.class == DominoClass::North)
            .map(|(s, c)| (space_location(s, self.n).unwrap(), *c))
            .collect()
    }

    /// Counts of all four classes pooled at their north-equivalent location
    /// (meaningful for the uniform distribution, which is rotation invariant).
    /// Each location then has `4 * samples` trials.
    pub fn pooled_north(&self) -> BTreeMap<LatticeLocation, u64> {
        let mut out = BTreeMap::new();
        for (s, c) in &self.counts {
            *out.entry(north_equivalent(s, self.n).1).or_insert(0) += c;
        }
        out
    }

    fn merge(mut self, other: EmpiricalGrid) -> EmpiricalGrid {
        self.samples += other.samples;
        for (s, c) in other.counts {
            *self.counts.entry(s).or_insert(0) += c;
        }
        self
    }
}

pub fn binomial_stderr(f: f64, samples: u64) -> f64 {
    (f * (1.0 - f) / samples as f64).sqrt()
}

/// Shuffles `samples` tilings (seeds derived from `seed`) and counts how
/// often each domino space is occupied.
pub fn empirical_placement(n: i64, bias: &BiasValue, samples: u64, seed: RandomSeed) -> Result<EmpiricalGrid> {
    if samples == 0 {
        return domain("need at least one sample");
    }
    let coloring = aztec_diamond(n)?.coloring();
    let empty = || EmpiricalGrid {
        n,
        bias: bias.clone(),
        samples: 0,
        counts: BTreeMap::new(),
    };
    (0..samples)
        .into_par_iter()
        .map(|k| -> Result<EmpiricalGrid> {
            let state = sample_state(n, bias, seed.derive(k))?;
            let mut g = empty();
            g.samples = 1;
            state.for_each_domino(|sq, class| {
                let space = DominoSpace::at(sq, class.is_horizontal(), coloring);
                *g.counts.entry(space).or_insert(0) += 1;
            });
            Ok(g)
        })
        .try_reduce(empty, |a, b| Ok(a.merge(b)))
}

/// One row of an empirical-versus-exact comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacementRow {
    pub location: LatticeLocation,
    pub exact: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// `(empirical - exact) / sqrt(exact (1 - exact) / trials)`; zero when
    /// both agree on a deterministic space.
    pub z: f64,
}

/// Compares north-going counts (or pooled counts) with exact values.
pub fn compare_with_exact(
    counts: &BTreeMap<LatticeLocation, u64>,
    trials: u64,
    exact: &PlacementGrid,
) -> Vec<PlacementRow> {
    counts
        .iter()
        .map(|(loc, c)| {
            let p = exact.get_f64(loc.ell, loc.m);
            let f = *c as f64 / trials as f64;
            let sigma = binomial_stderr(p, trials);
            let z = if sigma > 0.0 {
                (f - p) / sigma
            } else if f == p {
                0.0
            } else {
                f64::INFINITY
            };
            PlacementRow {
                location: *loc,
                exact: p,
                empirical: f,
                stderr: binomial_stderr(f, trials),
                z,
            }
        })
        .collect()
}

/// Writes a placement CSV `ell,m,exact,empirical,stderr`.
pub fn write_placement_csv(rows: &[PlacementRow], mut w: impl std::io::Write) -> std::io::Result<()> {
    writeln!(w, "ell,m,exact,empirical,stderr")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.location.ell,
            r.location.m,
            fmt12(r.exact),
            fmt12(r.empirical),
            fmt12(r.stderr)
        )?;
    }
    Ok(())
}

/// Twelve significant digits.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    if (0..=20).contains(&digits) {
        let s = format!("{:.*}", digits as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

/// Pearson chi-square goodness of fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square(observed: &[u64], probabilities: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probabilities.len() || observed.len() < 2 {
        return domain("chi-square needs matching categories, at least two");
    }
    let total: u64 = observed.iter().sum();
    let statistic = observed
        .iter()
        .zip(probabilities)
        .map(|(o, p)| {
            let e = p * total as f64;
            (*o as f64 - e).powi(2) / e
        })
        .sum::<f64>();
    let dof = observed.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

/// Frontier of the temperate zone and its distance to the limiting curve.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryReport {
    pub boundary_points: Vec<NormalizedPoint>,
    /// Largest distance from a frontier point to the circle (or ellipse),
    /// in normalized units; zero when the frontier is empty.
    pub max_deviation: f64,
    /// Set when the tiling has no temperate zone at all.
    pub degenerate: bool,
}

/// Distance from `(x, y)` to the ellipse `x^2/a^2 + y^2/b^2 = 1`.
pub fn ellipse_distance(x: f64, y: f64, a: f64, b: f64) -> f64 {
    // minimize over the angle of (a cos t, b sin t); the first quadrant suffices
    let (px, py) = (x.abs(), y.abs());
    let f = |t: f64| (a * t.cos() - px).hypot(b * t.sin() - py);
    let mut best = (0.0, f(0.0));
    let grid = 256;
    for k in 0..=grid {
        let t = std::f64::consts::FRAC_PI_2 * k as f64 / grid as f64;
        let d = f(t);
        if d < best.1 {
            best = (t, d);
        }
    }
    let step = std::f64::consts::FRAC_PI_2 / grid as f64;
    let (mut lo, mut hi) = (
        (best.0 - step).max(0.0),
        (best.0 + step).min(std::f64::consts::FRAC_PI_2),
    );
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

/// Frontier of the temperate zone: temperate dominos adjacent to a polar
/// one, measured against the circle `x^2 + y^2 = 1/2` or, under bias `p`,
/// the ellipse `x^2/p + y^2/(1-p) = 1`.
pub fn arctic_report(t: &Tiling, bias: Option<f64>) -> Result<BoundaryReport> {
    let n = t
        .order()
        .ok_or_else(|| Error::Domain("arctic_report needs an Aztec diamond tiling".into()))? as f64;
    let labels = polar_classify(t).labels;
    let mut points = Vec::new();
    for (k, d) in t.dominos().iter().enumerate() {
        if labels[k] != PolarLabel::Temperate {
            continue;
        }
        let touches_polar = d.squares().iter().any(|s| {
            [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(di, dj)| {
                let nb = crate::geometry::GridSquare::new(s.i + di, s.j + dj);
                t.domino_index(nb)
                    .is_some_and(|j| j != k && labels[j] != PolarLabel::Temperate)
            })
        });
        if touches_polar {
            let [a, b] = d.squares();
            let (ax, ay) = a.center();
            let (bx, by) = b.center();
            points.push(NormalizedPoint {
                x: 0.5 * (ax + bx) / n,
                y: 0.5 * (ay + by) / n,
            });
        }
    }
    let degenerate = labels.iter().all(|l| *l != PolarLabel::Temperate);
    let distance = |p: &NormalizedPoint| match bias {
        None => (p.radius_sq().sqrt() - FRAC_1_SQRT_2).abs(),
        Some(q) => ellipse_distance(p.x, p.y, q.sqrt(), (1.0 - q).sqrt()),
    };
    let max_deviation = points.iter().map(distance).fold(0.0, f64::max);
    Ok(BoundaryReport {
        boundary_points: points,
        max_deviation,
        degenerate,
    })
}

/// Max frontier deviations over a batch of samples.
pub fn arctic_deviations(n: i64, bias: &BiasValue, samples: u64, seed: RandomSeed) -> Result<Vec<f64>> {
    let p = (!bias.is_half()).then(|| bias.to_f64());
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let t = sample_biased(n, bias, seed.derive(k))?;
            Ok(arctic_report(&t, p)?.max_deviation)
        })
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Shortest edge-path length from `v` to the region's boundary.
pub fn boundary_distance(region: &Region, v: Vertex) -> Result<usize> {
    if !region.has_vertex(v) {
        return domain(format!("{v:?} is not a vertex of the region"));
    }
    let boundary: std::collections::HashSet<Vertex> = region.boundary_vertices().into_iter().collect();
    path_length(region, v, |u| boundary.contains(&u))
}

/// Shortest edge-path length between two vertices.
pub fn vertex_distance(region: &Region, v: Vertex, w: Vertex) -> Result<usize> {
    if !region.has_vertex(v) || !region.has_vertex(w) {
        return domain("both vertices must belong to the region");
    }
    path_length(region, v, |u| u == w)
}

fn path_length(region: &Region, start: Vertex, goal: impl Fn(Vertex) -> bool) -> Result<usize> {
    let mut adj: std::collections::HashMap<Vertex, Vec<Vertex>> = std::collections::HashMap::new();
    for e in region.edges() {
        adj.entry(e.from).or_default().push(e.to);
        adj.entry(e.to).or_default().push(e.from);
    }
    let mut dist = std::collections::HashMap::from([(start, 0usize)]);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        if goal(u) {
            return Ok(dist[&u]);
        }
        for &w in &adj[&u] {
            if !dist.contains_key(&w) {
                dist.insert(w, dist[&u] + 1);
                queue.push_back(w);
            }
        }
    }
    Err(Error::Domain("target unreachable".into()))
}

/// Observed tail frequency next to its bound `2 exp(-c^2 / 32)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailCheck {
    pub c: f64,
    /// Fraction of samples with `|X - mean| > c sqrt(m)`.
    pub frequency: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceReport {
    pub vertex: Vertex,
    /// Second vertex, for the height-difference version.
    pub other: Option<Vertex>,
    /// Path length used in the bounds.
    pub m: usize,
    pub samples: u64,
    pub mean: f64,
    pub sample_variance: f64,
    /// `64 m`.
    pub bound: f64,
    pub tails: Vec<TailCheck>,
}

impl VarianceReport {
    pub fn within_bounds(&self) -> bool {
        self.sample_variance <= self.bound && self.tails.iter().all(|t| t.frequency <= t.bound)
    }
}

pub const TAIL_CONSTANTS: [f64; 3] = [2.0, 4.0, 6.0];

fn variance_report(vertex: Vertex, other: Option<Vertex>, m: usize, values: &[i64]) -> VarianceReport {
    let k = values.len() as f64;
    let mean = values.iter().sum::<i64>() as f64 / k;
    let var = values.iter().map(|v| (*v as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    let tails = TAIL_CONSTANTS
        .iter()
        .map(|&c| {
            let cut = c * (m as f64).sqrt();
            let hits = values.iter().filter(|v| (**v as f64 - mean).abs() > cut).count();
            TailCheck {
                c,
                frequency: hits as f64 / k,
                bound: 2.0 * (-c * c / 32.0).exp(),
            }
        })
        .collect();
    VarianceReport {
        vertex,
        other,
        m,
        samples: values.len() as u64,
        mean,
        sample_variance: var,
        bound: 64.0 * m as f64,
        tails,
    }
}

fn sampled_heights(n: i64, vertices: &[Vertex], samples: u64, seed: RandomSeed) -> Result<Vec<Vec<i64>>> {
    let half = BiasValue::half();
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let t = sample_biased(n, &half, seed.derive(k))?;
            let h = height_from_tiling(&t, None)?;
            Ok(vertices.iter().map(|v| h.get(*v).unwrap() as i64).collect())
        })
        .collect()
}

/// Sample variance and tail frequencies of `H(v)` over uniform samples.
pub fn height_concentration(n: i64, vertex: Vertex, samples: u64, seed: RandomSeed) -> Result<VarianceReport> {
    if samples < 2 {
        return domain("need at least two samples");
    }
    let region = aztec_diamond(n)?;
    let m = boundary_distance(&region, vertex)?;
    if m == 0 {
        return domain(format!("{vertex:?} is a boundary vertex"));
    }
    let values: Vec<i64> = sampled_heights(n, &[vertex], samples, seed)?
        .into_iter()
        .map(|v| v[0])
        .collect();
    Ok(variance_report(vertex, None, m, &values))
}

/// The same for `H(v) - H(w)`, with `m` the path length from `v` to `w`.
pub fn height_difference_concentration(
    n: i64,
    v: Vertex,
    w: Vertex,
    samples: u64,
    seed: RandomSeed,
) -> Result<VarianceReport> {
    if samples < 2 {
        return domain("need at least two samples");
    }
    let region = aztec_diamond(n)?;
    let m = vertex_distance(&region, v, w)?;
    let values: Vec<i64> = sampled_heights(n, &[v, w], samples, seed)?
        .into_iter()
        .map(|x| x[0] - x[1])
        .collect();
    Ok(variance_report(v, Some(w), m, &values))
}

/// Mean heights over samples, divided by `n`, at every vertex.
pub fn mean_normalized_heights(n: i64, samples: u64, seed: RandomSeed) -> Result<BTreeMap<Vertex, f64>> {
    let region = aztec_diamond(n)?;
    let vertices = region.vertices();
    let half = BiasValue::half();
    let sums = (0..samples)
        .into_par_iter()
        .map(|k| -> Result<Vec<i64>> {
            let t = sample_biased(n, &half, seed.derive(k))?;
            let h = height_from_tiling(&t, None)?;
            Ok(vertices.iter().map(|v| h.get(*v).unwrap() as i64).collect())
        })
        .try_reduce(
            || vec![0i64; vertices.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    let scale = samples as f64 * n as f64;
    Ok(vertices
        .into_iter()
        .zip(sums)
        .map(|(v, s)| (v, s as f64 / scale))
        .collect())
}

/// Which normalized points enter a sup-norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionMask {
    /// Keep points with `|x| + |y| <= max_l1`.
    pub max_l1: f64,
    /// Drop points closer than this to a singular point.
    pub singular_exclusion: f64,
}

impl Default for RegionMask {
    fn default() -> Self {
        RegionMask {
            max_l1: 0.8,
            singular_exclusion: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: i64,
    /// Sup over masked locations of `|exact - limit|`.
    pub supnorm: f64,
    pub argmax: LatticeLocation,
    /// Largest `|Pl - limit|` over the locations nearest the centre; for
    /// even orders four locations tie.
    pub central_dev: f64,
}

/// Sup-norm distance between exact placement probabilities and the
/// arctangent law (or its biased form) over the masked locations.
pub fn convergence_report(n_values: &[i64], mask: RegionMask, bias: Option<&BiasValue>) -> Result<Vec<ConvergenceRow>> {
    let bias = bias.filter(|b| !b.is_half());
    let p = bias.map_or(0.5, |b| b.to_f64());
    let bp = BiasParameter::new(p)?;
    n_values
        .par_iter()
        .map(|&n| {
            let grid = match bias {
                None => exact::placement_grid(n),
                Some(b) => exact::biased_placement_grid(n, b),
            };
            let mut sup = 0.0f64;
            let mut argmax = LatticeLocation::new(0, 0, n);
            for loc in LatticeLocation::all(n) {
                let pt = NormalizedPoint::of(loc);
                if pt.x.abs() + pt.y.abs() > mask.max_l1
                    || asymptotics::singular_distance(pt, p) < mask.singular_exclusion
                {
                    continue;
                }
                let limit = asymptotics::biased_arctan_placement(pt, bp);
                let d = (grid.get_f64(loc.ell, loc.m) - limit).abs();
                if d > sup {
                    sup = d;
                    argmax = loc;
                }
            }
            let centre_limit = asymptotics::biased_arctan_placement(NormalizedPoint { x: 0.0, y: 0.0 }, bp);
            let central_dev = LatticeLocation::nearest_all(0.0, 0.0, n)
                .into_iter()
                .map(|c| (grid.get_f64(c.ell, c.m) - centre_limit).abs())
                .fold(0.0, f64::max);
            Ok(ConvergenceRow {
                n,
                supnorm: sup,
                argmax,
                central_dev,
            })
        })
        .collect()
}

pub fn write_convergence_csv(rows: &[ConvergenceRow], mut w: impl std::io::Write) -> std::io::Result<()> {
    writeln!(w, "n,supnorm,central_dev")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.n, fmt12(r.supnorm), fmt12(r.central_dev))?;
    }
    Ok(())
}

pub fn write_arctic_csv(deviations: &[f64], mut w: impl std::io::Write) -> std::io::Result<()> {
    writeln!(w, "sample_id,max_deviation")?;
    for (k, d) in deviations.iter().enumerate() {
        writeln!(w, "{k},{}", fmt12(*d))?;
    }
    Ok(())
}

/// Thresholds fixed by a one-off calibration run over fixed seeds.
#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct Calibration {
    pub version: u32,
    pub arctic: ArcticCalibration,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct ArcticCalibration {
    pub order: i64,
    pub samples: u64,
    pub seed: u64,
    pub uniform_median: f64,
    pub uniform_threshold: f64,
    pub bias: String,
    pub biased_median: f64,
    pub biased_threshold: f64,
}

pub const CALIBRATION_TOML: &str = include_str!("../data/calibration.toml");

pub fn calibration() -> Result<Calibration> {
    parse_calibration(CALIBRATION_TOML)
}

pub fn parse_calibration(text: &str) -> Result<Calibration> {
    toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| text[..s.start].lines().count()),
        message: e.message().to_string(),
    })
}

/// Reruns the calibration protocol; returns `(uniform_median, biased_median)`.
pub fn run_arctic_calibration(c: &ArcticCalibration) -> Result<(f64, f64)> {
    let uniform = arctic_deviations(c.order, &BiasValue::half(), c.samples, RandomSeed(c.seed))?;
    let biased = arctic_deviations(c.order, &BiasValue::parse(&c.bias)?, c.samples, RandomSeed(c.seed))?;
    Ok((median(&uniform), median(&biased)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binomial_stderr_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (p, trials, reps) = (0.3, 400u64, 4000);
        let freqs: Vec<f64> = (0..reps)
            .map(|_| (0..trials).filter(|_| rng.random::<f64>() < p).count() as f64 / trials as f64)
            .collect();
        let mean = freqs.iter().sum::<f64>() / reps as f64;
        let sd = (freqs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        let predicted = binomial_stderr(p, trials);
        assert!((sd / predicted - 1.0).abs() < 0.05, "{sd} vs {predicted}");
    }

    #[test]
    fn order_two_frequency() {
        let g = empirical_placement(2, &BiasValue::half(), 20_000, RandomSeed(5)).unwrap();
        let loc = LatticeLocation::new(0, 1, 2);
        let f = g.north()[&loc] as f64 / g.samples as f64;
        assert!((f - 0.75).abs() < 4.0 * binomial_stderr(0.75, g.samples), "{f}");
        for c in g.counts.values() {
            assert!(*c <= g.samples);
        }
    }

    #[test]
    fn frozen_corners() {
        let g = empirical_placement(64, &BiasValue::half(), 40, RandomSeed(9)).unwrap();
        let north = g.north();
        assert_eq!(north[&LatticeLocation::new(0, 63, 64)], 40);
        assert_eq!(north.get(&LatticeLocation::new(0, -63, 64)).copied().unwrap_or(0), 0);
        assert!(g.counts.values().all(|c| *c <= g.samples));
    }

    #[test]
    fn extremal_tilings_have_no_frontier() {
        for t in [Tiling::all_horizontal(6).unwrap(), Tiling::all_vertical(6).unwrap()] {
            let r = arctic_report(&t, None).unwrap();
            assert!(r.degenerate);
            assert!(r.boundary_points.is_empty());
            assert_eq!(r.max_deviation, 0.0);
        }
    }

    #[test]
    fn ellipse_distance_examples() {
        assert!((ellipse_distance(0.0, 0.0, 0.5, 0.8) - 0.5).abs() < 1e-12);
        assert!((ellipse_distance(1.0, 0.0, 0.5, 0.8) - 0.5).abs() < 1e-12);
        let r = FRAC_1_SQRT_2;
        assert!((ellipse_distance(0.3, 0.4, r, r) - (r - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn center_vertex_distance() {
        let d = aztec_diamond(64).unwrap();
        assert_eq!(boundary_distance(&d, (0, 0)).unwrap(), 64);
        assert_eq!(vertex_distance(&d, (0, 0), (3, -2)).unwrap(), 5);
    }

    #[test]
    fn fmt12_digits() {
        assert_eq!(fmt12(0.25), "0.25");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(1234.5), "1234.5");
        assert_eq!(fmt12(0.0), "0");
    }

    #[test]
    fn chi_square_examples() {
        let c = chi_square(&[50, 50], &[0.5, 0.5]).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert!((c.p_value - 1.0).abs() < 1e-12);
        let c = chi_square(&[90, 10], &[0.5, 0.5]).unwrap();
        assert!(c.p_value < 1e-10);
    }

    #[test]
    fn calibration_file_parses() {
        let c = calibration().unwrap();
        assert_eq!(c.version, 1);
        assert!(c.arctic.uniform_threshold >= c.arctic.uniform_median);
        assert!(c.arctic.biased_threshold >= c.arctic.biased_median);
        BiasValue::parse(&c.arctic.bias).unwrap();
        assert!(parse_calibration("version = \"x\"").is_err());
    }

    #[test]
    fn concentration_small() {
        let r = height_concentration(8, (0, 0), 200, RandomSeed(2)).unwrap();
        assert_eq!(r.m, 8);
        assert!(r.within_bounds());
        let r = height_difference_concentration(8, (0, 0), (2, 0), 200, RandomSeed(2)).unwrap();
        assert_eq!(r.m, 2);
        assert!(r.within_bounds());
    }

    #[test]
    #[ignore = "calibration run, about a minute in release mode"]
    fn calibration_reproduces() {
        let c = calibration().unwrap().arctic;
        let (u, b) = run_arctic_calibration(&c).unwrap();
        assert!((u - c.uniform_median).abs() < 1e-9, "{u}");
        assert!((b - c.biased_median).abs() < 1e-9, "{b}");
    }
}
