//! Exact rational placement probabilities and creation rates.
//!
//! Every quantity here is a rational number computed without rounding.
//! Uniform statistics are the bias `p = 1/2` special case of the biased
//! ones, so both share one integer engine: for a bias `p = P/Q` in lowest
//! terms, the coefficients of `(P + (Q-P) z)^(n-b) (1-z)^b` are integers,
//! and every placement probability of the order-`N` diamond is an integer
//! over `Q^N P^N`.  For the uniform case that denominator is `2^N`.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

pub type ExactInteger = BigInt;
pub type ExactRational = BigRational;

/// Index of a Krawtchouk coefficient: the coefficient of `z^a` in
/// `(1+z)^(n-b) (1-z)^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KrawtchoukIndex {
    pub a: i64,
    pub b: i64,
    pub n: i64,
}

impl KrawtchoukIndex {
    pub fn new(a: i64, b: i64, n: i64) -> Self {
        KrawtchoukIndex { a, b, n }
    }

    fn check(&self) -> Result<()> {
        if self.n < 0 || self.b < 0 || self.b > self.n {
            return domain(format!(
                "Krawtchouk index requires 0 <= b <= n, got b={} n={}",
                self.b, self.n
            ));
        }
        Ok(())
    }
}

/// Location `(ell, m)` of a north-going domino space (midpoint of its bottom
/// edge) inside the Aztec diamond of order `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeLocation {
    pub ell: i64,
    pub m: i64,
    pub n: i64,
}

impl LatticeLocation {
    pub fn new(ell: i64, m: i64, n: i64) -> Self {
        LatticeLocation { ell, m, n }
    }

    /// True when a north-going space actually sits at this location.
    pub fn is_occupiable(&self) -> bool {
        self.n >= 1 && self.ell.abs() + self.m.abs() < self.n && (self.ell + self.m - (self.n - 1)).rem_euclid(2) == 0
    }

    /// Every occupiable location of the order-`n` diamond, row by row.
    pub fn all(n: i64) -> impl Iterator<Item = LatticeLocation> {
        let r = (n - 1).max(0);
        (-r..=r).flat_map(move |m| {
            (-r..=r)
                .map(move |ell| LatticeLocation::new(ell, m, n))
                .filter(|loc| loc.is_occupiable())
        })
    }

    /// Normalized coordinates `(ell/n, m/n)`.
    pub fn normalized(&self) -> (f64, f64) {
        (self.ell as f64 / self.n as f64, self.m as f64 / self.n as f64)
    }

    /// The occupiable location nearest to the normalized point `(x, y)`.
    /// Ties go to the first candidate in `nearest_all`.
    pub fn nearest(x: f64, y: f64, n: i64) -> LatticeLocation {
        Self::nearest_all(x, y, n)[0]
    }

    /// Every occupiable location at the minimal distance from `(x, y)`.
    pub fn nearest_all(x: f64, y: f64, n: i64) -> Vec<LatticeLocation> {
        let tx = x * n as f64;
        let ty = y * n as f64;
        let (cx, cy) = (tx.round() as i64, ty.round() as i64);
        let mut found: Vec<(f64, LatticeLocation)> = Vec::new();
        for ell in cx - 2..=cx + 2 {
            for m in cy - 2..=cy + 2 {
                let loc = LatticeLocation::new(ell, m, n);
                if loc.is_occupiable() {
                    found.push(((ell as f64 - tx).powi(2) + (m as f64 - ty).powi(2), loc));
                }
            }
        }
        let best = found.iter().map(|f| f.0).fold(f64::INFINITY, f64::min);
        found.into_iter().filter(|f| f.0 <= best + 1e-9).map(|f| f.1).collect()
    }
}

impl fmt::Display for LatticeLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{})", self.ell, self.m, self.n)
    }
}

/// Probability `p` of the horizontal pair in the Gibbs distribution, `0 < p < 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BiasValue(BigRational);

impl BiasValue {
    pub fn new(p: BigRational) -> Result<Self> {
        if p <= BigRational::zero() || p >= BigRational::one() {
            return domain(format!("bias must satisfy 0 < p < 1, got {p}"));
        }
        Ok(BiasValue(p))
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return domain("bias denominator is zero");
        }
        Self::new(BigRational::new(num.into(), den.into()))
    }

    /// Parses `"1/3"`, `"0.25"` or `"1"`-style strings.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            let num: BigInt = a
                .trim()
                .parse()
                .map_err(|_| crate::Error::Domain(format!("bad bias {s:?}")))?;
            let den: BigInt = b
                .trim()
                .parse()
                .map_err(|_| crate::Error::Domain(format!("bad bias {s:?}")))?;
            if den.is_zero() {
                return domain("bias denominator is zero");
            }
            return Self::new(BigRational::new(num, den));
        }
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        let digits = format!("{int_part}{frac_part}");
        let num: BigInt = digits
            .parse()
            .map_err(|_| crate::Error::Domain(format!("bad bias {s:?}")))?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        Self::new(BigRational::new(num, den))
    }

    pub fn half() -> Self {
        BiasValue(BigRational::new(1.into(), 2.into()))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }

    pub fn is_half(&self) -> bool {
        self.0 == BigRational::new(1.into(), 2.into())
    }
}

impl fmt::Display for BiasValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Serializes a rational as `"numerator/denominator"` (denominator always shown).
pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Inverse of [`rational_string`]; also accepts a bare integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || crate::Error::Domain(format!("bad rational {s:?}"));
    let (a, b) = s.trim().split_once('/').unwrap_or((s.trim(), "1"));
    let num: BigInt = a.trim().parse().map_err(|_| bad())?;
    let den: BigInt = b.trim().parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Converts without overflow for numerators and denominators of any size.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs_rational(q).exp()
}

/// Natural log of `|q|`, `-inf` for zero.
pub fn ln_abs_rational(q: &BigRational) -> f64 {
    if q.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_abs_int(q.numer()) - ln_abs_int(q.denom())
}

fn ln_abs_int(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Integer form of a bias `p = P/Q`: the polynomial `(P + (Q-P) z)` replaces
/// `(1 + (1-p) z / p)` up to the factor `P`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Weights {
    /// `P`, the numerator of `p`; also the leading constant of the linear factor.
    s: BigInt,
    /// `Q - P`, the `z` coefficient of the linear factor.
    r: BigInt,
    /// `Q`, the denominator of `p`.
    q: BigInt,
}

impl Weights {
    fn new(bias: &BiasValue) -> Self {
        let p = bias.value();
        let s = p.numer().clone();
        let q = p.denom().clone();
        let r = &q - &s;
        Weights { s, r, q }
    }

    fn uniform() -> Self {
        Weights {
            s: BigInt::one(),
            r: BigInt::one(),
            q: BigInt::from(2),
        }
    }
}

fn binomial_row(n: u64) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(c.clone());
    }
    row
}

/// Coefficient of `z^a` in `(s + r z)^(n-b) (1-z)^b`, as the single needed
/// entry of the convolution of the two factors' coefficient rows.
fn scaled_coeff(a: i64, b: i64, n: i64, w: &Weights) -> BigInt {
    if a < 0 || a > n {
        return BigInt::zero();
    }
    let left = (n - b) as u64;
    let right = b as u64;
    let a = a as u64;
    // terms j = number of z's drawn from (1-z)^b; i = a - j from the left factor
    let j_lo = a.saturating_sub(left);
    let j_hi = a.min(right);
    if j_lo > j_hi {
        return BigInt::zero();
    }
    let uniform = w.r.is_one() && w.s.is_one();
    let mut total = BigInt::zero();
    let mut binom_right = binomial(right, j_lo);
    let mut binom_left = binomial(left, a - j_lo);
    for j in j_lo..=j_hi {
        let i = a - j;
        let mut term = &binom_left * &binom_right;
        if !uniform {
            term *= Pow::pow(&w.r, i) * Pow::pow(&w.s, left - i);
        }
        if j % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
        if j < j_hi {
            // C(right, j+1) = C(right, j) (right - j) / (j + 1)
            binom_right = binom_right * BigInt::from(right - j) / BigInt::from(j + 1);
            // C(left, i-1) = C(left, i) i / (left - i + 1)
            binom_left = binom_left * BigInt::from(i) / BigInt::from(left - i + 1);
        }
    }
    total
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `c(a,b;n)`: the coefficient of `z^a` in `(1+z)^(n-b) (1-z)^b`.
pub fn krawtchouk_coeff(idx: KrawtchoukIndex) -> Result<ExactInteger> {
    idx.check()?;
    Ok(scaled_coeff(idx.a, idx.b, idx.n, &Weights::uniform()))
}

/// `c_p(a,b;n)`: the coefficient of `z^a` in `(1 + (1-p) z / p)^(n-b) (1-z)^b`.
pub fn biased_krawtchouk_coeff(idx: KrawtchoukIndex, bias: &BiasValue) -> Result<ExactRational> {
    idx.check()?;
    let w = Weights::new(bias);
    let num = scaled_coeff(idx.a, idx.b, idx.n, &w);
    let den = Pow::pow(&w.s, (idx.n - idx.b) as u64);
    Ok(BigRational::new(num, den))
}

/// Checks `c(b,a;n) b! (n-b)! = c(a,b;n) a! (n-a)!` exactly.
pub fn krawtchouk_reciprocity_check(idx: KrawtchoukIndex) -> bool {
    let KrawtchoukIndex { a, b, n } = idx;
    if n < 0 || a < 0 || b < 0 || a > n || b > n {
        return false;
    }
    let w = Weights::uniform();
    let lhs = scaled_coeff(b, a, n, &w) * factorial(b as u64) * factorial((n - b) as u64);
    let rhs = scaled_coeff(a, b, n, &w) * factorial(a as u64) * factorial((n - a) as u64);
    lhs == rhs
}

/// Krawtchouk indices `(a, b, n)` paired with a location of the order-`n+1`
/// diamond, or `None` when the creation rate there vanishes identically.
fn creation_indices(ell: i64, m: i64, order: i64) -> Option<(i64, i64, i64)> {
    let n = order - 1;
    if n < 0 || ell.abs() + m.abs() > n || (ell + m - n).rem_euclid(2) != 0 {
        return None;
    }
    Some(((ell + m + n) / 2, (ell - m + n) / 2, n))
}

/// `c_p(a,b;n) c_p(b,a;n)` scaled by `P^(2n-a-b)`: an integer.
fn creation_product(ell: i64, m: i64, order: i64, w: &Weights) -> Option<BigInt> {
    let (a, b, n) = creation_indices(ell, m, order)?;
    Some(scaled_coeff(a, b, n, w) * scaled_coeff(b, a, n, w))
}

/// Net creation rate `Cr(ell,m;n) = 2(Pl(ell,m;n) - Pl(ell,m-1;n-1))`,
/// evaluated through the product of two Krawtchouk coefficients.
pub fn creation_rate(loc: LatticeLocation) -> ExactRational {
    match creation_product(loc.ell, loc.m, loc.n, &Weights::uniform()) {
        Some(num) => BigRational::new(num, BigInt::one() << (loc.n - 1) as usize),
        None => BigRational::zero(),
    }
}

/// Biased creation rate `Cr_p(ell,m;n) = (Pl_p(ell,m;n) - Pl_p(ell,m-1;n-1)) / p`.
pub fn biased_creation_rate(loc: LatticeLocation, bias: &BiasValue) -> ExactRational {
    let w = Weights::new(bias);
    match creation_product(loc.ell, loc.m, loc.n, &w) {
        // c_p c_p p^n = CC / P^(n - ell) * P^n / Q^n = CC P^ell / Q^n
        Some(num) => {
            let n = (loc.n - 1) as u64;
            let qn = Pow::pow(&w.q, n);
            if loc.ell >= 0 {
                BigRational::new(num * Pow::pow(&w.s, loc.ell as u64), qn)
            } else {
                BigRational::new(num, qn * Pow::pow(&w.s, (-loc.ell) as u64))
            }
        }
        None => BigRational::zero(),
    }
}

/// Placement probability `Pl(ell,m;n)`, summed from creation rates.
pub fn placement_probability(loc: LatticeLocation) -> ExactRational {
    placement_with(loc, &Weights::uniform())
}

/// Placement probability under the Gibbs distribution with bias `p`.
pub fn biased_placement_probability(loc: LatticeLocation, bias: &BiasValue) -> ExactRational {
    placement_with(loc, &Weights::new(bias))
}

/// `Pl_p(ell,m;N) = p * sum_k Cr_p(ell, m-k; N-k)`, accumulated over the
/// common denominator `Q^N P^N`.  Term `k` contributes `CC P^(ell+1+N) Q^k`.
fn placement_with(loc: LatticeLocation, w: &Weights) -> ExactRational {
    if !loc.is_occupiable() {
        return BigRational::zero();
    }
    let order = loc.n;
    let mut total = BigInt::zero();
    let mut q_pow = BigInt::one();
    for k in 0..order {
        if let Some(cc) = creation_product(loc.ell, loc.m - k, order - k, w) {
            total += cc * &q_pow;
        }
        q_pow *= &w.q;
    }
    let exp = loc.ell + 1 + order;
    // exp >= 1 because |ell| <= n - 1
    total *= Pow::pow(&w.s, exp as u64);
    let den = Pow::pow(&w.q, order as u64) * Pow::pow(&w.s, order as u64);
    BigRational::new(total, den)
}

/// `2^-n * sum_{i=k}^{n} C(n,i)`: the placement probability at the leftmost
/// north-going space of row `k` (counted from the top).
pub fn boundary_row_probability(k: i64, n: i64) -> Result<ExactRational> {
    if n < 0 || k < 0 || k > n {
        return domain(format!("boundary row needs 0 <= k <= n, got k={k} n={n}"));
    }
    let row = binomial_row(n as u64);
    let sum: BigInt = row[k as usize..].iter().sum();
    Ok(BigRational::new(sum, BigInt::one() << n as usize))
}

/// Location of the leftmost north-going space in row `k` (1-based, from the
/// top) of the order-`n` diamond.
pub fn boundary_row_location(k: i64, n: i64) -> Result<LatticeLocation> {
    if k < 1 || k > n {
        return domain(format!("row index must satisfy 1 <= k <= n, got k={k} n={n}"));
    }
    Ok(LatticeLocation::new(1 - k, n - k, n))
}

/// Full table of scaled Krawtchouk coefficients `C(a,b)` for one degree `n`,
/// filled column by column from `b = 0` using
/// `s C(a,b+1) + r C(a-1,b+1) = C(a,b) - C(a-1,b)`.
pub struct KrawtchoukTable {
    n: usize,
    data: Vec<BigInt>,
}

impl KrawtchoukTable {
    fn build(n: usize, w: &Weights) -> Self {
        let width = n + 1;
        let mut data = vec![BigInt::zero(); width * width];
        // b = 0: (s + r z)^n
        for a in 0..width {
            data[a * width] = binomial(n as u64, a as u64) * Pow::pow(&w.r, a as u64) * Pow::pow(&w.s, (n - a) as u64);
        }
        let uniform = w.r.is_one() && w.s.is_one();
        for b in 0..n {
            for a in 0..width {
                let prev_a = if a > 0 {
                    data[(a - 1) * width + b].clone()
                } else {
                    BigInt::zero()
                };
                let prev_next = if a > 0 {
                    data[(a - 1) * width + b + 1].clone()
                } else {
                    BigInt::zero()
                };
                let mut v = &data[a * width + b] - prev_a;
                if uniform {
                    v -= prev_next;
                } else {
                    v -= &w.r * prev_next;
                    let (quot, rem) = v.div_rem(&w.s);
                    debug_assert!(rem.is_zero());
                    v = quot;
                }
                data[a * width + b + 1] = v;
            }
        }
        KrawtchoukTable { n, data }
    }

    /// Uniform table: entry `(a, b)` is `c(a,b;n)`.
    pub fn uniform(n: usize) -> Self {
        Self::build(n, &Weights::uniform())
    }

    pub fn get(&self, a: usize, b: usize) -> &BigInt {
        &self.data[a * (self.n + 1) + b]
    }

    pub fn degree(&self) -> usize {
        self.n
    }
}

/// Exact placement probabilities of a whole diamond, stored as integer
/// numerators over the level's common denominator `Q^N P^N`.
#[derive(Clone, Debug)]
pub struct PlacementGrid {
    order: i64,
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl PlacementGrid {
    pub fn order(&self) -> i64 {
        self.order
    }

    fn width(&self) -> i64 {
        2 * self.order - 1
    }

    fn slot(&self, ell: i64, m: i64) -> Option<usize> {
        let r = self.order - 1;
        if ell.abs() > r || m.abs() > r {
            return None;
        }
        Some(((m + r) * self.width() + (ell + r)) as usize)
    }

    /// Exact value; zero for locations that carry no north-going space.
    pub fn get(&self, ell: i64, m: i64) -> ExactRational {
        match self.slot(ell, m) {
            Some(i) if !self.numerators[i].is_zero() => {
                BigRational::new(self.numerators[i].clone(), self.denominator.clone())
            }
            _ => BigRational::zero(),
        }
    }

    pub fn get_f64(&self, ell: i64, m: i64) -> f64 {
        match self.slot(ell, m) {
            Some(i) if !self.numerators[i].is_zero() => {
                (ln_abs_int(&self.numerators[i]) - ln_abs_int(&self.denominator)).exp()
            }
            _ => 0.0,
        }
    }

    /// Iterates over every occupiable location with its exact value.
    pub fn iter(&self) -> impl Iterator<Item = (LatticeLocation, ExactRational)> + '_ {
        LatticeLocation::all(self.order).map(move |loc| (loc, self.get(loc.ell, loc.m)))
    }
}

/// Level-by-level generator of whole-diamond placement grids, using
/// `Pl(ell,m;N) = Pl(ell,m-1;N-1) + p Cr_p(ell,m;N)` so that reaching order
/// `N` costs `O(N^3)` coefficient products in total.
pub struct PlacementLevels {
    weights: Weights,
    current: Option<PlacementGrid>,
}

impl PlacementLevels {
    pub fn uniform() -> Self {
        PlacementLevels {
            weights: Weights::uniform(),
            current: None,
        }
    }

    pub fn biased(bias: &BiasValue) -> Self {
        PlacementLevels {
            weights: Weights::new(bias),
            current: None,
        }
    }

    /// Advances to the grid of order `order`, which must not precede the
    /// current level.
    pub fn advance_to(&mut self, order: i64) -> &PlacementGrid {
        assert!(order >= 1, "diamond order must be positive");
        while self.current.as_ref().map_or(0, |g| g.order) < order {
            let next = self.step();
            self.current = Some(next);
        }
        assert_eq!(self.current.as_ref().unwrap().order, order, "levels only move forward");
        self.current.as_ref().unwrap()
    }

    fn step(&self) -> PlacementGrid {
        let w = &self.weights;
        let order = self.current.as_ref().map_or(1, |g| g.order + 1);
        let n = (order - 1) as usize;
        let table = KrawtchoukTable::build(n, w);
        let qp = &w.q * &w.s;
        let width = 2 * order - 1;
        let r = order - 1;
        let mut numerators = vec![BigInt::zero(); (width * width) as usize];
        let s_pows: Vec<BigInt> = (0..=(2 * order) as u64).map(|e| Pow::pow(&w.s, e)).collect();
        for m in -r..=r {
            for ell in -r..=r {
                if ell.abs() + m.abs() > r || (ell + m - r).rem_euclid(2) != 0 {
                    continue;
                }
                let mut v = match &self.current {
                    Some(prev) => match prev.slot(ell, m - 1) {
                        Some(i) if !prev.numerators[i].is_zero() => &prev.numerators[i] * &qp,
                        _ => BigInt::zero(),
                    },
                    None => BigInt::zero(),
                };
                let a = ((ell + m + r) / 2) as usize;
                let b = ((ell - m + r) / 2) as usize;
                let cc = table.get(a, b) * table.get(b, a);
                if !cc.is_zero() {
                    v += cc * &s_pows[(ell + 1 + order) as usize];
                }
                numerators[((m + r) * width + (ell + r)) as usize] = v;
            }
        }
        let denominator = Pow::pow(&w.q, order as u64) * Pow::pow(&w.s, order as u64);
        PlacementGrid {
            order,
            numerators,
            denominator,
        }
    }
}

/// Uniform placement grid of a single order.
pub fn placement_grid(order: i64) -> PlacementGrid {
    PlacementLevels::uniform().advance_to(order).clone()
}

/// Biased placement grid of a single order.
pub fn biased_placement_grid(order: i64, bias: &BiasValue) -> PlacementGrid {
    PlacementLevels::biased(bias).advance_to(order).clone()
}

/// Memoizing engine for repeated single-location queries.  Creation-rate
/// numerators are cached by `(ell, m, order)` behind a reader-writer lock, so
/// one engine can be shared across threads.
pub struct ExactEngine {
    weights: Weights,
    memo: RwLock<HashMap<(i64, i64, i64), BigInt>>,
}

impl ExactEngine {
    pub fn uniform() -> Self {
        ExactEngine {
            weights: Weights::uniform(),
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn biased(bias: &BiasValue) -> Self {
        ExactEngine {
            weights: Weights::new(bias),
            memo: RwLock::new(HashMap::new()),
        }
    }

    fn product(&self, ell: i64, m: i64, order: i64) -> BigInt {
        if creation_indices(ell, m, order).is_none() {
            return BigInt::zero();
        }
        if let Some(v) = self.memo.read().unwrap().get(&(ell, m, order)) {
            return v.clone();
        }
        let v = creation_product(ell, m, order, &self.weights).unwrap_or_default();
        self.memo.write().unwrap().insert((ell, m, order), v.clone());
        v
    }

    pub fn placement_probability(&self, loc: LatticeLocation) -> ExactRational {
        if !loc.is_occupiable() {
            return BigRational::zero();
        }
        let w = &self.weights;
        let mut total = BigInt::zero();
        let mut q_pow = BigInt::one();
        for k in 0..loc.n {
            let cc = self.product(loc.ell, loc.m - k, loc.n - k);
            if !cc.is_zero() {
                total += cc * &q_pow;
            }
            q_pow *= &w.q;
        }
        total *= Pow::pow(&w.s, (loc.ell + 1 + loc.n) as u64);
        let den = Pow::pow(&w.q, loc.n as u64) * Pow::pow(&w.s, loc.n as u64);
        BigRational::new(total, den)
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().unwrap().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    /// Multiplies out a polynomial product with rational coefficients.
    fn expand(factors: &[(BigRational, BigRational, u32)]) -> Vec<BigRational> {
        let mut poly = vec![BigRational::one()];
        for (c0, c1, times) in factors {
            for _ in 0..*times {
                let mut next = vec![BigRational::zero(); poly.len() + 1];
                for (i, coeff) in poly.iter().enumerate() {
                    next[i] += coeff * c0;
                    next[i + 1] += coeff * c1;
                }
                poly = next;
            }
        }
        poly
    }

    #[test]
    fn krawtchouk_examples() {
        assert_eq!(krawtchouk_coeff(KrawtchoukIndex::new(0, 3, 5)).unwrap(), 1.into());
        assert_eq!(krawtchouk_coeff(KrawtchoukIndex::new(1, 0, 7)).unwrap(), 7.into());
        // (1+z)^3 (1-z) = 1 + 2z - 2z^3 - z^4
        let poly = expand(&[(q(1, 1), q(1, 1), 3), (q(1, 1), q(-1, 1), 1)]);
        assert_eq!(poly[2], BigRational::zero());
        assert_eq!(krawtchouk_coeff(KrawtchoukIndex::new(2, 1, 4)).unwrap(), 0.into());
        assert_eq!(krawtchouk_coeff(KrawtchoukIndex::new(-1, 1, 4)).unwrap(), 0.into());
        assert_eq!(krawtchouk_coeff(KrawtchoukIndex::new(5, 1, 4)).unwrap(), 0.into());
        assert!(krawtchouk_coeff(KrawtchoukIndex::new(0, 5, 4)).is_err());
        assert!(krawtchouk_coeff(KrawtchoukIndex::new(0, -1, 4)).is_err());
    }

    #[test]
    fn krawtchouk_matches_expansion() {
        for n in 0..9 {
            for b in 0..=n {
                let poly = expand(&[(q(1, 1), q(1, 1), (n - b) as u32), (q(1, 1), q(-1, 1), b as u32)]);
                for a in 0..=n {
                    let c = krawtchouk_coeff(KrawtchoukIndex::new(a, b, n)).unwrap();
                    assert_eq!(BigRational::from_integer(c), poly[a as usize], "a={a} b={b} n={n}");
                }
            }
        }
    }

    #[test]
    fn biased_krawtchouk_examples() {
        let third = BiasValue::from_ratio(1, 3).unwrap();
        let half = BiasValue::half();
        assert_eq!(
            biased_krawtchouk_coeff(KrawtchoukIndex::new(0, 2, 4), &third).unwrap(),
            q(1, 1)
        );
        assert_eq!(
            biased_krawtchouk_coeff(KrawtchoukIndex::new(1, 0, 3), &half).unwrap(),
            q(3, 1)
        );
        assert_eq!(
            biased_krawtchouk_coeff(KrawtchoukIndex::new(1, 4, 4), &third).unwrap(),
            q(-4, 1)
        );
        assert!(BiasValue::from_ratio(0, 1).is_err());
        assert!(BiasValue::from_ratio(1, 1).is_err());
        assert!(BiasValue::from_ratio(3, 2).is_err());
    }

    #[test]
    fn biased_krawtchouk_matches_expansion() {
        for (pn, pd) in [(1, 3), (1, 4), (2, 5), (1, 2)] {
            let bias = BiasValue::from_ratio(pn, pd).unwrap();
            let lin = q(pd - pn, pn); // (1-p)/p
            for n in 0..7 {
                for b in 0..=n {
                    let poly = expand(&[(q(1, 1), lin.clone(), (n - b) as u32), (q(1, 1), q(-1, 1), b as u32)]);
                    for a in 0..=n {
                        let c = biased_krawtchouk_coeff(KrawtchoukIndex::new(a, b, n), &bias).unwrap();
                        assert_eq!(c, poly[a as usize]);
                    }
                }
            }
        }
    }

    #[test]
    fn table_matches_single_coefficients() {
        for n in 0..12usize {
            let t = KrawtchoukTable::uniform(n);
            for a in 0..=n {
                for b in 0..=n {
                    let c = krawtchouk_coeff(KrawtchoukIndex::new(a as i64, b as i64, n as i64)).unwrap();
                    assert_eq!(t.get(a, b), &c);
                }
            }
        }
        let w = Weights::new(&BiasValue::from_ratio(2, 7).unwrap());
        for n in 0..10usize {
            let t = KrawtchoukTable::build(n, &w);
            for a in 0..=n {
                for b in 0..=n {
                    assert_eq!(t.get(a, b), &scaled_coeff(a as i64, b as i64, n as i64, &w));
                }
            }
        }
    }

    #[test]
    fn small_order_point_values() {
        assert_eq!(placement_probability(LatticeLocation::new(0, 0, 1)), q(1, 2));
        assert_eq!(placement_probability(LatticeLocation::new(0, 1, 2)), q(3, 4));
        assert_eq!(placement_probability(LatticeLocation::new(0, -1, 2)), q(1, 4));
        assert_eq!(placement_probability(LatticeLocation::new(1, 0, 2)), q(1, 4));
        assert_eq!(placement_probability(LatticeLocation::new(-1, 0, 2)), q(1, 4));
    }

    #[test]
    fn creation_rate_examples() {
        // Cr = 2 (Pl(0,1;2) - Pl(0,0;1)) = 2 (3/4 - 1/2)
        assert_eq!(creation_rate(LatticeLocation::new(0, 1, 2)), q(1, 2));
        assert_eq!(creation_rate(LatticeLocation::new(0, 0, 2)), q(0, 1));
        // Cr = 2 (1/4 - 0)
        assert_eq!(creation_rate(LatticeLocation::new(0, -1, 2)), q(1, 2));
        assert_eq!(creation_rate(LatticeLocation::new(5, 0, 2)), q(0, 1));
    }

    #[test]
    fn biased_reduces_to_uniform() {
        let half = BiasValue::half();
        for n in 1..8 {
            for loc in LatticeLocation::all(n) {
                assert_eq!(biased_creation_rate(loc, &half), creation_rate(loc));
                assert_eq!(biased_placement_probability(loc, &half), placement_probability(loc));
            }
        }
        assert_eq!(biased_creation_rate(LatticeLocation::new(0, 1, 2), &half), q(1, 2));
        assert_eq!(
            biased_creation_rate(LatticeLocation::new(0, 0, 2), &BiasValue::from_ratio(1, 3).unwrap()),
            q(0, 1)
        );
    }

    #[test]
    fn biased_order_one_is_p() {
        for (a, b) in [(1, 3), (1, 4), (3, 7)] {
            let bias = BiasValue::from_ratio(a, b).unwrap();
            assert_eq!(
                biased_placement_probability(LatticeLocation::new(0, 0, 1), &bias),
                q(a, b)
            );
        }
    }

    #[test]
    fn biased_telescoping() {
        let bias = BiasValue::from_ratio(1, 3).unwrap();
        let p = bias.value().clone();
        for n in 2..9 {
            for loc in LatticeLocation::all(n) {
                let lhs = biased_creation_rate(loc, &bias);
                let prev = biased_placement_probability(LatticeLocation::new(loc.ell, loc.m - 1, n - 1), &bias);
                let rhs = (biased_placement_probability(loc, &bias) - prev) / &p;
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn telescoping_consistency() {
        for n in 2..12 {
            for loc in LatticeLocation::all(n) {
                let prev = placement_probability(LatticeLocation::new(loc.ell, loc.m - 1, n - 1));
                let two = BigRational::from_integer(2.into());
                assert_eq!(creation_rate(loc), two * (placement_probability(loc) - prev));
            }
        }
    }

    #[test]
    fn grid_levels_match_direct_sums() {
        let mut levels = PlacementLevels::uniform();
        for n in 1..14 {
            let grid = levels.advance_to(n).clone();
            for loc in LatticeLocation::all(n) {
                assert_eq!(grid.get(loc.ell, loc.m), placement_probability(loc), "{loc}");
            }
        }
        let bias = BiasValue::from_ratio(1, 3).unwrap();
        let mut levels = PlacementLevels::biased(&bias);
        for n in 1..10 {
            let grid = levels.advance_to(n).clone();
            for loc in LatticeLocation::all(n) {
                assert_eq!(grid.get(loc.ell, loc.m), biased_placement_probability(loc, &bias));
            }
        }
    }

    #[test]
    fn engine_matches_free_functions() {
        let engine = ExactEngine::uniform();
        for n in 1..10 {
            for loc in LatticeLocation::all(n) {
                assert_eq!(engine.placement_probability(loc), placement_probability(loc));
            }
        }
        assert!(engine.memo_len() > 0);
    }

    #[test]
    fn boundary_rows() {
        assert_eq!(boundary_row_probability(0, 6).unwrap(), q(1, 1));
        assert_eq!(boundary_row_probability(6, 6).unwrap(), q(1, 64));
        assert!(boundary_row_probability(7, 6).is_err());
        assert!(boundary_row_probability(-1, 6).is_err());
        for n in 1..=8 {
            for k in 1..=n {
                let loc = boundary_row_location(k, n).unwrap();
                assert!(loc.is_occupiable());
                assert_eq!(boundary_row_probability(k, n).unwrap(), placement_probability(loc));
            }
        }
    }

    #[test]
    fn reciprocity_examples() {
        assert!(krawtchouk_reciprocity_check(KrawtchoukIndex::new(2, 1, 4)));
        assert!(krawtchouk_reciprocity_check(KrawtchoukIndex::new(3, 3, 9)));
        assert!(!krawtchouk_reciprocity_check(KrawtchoukIndex::new(3, 10, 9)));
    }

    #[test]
    fn nearest_location_respects_parity() {
        for n in [5, 6, 50, 51] {
            for &(x, y) in &[(0.0, 0.0), (0.3, -0.2), (-0.49, 0.5)] {
                let loc = LatticeLocation::nearest(x, y, n);
                assert!(loc.is_occupiable());
                assert!((loc.ell as f64 - x * n as f64).abs() <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn rational_strings_round_trip() {
        let v = q(-6, 8);
        assert_eq!(rational_string(&v), "-3/4");
        assert_eq!(parse_rational("-3/4").unwrap(), v);
        assert_eq!(parse_rational("5").unwrap(), q(5, 1));
        assert_eq!(BiasValue::parse("0.25").unwrap(), BiasValue::from_ratio(1, 4).unwrap());
        assert_eq!(BiasValue::parse("1/3").unwrap(), BiasValue::from_ratio(1, 3).unwrap());
        assert!((rational_to_f64(&q(1, 3)) - 1.0 / 3.0).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reciprocity_holds(n in 0i64..40, a in 0i64..40, b in 0i64..40) {
                let (a, b) = (a % (n + 1), b % (n + 1));
                prop_assert!(krawtchouk_reciprocity_check(KrawtchoukIndex::new(a, b, n)));
            }

            #[test]
            fn monotone_along_diagonal(n in 1i64..16, h in 0i64..6, seed in 0usize..1000) {
                let locs: Vec<_> = LatticeLocation::all(n).collect();
                let loc = locs[seed % locs.len()];
                let up = LatticeLocation::new(loc.ell, loc.m + h, n + h);
                prop_assert!(placement_probability(loc) <= placement_probability(up));
            }
        }
    }
}
