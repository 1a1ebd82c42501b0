//! Brute-force ground truth: exhaustive enumeration of the tilings of small
//! regions, and exact (optionally biased) statistics over them.
//!
//! Enumeration always fills the lowest, then leftmost, uncovered square and
//! tries the horizontal domino before the vertical one, so the position of a
//! tiling in the sequence is a stable canonical index.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::exact::{rational_string, BiasValue};
use crate::geometry::{
    height_from_tiling, space_location, DominoClass, DominoSpace, GridSquare, PartialHeightFunction, Region, Tiling,
    Vertex,
};

/// Default cap on the number of squares an enumeration may touch.
pub const DEFAULT_SQUARE_CAP: usize = 40;
/// Hard limit from the bitmask representation.
pub const MAX_SQUARES: usize = 128;

// Square-index neighbor tables for a region.
#[derive(Clone, Debug)]
struct Layout {
    squares: Vec<GridSquare>,
    right: Vec<Option<usize>>,
    up: Vec<Option<usize>>,
    full: u128,
}

impl Layout {
    fn new(region: &Region, cap: usize) -> Result<Self> {
        let len = region.len();
        if len > cap.min(MAX_SQUARES) {
            return Err(Error::Resource(format!(
                "region has {len} squares; enumeration cap is {}",
                cap.min(MAX_SQUARES)
            )));
        }
        let squares = region.squares().to_vec();
        let index: HashMap<GridSquare, usize> = squares.iter().enumerate().map(|(k, s)| (*s, k)).collect();
        let right = squares
            .iter()
            .map(|s| index.get(&GridSquare::new(s.i + 1, s.j)).copied())
            .collect();
        let up = squares
            .iter()
            .map(|s| index.get(&GridSquare::new(s.i, s.j + 1)).copied())
            .collect();
        let full = if len == 128 { u128::MAX } else { (1u128 << len) - 1 };
        Ok(Layout {
            squares,
            right,
            up,
            full,
        })
    }
}

/// A tiling as two bitmasks over square indices: the first square of each
/// horizontal and of each vertical domino.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RawTiling {
    pub horizontal: u128,
    pub vertical: u128,
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    sq: usize,
    vertical: bool,
}

#[derive(Clone, Debug)]
struct DfsState {
    covered: u128,
    raw: RawTiling,
    stack: Vec<Frame>,
}

struct RawEnumerator<'a> {
    layout: &'a Layout,
    state: DfsState,
    base: usize,
    started: bool,
    done: bool,
}

impl<'a> RawEnumerator<'a> {
    fn new(layout: &'a Layout, state: DfsState) -> Self {
        let base = state.stack.len();
        Self::with_base(layout, state, base)
    }

    fn with_base(layout: &'a Layout, state: DfsState, base: usize) -> Self {
        RawEnumerator {
            layout,
            state,
            base,
            started: false,
            done: false,
        }
    }

    fn place(&mut self, sq: usize, vertical: bool) -> bool {
        let partner = if vertical {
            self.layout.up[sq]
        } else {
            self.layout.right[sq]
        };
        let Some(p) = partner else { return false };
        if self.state.covered >> p & 1 == 1 {
            return false;
        }
        self.state.covered |= 1 << sq | 1 << p;
        if vertical {
            self.state.raw.vertical |= 1 << sq;
        } else {
            self.state.raw.horizontal |= 1 << sq;
        }
        self.state.stack.push(Frame { sq, vertical });
        true
    }

    fn unplace(&mut self) -> Option<Frame> {
        if self.state.stack.len() == self.base {
            return None;
        }
        let f = self.state.stack.pop()?;
        let p = if f.vertical {
            self.layout.up[f.sq]
        } else {
            self.layout.right[f.sq]
        }
        .unwrap();
        self.state.covered &= !(1 << f.sq | 1 << p);
        self.state.raw.horizontal &= !(1 << f.sq);
        self.state.raw.vertical &= !(1 << f.sq);
        Some(f)
    }
}

impl Iterator for RawEnumerator<'_> {
    type Item = RawTiling;

    fn next(&mut self) -> Option<RawTiling> {
        if self.done {
            return None;
        }
        let mut backtracking = self.started;
        self.started = true;
        loop {
            if backtracking {
                let Some(f) = self.unplace() else {
                    self.done = true;
                    return None;
                };
                if !f.vertical && self.place(f.sq, true) {
                    backtracking = false;
                }
                continue;
            }
            let free = !self.state.covered & self.layout.full;
            if free == 0 {
                return Some(self.state.raw);
            }
            let k = free.trailing_zeros() as usize;
            if !(self.place(k, false) || self.place(k, true)) {
                backtracking = true;
            }
        }
    }
}

// All partial states reached after `depth` placements, in enumeration order.
fn prefixes(layout: &Layout, depth: usize) -> Vec<DfsState> {
    fn go(layout: &Layout, state: DfsState, depth: usize, out: &mut Vec<DfsState>) {
        let free = !state.covered & layout.full;
        if depth == 0 || free == 0 {
            out.push(state);
            return;
        }
        let k = free.trailing_zeros() as usize;
        for vertical in [false, true] {
            let mut e = RawEnumerator::new(layout, state.clone());
            if e.place(k, vertical) {
                go(layout, e.state, depth - 1, out);
            }
        }
    }
    let mut out = Vec::new();
    let root = DfsState {
        covered: 0,
        raw: RawTiling {
            horizontal: 0,
            vertical: 0,
        },
        stack: Vec::new(),
    };
    go(layout, root, depth, &mut out);
    out
}

/// Lazily enumerated tilings of a region.
pub struct TilingEnumeration {
    region: Region,
    layout: Box<Layout>,
    state: Option<DfsState>,
    started: bool,
    done: bool,
}

impl TilingEnumeration {
    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Exact tiling count (does not consume the enumeration).
    pub fn exact_count(&self) -> BigInt {
        count_tilings(&self.region)
    }

    fn to_tiling(&self, raw: RawTiling) -> Tiling {
        raw_to_tiling(&self.region, &self.layout, raw)
    }
}

impl Iterator for TilingEnumeration {
    type Item = Tiling;

    fn next(&mut self) -> Option<Tiling> {
        if self.done {
            return None;
        }
        let state = self.state.take().unwrap();
        let mut e = RawEnumerator::with_base(&self.layout, state, 0);
        e.started = self.started;
        let raw = e.next();
        self.started = true;
        self.state = Some(e.state);
        match raw {
            Some(r) => Some(self.to_tiling(r)),
            None => {
                self.done = true;
                None
            }
        }
    }
}

fn raw_to_tiling(region: &Region, layout: &Layout, raw: RawTiling) -> Tiling {
    let mut placements = Vec::with_capacity(layout.squares.len() / 2);
    for (k, s) in layout.squares.iter().enumerate() {
        if raw.horizontal >> k & 1 == 1 {
            placements.push((*s, true));
        } else if raw.vertical >> k & 1 == 1 {
            placements.push((*s, false));
        }
    }
    Tiling::from_placements(region.clone(), placements).expect("enumerated tilings are valid")
}

/// Every tiling of `region`, with the default square cap.
pub fn enumerate_tilings(region: &Region) -> Result<TilingEnumeration> {
    enumerate_tilings_with_cap(region, DEFAULT_SQUARE_CAP)
}

pub fn enumerate_tilings_with_cap(region: &Region, cap: usize) -> Result<TilingEnumeration> {
    let layout = Box::new(Layout::new(region, cap)?);
    Ok(TilingEnumeration {
        region: region.clone(),
        layout,
        state: Some(DfsState {
            covered: 0,
            raw: RawTiling {
                horizontal: 0,
                vertical: 0,
            },
            stack: Vec::new(),
        }),
        started: false,
        done: false,
    })
}

/// Tiling count by a broken-profile transfer matrix over the bounding box.
/// Handles regions well beyond the enumeration cap (up to 64 columns).
pub fn count_tilings(region: &Region) -> BigInt {
    let (i0, j0, width, height) = region.bounds();
    assert!(width <= 64, "transfer matrix supports at most 64 columns");
    let mut states: HashMap<u64, BigInt> = HashMap::from([(0u64, BigInt::one())]);
    for dj in 0..height {
        for di in 0..width {
            let here = GridSquare::new(i0 + di, j0 + dj);
            let inside = region.contains(here);
            let up_ok = region.contains(GridSquare::new(here.i, here.j + 1));
            let right_ok = di + 1 < width && region.contains(GridSquare::new(here.i + 1, here.j));
            let bit = 1u64 << di;
            let mut next: HashMap<u64, BigInt> = HashMap::with_capacity(states.len());
            for (mask, ways) in states {
                let filled = mask & bit != 0;
                if !inside {
                    if !filled {
                        *next.entry(mask).or_default() += ways;
                    }
                    continue;
                }
                if filled {
                    *next.entry(mask & !bit).or_default() += ways;
                    continue;
                }
                if up_ok {
                    *next.entry(mask | bit).or_default() += &ways;
                }
                if right_ok && mask & (bit << 1) == 0 {
                    *next.entry(mask | (bit << 1)).or_default() += ways;
                }
            }
            states = next;
        }
    }
    states.remove(&0).unwrap_or_default()
}

/// Options for [`exact_statistics_with`].
#[derive(Clone, Debug)]
pub struct StatisticsOptions {
    pub cap: usize,
    /// Also collect the joint probabilities of the two brick pairs of every
    /// 2x2 block.
    pub pairs: bool,
}

impl Default for StatisticsOptions {
    fn default() -> Self {
        StatisticsOptions {
            cap: DEFAULT_SQUARE_CAP,
            pairs: false,
        }
    }
}

/// A 2x2 block of a region, named by its lower-left square, with the joint
/// probabilities of its horizontal pair and of its vertical pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPair {
    pub corner: GridSquare,
    pub horizontal_pair: BigRational,
    pub vertical_pair: BigRational,
}

/// Exact placement probabilities of every domino space of a region.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactStatistics {
    pub tiling_count: BigInt,
    pub placement: BTreeMap<DominoSpace, BigRational>,
    pub blocks: Vec<BlockPair>,
    pub bias: Option<BiasValue>,
}

impl ExactStatistics {
    pub fn get(&self, space: &DominoSpace) -> BigRational {
        self.placement.get(space).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Joint probability of two domino spaces forming a brick pair of a 2x2 block.
    pub fn pair(&self, a: &DominoSpace, b: &DominoSpace) -> Option<BigRational> {
        let (lo, hi) = if a.first <= b.first { (a, b) } else { (b, a) };
        self.blocks.iter().find_map(|blk| {
            if lo.first != blk.corner {
                return None;
            }
            if lo.horizontal && hi.horizontal && hi.first == GridSquare::new(lo.first.i, lo.first.j + 1) {
                Some(blk.horizontal_pair.clone())
            } else if !lo.horizontal && !hi.horizontal && hi.first == GridSquare::new(lo.first.i + 1, lo.first.j) {
                Some(blk.vertical_pair.clone())
            } else {
                None
            }
        })
    }

    /// Placement probability at every north-going location of an Aztec diamond.
    pub fn north_locations(&self, n: i64) -> BTreeMap<(i64, i64), BigRational> {
        self.placement
            .iter()
            .filter(|(s, _)| s.class == DominoClass::North)
            .map(|(s, p)| {
                let l = space_location(s, n).expect("north space");
                ((l.ell, l.m), p.clone())
            })
            .collect()
    }

    /// CSV: `kind,x,y,class,x2,y2,class2,probability`, locations being the
    /// anchor points of the tiling text format.
    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "kind,x,y,class,x2,y2,class2,probability")?;
        for (s, p) in &self.placement {
            let (x, y) = s.anchor_point();
            writeln!(w, "space,{x},{y},{},,,,{}", s.class, rational_string(p))?;
        }
        for b in &self.blocks {
            let c = b.corner;
            writeln!(
                w,
                "hpair,{},{},,{},{},,{}",
                c.i + 1,
                c.j,
                c.i + 1,
                c.j + 1,
                rational_string(&b.horizontal_pair)
            )?;
            writeln!(
                w,
                "vpair,{},{},,{},{},,{}",
                c.i,
                c.j + 1,
                c.i + 1,
                c.j + 1,
                rational_string(&b.vertical_pair)
            )?;
        }
        Ok(())
    }
}

// Counts split by the number of horizontal dominos, so any bias can be
// applied exactly afterwards.
#[derive(Clone, Debug)]
struct Tally {
    total: Vec<u64>,
    horizontal: Vec<Vec<u64>>,
    vertical: Vec<Vec<u64>>,
    hpair: Vec<Vec<u64>>,
    vpair: Vec<Vec<u64>>,
}

impl Tally {
    fn new(len: usize, blocks: usize, levels: usize) -> Self {
        Tally {
            total: vec![0; levels],
            horizontal: vec![vec![0; levels]; len],
            vertical: vec![vec![0; levels]; len],
            hpair: vec![vec![0; levels]; blocks],
            vpair: vec![vec![0; levels]; blocks],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        fn add(a: &mut [Vec<u64>], b: &[Vec<u64>]) {
            for (x, y) in a.iter_mut().zip(b) {
                for (p, q) in x.iter_mut().zip(y) {
                    *p += q;
                }
            }
        }
        for (p, q) in self.total.iter_mut().zip(&other.total) {
            *p += q;
        }
        add(&mut self.horizontal, &other.horizontal);
        add(&mut self.vertical, &other.vertical);
        add(&mut self.hpair, &other.hpair);
        add(&mut self.vpair, &other.vpair);
        self
    }
}

/// Exact placement probabilities, uniform or with bias `p`.
pub fn exact_statistics(region: &Region, bias: Option<&BiasValue>) -> Result<ExactStatistics> {
    exact_statistics_with(region, bias, &StatisticsOptions::default())
}

/// Under bias `p` a tiling with `H` horizontal dominos has weight
/// proportional to `(p / (1 - p))^(H / 2)`.
pub fn exact_statistics_with(
    region: &Region,
    bias: Option<&BiasValue>,
    opts: &StatisticsOptions,
) -> Result<ExactStatistics> {
    let layout = Layout::new(region, opts.cap)?;
    let len = layout.squares.len();
    let levels = len / 2 + 1;
    let blocks: Vec<usize> = if opts.pairs {
        (0..len)
            .filter(|&k| {
                layout.right[k].is_some() && layout.up[k].is_some() && layout.up[layout.right[k].unwrap()].is_some()
            })
            .collect()
    } else {
        Vec::new()
    };
    let depth = 12.min(len / 2);
    let roots = prefixes(&layout, depth);
    let tally = roots
        .into_par_iter()
        .map(|root| {
            let mut t = Tally::new(len, blocks.len(), levels);
            for raw in RawEnumerator::new(&layout, root) {
                let h = raw.horizontal.count_ones() as usize;
                t.total[h] += 1;
                let mut bits = raw.horizontal;
                while bits != 0 {
                    let k = bits.trailing_zeros() as usize;
                    t.horizontal[k][h] += 1;
                    bits &= bits - 1;
                }
                let mut bits = raw.vertical;
                while bits != 0 {
                    let k = bits.trailing_zeros() as usize;
                    t.vertical[k][h] += 1;
                    bits &= bits - 1;
                }
                for (b, &k) in blocks.iter().enumerate() {
                    let up = layout.up[k].unwrap();
                    let right = layout.right[k].unwrap();
                    if raw.horizontal >> k & 1 == 1 && raw.horizontal >> up & 1 == 1 {
                        t.hpair[b][h] += 1;
                    }
                    if raw.vertical >> k & 1 == 1 && raw.vertical >> right & 1 == 1 {
                        t.vpair[b][h] += 1;
                    }
                }
            }
            t
        })
        .reduce(|| Tally::new(len, blocks.len(), levels), Tally::merge);

    let tiling_count: BigInt = tally.total.iter().map(|c| BigInt::from(*c)).sum();
    let weights = level_weights(&tally.total, bias);
    let weigh = |counts: &[u64]| -> BigRational {
        counts
            .iter()
            .zip(&weights)
            .filter(|(c, _)| **c != 0)
            .map(|(c, w)| w * BigRational::from_integer(BigInt::from(*c)))
            .fold(BigRational::zero(), |a, b| a + b)
    };
    let z = weigh(&tally.total);
    let mut placement = BTreeMap::new();
    let mut block_pairs = Vec::new();
    if !z.is_zero() {
        let coloring = region.coloring();
        for k in 0..len {
            let s = layout.squares[k];
            if layout.right[k].is_some() {
                placement.insert(DominoSpace::at(s, true, coloring), weigh(&tally.horizontal[k]) / &z);
            }
            if layout.up[k].is_some() {
                placement.insert(DominoSpace::at(s, false, coloring), weigh(&tally.vertical[k]) / &z);
            }
        }
        for (b, &k) in blocks.iter().enumerate() {
            block_pairs.push(BlockPair {
                corner: layout.squares[k],
                horizontal_pair: weigh(&tally.hpair[b]) / &z,
                vertical_pair: weigh(&tally.vpair[b]) / &z,
            });
        }
    }
    Ok(ExactStatistics {
        tiling_count,
        placement,
        blocks: block_pairs,
        bias: bias.cloned(),
    })
}

// Relative weight of each horizontal-count level; only levels of one parity
// occur, so exponents are taken relative to the lowest occupied level.
fn level_weights(total: &[u64], bias: Option<&BiasValue>) -> Vec<BigRational> {
    let one = BigRational::one();
    let Some(b) = bias.filter(|b| !b.is_half()) else {
        return vec![one; total.len()];
    };
    let ratio = b.value() / (&one - b.value());
    let base = total.iter().position(|c| *c != 0).unwrap_or(0);
    (0..total.len())
        .map(|h| {
            if h < base || (h - base) % 2 != 0 {
                BigRational::zero()
            } else {
                num_traits::pow(ratio.clone(), (h - base) / 2)
            }
        })
        .collect()
}

/// Per-square sums of incident placement probabilities; each must equal one.
pub fn incidence_sums(region: &Region, stats: &ExactStatistics) -> Vec<(GridSquare, BigRational)> {
    let mut sums: BTreeMap<GridSquare, BigRational> =
        region.squares().iter().map(|s| (*s, BigRational::zero())).collect();
    for (s, p) in &stats.placement {
        for sq in s.squares() {
            *sums.get_mut(&sq).unwrap() += p;
        }
    }
    sums.into_iter().collect()
}

/// Whether every 2x2 block satisfies
/// `p(ab, cd) = p(ac, bd) = p(ab) p(cd) + p(ac) p(bd)` exactly, with `a, b`
/// the lower squares and `c, d` the upper ones.
pub fn block_lemma_check(region: &Region) -> Result<bool> {
    Ok(block_lemma_failures(region, DEFAULT_SQUARE_CAP)?.is_empty())
}

/// Corners of the blocks violating the block identity.
pub fn block_lemma_failures(region: &Region, cap: usize) -> Result<Vec<GridSquare>> {
    let stats = exact_statistics_with(region, None, &StatisticsOptions { cap, pairs: true })?;
    let c = region.coloring();
    let mut bad = Vec::new();
    for blk in &stats.blocks {
        let s = blk.corner;
        let ab = stats.get(&DominoSpace::at(s, true, c));
        let cd = stats.get(&DominoSpace::at(GridSquare::new(s.i, s.j + 1), true, c));
        let ac = stats.get(&DominoSpace::at(s, false, c));
        let bd = stats.get(&DominoSpace::at(GridSquare::new(s.i + 1, s.j), false, c));
        let product = &ab * &cd + &ac * &bd;
        if blk.horizontal_pair != product || blk.vertical_pair != product {
            bad.push(s);
        }
    }
    Ok(bad)
}

// Number of completions of each partial covering, memoized on the covered
// mask.  Because filling is lowest-first the reachable masks are few.
struct CompletionCounter<'a> {
    layout: &'a Layout,
    memo: HashMap<u128, u128>,
}

impl<'a> CompletionCounter<'a> {
    fn new(layout: &'a Layout) -> Self {
        CompletionCounter {
            layout,
            memo: HashMap::new(),
        }
    }

    fn count(&mut self, covered: u128) -> u128 {
        let free = !covered & self.layout.full;
        if free == 0 {
            return 1;
        }
        if let Some(c) = self.memo.get(&covered) {
            return *c;
        }
        let k = free.trailing_zeros() as usize;
        let mut total = 0;
        for p in [self.layout.right[k], self.layout.up[k]].into_iter().flatten() {
            if covered >> p & 1 == 0 {
                total += self.count(covered | 1 << k | 1 << p);
            }
        }
        self.memo.insert(covered, total);
        total
    }
}

/// Position of a tiling in the canonical enumeration order.
pub fn tiling_index(t: &Tiling) -> Result<u128> {
    let layout = Layout::new(t.region(), MAX_SQUARES)?;
    let mut counter = CompletionCounter::new(&layout);
    let mut covered = 0u128;
    let mut index = 0u128;
    while covered != layout.full {
        let k = (!covered & layout.full).trailing_zeros() as usize;
        let d = t.domino_at(layout.squares[k]).expect("tiling covers its region");
        let horizontal_partner = layout.right[k].filter(|p| covered >> p & 1 == 0);
        if d.horizontal {
            covered |= 1 << k | 1 << horizontal_partner.unwrap();
        } else {
            if let Some(p) = horizontal_partner {
                index += counter.count(covered | 1 << k | 1 << p);
            }
            covered |= 1 << k | 1 << layout.up[k].unwrap();
        }
    }
    Ok(index)
}

/// The tiling at a canonical index.
pub fn tiling_from_index(region: &Region, index: u128) -> Result<Tiling> {
    let layout = Layout::new(region, MAX_SQUARES)?;
    let mut counter = CompletionCounter::new(&layout);
    let total = counter.count(0);
    if index >= total {
        return domain(format!("index {index} out of range; the region has {total} tilings"));
    }
    let mut covered = 0u128;
    let mut rest = index;
    let mut raw = RawTiling {
        horizontal: 0,
        vertical: 0,
    };
    while covered != layout.full {
        let k = (!covered & layout.full).trailing_zeros() as usize;
        let h = layout.right[k].filter(|p| covered >> p & 1 == 0);
        let with_h = h.map_or(0, |p| counter.count(covered | 1 << k | 1 << p));
        if rest < with_h {
            covered |= 1 << k | 1 << h.unwrap();
            raw.horizontal |= 1 << k;
        } else {
            rest -= with_h;
            covered |= 1 << k | 1 << layout.up[k].unwrap();
            raw.vertical |= 1 << k;
        }
    }
    Ok(raw_to_tiling(region, &layout, raw))
}

/// Empirical entropy of the configurations seen through a window.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchEntropy {
    /// Shannon entropy of the window configurations, in bits per square.
    pub bits_per_square: f64,
    pub distinct: usize,
    pub samples: usize,
    /// Set when the number of distinct configurations is a sizeable
    /// fraction of the sample count, so the estimate is biased low.
    pub low_power: bool,
}

/// Estimates local entropy from samples: each tiling is restricted to the
/// window, recording for every window square the direction of its partner.
pub fn patch_entropy(samples: &[Tiling], window: &[GridSquare]) -> Result<PatchEntropy> {
    if samples.is_empty() || window.is_empty() {
        return domain("patch entropy needs samples and a non-empty window");
    }
    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    for t in samples {
        let key = window
            .iter()
            .map(|s| match t.domino_at(*s) {
                None => 4,
                Some(d) => {
                    let other = if d.first == *s { d.second() } else { d.first };
                    match (other.i - s.i, other.j - s.j) {
                        (1, 0) => 0,
                        (0, 1) => 1,
                        (-1, 0) => 2,
                        _ => 3,
                    }
                }
            })
            .collect();
        *counts.entry(key).or_default() += 1;
    }
    let total = samples.len() as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(PatchEntropy {
        bits_per_square: h.max(0.0) / window.len() as f64,
        distinct: counts.len(),
        samples: samples.len(),
        low_power: counts.len() * 5 > samples.len(),
    })
}

/// Expected heights over the tilings whose height function agrees with `f`
/// wherever `f` is prescribed; `None` when no tiling does.
pub fn conditional_expected_heights(f: &PartialHeightFunction) -> Result<Option<BTreeMap<Vertex, BigRational>>> {
    let region = f.region();
    let anchor = *region
        .boundary_vertices()
        .first()
        .ok_or_else(|| Error::Domain("region has no boundary".into()))?;
    let anchor_value = f.get(anchor).unwrap();
    let mut sums: BTreeMap<Vertex, BigInt> = BTreeMap::new();
    let mut count = 0u64;
    for t in enumerate_tilings(region)? {
        let h = height_from_tiling(&t, Some((anchor, anchor_value)))?;
        let matches = h.iter().all(|(v, x)| f.get(v).is_none_or(|y| x == y));
        if matches {
            count += 1;
            for (v, x) in h.iter() {
                *sums.entry(v).or_default() += x;
            }
        }
    }
    if count == 0 {
        return Ok(None);
    }
    let c = BigInt::from(count);
    Ok(Some(
        sums.into_iter()
            .map(|(v, s)| (v, BigRational::new(s, c.clone())))
            .collect(),
    ))
}

/// Whether `E_f[H(v)] <= E_g[H(v)]` at every vertex.  The data must be
/// comparable (`f <= g`) and agree modulo 4.
pub fn domination_check(f: &PartialHeightFunction, g: &PartialHeightFunction) -> Result<bool> {
    let ef =
        conditional_expected_heights(f)?.ok_or_else(|| Error::Domain("no tiling matches the lower data".into()))?;
    let eg =
        conditional_expected_heights(g)?.ok_or_else(|| Error::Domain("no tiling matches the upper data".into()))?;
    Ok(ef.iter().all(|(v, a)| eg.get(v).is_some_and(|b| a <= b)))
}

/// Tiling counts of the first few Aztec diamonds, `2^(n(n+1)/2)`.
pub fn aztec_count_formula(n: u32) -> BigInt {
    BigInt::one() << (n * (n + 1) / 2) as usize
}

/// Enumeration serialized through a lock, for callers that want tilings
/// from several threads.
pub struct SharedEnumeration(Mutex<TilingEnumeration>);

impl SharedEnumeration {
    pub fn new(e: TilingEnumeration) -> Self {
        SharedEnumeration(Mutex::new(e))
    }

    pub fn next_tiling(&self) -> Option<Tiling> {
        self.0.lock().expect("enumeration lock").next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact;
    use crate::geometry::{aztec_diamond, aztec_diamond_without_row, Coloring};

    fn rect(w: i32, h: i32) -> Region {
        Region::new(
            (0..w).flat_map(|i| (0..h).map(move |j| GridSquare::new(i, j))),
            Coloring::new(0),
        )
        .unwrap()
    }

    #[test]
    fn aztec_counts() {
        for n in 1..=4 {
            let d = aztec_diamond(n).unwrap();
            let e = enumerate_tilings(&d).unwrap();
            assert_eq!(e.exact_count(), aztec_count_formula(n as u32));
            assert_eq!(BigInt::from(e.count()), aztec_count_formula(n as u32));
        }
        for n in 1..=8 {
            assert_eq!(count_tilings(&aztec_diamond(n).unwrap()), aztec_count_formula(n as u32));
        }
    }

    #[test]
    fn small_region_counts() {
        assert_eq!(enumerate_tilings(&rect(2, 2)).unwrap().count(), 2);
        assert_eq!(enumerate_tilings(&rect(3, 2)).unwrap().count(), 3);
        assert_eq!(enumerate_tilings(&rect(4, 4)).unwrap().count(), 36);
        assert_eq!(count_tilings(&rect(8, 8)), BigInt::from(12_988_816u64));
        let l = Region::new(
            [GridSquare::new(0, 0), GridSquare::new(1, 0), GridSquare::new(0, 1)],
            Coloring::new(0),
        )
        .unwrap();
        assert_eq!(enumerate_tilings(&l).unwrap().count(), 0);
        assert_eq!(count_tilings(&l), BigInt::zero());
    }

    #[test]
    fn cap_is_enforced() {
        let d = aztec_diamond(5).unwrap();
        assert!(matches!(enumerate_tilings(&d), Err(Error::Resource(_))));
        assert!(enumerate_tilings_with_cap(&d, 60).is_ok());
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        let d = aztec_diamond(3).unwrap();
        let all: Vec<_> = enumerate_tilings(&d).unwrap().map(|t| t.canonical_dominos()).collect();
        let set: std::collections::HashSet<_> = all.iter().cloned().collect();
        assert_eq!(set.len(), 64);
    }

    #[test]
    fn small_order_point_values() {
        let s1 = exact_statistics(&aztec_diamond(1).unwrap(), None).unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(s1.north_locations(1)[&(0, 0)], half);
        let s2 = exact_statistics(&aztec_diamond(2).unwrap(), None).unwrap();
        let locs = s2.north_locations(2);
        let q = |a: i64| BigRational::new(a.into(), 4.into());
        assert_eq!(locs[&(0, 1)], q(3));
        assert_eq!(locs[&(0, -1)], q(1));
        assert_eq!(locs[&(1, 0)], q(1));
        assert_eq!(locs[&(-1, 0)], q(1));
    }

    #[test]
    fn matches_exact_core() {
        for n in 1..=4 {
            let s = exact_statistics(&aztec_diamond(n).unwrap(), None).unwrap();
            for ((ell, m), p) in s.north_locations(n) {
                assert_eq!(p, exact::placement_probability(exact::LatticeLocation::new(ell, m, n)));
            }
        }
        for (num, den) in [(1, 3), (1, 4)] {
            let b = BiasValue::from_ratio(num, den).unwrap();
            for n in 1..=4 {
                let s = exact_statistics(&aztec_diamond(n).unwrap(), Some(&b)).unwrap();
                for ((ell, m), p) in s.north_locations(n) {
                    let loc = exact::LatticeLocation::new(ell, m, n);
                    assert_eq!(p, exact::biased_placement_probability(loc, &b), "{loc} p={num}/{den}");
                }
            }
        }
    }

    #[test]
    fn biased_order_one() {
        let b = BiasValue::from_ratio(2, 7).unwrap();
        let s = exact_statistics(&aztec_diamond(1).unwrap(), Some(&b)).unwrap();
        assert_eq!(s.north_locations(1)[&(0, 0)], b.value().clone());
    }

    #[test]
    fn incidence_sums_are_one() {
        let b = BiasValue::from_ratio(1, 3).unwrap();
        for r in [
            aztec_diamond(3).unwrap(),
            rect(4, 3),
            aztec_diamond_without_row(3).unwrap(),
        ] {
            for bias in [None, Some(&b)] {
                let s = exact_statistics(&r, bias).unwrap();
                for (sq, total) in incidence_sums(&r, &s) {
                    assert!(total.is_one(), "{sq}: {total}");
                }
            }
        }
    }

    #[test]
    fn block_lemma_examples() {
        assert!(block_lemma_check(&aztec_diamond(1).unwrap()).unwrap());
        assert!(block_lemma_check(&rect(3, 2)).unwrap());
        for n in 2..=4 {
            assert!(block_lemma_check(&aztec_diamond(n).unwrap()).unwrap(), "n={n}");
        }
    }

    #[test]
    fn pair_lookup() {
        let r = aztec_diamond(1).unwrap();
        let s = exact_statistics_with(&r, None, &StatisticsOptions { cap: 40, pairs: true }).unwrap();
        let c = r.coloring();
        let top = DominoSpace::at(GridSquare::new(-1, 0), true, c);
        let bottom = DominoSpace::at(GridSquare::new(-1, -1), true, c);
        assert_eq!(s.pair(&top, &bottom).unwrap(), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn index_round_trips() {
        let d = aztec_diamond(3).unwrap();
        for (k, t) in enumerate_tilings(&d).unwrap().enumerate() {
            assert_eq!(tiling_index(&t).unwrap(), k as u128);
            assert_eq!(
                tiling_from_index(&d, k as u128).unwrap().canonical_dominos(),
                t.canonical_dominos()
            );
        }
        assert!(tiling_from_index(&d, 64).is_err());
    }

    #[test]
    fn herringbone_patch_has_no_entropy() {
        let r = aztec_diamond_without_row(3).unwrap();
        let t = enumerate_tilings(&r).unwrap().next().unwrap();
        let samples = vec![t; 50];
        let e = patch_entropy(&samples, &r.squares()[..6]).unwrap();
        assert_eq!(e.bits_per_square, 0.0);
        assert_eq!(e.distinct, 1);
    }

    #[test]
    fn stochastic_domination() {
        for (region, v) in [
            (aztec_diamond(3).unwrap(), (0, 0)),
            (rect(4, 4), (2, 2)),
            (rect(5, 6), (2, 3)),
        ] {
            let base = PartialHeightFunction::boundary(&region, Some((region.boundary_vertices()[0], 0))).unwrap();
            // values the vertex takes over all tilings
            let anchor = (region.boundary_vertices()[0], 0);
            let mut seen: Vec<i32> = enumerate_tilings(&region)
                .unwrap()
                .map(|t| height_from_tiling(&t, Some(anchor)).unwrap().get(v).unwrap())
                .collect();
            seen.sort();
            seen.dedup();
            assert!(seen.len() >= 2, "{v:?} is frozen");
            for w in seen.windows(2) {
                let mut f = base.clone();
                f.set(v, w[0]).unwrap();
                let mut g = base.clone();
                g.set(v, w[1]).unwrap();
                assert!(domination_check(&f, &g).unwrap());
            }
        }
    }

    #[test]
    fn csv_has_header() {
        let s = exact_statistics(&aztec_diamond(1).unwrap(), None).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,x,y,class"));
        assert!(text.contains("space,0,0,N,,,,1/2"));
    }
}
