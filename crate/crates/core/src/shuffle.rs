//! Exact sampling of Aztec diamond tilings by domino shuffling.
//!
//! One step grows an order-`k` tiling into an order-`k+1` tiling: colliding
//! pairs (an S directly above an N, an E directly left of a W) are deleted,
//! every other domino slides one unit in its own direction, and the holes,
//! which always split into 2x2 blocks, are filled with a horizontal pair with
//! probability `p` and a vertical pair otherwise.
//!
//! Randomness comes from ChaCha8.  The choice for a block is read at a word
//! position fixed by the block's location, on a stream fixed by the step, so
//! it does not depend on the order blocks are visited in.

use std::io::Write;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::exact::BiasValue;
use crate::geometry::{aztec_diamond, Coloring, DominoClass, DominoSpace, GridSquare, Tiling};

/// Seed of a sample; equal seeds give bit-identical tilings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    /// An independent-looking seed for the `index`-th of a family of samples.
    pub fn derive(&self, index: u64) -> RandomSeed {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        RandomSeed(rng.next_u64())
    }
}

const EMPTY: u8 = 0;
const FIRST: u8 = 8;

fn code(class: DominoClass) -> u8 {
    match class {
        DominoClass::North => 1,
        DominoClass::East => 2,
        DominoClass::South => 3,
        DominoClass::West => 4,
    }
}

fn class_of(c: u8) -> DominoClass {
    match c & 7 {
        1 => DominoClass::North,
        2 => DominoClass::East,
        3 => DominoClass::South,
        _ => DominoClass::West,
    }
}

// Blocks per step above which the random draws are spread over threads.
const PARALLEL_BLOCKS: usize = 4096;

/// A tiling of the order-`k` diamond in the middle of a shuffle.
///
/// Cells live in a fixed `2n x 2n` array for the target order `n`; cell
/// `(i, j)` holds the class code of the domino covering it, with a flag on
/// the domino's first square.
#[derive(Clone, Debug)]
pub struct ShuffleState {
    target: i32,
    order: i32,
    cells: Vec<u8>,
    scratch: Vec<u8>,
    seed: RandomSeed,
    threshold: u64,
    always_horizontal: bool,
}

impl ShuffleState {
    /// Empty order-0 state that can grow up to order `target`.
    pub fn new(target: i64, bias: &BiasValue, seed: RandomSeed) -> Result<Self> {
        if target < 1 {
            return domain(format!("order must be at least 1, got {target}"));
        }
        if target > 1 << 15 {
            return Err(Error::Resource(format!("order {target} exceeds the sampler limit")));
        }
        let side = 2 * target as usize;
        let (threshold, always_horizontal) = horizontal_threshold(bias);
        Ok(ShuffleState {
            target: target as i32,
            order: 0,
            cells: vec![EMPTY; side * side],
            scratch: vec![EMPTY; side * side],
            seed,
            threshold,
            always_horizontal,
        })
    }

    pub fn order(&self) -> i64 {
        self.order as i64
    }

    fn at(&self, i: i32, j: i32) -> usize {
        let side = 2 * self.target;
        ((j + self.target) * side + (i + self.target)) as usize
    }

    fn inside(k: i32, i: i32, j: i32) -> bool {
        // |2i+1| + |2j+1| <= 2k
        (2 * i + 1).abs() + (2 * j + 1).abs() <= 2 * k
    }

    fn rows(k: i32) -> impl Iterator<Item = (i32, std::ops::Range<i32>)> {
        (-k..k).map(move |j| {
            let half = k - if j >= 0 { j } else { -j - 1 };
            (j, -half..half)
        })
    }

    /// Advances one order.
    pub fn step(&mut self) -> Result<()> {
        if self.order >= self.target {
            return domain(format!("state already has its target order {}", self.target));
        }
        let k = self.order;
        let next = k + 1;
        // destruction
        for (j, range) in Self::rows(k) {
            for i in range {
                let c = self.cells[self.at(i, j)];
                if c & FIRST == 0 {
                    continue;
                }
                match class_of(c) {
                    DominoClass::South if j > -k => {
                        let below = self.cells[self.at(i, j - 1)];
                        if below & FIRST != 0 && class_of(below) == DominoClass::North {
                            self.clear(i, j, true);
                            self.clear(i, j - 1, true);
                        }
                    }
                    DominoClass::East => {
                        let right = self.cells[self.at(i + 1, j)];
                        if right & FIRST != 0 && class_of(right) == DominoClass::West {
                            self.clear(i, j, false);
                            self.clear(i + 1, j, false);
                        }
                    }
                    _ => {}
                }
            }
        }
        // sliding, into the scratch buffer
        for (j, range) in Self::rows(next) {
            for i in range {
                let idx = self.at(i, j);
                self.scratch[idx] = EMPTY;
            }
        }
        for (j, range) in Self::rows(k) {
            for i in range {
                let c = self.cells[self.at(i, j)];
                if c & FIRST == 0 {
                    continue;
                }
                let class = class_of(c);
                let (di, dj) = match class {
                    DominoClass::North => (0, 1),
                    DominoClass::South => (0, -1),
                    DominoClass::East => (1, 0),
                    DominoClass::West => (-1, 0),
                };
                let (ni, nj) = (i + di, j + dj);
                let (si, sj) = if class.is_horizontal() {
                    (ni + 1, nj)
                } else {
                    (ni, nj + 1)
                };
                if !Self::inside(next, ni, nj) || !Self::inside(next, si, sj) {
                    return Err(Error::Integrity(format!("domino slid out of the order-{next} diamond")));
                }
                let a = self.at(ni, nj);
                let b = self.at(si, sj);
                if self.scratch[a] != EMPTY || self.scratch[b] != EMPTY {
                    return Err(Error::Integrity(format!("dominos collided at order {next}")));
                }
                self.scratch[a] = code(class) | FIRST;
                self.scratch[b] = code(class);
            }
        }
        std::mem::swap(&mut self.cells, &mut self.scratch);
        self.order = next;
        // creation
        let blocks = self.empty_blocks()?;
        let choices = self.draw(&blocks);
        let coloring = Coloring::aztec(next as i64);
        for (&(i, j), horizontal) in blocks.iter().zip(choices) {
            if horizontal {
                self.put(DominoSpace::at(GridSquare::new(i, j), true, coloring));
                self.put(DominoSpace::at(GridSquare::new(i, j + 1), true, coloring));
            } else {
                self.put(DominoSpace::at(GridSquare::new(i, j), false, coloring));
                self.put(DominoSpace::at(GridSquare::new(i + 1, j), false, coloring));
            }
        }
        Ok(())
    }

    fn clear(&mut self, i: i32, j: i32, horizontal: bool) {
        let a = self.at(i, j);
        let b = if horizontal {
            self.at(i + 1, j)
        } else {
            self.at(i, j + 1)
        };
        self.cells[a] = EMPTY;
        self.cells[b] = EMPTY;
    }

    fn put(&mut self, d: DominoSpace) {
        let [a, b] = d.squares();
        let (ia, ib) = (self.at(a.i, a.j), self.at(b.i, b.j));
        self.cells[ia] = code(d.class) | FIRST;
        self.cells[ib] = code(d.class);
    }

    // Lower-left corners of the 2x2 holes, found by scanning rows upward.
    fn empty_blocks(&mut self) -> Result<Vec<(i32, i32)>> {
        let k = self.order;
        let mut blocks = Vec::new();
        // mark claimed hole cells in the scratch buffer
        for (j, range) in Self::rows(k) {
            for i in range {
                let idx = self.at(i, j);
                self.scratch[idx] = 0;
            }
        }
        for (j, range) in Self::rows(k) {
            for i in range {
                let idx = self.at(i, j);
                if self.cells[idx] != EMPTY || self.scratch[idx] != 0 {
                    continue;
                }
                let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
                for &(a, b) in &corners {
                    if !Self::inside(k, a, b) || self.cells[self.at(a, b)] != EMPTY || self.scratch[self.at(a, b)] != 0
                    {
                        return Err(Error::Integrity(format!(
                            "hole at ({i}, {j}) of order {k} is not a 2x2 block"
                        )));
                    }
                }
                for &(a, b) in &corners {
                    let c = self.at(a, b);
                    self.scratch[c] = 1;
                }
                blocks.push((i, j));
            }
        }
        Ok(blocks)
    }

    fn draw(&self, blocks: &[(i32, i32)]) -> Vec<bool> {
        if self.always_horizontal {
            return vec![true; blocks.len()];
        }
        let side = 2 * self.target as u128;
        let (seed, step, threshold, target) = (self.seed.0, self.order as u64, self.threshold, self.target);
        let choose = move |&(i, j): &(i32, i32)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(step);
            let key = (j + target) as u128 * side + (i + target) as u128;
            rng.set_word_pos(2 * key);
            rng.next_u64() < threshold
        };
        if blocks.len() >= PARALLEL_BLOCKS {
            blocks.par_iter().map(choose).collect()
        } else {
            blocks.iter().map(choose).collect()
        }
    }

    /// Checks that the current state is a complete tiling of its order.
    pub fn validate(&self) -> Result<()> {
        self.tiling().map(|_| ())
    }

    /// The current state as a tiling of the order-`k` diamond.
    pub fn tiling(&self) -> Result<Tiling> {
        let k = self.order;
        if k == 0 {
            return domain("the order-0 state has no tiling");
        }
        let region = aztec_diamond(k as i64)?;
        let mut placements = Vec::with_capacity(region.len() / 2);
        for (j, range) in Self::rows(k) {
            for i in range {
                let c = self.cells[self.at(i, j)];
                if c == EMPTY {
                    return Err(Error::Integrity(format!("square ({i}, {j}) is uncovered at order {k}")));
                }
                if c & FIRST != 0 {
                    placements.push((GridSquare::new(i, j), class_of(c).is_horizontal()));
                }
            }
        }
        let t = Tiling::from_placements(region, placements)?;
        for d in t.dominos() {
            let stored = class_of(self.cells[self.at(d.first.i, d.first.j)]);
            if stored != d.class {
                return Err(Error::Integrity(format!(
                    "domino at {} stored as {stored}, is {}",
                    d.first, d.class
                )));
            }
        }
        Ok(t)
    }

    /// Calls `f` with `(first square, class)` for every domino, without
    /// building a [`Tiling`].
    pub fn for_each_domino(&self, mut f: impl FnMut(GridSquare, DominoClass)) {
        for (j, range) in Self::rows(self.order) {
            for i in range {
                let c = self.cells[self.at(i, j)];
                if c & FIRST != 0 {
                    f(GridSquare::new(i, j), class_of(c));
                }
            }
        }
    }
}

// Block draws are uniform 64-bit words; a horizontal pair is chosen when the
// word falls below floor(p * 2^64).
fn horizontal_threshold(bias: &BiasValue) -> (u64, bool) {
    let p = bias.value();
    let scaled: BigInt = (p.numer() << 64usize) / p.denom();
    match scaled.to_u64() {
        Some(t) => (t, false),
        None => (u64::MAX, true),
    }
}

/// Options for [`sample_with`].
#[derive(Default)]
pub struct SampleOptions<'a> {
    /// Validate the tiling after every step.
    pub validate_each_step: bool,
    /// Receives every intermediate tiling in the text format.
    pub trace: Option<&'a mut dyn Write>,
}

/// A uniformly random tiling of the order-`n` diamond.
pub fn sample_uniform(n: i64, seed: RandomSeed) -> Result<Tiling> {
    sample_biased(n, &BiasValue::half(), seed)
}

/// A tiling of the order-`n` diamond drawn from the Gibbs distribution with
/// bias `p`.
pub fn sample_biased(n: i64, bias: &BiasValue, seed: RandomSeed) -> Result<Tiling> {
    sample_with(n, bias, seed, SampleOptions::default())
}

pub fn sample_with(n: i64, bias: &BiasValue, seed: RandomSeed, mut opts: SampleOptions<'_>) -> Result<Tiling> {
    let state = sample_state_with(n, bias, seed, &mut opts)?;
    state.tiling()
}

/// Runs the shuffle to order `n` and returns the raw state.
pub fn sample_state(n: i64, bias: &BiasValue, seed: RandomSeed) -> Result<ShuffleState> {
    sample_state_with(n, bias, seed, &mut SampleOptions::default())
}

fn sample_state_with(n: i64, bias: &BiasValue, seed: RandomSeed, opts: &mut SampleOptions<'_>) -> Result<ShuffleState> {
    let mut state = ShuffleState::new(n, bias, seed)?;
    for _ in 0..n {
        state.step()?;
        if opts.validate_each_step || cfg!(debug_assertions) && n <= 16 {
            state.validate()?;
        }
        if let Some(w) = opts.trace.as_deref_mut() {
            let text = state.tiling()?.to_text();
            writeln!(w, "# step {}", state.order())
                .and_then(|_| w.write_all(text.as_bytes()))
                .map_err(|e| Error::Resource(format!("trace write failed: {e}")))?;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn deterministic() {
        let a = sample_uniform(20, RandomSeed(7)).unwrap();
        let b = sample_uniform(20, RandomSeed(7)).unwrap();
        let c = sample_uniform(20, RandomSeed(8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn every_step_is_valid() {
        let b = BiasValue::from_ratio(1, 3).unwrap();
        for seed in 0..5 {
            sample_with(
                24,
                &b,
                RandomSeed(seed),
                SampleOptions {
                    validate_each_step: true,
                    trace: None,
                },
            )
            .unwrap();
        }
    }

    #[test]
    fn large_orders_use_parallel_draws() {
        let t = sample_uniform(200, RandomSeed(3)).unwrap();
        assert_eq!(t.dominos().len(), 200 * 201);
    }

    #[test]
    fn order_one_is_fair() {
        let mut horizontal = 0;
        let samples = 20_000;
        for s in 0..samples {
            if sample_uniform(1, RandomSeed(s)).unwrap().horizontal_count() == 2 {
                horizontal += 1;
            }
        }
        let f = horizontal as f64 / samples as f64;
        let sigma = (0.25 / samples as f64).sqrt();
        assert!((f - 0.5).abs() < 4.0 * sigma, "{f}");
    }

    #[test]
    fn order_two_hits_all_tilings() {
        let mut seen: HashMap<Vec<DominoSpace>, usize> = HashMap::new();
        for s in 0..2000 {
            *seen
                .entry(sample_uniform(2, RandomSeed(s)).unwrap().canonical_dominos())
                .or_default() += 1;
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn extreme_bias_thresholds() {
        let (t, always) = horizontal_threshold(&BiasValue::half());
        assert_eq!(t, 1 << 63);
        assert!(!always);
        let (t, _) = horizontal_threshold(&BiasValue::from_ratio(1, 4).unwrap());
        assert_eq!(t, 1 << 62);
    }

    #[test]
    fn trace_records_each_order() {
        let mut buf = Vec::new();
        sample_with(
            3,
            &BiasValue::half(),
            RandomSeed(1),
            SampleOptions {
                validate_each_step: false,
                trace: Some(&mut buf),
            },
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("# step").count(), 3);
        assert!(text.contains("aztec 3"));
    }

    #[test]
    fn derived_seeds_differ() {
        let s = RandomSeed(42);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(5), s.derive(5));
    }
}
