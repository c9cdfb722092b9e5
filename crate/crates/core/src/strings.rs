//! Edit-distance-sum diversity for string streams.
//!
//! Diversity of a string set is the sum of Levenshtein distances over all
//! unordered pairs. The cache keeps the full pairwise distance matrix plus
//! per-row sums, so scoring a candidate costs exactly m distance
//! computations (one per slot) and Theta(m) arithmetic: the candidate's
//! distances are identical across the m hypothetical swaps, so they are
//! computed once and every gain is derived from row sums.
//!
//! Distances are over Unicode scalar values with unit costs; comparison is
//! case-sensitive and strings are taken verbatim.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::engine::{DiversityMeasure, PdgEvaluation};

/// Count of dynamic-programming distance computations. Instrumentation for
/// cost accounting: building a cache adds m(m-1)/2, scoring a candidate adds
/// exactly m, and applying a swap with a precomputed row adds none.
static DP_CALLS: AtomicU64 = AtomicU64::new(0);

/// Total edit-distance computations performed so far (process-wide).
pub fn dp_call_count() -> u64 {
    DP_CALLS.load(Ordering::Relaxed)
}

#[derive(Debug)]
pub enum StringError {
    /// Slot index past the end of the buffer.
    IndexOutOfRange { index: usize, len: usize },
    /// A candidate distance row of the wrong length was supplied.
    RowLengthMismatch { expected: usize, actual: usize },
}

impl fmt::Display for StringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IndexOutOfRange { index, len } => {
                write!(f, "slot index {index} out of range for {len} slots")
            }
            Self::RowLengthMismatch { expected, actual } => {
                write!(f, "distance row has {actual} entries, expected {expected}")
            }
        }
    }
}

impl std::error::Error for StringError {}

/// Levenshtein distance between two strings: the minimum number of
/// single-character insertions, deletions and substitutions turning one
/// into the other. Characters are Unicode scalar values.
pub fn edit_distance(x: &str, y: &str) -> u64 {
    let xc: Vec<char> = x.chars().collect();
    let yc: Vec<char> = y.chars().collect();
    edit_distance_chars(&xc, &yc)
}

/// Two-row DP over pre-split character slices.
pub fn edit_distance_chars(x: &[char], y: &[char]) -> u64 {
    DP_CALLS.fetch_add(1, Ordering::Relaxed);
    if x.is_empty() {
        return y.len() as u64;
    }
    if y.is_empty() {
        return x.len() as u64;
    }
    // Keep the inner row the shorter one.
    let (long, short) = if x.len() >= y.len() { (x, y) } else { (y, x) };
    let mut row: Vec<u64> = (0..=short.len() as u64).collect();
    for (i, &lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i as u64 + 1;
        for (j, &sc) in short.iter().enumerate() {
            let above = row[j + 1];
            let sub = diag + u64::from(lc != sc);
            row[j + 1] = sub.min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

/// Sum of edit distances over all unordered pairs.
pub fn dis_sum<S: AsRef<str>>(strings: &[S]) -> u64 {
    let mut total = 0u64;
    for i in 0..strings.len() {
        for j in (i + 1)..strings.len() {
            total += edit_distance(strings[i].as_ref(), strings[j].as_ref());
        }
    }
    total
}

/// Pairwise distance matrix over the buffered strings, with row sums and the
/// pair-sum total cached.
#[derive(Debug, Clone)]
pub struct DistanceCache {
    m: usize,
    /// Flat m-by-m symmetric matrix, zero diagonal.
    pair: Vec<u64>,
    /// `row_sums[i]` is the sum of row i, i.e. the total distance from slot
    /// i to every other slot.
    row_sums: Vec<u64>,
    /// Sum over unordered pairs; equals half the row-sum total.
    total: u64,
}

impl DistanceCache {
    pub fn build<S: AsRef<str>>(slots: &[S]) -> Self {
        let m = slots.len();
        let mut pair = vec![0u64; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let d = edit_distance(slots[i].as_ref(), slots[j].as_ref());
                pair[i * m + j] = d;
                pair[j * m + i] = d;
            }
        }
        let row_sums: Vec<u64> = (0..m).map(|i| pair[i * m..(i + 1) * m].iter().sum()).collect();
        let total = row_sums.iter().sum::<u64>() / 2;
        DistanceCache {
            m,
            pair,
            row_sums,
            total,
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Diversity of the cached set: the pair-sum total.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distance(&self, i: usize, j: usize) -> u64 {
        self.pair[i * self.m + j]
    }

    /// Distances from a candidate to every slot, plus their sum. Exactly m
    /// distance computations.
    pub fn candidate_row<S: AsRef<str>>(slots: &[S], candidate: &str) -> (Vec<u64>, u64) {
        let cand: Vec<char> = candidate.chars().collect();
        let row: Vec<u64> = slots
            .iter()
            .map(|s| {
                let sc: Vec<char> = s.as_ref().chars().collect();
                edit_distance_chars(&cand, &sc)
            })
            .collect();
        let sum = row.iter().sum();
        (row, sum)
    }

    /// Best single-swap gain for a candidate with a precomputed distance
    /// row. For eviction of slot j the new total is
    /// `total - row_sums[j] + (row_total - row[j])`, so the gain is
    /// `row_total - row[j] - row_sums[j]`. Ties go to the lowest slot.
    pub fn best_swap(&self, row: &[u64], row_total: u64) -> (i64, usize) {
        debug_assert_eq!(row.len(), self.m);
        let mut best_gain = i64::MIN;
        let mut best_slot = 0usize;
        for j in 0..self.m {
            let gain = (row_total - row[j]) as i64 - self.row_sums[j] as i64;
            if gain > best_gain {
                best_gain = gain;
                best_slot = j;
            }
        }
        (best_gain, best_slot)
    }

    /// Replace slot `slot`, rewriting its matrix row and column from the
    /// candidate's precomputed distances and updating the sums by delta.
    /// No distance computation happens here.
    pub fn apply(
        &mut self,
        slots: &mut [String],
        slot: usize,
        candidate: String,
        row: &[u64],
    ) -> Result<(), StringError> {
        let m = self.m;
        if slot >= m {
            return Err(StringError::IndexOutOfRange {
                index: slot,
                len: m,
            });
        }
        if row.len() != m {
            return Err(StringError::RowLengthMismatch {
                expected: m,
                actual: row.len(),
            });
        }
        let row_total: u64 = row.iter().sum();
        let gain = (row_total - row[slot]) as i64 - self.row_sums[slot] as i64;
        for i in 0..m {
            if i == slot {
                continue;
            }
            let old = self.pair[i * m + slot];
            self.pair[i * m + slot] = row[i];
            self.pair[slot * m + i] = row[i];
            self.row_sums[i] = self.row_sums[i] + row[i] - old;
        }
        self.row_sums[slot] = row_total - row[slot];
        self.total = (self.total as i64 + gain) as u64;
        slots[slot] = candidate;
        Ok(())
    }

    /// True when matrix, row sums and total all match a fresh rebuild.
    pub fn consistent_with<S: AsRef<str>>(&self, slots: &[S]) -> bool {
        let fresh = DistanceCache::build(slots);
        self.pair == fresh.pair && self.row_sums == fresh.row_sums && self.total == fresh.total
    }
}

/// Best single-swap gain for `candidate` and the slot achieving it (ties go
/// to the lowest index). Performs exactly m distance computations.
pub fn pdg_string<S: AsRef<str>>(
    cache: &DistanceCache,
    slots: &[S],
    candidate: &str,
) -> (i64, usize) {
    let (row, row_total) = DistanceCache::candidate_row(slots, candidate);
    cache.best_swap(&row, row_total)
}

/// Replace `slots[slot]` with `candidate`, updating the cache incrementally.
pub fn apply_swap_string(
    cache: &mut DistanceCache,
    slots: &mut [String],
    slot: usize,
    candidate: &str,
) -> Result<(), StringError> {
    if slot >= slots.len() {
        return Err(StringError::IndexOutOfRange {
            index: slot,
            len: slots.len(),
        });
    }
    let (row, _) = DistanceCache::candidate_row(slots, candidate);
    cache.apply(slots, slot, candidate.to_string(), &row)
}

/// The edit-distance-sum diversity measure.
#[derive(Debug, Default, Clone, Copy)]
pub struct StringDiversity;

impl StringDiversity {
    pub fn new() -> Self {
        StringDiversity
    }
}

/// Evaluation detail: the candidate's distance row, reused on swap.
pub struct CandidateDistances {
    row: Vec<u64>,
}

impl DiversityMeasure for StringDiversity {
    type Elem = String;
    type Cache = DistanceCache;
    type Detail = CandidateDistances;

    fn build_cache(&self, slots: &[String]) -> DistanceCache {
        DistanceCache::build(slots)
    }

    fn diversity(&self, cache: &DistanceCache, _slots: &[String]) -> f64 {
        cache.total() as f64
    }

    fn evaluate(
        &self,
        cache: &DistanceCache,
        slots: &[String],
        candidate: &String,
    ) -> PdgEvaluation<CandidateDistances> {
        let (row, row_total) = DistanceCache::candidate_row(slots, candidate);
        let (gain, best_slot) = cache.best_swap(&row, row_total);
        PdgEvaluation {
            pdg: gain as f64,
            best_slot,
            detail: CandidateDistances { row },
        }
    }

    fn apply_swap(
        &self,
        cache: &mut DistanceCache,
        slots: &mut [String],
        slot: usize,
        candidate: String,
        detail: CandidateDistances,
    ) {
        cache
            .apply(slots, slot, candidate, &detail.row)
            .expect("engine swaps at an evaluated slot index");
    }

    fn naive_diversity(&self, elems: &[String]) -> f64 {
        dis_sum(elems) as f64
    }
}
