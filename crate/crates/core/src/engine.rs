//! Generic one-pass selection engine.
//!
//! The engine is measure-agnostic: anything implementing [`DiversityMeasure`]
//! can drive a selection run. A run consumes its stream lazily and at most
//! once, performs at most one replacement, and reports the full outcome.

use std::collections::HashSet;
use std::fmt;
use std::hash::Hash;
use std::time::{Duration, Instant};

/// A stream element that can be tracked for exact distinctness.
pub trait StreamElement: Clone + PartialEq {
    /// Hashable key used for exact duplicate detection during
    /// initialization. Two elements compare equal iff their keys do.
    type Key: Hash + Eq;

    fn distinct_key(&self) -> Self::Key;
}

impl StreamElement for f64 {
    type Key = u64;

    fn distinct_key(&self) -> u64 {
        // Collapse -0.0 onto 0.0 so the key agrees with `==`.
        if *self == 0.0 {
            0
        } else {
            self.to_bits()
        }
    }
}

impl StreamElement for String {
    type Key = String;

    fn distinct_key(&self) -> String {
        self.clone()
    }
}

/// Result of scoring one candidate against the current buffer.
pub struct PdgEvaluation<D> {
    /// Possible diversity gain: the best achievable `Div(after) - Div(before)`
    /// over all single swaps. May be negative.
    pub pdg: f64,
    /// Slot whose replacement achieves that gain (ties go to the lowest
    /// index).
    pub best_slot: usize,
    /// Measure-specific data computed during evaluation that a subsequent
    /// [`DiversityMeasure::apply_swap`] can reuse instead of recomputing.
    pub detail: D,
}

/// A diversity measure over a fixed-size element buffer.
///
/// Implementations own an aggregate cache (sums for variance, a pairwise
/// distance matrix for edit-distance sums) so that candidate evaluation and
/// replacement stay cheap. The cache must always describe `slots` exactly;
/// `build_cache` from scratch is the reference point tests compare against.
pub trait DiversityMeasure {
    type Elem: StreamElement;
    type Cache;
    type Detail;

    /// Build the aggregate cache from scratch.
    fn build_cache(&self, slots: &[Self::Elem]) -> Self::Cache;

    /// Diversity of the buffered set.
    fn diversity(&self, cache: &Self::Cache, slots: &[Self::Elem]) -> f64;

    /// Score a candidate: best single-swap gain and the slot achieving it.
    fn evaluate(
        &self,
        cache: &Self::Cache,
        slots: &[Self::Elem],
        candidate: &Self::Elem,
    ) -> PdgEvaluation<Self::Detail>;

    /// Replace `slots[slot]` with `candidate`, updating the cache
    /// incrementally. `detail` is the evaluation detail for this candidate.
    fn apply_swap(
        &self,
        cache: &mut Self::Cache,
        slots: &mut [Self::Elem],
        slot: usize,
        candidate: Self::Elem,
        detail: Self::Detail,
    );

    /// Diversity computed from scratch with no cached state. This is the
    /// independent route used by the brute-force oracle; it must not share
    /// aggregate bookkeeping with the incremental path.
    fn naive_diversity(&self, elems: &[Self::Elem]) -> f64;
}

/// The in-memory result set: `m` slots plus the measure's aggregate cache.
///
/// Slots hold elements in arrival order. Both bundled measures are
/// order-invariant, so slot order never affects diversity or gains.
pub struct MemoryBuffer<M: DiversityMeasure> {
    slots: Vec<M::Elem>,
    cache: M::Cache,
}

impl<M: DiversityMeasure> fmt::Debug for MemoryBuffer<M>
where
    M::Elem: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MemoryBuffer")
            .field("slots", &self.slots)
            .finish_non_exhaustive()
    }
}

impl<M: DiversityMeasure> MemoryBuffer<M> {
    /// Build a buffer over the given slots. The slots need not be distinct;
    /// distinctness is a property of stream initialization, not of the
    /// buffer itself.
    pub fn new(measure: &M, slots: Vec<M::Elem>) -> Self {
        assert!(!slots.is_empty(), "memory buffer cannot be empty");
        let cache = measure.build_cache(&slots);
        MemoryBuffer { slots, cache }
    }

    pub fn slots(&self) -> &[M::Elem] {
        &self.slots
    }

    pub fn cache(&self) -> &M::Cache {
        &self.cache
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn diversity(&self, measure: &M) -> f64 {
        measure.diversity(&self.cache, &self.slots)
    }
}

/// Parameters of one selection run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionConfig {
    /// Memory size; must match the buffer.
    pub m: usize,
    /// Scan-phase length: this many stream elements only calibrate the
    /// acceptance threshold.
    pub k: usize,
    /// Stream length after initialization.
    pub n: usize,
    /// When set, a forced final replacement whose gain is not positive is
    /// skipped instead of applied. Off by default.
    pub skip_nonimproving_final: bool,
}

impl SelectionConfig {
    pub fn new(m: usize, k: usize, n: usize) -> Result<Self, SelectionError> {
        if m < 2 {
            return Err(SelectionError::MemoryTooSmall { m });
        }
        if k < 1 || k >= n {
            return Err(SelectionError::InvalidScanLength { k, n });
        }
        Ok(SelectionConfig {
            m,
            k,
            n,
            skip_nonimproving_final: false,
        })
    }

    pub fn with_skip_nonimproving_final(mut self, skip: bool) -> Self {
        self.skip_nonimproving_final = skip;
        self
    }
}

/// Full record of one selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    /// 1-based position, in the n-element stream, of the element swapped
    /// into memory. Greater than `k` always; equal to `n` when forced.
    pub selected_position: usize,
    /// 0-based buffer slot that was evicted. `None` only when a
    /// non-improving forced final replacement was skipped.
    pub evicted_slot: Option<usize>,
    /// Realized diversity gain of the run. Zero when the final replacement
    /// was skipped.
    pub pdg: f64,
    /// Diversity of the buffer before the run.
    pub div0: f64,
    /// Diversity of the buffer after the run.
    pub div_final: f64,
    /// Diversity increasing rate: `pdg / div0`.
    pub dir: f64,
    /// Whether the run fell through to the forced final replacement.
    pub forced_final: bool,
    /// Stream elements consumed by this run (initialization not included).
    pub elements_scanned: usize,
    /// Wall time of the selection loop.
    pub wall_time: Duration,
}

/// Errors from buffer initialization and selection runs.
#[derive(Debug)]
pub enum SelectionError {
    /// The stream ended before yielding what the operation needed.
    StreamExhausted { needed: usize, got: usize },
    /// The initial buffer has zero diversity, so the diversity increasing
    /// rate is undefined.
    ZeroBaselineDiversity,
    /// Scan length must satisfy `1 <= k < n`.
    InvalidScanLength { k: usize, n: usize },
    /// Memory must hold at least two elements.
    MemoryTooSmall { m: usize },
    /// The config's `m` does not match the buffer.
    BufferSizeMismatch { expected: usize, actual: usize },
}

impl fmt::Display for SelectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StreamExhausted { needed, got } => {
                write!(f, "stream exhausted: needed {needed} elements, got {got}")
            }
            Self::ZeroBaselineDiversity => {
                write!(f, "initial buffer diversity is zero; DIR is undefined")
            }
            Self::InvalidScanLength { k, n } => {
                write!(f, "scan length k={k} must satisfy 1 <= k < n={n}")
            }
            Self::MemoryTooSmall { m } => {
                write!(f, "memory size m={m} must be at least 2")
            }
            Self::BufferSizeMismatch { expected, actual } => {
                write!(f, "config expects m={expected} but buffer holds {actual}")
            }
        }
    }
}

impl std::error::Error for SelectionError {}

/// Fill a buffer with the first `m` pairwise-distinct stream elements, in
/// stream order. Duplicates are skipped but still consumed, so the stream
/// cursor rests immediately after the element that completed the buffer.
///
/// Distinctness tracking is exact (hash set over element keys).
pub fn initialize_memory<M, I>(
    measure: &M,
    stream: &mut I,
    m: usize,
) -> Result<MemoryBuffer<M>, SelectionError>
where
    M: DiversityMeasure,
    I: Iterator<Item = M::Elem>,
{
    if m < 1 {
        return Err(SelectionError::MemoryTooSmall { m });
    }
    let mut slots: Vec<M::Elem> = Vec::with_capacity(m);
    let mut seen: HashSet<<M::Elem as StreamElement>::Key> = HashSet::with_capacity(m);
    while slots.len() < m {
        let elem = match stream.next() {
            Some(e) => e,
            None => {
                return Err(SelectionError::StreamExhausted {
                    needed: m,
                    got: slots.len(),
                })
            }
        };
        if seen.insert(elem.distinct_key()) {
            slots.push(elem);
        }
    }
    Ok(MemoryBuffer::new(measure, slots))
}

/// Run the one-pass selection over `n` further stream elements.
///
/// Phase 1 scores the first `k` elements and records the largest gain seen
/// (`PDG_max`, starting from negative infinity) without replacing anything.
/// Phase 2 stops at the first element whose gain strictly exceeds `PDG_max`
/// and swaps it into the slot that maximizes post-swap diversity. If no such
/// element appears through position `n`, the n-th element is swapped in
/// regardless of its gain (the forced final replacement), unless
/// `skip_nonimproving_final` is set and that gain is not positive.
///
/// The stream is consumed lazily: elements after the stopping point are
/// never read.
pub fn run_selection<M, I>(
    measure: &M,
    buffer: &mut MemoryBuffer<M>,
    stream: &mut I,
    config: &SelectionConfig,
) -> Result<SelectionOutcome, SelectionError>
where
    M: DiversityMeasure,
    I: Iterator<Item = M::Elem>,
{
    if config.k < 1 || config.k >= config.n {
        return Err(SelectionError::InvalidScanLength {
            k: config.k,
            n: config.n,
        });
    }
    if config.m < 2 {
        return Err(SelectionError::MemoryTooSmall { m: config.m });
    }
    if buffer.len() != config.m {
        return Err(SelectionError::BufferSizeMismatch {
            expected: config.m,
            actual: buffer.len(),
        });
    }

    let start = Instant::now();
    let div0 = measure.diversity(&buffer.cache, &buffer.slots);
    if div0 <= 0.0 {
        return Err(SelectionError::ZeroBaselineDiversity);
    }

    let mut scanned = 0usize;
    let mut next_element = |scanned: &mut usize| -> Result<M::Elem, SelectionError> {
        match stream.next() {
            Some(e) => {
                *scanned += 1;
                Ok(e)
            }
            None => Err(SelectionError::StreamExhausted {
                needed: config.n,
                got: *scanned,
            }),
        }
    };

    // Phase 1: calibrate the acceptance threshold.
    let mut pdg_max = f64::NEG_INFINITY;
    for _ in 0..config.k {
        let elem = next_element(&mut scanned)?;
        let eval = measure.evaluate(&buffer.cache, &buffer.slots, &elem);
        if eval.pdg > pdg_max {
            pdg_max = eval.pdg;
        }
    }

    // Phase 2: stop at the first element beating the threshold.
    let mut finale: Option<(M::Elem, PdgEvaluation<M::Detail>)> = None;
    for pos in (config.k + 1)..=config.n {
        let elem = next_element(&mut scanned)?;
        let eval = measure.evaluate(&buffer.cache, &buffer.slots, &elem);
        if eval.pdg > pdg_max {
            let slot = eval.best_slot;
            let pdg = eval.pdg;
            measure.apply_swap(&mut buffer.cache, &mut buffer.slots, slot, elem, eval.detail);
            let div_final = measure.diversity(&buffer.cache, &buffer.slots);
            return Ok(SelectionOutcome {
                selected_position: pos,
                evicted_slot: Some(slot),
                pdg,
                div0,
                div_final,
                dir: pdg / div0,
                forced_final: false,
                elements_scanned: scanned,
                wall_time: start.elapsed(),
            });
        }
        if pos == config.n {
            finale = Some((elem, eval));
        }
    }

    // Forced final replacement with the n-th element.
    let (elem, eval) = finale.expect("phase 2 covers position n");
    if config.skip_nonimproving_final && eval.pdg <= 0.0 {
        let div_final = measure.diversity(&buffer.cache, &buffer.slots);
        return Ok(SelectionOutcome {
            selected_position: config.n,
            evicted_slot: None,
            pdg: 0.0,
            div0,
            div_final,
            dir: 0.0,
            forced_final: true,
            elements_scanned: scanned,
            wall_time: start.elapsed(),
        });
    }
    let slot = eval.best_slot;
    let pdg = eval.pdg;
    measure.apply_swap(&mut buffer.cache, &mut buffer.slots, slot, elem, eval.detail);
    let div_final = measure.diversity(&buffer.cache, &buffer.slots);
    Ok(SelectionOutcome {
        selected_position: config.n,
        evicted_slot: Some(slot),
        pdg,
        div0,
        div_final,
        dir: pdg / div0,
        forced_final: true,
        elements_scanned: scanned,
        wall_time: start.elapsed(),
    })
}

/// Diversity increasing rate: `pdg / div0`.
///
/// Negative when a forced final replacement lowered diversity. Undefined
/// (an error) when the baseline diversity is zero.
pub fn dir(pdg: f64, div0: f64) -> Result<f64, SelectionError> {
    if div0 <= 0.0 {
        return Err(SelectionError::ZeroBaselineDiversity);
    }
    Ok(pdg / div0)
}

/// Iterator adapter that counts how many elements were pulled through it.
///
/// Wrapping the stream handed to [`initialize_memory`] and [`run_selection`]
/// makes the single-pass property checkable: total reads never exceed
/// initialization reads plus `n`, and a by-value iterator cannot yield the
/// same element twice.
pub struct CountingStream<I> {
    inner: I,
    reads: usize,
}

impl<I> CountingStream<I> {
    pub fn new(inner: I) -> Self {
        CountingStream { inner, reads: 0 }
    }

    /// Number of elements yielded so far.
    pub fn reads(&self) -> usize {
        self.reads
    }
}

impl<I: Iterator> Iterator for CountingStream<I> {
    type Item = I::Item;

    fn next(&mut self) -> Option<I::Item> {
        let item = self.inner.next();
        if item.is_some() {
            self.reads += 1;
        }
        item
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::NumericDiversity;

    const EX_STREAM: [f64; 6] = [1.0, 1.0, 2.0, 2.0, 3.0, 9.9];

    #[test]
    fn initialize_takes_first_distinct_in_order() {
        let measure = NumericDiversity::new();
        let mut stream = EX_STREAM.iter().copied();
        let buffer = initialize_memory(&measure, &mut stream, 3).unwrap();
        assert_eq!(buffer.slots(), &[1.0, 2.0, 3.0]);
        // Cursor rests right before 9.9.
        assert_eq!(stream.next(), Some(9.9));
        assert_eq!(stream.next(), None);
    }

    #[test]
    fn initialize_errors_when_not_enough_distinct() {
        let measure = NumericDiversity::new();
        let mut stream = [1.0, 2.0, 2.0, 3.0, 4.0].iter().copied();
        let err = initialize_memory(&measure, &mut stream, 5).unwrap_err();
        assert!(matches!(
            err,
            SelectionError::StreamExhausted { needed: 5, got: 4 }
        ));
    }

    #[test]
    fn initialize_preserves_arrival_order_of_paper_style_input() {
        let measure = NumericDiversity::new();
        let mut stream = [711.56, 121.65, 7498.12, 2866.83, 794.47, 1.0]
            .iter()
            .copied();
        let buffer = initialize_memory(&measure, &mut stream, 5).unwrap();
        let mut sorted = buffer.slots().to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sorted, vec![121.65, 711.56, 794.47, 2866.83, 7498.12]);
    }

    #[test]
    fn config_rejects_bad_parameters() {
        assert!(matches!(
            SelectionConfig::new(1, 1, 2),
            Err(SelectionError::MemoryTooSmall { m: 1 })
        ));
        assert!(matches!(
            SelectionConfig::new(2, 0, 2),
            Err(SelectionError::InvalidScanLength { k: 0, n: 2 })
        ));
        assert!(matches!(
            SelectionConfig::new(2, 2, 2),
            Err(SelectionError::InvalidScanLength { k: 2, n: 2 })
        ));
        assert!(SelectionConfig::new(2, 1, 2).is_ok());
    }

    #[test]
    fn selection_picks_first_exceeding_element() {
        // Memory {0, 10}; k=1, n=2; stream [0.0001, 1000.0]. The tiny value
        // sets a slightly negative threshold, so 1000.0 wins at position 2.
        let measure = NumericDiversity::new();
        let mut buffer = MemoryBuffer::new(&measure, vec![0.0, 10.0]);
        let mut stream = [0.0001, 1000.0].iter().copied();
        let config = SelectionConfig::new(2, 1, 2).unwrap();
        let outcome = run_selection(&measure, &mut buffer, &mut stream, &config).unwrap();
        assert_eq!(outcome.selected_position, 2);
        assert!(!outcome.forced_final);
        assert_eq!(buffer.slots(), &[0.0, 1000.0]);
    }

    #[test]
    fn selection_stops_reading_after_replacement() {
        let measure = NumericDiversity::new();
        let mut buffer = MemoryBuffer::new(&measure, vec![0.0, 1.0]);
        // Position 2 triggers; positions 3..5 must never be read.
        let mut stream = CountingStream::new([0.5, 100.0, 7.0, 8.0, 9.0].iter().copied());
        let config = SelectionConfig::new(2, 1, 5).unwrap();
        let outcome = run_selection(&measure, &mut buffer, &mut stream, &config).unwrap();
        assert_eq!(outcome.selected_position, 2);
        assert_eq!(outcome.elements_scanned, 2);
        assert_eq!(stream.reads(), 2);
    }

    #[test]
    fn forced_final_applies_even_when_gain_is_negative() {
        // 120 sets a high threshold during the scan; the rest of the stream
        // sits inside the buffer's range, so the last element is forced in
        // with a negative gain.
        let measure = NumericDiversity::new();
        let mut buffer = MemoryBuffer::new(&measure, vec![0.0, 100.0]);
        let mut stream = [120.0, 50.0, 49.0].iter().copied();
        let config = SelectionConfig::new(2, 1, 3).unwrap();
        let outcome = run_selection(&measure, &mut buffer, &mut stream, &config).unwrap();
        assert!(outcome.forced_final);
        assert_eq!(outcome.selected_position, 3);
        assert!(outcome.pdg < 0.0);
        assert!(outcome.dir < 0.0);
        assert!(buffer.slots().contains(&49.0));
    }

    #[test]
    fn skip_flag_suppresses_nonimproving_final() {
        let measure = NumericDiversity::new();
        let mut buffer = MemoryBuffer::new(&measure, vec![0.0, 100.0]);
        let mut stream = [120.0, 50.0, 49.0].iter().copied();
        let config = SelectionConfig::new(2, 1, 3)
            .unwrap()
            .with_skip_nonimproving_final(true);
        let outcome = run_selection(&measure, &mut buffer, &mut stream, &config).unwrap();
        assert!(outcome.forced_final);
        assert_eq!(outcome.evicted_slot, None);
        assert_eq!(outcome.pdg, 0.0);
        assert_eq!(outcome.dir, 0.0);
        assert_eq!(buffer.slots(), &[0.0, 100.0]);
    }

    #[test]
    fn skip_flag_still_applies_improving_final() {
        let measure = NumericDiversity::new();
        let mut buffer = MemoryBuffer::new(&measure, vec![0.0, 1.0, 2.0]);
        // 3.5 sets a high threshold; nothing beats it, but the final 3.0
        // still improves diversity and must be applied despite the flag.
        let mut stream = [3.5, 2.5, 3.0].iter().copied();
        let config = SelectionConfig::new(3, 1, 3)
            .unwrap()
            .with_skip_nonimproving_final(true);
        let outcome = run_selection(&measure, &mut buffer, &mut stream, &config).unwrap();
        assert!(outcome.forced_final);
        assert!(outcome.pdg > 0.0);
        assert!(outcome.evicted_slot.is_some());
    }

    #[test]
    fn selection_errors_on_short_stream() {
        let measure = NumericDiversity::new();
        let mut buffer = MemoryBuffer::new(&measure, vec![0.0, 10.0]);
        let mut stream = [5.0, 6.0].iter().copied();
        let config = SelectionConfig::new(2, 2, 5).unwrap();
        let err = run_selection(&measure, &mut buffer, &mut stream, &config).unwrap_err();
        assert!(matches!(
            err,
            SelectionError::StreamExhausted { needed: 5, got: 2 }
        ));
    }

    #[test]
    fn selection_errors_on_zero_baseline() {
        let measure = NumericDiversity::new();
        let mut buffer = MemoryBuffer::new(&measure, vec![5.0, 5.0]);
        let mut stream = [1.0, 2.0].iter().copied();
        let config = SelectionConfig::new(2, 1, 2).unwrap();
        let err = run_selection(&measure, &mut buffer, &mut stream, &config).unwrap_err();
        assert!(matches!(err, SelectionError::ZeroBaselineDiversity));
    }

    #[test]
    fn outcome_gain_matches_diversity_delta() {
        let measure = NumericDiversity::new();
        let mut buffer = MemoryBuffer::new(&measure, vec![1.0, 4.0, 9.0, 16.0]);
        let mut stream = [2.0, 3.0, 100.0, 5.0].iter().copied();
        let config = SelectionConfig::new(4, 2, 4).unwrap();
        let outcome = run_selection(&measure, &mut buffer, &mut stream, &config).unwrap();
        let delta = outcome.div_final - outcome.div0;
        assert!((delta - outcome.pdg).abs() <= 1e-9 * outcome.div_final.max(1e-3));
        assert_eq!(outcome.dir, outcome.pdg / outcome.div0);
    }

    #[test]
    fn dir_basic_values() {
        assert_eq!(dir(5.0, 10.0).unwrap(), 0.5);
        assert_eq!(dir(0.0, 7.0).unwrap(), 0.0);
        assert!(matches!(
            dir(1.0, 0.0),
            Err(SelectionError::ZeroBaselineDiversity)
        ));
    }

    #[test]
    fn negative_zero_and_zero_share_distinct_key() {
        assert_eq!((-0.0f64).distinct_key(), 0.0f64.distinct_key());
        assert_ne!(1.0f64.distinct_key(), 2.0f64.distinct_key());
    }
}
