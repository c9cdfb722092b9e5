//! Variance-based diversity for numeric streams.
//!
//! Diversity of a set is its population variance. Candidate gains are
//! evaluated from cached `sum` and `sum_sq` aggregates, so each hypothetical
//! swap costs O(1) and a full evaluation costs Theta(m).
//!
//! The `sum_sq - sum^2/m` form cancels catastrophically on near-constant
//! data, so reported diversity falls back to a centered two-pass computation
//! whenever the raw value is below `1e-8 * mean^2`, and negative results
//! within tolerance of zero are clamped.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::engine::{DiversityMeasure, PdgEvaluation};

/// Count of single-swap variance evaluations performed by
/// [`pdg_numeric`]. Instrumentation for cost accounting: one evaluation per
/// slot, so a call over an m-slot buffer adds exactly m.
static SWAP_EVALS: AtomicU64 = AtomicU64::new(0);

/// Total single-swap variance evaluations performed so far (process-wide).
pub fn swap_eval_count() -> u64 {
    SWAP_EVALS.load(Ordering::Relaxed)
}

/// Relative threshold below which the raw variance is considered cancelled.
const CANCELLATION_GUARD: f64 = 1e-8;
/// Negative variance within this absolute tolerance clamps to zero.
const NEGATIVE_CLAMP: f64 = 1e-12;

#[derive(Debug)]
pub enum NumericError {
    /// Variance of an empty set is undefined.
    EmptySet,
    /// Slot index past the end of the buffer.
    IndexOutOfRange { index: usize, len: usize },
}

impl fmt::Display for NumericError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptySet => write!(f, "variance of an empty set is undefined"),
            Self::IndexOutOfRange { index, len } => {
                write!(f, "slot index {index} out of range for {len} slots")
            }
        }
    }
}

impl std::error::Error for NumericError {}

/// Cached aggregates over the buffered values: `sum` and `sum_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericAggregates {
    sum: f64,
    sum_sq: f64,
}

impl NumericAggregates {
    pub fn from_slots(slots: &[f64]) -> Self {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for &v in slots {
            sum += v;
            sum_sq += v * v;
        }
        NumericAggregates { sum, sum_sq }
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }

    /// Population variance straight from the aggregates: `(sum_sq - sum^2/m)/m`.
    fn variance_raw(&self, m: usize) -> f64 {
        let mf = m as f64;
        (self.sum_sq - self.sum * self.sum / mf) / mf
    }

    /// Population variance with the cancellation guard. `slots` must be the
    /// values the aggregates were built from; they back the two-pass
    /// recomputation when the guard trips.
    pub fn variance(&self, slots: &[f64]) -> f64 {
        let m = slots.len();
        debug_assert!(m > 0);
        let raw = self.variance_raw(m);
        let mean = self.sum / m as f64;
        if raw.abs() < CANCELLATION_GUARD * mean * mean {
            return centered_variance(slots);
        }
        if raw < 0.0 {
            debug_assert!(raw > -NEGATIVE_CLAMP, "variance far below zero: {raw}");
            return 0.0;
        }
        raw
    }

    /// True when the aggregates match a fresh recomputation from `slots`
    /// within 1e-9 relative tolerance.
    pub fn consistent_with(&self, slots: &[f64]) -> bool {
        let fresh = NumericAggregates::from_slots(slots);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12);
        close(self.sum, fresh.sum) && close(self.sum_sq, fresh.sum_sq)
    }
}

/// Centered two-pass population variance; immune to the cancellation that
/// affects the aggregate form. Always non-negative.
fn centered_variance(slots: &[f64]) -> f64 {
    let m = slots.len() as f64;
    let mean = slots.iter().sum::<f64>() / m;
    slots.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / m
}

/// Population variance of a value set.
pub fn variance(values: &[f64]) -> Result<f64, NumericError> {
    if values.is_empty() {
        return Err(NumericError::EmptySet);
    }
    Ok(NumericAggregates::from_slots(values).variance(values))
}

/// Best single-swap variance gain for `candidate`, and the slot achieving
/// it (ties go to the lowest index).
///
/// Every hypothetical swap is evaluated in O(1) from aggregate deltas:
/// `new_sum = sum + (candidate - slot)` and
/// `new_sum_sq = sum_sq + (candidate^2 - slot^2)`. Swapping a value with
/// itself leaves both deltas exactly zero, so an identity swap always scores
/// exactly 0.0 and the returned gain is never negative for a candidate
/// already in the buffer.
pub fn pdg_numeric(agg: &NumericAggregates, slots: &[f64], candidate: f64) -> (f64, usize) {
    debug_assert!(!slots.is_empty());
    let m = slots.len();
    let old_var = agg.variance_raw(m);
    let mf = m as f64;
    let mut best_gain = f64::NEG_INFINITY;
    let mut best_slot = 0usize;
    for (j, &slot_value) in slots.iter().enumerate() {
        let new_sum = agg.sum + (candidate - slot_value);
        let new_sum_sq = agg.sum_sq + (candidate * candidate - slot_value * slot_value);
        let new_var = (new_sum_sq - new_sum * new_sum / mf) / mf;
        let gain = new_var - old_var;
        if gain > best_gain {
            best_gain = gain;
            best_slot = j;
        }
    }
    SWAP_EVALS.fetch_add(m as u64, Ordering::Relaxed);
    (best_gain, best_slot)
}

/// Replace `slots[slot]` with `candidate`, updating the aggregates by delta.
pub fn apply_swap_numeric(
    agg: &mut NumericAggregates,
    slots: &mut [f64],
    slot: usize,
    candidate: f64,
) -> Result<(), NumericError> {
    if slot >= slots.len() {
        return Err(NumericError::IndexOutOfRange {
            index: slot,
            len: slots.len(),
        });
    }
    let old = slots[slot];
    agg.sum += candidate - old;
    agg.sum_sq += candidate * candidate - old * old;
    slots[slot] = candidate;
    Ok(())
}

/// The variance diversity measure.
#[derive(Debug, Default, Clone, Copy)]
pub struct NumericDiversity;

impl NumericDiversity {
    pub fn new() -> Self {
        NumericDiversity
    }
}

impl DiversityMeasure for NumericDiversity {
    type Elem = f64;
    type Cache = NumericAggregates;
    type Detail = ();

    fn build_cache(&self, slots: &[f64]) -> NumericAggregates {
        NumericAggregates::from_slots(slots)
    }

    fn diversity(&self, cache: &NumericAggregates, slots: &[f64]) -> f64 {
        cache.variance(slots)
    }

    fn evaluate(&self, cache: &NumericAggregates, slots: &[f64], candidate: &f64) -> PdgEvaluation<()> {
        let (pdg, best_slot) = pdg_numeric(cache, slots, *candidate);
        PdgEvaluation {
            pdg,
            best_slot,
            detail: (),
        }
    }

    fn apply_swap(
        &self,
        cache: &mut NumericAggregates,
        slots: &mut [f64],
        slot: usize,
        candidate: f64,
        _detail: (),
    ) {
        apply_swap_numeric(cache, slots, slot, candidate)
            .expect("engine swaps at an evaluated slot index");
    }

    fn naive_diversity(&self, elems: &[f64]) -> f64 {
        centered_variance(elems)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn approx(a: f64, b: f64) {
        let tol = 1e-9 * a.abs().max(b.abs()).max(1e-3);
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn variance_of_constant_set_is_zero_within_tolerance() {
        for c in [0.0, 1.0, -3.5, 1e4] {
            let v = variance(&[c, c, c]).unwrap();
            assert!(v.abs() <= 1e-12 * c * c + 1e-12, "var({c},{c},{c}) = {v}");
        }
    }

    #[test]
    fn variance_hand_computed_values() {
        approx(variance(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), 2.0);
        approx(variance(&[0.0, 10.0]).unwrap(), 25.0);
    }

    #[test]
    fn variance_empty_set_errors() {
        assert!(matches!(variance(&[]), Err(NumericError::EmptySet)));
    }

    #[test]
    fn identity_swap_scores_exactly_zero() {
        let slots = [0.0, 10.0];
        let agg = NumericAggregates::from_slots(&slots);
        let (pdg, slot) = pdg_numeric(&agg, &slots, 10.0);
        assert_eq!(pdg, 0.0);
        // Replacing 0 would give gain -25; the identity swap at slot 1 wins.
        assert_eq!(slot, 1);
    }

    #[test]
    fn all_equal_slots_identity_candidate() {
        let slots = [5.0, 5.0, 5.0];
        let agg = NumericAggregates::from_slots(&slots);
        let (pdg, slot) = pdg_numeric(&agg, &slots, 5.0);
        assert_eq!(pdg, 0.0);
        assert_eq!(slot, 0);
    }

    #[test]
    fn apply_swap_updates_values_and_aggregates() {
        let mut slots = vec![0.0, 10.0];
        let mut agg = NumericAggregates::from_slots(&slots);
        apply_swap_numeric(&mut agg, &mut slots, 0, 20.0).unwrap();
        assert_eq!(slots, vec![20.0, 10.0]);
        approx(agg.variance(&slots), 25.0);
        assert!(agg.consistent_with(&slots));
    }

    #[test]
    fn apply_swap_same_value_leaves_aggregates_unchanged() {
        let mut slots = vec![3.0, 7.0, 9.0];
        let mut agg = NumericAggregates::from_slots(&slots);
        let before = agg;
        apply_swap_numeric(&mut agg, &mut slots, 1, 7.0).unwrap();
        assert_eq!(agg, before);
    }

    #[test]
    fn apply_swap_then_back_restores_aggregates() {
        let mut slots = vec![1.5, -2.25, 8.0];
        let mut agg = NumericAggregates::from_slots(&slots);
        let before = agg;
        apply_swap_numeric(&mut agg, &mut slots, 2, -4.0).unwrap();
        apply_swap_numeric(&mut agg, &mut slots, 2, 8.0).unwrap();
        assert!((agg.sum() - before.sum()).abs() <= 1e-12 * before.sum().abs().max(1.0));
        assert!((agg.sum_sq() - before.sum_sq()).abs() <= 1e-12 * before.sum_sq().abs().max(1.0));
    }

    #[test]
    fn apply_swap_rejects_out_of_range_slot() {
        let mut slots = vec![1.0, 2.0];
        let mut agg = NumericAggregates::from_slots(&slots);
        assert!(matches!(
            apply_swap_numeric(&mut agg, &mut slots, 2, 5.0),
            Err(NumericError::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn incremental_gain_matches_full_recomputation() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..2000 {
            let m = rng.gen_range(2..=16);
            let slots: Vec<f64> = (0..m).map(|_| rng.gen_range(-1000.0..1000.0)).collect();
            let candidate = rng.gen_range(-1000.0..1000.0);
            let agg = NumericAggregates::from_slots(&slots);
            let (pdg, slot) = pdg_numeric(&agg, &slots, candidate);

            let base = centered_variance(&slots);
            let mut best_gain = f64::NEG_INFINITY;
            let mut best_slot = 0;
            for j in 0..m {
                let mut swapped = slots.clone();
                swapped[j] = candidate;
                let gain = centered_variance(&swapped) - base;
                if gain > best_gain {
                    best_gain = gain;
                    best_slot = j;
                }
            }
            let tol = 1e-9 * base.max(best_gain.abs()).max(1e-3);
            assert!((pdg - best_gain).abs() <= tol, "{pdg} vs {best_gain}");
            assert_eq!(slot, best_slot);
        }
    }

    #[test]
    fn swap_eval_counter_grows_linearly_in_m() {
        for m in [2usize, 5, 16] {
            let slots: Vec<f64> = (0..m).map(|i| i as f64).collect();
            let agg = NumericAggregates::from_slots(&slots);
            let before = swap_eval_count();
            pdg_numeric(&agg, &slots, 0.5);
            assert_eq!(swap_eval_count() - before, m as u64);
        }
    }

    #[test]
    fn translation_leaves_variance_unchanged() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..500 {
            let m = rng.gen_range(2..=12);
            let values: Vec<f64> = (0..m).map(|_| rng.gen_range(-100.0..100.0)).collect();
            let shift = rng.gen_range(-1e4..1e4);
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            let v0 = variance(&values).unwrap();
            let v1 = variance(&shifted).unwrap();
            let tol = 1e-6 * v0.max(1.0);
            assert!((v0 - v1).abs() <= tol, "var {v0} vs shifted {v1}");
            assert!(v1 >= 0.0);
        }
    }
}
