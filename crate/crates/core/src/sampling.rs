//! Segment sampling and the analytical guarantees of the stopping rule.
//!
//! A dataset of `total` elements is partitioned into fixed-size segments and
//! `s` of them are drawn uniformly without replacement; each sampled segment
//! hosts one independent selection experiment.
//!
//! The stopping rule itself is the classic observe-then-leap policy: scan
//! `k` of `n` candidates, then accept the first that beats the scanned
//! maximum. Its success probability (picking the global best) is exactly
//! `(k/n) * sum_{i=k}^{n-1} 1/i`, sandwiched by the integral bounds
//! `(k/n) ln(n/k)` and `(k/n) ln((n-1)/(k-1))`, and maximized near
//! `k = n/e` where it approaches `1/e`. A Chernoff-style bound
//! `p0 = 2 exp(-delta^2 s / (3e))` controls how far the aggregate success
//! count over `s` sampled experiments can stray from its expectation.
//! [`monte_carlo_success`] validates all of this empirically.

use std::fmt;
use std::ops::Range;

use rand::rngs::SmallRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingError {
    /// Need `1 <= k < n`.
    InvalidKN { n: usize, k: usize },
    /// Need `n >= 3` for the optimal scan length search.
    InvalidN { n: usize },
    /// Deviation factor must lie strictly between 0 and 1.
    DeltaOutOfRange { delta: f64 },
    /// Segments must have at least one element.
    ZeroSegmentSize,
    /// More segments requested than the partition provides.
    TooManySegmentsRequested { requested: usize, available: usize },
    /// At least one Monte Carlo trial is required.
    ZeroTrials,
}

impl fmt::Display for SamplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidKN { n, k } => write!(f, "need 1 <= k < n, got k={k}, n={n}"),
            Self::InvalidN { n } => write!(f, "need n >= 3, got n={n}"),
            Self::DeltaOutOfRange { delta } => {
                write!(f, "delta must lie in (0, 1), got {delta}")
            }
            Self::ZeroSegmentSize => write!(f, "segment size must be at least 1"),
            Self::TooManySegmentsRequested {
                requested,
                available,
            } => write!(
                f,
                "requested {requested} segments but the partition has only {available}"
            ),
            Self::ZeroTrials => write!(f, "at least one trial is required"),
        }
    }
}

impl std::error::Error for SamplingError {}

/// Parameters of one segment-sampling pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    /// Elements per segment.
    pub segment_size: usize,
    /// Number of segments to draw, without replacement.
    pub segments: usize,
    /// Total dataset size.
    pub total: usize,
    /// RNG seed; the same seed always draws the same segments.
    pub seed: u64,
}

/// The analytical bounds for one `(n, k, delta, s)` configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub n: usize,
    pub k: usize,
    /// Lower bound on the success probability of the stopping rule.
    pub pr_lower: f64,
    /// Upper bound on the success probability.
    pub pr_upper: f64,
    /// Scan length maximizing the lower bound.
    pub k_opt: usize,
    /// The maximized lower bound; approaches 1/e for large n.
    pub h_max: f64,
    /// Chernoff-style deviation bound for `s` sampled experiments.
    pub p0: f64,
    pub delta: f64,
    pub samples: usize,
}

/// Empirical success estimate from repeated simulated runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    /// Fraction of trials in which the stopping rule chose the global best.
    pub success_rate: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub ci_half_width: f64,
}

/// Partition `total` elements into contiguous segments of exactly `a`
/// elements. Trailing remainder elements are discarded.
pub fn segment_partition(total: usize, a: usize) -> Result<Vec<Range<usize>>, SamplingError> {
    if a == 0 {
        return Err(SamplingError::ZeroSegmentSize);
    }
    Ok((0..total / a).map(|i| i * a..(i + 1) * a).collect())
}

/// Draw `plan.segments` segment indices uniformly without replacement,
/// deterministically for a given seed, returned in ascending order.
pub fn select_segments(plan: &SamplingPlan) -> Result<Vec<usize>, SamplingError> {
    if plan.segment_size == 0 {
        return Err(SamplingError::ZeroSegmentSize);
    }
    let available = plan.total / plan.segment_size;
    if plan.segments > available {
        return Err(SamplingError::TooManySegmentsRequested {
            requested: plan.segments,
            available,
        });
    }
    let mut rng = SmallRng::seed_from_u64(plan.seed);
    let mut indices: Vec<usize> = (0..available).collect();
    indices.shuffle(&mut rng);
    let mut chosen: Vec<usize> = indices.into_iter().take(plan.segments).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// The exact success probability of the stopping rule:
/// `(k/n) * sum_{i=k}^{n-1} 1/i`.
///
/// This harmonic sum is the reference the closed-form bounds and the Monte
/// Carlo estimates are checked against.
pub fn exact_success_probability(n: usize, k: usize) -> Result<f64, SamplingError> {
    if k < 1 || k >= n {
        return Err(SamplingError::InvalidKN { n, k });
    }
    let sum: f64 = (k..n).map(|i| 1.0 / i as f64).sum();
    Ok(k as f64 / n as f64 * sum)
}

fn h(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    kf / nf * (nf.ln() - kf.ln())
}

/// Lower and upper bounds on the success probability:
/// `(k/n) ln(n/k) <= Pr <= (k/n) ln((n-1)/(k-1))`, clamped to [0, 1].
///
/// The upper bound's integral derivation needs `k >= 2`; for `k = 1` both
/// bounds collapse to the exact harmonic sum.
pub fn secretary_bounds(n: usize, k: usize) -> Result<(f64, f64), SamplingError> {
    if k < 1 || k >= n {
        return Err(SamplingError::InvalidKN { n, k });
    }
    if k == 1 {
        let exact = exact_success_probability(n, k)?;
        return Ok((exact, exact));
    }
    let lower = h(n, k).clamp(0.0, 1.0);
    let upper = (k as f64 / n as f64 * (((n - 1) as f64).ln() - ((k - 1) as f64).ln()))
        .clamp(0.0, 1.0);
    Ok((lower, upper))
}

/// The integer scan length maximizing `h(k) = (k/n)(ln n - ln k)`, with the
/// maximized value. `h` is strictly concave in `k`, so the integer argmax is
/// one of the two integers bracketing `n/e`; ties go to the smaller `k`.
/// `h_max` approaches `1/e` as `n` grows.
pub fn optimal_k(n: usize) -> Result<(usize, f64), SamplingError> {
    if n < 3 {
        return Err(SamplingError::InvalidN { n });
    }
    let continuous = n as f64 / std::f64::consts::E;
    let floor = (continuous.floor() as usize).clamp(1, n - 1);
    let ceil = (floor + 1).clamp(1, n - 1);
    let mut best = (floor, h(n, floor));
    if ceil != floor && h(n, ceil) > best.1 {
        best = (ceil, h(n, ceil));
    }
    Ok(best)
}

/// Chernoff-style deviation bound `2 exp(-delta^2 * n_samples / (3e))`: an
/// upper bound on the probability that the aggregate success count over
/// `n_samples` independent experiments deviates from its expectation by a
/// factor of `delta`.
pub fn chernoff_p0(delta: f64, n_samples: usize) -> Result<f64, SamplingError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SamplingError::DeltaOutOfRange { delta });
    }
    if n_samples < 1 {
        return Err(SamplingError::ZeroTrials);
    }
    let exponent = -(delta * delta) * n_samples as f64 / (3.0 * std::f64::consts::E);
    Ok(2.0 * exponent.exp())
}

/// Assemble the full analytical report for one configuration.
pub fn bounds_report(
    n: usize,
    k: usize,
    delta: f64,
    samples: usize,
) -> Result<BoundsReport, SamplingError> {
    let (pr_lower, pr_upper) = secretary_bounds(n, k)?;
    let (k_opt, h_max) = optimal_k(n)?;
    let p0 = chernoff_p0(delta, samples)?;
    Ok(BoundsReport {
        n,
        k,
        pr_lower,
        pr_upper,
        k_opt,
        h_max,
        p0,
        delta,
        samples,
    })
}

/// Trials per sub-seeded worker chunk. Fixed so the trial-to-seed mapping
/// never depends on scheduling; the per-chunk counts sum order-independently.
const TRIAL_CHUNK: usize = 16_384;

/// Estimate the stopping rule's success probability by simulation.
///
/// Each trial draws a uniform random permutation of `n` distinct scores,
/// scans the first `k`, then accepts the first later score exceeding the
/// scanned maximum (or the last score when none does). Success means the
/// accepted score is the global maximum. Chunk `i` of trials runs on its own
/// generator seeded with `seed + i`.
pub fn monte_carlo_success(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloReport, SamplingError> {
    if k < 1 || k >= n {
        return Err(SamplingError::InvalidKN { n, k });
    }
    if trials == 0 {
        return Err(SamplingError::ZeroTrials);
    }

    let mut successes = 0u64;
    let mut remaining = trials;
    let mut chunk_index = 0u64;
    let mut scores: Vec<u32> = (0..n as u32).collect();
    while remaining > 0 {
        let chunk = remaining.min(TRIAL_CHUNK);
        let mut rng = SmallRng::seed_from_u64(seed.wrapping_add(chunk_index));
        for _ in 0..chunk {
            scores.shuffle(&mut rng);
            if simulate_stop(&scores, k) {
                successes += 1;
            }
        }
        remaining -= chunk;
        chunk_index += 1;
    }

    let rate = successes as f64 / trials as f64;
    let ci = 1.96 * (rate * (1.0 - rate) / trials as f64).sqrt();
    Ok(MonteCarloReport {
        n,
        k,
        trials,
        success_rate: rate,
        ci_half_width: ci,
    })
}

/// One run of the stopping rule over a score sequence; true when the chosen
/// index holds the global maximum.
fn simulate_stop(scores: &[u32], k: usize) -> bool {
    let n = scores.len();
    let scan_max = scores[..k].iter().copied().max().expect("k >= 1");
    let chosen = scores[k..]
        .iter()
        .position(|&v| v > scan_max)
        .map(|offset| k + offset)
        .unwrap_or(n - 1);
    scores[chosen] == n as u32 - 1
}
