//! Segment-sampled selection experiments and their CSV records.
//!
//! A run partitions the dataset into segments of `a` elements, draws `s` of
//! them without replacement, and performs one independent selection per
//! sampled segment: the first `m` distinct elements initialize the buffer,
//! the remaining segment elements form the selection stream (`k` of them
//! scanned, the realized stream length reported per record). Parameter
//! sweeps repeat the whole pass varying exactly one parameter.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::dataset::DataError;
use crate::engine::{
    initialize_memory, run_selection, DiversityMeasure, SelectionConfig, SelectionError,
};
use crate::oracle::{brute_force_best_swap, OracleError};
use crate::sampling::{select_segments, SamplingError, SamplingPlan};

/// Element kind of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Numeric,
    String,
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataKind::Numeric => write!(f, "numeric"),
            DataKind::String => write!(f, "string"),
        }
    }
}

impl FromStr for DataKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "numeric" => Ok(DataKind::Numeric),
            "string" => Ok(DataKind::String),
            other => Err(format!("unknown kind {other:?}; use numeric or string")),
        }
    }
}

#[derive(Debug)]
pub enum ExperimentError {
    /// Invalid parameter combination; the message says what to fix.
    Config(String),
    Data(DataError),
    Selection(SelectionError),
    Oracle(OracleError),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "configuration error: {msg}"),
            Self::Data(e) => write!(f, "data error: {e}"),
            Self::Selection(e) => write!(f, "selection error: {e}"),
            Self::Oracle(e) => write!(f, "oracle error: {e}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<DataError> for ExperimentError {
    fn from(e: DataError) -> Self {
        ExperimentError::Data(e)
    }
}

impl From<SelectionError> for ExperimentError {
    fn from(e: SelectionError) -> Self {
        ExperimentError::Selection(e)
    }
}

impl From<OracleError> for ExperimentError {
    fn from(e: OracleError) -> Self {
        ExperimentError::Oracle(e)
    }
}

impl From<SamplingError> for ExperimentError {
    fn from(e: SamplingError) -> Self {
        ExperimentError::Config(e.to_string())
    }
}

/// Parameters of one experiment pass (one sweep point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub m: usize,
    pub k: usize,
    /// Segment size.
    pub a: usize,
    /// Segments to sample.
    pub s: usize,
    /// Deviation factor; metadata echoed into records. Together with `s` it
    /// determines the deviation bound `p0`.
    pub delta: f64,
    pub seed: u64,
    /// Label each record with the brute-force oracle's verdict.
    pub verify: bool,
    /// Skip a forced final replacement that would not improve diversity.
    pub skip_nonimproving_final: bool,
}

impl RunParams {
    /// Check the parameter combination against a dataset of `total` elements.
    pub fn validate(&self, total: usize) -> Result<(), ExperimentError> {
        if self.m < 2 {
            return Err(ExperimentError::Config(format!(
                "memory size m={} must be at least 2",
                self.m
            )));
        }
        if self.k < 1 {
            return Err(ExperimentError::Config("scan length k must be at least 1".into()));
        }
        if self.s < 1 {
            return Err(ExperimentError::Config("segment count s must be at least 1".into()));
        }
        if self.a < self.m + self.k + 1 {
            return Err(ExperimentError::Config(format!(
                "segment size a={} is too small: initialization needs m={} distinct elements \
                 and the remaining stream must be longer than k={}; use a >= {}",
                self.a,
                self.m,
                self.k,
                self.m + self.k + 1
            )));
        }
        let segments = total / self.a;
        if self.s > segments {
            return Err(ExperimentError::Config(format!(
                "requested s={} segments but {} elements split into {} segments of a={}",
                self.s, total, segments, self.a
            )));
        }
        Ok(())
    }
}

/// One CSV row: the configuration, the selection outcome, the optional
/// oracle verdict and the selection-loop runtime.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub run_id: usize,
    pub kind: DataKind,
    pub m: usize,
    pub k: usize,
    /// Realized stream length in this segment (segment size minus elements
    /// consumed by initialization).
    pub n: usize,
    pub a: usize,
    pub s: usize,
    pub delta: f64,
    pub seed: u64,
    pub segment_id: usize,
    pub selected_position: usize,
    /// Empty in CSV when a non-improving forced final was skipped.
    pub evicted_slot: Option<usize>,
    pub pdg: f64,
    pub div0: f64,
    pub dir: f64,
    pub forced_final: bool,
    /// Empty in CSV when verification was off.
    pub success_vs_oracle: Option<bool>,
    pub runtime_us: u128,
}

/// CSV header; field order is part of the output contract.
pub const CSV_HEADER: &str = "run_id,kind,m,k,n,a,s,delta,seed,segment_id,selected_position,\
                              evicted_slot,pdg,div0,dir,forced_final,success_vs_oracle,runtime_us";

/// Quote a field per RFC 4180 when it contains a comma, quote or newline.
fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

impl ExperimentRecord {
    pub fn csv_row(&self) -> String {
        let evicted = self
            .evicted_slot
            .map(|s| s.to_string())
            .unwrap_or_default();
        let success = self
            .success_vs_oracle
            .map(|s| u8::from(s).to_string())
            .unwrap_or_default();
        [
            self.run_id.to_string(),
            csv_field(&self.kind.to_string()),
            self.m.to_string(),
            self.k.to_string(),
            self.n.to_string(),
            self.a.to_string(),
            self.s.to_string(),
            self.delta.to_string(),
            self.seed.to_string(),
            self.segment_id.to_string(),
            self.selected_position.to_string(),
            evicted,
            self.pdg.to_string(),
            self.div0.to_string(),
            self.dir.to_string(),
            u8::from(self.forced_final).to_string(),
            success,
            self.runtime_us.to_string(),
        ]
        .join(",")
    }
}

/// Write the header and one line per record.
pub fn write_csv<W: Write>(out: &mut W, records: &[ExperimentRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for record in records {
        writeln!(out, "{}", record.csv_row())?;
    }
    Ok(())
}

/// Run one experiment pass: sample `params.s` segments from a dataset of
/// `total` elements and perform one selection per segment. Records come
/// back ordered by segment id.
///
/// The source is consumed lazily exactly once; unsampled segments are
/// skipped over and only the current segment is buffered.
pub fn run_experiment<M, I>(
    measure: &M,
    kind: DataKind,
    params: &RunParams,
    run_id: usize,
    total: usize,
    source: I,
) -> Result<Vec<ExperimentRecord>, ExperimentError>
where
    M: DiversityMeasure,
    I: Iterator<Item = Result<M::Elem, DataError>>,
{
    params.validate(total)?;
    let plan = SamplingPlan {
        segment_size: params.a,
        segments: params.s,
        total,
        seed: params.seed,
    };
    let segment_ids = select_segments(&plan)?;

    let mut source = source;
    let mut cursor = 0usize;
    let mut records = Vec::with_capacity(segment_ids.len());
    for &segment_id in &segment_ids {
        let start = segment_id * params.a;
        while cursor < start {
            match source.next() {
                Some(item) => {
                    item?;
                    cursor += 1;
                }
                None => {
                    return Err(ExperimentError::Config(format!(
                        "dataset ended at element {cursor}, expected {total}"
                    )))
                }
            }
        }
        let mut segment: Vec<M::Elem> = Vec::with_capacity(params.a);
        for _ in 0..params.a {
            match source.next() {
                Some(item) => segment.push(item?),
                None => {
                    return Err(ExperimentError::Config(format!(
                        "dataset ended inside segment {segment_id}, expected {total} elements"
                    )))
                }
            }
        }
        cursor += params.a;
        records.push(run_segment(
            measure, kind, params, run_id, segment_id, segment,
        )?);
    }
    Ok(records)
}

fn run_segment<M: DiversityMeasure>(
    measure: &M,
    kind: DataKind,
    params: &RunParams,
    run_id: usize,
    segment_id: usize,
    segment: Vec<M::Elem>,
) -> Result<ExperimentRecord, ExperimentError> {
    let mut stream = segment.into_iter();
    let mut buffer = initialize_memory(measure, &mut stream, params.m).map_err(|e| match e {
        SelectionError::StreamExhausted { needed, got } => ExperimentError::Config(format!(
            "segment {segment_id} holds only {got} distinct elements, \
             initialization needs m={needed}"
        )),
        other => ExperimentError::Selection(other),
    })?;
    let n = stream.len();
    if n <= params.k {
        return Err(ExperimentError::Config(format!(
            "segment {segment_id}: initialization left n={n} stream elements, \
             which does not exceed k={}; increase a or decrease k",
            params.k
        )));
    }
    let initial_slots = params.verify.then(|| buffer.slots().to_vec());
    let config = SelectionConfig::new(params.m, params.k, n)?
        .with_skip_nonimproving_final(params.skip_nonimproving_final);

    let (outcome, success) = if let Some(initial) = initial_slots {
        let window: Vec<M::Elem> = stream.collect();
        let mut window_stream = window.iter().cloned();
        let outcome = run_selection(measure, &mut buffer, &mut window_stream, &config)?;
        let verdict = brute_force_best_swap(measure, &window, &initial, &outcome)?;
        (outcome, Some(verdict.algorithm_succeeded))
    } else {
        let outcome = run_selection(measure, &mut buffer, &mut stream, &config)?;
        (outcome, None)
    };

    Ok(ExperimentRecord {
        run_id,
        kind,
        m: params.m,
        k: params.k,
        n,
        a: params.a,
        s: params.s,
        delta: params.delta,
        seed: params.seed,
        segment_id,
        selected_position: outcome.selected_position,
        evicted_slot: outcome.evicted_slot,
        pdg: outcome.pdg,
        div0: outcome.div0,
        dir: outcome.dir,
        forced_final: outcome.forced_final,
        success_vs_oracle: success,
        runtime_us: outcome.wall_time.as_micros(),
    })
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    M,
    K,
    A,
    S,
    Delta,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SweepParam::M => "m",
            SweepParam::K => "k",
            SweepParam::A => "a",
            SweepParam::S => "s",
            SweepParam::Delta => "delta",
        };
        write!(f, "{name}")
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "m" => Ok(SweepParam::M),
            "k" => Ok(SweepParam::K),
            "a" => Ok(SweepParam::A),
            "s" => Ok(SweepParam::S),
            "delta" => Ok(SweepParam::Delta),
            other => Err(format!(
                "unknown sweep parameter {other:?}; use m, k, a, s or delta"
            )),
        }
    }
}

/// An inclusive `PARAM=START:STEP:END` sweep over one parameter; all other
/// parameters stay fixed across the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub step: f64,
    pub end: f64,
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (param, range) = s
            .split_once('=')
            .ok_or_else(|| format!("sweep spec {s:?} must look like PARAM=START:STEP:END"))?;
        let param: SweepParam = param.trim().parse()?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("sweep range {range:?} must be START:STEP:END"));
        }
        let parse = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse {p:?} as a number"))
        };
        let (start, step, end) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0) {
            return Err("sweep step must be positive".into());
        }
        if end < start {
            return Err("sweep end must not precede start".into());
        }
        Ok(SweepSpec {
            param,
            start,
            step,
            end,
        })
    }
}

impl SweepSpec {
    /// The swept values: `start, start+step, ...` up to and including `end`
    /// (within a small tolerance for fractional steps).
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }

    /// Apply one swept value to the parameter set.
    pub fn apply(&self, params: &mut RunParams, value: f64) -> Result<(), ExperimentError> {
        let as_count = |value: f64, name: &str| -> Result<usize, ExperimentError> {
            if value < 1.0 || (value - value.round()).abs() > 1e-9 {
                return Err(ExperimentError::Config(format!(
                    "swept value {value} is not a positive integer for parameter {name}"
                )));
            }
            Ok(value.round() as usize)
        };
        match self.param {
            SweepParam::M => params.m = as_count(value, "m")?,
            SweepParam::K => params.k = as_count(value, "k")?,
            SweepParam::A => params.a = as_count(value, "a")?,
            SweepParam::S => params.s = as_count(value, "s")?,
            SweepParam::Delta => params.delta = value,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::NumericDiversity;

    fn base_params() -> RunParams {
        RunParams {
            m: 3,
            k: 2,
            a: 10,
            s: 2,
            delta: 0.2,
            seed: 5,
            verify: false,
            skip_nonimproving_final: false,
        }
    }

    fn numeric_source(total: usize, seed: u64) -> impl Iterator<Item = Result<f64, DataError>> {
        crate::dataset::generate_numeric(total, seed).map(Ok)
    }

    #[test]
    fn run_produces_one_record_per_segment() {
        let measure = NumericDiversity::new();
        let params = base_params();
        let records = run_experiment(
            &measure,
            DataKind::Numeric,
            &params,
            0,
            100,
            numeric_source(100, 1),
        )
        .unwrap();
        assert_eq!(records.len(), 2);
        assert!(records.windows(2).all(|w| w[0].segment_id < w[1].segment_id));
        for r in &records {
            assert_eq!(r.kind, DataKind::Numeric);
            assert_eq!(r.n, 10 - params.m); // continuous data has no duplicates
            assert!(r.selected_position > params.k);
            assert!(r.success_vs_oracle.is_none());
            let expected_dir = r.pdg / r.div0;
            assert!((r.dir - expected_dir).abs() <= 1e-9 * expected_dir.abs().max(1e-12));
        }
    }

    #[test]
    fn run_is_deterministic_per_seed() {
        let measure = NumericDiversity::new();
        let params = base_params();
        let a = run_experiment(
            &measure,
            DataKind::Numeric,
            &params,
            0,
            200,
            numeric_source(200, 2),
        )
        .unwrap();
        let b = run_experiment(
            &measure,
            DataKind::Numeric,
            &params,
            0,
            200,
            numeric_source(200, 2),
        )
        .unwrap();
        // Timing jitters; everything else must match.
        for (x, y) in a.iter().zip(b.iter()) {
            let mut y = y.clone();
            y.runtime_us = x.runtime_us;
            assert_eq!(*x, y);
        }
    }

    #[test]
    fn verify_fills_success_column() {
        let measure = NumericDiversity::new();
        let params = RunParams {
            verify: true,
            ..base_params()
        };
        let records = run_experiment(
            &measure,
            DataKind::Numeric,
            &params,
            0,
            100,
            numeric_source(100, 3),
        )
        .unwrap();
        assert!(records.iter().all(|r| r.success_vs_oracle.is_some()));
    }

    #[test]
    fn config_validation_messages() {
        let total = 100;
        let bad_a = RunParams {
            a: 5,
            ..base_params()
        };
        assert!(matches!(
            bad_a.validate(total),
            Err(ExperimentError::Config(_))
        ));
        let bad_s = RunParams {
            s: 50,
            ..base_params()
        };
        let err = bad_s.validate(total).unwrap_err();
        assert!(err.to_string().contains("s=50"));
        let bad_m = RunParams {
            m: 1,
            ..base_params()
        };
        assert!(bad_m.validate(total).is_err());
    }

    #[test]
    fn csv_rows_match_header_arity() {
        let measure = NumericDiversity::new();
        let params = base_params();
        let records = run_experiment(
            &measure,
            DataKind::Numeric,
            &params,
            0,
            100,
            numeric_source(100, 4),
        )
        .unwrap();
        let mut out = Vec::new();
        write_csv(&mut out, &records).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, CSV_HEADER);
        let columns = header.split(',').count();
        for line in lines {
            assert_eq!(line.split(',').count(), columns, "bad row: {line}");
        }
    }

    #[test]
    fn csv_quoting_only_when_needed() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("with,comma"), "\"with,comma\"");
        assert_eq!(csv_field("with\"quote"), "\"with\"\"quote\"");
    }

    #[test]
    fn sweep_spec_parsing_and_values() {
        let spec: SweepSpec = "m=2:2:8".parse().unwrap();
        assert_eq!(spec.param, SweepParam::M);
        assert_eq!(spec.values(), vec![2.0, 4.0, 6.0, 8.0]);

        let spec: SweepSpec = "delta=0.2:0.3:0.8".parse().unwrap();
        let values = spec.values();
        assert_eq!(values.len(), 3);
        assert!((values[2] - 0.8).abs() < 1e-9);

        assert!("m=1:0:5".parse::<SweepSpec>().is_err());
        assert!("q=1:1:5".parse::<SweepSpec>().is_err());
        assert!("m=5:1:1".parse::<SweepSpec>().is_err());
        assert!("m=nonsense".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn sweep_apply_rejects_fractional_counts() {
        let spec: SweepSpec = "k=1.5:1:3.5".parse().unwrap();
        let mut params = base_params();
        assert!(spec.apply(&mut params, 1.5).is_err());
        let spec: SweepSpec = "delta=0.1:0.1:0.3".parse().unwrap();
        assert!(spec.apply(&mut params, 0.2).is_ok());
        assert!((params.delta - 0.2).abs() < 1e-12);
    }

    #[test]
    fn skipped_final_leaves_blank_eviction_in_csv() {
        let record = ExperimentRecord {
            run_id: 0,
            kind: DataKind::String,
            m: 2,
            k: 1,
            n: 3,
            a: 6,
            s: 1,
            delta: 0.2,
            seed: 0,
            segment_id: 0,
            selected_position: 3,
            evicted_slot: None,
            pdg: 0.0,
            div0: 4.0,
            dir: 0.0,
            forced_final: true,
            success_vs_oracle: None,
            runtime_us: 12,
        };
        let row = record.csv_row();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[11], "");
        assert_eq!(fields[16], "");
        assert_eq!(fields[15], "1");
    }
}
