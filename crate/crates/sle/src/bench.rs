//! Timing harness and parameter sweeps.
//!
//! The observable throughout is wall-clock time per computed trace point:
//! driving-sample and map generation happen outside the timed region (both
//! algorithms consume identical maps), which then covers block construction,
//! when the fast algorithm is selected, plus every point evaluation. Sweeps
//! vary one parameter at a time and attach the mean distance to a same-seed
//! baseline trace as the error column, so the time/accuracy trade-offs can
//! be read off one table. Slope fits condense timing tables into the scaling
//! exponents the whole exercise is about.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::blocks;
use crate::error::{Error, Result};
use crate::trace::{self, Algorithm, RunSpec, TraceResult};

/// Timing repetitions per row when the caller does not choose; the median
/// over these suppresses scheduler noise.
pub const DEFAULT_REPETITIONS: usize = 5;

/// The parameter a sweep varies, one row per value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Trace length. The stride scales along with it so the number of
    /// computed points stays fixed, keeping rows comparable per point.
    NSteps,
    /// Maps per block.
    BlockLen,
    /// Truncation order of the block series.
    Order,
    /// Series gate factor.
    Threshold,
}

/// One measured sweep row: the exact spec it ran, how many repetitions the
/// timing median covers, the seconds per point, and the mean distance to the
/// same-seed baseline trace (absent when the row itself is a baseline run).
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub spec: RunSpec,
    pub samples: usize,
    pub time_per_point: f64,
    pub error: Option<f64>,
}

/// Median wall-clock seconds per computed trace point, over `reps` runs.
///
/// Timing is strictly serial on the calling thread. The rows of a scaling
/// study are only comparable if each one measures the same thing, so the
/// timed region is pinned: block construction (fast algorithm only) and all
/// point evaluations are inside, everything else outside.
pub fn time_per_point(spec: &RunSpec, reps: usize) -> Result<f64> {
    spec.validate()?;
    if reps == 0 {
        return Err(Error::invalid("timing needs at least one repetition"));
    }
    let maps = trace::build_maps(spec)?;
    let indices = trace::trace_indices(spec.n_steps, spec.stride)?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let elapsed = match spec.algorithm {
            Algorithm::Baseline => {
                let t0 = Instant::now();
                let result = trace::compute_trace_baseline(&maps, &indices, spec)?;
                let dt = t0.elapsed();
                std::hint::black_box(result.points().len());
                dt
            }
            Algorithm::Fast => {
                let t0 = Instant::now();
                let blocks = blocks::build_blocks(
                    &maps,
                    spec.resolved_block_len(),
                    spec.resolved_order(),
                )?;
                let result = trace::compute_trace_fast(
                    &maps,
                    &blocks,
                    &indices,
                    spec.resolved_threshold(),
                    spec,
                )?;
                let dt = t0.elapsed();
                std::hint::black_box(result.points().len());
                dt
            }
        };
        times.push(elapsed.as_secs_f64());
    }
    times.sort_by(f64::total_cmp);
    let median = if reps % 2 == 1 {
        times[reps / 2]
    } else {
        0.5 * (times[reps / 2 - 1] + times[reps / 2])
    };
    Ok(median / indices.len() as f64)
}

/// Copies `base` with `axis` set to `value`, scaling the stride along the
/// trace-length axis so the point count is preserved.
pub fn spec_for_value(base: &RunSpec, axis: SweepAxis, value: f64) -> Result<RunSpec> {
    let mut spec = base.clone();
    match axis {
        SweepAxis::NSteps => {
            let n = positive_integer(value, "trace length")?;
            // Keep points-per-trace fixed: stride scales proportionally.
            let scaled = (n as f64 * base.stride as f64 / base.n_steps as f64).round();
            spec.n_steps = n;
            spec.stride = (scaled as usize).clamp(1, n);
        }
        SweepAxis::BlockLen => spec.block_len = Some(positive_integer(value, "block length")?),
        SweepAxis::Order => spec.order = Some(positive_integer(value, "series order")?),
        SweepAxis::Threshold => spec.threshold = Some(value),
    }
    spec.validate()?;
    Ok(spec)
}

fn positive_integer(value: f64, what: &str) -> Result<usize> {
    if !(value.is_finite() && value > 0.0 && value.fract() == 0.0 && value <= 1e15) {
        return Err(Error::invalid(format!(
            "{what} must be a positive integer, got {value}"
        )));
    }
    Ok(value as usize)
}

/// Runs one timed row per axis value. Fast rows also run the baseline
/// algorithm on the same seed (untimed) and record the mean point distance
/// in the error column.
///
/// The baseline trace is reused across rows whenever the row spec leaves it
/// unchanged, which is every axis except the trace length. Timing rows stay
/// serial; reruns with the same base spec reproduce the error column
/// bit for bit.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &RunSpec,
    reps: usize,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid("sweep needs at least one axis value"));
    }
    let mut rows = Vec::with_capacity(values.len());
    let mut cached: Option<TraceResult> = None;
    for &value in values {
        let spec = spec_for_value(base, axis, value)?;
        let time = time_per_point(&spec, reps)?;
        let error = match spec.algorithm {
            Algorithm::Baseline => None,
            Algorithm::Fast => {
                let mut reference = spec.clone();
                reference.algorithm = Algorithm::Baseline;
                let fresh = match &cached {
                    // Within one sweep only the length axis can move the
                    // baseline trace; everything else it depends on is fixed
                    // by `base`.
                    Some(prev)
                        if prev.spec().n_steps == reference.n_steps
                            && prev.spec().stride == reference.stride =>
                    {
                        None
                    }
                    _ => Some(trace::run(&reference)?),
                };
                if let Some(t) = fresh {
                    cached = Some(t);
                }
                let baseline = cached.as_ref().expect("baseline populated above");
                let fast = trace::run(&spec)?;
                Some(trace::error_between(&fast, baseline)?)
            }
        };
        rows.push(SweepRow { spec, samples: reps, time_per_point: time, error });
    }
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| {
            if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
                Ok((x.ln(), y.ln()))
            } else {
                Err(Error::invalid(format!(
                    "slope fit needs positive finite data, got ({x}, {y})"
                )))
            }
        })
        .collect::<Result<_>>()?;
    fit_slope(&logs)
}

/// Least-squares slope of `ln y` against plain `x`; the natural fit when an
/// error decays geometrically in an integer parameter.
pub fn semilog_slope(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| {
            if y > 0.0 && x.is_finite() && y.is_finite() {
                Ok((x, y.ln()))
            } else {
                Err(Error::invalid(format!(
                    "slope fit needs positive finite values, got ({x}, {y})"
                )))
            }
        })
        .collect::<Result<_>>()?;
    fit_slope(&logs)
}

fn fit_slope(xy: &[(f64, f64)]) -> Result<f64> {
    if xy.len() < 3 {
        return Err(Error::invalid("slope fit needs at least three points"));
    }
    let n = xy.len() as f64;
    let mean_x = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in xy {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    if den == 0.0 {
        return Err(Error::invalid("slope fit needs at least two distinct abscissae"));
    }
    Ok(num / den)
}
