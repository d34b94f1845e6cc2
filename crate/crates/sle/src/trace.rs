//! End-to-end trace computation, baseline and block-accelerated.
//!
//! The `k`-th trace point is `z_k = h_1(h_2(...h_k(0)...))`: the innermost
//! map is the most recent one, so consecutive points share their *outer*
//! maps but are seeded differently and cannot reuse each other's work. The
//! baseline evaluator therefore costs `O(k)` per point. The fast evaluator
//! replaces every full group of `b` consecutive maps by its precomputed
//! block and pays `O(k/b)` block evaluations plus at most `b` raw maps per
//! point, provided the intermediate values stay far enough from the blocks'
//! cuts for the series gate to accept them.

use num_complex::Complex64;
use serde::Serialize;

use crate::blocks::{self, Block};
use crate::driving::{self, IncrementKind, Partition, PartitionScheme};
use crate::slitmap::{self, Discretization, SlitMap};
use crate::{Error, Result};

/// How trace points are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Direct nested composition, `O(k)` map evaluations per point.
    Baseline,
    /// Block series evaluation with per-block fallback to direct maps.
    Fast,
}

/// Default series truncation order.
pub const DEFAULT_ORDER: usize = 12;

/// Default per-block series error target; the evaluation threshold is
/// derived from it so that one block contributes roughly this much
/// relative error.
pub const DEFAULT_EPS: f64 = 1e-6;

/// Default block length for `n_steps` steps at a given `kappa`.
///
/// Balances the two per-point cost terms: raw maps inside the trailing
/// partial block against block series evaluations. The best coefficient
/// drifts slightly with how often the gate rejects, hence the
/// kappa-dependent tweak.
pub fn default_block_len(n_steps: usize, kappa: f64) -> usize {
    let coeff = if (kappa - 6.0).abs() < 1e-9 { 0.10 } else { 0.12 };
    let b = (coeff * (n_steps as f64).sqrt()).round();
    (b as usize).max(1)
}

/// Default evaluation threshold for truncation order `n` and error target
/// `eps`: the `L` with `L^-n = eps`, so one gated series evaluation is off
/// by about `eps` relative.
pub fn default_threshold(order: usize, eps: f64) -> f64 {
    eps.powf(-1.0 / order as f64)
}

/// Full description of one trace run. Everything downstream (points,
/// timings, CSV output) is a pure function of this value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub kappa: f64,
    /// Number of time steps `N`.
    pub n_steps: usize,
    /// Report every `stride`-th point: indices `stride, 2*stride, ...`.
    pub stride: usize,
    pub discretization: Discretization,
    pub scheme: PartitionScheme,
    pub increments: IncrementKind,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Maps per block; `None` picks [`default_block_len`].
    pub block_len: Option<usize>,
    /// Series truncation order; `None` picks [`DEFAULT_ORDER`].
    pub order: Option<usize>,
    /// Series gate factor `L` (may be infinite, forcing direct evaluation
    /// everywhere); `None` derives it from `eps` via [`default_threshold`].
    pub threshold: Option<f64>,
    /// Error target used only when `threshold` is `None`.
    pub eps: f64,
}

impl RunSpec {
    pub fn resolved_block_len(&self) -> usize {
        self.block_len
            .unwrap_or_else(|| default_block_len(self.n_steps, self.kappa))
    }

    pub fn resolved_order(&self) -> usize {
        self.order.unwrap_or(DEFAULT_ORDER)
    }

    pub fn resolved_threshold(&self) -> f64 {
        self.threshold
            .unwrap_or_else(|| default_threshold(self.resolved_order(), self.eps))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::invalid(format!(
                "kappa must be positive and finite, got {}",
                self.kappa
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps must be at least 1"));
        }
        if self.stride == 0 || self.stride > self.n_steps {
            return Err(Error::invalid(format!(
                "stride must be in 1..={}, got {}",
                self.n_steps, self.stride
            )));
        }
        if self.block_len == Some(0) {
            return Err(Error::invalid("block_len must be at least 1"));
        }
        if self.order == Some(0) {
            return Err(Error::invalid("order must be at least 1"));
        }
        if let Some(l) = self.threshold {
            if !(l > 1.0) {
                return Err(Error::invalid(format!(
                    "threshold must exceed 1, got {l}"
                )));
            }
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

/// Trace points at the requested indices, with the spec that produced them.
#[derive(Debug, Clone)]
pub struct TraceResult {
    spec: RunSpec,
    indices: Vec<usize>,
    points: Vec<Complex64>,
}

impl TraceResult {
    pub fn spec(&self) -> &RunSpec {
        &self.spec
    }

    /// 1-based step indices, strictly increasing.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// One point per index, in the closed upper half plane.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// The indices reported for a run: `stride, 2*stride, ...` up to `n_steps`.
pub fn trace_indices(n_steps: usize, stride: usize) -> Result<Vec<usize>> {
    if stride == 0 || stride > n_steps {
        return Err(Error::invalid(format!(
            "stride must be in 1..={n_steps}, got {stride}"
        )));
    }
    Ok((1..=n_steps / stride).map(|i| i * stride).collect())
}

/// Builds the step maps for `spec` (partition, driving sample, one map per
/// step). Deterministic in the spec.
pub fn build_maps(spec: &RunSpec) -> Result<Vec<SlitMap>> {
    spec.validate()?;
    let partition = Partition::new(spec.n_steps, spec.scheme)?;
    let driving = driving::sample_driving(&partition, spec.kappa, spec.increments, spec.seed)?;
    slitmap::maps_for_driving(partition.deltas(), driving.increments(), spec.discretization)
}

/// Evaluates `z_k = h_1(...h_k(0)...)` by direct nested composition for
/// each requested index.
pub fn compute_trace_baseline(
    maps: &[SlitMap],
    indices: &[usize],
    spec: &RunSpec,
) -> Result<TraceResult> {
    check_indices(maps.len(), indices)?;
    let points = indices
        .iter()
        .map(|&k| blocks::compose_direct(&maps[..k], Complex64::new(0.0, 0.0)))
        .collect();
    Ok(TraceResult { spec: spec.clone(), indices: indices.to_vec(), points })
}

/// Evaluates the same points as [`compute_trace_baseline`] using the
/// precomputed blocks. For `k = m*b + l` with `1 <= l <= b` the innermost
/// `l` maps (the trailing group not yet covered by a block) are applied
/// directly, then the `m` complete blocks from innermost to outermost, each
/// through its series gate at factor `threshold`.
///
/// Consecutive series evaluations are chained in the reciprocal variable:
/// each block's series computes `1/H(1/z)`, so the inversion feeding one
/// block cancels against the inversion leaving the previous one, and a run
/// of gated blocks is pure polynomial evaluation `u <- p(u)`. The value
/// only converts between `z` and `u = 1/z` where a direct-map segment abuts
/// a series segment. Blocks that fail their gate are applied map by map in
/// `z`, so with `threshold` infinite nothing ever converts and the result
/// is byte-identical to the baseline.
pub fn compute_trace_fast(
    maps: &[SlitMap],
    blocks: &[Block],
    indices: &[usize],
    threshold: f64,
    spec: &RunSpec,
) -> Result<TraceResult> {
    check_indices(maps.len(), indices)?;
    let b = match blocks.first() {
        Some(block) => block.len(),
        None => {
            return Err(Error::invalid(
                "fast evaluation needs at least one block",
            ))
        }
    };
    let scan = ChainScan::new(blocks, threshold);
    let mut points = Vec::with_capacity(indices.len());
    for &k in indices {
        let m = (k - 1) / b;
        if m > blocks.len() {
            return Err(Error::invalid(format!(
                "index {k} needs {m} blocks but only {} were built",
                blocks.len()
            )));
        }
        let z = blocks::compose_direct(&maps[m * b..k], Complex64::new(0.0, 0.0));
        points.push(scan.walk_out(maps, blocks, m, z)?);
    }
    Ok(TraceResult { spec: spec.clone(), indices: indices.to_vec(), points })
}

/// Flattened per-block data for the chain walk, laid out outermost-last so
/// every point's walk ends on the same hot tail of the arrays. Slot `s`
/// holds block `count - 1 - s`; a walk over blocks `m-1, ..., 0` scans slots
/// `count - m, ..., count - 1` in ascending memory order.
struct ChainScan {
    /// Hat coefficients of all blocks, back to back.
    coeffs: Vec<f64>,
    /// Slot `s` coefficients live at `offsets[s]..offsets[s + 1]`.
    offsets: Vec<usize>,
    /// `(threshold * radius)^-2` per slot: the series branch applies when
    /// `|u|^2 <= inv_gate2`, the reciprocal of the `|z| >= L R` gate. An
    /// infinite threshold gives 0, which no nonzero `u` passes.
    inv_gate2: Vec<f64>,
}

impl ChainScan {
    fn new(blocks: &[Block], threshold: f64) -> ChainScan {
        let count = blocks.len();
        let total: usize = blocks.iter().map(|b| b.series_coeffs().len()).sum();
        let mut coeffs = Vec::with_capacity(total);
        let mut offsets = Vec::with_capacity(count + 1);
        let mut inv_gate2 = Vec::with_capacity(count);
        offsets.push(0);
        for block in blocks.iter().rev() {
            coeffs.extend_from_slice(block.series_coeffs());
            offsets.push(coeffs.len());
            let gate = threshold * block.radius();
            inv_gate2.push(1.0 / (gate * gate));
        }
        ChainScan { coeffs, offsets, inv_gate2 }
    }

    /// Applies blocks `m-1, ..., 0` (innermost to outermost) to `z`.
    fn walk_out(
        &self,
        maps: &[SlitMap],
        blocks: &[Block],
        m: usize,
        z: Complex64,
    ) -> Result<Complex64> {
        let count = blocks.len();
        let one = Complex64::new(1.0, 0.0);
        let mut z = z;
        // `u` carries 1/z between consecutive series blocks; `in_u` says
        // which of the two variables is current.
        let mut u = Complex64::new(0.0, 0.0);
        let mut in_u = false;
        for s in (count - m)..count {
            let far = if in_u {
                u.norm_sqr() <= self.inv_gate2[s]
            } else {
                z.norm_sqr() * self.inv_gate2[s] >= 1.0
            };
            if far {
                if !in_u {
                    u = one / z;
                    in_u = true;
                }
                let c = &self.coeffs[self.offsets[s]..self.offsets[s + 1]];
                let mut acc = Complex64::new(*c.last().expect("nonempty"), 0.0);
                for &cj in c.iter().rev().skip(1) {
                    acc = acc * u + cj;
                }
                u = acc;
            } else {
                if in_u {
                    z = checked_recip(u)?;
                    in_u = false;
                }
                let block = &blocks[count - 1 - s];
                z = blocks::compose_direct(&maps[block.first()..=block.last()], z);
            }
        }
        if in_u {
            z = checked_recip(u)?;
        }
        Ok(z)
    }
}

/// `1/u`, rejecting the zero and non-finite values a degenerate series
/// evaluation would otherwise launder into the trace.
fn checked_recip(u: Complex64) -> Result<Complex64> {
    if !u.re.is_finite() || !u.im.is_finite() || u == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateEval { z: u });
    }
    Ok(Complex64::new(1.0, 0.0) / u)
}

fn check_indices(n_maps: usize, indices: &[usize]) -> Result<()> {
    let mut prev = 0;
    for &k in indices {
        if k <= prev || k > n_maps {
            return Err(Error::invalid(format!(
                "indices must be strictly increasing and in 1..={n_maps}"
            )));
        }
        prev = k;
    }
    Ok(())
}

/// Runs the whole pipeline for `spec`: partition, driving, maps, blocks if
/// the fast algorithm is selected, then the trace points.
pub fn run(spec: &RunSpec) -> Result<TraceResult> {
    let maps = build_maps(spec)?;
    let indices = trace_indices(spec.n_steps, spec.stride)?;
    match spec.algorithm {
        Algorithm::Baseline => compute_trace_baseline(&maps, &indices, spec),
        Algorithm::Fast => {
            let blocks =
                blocks::build_blocks(&maps, spec.resolved_block_len(), spec.resolved_order())?;
            compute_trace_fast(&maps, &blocks, &indices, spec.resolved_threshold(), spec)
        }
    }
}

/// Mean Euclidean distance between two traces over the same index set.
pub fn error_between(a: &TraceResult, b: &TraceResult) -> Result<f64> {
    paired(a, b).map(|pairs| {
        let n = pairs.len() as f64;
        pairs.iter().map(|(p, q)| (p - q).norm()).sum::<f64>() / n
    })
}

/// Largest Euclidean distance between two traces over the same index set.
pub fn max_error_between(a: &TraceResult, b: &TraceResult) -> Result<f64> {
    paired(a, b).map(|pairs| {
        pairs
            .iter()
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max)
    })
}

fn paired<'a>(
    a: &'a TraceResult,
    b: &'a TraceResult,
) -> Result<Vec<(Complex64, Complex64)>> {
    if a.indices != b.indices {
        return Err(Error::IndexMismatch);
    }
    if a.is_empty() {
        return Err(Error::invalid("cannot compare empty traces"));
    }
    Ok(a.points.iter().copied().zip(b.points.iter().copied()).collect())
}
