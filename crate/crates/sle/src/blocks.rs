//! Grouping of consecutive slit maps into blocks with a far-field series.
//!
//! A block is the composition of `b` consecutive step maps. Far from the
//! origin it is replaced by its truncated hat series; close in, the maps are
//! applied one by one. The switch happens at `|z| >= L * radius`, where
//! `radius` bounds the region in which the composition can go non-real.
//!
//! The radius of a block is the smallest `r` such that every `|x| >= r`
//! propagates through the chain (innermost map first) staying real and on
//! the same side of every intermediate cut. On each side that threshold is
//! an exact chain of branch inverses: the value entering the outermost map
//! must reach its cut endpoint, and pulling that requirement back through
//! each map's positive-branch inverse yields the starting point. A
//! requirement is always strictly positive, and a positive value pulls back
//! strictly outside the next cut, so no intermediate cut ever binds. Only
//! the larger of the two one-sided thresholds matters, so the chain runs on
//! the side a far-field estimate picks, and the other side is confirmed
//! dominated by one predicate walk; a doubling-and-bisection search backs
//! the whole thing up should the chain ever misbehave (NaN-level pathology).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hatseries::{self, HatSeries, FOLD_LANES};
use crate::slitmap::{tilted_far_invert, Discretization, SlitMap};

/// Number of block-radius chains the builder advances in lockstep. The
/// chains are independent, and one chain alone is bound by the latency of
/// the two logarithms inside each Newton step, so interleaving a few keeps
/// the log unit busy instead of idle.
const LANES: usize = 4;

/// Relative inflation applied to a certified threshold so that `>=`
/// comparisons against `L * radius` stay conservative under rounding.
const RADIUS_SAFETY: f64 = 1e-9;

/// Hard cap on the series order a block stores. Keeping coefficients inline
/// in the block (rather than heap-allocated per block) makes the per-point
/// walk over thousands of blocks a linear scan the prefetcher can follow;
/// the cap is twice the largest order the error studies use.
pub const MAX_ORDER: usize = 32;

/// The composition of one group of consecutive maps, with its far-field
/// series and activation radius. Indices are zero-based and inclusive.
#[derive(Debug, Clone)]
pub struct Block {
    coeffs: [f64; MAX_ORDER + 1],
    order: usize,
    radius: f64,
    first: usize,
    last: usize,
}

impl Block {
    /// The block's hat series (reconstructed; the coefficients live inline).
    pub fn series(&self) -> HatSeries {
        HatSeries::from_coeffs(self.coeffs[..=self.order].to_vec())
            .expect("block coefficients are validated at construction")
    }

    /// Truncated hat coefficients, ascending from the zero constant term.
    pub fn series_coeffs(&self) -> &[f64] {
        &self.coeffs[..=self.order]
    }

    /// Certified realness radius, safety factor included.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn first(&self) -> usize {
        self.first
    }

    pub fn last(&self) -> usize {
        self.last
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Evaluate the block at `z`: the truncated series when
    /// `|z| >= l_factor * radius`, direct composition of the underlying maps
    /// otherwise. An infinite `l_factor` therefore forces the direct path.
    /// `maps` must be the same full array the block was built from.
    pub fn eval(&self, maps: &[SlitMap], z: Complex64, l_factor: f64) -> Result<Complex64> {
        let gate = l_factor * self.radius;
        if z.norm_sqr() >= gate * gate {
            hatseries::eval_hat_coeffs(&self.coeffs[..=self.order], z)
        } else {
            Ok(compose_direct(&maps[self.first..=self.last], z))
        }
    }
}

/// Apply a run of maps directly: innermost map (highest index) first.
pub fn compose_direct(maps: &[SlitMap], z: Complex64) -> Complex64 {
    let mut it = maps.iter().rev();
    let mut w = z;
    // At the exact origin the innermost image is the map's tip, known in
    // closed form; taking it directly avoids the rounding of a complex
    // sqrt or log evaluated on the cut.
    if z == Complex64::new(0.0, 0.0) {
        if let Some(m) = it.next() {
            w = m.tip();
        }
    }
    for m in it {
        w = m.eval(w);
    }
    w
}

/// Group `maps` into `floor(N / b)` full blocks of exactly `b` maps with
/// series truncated at order `n`. A trailing partial group is left out;
/// trace evaluation applies those maps directly.
pub fn build_blocks(maps: &[SlitMap], b: usize, n: usize) -> Result<Vec<Block>> {
    if b < 1 {
        return Err(Error::invalid("block length must be at least 1"));
    }
    if n < 1 {
        return Err(Error::invalid("series order must be at least 1"));
    }
    if n > MAX_ORDER {
        return Err(Error::invalid(format!(
            "series order {n} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if maps.is_empty() {
        return Err(Error::invalid("cannot build blocks over zero maps"));
    }
    let count = maps.len() / b;
    let mut blocks = Vec::with_capacity(count);
    // Buffers shared across all blocks: the accumulated series, scratch for
    // the innermost map's hat, and the fold working sets.
    let mut acc = Vec::new();
    let mut scratch = Vec::new();
    let mut fold = hatseries::FoldScratch::default();
    let mut accs: Vec<[f64; FOLD_LANES]> = Vec::new();
    let mut fold_lanes = hatseries::FoldScratchLanes::default();
    let mut col = Vec::new();
    // Series pass, four block chains at a time. The folds of distinct
    // blocks are independent, so steps whose four maps share a kind run the
    // lane-parallel fold; mixed steps fall back to the scalar fold one lane
    // at a time. Either way each lane computes exactly the scalar result.
    let mut j = 0;
    while j + FOLD_LANES <= count {
        accs.clear();
        accs.resize(n + 1, [0.0; FOLD_LANES]);
        for l in 0..FOLD_LANES {
            let group = &maps[(j + l) * b..(j + l + 1) * b];
            hatseries::write_map_hat(
                group.last().expect("nonempty"),
                n,
                &mut acc,
                &mut scratch,
            );
            for k in 0..=n {
                accs[k][l] = acc[k];
            }
        }
        for i in (0..b.saturating_sub(1)).rev() {
            let lane_maps: [&SlitMap; FOLD_LANES] =
                core::array::from_fn(|l| &maps[(j + l) * b + i]);
            let kind = lane_maps[0].discretization();
            if lane_maps.iter().all(|m| m.discretization() == kind) {
                hatseries::fold_uniform_lanes(lane_maps, n, &mut accs, &mut fold_lanes);
            } else {
                for l in 0..FOLD_LANES {
                    col.clear();
                    col.extend(accs.iter().map(|a| a[l]));
                    hatseries::fold_map_into(lane_maps[l], n, &mut col, &mut fold);
                    for (k, v) in col.iter().enumerate() {
                        accs[k][l] = *v;
                    }
                }
            }
        }
        for l in 0..FOLD_LANES {
            let first = (j + l) * b;
            if accs[0][l] != 0.0
                || accs[1][l] != 1.0
                || accs.iter().any(|a| !a[l].is_finite())
            {
                return Err(Error::invalid(
                    "block series lost its normalization; map data is degenerate",
                ));
            }
            let mut coeffs = [0.0; MAX_ORDER + 1];
            for k in 0..=n {
                coeffs[k] = accs[k][l];
            }
            blocks.push(Block {
                coeffs,
                order: n,
                radius: 0.0,
                first,
                last: first + b - 1,
            });
        }
        j += FOLD_LANES;
    }
    for j in j..count {
        let first = j * b;
        let last = first + b - 1;
        let group = &maps[first..=last];
        hatseries::write_map_hat(group.last().expect("nonempty"), n, &mut acc, &mut scratch);
        for m in group.iter().rev().skip(1) {
            hatseries::fold_map_into(m, n, &mut acc, &mut fold);
        }
        if acc[0] != 0.0 || acc[1] != 1.0 || acc.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid(
                "block series lost its normalization; map data is degenerate",
            ));
        }
        let mut coeffs = [0.0; MAX_ORDER + 1];
        coeffs[..=n].copy_from_slice(&acc);
        blocks.push(Block {
            coeffs,
            order: n,
            radius: 0.0,
            first,
            last,
        });
    }
    // Radii in a second pass, four chains in lockstep, with a scalar tail.
    // Each lane's arithmetic is exactly that of `compute_radius`.
    let mut j = 0;
    while j + LANES <= count {
        let groups: [&[SlitMap]; LANES] =
            core::array::from_fn(|l| &maps[(j + l) * b..(j + l + 1) * b]);
        let radii = radius_lanes(groups)?;
        for l in 0..LANES {
            blocks[j + l].radius = radii[l];
        }
        j += LANES;
    }
    for block in &mut blocks[j..] {
        block.radius = compute_radius(&maps[block.first..=block.last])?;
    }
    Ok(blocks)
}

/// Does `x` propagate through the group (innermost map first) staying real
/// and on its own side of every intermediate cut? Positive `x` must stay at
/// or beyond each right cut endpoint, negative `x` mirrors to the left
/// branches. Zero never propagates. Monotone in `|x|`: each map is
/// increasing on the branch, so a larger start keeps every intermediate
/// value larger.
pub fn propagates_real(maps: &[SlitMap], x: f64) -> bool {
    if x > 0.0 {
        same_side_walk(maps, x, false)
    } else if x < 0.0 {
        same_side_walk(maps, -x, true)
    } else {
        false
    }
}

fn same_side_walk(maps: &[SlitMap], x_abs: f64, mirror: bool) -> bool {
    let mut v = x_abs;
    for m in maps.iter().rev() {
        let mm = if mirror { m.mirrored() } else { *m };
        let (_, xr) = mm.cut();
        if v < xr {
            return false;
        }
        v = mm.eval_real_unchecked(v);
    }
    true
}

/// Smallest radius `R` such that both `R` and `-R` propagate real through
/// the group, inflated by a safety factor so callers can gate on
/// `|z| >= L * R` without worrying about rounding at the boundary.
///
/// Only the larger side's threshold determines `R`, so the exact inverse
/// chain runs on the side a cheap far-field estimate picks out; the other
/// side is then merely confirmed dominated by one predicate walk, with the
/// full chain as fallback when the estimates are too close to call.
pub fn compute_radius(maps: &[SlitMap]) -> Result<f64> {
    if maps.is_empty() {
        return Err(Error::invalid("cannot compute a radius over zero maps"));
    }
    let mirror_first = approx_threshold(maps, true) > approx_threshold(maps, false);
    let lead = side_threshold(maps, mirror_first)?;
    let r = lead * (1.0 + RADIUS_SAFETY);
    if same_side_walk(maps, r, !mirror_first) {
        return Ok(r);
    }
    let other = side_threshold(maps, !mirror_first)?;
    Ok(lead.max(other) * (1.0 + RADIUS_SAFETY))
}

/// The map at one chain step, reflected when that chain runs the negative
/// side.
#[inline]
fn view(m: &SlitMap, mirror: bool) -> SlitMap {
    if mirror {
        m.mirrored()
    } else {
        *m
    }
}

/// [`compute_radius`] for `LANES` groups at once. Per lane this runs the
/// same estimate-chain-confirm sequence on the same numbers; only the
/// interleaving differs. Lanes that need a rare slow path (a non-finite
/// chain or a failed confirmation walk) finish through the scalar routines.
fn radius_lanes(groups: [&[SlitMap]; LANES]) -> Result<[f64; LANES]> {
    let mut mirrors = [false; LANES];
    for l in 0..LANES {
        mirrors[l] =
            approx_threshold(groups[l], true) > approx_threshold(groups[l], false);
    }
    let leads = side_threshold_lanes(&groups, mirrors);
    let inflated = leads.map(|lead| lead * (1.0 + RADIUS_SAFETY));
    let confirmed = same_side_walk_lanes(&groups, inflated, mirrors.map(|m| !m));
    let mut out = [0.0; LANES];
    for l in 0..LANES {
        if !(leads[l].is_finite() && leads[l] > 0.0) {
            // Degenerate chain: redo this group wholesale through the
            // scalar path, which carries the bisection fallback.
            out[l] = compute_radius(groups[l])?;
        } else if confirmed[l] {
            out[l] = inflated[l];
        } else {
            let other = side_threshold(groups[l], !mirrors[l])?;
            out[l] = leads[l].max(other) * (1.0 + RADIUS_SAFETY);
        }
    }
    Ok(out)
}

/// [`side_threshold`]'s inverse chain over `LANES` groups in lockstep.
/// Steps where every lane is a tilted map in its far regime run the batched
/// Newton; any other step inverts lane by lane. Unlike the scalar routine
/// this returns the raw chain value without the bisection fallback; the
/// caller checks finiteness.
fn side_threshold_lanes(
    groups: &[&[SlitMap]; LANES],
    mirrors: [bool; LANES],
) -> [f64; LANES] {
    let b = groups[0].len();
    let mut need = [0.0f64; LANES];
    for l in 0..LANES {
        need[l] = view(&groups[l][0], mirrors[l]).cut().1;
    }
    for i in 1..b {
        let mm: [SlitMap; LANES] =
            core::array::from_fn(|l| view(&groups[l][i], mirrors[l]));
        let mut all_far = true;
        for l in 0..LANES {
            let (xl, xr) = mm[l].cut();
            all_far &= mm[l].discretization() == Discretization::Tilted
                && need[l] >= 3.0 * xl.max(xr);
        }
        if all_far {
            let refs: [&SlitMap; LANES] = core::array::from_fn(|l| &mm[l]);
            let inv = tilted_far_invert(refs, need);
            for l in 0..LANES {
                need[l] = inv[l].max(mm[l].cut().1);
            }
        } else {
            for l in 0..LANES {
                need[l] = mm[l].invert_real_pos(need[l]).max(mm[l].cut().1);
            }
        }
    }
    need
}

/// [`same_side_walk`] over `LANES` groups in lockstep. The moment any lane
/// hits a cut, every lane finishes through the scalar walk from its current
/// depth, preserving the exact evaluation sequence.
fn same_side_walk_lanes(
    groups: &[&[SlitMap]; LANES],
    x_abs: [f64; LANES],
    mirrors: [bool; LANES],
) -> [bool; LANES] {
    let b = groups[0].len();
    let mut v = x_abs;
    for i in (0..b).rev() {
        let mm: [SlitMap; LANES] =
            core::array::from_fn(|l| view(&groups[l][i], mirrors[l]));
        let mut any_cut = false;
        for l in 0..LANES {
            any_cut |= v[l] < mm[l].cut().1;
        }
        if any_cut {
            return core::array::from_fn(|l| {
                same_side_walk(&groups[l][..=i], v[l], mirrors[l])
            });
        }
        for l in 0..LANES {
            v[l] = mm[l].eval_real_unchecked(v[l]);
        }
    }
    [true; LANES]
}

/// Far-field estimate of one side's threshold: the inverse chain with each
/// exact inverse replaced by its two-term expansion `y - d + 2D / y`. Only
/// used to rank the two sides; never trusted for the radius itself.
fn approx_threshold(maps: &[SlitMap], mirror: bool) -> f64 {
    let mut need = 0.0;
    for (i, m) in maps.iter().enumerate() {
        let delta = if mirror { -m.delta() } else { m.delta() };
        let mm = if mirror { m.mirrored() } else { *m };
        let (_, xr) = mm.cut();
        need = if i == 0 {
            xr
        } else {
            (need - delta + 2.0 * m.dcap() / need).max(xr)
        };
    }
    need
}

/// One side's propagation threshold: the inverse chain pulled back from the
/// outermost cut endpoint. Each inversion approaches its root from the
/// concave side and clamps to the cut, so the chain value sits within a few
/// ulps of (never materially below) the true threshold; the safety factor
/// applied by the caller absorbs that drift. The doubling-and-bisection
/// search remains as a fallback for non-finite map data.
fn side_threshold(maps: &[SlitMap], mirror: bool) -> Result<f64> {
    // The outermost map only needs its input outside its own cut; inner maps
    // must additionally deliver the requirement accumulated so far.
    let mut need = 0.0;
    for (i, m) in maps.iter().enumerate() {
        let mm = if mirror { m.mirrored() } else { *m };
        let (_, xr) = mm.cut();
        need = if i == 0 {
            xr
        } else {
            mm.invert_real_pos(need).max(xr)
        };
    }
    if need.is_finite() && need > 0.0 {
        return Ok(need);
    }
    bisected_threshold(maps, mirror)
}

/// Slow-path threshold search: double an upper candidate until the walk
/// succeeds, confirm a failing lower end, then bisect to relative 1e-12.
fn bisected_threshold(maps: &[SlitMap], mirror: bool) -> Result<f64> {
    let innermost = maps.last().expect("nonempty");
    let m0 = if mirror {
        innermost.mirrored()
    } else {
        *innermost
    };
    let (_, start) = m0.cut();
    let mut hi = start.max(f64::MIN_POSITIVE);
    let mut doublings = 0usize;
    while !same_side_walk(maps, hi, mirror) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::RadiusBracket(doublings - 1));
        }
    }
    let mut lo = hi / 2.0;
    if doublings == 0 {
        // The first candidate already propagates; the threshold is the
        // innermost cut endpoint itself (nothing smaller can pass it).
        return Ok(hi);
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if same_side_walk(maps, mid, mirror) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
