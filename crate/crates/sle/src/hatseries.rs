//! Truncated power series for the far-field form of a slit map.
//!
//! For a conformal map `h` fixing infinity with derivative 1 there, the
//! conjugated function `z -> 1/h(1/z)` is analytic at the origin and has a
//! power series starting `z + a2 z^2 + ...`. Truncating that series at order
//! `n` gives a polynomial surrogate whose evaluation error at `|z| = L R`
//! decays like `L^-n`, where `R` is the convergence radius. Composition of
//! maps corresponds to composition of their series, so a whole block of maps
//! collapses into a single polynomial.
//!
//! Coefficients are stored ascending: `coeffs[j]` multiplies `z^j`, with
//! `coeffs[0] = 0` and `coeffs[1] = 1` as a type invariant.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::slitmap::{Discretization, SlitMap};

/// Coefficients of `(1 - c z)^{-alpha}`, ascending, through `z^order`.
///
/// Works for any real exponent; the recurrence multiplies successive terms by
/// `(alpha + k - 1) / k * c`.
pub fn binomial_series(alpha: f64, c: f64, order: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; order + 1];
    fill_binomial(alpha, c, &mut coeffs);
    coeffs
}

/// Reciprocals of small integers, so the term recurrences below multiply
/// instead of riding a division latency chain. Indices past the table fall
/// back to dividing (orders that large are unusual).
const RECIP: [f64; 33] = {
    let mut t = [0.0; 33];
    let mut k = 1;
    while k < 33 {
        t[k] = 1.0 / k as f64;
        k += 1;
    }
    t
};

#[inline]
fn recip(k: usize) -> f64 {
    if k < RECIP.len() {
        RECIP[k]
    } else {
        1.0 / k as f64
    }
}

fn fill_binomial(alpha: f64, c: f64, slot: &mut [f64]) {
    let mut term = 1.0;
    for (k, s) in slot.iter_mut().enumerate() {
        if k > 0 {
            term *= (alpha + (k as f64 - 1.0)) * recip(k) * c;
        }
        *s = term;
    }
}

/// Single-map hat coefficients written into `out` (ascending, length
/// `order + 1`) without allocating in the steady state; `tmp` is scratch.
/// This is the one construction path for map series; the block builder uses
/// it directly with reused buffers.
pub(crate) fn write_map_hat(map: &SlitMap, order: usize, out: &mut Vec<f64>, tmp: &mut Vec<f64>) {
    out.clear();
    out.resize(order + 1, 0.0);
    match map.discretization() {
        Discretization::Tilted => {
            // z (1 + xl z)^{-(1-a)} (1 - xr z)^{-a}: two binomial series
            // multiplied, then shifted up by one degree.
            let alpha = map.alpha();
            let (xl, xr) = map.cut();
            tmp.clear();
            tmp.resize(2 * order, 0.0);
            let (a, b) = tmp.split_at_mut(order);
            fill_binomial(1.0 - alpha, -xl, a);
            fill_binomial(alpha, xr, b);
            for i in 0..order {
                let ai = a[i];
                for (o, &bj) in out[i + 1..=order].iter_mut().zip(b.iter()) {
                    *o += ai * bj;
                }
            }
        }
        Discretization::Vertical => {
            // The far form is g / (1 + d g), with g the square-root series
            // containing only odd terms g_{2k+1} = g_{2k-1} (2k-1) 2D / k.
            // The division unrolls to out_k = g_k - d sum_{i>=1} g_i out_{k-i}.
            let dcap = map.dcap();
            let delta = map.delta();
            tmp.clear();
            tmp.resize(order + 1, 0.0);
            tmp[1] = 1.0;
            let mut term = 1.0;
            let mut k = 1usize;
            while 2 * k + 1 <= order {
                term *= (2.0 * k as f64 - 1.0) * 2.0 * dcap * recip(k);
                tmp[2 * k + 1] = term;
                k += 1;
            }
            for k in 1..=order {
                let mut s = 0.0;
                for i in 1..k {
                    s += tmp[i] * out[k - i];
                }
                out[k] = tmp[k] - delta * s;
            }
        }
    }
}

/// `out = acc * q` truncated at `order`, where `q[0] == 0`.
///
/// Skipping the zero constant term keeps the product's constant slot an exact
/// zero, which is what preserves the series invariant under composition.
///
/// Hot kernel of block construction. Each output coefficient is an
/// independent dot product accumulated in registers; two running sums hide
/// the multiply-add latency. The row-major alternative (repeatedly adding
/// scaled rows into `out`) serializes on store-to-load forwarding and
/// measures several times slower.
fn mul_trunc_into(acc: &[f64], q: &[f64], order: usize, out: &mut [f64]) {
    out[0] = 0.0;
    for k in 1..=order {
        // Pairs (acc[i], q[k - i]) for i in 0..k, walked two at a time so two
        // accumulator chains stay in flight without bounds checks.
        let fwd = acc[..k].chunks_exact(2);
        let bwd = q[1..=k].rchunks_exact(2);
        let (fr, br) = (fwd.remainder(), bwd.remainder());
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for (pa, pb) in fwd.zip(bwd) {
            s0 += pa[0] * pb[1];
            s1 += pa[1] * pb[0];
        }
        if let (Some(&p), Some(&r)) = (fr.first(), br.first()) {
            s0 += p * r;
        }
        out[k] = s0 + s1;
    }
}

/// Composition kernel shared with the block builder: writes the coefficients
/// of `outer(inner(z))` truncated at `order` into `out`, using `scratch` as a
/// working buffer. Both inputs must have at least `order + 1` coefficients
/// and a zero constant term. Horner's scheme over the outer coefficients
/// performs `order` truncated multiplies.
pub(crate) fn compose_into(
    outer: &[f64],
    inner: &[f64],
    order: usize,
    out: &mut Vec<f64>,
    scratch: &mut Vec<f64>,
) {
    out.clear();
    out.resize(order + 1, 0.0);
    scratch.clear();
    scratch.resize(order + 1, 0.0);
    out[0] = outer[order];
    for j in (0..order).rev() {
        mul_trunc_into(out, inner, order, scratch);
        std::mem::swap(out, scratch);
        out[0] = outer[j];
    }
}

/// Buffers reused across [`fold_map_into`] calls so block construction does
/// not allocate in the steady state.
#[derive(Default)]
pub(crate) struct FoldScratch {
    v: Vec<f64>,
    vj: Vec<f64>,
    w: Vec<f64>,
    wj: Vec<f64>,
    x: Vec<f64>,
    p: Vec<f64>,
}

impl FoldScratch {
    /// Grows the buffers to `order + 1` slots. Contents are left stale on
    /// purpose: every kernel below overwrites the slots it reads from, except
    /// the `[0]` slot of the index-weighted copies, which no kernel reads.
    fn ensure(&mut self, order: usize) {
        if self.v.len() <= order {
            for b in [
                &mut self.v,
                &mut self.vj,
                &mut self.w,
                &mut self.wj,
                &mut self.x,
                &mut self.p,
            ] {
                b.resize(order + 1, 0.0);
            }
        }
    }
}

/// `(S^2)_k` recomputed from the symmetric half of the convolution; `S[0]`
/// must be zero so the sum runs over interior pairs only. Two accumulators
/// keep the short chain from serializing on add latency.
#[inline(always)]
fn square_coeff(s: &[f64], k: usize) -> f64 {
    let m = (k - 1) / 2;
    let mut a0 = 0.0;
    let mut a1 = 0.0;
    let mut i = 1;
    while i + 1 <= m {
        a0 += s[i] * s[k - i];
        a1 += s[i + 1] * s[k - i - 1];
        i += 2;
    }
    if i <= m {
        a0 += s[i] * s[k - i];
    }
    let mut acc = 2.0 * (a0 + a1);
    if k % 2 == 0 {
        let mid = s[k / 2];
        acc += mid * mid;
    }
    acc
}

/// Replaces `acc`, the hat series of some composition `f`, by the hat series
/// of `h ∘ f` where `h` is `map`. Exploits the closed form of the map's own
/// hat instead of composing generically: with `S = acc`,
///
/// * tilted:   `S (1 + xl S)^(a-1) (1 - xr S)^(-a)`,
/// * vertical: `G / (1 + d G)` with `G = S (1 - 4D S^2)^(-1/2)`,
///
/// evaluated coefficient by coefficient in one pass. Each degree `k` needs
/// `(S^2)_k`, one step of the power recurrence for the binomial (or inverse
/// square root) factor, and the final product or shift-division term, all of
/// which read the same `k - j` back-window. The dot products against that
/// window therefore share a single loop, split into even/odd accumulator
/// pairs to keep the chains independent. The power factors come from
/// logarithmic differentiation: for the tilted product
/// `E = (1 + xl S)^(a-1) (1 - xr S)^(-a)` the identity `E' (1 + D) = E C'`
/// with `D = (xl - xr) S - xl xr S^2` and
/// `C = ((a-1) xl + a xr) S + (xl xr / 2) S^2` gives
/// `k E_k = sum_j (j (C_j + D_j) - k D_j) E_{k-j}`; for the vertical factor
/// `X = (1 - 4D S^2)^{-1/2}` the standard power recurrence
/// `k X_k = sum_j (j/2 - k) w_j X_{k-j}` with `w = 1 - 4D S^2` applies.
/// The constant and linear slots stay exactly 0 and 1, and everything is
/// `O(order^2)` per map against the generic Horner's `O(order^3)`.
pub(crate) fn fold_map_into(
    map: &SlitMap,
    order: usize,
    acc: &mut Vec<f64>,
    s: &mut FoldScratch,
) {
    debug_assert!(acc.len() == order + 1);
    s.ensure(order);
    match map.discretization() {
        Discretization::Tilted => {
            let alpha = map.alpha();
            let (xl, xr) = map.cut();
            let ad = xl - xr;
            let bd = -(xl * xr);
            let c = (alpha - 1.0) * xl + alpha * xr;
            let half_dd = 0.5 * (xl * xr);
            let g = &mut s.vj;
            let d = &mut s.w;
            let e = &mut s.x;
            let out = &mut s.v;
            g[0] = 0.0;
            d[0] = 0.0;
            e[0] = 1.0;
            out[0] = 0.0;
            for k in 1..=order {
                let s2k = square_coeff(acc, k);
                let sk = acc[k];
                let dk = ad * sk + bd * s2k;
                d[k] = dk;
                g[k] = k as f64 * (c * sk + half_dd * s2k + dk);
                // Shared back-window pass: E needs the g- and d-dots, the
                // output product (S E)_k needs the S-dot, and all three read
                // e[k - j]. E_k itself is not touched because e[0] pairs
                // with index k in each dot and S_0 = 0 kills that term in
                // the product.
                let mut sg0 = 0.0;
                let mut sg1 = 0.0;
                let mut sd0 = 0.0;
                let mut sd1 = 0.0;
                let mut st0 = 0.0;
                let mut st1 = 0.0;
                let mut j = 1;
                while j + 1 <= k {
                    let e0 = e[k - j];
                    let e1 = e[k - j - 1];
                    sg0 += g[j] * e0;
                    sd0 += d[j] * e0;
                    st0 += acc[j] * e0;
                    sg1 += g[j + 1] * e1;
                    sd1 += d[j + 1] * e1;
                    st1 += acc[j + 1] * e1;
                    j += 2;
                }
                if j == k {
                    // Leftover term pairs index k with e[0] = 1.
                    sg0 += g[k];
                    sd0 += d[k];
                    st0 += acc[k];
                }
                e[k] = recip(k) * (sg0 + sg1) - (sd0 + sd1);
                out[k] = st0 + st1;
            }
            std::mem::swap(acc, out);
        }
        Discretization::Vertical => {
            let dcap = map.dcap();
            let delta = map.delta();
            let w = &mut s.w;
            let wj = &mut s.wj;
            let x = &mut s.x;
            let g = &mut s.p;
            let out = &mut s.v;
            w[0] = 1.0;
            x[0] = 1.0;
            g[0] = 0.0;
            out[0] = 0.0;
            for k in 1..=order {
                let wk = -4.0 * dcap * square_coeff(acc, k);
                w[k] = wk;
                wj[k] = k as f64 * wk;
                // Shared back-window pass over x[k - j]: the two power-
                // recurrence dots for X and the product dot for G = S X.
                let mut sw0 = 0.0;
                let mut sw1 = 0.0;
                let mut sj0 = 0.0;
                let mut sj1 = 0.0;
                let mut sg0 = 0.0;
                let mut sg1 = 0.0;
                let mut j = 1;
                while j + 1 <= k {
                    let x0 = x[k - j];
                    let x1 = x[k - j - 1];
                    sw0 += w[j] * x0;
                    sj0 += wj[j] * x0;
                    sg0 += acc[j] * x0;
                    sw1 += w[j + 1] * x1;
                    sj1 += wj[j + 1] * x1;
                    sg1 += acc[j + 1] * x1;
                    j += 2;
                }
                if j == k {
                    sw0 += w[k];
                    sj0 += wj[k];
                    sg0 += acc[k];
                }
                x[k] = 0.5 * recip(k) * (sj0 + sj1) - (sw0 + sw1);
                let gk = sg0 + sg1;
                g[k] = gk;
                // Shift division (1 + d G)^{-1} G as it stands today:
                // T_k = G_k - d sum_i G_i T_{k-i} over interior pairs.
                let mut a0 = 0.0;
                let mut a1 = 0.0;
                let mut i = 1;
                while i + 1 < k {
                    a0 += g[i] * out[k - i];
                    a1 += g[i + 1] * out[k - i - 1];
                    i += 2;
                }
                if i < k {
                    a0 += g[i] * out[k - i];
                }
                out[k] = gk - delta * (a0 + a1);
            }
            std::mem::swap(acc, out);
        }
    }
}

/// Lane width of the batched fold: four doubles fill one AVX register, and
/// the block builder folds four independent block chains at a time.
pub(crate) const FOLD_LANES: usize = 4;

/// Working buffers for [`fold_uniform_lanes`], lane-minor so the per-lane
/// recurrences become straight-line vector arithmetic.
#[derive(Default)]
pub(crate) struct FoldScratchLanes {
    a: Vec<[f64; FOLD_LANES]>,
    b: Vec<[f64; FOLD_LANES]>,
    c: Vec<[f64; FOLD_LANES]>,
    d: Vec<[f64; FOLD_LANES]>,
    /// Vertical folds stage five series where tilted folds stage four.
    out_vertical: Vec<[f64; FOLD_LANES]>,
}

impl FoldScratchLanes {
    fn ensure(&mut self, order: usize) {
        if self.a.len() <= order {
            for buf in [&mut self.a, &mut self.b, &mut self.c, &mut self.d] {
                buf.resize(order + 1, [0.0; FOLD_LANES]);
            }
        }
    }
}

/// [`fold_map_into`] applied to `FOLD_LANES` independent series at once,
/// all maps of the same kind. Per lane every recurrence, accumulator split,
/// and rounding matches the scalar fold exactly; the lanes only share loop
/// control, which turns the short latency-bound chains of one fold into
/// four-wide vector arithmetic. `accs[k][l]` is coefficient `k` of lane
/// `l`'s series.
pub(crate) fn fold_uniform_lanes(
    maps: [&SlitMap; FOLD_LANES],
    order: usize,
    accs: &mut Vec<[f64; FOLD_LANES]>,
    s: &mut FoldScratchLanes,
) {
    debug_assert!(accs.len() == order + 1);
    debug_assert!(maps
        .iter()
        .all(|m| m.discretization() == maps[0].discretization()));
    s.ensure(order);
    const L: usize = FOLD_LANES;
    match maps[0].discretization() {
        Discretization::Tilted => {
            let mut ad = [0.0; L];
            let mut bd = [0.0; L];
            let mut cc = [0.0; L];
            let mut half_dd = [0.0; L];
            for l in 0..L {
                let alpha = maps[l].alpha();
                let (xl, xr) = maps[l].cut();
                ad[l] = xl - xr;
                bd[l] = -(xl * xr);
                cc[l] = (alpha - 1.0) * xl + alpha * xr;
                half_dd[l] = 0.5 * (xl * xr);
            }
            let g = &mut s.a;
            let d = &mut s.b;
            let e = &mut s.c;
            let out = &mut s.d;
            g[0] = [0.0; L];
            d[0] = [0.0; L];
            e[0] = [1.0; L];
            out[0] = [0.0; L];
            for k in 1..=order {
                let s2k = square_coeff_lanes(accs, k);
                let mut dk = [0.0; L];
                for l in 0..L {
                    let sk = accs[k][l];
                    dk[l] = ad[l] * sk + bd[l] * s2k[l];
                    g[k][l] =
                        k as f64 * (cc[l] * sk + half_dd[l] * s2k[l] + dk[l]);
                }
                d[k] = dk;
                let mut sg0 = [0.0; L];
                let mut sg1 = [0.0; L];
                let mut sd0 = [0.0; L];
                let mut sd1 = [0.0; L];
                let mut st0 = [0.0; L];
                let mut st1 = [0.0; L];
                let mut j = 1;
                while j + 1 <= k {
                    let e0 = e[k - j];
                    let e1 = e[k - j - 1];
                    for l in 0..L {
                        sg0[l] += g[j][l] * e0[l];
                        sd0[l] += d[j][l] * e0[l];
                        st0[l] += accs[j][l] * e0[l];
                        sg1[l] += g[j + 1][l] * e1[l];
                        sd1[l] += d[j + 1][l] * e1[l];
                        st1[l] += accs[j + 1][l] * e1[l];
                    }
                    j += 2;
                }
                if j == k {
                    for l in 0..L {
                        sg0[l] += g[k][l];
                        sd0[l] += d[k][l];
                        st0[l] += accs[k][l];
                    }
                }
                let rk = recip(k);
                for l in 0..L {
                    e[k][l] = rk * (sg0[l] + sg1[l]) - (sd0[l] + sd1[l]);
                    out[k][l] = st0[l] + st1[l];
                }
            }
            std::mem::swap(accs, out);
        }
        Discretization::Vertical => {
            let mut m4d = [0.0; L];
            let mut delta = [0.0; L];
            for l in 0..L {
                m4d[l] = -4.0 * maps[l].dcap();
                delta[l] = maps[l].delta();
            }
            let w = &mut s.a;
            let wj = &mut s.b;
            let x = &mut s.c;
            let g = &mut s.d;
            // The output shares the g buffer's trailing role in the scalar
            // fold; here it needs its own storage, reusing the caller's acc
            // only after the swap, so borrow a fifth buffer from scratch by
            // splitting g's dual use: g holds the product series, out is
            // accumulated in place of the shift division below.
            let mut out = std::mem::take(&mut s.out_vertical);
            out.resize(order + 1, [0.0; L]);
            w[0] = [1.0; L];
            x[0] = [1.0; L];
            g[0] = [0.0; L];
            out[0] = [0.0; L];
            for k in 1..=order {
                let s2k = square_coeff_lanes(accs, k);
                for l in 0..L {
                    let wk = m4d[l] * s2k[l];
                    w[k][l] = wk;
                    wj[k][l] = k as f64 * wk;
                }
                let mut sw0 = [0.0; L];
                let mut sw1 = [0.0; L];
                let mut sj0 = [0.0; L];
                let mut sj1 = [0.0; L];
                let mut sg0 = [0.0; L];
                let mut sg1 = [0.0; L];
                let mut j = 1;
                while j + 1 <= k {
                    let x0 = x[k - j];
                    let x1 = x[k - j - 1];
                    for l in 0..L {
                        sw0[l] += w[j][l] * x0[l];
                        sj0[l] += wj[j][l] * x0[l];
                        sg0[l] += accs[j][l] * x0[l];
                        sw1[l] += w[j + 1][l] * x1[l];
                        sj1[l] += wj[j + 1][l] * x1[l];
                        sg1[l] += accs[j + 1][l] * x1[l];
                    }
                    j += 2;
                }
                if j == k {
                    for l in 0..L {
                        sw0[l] += w[k][l];
                        sj0[l] += wj[k][l];
                        sg0[l] += accs[k][l];
                    }
                }
                let rk = recip(k);
                let mut gk = [0.0; L];
                for l in 0..L {
                    x[k][l] = 0.5 * rk * (sj0[l] + sj1[l]) - (sw0[l] + sw1[l]);
                    gk[l] = sg0[l] + sg1[l];
                }
                g[k] = gk;
                let mut a0 = [0.0; L];
                let mut a1 = [0.0; L];
                let mut i = 1;
                while i + 1 < k {
                    let o0 = out[k - i];
                    let o1 = out[k - i - 1];
                    for l in 0..L {
                        a0[l] += g[i][l] * o0[l];
                        a1[l] += g[i + 1][l] * o1[l];
                    }
                    i += 2;
                }
                if i < k {
                    let o0 = out[k - i];
                    for l in 0..L {
                        a0[l] += g[i][l] * o0[l];
                    }
                }
                for l in 0..L {
                    out[k][l] = gk[l] - delta[l] * (a0[l] + a1[l]);
                }
            }
            std::mem::swap(accs, &mut out);
            s.out_vertical = out;
        }
    }
}

/// Per-lane [`square_coeff`]: same symmetric halving and the same two-way
/// accumulator split in every lane.
#[inline(always)]
fn square_coeff_lanes(
    s: &[[f64; FOLD_LANES]],
    k: usize,
) -> [f64; FOLD_LANES] {
    const L: usize = FOLD_LANES;
    let m = (k - 1) / 2;
    let mut a0 = [0.0; L];
    let mut a1 = [0.0; L];
    let mut i = 1;
    while i + 1 <= m {
        let p0 = s[k - i];
        let p1 = s[k - i - 1];
        for l in 0..L {
            a0[l] += s[i][l] * p0[l];
            a1[l] += s[i + 1][l] * p1[l];
        }
        i += 2;
    }
    if i <= m {
        let p0 = s[k - i];
        for l in 0..L {
            a0[l] += s[i][l] * p0[l];
        }
    }
    let mut acc = [0.0; L];
    for l in 0..L {
        acc[l] = 2.0 * (a0[l] + a1[l]);
    }
    if k % 2 == 0 {
        let mid = s[k / 2];
        for l in 0..L {
            acc[l] += mid[l] * mid[l];
        }
    }
    acc
}

/// Truncated series of `z -> 1/h(1/z)` for a slit map `h`, or a composition
/// of such maps. The constant term is zero and the linear term is one.
#[derive(Debug, Clone, PartialEq)]
pub struct HatSeries {
    coeffs: Vec<f64>,
}

impl HatSeries {
    /// The identity series `z` padded with zeros through `z^order`.
    pub fn identity(order: usize) -> HatSeries {
        assert!(order >= 1, "series order must be at least 1");
        let mut coeffs = vec![0.0; order + 1];
        coeffs[1] = 1.0;
        HatSeries { coeffs }
    }

    /// Wrap raw coefficients, enforcing the normalization invariant.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<HatSeries> {
        if coeffs.len() < 2 {
            return Err(Error::invalid("series needs at least a linear term"));
        }
        if coeffs[0] != 0.0 || coeffs[1] != 1.0 {
            return Err(Error::invalid(
                "series must start 0 + z to describe a map fixing infinity",
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("series coefficients must be finite"));
        }
        Ok(HatSeries { coeffs })
    }

    /// Series of a single slit map, truncated at `order`.
    ///
    /// For the tilted map this is the product
    /// `z (1 + xl z)^{-(1-alpha)} (1 - xr z)^{-alpha}`, assembled from two
    /// binomial expansions. For the vertical map it is the square-root
    /// series fed through the far form of the shift, `g / (1 + d g)`.
    pub fn of_map(map: &SlitMap, order: usize) -> Result<HatSeries> {
        if order < 1 {
            return Err(Error::invalid("series order must be at least 1"));
        }
        let mut coeffs = Vec::new();
        let mut tmp = Vec::new();
        write_map_hat(map, order, &mut coeffs, &mut tmp);
        HatSeries::from_coeffs(coeffs)
    }

    /// Series of `outer(inner(z))` truncated at `order`.
    ///
    /// Both inputs must carry at least `order` coefficients. Because the
    /// inner constant term is exactly zero, every retained coefficient of the
    /// result is independent of the truncated tail, so composing at a higher
    /// order and discarding the extra coefficients reproduces this result
    /// bit for bit.
    pub fn compose(outer: &HatSeries, inner: &HatSeries, order: usize) -> Result<HatSeries> {
        if outer.order() < order || inner.order() < order {
            return Err(Error::invalid(
                "compose inputs must carry at least the requested order",
            ));
        }
        let mut out = Vec::new();
        let mut scratch = Vec::new();
        compose_into(&outer.coeffs, &inner.coeffs, order, &mut out, &mut scratch);
        HatSeries::from_coeffs(out)
    }

    /// Ascending coefficients, starting with the zero constant term.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree of the last stored coefficient.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluate the underlying map approximation at `z`: compute the
    /// polynomial at `w = 1/z` by Horner's scheme and invert the result.
    ///
    /// Only meaningful for `|z|` beyond the convergence radius of the exact
    /// series; the caller is responsible for that check. A zero or non-finite
    /// intermediate reports a degenerate evaluation instead of propagating
    /// NaN into a trace.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        eval_hat_coeffs(&self.coeffs, z)
    }
}

/// Shared evaluation kernel for hat coefficient slices; see
/// [`HatSeries::eval`]. Blocks store their coefficients inline and call this
/// directly.
pub(crate) fn eval_hat_coeffs(coeffs: &[f64], z: Complex64) -> Result<Complex64> {
    let w = Complex64::new(1.0, 0.0) / z;
    let mut acc = Complex64::new(*coeffs.last().expect("nonempty"), 0.0);
    for &c in coeffs.iter().rev().skip(1) {
        acc = acc * w + c;
    }
    // acc now holds p(w)/w's value folded once more by w, i.e. p(w).
    if !acc.re.is_finite() || !acc.im.is_finite() || acc == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateEval { z });
    }
    Ok(Complex64::new(1.0, 0.0) / acc)
}
