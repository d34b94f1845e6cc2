//! Elementary conformal slit maps, one per time step.
//!
//! Each step of size `Delta` with driving increment `delta` gets a map `h`
//! from the upper half plane onto the half plane minus a slit attached to
//! the real axis, normalized so that `h(z) = z + delta - 2 Delta / z + ...`
//! at infinity (capacity `2 Delta`, shift `delta`). Two families:
//!
//! * **Tilted**: `h(z) = (z + xl)^(1-alpha) (z - xr)^alpha`, a straight ray
//!   at angle `alpha * pi`. This is exact for the driving `c sqrt(t)`; the
//!   tilt parameter solves `(16 + v) alpha^2 - (16 + v) alpha + 4 = 0` with
//!   `v = delta^2 / Delta`.
//! * **Vertical**: `h(z) = sqrt(z^2 - 4 Delta) + delta`, a vertical segment,
//!   exact for driving that is constant on the step.
//!
//! All complex evaluations use principal branches, chosen so that the upper
//! half plane maps into itself and real points outside the cut stay real.

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Which elementary map family a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    Tilted,
    Vertical,
}

/// Solves for the tilt exponent `alpha` in `(0, 1)` given an increment
/// `delta` over a step of size `dcap`.
///
/// `alpha = 1/2 - sign(delta)/2 * sqrt(v / (16 + v))` with
/// `v = delta^2 / dcap`; positive increments tilt the slit toward the
/// positive real axis (`alpha < 1/2`).
pub fn solve_alpha(delta: f64, dcap: f64) -> Result<f64> {
    if !(dcap > 0.0) || !dcap.is_finite() {
        return Err(Error::invalid(format!("step size must be positive, got {dcap}")));
    }
    if !delta.is_finite() {
        return Err(Error::invalid(format!("increment must be finite, got {delta}")));
    }
    let v = delta * delta / dcap;
    let s = 0.5 * (v / (16.0 + v)).sqrt();
    Ok(if delta > 0.0 { 0.5 - s } else { 0.5 + s })
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Tilted { alpha: f64, xl: f64, xr: f64 },
    Vertical { half_cut: f64 },
}

/// One elementary slit map.
#[derive(Debug, Clone, Copy)]
pub struct SlitMap {
    kind: Kind,
    delta: f64,
    dcap: f64,
}

impl SlitMap {
    /// Tilted-slit map for one step. The cut is `[-xl, xr]` with
    /// `xl = 2 sqrt(dcap (1-alpha)/alpha)`, `xr = 2 sqrt(dcap alpha/(1-alpha))`,
    /// which realizes shift `delta` and capacity `2 dcap`.
    pub fn tilted(delta: f64, dcap: f64) -> Result<SlitMap> {
        let alpha = solve_alpha(delta, dcap)?;
        let xl = 2.0 * (dcap * (1.0 - alpha) / alpha).sqrt();
        let xr = 2.0 * (dcap * alpha / (1.0 - alpha)).sqrt();
        Ok(SlitMap {
            kind: Kind::Tilted { alpha, xl, xr },
            delta,
            dcap,
        })
    }

    /// Vertical-slit map for one step; the cut is `[-2 sqrt(dcap), 2 sqrt(dcap)]`.
    pub fn vertical(delta: f64, dcap: f64) -> Result<SlitMap> {
        if !(dcap > 0.0) || !dcap.is_finite() {
            return Err(Error::invalid(format!("step size must be positive, got {dcap}")));
        }
        if !delta.is_finite() {
            return Err(Error::invalid(format!("increment must be finite, got {delta}")));
        }
        Ok(SlitMap {
            kind: Kind::Vertical { half_cut: 2.0 * dcap.sqrt() },
            delta,
            dcap,
        })
    }

    /// Constructor dispatched on the discretization choice.
    pub fn for_step(which: Discretization, delta: f64, dcap: f64) -> Result<SlitMap> {
        match which {
            Discretization::Tilted => SlitMap::tilted(delta, dcap),
            Discretization::Vertical => SlitMap::vertical(delta, dcap),
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dcap(&self) -> f64 {
        self.dcap
    }

    pub fn discretization(&self) -> Discretization {
        match self.kind {
            Kind::Tilted { .. } => Discretization::Tilted,
            Kind::Vertical { .. } => Discretization::Vertical,
        }
    }

    /// Tilt exponent; 1/2 for vertical maps.
    pub fn alpha(&self) -> f64 {
        match self.kind {
            Kind::Tilted { alpha, .. } => alpha,
            Kind::Vertical { .. } => 0.5,
        }
    }

    /// Cut endpoints `(xl, xr)`: the map is analytic off `[-xl, xr]`.
    pub fn cut(&self) -> (f64, f64) {
        match self.kind {
            Kind::Tilted { xl, xr, .. } => (xl, xr),
            Kind::Vertical { half_cut } => (half_cut, half_cut),
        }
    }

    /// `max(xl, xr)`.
    pub fn cut_radius(&self) -> f64 {
        let (xl, xr) = self.cut();
        xl.max(xr)
    }

    /// Evaluates the map at `z` with `Im z >= 0`. On the real axis the value
    /// is the boundary limit from above; points inside the cut land on the
    /// slit, points outside stay real.
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self.kind {
            Kind::Tilted { alpha, xl, xr } => {
                let a = (z + xl).ln();
                let b = (z - xr).ln();
                (a * (1.0 - alpha) + b * alpha).exp()
            }
            Kind::Vertical { half_cut } => {
                (z - half_cut).sqrt() * (z + half_cut).sqrt() + self.delta
            }
        }
    }

    /// The image of the driving point: the end of the slit the map attaches
    /// to the real axis.
    pub fn tip(&self) -> Complex64 {
        match self.kind {
            Kind::Tilted { alpha, xl, xr } => {
                let modulus = ((1.0 - alpha) * xl.ln() + alpha * xr.ln()).exp();
                Complex64::from_polar(modulus, alpha * std::f64::consts::PI)
            }
            Kind::Vertical { half_cut } => Complex64::new(self.delta, half_cut),
        }
    }

    /// Real branch for `x` outside the open cut `(-xl, xr)`.
    pub fn eval_real(&self, x: f64) -> Result<f64> {
        let (xl, xr) = self.cut();
        if x > -xl && x < xr {
            return Err(Error::InsideCut { x, lo: -xl, hi: xr });
        }
        Ok(self.eval_real_unchecked(x))
    }

    /// Real branch without the cut check; callers must know `x` is outside.
    #[inline]
    pub(crate) fn eval_real_unchecked(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Tilted { alpha, xl, xr } => {
                // exp/ln form beats two powf calls; ln(0) = -inf still
                // yields the correct 0 at the cut endpoints.
                if x >= xr {
                    ((1.0 - alpha) * (x + xl).ln() + alpha * (x - xr).ln()).exp()
                } else {
                    -((1.0 - alpha) * (-x - xl).ln() + alpha * (xr - x).ln()).exp()
                }
            }
            Kind::Vertical { half_cut } => {
                // (|x|-c)(|x|+c) avoids cancellation near the cut endpoint.
                let m = ((x.abs() - half_cut) * (x.abs() + half_cut)).sqrt();
                if x >= 0.0 { m + self.delta } else { -m + self.delta }
            }
        }
    }

    /// The reflected map `u -> -h(-u)`, which swaps the two real branches.
    /// Reduces every negative-axis question to the positive axis.
    pub(crate) fn mirrored(&self) -> SlitMap {
        let kind = match self.kind {
            Kind::Tilted { alpha, xl, xr } => Kind::Tilted {
                alpha: 1.0 - alpha,
                xl: xr,
                xr: xl,
            },
            Kind::Vertical { half_cut } => Kind::Vertical { half_cut },
        };
        SlitMap {
            kind,
            delta: -self.delta,
            dcap: self.dcap,
        }
    }

    /// Inverse of the positive real branch: the `x >= xr` with
    /// `eval_real(x) = y`, clamped to `xr` when `y` is at or below the
    /// branch minimum. Used to walk cut constraints backward through a
    /// composition.
    pub(crate) fn invert_real_pos(&self, y: f64) -> f64 {
        match self.kind {
            Kind::Vertical { half_cut } => {
                if y <= self.delta {
                    half_cut
                } else {
                    (y - self.delta).hypot(half_cut)
                }
            }
            Kind::Tilted { alpha, xl, xr } => {
                if y <= 0.0 {
                    return xr;
                }
                let beta = 1.0 - alpha;
                if y >= 3.0 * xl.max(xr) {
                    return tilted_far_invert([self], [y])[0];
                }
                let ln_y = y.ln();
                // Near the cut, seed from analytic bounds
                // (x - xr <= h(x) <= x + delta) and iterate to a fixed point.
                let hi = y + xr;
                let mut x = hi.min((y - self.delta).max(small_y_guess(y, alpha, xl, xr)));
                if !(x > xr) || !x.is_finite() {
                    x = hi;
                }
                // phi(x) = (1-alpha) ln(x+xl) + alpha ln(x-xr) - ln y is
                // increasing and concave, so Newton from the right of the
                // root descends monotonically onto it; one overshoot from
                // the left lands on the right side.
                // The step is measured against the distance to the cut
                // endpoint, not against x itself: quadratic convergence makes
                // the remaining error the square of the last relative step,
                // so a 1e-6 step bound leaves nothing above rounding level in
                // either scale.
                for _ in 0..64 {
                    let phi = beta * (x + xl).ln() + alpha * (x - xr).ln() - ln_y;
                    let dphi = beta / (x + xl) + alpha / (x - xr);
                    let step = phi / dphi;
                    let next = x - step;
                    let next = if next > xr { next } else { 0.5 * (x + xr) };
                    if (next - x).abs() <= 1e-6 * (x - xr) {
                        x = next;
                        break;
                    }
                    x = next;
                }
                x.max(xr)
            }
        }
    }
}

/// Far-regime inverse of the positive real branch for tilted maps, `L`
/// independent lanes at once. Every lane must satisfy the regime guard
/// `y >= 3 * max(xl, xr)` (so in particular `y > 0`) and hold a tilted map.
///
/// Far from the cut the inverse expands as `y - d + 2D/y + d2/y^2` with
/// `d2 = d^3 + 6 d D + a4`, `a4` being the quartic coefficient of the
/// reciprocal-variable series of the map. From that seed the relative error
/// is at most a few percent, and three Newton steps on the concave
/// increasing `phi = beta ln(x+xl) + alpha ln(x-xr) - ln y` converge
/// quadratically to well under an ulp, so no convergence test is needed.
///
/// Each lane performs exactly this sequence no matter how many lanes run,
/// so batched and one-at-a-time calls agree bitwise. Batching exists purely
/// to overlap the lanes' logarithms: a single chain is bound by log latency,
/// not throughput, and the block builder inverts through many independent
/// block chains.
pub(crate) fn tilted_far_invert<const L: usize>(
    maps: [&SlitMap; L],
    y: [f64; L],
) -> [f64; L] {
    let mut alpha = [0.0; L];
    let mut xl = [0.0; L];
    let mut xr = [0.0; L];
    for l in 0..L {
        match maps[l].kind {
            Kind::Tilted { alpha: a, xl: left, xr: right } => {
                alpha[l] = a;
                xl[l] = left;
                xr[l] = right;
            }
            Kind::Vertical { .. } => unreachable!("far inversion is tilted-only"),
        }
    }
    let mut ln_y = [0.0; L];
    for l in 0..L {
        ln_y[l] = y[l].ln();
    }
    let mut x = [0.0; L];
    for l in 0..L {
        let beta = 1.0 - alpha[l];
        let a4 = {
            let a1 = -beta * xl[l];
            let a2 = 0.5 * beta * (beta + 1.0) * xl[l] * xl[l];
            let a3 = -a2 * (beta + 2.0) * xl[l] / 3.0;
            let b1 = alpha[l] * xr[l];
            let b2 = 0.5 * alpha[l] * (alpha[l] + 1.0) * xr[l] * xr[l];
            let b3 = b2 * (alpha[l] + 2.0) * xr[l] / 3.0;
            a3 + a2 * b1 + a1 * b2 + b3
        };
        let delta = maps[l].delta;
        let d2 = delta * (delta * delta + 6.0 * maps[l].dcap) + a4;
        x[l] = y[l] - delta + (2.0 * maps[l].dcap + d2 / y[l]) / y[l];
    }
    for _ in 0..3 {
        // The lanes' logs are gathered first so they issue back to back.
        let mut la = [0.0; L];
        let mut lb = [0.0; L];
        for l in 0..L {
            la[l] = (x[l] + xl[l]).ln();
            lb[l] = (x[l] - xr[l]).ln();
        }
        for l in 0..L {
            let beta = 1.0 - alpha[l];
            let phi = beta * la[l] + alpha[l] * lb[l] - ln_y[l];
            let dphi = beta / (x[l] + xl[l]) + alpha[l] / (x[l] - xr[l]);
            x[l] -= phi / dphi;
        }
    }
    for l in 0..L {
        x[l] = x[l].max(xr[l]);
    }
    x
}

/// Root estimate for `(x+xl)^(1-alpha) (x-xr)^alpha = y` when the root sits
/// just outside the cut: drop `u = x - xr` from the slowly varying factor.
fn small_y_guess(y: f64, alpha: f64, xl: f64, xr: f64) -> f64 {
    let ln_u = (y.ln() - (1.0 - alpha) * (xl + xr).ln()) / alpha;
    xr + ln_u.exp()
}

/// Builds one slit map per step from a driving sample over a partition.
pub fn maps_for_driving(
    deltas: &[f64],
    increments: &[f64],
    which: Discretization,
) -> Result<Vec<SlitMap>> {
    if deltas.len() != increments.len() {
        return Err(Error::invalid(format!(
            "{} steps but {} increments",
            deltas.len(),
            increments.len()
        )));
    }
    deltas
        .iter()
        .zip(increments)
        .map(|(&d, &inc)| SlitMap::for_step(which, inc, d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{NormalSource, SplitMix64};

    const KAPPA_LOW: f64 = 8.0 / 3.0;

    /// Root of (16+v) a^2 - (16+v) a + 4 on the half of (0,1) selected by
    /// the sign of delta, by bisection. Independent of the closed form.
    fn alpha_by_bisection(delta: f64, dcap: f64) -> f64 {
        let v = delta * delta / dcap;
        let f = |a: f64| (16.0 + v) * a * a - (16.0 + v) * a + 4.0;
        let (mut lo, mut hi) = if delta > 0.0 {
            (1e-300, 0.5)
        } else {
            (0.5, 1.0 - 1e-16)
        };
        // f > 0 at the outer edge, f <= 0 at 1/2 (equality only when v = 0).
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (flo, fmid) = (f(lo), f(mid));
            if (flo > 0.0) == (fmid > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn random_map(rng: &mut SplitMix64, which: Discretization, kappa: f64) -> SlitMap {
        // Log-uniform step sizes over the scales a trace actually uses.
        let dcap = 10f64.powf(-6.0 * rng.next_f64());
        let mut g = NormalSource::new(rng.split());
        let delta = (kappa * dcap).sqrt() * g.next();
        SlitMap::for_step(which, delta, dcap).unwrap()
    }

    #[test]
    fn alpha_matches_bisection_oracle() {
        let delta = KAPPA_LOW.sqrt();
        let a = solve_alpha(delta, 1.0).unwrap();
        assert!((a - alpha_by_bisection(delta, 1.0)).abs() < 1e-12);
        // v = 8/3 puts the root at 1/2 - 1/(2 sqrt 7).
        assert!((a - 0.311_017_763_495_386_4).abs() < 1e-13);

        let mut rng = SplitMix64::new(100);
        for _ in 0..500 {
            let delta = 4.0 * (rng.next_f64() - 0.5);
            let dcap = 10f64.powf(-4.0 * rng.next_f64());
            if delta == 0.0 {
                continue;
            }
            let a = solve_alpha(delta, dcap).unwrap();
            let oracle = alpha_by_bisection(delta, dcap);
            assert!(
                (a - oracle).abs() < 1e-12,
                "delta {delta} dcap {dcap}: {a} vs {oracle}"
            );
            let v = delta * delta / dcap;
            assert!(((16.0 + v) * a * a - (16.0 + v) * a + 4.0).abs() < 1e-12 * (16.0 + v));
        }
    }

    #[test]
    fn alpha_edge_cases() {
        assert_eq!(solve_alpha(0.0, 0.3).unwrap(), 0.5);
        // Antisymmetric in delta.
        let a_pos = solve_alpha(1.7, 0.2).unwrap();
        let a_neg = solve_alpha(-1.7, 0.2).unwrap();
        assert!((a_pos + a_neg - 1.0).abs() < 1e-15);
        assert!(a_pos < 0.5 && a_neg > 0.5);
        assert!(solve_alpha(1.0, 0.0).is_err());
        assert!(solve_alpha(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn alpha_decreases_in_delta() {
        let mut prev = f64::INFINITY;
        for i in -40..=40 {
            let a = solve_alpha(i as f64 * 0.1, 0.7).unwrap();
            assert!(a < prev || (i == -40));
            prev = a;
        }
    }

    #[test]
    fn tilted_geometry_frozen_values() {
        let m = SlitMap::tilted(KAPPA_LOW.sqrt(), 1.0).unwrap();
        let (xl, xr) = m.cut();
        assert!((xl - 2.976_743_480_397_012_8).abs() < 1e-12);
        assert!((xr - 1.343_750_318_541_560_7).abs() < 1e-12);
        // Cut endpoints multiply to 4 dcap for every tilted map.
        assert!((xl * xr - 4.0).abs() < 1e-12);
        let t = m.tip();
        assert!((t.norm() - 2.324_388_803_489_208).abs() < 1e-10);
        assert!((t.arg() - m.alpha() * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn shift_identity_round_trip() {
        // (1-alpha) xl - alpha xr must reproduce the increment: the map's
        // expansion at infinity is z + delta + O(1/z).
        let mut rng = SplitMix64::new(5);
        for _ in 0..2000 {
            let m = random_map(&mut rng, Discretization::Tilted, 6.0);
            let (xl, xr) = m.cut();
            let a = m.alpha();
            let back = (1.0 - a) * xl - a * xr;
            assert!(
                (back - m.delta()).abs() <= 1e-12 * m.delta().abs().max(m.dcap().sqrt()),
                "delta {} back {back}",
                m.delta()
            );
        }
    }

    #[test]
    fn vertical_frozen_values() {
        let m = SlitMap::vertical(0.0, 0.25).unwrap();
        assert_eq!(m.cut(), (1.0, 1.0));
        let w = m.eval(Complex64::new(0.0, 2.0));
        assert!((w - Complex64::new(0.0, 5f64.sqrt())).norm() < 1e-14);
        assert!((m.eval_real(10.0).unwrap() - 99f64.sqrt()).abs() < 1e-14);
        assert_eq!(m.tip(), Complex64::new(0.0, 1.0));

        let shifted = SlitMap::vertical(0.5, 1.0).unwrap();
        assert_eq!(shifted.tip(), Complex64::new(0.5, 2.0));
    }

    #[test]
    fn real_points_at_cut_endpoints() {
        let m = SlitMap::tilted(-0.9, 0.6).unwrap();
        let (xl, xr) = m.cut();
        assert_eq!(m.eval_real(xr).unwrap(), 0.0);
        assert_eq!(m.eval_real(-xl).unwrap(), 0.0);
        // Complex evaluation agrees at the endpoints without special cases.
        assert_eq!(m.eval(Complex64::new(xr, 0.0)).norm(), 0.0);
        let v = SlitMap::vertical(0.25, 0.09).unwrap();
        let (_, c) = v.cut();
        assert_eq!(v.eval_real(c).unwrap(), 0.25);
        assert_eq!(v.eval_real(-c).unwrap(), 0.25);
    }

    #[test]
    fn eval_real_rejects_inside_cut() {
        let m = SlitMap::tilted(1.2, 0.5).unwrap();
        let (xl, xr) = m.cut();
        assert!(matches!(
            m.eval_real(0.0),
            Err(Error::InsideCut { .. })
        ));
        assert!(m.eval_real(0.99 * xr).is_err());
        assert!(m.eval_real(-0.99 * xl).is_err());
        assert!(m.eval_real(xr).is_ok());
        assert!(m.eval_real(-xl).is_ok());
    }

    #[test]
    fn real_branch_matches_complex_boundary() {
        let mut rng = SplitMix64::new(17);
        for i in 0..4000 {
            let which = if i % 2 == 0 { Discretization::Tilted } else { Discretization::Vertical };
            let kappa = if i % 4 < 2 { KAPPA_LOW } else { 6.0 };
            let m = random_map(&mut rng, which, kappa);
            let (xl, xr) = m.cut();
            let scale = 1.0 + 3.0 * rng.next_f64();
            for x in [xr * scale, -xl * scale, xr + 10.0, -xl - 10.0] {
                let real = m.eval_real(x).unwrap();
                let cplx = m.eval(Complex64::new(x, 0.0));
                assert!(
                    (cplx.re - real).abs() <= 1e-12 * real.abs().max(1e-300),
                    "{m:?} at {x}: {} vs {real}",
                    cplx.re
                );
                assert!(cplx.im.abs() <= 1e-12 * real.abs());
            }
        }
    }

    #[test]
    fn upper_half_plane_preserved() {
        let mut rng = SplitMix64::new(23);
        for i in 0..10_000 {
            let which = if i % 2 == 0 { Discretization::Tilted } else { Discretization::Vertical };
            let m = random_map(&mut rng, which, if i % 4 < 2 { KAPPA_LOW } else { 6.0 });
            let z = Complex64::new(
                20.0 * (rng.next_f64() - 0.5),
                10f64.powf(-8.0 + 9.0 * rng.next_f64()),
            );
            let w = m.eval(z);
            assert!(w.im >= 0.0, "{m:?} sent {z} to {w}");
            assert!(w.is_finite());
        }
    }

    #[test]
    fn hydrodynamic_normalization_at_infinity() {
        let mut rng = SplitMix64::new(31);
        for i in 0..2000 {
            let which = if i % 2 == 0 { Discretization::Tilted } else { Discretization::Vertical };
            let m = random_map(&mut rng, which, 6.0);
            let theta = std::f64::consts::PI * rng.next_f64();
            let z = Complex64::from_polar(1e6, theta);
            let w = m.eval(z);
            let err = (w - z - m.delta()).norm();
            assert!(
                err <= 3.0 * m.dcap() / 1e6 + 1e-6,
                "{m:?}: asymptotic defect {err}"
            );
        }
    }

    #[test]
    fn tip_agrees_with_eval_at_zero() {
        let mut rng = SplitMix64::new(41);
        for i in 0..2000 {
            let which = if i % 2 == 0 { Discretization::Tilted } else { Discretization::Vertical };
            let m = random_map(&mut rng, which, KAPPA_LOW);
            let t = m.tip();
            let e = m.eval(Complex64::new(0.0, 0.0));
            assert!((t - e).norm() <= 1e-12 * t.norm(), "{m:?}: {t} vs {e}");
            assert!(t.im > 0.0);
        }
    }

    #[test]
    fn mirrored_swaps_branches() {
        let mut rng = SplitMix64::new(53);
        for i in 0..2000 {
            let which = if i % 2 == 0 { Discretization::Tilted } else { Discretization::Vertical };
            let m = random_map(&mut rng, which, 6.0);
            let mm = m.mirrored();
            let (xl, xr) = m.cut();
            assert_eq!(mm.cut(), (xr, xl));
            let x = xl * (1.0 + 2.0 * rng.next_f64());
            let direct = m.eval_real(-x).unwrap();
            let via_mirror = -mm.eval_real(x).unwrap();
            assert!((direct - via_mirror).abs() <= 1e-13 * direct.abs().max(1e-300));
        }
    }

    #[test]
    fn positive_branch_inverse_round_trip() {
        let mut rng = SplitMix64::new(67);
        for i in 0..4000 {
            let which = if i % 2 == 0 { Discretization::Tilted } else { Discretization::Vertical };
            let m = random_map(&mut rng, which, 6.0);
            let (_, xr) = m.cut();
            // Cover roots from hugging the cut endpoint to far away.
            let u = 10f64.powf(-12.0 + 14.0 * rng.next_f64());
            let x = xr * (1.0 + u);
            let y = m.eval_real(x).unwrap();
            let back = m.invert_real_pos(y);
            assert!(
                (back - x).abs() <= 1e-10 * x,
                "{m:?}: x {x} -> y {y} -> {back}"
            );
        }
    }

    #[test]
    fn inverse_clamps_below_branch_minimum() {
        let t = SlitMap::tilted(0.4, 0.09).unwrap();
        let (_, xr) = t.cut();
        assert_eq!(t.invert_real_pos(0.0), xr);
        assert_eq!(t.invert_real_pos(-3.0), xr);
        let v = SlitMap::vertical(-0.7, 0.04).unwrap();
        let (_, c) = v.cut();
        assert_eq!(v.invert_real_pos(v.delta()), c);
        assert_eq!(v.invert_real_pos(-10.0), c);
    }

    #[test]
    fn maps_for_driving_checks_lengths() {
        let deltas = [0.5, 0.5];
        assert!(maps_for_driving(&deltas, &[0.1], Discretization::Tilted).is_err());
        let maps = maps_for_driving(&deltas, &[0.1, -0.2], Discretization::Vertical).unwrap();
        assert_eq!(maps.len(), 2);
        assert_eq!(maps[1].delta(), -0.2);
    }
}
