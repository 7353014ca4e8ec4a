//! Closed-form evaluators for the sharp estimates: maximum height, the
//! two geodesic-curvature lower bounds, the squared-angle bound and the
//! distance-to-boundary bound.
//!
//! Everything is driven by the strictly increasing odd function `g` with
//!
//! ```text
//! g'(t) = 4H / (4H^2 + c (1 - t^2)),      g(0) = 0,
//! ```
//!
//! whose antiderivative switches between arctanh (`c > 0`), linear
//! (`c = 0`) and arctan (`c < 0`) branches. The angle bound is obtained by
//! inverting this very `g`, which keeps the two perfectly consistent no
//! matter the branch.

use crate::numerics::{quad_singular, QuadPoint, DEFAULT_QUAD_TOL};
use crate::{Error, Result};

/// Parameter tuple `(c, H, nu0, m)` subject to the standing hypotheses:
/// `H > 0`, `4H^2 + c > 0`, `-1 < nu0 <= 0` and, when present,
/// `0 < m <= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateParams {
    c: f64,
    mean_curvature: f64,
    nu0: f64,
    height_fraction: Option<f64>,
}

impl EstimateParams {
    pub fn new(c: f64, mean_curvature: f64, nu0: f64) -> Result<Self> {
        if !c.is_finite() || !mean_curvature.is_finite() || !nu0.is_finite() {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if mean_curvature <= 0.0 {
            return Err(Error::InvalidInput("mean curvature H must be positive".into()));
        }
        if 4.0 * mean_curvature * mean_curvature + c <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "4H^2 + c must be positive (got {})",
                4.0 * mean_curvature * mean_curvature + c
            )));
        }
        if !(-1.0 < nu0 && nu0 <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "boundary angle nu0 must lie in (-1, 0], got {nu0}"
            )));
        }
        Ok(EstimateParams { c, mean_curvature, nu0, height_fraction: None })
    }

    pub fn with_height_fraction(mut self, m: f64) -> Result<Self> {
        if !(m > 0.0 && m <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "height fraction m must lie in (0, 1/2], got {m}"
            )));
        }
        self.height_fraction = Some(m);
        Ok(self)
    }

    pub fn curvature(&self) -> f64 {
        self.c
    }

    pub fn mean_curvature(&self) -> f64 {
        self.mean_curvature
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn height_fraction(&self) -> Option<f64> {
        self.height_fraction
    }
}

/// The closed-form antiderivative `g(t)` on `[-1, 1]`.
pub fn g_value(params: &EstimateParams, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("g is defined on [-1, 1], got t = {t}")));
    }
    Ok(g_raw(params.c, params.mean_curvature, t))
}

fn g_raw(c: f64, h: f64, t: f64) -> f64 {
    if c == 0.0 {
        return t / h;
    }
    let a = (4.0 * h * h + c).sqrt();
    if c > 0.0 {
        let sc = c.sqrt();
        (4.0 * h / (sc * a)) * (t * sc / a).atanh()
    } else {
        let sc = (-c).sqrt();
        (4.0 * h / (sc * a)) * (t * sc / a).atan()
    }
}

/// Maximum height `alpha(c, H, nu0) = g(1) + g(nu0)` reachable by an
/// H-graph with boundary angle `nu0` in a slice.
pub fn alpha_max(params: &EstimateParams) -> f64 {
    g_raw(params.c, params.mean_curvature, 1.0)
        + g_raw(params.c, params.mean_curvature, params.nu0)
}

/// Lower bound for the boundary geodesic curvature of an H-graph with
/// capillarity angle `nu0`:
/// `(-4H^2 + c (1 - nu0^2)) / (4H sqrt(1 - nu0^2))`.
///
/// For `nu0 = 0` the expression is evaluated as `-H + c/(4H)` so the
/// reduction holds exactly in floating point.
pub fn kappa_lower_general(params: &EstimateParams) -> f64 {
    let (c, h, nu0) = (params.c, params.mean_curvature, params.nu0);
    if nu0 == 0.0 {
        return -h + c / (4.0 * h);
    }
    let s = 1.0 - nu0 * nu0;
    (-4.0 * h * h + c * s) / (4.0 * h * s.sqrt())
}

/// Improved lower bound under the height restriction
/// `|h| <= m * alpha(c, H, nu0)`:
/// `((4 - 8m) H^2 + c (1 - nu0^2)) / (4 m H sqrt(1 - nu0^2))`.
///
/// At `m = 1/2`, `nu0 = 0` the expression is evaluated as `c/(2H)` so the
/// equality case of the tori and cylinders is exact.
pub fn kappa_lower_height(params: &EstimateParams) -> Result<f64> {
    let m = params.height_fraction.ok_or_else(|| {
        Error::InvalidInput("height-restricted bound needs the fraction m".into())
    })?;
    let (c, h, nu0) = (params.c, params.mean_curvature, params.nu0);
    if m == 0.5 && nu0 == 0.0 {
        return Ok(c / (2.0 * h));
    }
    let s = 1.0 - nu0 * nu0;
    Ok(((4.0 - 8.0 * m) * h * h + c * s) / (4.0 * m * h * s.sqrt()))
}

/// The pointwise angle bound `zeta(s, nu0)`: the squared angle function of
/// any such graph at height `s` satisfies `nu^2 >= zeta(s, nu0)`.
///
/// Defined as `(g^{-1}(s - g(nu0)))^2`, which reproduces the tanh / linear
/// / tan branches with the assignment inherited from `g`.
pub fn zeta(params: &EstimateParams, s: f64) -> Result<f64> {
    let alpha = alpha_max(params);
    if !(-1e-12..=alpha + 1e-12).contains(&s) {
        return Err(Error::Domain(format!(
            "height {s} outside [0, alpha = {alpha}]"
        )));
    }
    let u = s - g_raw(params.c, params.mean_curvature, params.nu0);
    let t = g_inverse(params.c, params.mean_curvature, u);
    Ok(t * t)
}

fn g_inverse(c: f64, h: f64, u: f64) -> f64 {
    if c == 0.0 {
        return h * u;
    }
    let a = (4.0 * h * h + c).sqrt();
    if c > 0.0 {
        let sc = c.sqrt();
        (a / sc) * (u * sc * a / (4.0 * h)).tanh()
    } else {
        let sc = (-c).sqrt();
        (a / sc) * (u * sc * a / (4.0 * h)).tan()
    }
}

/// `1 - zeta(s, nu0)` evaluated from the distance `w = alpha - s` to the
/// ceiling height, without cancellation. This is the square of the speed
/// factor in the distance bound and vanishes linearly at `w = 0`.
fn one_minus_zeta_from_top(params: &EstimateParams, w: f64) -> f64 {
    let (c, h) = (params.c, params.mean_curvature);
    if c == 0.0 {
        let t = 1.0 - h * w; // g^{-1}(g(1) - w)
        return (h * w) * (1.0 + t);
    }
    let a = (4.0 * h * h + c).sqrt();
    if c > 0.0 {
        let sc = c.sqrt();
        let lam = sc * a / (4.0 * h);
        let g1a = (sc / a).atanh(); // lam * g(1)
        let tau = (a / sc) * (g1a - lam * w).tanh();
        // 1 - tau = (a/sc) [tanh(g1a) - tanh(g1a - lam w)]
        let one_minus_tau =
            (a / sc) * (lam * w).sinh() / (g1a.cosh() * (g1a - lam * w).cosh());
        one_minus_tau * (1.0 + tau)
    } else {
        let sc = (-c).sqrt();
        let lam = sc * a / (4.0 * h);
        let g1a = (sc / a).atan();
        let tau = (a / sc) * (g1a - lam * w).tan();
        let one_minus_tau =
            (a / sc) * (lam * w).sin() / (g1a.cos() * (g1a - lam * w).cos());
        one_minus_tau * (1.0 + tau)
    }
}

/// Sharp lower bound for the intrinsic distance from an interior point at
/// height `h_point` to the boundary:
/// the integral of `1/sqrt(1 - zeta(s, nu0))` over `[0, h_point]`.
///
/// The integrand blows up like an inverse square root as `s` approaches
/// the maximum height, which the tanh-sinh rule absorbs.
pub fn distance_lower_bound(params: &EstimateParams, h_point: f64) -> Result<f64> {
    let alpha = alpha_max(params);
    if !(-1e-12..=alpha + 1e-12).contains(&h_point) {
        return Err(Error::Domain(format!(
            "height {h_point} outside [0, alpha = {alpha}]"
        )));
    }
    if h_point <= 0.0 {
        return Ok(0.0);
    }
    let gap = (alpha - h_point).max(0.0);
    let p = *params;
    quad_singular(
        move |qp: &QuadPoint| {
            let w = gap + qp.from_b;
            1.0 / one_minus_zeta_from_top(&p, w).sqrt()
        },
        0.0,
        h_point,
        DEFAULT_QUAD_TOL,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad_fn;
    use proptest::prelude::*;

    fn p(c: f64, h: f64, nu0: f64) -> EstimateParams {
        EstimateParams::new(c, h, nu0).unwrap()
    }

    // frozen reference values (30-digit evaluation of the closed forms)
    const ALPHA_S2_H1: f64 = 0.860_817_881_928_008_1;
    const ALPHA_H2_H1: f64 = 1.209_199_576_156_145_2; // 2 pi / (3 sqrt 3)
    const KAPPA_M1_HALF: f64 = -1.371_206_889_325_361_3; // -19/(8 sqrt 3)
    const DIST_C1_H1_FULL: f64 = 1.404_962_946_208_145_2;
    const DIST_CM1_H1_FULL: f64 = 1.813_799_364_234_218;
    const DIST_CM1_H1_HALF: f64 = 0.628_258_829_711_550_7;

    #[test]
    fn params_validation() {
        assert!(EstimateParams::new(-4.0, 1.0, 0.0).is_err()); // 4H^2+c = 0
        assert!(EstimateParams::new(1.0, 0.0, 0.0).is_err());
        assert!(EstimateParams::new(1.0, 1.0, 0.5).is_err());
        assert!(EstimateParams::new(1.0, 1.0, -1.0).is_err());
        assert!(p(1.0, 1.0, 0.0).with_height_fraction(0.7).is_err());
        assert!(p(1.0, 1.0, 0.0).with_height_fraction(0.0).is_err());
    }

    #[test]
    fn g_examples() {
        let any = p(-2.0, 1.3, -0.4);
        assert_eq!(g_value(&any, 0.0).unwrap(), 0.0);
        assert!((g_value(&p(0.0, 1.0, 0.0), 1.0).unwrap() - 1.0).abs() < 1e-15);
        // c = -1, H = 1, t = 1: (4/sqrt3) atan(1/sqrt3) = 2 pi/(3 sqrt 3)
        let g = g_value(&p(-1.0, 1.0, 0.0), 1.0).unwrap();
        assert!((g - ALPHA_H2_H1).abs() < 1e-15, "got {g:.17}");
        assert!(g_value(&any, 1.5).is_err());
    }

    #[test]
    fn g_matches_quadrature_of_its_derivative() {
        // independent route: integrate g' numerically
        for (c, h, t) in [(0.0, 1.0, 1.0), (1.0, 0.7, 0.9), (-1.0, 0.8, -0.6), (2.5, 1.1, 0.5)] {
            let params = p(c, h, 0.0);
            let gq = quad_fn(
                |s| 4.0 * h / (4.0 * h * h + c * (1.0 - s * s)),
                0.0,
                t,
                1e-13,
            )
            .unwrap();
            let gc = g_value(&params, t).unwrap();
            assert!((gq - gc).abs() < 1e-12, "c={c} h={h} t={t}: {gq} vs {gc}");
        }
    }

    #[test]
    fn alpha_examples() {
        assert!((alpha_max(&p(0.0, 1.0, 0.0)) - 1.0).abs() < 1e-15);
        let a = alpha_max(&p(1.0, 1.0, 0.0));
        assert!((a - ALPHA_S2_H1).abs() < 1e-15, "got {a:.17}");
        // nu0 -> -1 makes the two terms cancel
        let a = alpha_max(&p(2.0, 0.9, -1.0 + 1e-12));
        assert!(a.abs() < 1e-11);
    }

    #[test]
    fn alpha_is_g1_plus_g_nu0_exactly() {
        for (c, h, nu0) in [(1.0, 1.0, -0.3), (-1.0, 0.8, -0.9), (0.0, 2.0, -0.5), (3.0, 0.4, 0.0)] {
            let params = p(c, h, nu0);
            let lhs = alpha_max(&params);
            let rhs = g_value(&params, 1.0).unwrap() + g_value(&params, nu0).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn alpha_matches_independent_transcription() {
        // the three-branch formula written out directly, as published
        fn alpha_direct(c: f64, h: f64, nu0: f64) -> f64 {
            if c == 0.0 {
                return (1.0 + nu0) / h;
            }
            if c < 0.0 {
                let d = (-4.0 * c * h * h - c * c).sqrt();
                let r = (c + 4.0 * h * h).sqrt();
                (4.0 * h / d) * (((-c).sqrt() / r).atan() + (nu0 * (-c).sqrt() / r).atan())
            } else {
                let d = (4.0 * c * h * h + c * c).sqrt();
                let r = (c + 4.0 * h * h).sqrt();
                (4.0 * h / d) * ((c.sqrt() / r).atanh() + (nu0 * c.sqrt() / r).atanh())
            }
        }
        for (c, h, nu0) in [
            (1.0, 1.0, 0.0),
            (1.0, 0.7, -0.4),
            (-1.0, 0.8, -0.2),
            (0.0, 1.3, -0.6),
            (2.5, 0.5, -0.9),
        ] {
            let a = alpha_max(&p(c, h, nu0));
            assert!(
                (a - alpha_direct(c, h, nu0)).abs() < 1e-12,
                "c={c} h={h} nu0={nu0}"
            );
        }
    }

    #[test]
    fn kappa_bounds_examples() {
        assert_eq!(kappa_lower_general(&p(1.0, 1.0, 0.0)), -0.75);
        assert_eq!(kappa_lower_general(&p(0.0, 1.7, 0.0)), -1.7);
        let k = kappa_lower_general(&p(-1.0, 1.0, -0.5));
        assert!((k - KAPPA_M1_HALF).abs() < 1e-15, "got {k:.17}");

        let torus = p(1.0, 1.0, 0.0).with_height_fraction(0.5).unwrap();
        assert_eq!(kappa_lower_height(&torus).unwrap(), 0.5);
        let cyl = p(-1.0, 1.0, 0.0).with_height_fraction(0.5).unwrap();
        assert_eq!(kappa_lower_height(&cyl).unwrap(), -0.5);
        let quarter = p(0.0, 1.0, 0.0).with_height_fraction(0.25).unwrap();
        assert_eq!(kappa_lower_height(&quarter).unwrap(), 2.0);
    }

    #[test]
    fn exact_reductions_at_nu0_zero() {
        for (c, h) in [(1.0, 1.0), (-1.0, 0.9), (0.0, 2.0), (2.0, 0.6)] {
            assert_eq!(kappa_lower_general(&p(c, h, 0.0)), -h + c / (4.0 * h));
            let half = p(c, h, 0.0).with_height_fraction(0.5).unwrap();
            assert_eq!(kappa_lower_height(&half).unwrap(), c / (2.0 * h));
        }
    }

    #[test]
    fn height_bound_dominates_general_bound() {
        // monotone in m on (0, 1/2]
        for (c, h, nu0) in [(1.0, 1.0, 0.0), (-1.0, 0.8, -0.3), (0.0, 1.5, -0.6)] {
            let base = kappa_lower_general(&p(c, h, nu0));
            let mut prev = f64::INFINITY;
            for m in [0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
                let k = kappa_lower_height(&p(c, h, nu0).with_height_fraction(m).unwrap())
                    .unwrap();
                assert!(k >= base - 1e-12, "m={m}");
                assert!(k <= prev + 1e-12, "bound should decrease in m");
                prev = k;
            }
        }
    }

    #[test]
    fn zeta_examples_and_round_trip() {
        let flat = p(0.0, 1.0, 0.0);
        assert_eq!(zeta(&flat, 0.0).unwrap(), 0.0);
        assert!((zeta(&flat, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((zeta(&flat, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(zeta(&flat, 1.5).is_err());

        // round trip zeta(g(t) + g(nu0)) = t^2 on a 100-point grid
        for (c, h, nu0) in [
            (1.0, 1.0, 0.0),
            (1.0, 0.5, -0.7),
            (-1.0, 0.7, 0.0),
            (-1.0, 1.3, -0.4),
            (0.0, 1.0, -0.2),
            (3.0, 0.8, -0.9),
        ] {
            let params = p(c, h, nu0);
            let gn = g_value(&params, nu0).unwrap();
            for i in 0..100 {
                let t = i as f64 / 100.0;
                let s = g_value(&params, t).unwrap() + gn;
                if s < 0.0 {
                    continue; // below the slice, outside zeta's domain
                }
                let z = zeta(&params, s).unwrap();
                assert!(
                    (z - t * t).abs() < 1e-10,
                    "c={c} h={h} nu0={nu0} t={t}: {z} vs {}",
                    t * t
                );
            }
        }
    }

    #[test]
    fn one_minus_zeta_is_cancellation_free() {
        // agree with the plain evaluation away from the top, stay positive
        // and linear near it
        for (c, h) in [(1.0, 1.0), (-1.0, 0.8), (0.0, 1.2)] {
            let params = p(c, h, 0.0);
            let alpha = alpha_max(&params);
            for frac in [0.1, 0.4, 0.8, 0.99] {
                let s = frac * alpha;
                let plain = 1.0 - zeta(&params, s).unwrap();
                let safe = one_minus_zeta_from_top(&params, alpha - s);
                assert!((plain - safe).abs() < 1e-15 + 1e-15 / (1.0 - frac), "c={c} frac={frac}");
            }
            let tiny = one_minus_zeta_from_top(&params, 1e-300);
            assert!(tiny > 0.0 && tiny < 1e-290);
        }
    }

    #[test]
    fn distance_bound_examples() {
        let flat = p(0.0, 1.0, 0.0);
        assert_eq!(distance_lower_bound(&flat, 0.0).unwrap(), 0.0);
        let full = distance_lower_bound(&flat, 1.0).unwrap();
        assert!(
            (full - std::f64::consts::FRAC_PI_2).abs() < 1e-10,
            "got {full:.17}"
        );
        let half = distance_lower_bound(&flat, 0.5).unwrap();
        assert!((half - std::f64::consts::FRAC_PI_6).abs() < 1e-11);

        // frozen high-precision references for the curved branches
        let s2 = p(1.0, 1.0, 0.0);
        let d = distance_lower_bound(&s2, alpha_max(&s2)).unwrap();
        assert!((d - DIST_C1_H1_FULL).abs() < 1e-9, "got {d:.17}");
        let h2 = p(-1.0, 1.0, 0.0);
        let d = distance_lower_bound(&h2, alpha_max(&h2)).unwrap();
        assert!((d - DIST_CM1_H1_FULL).abs() < 1e-9, "got {d:.17}");
        let d = distance_lower_bound(&h2, alpha_max(&h2) / 2.0).unwrap();
        assert!((d - DIST_CM1_H1_HALF).abs() < 1e-10, "got {d:.17}");
    }

    #[test]
    fn distance_bound_increases_with_height() {
        let params = p(1.0, 0.7, -0.3);
        let alpha = alpha_max(&params);
        let mut prev = 0.0;
        for i in 1..=20 {
            let h = alpha * i as f64 / 20.0;
            let d = distance_lower_bound(&params, h).unwrap();
            assert!(d > prev, "not increasing at h = {h}");
            prev = d;
        }
    }

    #[test]
    fn branches_are_continuous_at_c_zero() {
        // |c| = 1e-6 must agree with the flat branch to 1e-6 relative
        let flat = p(0.0, 1.0, -0.25);
        for c in [1e-6, -1e-6] {
            let params = p(c, 1.0, -0.25);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-30);
            assert!(rel(alpha_max(&params), alpha_max(&flat)) < 1e-6);
            assert!(rel(
                g_value(&params, 0.7).unwrap(),
                g_value(&flat, 0.7).unwrap()
            ) < 1e-6);
            assert!(rel(
                zeta(&params, 0.4).unwrap(),
                zeta(&flat, 0.4).unwrap()
            ) < 1e-6);
            assert!(rel(
                kappa_lower_general(&params),
                kappa_lower_general(&flat)
            ) < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn g_is_odd_and_increasing(
            t in 0.0..1.0f64,
            c in -0.9..4.0f64,
            h in 0.5..2.0f64,
        ) {
            let params = p(c, h, 0.0);
            let gp = g_value(&params, t).unwrap();
            let gm = g_value(&params, -t).unwrap();
            prop_assert!((gp + gm).abs() <= 1e-15 * (1.0 + gp.abs()));
            if t > 1e-3 {
                prop_assert!(gp > g_value(&params, t - 1e-3).unwrap());
            }
        }
    }
}
