//! Numerical differential geometry of immersed surfaces in
//! `M^2(c) x R`: fundamental forms, mean curvature, angle function,
//! squared gradient of the angle and the Abresch-Rosenberg density.
//!
//! Tangents and second derivatives are taken in the flat embedding space
//! (Euclidean 4-space, Minkowski for `c < 0`, 3-space for `c = 0`);
//! covariant data follows by projecting away the quadric normal. The unit
//! normal is oriented so that the computed mean curvature is positive,
//! which on graphs coincides with the angle function being nonpositive.
//!
//! Invariant surfaces are sampled through their one-parameter isometry
//! group: only the generating curve is differenced numerically, while all
//! orbit derivatives come from the (linear) group action. This keeps the
//! conditioning uniform up to the rotation axis, where a naive
//! two-parameter stencil loses most of its digits.

use crate::modelspace::{AmbientPoint, SpaceForm};
use crate::numerics::quad_fn;
use crate::profiles::ProfileCurve;
use crate::{Error, Result};

/// Default profile-direction step for the invariant-surface sampler.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

type V4 = [f64; 4];
type M4 = [[f64; 4]; 4];

/// Pointwise geometric data of a sampled surface.
#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub position: AmbientPoint,
    /// Height of the point.
    pub h: f64,
    /// Angle function: inner product of the unit normal with the vertical.
    pub nu: f64,
    /// First fundamental form coefficients `(E, F, G)`.
    pub first_form: (f64, f64, f64),
    /// Second fundamental form coefficients `(e, f, g)`.
    pub second_form: (f64, f64, f64),
    pub mean_curvature: f64,
    /// Determinant of the shape operator (product of principal curvatures).
    pub det_a: f64,
    /// Squared norm of the surface gradient of the angle function.
    pub grad_nu_sq: f64,
    /// Abresch-Rosenberg density: vanishes identically on rotational
    /// spheres and is constant along orbits of every invariant family.
    pub q: f64,
    pub(crate) dh_chart: (f64, f64),
}

/// First and second derivatives of an immersion at one point.
struct Jets {
    x: V4,
    xp: V4,
    xo: V4,
    xpp: V4,
    xpo: V4,
    xoo: V4,
}

/// Jets of a one-parameter isometry action `u -> M(u) x + a(u)`.
#[derive(Debug, Clone, Copy)]
pub struct OrbitJets {
    pub m: M4,
    pub m1: M4,
    pub m2: M4,
    pub a: V4,
    pub a1: V4,
    pub a2: V4,
}

const ZERO4: V4 = [0.0; 4];
const ID4: M4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

impl OrbitJets {
    pub fn apply(&self, g: &V4) -> V4 {
        let mut out = matvec(&self.m, g);
        for i in 0..4 {
            out[i] += self.a[i];
        }
        out
    }

    /// Rotation in the `(x, y)` slots.
    pub fn rotation_xy(u: f64) -> Self {
        let (s, c) = u.sin_cos();
        let mut m = ID4;
        m[0][0] = c;
        m[0][1] = -s;
        m[1][0] = s;
        m[1][1] = c;
        let mut m1 = [[0.0; 4]; 4];
        m1[0][0] = -s;
        m1[0][1] = -c;
        m1[1][0] = c;
        m1[1][1] = -s;
        let mut m2 = [[0.0; 4]; 4];
        m2[0][0] = -c;
        m2[0][1] = s;
        m2[1][0] = -s;
        m2[1][1] = -c;
        OrbitJets { m, m1, m2, a: ZERO4, a1: ZERO4, a2: ZERO4 }
    }

    /// Lorentz boost in the `(x, z)` slots: the hyperbolic translations of
    /// the hyperboloid model.
    pub fn lorentz_boost_xz(u: f64) -> Self {
        let (ch, sh) = (u.cosh(), u.sinh());
        let mut m = ID4;
        m[0][0] = ch;
        m[0][2] = sh;
        m[2][0] = sh;
        m[2][2] = ch;
        let mut m1 = [[0.0; 4]; 4];
        m1[0][0] = sh;
        m1[0][2] = ch;
        m1[2][0] = ch;
        m1[2][2] = sh;
        let mut m2 = [[0.0; 4]; 4];
        m2[0][0] = ch;
        m2[0][2] = sh;
        m2[2][0] = sh;
        m2[2][2] = ch;
        OrbitJets { m, m1, m2, a: ZERO4, a1: ZERO4, a2: ZERO4 }
    }

    /// Parabolic isometry of the hyperboloid model: `exp(u K)` for the
    /// nilpotent generator `K` with `K^3 = 0`.
    pub fn parabolic(u: f64) -> Self {
        let k: M4 = [
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        let k2: M4 = [
            [-1.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [-1.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        let mut m = ID4;
        let mut m1 = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += u * k[i][j] + 0.5 * u * u * k2[i][j];
                m1[i][j] = k[i][j] + u * k2[i][j];
            }
        }
        OrbitJets { m, m1, m2: k2, a: ZERO4, a1: ZERO4, a2: ZERO4 }
    }

    /// Translation along the `x` slot (flat cylinders).
    pub fn translation_x(u: f64) -> Self {
        OrbitJets {
            m: ID4,
            m1: [[0.0; 4]; 4],
            m2: [[0.0; 4]; 4],
            a: [u, 0.0, 0.0, 0.0],
            a1: [1.0, 0.0, 0.0, 0.0],
            a2: ZERO4,
        }
    }
}

/// A surface swept by a one-parameter isometry group applied to a
/// generating curve.
pub trait InvariantSurface {
    fn space_form(&self) -> SpaceForm;
    fn mean_curvature(&self) -> f64;
    fn param_domain(&self) -> (f64, f64);
    fn orbit_range(&self) -> (f64, f64);
    /// Generating curve in ambient coordinates `[x, y, z, t]`.
    fn generator(&self, param: f64) -> V4;
    fn orbit_jets(&self, orbit: f64) -> OrbitJets;
}

fn matvec(m: &M4, v: &V4) -> V4 {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2] + m[i][3] * v[3];
    }
    out
}

fn metric(sf: SpaceForm) -> V4 {
    if sf.curvature() < 0.0 {
        [1.0, 1.0, -1.0, 1.0]
    } else {
        [1.0, 1.0, 1.0, 1.0]
    }
}

fn ip(g: &V4, u: &V4, v: &V4) -> f64 {
    g[0] * u[0] * v[0] + g[1] * u[1] * v[1] + g[2] * u[2] * v[2] + g[3] * u[3] * v[3]
}

/// Raw (orientation-unfixed) unit normal within the product manifold.
fn raw_normal(sf: SpaceForm, x: &V4, xp: &V4, xo: &V4) -> Result<V4> {
    let c = sf.curvature();
    let n = if c == 0.0 {
        // genuine 3-space (x, y, t): ordinary cross product
        let a = [xp[0], xp[1], xp[3]];
        let b = [xo[0], xo[1], xo[3]];
        let n3 = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        [n3[0], n3[1], 0.0, n3[2]]
    } else {
        // nullspace of the rows G xp, G xo, G n_M via 3x3 cofactors
        let g = metric(sf);
        let nm = [x[0], x[1], x[2], 0.0];
        let rows = [
            [g[0] * xp[0], g[1] * xp[1], g[2] * xp[2], g[3] * xp[3]],
            [g[0] * xo[0], g[1] * xo[1], g[2] * xo[2], g[3] * xo[3]],
            [g[0] * nm[0], g[1] * nm[1], g[2] * nm[2], 0.0],
        ];
        let minor = |skip: usize| -> f64 {
            let mut cols = [0usize; 3];
            let mut k = 0;
            for j in 0..4 {
                if j != skip {
                    cols[k] = j;
                    k += 1;
                }
            }
            det3([
                [rows[0][cols[0]], rows[0][cols[1]], rows[0][cols[2]]],
                [rows[1][cols[0]], rows[1][cols[1]], rows[1][cols[2]]],
                [rows[2][cols[0]], rows[2][cols[1]], rows[2][cols[2]]],
            ])
        };
        [minor(0), -minor(1), minor(2), -minor(3)]
    };
    let g = metric(sf);
    let nn = ip(&g, &n, &n).abs();
    if nn < 1e-28 {
        return Err(Error::SingularParametrization(
            "normal direction is numerically degenerate".into(),
        ));
    }
    let inv = 1.0 / nn.sqrt();
    Ok([n[0] * inv, n[1] * inv, n[2] * inv, n[3] * inv])
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn assemble(
    sf: SpaceForm,
    jets: &Jets,
    dnu_raw: (f64, f64),
    nu_raw_center: f64,
    n_raw: &V4,
) -> Result<SurfaceSample> {
    let g = metric(sf);
    let c = sf.curvature();
    let e1 = ip(&g, &jets.xp, &jets.xp);
    let f1 = ip(&g, &jets.xp, &jets.xo);
    let g1 = ip(&g, &jets.xo, &jets.xo);
    let w = e1 * g1 - f1 * f1;
    if w < 1e-14 {
        return Err(Error::SingularParametrization(format!(
            "EG - F^2 = {w:.3e} below threshold"
        )));
    }
    // second form against the raw normal, then orient for positive mean
    // curvature
    let e2 = ip(&g, &jets.xpp, n_raw);
    let f2 = ip(&g, &jets.xpo, n_raw);
    let g2 = ip(&g, &jets.xoo, n_raw);
    let hm_raw = (e2 * g1 - 2.0 * f2 * f1 + g2 * e1) / (2.0 * w);
    let flip = if hm_raw < 0.0 { -1.0 } else { 1.0 };
    let (e2, f2, g2, hm) = (flip * e2, flip * f2, flip * g2, flip * hm_raw);
    let nu = flip * nu_raw_center;
    let dnu = (flip * dnu_raw.0, flip * dnu_raw.1);

    let det_a = (e2 * g2 - f2 * f2) / w;
    let grad_nu_sq = (g1 * dnu.0 * dnu.0 - 2.0 * f1 * dnu.0 * dnu.1 + e1 * dnu.1 * dnu.1) / w;
    let one_m = 1.0 - nu * nu;
    let q = 4.0 * hm * hm * (hm * hm - det_a) + 0.25 * c * c * one_m * one_m
        - c * (grad_nu_sq - (2.0 * hm * hm - det_a) * one_m);

    let position = AmbientPoint::new_unchecked(sf, [jets.x[0], jets.x[1], jets.x[2]], jets.x[3]);
    Ok(SurfaceSample {
        position,
        h: jets.x[3],
        nu,
        first_form: (e1, f1, g1),
        second_form: (e2, f2, g2),
        mean_curvature: hm,
        det_a,
        grad_nu_sq,
        q,
        dh_chart: (jets.xp[3], jets.xo[3]),
    })
}

fn d1_5pt<F: Fn(f64) -> V4>(f: &F, x: f64, h: f64) -> V4 {
    let (m2, m1, p1, p2) = (f(x - 2.0 * h), f(x - h), f(x + h), f(x + 2.0 * h));
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
    }
    out
}

fn d2_5pt<F: Fn(f64) -> V4>(f: &F, x: f64, h: f64) -> V4 {
    let (m2, m1, c0, p1, p2) =
        (f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h));
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] =
            (-m2[i] + 16.0 * m1[i] - 30.0 * c0[i] + 16.0 * p1[i] - p2[i]) / (12.0 * h * h);
    }
    out
}

fn scalar_d1_5pt(vals: [f64; 4], h: f64) -> f64 {
    // vals at x - 2h, x - h, x + h, x + 2h
    (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h)
}

/// Sample an invariant surface at `(param, orbit)`.
///
/// Only the generating curve is differenced (step `step`); orbit
/// derivatives are exact, so geometric scalars inherit the invariance of
/// the group action to rounding accuracy.
pub fn sample_invariant<S: InvariantSurface + ?Sized>(
    surface: &S,
    param: f64,
    orbit: f64,
    step: f64,
) -> Result<SurfaceSample> {
    let sf = surface.space_form();
    let gen = |p: f64| surface.generator(p);
    let g0 = gen(param);
    let g1 = d1_5pt(&gen, param, step);
    let g2 = d2_5pt(&gen, param, step);
    let j = surface.orbit_jets(orbit);

    let jets = Jets {
        x: j.apply(&g0),
        xp: matvec(&j.m, &g1),
        xo: add4(matvec(&j.m1, &g0), j.a1),
        xpp: matvec(&j.m, &g2),
        xpo: matvec(&j.m1, &g1),
        xoo: add4(matvec(&j.m2, &g0), j.a2),
    };

    let n_raw = raw_normal(sf, &jets.x, &jets.xp, &jets.xo)?;
    let gmet = metric(sf);
    let nu_raw = |p: f64, jo: &OrbitJets| -> Result<f64> {
        let gp = gen(p);
        let gp1 = d1_5pt(&gen, p, step);
        let x = jo.apply(&gp);
        let xp = matvec(&jo.m, &gp1);
        let xo = add4(matvec(&jo.m1, &gp), jo.a1);
        let n = raw_normal(sf, &x, &xp, &xo)?;
        Ok(ip(&gmet, &n, &[0.0, 0.0, 0.0, 1.0]))
    };

    // angle-function derivatives in the chart
    let mut vals_p = [0.0; 4];
    for (k, dp) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
        vals_p[k] = nu_raw(param + dp * step, &j)?;
    }
    let mut vals_o = [0.0; 4];
    for (k, du) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
        vals_o[k] = nu_raw(param, &surface.orbit_jets(orbit + du * step))?;
    }
    let dnu_raw = (
        scalar_d1_5pt(vals_p, step),
        scalar_d1_5pt(vals_o, step),
    );
    let nu0 = ip(&gmet, &n_raw, &[0.0, 0.0, 0.0, 1.0]);
    assemble(sf, &jets, dnu_raw, nu0, &n_raw)
}

fn add4(mut a: V4, b: V4) -> V4 {
    for i in 0..4 {
        a[i] += b[i];
    }
    a
}

/// Fundamental forms of a generic parametrized surface via two-parameter
/// central differences, with a step-halving consistency check.
pub fn fundamental_forms_at<F>(surface: F, at: (f64, f64), step: f64) -> Result<SurfaceSample>
where
    F: Fn(f64, f64) -> AmbientPoint,
{
    let s_full = generic_sample(&surface, at, step)?;
    let s_half = generic_sample(&surface, at, step / 2.0)?;
    let (h1, h2) = (s_full.mean_curvature, s_half.mean_curvature);
    if (h1 - h2).abs() > 1e-4 * (1.0 + h2.abs()) {
        return Err(Error::Accuracy(format!(
            "step {step:.3e} does not resolve the curvature: H = {h1:.8e} vs {h2:.8e}"
        )));
    }
    Ok(s_half)
}

fn generic_sample<F>(surface: &F, at: (f64, f64), step: f64) -> Result<SurfaceSample>
where
    F: Fn(f64, f64) -> AmbientPoint,
{
    let probe = surface(at.0, at.1);
    let sf = probe.space_form();
    let v4 = |p: f64, o: f64| -> V4 {
        let a = surface(p, o);
        let b = a.base();
        [b[0], b[1], b[2], a.height()]
    };
    let (p0, o0) = at;
    let jets = Jets {
        x: v4(p0, o0),
        xp: d1_5pt(&|p| v4(p, o0), p0, step),
        xo: d1_5pt(&|o| v4(p0, o), o0, step),
        xpp: d2_5pt(&|p| v4(p, o0), p0, step),
        xoo: d2_5pt(&|o| v4(p0, o), o0, step),
        xpo: {
            let dp_at = |o: f64| d1_5pt(&|p| v4(p, o), p0, step);
            d1_5pt(&dp_at, o0, step)
        },
    };
    let n_raw = raw_normal(sf, &jets.x, &jets.xp, &jets.xo)?;
    let gmet = metric(sf);
    let nu_raw = |p: f64, o: f64| -> Result<f64> {
        let x = v4(p, o);
        let xp = d1_5pt(&|pp| v4(pp, o), p, step);
        let xo = d1_5pt(&|oo| v4(p, oo), o, step);
        let n = raw_normal(sf, &x, &xp, &xo)?;
        Ok(ip(&gmet, &n, &[0.0, 0.0, 0.0, 1.0]))
    };
    let mut vals_p = [0.0; 4];
    let mut vals_o = [0.0; 4];
    for (k, d) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
        vals_p[k] = nu_raw(p0 + d * step, o0)?;
        vals_o[k] = nu_raw(p0, o0 + d * step)?;
    }
    let dnu_raw = (scalar_d1_5pt(vals_p, step), scalar_d1_5pt(vals_o, step));
    let nu0 = ip(&gmet, &n_raw, &[0.0, 0.0, 0.0, 1.0]);
    assemble(sf, &jets, dnu_raw, nu0, &n_raw)
}

/// Maximum of `|H_num - H|` over a `grid x grid` interior lattice: the
/// master CMC verification for a generated family.
pub fn mean_curvature_residual<S: InvariantSurface + ?Sized>(
    surface: &S,
    grid: usize,
) -> Result<f64> {
    if grid < 16 {
        return Err(Error::InvalidInput("grid must be at least 16".into()));
    }
    let (a, b) = surface.param_domain();
    let (ua, ub) = surface.orbit_range();
    let h_expect = surface.mean_curvature();
    let mut worst = 0.0f64;
    for i in 0..grid {
        let p = a + (b - a) * (i + 1) as f64 / (grid + 1) as f64;
        for k in 0..grid {
            let u = ua + (ub - ua) * (k + 1) as f64 / (grid + 1) as f64;
            let s = sample_invariant(surface, p, u, DEFAULT_FD_STEP)?;
            worst = worst.max((s.mean_curvature - h_expect).abs());
        }
    }
    Ok(worst)
}

/// Angle function at the two profile endpoints, by one-sided differences.
/// Bigraphs meet the slice orthogonally, so both values must vanish.
pub fn angle_at_boundary(curve: &ProfileCurve) -> Result<[f64; 2]> {
    if !curve.is_bigraph() {
        return Err(Error::InvalidInput(
            "boundary angle is defined for bigraph families".into(),
        ));
    }
    let sf = InvariantSurface::space_form(curve);
    let gmet = metric(sf);
    let (a, b) = curve.param_domain();
    let step = DEFAULT_FD_STEP;
    let orbit = 0.4 * (curve.orbit_range().0 + curve.orbit_range().1) / 2.0 + 0.1;
    let j = curve.orbit_jets(orbit);
    let mut out = [0.0; 2];
    for (idx, (p0, dir)) in [(a, 1.0), (b, -1.0)].iter().enumerate() {
        // one-sided 5-point first derivative
        let gen = |k: f64| curve.generator(p0 + dir * k * step);
        let d1 = {
            let (f0, f1, f2, f3, f4) = (gen(0.0), gen(1.0), gen(2.0), gen(3.0), gen(4.0));
            let mut v = [0.0; 4];
            for i in 0..4 {
                v[i] = dir * (-25.0 * f0[i] + 48.0 * f1[i] - 36.0 * f2[i] + 16.0 * f3[i]
                    - 3.0 * f4[i])
                    / (12.0 * step);
            }
            v
        };
        let g0 = gen(0.0);
        let x = j.apply(&g0);
        let xp = matvec(&j.m, &d1);
        let xo = add4(matvec(&j.m1, &g0), j.a1);
        let n = raw_normal(sf, &x, &xp, &xo)?;
        out[idx] = ip(&gmet, &n, &[0.0, 0.0, 0.0, 1.0]);
    }
    Ok(out)
}

/// Boundary geodesic curvature measured on the sampled boundary orbit
/// curve, signed with respect to the outer conormal (determined from the
/// inward profile direction).
pub fn measured_boundary_kappa(curve: &ProfileCurve, end: usize) -> Result<f64> {
    let sf = InvariantSurface::space_form(curve);
    let boundary = curve.boundary_orbit_curve(end)?;
    let (a, b) = curve.param_domain();
    let (p_b, inward) = if end == 0 { (a, 1.0) } else { (b, -1.0) };
    let u0 = 0.37;
    let step = 1e-3;

    let kappa_plus =
        crate::modelspace::curve_geodesic_curvature(sf, &boundary, u0, step, 1.0)?;
    // canonical normal at u0 from the same finite-difference frame
    let n0 = canonical_boundary_normal(sf, &boundary, u0, step)?;
    // inward reference: towards the profile interior
    let j = curve.orbit_jets(u0);
    let xb = j.apply(&curve.generator(p_b));
    let xi = j.apply(&curve.generator(p_b + inward * 0.05 * (b - a)));
    let gmet = metric(sf);
    let mut v = [xi[0] - xb[0], xi[1] - xb[1], xi[2] - xb[2], 0.0];
    if sf.curvature() != 0.0 {
        let pos = [xb[0], xb[1], xb[2], 0.0];
        let lam = ip(&gmet, &v, &pos) / ip(&gmet, &pos, &pos);
        for i in 0..3 {
            v[i] -= lam * pos[i];
        }
    }
    let n4 = [n0[0], n0[1], n0[2], 0.0];
    let side = ip(&gmet, &n4, &v);
    // outer conormal is opposite the inward direction
    Ok(if side > 0.0 { -kappa_plus } else { kappa_plus })
}

fn canonical_boundary_normal(
    sf: SpaceForm,
    curve: &crate::modelspace::CurveSampler,
    s: f64,
    h: f64,
) -> Result<[f64; 3]> {
    let f = |t: f64| (curve.map)(t).base();
    let p = f(s);
    let m2 = f(s - 2.0 * h);
    let m1 = f(s - h);
    let p1 = f(s + h);
    let p2 = f(s + 2.0 * h);
    let mut vel = [0.0; 3];
    for i in 0..3 {
        vel[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
    }
    let v2 = sf.base_inner(vel, vel);
    let inv = 1.0 / v2.sqrt();
    let t = [vel[0] * inv, vel[1] * inv, vel[2] * inv];
    let c = sf.curvature();
    let cr = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    if c == 0.0 {
        Ok([-t[1], t[0], 0.0])
    } else if c > 0.0 {
        let sq = c.sqrt();
        let n = cr([p[0] * sq, p[1] * sq, p[2] * sq], t);
        let nn = sf.base_inner(n, n).abs().sqrt();
        Ok([n[0] / nn, n[1] / nn, n[2] / nn])
    } else {
        let sq = (-c).sqrt();
        let n = cr([p[0] * sq, p[1] * sq, p[2] * sq], t);
        let n = [n[0], n[1], -n[2]];
        let nn = sf.base_inner(n, n).abs().sqrt();
        Ok([n[0] / nn, n[1] / nn, n[2] / nn])
    }
}

/// Intrinsic length of the generating curve between two parameters
/// (the meridian length for rotational families).
pub fn profile_arc_length<S: InvariantSurface + ?Sized>(
    surface: &S,
    from: f64,
    to: f64,
) -> Result<f64> {
    let sf = surface.space_form();
    let gmet = metric(sf);
    let gen = |p: f64| surface.generator(p);
    quad_fn(
        |p| {
            let v = d1_5pt(&gen, p, 1e-4);
            ip(&gmet, &v, &v).sqrt()
        },
        from,
        to,
        1e-11,
    )
}

/// Gauss curvature from the first fundamental form alone (Brioschi
/// formula), differencing a supplied first-form field. An independent
/// intrinsic route for checking the Gauss equation.
pub fn brioschi_curvature<F>(first_form: F, at: (f64, f64), step: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<(f64, f64, f64)>,
{
    let (u, v) = at;
    let h = step;
    let f00 = first_form(u, v)?;
    let fpu = first_form(u + h, v)?;
    let fmu = first_form(u - h, v)?;
    let fpv = first_form(u, v + h)?;
    let fmv = first_form(u, v - h)?;
    let fpp = first_form(u + h, v + h)?;
    let fpm = first_form(u + h, v - h)?;
    let fmp = first_form(u - h, v + h)?;
    let fmm = first_form(u - h, v - h)?;

    let (e, f, g) = f00;
    let du = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h), (a.2 - b.2) / (2.0 * h))
    };
    let (eu, fu, gu) = du(fpu, fmu);
    let (ev, fv, gv) = du(fpv, fmv);
    let evv = (fpv.0 - 2.0 * e + fmv.0) / (h * h);
    let guu = (fpu.2 - 2.0 * g + fmu.2) / (h * h);
    let fuv = (fpp.1 - fpm.1 - fmp.1 + fmm.1) / (4.0 * h * h);

    let m1 = det3([
        [-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev],
        [fv - 0.5 * gu, e, f],
        [0.5 * gv, f, g],
    ]);
    let m2 = det3([
        [0.0, 0.5 * ev, 0.5 * gu],
        [0.5 * ev, e, f],
        [0.5 * gu, f, g],
    ]);
    let w = e * g - f * f;
    Ok((m1 - m2) / (w * w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{make_profile, FamilyKind, ProfileFamily};

    fn profile(kind: FamilyKind, h: f64) -> ProfileCurve {
        make_profile(ProfileFamily::new(kind, h).unwrap()).unwrap()
    }

    #[test]
    fn euclidean_sphere_generic_path() {
        // round sphere of radius 1/H: umbilic, H = 1, det A = 1, q = 0
        let sf = SpaceForm::new(0.0);
        let surface = move |p: f64, o: f64| {
            AmbientPoint::new_unchecked(
                sf,
                [p.sin() * o.cos(), p.sin() * o.sin(), 0.0],
                p.cos(),
            )
        };
        let s = fundamental_forms_at(surface, (0.9, 0.5), 1e-3).unwrap();
        assert!((s.mean_curvature - 1.0).abs() < 1e-7, "H = {}", s.mean_curvature);
        assert!((s.det_a - 1.0).abs() < 1e-6, "detA = {}", s.det_a);
        assert!(s.q.abs() < 1e-6, "q = {}", s.q);
        assert!(s.nu <= 0.0);
    }

    #[test]
    fn generic_path_detects_degenerate_parametrization() {
        let sf = SpaceForm::new(0.0);
        let degenerate =
            move |_p: f64, _o: f64| AmbientPoint::new_unchecked(sf, [1.0, 2.0, 0.0], 3.0);
        assert!(matches!(
            fundamental_forms_at(degenerate, (0.0, 0.0), 1e-3),
            Err(Error::SingularParametrization(_))
        ));
    }

    #[test]
    fn hsiang_sphere_is_cmc_with_vanishing_density() {
        let p = profile(FamilyKind::RotSphereH2, 1.0);
        let (a, b) = p.param_domain();
        for i in 0..8 {
            // keep clear of the chart-degenerate rotation axis at the middle
            let par = a + (b - a) * (i as f64 + 0.3) / 8.0;
            let s = sample_invariant(&p, par, 1.3, DEFAULT_FD_STEP).unwrap();
            assert!(
                (s.mean_curvature - 1.0).abs() < 1e-6,
                "H at {par}: {}",
                s.mean_curvature
            );
            assert!(s.q.abs() < 1e-6, "q at {par}: {}", s.q);
            assert!(s.nu <= 1e-10);
            assert!(s.det_a <= s.mean_curvature * s.mean_curvature + 1e-8);
            assert!(s.nu.abs() <= 1.0 + 1e-10);
        }
        // horizontal tangent plane at the top (sampled just off the axis,
        // where the rotational chart itself degenerates)
        let top = sample_invariant(&p, std::f64::consts::FRAC_PI_2 + 2e-4, 0.7, DEFAULT_FD_STEP)
            .unwrap();
        assert!((top.nu + 1.0).abs() < 1e-7, "nu at top: {}", top.nu);
        // the chart-degenerate axis itself is reported, not mis-evaluated
        assert!(matches!(
            sample_invariant(&p, std::f64::consts::FRAC_PI_2, 0.7, DEFAULT_FD_STEP),
            Err(Error::SingularParametrization(_))
        ));
    }

    #[test]
    fn residuals_of_closed_form_families() {
        for (kind, h) in [
            (FamilyKind::HypCylinderH2, 0.7),
            (FamilyKind::RotTorusS2, 1.0),
            (FamilyKind::ParabolicH2, 1.0),
        ] {
            let p = profile(kind, h);
            let r = mean_curvature_residual(&p, 24).unwrap();
            assert!(r <= 1e-6, "{} H={h}: residual {r:.3e}", kind.tag());
        }
    }

    #[test]
    fn grid_minimum_is_enforced() {
        let p = profile(FamilyKind::EuclSphere, 1.0);
        assert!(mean_curvature_residual(&p, 8).is_err());
    }

    #[test]
    fn boundary_angles_vanish() {
        for kind in [
            FamilyKind::RotSphereS2,
            FamilyKind::RotTorusS2,
            FamilyKind::RotSphereH2,
            FamilyKind::HypCylinderH2,
            FamilyKind::EuclSphere,
            FamilyKind::EuclCylinder,
        ] {
            let p = profile(kind, 0.8);
            let nus = angle_at_boundary(&p).unwrap();
            assert!(
                nus[0].abs() < 1e-6 && nus[1].abs() < 1e-6,
                "{}: {nus:?}",
                kind.tag()
            );
        }
        assert!(angle_at_boundary(&profile(FamilyKind::ParabolicH2, 1.0)).is_err());
    }

    #[test]
    fn measured_boundary_curvature_matches_formulas() {
        for (kind, h) in [
            (FamilyKind::RotSphereS2, 1.0),
            (FamilyKind::RotTorusS2, 1.0),
            (FamilyKind::HypCylinderH2, 1.0),
            (FamilyKind::EuclSphere, 0.6),
            (FamilyKind::EuclCylinder, 1.0),
            (FamilyKind::RotSphereH2, 0.8),
        ] {
            let p = profile(kind, h);
            let expect = p.boundary_kappa().unwrap();
            for end in [0, 1] {
                let k = measured_boundary_kappa(&p, end).unwrap();
                assert!(
                    (k - expect).abs() < 1e-6,
                    "{} end {end}: measured {k:.9} vs {expect:.9}",
                    kind.tag()
                );
            }
        }
    }

    #[test]
    fn density_is_constant_along_orbits() {
        for kind in [FamilyKind::RotTorusS2, FamilyKind::HypCylinderH2] {
            let p = profile(kind, 0.9);
            let (a, b) = p.param_domain();
            let (ua, ub) = p.orbit_range();
            for i in 1..5 {
                let par = a + (b - a) * i as f64 / 5.0;
                let mut qs = Vec::new();
                for k in 0..6 {
                    let u = ua + (ub - ua) * (k as f64 + 0.5) / 6.0;
                    qs.push(sample_invariant(&p, par, u, DEFAULT_FD_STEP).unwrap().q);
                }
                let spread =
                    qs.iter().cloned().fold(f64::MIN, f64::max) - qs.iter().cloned().fold(f64::MAX, f64::min);
                assert!(spread.abs() < 1e-8, "{} q spread {spread:.3e}", kind.tag());
            }
        }
    }

    #[test]
    fn gauss_equation_via_brioschi() {
        // K - c nu^2 = det A, with K from the first form alone
        for (kind, h) in [(FamilyKind::RotSphereS2, 1.0), (FamilyKind::HypCylinderH2, 0.8)] {
            let p = profile(kind, h);
            let (a, b) = p.param_domain();
            let c = InvariantSurface::space_form(&p).curvature();
            for i in [2, 3, 4] {
                let par = a + (b - a) * (i as f64 + 0.4) / 6.0;
                let s = sample_invariant(&p, par, 0.6, DEFAULT_FD_STEP).unwrap();
                let k = brioschi_curvature(
                    |pp, oo| {
                        Ok(sample_invariant(&p, pp, oo, DEFAULT_FD_STEP)?.first_form)
                    },
                    (par, 0.6),
                    1e-3,
                )
                .unwrap();
                let gauss = k - c * s.nu * s.nu;
                assert!(
                    (gauss - s.det_a).abs() < 1e-4,
                    "{} at {par}: K - c nu^2 = {gauss:.8} vs det A = {:.8}",
                    kind.tag(),
                    s.det_a
                );
            }
        }
    }

    #[test]
    fn grad_nu_matches_shape_operator_route() {
        // |grad nu|^2 = |A grad h|^2 when the vertical part of the normal
        // derivative is eliminated through the shape operator
        for (kind, h) in [(FamilyKind::RotSphereS2, 1.0), (FamilyKind::RotSphereH2, 0.9)] {
            let p = profile(kind, h);
            let (a, b) = p.param_domain();
            for i in [2, 3, 4] {
                let par = a + (b - a) * (i as f64 + 0.4) / 6.0;
                let s = sample_invariant(&p, par, 1.1, DEFAULT_FD_STEP).unwrap();
                let (e1, f1, g1) = s.first_form;
                let (e2, f2, g2) = s.second_form;
                let w = e1 * g1 - f1 * f1;
                // chart components of grad h = E3^T
                let (hp, ho) = s.dh_chart;
                let v = ((g1 * hp - f1 * ho) / w, (e1 * ho - f1 * hp) / w);
                // shape operator applied in the chart: A = I^{-1} II
                let av = (
                    (g1 * (e2 * v.0 + f2 * v.1) - f1 * (f2 * v.0 + g2 * v.1)) / w,
                    (e1 * (f2 * v.0 + g2 * v.1) - f1 * (e2 * v.0 + f2 * v.1)) / w,
                );
                let norm2 =
                    e1 * av.0 * av.0 + 2.0 * f1 * av.0 * av.1 + g1 * av.1 * av.1;
                assert!(
                    (norm2 - s.grad_nu_sq).abs() < 1e-5,
                    "{} at {par}: {norm2:.9} vs {:.9}",
                    kind.tag(),
                    s.grad_nu_sq
                );
            }
        }
    }

    #[test]
    fn meridian_arc_length_of_flat_sphere() {
        let p = profile(FamilyKind::EuclSphere, 1.0);
        let l = profile_arc_length(&p, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((l - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }
}
