//! Generating curves of the invariant CMC families in `H^2 x R`,
//! `S^2 x R` and `R^3`, with closed-form heights, parameter domains,
//! maximum heights and boundary geodesic curvatures.
//!
//! Rotational bigraph profiles are parametrized by the turning angle of
//! the profile normal rather than by the base radius: the angle chart is
//! real-analytic through both the rotation axis and the bigraph boundary
//! (where a radial graph chart degenerates), so finite differences of the
//! immersion stay well conditioned over the whole closed profile. In the
//! angle variable the heights collapse to one-line formulas:
//!
//! ```text
//! S^2 x R spheres:  h = (4H/v)  artanh(sin(phi)/v),   v  = sqrt(1+4H^2)
//! S^2 x R tori:     h = (2H/v)  artanh(sin(phi)/v)
//! H^2 x R spheres:  h = (4H/b)  arctan(sin(phi)/b),   b  = sqrt(4H^2-1)
//! ```
//!
//! with `phi` running over `[0, pi]` and heights vanishing at both ends.

use crate::estimates::{self, EstimateParams};
use crate::geomcheck::{InvariantSurface, OrbitJets};
use crate::modelspace::{halfplane_to_hyperboloid, AmbientPoint, SpaceForm};
use crate::numerics::{golden_max, quad_fn, quad_singular, QuadPoint, DEFAULT_QUAD_TOL};
use crate::{Error, Result};

use std::f64::consts::{FRAC_PI_2, PI};

/// The invariant families: rotations in both curved products, hyperbolic
/// and parabolic translations in `H^2 x R`, rotations and translations in
/// flat space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    RotSphereH2,
    RotSphereS2,
    RotTorusS2,
    RotGeneralS2 { c0: f64 },
    HypCylinderH2,
    HypGeneralH2 { energy: f64 },
    ParabolicH2,
    EuclSphere,
    EuclCylinder,
}

impl FamilyKind {
    pub fn tag(&self) -> &'static str {
        match self {
            FamilyKind::RotSphereH2 => "rot-sphere-h2",
            FamilyKind::RotSphereS2 => "rot-sphere-s2",
            FamilyKind::RotTorusS2 => "rot-torus-s2",
            FamilyKind::RotGeneralS2 { .. } => "rot-general-s2",
            FamilyKind::HypCylinderH2 => "hyp-cylinder",
            FamilyKind::HypGeneralH2 { .. } => "hyp-general",
            FamilyKind::ParabolicH2 => "parabolic",
            FamilyKind::EuclSphere => "euclidean-sphere",
            FamilyKind::EuclCylinder => "euclidean-cylinder",
        }
    }

    fn base_curvature(&self) -> f64 {
        match self {
            FamilyKind::RotSphereS2
            | FamilyKind::RotTorusS2
            | FamilyKind::RotGeneralS2 { .. } => 1.0,
            FamilyKind::EuclSphere | FamilyKind::EuclCylinder => 0.0,
            _ => -1.0,
        }
    }
}

/// A family member: the kind plus its mean curvature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileFamily {
    pub kind: FamilyKind,
    pub mean_curvature: f64,
}

impl ProfileFamily {
    pub fn new(kind: FamilyKind, mean_curvature: f64) -> Result<Self> {
        if !(mean_curvature > 0.0 && mean_curvature.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mean curvature H must be positive, got {mean_curvature}"
            )));
        }
        if kind.base_curvature() < 0.0 && mean_curvature <= 0.5 {
            return Err(Error::InvalidInput(format!(
                "families in H^2 x R require H > 1/2, got {mean_curvature}"
            )));
        }
        if let FamilyKind::RotGeneralS2 { c0 } = kind {
            if !c0.is_finite() {
                return Err(Error::InvalidInput("c0 must be finite".into()));
            }
        }
        if let FamilyKind::HypGeneralH2 { energy } = kind {
            if !energy.is_finite() {
                return Err(Error::InvalidInput("energy must be finite".into()));
            }
        }
        Ok(ProfileFamily { kind, mean_curvature })
    }
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    /// Angle-parametrized rotational sphere in `S^2 x R`; `v = sqrt(1+4H^2)`.
    RotS2Sphere { v: f64 },
    RotS2Torus { v: f64 },
    /// Angle-parametrized sphere in `H^2 x R`; `b = sqrt(4H^2-1)`.
    RotH2Sphere { b: f64 },
    /// Radial chart `[a, b]` with heights from the profile quadrature.
    RotS2General { c0: f64, a: f64 },
    HypCyl { b: f64 },
    HypGen { energy: f64, b: f64, w: f64 },
    Parab { a_coef: f64, b_coef: f64 },
    EuclSphere { radius: f64 },
    EuclCyl { radius: f64 },
}

/// A generating curve: parameter domain, height and base samplers, and
/// the ambient immersion of the full invariant surface.
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    family: ProfileFamily,
    domain: (f64, f64),
    is_bigraph: bool,
    shape: Shape,
}

/// Construct the generating curve of `family`.
pub fn make_profile(family: ProfileFamily) -> Result<ProfileCurve> {
    let h = family.mean_curvature;
    let (shape, domain, is_bigraph) = match family.kind {
        FamilyKind::RotSphereS2 => {
            (Shape::RotS2Sphere { v: (1.0 + 4.0 * h * h).sqrt() }, (0.0, PI), true)
        }
        FamilyKind::RotTorusS2 => {
            (Shape::RotS2Torus { v: (1.0 + 4.0 * h * h).sqrt() }, (0.0, PI), true)
        }
        FamilyKind::RotSphereH2 => {
            (Shape::RotH2Sphere { b: (4.0 * h * h - 1.0).sqrt() }, (0.0, PI), true)
        }
        FamilyKind::RotGeneralS2 { c0 } => {
            let (a, b) = rot_general_domain(h, c0)?;
            (
                Shape::RotS2General { c0, a },
                (a, b),
                c0 == -1.0 || c0 == 0.0,
            )
        }
        FamilyKind::HypCylinderH2 => (
            Shape::HypCyl { b: (4.0 * h * h - 1.0).sqrt() },
            (-FRAC_PI_2, FRAC_PI_2),
            true,
        ),
        FamilyKind::HypGeneralH2 { energy } => {
            let b = (4.0 * h * h - 1.0).sqrt();
            let w = (4.0 * h * h + energy * energy - 1.0).sqrt();
            (
                Shape::HypGen { energy, b, w },
                (-FRAC_PI_2 / b, FRAC_PI_2 / b),
                energy == 0.0,
            )
        }
        FamilyKind::ParabolicH2 => {
            let b = (4.0 * h * h - 1.0).sqrt();
            (
                Shape::Parab { a_coef: (2.0 * h + 1.0) / b, b_coef: 0.5 * b },
                (0.0, 2.0 * PI / b),
                false,
            )
        }
        FamilyKind::EuclSphere => (
            Shape::EuclSphere { radius: 1.0 / h },
            (-FRAC_PI_2, FRAC_PI_2),
            true,
        ),
        FamilyKind::EuclCylinder => (
            Shape::EuclCyl { radius: 1.0 / (2.0 * h) },
            (-FRAC_PI_2, FRAC_PI_2),
            true,
        ),
    };
    Ok(ProfileCurve { family, domain, is_bigraph, shape })
}

impl ProfileCurve {
    pub fn family(&self) -> ProfileFamily {
        self.family
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn is_bigraph(&self) -> bool {
        self.is_bigraph
    }

    pub fn space_form(&self) -> SpaceForm {
        SpaceForm::new(self.family.kind.base_curvature())
    }

    /// Whether the profile formulas extend analytically past the domain
    /// endpoints (lets centered stencils sit on the boundary itself).
    pub fn analytic_extension(&self) -> bool {
        !matches!(
            self.shape,
            Shape::RotS2General { .. } | Shape::HypGen { .. }
        )
    }

    fn check_param(&self, param: f64) -> Result<()> {
        let (a, b) = self.domain;
        let slack = 1e-9 * (b - a).abs();
        if param < a - slack || param > b + slack {
            return Err(Error::Domain(format!(
                "parameter {param} outside profile domain [{a}, {b}]"
            )));
        }
        Ok(())
    }

    /// Height of the generating curve at `param`.
    pub fn height(&self, param: f64) -> Result<f64> {
        self.check_param(param)?;
        Ok(self.height_raw(param))
    }

    pub(crate) fn height_raw(&self, p: f64) -> f64 {
        let h = self.family.mean_curvature;
        match self.shape {
            Shape::RotS2Sphere { v } => (4.0 * h / v) * (p.sin() / v).atanh(),
            Shape::RotS2Torus { v } => (2.0 * h / v) * (p.sin() / v).atanh(),
            Shape::RotH2Sphere { b } => (4.0 * h / b) * (p.sin() / b).atan(),
            Shape::RotS2General { c0, a } => {
                eq4_height_integral(h, c0, a, self.domain.1, p).unwrap_or(f64::NAN)
            }
            Shape::HypCyl { b } => {
                (2.0 * h / b) * (p.cos() / (b * b + p.sin() * p.sin()).sqrt()).atan()
            }
            Shape::HypGen { energy, b, w } => {
                // heights normalized to vanish at the upper domain end
                let x = |s: f64| (w * (b * s).sin() - 2.0 * h * energy) / (b * b);
                // tight tolerance: curvature checks difference this twice
                quad_fn(
                    |s| {
                        let xs = x(s);
                        (energy + 2.0 * h * xs) / (1.0 + xs * xs).sqrt()
                    },
                    p,
                    self.domain.1,
                    1e-13,
                )
                .unwrap_or(f64::NAN)
            }
            Shape::Parab { .. } => self.beta_ext(p) - 2.0 * h * p,
            Shape::EuclSphere { radius } => radius * p.cos(),
            Shape::EuclCyl { radius } => radius * p.cos(),
        }
    }

    /// The base coordinate of the generating curve: the signed polar
    /// radius for rotational families, the half-plane `x` for hyperbolic
    /// translations, the half-plane `y` for parabolic translations and
    /// the signed offset for the flat families.
    pub fn base_coord(&self, param: f64) -> Result<f64> {
        self.check_param(param)?;
        Ok(self.base_coord_raw(param))
    }

    fn base_coord_raw(&self, p: f64) -> f64 {
        let h = self.family.mean_curvature;
        match self.shape {
            Shape::RotS2Sphere { .. } => 2.0 * (-p.cos() / (2.0 * h)).atan(),
            Shape::RotS2Torus { .. } => FRAC_PI_2 - (p.cos() / (2.0 * h)).atan(),
            Shape::RotH2Sphere { .. } => 2.0 * (-p.cos() / (2.0 * h)).atanh(),
            Shape::RotS2General { .. } => p,
            Shape::HypCyl { b } => p.sin() / b,
            Shape::HypGen { energy, b, w } => (w * (b * p).sin() - 2.0 * h * energy) / (b * b),
            Shape::Parab { .. } => 2.0 * h + self.beta_ext(p).cos(),
            Shape::EuclSphere { radius } => radius * p.sin(),
            Shape::EuclCyl { radius } => radius * p.sin(),
        }
    }

    /// Signed intrinsic arc length, in the base surface, of the projected
    /// generating curve measured from the profile midpoint. This is the
    /// horizontal coordinate of the profile figures.
    pub fn base_arclength(&self, param: f64) -> Result<f64> {
        self.check_param(param)?;
        let mid = 0.5 * (self.domain.0 + self.domain.1);
        Ok(match self.shape {
            // polar radius is the intrinsic distance from the axis
            Shape::RotS2Sphere { .. } | Shape::RotH2Sphere { .. } => self.base_coord_raw(param),
            Shape::RotS2Torus { .. } => self.base_coord_raw(param) - FRAC_PI_2,
            Shape::RotS2General { .. } => param - mid,
            // the orbit-space section sits at y = 1, where length = dx
            Shape::HypCyl { .. } | Shape::HypGen { .. } => {
                self.base_coord_raw(param) - self.base_coord_raw(mid)
            }
            // vertical line x = 0: length element |dy|/y
            Shape::Parab { .. } => {
                (self.base_coord_raw(param) / self.base_coord_raw(self.domain.0)).ln()
            }
            Shape::EuclSphere { .. } | Shape::EuclCyl { .. } => self.base_coord_raw(param),
        })
    }

    /// Ambient point of the invariant surface: the orbit isometry at
    /// `orbit` applied to the generating curve at `param`.
    pub fn sample_surface(&self, param: f64, orbit: f64) -> Result<AmbientPoint> {
        self.check_param(param)?;
        let g = self.generator(param);
        let jets = self.orbit_jets(orbit);
        let p = jets.apply(&g);
        AmbientPoint::new(self.space_form(), [p[0], p[1], p[2]], p[3])
    }

    /// Closed-form maximum height: `alpha(c, H, 0)` for the spheres and
    /// half of it for the tori and cylinders.
    pub fn max_height(&self) -> Result<f64> {
        if !self.is_bigraph {
            return Err(Error::InvalidInput(format!(
                "{} is not a bigraph family",
                self.family.kind.tag()
            )));
        }
        let params = self.estimate_params();
        let alpha = estimates::alpha_max(&params);
        Ok(match self.shape {
            Shape::RotS2Sphere { .. }
            | Shape::RotH2Sphere { .. }
            | Shape::EuclSphere { .. } => alpha,
            Shape::RotS2General { c0, .. } if c0 == -1.0 => alpha,
            _ => alpha / 2.0,
        })
    }

    /// Boundary geodesic curvature with respect to the outer conormal.
    /// Spheres realize the general bound, tori and cylinders the
    /// height-restricted bound at `m = 1/2`; the returned values are those
    /// formulas evaluated verbatim.
    pub fn boundary_kappa(&self) -> Result<f64> {
        if !self.is_bigraph {
            return Err(Error::InvalidInput(format!(
                "{} is not a bigraph family",
                self.family.kind.tag()
            )));
        }
        let params = self.estimate_params();
        match self.shape {
            Shape::RotS2Sphere { .. }
            | Shape::RotH2Sphere { .. }
            | Shape::EuclSphere { .. } => Ok(estimates::kappa_lower_general(&params)),
            Shape::RotS2General { c0, .. } if c0 == -1.0 => {
                Ok(estimates::kappa_lower_general(&params))
            }
            _ => estimates::kappa_lower_height(&params.with_height_fraction(0.5)?),
        }
    }

    fn estimate_params(&self) -> EstimateParams {
        EstimateParams::new(
            self.family.kind.base_curvature(),
            self.family.mean_curvature,
            0.0,
        )
        .expect("family invariants imply valid estimate parameters")
    }

    /// Numerically locate the height maximum over the profile domain.
    pub fn numeric_max_height(&self) -> (f64, f64) {
        let (a, b) = self.domain;
        golden_max(|p| self.height_raw(p), a, b, 1e-10 * (b - a).abs())
    }

    /// The orbit curve through the boundary point at the given domain end,
    /// as a base curve at height zero.
    pub fn boundary_orbit_curve(&self, end: usize) -> Result<crate::modelspace::CurveSampler> {
        if !self.is_bigraph {
            return Err(Error::InvalidInput("boundary curve needs a bigraph".into()));
        }
        let param = if end == 0 { self.domain.0 } else { self.domain.1 };
        let this = self.clone();
        let sf = self.space_form();
        let range = self.orbit_range();
        Ok(crate::modelspace::CurveSampler::new(
            move |u: f64| {
                let mut g = this.generator(param);
                g[3] = 0.0;
                let p = this.orbit_jets(u).apply(&g);
                AmbientPoint::new_unchecked(sf, [p[0], p[1], p[2]], 0.0)
            },
            range,
        ))
    }

    fn beta_ext(&self, t: f64) -> f64 {
        let (a_coef, b_coef) = match self.shape {
            Shape::Parab { a_coef, b_coef } => (a_coef, b_coef),
            _ => unreachable!("beta_ext is a parabolic-profile helper"),
        };
        let th = b_coef * t;
        let k = (th / PI).round();
        let d = th - k * PI;
        2.0 * ((a_coef * d.tan()).atan() + k * PI)
    }
}

impl InvariantSurface for ProfileCurve {
    fn space_form(&self) -> SpaceForm {
        self.space_form()
    }

    fn mean_curvature(&self) -> f64 {
        self.family.mean_curvature
    }

    fn param_domain(&self) -> (f64, f64) {
        self.domain
    }

    fn orbit_range(&self) -> (f64, f64) {
        match self.shape {
            Shape::RotS2Sphere { .. }
            | Shape::RotS2Torus { .. }
            | Shape::RotH2Sphere { .. }
            | Shape::RotS2General { .. }
            | Shape::EuclSphere { .. } => (0.0, 2.0 * PI),
            _ => (-1.0, 1.0),
        }
    }

    fn generator(&self, param: f64) -> [f64; 4] {
        let h = self.height_raw(param);
        match self.shape {
            Shape::RotS2Sphere { .. } | Shape::RotS2Torus { .. } | Shape::RotS2General { .. } => {
                let r = self.base_coord_raw(param);
                [r.sin(), 0.0, r.cos(), h]
            }
            Shape::RotH2Sphere { .. } => {
                let r = self.base_coord_raw(param);
                [r.sinh(), 0.0, r.cosh(), h]
            }
            Shape::HypCyl { .. } | Shape::HypGen { .. } => {
                let x = self.base_coord_raw(param);
                let b = halfplane_to_hyperboloid(x, 1.0);
                [b[0], b[1], b[2], h]
            }
            Shape::Parab { .. } => {
                let y = self.base_coord_raw(param);
                let b = halfplane_to_hyperboloid(0.0, y);
                [b[0], b[1], b[2], h]
            }
            Shape::EuclSphere { .. } => {
                let off = self.base_coord_raw(param);
                [off, 0.0, 0.0, h]
            }
            Shape::EuclCyl { .. } => {
                let off = self.base_coord_raw(param);
                [0.0, off, 0.0, h]
            }
        }
    }

    fn orbit_jets(&self, u: f64) -> OrbitJets {
        match self.shape {
            Shape::RotS2Sphere { .. }
            | Shape::RotS2Torus { .. }
            | Shape::RotH2Sphere { .. }
            | Shape::RotS2General { .. }
            | Shape::EuclSphere { .. } => OrbitJets::rotation_xy(u),
            Shape::HypCyl { .. } | Shape::HypGen { .. } => OrbitJets::lorentz_boost_xz(u),
            Shape::Parab { .. } => OrbitJets::parabolic(u),
            Shape::EuclCyl { .. } => OrbitJets::translation_x(u),
        }
    }
}

/// Mirror of [`ProfileCurve::sample_surface`] as a free function.
pub fn sample_surface(p: &ProfileCurve, param: f64, orbit: f64) -> Result<AmbientPoint> {
    p.sample_surface(param, orbit)
}

/// Maximize the torus maximum height over the mean curvature by
/// golden-section search. Returns `(H_star, height_star)`. The sphere
/// family peaks at the same mean curvature since its height is exactly
/// twice the torus height for every `H`.
pub fn torus_height_argmax() -> (f64, f64) {
    golden_max(
        |h| {
            let v = (1.0 + 4.0 * h * h).sqrt();
            (2.0 * h / v) * (1.0 / v).atanh()
        },
        0.02,
        3.0,
        1e-8,
    )
}

/// The period-to-period height drift that obstructs parabolic-invariant
/// bigraphs, evaluated from the published closed forms at the consecutive
/// critical points of the orbit-space coordinate:
/// `pi (1 + 2H / sqrt(4H^2 - 1))`.
pub fn parabolic_obstruction(mean_curvature: f64) -> Result<f64> {
    let h = mean_curvature;
    if h <= 0.5 {
        return Err(Error::InvalidInput(format!(
            "parabolic obstruction needs H > 1/2, got {h}"
        )));
    }
    let b = (4.0 * h * h - 1.0).sqrt();
    let a_coef = (2.0 * h + 1.0) / b;
    let beta = |t: f64| {
        let th = 0.5 * b * t;
        let k = (th / PI).round();
        let d = th - k * PI;
        2.0 * ((a_coef * d.tan()).atan() + k * PI)
    };
    let printed_h = |t: f64| beta(t) + 2.0 * h * t;
    let t1 = PI / b;
    Ok((printed_h(t1) - printed_h(0.0)).abs())
}

// --- profile quadrature routes (verification-side height integrals) ---

/// Maximum height of the `S^2 x R` rotational sphere from the profile
/// height integral in the radial chart. Independent of the closed form.
pub fn sphere_s2_height_quadrature(mean_curvature: f64) -> Result<f64> {
    let h = mean_curvature;
    let t_edge = 1.0 / (2.0 * h); // tan of half the boundary radius
    let b = 2.0 * t_edge.atan();
    quad_singular(
        move |qp: &QuadPoint| {
            if qp.from_b < 0.05 * b {
                let td = (0.5 * qp.from_b).tan();
                let den = 1.0 + t_edge * td;
                let t = (t_edge - td) / den;
                let one_plus_psi = (t_edge + 2.0 * h) * td / den;
                let one_minus_psi = (2.0 + (t_edge - 2.0 * h) * td) / den;
                2.0 * h * t / (one_plus_psi * one_minus_psi).sqrt()
            } else {
                let t = (0.5 * qp.x).tan();
                2.0 * h * t / ((1.0 - 2.0 * h * t) * (1.0 + 2.0 * h * t)).sqrt()
            }
        },
        0.0,
        b,
        DEFAULT_QUAD_TOL,
    )
}

/// Maximum height of the `H^2 x R` rotational sphere from the profile
/// height integral in the radial chart.
pub fn sphere_h2_height_quadrature(mean_curvature: f64) -> Result<f64> {
    let h = mean_curvature;
    if h <= 0.5 {
        return Err(Error::InvalidInput("needs H > 1/2".into()));
    }
    let t_edge = 1.0 / (2.0 * h); // tanh of half the boundary radius
    let r_edge = 2.0 * t_edge.atanh();
    quad_singular(
        move |qp: &QuadPoint| {
            if qp.from_b < 0.05 * r_edge {
                let td = (0.5 * qp.from_b).tanh();
                let den = 1.0 - t_edge * td;
                let t = (t_edge - td) / den;
                let one_minus = (2.0 * h - t_edge) * td / den; // 1 - 2H tanh(s/2)
                let one_plus = (2.0 - (t_edge + 2.0 * h) * td) / den;
                2.0 * h * t / (one_minus * one_plus).sqrt()
            } else {
                let t = (0.5 * qp.x).tanh();
                2.0 * h * t / ((1.0 - 2.0 * h * t) * (1.0 + 2.0 * h * t)).sqrt()
            }
        },
        0.0,
        r_edge,
        DEFAULT_QUAD_TOL,
    )
}

/// Maximum height of the `S^2 x R` torus from the profile height integral.
pub fn torus_s2_height_quadrature(mean_curvature: f64) -> Result<f64> {
    let h = mean_curvature;
    let t_edge = 1.0 / (2.0 * h); // cot of the lower domain edge
    let a = FRAC_PI_2 - t_edge.atan();
    quad_singular(
        move |qp: &QuadPoint| {
            if qp.from_a < 0.05 * (FRAC_PI_2 - a) {
                let cd = 1.0 / qp.from_a.tan();
                let den = t_edge + cd;
                let cot_s = (t_edge * cd - 1.0) / den;
                let one_minus = (t_edge + 2.0 * h) / den; // 1 - 2H cot s
                let one_plus = (t_edge - 2.0 * h + 2.0 * cd) / den;
                2.0 * h * cot_s / (one_minus * one_plus).sqrt()
            } else {
                let c = 1.0 / qp.x.tan();
                2.0 * h * c / ((1.0 - 2.0 * h * c) * (1.0 + 2.0 * h * c)).sqrt()
            }
        },
        a,
        FRAC_PI_2,
        DEFAULT_QUAD_TOL,
    )
}

// --- general rotational surfaces in S^2 x R ---

fn psi_rot(h: f64, c0: f64, s: f64) -> f64 {
    if c0 == -1.0 {
        -2.0 * h * (0.5 * s).tan()
    } else if c0 == 1.0 {
        2.0 * h / (0.5 * s).tan()
    } else {
        2.0 * h * (c0 + s.cos()) / s.sin()
    }
}

fn rot_general_domain(h: f64, c0: f64) -> Result<(f64, f64)> {
    const EPS: f64 = 1e-9;
    let (lo, hi) = if c0 == -1.0 {
        (-PI + EPS, PI - EPS)
    } else {
        (EPS, PI - EPS)
    };
    const N: usize = 8192;
    let grid = |i: usize| lo + (hi - lo) * i as f64 / (N - 1) as f64;
    // locate the widest run where |psi| <= 1
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for i in 0..N {
        let inside = psi_rot(h, c0, grid(i)).abs() <= 1.0;
        match (inside, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(s)) => {
                if best.map_or(true, |(bs, be)| i - 1 - s > be - bs) {
                    best = Some((s, i - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        if best.map_or(true, |(bs, be)| N - 1 - s > be - bs) {
            best = Some((s, N - 1));
        }
    }
    let (i0, i1) = best.ok_or_else(|| {
        Error::NoSolution(format!(
            "no rotational profile for H = {h}, c0 = {c0}: |psi| > 1 everywhere"
        ))
    })?;
    let f = |s: f64| psi_rot(h, c0, s).abs() - 1.0;
    let a = if i0 == 0 {
        grid(0)
    } else {
        crate::numerics::bisect(f, grid(i0 - 1), grid(i0), 1e-12)?
    };
    let b = if i1 == N - 1 {
        grid(N - 1)
    } else {
        crate::numerics::bisect(f, grid(i1), grid(i1 + 1), 1e-12)?
    };
    Ok((a, b))
}

/// Height of the general rotational profile: the integral of
/// `psi / sqrt(1 - psi^2)` from the lower domain edge `a` to `r`, where
/// `b_dom` is the singular upper edge of the profile domain.
///
/// The square-root factors vanish at the domain edges and are expanded
/// around them so the tanh-sinh nodes never lose the singular behaviour.
/// For `c0 = +-1` the profile passes through an axis where `sin s = 0`,
/// so the half-angle form of `1 - psi^2` is used instead of the generic
/// `F_- F_+ / sin^2 s` factorization, which is 0/0 there.
fn eq4_height_integral(h: f64, c0: f64, a: f64, b_dom: f64, r: f64) -> Result<f64> {
    if (r - a).abs() < 1e-300 {
        return Ok(0.0);
    }
    let width = 0.02 * (r - a).abs().max(1e-6);
    let upper_is_edge = r >= b_dom - 1e-13;

    if c0 == -1.0 {
        // psi = -2H tan(s/2); both edges are symmetric roots of 1 - psi^2
        let ta = (0.5 * a).tan(); // close to -1/(2H)
        let tb = (0.5 * b_dom).tan();
        return quad_singular(
            move |qp: &QuadPoint| {
                let t = (0.5 * qp.x).tan();
                let mut one_m = 1.0 + 2.0 * h * t; // 1 - psi
                let mut one_p = 1.0 - 2.0 * h * t; // 1 + psi
                if qp.from_a < width {
                    let td = (0.5 * qp.from_a).tan();
                    one_m = (2.0 * h - ta) * td / (1.0 - ta * td);
                } else if upper_is_edge && qp.from_b < width {
                    let td = (0.5 * qp.from_b).tan();
                    one_p = (tb + 2.0 * h) * td / (1.0 + tb * td);
                }
                -2.0 * h * t / (one_m * one_p).max(0.0).sqrt()
            },
            a,
            r,
            1e-13,
        );
    }
    if c0 == 1.0 {
        // psi = 2H cot(s/2); only the lower edge is a root of 1 - psi^2
        let ua = 1.0 / (0.5 * a).tan();
        return quad_singular(
            move |qp: &QuadPoint| {
                let u = 1.0 / (0.5 * qp.x).tan();
                let mut one_m = 1.0 - 2.0 * h * u;
                let one_p = 1.0 + 2.0 * h * u;
                if qp.from_a < width {
                    let cd = 1.0 / (0.5 * qp.from_a).tan();
                    one_m = (ua + 2.0 * h) / (ua + cd);
                }
                2.0 * h * u / (one_m * one_p).max(0.0).sqrt()
            },
            a,
            r,
            1e-13,
        );
    }

    // generic c0: the domain avoids the axes, so sin s > 0 throughout and
    // 1 - psi^2 = F_- F_+ / sin^2 s with F_-+(s) = sin s -+ 2H (c0 + cos s).
    // Around an edge e the vanishing factor is rewritten through the exact
    // angle-sum identity with its (zero) edge value dropped.
    let expansion = move |e: f64, delta: f64, minus_branch: bool| -> f64 {
        let (se, ce) = (e.sin(), e.cos());
        let (coef_s, coef_c) = if minus_branch {
            (ce + 2.0 * h * se, se - 2.0 * h * ce)
        } else {
            (ce - 2.0 * h * se, se + 2.0 * h * ce)
        };
        let half = (0.5 * delta).sin();
        coef_s * delta.sin() - coef_c * 2.0 * half * half
    };
    let minus_vanishes = |e: f64| {
        (e.sin() - 2.0 * h * (c0 + e.cos())).abs() < (e.sin() + 2.0 * h * (c0 + e.cos())).abs()
    };
    let near_a_minus = minus_vanishes(a);
    let near_b_minus = minus_vanishes(b_dom);
    quad_singular(
        move |qp: &QuadPoint| {
            let s = qp.x;
            let psi = psi_rot(h, c0, s);
            let sin_s = s.sin();
            let mut fm = sin_s - 2.0 * h * (c0 + s.cos());
            let mut fp = sin_s + 2.0 * h * (c0 + s.cos());
            if qp.from_a < width {
                if near_a_minus {
                    fm = expansion(a, qp.from_a, true);
                } else {
                    fp = expansion(a, qp.from_a, false);
                }
            } else if upper_is_edge && qp.from_b < width {
                if near_b_minus {
                    fm = expansion(r, -qp.from_b, true);
                } else {
                    fp = expansion(r, -qp.from_b, false);
                }
            }
            let prod = (fm * fp).max(0.0);
            psi * sin_s.abs() / prod.sqrt()
        },
        a,
        r,
        1e-13,
    )
}
