//! Command-line front end: profile/surface sample generation, the
//! per-family verification suite, estimate evaluation and figure data.
//!
//! All numeric output uses 17 significant digits (`{:.16e}`) in CSV and
//! JSON files so values round-trip exactly; terminal summaries round to
//! six digits. Reports are deterministic except for the `timings`
//! section, which is kept separate so byte comparisons can drop it.

use crate::estimates::{self, EstimateParams};
use crate::geomcheck::{self, InvariantSurface};
use crate::profiles::{self, FamilyKind, ProfileCurve, ProfileFamily};
use crate::{Error, Result};

use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "CMCPROD_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidInput(format!("unknown format '{other}'"))),
        }
    }
}

/// Parse a family tag (plus auxiliary parameters where the family needs
/// one) into a validated [`ProfileFamily`].
pub fn parse_family(
    tag: &str,
    mean_curvature: f64,
    c0: Option<f64>,
    energy: Option<f64>,
) -> Result<ProfileFamily> {
    let kind = match tag {
        "rot-sphere-h2" => FamilyKind::RotSphereH2,
        "rot-sphere-s2" => FamilyKind::RotSphereS2,
        "rot-torus-s2" => FamilyKind::RotTorusS2,
        "rot-general-s2" => FamilyKind::RotGeneralS2 {
            c0: c0.ok_or_else(|| {
                Error::InvalidInput("rot-general-s2 needs --c0".into())
            })?,
        },
        "hyp-cylinder" => FamilyKind::HypCylinderH2,
        "hyp-general" => FamilyKind::HypGeneralH2 {
            energy: energy.ok_or_else(|| {
                Error::InvalidInput("hyp-general needs --energy".into())
            })?,
        },
        "parabolic" => FamilyKind::ParabolicH2,
        "euclidean-sphere" => FamilyKind::EuclSphere,
        "euclidean-cylinder" => FamilyKind::EuclCylinder,
        other => {
            return Err(Error::InvalidInput(format!("unknown family '{other}'")))
        }
    };
    ProfileFamily::new(kind, mean_curvature)
}

/// Full-precision numeric formatting: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Atomically write `content` to `path` (temp file in the same directory,
/// then rename).
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
            std::process::id()
        )),
        None => PathBuf::from(format!(".out.tmp-{}", std::process::id())),
    };
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

// --- generate ---

#[derive(Debug, Clone)]
pub struct GenerateConfig {
    pub family: ProfileFamily,
    pub samples: usize,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleRow {
    pub param: f64,
    pub base_arclength: f64,
    pub h: f64,
    pub nu: f64,
    pub h_num: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerateMetadata {
    pub family: String,
    pub mean_curvature: f64,
    pub is_bigraph: bool,
    pub domain: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Serialize)]
pub struct GenerateOutput {
    pub metadata: GenerateMetadata,
    pub samples: Vec<SampleRow>,
}

/// Sample the generating curve of the configured family.
pub fn run_generate(cfg: &GenerateConfig) -> Result<GenerateOutput> {
    if cfg.samples < 2 {
        return Err(Error::InvalidInput("need at least 2 samples".into()));
    }
    let curve = profiles::make_profile(cfg.family)?;
    let (a, b) = curve.domain();
    let orbit = {
        let (ua, ub) = curve.orbit_range();
        0.5 * (ua + ub)
    };
    // centered stencils need margin from the boundary unless the profile
    // formulas extend analytically past it; quadrature-height families keep
    // a radial chart whose derivatives grow like an inverse square root
    // towards the edge, so they get a wider berth
    let margin = 0.02 * (b - a);
    let mut rows = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let param = a + (b - a) * i as f64 / (cfg.samples - 1) as f64;
        let eval_at = if curve.analytic_extension() {
            param
        } else {
            param.clamp(a + margin, b - margin)
        };
        let s = geomcheck::sample_invariant(&curve, eval_at, orbit, geomcheck::DEFAULT_FD_STEP)?;
        rows.push(SampleRow {
            param,
            base_arclength: curve.base_arclength(param)?,
            h: curve.height(param)?,
            nu: s.nu,
            h_num: s.mean_curvature,
        });
    }
    Ok(GenerateOutput {
        metadata: GenerateMetadata {
            family: cfg.family.kind.tag().to_string(),
            mean_curvature: cfg.family.mean_curvature,
            is_bigraph: curve.is_bigraph(),
            domain: curve.domain(),
            samples: cfg.samples,
        },
        samples: rows,
    })
}

/// Render generated samples in the configured format.
pub fn render_generate(out: &GenerateOutput, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut s = String::from("param,base_arclength,h,nu,h_num\n");
            for r in &out.samples {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt17(r.param),
                    fmt17(r.base_arclength),
                    fmt17(r.h),
                    fmt17(r.nu),
                    fmt17(r.h_num)
                ));
            }
            s
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(out).expect("serializable");
            s.push('\n');
            s
        }
    }
}

// --- verify ---

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub family: ProfileFamily,
    pub grid: usize,
    pub tolerance_override: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfigEcho,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub timings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfigEcho {
    pub family: String,
    pub mean_curvature: f64,
    pub grid: usize,
    pub tolerance_override: Option<f64>,
}

struct CheckSet {
    override_tol: Option<f64>,
    checks: Vec<CheckRecord>,
    timings: BTreeMap<String, f64>,
}

impl CheckSet {
    fn push(&mut self, name: &str, expected: f64, actual: f64, tolerance: f64, t0: Instant) {
        let tolerance = self.override_tol.unwrap_or(tolerance);
        self.checks.push(CheckRecord {
            name: name.to_string(),
            expected,
            actual,
            tolerance,
            pass: (actual - expected).abs() <= tolerance,
        });
        self.timings
            .insert(name.to_string(), t0.elapsed().as_secs_f64());
    }
}

/// Run the full property suite for one family.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let curve = profiles::make_profile(cfg.family)?;
    let h = cfg.family.mean_curvature;
    let mut set = CheckSet {
        override_tol: cfg.tolerance_override,
        checks: Vec::new(),
        timings: BTreeMap::new(),
    };

    let t = Instant::now();
    let residual = geomcheck::mean_curvature_residual(&curve, cfg.grid.max(16))?;
    set.push("cmc_residual", 0.0, residual, 1e-6, t);

    if curve.is_bigraph() {
        let t = Instant::now();
        let closed = curve.max_height()?;
        let (top_param, numeric) = curve.numeric_max_height();
        set.push("max_height", closed, numeric, 1e-9, t);

        let t = Instant::now();
        let expected = curve.boundary_kappa()?;
        let measured = geomcheck::measured_boundary_kappa(&curve, 1)?;
        set.push("boundary_kappa", expected, measured, 1e-6, t);

        if curve.analytic_extension() {
            // the one-sided stencil needs a chart that stays regular at the
            // boundary; quadrature-height families keep the radial chart,
            // which turns vertical there
            let t = Instant::now();
            let nus = geomcheck::angle_at_boundary(&curve)?;
            set.push("boundary_angle", 0.0, nus[0].abs().max(nus[1].abs()), 1e-6, t);
        }

        let t = Instant::now();
        // probe just beside the height maximum: on rotational families the
        // maximum sits on the axis, where the chart itself degenerates
        let (da, db) = curve.domain();
        let top_probe = top_param + 1.5e-4 * (db - da);
        let top = geomcheck::sample_invariant(&curve, top_probe, orbit_mid(&curve), 1e-3)?;
        set.push("top_angle", -1.0, top.nu, 1e-6, t);

        if let Some(sphere_kind) = companion_sphere(cfg.family.kind) {
            let t = Instant::now();
            let sphere =
                profiles::make_profile(ProfileFamily::new(sphere_kind, h)?)?;
            let ratio = curve.numeric_max_height().1 / sphere.numeric_max_height().1;
            set.push("half_height_ratio", 0.5, ratio, 1e-10, t);
        }

        // pointwise angle bound and slope bound along the profile
        let t = Instant::now();
        let params = EstimateParams::new(curve.space_form().curvature(), h, 0.0)?;
        let alpha = estimates::alpha_max(&params);
        let (a, b) = curve.domain();
        let mut worst_zeta = 0.0f64;
        let mut worst_slope = 0.0f64;
        for i in 0..100 {
            let p = a + (b - a) * (i as f64 + 0.5) / 100.0;
            let s = geomcheck::sample_invariant(&curve, p, orbit_mid(&curve), 1e-3)?;
            let z = estimates::zeta(&params, s.h.clamp(0.0, alpha))?;
            worst_zeta = worst_zeta.max(z - s.nu * s.nu);
            let (e1, _, _) = s.first_form;
            let (hp, _) = s.dh_chart;
            let slope_sq = hp * hp / e1;
            worst_slope = worst_slope.max(s.nu * s.nu + slope_sq - 1.0);
        }
        set.push("zeta_pointwise", 0.0, worst_zeta.max(0.0), 1e-6, t);
        set.push("slope_bound", 0.0, worst_slope.max(0.0), 1e-8, t);

        if is_sphere(cfg.family.kind) {
            let t = Instant::now();
            let mid = 0.5 * (a + b);
            let meridian = geomcheck::profile_arc_length(&curve, mid, b)?;
            let bound = estimates::distance_lower_bound(&params, alpha)?;
            set.push("distance_sharpness", bound, meridian, 1e-6, t);

            let t = Instant::now();
            let mut qmax = 0.0f64;
            for i in 0..40 {
                let p = a + (b - a) * (i as f64 + 0.5) / 40.0;
                let s = geomcheck::sample_invariant(&curve, p, orbit_mid(&curve), 1e-3)?;
                qmax = qmax.max(s.q.abs());
            }
            set.push("q_max", 0.0, qmax, 1e-6, t);
        } else {
            let t = Instant::now();
            let mut spread = 0.0f64;
            let (ua, ub) = curve.orbit_range();
            for i in 0..8 {
                let p = a + (b - a) * (i as f64 + 0.5) / 8.0;
                let mut lo = f64::MAX;
                let mut hi = f64::MIN;
                for k in 0..8 {
                    let u = ua + (ub - ua) * (k as f64 + 0.5) / 8.0;
                    let s = geomcheck::sample_invariant(&curve, p, u, 1e-3)?;
                    lo = lo.min(s.q);
                    hi = hi.max(s.q);
                }
                spread = spread.max(hi - lo);
            }
            set.push("q_orbit_variation", 0.0, spread, 1e-8, t);
        }
    }

    if matches!(cfg.family.kind, FamilyKind::HypCylinderH2) {
        let (drift, dev) = cylinder_ode_comparison(h)?;
        let t = Instant::now();
        set.push("energy_drift", 0.0, drift, 1e-9, t);
        set.push("ode_vs_closed_form", 0.0, dev, 1e-8, t);
    }

    if matches!(cfg.family.kind, FamilyKind::ParabolicH2) {
        let t = Instant::now();
        let b2 = (4.0 * h * h - 1.0).sqrt();
        let expect = std::f64::consts::PI * (1.0 + 2.0 * h / b2);
        let actual = profiles::parabolic_obstruction(h)?;
        set.push("obstruction", expect, actual, 1e-9, t);
    }

    let pass = set.checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        config: VerifyConfigEcho {
            family: cfg.family.kind.tag().to_string(),
            mean_curvature: h,
            grid: cfg.grid,
            tolerance_override: cfg.tolerance_override,
        },
        checks: set.checks,
        pass,
        timings: set.timings,
    })
}

fn orbit_mid(curve: &ProfileCurve) -> f64 {
    let (ua, ub) = curve.orbit_range();
    0.5 * (ua + ub)
}

fn is_sphere(kind: FamilyKind) -> bool {
    matches!(
        kind,
        FamilyKind::RotSphereH2 | FamilyKind::RotSphereS2 | FamilyKind::EuclSphere
    )
}

fn companion_sphere(kind: FamilyKind) -> Option<FamilyKind> {
    match kind {
        FamilyKind::RotTorusS2 => Some(FamilyKind::RotSphereS2),
        FamilyKind::HypCylinderH2 => Some(FamilyKind::RotSphereH2),
        FamilyKind::EuclCylinder => Some(FamilyKind::EuclSphere),
        _ => None,
    }
}

/// Integrate the hyperbolic-translation system at zero energy and compare
/// with the closed-form generating curve. Returns (energy drift, sup
/// deviation).
pub fn cylinder_ode_comparison(h: f64) -> Result<(f64, f64)> {
    use crate::numerics::{integrate_ivp, OdeSystem};
    let b2 = (4.0 * h * h - 1.0).sqrt();
    let sys = OdeSystem::new(3, move |_t, y, dy| {
        let (x, a) = (y[0], y[2]);
        let root = (1.0 + x * x).sqrt();
        dy[0] = root * a.sin();
        dy[1] = a.cos();
        dy[2] = 2.0 * h + x * a.cos() / root;
    })
    .with_invariant(move |y| -2.0 * h * y[0] - (1.0 + y[0] * y[0]).sqrt() * y[2].cos());
    let h0 = (2.0 * h / b2) * (1.0 / b2).atan();
    let span = std::f64::consts::PI / (2.0 * b2);
    let sol = integrate_ivp(
        &sys,
        &[0.0, h0, std::f64::consts::FRAC_PI_2],
        (0.0, span),
        1e-11,
        1e-13,
    )?;
    let mut dev = 0.0f64;
    for i in 0..=400 {
        let t = span * i as f64 / 400.0;
        let y = sol.dense_eval(t);
        let r = t * b2;
        let xc = r.sin() / b2;
        let hc = (2.0 * h / b2) * (r.cos() / (b2 * b2 + r.sin() * r.sin()).sqrt()).atan();
        dev = dev.max((y[0] - xc).abs().max((y[1] - hc).abs()));
    }
    Ok((sol.max_invariant_drift, dev))
}

/// Render a verify report as pretty JSON.
pub fn render_report(report: &VerifyReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("serializable");
    s.push('\n');
    s
}

// --- bounds ---

#[derive(Debug, Clone)]
pub struct BoundsConfig {
    pub params: EstimateParams,
    pub height: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ConvexityRecord {
    pub branch: String,
    /// Height cap from the printed corollary coefficient
    /// `(4H^2 + c (1 - nu0)^2) / (8H^2)` (coincides with `alpha/2` when
    /// `c >= 0` is reported through the first branch).
    pub height_cap_printed: f64,
    /// Height cap with the theorem-consistent coefficient
    /// `(4H^2 + c (1 - nu0^2)) / (8H^2)`.
    pub height_cap_theorem_consistent: f64,
    pub forces_convex_printed: Option<bool>,
    pub forces_convex_theorem_consistent: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct BoundsRecord {
    pub c: f64,
    pub mean_curvature: f64,
    pub nu0: f64,
    pub height_fraction: Option<f64>,
    pub height: Option<f64>,
    pub alpha_max: f64,
    pub kappa_lower_general: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_lower_height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_lower_bound: Option<f64>,
    pub convexity: ConvexityRecord,
}

/// Evaluate the estimate family for one parameter set.
pub fn run_bounds(cfg: &BoundsConfig) -> Result<BoundsRecord> {
    let params = &cfg.params;
    let alpha = estimates::alpha_max(params);
    let kappa_general = estimates::kappa_lower_general(params);
    let kappa_height = match params.height_fraction() {
        Some(_) => Some(estimates::kappa_lower_height(params)?),
        None => None,
    };
    let distance = match cfg.height {
        Some(hh) => Some(estimates::distance_lower_bound(params, hh)?),
        None => None,
    };

    let (c, h, nu0) = (params.curvature(), params.mean_curvature(), params.nu0());
    let hh2 = 8.0 * h * h;
    let convexity = if c >= 0.0 {
        ConvexityRecord {
            branch: "c >= 0: convex when h <= alpha/2".into(),
            height_cap_printed: alpha / 2.0,
            height_cap_theorem_consistent: alpha / 2.0,
            forces_convex_printed: cfg.height.map(|hh| hh <= alpha / 2.0),
            forces_convex_theorem_consistent: cfg.height.map(|hh| hh <= alpha / 2.0),
        }
    } else {
        let printed = (4.0 * h * h + c * (1.0 - nu0) * (1.0 - nu0)) / hh2 * alpha;
        let theorem = (4.0 * h * h + c * (1.0 - nu0 * nu0)) / hh2 * alpha;
        ConvexityRecord {
            branch: "c < 0: convex when h <= coefficient * alpha".into(),
            height_cap_printed: printed,
            height_cap_theorem_consistent: theorem,
            forces_convex_printed: cfg.height.map(|hh| hh <= printed),
            forces_convex_theorem_consistent: cfg.height.map(|hh| hh <= theorem),
        }
    };

    Ok(BoundsRecord {
        c,
        mean_curvature: h,
        nu0,
        height_fraction: params.height_fraction(),
        height: cfg.height,
        alpha_max: alpha,
        kappa_lower_general: kappa_general,
        kappa_lower_height: kappa_height,
        distance_lower_bound: distance,
        convexity,
    })
}

/// Render a bounds record: pretty JSON or a six-digit human summary.
pub fn render_bounds(rec: &BoundsRecord, json: bool) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(rec).expect("serializable");
        s.push('\n');
        return s;
    }
    let mut s = String::new();
    s.push_str(&format!(
        "alpha_max            = {:.6}\n",
        rec.alpha_max
    ));
    s.push_str(&format!(
        "kappa_lower_general  = {:.6}\n",
        rec.kappa_lower_general
    ));
    if let Some(k) = rec.kappa_lower_height {
        s.push_str(&format!("kappa_lower_height   = {k:.6}\n"));
    }
    if let Some(d) = rec.distance_lower_bound {
        s.push_str(&format!("distance_lower_bound = {d:.6}\n"));
    }
    s.push_str(&format!("convexity: {}\n", rec.convexity.branch));
    s.push_str(&format!(
        "  height cap (printed coefficient)  = {:.6}\n",
        rec.convexity.height_cap_printed
    ));
    s.push_str(&format!(
        "  height cap (theorem coefficient)  = {:.6}\n",
        rec.convexity.height_cap_theorem_consistent
    ));
    if let (Some(a), Some(b)) = (
        rec.convexity.forces_convex_printed,
        rec.convexity.forces_convex_theorem_consistent,
    ) {
        s.push_str(&format!(
            "  forces convex boundary: printed = {a}, theorem = {b}\n"
        ));
    }
    s
}

// --- figures ---

#[derive(Debug, Clone)]
pub struct FiguresConfig {
    pub out_dir: PathBuf,
    pub samples: usize,
}

/// Mean curvatures of the first profile figure (hyperbolic families).
pub const FIG1_H_VALUES: [f64; 6] = [0.54, 0.6, 0.7, 0.8, 0.9, 1.0];
/// Mean curvatures of the second profile figure (spherical families),
/// including the height-maximizing value.
pub const FIG2_H_VALUES: [f64; 6] = [0.05, 0.12, 0.331372, 0.6, 1.0, 2.0];

#[derive(Debug, Serialize)]
pub struct FiguresMeta {
    pub h_star: f64,
    pub torus_height_star: f64,
    pub sphere_height_star: f64,
}

/// Emit the figure data bundles; returns the written paths.
pub fn run_figures(cfg: &FiguresConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut written = Vec::new();

    let bundles: [(&str, FamilyKind, &[f64]); 4] = [
        ("fig1_spheres.csv", FamilyKind::RotSphereH2, &FIG1_H_VALUES),
        ("fig1_cylinders.csv", FamilyKind::HypCylinderH2, &FIG1_H_VALUES),
        ("fig2_spheres.csv", FamilyKind::RotSphereS2, &FIG2_H_VALUES),
        ("fig2_tori.csv", FamilyKind::RotTorusS2, &FIG2_H_VALUES),
    ];
    for (name, kind, h_values) in bundles {
        let mut csv = String::from("mean_curvature,param,base_arclength,h\n");
        for &h in h_values {
            let curve = profiles::make_profile(ProfileFamily::new(kind, h)?)?;
            let (a, b) = curve.domain();
            for i in 0..cfg.samples {
                let p = a + (b - a) * i as f64 / (cfg.samples - 1) as f64;
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt17(h),
                    fmt17(p),
                    fmt17(curve.base_arclength(p)?),
                    fmt17(curve.height(p)?)
                ));
            }
        }
        let path = cfg.out_dir.join(name);
        write_atomic(&path, &csv)?;
        written.push(path);
    }

    let (h_star, torus_height) = profiles::torus_height_argmax();
    let meta = FiguresMeta {
        h_star,
        torus_height_star: torus_height,
        sphere_height_star: 2.0 * torus_height,
    };
    let path = cfg.out_dir.join("fig2_meta.json");
    let mut s = serde_json::to_string_pretty(&meta).expect("serializable");
    s.push('\n');
    write_atomic(&path, &s)?;
    written.push(path);
    Ok(written)
}

/// Write to a file (atomically) or to the given stream when no path is
/// configured.
pub fn emit(content: &str, path: Option<&Path>, fallback: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, content),
        None => {
            fallback.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}
