//! Embedded Dormand-Prince 5(4) integrator with proportional-integral
//! step control and quartic dense output.
//!
//! Coefficients are the classical DOPRI5 tableau; the dense-output
//! polynomial matches value and slope at both step ends and carries the
//! method's fourth-order continuous accuracy.

use crate::{Error, Result};

pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_ATOL: f64 = 1e-12;

const MAX_STEPS: usize = 2_000_000;

// Butcher tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// b (5th order) equals the last A row; e = b - bhat (error coefficients)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output auxiliary coefficients
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// A first-order system `y' = rhs(t, y)`, optionally with a conserved
/// quantity used for drift diagnostics.
pub struct OdeSystem<'a> {
    pub dim: usize,
    pub rhs: Box<dyn Fn(f64, &[f64], &mut [f64]) + 'a>,
    pub invariant: Option<Box<dyn Fn(&[f64]) -> f64 + 'a>>,
}

impl<'a> OdeSystem<'a> {
    pub fn new<F>(dim: usize, rhs: F) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + 'a,
    {
        OdeSystem { dim, rhs: Box::new(rhs), invariant: None }
    }

    pub fn with_invariant<G>(mut self, inv: G) -> Self
    where
        G: Fn(&[f64]) -> f64 + 'a,
    {
        self.invariant = Some(Box::new(inv));
        self
    }
}

struct Segment {
    t0: f64,
    h: f64,
    rcont: [Vec<f64>; 5],
}

/// Dense-output trajectory of one integration.
pub struct OdeSolution {
    pub nodes: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub max_invariant_drift: f64,
    segments: Vec<Segment>,
    forward: bool,
}

impl OdeSolution {
    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("solution has at least the initial state")
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    /// Evaluate the piecewise quartic interpolant at `t` (clamped to the
    /// integrated span).
    pub fn dense_eval(&self, t: f64) -> Vec<f64> {
        let seg = match self.segments.binary_search_by(|s| {
            if self.forward {
                s.t0.partial_cmp(&t).unwrap()
            } else {
                t.partial_cmp(&s.t0).unwrap()
            }
        }) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let s = &self.segments[seg];
        let theta = ((t - s.t0) / s.h).clamp(0.0, 1.0);
        let th1 = 1.0 - theta;
        let n = s.rcont[0].len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[i] = s.rcont[0][i]
                + theta
                    * (s.rcont[1][i]
                        + th1 * (s.rcont[2][i] + theta * (s.rcont[3][i] + th1 * s.rcont[4][i])));
        }
        out
    }
}

/// Integrate `sys` from `span.0` to `span.1` with the given tolerances.
///
/// Steps are rejected when the embedded error estimate exceeds the mixed
/// tolerance; step-size underflow below `1e-14 * |span|` reports a
/// singularity at the parameter value reached.
pub fn integrate_ivp(
    sys: &OdeSystem,
    y0: &[f64],
    span: (f64, f64),
    rtol: f64,
    atol: f64,
) -> Result<OdeSolution> {
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    if y0.len() != sys.dim {
        return Err(Error::InvalidInput("initial state has wrong dimension".into()));
    }
    let (t0, t_end) = span;
    let dir = (t_end - t0).signum();
    if dir == 0.0 {
        return Err(Error::InvalidInput("empty integration span".into()));
    }
    let span_len = (t_end - t0).abs();
    let n = sys.dim;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    (sys.rhs)(t, &y, &mut k[0]);

    let inv0 = sys.invariant.as_ref().map(|f| f(&y));
    let mut drift = 0.0f64;

    let mut h = dir * initial_step(sys, t, &y, &k[0], dir, rtol, atol, span_len);

    let mut nodes = vec![t];
    let mut states = vec![y.clone()];
    let mut segments = Vec::new();

    let mut facold = 1e-4f64;
    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const SAFETY: f64 = 0.9;
    let mut rejected = false;

    let mut ytmp = vec![0.0; n];
    let mut y1 = vec![0.0; n];

    for _step in 0..MAX_STEPS {
        if (t - t_end).abs() < 1e-30 || (t_end - t) * dir <= 0.0 {
            break;
        }
        if h.abs() < 1e-14 * span_len {
            return Err(Error::Singularity {
                at: t,
                message: "step size underflow".into(),
            });
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }

        // stages 2..7 (stage 1 is the FSAL slope already in k[0])
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ytmp[i] = y[i] + h * acc;
            }
            let (lo, hitail) = k.split_at_mut(s);
            let _ = lo;
            (sys.rhs)(t + C[s] * h, &ytmp, &mut hitail[0]);
        }
        // 5th-order solution is the last stage state (A row 7 == b)
        y1.copy_from_slice(&ytmp);

        // error norm
        let mut err = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let sc = atol + rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / n as f64).sqrt();

        if !err.is_finite() {
            return Err(Error::Singularity {
                at: t,
                message: "non-finite error estimate".into(),
            });
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // accept
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(0.2, 10.0);
            let mut hnew = h / fac;
            if rejected {
                hnew = if hnew.abs() > h.abs() { h } else { hnew };
            }
            rejected = false;
            facold = err.max(1e-4);

            // dense-output coefficients for this step
            let mut rc: [Vec<f64>; 5] = [
                y.clone(),
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
                vec![0.0; n],
            ];
            for i in 0..n {
                let ydiff = y1[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                rc[1][i] = ydiff;
                rc[2][i] = bspl;
                rc[3][i] = ydiff - h * k[6][i] - bspl;
                let mut d = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    d += D[j] * kj[i];
                }
                rc[4][i] = h * d;
            }
            segments.push(Segment { t0: t, h, rcont: rc });

            t += h;
            y.copy_from_slice(&y1);
            k[0] = k[6].clone(); // FSAL
            nodes.push(t);
            states.push(y.clone());
            if let (Some(invf), Some(i0)) = (sys.invariant.as_ref(), inv0) {
                drift = drift.max((invf(&y) - i0).abs());
            }
            h = hnew;
        } else {
            rejected = true;
            h /= (fac11 / SAFETY).min(5.0);
        }
    }

    if (t_end - t) * dir > 1e-30 {
        return Err(Error::Accuracy(format!(
            "integration stalled at t = {t} before reaching {t_end}"
        )));
    }

    Ok(OdeSolution {
        nodes,
        states,
        max_invariant_drift: drift,
        segments,
        forward: dir > 0.0,
    })
}

#[allow(clippy::too_many_arguments)]
fn initial_step(
    sys: &OdeSystem,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    rtol: f64,
    atol: f64,
    span_len: f64,
) -> f64 {
    let n = sys.dim;
    let sc: Vec<f64> = y0.iter().map(|v| atol + rtol * v.abs()).collect();
    let d0 = rms(y0, &sc);
    let d1 = rms(f0, &sc);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span_len);
    // one explicit Euler probe to estimate the second derivative scale
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    (sys.rhs)(t0 + dir * h0, &y1, &mut f1);
    let df: Vec<f64> = (0..n).map(|i| f1[i] - f0[i]).collect();
    let d2 = rms(&df, &sc) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    h0.min(h1).min(span_len)
}

fn rms(v: &[f64], sc: &[f64]) -> f64 {
    let s: f64 = v.iter().zip(sc).map(|(a, b)| (a / b) * (a / b)).sum();
    (s / v.len() as f64).sqrt()
}
