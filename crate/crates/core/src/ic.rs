//! Monotone initial profiles and their mollification.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_gradient, FieldSet, Grid1D, Topology, TOL_MONO};
use crate::systems::{BoxU, BOX_TOL};

/// A bounded nondecreasing profile of one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MonotoneProfile {
    /// Cubic `3s² − 2s³` transition over `[center − width/2, center + width/2]`;
    /// `width = 0` is a sharp step taking the midpoint value at `center`.
    Smoothstep {
        lo: f64,
        hi: f64,
        center: f64,
        width: f64,
    },
    /// `lo + (hi − lo)(1 + tanh((x − center)/width))/2`.
    Tanhstep {
        lo: f64,
        hi: f64,
        center: f64,
        width: f64,
    },
    /// Piecewise linear through `(x_k, y_k)`, constant outside.
    Table { x: Vec<f64>, y: Vec<f64> },
    LinearRamp { slope: f64, offset: f64 },
}

impl MonotoneProfile {
    pub fn smoothstep(lo: f64, hi: f64, center: f64, width: f64) -> Self {
        Self::Smoothstep {
            lo,
            hi,
            center,
            width,
        }
    }

    pub fn tanhstep(lo: f64, hi: f64, center: f64, width: f64) -> Self {
        Self::Tanhstep {
            lo,
            hi,
            center,
            width,
        }
    }

    pub fn step(lo: f64, hi: f64, center: f64) -> Self {
        Self::smoothstep(lo, hi, center, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        match self {
            Self::Smoothstep {
                lo,
                hi,
                center,
                width,
            } => {
                if ![*lo, *hi, *center, *width].iter().all(|v| v.is_finite()) {
                    return bad("smoothstep parameters must be finite".into());
                }
                if lo > hi || *width < 0.0 {
                    return bad(format!("smoothstep needs lo ≤ hi and width ≥ 0, got lo={lo}, hi={hi}, width={width}"));
                }
            }
            Self::Tanhstep {
                lo,
                hi,
                center,
                width,
            } => {
                if ![*lo, *hi, *center, *width].iter().all(|v| v.is_finite()) {
                    return bad("tanhstep parameters must be finite".into());
                }
                if lo > hi || *width <= 0.0 {
                    return bad(format!("tanhstep needs lo ≤ hi and width > 0, got lo={lo}, hi={hi}, width={width}"));
                }
            }
            Self::Table { x, y } => {
                if x.is_empty() || x.len() != y.len() {
                    return bad(format!("table has {} abscissae and {} values", x.len(), y.len()));
                }
                if x.iter().chain(y).any(|v| !v.is_finite()) {
                    return bad("table entries must be finite".into());
                }
                if let Some(k) = x.windows(2).position(|w| w[1] <= w[0]) {
                    return bad(format!("table abscissae not strictly increasing at entry {}", k + 1));
                }
                if let Some(k) = y.windows(2).position(|w| w[1] < w[0]) {
                    return bad(format!("table values decrease at entry {}", k + 1));
                }
            }
            Self::LinearRamp { slope, offset } => {
                if !slope.is_finite() || !offset.is_finite() || *slope < 0.0 {
                    return bad(format!("linear ramp needs a finite slope ≥ 0, got {slope}"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Smoothstep {
                lo,
                hi,
                center,
                width,
            } => {
                let s = if *width == 0.0 {
                    if x < *center {
                        0.0
                    } else if x > *center {
                        1.0
                    } else {
                        0.5
                    }
                } else {
                    let s = ((x - center) / width + 0.5).clamp(0.0, 1.0);
                    s * s * (3.0 - 2.0 * s)
                };
                lo + (hi - lo) * s
            }
            Self::Tanhstep {
                lo,
                hi,
                center,
                width,
            } => lo + (hi - lo) * 0.5 * (1.0 + ((x - center) / width).tanh()),
            Self::Table { x: xs, y: ys } => {
                if x <= xs[0] {
                    return ys[0];
                }
                let last = xs.len() - 1;
                if x >= xs[last] {
                    return ys[last];
                }
                let k = xs.partition_point(|v| *v <= x) - 1;
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                ys[k] + t * (ys[k + 1] - ys[k])
            }
            Self::LinearRamp { slope, offset } => slope * x + offset,
        }
    }

    /// Limits at `∓∞` when the profile is bounded.
    pub fn limits(&self) -> Option<(f64, f64)> {
        match self {
            Self::Smoothstep { lo, hi, .. } | Self::Tanhstep { lo, hi, .. } => Some((*lo, *hi)),
            Self::Table { y, .. } => Some((y[0], y[y.len() - 1])),
            Self::LinearRamp { slope, offset } => (*slope == 0.0).then_some((*offset, *offset)),
        }
    }
}

/// Samples one profile per component on the grid nodes.
///
/// Fails when a table is not monotone, when the samples are not
/// nondecreasing, or when a sample leaves `bounds` by more than the clamping
/// tolerance.
pub fn sample_profile(
    profiles: &[MonotoneProfile],
    grid: &Grid1D,
    bounds: Option<&BoxU>,
) -> Result<FieldSet> {
    if let Some(b) = bounds {
        if b.dim() != profiles.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} profiles for a system with {} components",
                profiles.len(),
                b.dim()
            )));
        }
    }
    for p in profiles {
        p.validate()?;
    }
    let nodes = grid.nodes();
    let values: Vec<Vec<f64>> = profiles
        .iter()
        .map(|p| nodes.iter().map(|&x| p.eval(x)).collect())
        .collect();
    let field = FieldSet::new(*grid, values)?;
    if let Some(b) = bounds {
        for (i, comp) in field.components().iter().enumerate() {
            for (j, v) in comp.iter().enumerate() {
                let exc = (b.lo()[i] - v).max(v - b.hi()[i]);
                if exc > BOX_TOL {
                    let mut point = vec![0.0; field.m()];
                    field.point(j, &mut point);
                    return Err(Error::OutsideBox {
                        point,
                        component: i,
                        excursion: exc,
                    });
                }
            }
        }
    }
    let (min, comp, node) = min_increment(&field);
    if min < -TOL_MONO {
        return Err(Error::MonotonicityViolation {
            component: comp,
            node,
            value: min,
        });
    }
    Ok(field)
}

/// Smallest forward increment `(u_{j+1} − u_j)/dx` over components and nodes.
pub fn check_monotone(f: &FieldSet) -> f64 {
    min_increment(f).0
}

fn min_increment(f: &FieldSet) -> (f64, usize, usize) {
    let w = forward_gradient(f);
    let mut best = (f64::INFINITY, 0, 0);
    for (i, comp) in w.values.iter().enumerate() {
        for (j, v) in comp.iter().enumerate() {
            if *v < best.0 {
                best = (*v, i, j);
            }
        }
    }
    best
}

/// Unnormalized bump `exp(−1/(1 − x²))` on `(−1, 1)`.
fn raw_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// Mass of the unnormalized bump by a 2001-point trapezoid rule on `(−1, 1)`.
pub fn bump_normalization() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| {
        let n = 2000;
        let h = 2.0 / n as f64;
        // Endpoint values vanish.
        (1..n).map(|k| raw_bump(-1.0 + k as f64 * h)).sum::<f64>() * h
    })
}

/// Unit-mass bump `η(x) = Z⁻¹ exp(−1/(1 − x²))`.
pub fn bump(x: f64) -> f64 {
    raw_bump(x) / bump_normalization()
}

/// Discrete kernel weights `η_ε(k·dx)·dx` for `|k·dx| < ε`, renormalized
/// to sum to one. Index `K + k` holds offset `k`.
pub fn mollifier_weights(eps: f64, dx: f64) -> Vec<f64> {
    let mut reach = (eps / dx).floor() as usize;
    while reach > 0 && reach as f64 * dx >= eps {
        reach -= 1;
    }
    let mut w: Vec<f64> = (-(reach as i64)..=reach as i64)
        .map(|k| bump(k as f64 * dx / eps) / eps * dx)
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Convolution with `η_ε`. Values beyond the ends are the boundary values
/// (line) or the periodic continuation including seam jumps (periodic).
///
/// For `eps < 2·dx` the kernel is not resolved: a warning is logged and the
/// field is returned unchanged.
pub fn mollify(f: &FieldSet, eps: f64) -> Result<FieldSet> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mollification radius must be positive, got {eps}"
        )));
    }
    let g = f.grid();
    if eps < 2.0 * g.dx() {
        log::warn!(
            "mollification radius {eps} is below 2·dx = {}; data left unchanged",
            2.0 * g.dx()
        );
        return Ok(f.clone());
    }
    let weights = mollifier_weights(eps, g.dx());
    let reach = (weights.len() / 2) as i64;
    let nodes = g.node_count() as i64;
    let mut out = f.clone();
    for (i, comp) in out.components_mut().iter_mut().enumerate() {
        let src = f.component(i);
        let jump = f.seam_jumps()[i];
        let at = |idx: i64| -> f64 {
            match g.topology() {
                Topology::Line => src[idx.clamp(0, nodes - 1) as usize],
                Topology::Periodic => {
                    let q = idx.div_euclid(nodes);
                    src[idx.rem_euclid(nodes) as usize] + q as f64 * jump
                }
            }
        };
        for (j, v) in comp.iter_mut().enumerate() {
            let j = j as i64;
            *v = weights
                .iter()
                .enumerate()
                .map(|(k, w)| w * at(j - (k as i64 - reach)))
                .sum();
        }
    }
    Ok(out)
}
