//! Explicit upwind scheme for `∂t u^i + a^i(u) ∂x u^i = ε ∂xx u^i`.

use log::warn;

use crate::error::{Error, Result};
use crate::estimates::{compute_monitor, MonitorReport};
use crate::grid::{quad_unchecked, FieldSet, Grid1D, TOL_MONO};
use crate::ic::{check_monotone, mollify, sample_profile, MonotoneProfile};
use crate::systems::{SystemSpec, BOX_TOL};

/// Initial data of a run: profiles to sample, or a ready field.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Profiles(Vec<MonotoneProfile>),
    Field(FieldSet),
}

/// One complete experiment.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub initial: InitialData,
    pub grid: Grid1D,
    pub eps: f64,
    pub mollify_eps: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub monitor_every: usize,
    /// Number of stored snapshots, equally spaced over `[0, t_end]`.
    pub snapshots: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive and finite, got {}", self.t_end));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be finite and ≥ 0, got {}", self.eps));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl must lie in (0, 1), got {}", self.cfl));
        }
        if !(self.mollify_eps >= 0.0 && self.mollify_eps.is_finite()) {
            return bad(format!("mollify_eps must be finite and ≥ 0, got {}", self.mollify_eps));
        }
        if self.mollify_eps > 0.0 && self.mollify_eps < 2.0 * self.grid.dx() {
            return bad(format!(
                "mollify_eps {} is not resolved by dx {} (needs ≥ 2 dx)",
                self.mollify_eps,
                self.grid.dx()
            ));
        }
        if self.monitor_every == 0 {
            return bad("monitor_every must be ≥ 1".into());
        }
        if self.snapshots < 2 {
            return bad("at least two snapshots (initial and final) are stored".into());
        }
        let m = match &self.initial {
            InitialData::Profiles(p) => p.len(),
            InitialData::Field(f) => {
                if f.grid() != &self.grid {
                    return Err(Error::GridMismatch);
                }
                f.m()
            }
        };
        if m != self.system.m() {
            return Err(Error::DimensionMismatch(format!(
                "{m} initial components for a {}-component system",
                self.system.m()
            )));
        }
        Ok(())
    }

    /// Sampled, box-checked and mollified initial field.
    pub fn initial_field(&self) -> Result<FieldSet> {
        let raw = match &self.initial {
            InitialData::Profiles(p) => sample_profile(p, &self.grid, Some(self.system.bounds()))?,
            InitialData::Field(f) => {
                let mut point = vec![0.0; f.m()];
                for j in 0..self.grid.node_count() {
                    f.point(j, &mut point);
                    let exc = self.system.bounds().excursion(&point);
                    if exc > BOX_TOL {
                        let component = (0..f.m())
                            .find(|&i| {
                                point[i] < self.system.bounds().lo()[i] - BOX_TOL
                                    || point[i] > self.system.bounds().hi()[i] + BOX_TOL
                            })
                            .unwrap_or(0);
                        return Err(Error::OutsideBox {
                            point,
                            component,
                            excursion: exc,
                        });
                    }
                }
                let min = check_monotone(f);
                if min < -TOL_MONO {
                    return Err(Error::InvalidProfile(format!(
                        "initial field is not nondecreasing (increment {min:e})"
                    )));
                }
                f.clone()
            }
        };
        if self.mollify_eps > 0.0 {
            mollify(&raw, self.mollify_eps)
        } else {
            Ok(raw)
        }
    }
}

/// The discrete state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u: FieldSet,
    pub step_index: usize,
    /// Frozen ghost values `(left, right)` on line grids.
    ghosts: Option<(Vec<f64>, Vec<f64>)>,
}

impl SolverState {
    /// State at `t = 0`; on a line grid the boundary values are frozen as ghosts.
    pub fn new(u: FieldSet) -> Self {
        let ghosts = (!u.grid().is_periodic()).then(|| {
            let last = u.grid().node_count() - 1;
            (
                u.components().iter().map(|c| c[0]).collect(),
                u.components().iter().map(|c| c[last]).collect(),
            )
        });
        Self {
            t: 0.0,
            u,
            step_index: 0,
            ghosts,
        }
    }
}

/// Nodal velocities `a^i(u_j)` plus the spatially constant nonlocal part, and
/// the magnitude of that nonlocal part.
pub fn velocity_field(u: &FieldSet, spec: &SystemSpec) -> (Vec<Vec<f64>>, f64) {
    let m = u.m();
    let nodes = u.grid().node_count();
    let offset: Vec<f64> = match spec.nonlocal() {
        Some(term) => {
            let integrals: Vec<f64> = u
                .components()
                .iter()
                .map(|c| quad_unchecked(c, u.grid()))
                .collect();
            let mut out = vec![0.0; m];
            term.q.mul_vec(&integrals, &mut out);
            out.iter().map(|v| v * term.scale).collect()
        }
        None => vec![0.0; m],
    };
    let nonlocal_sup = offset.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut vel = vec![vec![0.0; nodes]; m];
    let mut point = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut a = vec![0.0; m];
    for j in 0..nodes {
        u.point(j, &mut point);
        spec.velocity_clamped(&point, &mut scratch, &mut a);
        for i in 0..m {
            vel[i][j] = a[i] + offset[i];
        }
    }
    (vel, nonlocal_sup)
}

/// `cfl · min(dx / max(a_max, 1e-14), dx² / max(2ε, 1e-14))` (no diffusive
/// limit when `ε = 0`), further capped
/// so that the central weight `1 − ν − 2μ` of the update stays nonnegative
/// (the cap only binds for `cfl > 1/2`).
pub fn stable_dt_from(a_max: f64, dx: f64, eps: f64, cfl: f64) -> f64 {
    let advective = dx / a_max.max(1e-14);
    let diffusive = if eps > 0.0 {
        dx * dx / (2.0 * eps).max(1e-14)
    } else {
        f64::INFINITY
    };
    let dt = cfl * advective.min(diffusive);
    let rate = a_max / dx + 2.0 * eps / (dx * dx);
    if rate > 0.0 {
        dt.min(1.0 / rate)
    } else {
        dt
    }
}

pub fn stable_dt(state: &SolverState, spec: &SystemSpec, eps: f64, cfl: f64) -> f64 {
    let (vel, _) = velocity_field(&state.u, spec);
    stable_dt_from(max_abs(&vel), state.u.grid().dx(), eps, cfl)
}

fn max_abs(vel: &[Vec<f64>]) -> f64 {
    vel.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// One forward Euler step of size `dt`.
pub fn step(state: &SolverState, spec: &SystemSpec, eps: f64, dt: f64) -> Result<SolverState> {
    let (vel, _) = velocity_field(&state.u, spec);
    let limit = stable_dt_from(max_abs(&vel), state.u.grid().dx(), eps, 1.0);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    advance(state, &vel, eps, dt)
}

fn advance(state: &SolverState, vel: &[Vec<f64>], eps: f64, dt: f64) -> Result<SolverState> {
    let u = &state.u;
    let g = u.grid();
    let n = g.node_count();
    let dx = g.dx();
    let (nu, mu) = (dt / dx, dt * eps / (dx * dx));
    let mut next = u.clone();
    for (i, out) in next.components_mut().iter_mut().enumerate() {
        let c = u.component(i);
        let (left_ghost, right_ghost) = match &state.ghosts {
            Some((l, r)) => (l[i], r[i]),
            None => {
                let jump = u.seam_jumps()[i];
                (c[n - 1] - jump, c[0] + jump)
            }
        };
        for j in 0..n {
            let uc = c[j];
            let ul = if j == 0 { left_ghost } else { c[j - 1] };
            let ur = if j + 1 == n { right_ghost } else { c[j + 1] };
            let a = vel[i][j];
            let adv = if a >= 0.0 { a * (uc - ul) } else { a * (ur - uc) };
            let v = uc - nu * adv + mu * ((ur - uc) - (uc - ul));
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    component: i,
                    node: j,
                    step: state.step_index + 1,
                });
            }
            out[j] = v;
        }
    }
    Ok(SolverState {
        t: state.t + dt,
        u: next,
        step_index: state.step_index + 1,
        ghosts: state.ghosts.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: FieldSet,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub initial: FieldSet,
    pub snapshots: Vec<Snapshot>,
    pub monitors: Vec<MonitorReport>,
    pub final_state: SolverState,
    pub warnings: Vec<String>,
}

/// Checks that the transition zone of `u` keeps `5·m0·t_end` clear of both
/// ends of a line grid. Returns a description of the violation.
pub fn domain_margin_violation(u: &FieldSet, m0: f64, t_end: f64) -> Option<String> {
    let g = u.grid();
    if g.is_periodic() {
        return None;
    }
    let mut zone: Option<(f64, f64)> = None;
    for c in u.components() {
        let (lo, hi) = (c[0], c[c.len() - 1]);
        let rise = hi - lo;
        if rise <= 0.0 {
            continue;
        }
        let tau = 1e-3 * rise;
        for (j, v) in c.iter().enumerate() {
            if *v > lo + tau && *v < hi - tau {
                let x = g.x(j);
                zone = Some(match zone {
                    Some((a, b)) => (a.min(x), b.max(x)),
                    None => (x, x),
                });
            }
        }
    }
    let (a, b) = zone?;
    let margin = 5.0 * m0 * t_end;
    let room = (a - g.x_min()).min(g.x_max() - b);
    (room < margin).then(|| {
        format!(
            "transition zone [{a:.4}, {b:.4}] lies {room:.4} from the boundary, less than 5·M0·t_end = {margin:.4}"
        )
    })
}

/// Runs `config` to `t_end`, recording monitors every `monitor_every` steps
/// (and at the first and last step) and the requested snapshots.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let spec = &config.system;
    let initial = config.initial_field()?;
    let mut warnings = Vec::new();
    if let Some(w) = domain_margin_violation(&initial, spec.m0(), config.t_end) {
        warn!("{w}");
        warnings.push(w);
    }
    let mut state = SolverState::new(initial.clone());
    let snap_times: Vec<f64> = (0..config.snapshots)
        .map(|k| config.t_end * k as f64 / (config.snapshots - 1) as f64)
        .collect();
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        field: initial.clone(),
    }];
    let mut next_snap = 1;

    let (mut vel, mut nonlocal_sup) = velocity_field(&state.u, spec);
    let mut monitors = vec![compute_monitor(0, 0.0, &state.u, spec, None, nonlocal_sup)?];
    let dx = config.grid.dx();
    let t_floor = 1e-14 * config.t_end;

    while next_snap < snap_times.len() {
        let target = snap_times[next_snap];
        let mut dt = stable_dt_from(max_abs(&vel), dx, config.eps, config.cfl);
        let remaining = target - state.t;
        let hits = dt >= remaining - t_floor;
        if hits {
            dt = remaining;
        }
        if dt > 0.0 {
            state = advance(&state, &vel, config.eps, dt)?;
        }
        if hits {
            state.t = target;
        }
        let last = hits && next_snap + 1 == snap_times.len();
        (vel, nonlocal_sup) = velocity_field(&state.u, spec);
        if state.step_index % config.monitor_every == 0 || last {
            let rec = compute_monitor(
                state.step_index,
                state.t,
                &state.u,
                spec,
                monitors.last(),
                nonlocal_sup,
            )?;
            monitors.push(rec);
        }
        if hits {
            snapshots.push(Snapshot {
                t: state.t,
                field: state.u.clone(),
            });
            next_snap += 1;
        }
    }
    Ok(RunOutput {
        initial,
        snapshots,
        monitors,
        final_state: state,
        warnings,
    })
}
