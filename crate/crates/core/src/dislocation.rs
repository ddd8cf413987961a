//! Periodic multi-slip dislocation-density model with a nonlocal stress term,
//! and the rescaling experiment towards the local (non-periodic) model.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::weighted_l2_distance;
use crate::grid::{quad_unchecked, FieldSet, Grid1D, Topology};
use crate::ic::MonotoneProfile;
use crate::matrix::Matrix;
use crate::solver::{domain_margin_violation, run, InitialData, RunConfig, RunOutput};
use crate::systems::{BoxU, NonlocalTerm, SystemSpec};

/// `N` slip systems, each carrying a pair of densities `u^k`, `u^{k+N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DislocationSpec {
    pub n_slip: usize,
    pub a_half: Vec<Vec<f64>>,
    pub q_half: Vec<Vec<f64>>,
    #[serde(default = "default_period")]
    pub period: f64,
}

fn default_period() -> f64 {
    1.0
}

impl DislocationSpec {
    pub fn new(a_half: Vec<Vec<f64>>, q_half: Vec<Vec<f64>>) -> Result<Self> {
        let spec = Self {
            n_slip: a_half.len(),
            a_half,
            q_half,
            period: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Component count `M = 2N`.
    pub fn m(&self) -> usize {
        2 * self.n_slip
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_slip == 0 {
            return Err(Error::InvalidParameter("n_slip must be ≥ 1".into()));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {}", self.period)));
        }
        for (name, rows) in [("a_half", &self.a_half), ("q_half", &self.q_half)] {
            let mat = Matrix::from_rows(rows)?;
            if mat.dim() != self.n_slip {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {0}x{0}, expected {1}x{1}",
                    mat.dim(),
                    self.n_slip
                )));
            }
            if !mat.is_symmetric() {
                return Err(Error::InvalidParameter(format!("{name} must be symmetric")));
            }
        }
        Ok(())
    }
}

fn expand(half: &Matrix) -> Matrix {
    let n = half.dim();
    let mut out = Matrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = half[(i, j)];
            out[(i, j)] = v;
            out[(i + n, j)] = -v;
            out[(i, j + n)] = -v;
            out[(i + n, j + n)] = v;
        }
    }
    out
}

/// Block matrices `[[a, −a], [−a, a]]` and `[[q, −q], [−q, q]]`.
pub fn expand_matrices(spec: &DislocationSpec) -> Result<(Matrix, Matrix)> {
    spec.validate()?;
    Ok((
        expand(&Matrix::from_rows(&spec.a_half)?),
        expand(&Matrix::from_rows(&spec.q_half)?),
    ))
}

/// `A u(x) + Q ∫ u dx` at every node of a periodic grid, `A` acting on the
/// periodic part of `u`.
pub fn nonlocal_velocity(u: &FieldSet, a: &Matrix, q: &Matrix) -> Result<Vec<Vec<f64>>> {
    let g = u.grid();
    if !g.is_periodic() {
        return Err(Error::InvalidGrid("the nonlocal velocity needs a periodic grid".into()));
    }
    let m = u.m();
    if a.dim() != m || q.dim() != m {
        return Err(Error::DimensionMismatch(format!("matrices do not match {m} components")));
    }
    let integrals: Vec<f64> = u.components().iter().map(|c| quad_unchecked(c, g)).collect();
    let mut drift = vec![0.0; m];
    q.mul_vec(&integrals, &mut drift);
    let mut out = vec![vec![0.0; g.node_count()]; m];
    let mut p = vec![0.0; m];
    let mut ap = vec![0.0; m];
    for j in 0..g.node_count() {
        u.point(j, &mut p);
        a.mul_vec(&p, &mut ap);
        for i in 0..m {
            out[i][j] = ap[i] + drift[i];
        }
    }
    Ok(out)
}

/// `slope·x + offset + amplitude·sin(2π(x − phase)/P)`, nondecreasing when
/// `2π|amplitude|/P ≤ slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicProfile {
    pub slope: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl PeriodicProfile {
    pub fn validate(&self, period: f64) -> Result<()> {
        if [self.slope, self.offset, self.amplitude, self.phase]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidProfile("non-finite periodic profile parameter".into()));
        }
        if self.slope < 0.0 {
            return Err(Error::InvalidParameter(format!("negative slope {}", self.slope)));
        }
        if 2.0 * PI * self.amplitude.abs() / period > self.slope * (1.0 + 1e-12) {
            return Err(Error::InvalidProfile(format!(
                "oscillation amplitude {} exceeds what slope {} keeps monotone",
                self.amplitude, self.slope
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, period: f64) -> f64 {
        self.slope * x + self.offset + self.amplitude * (2.0 * PI * (x - self.phase) / period).sin()
    }
}

/// Step controls shared by the dislocation runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunControls {
    pub cfl: f64,
    pub monitor_every: usize,
    pub snapshots: usize,
}

impl Default for RunControls {
    fn default() -> Self {
        Self {
            cfl: 0.45,
            monitor_every: 1,
            snapshots: 11,
        }
    }
}

/// Result of [`run_periodic`].
#[derive(Debug, Clone)]
pub struct PeriodicRun {
    pub output: RunOutput,
    pub slopes: Vec<f64>,
    /// Period mean of each gradient at every snapshot.
    pub gradient_means: Vec<Vec<f64>>,
    /// Largest deviation of a gradient mean from its slope.
    pub max_mean_drift: f64,
    /// `max_i l^i · (M0 + sup of the nonlocal velocity)`, the rate at which
    /// rigid transport can move the periodic part.
    pub drift_rate: f64,
}

/// Builds the run configuration of the periodic model.
pub fn periodic_config(
    spec: &DislocationSpec,
    profiles: &[PeriodicProfile],
    grid: Grid1D,
    eps: f64,
    t_end: f64,
    controls: RunControls,
) -> Result<RunConfig> {
    let (a, q) = expand_matrices(spec)?;
    if !grid.is_periodic() {
        return Err(Error::InvalidGrid("the dislocation model runs on a periodic grid".into()));
    }
    if (grid.length() - spec.period).abs() > 1e-12 * spec.period {
        return Err(Error::InvalidGrid(format!(
            "grid length {} differs from the period {}",
            grid.length(),
            spec.period
        )));
    }
    let m = spec.m();
    if profiles.len() != m {
        return Err(Error::DimensionMismatch(format!("{} profiles for {m} components", profiles.len())));
    }
    for p in profiles {
        p.validate(spec.period)?;
    }
    let n = spec.n_slip;
    for k in 0..n {
        if profiles[k].slope != profiles[k + n].slope {
            return Err(Error::InvalidParameter(format!(
                "seam inconsistency: slopes of components {} and {} differ ({} vs {})",
                k + 1,
                k + n + 1,
                profiles[k].slope,
                profiles[k + n].slope
            )));
        }
    }
    let values: Vec<Vec<f64>> = profiles
        .iter()
        .map(|p| grid.nodes().iter().map(|x| p.eval(*x, spec.period)).collect())
        .collect();
    let jumps = profiles.iter().map(|p| p.slope * spec.period).collect();
    let field = FieldSet::new(grid, values)?.with_seam_jumps(jumps)?;
    let (mut lo, mut hi) = (Vec::with_capacity(m), Vec::with_capacity(m));
    for i in 0..m {
        let part = field.periodic_part(i);
        lo.push(part.iter().copied().fold(f64::INFINITY, f64::min) - 1.0);
        hi.push(part.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0);
    }
    let system = SystemSpec::linear(a, BoxU::new(lo, hi)?)?
        .with_name("dislocation")
        .with_nonlocal(NonlocalTerm { q, scale: 1.0 })?;
    Ok(RunConfig {
        system,
        initial: InitialData::Field(field),
        grid,
        eps,
        mollify_eps: 0.0,
        t_end,
        cfl: controls.cfl,
        monitor_every: controls.monitor_every,
        snapshots: controls.snapshots,
    })
}

/// Evolves periodic-plus-linear data and tracks the gradient period means.
pub fn run_periodic(
    spec: &DislocationSpec,
    profiles: &[PeriodicProfile],
    grid: Grid1D,
    eps: f64,
    t_end: f64,
    controls: RunControls,
) -> Result<PeriodicRun> {
    let config = periodic_config(spec, profiles, grid, eps, t_end, controls)?;
    let output = run(&config)?;
    Ok(summarize_periodic(&config, output, spec.period))
}

pub fn summarize_periodic(config: &RunConfig, output: RunOutput, period: f64) -> PeriodicRun {
    let slopes: Vec<f64> = match &config.initial {
        InitialData::Field(f) => (0..f.m()).map(|i| f.slope(i)).collect(),
        InitialData::Profiles(_) => vec![0.0; config.system.m()],
    };
    let gradient_means: Vec<Vec<f64>> = output
        .snapshots
        .iter()
        .map(|s| {
            let f = &s.field;
            let n = f.grid().node_count();
            (0..f.m())
                .map(|i| {
                    let c = f.component(i);
                    let inner: f64 = c.windows(2).map(|p| p[1] - p[0]).sum();
                    let wrap = c[0] + f.seam_jumps()[i] - c[n - 1];
                    (inner + wrap) / period
                })
                .collect()
        })
        .collect();
    let max_mean_drift = gradient_means
        .iter()
        .flat_map(|row| row.iter().zip(&slopes).map(|(m, l)| (m - l).abs()))
        .fold(0.0, f64::max);
    let nonlocal = output.monitors.iter().fold(0.0f64, |a, r| a.max(r.nonlocal_sup));
    let drift_rate = slopes.iter().copied().fold(0.0, f64::max) * (config.system.m0() + nonlocal);
    PeriodicRun {
        output,
        slopes,
        gradient_means,
        max_mean_drift,
        drift_rate,
    }
}

/// Parameters of [`rescale_experiment`]. Every run uses spacing `dx` on the
/// line `[−1/(2δ), 1/(2δ)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaleParams {
    pub deltas: Vec<f64>,
    pub dx: f64,
    #[serde(default)]
    pub eps: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

fn default_cfl() -> f64 {
    0.45
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescaleRow {
    pub delta: f64,
    pub n: usize,
    /// Largest magnitude of the δ-scaled nonlocal velocity over the run.
    pub nonlocal_sup: f64,
    /// Weighted L² distance between the final states with and without the nonlocal term.
    pub distance: f64,
}

pub fn rescale_configs(
    spec: &DislocationSpec,
    profiles: &[MonotoneProfile],
    params: &RescaleParams,
    delta: f64,
) -> Result<(RunConfig, RunConfig)> {
    let (a, q) = expand_matrices(spec)?;
    let half = 0.5 / delta;
    let n = (2.0 * half / params.dx).round() as usize;
    let grid = Grid1D::new(-half, half, n, Topology::Line)?;
    let mut lo = Vec::with_capacity(profiles.len());
    let mut hi = Vec::with_capacity(profiles.len());
    for p in profiles {
        p.validate()?;
        let (l, h) = p.limits().ok_or_else(|| {
            Error::InvalidProfile("rescale profiles need finite limits at ±∞".into())
        })?;
        lo.push(l);
        hi.push(h);
    }
    let local = SystemSpec::linear(a, BoxU::new(lo, hi)?)?.with_name("dislocation-local");
    let nonlocal = local
        .clone()
        .with_name("dislocation-rescaled")
        .with_nonlocal(NonlocalTerm { q, scale: delta })?;
    let base = RunConfig {
        system: local,
        initial: InitialData::Profiles(profiles.to_vec()),
        grid,
        eps: params.eps,
        mollify_eps: 0.0,
        t_end: params.t_end,
        cfl: params.cfl,
        monitor_every: 1,
        snapshots: 2,
    };
    let with_q = RunConfig {
        system: nonlocal,
        ..base.clone()
    };
    Ok((with_q, base))
}

/// For each δ, runs the model with the nonlocal term `δ Q ∫ u` on a line of
/// width `1/δ` next to the purely local run, concurrently across δ.
pub fn rescale_experiment(
    spec: &DislocationSpec,
    profiles: &[MonotoneProfile],
    params: &RescaleParams,
) -> Result<Vec<RescaleRow>> {
    if params.deltas.is_empty() {
        return Err(Error::InvalidParameter("no δ values given".into()));
    }
    if params.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::InvalidParameter("δ values must be positive".into()));
    }
    if params.deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("δ values must be strictly decreasing".into()));
    }
    if !(params.dx > 0.0 && params.dx.is_finite()) {
        return Err(Error::InvalidParameter(format!("dx must be positive, got {}", params.dx)));
    }
    if profiles.len() != spec.m() {
        return Err(Error::DimensionMismatch(format!(
            "{} profiles for {} components",
            profiles.len(),
            spec.m()
        )));
    }
    let n = spec.n_slip;
    for k in 0..n {
        if profiles[k].limits() != profiles[k + n].limits() {
            return Err(Error::InvalidProfile(format!(
                "components {} and {} must share their limits at ±∞",
                k + 1,
                k + n + 1
            )));
        }
    }
    let configs = params
        .deltas
        .iter()
        .map(|d| rescale_configs(spec, profiles, params, *d))
        .collect::<Result<Vec<_>>>()?;
    for ((with_q, _), d) in configs.iter().zip(&params.deltas) {
        let u0 = with_q.initial_field()?;
        if let Some(msg) = domain_margin_violation(&u0, with_q.system.m0(), with_q.t_end) {
            return Err(Error::InvalidParameter(format!("domain too small at δ = {d}: {msg}")));
        }
    }
    let results: Vec<Result<RescaleRow>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .zip(&params.deltas)
            .map(|((with_q, local), d)| {
                s.spawn(move || {
                    let a = run(with_q)?;
                    let b = run(local)?;
                    Ok(RescaleRow {
                        delta: *d,
                        n: with_q.grid.cells(),
                        nonlocal_sup: a.monitors.iter().fold(0.0f64, |m, r| m.max(r.nonlocal_sup)),
                        distance: weighted_l2_distance(&a.final_state.u, &b.final_state.u)?,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("rescale worker panicked"))
            .collect()
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::velocity_field;
    use crate::systems::check_h2;

    fn single_slip(q: f64) -> DislocationSpec {
        DislocationSpec::new(vec![vec![1.0]], vec![vec![q]]).unwrap()
    }

    #[test]
    fn expansion_examples() {
        let (a, _) = expand_matrices(&single_slip(0.0)).unwrap();
        assert_eq!(a.to_rows(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let (z, _) = expand_matrices(&DislocationSpec::new(vec![vec![0.0]], vec![vec![0.0]]).unwrap()).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (a4, _) = expand_matrices(&DislocationSpec::new(id.clone(), id).unwrap()).unwrap();
        assert_eq!(a4[(2, 0)], -1.0);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(a4[(i + 2, j)] + a4[(i, j)], 0.0);
                assert_eq!(a4[(i, j + 2)] + a4[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let r = DislocationSpec::new(vec![vec![1.0, 2.0], vec![0.0, 1.0]], vec![vec![0.0; 2]; 2]);
        assert!(r.is_err());
    }

    #[test]
    fn single_slip_matrix_is_copositive_with_equality() {
        let (a, _) = expand_matrices(&single_slip(0.0)).unwrap();
        let spec = SystemSpec::linear(a, BoxU::uniform(2, 0.0, 1.0).unwrap()).unwrap();
        let r = check_h2(&spec, 5, 200);
        assert!(r.passes());
        assert!(r.min_quadform.abs() < 1e-12);
    }

    #[test]
    fn nonlocal_velocity_examples() {
        let g = Grid1D::new(0.0, 1.0, 16, Topology::Periodic).unwrap();
        let (a, q) = expand_matrices(&single_slip(0.3)).unwrap();
        let c = FieldSet::constant(g, &[0.2, 0.7]).unwrap();
        let v = nonlocal_velocity(&c, &a, &q).unwrap();
        // (A + Q·period)·c
        let expected = [(1.0 + 0.3) * (0.2 - 0.7), -(1.0 + 0.3) * (0.2 - 0.7)];
        for i in 0..2 {
            assert!(v[i].iter().all(|x| (x - expected[i]).abs() < 1e-15));
        }
        let eq = FieldSet::constant(g, &[0.4, 0.4]).unwrap();
        let v = nonlocal_velocity(&eq, &a, &q).unwrap();
        assert!(v.iter().flatten().all(|x| *x == 0.0));
        let line = FieldSet::constant(Grid1D::new(0.0, 1.0, 16, Topology::Line).unwrap(), &[0.0, 0.0]).unwrap();
        assert!(nonlocal_velocity(&line, &a, &q).is_err());
    }

    #[test]
    fn solver_velocity_matches_nonlocal_velocity() {
        let spec = single_slip(0.5);
        let g = Grid1D::new(0.0, 1.0, 64, Topology::Periodic).unwrap();
        let profiles = [
            PeriodicProfile { slope: 1.0, offset: 0.0, amplitude: 0.1, phase: 0.0 },
            PeriodicProfile { slope: 1.0, offset: 0.2, amplitude: 0.05, phase: 0.3 },
        ];
        let cfg = periodic_config(&spec, &profiles, g, 0.0, 0.1, RunControls::default()).unwrap();
        let u = cfg.initial_field().unwrap();
        let (a, q) = expand_matrices(&spec).unwrap();
        let direct = nonlocal_velocity(&u, &a, &q).unwrap();
        let (solver, _) = velocity_field(&u, &cfg.system);
        for i in 0..2 {
            for j in 0..64 {
                assert!((direct[i][j] - solver[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn flat_data_is_stationary() {
        let spec = single_slip(0.5);
        let g = Grid1D::new(0.0, 1.0, 32, Topology::Periodic).unwrap();
        let p = PeriodicProfile { slope: 0.0, offset: 0.3, amplitude: 0.0, phase: 0.0 };
        let r = run_periodic(&spec, &[p.clone(), p], g, 0.01, 0.2, RunControls::default()).unwrap();
        assert!(r.output.final_state.u.component(0).iter().all(|v| *v == 0.3));
    }

    #[test]
    fn gradient_means_are_conserved() {
        let spec = single_slip(0.5);
        let g = Grid1D::new(0.0, 1.0, 200, Topology::Periodic).unwrap();
        let profiles = [
            PeriodicProfile { slope: 1.0, offset: 0.0, amplitude: 0.1, phase: 0.0 },
            PeriodicProfile { slope: 1.0, offset: 0.2, amplitude: 0.05, phase: 0.3 },
        ];
        let r = run_periodic(&spec, &profiles, g, 0.0, 0.5, RunControls::default()).unwrap();
        assert!(r.max_mean_drift < 1e-8, "{}", r.max_mean_drift);
        assert!(r.output.monitors.iter().all(|m| m.mono_min >= -1e-12));
    }

    #[test]
    fn inconsistent_or_negative_slopes_are_rejected() {
        let spec = single_slip(0.0);
        let g = Grid1D::new(0.0, 1.0, 32, Topology::Periodic).unwrap();
        let p = |slope| PeriodicProfile { slope, offset: 0.0, amplitude: 0.0, phase: 0.0 };
        assert!(run_periodic(&spec, &[p(1.0), p(2.0)], g, 0.0, 0.1, RunControls::default()).is_err());
        assert!(run_periodic(&spec, &[p(-1.0), p(-1.0)], g, 0.0, 0.1, RunControls::default()).is_err());
    }

    #[test]
    fn rescale_without_q_has_zero_columns() {
        let spec = single_slip(0.0);
        let profiles = [
            MonotoneProfile::smoothstep(0.0, 1.0, -0.25, 0.5),
            MonotoneProfile::smoothstep(0.0, 1.0, 0.25, 0.5),
        ];
        let params = RescaleParams { deltas: vec![0.25, 0.125], dx: 0.02, eps: 0.0, t_end: 0.05, cfl: 0.45 };
        let rows = rescale_experiment(&spec, &profiles, &params).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.nonlocal_sup == 0.0 && r.distance == 0.0));
    }

    #[test]
    fn rescale_rejects_tight_domains() {
        let spec = single_slip(1.0);
        let profiles = [
            MonotoneProfile::smoothstep(0.0, 1.0, -0.25, 0.5),
            MonotoneProfile::smoothstep(0.0, 1.0, 0.25, 0.5),
        ];
        let params = RescaleParams { deltas: vec![1.0], dx: 0.02, eps: 0.0, t_end: 0.5, cfl: 0.45 };
        assert!(rescale_experiment(&spec, &profiles, &params).is_err());
    }
}
