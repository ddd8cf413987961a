//! The invariant suite evaluated over a finished run.

use std::fmt;

use crate::estimates::{entropy_budget, MonitorReport};
use crate::solver::{RunConfig, RunOutput};
use crate::systems::{check_h2, BOX_TOL};

pub const TOL_MAX_PRINCIPLE: f64 = 1e-12;
pub const TOL_MONOTONE: f64 = 1e-12;
pub const TOL_L1: f64 = 1e-10;
pub const TOL_DISSIPATION: f64 = 1e-10;
pub const TOL_GRADSUM: f64 = 1e-8;
pub const TOL_MEAN_DRIFT: f64 = 1e-8;

/// One line of the verification report: `measured ≤ limit` passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

impl Check {
    fn upper(name: &'static str, measured: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed: measured <= limit,
            measured,
            limit,
            detail: detail.into(),
        }
    }

    pub fn slack(&self) -> f64 {
        self.limit - self.measured
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<5} {:<18} measured {:+.6e}  limit {:+.6e}  slack {:+.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.limit,
            self.slack()
        )?;
        if !self.detail.is_empty() {
            write!(f, "  ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "some checks failed" })
    }
}

/// Extra inputs for periodic-plus-linear runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeriodicExtras {
    /// Rate at which rigid transport may move the periodic part.
    pub drift_rate: f64,
    /// Largest deviation of a gradient period mean from its slope.
    pub mean_drift: f64,
}

/// Lattice sizes of the sampled (H2) check.
pub const H2_SAMPLES_U: usize = 9;
pub const H2_SAMPLES_XI: usize = 40;

fn max_over(series: &[MonitorReport], f: impl Fn(&MonitorReport) -> f64) -> (f64, f64) {
    series.iter().fold((f64::NEG_INFINITY, 0.0), |(best, t), r| {
        let v = f(r);
        if v > best {
            (v, r.t)
        } else {
            (best, t)
        }
    })
}

/// Runs every applicable check over `output`.
pub fn verify(config: &RunConfig, output: &RunOutput, periodic: Option<PeriodicExtras>) -> VerifyReport {
    let spec = &config.system;
    let series = &output.monitors;
    let first = &series[0];
    let m = spec.m();
    let drift = periodic.map_or(0.0, |p| p.drift_rate);
    let mut checks = Vec::new();

    let (worst, t) = max_over(series, |r| {
        (0..m)
            .map(|i| r.linf[i] - first.linf[i] - drift * (r.t - first.t))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let detail = if drift > 0.0 {
        format!("worst at t = {t:.6}; allows rigid drift at rate {drift:.4e}")
    } else {
        format!("worst at t = {t:.6}")
    };
    checks.push(Check::upper("max_principle", worst, TOL_MAX_PRINCIPLE, detail));

    let (worst, t) = max_over(series, |r| -r.mono_min);
    checks.push(Check::upper("monotonicity", worst, TOL_MONOTONE, format!("worst at t = {t:.6}")));

    let (worst, t) = max_over(series, |r| r.box_excursion);
    checks.push(Check::upper("box", worst, BOX_TOL, format!("worst at t = {t:.6}")));

    if periodic.is_none() {
        let (worst, t) = max_over(series, |r| {
            (0..m)
                .map(|i| r.l1grad[i] - 2.0 * first.linf[i])
                .fold(f64::NEG_INFINITY, f64::max)
        });
        checks.push(Check::upper("l1_bound", worst, TOL_L1, format!("worst at t = {t:.6}")));
    }
    let (worst, t) = max_over(series, |r| {
        (0..m)
            .map(|i| (r.l1grad[i] - r.rise[i]).abs())
            .fold(0.0, f64::max)
    });
    checks.push(Check::upper("l1_telescoping", worst, TOL_L1, format!("worst at t = {t:.6}")));

    let u0_linf = first.linf.iter().copied().fold(0.0, f64::max);
    let budget = entropy_budget(series, spec, u0_linf);
    let max_gap = series
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .fold(0.0, f64::max);
    let gap_limit = config.t_end / 200.0;
    let mut c = Check::upper(
        "entropy_budget",
        budget.max_violation,
        budget.tol_budget,
        format!("C = {:.6e}, {} records", budget.c_budget, series.len()),
    );
    if max_gap > gap_limit * (1.0 + 1e-9) {
        c.passed = false;
        c.detail = format!("monitor gap {max_gap:.3e} exceeds t_end/200 = {gap_limit:.3e}");
    }
    checks.push(c);

    let h2 = check_h2(spec, H2_SAMPLES_U, H2_SAMPLES_XI);
    checks.push(Check::upper(
        "h2",
        -h2.min_quadform,
        1e-12,
        format!("worst u = {:?}, xi = {:?}", h2.worst_u, h2.worst_xi),
    ));
    if h2.passes() {
        let (worst, t) = max_over(series, |r| -r.dissipation_d / r.dissipation_scale.max(f64::MIN_POSITIVE));
        checks.push(Check::upper(
            "dissipation_sign",
            worst,
            TOL_DISSIPATION,
            format!("D/scale, worst at t = {t:.6}"),
        ));
    }

    if spec.linear_cases().is_some_and(|c| c.offdiag_nonpositive_copositive) {
        let (worst, t) = max_over(series, |r| r.gradsum_sup - first.gradsum_sup);
        checks.push(Check::upper("gradsum", worst, TOL_GRADSUM, format!("worst at t = {t:.6}")));
    }

    if let Some(p) = periodic {
        checks.push(Check::upper("gradient_means", p.mean_drift, TOL_MEAN_DRIFT, ""));
    }

    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, Topology};
    use crate::ic::MonotoneProfile;
    use crate::matrix::Matrix;
    use crate::solver::{run, InitialData};
    use crate::systems::{BoxU, SystemSpec};

    fn config(system: SystemSpec, profiles: Vec<MonotoneProfile>) -> RunConfig {
        RunConfig {
            system,
            initial: InitialData::Profiles(profiles),
            grid: Grid1D::new(-3.0, 3.0, 120, Topology::Line).unwrap(),
            eps: 0.01,
            mollify_eps: 0.0,
            t_end: 0.4,
            cfl: 0.45,
            monitor_every: 1,
            snapshots: 201,
        }
    }

    #[test]
    fn burgers_passes_everything() {
        let cfg = config(SystemSpec::burgers(), vec![MonotoneProfile::smoothstep(0.0, 1.0, 0.0, 0.5)]);
        let out = run(&cfg).unwrap();
        let rep = verify(&cfg, &out, None);
        assert!(rep.passed(), "{rep}");
        assert!(rep.get("gradsum").is_none());
    }

    #[test]
    fn h2_violation_is_reported() {
        let a = Matrix::from_rows(&[vec![0.0, -1.0], vec![0.0, 0.0]]).unwrap();
        let spec = SystemSpec::linear(a, BoxU::uniform(2, 0.0, 1.0).unwrap()).unwrap();
        let p = MonotoneProfile::smoothstep(0.0, 1.0, 0.0, 1.0);
        let cfg = config(spec, vec![p.clone(), p]);
        let out = run(&cfg).unwrap();
        let rep = verify(&cfg, &out, None);
        assert!(!rep.get("h2").unwrap().passed);
        assert!(rep.get("dissipation_sign").is_none());
        assert!(rep.get("max_principle").unwrap().passed);
    }

    #[test]
    fn coarse_monitoring_fails_the_budget() {
        let mut cfg = config(SystemSpec::burgers(), vec![MonotoneProfile::smoothstep(0.0, 1.0, 0.0, 0.5)]);
        cfg.snapshots = 2;
        cfg.monitor_every = 1000;
        let out = run(&cfg).unwrap();
        let rep = verify(&cfg, &out, None);
        assert!(!rep.get("entropy_budget").unwrap().passed);
    }
}
