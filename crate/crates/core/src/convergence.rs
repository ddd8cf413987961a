//! Grid-refinement studies against an oracle or a fine-grid reference.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{quad_unchecked, FieldSet, Grid1D};
use crate::oracles::{burgers_riemann, characteristics_scalar};
use crate::solver::{run, InitialData, RunConfig};

/// What a run is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// Burgers rarefaction from a jump at `x0`.
    BurgersRiemann {
        ul: f64,
        ur: f64,
        #[serde(default)]
        x0: f64,
    },
    /// Characteristics of a scalar system, from the unmollified profile.
    Characteristics,
    /// The same configuration on a grid `refine` times finer than the finest row.
    FineReference { refine: usize },
}

/// Observed order between two successive rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// Both errors vanish (or the finer one does).
    Exact,
    Value(f64),
    Undefined,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Exact => write!(f, "exact"),
            Order::Value(v) => write!(f, "{v:.6}"),
            Order::Undefined => write!(f, "undefined"),
        }
    }
}

/// `log(e_k / e_{k+1}) / log(n_{k+1} / n_k)`.
pub fn observed_order(e_coarse: f64, e_fine: f64, n_coarse: usize, n_fine: usize) -> Order {
    if e_fine == 0.0 {
        Order::Exact
    } else if e_coarse == 0.0 {
        Order::Undefined
    } else {
        Order::Value((e_coarse / e_fine).ln() / (n_fine as f64 / n_coarse as f64).ln())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub eps: f64,
    /// `Σ_i ∫ |u^i − u_ref^i| dx` at `t_end`.
    pub error: f64,
    /// Order against the previous row; `None` on the first row.
    pub order: Option<Order>,
}

/// `base` with `n` cells; `ε` and `mollify_eps` scale with `dx`.
pub fn refined_config(base: &RunConfig, n: usize) -> Result<RunConfig> {
    if matches!(base.initial, InitialData::Field(_)) {
        return Err(Error::InvalidParameter(
            "refinement needs profile data that can be resampled".into(),
        ));
    }
    let ratio = base.grid.cells() as f64 / n as f64;
    let mut cfg = base.clone();
    cfg.grid = Grid1D::new(base.grid.x_min(), base.grid.x_max(), n, base.grid.topology())?;
    cfg.eps = base.eps * ratio;
    cfg.mollify_eps = base.mollify_eps * ratio;
    cfg.snapshots = 2;
    cfg.monitor_every = usize::MAX;
    Ok(cfg)
}

fn l1_error(u: &FieldSet, reference: &[Vec<f64>]) -> f64 {
    let g = u.grid();
    let mut dens = vec![0.0; g.node_count()];
    for (i, r) in reference.iter().enumerate() {
        for (j, d) in dens.iter_mut().enumerate() {
            *d += (u.component(i)[j] - r[j]).abs();
        }
    }
    quad_unchecked(&dens, g)
}

fn oracle_values(cfg: &RunConfig, reference: &ReferenceSpec) -> Result<Vec<Vec<f64>>> {
    let g = &cfg.grid;
    let t = cfg.t_end;
    match reference {
        ReferenceSpec::BurgersRiemann { ul, ur, x0 } => Ok(vec![g
            .nodes()
            .iter()
            .map(|x| burgers_riemann(*ul, *ur, t, x - x0))
            .collect::<Result<_>>()?]),
        ReferenceSpec::Characteristics => {
            let InitialData::Profiles(p) = &cfg.initial else {
                unreachable!("checked by refined_config")
            };
            if p.len() != 1 {
                return Err(Error::InvalidParameter(
                    "the characteristics oracle is scalar".into(),
                ));
            }
            let spec = &cfg.system;
            let a = |u: f64| {
                let mut s = [0.0];
                let mut out = [0.0];
                spec.velocity_clamped(&[u], &mut s, &mut out);
                out[0]
            };
            let u0 = |x: f64| p[0].eval(x);
            Ok(vec![g
                .nodes()
                .iter()
                .map(|x| characteristics_scalar(&a, &u0, t, *x))
                .collect::<Result<_>>()?])
        }
        ReferenceSpec::FineReference { .. } => unreachable!("handled by the caller"),
    }
}

/// Runs `base` at each cell count in `ns` (increasing) concurrently and
/// measures the L¹ error at `t_end` against `reference`.
pub fn convergence_study(
    base: &RunConfig,
    ns: &[usize],
    reference: &ReferenceSpec,
) -> Result<Vec<ConvergenceRow>> {
    if ns.is_empty() {
        return Err(Error::InvalidParameter("no refinement levels given".into()));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("refinement levels must increase".into()));
    }
    let configs = ns
        .iter()
        .map(|n| refined_config(base, *n))
        .collect::<Result<Vec<_>>>()?;
    let fine = match reference {
        ReferenceSpec::FineReference { refine } => {
            if *refine < 2 {
                return Err(Error::InvalidParameter(format!("refine must be ≥ 2, got {refine}")));
            }
            let n_ref = ns[ns.len() - 1] * refine;
            if let Some(n) = ns.iter().find(|n| n_ref % **n != 0) {
                return Err(Error::InvalidParameter(format!(
                    "{n} does not divide the reference size {n_ref}"
                )));
            }
            let cfg = refined_config(base, n_ref)?;
            Some((n_ref, run(&cfg)?.final_state.u))
        }
        _ => None,
    };
    let errors: Vec<Result<(f64, f64)>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                let fine = fine.as_ref();
                s.spawn(move || {
                    let out = run(cfg)?;
                    let u = &out.final_state.u;
                    let reference_values = match fine {
                        Some((n_ref, f)) => f
                            .restrict(n_ref / cfg.grid.cells())?
                            .components()
                            .to_vec(),
                        None => oracle_values(cfg, reference)?,
                    };
                    Ok((cfg.eps, l1_error(u, &reference_values)))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence worker panicked"))
            .collect()
    });
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ns.len());
    for (k, e) in errors.into_iter().enumerate() {
        let (eps, error) = e?;
        let order = rows
            .last()
            .map(|p| observed_order(p.error, error, p.n, ns[k]));
        rows.push(ConvergenceRow {
            n: ns[k],
            eps,
            error,
            order,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Topology;
    use crate::ic::MonotoneProfile;
    use crate::systems::{BoxU, SystemSpec};

    #[test]
    fn order_examples() {
        assert_eq!(observed_order(0.0, 0.0, 10, 20), Order::Exact);
        match observed_order(0.4, 0.1, 100, 200) {
            Order::Value(v) => assert!((v - 2.0).abs() < 1e-12),
            o => panic!("{o:?}"),
        }
        assert_eq!(Order::Exact.to_string(), "exact");
    }

    fn transport_config(n: usize) -> RunConfig {
        let spec = SystemSpec::transport(0.8, BoxU::uniform(1, 0.0, 1.0).unwrap()).unwrap();
        RunConfig {
            system: spec,
            initial: InitialData::Profiles(vec![MonotoneProfile::smoothstep(0.0, 1.0, 0.0, 0.5)]),
            grid: Grid1D::new(-2.0, 3.0, n, Topology::Line).unwrap(),
            eps: 0.0,
            mollify_eps: 0.0,
            t_end: 0.5,
            cfl: 0.45,
            monitor_every: 1,
            snapshots: 2,
        }
    }

    #[test]
    fn linear_transport_converges_at_first_order() {
        let rows = convergence_study(
            &transport_config(100),
            &[100, 200, 400, 800],
            &ReferenceSpec::Characteristics,
        )
        .unwrap();
        match rows[3].order {
            Some(Order::Value(v)) => assert!(v >= 0.75, "{rows:?}"),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn constant_data_is_exact() {
        let mut cfg = transport_config(50);
        cfg.initial = InitialData::Profiles(vec![MonotoneProfile::LinearRamp { slope: 0.0, offset: 0.2 }]);
        let rows = convergence_study(&cfg, &[50, 100], &ReferenceSpec::Characteristics).unwrap();
        assert!(rows.iter().all(|r| r.error == 0.0));
        assert_eq!(rows[1].order, Some(Order::Exact));
        let rows = convergence_study(&cfg, &[50, 100], &ReferenceSpec::FineReference { refine: 2 }).unwrap();
        assert!(rows.iter().all(|r| r.error == 0.0));
    }

    #[test]
    fn levels_must_increase() {
        assert!(convergence_study(&transport_config(50), &[100, 50], &ReferenceSpec::Characteristics).is_err());
    }
}
