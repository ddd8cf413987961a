//! Reference solutions: the Burgers rarefaction, scalar characteristics and
//! fine-grid self-reference.

use crate::error::{Error, Result};
use crate::grid::FieldSet;
use crate::solver::{run, InitialData, RunConfig};

/// Entropy solution of Burgers' equation with data `uL` for `x < 0`, `uR`
/// for `x > 0`, `uL ≤ uR`.
pub fn burgers_riemann(ul: f64, ur: f64, t: f64, x: f64) -> Result<f64> {
    if ul > ur {
        return Err(Error::InvalidParameter(format!(
            "decreasing Riemann data ({ul} > {ur}) produces a shock"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    Ok(if x <= ul * t {
        ul
    } else if x >= ur * t {
        ur
    } else {
        x / t
    })
}

const Y_TOL: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 200;

/// Solution `u(t, x)` of `∂t u + a(u) ∂x u = 0` with nondecreasing `u0` and
/// nondecreasing `a`, via the foot point of the characteristic through `x`.
///
/// When `u0` jumps inside the final bracket the value is taken from the fan
/// `y* + t·a(u) = x`, `u` between the one-sided limits.
pub fn characteristics_scalar(
    a: &dyn Fn(f64) -> f64,
    u0: &dyn Fn(f64) -> f64,
    t: f64,
    x: f64,
) -> Result<f64> {
    if !(t >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("need t ≥ 0 and finite x, got ({t}, {x})")));
    }
    if t == 0.0 {
        return Ok(u0(x));
    }
    let g = |y: f64| y + t * a(u0(y)) - x;
    let mut width = 1.0;
    let (mut lo, mut hi) = (x - width, x + width);
    let mut tries = 0;
    while !(g(lo) <= 0.0 && g(hi) >= 0.0) {
        tries += 1;
        if tries > MAX_DOUBLINGS || !width.is_finite() {
            return Err(Error::BracketFailure { t, x });
        }
        width *= 2.0;
        lo = x - width;
        hi = x + width;
    }
    while hi - lo > Y_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (ulo, uhi) = (u0(lo), u0(hi));
    if (uhi - ulo).abs() <= 1e-9 {
        return Ok(u0(0.5 * (lo + hi)));
    }
    if uhi < ulo {
        return Err(Error::BracketFailure { t, x });
    }
    let y = 0.5 * (lo + hi);
    let h = |u: f64| y + t * a(u) - x;
    if h(ulo) >= 0.0 {
        return Ok(ulo);
    }
    if h(uhi) <= 0.0 {
        return Ok(uhi);
    }
    let (mut a_lo, mut a_hi) = (ulo, uhi);
    for _ in 0..200 {
        let mid = 0.5 * (a_lo + a_hi);
        if mid <= a_lo || mid >= a_hi {
            break;
        }
        if h(mid) <= 0.0 {
            a_lo = mid;
        } else {
            a_hi = mid;
        }
    }
    Ok(0.5 * (a_lo + a_hi))
}

/// Reruns `config` with `n·refine` cells, `ε/refine` and `mollify_eps/refine`,
/// and restricts the final state to the coarse nodes.
pub fn fine_reference(config: &RunConfig, refine: usize) -> Result<FieldSet> {
    if refine < 2 {
        return Err(Error::InvalidParameter(format!("refine must be ≥ 2, got {refine}")));
    }
    if matches!(config.initial, InitialData::Field(_)) {
        return Err(Error::InvalidParameter(
            "fine reference needs profile data that can be resampled".into(),
        ));
    }
    let mut fine = config.clone();
    fine.grid = config.grid.refined(refine)?;
    fine.eps = config.eps / refine as f64;
    fine.mollify_eps = config.mollify_eps / refine as f64;
    fine.snapshots = 2;
    fine.monitor_every = usize::MAX;
    let out = run(&fine)?;
    out.final_state.u.restrict(refine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, Topology};
    use crate::ic::MonotoneProfile;
    use crate::systems::SystemSpec;
    use rand::{Rng, SeedableRng};

    #[test]
    fn riemann_examples() {
        assert_eq!(burgers_riemann(0.0, 1.0, 1.0, 0.5).unwrap(), 0.5);
        assert_eq!(burgers_riemann(0.0, 1.0, 1.0, -0.3).unwrap(), 0.0);
        assert_eq!(burgers_riemann(0.0, 0.0, 0.7, 3.0).unwrap(), 0.0);
        assert!(burgers_riemann(1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn characteristics_examples() {
        let p = MonotoneProfile::smoothstep(0.0, 1.0, 0.0, 1.0);
        let u0 = |x: f64| p.eval(x);
        let c = 0.7;
        for &x in &[-1.0, -0.2, 0.1, 0.45, 2.0] {
            let u = characteristics_scalar(&|_| c, &u0, 0.5, x).unwrap();
            assert!((u - p.eval(x - c * 0.5)).abs() < 1e-11);
        }
        assert_eq!(characteristics_scalar(&|u| u, &u0, 0.0, 0.3).unwrap(), p.eval(0.3));
    }

    #[test]
    fn characteristics_matches_rarefaction() {
        let step = MonotoneProfile::step(0.0, 1.0, 0.0);
        let u0 = |x: f64| step.eval(x);
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..500 {
            let t = rng.gen_range(0.1..1.0);
            let x = rng.gen_range(-1.0..2.0);
            let u = characteristics_scalar(&|u| u, &u0, t, x).unwrap();
            let r = burgers_riemann(0.0, 1.0, t, x).unwrap();
            assert!((u - r).abs() < 1e-10, "t={t} x={x}: {u} vs {r}");
        }
    }

    #[test]
    fn decreasing_velocity_is_detected_as_bracket_failure_or_handled() {
        // a(u) = -u with a step makes g non-monotone; the solver must not loop.
        let step = MonotoneProfile::step(0.0, 1.0, 0.0);
        let u0 = |x: f64| step.eval(x);
        let _ = characteristics_scalar(&|u| -u, &u0, 1.0, -0.5);
    }

    #[test]
    fn fine_reference_examples() {
        let cfg = RunConfig {
            system: SystemSpec::burgers(),
            initial: InitialData::Profiles(vec![MonotoneProfile::LinearRamp { slope: 0.0, offset: 0.3 }]),
            grid: Grid1D::new(0.0, 1.0, 20, Topology::Line).unwrap(),
            eps: 0.01,
            mollify_eps: 0.0,
            t_end: 0.2,
            cfl: 0.45,
            monitor_every: 1,
            snapshots: 2,
        };
        let r = fine_reference(&cfg, 3).unwrap();
        assert_eq!(r.grid(), &cfg.grid);
        assert!(r.component(0).iter().all(|v| *v == 0.3));
        assert!(fine_reference(&cfg, 1).is_err());
    }
}
