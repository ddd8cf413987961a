//! Functionals bounded by the a-priori estimates: gradient entropy `N(t)`,
//! dissipation `D(t)`, the entropy budget, the Luxemburg `L log L` norm, the
//! gradient-sum supremum, the logarithmic modulus of continuity and the
//! exponentially weighted L² distance.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::grid::{forward_gradient, quad_cells, quad_unchecked, FieldSet, Grid1D, GradientSet, TOL_MONO};
use crate::solver::Snapshot;
use crate::systems::SystemSpec;

/// Per-record summary of every monitored estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub step: usize,
    pub t: f64,
    /// `‖u^i(t)‖_∞` (of the periodic part for periodic-plus-linear fields).
    pub linf: Vec<f64>,
    /// `∫ |∂x u^i|`, summed over cells.
    pub l1grad: Vec<f64>,
    /// `u^i(x_max) − u^i(x_min)` on a line, the seam jump on a periodic grid.
    pub rise: Vec<f64>,
    pub entropy_n: f64,
    pub dissipation_d: f64,
    /// Trapezoid time integral of `D` over the records up to `t`.
    pub cum_dissipation: f64,
    pub gradsum_sup: f64,
    pub box_excursion: f64,
    pub mono_min: f64,
    /// `dx ·` total variation of `Σ_i f(w^i)`: first-order quadrature error scale of `N`.
    pub entropy_quad_err: f64,
    /// `max|Da| · ∫ (Σ_i w^i)²`, the natural magnitude of `D`.
    pub dissipation_scale: f64,
    /// Largest magnitude of the spatially constant nonlocal velocity.
    pub nonlocal_sup: f64,
}

/// `f(x) = x ln x + 1/e` for `x ≥ 1/e`, `0` on `[0, 1/e]`.
pub fn entropy_f(x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::InvalidParameter(format!("entropy needs x ≥ 0, got {x}")));
    }
    Ok(entropy_f_unchecked(x))
}

#[inline]
fn entropy_f_unchecked(x: f64) -> f64 {
    if x <= 1.0 / E {
        0.0
    } else {
        x * x.ln() + 1.0 / E
    }
}

fn clamp_gradient(w: f64, component: usize, node: usize) -> Result<f64> {
    if w >= 0.0 {
        Ok(w)
    } else if w >= -TOL_MONO {
        Ok(0.0)
    } else {
        Err(Error::MonotonicityViolation {
            component,
            node,
            value: w,
        })
    }
}

fn entropy_density(w: &GradientSet) -> Result<Vec<f64>> {
    let nodes = w.values[0].len();
    let mut dens = vec![0.0; nodes];
    for (i, comp) in w.values.iter().enumerate() {
        for (j, v) in comp.iter().enumerate() {
            dens[j] += entropy_f_unchecked(clamp_gradient(*v, i, j)?);
        }
    }
    Ok(dens)
}

/// `N = ∫ Σ_i f(w^i) dx`. Negative entries within `TOL_MONO` count as zero;
/// larger negatives are a monotonicity violation.
pub fn gradient_entropy(w: &GradientSet, g: &Grid1D) -> Result<f64> {
    check_len(w, g)?;
    Ok(quad_unchecked(&entropy_density(w)?, g))
}

fn check_len(w: &GradientSet, g: &Grid1D) -> Result<()> {
    for comp in &w.values {
        if comp.len() != g.node_count() {
            return Err(Error::LengthMismatch {
                expected: g.node_count(),
                got: comp.len(),
            });
        }
    }
    Ok(())
}

/// `D = ∫ Σ_{i,j} a^i_{,j}(u) w^i w^j dx`.
pub fn dissipation(u: &FieldSet, w: &GradientSet, spec: &SystemSpec) -> f64 {
    dissipation_with_scale(u, w, spec).0
}

fn dissipation_with_scale(u: &FieldSet, w: &GradientSet, spec: &SystemSpec) -> (f64, f64) {
    let m = u.m();
    let g = u.grid();
    let mut point = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut jac = vec![0.0; m * m];
    let mut dens = vec![0.0; g.node_count()];
    let mut sq = vec![0.0; g.node_count()];
    let mut jmax = 0.0f64;
    for j in 0..g.node_count() {
        u.point(j, &mut point);
        spec.jacobian_clamped(&point, &mut scratch, &mut jac);
        let mut q = 0.0;
        let mut s = 0.0;
        for a in 0..m {
            s += w.values[a][j];
            for b in 0..m {
                q += (w.values[a][j] * w.values[b][j]) * jac[a * m + b];
            }
        }
        dens[j] = q;
        sq[j] = s * s;
        jmax = jac.iter().fold(jmax, |acc, v| acc.max(v.abs()));
    }
    (quad_unchecked(&dens, g), jmax * quad_unchecked(&sq, g))
}

/// `max_j Σ_i w^i_j`.
pub fn gradsum_sup(w: &GradientSet) -> f64 {
    let nodes = w.values.first().map_or(0, |c| c.len());
    (0..nodes)
        .map(|j| w.values.iter().map(|c| c[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
        .max(if nodes == 0 { 0.0 } else { f64::NEG_INFINITY })
}

/// Builds the monitor record of state `u` at time `t`.
///
/// `prev` supplies the previous record for the running dissipation integral.
pub fn compute_monitor(
    step: usize,
    t: f64,
    u: &FieldSet,
    spec: &SystemSpec,
    prev: Option<&MonitorReport>,
    nonlocal_sup: f64,
) -> Result<MonitorReport> {
    let g = *u.grid();
    let w = forward_gradient(u);
    let mono_min = w.min();
    let dens = entropy_density(&w)?;
    let entropy_n = quad_unchecked(&dens, &g);
    let tv: f64 = dens.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
    let (dissipation_d, dissipation_scale) = dissipation_with_scale(u, &w, spec);
    let cum_dissipation = match prev {
        Some(p) => p.cum_dissipation + 0.5 * (p.dissipation_d + dissipation_d) * (t - p.t),
        None => 0.0,
    };
    let linf = (0..u.m())
        .map(|i| {
            (0..g.node_count())
                .map(|j| u.periodic_value(i, j).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let l1grad = w
        .values
        .iter()
        .map(|c| {
            let abs: Vec<f64> = c.iter().map(|v| v.abs()).collect();
            quad_cells(&abs, &g).expect("gradient has one entry per node")
        })
        .collect();
    let rise = (0..u.m())
        .map(|i| {
            if g.is_periodic() {
                u.seam_jumps()[i]
            } else {
                let c = u.component(i);
                c[c.len() - 1] - c[0]
            }
        })
        .collect();
    let mut point = vec![0.0; u.m()];
    let mut box_excursion = 0.0f64;
    for j in 0..g.node_count() {
        u.point(j, &mut point);
        box_excursion = box_excursion.max(spec.bounds().excursion(&point));
    }
    Ok(MonitorReport {
        step,
        t,
        linf,
        l1grad,
        rise,
        entropy_n,
        dissipation_d,
        cum_dissipation,
        gradsum_sup: gradsum_sup(&w),
        box_excursion,
        mono_min,
        entropy_quad_err: g.dx() * tv,
        dissipation_scale,
        nonlocal_sup,
    })
}

/// Outcome of checking `N(t) + ∫₀ᵗ D ≤ N(0) + C t` along a monitor series.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `max_t (lhs − rhs)`; negative values are slack.
    pub max_violation: f64,
    pub c_budget: f64,
    pub tol_budget: f64,
}

impl BudgetReport {
    pub fn passes(&self) -> bool {
        self.max_violation <= self.tol_budget
    }
}

/// Growth rate `(2/e) M² M1 ‖u0‖∞` of the entropy budget.
pub fn budget_constant(spec: &SystemSpec, u0_linf: f64) -> f64 {
    let m = spec.m() as f64;
    2.0 / E * m * m * spec.m1() * u0_linf
}

/// Checks the entropy budget along `series` (records of one run, in time order).
///
/// The dissipation integral is the trapezoid rule over the records.
/// `tol_budget = 1e-6 + 0.05 |N(0)| + max_t dx·TV(Σ f(w^i))`.
pub fn entropy_budget(series: &[MonitorReport], spec: &SystemSpec, u0_linf: f64) -> BudgetReport {
    let c_budget = budget_constant(spec, u0_linf);
    let Some(first) = series.first() else {
        return BudgetReport {
            times: vec![],
            lhs: vec![],
            rhs: vec![],
            max_violation: 0.0,
            c_budget,
            tol_budget: 1e-6,
        };
    };
    let n0 = first.entropy_n;
    let mut cum = 0.0;
    let mut times = Vec::with_capacity(series.len());
    let mut lhs = Vec::with_capacity(series.len());
    let mut rhs = Vec::with_capacity(series.len());
    let mut max_violation = f64::NEG_INFINITY;
    let mut quad_err = 0.0f64;
    for (k, rec) in series.iter().enumerate() {
        if k > 0 {
            let p = &series[k - 1];
            cum += 0.5 * (p.dissipation_d + rec.dissipation_d) * (rec.t - p.t);
        }
        let l = rec.entropy_n + cum;
        let r = n0 + c_budget * (rec.t - first.t);
        max_violation = max_violation.max(l - r);
        quad_err = quad_err.max(rec.entropy_quad_err);
        times.push(rec.t);
        lhs.push(l);
        rhs.push(r);
    }
    BudgetReport {
        times,
        lhs,
        rhs,
        max_violation,
        c_budget,
        tol_budget: 1e-6 + 0.05 * n0.abs() + quad_err,
    }
}

/// Luxemburg norm `inf{λ > 0 : ∫ (|s|/λ) ln(1 + |s|/λ) ≤ 1}` by bisection
/// to relative tolerance `1e-10`.
pub fn luxemburg_llogl(samples: &[f64], g: &Grid1D) -> Result<f64> {
    if samples.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            expected: g.node_count(),
            got: samples.len(),
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("Luxemburg norm of non-finite samples".into()));
    }
    let abs: Vec<f64> = samples.iter().map(|v| v.abs()).collect();
    let smax = abs.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0.0);
    }
    let mut buf = vec![0.0; abs.len()];
    let mut phi = |lambda: f64| {
        for (b, s) in buf.iter_mut().zip(&abs) {
            let r = s / lambda;
            *b = r * r.ln_1p();
        }
        quad_unchecked(&buf, g)
    };
    if phi(smax) == 0.0 {
        // Mass only at trapezoid end nodes: no λ > 0 gives a positive integral.
        return Ok(0.0);
    }
    let mut hi = smax;
    while phi(hi) > 1.0 {
        hi *= 2.0;
    }
    let mut lo = hi;
    while phi(lo) <= 1.0 && lo > 1e-300 {
        lo *= 0.5;
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ω(δ, h) = 1/ln(1/δ + 1) + 1/ln(1/h + 1)`.
pub fn omega(delta: f64, h: f64) -> f64 {
    1.0 / (1.0 / delta).ln_1p() + 1.0 / (1.0 / h).ln_1p()
}

/// `max |u(t+δ, x+h) − u(t, x)| / ω(δ, h)` over stored snapshots.
///
/// Snapshots must be equally spaced in time. `δ` is rounded to a whole
/// number of snapshot gaps and `h` to a whole number of cells (at least one
/// of each). The base points are `sample_points` positions equally spaced in
/// `x`, taken at every snapshot that has a partner `δ` later.
pub fn modulus_check(
    snapshots: &[Snapshot],
    deltas: &[f64],
    hs: &[f64],
    sample_points: usize,
) -> Result<f64> {
    if snapshots.len() < 2 {
        return Err(Error::InvalidParameter("modulus check needs at least two snapshots".into()));
    }
    if deltas.iter().chain(hs).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("δ and h must be positive".into()));
    }
    let g = *snapshots[0].field.grid();
    let gap = snapshots[1].t - snapshots[0].t;
    let nodes = g.node_count();
    let mut worst = 0.0f64;
    for &delta in deltas {
        let k = ((delta / gap).round() as usize).max(1);
        if k >= snapshots.len() {
            continue;
        }
        for &h in hs {
            let s = ((h / g.dx()).round() as usize).max(1);
            let span = if g.is_periodic() { nodes } else { nodes.saturating_sub(s) };
            if span == 0 {
                continue;
            }
            for a in 0..snapshots.len() - k {
                let (early, late) = (&snapshots[a], &snapshots[a + k]);
                let w = omega(late.t - early.t, s as f64 * g.dx());
                for p in 0..sample_points.max(1) {
                    let j = (((p as f64 + 0.5) / sample_points.max(1) as f64) * span as f64) as usize;
                    let j = j.min(span - 1);
                    for i in 0..early.field.m() {
                        let base = early.field.component(i)[j];
                        let idx = j + s;
                        let shifted = if idx < nodes {
                            late.field.component(i)[idx]
                        } else {
                            let wraps = idx / nodes;
                            late.field.component(i)[idx % nodes]
                                + wraps as f64 * late.field.seam_jumps()[i]
                        };
                        worst = worst.max((shifted - base).abs() / w);
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// `Σ_i ∫ (u1^i − u2^i)² e^{−2|x|} dx`.
pub fn weighted_l2_distance(u1: &FieldSet, u2: &FieldSet) -> Result<f64> {
    if u1.grid() != u2.grid() || u1.m() != u2.m() {
        return Err(Error::GridMismatch);
    }
    let g = u1.grid();
    let dens: Vec<f64> = (0..g.node_count())
        .map(|j| {
            let psi2 = (-2.0 * g.x(j).abs()).exp();
            (0..u1.m())
                .map(|i| {
                    let d = u1.component(i)[j] - u2.component(i)[j];
                    d * d
                })
                .sum::<f64>()
                * psi2
        })
        .collect();
    Ok(quad_unchecked(&dens, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Topology;
    use crate::ic::{mollify, sample_profile, MonotoneProfile};
    use crate::matrix::Matrix;
    use crate::systems::BoxU;
    use proptest::prelude::*;

    #[test]
    fn entropy_f_examples() {
        assert_eq!(entropy_f(1.0 / E).unwrap(), 0.0);
        assert!((entropy_f(1.0).unwrap() - 0.367879441).abs() < 1e-9);
        assert_eq!(entropy_f(0.0).unwrap(), 0.0);
        assert!(entropy_f(-1e-3).is_err());
        // Continuity at the junction.
        let x = 1.0 / E;
        assert!(entropy_f(x * (1.0 + 1e-9)).unwrap() < 1e-9);
    }

    #[test]
    fn gradient_entropy_examples() {
        let g = Grid1D::new(0.0, 1.0, 4, Topology::Periodic).unwrap();
        let small = GradientSet {
            values: vec![vec![0.3, 0.1, 0.0, 1.0 / E]],
        };
        assert_eq!(gradient_entropy(&small, &g).unwrap(), 0.0);
        let ones = GradientSet {
            values: vec![vec![1.0; 4]],
        };
        assert!((gradient_entropy(&ones, &g).unwrap() - 1.0 / E).abs() < 1e-15);
        let tiny_neg = GradientSet {
            values: vec![vec![-1e-13, 0.0, 0.0, 0.0]],
        };
        assert_eq!(gradient_entropy(&tiny_neg, &g).unwrap(), 0.0);
        let neg = GradientSet {
            values: vec![vec![-1e-6, 0.0, 0.0, 0.0]],
        };
        assert!(matches!(
            gradient_entropy(&neg, &g),
            Err(Error::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn gradient_entropy_of_mollified_step_matches_refined_quadrature() {
        let eps_m = 0.1;
        let g = Grid1D::new(-1.0, 1.0, 2000, Topology::Line).unwrap();
        let step = sample_profile(&[MonotoneProfile::step(0.0, 1.0, 0.0)], &g, None).unwrap();
        let smooth = mollify(&step, eps_m).unwrap();
        let n = gradient_entropy(&forward_gradient(&smooth), &g).unwrap();

        // The gradient of the mollified step is the kernel itself.
        let nodes = 4001;
        let h = 2.0 * eps_m / (nodes - 1) as f64;
        let vals: Vec<f64> = (0..nodes)
            .map(|k| {
                let x = -eps_m + k as f64 * h;
                entropy_f(crate::ic::bump(x / eps_m) / eps_m).unwrap()
            })
            .collect();
        let reference = h * (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[nodes - 1]));
        assert!(((n - reference) / reference).abs() < 1e-3, "{n} vs {reference}");
    }

    #[test]
    fn dissipation_examples() {
        let g = Grid1D::new(0.0, 1.0, 8, Topology::Periodic).unwrap();
        let c = FieldSet::constant(g, &[0.4]).unwrap();
        let b = SystemSpec::burgers();
        assert_eq!(dissipation(&c, &forward_gradient(&c), &b), 0.0);

        let ramp = FieldSet::new(g, vec![vec![0.5; 8]]).unwrap();
        let ones = GradientSet {
            values: vec![vec![1.0; 8]],
        };
        assert_eq!(dissipation(&ramp, &ones, &b), 1.0);

        let lg = Grid1D::new(-3.0, 3.0, 120, Topology::Line).unwrap();
        let cross = sample_profile(
            &[
                MonotoneProfile::smoothstep(0.0, 1.0, 0.0, 2.0),
                MonotoneProfile::tanhstep(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, 0.3, 0.5),
            ],
            &lg,
            Some(SystemSpec::crossing().bounds()),
        )
        .unwrap();
        let d = dissipation(&cross, &forward_gradient(&cross), &SystemSpec::crossing());
        assert!(d >= -1e-10, "{d}");
    }

    #[test]
    fn constant_data_budget_is_flat() {
        let g = Grid1D::new(0.0, 1.0, 8, Topology::Line).unwrap();
        let c = FieldSet::constant(g, &[0.5]).unwrap();
        let b = SystemSpec::burgers();
        let r0 = compute_monitor(0, 0.0, &c, &b, None, 0.0).unwrap();
        let r1 = compute_monitor(1, 1.0, &c, &b, Some(&r0), 0.0).unwrap();
        let rep = entropy_budget(&[r0, r1], &b, 0.5);
        assert_eq!(rep.lhs, vec![0.0, 0.0]);
        assert_eq!(rep.rhs[0], 0.0);
        assert!(rep.max_violation <= 0.0 && rep.passes());
    }

    #[test]
    fn h2_violating_system_records_negative_dissipation() {
        let g = Grid1D::new(-2.0, 2.0, 80, Topology::Line).unwrap();
        let a = Matrix::from_rows(&[vec![0.0, -1.0], vec![0.0, 0.0]]).unwrap();
        let spec = SystemSpec::linear(a, BoxU::uniform(2, 0.0, 1.0).unwrap()).unwrap();
        let u = sample_profile(
            &[
                MonotoneProfile::smoothstep(0.0, 1.0, 0.0, 1.0),
                MonotoneProfile::smoothstep(0.0, 1.0, 0.0, 1.0),
            ],
            &g,
            Some(spec.bounds()),
        )
        .unwrap();
        let r = compute_monitor(0, 0.0, &u, &spec, None, 0.0).unwrap();
        assert!(r.dissipation_d < 0.0);
        let rep = entropy_budget(&[r], &spec, 1.0);
        assert!(rep.max_violation.is_finite());
    }

    /// Independent scalar root of `t ln(1 + t) = 1` by Newton's method; λ = 1/t.
    fn unit_indicator_norm_oracle() -> f64 {
        let mut t = 1.0f64;
        for _ in 0..60 {
            let f = t * t.ln_1p() - 1.0;
            let df = t.ln_1p() + t / (1.0 + t);
            t -= f / df;
        }
        1.0 / t
    }

    #[test]
    fn luxemburg_examples() {
        let g = Grid1D::new(0.0, 1.0, 64, Topology::Periodic).unwrap();
        assert_eq!(luxemburg_llogl(&vec![0.0; 64], &g).unwrap(), 0.0);
        let n = luxemburg_llogl(&vec![1.0; 64], &g).unwrap();
        assert!((n - unit_indicator_norm_oracle()).abs() < 1e-9, "{n}");
        assert!(luxemburg_llogl(&vec![f64::NAN; 64], &g).is_err());
    }

    #[test]
    fn omega_at_special_point() {
        let d = 1.0 / (E - 1.0);
        assert!((omega(d, d) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gradsum_examples() {
        let two = GradientSet {
            values: vec![vec![1.0; 5], vec![1.0; 5]],
        };
        assert_eq!(gradsum_sup(&two), 2.0);
        let zero = GradientSet {
            values: vec![vec![0.0; 5], vec![0.0; 5]],
        };
        assert_eq!(gradsum_sup(&zero), 0.0);
    }

    #[test]
    fn weighted_distance_examples() {
        let g = Grid1D::new(-20.0, 20.0, 4000, Topology::Line).unwrap();
        let a = FieldSet::constant(g, &[0.3]).unwrap();
        assert_eq!(weighted_l2_distance(&a, &a).unwrap(), 0.0);
        let b = FieldSet::constant(g, &[1.3]).unwrap();
        let d = weighted_l2_distance(&a, &b).unwrap();
        assert!((d - 1.0).abs() < 1e-4, "{d}");
        let other = FieldSet::constant(Grid1D::new(-20.0, 20.0, 400, Topology::Line).unwrap(), &[0.3]).unwrap();
        assert!(matches!(weighted_l2_distance(&a, &other), Err(Error::GridMismatch)));
    }

    proptest! {
        #[test]
        fn entropy_f_is_nonnegative_and_convex(a in 0.0f64..50.0, b in 0.0f64..50.0) {
            let fa = entropy_f(a).unwrap();
            let fb = entropy_f(b).unwrap();
            let fm = entropy_f(0.5 * (a + b)).unwrap();
            prop_assert!(fa >= 0.0 && fb >= 0.0);
            prop_assert!(fm <= 0.5 * (fa + fb) + 1e-12 * (1.0 + fa + fb));
            if a <= b { prop_assert!(fa <= fb); }
        }

        #[test]
        fn luxemburg_is_monotone(
            base in proptest::collection::vec(0.0f64..5.0, 33),
            extra in proptest::collection::vec(0.0f64..5.0, 33),
        ) {
            let g = Grid1D::new(0.0, 2.0, 32, Topology::Line).unwrap();
            let bigger: Vec<f64> = base.iter().zip(&extra).map(|(a, b)| a + b).collect();
            let n1 = luxemburg_llogl(&base, &g).unwrap();
            let n2 = luxemburg_llogl(&bigger, &g).unwrap();
            prop_assert!(n1 <= n2 * (1.0 + 1e-9));
            let doubled: Vec<f64> = base.iter().map(|v| 2.0 * v).collect();
            let nd = luxemburg_llogl(&doubled, &g).unwrap();
            prop_assert!(nd <= 2.0 * n1 * (1.0 + 1e-9) + 1e-300);
            prop_assert!(nd >= n1 * (1.0 - 1e-9));
        }
    }
}
