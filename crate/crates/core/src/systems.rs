//! Diagonal systems `∂t u^i + a^i(u) ∂x u^i = 0`: velocity maps, their
//! Jacobians, the admissible box and sampled checks of the structural
//! hypotheses (velocity bounds, copositive Jacobian).

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Distance outside the box that evaluations silently clamp.
pub const BOX_TOL: f64 = 1e-9;

/// Relative step of the finite-difference Jacobian fallback.
pub const FD_REL_STEP: f64 = 1e-5;

/// Box `U = Π [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxU {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxU {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "box bounds have lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() || l > h {
                return Err(Error::InvalidParameter(format!(
                    "box side {i} is [{l}, {h}]"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn uniform(m: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; m], vec![hi; m])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Largest distance of `u` outside the box along any axis (0 inside).
    pub fn excursion(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| (l - v).max(v - h).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn clamp(&self, u: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = u[i].clamp(self.lo[i], self.hi[i]);
        }
    }

    /// `max(|lo_i|, |hi_i|)` per axis.
    pub fn abs_bounds(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| l.abs().max(h.abs()))
            .collect()
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} components, system has {}",
                u.len(),
                self.dim()
            )));
        }
        for (i, v) in u.iter().enumerate() {
            let exc = (self.lo[i] - v).max(v - self.hi[i]);
            if exc > BOX_TOL || !v.is_finite() {
                return Err(Error::OutsideBox {
                    point: u.to_vec(),
                    component: i,
                    excursion: exc,
                });
            }
        }
        Ok(())
    }
}

/// A pure map `u ↦ out` on state space.
pub type PointMap = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Spatially constant velocity contribution `scale · Q · ∫ u dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalTerm {
    pub q: Matrix,
    pub scale: f64,
}

/// A diagonal system together with its admissible box and the constants
/// `M0 ≥ |a^i|` and `M1` (Lipschitz bound of `a`, row-sum norm).
#[derive(Clone)]
pub struct SystemSpec {
    name: String,
    bounds: BoxU,
    velocity: PointMap,
    jacobian: Option<PointMap>,
    m0: f64,
    m1: f64,
    linear: Option<Matrix>,
    nonlocal: Option<NonlocalTerm>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("bounds", &self.bounds)
            .field("m0", &self.m0)
            .field("m1", &self.m1)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("linear", &self.linear)
            .field("nonlocal", &self.nonlocal)
            .finish()
    }
}

impl SystemSpec {
    /// Scalar Burgers, `a(u) = u` on `[0, 1]`.
    pub fn burgers() -> Self {
        Self::burgers_on(0.0, 1.0).expect("unit box is valid")
    }

    pub fn burgers_on(lo: f64, hi: f64) -> Result<Self> {
        let bounds = BoxU::new(vec![lo], vec![hi])?;
        Ok(Self {
            name: "burgers".into(),
            m0: lo.abs().max(hi.abs()),
            m1: 1.0,
            bounds,
            velocity: Arc::new(|u, out| out[0] = u[0]),
            jacobian: Some(Arc::new(|_, out| out[0] = 1.0)),
            linear: None,
            nonlocal: None,
        })
    }

    /// The 2×2 system with crossing eigenvalues,
    /// `a = (cos u², u¹ sin u²)` on `[0, 1] × [-π/2, π/2]`.
    pub fn crossing() -> Self {
        let bounds = BoxU::new(vec![0.0, -FRAC_PI_2], vec![1.0, FRAC_PI_2]).expect("valid box");
        Self {
            name: "crossing".into(),
            bounds,
            velocity: Arc::new(|u, out| {
                out[0] = u[1].cos();
                out[1] = u[0] * u[1].sin();
            }),
            jacobian: Some(Arc::new(|u, out| {
                let (s, c) = u[1].sin_cos();
                out[0] = 0.0;
                out[1] = -s;
                out[2] = s;
                out[3] = u[0] * c;
            })),
            // |cos| ≤ 1 and |u¹ sin u²| ≤ 1; row sums of |Da| peak at 1 and √2.
            m0: 1.0,
            m1: std::f64::consts::SQRT_2,
            linear: None,
            nonlocal: None,
        }
    }

    /// `a(u) = A u`.
    pub fn linear(a: Matrix, bounds: BoxU) -> Result<Self> {
        let m = a.dim();
        if bounds.dim() != m {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {m}x{m} but box has dimension {}",
                bounds.dim()
            )));
        }
        let abs_b = bounds.abs_bounds();
        let m0 = (0..m)
            .map(|i| a.row(i).iter().zip(&abs_b).map(|(x, b)| x.abs() * b).sum::<f64>())
            .fold(0.0, f64::max);
        let m1 = a.max_abs_row_sum();
        let av = a.clone();
        let aj = a.clone();
        Ok(Self {
            name: "linear".into(),
            bounds,
            velocity: Arc::new(move |u, out| av.mul_vec(u, out)),
            jacobian: Some(Arc::new(move |_, out| out.copy_from_slice(aj.as_slice()))),
            m0,
            m1,
            linear: Some(a),
            nonlocal: None,
        })
    }

    /// Linear transport `a(u) ≡ c` for every component.
    pub fn transport(speed: f64, bounds: BoxU) -> Result<Self> {
        if !speed.is_finite() {
            return Err(Error::InvalidParameter(format!("transport speed {speed} is not finite")));
        }
        Self::custom(
            "transport",
            bounds,
            Arc::new(move |_, out| out.fill(speed)),
            Some(Arc::new(|_, out| out.fill(0.0))),
            speed.abs(),
            0.0,
        )
    }

    /// A user-supplied system. Without `jacobian`, central finite differences are used.
    pub fn custom(
        name: impl Into<String>,
        bounds: BoxU,
        velocity: PointMap,
        jacobian: Option<PointMap>,
        m0: f64,
        m1: f64,
    ) -> Result<Self> {
        if !(m0 >= 0.0 && m0.is_finite() && m1 >= 0.0 && m1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bounds M0 = {m0}, M1 = {m1} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            name: name.into(),
            bounds,
            velocity,
            jacobian,
            m0,
            m1,
            linear: None,
            nonlocal: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_nonlocal(mut self, term: NonlocalTerm) -> Result<Self> {
        if term.q.dim() != self.m() {
            return Err(Error::DimensionMismatch(format!(
                "nonlocal matrix is {0}x{0}, system has {1} components",
                term.q.dim(),
                self.m()
            )));
        }
        if !term.scale.is_finite() {
            return Err(Error::InvalidParameter("nonlocal scale must be finite".into()));
        }
        self.nonlocal = Some(term);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &BoxU {
        &self.bounds
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn linear_matrix(&self) -> Option<&Matrix> {
        self.linear.as_ref()
    }

    pub fn nonlocal(&self) -> Option<&NonlocalTerm> {
        self.nonlocal.as_ref()
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn eval_velocity(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.bounds.check(u)?;
        let mut p = vec![0.0; self.m()];
        let mut out = vec![0.0; self.m()];
        self.velocity_clamped(u, &mut p, &mut out);
        Ok(out)
    }

    pub fn eval_jacobian(&self, u: &[f64]) -> Result<Matrix> {
        self.bounds.check(u)?;
        let m = self.m();
        let mut p = vec![0.0; m];
        let mut out = Matrix::zeros(m);
        self.bounds.clamp(u, &mut p);
        match &self.jacobian {
            Some(jac) => jac(&p, out.as_mut_slice()),
            None => self.fd_jacobian_into(&p, &mut out),
        }
        Ok(out)
    }

    /// Central-difference Jacobian, one-sided where the stencil meets a box face.
    pub fn fd_jacobian(&self, u: &[f64]) -> Result<Matrix> {
        self.bounds.check(u)?;
        let mut p = vec![0.0; self.m()];
        self.bounds.clamp(u, &mut p);
        let mut out = Matrix::zeros(self.m());
        self.fd_jacobian_into(&p, &mut out);
        Ok(out)
    }

    fn fd_jacobian_into(&self, u: &[f64], out: &mut Matrix) {
        let m = self.m();
        let mut xp = u.to_vec();
        let mut xm = u.to_vec();
        let mut fp = vec![0.0; m];
        let mut fm = vec![0.0; m];
        for j in 0..m {
            let h = FD_REL_STEP * u[j].abs().max(1.0);
            let (lo, hi) = (self.bounds.lo[j], self.bounds.hi[j]);
            let (mut up, mut dn) = ((u[j] + h).min(hi), (u[j] - h).max(lo));
            if up <= dn {
                up = u[j] + h;
                dn = u[j] - h;
            }
            xp[j] = up;
            xm[j] = dn;
            (self.velocity)(&xp, &mut fp);
            (self.velocity)(&xm, &mut fm);
            let step = up - dn;
            for i in 0..m {
                out[(i, j)] = (fp[i] - fm[i]) / step;
            }
            xp[j] = u[j];
            xm[j] = u[j];
        }
    }

    /// Velocity at `u` after clamping to the box. `scratch` has length `m`.
    #[inline]
    pub fn velocity_clamped(&self, u: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        self.bounds.clamp(u, scratch);
        (self.velocity)(scratch, out);
    }

    /// Row-major Jacobian at `u` after clamping to the box.
    pub fn jacobian_clamped(&self, u: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        self.bounds.clamp(u, scratch);
        match &self.jacobian {
            Some(jac) => jac(scratch, out),
            None => {
                let m = self.m();
                let mut mat = Matrix::zeros(m);
                self.fd_jacobian_into(scratch, &mut mat);
                out.copy_from_slice(mat.as_slice());
            }
        }
    }

    /// Which of the two structural cases of a linear system hold.
    pub fn linear_cases(&self) -> Option<LinearCases> {
        self.linear.as_ref().map(LinearCases::of)
    }
}

/// Structural cases for `a(u) = A u`:
/// `upper_nonnegative`: `A_ij ≥ 0` for `j ≥ i`;
/// `offdiag_nonpositive_copositive`: `A_ij ≤ 0` for `i ≠ j` and `A` copositive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearCases {
    pub upper_nonnegative: bool,
    pub offdiag_nonpositive_copositive: bool,
}

impl LinearCases {
    pub fn of(a: &Matrix) -> Self {
        let n = a.dim();
        let upper = (0..n).all(|i| (i..n).all(|j| a[(i, j)] >= 0.0));
        let offdiag = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] <= 0.0));
        let copositive = if n <= 2 {
            copositive_exact(a)
        } else {
            min_quadform_constant(a, 60).0 >= -1e-12
        };
        Self {
            upper_nonnegative: upper,
            offdiag_nonpositive_copositive: offdiag && copositive,
        }
    }
}

/// Exact copositivity for 1×1 and 2×2 matrices.
///
/// Only the symmetric part matters, so for `m = 2` the test is
/// `A11 ≥ 0, A22 ≥ 0, A12 + A21 ≥ -2 √(A11 A22)`.
pub fn copositive_exact(a: &Matrix) -> bool {
    match a.dim() {
        1 => a[(0, 0)] >= 0.0,
        2 => {
            let (a11, a22) = (a[(0, 0)], a[(1, 1)]);
            a11 >= 0.0 && a22 >= 0.0 && a[(0, 1)] + a[(1, 0)] >= -2.0 * (a11 * a22).sqrt()
        }
        _ => panic!("exact copositivity is only implemented for m ≤ 2"),
    }
}

/// Result of a sampled copositivity check.
#[derive(Debug, Clone, PartialEq)]
pub struct H2Report {
    pub min_quadform: f64,
    pub worst_u: Vec<f64>,
    pub worst_xi: Vec<f64>,
    pub points_checked: usize,
}

impl H2Report {
    pub fn passes(&self) -> bool {
        self.min_quadform >= -1e-12
    }
}

/// All `ξ = k / K` with nonnegative integer `k` summing to `K`.
pub fn simplex_lattice(m: usize, k: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == m {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(m, left - c, prefix, out);
            prefix.pop();
        }
    }
    let k = k.max(1);
    let mut raw = Vec::new();
    rec(m, k, &mut Vec::with_capacity(m), &mut raw);
    raw.into_iter()
        .map(|c| c.into_iter().map(|v| v as f64 / k as f64).collect())
        .collect()
}

fn box_lattice(bounds: &BoxU, samples: usize) -> Vec<Vec<f64>> {
    let m = bounds.dim();
    let axes: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let (l, h) = (bounds.lo[i], bounds.hi[i]);
            if samples <= 1 || l == h {
                vec![0.5 * (l + h)]
            } else {
                (0..samples)
                    .map(|k| {
                        if k + 1 == samples {
                            h
                        } else {
                            l + (h - l) * k as f64 / (samples - 1) as f64
                        }
                    })
                    .collect()
            }
        })
        .collect();
    let mut points = vec![Vec::with_capacity(m)];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

#[inline]
fn quadform(jac: &[f64], xi: &[f64]) -> f64 {
    let m = xi.len();
    let mut q = 0.0;
    for i in 0..m {
        for j in 0..m {
            q += (xi[i] * xi[j]) * jac[i * m + j];
        }
    }
    q
}

fn min_quadform_constant(a: &Matrix, k: usize) -> (f64, Vec<f64>) {
    let mut best = (f64::INFINITY, vec![]);
    for xi in simplex_lattice(a.dim(), k) {
        let q = quadform(a.as_slice(), &xi);
        if q < best.0 {
            best = (q, xi);
        }
    }
    best
}

/// Sampled check of `Σ ξ_i ξ_j a^i_{,j}(u) ≥ 0` over a lattice of `samples_u`
/// points per box axis and the simplex lattice of resolution `samples_xi`.
///
/// This is a search for counterexamples, not a certificate.
pub fn check_h2(spec: &SystemSpec, samples_u: usize, samples_xi: usize) -> H2Report {
    let m = spec.m();
    let xis = simplex_lattice(m, samples_xi);
    let mut jac = vec![0.0; m * m];
    let mut scratch = vec![0.0; m];
    let mut report = H2Report {
        min_quadform: f64::INFINITY,
        worst_u: vec![],
        worst_xi: vec![],
        points_checked: 0,
    };
    for u in box_lattice(spec.bounds(), samples_u.max(1)) {
        spec.jacobian_clamped(&u, &mut scratch, &mut jac);
        for xi in &xis {
            let q = quadform(&jac, xi);
            report.points_checked += 1;
            if q < report.min_quadform {
                report.min_quadform = q;
                report.worst_u = u.clone();
                report.worst_xi = xi.clone();
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn unit_box(m: usize) -> BoxU {
        BoxU::uniform(m, 0.0, 1.0).unwrap()
    }

    #[test]
    fn velocity_examples() {
        assert_eq!(SystemSpec::burgers().eval_velocity(&[0.3]).unwrap(), vec![0.3]);
        assert_eq!(SystemSpec::crossing().eval_velocity(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let lin = SystemSpec::linear(Matrix::identity(2), unit_box(2)).unwrap();
        assert_eq!(lin.eval_velocity(&[0.2, 0.7]).unwrap(), vec![0.2, 0.7]);
    }

    #[test]
    fn evaluation_outside_box_is_rejected_beyond_tolerance() {
        let b = SystemSpec::burgers();
        assert!(b.eval_velocity(&[1.0 + 0.5e-9]).is_ok());
        assert!(matches!(
            b.eval_velocity(&[1.0 + 1e-6]),
            Err(Error::OutsideBox { .. })
        ));
        assert!(b.eval_velocity(&[0.1, 0.2]).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let j = SystemSpec::crossing().eval_jacobian(&[1.0, 0.0]).unwrap();
        assert_eq!(j.to_rows(), vec![vec![0.0, -0.0], vec![0.0, 1.0]]);
        assert_eq!(SystemSpec::burgers().eval_jacobian(&[0.4]).unwrap().to_rows(), vec![vec![1.0]]);
        let a = mat(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let lin = SystemSpec::linear(a.clone(), unit_box(2)).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let u = [rng.gen::<f64>(), rng.gen::<f64>()];
            assert_eq!(lin.eval_jacobian(&u).unwrap(), a);
        }
    }

    #[test]
    fn crossing_jacobian_matches_finite_differences() {
        let s = SystemSpec::crossing();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let u = [rng.gen_range(0.0..1.0), rng.gen_range(-FRAC_PI_2..FRAC_PI_2)];
            let exact = s.eval_jacobian(&u).unwrap();
            let fd = s.fd_jacobian(&u).unwrap();
            let h = FD_REL_STEP * u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let scale = exact.max_abs().max(1.0);
            for (e, f) in exact.as_slice().iter().zip(fd.as_slice()) {
                assert!(
                    (e - f).abs() <= 10.0 * h * h * scale,
                    "u = {u:?}: {e} vs {f}"
                );
            }
        }
    }

    #[test]
    fn custom_system_without_jacobian_uses_fallback() {
        let s = SystemSpec::custom(
            "sq",
            unit_box(1),
            Arc::new(|u, out| out[0] = u[0] * u[0]),
            None,
            1.0,
            2.0,
        )
        .unwrap();
        let j = s.eval_jacobian(&[0.5]).unwrap();
        assert!((j[(0, 0)] - 1.0).abs() < 1e-9);
        // One-sided at the face.
        let j = s.eval_jacobian(&[1.0]).unwrap();
        assert!((j[(0, 0)] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn builtin_constants() {
        let c = SystemSpec::crossing();
        assert_eq!(c.bounds().lo(), &[0.0, -FRAC_PI_2]);
        assert_eq!(c.bounds().hi(), &[1.0, FRAC_PI_2]);
        let b = SystemSpec::burgers();
        assert_eq!((b.m0(), b.m1()), (1.0, 1.0));
        let l = SystemSpec::linear(mat(&[&[1.0, -1.0], &[-1.0, 1.0]]), unit_box(2)).unwrap();
        assert_eq!(l.m1(), 2.0);
        assert_eq!(l.m0(), 2.0);
        assert!(SystemSpec::linear(Matrix::identity(3), unit_box(2)).is_err());
    }

    #[test]
    fn h2_examples() {
        let r = check_h2(&SystemSpec::crossing(), 9, 20);
        assert!(r.min_quadform >= 0.0, "{r:?}");
        assert_eq!(r.min_quadform, 0.0);

        let r = check_h2(
            &SystemSpec::linear(mat(&[&[1.0, -1.0], &[-1.0, 1.0]]), unit_box(2)).unwrap(),
            2,
            10,
        );
        assert_eq!(r.min_quadform, 0.0);
        assert_eq!(r.worst_xi, vec![0.5, 0.5]);

        let r = check_h2(
            &SystemSpec::linear(mat(&[&[0.0, -1.0], &[0.0, 0.0]]), unit_box(2)).unwrap(),
            2,
            10,
        );
        assert!(r.min_quadform < 0.0);
        assert_eq!(r.min_quadform, -0.25);
    }

    #[test]
    fn simplex_lattice_counts() {
        assert_eq!(simplex_lattice(1, 5), vec![vec![1.0]]);
        assert_eq!(simplex_lattice(2, 4).len(), 5);
        assert_eq!(simplex_lattice(3, 4).len(), 15);
        for xi in simplex_lattice(4, 6) {
            assert!((xi.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_case_classification() {
        let ii = LinearCases::of(&mat(&[&[1.0, -1.0], &[-1.0, 1.0]]));
        assert!(ii.offdiag_nonpositive_copositive && !ii.upper_nonnegative);
        let i = LinearCases::of(&mat(&[&[1.0, 0.5], &[-0.5, 1.0]]));
        assert!(i.upper_nonnegative && !i.offdiag_nonpositive_copositive);
        let bad = LinearCases::of(&mat(&[&[1.0, -3.0], &[0.0, 1.0]]));
        assert!(!bad.offdiag_nonpositive_copositive);
    }

    proptest! {
        #[test]
        fn sampled_and_exact_copositivity_agree(
            a11 in -6i32..=6, a12 in -6i32..=6, a21 in -6i32..=6, a22 in -6i32..=6,
        ) {
            let a = mat(&[&[a11 as f64, a12 as f64], &[a21 as f64, a22 as f64]]);
            let spec = SystemSpec::linear(a.clone(), unit_box(2)).unwrap();
            let sampled = check_h2(&spec, 1, 1000).passes();
            prop_assert_eq!(sampled, copositive_exact(&a), "A = {:?}", a);
        }
    }
}
