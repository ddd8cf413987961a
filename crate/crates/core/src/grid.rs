//! Uniform 1D meshes, sampled fields and the discrete calculus on them.
//!
//! Line grids store `n + 1` nodes (both endpoints), periodic grids store `n`
//! nodes (the right endpoint is identified with the left one).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance below which a negative forward increment is treated
/// as rounding noise on monotone data.
pub const TOL_MONO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Line,
    Periodic,
}

/// Uniform mesh of `n` cells on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    topology: Topology,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize, topology: Topology) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "x_min must be below x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 cells, got {n}")));
        }
        let dx = (x_max - x_min) / n as f64;
        if !(dx > 0.0) {
            return Err(Error::InvalidGrid("spacing underflows to zero".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            topology,
            dx,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_periodic(&self) -> bool {
        self.topology == Topology::Periodic
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Number of stored nodes: `n + 1` on a line, `n` when periodic.
    pub fn node_count(&self) -> usize {
        match self.topology {
            Topology::Line => self.n + 1,
            Topology::Periodic => self.n,
        }
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count()).map(|j| self.x(j)).collect()
    }

    /// The same domain and topology with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n * factor, self.topology)
    }
}

/// `m` scalar components sampled on one shared grid.
///
/// On periodic grids each component may carry a seam jump `J`: the field is
/// then periodic-plus-linear, `u(x + L) = u(x) + J`, and only one period is
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    grid: Grid1D,
    values: Vec<Vec<f64>>,
    seam_jumps: Vec<f64>,
}

impl FieldSet {
    pub fn new(grid: Grid1D, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch("field set needs at least one component".into()));
        }
        for (i, comp) in values.iter().enumerate() {
            if comp.len() != grid.node_count() {
                return Err(Error::LengthMismatch {
                    expected: grid.node_count(),
                    got: comp.len(),
                });
            }
            if let Some(j) = comp.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    component: i,
                    node: j,
                    step: 0,
                });
            }
        }
        let m = values.len();
        Ok(Self {
            grid,
            values,
            seam_jumps: vec![0.0; m],
        })
    }

    /// Constant state `u^i ≡ c_i`.
    pub fn constant(grid: Grid1D, c: &[f64]) -> Result<Self> {
        Self::new(grid, c.iter().map(|&v| vec![v; grid.node_count()]).collect())
    }

    pub fn with_seam_jumps(mut self, jumps: Vec<f64>) -> Result<Self> {
        if jumps.len() != self.m() {
            return Err(Error::LengthMismatch {
                expected: self.m(),
                got: jumps.len(),
            });
        }
        if jumps.iter().any(|j| *j != 0.0) && !self.grid.is_periodic() {
            return Err(Error::InvalidParameter(
                "seam jumps require a periodic grid".into(),
            ));
        }
        if jumps.iter().any(|j| !j.is_finite()) {
            return Err(Error::InvalidParameter("seam jumps must be finite".into()));
        }
        self.seam_jumps = jumps;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.values
    }

    pub fn seam_jumps(&self) -> &[f64] {
        &self.seam_jumps
    }

    pub fn has_seam(&self) -> bool {
        self.seam_jumps.iter().any(|j| *j != 0.0)
    }

    /// Slope of the linear part of component `i` (zero without a seam).
    pub fn slope(&self, i: usize) -> f64 {
        self.seam_jumps[i] / self.grid.length()
    }

    /// Value of component `i` at node `j` with the linear part removed.
    #[inline]
    pub fn periodic_value(&self, i: usize, j: usize) -> f64 {
        let v = self.values[i][j];
        let jump = self.seam_jumps[i];
        if jump == 0.0 {
            v
        } else {
            v - jump * (j as f64 / self.grid.cells() as f64)
        }
    }

    /// Component `i` with the linear part removed.
    pub fn periodic_part(&self, i: usize) -> Vec<f64> {
        (0..self.grid.node_count())
            .map(|j| self.periodic_value(i, j))
            .collect()
    }

    /// The point `u(x_j)` in state space, with linear parts removed.
    pub fn point(&self, j: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.periodic_value(i, j);
        }
    }

    /// Restriction to every `stride`-th node; the grid gets `n / stride` cells.
    pub fn restrict(&self, stride: usize) -> Result<FieldSet> {
        if stride == 0 || self.grid.cells() % stride != 0 {
            return Err(Error::InvalidParameter(format!(
                "stride {stride} does not divide {} cells",
                self.grid.cells()
            )));
        }
        let coarse = Grid1D::new(
            self.grid.x_min(),
            self.grid.x_max(),
            self.grid.cells() / stride,
            self.grid.topology(),
        )?;
        let values = self
            .values
            .iter()
            .map(|c| c.iter().step_by(stride).copied().collect())
            .collect();
        FieldSet::new(coarse, values)?.with_seam_jumps(self.seam_jumps.clone())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}

/// One-sided forward differences `w_j = (u_{j+1} - u_j) / dx`, one row per component.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub values: Vec<Vec<f64>>,
}

impl GradientSet {
    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Smallest entry over all components and nodes.
    pub fn min(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Forward differences of every component.
///
/// On a line the last node copies its left neighbour; on a periodic grid the
/// index wraps and the seam jump is added across the wrap.
pub fn forward_gradient(f: &FieldSet) -> GradientSet {
    let g = f.grid();
    let dx = g.dx();
    let nodes = g.node_count();
    let values = f
        .components()
        .iter()
        .zip(f.seam_jumps())
        .map(|(u, &jump)| {
            let mut w = Vec::with_capacity(nodes);
            for j in 0..nodes - 1 {
                w.push((u[j + 1] - u[j]) / dx);
            }
            match g.topology() {
                Topology::Line => {
                    let last = w[nodes - 2];
                    w.push(last);
                }
                Topology::Periodic => w.push((u[0] + jump - u[nodes - 1]) / dx),
            }
            w
        })
        .collect();
    GradientSet { values }
}

/// Composite quadrature over the grid: trapezoid on a line, rectangle
/// (period length `n·dx`) on a periodic grid.
pub fn quad_trapezoid(samples: &[f64], grid: &Grid1D) -> Result<f64> {
    if samples.len() != grid.node_count() {
        return Err(Error::LengthMismatch {
            expected: grid.node_count(),
            got: samples.len(),
        });
    }
    Ok(quad_unchecked(samples, grid))
}

#[inline]
pub(crate) fn quad_unchecked(samples: &[f64], grid: &Grid1D) -> f64 {
    let sum: f64 = samples.iter().sum();
    match grid.topology() {
        Topology::Line => {
            let ends = 0.5 * (samples[0] + samples[samples.len() - 1]);
            (sum - ends) * grid.dx()
        }
        Topology::Periodic => sum * grid.dx(),
    }
}

/// Sum of `samples_j · dx` over the `n` cells (left-point rule). For forward
/// differences this telescopes exactly to the total rise.
pub fn quad_cells(samples: &[f64], grid: &Grid1D) -> Result<f64> {
    if samples.len() != grid.node_count() {
        return Err(Error::LengthMismatch {
            expected: grid.node_count(),
            got: samples.len(),
        });
    }
    Ok(samples[..grid.cells()].iter().sum::<f64>() * grid.dx())
}
