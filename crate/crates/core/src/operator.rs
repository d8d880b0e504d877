//! Staggered discretization of `L = d/dx S d/dx` on a union of intervals and
//! the quasi-potential `B = (-L)^{-1}`.
//!
//! Unknowns live at interior nodes; the boundary nodes carry the exterior-zero
//! condition. `S` acts on cell midpoints, so `L = D_out S D_in` with forward
//! differences nodes → midpoints and backward differences midpoints → nodes.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LevyError, Result};
use crate::kernel::{default_anchor, tabulate_kernel, KernelTable, UnifiedKernel};
use crate::levy::LevyTriplet;

/// Finite union of disjoint closed intervals `[a_1,b_1] ∪ ... ∪ [a_n,b_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    intervals: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(LevyError::InvalidDomain("no intervals".into()));
        }
        for (k, &(a, b)) in intervals.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(LevyError::InvalidDomain(format!("interval [{a}, {b}] is empty or unbounded")));
            }
            if k > 0 && intervals[k - 1].1 >= a {
                return Err(LevyError::InvalidDomain("intervals must be ordered and disjoint".into()));
            }
        }
        Ok(Self { intervals })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.intervals[0].0, self.intervals[self.intervals.len() - 1].1)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    pub fn contains_open(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < x && x < b)
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }
}

/// Uniform grid on one interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalGrid {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    /// Number of cells; the interval has `cells + 1` nodes and `cells - 1` unknowns.
    pub cells: usize,
    /// Offset of the first interior node in the unknown vector.
    pub unknown_offset: usize,
    /// Offset of the first cell in the midpoint vector.
    pub mid_offset: usize,
}

impl IntervalGrid {
    pub fn node(&self, j: usize) -> f64 {
        if j == self.cells {
            self.b
        } else {
            self.a + j as f64 * self.h
        }
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        self.a + (j as f64 + 0.5) * self.h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pieces: Vec<IntervalGrid>,
    resolution: f64,
}

/// Minimum nodes per unit length accepted by [`build_grid`].
pub const MIN_RESOLUTION: f64 = 16.0;

pub fn build_grid(domain: &Domain, resolution: f64) -> Result<Grid> {
    if !(resolution >= MIN_RESOLUTION && resolution.is_finite()) {
        return Err(LevyError::InvalidParameter(format!(
            "resolution {resolution} below the minimum {MIN_RESOLUTION}"
        )));
    }
    let mut pieces = Vec::new();
    let mut unknown_offset = 0;
    let mut mid_offset = 0;
    for &(a, b) in domain.intervals() {
        let cells = ((b - a) * resolution).round() as usize;
        if cells < 5 {
            return Err(LevyError::GridTooCoarse {
                a,
                b,
                interior: cells.saturating_sub(1),
            });
        }
        let h = (b - a) / cells as f64;
        pieces.push(IntervalGrid {
            a,
            b,
            h,
            cells,
            unknown_offset,
            mid_offset,
        });
        unknown_offset += cells - 1;
        mid_offset += cells;
    }
    Ok(Grid { pieces, resolution })
}

impl Grid {
    pub fn pieces(&self) -> &[IntervalGrid] {
        &self.pieces
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// All nodes including boundary nodes.
    pub fn node_count(&self) -> usize {
        self.pieces.iter().map(|p| p.cells + 1).sum()
    }

    /// Interior nodes, i.e. the unknowns.
    pub fn unknowns(&self) -> usize {
        self.pieces.iter().map(|p| p.cells - 1).sum()
    }

    pub fn midpoint_count(&self) -> usize {
        self.pieces.iter().map(|p| p.cells).sum()
    }

    /// Interior node positions in unknown order.
    pub fn interior_nodes(&self) -> Vec<f64> {
        self.pieces.iter().flat_map(|p| (1..p.cells).map(move |j| p.node(j))).collect()
    }

    /// Step size attached to each unknown.
    pub fn interior_steps(&self) -> Vec<f64> {
        self.pieces.iter().flat_map(|p| (1..p.cells).map(move |_| p.h)).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.pieces.iter().flat_map(|p| (0..p.cells).map(move |j| p.midpoint(j))).collect()
    }

    /// Every node with a boundary flag.
    pub fn nodes(&self) -> Vec<(f64, bool)> {
        self.pieces
            .iter()
            .flat_map(|p| (0..=p.cells).map(move |j| (p.node(j), j == 0 || j == p.cells)))
            .collect()
    }

    /// Unknown-vector values spread over all nodes, zero on the boundary.
    pub fn expand(&self, interior: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.node_count());
        for p in &self.pieces {
            out.push(0.0);
            out.extend_from_slice(&interior[p.unknown_offset..p.unknown_offset + p.cells - 1]);
            out.push(0.0);
        }
        out
    }

    /// Nearest node to `x`: `Some(unknown index)` for interior nodes, `None` for boundary nodes.
    pub fn locate(&self, x: f64) -> Result<Option<usize>> {
        for p in &self.pieces {
            if p.a <= x && x <= p.b {
                let j = ((x - p.a) / p.h).round() as usize;
                return Ok(if j == 0 || j >= p.cells {
                    None
                } else {
                    Some(p.unknown_offset + j - 1)
                });
            }
        }
        Err(LevyError::OutsideDomain(x))
    }
}

/// `S` on the midpoints: `S_ij = (A/2) δ_ij + ∫_{cell j} K(y - m_i) dy`.
pub fn assemble_s(grid: &Grid, table: &KernelTable, a: f64) -> Result<DMatrix<f64>> {
    let n = grid.midpoint_count();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for row in grid.pieces() {
        for col in grid.pieces() {
            // entries depend on j - i only when both blocks share the step
            let toeplitz = (row.h - col.h).abs() <= 1e-14 * row.h;
            if toeplitz {
                let lo = -(row.cells as i64 - 1);
                let hi = col.cells as i64 - 1;
                let base = col.midpoint(0) - row.midpoint(0);
                let values: Vec<f64> = (lo..=hi)
                    .into_par_iter()
                    .map(|d| table.cell_integral(base + d as f64 * col.h, col.h))
                    .collect::<Result<_>>()?;
                for i in 0..row.cells {
                    for j in 0..col.cells {
                        let d = j as i64 - i as i64;
                        s[(row.mid_offset + i, col.mid_offset + j)] = values[(d - lo) as usize];
                    }
                }
            } else {
                let entries: Vec<f64> = (0..row.cells * col.cells)
                    .into_par_iter()
                    .map(|idx| {
                        let (i, j) = (idx / col.cells, idx % col.cells);
                        table.cell_integral(col.midpoint(j) - row.midpoint(i), col.h)
                    })
                    .collect::<Result<_>>()?;
                for (idx, v) in entries.into_iter().enumerate() {
                    let (i, j) = (idx / col.cells, idx % col.cells);
                    s[(row.mid_offset + i, col.mid_offset + j)] = v;
                }
            }
        }
    }
    for i in 0..n {
        s[(i, i)] += 0.5 * a;
    }
    Ok(s)
}

/// `L = D_out S D_in` on the interior nodes.
pub fn assemble_generator(grid: &Grid, s: &DMatrix<f64>) -> DMatrix<f64> {
    let n = grid.unknowns();
    // unknown index -> (midpoint to the left, midpoint to the right, 1/h)
    let mut stencil = Vec::with_capacity(n);
    for p in grid.pieces() {
        for l in 1..p.cells {
            stencil.push((p.mid_offset + l - 1, p.mid_offset + l, 1.0 / p.h));
        }
    }
    // D_in: column q has +1/h at its left midpoint and -1/h at its right one.
    // D_out: row p has -1/h at its left midpoint and +1/h at its right one.
    DMatrix::from_fn(n, n, |p, q| {
        let (pl, pr, ip) = stencil[p];
        let (ql, qr, iq) = stencil[q];
        ip * iq * (s[(pr, ql)] - s[(pr, qr)] - s[(pl, ql)] + s[(pl, qr)])
    })
}

/// Post-checks recorded alongside the quasi-potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiPotentialDiagnostics {
    /// `max |(-L)B - I|`.
    pub residual: f64,
    /// `‖L‖₁ ‖B‖₁`.
    pub condition: f64,
    /// `min B / max B`; nonnegative up to round-off.
    pub min_entry_ratio: f64,
    /// `max |B - Bᵀ| / max |B|`.
    pub asymmetry: f64,
}

/// Conditioning bound beyond which `L` is treated as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// `B = (-L)^{-1}` and the cumulative row sums `Φ(x_i, y_j)`.
pub fn quasipotential(l: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>, QuasiPotentialDiagnostics)> {
    let n = l.nrows();
    let neg = -l;
    let lu = neg.clone().lu();
    let mut b = lu
        .try_inverse()
        .ok_or(LevyError::SingularGenerator { condition: f64::INFINITY })?;
    let identity = DMatrix::<f64>::identity(n, n);
    let mut defect = &identity - &neg * &b;
    let mut residual = defect.amax();
    if residual > 1e-12 {
        // one step of iterative refinement
        b += lu.solve(&defect).ok_or(LevyError::SingularGenerator { condition: f64::INFINITY })?;
        defect = &identity - &neg * &b;
        residual = defect.amax();
    }
    let norm1 = |m: &DMatrix<f64>| m.column_iter().map(|c| c.abs().sum()).fold(0.0, f64::max);
    let condition = norm1(l) * norm1(&b);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(LevyError::SingularGenerator { condition });
    }
    let max = b.max();
    let scale = b.amax();
    let diagnostics = QuasiPotentialDiagnostics {
        residual,
        condition,
        min_entry_ratio: b.min() / max,
        asymmetry: (&b - b.transpose()).amax() / scale,
    };
    let mut phi = b.clone();
    for mut row in phi.row_iter_mut() {
        let mut acc = 0.0;
        for v in row.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    Ok((b, phi, diagnostics))
}

/// Matrices for one (triplet, domain, resolution) problem.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub grid: Grid,
    pub anchor: f64,
    /// Extra diffusion coefficient added to `S` so that neighbouring nodes
    /// couple nonnegatively; zero unless the drift dominates at grid scale.
    pub artificial_diffusion: f64,
    pub s_mid: DMatrix<f64>,
    pub l: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub phi_rows: DMatrix<f64>,
    pub diagnostics: QuasiPotentialDiagnostics,
}

impl OperatorSet {
    /// Kernel, `S`, `L` and `B` for the triplet on the domain; the anchor defaults
    /// to `max(1, diam Δ)`.
    pub fn build(triplet: &LevyTriplet, domain: &Domain, resolution: f64, anchor: Option<f64>) -> Result<Self> {
        let grid = build_grid(domain, resolution)?;
        let anchor = anchor.unwrap_or_else(|| default_anchor(domain));
        let table = table_for_grid(triplet, &grid, anchor)?;
        let mut s_mid = assemble_s(&grid, &table, triplet.a())?;
        let mut l = assemble_generator(&grid, &s_mid);
        let artificial_diffusion = monotone_diffusion(&grid, &l);
        if artificial_diffusion > 0.0 {
            for i in 0..s_mid.nrows() {
                s_mid[(i, i)] += 0.5 * artificial_diffusion;
            }
            l = assemble_generator(&grid, &s_mid);
        }
        let (b, phi_rows, diagnostics) = quasipotential(&l)?;
        Ok(Self {
            grid,
            anchor,
            artificial_diffusion,
            s_mid,
            l,
            b,
            phi_rows,
            diagnostics,
        })
    }

    /// `B·1`, the mean exit time from each interior node.
    pub fn mean_exit_times(&self) -> Vec<f64> {
        self.b.row_iter().map(|r| r.sum()).collect()
    }
}

/// Smallest `A'` such that `L + (A'/2) D²` has nonnegative nearest-neighbour
/// couplings. A finite-variation jump part contributes a local drift through the
/// jump of `K` at 0, which the staggered scheme treats centrally; `A'` turns that
/// into an upwind difference once the cell Péclet number exceeds one.
pub fn monotone_diffusion(grid: &Grid, l: &DMatrix<f64>) -> f64 {
    let mut needed: f64 = 0.0;
    for p in grid.pieces() {
        let h2 = p.h * p.h;
        for k in 0..p.cells.saturating_sub(2) {
            let i = p.unknown_offset + k;
            let worst = l[(i, i + 1)].min(l[(i + 1, i)]);
            needed = needed.max(-2.0 * h2 * worst);
        }
    }
    // round-off in the couplings of a pure diffusion must not trigger it
    let scale = grid
        .pieces()
        .iter()
        .map(|p| p.h * p.h)
        .fold(0.0, f64::max)
        * l.amax();
    if needed > 1e-10 * scale {
        needed
    } else {
        0.0
    }
}

/// Kernel table covering every midpoint offset of the grid.
pub fn table_for_grid(triplet: &LevyTriplet, grid: &Grid, anchor: f64) -> Result<KernelTable> {
    let kernel = Arc::new(UnifiedKernel::from_triplet(triplet, anchor)?);
    let h = grid.pieces()[0].h;
    let first = grid.pieces()[0];
    let last = grid.pieces()[grid.pieces().len() - 1];
    let reach = last.b - first.a;
    tabulate_kernel(kernel, h, reach + h)
}

/// Generator action on a smooth function sampled at the interior nodes.
pub fn apply_generator(l: &DMatrix<f64>, grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let x = grid.interior_nodes();
    let v = nalgebra::DVector::from_iterator(x.len(), x.iter().map(|&x| f(x)));
    (l * v).iter().cloned().collect()
}
