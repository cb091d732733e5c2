//! Explicit leapfrog solver for the penalized problem
//! `u_tt = Δu − n²(|u|² − 1)u`, `u(0) = f`, `u_t(0) = g`, on the cube
//! `[−L, L]³`.
//!
//! The grid is cell-centred, `N = 2L/h` cells per axis, surrounded by one
//! ghost layer. Ghost cells either hold the initial data for all time
//! (clamped) or mirror the opposite face (periodic). Arrays are stored
//! ghost-inclusive, z slowest and x fastest, three components per cell,
//! matching the [`GridField`] layout.

mod ledger;
mod sweep;

pub use ledger::{EnergyLedger, LedgerRecord};
pub use sweep::{penalization_sweep, SweepEntry, SweepReport};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{CauchyData, GridField};
use crate::spacetime::{ConeSpec, SpacetimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Clamped,
}

/// Largest value of `|u|` tolerated before a run is declared unstable.
pub const BLOWUP_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Half-width `L` of the cube.
    pub half_width: f64,
    pub h: f64,
    /// Explicit time step; must satisfy the CFL bound. Derived when absent.
    pub dt: Option<f64>,
    pub c_cfl: f64,
    /// Penalty `n`.
    pub penalty: f64,
    pub boundary: Boundary,
    pub t_end: f64,
    /// Cell-centred grid (no node at the origin); node-centred otherwise.
    pub cell_centered: bool,
    /// Keep every `store_every`-th time level in the output (capped at the
    /// number of steps). Levels outside `[0, t_end]` are added as needed.
    pub store_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            half_width: 0.625,
            h: 1.0 / 64.0,
            dt: None,
            c_cfl: 0.5,
            penalty: 16.0,
            boundary: Boundary::Clamped,
            t_end: 0.2,
            cell_centered: true,
            store_every: 1,
        }
    }
}

impl SolverConfig {
    /// `c_cfl · min(h/√3, 1/n)`.
    pub fn cfl_bound(&self) -> f64 {
        let wave = self.h / 3f64.sqrt();
        let stiff = if self.penalty > 0.0 { 1.0 / self.penalty } else { f64::INFINITY };
        self.c_cfl * wave.min(stiff)
    }

    /// Cells per axis (without ghosts).
    pub fn cells(&self) -> Result<usize> {
        let n = 2.0 * self.half_width / self.h;
        let r = n.round();
        if !(r >= 4.0) || (n - r).abs() > 1e-9 * r {
            return Err(Error::config(format!(
                "box width {} is not a multiple (≥ 4) of h = {}",
                2.0 * self.half_width,
                self.h
            )));
        }
        Ok(r as usize)
    }

    /// Time step and number of steps reaching `t_end` exactly.
    pub fn time_grid(&self) -> Result<(f64, usize)> {
        let bound = self.cfl_bound();
        if !(self.t_end > 0.0) {
            return Err(Error::config("t_end must be positive"));
        }
        match self.dt {
            Some(dt) => {
                if !(dt > 0.0 && dt <= bound * (1.0 + 1e-12)) {
                    return Err(Error::config(format!(
                        "dt = {dt} violates dt ≤ c_cfl·min(h/√3, 1/n) = {bound}"
                    )));
                }
                Ok((dt, (self.t_end / dt).round().max(1.0) as usize))
            }
            None => {
                let steps = (self.t_end / bound - 1e-9).ceil().max(1.0) as usize;
                Ok((self.t_end / steps as f64, steps))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.half_width > 0.0 && self.c_cfl > 0.0 && self.penalty >= 0.0) {
            return Err(Error::config("h, half_width and c_cfl must be positive, penalty non-negative"));
        }
        if self.boundary == Boundary::Periodic && !self.cell_centered {
            return Err(Error::config("periodic boxes need a cell-centred grid"));
        }
        if self.store_every == 0 {
            return Err(Error::config("store_every must be at least 1"));
        }
        self.cells()?;
        self.time_grid()?;
        Ok(())
    }

    fn geometry(&self) -> Result<Geometry> {
        self.validate()?;
        let cells = self.cells()?;
        let (n, first) = if self.cell_centered {
            (cells, -self.half_width + 0.5 * self.h)
        } else {
            (cells + 1, -self.half_width)
        };
        let m = n + 2;
        Ok(Geometry {
            n,
            m,
            h: self.h,
            origin: first - self.h,
        })
    }
}

/// Padded grid: `n` active cells per axis, `m = n + 2` with ghosts.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Geometry {
    n: usize,
    m: usize,
    h: f64,
    /// Coordinate of padded index 0 along each axis.
    origin: f64,
}

impl Geometry {
    fn len(&self) -> usize {
        self.m * self.m * self.m * 3
    }

    fn plane(&self) -> usize {
        self.m * self.m * 3
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        ((k * self.m + j) * self.m + i) * 3
    }

    fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }

    fn point(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        Vector3::new(self.coord(i), self.coord(j), self.coord(k))
    }

    fn is_ghost(&self, i: usize, j: usize, k: usize) -> bool {
        let e = self.m - 1;
        i == 0 || j == 0 || k == 0 || i == e || j == e || k == e
    }

    /// Copies opposite interior faces into the ghost layer.
    fn wrap(&self, u: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        let src = |a: usize| if a == 0 { n } else if a == m - 1 { 1 } else { a };
        for k in 0..m {
            for j in 0..m {
                for i in 0..m {
                    if self.is_ghost(i, j, k) {
                        let s = self.idx(src(i), src(j), src(k));
                        let d = self.idx(i, j, k);
                        u.copy_within(s..s + 3, d);
                    }
                }
            }
        }
    }

    fn sample<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&Vector3<f64>) -> Result<Vector3<f64>> + Sync,
    {
        let mut u = vec![0.0; self.len()];
        u.par_chunks_mut(self.plane())
            .enumerate()
            .try_for_each(|(k, plane)| -> Result<()> {
                for j in 0..self.m {
                    for i in 0..self.m {
                        let x = self.point(i, j, k);
                        let v = f(&x).map_err(|e| {
                            Error::config(format!("initial data undefined at cell centre {x:?}: {e}"))
                        })?;
                        let o = (j * self.m + i) * 3;
                        plane[o..o + 3].copy_from_slice(v.as_slice());
                    }
                }
                Ok(())
            })?;
        Ok(u)
    }
}

#[inline]
fn cell(u: &[f64], o: usize) -> Vector3<f64> {
    Vector3::new(u[o], u[o + 1], u[o + 2])
}

/// `Δ_h u − n²(|u|² − 1)u` at the cell with offset `o`.
#[inline]
fn force(u: &[f64], o: usize, g: &Geometry, inv_h2: f64, n2: f64) -> Vector3<f64> {
    let sx = 3;
    let sy = 3 * g.m;
    let sz = 3 * g.m * g.m;
    let c = cell(u, o);
    let lap = (cell(u, o + sx) + cell(u, o - sx) + cell(u, o + sy) + cell(u, o - sy) + cell(u, o + sz)
        + cell(u, o - sz)
        - c * 6.0)
        * inv_h2;
    lap - c * (n2 * (c.norm_squared() - 1.0))
}

/// Two consecutive levels `u^{k−1}`, `u^k` of a run.
#[derive(Debug, Clone)]
pub struct StateSlab {
    pub prev: Vec<f64>,
    pub curr: Vec<f64>,
    pub step: i64,
    pub time: f64,
    pub dt: f64,
    geom: Geometry,
    scratch: Vec<f64>,
}

impl StateSlab {
    pub fn cells_per_axis(&self) -> usize {
        self.geom.n
    }

    /// Value of the current level at active cell `(i, j, k)` (0-based).
    pub fn cell(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        cell(&self.curr, self.geom.idx(i + 1, j + 1, k + 1))
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        self.geom.point(i + 1, j + 1, k + 1)
    }

    /// Swaps the roles of the two levels, reversing the direction of time.
    fn reversed(mut self) -> Self {
        std::mem::swap(&mut self.prev, &mut self.curr);
        self.dt = -self.dt;
        self.step = -self.step;
        self
    }
}

/// `u⁰ = f`, `u¹ = u⁰ + dt·g + (dt²/2)(Δ_h u⁰ − n²(|u⁰|² − 1)u⁰)`.
pub fn init_from_data<D: CauchyData>(data: &D, cfg: &SolverConfig) -> Result<StateSlab> {
    let g = cfg.geometry()?;
    let (dt, _) = cfg.time_grid()?;
    let u0 = g.sample(|x| data.position(x))?;
    let v0 = g.sample(|x| data.velocity(x))?;
    let inv_h2 = 1.0 / (g.h * g.h);
    let n2 = cfg.penalty * cfg.penalty;
    let mut u1 = u0.clone();
    u1.par_chunks_mut(g.plane()).enumerate().for_each(|(k, plane)| {
        if k == 0 || k == g.m - 1 {
            return;
        }
        for j in 1..g.m - 1 {
            for i in 1..g.m - 1 {
                let o = g.idx(i, j, k);
                let a = force(&u0, o, &g, inv_h2, n2);
                let v = cell(&u0, o) + cell(&v0, o) * dt + a * (0.5 * dt * dt);
                let p = o - k * g.plane();
                plane[p..p + 3].copy_from_slice(v.as_slice());
            }
        }
    });
    let mut u0 = u0;
    if cfg.boundary == Boundary::Periodic {
        g.wrap(&mut u0);
        g.wrap(&mut u1);
    }
    Ok(slab(u0, u1, dt, g))
}

fn slab(prev: Vec<f64>, curr: Vec<f64>, dt: f64, geom: Geometry) -> StateSlab {
    let scratch = prev.clone();
    StateSlab {
        prev,
        curr,
        step: 1,
        time: dt,
        dt,
        geom,
        scratch,
    }
}

/// `u^{k+1} = 2u^k − u^{k−1} + dt²(Δ_h u^k − n²(|u^k|² − 1)u^k)`.
pub fn step(mut state: StateSlab, cfg: &SolverConfig) -> Result<StateSlab> {
    let g = state.geom;
    let dt = state.dt;
    let inv_h2 = 1.0 / (g.h * g.h);
    let n2 = cfg.penalty * cfg.penalty;
    let (prev, curr) = (&state.prev, &state.curr);
    let peak = state
        .scratch
        .par_chunks_mut(g.plane())
        .enumerate()
        .map(|(k, plane)| {
            let mut peak = 0.0f64;
            if k == 0 || k == g.m - 1 {
                return peak;
            }
            for j in 1..g.m - 1 {
                for i in 1..g.m - 1 {
                    let o = g.idx(i, j, k);
                    let a = force(curr, o, &g, inv_h2, n2);
                    let v = cell(curr, o) * 2.0 - cell(prev, o) + a * (dt * dt);
                    let p = o - k * g.plane();
                    plane[p..p + 3].copy_from_slice(v.as_slice());
                    let m = v.amax();
                    // NaN compares false, so fold it in explicitly
                    peak = if m.is_nan() || peak.is_nan() { f64::NAN } else { peak.max(m) };
                }
            }
            peak
        })
        .reduce(|| 0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
    let next_time = state.time + dt;
    if !peak.is_finite() || peak > BLOWUP_BOUND {
        return Err(Error::Instability {
            step: (state.step + 1).unsigned_abs() as usize,
            time: next_time,
            detail: format!(
                "max |u| = {peak:e} exceeds {BLOWUP_BOUND:e}; check dt ≤ c_cfl·min(h/√3, 1/n) = {:e}",
                cfg.cfl_bound()
            ),
        });
    }
    if cfg.boundary == Boundary::Periodic {
        g.wrap(&mut state.scratch);
    }
    let StateSlab { prev, curr, scratch, .. } = &mut state;
    std::mem::swap(prev, curr);
    std::mem::swap(curr, scratch);
    state.step += 1;
    state.time = next_time;
    Ok(state)
}

/// Ledger entry for the middle level of `(before, at, after)`.
fn energies(
    g: &Geometry,
    before: &[f64],
    at: &[f64],
    after: &[f64],
    dt: f64,
    cfg: &SolverConfig,
) -> (f64, f64, f64, f64) {
    let n2 = cfg.penalty * cfg.penalty;
    let vol = g.h.powi(3);
    let inv_h = 1.0 / g.h;
    let periodic = cfg.boundary == Boundary::Periodic;
    // edges (a, a+1) along each axis; periodic boxes skip the ghost-to-first edge
    let lo = if periodic { 1 } else { 0 };
    let parts: Vec<[f64; 4]> = (0..g.m)
        .into_par_iter()
        .map(|k| {
            let mut acc = [0.0; 4];
            for j in 0..g.m {
                for i in 0..g.m {
                    let o = g.idx(i, j, k);
                    let interior = !g.is_ghost(i, j, k);
                    if interior {
                        let c = cell(at, o);
                        let v = (cell(after, o) - cell(before, o)) / (2.0 * dt);
                        acc[0] += 0.5 * v.norm_squared();
                        let d = c.norm_squared() - 1.0;
                        acc[2] += 0.25 * n2 * d * d;
                        acc[3] += d * d;
                    }
                    // forward edges out of this cell along rows of active cells
                    let e = g.m - 1;
                    let inner = |a: usize| a >= 1 && a < e;
                    let mut edge = |a: usize, ok: bool, stride: usize| {
                        if ok && a >= lo && a < e {
                            acc[1] += 0.5 * ((cell(at, o + stride) - cell(at, o)) * inv_h).norm_squared();
                        }
                    };
                    edge(i, inner(j) && inner(k), 3);
                    edge(j, inner(i) && inner(k), 3 * g.m);
                    edge(k, inner(i) && inner(j), 3 * g.m * g.m);
                }
            }
            acc
        })
        .collect();
    let mut t = [0.0; 4];
    for p in &parts {
        for (a, b) in t.iter_mut().zip(p) {
            *a += b;
        }
    }
    (t[0] * vol, t[1] * vol, t[2] * vol, t[3] * vol)
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Stored levels, from `−store_every·dt` to at least `t_end + store_every·dt`,
    /// ghost layer included.
    pub field: GridField,
    pub ledger: EnergyLedger,
    pub dt: f64,
    pub steps: usize,
}

/// Integrates to `t_end`, storing time levels and the energy ledger.
///
/// One level before `t = 0` is obtained by running the (time-reversible)
/// scheme backwards, so time derivatives are available on the whole
/// interval `[0, t_end]`.
pub fn run<D: CauchyData>(cfg: &SolverConfig, data: &D) -> Result<RunOutput> {
    run_with(cfg, data, |_| {})
}

/// [`run`] with a callback receiving each completed ledger record.
pub fn run_with<D: CauchyData, C: FnMut(&LedgerRecord)>(
    cfg: &SolverConfig,
    data: &D,
    mut on_record: C,
) -> Result<RunOutput> {
    let (dt, steps) = cfg.time_grid()?;
    let s = cfg.store_every.min(steps);
    let mut state = init_from_data(data, cfg)?;
    let g = state.geom;

    // backwards: (u¹, u⁰) → u^{−1}, …, u^{−s}
    let u0 = state.prev.clone();
    let u1 = state.curr.clone();
    let mut back = state.clone().reversed();
    let mut u_minus_1 = None;
    for _ in 0..s {
        back = step(back, cfg)?;
        if u_minus_1.is_none() {
            u_minus_1 = Some(back.curr.clone());
        }
    }
    let mut slabs = vec![back.curr];
    let u_minus_1 = u_minus_1.expect("at least one backward step");

    let last_stored = s * steps.div_ceil(s) + s;
    let mut ledger = EnergyLedger::default();
    let rec = |k: usize, before: &[f64], at: &[f64], after: &[f64]| {
        let (kin, grad, pen, viol) = energies(&g, before, at, after, dt, cfg);
        LedgerRecord::new(k, k as f64 * dt, kin, grad, pen, viol)
    };
    let r0 = rec(0, &u_minus_1, &u0, &u1);
    on_record(&r0);
    ledger.push(r0);
    slabs.push(u0);
    if s == 1 {
        slabs.push(u1);
    }
    while (state.step as usize) < last_stored {
        let k = state.step as usize;
        state = step(state, cfg)?;
        // now scratch = u^{k−1}, prev = u^k, curr = u^{k+1}
        if k <= steps {
            let r = rec(k, &state.scratch, &state.prev, &state.curr);
            on_record(&r);
            ledger.push(r);
        }
        if (k + 1) % s == 0 {
            slabs.push(state.curr.clone());
        }
    }
    let origin = Vector3::repeat(g.origin);
    let field = GridField::from_levels([g.m; 3], g.h, s as f64 * dt, origin, -(s as f64) * dt, slabs)?;
    Ok(RunOutput {
        field,
        ledger,
        dt,
        steps,
    })
}

/// Points whose backward unit-speed domain of dependence stays inside the box
/// by a stencil margin, intersected with a truncated cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustedRegion {
    pub cone: ConeSpec,
    pub half_width: f64,
    pub margin: f64,
    pub t_end: f64,
}

impl TrustedRegion {
    pub fn contains(&self, pt: &SpacetimePoint) -> bool {
        if !self.cone.contains(pt) || pt.t < 0.0 || pt.t > self.t_end {
            return false;
        }
        let reach = self.half_width - self.margin;
        pt.x.iter().all(|c| c.abs() + pt.t < reach)
    }

    /// Whether the whole truncated cone is trusted: its base disk (which
    /// contains every backward domain of dependence) clears the margin.
    pub fn covers_cone(&self) -> bool {
        let c = self.cone.center();
        let r = self.cone.base_radius();
        let reach = self.half_width - self.margin;
        self.cone.a >= 0.0
            && self.cone.b <= self.t_end + 1e-12
            && c.iter().all(|x| x.abs() + r + self.cone.a < reach)
    }
}

/// Stencil margin used by [`trusted_region`]: the ghost layer plus one
/// interpolation cell.
pub fn stencil_margin(cfg: &SolverConfig) -> f64 {
    2.0 * cfg.h
}

pub fn trusted_region(cfg: &SolverConfig, cone: &ConeSpec) -> TrustedRegion {
    TrustedRegion {
        cone: *cone,
        half_width: cfg.half_width,
        margin: stencil_margin(cfg),
        t_end: cfg.t_end,
    }
}
