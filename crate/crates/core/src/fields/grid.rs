//! Solver output stored on a uniform cell-centred grid with equally spaced
//! time levels, sampled as jets by interpolation.
//!
//! Binary container, all integers and floats little-endian:
//!
//! ```text
//! magic  b"WMGF"
//! u32    version (= 1)
//! u64    nx, ny, nz, levels
//! f64    h, dt, origin.x, origin.y, origin.z, t0
//! f64[]  levels × nz × ny × nx × 3, x fastest, components contiguous
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use super::{FieldEvaluator, JetSample};
use crate::error::{Error, Result};
use crate::spacetime::SpacetimePoint;

const MAGIC: &[u8; 4] = b"WMGF";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 * 8 + 6 * 8;

/// Time levels of a vector field on a uniform grid.
///
/// Node `(i, j, k)` sits at `origin + h·(i, j, k)`, level `l` at `t0 + l·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub dims: [usize; 3],
    pub levels: usize,
    pub h: f64,
    pub dt: f64,
    pub origin: Vector3<f64>,
    pub t0: f64,
    data: Vec<f64>,
}

impl GridField {
    pub fn zeros(dims: [usize; 3], levels: usize, h: f64, dt: f64, origin: Vector3<f64>, t0: f64) -> Self {
        let len = levels * dims[0] * dims[1] * dims[2] * 3;
        Self {
            dims,
            levels,
            h,
            dt,
            origin,
            t0,
            data: vec![0.0; len],
        }
    }

    /// Builds a grid from level slabs, each `nz·ny·nx·3` long.
    pub fn from_levels(
        dims: [usize; 3],
        h: f64,
        dt: f64,
        origin: Vector3<f64>,
        t0: f64,
        slabs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let per = dims[0] * dims[1] * dims[2] * 3;
        if slabs.iter().any(|s| s.len() != per) {
            return Err(Error::Format(format!("every level must hold {per} values")));
        }
        let levels = slabs.len();
        Ok(Self {
            dims,
            levels,
            h,
            dt,
            origin,
            t0,
            data: slabs.concat(),
        })
    }

    /// Samples `f` at every node and level.
    pub fn sample<F>(dims: [usize; 3], levels: usize, h: f64, dt: f64, origin: Vector3<f64>, t0: f64, f: F) -> Result<Self>
    where
        F: Fn(&SpacetimePoint) -> Result<Vector3<f64>>,
    {
        let mut g = Self::zeros(dims, levels, h, dt, origin, t0);
        for l in 0..levels {
            for k in 0..dims[2] {
                for j in 0..dims[1] {
                    for i in 0..dims[0] {
                        let v = f(&g.node_point(l, i, j, k))?;
                        g.set(l, i, j, k, &v);
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn level_len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2] * 3
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn level(&self, l: usize) -> &[f64] {
        let n = self.level_len();
        &self.data[l * n..(l + 1) * n]
    }

    #[inline]
    fn offset(&self, l: usize, i: usize, j: usize, k: usize) -> usize {
        (((l * self.dims[2] + k) * self.dims[1] + j) * self.dims[0] + i) * 3
    }

    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize, k: usize) -> Vector3<f64> {
        let o = self.offset(l, i, j, k);
        Vector3::new(self.data[o], self.data[o + 1], self.data[o + 2])
    }

    pub fn set(&mut self, l: usize, i: usize, j: usize, k: usize, v: &Vector3<f64>) {
        let o = self.offset(l, i, j, k);
        self.data[o..o + 3].copy_from_slice(v.as_slice());
    }

    pub fn node_point(&self, l: usize, i: usize, j: usize, k: usize) -> SpacetimePoint {
        SpacetimePoint::new(
            self.t0 + l as f64 * self.dt,
            self.origin + Vector3::new(i as f64, j as f64, k as f64) * self.h,
        )
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.t0, self.t0 + (self.levels - 1) as f64 * self.dt)
    }

    /// Spatial box where jets are available: one node in from each face.
    pub fn interior_box(&self) -> (Vector3<f64>, Vector3<f64>) {
        let lo = self.origin + Vector3::repeat(self.h);
        let hi = self.origin + Vector3::new(
            (self.dims[0] - 2) as f64,
            (self.dims[1] - 2) as f64,
            (self.dims[2] - 2) as f64,
        ) * self.h;
        (lo, hi)
    }

    /// Central-difference jet at a node; needs one neighbour on every side.
    fn node_jet(&self, l: usize, i: usize, j: usize, k: usize) -> JetSample {
        let value = self.get(l, i, j, k);
        let dt = (self.get(l + 1, i, j, k) - self.get(l - 1, i, j, k)) / (2.0 * self.dt);
        let inv = 1.0 / (2.0 * self.h);
        let dx = (self.get(l, i + 1, j, k) - self.get(l, i - 1, j, k)) * inv;
        let dy = (self.get(l, i, j + 1, k) - self.get(l, i, j - 1, k)) * inv;
        let dz = (self.get(l, i, j, k + 1) - self.get(l, i, j, k - 1)) * inv;
        let grad = Matrix3::from_rows(&[dx.transpose(), dy.transpose(), dz.transpose()]);
        JetSample::new(value, dt, grad)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        Self::read(&mut BufReader::new(File::open(path)?))
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for n in [self.dims[0], self.dims[1], self.dims[2], self.levels] {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for x in [self.h, self.dt, self.origin.x, self.origin.y, self.origin.z, self.t0] {
            w.write_all(&x.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.level_len() * 8);
        for chunk in self.data.chunks(self.level_len().max(1)) {
            buf.clear();
            for x in chunk {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let mut head = [0u8; HEADER_LEN];
        r.read_exact(&mut head).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        if &head[0..4] != MAGIC {
            return Err(Error::Format("not a grid field container".into()));
        }
        let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported container version {version}")));
        }
        let u = |k: usize| u64::from_le_bytes(head[8 + 8 * k..16 + 8 * k].try_into().unwrap());
        let f = |k: usize| f64::from_le_bytes(head[40 + 8 * k..48 + 8 * k].try_into().unwrap());
        let dims = [u(0) as usize, u(1) as usize, u(2) as usize];
        let levels = u(3) as usize;
        let len = dims
            .iter()
            .chain(std::iter::once(&levels))
            .try_fold(3usize, |a, &b| a.checked_mul(b))
            .ok_or_else(|| Error::Format("grid dimensions overflow".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != len * 8 {
            return Err(Error::Format(format!(
                "payload holds {} bytes, expected {}",
                bytes.len(),
                len * 8
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            dims,
            levels,
            h: f(0),
            dt: f(1),
            origin: Vector3::new(f(2), f(3), f(4)),
            t0: f(5),
            data,
        })
    }
}

/// Base index and fraction for coordinate `s` on an axis of `n` nodes with
/// spacing `d`, keeping both bracketing nodes one away from the ends.
fn bracket(s: f64, n: usize, d: f64, what: &str) -> Result<(usize, f64)> {
    let tol = 1e-9;
    if n < 4 {
        return Err(Error::range(format!("{what} axis needs at least 4 nodes")));
    }
    let y = s / d;
    let lo = 1.0;
    let hi = (n - 2) as f64;
    if !(y >= lo - tol && y <= hi + tol) {
        return Err(Error::range(format!("{what} coordinate {s} outside the sampled range")));
    }
    let i = (y.floor() as isize).clamp(1, n as isize - 3) as usize;
    Ok((i, (y - i as f64).clamp(0.0, 1.0)))
}

/// Jet at `pt` by trilinear-in-space, linear-in-time interpolation of node
/// central differences. Second-order accurate for smooth data.
pub fn grid_jet(field: &GridField, pt: &SpacetimePoint) -> Result<JetSample> {
    let (l, tl) = bracket(pt.t - field.t0, field.levels, field.dt, "time")?;
    let rel = pt.x - field.origin;
    let (i, ti) = bracket(rel.x, field.dims[0], field.h, "x")?;
    let (j, tj) = bracket(rel.y, field.dims[1], field.h, "y")?;
    let (k, tk) = bracket(rel.z, field.dims[2], field.h, "z")?;
    let mut acc = JetSample::zero();
    for (dl, wl) in [(0, 1.0 - tl), (1, tl)] {
        for (dk, wk) in [(0, 1.0 - tk), (1, tk)] {
            for (dj, wj) in [(0, 1.0 - tj), (1, tj)] {
                for (di, wi) in [(0, 1.0 - ti), (1, ti)] {
                    let w = wl * wk * wj * wi;
                    if w != 0.0 {
                        acc = acc.add(&field.node_jet(l + dl, i + di, j + dj, k + dk).scaled(w));
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Value at `pt` by the same interpolation as [`grid_jet`], without derivatives.
pub fn grid_value(field: &GridField, pt: &SpacetimePoint) -> Result<Vector3<f64>> {
    let (l, tl) = bracket(pt.t - field.t0, field.levels, field.dt, "time")?;
    let rel = pt.x - field.origin;
    let (i, ti) = bracket(rel.x, field.dims[0], field.h, "x")?;
    let (j, tj) = bracket(rel.y, field.dims[1], field.h, "y")?;
    let (k, tk) = bracket(rel.z, field.dims[2], field.h, "z")?;
    let mut acc = Vector3::zeros();
    for (dl, wl) in [(0, 1.0 - tl), (1, tl)] {
        for (dk, wk) in [(0, 1.0 - tk), (1, tk)] {
            for (dj, wj) in [(0, 1.0 - tj), (1, tj)] {
                for (di, wi) in [(0, 1.0 - ti), (1, ti)] {
                    acc += field.get(l + dl, i + di, j + dj, k + dk) * (wl * wk * wj * wi);
                }
            }
        }
    }
    Ok(acc)
}

impl FieldEvaluator for GridField {
    fn jet(&self, pt: &SpacetimePoint) -> Result<JetSample> {
        grid_jet(self, pt)
    }

    fn value(&self, pt: &SpacetimePoint) -> Result<Vector3<f64>> {
        grid_value(self, pt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GeodesicPlaneWave;

    fn sampled<F: FieldEvaluator>(f: &F, n: usize, h: f64, dt: f64, levels: usize) -> GridField {
        let origin = Vector3::repeat(-0.5 * (n - 1) as f64 * h);
        GridField::sample([n, n, n], levels, h, dt, origin, -dt, |p| f.value(p)).unwrap()
    }

    #[test]
    fn affine_data_is_reproduced_exactly() {
        let a = Vector3::new(0.3, -1.0, 2.0);
        let m = Matrix3::new(1.0, 2.0, 0.5, -0.3, 0.0, 1.5, 0.7, 0.1, -2.0);
        let f = crate::fields::FnField(move |p: &SpacetimePoint| {
            Ok(JetSample::new(a * p.t + m.transpose() * p.x, a, m))
        });
        let g = sampled(&f, 8, 0.1, 0.05, 6);
        let pt = SpacetimePoint::from_coords(0.063, 0.017, -0.111, 0.093);
        let j = g.jet(&pt).unwrap();
        let e = f.jet(&pt).unwrap();
        assert!((j.value - e.value).norm() < 1e-13);
        assert!((g.value(&pt).unwrap() - j.value).norm() < 1e-14);
        assert!((j.dt - e.dt).norm() < 1e-12);
        assert!((j.grad - e.grad).norm() < 1e-12);
    }

    #[test]
    fn interpolation_is_second_order() {
        let w = GeodesicPlaneWave::new(1.3, Vector3::new(0.8, -0.6, 1.1));
        let pts: Vec<SpacetimePoint> = (0..200)
            .map(|k| {
                let s = |m: u64| ((k * m) % 97) as f64 / 97.0 - 0.5;
                SpacetimePoint::from_coords(0.05 + 0.1 * s(13), 0.2 * s(31), 0.2 * s(57), 0.2 * s(71))
            })
            .collect();
        let err = |n: usize, h: f64| {
            let g = sampled(&w, n, h, h, (0.2 / h) as usize + 3);
            pts.iter()
                .map(|pt| {
                    let j = g.jet(pt).unwrap();
                    let e = w.jet(pt).unwrap();
                    (j.value - e.value).norm() + (j.dt - e.dt).norm() + (j.grad - e.grad).norm()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(14, 0.04) / err(26, 0.02);
        assert!(ratio > 3.5 && ratio < 4.6, "ratio {ratio}");
    }

    #[test]
    fn outside_points_are_refused() {
        let w = GeodesicPlaneWave::null(Vector3::new(1.0, 0.0, 0.0));
        let g = sampled(&w, 6, 0.1, 0.1, 5);
        assert!(g.jet(&SpacetimePoint::from_coords(0.0, 0.0, 0.0, 0.0)).is_ok());
        assert!(matches!(
            g.jet(&SpacetimePoint::from_coords(0.0, 0.3, 0.0, 0.0)),
            Err(Error::OutOfRange(_))
        ));
        assert!(g.jet(&SpacetimePoint::from_coords(0.5, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn container_roundtrip_is_bit_exact() {
        let w = GeodesicPlaneWave::new(0.9, Vector3::new(0.1, 0.2, 0.3));
        let g = sampled(&w, 5, 0.125, 0.0625, 4);
        let mut bytes = Vec::new();
        g.write(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"WMGF");
        assert_eq!(bytes.len(), HEADER_LEN + 4 * 125 * 3 * 8);
        let back = GridField::read(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, g);
        assert!(back.raw().iter().zip(g.raw()).all(|(a, b)| a.to_bits() == b.to_bits()));

        let dir = std::env::temp_dir().join(format!("wmgf-{}.bin", std::process::id()));
        g.write_to(&dir).unwrap();
        assert_eq!(GridField::read_from(&dir).unwrap(), g);
        std::fs::remove_file(&dir).ok();

        bytes[0] = b'X';
        assert!(matches!(GridField::read(&mut bytes.as_slice()), Err(Error::Format(_))));
        let mut short = Vec::new();
        g.write(&mut short).unwrap();
        short.truncate(short.len() - 8);
        assert!(GridField::read(&mut short.as_slice()).is_err());
    }
}
