use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;

use crate::approx::{Polynomial, Projection};
use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::geometry::{default_finest_level, default_region, whitney_decompose, Grid, WhitneyCover};
use crate::scalar::Real;

use super::partition::{build_partition, PartitionOfUnity};
use super::reflect::{reflected_cube, ReflectedCube};

/// Truncation scale: projections on Whitney cubes with larger diameter are 0.
pub const DEFAULT_DELTA: f64 = 16000.0;

/// Per-point provenance flags.
pub mod flags {
    /// The grid point is an atom; the value is `f` there.
    pub const ON_SET: u8 = 1;
    /// No bump reaches the point; the value is `f` at the nearest atom.
    pub const NEAREST_ATOM: u8 = 2;
    /// A contributing projection was built with reduced degree.
    pub const DEGREE_FALLBACK: u8 = 4;
    /// A contributing cube is larger than `Δ` and contributes 0.
    pub const TRUNCATED: u8 = 8;
}

/// Projection data shared by every Whitney cube whose `a(Q)` holds the same atoms.
#[derive(Clone, Debug)]
pub struct SharedProjection<T> {
    pub projection: Projection<T>,
    pub support: Vec<usize>,
    pub degree: usize,
    pub fallback: bool,
}

/// The linear map `f ↦ Ext f` sampled on a grid.
#[derive(Clone, Debug)]
pub struct ExtensionOperator<T> {
    pub k: usize,
    pub delta: T,
    pub partition: PartitionOfUnity<T>,
    /// Reflected cube per Whitney cube that reaches the grid.
    pub reflected: Vec<Option<ReflectedCube<T>>>,
    /// Index into `projections`; `None` when the cube is unused or truncated.
    pub projection_of: Vec<Option<u32>>,
    pub projections: Vec<SharedProjection<T>>,
    on_set: Vec<Option<usize>>,
    nearest: Vec<Option<usize>>,
    point_flags: Vec<u8>,
}

fn build_with_fallback<T: Real>(s: &DSet<T>, rc: &ReflectedCube<T>, support: &[usize], degree: usize) -> Result<(Projection<T>, usize)> {
    let n = s.n();
    let pts: Vec<T> = support.iter().flat_map(|&i| s.atom(i).iter().copied()).collect();
    let w: Vec<T> = support.iter().map(|&i| s.weight(i)).collect();
    let mut deg = degree;
    loop {
        match Projection::from_points(n, &pts, &w, &rc.cube, deg) {
            Ok(p) => return Ok((p, deg)),
            Err(Error::DegenerateGeometry { .. }) if deg > 0 => deg -= 1,
            Err(e) => return Err(e),
        }
    }
}

impl<T: Real> ExtensionOperator<T> {
    /// Prepares `Ext_{k,S}` on `grid` over an existing cover.
    pub fn new(s: &DSet<T>, cover: &WhitneyCover<T>, grid: &Grid<T>, k: usize, delta: T) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("extension needs k ≥ 1".into()));
        }
        if !(delta > T::zero()) {
            return Err(Error::Parameter("delta must be positive".into()));
        }
        let partition = build_partition(cover, grid)?;
        let mut used = vec![false; cover.len()];
        for w in &partition.weights {
            for &(q, _) in w {
                used[q as usize] = true;
            }
        }
        let reflected: Vec<Option<ReflectedCube<T>>> = cover
            .cubes
            .par_iter()
            .zip(&used)
            .map(|(q, &u)| if u { reflected_cube(s, q).map(Some) } else { Ok(None) })
            .collect::<Result<_>>()?;
        let mut keys: HashMap<Vec<usize>, u32> = HashMap::new();
        let mut jobs: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut projection_of = vec![None; cover.len()];
        let mut truncated = vec![false; cover.len()];
        for (i, rc) in reflected.iter().enumerate() {
            let Some(rc) = rc else { continue };
            if cover.cubes[i].side::<T>() > delta {
                truncated[i] = true;
                continue;
            }
            let support = s.atoms_in(&rc.cube);
            let next = jobs.len() as u32;
            let id = *keys.entry(support).or_insert_with_key(|key| {
                jobs.push((i, key.clone()));
                next
            });
            projection_of[i] = Some(id);
        }
        let degree = k - 1;
        let projections: Vec<SharedProjection<T>> = jobs
            .into_par_iter()
            .map(|(i, support)| {
                let rc = reflected[i].as_ref().expect("reflected cube exists");
                let (projection, deg) = build_with_fallback(s, rc, &support, degree)?;
                Ok(SharedProjection { projection, support, degree: deg, fallback: deg < degree })
            })
            .collect::<Result<_>>()?;
        let uncovered: std::collections::HashSet<usize> = partition.uncovered.iter().copied().collect();
        let mut on_set = vec![None; grid.len()];
        let mut nearest = vec![None; grid.len()];
        let mut point_flags = vec![0u8; grid.len()];
        for i in 0..grid.len() {
            let x = grid.point(i);
            let (a, d) = s.nearest(&x);
            if d == T::zero() {
                on_set[i] = Some(a);
                point_flags[i] |= flags::ON_SET;
                continue;
            }
            if uncovered.contains(&i) {
                nearest[i] = Some(a);
                point_flags[i] |= flags::NEAREST_ATOM;
            }
            for &(q, _) in &partition.weights[i] {
                if truncated[q as usize] {
                    point_flags[i] |= flags::TRUNCATED;
                } else if let Some(p) = projection_of[q as usize] {
                    if projections[p as usize].fallback {
                        point_flags[i] |= flags::DEGREE_FALLBACK;
                    }
                }
            }
        }
        Ok(Self { k, delta, partition, reflected, projection_of, projections, on_set, nearest, point_flags })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.partition.grid
    }

    pub fn flags(&self) -> &[u8] {
        &self.point_flags
    }

    /// Number of distinct projections that fell back to a lower degree.
    pub fn fallback_count(&self) -> usize {
        self.projections.iter().filter(|p| p.fallback).count()
    }

    /// `Ext f` on the grid.
    pub fn apply(&self, f: &[T]) -> Result<ExtensionField<T>> {
        let polys: Vec<Polynomial<T>> = self
            .projections
            .par_iter()
            .map(|p| {
                let vals: Vec<T> = p.support.iter().map(|&i| f[i]).collect();
                p.projection.apply(&vals)
            })
            .collect();
        let grid = self.grid();
        let values: Vec<T> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                if let Some(a) = self.on_set[i].or(self.nearest[i]) {
                    return f[a];
                }
                let x = grid.point(i);
                let mut v = T::zero();
                for &(q, phi) in &self.partition.weights[i] {
                    if let Some(p) = self.projection_of[q as usize] {
                        v += phi * polys[p as usize].eval(&x);
                    }
                }
                v
            })
            .collect();
        let provenance = self.partition.weights.iter().map(|w| w.iter().map(|e| e.0).collect()).collect();
        Ok(ExtensionField { k: self.k, delta: self.delta, grid: grid.clone(), values, provenance, flags: self.point_flags.clone() })
    }
}

/// Extension samples on a grid with per-point provenance.
#[derive(Clone, Debug, Serialize)]
pub struct ExtensionField<T> {
    pub k: usize,
    pub delta: T,
    pub grid: Grid<T>,
    pub values: Vec<T>,
    /// Whitney cubes whose bumps reach each point.
    pub provenance: Vec<SmallVec<[u32; 8]>>,
    pub flags: Vec<u8>,
}

#[derive(Serialize)]
struct Sidecar {
    nx: usize,
    ny: usize,
    origin: Vec<f64>,
    step: f64,
}

impl<T: Real> ExtensionField<T> {
    fn require_plane(&self) -> Result<()> {
        if self.grid.n != 2 {
            return Err(Error::Parameter(format!("field export supports n = 2 only, got n = {}", self.grid.n)));
        }
        Ok(())
    }

    /// Rows `x,y,value` in linear index order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.require_plane()?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            let p = self.grid.point(i);
            w.write_record([p[0].as_f64().to_string(), p[1].as_f64().to_string(), v.as_f64().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Little-endian `f64` values (x fastest) plus a JSON sidecar
    /// `{nx, ny, origin, step}`.
    pub fn write_binary(&self, data: &Path, sidecar: &Path) -> Result<()> {
        self.require_plane()?;
        let mut out = std::io::BufWriter::new(std::fs::File::create(data)?);
        for v in &self.values {
            out.write_all(&v.as_f64().to_le_bytes())?;
        }
        out.flush()?;
        let meta = Sidecar {
            nx: self.grid.size,
            ny: self.grid.size,
            origin: self.grid.origin.iter().map(|o| o.as_f64()).collect(),
            step: self.grid.step.as_f64(),
        };
        std::fs::write(sidecar, serde_json::to_string(&meta)?)?;
        Ok(())
    }
}

/// Reads a binary field written by [`ExtensionField::write_binary`].
pub fn read_binary_field(data: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(data)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parameter("binary field length is not a multiple of 8".into()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

/// `Ext_{k,S} f` on `grid`, with the default Whitney cover of `S`.
pub fn extend<T: Real>(f: &[T], s: &DSet<T>, k: usize, delta: T, grid: &Grid<T>) -> Result<ExtensionField<T>> {
    if f.len() != s.len() {
        return Err(Error::Parameter(format!("{} samples for {} atoms", f.len(), s.len())));
    }
    let region = default_region(s);
    if !region.contains_cube(&grid.region()) {
        return Err(Error::Geometry("grid region exceeds the default Whitney region".into()));
    }
    let cover = whitney_decompose(s, &region, default_finest_level(s))?;
    ExtensionOperator::new(s, &cover, grid, k, delta)?.apply(f)
}
