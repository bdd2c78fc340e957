use bytemuck::{Pod, Zeroable};

use crate::error::{Error, Result};
use crate::math::{Aabb, Ray, Vec3};
use crate::parallel::Exec;
use crate::scene::{PrimHit, PrimitiveIntersector};

use super::{crosses_surface, ray64, sdf_hit, CellGrid, LatticeSamples, SdfGrid};

/// Header of one brick: a `dim^3` block of voxels at lattice depth `depth`
/// whose `(dim+1)^3` distances start at `value_offset` in the shared value
/// array.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Pod, Zeroable)]
#[repr(C)]
pub struct SbsBrick {
    /// Brick coordinates (in bricks, not voxels).
    pub pos: [u32; 3],
    pub depth: u32,
    pub dim: u32,
    pub value_offset: u32,
}

impl SbsBrick {
    #[inline]
    pub fn voxel_size(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    #[inline]
    pub fn min(&self) -> [f64; 3] {
        let s = self.voxel_size() * self.dim as f64;
        self.pos.map(|p| p as f64 * s)
    }

    #[inline]
    pub fn value_count(&self) -> usize {
        (self.dim as usize + 1).pow(3)
    }

    pub fn bounds(&self) -> Aabb {
        let s = (self.voxel_size() * self.dim as f64) as f32;
        let min = Vec3::new(self.pos[0] as f32 * s, self.pos[1] as f32 * s, self.pos[2] as f32 * s);
        Aabb::new(min, min + Vec3::splat(s))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseBrickSet {
    pub bricks: Vec<SbsBrick>,
    pub values: Vec<f32>,
}

impl SparseBrickSet {
    pub fn view(&self) -> SbsView<'_> {
        SbsView {
            bricks: &self.bricks,
            values: &self.values,
        }
    }

    /// Interpolated distance of brick `prim` at an object-space point.
    pub fn eval_brick(&self, prim: u32, p: [f64; 3]) -> f64 {
        self.view().cells(&self.bricks[prim as usize]).eval(p)
    }
}

/// Builds bricks of `brick_dim^3` voxels at lattice depth `depth`. A brick is
/// kept when any of its voxels straddles the surface.
pub fn sbs_from_grid(exec: Exec, grid: &SdfGrid, brick_dim: u32, depth: u32) -> Result<SparseBrickSet> {
    grid.validate()?;
    if brick_dim != 2 && brick_dim != 4 {
        return Err(Error::InvalidGeometry(format!("brick dim {brick_dim} must be 2 or 4")));
    }
    if depth > 10 || (1u32 << depth) < brick_dim {
        return Err(Error::InvalidGeometry(format!(
            "depth {depth} cannot hold bricks of {brick_dim} voxels"
        )));
    }
    let samples = LatticeSamples::from_grid(exec, grid, depth);
    let b = brick_dim as usize;
    let per_axis = samples.cells / b;
    let mut set = SparseBrickSet::default();
    for bz in 0..per_axis {
        for by in 0..per_axis {
            for bx in 0..per_axis {
                let base = [bx * b, by * b, bz * b];
                let any_crossing = (0..b * b * b).any(|v| {
                    let cell = [base[0] + v % b, base[1] + v / b % b, base[2] + v / (b * b)];
                    crosses_surface(&samples.corners(cell, 1))
                });
                if !any_crossing {
                    continue;
                }
                let value_offset = set.values.len() as u32;
                for z in 0..=b {
                    for y in 0..=b {
                        for x in 0..=b {
                            set.values.push(samples.at(base[0] + x, base[1] + y, base[2] + z));
                        }
                    }
                }
                set.bricks.push(SbsBrick {
                    pos: [bx as u32, by as u32, bz as u32],
                    depth,
                    dim: brick_dim,
                    value_offset,
                });
            }
        }
    }
    if set.bricks.is_empty() {
        return Err(Error::EmptySdfSurface);
    }
    Ok(set)
}

#[derive(Clone, Copy, Debug)]
pub struct SbsView<'a> {
    pub bricks: &'a [SbsBrick],
    pub values: &'a [f32],
}

impl<'a> SbsView<'a> {
    pub(crate) fn cells(&self, brick: &SbsBrick) -> CellGrid<'a> {
        let start = brick.value_offset as usize;
        let n = brick.dim as usize + 1;
        CellGrid {
            values: &self.values[start..start + brick.value_count()],
            dims: [n; 3],
            origin: brick.min(),
            cell: [brick.voxel_size(); 3],
        }
    }

    pub fn prim_bounds(&self) -> Vec<Aabb> {
        self.bricks.iter().map(SbsBrick::bounds).collect()
    }
}

impl PrimitiveIntersector for SbsView<'_> {
    fn intersect_prim(&self, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        let brick = &self.bricks[prim as usize];
        let (o, d) = ray64(ray);
        let hit = self.cells(brick).march(o, d, ray.t_near.into(), f64::INFINITY, ray.dir)?;
        let out = sdf_hit(hit.t, hit.normal);
        (out.t >= ray.t_near && out.t <= t_max).then_some(out)
    }
}
