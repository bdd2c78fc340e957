use crate::error::{Error, Result};
use crate::math::{Aabb, Ray, Vec3};
use crate::scene::{PrimHit, PrimitiveIntersector};

use super::{ray64, sdf_hit, trilinear, CellGrid};

/// Dense vertex-centred distance grid over `[0,1]^3`; values are x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SdfGrid {
    pub dims: [u32; 3],
    pub values: Vec<f32>,
}

impl SdfGrid {
    pub fn new(dims: [u32; 3], values: Vec<f32>) -> Result<Self> {
        let grid = Self { dims, values };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidGeometry(format!("SDF grid dims {:?} must be >= 2", self.dims)));
        }
        let n: usize = self.dims.iter().map(|&d| d as usize).product();
        if self.values.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "SDF grid has {} values, dims need {n}",
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGeometry("SDF grid values must be finite".into()));
        }
        Ok(())
    }

    /// Samples `f` at every grid vertex.
    pub fn from_fn(dims: [u32; 3], f: impl Fn(Vec3) -> f32) -> Result<Self> {
        let [nx, ny, nz] = dims.map(|d| d as usize);
        if nx < 2 || ny < 2 || nz < 2 {
            return Err(Error::InvalidGeometry(format!("SDF grid dims {dims:?} must be >= 2")));
        }
        let mut values = Vec::with_capacity(nx * ny * nz);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let p = Vec3::new(
                        x as f32 / (nx - 1) as f32,
                        y as f32 / (ny - 1) as f32,
                        z as f32 / (nz - 1) as f32,
                    );
                    values.push(f(p));
                }
            }
        }
        Self::new(dims, values)
    }

    /// Exact sphere distance sampled on the grid.
    pub fn sphere(dims: [u32; 3], center: Vec3, radius: f32) -> Result<Self> {
        Self::from_fn(dims, |p| {
            let d = [
                f64::from(p.x) - f64::from(center.x),
                f64::from(p.y) - f64::from(center.y),
                f64::from(p.z) - f64::from(center.z),
            ];
            ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() - f64::from(radius)) as f32
        })
    }

    pub fn view(&self) -> GridView<'_> {
        GridView {
            dims: self.dims,
            values: &self.values,
        }
    }

    /// Interpolated distance at an object-space point (clamped to the grid).
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.view().cells().eval(p)
    }

    /// Grid value at vertex `i` of a `cells`-per-axis lattice over the unit
    /// cube. Exact grid values are returned when the lattice aligns with the
    /// grid vertices.
    pub(crate) fn sample_lattice(&self, i: [usize; 3], cells: usize) -> f32 {
        let mut idx = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for k in 0..3 {
            let n = self.dims[k] as usize - 1;
            let num = i[k] * n;
            let (q, r) = (num / cells, num % cells);
            if q >= n {
                idx[k] = n - 1;
                frac[k] = 1.0;
            } else {
                idx[k] = q;
                frac[k] = r as f64 / cells as f64;
            }
        }
        let [nx, ny, _] = self.dims.map(|d| d as usize);
        let c: [f64; 8] = std::array::from_fn(|k| {
            let (x, y, z) = (idx[0] + (k & 1), idx[1] + (k >> 1 & 1), idx[2] + (k >> 2 & 1));
            f64::from(self.values[x + nx * (y + ny * z)])
        });
        trilinear(&c, frac) as f32
    }
}

/// Borrowed grid; the whole grid is a single primitive walked with a DDA.
#[derive(Clone, Copy, Debug)]
pub struct GridView<'a> {
    pub dims: [u32; 3],
    pub values: &'a [f32],
}

impl<'a> GridView<'a> {
    pub(crate) fn cells(&self) -> CellGrid<'a> {
        let dims = self.dims.map(|d| d as usize);
        CellGrid {
            values: self.values,
            dims,
            origin: [0.0; 3],
            cell: dims.map(|d| 1.0 / (d - 1) as f64),
        }
    }

    pub fn prim_bounds(&self) -> Vec<Aabb> {
        vec![Aabb::unit()]
    }
}

impl PrimitiveIntersector for GridView<'_> {
    fn intersect_prim(&self, _prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        let (o, d) = ray64(ray);
        let hit = self.cells().march(o, d, ray.t_near.into(), f64::INFINITY, ray.dir)?;
        let out = sdf_hit(hit.t, hit.normal);
        (out.t >= ray.t_near && out.t <= t_max).then_some(out)
    }
}
