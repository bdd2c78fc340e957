//! Signed-distance-field geometry: dense grid, frame octree, sparse voxel set
//! and sparse brick set, all intersected by running a bracketed Newton solve
//! on the trilinear interpolant along the ray inside each cell.
//!
//! Every representation lives in the unit cube `[0,1]^3` of object space.
//! Corner arrays use the index `x + 2y + 4z`.

mod grid;
mod octree;
mod sbs;
mod svs;

pub use grid::{GridView, SdfGrid};
pub use octree::{FrameLeaf, FrameOctree, FrameOctreeParams, OctreeNode, OctreeView};
pub use sbs::{sbs_from_grid, SbsBrick, SbsView, SparseBrickSet};
pub use svs::{dequantize, quantization_range, quantize, svs_from_grid, SparseVoxelSet, SvsNode, SvsView};

use crate::math::{oct_encode, Ray, Vec3};
use crate::parallel::{self, Exec};

/// Newton iterations per monotone bracket.
pub const NEWTON_MAX_ITERS: usize = 32;

/// A root is accepted once the interpolant magnitude falls below this.
pub const NEWTON_TOLERANCE: f64 = 1e-10;

/// Trilinear blend of 8 corner values at `local` in `[0,1]^3`.
pub fn sample_trilinear(corners: &[f32; 8], local: Vec3) -> f32 {
    trilinear(&corners.map(f64::from), [local.x.into(), local.y.into(), local.z.into()]) as f32
}

#[inline]
pub(crate) fn trilinear(c: &[f64; 8], p: [f64; 3]) -> f64 {
    let [x, y, z] = p;
    let c00 = c[0] * (1.0 - x) + c[1] * x;
    let c10 = c[2] * (1.0 - x) + c[3] * x;
    let c01 = c[4] * (1.0 - x) + c[5] * x;
    let c11 = c[6] * (1.0 - x) + c[7] * x;
    let c0 = c00 * (1.0 - y) + c10 * y;
    let c1 = c01 * (1.0 - y) + c11 * y;
    c0 * (1.0 - z) + c1 * z
}

#[inline]
pub(crate) fn trilinear_gradient(c: &[f64; 8], p: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = p;
    let lerp = |a: f64, b: f64, t: f64| a * (1.0 - t) + b * t;
    let gx = lerp(lerp(c[1] - c[0], c[3] - c[2], y), lerp(c[5] - c[4], c[7] - c[6], y), z);
    let gy = lerp(lerp(c[2] - c[0], c[3] - c[1], x), lerp(c[6] - c[4], c[7] - c[5], x), z);
    let gz = lerp(lerp(c[4] - c[0], c[5] - c[1], x), lerp(c[6] - c[2], c[7] - c[3], x), y);
    [gx, gy, gz]
}

/// Ray in the local frame of one cell: the cell is `[0,1]^3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalRay {
    pub origin: [f64; 3],
    pub dir: [f64; 3],
}

impl LocalRay {
    #[inline]
    pub fn at(&self, t: f64) -> [f64; 3] {
        [
            self.origin[0] + t * self.dir[0],
            self.origin[1] + t * self.dir[1],
            self.origin[2] + t * self.dir[2],
        ]
    }

    /// Maps an object-space ray into the frame of the box `[min, min + size]`.
    pub fn into_cell(origin: [f64; 3], dir: [f64; 3], min: [f64; 3], size: [f64; 3]) -> Self {
        Self {
            origin: [
                (origin[0] - min[0]) / size[0],
                (origin[1] - min[1]) / size[1],
                (origin[2] - min[2]) / size[2],
            ],
            dir: [dir[0] / size[0], dir[1] / size[1], dir[2] / size[2]],
        }
    }

    /// Parameter interval inside the unit cube, clipped to `[t_min, t_max]`.
    pub fn clip_unit(&self, t_min: f64, t_max: f64) -> Option<(f64, f64)> {
        let (mut t0, mut t1) = (t_min, t_max);
        for k in 0..3 {
            if self.dir[k] == 0.0 {
                if self.origin[k] < 0.0 || self.origin[k] > 1.0 {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / self.dir[k];
            let a = -self.origin[k] * inv;
            let b = (1.0 - self.origin[k]) * inv;
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t0 <= t1).then_some((t0, t1))
    }
}

/// Coefficients `[c0, c1, c2, c3]` of the cubic `f(t)` traced by the
/// trilinear interpolant along the ray.
fn cubic_along_ray(c: &[f64; 8], ray: &LocalRay) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (idx, &v) in c.iter().enumerate() {
        // Product of three linear factors a + b t.
        let mut poly = [v, 0.0, 0.0, 0.0];
        for k in 0..3 {
            let (a, b) = if idx >> k & 1 == 1 {
                (ray.origin[k], ray.dir[k])
            } else {
                (1.0 - ray.origin[k], -ray.dir[k])
            };
            poly = [
                poly[0] * a,
                poly[1] * a + poly[0] * b,
                poly[2] * a + poly[1] * b,
                poly[3] * a + poly[2] * b,
            ];
        }
        for i in 0..4 {
            out[i] += poly[i];
        }
    }
    out
}

/// Roots of `f'(t)` for the cubic, ascending, restricted to `(lo, hi)`.
fn critical_points(p: &[f64; 4], lo: f64, hi: f64) -> ([f64; 2], usize) {
    let (a, b, c) = (3.0 * p[3], 2.0 * p[2], p[1]);
    let mut roots = [0.0; 2];
    let mut n = 0;
    let mut push = |r: f64| {
        if r > lo && r < hi && r.is_finite() {
            roots[n] = r;
            n += 1;
        }
    };
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return (roots, 0);
    }
    if a.abs() <= 1e-12 * scale {
        if b != 0.0 {
            push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let s = disc.sqrt();
            // Numerically stable quadratic roots.
            let q = -0.5 * (b + s.copysign(b));
            let (r0, r1) = if q != 0.0 { (q / a, c / q) } else { (0.0, 0.0) };
            let (r0, r1) = if r0 <= r1 { (r0, r1) } else { (r1, r0) };
            push(r0);
            if r1 != r0 {
                push(r1);
            }
        }
    }
    (roots, n)
}

/// Smallest `t` in `[t_entry, t_exit]` where the trilinear interpolant of
/// `corners` vanishes along the ray.
///
/// The interval is split at the critical points of the cubic `f(t)`, so each
/// piece is monotone and holds at most one root. The first piece whose ends
/// differ in sign is solved by Newton iteration started at its entry,
/// falling back to bisection whenever a step leaves the bracket. Tangential
/// touches that do not change sign are not reported.
pub fn intersect_voxel_newton(corners: &[f64; 8], ray: &LocalRay, t_entry: f64, t_exit: f64) -> Option<f64> {
    if t_entry.is_nan() || t_exit.is_nan() || t_entry > t_exit {
        return None;
    }
    let (lo_c, hi_c) = corners
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo_c > 0.0 || hi_c < 0.0 {
        return None;
    }
    let f = |t: f64| trilinear(corners, ray.at(t));
    let df = |t: f64| {
        let g = trilinear_gradient(corners, ray.at(t));
        g[0] * ray.dir[0] + g[1] * ray.dir[1] + g[2] * ray.dir[2]
    };

    let poly = cubic_along_ray(corners, ray);
    let (crit, n_crit) = critical_points(&poly, t_entry, t_exit);
    let mut bounds = [t_entry, 0.0, 0.0, t_exit];
    bounds[1..=n_crit].copy_from_slice(&crit[..n_crit]);
    bounds[n_crit + 1] = t_exit;
    let bounds = &bounds[..n_crit + 2];

    let mut fa = f(t_entry);
    if fa == 0.0 {
        return Some(t_entry);
    }
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fb = f(b);
        if fb == 0.0 {
            return Some(b);
        }
        if (fa < 0.0) != (fb < 0.0) {
            return Some(newton_bracketed(&f, &df, a, b, fa));
        }
        fa = fb;
    }
    None
}

fn newton_bracketed(f: &impl Fn(f64) -> f64, df: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64) -> f64 {
    let neg_at_lo = fa < 0.0;
    let (mut lo, mut hi) = (a, b);
    let mut t = a;
    let mut best = (fa.abs(), a);
    for _ in 0..NEWTON_MAX_ITERS {
        let ft = f(t);
        if ft.abs() < best.0 {
            best = (ft.abs(), t);
        }
        if ft.abs() < NEWTON_TOLERANCE {
            return t;
        }
        if (ft < 0.0) == neg_at_lo {
            lo = t;
        } else {
            hi = t;
        }
        let d = df(t);
        let mut next = t - ft / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if next == t || hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        t = next;
    }
    let ft = f(t);
    if ft.abs() < best.0 {
        t
    } else {
        best.1
    }
}

/// Unit normal from the interpolant gradient, mapped from a cell of `size`
/// back to object space. Falls back to facing the ray.
pub(crate) fn gradient_normal(corners: &[f64; 8], local: [f64; 3], size: [f64; 3], ray_dir: Vec3) -> Vec3 {
    let g = trilinear_gradient(corners, local);
    let n = Vec3::new((g[0] / size[0]) as f32, (g[1] / size[1]) as f32, (g[2] / size[2]) as f32);
    if n.length() > 0.0 && n.is_finite() {
        n.normalize()
    } else {
        -ray_dir.normalize()
    }
}

/// A hit inside an SDF cell: ray parameter plus the octahedral normal.
pub(crate) fn sdf_hit(t: f64, normal: Vec3) -> crate::scene::PrimHit {
    crate::scene::PrimHit {
        t: t as f32,
        coords: oct_encode(normal),
    }
}

#[inline]
pub(crate) fn ray64(ray: &Ray) -> ([f64; 3], [f64; 3]) {
    (
        [ray.origin.x.into(), ray.origin.y.into(), ray.origin.z.into()],
        [ray.dir.x.into(), ray.dir.y.into(), ray.dir.z.into()],
    )
}

/// True when the 8 values straddle the surface: at least one is negative
/// and at least one is non-negative.
#[inline]
pub fn crosses_surface(values: &[f32]) -> bool {
    values.iter().any(|&v| v < 0.0) && values.iter().any(|&v| v >= 0.0)
}

/// Regular sample grid over a box, walked cell by cell with a 3D DDA.
pub(crate) struct CellGrid<'a> {
    /// Samples, x fastest.
    pub values: &'a [f32],
    /// Sample counts per axis (cells + 1).
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub cell: [f64; 3],
}

/// Root found by a cell walk.
pub(crate) struct CellHit {
    pub t: f64,
    pub normal: Vec3,
}

impl CellGrid<'_> {
    #[inline]
    fn corners(&self, i: [usize; 3]) -> [f64; 8] {
        let [nx, ny, _] = self.dims;
        let mut c = [0.0; 8];
        for (k, v) in c.iter_mut().enumerate() {
            let (x, y, z) = (i[0] + (k & 1), i[1] + (k >> 1 & 1), i[2] + (k >> 2 & 1));
            *v = f64::from(self.values[x + nx * (y + ny * z)]);
        }
        c
    }

    fn cell_min(&self, i: [usize; 3]) -> [f64; 3] {
        [
            self.origin[0] + i[0] as f64 * self.cell[0],
            self.origin[1] + i[1] as f64 * self.cell[1],
            self.origin[2] + i[2] as f64 * self.cell[2],
        ]
    }

    /// Cell containing `p` (clamped to the grid).
    pub fn locate(&self, p: [f64; 3]) -> ([usize; 3], [f64; 3]) {
        let mut idx = [0usize; 3];
        let mut local = [0.0; 3];
        for k in 0..3 {
            let u = (p[k] - self.origin[k]) / self.cell[k];
            let i = (u.floor().max(0.0) as usize).min(self.dims[k] - 2);
            idx[k] = i;
            local[k] = u - i as f64;
        }
        (idx, local)
    }

    /// Interpolated value at object-space point `p`.
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let (i, local) = self.locate(p);
        trilinear(&self.corners(i), local)
    }

    /// First root along the ray within `[t_min, t_max]`, visiting cells in ray order.
    pub fn march(&self, origin: [f64; 3], dir: [f64; 3], t_min: f64, t_max: f64, ray_dir: Vec3) -> Option<CellHit> {
        let extent = [
            self.cell[0] * (self.dims[0] - 1) as f64,
            self.cell[1] * (self.dims[1] - 1) as f64,
            self.cell[2] * (self.dims[2] - 1) as f64,
        ];
        let whole = LocalRay::into_cell(origin, dir, self.origin, extent);
        let (t_start, t_end) = whole.clip_unit(t_min, t_max)?;

        let entry = [
            origin[0] + t_start * dir[0],
            origin[1] + t_start * dir[1],
            origin[2] + t_start * dir[2],
        ];
        let (mut idx, _) = self.locate(entry);
        let mut step = [0i64; 3];
        let mut t_next = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for k in 0..3 {
            if dir[k] > 0.0 {
                step[k] = 1;
                let boundary = self.origin[k] + (idx[k] + 1) as f64 * self.cell[k];
                t_next[k] = (boundary - origin[k]) / dir[k];
                t_delta[k] = self.cell[k] / dir[k];
            } else if dir[k] < 0.0 {
                step[k] = -1;
                let boundary = self.origin[k] + idx[k] as f64 * self.cell[k];
                t_next[k] = (boundary - origin[k]) / dir[k];
                t_delta[k] = -self.cell[k] / dir[k];
            }
        }

        let mut t_cur = t_start;
        loop {
            let axis = if t_next[0] <= t_next[1] && t_next[0] <= t_next[2] {
                0
            } else if t_next[1] <= t_next[2] {
                1
            } else {
                2
            };
            let t_exit = t_next[axis].min(t_end).max(t_cur);
            let corners = self.corners(idx);
            let min = self.cell_min(idx);
            let local = LocalRay::into_cell(origin, dir, min, self.cell);
            if let Some(t) = intersect_voxel_newton(&corners, &local, t_cur, t_exit) {
                let normal = gradient_normal(&corners, local.at(t), self.cell, ray_dir);
                return Some(CellHit { t, normal });
            }
            if t_exit >= t_end {
                return None;
            }
            let next = idx[axis] as i64 + step[axis];
            if next < 0 || next > self.dims[axis] as i64 - 2 {
                return None;
            }
            idx[axis] = next as usize;
            t_cur = t_exit;
            t_next[axis] += t_delta[axis];
        }
    }
}

/// Samples of a dense grid at the vertices of a `2^depth` lattice over the
/// unit cube, x fastest.
pub(crate) struct LatticeSamples {
    pub cells: usize,
    pub values: Vec<f32>,
}

impl LatticeSamples {
    pub fn from_grid(exec: Exec, grid: &SdfGrid, depth: u32) -> Self {
        let cells = 1usize << depth;
        let n = cells + 1;
        let values = parallel::parallel_map(exec, n * n * n, |i| {
            let (x, y, z) = (i % n, i / n % n, i / (n * n));
            grid.sample_lattice([x, y, z], cells)
        });
        Self { cells, values }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f32 {
        let n = self.cells + 1;
        self.values[x + n * (y + n * z)]
    }

    /// Corner values of the cell spanning `[base, base + span]` in lattice units.
    pub fn corners(&self, base: [usize; 3], span: usize) -> [f32; 8] {
        std::array::from_fn(|k| {
            self.at(
                base[0] + (k & 1) * span,
                base[1] + (k >> 1 & 1) * span,
                base[2] + (k >> 2 & 1) * span,
            )
        })
    }
}
