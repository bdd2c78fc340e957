//! Procedural test geometry.

use crate::math::Vec3;
use crate::render::rng;
use crate::scene::TriangleMesh;
use crate::sdf::SdfGrid;
use crate::relu::RfGrid;

/// Latitude/longitude sphere with `2 * slices * (stacks - 1)` triangles.
pub fn uv_sphere(center: Vec3, radius: f32, stacks: u32, slices: u32) -> TriangleMesh {
    let stacks = stacks.max(2);
    let slices = slices.max(3);
    let mut positions = Vec::new();
    for i in 0..=stacks {
        let theta = std::f32::consts::PI * i as f32 / stacks as f32;
        for j in 0..slices {
            let phi = 2.0 * std::f32::consts::PI * j as f32 / slices as f32;
            let p = center + Vec3::new(theta.sin() * phi.cos(), theta.cos(), theta.sin() * phi.sin()) * radius;
            positions.push(p.to_array());
        }
    }
    let at = |i: u32, j: u32| i * slices + j % slices;
    let mut indices = Vec::new();
    for i in 0..stacks {
        for j in 0..slices {
            let (a, b, c, d) = (at(i, j), at(i, j + 1), at(i + 1, j), at(i + 1, j + 1));
            if i != 0 {
                indices.push([a, b, c]);
            }
            if i != stacks - 1 {
                indices.push([b, d, c]);
            }
        }
    }
    TriangleMesh { positions, indices }
}

/// Closed axis-aligned box `[-half, half]^3` made of 12 triangles.
pub fn cube_room(half: f32) -> TriangleMesh {
    let h = half;
    let positions = (0..8)
        .map(|k| [if k & 1 == 1 { h } else { -h }, if k & 2 == 2 { h } else { -h }, if k & 4 == 4 { h } else { -h }])
        .collect();
    let quads = [[0, 2, 3, 1], [4, 5, 7, 6], [0, 1, 5, 4], [2, 6, 7, 3], [0, 4, 6, 2], [1, 3, 7, 5]];
    let indices = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
    TriangleMesh { positions, indices }
}

/// `n` random triangles with vertices near random centres in
/// `[-extent, extent]^3`, each about `size` across.
pub fn triangle_soup(seed: u64, n: u32, extent: f32, size: f32) -> TriangleMesh {
    let key = rng::path_key(seed, 0x50_u32, 0);
    let u = |i: u32, d: u32| rng::draw(key, i, d) * 2.0 - 1.0;
    let mut positions = Vec::with_capacity(n as usize * 3);
    for i in 0..n {
        let c = Vec3::new(u(i, 0), u(i, 1), u(i, 2)) * extent;
        for v in 0..3 {
            let off = Vec3::new(u(i, 3 + 3 * v), u(i, 4 + 3 * v), u(i, 5 + 3 * v)) * size;
            positions.push((c + off).to_array());
        }
    }
    let indices = (0..n).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect();
    TriangleMesh { positions, indices }
}

/// Bumpy closed surface of roughly `target` triangles: a sphere with a
/// smooth radial displacement, used where a detailed mesh is needed.
pub fn bumpy_sphere(target: u32, radius: f32) -> TriangleMesh {
    let slices = ((target as f32 / 2.0).sqrt() * 1.414).round().max(4.0) as u32;
    let stacks = (target / (2 * slices)).max(3) + 1;
    let mut m = uv_sphere(Vec3::ZERO, radius, stacks, slices);
    for p in &mut m.positions {
        let v = Vec3::from_array(*p);
        let bump = 1.0 + 0.1 * (5.0 * v.x / radius).sin() * (7.0 * v.y / radius).cos() * (3.0 * v.z / radius).sin();
        *p = (v * bump).to_array();
    }
    m
}

/// Exact signed distance to a sphere sampled on a `dims` vertex grid.
pub fn sphere_sdf(dims: [u32; 3], center: Vec3, radius: f32) -> SdfGrid {
    SdfGrid::sphere(dims, center, radius).expect("positive dims")
}

/// Random radiance field: each cell occupied with probability `fill`,
/// densities up to `max_sigma`.
pub fn random_field(seed: u64, dims: [u32; 3], fill: f32, max_sigma: f32) -> RfGrid {
    let n = dims.iter().product::<u32>();
    let key = rng::path_key(seed, 0x52_u32, 0);
    let cells = (0..n)
        .map(|i| {
            let occupied = rng::draw(key, i, 0) < fill;
            let sigma = if occupied { rng::draw(key, i, 1) * max_sigma } else { 0.0 };
            [sigma, rng::draw(key, i, 2), rng::draw(key, i, 3), rng::draw(key, i, 4)]
        })
        .collect();
    RfGrid {
        dims,
        threshold: 0.0,
        cells,
    }
}
