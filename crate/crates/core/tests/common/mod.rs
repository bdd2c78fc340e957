#![allow(dead_code)]

use crossrt::math::{Aabb, Mat4, Ray, Vec3};
use crossrt::procedural;
use crossrt::relu::rf_build;
use crossrt::scene::{DispatchLevel, Geometry, Hit};
use crossrt::sdf::{sbs_from_grid, svs_from_grid, FrameOctree, FrameOctreeParams, SdfGrid};
use crossrt::{CommittedScene, Exec, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_box(r: &mut ChaCha8Rng, extent: f32, max_size: f32) -> Aabb {
    let c = Vec3::new(
        r.gen_range(-extent..extent),
        r.gen_range(-extent..extent),
        r.gen_range(-extent..extent),
    );
    let h = Vec3::new(
        r.gen_range(0.0..max_size),
        r.gen_range(0.0..max_size),
        r.gen_range(0.0..max_size),
    );
    Aabb::new(c - h, c + h)
}

/// Random rays against `bounds`: most start outside and aim inside, some start
/// inside, some run along coordinate axes or planes, a few have short intervals.
pub fn random_rays(bounds: &Aabb, n: usize, seed: u64) -> Vec<Ray> {
    let mut r = rng(seed);
    let c = bounds.centroid();
    let ext = bounds.extent();
    let radius = bounds.diagonal();
    let inside = |r: &mut ChaCha8Rng| {
        bounds.min + ext.mul_elem(Vec3::new(r.gen::<f32>(), r.gen::<f32>(), r.gen::<f32>()))
    };
    (0..n)
        .map(|i| {
            let target = inside(&mut r);
            let (origin, mut dir) = match i % 10 {
                0..=5 => {
                    let d = Vec3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
                    let o = c + d.normalize() * radius;
                    (o, target - o)
                }
                6 | 7 => {
                    let o = inside(&mut r);
                    (o, Vec3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                }
                _ => {
                    let axis = r.gen_range(0..3);
                    let mut d = [0.0f32; 3];
                    d[axis] = if r.gen::<bool>() { 1.0 } else { -1.0 };
                    if i % 10 == 9 {
                        d[(axis + 1) % 3] = r.gen_range(-1.0..1.0);
                    }
                    let d = Vec3::from_array(d);
                    (target - d * radius, d)
                }
            };
            if dir.length() == 0.0 {
                dir = Vec3::new(0.0, 0.0, 1.0);
            }
            let t_far = if i % 17 == 0 { radius * r.gen_range(0.2..1.2) } else { f32::INFINITY };
            Ray::new(origin, dir.normalize(), 0.0, t_far)
        })
        .collect()
}

/// Nearest hit by testing every primitive of every instance.
pub fn brute_force(scene: &CommittedScene, ray: &Ray) -> Hit {
    let mut best = Hit::miss(ray.t_far);
    for (inst_id, inst) in scene.instances().iter().enumerate() {
        for prim in 0..scene.prim_count(inst.geom_id) {
            scene.intersect_primitive(inst_id as u32, prim as u32, ray, &mut best);
        }
    }
    best
}

pub fn single_mesh(mesh: crossrt::scene::TriangleMesh, level: DispatchLevel) -> CommittedScene {
    let mut s = Scene::new();
    let g = s.add_geometry(Geometry::Triangles(mesh)).unwrap();
    s.add_instance(g, Mat4::IDENTITY).unwrap();
    s.commit(level).unwrap()
}

/// Several transformed instances of one sphere mesh inside a room.
pub fn instanced_spheres(level: DispatchLevel) -> CommittedScene {
    let mut s = Scene::new();
    let sphere = s.add_geometry(Geometry::Triangles(procedural::uv_sphere(Vec3::ZERO, 1.0, 24, 48))).unwrap();
    let room = s.add_geometry(Geometry::Triangles(procedural::cube_room(4.0))).unwrap();
    s.add_instance(room, Mat4::IDENTITY).unwrap();
    let placements = [
        Mat4::translation(Vec3::new(-1.5, -1.0, 0.0)),
        Mat4::translation(Vec3::new(1.5, 0.5, -1.0)).mul(&Mat4::scale(Vec3::new(0.7, 1.3, 0.9))),
        Mat4::translation(Vec3::new(0.0, 1.5, 1.5)).mul(&Mat4::rotation_y(0.7)).mul(&Mat4::scale(Vec3::splat(0.5))),
        Mat4::translation(Vec3::new(0.3, -0.2, 0.4)).mul(&Mat4::rotation_y(-1.2)),
    ];
    for m in placements {
        s.add_instance(sphere, m).unwrap();
    }
    s.commit(level).unwrap()
}

/// Unit-cube sphere SDF sampled on `cells^3` cells.
pub fn sphere_grid(cells: u32) -> SdfGrid {
    procedural::sphere_sdf([cells + 1; 3], Vec3::splat(0.5), 0.3)
}

/// One geometry of every type, instanced side by side with some overlap.
pub fn mixed_scene(level: DispatchLevel) -> crossrt::Result<CommittedScene> {
    let grid = sphere_grid(16);
    let mut s = Scene::new();
    let tri = s.add_geometry(Geometry::Triangles(procedural::uv_sphere(Vec3::splat(0.5), 0.4, 8, 16)))?;
    let g = s.add_geometry(Geometry::SdfGrid(grid.clone()))?;
    let oct = s.add_geometry(Geometry::SdfFrameOctree(FrameOctree::from_grid(
        Exec::Sequential,
        &grid,
        FrameOctreeParams { max_depth: 4, tolerance: 1e-3 },
    )?))?;
    let svs = s.add_geometry(Geometry::SdfSvs(svs_from_grid(Exec::Sequential, &grid, 4)?))?;
    let sbs = s.add_geometry(Geometry::SdfSbs(sbs_from_grid(Exec::Sequential, &grid, 2, 4)?))?;
    let field = procedural::random_field(3, [4, 4, 4], 0.5, 2.0);
    let rf = s.add_geometry(Geometry::RfGrid(rf_build(Exec::Sequential, &field, field.threshold)?))?;
    let order = [svs, tri, rf, g, sbs, oct, tri, svs];
    for (k, &geom) in order.iter().enumerate() {
        let x = k as f32 * 0.8;
        let m = if geom == rf {
            Mat4::translation(Vec3::new(x, 0.0, 0.0)).mul(&Mat4::scale(Vec3::splat(0.25)))
        } else {
            Mat4::translation(Vec3::new(x, (k % 2) as f32 * 0.3, 0.0))
        };
        s.add_instance(geom, m)?;
    }
    s.commit(level)
}
