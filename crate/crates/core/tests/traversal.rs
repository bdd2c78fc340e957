mod common;

use crossrt::lbvh::{BvhNode, LbvhTree};
use crossrt::math::{Aabb, Mat4, Ray, Vec3};
use crossrt::procedural;
use crossrt::scene::{DispatchLevel, Geometry, GeometryType};
use crossrt::traversal::{self, slab_hit, Step, Visit, MAX_STACK_DEPTH};
use crossrt::{Error, Scene};

#[test]
fn visited_nodes_are_slab_positive() {
    let scene = common::instanced_spheres(DispatchLevel::Two);
    let rays = common::random_rays(&scene.bounds(), 300, 5);
    for ray in &rays {
        let mut visits: Vec<Visit> = Vec::new();
        let hit = scene.ray_query_nearest_hit_observed(ray, &mut |v| visits.push(v)).unwrap();
        assert_eq!(hit, scene.ray_query_nearest_hit(ray).unwrap());
        for v in visits {
            match v.inst_id {
                None => assert!(slab_hit(&scene.tlas().nodes[v.node as usize].bounds, ray)),
                Some(i) => {
                    let inst = &scene.instances()[i as usize];
                    let tree = &scene.records()[inst.geom_id as usize].bvh;
                    assert!(slab_hit(&tree.nodes[v.node as usize].bounds, &inst.object_ray(ray)));
                }
            }
        }
    }
}

#[test]
fn any_hit_agrees_with_nearest_hit() {
    let scene = common::mixed_scene(DispatchLevel::Two).unwrap();
    for ray in common::random_rays(&scene.bounds(), 2000, 6) {
        let nearest = scene.ray_query_nearest_hit(&ray).unwrap();
        assert_eq!(scene.ray_query_any_hit(&ray).unwrap(), !nearest.is_miss(), "{ray:?}");
    }
}

#[test]
fn mixed_scene_matches_brute_force() {
    let scene = common::mixed_scene(DispatchLevel::One).unwrap();
    let tol = 1e-6 * scene.bounds().diagonal();
    for ray in common::random_rays(&scene.bounds(), 1000, 7) {
        let got = scene.ray_query_nearest_hit(&ray).unwrap();
        let want = common::brute_force(&scene, &ray);
        assert_eq!((got.prim_id, got.geom_id, got.inst_id), (want.prim_id, want.geom_id, want.inst_id));
        assert!(got.is_miss() || (got.t - want.t).abs() <= tol);
    }
}

#[test]
fn equal_t_prefers_lower_instance() {
    let mut s = Scene::new();
    let g = s.add_geometry(Geometry::Triangles(procedural::uv_sphere(Vec3::ZERO, 1.0, 8, 16))).unwrap();
    s.add_instance(g, Mat4::IDENTITY).unwrap();
    s.add_instance(g, Mat4::IDENTITY).unwrap();
    let scene = s.commit(DispatchLevel::Two).unwrap();
    let ray = Ray::new(Vec3::new(0.1, 0.2, -5.0), Vec3::new(0.0, 0.0, 1.0), 0.0, f32::INFINITY);
    let hit = scene.ray_query_nearest_hit(&ray).unwrap();
    assert_eq!(hit.inst_id, 0);
}

#[test]
fn interval_is_respected() {
    let scene = common::single_mesh(procedural::uv_sphere(Vec3::ZERO, 1.0, 16, 32), DispatchLevel::Zero);
    let ray = Ray::new(Vec3::new(0.0, 0.0, -5.0), Vec3::new(0.0, 0.0, 1.0), 0.0, 3.9);
    assert!(scene.ray_query_nearest_hit(&ray).unwrap().is_miss());
    assert!(!scene.ray_query_any_hit(&ray).unwrap());
    let inside = Ray { t_near: 4.5, t_far: 100.0, ..ray };
    let far = scene.ray_query_nearest_hit(&inside).unwrap();
    assert!((far.t - 6.0).abs() < 1e-2, "{}", far.t);
}

#[test]
fn deep_malformed_tree_overflows_the_stack() {
    let k = 100u32;
    let unit = Aabb::unit();
    let mut nodes = Vec::new();
    for i in 0..k {
        let next = if i + 1 < k { i + 1 } else { 2 * k };
        nodes.push(BvhNode { bounds: unit, left: next, right: k + i, first_prim: 0, prim_count: 0 });
    }
    for i in 0..=k {
        nodes.push(BvhNode::leaf(unit, i, 1));
    }
    let tree = LbvhTree {
        nodes,
        prim_indices: (0..=k).collect(),
        leaf_keys: (0..=u64::from(k)).collect(),
        refit_passes: 0,
    };
    let ray = Ray::new(Vec3::new(0.5, 0.5, -1.0), Vec3::new(0.0, 0.0, 1.0), 0.0, 10.0);
    let r = traversal::walk(&tree, &ray, ray.t_far, &mut |_| {}, |_, _, t| Ok(Step::Continue(t)));
    assert!(matches!(r, Err(Error::StackOverflow(d)) if d == MAX_STACK_DEPTH));
}

#[test]
fn regions_are_a_bijection() {
    let scene = common::mixed_scene(DispatchLevel::Two).unwrap();
    let mut seen = Vec::new();
    for tag in GeometryType::ALL {
        for (local, &geom) in scene.region_members(tag).iter().enumerate() {
            assert_eq!(scene.region_of(geom), Some((tag, local as u32)));
            seen.push(geom);
        }
    }
    seen.sort_unstable();
    assert_eq!(seen, (0..scene.records().len() as u32).collect::<Vec<_>>());
}

#[test]
fn second_commit_is_an_error() {
    let mut s = Scene::new();
    let g = s.add_geometry(Geometry::Triangles(procedural::cube_room(1.0))).unwrap();
    s.add_instance(g, Mat4::IDENTITY).unwrap();
    s.commit(DispatchLevel::Two).unwrap();
    assert!(matches!(s.commit(DispatchLevel::Two), Err(Error::SceneAlreadyCommitted)));
}

#[test]
fn level_zero_rejects_mixed_types() {
    assert!(common::mixed_scene(DispatchLevel::Zero).is_err());
}
