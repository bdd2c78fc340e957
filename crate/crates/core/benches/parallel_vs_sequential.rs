use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crossrt::lbvh::{build_from_boxes, BuildOptions};
use crossrt::math::{Mat4, Vec3};
use crossrt::parallel::{self, MortonPair};
use crossrt::render::{render_megakernel, render_wavefront, Camera, Material, RenderConfig, RenderScene};
use crossrt::scene::{DispatchLevel, Geometry};
use crossrt::{procedural, Exec, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn primitives(c: &mut Criterion) {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let pairs: Vec<MortonPair> = (0..243_000).map(|i| MortonPair::new(r.gen_range(0..1 << 30), i)).collect();
    let values: Vec<u32> = (0..1 << 20).map(|_| r.gen_range(0..4)).collect();

    let mut g = c.benchmark_group("bitonic_sort_243k");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut keys: Vec<u64> = pairs.iter().map(|p| p.packed()).collect();
                parallel::bitonic_sort_keys(exec, &mut keys);
                keys
            })
        });
    }
    g.finish();

    let mut g = c.benchmark_group("exclusive_scan_1m");
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| parallel::exclusive_scan(exec, &values)));
    }
    g.finish();
}

fn lbvh_build(c: &mut Criterion) {
    let mesh = procedural::bumpy_sphere(25_000, 1.0);
    let boxes = mesh.view().prim_bounds();
    let mut g = c.benchmark_group("lbvh_build");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, boxes.len()), &boxes, |b, boxes| {
            b.iter(|| build_from_boxes(boxes, BuildOptions::new(exec)).unwrap())
        });
    }
    g.finish();
}

fn render(c: &mut Criterion) {
    let mut s = Scene::new();
    let room = s.add_geometry(Geometry::Triangles(procedural::cube_room(2.0))).unwrap();
    let ball = s.add_geometry(Geometry::Triangles(procedural::uv_sphere(Vec3::ZERO, 1.0, 16, 32))).unwrap();
    s.add_instance(room, Mat4::IDENTITY).unwrap();
    s.add_instance(ball, Mat4::translation(Vec3::new(0.0, -1.0, 0.0))).unwrap();
    s.add_instance(ball, Mat4::translation(Vec3::new(0.0, 1.8, 0.0)).mul(&Mat4::scale(Vec3::splat(0.3)))).unwrap();
    let materials = vec![
        Material::lambert([0.7; 3]),
        Material::mirror([0.9; 3]),
        Material::emissive([6.0; 3]),
    ];
    let scene = RenderScene::new(Some(s.commit(DispatchLevel::Two).unwrap()), materials, [0.0; 3]).unwrap();
    let camera =
        Camera::look_at(Vec3::new(0.0, 0.0, 1.9), Vec3::new(0.0, -0.5, 0.0), Vec3::new(0.0, 1.0, 0.0), 70.0, 64, 64)
            .unwrap();

    let mut g = c.benchmark_group("render_64x64_4spp");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = RenderConfig { spp: 4, max_bounces: 4, seed: 0, exec };
        g.bench_function(format!("megakernel/{name}"), |b| b.iter(|| render_megakernel(&scene, &camera, &cfg).unwrap()));
        g.bench_function(format!("wavefront/{name}"), |b| b.iter(|| render_wavefront(&scene, &camera, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, primitives, lbvh_build, render);
criterion_main!(benches);
