//! Build and trace timings for triangle scenes, written as CSV.

use std::io::Write;
use std::time::Instant;

use crate::error::Result;
use crate::math::{Mat4, Ray, Vec3};
use crate::parallel::{self, Exec};
use crate::render::rng;
use crate::scene::{CommittedScene, DispatchLevel, Geometry, Scene, TriangleMesh};

pub const CSV_HEADER: [&str; 5] = ["scene", "primitives", "buildMs", "traceMs", "raysPerSec"];

#[derive(Clone, Debug)]
pub struct BenchScene {
    pub name: String,
    pub mesh: TriangleMesh,
}

#[derive(Clone, Copy, Debug)]
pub struct BenchConfig {
    pub reps: u32,
    pub rays: u32,
    pub seed: u64,
    pub exec: Exec,
    pub level: DispatchLevel,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            reps: 5,
            rays: 100_000,
            seed: 0,
            exec: Exec::default(),
            level: DispatchLevel::Two,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub scene: String,
    pub primitives: usize,
    pub build_ms: f64,
    pub trace_ms: f64,
    pub rays_per_sec: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn build(mesh: &TriangleMesh, cfg: &BenchConfig) -> Result<CommittedScene> {
    let mut s = Scene::new();
    let g = s.add_geometry(Geometry::Triangles(mesh.clone()))?;
    s.add_instance(g, Mat4::IDENTITY)?;
    s.commit_with(cfg.level, cfg.exec)
}

/// Rays from points on a sphere around `scene` toward random interior points.
pub fn random_rays(scene: &CommittedScene, n: u32, seed: u64) -> Vec<Ray> {
    let b = scene.bounds();
    let c = b.centroid();
    let r = 0.5 * b.diagonal().max(1e-3);
    let key = rng::path_key(seed, 0x42, 0);
    (0..n)
        .map(|i| {
            let u = |d: u32| rng::draw(key, i, d);
            let z = 2.0 * u(0) - 1.0;
            let phi = 2.0 * std::f32::consts::PI * u(1);
            let s = (1.0 - z * z).max(0.0).sqrt();
            let origin = c + Vec3::new(s * phi.cos(), s * phi.sin(), z) * (2.0 * r);
            let target = b.min + b.extent().mul_elem(Vec3::new(u(2), u(3), u(4)));
            let mut dir = target - origin;
            if dir.length() == 0.0 {
                dir = Vec3::new(0.0, 0.0, 1.0);
            }
            Ray::new(origin, dir.normalize(), 0.0, f32::INFINITY)
        })
        .collect()
}

/// Median-of-`reps` build and trace timings per scene.
pub fn run_bench(scenes: &[BenchScene], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let reps = cfg.reps.max(1);
    let mut rows = Vec::with_capacity(scenes.len());
    for sc in scenes {
        let mut build_ms = Vec::new();
        let mut trace_ms = Vec::new();
        for _ in 0..reps {
            let t0 = Instant::now();
            let committed = build(&sc.mesh, cfg)?;
            build_ms.push(t0.elapsed().as_secs_f64() * 1e3);
            let rays = random_rays(&committed, cfg.rays, cfg.seed);
            let t1 = Instant::now();
            let hits = parallel::parallel_map(cfg.exec, rays.len(), |i| committed.ray_query_nearest_hit(&rays[i]));
            trace_ms.push(t1.elapsed().as_secs_f64() * 1e3);
            hits.into_iter().collect::<Result<Vec<_>>>()?;
        }
        let trace = median(trace_ms);
        rows.push(BenchRow {
            scene: sc.name.clone(),
            primitives: sc.mesh.triangle_count(),
            build_ms: median(build_ms),
            trace_ms: trace,
            rays_per_sec: if trace > 0.0 { f64::from(cfg.rays) / (trace * 1e-3) } else { 0.0 },
        });
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            r.scene.clone(),
            r.primitives.to_string(),
            format!("{:.4}", r.build_ms),
            format!("{:.4}", r.trace_ms),
            format!("{:.1}", r.rays_per_sec),
        ])?;
    }
    out.flush()?;
    Ok(())
}
