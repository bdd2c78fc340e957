//! Deterministic path tracer with two schedulers.
//!
//! [`render_megakernel`] runs each pixel's paths to completion inside one
//! parallel body. [`render_wavefront`] keeps an array of [`RayState`]
//! records and advances them in separate passes (generate, extend, shade,
//! compact) with a barrier between passes. Both call the same `generate`
//! and `shade` steps and draw random numbers from a counter-based hash of
//! `(seed, pixel, sample, bounce, dimension)`, so their images are
//! bit-identical.

mod camera;
mod image;
pub mod rng;

pub use camera::Camera;
pub use image::{psnr, Image};

use crate::error::{Error, Result};
use crate::math::{Ray, Vec3};
use crate::parallel::{self, Exec};
use crate::scene::{CommittedScene, Hit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaterialKind {
    Lambert,
    Mirror,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material {
    pub kind: MaterialKind,
    pub albedo: [f32; 3],
    pub emission: [f32; 3],
}

impl Material {
    pub fn lambert(albedo: [f32; 3]) -> Self {
        Self {
            kind: MaterialKind::Lambert,
            albedo,
            emission: [0.0; 3],
        }
    }

    pub fn mirror(albedo: [f32; 3]) -> Self {
        Self {
            kind: MaterialKind::Mirror,
            albedo,
            emission: [0.0; 3],
        }
    }

    pub fn emissive(emission: [f32; 3]) -> Self {
        Self {
            kind: MaterialKind::Lambert,
            albedo: [0.0; 3],
            emission,
        }
    }

    pub fn with_emission(self, emission: [f32; 3]) -> Self {
        Self { emission, ..self }
    }

    fn validate(&self) -> Result<()> {
        let albedo_ok = self.albedo.iter().all(|a| (0.0..=1.0).contains(a));
        let emission_ok = self.emission.iter().all(|e| e.is_finite() && *e >= 0.0);
        if albedo_ok && emission_ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("material {self:?} out of range")))
        }
    }
}

/// A committed scene plus one material per instance. `scene` may be absent,
/// in which case every ray sees the background.
#[derive(Debug)]
pub struct RenderScene {
    pub scene: Option<CommittedScene>,
    pub materials: Vec<Material>,
    pub background: [f32; 3],
}

impl RenderScene {
    pub fn new(scene: Option<CommittedScene>, materials: Vec<Material>, background: [f32; 3]) -> Result<Self> {
        let instances = scene.as_ref().map_or(0, |s| s.instances().len());
        if materials.len() != instances {
            return Err(Error::InvalidConfig(format!(
                "{} materials for {instances} instances",
                materials.len()
            )));
        }
        for m in &materials {
            m.validate()?;
        }
        Ok(Self {
            scene,
            materials,
            background,
        })
    }

    fn trace(&self, ray: &Ray) -> Hit {
        match &self.scene {
            // Rays are validated at generation and after every bounce.
            Some(s) => s.ray_query_nearest_hit(ray).unwrap_or_else(|_| Hit::miss(ray.t_far)),
            None => Hit::miss(ray.t_far),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderConfig {
    pub spp: u32,
    /// Path segments per sample; 1 means primary hits only.
    pub max_bounces: u32,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            spp: 1,
            max_bounces: 4,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl RenderConfig {
    fn validate(&self) -> Result<()> {
        if self.spp == 0 {
            return Err(Error::InvalidConfig("spp must be at least 1".into()));
        }
        if self.max_bounces == 0 {
            return Err(Error::InvalidConfig("max_bounces must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-path record carried between wavefront passes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RayState {
    pub pixel: u32,
    pub sample: u32,
    pub ray: Ray,
    pub throughput: [f32; 3],
    pub accumulated: [f32; 3],
    pub bounce: u32,
    pub rng_key: u64,
    pub alive: bool,
}

fn generate(camera: &Camera, cfg: &RenderConfig, pixel: u32, sample: u32) -> RayState {
    let key = rng::path_key(cfg.seed, pixel, sample);
    let (x, y) = (pixel % camera.width, pixel / camera.width);
    let jitter = (rng::draw(key, 0, 0), rng::draw(key, 0, 1));
    RayState {
        pixel,
        sample,
        ray: camera.ray(x, y, jitter),
        throughput: [1.0; 3],
        accumulated: [0.0; 3],
        bounce: 0,
        rng_key: key,
        alive: true,
    }
}

#[inline]
fn mul(a: [f32; 3], b: [f32; 3]) -> [f32; 3] {
    [a[0] * b[0], a[1] * b[1], a[2] * b[2]]
}

#[inline]
fn add(a: [f32; 3], b: [f32; 3]) -> [f32; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Cosine-weighted direction about `n`.
fn sample_cosine(n: Vec3, u1: f32, u2: f32) -> Vec3 {
    let r = u1.sqrt();
    let phi = 2.0 * std::f32::consts::PI * u2;
    let (x, y) = (r * phi.cos(), r * phi.sin());
    let z = (1.0 - u1).max(0.0).sqrt();
    // Branchless orthonormal basis (Duff et al.).
    let sign = 1.0f32.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    let t = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
    let bt = Vec3::new(b, sign + n.y * n.y * a, -n.y);
    (t * x + bt * y + n * z).normalize()
}

/// Consumes one nearest-hit result: adds emission, then either terminates
/// the path or scatters it.
fn shade(scene: &RenderScene, cfg: &RenderConfig, s: &mut RayState, hit: &Hit) {
    if hit.is_miss() {
        s.accumulated = add(s.accumulated, mul(s.throughput, scene.background));
        s.alive = false;
        return;
    }
    let m = &scene.materials[hit.inst_id as usize];
    s.accumulated = add(s.accumulated, mul(s.throughput, m.emission));
    s.bounce += 1;
    if s.bounce >= cfg.max_bounces || m.albedo == [0.0; 3] {
        s.alive = false;
        return;
    }
    let Some(committed) = &scene.scene else {
        s.alive = false;
        return;
    };
    let d = s.ray.dir;
    let mut n = committed.hit_normal(hit);
    if n.dot(d) > 0.0 {
        n = -n;
    }
    let p = s.ray.at(hit.t);
    let dir = match m.kind {
        MaterialKind::Lambert => sample_cosine(n, rng::draw(s.rng_key, s.bounce, 0), rng::draw(s.rng_key, s.bounce, 1)),
        MaterialKind::Mirror => (d - n * (2.0 * d.dot(n))).normalize(),
    };
    let eps = 1e-4 * p.abs().max_elem().max(1.0);
    let next = Ray::new(p + n * eps, dir, 0.0, f32::INFINITY);
    if next.validate().is_err() {
        s.alive = false;
        return;
    }
    s.ray = next;
    s.throughput = mul(s.throughput, m.albedo);
}

fn check(camera: &Camera, cfg: &RenderConfig) -> Result<()> {
    camera.validate()?;
    cfg.validate()
}

/// Sums samples in sample order and divides by the sample count.
fn resolve(samples: impl Iterator<Item = [f32; 3]>, spp: u32) -> [f32; 3] {
    let sum = samples.fold([0.0f32; 3], add);
    sum.map(|c| c / spp as f32)
}

/// One parallel body per pixel, each running all of its paths to the end.
pub fn render_megakernel(scene: &RenderScene, camera: &Camera, cfg: &RenderConfig) -> Result<Image> {
    check(camera, cfg)?;
    let pixels = parallel::parallel_map(cfg.exec, camera.pixel_count(), |p| {
        let radiance = (0..cfg.spp).map(|s| {
            let mut st = generate(camera, cfg, p as u32, s);
            while st.alive {
                let hit = scene.trace(&st.ray);
                shade(scene, cfg, &mut st, &hit);
            }
            st.accumulated
        });
        resolve(radiance, cfg.spp)
    });
    Ok(Image {
        width: camera.width,
        height: camera.height,
        pixels,
    })
}

/// Counters reported by the wavefront scheduler.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WavefrontStats {
    pub extend_passes: u32,
    pub paths: u64,
}

/// Pass-structured rendering over an explicit [`RayState`] array.
pub fn render_wavefront(scene: &RenderScene, camera: &Camera, cfg: &RenderConfig) -> Result<Image> {
    render_wavefront_with_stats(scene, camera, cfg).map(|(img, _)| img)
}

pub fn render_wavefront_with_stats(
    scene: &RenderScene,
    camera: &Camera,
    cfg: &RenderConfig,
) -> Result<(Image, WavefrontStats)> {
    check(camera, cfg)?;
    let exec = cfg.exec;
    let spp = cfg.spp as usize;
    let n_paths = camera.pixel_count() * spp;
    let mut stats = WavefrontStats {
        extend_passes: 0,
        paths: n_paths as u64,
    };

    // generate
    let mut states: Vec<RayState> = parallel::parallel_map(exec, n_paths, |i| {
        generate(camera, cfg, (i / spp) as u32, (i % spp) as u32)
    });
    // Finished radiance per (pixel, sample), written once when a path dies.
    let mut radiance = vec![[0.0f32; 3]; n_paths];
    let mut hits = Vec::new();

    while !states.is_empty() {
        // extend
        hits = parallel::parallel_map(exec, states.len(), |i| scene.trace(&states[i].ray));
        stats.extend_passes += 1;
        // shade
        let hits_ref = &hits;
        parallel::parallel_for(exec, &mut states, |i, s| shade(scene, cfg, s, &hits_ref[i]));
        for s in states.iter().filter(|s| !s.alive) {
            radiance[s.pixel as usize * spp + s.sample as usize] = s.accumulated;
        }
        // compact
        states = parallel::compact(exec, &states, |s| s.alive);
    }
    drop(hits);

    let pixels = parallel::parallel_map(exec, camera.pixel_count(), |p| {
        resolve(radiance[p * spp..(p + 1) * spp].iter().copied(), cfg.spp)
    });
    Ok((
        Image {
            width: camera.width,
            height: camera.height,
            pixels,
        },
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Mat4;
    use crate::procedural;
    use crate::scene::{DispatchLevel, Geometry, Scene};

    fn camera(w: u32, h: u32) -> Camera {
        Camera::look_at(Vec3::new(0.0, 0.0, 3.0), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 40.0, w, h).unwrap()
    }

    fn single(mesh: Geometry, m: Material, bg: [f32; 3]) -> RenderScene {
        let mut s = Scene::new();
        let g = s.add_geometry(mesh).unwrap();
        s.add_instance(g, Mat4::IDENTITY).unwrap();
        RenderScene::new(Some(s.commit(DispatchLevel::Two).unwrap()), vec![m], bg).unwrap()
    }

    #[test]
    fn empty_scene_shows_background() {
        let scene = RenderScene::new(None, vec![], [0.2, 0.3, 0.4]).unwrap();
        let cfg = RenderConfig::default();
        let img = render_megakernel(&scene, &camera(8, 6), &cfg).unwrap();
        assert!(img.pixels.iter().all(|p| *p == [0.2, 0.3, 0.4]));
        let (w, stats) = render_wavefront_with_stats(&scene, &camera(8, 6), &cfg).unwrap();
        assert!(w.bit_eq(&img));
        assert_eq!(stats.extend_passes, 1);
    }

    #[test]
    fn emission_only_single_bounce() {
        let sphere = Geometry::Triangles(procedural::uv_sphere(Vec3::ZERO, 0.8, 24, 48));
        let scene = single(sphere, Material::emissive([0.7, 0.5, 0.25]), [0.0; 3]);
        let cfg = RenderConfig {
            max_bounces: 1,
            ..RenderConfig::default()
        };
        let cam = camera(16, 16);
        let img = render_megakernel(&scene, &cam, &cfg).unwrap();
        for (p, px) in img.pixels.iter().enumerate() {
            let st = generate(&cam, &cfg, p as u32, 0);
            let hit = scene.trace(&st.ray);
            let expect = if hit.is_miss() { [0.0; 3] } else { [0.7, 0.5, 0.25] };
            assert_eq!(*px, expect);
        }
    }

    #[test]
    fn furnace_matches_geometric_series() {
        // Camera inside a closed Lambert sphere of albedo 0.5 emitting 1:
        // every path hits the wall on every bounce, so radiance is the
        // partial sum of 0.5^k over the bounces.
        let sphere = Geometry::Triangles(procedural::uv_sphere(Vec3::ZERO, 10.0, 32, 64));
        let scene = single(sphere, Material::lambert([0.5; 3]).with_emission([1.0; 3]), [0.0; 3]);
        for bounces in [1u32, 2, 5] {
            let cfg = RenderConfig {
                spp: 2,
                max_bounces: bounces,
                ..RenderConfig::default()
            };
            let cam = Camera::look_at(Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 1.0, 0.0), 60.0, 8, 8).unwrap();
            let img = render_megakernel(&scene, &cam, &cfg).unwrap();
            let expect: f32 = (0..bounces).map(|k| 0.5f32.powi(k as i32)).sum();
            for p in &img.pixels {
                for c in p {
                    assert!((c - expect).abs() < 1e-5, "bounces {bounces}: {c} vs {expect}");
                }
            }
        }
    }

    #[test]
    fn zero_spp_and_zero_resolution_fail() {
        let scene = RenderScene::new(None, vec![], [0.0; 3]).unwrap();
        let cfg = RenderConfig {
            spp: 0,
            ..RenderConfig::default()
        };
        assert!(render_wavefront(&scene, &camera(4, 4), &cfg).is_err());
        assert!(render_megakernel(&scene, &camera(4, 4), &cfg).is_err());
        let mut cam = camera(4, 4);
        cam.width = 0;
        assert!(render_megakernel(&scene, &cam, &RenderConfig::default()).is_err());
    }

    #[test]
    fn schedulers_agree_on_mirror_and_lambert() {
        let mut s = Scene::new();
        let room = s.add_geometry(Geometry::Triangles(procedural::cube_room(2.0))).unwrap();
        let ball = s.add_geometry(Geometry::Triangles(procedural::uv_sphere(Vec3::ZERO, 0.5, 12, 24))).unwrap();
        s.add_instance(room, Mat4::IDENTITY).unwrap();
        s.add_instance(ball, Mat4::translation(Vec3::new(-0.6, -0.5, 0.0))).unwrap();
        s.add_instance(ball, Mat4::translation(Vec3::new(0.7, -0.4, -0.3))).unwrap();
        let materials = vec![
            Material::lambert([0.7, 0.7, 0.7]).with_emission([0.3, 0.3, 0.3]),
            Material::mirror([0.9, 0.9, 0.9]),
            Material::lambert([0.8, 0.2, 0.2]),
        ];
        let scene = RenderScene::new(Some(s.commit(DispatchLevel::Two).unwrap()), materials, [0.0; 3]).unwrap();
        let cam = Camera::look_at(Vec3::new(0.0, 0.0, 1.8), Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 60.0, 24, 16).unwrap();
        let cfg = RenderConfig {
            spp: 3,
            max_bounces: 4,
            seed: 9,
            exec: Exec::Parallel,
        };
        let a = render_megakernel(&scene, &cam, &cfg).unwrap();
        let b = render_wavefront(&scene, &cam, &cfg).unwrap();
        assert!(a.bit_eq(&b));
        assert!(a.pixels.iter().any(|p| p[0] > 0.0));
    }
}
