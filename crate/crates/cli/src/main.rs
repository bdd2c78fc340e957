use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crossrt::io::{self, bench};
use crossrt::math::{Mat4, Ray, Vec3};
use crossrt::parallel::{self, Exec};
use crossrt::relu::{rf_build, rf_render_ray};
use crossrt::render::{self, Camera, Image, Material, RenderConfig, RenderScene};
use crossrt::scene::{CommittedScene, DispatchLevel, Geometry, Scene, TriangleMesh};
use crossrt::sdf::{sbs_from_grid, svs_from_grid, FrameOctree, FrameOctreeParams, SdfGrid};
use crossrt::{lbvh, procedural, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

#[derive(Parser)]
#[command(name = "crossrt", version, about = "Ray-tracing kernels: LBVH builds, ray queries and renders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an LBVH over an OBJ mesh and dump its nodes.
    BuildBvh {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Trace a ray file against an OBJ mesh and write the hit file.
    Trace {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        rays: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "2")]
        dispatch: Dispatch,
    },
    /// Path-trace an OBJ mesh.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        opts: RenderOpts,
    },
    /// Path-trace an SDF grid in one of its representations.
    SdfRender {
        #[arg(long)]
        sdf: PathBuf,
        #[arg(long, value_enum, default_value_t = Repr::Svs)]
        repr: Repr,
        /// Lattice depth for the octree, voxel and brick representations.
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[command(flatten)]
        opts: RenderOpts,
    },
    /// Render a radiance-field grid.
    RfRender {
        #[arg(long)]
        rf: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "256x256")]
        res: Resolution,
    },
    /// Time BVH builds and ray tracing over OBJ meshes and write CSV.
    Bench {
        /// Mesh to benchmark; repeat for several scenes.
        #[arg(long)]
        scene: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        reps: u32,
        #[arg(long, default_value_t = 100_000)]
        rays: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "2")]
        dispatch: Dispatch,
    },
    /// Write procedural sample inputs.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long)]
        out: PathBuf,
        /// Mesh used to aim generated rays.
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        count: u32,
        #[arg(long, default_value_t = 64)]
        size: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RenderOpts {
    #[arg(long)]
    out: PathBuf,
    /// Also write the linear image as IMG1.
    #[arg(long)]
    raw: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Mega)]
    mode: Mode,
    #[arg(long, default_value = "2")]
    dispatch: Dispatch,
    #[arg(long, default_value_t = 16)]
    spp: u32,
    #[arg(long, default_value_t = 4)]
    bounces: u32,
    #[arg(long, default_value = "256x256")]
    res: Resolution,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Mega,
    Wavefront,
}

#[derive(Clone, Copy, ValueEnum)]
enum Repr {
    Grid,
    Octree,
    Svs,
    Sbs,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Rays aimed at `--scene` (RAYS file).
    Rays,
    /// Sphere of radius 0.3 on a `--size`^3 grid (SDFG file).
    SdfSphere,
    /// Random `--size`^3 radiance field (RFG1 file).
    RfRandom,
    /// Bumpy sphere with about `--count` triangles (OBJ file).
    Mesh,
}

#[derive(Clone, Copy)]
struct Dispatch(DispatchLevel);

impl FromStr for Dispatch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v: u8 = s.parse().map_err(|_| format!("expected 0, 1 or 2, got {s:?}"))?;
        match DispatchLevel::try_from(v) {
            Ok(l @ (DispatchLevel::Zero | DispatchLevel::One | DispatchLevel::Two)) => Ok(Dispatch(l)),
            _ => Err(format!("dispatch level {v} is not available (use 0, 1 or 2)")),
        }
    }
}

#[derive(Clone, Copy)]
struct Resolution(u32, u32);

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got {s:?}"))?;
        let parse = |v: &str| v.parse::<u32>().ok().filter(|&n| n > 0);
        match (parse(w), parse(h)) {
            (Some(w), Some(h)) => Ok(Resolution(w, h)),
            _ => Err(format!("expected positive WxH, got {s:?}")),
        }
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Run<T = ()> = Result<T, Failure>;

fn require(path: &Path) -> Run {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("input not found: {}", path.display())))
    }
}

fn mesh_scene(path: &Path, level: DispatchLevel) -> Run<CommittedScene> {
    require(path)?;
    let mesh = io::load_obj(path)?;
    Ok(single_instance(Geometry::Triangles(mesh), level)?)
}

fn single_instance(g: Geometry, level: DispatchLevel) -> crossrt::Result<CommittedScene> {
    let mut s = Scene::new();
    let id = s.add_geometry(g)?;
    s.add_instance(id, Mat4::IDENTITY)?;
    s.commit(level)
}

/// Camera looking at the scene bounds from the front and slightly above.
fn frame(scene_bounds: crossrt::Aabb, res: Resolution) -> crossrt::Result<Camera> {
    let c = scene_bounds.centroid();
    let d = scene_bounds.diagonal().max(1e-3);
    let eye = c + Vec3::new(0.0, 0.35, 1.0).normalize() * (1.4 * d);
    Camera::look_at(eye, c, Vec3::new(0.0, 1.0, 0.0), 45.0, res.0, res.1)
}

fn render_and_write(scene: CommittedScene, opts: &RenderOpts) -> Run {
    let camera = frame(scene.bounds(), opts.res)?;
    let materials = vec![Material::lambert([0.75, 0.75, 0.75]); scene.instances().len()];
    let rs = RenderScene::new(Some(scene), materials, [1.0, 1.0, 1.0])?;
    let cfg = RenderConfig {
        spp: opts.spp,
        max_bounces: opts.bounces,
        seed: opts.seed,
        exec: Exec::Parallel,
    };
    let img = match opts.mode {
        Mode::Mega => render::render_megakernel(&rs, &camera, &cfg)?,
        Mode::Wavefront => render::render_wavefront(&rs, &camera, &cfg)?,
    };
    write_image(&img, &opts.out, opts.raw.as_deref())
}

fn write_image(img: &Image, out: &Path, raw: Option<&Path>) -> Run {
    let mut ppm = Vec::new();
    img.write_ppm(&mut ppm)?;
    std::fs::write(out, ppm)?;
    if let Some(raw) = raw {
        std::fs::write(raw, io::encode_image(img))?;
    }
    Ok(())
}

fn write_obj(mesh: &TriangleMesh, out: &Path) -> Run {
    use std::fmt::Write;
    let mut s = String::new();
    for p in &mesh.positions {
        let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
    }
    for t in &mesh.indices {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    std::fs::write(out, s)?;
    Ok(())
}

fn run(cmd: Command) -> Run {
    match cmd {
        Command::BuildBvh { scene, out } => {
            require(&scene)?;
            let mesh = io::load_obj(&scene)?;
            let tree = lbvh::build_from_boxes(&mesh.view().prim_bounds(), lbvh::BuildOptions::new(Exec::Parallel))?;
            std::fs::write(&out, io::encode_lbvh(&tree.nodes)?)?;
            println!("{} nodes, {} leaves", tree.nodes.len(), tree.leaf_count());
        }
        Command::Trace {
            scene,
            rays,
            out,
            dispatch,
        } => {
            require(&rays)?;
            let committed = mesh_scene(&scene, dispatch.0)?;
            let n = io::trace_file(&committed, &rays, &out, Exec::Parallel)?;
            println!("{n} rays traced");
        }
        Command::Render { scene, opts } => {
            let committed = mesh_scene(&scene, opts.dispatch.0)?;
            render_and_write(committed, &opts)?;
        }
        Command::SdfRender { sdf, repr, depth, opts } => {
            require(&sdf)?;
            let grid = io::decode_sdf_grid(&std::fs::read(&sdf)?)?;
            let exec = Exec::Parallel;
            let geometry = match repr {
                Repr::Grid => Geometry::SdfGrid(grid),
                Repr::Octree => {
                    let params = FrameOctreeParams {
                        max_depth: depth,
                        ..FrameOctreeParams::default()
                    };
                    Geometry::SdfFrameOctree(FrameOctree::from_grid(exec, &grid, params)?)
                }
                Repr::Svs => Geometry::SdfSvs(svs_from_grid(exec, &grid, depth)?),
                Repr::Sbs => Geometry::SdfSbs(sbs_from_grid(exec, &grid, 4, depth)?),
            };
            render_and_write(single_instance(geometry, opts.dispatch.0)?, &opts)?;
        }
        Command::RfRender { rf, out, res } => {
            require(&rf)?;
            let grid = io::decode_rf_grid(&std::fs::read(&rf)?)?;
            let field = rf_build(Exec::Parallel, &grid, grid.threshold)?;
            let bounds = field.tree.bounds();
            let camera = frame(bounds, res)?;
            let pixels = parallel::parallel_map(Exec::Parallel, camera.pixel_count(), |p| {
                let (x, y) = (p as u32 % camera.width, p as u32 / camera.width);
                let ray: Ray = camera.ray(x, y, (0.5, 0.5));
                rf_render_ray(&field, &ray).map(|s| s.rgb)
            });
            let pixels = pixels.into_iter().collect::<crossrt::Result<Vec<_>>>()?;
            let img = Image {
                width: camera.width,
                height: camera.height,
                pixels,
            };
            write_image(&img, &out, None)?;
        }
        Command::Bench {
            scene,
            out,
            reps,
            rays,
            seed,
            dispatch,
        } => {
            let scenes = scene
                .iter()
                .map(|p| {
                    require(p)?;
                    let name = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
                    Ok(bench::BenchScene {
                        name,
                        mesh: io::load_obj(p)?,
                    })
                })
                .collect::<Run<Vec<_>>>()?;
            let cfg = bench::BenchConfig {
                reps,
                rays,
                seed,
                exec: Exec::Parallel,
                level: dispatch.0,
            };
            let rows = bench::run_bench(&scenes, &cfg)?;
            match out {
                Some(path) => bench::write_csv(&rows, std::fs::File::create(path)?)?,
                None => bench::write_csv(&rows, std::io::stdout().lock())?,
            }
        }
        Command::Gen {
            kind,
            out,
            scene,
            count,
            size,
            seed,
        } => match kind {
            GenKind::Rays => {
                let scene = scene.ok_or_else(|| Failure::Usage("gen rays needs --scene".into()))?;
                let committed = mesh_scene(&scene, DispatchLevel::Two)?;
                std::fs::write(&out, io::encode_rays(&bench::random_rays(&committed, count, seed))?)?;
            }
            GenKind::SdfSphere => {
                let grid = SdfGrid::sphere([size; 3], Vec3::splat(0.5), 0.3)?;
                std::fs::write(&out, io::encode_sdf_grid(&grid))?;
            }
            GenKind::RfRandom => {
                std::fs::write(&out, io::encode_rf_grid(&procedural::random_field(seed, [size; 3], 0.3, 4.0)))?;
            }
            GenKind::Mesh => write_obj(&procedural::bumpy_sphere(count, 1.0), &out)?,
        },
    }
    Ok(())
}

fn configure_threads() -> Run {
    if let Ok(v) = std::env::var("CROSSRT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("CROSSRT_THREADS must be a positive integer, got {v:?}")))?;
        parallel::configure_global_threads(n);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
