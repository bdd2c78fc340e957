//! File formats, OBJ loading, batch tracing and the benchmark harness.

pub mod bench;
pub mod formats;
mod obj;

pub use formats::*;
pub use obj::{load_obj, parse_obj};

use std::path::Path;

use crate::error::Result;
use crate::math::Ray;
use crate::parallel::{self, Exec};
use crate::scene::{CommittedScene, Hit};

/// Nearest hit for every ray, in input order.
pub fn trace_batch(scene: &CommittedScene, rays: &[Ray], exec: Exec) -> Result<Vec<Hit>> {
    parallel::parallel_map(exec, rays.len(), |i| scene.ray_query_nearest_hit(&rays[i]))
        .into_iter()
        .collect()
}

/// Reads a ray file, traces it and writes the hit file.
pub fn trace_file(scene: &CommittedScene, rays_path: &Path, hits_path: &Path, exec: Exec) -> Result<usize> {
    let rays = decode_rays(&std::fs::read(rays_path)?)?;
    let hits = trace_batch(scene, &rays, exec)?;
    std::fs::write(hits_path, encode_hits(&hits)?)?;
    Ok(hits.len())
}
