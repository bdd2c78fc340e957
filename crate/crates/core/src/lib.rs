//! Portable ray-tracing kernels.
//!
//! * [`parallel`]: deterministic data-parallel primitives (scan, bitonic
//!   sort, reduction, compaction) with a sequential reference path.
//! * [`lbvh`]: Morton-code linear BVH construction with Karras hierarchy
//!   emission and iterative refit.
//! * [`scene`] and [`traversal`]: a two-level scene with per-geometry BVHs,
//!   selectable leaf dispatch strategies and nearest/any-hit queries.
//! * [`sdf`]: signed-distance geometry (dense grid, frame octree, sparse
//!   voxel and brick sets) intersected with a bracketed Newton solver.
//! * [`relu`]: voxel radiance fields composited front to back.
//! * [`render`]: a small path tracer with megakernel and wavefront schedulers.
//! * [`io`]: binary formats, OBJ loading, batch tracing and benchmarks.

pub mod error;
pub mod io;
pub mod lbvh;
pub mod math;
pub mod parallel;
pub mod procedural;
pub mod relu;
pub mod render;
pub mod scene;
pub mod sdf;
pub mod traversal;

pub use error::{Error, Result};
pub use math::{Aabb, Mat4, Ray, Vec3};
pub use parallel::Exec;
pub use scene::{CommittedScene, DispatchLevel, Geometry, GeometryType, Hit, Scene};
