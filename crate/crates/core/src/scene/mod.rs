//! Heterogeneous scene container and leaf dispatch.
//!
//! Geometries and instances are staged on a [`Scene`], then frozen by
//! [`Scene::commit`] into a [`CommittedScene`] laid out for one of three
//! dispatch strategies:
//!
//! * [`DispatchLevel::Zero`]: one geometry type for the whole scene; the
//!   traversal loop is monomorphized for it and calls its intersector directly.
//! * [`DispatchLevel::One`]: every geometry is a fixed-size header into shared
//!   `f32`/`u32` pools; leaves dispatch through a switch on the header tag.
//! * [`DispatchLevel::Two`]: geometries are regrouped by type into
//!   contiguous per-type regions (in [`GeometryType`] order) and addressed by
//!   `(type, local index)`.
//!
//! All three run the same per-primitive intersection code, so ray queries
//! return identical hits at every admissible level.

mod triangles;
mod uniform;

pub use triangles::{intersect_triangle, TriangleMesh, TriangleView};
pub use uniform::{UniformHeader, UniformPools};

use crate::error::{Error, Result};
use crate::lbvh::{self, BuildOptions, LbvhTree, LeafGrouping};
use crate::math::{oct_decode, Aabb, Mat4, Ray, Vec3};
use crate::parallel::Exec;
use crate::relu::{RfField, RfView};
use crate::sdf::{
    FrameOctree, GridView, OctreeView, SbsView, SdfGrid, SparseBrickSet, SparseVoxelSet, SvsView,
};
use crate::traversal;

/// Geometry type tags, in region order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u32)]
pub enum GeometryType {
    Triangles = 0,
    SdfGrid = 1,
    SdfFrameOctree = 2,
    SdfSvs = 3,
    SdfSbs = 4,
    RfGrid = 5,
}

impl GeometryType {
    pub const ALL: [GeometryType; 6] = [
        GeometryType::Triangles,
        GeometryType::SdfGrid,
        GeometryType::SdfFrameOctree,
        GeometryType::SdfSvs,
        GeometryType::SdfSbs,
        GeometryType::RfGrid,
    ];
}

/// Result of intersecting one primitive: ray parameter plus surface
/// parameters (barycentrics for triangles, an octahedral normal otherwise).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimHit {
    pub t: f32,
    pub coords: [f32; 2],
}

/// Per-type primitive intersection, written against borrowed views so the
/// same code serves typed regions and the uniform pools.
pub trait PrimitiveIntersector {
    /// Intersection with primitive `prim` for `ray.t_near <= t <= t_max`.
    fn intersect_prim(&self, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit>;

    /// Object-space unit normal at a hit.
    fn object_normal(&self, _prim: u32, coords: [f32; 2]) -> Vec3 {
        oct_decode(coords)
    }
}

/// Owned geometry that can lend an intersector view.
pub trait Payload: Sync {
    type View<'a>: PrimitiveIntersector
    where
        Self: 'a;

    fn view(&self) -> Self::View<'_>;
}

macro_rules! impl_payload {
    ($ty:ty, $view:ident) => {
        impl Payload for $ty {
            type View<'a> = $view<'a>;

            #[inline]
            fn view(&self) -> $view<'_> {
                <$ty>::view(self)
            }
        }
    };
}

impl_payload!(TriangleMesh, TriangleView);
impl_payload!(SdfGrid, GridView);
impl_payload!(FrameOctree, OctreeView);
impl_payload!(SparseVoxelSet, SvsView);
impl_payload!(SparseBrickSet, SbsView);
impl_payload!(RfField, RfView);

/// Typed geometry payload accepted by [`Scene::add_geometry`].
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Triangles(TriangleMesh),
    SdfGrid(SdfGrid),
    SdfFrameOctree(FrameOctree),
    SdfSvs(SparseVoxelSet),
    SdfSbs(SparseBrickSet),
    RfGrid(RfField),
}

impl Geometry {
    pub fn type_tag(&self) -> GeometryType {
        match self {
            Geometry::Triangles(_) => GeometryType::Triangles,
            Geometry::SdfGrid(_) => GeometryType::SdfGrid,
            Geometry::SdfFrameOctree(_) => GeometryType::SdfFrameOctree,
            Geometry::SdfSvs(_) => GeometryType::SdfSvs,
            Geometry::SdfSbs(_) => GeometryType::SdfSbs,
            Geometry::RfGrid(_) => GeometryType::RfGrid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |what: &str| Err(Error::InvalidGeometry(format!("{what} has no primitives")));
        match self {
            Geometry::Triangles(m) => m.validate(),
            Geometry::SdfGrid(g) => g.validate(),
            Geometry::SdfFrameOctree(o) if o.leaves.is_empty() => empty("frame octree"),
            Geometry::SdfSvs(s) if s.nodes.is_empty() => empty("voxel set"),
            Geometry::SdfSbs(s) => {
                if s.bricks.is_empty() {
                    return empty("brick set");
                }
                let ok = s.bricks.iter().all(|b| (b.dim == 2 || b.dim == 4) && b.value_offset as usize + b.value_count() <= s.values.len());
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidGeometry("brick references values out of range".into()))
                }
            }
            Geometry::RfGrid(f) if f.positions.is_empty() => empty("radiance field"),
            _ => Ok(()),
        }
    }

    pub fn prim_bounds(&self) -> Vec<Aabb> {
        match self {
            Geometry::Triangles(m) => m.view().prim_bounds(),
            Geometry::SdfGrid(g) => g.view().prim_bounds(),
            Geometry::SdfFrameOctree(o) => o.view().prim_bounds(),
            Geometry::SdfSvs(s) => s.view().prim_bounds(),
            Geometry::SdfSbs(s) => s.view().prim_bounds(),
            Geometry::RfGrid(f) => f.view().prim_bounds(),
        }
    }

    fn grouping(&self) -> LeafGrouping {
        match self {
            Geometry::RfGrid(_) => LeafGrouping::OnePerPrimitive,
            _ => LeafGrouping::ByCode,
        }
    }
}

/// Dispatch strategy chosen at commit time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DispatchLevel {
    Zero,
    One,
    Two,
    /// Callable-shader dispatch; only representable so it can be rejected.
    Three,
}

impl TryFrom<u8> for DispatchLevel {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(DispatchLevel::Zero),
            1 => Ok(DispatchLevel::One),
            2 => Ok(DispatchLevel::Two),
            3 => Ok(DispatchLevel::Three),
            _ => Err(Error::InvalidConfig(format!("unknown dispatch level {v}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryRecord {
    pub type_tag: GeometryType,
    /// Index within the geometry's per-type region.
    pub local_index: u32,
    pub bvh: LbvhTree,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceRecord {
    pub geom_id: u32,
    pub world_from_object: Mat4,
    pub object_from_world: Mat4,
}

impl InstanceRecord {
    /// The ray in object space. Directions are not renormalized, so ray
    /// parameters are shared between world and object space.
    #[inline]
    pub fn object_ray(&self, ray: &Ray) -> Ray {
        Ray {
            origin: self.object_from_world.transform_point(ray.origin),
            dir: self.object_from_world.transform_vector(ray.dir),
            ..*ray
        }
    }
}

/// Sentinel `prim_id` of a miss.
pub const MISS: u32 = u32::MAX;

/// Nearest-hit result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f32,
    pub prim_id: u32,
    pub geom_id: u32,
    pub inst_id: u32,
    pub coords: [f32; 2],
}

impl Hit {
    pub fn miss(t_far: f32) -> Self {
        Self {
            t: t_far,
            prim_id: MISS,
            geom_id: MISS,
            inst_id: MISS,
            coords: [0.0; 2],
        }
    }

    #[inline]
    pub fn is_miss(&self) -> bool {
        self.prim_id == MISS
    }

    /// Replaces `self` when the candidate is nearer, or equally near with a
    /// smaller `(inst_id, geom_id, prim_id)`.
    #[inline]
    pub fn consider(&mut self, h: PrimHit, inst_id: u32, geom_id: u32, prim_id: u32) -> bool {
        let better = h.t < self.t
            || (h.t == self.t && (inst_id, geom_id, prim_id) < (self.inst_id, self.geom_id, self.prim_id));
        if better {
            *self = Hit {
                t: h.t,
                prim_id,
                geom_id,
                inst_id,
                coords: h.coords,
            };
        }
        better
    }
}

/// Leaf context handed to leaf intersection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeafInfo {
    pub geom_id: u32,
    pub inst_id: u32,
    /// Node index of the leaf in the geometry's BVH.
    pub aabb_id: u32,
}

/// Mutable staging area for geometry and instances.
#[derive(Debug, Default)]
pub struct Scene {
    geometries: Vec<Geometry>,
    instances: Vec<InstanceRecord>,
    committed: bool,
}

impl Scene {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_geometry(&mut self, payload: Geometry) -> Result<u32> {
        if self.committed {
            return Err(Error::SceneAlreadyCommitted);
        }
        payload.validate()?;
        self.geometries.push(payload);
        Ok(self.geometries.len() as u32 - 1)
    }

    pub fn add_instance(&mut self, geom_id: u32, world_from_object: Mat4) -> Result<u32> {
        if self.committed {
            return Err(Error::SceneAlreadyCommitted);
        }
        if geom_id as usize >= self.geometries.len() {
            return Err(Error::InvalidGeometryId(geom_id));
        }
        let object_from_world = world_from_object.inverse()?;
        self.instances.push(InstanceRecord {
            geom_id,
            world_from_object,
            object_from_world,
        });
        Ok(self.instances.len() as u32 - 1)
    }

    pub fn geometry_count(&self) -> usize {
        self.geometries.len()
    }

    pub fn commit(&mut self, level: DispatchLevel) -> Result<CommittedScene> {
        self.commit_with(level, Exec::default())
    }

    pub fn commit_with(&mut self, level: DispatchLevel, exec: Exec) -> Result<CommittedScene> {
        if self.committed {
            return Err(Error::SceneAlreadyCommitted);
        }
        if level == DispatchLevel::Three {
            return Err(Error::UnsupportedDispatchLevel);
        }
        if self.geometries.is_empty() || self.instances.is_empty() {
            return Err(Error::EmptyScene);
        }
        let first = self.geometries[0].type_tag();
        if level == DispatchLevel::Zero {
            if let Some(other) = self.geometries.iter().map(Geometry::type_tag).find(|&t| t != first) {
                return Err(Error::LevelZeroMixedTypes(first, other));
            }
        }

        let mut records = Vec::with_capacity(self.geometries.len());
        let mut members: [Vec<u32>; 6] = Default::default();
        for (id, g) in self.geometries.iter().enumerate() {
            let tag = g.type_tag();
            let region = &mut members[tag as usize];
            let bvh = lbvh::build_from_boxes(
                &g.prim_bounds(),
                BuildOptions {
                    exec,
                    grouping: g.grouping(),
                },
            )?;
            records.push(GeometryRecord {
                type_tag: tag,
                local_index: region.len() as u32,
                bvh,
            });
            region.push(id as u32);
        }

        let world_boxes: Vec<Aabb> = self
            .instances
            .iter()
            .map(|i| pad_aabb(i.world_from_object.transform_aabb(&records[i.geom_id as usize].bvh.bounds())))
            .collect();
        let tlas = lbvh::build_from_boxes(&world_boxes, BuildOptions::new(exec))?;

        let geometries = std::mem::take(&mut self.geometries);
        let storage = match level {
            DispatchLevel::Zero => Storage::Zero(Homogeneous::from_geometries(geometries)),
            DispatchLevel::One => {
                let mut pools = UniformPools::default();
                let headers = geometries.iter().map(|g| pools.encode(g)).collect();
                Storage::One(Uniform { headers, pools })
            }
            DispatchLevel::Two => Storage::Two(Regions::from_geometries(geometries)),
            DispatchLevel::Three => unreachable!(),
        };
        self.committed = true;
        Ok(CommittedScene {
            level,
            records,
            instances: std::mem::take(&mut self.instances),
            tlas,
            region_members: members,
            storage,
        })
    }
}

/// Grows a transformed box by a relative margin so rounding in the
/// transform never excludes a surface point.
fn pad_aabb(b: Aabb) -> Aabb {
    let scale = b.min.abs().max(b.max.abs()).max_elem().max(b.extent().max_elem());
    let pad = Vec3::splat(scale * 1e-6);
    Aabb::new(b.min - pad, b.max + pad)
}

/// Per-level leaf dispatch.
pub(crate) trait LeafDispatch: Sync {
    fn intersect_prim(&self, rec: &GeometryRecord, geom_id: u32, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit>;
    fn object_normal(&self, rec: &GeometryRecord, geom_id: u32, prim: u32, coords: [f32; 2]) -> Vec3;
}

/// Level zero: statically typed.
pub(crate) struct Monomorphic<'a, T> {
    items: &'a [T],
}

impl<T: Payload> LeafDispatch for Monomorphic<'_, T> {
    #[inline]
    fn intersect_prim(&self, rec: &GeometryRecord, _geom_id: u32, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        self.items[rec.local_index as usize].view().intersect_prim(prim, ray, t_max)
    }

    fn object_normal(&self, rec: &GeometryRecord, _geom_id: u32, prim: u32, coords: [f32; 2]) -> Vec3 {
        self.items[rec.local_index as usize].view().object_normal(prim, coords)
    }
}

#[derive(Debug)]
enum Homogeneous {
    Triangles(Vec<TriangleMesh>),
    SdfGrid(Vec<SdfGrid>),
    SdfFrameOctree(Vec<FrameOctree>),
    SdfSvs(Vec<SparseVoxelSet>),
    SdfSbs(Vec<SparseBrickSet>),
    RfGrid(Vec<RfField>),
}

impl Homogeneous {
    fn from_geometries(geoms: Vec<Geometry>) -> Self {
        macro_rules! collect {
            ($variant:ident) => {
                Homogeneous::$variant(
                    geoms
                        .into_iter()
                        .map(|g| match g {
                            Geometry::$variant(x) => x,
                            _ => unreachable!("level zero checked for a single type"),
                        })
                        .collect(),
                )
            };
        }
        match geoms[0].type_tag() {
            GeometryType::Triangles => collect!(Triangles),
            GeometryType::SdfGrid => collect!(SdfGrid),
            GeometryType::SdfFrameOctree => collect!(SdfFrameOctree),
            GeometryType::SdfSvs => collect!(SdfSvs),
            GeometryType::SdfSbs => collect!(SdfSbs),
            GeometryType::RfGrid => collect!(RfGrid),
        }
    }
}

/// Level one: uniform headers plus a tag switch.
#[derive(Debug)]
pub(crate) struct Uniform {
    headers: Vec<UniformHeader>,
    pools: UniformPools,
}

macro_rules! uniform_switch {
    ($self:ident, $geom:expr, |$v:ident| $body:expr) => {{
        let h = &$self.headers[$geom as usize];
        match h.tag {
            t if t == GeometryType::Triangles as u32 => {
                let $v = $self.pools.triangles(h);
                $body
            }
            t if t == GeometryType::SdfGrid as u32 => {
                let $v = $self.pools.grid(h);
                $body
            }
            t if t == GeometryType::SdfFrameOctree as u32 => {
                let $v = $self.pools.octree(h);
                $body
            }
            t if t == GeometryType::SdfSvs as u32 => {
                let $v = $self.pools.svs(h);
                $body
            }
            t if t == GeometryType::SdfSbs as u32 => {
                let $v = $self.pools.sbs(h);
                $body
            }
            t if t == GeometryType::RfGrid as u32 => {
                let $v = $self.pools.rf(h);
                $body
            }
            _ => unreachable!("{}", Error::UnregisteredGeometryType),
        }
    }};
}

impl LeafDispatch for Uniform {
    #[inline]
    fn intersect_prim(&self, _rec: &GeometryRecord, geom_id: u32, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        uniform_switch!(self, geom_id, |v| v.intersect_prim(prim, ray, t_max))
    }

    fn object_normal(&self, _rec: &GeometryRecord, geom_id: u32, prim: u32, coords: [f32; 2]) -> Vec3 {
        uniform_switch!(self, geom_id, |v| v.object_normal(prim, coords))
    }
}

/// Level two: per-type regions.
#[derive(Debug, Default)]
pub(crate) struct Regions {
    triangles: Vec<TriangleMesh>,
    grids: Vec<SdfGrid>,
    octrees: Vec<FrameOctree>,
    svs: Vec<SparseVoxelSet>,
    sbs: Vec<SparseBrickSet>,
    rf: Vec<RfField>,
}

impl Regions {
    fn from_geometries(geoms: Vec<Geometry>) -> Self {
        let mut r = Regions::default();
        for g in geoms {
            match g {
                Geometry::Triangles(x) => r.triangles.push(x),
                Geometry::SdfGrid(x) => r.grids.push(x),
                Geometry::SdfFrameOctree(x) => r.octrees.push(x),
                Geometry::SdfSvs(x) => r.svs.push(x),
                Geometry::SdfSbs(x) => r.sbs.push(x),
                Geometry::RfGrid(x) => r.rf.push(x),
            }
        }
        r
    }
}

macro_rules! region_switch {
    ($self:ident, $rec:expr, |$v:ident| $body:expr) => {{
        let i = $rec.local_index as usize;
        match $rec.type_tag {
            GeometryType::Triangles => {
                let $v = $self.triangles[i].view();
                $body
            }
            GeometryType::SdfGrid => {
                let $v = $self.grids[i].view();
                $body
            }
            GeometryType::SdfFrameOctree => {
                let $v = $self.octrees[i].view();
                $body
            }
            GeometryType::SdfSvs => {
                let $v = $self.svs[i].view();
                $body
            }
            GeometryType::SdfSbs => {
                let $v = $self.sbs[i].view();
                $body
            }
            GeometryType::RfGrid => {
                let $v = $self.rf[i].view();
                $body
            }
        }
    }};
}

impl LeafDispatch for Regions {
    #[inline]
    fn intersect_prim(&self, rec: &GeometryRecord, _geom_id: u32, prim: u32, ray: &Ray, t_max: f32) -> Option<PrimHit> {
        region_switch!(self, rec, |v| v.intersect_prim(prim, ray, t_max))
    }

    fn object_normal(&self, rec: &GeometryRecord, _geom_id: u32, prim: u32, coords: [f32; 2]) -> Vec3 {
        region_switch!(self, rec, |v| v.object_normal(prim, coords))
    }
}

#[derive(Debug)]
enum Storage {
    Zero(Homogeneous),
    One(Uniform),
    Two(Regions),
}

/// Immutable scene ready for ray queries.
#[derive(Debug)]
pub struct CommittedScene {
    level: DispatchLevel,
    records: Vec<GeometryRecord>,
    instances: Vec<InstanceRecord>,
    tlas: LbvhTree,
    region_members: [Vec<u32>; 6],
    storage: Storage,
}

/// Binds `$d` to the level's concrete dispatcher and evaluates `$body`
/// (monomorphized per dispatcher).
macro_rules! with_dispatch {
    ($scene:expr, |$d:ident| $body:expr) => {
        match &$scene.storage {
            Storage::Zero(h) => match h {
                Homogeneous::Triangles(items) => {
                    let $d = &Monomorphic { items };
                    $body
                }
                Homogeneous::SdfGrid(items) => {
                    let $d = &Monomorphic { items };
                    $body
                }
                Homogeneous::SdfFrameOctree(items) => {
                    let $d = &Monomorphic { items };
                    $body
                }
                Homogeneous::SdfSvs(items) => {
                    let $d = &Monomorphic { items };
                    $body
                }
                Homogeneous::SdfSbs(items) => {
                    let $d = &Monomorphic { items };
                    $body
                }
                Homogeneous::RfGrid(items) => {
                    let $d = &Monomorphic { items };
                    $body
                }
            },
            Storage::One(u) => {
                let $d = u;
                $body
            }
            Storage::Two(r) => {
                let $d = r;
                $body
            }
        }
    };
}

impl CommittedScene {
    pub fn level(&self) -> DispatchLevel {
        self.level
    }

    pub fn records(&self) -> &[GeometryRecord] {
        &self.records
    }

    pub fn instances(&self) -> &[InstanceRecord] {
        &self.instances
    }

    pub fn tlas(&self) -> &LbvhTree {
        &self.tlas
    }

    /// World-space bounds of all instances.
    pub fn bounds(&self) -> Aabb {
        self.tlas.bounds()
    }

    /// `(type, local index)` of a geometry.
    pub fn region_of(&self, geom_id: u32) -> Option<(GeometryType, u32)> {
        self.records.get(geom_id as usize).map(|r| (r.type_tag, r.local_index))
    }

    /// Geometry ids stored in the region of `tag`, in local-index order.
    pub fn region_members(&self, tag: GeometryType) -> &[u32] {
        &self.region_members[tag as usize]
    }

    /// Closest hit over all instances, or a miss with `t == ray.t_far`.
    pub fn ray_query_nearest_hit(&self, ray: &Ray) -> Result<Hit> {
        ray.validate()?;
        with_dispatch!(self, |d| traversal::nearest_hit(self, d, ray, &mut |_| {}))
    }

    /// Nearest hit that also reports every node it visits.
    pub fn ray_query_nearest_hit_observed(&self, ray: &Ray, observer: &mut dyn FnMut(traversal::Visit)) -> Result<Hit> {
        ray.validate()?;
        with_dispatch!(self, |d| traversal::nearest_hit(self, d, ray, observer))
    }

    /// True when anything is hit in `[t_near, t_far]`.
    pub fn ray_query_any_hit(&self, ray: &Ray) -> Result<bool> {
        ray.validate()?;
        with_dispatch!(self, |d| traversal::any_hit(self, d, ray))
    }

    /// Intersects every primitive of one BVH leaf and returns the updated
    /// best hit. `ray` is in world space.
    pub fn intersect_leaf(&self, info: LeafInfo, ray: &Ray, best: Hit) -> Result<Hit> {
        ray.validate()?;
        let inst = self.instances.get(info.inst_id as usize).ok_or(Error::UnregisteredGeometryType)?;
        if inst.geom_id != info.geom_id {
            return Err(Error::InvalidGeometryId(info.geom_id));
        }
        let rec = &self.records[info.geom_id as usize];
        let node = rec.bvh.nodes.get(info.aabb_id as usize).filter(|n| n.is_leaf()).ok_or_else(|| {
            Error::Malformed(format!("node {} is not a leaf of geometry {}", info.aabb_id, info.geom_id))
        })?;
        let oray = inst.object_ray(ray);
        let mut best = best;
        with_dispatch!(self, |d| traversal::intersect_leaf_prims(d, rec, node, info, &oray, &mut best));
        Ok(best)
    }

    /// Intersects one primitive of one instance; the building block of
    /// brute-force reference loops.
    pub fn intersect_primitive(&self, inst_id: u32, prim: u32, ray: &Ray, best: &mut Hit) {
        let inst = &self.instances[inst_id as usize];
        let rec = &self.records[inst.geom_id as usize];
        let oray = inst.object_ray(ray);
        let h = with_dispatch!(self, |d| d.intersect_prim(rec, inst.geom_id, prim, &oray, best.t));
        if let Some(h) = h {
            best.consider(h, inst_id, inst.geom_id, prim);
        }
    }

    /// Primitive count of a geometry.
    pub fn prim_count(&self, geom_id: u32) -> usize {
        self.records[geom_id as usize].bvh.prim_indices.len()
    }

    /// World-space unit normal at a hit, facing whichever way the surface does.
    pub fn hit_normal(&self, hit: &Hit) -> Vec3 {
        let inst = &self.instances[hit.inst_id as usize];
        let rec = &self.records[hit.geom_id as usize];
        let n = with_dispatch!(self, |d| d.object_normal(rec, hit.geom_id, hit.prim_id, hit.coords));
        inst.object_from_world.transform_vector_transposed(n).normalize()
    }
}
