//! Stack-based BVH traversal.
//!
//! Queries walk the top-level tree over instance bounds, transform the ray
//! into object space at each instance leaf, then walk that geometry's tree
//! and hand its leaves to the scene's leaf dispatcher. The active interval
//! shrinks to the best hit found so far.

use crate::error::{Error, Result};
use crate::lbvh::{BvhNode, LbvhTree};
use crate::math::{Aabb, Ray, Vec3};
use crate::scene::{CommittedScene, GeometryRecord, Hit, LeafDispatch, LeafInfo};

/// Maximum traversal stack depth.
pub const MAX_STACK_DEPTH: usize = 64;

/// Relative slack on slab parameters, a little above three roundings.
const SLAB_SLACK: f32 = 4.0 * f32::EPSILON;

/// Ray prepared for repeated slab tests.
#[derive(Clone, Copy, Debug)]
pub struct SlabRay {
    pub origin: Vec3,
    pub inv_dir: Vec3,
    /// Axes along which the direction is exactly zero.
    flat: [bool; 3],
}

impl SlabRay {
    #[inline]
    pub fn new(ray: &Ray) -> Self {
        Self {
            origin: ray.origin,
            inv_dir: ray.inv_dir(),
            flat: [ray.dir.x == 0.0, ray.dir.y == 0.0, ray.dir.z == 0.0],
        }
    }

    /// Conservative box test over `[t_min, t_max]`. Returns the padded entry
    /// parameter on overlap.
    #[inline]
    pub fn hit(&self, b: &Aabb, t_min: f32, t_max: f32) -> Option<f32> {
        let (mut t0, mut t1) = (t_min, t_max);
        for k in 0..3 {
            if self.flat[k] {
                // The tiny stand-in direction would turn an origin lying on a
                // face into a zero-length overlap.
                if self.origin[k] < b.min[k] || self.origin[k] > b.max[k] {
                    return None;
                }
                continue;
            }
            let a = (b.min[k] - self.origin[k]) * self.inv_dir[k];
            let c = (b.max[k] - self.origin[k]) * self.inv_dir[k];
            let (lo, hi) = if a <= c { (a, c) } else { (c, a) };
            let lo = lo - lo.abs() * SLAB_SLACK;
            let hi = hi + hi.abs() * SLAB_SLACK;
            t0 = t0.max(lo);
            t1 = t1.min(hi);
        }
        (t0 <= t1).then_some(t0)
    }
}

/// Conservative slab test of a ray against a box over the ray's own interval.
pub fn slab_hit(b: &Aabb, ray: &Ray) -> bool {
    SlabRay::new(ray).hit(b, ray.t_near, ray.t_far).is_some()
}

/// A node visited during an observed query. `inst_id` is `None` for the
/// top-level tree; for object trees the node lives in the instance's geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Visit {
    pub inst_id: Option<u32>,
    pub node: u32,
}

/// What a leaf callback asks of the walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    /// Keep going with this upper bound on t.
    Continue(f32),
    Stop,
}

/// Walks `tree` front to back, calling `on_leaf` for every leaf whose box the
/// ray overlaps within `[ray.t_near, t_max]`.
pub fn walk<F>(tree: &LbvhTree, ray: &Ray, mut t_max: f32, visit: &mut dyn FnMut(u32), mut on_leaf: F) -> Result<()>
where
    F: FnMut(u32, &BvhNode, f32) -> Result<Step>,
{
    let slab = SlabRay::new(ray);
    let nodes = &tree.nodes;
    let root = tree.root();
    if slab.hit(&nodes[root as usize].bounds, ray.t_near, t_max).is_none() {
        return Ok(());
    }
    let mut stack = [0u32; MAX_STACK_DEPTH];
    let mut sp = 0usize;
    let mut cur = root;
    loop {
        visit(cur);
        let node = &nodes[cur as usize];
        if node.is_leaf() {
            match on_leaf(cur, node, t_max)? {
                Step::Continue(t) => t_max = t_max.min(t),
                Step::Stop => return Ok(()),
            }
        } else {
            let l = slab.hit(&nodes[node.left as usize].bounds, ray.t_near, t_max);
            let r = slab.hit(&nodes[node.right as usize].bounds, ray.t_near, t_max);
            match (l, r) {
                (Some(tl), Some(tr)) => {
                    let (near, far) = if tl <= tr { (node.left, node.right) } else { (node.right, node.left) };
                    if sp == MAX_STACK_DEPTH {
                        return Err(Error::StackOverflow(MAX_STACK_DEPTH));
                    }
                    stack[sp] = far;
                    sp += 1;
                    cur = near;
                    continue;
                }
                (Some(_), None) => {
                    cur = node.left;
                    continue;
                }
                (None, Some(_)) => {
                    cur = node.right;
                    continue;
                }
                (None, None) => {}
            }
        }
        // Pop until a node still overlapping the shrunken interval turns up.
        loop {
            if sp == 0 {
                return Ok(());
            }
            sp -= 1;
            let n = stack[sp];
            if slab.hit(&nodes[n as usize].bounds, ray.t_near, t_max).is_some() {
                cur = n;
                break;
            }
        }
    }
}

/// Calls `f` for every leaf of `tree` whose box overlaps the ray's interval.
pub fn for_each_overlapping_leaf<F: FnMut(&BvhNode)>(tree: &LbvhTree, ray: &Ray, mut f: F) -> Result<()> {
    walk(tree, ray, ray.t_far, &mut |_| {}, |_, node, t| {
        f(node);
        Ok(Step::Continue(t))
    })
}

pub(crate) fn intersect_leaf_prims<D: LeafDispatch + ?Sized>(
    d: &D,
    rec: &GeometryRecord,
    node: &BvhNode,
    info: LeafInfo,
    oray: &Ray,
    best: &mut Hit,
) {
    for &p in rec.bvh.leaf_prims(node) {
        if let Some(h) = d.intersect_prim(rec, info.geom_id, p, oray, best.t) {
            best.consider(h, info.inst_id, info.geom_id, p);
        }
    }
}

pub(crate) fn nearest_hit<D: LeafDispatch + ?Sized>(
    scene: &CommittedScene,
    d: &D,
    ray: &Ray,
    observer: &mut dyn FnMut(Visit),
) -> Result<Hit> {
    let mut best = Hit::miss(ray.t_far);
    let observer = std::cell::RefCell::new(observer);
    let records = scene.records();
    let instances = scene.instances();
    let tlas = scene.tlas();
    walk(tlas, ray, ray.t_far, &mut |n| (observer.borrow_mut())(Visit { inst_id: None, node: n }), |_, leaf, _| {
        for &inst_id in tlas.leaf_prims(leaf) {
            let inst = &instances[inst_id as usize];
            let rec = &records[inst.geom_id as usize];
            let oray = inst.object_ray(ray);
            walk(
                &rec.bvh,
                &oray,
                best.t,
                &mut |n| {
                    (observer.borrow_mut())(Visit {
                        inst_id: Some(inst_id),
                        node: n,
                    })
                },
                |aabb_id, node, _| {
                    let info = LeafInfo {
                        geom_id: inst.geom_id,
                        inst_id,
                        aabb_id,
                    };
                    intersect_leaf_prims(d, rec, node, info, &oray, &mut best);
                    Ok(Step::Continue(best.t))
                },
            )?;
        }
        Ok(Step::Continue(best.t))
    })?;
    Ok(best)
}

pub(crate) fn any_hit<D: LeafDispatch + ?Sized>(scene: &CommittedScene, d: &D, ray: &Ray) -> Result<bool> {
    let records = scene.records();
    let instances = scene.instances();
    let tlas = scene.tlas();
    let mut found = false;
    walk(tlas, ray, ray.t_far, &mut |_| {}, |_, leaf, t| {
        for &inst_id in tlas.leaf_prims(leaf) {
            let inst = &instances[inst_id as usize];
            let rec = &records[inst.geom_id as usize];
            let oray = inst.object_ray(ray);
            walk(&rec.bvh, &oray, ray.t_far, &mut |_| {}, |_, node, t| {
                for &p in rec.bvh.leaf_prims(node) {
                    if d.intersect_prim(rec, inst.geom_id, p, &oray, ray.t_far).is_some() {
                        found = true;
                        return Ok(Step::Stop);
                    }
                }
                Ok(Step::Continue(t))
            })?;
            if found {
                return Ok(Step::Stop);
            }
        }
        Ok(Step::Continue(t))
    })?;
    Ok(found)
}
