//! Linear BVH construction over primitive boxes.
//!
//! The build runs as a chain of data-parallel kernels:
//!
//! 0. reduce all boxes to the scene bounds;
//! 1. quantize every box centroid to a 30-bit Morton code;
//! 2. sort `(code, index)` pairs;
//! 3. group runs of equal codes into leaves (flag, exclusive scan, scatter);
//! 4. build the binary radix tree over the unique keys, one internal node per
//!    work item (Karras 2012);
//! 5. refit internal bounds bottom-up with repeated parallel passes.
//!
//! Node layout: for `L` leaves, internal nodes occupy `[0, L-1)` and leaves
//! occupy `[L-1, 2L-1)` in key order. The root is always node 0.

use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};
use crate::parallel::{self, Exec, MortonPair};

/// Child/leaf marker stored in `left`/`right` of leaf nodes.
pub const LEAF_MARKER: u32 = 0xFFFF_FFFF;

/// Bits per axis of the Morton quantization.
pub const MORTON_BITS_PER_AXIS: u32 = 10;

/// Upper bound on refit passes for trees keyed by 30-bit codes.
pub const REFIT_PASSES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BvhNode {
    pub bounds: Aabb,
    pub left: u32,
    pub right: u32,
    pub first_prim: u32,
    pub prim_count: u32,
}

impl BvhNode {
    pub fn leaf(bounds: Aabb, first_prim: u32, prim_count: u32) -> Self {
        Self {
            bounds,
            left: LEAF_MARKER,
            right: LEAF_MARKER,
            first_prim,
            prim_count,
        }
    }

    #[inline]
    pub fn is_leaf(&self) -> bool {
        self.left == LEAF_MARKER
    }
}

/// How sorted primitives are grouped into leaves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LeafGrouping {
    /// All primitives sharing a Morton code form one leaf.
    #[default]
    ByCode,
    /// Every primitive gets its own leaf; ties are broken by appending the
    /// primitive index below the code, so keys are 64 bits wide.
    OnePerPrimitive,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOptions {
    pub exec: Exec,
    pub grouping: LeafGrouping,
}

impl BuildOptions {
    pub fn new(exec: Exec) -> Self {
        Self {
            exec,
            grouping: LeafGrouping::ByCode,
        }
    }

    pub fn one_per_primitive(exec: Exec) -> Self {
        Self {
            exec,
            grouping: LeafGrouping::OnePerPrimitive,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbvhTree {
    pub nodes: Vec<BvhNode>,
    /// Original primitive indices in leaf order.
    pub prim_indices: Vec<u32>,
    /// Strictly increasing key of every leaf, in leaf order.
    pub leaf_keys: Vec<u64>,
    /// Number of refit passes performed by the last refit.
    pub refit_passes: usize,
}

impl LbvhTree {
    #[inline]
    pub fn root(&self) -> u32 {
        0
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_keys.len()
    }

    pub fn internal_count(&self) -> usize {
        self.leaf_count().saturating_sub(1)
    }

    /// Node index of leaf `i` (in key order).
    #[inline]
    pub fn leaf_node(&self, i: usize) -> usize {
        self.internal_count() + i
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    /// Primitive indices stored in a leaf node.
    pub fn leaf_prims(&self, node: &BvhNode) -> &[u32] {
        let s = node.first_prim as usize;
        &self.prim_indices[s..s + node.prim_count as usize]
    }

    /// Longest root-to-leaf path, counted in nodes.
    pub fn depth(&self) -> usize {
        fn rec(t: &LbvhTree, n: u32) -> usize {
            let node = &t.nodes[n as usize];
            if node.is_leaf() {
                1
            } else {
                1 + rec(t, node.left).max(rec(t, node.right))
            }
        }
        rec(self, 0)
    }
}

/// Spreads the low 10 bits of `v` so that bit `i` lands at bit `3i`.
#[inline]
pub fn expand_bits_10(v: u32) -> u32 {
    let mut x = v & 0x3ff;
    x = (x | (x << 16)) & 0x0300_00ff;
    x = (x | (x << 8)) & 0x0300_f00f;
    x = (x | (x << 4)) & 0x030c_30c3;
    x = (x | (x << 2)) & 0x0924_9249;
    x
}

/// Interleaves three 10-bit cell coordinates; x occupies the lowest slot.
#[inline]
pub fn morton3(x: u32, y: u32, z: u32) -> u32 {
    expand_bits_10(x) | (expand_bits_10(y) << 1) | (expand_bits_10(z) << 2)
}

/// Quantizes `p` to the 1024^3 lattice spanning `bounds`. Axes with zero
/// extent quantize to 0.
#[inline]
pub fn quantize(p: Vec3, bounds: &Aabb) -> [u32; 3] {
    let cells = (1u32 << MORTON_BITS_PER_AXIS) as f32;
    let ext = bounds.extent();
    let mut q = [0u32; 3];
    for (k, qk) in q.iter_mut().enumerate() {
        if ext[k] > 0.0 {
            let u = (p[k] - bounds.min[k]) / ext[k] * cells;
            *qk = (u.max(0.0) as u32).min((1 << MORTON_BITS_PER_AXIS) - 1);
        }
    }
    q
}

/// One Morton pair per box, keyed by the quantized box centroid.
pub fn compute_morton_codes(exec: Exec, boxes: &[Aabb], scene_bounds: &Aabb) -> Vec<MortonPair> {
    parallel::parallel_map(exec, boxes.len(), |i| {
        let [x, y, z] = quantize(boxes[i].centroid(), scene_bounds);
        MortonPair::new(morton3(x, y, z), i as u32)
    })
}

/// Output of the leaf-grouping step.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaves {
    pub nodes: Vec<BvhNode>,
    pub keys: Vec<u64>,
    pub prim_indices: Vec<u32>,
}

/// Groups sorted pairs into leaves and computes leaf bounds.
///
/// Run starts are flagged, an exclusive scan over the flags assigns each run
/// its leaf slot, and the run starts are scattered to those slots.
pub fn build_leaves(
    exec: Exec,
    grouping: LeafGrouping,
    sorted: &[MortonPair],
    boxes: &[Aabb],
) -> Leaves {
    let n = sorted.len();
    let key_of = |p: &MortonPair| match grouping {
        LeafGrouping::ByCode => u64::from(p.code),
        LeafGrouping::OnePerPrimitive => p.packed(),
    };
    let flags = parallel::parallel_map(exec, n, |i| {
        u32::from(i == 0 || key_of(&sorted[i]) != key_of(&sorted[i - 1]))
    });
    let slots = parallel::exclusive_scan(exec, &flags);
    let leaf_count = if n == 0 { 0 } else { (slots[n - 1] + flags[n - 1]) as usize };

    let mut run_start = vec![0u32; leaf_count];
    for i in 0..n {
        if flags[i] != 0 {
            run_start[slots[i] as usize] = i as u32;
        }
    }
    let prim_indices: Vec<u32> = sorted.iter().map(|p| p.index).collect();
    let keys = parallel::parallel_map(exec, leaf_count, |l| key_of(&sorted[run_start[l] as usize]));
    let nodes = parallel::parallel_map(exec, leaf_count, |l| {
        let first = run_start[l];
        let end = run_start.get(l + 1).copied().unwrap_or(n as u32);
        let bounds = prim_indices[first as usize..end as usize]
            .iter()
            .fold(Aabb::EMPTY, |b, &p| b.union(&boxes[p as usize]));
        BvhNode::leaf(bounds, first, end - first)
    });
    Leaves {
        nodes,
        keys,
        prim_indices,
    }
}

/// Length of the common prefix of keys `i` and `j`, or -1 when `j` is out
/// of range.
#[inline]
fn delta(keys: &[u64], i: i64, j: i64) -> i32 {
    if j < 0 || j >= keys.len() as i64 {
        return -1;
    }
    (keys[i as usize] ^ keys[j as usize]).leading_zeros() as i32
}

/// Children of internal node `i` as node indices in the combined layout.
fn karras_node(keys: &[u64], i: usize) -> (u32, u32) {
    let l_count = keys.len();
    let i = i as i64;
    let d: i64 = if delta(keys, i, i + 1) - delta(keys, i, i - 1) >= 0 { 1 } else { -1 };
    let delta_min = delta(keys, i, i - d);

    let mut l_max: i64 = 2;
    while delta(keys, i, i + l_max * d) > delta_min {
        l_max *= 2;
    }
    let mut l = 0;
    let mut t = l_max / 2;
    while t >= 1 {
        if delta(keys, i, i + (l + t) * d) > delta_min {
            l += t;
        }
        t /= 2;
    }
    let j = i + l * d;

    let delta_node = delta(keys, i, j);
    let mut s = 0;
    let mut div = 2;
    loop {
        let t = (l + div - 1) / div;
        if delta(keys, i, i + (s + t) * d) > delta_node {
            s += t;
        }
        if t <= 1 {
            break;
        }
        div *= 2;
    }
    let split = i + s * d + d.min(0);

    let internal = l_count as i64 - 1;
    let left = if i.min(j) == split { internal + split } else { split };
    let right = if i.max(j) == split + 1 { internal + split + 1 } else { split + 1 };
    (left as u32, right as u32)
}

/// Builds the radix-tree topology over strictly increasing leaf keys.
/// Internal bounds are left empty; run [`refit`] afterwards.
pub fn build_hierarchy_karras(exec: Exec, keys: &[u64], leaves: Vec<BvhNode>) -> Result<Vec<BvhNode>> {
    if keys.is_empty() || leaves.is_empty() {
        return Err(Error::NoLeaves);
    }
    debug_assert_eq!(keys.len(), leaves.len());
    let internal = keys.len() - 1;
    let mut nodes = parallel::parallel_map(exec, internal, |i| {
        let (left, right) = karras_node(keys, i);
        BvhNode {
            bounds: Aabb::EMPTY,
            left,
            right,
            first_prim: 0,
            prim_count: 0,
        }
    });
    nodes.extend(leaves);
    Ok(nodes)
}

/// Recomputes internal bounds bottom-up.
///
/// Leaves start out resolved. Each pass resolves, in parallel, every internal
/// node whose two children were resolved by an earlier pass, so pass `k`
/// finishes all nodes of height `k`. Passes stop as soon as the root is
/// resolved or a pass makes no progress; the pass count is capped at 32 for
/// 30-bit keys and 64 for the widened keys of [`LeafGrouping::OnePerPrimitive`].
pub fn refit(exec: Exec, tree: &mut LbvhTree) {
    let internal = tree.internal_count();
    tree.refit_passes = 0;
    if internal == 0 {
        return;
    }
    let max_passes = if tree.leaf_keys.last().is_some_and(|&k| k > u64::from(u32::MAX)) {
        64
    } else {
        REFIT_PASSES
    };
    let mut resolved: Vec<bool> = (0..tree.nodes.len()).map(|n| n >= internal).collect();
    for pass in 0..max_passes {
        let nodes = &tree.nodes;
        let ready = &resolved;
        let updates = parallel::parallel_map(exec, internal, |i| {
            let n = &nodes[i];
            (!ready[i] && ready[n.left as usize] && ready[n.right as usize])
                .then(|| nodes[n.left as usize].bounds.union(&nodes[n.right as usize].bounds))
        });
        let mut changed = false;
        for (i, u) in updates.into_iter().enumerate() {
            if let Some(b) = u {
                tree.nodes[i].bounds = b;
                resolved[i] = true;
                changed = true;
            }
        }
        tree.refit_passes = pass + 1;
        if !changed || resolved[0] {
            break;
        }
    }
    debug_assert!(resolved[0], "refit did not reach the root");
}

/// Full LBVH build over primitive boxes.
pub fn build_from_boxes(boxes: &[Aabb], opts: BuildOptions) -> Result<LbvhTree> {
    let exec = opts.exec;
    let scene = parallel::reduce_aabb(exec, boxes)?;
    if !scene.is_valid() {
        return Err(Error::InvalidGeometry("non-finite primitive bounds".into()));
    }
    let pairs = compute_morton_codes(exec, boxes, &scene);
    let sorted = parallel::bitonic_sort_pairs(exec, &pairs);
    let leaves = build_leaves(exec, opts.grouping, &sorted, boxes);
    let nodes = build_hierarchy_karras(exec, &leaves.keys, leaves.nodes)?;
    let mut tree = LbvhTree {
        nodes,
        prim_indices: leaves.prim_indices,
        leaf_keys: leaves.keys,
        refit_passes: 0,
    };
    refit(exec, &mut tree);
    Ok(tree)
}
