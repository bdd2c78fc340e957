mod common;

use crossrt::lbvh::{build_from_boxes, BuildOptions, LbvhTree};
use crossrt::math::{Aabb, Vec3};
use crossrt::parallel::{self, Exec, MortonPair};
use proptest::prelude::*;

fn arb_box() -> impl Strategy<Value = Aabb> {
    (prop::array::uniform3(-100.0f32..100.0), prop::array::uniform3(0.0f32..5.0)).prop_map(|(c, h)| {
        let c = Vec3::from_array(c);
        let h = Vec3::from_array(h);
        Aabb::new(c - h, c + h)
    })
}

fn key_range(tree: &LbvhTree, node: u32) -> (u64, u64) {
    let n = &tree.nodes[node as usize];
    if n.is_leaf() {
        let k = tree.leaf_keys[node as usize - tree.internal_count()];
        (k, k)
    } else {
        let (lo, _) = key_range(tree, n.left);
        let (_, hi) = key_range(tree, n.right);
        (lo, hi)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sort_is_sorted_permutation(codes in prop::collection::vec(0u32..64, 0..3000)) {
        let pairs: Vec<MortonPair> = codes.iter().enumerate().map(|(i, &c)| MortonPair::new(c, i as u32)).collect();
        let sorted = parallel::bitonic_sort_pairs(Exec::Parallel, &pairs);
        prop_assert!(sorted.windows(2).all(|w| (w[0].code, w[0].index) <= (w[1].code, w[1].index)));
        let mut a: Vec<u64> = sorted.iter().map(|p| p.packed()).collect();
        let mut b: Vec<u64> = pairs.iter().map(|p| p.packed()).collect();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn scan_differences_recover_input(values in prop::collection::vec(any::<u32>(), 0..20_000)) {
        let out = parallel::exclusive_scan(Exec::Parallel, &values);
        prop_assert_eq!(out.len(), values.len());
        if let Some(&first) = out.first() {
            prop_assert_eq!(first, 0);
        }
        for i in 1..out.len() {
            prop_assert_eq!(out[i].wrapping_sub(out[i - 1]), values[i - 1]);
        }
    }

    #[test]
    fn compact_matches_filter(values in prop::collection::vec(any::<u32>(), 0..20_000)) {
        let kept = parallel::compact(Exec::Parallel, &values, |v| v % 3 == 0);
        let want: Vec<u32> = values.iter().copied().filter(|v| v % 3 == 0).collect();
        prop_assert_eq!(kept, want);
    }

    #[test]
    fn tree_invariants(boxes in prop::collection::vec(arb_box(), 1..600)) {
        let tree = build_from_boxes(&boxes, BuildOptions::new(Exec::Parallel)).unwrap();
        let l = tree.leaf_count();
        prop_assert_eq!(tree.nodes.len(), 2 * l - 1);
        let mut prims = tree.prim_indices.clone();
        prims.sort_unstable();
        prop_assert_eq!(prims, (0..boxes.len() as u32).collect::<Vec<_>>());
        for n in tree.nodes.iter().filter(|n| !n.is_leaf()) {
            prop_assert!(n.bounds.contains(&tree.nodes[n.left as usize].bounds));
            prop_assert!(n.bounds.contains(&tree.nodes[n.right as usize].bounds));
            prop_assert!(key_range(&tree, n.left).1 < key_range(&tree, n.right).0);
        }
        for b in &boxes {
            prop_assert!(tree.bounds().contains(b));
        }
    }

    #[test]
    fn builds_are_deterministic(boxes in prop::collection::vec(arb_box(), 1..600)) {
        let a = build_from_boxes(&boxes, BuildOptions::new(Exec::Parallel)).unwrap();
        let b = build_from_boxes(&boxes, BuildOptions::new(Exec::Parallel)).unwrap();
        let seq = build_from_boxes(&boxes, BuildOptions::new(Exec::Sequential)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a.nodes, &seq.nodes);
        prop_assert_eq!(
            crossrt::io::encode_lbvh(&a.nodes).unwrap(),
            crossrt::io::encode_lbvh(&seq.nodes).unwrap()
        );
    }
}

#[test]
fn one_per_primitive_keeps_duplicates_apart() {
    let b = Aabb::new(Vec3::ZERO, Vec3::ONE);
    let boxes = vec![b; 300];
    let tree = build_from_boxes(&boxes, BuildOptions::one_per_primitive(Exec::Parallel)).unwrap();
    assert_eq!(tree.leaf_count(), 300);
    assert!(tree.leaf_keys.windows(2).all(|w| w[0] < w[1]));
    assert!(tree.nodes.iter().all(|n| !n.is_leaf() || n.prim_count == 1));
    let grouped = build_from_boxes(&boxes, BuildOptions::new(Exec::Parallel)).unwrap();
    assert_eq!(grouped.leaf_count(), 1);
}

#[test]
fn empty_input_is_an_error() {
    assert!(build_from_boxes(&[], BuildOptions::new(Exec::Parallel)).is_err());
}

#[test]
fn sequential_and_parallel_sorts_agree_on_large_input() {
    let mut r = common::rng(99);
    use rand::Rng;
    let pairs: Vec<MortonPair> = (0..100_000).map(|i| MortonPair::new(r.gen_range(0..1 << 20), i)).collect();
    assert_eq!(
        parallel::bitonic_sort_pairs(Exec::Parallel, &pairs),
        parallel::bitonic_sort_pairs(Exec::Sequential, &pairs)
    );
}
