mod common;

use crossrt::math::{Ray, Vec3};
use crossrt::relu::{rf_build, rf_render_ray, RfGrid};
use crossrt::Exec;
use proptest::prelude::*;

fn arb_field() -> impl Strategy<Value = RfGrid> {
    prop::collection::vec((0.0f32..4.0, 0.0f32..1.0, 0.0f32..1.0, 0.0f32..1.0), 27).prop_map(|cells| RfGrid {
        dims: [3, 3, 3],
        threshold: 0.5,
        cells: cells.into_iter().map(|(s, r, g, b)| [s, r, g, b]).collect(),
    })
}

fn arb_ray() -> impl Strategy<Value = Ray> {
    (prop::array::uniform3(-1.0f32..1.0), prop::array::uniform3(0.0f32..3.0)).prop_map(|(d, target)| {
        let d = Vec3::from_array(d);
        let d = if d.length() < 1e-3 { Vec3::new(0.0, 0.0, 1.0) } else { d.normalize() };
        let target = Vec3::from_array(target);
        Ray::new(target - d * 8.0, d, 0.0, f32::INFINITY)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn output_is_energy_bounded(grid in arb_field(), ray in arb_ray()) {
        prop_assume!(grid.cells.iter().any(|c| c[0] > grid.threshold));
        let field = rf_build(Exec::Sequential, &grid, grid.threshold).unwrap();
        let s = rf_render_ray(&field, &ray).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.transmittance));
        for k in 0..3 {
            let max = field.data.iter().map(|d| d[k + 1]).fold(0.0f32, f32::max);
            prop_assert!(s.rgb[k] >= 0.0 && s.rgb[k] <= max * (1.0 + 1e-5), "{} > {}", s.rgb[k], max);
        }
    }

    #[test]
    fn denser_voxels_never_let_more_light_through(grid in arb_field(), ray in arb_ray(), pick in 0usize..27, extra in 0.0f32..10.0) {
        prop_assume!(grid.cells[pick][0] > grid.threshold);
        let field = rf_build(Exec::Sequential, &grid, grid.threshold).unwrap();
        let before = rf_render_ray(&field, &ray).unwrap().transmittance;
        let mut denser = grid.clone();
        denser.cells[pick][0] += extra;
        let field = rf_build(Exec::Sequential, &denser, denser.threshold).unwrap();
        let after = rf_render_ray(&field, &ray).unwrap().transmittance;
        prop_assert!(after <= before, "{after} > {before}");
    }
}

#[test]
fn parallel_build_matches_sequential() {
    let grid = crossrt::procedural::random_field(1, [12, 12, 12], 0.4, 2.0);
    let a = rf_build(Exec::Parallel, &grid, grid.threshold).unwrap();
    let b = rf_build(Exec::Sequential, &grid, grid.threshold).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.tree.leaf_count(), a.positions.len());
}

#[test]
fn invalid_fields_are_rejected() {
    let bad = RfGrid { dims: [2, 1, 1], threshold: 0.0, cells: vec![[1.0, 0.0, 0.0, 0.0]] };
    assert!(rf_build(Exec::Sequential, &bad, 0.0).is_err());
    let negative = RfGrid { dims: [1, 1, 1], threshold: 0.0, cells: vec![[-1.0, 0.0, 0.0, 0.0]] };
    assert!(rf_build(Exec::Sequential, &negative, 0.0).is_err());
}
