mod common;

use common::*;
use hybro_core::density::{build_density, overflow};
use hybro_core::metrics::{hpwl, hpwl_total};
use hybro_core::model::{clamp_to_canvas, Placement, Point};
use hybro_core::perturb::{apply, selection_count, shuffle, PerturbKind, PerturbStrategy, Scope};
use hybro_core::wirelength::{wa_net, wa_total, WaParams};
use proptest::prelude::*;

fn instance(seed: u64, macros: usize) -> Instance {
    random_instance(
        &mut rng(seed),
        &InstanceShape {
            max_cells: 30,
            max_nets: 30,
            macros,
            ..Default::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hpwl_matches_sorting_oracle(seed in any::<u64>()) {
        let inst = instance(seed, 0);
        let got = hpwl(&inst.netlist, &inst.placement);
        let want = naive_hpwl(&inst.netlist, &inst.placement);
        prop_assert!((got - want).abs() <= 1e-9 * want.max(1.0));
    }

    #[test]
    fn hpwl_is_translation_invariant(seed in any::<u64>(), dx in -50.0..50.0f64, dy in -50.0..50.0f64) {
        let inst = instance(seed, 0);
        let shifted = Placement::new(
            (0..inst.placement.len()).map(|c| {
                let p = inst.placement.get(c);
                Point::new(p.x + dx, p.y + dy)
            }).collect(),
        );
        let a = hpwl_total(&inst.netlist, &inst.placement).total;
        let b = hpwl_total(&inst.netlist, &shifted).total;
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn wa_never_exceeds_hpwl(coords in prop::collection::vec(-1e3..1e3f64, 1..30), gamma in 1e-3..1e3f64) {
        let p = WaParams::new(gamma).unwrap();
        let span = naive_net_hpwl(&coords, &[]);
        let wa = wa_net(&coords, &p);
        prop_assert!(wa <= span && wa >= 0.0, "wa {} span {}", wa, span);
    }

    #[test]
    fn wa_total_bounded_by_hpwl(seed in any::<u64>(), gamma in 0.01..100.0f64) {
        let inst = instance(seed, 0);
        let p = WaParams::new(gamma).unwrap();
        prop_assert!(wa_total(&inst.netlist, &inst.placement, &p) <= hpwl(&inst.netlist, &inst.placement) * (1.0 + 1e-12));
    }

    #[test]
    fn clamp_lands_inside_and_is_idempotent(seed in any::<u64>(), x in -1e3..1e3f64, y in -1e3..1e3f64) {
        let inst = instance(seed, 3);
        for cell in inst.netlist.cells() {
            let q = clamp_to_canvas(&inst.canvas, cell, x, y).unwrap();
            prop_assert!(q.x >= inst.canvas.xl && q.x + cell.width <= inst.canvas.xh);
            prop_assert!(q.y >= inst.canvas.yl && q.y + cell.height <= inst.canvas.yh);
            prop_assert_eq!(clamp_to_canvas(&inst.canvas, cell, q.x, q.y).unwrap(), q);
        }
    }

    #[test]
    fn overflow_is_a_fraction(seed in any::<u64>(), target in 0.1..1.0f64) {
        let inst = instance(seed, 2);
        let o = overflow(&build_density(&inst.netlist, &inst.placement, &inst.canvas), target);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&o));
    }

    #[test]
    fn selection_count_is_monotone(p in 0.01..=100.0f64, q in 0.01..=100.0f64, m in 1usize..500) {
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(selection_count(lo, m) <= selection_count(hi, m));
        prop_assert!(selection_count(hi, m) >= 1 && selection_count(hi, m) <= m);
        prop_assert_eq!(selection_count(100.0, m), m);
    }

    #[test]
    fn shuffle_is_deterministic_and_keeps_fixed_cells(seed in any::<u64>(), p in 1.0..=100.0f64, scope_all in any::<bool>()) {
        let inst = instance(seed, 4);
        let scope = if scope_all { Scope::All } else { Scope::Macros };
        let a = shuffle(&inst.placement, &inst.netlist, &inst.canvas, p, seed, scope);
        let b = shuffle(&inst.placement, &inst.netlist, &inst.canvas, p, seed, scope);
        prop_assert_eq!(&a, &b);
        for c in inst.netlist.cells().iter().filter(|c| c.is_fixed()) {
            prop_assert_eq!(a.get(c.id), inst.placement.get(c.id));
        }
    }

    #[test]
    fn every_strategy_stays_in_canvas(seed in any::<u64>(), kind in prop_oneof![
        Just(PerturbKind::Shuffle), Just(PerturbKind::ShuffleAll), Just(PerturbKind::WireMask)
    ]) {
        let inst = instance(seed, 5);
        let strategy = PerturbStrategy::new(kind, 50.0, seed).unwrap();
        let out = apply(&strategy, &inst.netlist, &inst.placement, &inst.canvas).placement;
        for c in inst.netlist.movable_cells() {
            let q = out.get(c.id);
            prop_assert!(q.x >= 0.0 && q.x + c.width <= 100.0 + 1e-9);
            prop_assert!(q.y >= 0.0 && q.y + c.height <= 100.0 + 1e-9);
        }
        for c in inst.netlist.cells().iter().filter(|c| c.is_fixed()) {
            prop_assert_eq!(out.get(c.id), inst.placement.get(c.id));
        }
    }
}
