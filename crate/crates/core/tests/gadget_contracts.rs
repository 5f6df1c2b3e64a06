use trainyard::gadgets::{verify, GadgetKind, VerifyMode};

#[test]
fn catalog_passes_sampled_verification() {
    for kind in GadgetKind::catalog() {
        let r = verify(kind, VerifyMode::Sampled { samples: 5_000, seed: 11 }).unwrap();
        println!(
            "{:<14} cells {:>3} viable {:>6} adversarial {:>6} violations {} {} ms",
            kind.name(),
            r.free_cells,
            r.viable_layouts,
            r.adversarial_checked,
            r.violations,
            r.elapsed_ms
        );
        assert!(r.passed(), "{r:#?}");
    }
}

#[test]
fn one_way_and_terminus_verify_exhaustively() {
    for kind in [GadgetKind::OneWay, GadgetKind::Terminus] {
        let r = verify(kind, VerifyMode::Exhaustive { bound: 6 }).unwrap();
        println!("{} leaves {} viable {} {} ms", kind.name(), r.layouts_checked, r.viable_layouts, r.elapsed_ms);
        assert!(r.passed(), "{r:#?}");
    }
}
