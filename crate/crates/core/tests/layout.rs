mod common;

use rand::Rng;
use tkd_core::*;

fn overlap(a: &Rect, b: &Rect) -> f64 {
    let w = a.right().min(b.right()) - a.x.max(b.x);
    let h = a.bottom().min(b.bottom()) - a.y.max(b.y);
    w.max(0.0) * h.max(0.0)
}

#[test]
fn records_stack_without_gaps() {
    let m = Metrics::default();
    for seed in 0..200 {
        let t = common::random_module(&mut common::rng(seed));
        let tree = layout(&t, &m);
        let mut y = 0.0;
        for r in &tree.records {
            assert!((r.rect.y - y).abs() < 1e-9, "seed {seed}");
            assert!((r.rect.width - t.template.width()).abs() < 1e-9);
            y += r.rect.height;
        }
        assert!((tree.height() - y).abs() < 1e-9);
    }
}

#[test]
fn leaves_tile_without_overlap() {
    let m = Metrics::default();
    for seed in 0..200 {
        let t = common::random_module(&mut common::rng(seed));
        let tree = layout(&t, &m);
        let visible: Vec<_> = tree.cells.iter().filter(|c| c.rect.area() > 0.0).collect();
        for (i, a) in visible.iter().enumerate() {
            let rec = &tree.records[a.path.record].rect;
            assert!(
                a.rect.x >= rec.x - 1e-9 && a.rect.right() <= rec.right() + 1e-9,
                "seed {seed}"
            );
            assert!(
                a.rect.y >= rec.y - 1e-9 && a.rect.bottom() <= rec.bottom() + 1e-9,
                "seed {seed}"
            );
            for b in &visible[i + 1..] {
                assert!(
                    overlap(&a.rect, &b.rect) < 1e-9,
                    "seed {seed}: {:?} {:?}",
                    a.path,
                    b.path
                );
            }
        }
    }
}

#[test]
fn every_point_hits_the_cell_drawn_there() {
    let m = Metrics::default();
    for seed in 0..200 {
        let mut rng = common::rng(seed);
        let t = common::random_module(&mut rng);
        let tree = layout(&t, &m);
        for _ in 0..50 {
            let x = rng.random_range(0.0..tree.width());
            let y = rng.random_range(0.0..tree.height().max(1e-6));
            match locate(&t, &m, x, y) {
                Ok(Hit::Leaf(p)) => {
                    let cell = tree.cell(&p).expect("hit leaf is laid out");
                    assert!(
                        cell.rect.contains(x, y),
                        "seed {seed}: ({x}, {y}) in {:?}",
                        cell.rect
                    );
                }
                Ok(Hit::Empty(p)) => {
                    assert!(t.node(&p).unwrap().1.children().unwrap().is_empty());
                    assert_eq!(hit_test(&t, &m, x, y).unwrap_err().code(), "empty-block");
                }
                Err(e) => assert!(tree.height() == 0.0, "seed {seed}: {e}"),
            }
        }
    }
}

#[test]
fn points_outside_are_rejected() {
    let t = common::module("spec.tks");
    let m = Metrics::default();
    for (x, y) in [(-1.0, 1.0), (195.0, 1.0), (10.0, 8.0), (10.0, -0.1)] {
        assert_eq!(hit_test(&t, &m, x, y).unwrap_err().code(), "outside-table");
    }
}

#[test]
fn insert_at_point_extends_the_hit_split() {
    let m = Metrics::default();
    for seed in 0..200 {
        let mut rng = common::rng(seed);
        let mut t = common::random_module(&mut rng);
        let before = t.clone();
        let tree = layout(&t, &m);
        let y = rng.random_range(0.0..tree.height());
        let x = rng.random_range(0.0..tree.width());
        let rec = tree
            .records
            .iter()
            .position(|r| r.rect.contains(x, y))
            .unwrap();
        match insert_at_point(&mut t, &m, x, y) {
            Ok(created) => {
                assert!(!created.is_empty());
                assert!(t.conforms(), "seed {seed}");
                assert!(
                    layout(&t, &m).height() >= tree.height() - 1e-9,
                    "seed {seed}"
                );
            }
            Err(e) => {
                assert_eq!(rec, 0, "seed {seed}: {e}");
                assert_eq!(e.code(), "header-record");
                assert_eq!(t, before);
            }
        }
    }
}

#[test]
fn renders_are_deterministic() {
    let m = Metrics::default();
    for seed in 0..50 {
        let t = common::random_module(&mut common::rng(seed));
        let again = load_module(&save_module(&t)).unwrap();
        assert_eq!(render_svg(&t, &m), render_svg(&again, &m));
        assert_eq!(render_text(&t, &m), render_text(&again, &m));
    }
}
