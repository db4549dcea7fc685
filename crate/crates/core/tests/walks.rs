//! Statistical and structural properties of the walk-on-stars estimator.

mod common;

use common::load;
use wost_implicit::wost::{estimate, estimate_indexed, grid_estimate, walk_once, walk_rng, GridSpec, WalkConfig};
use wost_implicit::Point;

fn config(scene: &wost_implicit::Scene, n: usize, seed: u64) -> WalkConfig {
    let mut cfg = WalkConfig::for_scene(scene);
    cfg.n_walks = n;
    cfg.seed = seed;
    cfg
}

#[test]
fn constant_dirichlet_with_reflection_has_zero_variance() {
    let s = load("neumann_annulus");
    for x in [[0.7, 0.0], [0.0, -0.6]] {
        let e = estimate(&s, &x, &config(&s, 200, 1)).unwrap();
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.std_error, 0.0);
    }
}

#[test]
fn neumann_walks_keep_unit_throughput() {
    let s = load("neumann_annulus");
    let cfg = config(&s, 1, 2);
    let mut reflections = 0;
    for w in 0..100 {
        let o = walk_once(&s, &[0.7, 0.0], &cfg, &mut walk_rng(2, 0, w));
        assert_eq!(o.min_throughput, 1.0);
        assert_eq!(o.max_throughput, 1.0);
        reflections += o.reflections;
    }
    assert!(reflections > 0);
}

#[test]
fn disk_recovers_linear_solution() {
    let s = load("disk");
    let e = estimate(&s, &[0.3, 0.4], &config(&s, 2000, 3)).unwrap();
    assert!((e.mean - 0.3).abs() <= 3.0 * e.std_error, "{e:?}");
}

#[test]
fn walk_values_obey_the_maximum_principle() {
    let s = load("disk");
    let cfg = config(&s, 1, 4);
    for w in 0..300 {
        let v = walk_once(&s, &[-0.6, 0.1], &cfg, &mut walk_rng(4, 0, w)).value;
        assert!((-1.0 - 1e-2..=1.0 + 1e-2).contains(&v), "{v}");
    }
    // Zero Robin data and unit Dirichlet data keep every walk in [0, 1].
    let s = load("annulus_robin");
    let cfg = config(&s, 1, 5);
    for w in 0..100 {
        let o = walk_once(&s, &[0.75, 0.0], &cfg, &mut walk_rng(5, 0, w));
        assert!((0.0..=1.0).contains(&o.value), "{o:?}");
    }
}

#[test]
fn robin_throughput_stays_in_unit_interval() {
    for name in ["annulus_robin", "blobs_robin"] {
        let s = load(name);
        let cfg = config(&s, 1, 6);
        let x = if name == "annulus_robin" { [0.3, 0.6] } else { [0.0, 0.5] };
        let mut reflections = 0;
        for w in 0..60 {
            let o = walk_once(&s, &x, &cfg, &mut walk_rng(6, 0, w));
            assert!(o.min_throughput >= 0.0 && o.max_throughput <= 1.0, "{name} {o:?}");
            assert_eq!(o.rho_clamps, 0, "{name}");
            reflections += o.reflections;
        }
        assert!(reflections > 0, "{name}");
    }
}

#[test]
fn standard_error_shrinks_with_more_walks() {
    let s = load("disk");
    let x = [0.3, 0.4];
    for seed in 0..3 {
        let small = estimate(&s, &x, &config(&s, 250, 100 + seed)).unwrap();
        let large = estimate(&s, &x, &config(&s, 1000, 200 + seed)).unwrap();
        assert!(large.std_error <= 0.6 * small.std_error, "{small:?} {large:?}");
    }
}

#[test]
fn grid_matches_linear_solution() {
    let s = load("disk");
    let grid = GridSpec { lo: Point::new(&[-1.2, -1.2]), hi: Point::new(&[1.2, 1.2]), counts: vec![9, 9] };
    let out = grid_estimate(&s, &grid, &config(&s, 300, 7));
    assert_eq!(out.len(), 81);
    let mut inside = 0;
    let mut good = 0;
    for g in &out {
        let r = g.point.norm();
        match g.estimate {
            None => assert!(r >= 1.0 - s.epsilon_shell, "{:?} should be estimated", g.point),
            Some(e) => {
                assert!(r < 1.0, "{:?} is outside", g.point);
                inside += 1;
                if (e.mean - g.point[0]).abs() <= 3.0 * e.std_error.max(1e-12) {
                    good += 1;
                }
            }
        }
    }
    assert!(inside > 30);
    assert!(good as f64 >= 0.95 * inside as f64, "{good}/{inside}");
}

#[test]
fn estimates_are_bitwise_reproducible_across_thread_counts() {
    let s = load("blobs_robin");
    let cfg = config(&s, 40, 9);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| estimate_indexed(&s, &[0.0, 0.5], 3, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(3);
    let c = run(1);
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert_eq!(a, c);
}
