use cgo_core::landscape::Landscape;
use cgo_core::{
    construct_mixed, construct_social, ks_critical, ks_statistic, Algorithm, CgoConfig, CostMatrix,
    Engine, MixedRuleParams, PheromoneMatrix, PheromoneParams, SelectionKernel, Tour,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(n: usize, seed: u64) -> CostMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
        .collect();
    let rows = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| ((a.0 - b.0).hypot(a.1 - b.1) + 0.5).floor() as i64)
                .collect()
        })
        .collect();
    CostMatrix::from_rows(rows).unwrap()
}

#[test]
fn mixed_with_zero_p_ind_matches_social_in_distribution() {
    let land = Landscape::new("r10", random_instance(10, 5), 20);
    let params = PheromoneParams::default();
    let mut psi = PheromoneMatrix::uniform(10, 1.0);
    // uneven trails so the kernel is not flat
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..10 {
        for j in (i + 1)..10 {
            psi.set(i, j, rng.random_range(0.1..2.0));
        }
    }
    let kernel = SelectionKernel::new(&psi, &land.d, &params);
    let parent = Tour::nearest_neighbor(&land.d, 0);
    let mixed = MixedRuleParams::with_p_ind(0.0);

    let samples = 10_000;
    let mut ra = ChaCha8Rng::seed_from_u64(1);
    let mut rb = ChaCha8Rng::seed_from_u64(2);
    let a: Vec<i64> = (0..samples)
        .map(|_| {
            construct_mixed(&parent, &kernel, &land.d, &land.nl, &mixed, &mut ra)
                .unwrap()
                .length()
        })
        .collect();
    let b: Vec<i64> = (0..samples)
        .map(|_| construct_social(&kernel, &land.d, &land.nl, &mut rb).length())
        .collect();
    let d = ks_statistic(&a, &b).unwrap();
    assert!(d < ks_critical(0.01, samples, samples), "D = {d}");
}

#[test]
fn mixed_with_high_p_ind_differs_from_social() {
    // the test above must be able to fail
    let land = Landscape::new("r10", random_instance(10, 5), 20);
    let kernel = SelectionKernel::new(
        &PheromoneMatrix::uniform(10, 1.0),
        &land.d,
        &PheromoneParams::default(),
    );
    let worst_parent = {
        let mut best = Tour::nearest_neighbor(&land.d, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t = Tour::random(&land.d, &mut rng);
            if t.length() > best.length() {
                best = t;
            }
        }
        best
    };
    let mixed = MixedRuleParams::with_p_ind(0.9);
    let mut ra = ChaCha8Rng::seed_from_u64(1);
    let mut rb = ChaCha8Rng::seed_from_u64(2);
    let a: Vec<i64> = (0..2000)
        .map(|_| {
            construct_mixed(&worst_parent, &kernel, &land.d, &land.nl, &mixed, &mut ra)
                .unwrap()
                .length()
        })
        .collect();
    let b: Vec<i64> = (0..2000)
        .map(|_| construct_social(&kernel, &land.d, &land.nl, &mut rb).length())
        .collect();
    assert!(ks_statistic(&a, &b).unwrap() > ks_critical(0.01, 2000, 2000));
}

#[test]
fn cgo_as_without_inheritance_reproduces_mmas_runs() {
    let land = Landscape::new("r50", random_instance(50, 11), 20);
    for seed in 1..=5 {
        let cfg = CgoConfig {
            agents: 5,
            cycles: 40,
            mixed: MixedRuleParams::with_p_ind(0.0),
            seed,
            ..Default::default()
        };
        for (cgo, mmas) in [
            (Algorithm::CgoAs, Algorithm::Mmas),
            (Algorithm::CgoAs3opt, Algorithm::Mmas3opt),
        ] {
            let a = Engine::new(&land, cgo, cfg.clone()).unwrap().run().unwrap();
            let b = Engine::new(&land, mmas, cfg.clone())
                .unwrap()
                .run()
                .unwrap();
            assert_eq!(a.trace.without_time(), b.trace.without_time());
            assert_eq!(a.best.tour, b.best.tour);
        }
    }
}
