use proptest::prelude::*;
use tcm_core::bench::{run_bench, sample_ratio, BenchId, EnsembleConfig};
use tcm_core::random::random_band_limited_field;
use tcm_core::Grid;

fn id_strategy() -> impl Strategy<Value = BenchId> {
    prop::sample::select(BenchId::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ratios_are_scale_invariant(
        id in id_strategy(),
        seed in any::<u64>(),
        lambda in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
        alpha in 1.25f64..2.49,
    ) {
        let g = Grid::new([16, 8, 12], [2.0, 5.0, 3.0]).unwrap();
        let psi = random_band_limited_field(&g, 2, seed).unwrap();
        let a = sample_ratio(id, &psi, alpha).unwrap().unwrap();
        let b = sample_ratio(id, &psi.scaled(lambda), alpha).unwrap().unwrap();
        prop_assert!(a.is_finite() && a > 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a, "{} vs {}", a, b);
    }

    #[test]
    fn nested_ensembles_have_nondecreasing_max(id in id_strategy(), base in any::<u32>(), k in 1usize..8) {
        let g = Grid::cube(8).unwrap();
        let small = run_bench(id, &EnsembleConfig::new(g.clone(), k, 2, base as u64)).unwrap();
        let large = run_bench(id, &EnsembleConfig::new(g, k + 4, 2, base as u64)).unwrap();
        prop_assert!(large.max_ratio >= small.max_ratio);
        prop_assert_eq!(&large.samples[..k], &small.samples[..]);
    }
}

#[test]
fn reports_are_bitwise_reproducible() {
    let g = Grid::cube(16).unwrap();
    for id in BenchId::ALL {
        let cfg = EnsembleConfig::new(g.clone(), 30, 5, 1234);
        let a = run_bench(id, &cfg).unwrap();
        let b = run_bench(id, &cfg).unwrap();
        assert_eq!(a.max_ratio.to_bits(), b.max_ratio.to_bits());
        assert_eq!(a.argmax_seed, b.argmax_seed);
        let bits = |r: &tcm_core::bench::BenchReport| -> Vec<Option<u64>> {
            r.samples.iter().map(|(_, x)| x.map(f64::to_bits)).collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }
}
