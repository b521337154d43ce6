use vc_compress::harness::generators::{full_cube, halfspaces_grid, intervals, k_interval_unions};
use vc_compress::harness::suite::{realizable_samples, run_suite, small_classes, SuiteConfig};
use vc_compress::scheme::{decode_info, Scheme, SchemeConfig};
use vc_compress::{CompressedSample, ConceptClass};

/// Reconstruction from the compressed form alone: lowest-index consistent
/// concept per subset, then a majority vote with ties going to 0.
fn oracle_reconstruct(class: &ConceptClass, compressed: &CompressedSample) -> Vec<bool> {
    let kernel = compressed.kernel_points();
    let labels = compressed.kernel_labels();
    let subsets = decode_info(compressed.side_info()).unwrap();
    let votes: Vec<usize> = subsets
        .iter()
        .map(|positions| {
            (0..class.len())
                .find(|&c| positions.iter().all(|&p| class.value(c, kernel[p]) == labels[p]))
                .expect("kernel labels are realizable")
        })
        .collect();
    (0..class.domain_size())
        .map(|x| {
            let ones = votes.iter().filter(|&&c| class.value(c, x)).count();
            2 * ones > votes.len()
        })
        .collect()
}

#[test]
fn reconstruction_matches_independent_oracle() {
    let classes = [
        ("intervals", intervals(6).unwrap()),
        ("cube", full_cube(3).unwrap()),
        ("unions", k_interval_unions(6, 2).unwrap()),
    ];
    for (name, class) in &classes {
        let scheme = Scheme::new(class, SchemeConfig::default());
        for (i, sample) in realizable_samples(class, 4).iter().enumerate() {
            let (compressed, report) = scheme.compress(sample, i as u64).unwrap();
            let bytes = compressed.to_bytes();
            let fresh = CompressedSample::from_bytes(&bytes).unwrap();
            let expected = oracle_reconstruct(class, &fresh);
            let h = scheme.reconstruct(&fresh).unwrap();
            let got: Vec<bool> = (0..class.domain_size()).map(|x| h.predict(x)).collect();
            assert_eq!(got, expected, "{name}: sample {:?}", sample.labels());
            for (&x, &y) in sample.labels() {
                assert_eq!(expected[x], y, "{name}: label lost at {x}");
            }
            assert!(compressed.kernel_points().iter().all(|x| sample.label(*x).is_some()));
            assert!(report.kernel_size <= report.kernel_ceiling);
        }
    }
}

#[test]
fn compression_is_deterministic() {
    let class = halfspaces_grid(5, 2, 20_000, 0).unwrap();
    let scheme = Scheme::new(&class, SchemeConfig::default());
    let points: Vec<usize> = (0..200).map(|i| (i * 7 + 3) % 25).collect();
    let sample = class.label_points(101, &points).unwrap();
    let (a, ra) = scheme.compress(&sample, 9).unwrap();
    let (b, rb) = scheme.compress(&sample, 9).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
    assert_eq!(ra, rb);
}

#[test]
fn generator_counts() {
    for n in 1..=12 {
        assert_eq!(intervals(n).unwrap().len(), n * (n + 1) / 2 + 1);
    }
    // runs of ones: choose 2j boundaries among n + 1 gaps
    let binom = |n: usize, k: usize| {
        if k > n {
            0
        } else {
            (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
        }
    };
    for n in 1..=10 {
        for k in 1..=3 {
            let expected: usize = (0..=k).map(|j| binom(n + 1, 2 * j)).sum();
            assert_eq!(k_interval_unions(n, k).unwrap().len(), expected, "n={n} k={k}");
        }
    }
    let cube = full_cube(3).unwrap();
    assert_eq!((cube.len(), cube.vc_dimension()), (8, 3));
}

#[test]
fn small_class_inventory_is_realizable_everywhere() {
    for (label, class) in small_classes().unwrap() {
        for sample in realizable_samples(&class, 2) {
            assert!(class.check_sample(&sample).is_ok(), "{label}");
        }
    }
}

#[test]
fn suite_reports_are_reproducible() {
    let config = SuiteConfig {
        seed: 11,
        cases: Some(vec![
            "singleton".into(),
            "kernel_independence".into(),
            "dual_bound".into(),
            "codec".into(),
        ]),
        scale: 0.1,
        extra_classes: Vec::new(),
    };
    let a = run_suite(&config).unwrap();
    let b = run_suite(&config).unwrap();
    assert!(a.passed);
    let ids: Vec<&str> = a.cases.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids, ["codec", "dual_bound", "kernel_independence", "singleton"]);
    let a = serde_json::to_string(&a.without_timing()).unwrap();
    let b = serde_json::to_string(&b.without_timing()).unwrap();
    assert_eq!(a, b);
}
