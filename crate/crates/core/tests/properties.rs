use std::collections::BTreeSet;

use proptest::prelude::*;
use vc_compress::approx::{epsilon_approximation, ApproxConfig, ProbabilityVector};
use vc_compress::game::{solve_exact, solve_mw, GameConfig, PayoffMatrix};
use vc_compress::scheme::{decode_info, encode_info, Scheme, SchemeConfig};
use vc_compress::{BitRow, CompressedSample, ConceptClass, LabeledSample};

/// Patterns realized on `set`, as bitmasks.
fn patterns(class: &ConceptClass, set: &[usize]) -> BTreeSet<u32> {
    class
        .rows()
        .iter()
        .map(|r| {
            set.iter()
                .enumerate()
                .fold(0u32, |acc, (i, &x)| acc | (u32::from(r.get(x)) << i))
        })
        .collect()
}

fn brute_shatters(class: &ConceptClass, set: &[usize]) -> bool {
    patterns(class, set).len() == 1 << set.len()
}

/// Calls `f` on every `k`-subset of `0..n` until it returns true.
fn any_subset(n: usize, k: usize, start: usize, set: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if set.len() == k {
        return f(set);
    }
    for x in start..n {
        set.push(x);
        if any_subset(n, k, x + 1, set, f) {
            return true;
        }
        set.pop();
    }
    false
}

/// VC dimension by trying every subset of every size a class of this many
/// concepts could shatter.
fn brute_vc(class: &ConceptClass) -> usize {
    let n = class.domain_size();
    (0..=n)
        .take_while(|&k| 1usize << k <= class.len())
        .filter(|&k| any_subset(n, k, 0, &mut Vec::new(), &mut |s| brute_shatters(class, s)))
        .max()
        .unwrap_or(0)
}

fn class_strategy(max_n: usize, max_rows: usize) -> impl Strategy<Value = ConceptClass> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), n), 1..=max_rows).prop_map(move |rows| {
            ConceptClass::from_rows_dedup(n, rows.into_iter().map(BitRow::from_bools).collect()).unwrap()
        })
    })
}

fn matrix_strategy(max: usize) -> impl Strategy<Value = PayoffMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(any::<bool>(), r * c)
            .prop_map(move |bits| PayoffMatrix::from_fn(r, c, |i, j| bits[i * c + j]).unwrap())
    })
}

/// Exact `max_T |mu(T) - freq(T)|` computed from scratch.
fn oracle_deviation(class: &ConceptClass, mu: &[f64], items: &[usize]) -> f64 {
    class
        .rows()
        .iter()
        .map(|r| {
            let mass: f64 = (0..class.domain_size()).filter(|&x| r.get(x)).map(|x| mu[x]).sum();
            let hits = items.iter().filter(|&&x| r.get(x)).count();
            (mass - hits as f64 / items.len() as f64).abs()
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vc_matches_brute_force(class in class_strategy(12, 40)) {
        let d = class.vc_dimension();
        prop_assert_eq!(d, brute_vc(&class));
        let witness = class.largest_shattered_set();
        prop_assert_eq!(witness.len(), d);
        prop_assert!(brute_shatters(&class, &witness));
    }

    #[test]
    fn shattering_is_monotone(class in class_strategy(8, 30), mask in 0u32..256) {
        let n = class.domain_size();
        let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let shattered = class.shatters(&set).unwrap().is_some();
        prop_assert_eq!(shattered, brute_shatters(&class, &set));
        if shattered {
            for drop in 0..set.len() {
                let sub: Vec<usize> = set.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &x)| x).collect();
                prop_assert!(class.shatters(&sub).unwrap().is_some());
            }
        }
    }

    #[test]
    fn dual_dimension_bound(class in class_strategy(10, 40)) {
        let d = brute_vc(&class);
        let dual = class.dual();
        let dual_d = brute_vc(&dual.class);
        prop_assert!(dual_d < 1 << (d + 1));
        prop_assert_eq!(dual.class.vc_dimension(), dual_d);
        for (x, &c) in dual.point_to_concept.iter().enumerate() {
            for concept in 0..class.len() {
                prop_assert_eq!(dual.class.value(c, concept), class.value(concept, x));
            }
        }
    }

    #[test]
    fn double_dual_keeps_concepts(class in class_strategy(10, 30)) {
        let dd = class.dual().class.dual().class;
        prop_assert_eq!(dd.len(), class.len());
        prop_assert_eq!(dd.vc_dimension(), class.vc_dimension());
    }

    #[test]
    fn approximation_certificates(
        class in class_strategy(8, 20),
        raw in prop::collection::vec(0.0f64..1.0, 8),
        seed in any::<u64>(),
    ) {
        let n = class.domain_size();
        let mut w = raw[..n].to_vec();
        w[0] += 0.01;
        let mu = ProbabilityVector::normalized(w).unwrap();
        let cfg = ApproxConfig::default();
        for eps in [0.25, 0.125] {
            let cert = epsilon_approximation(&class, &mu, eps, seed, &cfg).unwrap();
            prop_assert!(cert.verify(&class, &mu));
            let items = cert.multiset.expand();
            let dev = oracle_deviation(&class, mu.weights(), &items);
            prop_assert!(dev <= eps + 1e-12);
            prop_assert!((dev - cert.max_deviation).abs() < 1e-12);
            // same seed, same certificate
            prop_assert_eq!(&cert, &epsilon_approximation(&class, &mu, eps, seed, &cfg).unwrap());
        }
    }

    #[test]
    fn weak_duality_and_solver_agreement(m in matrix_strategy(12)) {
        let cfg = GameConfig::default();
        let exact = solve_exact(&m, &cfg).unwrap();
        let p = exact.row_strategy.weights();
        let q = exact.col_strategy.weights();
        // row player's guarantee and column player's guarantee, from scratch
        let lower = (0..m.cols())
            .map(|j| (0..m.rows()).map(|i| if m.get(i, j) { p[i] } else { 0.0 }).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let upper = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| if m.get(i, j) { q[j] } else { 0.0 }).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lower <= upper + 1e-12);
        prop_assert!(upper - lower <= 1e-9);
        prop_assert!((exact.value_estimate - lower).abs() <= 1e-9);
        let mw = solve_mw(&m, 0.01, &cfg).unwrap();
        prop_assert!(mw.lower_value <= exact.value_estimate + 1e-9);
        prop_assert!(mw.upper_value >= exact.value_estimate - 1e-9);
        prop_assert!((mw.value_estimate - exact.value_estimate).abs() <= 0.01);
    }

    #[test]
    fn scheme_respects_ceilings(class in class_strategy(8, 24), targets in prop::collection::vec(any::<prop::sample::Index>(), 1..60), pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let target = pick.index(class.len());
        let points: Vec<usize> = targets.iter().map(|i| i.index(class.domain_size())).collect();
        let sample = class.label_points(target, &points).unwrap();
        let scheme = Scheme::new(&class, SchemeConfig::default());
        let rt = scheme.verify_round_trip(&sample, seed);
        prop_assert!(rt.passed, "{:?}", rt);
        let r = rt.report.unwrap();
        prop_assert!(r.kernel_size <= r.kernel_ceiling);
        prop_assert!(r.info_bits <= r.info_bits_ceiling);
        prop_assert!(r.t <= r.t_ceiling);
        prop_assert!(2 * r.min_votes > r.t);
    }
}

fn subsets_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (0usize..=64).prop_flat_map(|z| {
        let subset = if z == 0 {
            Just(Vec::new()).boxed()
        } else {
            prop::collection::btree_set(0..z, 0..=z.min(10))
                .prop_map(|s| s.into_iter().collect())
                .boxed()
        };
        prop::collection::vec(subset, 1..=64)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn info_codec_round_trips(subsets in subsets_strategy()) {
        let bytes = encode_info(&subsets).unwrap();
        prop_assert_eq!(decode_info(&bytes).unwrap(), subsets);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn info_codec_rejects_damage(subsets in subsets_strategy()) {
        let bytes = encode_info(&subsets).unwrap();
        for cut in 0..bytes.len() {
            prop_assert!(decode_info(&bytes[..cut]).is_err());
        }
        let mut extended = bytes.clone();
        extended.push(0);
        prop_assert!(decode_info(&extended).is_err());
        for pos in 0..bytes.len() {
            for flip in 1..=255u8 {
                let mut bad = bytes.clone();
                bad[pos] ^= flip;
                prop_assert!(decode_info(&bad).is_err(), "byte {} ^ {:#04x} accepted", pos, flip);
            }
        }
    }

    #[test]
    fn compressed_sample_bytes_round_trip(
        n in 1usize..300,
        raw in prop::collection::btree_map(0usize..300, any::<bool>(), 0..20),
        subsets in subsets_strategy(),
    ) {
        let kernel: Vec<(usize, bool)> = raw.into_iter().filter(|&(x, _)| x < n).collect();
        let k = kernel.len();
        let positions: Vec<Vec<usize>> = subsets
            .into_iter()
            .map(|s| s.into_iter().filter(|&p| p < k).collect())
            .collect();
        let info = encode_info(&positions).unwrap();
        let c = CompressedSample::new(
            n,
            kernel.iter().map(|&(x, _)| x).collect(),
            kernel.iter().map(|&(_, y)| y).collect(),
            info,
        ).unwrap();
        let bytes = c.to_bytes();
        prop_assert_eq!(&CompressedSample::from_bytes(&bytes).unwrap(), &c);
        prop_assert_eq!(c.to_bytes(), bytes.clone());
        for cut in 0..bytes.len() {
            prop_assert!(CompressedSample::from_bytes(&bytes[..cut]).is_err());
        }
        let expected = LabeledSample::new(kernel.iter().copied()).unwrap();
        prop_assert_eq!(c.kernel(), expected);
    }
}
