use bdm::bdp::{bdp_classify, recurrence_ratio, BirthDeathRates};
use bdm::convergence::{
    adaptive_classify, extract_sn, extract_sn_in, reconstruct_ratio, ClassifyConfig,
};
use bdm::family::SeriesFamily;
use bdm::iterlog::{self, index_to_real, Level};
use bdm::rwalk::{rw_to_bdp, simulate, step_probabilities, DriftSpec};
use bdm::{Dd, Decision, Real};
use proptest::prelude::*;

fn level(k: u32) -> Level {
    Level::new(k).unwrap()
}

fn ulps(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    let ulp = f64::from_bits(m.to_bits() + 1) - m;
    (a - b).abs() / ulp
}

fn family() -> impl Strategy<Value = SeriesFamily> {
    prop_oneof![
        (0.1f64..4.0).prop_map(|p| SeriesFamily::PSeries { p }),
        (0.0f64..4.0).prop_map(|r| SeriesFamily::LogPower { r }),
        (1u32..=2, 0.0f64..4.0).prop_map(|(depth, r)| SeriesFamily::IterlogPower { depth, r }),
        (0.05f64..4.0).prop_map(|x| SeriesFamily::Geometric { x }),
    ]
}

proptest! {
    #[test]
    fn composition_identity(k in 2u32..=4, x in 0.01f64..700.0) {
        let inner = iterlog::iterlog::<Dd>(level(k - 1), Dd::from_f64(x));
        prop_assume!(inner.is_ok());
        let outer = iterlog::iterlog::<Dd>(level(k), Dd::from_f64(x).exp()).unwrap();
        let (a, b) = (outer.to_f64(), inner.unwrap().to_f64());
        prop_assert!(ulps(a, b) <= 2.0, "k={} x={}: {} vs {}", k, x, a, b);
    }

    #[test]
    fn zeta_weight_increases(k in 1u32..=4, u in 0.0f64..1.0) {
        let lo = iterlog::min_domain(level(k)).unwrap();
        let n = lo + ((10_000_000 - lo) as f64 * u) as u64;
        let a: f64 = iterlog::zeta_weight(level(k), n).unwrap();
        let b: f64 = iterlog::zeta_weight(level(k), n + 1).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn reconstruction_round_trip(fam in family(), k in 1u32..=4, u in 0.0f64..1.0) {
        let lo = iterlog::min_domain(level(k)).unwrap().max(fam.first_index());
        let n = ((lo as f64) * (1e7 / lo as f64).powf(u)) as u64;
        let spec = fam.ratio_spec::<f64>().unwrap();
        let (s, _) = extract_sn_in(level(k), &spec, n).unwrap();
        let back = reconstruct_ratio(level(k), n, s).unwrap();
        let want = spec.ratio(n).unwrap();
        prop_assert!(ulps(back, want) <= 8.0, "{} K={} n={}: {} vs {}", fam.label(), k, n, back, want);
    }

    #[test]
    fn next_level_identity(fam in family(), k in 1u32..=3, u in 0.0f64..1.0) {
        // s^(K+1) = (s^(K) - 1) ln_(K+1) n
        let lo = iterlog::min_domain(level(k + 1)).unwrap().max(fam.first_index()).max(100);
        let n = ((lo as f64) * (1e7 / lo as f64).powf(u)) as u64;
        let spec = fam.ratio_spec::<Dd>().unwrap();
        let (s_k, _) = extract_sn_in(level(k), &spec, n).unwrap();
        let (s_next, _) = extract_sn_in(level(k + 1), &spec, n).unwrap();
        let l: Dd = iterlog::iterlog(level(k + 1), index_to_real::<Dd>(n).unwrap()).unwrap();
        let predicted = ((s_k - Dd::one()) * l).to_f64();
        let scale = predicted.abs().max(1.0);
        prop_assert!((s_next.to_f64() - predicted).abs() <= 1e-12 * scale);
    }

    #[test]
    fn step_probabilities_conserve_mass(a in 0.001f64..0.499, s in 1u64..1_000_000) {
        let spec = DriftSpec::<f64>::constant(a, 1.0).unwrap();
        let (up, down) = step_probabilities(&spec, s).unwrap();
        prop_assert_eq!(up + down, 1.0);
        prop_assert!(up > 0.0 && up < 1.0 && down > 0.0 && down < 1.0);
    }

    #[test]
    fn walk_to_chain_mapping(a in 0.001f64..0.499, n in 1u64..10_000_000) {
        let rates = rw_to_bdp(&DriftSpec::<f64>::constant(a, 1.0).unwrap()).unwrap();
        let (l, m) = (rates.lambda(n).unwrap(), rates.mu(n).unwrap());
        let lhs = (l - m) / (l + m);
        let rhs = 2.0 * a / n as f64;
        prop_assert!(ulps(lhs, rhs) <= 4.0 || (lhs - rhs).abs() <= 4.0 * f64::EPSILON * l, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn chain_ratio_matches_closed_form(c in 0.0f64..5.0, n in 1u64..100_000) {
        // lambda/mu = 1 + c/n gives a_n = prod_{k<=n} k/(k+c)
        let spec = recurrence_ratio(&BirthDeathRates::<f64>::power_ratio(c).unwrap());
        let expected = 1.0 + c / (n + 1) as f64;
        prop_assert!(ulps(spec.ratio(n).unwrap(), expected) <= 2.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_schedule_independent(seed in any::<u64>(), a in 0.05f64..0.45) {
        let spec = DriftSpec::<f64>::constant(a, 1.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&spec, seed, 2_000, 64).unwrap())
        };
        prop_assert_eq!(run(1), run(3));
    }

    #[test]
    fn scaled_rates_classify_identically(c in 0.0f64..4.0) {
        let cfg = ClassifyConfig::default();
        let base = BirthDeathRates::<Dd>::power_ratio(c).unwrap();
        let scaled = base.clone().scaled(|n| Ok(Dd::from_f64(2.0 + (n % 7) as f64)));
        let a = bdp_classify(&base, &cfg).unwrap();
        let b = bdp_classify(&scaled, &cfg).unwrap();
        prop_assert_eq!(a.decision, b.decision);
    }
}

#[test]
fn classification_is_deterministic() {
    let cfg = ClassifyConfig::default();
    let spec = SeriesFamily::IterlogPower { depth: 2, r: 0.5 }
        .ratio_spec::<Dd>()
        .unwrap();
    let a = adaptive_classify(&spec, &cfg).unwrap();
    let b = adaptive_classify(&spec, &cfg).unwrap();
    assert_eq!(a, b);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| adaptive_classify(&spec, &cfg).unwrap());
    assert_eq!(a, single);
}

#[test]
fn decisive_levels_grow_at_the_next_level() {
    // a Converges verdict with s > 1 + margin means s^(K+1) keeps rising;
    // Diverges mirrors it
    for (fam, want) in [
        (SeriesFamily::PSeries { p: 2.0 }, Decision::Converges),
        (SeriesFamily::PSeries { p: 0.5 }, Decision::Diverges),
        (SeriesFamily::LogPower { r: 2.0 }, Decision::Converges),
    ] {
        let spec = fam.ratio_spec::<Dd>().unwrap();
        let v = adaptive_classify(&spec, &ClassifyConfig::default()).unwrap();
        assert_eq!(v.decision, want);
        let next = v.level.unwrap().next();
        let lo = extract_sn(next, &spec, 1_000_000).unwrap().s;
        let hi = extract_sn(next, &spec, 10_000_000).unwrap().s;
        match want {
            Decision::Converges => assert!(hi > lo, "{}", fam.label()),
            _ => assert!(hi < lo, "{}", fam.label()),
        }
    }
}
