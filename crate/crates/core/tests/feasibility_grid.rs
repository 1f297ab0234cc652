use ia_feedback::feasibility::{check_necessary_enum, check_necessary_flow, check_sufficient};
use ia_feedback::feedback::{feedback_dimension, FeedbackProfile};
use ia_feedback::network::NetworkConfig;
use ia_feedback::profile_opt::{d_lower_bound, g_one, greedy_profile, n_zero, ProfileError};
use proptest::prelude::*;

fn valid_configs(g_max: usize, k_max: usize, ant_max: usize, d_max: usize) -> Vec<NetworkConfig> {
    let mut out = Vec::new();
    for g in 2..=g_max {
        for k in 1..=k_max {
            for d in 1..=d_max {
                for n in 1..=ant_max {
                    for m in 1..=ant_max {
                        let cfg = NetworkConfig::new(g, k, n, m, d);
                        if cfg.validate().is_ok() {
                            out.push(cfg);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Every `m` vector constant within each cell, every `g`, every `n`.
fn cell_uniform_profiles(cfg: &NetworkConfig) -> Vec<FeedbackProfile> {
    let mut ms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..cfg.cells {
        ms = ms
            .into_iter()
            .flat_map(|prefix| {
                (1..=cfg.ms_antennas).map(move |m| {
                    let mut v = prefix.clone();
                    v.push(m);
                    v
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for g in 0..=cfg.cells {
        let mut ns: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..g {
            ns = ns
                .into_iter()
                .flat_map(|prefix| {
                    (1..=cfg.bs_antennas).map(move |n| {
                        let mut v = prefix.clone();
                        v.push(n);
                        v
                    })
                })
                .collect();
        }
        for m in &ms {
            for n in &ns {
                let grid = m.iter().map(|&mj| vec![mj; cfg.users]).collect();
                out.push(FeedbackProfile::new(grid, g, n.clone()));
            }
        }
    }
    out
}

#[test]
fn enumeration_and_flow_agree_on_grid() {
    let mut checked = 0usize;
    let mut feasible = 0usize;
    for cfg in valid_configs(3, 2, 5, 2) {
        for p in cell_uniform_profiles(&cfg) {
            let e = check_necessary_enum(&p, &cfg).unwrap();
            let f = check_necessary_flow(&p, &cfg).unwrap();
            assert_eq!(e.necessary_ok, f.necessary_ok, "{cfg:?} {p:?}");
            if let Some(w) = &f.witness {
                assert!(w.is_valid(&p, &cfg), "{cfg:?} {p:?}");
                feasible += 1;
            }
            checked += 1;
        }
    }
    assert!(checked > 10_000 && feasible > 1_000, "{checked} {feasible}");
}

fn arb_case() -> impl Strategy<Value = (NetworkConfig, FeedbackProfile)> {
    (2usize..=3, 1usize..=2, 1usize..=5, 1usize..=5, 1usize..=2)
        .prop_filter("valid config", |&(g, k, n, m, d)| {
            NetworkConfig::new(g, k, n, m, d).validate().is_ok()
        })
        .prop_flat_map(|(g, k, n, m, d)| {
            let cfg = NetworkConfig::new(g, k, n, m, d);
            (
                Just(cfg),
                proptest::collection::vec(1..=m, g * k),
                (0..=g).prop_flat_map(move |gi| proptest::collection::vec(1..=n, gi)),
            )
        })
        .prop_map(|(cfg, flat, n)| {
            let m = flat.chunks(cfg.users).map(|c| c.to_vec()).collect();
            let g = n.len();
            (cfg, FeedbackProfile::new(m, g, n))
        })
}

/// Profiles near the feasible region: large `m`, `n ≥ Kd`.
fn arb_rich_case() -> impl Strategy<Value = (NetworkConfig, FeedbackProfile)> {
    (2usize..=3, 1usize..=2, 1usize..=5, 1usize..=5, 1usize..=2)
        .prop_filter("valid config", |&(g, k, n, m, d)| {
            NetworkConfig::new(g, k, n, m, d).validate().is_ok()
        })
        .prop_flat_map(|(g, k, n, m, d)| {
            let cfg = NetworkConfig::new(g, k, n, m, d);
            (
                Just(cfg),
                proptest::collection::vec(m.div_ceil(2)..=m, g * k),
                (0..=g).prop_flat_map(move |gi| proptest::collection::vec(k * d..=n, gi)),
            )
        })
        .prop_map(|(cfg, flat, n)| {
            let m = flat.chunks(cfg.users).map(|c| c.to_vec()).collect();
            let g = n.len();
            (cfg, FeedbackProfile::new(m, g, n))
        })
}

fn feasible(p: &FeedbackProfile, cfg: &NetworkConfig) -> bool {
    check_necessary_flow(p, cfg).unwrap().necessary_ok
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn per_ms_profiles_agree((cfg, p) in arb_case()) {
        let e = check_necessary_enum(&p, &cfg).unwrap();
        let f = check_necessary_flow(&p, &cfg).unwrap();
        prop_assert_eq!(e.necessary_ok, f.necessary_ok);
        let s = check_sufficient(&p, &cfg).unwrap();
        prop_assert!(!s.sufficient_ok || s.necessary_ok);
    }

    #[test]
    fn more_feedback_never_hurts((cfg, p) in arb_rich_case(), pick in 0usize..64) {
        if !feasible(&p, &cfg) {
            return Ok(());
        }
        let (j, k) = (pick % cfg.cells, (pick / cfg.cells) % cfg.users);
        if p.m[j][k] < cfg.ms_antennas {
            let mut q = p.clone();
            q.m[j][k] += 1;
            prop_assert!(feasible(&q, &cfg));
        }
        if p.g > 0 {
            let i = pick % p.g;
            if p.n[i] < cfg.bs_antennas {
                let mut q = p.clone();
                q.n[i] += 1;
                prop_assert!(feasible(&q, &cfg));
            }
        }
        if p.g < cfg.cells && cfg.bs_antennas >= cfg.kd() {
            let mut q = p.clone();
            q.g += 1;
            q.n.push(cfg.bs_antennas);
            prop_assert!(feasible(&q, &cfg));
        }
    }
}

#[test]
fn greedy_properties_on_grid() {
    let mut solved = 0;
    for g in 2..=5 {
        for k in 1..=3 {
            for d in 1..=2 {
                let kd = k * d;
                for n in kd..=g * kd + d {
                    for m in d..=(g - 1) * kd + d {
                        let cfg = NetworkConfig::new(g, k, n, m, d);
                        if cfg.validate().is_err() || n_zero(&cfg) <= kd {
                            continue;
                        }
                        match greedy_profile(&cfg) {
                            Ok(out) => {
                                let v = check_sufficient(&out.profile, &cfg).unwrap();
                                assert!(v.sufficient_ok, "{cfg:?} {:?}", out.profile);
                                assert!(out.g >= g_one(&cfg).unwrap(), "{cfg:?}");
                                assert!(out.dimension <= out.dimension_initial, "{cfg:?}");
                                assert_eq!(out.dimension, feedback_dimension(&out.profile, &cfg).unwrap());
                                assert!(d_lower_bound(&cfg).unwrap() <= out.dimension as i64, "{cfg:?}");
                                solved += 1;
                            }
                            Err(ProfileError::Unachievable { .. }) => {
                                let full = FeedbackProfile::uniform(&cfg, m, &vec![n_zero(&cfg); g]);
                                assert!(!check_necessary_flow(&full, &cfg).unwrap().necessary_ok, "{cfg:?}");
                            }
                            Err(e) => panic!("{cfg:?}: {e}"),
                        }
                    }
                }
            }
        }
    }
    assert!(solved > 100, "{solved}");
}

/// No feasible profile has fewer type-I BSs than g1.
#[test]
fn type_one_lower_bound_holds_for_all_feasible_profiles() {
    for cfg in valid_configs(3, 2, 5, 2) {
        let Ok(g1) = g_one(&cfg) else { continue };
        for p in cell_uniform_profiles(&cfg) {
            if p.g < g1 {
                assert!(!feasible(&p, &cfg), "{cfg:?} {p:?}");
            }
        }
    }
}
