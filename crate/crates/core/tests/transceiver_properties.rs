use ia_feedback::cmatrix::{complex_gaussian, C64};
use ia_feedback::feedback::{apply_filter, fixed_outer_precoders, FeedbackProfile};
use ia_feedback::network::{draw_channels, ChannelSet, NetworkConfig};
use ia_feedback::profile_opt::greedy_profile;
use ia_feedback::rng::stream;
use ia_feedback::transceiver::{ailm_solve, leakage, reconstruct, verify_ia, SolverOptions, TransceiverSet};
use rand::Rng;

fn reference() -> (NetworkConfig, FeedbackProfile) {
    let cfg = NetworkConfig::new(3, 2, 4, 4, 1);
    (cfg, greedy_profile(&cfg).unwrap().profile)
}

fn truncated_receivers() -> (NetworkConfig, FeedbackProfile) {
    let cfg = NetworkConfig::new(2, 3, 5, 3, 1);
    (cfg, FeedbackProfile::uniform(&cfg, 2, &[5, 5]))
}

/// Redraws every channel entry the profile never feeds back: rows past
/// `m_jk`, and columns past `n_i` of links from type-I BSs.
fn redraw_discarded(ch: &ChannelSet, p: &FeedbackProfile, cfg: &NetworkConfig, seed: u64) -> ChannelSet {
    let mut rng = stream(seed, "redraw", 0);
    let mut out = ch.clone();
    for (j, k) in cfg.ms_iter() {
        for i in 0..cfg.cells {
            let fresh = complex_gaussian(cfg.ms_antennas, cfg.bs_antennas, &mut rng);
            let h = out.h_mut(j, k, i);
            for r in 0..cfg.ms_antennas {
                for c in 0..cfg.bs_antennas {
                    let kept_col = !p.is_type_one(i) || c < p.n[i];
                    if r >= p.m(j, k) || !kept_col {
                        h[(r, c)] = fresh[(r, c)];
                    }
                }
            }
        }
    }
    out
}

fn design(ch: &ChannelSet, p: &FeedbackProfile, cfg: &NetworkConfig, seed: u64) -> Option<TransceiverSet> {
    let t2 = fixed_outer_precoders(cfg, p, &mut stream(seed, "t2", 0)).unwrap();
    let eff = apply_filter(ch, p, &t2, cfg).unwrap();
    let opts = SolverOptions {
        seed,
        ..SolverOptions::default()
    };
    let sol = ailm_solve(&eff, p, cfg, &opts).unwrap();
    (sol.leakage() < 1e-12).then(|| reconstruct(&sol, &eff, &t2, p, cfg).unwrap())
}

fn check_partial_csi_suffices(cfg: NetworkConfig, p: FeedbackProfile) {
    let mut aligned = 0;
    for seed in 0..100 {
        let ch = draw_channels(&cfg, &mut stream(seed, "channels", 0)).unwrap();
        let Some(ts) = design(&ch, &p, &cfg, seed) else { continue };
        aligned += 1;
        let fresh = redraw_discarded(&ch, &p, &cfg, seed);
        assert_ne!(fresh, ch);
        let again = design(&fresh, &p, &cfg, seed).expect("same effective CSI");
        assert_eq!(again, ts, "seed {seed}");
        let report = verify_ia(&fresh, &ts, &cfg, 1e-7);
        assert!(report.passes(), "seed {seed}: {report:?}");
        assert!(verify_ia(&ch, &ts, &cfg, 1e-7).passes());
    }
    assert!(aligned >= 95, "{aligned}/100 runs reached I < 1e-12");
}

#[test]
fn reference_network_needs_only_fed_back_entries() {
    let (cfg, p) = reference();
    check_partial_csi_suffices(cfg, p);
}

#[test]
fn truncated_receivers_need_only_fed_back_entries() {
    let (cfg, p) = truncated_receivers();
    check_partial_csi_suffices(cfg, p);
}

#[test]
fn leakage_ignores_link_phases() {
    let (cfg, p) = reference();
    for seed in 0..10 {
        let ch = draw_channels(&cfg, &mut stream(seed, "channels", 0)).unwrap();
        let t2 = fixed_outer_precoders(&cfg, &p, &mut stream(seed, "t2", 0)).unwrap();
        let eff = apply_filter(&ch, &p, &t2, &cfg).unwrap();
        let mut rng = stream(seed, "phases", 0);
        let rotated = eff.map_links(|_, link| link.h.scale(C64::from_polar(1.0, rng.random_range(0.0..6.3))));
        let opts = SolverOptions {
            max_iters: 50,
            seed,
            ..SolverOptions::default()
        };
        let sol = ailm_solve(&eff, &p, &cfg, &opts).unwrap();
        let same = leakage(&rotated, &sol.t_tilde, &sol.u_tilde, &p, &cfg).unwrap();
        assert!((same - sol.leakage()).abs() < 1e-12);
        let sol_rot = ailm_solve(&rotated, &p, &cfg, &opts).unwrap();
        assert!((sol_rot.leakage() - sol.leakage()).abs() < 1e-12, "{} {}", sol_rot.leakage(), sol.leakage());
    }
}
