//! Property tests for the numeric and state-machine invariants, plus the
//! slower cross-allocation simulator checks.

use proptest::prelude::*;

use lora_esl_core::adr::{
    rssi_adr_step, snr_adr_step, AdrAction, RssiAdrState, SfStepDirection, SnrAdrState,
    TP_MAX_DBM, TP_MIN_DBM,
};
use lora_esl_core::deployment::{arithmetic_allocation, fibonacci_allocation};
use lora_esl_core::geometry::Point;
use lora_esl_core::link_budget::{
    airtime, margin, path_loss, received_power_dbw, rssi, PathLossParams, RadioConfig,
    SnrFloorTable,
};

fn plain_params(ref_loss: f64, exponent: f64) -> PathLossParams<f64> {
    PathLossParams {
        ref_loss_db: ref_loss,
        ref_distance_km: 0.05,
        exponent,
        shadow_sigma_db: 0.0,
        obstacle_losses_db: vec![],
    }
}

proptest! {
    #[test]
    fn path_loss_increases_with_distance_and_exponent(
        d1 in 0.06f64..5.0,
        delta in 0.01f64..5.0,
        n1 in 0.5f64..8.0,
        dn in 0.01f64..4.0,
    ) {
        let p = plain_params(100.0, n1);
        let near = path_loss(d1, &p, 0.0).unwrap();
        let far = path_loss(d1 + delta, &p, 0.0).unwrap();
        prop_assert!(far > near);

        let steeper = plain_params(100.0, n1 + dn);
        prop_assert!(path_loss(d1 + delta, &steeper, 0.0).unwrap() > far);
    }

    #[test]
    fn rssi_tracks_loss_and_power_linearly(
        tp in 0.0f64..30.0,
        g_tx in -3.0f64..10.0,
        l_pl in 50.0f64..160.0,
        extra in 0.0f64..40.0,
    ) {
        let base = rssi(tp, g_tx, l_pl);
        // One dB of extra loss costs exactly one dB of signal.
        prop_assert!((rssi(tp, g_tx, l_pl + extra) - (base - extra)).abs() < 1e-9);
        // The composed received power is affine in transmit power.
        let rp = |t: f64| received_power_dbw(rssi(t, g_tx, l_pl), 2.15);
        prop_assert!((rp(tp + extra) - rp(tp) - extra).abs() < 1e-9);
    }

    #[test]
    fn composed_received_power_matches_direct_form(
        tp in 0.0f64..30.0,
        g_tx in -3.0f64..10.0,
        g_rx in -3.0f64..10.0,
        l_pl in 50.0f64..160.0,
    ) {
        let via_rssi = received_power_dbw(rssi(tp, g_tx, l_pl), g_rx);
        let direct = tp + g_tx - l_pl + g_rx - 30.0;
        prop_assert!((via_rssi - direct).abs() < 1e-9);
    }

    #[test]
    fn margin_is_antitone_in_the_floor(snr in -30.0f64..10.0) {
        let floors = SnrFloorTable::<f64>::default();
        let mut prev = margin(snr, 7, &floors).unwrap();
        for sf in 8..=12u8 {
            let m = margin(snr, sf, &floors).unwrap();
            prop_assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn airtime_grows_with_sf_for_any_payload(
        payload in 1u32..=255,
        bw in prop::sample::select(vec![125u32, 250, 500]),
    ) {
        let mut prev = 0.0;
        for sf in 7..=12u8 {
            let cfg = RadioConfig::<f64> {
                carrier_freq_mhz: 868.0,
                bandwidth_khz: bw,
                sf,
                cr_denominator_n: 1,
                tp_dbm: 14.0,
                payload_bytes: payload,
                preamble_symbols: 8,
                explicit_header: true,
                crc_on: true,
            };
            let t = airtime(&cfg).unwrap();
            prop_assert!(t > prev, "sf {} payload {} bw {}", sf, payload, bw);
            prev = t;
        }
    }

    #[test]
    fn allocation_totals_survive_the_split(
        first in 1u32..500,
        diff in 0u32..300,
        rings in 1usize..8,
        gws in 1u32..30,
    ) {
        let single = arithmetic_allocation(first, diff, rings, 1).unwrap();
        let split = arithmetic_allocation(first, diff, rings, gws).unwrap();
        let true_total: i64 = single.iter().map(|&c| i64::from(c)).sum();
        let split_total: i64 = split.iter().map(|&c| i64::from(c)).sum::<i64>() * i64::from(gws);
        // Half-up rounding moves each ring by at most gws/2 devices.
        let bound = rings as i64 * i64::from(gws) / 2 + rings as i64;
        prop_assert!((split_total - true_total).abs() <= bound);
    }

    #[test]
    fn fibonacci_split_preserves_any_total(total in 1u32..100_000, rings in 1usize..10) {
        let counts = fibonacci_allocation(total, rings).unwrap();
        prop_assert_eq!(counts.iter().map(|&c| u64::from(c)).sum::<u64>(), u64::from(total));
    }

    #[test]
    fn kmeans_assigns_every_device_to_its_nearest_centroid(
        seed in 0u64..500,
        n in 4usize..40,
        k in 1usize..4,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let devices: Vec<Point<f64>> = (0..n)
            .map(|_| Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let k = k.min(n);
        let c = lora_esl_core::cluster::kmeans_cluster(&devices, k, 50, 1e-12, seed).unwrap();
        for (i, p) in devices.iter().enumerate() {
            let assigned = p.distance_sq(&c.centroids[c.assignment[i]]);
            for centroid in &c.centroids {
                prop_assert!(assigned <= p.distance_sq(centroid) + 1e-9);
            }
        }
    }

    #[test]
    fn rssi_ladder_stays_inside_the_band(measurements in prop::collection::vec(-160.0f64..-90.0, 1..40)) {
        let mut state = RssiAdrState::new(TP_MIN_DBM, -123.0);
        for m in measurements {
            let d = rssi_adr_step(&state, m);
            state = d.next;
            prop_assert!((TP_MIN_DBM..=TP_MAX_DBM).contains(&state.tp_dbm));
            if let AdrAction::AdjustTp { new_tp_dbm } = d.action {
                prop_assert!((TP_MIN_DBM..=TP_MAX_DBM).contains(&new_tp_dbm));
                prop_assert_eq!((new_tp_dbm - TP_MIN_DBM) % 3.0, 0.0);
            }
        }
    }

    #[test]
    fn snr_budget_is_conserved_and_exhaustion_alerts(
        first_snr in -5.0f64..20.0,
        measurements in prop::collection::vec(-40.0f64..20.0, 1..30),
    ) {
        let floors = SnrFloorTable::<f64>::default();
        let mut state = SnrAdrState::new(7, 0.0, SfStepDirection::Robustness);
        let d = snr_adr_step(&state, first_snr, &floors).unwrap();
        state = d.next;
        let invariant = state.n_step.unwrap() + state.dr_idx;
        for m in measurements {
            let d = snr_adr_step(&state, m, &floors).unwrap();
            state = d.next;
            prop_assert_eq!(state.n_step.unwrap() + state.dr_idx, invariant);
            prop_assert!((7..=12).contains(&state.sf));
            if state.n_step == Some(0) {
                // No budget: the machine can only alert.
                let again = snr_adr_step(&state, m, &floors).unwrap();
                prop_assert_eq!(again.action, AdrAction::UnsuccessfulTransmission);
            }
        }
    }
}

/// A weak link recovers through the power ladder as long as its shortfall
/// is under the 15 dB the five steps can add.
#[test]
fn rssi_ladder_recovers_links_less_than_15db_short() {
    for shortfall_db in [1.0, 5.0, 9.0, 14.9] {
        let l_pl = 123.0 + 2.15 + shortfall_db + TP_MIN_DBM; // rssi = -123 - shortfall at 14 dBm
        let mut state = RssiAdrState::new(TP_MIN_DBM, -123.0);
        let mut recovered = false;
        for _ in 0..8 {
            let measured = rssi(state.tp_dbm, 2.15, l_pl);
            let d = rssi_adr_step(&state, measured);
            state = d.next;
            if d.action == AdrAction::SendNewPacket {
                recovered = true;
                break;
            }
        }
        assert!(recovered, "shortfall {shortfall_db} dB should recover");
    }
    // 16 dB short stays unreachable and the ladder exhausts.
    let l_pl = 123.0 + 2.15 + 16.0 + TP_MIN_DBM;
    let mut state = RssiAdrState::new(TP_MIN_DBM, -123.0);
    let mut last = AdrAction::SendNewPacket;
    for _ in 0..8 {
        let d = rssi_adr_step(&state, rssi(state.tp_dbm, 2.15, l_pl));
        state = d.next;
        last = d.action;
    }
    assert_eq!(last, AdrAction::UnsuccessfulTransmission);
}

/// The Fibonacci baseline loads the far edge and must lose at least as much
/// of the outermost ring as the arithmetic split at the same totals.
#[test]
fn fibonacci_far_ring_suffers_at_least_as_much() {
    use lora_esl_core::config::{AllocationKind, ScenarioFile};
    use lora_esl_core::simulator::{compute_plr, run_scenario, PolicyKind};

    let mut arith = ScenarioFile::stock(PolicyKind::Rssi, 1);
    arith.traffic.horizon_s = 14_400.0;
    let mut fib = arith.clone();
    fib.deployment.allocation.kind = AllocationKind::Fibonacci;
    fib.deployment.allocation.total = 2200;

    let ra = run_scenario(&arith.to_scenario().unwrap()).unwrap();
    let rf = run_scenario(&fib.to_scenario().unwrap()).unwrap();
    let outer = ra.per_ring.len() - 1;
    let plr_arith = compute_plr(&ra, outer).unwrap();
    let plr_fib = compute_plr(&rf, outer).unwrap();
    assert!(
        plr_fib >= plr_arith,
        "outermost-ring PLR: fibonacci {plr_fib:.4} vs arithmetic {plr_arith:.4}"
    );
}
