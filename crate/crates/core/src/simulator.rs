//! Scenario engine.
//!
//! One run is deterministic in the scenario seed and proceeds in stages:
//! allocate ring populations, realise the geometry, freeze shadowing per
//! device-gateway link, iterate the adaptation epochs (measure per cluster,
//! step the policy state machine, retune), schedule the pure-ALOHA traffic,
//! resolve receptions and aggregate the metrics.
//!
//! A frame is delivered if its home gateway decodes it. Frames also reach
//! every other gateway whose link clears the interference floor (the
//! sensitivity minus a configurable margin), where they join that
//! gateway's overlap groups as interference — with many gateways packed
//! into the area, foreign frames contest the capture slots of the near
//! clusters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::adr::{
    rssi_adr_step, snr_adr_step, AdrAction, RssiAdrState, SfStepDirection, SnrAdrState,
};
use crate::channel::{
    co_sf_interference_filter, find_overlaps, resolve_reception, schedule_uplinks, TrafficModel,
    TransmissionEvent, UplinkSource, Verdict,
};
use crate::deployment::{
    arithmetic_allocation, cluster_devices_to_gateways, fibonacci_allocation, generate_deployment,
    tp_schedule, Deployment, GwLayout, RingPlan,
};
use crate::error::{Error, Result};
use crate::link_budget::{
    airtime, margin, noise_floor, path_loss, received_power_dbw, rssi as rssi_db, AntennaGains,
    PathLossParams, RadioConfig, SnrFloorTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Snr,
    Rssi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    Arithmetic { first_term: u32, common_diff: u32 },
    Fibonacci { total: u32 },
}

/// Initial transmit power assignment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TpInit {
    Fixed(f64),
    /// 14 dBm innermost ring, +3 dBm per ring, capped at 29 dBm.
    Schedule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Traffic {
    pub mean_interarrival_s: f64,
    pub horizon_s: f64,
}

/// Fully-resolved run parameters. Usually produced from a
/// [`crate::config::ScenarioFile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub gw_count: u32,
    pub gw_layout: GwLayout,
    pub area_km: f64,
    pub ring_radii_km: Vec<f64>,
    pub allocation: Allocation,
    pub cluster_to_nearest: bool,
    pub policy: PolicyKind,
    pub threshold_db: f64,
    pub sf_step_direction: SfStepDirection,
    pub epochs: u32,
    pub per_device_adr: bool,
    pub cf_mhz: f64,
    pub bw_khz: u32,
    pub sf_min: u8,
    pub sf_max: u8,
    pub tp_init: TpInit,
    pub payload_bytes: u32,
    pub preamble_symbols: u32,
    pub cr_denominator_n: u8,
    pub explicit_header: bool,
    pub crc_on: bool,
    pub noise_figure_db: f64,
    pub gains: AntennaGains<f64>,
    pub pathloss: PathLossParams<f64>,
    pub per_packet_fading: bool,
    pub snr_floors: SnrFloorTable<f64>,
    pub capture_db: f64,
    pub sensitivity_dbm: f64,
    pub cosf_penalty_db: f64,
    /// Frames reaching a gateway at `sensitivity - margin` or better join
    /// its overlap groups as interference.
    pub interference_margin_db: f64,
    pub threshold_rp_dbw: f64,
    pub traffic: Traffic,
    pub seed: u64,
}

impl Scenario {
    fn ring_count(&self) -> usize {
        self.ring_radii_km.len()
    }

    /// Initial SF for a ring: the range minimum plus the ring index, capped
    /// at the range maximum — near rings fast, far rings robust.
    fn ring_sf(&self, ring: usize) -> u8 {
        self.sf_min.saturating_add(ring.min(5) as u8).min(self.sf_max)
    }

    fn ring_tp(&self, ring: usize) -> f64 {
        match self.tp_init {
            TpInit::Fixed(tp) => tp,
            TpInit::Schedule => tp_schedule(ring.min(5)).expect("ring capped at 5"),
        }
    }

    fn radio_for(&self, sf: u8, tp_dbm: f64) -> RadioConfig<f64> {
        RadioConfig {
            carrier_freq_mhz: self.cf_mhz,
            bandwidth_khz: self.bw_khz,
            sf,
            cr_denominator_n: self.cr_denominator_n,
            tp_dbm,
            payload_bytes: self.payload_bytes,
            preamble_symbols: self.preamble_symbols,
            explicit_header: self.explicit_header,
            crc_on: self.crc_on,
        }
    }
}

/// Delivery and loss tallies for one slice of the traffic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub scheduled: u64,
    pub delivered: u64,
    pub lost_collision: u64,
    pub lost_capture: u64,
    pub lost_below_sensitivity: u64,
    pub lost_corrupt: u64,
    pub delivered_above_threshold: u64,
}

impl Counts {
    fn record(&mut self, verdict: Verdict, above_threshold: bool) {
        self.scheduled += 1;
        match verdict {
            Verdict::Decoded => {
                self.delivered += 1;
                if above_threshold {
                    self.delivered_above_threshold += 1;
                }
            }
            Verdict::LostCollision => self.lost_collision += 1,
            Verdict::LostCapture => self.lost_capture += 1,
            Verdict::LostBelowSensitivity => self.lost_below_sensitivity += 1,
            Verdict::LostCorrupt => self.lost_corrupt += 1,
        }
    }

    pub fn lost(&self) -> u64 {
        self.lost_collision + self.lost_capture + self.lost_below_sensitivity + self.lost_corrupt
    }

    pub fn plr(&self) -> Option<f64> {
        (self.scheduled > 0).then(|| self.lost() as f64 / self.scheduled as f64)
    }

    /// Delivered-above-threshold over everything scheduled.
    pub fn received_above_threshold_fraction(&self) -> Option<f64> {
        (self.scheduled > 0).then(|| self.delivered_above_threshold as f64 / self.scheduled as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingMetrics {
    pub ring: usize,
    pub counts: Counts,
    pub plr: Option<f64>,
    /// Means over delivered frames, measured at the home gateway.
    pub mean_rssi_dbm: Option<f64>,
    pub mean_snr_db: Option<f64>,
    pub mean_rp_dbw: Option<f64>,
    pub received_above_threshold_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfMetrics {
    pub sf: u8,
    pub scheduled: u64,
    pub delivered: u64,
}

/// One adaptation step as it happened, for traceability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdrTraceEntry {
    pub epoch: u32,
    pub gw_id: u32,
    pub ring: usize,
    pub sf: u8,
    pub tp_dbm: f64,
    /// Mean measured SNR (dB) or RSSI (dBm) fed to the step.
    pub measured_db: f64,
    pub action: AdrAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub gw_count: u32,
    pub policy: PolicyKind,
    pub seed: u64,
    pub horizon_s: f64,
    pub threshold_rp_dbw: f64,
    pub totals: Counts,
    pub total_plr: Option<f64>,
    pub received_above_threshold_fraction: Option<f64>,
    /// Of the frames that were received, the fraction whose received power
    /// clears the threshold.
    pub rp_above_threshold_of_received: Option<f64>,
    pub per_ring: Vec<RingMetrics>,
    pub per_sf: Vec<SfMetrics>,
    pub adr_trace: Vec<AdrTraceEntry>,
    /// Received power of every delivered frame, sorted ascending.
    pub delivered_rp_dbw: Vec<f64>,
}

impl MetricsReport {
    pub fn ring(&self, ring: usize) -> Option<&RingMetrics> {
        self.per_ring.get(ring)
    }
}

/// Packet-loss ratio of one ring. An empty ring is undefined, not zero.
pub fn compute_plr(report: &MetricsReport, ring: usize) -> Result<f64> {
    let rm = report
        .ring(ring)
        .ok_or_else(|| Error::domain("compute_plr", format!("no ring {ring}")))?;
    rm.counts
        .plr()
        .ok_or_else(|| Error::domain("compute_plr", format!("ring {ring} scheduled no frames; PLR undefined")))
}

/// Fraction of received (delivered) frames whose received power exceeds the
/// threshold. Undefined on a report with no delivered frames.
pub fn rp_threshold_fraction(report: &MetricsReport, threshold_rp_dbw: f64) -> Result<f64> {
    if report.delivered_rp_dbw.is_empty() {
        return Err(Error::domain("rp_threshold_fraction", "no delivered frames; fraction undefined"));
    }
    let above = report
        .delivered_rp_dbw
        .partition_point(|&rp| rp <= threshold_rp_dbw);
    Ok((report.delivered_rp_dbw.len() - above) as f64 / report.delivered_rp_dbw.len() as f64)
}

fn pair_seed(seed: u64, device_id: u32, gw_id: u32) -> u64 {
    let mut z = seed ^ 0x51_0a_dd_00_5e_ed_00_01u64
        ^ (u64::from(device_id) << 20)
        ^ u64::from(gw_id);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Frozen shadowing draws, one per (device, gateway) link.
fn shadow_matrix(scenario: &Scenario, deployment: &Deployment) -> Vec<Vec<f64>> {
    let sigma = scenario.pathloss.shadow_sigma_db;
    let n_gw = deployment.gateways.len();
    if sigma == 0.0 {
        return vec![vec![0.0; n_gw]; deployment.devices.len()];
    }
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    deployment
        .devices
        .iter()
        .map(|dev| {
            (0..n_gw as u32)
                .map(|gw| {
                    let mut rng = ChaCha8Rng::seed_from_u64(pair_seed(scenario.seed, dev.id, gw));
                    normal.sample(&mut rng)
                })
                .collect()
        })
        .collect()
}

/// Per-link base loss (path loss with frozen shadowing). Distances inside
/// the reference distance are clamped to it — the model is only defined
/// from the reference out.
fn link_loss_db(
    scenario: &Scenario,
    distance_km: f64,
    shadow_db: f64,
) -> f64 {
    let d = distance_km.max(scenario.pathloss.ref_distance_km);
    path_loss(d, &scenario.pathloss, shadow_db).expect("clamped distance is in domain")
}

#[derive(Debug, Clone)]
enum ClusterState {
    Snr(SnrAdrState),
    Rssi(RssiAdrState),
}

impl ClusterState {
    fn sf(&self, ring_sf: u8) -> u8 {
        match self {
            ClusterState::Snr(s) => s.sf,
            ClusterState::Rssi(_) => ring_sf,
        }
    }

    fn tp_dbm(&self) -> f64 {
        match self {
            ClusterState::Snr(s) => s.tp_dbm,
            ClusterState::Rssi(s) => s.tp_dbm,
        }
    }
}

struct AdrOutcome {
    trace: Vec<AdrTraceEntry>,
    /// Final (sf, tp) per device.
    device_radio: Vec<(u8, f64)>,
}

/// Runs the measure-step-retune epochs and returns the final radio state.
fn run_adr_epochs(
    scenario: &Scenario,
    deployment: &Deployment,
    loss_home: &[f64],
) -> Result<AdrOutcome> {
    let rings = scenario.ring_count();
    let floor_dbm = noise_floor(f64::from(scenario.bw_khz) * 1e3, scenario.noise_figure_db)?;

    // One state per stepped unit: cluster (gw, ring) or device.
    let unit_of = |dev_idx: usize| -> usize {
        if scenario.per_device_adr {
            dev_idx
        } else {
            let d = &deployment.devices[dev_idx];
            d.home_gw as usize * rings + d.ring
        }
    };
    let n_units = if scenario.per_device_adr {
        deployment.devices.len()
    } else {
        deployment.gateways.len() * rings
    };

    let mut states: Vec<Option<ClusterState>> = vec![None; n_units];
    for (i, dev) in deployment.devices.iter().enumerate() {
        let unit = unit_of(i);
        if states[unit].is_none() {
            let sf = scenario.ring_sf(dev.ring);
            let tp = scenario.ring_tp(dev.ring);
            states[unit] = Some(match scenario.policy {
                PolicyKind::Snr => ClusterState::Snr(SnrAdrState::new(
                    sf,
                    scenario.threshold_db,
                    scenario.sf_step_direction,
                )),
                PolicyKind::Rssi => {
                    ClusterState::Rssi(RssiAdrState::new(tp, scenario.threshold_db))
                }
            });
        }
    }

    let mut trace = Vec::new();
    for epoch in 0..scenario.epochs {
        // Mean measurement per unit at the current radio state.
        let mut sums = vec![(0.0f64, 0u32); n_units];
        for (i, loss) in loss_home.iter().enumerate() {
            let unit = unit_of(i);
            let state = states[unit].as_ref().expect("initialised above");
            let r = rssi_db(state.tp_dbm(), scenario.gains.g_tx_dbi, *loss);
            let measured = match scenario.policy {
                PolicyKind::Snr => r - floor_dbm,
                PolicyKind::Rssi => r,
            };
            sums[unit].0 += measured;
            sums[unit].1 += 1;
        }
        for (unit, state) in states.iter_mut().enumerate() {
            let Some(st) = state else { continue };
            let (sum, n) = sums[unit];
            if n == 0 {
                continue;
            }
            let measured = sum / f64::from(n);
            let (gw_id, ring) = if scenario.per_device_adr {
                let d = &deployment.devices[unit];
                (d.home_gw, d.ring)
            } else {
                ((unit / rings) as u32, unit % rings)
            };
            let action = match st {
                ClusterState::Snr(s) => {
                    let d = snr_adr_step(s, measured, &scenario.snr_floors)?;
                    *s = d.next;
                    d.action
                }
                ClusterState::Rssi(s) => {
                    let d = rssi_adr_step(s, measured);
                    *s = d.next;
                    d.action
                }
            };
            let st_now = state.as_ref().expect("still set");
            trace.push(AdrTraceEntry {
                epoch,
                gw_id,
                ring,
                sf: st_now.sf(scenario.ring_sf(ring)),
                tp_dbm: st_now.tp_dbm(),
                measured_db: measured,
                action,
            });
        }
    }

    let device_radio = deployment
        .devices
        .iter()
        .enumerate()
        .map(|(i, dev)| {
            let st = states[unit_of(i)].as_ref().expect("initialised");
            (st.sf(scenario.ring_sf(dev.ring)), st.tp_dbm())
        })
        .collect();
    Ok(AdrOutcome { trace, device_radio })
}

/// Runs one scenario end to end.
pub fn run_scenario(scenario: &Scenario) -> Result<MetricsReport> {
    let rings = scenario.ring_count();
    let counts_per_gw = match scenario.allocation {
        Allocation::Arithmetic { first_term, common_diff } => {
            arithmetic_allocation(first_term, common_diff, rings, scenario.gw_count)?
        }
        Allocation::Fibonacci { total } => {
            let g = u64::from(scenario.gw_count);
            let per_gw = ((2 * u64::from(total) + g) / (2 * g)) as u32;
            fibonacci_allocation(per_gw, rings)?
        }
    };
    let plan = RingPlan { radii_km: scenario.ring_radii_km.clone(), counts_per_gw };
    let mut deployment = generate_deployment(
        &plan,
        &scenario.gw_layout,
        scenario.gw_count,
        scenario.area_km,
        scenario.seed,
    )?;
    if scenario.cluster_to_nearest {
        cluster_devices_to_gateways(&mut deployment)?;
    }
    let deployment = deployment;

    let shadows = shadow_matrix(scenario, &deployment);

    // Home-link loss per device, for measurements and metrics.
    let loss_home: Vec<f64> = deployment
        .devices
        .iter()
        .enumerate()
        .map(|(i, dev)| {
            let gw = &deployment.gateways[dev.home_gw as usize];
            link_loss_db(scenario, dev.pos.distance(&gw.pos), shadows[i][dev.home_gw as usize])
        })
        .collect();

    let adr = run_adr_epochs(scenario, &deployment, &loss_home)?;

    // Airtime and header length per SF are shared by all devices.
    let mut airtime_by_sf = [0.0f64; 6];
    let mut header_end_by_sf = [0.0f64; 6];
    for sf in scenario.sf_min..=scenario.sf_max {
        let cfg = scenario.radio_for(sf, 14.0);
        let idx = usize::from(sf - 7);
        airtime_by_sf[idx] = airtime(&cfg)?;
        header_end_by_sf[idx] = cfg.preamble_time_s() + 8.0 * cfg.symbol_time_s();
    }

    let channel_khz = (scenario.cf_mhz * 1000.0).round() as u32;
    let floor_dbm = noise_floor(f64::from(scenario.bw_khz) * 1e3, scenario.noise_figure_db)?;

    // A frame always produces an event at its home gateway; foreign
    // gateways hear it while it is strong enough to interfere there.
    let interference_floor = scenario.sensitivity_dbm - scenario.interference_margin_db;
    let sources: Vec<UplinkSource> = deployment
        .devices
        .iter()
        .enumerate()
        .map(|(i, dev)| {
            let (sf, tp) = adr.device_radio[i];
            let mut audible = Vec::new();
            for gw in &deployment.gateways {
                let loss = if gw.id == dev.home_gw {
                    loss_home[i]
                } else {
                    link_loss_db(scenario, dev.pos.distance(&gw.pos), shadows[i][gw.id as usize])
                };
                let rx = rssi_db(tp, scenario.gains.g_tx_dbi, loss);
                if gw.id == dev.home_gw || rx >= interference_floor {
                    audible.push((gw.id, rx));
                }
            }
            let idx = usize::from(sf - 7);
            UplinkSource {
                device_id: dev.id,
                sf,
                channel_khz,
                airtime_s: airtime_by_sf[idx],
                header_end_offset_s: header_end_by_sf[idx],
                audible,
            }
        })
        .collect();

    let traffic_model = TrafficModel {
        mean_interarrival_s: scenario.traffic.mean_interarrival_s,
        horizon_s: scenario.traffic.horizon_s,
        seed: scenario.seed ^ 0x7a_ff_1c_00_00_00_00_01,
    };
    let mut events = schedule_uplinks(&sources, &traffic_model);

    if scenario.per_packet_fading {
        refresh_per_packet_fading(scenario, &deployment, &mut events);
    }

    let penalties = co_sf_interference_filter(&events, scenario.cosf_penalty_db);
    let groups = find_overlaps(&events)?;

    // Verdict of every event; the home-gateway verdict decides delivery.
    let mut verdicts: Vec<Verdict> = vec![Verdict::LostBelowSensitivity; events.len()];
    for group in &groups {
        for outcome in resolve_reception(&events, group, scenario.capture_db, scenario.sensitivity_dbm)? {
            verdicts[outcome.event_index] = outcome.verdict;
        }
    }

    // Demodulation-margin pass: a decoded frame whose penalised SNR sits
    // under the SF floor is corrupt.
    for (i, ev) in events.iter().enumerate() {
        if verdicts[i] == Verdict::Decoded {
            let snr_eff = (ev.rx_power_dbm - floor_dbm) - penalties[i];
            if margin(snr_eff, ev.sf, &scenario.snr_floors)? < 0.0 {
                verdicts[i] = Verdict::LostCorrupt;
            }
        }
    }

    // Aggregate per frame at the home gateway.
    let mut per_ring_counts = vec![Counts::default(); rings];
    let mut per_sf = [(0u64, 0u64); 6];
    let mut ring_sums = vec![(0.0f64, 0.0f64, 0.0f64); rings]; // rssi, snr, rp over delivered
    let mut delivered_rp = Vec::new();

    let home_of = |device_id: u32| -> u32 { deployment.devices[device_id as usize].home_gw };
    for (i, ev) in events.iter().enumerate() {
        if ev.gw_id != home_of(ev.device_id) {
            continue;
        }
        let dev = &deployment.devices[ev.device_id as usize];
        let rp = received_power_dbw(ev.rx_power_dbm, scenario.gains.g_rx_dbi);
        let verdict = verdicts[i];
        per_ring_counts[dev.ring].record(verdict, rp > scenario.threshold_rp_dbw);
        let sf_slot = &mut per_sf[usize::from(ev.sf - 7)];
        sf_slot.0 += 1;
        if verdict == Verdict::Decoded {
            sf_slot.1 += 1;
            let sums = &mut ring_sums[dev.ring];
            sums.0 += ev.rx_power_dbm;
            sums.1 += ev.rx_power_dbm - floor_dbm;
            sums.2 += rp;
            delivered_rp.push(rp);
        }
    }
    delivered_rp.sort_by(|a, b| a.partial_cmp(b).expect("finite rp"));

    let per_ring: Vec<RingMetrics> = per_ring_counts
        .iter()
        .enumerate()
        .map(|(ring, counts)| {
            let n = counts.delivered as f64;
            let (s_rssi, s_snr, s_rp) = ring_sums[ring];
            RingMetrics {
                ring,
                counts: *counts,
                plr: counts.plr(),
                mean_rssi_dbm: (counts.delivered > 0).then(|| s_rssi / n),
                mean_snr_db: (counts.delivered > 0).then(|| s_snr / n),
                mean_rp_dbw: (counts.delivered > 0).then(|| s_rp / n),
                received_above_threshold_fraction: counts.received_above_threshold_fraction(),
            }
        })
        .collect();

    let mut totals = Counts::default();
    for c in &per_ring_counts {
        totals.scheduled += c.scheduled;
        totals.delivered += c.delivered;
        totals.lost_collision += c.lost_collision;
        totals.lost_capture += c.lost_capture;
        totals.lost_below_sensitivity += c.lost_below_sensitivity;
        totals.lost_corrupt += c.lost_corrupt;
        totals.delivered_above_threshold += c.delivered_above_threshold;
    }

    let rp_above_of_received = (totals.delivered > 0)
        .then(|| totals.delivered_above_threshold as f64 / totals.delivered as f64);

    Ok(MetricsReport {
        gw_count: scenario.gw_count,
        policy: scenario.policy,
        seed: scenario.seed,
        horizon_s: scenario.traffic.horizon_s,
        threshold_rp_dbw: scenario.threshold_rp_dbw,
        total_plr: totals.plr(),
        received_above_threshold_fraction: totals.received_above_threshold_fraction(),
        rp_above_threshold_of_received: rp_above_of_received,
        totals,
        per_ring,
        per_sf: (7u8..=12)
            .map(|sf| {
                let (scheduled, delivered) = per_sf[usize::from(sf - 7)];
                SfMetrics { sf, scheduled, delivered }
            })
            .collect(),
        adr_trace: adr.trace,
        delivered_rp_dbw: delivered_rp,
    })
}

/// Replaces the frozen shadowing of each event with a fresh per-packet draw.
fn refresh_per_packet_fading(
    scenario: &Scenario,
    deployment: &Deployment,
    events: &mut [TransmissionEvent],
) {
    let sigma = scenario.pathloss.shadow_sigma_db;
    if sigma == 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("validated sigma");
    for ev in events.iter_mut() {
        let dev = &deployment.devices[ev.device_id as usize];
        let gw = &deployment.gateways[ev.gw_id as usize];
        let frozen = {
            let mut rng = ChaCha8Rng::seed_from_u64(pair_seed(scenario.seed, dev.id, gw.id));
            normal.sample(&mut rng)
        };
        let fresh = {
            let mut rng = ChaCha8Rng::seed_from_u64(
                pair_seed(scenario.seed ^ ev.frame_id.rotate_left(17), dev.id, gw.id),
            );
            normal.sample(&mut rng)
        };
        ev.rx_power_dbm += frozen - fresh;
    }
}

/// Side-by-side run of two policies on identical seed and geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyComparison {
    pub policy_a: PolicyKind,
    pub policy_b: PolicyKind,
    pub rows: Vec<PolicyComparisonRow>,
    pub total_plr_a: Option<f64>,
    pub total_plr_b: Option<f64>,
    /// Policy with the lower total PLR; `None` on a tie or empty run.
    pub winner: Option<PolicyKind>,
    pub report_a: MetricsReport,
    pub report_b: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyComparisonRow {
    pub ring: usize,
    pub plr_a: Option<f64>,
    pub plr_b: Option<f64>,
    pub mean_rp_dbw_a: Option<f64>,
    pub mean_rp_dbw_b: Option<f64>,
    pub received_above_threshold_fraction_a: Option<f64>,
    pub received_above_threshold_fraction_b: Option<f64>,
}

/// Runs the scenario under two explicit policies.
pub fn compare_policy_pair(
    base: &Scenario,
    policy_a: PolicyKind,
    policy_b: PolicyKind,
) -> Result<PolicyComparison> {
    let mut sa = base.clone();
    sa.policy = policy_a;
    retune_policy_defaults(&mut sa, base);
    let mut sb = base.clone();
    sb.policy = policy_b;
    retune_policy_defaults(&mut sb, base);

    let report_a = run_scenario(&sa)?;
    let report_b = run_scenario(&sb)?;
    let rows = report_a
        .per_ring
        .iter()
        .zip(&report_b.per_ring)
        .map(|(a, b)| PolicyComparisonRow {
            ring: a.ring,
            plr_a: a.plr,
            plr_b: b.plr,
            mean_rp_dbw_a: a.mean_rp_dbw,
            mean_rp_dbw_b: b.mean_rp_dbw,
            received_above_threshold_fraction_a: a.received_above_threshold_fraction,
            received_above_threshold_fraction_b: b.received_above_threshold_fraction,
        })
        .collect();
    let winner = match (report_a.total_plr, report_b.total_plr) {
        (Some(a), Some(b)) if a < b => Some(policy_a),
        (Some(a), Some(b)) if b < a => Some(policy_b),
        _ => None,
    };
    Ok(PolicyComparison {
        policy_a,
        policy_b,
        rows,
        total_plr_a: report_a.total_plr,
        total_plr_b: report_b.total_plr,
        winner,
        report_a,
        report_b,
    })
}

/// A policy swap also swaps the policy-shaped defaults (threshold semantics
/// and initial power), mirroring how a scenario file would resolve them.
fn retune_policy_defaults(target: &mut Scenario, base: &Scenario) {
    if target.policy == base.policy {
        return;
    }
    match target.policy {
        PolicyKind::Snr => {
            target.threshold_db = 0.0;
            target.tp_init = TpInit::Fixed(14.0);
        }
        PolicyKind::Rssi => {
            target.threshold_db = -123.0;
            target.tp_init = TpInit::Schedule;
        }
    }
}

/// The canonical SNR-versus-RSSI comparison.
pub fn compare_policies(base: &Scenario) -> Result<PolicyComparison> {
    compare_policy_pair(base, PolicyKind::Snr, PolicyKind::Rssi)
}

/// One run per gateway count, shared seed base, reports in input order.
pub fn sweep_gateways(template: &Scenario, gw_counts: &[u32]) -> Result<Vec<MetricsReport>> {
    if gw_counts.is_empty() {
        return Err(Error::domain("sweep_gateways", "no gateway counts given"));
    }
    gw_counts
        .iter()
        .map(|&g| {
            let mut sc = template.clone();
            sc.gw_count = g;
            run_scenario(&sc)
        })
        .collect()
}
