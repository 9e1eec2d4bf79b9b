//! Pure-ALOHA uplink traffic and frame-level reception.
//!
//! Devices transmit the moment a packet is generated — no carrier sensing —
//! so reception is decided by interval overlap and power. Frames collide
//! over their full airtime (exact interval overlap, not the slotted
//! approximation). Within one gateway/channel/SF overlap group the capture
//! effect lets a frame through only if it clears *every* overlapping frame
//! by the capture threshold, and at most one frame per group is decoded.
//! The arrival time of the decisive interferer picks the loss cause: hits
//! up to the header end corrupt the lock or header (`LostCollision`), later
//! hits steal a locked payload (`LostCapture`).
//!
//! Frames of different SFs are quasi-orthogonal: they never destroy each
//! other, but [`co_sf_interference_filter`] can charge a configurable SNR
//! penalty while they overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Poisson traffic shared by every device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    /// Mean seconds between packets of one device.
    pub mean_interarrival_s: f64,
    pub horizon_s: f64,
    pub seed: u64,
}

/// One device's transmit parameters, with the set of gateways that hear it.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSource {
    pub device_id: u32,
    pub sf: u8,
    pub channel_khz: u32,
    pub airtime_s: f64,
    /// Offset from frame start to the end of the PHY header (preamble plus
    /// the eight base payload symbols).
    pub header_end_offset_s: f64,
    /// `(gw_id, rx_power_dbm)` for each gateway the frame reaches.
    pub audible: Vec<(u32, f64)>,
}

/// One frame as heard by one gateway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionEvent {
    /// Identity of the over-the-air frame; shared by the copies of the same
    /// transmission at different gateways.
    pub frame_id: u64,
    pub device_id: u32,
    pub gw_id: u32,
    pub start_s: f64,
    pub airtime_s: f64,
    pub sf: u8,
    pub channel_khz: u32,
    pub rx_power_dbm: f64,
    pub header_end_s: f64,
}

impl TransmissionEvent {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.airtime_s
    }

    /// Half-open airtime intervals; touching endpoints do not overlap.
    pub fn overlaps(&self, other: &TransmissionEvent) -> bool {
        self.start_s < other.end_s() && other.start_s < self.end_s()
    }

    pub fn validate(&self) -> Result<()> {
        if self.airtime_s <= 0.0 {
            return Err(Error::domain("transmission_event", "airtime must be positive"));
        }
        if self.header_end_s <= self.start_s || self.header_end_s >= self.end_s() {
            return Err(Error::domain(
                "transmission_event",
                "header end must fall strictly inside the frame",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Decoded,
    /// Lock or header ruined by an overlapping frame.
    LostCollision,
    /// Locked and demodulating, then an insufficiently-separated stronger
    /// arrival captured the receiver away.
    LostCapture,
    LostBelowSensitivity,
    /// Demodulation margin went negative (SNR below the SF floor).
    LostCorrupt,
}

impl Verdict {
    pub fn is_lost_to_interference(self) -> bool {
        matches!(self, Verdict::LostCollision | Verdict::LostCapture)
    }
}

/// Outcome for one event of an overlap group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceptionOutcome {
    /// Index of the event in the caller's event slice.
    pub event_index: usize,
    pub frame_id: u64,
    pub device_id: u32,
    pub gw_id: u32,
    pub verdict: Verdict,
    /// Frame ids of the decisive interferers; non-empty exactly for
    /// collision/capture losses.
    pub interferers: Vec<u64>,
}

/// Poisson arrival times for one device stream over the horizon.
pub fn poisson_arrival_times(mean_interarrival_s: f64, horizon_s: f64, seed: u64) -> Vec<f64> {
    if mean_interarrival_s <= 0.0 || horizon_s <= 0.0 {
        return Vec::new();
    }
    let exp = Exp::new(1.0 / mean_interarrival_s).expect("positive rate");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0.0;
    let mut times = Vec::new();
    loop {
        t += exp.sample(&mut rng);
        if t >= horizon_s {
            return times;
        }
        times.push(t);
    }
}

fn mix(seed: u64, device_id: u32) -> u64 {
    // splitmix64 step keeps per-device streams decorrelated.
    let mut z = seed ^ (u64::from(device_id).wrapping_mul(0x9e37_79b9_7f4a_7c15)).wrapping_add(0x1234_5678_9abc_def1);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Schedules the full uplink event list: independent Poisson arrivals per
/// device, one event per audible gateway per frame, sorted by start time.
/// Deterministic in the traffic seed.
pub fn schedule_uplinks(sources: &[UplinkSource], traffic: &TrafficModel) -> Vec<TransmissionEvent> {
    let mut events = Vec::new();
    for src in sources {
        let times = poisson_arrival_times(traffic.mean_interarrival_s, traffic.horizon_s, mix(traffic.seed, src.device_id));
        for (seq, &start) in times.iter().enumerate() {
            let frame_id = (u64::from(src.device_id) << 24) | seq as u64;
            for &(gw_id, rx_power_dbm) in &src.audible {
                events.push(TransmissionEvent {
                    frame_id,
                    device_id: src.device_id,
                    gw_id,
                    start_s: start,
                    airtime_s: src.airtime_s,
                    sf: src.sf,
                    channel_khz: src.channel_khz,
                    rx_power_dbm,
                    header_end_s: start + src.header_end_offset_s,
                });
            }
        }
    }
    events.sort_by(|a, b| {
        (a.start_s, a.frame_id, a.gw_id)
            .partial_cmp(&(b.start_s, b.frame_id, b.gw_id))
            .expect("finite start times")
    });
    events
}

/// Partitions events into maximal chains of mutually time-overlapping
/// frames per (gateway, channel, SF). Singleton groups are interference
/// free. The input must be sorted by start time.
pub fn find_overlaps(events: &[TransmissionEvent]) -> Result<Vec<Vec<usize>>> {
    for w in events.windows(2) {
        if w[1].start_s < w[0].start_s {
            return Err(Error::domain("find_overlaps", "events must be sorted by start time"));
        }
    }
    let mut buckets: BTreeMap<(u32, u32, u8), Vec<usize>> = BTreeMap::new();
    for (i, ev) in events.iter().enumerate() {
        buckets.entry((ev.gw_id, ev.channel_khz, ev.sf)).or_default().push(i);
    }
    let mut groups = Vec::new();
    for idxs in buckets.values() {
        let mut current: Vec<usize> = Vec::new();
        let mut max_end = f64::NEG_INFINITY;
        for &i in idxs {
            let ev = &events[i];
            if !current.is_empty() && ev.start_s < max_end {
                current.push(i);
            } else {
                if !current.is_empty() {
                    groups.push(std::mem::take(&mut current));
                }
                current.push(i);
            }
            max_end = max_end.max(ev.end_s());
        }
        if !current.is_empty() {
            groups.push(current);
        }
    }
    Ok(groups)
}

/// Resolves one overlap group.
///
/// A frame below the sensitivity floor is lost outright; it can still act
/// as interference, since capture is about the power ratio, not the
/// interferer's absolute level — the caller decides how far below the
/// floor frames are worth feeding in at all. A frame survives only if its
/// power clears every overlapping frame by `capture_threshold_db`; should
/// several non-overlapping frames of one chain survive their own
/// neighbourhoods, only the strongest is decoded. Setting the threshold to
/// infinity disables capture entirely and any overlap destroys both
/// frames.
pub fn resolve_reception(
    events: &[TransmissionEvent],
    group: &[usize],
    capture_threshold_db: f64,
    sensitivity_dbm: f64,
) -> Result<Vec<ReceptionOutcome>> {
    if group.is_empty() {
        return Ok(Vec::new());
    }
    let first = &events[group[0]];
    for &i in group {
        let ev = &events[i];
        ev.validate()?;
        if (ev.gw_id, ev.channel_khz, ev.sf) != (first.gw_id, first.channel_khz, first.sf) {
            return Err(Error::domain(
                "resolve_reception",
                "group mixes gateways, channels or SFs; cross-SF frames are quasi-orthogonal and must be filtered upstream",
            ));
        }
    }

    let mut outcomes: Vec<ReceptionOutcome> = Vec::with_capacity(group.len());
    let mut candidates: Vec<usize> = Vec::new(); // positions into `group`

    for (pos, &i) in group.iter().enumerate() {
        let ev = &events[i];
        let mut outcome = ReceptionOutcome {
            event_index: i,
            frame_id: ev.frame_id,
            device_id: ev.device_id,
            gw_id: ev.gw_id,
            verdict: Verdict::Decoded,
            interferers: Vec::new(),
        };
        if ev.rx_power_dbm < sensitivity_dbm {
            outcome.verdict = Verdict::LostBelowSensitivity;
            outcomes.push(outcome);
            continue;
        }
        let mut killers: Vec<&TransmissionEvent> = Vec::new();
        for &j in group {
            if j == i {
                continue;
            }
            let other = &events[j];
            if !ev.overlaps(other) {
                continue;
            }
            if ev.rx_power_dbm < other.rx_power_dbm + capture_threshold_db {
                killers.push(other);
            }
        }
        if killers.is_empty() {
            candidates.push(pos);
        } else {
            let payload_only = killers.iter().all(|k| k.start_s >= ev.header_end_s);
            outcome.verdict = if payload_only { Verdict::LostCapture } else { Verdict::LostCollision };
            outcome.interferers = killers.iter().map(|k| k.frame_id).collect();
        }
        outcomes.push(outcome);
    }

    // Capture exclusivity: one decoded frame per group at most. Ties go to
    // the earlier, lower-id frame so resolution is order independent.
    if candidates.len() > 1 {
        let winner = *candidates
            .iter()
            .max_by(|&&a, &&b| {
                let ea = &events[group[a]];
                let eb = &events[group[b]];
                (ea.rx_power_dbm, -ea.start_s, !ea.frame_id)
                    .partial_cmp(&(eb.rx_power_dbm, -eb.start_s, !eb.frame_id))
                    .expect("finite powers")
            })
            .expect("non-empty candidates");
        let winner_frame = events[group[winner]].frame_id;
        for &pos in &candidates {
            if pos != winner {
                outcomes[pos].verdict = Verdict::LostCollision;
                outcomes[pos].interferers = vec![winner_frame];
            }
        }
    }

    Ok(outcomes)
}

/// Cross-SF co-channel annotation: for each event, the SNR penalty (dB) to
/// charge while frames of a different SF overlap it at the same gateway and
/// channel. Zero when nothing cross-SF overlaps (and for every event when
/// the configured penalty is zero). Frames of different SFs never destroy
/// each other.
pub fn co_sf_interference_filter(events: &[TransmissionEvent], penalty_db: f64) -> Vec<f64> {
    let mut penalties = vec![0.0; events.len()];
    if penalty_db == 0.0 {
        return penalties;
    }
    let mut buckets: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for (i, ev) in events.iter().enumerate() {
        buckets.entry((ev.gw_id, ev.channel_khz)).or_default().push(i);
    }
    for idxs in buckets.values() {
        // Sweep in start order, keeping the still-airing frames.
        let mut active: Vec<usize> = Vec::new();
        for &i in idxs {
            let ev = &events[i];
            active.retain(|&j| events[j].end_s() > ev.start_s);
            for &j in &active {
                if events[j].sf != ev.sf {
                    penalties[i] = penalty_db;
                    penalties[j] = penalty_db;
                }
            }
            active.push(i);
        }
    }
    penalties
}
