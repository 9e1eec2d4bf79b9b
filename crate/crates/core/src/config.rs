//! JSON scenario files.
//!
//! Every field has a default, so `{}` is a valid scenario; unknown keys are
//! rejected. The defaults describe the stock campaign: 2200 devices in six
//! rings (arithmetic 200/100 allocation), EU-868 radio at 125 kHz with a
//! 16-byte payload, 4.31 path-loss exponent, the RSSI policy with the
//! 14-29 dBm ring power schedule, and a -123 dBm receiver threshold.

use serde::{Deserialize, Serialize};

use crate::adr::SfStepDirection;
use crate::deployment::{GwLayout, RingPlan};
use crate::error::{Error, Result};
use crate::link_budget::{AntennaGains, Obstacle, PathLossParams, SnrFloorTable};
use crate::simulator::{Allocation, PolicyKind, Scenario, TpInit, Traffic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub deployment: DeploymentSection,
    pub radio: RadioSection,
    pub pathloss: PathLossSection,
    pub policy: PolicySection,
    pub channel: ChannelSection,
    pub traffic: TrafficSection,
    pub seed: u64,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            deployment: DeploymentSection::default(),
            radio: RadioSection::default(),
            pathloss: PathLossSection::default(),
            policy: PolicySection::default(),
            channel: ChannelSection::default(),
            traffic: TrafficSection::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeploymentSection {
    pub gw_count: u32,
    pub gw_layout: GwLayout,
    /// Side of the square service area the gateways are placed in, km.
    pub area_km: f64,
    pub ring_radii_km: Vec<f64>,
    pub allocation: AllocationSection,
    /// Machine-clustering pass after generation: devices join their
    /// nearest gateway and take the ring of their new distance.
    pub cluster_to_nearest: bool,
}

impl Default for DeploymentSection {
    fn default() -> Self {
        DeploymentSection {
            gw_count: 1,
            gw_layout: GwLayout::Kmeans,
            area_km: 7.5,
            ring_radii_km: RingPlan::default_radii(),
            allocation: AllocationSection::default(),
            cluster_to_nearest: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationKind {
    Arithmetic,
    Fibonacci,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AllocationSection {
    pub kind: AllocationKind,
    pub first_term: u32,
    pub common_diff: u32,
    /// Network-wide device total, used by the Fibonacci baseline.
    pub total: u32,
}

impl Default for AllocationSection {
    fn default() -> Self {
        AllocationSection { kind: AllocationKind::Arithmetic, first_term: 200, common_diff: 100, total: 2200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioSection {
    pub cf_mhz: f64,
    pub bw_khz: u32,
    /// Inclusive [min, max] spreading factors; ring i starts at min + i.
    pub sf_range: [u8; 2],
    /// Fixed initial power; mutually exclusive with `tp_schedule`.
    pub tp_dbm: Option<f64>,
    /// Ring power ladder 14..29 dBm; mutually exclusive with `tp_dbm`.
    pub tp_schedule: Option<bool>,
    pub payload_bytes: u32,
    pub preamble_symbols: u32,
    pub cr_denominator_n: u8,
    pub explicit_header: bool,
    pub crc_on: bool,
    pub noise_figure_db: f64,
    pub g_tx_dbi: f64,
    pub g_rx_dbi: f64,
}

impl Default for RadioSection {
    fn default() -> Self {
        RadioSection {
            cf_mhz: 868.0,
            bw_khz: 125,
            sf_range: [7, 12],
            tp_dbm: None,
            tp_schedule: None,
            payload_bytes: 16,
            preamble_symbols: 8,
            cr_denominator_n: 1,
            explicit_header: true,
            crc_on: true,
            noise_figure_db: 6.0,
            g_tx_dbi: 2.15,
            g_rx_dbi: 2.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossSection {
    /// Loss at the reference distance. The default anchors the model at
    /// 127.84 dB of loss at 0.9 km.
    pub ref_loss_db: f64,
    pub ref_distance_km: f64,
    pub exponent: f64,
    pub sigma_db: f64,
    pub obstacles: Vec<Obstacle>,
    /// Redraw shadowing per packet instead of freezing it per link.
    pub per_packet_fading: bool,
}

impl Default for PathLossSection {
    fn default() -> Self {
        PathLossSection {
            ref_loss_db: 73.7378,
            ref_distance_km: 0.05,
            exponent: 4.31,
            sigma_db: 5.0,
            obstacles: Vec::new(),
            per_packet_fading: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicySection {
    pub kind: PolicyKind,
    /// Margin threshold (dB) for the SNR policy, receiver RSSI threshold
    /// (dBm) for the RSSI policy. Defaults: 0 dB and -123 dBm.
    pub threshold_db: Option<f64>,
    pub sf_step_direction: SfStepDirection,
    /// Measure-then-step rounds before the traffic horizon.
    pub epochs: u32,
    /// Step each device individually instead of averaging per cluster.
    pub per_device: bool,
    /// Override of the per-SF demodulation floors (SF7..SF12).
    pub snr_floors_db: Option<[f64; 6]>,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            kind: PolicyKind::Rssi,
            threshold_db: None,
            sf_step_direction: SfStepDirection::Robustness,
            epochs: 10,
            per_device: false,
            snr_floors_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub capture_db: f64,
    pub sensitivity_dbm: f64,
    pub cosf_penalty_db: f64,
    /// How far below the sensitivity floor a frame still counts as
    /// co-channel interference at a gateway. Capture is a power ratio, so
    /// undecodable frames can still jam barely-stronger ones.
    pub interference_margin_db: f64,
    /// Received-power threshold for the above/below split; derived from the
    /// sensitivity when absent.
    pub threshold_rp_dbw: Option<f64>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            capture_db: 6.0,
            sensitivity_dbm: -123.0,
            cosf_penalty_db: 0.0,
            interference_margin_db: 12.0,
            threshold_rp_dbw: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSection {
    pub mean_interarrival_s: f64,
    pub horizon_s: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        TrafficSection { mean_interarrival_s: 360.0, horizon_s: 86_400.0 }
    }
}

/// Parses a scenario document, mapping syntax errors to a config error with
/// line/column diagnostics.
pub fn parse_scenario(json: &str) -> Result<ScenarioFile> {
    serde_json::from_str(json).map_err(|e| {
        Error::config(
            "scenario",
            format!("line {} column {}: {e}", e.line(), e.column()),
        )
    })
}

pub fn serialize_scenario(file: &ScenarioFile) -> String {
    serde_json::to_string_pretty(file).expect("scenario serializes")
}

impl ScenarioFile {
    /// Stock scenario with just the policy and gateway count overridden.
    pub fn stock(policy: PolicyKind, gw_count: u32) -> Self {
        let mut f = ScenarioFile::default();
        f.policy.kind = policy;
        f.deployment.gw_count = gw_count;
        f
    }

    /// Validates and lowers the file into a runnable scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let d = &self.deployment;
        if d.gw_count == 0 {
            return Err(Error::config("deployment.gw_count", "must be at least 1"));
        }
        if d.area_km <= 0.0 {
            return Err(Error::config("deployment.area_km", "must be positive"));
        }
        if d.ring_radii_km.is_empty() {
            return Err(Error::config("deployment.ring_radii_km", "need at least one ring"));
        }
        let mut prev = 0.0;
        for &r in &d.ring_radii_km {
            if r <= prev {
                return Err(Error::config("deployment.ring_radii_km", "radii must strictly increase"));
            }
            prev = r;
        }
        if d.allocation.first_term == 0 {
            return Err(Error::config("deployment.allocation.first_term", "must be positive"));
        }
        if d.allocation.kind == AllocationKind::Fibonacci && d.allocation.total == 0 {
            return Err(Error::config("deployment.allocation.total", "must be positive"));
        }

        let r = &self.radio;
        let [sf_min, sf_max] = r.sf_range;
        if !(7..=12).contains(&sf_min) || !(7..=12).contains(&sf_max) || sf_min > sf_max {
            return Err(Error::config("radio.sf_range", "need 7 <= min <= max <= 12"));
        }
        if ![125u32, 250, 500].contains(&r.bw_khz) {
            return Err(Error::config("radio.bw_khz", "must be one of 125/250/500"));
        }
        if !(1..=4).contains(&r.cr_denominator_n) {
            return Err(Error::config("radio.cr_denominator_n", "must be in 1..=4"));
        }
        if r.payload_bytes == 0 {
            return Err(Error::config("radio.payload_bytes", "must be positive"));
        }

        let tp_init = match (r.tp_dbm, r.tp_schedule) {
            (Some(_), Some(true)) => {
                return Err(Error::config("radio.tp_dbm", "tp_dbm and tp_schedule are mutually exclusive"));
            }
            (Some(tp), _) => {
                if !(14.0..=29.0).contains(&tp) {
                    return Err(Error::config("radio.tp_dbm", "must be within 14..=29 dBm"));
                }
                TpInit::Fixed(tp)
            }
            (None, Some(true)) => TpInit::Schedule,
            // Policy defaults: fixed 14 dBm for SNR, the ring ladder for RSSI.
            (None, _) => match self.policy.kind {
                PolicyKind::Snr => TpInit::Fixed(14.0),
                PolicyKind::Rssi => TpInit::Schedule,
            },
        };
        if self.policy.kind == PolicyKind::Snr {
            if let TpInit::Fixed(tp) = tp_init {
                if tp != 14.0 {
                    return Err(Error::config("radio.tp_dbm", "the SNR policy runs at a constant 14 dBm"));
                }
            } else {
                return Err(Error::config("radio.tp_schedule", "the SNR policy runs at a constant 14 dBm"));
            }
        }

        let p = &self.pathloss;
        let pathloss = PathLossParams {
            ref_loss_db: p.ref_loss_db,
            ref_distance_km: p.ref_distance_km,
            exponent: p.exponent,
            shadow_sigma_db: p.sigma_db,
            obstacle_losses_db: p.obstacles.iter().map(|o| o.attenuation_db()).collect(),
        };
        pathloss
            .validate()
            .map_err(|e| Error::config("pathloss", e.to_string()))?;

        let snr_floors = match self.policy.snr_floors_db {
            Some(f) => SnrFloorTable::new(f).map_err(|e| Error::config("policy.snr_floors_db", e.to_string()))?,
            None => SnrFloorTable::default(),
        };
        let threshold_db = self.policy.threshold_db.unwrap_or(match self.policy.kind {
            PolicyKind::Snr => 0.0,
            PolicyKind::Rssi => -123.0,
        });
        if self.policy.epochs == 0 {
            return Err(Error::config("policy.epochs", "need at least one epoch"));
        }

        let c = &self.channel;
        if c.capture_db < 0.0 {
            return Err(Error::config("channel.capture_db", "must be non-negative"));
        }
        if c.interference_margin_db < 0.0 {
            return Err(Error::config("channel.interference_margin_db", "must be non-negative"));
        }
        let gains = AntennaGains { g_tx_dbi: r.g_tx_dbi, g_rx_dbi: r.g_rx_dbi };
        let threshold_rp_dbw = c
            .threshold_rp_dbw
            .unwrap_or_else(|| crate::link_budget::received_power_dbw(c.sensitivity_dbm, gains.g_rx_dbi));

        let t = &self.traffic;
        if t.mean_interarrival_s <= 0.0 {
            return Err(Error::config("traffic.mean_interarrival_s", "must be positive"));
        }
        if t.horizon_s < 0.0 {
            return Err(Error::config("traffic.horizon_s", "must be non-negative"));
        }

        Ok(Scenario {
            gw_count: d.gw_count,
            gw_layout: d.gw_layout.clone(),
            area_km: d.area_km,
            ring_radii_km: d.ring_radii_km.clone(),
            allocation: match d.allocation.kind {
                AllocationKind::Arithmetic => Allocation::Arithmetic {
                    first_term: d.allocation.first_term,
                    common_diff: d.allocation.common_diff,
                },
                AllocationKind::Fibonacci => Allocation::Fibonacci { total: d.allocation.total },
            },
            cluster_to_nearest: d.cluster_to_nearest,
            policy: self.policy.kind,
            threshold_db,
            sf_step_direction: self.policy.sf_step_direction,
            epochs: self.policy.epochs,
            per_device_adr: self.policy.per_device,
            cf_mhz: r.cf_mhz,
            bw_khz: r.bw_khz,
            sf_min,
            sf_max,
            tp_init,
            payload_bytes: r.payload_bytes,
            preamble_symbols: r.preamble_symbols,
            cr_denominator_n: r.cr_denominator_n,
            explicit_header: r.explicit_header,
            crc_on: r.crc_on,
            noise_figure_db: r.noise_figure_db,
            gains,
            pathloss,
            per_packet_fading: p.per_packet_fading,
            snr_floors,
            capture_db: c.capture_db,
            sensitivity_dbm: c.sensitivity_dbm,
            cosf_penalty_db: c.cosf_penalty_db,
            interference_margin_db: c.interference_margin_db,
            threshold_rp_dbw,
            traffic: Traffic { mean_interarrival_s: t.mean_interarrival_s, horizon_s: t.horizon_s },
            seed: self.seed,
        })
    }
}
