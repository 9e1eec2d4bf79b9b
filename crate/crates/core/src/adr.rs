//! Adaptation state machines.
//!
//! Two uplink policies are modelled. The SNR policy keeps transmission
//! power pinned at 14 dBm and walks the spreading factor using the
//! demodulation margin; the RSSI policy keeps the spreading factor and
//! climbs the power ladder in 3 dBm steps whenever the received strength
//! drops under the receiver threshold. Steps are pure functions of
//! (state, measurement): replaying a measurement trace reproduces the
//! decision trace exactly.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::link_budget::{margin, SnrFloorTable};

pub const TP_MIN_DBM: f64 = 14.0;
pub const TP_MAX_DBM: f64 = 29.0;
pub const TP_STEP_DB: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeviceClass {
    ClassA,
    ClassB,
}

/// Downlink that opens a session for the given class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionBootstrap {
    /// Class A devices start from a configuration frame.
    ConfigurationFrame,
    /// Class B devices start from a gateway beacon (ping).
    Beacon,
}

pub fn bootstrap_session(class: DeviceClass) -> SessionBootstrap {
    match class {
        DeviceClass::ClassA => SessionBootstrap::ConfigurationFrame,
        DeviceClass::ClassB => SessionBootstrap::Beacon,
    }
}

/// Which way "adjust the SF" moves when the margin is short.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SfStepDirection {
    /// Raise the SF number — slower, more robust, lower required SNR.
    /// A short margin wants a lower demodulation floor.
    #[default]
    Robustness,
    /// Decrease the SF number (the data-rate-index reading).
    Literal,
}

/// Per-cluster state for the SNR-driven policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrAdrState {
    pub sf: u8,
    /// Constant for the lifetime of the state.
    pub tp_dbm: f64,
    /// Adjustment budget; `None` until the first measurement initialises it
    /// to `max(0, floor(margin / 3))`.
    pub n_step: Option<u32>,
    /// Count of data-rate adjustments taken so far; only ever increments.
    pub dr_idx: u32,
    /// Margin threshold, 0 dB by default (the demodulation boundary).
    pub threshold_db: f64,
    pub step_direction: SfStepDirection,
}

impl SnrAdrState {
    pub fn new(sf: u8, threshold_db: f64, step_direction: SfStepDirection) -> Self {
        SnrAdrState { sf, tp_dbm: TP_MIN_DBM, n_step: None, dr_idx: 0, threshold_db, step_direction }
    }
}

/// Per-cluster state for the RSSI-driven policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssiAdrState {
    /// One of 14, 17, 20, 23, 26, 29 dBm.
    pub tp_dbm: f64,
    /// Receiver threshold the measured RSSI must clear, -123 dBm by default.
    pub receiver_threshold_dbm: f64,
}

impl RssiAdrState {
    pub fn new(tp_dbm: f64, receiver_threshold_dbm: f64) -> Self {
        RssiAdrState { tp_dbm, receiver_threshold_dbm }
    }
}

/// What one adaptation step decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdrAction {
    /// Link is healthy; keep transmitting with the current settings.
    SendNewPacket,
    /// Margin shortfall consumed one step of budget. `clamped` reports an
    /// adjustment that ran into the end of the SF range.
    AdjustSf { new_sf: u8, clamped: bool },
    /// Weak RSSI; climb the power ladder.
    AdjustTp { new_tp_dbm: f64 },
    /// No budget left (SNR) or ladder exhausted (RSSI).
    UnsuccessfulTransmission,
}

/// One step outcome: the action taken and the successor state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdrDecision<St> {
    pub action: AdrAction,
    pub next: St,
}

/// SNR-policy step. The margin is `measured_snr - floor(sf)`; a margin at
/// or above the threshold counts as healthy (equality sends).
pub fn snr_adr_step(
    state: &SnrAdrState,
    measured_snr_db: f64,
    floors: &SnrFloorTable<f64>,
) -> Result<AdrDecision<SnrAdrState>> {
    let m = margin(measured_snr_db, state.sf, floors)?;
    let mut next = *state;
    let n_step = state
        .n_step
        .unwrap_or_else(|| (m / 3.0).floor().max(0.0) as u32);
    next.n_step = Some(n_step);

    let action = if n_step > 0 && m >= state.threshold_db {
        AdrAction::SendNewPacket
    } else if n_step > 0 {
        let (new_sf, clamped) = match state.step_direction {
            SfStepDirection::Robustness => {
                if state.sf < 12 {
                    (state.sf + 1, false)
                } else {
                    (12, true)
                }
            }
            SfStepDirection::Literal => {
                if state.sf > 7 {
                    (state.sf - 1, false)
                } else {
                    (7, true)
                }
            }
        };
        next.sf = new_sf;
        next.dr_idx += 1;
        next.n_step = Some(n_step - 1);
        AdrAction::AdjustSf { new_sf, clamped }
    } else {
        AdrAction::UnsuccessfulTransmission
    };
    Ok(AdrDecision { action, next })
}

/// RSSI-policy step. RSSI at or above the receiver threshold sends; below
/// it the power climbs by 3 dBm until the 29 dBm cap, after which the step
/// alerts an unsuccessful transmission.
pub fn rssi_adr_step(state: &RssiAdrState, received_rssi_dbm: f64) -> AdrDecision<RssiAdrState> {
    let mut next = *state;
    let action = if received_rssi_dbm >= state.receiver_threshold_dbm {
        AdrAction::SendNewPacket
    } else if state.tp_dbm + TP_STEP_DB <= TP_MAX_DBM {
        next.tp_dbm = state.tp_dbm + TP_STEP_DB;
        AdrAction::AdjustTp { new_tp_dbm: next.tp_dbm }
    } else {
        AdrAction::UnsuccessfulTransmission
    };
    AdrDecision { action, next }
}
