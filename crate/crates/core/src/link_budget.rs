//! Propagation, airtime and noise math in dB space.
//!
//! Everything here is a pure function of its inputs: values are immutable
//! and safe to share between concurrent scenario runs. Distances are in km,
//! powers in dBm unless a name says dBW, gains in dBi.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Radio parameters for one uplink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig<S> {
    pub carrier_freq_mhz: S,
    /// One of 125, 250, 500.
    pub bandwidth_khz: u32,
    /// Spreading factor, 7..=12. Each chirp symbol spans `2^sf` chips.
    pub sf: u8,
    /// Code rate is 4/(4+n), n in 1..=4.
    pub cr_denominator_n: u8,
    pub tp_dbm: S,
    pub payload_bytes: u32,
    pub preamble_symbols: u32,
    pub explicit_header: bool,
    pub crc_on: bool,
}

impl<S: Scalar> RadioConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if !(7..=12).contains(&self.sf) {
            return Err(Error::domain("radio_config", format!("sf {} outside 7..=12", self.sf)));
        }
        if ![125, 250, 500].contains(&self.bandwidth_khz) {
            return Err(Error::domain(
                "radio_config",
                format!("bandwidth {} kHz not one of 125/250/500", self.bandwidth_khz),
            ));
        }
        if !(1..=4).contains(&self.cr_denominator_n) {
            return Err(Error::domain(
                "radio_config",
                format!("code-rate denominator n {} outside 1..=4", self.cr_denominator_n),
            ));
        }
        if self.payload_bytes == 0 {
            return Err(Error::domain("radio_config", "payload must be at least 1 byte"));
        }
        if self.preamble_symbols == 0 {
            return Err(Error::domain("radio_config", "preamble must have at least 1 symbol"));
        }
        Ok(())
    }

    /// Chips per chirp symbol, `2^sf`.
    pub fn chips_per_symbol(&self) -> u32 {
        1u32 << self.sf
    }

    /// Symbol duration in seconds, `2^sf / bandwidth`.
    pub fn symbol_time_s(&self) -> S {
        S::of(f64::from(self.chips_per_symbol())) / S::of(f64::from(self.bandwidth_khz) * 1e3)
    }

    /// Preamble duration including the 4.25-symbol sync word tail.
    pub fn preamble_time_s(&self) -> S {
        (S::of(f64::from(self.preamble_symbols)) + S::of(4.25)) * self.symbol_time_s()
    }
}

/// Log-distance path-loss parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossParams<S> {
    /// Loss at the reference distance.
    pub ref_loss_db: S,
    pub ref_distance_km: S,
    /// Path-loss exponent.
    pub exponent: S,
    /// Standard deviation of the zero-mean Gaussian shadowing term.
    pub shadow_sigma_db: S,
    /// Per-link fixed obstacle attenuations, summed into every loss.
    pub obstacle_losses_db: Vec<S>,
}

impl<S: Scalar> PathLossParams<S> {
    pub fn validate(&self) -> Result<()> {
        if self.exponent <= S::zero() {
            return Err(Error::domain("path_loss", "exponent must be positive"));
        }
        if self.shadow_sigma_db < S::zero() {
            return Err(Error::domain("path_loss", "shadowing sigma must be non-negative"));
        }
        if self.ref_distance_km <= S::zero() {
            return Err(Error::domain("path_loss", "reference distance must be positive"));
        }
        Ok(())
    }
}

/// Measured indoor attenuation of common obstructions (2 m link).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Obstacle {
    ConcreteWall,
    Glass,
    WoodenDoor,
    SoftPartition,
}

impl Obstacle {
    pub fn attenuation_db<S: Scalar>(self) -> S {
        match self {
            Obstacle::ConcreteWall => S::of(2.2),
            Obstacle::Glass => S::of(2.04),
            Obstacle::WoodenDoor => S::of(2.11),
            Obstacle::SoftPartition => S::of(2.5),
        }
    }
}

/// Transmitter / receiver antenna gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaGains<S> {
    pub g_tx_dbi: S,
    pub g_rx_dbi: S,
}

impl<S: Scalar> Default for AntennaGains<S> {
    fn default() -> Self {
        AntennaGains { g_tx_dbi: S::of(2.15), g_rx_dbi: S::of(2.15) }
    }
}

/// Demodulation-floor table: the minimum SNR at which a frame of a given
/// spreading factor is still readable. Strictly decreasing in SF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrFloorTable<S> {
    floors: [S; 6],
}

impl<S: Scalar> SnrFloorTable<S> {
    /// `floors[i]` is the required SNR for SF `7 + i`.
    pub fn new(floors: [S; 6]) -> Result<Self> {
        for w in floors.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::domain("snr_floor_table", "floors must strictly decrease with sf"));
            }
        }
        Ok(SnrFloorTable { floors })
    }

    pub fn required_snr_db(&self, sf: u8) -> Result<S> {
        if !(7..=12).contains(&sf) {
            return Err(Error::domain("margin", format!("sf {sf} outside 7..=12")));
        }
        Ok(self.floors[usize::from(sf - 7)])
    }
}

impl<S: Scalar> Default for SnrFloorTable<S> {
    /// The usual 2.5 dB-per-SF demodulation ladder, -7.5 dB at SF7 down to
    /// -20 dB at SF12.
    fn default() -> Self {
        SnrFloorTable {
            floors: [
                S::of(-7.5),
                S::of(-10.0),
                S::of(-12.5),
                S::of(-15.0),
                S::of(-17.5),
                S::of(-20.0),
            ],
        }
    }
}

/// Log-distance path loss: `L(d) = L(d0) + 10 n log10(d/d0) + X + sum(obstacles)`.
///
/// `shadow_sample_db` is a caller-supplied draw of the shadowing variable
/// (zero when sigma is zero); keeping the draw outside makes the function
/// pure and lets the engine freeze fading per link.
pub fn path_loss<S: Scalar>(distance_km: S, params: &PathLossParams<S>, shadow_sample_db: S) -> Result<S> {
    params.validate()?;
    if distance_km <= S::zero() {
        return Err(Error::domain("path_loss", "distance must be positive"));
    }
    if distance_km < params.ref_distance_km {
        return Err(Error::domain(
            "path_loss",
            format!("distance {distance_km} km below reference distance {} km", params.ref_distance_km),
        ));
    }
    let obstacles: S = params.obstacle_losses_db.iter().copied().sum();
    Ok(params.ref_loss_db
        + S::of(10.0) * params.exponent * (distance_km / params.ref_distance_km).log10()
        + shadow_sample_db
        + obstacles)
}

/// Received signal strength at the antenna: `TP + G_TX - L_PL`.
pub fn rssi<S: Scalar>(tp_dbm: S, g_tx_dbi: S, l_pl_db: S) -> S {
    tp_dbm + g_tx_dbi - l_pl_db
}

/// Received power in dBW after the receive antenna: `RSSI + G_RX - 30`.
pub fn received_power_dbw<S: Scalar>(rssi_db: S, g_rx_dbi: S) -> S {
    rssi_db + g_rx_dbi - S::of(30.0)
}

/// Diagnostic received-power form `RSSI + SNR - (1 + 10^(0.1 SNR)) - 30`,
/// evaluated exactly as printed. Not used by the metric pipeline — the
/// correction term is dimensionally odd — but kept available for
/// side-by-side inspection against [`received_power_dbw`].
pub fn received_power_diag_dbw<S: Scalar>(rssi_db: S, snr_db: S) -> S {
    rssi_db + snr_db - (S::one() + S::of(10.0).powf(S::of(0.1) * snr_db)) - S::of(30.0)
}

/// Measured SNR from an RSSI reading and the receiver noise floor.
pub fn snr_measured<S: Scalar>(rssi_dbm: S, noise_floor_dbm: S) -> S {
    rssi_dbm - noise_floor_dbm
}

/// Thermal noise floor: `-174 + 10 log10(BW) + NF` dBm.
pub fn noise_floor<S: Scalar>(bandwidth_hz: S, noise_figure_db: S) -> Result<S> {
    if bandwidth_hz <= S::zero() {
        return Err(Error::domain("noise_floor", "bandwidth must be positive"));
    }
    Ok(S::of(-174.0) + S::of(10.0) * bandwidth_hz.log10() + noise_figure_db)
}

/// Demodulation margin: measured SNR minus the floor for the current SF.
/// Positive means demodulable, negative means the frame is weak/corrupt.
pub fn margin<S: Scalar>(snr_measured_db: S, sf: u8, floors: &SnrFloorTable<S>) -> Result<S> {
    Ok(snr_measured_db - floors.required_snr_db(sf)?)
}

/// Frame airtime in seconds.
///
/// Symbol time is `2^sf / BW`; the preamble adds 4.25 sync symbols; the
/// payload takes `8 + max(ceil((8 PL - 4 SF + 28 + 16 CRC - 20 IH) /
/// (4 (SF - 2 DE))) * (n + 4), 0)` symbols, with the low-data-rate
/// optimisation DE = 1 at SF11/12 on 125 kHz and IH = 1 for implicit
/// headers.
pub fn airtime<S: Scalar>(cfg: &RadioConfig<S>) -> Result<S> {
    cfg.validate()?;
    let t_sym = cfg.symbol_time_s();
    let n_payload = payload_symbols(cfg);
    Ok(cfg.preamble_time_s() + S::of(f64::from(n_payload)) * t_sym)
}

/// Payload symbol count for [`airtime`], as an exact integer.
pub fn payload_symbols<S: Scalar>(cfg: &RadioConfig<S>) -> u32 {
    let de: i64 = i64::from(cfg.sf >= 11 && cfg.bandwidth_khz == 125);
    let ih: i64 = i64::from(!cfg.explicit_header);
    let crc: i64 = i64::from(cfg.crc_on);
    let sf = i64::from(cfg.sf);
    let numer = 8 * i64::from(cfg.payload_bytes) - 4 * sf + 28 + 16 * crc - 20 * ih;
    let denom = 4 * (sf - 2 * de);
    let ceil = (numer + denom - 1).div_euclid(denom);
    let coded = ceil * (i64::from(cfg.cr_denominator_n) + 4);
    (8 + coded.max(0)) as u32
}
