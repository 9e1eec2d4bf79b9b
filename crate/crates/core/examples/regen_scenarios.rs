//! Regenerates the bundled scenario files in `scenarios/` from the stock
//! defaults. Run from the workspace root after changing any default:
//! `cargo run -p lora-esl-core --example regen_scenarios`.

use lora_esl_core::config::{serialize_scenario, ScenarioFile};
use lora_esl_core::simulator::PolicyKind;
fn main() {
    let out = std::path::Path::new("scenarios");
    std::fs::create_dir_all(out).unwrap();
    let combos = [
        ("one_gw_rssi.json", PolicyKind::Rssi, 1),
        ("two_gw_rssi.json", PolicyKind::Rssi, 2),
        ("four_gw_rssi.json", PolicyKind::Rssi, 4),
        ("ten_gw_rssi.json", PolicyKind::Rssi, 10),
        ("twenty_gw_rssi.json", PolicyKind::Rssi, 20),
        ("ten_gw_snr.json", PolicyKind::Snr, 10),
        ("sweep_rssi.json", PolicyKind::Rssi, 1),
    ];
    for (name, policy, gws) in combos {
        let f = ScenarioFile::stock(policy, gws);
        std::fs::write(out.join(name), serialize_scenario(&f) + "\n").unwrap();
    }
}
