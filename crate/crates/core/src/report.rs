//! Report emission.
//!
//! JSON carries the full [`MetricsReport`] including traces; CSV is the
//! tabular view, one row per ring per metric. dB quantities print with two
//! decimals, ratios with four, counters as integers.

use std::fmt::Write as _;

use crate::simulator::MetricsReport;

pub const RING_CSV_HEADER: &str = "gw_count,ring,metric,value";
pub const COMPARISON_CSV_HEADER: &str = "gw_count,ring,plr,mean_rp_dbw,above_threshold_fraction";

fn fmt_db(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".into(), |x| format!("{x:.2}"))
}

fn fmt_ratio(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".into(), |x| format!("{x:.4}"))
}

/// Full report as pretty JSON. Byte-identical for identical reports.
pub fn report_json(report: &MetricsReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Long-format CSV: one row per ring per metric.
pub fn report_csv(report: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str(RING_CSV_HEADER);
    out.push('\n');
    let g = report.gw_count;
    for m in &report.per_ring {
        let mut row = |metric: &str, value: String| {
            writeln!(out, "{g},{ring},{metric},{value}", ring = m.ring).expect("string write");
        };
        row("scheduled", m.counts.scheduled.to_string());
        row("delivered", m.counts.delivered.to_string());
        row("lost_collision", m.counts.lost_collision.to_string());
        row("lost_capture", m.counts.lost_capture.to_string());
        row("lost_below_sensitivity", m.counts.lost_below_sensitivity.to_string());
        row("lost_corrupt", m.counts.lost_corrupt.to_string());
        row("plr", fmt_ratio(m.plr));
        row("mean_rssi_dbm", fmt_db(m.mean_rssi_dbm));
        row("mean_snr_db", fmt_db(m.mean_snr_db));
        row("mean_rp_dbw", fmt_db(m.mean_rp_dbw));
        row("above_threshold_fraction", fmt_ratio(m.received_above_threshold_fraction));
    }
    for sf in &report.per_sf {
        writeln!(out, "{g},all,sf{}_scheduled,{}", sf.sf, sf.scheduled).expect("string write");
        writeln!(out, "{g},all,sf{}_delivered,{}", sf.sf, sf.delivered).expect("string write");
    }
    writeln!(out, "{g},all,total_plr,{}", fmt_ratio(report.total_plr)).expect("string write");
    writeln!(
        out,
        "{g},all,above_threshold_fraction,{}",
        fmt_ratio(report.received_above_threshold_fraction)
    )
    .expect("string write");
    out
}

/// The cross-gateway comparison table behind the sweep: one row per
/// (gateway count, ring).
pub fn comparison_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    out.push_str(COMPARISON_CSV_HEADER);
    out.push('\n');
    for report in reports {
        for m in &report.per_ring {
            writeln!(
                out,
                "{},{},{},{},{}",
                report.gw_count,
                m.ring,
                fmt_ratio(m.plr),
                fmt_db(m.mean_rp_dbw),
                fmt_ratio(m.received_above_threshold_fraction),
            )
            .expect("string write");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioFile;
    use crate::simulator::{run_scenario, PolicyKind};

    fn tiny_report() -> MetricsReport {
        let mut f = ScenarioFile::stock(PolicyKind::Rssi, 1);
        f.deployment.allocation.first_term = 4;
        f.deployment.allocation.common_diff = 2;
        f.traffic.horizon_s = 1800.0;
        run_scenario(&f.to_scenario().unwrap()).unwrap()
    }

    #[test]
    fn csv_has_fixed_header_and_formats() {
        let r = tiny_report();
        let csv = report_csv(&r);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), RING_CSV_HEADER);
        // Ratios carry four decimals, dB values two.
        let plr_row = csv.lines().find(|l| l.contains(",0,plr,")).unwrap();
        let v = plr_row.rsplit(',').next().unwrap();
        assert!(v == "nan" || v.split('.').nth(1).unwrap().len() == 4, "{plr_row}");
        let db_row = csv.lines().find(|l| l.contains(",0,mean_rssi_dbm,")).unwrap();
        let v = db_row.rsplit(',').next().unwrap();
        assert!(v == "nan" || v.split('.').nth(1).unwrap().len() == 2, "{db_row}");
    }

    #[test]
    fn comparison_csv_rows_are_counts_times_rings() {
        let r = tiny_report();
        let csv = comparison_csv(std::slice::from_ref(&r));
        assert_eq!(csv.lines().count(), 1 + r.per_ring.len());
        assert!(csv.starts_with(COMPARISON_CSV_HEADER));
    }

    #[test]
    fn json_and_csv_agree_numerically() {
        let r = tiny_report();
        let json: serde_json::Value = serde_json::from_str(&report_json(&r)).unwrap();
        let csv = report_csv(&r);
        let scheduled_json = json["per_ring"][0]["counts"]["scheduled"].as_u64().unwrap();
        let scheduled_csv: u64 = csv
            .lines()
            .find(|l| l.contains(",0,scheduled,"))
            .unwrap()
            .rsplit(',')
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(scheduled_json, scheduled_csv);
    }
}
