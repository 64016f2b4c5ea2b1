//! File formats beyond the corridor CSV and plan JSON: the timing-table CSV
//! (Table-style column order, presentation rounding) and scenario/metrics
//! JSON helpers. Lines starting with `#` are comments and survive parsing.

use thiserror::Error;

use crate::sim::Scenario;
use crate::timing::{TimingRow, TimingTable};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("timing CSV parse error at line {line}: {msg}")]
    TimingCsv { line: usize, msg: String },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub const TIMING_CSV_HEADER: &str =
    "row,name,odometer_km,node,limit_kph,L_g_km,v_g_kph,xi,T_gf_s,T_gx_s,T_offset_s,T_roffset_s";

fn fmt1(x: f64) -> String {
    format!("{:.1}", x)
}

fn fmt3(x: f64) -> String {
    format!("{:.3}", x)
}

fn fmt4(x: f64) -> String {
    format!("{:.4}", x)
}

/// Emit the timing table in Table-style column order. Seconds are rounded
/// to one decimal and ξ to four, matching the published presentation;
/// re-emitting a parsed table is byte-identical.
pub fn timing_table_to_csv(table: &TimingTable) -> String {
    let mut out = String::from(TIMING_CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let t_offset = r.t_offset_s.map(fmt1).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.row,
            r.name,
            fmt3(r.odometer_km),
            if r.is_node { "yes" } else { "no" },
            fmt1(r.speed_limit_kph),
            fmt3(r.l_g_km),
            fmt1(r.v_g_kph),
            fmt4(r.xi),
            fmt1(r.t_gf_s),
            fmt1(r.t_gx_s),
            t_offset,
            fmt1(r.t_roffset_s),
        ));
    }
    out
}

/// Parse a timing CSV back into a table (at the emitted precision; the
/// block-unit d parameter is presentation-only and not round-tripped).
pub fn timing_table_from_csv(text: &str) -> Result<TimingTable, FormatError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        if !saw_header {
            if line.trim() != TIMING_CSV_HEADER {
                return Err(FormatError::TimingCsv {
                    line: line_no,
                    msg: format!("unexpected header {line:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(FormatError::TimingCsv {
                line: line_no,
                msg: format!("expected 12 fields, got {}", f.len()),
            });
        }
        let num = |s: &str, what: &str| -> Result<f64, FormatError> {
            s.trim().parse().map_err(|_| FormatError::TimingCsv {
                line: line_no,
                msg: format!("bad {what} {s:?}"),
            })
        };
        let is_node = match f[3].trim() {
            "yes" => true,
            "no" => false,
            other => {
                return Err(FormatError::TimingCsv {
                    line: line_no,
                    msg: format!("bad node flag {other:?}"),
                })
            }
        };
        let t_offset_s = match f[10].trim() {
            "" => None,
            s => Some(num(s, "T_offset")?),
        };
        rows.push(TimingRow {
            row: num(f[0], "row")? as usize,
            name: f[1].trim().to_string(),
            odometer_km: num(f[2], "odometer")?,
            is_node,
            speed_limit_kph: num(f[4], "limit")?,
            l_g_km: num(f[5], "L_g")?,
            v_g_kph: num(f[6], "v_g")?,
            xi: num(f[7], "xi")?,
            d: None,
            t_gf_s: num(f[8], "T_gf")?,
            t_gx_s: num(f[9], "T_gx")?,
            t_offset_s,
            t_roffset_s: num(f[11], "T_roffset")?,
        });
    }
    if rows.is_empty() {
        return Err(FormatError::TimingCsv {
            line: 0,
            msg: "no rows".into(),
        });
    }
    let cycle = rows[0].t_gf_s + rows[0].t_gx_s;
    Ok(TimingTable {
        t_g_s: cycle / 2.0,
        cycle_time_s: cycle,
        rows,
    })
}

pub fn scenario_from_json(text: &str) -> Result<Scenario, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn scenario_to_json(scenario: &Scenario) -> Result<String, FormatError> {
    Ok(serde_json::to_string_pretty(scenario)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corridor::{Node, NodePlan, SignalSite, XiThresholds};
    use crate::timing::build_timing_table;

    #[test]
    fn timing_csv_round_trip_bytes() {
        let corridor = crate::corridor::Corridor::new(vec![
            SignalSite { name: "A".into(), odometer_km: 0.0, speed_limit_kph: 60.0 },
            SignalSite { name: "m".into(), odometer_km: 0.4, speed_limit_kph: 60.0 },
            SignalSite { name: "B".into(), odometer_km: 1.5, speed_limit_kph: 50.0 },
        ])
        .unwrap();
        let plan = NodePlan::new(
            vec![
                Node { odometer_km: 0.0, site: Some("A".into()) },
                Node { odometer_km: 1.5, site: Some("B".into()) },
            ],
            120.0,
            false,
        )
        .unwrap();
        let table = build_timing_table(&corridor, &plan, &XiThresholds::default()).unwrap();
        let csv = timing_table_to_csv(&table);
        let parsed = timing_table_from_csv(&csv).unwrap();
        assert_eq!(timing_table_to_csv(&parsed), csv);
        assert_eq!(parsed.cycle_time_s, 120.0);
        assert_eq!(parsed.rows.len(), 3);
    }

    #[test]
    fn timing_csv_skips_comments() {
        let text = format!(
            "# manifest abc123\n{}\n1,A,0.000,yes,60.0,1.500,45.0,0.0000,60.0,60.0,0.0,0.0\n",
            TIMING_CSV_HEADER
        );
        let parsed = timing_table_from_csv(&text).unwrap();
        assert_eq!(parsed.rows.len(), 1);
        assert_eq!(parsed.rows[0].name, "A");
    }

    #[test]
    fn timing_csv_bad_input() {
        assert!(timing_table_from_csv("nonsense\n").is_err());
        let text = format!("{}\n1,A,0.0,maybe,60,1,45,0,60,60,,0\n", TIMING_CSV_HEADER);
        assert!(timing_table_from_csv(&text).is_err());
    }
}
