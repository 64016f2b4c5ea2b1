//! Artifact rendering: wave and phase CSVs, metrics JSON, trajectory CSVs
//! and the time-space SVG. All output is a deterministic function of the
//! inputs.

use anyhow::Result;
use serde_json::json;

use greenwave_core::sim::DirectedView;
use greenwave_core::{
    Direction, DriverKind, NodePlan, PhaseTiming, Scenario, ScenarioRun, SignalPhase, TimingTable,
    TravelDirection, WavePath,
};

use crate::manifest::RunManifest;

/// Active green arrows of both families sampled over time:
/// `t_s,direction,k,tail_km,head_km`.
pub fn waves_csv(m: &RunManifest, plan: &NodePlan, t_end: Option<f64>, dt: f64) -> Result<String> {
    let cycle = plan.cycle_time_s();
    let nb = WavePath::from_plan(plan, Direction::Northbound);
    let sb = WavePath::from_plan(plan, Direction::Southbound);
    let t_end = t_end.unwrap_or(nb.duration_s() + cycle);
    anyhow::ensure!(dt > 0.0, "waves sampling step must be positive");
    let mut csv = format!("{}t_s,direction,k,tail_km,head_km\n", m.csv_comment());
    let mut t = 0.0;
    while t <= t_end + 1e-9 {
        for (name, path) in [("north", &nb), ("south", &sb)] {
            let k_hi = (t / cycle).floor() as i64 + 1;
            let k_lo = ((t - path.duration_s() - path.t_g_s) / cycle).floor() as i64 - 1;
            for k in k_lo..=k_hi {
                let (tail, head) = path.arrow_interval_km(k, t, cycle);
                if WavePath::arrow_active(tail, head) {
                    csv.push_str(&format!("{t:.2},{name},{k},{tail:.4},{head:.4}\n"));
                }
            }
        }
        t += dt;
    }
    Ok(csv)
}

/// Per-site phase intervals: `name,phase,start_s,end_s`, clipped to
/// [0, t_end].
pub fn phases_csv(m: &RunManifest, table: &TimingTable, t_end: Option<f64>, cycle: f64) -> String {
    let t_end = t_end.unwrap_or(table.t_g_s * (table.rows.len() as f64) + cycle);
    let mut csv = format!("{}name,phase,start_s,end_s\n", m.csv_comment());
    for row in &table.rows {
        let timing = PhaseTiming::new(row.t_roffset_s, row.t_gf_s, cycle);
        let k0 = ((-cycle - timing.t_roffset_s) / cycle).floor() as i64;
        let k1 = ((t_end - timing.t_roffset_s) / cycle).ceil() as i64;
        for k in k0..=k1 {
            let g = timing.t_roffset_s + k as f64 * cycle;
            let bounds = [
                (SignalPhase::Green, g, g + timing.t_gf_s - timing.amber_s - timing.all_red_s),
                (
                    SignalPhase::Amber,
                    g + timing.t_gf_s - timing.amber_s - timing.all_red_s,
                    g + timing.t_gf_s - timing.all_red_s,
                ),
                (SignalPhase::Red, g + timing.t_gf_s - timing.all_red_s, g + cycle),
            ];
            for (phase, start, end) in bounds {
                let (s, e) = (start.max(0.0), end.min(t_end));
                if e > s {
                    let phase = match phase {
                        SignalPhase::Green => "green",
                        SignalPhase::Amber => "amber",
                        SignalPhase::Red => "red",
                    };
                    csv.push_str(&format!("{},{phase},{s:.1},{e:.1}\n", row.name));
                }
            }
        }
    }
    csv
}

/// Metrics document: wave-0 metrics plus per-wave breakdown and the audit
/// summary.
pub fn metrics_json(m: &RunManifest, run: &ScenarioRun) -> String {
    let per_wave = run.per_wave_metrics();
    let mut doc = json!({
        "manifest": m.hash(),
        "n_waves": run.n_waves(),
        "metrics": per_wave[0],
        "audit": {
            "clean": run.audit.clean(),
            "obedience_violations": run.audit.obedience_violations.len(),
            "headway_violations": run.audit.headway_violations,
            "ordering_violations": run.audit.ordering_violations,
        },
    });
    if per_wave.len() > 1 {
        doc["per_wave"] = json!(per_wave);
    }
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

fn sample_times(run: &ScenarioRun, step_s: f64) -> Vec<f64> {
    let t_end = run
        .logs
        .iter()
        .map(|l| l.finish_time_s)
        .fold(0.0f64, f64::max)
        + 10.0;
    let n = (t_end / step_s).ceil() as usize;
    (0..=n).map(|i| i as f64 * step_s).collect()
}

/// Wide trajectory CSV: `t_s,wave_head_km` then one position column per
/// vehicle, sampled every second.
pub fn trajectories_csv(
    m: &RunManifest,
    run: &ScenarioRun,
    view: &DirectedView,
    _plan: &NodePlan,
) -> String {
    let mut csv = String::from(m.csv_comment());
    csv.push_str("t_s,wave_head_km");
    for log in &run.logs {
        csv.push_str(&format!(",veh_{:03}", log.wave * 1000 + log.index_in_wave));
    }
    csv.push('\n');
    for t in sample_times(run, 1.0) {
        csv.push_str(&format!("{t:.1},{:.4}", view.wave_path().head_position_km(t)));
        for log in &run.logs {
            csv.push_str(&format!(",{:.4}", log.position_m(t) / 1000.0));
        }
        csv.push('\n');
    }
    csv
}

/// One vehicle's trajectory with derived speed and acceleration:
/// `t_s,x_km,v_ms,a_ms2`, central differences at 0.1 s sampling.
pub fn kinematics_csv(m: &RunManifest, log: &greenwave_core::VehicleLog) -> String {
    let mut csv = format!("{}t_s,x_km,v_ms,a_ms2\n", m.csv_comment());
    let dt = 0.1;
    let n = ((log.finish_time_s - log.entry_time_s) / dt).ceil() as usize;
    for i in 0..=n {
        let t = log.entry_time_s + i as f64 * dt;
        let x = log.position_m(t);
        let v = (log.position_m(t + dt) - log.position_m(t - dt)) / (2.0 * dt);
        let a = (log.position_m(t + dt) - 2.0 * x + log.position_m(t - dt)) / (dt * dt);
        csv.push_str(&format!("{t:.1},{:.5},{v:.3},{a:.3}\n", x / 1000.0));
    }
    csv
}

/// Long-form time-space CSV for selected vehicles: `t_s` then one column
/// per selection.
pub fn diagram_csv(m: &RunManifest, run: &ScenarioRun, selection: &[usize]) -> String {
    let mut csv = String::from(m.csv_comment());
    csv.push_str("t_s");
    for &i in selection {
        csv.push_str(&format!(",veh_{i:03}"));
    }
    csv.push('\n');
    for t in sample_times(run, 1.0) {
        csv.push_str(&format!("{t:.1}"));
        for &i in selection {
            csv.push_str(&format!(",{:.4}", run.logs[i].position_m(t) / 1000.0));
        }
        csv.push('\n');
    }
    csv
}

fn kind_color(kind: DriverKind) -> &'static str {
    match kind {
        DriverKind::Dingo => "#1f6fb2",
        DriverKind::Wolf => "#555555",
        DriverKind::Cheetah => "#8c2fb8",
        DriverKind::Tortoise => "#b25e1f",
    }
}

/// Time-space diagram: phase bands along each site's position line,
/// trajectory polylines for the selected vehicles.
pub fn diagram_svg(
    m: &RunManifest,
    run: &ScenarioRun,
    table: &TimingTable,
    plan: &NodePlan,
    scenario: &Scenario,
    selection: &[usize],
) -> String {
    let cycle = plan.cycle_time_s();
    let (span_lo, span_hi) = plan.span_km();
    let last = span_hi;
    let flip = matches!(scenario.direction, TravelDirection::South);
    let to_y_km = |o: f64| if flip { last - o } else { o };

    let t_end = run
        .logs
        .iter()
        .map(|l| l.finish_time_s)
        .fold(0.0f64, f64::max)
        + 30.0;
    let (w, h, margin) = (960.0, 600.0, 40.0);
    let sx = (w - 2.0 * margin) / t_end;
    let sy = (h - 2.0 * margin) / (span_hi - span_lo);
    let px = |t: f64| margin + t * sx;
    let py = |y_km: f64| h - margin - (y_km - span_lo) * sy;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<!-- manifest {} -->\n\
         <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
        m.hash()
    ));
    // Phase bands per site.
    for row in &table.rows {
        let y = py(to_y_km(row.odometer_km));
        let width = if row.is_node { 2.5 } else { 1.5 };
        let timing = PhaseTiming::new(row.t_roffset_s, row.t_gf_s, cycle);
        let k1 = ((t_end - timing.t_roffset_s) / cycle).ceil() as i64;
        for k in -1..=k1 {
            let g = timing.t_roffset_s + k as f64 * cycle;
            let segments = [
                (g, g + row.t_gf_s - 6.0, "#37a33c"),
                (g + row.t_gf_s - 6.0, g + row.t_gf_s - 1.0, "#e8a013"),
                (g + row.t_gf_s - 1.0, g + cycle, "#cf3a3a"),
            ];
            for (s, e, color) in segments {
                let (s, e) = (s.max(0.0), e.min(t_end));
                if e > s {
                    svg.push_str(&format!(
                        "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                         stroke=\"{color}\" stroke-width=\"{width}\"/>\n",
                        px(s),
                        px(e)
                    ));
                }
            }
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"8\" fill=\"#333\">{}</text>\n",
            w - margin + 3.0,
            y + 2.5,
            xml_escape(&row.name)
        ));
    }
    // Vehicle polylines, one point every two seconds.
    for &i in selection {
        let log = &run.logs[i];
        let mut points = String::new();
        let mut t = log.entry_time_s;
        while t <= log.finish_time_s + 2.0 {
            let y_km = log.position_m(t) / 1000.0;
            points.push_str(&format!("{:.2},{:.2} ", px(t), py(y_km)));
            t += 2.0;
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"0.9\" points=\"{}\"/>\n",
            kind_color(log.kind),
            points.trim_end()
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{margin}\" y=\"{:.1}\" font-size=\"11\" fill=\"#000\">time →  \
         (position in travel direction ↑, {} vehicles)</text>\n</svg>\n",
        h - 10.0,
        selection.len()
    ));
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
