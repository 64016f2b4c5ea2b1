//! Per-vehicle logs, stop extraction, aggregate performance metrics, and
//! the post-run audits (signal obedience, headway, ordering).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynamics::DriverKind;

/// Speed below which a vehicle counts as standing, m/s.
pub const STANDSTILL_MS: f64 = 0.05;
/// Minimum standstill duration that counts as a red-light stop, s. Long
/// enough to ignore the sub-second creep at a wave rider's standing start.
pub const MIN_STOP_S: f64 = 0.5;

/// One full stop attributed to a signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopRecord {
    pub site: String,
    pub site_y_km: f64,
    pub begin_s: f64,
    pub wait_s: f64,
}

/// Everything recorded about one simulated vehicle. Positions are in the
/// direction-of-travel coordinate (0 at the wave origin).
#[derive(Debug, Clone)]
pub struct VehicleLog {
    pub kind: DriverKind,
    pub wave: usize,
    pub index_in_wave: usize,
    pub entry_time_s: f64,
    pub finish_time_s: f64,
    pub stops: Vec<StopRecord>,
    /// Sampled trajectory: position in metres every `dt_s` from `t0_s`.
    pub t0_s: f64,
    pub dt_s: f64,
    pub y_m: Vec<f64>,
}

impl VehicleLog {
    pub fn position_m(&self, t: f64) -> f64 {
        let s = (t - self.t0_s) / self.dt_s;
        let i = (s.floor() as isize).clamp(0, self.y_m.len() as isize - 2) as usize;
        let u = (s - i as f64).clamp(0.0, 1.0);
        self.y_m[i] * (1.0 - u) + self.y_m[i + 1] * u
    }

    /// First time the vehicle reaches `target_m`, by linear interpolation.
    pub fn crossing_time_s(&self, target_m: f64) -> Option<f64> {
        let idx = self.y_m.iter().position(|&y| y >= target_m)?;
        if idx == 0 {
            return Some(self.t0_s);
        }
        let (y0, y1) = (self.y_m[idx - 1], self.y_m[idx]);
        let frac = if y1 > y0 { (target_m - y0) / (y1 - y0) } else { 0.0 };
        Some(self.t0_s + (idx as f64 - 1.0 + frac) * self.dt_s)
    }

    pub fn travel_time_s(&self) -> f64 {
        self.finish_time_s - self.entry_time_s
    }

    pub fn total_wait_s(&self) -> f64 {
        self.stops.iter().fold(0.0, |acc, s| acc + s.wait_s)
    }
}

/// Extract full stops from a sampled trajectory: maximal spans at
/// standstill lasting at least `MIN_STOP_S`, attributed to the nearest
/// signal at or ahead of the stop position.
pub fn extract_stops(
    t0_s: f64,
    dt_s: f64,
    y_m: &[f64],
    entry_time_s: f64,
    finish_time_s: f64,
    sites: &[(String, f64)],
) -> Vec<StopRecord> {
    let mut out = Vec::new();
    let first = (((entry_time_s - t0_s) / dt_s).ceil() as usize).min(y_m.len().saturating_sub(1));
    let last = (((finish_time_s - t0_s) / dt_s).floor() as usize).min(y_m.len().saturating_sub(1));
    let mut i = first;
    while i + 1 <= last {
        let moving = (y_m[i + 1] - y_m[i]) / dt_s > STANDSTILL_MS;
        if moving {
            i += 1;
            continue;
        }
        let begin = i;
        while i + 1 <= last && (y_m[i + 1] - y_m[i]) / dt_s <= STANDSTILL_MS {
            i += 1;
        }
        let wait = (i - begin) as f64 * dt_s;
        // Skip the parked-at-entry instant and sub-threshold dips.
        if wait >= MIN_STOP_S {
            let y_stop = y_m[begin];
            let site = sites
                .iter()
                .find(|(_, sy)| *sy >= y_stop - 1.0)
                .map(|(name, sy)| (name.clone(), *sy));
            if let Some((name, sy)) = site {
                out.push(StopRecord {
                    site: name,
                    site_y_km: sy / 1000.0,
                    begin_s: t0_s + begin as f64 * dt_s,
                    wait_s: wait,
                });
            }
        }
    }
    out
}

/// Aggregate performance metrics over one set of vehicle logs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub n_vehicles: usize,
    /// Mean travel time, s.
    pub mtt_s: f64,
    /// Mean red-light stops per vehicle.
    pub mrls: f64,
    /// Mean total time waiting at red lights per vehicle, s.
    pub mrlst_s: f64,
    /// Mean delay over the baseline travel time, s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mdt_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pct_delay: Option<f64>,
    /// Crossing rate over the finish line while the platoon discharges,
    /// veh/h/lane; absent for fewer than two vehicles.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_flow_vphpl: Option<f64>,
    /// Half the maximum rate; only meaningful in steady state.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_flow_vphpl: Option<f64>,
    pub steady_state: bool,
    pub realized_mixture: BTreeMap<String, f64>,
}

/// Compute Table-style metrics for one platoon.
pub fn compute_metrics(logs: &[VehicleLog], baseline_s: Option<f64>, steady_state: bool) -> Metrics {
    assert!(!logs.is_empty(), "metrics need at least one completed log");
    let n = logs.len();
    let mtt = logs.iter().map(|l| l.travel_time_s()).sum::<f64>() / n as f64;
    let mrls = logs.iter().map(|l| l.stops.len() as f64).sum::<f64>() / n as f64;
    let mrlst = logs.iter().map(|l| l.total_wait_s()).sum::<f64>() / n as f64;
    let (mdt, pct) = match baseline_s {
        Some(b) => (Some(mtt - b), Some(100.0 * (mtt - b) / b)),
        None => (None, None),
    };
    let max_flow = if n >= 2 {
        let first = logs
            .iter()
            .map(|l| l.finish_time_s)
            .fold(f64::INFINITY, f64::min);
        let last = logs
            .iter()
            .map(|l| l.finish_time_s)
            .fold(f64::NEG_INFINITY, f64::max);
        let span = last - first;
        // Rate of crossings: n vehicles define n-1 headway intervals.
        (span > 0.0).then(|| 3600.0 * (n as f64 - 1.0) / span)
    } else {
        None
    };
    let mean_flow = match (steady_state, max_flow) {
        (true, Some(q)) => Some(q / 2.0),
        _ => None,
    };
    let mut mixture = BTreeMap::new();
    for kind in DriverKind::ALL {
        let count = logs.iter().filter(|l| l.kind == kind).count();
        if count > 0 {
            mixture.insert(kind.name().to_string(), count as f64 / n as f64);
        }
    }
    Metrics {
        n_vehicles: n,
        mtt_s: mtt,
        mrls,
        mrlst_s: mrlst,
        mdt_s: mdt,
        pct_delay: pct,
        max_flow_vphpl: max_flow,
        mean_flow_vphpl: mean_flow,
        steady_state,
        realized_mixture: mixture,
    }
}

/// True when every vehicle crosses the finish line inside one forward
/// window of the finish signal: the platoon exits in a single wave, so
/// transient and steady-state performance coincide.
pub fn steady_state_flag(
    finish_times_s: &[f64],
    finish_t_roffset_s: f64,
    finish_t_gf_s: f64,
    cycle_s: f64,
) -> bool {
    if finish_times_s.is_empty() {
        return false;
    }
    let first = finish_times_s.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let g = finish_t_roffset_s + ((first - finish_t_roffset_s) / cycle_s).floor() * cycle_s;
    finish_times_s
        .iter()
        .all(|&f| f >= g && f - g < finish_t_gf_s)
}

/// One signal-obedience finding: a vehicle crossed a stop line outside the
/// forward window.
#[derive(Debug, Clone, Serialize)]
pub struct ObedienceViolation {
    pub vehicle: usize,
    pub site: String,
    pub crossing_s: f64,
    /// Seconds past the end of the forward window.
    pub excess_s: f64,
}

/// Post-run audit summary.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AuditReport {
    pub obedience_violations: Vec<ObedienceViolation>,
    /// Worst observed headway shortfall, m (positive means a violation).
    pub worst_headway_shortfall_m: f64,
    pub headway_violations: usize,
    pub ordering_violations: usize,
}

impl AuditReport {
    pub fn clean(&self) -> bool {
        self.obedience_violations.is_empty()
            && self.headway_violations == 0
            && self.ordering_violations == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_with_finish(entry: f64, finish: f64, stops: Vec<StopRecord>) -> VehicleLog {
        VehicleLog {
            kind: DriverKind::Dingo,
            wave: 0,
            index_in_wave: 0,
            entry_time_s: entry,
            finish_time_s: finish,
            stops,
            t0_s: 0.0,
            dt_s: 0.05,
            y_m: vec![0.0, 1.0],
        }
    }

    #[test]
    fn metrics_basics() {
        let logs: Vec<VehicleLog> = (0..27)
            .map(|k| log_with_finish(2.0 * k as f64, 907.0 + 2.0 * k as f64, vec![]))
            .collect();
        let m = compute_metrics(&logs, Some(907.0), true);
        assert_eq!(m.n_vehicles, 27);
        assert!((m.mtt_s - 907.0).abs() < 1e-9);
        assert_eq!(m.mrls, 0.0);
        assert_eq!(m.mrlst_s, 0.0);
        assert!((m.mdt_s.unwrap()).abs() < 1e-9);
        // 26 headway intervals over 52 s: 1800 veh/h.
        assert!((m.max_flow_vphpl.unwrap() - 1800.0).abs() < 1e-9);
        assert!((m.mean_flow_vphpl.unwrap() - 900.0).abs() < 1e-9);
    }

    #[test]
    fn single_vehicle_has_no_flow() {
        let logs = vec![log_with_finish(0.0, 907.0, vec![])];
        let m = compute_metrics(&logs, None, false);
        assert!(m.max_flow_vphpl.is_none());
        assert!(m.mean_flow_vphpl.is_none());
        assert!(m.mdt_s.is_none());
    }

    #[test]
    fn steady_state_window() {
        // Finish window [900, 960).
        let times: Vec<f64> = (0..27).map(|k| 907.0 + 2.0 * k as f64).collect();
        assert!(steady_state_flag(&times, 60.0, 60.0, 120.0));
        let spread = vec![907.0, 1027.0];
        assert!(!steady_state_flag(&spread, 60.0, 60.0, 120.0));
        // Exactly within T_gf - 6 of onset still counts.
        let edge = vec![900.0, 954.0 - 1e-9];
        assert!(steady_state_flag(&edge, 60.0, 60.0, 120.0));
    }

    #[test]
    fn stop_extraction_finds_plateau() {
        let dt = 0.05;
        let mut y = Vec::new();
        let mut pos: f64 = 0.0;
        for i in 0..2000 {
            let t = i as f64 * dt;
            let v = if (20.0..35.0).contains(&t) { 0.0 } else { 10.0 };
            pos += v * dt;
            y.push(pos);
        }
        let sites = vec![("X".to_string(), 250.0)];
        let stops = extract_stops(0.0, dt, &y, 0.0, 100.0, &sites);
        assert_eq!(stops.len(), 1);
        assert_eq!(stops[0].site, "X");
        assert!((stops[0].wait_s - 15.0).abs() < 0.2);
        assert!((stops[0].begin_s - 20.0).abs() < 0.1);
    }
}
