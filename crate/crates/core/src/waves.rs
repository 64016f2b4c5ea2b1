//! Green-arrow kinematics and the per-signal phase state machine: the
//! simulation's ground truth for where waves are and what every light shows.

use thiserror::Error;

use crate::corridor::NodePlan;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("query time {t} s outside the generated green-start horizon")]
    HorizonExceeded { t: f64 },
    #[error("odometer {0} km outside the wave path span")]
    OutsideSpan(f64),
    #[error("odometer {0} km is never uncovered over a cycle (singular point)")]
    AlwaysCovered(f64),
    #[error("odometer {0} km is never covered over a cycle")]
    NeverCovered(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Northbound,
    Southbound,
}

/// Piecewise-linear head trajectory of a green arrow: node i is reached at
/// time i*T_g, clamped constant outside the node span. Slopes are the
/// per-segment wave speeds.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePath {
    pub direction: Direction,
    pub t_g_s: f64,
    /// (time s, position km) breakpoints, strictly increasing in time.
    pub breakpoints: Vec<(f64, f64)>,
}

impl WavePath {
    pub fn from_plan(plan: &NodePlan, direction: Direction) -> Self {
        let t_g = plan.t_g_s();
        let n = plan.nodes().len();
        let breakpoints = (0..n)
            .map(|i| {
                let node = match direction {
                    Direction::Northbound => &plan.nodes()[i],
                    Direction::Southbound => &plan.nodes()[n - 1 - i],
                };
                (i as f64 * t_g, node.odometer_km)
            })
            .collect();
        WavePath {
            direction,
            t_g_s: t_g,
            breakpoints,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.breakpoints.last().unwrap().0
    }

    /// Head position at time t, clamped to the endpoints outside the span.
    pub fn head_position_km(&self, t: f64) -> f64 {
        self.eval(t, false)
    }

    /// Head position with the final piece extended linearly past the last
    /// node instead of clamping. Used as tracking reference for vehicles
    /// that must cross the terminal node at speed.
    pub fn head_position_extended_km(&self, t: f64) -> f64 {
        self.eval(t, true)
    }

    fn eval(&self, t: f64, extend_end: bool) -> f64 {
        let bp = &self.breakpoints;
        let n = bp.len();
        if t <= bp[0].0 {
            return bp[0].1;
        }
        if t >= bp[n - 1].0 {
            if extend_end {
                let (t0, p0) = bp[n - 2];
                let (t1, p1) = bp[n - 1];
                let slope = (p1 - p0) / (t1 - t0);
                return p1 + slope * (t - t1);
            }
            return bp[n - 1].1;
        }
        let i = match bp.binary_search_by(|(bt, _)| bt.partial_cmp(&t).unwrap()) {
            Ok(i) => return bp[i].1,
            Err(i) => i - 1,
        };
        let (t0, p0) = bp[i];
        let (t1, p1) = bp[i + 1];
        p0 + (p1 - p0) * (t - t0) / (t1 - t0)
    }

    /// Head and tail of the k-th arrow of the family at time t. The tail
    /// trails the head by one green time; arrows repeat each cycle.
    pub fn arrow_interval_km(&self, k: i64, t: f64, cycle_s: f64) -> (f64, f64) {
        let shifted = t - k as f64 * cycle_s;
        let head = self.head_position_km(shifted);
        let tail = self.head_position_km(shifted - self.t_g_s);
        (tail, head)
    }

    /// An arrow that is clamped degenerate (tail == head) is off the
    /// corridor and covers nothing.
    pub fn arrow_active(tail_km: f64, head_km: f64) -> bool {
        (head_km - tail_km).abs() > 1e-12
    }

    /// True when the k-th arrow covers `odometer_km` at time t.
    pub fn covers(&self, k: i64, t: f64, cycle_s: f64, odometer_km: f64) -> bool {
        let (tail, head) = self.arrow_interval_km(k, t, cycle_s);
        if !Self::arrow_active(tail, head) {
            return false;
        }
        let (lo, hi) = if tail <= head { (tail, head) } else { (head, tail) };
        (lo..=hi).contains(&odometer_km)
    }

    /// True when any arrow of the family covers `odometer_km` at time t.
    pub fn family_covers(&self, t: f64, cycle_s: f64, odometer_km: f64) -> bool {
        // Arrows outside this k window are clamped degenerate.
        let k_hi = (t / cycle_s).floor() as i64 + 1;
        let k_lo = ((t - self.duration_s() - self.t_g_s) / cycle_s).floor() as i64 - 1;
        (k_lo..=k_hi).any(|k| self.covers(k, t, cycle_s, odometer_km))
    }
}

/// Signal phase; exactly one holds at any instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalPhase {
    Green,
    Amber,
    Red,
}

/// Timing of one signal: green onset at T_roffset each cycle, amber and the
/// all-red clearance carved out of the tail of the forward green T_gf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTiming {
    pub t_roffset_s: f64,
    pub t_gf_s: f64,
    pub amber_s: f64,
    pub all_red_s: f64,
    pub cycle_s: f64,
    /// Green starts are generated for this many cycles either side of zero.
    pub horizon_cycles: i64,
}

impl PhaseTiming {
    pub fn new(t_roffset_s: f64, t_gf_s: f64, cycle_s: f64) -> Self {
        PhaseTiming {
            t_roffset_s,
            t_gf_s,
            amber_s: 5.0,
            all_red_s: 1.0,
            cycle_s,
            horizon_cycles: 1_000_000,
        }
    }

    /// Latest green start at or before t.
    pub fn green_start_before(&self, t: f64) -> Result<f64, WaveError> {
        let k = ((t - self.t_roffset_s) / self.cycle_s).floor();
        if k.abs() > self.horizon_cycles as f64 {
            return Err(WaveError::HorizonExceeded { t });
        }
        Ok(self.t_roffset_s + k * self.cycle_s)
    }

    /// First green start at or after t.
    pub fn next_green_start(&self, t: f64) -> Result<f64, WaveError> {
        let g = self.green_start_before(t)?;
        Ok(if g >= t { g } else { g + self.cycle_s })
    }

    /// Phase shown at time t.
    pub fn signal_state(&self, t: f64) -> Result<SignalPhase, WaveError> {
        let g = self.green_start_before(t)?;
        let amber_start = g + self.t_gf_s - self.amber_s - self.all_red_s;
        let red_start = g + self.t_gf_s - self.all_red_s;
        Ok(if t < amber_start {
            SignalPhase::Green
        } else if t < red_start {
            SignalPhase::Amber
        } else {
            SignalPhase::Red
        })
    }

    /// True when a vehicle may enter the intersection at time t: the
    /// forward movement owns [green start, green start + T_gf).
    pub fn forward_window_contains(&self, t: f64) -> Result<bool, WaveError> {
        let g = self.green_start_before(t)?;
        Ok(t - g < self.t_gf_s)
    }

    /// Time already elapsed in the current cycle, measured from green onset.
    pub fn cycle_position(&self, t: f64) -> f64 {
        (t - self.t_roffset_s).rem_euclid(self.cycle_s)
    }
}

/// Earliest mod-cycle onset of coverage plus the covered duration at
/// `odometer_km`, found by brute-force scan of both arrow families at
/// `dt_s` resolution. Independent oracle for the timing formulas.
pub fn coverage_window(
    northbound: &WavePath,
    southbound: &WavePath,
    odometer_km: f64,
    cycle_s: f64,
    dt_s: f64,
) -> Result<(f64, f64), WaveError> {
    let steps = (cycle_s / dt_s).round() as usize;
    // Scan one cycle starting after the corridor has fully filled with
    // arrows, where coverage is periodic.
    let base = {
        let fill = northbound.duration_s().max(southbound.duration_s()) + northbound.t_g_s;
        (fill / cycle_s).ceil() * cycle_s
    };
    let covered: Vec<bool> = (0..steps)
        .map(|i| {
            let t = base + i as f64 * dt_s;
            northbound.family_covers(t, cycle_s, odometer_km)
                || southbound.family_covers(t, cycle_s, odometer_km)
        })
        .collect();
    let total = covered.iter().filter(|&&c| c).count();
    if total == steps {
        return Err(WaveError::AlwaysCovered(odometer_km));
    }
    if total == 0 {
        return Err(WaveError::NeverCovered(odometer_km));
    }
    let onset_idx = (0..steps)
        .find(|&i| covered[i] && !covered[(i + steps - 1) % steps])
        .expect("mixed coverage must have an onset");
    let onset = (base + onset_idx as f64 * dt_s).rem_euclid(cycle_s);
    Ok((onset, total as f64 * dt_s))
}

/// Earliest mod-cycle time at which either direction's arrow family starts
/// covering the odometer.
pub fn coverage_onset(
    northbound: &WavePath,
    southbound: &WavePath,
    odometer_km: f64,
    cycle_s: f64,
    dt_s: f64,
) -> Result<f64, WaveError> {
    Ok(coverage_window(northbound, southbound, odometer_km, cycle_s, dt_s)?.0)
}
