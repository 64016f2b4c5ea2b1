//! Scenario runner: composes corridor, timing table, wave kinematics and
//! driver policies into a single-lane, no-passing, time-stepped simulation,
//! generating signal-obeying trajectories directly from the behavioural
//! rules.

pub mod metrics;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corridor::{Corridor, CorridorError, NodePlan};
use crate::dynamics::{
    dingo_trajectory_with, DingoOptions, DingoTrajectory, DriverKind, DynamicsError,
    OscillatorParams, ACCEL_CAP_MS2, KPH_TO_MS, SPEED_OFFSET_KPH,
};
use crate::timing::TimingTable;
use crate::waves::{PhaseTiming, SignalPhase, WavePath, WaveError};

use metrics::{extract_stops, AuditReport, Metrics, ObedienceViolation, VehicleLog};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    BadScenario(String),
    #[error("collision: vehicle {follower} reached vehicle {leader} at t={t:.2} s (gap {gap_m:.3} m)")]
    Collision {
        follower: usize,
        leader: usize,
        t: f64,
        gap_m: f64,
    },
    #[error("vehicle {vehicle} had not finished by the horizon {horizon_s:.0} s")]
    Unfinished { vehicle: usize, horizon_s: f64 },
    #[error("timing table has no row for site {0:?}")]
    MissingTimingRow(String),
    #[error("plan has no real-node site to serve as {0}")]
    NoRealNodeSite(&'static str),
    #[error(transparent)]
    Corridor(#[from] CorridorError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Wave(#[from] WaveError),
}

/// Driver-kind fractions; must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    #[serde(default)]
    pub dingo: f64,
    #[serde(default)]
    pub wolf: f64,
    #[serde(default)]
    pub cheetah: f64,
    #[serde(default)]
    pub tortoise: f64,
}

impl Mixture {
    pub fn pure(kind: DriverKind) -> Self {
        let mut m = Mixture {
            dingo: 0.0,
            wolf: 0.0,
            cheetah: 0.0,
            tortoise: 0.0,
        };
        match kind {
            DriverKind::Dingo => m.dingo = 1.0,
            DriverKind::Wolf => m.wolf = 1.0,
            DriverKind::Cheetah => m.cheetah = 1.0,
            DriverKind::Tortoise => m.tortoise = 1.0,
        }
        m
    }

    pub fn fractions(&self) -> [(DriverKind, f64); 4] {
        [
            (DriverKind::Dingo, self.dingo),
            (DriverKind::Wolf, self.wolf),
            (DriverKind::Cheetah, self.cheetah),
            (DriverKind::Tortoise, self.tortoise),
        ]
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let sum: f64 = self.fractions().iter().map(|(_, f)| f).sum();
        if self.fractions().iter().any(|&(_, f)| f < 0.0) {
            return Err(SimError::BadScenario("negative mixture fraction".into()));
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(SimError::BadScenario(format!(
                "mixture fractions sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// How vehicles per wave are decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalModel {
    Deterministic,
    Poisson { mean: f64 },
}

impl Default for ArrivalModel {
    fn default() -> Self {
        ArrivalModel::Deterministic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TravelDirection {
    North,
    South,
}

impl Default for TravelDirection {
    fn default() -> Self {
        TravelDirection::North
    }
}

/// A simulation scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub mixture: Mixture,
    pub vehicles_per_wave: usize,
    pub headway_s: f64,
    #[serde(default)]
    pub direction: TravelDirection,
    #[serde(default)]
    pub populate_all_waves: bool,
    /// Waves to populate when `populate_all_waves` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waves: Option<usize>,
    pub rng_seed: u64,
    #[serde(default)]
    pub arrival_model: ArrivalModel,
    /// Uninterrupted reference travel time for delay metrics, s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_s: Option<f64>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        self.mixture.validate()?;
        if self.vehicles_per_wave < 1 {
            return Err(SimError::BadScenario("vehicles_per_wave must be >= 1".into()));
        }
        if !(self.headway_s > 0.0) {
            return Err(SimError::BadScenario("headway must be positive".into()));
        }
        if let ArrivalModel::Poisson { mean } = self.arrival_model {
            if !(mean > 0.0) {
                return Err(SimError::BadScenario("poisson mean must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Engine knobs; the defaults reproduce the reference behaviour.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub dt_s: f64,
    /// Spacing between stopped vehicles, m. Zero stacks queued point
    /// vehicles at the stop line, matching the reference trajectories.
    pub queue_gap_m: f64,
    /// Grace past the end of the forward window, s, used by the obedience
    /// audit and the steady-state window test. Covers trailing wave riders
    /// whose tracking lag peaks at slow-down nodes; genuine red running
    /// shows up an order of magnitude above it.
    pub obedience_tolerance_s: f64,
    /// Waves populated when a scenario asks for all of them.
    pub default_waves: usize,
    pub oscillator: OscillatorParams,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            dt_s: 0.05,
            queue_gap_m: 0.0,
            obedience_tolerance_s: 2.0,
            default_waves: 3,
            oscillator: OscillatorParams::default(),
        }
    }
}

/// Deterministic per-vehicle driver draw. Two-kind mixtures reduce to
/// independent Bernoulli draws; the realized fraction is whatever the
/// stream produced and is reported alongside the metrics.
pub fn draw_mixture(seed: u64, n: usize, mixture: &Mixture) -> Result<Vec<DriverKind>, SimError> {
    mixture.validate()?;
    if n < 1 {
        return Err(SimError::BadScenario("draw needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            for (kind, f) in mixture.fractions() {
                acc += f;
                if r < acc {
                    return kind;
                }
            }
            DriverKind::Tortoise
        })
        .collect())
}

struct DirectedSite {
    name: String,
    y_m: f64,
    timing: PhaseTiming,
}

/// The corridor as seen travelling in one direction: positions measured
/// from the wave origin, signals and limit zones resolved per site.
pub struct DirectedView {
    path: WavePath,
    cycle_s: f64,
    sites: Vec<DirectedSite>,
    /// (zone start y in m, limit in m/s), ascending.
    zones: Vec<(f64, f64)>,
    entry_y_m: f64,
    entry_base_s: f64,
    finish_y_m: f64,
    finish_site: usize,
}

impl DirectedView {
    pub fn build(
        corridor: &Corridor,
        plan: &NodePlan,
        table: &TimingTable,
        direction: TravelDirection,
    ) -> Result<Self, SimError> {
        let nodes = plan.nodes();
        let n = nodes.len();
        let last_odo = nodes[n - 1].odometer_km;
        let flip = matches!(direction, TravelDirection::South);
        let to_y_km = |o: f64| if flip { last_odo - o } else { o };

        let t_g = plan.t_g_s();
        let breakpoints: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let node = if flip { &nodes[n - 1 - i] } else { &nodes[i] };
                (i as f64 * t_g, to_y_km(node.odometer_km))
            })
            .collect();
        let path = WavePath {
            direction: crate::waves::Direction::Northbound,
            t_g_s: t_g,
            breakpoints,
        };

        let cycle = plan.cycle_time_s();
        let mut sites: Vec<DirectedSite> = Vec::new();
        for s in corridor.sites() {
            let row = table
                .row_for_site(&s.name)
                .ok_or_else(|| SimError::MissingTimingRow(s.name.clone()))?;
            sites.push(DirectedSite {
                name: s.name.clone(),
                y_m: to_y_km(s.odometer_km) * 1000.0,
                timing: PhaseTiming::new(row.t_roffset_s, row.t_gf_s, cycle),
            });
        }
        sites.sort_by(|a, b| a.y_m.partial_cmp(&b.y_m).unwrap());

        let mut zone_breaks: Vec<f64> = vec![0.0];
        for (o, _) in corridor.limit_breaks() {
            let y = to_y_km(o) * 1000.0;
            if y > 0.0 && y < last_odo * 1000.0 {
                zone_breaks.push(y);
            }
        }
        zone_breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        zone_breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let zones: Vec<(f64, f64)> = zone_breaks
            .iter()
            .enumerate()
            .map(|(i, &y0)| {
                let y1 = zone_breaks.get(i + 1).copied().unwrap_or(last_odo * 1000.0);
                let y_mid = 0.5 * (y0 + y1);
                let o_mid = if flip {
                    last_odo - y_mid / 1000.0
                } else {
                    y_mid / 1000.0
                };
                (y0, corridor.limit_at(o_mid) * KPH_TO_MS)
            })
            .collect();

        // Vehicles originate at the first real-node site in travel order
        // and are measured out over the last one.
        let real_node_indices: Vec<usize> = (0..n)
            .filter(|&i| {
                let node = if flip { &nodes[n - 1 - i] } else { &nodes[i] };
                node.is_real()
            })
            .collect();
        let entry_node = *real_node_indices
            .first()
            .ok_or(SimError::NoRealNodeSite("an entry point"))?;
        let finish_node = *real_node_indices
            .last()
            .ok_or(SimError::NoRealNodeSite("a finish line"))?;
        if entry_node == finish_node {
            return Err(SimError::NoRealNodeSite("distinct entry and finish"));
        }
        let entry_y_m = path.breakpoints[entry_node].1 * 1000.0;
        let finish_y_m = path.breakpoints[finish_node].1 * 1000.0;
        let finish_site = sites
            .iter()
            .position(|s| (s.y_m - finish_y_m).abs() < 1e-6)
            .expect("finish node is a site");

        Ok(DirectedView {
            path,
            cycle_s: cycle,
            sites,
            zones,
            entry_y_m,
            entry_base_s: entry_node as f64 * t_g,
            finish_y_m,
            finish_site,
        })
    }

    fn limit_ms_at(&self, y_m: f64) -> f64 {
        let mut lim = self.zones[0].1;
        for &(y0, l) in &self.zones {
            if y0 <= y_m + 1e-9 {
                lim = l;
            } else {
                break;
            }
        }
        lim
    }

    pub fn finish_timing(&self) -> &PhaseTiming {
        &self.sites[self.finish_site].timing
    }

    /// Wave-head path in direction coordinates.
    pub fn wave_path(&self) -> &WavePath {
        &self.path
    }

    pub fn cycle_s(&self) -> f64 {
        self.cycle_s
    }

    pub fn entry_base_s(&self) -> f64 {
        self.entry_base_s
    }

    pub fn sites_y_m(&self) -> Vec<(String, f64)> {
        self.sites.iter().map(|s| (s.name.clone(), s.y_m)).collect()
    }
}

enum Control {
    /// Rides the shared wave-tracking solution at a fixed time offset.
    Wave,
    /// Plain speed policy with signal logic.
    Policy,
}

struct Vehicle {
    kind: DriverKind,
    wave: usize,
    index_in_wave: usize,
    entry_time_s: f64,
    /// Offset of this vehicle's virtual wave behind the shared solution.
    wave_offset_s: f64,
    control: Control,
    y: f64,
    v: f64,
    committed: Option<usize>,
    next_site: usize,
    finish: Option<f64>,
    log: Vec<f64>,
}

/// Result of one scenario run.
pub struct ScenarioRun {
    pub logs: Vec<VehicleLog>,
    pub audit: AuditReport,
    pub scenario: Scenario,
    pub dt_s: f64,
    finish_t_roffset_s: f64,
    finish_t_gf_s: f64,
    cycle_s: f64,
    window_tol_s: f64,
}

impl ScenarioRun {
    pub fn n_waves(&self) -> usize {
        self.logs.iter().map(|l| l.wave).max().map_or(0, |w| w + 1)
    }

    pub fn wave_logs(&self, wave: usize) -> Vec<&VehicleLog> {
        self.logs.iter().filter(|l| l.wave == wave).collect()
    }

    pub fn steady_state(&self, wave: usize) -> bool {
        let finishes: Vec<f64> = self
            .wave_logs(wave)
            .iter()
            .map(|l| l.finish_time_s)
            .collect();
        // Same clearance grace as the obedience audit: a platoon whose last
        // rider trails the window by a tracking-lag fraction of a second
        // still exits as a single wave.
        metrics::steady_state_flag(
            &finishes,
            self.finish_t_roffset_s,
            self.finish_t_gf_s + self.window_tol_s,
            self.cycle_s,
        )
    }

    /// Metrics for one wave's platoon.
    pub fn metrics(&self, wave: usize) -> Metrics {
        let logs: Vec<VehicleLog> = self.wave_logs(wave).into_iter().cloned().collect();
        metrics::compute_metrics(&logs, self.scenario.baseline_s, self.steady_state(wave))
    }

    /// Metrics per wave, first wave first.
    pub fn per_wave_metrics(&self) -> Vec<Metrics> {
        (0..self.n_waves()).map(|w| self.metrics(w)).collect()
    }
}

/// Run one scenario against a corridor, plan and its timing table.
/// Deterministic for fixed inputs and seed. A detected collision aborts:
/// it signals a controller bug, never a valid outcome.
pub fn run_scenario(
    corridor: &Corridor,
    plan: &NodePlan,
    table: &TimingTable,
    scenario: &Scenario,
    opts: &SimOptions,
) -> Result<ScenarioRun, SimError> {
    scenario.validate()?;
    let view = DirectedView::build(corridor, plan, table, scenario.direction)?;
    let dt = opts.dt_s;
    let headway = (scenario.headway_s / dt).round() * dt;
    if headway <= 0.0 {
        return Err(SimError::BadScenario("headway shorter than one step".into()));
    }
    let h_steps = (headway / dt).round() as usize;
    let cycle = view.cycle_s;

    let n_waves = if scenario.populate_all_waves {
        scenario.waves.unwrap_or(opts.default_waves).max(1)
    } else {
        1
    };

    // Per-wave vehicle counts and kinds. The kind draw is shared by every
    // wave so steady-state platoons are identical.
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let counts: Vec<usize> = match scenario.arrival_model {
        ArrivalModel::Deterministic => vec![scenario.vehicles_per_wave; n_waves],
        ArrivalModel::Poisson { mean } => {
            let dist = Poisson::new(mean)
                .map_err(|e| SimError::BadScenario(format!("bad poisson mean: {e}")))?;
            // A wave cannot hold more vehicles than its green admits.
            let entry_t_gf = view
                .sites
                .iter()
                .find(|s| (s.y_m - view.entry_y_m).abs() < 1e-6)
                .map(|s| s.timing.t_gf_s)
                .unwrap_or(plan.t_g_s());
            let cap = ((entry_t_gf - 6.0) / headway).floor().max(1.0) as usize;
            (0..n_waves)
                .map(|_| (dist.sample(&mut rng) as usize).min(cap))
                .collect()
        }
    };
    if counts.iter().all(|&c| c == 0) {
        return Err(SimError::BadScenario("no vehicles in any wave".into()));
    }
    let kinds = draw_mixture(scenario.rng_seed, counts.iter().copied().max().unwrap(), &scenario.mixture)?;

    let mut vehicles: Vec<Vehicle> = Vec::new();
    for (w, &count) in counts.iter().enumerate() {
        for k in 0..count {
            let offset = w as f64 * cycle + k as f64 * headway;
            let kind = kinds[k];
            vehicles.push(Vehicle {
                kind,
                wave: w,
                index_in_wave: k,
                entry_time_s: view.entry_base_s + offset,
                wave_offset_s: offset,
                control: match kind {
                    DriverKind::Dingo => Control::Wave,
                    _ => Control::Policy,
                },
                y: view.entry_y_m,
                v: 0.0,
                committed: None,
                next_site: 0,
                finish: None,
                log: vec![view.entry_y_m],
            });
        }
    }
    if vehicles.is_empty() {
        return Err(SimError::BadScenario("no vehicles".into()));
    }

    let last_entry = vehicles.last().unwrap().entry_time_s;
    let horizon = last_entry + 8.0 * (view.path.duration_s() + cycle) + 120.0;

    // One shared tracking solution serves every wave rider at a time
    // offset; bit-identical trajectories across waves follow.
    let needs_wave = vehicles.iter().any(|v| matches!(v.control, Control::Wave));
    let shared_dingo: Option<DingoTrajectory> = if needs_wave {
        Some(dingo_trajectory_with(
            &view.path,
            &opts.oscillator,
            horizon,
            &DingoOptions {
                dt_s: dt,
                start_time_s: view.entry_base_s,
                start_position_m: Some(view.entry_y_m),
                extend_path_end: true,
            },
        )?)
    } else {
        None
    };

    let n_steps = (horizon / dt).ceil() as usize;
    let a_cap = ACCEL_CAP_MS2;
    let mut completed = false;

    for step in 0..n_steps {
        let t = step as f64 * dt;
        let t_next = t + dt;
        let mut all_finished = true;
        for i in 0..vehicles.len() {
            // Leaders are already advanced to step+1 this iteration.
            let (before, rest) = vehicles.split_at_mut(i);
            let veh = &mut rest[0];
            let leader_log = before.last().map(|l| &l.log);

            if t_next <= veh.entry_time_s + 1e-9 {
                veh.log.push(veh.y);
                all_finished = false;
                continue;
            }

            let leader_cap = leader_log.map(|llog| {
                let shifted = llog[(step + 1).saturating_sub(h_steps)];
                let current = llog[step + 1] - opts.queue_gap_m;
                shifted.min(current)
            });
            let leader_speed = leader_log.map(|llog| (llog[step + 1] - llog[step]) / dt);

            let (mut prop, mut v_next) = match veh.control {
                Control::Wave => {
                    let sol = shared_dingo.as_ref().expect("wave rider without solution");
                    let te = t_next - veh.wave_offset_s;
                    (sol.position_m(te), sol.speed_ms(te))
                }
                Control::Policy => policy_propose(veh, t, dt, &view, leader_speed, a_cap),
            };

            if let Some(cap) = leader_cap {
                if prop > cap {
                    prop = cap;
                    v_next = ((prop - veh.y) / dt).max(0.0);
                }
            }
            if prop < veh.y {
                prop = veh.y;
                v_next = 0.0;
            }

            // A wave rider forced well below its reference has lost its
            // wave: from here on it drives by the vehicle ahead.
            if let Control::Wave = veh.control {
                let sol = shared_dingo.as_ref().unwrap();
                if sol.position_m(t_next - veh.wave_offset_s) - prop > 5.0 {
                    veh.control = Control::Policy;
                }
            }

            if let Some(llog) = leader_log {
                let leader_y = llog[step + 1];
                if prop > leader_y + 1e-6 {
                    return Err(SimError::Collision {
                        follower: i,
                        leader: i - 1,
                        t: t_next,
                        gap_m: leader_y - prop,
                    });
                }
            }

            if veh.finish.is_none() && prop >= view.finish_y_m {
                let prev = veh.y;
                let frac = if prop > prev {
                    ((view.finish_y_m - prev) / (prop - prev)).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                veh.finish = Some(t + frac * dt);
            }
            veh.y = prop;
            veh.v = v_next;
            veh.log.push(prop);
            if veh.finish.is_none() {
                all_finished = false;
            }
        }
        if all_finished {
            completed = true;
            break;
        }
    }

    if !completed {
        let stuck = vehicles
            .iter()
            .position(|v| v.finish.is_none())
            .unwrap_or(0);
        return Err(SimError::Unfinished {
            vehicle: stuck,
            horizon_s: horizon,
        });
    }

    let site_names: Vec<(String, f64)> = view.sites_y_m();
    let logs: Vec<VehicleLog> = vehicles
        .iter()
        .map(|v| {
            let finish = v.finish.unwrap();
            let stops = extract_stops(0.0, dt, &v.log, v.entry_time_s, finish, &site_names);
            VehicleLog {
                kind: v.kind,
                wave: v.wave,
                index_in_wave: v.index_in_wave,
                entry_time_s: v.entry_time_s,
                finish_time_s: finish,
                stops,
                t0_s: 0.0,
                dt_s: dt,
                y_m: v.log.clone(),
            }
        })
        .collect();

    let audit = run_audits(&logs, &view, h_steps, dt, opts.obedience_tolerance_s);
    let finish_timing = view.finish_timing();
    Ok(ScenarioRun {
        finish_t_roffset_s: finish_timing.t_roffset_s,
        finish_t_gf_s: finish_timing.t_gf_s,
        cycle_s: cycle,
        window_tol_s: opts.obedience_tolerance_s,
        logs,
        audit,
        scenario: scenario.clone(),
        dt_s: dt,
    })
}

/// One control step of a policy-driven vehicle: adapt toward the desired
/// speed at the comfort cap, brake for a signal when the projected arrival
/// falls outside the forward window, hold at the stop line until green.
fn policy_propose(
    veh: &mut Vehicle,
    t: f64,
    dt: f64,
    view: &DirectedView,
    leader_speed: Option<f64>,
    a_cap: f64,
) -> (f64, f64) {
    let v_des = match veh.kind {
        DriverKind::Dingo => {
            // A dingo off its wave goes at the speed of the vehicle ahead.
            leader_speed.unwrap_or_else(|| wave_speed_ms_at(view, veh.y)).max(0.0)
        }
        DriverKind::Wolf => view.limit_ms_at(veh.y),
        DriverKind::Cheetah => view.limit_ms_at(veh.y) + SPEED_OFFSET_KPH * KPH_TO_MS,
        DriverKind::Tortoise => (view.limit_ms_at(veh.y) - SPEED_OFFSET_KPH * KPH_TO_MS).max(0.0),
    };
    let mut v_next = veh.v + (v_des - veh.v).clamp(-a_cap * dt, a_cap * dt);

    // A site counts as passed only once the vehicle is clearly beyond the
    // line; standing exactly on it must still mean "held at this signal".
    while veh.next_site < view.sites.len() && view.sites[veh.next_site].y_m <= veh.y - 0.01 {
        veh.next_site += 1;
    }
    if veh.committed.is_some_and(|ci| ci < veh.next_site) {
        veh.committed = None;
    }
    let mut barrier: Option<f64> = None;
    if let Some(site) = view.sites.get(veh.next_site) {
        let dist = site.y_m - veh.y;
        let green_now = matches!(site.timing.signal_state(t), Ok(SignalPhase::Green));
        let arrival_ok = {
            let t_arr = t + dist / veh.v.max(0.5);
            window_allows(&site.timing, t_arr)
        };
        if veh.committed == Some(veh.next_site) {
            if green_now && arrival_ok {
                veh.committed = None;
            }
        } else if veh.committed.is_none() {
            let d_brake = veh.v * veh.v / (2.0 * a_cap);
            if dist <= d_brake + 2.0 * veh.v.max(1.0) * dt && !arrival_ok {
                veh.committed = Some(veh.next_site);
            }
        }
        if veh.committed == Some(veh.next_site) {
            let v_env = (2.0 * a_cap * dist.max(0.0)).sqrt();
            v_next = v_next.min(v_env);
            if dist <= 0.05 && v_next < 0.05 {
                v_next = 0.0;
            }
            barrier = Some(site.y_m);
        }
    }
    let mut prop = veh.y + 0.5 * (veh.v + v_next) * dt;
    if let Some(line) = barrier {
        if prop > line {
            prop = line;
            v_next = ((prop - veh.y) / dt).max(0.0);
        }
    }
    (prop, v_next)
}

/// Local green-wave speed at a position, m/s: slope of the wave path piece
/// covering it.
fn wave_speed_ms_at(view: &DirectedView, y_m: f64) -> f64 {
    let bp = &view.path.breakpoints;
    let y_km = y_m / 1000.0;
    for w in bp.windows(2) {
        if y_km < w[1].1 || w[1] == bp[bp.len() - 1] {
            return ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)) * 1000.0;
        }
    }
    0.0
}

/// A vehicle may enter the intersection while the forward movement owns
/// the cycle, i.e. strictly before the red onset at T_gf - all_red.
fn window_allows(timing: &PhaseTiming, t_arr: f64) -> bool {
    let pos = timing.cycle_position(t_arr);
    pos < timing.t_gf_s - timing.all_red_s
}

fn run_audits(
    logs: &[VehicleLog],
    view: &DirectedView,
    h_steps: usize,
    dt: f64,
    obedience_tol_s: f64,
) -> AuditReport {
    let mut report = AuditReport::default();
    for (vi, log) in logs.iter().enumerate() {
        for site in &view.sites {
            // Vehicles stop (and start) exactly on the line; a crossing is
            // only a crossing once the vehicle is past it.
            let target = site.y_m + 0.5;
            if site.y_m < view.entry_y_m - 1e-6 || site.y_m > view.finish_y_m + 1e-6 {
                continue;
            }
            let Some(crossing) = log.crossing_time_s(target) else {
                continue;
            };
            if crossing > log.finish_time_s + 1.0 {
                continue;
            }
            let pos = site.timing.cycle_position(crossing);
            let excess = pos - site.timing.t_gf_s;
            if excess > obedience_tol_s {
                report.obedience_violations.push(ObedienceViolation {
                    vehicle: vi,
                    site: site.name.clone(),
                    crossing_s: crossing,
                    excess_s: excess,
                });
            }
        }
    }
    for pair in logs.windows(2) {
        let (lead, follow) = (&pair[0], &pair[1]);
        let start = ((follow.entry_time_s / dt).ceil() as usize).max(h_steps);
        for i in start..follow.y_m.len().min(lead.y_m.len()) {
            let shortfall = follow.y_m[i] - lead.y_m[i - h_steps];
            if shortfall > 0.02 {
                report.headway_violations += 1;
                report.worst_headway_shortfall_m = report.worst_headway_shortfall_m.max(shortfall);
            }
            if follow.y_m[i] > lead.y_m[i] + 1e-6 {
                report.ordering_violations += 1;
            }
        }
    }
    report
}

/// Result 5.1 style mixture report: realized counts per kind.
pub fn realized_counts(kinds: &[DriverKind]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for k in kinds {
        *out.entry(k.name().to_string()).or_insert(0) += 1;
    }
    out
}
