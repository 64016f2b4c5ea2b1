//! Longitudinal motion primitives and per-driver-type speed policies:
//! constant-acceleration arcs, braking-to-stop profiles, and the critically
//! damped wave-tracking trajectory used by ideal drivers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::waves::WavePath;

/// Comfortable acceleration/deceleration used by every non-tracking driver,
/// m/s^2.
pub const ACCEL_CAP_MS2: f64 = 2.5;

/// Speed offset of the fast/slow archetypes relative to the limit, km/h.
pub const SPEED_OFFSET_KPH: f64 = 15.0;

pub const KPH_TO_MS: f64 = 1000.0 / 3600.0;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("acceleration sign does not match the requested speed change (a={a}, v0={v0}, v1={v1})")]
    SignMismatch { a: f64, v0: f64, v1: f64 },
    #[error("negative speed in motion primitive: {0}")]
    NegativeSpeed(f64),
    #[error("stop profile needs v0 > 0 and d > 0 (v0={v0}, d={d})")]
    BadStop { v0: f64, d: f64 },
    #[error("oscillator is not critically damped: gamma={gamma}, omega0={omega0}")]
    NotCriticallyDamped { gamma: f64, omega0: f64 },
    #[error("tortoise desired speed would be non-positive at limit {0} km/h")]
    TortoiseBelowZero(f64),
    #[error("bad integration setup: {0}")]
    BadSetup(String),
}

/// Driver archetypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriverKind {
    /// Tracks the green wave; never stops on a well-timed corridor.
    Dingo,
    /// Holds the speed limit.
    Wolf,
    /// Holds limit + 15 km/h.
    Cheetah,
    /// Holds limit - 15 km/h.
    Tortoise,
}

impl DriverKind {
    pub const ALL: [DriverKind; 4] = [
        DriverKind::Dingo,
        DriverKind::Wolf,
        DriverKind::Cheetah,
        DriverKind::Tortoise,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DriverKind::Dingo => "dingo",
            DriverKind::Wolf => "wolf",
            DriverKind::Cheetah => "cheetah",
            DriverKind::Tortoise => "tortoise",
        }
    }
}

/// Free-flow speed a driver of `kind` aims for, km/h. Dingoes aim for the
/// local green-wave speed instead of a limit-derived value.
pub fn desired_speed_kph(
    kind: DriverKind,
    limit_kph: f64,
    wave_speed_kph: f64,
) -> Result<f64, DynamicsError> {
    Ok(match kind {
        DriverKind::Dingo => wave_speed_kph,
        DriverKind::Wolf => limit_kph,
        DriverKind::Cheetah => limit_kph + SPEED_OFFSET_KPH,
        DriverKind::Tortoise => {
            if limit_kph <= SPEED_OFFSET_KPH {
                return Err(DynamicsError::TortoiseBelowZero(limit_kph));
            }
            limit_kph - SPEED_OFFSET_KPH
        }
    })
}

/// Position of a vehicle changing speed from V0 to V1 at constant
/// acceleration A starting at time t0 from position X0: uniform motion
/// before t0, a constant-acceleration arc, then uniform motion at V1.
/// Position and speed are continuous at both junctions.
pub fn speed_change_position(
    t: f64,
    x0_m: f64,
    v0_ms: f64,
    v1_ms: f64,
    a_ms2: f64,
    t0_s: f64,
) -> Result<f64, DynamicsError> {
    if v0_ms < 0.0 {
        return Err(DynamicsError::NegativeSpeed(v0_ms));
    }
    if v1_ms < 0.0 {
        return Err(DynamicsError::NegativeSpeed(v1_ms));
    }
    if v1_ms == v0_ms {
        return Ok(x0_m + v0_ms * (t - t0_s));
    }
    if a_ms2 == 0.0 || (a_ms2 > 0.0) != (v1_ms > v0_ms) {
        return Err(DynamicsError::SignMismatch {
            a: a_ms2,
            v0: v0_ms,
            v1: v1_ms,
        });
    }
    let ramp_end = t0_s + (v1_ms - v0_ms) / a_ms2;
    Ok(if t < t0_s {
        x0_m + v0_ms * (t - t0_s)
    } else if t <= ramp_end {
        x0_m + v0_ms * (t - t0_s) + 0.5 * a_ms2 * (t - t0_s) * (t - t0_s)
    } else {
        let ramp_dist = (v1_ms * v1_ms - v0_ms * v0_ms) / (2.0 * a_ms2);
        x0_m + ramp_dist + v1_ms * (t - ramp_end)
    })
}

/// Deceleration and stop duration implied by coming to rest over distance d
/// from speed v0: a = -v0^2 / (2d), T = 2d / v0.
pub fn stop_profile_params(v0_ms: f64, d_m: f64) -> Result<(f64, f64), DynamicsError> {
    if !(v0_ms > 0.0 && d_m > 0.0) {
        return Err(DynamicsError::BadStop { v0: v0_ms, d: d_m });
    }
    let a = -0.5 * v0_ms * v0_ms / d_m;
    Ok((a, -v0_ms / a))
}

/// Position of a vehicle braking to a stop: at time t0 it is at x0 moving
/// at v0 and comes to rest exactly at x0 + d.
pub fn stop_profile(t: f64, t0_s: f64, x0_m: f64, v0_ms: f64, d_m: f64) -> Result<f64, DynamicsError> {
    let (a, t_stop) = stop_profile_params(v0_ms, d_m)?;
    Ok(if t < t0_s {
        x0_m + v0_ms * (t - t0_s)
    } else if t < t0_s + t_stop {
        x0_m + v0_ms * (t - t0_s) + 0.5 * a * (t - t0_s) * (t - t0_s)
    } else {
        x0_m + d_m
    })
}

/// Parameters of the critically damped tracking oscillator
/// x'' + gamma x' + omega0^2 x = omega0^2 w(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub omega0: f64,
    pub gamma: f64,
}

impl OscillatorParams {
    pub fn critically_damped(omega0: f64) -> Self {
        OscillatorParams {
            omega0,
            gamma: 2.0 * omega0,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if (self.gamma - 2.0 * self.omega0).abs() > 1e-9 || self.omega0 <= 0.0 {
            return Err(DynamicsError::NotCriticallyDamped {
                gamma: self.gamma,
                omega0: self.omega0,
            });
        }
        Ok(())
    }

    /// Steady-state time lag behind a constant-speed reference: 2 / omega0.
    pub fn steady_lag_s(&self) -> f64 {
        2.0 / self.omega0
    }
}

impl Default for OscillatorParams {
    fn default() -> Self {
        OscillatorParams::critically_damped(0.25)
    }
}

/// Integration options for `dingo_trajectory_with`.
#[derive(Debug, Clone, Copy)]
pub struct DingoOptions {
    pub dt_s: f64,
    /// The vehicle is parked at the start position until this time.
    pub start_time_s: f64,
    /// Starting position in metres; defaults to the path head at start time.
    pub start_position_m: Option<f64>,
    /// Track the path with its final piece extended past the terminal node
    /// instead of clamped, so the vehicle crosses it at speed.
    pub extend_path_end: bool,
}

impl Default for DingoOptions {
    fn default() -> Self {
        DingoOptions {
            dt_s: 0.05,
            start_time_s: 0.0,
            start_position_m: None,
            extend_path_end: false,
        }
    }
}

/// A sampled wave-tracking trajectory with C1 interpolation.
#[derive(Debug, Clone)]
pub struct DingoTrajectory {
    t0_s: f64,
    dt_s: f64,
    x_m: Vec<f64>,
    v_ms: Vec<f64>,
    a_ms2: Vec<f64>,
}

impl DingoTrajectory {
    pub fn start_time_s(&self) -> f64 {
        self.t0_s
    }

    pub fn end_time_s(&self) -> f64 {
        self.t0_s + (self.x_m.len() - 1) as f64 * self.dt_s
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let s = (t - self.t0_s) / self.dt_s;
        let i = (s.floor() as isize).clamp(0, self.x_m.len() as isize - 2) as usize;
        let u = (s - i as f64).clamp(0.0, 1.0);
        (i, u)
    }

    /// Position in metres, cubic Hermite between samples, clamped at the
    /// ends (parked before start, frozen after the horizon).
    pub fn position_m(&self, t: f64) -> f64 {
        if t <= self.t0_s {
            return self.x_m[0];
        }
        if t >= self.end_time_s() {
            return *self.x_m.last().unwrap();
        }
        let (i, u) = self.locate(t);
        let h = self.dt_s;
        let (x0, x1) = (self.x_m[i], self.x_m[i + 1]);
        let (m0, m1) = (self.v_ms[i] * h, self.v_ms[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * x0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * x1
            + (u3 - u2) * m1
    }

    /// Speed in m/s, derivative of the Hermite interpolant.
    pub fn speed_ms(&self, t: f64) -> f64 {
        if t <= self.t0_s || t >= self.end_time_s() {
            return 0.0;
        }
        let (i, u) = self.locate(t);
        let h = self.dt_s;
        let (x0, x1) = (self.x_m[i], self.x_m[i + 1]);
        let (m0, m1) = (self.v_ms[i] * h, self.v_ms[i + 1] * h);
        let u2 = u * u;
        let dx = (6.0 * u2 - 6.0 * u) * x0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * x1
            + (3.0 * u2 - 2.0 * u) * m1;
        dx / h
    }

    /// Acceleration in m/s^2, linear between samples.
    pub fn accel_ms2(&self, t: f64) -> f64 {
        if t <= self.t0_s || t >= self.end_time_s() {
            return 0.0;
        }
        let (i, u) = self.locate(t);
        self.a_ms2[i] * (1.0 - u) + self.a_ms2[i + 1] * u
    }

    pub fn max_abs_accel_ms2(&self) -> f64 {
        self.a_ms2.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// First time the (monotone) trajectory reaches `x_target_m`.
    pub fn crossing_time_s(&self, x_target_m: f64) -> Option<f64> {
        let idx = self.x_m.iter().position(|&x| x >= x_target_m)?;
        if idx == 0 {
            return Some(self.t0_s);
        }
        let (x0, x1) = (self.x_m[idx - 1], self.x_m[idx]);
        let frac = if x1 > x0 { (x_target_m - x0) / (x1 - x0) } else { 0.0 };
        Some(self.t0_s + (idx as f64 - 1.0 + frac) * self.dt_s)
    }
}

/// Numerical solution of the tracking equation with default options:
/// start parked at the path origin at t = 0, fixed-step RK4.
pub fn dingo_trajectory(
    path: &WavePath,
    params: &OscillatorParams,
    horizon_s: f64,
) -> Result<DingoTrajectory, DynamicsError> {
    dingo_trajectory_with(path, params, horizon_s, &DingoOptions::default())
}

pub fn dingo_trajectory_with(
    path: &WavePath,
    params: &OscillatorParams,
    horizon_s: f64,
    opts: &DingoOptions,
) -> Result<DingoTrajectory, DynamicsError> {
    params.validate()?;
    if !(opts.dt_s > 0.0) || horizon_s <= opts.start_time_s {
        return Err(DynamicsError::BadSetup(format!(
            "dt={} horizon={} start={}",
            opts.dt_s, horizon_s, opts.start_time_s
        )));
    }
    let forcing = |t: f64| -> f64 {
        1000.0
            * if opts.extend_path_end {
                path.head_position_extended_km(t)
            } else {
                path.head_position_km(t)
            }
    };
    let w0 = params.omega0;
    let g = params.gamma;
    let accel = |t: f64, x: f64, v: f64| w0 * w0 * (forcing(t) - x) - g * v;

    let steps = ((horizon_s - opts.start_time_s) / opts.dt_s).ceil() as usize;
    let mut x = opts
        .start_position_m
        .unwrap_or_else(|| forcing(opts.start_time_s));
    let mut v = 0.0;
    let h = opts.dt_s;
    let mut xs = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let mut accs = Vec::with_capacity(steps + 1);
    xs.push(x);
    vs.push(v);
    accs.push(accel(opts.start_time_s, x, v));
    for i in 0..steps {
        let t = opts.start_time_s + i as f64 * h;
        let (k1x, k1v) = (v, accel(t, x, v));
        let (k2x, k2v) = (
            v + 0.5 * h * k1v,
            accel(t + 0.5 * h, x + 0.5 * h * k1x, v + 0.5 * h * k1v),
        );
        let (k3x, k3v) = (
            v + 0.5 * h * k2v,
            accel(t + 0.5 * h, x + 0.5 * h * k2x, v + 0.5 * h * k2v),
        );
        let (k4x, k4v) = (v + h * k3v, accel(t + h, x + h * k3x, v + h * k3v));
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        xs.push(x);
        vs.push(v);
        accs.push(accel(t + h, x, v));
    }
    Ok(DingoTrajectory {
        t0_s: opts.start_time_s,
        dt_s: h,
        x_m: xs,
        v_ms: vs,
        a_ms2: accs,
    })
}
