//! Corridor traffic-signal coordination toolkit: computes green-wave
//! timing plans for arterial roads with real and virtual nodes, and
//! validates them with a deterministic microsimulation of heterogeneous
//! driver populations.

pub mod corridor;
pub mod dynamics;
pub mod flow;
pub mod formats;
pub mod placement;
pub mod sim;
pub mod timing;
pub mod waves;

pub use corridor::{
    validate_plan, Corridor, CorridorError, Node, NodePlan, NodePlanDoc, PlanNode, SegmentPosition,
    SignalSite, Violation, XiThresholds,
};
pub use dynamics::{
    desired_speed_kph, dingo_trajectory, dingo_trajectory_with, speed_change_position,
    stop_profile, stop_profile_params, DingoOptions, DingoTrajectory, DriverKind, DynamicsError,
    OscillatorParams,
};
pub use flow::{FlowError, GreenbergModel};
pub use placement::{
    check_constraints, eta, optimize_plan, ConstraintViolation, OptimizeOutcome, PlacementConfig,
    PlacementError, SpeedBand, TracePoint,
};
pub use sim::metrics::{
    compute_metrics, steady_state_flag, AuditReport, Metrics, StopRecord, VehicleLog,
};
pub use sim::{
    draw_mixture, run_scenario, ArrivalModel, DirectedView, Mixture, Scenario, ScenarioRun,
    SimError, SimOptions, TravelDirection,
};
pub use timing::{
    build_timing_table, cross_green_s, forward_green_s, midblock_reduced_offset_s, node_offset_s,
    wave_speed_kph, TimingError, TimingRow, TimingTable,
};
pub use waves::{
    coverage_onset, coverage_window, Direction, PhaseTiming, SignalPhase, WaveError, WavePath,
};
