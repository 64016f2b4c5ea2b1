//! Signal timing planner: turns a corridor plus node plan into the full
//! per-site timing table (wave speeds, green splits, reduced offsets).

use thiserror::Error;

use crate::corridor::{validate_plan, Corridor, CorridorError, NodePlan, Violation, XiThresholds};

#[derive(Debug, Error)]
pub enum TimingError {
    #[error("non-positive input: {0}")]
    NonPositive(String),
    #[error("xi {0} outside [0, 1/2)")]
    XiOutOfRange(f64),
    #[error("d parameter singular at 1/2")]
    DSingular,
    #[error("d {0} outside (0, 1)")]
    DOutOfRange(f64),
    #[error("node index {index} out of range (plan has {count} nodes)")]
    NodeIndexOutOfRange { index: usize, count: usize },
    #[error("plan fails validation: {0:?}")]
    PlanInvalid(Vec<Violation>),
    #[error(transparent)]
    Corridor(#[from] CorridorError),
}

/// Green-wave speed over a segment: the distance between nodes divided by
/// the node green time, in km/h.
pub fn wave_speed_kph(l_g_km: f64, t_g_s: f64) -> Result<f64, TimingError> {
    if !(l_g_km > 0.0) {
        return Err(TimingError::NonPositive(format!("L_g = {l_g_km}")));
    }
    if !(t_g_s > 0.0) {
        return Err(TimingError::NonPositive(format!("T_g = {t_g_s}")));
    }
    Ok(l_g_km * 3600.0 / t_g_s)
}

fn check_xi(xi: f64) -> Result<(), TimingError> {
    if !(0.0..0.5).contains(&xi) {
        return Err(TimingError::XiOutOfRange(xi));
    }
    Ok(())
}

/// Green time along the corridor at offset distance ξ: (1 + 2ξ) T_g.
pub fn forward_green_s(xi: f64, t_g_s: f64) -> Result<f64, TimingError> {
    check_xi(xi)?;
    Ok((1.0 + 2.0 * xi) * t_g_s)
}

/// Green time across the corridor at offset distance ξ: (1 - 2ξ) T_g.
/// Complement of `forward_green_s` with respect to the cycle time.
pub fn cross_green_s(xi: f64, t_g_s: f64) -> Result<f64, TimingError> {
    check_xi(xi)?;
    Ok((1.0 - 2.0 * xi) * t_g_s)
}

/// Reduced offset of a mid-segment signal. Which branch applies depends on
/// which side of the segment's zero-offset endpoint the signal sits:
/// T_g (2 - ξ) for d < 1/2, T_g (1 - ξ) for d > 1/2, reduced into
/// [0, cycle).
pub fn midblock_reduced_offset_s(xi: f64, d: f64, t_g_s: f64) -> Result<f64, TimingError> {
    check_xi(xi)?;
    if (d - 0.5).abs() < 1e-9 {
        return Err(TimingError::DSingular);
    }
    if !(0.0 < d && d < 1.0) {
        return Err(TimingError::DOutOfRange(d));
    }
    let cycle = 2.0 * t_g_s;
    let raw = if d < 0.5 {
        t_g_s * (2.0 - xi)
    } else {
        t_g_s * (1.0 - xi)
    };
    // (2 - ξ) T_g < cycle whenever ξ > 0; the reduction only bites at ξ = 0.
    Ok(raw.rem_euclid(cycle))
}

/// Offset and reduced offset of node `index`: the wave head takes exactly
/// T_g per segment, so T_offset = index * T_g (shifted one T_g under
/// inverted parity) and T_roffset alternates 0, T_g along the corridor.
pub fn node_offset_s(plan: &NodePlan, index: usize) -> Result<(f64, f64), TimingError> {
    let count = plan.nodes().len();
    if index >= count {
        return Err(TimingError::NodeIndexOutOfRange { index, count });
    }
    let t_g = plan.t_g_s();
    let base = if plan.invert_parity() { 1 } else { 0 };
    let t_offset = (index + base) as f64 * t_g;
    let t_roffset = if plan.is_zero_offset(index) { 0.0 } else { t_g };
    Ok((t_offset, t_roffset))
}

/// One row of the timing table, full precision.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    /// 1-based row number in corridor order.
    pub row: usize,
    pub name: String,
    pub odometer_km: f64,
    pub is_node: bool,
    pub speed_limit_kph: f64,
    pub l_g_km: f64,
    pub v_g_kph: f64,
    pub xi: f64,
    /// Block-unit distance from the zero-offset endpoint; nodes have none.
    pub d: Option<f64>,
    pub t_gf_s: f64,
    pub t_gx_s: f64,
    /// Wave-head travel time from the corridor origin; nodes only.
    pub t_offset_s: Option<f64>,
    pub t_roffset_s: f64,
}

/// The complete timing table for one corridor and plan.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingTable {
    pub rows: Vec<TimingRow>,
    pub t_g_s: f64,
    pub cycle_time_s: f64,
}

impl TimingTable {
    pub fn row_for_site(&self, name: &str) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Build the full timing table: one row per node and per non-node site,
/// ordered by odometer. Fails if the plan does not validate.
pub fn build_timing_table(
    corridor: &Corridor,
    plan: &NodePlan,
    xi_max: &XiThresholds,
) -> Result<TimingTable, TimingError> {
    let violations = validate_plan(corridor, plan, xi_max);
    if !violations.is_empty() {
        return Err(TimingError::PlanInvalid(violations));
    }
    let t_g = plan.t_g_s();
    let cycle = plan.cycle_time_s();
    let node_count = plan.nodes().len();

    struct Entry {
        odometer_km: f64,
        name: String,
        node_index: Option<usize>,
        limit: f64,
    }

    let mut entries: Vec<Entry> = Vec::new();
    for (i, n) in plan.nodes().iter().enumerate() {
        let name = match &n.site {
            Some(s) => s.clone(),
            None => format!("Node (V {})", i + 1),
        };
        let limit = corridor.limit_at(n.odometer_km);
        entries.push(Entry {
            odometer_km: n.odometer_km,
            name,
            node_index: Some(i),
            limit,
        });
    }
    for s in corridor.sites() {
        let on_node = plan
            .nodes()
            .iter()
            .any(|n| (n.odometer_km - s.odometer_km).abs() <= crate::corridor::NODE_EPS_KM);
        if !on_node {
            entries.push(Entry {
                odometer_km: s.odometer_km,
                name: s.name.clone(),
                node_index: None,
                limit: s.speed_limit_kph,
            });
        }
    }
    entries.sort_by(|a, b| a.odometer_km.partial_cmp(&b.odometer_km).unwrap());

    let mut rows = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let row = match e.node_index {
            Some(ni) => {
                // Nodes report the downstream segment; the terminal node has
                // none and reports its upstream segment instead.
                let seg = if ni + 1 < node_count { ni } else { ni - 1 };
                let l_g = plan.segment_length_km(seg);
                let v_g = wave_speed_kph(l_g, t_g)?;
                let (t_offset, t_roffset) = node_offset_s(plan, ni)?;
                TimingRow {
                    row: i + 1,
                    name: e.name.clone(),
                    odometer_km: e.odometer_km,
                    is_node: true,
                    speed_limit_kph: e.limit,
                    l_g_km: l_g,
                    v_g_kph: v_g,
                    xi: 0.0,
                    d: None,
                    t_gf_s: t_g,
                    t_gx_s: t_g,
                    t_offset_s: Some(t_offset),
                    t_roffset_s: t_roffset,
                }
            }
            None => {
                let pos = plan.segment_of(e.odometer_km)?;
                let d = plan.d_param(e.odometer_km)?;
                let v_g = wave_speed_kph(pos.l_g_km, t_g)?;
                TimingRow {
                    row: i + 1,
                    name: e.name.clone(),
                    odometer_km: e.odometer_km,
                    is_node: false,
                    speed_limit_kph: e.limit,
                    l_g_km: pos.l_g_km,
                    v_g_kph: v_g,
                    xi: pos.xi,
                    d: Some(d),
                    t_gf_s: forward_green_s(pos.xi, t_g)?,
                    t_gx_s: cross_green_s(pos.xi, t_g)?,
                    t_offset_s: None,
                    t_roffset_s: midblock_reduced_offset_s(pos.xi, d, t_g)?,
                }
            }
        };
        rows.push(row);
    }
    Ok(TimingTable {
        rows,
        t_g_s: t_g,
        cycle_time_s: cycle,
    })
}
