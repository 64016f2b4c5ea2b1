//! Shared loaders for the shipped Telegraph Road dataset.

use std::fs;
use std::path::PathBuf;

use greenwave_core::{
    build_timing_table, Corridor, NodePlan, NodePlanDoc, TimingTable, XiThresholds,
};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn telegraph_corridor() -> Corridor {
    let text = fs::read_to_string(data_dir().join("telegraph_sites.csv")).unwrap();
    Corridor::from_csv(&text).unwrap()
}

pub fn telegraph_plan(corridor: &Corridor) -> NodePlan {
    let text = fs::read_to_string(data_dir().join("telegraph_plan.json")).unwrap();
    let doc: NodePlanDoc = serde_json::from_str(&text).unwrap();
    NodePlan::resolve(&doc, corridor).unwrap()
}

pub fn telegraph_table(corridor: &Corridor, plan: &NodePlan) -> TimingTable {
    build_timing_table(corridor, plan, &XiThresholds::default()).unwrap()
}

#[allow(dead_code)]
pub fn telegraph() -> (Corridor, NodePlan, TimingTable) {
    let corridor = telegraph_corridor();
    let plan = telegraph_plan(&corridor);
    let table = telegraph_table(&corridor, &plan);
    (corridor, plan, table)
}
