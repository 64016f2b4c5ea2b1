//! Corridor geometry: signalized sites, node plans (real and virtual control
//! points), and the segment arithmetic everything downstream is built on.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for "this odometer sits exactly on a node" comparisons, in km.
pub const NODE_EPS_KM: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CorridorError {
    #[error("no sites")]
    NoSites,
    #[error("malformed row at line {row}: {msg}")]
    MalformedRow { row: usize, msg: String },
    #[error("non-increasing odometer at line {row}")]
    NonIncreasingOdometer { row: usize },
    #[error("non-positive speed limit at line {row}")]
    NonPositiveLimit { row: usize },
    #[error("odometer {odometer_km} km outside node span [{lo} km, {hi} km]")]
    OutsideSpan { odometer_km: f64, lo: f64, hi: f64 },
    #[error("plan references unknown site {name:?}")]
    UnknownSite { name: String },
    #[error("plan is structurally invalid: {0}")]
    InvalidPlan(String),
    #[error("d parameter undefined at a node (odometer {0} km)")]
    DParamAtNode(f64),
    #[error("d parameter singular at segment midpoint (odometer {0} km)")]
    DParamSingular(f64),
}

/// A signalized intersection on the corridor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSite {
    pub name: String,
    pub odometer_km: f64,
    pub speed_limit_kph: f64,
}

/// The corridor: an ordered list of signalized sites with strictly
/// increasing odometers. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    sites: Vec<SignalSite>,
}

impl Corridor {
    pub fn new(sites: Vec<SignalSite>) -> Result<Self, CorridorError> {
        if sites.is_empty() {
            return Err(CorridorError::NoSites);
        }
        for (i, s) in sites.iter().enumerate() {
            if !(s.odometer_km >= 0.0) || !s.odometer_km.is_finite() {
                return Err(CorridorError::MalformedRow {
                    row: i + 1,
                    msg: format!("bad odometer {}", s.odometer_km),
                });
            }
            if !(s.speed_limit_kph > 0.0) {
                return Err(CorridorError::NonPositiveLimit { row: i + 1 });
            }
            if i > 0 && s.odometer_km <= sites[i - 1].odometer_km {
                return Err(CorridorError::NonIncreasingOdometer { row: i + 1 });
            }
        }
        Ok(Corridor { sites })
    }

    pub fn sites(&self) -> &[SignalSite] {
        &self.sites
    }

    pub fn site_by_name(&self, name: &str) -> Option<&SignalSite> {
        self.sites.iter().find(|s| s.name == name)
    }

    /// Speed limit in force at `odometer_km`: piecewise constant, taken from
    /// the closest site at or upstream of the point (the first site governs
    /// everything before it).
    pub fn limit_at(&self, odometer_km: f64) -> f64 {
        let mut limit = self.sites[0].speed_limit_kph;
        for s in &self.sites {
            if s.odometer_km <= odometer_km + NODE_EPS_KM {
                limit = s.speed_limit_kph;
            } else {
                break;
            }
        }
        limit
    }

    /// Odometers at which the speed limit changes, paired with the new limit.
    /// Always starts with the first site.
    pub fn limit_breaks(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for s in &self.sites {
            match out.last() {
                Some(&(_, l)) if l == s.speed_limit_kph => {}
                _ => out.push((s.odometer_km, s.speed_limit_kph)),
            }
        }
        out
    }

    /// Parse the corridor CSV: header `name,odometer_km,speed_limit_kph`,
    /// one site per row. Line numbers in errors count data rows (the
    /// header is line 0). Site names must not contain commas.
    pub fn from_csv(text: &str) -> Result<Self, CorridorError> {
        let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
        let header = lines.next().ok_or(CorridorError::NoSites)?;
        let want = ["name", "odometer_km", "speed_limit_kph"];
        let got: Vec<&str> = header.split(',').map(str::trim).collect();
        if got != want {
            return Err(CorridorError::MalformedRow {
                row: 0,
                msg: format!("bad header {header:?}, expected name,odometer_km,speed_limit_kph"),
            });
        }
        let mut sites = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(CorridorError::MalformedRow {
                    row,
                    msg: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let odometer_km: f64 = fields[1].parse().map_err(|_| CorridorError::MalformedRow {
                row,
                msg: format!("bad odometer {:?}", fields[1]),
            })?;
            let speed_limit_kph: f64 =
                fields[2].parse().map_err(|_| CorridorError::MalformedRow {
                    row,
                    msg: format!("bad speed limit {:?}", fields[2]),
                })?;
            if !(speed_limit_kph > 0.0) {
                return Err(CorridorError::NonPositiveLimit { row });
            }
            if let Some(prev) = sites.last() {
                let prev: &SignalSite = prev;
                if odometer_km <= prev.odometer_km {
                    return Err(CorridorError::NonIncreasingOdometer { row });
                }
            }
            sites.push(SignalSite {
                name: fields[0].to_string(),
                odometer_km,
                speed_limit_kph,
            });
        }
        Corridor::new(sites)
    }

    /// Emit the corridor CSV. `Corridor::from_csv(c.to_csv())` reproduces an
    /// identical corridor.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,odometer_km,speed_limit_kph\n");
        for s in &self.sites {
            out.push_str(&format!(
                "{},{},{}\n",
                s.name, s.odometer_km, s.speed_limit_kph
            ));
        }
        out
    }
}

/// One control point of a node plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PlanNode {
    /// A signalized intersection promoted to a node; resolved by site name.
    Real { site: String },
    /// A virtual traffic signal at a bare odometer.
    Virtual { odometer_km: f64 },
}

/// Node-plan document as serialized to JSON. Field names are normative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodePlanDoc {
    pub cycle_time_s: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub invert_parity: bool,
    pub nodes: Vec<PlanNode>,
}

/// A resolved node on the corridor.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub odometer_km: f64,
    /// Site name for real nodes, `None` for virtual ones.
    pub site: Option<String>,
}

impl Node {
    pub fn is_real(&self) -> bool {
        self.site.is_some()
    }
}

/// A resolved node plan: ordered nodes plus the common cycle time.
///
/// Node index parity fixes the reduced offset: even indices are
/// zero-offset nodes, odd indices get half a cycle, with `invert_parity`
/// swapping the two.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePlan {
    nodes: Vec<Node>,
    cycle_time_s: f64,
    invert_parity: bool,
}

/// Where a point lies relative to its enclosing segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentPosition {
    pub segment: usize,
    /// Distance to the nearer segment endpoint, km.
    pub x_km: f64,
    /// x / L_g, in [0, 1/2].
    pub xi: f64,
    pub l_g_km: f64,
    /// True when the point coincides with a node.
    pub at_node: bool,
}

impl NodePlan {
    pub fn new(nodes: Vec<Node>, cycle_time_s: f64, invert_parity: bool) -> Result<Self, CorridorError> {
        if nodes.len() < 2 {
            return Err(CorridorError::InvalidPlan("fewer than 2 nodes".into()));
        }
        if !(cycle_time_s > 0.0) {
            return Err(CorridorError::InvalidPlan(format!(
                "non-positive cycle time {cycle_time_s}"
            )));
        }
        for w in nodes.windows(2) {
            if w[1].odometer_km <= w[0].odometer_km {
                return Err(CorridorError::InvalidPlan(format!(
                    "node odometers not strictly increasing near {} km",
                    w[1].odometer_km
                )));
            }
        }
        Ok(NodePlan {
            nodes,
            cycle_time_s,
            invert_parity,
        })
    }

    /// Resolve a plan document against a corridor: real nodes take their
    /// site's odometer, virtual nodes keep the stated one.
    pub fn resolve(doc: &NodePlanDoc, corridor: &Corridor) -> Result<Self, CorridorError> {
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for n in &doc.nodes {
            match n {
                PlanNode::Real { site } => {
                    let s = corridor
                        .site_by_name(site)
                        .ok_or_else(|| CorridorError::UnknownSite { name: site.clone() })?;
                    nodes.push(Node {
                        odometer_km: s.odometer_km,
                        site: Some(s.name.clone()),
                    });
                }
                PlanNode::Virtual { odometer_km } => nodes.push(Node {
                    odometer_km: *odometer_km,
                    site: None,
                }),
            }
        }
        NodePlan::new(nodes, doc.cycle_time_s, doc.invert_parity)
    }

    /// Serialize back to the document form.
    pub fn to_doc(&self) -> NodePlanDoc {
        NodePlanDoc {
            cycle_time_s: self.cycle_time_s,
            invert_parity: self.invert_parity,
            nodes: self
                .nodes
                .iter()
                .map(|n| match &n.site {
                    Some(s) => PlanNode::Real { site: s.clone() },
                    None => PlanNode::Virtual {
                        odometer_km: n.odometer_km,
                    },
                })
                .collect(),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn cycle_time_s(&self) -> f64 {
        self.cycle_time_s
    }

    pub fn invert_parity(&self) -> bool {
        self.invert_parity
    }

    /// Half the cycle time: the green+amber+all-red allocation at a node.
    pub fn t_g_s(&self) -> f64 {
        self.cycle_time_s / 2.0
    }

    /// Same nodes, different cycle time.
    pub fn with_cycle_time(&self, cycle_time_s: f64) -> Result<Self, CorridorError> {
        NodePlan::new(self.nodes.clone(), cycle_time_s, self.invert_parity)
    }

    pub fn with_nodes(&self, nodes: Vec<Node>) -> Result<Self, CorridorError> {
        NodePlan::new(nodes, self.cycle_time_s, self.invert_parity)
    }

    pub fn span_km(&self) -> (f64, f64) {
        (
            self.nodes[0].odometer_km,
            self.nodes[self.nodes.len() - 1].odometer_km,
        )
    }

    pub fn segment_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn segment_length_km(&self, segment: usize) -> f64 {
        self.nodes[segment + 1].odometer_km - self.nodes[segment].odometer_km
    }

    /// True when node `index` is a zero-offset node (opposing wave heads
    /// enter it at cycle phase zero).
    pub fn is_zero_offset(&self, index: usize) -> bool {
        (index % 2 == 0) != self.invert_parity
    }

    /// Locate `odometer_km` within the plan. Errors outside the node span.
    pub fn segment_of(&self, odometer_km: f64) -> Result<SegmentPosition, CorridorError> {
        let (lo, hi) = self.span_km();
        if odometer_km < lo - NODE_EPS_KM || odometer_km > hi + NODE_EPS_KM {
            return Err(CorridorError::OutsideSpan {
                odometer_km,
                lo,
                hi,
            });
        }
        // Containing segment: the one starting at the last node <= point.
        let mut seg = match self
            .nodes
            .binary_search_by(|n| n.odometer_km.partial_cmp(&odometer_km).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        if seg >= self.segment_count() {
            seg = self.segment_count() - 1;
        }
        let l_g = self.segment_length_km(seg);
        let f = ((odometer_km - self.nodes[seg].odometer_km) / l_g).clamp(0.0, 1.0);
        let frac = f.min(1.0 - f);
        let x_km = frac * l_g;
        let at_node = x_km <= NODE_EPS_KM || (odometer_km - self.nodes[seg].odometer_km).abs() <= NODE_EPS_KM
            || (odometer_km - self.nodes[seg + 1].odometer_km).abs() <= NODE_EPS_KM;
        Ok(SegmentPosition {
            segment: seg,
            x_km: if at_node { 0.0 } else { x_km },
            xi: if at_node { 0.0 } else { frac },
            l_g_km: l_g,
            at_node,
        })
    }

    /// Fractional position of a mid-segment point measured from its
    /// segment's zero-offset endpoint, in block units. Exactly one endpoint
    /// of every segment is zero-offset, so this is always in (0, 1).
    pub fn d_param(&self, odometer_km: f64) -> Result<f64, CorridorError> {
        let pos = self.segment_of(odometer_km)?;
        if pos.at_node {
            return Err(CorridorError::DParamAtNode(odometer_km));
        }
        let lower = &self.nodes[pos.segment];
        let f = (odometer_km - lower.odometer_km) / pos.l_g_km;
        let d = if self.is_zero_offset(pos.segment) {
            f
        } else {
            1.0 - f
        };
        if (d - 0.5).abs() < 1e-9 {
            return Err(CorridorError::DParamSingular(odometer_km));
        }
        Ok(d)
    }
}

/// Per-site ξ thresholds with a default for unlisted sites.
#[derive(Debug, Clone)]
pub struct XiThresholds {
    pub default: f64,
    pub per_site: BTreeMap<String, f64>,
}

impl XiThresholds {
    pub fn uniform(default: f64) -> Self {
        XiThresholds {
            default,
            per_site: BTreeMap::new(),
        }
    }

    pub fn for_site(&self, name: &str) -> f64 {
        self.per_site.get(name).copied().unwrap_or(self.default)
    }
}

impl Default for XiThresholds {
    fn default() -> Self {
        // 0.45 leaves a workable cross green everywhere while staying clear
        // of the midblock singular point.
        XiThresholds::uniform(0.45)
    }
}

/// A single plan-validation finding.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    FewerThanTwoNodes,
    NonPositiveCycle { cycle_time_s: f64 },
    NodesNotIncreasing { index: usize },
    RealNodeOffSite { site: String, odometer_km: f64 },
    SiteOutsideSpan { site: String, odometer_km: f64 },
    XiAboveMax { site: String, xi: f64, max: f64 },
    MidblockSingular { site: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FewerThanTwoNodes => write!(f, "fewer than 2 nodes"),
            Violation::NonPositiveCycle { cycle_time_s } => {
                write!(f, "non-positive cycle time {cycle_time_s}")
            }
            Violation::NodesNotIncreasing { index } => {
                write!(f, "node odometers not strictly increasing at node {index}")
            }
            Violation::RealNodeOffSite { site, odometer_km } => {
                write!(f, "real node {site:?} does not coincide with a site ({odometer_km} km)")
            }
            Violation::SiteOutsideSpan { site, odometer_km } => {
                write!(f, "site {site:?} at {odometer_km} km lies outside the node span")
            }
            Violation::XiAboveMax { site, xi, max } => {
                write!(f, "site {site:?} has xi={xi:.4} above threshold {max}")
            }
            Violation::MidblockSingular { site } => {
                write!(f, "site {site:?} sits at the singular point xi=1/2")
            }
        }
    }
}

/// Check a plan against a corridor: structural invariants, span coverage,
/// and per-site ξ thresholds. Violations are the return value, not errors.
pub fn validate_plan(corridor: &Corridor, plan: &NodePlan, xi_max: &XiThresholds) -> Vec<Violation> {
    let mut out = Vec::new();
    let nodes = plan.nodes();
    if nodes.len() < 2 {
        out.push(Violation::FewerThanTwoNodes);
    }
    if !(plan.cycle_time_s() > 0.0) {
        out.push(Violation::NonPositiveCycle {
            cycle_time_s: plan.cycle_time_s(),
        });
    }
    for (i, w) in nodes.windows(2).enumerate() {
        if w[1].odometer_km <= w[0].odometer_km {
            out.push(Violation::NodesNotIncreasing { index: i + 1 });
        }
    }
    for n in nodes {
        if let Some(site) = &n.site {
            let ok = corridor
                .site_by_name(site)
                .map(|s| (s.odometer_km - n.odometer_km).abs() <= NODE_EPS_KM)
                .unwrap_or(false);
            if !ok {
                out.push(Violation::RealNodeOffSite {
                    site: site.clone(),
                    odometer_km: n.odometer_km,
                });
            }
        }
    }
    let node_odos: Vec<f64> = nodes.iter().map(|n| n.odometer_km).collect();
    for s in corridor.sites() {
        let is_node = node_odos
            .iter()
            .any(|&o| (o - s.odometer_km).abs() <= NODE_EPS_KM);
        if is_node {
            continue;
        }
        match plan.segment_of(s.odometer_km) {
            Err(_) => out.push(Violation::SiteOutsideSpan {
                site: s.name.clone(),
                odometer_km: s.odometer_km,
            }),
            Ok(pos) => {
                if (pos.xi - 0.5).abs() < 1e-9 {
                    out.push(Violation::MidblockSingular {
                        site: s.name.clone(),
                    });
                } else {
                    let max = xi_max.for_site(&s.name);
                    if pos.xi > max {
                        out.push(Violation::XiAboveMax {
                            site: s.name.clone(),
                            xi: pos.xi,
                            max,
                        });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn site(name: &str, odo: f64, lim: f64) -> SignalSite {
        SignalSite {
            name: name.into(),
            odometer_km: odo,
            speed_limit_kph: lim,
        }
    }

    fn toy_plan() -> NodePlan {
        NodePlan::new(
            vec![
                Node { odometer_km: 0.0, site: Some("A".into()) },
                Node { odometer_km: 1.046, site: None },
                Node { odometer_km: 2.275, site: Some("B".into()) },
            ],
            120.0,
            false,
        )
        .unwrap()
    }

    #[test]
    fn csv_row_examples() {
        let c = Corridor::from_csv("name,odometer_km,speed_limit_kph\nRoute 1,0.000,72.4\n").unwrap();
        assert_eq!(c.sites()[0].name, "Route 1");
        assert_eq!(c.sites()[0].odometer_km, 0.0);
        assert_eq!(c.sites()[0].speed_limit_kph, 72.4);

        let err = Corridor::from_csv("name,odometer_km,speed_limit_kph\n").unwrap_err();
        assert!(matches!(err, CorridorError::NoSites), "{err}");

        let err = Corridor::from_csv(
            "name,odometer_km,speed_limit_kph\nA,0.0,50\nB,0.0,50\n",
        )
        .unwrap_err();
        assert!(
            matches!(err, CorridorError::NonIncreasingOdometer { row: 2 }),
            "{err}"
        );
    }

    #[test]
    fn csv_round_trip_is_identity() {
        let c = Corridor::new(vec![
            site("Route 1", 0.0, 72.4),
            site("Belvoir Woods Pkwy", 0.159, 72.4),
            site("Huntington Ave", 16.285, 56.3),
        ])
        .unwrap();
        let again = Corridor::from_csv(&c.to_csv()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn segment_of_examples() {
        let plan = toy_plan();
        let p = plan.segment_of(0.159).unwrap();
        assert_eq!(p.segment, 0);
        assert_abs_diff_eq!(p.x_km, 0.159, epsilon = 1e-12);
        assert_abs_diff_eq!(p.xi, 0.159 / 1.046, epsilon = 1e-12);
        assert_abs_diff_eq!(p.l_g_km, 1.046, epsilon = 1e-12);

        let p = plan.segment_of(1.046).unwrap();
        assert!(p.at_node);
        assert_eq!(p.xi, 0.0);

        let p = plan.segment_of(1.961).unwrap();
        assert_eq!(p.segment, 1);
        assert_abs_diff_eq!(p.x_km, 2.275 - 1.961, epsilon = 1e-12);
        assert_abs_diff_eq!(p.xi, (2.275 - 1.961) / 1.229, epsilon = 1e-9);

        assert!(plan.segment_of(-0.5).is_err());
        assert!(plan.segment_of(3.0).is_err());
    }

    #[test]
    fn xi_agrees_from_either_endpoint() {
        let plan = toy_plan();
        for i in 0..=100 {
            let o = 0.0 + 2.275 * i as f64 / 100.0;
            let p = plan.segment_of(o).unwrap();
            let lower = plan.nodes()[p.segment].odometer_km;
            let f = (o - lower) / p.l_g_km;
            assert_abs_diff_eq!(p.xi, f.min(1.0 - f), epsilon = 1e-12);
            assert!(p.xi <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn xi_continuous_at_nodes() {
        let plan = toy_plan();
        for eps in [1e-6, 1e-7, 1e-8] {
            let left = plan.segment_of(1.046 - eps).unwrap().xi;
            let right = plan.segment_of(1.046 + eps).unwrap().xi;
            assert!(left < 1e-5 && right < 1e-5);
        }
    }

    #[test]
    fn d_param_sides() {
        let plan = toy_plan();
        // Zero-offset endpoint of segment 0 is node 0.
        assert_abs_diff_eq!(plan.d_param(0.159).unwrap(), 0.159 / 1.046, epsilon = 1e-12);
        // Segment 1's zero-offset endpoint is node 2.
        let d = plan.d_param(1.961).unwrap();
        assert_abs_diff_eq!(d, (2.275 - 1.961) / 1.229, epsilon = 1e-9);
        assert!(matches!(
            plan.d_param(1.046),
            Err(CorridorError::DParamAtNode(_))
        ));
        // Exact midpoint of segment 0 is singular.
        assert!(matches!(
            plan.d_param(0.523),
            Err(CorridorError::DParamSingular(_))
        ));
    }

    #[test]
    fn validate_plan_cases() {
        let corridor = Corridor::new(vec![
            site("A", 0.0, 60.0),
            site("mid", 1.0, 60.0),
            site("B", 2.0, 60.0),
        ])
        .unwrap();
        let plan = NodePlan::new(
            vec![
                Node { odometer_km: 0.0, site: Some("A".into()) },
                Node { odometer_km: 2.0, site: Some("B".into()) },
            ],
            120.0,
            false,
        )
        .unwrap();
        // "mid" sits exactly at the segment midpoint: singular.
        let v = validate_plan(&corridor, &plan, &XiThresholds::default());
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], Violation::MidblockSingular { site } if site == "mid"));

        // Tight threshold flags the site once it is off the midpoint.
        let corridor2 = Corridor::new(vec![
            site("A", 0.0, 60.0),
            site("mid", 0.8, 60.0),
            site("B", 2.0, 60.0),
        ])
        .unwrap();
        let v = validate_plan(&corridor2, &plan, &XiThresholds::uniform(0.2));
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], Violation::XiAboveMax { site, .. } if site == "mid"));
        let v = validate_plan(&corridor2, &plan, &XiThresholds::uniform(0.45));
        assert!(v.is_empty());
    }

    #[test]
    fn plan_structural_errors() {
        assert!(NodePlan::new(
            vec![Node { odometer_km: 0.0, site: None }],
            120.0,
            false
        )
        .is_err());
        assert!(NodePlan::new(
            vec![
                Node { odometer_km: 0.0, site: None },
                Node { odometer_km: 1.0, site: None },
            ],
            0.0,
            false,
        )
        .is_err());
    }

    #[test]
    fn plan_doc_round_trip() {
        let doc = NodePlanDoc {
            cycle_time_s: 120.0,
            invert_parity: false,
            nodes: vec![
                PlanNode::Real { site: "A".into() },
                PlanNode::Virtual { odometer_km: 1.046 },
            ],
        };
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"kind\":\"real\""));
        assert!(json.contains("\"site\":\"A\""));
        assert!(json.contains("\"odometer_km\":1.046"));
        let back: NodePlanDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, back);
    }
}
