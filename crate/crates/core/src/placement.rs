//! Node-placement quality: the RMS deviation of green-wave speed from the
//! speed limit, hard speed/ξ constraints, and a deterministic local search
//! over virtual-node positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corridor::{validate_plan, Corridor, CorridorError, Node, NodePlan, XiThresholds};
use crate::timing::wave_speed_kph;

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error(transparent)]
    Corridor(#[from] CorridorError),
    #[error("plan has no segments inside the corridor")]
    EmptyPlan,
}

/// Speed constraint, either absolute bounds or a band around the local
/// limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedBand {
    Absolute { v_min_kph: f64, v_max_kph: f64 },
    RelativeToLimit { below_kph: f64, above_kph: f64 },
}

impl SpeedBand {
    fn bounds(&self, limit_kph: f64) -> (f64, f64) {
        match *self {
            SpeedBand::Absolute { v_min_kph, v_max_kph } => (v_min_kph, v_max_kph),
            SpeedBand::RelativeToLimit { below_kph, above_kph } => {
                (limit_kph - below_kph, limit_kph + above_kph)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlacementConfig {
    pub speed_band: SpeedBand,
    pub xi_max: XiThresholds,
    /// Candidate-evaluation budget for the search.
    pub max_iterations: usize,
    /// Initial coordinate-descent step, km. Halved until 0.0005 km.
    pub step_km: f64,
    pub seed: u64,
    /// Number of jittered restarts in addition to the seed plan itself.
    pub starts: usize,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig {
            speed_band: SpeedBand::RelativeToLimit {
                below_kph: 16.0,
                above_kph: 16.0,
            },
            xi_max: XiThresholds::default(),
            max_iterations: 20_000,
            step_km: 0.256,
            seed: 0,
            starts: 3,
        }
    }
}

/// One constraint finding from `check_constraints`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    SegmentSpeed {
        segment: usize,
        from_km: f64,
        to_km: f64,
        v_g_kph: f64,
        v_min_kph: f64,
        v_max_kph: f64,
    },
    XiAboveMax {
        site: String,
        xi: f64,
        max: f64,
    },
}

/// RMS deviation of green-wave speed from the speed limit over the node
/// span, evaluated exactly on the piecewise-constant structure (km/h).
pub fn eta(corridor: &Corridor, plan: &NodePlan) -> Result<f64, PlacementError> {
    let (lo, hi) = plan.span_km();
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(PlacementError::EmptyPlan);
    }
    let t_g = plan.t_g_s();
    // Breakpoints: node odometers plus every limit change inside the span.
    let mut breaks: Vec<f64> = plan.nodes().iter().map(|n| n.odometer_km).collect();
    for (o, _) in corridor.limit_breaks() {
        if o > lo && o < hi {
            breaks.push(o);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut sum = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let seg = plan.segment_of(mid)?;
        let v_g = wave_speed_kph(seg.l_g_km, t_g).map_err(|_| PlacementError::EmptyPlan)?;
        let limit = corridor.limit_at(mid);
        let dev = v_g - limit;
        sum += dev * dev * (b - a);
    }
    Ok((sum / span).sqrt())
}

/// Every segment/zone overlap whose wave speed violates the band, plus
/// every non-node site over its ξ threshold.
pub fn check_constraints(
    corridor: &Corridor,
    plan: &NodePlan,
    config: &PlacementConfig,
) -> Result<Vec<ConstraintViolation>, PlacementError> {
    let t_g = plan.t_g_s();
    let mut out = Vec::new();
    let (lo, hi) = plan.span_km();
    let mut breaks: Vec<f64> = plan.nodes().iter().map(|n| n.odometer_km).collect();
    for (o, _) in corridor.limit_breaks() {
        if o > lo && o < hi {
            breaks.push(o);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let seg = plan.segment_of(mid)?;
        let v_g = wave_speed_kph(seg.l_g_km, t_g).map_err(|_| PlacementError::EmptyPlan)?;
        let limit = corridor.limit_at(mid);
        let (v_min, v_max) = config.speed_band.bounds(limit);
        if v_g < v_min || v_g > v_max {
            out.push(ConstraintViolation::SegmentSpeed {
                segment: seg.segment,
                from_km: a,
                to_km: b,
                v_g_kph: v_g,
                v_min_kph: v_min,
                v_max_kph: v_max,
            });
        }
    }
    let node_odos: Vec<f64> = plan.nodes().iter().map(|n| n.odometer_km).collect();
    for s in corridor.sites() {
        if node_odos
            .iter()
            .any(|&o| (o - s.odometer_km).abs() <= crate::corridor::NODE_EPS_KM)
        {
            continue;
        }
        if let Ok(pos) = plan.segment_of(s.odometer_km) {
            let max = config.xi_max.for_site(&s.name);
            if pos.xi > max {
                out.push(ConstraintViolation::XiAboveMax {
                    site: s.name.clone(),
                    xi: pos.xi,
                    max,
                });
            }
        }
    }
    Ok(out)
}

/// One point of the optimizer's η trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub evaluations: usize,
    pub eta_kph: f64,
    pub violations: usize,
}

#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub plan: NodePlan,
    pub eta_kph: f64,
    /// True when the returned plan satisfies all hard constraints.
    pub feasible: bool,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    violations: usize,
    eta: f64,
}

impl Score {
    fn better_than(&self, other: &Score) -> bool {
        self.violations < other.violations
            || (self.violations == other.violations && self.eta < other.eta - 1e-12)
    }
}

struct Search<'a> {
    corridor: &'a Corridor,
    config: &'a PlacementConfig,
    evaluations: usize,
    trace: Vec<TracePoint>,
}

impl<'a> Search<'a> {
    fn score(&mut self, plan: &NodePlan) -> Option<Score> {
        if self.evaluations >= self.config.max_iterations {
            return None;
        }
        self.evaluations += 1;
        let structural = validate_plan(self.corridor, plan, &self.config.xi_max).len();
        let constraints = check_constraints(self.corridor, plan, self.config)
            .map(|v| v.len())
            .unwrap_or(usize::MAX / 2);
        let eta = eta(self.corridor, plan).unwrap_or(f64::INFINITY);
        Some(Score {
            violations: structural + constraints,
            eta,
        })
    }

    fn record(&mut self, score: &Score) {
        self.trace.push(TracePoint {
            evaluations: self.evaluations,
            eta_kph: score.eta,
            violations: score.violations,
        });
    }
}

fn virtual_indices(plan: &NodePlan) -> Vec<usize> {
    plan.nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| !n.is_real())
        .map(|(i, _)| i)
        .collect()
}

fn moved_plan(plan: &NodePlan, index: usize, new_odometer: f64) -> Option<NodePlan> {
    const MARGIN: f64 = 1e-4;
    let nodes = plan.nodes();
    if index > 0 && new_odometer <= nodes[index - 1].odometer_km + MARGIN {
        return None;
    }
    if index + 1 < nodes.len() && new_odometer >= nodes[index + 1].odometer_km - MARGIN {
        return None;
    }
    let mut nodes = nodes.to_vec();
    nodes[index].odometer_km = new_odometer;
    plan.with_nodes(nodes).ok()
}

/// Deterministic constrained local search: coordinate descent over virtual
/// node odometers with a halving step schedule, add/remove moves for
/// virtual nodes, and jittered restarts. Real nodes never move. Hard
/// constraints reject moves; η is the soft objective.
pub fn optimize_plan(
    corridor: &Corridor,
    seed_plan: &NodePlan,
    config: &PlacementConfig,
) -> Result<OptimizeOutcome, PlacementError> {
    let mut search = Search {
        corridor,
        config,
        evaluations: 0,
        trace: Vec::new(),
    };
    let seed_score = Score {
        violations: validate_plan(corridor, seed_plan, &config.xi_max).len()
            + check_constraints(corridor, seed_plan, config)?.len(),
        eta: eta(corridor, seed_plan)?,
    };
    search.record(&seed_score);
    let mut best = (seed_plan.clone(), seed_score);
    if config.max_iterations == 0 {
        return Ok(OptimizeOutcome {
            feasible: best.1.violations == 0,
            eta_kph: best.1.eta,
            plan: best.0,
            trace: search.trace,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for start in 0..=config.starts {
        let mut current = if start == 0 {
            seed_plan.clone()
        } else {
            // Jitter virtual nodes around the seed positions.
            let mut nodes = seed_plan.nodes().to_vec();
            for i in 0..nodes.len() {
                if nodes[i].is_real() {
                    continue;
                }
                let lo = if i > 0 { nodes[i - 1].odometer_km } else { f64::MIN };
                let hi = if i + 1 < nodes.len() {
                    nodes[i + 1].odometer_km
                } else {
                    f64::MAX
                };
                let jitter: f64 = rng.gen_range(-config.step_km..=config.step_km);
                let o = (nodes[i].odometer_km + jitter).clamp(lo + 1e-3, hi - 1e-3);
                if o > lo && o < hi {
                    nodes[i].odometer_km = o;
                }
            }
            match seed_plan.with_nodes(nodes) {
                Ok(p) => p,
                Err(_) => continue,
            }
        };
        let mut current_score = match search.score(&current) {
            Some(s) => s,
            None => break,
        };
        if current_score.better_than(&best.1) {
            best = (current.clone(), current_score);
            search.record(&current_score);
        }

        let mut step = config.step_km;
        while step >= 0.0005 {
            // Coordinate sweeps at this step size until they stall.
            loop {
                let mut improved = false;
                for vi in virtual_indices(&current) {
                    for dir in [-1.0, 1.0] {
                        let cand_odometer = current.nodes()[vi].odometer_km + dir * step;
                        let Some(cand) = moved_plan(&current, vi, cand_odometer) else {
                            continue;
                        };
                        let Some(score) = search.score(&cand) else {
                            return finish(search, best);
                        };
                        if score.better_than(&current_score) {
                            current = cand;
                            current_score = score;
                            improved = true;
                            if current_score.better_than(&best.1) {
                                best = (current.clone(), current_score);
                                search.record(&current_score);
                            }
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            // Structural moves once per step level: drop a virtual node or
            // split a segment at its midpoint.
            let mut structural: Vec<NodePlan> = Vec::new();
            for vi in virtual_indices(&current) {
                if current.nodes().len() > 2 {
                    let mut nodes = current.nodes().to_vec();
                    nodes.remove(vi);
                    if let Ok(p) = current.with_nodes(nodes) {
                        structural.push(p);
                    }
                }
            }
            for seg in 0..current.segment_count() {
                let mid = 0.5
                    * (current.nodes()[seg].odometer_km + current.nodes()[seg + 1].odometer_km);
                let mut nodes = current.nodes().to_vec();
                nodes.insert(
                    seg + 1,
                    Node {
                        odometer_km: mid,
                        site: None,
                    },
                );
                if let Ok(p) = current.with_nodes(nodes) {
                    structural.push(p);
                }
            }
            for cand in structural {
                let Some(score) = search.score(&cand) else {
                    return finish(search, best);
                };
                if score.better_than(&current_score) {
                    current = cand;
                    current_score = score;
                    if current_score.better_than(&best.1) {
                        best = (current.clone(), current_score);
                        search.record(&current_score);
                    }
                }
            }
            step *= 0.5;
        }
    }
    finish(search, best)
}

fn finish(search: Search<'_>, best: (NodePlan, Score)) -> Result<OptimizeOutcome, PlacementError> {
    let mut trace = search.trace;
    trace.push(TracePoint {
        evaluations: search.evaluations,
        eta_kph: best.1.eta,
        violations: best.1.violations,
    });
    Ok(OptimizeOutcome {
        feasible: best.1.violations == 0,
        eta_kph: best.1.eta,
        plan: best.0,
        trace,
    })
}
