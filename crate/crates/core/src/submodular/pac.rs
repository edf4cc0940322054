//! Greedy maximization driven only by confidence bounds.
//!
//! Each step runs a pruning race over the unselected elements: candidates
//! are queued by upper bound, any candidate whose upper bound falls below
//! the best lower bound plus `epsilon1` is dropped, and the survivors are
//! tightened and requeued. The element holding the best lower bound is
//! never dropped. With probability `1 - (δ_u + δ_l)` the returned element's
//! gain is within `epsilon1` of the best available gain.

use super::{
    BoundProvider, ElementId, GroundSet, IterationLog, SelectionResult, Subset, Termination,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacParams {
    /// Per-step slack `ε₁ >= 0`.
    pub epsilon1: f64,
    /// Stop once the largest bound change in a full pass is below this.
    pub threshold: f64,
    pub max_tighten_rounds: usize,
}

impl Default for PacParams {
    fn default() -> Self {
        PacParams {
            epsilon1: 0.0,
            threshold: 1e-3,
            max_tighten_rounds: 64,
        }
    }
}

impl PacParams {
    pub fn new(epsilon1: f64, threshold: f64, max_tighten_rounds: usize) -> Result<Self> {
        let p = PacParams {
            epsilon1,
            threshold,
            max_tighten_rounds,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon1 >= 0.0) || !self.epsilon1.is_finite() {
            return Err(Error::param("epsilon1", "must be finite and >= 0"));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::param("t", "must be > 0"));
        }
        if self.max_tighten_rounds < 1 {
            return Err(Error::param("max_tighten_rounds", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Cand {
    id: ElementId,
    upper: f64,
    lower: f64,
}

fn read_bounds<B: BoundProvider + ?Sized>(bounds: &mut B, set: &[ElementId]) -> Result<(f64, f64)> {
    let upper = bounds.upper(set)?;
    let lower = bounds.lower(set)?;
    if upper < lower || upper.is_nan() || lower.is_nan() {
        return Err(Error::BoundOrder {
            subset: set.to_vec(),
            upper,
            lower,
        });
    }
    Ok((upper, lower))
}

/// Higher lower bound wins; ties go to the lower id.
fn beats(lower: f64, id: ElementId, leader: Option<(ElementId, f64)>) -> bool {
    match leader {
        None => true,
        Some((lid, ll)) => lower > ll || (lower == ll && id < lid),
    }
}

/// Picks one element to add to `set` using only bounds on `F(set ∪ {i})`.
pub fn pac_max<B: BoundProvider + ?Sized>(
    bounds: &mut B,
    set: &Subset,
    params: &PacParams,
) -> Result<(ElementId, IterationLog)> {
    params.validate()?;
    let n = bounds.ground_size();
    let start_work = bounds.work();
    let mut log = IterationLog {
        leader_retained: true,
        ..IterationLog::default()
    };

    let mut queue = Vec::new();
    // (id, lower) of the current max-lower-bound element; starts at -inf.
    let mut leader: Option<(ElementId, f64)> = None;
    for id in (0..n).filter(|&i| !set.contains(i)) {
        let (upper, lower) = read_bounds(bounds, &set.with(id))?;
        if beats(lower, id, leader) {
            leader = Some((id, lower));
        }
        queue.push(Cand { id, upper, lower });
    }
    let Some(mut leader_state) = leader else {
        return Err(Error::EmptyCandidates);
    };
    log.candidates = queue.len();

    let termination = loop {
        if queue.len() <= 1 {
            break Termination::SingleCandidate;
        }
        if log.passes >= params.max_tighten_rounds {
            break Termination::RoundCap;
        }
        queue.sort_by(|a, b| {
            b.upper
                .total_cmp(&a.upper)
                .then_with(|| a.id.cmp(&b.id))
        });
        let mut next = Vec::with_capacity(queue.len());
        let mut max_change = 0.0f64;
        for cand in queue.drain(..) {
            let (leader_id, leader_lower) = leader_state;
            let survives =
                cand.id == leader_id || cand.upper >= leader_lower + params.epsilon1;
            if !survives {
                log.pruned += 1;
                continue;
            }
            let query = set.with(cand.id);
            bounds.tighten(&query)?;
            log.tighten_calls += 1;
            let (upper, lower) = read_bounds(bounds, &query)?;
            max_change = max_change
                .max((upper - cand.upper).abs())
                .max((lower - cand.lower).abs());
            if cand.id == leader_id {
                leader_state = (leader_id, lower);
            } else if beats(lower, cand.id, Some(leader_state)) {
                leader_state = (cand.id, lower);
            }
            next.push(Cand {
                id: cand.id,
                upper,
                lower,
            });
        }
        queue = next;
        log.passes += 1;
        log.queue_sizes.push(queue.len());
        if !queue.iter().any(|c| c.id == leader_state.0) {
            log.leader_retained = false;
        }
        if queue.len() > 1 && max_change < params.threshold {
            break Termination::Stalled;
        }
    };

    log.picked = leader_state.0;
    log.termination = Some(termination);
    log.work = bounds.work() - start_work;
    Ok((leader_state.0, log))
}

/// Runs `pac_max` `k` times, growing the selection one element per call.
pub fn pac_greedy_max<B: BoundProvider + ?Sized>(
    bounds: &mut B,
    ground: GroundSet,
    k: usize,
    params: &PacParams,
) -> Result<SelectionResult> {
    params.validate()?;
    if bounds.ground_size() != ground.len() {
        return Err(Error::param(
            "ground",
            "bound provider and ground set sizes differ",
        ));
    }
    let k = k.min(ground.len());
    let start = bounds.work();
    let mut chosen = Subset::with_limit(k);
    let mut iterations = Vec::with_capacity(k);
    for _ in 0..k {
        let (pick, log) = pac_max(bounds, &chosen, params)?;
        chosen.push(pick)?;
        iterations.push(log);
    }
    Ok(SelectionResult {
        chosen,
        iterations,
        work: bounds.work() - start,
    })
}
