//! Ground sets, the exact and confidence-bound oracle contracts, and the
//! maximizers built on top of them.
//!
//! A set function `F` over a ground set `{0, .., n-1}` is submodular when
//! the marginal gain `F(A ∪ {i}) - F(A)` never grows as `A` grows. All
//! maximizers here select at most `k` elements; when `F` is non-negative,
//! monotone and submodular, plain greedy selection reaches at least
//! `(1 - 1/e)` of the best achievable value.

mod bounds;
mod greedy;
pub mod instances;
mod pac;

pub use bounds::{ExactBounds, GaussianBounds};
pub use greedy::{
    brute_force_max, brute_force_max_with_cap, greedy_max, lazier_greedy_max, lazy_greedy_max,
    DEFAULT_ENUMERATION_CAP,
};
pub use pac::{pac_greedy_max, pac_max, PacParams};

use crate::error::{Error, Result};

pub type ElementId = usize;

/// The ground set `{0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "ground set must have at least one element"));
        }
        Ok(GroundSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ids(&self) -> std::ops::Range<ElementId> {
        0..self.n
    }

    pub fn check(&self, id: ElementId) -> Result<()> {
        if id >= self.n {
            Err(Error::OutOfRange { id, n: self.n })
        } else {
            Ok(())
        }
    }
}

/// An ordered selection of distinct elements. Order records the pick order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Subset {
    ids: Vec<ElementId>,
    limit: usize,
}

impl Subset {
    pub fn with_limit(limit: usize) -> Self {
        Subset {
            ids: Vec::with_capacity(limit.min(64)),
            limit,
        }
    }

    pub fn from_ids(ids: &[ElementId], limit: usize) -> Result<Self> {
        let mut s = Subset::with_limit(limit);
        for &i in ids {
            s.push(i)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, id: ElementId) -> Result<()> {
        if self.ids.contains(&id) {
            return Err(Error::DuplicateElement(id));
        }
        if self.ids.len() >= self.limit {
            return Err(Error::SubsetFull { limit: self.limit });
        }
        self.ids.push(id);
        Ok(())
    }

    pub fn contains(&self, id: ElementId) -> bool {
        self.ids.contains(&id)
    }

    pub fn ids(&self) -> &[ElementId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// The elements plus `id`, as a query set for an oracle.
    pub fn with(&self, id: ElementId) -> Vec<ElementId> {
        let mut v = Vec::with_capacity(self.ids.len() + 1);
        v.extend_from_slice(&self.ids);
        v.push(id);
        v
    }

    pub fn sorted(&self) -> Vec<ElementId> {
        let mut v = self.ids.clone();
        v.sort_unstable();
        v
    }
}

/// Canonical (sorted) key for an unordered query set.
pub fn set_key(set: &[ElementId]) -> Vec<ElementId> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v
}

/// Exact access to a set function.
///
/// `evaluate` must be deterministic for a fixed set. The evaluation counter
/// never decreases.
pub trait ExactOracle {
    fn ground_size(&self) -> usize;
    fn evaluate(&mut self, set: &[ElementId]) -> Result<f64>;
    fn evaluations(&self) -> u64;
}

impl<T: ExactOracle + ?Sized> ExactOracle for &mut T {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn evaluate(&mut self, set: &[ElementId]) -> Result<f64> {
        (**self).evaluate(set)
    }
    fn evaluations(&self) -> u64 {
        (**self).evaluations()
    }
}

/// Anytime confidence bounds on a set function.
///
/// With probability `1 - δ_u`, `upper(A) >= F(A)`; with probability
/// `1 - δ_l`, `F(A) >= lower(A)`. `tighten(A)` spends more computation so
/// that, at least in expectation, the upper bound falls and the lower bound
/// rises. `upper(A) >= lower(A)` holds for every initialized subset.
pub trait BoundProvider {
    fn ground_size(&self) -> usize;
    fn upper(&mut self, set: &[ElementId]) -> Result<f64>;
    fn lower(&mut self, set: &[ElementId]) -> Result<f64>;
    fn tighten(&mut self, set: &[ElementId]) -> Result<()>;
    fn work(&self) -> u64;
}

impl<T: BoundProvider + ?Sized> BoundProvider for &mut T {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn upper(&mut self, set: &[ElementId]) -> Result<f64> {
        (**self).upper(set)
    }
    fn lower(&mut self, set: &[ElementId]) -> Result<f64> {
        (**self).lower(set)
    }
    fn tighten(&mut self, set: &[ElementId]) -> Result<()> {
        (**self).tighten(set)
    }
    fn work(&self) -> u64 {
        (**self).work()
    }
}

/// Why a `pac_max` call stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// A single candidate survived.
    SingleCandidate,
    /// The largest bound change in the last pass fell below the threshold.
    Stalled,
    /// The tighten-round cap was reached.
    RoundCap,
}

/// Per-iteration bookkeeping shared by all maximizers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationLog {
    pub picked: ElementId,
    /// Candidates considered in this iteration.
    pub candidates: usize,
    /// Oracle evaluations (or provider work) spent in this iteration.
    pub work: u64,
    pub gain_evaluations: usize,
    /// Candidates drawn by lazier greedy, ascending.
    pub sampled: Vec<ElementId>,
    pub pruned: usize,
    pub tighten_calls: usize,
    pub passes: usize,
    /// Queue length at the end of each pac pass.
    pub queue_sizes: Vec<usize>,
    pub termination: Option<Termination>,
    /// The max-lower-bound element stayed queued after every pass.
    pub leader_retained: bool,
}

impl IterationLog {
    pub fn converged(&self) -> bool {
        !matches!(self.termination, Some(Termination::RoundCap))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub chosen: Subset,
    pub iterations: Vec<IterationLog>,
    /// Total oracle evaluations or provider work.
    pub work: u64,
}

impl SelectionResult {
    pub fn sorted(&self) -> Vec<ElementId> {
        self.chosen.sorted()
    }
}

/// `F(A ∪ {i}) - F(A)`.
pub fn marginal_gain<O: ExactOracle + ?Sized>(
    oracle: &mut O,
    set: &Subset,
    id: ElementId,
) -> Result<f64> {
    let n = oracle.ground_size();
    if id >= n {
        return Err(Error::OutOfRange { id, n });
    }
    if set.contains(id) {
        return Err(Error::DuplicateElement(id));
    }
    let with = oracle.evaluate(&set.with(id))?;
    let without = oracle.evaluate(set.ids())?;
    Ok(with - without)
}

#[cfg(test)]
mod tests {
    use super::instances::{CoverageOracle, ModularOracle};
    use super::*;

    fn toy() -> CoverageOracle {
        // a=0, b=1, c=2: sets {a,b}, {b,c}, {c}
        CoverageOracle::new(vec![vec![0, 1], vec![1, 2], vec![2]], 3).unwrap()
    }

    #[test]
    fn marginal_gain_matches_union_sizes() {
        let mut o = toy();
        let empty = Subset::with_limit(3);
        assert_eq!(marginal_gain(&mut o, &empty, 0).unwrap(), 2.0);
        let a = Subset::from_ids(&[0], 3).unwrap();
        assert_eq!(marginal_gain(&mut o, &a, 2).unwrap(), 1.0);
        assert_eq!(o.evaluations(), 4);
    }

    #[test]
    fn marginal_gain_zero_for_redundant_element() {
        let mut o = CoverageOracle::new(vec![vec![0, 1], vec![1]], 2).unwrap();
        let a = Subset::from_ids(&[0], 2).unwrap();
        assert_eq!(marginal_gain(&mut o, &a, 1).unwrap(), 0.0);
    }

    #[test]
    fn marginal_gain_errors() {
        let mut o = ModularOracle::new(vec![3.0, 2.0, 1.0]);
        let a = Subset::from_ids(&[0], 3).unwrap();
        assert_eq!(
            marginal_gain(&mut o, &a, 0),
            Err(Error::DuplicateElement(0))
        );
        assert_eq!(
            marginal_gain(&mut o, &a, 3),
            Err(Error::OutOfRange { id: 3, n: 3 })
        );
    }

    #[test]
    fn subset_invariants() {
        let mut s = Subset::with_limit(2);
        s.push(4).unwrap();
        assert_eq!(s.push(4), Err(Error::DuplicateElement(4)));
        s.push(1).unwrap();
        assert_eq!(s.push(2), Err(Error::SubsetFull { limit: 2 }));
        assert_eq!(s.ids(), &[4, 1]);
        assert_eq!(s.sorted(), vec![1, 4]);
        assert!(GroundSet::new(0).is_err());
    }
}
