//! Largest shape-free subsets: exact branch and bound for small spaces and a
//! seeded randomized heuristic for larger ones.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds;
use crate::detector::{find_shape, find_shape_containing};
use crate::error::{Error, Result};
use crate::field_space::{FieldSpace, Point, PointSet};
use crate::systems::{ShapeSystem, SystemKind};

/// Spaces up to this size are searched to optimality by default.
pub const DEFAULT_EXACT_LIMIT: usize = 81;

/// Iterations for the heuristic run that seeds the exact search's incumbent.
const INCUMBENT_ITERATIONS: usize = 200;

/// Limits on exploration; hitting either marks the result as a lower bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub method: SearchMethod,
    #[serde(skip)]
    pub system: ShapeSystem,
    #[serde(skip)]
    pub witness: PointSet,
    pub size: usize,
    /// The search space was exhausted; `size` is the maximum.
    pub optimal: bool,
    pub nodes: u64,
    /// Set once `find_shape` has confirmed the witness is shape-free.
    pub verified_shape_free: bool,
}

// ---------------------------------------------------------------------------
// Incremental conflict tracking
// ---------------------------------------------------------------------------

/// A shape-free set under construction that can tell whether adding a point
/// would complete a shape.
///
/// For star systems it keeps, for every possible center c, the number of
/// unordered pairs {a, b} of members with a + b = 2c, so a test costs O(#A).
/// Other systems fall back to a targeted enumeration through the new point.
pub struct ConflictTracker<'a> {
    system: &'a ShapeSystem,
    set: PointSet,
    pair_counts: Option<Vec<u32>>,
}

impl<'a> ConflictTracker<'a> {
    pub fn new(space: FieldSpace, system: &'a ShapeSystem) -> Self {
        let pair_counts = system.star_k().map(|_| vec![0u32; space.size()]);
        ConflictTracker {
            system,
            set: PointSet::empty(space),
            pair_counts,
        }
    }

    pub fn set(&self) -> &PointSet {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Would `set ∪ {x}` contain a shape through `x`? `x` must not be a member.
    pub fn completes_shape(&mut self, x: Point) -> bool {
        debug_assert!(!self.set.contains(x));
        match (&self.pair_counts, self.system.star_k()) {
            (Some(counts), Some(k)) => {
                let space = self.set.space();
                if counts[x.index()] as usize >= k {
                    return true;
                }
                self.set.iter().any(|a| {
                    let c = space.midpoint(a, x);
                    self.set.contains(c) && counts[c.index()] as usize + 1 >= k
                })
            }
            _ => {
                self.set.insert(x);
                let hit = find_shape_containing(&self.set, self.system, x).is_some();
                self.set.remove(x);
                hit
            }
        }
    }

    pub fn insert(&mut self, x: Point) {
        if let Some(counts) = &mut self.pair_counts {
            let space = self.set.space();
            for a in self.set.iter() {
                counts[space.midpoint(a, x).index()] += 1;
            }
        }
        self.set.insert(x);
    }

    pub fn remove(&mut self, x: Point) {
        if !self.set.remove(x) {
            return;
        }
        if let Some(counts) = &mut self.pair_counts {
            let space = self.set.space();
            for a in self.set.iter() {
                counts[space.midpoint(a, x).index()] -= 1;
            }
        }
    }

    /// Greedily adds each point of `order` that keeps the set shape-free.
    fn fill(&mut self, order: &[Point]) -> Vec<Point> {
        let mut added = Vec::new();
        for &x in order {
            if !self.set.contains(x) && !self.completes_shape(x) {
                self.insert(x);
                added.push(x);
            }
        }
        added
    }
}

fn certify(
    method: SearchMethod,
    system: &ShapeSystem,
    witness: PointSet,
    optimal: bool,
    nodes: u64,
) -> Result<SearchResult> {
    if let Some(shape) = find_shape(&witness, system) {
        return Err(Error::Invariant(format!(
            "search returned a witness containing the shape {shape:?}"
        )));
    }
    Ok(SearchResult {
        method,
        system: system.clone(),
        size: witness.len(),
        witness,
        optimal,
        nodes,
        verified_shape_free: true,
    })
}

fn check_system(space: &FieldSpace, system: &ShapeSystem) -> Result<()> {
    if space.p() != system.p() {
        return Err(Error::input(
            "system",
            format!("system is reduced mod {}, space is over F_{}", system.p(), space.p()),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Heuristic
// ---------------------------------------------------------------------------

/// Randomized greedy insertion followed by `iterations` remove-and-refill
/// moves. Reproducible for a fixed seed; never claims optimality.
pub fn heuristic_max(
    space: FieldSpace,
    system: &ShapeSystem,
    seed: u64,
    iterations: usize,
) -> Result<SearchResult> {
    check_system(&space, system)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<Point> = space.points().collect();
    order.shuffle(&mut rng);

    let mut tracker = ConflictTracker::new(space, system);
    tracker.fill(&order);
    let mut best = tracker.set().clone();
    let mut nodes = 0u64;

    for _ in 0..iterations {
        if tracker.is_empty() {
            break;
        }
        let members = tracker.set().to_vec();
        let dropped = members[rng.gen_range(0..members.len())];
        let before = tracker.len();
        tracker.remove(dropped);
        order.shuffle(&mut rng);
        let refill: Vec<Point> = order.iter().copied().filter(|&x| x != dropped).collect();
        let added = tracker.fill(&refill);
        nodes += 1;
        if tracker.len() < before {
            for x in added {
                tracker.remove(x);
            }
            tracker.insert(dropped);
        } else if tracker.len() > best.len() {
            best = tracker.set().clone();
        }
    }
    certify(SearchMethod::Heuristic, system, best, false, nodes)
}

// ---------------------------------------------------------------------------
// Exact branch and bound
// ---------------------------------------------------------------------------

struct BranchState<'a> {
    tracker: ConflictTracker<'a>,
    best: Option<PointSet>,
    /// Smallest size worth recording.
    floor: usize,
    nodes: u64,
    budget: SearchBudget,
    started: Instant,
    aborted: bool,
}

impl BranchState<'_> {
    fn target(&self) -> usize {
        self.best.as_ref().map_or(self.floor, |b| b.len() + 1)
    }

    fn over_budget(&mut self) -> bool {
        if self.budget.node_limit.is_some_and(|limit| self.nodes >= limit) {
            self.aborted = true;
        }
        if self.nodes % 256 == 0 {
            if let Some(limit) = self.budget.time_limit {
                if self.started.elapsed() >= limit {
                    self.aborted = true;
                }
            }
        }
        self.aborted
    }

    /// `candidates` are the later points that can each be added to the
    /// current set without completing a shape.
    fn branch(&mut self, candidates: &[Point]) {
        self.nodes += 1;
        if self.tracker.len() >= self.target() {
            self.best = Some(self.tracker.set().clone());
        }
        for (q, &x) in candidates.iter().enumerate() {
            if self.tracker.len() + (candidates.len() - q) < self.target() || self.over_budget() {
                return;
            }
            self.tracker.insert(x);
            let rest: Vec<Point> = candidates[q + 1..]
                .iter()
                .copied()
                .filter(|&y| !self.tracker.completes_shape(y))
                .collect();
            self.branch(&rest);
            self.tracker.remove(x);
        }
    }
}

/// Maximum shape-free subset by depth-first branch and bound over points in
/// index order. Among maximum sets the lexicographically smallest is reported.
pub fn exact_max_shape_free(
    space: FieldSpace,
    system: &ShapeSystem,
    budget: SearchBudget,
) -> Result<SearchResult> {
    let order: Vec<Point> = space.points().collect();
    exact_max_shape_free_ordered(space, system, budget, &order)
}

/// As [`exact_max_shape_free`], branching over points in the given order.
pub fn exact_max_shape_free_ordered(
    space: FieldSpace,
    system: &ShapeSystem,
    budget: SearchBudget,
    order: &[Point],
) -> Result<SearchResult> {
    check_system(&space, system)?;
    let mut seen = PointSet::empty(space);
    for &x in order {
        if !space.contains(x) || !seen.insert(x) {
            return Err(Error::input("order", "must list every point exactly once"));
        }
    }
    if seen.len() != space.size() {
        return Err(Error::input("order", "must list every point exactly once"));
    }

    let incumbent = heuristic_max(space, system, 0, INCUMBENT_ITERATIONS)?;
    let mut state = BranchState {
        tracker: ConflictTracker::new(space, system),
        best: None,
        floor: incumbent.size,
        nodes: 0,
        budget,
        started: Instant::now(),
        aborted: false,
    };
    state.branch(order);

    let optimal = !state.aborted;
    let witness = state.best.unwrap_or(incumbent.witness);
    certify(SearchMethod::Exact, system, witness, optimal, state.nodes)
}

/// Every shape-free subset of the space, in branching order, up to `limit`.
pub fn enumerate_shape_free(space: FieldSpace, system: &ShapeSystem, limit: usize) -> Result<Vec<PointSet>> {
    check_system(&space, system)?;
    fn walk(
        tracker: &mut ConflictTracker<'_>,
        candidates: &[Point],
        out: &mut Vec<PointSet>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        out.push(tracker.set().clone());
        for (q, &x) in candidates.iter().enumerate() {
            tracker.insert(x);
            let rest: Vec<Point> = candidates[q + 1..]
                .iter()
                .copied()
                .filter(|&y| !tracker.completes_shape(y))
                .collect();
            walk(tracker, &rest, out, limit);
            tracker.remove(x);
            if out.len() >= limit {
                return;
            }
        }
    }
    let mut tracker = ConflictTracker::new(space, system);
    let all: Vec<Point> = space.points().collect();
    let mut out = Vec::new();
    walk(&mut tracker, &all, &mut out, limit);
    Ok(out)
}

/// Size of a witness against k²Λⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub size: usize,
    pub bound: f64,
    pub slack: f64,
}

/// Checks a witness for a (relaxed) star(k) system against k²Λⁿ. A violation
/// is an invariant failure: the bound is proven, so this can only be a bug.
pub fn validate_against_bounds(result: &SearchResult, k: usize) -> Result<BoundReport> {
    match result.system.kind() {
        SystemKind::Star { k: sk } | SystemKind::RelaxedStar { k: sk } if sk == k => {}
        other => {
            return Err(Error::input(
                "system",
                format!("bound validation needs star({k}) or relaxed_star({k}), got {other}"),
            ))
        }
    }
    let space = result.witness.space();
    let bound = bounds::club_bound(space.p() as u64, space.n(), k)?;
    let size = result.witness.len();
    if size as f64 > bound {
        return Err(Error::Invariant(format!(
            "shape-free witness of size {size} exceeds k^2 Lambda^n = {bound:.6}"
        )));
    }
    Ok(BoundReport {
        k,
        size,
        bound,
        slack: bound - size as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: u64, n: u32) -> FieldSpace {
        FieldSpace::new(p, n).unwrap()
    }

    #[test]
    fn exact_examples() {
        let s31 = space(3, 1);
        let star1 = ShapeSystem::star(1, 3).unwrap();
        let r = exact_max_shape_free(s31, &star1, SearchBudget::unlimited()).unwrap();
        assert_eq!((r.size, r.optimal), (2, true));
        assert_eq!(r.witness.to_vec(), vec![Point(0), Point(1)]);

        let r = exact_max_shape_free(space(3, 2), &star1, SearchBudget::unlimited()).unwrap();
        assert_eq!((r.size, r.optimal), (4, true));

        let star2 = ShapeSystem::star(2, 3).unwrap();
        let r = exact_max_shape_free(s31, &star2, SearchBudget::unlimited()).unwrap();
        assert_eq!((r.size, r.optimal), (3, true));
    }

    #[test]
    fn exhausted_budget_is_lower_bound() {
        let star1 = ShapeSystem::star(1, 3).unwrap();
        let budget = SearchBudget {
            node_limit: Some(3),
            time_limit: None,
        };
        let r = exact_max_shape_free(space(3, 3), &star1, budget).unwrap();
        assert!(!r.optimal);
        assert!(r.verified_shape_free);
        assert!(find_shape(&r.witness, &star1).is_none());
    }

    #[test]
    fn tracker_matches_detector() {
        let s = space(5, 1);
        for k in 1..=2 {
            let star = ShapeSystem::star(k, 5).unwrap();
            for mask in 0u32..32 {
                let mut tracker = ConflictTracker::new(s, &star);
                let mut plain = PointSet::empty(s);
                for i in 0..5 {
                    if mask & (1 << i) == 0 {
                        continue;
                    }
                    let x = Point(i);
                    let completes = tracker.completes_shape(x);
                    plain.insert(x);
                    let free_after = find_shape(&plain, &star).is_none();
                    assert_eq!(completes, !free_after, "k={k} mask={mask:05b} x={i}");
                    if !completes {
                        tracker.insert(x);
                    } else {
                        plain.remove(x);
                    }
                }
            }
        }
    }

    #[test]
    fn tracker_remove_restores_counts() {
        let s = space(3, 2);
        let star = ShapeSystem::star(2, 3).unwrap();
        let mut tracker = ConflictTracker::new(s, &star);
        for i in [0, 1, 3, 4] {
            tracker.insert(Point(i));
        }
        let snapshot = tracker.pair_counts.clone();
        tracker.insert(Point(8));
        tracker.remove(Point(8));
        assert_eq!(tracker.pair_counts, snapshot);
    }

    #[test]
    fn heuristic_examples() {
        let star1 = ShapeSystem::star(1, 3).unwrap();
        for seed in 0..10 {
            let r = heuristic_max(space(3, 2), &star1, seed, 50).unwrap();
            assert!(r.size >= 3);
            assert!(!r.optimal);
        }
        let greedy = heuristic_max(space(3, 2), &star1, 7, 0).unwrap();
        assert_eq!(greedy.nodes, 0);
        let a = heuristic_max(space(3, 3), &star1, 42, 300).unwrap();
        let b = heuristic_max(space(3, 3), &star1, 42, 300).unwrap();
        assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn bound_validation() {
        let star1 = ShapeSystem::star(1, 3).unwrap();
        let r = exact_max_shape_free(space(3, 2), &star1, SearchBudget::unlimited()).unwrap();
        let report = validate_against_bounds(&r, 1).unwrap();
        assert!((report.bound - 7.5906).abs() < 1e-3);
        assert!(report.slack > 0.0);
        assert!(validate_against_bounds(&r, 2).is_err());

        let empty = SearchResult {
            method: SearchMethod::Heuristic,
            system: star1.clone(),
            witness: PointSet::empty(space(3, 2)),
            size: 0,
            optimal: false,
            nodes: 0,
            verified_shape_free: true,
        };
        assert_eq!(validate_against_bounds(&empty, 1).unwrap().size, 0);

        let bogus = SearchResult {
            witness: PointSet::full(space(3, 2)),
            size: 9,
            ..empty
        };
        assert!(matches!(validate_against_bounds(&bogus, 1), Err(Error::Invariant(_))));
    }

    #[test]
    fn enumerate_counts_small_line() {
        // Subsets of F_3 avoiding {0,1,2}: all except the full line.
        let star1 = ShapeSystem::star(1, 3).unwrap();
        let all = enumerate_shape_free(space(3, 1), &star1, usize::MAX).unwrap();
        assert_eq!(all.len(), 7);
        let capped = enumerate_shape_free(space(3, 1), &star1, 4).unwrap();
        assert_eq!(capped.len(), 4);
    }
}
