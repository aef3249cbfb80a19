//! Shape detection and the induction-step machinery over concrete sets:
//! disjoint packings, lifting shorter stars into longer semishapes,
//! extendable pairs, and the multicolored condition.

use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::field_space::{inv_mod, FieldSpace, Point, PointSet};
use crate::systems::{Classification, ShapeSystem, SystemKind};

/// Default cap on partial row-combinations visited by [`multicolor_check`].
pub const DEFAULT_MULTICOLOR_BUDGET: u64 = 100_000_000;

// ---------------------------------------------------------------------------
// Generic solution walker
// ---------------------------------------------------------------------------

/// Candidate values for one variable position, each carrying a label.
pub(crate) enum Domain<'a> {
    /// Labels are the point indices themselves.
    Set(&'a PointSet),
    Labeled {
        entries: Vec<(usize, Point)>,
        by_point: HashMap<Point, Vec<usize>>,
    },
}

impl Domain<'_> {
    pub(crate) fn labeled(entries: Vec<(usize, Point)>) -> Self {
        let mut by_point: HashMap<Point, Vec<usize>> = HashMap::new();
        for &(label, x) in &entries {
            by_point.entry(x).or_default().push(label);
        }
        Domain::Labeled { entries, by_point }
    }

    fn single(x: Point) -> Self {
        Self::labeled(vec![(x.index(), x)])
    }

    fn candidates(&self) -> Vec<(usize, Point)> {
        match self {
            Domain::Set(set) => set.iter().map(|x| (x.index(), x)).collect(),
            Domain::Labeled { entries, .. } => entries.clone(),
        }
    }

    fn labels_of(&self, x: Point) -> Vec<usize> {
        match self {
            Domain::Set(set) if set.contains(x) => vec![x.index()],
            Domain::Set(_) => Vec::new(),
            Domain::Labeled { by_point, .. } => by_point.get(&x).cloned().unwrap_or_default(),
        }
    }
}

#[derive(Debug)]
pub(crate) struct BudgetExceeded;

/// Depth-first enumeration of solutions of a system with position `j` drawn
/// from `domains[j]`.
///
/// A variable that is the last support of some row is solved for rather than
/// iterated, so only unconstrained positions branch. Remaining rows closing
/// at the same position are checked once it is assigned.
pub(crate) struct Walker<'a> {
    space: FieldSpace,
    rows: &'a [Vec<u32>],
    domains: Vec<Domain<'a>>,
    closing: Vec<Vec<usize>>,
    distinct: bool,
    node_limit: Option<u64>,
    nodes: u64,
    labels: Vec<usize>,
    points: Vec<Point>,
}

type Visit<'v> = dyn FnMut(&[usize], &[Point]) -> ControlFlow<()> + 'v;
type Step = std::result::Result<ControlFlow<()>, BudgetExceeded>;

impl<'a> Walker<'a> {
    pub(crate) fn new(
        space: FieldSpace,
        system: &'a ShapeSystem,
        domains: Vec<Domain<'a>>,
        distinct: bool,
    ) -> Self {
        let v = system.num_vars();
        assert_eq!(domains.len(), v, "one domain per variable");
        let mut closing = vec![Vec::new(); v];
        for (r, row) in system.rows().iter().enumerate() {
            let last = row.iter().rposition(|&c| c != 0).expect("rows are nonzero");
            closing[last].push(r);
        }
        Walker {
            space,
            rows: system.rows(),
            domains,
            closing,
            distinct,
            node_limit: None,
            nodes: 0,
            labels: Vec::with_capacity(v),
            points: Vec::with_capacity(v),
        }
    }

    pub(crate) fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = Some(limit);
        self
    }

    pub(crate) fn nodes(&self) -> u64 {
        self.nodes
    }

    pub(crate) fn run(&mut self, visit: &mut Visit<'_>) -> Step {
        self.labels.clear();
        self.points.clear();
        self.descend(visit)
    }

    /// Runs without a node limit; the flow result is irrelevant to callers.
    pub(crate) fn exhaust(&mut self, visit: &mut Visit<'_>) {
        debug_assert!(self.node_limit.is_none());
        let _ = self.run(visit).expect("no node limit set");
    }

    fn row_value(&self, row: &[u32], upto: usize) -> Point {
        let terms = self.points[..upto]
            .iter()
            .copied()
            .zip(row[..upto].iter().copied())
            .filter(|&(_, c)| c != 0);
        self.space.combine(terms)
    }

    fn descend(&mut self, visit: &mut Visit<'_>) -> Step {
        let j = self.points.len();
        if j == self.domains.len() {
            return Ok(visit(&self.labels, &self.points));
        }
        let candidates = match self.closing[j].first() {
            Some(&r) => {
                // x_j = −c⁻¹ Σ_{i<j} row[i]·x_i
                let row = &self.rows[r];
                let p = self.space.p();
                let partial = self.row_value(row, j);
                let factor = p - inv_mod(row[j], p);
                let x = self.space.combine(std::iter::once((partial, factor)));
                self.domains[j]
                    .labels_of(x)
                    .into_iter()
                    .map(|label| (label, x))
                    .collect()
            }
            None => self.domains[j].candidates(),
        };
        for (label, x) in candidates {
            if self.distinct && self.points.contains(&x) {
                continue;
            }
            self.nodes += 1;
            if self.node_limit.is_some_and(|limit| self.nodes > limit) {
                return Err(BudgetExceeded);
            }
            self.labels.push(label);
            self.points.push(x);
            let consistent = self.closing[j]
                .iter()
                .skip(1)
                .all(|&r| self.row_value(&self.rows[r], j + 1) == self.space.zero());
            let flow = if consistent {
                self.descend(visit)?
            } else {
                ControlFlow::Continue(())
            };
            self.labels.pop();
            self.points.pop();
            if flow.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }
}

fn check_space(set: &PointSet, system: &ShapeSystem) -> Result<()> {
    if set.space().p() != system.p() {
        return Err(Error::input(
            "system",
            format!(
                "system is reduced mod {} but the set lives in F_{}^{}",
                system.p(),
                set.space().p(),
                set.space().n()
            ),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Star structure: pairs around a center
// ---------------------------------------------------------------------------

/// Unordered pairs {a, b} ⊆ A with a + b = 2c and a ≠ b, as (a, b) with a < b.
///
/// For a fixed center the partner of a is determined, so distinct pairs are
/// automatically disjoint, and none contains c.
pub fn center_pairs(set: &PointSet, center: Point) -> Vec<(Point, Point)> {
    let space = set.space();
    set.iter()
        .filter_map(|a| {
            let b = space.reflect(center, a);
            (a < b && set.contains(b)).then_some((a, b))
        })
        .collect()
}

/// r(c) = #{(a, b) ∈ A² : a + b = 2c}.
fn star_representations(set: &PointSet, center: Point) -> u128 {
    let diagonal = set.contains(center) as u128;
    diagonal + 2 * center_pairs(set, center).len() as u128
}

/// #{m ∈ A : 2m − e ∈ A}.
fn relaxed_representations(set: &PointSet, end: Point) -> u128 {
    let space = set.space();
    set.iter()
        .filter(|&m| set.contains(space.reflect(m, end)))
        .count() as u128
}

fn star_shape_at(set: &PointSet, center: Point, k: usize) -> Option<Vec<Point>> {
    let pairs = center_pairs(set, center);
    if pairs.len() < k {
        return None;
    }
    let mut tuple: Vec<Point> = pairs[..k].iter().flat_map(|&(a, b)| [a, b]).collect();
    tuple.push(center);
    Some(tuple)
}

// ---------------------------------------------------------------------------
// Detection and counting
// ---------------------------------------------------------------------------

/// Some shape with all points in `set`, or `None` when the set is shape-free.
///
/// Star systems are scanned center by center in index order; other systems go
/// through the general enumerator. Either way the result is deterministic.
pub fn find_shape(set: &PointSet, system: &ShapeSystem) -> Option<Vec<Point>> {
    if set.is_empty() || set.p_mismatch(system) {
        return None;
    }
    match system.kind() {
        SystemKind::Star { k } => set.iter().find_map(|c| star_shape_at(set, c, k)),
        _ => find_shape_by_enumeration(set, system),
    }
}

/// [`find_shape`] through the general enumerator, regardless of system kind.
pub fn find_shape_by_enumeration(set: &PointSet, system: &ShapeSystem) -> Option<Vec<Point>> {
    let domains = (0..system.num_vars()).map(|_| Domain::Set(set)).collect();
    first_solution(set.space(), system, domains, true)
}

fn first_solution(
    space: FieldSpace,
    system: &ShapeSystem,
    domains: Vec<Domain<'_>>,
    distinct: bool,
) -> Option<Vec<Point>> {
    let mut found = None;
    let mut walker = Walker::new(space, system, domains, distinct);
    walker.exhaust(&mut |_, pts| {
        found = Some(pts.to_vec());
        ControlFlow::Break(())
    });
    found
}

/// A shape within `set` that uses the point `x` (which must be in `set`).
pub fn find_shape_containing(set: &PointSet, system: &ShapeSystem, x: Point) -> Option<Vec<Point>> {
    if !set.contains(x) {
        return None;
    }
    if let SystemKind::Star { k } = system.kind() {
        if let Some(shape) = star_shape_at(set, x, k) {
            return Some(shape);
        }
        let space = set.space();
        return set.iter().filter(|&c| c != x).find_map(|c| {
            let partner = space.reflect(c, x);
            if !set.contains(partner) || partner == x {
                return None;
            }
            let (a, b) = if x < partner { (x, partner) } else { (partner, x) };
            let others: Vec<_> = center_pairs(set, c)
                .into_iter()
                .filter(|&pair| pair != (a, b))
                .take(k - 1)
                .collect();
            (others.len() == k - 1).then(|| {
                let mut tuple = vec![a, b];
                tuple.extend(others.iter().flat_map(|&(u, w)| [u, w]));
                tuple.push(c);
                tuple
            })
        });
    }
    (0..system.num_vars()).find_map(|pos| {
        let domains = (0..system.num_vars())
            .map(|j| if j == pos { Domain::single(x) } else { Domain::Set(set) })
            .collect();
        first_solution(set.space(), system, domains, true)
    })
}

/// Exact number of semishapes (repetitions allowed) with every term in `set`.
///
/// Star-type systems factor over the shared term: Σ_c r(c)^k.
pub fn count_semishapes(set: &PointSet, system: &ShapeSystem) -> Result<u128> {
    check_space(set, system)?;
    let overflow = || Error::Resource("semishape count overflows 128 bits".into());
    let per_center = |reps: fn(&PointSet, Point) -> u128, k: usize| -> Result<u128> {
        let points = set.to_vec();
        points
            .par_iter()
            .map(|&c| reps(set, c).checked_pow(k as u32))
            .try_reduce(|| 0u128, |a, b| a.checked_add(b))
            .ok_or_else(overflow)
    };
    match system.kind() {
        SystemKind::Star { k } => per_center(star_representations, k),
        SystemKind::RelaxedStar { k } => per_center(relaxed_representations, k),
        _ => {
            let domains = (0..system.num_vars()).map(|_| Domain::Set(set)).collect();
            let mut count = 0u128;
            Walker::new(set.space(), system, domains, false).exhaust(&mut |_, _| {
                count += 1;
                ControlFlow::Continue(())
            });
            Ok(count)
        }
    }
}

/// Calls `visit` on every shape in `set` in enumeration order.
pub fn for_each_shape<F>(set: &PointSet, system: &ShapeSystem, mut visit: F)
where
    F: FnMut(&[Point]) -> ControlFlow<()>,
{
    if set.p_mismatch(system) {
        return;
    }
    let domains = (0..system.num_vars()).map(|_| Domain::Set(set)).collect();
    Walker::new(set.space(), system, domains, true).exhaust(&mut |_, pts| visit(pts));
}

impl PointSet {
    fn p_mismatch(&self, system: &ShapeSystem) -> bool {
        self.space().p() != system.p()
    }
}

// ---------------------------------------------------------------------------
// Disjoint packings
// ---------------------------------------------------------------------------

/// Pairwise point-disjoint shapes inside a set.
#[derive(Debug, Clone, Serialize)]
pub struct DisjointFamily {
    pub shapes: Vec<Vec<Point>>,
    #[serde(skip)]
    pub covered: PointSet,
    /// No shape of the set avoids `covered`.
    pub maximal: bool,
}

impl DisjointFamily {
    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }
}

/// Greedily packs disjoint shapes, always taking the first shape
/// [`find_shape`] reports in what remains. Stops at `target` members if given.
pub fn greedy_disjoint_pack(
    set: &PointSet,
    system: &ShapeSystem,
    target: Option<usize>,
) -> DisjointFamily {
    let mut residual = set.clone();
    let mut covered = PointSet::empty(set.space());
    let mut shapes = Vec::new();
    let maximal = loop {
        if target == Some(shapes.len()) {
            break find_shape(&residual, system).is_none();
        }
        match find_shape(&residual, system) {
            Some(shape) => {
                for &x in &shape {
                    residual.remove(x);
                    covered.insert(x);
                }
                shapes.push(shape);
            }
            None => break true,
        }
    };
    DisjointFamily {
        shapes,
        covered,
        maximal,
    }
}

// ---------------------------------------------------------------------------
// Multicolored families
// ---------------------------------------------------------------------------

/// s tuples of width v; column j collects the j-th terms of every row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MulticoloredFamily {
    #[serde(skip)]
    space: FieldSpace,
    width: usize,
    rows: Vec<Vec<Point>>,
}

impl MulticoloredFamily {
    pub fn new(space: FieldSpace, width: usize, rows: Vec<Vec<Point>>) -> Result<Self> {
        if width == 0 {
            return Err(Error::input("rows", "width must be positive"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::input(
                    "rows",
                    format!("row {} has {} points, expected {width}", i + 1, row.len()),
                ));
            }
            if let Some(x) = row.iter().find(|x| !space.contains(**x)) {
                return Err(Error::input("rows", format!("{x} lies outside the space")));
            }
        }
        Ok(MulticoloredFamily { space, width, rows })
    }

    pub fn space(&self) -> FieldSpace {
        self.space
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[Vec<Point>] {
        &self.rows
    }

    /// s.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// X_j for 0-based column `j`.
    pub fn column(&self, j: usize) -> PointSet {
        let mut set = PointSet::empty(self.space);
        for row in &self.rows {
            set.insert(row[j]);
        }
        set
    }

    pub fn columns(&self) -> Vec<PointSet> {
        (0..self.width).map(|j| self.column(j)).collect()
    }

    /// Parses one row per line; points separated by `;`, residues by `,`.
    pub fn parse_text(space: FieldSpace, width: usize, text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(';')
                .map(|tok| {
                    crate::field_space::parse_residues(tok)
                        .map_err(|e| Error::input("rows", format!("line {}: {e}", lineno + 1)))
                        .and_then(|c| space.encode(&c))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(space, width, rows)
    }
}

/// The pairs (x, y) ∈ X_i × X_j occurring as the i-th and j-th terms of some
/// semishape in X_1 × ⋯ × X_v. Positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtendabilityRelation {
    pub i: usize,
    pub j: usize,
    pub pairs: BTreeSet<(Point, Point)>,
}

impl ExtendabilityRelation {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn check_family_fits(family: &MulticoloredFamily, system: &ShapeSystem) -> Result<()> {
    if family.width != system.num_vars() {
        return Err(Error::input(
            "rows",
            format!("rows have width {}, system has {} variables", family.width, system.num_vars()),
        ));
    }
    if family.space.p() != system.p() {
        return Err(Error::input("system", "family and system use different primes"));
    }
    Ok(())
}

/// Calls `visit` on every semishape of the product of the family's columns.
fn for_each_product_semishape<F>(family: &MulticoloredFamily, system: &ShapeSystem, mut visit: F)
where
    F: FnMut(&[Point]) -> ControlFlow<()>,
{
    let columns = family.columns();
    let domains = columns.iter().map(Domain::Set).collect();
    Walker::new(family.space, system, domains, false).exhaust(&mut |_, pts| visit(pts));
}

pub fn extendable_pairs(
    family: &MulticoloredFamily,
    system: &ShapeSystem,
    i: usize,
    j: usize,
) -> Result<ExtendabilityRelation> {
    check_family_fits(family, system)?;
    let v = system.num_vars();
    if !(1 <= i && i < j && j <= v) {
        return Err(Error::input(
            "positions",
            format!("need 1 <= i < j <= {v}, got i={i}, j={j}"),
        ));
    }
    let mut pairs = BTreeSet::new();
    for_each_product_semishape(family, system, |pts| {
        pairs.insert((pts[i - 1], pts[j - 1]));
        ControlFlow::Continue(())
    });
    Ok(ExtendabilityRelation { i, j, pairs })
}

/// True when distinct pairs of the relation never share their second point.
pub fn lemma_injectivity_check(relation: &ExtendabilityRelation) -> bool {
    let mut seen = BTreeSet::new();
    relation.pairs.iter().all(|&(_, y)| seen.insert(y))
}

/// Outcome of [`multicolor_check`] together with the work it took.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MulticolorOutcome {
    pub holds: bool,
    pub nodes: u64,
}

/// Tests that (x_{1,i_1}, …, x_{v,i_v}) is a semishape exactly when all the
/// indices agree.
///
/// Index combinations are enumerated with forced positions solved from their
/// closing equation, so a row-prefix that fixes an equation's support is never
/// extended unless that equation holds. Exceeding `budget` partial assignments
/// is a resource error, not a `false`.
pub fn multicolor_check(
    family: &MulticoloredFamily,
    system: &ShapeSystem,
    budget: u64,
) -> Result<MulticolorOutcome> {
    check_family_fits(family, system)?;
    let space = family.space;
    if !family.rows.iter().all(|row| system.is_semishape(&space, row)) {
        return Ok(MulticolorOutcome { holds: false, nodes: 0 });
    }
    let domains = (0..family.width)
        .map(|j| Domain::labeled(family.rows.iter().enumerate().map(|(i, row)| (i, row[j])).collect()))
        .collect();
    let mut walker = Walker::new(space, system, domains, false).with_node_limit(budget);
    let mut holds = true;
    let run = walker.run(&mut |labels, _| {
        if labels.iter().all(|&l| l == labels[0]) {
            ControlFlow::Continue(())
        } else {
            holds = false;
            ControlFlow::Break(())
        }
    });
    if run.is_err() {
        return Err(Error::Resource(format!(
            "multicolor check exceeded {budget} row combinations (s = {})",
            family.len()
        )));
    }
    Ok(MulticolorOutcome {
        holds,
        nodes: walker.nodes(),
    })
}

/// Lifts each star(k−1)-shape (a_1, …, a_{2k−1}) to the star(k)-semishape
/// (a_1, a_2, a_1, a_2, a_3, …, a_{2k−1}).
pub fn lift_to_m(
    space: FieldSpace,
    shapes: &[Vec<Point>],
    shorter: &ShapeSystem,
    k: usize,
) -> Result<MulticoloredFamily> {
    if k < 2 {
        return Err(Error::input("k", "lifting needs k >= 2"));
    }
    if shorter.kind() != (SystemKind::Star { k: k - 1 }) {
        return Err(Error::input(
            "system",
            format!("lifting needs star({}) shapes, got {}", k - 1, shorter.kind()),
        ));
    }
    let longer = ShapeSystem::star(k, shorter.p())?;
    let mut rows = Vec::with_capacity(shapes.len());
    for (idx, shape) in shapes.iter().enumerate() {
        if shorter.classify(&space, shape)? != Classification::Shape {
            return Err(Error::input(
                "family",
                format!("member {} is not a star({})-shape", idx + 1, k - 1),
            ));
        }
        let mut row = vec![shape[0], shape[1]];
        row.extend_from_slice(shape);
        if !longer.is_semishape(&space, &row) {
            return Err(Error::Invariant(format!(
                "lifted row {} is not a star({k})-semishape",
                idx + 1
            )));
        }
        rows.push(row);
    }
    MulticoloredFamily::new(space, 2 * k + 1, rows)
}

// ---------------------------------------------------------------------------
// Induction-step replay
// ---------------------------------------------------------------------------

/// Which branch of the induction step a set falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayCase {
    /// Fewer than t disjoint star(k−1)-shapes: delete a maximal packing and
    /// recurse on the residual set.
    Residual,
    /// t disjoint star(k−1)-shapes exist: lift them into a multicolored family.
    Lifted,
}

/// One verified statement in a replay trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub statement: String,
    pub holds: bool,
}

/// Everything the replay computed, with each verified statement.
#[derive(Debug, Clone, Serialize)]
pub struct CaseTrace {
    pub k: usize,
    pub size: usize,
    pub t: usize,
    pub case: ReplayCase,
    pub lambda: f64,
    pub family: Vec<Vec<Point>>,
    pub family_maximal: bool,
    pub residual_size: Option<usize>,
    pub m_rows: Vec<Vec<Point>>,
    pub extendable: Vec<(Point, Point)>,
    pub checks: Vec<Check>,
}

impl CaseTrace {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Replays one induction step of the k-star bound on a concrete star(k)-shape-free set.
pub fn replay_induction_step(set: &PointSet, k: usize) -> Result<CaseTrace> {
    replay_with_budget(set, k, DEFAULT_MULTICOLOR_BUDGET)
}

pub fn replay_with_budget(set: &PointSet, k: usize, budget: u64) -> Result<CaseTrace> {
    if k < 2 {
        return Err(Error::input("k", "the induction step needs k >= 2"));
    }
    let space = set.space();
    let p = space.p();
    let star = ShapeSystem::star(k, p)?;
    if let Some(shape) = find_shape(set, &star) {
        return Err(Error::input(
            "set",
            format!("set contains a star({k})-shape {shape:?}"),
        ));
    }
    let shorter = ShapeSystem::star(k - 1, p)?;
    let size = set.len();
    let t = size.div_ceil(k * k);
    let lambda = bounds::spade_constant(p);
    let lambda_n = lambda.powi(space.n() as i32);

    let family = greedy_disjoint_pack(set, &shorter, Some(t));
    let mut checks = Vec::new();
    let mut push = |name: &'static str, statement: String, holds: bool| {
        checks.push(Check { name, statement, holds });
    };

    let mut trace = if family.len() < t {
        let residual = set.difference(&family.covered);
        let r = residual.len();
        push(
            "packing_maximal",
            format!("no star({})-shape avoids the {} packed shapes", k - 1, family.len()),
            family.maximal,
        );
        push(
            "packing_short",
            format!("{} disjoint shapes < t = {t}", family.len()),
            family.len() < t,
        );
        let removed = (2 * k - 1) * (t - 1);
        push(
            "residual_size",
            format!("#A' = {r} >= #A - (2k-1)(t-1) = {}", size as i64 - removed as i64),
            r as i64 >= size as i64 - removed as i64,
        );
        let ratio = ((k - 1) as f64 / k as f64).powi(2);
        push(
            "residual_ratio",
            format!("#A' = {r} >= ((k-1)/k)^2 #A = {:.6}", ratio * size as f64),
            r as f64 >= ratio * size as f64 - 1e-9,
        );
        push(
            "residual_shape_free",
            format!("A' has no star({})-shape", k - 1),
            find_shape(&residual, &shorter).is_none(),
        );
        let induction = ((k - 1) * (k - 1)) as f64 * lambda_n;
        push(
            "residual_bound",
            format!("#A' = {r} <= (k-1)^2 Lambda^n = {induction:.6}"),
            r as f64 <= induction,
        );
        CaseTrace {
            k,
            size,
            t,
            case: ReplayCase::Residual,
            lambda,
            family: family.shapes.clone(),
            family_maximal: family.maximal,
            residual_size: Some(r),
            m_rows: Vec::new(),
            extendable: Vec::new(),
            checks: Vec::new(),
        }
    } else {
        let m = lift_to_m(space, &family.shapes, &shorter, k)?;
        let longer = &star;
        let v = 2 * k + 1;
        push(
            "rows_semishapes",
            format!("all {} lifted rows are star({k})-semishapes", m.len()),
            m.rows().iter().all(|row| longer.is_semishape(&space, row)),
        );
        let columns = m.columns();
        push(
            "column_sizes",
            format!("#X_i = t = {t} for every column"),
            columns.iter().all(|c| c.len() == t),
        );
        push(
            "column_identities",
            "X_1 = X_3 and X_2 = X_4".to_string(),
            columns[0] == columns[2] && columns[1] == columns[3],
        );
        let distinct_columns: Vec<&PointSet> = [0, 1]
            .into_iter()
            .chain(4..v)
            .map(|j| &columns[j])
            .collect();
        let total: usize = distinct_columns.iter().map(|c| c.len()).sum();
        let mut union = PointSet::empty(space);
        for c in &distinct_columns {
            for x in c.iter() {
                union.insert(x);
            }
        }
        push(
            "columns_disjoint",
            "X_1, X_2, X_5, ..., X_v are pairwise disjoint".to_string(),
            union.len() == total,
        );
        let mut repeats = true;
        for_each_product_semishape(&m, longer, |pts| {
            if pts[0] != pts[2] || pts[1] != pts[3] {
                repeats = false;
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        });
        push(
            "semishapes_repeat",
            "every semishape of the column product has x_1 = x_3 and x_2 = x_4".to_string(),
            repeats,
        );
        let relation = extendable_pairs(&m, longer, 1, v)?;
        push(
            "extension_injective",
            format!("(1,{v})-extendable pairs have distinct second terms"),
            lemma_injectivity_check(&relation),
        );
        push(
            "extension_count",
            format!("#B = {} = t = {t}", relation.len()),
            relation.len() == t,
        );
        let multicolor = multicolor_check(&m, longer, budget)?;
        push(
            "multicolored",
            format!(
                "only diagonal index choices give semishapes ({} nodes)",
                multicolor.nodes
            ),
            multicolor.holds,
        );
        push(
            "multicolor_bound",
            format!("s = {} <= Lambda^n = {lambda_n:.6}", m.len()),
            m.len() as f64 <= lambda_n,
        );
        CaseTrace {
            k,
            size,
            t,
            case: ReplayCase::Lifted,
            lambda,
            family: family.shapes.clone(),
            family_maximal: family.maximal,
            residual_size: None,
            m_rows: m.rows().to_vec(),
            extendable: relation.pairs.into_iter().collect(),
            checks: Vec::new(),
        }
    };
    let club = (k * k) as f64 * lambda_n;
    checks.push(Check {
        name: "club_bound",
        statement: format!("#A = {size} <= k^2 Lambda^n = {club:.6}"),
        holds: size as f64 <= club,
    });
    trace.checks = checks;
    Ok(trace)
}
