//! Homogeneous linear systems over F_p whose solutions are the shapes we avoid.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_space::{check_odd_prime, inv_mod, reduce, FieldSpace, Point};

/// Which family a system was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// k 3-APs sharing their middle term (the last variable).
    Star { k: usize },
    /// k 3-APs sharing an endpoint (the last variable).
    RelaxedStar { k: usize },
    /// A parallelogram glued to a 3-AP.
    WShape,
    /// One 3-AP with middle x_2 and one with middle x_5, sharing endpoint x_5.
    Mixed,
    Custom,
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemKind::Star { k } => write!(f, "star({k})"),
            SystemKind::RelaxedStar { k } => write!(f, "relaxed_star({k})"),
            SystemKind::WShape => f.write_str("w_shape"),
            SystemKind::Mixed => f.write_str("mixed_star"),
            SystemKind::Custom => f.write_str("custom"),
        }
    }
}

/// A system of linear equations in `num_vars` unknowns, reduced modulo `p`.
///
/// The integer form is kept so the same named system can be re-reduced for
/// another prime with [`ShapeSystem::reduce_for`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShapeSystem {
    kind: SystemKind,
    p: u32,
    num_vars: usize,
    symbolic: Vec<Vec<i64>>,
    rows: Vec<Vec<u32>>,
    rank: usize,
}

/// Outcome of testing a tuple against a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NonSolution,
    /// A semishape with a repeated point.
    Degenerate,
    Shape,
}

impl Classification {
    pub fn is_semishape(self) -> bool {
        !matches!(self, Classification::NonSolution)
    }
}

impl ShapeSystem {
    pub fn from_integer_rows(kind: SystemKind, p: u32, symbolic: Vec<Vec<i64>>) -> Result<Self> {
        check_odd_prime(p as u64)?;
        let num_vars = symbolic.first().map(Vec::len).unwrap_or(0);
        if num_vars == 0 || symbolic.is_empty() {
            return Err(Error::input("system", "needs at least one row and one variable"));
        }
        let mut rows = Vec::with_capacity(symbolic.len());
        for (i, row) in symbolic.iter().enumerate() {
            if row.len() != num_vars {
                return Err(Error::input(
                    "system",
                    format!("row {} has {} entries, expected {num_vars}", i + 1, row.len()),
                ));
            }
            let reduced: Vec<u32> = row.iter().map(|&c| reduce(c, p)).collect();
            if reduced.iter().all(|&c| c == 0) {
                return Err(Error::input(
                    "system",
                    format!("row {} vanishes modulo {p}", i + 1),
                ));
            }
            rows.push(reduced);
        }
        let rank = rank_mod_p(&rows, p);
        Ok(ShapeSystem {
            kind,
            p,
            num_vars,
            symbolic,
            rows,
            rank,
        })
    }

    pub fn star(k: usize, p: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k", "must be at least 1"));
        }
        let v = 2 * k + 1;
        let rows = (0..k)
            .map(|i| {
                let mut row = vec![0i64; v];
                row[2 * i] = 1;
                row[2 * i + 1] = 1;
                row[v - 1] = -2;
                row
            })
            .collect();
        Self::from_integer_rows(SystemKind::Star { k }, p, rows)
    }

    pub fn relaxed_star(k: usize, p: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k", "must be at least 1"));
        }
        let v = 2 * k + 1;
        let rows = (0..k)
            .map(|i| {
                let mut row = vec![0i64; v];
                row[2 * i] = 1;
                row[2 * i + 1] = -2;
                row[v - 1] = 1;
                row
            })
            .collect();
        Self::from_integer_rows(SystemKind::RelaxedStar { k }, p, rows)
    }

    pub fn w_shape(p: u32) -> Result<Self> {
        Self::from_integer_rows(
            SystemKind::WShape,
            p,
            vec![vec![1, -1, -1, 1, 0], vec![1, 0, -2, 0, 1]],
        )
    }

    pub fn mixed(p: u32) -> Result<Self> {
        Self::from_integer_rows(
            SystemKind::Mixed,
            p,
            vec![vec![1, -2, 0, 0, 1], vec![0, 0, 1, 1, -2]],
        )
    }

    /// Parses the custom-system format: a header line `v r`, then `r` lines
    /// of `v` integers.
    pub fn parse_custom(text: &str, p: u32) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::input("system", "empty system file"))?;
        let dims = parse_ints(header)?;
        let [v, r] = dims[..] else {
            return Err(Error::input("system", "header must be 'v r'"));
        };
        if v <= 0 || r <= 0 {
            return Err(Error::input("system", "v and r must be positive"));
        }
        let rows: Vec<Vec<i64>> = lines.map(parse_ints).collect::<Result<_>>()?;
        if rows.len() != r as usize {
            return Err(Error::input(
                "system",
                format!("header promises {r} rows, found {}", rows.len()),
            ));
        }
        if let Some(bad) = rows.iter().position(|row| row.len() != v as usize) {
            return Err(Error::input(
                "system",
                format!("row {} does not have {v} entries", bad + 1),
            ));
        }
        Self::from_integer_rows(SystemKind::Custom, p, rows)
    }

    /// The same integer system reduced modulo another prime.
    pub fn reduce_for(&self, p: u32) -> Result<Self> {
        Self::from_integer_rows(self.kind, p, self.symbolic.clone())
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn integer_rows(&self) -> &[Vec<i64>] {
        &self.symbolic
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// k for star-type systems.
    pub fn star_k(&self) -> Option<usize> {
        match self.kind {
            SystemKind::Star { k } => Some(k),
            _ => None,
        }
    }

    pub fn is_semishape(&self, space: &FieldSpace, tuple: &[Point]) -> bool {
        self.rows.iter().all(|row| {
            let terms = tuple.iter().copied().zip(row.iter().copied());
            space.combine(terms.filter(|&(_, c)| c != 0)) == space.zero()
        })
    }

    pub fn classify(&self, space: &FieldSpace, tuple: &[Point]) -> Result<Classification> {
        if space.p() != self.p {
            return Err(Error::input(
                "space",
                format!("system is reduced mod {}, space is over F_{}", self.p, space.p()),
            ));
        }
        if tuple.len() != self.num_vars {
            return Err(Error::input(
                "tuple",
                format!("expected {} points, got {}", self.num_vars, tuple.len()),
            ));
        }
        if let Some(x) = tuple.iter().find(|x| !space.contains(**x)) {
            return Err(Error::input("tuple", format!("{x} lies outside the space")));
        }
        if !self.is_semishape(space, tuple) {
            return Ok(Classification::NonSolution);
        }
        Ok(if all_distinct(tuple) {
            Classification::Shape
        } else {
            Classification::Degenerate
        })
    }

    /// p^{n(v−r)}: the number of solutions in (F_p^n)^v.
    pub fn full_space_semishape_count(&self, space: &FieldSpace) -> Result<u128> {
        let exponent = space.n() as u64 * (self.num_vars - self.rank) as u64;
        u32::try_from(exponent)
            .ok()
            .and_then(|e| (space.p() as u128).checked_pow(e))
            .ok_or_else(|| Error::Resource(format!("p^{exponent} overflows 128 bits")))
    }
}

pub(crate) fn all_distinct(tuple: &[Point]) -> bool {
    let mut sorted = tuple.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

fn parse_ints(line: &str) -> Result<Vec<i64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<i64>()
                .map_err(|_| Error::input("system", format!("'{tok}' is not an integer")))
        })
        .collect()
}

/// Rank over F_p by Gaussian elimination.
pub fn rank_mod_p(rows: &[Vec<u32>], p: u32) -> usize {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| (c % p) as u64).collect())
        .collect();
    let p64 = p as u64;
    let cols = m.first().map(Vec::len).unwrap_or(0);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = inv_mod(m[rank][col] as u32, p) as u64;
        for c in col..cols {
            m[rank][c] = m[rank][c] * inv % p64;
        }
        for r in 0..m.len() {
            if r != rank && m[r][col] != 0 {
                let f = m[r][col];
                for c in col..cols {
                    m[r][c] = (m[r][c] + (p64 - f) * m[rank][c]) % p64;
                }
            }
        }
        rank += 1;
    }
    rank
}
