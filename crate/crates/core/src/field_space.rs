//! Points of F_p^n as dense base-p indices, and bitset-backed subsets.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};

/// Trial-division primality test; adequate for p < 2^31.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Validates that `p` is an odd prime below 2^31.
pub fn check_odd_prime(p: u64) -> Result<u32> {
    if p >= 1 << 31 {
        return Err(Error::input("p", format!("{p} exceeds 2^31")));
    }
    if p < 3 || !is_prime(p) {
        return Err(Error::input("p", format!("{p} is not an odd prime")));
    }
    Ok(p as u32)
}

/// Modular inverse of `a` modulo the prime `p`.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod(a, p - 2, p)
}

fn pow_mod(base: u32, mut exp: u32, p: u32) -> u32 {
    let p = p as u64;
    let mut b = base as u64 % p;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        exp >>= 1;
    }
    acc as u32
}

/// Reduces an arbitrary integer into `[0, p)`.
pub fn reduce(c: i64, p: u32) -> u32 {
    c.rem_euclid(p as i64) as u32
}

/// The ambient space F_p^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FieldSpace {
    p: u32,
    n: u32,
    size: usize,
}

/// A point of F_p^n, stored as its base-p index (coordinate 0 least significant).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Point(pub usize);

impl Point {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl FieldSpace {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        let p = check_odd_prime(p)?;
        if n == 0 {
            return Err(Error::input("n", "dimension must be at least 1"));
        }
        let size = (p as usize)
            .checked_pow(n)
            .ok_or_else(|| Error::input("n", format!("{p}^{n} overflows the index width")))?;
        Ok(FieldSpace { p, n, size })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// p^n.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        (0..self.size).map(Point)
    }

    pub fn zero(&self) -> Point {
        Point(0)
    }

    pub fn encode(&self, coords: &[u32]) -> Result<Point> {
        if coords.len() != self.n as usize {
            return Err(Error::input(
                "coords",
                format!("expected {} coordinates, got {}", self.n, coords.len()),
            ));
        }
        let mut index = 0usize;
        for &c in coords.iter().rev() {
            if c >= self.p {
                return Err(Error::input(
                    "coords",
                    format!("residue {c} is not in [0, {})", self.p),
                ));
            }
            index = index * self.p as usize + c as usize;
        }
        Ok(Point(index))
    }

    pub fn decode(&self, point: Point) -> Vec<u32> {
        let p = self.p as usize;
        let mut rest = point.0;
        (0..self.n)
            .map(|_| {
                let d = rest % p;
                rest /= p;
                d as u32
            })
            .collect()
    }

    pub fn contains(&self, point: Point) -> bool {
        point.0 < self.size
    }

    /// Σ coeffs[i]·points[i], componentwise mod p.
    pub fn affine_combine(&self, points: &[Point], coeffs: &[u32]) -> Result<Point> {
        if points.len() != coeffs.len() {
            return Err(Error::input(
                "coeffs",
                format!("{} points but {} coefficients", points.len(), coeffs.len()),
            ));
        }
        if let Some(bad) = points.iter().find(|x| !self.contains(**x)) {
            return Err(Error::input("points", format!("{bad} lies outside F_{}^{}", self.p, self.n)));
        }
        Ok(self.combine(points.iter().copied().zip(coeffs.iter().copied())))
    }

    /// Unchecked linear combination over `(point, coefficient)` terms.
    pub(crate) fn combine<I>(&self, terms: I) -> Point
    where
        I: Iterator<Item = (Point, u32)> + Clone,
    {
        let p = self.p as u64;
        let mut out = 0usize;
        let mut weight = 1usize;
        let mut shift = 1usize;
        for _ in 0..self.n {
            let mut digit = 0u64;
            for (x, c) in terms.clone() {
                let d = (x.0 / shift) % self.p as usize;
                digit += c as u64 * d as u64;
            }
            out += (digit % p) as usize * weight;
            weight *= self.p as usize;
            shift *= self.p as usize;
        }
        out.into()
    }

    pub fn add(&self, a: Point, b: Point) -> Point {
        self.combine([(a, 1), (b, 1)].into_iter())
    }

    /// 2c − a: the reflection of `a` through `c`.
    pub fn reflect(&self, center: Point, a: Point) -> Point {
        self.combine([(center, 2), (a, self.p - 1)].into_iter())
    }

    /// (a + b)/2.
    pub fn midpoint(&self, a: Point, b: Point) -> Point {
        let half = inv_mod(2, self.p);
        self.combine([(a, half), (b, half)].into_iter())
    }
}

impl From<usize> for Point {
    fn from(i: usize) -> Self {
        Point(i)
    }
}

/// A subset A ⊆ F_p^n with O(1) membership.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    space: FieldSpace,
    bits: FixedBitSet,
    len: usize,
}

impl PointSet {
    pub fn empty(space: FieldSpace) -> Self {
        PointSet {
            space,
            bits: FixedBitSet::with_capacity(space.size()),
            len: 0,
        }
    }

    pub fn full(space: FieldSpace) -> Self {
        let mut bits = FixedBitSet::with_capacity(space.size());
        bits.insert_range(..);
        PointSet {
            space,
            bits,
            len: space.size(),
        }
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(space: FieldSpace, points: I) -> Result<Self> {
        let mut set = PointSet::empty(space);
        for x in points {
            if !space.contains(x) {
                return Err(Error::input("set", format!("{x} lies outside the space")));
            }
            set.insert(x);
        }
        Ok(set)
    }

    pub fn space(&self) -> FieldSpace {
        self.space
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, x: Point) -> bool {
        self.bits.contains(x.0)
    }

    /// Returns true when `x` was not already present.
    pub fn insert(&mut self, x: Point) -> bool {
        let fresh = !self.bits.put(x.0);
        if fresh {
            self.len += 1;
        }
        fresh
    }

    pub fn remove(&mut self, x: Point) -> bool {
        let present = self.bits.contains(x.0);
        if present {
            self.bits.set(x.0, false);
            self.len -= 1;
        }
        present
    }

    /// Members in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.bits.ones().map(Point)
    }

    pub fn to_vec(&self) -> Vec<Point> {
        self.iter().collect()
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        let len = bits.count_ones(..);
        PointSet {
            space: self.space,
            bits,
            len,
        }
    }

    /// Parses the point-set text format: one point per line, comma-separated
    /// residues, `#` comment lines and blank lines ignored.
    pub fn parse_text(space: FieldSpace, text: &str) -> Result<Self> {
        let mut set = PointSet::empty(space);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let coords = parse_residues(line)
                .map_err(|e| Error::input("set", format!("line {}: {e}", lineno + 1)))?;
            let x = space
                .encode(&coords)
                .map_err(|e| Error::input("set", format!("line {}: {e}", lineno + 1)))?;
            set.insert(x);
        }
        Ok(set)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# p={} n={} size={}\n",
            self.space.p(),
            self.space.n(),
            self.len
        );
        for x in self.iter() {
            out.push_str(&format_point(&self.space, x));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn parse_residues(s: &str) -> std::result::Result<Vec<u32>, String> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<u32>()
                .map_err(|_| format!("'{tok}' is not a non-negative residue"))
        })
        .collect()
}

/// Comma-separated residues, the same form the text format uses.
pub fn format_point(space: &FieldSpace, x: Point) -> String {
    space
        .decode(x)
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
