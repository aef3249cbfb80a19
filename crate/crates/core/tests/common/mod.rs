//! Brute-force oracles shared by the integration tests. They decode points and
//! evaluate equations from the integer coefficient rows directly, without the
//! library's arithmetic or enumeration paths.

#![allow(dead_code)]

use kstar::{FieldSpace, Point, PointSet, ShapeSystem};
use rand::Rng;

pub fn coords(space: &FieldSpace, x: Point) -> Vec<i64> {
    let p = space.p() as usize;
    let mut rest = x.index();
    (0..space.n())
        .map(|_| {
            let d = rest % p;
            rest /= p;
            d as i64
        })
        .collect()
}

/// Does `tuple` satisfy every row of the system, computed coordinatewise?
pub fn solves(space: &FieldSpace, system: &ShapeSystem, tuple: &[Vec<i64>]) -> bool {
    let p = space.p() as i64;
    system.integer_rows().iter().all(|row| {
        (0..space.n() as usize).all(|d| {
            let s: i64 = row.iter().zip(tuple).map(|(c, x)| c * x[d]).sum();
            s.rem_euclid(p) == 0
        })
    })
}

pub struct BruteCount {
    pub semishapes: u128,
    pub shapes: u128,
}

/// Odometer over every v-tuple of `set`.
pub fn brute_count(set: &PointSet, system: &ShapeSystem) -> BruteCount {
    let space = set.space();
    let members: Vec<Point> = set.iter().collect();
    let decoded: Vec<Vec<i64>> = members.iter().map(|&x| coords(&space, x)).collect();
    let v = system.num_vars();
    let mut out = BruteCount { semishapes: 0, shapes: 0 };
    if members.is_empty() {
        return out;
    }
    let mut idx = vec![0usize; v];
    loop {
        let tuple: Vec<Vec<i64>> = idx.iter().map(|&i| decoded[i].clone()).collect();
        if solves(&space, system, &tuple) {
            out.semishapes += 1;
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() == v {
                out.shapes += 1;
            }
        }
        let mut pos = 0;
        loop {
            if pos == v {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < members.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

pub fn brute_shape_free(set: &PointSet, system: &ShapeSystem) -> bool {
    brute_count(set, system).shapes == 0
}

/// Largest shape-free subset size by trying every subset (2^{p^n} of them).
pub fn brute_max_shape_free(space: FieldSpace, system: &ShapeSystem) -> usize {
    assert!(space.size() <= 12);
    let mut best = 0;
    for mask in 0u32..(1 << space.size()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let set = subset_from_mask(space, mask);
        if brute_shape_free(&set, system) {
            best = size;
        }
    }
    best
}

pub fn subset_from_mask(space: FieldSpace, mask: u32) -> PointSet {
    PointSet::from_points(space, (0..space.size()).filter(|i| mask >> i & 1 == 1).map(Point)).unwrap()
}

pub fn random_subset<R: Rng>(rng: &mut R, space: FieldSpace, max_size: usize) -> PointSet {
    let size = rng.gen_range(0..=max_size.min(space.size()));
    let mut set = PointSet::empty(space);
    while set.len() < size {
        set.insert(Point(rng.gen_range(0..space.size())));
    }
    set
}

/// Largest |A| for which |A|^v stays within `leaves`.
pub fn brute_size_cap(v: usize, leaves: f64) -> usize {
    leaves.powf(1.0 / v as f64).floor() as usize
}
