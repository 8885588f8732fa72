//! Bounded discrete logarithm for decrypted tallies.

use std::collections::HashMap;

use crate::arith::GroupInt;
use crate::group::{Element, Group};

/// Bounds up to this size are solved by linear scan.
pub const LINEAR_SCAN_LIMIT: u64 = 1_000_000;

/// The `m ≤ max` with `g^m = y`, if any.
pub fn recover_exponent<T: GroupInt>(group: &Group<T>, y: &Element<T>, max: u64) -> Option<u64> {
    if max <= LINEAR_SCAN_LIMIT {
        linear_scan(group, y, max)
    } else {
        baby_step_giant_step(group, y, max)
    }
}

fn linear_scan<T: GroupInt>(group: &Group<T>, y: &Element<T>, max: u64) -> Option<u64> {
    let g = group.generator();
    let mut acc = group.identity();
    for m in 0..=max {
        if &acc == y {
            return Some(m);
        }
        acc = group.mul(&acc, &g);
    }
    None
}

fn baby_step_giant_step<T: GroupInt>(group: &Group<T>, y: &Element<T>, max: u64) -> Option<u64> {
    let step = ((max as f64).sqrt() as u64).saturating_add(1);
    let g = group.generator();
    let mut baby = HashMap::with_capacity(step as usize);
    let mut acc = group.identity();
    for j in 0..step {
        baby.entry(acc.clone()).or_insert(j);
        acc = group.mul(&acc, &g);
    }
    // acc = g^step; walk y · g^(-step·i).
    let giant = group.inv(&acc);
    let mut gamma = y.clone();
    for i in 0..=step {
        if let Some(&j) = baby.get(&gamma) {
            let m = i * step + j;
            return (m <= max).then_some(m);
        }
        gamma = group.mul(&gamma, &giant);
    }
    None
}
