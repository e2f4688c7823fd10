//! Factorial and binomial helpers in log space.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

/// `ln(k!)` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

pub fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

pub fn ln_binomial(table: &[f64], n: usize, k: usize) -> f64 {
    table[n] - table[k] - table[n - k]
}

/// `k * ln(x)` with the convention `0 * ln(0) = 0`.
pub fn ln_pow(ln_x: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * ln_x
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
