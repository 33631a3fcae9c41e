//! Minimal non-negative solutions of `a . x = b . y`.

use crate::error::{Error, Result};

/// Default cap on the number of basis vectors.
pub const BASIS_CAP: usize = 10_000;

/// Minimal solutions as vectors `[x_1..x_m, y_1..y_n]`, by Contejean-Devie completion.
pub fn basis(a: &[u64], b: &[u64], cap: usize) -> Result<Vec<Vec<u64>>> {
    let m = a.len();
    let n = b.len();
    let coef: Vec<i64> = a.iter().map(|&x| x as i64).chain(b.iter().map(|&y| -(y as i64))).collect();
    let dim = m + n;
    let mut found: Vec<Vec<u64>> = Vec::new();
    let mut frontier: Vec<(Vec<u64>, i64)> = (0..dim)
        .map(|i| {
            let mut v = vec![0; dim];
            v[i] = 1;
            (v, coef[i])
        })
        .collect();
    let mut steps = 0usize;
    while !frontier.is_empty() {
        let mut next: Vec<(Vec<u64>, i64)> = Vec::new();
        for (v, d) in frontier {
            if d == 0 {
                if !found.iter().any(|s| leq(s, &v)) {
                    found.push(v);
                    if found.len() > cap {
                        return Err(Error::SolverLimit(format!("more than {cap} Diophantine basis vectors")));
                    }
                }
                continue;
            }
            if found.iter().any(|s| leq(s, &v)) {
                continue;
            }
            // move the defect towards zero
            for (i, &c) in coef.iter().enumerate() {
                if (d < 0 && c > 0) || (d > 0 && c < 0) {
                    let mut w = v.clone();
                    w[i] += 1;
                    if !found.iter().any(|s| leq(s, &w)) {
                        next.push((w, d + c));
                    }
                }
            }
        }
        next.sort();
        next.dedup();
        steps += next.len();
        if steps > cap * 100 {
            return Err(Error::SolverLimit("Diophantine completion exceeded its step budget".into()));
        }
        frontier = next;
    }
    found.sort();
    Ok(found)
}

fn leq(s: &[u64], v: &[u64]) -> bool {
    s.iter().zip(v).all(|(a, b)| a <= b)
}
