use std::collections::BTreeSet;

use super::{Caps, RowConfiguration};
use crate::error::{Error, Result};
use crate::matrix::TransitionMatrix;

/// `F_n(root)` by generating valid labelings row by row.
///
/// Row `m + 1` of a labeling only depends on row `m`, so distinct row
/// configurations are kept per level and each is expanded by every choice of
/// `k` allowed followers per site. The number of generated child rows is
/// bounded by `caps.leaf_budget`.
pub fn enumerate_labelings_naive(
    a: &TransitionMatrix,
    k: usize,
    n: u32,
    root: usize,
    caps: &Caps,
) -> Result<BTreeSet<RowConfiguration>> {
    if k == 0 {
        return Err(Error::Precondition("tree dimension k must be at least 1".into()));
    }
    if root >= a.d() {
        return Err(Error::Precondition(format!("root symbol must lie in 1..{}", a.d())));
    }
    let d = a.d() as u64;
    let followers: Vec<Vec<u64>> = a
        .rows()
        .iter()
        .map(|r| r.iter().map(|s| s as u64).collect())
        .collect();
    let mut width = 1usize;
    let mut level: BTreeSet<u64> = BTreeSet::from([root as u64]);
    let mut generated = 0u64;
    for _ in 0..n {
        let child_width = width * k;
        if (d as f64).powi(child_width as i32) > u64::MAX as f64 {
            return Err(Error::capacity("leaves", caps.leaf_budget, u64::MAX));
        }
        let mut next = BTreeSet::new();
        let mut parent = vec![0usize; width];
        for &config in &level {
            let mut rest = config;
            for slot in parent.iter_mut().rev() {
                *slot = (rest % d) as usize;
                rest /= d;
            }
            let choices: Vec<&[u64]> = parent
                .iter()
                .flat_map(|&p| std::iter::repeat_n(followers[p].as_slice(), k))
                .collect();
            if choices.iter().any(|c| c.is_empty()) {
                continue;
            }
            let mut odometer = vec![0usize; child_width];
            loop {
                generated += 1;
                if generated > caps.leaf_budget {
                    return Err(Error::capacity("leaves", caps.leaf_budget, generated));
                }
                let index = odometer
                    .iter()
                    .zip(&choices)
                    .fold(0u64, |acc, (&o, c)| acc * d + c[o]);
                next.insert(index);
                let mut pos = child_width;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    odometer[pos] += 1;
                    if odometer[pos] < choices[pos].len() {
                        break;
                    }
                    odometer[pos] = 0;
                }
                if pos == 0 && odometer[0] == 0 {
                    break;
                }
            }
        }
        level = next;
        width = child_width;
    }
    Ok(level
        .into_iter()
        .map(|idx| RowConfiguration::from_index(a.d(), width, idx))
        .collect())
}
