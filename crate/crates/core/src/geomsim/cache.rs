use rand::{Rng, RngExt};

use crate::error::{Error, Result};
use crate::specfun::sum::compensated_sum;

/// Contents of one helper-node cache: exactly `capacity` slots, each either a
/// real file id (`< n_files`) or a dummy filler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheDraw {
    pub files: Vec<usize>,
    pub dummies: usize,
}

impl CacheDraw {
    pub fn len(&self) -> usize {
        self.files.len() + self.dummies
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, file: usize) -> bool {
        self.files.binary_search(&file).is_ok()
    }
}

/// Systematic sampling: the weights are laid end to end on a circle of
/// length `capacity` (the deficit `capacity − Σp` filled with dummy arcs of
/// length ≤ 1) and the arcs hit by `U, U+1, …, U+capacity−1` are selected.
/// Each arc is shorter than the stride, so no id is picked twice and file `n`
/// is included with probability exactly `p_n`.
pub fn sample_cache<R: Rng + ?Sized>(p: &[f64], capacity: usize, rng: &mut R) -> Result<CacheDraw> {
    if let Some(bad) = p.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::Domain(format!("cache weight p[{bad}] = {} outside [0, 1]", p[bad])));
    }
    let total = compensated_sum(p.iter().copied());
    let m = capacity as f64;
    if total > m * (1.0 + 1e-12) + 1e-9 {
        return Err(Error::Domain(format!("cache weights sum to {total}, above capacity {capacity}")));
    }
    let u: f64 = rng.random();
    let mut files = Vec::with_capacity(capacity);
    let mut next = 0usize;
    let mut upper = 0.0;
    for (id, &w) in p.iter().enumerate() {
        upper += w;
        while next < capacity && (next as f64 + u) < upper {
            files.push(id);
            next += 1;
        }
    }
    // Rounding can leave a repeated id when Σp ≈ capacity; the tail slot
    // then belongs to the last arc, which is a dummy or already selected.
    files.dedup();
    let dummies = capacity - files.len();
    Ok(CacheDraw { files, dummies })
}
