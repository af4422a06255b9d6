use std::cell::Cell;

use crate::error::{Error, Result};

/// Complete binary tree of partial sums over nonnegative leaf weights.
///
/// Nodes are stored 1-indexed: node `k` has children `2k` and `2k + 1`, and
/// the leaves occupy `cap..2cap` where `cap` is `n` rounded up to a power of two.
/// Sampling follows the half-open prefix rule: it returns the `i` with
/// `prefix(i) ≤ u·total < prefix(i + 1)`, so exact boundary hits go right.
#[derive(Debug, Clone)]
pub struct SumTree {
    n: usize,
    cap: usize,
    nodes: Vec<f64>,
    touches: Cell<u64>,
}

impl SumTree {
    /// Builds the tree bottom-up in `O(n)`.
    pub fn build(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(i) = weights.iter().position(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} = {} is not a finite nonnegative number",
                weights[i]
            )));
        }
        let cap = weights.len().next_power_of_two();
        let mut nodes = vec![0.0; 2 * cap];
        nodes[cap..cap + weights.len()].copy_from_slice(weights);
        for k in (1..cap).rev() {
            nodes[k] = nodes[2 * k] + nodes[2 * k + 1];
        }
        Ok(Self {
            n: weights.len(),
            cap,
            nodes,
            touches: Cell::new(0),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn weight(&self, i: usize) -> f64 {
        assert!(i < self.n, "leaf {i} out of range for {} leaves", self.n);
        self.nodes[self.cap + i]
    }

    /// Sets leaf `i` and recomputes each ancestor from its two children.
    pub fn update(&mut self, i: usize, weight: f64) -> Result<()> {
        assert!(i < self.n, "leaf {i} out of range for {} leaves", self.n);
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight {weight} is not a finite nonnegative number"
            )));
        }
        let mut k = self.cap + i;
        self.nodes[k] = weight;
        let mut touched = 1;
        while k > 1 {
            k /= 2;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
            touched += 2;
        }
        self.touches.set(self.touches.get() + touched);
        Ok(())
    }

    /// Index for the uniform variate `u ∈ [0, 1)`.
    ///
    /// Never returns a zero-weight leaf: if rounding pushes the target past
    /// the mass of a subtree, the descent stays in the side that has mass.
    pub fn sample(&self, u: f64) -> Result<usize> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::VariateOutOfRange(u));
        }
        let total = self.total();
        if !(total > 0.0) {
            return Err(Error::NoSamplingMass);
        }
        let mut target = u * total;
        let mut k = 1;
        let mut touched = 1;
        while k < self.cap {
            let left = self.nodes[2 * k];
            let right = self.nodes[2 * k + 1];
            touched += 2;
            if (target < left || right == 0.0) && left > 0.0 {
                k *= 2;
            } else {
                target -= left;
                k = 2 * k + 1;
            }
        }
        self.touches.set(self.touches.get() + touched);
        Ok(k - self.cap)
    }

    /// Nodes read or written since construction or the last reset.
    pub fn touches(&self) -> u64 {
        self.touches.get()
    }

    pub fn reset_touches(&self) {
        self.touches.set(0);
    }

    /// Largest deviation of an internal node from the sum of its children.
    pub fn max_internal_error(&self) -> f64 {
        (1..self.cap)
            .map(|k| (self.nodes[k] - self.nodes[2 * k] - self.nodes[2 * k + 1]).abs())
            .fold(0.0, f64::max)
    }
}

/// Linear prefix-scan sampler with the same contract as [`SumTree::sample`].
pub fn linear_scan_sample(weights: &[f64], u: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::VariateOutOfRange(u));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoSamplingMass);
    }
    let target = u * total;
    let mut cum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 && target < cum + w {
            return Ok(i);
        }
        cum += w;
    }
    Ok(weights
        .iter()
        .rposition(|&w| w > 0.0)
        .expect("positive total"))
}
