use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;

use crate::rng::Rng;
use crate::{Error, Result};

/// One `(s, a, r, s', done)` sample. `done` marks true termination only.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// FIFO replay memory with seeded uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
    rng: Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("replay capacity must be positive"));
        }
        Ok(Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
            rng: Rng::seed_from_u64(seed),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    /// Indices of `min(batch_size, len)` distinct stored transitions.
    pub fn sample_indices(&mut self, batch_size: usize) -> Result<Vec<usize>> {
        if self.items.is_empty() || batch_size == 0 {
            return Err(Error::InsufficientData {
                requested: batch_size,
                available: self.items.len(),
            });
        }
        let n = batch_size.min(self.items.len());
        Ok(index::sample(&mut self.rng, self.items.len(), n).into_vec())
    }

    pub fn sample(&mut self, batch_size: usize) -> Result<Vec<Transition>> {
        let idx = self.sample_indices(batch_size)?;
        Ok(idx.into_iter().map(|i| self.items[i].clone()).collect())
    }
}
