use crate::error::{Error, Result};
use crate::tensor::{Matrix, Rng};

/// One `(s, a, r, s', d)` tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub r: f64,
    pub s_next: Vec<f64>,
    /// True terminal; time-limit truncations are stored as `false`.
    pub done: bool,
}

/// A sampled minibatch in matrix form, one row per transition.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub s: Matrix,
    pub a: Matrix,
    pub r: Vec<f64>,
    pub s_next: Matrix,
    /// `1.0` for terminal transitions, else `0.0`.
    pub done: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn from_transitions(items: &[&Transition]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::contract("batch must not be empty"))?;
        let (no, na) = (first.s.len(), first.a.len());
        let n = items.len();
        let mut batch = Batch {
            s: Matrix::zeros(n, no),
            a: Matrix::zeros(n, na),
            r: Vec::with_capacity(n),
            s_next: Matrix::zeros(n, no),
            done: Vec::with_capacity(n),
        };
        for (i, t) in items.iter().enumerate() {
            if t.s.len() != no || t.s_next.len() != no || t.a.len() != na {
                return Err(Error::shape("batch", format!("transition {i} has inconsistent widths")));
            }
            batch.s.row_mut(i).copy_from_slice(&t.s);
            batch.a.row_mut(i).copy_from_slice(&t.a);
            batch.s_next.row_mut(i).copy_from_slice(&t.s_next);
            batch.r.push(t.r);
            batch.done.push(if t.done { 1.0 } else { 0.0 });
        }
        Ok(batch)
    }
}

/// Fixed-capacity ring; once full, each push overwrites the oldest entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        }
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
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Stored transitions, oldest first.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity { 0 } else { self.cursor };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// Uniform sample with replacement.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Batch> {
        if self.items.is_empty() || n == 0 {
            return Err(Error::NotReady {
                have: self.items.len(),
                need: n.max(1),
            });
        }
        let picks: Vec<&Transition> = (0..n).map(|_| &self.items[rng.below(self.items.len())]).collect();
        Batch::from_transitions(&picks)
    }
}
