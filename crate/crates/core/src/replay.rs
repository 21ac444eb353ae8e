//! Experience replay partitioned by proximity category. Sampling draws two
//! candidate batches, one from the partition matching the current situation
//! and one from the whole buffer, and the trainer keeps whichever element of
//! each pair carries the larger absolute TD error.

use crate::world::{Action, CategoryLabel};
use rand::Rng;
use std::fmt::Write as _;

/// Default ring capacity.
pub const DEFAULT_CAPACITY: usize = 500_000;

/// One transition, tagged with the proximity category it was collected in.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: Action,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
    pub label: CategoryLabel,
}

/// A pair of index batches drawn by [`LabeledBuffer::sample_pair_batch`].
/// Indices are slot numbers, valid until the next push.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub similar: Vec<usize>,
    pub random: Vec<usize>,
}

/// Ring buffer of experiences with per-label index partitions.
///
/// Slots are overwritten FIFO once the ring is full. Each slot tracks its
/// position inside its label partition so eviction stays O(1) via
/// swap_remove. `seq` carries a monotone push counter per slot; the
/// difference to the newest push is the slot's age.
#[derive(Debug, Clone)]
pub struct LabeledBuffer {
    capacity: usize,
    state_dim: usize,
    entries: Vec<Experience>,
    seq: Vec<u64>,
    /// Slot indices per category, in no particular order.
    by_label: [Vec<usize>; 4],
    /// Position of each slot inside its label partition.
    pos_in_label: Vec<usize>,
    /// Next slot to overwrite once `entries` has reached capacity.
    head: usize,
    pushed: u64,
}

impl LabeledBuffer {
    pub fn new(capacity: usize, state_dim: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        assert!(state_dim > 0, "state dimension must be positive");
        LabeledBuffer {
            capacity,
            state_dim,
            entries: Vec::new(),
            seq: Vec::new(),
            by_label: Default::default(),
            pos_in_label: Vec::new(),
            head: 0,
            pushed: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total pushes over the buffer's lifetime, evicted ones included.
    pub fn total_pushed(&self) -> u64 {
        self.pushed
    }

    pub fn label_len(&self, label: CategoryLabel) -> usize {
        self.by_label[label.index()].len()
    }

    pub fn get(&self, slot: usize) -> &Experience {
        &self.entries[slot]
    }

    /// Pushes ago that `slot` was written; 0 is the newest entry.
    pub fn age(&self, slot: usize) -> u64 {
        self.pushed - 1 - self.seq[slot]
    }

    pub fn push(&mut self, exp: Experience) {
        assert_eq!(exp.state.len(), self.state_dim, "state dimension mismatch");
        assert_eq!(
            exp.next_state.len(),
            self.state_dim,
            "next-state dimension mismatch"
        );
        let slot = if self.entries.len() < self.capacity {
            self.entries.push(exp);
            self.seq.push(self.pushed);
            self.pos_in_label.push(usize::MAX);
            self.entries.len() - 1
        } else {
            let slot = self.head;
            self.head = (self.head + 1) % self.capacity;
            self.unlink(slot);
            self.entries[slot] = exp;
            self.seq[slot] = self.pushed;
            slot
        };
        let list = &mut self.by_label[self.entries[slot].label.index()];
        self.pos_in_label[slot] = list.len();
        list.push(slot);
        self.pushed += 1;
    }

    /// Remove `slot` from its label partition before overwriting it.
    fn unlink(&mut self, slot: usize) {
        let label = self.entries[slot].label.index();
        let pos = self.pos_in_label[slot];
        let list = &mut self.by_label[label];
        list.swap_remove(pos);
        if let Some(&moved) = list.get(pos) {
            self.pos_in_label[moved] = pos;
        }
    }

    /// Uniform with-replacement draw of `batch` slot indices from the whole
    /// buffer. `None` until the buffer holds at least `batch` entries.
    pub fn sample_batch<R: Rng>(&self, batch: usize, rng: &mut R) -> Option<Vec<usize>> {
        if self.entries.len() < batch {
            return None;
        }
        Some(
            (0..batch)
                .map(|_| rng.gen_range(0..self.entries.len()))
                .collect(),
        )
    }

    /// Draw the two candidate batches: `similar` uniformly from the
    /// `current_label` partition (falling back to the whole buffer while
    /// that partition is empty) and `random` uniformly from the whole
    /// buffer regardless of label.
    pub fn sample_pair_batch<R: Rng>(
        &self,
        current_label: CategoryLabel,
        batch: usize,
        rng: &mut R,
    ) -> Option<PairBatch> {
        if self.entries.len() < batch {
            return None;
        }
        let partition = &self.by_label[current_label.index()];
        let similar = if partition.is_empty() {
            (0..batch)
                .map(|_| rng.gen_range(0..self.entries.len()))
                .collect()
        } else {
            (0..batch)
                .map(|_| partition[rng.gen_range(0..partition.len())])
                .collect()
        };
        let random = (0..batch)
            .map(|_| rng.gen_range(0..self.entries.len()))
            .collect();
        Some(PairBatch { similar, random })
    }

    /// Check the partition bookkeeping: the label lists must tile the live
    /// slots exactly, and every back-pointer must agree. Used by the fuzz
    /// tests and the self-test command.
    pub fn validate_partitions(&self) -> Result<(), String> {
        let mut seen = vec![false; self.entries.len()];
        let mut total = 0;
        for (li, list) in self.by_label.iter().enumerate() {
            total += list.len();
            for (pos, &slot) in list.iter().enumerate() {
                if slot >= self.entries.len() {
                    return Err(format!("label {li} holds stale slot {slot}"));
                }
                if self.entries[slot].label.index() != li {
                    return Err(format!(
                        "slot {slot} labelled {:?} but listed under partition {li}",
                        self.entries[slot].label
                    ));
                }
                if self.pos_in_label[slot] != pos {
                    return Err(format!(
                        "slot {slot} back-pointer {} disagrees with position {pos}",
                        self.pos_in_label[slot]
                    ));
                }
                if seen[slot] {
                    return Err(format!("slot {slot} appears in two partitions"));
                }
                seen[slot] = true;
            }
        }
        if total != self.entries.len() {
            return Err(format!(
                "partitions cover {total} slots, buffer holds {}",
                self.entries.len()
            ));
        }
        Ok(())
    }

    /// Structured diagnostics: per-label counts and age statistics plus a
    /// ten-bin age histogram over the live contents.
    pub fn stats_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "size = {}", self.len());
        let _ = writeln!(out, "capacity = {}", self.capacity);
        let _ = writeln!(out, "total_pushed = {}", self.pushed);
        for (li, list) in self.by_label.iter().enumerate() {
            let label = CategoryLabel::from_index(li).expect("partition index is a label");
            let _ = writeln!(out, "label_{label}_count = {}", list.len());
            if !list.is_empty() {
                let ages: Vec<u64> = list.iter().map(|&s| self.age(s)).collect();
                let oldest = ages.iter().max().unwrap();
                let newest = ages.iter().min().unwrap();
                let mean = ages.iter().sum::<u64>() as f64 / ages.len() as f64;
                let _ = writeln!(out, "label_{label}_age_newest = {newest}");
                let _ = writeln!(out, "label_{label}_age_oldest = {oldest}");
                let _ = writeln!(out, "label_{label}_age_mean = {mean:.1}");
            }
        }
        let mut bins = [0usize; 10];
        if !self.entries.is_empty() {
            let span = self.entries.len() as u64;
            for slot in 0..self.entries.len() {
                let bin = (self.age(slot) * 10 / span).min(9) as usize;
                bins[bin] += 1;
            }
        }
        for (i, b) in bins.iter().enumerate() {
            let _ = writeln!(out, "age_bin_{i} = {b}");
        }
        out
    }
}

/// Element-wise winner-take-all between the two candidate batches: keep the
/// entry whose TD error has the larger magnitude, preferring the similar
/// one on ties. Both TD slices are compared by absolute value, so callers
/// may pass raw or pre-folded errors.
pub fn select_by_td<T: Clone>(
    similar: &[T],
    random: &[T],
    td_similar: &[f64],
    td_random: &[f64],
) -> Vec<T> {
    assert_eq!(similar.len(), random.len(), "batch length mismatch");
    assert_eq!(similar.len(), td_similar.len(), "td length mismatch");
    assert_eq!(similar.len(), td_random.len(), "td length mismatch");
    similar
        .iter()
        .zip(random)
        .zip(td_similar.iter().zip(td_random))
        .map(|((s, r), (ds, dr))| {
            if ds.abs() >= dr.abs() {
                s.clone()
            } else {
                r.clone()
            }
        })
        .collect()
}

/// Same selection, but returning which side won (true = similar). Used by
/// diagnostics that track how often the contextual batch dominates.
pub fn selection_mask(td_similar: &[f64], td_random: &[f64]) -> Vec<bool> {
    assert_eq!(td_similar.len(), td_random.len(), "td length mismatch");
    td_similar
        .iter()
        .zip(td_random)
        .map(|(s, r)| s.abs() >= r.abs())
        .collect()
}
