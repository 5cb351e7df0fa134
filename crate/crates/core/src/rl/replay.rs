//! Bounded experience replay with uniform sampling.

use rand::Rng;

use crate::error::{Error, Result};

/// One environment transition. States are flat encoded vectors so the
/// pool is independent of any particular environment.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
    /// Which actions the next state admits; `None` means all of them.
    /// Bootstrapping maxes over this set so untrained Q-values of masked
    /// actions cannot leak into targets.
    pub next_legal: Option<Vec<bool>>,
}

/// Fixed-capacity ring buffer of transitions.
pub struct ReplayPool {
    buf: Vec<Transition>,
    capacity: usize,
    write: usize,
    state_dim: Option<usize>,
}

impl ReplayPool {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidHyperparam(
                "replay capacity must be positive".into(),
            ));
        }
        Ok(ReplayPool {
            buf: Vec::with_capacity(capacity.min(4096)),
            capacity,
            write: 0,
            state_dim: None,
        })
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Appends a transition, evicting the oldest once full.
    pub fn push(&mut self, t: Transition) -> Result<()> {
        if !t.reward.is_finite() {
            return Err(Error::TrainingFault(format!(
                "non-finite reward {} pushed to replay",
                t.reward
            )));
        }
        if t.state.len() != t.next_state.len() {
            return Err(Error::DimensionMismatch(format!(
                "transition state dims disagree: {} vs {}",
                t.state.len(),
                t.next_state.len()
            )));
        }
        match self.state_dim {
            None => self.state_dim = Some(t.state.len()),
            Some(dim) if dim != t.state.len() => {
                return Err(Error::DimensionMismatch(format!(
                    "pool holds {dim}-dim states, transition has {}",
                    t.state.len()
                )));
            }
            Some(_) => {}
        }
        if self.buf.len() < self.capacity {
            self.buf.push(t);
        } else {
            self.buf[self.write] = t;
        }
        self.write = (self.write + 1) % self.capacity;
        Ok(())
    }

    /// Uniform sample of `count` distinct transitions, or None until the
    /// pool holds that many.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Option<Vec<Transition>> {
        if count == 0 || self.buf.len() < count {
            return None;
        }
        // Floyd's subset sampling: uniform without replacement, O(count).
        let n = self.buf.len();
        let mut picks: Vec<usize> = Vec::with_capacity(count);
        for i in (n - count)..n {
            let j = rng.gen_range(0..=i);
            if picks.contains(&j) {
                picks.push(i);
            } else {
                picks.push(j);
            }
        }
        Some(picks.into_iter().map(|i| self.buf[i].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(tag: f64) -> Transition {
        Transition {
            state: vec![tag, 0.0],
            action: 0,
            reward: tag,
            next_state: vec![tag, 1.0],
            terminal: false,
            next_legal: None,
        }
    }

    #[test]
    fn rejects_zero_capacity_and_bad_transitions() {
        assert!(ReplayPool::new(0).is_err());
        let mut pool = ReplayPool::new(4).unwrap();
        let mut bad = transition(1.0);
        bad.reward = f64::NAN;
        assert!(pool.push(bad).is_err());
        let mut bad = transition(1.0);
        bad.next_state = vec![0.0];
        assert!(pool.push(bad).is_err());
        pool.push(transition(1.0)).unwrap();
        let mut bad = transition(2.0);
        bad.state = vec![0.0; 3];
        bad.next_state = vec![0.0; 3];
        assert!(pool.push(bad).is_err(), "dim change after first push");
    }

    #[test]
    fn evicts_oldest_first_at_capacity() {
        let mut pool = ReplayPool::new(3).unwrap();
        for tag in 0..5 {
            pool.push(transition(tag as f64)).unwrap();
        }
        assert_eq!(pool.len(), 3);
        let mut rewards: Vec<f64> = pool.buf.iter().map(|t| t.reward).collect();
        rewards.sort_by(f64::total_cmp);
        assert_eq!(rewards, vec![2.0, 3.0, 4.0], "tags 0 and 1 evicted");
    }

    #[test]
    fn sample_needs_enough_transitions() {
        let mut pool = ReplayPool::new(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(pool.sample(1, &mut rng).is_none());
        for tag in 0..4 {
            pool.push(transition(tag as f64)).unwrap();
        }
        assert!(pool.sample(5, &mut rng).is_none());
        assert_eq!(pool.sample(4, &mut rng).unwrap().len(), 4);
        assert!(pool.sample(0, &mut rng).is_none());
    }

    #[test]
    fn samples_are_distinct_and_roughly_uniform() {
        let mut pool = ReplayPool::new(64).unwrap();
        for tag in 0..64 {
            pool.push(transition(tag as f64)).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0u32; 64];
        let draws = 4000;
        for _ in 0..draws {
            let batch = pool.sample(8, &mut rng).unwrap();
            let mut seen: Vec<f64> = batch.iter().map(|t| t.reward).collect();
            seen.sort_by(f64::total_cmp);
            seen.dedup();
            assert_eq!(seen.len(), 8, "sample must not repeat transitions");
            for t in &batch {
                counts[t.reward as usize] += 1;
            }
        }
        // Each slot is expected draws * 8 / 64 = 500 times.
        for (slot, &count) in counts.iter().enumerate() {
            assert!(
                (350..=650).contains(&count),
                "slot {slot} drawn {count} times, expected near 500"
            );
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let mut pool = ReplayPool::new(32).unwrap();
        for tag in 0..32 {
            pool.push(transition(tag as f64)).unwrap();
        }
        let a = pool.sample(6, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = pool.sample(6, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
