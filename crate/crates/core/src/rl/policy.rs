//! Epsilon-greedy action selection over masked Q-values.

use rand::Rng;

use crate::error::{Error, Result};

use super::QNetwork;

/// Index of the best legal action; ties break toward the lowest index so
/// selection is deterministic.
pub fn greedy_action(q: &[f64], legal: &[bool]) -> Result<usize> {
    if q.len() != legal.len() {
        return Err(Error::DimensionMismatch(format!(
            "mask covers {} actions, q has {}",
            legal.len(),
            q.len()
        )));
    }
    let mut best: Option<usize> = None;
    for (i, (&value, &ok)) in q.iter().zip(legal).enumerate() {
        if !ok {
            continue;
        }
        if !value.is_finite() {
            return Err(Error::TrainingFault(format!("non-finite q-value {value}")));
        }
        if best.map_or(true, |b| value > q[b]) {
            best = Some(i);
        }
    }
    best.ok_or_else(|| Error::EnvUsage("no legal action to choose from".into()))
}

/// Greedy with probability `exploit`, otherwise uniform over the legal
/// actions.
pub fn select_action<R: Rng + ?Sized>(
    net: &QNetwork,
    state: &[f64],
    legal: &[bool],
    exploit: f64,
    rng: &mut R,
) -> Result<usize> {
    if !(0.0..=1.0).contains(&exploit) {
        return Err(Error::InvalidHyperparam(format!(
            "exploit probability must lie in [0, 1], got {exploit}"
        )));
    }
    if rng.gen::<f64>() < exploit {
        let q = net.forward(state)?;
        greedy_action(&q, legal)
    } else {
        let candidates: Vec<usize> = (0..legal.len()).filter(|&i| legal[i]).collect();
        if candidates.is_empty() {
            return Err(Error::EnvUsage("no legal action to choose from".into()));
        }
        Ok(candidates[rng.gen_range(0..candidates.len())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_respects_the_mask_and_breaks_ties_low() {
        let q = [1.0, 5.0, 5.0, 0.0];
        assert_eq!(greedy_action(&q, &[true; 4]).unwrap(), 1);
        assert_eq!(greedy_action(&q, &[true, false, true, true]).unwrap(), 2);
        assert_eq!(greedy_action(&q, &[true, false, false, true]).unwrap(), 0);
        assert!(greedy_action(&q, &[false; 4]).is_err());
        assert!(greedy_action(&q, &[true; 3]).is_err());
        assert!(greedy_action(&[f64::NAN, 0.0], &[true, true]).is_err());
    }

    #[test]
    fn exploit_one_always_acts_greedily() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = QNetwork::new(2, 3, &[4], &mut rng).unwrap();
        let state = [0.4, -0.2];
        let q = net.forward(&state).unwrap();
        let want = greedy_action(&q, &[true; 3]).unwrap();
        for _ in 0..50 {
            let got = select_action(&net, &state, &[true; 3], 1.0, &mut rng).unwrap();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn exploit_zero_explores_uniformly_over_legal_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = QNetwork::new(2, 4, &[4], &mut rng).unwrap();
        let state = [0.0, 1.0];
        let legal = [true, false, true, true];
        let mut counts = [0u32; 4];
        let draws = 6000;
        for _ in 0..draws {
            counts[select_action(&net, &state, &legal, 0.0, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[1], 0, "masked action must never be chosen");
        for (i, &count) in counts.iter().enumerate() {
            if legal[i] {
                assert!(
                    (1700..=2300).contains(&count),
                    "action {i} drawn {count}, expected near 2000"
                );
            }
        }
    }

    #[test]
    fn intermediate_exploit_mixes_both_behaviors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = QNetwork::new(2, 3, &[4], &mut rng).unwrap();
        let state = [0.3, 0.3];
        let q = net.forward(&state).unwrap();
        let greedy = greedy_action(&q, &[true; 3]).unwrap();
        let mut greedy_hits = 0u32;
        let draws = 9000;
        for _ in 0..draws {
            if select_action(&net, &state, &[true; 3], 0.7, &mut rng).unwrap() == greedy {
                greedy_hits += 1;
            }
        }
        // Expect 0.7 + 0.3/3 = 0.8 of draws on the greedy action.
        let rate = greedy_hits as f64 / draws as f64;
        assert!((rate - 0.8).abs() < 0.03, "greedy rate {rate}");
    }

    #[test]
    fn rejects_out_of_range_exploit() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let net = QNetwork::new(2, 3, &[4], &mut rng).unwrap();
        assert!(select_action(&net, &[0.0, 0.0], &[true; 3], 1.2, &mut rng).is_err());
        assert!(select_action(&net, &[0.0, 0.0], &[true; 3], -0.1, &mut rng).is_err());
    }
}
