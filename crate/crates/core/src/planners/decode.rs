//! Temperature + top-p (nucleus) token decoding.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Sampling controls. Temperature 0 short-circuits to argmax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeParams {
    /// ≥ 0; 0 selects greedily.
    pub temperature: f64,
    /// Nucleus mass in (0, 1].
    pub top_p: f64,
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            top_p: 0.75,
        }
    }
}

/// The nucleus for `logits` at temperature > 0: softmax probabilities
/// sorted descending (ties toward the lower index), cut to the smallest
/// prefix whose cumulative mass reaches `top_p`. Probabilities are the raw
/// softmax values, not renormalized.
pub fn nucleus(logits: &[f64], params: &DecodeParams) -> Vec<(usize, f64)> {
    debug_assert!(!logits.is_empty() && logits.iter().all(|l| l.is_finite()));
    debug_assert!(params.temperature > 0.0);
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits
        .iter()
        .map(|&l| ((l - max) / params.temperature).exp())
        .collect();
    let total: f64 = weights.iter().sum();

    let mut ranked: Vec<(usize, f64)> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (i, w / total))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut mass = 0.0;
    let mut cut = ranked.len();
    for (rank, &(_, prob)) in ranked.iter().enumerate() {
        mass += prob;
        if mass >= params.top_p {
            cut = rank + 1;
            break;
        }
    }
    ranked.truncate(cut);
    ranked
}

/// Selects a token index. Temperature 0 is exact argmax with ties broken
/// toward the lowest index; otherwise a token is drawn from the nucleus
/// with probabilities renormalized over it.
pub fn decode_token(logits: &[f64], params: &DecodeParams, rng: &mut impl Rng) -> usize {
    debug_assert!(!logits.is_empty() && logits.iter().all(|l| l.is_finite()));
    if params.temperature == 0.0 {
        let mut best = 0;
        for (i, &l) in logits.iter().enumerate() {
            if l > logits[best] {
                best = i;
            }
        }
        return best;
    }
    let nucleus = nucleus(logits, params);
    let total: f64 = nucleus.iter().map(|&(_, p)| p).sum();
    let mut u = rng.random::<f64>() * total;
    for &(index, prob) in &nucleus {
        u -= prob;
        if u <= 0.0 {
            return index;
        }
    }
    nucleus.last().expect("nucleus is never empty").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_temperature_is_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = DecodeParams::default();
        assert_eq!(decode_token(&[1.0, 3.0, 2.0], &params, &mut rng), 1);
        // Ties go to the lowest index.
        assert_eq!(decode_token(&[2.0, 5.0, 5.0], &params, &mut rng), 1);
    }

    #[test]
    fn uniform_logits_keep_three_of_four_at_three_quarters() {
        let params = DecodeParams {
            temperature: 1.0,
            top_p: 0.75,
        };
        let n = nucleus(&[0.5; 4], &params);
        assert_eq!(n.len(), 3);
        assert_eq!(n.iter().map(|&(i, _)| i).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn dominant_logit_always_wins() {
        let params = DecodeParams {
            temperature: 1.0,
            top_p: 0.5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            assert_eq!(decode_token(&[10.0, 0.0, 0.0], &params, &mut rng), 0);
        }
    }

    #[test]
    fn samples_stay_inside_the_nucleus() {
        let logits = [3.0, 2.0, 1.0, 0.0, -1.0];
        let params = DecodeParams {
            temperature: 0.8,
            top_p: 0.9,
        };
        let allowed: Vec<usize> = nucleus(&logits, &params).iter().map(|&(i, _)| i).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let pick = decode_token(&logits, &params, &mut rng);
            assert!(allowed.contains(&pick), "{pick} outside nucleus {allowed:?}");
        }
    }

    proptest! {
        #[test]
        fn greedy_matches_argmax(logits in proptest::collection::vec(-20.0f64..20.0, 1..30)) {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let pick = decode_token(&logits, &DecodeParams::default(), &mut rng);
            let argmax = logits
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .unwrap()
                .0;
            prop_assert_eq!(pick, argmax);
        }

        #[test]
        fn nucleus_is_minimal(
            logits in proptest::collection::vec(-10.0f64..10.0, 1..20),
            p in 0.05f64..1.0,
            t in 0.1f64..4.0,
        ) {
            let params = DecodeParams { temperature: t, top_p: p };
            let n = nucleus(&logits, &params);
            let mass: f64 = n.iter().map(|&(_, q)| q).sum();
            prop_assert!(mass >= p - 1e-12, "mass {mass} below {p}");
            if let Some(&(_, last)) = n.last() {
                if n.len() < logits.len() {
                    prop_assert!(mass - last < p, "prefix without its tail still reaches {p}");
                }
            }
        }
    }
}
