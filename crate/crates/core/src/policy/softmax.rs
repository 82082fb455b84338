//! Linear softmax policy and its REINFORCE update.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::features::{FeatureVector, NUM_FEATURES};
use crate::env::TranscriptEntry;
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// `pi(a | s) = exp(theta . f(s, a)) / sum_a' exp(theta . f(s, a'))`.
pub fn action_probabilities(theta: &[f64], beam: &[FeatureVector]) -> Vec<f64> {
    let logits: Vec<f64> = beam.iter().map(|f| f.dot(theta)).collect();
    softmax(&logits)
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| libm::exp(l - max)).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Inverse-CDF draw over beam positions.
pub fn sample_action(probs: &[f64], rng: &mut StreamRng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left the cumulative sum just under 1.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// `f(s, a_chosen) - E_pi[f(s, a)]`.
pub fn grad_log_prob(theta: &[f64], beam: &[FeatureVector], chosen: usize) -> [f64; NUM_FEATURES] {
    let probs = action_probabilities(theta, beam);
    let mut g = beam[chosen].0;
    for (f, p) in beam.iter().zip(&probs) {
        for (gi, fi) in g.iter_mut().zip(&f.0) {
            *gi -= p * fi;
        }
    }
    g
}

pub fn log_prob(theta: &[f64], beam: &[FeatureVector], chosen: usize) -> f64 {
    let logits: Vec<f64> = beam.iter().map(|f| f.dot(theta)).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + libm::log(logits.iter().map(|&l| libm::exp(l - max)).sum::<f64>());
    logits[chosen] - lse
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PolicyConfig {
    pub alpha: f64,
    /// Linear decay horizon in updates: `alpha * max(0, 1 - updates / horizon)`.
    pub decay_updates: Option<u64>,
    /// Subtract the running mean return.
    pub baseline: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self { alpha: 1e-3, decay_updates: None, baseline: false }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config("policy alpha must be finite and non-negative".into()));
        }
        if self.decay_updates == Some(0) {
            return Err(Error::Config("policy decay horizon must be positive".into()));
        }
        Ok(())
    }

    pub fn step_size(&self, updates: u64) -> f64 {
        match self.decay_updates {
            Some(h) => self.alpha * (1.0 - updates as f64 / h as f64).max(0.0),
            None => self.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolicyParams {
    pub theta: Vec<f64>,
    /// Running mean of every return seen by past updates.
    pub baseline_mean: f64,
    pub baseline_count: u64,
    /// Applied (non-empty) updates.
    pub updates: u64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self { theta: vec![0.0; NUM_FEATURES], baseline_mean: 0.0, baseline_count: 0, updates: 0 }
    }
}

/// Summary of one applied update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateReport {
    pub steps: usize,
    pub baseline: f64,
    pub step_size: f64,
    pub gradient_norm: f64,
}

/// `theta += alpha * sum_episodes sum_t (G_t - b) grad log pi(a_t | s_t)`.
/// `episodes` pairs each terminated transcript with its per-step returns.
/// Rejects the whole update, leaving `params` untouched, if it is not finite.
pub fn reinforce_update<'t, I>(params: &mut PolicyParams, config: &PolicyConfig, episodes: I) -> Result<UpdateReport>
where
    I: IntoIterator<Item = (&'t [TranscriptEntry], &'t [f64])>,
{
    let b = if config.baseline { params.baseline_mean } else { 0.0 };
    let mut grad = [0.0; NUM_FEATURES];
    let mut steps = 0usize;
    let mut returns_sum = 0.0;
    for (transcript, returns) in episodes {
        if transcript.len() != returns.len() {
            return Err(Error::Protocol(format!(
                "transcript of {} steps paired with {} returns",
                transcript.len(),
                returns.len()
            )));
        }
        for (entry, &g) in transcript.iter().zip(returns) {
            returns_sum += g;
            steps += 1;
            if entry.beam.is_empty() {
                return Err(Error::Protocol("transcript entry without beam features".into()));
            }
            let gl = grad_log_prob(&params.theta, &entry.beam, entry.chosen);
            for (acc, gi) in grad.iter_mut().zip(gl) {
                *acc += (g - b) * gi;
            }
        }
    }
    let step_size = config.step_size(params.updates);
    if steps == 0 {
        return Ok(UpdateReport { steps, baseline: b, step_size, gradient_norm: 0.0 });
    }
    let gradient_norm = libm::sqrt(grad.iter().map(|g| g * g).sum());
    let next: Vec<f64> = params.theta.iter().zip(&grad).map(|(t, g)| t + step_size * g).collect();
    if let Some(i) = next.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFiniteUpdate(format!(
            "theta[{i}] would become {} (step size {step_size}, gradient norm {gradient_norm}, {steps} steps)",
            next[i]
        )));
    }
    params.theta = next;
    params.updates += 1;
    let total = params.baseline_count + steps as u64;
    params.baseline_mean += (returns_sum - steps as f64 * params.baseline_mean) / total as f64;
    params.baseline_count = total;
    Ok(UpdateReport { steps, baseline: b, step_size, gradient_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Action;

    fn unit(i: usize) -> FeatureVector {
        let mut f = FeatureVector::default();
        f.0[i] = 1.0;
        f
    }

    #[test]
    fn uniform_at_zero() {
        let probs = action_probabilities(&[0.0; NUM_FEATURES], &[unit(0); 7]);
        for p in probs {
            assert!((p - 1.0 / 7.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_logits() {
        let p = softmax(&[1.0, 0.0]);
        let e = core::f64::consts::E;
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-12);
        assert!((p[1] - 1.0 / (e + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn huge_logits_stay_normalized() {
        let p = softmax(&[1000.0, -1000.0, 999.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_of_two_unit_actions() {
        let g = grad_log_prob(&[0.0; NUM_FEATURES], &[unit(0), unit(1)], 0);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[1], -0.5);
        assert!(g[2..].iter().all(|&x| x == 0.0));
        let g = grad_log_prob(&[0.3; NUM_FEATURES], &[unit(4)], 0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    fn entry(beam: Vec<FeatureVector>, chosen: usize, reward: f64) -> TranscriptEntry {
        TranscriptEntry { turn: 0, beam, chosen, action: Action::Guess, reward }
    }

    #[test]
    fn single_step_update() {
        let mut params = PolicyParams::default();
        let cfg = PolicyConfig::default();
        let t = [entry(vec![unit(0), unit(1)], 0, 200.0)];
        let g = [200.0];
        reinforce_update(&mut params, &cfg, [(&t[..], &g[..])]).unwrap();
        assert!((params.theta[0] - 200.0 * 1e-3 * 0.5).abs() < 1e-15);
        assert!((params.theta[1] + 200.0 * 1e-3 * 0.5).abs() < 1e-15);
        assert_eq!(params.updates, 1);
        assert_eq!(params.baseline_mean, 200.0);
    }

    #[test]
    fn empty_batch_is_a_no_op() {
        let mut params = PolicyParams::default();
        let before = params.clone();
        reinforce_update(&mut params, &PolicyConfig::default(), core::iter::empty()).unwrap();
        assert_eq!(params, before);
    }

    #[test]
    fn non_finite_update_rejected() {
        let mut params = PolicyParams::default();
        let cfg = PolicyConfig { alpha: 1e308, ..Default::default() };
        let mut big = unit(0);
        big.0[0] = 1e308;
        let t = [entry(vec![big, unit(1)], 0, 1e308)];
        let g = [1e308];
        let before = params.clone();
        assert!(matches!(
            reinforce_update(&mut params, &cfg, [(&t[..], &g[..])]),
            Err(Error::NonFiniteUpdate(_))
        ));
        assert_eq!(params, before);
    }

    #[test]
    fn linear_decay() {
        let cfg = PolicyConfig { alpha: 1.0, decay_updates: Some(4), baseline: false };
        assert_eq!(cfg.step_size(0), 1.0);
        assert_eq!(cfg.step_size(2), 0.5);
        assert_eq!(cfg.step_size(9), 0.0);
    }
}
