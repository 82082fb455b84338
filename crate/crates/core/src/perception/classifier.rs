use alloc::vec;
use alloc::vec::Vec;

use super::Label;

/// Hinge-loss training knobs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    /// L2 regularization strength (also sets the step schedule `1 / (lambda t)`).
    pub lambda: f64,
    pub iterations: usize,
    /// Reweight the two classes to equal total mass.
    pub balanced: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { lambda: 0.01, iterations: 60, balanced: true }
    }
}

/// Weights followed by a bias term: `len == dim + 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct LinearModel {
    pub weights: Vec<f64>,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn bias(&self) -> f64 {
        self.weights[self.dim()]
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let (w, b) = self.weights.split_at(self.dim());
        crate::corpus::dot(w, x) + b[0]
    }

    /// Sign of the score; an exact zero counts as positive.
    pub fn decide(&self, x: &[f64]) -> Label {
        if self.score(x) >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// Euclidean distance from `x` to the decision hyperplane.
    pub fn margin(&self, x: &[f64]) -> f64 {
        let w = &self.weights[..self.dim()];
        let norm = libm::sqrt(crate::corpus::dot(w, w));
        if norm == 0.0 {
            // Degenerate hyperplane: every point is equally uncertain.
            return 0.0;
        }
        libm::fabs(self.score(x)) / norm
    }
}

/// Deterministic full-batch subgradient descent on the L2-regularized hinge
/// loss, with the `1 / (lambda t)` step schedule and projection onto the
/// `1 / sqrt(lambda)` ball. The bias is an extra constant feature.
///
/// Returns `None` unless both classes are present. The result depends only on
/// the multiset of examples and their order; callers pass them sorted by
/// region so that training is a pure function of the label set.
pub fn train_linear<'a, I>(examples: I, dim: usize, config: &TrainConfig) -> Option<LinearModel>
where
    I: IntoIterator<Item = (&'a [f64], Label)>,
{
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (x, y) in examples {
        debug_assert_eq!(x.len(), dim);
        xs.extend_from_slice(x);
        xs.push(1.0);
        ys.push(y.sign());
    }
    let n = ys.len();
    let n_pos = ys.iter().filter(|&&y| y > 0.0).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let stride = dim + 1;
    let (c_pos, c_neg) = if config.balanced {
        (n as f64 / (2.0 * n_pos as f64), n as f64 / (2.0 * n_neg as f64))
    } else {
        (1.0, 1.0)
    };
    let weight_of = |y: f64| if y > 0.0 { c_pos } else { c_neg };

    let lambda = config.lambda;
    let radius = 1.0 / libm::sqrt(lambda);
    let mut w = vec![0.0; stride];
    let mut step = vec![0.0; stride];
    for t in 1..=config.iterations.max(1) {
        let eta = 1.0 / (lambda * t as f64);
        step.iter_mut().for_each(|s| *s = 0.0);
        for (x, &y) in xs.chunks_exact(stride).zip(&ys) {
            let margin = y * crate::corpus::dot(&w, x);
            if margin < 1.0 {
                let c = weight_of(y) * y;
                step.iter_mut().zip(x).for_each(|(s, xi)| *s += c * xi);
            }
        }
        let shrink = 1.0 - eta * lambda;
        let scale = eta / n as f64;
        w.iter_mut().zip(&step).for_each(|(wi, si)| *wi = shrink * *wi + scale * si);
        let norm = libm::sqrt(crate::corpus::dot(&w, &w));
        if norm > radius {
            let f = radius / norm;
            w.iter_mut().for_each(|wi| *wi *= f);
        }
    }
    Some(LinearModel { weights: w })
}
