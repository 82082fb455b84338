use alloc::vec::Vec;

use super::PredicateModel;
use crate::corpus::{dot, Corpus, RegionIdx};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DensityConfig {
    pub k: usize,
    /// Average cosine distances against at most this many evenly strided
    /// reference regions. `None` uses the whole corpus.
    pub sample_cap: Option<usize>,
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self { k: 10, sample_cap: None }
    }
}

/// Precomputed feature-space neighborhood statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityIndex {
    avg_cosine_distance: Vec<f64>,
    neighbors: Vec<Vec<RegionIdx>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityStats {
    pub avg_cosine_distance: f64,
    pub knn_unlabeled_fraction: f64,
}

fn cosine_distance(a: &[f64], na: f64, b: &[f64], nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot(a, b) / (na * nb)).clamp(0.0, 2.0)
}

impl DensityIndex {
    pub fn build(corpus: &Corpus, config: &DensityConfig) -> Self {
        let n = corpus.len();
        let norms: Vec<f64> = corpus.regions().iter().map(|r| libm::sqrt(dot(&r.features, &r.features))).collect();
        let stride = match config.sample_cap {
            Some(cap) if cap > 0 && n > cap => n.div_ceil(cap),
            _ => 1,
        };
        let reference: Vec<usize> = (0..n).step_by(stride).collect();

        let mut avg = Vec::with_capacity(n);
        let mut neighbors = Vec::with_capacity(n);
        let mut dists: Vec<(f64, usize)> = Vec::with_capacity(n);
        for i in 0..n {
            let xi = &corpus.regions()[i].features;
            let (sum, count) = reference
                .iter()
                .filter(|&&j| j != i)
                .fold((0.0, 0usize), |(s, c), &j| {
                    (s + cosine_distance(xi, norms[i], &corpus.regions()[j].features, norms[j]), c + 1)
                });
            avg.push(if count == 0 { 0.0 } else { sum / count as f64 });

            dists.clear();
            for j in (0..n).filter(|&j| j != i) {
                let xj = &corpus.regions()[j].features;
                let d2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
                dists.push((d2, j));
            }
            let k = config.k.min(dists.len());
            if k > 0 {
                dists.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut nearest: Vec<(f64, usize)> = dists[..k].to_vec();
                nearest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                neighbors.push(nearest.into_iter().map(|(_, j)| RegionIdx(j as u32)).collect());
            } else {
                neighbors.push(Vec::new());
            }
        }
        Self { avg_cosine_distance: avg, neighbors }
    }

    pub fn len(&self) -> usize {
        self.avg_cosine_distance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.avg_cosine_distance.is_empty()
    }

    pub fn avg_cosine_distance(&self, region: RegionIdx) -> Result<f64> {
        self.avg_cosine_distance
            .get(region.get())
            .copied()
            .ok_or(Error::UnknownRegion(region.0 as u64))
    }

    pub fn neighbors(&self, region: RegionIdx) -> Result<&[RegionIdx]> {
        self.neighbors
            .get(region.get())
            .map(Vec::as_slice)
            .ok_or(Error::UnknownRegion(region.0 as u64))
    }

    /// Density statistics with an arbitrary notion of "labeled".
    pub fn stats_with(&self, region: RegionIdx, is_labeled: impl Fn(RegionIdx) -> bool) -> Result<DensityStats> {
        let avg_cosine_distance = self.avg_cosine_distance(region)?;
        let nn = self.neighbors(region)?;
        let knn_unlabeled_fraction = if nn.is_empty() {
            1.0
        } else {
            nn.iter().filter(|&&r| !is_labeled(r)).count() as f64 / nn.len() as f64
        };
        Ok(DensityStats { avg_cosine_distance, knn_unlabeled_fraction })
    }
}

/// Average cosine distance of `region` and the share of its nearest
/// neighbors that carry no label in `model`.
pub fn density_stats(index: &DensityIndex, region: RegionIdx, model: Option<&PredicateModel>) -> Result<DensityStats> {
    index.stats_with(region, |r| model.is_some_and(|m| m.has_label(r)))
}
