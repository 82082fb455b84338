use oal_core::harness::{EpisodeRecord, EpisodeRunner};
use rayon::prelude::*;

/// Runs a batch's episodes on the rayon pool. Records come back in episode
/// order, so results match [`oal_core::harness::Sequential`] exactly.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonRunner;

impl EpisodeRunner for RayonRunner {
    fn run(
        &self,
        count: usize,
        episode: &(dyn Fn(usize) -> oal_core::Result<EpisodeRecord> + Sync),
    ) -> oal_core::Result<Vec<EpisodeRecord>> {
        (0..count).into_par_iter().map(episode).collect()
    }
}
