use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusConfig, CorpusKind, Split};
use crate::dsp::linspace;
use crate::error::{Error, Result};

/// What to simulate for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub offsets: Vec<f64>,
    pub duration: f64,
    pub glint_count: usize,
    pub gs_class: Option<usize>,
    pub split: Split,
    pub seed: u64,
}

/// Noise seed of sample `index` in a corpus seeded with `corpus_seed`
/// (SplitMix64 finalizer over the pair).
pub fn seed_for(corpus_seed: u64, index: usize) -> u64 {
    let mut z = corpus_seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `draws` sorted subsets of `k` points from `grid`, each prefixed by 0.
fn draw_offsets(rng: &mut ChaCha8Rng, grid: &[f64], k: usize, draws: usize) -> Vec<Vec<f64>> {
    (0..draws)
        .map(|_| {
            let mut picks: Vec<f64> = index::sample(rng, grid.len(), k).into_iter().map(|i| grid[i]).collect();
            picks.sort_by(f64::total_cmp);
            std::iter::once(0.0).chain(picks).collect()
        })
        .collect()
}

struct Builder<'a> {
    config: &'a CorpusConfig,
    plans: Vec<SamplePlan>,
}

impl Builder<'_> {
    fn push(&mut self, offsets: Vec<f64>, duration: f64, glint_count: usize, split: Split) {
        let gs_class = (glint_count <= 2).then(|| self.config.grid.label_for_offsets(&offsets));
        let seed = seed_for(self.config.seed, self.plans.len());
        self.plans.push(SamplePlan { offsets, duration, glint_count, gs_class, split, seed });
    }
}

/// Expands the recipe of `config.kind` into per-sample plans. Order is
/// class-major and fully determined by the config.
pub fn plan_samples(config: &CorpusConfig) -> Result<Vec<SamplePlan>> {
    let r = &config.recipe;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut b = Builder { config, plans: Vec::new() };
    match config.kind {
        CorpusKind::Classify => {
            let per_dur = r.per_class / r.multi_durations.len().max(1);
            if per_dur * r.multi_durations.len() != r.per_class || r.pair_spacings.2 != per_dur {
                return Err(Error::param("per-class count must equal spacings × durations"));
            }
            let (lo, hi) = r.single_duration_range;
            for d in linspace(lo, hi, r.per_class) {
                b.push(vec![0.0], d, 1, Split::Train);
            }
            let (s0, s1, n) = r.pair_spacings;
            for s in linspace(s0, s1, n) {
                for &d in &r.multi_durations {
                    b.push(vec![0.0, s], d, 2, Split::Train);
                }
            }
            let (g0, g1, gn) = r.offset_grid;
            let grid = linspace(g0, g1, gn);
            for count in [3, 4] {
                for offsets in draw_offsets(&mut rng, &grid, count - 1, per_dur) {
                    for &d in &r.multi_durations {
                        b.push(offsets.clone(), d, count, Split::Train);
                    }
                }
            }
            // stratified validation split
            for count in 1..=4 {
                let mut members: Vec<usize> = (0..b.plans.len()).filter(|&i| b.plans[i].glint_count == count).collect();
                members.shuffle(&mut rng);
                for &i in members.iter().take(r.validation_per_class) {
                    b.plans[i].split = Split::Validation;
                }
            }
        }
        CorpusKind::Gs => {
            for k in 0..config.grid.n_classes() {
                let s = config.grid.spacing(k);
                b.push(vec![0.0, s], r.gs_duration, 2, Split::Train);
            }
        }
        CorpusKind::Eval => {
            let (hi, n) = r.eval_grid;
            let grid: Vec<f64> = linspace(0.0, hi, n).into_iter().skip(1).collect();
            let per_dur = grid.len();
            for _ in 0..per_dur {
                for &d in &r.eval_durations {
                    b.push(vec![0.0], d, 1, Split::Eval);
                }
            }
            for &s in &grid {
                for &d in &r.eval_durations {
                    b.push(vec![0.0, s], d, 2, Split::Eval);
                }
            }
            for count in [3, 4] {
                for offsets in draw_offsets(&mut rng, &grid, count - 1, per_dur) {
                    for &d in &r.eval_durations {
                        b.push(offsets.clone(), d, count, Split::Eval);
                    }
                }
            }
        }
    }
    Ok(b.plans)
}
