//! Training recipe for one cascade stage and for a whole scene: seeded split,
//! flip/blur augmentation of the training part, SGD, held-out accuracy.

use crate::cascade::{train_linear, ClassifierModel, LinearModel, TrainParams};
use crate::error::Result;
use crate::imgproc::Frame;
use crate::samplegen::{augment_set, gen_stage1, gen_stage2, split, SampleLabel, SampleSet, TemplateImage};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Fraction of `set` whose label matches the sign of the model's score
/// (zero counts as positive). 1.0 for an empty set.
pub fn sign_accuracy(model: &dyn ClassifierModel, set: &SampleSet) -> f64 {
    if set.is_empty() {
        return 1.0;
    }
    let correct = set
        .samples
        .iter()
        .filter(|s| (model.predict(&s.image) >= 0.0) == (s.label == SampleLabel::Positive))
        .count();
    correct as f64 / set.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageReport {
    /// Training samples after augmentation.
    pub train_samples: usize,
    pub test_samples: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Splits `set`, augments only the training part, trains and scores the
/// held-out part.
pub fn train_stage(set: &SampleSet, train_fraction: f64, params: &TrainParams) -> Result<(LinearModel, StageReport)> {
    let (train, test) = split(set, train_fraction, params.seed)?;
    let train = augment_set(&train);
    let model = train_linear(&train, params)?;
    let report = StageReport {
        train_samples: train.len(),
        test_samples: test.len(),
        train_accuracy: sign_accuracy(&model, &train),
        test_accuracy: sign_accuracy(&model, &test),
    };
    Ok((model, report))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CascadeRecipe {
    pub samples_per_class: usize,
    pub stage1_size: (usize, usize),
    pub stage2_size: (usize, usize),
    pub seed: u64,
    pub train: TrainParams,
}

pub struct TrainedCascade {
    pub stage1: LinearModel,
    pub stage2: LinearModel,
    pub stage1_samples: SampleSet,
    pub stage2_samples: SampleSet,
    pub stage1_report: StageReport,
    pub stage2_report: StageReport,
}

/// Generates both sample sets over `background` and trains both stages.
/// Stage two uses `seed + 1` so its placements differ from stage one's.
pub fn train_cascade(
    background: &Frame,
    luggage: &[TemplateImage],
    attended: &[TemplateImage],
    recipe: &CascadeRecipe,
) -> Result<TrainedCascade> {
    let n = recipe.samples_per_class;
    let s1 = gen_stage1(background, luggage, n, n, recipe.stage1_size, recipe.seed)?;
    let s2 = gen_stage2(background, luggage, attended, n, n, recipe.stage2_size, recipe.seed.wrapping_add(1))?;
    let (m1, r1) = train_stage(&s1, DEFAULT_TRAIN_FRACTION, &recipe.train)?;
    let (m2, r2) = train_stage(&s2, DEFAULT_TRAIN_FRACTION, &recipe.train)?;
    Ok(TrainedCascade {
        stage1: m1,
        stage2: m2,
        stage1_samples: s1,
        stage2_samples: s2,
        stage1_report: r1,
        stage2_report: r2,
    })
}
