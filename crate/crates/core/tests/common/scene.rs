//! End-to-end runs over the bundled drop scene.

use abandon_core::background::temporal_median;
use abandon_core::cascade::{ClassifierModel, TrainParams};
use abandon_core::config::PipelineConfig;
use abandon_core::eval::{frame_metrics_with_grace, pixel_metrics_with_grace, Annotation, DetectionRecord, Grace, LevelMetrics};
use abandon_core::pipeline::Pipeline;
use abandon_core::synth::assets::{attended_templates, luggage_templates, STAGE1_SAMPLE_SIZE, STAGE2_SAMPLE_SIZE};
use abandon_core::synth::{ground_truth, SceneRenderer, SceneScript};
use abandon_core::training::{train_cascade, CascadeRecipe, TrainedCascade};
use abandon_core::Frame;

pub const GRACE_FRAMES: u64 = 60;

pub struct SceneRun {
    pub detections: Vec<DetectionRecord>,
    pub truth: Vec<Annotation>,
    pub n_frames: u64,
    pub seconds: f64,
}

impl SceneRun {
    pub fn frame_level(&self) -> LevelMetrics {
        frame_metrics_with_grace(&self.detections, &self.truth, self.n_frames, Grace(GRACE_FRAMES))
    }

    pub fn pixel_level(&self) -> LevelMetrics {
        pixel_metrics_with_grace(&self.detections, &self.truth, self.n_frames, 0.2, Grace(GRACE_FRAMES))
    }

    pub fn detections_text(&self) -> String {
        abandon_core::eval::format_detections(&self.detections)
    }
}

/// Renders each frame on the fly and times only the pipeline.
pub fn run_scene(script: &SceneScript, stage1: &dyn ClassifierModel, stage2: &dyn ClassifierModel) -> SceneRun {
    let renderer = SceneRenderer::new(script).unwrap();
    let mut pipeline = Pipeline::new(&PipelineConfig::default(), Box::new(stage1), Box::new(stage2)).unwrap();
    let mut detections = Vec::new();
    let mut busy = std::time::Duration::ZERO;
    for i in 0..renderer.len() {
        let frame = renderer.frame(i).unwrap();
        let t = std::time::Instant::now();
        detections.extend(pipeline.process_frame(&frame).unwrap());
        busy += t.elapsed();
    }
    SceneRun {
        detections,
        truth: ground_truth(script),
        n_frames: script.duration,
        seconds: busy.as_secs_f64(),
    }
}

/// Background plate for sample generation: the median of the first
/// `n` frames, taken before anyone walks in.
pub fn background_plate(script: &SceneScript, n: u64) -> Frame {
    let renderer = SceneRenderer::new(script).unwrap();
    let frames: Vec<Frame> = (0..n).map(|i| renderer.frame(i).unwrap()).collect();
    temporal_median(&frames).unwrap()
}

pub fn recipe(seed: u64) -> CascadeRecipe {
    CascadeRecipe {
        samples_per_class: 250,
        stage1_size: STAGE1_SAMPLE_SIZE,
        stage2_size: STAGE2_SAMPLE_SIZE,
        seed,
        train: TrainParams { seed, ..TrainParams::default() },
    }
}

pub fn train_for_scene(script: &SceneScript, seed: u64) -> TrainedCascade {
    let plate = background_plate(script, 25);
    train_cascade(&plate, &luggage_templates(), &attended_templates(), &recipe(seed)).unwrap()
}
