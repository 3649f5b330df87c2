//! Shared fixtures for the benchmarks.

use iris_core::{
    build_layout, generate, to_luminance, Frontend, FrontendConfig, LuminanceFrame, PipelineConfig, RfLayout,
    SensorMode, StimulusKind, StimulusSpec,
};

/// Luminance frames of a panning texture, the densest event load.
pub fn pan_frames(width: usize, height: usize, frames: usize) -> Vec<LuminanceFrame> {
    let spec = StimulusSpec::new(StimulusKind::GlobalPan, width, height, frames);
    generate(&spec)
        .expect("valid stimulus")
        .iter()
        .map(|f| to_luminance(f, (width, height)).expect("matching size"))
        .collect()
}

pub fn frontend(mode: SensorMode) -> Frontend {
    Frontend::new(FrontendConfig {
        mode,
        ..FrontendConfig::default()
    })
    .expect("default frontend")
}

pub fn layout(width: usize, height: usize) -> RfLayout {
    let cfg = PipelineConfig::default();
    build_layout(&cfg.layout.resolve((width, height)).expect("default layout")).expect("valid layout")
}
