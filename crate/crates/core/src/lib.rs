//! Behavioral simulator of a retina-inspired image sensor.
//!
//! Grayscale video enters the [`frontend`], which emits per-pixel ON/OFF
//! bipolar events using either a frame-differencing (APS) or a
//! log-intensity (DVS) pixel model. The [`layout`] tiles the sensor into
//! center regions with interleaved surrounds. The [`oms`] engine flags
//! object motion that differs from background motion; the [`ld`] engine
//! flags expanding, approaching edges. Both engines settle a normalized
//! voltage-divider node and threshold it, and [`verify`] checks every such
//! decision against an exact integer formulation.

pub mod error;
pub mod frontend;
pub mod io;
pub mod layout;
pub mod ld;
pub mod metrics;
pub mod oms;
pub mod pipeline;
pub mod ratio;
pub mod stimulus;
pub mod verify;

pub use error::{Error, Result};
pub use frontend::{
    aps_step, dvs_step, frontend_reset, to_luminance, BipolarEventMap, Channel, DvsState, EventRecord,
    Frontend, FrontendConfig, FrontendState, GrayFrame, LuminanceFrame, Polarity, SensorMode,
};
pub use io::{FeatureSpikeRecord, PipelineConfig, SpikeKind};
pub use layout::{build_layout, validate_layout, LayoutConfig, Pixel, ReceptiveField, RfId, RfLayout, Role};
pub use ld::{ld_counts, ld_decide, ld_decide_digital, ld_step, ld_voltage, LdConfig, LdResult, LoomPolarity};
pub use metrics::RunMetrics;
pub use oms::{
    oms_analog_voltage, oms_counts, oms_decide, oms_decide_digital, oms_step, OmsConfig, OmsEngine, OmsResult,
    OmsWeights, SurroundWeight,
};
pub use pipeline::{run_to_dir, Pipeline, TickOutput};
pub use ratio::Ratio;
pub use stimulus::{generate, StimulusKind, StimulusSpec};
