use std::path::Path;

use super::FeatureSpikeRecord;
use crate::error::Result;
use crate::frontend::GrayFrame;
use crate::layout::{RfId, RfLayout};

/// Sensor-sized image with the center pixels of every listed field at 255.
pub fn spike_map(rfs: impl IntoIterator<Item = RfId>, layout: &RfLayout) -> Result<GrayFrame> {
    let mut data = vec![0u8; layout.width() * layout.height()];
    for rf in rfs {
        for &i in &layout.field(rf)?.center {
            data[i as usize] = 255;
        }
    }
    GrayFrame::new(layout.width(), layout.height(), data)
}

/// Writes the spike map of `spikes` (one tick, one kind) as a P5 image.
pub fn render_spike_map(spikes: &[FeatureSpikeRecord], layout: &RfLayout, path: &Path) -> Result<()> {
    let frame = spike_map(spikes.iter().map(|s| s.rf), layout)?;
    super::write_pgm(path, &frame)
}
