//! File formats: frame ingestion, event and spike streams, spike maps and
//! pipeline configuration.

mod aer;
mod config;
mod csv;
mod pgm;
mod raw;
mod render;

use std::path::Path;

pub use aer::{decode_aer, encode_aer, read_aer, write_aer_binary, AerWriter, AER_HEADER_LEN, AER_MAGIC, AER_RECORD_LEN, AER_VERSION};
pub use config::{parse_dims, read_config, EngineSet, InputSpec, LayoutSettings, PipelineConfig};
pub use csv::{
    parse_event_csv, parse_spike_csv, write_event_csv, write_spike_csv, write_sweep_csv, EventCsvWriter, SpikeCsvWriter,
    EVENT_CSV_HEADER, SPIKE_CSV_HEADER, SWEEP_CSV_HEADER,
};
pub use pgm::{encode_pgm, parse_pgm, read_gray_sequence, read_pgm, read_pgm_sequence, write_pgm};
pub use raw::{read_raw_gray, read_raw_y8};
pub use render::{render_spike_map, spike_map};

use crate::error::{Error, Result};
use crate::frontend::GrayFrame;
use crate::layout::RfId;
use crate::ld::LoomPolarity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpikeKind {
    Oms,
    Ld,
}

impl SpikeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpikeKind::Oms => "OMS",
            SpikeKind::Ld => "LD",
        }
    }
}

/// One feature spike emitted by a receptive field at a tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureSpikeRecord {
    pub frame: u32,
    pub rf: RfId,
    pub kind: SpikeKind,
    /// Always `None` for OMS spikes.
    pub polarity: LoomPolarity,
    pub v_norm: f64,
}

impl FeatureSpikeRecord {
    pub fn sort_key(&self) -> (u32, RfId, SpikeKind) {
        (self.frame, self.rf, self.kind)
    }
}

/// Reads frames from a raw Y8 file when `raw_dims` is given, otherwise from
/// a PGM file, directory or glob pattern.
pub fn load_gray_frames(path: &Path, raw_dims: Option<(usize, usize)>) -> Result<Vec<GrayFrame>> {
    match raw_dims {
        Some((w, h)) => read_raw_gray(path, w, h),
        None => read_gray_sequence(path),
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}
