//! Frame-to-spike pipeline and the on-disk run driver.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frontend::{to_luminance, BipolarEventMap, Frontend, GrayFrame, LuminanceFrame};
use crate::io::{
    spike_map, write_pgm, AerWriter, EventCsvWriter, FeatureSpikeRecord, PipelineConfig,
    SpikeCsvWriter, SpikeKind,
};
use crate::layout::{build_layout, RfLayout};
use crate::ld::{ld_step, LdConfig, LdResult, LoomPolarity};
use crate::metrics::RunMetrics;
use crate::oms::{OmsEngine, OmsResult};

/// Everything computed for one tick.
#[derive(Debug, Clone)]
pub struct TickOutput {
    pub events: BipolarEventMap,
    pub oms: Vec<OmsResult>,
    pub ld: Vec<LdResult>,
}

impl TickOutput {
    pub fn frame(&self) -> u32 {
        self.events.frame_index()
    }

    /// Spiking fields as records, ordered by `(rf_id, kind)`.
    pub fn spikes(&self) -> Vec<FeatureSpikeRecord> {
        let frame = self.frame();
        let oms = self.oms.iter().filter(|r| r.spike).map(|r| FeatureSpikeRecord {
            frame,
            rf: r.rf,
            kind: SpikeKind::Oms,
            polarity: LoomPolarity::None,
            v_norm: r.v_norm,
        });
        let ld = self.ld.iter().filter(|r| r.spike).map(|r| FeatureSpikeRecord {
            frame,
            rf: r.rf,
            kind: SpikeKind::Ld,
            polarity: r.polarity,
            v_norm: r.v_norm,
        });
        let mut out: Vec<_> = oms.chain(ld).collect();
        out.sort_by_key(FeatureSpikeRecord::sort_key);
        out
    }

    pub fn oms_spike_count(&self) -> u64 {
        self.oms.iter().filter(|r| r.spike).count() as u64
    }

    pub fn ld_spike_count(&self) -> u64 {
        self.ld.iter().filter(|r| r.spike).count() as u64
    }
}

pub struct Pipeline {
    frontend: Frontend,
    layout: RfLayout,
    oms: Option<OmsEngine>,
    ld: Option<LdConfig>,
}

impl Pipeline {
    pub fn new(cfg: &PipelineConfig, sensor: (usize, usize)) -> Result<Self> {
        cfg.validate()?;
        let layout = build_layout(&cfg.layout.resolve(sensor)?)?;
        let oms = if cfg.engines.oms {
            Some(OmsEngine::new(&layout, cfg.oms.clone())?)
        } else {
            None
        };
        Ok(Pipeline {
            frontend: Frontend::new(cfg.frontend.clone())?,
            layout,
            oms,
            ld: cfg.engines.ld.then(|| cfg.ld.clone()),
        })
    }

    pub fn layout(&self) -> &RfLayout {
        &self.layout
    }

    pub fn process(&mut self, frame: LuminanceFrame) -> Result<TickOutput> {
        crate::frontend::check_dims(
            (self.layout.width(), self.layout.height()),
            (frame.width(), frame.height()),
        )?;
        let events = self.frontend.push(frame)?;
        let oms = match &self.oms {
            Some(engine) => engine.step(&self.layout, &events)?,
            None => Vec::new(),
        };
        let ld = match &self.ld {
            Some(cfg) => ld_step(&events, &self.layout, cfg)?,
            None => Vec::new(),
        };
        Ok(TickOutput { events, oms, ld })
    }
}

pub const EVENTS_CSV: &str = "events.csv";
pub const EVENTS_AER: &str = "events.aer";
pub const SPIKES_CSV: &str = "spikes.csv";
pub const METRICS_CSV: &str = "metrics.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const MAPS_DIR: &str = "maps";

/// Per-tick spike map path, e.g. `maps/oms_00012.pgm`.
pub fn map_path(out_dir: &Path, kind: SpikeKind, frame: u32) -> PathBuf {
    let stem = match kind {
        SpikeKind::Oms => "oms",
        SpikeKind::Ld => "ld",
    };
    out_dir.join(MAPS_DIR).join(format!("{stem}_{frame:05}.pgm"))
}

/// Files created by a run, removed again if the run fails.
struct OutputGuard {
    created: Vec<PathBuf>,
    maps_dir: Option<PathBuf>,
    armed: bool,
}

impl OutputGuard {
    fn create(&mut self, path: PathBuf) -> Result<BufWriter<File>> {
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.created.push(path);
        Ok(BufWriter::new(f))
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.armed {
            for p in &self.created {
                let _ = fs::remove_file(p);
            }
            if let Some(d) = &self.maps_dir {
                let _ = fs::remove_dir(d);
            }
        }
    }
}

/// Runs the pipeline over `frames` and writes the output tree into
/// `out_dir`: event CSV and AER streams, the spike CSV, one spike map per
/// tick and enabled engine, per-tick metrics and a summary.
pub fn run_to_dir(cfg: &PipelineConfig, frames: &[GrayFrame], out_dir: &Path) -> Result<RunMetrics> {
    cfg.validate()?;
    let sensor = match frames.first() {
        Some(f) => Some((f.width, f.height)),
        None => cfg.layout.explicit().ok().map(|l| (l.width, l.height)),
    };
    let mut pipeline = sensor.map(|s| Pipeline::new(cfg, s)).transpose()?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let maps_dir = out_dir.join(MAPS_DIR);
    let mut guard = OutputGuard {
        created: Vec::new(),
        maps_dir: (!maps_dir.exists()).then(|| maps_dir.clone()),
        armed: true,
    };
    fs::create_dir_all(&maps_dir).map_err(|e| Error::io(&maps_dir, e))?;

    let events_path = out_dir.join(EVENTS_CSV);
    let aer_path = out_dir.join(EVENTS_AER);
    let spikes_path = out_dir.join(SPIKES_CSV);
    let io_at = |p: &Path| {
        let p = p.to_path_buf();
        move |e| Error::io(p, e)
    };
    let mut events_csv = EventCsvWriter::new(guard.create(events_path.clone())?).map_err(io_at(&events_path))?;
    let mut aer = AerWriter::new(guard.create(aer_path.clone())?).map_err(io_at(&aer_path))?;
    let mut spikes_csv = SpikeCsvWriter::new(guard.create(spikes_path.clone())?).map_err(io_at(&spikes_path))?;

    let mut metrics = match &pipeline {
        Some(p) => RunMetrics::new(p.layout().width(), p.layout().height(), p.layout().len()),
        None => RunMetrics::new(0, 0, 0),
    };

    if let Some(pipeline) = pipeline.as_mut() {
        let sensor = (pipeline.layout().width(), pipeline.layout().height());
        for raw in frames {
            let tick = pipeline.process(to_luminance(raw, sensor)?)?;
            events_csv.write_map(&tick.events).map_err(io_at(&events_path))?;
            aer.write_map(&tick.events)?;
            let spikes = tick.spikes();
            for s in &spikes {
                spikes_csv.write_spike(s).map_err(io_at(&spikes_path))?;
            }
            for (enabled, kind) in [(cfg.engines.oms, SpikeKind::Oms), (cfg.engines.ld, SpikeKind::Ld)] {
                if !enabled {
                    continue;
                }
                let path = map_path(out_dir, kind, tick.frame());
                let img = spike_map(
                    spikes.iter().filter(|s| s.kind == kind).map(|s| s.rf),
                    pipeline.layout(),
                )?;
                guard.created.push(path.clone());
                write_pgm(&path, &img)?;
            }
            metrics.record_tick(
                tick.frame(),
                tick.events.active_count() as u64,
                tick.oms_spike_count(),
                tick.ld_spike_count(),
            );
        }
    }

    events_csv.finish().map_err(io_at(&events_path))?;
    aer.finish().map_err(io_at(&aer_path))?;
    spikes_csv.finish().map_err(io_at(&spikes_path))?;

    let metrics_path = out_dir.join(METRICS_CSV);
    let mut w = guard.create(metrics_path.clone())?;
    metrics
        .write_tick_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(io_at(&metrics_path))?;
    let summary_path = out_dir.join(SUMMARY_CSV);
    let mut w = guard.create(summary_path.clone())?;
    metrics
        .write_summary_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(io_at(&summary_path))?;

    let written = fs::metadata(&aer_path).map_err(|e| Error::io(&aer_path, e))?.len();
    debug_assert_eq!(written, metrics.event_bytes);
    metrics.event_bytes = written;

    guard.armed = false;
    Ok(metrics)
}
