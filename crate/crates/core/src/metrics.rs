//! Run statistics and the output-bandwidth figure of merit.

use std::io::Write;

use crate::io::{AER_HEADER_LEN, AER_RECORD_LEN};

#[derive(Debug, Clone, PartialEq)]
pub struct TickMetrics {
    pub frame: u32,
    pub events: u64,
    pub oms_spikes: u64,
    pub ld_spikes: u64,
    /// Share of fields with an OMS spike this tick.
    pub oms_active_fraction: f64,
    pub ld_active_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    pub frames: u64,
    pub width: usize,
    pub height: usize,
    pub fields: usize,
    pub total_events: u64,
    pub oms_spikes: u64,
    pub ld_spikes: u64,
    pub per_tick: Vec<TickMetrics>,
    /// `frames * width * height`, one byte per sample.
    pub raw_bytes: u64,
    /// Size of the AER event file.
    pub event_bytes: u64,
    /// `event_bytes / raw_bytes`; zero for an empty run.
    pub bandwidth_ratio: f64,
}

/// Size of an AER file holding `events` records.
pub fn aer_bytes(events: u64) -> u64 {
    AER_HEADER_LEN as u64 + AER_RECORD_LEN as u64 * events
}

impl RunMetrics {
    pub fn new(width: usize, height: usize, fields: usize) -> Self {
        RunMetrics {
            width,
            height,
            fields,
            event_bytes: aer_bytes(0),
            ..RunMetrics::default()
        }
    }

    pub fn record_tick(&mut self, frame: u32, events: u64, oms_spikes: u64, ld_spikes: u64) {
        let share = |n: u64| {
            if self.fields == 0 {
                0.0
            } else {
                n as f64 / self.fields as f64
            }
        };
        self.per_tick.push(TickMetrics {
            frame,
            events,
            oms_spikes,
            ld_spikes,
            oms_active_fraction: share(oms_spikes),
            ld_active_fraction: share(ld_spikes),
        });
        self.frames += 1;
        self.total_events += events;
        self.oms_spikes += oms_spikes;
        self.ld_spikes += ld_spikes;
        self.raw_bytes = self.frames * (self.width * self.height) as u64;
        self.event_bytes = aer_bytes(self.total_events);
        self.bandwidth_ratio = if self.raw_bytes == 0 {
            0.0
        } else {
            self.event_bytes as f64 / self.raw_bytes as f64
        };
    }

    pub fn write_tick_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "frame,events,oms_spikes,ld_spikes,oms_active_fraction,ld_active_fraction")?;
        for t in &self.per_tick {
            writeln!(
                out,
                "{},{},{},{},{:.6},{:.6}",
                t.frame, t.events, t.oms_spikes, t.ld_spikes, t.oms_active_fraction, t.ld_active_fraction
            )?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "metric,value")?;
        writeln!(out, "frames,{}", self.frames)?;
        writeln!(out, "width,{}", self.width)?;
        writeln!(out, "height,{}", self.height)?;
        writeln!(out, "fields,{}", self.fields)?;
        writeln!(out, "total_events,{}", self.total_events)?;
        writeln!(out, "oms_spikes,{}", self.oms_spikes)?;
        writeln!(out, "ld_spikes,{}", self.ld_spikes)?;
        writeln!(out, "raw_bytes,{}", self.raw_bytes)?;
        writeln!(out, "event_bytes,{}", self.event_bytes)?;
        writeln!(out, "bandwidth_ratio,{:.6}", self.bandwidth_ratio)
    }
}
