use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{FeatureSpikeRecord, SpikeKind};
use crate::error::{Error, Result};
use crate::frontend::{BipolarEventMap, EventRecord, Polarity};
use crate::ld::LoomPolarity;
use crate::oms::SweepPoint;

pub const EVENT_CSV_HEADER: &str = "frame,x,y,polarity";
pub const SPIKE_CSV_HEADER: &str = "frame,rf_id,kind,polarity,v_norm";
pub const SWEEP_CSV_HEADER: &str = "surround_percent,c_on,s_on,v_norm,spike";

/// Streaming `frame,x,y,polarity` writer.
pub struct EventCsvWriter<W: Write> {
    out: W,
    rows: u64,
}

impl<W: Write> EventCsvWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{EVENT_CSV_HEADER}")?;
        Ok(EventCsvWriter { out, rows: 0 })
    }

    pub fn write_event(&mut self, e: &EventRecord) -> std::io::Result<()> {
        self.rows += 1;
        writeln!(self.out, "{},{},{},{}", e.frame, e.x, e.y, e.polarity.as_str())
    }

    pub fn write_map(&mut self, map: &BipolarEventMap) -> std::io::Result<()> {
        map.events().try_for_each(|e| self.write_event(&e))
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Streaming `frame,rf_id,kind,polarity,v_norm` writer.
pub struct SpikeCsvWriter<W: Write> {
    out: W,
}

impl<W: Write> SpikeCsvWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{SPIKE_CSV_HEADER}")?;
        Ok(SpikeCsvWriter { out })
    }

    pub fn write_spike(&mut self, s: &FeatureSpikeRecord) -> std::io::Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{:.6}",
            s.frame,
            s.rf,
            s.kind.as_str(),
            s.polarity.as_str(),
            s.v_norm
        )
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes events sorted by `(frame, y, x)`.
pub fn write_event_csv(events: &[EventRecord], path: &Path) -> Result<()> {
    let mut sorted = events.to_vec();
    sorted.sort_by_key(EventRecord::sort_key);
    let io = |e| Error::io(path, e);
    let mut w = EventCsvWriter::new(create(path)?).map_err(io)?;
    for e in &sorted {
        w.write_event(e).map_err(io)?;
    }
    w.finish().map_err(io)?;
    Ok(())
}

/// Writes spikes sorted by `(frame, rf_id)`, OMS before LD.
pub fn write_spike_csv(spikes: &[FeatureSpikeRecord], path: &Path) -> Result<()> {
    let mut sorted = spikes.to_vec();
    sorted.sort_by_key(FeatureSpikeRecord::sort_key);
    let io = |e| Error::io(path, e);
    let mut w = SpikeCsvWriter::new(create(path)?).map_err(io)?;
    for s in &sorted {
        w.write_spike(s).map_err(io)?;
    }
    w.finish().map_err(io)?;
    Ok(())
}

/// Writes a surround-activation sweep, one row per step.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], mut out: W) -> std::io::Result<W> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{},{:.6},{}", p.percent, p.c_on, p.s_on, p.v_norm, u8::from(p.spike))?;
    }
    out.flush()?;
    Ok(out)
}

fn csv_err(line: usize, message: String) -> Error {
    Error::Format {
        path: "<csv>".into(),
        offset: line as u64,
        message,
    }
}

fn rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>> {
    let mut lines = text.split_terminator('\n').enumerate();
    match lines.next() {
        Some((_, h)) if h == header => {}
        _ => return Err(csv_err(1, format!("expected header `{header}`"))),
    }
    Ok(lines.map(|(i, l)| (i + 1, l.split(',').collect())))
}

fn field<T: std::str::FromStr>(line: usize, name: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| csv_err(line, format!("bad {name} `{v}`")))
}

/// Parses the output of [`EventCsvWriter`]. Error offsets are line numbers.
pub fn parse_event_csv(text: &str) -> Result<Vec<EventRecord>> {
    rows(text, EVENT_CSV_HEADER)?
        .map(|(line, cols)| {
            let [frame, x, y, pol] = cols[..] else {
                return Err(csv_err(line, format!("expected 4 columns, got {}", cols.len())));
            };
            let polarity = match pol {
                "ON" => Polarity::On,
                "OFF" => Polarity::Off,
                other => return Err(csv_err(line, format!("bad polarity `{other}`"))),
            };
            Ok(EventRecord {
                frame: field(line, "frame", frame)?,
                x: field(line, "x", x)?,
                y: field(line, "y", y)?,
                polarity,
            })
        })
        .collect()
}

pub fn parse_spike_csv(text: &str) -> Result<Vec<FeatureSpikeRecord>> {
    rows(text, SPIKE_CSV_HEADER)?
        .map(|(line, cols)| {
            let [frame, rf, kind, pol, v] = cols[..] else {
                return Err(csv_err(line, format!("expected 5 columns, got {}", cols.len())));
            };
            let kind = match kind {
                "OMS" => SpikeKind::Oms,
                "LD" => SpikeKind::Ld,
                other => return Err(csv_err(line, format!("bad kind `{other}`"))),
            };
            let polarity = match pol {
                "NONE" => LoomPolarity::None,
                "DARK_LOOM" => LoomPolarity::DarkLoom,
                "BRIGHT_LOOM" => LoomPolarity::BrightLoom,
                other => return Err(csv_err(line, format!("bad polarity `{other}`"))),
            };
            Ok(FeatureSpikeRecord {
                frame: field(line, "frame", frame)?,
                rf: field(line, "rf_id", rf)?,
                kind,
                polarity,
                v_norm: field(line, "v_norm", v)?,
            })
        })
        .collect()
}
