//! Acceptance suite. Each criterion prints one PASS/FAIL line on stderr
//! (bypassing the test harness capture) and the test fails if any does.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use iris_core::io::{
    decode_aer, encode_aer, parse_event_csv, write_sweep_csv, EventCsvWriter, PipelineConfig, SWEEP_CSV_HEADER,
};
use iris_core::oms::surround_sweep;
use iris_core::stimulus::generate;
use iris_core::{
    aps_step, run_to_dir, to_luminance, Channel, DvsState, EventRecord, FrontendConfig, GrayFrame, LoomPolarity,
    LuminanceFrame, Pipeline, Polarity, Ratio, SensorMode, StimulusKind, StimulusSpec, TickOutput,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn iris(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_iris"))
        .args(args)
        .output()
        .expect("spawn iris")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// 64x64 sensor, 8x8 centers, stride-2 surround two tiles deep, balanced
/// weights, trip point 0.6.
fn oms_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.layout.center_w = 8;
    cfg.layout.center_h = 8;
    cfg.layout.surround_stride = 2;
    cfg.layout.neighborhood = 2;
    cfg.oms.trip_fraction = Ratio::new(3, 5).unwrap();
    cfg
}

const OMS_CONFIG_TEXT: &str = "\
layout.center_w = 8
layout.center_h = 8
layout.surround_stride = 2
layout.neighborhood = 2
oms.g_surround = balanced
oms.trip_fraction = 0.6
";

fn run_ticks(cfg: &PipelineConfig, frames: &[GrayFrame]) -> Result<(Pipeline, Vec<TickOutput>), String> {
    let sensor = (frames[0].width, frames[0].height);
    let mut pipeline = Pipeline::new(cfg, sensor).map_err(|e| e.to_string())?;
    let mut ticks = Vec::with_capacity(frames.len());
    for f in frames {
        let lum = to_luminance(f, sensor).map_err(|e| e.to_string())?;
        ticks.push(pipeline.process(lum).map_err(|e| e.to_string())?);
    }
    Ok((pipeline, ticks))
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let out = iris(&["verify"]);
    let elapsed = started.elapsed();
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    check(out.status.success(), || format!("exit {:?}: {}", out.status.code(), text.trim()))?;
    let cases: u64 = text
        .strip_prefix("OK ")
        .and_then(|t| t.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| format!("unexpected report `{}`", text.trim()))?;
    check(cases >= 50_000, || format!("only {cases} cases"))?;
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:.2?}"))?;
    Ok(format!("{cases} cases, 0 mismatches, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let spec = StimulusSpec::new(StimulusKind::GlobalPan, 64, 64, 51);
    let frames = generate(&spec).map_err(|e| e.to_string())?;
    let (pipeline, ticks) = run_ticks(&oms_config(), &frames)?;
    let layout = pipeline.layout();
    let interior: Vec<u32> = (0..layout.len() as u32).filter(|&rf| layout.is_interior(rf)).collect();
    check(!interior.is_empty(), || "no interior fields".into())?;
    let mut spikes = 0;
    let mut events = 0;
    for t in &ticks {
        events += t.events.active_count();
        spikes += interior.iter().filter(|&&rf| t.oms[rf as usize].spike).count();
    }
    check(events > 0, || "stimulus produced no events".into())?;
    check(spikes == 0, || format!("{spikes} interior OMS spikes"))?;
    Ok(format!(
        "{} ticks, {} interior fields, {events} events, 0 interior spikes",
        ticks.len() - 1,
        interior.len()
    ))
}

fn differential_frames() -> Result<(StimulusSpec, Vec<GrayFrame>), String> {
    let spec = StimulusSpec::new(StimulusKind::Differential, 64, 64, 51);
    let frames = generate(&spec).map_err(|e| e.to_string())?;
    Ok((spec, frames))
}

fn criterion_3() -> Outcome {
    let (spec, frames) = differential_frames()?;
    let (pipeline, ticks) = run_ticks(&oms_config(), &frames)?;
    let layout = pipeline.layout();
    let region = spec.region();
    let target = layout
        .owner_of(region.x as u32, region.y as u32)
        .ok_or("region outside the sensor")?;
    let target_tile = layout.field(target).map_err(|e| e.to_string())?.tile;

    let motion_ticks: Vec<&TickOutput> = ticks[1..]
        .iter()
        .filter(|t| t.events.active_count() > 0)
        .collect();
    check(motion_ticks.len() == frames.len() - 1, || {
        format!("texture moved on {} of {} ticks", motion_ticks.len(), frames.len() - 1)
    })?;
    let hits = motion_ticks.iter().filter(|t| t.oms[target as usize].spike).count();
    let rate = hits as f64 / motion_ticks.len() as f64;
    check(rate >= 0.95, || format!("target rf {target} spiked on {hits}/{} ticks", motion_ticks.len()))?;

    let far_ticks = ticks
        .iter()
        .filter(|t| {
            t.oms.iter().any(|r| {
                let tile = layout.fields()[r.rf as usize].tile;
                let dist = tile.0.abs_diff(target_tile.0).max(tile.1.abs_diff(target_tile.1));
                r.spike && dist > 1
            })
        })
        .count();
    check(far_ticks == 0, || format!("non-adjacent fields spiked on {far_ticks} ticks"))?;
    Ok(format!(
        "rf {target} spiked on {hits}/{} motion ticks ({:.0}%), non-adjacent on 0",
        motion_ticks.len(),
        rate * 100.0
    ))
}

fn criterion_4() -> Outcome {
    let cfg = oms_config();
    let sensor = (64, 64);
    let layout = iris_core::build_layout(&cfg.layout.resolve(sensor).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let rf = (0..layout.len() as u32)
        .find(|&rf| layout.is_interior(rf))
        .ok_or("no interior field")?;
    let field = &layout.fields()[rf as usize];
    let points = surround_sweep(field.center.len() as u32, field.surround.len() as u32, &cfg.oms)
        .map_err(|e| e.to_string())?;

    check(points.len() == 10, || format!("{} sweep points", points.len()))?;
    check(
        points.iter().enumerate().all(|(i, p)| p.percent == 10 * (i as u32 + 1)),
        || "sweep steps are not 10%..100%".into(),
    )?;
    check(points.windows(2).all(|w| w[1].v_norm < w[0].v_norm), || {
        "v_norm is not strictly decreasing".into()
    })?;
    let flips = points.windows(2).filter(|w| w[0].spike != w[1].spike).count();
    check(points[0].spike && !points[9].spike && flips == 1, || {
        format!("decision flips {flips} times")
    })?;

    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let path = dir.path().join("sweep.csv");
    let file = fs::File::create(&path).map_err(|e| e.to_string())?;
    write_sweep_csv(&points, file).map_err(|e| e.to_string())?;
    let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let mut lines = text.lines();
    check(lines.next() == Some(SWEEP_CSV_HEADER), || "bad sweep header".into())?;
    for (p, line) in points.iter().zip(lines.by_ref()) {
        let cols: Vec<&str> = line.split(',').collect();
        let v: f64 = cols[3].parse().map_err(|_| format!("bad row `{line}`"))?;
        check(
            cols[0] == p.percent.to_string()
                && cols[1] == p.c_on.to_string()
                && cols[2] == p.s_on.to_string()
                && (v - p.v_norm).abs() <= 5e-7
                && cols[4] == if p.spike { "1" } else { "0" },
            || format!("row `{line}` does not match the sweep"),
        )?;
    }
    check(lines.next().is_none(), || "extra sweep rows".into())?;
    let flip_at = points.iter().position(|p| !p.spike).unwrap_or(10);
    Ok(format!(
        "|C|={} |S|={}, v {:.3}->{:.3}, flips between {}% and {}%",
        field.center.len(),
        field.surround.len(),
        points[0].v_norm,
        points[9].v_norm,
        points[flip_at - 1].percent,
        points[flip_at].percent
    ))
}

/// 64x64 sensor tiled into four 32x32 fields; LD only.
fn ld_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.layout.center_w = 32;
    cfg.layout.center_h = 32;
    cfg.engines.oms = false;
    cfg
}

fn loom_spec(object: f64, background: f64) -> StimulusSpec {
    StimulusSpec {
        radius: 2.0,
        radius_growth: 1.0,
        center: Some((16.0, 16.0)),
        object_level: object,
        background_level: background,
        ..StimulusSpec::new(StimulusKind::LoomDisc, 64, 64, 9)
    }
}

fn check_loom(spec: &StimulusSpec, want: LoomPolarity) -> Result<usize, String> {
    let frames = generate(spec).map_err(|e| e.to_string())?;
    check(frames.len() <= 101, || "run longer than 100 ticks".into())?;
    let (pipeline, ticks) = run_ticks(&ld_config(), &frames)?;
    let (cx, cy) = spec.disc_center();
    let rf = pipeline.layout().owner_of(cx as u32, cy as u32).ok_or("disc off sensor")?;
    for t in &ticks[1..] {
        let r = &t.ld[rf as usize];
        check(r.spike && r.polarity == want, || {
            format!(
                "tick {}: rf {rf} gave {:?} (n_on {}, n_off {})",
                t.frame(),
                r.polarity,
                r.n_on,
                r.n_off
            )
        })?;
        check(t.ld.iter().filter(|o| o.spike && o.polarity != want).count() == 0, || {
            format!("tick {}: opposite-polarity spike", t.frame())
        })?;
    }
    Ok(ticks.len() - 1)
}

fn check_translate(velocity: i64, start_x: f64) -> Result<usize, String> {
    let spec = StimulusSpec {
        velocity,
        radius: 5.0,
        center: Some((start_x, 16.0)),
        ..StimulusSpec::new(StimulusKind::TranslateDisc, 64, 64, 10)
    };
    let frames = generate(&spec).map_err(|e| e.to_string())?;
    let (pipeline, ticks) = run_ticks(&ld_config(), &frames)?;
    let layout = pipeline.layout();
    let contains = |tick: usize, rf: u32| {
        let ((cx, cy), r) = spec.disc_at(tick);
        let b = layout.fields()[rf as usize].bounds;
        cx - r >= f64::from(b.x0)
            && cx + r <= f64::from(b.x1 + 1)
            && cy - r >= f64::from(b.y0)
            && cy + r <= f64::from(b.y1 + 1)
    };
    let mut checked = 0;
    for (i, t) in ticks.iter().enumerate().skip(1) {
        for r in &t.ld {
            if contains(i - 1, r.rf) && contains(i, r.rf) {
                check(r.n_on + r.n_off > 0, || format!("tick {i}: no edge activity"))?;
                check(!r.spike, || format!("tick {i}: rf {} spiked (n_on {}, n_off {})", r.rf, r.n_on, r.n_off))?;
                checked += 1;
            }
        }
    }
    check(checked == ticks.len() - 1, || format!("only {checked} containing (rf, tick) pairs"))?;
    Ok(checked)
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let right = check_translate(1, 12.0)?;
    let left = check_translate(-1, 20.0)?;
    let dark = check_loom(&loom_spec(0.2, 0.8), LoomPolarity::DarkLoom)?;
    let bright = check_loom(&loom_spec(0.8, 0.2), LoomPolarity::BrightLoom)?;
    let elapsed = started.elapsed();
    check(elapsed < Duration::from_secs(5), || format!("suite took {elapsed:.2?}"))?;
    Ok(format!(
        "translate right/left quiet on {right}/{left} ticks, DARK_LOOM {dark}/{dark}, BRIGHT_LOOM {bright}/{bright}, {elapsed:.2?}"
    ))
}

fn random_pair(rng: &mut ChaCha8Rng) -> (LuminanceFrame, LuminanceFrame) {
    let w = rng.gen_range(1..=24);
    let h = rng.gen_range(1..=24);
    let prev: Vec<f64> = (0..w * h).map(|_| rng.gen::<f64>()).collect();
    // half the pairs are small perturbations so thresholds are exercised near the edge
    let jitter = if rng.gen_bool(0.5) { 0.3 } else { 1.0 };
    let cur: Vec<f64> = prev
        .iter()
        .map(|&p| (p + jitter * (rng.gen::<f64>() * 2.0 - 1.0)).clamp(0.0, 1.0))
        .collect();
    (
        LuminanceFrame::new(w, h, prev).unwrap(),
        LuminanceFrame::new(w, h, cur).unwrap(),
    )
}

const PAIRS: usize = 1_000;

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1215);
    let aps = |t: f64| FrontendConfig { theta_aps: t, ..FrontendConfig::default() };
    let dvs = |t: f64| FrontendConfig { mode: SensorMode::Dvs, theta_dvs: t, ..FrontendConfig::default() };
    let err = |e: iris_core::Error| e.to_string();

    for i in 0..PAIRS {
        let (prev, cur) = random_pair(&mut rng);
        let theta = rng.gen_range(0.01..0.9);
        let fwd = aps_step(&prev, &cur, &aps(theta)).map_err(err)?;
        let back = aps_step(&cur, &prev, &aps(theta)).map_err(err)?;
        check(fwd.channels().iter().zip(back.channels()).all(|(a, b)| a.flipped() == *b), || {
            format!("antisymmetry violated on pair {i}")
        })?;
    }

    for i in 0..PAIRS {
        let (first, cur) = random_pair(&mut rng);
        let cfg = dvs(rng.gen_range(0.01..2.0));
        let mut state = DvsState::from_frame(&first, &cfg);
        state.update(&cur, &cfg).map_err(err)?;
        for _ in 0..3 {
            let quiet = state.update(&cur, &cfg).map_err(err)?;
            check(quiet.active_count() == 0, || format!("DVS not quiescent on pair {i}"))?;
        }
    }

    for i in 0..PAIRS {
        let (prev, cur) = random_pair(&mut rng);
        let (a, b) = (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0));
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let subset = |low: &[Channel], high: &[Channel]| {
            low.iter().zip(high).all(|(l, h)| !h.is_active() || l == h)
        };
        let aps_ok = subset(
            aps_step(&prev, &cur, &aps(lo)).map_err(err)?.channels(),
            aps_step(&prev, &cur, &aps(hi)).map_err(err)?.channels(),
        );
        let dvs_lo = DvsState::from_frame(&prev, &dvs(lo)).update(&cur, &dvs(lo)).map_err(err)?;
        let dvs_hi = DvsState::from_frame(&prev, &dvs(hi)).update(&cur, &dvs(hi)).map_err(err)?;
        check(aps_ok && subset(dvs_lo.channels(), dvs_hi.channels()), || {
            format!("threshold monotonicity violated on pair {i}")
        })?;
    }

    for i in 0..PAIRS {
        let (prev, cur) = random_pair(&mut rng);
        for map in [
            aps_step(&prev, &cur, &aps(0.05)).map_err(err)?,
            DvsState::from_frame(&prev, &dvs(0.1)).update(&cur, &dvs(0.1)).map_err(err)?,
        ] {
            let mut seen = BTreeMap::new();
            for e in map.events() {
                check(seen.insert((e.x, e.y), e.polarity).is_none(), || {
                    format!("pixel ({}, {}) fired twice on pair {i}", e.x, e.y)
                })?;
                check(map.channel(e.x as usize, e.y as usize).polarity() == Some(e.polarity), || {
                    format!("event polarity disagrees with its channel on pair {i}")
                })?;
            }
            check(seen.len() == map.active_count(), || format!("event count mismatch on pair {i}"))?;
        }
    }
    Ok(format!(
        "{PAIRS} pairs each: APS antisymmetry, DVS quiescence, threshold monotonicity, mutual exclusion"
    ))
}

fn random_events(rng: &mut ChaCha8Rng, n: usize) -> Vec<EventRecord> {
    let mut frame = 0u32;
    let mut events = Vec::with_capacity(n);
    while events.len() < n {
        frame += rng.gen_range(1..4);
        let mut batch: Vec<EventRecord> = (0..rng.gen_range(1..2000))
            .map(|_| EventRecord {
                frame,
                x: rng.gen_range(0..65_536),
                y: rng.gen_range(0..65_536),
                polarity: if rng.gen() { Polarity::On } else { Polarity::Off },
            })
            .collect();
        batch.sort_by_key(EventRecord::sort_key);
        batch.dedup_by_key(|e| e.sort_key());
        events.extend(batch);
    }
    events.truncate(n);
    events
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let events = random_events(&mut rng, 120_000);

    let aer = encode_aer(&events).map_err(|e| e.to_string())?;
    let decoded = decode_aer(&aer).map_err(|e| e.to_string())?;
    check(decoded == events, || "AER decode differs".into())?;
    check(encode_aer(&decoded).map_err(|e| e.to_string())? == aer, || "AER re-encode differs".into())?;

    let write_csv = |evs: &[EventRecord]| -> Result<Vec<u8>, String> {
        let mut w = EventCsvWriter::new(Vec::new()).map_err(|e| e.to_string())?;
        for e in evs {
            w.write_event(e).map_err(|e| e.to_string())?;
        }
        w.finish().map_err(|e| e.to_string())
    };
    let csv = write_csv(&events)?;
    let parsed = parse_event_csv(std::str::from_utf8(&csv).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    check(parsed == events, || "CSV parse differs".into())?;
    check(write_csv(&parsed)? == csv, || "CSV re-encode differs".into())?;
    Ok(format!(
        "{} events: AER {} bytes, CSV {} bytes, both byte-exact",
        events.len(),
        aer.len(),
        csv.len()
    ))
}

fn criterion_8() -> Outcome {
    let spec = loom_spec(0.2, 0.8);
    let frames = generate(&spec).map_err(|e| e.to_string())?;
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let metrics = run_to_dir(&ld_config(), &frames, dir.path()).map_err(|e| e.to_string())?;
    let aer_bytes = fs::metadata(dir.path().join("events.aer")).map_err(|e| e.to_string())?.len();
    let raw_bytes = (frames.len() * spec.width * spec.height) as u64;
    let ratio = aer_bytes as f64 / raw_bytes as f64;
    check(metrics.event_bytes == aer_bytes && metrics.raw_bytes == raw_bytes, || {
        "metrics disagree with file sizes".into()
    })?;
    check(ratio < 0.1, || format!("ratio {ratio:.4}"))?;
    Ok(format!("{aer_bytes} / {raw_bytes} bytes = {ratio:.4}"))
}

fn collect_tree(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            let rel = path.strip_prefix(root).unwrap().to_path_buf();
            if path.is_dir() {
                out.insert(rel, Vec::new());
                stack.push(path);
            } else {
                out.insert(rel, fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(out)
}

fn criterion_9() -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let frames = dir.path().join("frames");
    let out = iris(&["synth", "--kind", "differential", "--out", path_str(&frames), "--frames", "51"]);
    check(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let cfg = dir.path().join("oms.cfg");
    fs::write(&cfg, OMS_CONFIG_TEXT).map_err(|e| e.to_string())?;

    let mut trees = Vec::new();
    for name in ["a", "b"] {
        let dest = dir.path().join(name);
        let out = iris(&[
            "run",
            "--config",
            path_str(&cfg),
            "--input",
            path_str(&frames),
            "--out",
            path_str(&dest),
        ]);
        check(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        trees.push(collect_tree(&dest)?);
    }
    check(trees[0] == trees[1], || "output trees differ".into())?;
    let bytes: usize = trees[0].values().map(Vec::len).sum();
    check(trees[0].len() > 50 && bytes > 0, || "output tree is suspiciously small".into())?;
    Ok(format!("{} entries, {bytes} bytes identical", trees[0].len()))
}

fn criterion_10() -> Outcome {
    // a pan floods every textured pixel with events each tick, the heaviest load
    let spec = StimulusSpec::new(StimulusKind::GlobalPan, 128, 128, 300);
    let frames = generate(&spec).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::default();
    check(cfg.engines.oms && cfg.engines.ld, || "engines disabled".into())?;
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let started = Instant::now();
    let metrics = run_to_dir(&cfg, &frames, dir.path()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    check(metrics.frames == 300, || format!("{} frames processed", metrics.frames))?;
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:.2?}"))?;
    Ok(format!(
        "128x128 x 300 frames, {} events, {elapsed:.2?} single-threaded",
        metrics.total_events
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("equivalence oracle", criterion_1),
        ("OMS global-motion suppression", criterion_2),
        ("OMS differential-motion detection", criterion_3),
        ("surround activation sweep", criterion_4),
        ("LD scenario suite", criterion_5),
        ("frontend properties", criterion_6),
        ("codec round-trips", criterion_7),
        ("bandwidth sanity", criterion_8),
        ("determinism", criterion_9),
        ("performance floor", criterion_10),
    ];
    let mut failed = Vec::new();
    let mut stderr = std::io::stderr().lock();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        match run() {
            Ok(detail) => {
                let _ = writeln!(stderr, "PASS {n:>2} {name}: {detail}");
            }
            Err(reason) => {
                let _ = writeln!(stderr, "FAIL {n:>2} {name}: {reason}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
