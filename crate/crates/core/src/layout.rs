//! Center–surround receptive-field geometry.
//!
//! The sensor is tiled into rectangular center regions (edge tiles truncated),
//! one receptive field per tile, numbered row-major. A field's surround is a
//! sparse lattice of pixels taken from every neighboring tile within the
//! configured ring depth: pixel `(x, y)` of a neighbor belongs to the surround
//! when `x % stride == phase_x` and `y % stride == phase_y`, where the phase
//! pair is a fixed hash of `(rf_id, neighbor_id)`. Surround pixels stay owned
//! by their own center, so one pixel may feed several surrounds.

use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};

pub type RfId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pixel {
    pub x: u32,
    pub y: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutConfig {
    pub width: usize,
    pub height: usize,
    pub center_w: usize,
    pub center_h: usize,
    pub surround_stride: usize,
    /// Chebyshev ring depth, in tiles, that contributes surround pixels.
    pub neighborhood: usize,
}

impl LayoutConfig {
    pub const DEFAULT_CENTER: usize = 8;
    pub const DEFAULT_STRIDE: usize = 2;
    pub const DEFAULT_NEIGHBORHOOD: usize = 1;

    pub fn new(width: usize, height: usize, center_w: usize, center_h: usize) -> Self {
        LayoutConfig {
            width,
            height,
            center_w,
            center_h,
            surround_stride: Self::DEFAULT_STRIDE,
            neighborhood: Self::DEFAULT_NEIGHBORHOOD,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.surround_stride = stride;
        self
    }

    pub fn with_neighborhood(mut self, depth: usize) -> Self {
        self.neighborhood = depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("layout.width", "sensor must be at least 1x1"));
        }
        if self.width > u32::MAX as usize || self.height > u32::MAX as usize {
            return Err(Error::config("layout.width", "sensor too large"));
        }
        if self.center_w == 0 || self.center_w > self.width {
            return Err(Error::config(
                "layout.center_w",
                format!("must lie in [1, {}]", self.width),
            ));
        }
        if self.center_h == 0 || self.center_h > self.height {
            return Err(Error::config(
                "layout.center_h",
                format!("must lie in [1, {}]", self.height),
            ));
        }
        if self.surround_stride < 2 {
            return Err(Error::config("layout.surround_stride", "must be at least 2"));
        }
        if self.neighborhood == 0 {
            return Err(Error::config("layout.neighborhood", "must be at least 1"));
        }
        Ok(())
    }

    fn grid(&self) -> (usize, usize) {
        (
            self.width.div_ceil(self.center_w),
            self.height.div_ceil(self.center_h),
        )
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }

    pub fn area(&self) -> usize {
        (self.x1 - self.x0 + 1) as usize * (self.y1 - self.y0 + 1) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceptiveField {
    pub id: RfId,
    /// Tile coordinates in the region grid.
    pub tile: (u32, u32),
    pub bounds: Rect,
    /// Linear pixel indices (`y * width + x`), ascending.
    pub center: Vec<u32>,
    /// Linear pixel indices, ascending.
    pub surround: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Center,
    Surround,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RfLayout {
    cfg: LayoutConfig,
    grid: (usize, usize),
    fields: Vec<ReceptiveField>,
    /// Owning center per pixel; `u32::MAX` when the pixel has no owner.
    owner: Vec<RfId>,
    surround_offsets: Vec<u32>,
    surround_users: Vec<RfId>,
}

const NO_OWNER: RfId = RfId::MAX;

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Lattice phase of the surround samples that `rf` draws from `neighbor`.
pub fn surround_phase(rf: RfId, neighbor: RfId, stride: usize) -> (usize, usize) {
    let h = mix64((u64::from(rf) << 32) | u64::from(neighbor));
    let s = stride as u64;
    ((h % s) as usize, ((h / s) % s) as usize)
}

/// Tiles the sensor and assigns interleaved surrounds.
pub fn build_layout(cfg: &LayoutConfig) -> Result<RfLayout> {
    cfg.validate()?;
    let (gw, gh) = cfg.grid();
    let width = cfg.width;
    let stride = cfg.surround_stride;
    let depth = cfg.neighborhood as isize;

    let tile_bounds = |tx: usize, ty: usize| Rect {
        x0: (tx * cfg.center_w) as u32,
        y0: (ty * cfg.center_h) as u32,
        x1: (((tx + 1) * cfg.center_w).min(cfg.width) - 1) as u32,
        y1: (((ty + 1) * cfg.center_h).min(cfg.height) - 1) as u32,
    };

    let mut fields = Vec::with_capacity(gw * gh);
    for ty in 0..gh {
        for tx in 0..gw {
            let id = (ty * gw + tx) as RfId;
            let bounds = tile_bounds(tx, ty);
            let center = rect_indices(&bounds, width);

            let mut surround = Vec::new();
            for ny in (ty as isize - depth)..=(ty as isize + depth) {
                for nx in (tx as isize - depth)..=(tx as isize + depth) {
                    if (nx, ny) == (tx as isize, ty as isize)
                        || nx < 0
                        || ny < 0
                        || nx >= gw as isize
                        || ny >= gh as isize
                    {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    let neighbor = (ny * gw + nx) as RfId;
                    let (px, py) = surround_phase(id, neighbor, stride);
                    let nb = tile_bounds(nx, ny);
                    for y in nb.y0..=nb.y1 {
                        if y as usize % stride != py {
                            continue;
                        }
                        for x in nb.x0..=nb.x1 {
                            if x as usize % stride == px {
                                surround.push(y * width as u32 + x);
                            }
                        }
                    }
                }
            }
            surround.sort_unstable();

            fields.push(ReceptiveField {
                id,
                tile: (tx as u32, ty as u32),
                bounds,
                center,
                surround,
            });
        }
    }
    Ok(RfLayout::assemble(cfg.clone(), fields))
}

fn rect_indices(r: &Rect, width: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(r.area());
    for y in r.y0..=r.y1 {
        for x in r.x0..=r.x1 {
            out.push(y * width as u32 + x);
        }
    }
    out
}

/// One broken layout invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutViolation {
    PixelOutOfBounds { rf: RfId, index: u32 },
    Uncovered { pixel: Pixel },
    MultipleCenters { pixel: Pixel, rfs: Vec<RfId> },
    SurroundInOwnCenter { rf: RfId, pixel: Pixel },
    SurroundOutsideRing { rf: RfId, pixel: Pixel },
    EmptyInteriorSurround { rf: RfId },
}

impl fmt::Display for LayoutViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutViolation::PixelOutOfBounds { rf, index } => {
                write!(f, "rf {rf}: pixel index {index} outside the sensor")
            }
            LayoutViolation::Uncovered { pixel } => {
                write!(f, "pixel ({}, {}) belongs to no center", pixel.x, pixel.y)
            }
            LayoutViolation::MultipleCenters { pixel, rfs } => {
                write!(f, "pixel ({}, {}) in centers {rfs:?}", pixel.x, pixel.y)
            }
            LayoutViolation::SurroundInOwnCenter { rf, pixel } => {
                write!(f, "rf {rf}: surround pixel ({}, {}) lies in its own center", pixel.x, pixel.y)
            }
            LayoutViolation::SurroundOutsideRing { rf, pixel } => {
                write!(f, "rf {rf}: surround pixel ({}, {}) outside the neighbor ring", pixel.x, pixel.y)
            }
            LayoutViolation::EmptyInteriorSurround { rf } => {
                write!(f, "interior rf {rf} has an empty surround")
            }
        }
    }
}

impl RfLayout {
    /// Assembles a layout from explicit fields without checking it. Use
    /// [`validate_layout`] to audit the result.
    pub fn from_parts(cfg: LayoutConfig, fields: Vec<ReceptiveField>) -> Self {
        Self::assemble(cfg, fields)
    }

    fn assemble(cfg: LayoutConfig, fields: Vec<ReceptiveField>) -> Self {
        let n = cfg.width * cfg.height;
        let grid = cfg.grid();
        let mut owner = vec![NO_OWNER; n];
        for f in &fields {
            for &p in &f.center {
                if let Some(slot) = owner.get_mut(p as usize) {
                    if *slot == NO_OWNER {
                        *slot = f.id;
                    }
                }
            }
        }
        let mut counts = vec![0u32; n + 1];
        for f in &fields {
            for &p in &f.surround {
                if (p as usize) < n {
                    counts[p as usize + 1] += 1;
                }
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut users = vec![0; counts[n] as usize];
        for f in &fields {
            for &p in &f.surround {
                if (p as usize) < n {
                    users[fill[p as usize] as usize] = f.id;
                    fill[p as usize] += 1;
                }
            }
        }
        RfLayout {
            cfg,
            grid,
            fields,
            owner,
            surround_offsets: counts,
            surround_users: users,
        }
    }

    pub fn config(&self) -> &LayoutConfig {
        &self.cfg
    }

    pub fn width(&self) -> usize {
        self.cfg.width
    }

    pub fn height(&self) -> usize {
        self.cfg.height
    }

    /// Region grid size in tiles.
    pub fn grid(&self) -> (usize, usize) {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[ReceptiveField] {
        &self.fields
    }

    pub fn field(&self, rf: RfId) -> Result<&ReceptiveField> {
        self.fields.get(rf as usize).ok_or(Error::UnknownRf(rf))
    }

    /// Owning center of pixel `(x, y)`.
    pub fn owner_of(&self, x: u32, y: u32) -> Option<RfId> {
        let i = y as usize * self.cfg.width + x as usize;
        self.owner.get(i).copied().filter(|&o| o != NO_OWNER)
    }

    /// Fields that sample pixel `(x, y)` as surround.
    pub fn surround_users_of(&self, x: u32, y: u32) -> &[RfId] {
        let i = y as usize * self.cfg.width + x as usize;
        let (a, b) = (self.surround_offsets[i], self.surround_offsets[i + 1]);
        &self.surround_users[a as usize..b as usize]
    }

    /// Whether every tile within the ring depth exists.
    pub fn is_interior(&self, rf: RfId) -> bool {
        let Ok(f) = self.field(rf) else { return false };
        let d = self.cfg.neighborhood;
        let (tx, ty) = (f.tile.0 as usize, f.tile.1 as usize);
        tx >= d && ty >= d && tx + d < self.grid.0 && ty + d < self.grid.1
    }

    pub fn pixel(&self, index: u32) -> Pixel {
        let w = self.cfg.width as u32;
        Pixel {
            x: index % w,
            y: index / w,
        }
    }

    /// Pixels of `rf` in the given role, row-major.
    pub fn pixels_of(&self, rf: RfId, role: Role) -> Result<Vec<Pixel>> {
        let f = self.field(rf)?;
        let set = match role {
            Role::Center => &f.center,
            Role::Surround => &f.surround,
        };
        Ok(set.iter().map(|&i| self.pixel(i)).collect())
    }

    /// Writes one line per field:
    /// `rf_id, cx0, cy0, cx1, cy1, n_center, n_surround: x y; x y; ...`
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for f in &self.fields {
            let b = f.bounds;
            write!(
                out,
                "{}, {}, {}, {}, {}, {}, {}:",
                f.id,
                b.x0,
                b.y0,
                b.x1,
                b.y1,
                f.center.len(),
                f.surround.len()
            )?;
            for (k, &i) in f.surround.iter().enumerate() {
                let p = self.pixel(i);
                let sep = if k == 0 { " " } else { "; " };
                write!(out, "{sep}{} {}", p.x, p.y)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }
}

/// Audits a layout; an empty list means every invariant holds.
pub fn validate_layout(layout: &RfLayout) -> Vec<LayoutViolation> {
    let cfg = &layout.cfg;
    let n = cfg.width * cfg.height;
    let mut out = Vec::new();

    let mut centers_of: Vec<Vec<RfId>> = vec![Vec::new(); n];
    for f in &layout.fields {
        for &p in f.center.iter().chain(&f.surround) {
            if p as usize >= n {
                out.push(LayoutViolation::PixelOutOfBounds { rf: f.id, index: p });
            }
        }
        for &p in &f.center {
            if let Some(slot) = centers_of.get_mut(p as usize) {
                slot.push(f.id);
            }
        }
    }
    for (i, rfs) in centers_of.iter().enumerate() {
        let pixel = layout.pixel(i as u32);
        match rfs.len() {
            0 => out.push(LayoutViolation::Uncovered { pixel }),
            1 => {}
            _ => out.push(LayoutViolation::MultipleCenters {
                pixel,
                rfs: rfs.clone(),
            }),
        }
    }

    let depth = cfg.neighborhood as i64;
    for f in &layout.fields {
        for &p in &f.surround {
            let Some(owners) = centers_of.get(p as usize) else {
                continue;
            };
            let pixel = layout.pixel(p);
            if owners.contains(&f.id) {
                out.push(LayoutViolation::SurroundInOwnCenter { rf: f.id, pixel });
                continue;
            }
            let in_ring = owners.iter().any(|&o| {
                layout.fields.get(o as usize).is_some_and(|g| {
                    let dx = (i64::from(g.tile.0) - i64::from(f.tile.0)).abs();
                    let dy = (i64::from(g.tile.1) - i64::from(f.tile.1)).abs();
                    dx.max(dy) <= depth
                })
            });
            if !in_ring {
                out.push(LayoutViolation::SurroundOutsideRing { rf: f.id, pixel });
            }
        }
        if f.surround.is_empty() && layout.is_interior(f.id) {
            out.push(LayoutViolation::EmptyInteriorSurround { rf: f.id });
        }
    }
    out
}
