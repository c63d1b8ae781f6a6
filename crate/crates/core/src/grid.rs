//! House maps as typed cell grids.
//!
//! A map file is a glyph grid (`#` wall, `A`..`Z` zoned free cells, `D`
//! door), a blank line, then a legend assigning each zone glyph a name
//! and an anchor cell, and each door cell a zone:
//!
//! ```text
//! #####
//! #AAD#
//! #####
//!
//! A=studio,1,1
//! D=studio,1,3
//! ```
//!
//! Coordinates are `row,col`, 0-indexed from the top-left. Zone ids are
//! assigned in ascending glyph order, so feature layouts do not depend
//! on legend line order.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Meters per cell edge when the caller does not specify one.
pub const DEFAULT_CELL_SIZE: f64 = 0.5;

/// Semantic class of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    Free,
    Wall,
    Door,
}

/// Identifier of a zone, dense from 0 in ascending glyph order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ZoneId(pub u8);

impl ZoneId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A named region of free cells with a designated goal cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    pub id: ZoneId,
    pub glyph: char,
    pub name: String,
    /// Canonical goal cell `(row, col)`; always a plain free cell inside
    /// the zone.
    pub anchor: (usize, usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("malformed map at row {row}, col {col}: {reason}")]
    Malformed {
        row: usize,
        col: usize,
        reason: String,
    },
    #[error("free cells are not connected: cell at row {row}, col {col} is unreachable")]
    Disconnected { row: usize, col: usize },
    #[error("zone {zone} has no usable anchor at row {row}, col {col}")]
    MissingAnchor {
        zone: String,
        row: usize,
        col: usize,
    },
}

fn malformed(row: usize, col: usize, reason: impl Into<String>) -> MapError {
    MapError::Malformed {
        row,
        col,
        reason: reason.into(),
    }
}

/// The parsed house: grid geometry, zones, and cell metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cell_size: f64,
    cells: Vec<CellKind>,
    zone_of: Vec<Option<ZoneId>>,
    zones: Vec<Zone>,
}

impl GridMap {
    /// Parse a map file with the default cell size.
    pub fn parse(text: &str) -> Result<Self, MapError> {
        Self::parse_with_cell_size(text, DEFAULT_CELL_SIZE)
    }

    /// Parse a map file; `cell_size` is configuration, not file content.
    pub fn parse_with_cell_size(text: &str, cell_size: f64) -> Result<Self, MapError> {
        let mut lines = text.lines();
        let mut grid_rows: Vec<&str> = Vec::new();
        for line in lines.by_ref() {
            if line.is_empty() {
                break;
            }
            grid_rows.push(line);
        }
        if grid_rows.is_empty() {
            return Err(malformed(0, 0, "empty grid block"));
        }
        let height = grid_rows.len();
        let width = grid_rows[0].chars().count();
        if width < 2 || height < 2 {
            return Err(malformed(0, 0, "grid must be at least 2x2"));
        }

        let mut cells = vec![CellKind::Wall; width * height];
        let mut glyphs = vec![' '; width * height];
        for (r, row) in grid_rows.iter().enumerate() {
            let row_len = row.chars().count();
            if row_len != width {
                return Err(malformed(
                    r,
                    row_len.min(width),
                    format!("ragged row: expected width {width}, got {row_len}"),
                ));
            }
            for (c, glyph) in row.chars().enumerate() {
                let kind = match glyph {
                    '#' => CellKind::Wall,
                    'D' => CellKind::Door,
                    '.' => {
                        return Err(malformed(r, c, "unzoned free cell '.' (assign a zone glyph)"))
                    }
                    g if g.is_ascii_uppercase() => CellKind::Free,
                    g => return Err(malformed(r, c, format!("unknown glyph '{g}'"))),
                };
                let border = r == 0 || c == 0 || r == height - 1 || c == width - 1;
                if border && kind != CellKind::Wall {
                    return Err(malformed(r, c, "border cell must be a wall"));
                }
                cells[r * width + c] = kind;
                glyphs[r * width + c] = glyph;
            }
        }

        // Legend: zone glyph lines and one line per door cell.
        let mut zone_legend: Vec<(char, String, usize, usize)> = Vec::new();
        let mut door_legend: Vec<(String, usize, usize)> = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (glyph_part, rest) = line
                .split_once('=')
                .ok_or_else(|| malformed(height + 1 + i, 0, "legend line missing '='"))?;
            let mut glyph_chars = glyph_part.chars();
            let glyph = glyph_chars.next().unwrap_or(' ');
            if glyph_chars.next().is_some() || !glyph.is_ascii_uppercase() {
                return Err(malformed(
                    height + 1 + i,
                    0,
                    format!("bad legend glyph '{glyph_part}'"),
                ));
            }
            let fields: Vec<&str> = rest.split(',').collect();
            if fields.len() != 3 {
                return Err(malformed(
                    height + 1 + i,
                    0,
                    "legend line needs 'GLYPH=name,row,col'",
                ));
            }
            let name = fields[0].to_string();
            if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
                return Err(malformed(
                    height + 1 + i,
                    0,
                    format!("zone name '{name}' must be [A-Za-z0-9_]+"),
                ));
            }
            let row: usize = fields[1]
                .parse()
                .map_err(|_| malformed(height + 1 + i, 0, "bad legend row"))?;
            let col: usize = fields[2]
                .parse()
                .map_err(|_| malformed(height + 1 + i, 0, "bad legend col"))?;
            if glyph == 'D' {
                door_legend.push((name, row, col));
            } else {
                if zone_legend.iter().any(|(g, ..)| *g == glyph) {
                    return Err(malformed(
                        height + 1 + i,
                        0,
                        format!("duplicate legend entry for zone '{glyph}'"),
                    ));
                }
                zone_legend.push((glyph, name, row, col));
            }
        }

        // Zones in ascending glyph order, ids dense from 0.
        zone_legend.sort_by_key(|(g, ..)| *g);
        if zone_legend.len() > u8::MAX as usize {
            return Err(malformed(0, 0, "too many zones"));
        }
        let mut zones: Vec<Zone> = Vec::with_capacity(zone_legend.len());
        for (i, (glyph, name, row, col)) in zone_legend.iter().enumerate() {
            if zones.iter().any(|z| z.name == *name) {
                return Err(malformed(0, 0, format!("duplicate zone name '{name}'")));
            }
            zones.push(Zone {
                id: ZoneId(i as u8),
                glyph: *glyph,
                name: name.clone(),
                anchor: (*row, *col),
            });
        }

        // Assign each traversable cell its zone.
        let mut zone_of: Vec<Option<ZoneId>> = vec![None; width * height];
        for r in 0..height {
            for c in 0..width {
                let idx = r * width + c;
                match cells[idx] {
                    CellKind::Wall => {}
                    CellKind::Free => {
                        let glyph = glyphs[idx];
                        let zone = zones.iter().find(|z| z.glyph == glyph).ok_or(
                            MapError::MissingAnchor {
                                zone: glyph.to_string(),
                                row: r,
                                col: c,
                            },
                        )?;
                        zone_of[idx] = Some(zone.id);
                    }
                    CellKind::Door => {
                        let entry = door_legend
                            .iter()
                            .find(|(_, dr, dc)| *dr == r && *dc == c)
                            .ok_or_else(|| malformed(r, c, "door cell has no legend entry"))?;
                        let zone = zones.iter().find(|z| z.name == entry.0).ok_or_else(|| {
                            malformed(r, c, format!("door references unknown zone '{}'", entry.0))
                        })?;
                        zone_of[idx] = Some(zone.id);
                    }
                }
            }
        }
        for (name, row, col) in &door_legend {
            let in_bounds = *row < height && *col < width;
            if !in_bounds || cells[row * width + col] != CellKind::Door {
                return Err(malformed(
                    *row,
                    *col,
                    format!("door legend for zone '{name}' does not match a door cell"),
                ));
            }
        }
        let mut door_cells: Vec<(usize, usize)> = door_legend.iter().map(|d| (d.1, d.2)).collect();
        door_cells.sort_unstable();
        door_cells.dedup();
        if door_cells.len() != door_legend.len() {
            return Err(malformed(0, 0, "duplicate door legend entries"));
        }

        // Every zone glyph in the legend must appear in the grid, and the
        // anchor must be a plain free cell of that zone.
        for zone in &zones {
            if !glyphs.contains(&zone.glyph) {
                return Err(malformed(
                    0,
                    0,
                    format!("legend zone '{}' has no cells in the grid", zone.glyph),
                ));
            }
            let (ar, ac) = zone.anchor;
            let ok = ar < height
                && ac < width
                && cells[ar * width + ac] == CellKind::Free
                && zone_of[ar * width + ac] == Some(zone.id);
            if !ok {
                return Err(MapError::MissingAnchor {
                    zone: zone.name.clone(),
                    row: ar,
                    col: ac,
                });
            }
        }

        let map = GridMap {
            width,
            height,
            cell_size,
            cells,
            zone_of,
            zones,
        };
        map.check_connected()?;
        Ok(map)
    }

    fn check_connected(&self) -> Result<(), MapError> {
        let first = match self.free_cells().next() {
            Some(cell) => cell,
            None => return Err(malformed(0, 0, "map has no free cells")),
        };
        let mut seen = vec![false; self.width * self.height];
        let mut queue = alloc::collections::VecDeque::new();
        seen[first.0 * self.width + first.1] = true;
        queue.push_back(first);
        while let Some((r, c)) = queue.pop_front() {
            for (nr, nc) in self.neighbors4(r, c) {
                let idx = nr * self.width + nc;
                if !seen[idx] && self.cells[idx] != CellKind::Wall {
                    seen[idx] = true;
                    queue.push_back((nr, nc));
                }
            }
        }
        for (r, c) in self.free_cells() {
            if !seen[r * self.width + c] {
                return Err(MapError::Disconnected { row: r, col: c });
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn zone_named(&self, name: &str) -> Option<&Zone> {
        self.zones.iter().find(|z| z.name == name)
    }

    pub fn zone(&self, id: ZoneId) -> &Zone {
        &self.zones[id.index()]
    }

    pub fn kind(&self, row: usize, col: usize) -> CellKind {
        self.cells[row * self.width + col]
    }

    pub fn zone_of(&self, row: usize, col: usize) -> Option<ZoneId> {
        self.zone_of[row * self.width + col]
    }

    pub fn is_traversable(&self, row: usize, col: usize) -> bool {
        self.kind(row, col) != CellKind::Wall
    }

    /// All non-wall cells in row-major order.
    pub fn free_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |r| {
            (0..self.width).filter_map(move |c| self.is_traversable(r, c).then_some((r, c)))
        })
    }

    pub fn neighbors4(&self, row: usize, col: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (w, h) = (self.width, self.height);
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(4);
        if row > 0 {
            out.push((row - 1, col));
        }
        if row + 1 < h {
            out.push((row + 1, col));
        }
        if col > 0 {
            out.push((row, col - 1));
        }
        if col + 1 < w {
            out.push((row, col + 1));
        }
        out.into_iter()
    }

    /// One `(zone id, anchor cell)` pair per zone, ascending by id.
    pub fn goal_candidates(&self) -> Vec<(ZoneId, (usize, usize))> {
        self.zones.iter().map(|z| (z.id, z.anchor)).collect()
    }

    /// Render back to the file format. `parse(to_text(m)) == m`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.height {
            for c in 0..self.width {
                let glyph = match self.kind(r, c) {
                    CellKind::Wall => '#',
                    CellKind::Door => 'D',
                    CellKind::Free => {
                        let zone = self.zone_of(r, c).expect("free cell always zoned");
                        self.zones[zone.index()].glyph
                    }
                };
                out.push(glyph);
            }
            out.push('\n');
        }
        out.push('\n');
        for zone in &self.zones {
            out.push_str(&format!(
                "{}={},{},{}\n",
                zone.glyph, zone.name, zone.anchor.0, zone.anchor.1
            ));
        }
        let mut doors: Vec<(usize, usize)> = (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .filter(|&(r, c)| self.kind(r, c) == CellKind::Door)
            .collect();
        doors.sort_unstable();
        for (r, c) in doors {
            let zone = self.zone_of(r, c).expect("door always zoned");
            out.push_str(&format!("D={},{},{}\n", self.zones[zone.index()].name, r, c));
        }
        out
    }
}

/// Per-cell feature vectors consumed by the reward model.
///
/// Layout: one-hot cell class (free, wall, door), wall distance, zone
/// one-hot, normalized x, normalized y. Every entry is in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureField {
    width: usize,
    dim: usize,
    zone_count: usize,
    data: Vec<f64>,
}

impl FeatureField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn zone_count(&self) -> usize {
        self.zone_count
    }

    pub fn at(&self, row: usize, col: usize) -> &[f64] {
        let start = (row * self.width + col) * self.dim;
        &self.data[start..start + self.dim]
    }

    /// Index of a named feature slot; zone slots are `zone:<name>`.
    pub fn slot(&self, name: &str, map: &GridMap) -> Option<usize> {
        match name {
            "class:free" => Some(0),
            "class:wall" => Some(1),
            "class:door" => Some(2),
            "dist_wall" => Some(3),
            "x" => Some(4 + self.zone_count),
            "y" => Some(5 + self.zone_count),
            _ => {
                let zone_name = name.strip_prefix("zone:")?;
                let zone = map.zone_named(zone_name)?;
                Some(4 + zone.id.index())
            }
        }
    }
}

/// Build the per-cell feature field for a map.
///
/// Wall distance is a multi-source BFS through traversable cells from
/// every wall, normalized by the map maximum; walls keep an all-zero
/// vector apart from their class slot.
pub fn features(map: &GridMap) -> FeatureField {
    let (w, h) = (map.width(), map.height());
    let zone_count = map.zones().len();
    let dim = 6 + zone_count;
    let mut dist = vec![0usize; w * h];
    let mut queue = alloc::collections::VecDeque::new();
    for r in 0..h {
        for c in 0..w {
            if map.kind(r, c) == CellKind::Wall {
                queue.push_back((r, c));
            }
        }
    }
    let mut visited = vec![false; w * h];
    for &(r, c) in &queue {
        visited[r * w + c] = true;
    }
    while let Some((r, c)) = queue.pop_front() {
        for (nr, nc) in map.neighbors4(r, c) {
            let idx = nr * w + nc;
            if !visited[idx] && map.is_traversable(nr, nc) {
                visited[idx] = true;
                dist[idx] = dist[r * w + c] + 1;
                queue.push_back((nr, nc));
            }
        }
    }
    let max_dist = map
        .free_cells()
        .map(|(r, c)| dist[r * w + c])
        .max()
        .unwrap_or(1)
        .max(1) as f64;

    let mut data = vec![0.0; w * h * dim];
    for r in 0..h {
        for c in 0..w {
            let base = (r * w + c) * dim;
            let f = &mut data[base..base + dim];
            match map.kind(r, c) {
                CellKind::Wall => {
                    f[1] = 1.0;
                }
                kind => {
                    f[if kind == CellKind::Free { 0 } else { 2 }] = 1.0;
                    f[3] = dist[r * w + c] as f64 / max_dist;
                    if let Some(zone) = map.zone_of(r, c) {
                        f[4 + zone.index()] = 1.0;
                    }
                    f[4 + zone_count] = c as f64 / (w - 1) as f64;
                    f[5 + zone_count] = r as f64 / (h - 1) as f64;
                }
            }
        }
    }
    FeatureField {
        width: w,
        dim,
        zone_count,
        data,
    }
}
