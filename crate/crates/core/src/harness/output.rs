use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::fem::SourceBasis;

/// Rows of a CSV table; every value is written with Rust's shortest
/// round-trip formatting.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        ensure_parent(path)?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats a list of indices as `a;b;c`.
pub fn join_indices(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Anchors of the fixed colormap (viridis samples at 0, ¼, ½, ¾, 1).
const COLORMAP: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// Colormap value at `t ∈ [0, 1]`.
pub fn colormap(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let s = t * (COLORMAP.len() - 1) as f64;
    let i = (s.floor() as usize).min(COLORMAP.len() - 2);
    let f = s - i as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        out[c] = (COLORMAP[i][c] * (1.0 - f) + COLORMAP[i + 1][c] * f).round() as u8;
    }
    out
}

const PIXELS_PER_CELL: u32 = 16;

/// Writes `<stem>.csv` (cell_x, cell_y, value) and `<stem>.png` for a field
/// on the coarse grid. Returns both paths.
pub fn write_heatmap(dir: &Path, stem: &str, basis: &SourceBasis, values: &DVector<f64>) -> Result<Vec<PathBuf>> {
    if values.len() != basis.len() {
        return Err(invalid("heatmap values do not match the source basis"));
    }
    let csv_path = dir.join(format!("{stem}.csv"));
    let png_path = dir.join(format!("{stem}.png"));
    let mut t = Table::new(&["cell_x", "cell_y", "value"]);
    for i in 0..values.len() {
        let (x, y) = basis.cell_position(i);
        t.push(vec![x.to_string(), y.to_string(), values[i].to_string()]);
    }
    t.write(&csv_path)?;

    let side = basis.coarse_per_side() as u32;
    let rows = if basis.dim().as_usize() == 1 { 1 } else { side };
    let height_per_row = if rows == 1 { 3 * PIXELS_PER_CELL } else { PIXELS_PER_CELL };
    let lo = values.min();
    let hi = values.max();
    let span = hi - lo;
    let mut img = RgbImage::new(side * PIXELS_PER_CELL, rows * height_per_row);
    for i in 0..values.len() {
        let (x, y) = basis.cell_position(i);
        let t = if span > 0.0 { (values[i] - lo) / span } else { 0.5 };
        let px = Rgb(colormap(t));
        // y = 0 is the bottom edge of the domain
        let row = rows - 1 - y as u32;
        for dy in 0..height_per_row {
            for dx in 0..PIXELS_PER_CELL {
                img.put_pixel(x as u32 * PIXELS_PER_CELL + dx, row * height_per_row + dy, px);
            }
        }
    }
    ensure_parent(&png_path)?;
    img.save(&png_path)?;
    Ok(vec![csv_path, png_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{Dim, Grid};

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), [68, 1, 84]);
        assert_eq!(colormap(1.0), [253, 231, 37]);
        assert_eq!(colormap(f64::NAN), colormap(0.0));
        assert_eq!(colormap(2.0), colormap(1.0));
    }

    #[test]
    fn heatmap_pairs_csv_and_png() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(Dim::Two, 9).unwrap();
        let basis = SourceBasis::new(&grid, 4).unwrap();
        let v = DVector::from_fn(16, |i, _| i as f64 / 3.0);
        let paths = write_heatmap(dir.path(), "field", &basis, &v).unwrap();
        let mut r = csv::Reader::from_path(&paths[0]).unwrap();
        let back: Vec<f64> = r.records().map(|rec| rec.unwrap()[2].parse().unwrap()).collect();
        assert_eq!(back.as_slice(), v.as_slice());
        let img = image::open(&paths[1]).unwrap().to_rgb8();
        assert_eq!(img.dimensions(), (64, 64));
        // cell 0 sits at the bottom-left corner and holds the minimum
        assert_eq!(img.get_pixel(0, 63).0, colormap(0.0));
        assert_eq!(img.get_pixel(63, 0).0, colormap(1.0));
    }
}
