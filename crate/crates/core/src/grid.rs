//! Mapping between data rows and pixels of a 2-D acquisition grid.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Bijection between data rows `m` and the annotated (mask-true) cells of a
/// `height × width` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridGeometry {
    height: usize,
    width: usize,
    pixel_of_row: Vec<(usize, usize)>,
    row_of_pixel: Vec<Option<usize>>,
}

impl GridGeometry {
    /// Full rectangular grid with rows enumerated in row-major pixel order.
    pub fn full(height: usize, width: usize) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|i| (0..width).map(move |j| (i, j)))
            .collect();
        Self::from_pixels(height, width, pixels)
    }

    /// Geometry where row `m` sits at `pixels[m]`; every other cell is masked.
    pub fn from_pixels(height: usize, width: usize, pixels: Vec<(usize, usize)>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 1x1, got {height}x{width}"
            )));
        }
        if pixels.is_empty() {
            return Err(Error::InvalidArgument("grid has no annotated pixels".into()));
        }
        let mut row_of_pixel = vec![None; height * width];
        for (m, &(i, j)) in pixels.iter().enumerate() {
            if i >= height || j >= width {
                return Err(Error::InvalidArgument(format!(
                    "pixel ({i}, {j}) of row {m} outside {height}x{width} grid"
                )));
            }
            let slot = &mut row_of_pixel[i * width + j];
            if let Some(first) = *slot {
                return Err(Error::DuplicatePixel {
                    i,
                    j,
                    first,
                    second: m,
                });
            }
            *slot = Some(m);
        }
        Ok(Self {
            height,
            width,
            pixel_of_row: pixels,
            row_of_pixel,
        })
    }

    /// Builds a geometry from a boolean mask, enumerating mask-true cells in
    /// row-major order.
    pub fn from_mask(height: usize, width: usize, mask: &[bool]) -> Result<Self> {
        if mask.len() != height * width {
            return Err(Error::InvalidArgument(format!(
                "mask has {} cells, grid has {}",
                mask.len(),
                height * width
            )));
        }
        let pixels = (0..height)
            .flat_map(|i| (0..width).map(move |j| (i, j)))
            .filter(|&(i, j)| mask[i * width + j])
            .collect();
        Self::from_pixels(height, width, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of annotated pixels, i.e. data rows.
    pub fn len(&self) -> usize {
        self.pixel_of_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixel_of_row.is_empty()
    }

    pub fn pixel_of_row(&self, m: usize) -> (usize, usize) {
        self.pixel_of_row[m]
    }

    /// Row index of pixel `(i, j)`; `None` when the pixel is outside the grid
    /// or masked.
    pub fn row_of_pixel(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.height || j >= self.width {
            return None;
        }
        self.row_of_pixel[i * self.width + j]
    }

    /// Signed-offset lookup used by stencils.
    pub(crate) fn row_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 {
            return None;
        }
        self.row_of_pixel(i as usize, j as usize)
    }

    pub fn in_mask(&self, i: usize, j: usize) -> bool {
        self.row_of_pixel(i, j).is_some()
    }

    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixel_of_row
    }

    pub fn read_text(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
        let parse_all = |line: &str, lno: usize| -> Result<Vec<usize>> {
            line.split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|e| Error::parse(path, lno, format!("bad integer {t:?}: {e}")))
                })
                .collect()
        };
        let dims = parse_all(header, hline + 1)?;
        let [height, width] = dims[..] else {
            return Err(Error::parse(path, hline + 1, "header must be `d1 d2`"));
        };
        let mut entries = Vec::new();
        for (lno, line) in lines {
            let vals = parse_all(line, lno + 1)?;
            let [m, i, j] = vals[..] else {
                return Err(Error::parse(path, lno + 1, "expected `m i j`"));
            };
            entries.push((lno + 1, m, i, j));
        }
        let n = entries.len();
        let mut pixels = vec![None; n];
        for &(lno, m, i, j) in &entries {
            if m >= n {
                return Err(Error::parse(path, lno, format!("row index {m} out of range 0..{n}")));
            }
            if pixels[m].replace((i, j)).is_some() {
                return Err(Error::parse(path, lno, format!("row index {m} listed twice")));
            }
        }
        let pixels = pixels.into_iter().map(|p| p.expect("every row listed")).collect();
        Self::from_pixels(height, width, pixels)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.height, self.width);
        for (m, &(i, j)) in self.pixel_of_row.iter().enumerate() {
            writeln!(out, "{m} {i} {j}").expect("writing to a String cannot fail");
        }
        out
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_grid_is_row_major() {
        let g = GridGeometry::full(2, 3).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.pixel_of_row(4), (1, 1));
        assert_eq!(g.row_of_pixel(1, 2), Some(5));
        assert_eq!(g.row_of_pixel(2, 0), None);
    }

    #[test]
    fn duplicates_fail_fast() {
        let err = GridGeometry::from_pixels(2, 2, vec![(0, 0), (1, 1), (0, 0)]).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicatePixel {
                first: 0,
                second: 2,
                ..
            }
        ));
        assert!(GridGeometry::from_pixels(2, 2, vec![(2, 0)]).is_err());
    }

    #[test]
    fn mask_with_hole() {
        let g = GridGeometry::from_mask(2, 2, &[true, true, true, false]).unwrap();
        assert_eq!(g.len(), 3);
        assert!(!g.in_mask(1, 1));
        assert_eq!(g.row_of_pixel(1, 0), Some(2));
    }

    #[test]
    fn text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        let g = GridGeometry::from_pixels(3, 3, vec![(2, 2), (0, 1), (1, 0)]).unwrap();
        g.write_text(&path).unwrap();
        assert_eq!(GridGeometry::read_text(&path).unwrap(), g);
    }

    proptest! {
        #[test]
        fn row_pixel_round_trip(h in 1usize..8, w in 1usize..8, bits in proptest::collection::vec(any::<bool>(), 64)) {
            let mut mask: Vec<bool> = bits[..h * w].to_vec();
            mask[0] = true;
            let g = GridGeometry::from_mask(h, w, &mask).unwrap();
            for m in 0..g.len() {
                let (i, j) = g.pixel_of_row(m);
                prop_assert_eq!(g.row_of_pixel(i, j), Some(m));
            }
        }
    }
}
