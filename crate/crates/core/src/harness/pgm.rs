use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::separated::ClusterLabels;

/// Gray value of pixels outside the annotated mask.
pub const MASK_GRAY: u8 = 255;

/// `⌊254·k/(K−1)⌋`, with `K = 1` mapped to 0.
pub fn gray_level(label: usize, k: usize) -> u8 {
    if k <= 1 {
        0
    } else {
        (254 * label / (k - 1)) as u8
    }
}

/// Inverse of [`gray_level`] by nearest level.
pub fn label_of_gray(gray: u8, k: usize) -> Option<usize> {
    if gray == MASK_GRAY {
        return None;
    }
    (0..k.max(1)).min_by_key(|&l| (gray_level(l, k) as i32 - gray as i32).abs())
}

pub fn label_map_text(labels: &ClusterLabels, grid: &GridGeometry) -> Result<String> {
    if labels.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} annotated pixels",
            labels.len(),
            grid.len()
        )));
    }
    let (h, w) = (grid.height(), grid.width());
    let mut image = vec![MASK_GRAY; h * w];
    for (m, &(i, j)) in grid.pixels().iter().enumerate() {
        image[i * w + j] = gray_level(labels.as_slice()[m], labels.k());
    }
    let mut out = format!("P2\n{w} {h}\n255\n");
    for row in image.chunks(w) {
        let line: Vec<String> = row.iter().map(|g| g.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    Ok(out)
}

/// Writes an ASCII PGM with one gray level per cluster.
pub fn emit_label_map(labels: &ClusterLabels, grid: &GridGeometry, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, label_map_text(labels, grid)?)?;
    Ok(())
}

/// Gray image as `(height, width, row-major values)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub height: usize,
    pub width: usize,
    pub values: Vec<u16>,
}

impl GrayImage {
    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.values[i * self.width + j]
    }
}

/// Reads a P2 file; `#` comments are skipped.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut tokens = text
        .lines()
        .enumerate()
        .flat_map(|(n, l)| l.split('#').next().unwrap_or("").split_whitespace().map(move |t| (n + 1, t)));
    let (line, magic) = tokens.next().ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    if magic != "P2" {
        return Err(Error::parse(path, line, format!("expected P2, found {magic:?}")));
    }
    let mut number = |what: &str| -> Result<(usize, u16)> {
        let (line, t) = tokens.next().ok_or_else(|| Error::parse(path, 0, format!("missing {what}")))?;
        t.parse().map(|v| (line, v)).map_err(|_| Error::parse(path, line, format!("bad {what} {t:?}")))
    };
    let (_, width) = number("width")?;
    let (_, height) = number("height")?;
    let (line, maxval) = number("maxval")?;
    if maxval == 0 {
        return Err(Error::parse(path, line, "maxval must be positive"));
    }
    let count = width as usize * height as usize;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, v) = number("pixel")?;
        if v > maxval {
            return Err(Error::parse(path, line, format!("pixel {v} exceeds maxval {maxval}")));
        }
        values.push(v);
    }
    Ok(GrayImage { height: height as usize, width: width as usize, values })
}

/// Decodes a label map back to per-row labels of `grid`.
pub fn decode_label_map(image: &GrayImage, grid: &GridGeometry, k: usize) -> Result<ClusterLabels> {
    if (image.height, image.width) != (grid.height(), grid.width()) {
        return Err(Error::InvalidArgument(format!(
            "image is {}x{}, grid is {}x{}",
            image.height,
            image.width,
            grid.height(),
            grid.width()
        )));
    }
    let labels = grid
        .pixels()
        .iter()
        .map(|&(i, j)| {
            let g = image.get(i, j);
            u8::try_from(g)
                .ok()
                .and_then(|g| label_of_gray(g, k))
                .ok_or_else(|| Error::InvalidArgument(format!("pixel ({i}, {j}) has non-label gray {g}")))
        })
        .collect::<Result<Vec<_>>>()?;
    ClusterLabels::new(labels, k)
}
