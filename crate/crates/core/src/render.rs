//! Julia-set rendering: classify a pixel grid by convergence speed to the
//! attracting cycles and emit grayscale images (dark = fast, grey = slow,
//! white = no convergence).

use std::io::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::dynamics::{classify_point, find_attracting_cycles, Classification};
use crate::error::{Error, Result};
use crate::pure::MapParam;
use crate::sphere::SpherePoint;

/// Viewport bound keeping every pixel center finite.
const MAX_EXTENT: f64 = 1e150;

/// A rectangular viewport sampled at pixel centers.
///
/// Pixel (row i, col j) maps to
/// z = center + (2j+1-W)/W * half_width + i(H-1-2i)/H * half_height,
/// with half_height = half_width * H / W (aspect-corrected) and row 0 at the
/// top. The +-offsets place samples at pixel centers, off the symmetry axes;
/// the integer forms negate exactly under j -> W-1-j and i -> H-1-i, which
/// makes mirror symmetry for real parameters bit-exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    center: (f64, f64),
    half_width: f64,
    width_px: usize,
    height_px: usize,
}

impl GridSpec {
    pub fn new(center: Complex64, half_width: f64, width_px: usize, height_px: usize) -> Result<Self> {
        if !center.is_finite() || center.re.abs() > MAX_EXTENT || center.im.abs() > MAX_EXTENT {
            return Err(Error::InvalidGrid(format!(
                "center {center} must be finite with |re|, |im| <= {MAX_EXTENT:e}"
            )));
        }
        if !half_width.is_finite() || half_width <= 0.0 || half_width > MAX_EXTENT {
            return Err(Error::InvalidGrid(format!(
                "half_width {half_width} must be in (0, {MAX_EXTENT:e}]"
            )));
        }
        if width_px == 0 || height_px == 0 {
            return Err(Error::InvalidGrid(format!(
                "pixel dimensions {width_px}x{height_px} must be positive"
            )));
        }
        if height_px > width_px.saturating_mul(1_000_000) {
            return Err(Error::InvalidGrid(format!(
                "aspect ratio {height_px}/{width_px} overflows the vertical extent"
            )));
        }
        Ok(GridSpec {
            center: (center.re, center.im),
            half_width,
            width_px,
            height_px,
        })
    }

    pub fn width_px(&self) -> usize {
        self.width_px
    }

    pub fn height_px(&self) -> usize {
        self.height_px
    }

    pub fn half_height(&self) -> f64 {
        self.half_width * self.height_px as f64 / self.width_px as f64
    }

    /// The sample point of pixel (row, col); row 0 is the top edge
    /// (largest imaginary part).
    pub fn pixel_center(&self, row: usize, col: usize) -> Complex64 {
        let w = self.width_px as f64;
        let h = self.height_px as f64;
        let re = self.center.0 + (2.0 * col as f64 + 1.0 - w) / w * self.half_width;
        let im = self.center.1 + (h - 1.0 - 2.0 * row as f64) / h * self.half_height();
        Complex64::new(re, im)
    }
}

/// Per-pixel classification, row-major, matching a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceGrid {
    width_px: usize,
    height_px: usize,
    cells: Vec<Classification>,
}

impl ConvergenceGrid {
    pub fn width_px(&self) -> usize {
        self.width_px
    }

    pub fn height_px(&self) -> usize {
        self.height_px
    }

    pub fn cell(&self, row: usize, col: usize) -> Classification {
        self.cells[row * self.width_px + col]
    }

    pub fn cells(&self) -> &[Classification] {
        &self.cells
    }

    /// Fraction of pixels with the same coarse class (converged or not) in
    /// both grids.
    pub fn class_agreement(&self, other: &ConvergenceGrid) -> Result<f64> {
        if self.width_px != other.width_px || self.height_px != other.height_px {
            return Err(Error::DimensionMismatch {
                expected: self.cells.len(),
                got: other.cells.len(),
            });
        }
        let same = self
            .cells
            .iter()
            .zip(&other.cells)
            .filter(|(a, b)| {
                matches!(a, Classification::Converged { .. })
                    == matches!(b, Classification::Converged { .. })
            })
            .count();
        Ok(same as f64 / self.cells.len() as f64)
    }
}

impl Serialize for ConvergenceGrid {
    /// Raw per-pixel step counts (null = not converged), row-major.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let steps: Vec<Option<usize>> = self
            .cells
            .iter()
            .map(|c| match c {
                Classification::Converged { steps, .. } => Some(*steps),
                Classification::NotConverged => None,
            })
            .collect();
        let mut st = s.serialize_struct("ConvergenceGrid", 3)?;
        st.serialize_field("width_px", &self.width_px)?;
        st.serialize_field("height_px", &self.height_px)?;
        st.serialize_field("steps", &steps)?;
        st.end()
    }
}

/// Discovers the attracting cycles of F_p, then classifies every pixel
/// center. Rows are independent tasks writing disjoint slices, so the
/// output is identical for any worker count.
///
/// # Errors
/// [`Error::NoCycleFound`] when F_p has no detectable attracting cycle.
pub fn render(
    p: MapParam,
    grid: &GridSpec,
    eps: f64,
    max_iter: usize,
) -> Result<ConvergenceGrid> {
    let cycles = find_attracting_cycles(p, max_iter, eps)?;
    let mut cells = vec![Classification::NotConverged; grid.width_px * grid.height_px];
    cells
        .par_chunks_mut(grid.width_px)
        .enumerate()
        .for_each(|(row, out)| {
            for (col, cell) in out.iter_mut().enumerate() {
                let z = SpherePoint::finite(grid.pixel_center(row, col));
                *cell = classify_point(p, z, &cycles, eps, max_iter);
            }
        });
    Ok(ConvergenceGrid {
        width_px: grid.width_px,
        height_px: grid.height_px,
        cells,
    })
}

/// 8-bit grayscale pixels, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    pub width_px: usize,
    pub height_px: usize,
    pub pixels: Vec<u8>,
}

/// Linear step-count shading: NotConverged -> 255 (white), Converged(s) ->
/// round(254 * s / max_iter) clamped to [0, 254] (fast = dark).
pub fn to_grayscale(grid: &ConvergenceGrid, max_iter: usize) -> ImageBuffer {
    to_grayscale_gamma(grid, max_iter, 1.0).expect("gamma 1.0 is valid")
}

/// Shading with a palette curve: Converged(s) ->
/// round(254 * (s/max_iter)^gamma). gamma = 1 is the linear default.
pub fn to_grayscale_gamma(
    grid: &ConvergenceGrid,
    max_iter: usize,
    gamma: f64,
) -> Result<ImageBuffer> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidTolerance {
            name: "gamma",
            value: gamma,
        });
    }
    let pixels = grid
        .cells
        .iter()
        .map(|c| match c {
            Classification::NotConverged => 255u8,
            Classification::Converged { steps, .. } => {
                if max_iter == 0 {
                    return 0;
                }
                let ratio = *steps as f64 / max_iter as f64;
                let shaped = if gamma == 1.0 { ratio } else { ratio.powf(gamma) };
                (254.0 * shaped).round().clamp(0.0, 254.0) as u8
            }
        })
        .collect();
    Ok(ImageBuffer {
        width_px: grid.width_px,
        height_px: grid.height_px,
        pixels,
    })
}

/// Binary PGM (magic P5, maxval 255), bit-exact across platforms:
/// header "P5\n{width} {height}\n255\n" followed by the raw pixel rows.
pub fn write_pgm(image: &ImageBuffer, path: &std::path::Path) -> Result<()> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    file.write_all(format!("P5\n{} {}\n255\n", image.width_px, image.height_px).as_bytes())
        .map_err(io_err)?;
    file.write_all(&image.pixels).map_err(io_err)?;
    file.into_inner()
        .map_err(|e| io_err(e.into_error()))?
        .sync_all()
        .map_err(io_err)
}
