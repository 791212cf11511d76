use std::fmt::Write as _;

use crate::geometry::{GridSpec, Point};
use crate::{Error, Result};

/// Nonnegative scalar image on a [`GridSpec`]. Pixels outside `mask` are
/// held at zero and ignored by every statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub spec: GridSpec,
    pub pixels: Vec<f64>,
    pub mask: Vec<bool>,
}

impl ImageGrid {
    pub fn new(spec: GridSpec, pixels: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if pixels.len() != spec.len() || mask.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "{} pixels and {} mask entries for a {}x{} grid",
                pixels.len(),
                mask.len(),
                spec.nx,
                spec.ny
            )));
        }
        if let Some(v) = pixels.iter().zip(&mask).find(|(v, &m)| m && !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!("pixel value {} is not finite and nonnegative", v.0)));
        }
        Ok(Self { spec, pixels, mask })
    }

    pub fn zeros(spec: GridSpec, mask: Vec<bool>) -> Result<Self> {
        Self::new(spec, vec![0.0; spec.len()], mask)
    }

    /// Values of the pixels inside the mask.
    pub fn unmasked(&self) -> impl Iterator<Item = f64> + '_ {
        self.pixels.iter().zip(&self.mask).filter(|(_, &m)| m).map(|(v, _)| *v)
    }

    pub fn unmasked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn max(&self) -> f64 {
        self.unmasked().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        let n = self.unmasked_count();
        if n == 0 {
            return 0.0;
        }
        self.unmasked().sum::<f64>() / n as f64
    }

    /// Index of the largest unmasked pixel; ties go to the lowest index.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, (&v, &m)) in self.pixels.iter().zip(&self.mask).enumerate() {
            if m && best.map_or(true, |b| v > self.pixels[b]) {
                best = Some(i);
            }
        }
        best
    }

    pub fn argmax_point(&self) -> Option<Point> {
        self.argmax().map(|i| self.spec.point(i))
    }

    /// Largest unmasked value within `radius` of `center`.
    pub fn local_peak(&self, center: Point, radius: f64) -> f64 {
        (0..self.pixels.len())
            .filter(|&i| self.mask[i] && self.spec.point(i).distance(center) <= radius)
            .map(|i| self.pixels[i])
            .fold(0.0, f64::max)
    }

    /// Scales the image to unit peak. Returns false, leaving it untouched,
    /// when every unmasked pixel is zero.
    pub fn normalize(&mut self) -> bool {
        let peak = self.max();
        if peak == 0.0 {
            return false;
        }
        self.pixels.iter_mut().for_each(|v| *v /= peak);
        true
    }

    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        out.normalize();
        out
    }

    /// `x_m,y_m,value` rows for the unmasked pixels.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("x_m,y_m,value\n");
        for (i, (&v, &m)) in self.pixels.iter().zip(&self.mask).enumerate() {
            if m {
                let p = self.spec.point(i);
                let _ = writeln!(s, "{},{},{}", p.x, p.y, v);
            }
        }
        s
    }

    /// Binary 8-bit graymap, linear in value with the peak at 255 and
    /// masked pixels black. The top row is the largest y.
    pub fn to_pgm(&self) -> Vec<u8> {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let peak = self.max();
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        for iy in (0..ny).rev() {
            for ix in 0..nx {
                let i = self.spec.index(ix, iy);
                let level = if self.mask[i] && peak > 0.0 { (255.0 * self.pixels[i] / peak).round() } else { 0.0 };
                out.push(level as u8);
            }
        }
        out
    }
}
