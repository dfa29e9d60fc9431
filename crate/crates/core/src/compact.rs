//! Axis-aligned rectangles standing in for the compact `K`.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactRect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
    /// Grid points per unit length along each axis.
    pub density: f64,
}

impl CompactRect {
    pub const MIN_DENSITY: f64 = 8.0;

    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64, density: f64) -> Result<Self> {
        let finite = [re_lo, re_hi, im_lo, im_hi, density].iter().all(|v| v.is_finite());
        if !finite || re_lo >= re_hi || im_lo >= im_hi {
            return Err(Error::MalformedParams("rectangle needs lo < hi on both axes".into()));
        }
        if density < Self::MIN_DENSITY {
            return Err(Error::MalformedParams("grid density must be at least 8 points per unit".into()));
        }
        Ok(Self { re_lo, re_hi, im_lo, im_hi, density })
    }

    fn axis_count(&self, len: f64) -> usize {
        (libm::ceil(len * self.density - 1e-9) as usize).max(1) + 1
    }

    /// Row-major grid including the boundary.
    pub fn grid_points(&self) -> Vec<Complex64> {
        let nx = self.axis_count(self.re_hi - self.re_lo);
        let ny = self.axis_count(self.im_hi - self.im_lo);
        let mut pts = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let y = self.im_lo + (self.im_hi - self.im_lo) * j as f64 / (ny - 1) as f64;
            for i in 0..nx {
                let x = self.re_lo + (self.re_hi - self.re_lo) * i as f64 / (nx - 1) as f64;
                pts.push(Complex64::new(x, y));
            }
        }
        pts
    }

    /// The same rectangle with twice the grid density.
    pub fn doubled(&self) -> Self {
        Self { density: self.density * 2.0, ..*self }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im >= self.im_lo && z.im <= self.im_hi
    }

    pub fn max_re(&self) -> f64 {
        self.re_hi
    }

    /// Smallest rectangle containing all points, padded by `pad` on each side.
    pub fn bounding(points: &[Complex64], pad: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Precondition("no points".into()));
        }
        let (mut a, mut b, mut c, mut d) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in points {
            a = a.min(z.re);
            b = b.max(z.re);
            c = c.min(z.im);
            d = d.max(z.im);
        }
        Self::new(a - pad, b + pad, c - pad, d + pad, Self::MIN_DENSITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_corners() {
        let k = CompactRect::new(0.6, 0.9, -0.2, 0.2, 10.0).unwrap();
        let g = k.grid_points();
        assert!(g.iter().any(|z| *z == Complex64::new(0.6, -0.2)));
        assert!(g.iter().any(|z| (*z - Complex64::new(0.9, 0.2)).norm() < 1e-15));
        assert!(g.iter().all(|z| k.contains(*z) || (z.re - 0.9).abs() < 1e-15));
        assert!(k.doubled().grid_points().len() > g.len());
    }

    #[test]
    fn rejects_bad_rect() {
        assert!(CompactRect::new(1.0, 0.5, 0.0, 1.0, 8.0).is_err());
        assert!(CompactRect::new(0.0, 1.0, 0.0, 1.0, 2.0).is_err());
    }
}
