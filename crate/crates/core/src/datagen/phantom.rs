use crate::error::{Error, Result};
use crate::operators::DenseMap;

/// One additive ellipse on `[-1, 1]²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipse {
    pub intensity: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub angle_deg: f64,
}

impl Ellipse {
    const fn new(intensity: f64, semi_x: f64, semi_y: f64, cx: f64, cy: f64, angle_deg: f64) -> Self {
        Self {
            intensity,
            semi_x,
            semi_y,
            center_x: cx,
            center_y: cy,
            angle_deg,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let (dx, dy) = (x - self.center_x, y - self.center_y);
        let xr = dx * c + dy * s;
        let yr = -dx * s + dy * c;
        (xr / self.semi_x).powi(2) + (yr / self.semi_y).powi(2) <= 1.0
    }
}

/// Ten-ellipse Shepp–Logan head with the high-contrast (Toft) intensities,
/// which keep every pixel in `[0, 1]`.
pub const SHEPP_LOGAN_ELLIPSES: [Ellipse; 10] = [
    Ellipse::new(1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    Ellipse::new(-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    Ellipse::new(-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    Ellipse::new(-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    Ellipse::new(0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    Ellipse::new(0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    Ellipse::new(0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    Ellipse::new(0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    Ellipse::new(0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    Ellipse::new(0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Phantom intensity at a point of `[-1, 1]²` (y pointing up).
pub fn shepp_logan_at(x: f64, y: f64) -> f64 {
    SHEPP_LOGAN_ELLIPSES
        .iter()
        .filter(|e| e.contains(x, y))
        .map(|e| e.intensity)
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// `side × side` phantom sampled at pixel centres. Row 0 is the top edge.
pub fn shepp_logan(side: usize) -> Result<DenseMap> {
    if side < 16 {
        return Err(Error::Parameter(format!(
            "phantom side must be at least 16, got {side}"
        )));
    }
    let l = side as f64;
    Ok(DenseMap::from_fn(side, side, |i, j| {
        let x = (2.0 * j as f64 + 1.0) / l - 1.0;
        let y = 1.0 - (2.0 * i as f64 + 1.0) / l;
        shepp_logan_at(x, y)
    }))
}
