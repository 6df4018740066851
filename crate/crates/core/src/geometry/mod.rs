//! 3×3 matrices, unit-determinant homographies and their fractional powers.

mod homography;
mod mat3;

pub use homography::{check_principal_branch, fractional_power, Homography};
pub use mat3::Mat3;

/// A point in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        #[allow(unused_imports)]
        use num_traits::Float;
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}
