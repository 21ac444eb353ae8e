//! Planar vector math shared by the simulator and the reward model.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// 2D vector in metres (or metres per second, depending on context).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at angle `theta` radians from the +x axis.
    pub fn from_angle(theta: f64) -> Self {
        Vec2 {
            x: theta.cos(),
            y: theta.sin(),
        }
    }

    pub fn length_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    pub fn dot(self, rhs: Vec2) -> f64 {
        self.x * rhs.x + self.y * rhs.y
    }

    pub fn distance(self, rhs: Vec2) -> f64 {
        (self - rhs).length()
    }

    /// Angle of the vector in radians, in (-pi, pi]. Zero vector maps to 0.
    pub fn angle(self) -> f64 {
        if self.x == 0.0 && self.y == 0.0 {
            0.0
        } else {
            self.y.atan2(self.x)
        }
    }

    /// Unit vector in the same direction. The zero vector is returned unchanged.
    pub fn normalized(self) -> Vec2 {
        let len = self.length();
        if len > 0.0 {
            self / len
        } else {
            Vec2::ZERO
        }
    }

    /// Rescale to `max_len` when longer; shorter vectors are unchanged.
    pub fn clamp_length(self, max_len: f64) -> Vec2 {
        debug_assert!(max_len >= 0.0);
        let len = self.length();
        if len > max_len {
            self * (max_len / len)
        } else {
            self
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wrap an angle in radians into [-pi, pi).
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = (a + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    // rem_euclid can return exactly two_pi worth of offset when the addition
    // rounds to a negative-zero boundary; fold the single open endpoint back.
    if r >= std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Smallest signed rotation taking angle `from` onto angle `to`, in [-pi, pi).
pub fn angle_diff(to: f64, from: f64) -> f64 {
    wrap_angle(to - from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn vector_basics() {
        let a = Vec2::new(3.0, 4.0);
        assert_eq!(a.length(), 5.0);
        assert_eq!(a.length_squared(), 25.0);
        assert_eq!(a.dot(Vec2::new(1.0, 0.0)), 3.0);
        assert_eq!(a.distance(Vec2::new(3.0, 0.0)), 4.0);
        let u = a.normalized();
        assert!((u.length() - 1.0).abs() < 1e-12);
        assert_eq!(Vec2::ZERO.normalized(), Vec2::ZERO);
    }

    #[test]
    fn clamp_length_caps_only_long_vectors() {
        let v = Vec2::new(30.0, 40.0);
        let c = v.clamp_length(10.0);
        assert!((c.length() - 10.0).abs() < 1e-12);
        assert!((c.angle() - v.angle()).abs() < 1e-12);
        let short = Vec2::new(1.0, 2.0);
        assert_eq!(short.clamp_length(10.0), short);
    }

    #[test]
    fn from_angle_round_trips() {
        for k in -8..8 {
            let theta = k as f64 * PI / 8.0;
            let v = Vec2::from_angle(theta);
            assert!((v.length() - 1.0).abs() < 1e-12);
            assert!((wrap_angle(v.angle() - theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn wrap_angle_known_values() {
        assert!((wrap_angle(0.0)).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - (-PI)).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * PI) - (-PI)).abs() < 1e-12);
        assert!((wrap_angle(PI / 2.0) - PI / 2.0).abs() < 1e-15);
        // pi itself wraps to the closed lower endpoint.
        assert!((wrap_angle(PI) - (-PI)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn wrap_angle_is_idempotent_and_in_range(a in -1.0e6f64..1.0e6) {
            let w = wrap_angle(a);
            prop_assert!((-PI..PI).contains(&w));
            prop_assert!((wrap_angle(w) - w).abs() < 1e-12);
            // Wrapping preserves the direction the angle points at.
            prop_assert!((w.sin() - a.sin()).abs() < 1e-6);
            prop_assert!((w.cos() - a.cos()).abs() < 1e-6);
        }

        #[test]
        fn angle_diff_is_minimal_rotation(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let d = angle_diff(a, b);
            prop_assert!((-PI..PI).contains(&d));
            prop_assert!((wrap_angle(b + d) - wrap_angle(a)).abs() < 1e-9);
        }
    }
}
