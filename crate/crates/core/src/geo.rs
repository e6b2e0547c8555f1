//! Spherical-Earth geometry shared by the orbit and topology code.

use std::ops::{Add, Mul, Sub};

/// Mean Earth radius (km), spherical approximation.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Earth gravitational parameter (km^3/s^2).
pub const MU_EARTH: f64 = 398_600.4418;
/// Sidereal rotation rate (rad/s).
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_0e-5;
/// Speed of light in vacuum (km/ms).
pub const LIGHT_KM_PER_MS: f64 = 299.792_458;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Rotation about the +Z axis by `angle` radians.
    pub fn rotate_z(self, angle: f64) -> Vec3 {
        let (s, c) = angle.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Geographic coordinates in degrees. Longitude is kept in [-180, 180).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self {
            lat_deg,
            lon_deg: wrap_lon(lon_deg),
        }
    }

    /// Earth-fixed position on a sphere of radius `EARTH_RADIUS_KM + altitude_km`.
    pub fn to_ecef(self, altitude_km: f64) -> Vec3 {
        let r = EARTH_RADIUS_KM + altitude_km;
        let (slat, clat) = self.lat_deg.to_radians().sin_cos();
        let (slon, clon) = self.lon_deg.to_radians().sin_cos();
        Vec3::new(r * clat * clon, r * clat * slon, r * slat)
    }

    /// Surface great-circle distance (haversine).
    pub fn great_circle_km(self, other: GeoPoint) -> f64 {
        let (p1, p2) = (self.lat_deg.to_radians(), other.lat_deg.to_radians());
        let dp = p2 - p1;
        let dl = (other.lon_deg - self.lon_deg).to_radians();
        let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
        2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
    }
}

/// Wraps a longitude into [-180, 180).
pub fn wrap_lon(lon: f64) -> f64 {
    let w = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Elevation (deg) of `target` seen from the ground point `observer` (both Earth-fixed).
pub fn elevation_deg(observer: Vec3, target: Vec3) -> f64 {
    let up = observer * (1.0 / observer.norm());
    let los = target - observer;
    let range = los.norm();
    if range == 0.0 {
        return 90.0;
    }
    (los.dot(up) / range).clamp(-1.0, 1.0).asin().to_degrees()
}

/// True when the straight segment `a`-`b` stays at least `clearance_km` above the surface.
pub fn line_of_sight(a: Vec3, b: Vec3, clearance_km: f64) -> bool {
    let d = b - a;
    let len2 = d.dot(d);
    let closest = if len2 == 0.0 {
        a
    } else {
        let s = (-a.dot(d) / len2).clamp(0.0, 1.0);
        a + d * s
    };
    closest.norm() >= EARTH_RADIUS_KM + clearance_km
}
