//! Point clouds of the torus and the twisted (Möbius-ring) surface.

use std::f64::consts::PI;
use std::fmt::Write as _;

use mobiuse_core::ring::{surface_point_mobius, surface_point_torus};
use mobiuse_core::SurfaceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Mobius,
    Torus,
}

impl Surface {
    /// Period of the θ sweep: `4π` for the twisted surface, `2π` for the
    /// torus.
    pub fn theta_period(self) -> f64 {
        match self {
            Surface::Mobius => 4.0 * PI,
            Surface::Torus => 2.0 * PI,
        }
    }

    pub fn point(self, theta: f64, omega: f64, params: &SurfaceParams) -> [f64; 3] {
        match self {
            Surface::Mobius => surface_point_mobius(theta, omega, params),
            Surface::Torus => surface_point_torus(theta, omega, params),
        }
    }
}

/// `theta_steps × omega_steps` vertices, θ-major, with both angles sampled
/// on half-open grids.
pub fn grid(surface: Surface, params: &SurfaceParams, theta_steps: usize, omega_steps: usize) -> Vec<[f64; 3]> {
    let period = surface.theta_period();
    let mut out = Vec::with_capacity(theta_steps * omega_steps);
    for i in 0..theta_steps {
        let theta = period * i as f64 / theta_steps as f64;
        for j in 0..omega_steps {
            let omega = 2.0 * PI * j as f64 / omega_steps as f64;
            out.push(surface.point(theta, omega, params));
        }
    }
    out
}

/// The curve at fixed `omega`, sampled at `steps + 1` points over one full θ
/// period so that the last point repeats the first.
pub fn curve(surface: Surface, params: &SurfaceParams, omega: f64, steps: usize) -> Vec<[f64; 3]> {
    let period = surface.theta_period();
    (0..=steps)
        .map(|i| surface.point(period * i as f64 / steps as f64, omega, params))
        .collect()
}

/// One `x y z` line per vertex.
pub fn to_text(points: &[[f64; 3]]) -> String {
    let mut out = String::with_capacity(points.len() * 48);
    for [x, y, z] in points {
        let _ = writeln!(out, "{x} {y} {z}");
    }
    out
}
