//! Points on the unit circle and the chord metric.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// `exp(2 pi i turns)`.
pub fn unit(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * turns.rem_euclid(1.0))
}

/// `|a - b|`.
pub fn chord(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm()
}

/// Chord between `exp(2 pi i a)` and `exp(2 pi i b)`, computed as
/// `2 |sin(pi (a - b))|` on the reduced phase difference.
pub fn phase_chord(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    let d = d.min(1.0 - d);
    2.0 * (std::f64::consts::PI * d).sin()
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

pub fn powi(z: Complex64, n: i32) -> Complex64 {
    z.powi(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chord_values() {
        assert!((chord(unit(0.0), unit(0.5)) - 2.0).abs() < 1e-15);
        assert!((phase_chord(0.1, 0.9) - 2.0 * (0.2 * std::f64::consts::PI).sin()).abs() < 1e-15);
        assert!(phase_chord(3.0, 0.0) < 1e-15);
        assert!((dist_to_integer(2.7) - 0.3).abs() < 1e-12);
    }
}
