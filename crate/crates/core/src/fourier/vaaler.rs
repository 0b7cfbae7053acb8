use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Below this `|t|` the weight switches to its Taylor expansion.
pub const TAYLOR_CUTOFF: f64 = 1e-4;

/// Centered sawtooth `x - floor(x) - 1/2`, in `[-1/2, 1/2)`.
pub fn psi(x: f64) -> f64 {
    x - x.floor() - 0.5
}

/// `W(t) = pi t (1 - |t|) cot(pi t) + |t|` for `0 < |t| < 1`.
pub fn vaaler_weight(t: f64) -> Result<f64> {
    let a = t.abs();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::arg(format!("weight needs 0 < |t| < 1, got {t}")));
    }
    let x = PI * a;
    let x_cot_x = if a < TAYLOR_CUTOFF {
        let x2 = x * x;
        1.0 - x2 / 3.0 - x2 * x2 / 45.0
    } else {
        x / x.tan()
    };
    Ok((1.0 - a) * x_cot_x + a)
}

/// Coefficient tables of the degree-`J` trigonometric approximation to
/// the sawtooth and of its Fejer-type majorant.
#[derive(Clone, Debug, PartialEq)]
pub struct VaalerKernel {
    degree: usize,
    /// `W(j/(J+1))` for `j = 1..=J`.
    weights: Vec<f64>,
    /// `1 - |j|/(J+1)` for `j = -J..=J`.
    triangle: Vec<f64>,
}

impl VaalerKernel {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::arg("kernel degree must be at least 1"));
        }
        let j1 = (degree + 1) as f64;
        let weights = (1..=degree)
            .map(|j| vaaler_weight(j as f64 / j1))
            .collect::<Result<Vec<_>>>()?;
        let triangle = (-(degree as i64)..=degree as i64)
            .map(|j| 1.0 - j.unsigned_abs() as f64 / j1)
            .collect();
        Ok(VaalerKernel {
            degree,
            weights,
            triangle,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn triangle(&self) -> &[f64] {
        &self.triangle
    }

    /// The triangle coefficient for `|j| <= J`.
    pub fn triangle_at(&self, j: i64) -> f64 {
        self.triangle[(j + self.degree as i64) as usize]
    }

    /// `psi*(x) = -sum_{1<=|j|<=J} (2 pi i j)^-1 W(j/(J+1)) e(jx)`.
    ///
    /// The `j` and `-j` terms pair to `W sin(2 pi j x) / (pi j)`.
    pub fn psi_star(&self, x: f64) -> f64 {
        let r = x - x.floor();
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let j = (k + 1) as f64;
            let t = j * r;
            acc += w * (TAU * (t - t.round())).sin() / (PI * j);
        }
        -acc
    }

    /// `(2J+2)^-1 sum_{|j|<=J} (1 - |j|/(J+1)) e(jx)`, a nonnegative
    /// Fejer kernel.
    pub fn delta(&self, x: f64) -> f64 {
        let r = x - x.floor();
        let mut acc = 1.0;
        for j in 1..=self.degree {
            let t = j as f64 * r;
            acc += 2.0 * self.triangle_at(j as i64) * (TAU * (t - t.round())).cos();
        }
        acc / (2 * self.degree + 2) as f64
    }
}

/// Outcome of checking `|psi* - psi| <= delta` on a set of points.
#[derive(Clone, Debug, PartialEq)]
pub struct VaalerCheck {
    pub degree: usize,
    pub points: usize,
    pub min_delta: f64,
    /// Largest `|psi*(x) - psi(x)| - delta(x)`; at most `0` in exact
    /// arithmetic.
    pub max_excess: f64,
}

impl VaalerCheck {
    pub fn passes(&self, delta_floor: f64, excess_tol: f64) -> bool {
        self.min_delta >= delta_floor && self.max_excess <= excess_tol
    }
}

pub fn check_vaaler(kernel: &VaalerKernel, points: &[f64]) -> VaalerCheck {
    let mut min_delta = f64::INFINITY;
    let mut max_excess = f64::NEG_INFINITY;
    for &x in points {
        let d = kernel.delta(x);
        let err = (kernel.psi_star(x) - psi(x)).abs();
        min_delta = min_delta.min(d);
        max_excess = max_excess.max(err - d);
    }
    VaalerCheck {
        degree: kernel.degree,
        points: points.len(),
        min_delta,
        max_excess,
    }
}

/// Points hugging the integers, the half-integers and the zeros
/// `m/(J+1)` of the majorant, where the inequality is tightest.
pub fn adversarial_points(degree: usize, count: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(count);
    let offsets = [
        0.0, 1e-15, -1e-15, 1e-12, -1e-12, 1e-9, -1e-9, 1e-6, -1e-6, 1e-3, -1e-3,
    ];
    let mut k = 0usize;
    while pts.len() < count {
        let base = match k % 3 {
            0 => (k / 3 % 7) as f64 - 3.0,
            1 => (k / 3 % 7) as f64 - 2.5,
            _ => ((k / 3) % (degree + 1)) as f64 / (degree + 1) as f64,
        };
        let off = offsets[(k / 3) % offsets.len()];
        pts.push(base + off);
        k += 1;
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_examples() {
        assert_eq!(psi(0.25), -0.25);
        assert_eq!(psi(0.0), -0.5);
        assert_eq!(psi(-0.25), 0.25);
    }

    #[test]
    fn weight_examples() {
        assert!((vaaler_weight(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((vaaler_weight(1e-7).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(vaaler_weight(-0.3).unwrap(), vaaler_weight(0.3).unwrap());
        assert!(vaaler_weight(0.0).is_err());
        assert!(vaaler_weight(1.0).is_err());
        assert!(vaaler_weight(-1.5).is_err());
    }

    #[test]
    fn weight_is_continuous_at_taylor_cutoff() {
        let below = vaaler_weight(TAYLOR_CUTOFF * (1.0 - 1e-9)).unwrap();
        let above = vaaler_weight(TAYLOR_CUTOFF * (1.0 + 1e-9)).unwrap();
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn kernel_tables() {
        let k = VaalerKernel::new(16).unwrap();
        assert_eq!(k.weights().len(), 16);
        assert_eq!(k.triangle().len(), 33);
        assert!(k.weights().iter().all(|&w| w > 0.0 && w <= 1.0));
        for j in 0..=16 {
            assert_eq!(k.triangle_at(j), k.triangle_at(-j));
        }
        assert!(VaalerKernel::new(0).is_err());
    }

    #[test]
    fn psi_star_examples() {
        for j in [1, 4, 16] {
            let k = VaalerKernel::new(j).unwrap();
            assert_eq!(k.psi_star(0.0), 0.0);
        }
        let k1 = VaalerKernel::new(1).unwrap();
        assert!(k1.psi_star(0.5).abs() < 1e-15);
    }

    #[test]
    fn delta_examples() {
        for j in [1, 4, 16, 128] {
            let k = VaalerKernel::new(j).unwrap();
            assert!((k.delta(0.0) - 0.5).abs() < 1e-14);
        }
        let k1 = VaalerKernel::new(1).unwrap();
        assert!(k1.delta(0.5).abs() < 1e-15);
    }

    #[test]
    fn psi_star_is_odd() {
        let k = VaalerKernel::new(16).unwrap();
        for i in 1..200 {
            let x = i as f64 * 0.01234567;
            assert!((k.psi_star(-x) + k.psi_star(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn delta_mean_value() {
        // Midpoint rule is exact for trigonometric polynomials of degree
        // below the node count.
        for j in [1usize, 4, 16, 128] {
            let k = VaalerKernel::new(j).unwrap();
            let n = 4096;
            let mean: f64 = (0..n).map(|i| k.delta((i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
            assert!((mean - 1.0 / (2 * j + 2) as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn adversarial_inequality() {
        for j in [1usize, 4, 16, 128] {
            let k = VaalerKernel::new(j).unwrap();
            let c = check_vaaler(&k, &adversarial_points(j, 1000));
            assert!(c.passes(-1e-12, 1e-10), "{c:?}");
        }
    }
}
