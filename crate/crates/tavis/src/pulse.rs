//! Integer-indexed time grids and single-photon pulse shapes.
//!
//! All time-domain work in this crate shares one gridding convention:
//! a [`TimeGrid`] is a contiguous range of cells of width `dt`, cell k
//! spanning [(c0+k)·dt, (c0+k+1)·dt], and samples live at cell centers.
//! Anchoring cells to integer indices keeps decisions like "is this cell
//! before the pulse cutoff" exact instead of dependent on accumulated
//! floating-point time.

use crate::error::{Error, Result};
use crate::C64;

/// A uniform grid of `len` cells of width `dt`, starting at cell `c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    /// Index of the first cell; the grid starts at time c0·dt.
    pub c0: i64,
    /// Number of cells.
    pub len: usize,
    /// Cell width, > 0.
    pub dt: f64,
}

impl TimeGrid {
    /// Grid covering [t_min, t_max] with cells of width dt; the bounds are
    /// rounded to the nearest cell edge.
    pub fn from_span(t_min: f64, t_max: f64, dt: f64) -> Result<TimeGrid> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParams(format!("grid dt must be positive, got {dt}")));
        }
        if !(t_max > t_min) {
            return Err(Error::InvalidParams(format!(
                "grid span [{t_min}, {t_max}] is empty"
            )));
        }
        let c0 = (t_min / dt).round() as i64;
        let c1 = (t_max / dt).round() as i64;
        let len = (c1 - c0).max(1) as usize;
        Ok(TimeGrid { c0, len, dt })
    }

    /// Left edge of cell k.
    pub fn node(&self, k: usize) -> f64 {
        (self.c0 + k as i64) as f64 * self.dt
    }

    /// Center of cell k, where samples live.
    pub fn center(&self, k: usize) -> f64 {
        ((self.c0 + k as i64) as f64 + 0.5) * self.dt
    }

    pub fn t_start(&self) -> f64 {
        self.c0 as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        (self.c0 + self.len as i64) as f64 * self.dt
    }
}

/// A complex pulse sampled at the centers of a [`TimeGrid`].
///
/// `declared_norm` is what ∫|ξ|²dt is supposed to be (1 for normalized
/// photon pulses); [`PulseShape::norm_squared`] is the value the samples
/// actually integrate to.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    pub grid: TimeGrid,
    pub values: Vec<C64>,
    pub declared_norm: f64,
}

impl PulseShape {
    /// Samples `f` at every cell center.
    pub fn from_fn(grid: TimeGrid, declared_norm: f64, f: impl Fn(f64) -> C64) -> PulseShape {
        let values = (0..grid.len).map(|k| f(grid.center(k))).collect();
        PulseShape { grid, values, declared_norm }
    }

    pub fn t_start(&self) -> f64 {
        self.grid.t_start()
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt
    }

    /// Σ |values|²·dt.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dt
    }

    /// Linear interpolation between the two neighbouring cell-center
    /// samples. Samples one cell outside the range count as zero, so the
    /// pulse fades linearly to zero over one cell at each edge.
    pub fn value_at(&self, t: f64) -> C64 {
        let zero = C64::new(0.0, 0.0);
        if self.values.is_empty() {
            return zero;
        }
        // Position of t in units of cells, measured from the first center.
        let u = (t / self.grid.dt) - (self.grid.c0 as f64 + 0.5);
        if u <= -1.0 || u >= self.values.len() as f64 {
            return zero;
        }
        if u <= 0.0 {
            // Fade in from zero over the half cell before the first sample.
            return self.values[0] * (1.0 + u);
        }
        let k = u.floor() as usize;
        if k + 1 >= self.values.len() {
            // Fade out past the last sample.
            return self.values[self.values.len() - 1] * (self.values.len() as f64 - u);
        }
        let w = u - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }
}

/// ξ(t) = √γ·e^{γt/2} for t ≤ 0, zero afterwards.
pub fn rising_exponential_shape(gamma: f64, t: f64) -> f64 {
    if t <= 0.0 {
        gamma.sqrt() * (gamma * t / 2.0).exp()
    } else {
        0.0
    }
}

/// ξ(t) = (Ω²/2π)^{1/4}·exp(−(Ω²/4)(t−t_p)²).
pub fn gaussian_shape(omega_pulse: f64, t_p: f64, t: f64) -> f64 {
    let w2 = omega_pulse * omega_pulse;
    (w2 / (2.0 * std::f64::consts::PI)).powf(0.25) * (-w2 / 4.0 * (t - t_p).powi(2)).exp()
}

/// Normalized rising-exponential photon pulse sampled on `grid`.
///
/// The grid must reach far enough into t < 0 to hold the pulse; the
/// sampled norm below 0.999 reports [`Error::GridTooShort`].
pub fn rising_exponential(gamma: f64, grid: TimeGrid) -> Result<PulseShape> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParams(format!("pulse rate must be positive, got {gamma}")));
    }
    let pulse =
        PulseShape::from_fn(grid, 1.0, |t| C64::new(rising_exponential_shape(gamma, t), 0.0));
    let norm = pulse.norm_squared();
    if norm < 0.999 {
        return Err(Error::GridTooShort(format!(
            "grid [{:.3}, {:.3}] captures only {:.6} of the rising-exponential norm; \
             start at or before -10/gamma = {:.3}",
            grid.t_start(),
            grid.t_end(),
            norm,
            -10.0 / gamma
        )));
    }
    Ok(pulse)
}

/// Normalized Gaussian photon pulse with bandwidth Ω and peak time t_p.
pub fn gaussian_pulse(omega_pulse: f64, t_p: f64, grid: TimeGrid) -> Result<PulseShape> {
    if !(omega_pulse > 0.0) || !omega_pulse.is_finite() {
        return Err(Error::InvalidParams(format!(
            "pulse bandwidth must be positive, got {omega_pulse}"
        )));
    }
    let pulse =
        PulseShape::from_fn(grid, 1.0, |t| C64::new(gaussian_shape(omega_pulse, t_p, t), 0.0));
    let norm = pulse.norm_squared();
    if norm < 0.999 {
        return Err(Error::GridTooShort(format!(
            "grid [{:.3}, {:.3}] captures only {:.6} of the Gaussian norm; \
             cover t_p ± 6/Ω = [{:.3}, {:.3}]",
            grid.t_start(),
            grid.t_end(),
            norm,
            t_p - 6.0 / omega_pulse,
            t_p + 6.0 / omega_pulse
        )));
    }
    Ok(pulse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_cells_are_integer_anchored() {
        let g = TimeGrid::from_span(-30.0, 30.0, 0.25e-3).unwrap();
        assert_eq!(g.c0, -120000);
        assert_eq!(g.len, 240000);
        assert_eq!(g.node(0), -30.0);
        assert_abs_diff_eq!(g.center(0), -30.0 + 0.125e-3, epsilon = 1e-18);
        assert_eq!(g.t_end(), 30.0);
    }

    #[test]
    fn grid_rejects_bad_spans() {
        assert!(TimeGrid::from_span(0.0, 1.0, 0.0).is_err());
        assert!(TimeGrid::from_span(1.0, 1.0, 0.1).is_err());
        assert!(TimeGrid::from_span(2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn rising_exponential_formula_points() {
        assert_abs_diff_eq!(rising_exponential_shape(1.0, 0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            rising_exponential_shape(1.0, -2.0 * 2.0f64.ln()),
            0.5,
            epsilon = 1e-15
        );
        assert_eq!(rising_exponential_shape(1.0, 0.5), 0.0);
    }

    #[test]
    fn rising_exponential_unit_norm() {
        let g = TimeGrid::from_span(-20.0, 0.0, 1e-3).unwrap();
        let p = rising_exponential(1.0, g).unwrap();
        assert_abs_diff_eq!(p.norm_squared(), 1.0, epsilon = 1e-4);
        assert_eq!(p.declared_norm, 1.0);
    }

    #[test]
    fn rising_exponential_short_grid_errors() {
        let g = TimeGrid::from_span(-3.0, 0.0, 1e-3).unwrap();
        assert!(matches!(rising_exponential(1.0, g), Err(Error::GridTooShort(_))));
    }

    #[test]
    fn gaussian_peak_value_and_symmetry() {
        let omega = 3.0;
        let t_p = 3.0;
        let peak = gaussian_shape(omega, t_p, t_p);
        assert_abs_diff_eq!(
            peak,
            (9.0 / (2.0 * std::f64::consts::PI)).powf(0.25),
            epsilon = 1e-15
        );
        for s in [0.3, 1.1, 2.4] {
            let plus = gaussian_shape(omega, t_p, t_p + s);
            let minus = gaussian_shape(omega, t_p, t_p - s);
            assert_abs_diff_eq!(plus, minus, epsilon = 1e-15 * peak);
        }
    }

    #[test]
    fn gaussian_unit_norm_on_six_sigma_grid() {
        let omega = 3.0;
        let t_p = 3.0;
        let g = TimeGrid::from_span(t_p - 6.0 / omega, t_p + 6.0 / omega, 1e-3).unwrap();
        let p = gaussian_pulse(omega, t_p, g).unwrap();
        assert_abs_diff_eq!(p.norm_squared(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn gaussian_truncated_grid_errors() {
        let g = TimeGrid::from_span(2.5, 3.5, 1e-3).unwrap();
        assert!(matches!(gaussian_pulse(3.0, 3.0, g), Err(Error::GridTooShort(_))));
    }

    #[test]
    fn interpolation_hits_samples_and_fades_outside() {
        let g = TimeGrid { c0: 0, len: 4, dt: 1.0 };
        let p = PulseShape {
            grid: g,
            values: vec![
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(3.0, 0.0),
                C64::new(4.0, 0.0),
            ],
            declared_norm: 0.0,
        };
        for k in 0..4 {
            assert_abs_diff_eq!(p.value_at(g.center(k)).re, (k + 1) as f64, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(p.value_at(1.0).re, 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(p.value_at(0.25).re, 0.75, epsilon = 1e-14);
        assert_eq!(p.value_at(-0.5), C64::new(0.0, 0.0));
        assert_eq!(p.value_at(4.5), C64::new(0.0, 0.0));
        // One-cell fade past the last sample: at t=4.2 the weight is 0.3.
        assert_abs_diff_eq!(p.value_at(4.2).re, 4.0 * 0.3, epsilon = 1e-13);
        assert_abs_diff_eq!(p.value_at(3.75).re, 4.0 * 0.75, epsilon = 1e-14);
    }
}
