//! Single-photon input-output response.
//!
//! A single photon with pulse shape ξ scatters off the cavity and leaves
//! with pulse shape η whose spectrum is G(iω)·ξ̂(ω). The computation is a
//! frequency-domain product: FFT the sampled input, multiply by the
//! closed-form transfer function, inverse FFT. The transfer function is
//! evaluated through the degenerate-group product form, which equals the
//! controllable/observable reduction and therefore stays finite at
//! dark-state frequencies.

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linear::{product_transfer_value, transfer_groups};
use crate::params::SystemParams;
use crate::pulse::{PulseShape, TimeGrid};
use crate::C64;

/// Scatters the single-photon pulse ξ off the system, returning the output
/// pulse η sampled on `grid`.
///
/// The output grid must share the input's cell width and contain its span;
/// samples are copied cell-for-cell, so no resampling error enters. The
/// transform is zero-padded to four times the grid length (rounded up to a
/// power of two) to suppress circular wrap-around of the response tail.
pub fn single_photon_response(
    params: &SystemParams,
    xi: &PulseShape,
    grid: TimeGrid,
) -> Result<PulseShape> {
    params.validate()?;
    if xi.grid.dt != grid.dt {
        return Err(Error::InvalidParams(format!(
            "input pulse dt {} differs from output grid dt {}",
            xi.grid.dt, grid.dt
        )));
    }
    if xi.grid.c0 < grid.c0
        || xi.grid.c0 + xi.grid.len as i64 > grid.c0 + grid.len as i64
    {
        return Err(Error::InvalidParams(
            "output grid must contain the input pulse span".into(),
        ));
    }

    let len = grid.len;
    let m = (4 * len).next_power_of_two();
    let mut buf = vec![C64::new(0.0, 0.0); m];
    let off = (xi.grid.c0 - grid.c0) as usize;
    buf[off..off + xi.values.len()].copy_from_slice(&xi.values);

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);

    let groups = transfer_groups(params);
    let dw = 2.0 * std::f64::consts::PI / (m as f64 * grid.dt);
    let half = m / 2;
    for (idx, v) in buf.iter_mut().enumerate() {
        let f = if idx <= half { idx as f64 } else { idx as f64 - m as f64 };
        let s = C64::new(0.0, f * dw);
        *v *= product_transfer_value(&groups, params.omega_r, params.kappa, s)?;
    }

    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let values: Vec<C64> = buf[..len].iter().map(|v| v * scale).collect();
    Ok(PulseShape { grid, values, declared_norm: xi.declared_norm })
}

/// L² distance √(Σ|a−b|²·dt) between two pulses on the same grid.
pub fn pulse_distance(a: &PulseShape, b: &PulseShape) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::InvalidParams("pulse distance needs a common grid".into()));
    }
    let sum: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok((sum * a.grid.dt).sqrt())
}
