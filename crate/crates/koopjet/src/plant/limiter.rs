//! Min-max fuel-flow protection schedules.
//!
//! Piecewise-linear tables of corrected fuel bounds versus corrected spool
//! speed. The acceleration bound guards surge/over-temperature, the
//! deceleration bound guards choke/blow-out. Margins are wide enough that
//! small transients run unconstrained.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LimiterParams {
    /// Acceleration bound as a multiple of the steady-state fuel line.
    pub accel_ratio: f64,
    /// Extra headroom added to the acceleration bound, kg/s.
    pub accel_offset: f64,
    /// Deceleration bound as a fraction of the steady-state fuel line.
    pub decel_ratio: f64,
    /// Absolute blow-out floor, kg/s.
    pub floor: f64,
}

impl Default for LimiterParams {
    fn default() -> Self {
        LimiterParams {
            accel_ratio: 1.7,
            accel_offset: 0.015,
            decel_ratio: 0.5,
            floor: 0.036,
        }
    }
}

/// Sampled limiter schedules over corrected spool speed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimiterTables {
    /// Corrected spool-speed grid, RPM.
    pub n_corr: Vec<f64>,
    /// Upper corrected fuel bound, kg/s.
    pub w_max: Vec<f64>,
    /// Lower corrected fuel bound, kg/s.
    pub w_min: Vec<f64>,
}

impl LimiterTables {
    pub fn from_steady_line(
        n_grid: &[f64],
        steady_fuel: &[f64],
        params: &LimiterParams,
    ) -> LimiterTables {
        let w_max = steady_fuel
            .iter()
            .map(|w| params.accel_ratio * w + params.accel_offset)
            .collect();
        let w_min = steady_fuel
            .iter()
            .map(|w| (params.decel_ratio * w).max(params.floor))
            .collect();
        LimiterTables {
            n_corr: n_grid.to_vec(),
            w_max,
            w_min,
        }
    }

    fn interp(grid: &[f64], values: &[f64], x: f64) -> f64 {
        if x <= grid[0] {
            return values[0];
        }
        if x >= *grid.last().unwrap() {
            return *values.last().unwrap();
        }
        let idx = grid.partition_point(|g| *g <= x) - 1;
        let frac = (x - grid[idx]) / (grid[idx + 1] - grid[idx]);
        values[idx] + frac * (values[idx + 1] - values[idx])
    }

    pub fn bounds(&self, n_corr: f64) -> (f64, f64) {
        (
            Self::interp(&self.n_corr, &self.w_min, n_corr),
            Self::interp(&self.n_corr, &self.w_max, n_corr),
        )
    }

    /// Clamp a corrected fuel command; the flag reports whether either
    /// bound was active so downstream integrators can hold.
    pub fn clamp(&self, n_corr: f64, v_corr: f64) -> (f64, bool) {
        let (lo, hi) = self.bounds(n_corr);
        if v_corr > hi {
            (hi, true)
        } else if v_corr < lo {
            (lo, true)
        } else {
            (v_corr, false)
        }
    }
}
