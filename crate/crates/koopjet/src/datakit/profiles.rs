//! Excitation command profiles for identification data.
//!
//! Training data covers three 500-second segments: fast ramps with a
//! command change roughly every ten seconds, a chirp sweeping 0 to
//! 0.25 Hz, and slow ramps with long steady dwells. The test profile uses
//! the same generator with faster dynamics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct ProfileConfig {
    /// Ramp rise-time range, s.
    pub rise: (f64, f64),
    /// Inter-command interval range for the fast-ramp segment, s.
    pub interval: (f64, f64),
    /// Dwell range for the slow-ramp segment, s.
    pub dwell: (f64, f64),
    /// Slow-ramp rise-time range, s.
    pub slow_rise: (f64, f64),
    /// Command level range (normalized).
    pub levels: (f64, f64),
    /// Chirp center and amplitude (normalized).
    pub chirp_center: f64,
    pub chirp_amp: f64,
    /// Final chirp frequency, Hz.
    pub chirp_f_end: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            rise: (1.0, 2.0),
            interval: (8.0, 12.0),
            dwell: (15.0, 35.0),
            slow_rise: (10.0, 20.0),
            levels: (0.05, 0.95),
            chirp_center: 0.5,
            chirp_amp: 0.35,
            chirp_f_end: 0.25,
        }
    }
}

impl ProfileConfig {
    /// Test-profile variant: same structure, overall faster dynamics.
    pub fn faster() -> ProfileConfig {
        ProfileConfig {
            rise: (0.5, 1.0),
            interval: (6.0, 10.0),
            dwell: (8.0, 18.0),
            slow_rise: (4.0, 8.0),
            ..ProfileConfig::default()
        }
    }
}

/// Piecewise-linear ramp sequence: hold, then ramp to the next level.
fn ramp_segment(
    duration: f64,
    dt: f64,
    start_level: f64,
    rise: (f64, f64),
    interval: (f64, f64),
    levels: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let steps = (duration / dt).round() as usize;
    let mut out = Vec::with_capacity(steps);
    let mut level = start_level;
    let mut target = level;
    let mut ramp_rate = 0.0;
    let mut next_change = rng.random_range(interval.0..interval.1) * 0.5;
    for i in 0..steps {
        let t = i as f64 * dt;
        if t >= next_change {
            target = rng.random_range(levels.0..levels.1);
            let rise_time = rng.random_range(rise.0..rise.1);
            ramp_rate = (target - level) / rise_time;
            next_change = t + rng.random_range(interval.0..interval.1);
        }
        if (target - level).abs() > ramp_rate.abs() * dt {
            level += ramp_rate * dt;
        } else {
            level = target;
        }
        out.push(level.clamp(0.0, 1.0));
    }
    out
}

/// Linear chirp: instantaneous frequency grows from 0 to `f_end` over the
/// segment, so the phase is `pi f_end t^2 / duration`.
fn chirp_segment(duration: f64, dt: f64, cfg: &ProfileConfig) -> Vec<f64> {
    let steps = (duration / dt).round() as usize;
    (0..steps)
        .map(|i| {
            let t = i as f64 * dt;
            let phase = std::f64::consts::PI * cfg.chirp_f_end * t * t / duration;
            (cfg.chirp_center + cfg.chirp_amp * phase.sin()).clamp(0.0, 1.0)
        })
        .collect()
}

/// Three 500 s training segments concatenated on one uniform grid;
/// returns the command series and per-sample segment ids (1, 2, 3).
pub fn training_commands(dt: f64, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let cfg = ProfileConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seg_len = 500.0;

    let mut cmd = ramp_segment(seg_len, dt, 0.3, cfg.rise, cfg.interval, cfg.levels, &mut rng);
    let mut seg = vec![1u8; cmd.len()];

    let chirp = chirp_segment(seg_len, dt, &cfg);
    seg.extend(std::iter::repeat_n(2u8, chirp.len()));
    cmd.extend(chirp);

    let slow = ramp_segment(
        seg_len,
        dt,
        *cmd.last().unwrap(),
        cfg.slow_rise,
        (
            cfg.dwell.0 + cfg.slow_rise.0,
            cfg.dwell.1 + cfg.slow_rise.1,
        ),
        cfg.levels,
        &mut rng,
    );
    seg.extend(std::iter::repeat_n(3u8, slow.len()));
    cmd.extend(slow);

    // inclusive end point to close the grid at exactly 1500 s
    cmd.push(*cmd.last().unwrap());
    seg.push(3);
    (cmd, seg)
}

/// 500 s test profile: fast ramps then a fast chirp.
pub fn test_commands(dt: f64, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let cfg = ProfileConfig::faster();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cmd = ramp_segment(250.0, dt, 0.3, cfg.rise, cfg.interval, cfg.levels, &mut rng);
    let mut seg = vec![1u8; cmd.len()];
    let steps = (250.0 / dt).round() as usize;
    let chirp: Vec<f64> = (0..steps)
        .map(|i| {
            let t = i as f64 * dt;
            let phase = std::f64::consts::PI * cfg.chirp_f_end * t * t / 250.0;
            (cfg.chirp_center + cfg.chirp_amp * phase.sin()).clamp(0.0, 1.0)
        })
        .collect();
    seg.extend(std::iter::repeat_n(2u8, chirp.len()));
    cmd.extend(chirp);
    cmd.push(*cmd.last().unwrap());
    seg.push(2);
    (cmd, seg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_row_count() {
        let (cmd, seg) = training_commands(0.01, 42);
        assert_eq!(cmd.len(), 150_001);
        assert_eq!(seg.len(), 150_001);
        assert_eq!(seg[0], 1);
        assert_eq!(seg[75_000], 2);
        assert_eq!(*seg.last().unwrap(), 3);
    }

    #[test]
    fn commands_within_unit_envelope() {
        let (cmd, _) = training_commands(0.01, 7);
        assert!(cmd.iter().all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn chirp_instantaneous_frequency_reaches_end_value() {
        // phase = pi f_end t^2 / T -> f_inst = f_end t / T
        let cfg = ProfileConfig::default();
        let dur = 500.0;
        let dt = 0.01;
        let x = chirp_segment(dur, dt, &cfg);
        // zero-crossing frequency estimate over a window centered at tc
        // approximates the instantaneous frequency f_end * tc / T
        let measure = |lo: usize, hi: usize| {
            let span = &x[lo..hi];
            let mut crossings = 0;
            for i in 1..span.len() {
                if (span[i - 1] - cfg.chirp_center) * (span[i] - cfg.chirp_center) < 0.0 {
                    crossings += 1;
                }
            }
            crossings as f64 / 2.0 / ((hi - lo) as f64 * dt)
        };
        // last 40 s: mean instantaneous frequency 0.24, ramping to 0.25
        let f_tail = measure(x.len() - 4000, x.len());
        assert!((f_tail - 0.24).abs() < 0.015, "tail frequency {f_tail}");
        // mid window around 250 s: half the end frequency
        let f_mid = measure(23_000, 27_000);
        assert!((f_mid - 0.125).abs() < 0.015, "mid frequency {f_mid}");
    }

    #[test]
    fn ramp_intervals_in_range() {
        let (cmd, seg) = training_commands(0.01, 3);
        // detect command-change onsets in segment 1 as slope sign changes
        // from zero; measure gaps between ramp starts
        let mut starts = Vec::new();
        let mut prev_slope = 0.0;
        for i in 1..50_000 {
            if seg[i] != 1 {
                break;
            }
            let slope = cmd[i] - cmd[i - 1];
            if prev_slope == 0.0 && slope != 0.0 {
                starts.push(i as f64 * 0.01);
            }
            prev_slope = slope;
        }
        assert!(starts.len() > 30);
        for w in starts.windows(2) {
            let gap = w[1] - w[0];
            assert!(
                (6.0..=14.1).contains(&gap),
                "ramp gap {gap} outside expected envelope"
            );
        }
    }

    #[test]
    fn deterministic() {
        let a = training_commands(0.01, 5);
        let b = training_commands(0.01, 5);
        assert_eq!(a.0, b.0);
    }
}
