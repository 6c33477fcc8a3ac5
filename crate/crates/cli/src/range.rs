//! Sweep range specifications.

use std::fmt;
use std::str::FromStr;

use crate::error::CliError;

/// `start:stop:step` (linear, inclusive of `stop` when it lies on the grid)
/// or `start:stop:count` (log-spaced, inclusive of both ends).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepRange {
    Linear { start: f64, stop: f64, step: f64 },
    Log { start: f64, stop: f64, count: usize },
}

/// Points this close to `stop`, relative to the step, still count as on the
/// grid.
const GRID_SLACK: f64 = 1e-9;

/// Upper bound on the number of points, so a typo cannot exhaust memory.
pub const MAX_POINTS: usize = 1_000_000;

fn three_fields(s: &str) -> Result<[&str; 3], CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    <[&str; 3]>::try_from(parts).map_err(|_| CliError::Usage(format!("range {s:?} must have the form a:b:c")))
}

fn finite(field: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{what} {field:?} is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{what} {field:?} is not finite")))
    }
}

impl SweepRange {
    pub fn parse_linear(s: &str) -> Result<Self, CliError> {
        let [a, b, c] = three_fields(s)?;
        let (start, stop, step) = (finite(a, "start")?, finite(b, "stop")?, finite(c, "step")?);
        if !(step > 0.0) {
            return Err(CliError::Usage(format!("step must be positive in {s:?}")));
        }
        if stop > start && (stop - start) / step > MAX_POINTS as f64 {
            return Err(CliError::Usage(format!("range {s:?} has more than {MAX_POINTS} points")));
        }
        Ok(SweepRange::Linear { start, stop, step })
    }

    pub fn parse_log(s: &str) -> Result<Self, CliError> {
        let [a, b, c] = three_fields(s)?;
        let (start, stop) = (finite(a, "start")?, finite(b, "stop")?);
        if !(start > 0.0 && stop > 0.0) {
            return Err(CliError::Usage(format!("log range {s:?} needs positive ends")));
        }
        let count: usize = c
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("point count {c:?} is not a non-negative integer")))?;
        if count > MAX_POINTS {
            return Err(CliError::Usage(format!("range {s:?} has more than {MAX_POINTS} points")));
        }
        Ok(SweepRange::Log { start, stop, count })
    }

    /// The sweep points in order; empty when `stop < start` for a linear
    /// range or `count = 0` for a log range.
    pub fn points(&self) -> Vec<f64> {
        match *self {
            SweepRange::Linear { start, stop, step } => {
                if stop < start {
                    return Vec::new();
                }
                let n = ((stop - start) / step + GRID_SLACK).floor() as usize;
                (0..=n).map(|i| start + step * i as f64).collect()
            }
            SweepRange::Log { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![start],
                _ => {
                    let (la, lb) = (start.ln(), stop.ln());
                    (0..count)
                        .map(|i| match i {
                            0 => start,
                            i if i == count - 1 => stop,
                            _ => (la + (lb - la) * i as f64 / (count - 1) as f64).exp(),
                        })
                        .collect()
                }
            },
        }
    }
}

impl fmt::Display for SweepRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepRange::Linear { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
            SweepRange::Log { start, stop, count } => write!(f, "{start}:{stop}:{count}"),
        }
    }
}

/// Parses the linear form; use [`SweepRange::parse_log`] for log ranges.
impl FromStr for SweepRange {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepRange::parse_linear(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_includes_stop() {
        let pts = SweepRange::parse_linear("20:200:10").unwrap().points();
        assert_eq!(pts.len(), 19);
        assert_eq!(pts[0], 20.0);
        assert_eq!(*pts.last().unwrap(), 200.0);
    }

    #[test]
    fn linear_with_inexact_step() {
        let pts = SweepRange::parse_linear("0:1:0.1").unwrap().points();
        assert_eq!(pts.len(), 11);
    }

    #[test]
    fn log_hits_both_ends() {
        let pts = SweepRange::parse_log("0.03:1:25").unwrap().points();
        assert_eq!(pts.len(), 25);
        assert_eq!(pts[0], 0.03);
        assert_eq!(pts[24], 1.0);
        assert!(pts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn empty_ranges() {
        assert!(SweepRange::parse_linear("5:1:1").unwrap().points().is_empty());
        assert!(SweepRange::parse_log("1:2:0").unwrap().points().is_empty());
    }

    #[test]
    fn malformed() {
        for s in ["", "1:2", "1:2:3:4", "a:2:1", "1:2:0", "1:2:-1", "1:inf:1", "0:1e300:1e-300"] {
            assert!(SweepRange::parse_linear(s).is_err(), "{s}");
        }
        for s in ["0:1:5", "1:2:x", "-1:2:3", "1:2:-3"] {
            assert!(SweepRange::parse_log(s).is_err(), "{s}");
        }
    }

    #[test]
    fn display_round_trips() {
        let r = SweepRange::parse_linear("0.5:3:0.25").unwrap();
        assert_eq!(SweepRange::parse_linear(&r.to_string()).unwrap(), r);
    }
}
