use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EngineError;

/// Generator behind seeded schedules; recorded in trace metadata.
pub const SCHEDULE_PRNG: &str = "rand_chacha-0.3 ChaCha8Rng seed_from_u64(seed) stream=k";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScheduleKind {
    /// `tau(k) = max(0, k - D)`.
    WorstCase,
    /// Delay drawn uniformly from `0..=min(k, D)` at each `k`.
    Random { seed: u64 },
    /// `tau(k) = k`.
    Zero,
}

/// Read instants `tau(k)`, shared by all agents, with `k - tau(k) <= D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySchedule {
    pub bound: usize,
    pub kind: ScheduleKind,
}

impl DelaySchedule {
    pub fn worst_case(bound: usize) -> Self {
        DelaySchedule {
            bound,
            kind: ScheduleKind::WorstCase,
        }
    }

    pub fn random(bound: usize, seed: u64) -> Self {
        DelaySchedule {
            bound,
            kind: ScheduleKind::Random { seed },
        }
    }

    /// No delay; `bound` is kept for the step-size rule.
    pub fn zero(bound: usize) -> Self {
        DelaySchedule {
            bound,
            kind: ScheduleKind::Zero,
        }
    }

    pub fn tau(&self, k: usize) -> usize {
        match self.kind {
            ScheduleKind::WorstCase => k.saturating_sub(self.bound),
            ScheduleKind::Zero => k,
            ScheduleKind::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let delay = rng.gen_range(0..=k.min(self.bound));
                k - delay
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.kind {
            ScheduleKind::Random { seed } => Some(seed),
            _ => None,
        }
    }

    /// Parses `worst`, `zero` or `random:<seed>`.
    pub fn parse(spec: &str, bound: usize) -> Result<Self, EngineError> {
        Ok(DelaySchedule {
            bound,
            kind: spec.parse()?,
        })
    }
}

impl FromStr for ScheduleKind {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "worst" => Ok(ScheduleKind::WorstCase),
            "zero" => Ok(ScheduleKind::Zero),
            _ => s
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(|seed| ScheduleKind::Random { seed })
                .ok_or_else(|| {
                    EngineError::InvalidConfig(format!(
                        "unknown schedule {s:?}, expected worst, zero or random:<seed>"
                    ))
                }),
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::WorstCase => write!(f, "worst"),
            ScheduleKind::Zero => write!(f, "zero"),
            ScheduleKind::Random { seed } => write!(f, "random:{seed}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_case_map() {
        let s = DelaySchedule::worst_case(5);
        assert_eq!(s.tau(1), 0);
        assert_eq!(s.tau(5), 0);
        assert_eq!(s.tau(9), 4);
        assert_eq!(DelaySchedule::zero(5).tau(9), 9);
    }

    #[test]
    fn random_is_bounded_and_reproducible() {
        let s = DelaySchedule::random(4, 7);
        let a: Vec<usize> = (0..200).map(|k| s.tau(k)).collect();
        let b: Vec<usize> = (0..200).map(|k| s.tau(k)).collect();
        assert_eq!(a, b);
        for (k, &t) in a.iter().enumerate() {
            assert!(t <= k && k - t <= 4);
        }
        assert!(a.iter().enumerate().any(|(k, &t)| k - t == 4));
        assert!(a.iter().enumerate().skip(4).any(|(k, &t)| k == t));
        let other: Vec<usize> = (0..200).map(|k| DelaySchedule::random(4, 8).tau(k)).collect();
        assert_ne!(a, other);
    }

    #[test]
    fn parsing() {
        assert_eq!(DelaySchedule::parse("worst", 3).unwrap(), DelaySchedule::worst_case(3));
        assert_eq!(DelaySchedule::parse("random:42", 3).unwrap(), DelaySchedule::random(3, 42));
        assert_eq!("zero".parse::<ScheduleKind>().unwrap().to_string(), "zero");
        assert!(DelaySchedule::parse("random:x", 3).is_err());
        assert!(DelaySchedule::parse("best", 3).is_err());
    }
}
