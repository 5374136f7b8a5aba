use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The three state-transfer problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    #[serde(rename = "bhw")]
    BringHomeWater,
    #[serde(rename = "splitting")]
    Splitting,
    #[serde(rename = "shakeup")]
    ShakeUp,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::BringHomeWater, Level::Splitting, Level::ShakeUp];

    pub fn id(&self) -> &'static str {
        match self {
            Level::BringHomeWater => "bhw",
            Level::Splitting => "splitting",
            Level::ShakeUp => "shakeup",
        }
    }

    /// Approximate F = 0.99 speed limit in milliseconds, used to normalize duration axes.
    pub fn reference_qsl_ms(&self) -> f64 {
        match self {
            Level::BringHomeWater => 0.0973,
            Level::Splitting => 0.92,
            Level::ShakeUp => 0.89,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bhw" => Ok(Level::BringHomeWater),
            "splitting" => Ok(Level::Splitting),
            "shakeup" => Ok(Level::ShakeUp),
            other => Err(Error::InvalidArgument(format!("unknown level '{other}'"))),
        }
    }
}
