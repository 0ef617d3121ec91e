use std::path::{Path, PathBuf};

use radionet::protocols::CompeteConfig;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Version stamped into every config, constants and spec file.
pub const SCHEMA_VERSION: u32 = 1;

/// Built-in constant profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Asymptotic constants and exponents; needs `D >= 1024`.
    Paper,
    /// Same exponents with a j-range and background floor usable at `D` in the hundreds.
    #[default]
    Desk,
}

impl Profile {
    pub fn config(self) -> CompeteConfig {
        match self {
            Profile::Paper => CompeteConfig::paper(),
            Profile::Desk => CompeteConfig::desk(),
        }
    }
}

/// A versioned Compete configuration file, as in `config/desk.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: u32,
    pub profile: String,
    pub compete: CompeteConfig,
}

impl ConfigFile {
    pub fn from_profile(p: Profile) -> Self {
        let profile = match p {
            Profile::Paper => "paper",
            Profile::Desk => "desk",
        };
        ConfigFile {
            schema: SCHEMA_VERSION,
            profile: profile.into(),
            compete: p.config(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ConfigFile = serde_json::from_str(&text)?;
        check_schema(file.schema)?;
        file.compete.validate()?;
        Ok(file)
    }
}

pub(crate) fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return config_err(format!("unsupported schema {schema}, expected {SCHEMA_VERSION}"));
    }
    Ok(())
}

/// Frozen constants for the calibrated envelopes.
///
/// Each constant is the worst ratio seen on the calibration battery, widened
/// by `margin` (divided by it for `p0`, which is a lower bound).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibrated {
    pub schema: u32,
    /// Strong diameter `<= c_diam·log n/β`.
    pub c_diam: f64,
    /// Edge cut probability `<= c_cut·β`.
    pub c_cut: f64,
    /// Mean center distance `<= c_cp·2^j·log n/log D`.
    pub c_cp: f64,
    /// Mean bad-subpath count `<= c_bad·D^0.63`.
    pub c_bad: f64,
    /// Decay reception probability with at least one participating neighbor.
    pub p0: f64,
    pub margin: f64,
    pub observed: Observed,
    /// Human-readable description of the battery.
    pub battery: Vec<String>,
}

/// Raw worst-case ratios behind [`Calibrated`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observed {
    pub diam_ratio: f64,
    pub cut_ratio: f64,
    pub cp_ratio: f64,
    pub bad_ratio: f64,
    pub decay_min: f64,
}

impl Calibrated {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let c: Calibrated = serde_json::from_str(&text)?;
        check_schema(c.schema)?;
        let all = [c.c_diam, c.c_cut, c.c_cp, c.c_bad, c.p0, c.margin];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) || c.p0 > 1.0 {
            return config_err(format!("{}: constants must be positive and p0 <= 1", path.display()));
        }
        Ok(c)
    }

    /// The frozen file shipped with the harness.
    pub fn frozen() -> Result<Self> {
        Calibrated::load(&frozen_path())
    }
}

/// Directory holding the shipped profiles and constants.
pub fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("config")
}

pub fn frozen_path() -> PathBuf {
    config_dir().join("calibrated.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_profiles_match_builtins() {
        for p in [Profile::Desk, Profile::Paper] {
            let name = if p == Profile::Desk { "desk.json" } else { "paper.json" };
            let file = ConfigFile::load(&config_dir().join(name)).unwrap();
            assert_eq!(file, ConfigFile::from_profile(p));
        }
    }

    #[test]
    fn frozen_constants_load() {
        let c = Calibrated::frozen().unwrap();
        assert!(c.margin >= 1.0);
        assert!(c.c_diam >= c.observed.diam_ratio);
        assert!(c.p0 <= c.observed.decay_min);
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let mut file = ConfigFile::from_profile(Profile::Desk);
        file.schema = 99;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        let err = ConfigFile::load(&path).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
