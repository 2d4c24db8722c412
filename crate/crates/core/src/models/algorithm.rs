use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::series::FeatureSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemperatureKind {
    Linear,
    Piecewise,
    Spline,
    Isotonic,
    Multivariate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SocialMode {
    Weekly,
    Yearly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HistoryMode {
    /// One model per target hour of week.
    NoHistory,
    /// One model per (origin hour of week, lead).
    WithHistory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Dotzauer,
    Wrnh,
    Wrwh,
    Neural,
    Baseline,
}

/// Forecasting algorithm, named by its short nickname (`DPLW`, `WRWH0`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Dotzauer { temperature: TemperatureKind, social: SocialMode },
    WRegressor { history: HistoryMode, features: FeatureSet },
    Ffnn,
    Rbfnn,
    C100,
}

const WR_SETS: [FeatureSet; 5] = [FeatureSet::FS0, FeatureSet::FS1, FeatureSet::FS2, FeatureSet::FS3, FeatureSet::FS4];

impl Algorithm {
    /// Every algorithm, in report order.
    pub fn all() -> Vec<Algorithm> {
        let mut out = Vec::new();
        for temperature in [
            TemperatureKind::Linear,
            TemperatureKind::Piecewise,
            TemperatureKind::Spline,
            TemperatureKind::Isotonic,
            TemperatureKind::Multivariate,
        ] {
            for social in [SocialMode::Weekly, SocialMode::Yearly] {
                out.push(Algorithm::Dotzauer { temperature, social });
            }
        }
        for history in [HistoryMode::NoHistory, HistoryMode::WithHistory] {
            for features in WR_SETS {
                out.push(Algorithm::WRegressor { history, features });
            }
        }
        out.extend([Algorithm::Ffnn, Algorithm::Rbfnn, Algorithm::C100]);
        out
    }

    pub fn family(&self) -> Family {
        match self {
            Algorithm::Dotzauer { .. } => Family::Dotzauer,
            Algorithm::WRegressor { history: HistoryMode::NoHistory, .. } => Family::Wrnh,
            Algorithm::WRegressor { history: HistoryMode::WithHistory, .. } => Family::Wrwh,
            Algorithm::Ffnn | Algorithm::Rbfnn => Family::Neural,
            Algorithm::C100 => Family::Baseline,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Algorithm::Dotzauer { temperature, social } => {
                let t = match temperature {
                    TemperatureKind::Linear => "L",
                    TemperatureKind::Piecewise => "PL",
                    TemperatureKind::Spline => "S",
                    TemperatureKind::Isotonic => "I",
                    TemperatureKind::Multivariate => "M",
                };
                let s = match social {
                    SocialMode::Weekly => "W",
                    SocialMode::Yearly => "Y",
                };
                format!("D{t}{s}")
            }
            Algorithm::WRegressor { history, features } => {
                let h = match history {
                    HistoryMode::NoHistory => "NH",
                    HistoryMode::WithHistory => "WH",
                };
                let k = WR_SETS.iter().position(|f| *f == features).unwrap_or(3);
                format!("WR{h}{k}")
            }
            Algorithm::Ffnn => "FFNN".into(),
            Algorithm::Rbfnn => "RBFNN".into(),
            Algorithm::C100 => "C100".into(),
        }
    }

    /// Parse a comma-separated list of nicknames.
    pub fn parse_list(s: &str) -> Result<Vec<Algorithm>, Error> {
        s.split(',').filter(|p| !p.trim().is_empty()).map(|p| p.trim().parse()).collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let key = s.trim().to_ascii_uppercase().replace('-', "");
        Algorithm::all()
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

impl Serialize for Algorithm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nicknames_round_trip() {
        let names: Vec<String> = Algorithm::all().iter().map(Algorithm::name).collect();
        assert_eq!(
            names,
            [
                "DLW", "DLY", "DPLW", "DPLY", "DSW", "DSY", "DIW", "DIY", "DMW", "DMY", "WRNH0", "WRNH1", "WRNH2",
                "WRNH3", "WRNH4", "WRWH0", "WRWH1", "WRWH2", "WRWH3", "WRWH4", "FFNN", "RBFNN", "C100"
            ]
        );
        for a in Algorithm::all() {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("C-100".parse::<Algorithm>().unwrap(), Algorithm::C100);
        assert_eq!("dplw".parse::<Algorithm>().unwrap().family(), Family::Dotzauer);
        assert!("DXW".parse::<Algorithm>().is_err());
        assert_eq!(Algorithm::parse_list("DPLW, WRWH0,C100").unwrap().len(), 3);
    }
}
