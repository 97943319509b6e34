use std::path::Path;

use serde::{Deserialize, Serialize};

use super::signals::SignalClass;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierRecord {
    pub carrier_index: u32,
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    pub incumbent_protected: bool,
    pub max_power_dbm: f64,
}

impl CarrierRecord {
    fn edges(&self) -> (f64, f64) {
        (self.center_hz - self.bandwidth_hz / 2.0, self.center_hz + self.bandwidth_hz / 2.0)
    }
}

/// Lowest link SNR at which an MCS index may be used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsThreshold {
    pub mcs_index: u8,
    pub min_snr_db: f64,
}

/// Regulatory view of the shared band, stored as TOML:
///
/// ```toml
/// [[carrier]]
/// carrier_index = 0
/// center_hz = 3.56e9
/// bandwidth_hz = 20e6
/// incumbent_protected = false
/// max_power_dbm = 30.0
///
/// [[mcs]]
/// mcs_index = 0
/// min_snr_db = -5.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyTable {
    #[serde(rename = "carrier", default)]
    pub carriers: Vec<CarrierRecord>,
    #[serde(rename = "mcs", default)]
    pub mcs: Vec<McsThreshold>,
}

pub const MAX_MCS_INDEX: u8 = 9;

impl PolicyTable {
    pub fn new(carriers: Vec<CarrierRecord>, mcs: Vec<McsThreshold>) -> Result<Self> {
        let t = Self { carriers, mcs };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.carriers.iter().enumerate() {
            if !(a.bandwidth_hz > 0.0) {
                return Err(Error::InvalidArgument(format!("carrier {} has no bandwidth", a.carrier_index)));
            }
            for b in &self.carriers[i + 1..] {
                if a.carrier_index == b.carrier_index {
                    return Err(Error::InvalidArgument(format!("duplicate carrier {}", a.carrier_index)));
                }
                let ((a0, a1), (b0, b1)) = (a.edges(), b.edges());
                if a0 < b1 && b0 < a1 {
                    return Err(Error::InvalidArgument(format!(
                        "carriers {} and {} overlap",
                        a.carrier_index, b.carrier_index
                    )));
                }
            }
        }
        if self.mcs.windows(2).any(|w| !(w[1].min_snr_db > w[0].min_snr_db)) {
            return Err(Error::InvalidArgument("MCS thresholds must be strictly increasing".into()));
        }
        if self.mcs.iter().any(|m| m.mcs_index > MAX_MCS_INDEX) {
            return Err(Error::InvalidArgument(format!("MCS index above {MAX_MCS_INDEX}")));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let t: Self = toml::from_str(text).map_err(|e| Error::Config(format!("policy table: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Spectrum-access verdict. When access is denied every other field holds
/// its sentinel: carrier and MCS `-1`, bandwidth `0`, power `-inf` dBm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumDecision {
    pub access_granted: bool,
    pub carrier_index: i64,
    pub bandwidth_hz: f64,
    pub mcs_index: i32,
    pub tx_power_dbm: f64,
}

impl SpectrumDecision {
    pub const DENIED: SpectrumDecision = SpectrumDecision {
        access_granted: false,
        carrier_index: -1,
        bandwidth_hz: 0.0,
        mcs_index: -1,
        tx_power_dbm: f64::NEG_INFINITY,
    };

    /// Single-line `key=value` record.
    pub fn record(&self) -> String {
        format!(
            "decision granted={} carrier={} bandwidth_hz={} mcs={} tx_power_dbm={}",
            self.access_granted, self.carrier_index, self.bandwidth_hz, self.mcs_index, self.tx_power_dbm
        )
    }
}

/// Grant the lowest-index carrier that is sensed idle (`NOISE`) and not
/// protected, at that carrier's power cap, with the highest MCS whose
/// threshold the link SNR meets. `occupancy[i]` is the sensed class of
/// `policy.carriers[i]`. No free carrier, or a link below every MCS threshold,
/// denies access.
pub fn decide_spectrum(
    occupancy: &[SignalClass],
    policy: &PolicyTable,
    link_snr_db: f64,
) -> Result<SpectrumDecision> {
    if policy.carriers.is_empty() {
        return Err(Error::InvalidArgument("policy table lists no carriers".into()));
    }
    if occupancy.len() != policy.carriers.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} occupancy labels for {} carriers",
            occupancy.len(),
            policy.carriers.len()
        )));
    }
    let carrier = policy
        .carriers
        .iter()
        .zip(occupancy)
        .filter(|(c, &o)| o == SignalClass::Noise && !c.incumbent_protected)
        .map(|(c, _)| c)
        .min_by_key(|c| c.carrier_index);
    let mcs = policy.mcs.iter().rev().find(|m| m.min_snr_db <= link_snr_db);
    match (carrier, mcs) {
        (Some(c), Some(m)) => Ok(SpectrumDecision {
            access_granted: true,
            carrier_index: c.carrier_index as i64,
            bandwidth_hz: c.bandwidth_hz,
            mcs_index: m.mcs_index as i32,
            tx_power_dbm: c.max_power_dbm,
        }),
        _ => Ok(SpectrumDecision::DENIED),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SignalClass::*;

    fn carrier(i: u32, protected: bool) -> CarrierRecord {
        CarrierRecord {
            carrier_index: i,
            center_hz: 3.55e9 + 20e6 * i as f64,
            bandwidth_hz: 20e6,
            incumbent_protected: protected,
            max_power_dbm: 30.0 - i as f64,
        }
    }

    fn thresholds() -> Vec<McsThreshold> {
        vec![
            McsThreshold { mcs_index: 0, min_snr_db: -5.0 },
            McsThreshold { mcs_index: 4, min_snr_db: 10.0 },
            McsThreshold { mcs_index: 9, min_snr_db: 25.0 },
        ]
    }

    #[test]
    fn rule_table_walk_through() {
        let p = PolicyTable::new(vec![carrier(0, false), carrier(1, false)], thresholds()).unwrap();
        let d = decide_spectrum(&[Lte, Noise], &p, 12.0).unwrap();
        assert!(d.access_granted);
        assert_eq!((d.carrier_index, d.mcs_index, d.tx_power_dbm, d.bandwidth_hz), (1, 4, 29.0, 20e6));
    }

    #[test]
    fn all_idle_grants_carrier_zero_and_all_busy_denies() {
        let p = PolicyTable::new(vec![carrier(0, false), carrier(1, false)], thresholds()).unwrap();
        let d = decide_spectrum(&[Noise, Noise], &p, 30.0).unwrap();
        assert_eq!((d.carrier_index, d.mcs_index, d.tx_power_dbm), (0, 9, 30.0));
        assert_eq!(decide_spectrum(&[Lte, Lte], &p, 30.0).unwrap(), SpectrumDecision::DENIED);
        assert_eq!(decide_spectrum(&[Noise, Noise], &p, -6.0).unwrap(), SpectrumDecision::DENIED);
    }

    #[test]
    fn protected_carrier_skipped() {
        let p = PolicyTable::new(vec![carrier(0, true), carrier(1, false)], thresholds()).unwrap();
        assert_eq!(decide_spectrum(&[Noise, Noise], &p, 0.0).unwrap().carrier_index, 1);
    }

    #[test]
    fn invalid_tables_rejected() {
        let overlap = CarrierRecord { center_hz: 3.56e9, ..carrier(1, false) };
        assert!(PolicyTable::new(vec![carrier(0, false), overlap], thresholds()).is_err());
        let mut t = thresholds();
        t[2].min_snr_db = 10.0;
        assert!(PolicyTable::new(vec![carrier(0, false)], t).is_err());
        let high = vec![McsThreshold { mcs_index: 10, min_snr_db: 0.0 }];
        assert!(PolicyTable::new(vec![carrier(0, false)], high).is_err());
        let empty = PolicyTable { carriers: vec![], mcs: thresholds() };
        assert!(decide_spectrum(&[], &empty, 0.0).is_err());
        let p = PolicyTable::new(vec![carrier(0, false)], thresholds()).unwrap();
        assert!(decide_spectrum(&[Noise, Noise], &p, 0.0).is_err());
    }

    #[test]
    fn toml_roundtrip_and_strict_keys() {
        let p = PolicyTable::new(vec![carrier(0, false), carrier(1, true)], thresholds()).unwrap();
        let text = p.to_toml().unwrap();
        assert_eq!(PolicyTable::from_toml(&text).unwrap(), p);
        assert!(PolicyTable::from_toml("[[carrier]]\ncarrier_index = 0\ncolor = 1\n").is_err());
    }

    #[test]
    fn record_is_one_line() {
        assert_eq!(
            SpectrumDecision::DENIED.record(),
            "decision granted=false carrier=-1 bandwidth_hz=0 mcs=-1 tx_power_dbm=-inf"
        );
    }
}
