//! TOML configuration: a `[vehicle]` table of physical parameters and a
//! `[gains]` table of controller gains. Omitted keys keep their defaults;
//! unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::controllers::ControlGains;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vehicle::VehicleParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(
    deserialize = "S: Real + Deserialize<'de>",
    serialize = "S: Real + Serialize"
))]
pub struct Config<S> {
    /// Optional cross-check of `m + 2·m_w`, kg.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_mass: Option<S>,
    pub vehicle: VehicleParams<S>,
    pub gains: ControlGains<S>,
}

impl<S: Real> Default for Config<S> {
    fn default() -> Self {
        Self {
            total_mass: None,
            vehicle: VehicleParams::default(),
            gains: ControlGains::default(),
        }
    }
}

impl<S: Real> Config<S> {
    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.gains.validate()?;
        if let Some(total) = self.total_mass {
            let actual = self.vehicle.total_mass();
            if (total - actual).abs() > S::lit(1e-9) * total.abs().max(S::one()) {
                return Err(Error::Config(format!(
                    "total_mass = {total} but m + 2·m_w = {actual}"
                )));
            }
        }
        Ok(())
    }
}

impl<S: Real + for<'de> Deserialize<'de> + Serialize> Config<S> {
    /// Parses and validates a configuration document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_table(table)
    }

    /// Defaults overridden key by key from `table`, at any nesting depth.
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let mut base =
            toml::Table::try_from(Self::default()).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, table);
        let cfg: Self = base
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(Config::<f64>::from_toml_str("").unwrap(), Config::default());
    }

    #[test]
    fn partial_override() {
        let cfg = Config::<f64>::from_toml_str(
            "[vehicle]\nm = 3.0\npitch_stop = inf\n[gains]\nt_hold = 9.5\n",
        )
        .unwrap();
        assert_eq!(cfg.vehicle.m, 3.0);
        assert!(cfg.vehicle.pitch_stop.is_infinite());
        assert_eq!(cfg.vehicle.m_w, VehicleParams::<f64>::default().m_w);
        assert_eq!(cfg.gains.t_hold, 9.5);
    }

    #[test]
    fn nested_override_keeps_sibling_gains() {
        let cfg =
            Config::<f64>::from_toml_str("[gains.decoupled]\nsign_rule = \"printed\"\n").unwrap();
        let d = ControlGains::<f64>::default().decoupled;
        assert_eq!(cfg.gains.decoupled.kp_theta, d.kp_theta);
        assert_ne!(cfg.gains.decoupled.sign_rule, d.sign_rule);
        assert!(Config::<f64>::from_toml_str("[gains.decoupled]\nkp_thetaa = 1.0\n").is_err());
    }

    #[test]
    fn round_trips() {
        let cfg = Config::<f64>::default();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(Config::<f64>::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::<f64>::from_toml_str("[vehicle]\nmass = 2.0\n").is_err());
        assert!(Config::<f64>::from_toml_str("[vehicle]\nfm = 1.5\n").is_err());
        assert!(Config::<f64>::from_toml_str("[gains]\nthr_idle = 0.9\n").is_err());
    }

    #[test]
    fn total_mass_cross_check() {
        assert!(Config::<f64>::from_toml_str("total_mass = 2.78\n").is_ok());
        assert!(Config::<f64>::from_toml_str("total_mass = 2.63\n").is_err());
    }
}
