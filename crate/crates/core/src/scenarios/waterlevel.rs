use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FaultDecl, ProcessDecl, Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::sim::{Assertion, Connection, Param, Severity, UncertainParam};

/// Parameters of the water-level monitor.
///
/// The tank, sensor and controller run every `period`; the observer runs
/// every `observer_period` and reads the first pump command of each window.
/// A pump command reaches the tank `actuator_delay` seconds after it is
/// issued.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaterLevelParams {
    pub level0: f64,
    pub falling: (f64, f64),
    pub rising: (f64, f64),
    pub empty: f64,
    pub full: f64,
    pub spec_bounds: (f64, f64),
    pub unsafe_level: f64,
    pub timeout: f64,
    /// Longest pump run once the error mode is set.
    pub on_limit: f64,
    pub actuator_delay: f64,
    pub period: f64,
    pub observer_period: f64,
    pub horizon: f64,
}

impl Default for WaterLevelParams {
    fn default() -> Self {
        WaterLevelParams {
            level0: 8.0,
            falling: (2.0, 0.1),
            rising: (1.0, 0.1),
            empty: 5.0,
            full: 10.0,
            spec_bounds: (1.0, 12.0),
            unsafe_level: 15.0,
            timeout: 10.0,
            on_limit: 5.0,
            actuator_delay: 2.0,
            period: 0.1,
            observer_period: 1.0,
            horizon: 40.0,
        }
    }
}

pub const FAULT: &str = "sensor_fault";

fn decl(name: &str, kind: &str, period: f64, params: &[(&str, Param)]) -> ProcessDecl {
    ProcessDecl {
        name: name.to_string(),
        kind: kind.to_string(),
        period,
        params: params
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect::<BTreeMap<_, _>>(),
    }
}

fn ticks(secs: f64, period: f64) -> Result<u32> {
    let n = (secs / period).round();
    if (n * period - secs).abs() > 1e-9 || n < 0.0 {
        return Err(Error::Config(format!(
            "{secs} s is not a whole number of {period} s periods"
        )));
    }
    Ok(n as u32)
}

impl WaterLevelParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.spec_bounds;
        if !(lo < self.empty && self.empty < self.full && self.full < hi && hi < self.unsafe_level) {
            return Err(Error::Config(
                "thresholds must satisfy spec_lo < empty < full < spec_hi < unsafe".into(),
            ));
        }
        Ok(())
    }

    fn uncertain(&self) -> Vec<UncertainParam> {
        vec![
            UncertainParam {
                name: "falling".into(),
                center: self.falling.0,
                radius: self.falling.1,
            },
            UncertainParam {
                name: "rising".into(),
                center: self.rising.0,
                radius: self.rising.1,
            },
        ]
    }

    fn assertions(&self) -> Vec<Assertion> {
        vec![
            Assertion::new(
                "tank.level",
                Some(self.spec_bounds.0),
                Some(self.spec_bounds.1),
                Severity::Spec,
            ),
            Assertion::new("tank.level", None, Some(self.unsafe_level), Severity::Safety),
        ]
    }

    fn tank(&self) -> ProcessDecl {
        decl(
            "tank",
            "tank",
            self.period,
            &[
                ("level0", self.level0.into()),
                ("rising", "rising".into()),
                ("falling", "falling".into()),
            ],
        )
    }

    /// The monitor with or without the sensor fault and the observer.
    pub fn config(&self, fault: bool, observer: bool) -> Result<ScenarioConfig> {
        self.validate()?;
        let mut sensor = vec![("empty", self.empty.into()), ("full", self.full.into())];
        if fault {
            sensor.push(("fault", FAULT.into()));
        }
        let mut process = vec![
            self.tank(),
            decl("sensor", "level_sensor", self.period, &sensor),
            decl(
                "controller",
                "pump_controller",
                self.period,
                &[("fail_safe", observer.into()), ("limit", self.on_limit.into())],
            ),
        ];
        let mut connection = vec![
            Connection::new("tank.level", "sensor.level")?,
            Connection::new("sensor.empty", "controller.empty")?,
            Connection::new("sensor.full", "controller.full")?,
            Connection::new("controller.pump", "tank.pump")?
                .delayed(ticks(self.actuator_delay, self.period)?, false),
        ];
        if observer {
            let rate = ticks(self.observer_period, self.period)?;
            process.push(decl(
                "observer",
                "observer",
                self.observer_period,
                &[("rate", f64::from(rate).into()), ("timeout", self.timeout.into())],
            ));
            connection.push(Connection::new("controller.pump", "observer.pump")?);
            connection.push(Connection::new("observer.error", "controller.error")?.delayed(rate, false));
        }
        Ok(ScenarioConfig {
            name: "waterlevel".into(),
            horizon: self.horizon,
            uncertain: self.uncertain(),
            fault: if fault {
                vec![FaultDecl { name: FAULT.into() }]
            } else {
                Vec::new()
            },
            process,
            connection,
            assertion: self.assertions(),
        })
    }

    pub fn scenario(&self, fault: bool, observer: bool) -> Result<Scenario> {
        Scenario::from_config(self.config(fault, observer)?)
    }

    /// The tank alone with the pump held on or off.
    pub fn forced_pump(&self, on: bool) -> Result<ScenarioConfig> {
        Ok(ScenarioConfig {
            name: format!("tank-pump-{}", if on { "on" } else { "off" }),
            horizon: self.horizon,
            uncertain: self.uncertain(),
            fault: Vec::new(),
            process: vec![
                decl("pump", "constant", self.period, &[("value", on.into())]),
                self.tank(),
            ],
            connection: vec![Connection::new("pump.y", "tank.pump")?],
            assertion: self.assertions(),
        })
    }
}
