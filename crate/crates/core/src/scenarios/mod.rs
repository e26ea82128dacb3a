//! Declarative process networks and the shipped example models.
//!
//! A scenario file is TOML:
//!
//! ```toml
//! name = "tank"
//! horizon = 1.0
//!
//! [[uncertain]]
//! name = "falling"
//! center = 2.0
//! radius = 0.1
//!
//! [[process]]
//! name = "off"
//! kind = "constant"
//! period = 0.1
//! params = { value = false }
//!
//! [[process]]
//! name = "tank"
//! kind = "tank"
//! period = 0.1
//! params = { level0 = 8.0, rising = 1.0, falling = "falling" }
//!
//! [[connection]]
//! from = "off.y"
//! to = "tank.pump"
//!
//! [[assertion]]
//! signal = "tank.level"
//! lo = 1.0
//! hi = 12.0
//! severity = "spec"
//! ```
//!
//! Process kinds: `tank`, `level_sensor`, `pump_controller`, `observer`,
//! `constant`, `integrator`. Parameters that name a declared uncertainty or
//! fault take its symbolic value.

pub mod micro;
mod processes;
mod waterlevel;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use processes::{BoxedProcess, Constant, LevelSensor, Observer, PumpController, Tank};
pub use waterlevel::WaterLevelParams;

use crate::dd::Context;
use crate::error::{Error, Result};
use crate::sim::{
    check_assertions, compile_schedule, run_bounded, Assertion, Connection, Corner, Domain,
    Numeric, Param, Report, RunOptions, Schedule, SimTime, Symbolic, Trace, UncertainParam,
    Uncertainties,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultDecl {
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessDecl {
    pub name: String,
    pub kind: String,
    /// Seconds.
    pub period: f64,
    #[serde(default)]
    pub params: BTreeMap<String, Param>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Seconds; a multiple of the hyperperiod.
    pub horizon: f64,
    #[serde(default)]
    pub uncertain: Vec<UncertainParam>,
    #[serde(default)]
    pub fault: Vec<FaultDecl>,
    #[serde(default)]
    pub process: Vec<ProcessDecl>,
    #[serde(default)]
    pub connection: Vec<Connection>,
    #[serde(default)]
    pub assertion: Vec<Assertion>,
}

/// A validated scenario with its compiled schedule.
#[derive(Clone, Debug)]
pub struct Scenario {
    config: ScenarioConfig,
    uncertainties: Uncertainties,
    schedule: Schedule,
}

/// Outcome of one symbolic run.
#[derive(Clone, Debug)]
pub struct SymbolicRun {
    pub trace: Trace,
    pub report: Report,
    pub stats: RunStats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub wall_time_s: f64,
    pub lp_calls: u64,
    pub lp_fallbacks: u64,
    pub conditions: usize,
    pub max_leaf_count: usize,
    /// Largest leaf count over all signals at each traced tag.
    pub leaf_counts: Vec<(SimTime, usize)>,
}

impl RunStats {
    fn collect(trace: &Trace, ctx: &Context, elapsed: Duration) -> Self {
        let mut per_tag: BTreeMap<SimTime, usize> = BTreeMap::new();
        for s in &trace.signals {
            for e in &s.events {
                let c = per_tag.entry(e.time).or_default();
                *c = (*c).max(e.leaf_count);
            }
        }
        RunStats {
            wall_time_s: elapsed.as_secs_f64(),
            lp_calls: ctx.stats().lp_calls(),
            lp_fallbacks: ctx.stats().lp_fallbacks(),
            conditions: ctx.conditions().len(),
            max_leaf_count: trace.max_leaf_count(),
            leaf_counts: per_tag.into_iter().collect(),
        }
    }
}

impl Scenario {
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        let uncertainties = Uncertainties {
            reals: config.uncertain.clone(),
            faults: config.fault.iter().map(|f| f.name.clone()).collect(),
        };
        uncertainties.validate()?;
        if config.process.is_empty() {
            return Err(Error::Config("scenario has no processes".into()));
        }
        let horizon = SimTime::from_secs(config.horizon)?;
        let processes = build_processes::<Numeric>(&config, &uncertainties.faults)?;
        let specs: Vec<_> = processes.iter().map(|p| p.spec().clone()).collect();
        let schedule = compile_schedule(&specs, &config.connection)?;
        check_horizon(horizon, &schedule)?;
        for a in &config.assertion {
            if let (Some(lo), Some(hi)) = (a.lo, a.hi) {
                if !(lo < hi) {
                    return Err(Error::Config(format!(
                        "assertion on `{}` needs lo < hi",
                        a.signal
                    )));
                }
            }
            let known = schedule
                .specs
                .iter()
                .any(|s| s.outputs.iter().any(|o| format!("{}.{}", s.name, o.name) == a.signal));
            if !known {
                return Err(Error::UnknownSignal(a.signal.clone()));
            }
        }
        Ok(Scenario {
            config,
            uncertainties,
            schedule,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_config(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&self.config).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn uncertainties(&self) -> &Uncertainties {
        &self.uncertainties
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn horizon(&self) -> SimTime {
        SimTime::from_secs(self.config.horizon).expect("checked on load")
    }

    /// Run options for the scenario's own horizon.
    pub fn run_options(&self) -> RunOptions {
        RunOptions::new(self.horizon())
    }

    /// Runs the network over any domain.
    pub fn run_in<D: Domain>(&self, d: &D, opts: &RunOptions) -> Result<Trace> {
        check_horizon(opts.horizon, &self.schedule)?;
        let mut processes = build_processes::<D>(&self.config, &self.uncertainties.faults)?;
        run_bounded(d, &mut processes, &self.schedule, opts)
    }

    /// Symbolic run over `ctx`, which must be fresh for this run.
    pub fn run_symbolic(&self, ctx: &Context, opts: &RunOptions) -> Result<SymbolicRun> {
        let start = Instant::now();
        let d = Symbolic::new(ctx, &self.uncertainties)?;
        let mut trace = self.run_in(&d, opts)?;
        trace.conditions = ctx.conditions().snapshot();
        let report = self.check(&trace)?;
        let stats = RunStats::collect(&trace, ctx, start.elapsed());
        Ok(SymbolicRun {
            trace,
            report,
            stats,
        })
    }

    /// Plain numeric run for one assignment of the uncertainties.
    pub fn run_numeric(&self, corner: &Corner, opts: &RunOptions) -> Result<Trace> {
        let d = Numeric::new(&self.uncertainties, corner)?;
        let opts = RunOptions {
            reduce: false,
            record_leaves: false,
            ..opts.clone()
        };
        self.run_in(&d, &opts)
    }

    /// Checks the scenario's assertions against `trace`.
    pub fn check(&self, trace: &Trace) -> Result<Report> {
        let checked: Vec<Assertion> = self
            .config
            .assertion
            .iter()
            .filter(|a| trace.signal(&a.signal).is_some())
            .cloned()
            .collect();
        check_assertions(trace, &checked)
    }
}

fn check_horizon(horizon: SimTime, schedule: &Schedule) -> Result<()> {
    if horizon.is_zero() || !horizon.micros().is_multiple_of(schedule.hyperperiod.micros()) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} s is not a positive multiple of the hyperperiod {} s",
            schedule.hyperperiod
        )));
    }
    Ok(())
}

fn build_processes<'p, D: Domain + 'p>(
    config: &ScenarioConfig,
    faults: &[String],
) -> Result<Vec<BoxedProcess<'p, D>>> {
    config
        .process
        .iter()
        .map(|p| {
            let period = SimTime::from_secs(p.period)
                .map_err(|e| Error::Config(format!("process `{}`: {e}", p.name)))?;
            processes::build::<D>(&p.name, &p.kind, period, &p.params, faults)
        })
        .collect()
}
