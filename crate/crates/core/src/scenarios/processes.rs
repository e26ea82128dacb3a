//! Process kinds available to scenario files.

use std::collections::BTreeMap;

use crate::dd::LeafKind;
use crate::error::{Error, Result};
use crate::lp::Sense;
use crate::sim::{Domain, Integrator, Io, Param, PortSpec, Process, ProcessSpec, Sample, SimTime};

pub type BoxedProcess<'p, D> = Box<dyn Process<D> + 'p>;

/// Typed access to a `[process.params]` table. Every key must be read, so
/// misspelled parameters are reported.
pub(crate) struct Params<'a> {
    process: &'a str,
    table: &'a BTreeMap<String, Param>,
    used: Vec<&'a str>,
}

impl<'a> Params<'a> {
    pub(crate) fn new(process: &'a str, table: &'a BTreeMap<String, Param>) -> Self {
        Params {
            process,
            table,
            used: Vec::new(),
        }
    }

    fn err(&self, msg: String) -> Error {
        Error::Config(format!("process `{}`: {msg}", self.process))
    }

    pub(crate) fn param(&mut self, key: &'a str, default: Option<Param>) -> Result<Param> {
        self.used.push(key);
        match (self.table.get(key), default) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.err(format!("missing parameter `{key}`"))),
        }
    }

    pub(crate) fn number(&mut self, key: &'a str, default: Option<f64>) -> Result<f64> {
        let p = self.param(key, default.map(Param::Number))?;
        p.as_number()
            .ok_or_else(|| self.err(format!("parameter `{key}` must be a number")))
    }

    pub(crate) fn flag(&mut self, key: &'a str, default: bool) -> Result<bool> {
        match self.param(key, Some(Param::Bool(default)))? {
            Param::Bool(b) => Ok(b),
            _ => Err(self.err(format!("parameter `{key}` must be true or false"))),
        }
    }

    pub(crate) fn optional_name(&mut self, key: &'a str) -> Result<Option<String>> {
        self.used.push(key);
        match self.table.get(key) {
            None => Ok(None),
            Some(Param::Name(n)) => Ok(Some(n.clone())),
            Some(_) => Err(self.err(format!("parameter `{key}` must name a fault"))),
        }
    }

    pub(crate) fn finish(self) -> Result<()> {
        for key in self.table.keys() {
            if !self.used.contains(&key.as_str()) {
                return Err(self.err(format!("unknown parameter `{key}`")));
            }
        }
        Ok(())
    }
}

fn spec(name: &str, period: SimTime, inputs: Vec<PortSpec>, outputs: Vec<PortSpec>) -> ProcessSpec {
    ProcessSpec {
        name: name.to_string(),
        period,
        inputs,
        outputs,
        value_dependent: false,
    }
}

/// Water tank: `level' = rising` while the pump runs, `-falling` otherwise.
/// Emits the level at each tag, then steps by one period.
pub struct Tank<D: Domain> {
    spec: ProcessSpec,
    level0: Param,
    rising: Param,
    falling: Param,
    state: Option<(D::Real, D::Real, D::Real)>,
}

impl<D: Domain> Tank<D> {
    pub fn new(name: &str, period: SimTime, level0: Param, rising: Param, falling: Param) -> Self {
        Tank {
            spec: spec(
                name,
                period,
                vec![PortSpec::new("pump", 1, LeafKind::Bool)],
                vec![PortSpec::new("level", 1, LeafKind::Real)],
            ),
            level0,
            rising,
            falling,
            state: None,
        }
    }
}

impl<D: Domain> Process<D> for Tank<D> {
    fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    fn init(&mut self, d: &D) -> Result<()> {
        let falling = self.falling.real(d)?;
        self.state = Some((
            self.level0.real(d)?,
            self.rising.real(d)?,
            d.scale(&falling, -1.0)?,
        ));
        Ok(())
    }

    fn fire(&mut self, d: &D, io: &mut Io<D>) -> Result<()> {
        let (level, up, down) = self.state.as_mut().expect("init runs first");
        io.emit(0, Sample::Real(level.clone()));
        let rate = d.select_real(io.boolean(0, 0)?, up, down)?;
        *level = crate::sim::integrator_step(d, level, &rate, self.spec.period.secs())?;
        Ok(())
    }

    fn reduce(&mut self, d: &D) -> Result<()> {
        if let Some((level, _, _)) = &mut self.state {
            *level = d.reduce_real(level)?;
        }
        Ok(())
    }
}

/// Threshold sensors: `empty = level <= empty_at`, `full = level >= full_at`.
/// With a fault, `full` reads false whenever the fault is present.
pub struct LevelSensor<D: Domain> {
    spec: ProcessSpec,
    empty_at: f64,
    full_at: f64,
    fault: Option<String>,
    fault_value: Option<D::Bool>,
}

impl<D: Domain> LevelSensor<D> {
    pub fn new(name: &str, period: SimTime, empty_at: f64, full_at: f64, fault: Option<String>) -> Self {
        LevelSensor {
            spec: spec(
                name,
                period,
                vec![PortSpec::new("level", 1, LeafKind::Real)],
                vec![
                    PortSpec::new("empty", 1, LeafKind::Bool),
                    PortSpec::new("full", 1, LeafKind::Bool),
                ],
            ),
            empty_at,
            full_at,
            fault,
            fault_value: None,
        }
    }
}

impl<D: Domain> Process<D> for LevelSensor<D> {
    fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    fn init(&mut self, d: &D) -> Result<()> {
        self.fault_value = self.fault.as_deref().map(|f| d.fault(f)).transpose()?;
        Ok(())
    }

    fn fire(&mut self, d: &D, io: &mut Io<D>) -> Result<()> {
        let level = io.real(0, 0)?;
        let empty = d.cmp(level, Sense::Le, self.empty_at)?;
        let mut full = d.cmp(level, Sense::Ge, self.full_at)?;
        if let Some(f) = &self.fault_value {
            full = d.select_bool(f, &d.boolean(false), &full)?;
        }
        io.emit(0, Sample::Bool(empty));
        io.emit(1, Sample::Bool(full));
        Ok(())
    }
}

/// Two-point pump control: on at empty, off at full, otherwise hold.
///
/// With `fail_safe`, an `error` input is read; while it is set the pump is
/// switched off once it has run for `limit` seconds in a row.
pub struct PumpController<D: Domain> {
    spec: ProcessSpec,
    pump0: Param,
    limit_samples: f64,
    state: Option<(D::Bool, D::Real)>,
}

impl<D: Domain> PumpController<D> {
    pub fn new(name: &str, period: SimTime, pump0: Param, fail_safe: Option<f64>) -> Result<Self> {
        let mut inputs = vec![
            PortSpec::new("empty", 1, LeafKind::Bool),
            PortSpec::new("full", 1, LeafKind::Bool),
        ];
        let mut limit_samples = f64::INFINITY;
        if let Some(limit) = fail_safe {
            if !(limit > 0.0) || period.is_zero() {
                return Err(Error::Config(format!("process `{name}`: limit must be positive")));
            }
            inputs.push(PortSpec::new("error", 1, LeafKind::Bool));
            limit_samples = (limit / period.secs()).round();
        }
        Ok(PumpController {
            spec: spec(name, period, inputs, vec![PortSpec::new("pump", 1, LeafKind::Bool)]),
            pump0,
            limit_samples,
            state: None,
        })
    }
}

impl<D: Domain> Process<D> for PumpController<D> {
    fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    fn init(&mut self, d: &D) -> Result<()> {
        self.state = Some((self.pump0.boolean(d)?, d.constant(0.0)));
        Ok(())
    }

    fn fire(&mut self, d: &D, io: &mut Io<D>) -> Result<()> {
        let (pump, on_count) = self.state.as_mut().expect("init runs first");
        let hold = d.select_bool(io.boolean(1, 0)?, &d.boolean(false), pump)?;
        let mut next = d.select_bool(io.boolean(0, 0)?, &d.boolean(true), &hold)?;
        if self.spec.inputs.len() == 3 {
            let expired = d.cmp(on_count, Sense::Ge, self.limit_samples)?;
            let cut = d.and(&d.and(io.boolean(2, 0)?, pump)?, &expired)?;
            next = d.select_bool(&cut, &d.boolean(false), &next)?;
        }
        *on_count = d.select_real(&next, &d.add_const(on_count, 1.0)?, &d.constant(0.0))?;
        *pump = next.clone();
        io.emit(0, Sample::Bool(next));
        Ok(())
    }

    fn reduce(&mut self, d: &D) -> Result<()> {
        if let Some((pump, on_count)) = &mut self.state {
            *pump = d.reduce_bool(pump)?;
            *on_count = d.reduce_real(on_count)?;
        }
        Ok(())
    }
}

/// Pump-time watchdog. Reads the first of `rate` pump samples per firing
/// and counts firings with the pump on:
///
/// ```text
/// if !error { if pump { timer += 1; if timer > timeout { error = true } } else { timer = 0 } }
/// ```
pub struct Observer<D: Domain> {
    spec: ProcessSpec,
    timeout: f64,
    state: Option<(D::Real, D::Bool)>,
}

impl<D: Domain> Observer<D> {
    pub fn new(name: &str, period: SimTime, rate: u32, timeout: f64) -> Self {
        Observer {
            spec: spec(
                name,
                period,
                vec![PortSpec::new("pump", rate, LeafKind::Bool)],
                vec![PortSpec::new("error", rate, LeafKind::Bool)],
            ),
            timeout,
            state: None,
        }
    }
}

impl<D: Domain> Process<D> for Observer<D> {
    fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    fn init(&mut self, d: &D) -> Result<()> {
        self.state = Some((d.constant(0.0), d.boolean(false)));
        Ok(())
    }

    fn fire(&mut self, d: &D, io: &mut Io<D>) -> Result<()> {
        let (timer, error) = self.state.as_mut().expect("init runs first");
        let pump = io.boolean(0, 0)?;
        let counted = d.select_real(pump, &d.add_const(timer, 1.0)?, &d.constant(0.0))?;
        *timer = d.select_real(error, timer, &counted)?;
        let tripped = d.cmp(timer, Sense::Gt, self.timeout)?;
        *error = d.or(error, &tripped)?;
        io.fill(0, Sample::Bool(error.clone()), self.spec.outputs[0].rate);
        Ok(())
    }

    fn reduce(&mut self, d: &D) -> Result<()> {
        if let Some((timer, error)) = &mut self.state {
            *timer = d.reduce_real(timer)?;
            *error = d.reduce_bool(error)?;
        }
        Ok(())
    }
}

/// Emits the same value every period.
pub struct Constant<D: Domain> {
    spec: ProcessSpec,
    value: Param,
    sample: Option<Sample<D>>,
}

impl<D: Domain> Constant<D> {
    pub fn new(name: &str, period: SimTime, value: Param, kind: LeafKind) -> Self {
        Constant {
            spec: spec(name, period, Vec::new(), vec![PortSpec::new("y", 1, kind)]),
            value,
            sample: None,
        }
    }
}

impl<D: Domain> Process<D> for Constant<D> {
    fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    fn init(&mut self, d: &D) -> Result<()> {
        self.sample = Some(self.value.sample(self.spec.outputs[0].kind, d)?);
        Ok(())
    }

    fn fire(&mut self, _d: &D, io: &mut Io<D>) -> Result<()> {
        io.emit(0, self.sample.clone().expect("init runs first"));
        Ok(())
    }
}

/// Builds one process of the given kind from its parameter table.
pub(crate) fn build<'p, D: Domain + 'p>(
    name: &str,
    kind: &str,
    period: SimTime,
    table: &BTreeMap<String, Param>,
    fault_names: &[String],
) -> Result<BoxedProcess<'p, D>> {
    let mut p = Params::new(name, table);
    let built: BoxedProcess<'p, D> = match kind {
        "tank" => Box::new(Tank::<D>::new(
            name,
            period,
            p.param("level0", None)?,
            p.param("rising", None)?,
            p.param("falling", None)?,
        )),
        "level_sensor" => Box::new(LevelSensor::<D>::new(
            name,
            period,
            p.number("empty", Some(5.0))?,
            p.number("full", Some(10.0))?,
            p.optional_name("fault")?,
        )),
        "pump_controller" => {
            let pump0 = p.param("pump0", Some(Param::Bool(false)))?;
            let fail_safe = p.flag("fail_safe", false)?;
            let limit = p.number("limit", Some(5.0))?;
            Box::new(PumpController::<D>::new(name, period, pump0, fail_safe.then_some(limit))?)
        }
        "observer" => {
            let rate = p.number("rate", Some(1.0))?;
            if rate < 1.0 || rate.fract() != 0.0 || rate > f64::from(u32::MAX) {
                return Err(Error::Config(format!("process `{name}`: rate must be a positive integer")));
            }
            Box::new(Observer::<D>::new(name, period, rate as u32, p.number("timeout", Some(10.0))?))
        }
        "constant" => {
            let value = p.param("value", None)?;
            let kind = match &value {
                Param::Name(n) if fault_names.contains(n) => LeafKind::Bool,
                Param::Bool(_) => LeafKind::Bool,
                _ => LeafKind::Real,
            };
            Box::new(Constant::<D>::new(name, period, value, kind))
        }
        "integrator" => Box::new(Integrator::<D>::new(
            name,
            period,
            p.param("x0", None)?,
            p.number("gain", Some(1.0))?,
            p.param("bias", Some(Param::Number(0.0)))?,
        )),
        other => {
            return Err(Error::Config(format!(
                "process `{name}`: unknown kind `{other}`"
            )))
        }
    };
    p.finish()?;
    Ok(built)
}
