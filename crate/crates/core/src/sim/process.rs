use std::fmt;

use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::time::SimTime;
use crate::dd::LeafKind;
use crate::error::{Error, Result};

/// One value on a signal.
pub enum Sample<D: Domain> {
    Real(D::Real),
    Bool(D::Bool),
}

impl<D: Domain> Sample<D> {
    pub fn kind(&self) -> LeafKind {
        match self {
            Sample::Real(_) => LeafKind::Real,
            Sample::Bool(_) => LeafKind::Bool,
        }
    }
}

impl<D: Domain> Clone for Sample<D> {
    fn clone(&self) -> Self {
        match self {
            Sample::Real(x) => Sample::Real(x.clone()),
            Sample::Bool(x) => Sample::Bool(x.clone()),
        }
    }
}

impl<D: Domain> fmt::Debug for Sample<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sample::Real(x) => f.debug_tuple("Real").field(x).finish(),
            Sample::Bool(x) => f.debug_tuple("Bool").field(x).finish(),
        }
    }
}

/// A scalar parameter: a number, a Boolean, or the name of a declared
/// uncertainty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Bool(bool),
    Number(f64),
    Name(String),
}

impl Param {
    pub fn real<D: Domain>(&self, d: &D) -> Result<D::Real> {
        match self {
            Param::Number(v) => Ok(d.constant(*v)),
            Param::Name(n) => d.uncertain(n),
            Param::Bool(_) => Err(Error::Config("expected a number or uncertain name".into())),
        }
    }

    pub fn boolean<D: Domain>(&self, d: &D) -> Result<D::Bool> {
        match self {
            Param::Bool(b) => Ok(d.boolean(*b)),
            Param::Name(n) => d.fault(n),
            Param::Number(_) => Err(Error::Config("expected a Boolean or fault name".into())),
        }
    }

    pub fn sample<D: Domain>(&self, kind: LeafKind, d: &D) -> Result<Sample<D>> {
        Ok(match kind {
            LeafKind::Real => Sample::Real(self.real(d)?),
            LeafKind::Bool => Sample::Bool(self.boolean(d)?),
        })
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Param::Number(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Number(v)
    }
}

impl From<bool> for Param {
    fn from(b: bool) -> Self {
        Param::Bool(b)
    }
}

impl From<&str> for Param {
    fn from(s: &str) -> Self {
        Param::Name(s.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortSpec {
    pub name: String,
    /// Tokens consumed or produced per firing.
    pub rate: u32,
    pub kind: LeafKind,
}

impl PortSpec {
    pub fn new(name: &str, rate: u32, kind: LeafKind) -> Self {
        PortSpec {
            name: name.to_string(),
            rate,
            kind,
        }
    }
}

/// Static interface of a process.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub name: String,
    pub period: SimTime,
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
    /// Set by processes whose activation depends on values. Such processes
    /// are rejected by the scheduler.
    #[serde(default)]
    pub value_dependent: bool,
}

/// Port values of one firing.
pub struct Io<D: Domain> {
    pub(crate) inputs: Vec<Vec<Sample<D>>>,
    pub(crate) outputs: Vec<Vec<Sample<D>>>,
}

impl<D: Domain> Io<D> {
    pub(crate) fn new(inputs: Vec<Vec<Sample<D>>>, n_outputs: usize) -> Self {
        Io {
            inputs,
            outputs: vec![Vec::new(); n_outputs],
        }
    }

    /// Token `k` of input `port`.
    pub fn real(&self, port: usize, k: usize) -> Result<&D::Real> {
        match self.inputs.get(port).and_then(|v| v.get(k)) {
            Some(Sample::Real(x)) => Ok(x),
            Some(Sample::Bool(_)) => Err(Error::LeafKind(format!("input {port} is Boolean"))),
            None => Err(Error::InvalidArgument(format!("no token {k} on input {port}"))),
        }
    }

    pub fn boolean(&self, port: usize, k: usize) -> Result<&D::Bool> {
        match self.inputs.get(port).and_then(|v| v.get(k)) {
            Some(Sample::Bool(x)) => Ok(x),
            Some(Sample::Real(_)) => Err(Error::LeafKind(format!("input {port} is real"))),
            None => Err(Error::InvalidArgument(format!("no token {k} on input {port}"))),
        }
    }

    pub fn emit(&mut self, port: usize, s: Sample<D>) {
        self.outputs[port].push(s);
    }

    /// Emits `n` copies of `s`.
    pub fn fill(&mut self, port: usize, s: Sample<D>, n: u32) {
        for _ in 0..n {
            self.outputs[port].push(s.clone());
        }
    }
}

/// A dataflow process with fixed rates and a fixed activation period.
///
/// `fire` must be deterministic and must only branch on values through the
/// [`Domain`] operations.
pub trait Process<D: Domain> {
    fn spec(&self) -> &ProcessSpec;

    /// Sets up state; called once before the first firing.
    fn init(&mut self, _d: &D) -> Result<()> {
        Ok(())
    }

    fn fire(&mut self, d: &D, io: &mut Io<D>) -> Result<()>;

    /// Simplifies stored state; called after every hyperperiod.
    fn reduce(&mut self, _d: &D) -> Result<()> {
        Ok(())
    }
}

/// `x + h·derivative`: exact when the derivative is constant over the step,
/// forward Euler otherwise.
pub fn integrator_step<D: Domain>(d: &D, x: &D::Real, derivative: &D::Real, h: f64) -> Result<D::Real> {
    d.add(x, &d.scale(derivative, h)?)
}

/// A linear continuous block `x' = gain·u + bias`, sampled at its period.
///
/// Output `y` at a tag is the state at that tag; the input read at the same
/// tag drives the step to the next one.
pub struct Integrator<D: Domain> {
    spec: ProcessSpec,
    x0: Param,
    gain: f64,
    bias: Param,
    x: Option<D::Real>,
    bias_value: Option<D::Real>,
}

impl<D: Domain> Integrator<D> {
    pub const INPUT: usize = 0;
    pub const OUTPUT: usize = 0;

    pub fn new(name: &str, period: SimTime, x0: Param, gain: f64, bias: Param) -> Self {
        Integrator {
            spec: ProcessSpec {
                name: name.to_string(),
                period,
                inputs: vec![PortSpec::new("u", 1, LeafKind::Real)],
                outputs: vec![PortSpec::new("y", 1, LeafKind::Real)],
                value_dependent: false,
            },
            x0,
            gain,
            bias,
            x: None,
            bias_value: None,
        }
    }

    pub fn state(&self) -> Option<&D::Real> {
        self.x.as_ref()
    }
}

impl<D: Domain> Process<D> for Integrator<D> {
    fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    fn init(&mut self, d: &D) -> Result<()> {
        self.x = Some(self.x0.real(d)?);
        self.bias_value = Some(self.bias.real(d)?);
        Ok(())
    }

    fn fire(&mut self, d: &D, io: &mut Io<D>) -> Result<()> {
        let x = self.x.take().expect("init runs first");
        let u = io.real(Self::INPUT, 0)?;
        let bias = self.bias_value.as_ref().expect("init runs first");
        let derivative = d.add(&d.scale(u, self.gain)?, bias)?;
        io.emit(Self::OUTPUT, Sample::Real(x.clone()));
        self.x = Some(integrator_step(d, &x, &derivative, self.spec.period.secs())?);
        Ok(())
    }

    fn reduce(&mut self, d: &D) -> Result<()> {
        if let Some(x) = &self.x {
            self.x = Some(d.reduce_real(x)?);
        }
        Ok(())
    }
}
