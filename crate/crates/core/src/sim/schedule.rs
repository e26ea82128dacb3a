use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::process::{Param, ProcessSpec};
use super::time::{lcm, SimTime};
use crate::dd::LeafKind;
use crate::error::{Error, Result};

/// `process.port`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub process: String,
    pub port: String,
}

impl FromStr for Endpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('.') {
            Some((p, q)) if !p.is_empty() && !q.is_empty() => Ok(Endpoint {
                process: p.to_string(),
                port: q.to_string(),
            }),
            _ => Err(Error::Config(format!("`{s}` is not of the form process.port"))),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.process, self.port)
    }
}

impl Serialize for Endpoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Endpoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A signal from an output port to an input port, optionally delayed by
/// `delay` initial tokens with value `initial` (`false` or `0` by default).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub from: Endpoint,
    pub to: Endpoint,
    #[serde(default)]
    pub delay: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Param>,
}

impl Connection {
    pub fn new(from: &str, to: &str) -> Result<Self> {
        Ok(Connection {
            from: from.parse()?,
            to: to.parse()?,
            delay: 0,
            initial: None,
        })
    }

    pub fn delayed(mut self, delay: u32, initial: impl Into<Param>) -> Self {
        self.delay = delay;
        self.initial = Some(initial.into());
        self
    }
}

/// A connection resolved to process and port indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub kind: LeafKind,
    pub produce: u32,
    pub consume: u32,
    pub delay: u32,
    pub initial: Param,
}

/// One activation inside a hyperperiod.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Firing {
    pub process: usize,
    /// Firing number of this process within the hyperperiod.
    pub n: u64,
    /// Tag relative to the start of the hyperperiod.
    pub offset: SimTime,
}

/// A periodic static schedule, repeated every hyperperiod.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub hyperperiod: SimTime,
    /// Firings per hyperperiod, per process.
    pub repetitions: Vec<u64>,
    pub firings: Vec<Firing>,
    pub channels: Vec<Channel>,
    pub specs: Vec<ProcessSpec>,
}

impl Schedule {
    pub fn process_index(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }
}

/// Checks rates, periods and connectivity and builds one hyperperiod of
/// firings.
///
/// Every signal must carry tokens at one fixed spacing:
/// `writer period / produce == reader period / consume`. The firing order is
/// built greedily by earliest tag (ties in declaration order) among the
/// processes whose inputs have enough tokens; if none is ready the network
/// has a cycle without enough delay.
pub fn compile_schedule(specs: &[ProcessSpec], connections: &[Connection]) -> Result<Schedule> {
    if specs.is_empty() {
        return Err(Error::Config("network has no processes".into()));
    }
    let mut index = HashMap::new();
    for (i, s) in specs.iter().enumerate() {
        if index.insert(s.name.as_str(), i).is_some() {
            return Err(Error::Config(format!("process `{}` declared twice", s.name)));
        }
        if s.value_dependent {
            return Err(Error::static_moc(&s.name, "activation depends on values"));
        }
        if s.period.is_zero() {
            return Err(Error::static_moc(&s.name, "period must be positive"));
        }
        if s.inputs.iter().chain(&s.outputs).any(|p| p.rate == 0) {
            return Err(Error::static_moc(&s.name, "port rates must be positive"));
        }
    }

    let port = |e: &Endpoint, output: bool| -> Result<(usize, usize)> {
        let &p = index
            .get(e.process.as_str())
            .ok_or_else(|| Error::Config(format!("unknown process in `{e}`")))?;
        let ports = if output {
            &specs[p].outputs
        } else {
            &specs[p].inputs
        };
        let q = ports.iter().position(|x| x.name == e.port).ok_or_else(|| {
            Error::Config(format!(
                "`{}` has no {} port `{}`",
                e.process,
                if output { "output" } else { "input" },
                e.port
            ))
        })?;
        Ok((p, q))
    };

    let mut channels = Vec::with_capacity(connections.len());
    let mut driven: HashMap<(usize, usize), &Connection> = HashMap::new();
    for c in connections {
        let from = port(&c.from, true)?;
        let to = port(&c.to, false)?;
        if driven.insert(to, c).is_some() {
            return Err(Error::Config(format!("input `{}` has two writers", c.to)));
        }
        let out = &specs[from.0].outputs[from.1];
        let inp = &specs[to.0].inputs[to.1];
        if out.kind != inp.kind {
            return Err(Error::Config(format!(
                "`{}` is {} but `{}` is {}",
                c.from, out.kind, c.to, inp.kind
            )));
        }
        let writer_step = specs[from.0].period.micros() * u64::from(inp.rate);
        let reader_step = specs[to.0].period.micros() * u64::from(out.rate);
        if writer_step != reader_step {
            return Err(Error::static_moc(
                &specs[to.0].name,
                format!(
                    "token spacing of `{}` ({} s / {}) does not match `{}` ({} s / {})",
                    c.from, specs[from.0].period, out.rate, c.to, specs[to.0].period, inp.rate
                ),
            ));
        }
        let initial = match &c.initial {
            Some(p) => p.clone(),
            None => match out.kind {
                LeafKind::Real => Param::Number(0.0),
                LeafKind::Bool => Param::Bool(false),
            },
        };
        channels.push(Channel {
            from,
            to,
            kind: out.kind,
            produce: out.rate,
            consume: inp.rate,
            delay: c.delay,
            initial,
        });
    }
    for (p, s) in specs.iter().enumerate() {
        for (q, i) in s.inputs.iter().enumerate() {
            if !driven.contains_key(&(p, q)) {
                return Err(Error::Config(format!("input `{}.{}` is not connected", s.name, i.name)));
            }
        }
    }

    let hyper = specs.iter().fold(1, |h, s| lcm(h, s.period.micros()));
    let repetitions: Vec<u64> = specs.iter().map(|s| hyper / s.period.micros()).collect();

    let mut tokens: Vec<u64> = channels.iter().map(|c| u64::from(c.delay)).collect();
    let mut inputs_of = vec![Vec::new(); specs.len()];
    let mut outputs_of = vec![Vec::new(); specs.len()];
    for (k, c) in channels.iter().enumerate() {
        inputs_of[c.to.0].push(k);
        outputs_of[c.from.0].push(k);
    }
    let total: u64 = repetitions.iter().sum();
    let mut fired = vec![0u64; specs.len()];
    let mut firings = Vec::with_capacity(total as usize);
    while (firings.len() as u64) < total {
        let next = (0..specs.len())
            .filter(|&p| fired[p] < repetitions[p])
            .filter(|&p| {
                inputs_of[p]
                    .iter()
                    .all(|&k| tokens[k] >= u64::from(channels[k].consume))
            })
            .min_by_key(|&p| (fired[p] * specs[p].period.micros(), p));
        let Some(p) = next else {
            let stuck = (0..specs.len())
                .find(|&p| fired[p] < repetitions[p])
                .expect("some process is unfinished");
            return Err(Error::static_moc(
                &specs[stuck].name,
                "cannot fire: cycle without enough delay tokens",
            ));
        };
        for &k in &inputs_of[p] {
            tokens[k] -= u64::from(channels[k].consume);
        }
        for &k in &outputs_of[p] {
            tokens[k] += u64::from(channels[k].produce);
        }
        firings.push(Firing {
            process: p,
            n: fired[p],
            offset: SimTime::from_micros(fired[p] * specs[p].period.micros()),
        });
        fired[p] += 1;
    }

    Ok(Schedule {
        hyperperiod: SimTime::from_micros(hyper),
        repetitions,
        firings,
        channels,
        specs: specs.to_vec(),
    })
}
