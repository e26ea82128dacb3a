use std::collections::VecDeque;

use super::domain::{Domain, Summary};
use super::process::{Io, Process, Sample};
use super::schedule::Schedule;
use super::time::SimTime;
use super::trace::{SignalTrace, Trace, TraceEvent};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Last tag to simulate; a positive multiple of the hyperperiod.
    pub horizon: SimTime,
    /// Reduce state and queued tokens after every hyperperiod.
    pub reduce: bool,
    /// Keep per-path ranges in the trace.
    pub record_leaves: bool,
    /// Signals to trace (`process.port`); `None` traces every output.
    pub record: Option<Vec<String>>,
}

impl RunOptions {
    pub fn new(horizon: SimTime) -> Self {
        RunOptions {
            horizon,
            reduce: true,
            record_leaves: false,
            record: None,
        }
    }
}

struct Recorder<D: Domain> {
    trace: SignalTrace,
    last: Option<(Sample<D>, Summary)>,
}

/// Executes `schedule` from tag 0 through `opts.horizon` inclusive.
///
/// `processes` must be in the order the schedule was compiled from. The last
/// hyperperiod is run to completion so that multirate readers firing at the
/// horizon get their full input window; tokens tagged after the horizon are
/// not traced.
pub fn run_bounded<D: Domain>(
    d: &D,
    processes: &mut [Box<dyn Process<D> + '_>],
    schedule: &Schedule,
    opts: &RunOptions,
) -> Result<Trace> {
    let hyper = schedule.hyperperiod.micros();
    let horizon = opts.horizon.micros();
    if horizon == 0 || !horizon.is_multiple_of(hyper) {
        return Err(Error::InvalidArgument(format!(
            "horizon {} s is not a positive multiple of the hyperperiod {} s",
            opts.horizon, schedule.hyperperiod
        )));
    }
    if processes.len() != schedule.specs.len()
        || processes
            .iter()
            .zip(&schedule.specs)
            .any(|(p, s)| p.spec() != s)
    {
        return Err(Error::InvalidArgument(
            "processes do not match the compiled schedule".into(),
        ));
    }
    for p in processes.iter_mut() {
        p.init(d)?;
    }

    let mut queues: Vec<VecDeque<Sample<D>>> = Vec::with_capacity(schedule.channels.len());
    for c in &schedule.channels {
        let init = c.initial.sample(c.kind, d)?;
        queues.push(std::iter::repeat_n(init, c.delay as usize).collect());
    }
    let n = schedule.specs.len();
    let mut input_channel: Vec<Vec<usize>> = schedule
        .specs
        .iter()
        .map(|s| vec![usize::MAX; s.inputs.len()])
        .collect();
    let mut output_channels: Vec<Vec<Vec<usize>>> = schedule
        .specs
        .iter()
        .map(|s| vec![Vec::new(); s.outputs.len()])
        .collect();
    for (k, c) in schedule.channels.iter().enumerate() {
        input_channel[c.to.0][c.to.1] = k;
        output_channels[c.from.0][c.from.1].push(k);
    }

    let mut recorders: Vec<Vec<Option<Recorder<D>>>> = Vec::with_capacity(n);
    for s in &schedule.specs {
        let mut row = Vec::new();
        for o in &s.outputs {
            let name = format!("{}.{}", s.name, o.name);
            let wanted = opts.record.as_ref().is_none_or(|r| r.contains(&name));
            row.push(wanted.then(|| Recorder {
                trace: SignalTrace {
                    name,
                    kind: o.kind,
                    events: Vec::new(),
                },
                last: None,
            }));
        }
        recorders.push(row);
    }
    if let Some(names) = &opts.record {
        for name in names {
            let known = recorders
                .iter()
                .flatten()
                .flatten()
                .any(|r| &r.trace.name == name);
            if !known {
                return Err(Error::UnknownSignal(name.clone()));
            }
        }
    }

    let cycles = horizon / hyper;
    for cycle in 0..=cycles {
        let last_cycle = cycle == cycles;
        let base = cycle * hyper;
        for f in &schedule.firings {
            let t = base + f.offset.micros();
            let spec = &schedule.specs[f.process];
            let inputs = spec
                .inputs
                .iter()
                .enumerate()
                .map(|(q, port)| {
                    let queue = &mut queues[input_channel[f.process][q]];
                    queue.drain(..port.rate as usize).collect()
                })
                .collect();
            let mut io = Io::new(inputs, spec.outputs.len());
            processes[f.process].fire(d, &mut io)?;

            let step = spec.period.micros();
            for (q, (port, tokens)) in spec.outputs.iter().zip(io.outputs).enumerate() {
                if tokens.len() != port.rate as usize || tokens.iter().any(|s| s.kind() != port.kind) {
                    return Err(Error::static_moc(
                        &spec.name,
                        format!("output `{}` needs {} {} tokens per firing", port.name, port.rate, port.kind),
                    ));
                }
                if let Some(rec) = &mut recorders[f.process][q] {
                    for (k, s) in tokens.iter().enumerate() {
                        let tag = t + k as u64 * step / u64::from(port.rate);
                        if tag > horizon {
                            break;
                        }
                        let summary = match &rec.last {
                            Some((prev, sum)) if same(d, prev, s) => sum.clone(),
                            _ => {
                                let sum = summarize(d, s, opts.record_leaves)?;
                                rec.last = Some((s.clone(), sum.clone()));
                                sum
                            }
                        };
                        rec.trace.events.push(TraceEvent {
                            time: SimTime::from_micros(tag),
                            hull: summary.hull,
                            leaf_count: summary.leaf_count,
                            leaves: summary.leaves,
                        });
                    }
                }
                for &k in &output_channels[f.process][q] {
                    queues[k].extend(tokens.iter().cloned());
                }
            }
        }
        if opts.reduce && !last_cycle {
            for p in processes.iter_mut() {
                p.reduce(d)?;
            }
            for queue in &mut queues {
                for s in queue.iter_mut() {
                    *s = match s {
                        Sample::Real(x) => Sample::Real(d.reduce_real(x)?),
                        Sample::Bool(x) => Sample::Bool(d.reduce_bool(x)?),
                    };
                }
            }
        }
    }

    Ok(Trace {
        signals: recorders
            .into_iter()
            .flatten()
            .flatten()
            .map(|r| r.trace)
            .collect(),
        conditions: Vec::new(),
    })
}

fn same<D: Domain>(d: &D, a: &Sample<D>, b: &Sample<D>) -> bool {
    match (a, b) {
        (Sample::Real(x), Sample::Real(y)) => d.same_real(x, y),
        (Sample::Bool(x), Sample::Bool(y)) => d.same_bool(x, y),
        _ => false,
    }
}

fn summarize<D: Domain>(d: &D, s: &Sample<D>, leaves: bool) -> Result<Summary> {
    match s {
        Sample::Real(x) => d.summarize_real(x, leaves),
        Sample::Bool(x) => d.summarize_bool(x, leaves),
    }
}
