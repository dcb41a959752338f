//! Interpreter for solutions on synthetic packets.
//!
//! Arithmetic uses the fixed-width wraparound rules of [`crate::model`], so a
//! program behaves here as it does on the switch. One packet is processed at
//! a time; atomic blocks only show up as a flag on trace events.

mod packet;
mod rng;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{BlockId, Command, FlowProcessor, Operand, Scope, Stmt, VarRef};
use crate::model::{cast_value, wrap_add, wrap_sub, UValue};
use crate::selector::{FieldRef, FlowSelector};
use crate::solution::Solution;

pub use packet::{
    EthHeader, Ipv4Header, SimPacket, TcpHeader, UdpHeader, ETHERTYPE_IPV4, ETH_LEN, IPV4_LEN, L4,
    TCP_LEN, UDP_LEN,
};
pub use rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("malformed packet: {0}")]
    Malformed(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
}

/// Slots and head index of one ring buffer. The head is the next slot to
/// write, which is also the oldest element once the ring has wrapped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingState {
    pub slots: Vec<UValue>,
    pub head: u32,
}

/// State that persists across packets: shared variables, ring buffers and
/// the random generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimState {
    shared: BTreeMap<String, BTreeMap<String, UValue>>,
    rings: BTreeMap<String, BTreeMap<String, RingState>>,
    rng: SplitMix64,
}

impl SimState {
    /// Shared variables at their initial values, rings zeroed.
    pub fn new(solution: &Solution, seed: u64) -> Self {
        let mut shared = BTreeMap::new();
        let mut rings = BTreeMap::new();
        for p in solution.processors() {
            shared.insert(
                p.name().to_string(),
                p.shared()
                    .iter()
                    .map(|s| (s.name().to_string(), s.initial()))
                    .collect(),
            );
            rings.insert(
                p.name().to_string(),
                p.rings()
                    .iter()
                    .map(|r| {
                        let slots = vec![UValue::zero(r.element_width()); r.capacity() as usize];
                        (r.name().to_string(), RingState { slots, head: 0 })
                    })
                    .collect(),
            );
        }
        SimState {
            shared,
            rings,
            rng: SplitMix64::new(seed),
        }
    }

    pub fn shared(&self, processor: &str, name: &str) -> Option<UValue> {
        self.shared.get(processor)?.get(name).copied()
    }

    /// Overwrites a shared variable; the width must match the declaration.
    pub fn set_shared(&mut self, processor: &str, name: &str, value: UValue) -> Result<(), SimError> {
        let slot = self
            .shared
            .get_mut(processor)
            .and_then(|m| m.get_mut(name))
            .ok_or_else(|| SimError::UnknownState(format!("{processor}.{name}")))?;
        if slot.width() != value.width() {
            return Err(SimError::UnknownState(format!(
                "{processor}.{name} is {}, not {}",
                slot.width(),
                value.width()
            )));
        }
        *slot = value;
        Ok(())
    }

    pub fn ring(&self, processor: &str, name: &str) -> Option<&RingState> {
        self.rings.get(processor)?.get(name)
    }

    pub fn rng(&self) -> &SplitMix64 {
        &self.rng
    }

    /// Runs one packet and commits the state change on success.
    pub fn step(&mut self, solution: &Solution, packet: &SimPacket) -> Result<SimResult, SimError> {
        let (result, next) = simulate_packet(solution, self, packet)?;
        *self = next;
        Ok(result)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "selector", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Processed(String),
    Passthrough,
}

/// One executed node. `Enter` (ordinal 0) opens every processed packet's
/// trace; `If`, `Switch` and `Atomic` record the branch decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub ordinal: u32,
    pub kind: String,
    pub target: Option<String>,
    pub before: Option<UValue>,
    pub after: Option<UValue>,
    pub operands: Vec<UValue>,
    pub atomic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimResult {
    pub verdict: Verdict,
    pub egress_port: u16,
    pub packet: SimPacket,
    pub trace: Vec<TraceEvent>,
}

/// First selector, in registration order, whose stack matches and whose
/// criteria all hold.
pub fn classify<'s>(solution: &'s Solution, packet: &SimPacket) -> Result<Option<&'s FlowSelector>, SimError> {
    let Some(stack) = packet.stack()? else {
        return Ok(None);
    };
    'selectors: for sel in solution.selectors().iter().filter(|s| s.stack() == stack) {
        for c in sel.criteria() {
            if let FieldRef::Standard(f) = &c.field {
                if packet.field(f) != Some(c.value.magnitude()) {
                    continue 'selectors;
                }
            }
        }
        if let Some(la) = sel.lookahead() {
            let values = la.deserialize(&packet.payload).map_err(|_| {
                SimError::Malformed(format!(
                    "payload of {} bytes is shorter than lookahead `{}` of selector `{}`",
                    packet.payload.len(),
                    la.name(),
                    sel.name()
                ))
            })?;
            for c in sel.criteria() {
                if let FieldRef::Lookahead(name) = &c.field {
                    if values.get(name) != Some(&c.value) {
                        continue 'selectors;
                    }
                }
            }
        }
        let need = sel.processor().input().byte_size();
        if packet.payload.len() < need {
            return Err(SimError::Malformed(format!(
                "payload of {} bytes is shorter than the {need}-byte input of `{}`",
                packet.payload.len(),
                sel.processor().name()
            )));
        }
        return Ok(Some(sel));
    }
    Ok(None)
}

/// Default forwarding of the template: ports are paired 0-1, 2-3, ...
pub fn default_egress(ingress_port: u16) -> u16 {
    ingress_port ^ 1
}

/// Runs one packet against `state` and returns the result with the next
/// state. `state` itself is not modified.
pub fn simulate_packet(
    solution: &Solution,
    state: &SimState,
    packet: &SimPacket,
) -> Result<(SimResult, SimState), SimError> {
    let Some(sel) = classify(solution, packet)? else {
        let result = SimResult {
            verdict: Verdict::Passthrough,
            egress_port: default_egress(packet.ingress_port),
            packet: packet.clone(),
            trace: Vec::new(),
        };
        return Ok((result, state.clone()));
    };
    let p = sel.processor();
    let mut next = state.clone();
    let mut run = Run::new(p, &mut next, packet)?;
    run.trace.push(TraceEvent {
        ordinal: 0,
        kind: "Enter".into(),
        target: Some(sel.name().to_string()),
        before: None,
        after: None,
        operands: Vec::new(),
        atomic: false,
    });
    run.block(BlockId::BODY, false);
    let Run {
        output,
        egress,
        trace,
        ..
    } = run;

    let in_size = p.input().byte_size();
    let mut out = packet.clone();
    let residual = &packet.payload[in_size..];
    out.payload = match (p.output(), p.truncate_payload()) {
        (Some(layout), truncate) => {
            let mut bytes = layout.serialize(&output).expect("all output fields are set");
            if !truncate {
                bytes.extend_from_slice(residual);
            }
            bytes
        }
        (None, true) => packet.payload[..in_size].to_vec(),
        (None, false) => packet.payload.clone(),
    };
    let delta = out.payload.len() as i64 - packet.payload.len() as i64;
    let modified = p.output().is_some() || p.truncate_payload();
    if let Some(ip) = &mut out.ipv4 {
        ip.total_len = (i64::from(ip.total_len) + delta) as u16;
    }
    if let Some(L4::Udp(u)) = &mut out.l4 {
        u.len = (i64::from(u.len) + delta) as u16;
        if modified {
            u.checksum = 0;
        }
    }
    if let Some(ip) = &mut out.ipv4 {
        ip.update_checksum();
    }

    let result = SimResult {
        verdict: Verdict::Processed(sel.name().to_string()),
        egress_port: egress.unwrap_or_else(|| default_egress(packet.ingress_port)),
        packet: out,
        trace,
    };
    Ok((result, next))
}

/// Threads one state through all packets. Errors are recorded per packet
/// and leave the state untouched.
pub fn run_trace(solution: &Solution, packets: &[SimPacket], seed: u64) -> Vec<Result<SimResult, SimError>> {
    let mut state = SimState::new(solution, seed);
    packets.iter().map(|p| state.step(solution, p)).collect()
}

struct Run<'a> {
    p: &'a FlowProcessor,
    state: &'a mut SimState,
    input: BTreeMap<String, UValue>,
    output: BTreeMap<String, UValue>,
    locals: BTreeMap<String, UValue>,
    ingress_port: u16,
    egress: Option<u16>,
    trace: Vec<TraceEvent>,
}

impl<'a> Run<'a> {
    fn new(p: &'a FlowProcessor, state: &'a mut SimState, packet: &SimPacket) -> Result<Self, SimError> {
        let input = p
            .input()
            .deserialize(&packet.payload)
            .map_err(|e| SimError::Malformed(e.to_string()))?;
        let zeroed = |fields: &[crate::model::FieldDecl]| {
            fields
                .iter()
                .map(|f| (f.name().to_string(), UValue::zero(f.width())))
                .collect::<BTreeMap<_, _>>()
        };
        Ok(Run {
            p,
            state,
            input,
            output: p.output().map(|o| zeroed(o.fields())).unwrap_or_default(),
            locals: zeroed(p.locals()),
            ingress_port: packet.ingress_port,
            egress: None,
            trace: Vec::new(),
        })
    }

    fn read(&self, v: &VarRef) -> UValue {
        let found = match v.scope {
            Scope::Input => self.input.get(&v.name),
            Scope::Output => self.output.get(&v.name),
            Scope::Local => self.locals.get(&v.name),
            Scope::Shared => self.state.shared.get(self.p.name()).and_then(|m| m.get(&v.name)),
        };
        *found.expect("references are resolved by the builder")
    }

    fn write(&mut self, v: &VarRef, value: UValue) {
        let slot = match v.scope {
            Scope::Input => unreachable!("inputs are read-only"),
            Scope::Output => self.output.get_mut(&v.name),
            Scope::Local => self.locals.get_mut(&v.name),
            Scope::Shared => self
                .state
                .shared
                .get_mut(self.p.name())
                .and_then(|m| m.get_mut(&v.name)),
        };
        *slot.expect("references are resolved by the builder") = value;
    }

    fn eval(&self, o: &Operand) -> UValue {
        match o {
            Operand::Var(v) => self.read(v),
            Operand::Const(c) => *c,
        }
    }

    fn ring(&mut self, name: &str) -> &mut RingState {
        self.state
            .rings
            .get_mut(self.p.name())
            .and_then(|m| m.get_mut(name))
            .expect("rings are resolved by the builder")
    }

    fn event(&mut self, ordinal: u32, kind: &str, operands: Vec<UValue>, atomic: bool) {
        self.trace.push(TraceEvent {
            ordinal,
            kind: kind.to_string(),
            target: None,
            before: None,
            after: None,
            operands,
            atomic,
        });
    }

    fn block(&mut self, block: BlockId, atomic: bool) {
        let p = self.p;
        for node in &p.block(block).nodes {
            match &node.stmt {
                Stmt::Command(cmd) => self.command(node.ordinal, cmd, atomic),
                Stmt::If {
                    cond,
                    then_block,
                    else_block,
                } => {
                    let c = self.read(cond);
                    self.event(node.ordinal, "If", vec![c], atomic);
                    if c.magnitude() == 1 {
                        self.block(*then_block, atomic);
                    } else if let Some(e) = else_block {
                        self.block(*e, atomic);
                    }
                }
                Stmt::Switch { selector, cases, .. } => {
                    let v = self.eval(selector);
                    self.event(node.ordinal, "Switch", vec![v], atomic);
                    if let Some((_, case)) = cases.iter().find(|(cv, _)| *cv == v) {
                        self.block(*case, atomic);
                    }
                }
                Stmt::Atomic { block } => {
                    self.event(node.ordinal, "Atomic", Vec::new(), true);
                    self.block(*block, true);
                }
            }
        }
    }

    fn command(&mut self, ordinal: u32, cmd: &Command, atomic: bool) {
        let operands: Vec<UValue> = cmd.operands().into_iter().map(|o| self.eval(o)).collect();
        let target = cmd.target().cloned();
        let before = target.as_ref().map(|t| self.read(t));
        let bool_of = |b: bool| UValue::u8(u8::from(b));
        let value = match cmd {
            Command::AssignConst { value, .. } => Some(*value),
            Command::AssignVar { .. } => Some(operands[0]),
            Command::Cast { target, .. } => Some(cast_value(operands[0], self.read(target).width())),
            Command::Add { .. } => Some(wrap_add(operands[0], operands[1]).expect("widths checked")),
            Command::Sub { .. } => Some(wrap_sub(operands[0], operands[1]).expect("widths checked")),
            Command::Equals { .. } => Some(bool_of(operands[0] == operands[1])),
            Command::Greater { .. } => Some(bool_of(operands[0].magnitude() > operands[1].magnitude())),
            Command::Rand { target } => {
                let width = self.read(target).width();
                Some(UValue::truncating(width, self.state.rng.next_u64()))
            }
            Command::RingPush { ring, .. } => {
                let r = self.ring(ring);
                let cap = r.slots.len() as u32;
                r.slots[r.head as usize] = operands[0];
                r.head = (r.head + 1) % cap;
                None
            }
            Command::RingReadHead { ring, .. } => {
                let r = self.ring(ring);
                Some(r.slots[r.head as usize])
            }
            Command::SendBack => {
                self.egress = Some(self.ingress_port);
                None
            }
            Command::Forward { port } => {
                self.egress = Some(*port);
                None
            }
        };
        if let (Some(t), Some(v)) = (&target, value) {
            self.write(t, v);
        }
        self.trace.push(TraceEvent {
            ordinal,
            kind: cmd.kind_name().to_string(),
            target: target.as_ref().map(|t| t.to_string()),
            before,
            after: value,
            operands,
            atomic,
        });
    }
}
