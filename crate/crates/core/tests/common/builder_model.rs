//! Drives random builder call sequences against a shadow scope model.
//!
//! Each op is applied through the id-level API. The model predicts success or
//! the exact error kind; on success the returned block must be the one the
//! model expects (node identity), on failure the serialized AST must not
//! change. Finally the successful ops are replayed on a fresh processor and
//! must produce the same tree, ignoring call ordinals.

use parrot::flow::{BlockId, Command, FlowProcessor, SemanticErrorKind as K, VarRef};
use parrot::model::{FieldDecl, HeaderLayout, RingBufferDecl, SharedVariableDecl, UValue, UWidth};

#[derive(Clone, Copy, Debug)]
pub enum Op {
    Cmd(usize),
    If(u8),
    Else,
    EndIf,
    Switch,
    Case(u8, bool),
    EndSwitch,
    Atomic,
    EndAtomic,
    Stale,
}

pub const OP_KINDS: usize = 10;

pub fn op_from(kind: usize, a: u8, b: bool) -> Op {
    match kind % OP_KINDS {
        0 => Op::Cmd(a as usize % COMMANDS),
        1 => Op::If(a % 3),
        2 => Op::Else,
        3 => Op::EndIf,
        4 => Op::Switch,
        5 => Op::Case(a % 4, b),
        6 => Op::EndSwitch,
        7 => Op::Atomic,
        8 => Op::EndAtomic,
        _ => Op::Stale,
    }
}

pub const COMMANDS: usize = 11;

fn command(i: usize) -> (Command, Option<K>) {
    match i {
        0 => (Command::assign_const(VarRef::output("c1"), UValue::u8(71)), None),
        1 => (
            Command::add(VarRef::local("narrow"), VarRef::input("guess"), VarRef::shared("secret")),
            None,
        ),
        2 => (
            Command::equals(VarRef::local("flag"), VarRef::input("guess"), VarRef::shared("secret")),
            None,
        ),
        3 => (Command::ring_push("hist", VarRef::input("guess")), None),
        4 => (Command::rand(VarRef::shared("secret")), None),
        5 => (
            Command::assign_const(VarRef::input("guess"), UValue::u8(1)),
            Some(K::WriteToInput),
        ),
        6 => (
            Command::add(VarRef::local("wide"), VarRef::input("guess"), VarRef::input("guess")),
            Some(K::WidthMismatch),
        ),
        7 => (
            Command::assign(VarRef::local("missing"), VarRef::input("guess")),
            Some(K::UndeclaredName),
        ),
        8 => (Command::rand(VarRef::local("flag")), Some(K::NotBoolean)),
        9 => (Command::ring_push("nope", VarRef::input("guess")), Some(K::UndeclaredName)),
        _ => (Command::send_back(), None),
    }
}

pub fn fresh() -> FlowProcessor {
    FlowProcessor::builder("game", HeaderLayout::of("req", &[("guess", UWidth::U8)]).unwrap())
        .output(HeaderLayout::of("resp", &[("c1", UWidth::U8)]).unwrap())
        .local(FieldDecl::boolean("flag").unwrap())
        .local(FieldDecl::new("wide", UWidth::U16).unwrap())
        .local(FieldDecl::new("narrow", UWidth::U8).unwrap())
        .shared(SharedVariableDecl::new("secret", UValue::u8(42)).unwrap())
        .ring(RingBufferDecl::new("hist", UWidth::U8, 4).unwrap())
        .build()
        .unwrap()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Body,
    Then,
    Else,
    Switch,
    Case,
    Atomic,
}

struct Frame {
    kind: Kind,
    id: BlockId,
    /// Block that was current when the enclosing construct opened.
    returns_to: BlockId,
    cases: Vec<u8>,
}

fn snapshot(p: &FlowProcessor) -> String {
    serde_json::to_string(p).unwrap()
}

fn shape(p: &FlowProcessor) -> serde_json::Value {
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                m.remove("ordinal");
                m.values_mut().for_each(strip);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(p).unwrap();
    strip(&mut v);
    v
}

/// What an op will do. `Ok` carries the id the call must return, when the
/// model can predict it before the call.
enum Expect {
    Ok(Option<BlockId>),
    Err(K),
}

fn apply(p: &mut FlowProcessor, op: Op) -> Result<BlockId, parrot::flow::SemanticError> {
    let cur = p.current();
    match op {
        Op::Cmd(i) => p.push_command(cur, command(i).0),
        Op::If(c) => {
            let cond = match c {
                0 => VarRef::local("flag"),
                1 => VarRef::local("wide"),
                _ => VarRef::local("nothing"),
            };
            p.open_if(cur, cond)
        }
        Op::Else => p.open_else(cur),
        Op::EndIf => p.end_if(cur),
        Op::Switch => p.open_switch(cur, VarRef::input("guess").into()),
        Op::Case(v, wide) => {
            let value = if wide { UValue::u16(v as u16) } else { UValue::u8(v) };
            p.open_case(cur, value)
        }
        Op::EndSwitch => p.end_switch(cur),
        Op::Atomic => p.open_atomic(cur),
        Op::EndAtomic => p.end_atomic(cur),
        Op::Stale => p.push_command(p.body_id(), Command::send_back()),
    }
}

/// Runs `ops`; returns the number of rejected calls.
pub fn check_sequence(ops: &[Op]) -> Result<usize, String> {
    let mut p = fresh();
    let mut stack = vec![Frame {
        kind: Kind::Body,
        id: p.body_id(),
        returns_to: p.body_id(),
        cases: vec![],
    }];
    let mut accepted = Vec::new();
    let mut rejected = 0;
    for (step, &op) in ops.iter().enumerate() {
        let top = stack.last().unwrap();
        let cur = top.kind;
        let cur_id = top.id;
        let holds_commands = cur != Kind::Switch;
        let expect = match op {
            Op::Cmd(i) if holds_commands => match command(i).1 {
                None => Expect::Ok(Some(cur_id)),
                Some(k) => Expect::Err(k),
            },
            Op::If(0) if holds_commands => Expect::Ok(None),
            Op::If(1) if holds_commands => Expect::Err(K::NotBoolean),
            Op::If(_) if holds_commands => Expect::Err(K::UndeclaredName),
            Op::Else if cur == Kind::Then => Expect::Ok(None),
            Op::EndIf if matches!(cur, Kind::Then | Kind::Else) => Expect::Ok(Some(top.returns_to)),
            Op::Switch if holds_commands => Expect::Ok(None),
            Op::Case(_, true) if matches!(cur, Kind::Switch | Kind::Case) => Expect::Err(K::WidthMismatch),
            Op::Case(v, false) if matches!(cur, Kind::Switch | Kind::Case) => {
                let sw = if cur == Kind::Case { &stack[stack.len() - 2] } else { top };
                if sw.cases.contains(&v) {
                    Expect::Err(K::DuplicateName)
                } else {
                    Expect::Ok(None)
                }
            }
            Op::EndSwitch if matches!(cur, Kind::Switch | Kind::Case) => {
                let sw = if cur == Kind::Case { &stack[stack.len() - 2] } else { top };
                Expect::Ok(Some(sw.returns_to))
            }
            Op::Atomic if holds_commands => {
                if stack.iter().any(|f| f.kind == Kind::Atomic) {
                    Expect::Err(K::AtomicNesting)
                } else {
                    Expect::Ok(None)
                }
            }
            Op::EndAtomic if cur == Kind::Atomic => Expect::Ok(Some(top.returns_to)),
            Op::Stale if stack.len() == 1 => Expect::Ok(Some(cur_id)),
            _ => Expect::Err(K::OpenScope),
        };
        let before = snapshot(&p);
        let got = apply(&mut p, op);
        match (expect, got) {
            (Expect::Err(k), Err(e)) => {
                if e.kind != k {
                    return Err(format!("step {step} {op:?}: expected {k}, got {}", e.kind));
                }
                if snapshot(&p) != before {
                    return Err(format!("step {step} {op:?}: rejected call changed the AST"));
                }
                rejected += 1;
            }
            (Expect::Err(k), Ok(_)) => return Err(format!("step {step} {op:?}: expected {k}, call succeeded")),
            (Expect::Ok(_), Err(e)) => return Err(format!("step {step} {op:?}: unexpected error {e}")),
            (Expect::Ok(want), Ok(id)) => {
                if let Some(w) = want {
                    if id != w {
                        return Err(format!("step {step} {op:?}: returned block {id:?}, expected {w:?}"));
                    }
                }
                accepted.push(op);
                match op {
                    Op::If(_) => stack.push(Frame { kind: Kind::Then, id, returns_to: cur_id, cases: vec![] }),
                    Op::Else => {
                        let f = stack.last_mut().unwrap();
                        f.kind = Kind::Else;
                        f.id = id;
                    }
                    Op::EndIf | Op::EndAtomic => {
                        stack.pop();
                    }
                    Op::Switch => stack.push(Frame { kind: Kind::Switch, id, returns_to: cur_id, cases: vec![] }),
                    Op::Case(v, _) => {
                        if cur == Kind::Case {
                            stack.pop();
                        }
                        stack.last_mut().unwrap().cases.push(v);
                        stack.push(Frame { kind: Kind::Case, id, returns_to: id, cases: vec![] });
                    }
                    Op::EndSwitch => {
                        if cur == Kind::Case {
                            stack.pop();
                        }
                        stack.pop();
                    }
                    Op::Atomic => stack.push(Frame { kind: Kind::Atomic, id, returns_to: cur_id, cases: vec![] }),
                    _ => {}
                }
                if p.current() != stack.last().unwrap().id {
                    return Err(format!("step {step} {op:?}: model and processor disagree on the open scope"));
                }
            }
        }
    }
    // Close whatever is still open; the result must validate.
    while stack.len() > 1 {
        let op = match stack.last().unwrap().kind {
            Kind::Then | Kind::Else => Op::EndIf,
            Kind::Switch | Kind::Case => Op::EndSwitch,
            Kind::Atomic => Op::EndAtomic,
            Kind::Body => unreachable!(),
        };
        apply(&mut p, op).map_err(|e| format!("closing {op:?}: {e}"))?;
        accepted.push(op);
        let f = stack.pop().unwrap();
        if f.kind == Kind::Case {
            stack.pop();
        }
    }
    p.validate_complete().map_err(|e| format!("closed processor fails validation: {e}"))?;
    let mut replay = fresh();
    for &op in &accepted {
        apply(&mut replay, op).map_err(|e| format!("replay {op:?}: {e}"))?;
    }
    // Rejected calls still consume an ordinal, so compare shape only.
    if shape(&replay) != shape(&p) {
        return Err("replaying only the accepted calls gives a different AST".into());
    }
    Ok(rejected)
}
