use super::names;
use super::writer::Writer;
use crate::flow::{BlockId, Command, FlowProcessor, Hint, Operand, Scope, Stmt, VarRef};
use crate::model::UValue;
use crate::selector::{FlowSelector, ProtocolStack};

/// Ingress declarations and apply statements for one processor.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ControlFragments {
    pub decls: String,
    pub apply: String,
}

fn lit(v: UValue) -> String {
    format!("{}w{}", v.width().bits(), v.magnitude())
}

/// Straight-line P4 for a processor guarded by the hit flags of `selectors`.
///
/// Shared variables live in single-slot registers and are read before and
/// written after each command that touches them. A register starts at zero,
/// so a shared variable with a non-zero initial value is stored XOR-ed with
/// that value.
pub fn emit_processor_control(
    p: &FlowProcessor,
    selectors: &[&FlowSelector],
    indent: usize,
) -> ControlFragments {
    let mut e = Emitter {
        p,
        decls: Writer::new(indent, 1),
        apply: Writer::new(indent, 2),
    };
    e.declarations();
    e.apply_block(selectors);
    ControlFragments {
        decls: e.decls.finish(),
        apply: e.apply.finish(),
    }
}

struct Emitter<'a> {
    p: &'a FlowProcessor,
    decls: Writer,
    apply: Writer,
}

impl Emitter<'_> {
    fn name(&self) -> &str {
        self.p.name()
    }

    fn declarations(&mut self) {
        let p = self.p;
        self.decls.line(format!("// processor {}", p.name()));
        for s in p.shared() {
            self.decls.line(format!(
                "register<bit<{}>>(1) {};",
                s.width().bits(),
                names::shared_register(p.name(), s.name())
            ));
            self.decls.line(format!(
                "bit<{}> {};",
                s.width().bits(),
                names::local(p.name(), s.name())
            ));
        }
        for r in p.rings() {
            self.decls.line(format!(
                "register<bit<{}>>({}) {};",
                r.element_width().bits(),
                r.capacity(),
                names::ring_register(p.name(), r.name())
            ));
            self.decls.line(format!(
                "register<bit<32>>(1) {};",
                names::ring_head_register(p.name(), r.name())
            ));
            self.decls
                .line(format!("bit<32> {};", names::ring_head(p.name(), r.name())));
        }
        for l in p.locals() {
            self.decls.line(format!(
                "bit<{}> {};",
                l.width().bits(),
                names::local(p.name(), l.name())
            ));
        }
        self.table_decls(BlockId::BODY);
    }

    /// Tables for TABLE-hinted equality tests, in ordinal order.
    fn table_decls(&mut self, block: BlockId) {
        let p = self.p;
        for node in &p.block(block).nodes {
            match &node.stmt {
                Stmt::Command(Command::Equals {
                    target,
                    lhs,
                    hint: Hint::Table,
                    ..
                }) => {
                    let width = self.operand_width(lhs);
                    let table = names::eq_table(p.name(), node.ordinal);
                    let target = self.var(target);
                    let d = &mut self.decls;
                    d.blank();
                    d.line(format!("// #{} Equals, table strategy", node.ordinal));
                    d.line(format!("bit<{}> {table}_key;", width.bits()));
                    d.line(format!("action {table}_hit() {{ {target} = 8w1; }}"));
                    d.line(format!("action {table}_miss() {{ {target} = 8w0; }}"));
                    d.open(format!("table {table} {{"));
                    d.line(format!("key = {{ {table}_key: exact; }}"));
                    d.line(format!("actions = {{ {table}_hit; {table}_miss; }}"));
                    d.open("const entries = {");
                    d.line(format!("{}: {table}_hit();", lit(UValue::zero(width))));
                    d.close("}");
                    d.line(format!("const default_action = {table}_miss();"));
                    d.close("}");
                }
                Stmt::If {
                    then_block,
                    else_block,
                    ..
                } => {
                    self.table_decls(*then_block);
                    if let Some(e) = else_block {
                        self.table_decls(*e);
                    }
                }
                Stmt::Switch { cases, .. } => {
                    for (_, b) in cases {
                        self.table_decls(*b);
                    }
                }
                Stmt::Atomic { block } => self.table_decls(*block),
                Stmt::Command(_) => {}
            }
        }
    }

    fn apply_block(&mut self, selectors: &[&FlowSelector]) {
        let p = self.p;
        let flags: Vec<String> = selectors
            .iter()
            .map(|s| format!("meta.parrot_hits.{} == 1", s.name()))
            .collect();
        let names_list: Vec<&str> = selectors.iter().map(|s| s.name()).collect();
        self.apply.line(format!(
            "// processor {} (selectors: {})",
            p.name(),
            names_list.join(", ")
        ));
        self.apply.open(format!("if ({}) {{", flags.join(" || ")));
        self.apply.line("meta.parrot_processed = 1;");

        let input = names::input_header(p.name());
        if let Some(out) = p.output() {
            let output = names::output_header(p.name());
            self.apply.line(format!("hdr.{output}.setValid();"));
            for f in out.fields() {
                self.apply.line(format!(
                    "hdr.{output}.{} = {};",
                    f.name(),
                    lit(UValue::zero(f.width()))
                ));
            }
        }
        for l in p.locals() {
            self.apply.line(format!(
                "{} = {};",
                names::local(p.name(), l.name()),
                lit(UValue::zero(l.width()))
            ));
        }

        self.block(BlockId::BODY);

        if p.output().is_some() {
            self.apply.line(format!("hdr.{input}.setInvalid();"));
            match p.size_delta() {
                d if d > 0 => self.apply.line(format!(
                    "meta.parrot_added_bytes = meta.parrot_added_bytes + 16w{d};"
                )),
                d if d < 0 => self.apply.line(format!(
                    "meta.parrot_removed_bytes = meta.parrot_removed_bytes + 16w{};",
                    -d
                )),
                _ => {}
            }
        }
        if p.truncate_payload() {
            self.truncation(selectors);
        }
        if p.output().is_some() || p.truncate_payload() {
            self.apply.line("meta.parrot_payload_modified = 1;");
        }
        self.apply.close("}");
    }

    /// Residual payload = IPv4 total length minus the IPv4 and L4 headers and
    /// the processor input.
    fn truncation(&mut self, selectors: &[&FlowSelector]) {
        let in_size = self.p.input().byte_size() as u64;
        let residual = |stack: ProtocolStack| {
            let l4 = match stack {
                ProtocolStack::Ipv4Udp => 8,
                ProtocolStack::Ipv4Tcp => 20,
            };
            format!(
                "meta.parrot_removed_bytes = meta.parrot_removed_bytes + (hdr.ipv4.totalLen - 16w{});",
                20 + l4 + in_size
            )
        };
        let uses = |stack| selectors.iter().any(|s| s.stack() == stack);
        let (udp, tcp) = (uses(ProtocolStack::Ipv4Udp), uses(ProtocolStack::Ipv4Tcp));
        if udp && tcp {
            self.apply.open("if (hdr.udp.isValid()) {");
            self.apply.line(residual(ProtocolStack::Ipv4Udp));
            self.apply.close("} else {");
            self.apply.indent();
            self.apply.line(residual(ProtocolStack::Ipv4Tcp));
            self.apply.close("}");
        } else if tcp {
            self.apply.line(residual(ProtocolStack::Ipv4Tcp));
        } else {
            self.apply.line(residual(ProtocolStack::Ipv4Udp));
        }
        self.apply.line("meta.parrot_truncate = 1;");
    }

    fn block(&mut self, block: BlockId) {
        let p = self.p;
        for node in &p.block(block).nodes {
            match &node.stmt {
                Stmt::Command(cmd) => {
                    self.apply.line(format!("// #{} {}", node.ordinal, describe(cmd)));
                    self.command(node.ordinal, cmd);
                }
                Stmt::If {
                    cond,
                    then_block,
                    else_block,
                } => {
                    self.apply.line(format!("// #{} If {cond}", node.ordinal));
                    self.apply.open(format!("if ({} == 8w1) {{", self.var(cond)));
                    self.block(*then_block);
                    if let Some(e) = else_block {
                        self.apply.close("} else {");
                        self.apply.indent();
                        self.block(*e);
                    }
                    self.apply.close("}");
                }
                Stmt::Switch {
                    selector, cases, ..
                } => {
                    self.apply.line(format!("// #{} Switch {selector}", node.ordinal));
                    self.read_shared(&[selector]);
                    let sel = self.operand(selector);
                    for (i, (value, case)) in cases.iter().enumerate() {
                        let head = format!("if ({sel} == {}) {{", lit(*value));
                        if i == 0 {
                            self.apply.open(head);
                        } else {
                            self.apply.close(format!("}} else {head}"));
                            self.apply.indent();
                        }
                        self.block(*case);
                    }
                    if !cases.is_empty() {
                        self.apply.close("}");
                    }
                }
                Stmt::Atomic { block } => {
                    self.apply.line(format!("// #{} Atomic", node.ordinal));
                    self.apply.line("ATOMIC_BEGIN");
                    self.apply.indent();
                    self.block(*block);
                    self.apply.dedent();
                    self.apply.line("ATOMIC_END");
                }
            }
        }
    }

    fn command(&mut self, ordinal: u32, cmd: &Command) {
        self.read_shared(&cmd.operands());
        let name = self.name().to_string();
        match cmd {
            Command::AssignConst { target, value } => {
                let t = self.var(target);
                self.apply.line(format!("{t} = {};", lit(*value)));
            }
            Command::AssignVar { target, source } => {
                let (t, s) = (self.var(target), self.operand(source));
                self.apply.line(format!("{t} = {s};"));
            }
            Command::Cast { target, source } => {
                let width = self.var_width(target).bits();
                let (t, s) = (self.var(target), self.operand(source));
                self.apply.line(format!("{t} = (bit<{width}>){s};"));
            }
            Command::Add { target, lhs, rhs } | Command::Sub { target, lhs, rhs } => {
                let op = if matches!(cmd, Command::Add { .. }) { "+" } else { "-" };
                let (t, a, b) = (self.var(target), self.operand(lhs), self.operand(rhs));
                self.apply.line(format!("{t} = {a} {op} {b};"));
            }
            Command::Equals {
                target,
                lhs,
                rhs,
                hint: Hint::Table,
            } => {
                let table = names::eq_table(&name, ordinal);
                let (a, b) = (self.operand(lhs), self.operand(rhs));
                self.apply.line(format!("{table}_key = {a} - {b};"));
                self.apply.line(format!("{table}.apply();"));
                let _ = target;
            }
            Command::Equals { target, lhs, rhs, .. } => self.compare(target, lhs, "==", rhs),
            Command::Greater { target, lhs, rhs } => self.compare(target, lhs, ">", rhs),
            Command::Rand { target } => {
                let w = self.var_width(target);
                let t = self.var(target);
                self.apply.line(format!(
                    "random({t}, {}, {});",
                    lit(UValue::zero(w)),
                    lit(UValue::truncating(w, u64::MAX))
                ));
            }
            Command::RingPush { ring, source } => {
                let decl = self.p.ring(ring).expect("ring checked by builder");
                let reg = names::ring_register(&name, ring);
                let head = names::ring_head(&name, ring);
                let head_reg = names::ring_head_register(&name, ring);
                let s = self.operand(source);
                self.apply.line(format!("{head_reg}.read({head}, 32w0);"));
                self.apply.line(format!("{reg}.write({head}, {s});"));
                self.apply
                    .open(format!("if ({head} == 32w{}) {{", decl.capacity() - 1));
                self.apply.line(format!("{head} = 32w0;"));
                self.apply.close("} else {");
                self.apply.indent();
                self.apply.line(format!("{head} = {head} + 32w1;"));
                self.apply.close("}");
                self.apply.line(format!("{head_reg}.write(32w0, {head});"));
            }
            Command::RingReadHead { ring, target } => {
                let reg = names::ring_register(&name, ring);
                let head = names::ring_head(&name, ring);
                let head_reg = names::ring_head_register(&name, ring);
                let t = self.var(target);
                self.apply.line(format!("{head_reg}.read({head}, 32w0);"));
                self.apply.line(format!("{reg}.read({t}, {head});"));
            }
            Command::SendBack => self
                .apply
                .line("standard_metadata.egress_spec = standard_metadata.ingress_port;"),
            Command::Forward { port } => self
                .apply
                .line(format!("standard_metadata.egress_spec = (bit<9>)16w{port};")),
        }
        if let Some(t) = cmd.target() {
            self.write_shared(t);
        }
    }

    fn compare(&mut self, target: &VarRef, lhs: &Operand, op: &str, rhs: &Operand) {
        let (t, a, b) = (self.var(target), self.operand(lhs), self.operand(rhs));
        self.apply.open(format!("if ({a} {op} {b}) {{"));
        self.apply.line(format!("{t} = 8w1;"));
        self.apply.close("} else {");
        self.apply.indent();
        self.apply.line(format!("{t} = 8w0;"));
        self.apply.close("}");
    }

    fn read_shared(&mut self, operands: &[&Operand]) {
        let mut done: Vec<&str> = Vec::new();
        for op in operands {
            if let Operand::Var(v) = op {
                if v.scope == Scope::Shared && !done.contains(&v.name.as_str()) {
                    done.push(&v.name);
                    let tmp = names::local(self.name(), &v.name);
                    let reg = names::shared_register(self.name(), &v.name);
                    self.apply.line(format!("{reg}.read({tmp}, 32w0);"));
                    let init = self.shared_initial(&v.name);
                    if !init.is_zero() {
                        self.apply.line(format!("{tmp} = {tmp} ^ {};", lit(init)));
                    }
                }
            }
        }
    }

    fn write_shared(&mut self, target: &VarRef) {
        if target.scope != Scope::Shared {
            return;
        }
        let tmp = names::local(self.name(), &target.name);
        let reg = names::shared_register(self.name(), &target.name);
        let init = self.shared_initial(&target.name);
        if init.is_zero() {
            self.apply.line(format!("{reg}.write(32w0, {tmp});"));
        } else {
            self.apply
                .line(format!("{reg}.write(32w0, {tmp} ^ {});", lit(init)));
        }
    }

    fn shared_initial(&self, name: &str) -> UValue {
        self.p
            .shared()
            .iter()
            .find(|s| s.name() == name)
            .expect("shared variable checked by builder")
            .initial()
    }

    fn var(&self, v: &VarRef) -> String {
        match v.scope {
            Scope::Input => format!("hdr.{}.{}", names::input_header(self.name()), v.name),
            Scope::Output => format!("hdr.{}.{}", names::output_header(self.name()), v.name),
            Scope::Local | Scope::Shared => names::local(self.name(), &v.name),
        }
    }

    fn var_width(&self, v: &VarRef) -> crate::model::UWidth {
        self.p.lookup(v).expect("checked by builder").width
    }

    fn operand_width(&self, o: &Operand) -> crate::model::UWidth {
        match o {
            Operand::Var(v) => self.var_width(v),
            Operand::Const(c) => c.width(),
        }
    }

    fn operand(&self, o: &Operand) -> String {
        match o {
            Operand::Var(v) => self.var(v),
            Operand::Const(c) => lit(*c),
        }
    }
}

/// One-line rendering of a command for the trace comment.
pub fn describe(cmd: &Command) -> String {
    match cmd {
        Command::AssignConst { target, value } => format!("AssignConst {target} = {value}"),
        Command::AssignVar { target, source } => format!("AssignVar {target} = {source}"),
        Command::Cast { target, source } => format!("Cast {target} = {source}"),
        Command::Add { target, lhs, rhs } => format!("Add {target} = {lhs} + {rhs}"),
        Command::Sub { target, lhs, rhs } => format!("Sub {target} = {lhs} - {rhs}"),
        Command::Equals {
            target,
            lhs,
            rhs,
            hint,
        } => format!("Equals {target} = {lhs} == {rhs} ({hint:?})"),
        Command::Greater { target, lhs, rhs } => format!("Greater {target} = {lhs} > {rhs}"),
        Command::Rand { target } => format!("Rand {target}"),
        Command::RingPush { ring, source } => format!("RingPush {ring} <- {source}"),
        Command::RingReadHead { ring, target } => format!("RingReadHead {target} = {ring}[head]"),
        Command::SendBack => "SendBack".to_string(),
        Command::Forward { port } => format!("Forward {port}"),
    }
}
