use super::names;
use super::writer::Writer;
use crate::model::UValue;
use crate::selector::{FieldRef, FlowSelector, ParserChain};

/// `16w5555` style literal sized to the field on the wire.
fn keyset_literal(bits: u32, v: UValue) -> String {
    format!("{bits}w{}", v.magnitude())
}

/// Parser states for one chain, plus the `#define` that enables it.
///
/// State `k` tests selector `k`; a hit sets the selector's flag, extracts the
/// processor input and accepts, a miss moves to state `k + 1`, and the last
/// miss accepts.
pub fn emit_parser_chain(chain: &ParserChain, indent: usize) -> String {
    let mut w = Writer::new(indent, 0);
    w.directive(format!("#define {}", names::chain_macro(chain.stack)));
    w.indent();
    for (k, sel) in chain.links.iter().enumerate() {
        let next = if k + 1 < chain.links.len() {
            names::chain_state(chain.stack, k + 1)
        } else {
            "accept".to_string()
        };
        w.blank();
        emit_link(&mut w, chain, k, sel, &next);
        w.blank();
        emit_hit(&mut w, sel);
    }
    w.finish()
}

fn emit_link(w: &mut Writer, chain: &ParserChain, k: usize, sel: &FlowSelector, next: &str) {
    w.open(format!("state {} {{", names::chain_state(chain.stack, k)));
    if sel.lookahead().is_some() {
        let ty = names::lookahead_type(sel.name());
        w.line(format!(
            "{ty} {} = packet.lookahead<{ty}>();",
            names::lookahead_var(sel.name())
        ));
    }
    let mut exprs = Vec::new();
    let mut keys = Vec::new();
    for c in sel.criteria() {
        match &c.field {
            FieldRef::Standard(f) => {
                exprs.push(format!("hdr.{}.{}", f.header, f.name));
                keys.push(keyset_literal(f.wire_bits, c.value));
            }
            FieldRef::Lookahead(name) => {
                exprs.push(format!("{}.{name}", names::lookahead_var(sel.name())));
                keys.push(keyset_literal(c.value.width().bits(), c.value));
            }
        }
    }
    let (expr, key) = if exprs.len() == 1 {
        (exprs.remove(0), keys.remove(0))
    } else {
        (exprs.join(", "), format!("({})", keys.join(", ")))
    };
    w.open(format!("transition select({expr}) {{"));
    w.line(format!("{key}: {};", names::hit_state(sel.name())));
    w.line(format!("default: {next};"));
    w.close("}");
    w.close("}");
}

fn emit_hit(w: &mut Writer, sel: &FlowSelector) {
    let p = sel.processor();
    w.open(format!("state {} {{", names::hit_state(sel.name())));
    w.line(format!("meta.parrot_hits.{} = 1;", sel.name()));
    w.line(format!("packet.extract(hdr.{});", names::input_header(p.name())));
    w.line("transition accept;");
    w.close("}");
}
