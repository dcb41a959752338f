//! P4-16 emission: five fragments spliced into a static template.
//!
//! The template pulls each fragment in with `#include "<name>.p4inc"`. A parser
//! chain is only reachable when its `PARROT_CHAIN_<STACK>` macro is defined,
//! so a solution without selectors compiles to plain forwarding.

mod control;
mod parser;
mod writer;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::flow::SemanticError;
use crate::model::HeaderLayout;
use crate::solution::{Solution, TemplateId};
use crate::selector::build_chains;
use writer::Writer;

pub use control::{describe, emit_processor_control, ControlFragments};
pub use parser::emit_parser_chain;

pub const V1MODEL_BASIC: &str = include_str!("../../assets/templates/v1model_basic.p4");

pub const FRAGMENT_NAMES: [&str; 5] = [
    "headers.p4inc",
    "parser.p4inc",
    "structs.p4inc",
    "decls.p4inc",
    "apply.p4inc",
];

pub const COMBINED_NAME: &str = "program.p4";

/// Source text of a shipped template.
pub fn template_source(id: TemplateId) -> &'static str {
    match id {
        TemplateId::V1ModelBasic => V1MODEL_BASIC,
    }
}

/// File name used for the template copy.
pub fn template_file_name(id: TemplateId) -> String {
    format!("{}.p4", id.name())
}

/// Identifiers shared by the emitters, the symbol scan in the tests and
/// anything else that needs to find generated names.
pub mod names {
    use crate::selector::ProtocolStack;

    pub fn chain_macro(stack: ProtocolStack) -> String {
        format!("PARROT_CHAIN_{}", stack.constant())
    }

    /// State `k` of a chain; state 0 is the entry named in the template.
    pub fn chain_state(stack: ProtocolStack, k: usize) -> String {
        let base = format!("parrot_chain_{}", stack.constant().to_ascii_lowercase());
        if k == 0 {
            base
        } else {
            format!("{base}_{k}")
        }
    }

    pub fn hit_state(selector: &str) -> String {
        format!("parrot_hit_{selector}")
    }

    pub fn lookahead_type(selector: &str) -> String {
        format!("{selector}_la_t")
    }

    pub fn lookahead_var(selector: &str) -> String {
        format!("{selector}_la")
    }

    pub fn input_header(processor: &str) -> String {
        format!("{processor}_in")
    }

    pub fn output_header(processor: &str) -> String {
        format!("{processor}_out")
    }

    /// Locals and the working copies of shared variables.
    pub fn local(processor: &str, name: &str) -> String {
        format!("{processor}_{name}")
    }

    pub fn shared_register(processor: &str, name: &str) -> String {
        format!("{processor}_{name}_reg")
    }

    pub fn ring_register(processor: &str, ring: &str) -> String {
        format!("{processor}_{ring}_reg")
    }

    pub fn ring_head_register(processor: &str, ring: &str) -> String {
        format!("{processor}_{ring}_head_reg")
    }

    pub fn ring_head(processor: &str, ring: &str) -> String {
        format!("{processor}_{ring}_head")
    }

    pub fn eq_table(processor: &str, ordinal: u32) -> String {
        format!("{processor}_eq{ordinal}")
    }
}

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error(transparent)]
    OpenScope(#[from] SemanticError),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CodegenError + '_ {
    move |source| CodegenError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedFileSet {
    pub headers: String,
    pub parser: String,
    pub structs: String,
    pub decls: String,
    pub apply: String,
    pub template: TemplateId,
    /// Template with every include expanded, when requested.
    pub combined: Option<String>,
}

impl GeneratedFileSet {
    pub fn fragment(&self, name: &str) -> Option<&str> {
        Some(match name {
            "headers.p4inc" => &self.headers,
            "parser.p4inc" => &self.parser,
            "structs.p4inc" => &self.structs,
            "decls.p4inc" => &self.decls,
            "apply.p4inc" => &self.apply,
            _ => return None,
        })
    }

    /// Every output file with its contents: fragments, template copy, and the
    /// combined program if present.
    pub fn files(&self) -> Vec<(String, &str)> {
        let mut out: Vec<(String, &str)> = FRAGMENT_NAMES
            .iter()
            .map(|n| (n.to_string(), self.fragment(n).unwrap()))
            .collect();
        out.push((
            template_file_name(self.template),
            template_source(self.template),
        ));
        if let Some(c) = &self.combined {
            out.push((COMBINED_NAME.to_string(), c));
        }
        out
    }

    /// Writes all files under `dir`. Files are staged in a temporary sibling
    /// directory and moved into place only after every write succeeded.
    pub fn write_atomic(&self, dir: &Path) -> Result<Vec<PathBuf>, CodegenError> {
        let parent = match dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let stage = tempfile::Builder::new()
            .prefix(".parrot-gen-")
            .tempdir_in(&parent)
            .map_err(io_err(&parent))?;
        let files = self.files();
        for (name, text) in &files {
            let path = stage.path().join(name);
            fs::write(&path, text).map_err(io_err(&path))?;
        }
        if !dir.exists() {
            let staged = stage.keep();
            fs::rename(&staged, dir).map_err(|e| {
                let _ = fs::remove_dir_all(&staged);
                io_err(dir)(e)
            })?;
        } else {
            if !dir.is_dir() {
                return Err(io_err(dir)(io::Error::new(
                    io::ErrorKind::AlreadyExists,
                    "not a directory",
                )));
            }
            for (name, _) in &files {
                let to = dir.join(name);
                fs::rename(stage.path().join(name), &to).map_err(io_err(&to))?;
            }
        }
        Ok(files.iter().map(|(n, _)| dir.join(n)).collect())
    }
}

/// Builds the fragment set for a solution. Pure: the same solution always
/// yields the same text.
pub fn generate(solution: &Solution) -> Result<GeneratedFileSet, CodegenError> {
    let indent = solution.options().indent;
    let processors = solution.processors();
    for p in &processors {
        p.validate_complete()?;
    }
    let chains = build_chains(solution.selectors()).expect("checked when the solution was built");

    let mut headers = Writer::new(indent, 0);
    for p in &processors {
        emit_header(&mut headers, &names::input_header(p.name()), p.input());
        if let Some(out) = p.output() {
            emit_header(&mut headers, &names::output_header(p.name()), out);
        }
    }
    for s in solution.selectors() {
        if let Some(la) = s.lookahead() {
            emit_header(&mut headers, &names::lookahead_var(s.name()), la);
        }
    }
    headers.open("struct parrot_hits_t {");
    for s in solution.selectors() {
        headers.line(format!("bit<1> {};", s.name()));
    }
    headers.close("}");

    let mut structs = Writer::new(indent, 1);
    for p in &processors {
        let inp = names::input_header(p.name());
        structs.line(format!("{inp}_t {inp};"));
        if p.output().is_some() {
            let out = names::output_header(p.name());
            structs.line(format!("{out}_t {out};"));
        }
    }

    let parser = chains
        .values()
        .map(|c| emit_parser_chain(c, indent))
        .collect::<Vec<_>>()
        .join("\n");

    let mut decls = Vec::new();
    let mut apply = Vec::new();
    for p in &processors {
        let c = emit_processor_control(p, &solution.selectors_of(p.name()), indent);
        decls.push(c.decls);
        apply.push(c.apply);
    }

    let mut set = GeneratedFileSet {
        headers: headers.finish(),
        parser,
        structs: structs.finish(),
        decls: decls.join("\n"),
        apply: apply.join("\n"),
        template: solution.template(),
        combined: None,
    };
    if solution.options().emit_combined {
        set.combined = Some(combine(template_source(set.template), &set));
    }
    Ok(set)
}

fn emit_header(w: &mut Writer, base: &str, layout: &HeaderLayout) {
    w.open(format!("header {base}_t {{"));
    for f in layout.fields() {
        w.line(format!("bit<{}> {};", f.width().bits(), f.name()));
    }
    w.close("}");
    w.blank();
}

/// Replaces each `#include "<fragment>"` line of the template with the
/// fragment text.
pub fn combine(template: &str, set: &GeneratedFileSet) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    for line in template.lines() {
        let included = line
            .trim()
            .strip_prefix("#include \"")
            .and_then(|r| r.strip_suffix('"'))
            .and_then(|name| set.fragment(name));
        match included {
            Some(text) => out.push_str(text),
            None => {
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out
}
