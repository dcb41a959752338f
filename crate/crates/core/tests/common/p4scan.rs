//! Token-level checks over emitted P4: delimiter balance and a closed symbol
//! table. Deliberately independent of the generator's naming helpers.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(String),
    Punct(char),
}

/// Drops comments and preprocessor lines, keeping only the active branch of
/// `#ifdef`/`#ifndef`/`#else`/`#endif`. Returns the remaining text and the
/// macros named by `#define`.
pub fn preprocess(src: &str) -> (String, BTreeSet<String>) {
    let lines = strip_comments(src);
    let macros: BTreeSet<String> = lines
        .iter()
        .filter_map(|l| {
            let mut w = l.trim_start().strip_prefix('#')?.split_whitespace();
            (w.next() == Some("define")).then(|| w.next().map(str::to_string)).flatten()
        })
        .collect();
    let mut out = String::new();
    // One entry per open conditional: is its current branch active?
    let mut active: Vec<bool> = Vec::new();
    for l in &lines {
        if let Some(rest) = l.trim_start().strip_prefix('#') {
            let mut w = rest.split_whitespace();
            match (w.next(), w.next()) {
                (Some("ifdef"), Some(m)) => active.push(macros.contains(m)),
                (Some("ifndef"), Some(m)) => active.push(!macros.contains(m)),
                (Some("else"), _) => {
                    if let Some(a) = active.last_mut() {
                        *a = !*a;
                    }
                }
                (Some("endif"), _) => {
                    active.pop();
                }
                _ => {}
            }
            // Keep line numbering stable for diagnostics.
            out.push('\n');
            continue;
        }
        if active.iter().all(|a| *a) {
            out.push_str(l);
        }
        out.push('\n');
    }
    (out, macros)
}

fn strip_comments(src: &str) -> Vec<String> {
    let mut lines = Vec::new();
    let mut in_block = false;
    for line in src.lines() {
        let mut l = line.to_string();
        if in_block {
            match l.find("*/") {
                Some(i) => {
                    l = l[i + 2..].to_string();
                    in_block = false;
                }
                None => {
                    lines.push(String::new());
                    continue;
                }
            }
        }
        while let Some(i) = l.find("/*") {
            match l[i..].find("*/") {
                Some(j) => l = format!("{}{}", &l[..i], &l[i + j + 2..]),
                None => {
                    l.truncate(i);
                    in_block = true;
                }
            }
        }
        if let Some(i) = l.find("//") {
            l.truncate(i);
        }
        lines.push(l);
    }
    lines
}

pub fn tokenize(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut toks = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Ident(chars[s..i].iter().collect()));
        } else if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Num(chars[s..i].iter().collect()));
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            i += 1;
        } else {
            toks.push(Tok::Punct(c));
            i += 1;
        }
    }
    toks
}

/// Checks `()`, `[]` and `{}` nesting outside preprocessor lines.
pub fn balanced(src: &str) -> Result<(), String> {
    let (text, _) = preprocess(src);
    let mut stack = Vec::new();
    for (n, line) in text.lines().enumerate() {
        for c in line.chars() {
            match c {
                '(' | '[' | '{' => stack.push((c, n + 1)),
                ')' | ']' | '}' => {
                    let want = match c {
                        ')' => '(',
                        ']' => '[',
                        _ => '{',
                    };
                    match stack.pop() {
                        Some((open, _)) if open == want => {}
                        Some((open, at)) => {
                            return Err(format!("line {}: `{c}` closes `{open}` from line {at}", n + 1))
                        }
                        None => return Err(format!("line {}: unmatched `{c}`", n + 1)),
                    }
                }
                _ => {}
            }
        }
    }
    match stack.pop() {
        Some((open, at)) => Err(format!("`{open}` from line {at} is never closed")),
        None => Ok(()),
    }
}

const KEYWORDS: &[&str] = &[
    "action", "actions", "apply", "bit", "bool", "const", "control", "default", "default_action",
    "else", "entries", "exact", "false", "header", "if", "in", "inout", "key", "main", "out",
    "parser", "select", "state", "struct", "table", "transition", "true", "accept", "reject",
    "atomic",
];

/// Externs and functions provided by `core.p4` / `v1model.p4`.
const BUILTIN_FUNCS: &[&str] = &["V1Switch", "random", "truncate", "update_checksum", "register"];

/// Builtin types and their members.
fn builtin_types() -> BTreeMap<&'static str, Vec<&'static str>> {
    BTreeMap::from([
        ("packet_in", vec!["extract", "lookahead", "advance"]),
        ("packet_out", vec!["emit"]),
        (
            "standard_metadata_t",
            vec![
                "ingress_port",
                "egress_spec",
                "egress_port",
                "instance_type",
                "packet_length",
            ],
        ),
        ("HashAlgorithm", vec!["csum16", "crc16", "crc32", "identity"]),
        ("register", vec!["read", "write"]),
        ("table", vec!["apply"]),
    ])
}

const HEADER_METHODS: &[&str] = &["setValid", "setInvalid", "isValid"];

#[derive(Default, Debug)]
pub struct Symbols {
    /// Type name to (field name to field type). `bit` for bit vectors.
    pub types: BTreeMap<String, BTreeMap<String, String>>,
    pub headers: BTreeSet<String>,
    /// Variable name to type names. Parameters like `packet` are declared
    /// once per block with different types.
    pub vars: BTreeMap<String, BTreeSet<String>>,
    pub states: BTreeSet<String>,
    pub actions: BTreeSet<String>,
    pub blocks: BTreeSet<String>,
    pub macros: BTreeSet<String>,
    /// Token indices of declaration sites, which are not references.
    pub decl_sites: BTreeSet<usize>,
}

fn ident(t: &Tok) -> Option<&str> {
    match t {
        Tok::Ident(s) => Some(s),
        _ => None,
    }
}

fn is_punct(t: Option<&Tok>, c: char) -> bool {
    matches!(t, Some(Tok::Punct(p)) if *p == c)
}

/// Skips a balanced `<...>` starting at `i` (which must be `<`).
fn skip_angle(toks: &[Tok], mut i: usize) -> usize {
    let mut depth = 0;
    loop {
        match &toks[i] {
            Tok::Punct('<') => depth += 1,
            Tok::Punct('>') => {
                depth -= 1;
                if depth == 0 {
                    return i + 1;
                }
            }
            _ => {}
        }
        i += 1;
    }
}

/// Reads a type at `i`: `bit<..>`, `register<..>(..)`, or a plain name.
/// Returns the type's name and the index after it.
fn read_type(toks: &[Tok], i: usize, known: &BTreeSet<String>) -> Option<(String, usize)> {
    let name = ident(toks.get(i)?)?;
    match name {
        "bit" if is_punct(toks.get(i + 1), '<') => Some(("bit".into(), skip_angle(toks, i + 1))),
        "register" if is_punct(toks.get(i + 1), '<') => {
            let mut j = skip_angle(toks, i + 1);
            if is_punct(toks.get(j), '(') {
                while !is_punct(toks.get(j), ')') {
                    j += 1;
                }
                j += 1;
            }
            Some(("register".into(), j))
        }
        n if known.contains(n) || builtin_types().contains_key(n) => Some((n.to_string(), i + 1)),
        _ => None,
    }
}

pub fn collect(src: &str) -> Result<Symbols, String> {
    let (text, macros) = preprocess(src);
    let toks = tokenize(&text);
    let mut sym = Symbols {
        macros,
        ..Symbols::default()
    };
    // Pass 1: type names, so declarations can refer to later types.
    for w in toks.windows(2) {
        if let (Some(kw @ ("header" | "struct")), Some(n)) = (ident(&w[0]), ident(&w[1])) {
            sym.types.insert(n.to_string(), BTreeMap::new());
            if kw == "header" {
                sym.headers.insert(n.to_string());
            }
        }
    }
    let known: BTreeSet<String> = sym.types.keys().cloned().collect();
    // Pass 2: fields, parameters and declarations.
    let mut i = 0;
    while i < toks.len() {
        match ident(&toks[i]) {
            Some("header" | "struct") => {
                let name = ident(&toks[i + 1]).unwrap().to_string();
                let mut j = i + 3;
                let mut fields = BTreeMap::new();
                while !is_punct(toks.get(j), '}') {
                    let (ty, k) = read_type(&toks, j, &known)
                        .ok_or_else(|| format!("bad field type in `{name}` at token {j}: {:?}", toks[j]))?;
                    let f = ident(&toks[k]).ok_or("field name expected")?;
                    fields.insert(f.to_string(), ty);
                    j = k + 2;
                }
                sym.types.insert(name, fields);
                sym.decl_sites.extend(i..=j);
                i = j + 1;
            }
            Some("parser" | "control") => {
                let name = ident(&toks[i + 1]).unwrap().to_string();
                sym.blocks.insert(name);
                sym.decl_sites.insert(i + 1);
                let mut j = i + 3;
                while !is_punct(toks.get(j), ')') {
                    if matches!(ident(&toks[j]), Some("in" | "out" | "inout")) {
                        j += 1;
                    }
                    let (ty, k) = read_type(&toks, j, &known).ok_or_else(|| format!("bad parameter type at {j}"))?;
                    let v = ident(&toks[k]).ok_or("parameter name expected")?;
                    sym.vars.entry(v.to_string()).or_default().insert(ty);
                    sym.decl_sites.insert(k);
                    j = k + 1;
                    if is_punct(toks.get(j), ',') {
                        j += 1;
                    }
                }
                i = j + 1;
            }
            Some("state") => {
                sym.states.insert(ident(&toks[i + 1]).unwrap().to_string());
                sym.decl_sites.insert(i + 1);
                i += 2;
            }
            Some("action") => {
                sym.actions.insert(ident(&toks[i + 1]).unwrap().to_string());
                sym.decl_sites.insert(i + 1);
                i += 2;
            }
            Some("table") => {
                sym.vars
                    .entry(ident(&toks[i + 1]).unwrap().to_string())
                    .or_default()
                    .insert("table".into());
                sym.decl_sites.insert(i + 1);
                i += 2;
            }
            Some(_) => {
                // `T name;` or `T name = ...` where T is a type.
                let prev_is_dot = i > 0 && is_punct(toks.get(i - 1), '.');
                if !prev_is_dot {
                    if let Some((ty, k)) = read_type(&toks, i, &known) {
                        if let (Some(v), true) = (
                            toks.get(k).and_then(ident),
                            is_punct(toks.get(k + 1), ';') || is_punct(toks.get(k + 1), '='),
                        ) {
                            sym.vars.entry(v.to_string()).or_default().insert(ty);
                            sym.decl_sites.insert(k);
                            i = k + 1;
                            continue;
                        }
                    }
                }
                i += 1;
            }
            None => i += 1,
        }
    }
    Ok(sym)
}

/// Every identifier must be a keyword, a builtin, or declared in `src`;
/// every member access must name a field or method of the base's type.
pub fn closed_symbols(src: &str) -> Result<Symbols, String> {
    let sym = collect(src)?;
    let (text, _) = preprocess(src);
    let toks = tokenize(&text);
    let builtins = builtin_types();
    let member_type = |ty: &str, m: &str| -> Result<Option<String>, String> {
        if let Some(fields) = sym.types.get(ty) {
            if let Some(t) = fields.get(m) {
                return Ok(Some(t.clone()));
            }
            if sym.headers.contains(ty) && HEADER_METHODS.contains(&m) {
                return Ok(None);
            }
            return Err(format!("`{ty}` has no member `{m}`"));
        }
        if let Some(ms) = builtins.get(ty) {
            if ms.contains(&m) {
                return Ok(None);
            }
        }
        Err(format!("type `{ty}` has no member `{m}`"))
    };
    let mut i = 0;
    while i < toks.len() {
        let Tok::Ident(name) = &toks[i] else {
            i += 1;
            continue;
        };
        if sym.decl_sites.contains(&i) {
            i += 1;
            continue;
        }
        if is_punct(toks.get(i.wrapping_sub(1)), '.') || is_punct(toks.get(i.wrapping_sub(1)), '@') {
            i += 1;
            continue;
        }
        let defined = KEYWORDS.contains(&name.as_str())
            || BUILTIN_FUNCS.contains(&name.as_str())
            || builtins.contains_key(name.as_str())
            || sym.types.contains_key(name)
            || sym.vars.contains_key(name)
            || sym.states.contains(name)
            || sym.actions.contains(name)
            || sym.blocks.contains(name)
            || sym.macros.contains(name);
        if !defined {
            return Err(format!("undefined identifier `{name}`"));
        }
        // Walk a member chain from a variable or builtin enum, keeping every
        // type the chain could have so far.
        let mut types: BTreeSet<String> = match sym.vars.get(name) {
            Some(ts) => ts.clone(),
            None if builtins.contains_key(name.as_str()) => BTreeSet::from([name.clone()]),
            None => BTreeSet::new(),
        };
        let mut j = i + 1;
        while is_punct(toks.get(j), '.') {
            let Some(Tok::Ident(m)) = toks.get(j + 1) else {
                return Err(format!("member name expected after `{name}.`"));
            };
            let mut next = BTreeSet::new();
            let mut ok = false;
            let mut last_err = format!("`{m}` accessed on a value without members");
            for t in &types {
                match member_type(t, m) {
                    Ok(mt) => {
                        ok = true;
                        next.extend(mt);
                    }
                    Err(e) => last_err = e,
                }
            }
            if !ok {
                return Err(format!("{last_err} (in chain starting at `{name}`)"));
            }
            types = next;
            j += 2;
        }
        i = j;
    }
    Ok(sym)
}
