//! The `examples` → `check` → `generate` → `simulate` round trip, driven
//! through `cli::run` and compared against committed goldens.

use std::path::Path;

use parrot::cli;

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["parrot"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn expect_ok(args: &[&str]) -> Result<Outcome, String> {
    let o = run(args);
    if o.code != 0 {
        return Err(format!("`{}` exited {}: {}", args.join(" "), o.code, o.stderr));
    }
    Ok(o)
}

fn files_in(dir: &Path) -> Result<Vec<(String, String)>, String> {
    let mut v = Vec::new();
    for e in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let e = e.map_err(|e| e.to_string())?;
        let name = e.file_name().to_string_lossy().into_owned();
        v.push((name, std::fs::read_to_string(e.path()).map_err(|e| e.to_string())?));
    }
    v.sort();
    Ok(v)
}

/// Runs the pipeline for one shipped example in a fresh temp directory.
/// `bless` rewrites the simulate golden instead of comparing.
pub fn round_trip(name: &str, bless: bool) -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let root_s = root.to_str().unwrap();

    expect_ok(&["examples", name, "-o", root_s])?;
    let prog = root.join(format!("{name}.json"));
    let shipped = std::fs::read_to_string(super::asset(&format!("programs/{name}.json"))).unwrap();
    if std::fs::read_to_string(&prog).map_err(|e| e.to_string())? != shipped {
        return Err(format!("{name}.json differs from the shipped asset"));
    }
    let prog_s = prog.to_str().unwrap();

    expect_ok(&["check", prog_s])?;

    let out = root.join("gen");
    let listing = expect_ok(&["generate", prog_s, "-o", out.to_str().unwrap()])?.stdout;
    let written = files_in(&out)?;
    if listing.lines().count() != written.len() || written.len() != 7 {
        return Err(format!("generate listed {} files, wrote {}", listing.lines().count(), written.len()));
    }
    let refs: Vec<(String, &str)> = written.iter().map(|(n, t)| (n.clone(), t.as_str())).collect();
    super::check_golden(&super::golden_dir(name), &refs, false)?;

    let trace = super::asset(&format!("traces/{name}.trace.json"));
    let sim = |dest: &Path| -> Result<String, String> {
        expect_ok(&[
            "simulate",
            prog_s,
            "-t",
            trace.to_str().unwrap(),
            "-o",
            dest.to_str().unwrap(),
        ])?;
        std::fs::read_to_string(dest).map_err(|e| e.to_string())
    };
    let first = sim(&root.join("a.json"))?;
    let second = sim(&root.join("b.json"))?;
    if first != second {
        return Err("simulate is not deterministic".into());
    }
    let golden = super::golden_dir("cli");
    super::check_golden(&golden, &[(format!("{name}.results.json"), first.as_str())], bless)
}
