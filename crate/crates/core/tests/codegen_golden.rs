mod common;

use common::p4scan;
use parrot::codegen::{generate, COMBINED_NAME, FRAGMENT_NAMES};
use parrot::flow::Hint;
use parrot::programs;

fn golden_case(name: &str, sol: parrot::solution::Solution) {
    let g = generate(&sol).unwrap();
    let files = g.files();
    assert_eq!(files.len(), FRAGMENT_NAMES.len() + 2);
    common::check_golden(&common::golden_dir(name), &files, true).unwrap();
}

#[test]
fn guess_game_matches_golden() {
    golden_case("guess_game", programs::guess_game(Hint::IfElse).unwrap());
}

#[test]
fn insert_agg_matches_golden() {
    golden_case("insert_agg", programs::insert_agg().unwrap());
}

#[test]
fn loaded_json_generates_the_same_files_as_the_builder() {
    for (name, json) in programs::EXAMPLES {
        let loaded = parrot::program::ProgramDoc::from_json(json).unwrap().build().unwrap();
        let built = match *name {
            "guess_game" => programs::guess_game(Hint::IfElse).unwrap(),
            _ => programs::insert_agg().unwrap(),
        };
        assert_eq!(generate(&loaded).unwrap(), generate(&built).unwrap(), "{name}");
    }
}

#[test]
fn every_program_is_structurally_sound() {
    for (name, sol) in programs::all().unwrap() {
        let g = generate(&sol).unwrap();
        for (file, text) in g.files() {
            p4scan::balanced(text).unwrap_or_else(|e| panic!("{name}/{file}: {e}"));
        }
        let combined = g.combined.as_deref().unwrap();
        p4scan::closed_symbols(combined).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn chain_macros_follow_selectors() {
    let empty = generate(&programs::empty()).unwrap();
    assert!(!empty.parser.contains("#define"));
    assert!(empty.apply.trim().is_empty());
    let udp = generate(&programs::guess_game(Hint::IfElse).unwrap()).unwrap();
    assert_eq!(udp.parser.matches("#define PARROT_CHAIN_").count(), 1);
    let tcp = generate(&programs::opcode_dispatch(Hint::IfElse).unwrap()).unwrap();
    assert!(tcp.parser.contains("#define PARROT_CHAIN_IPV4_TCP"));
}

#[test]
fn combined_file_is_named_program_p4() {
    let g = generate(&programs::insert_agg().unwrap()).unwrap();
    assert!(g.files().iter().any(|(n, _)| n == COMBINED_NAME));
}

#[test]
fn scanner_rejects_broken_code() {
    assert!(p4scan::balanced("control c() { apply { if (x) { } }").is_err());
    assert!(p4scan::balanced("a(b]").is_err());
    assert!(p4scan::balanced("#define X {\nstate s { }\n").is_ok());
    let ok = "header h_t { bit<8> f; }\nstruct headers { h_t h; }\n\
              control c(inout headers hdr) { apply { hdr.h.f = 8w1; hdr.h.setValid(); } }";
    p4scan::closed_symbols(ok).unwrap();
    let bad_field = ok.replace("hdr.h.f =", "hdr.h.g =");
    assert!(p4scan::closed_symbols(&bad_field).is_err());
    let bad_name = ok.replace("8w1", "undeclared_thing");
    assert!(p4scan::closed_symbols(&bad_name).is_err());
}

#[test]
fn scanner_catches_mutations_of_real_output() {
    let g = generate(&programs::guess_game(Hint::IfElse).unwrap()).unwrap();
    let c = g.combined.unwrap();
    p4scan::closed_symbols(&c).unwrap();
    for (from, to) in [
        ("hdr.guess_game_out.c1", "hdr.guess_game_out.c9"),
        ("guess_game_secret_reg.read", "guess_game_secret_reg.reed"),
        ("meta.parrot_hits.guess_sel", "meta.parrot_hits.other_sel"),
        ("16w5555: parrot_hit_guess_sel", "16w5555: parrot_hit_missing"),
    ] {
        assert!(c.contains(from), "{from}");
        let m = c.replacen(from, to, 1);
        assert!(p4scan::closed_symbols(&m).is_err(), "mutation {from} -> {to} not caught");
    }
}

#[test]
fn json_documents_cover_rings_switch_and_lookahead() {
    let cases = [
        ("ring_log.json", programs::ring_log().unwrap()),
        ("opcode_dispatch.json", programs::opcode_dispatch(Hint::Table).unwrap()),
    ];
    for (file, built) in cases {
        let path = common::manifest_dir().join("tests/data").join(file);
        let loaded = parrot::program::ProgramDoc::from_path(&path).unwrap().build().unwrap();
        assert_eq!(generate(&loaded).unwrap(), generate(&built).unwrap(), "{file}");
    }
}
