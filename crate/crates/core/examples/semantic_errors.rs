//! Mistakes are reported by the call that makes them, with the call's
//! ordinal, and leave the processor untouched. The JSON loader reports the
//! same errors at a document path.
use parrot::flow::{BlockOps, Command, FlowProcessor, VarRef};
use parrot::model::{FieldDecl, HeaderLayout, UValue, UWidth};
use parrot::program::ProgramDoc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = HeaderLayout::of("req", &[("x", UWidth::U8)])?;
    let mut p = FlowProcessor::builder("demo", input)
        .local(FieldDecl::new("wide", UWidth::U16)?)
        .build()?;

    let attempts = [
        Command::assign_const(VarRef::input("x"), UValue::u8(1)),
        Command::add(VarRef::local("wide"), VarRef::input("x"), VarRef::input("x")),
        Command::assign(VarRef::local("nope"), VarRef::input("x")),
        Command::assign_const(VarRef::output("y"), UValue::u8(1)),
    ];
    for cmd in attempts {
        if let Err(e) = p.body().add(cmd) {
            println!("builder: {e}");
        }
    }
    if let Err(e) = p.body().if_(VarRef::local("wide")) {
        println!("builder: {e}");
    }

    let mut doc: serde_json::Value = serde_json::from_str(parrot::programs::GUESS_GAME_JSON)?;
    doc["processors"][0]["body"][2]["body"][0]["lhs"] = "shared.missing".into();
    match ProgramDoc::from_json(&doc.to_string())?.build() {
        Ok(_) => println!("json: unexpectedly valid"),
        Err(e) => println!("json: {e}"),
    }
    Ok(())
}
