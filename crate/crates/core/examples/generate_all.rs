//! Prints every fragment of the built-in programs.
use parrot::codegen::generate;
use parrot::programs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let only = std::env::args().nth(1);
    for (name, solution) in programs::all()? {
        if only.as_deref().is_some_and(|o| o != name) {
            continue;
        }
        let files = generate(&solution)?;
        for frag in parrot::codegen::FRAGMENT_NAMES {
            println!("==== {name}/{frag}");
            print!("{}", files.fragment(frag).unwrap());
        }
    }
    Ok(())
}
