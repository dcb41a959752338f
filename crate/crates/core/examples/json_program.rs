//! Loads a program document (first argument, or the built-in guess game),
//! checks it, and runs a trace file (second argument, or three guesses).
use parrot::program::ProgramDoc;
use parrot::sim::{run_trace, SimPacket};
use parrot::trace_file::{ResultsDoc, TraceDoc};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let doc = match args.next() {
        Some(path) => ProgramDoc::from_path(path.as_ref())?,
        None => ProgramDoc::from_json(parrot::programs::GUESS_GAME_JSON)?,
    };
    let solution = doc.build()?;
    eprintln!(
        "loaded {} processor(s), {} selector(s)",
        solution.processors().len(),
        solution.selectors().len()
    );

    let trace = match args.next() {
        Some(path) => TraceDoc::from_path(path.as_ref())?,
        None => {
            let guesses = [100u8, 50, 42].map(|g| SimPacket::udp(1, 40000, 5555, vec![g]));
            TraceDoc::from_packets(Some(7), &guesses)
        }
    };
    let seed = trace.seed.map_or(0, |s| s.0);
    let results = run_trace(&solution, &trace.packets()?, seed);
    print!("{}", ResultsDoc::new(seed, &results, false).to_json());
    Ok(())
}
