//! Regenerate `data/corpus.json` from the seeded generator.

use globaldrive::verify::generate_corpus;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/corpus.json");
    let text = serde_json::to_string_pretty(&generate_corpus())?;
    std::fs::write(path, text + "\n")?;
    println!("wrote {path}");
    Ok(())
}
