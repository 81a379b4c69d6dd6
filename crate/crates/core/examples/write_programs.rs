//! Regenerates the bundled reference programs under `programs/v1/`.

use std::fs;
use std::path::Path;

use crasp_kit::programs::{build_source, BUNDLED};
use crasp_kit::Alphabet;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("programs/v1");
    fs::create_dir_all(&dir)?;
    let alphabet = Alphabet::default_ascii();
    for (task, file, _) in BUNDLED {
        let source = build_source(task, &alphabet).expect("bundled tasks are expressible");
        fs::write(dir.join(file), source.render())?;
        println!("wrote {file}");
    }
    Ok(())
}
