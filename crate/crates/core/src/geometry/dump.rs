use std::io::Write;

use crate::error::Result;

use super::cube::DyadicCube;

/// One JSON object `{"level": j, "coords": [...]}` per line.
pub fn write_cubes_jsonl<W: Write>(cubes: &[DyadicCube], mut out: W) -> Result<()> {
    for q in cubes {
        serde_json::to_writer(&mut out, q)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_cubes_jsonl(text: &str) -> Result<Vec<DyadicCube>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}
