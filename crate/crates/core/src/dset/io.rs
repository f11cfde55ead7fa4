use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::ifs::IfsSpec;
use super::set::DSet;

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

fn axis_name(a: usize) -> String {
    AXIS_NAMES.get(a).map_or_else(|| format!("x{a}"), |s| s.to_string())
}

/// Writes atoms as CSV with columns `x, y, weight`.
pub fn write_atoms_csv<T: Real, W: Write>(s: &DSet<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..s.n()).map(axis_name).collect();
    header.push("weight".into());
    w.write_record(&header)?;
    for i in 0..s.len() {
        let mut row: Vec<String> = s.atom(i).iter().map(|x| format!("{:e}", x.as_f64())).collect();
        row.push(format!("{:e}", s.weight(i).as_f64()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads atoms written by [`write_atoms_csv`].
pub fn read_atoms_csv<T: Real>(path: &Path, d: f64) -> Result<DSet<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let n = r.headers()?.len().checked_sub(1).filter(|&n| n > 0).ok_or_else(|| Error::Config("atom CSV needs coordinates and a weight column".into()))?;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number {s:?}: {e}"))))
            .collect::<Result<_>>()?;
        atoms.extend(vals[..n].iter().map(|&x| T::lit(x)));
        weights.push(T::lit(vals[n]));
    }
    DSet::from_atoms(n, atoms, Some(weights), d, None)
}

/// Parses an IFS description from TOML (keys `ratio`, `maps`, `depth`, `seed`).
pub fn parse_ifs_toml(text: &str) -> Result<IfsSpec> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dset::build_dset;

    #[test]
    fn csv_roundtrip() {
        let s = build_dset::<f64>(&IfsSpec::four_corner(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("atoms.csv");
        write_atoms_csv(&s, std::fs::File::create(&path).unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,y,weight\n"));
        let back: DSet<f64> = read_atoms_csv(&path, s.d()).unwrap();
        assert_eq!(back.atoms(), s.atoms());
        assert_eq!(back.weights(), s.weights());
    }

    #[test]
    fn toml_spec() {
        let spec = parse_ifs_toml("ratio = 0.3333333333333333\nmaps = [[0,0],[0.6666666666666666,0],[0,0.6666666666666666],[0.6666666666666666,0.6666666666666666]]\ndepth = 3\nseed = 9\n").unwrap();
        assert_eq!(spec.depth, 3);
        assert_eq!(spec.seed, 9);
        spec.validate().unwrap();
    }
}
