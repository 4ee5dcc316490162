//! GAMETES-style TSV reader and writer.
//!
//! Layout: a tab-separated header of SNP names with a final `Class` column,
//! then one row per sequence with genotype codes in {0,1,2} and a class in
//! {0,1}. No quoting, no missing values.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::GenotypeMatrix;
use crate::error::{Error, Result};

pub const CLASS_COLUMN: &str = "Class";

/// Loads and validates a dataset. Row numbers in errors are 1-based data
/// rows (the header is row 0).
pub fn load_dataset(path: impl AsRef<Path>) -> Result<GenotypeMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, path)
}

fn parse_dataset(text: &str, path: &Path) -> Result<GenotypeMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Header {
            path: path.to_path_buf(),
            detail: "file is empty".into(),
        })?
        .trim_end_matches('\r');

    let mut fields: Vec<&str> = header.split('\t').collect();
    match fields.pop() {
        Some(CLASS_COLUMN) => {}
        Some(other) => {
            return Err(Error::Header {
                path: path.to_path_buf(),
                detail: format!("final column must be {CLASS_COLUMN:?}, found {other:?}"),
            })
        }
        None => unreachable!("split always yields at least one field"),
    }
    if fields.is_empty() || fields.iter().any(|f| f.is_empty()) {
        return Err(Error::Header {
            path: path.to_path_buf(),
            detail: "header must name at least one SNP and no name may be empty".into(),
        });
    }
    for (i, name) in fields.iter().enumerate() {
        if fields[..i].contains(name) {
            return Err(Error::Header {
                path: path.to_path_buf(),
                detail: format!("duplicate SNP name {name:?}"),
            });
        }
    }
    let snp_names: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
    let n_snps = snp_names.len();

    let mut genotypes = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue; // allow a trailing newline
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != n_snps + 1 {
            return Err(Error::RaggedRow {
                row,
                expected: n_snps + 1,
                found: cells.len(),
            });
        }
        for (c, cell) in cells[..n_snps].iter().enumerate() {
            match cell.parse::<u8>() {
                Ok(g @ 0..=2) => genotypes.push(g),
                _ => {
                    return Err(Error::GenotypeDomain {
                        row,
                        column: c + 1,
                        snp: snp_names[c].clone(),
                        found: cell.to_string(),
                    })
                }
            }
        }
        match cells[n_snps].parse::<u8>() {
            Ok(l @ 0..=1) => labels.push(l),
            _ => {
                return Err(Error::ClassDomain {
                    row,
                    found: cells[n_snps].to_string(),
                })
            }
        }
    }
    GenotypeMatrix::new(genotypes, labels, snp_names)
}

/// Renders a dataset in the exact format `load_dataset` reads.
pub fn render_dataset(data: &GenotypeMatrix) -> String {
    let mut out = String::with_capacity(data.n_rows() * (2 * data.n_snps() + 2) + 64);
    for name in data.snp_names() {
        out.push_str(name);
        out.push('\t');
    }
    out.push_str(CLASS_COLUMN);
    out.push('\n');
    for r in 0..data.n_rows() {
        for &g in data.row(r) {
            out.push((b'0' + g) as char);
            out.push('\t');
        }
        out.push((b'0' + data.label(r)) as char);
        out.push('\n');
    }
    out
}

/// Writes a dataset in the exact format `load_dataset` reads.
pub fn write_dataset(path: impl AsRef<Path>, data: &GenotypeMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(render_dataset(data).as_bytes())
        .map_err(|e| Error::io(path, e))
}
