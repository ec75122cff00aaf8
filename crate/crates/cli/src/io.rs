//! Diagnostics CSV, `RNLS1` snapshots and JSON reports.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rotnls::{make_grid, Complex, DiagnosticsRecord, DiagnosticsSink, Field};
use serde::Serialize;

pub const CSV_HEADER: &str = "t,mass,energy,ell_A,grad_norm_sq,sup_sq,dt,tail_frac,J,J1,J2";

pub const SNAPSHOT_MAGIC: &[u8; 5] = b"RNLS1";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

pub fn csv_row(r: &DiagnosticsRecord<f64>) -> String {
    format!(
        "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{}",
        r.t,
        r.mass,
        r.energy,
        r.ell_a,
        r.grad_norm_sq,
        r.sup_sq,
        r.dt,
        r.tail_frac,
        opt(r.j),
        opt(r.j1),
        opt(r.j2)
    )
}

pub fn write_csv<W: Write>(mut w: W, records: &[DiagnosticsRecord<f64>]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", csv_row(r))?;
    }
    w.flush()
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn parse_csv(text: &str) -> io::Result<Vec<DiagnosticsRecord<f64>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        Some(h) => return Err(invalid(format!("line 1: unexpected header `{h}`"))),
        None => return Err(invalid("empty diagnostics file".into())),
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(invalid(format!("line {}: expected 11 columns, got {}", k + 2, cols.len())));
        }
        let num = |i: usize| -> io::Result<f64> {
            cols[i]
                .trim()
                .parse()
                .map_err(|_| invalid(format!("line {}: bad number `{}`", k + 2, cols[i])))
        };
        let maybe = |i: usize| -> io::Result<Option<f64>> {
            if cols[i].trim().is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        out.push(DiagnosticsRecord {
            t: num(0)?,
            mass: num(1)?,
            energy: num(2)?,
            ell_a: num(3)?,
            grad_norm_sq: num(4)?,
            sup_sq: num(5)?,
            dt: num(6)?,
            tail_frac: num(7)?,
            j: maybe(8)?,
            j1: maybe(9)?,
            j2: maybe(10)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> io::Result<Vec<DiagnosticsRecord<f64>>> {
    parse_csv(&std::fs::read_to_string(path)?)
}

pub fn encode_snapshot(field: &Field<f64>, t: f64) -> Vec<u8> {
    let n = field.n();
    let mut out = Vec::with_capacity(5 + 4 + 16 + 16 * n * n);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&field.grid.half_width().to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for z in &field.values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Inverse of [`encode_snapshot`]; returns the field and its time.
pub fn decode_snapshot(bytes: &[u8]) -> io::Result<(Field<f64>, f64)> {
    if bytes.len() < 25 || &bytes[..5] != SNAPSHOT_MAGIC {
        return Err(invalid("byte 0: missing RNLS1 magic".into()));
    }
    let n = u32::from_le_bytes(bytes[5..9].try_into().expect("4 bytes")) as usize;
    let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let half_width = f(9);
    let t = f(17);
    let want = 25 + 16 * n * n;
    if bytes.len() != want {
        return Err(invalid(format!("byte {}: expected {want} bytes for n = {n}", bytes.len())));
    }
    let values = (0..n * n).map(|k| Complex::new(f(25 + 16 * k), f(33 + 16 * k))).collect();
    let grid = make_grid(half_width, n).map_err(|e| invalid(format!("byte 5: {e}")))?;
    let field = Field::from_values(&grid, values).map_err(|e| invalid(e.to_string()))?;
    Ok((field, t))
}

pub fn write_snapshot(path: &Path, field: &Field<f64>, t: f64) -> io::Result<()> {
    std::fs::write(path, encode_snapshot(field, t))
}

pub fn read_snapshot(path: &Path) -> io::Result<(Field<f64>, f64)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_snapshot(&bytes)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::other)?;
    writeln!(w)?;
    w.flush()
}

/// Streams records to a CSV and snapshots to numbered files in one
/// directory. The first write error is kept and reported by `finish`.
pub struct FileSink {
    csv: BufWriter<File>,
    dir: PathBuf,
    error: Option<io::Error>,
}

impl FileSink {
    pub fn create(dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut csv = BufWriter::new(File::create(dir.join("diagnostics.csv"))?);
        writeln!(csv, "{CSV_HEADER}")?;
        Ok(Self {
            csv,
            dir: dir.to_path_buf(),
            error: None,
        })
    }

    pub fn snapshot_path(&self, step: usize) -> PathBuf {
        self.dir.join(format!("snapshot_{step:07}.rnls"))
    }

    pub fn finish(mut self) -> io::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.csv.flush()
    }
}

impl DiagnosticsSink<f64> for FileSink {
    fn record(&mut self, rec: &DiagnosticsRecord<f64>) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.csv, "{}", csv_row(rec)) {
                self.error = Some(e);
            }
        }
    }

    fn snapshot(&mut self, step: usize, t: f64, field: &Field<f64>) {
        if self.error.is_none() {
            if let Err(e) = write_snapshot(&self.snapshot_path(step), field, t) {
                self.error = Some(e);
            }
        }
    }
}
