//! Signal files: binary/plain PGM for images and the `TWS1` text format for n-D arrays.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use twfpd::transform::Signal;

use crate::error::CliError;

pub const TWS_MAGIC: &str = "TWS1";

/// Reads a PGM or TWS1 file, choosing the parser from the magic bytes.
pub fn read_signal(path: &Path) -> Result<Signal, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let parsed = if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        parse_pgm(&bytes)
    } else if bytes.starts_with(TWS_MAGIC.as_bytes()) {
        std::str::from_utf8(&bytes)
            .map_err(|e| e.to_string())
            .and_then(parse_tws)
    } else {
        Err("unrecognized signal format (expected PGM P2/P5 or TWS1)".to_string())
    };
    parsed.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Writes `.pgm` paths as 16-bit binary PGM and everything else as TWS1.
pub fn write_signal(path: &Path, x: &Signal) -> Result<(), CliError> {
    let is_pgm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let bytes = if is_pgm {
        format_pgm(x, 65535).map_err(CliError::Validation)?
    } else {
        format_tws(x).into_bytes()
    };
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn format_tws(x: &Signal) -> String {
    let shape = x.shape();
    let width = shape[shape.len() - 1];
    let mut out = String::with_capacity(x.len() * 20 + 32);
    out.push_str(TWS_MAGIC);
    out.push('\n');
    let _ = writeln!(out, "{}", shape.len());
    let dims: Vec<String> = shape.iter().map(|s| s.to_string()).collect();
    out.push_str(&dims.join(" "));
    out.push('\n');
    for row in x.data().chunks(width) {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&vals.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_tws(text: &str) -> Result<Signal, String> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(TWS_MAGIC) {
        return Err("missing TWS1 header".into());
    }
    let n: usize = lines
        .next()
        .ok_or("missing dimension line")?
        .trim()
        .parse()
        .map_err(|e| format!("dimension line: {e}"))?;
    let shape = lines
        .next()
        .ok_or("missing shape line")?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| format!("shape line: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if shape.len() != n {
        return Err(format!("shape line has {} sizes, expected {n}", shape.len()));
    }
    let data = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse::<f64>().map_err(|e| format!("value {t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Signal::new(shape, data).map_err(|e| e.to_string())
}

/// Header tokenizer that skips `#` comments.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn token(&mut self) -> Result<&str, String> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err("unexpected end of PGM data".into());
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|e| e.to_string())
    }

    fn number(&mut self, what: &str) -> Result<usize, String> {
        let t = self.token()?;
        t.parse().map_err(|_| format!("bad PGM {what} {t:?}"))
    }
}

/// Parses P2/P5 with 8- or 16-bit samples, scaled to `[0, 1]`.
pub fn parse_pgm(bytes: &[u8]) -> Result<Signal, String> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token()?.to_string();
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(format!("PGM maxval {maxval} outside 1..=65535"));
    }
    let count = width * height;
    let scale = 1.0 / maxval as f64;
    let data: Vec<f64> = match magic.as_str() {
        "P2" => (0..count)
            .map(|_| {
                let v = h.number("sample")?;
                if v > maxval {
                    return Err(format!("PGM sample {v} exceeds maxval {maxval}"));
                }
                Ok(v as f64 * scale)
            })
            .collect::<Result<_, _>>()?,
        "P5" => {
            let raster = bytes.get(h.pos + 1..).ok_or("missing PGM raster")?;
            let wide = maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            if raster.len() < need {
                return Err(format!("PGM raster has {} bytes, expected {need}", raster.len()));
            }
            if wide {
                raster[..need]
                    .chunks_exact(2)
                    .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 * scale)
                    .collect()
            } else {
                raster[..need].iter().map(|&b| b as f64 * scale).collect()
            }
        }
        other => return Err(format!("unsupported PGM magic {other:?}")),
    };
    Signal::new(vec![height, width], data).map_err(|e| e.to_string())
}

/// Binary PGM; values are clamped to `[0, 1]` and rounded to `maxval` levels.
pub fn format_pgm(x: &Signal, maxval: u16) -> Result<Vec<u8>, String> {
    if x.dim() != 2 {
        return Err(format!("PGM output needs a 2-D signal, got {} dimensions", x.dim()));
    }
    let (height, width) = (x.shape()[0], x.shape()[1]);
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    let m = maxval as f64;
    for &v in x.data() {
        let q = (v.clamp(0.0, 1.0) * m).round() as u16;
        if maxval > 255 {
            out.extend_from_slice(&q.to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    Ok(out)
}
