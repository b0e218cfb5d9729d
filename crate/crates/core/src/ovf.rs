//! Reader for OOMMF/MuMax3 OVF 2.0 text files.
//!
//! Only the text encoding is supported, matching what MuMax3 emits with the
//! `OVF2_TEXT` output format: a "#"-prefixed header block, then whitespace
//! separated ASCII floats with the x index incremented first. Exactly one of
//! the three vector components is kept, so peak memory per file is a third of
//! the numeric payload.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

/// Which column of the 3-vector data block to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
    Z,
}

impl Component {
    /// Column index of this component in a data record.
    pub fn column(self) -> usize {
        match self {
            Component::X => 0,
            Component::Y => 1,
            Component::Z => 2,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::X => "x",
            Component::Y => "y",
            Component::Z => "z",
        })
    }
}

impl FromStr for Component {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Component::X),
            "y" => Ok(Component::Y),
            "z" => Ok(Component::Z),
            other => Err(format!("unknown component {other:?}, expected x, y or z")),
        }
    }
}

/// Mesh geometry and metadata from an OVF 2.0 header.
#[derive(Debug, Clone, PartialEq)]
pub struct OvfHeader {
    pub title: String,
    pub value_dim: usize,
    /// Cell counts per axis.
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Cell size per axis in meters.
    pub xstep: f64,
    pub ystep: f64,
    pub zstep: f64,
    /// Center coordinate of the first cell per axis in meters. MuMax3 writes
    /// these; when absent they default to half a cell step.
    pub xbase: f64,
    pub ybase: f64,
    pub zbase: f64,
    /// Snapshot time in seconds, recovered from a Desc line of the form
    /// "Total simulation time: <t> s" when present.
    pub total_sim_time: Option<f64>,
}

impl OvfHeader {
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn grid(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }
}

/// One vector component of one snapshot, in file order (x fastest, then y,
/// then z).
#[derive(Debug, Clone)]
pub struct ScalarSlab {
    pub header: OvfHeader,
    pub values: Vec<f64>,
}

#[derive(Debug)]
pub enum OvfError {
    Io(io::Error),
    /// First line is not the OVF 2.0 magic.
    NotOvf2(String),
    MalformedHeader {
        line: usize,
        reason: String,
    },
    MissingKey(&'static str),
    UnsupportedEncoding(String),
    UnsupportedMeshType(String),
    UnsupportedValueDim(usize),
    BadHeaderValue {
        line: usize,
        key: String,
        value: String,
    },
    DataCountMismatch {
        expected: usize,
        got: usize,
    },
    NonNumericToken {
        line: usize,
        token: String,
    },
}

impl fmt::Display for OvfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OvfError::Io(e) => write!(f, "i/o error: {e}"),
            OvfError::NotOvf2(first) => {
                write!(f, "not an OVF 2.0 text file (first line {first:?})")
            }
            OvfError::MalformedHeader { line, reason } => {
                write!(f, "line {line}: malformed header: {reason}")
            }
            OvfError::MissingKey(key) => write!(f, "required header key {key:?} is missing"),
            OvfError::UnsupportedEncoding(enc) => {
                write!(f, "unsupported data encoding {enc:?} (only \"Data Text\" is readable)")
            }
            OvfError::UnsupportedMeshType(mt) => {
                write!(f, "unsupported meshtype {mt:?} (only \"rectangular\" is readable)")
            }
            OvfError::UnsupportedValueDim(d) => {
                write!(f, "valuedim {d} is not supported (need 3-component vector data)")
            }
            OvfError::BadHeaderValue { line, key, value } => {
                write!(f, "line {line}: bad value {value:?} for header key {key:?}")
            }
            OvfError::DataCountMismatch { expected, got } => {
                write!(f, "data block holds {got} records, header promises {expected}")
            }
            OvfError::NonNumericToken { line, token } => {
                write!(f, "line {line}: non-numeric data token {token:?}")
            }
        }
    }
}

impl std::error::Error for OvfError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            OvfError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for OvfError {
    fn from(e: io::Error) -> Self {
        OvfError::Io(e)
    }
}

/// Line-by-line cursor that tracks 1-based line numbers for error reports.
struct LineCursor<'a, R: BufRead> {
    reader: &'a mut R,
    buf: String,
    line_no: usize,
}

impl<'a, R: BufRead> LineCursor<'a, R> {
    fn new(reader: &'a mut R) -> Self {
        LineCursor { reader, buf: String::new(), line_no: 0 }
    }

    /// Next line without its trailing newline, or None at end of input.
    fn next_line(&mut self) -> Result<Option<&str>, OvfError> {
        self.buf.clear();
        let n = self.reader.read_line(&mut self.buf)?;
        if n == 0 {
            return Ok(None);
        }
        self.line_no += 1;
        Ok(Some(self.buf.trim_end_matches(['\n', '\r'])))
    }
}

/// Accumulates header fields until the data section begins.
#[derive(Default)]
struct HeaderBuilder {
    title: Option<String>,
    value_dim: Option<usize>,
    nodes: [Option<usize>; 3],
    steps: [Option<f64>; 3],
    bases: [Option<f64>; 3],
    total_sim_time: Option<f64>,
}

impl HeaderBuilder {
    fn finish(self) -> Result<OvfHeader, OvfError> {
        let nx = self.nodes[0].ok_or(OvfError::MissingKey("xnodes"))?;
        let ny = self.nodes[1].ok_or(OvfError::MissingKey("ynodes"))?;
        let nz = self.nodes[2].ok_or(OvfError::MissingKey("znodes"))?;
        let value_dim = self.value_dim.ok_or(OvfError::MissingKey("valuedim"))?;
        if value_dim != 3 {
            return Err(OvfError::UnsupportedValueDim(value_dim));
        }
        let xstep = self.steps[0].ok_or(OvfError::MissingKey("xstepsize"))?;
        let ystep = self.steps[1].ok_or(OvfError::MissingKey("ystepsize"))?;
        let zstep = self.steps[2].ok_or(OvfError::MissingKey("zstepsize"))?;
        Ok(OvfHeader {
            title: self.title.unwrap_or_default(),
            value_dim,
            nx,
            ny,
            nz,
            xstep,
            ystep,
            zstep,
            xbase: self.bases[0].unwrap_or(xstep / 2.0),
            ybase: self.bases[1].unwrap_or(ystep / 2.0),
            zbase: self.bases[2].unwrap_or(zstep / 2.0),
            total_sim_time: self.total_sim_time,
        })
    }
}

fn parse_count(line: usize, key: &str, value: &str) -> Result<usize, OvfError> {
    match value.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(OvfError::BadHeaderValue {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        }),
    }
}

fn parse_float(line: usize, key: &str, value: &str, positive: bool) -> Result<f64, OvfError> {
    match value.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && (!positive || v > 0.0) => Ok(v),
        _ => Err(OvfError::BadHeaderValue {
            line,
            key: key.to_string(),
            value: value.trim().to_string(),
        }),
    }
}

/// Pulls the snapshot time out of a Desc line like
/// "Desc: Total simulation time:  2.4e-11  s". Failures are ignored, time
/// recovery has a CLI fallback.
fn scan_desc_for_time(value: &str) -> Option<f64> {
    let lower = value.to_ascii_lowercase();
    let idx = lower.find("total simulation time")?;
    let rest = &value[idx + "total simulation time".len()..];
    let rest = rest.trim_start().strip_prefix(':').unwrap_or(rest);
    rest.split_ascii_whitespace().next()?.parse::<f64>().ok()
}

/// Parses the header block and consumes the "# Begin: Data Text" line, so a
/// subsequent read continues at the first data record.
pub fn parse_header<R: BufRead>(reader: &mut R) -> Result<OvfHeader, OvfError> {
    let mut cursor = LineCursor::new(reader);
    parse_header_at(&mut cursor)
}

fn parse_header_at<R: BufRead>(cursor: &mut LineCursor<'_, R>) -> Result<OvfHeader, OvfError> {
    let first = cursor
        .next_line()?
        .ok_or_else(|| OvfError::NotOvf2("<empty file>".to_string()))?;
    let magic = first.trim();
    let magic_body = magic.strip_prefix('#').map(str::trim_start);
    let ok = matches!(magic_body, Some(rest) if rest.to_ascii_lowercase().starts_with("oommf ovf 2"));
    if !ok {
        return Err(OvfError::NotOvf2(magic.to_string()));
    }

    let mut b = HeaderBuilder::default();
    loop {
        let line_no = cursor.line_no + 1;
        let line = match cursor.next_line()? {
            Some(l) => l,
            None => {
                return Err(OvfError::MalformedHeader {
                    line: cursor.line_no,
                    reason: "file ended before a \"# Begin: Data\" line".to_string(),
                })
            }
        };
        let body = match line.trim().strip_prefix('#') {
            Some(rest) => rest.trim(),
            None => {
                return Err(OvfError::MalformedHeader {
                    line: line_no,
                    reason: format!("expected a \"#\"-prefixed line, got {:?}", line.trim()),
                })
            }
        };
        let (key, value) = match body.split_once(':') {
            Some((k, v)) => (k.trim().to_ascii_lowercase(), v.trim()),
            None => continue,
        };
        match key.as_str() {
            "title" => b.title = Some(value.to_string()),
            "valuedim" => b.value_dim = Some(parse_count(line_no, &key, value)?),
            "xnodes" => b.nodes[0] = Some(parse_count(line_no, &key, value)?),
            "ynodes" => b.nodes[1] = Some(parse_count(line_no, &key, value)?),
            "znodes" => b.nodes[2] = Some(parse_count(line_no, &key, value)?),
            "xstepsize" => b.steps[0] = Some(parse_float(line_no, &key, value, true)?),
            "ystepsize" => b.steps[1] = Some(parse_float(line_no, &key, value, true)?),
            "zstepsize" => b.steps[2] = Some(parse_float(line_no, &key, value, true)?),
            "xbase" => b.bases[0] = Some(parse_float(line_no, &key, value, false)?),
            "ybase" => b.bases[1] = Some(parse_float(line_no, &key, value, false)?),
            "zbase" => b.bases[2] = Some(parse_float(line_no, &key, value, false)?),
            "meshtype" => {
                if !value.eq_ignore_ascii_case("rectangular") {
                    return Err(OvfError::UnsupportedMeshType(value.to_string()));
                }
            }
            "desc" => {
                if b.total_sim_time.is_none() {
                    b.total_sim_time = scan_desc_for_time(value);
                }
            }
            "begin" => {
                let section = value.to_ascii_lowercase();
                if section.starts_with("data") {
                    let encoding = value["data".len()..].trim();
                    if encoding.eq_ignore_ascii_case("text") {
                        return b.finish();
                    }
                    return Err(OvfError::UnsupportedEncoding(value.to_string()));
                }
            }
            // Remaining keys (meshunit, valueunits, xmin/xmax, segment
            // count, end, ...) carry nothing the analyses need.
            _ => {}
        }
    }
}

/// Reads the header and the selected component of the data block. The two
/// unselected columns are skipped without being parsed or stored.
pub fn parse_component<R: BufRead>(
    reader: &mut R,
    component: Component,
) -> Result<ScalarSlab, OvfError> {
    let mut cursor = LineCursor::new(reader);
    let header = parse_header_at(&mut cursor)?;
    let expected = header.cell_count();
    let col = component.column();

    let mut values = Vec::with_capacity(expected);
    let mut tokens: usize = 0;
    loop {
        let line_no = cursor.line_no + 1;
        let line = match cursor.next_line()? {
            Some(l) => l,
            None => break,
        };
        let trimmed = line.trim();
        if let Some(body) = trimmed.strip_prefix('#') {
            let lower = body.trim().to_ascii_lowercase();
            if lower.starts_with("end") && lower.contains("data") {
                break;
            }
            return Err(OvfError::MalformedHeader {
                line: line_no,
                reason: format!("unexpected header line inside data block: {trimmed:?}"),
            });
        }
        for tok in trimmed.split_ascii_whitespace() {
            let record = tokens / 3;
            if tokens % 3 == col && record < expected {
                match tok.parse::<f64>() {
                    Ok(v) => values.push(v),
                    Err(_) => {
                        return Err(OvfError::NonNumericToken {
                            line: line_no,
                            token: tok.to_string(),
                        })
                    }
                }
            }
            tokens += 1;
        }
    }
    if tokens != expected * 3 {
        return Err(OvfError::DataCountMismatch { expected, got: tokens.div_ceil(3) });
    }

    // MuMax3 never writes more than one segment; if one shows up, only the
    // first is read and the rest is ignored with a warning.
    while let Some(line) = cursor.next_line()? {
        if line.trim().to_ascii_lowercase().starts_with("# begin:") {
            log::warn!("multi-segment OVF file: only the first segment was read");
            break;
        }
    }

    Ok(ScalarSlab { header, values })
}

/// Convenience wrapper over [`parse_component`] for a file on disk.
pub fn read_component(path: &Path, component: Component) -> Result<ScalarSlab, OvfError> {
    let file = File::open(path)?;
    let mut reader = BufReader::with_capacity(64 * 1024, file);
    parse_component(&mut reader, component)
}
