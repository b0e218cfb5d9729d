//! Batch generation of MuMax3 input scripts from a declarative sweep
//! specification.
//!
//! The spec file is a sectioned plain-text format (see the repository
//! README for the full grammar and a worked example). Mesh node counts may
//! sweep over ranges; geometry, region and parameter bodies may use the
//! whole-word tokens "x", "y", "z" for the node counts; the excitation
//! body uses "amp" and "f" for the swept amplitude and frequency. One
//! script is written per point of the Cartesian product, named
//! `<base>_<nx>_<ny>_<nz>_<amp>_<f>.txt` with the numeric fields rendered
//! like C's "%.1e".

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Node counts along one axis: start, start+step, ..., up to and including
/// end where the step lands on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisSweep {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl AxisSweep {
    pub fn fixed(n: usize) -> AxisSweep {
        AxisSweep { start: n, end: n, step: 1 }
    }

    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step).collect()
    }

    pub fn len(&self) -> usize {
        (self.end - self.start) / self.step + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshMode {
    Fixed,
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub mode: MeshMode,
    /// Per-axis node counts; in fixed mode each axis is a single value.
    pub nodes: [AxisSweep; 3],
    /// Cell size per axis in meters.
    pub cell: [f64; 3],
    /// Periodic-boundary repetition counts per axis.
    pub pbc: [u32; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitationKind {
    Field,
    Current,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSpec {
    pub kind: ExcitationKind,
    /// MuMax3 vector expression containing the whole-word tokens "amp"
    /// and "f", e.g. "vector(0, amp*sinc(2*pi*f*t), 0)".
    pub function: String,
    pub amp_values: Vec<f64>,
    pub freq_values: Vec<f64>,
    /// Optional extra MuMax3 call emitted after the excitation line; also
    /// subject to amp/f substitution.
    pub method: Option<String>,
    /// Region index the excitation applies to; absent means global.
    pub region: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Mesh,
    Geometry,
    Regions,
    Parameters,
    InitialM,
    Excitation,
    Misc,
    Output,
    Run,
}

impl BlockKind {
    /// Which substitution the block's body receives.
    fn tokens(self) -> TokenSet {
        match self {
            BlockKind::Mesh | BlockKind::Geometry | BlockKind::Regions | BlockKind::Parameters => {
                TokenSet::Nodes
            }
            BlockKind::Excitation => TokenSet::Excitation,
            _ => TokenSet::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokenSet {
    Nodes,
    Excitation,
    None,
}

/// Ordered script blocks with substitutable tokens still in place.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptTemplate {
    pub blocks: Vec<(BlockKind, String)>,
}

/// A fully parsed sweep specification.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Filename stem for generated scripts.
    pub base: String,
    pub mesh: MeshSpec,
    pub excitation: ExcitationSpec,
    pub template: ScriptTemplate,
}

/// One point of the expanded sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub amp: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScript {
    pub filename: String,
    pub content: String,
}

#[derive(Debug)]
pub enum ScriptGenError {
    Io { path: PathBuf, source: io::Error },
    /// Spec file problem; line 0 means the file as a whole.
    Parse { line: usize, msg: String },
    EmptySweep(&'static str),
    WouldOverwrite { path: PathBuf },
}

impl fmt::Display for ScriptGenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScriptGenError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            ScriptGenError::Parse { line: 0, msg } => write!(f, "spec: {msg}"),
            ScriptGenError::Parse { line, msg } => write!(f, "spec line {line}: {msg}"),
            ScriptGenError::EmptySweep(what) => {
                write!(f, "EmptySweep: the {what} value list is empty")
            }
            ScriptGenError::WouldOverwrite { path } => {
                write!(f, "{} already exists (pass --force to overwrite)", path.display())
            }
        }
    }
}

impl std::error::Error for ScriptGenError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ScriptGenError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Renders a float the way C's "%.1e" does: one fractional digit, explicit
/// exponent sign, at least two exponent digits. 1.0 becomes "1.0e+00", 1e11
/// becomes "1.0e+11".
pub fn format_sci(v: f64) -> String {
    let s = format!("{v:.1e}");
    let (mut mantissa, exp) = s.split_once('e').expect("{:e} always has an exponent");
    let mut exp: i32 = exp.parse().expect("exponent is an integer");
    // {:.1e} rounds the mantissa after normalizing, so 9.96e10 can surface
    // as "10.0e10"; fold the carry into the exponent.
    let carried;
    if let Some(rest) = mantissa.strip_prefix("10.") {
        carried = format!("1.{rest}");
        mantissa = &carried;
        exp += 1;
    } else if let Some(rest) = mantissa.strip_prefix("-10.") {
        carried = format!("-1.{rest}");
        mantissa = &carried;
        exp += 1;
    }
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Replaces whole-word occurrences of the mapped tokens, where a word is a
/// maximal run of identifier characters [A-Za-z0-9_].
fn replace_whole_words(text: &str, map: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let is_word = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut i = 0;
    while i < bytes.len() {
        if is_word(bytes[i]) {
            let start = i;
            while i < bytes.len() && is_word(bytes[i]) {
                i += 1;
            }
            let word = &text[start..i];
            match map.iter().find(|(token, _)| *token == word) {
                Some((_, replacement)) => out.push_str(replacement),
                None => out.push_str(word),
            }
        } else {
            // Multi-byte UTF-8 sequences have no ASCII-range bytes, so
            // advancing byte-wise here stays on char boundaries.
            let ch_len = text[i..].chars().next().map(char::len_utf8).unwrap_or(1);
            out.push_str(&text[i..i + ch_len]);
            i += ch_len;
        }
    }
    out
}

/// Cartesian sweep expansion in lexicographic order: nx outermost, then ny,
/// nz, amplitude, frequency innermost.
pub fn expand_sweep(
    mesh: &MeshSpec,
    excitation: &ExcitationSpec,
) -> Result<Vec<SweepPoint>, ScriptGenError> {
    if excitation.amp_values.is_empty() {
        return Err(ScriptGenError::EmptySweep("amp"));
    }
    if excitation.freq_values.is_empty() {
        return Err(ScriptGenError::EmptySweep("f"));
    }
    let [xs, ys, zs] = &mesh.nodes;
    let mut points = Vec::with_capacity(
        xs.len() * ys.len() * zs.len() * excitation.amp_values.len()
            * excitation.freq_values.len(),
    );
    for nx in xs.values() {
        for ny in ys.values() {
            for nz in zs.values() {
                for &amp in &excitation.amp_values {
                    for &f in &excitation.freq_values {
                        points.push(SweepPoint { nx, ny, nz, amp, f });
                    }
                }
            }
        }
    }
    Ok(points)
}

/// Applies the point's values to every block and joins the blocks with
/// blank lines into one MuMax3 script.
pub fn substitute(template: &ScriptTemplate, point: &SweepPoint) -> String {
    let nx = point.nx.to_string();
    let ny = point.ny.to_string();
    let nz = point.nz.to_string();
    let amp = format_sci(point.amp);
    let f = format_sci(point.f);
    let mut parts: Vec<String> = Vec::with_capacity(template.blocks.len());
    for (kind, body) in &template.blocks {
        let rendered = match kind.tokens() {
            TokenSet::Nodes => {
                replace_whole_words(body, &[("x", &nx), ("y", &ny), ("z", &nz)])
            }
            TokenSet::Excitation => replace_whole_words(body, &[("amp", &amp), ("f", &f)]),
            TokenSet::None => body.clone(),
        };
        let trimmed = rendered.trim_end().to_string();
        if !trimmed.is_empty() {
            parts.push(trimmed);
        }
    }
    let mut script = parts.join("\n\n");
    script.push('\n');
    script
}

/// Filename for one sweep point: `<base>_<nx>_<ny>_<nz>_<amp>_<f>.txt` with
/// amp and f rendered like "%.1e".
pub fn make_filename(base: &str, point: &SweepPoint) -> String {
    format!(
        "{base}_{}_{}_{}_{}_{}.txt",
        point.nx,
        point.ny,
        point.nz,
        format_sci(point.amp),
        format_sci(point.f)
    )
}

/// Expands the sweep and renders every script in memory, warning once per
/// token that sweeps over multiple values without appearing in any body.
pub fn render_all(spec: &SweepSpec) -> Result<Vec<GeneratedScript>, ScriptGenError> {
    let points = expand_sweep(&spec.mesh, &spec.excitation)?;
    warn_unbound_tokens(spec);
    Ok(points
        .iter()
        .map(|point| GeneratedScript {
            filename: make_filename(&spec.base, point),
            content: substitute(&spec.template, point),
        })
        .collect())
}

fn contains_whole_word(template: &ScriptTemplate, token_set: TokenSet, token: &str) -> bool {
    let marker = "\u{1}";
    template.blocks.iter().filter(|(kind, _)| kind.tokens() == token_set).any(|(_, body)| {
        replace_whole_words(body, &[(token, marker)]).contains(marker)
    })
}

fn warn_unbound_tokens(spec: &SweepSpec) {
    let multi_axis = [
        ("x", spec.mesh.nodes[0].len() > 1),
        ("y", spec.mesh.nodes[1].len() > 1),
        ("z", spec.mesh.nodes[2].len() > 1),
    ];
    for (token, multi) in multi_axis {
        if multi && !contains_whole_word(&spec.template, TokenSet::Nodes, token) {
            log::warn!("token {token:?} sweeps over several values but appears in no body");
        }
    }
    let multi_exc = [
        ("amp", spec.excitation.amp_values.len() > 1),
        ("f", spec.excitation.freq_values.len() > 1),
    ];
    for (token, multi) in multi_exc {
        if multi && !contains_whole_word(&spec.template, TokenSet::Excitation, token) {
            log::warn!("token {token:?} sweeps over several values but appears in no body");
        }
    }
}

/// Parses a spec file, expands the sweep, and writes one script per point
/// into `out_dir` (created if needed). Existing files are refused unless
/// `force` is set, and the check runs before anything is written. Writes go
/// to a temporary file first and are renamed into place.
pub fn generate(spec_path: &Path, out_dir: &Path, force: bool) -> Result<usize, ScriptGenError> {
    let spec = load_spec(spec_path)?;
    let scripts = render_all(&spec)?;
    fs::create_dir_all(out_dir)
        .map_err(|source| ScriptGenError::Io { path: out_dir.to_path_buf(), source })?;
    if !force {
        for script in &scripts {
            let target = out_dir.join(&script.filename);
            if target.exists() {
                return Err(ScriptGenError::WouldOverwrite { path: target });
            }
        }
    }
    for script in &scripts {
        let target = out_dir.join(&script.filename);
        let tmp = out_dir.join(format!("{}.tmp", script.filename));
        fs::write(&tmp, &script.content)
            .map_err(|source| ScriptGenError::Io { path: tmp.clone(), source })?;
        fs::rename(&tmp, &target)
            .map_err(|source| ScriptGenError::Io { path: target.clone(), source })?;
    }
    Ok(scripts.len())
}

/// Reads and parses a spec file.
pub fn load_spec(path: &Path) -> Result<SweepSpec, ScriptGenError> {
    let text = fs::read_to_string(path)
        .map_err(|source| ScriptGenError::Io { path: path.to_path_buf(), source })?;
    parse_spec(&text)
}

const SECTIONS: [&str; 10] = [
    "name",
    "mesh",
    "geometry",
    "regions",
    "parameters",
    "initial_m",
    "excitation",
    "misc",
    "output",
    "run",
];

struct RawSection {
    header_line: usize,
    lines: Vec<(usize, String)>,
}

/// Parses the sectioned key-value spec format. See the README for the
/// grammar; errors carry 1-based line numbers.
pub fn parse_spec(text: &str) -> Result<SweepSpec, ScriptGenError> {
    let mut sections: Vec<(String, RawSection)> = Vec::new();
    let mut current: Option<usize> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|rest| rest.strip_suffix(']')) {
            let name = name.trim().to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ScriptGenError::Parse {
                    line: line_no,
                    msg: format!("unknown section [{name}]"),
                });
            }
            if sections.iter().any(|(n, _)| *n == name) {
                return Err(ScriptGenError::Parse {
                    line: line_no,
                    msg: format!("duplicate section [{name}]"),
                });
            }
            sections.push((name, RawSection { header_line: line_no, lines: Vec::new() }));
            current = Some(sections.len() - 1);
            continue;
        }
        match current {
            Some(i) => sections[i].1.lines.push((line_no, raw_line.trim_end().to_string())),
            None => {
                return Err(ScriptGenError::Parse {
                    line: line_no,
                    msg: "content before the first [section] header".to_string(),
                })
            }
        }
    }

    let find = |name: &str| sections.iter().find(|(n, _)| n == name).map(|(_, s)| s);

    let base = parse_name(find("name"))?;
    let mesh = parse_mesh(find("mesh"))?;
    let excitation = parse_excitation(find("excitation"))?;

    let mut blocks: Vec<(BlockKind, String)> = Vec::new();
    blocks.push((BlockKind::Mesh, mesh_body(&mesh)));
    let raw_body = |name: &str| -> String {
        find(name)
            .map(|s| s.lines.iter().map(|(_, l)| l.as_str()).collect::<Vec<_>>().join("\n"))
            .unwrap_or_default()
    };
    blocks.push((BlockKind::Geometry, raw_body("geometry")));
    blocks.push((BlockKind::Regions, number_regions(&raw_body("regions"))));
    blocks.push((BlockKind::Parameters, raw_body("parameters")));
    blocks.push((BlockKind::InitialM, raw_body("initial_m")));
    blocks.push((BlockKind::Excitation, excitation_body(&excitation)));
    blocks.push((BlockKind::Misc, raw_body("misc")));
    blocks.push((BlockKind::Output, output_body(find("output"))?));
    blocks.push((BlockKind::Run, raw_body("run")));

    Ok(SweepSpec { base, mesh, excitation, template: ScriptTemplate { blocks } })
}

fn parse_name(section: Option<&RawSection>) -> Result<String, ScriptGenError> {
    let section = section.ok_or(ScriptGenError::Parse {
        line: 0,
        msg: "missing [name] section with the output filename stem".to_string(),
    })?;
    match section.lines.as_slice() {
        [(line, name)] => {
            let name = name.trim();
            if name.is_empty()
                || name.chars().any(|c| c.is_whitespace() || c == '/' || c == '\\' || c.is_control())
            {
                return Err(ScriptGenError::Parse {
                    line: *line,
                    msg: format!("{name:?} is not a usable filename stem"),
                });
            }
            Ok(name.to_string())
        }
        [] => Err(ScriptGenError::Parse {
            line: section.header_line,
            msg: "[name] must hold exactly one line, the filename stem".to_string(),
        }),
        [_, (line, _), ..] => Err(ScriptGenError::Parse {
            line: *line,
            msg: "[name] must hold exactly one line, the filename stem".to_string(),
        }),
    }
}

/// Splits "key = value" lines and rejects anything else or any key outside
/// `allowed`.
fn key_values<'a>(
    section: &'a RawSection,
    allowed: &[&str],
) -> Result<Vec<(usize, String, &'a str)>, ScriptGenError> {
    let mut out = Vec::with_capacity(section.lines.len());
    for (line, text) in &section.lines {
        let (key, value) = text.split_once('=').ok_or(ScriptGenError::Parse {
            line: *line,
            msg: format!("expected \"key = value\", got {:?}", text.trim()),
        })?;
        let key = key.trim().to_ascii_lowercase();
        if !allowed.contains(&key.as_str()) {
            return Err(ScriptGenError::Parse {
                line: *line,
                msg: format!("unknown key {key:?} (allowed: {})", allowed.join(", ")),
            });
        }
        if out.iter().any(|(_, k, _)| *k == key) {
            return Err(ScriptGenError::Parse { line: *line, msg: format!("duplicate key {key:?}") });
        }
        out.push((*line, key, value.trim()));
    }
    Ok(out)
}

fn parse_axis(line: usize, axis: &str, value: &str, mode: MeshMode) -> Result<AxisSweep, ScriptGenError> {
    let err = |msg: String| ScriptGenError::Parse { line, msg };
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    let parse_one = |s: &str| -> Result<usize, ScriptGenError> {
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(err(format!("{axis} node count {s:?} is not a positive integer"))),
        }
    };
    match parts.as_slice() {
        [single] => Ok(AxisSweep::fixed(parse_one(single)?)),
        [start, end, step] => {
            if mode == MeshMode::Fixed {
                return Err(err(format!(
                    "{axis} gives a sweep range but the mesh mode is fixed"
                )));
            }
            let sweep = AxisSweep {
                start: parse_one(start)?,
                end: parse_one(end)?,
                step: parse_one(step)?,
            };
            if sweep.start > sweep.end {
                return Err(err(format!("{axis} range start {} exceeds end {}", sweep.start, sweep.end)));
            }
            Ok(sweep)
        }
        _ => Err(err(format!("{axis} must be a single count or start:end:step, got {value:?}"))),
    }
}

fn parse_mesh(section: Option<&RawSection>) -> Result<MeshSpec, ScriptGenError> {
    let section = section.ok_or(ScriptGenError::Parse {
        line: 0,
        msg: "missing [mesh] section".to_string(),
    })?;
    let kvs = key_values(section, &["mode", "nx", "ny", "nz", "cell", "pbc"])?;
    let get = |key: &str| kvs.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, *v));
    let require = |key: &str| -> Result<(usize, &str), ScriptGenError> {
        get(key).ok_or(ScriptGenError::Parse {
            line: section.header_line,
            msg: format!("[mesh] is missing the {key:?} key"),
        })
    };

    let mode = match get("mode") {
        None => MeshMode::Fixed,
        Some((_, "fixed")) => MeshMode::Fixed,
        Some((_, "sweep")) => MeshMode::Sweep,
        Some((line, other)) => {
            return Err(ScriptGenError::Parse {
                line,
                msg: format!("mesh mode {other:?} is neither \"fixed\" nor \"sweep\""),
            })
        }
    };

    let mut nodes = [AxisSweep::fixed(1); 3];
    for (i, axis) in ["nx", "ny", "nz"].iter().enumerate() {
        let (line, value) = require(axis)?;
        nodes[i] = parse_axis(line, axis, value, mode)?;
    }

    let (cell_line, cell_text) = require("cell")?;
    let cell_fields: Vec<&str> = cell_text.split_whitespace().collect();
    if cell_fields.len() != 3 {
        return Err(ScriptGenError::Parse {
            line: cell_line,
            msg: format!("cell needs three sizes in meters, got {cell_text:?}"),
        });
    }
    let mut cell = [0.0f64; 3];
    for (i, field) in cell_fields.iter().enumerate() {
        cell[i] = match field.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => v,
            _ => {
                return Err(ScriptGenError::Parse {
                    line: cell_line,
                    msg: format!("cell size {field:?} is not a positive number"),
                })
            }
        };
    }

    let mut pbc = [0u32; 3];
    if let Some((line, text)) = get("pbc") {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(ScriptGenError::Parse {
                line,
                msg: format!("pbc needs three repetition counts, got {text:?}"),
            });
        }
        for (i, field) in fields.iter().enumerate() {
            pbc[i] = field.parse::<u32>().map_err(|_| ScriptGenError::Parse {
                line,
                msg: format!("pbc count {field:?} is not a non-negative integer"),
            })?;
        }
    }

    Ok(MeshSpec { mode, nodes, cell, pbc })
}

fn parse_excitation(section: Option<&RawSection>) -> Result<ExcitationSpec, ScriptGenError> {
    let section = match section {
        Some(s) => s,
        // No excitation section means nothing to sweep; surfaces as
        // EmptySweep at expansion.
        None => {
            return Ok(ExcitationSpec {
                kind: ExcitationKind::Field,
                function: String::new(),
                amp_values: Vec::new(),
                freq_values: Vec::new(),
                method: None,
                region: None,
            })
        }
    };
    let kvs = key_values(section, &["kind", "function", "amp", "f", "method", "region"])?;
    let get = |key: &str| kvs.iter().find(|(_, k, _)| k == key).map(|(l, _, v)| (*l, *v));

    let kind = match get("kind") {
        None => ExcitationKind::Field,
        Some((_, "field")) => ExcitationKind::Field,
        Some((_, "current")) => ExcitationKind::Current,
        Some((line, other)) => {
            return Err(ScriptGenError::Parse {
                line,
                msg: format!("excitation kind {other:?} is neither \"field\" nor \"current\""),
            })
        }
    };
    let function = match get("function") {
        Some((_, v)) if !v.is_empty() => v.to_string(),
        Some((line, _)) => {
            return Err(ScriptGenError::Parse { line, msg: "function is empty".to_string() })
        }
        None => {
            return Err(ScriptGenError::Parse {
                line: section.header_line,
                msg: "[excitation] is missing the \"function\" key".to_string(),
            })
        }
    };
    let parse_list = |key: &str| -> Result<Vec<f64>, ScriptGenError> {
        match get(key) {
            None => Ok(Vec::new()),
            Some((line, text)) => text
                .replace(',', " ")
                .split_whitespace()
                .map(|field| {
                    field.parse::<f64>().map_err(|_| ScriptGenError::Parse {
                        line,
                        msg: format!("{key} value {field:?} is not a number"),
                    })
                })
                .collect(),
        }
    };
    let amp_values = parse_list("amp")?;
    let freq_values = parse_list("f")?;
    let method = get("method").map(|(_, v)| v.to_string());
    let region = match get("region") {
        None => None,
        Some((line, text)) => Some(text.parse::<usize>().map_err(|_| ScriptGenError::Parse {
            line,
            msg: format!("region {text:?} is not a non-negative integer"),
        })?),
    };
    Ok(ExcitationSpec { kind, function, amp_values, freq_values, method, region })
}

/// Mesh block body with the node counts still as substitutable tokens.
fn mesh_body(mesh: &MeshSpec) -> String {
    format!(
        "SetPBC({}, {}, {})\nSetGridSize(x, y, z)\nSetCellSize({:e}, {:e}, {:e})",
        mesh.pbc[0], mesh.pbc[1], mesh.pbc[2], mesh.cell[0], mesh.cell[1], mesh.cell[2]
    )
}

fn excitation_body(exc: &ExcitationSpec) -> String {
    if exc.function.is_empty() {
        return String::new();
    }
    let target = match exc.kind {
        ExcitationKind::Field => "B_ext",
        ExcitationKind::Current => "J",
    };
    let mut body = match exc.region {
        Some(region) => format!("{target}.SetRegion({region}, {})", exc.function),
        None => format!("{target} = {}", exc.function),
    };
    if let Some(method) = &exc.method {
        body.push('\n');
        body.push_str(method);
    }
    body
}

fn output_body(section: Option<&RawSection>) -> Result<String, ScriptGenError> {
    let section = match section {
        Some(s) => s,
        None => return Ok(String::new()),
    };
    let mut format_line: Option<String> = None;
    let mut rest = Vec::new();
    for (line, text) in &section.lines {
        let is_format_key = text
            .split_once('=')
            .map(|(k, _)| k.trim().eq_ignore_ascii_case("format"))
            .unwrap_or(false);
        if is_format_key {
            let value = text.split_once('=').unwrap().1.trim();
            if value.is_empty() {
                return Err(ScriptGenError::Parse {
                    line: *line,
                    msg: "output format value is empty".to_string(),
                });
            }
            format_line = Some(format!("OutputFormat = {value}"));
        } else {
            rest.push(text.clone());
        }
    }
    let mut lines = Vec::new();
    if let Some(f) = format_line {
        lines.push(f);
    }
    lines.extend(rest);
    Ok(lines.join("\n"))
}

/// Gives each region line holding a "%d" slot the next index, starting at 1.
fn number_regions(body: &str) -> String {
    let mut index = 0usize;
    body.lines()
        .map(|line| {
            if line.contains("%d") {
                index += 1;
                line.replace("%d", &index.to_string())
            } else {
                line.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}
