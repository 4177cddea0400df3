//! On-disk formats: surface files, key=value reports and check CSVs.
//!
//! A surface file is a text header of `key=value` lines closed by
//! `end_header`, followed by the samples of `f` in row-major node order,
//! either one decimal per line or as little-endian doubles. Reports are
//! `[section]` blocks of `key=value` lines. Reals are written with 17
//! significant digits, which round-trips every double.

use crate::centering::CenteringResult;
use crate::geometry::RadialSurface;
use crate::harness::{CheckRow, ExperimentResult};
use crate::rigidity::{AdmissibilityReport, RigidityReport};
use crate::spectral::{ScalarField, SphereGrid};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

pub const FORMAT_VERSION: u32 = 1;
const END_HEADER: &str = "end_header";

/// Formats a real with 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn reals(xs: &[f64]) -> String {
    xs.iter().map(|&x| real(x)).collect::<Vec<_>>().join(",")
}

/// `32x64` style shape tag.
pub fn shape_string(shape: &[usize]) -> String {
    shape
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

/// Parses `32x64` or `32,64`.
pub fn parse_shape(s: &str) -> Result<Vec<usize>> {
    s.split(['x', ','])
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad shape `{s}`")))
        })
        .collect()
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Text,
    Binary,
}

impl Encoding {
    pub fn name(self) -> &'static str {
        match self {
            Encoding::Text => "text",
            Encoding::Binary => "binary",
        }
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Encoding::Text),
            "binary" => Ok(Encoding::Binary),
            _ => Err(Error::Parse(format!("unknown encoding `{s}`"))),
        }
    }
}

/// Serializes a surface.
pub fn encode_surface(surface: &RadialSurface, encoding: Encoding) -> Vec<u8> {
    let grid = surface.grid();
    let mut head = String::new();
    let _ = writeln!(head, "format_version={FORMAT_VERSION}");
    let _ = writeln!(head, "n={}", grid.n());
    let _ = writeln!(head, "shape={}", shape_string(grid.shape()));
    let _ = writeln!(head, "provenance={}", one_line(surface.provenance()));
    let _ = writeln!(head, "encoding={}", encoding.name());
    let _ = writeln!(head, "{END_HEADER}");
    let mut out = head.into_bytes();
    match encoding {
        Encoding::Text => {
            for &v in surface.f().values() {
                out.extend_from_slice(real(v).as_bytes());
                out.push(b'\n');
            }
        }
        Encoding::Binary => {
            for &v in surface.f().values() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

/// Parses a serialized surface.
pub fn decode_surface(bytes: &[u8]) -> Result<RadialSurface> {
    let marker = format!("\n{END_HEADER}\n");
    let split = bytes
        .windows(marker.len())
        .position(|w| w == marker.as_bytes())
        .ok_or_else(|| Error::Parse("missing end_header".into()))?;
    let header = std::str::from_utf8(&bytes[..split])
        .map_err(|_| Error::Parse("header is not UTF-8".into()))?;
    let payload = &bytes[split + marker.len()..];

    let mut version = None;
    let mut n = None;
    let mut shape = None;
    let mut provenance = String::new();
    let mut encoding = None;
    for line in header.lines() {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header line `{line}`")))?;
        match key {
            "format_version" => {
                version = Some(
                    value
                        .parse::<u32>()
                        .map_err(|_| Error::Parse("bad format_version".into()))?,
                )
            }
            "n" => {
                n = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| Error::Parse("bad n".into()))?,
                )
            }
            "shape" => shape = Some(parse_shape(value)?),
            "provenance" => provenance = value.to_string(),
            "encoding" => encoding = Some(value.parse::<Encoding>()?),
            _ => return Err(Error::Parse(format!("unknown header key `{key}`"))),
        }
    }
    match version {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(Error::Parse(format!("unsupported format_version {v}"))),
        None => return Err(Error::Parse("missing format_version".into())),
    }
    let n = n.ok_or_else(|| Error::Parse("missing n".into()))?;
    let shape = shape.ok_or_else(|| Error::Parse("missing shape".into()))?;
    let encoding = encoding.ok_or_else(|| Error::Parse("missing encoding".into()))?;
    let grid = SphereGrid::new(n, &shape).map_err(|e| Error::Parse(e.to_string()))?;

    let values: Vec<f64> = match encoding {
        Encoding::Text => std::str::from_utf8(payload)
            .map_err(|_| Error::Parse("payload is not UTF-8".into()))?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value `{l}`")))
            })
            .collect::<Result<_>>()?,
        Encoding::Binary => {
            if payload.len() % 8 != 0 {
                return Err(Error::Parse(
                    "binary payload is not a whole number of doubles".into(),
                ));
            }
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect()
        }
    };
    if values.len() != grid.len() {
        return Err(Error::Parse(format!(
            "expected {} values for shape {}, found {}",
            grid.len(),
            shape_string(&shape),
            values.len()
        )));
    }
    let f = ScalarField::new(grid, values).map_err(|e| Error::Parse(e.to_string()))?;
    RadialSurface::new(f, provenance).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_surface(path: &Path, surface: &RadialSurface, encoding: Encoding) -> Result<()> {
    write_atomic(path, &encode_surface(surface, encoding))
}

pub fn read_surface(path: &Path) -> Result<RadialSurface> {
    decode_surface(&std::fs::read(path)?)
}

/// A report under construction: ordered `[section]`s of `key=value` lines.
#[derive(Debug, Clone, Default)]
pub struct Report {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Report {
    pub fn new() -> Self {
        let mut r = Report::default();
        r.section("report").entry("format_version", FORMAT_VERSION);
        r
    }

    /// Starts a new section; later entries go into it.
    pub fn section(&mut self, name: &str) -> &mut Self {
        self.sections.push((name.to_string(), Vec::new()));
        self
    }

    pub fn entry(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let last = self.sections.last_mut().expect("a section is open");
        last.1.push((key.to_string(), one_line(&value.to_string())));
        self
    }

    pub fn real(&mut self, key: &str, value: f64) -> &mut Self {
        self.entry(key, real(value))
    }

    pub fn reals(&mut self, key: &str, values: &[f64]) -> &mut Self {
        self.entry(key, reals(values))
    }

    /// Value of `key` in `section`, if present.
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .filter(|(s, _)| s == section)
            .flat_map(|(_, e)| e.iter())
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// The report text, or only the part before `[timing]` when `with_timing` is false.
    pub fn render(&self, with_timing: bool) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            if !with_timing && name == "timing" {
                continue;
            }
            let _ = writeln!(out, "[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k}={v}");
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.render(true)
    }

    /// Parses text produced by [`Report::to_text`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Report::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                r.sections.push((name.to_string(), Vec::new()));
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad report line `{line}`")))?;
            let last = r
                .sections
                .last_mut()
                .ok_or_else(|| Error::Parse("entry before first section".into()))?;
            last.1.push((k.to_string(), v.to_string()));
        }
        Ok(r)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

fn admissibility_section(r: &mut Report, a: &AdmissibilityReport) {
    r.section("admissibility")
        .real("p", a.p)
        .real("delta", a.delta)
        .real("epsilon", a.epsilon)
        .entry("is_convex", a.is_convex)
        .real("min_curvature", a.min_curvature)
        .real("volume_gap", a.volume_gap)
        .real("a_ring_norm", a.a_ring_norm)
        .real("sup_f", a.sup_f)
        .real("sup_grad_f", a.sup_grad_f)
        .real("osc_f", a.osc_f)
        .entry("epsilon_bounds_hold", a.epsilon_bounds_hold)
        .entry("is_admissible", a.is_admissible);
}

fn centering_section(r: &mut Report, c: &CenteringResult) {
    r.section("centering")
        .reals("c0", &c.c0)
        .entry("iterations", c.iterations)
        .real("residual", c.residual)
        .entry("converged", c.converged)
        .entry("jacobian_refreshes", c.jacobian_refreshes);
}

fn rigidity_section(r: &mut Report, g: &RigidityReport) {
    r.section("rigidity")
        .real("p", g.p)
        .real("epsilon", g.epsilon)
        .real("lambda_star", g.lambda_star)
        .real("min_norm", g.min_norm)
        .real("h_bar", g.h_bar)
        .real("hbar_norm", g.hbar_norm)
        .real("a_ring_norm", g.a_ring_norm)
        .real("codazzi_residual", g.codazzi_residual)
        .real("constant_factor", g.constant_factor)
        .real("linearized_residual", g.linearized_residual)
        .reals("v_f", &g.v_f)
        .real("w2p_distance", g.w2p_distance)
        .real("sqrt_eps_w2p", g.sqrt_eps_w2p)
        .real("ratio", g.ratio)
        .entry("degenerate", g.degenerate)
        .entry("admissible", g.admissible);
}

/// The report of a full pipeline run; stages that did not run are marked `present=false`.
pub fn experiment_report(result: &ExperimentResult) -> Report {
    let mut r = Report::new();
    let c = &result.config;
    r.section("surface")
        .entry("provenance", &result.provenance)
        .entry("n", result.n)
        .entry("shape", shape_string(&result.shape));
    r.section("config")
        .real("p", c.p)
        .real("delta", c.delta)
        .entry(
            "epsilon_requested",
            c.epsilon.map_or("default".to_string(), real),
        )
        .real("phi_tol", c.phi_tol)
        .entry("max_iter", c.max_iter);
    r.section("normalization").real("epsilon", result.epsilon);
    match &result.admissibility {
        Some(a) => admissibility_section(&mut r, a),
        None => {
            r.section("admissibility").entry("present", false);
        }
    }
    match &result.centering {
        Some(cr) => centering_section(&mut r, cr),
        None => {
            r.section("centering").entry("present", false);
        }
    }
    match &result.rigidity {
        Some(g) => rigidity_section(&mut r, g),
        None => {
            r.section("rigidity").entry("present", false);
        }
    }
    r.section("failures").entry("count", result.failures.len());
    for (stage, msg) in &result.failures {
        r.entry(stage.name(), msg);
    }
    let t = &result.timing;
    r.section("timing")
        .real("normalize", t.normalize)
        .real("admissibility", t.admissibility)
        .real("centering", t.centering)
        .real("stability", t.stability);
    r
}

/// The report of a standalone centering run.
pub fn centering_report(provenance: &str, result: &CenteringResult, seconds: f64) -> Report {
    let mut r = Report::new();
    let grid = result.recentred.grid();
    r.section("surface")
        .entry("provenance", provenance)
        .entry("n", grid.n())
        .entry("shape", shape_string(grid.shape()));
    centering_section(&mut r, result);
    r.section("timing").real("centering", seconds);
    r
}

/// Check rows as CSV with header `name,value,threshold,pass`.
pub fn checks_csv(rows: &[CheckRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "value", "threshold", "pass"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        w.write_record([
            row.name.clone(),
            real(row.value),
            real(row.threshold),
            row.pass.to_string(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_checks_csv(path: &Path, rows: &[CheckRow]) -> Result<()> {
    write_atomic(path, &checks_csv(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RadialSurface {
        let grid = SphereGrid::new(2, &[6, 12]).unwrap();
        let f = ScalarField::from_fn(grid, |x| 0.1 * x[0] + 0.03 * x[2] * x[2] + 1.0 / 3.0);
        RadialSurface::new(f, "sample\nwith newline").unwrap()
    }

    #[test]
    fn both_encodings_round_trip_exactly() {
        let s = sample();
        for enc in [Encoding::Text, Encoding::Binary] {
            let back = decode_surface(&encode_surface(&s, enc)).unwrap();
            assert_eq!(back.f().values(), s.f().values());
            assert_eq!(back.grid().shape(), s.grid().shape());
            assert_eq!(back.provenance(), "sample with newline");
        }
    }

    #[test]
    fn damaged_files_are_rejected() {
        let s = sample();
        let mut bytes = encode_surface(&s, Encoding::Binary);
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(decode_surface(&bytes), Err(Error::Parse(_))));
        let text = String::from_utf8(encode_surface(&s, Encoding::Text)).unwrap();
        let bad = text.replace("format_version=1", "format_version=9");
        assert!(matches!(
            decode_surface(bad.as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(decode_surface(b"garbage"), Err(Error::Parse(_))));
    }

    #[test]
    fn reports_parse_back() {
        let mut r = Report::new();
        r.section("x").real("a", 0.1).entry("b", true);
        r.section("timing").real("t", 1.5);
        let back = Report::parse(&r.to_text()).unwrap();
        assert_eq!(back.get("x", "a").unwrap().parse::<f64>().unwrap(), 0.1);
        assert_eq!(back.render(false), r.render(false));
        assert!(!r.render(false).contains("timing"));
    }

    #[test]
    fn csv_has_fixed_header() {
        let rows = vec![
            CheckRow::at_most("a", 0.5, 1.0),
            CheckRow::finite("b", f64::NAN),
        ];
        let text = String::from_utf8(checks_csv(&rows).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "name,value,threshold,pass");
        assert_eq!(
            lines[1],
            "a,5.0000000000000000e-1,1.0000000000000000e0,true"
        );
        assert_eq!(lines[2], "b,NaN,inf,false");
    }
}
