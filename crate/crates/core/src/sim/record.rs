use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::episode::Outcome;
use super::world::World;
use super::SimError;

pub const CSV_HEADER: [&str; 9] = [
    "t",
    "x",
    "y",
    "theta",
    "v_cmd",
    "omega_cmd",
    "keyframe_used",
    "c_term",
    "in_unreliable",
];

/// Round to 9 significant digits, the precision runs are logged at.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// One control cycle: pose at time `t`, the command issued there and what the
/// planner saw. Values are stored as logged (9 significant digits) so a
/// record and its CSV are interchangeable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v_cmd: f64,
    pub omega_cmd: f64,
    pub keyframe_used: bool,
    pub c_term: f64,
    pub in_unreliable: bool,
}

impl StepRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn logged(
        t: f64,
        x: f64,
        y: f64,
        theta: f64,
        v_cmd: f64,
        omega_cmd: f64,
        keyframe_used: bool,
        c_term: f64,
        in_unreliable: bool,
    ) -> Self {
        Self {
            t: round_sig(t),
            x: round_sig(x),
            y: round_sig(y),
            theta: round_sig(theta),
            v_cmd: round_sig(v_cmd),
            omega_cmd: round_sig(omega_cmd),
            keyframe_used,
            c_term: round_sig(c_term),
            in_unreliable,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub world_name: String,
    pub outcome: Outcome,
    pub steps: Vec<StepRecord>,
}

fn fmt_float(x: f64) -> String {
    format!("{}", round_sig(x))
}

fn fmt_flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Write the CSV header and one row per step, optionally preceded by a single
/// `# ...` comment line.
pub fn write_run<W: Write>(record: &RunRecord, out: W, comment: Option<&str>) -> io::Result<()> {
    let mut out = out;
    if let Some(c) = comment {
        writeln!(out, "# {}", c.replace('\n', " "))?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for s in &record.steps {
        w.write_record([
            fmt_float(s.t),
            fmt_float(s.x),
            fmt_float(s.y),
            fmt_float(s.theta),
            fmt_float(s.v_cmd),
            fmt_float(s.omega_cmd),
            fmt_flag(s.keyframe_used).to_string(),
            fmt_float(s.c_term),
            fmt_flag(s.in_unreliable).to_string(),
        ])?;
    }
    w.flush()
}

fn write_file(record: &RunRecord, path: &Path, comment: Option<&str>) -> Result<(), SimError> {
    let mut buf = Vec::new();
    write_run(record, &mut buf, comment).expect("writing to memory");
    fs::write(path, buf).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Header plus one row per step.
pub fn export_run(record: &RunRecord, path: &Path) -> Result<(), SimError> {
    write_file(record, path, None)
}

/// Like [`export_run`] with a leading `# comment` line.
pub fn export_run_with_comment(record: &RunRecord, path: &Path, comment: &str) -> Result<(), SimError> {
    write_file(record, path, Some(comment))
}

/// Steps read back from a run CSV, with any leading comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRun {
    pub comments: Vec<String>,
    pub steps: Vec<StepRecord>,
}

pub fn parse_run(text: &str, path: &Path) -> Result<ParsedRun, SimError> {
    let err = |message: String| SimError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let comments = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_string())
        .collect();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| err(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut steps = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| err(e.to_string()))?;
        let line = row.position().map_or(i + 2, |p| p.line() as usize);
        let float = |k: usize| -> Result<f64, SimError> {
            row[k]
                .parse()
                .map_err(|_| err(format!("line {line}: column {} is not a number: {:?}", CSV_HEADER[k], &row[k])))
        };
        let flag = |k: usize| match &row[k] {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(err(format!("line {line}: column {} must be 0 or 1, got {other:?}", CSV_HEADER[k]))),
        };
        steps.push(StepRecord {
            t: float(0)?,
            x: float(1)?,
            y: float(2)?,
            theta: float(3)?,
            v_cmd: float(4)?,
            omega_cmd: float(5)?,
            keyframe_used: flag(6)?,
            c_term: float(7)?,
            in_unreliable: flag(8)?,
        });
    }
    Ok(ParsedRun { comments, steps })
}

pub fn read_run(path: &Path) -> Result<ParsedRun, SimError> {
    let text = fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_run(&text, path)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub flight_distance: f64,
    /// Length of the segments whose midpoint falls on an unreliable label.
    pub unreliable_distance: f64,
}

pub fn compute_metrics(steps: &[StepRecord], world: &World) -> Metrics {
    let mut m = Metrics {
        flight_distance: 0.0,
        unreliable_distance: 0.0,
    };
    for pair in steps.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let len = (b.x - a.x).hypot(b.y - a.y);
        m.flight_distance += len;
        if world.is_unreliable(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)) {
            m.unreliable_distance += len;
        }
    }
    m
}
