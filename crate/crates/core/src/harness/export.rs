use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::plant::GainSchedule;

use super::scenario::SimulationLog;

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: usize,
    pub x: Vec<f64>,
    pub u_a: Vec<f64>,
    pub u_m: Vec<f64>,
    pub h: Vec<f64>,
    pub v_m: f64,
    pub generation: usize,
    pub events: Vec<String>,
}

fn channel_names(prefix: &str, count: usize, scalar: bool) -> Vec<String> {
    if scalar {
        vec![prefix.to_string()]
    } else {
        (0..count).map(|i| format!("{prefix}{i}")).collect()
    }
}

fn header(d: usize, m: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..d).map(|i| format!("x{i}")));
    for p in ["u_a", "u_m", "h"] {
        cols.extend(channel_names(p, m, m == 1));
    }
    cols.extend(["V_m", "generation", "events"].map(String::from));
    cols
}

fn dims(log: &SimulationLog) -> (usize, usize) {
    match log.trace.records.first() {
        Some(r) => (r.x.len(), r.u_a.len()),
        None => (log.final_state.len(), 1),
    }
}

/// Rows as they appear in the CSV.
pub fn csv_rows(log: &SimulationLog) -> Vec<CsvRow> {
    log.trace
        .records
        .iter()
        .map(|r| CsvRow {
            t: r.t,
            x: r.x.iter().copied().collect(),
            u_a: r.u_a.iter().copied().collect(),
            u_m: r.u_m.iter().copied().collect(),
            h: r.h.iter().copied().collect(),
            v_m: r.v_m,
            generation: r.generation,
            events: r.events.clone(),
        })
        .collect()
}

/// CSV text with a header row and one row per step. Floats use the shortest
/// representation that parses back to the same value.
pub fn log_to_csv(log: &SimulationLog) -> String {
    let (d, m) = dims(log);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(d, m)).expect("in-memory write");
    for row in csv_rows(log) {
        let mut fields = vec![row.t.to_string()];
        for v in row.x.iter().chain(&row.u_a).chain(&row.u_m).chain(&row.h) {
            fields.push(v.to_string());
        }
        fields.push(row.v_m.to_string());
        fields.push(row.generation.to_string());
        fields.push(row.events.join(";"));
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let head = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let d = head.iter().filter(|h| h.starts_with('x')).count();
    let m = head.iter().filter(|h| h.starts_with("u_a")).count();
    if head.len() != header(d, m).len() {
        return Err(Error::Parse(format!("unexpected CSV header with {} columns", head.len())));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
    let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let f: Vec<&str> = rec.iter().collect();
        let vec_at = |start: usize, len: usize| f[start..start + len].iter().map(|s| num(s)).collect::<Result<Vec<_>>>();
        let events = f[1 + d + 3 * m + 2];
        rows.push(CsvRow {
            t: int(f[0])?,
            x: vec_at(1, d)?,
            u_a: vec_at(1 + d, m)?,
            u_m: vec_at(1 + d + m, m)?,
            h: vec_at(1 + d + 2 * m, m)?,
            v_m: num(f[1 + d + 3 * m])?,
            generation: int(f[1 + d + 3 * m + 1])?,
            events: if events.is_empty() { Vec::new() } else { events.split(';').map(String::from).collect() },
        });
    }
    Ok(rows)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn export_csv(log: &SimulationLog, path: &Path) -> Result<()> {
    write_file(path, &log_to_csv(log))
}

pub fn save_log_json(log: &SimulationLog, path: &Path) -> Result<()> {
    let text = serde_json::to_string(log).map_err(|e| Error::Parse(e.to_string()))?;
    write_file(path, &text)
}

pub fn load_log_json(path: &Path) -> Result<SimulationLog> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Gnuplot data: `# switch t` marker comments, then whitespace-separated
/// columns `t v_t` followed by every state of every run.
pub fn plot_data(logs: &[&SimulationLog], schedule: &GainSchedule) -> String {
    let steps = logs.iter().map(|l| l.trace.len()).max().unwrap_or(0);
    let mut s = String::from("# deep-mpc plot data\n");
    for t in schedule.switch_instants(steps) {
        let _ = writeln!(s, "# switch {t}");
    }
    let mut cols = vec!["t".to_string(), "v_t".to_string()];
    for log in logs {
        let d = dims(log).0;
        cols.extend((0..d).map(|i| format!("x{i}_{}_{}", log.variant, log.seed)));
    }
    let _ = writeln!(s, "# {}", cols.join(" "));
    for t in 0..steps {
        let _ = write!(s, "{t} {}", schedule.gain_at(t));
        for log in logs {
            match log.trace.records.get(t) {
                Some(r) => r.x.iter().for_each(|v| {
                    let _ = write!(s, " {v}");
                }),
                None => (0..dims(log).0).for_each(|_| s.push_str(" NaN")),
            }
        }
        s.push('\n');
    }
    s
}

pub fn export_plot_data(logs: &[&SimulationLog], schedule: &GainSchedule, path: &Path) -> Result<()> {
    write_file(path, &plot_data(logs, schedule))
}
