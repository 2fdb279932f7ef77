use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{Map, Value};

use crate::args::Common;
use crate::error::CliError;

/// The resolved settings of a run, with the subcommand name.
pub struct RunInfo {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub timestamp: Option<u64>,
}

impl RunInfo {
    pub fn new(command: &str, common: &Common, args: Value) -> Self {
        let mut config = Map::new();
        config.insert("command".into(), Value::from(command));
        if let Value::Object(m) = serde_json::to_value(common).expect("plain settings") {
            config.extend(m);
        }
        if let Value::Object(m) = args {
            config.extend(m);
        }
        let timestamp = (!common.no_timestamp)
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        RunInfo { command: command.into(), config: Value::Object(config), seed: common.seed, timestamp }
    }

    fn header(&self, extra: &[String]) -> Vec<String> {
        let mut lines = vec![
            format!("# interlace {} {}", self.command, env!("CARGO_PKG_VERSION")),
            format!("# config: {}", self.config),
            format!("# seed: {}", self.seed),
        ];
        if let Some(t) = self.timestamp {
            lines.push(format!("# timestamp: {t}"));
        }
        lines.extend(extra.iter().map(|l| format!("# {l}")));
        lines
    }
}

pub fn sink(common: &Common) -> Result<Box<dyn Write>, CliError> {
    Ok(match &common.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(CliError::io(p.display().to_string()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn io_err(common: &Common) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: common.out.as_ref().map_or_else(|| "<stdout>".into(), |p| p.display().to_string()),
        source: e,
    }
}

/// A CSV table preceded by `#` comment lines describing the run.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn write_table(common: &Common, info: &RunInfo, table: &Table) -> Result<(), CliError> {
    let mut out = sink(common)?;
    let err = io_err(common);
    for line in info.header(&table.notes) {
        writeln!(out, "{line}").map_err(&err)?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let csv_err = |e: csv::Error| CliError::Usage(format!("csv output: {e}"));
        w.write_record(&table.columns).map_err(csv_err)?;
        for r in &table.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(&err)?;
    }
    out.flush().map_err(&err)
}

pub fn write_json(common: &Common, info: &RunInfo, result: Value) -> Result<(), CliError> {
    let mut doc = Map::new();
    doc.insert("command".into(), Value::from(info.command.clone()));
    doc.insert("config".into(), info.config.clone());
    if let Some(t) = info.timestamp {
        doc.insert("timestamp".into(), Value::from(t));
    }
    doc.insert("result".into(), result);
    let mut out = sink(common)?;
    let err = io_err(common);
    serde_json::to_writer_pretty(&mut out, &Value::Object(doc)).map_err(|e| CliError::Usage(format!("json output: {e}")))?;
    writeln!(out).map_err(&err)?;
    out.flush().map_err(&err)
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
