use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::svg::LineChart;
use crate::Common;

/// Failure carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Strict(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Strict(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Data(m) => write!(f, "data: {m}"),
            CliError::Strict(m) => write!(f, "strict mode: {m}"),
        }
    }
}

impl From<stratdp::Error> for CliError {
    fn from(e: stratdp::Error) -> Self {
        use stratdp::Error as E;
        match e {
            E::InvalidParameter { .. } | E::IncompatibleBudgets(..) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Output destinations, opened before any computation so bad paths fail fast.
pub struct Sink {
    csv: Box<dyn Write>,
    svg: Option<BufWriter<File>>,
}

impl Sink {
    pub fn open(common: &Common) -> CliResult<Self> {
        let csv: Box<dyn Write> = match &common.out {
            Some(p) => Box::new(BufWriter::new(create(p)?)),
            None => Box::new(io::stdout().lock()),
        };
        let svg = common
            .svg
            .as_deref()
            .map(create)
            .transpose()?
            .map(BufWriter::new);
        Ok(Self { csv, svg })
    }
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path).map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
}

/// A CSV document with a `#` comment header.
pub struct Report {
    header: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str, common: &Common, config: &impl fmt::Debug) -> Self {
        let header = vec![
            format!("stratdp {} {command}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", recorded_command_line()),
            format!("seed: {}", common.seed),
            format!("config: {config:?}"),
        ];
        Self {
            header,
            columns: Vec::new(),
            rows: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.header.push(line.into());
    }

    /// Records a degenerate-statistics warning; printed to stderr and kept in the header.
    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }

    pub fn columns(&mut self, cols: &[&str]) {
        self.columns = cols.iter().map(|c| c.to_string()).collect();
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert!(self.columns.is_empty() || cells.len() == self.columns.len());
        self.rows.push(cells);
    }

    /// Writes the CSV (and chart), then applies `--strict`.
    pub fn finish(self, mut sink: Sink, chart: Option<LineChart>, strict: bool) -> CliResult<()> {
        let io_err = |e: io::Error| CliError::Data(format!("write failed: {e}"));
        let w = &mut sink.csv;
        for line in &self.header {
            writeln!(w, "# {line}").map_err(io_err)?;
        }
        for msg in &self.warnings {
            writeln!(w, "# warning: {msg}").map_err(io_err)?;
        }
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(w, "# generated-at: {stamp}").map_err(io_err)?;
        if !self.columns.is_empty() {
            writeln!(w, "{}", self.columns.join(",")).map_err(io_err)?;
        }
        for row in &self.rows {
            writeln!(w, "{}", row.join(",")).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
        if let (Some(svg), Some(chart)) = (sink.svg.as_mut(), chart) {
            svg.write_all(chart.render().as_bytes()).map_err(io_err)?;
            svg.flush().map_err(io_err)?;
        }
        if strict && !self.warnings.is_empty() {
            return Err(CliError::Strict(format!(
                "{} warning(s)",
                self.warnings.len()
            )));
        }
        Ok(())
    }
}

/// The invocation without output paths, so a rerun into another file records the same line.
fn recorded_command_line() -> String {
    let mut out = vec!["stratdp".to_string()];
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--out" || a == "--svg" {
            args.next();
        } else if !(a.starts_with("--out=") || a.starts_with("--svg=")) {
            out.push(a);
        }
    }
    out.join(" ")
}

/// Formats with 12 significant digits; non-finite values as `nan`/`inf`/`-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp).max(0) as usize, x);
        // The rounding can carry into a new digit; both forms keep 12 significant digits.
        trim_zeros(&s)
    } else {
        let s = format!("{:.11e}", x);
        let (mant, e) = s.split_once('e').expect("scientific format");
        format!("{}e{e}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Sample mean and standard deviation; sd is 0 for one value, both NaN for none.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

pub fn pair(values: &[f64], name: &str) -> CliResult<(f64, f64)> {
    match values {
        [a, b] => Ok((*a, *b)),
        _ => Err(config_err(format!(
            "--{name} expects two comma-separated numbers"
        ))),
    }
}

pub fn nonempty<T>(values: &[T], name: &str) -> CliResult<()> {
    if values.is_empty() {
        Err(config_err(format!("--{name} must not be empty")))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(12345.678), "12345.678");
        assert_eq!(num(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(num(1e15), "1e15");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(100.0), "100");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn moments() {
        assert_eq!(mean_sd(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
        assert_eq!(mean_sd(&[4.0]), (4.0, 0.0));
        assert!(mean_sd(&[]).0.is_nan());
    }
}
