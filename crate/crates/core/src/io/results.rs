use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::OutputFormat;
use crate::engine::Trajectory;
use crate::error::{Error, Result};
use crate::metrics::StepMetrics;
use crate::sweep::SweepRow;

pub const CSV_HEADER: [&str; 14] = [
    "run_id",
    "cell_index",
    "replicate",
    "seed",
    "alpha",
    "delta",
    "eip",
    "eit",
    "lt",
    "step",
    "avg_gl_companies",
    "avg_gl_banks",
    "frac_influenced_companies",
    "frac_influenced_banks",
];

const SIGNIFICANT_DIGITS: usize = 10;

/// Formats `x` with ten significant digits, positional for moderate
/// exponents and scientific otherwise, without trailing zeros.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();

    if (-7..16).contains(&exp) {
        let mut out = String::from(sign);
        if exp < 0 {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
            out.push_str(&digits);
        } else {
            let point = exp as usize + 1;
            if point >= digits.len() {
                out.push_str(&digits);
                out.extend(std::iter::repeat_n('0', point - digits.len()));
                return out;
            }
            out.push_str(&digits[..point]);
            out.push('.');
            out.push_str(&digits[point..]);
        }
        let trimmed = out.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{sign}{m}e{exp}")
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    run_id: u64,
    cell_index: usize,
    replicate: u32,
    seed: u64,
    alpha: f64,
    delta: f64,
    eip: f64,
    eit: u32,
    lt: f64,
    step: u32,
    avg_gl_companies: f64,
    avg_gl_banks: f64,
    frac_influenced_companies: f64,
    frac_influenced_banks: f64,
}

impl From<&SweepRow> for JsonRow {
    fn from(r: &SweepRow) -> Self {
        JsonRow {
            run_id: r.run_id,
            cell_index: r.cell_index,
            replicate: r.replicate,
            seed: r.seed,
            alpha: r.alpha,
            delta: r.delta,
            eip: r.eip,
            eit: r.eit,
            lt: r.lt,
            step: r.metrics.step,
            avg_gl_companies: r.metrics.avg_gl_companies,
            avg_gl_banks: r.metrics.avg_gl_banks,
            frac_influenced_companies: r.metrics.frac_influenced_companies,
            frac_influenced_banks: r.metrics.frac_influenced_banks,
        }
    }
}

/// Streaming writer for result rows.
pub enum ResultWriter<W: Write> {
    Csv(Box<csv::Writer<W>>),
    Jsonl(W),
}

impl<W: Write> ResultWriter<W> {
    pub fn new(inner: W, format: OutputFormat) -> Result<Self> {
        Ok(match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(inner);
                w.write_record(CSV_HEADER)?;
                ResultWriter::Csv(Box::new(w))
            }
            OutputFormat::Jsonl => ResultWriter::Jsonl(inner),
        })
    }

    pub fn write_row(&mut self, row: &SweepRow) -> Result<()> {
        match self {
            ResultWriter::Csv(w) => {
                let m = &row.metrics;
                w.write_record([
                    row.run_id.to_string(),
                    row.cell_index.to_string(),
                    row.replicate.to_string(),
                    row.seed.to_string(),
                    format_real(row.alpha),
                    format_real(row.delta),
                    format_real(row.eip),
                    row.eit.to_string(),
                    format_real(row.lt),
                    m.step.to_string(),
                    format_real(m.avg_gl_companies),
                    format_real(m.avg_gl_banks),
                    format_real(m.frac_influenced_companies),
                    format_real(m.frac_influenced_banks),
                ])?;
            }
            ResultWriter::Jsonl(w) => {
                serde_json::to_writer(&mut *w, &JsonRow::from(row))?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        match self {
            ResultWriter::Csv(w) => w
                .into_inner()
                .map_err(|e| Error::Csv(csv::Error::from(e.into_error()))),
            ResultWriter::Jsonl(mut w) => {
                w.flush()?;
                Ok(w)
            }
        }
    }
}

/// Writes all rows to `path`.
pub fn write_results<I>(rows: I, format: OutputFormat, path: &Path) -> Result<()>
where
    I: IntoIterator<Item = SweepRow>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = ResultWriter::new(BufWriter::new(file), format)?;
    for row in rows {
        writer.write_row(&row).map_err(|e| with_path(e, path))?;
    }
    writer.into_inner().map_err(|e| with_path(e, path))?;
    Ok(())
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Csv(e) if e.is_io_error() => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        },
        Error::Write(e) => Error::io(path, e),
        other => other,
    }
}

/// Rows of a single simulation (cell 0, replicate 0, run 0).
pub fn trajectory_rows(t: &Trajectory) -> impl Iterator<Item = SweepRow> + '_ {
    t.metrics.iter().map(move |m| SweepRow {
        run_id: 0,
        cell_index: 0,
        replicate: 0,
        seed: t.seed,
        alpha: t.params.alpha,
        delta: t.params.delta,
        eip: t.params.eip,
        eit: t.params.eit,
        lt: t.params.lt,
        metrics: *m,
    })
}

/// Reads a CSV result table, checking the header.
pub fn read_results_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Trajectory(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |i: usize| &record[i];
        let bad = |i: usize| {
            Error::Trajectory(format!(
                "line {}: cannot parse `{}` as {}",
                record.position().map_or(0, |p| p.line()),
                &record[i],
                CSV_HEADER[i]
            ))
        };
        let real = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
        let int = |i: usize| field(i).parse::<u64>().map_err(|_| bad(i));
        rows.push(SweepRow {
            run_id: int(0)?,
            cell_index: int(1)? as usize,
            replicate: int(2)? as u32,
            seed: int(3)?,
            alpha: real(4)?,
            delta: real(5)?,
            eip: real(6)?,
            eit: int(7)? as u32,
            lt: real(8)?,
            metrics: StepMetrics {
                step: int(9)? as u32,
                avg_gl_companies: real(10)?,
                avg_gl_banks: real(11)?,
                frac_influenced_companies: real(12)?,
                frac_influenced_banks: real(13)?,
            },
        });
    }
    Ok(rows)
}
