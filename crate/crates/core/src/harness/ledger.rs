use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::DecisionVector;

pub const CSV_HEADER: &str = "t,loss,cum_loss,cum_regret";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerRow {
    pub t: usize,
    pub loss: f64,
    pub cum_loss: f64,
    pub cum_regret: f64,
}

/// Per-round losses and regret against a fixed comparator.
///
/// `cum_regret(t)` is the learner's cumulative loss minus the comparator's
/// cumulative loss over the same rounds, so `cum_regret(T)` is the regret.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegretLedger {
    rows: Vec<LedgerRow>,
    comparator_total: f64,
    comparator: Option<DecisionVector>,
}

impl RegretLedger {
    pub fn new(comparator: DecisionVector) -> Self {
        Self {
            rows: Vec::new(),
            comparator_total: 0.0,
            comparator: Some(comparator),
        }
    }

    /// Appends round `len + 1` with the learner's loss and the comparator's loss.
    pub fn record(&mut self, loss: f64, comparator_loss: f64) {
        let (cum_loss, comparator_total) = match self.rows.last() {
            Some(r) => (r.cum_loss + loss, self.comparator_total + comparator_loss),
            None => (loss, comparator_loss),
        };
        self.comparator_total = comparator_total;
        self.rows.push(LedgerRow {
            t: self.rows.len() + 1,
            loss,
            cum_loss,
            cum_regret: cum_loss - comparator_total,
        });
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Total loss of the comparator over the recorded rounds.
    pub fn comparator_total(&self) -> f64 {
        self.comparator_total
    }

    pub fn comparator(&self) -> Option<&DecisionVector> {
        self.comparator.as_ref()
    }

    pub fn final_cumulative_loss(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_loss)
    }

    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{CSV_HEADER}").map_err(io)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.t,
                format_significant(r.loss),
                format_significant(r.cum_loss),
                format_significant(r.cum_regret)
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Reads a ledger written by [`Self::write_csv`]. The comparator point is
    /// not stored in the file; its total is recovered from the last row.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if i == 0 {
                if line.trim() != CSV_HEADER {
                    return Err(parse_err(1, format!("expected header {CSV_HEADER:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let [t, loss, cum_loss, cum_regret] = fields.as_slice() else {
                return Err(parse_err(
                    i + 1,
                    format!("expected 4 fields, got {}", fields.len()),
                ));
            };
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(i + 1, format!("{s:?}: {e}")))
            };
            rows.push(LedgerRow {
                t: t.trim()
                    .parse()
                    .map_err(|e| parse_err(i + 1, format!("{t:?}: {e}")))?,
                loss: num(loss)?,
                cum_loss: num(cum_loss)?,
                cum_regret: num(cum_regret)?,
            });
        }
        let comparator_total = rows.last().map_or(0.0, |r| r.cum_loss - r.cum_regret);
        Ok(Self {
            rows,
            comparator_total,
            comparator: None,
        })
    }
}

/// Decimal text with 12 significant digits, `%.12g` style.
pub fn format_significant(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
