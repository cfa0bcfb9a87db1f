use std::fmt;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the option-chain CSV.
pub const CHAIN_HEADER: [&str; 8] =
    ["quote_date", "expiry_date", "strike", "option_type", "underlying_price", "implied_vol", "mid_price", "volume"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionType {
    Call,
    Put,
}

impl OptionType {
    /// Model indicator feature: call = 1, put = 0.
    pub fn indicator(self) -> f64 {
        match self {
            OptionType::Call => 1.0,
            OptionType::Put => 0.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OptionType::Call => "call",
            OptionType::Put => "put",
        }
    }
}

impl fmt::Display for OptionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OptionType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "call" => Ok(OptionType::Call),
            "put" => Ok(OptionType::Put),
            other => Err(format!("option_type must be `call` or `put`, got `{other}`")),
        }
    }
}

/// One daily quote of one option contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionRecord {
    pub quote_date: NaiveDate,
    pub expiry_date: NaiveDate,
    pub strike: f64,
    pub option_type: OptionType,
    pub underlying_price: f64,
    pub implied_vol: f64,
    pub mid_price: f64,
    pub volume: u64,
}

/// Identifies a contract across quote dates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ContractKey {
    pub expiry_date: NaiveDate,
    /// Strike in 1e-6 currency units.
    pub strike_micros: i64,
    pub option_type: OptionType,
}

impl fmt::Display for ContractKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}",
            self.expiry_date.format("%Y%m%d"),
            self.option_type.as_str().chars().next().unwrap_or('?').to_ascii_uppercase(),
            self.strike_micros as f64 / 1e6
        )
    }
}

impl OptionRecord {
    /// Calendar days from quote to expiry.
    pub fn ttm_days(&self) -> i64 {
        (self.expiry_date - self.quote_date).num_days()
    }

    pub fn ttm_years(&self) -> f64 {
        self.ttm_days() as f64 / 365.0
    }

    /// Underlying price over strike.
    pub fn moneyness(&self) -> f64 {
        self.underlying_price / self.strike
    }

    pub fn contract(&self) -> ContractKey {
        ContractKey {
            expiry_date: self.expiry_date,
            strike_micros: (self.strike * 1e6).round() as i64,
            option_type: self.option_type,
        }
    }

    /// Check the record-level invariants.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.expiry_date <= self.quote_date {
            return Err(format!("expiry {} is not after quote date {}", self.expiry_date, self.quote_date));
        }
        let positive =
            [("strike", self.strike), ("underlying_price", self.underlying_price), ("implied_vol", self.implied_vol)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.mid_price.is_finite() && self.mid_price >= 0.0) {
            return Err(format!("mid_price must be nonnegative, got {}", self.mid_price));
        }
        Ok(())
    }
}

/// A rejected CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowDiagnostic {
    /// 1-based line number in the file (the header is line 1).
    pub line: usize,
    pub message: String,
}

/// Parsed chain plus the rows that were rejected.
#[derive(Debug, Clone, Default)]
pub struct ParsedChain {
    pub records: Vec<OptionRecord>,
    pub rejected: Vec<RowDiagnostic>,
}

fn parse_row(row: &csv::StringRecord) -> std::result::Result<OptionRecord, String> {
    if row.len() != CHAIN_HEADER.len() {
        return Err(format!("expected {} fields, got {}", CHAIN_HEADER.len(), row.len()));
    }
    let date = |i: usize| {
        NaiveDate::parse_from_str(&row[i], "%Y-%m-%d").map_err(|e| format!("{}: `{}` ({e})", CHAIN_HEADER[i], &row[i]))
    };
    let num = |i: usize| row[i].parse::<f64>().map_err(|e| format!("{}: `{}` ({e})", CHAIN_HEADER[i], &row[i]));
    let record = OptionRecord {
        quote_date: date(0)?,
        expiry_date: date(1)?,
        strike: num(2)?,
        option_type: row[3].parse()?,
        underlying_price: num(4)?,
        implied_vol: num(5)?,
        mid_price: num(6)?,
        volume: row[7].parse::<u64>().map_err(|e| format!("volume: `{}` ({e})", &row[7]))?,
    };
    record.validate()?;
    Ok(record)
}

/// Read an option-chain CSV.
///
/// Malformed rows are collected as diagnostics; the call fails only when
/// more than 10% of the data rows are malformed. An empty file (or a header
/// with no rows) yields an empty chain and a logged warning.
pub fn parse_chain(path: impl AsRef<Path>) -> Result<ParsedChain> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(BufReader::new(file));

    let mut rows = reader.records();
    let header = match rows.next() {
        None => {
            log::warn!("{}: empty option-chain file", path.display());
            return Ok(ParsedChain::default());
        }
        Some(h) => h?,
    };
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != CHAIN_HEADER {
        return Err(Error::BadHeader { path: path.to_path_buf(), found: found.join(",") });
    }

    let mut chain = ParsedChain::default();
    let mut total = 0usize;
    for (i, row) in rows.enumerate() {
        let line = i + 2;
        total += 1;
        match row.map_err(|e| e.to_string()).and_then(|r| parse_row(&r)) {
            Ok(rec) => chain.records.push(rec),
            Err(message) => chain.rejected.push(RowDiagnostic { line, message }),
        }
    }
    if total == 0 {
        log::warn!("{}: option-chain file has no data rows", path.display());
    }
    if chain.rejected.len() * 10 > total {
        let first = &chain.rejected[0];
        return Err(Error::TooManyMalformed {
            path: path.to_path_buf(),
            bad: chain.rejected.len(),
            total,
            first: format!("line {}: {}", first.line, first.message),
        });
    }
    for d in &chain.rejected {
        log::warn!("{}:{}: {}", path.display(), d.line, d.message);
    }
    Ok(chain)
}

/// Format a price so that parsing it back yields the identical `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    // `{}` on f64 prints the shortest representation that round-trips.
    format!("{v}")
}

/// Write records in the option-chain CSV schema.
pub fn write_chain<W: Write>(records: &[OptionRecord], out: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "{}", CHAIN_HEADER.join(","))?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.quote_date.format("%Y-%m-%d"),
            r.expiry_date.format("%Y-%m-%d"),
            fmt_f64(r.strike),
            r.option_type,
            fmt_f64(r.underlying_price),
            fmt_f64(r.implied_vol),
            fmt_f64(r.mid_price),
            r.volume
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "quote_date,expiry_date,strike,option_type,underlying_price,implied_vol,mid_price,volume\n";

    #[test]
    fn three_good_rows() {
        let f = write_tmp(&format!(
            "{HEADER}2020-01-02,2020-06-19,100,call,101.5,0.21,7.25,120\n\
             2020-01-02,2020-06-19,100,put,101.5,0.21,5.1,80\n\
             2020-01-03,2020-06-19,100,call,102,0.2,7.6,0\n"
        ));
        let chain = parse_chain(f.path()).unwrap();
        assert_eq!(chain.records.len(), 3);
        assert!(chain.rejected.is_empty());
        assert_eq!(chain.records[1].option_type, OptionType::Put);
        assert_eq!(chain.records[0].ttm_days(), 169);
    }

    #[test]
    fn expiry_before_quote_is_rejected_with_line() {
        let mut body = String::from(HEADER);
        for _ in 0..10 {
            body.push_str("2020-01-02,2020-06-19,100,call,101.5,0.21,7.25,120\n");
        }
        body.push_str("2020-07-01,2020-06-19,100,call,101.5,0.21,7.25,120\n");
        let chain = parse_chain(write_tmp(&body).path()).unwrap();
        assert_eq!(chain.records.len(), 10);
        assert_eq!(chain.rejected.len(), 1);
        assert_eq!(chain.rejected[0].line, 12);
        assert!(chain.rejected[0].message.contains("not after"));
    }

    #[test]
    fn empty_file_gives_empty_chain() {
        let chain = parse_chain(write_tmp("").path()).unwrap();
        assert!(chain.records.is_empty());
        let chain = parse_chain(write_tmp(HEADER).path()).unwrap();
        assert!(chain.records.is_empty());
    }

    #[test]
    fn mostly_malformed_is_fatal() {
        let body = format!("{HEADER}2020-01-02,2020-06-19,100,call,1,0.2,1,1\nbad,row\n");
        assert!(matches!(parse_chain(write_tmp(&body).path()), Err(Error::TooManyMalformed { bad: 1, total: 2, .. })));
    }

    #[test]
    fn wrong_header_and_missing_file() {
        let f = write_tmp("a,b,c\n");
        assert!(matches!(parse_chain(f.path()), Err(Error::BadHeader { .. })));
        assert!(matches!(parse_chain("/nonexistent/chain.csv"), Err(Error::Io { .. })));
    }
}
