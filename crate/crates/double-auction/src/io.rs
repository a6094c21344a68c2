//! CSV ingestion and report rendering for order books, raw event feeds,
//! and trade books.
//!
//! All readers are strict: exact headers, exact field counts, and
//! construction-level invariants (no zero quantities outside deletes)
//! are enforced at the row that breaks them. Empty input is an empty
//! book, not an error.

use std::io::{Read, Write};

use crate::checker::{Action, CheckReport, EventPrice, Mode, RawOrderEvent, Verdict};
use crate::order::{Matching, Order, Side, Transaction};

/// Exact header of a bid or ask book file.
pub const ORDER_HEADER: &str = "id,timestamp,quantity,price";
/// Exact header of a raw order-event file.
pub const EVENT_HEADER: &str = "id,timestamp,quantity,price,side,action";
/// Exact header of a trade-book file.
pub const TRADE_HEADER: &str = "bid_id,ask_id,quantity,price";

/// Errors from reading or writing the CSV interchange files.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: &'static str, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn row_error(line: u64, message: impl Into<String>) -> IoError {
    IoError::Row { line, message: message.into() }
}

/// Reads everything up front so empty files can short-circuit and so
/// malformed UTF-8 fails cleanly before CSV parsing.
fn slurp<R: Read>(mut reader: R) -> Result<String, IoError> {
    let mut buf = String::new();
    reader.read_to_string(&mut buf)?;
    Ok(buf)
}

fn csv_reader(content: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(content.as_bytes())
}

fn check_header(
    rdr: &mut csv::Reader<&[u8]>,
    expected: &'static str,
) -> Result<(), IoError> {
    let found = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != expected {
        return Err(IoError::Header { expected, found });
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn field<'a>(
    record: &'a csv::StringRecord,
    idx: usize,
    name: &str,
    expected_len: usize,
) -> Result<&'a str, IoError> {
    if record.len() != expected_len {
        return Err(row_error(
            record_line(record),
            format!("expected {expected_len} fields, found {}", record.len()),
        ));
    }
    record
        .get(idx)
        .ok_or_else(|| row_error(record_line(record), format!("missing field `{name}`")))
}

fn parse_u64(record: &csv::StringRecord, idx: usize, name: &str, len: usize) -> Result<u64, IoError> {
    let raw = field(record, idx, name, len)?;
    raw.parse::<u64>()
        .map_err(|_| row_error(record_line(record), format!("bad {name} `{raw}`")))
}

/// Parses a price field: a natural number or the `MKT` market sentinel.
fn parse_event_price(record: &csv::StringRecord, idx: usize, len: usize) -> Result<EventPrice, IoError> {
    let raw = field(record, idx, "price", len)?;
    if raw == "MKT" {
        return Ok(EventPrice::Market);
    }
    raw.parse::<u64>()
        .map(EventPrice::Limit)
        .map_err(|_| row_error(record_line(record), format!("bad price `{raw}`")))
}

/// Reads a bid or ask book. The `MKT` sentinel maps to the maximum
/// representable price for bids and to zero for asks.
pub fn read_orders_csv<R: Read>(reader: R, side: Side) -> Result<Vec<Order>, IoError> {
    let content = slurp(reader)?;
    if content.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rdr = csv_reader(&content);
    check_header(&mut rdr, ORDER_HEADER)?;
    let mut orders = Vec::new();
    for result in rdr.records() {
        let record = result?;
        let id = parse_u64(&record, 0, "id", 4)?;
        let timestamp = parse_u64(&record, 1, "timestamp", 4)?;
        let quantity = parse_u64(&record, 2, "quantity", 4)?;
        let price = match parse_event_price(&record, 3, 4)? {
            EventPrice::Limit(p) => p,
            EventPrice::Market => match side {
                Side::Bid => u64::MAX,
                Side::Ask => 0,
            },
        };
        let order = Order::new(id, timestamp, quantity, price)
            .map_err(|_| row_error(record_line(&record), "zero quantity"))?;
        orders.push(order);
    }
    Ok(orders)
}

/// Writes a book back out in the order-file format.
pub fn write_orders_csv<W: Write>(writer: W, orders: &[Order]) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(ORDER_HEADER.split(','))?;
    for o in orders {
        wtr.write_record(&[
            o.id().to_string(),
            o.timestamp().to_string(),
            o.quantity().to_string(),
            o.price().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a raw order-event feed. Quantity zero is tolerated on deletes
/// only, mirroring the event invariants.
pub fn read_events_csv<R: Read>(reader: R) -> Result<Vec<RawOrderEvent>, IoError> {
    let content = slurp(reader)?;
    if content.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut rdr = csv_reader(&content);
    check_header(&mut rdr, EVENT_HEADER)?;
    let mut events = Vec::new();
    for result in rdr.records() {
        let record = result?;
        let id = parse_u64(&record, 0, "id", 6)?;
        let timestamp = parse_u64(&record, 1, "timestamp", 6)?;
        let quantity = parse_u64(&record, 2, "quantity", 6)?;
        let price = parse_event_price(&record, 3, 6)?;
        let side = match field(&record, 4, "side", 6)? {
            "B" => Side::Bid,
            "A" => Side::Ask,
            other => {
                return Err(row_error(record_line(&record), format!("bad side `{other}`")))
            }
        };
        let action = match field(&record, 5, "action", 6)? {
            "N" => Action::New,
            "U" => Action::Update,
            "D" => Action::Delete,
            other => {
                return Err(row_error(record_line(&record), format!("bad action `{other}`")))
            }
        };
        if quantity == 0 && action != Action::Delete {
            return Err(row_error(record_line(&record), "zero quantity outside delete"));
        }
        events.push(RawOrderEvent { id, timestamp, quantity, price, side, action });
    }
    Ok(events)
}

/// Reads an exchange trade book.
pub fn read_trades_csv<R: Read>(reader: R) -> Result<Matching, IoError> {
    let content = slurp(reader)?;
    if content.trim().is_empty() {
        return Ok(Matching::default());
    }
    let mut rdr = csv_reader(&content);
    check_header(&mut rdr, TRADE_HEADER)?;
    let mut trades = Vec::new();
    for result in rdr.records() {
        let record = result?;
        let bid_id = parse_u64(&record, 0, "bid_id", 4)?;
        let ask_id = parse_u64(&record, 1, "ask_id", 4)?;
        let quantity = parse_u64(&record, 2, "quantity", 4)?;
        let price = parse_u64(&record, 3, "price", 4)?;
        let t = Transaction::new(bid_id, ask_id, quantity, price)
            .map_err(|_| row_error(record_line(&record), "zero quantity"))?;
        trades.push(t);
    }
    Ok(Matching::new(trades))
}

/// Writes a matching in the trade-book format.
pub fn write_trades_csv<W: Write>(writer: W, m: &Matching) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(TRADE_HEADER.split(','))?;
    for t in m.transactions() {
        wtr.write_record(&[
            t.bid_id().to_string(),
            t.ask_id().to_string(),
            t.quantity().to_string(),
            t.price().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Renders a check report: key=value lines, one `discrepancy,` row per
/// differing order, one `invalid,` row per validity finding.
pub fn write_report<W: Write>(mut writer: W, report: &CheckReport) -> Result<(), IoError> {
    let verdict = match report.verdict {
        Verdict::Compliant => "Compliant",
        Verdict::Violation => "Violation",
    };
    let mode = match report.mode {
        Mode::Uniform => "uniform",
        Mode::Maximum => "maximum",
    };
    writeln!(writer, "verdict={verdict}")?;
    writeln!(writer, "mode={mode}")?;
    writeln!(writer, "uniform={}", report.uniform)?;
    writeln!(writer, "volume_reference={}", report.volume_reference)?;
    writeln!(writer, "volume_exchange={}", report.volume_exchange)?;
    writeln!(writer, "discrepancies={}", report.discrepancies.len())?;
    writeln!(writer, "invalid_details={}", report.validity_details.len())?;
    for dsc in &report.discrepancies {
        writeln!(
            writer,
            "discrepancy,{},{},{},{}",
            dsc.side.letter(),
            dsc.id,
            dsc.qty_reference,
            dsc.qty_exchange
        )?;
    }
    for detail in &report.validity_details {
        writeln!(writer, "invalid,{detail}")?;
    }
    Ok(())
}
