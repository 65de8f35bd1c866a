use std::io::Read;

use chrono::{NaiveDate, NaiveDateTime};

use crate::RetailError;

/// Prices are stored as integer ten-thousandths of a currency unit, so
/// equality (and hence run boundaries) is exact.
pub const PRICE_TICKS_PER_UNIT: i64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TransactionRecord {
    pub invoice_id: String,
    pub stock_code: String,
    pub description: String,
    pub quantity: i64,
    pub invoice_timestamp: NaiveDateTime,
    pub unit_price_ticks: i64,
    pub customer_id: Option<String>,
    pub country: String,
}

impl TransactionRecord {
    pub fn unit_price(&self) -> f64 {
        self.unit_price_ticks as f64 / PRICE_TICKS_PER_UNIT as f64
    }

    pub fn day(&self) -> NaiveDate {
        self.invoice_timestamp.date()
    }
}

/// Cleaning counters reported alongside the parsed records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub rows_read: usize,
    pub kept: usize,
    pub cancellations: usize,
    pub nonpositive_quantity: usize,
    pub nonpositive_price: usize,
    pub malformed: usize,
}

const REQUIRED: [&str; 8] = [
    "InvoiceNo",
    "StockCode",
    "Description",
    "Quantity",
    "InvoiceDate",
    "UnitPrice",
    "CustomerID",
    "Country",
];

/// Exact decimal parse into price ticks; more than 4 fractional digits or
/// any non-digit content is malformed.
fn parse_price_ticks(s: &str) -> Option<i64> {
    let s = s.trim();
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.len() > 4 {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let int_val: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let mut frac_val: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().ok()?
    };
    for _ in frac_part.len()..4 {
        frac_val *= 10;
    }
    Some(sign * (int_val.checked_mul(PRICE_TICKS_PER_UNIT)? + frac_val))
}

const DATE_FORMATS: [&str; 5] = [
    "%m/%d/%Y %H:%M",
    "%m/%d/%Y %H:%M:%S",
    "%d/%m/%Y %H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
];

fn parse_date(s: &str, format: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s.trim(), format).ok()
}

/// Parse and clean a transaction CSV.
///
/// Fatal only when a required column is missing. Rows that fail to parse
/// are skipped and counted; cancellation invoices (prefix 'C'/'c') and
/// rows with non-positive quantity or price are dropped and counted.
///
/// Timestamp parsing elects one format for the whole file when a single
/// known format parses every row (month-first is tried before day-first
/// for ambiguous exports); otherwise each row takes the first format that
/// fits.
pub fn parse_transactions<R: Read>(
    reader: R,
) -> Result<(Vec<TransactionRecord>, ParseStats), RetailError> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let mut col = [usize::MAX; 8];
    for (want_idx, want) in REQUIRED.iter().enumerate() {
        match headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(want))
        {
            Some(i) => col[want_idx] = i,
            None => return Err(RetailError::MissingColumn(want)),
        }
    }

    let mut stats = ParseStats::default();
    // First pass: raw field extraction with the numeric/cleaning rules.
    struct RawRow {
        invoice: String,
        stock: String,
        desc: String,
        qty: i64,
        date_str: String,
        ticks: i64,
        customer: Option<String>,
        country: String,
    }
    let mut raw: Vec<RawRow> = Vec::new();
    for record in csv_reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(_) => {
                stats.rows_read += 1;
                stats.malformed += 1;
                continue;
            }
        };
        stats.rows_read += 1;
        let field = |i: usize| record.get(col[i]).unwrap_or("").trim();
        let invoice = field(0).to_string();
        let qty: i64 = match field(3).parse() {
            Ok(q) => q,
            Err(_) => {
                stats.malformed += 1;
                continue;
            }
        };
        let ticks = match parse_price_ticks(field(5)) {
            Some(t) => t,
            None => {
                stats.malformed += 1;
                continue;
            }
        };
        if invoice.starts_with(['C', 'c']) {
            stats.cancellations += 1;
            continue;
        }
        if qty <= 0 {
            stats.nonpositive_quantity += 1;
            continue;
        }
        if ticks <= 0 {
            stats.nonpositive_price += 1;
            continue;
        }
        let customer = field(6);
        raw.push(RawRow {
            invoice,
            stock: field(1).to_string(),
            desc: field(2).to_string(),
            qty,
            date_str: field(4).to_string(),
            ticks,
            customer: if customer.is_empty() {
                None
            } else {
                Some(customer.to_string())
            },
            country: field(7).to_string(),
        });
    }

    // Elect a single timestamp format when one fits every row.
    let elected = DATE_FORMATS
        .iter()
        .find(|f| raw.iter().all(|r| parse_date(&r.date_str, f).is_some()))
        .copied();

    let mut records = Vec::with_capacity(raw.len());
    for row in raw {
        let ts = match elected {
            Some(f) => parse_date(&row.date_str, f),
            None => DATE_FORMATS.iter().find_map(|f| parse_date(&row.date_str, f)),
        };
        let Some(ts) = ts else {
            stats.malformed += 1;
            continue;
        };
        records.push(TransactionRecord {
            invoice_id: row.invoice,
            stock_code: row.stock,
            description: row.desc,
            quantity: row.qty,
            invoice_timestamp: ts,
            unit_price_ticks: row.ticks,
            customer_id: row.customer,
            country: row.country,
        });
    }
    stats.kept = records.len();
    Ok((records, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "InvoiceNo,StockCode,Description,Quantity,InvoiceDate,UnitPrice,CustomerID,Country\n";

    #[test]
    fn cancellation_and_bad_rows_are_dropped_with_counts() {
        let csv = format!(
            "{HEADER}\
             536365,85123A,WHITE HANGING HEART,6,2010-12-01 08:26,2.55,17850,United Kingdom\n\
             C536379,D,Discount,-1,2010-12-01 09:41,27.50,14527,United Kingdom\n\
             536366,71053,WHITE METAL LANTERN,6,2010-12-01 08:28,3.39,17850,United Kingdom\n"
        );
        let (records, stats) = parse_transactions(csv.as_bytes()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(stats.cancellations, 1);
        assert_eq!(stats.kept, 2);
        assert_eq!(records[0].unit_price_ticks, 25_500);
        assert_eq!(records[0].day(), NaiveDate::from_ymd_opt(2010, 12, 1).unwrap());
    }

    #[test]
    fn empty_file_with_header_is_empty() {
        let (records, stats) = parse_transactions(HEADER.as_bytes()).unwrap();
        assert!(records.is_empty());
        assert_eq!(stats.rows_read, 0);
    }

    #[test]
    fn missing_column_is_fatal() {
        let csv = "InvoiceNo,StockCode,Quantity\n1,2,3\n";
        assert!(matches!(
            parse_transactions(csv.as_bytes()),
            Err(RetailError::MissingColumn("Description"))
        ));
    }

    #[test]
    fn nonpositive_quantity_and_price_are_counted() {
        let csv = format!(
            "{HEADER}\
             1,A,x,0,2010-12-01 08:26,2.55,,UK\n\
             2,A,x,3,2010-12-01 08:26,0,,UK\n\
             3,A,x,notanumber,2010-12-01 08:26,1.00,,UK\n\
             4,A,x,2,2010-12-01 08:26,1.25,,UK\n"
        );
        let (records, stats) = parse_transactions(csv.as_bytes()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(stats.nonpositive_quantity, 1);
        assert_eq!(stats.nonpositive_price, 1);
        assert_eq!(stats.malformed, 1);
    }

    #[test]
    fn price_ticks_parse_exactly() {
        assert_eq!(parse_price_ticks("2.55"), Some(25_500));
        assert_eq!(parse_price_ticks("0.0001"), Some(1));
        assert_eq!(parse_price_ticks("10"), Some(100_000));
        assert_eq!(parse_price_ticks("1.23456"), None);
        assert_eq!(parse_price_ticks("abc"), None);
    }

    #[test]
    fn month_first_dates_are_elected_consistently() {
        let csv = format!(
            "{HEADER}\
             1,A,x,1,12/1/2010 8:26,1.00,,UK\n\
             2,A,x,1,12/13/2010 9:00,1.00,,UK\n"
        );
        // 12/13 only parses month-first, so the whole file elects it and
        // 12/1 is December 1st.
        let (records, _) = parse_transactions(csv.as_bytes()).unwrap();
        assert_eq!(records[0].day(), NaiveDate::from_ymd_opt(2010, 12, 1).unwrap());
        assert_eq!(records[1].day(), NaiveDate::from_ymd_opt(2010, 12, 13).unwrap());
    }
}
