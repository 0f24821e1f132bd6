//! Output files.
//!
//! Every text file starts with `# config: <json>`, the resolved settings
//! that produced it; JSON files carry the same object under a `"config"`
//! key. Readers refuse files without it. Floats are written with 17
//! significant digits so values survive a round trip.

use serde_json::Value;

use crate::anneal::{EventRow, FitResult};
use crate::error::{Error, Result};
use crate::series::{ReturnSeries, SeriesEntry};

pub const HEADER_PREFIX: &str = "# config: ";

pub const RETURNS_COLUMNS: &str = "s,value,stderr,n";
pub const EVENTS_COLUMNS: &str = "t,freq,stderr,n";
pub const FIT_COLUMNS: &str = "t_lo,t_hi,beta_hat,c_hat,r_squared";
pub const BOUNDS_COLUMNS: &str = "t,bound,violation_fraction";

pub fn header_line(config: &Value) -> String {
    format!("{HEADER_PREFIX}{config}\n")
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Splits off and parses the config header line.
pub fn read_header(text: &str) -> Result<(Value, &str)> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let json = first
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing '# config:' header".into() })?;
    let config = serde_json::from_str(json).map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
    Ok((config, rest))
}

fn data_rows<'a>(body: &'a str, columns: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = body.lines().enumerate().map(|(i, l)| (i + 2, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l == columns => {}
        Some((n, l)) => return Err(Error::Parse { line: n, msg: format!("expected columns {columns:?}, got {l:?}") }),
        None => return Err(Error::Parse { line: 2, msg: "missing column line".into() }),
    }
    let width = columns.split(',').count();
    lines
        .map(|(n, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() == width {
                Ok((n, fields))
            } else {
                Err(Error::Parse { line: n, msg: format!("expected {width} fields, got {}", fields.len()) })
            }
        })
        .collect()
}

fn num<T: std::str::FromStr>(line: usize, field: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse { line, msg: format!("bad number {field:?}") })
}

pub fn write_returns_csv(series: &ReturnSeries, config: &Value) -> String {
    let mut out = header_line(config);
    out.push_str(RETURNS_COLUMNS);
    out.push('\n');
    for e in &series.entries {
        out.push_str(&format!("{},{},{},{}\n", e.s, float(e.value), float(e.stderr), e.n));
    }
    out
}

pub fn read_returns_csv(text: &str) -> Result<(Value, ReturnSeries)> {
    let (config, body) = read_header(text)?;
    let entries = data_rows(body, RETURNS_COLUMNS)?
        .into_iter()
        .map(|(n, f)| {
            Ok(SeriesEntry { s: num(n, f[0])?, value: num(n, f[1])?, stderr: num(n, f[2])?, n: num(n, f[3])? })
        })
        .collect::<Result<_>>()?;
    Ok((config, ReturnSeries { entries }))
}

pub fn write_events_csv(rows: &[EventRow], config: &Value) -> String {
    let mut out = header_line(config);
    out.push_str(EVENTS_COLUMNS);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.t, float(r.freq), float(r.stderr), r.n));
    }
    out
}

pub fn read_events_csv(text: &str) -> Result<(Value, Vec<EventRow>)> {
    let (config, body) = read_header(text)?;
    let rows = data_rows(body, EVENTS_COLUMNS)?
        .into_iter()
        .map(|(n, f)| Ok(EventRow { t: num(n, f[0])?, freq: num(n, f[1])?, stderr: num(n, f[2])?, n: num(n, f[3])? }))
        .collect::<Result<_>>()?;
    Ok((config, rows))
}

pub fn write_fit_csv(fits: &[FitResult], config: &Value) -> String {
    let mut out = header_line(config);
    out.push_str(FIT_COLUMNS);
    out.push('\n');
    for f in fits {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            f.window.0,
            f.window.1,
            float(f.beta_hat),
            float(f.c_hat),
            float(f.r_squared)
        ));
    }
    out
}

/// `(t_lo, t_hi, beta_hat, c_hat, r_squared)`.
pub type FitRow = (u32, u32, f64, f64, f64);

pub fn read_fit_csv(text: &str) -> Result<(Value, Vec<FitRow>)> {
    let (config, body) = read_header(text)?;
    let rows = data_rows(body, FIT_COLUMNS)?
        .into_iter()
        .map(|(n, f)| Ok((num(n, f[0])?, num(n, f[1])?, num(n, f[2])?, num(n, f[3])?, num(n, f[4])?)))
        .collect::<Result<_>>()?;
    Ok((config, rows))
}

/// Rows `(t, bound_t, fraction of trees above bound_t)`.
pub fn write_bounds_csv(rows: &[(u32, f64, f64)], config: &Value) -> String {
    let mut out = header_line(config);
    out.push_str(BOUNDS_COLUMNS);
    out.push('\n');
    for &(t, bound, frac) in rows {
        out.push_str(&format!("{t},{},{}\n", float(bound), float(frac)));
    }
    out
}

/// `payload` (a JSON object) with the config added under `"config"`.
pub fn json_with_config(payload: Value, config: &Value) -> Result<String> {
    let Value::Object(mut map) = payload else {
        return Err(Error::InvalidParameter("JSON payload must be an object".into()));
    };
    map.insert("config".into(), config.clone());
    serde_json::to_string_pretty(&Value::Object(map)).map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// Parses a JSON artifact and splits off its config.
pub fn read_json_with_config(text: &str) -> Result<(Value, Value)> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let config = value
        .as_object_mut()
        .and_then(|m| m.remove("config"))
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing \"config\" key".into() })?;
    Ok((config, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn returns_round_trip() {
        let series = ReturnSeries::exact(&[1.0, 0.0, 1.0 / 3.0, 0.0, 0.1 + 0.2]);
        let cfg = json!({"seed": 7});
        let text = write_returns_csv(&series, &cfg);
        assert!(text.starts_with("# config: {\"seed\":7}\ns,value,stderr,n\n"));
        let (c, back) = read_returns_csv(&text).unwrap();
        assert_eq!(c, cfg);
        assert_eq!(back, series);
    }

    #[test]
    fn headerless_files_are_refused() {
        assert!(matches!(read_returns_csv("s,value,stderr,n\n0,1,0,1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(read_json_with_config("{\"q\": 1}").is_err());
        let bad_cols = "# config: {}\nt,value\n";
        assert!(matches!(read_returns_csv(bad_cols), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn json_config_key() {
        let text = json_with_config(json!({"q": "1/2"}), &json!({"seed": 1})).unwrap();
        let (c, body) = read_json_with_config(&text).unwrap();
        assert_eq!(c, json!({"seed": 1}));
        assert_eq!(body, json!({"q": "1/2"}));
    }

    #[test]
    fn fits_and_events_round_trip() {
        let fit = FitResult { c_hat: 0.2, beta_hat: 1.0, r_squared: 1.0, window: (3, 9), points: 7 };
        let (_, rows) = read_fit_csv(&write_fit_csv(&[fit], &json!({}))).unwrap();
        assert_eq!(rows, vec![(3, 9, 1.0, 0.2, 1.0)]);
        let ev = EventRow { t: 2, freq: 0.25, stderr: 0.01, n: 400 };
        let (_, back) = read_events_csv(&write_events_csv(&[ev], &json!({}))).unwrap();
        assert_eq!(back, vec![ev]);
    }
}
