//! CSV serialization of traces and generic two-column data files.
//!
//! Trace files carry optional `# key: value` metadata comment lines, then
//! the header `field_mT,signal`, then numeric rows. Values are written with
//! 17 significant digits so a write/read round trip reproduces every f64
//! bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::spectrum::{SpectrumError, SpectrumTrace, TraceMeta};

pub const TRACE_HEADER: &str = "field_mT,signal";

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("missing header line '{expected}'")]
    MissingHeader { expected: String },
    #[error("row {row}: expected two comma-separated numbers, got '{text}'")]
    MalformedRow { row: usize, text: String },
    #[error("row {row}: field column is not strictly increasing")]
    NonMonotoneField { row: usize },
    #[error(transparent)]
    Trace(#[from] SpectrumError),
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// Serialises a trace: metadata comments, header, then one row per sample.
pub fn trace_to_string(trace: &SpectrumTrace) -> String {
    let mut out = String::new();
    let meta = &trace.meta;
    let mut push_meta = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            let _ = writeln!(out, "# {key}: {v}");
        }
    };
    push_meta("mw_frequency_ghz", meta.mw_frequency_ghz.map(fmt_f64));
    push_meta("theta_rad", meta.theta_rad.map(fmt_f64));
    push_meta("temperature_k", meta.temperature_k.map(fmt_f64));
    push_meta("pump_power_mw", meta.pump_power_mw.map(fmt_f64));
    push_meta("q_factor", meta.q_factor.map(fmt_f64));
    push_meta("modulation_note", meta.modulation_note.clone());

    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (b, s) in trace.field_mt().iter().zip(trace.signal()) {
        let _ = writeln!(out, "{},{}", fmt_f64(*b), fmt_f64(*s));
    }
    out
}

pub fn write_trace(path: &Path, trace: &SpectrumTrace) -> Result<(), TraceIoError> {
    std::fs::write(path, trace_to_string(trace)).map_err(|source| TraceIoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_trace(path: &Path) -> Result<SpectrumTrace, TraceIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| TraceIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    trace_from_string(&text)
}

pub fn trace_from_string(text: &str) -> Result<SpectrumTrace, TraceIoError> {
    let mut meta = TraceMeta::default();
    let mut lines = text.lines().enumerate().peekable();

    while let Some((_, line)) = lines.peek() {
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "mw_frequency_ghz" => meta.mw_frequency_ghz = value.parse().ok(),
                    "theta_rad" => meta.theta_rad = value.parse().ok(),
                    "temperature_k" => meta.temperature_k = value.parse().ok(),
                    "pump_power_mw" => meta.pump_power_mw = value.parse().ok(),
                    "q_factor" => meta.q_factor = value.parse().ok(),
                    "modulation_note" => meta.modulation_note = Some(value.to_string()),
                    _ => {} // foreign comments are permitted and ignored
                }
            }
            lines.next();
        } else if trimmed.is_empty() {
            lines.next();
        } else {
            break;
        }
    }

    match lines.next() {
        Some((_, line)) if line.trim() == TRACE_HEADER => {}
        _ => {
            return Err(TraceIoError::MissingHeader { expected: TRACE_HEADER.to_string() });
        }
    }

    let mut field = Vec::new();
    let mut signal = Vec::new();
    for (idx, line) in lines {
        let row = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (b, s) = parse_two_columns(trimmed).ok_or_else(|| TraceIoError::MalformedRow {
            row,
            text: trimmed.to_string(),
        })?;
        if let Some(&last) = field.last() {
            if b <= last {
                return Err(TraceIoError::NonMonotoneField { row });
            }
        }
        field.push(b);
        signal.push(s);
    }

    Ok(SpectrumTrace::new(field, signal, meta)?)
}

fn parse_two_columns(line: &str) -> Option<(f64, f64)> {
    let (a, b) = line.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Reads a generic two-column CSV (e.g. `power_mw,delta_p` samples for the
/// saturation fit). The header must match exactly.
pub fn read_xy_csv(path: &Path, expected_header: &str) -> Result<Vec<(f64, f64)>, TraceIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| TraceIoError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !saw_header {
            if trimmed != expected_header {
                return Err(TraceIoError::MissingHeader { expected: expected_header.to_string() });
            }
            saw_header = true;
            continue;
        }
        let pair = parse_two_columns(trimmed).ok_or_else(|| TraceIoError::MalformedRow {
            row: idx + 1,
            text: trimmed.to_string(),
        })?;
        rows.push(pair);
    }
    if !saw_header {
        return Err(TraceIoError::MissingHeader { expected: expected_header.to_string() });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_trace() -> SpectrumTrace {
        let field: Vec<f64> = (0..64).map(|i| 330.0 + 0.013 * i as f64).collect();
        let signal: Vec<f64> = field.iter().map(|b| (b * 0.37).sin() * 1.3e-3).collect();
        let meta = TraceMeta {
            mw_frequency_ghz: Some(9.3),
            theta_rad: Some(0.9553),
            temperature_k: Some(300.0),
            pump_power_mw: Some(50.0),
            q_factor: Some(17000.0),
            modulation_note: Some("analytic first derivative".into()),
        };
        SpectrumTrace::new(field, signal, meta).unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let trace = sample_trace();
        let text = trace_to_string(&trace);
        let back = trace_from_string(&text).unwrap();
        assert_eq!(back.field_mt(), trace.field_mt());
        assert_eq!(back.signal(), trace.signal());
        assert_eq!(back.meta, trace.meta);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let trace = sample_trace();
        write_trace(&path, &trace).unwrap();
        let back = read_trace(&path).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn missing_header_is_an_explicit_error() {
        let text = "330.0,0.1\n330.1,0.2\n";
        assert!(matches!(
            trace_from_string(text),
            Err(TraceIoError::MissingHeader { .. })
        ));
    }

    #[test]
    fn shuffled_field_column_rejected() {
        let text = "field_mT,signal\n330.0,0.1\n331.0,0.2\n330.5,0.3\n";
        assert!(matches!(
            trace_from_string(text),
            Err(TraceIoError::NonMonotoneField { row: 4 })
        ));
    }

    #[test]
    fn malformed_row_carries_its_number() {
        let text = "field_mT,signal\n330.0,0.1\nthirty,0.2\n";
        match trace_from_string(text) {
            Err(TraceIoError::MalformedRow { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected malformed-row error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_comments_are_ignored() {
        let text = "# instrument: breadboard\n# q_factor: 84000\nfield_mT,signal\n1.0,0.0\n2.0,0.0\n";
        let trace = trace_from_string(text).unwrap();
        assert_eq!(trace.meta.q_factor, Some(84000.0));
        assert_eq!(trace.meta.mw_frequency_ghz, None);
    }

    #[test]
    fn xy_csv_reads_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sat.csv");
        std::fs::write(&path, "power_mw,delta_p\n0.0,0.0\n10.0,0.011\n").unwrap();
        let rows = read_xy_csv(&path, "power_mw,delta_p").unwrap();
        assert_eq!(rows, vec![(0.0, 0.0), (10.0, 0.011)]);

        std::fs::write(&path, "watts,delta_p\n0.0,0.0\n").unwrap();
        assert!(matches!(
            read_xy_csv(&path, "power_mw,delta_p"),
            Err(TraceIoError::MissingHeader { .. })
        ));
    }
}
