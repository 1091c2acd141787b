//! CSV and JSON serialisation of arcs and domains.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::arc::{HybridArc, Interpolation, Piece};
use super::domain::Segment;
use crate::error::{Error, Result};

/// Domain metadata written next to a trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainHeader {
    pub delta: f64,
    pub segments: Vec<Segment>,
    pub interpolation: Interpolation,
}

impl DomainHeader {
    pub fn of(arc: &HybridArc, delta: f64) -> Self {
        Self {
            delta,
            segments: arc.domain().segments().to_vec(),
            interpolation: arc.interpolation(),
        }
    }
}

/// Format a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write `t, j, x0..x{n-1}` rows, one per sample, in domain order. When
/// `dx` is set, derivative columns `dx0..` follow.
pub fn write_arc_csv<W: Write>(arc: &HybridArc, w: W, with_derivatives: bool) -> Result<()> {
    let n = arc.dim();
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let mut header = vec!["t".to_string(), "j".to_string()];
    header.extend((0..n).map(|k| format!("x{k}")));
    if with_derivatives {
        header.extend((0..n).map(|k| format!("dx{k}")));
    }
    wtr.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(2 + 2 * n);
    for piece in arc.pieces() {
        for i in 0..piece.len() {
            row.clear();
            row.push(fmt_f64(piece.t[i]));
            row.push(piece.j.to_string());
            row.extend(piece.state(i, n).iter().map(|v| fmt_f64(*v)));
            if with_derivatives {
                match piece.deriv(i, n) {
                    Some(d) => row.extend(d.iter().map(|v| fmt_f64(*v))),
                    None => row.extend((0..n).map(|_| String::new())),
                }
            }
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Read an arc written by [`write_arc_csv`]. A row starts a new piece when
/// its `j` changes or its `t` does not increase (the repeated `(0, 0)` row
/// between the memory and forward parts).
pub fn read_arc_csv<R: Read>(r: R, interp: Interpolation) -> Result<HybridArc> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.len() < 3 || &headers[0] != "t" || &headers[1] != "j" {
        return Err(Error::Io("expected columns t, j, x0, ...".into()));
    }
    let n = headers.iter().filter(|h| h.starts_with('x')).count();
    let has_dx = headers.iter().any(|h| h.starts_with("dx"));
    let mut pieces: Vec<Piece> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Io(format!("row {}: missing column {k}", line + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::Io(format!("row {}: {e}", line + 2)))
        };
        let t = parse(0)?;
        let j: i64 = rec[1]
            .parse()
            .map_err(|e| Error::Io(format!("row {}: {e}", line + 2)))?;
        let x: Vec<f64> = (0..n).map(|k| parse(2 + k)).collect::<Result<_>>()?;
        let dx: Option<Vec<f64>> = if has_dx && rec.get(2 + n).is_some_and(|s| !s.is_empty()) {
            Some((0..n).map(|k| parse(2 + n + k)).collect::<Result<_>>()?)
        } else {
            None
        };
        let new_piece = match pieces.last() {
            None => true,
            Some(p) => p.j != j || t <= *p.t.last().unwrap(),
        };
        if new_piece {
            pieces.push(Piece {
                j,
                t: vec![t],
                x,
                dx: dx.clone().map(|d| d.to_vec()),
            });
        } else {
            let p = pieces.last_mut().unwrap();
            p.t.push(t);
            p.x.extend(x);
            match (&mut p.dx, dx) {
                (Some(all), Some(d)) => all.extend(d),
                (Some(_), None) => p.dx = None,
                _ => {}
            }
        }
    }
    if pieces.is_empty() {
        return Err(Error::Io("no samples".into()));
    }
    HybridArc::new(n, pieces, interp)
}

pub fn arc_to_csv_string(arc: &HybridArc, with_derivatives: bool) -> Result<String> {
    let mut buf = Vec::new();
    write_arc_csv(arc, &mut buf, with_derivatives)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}
