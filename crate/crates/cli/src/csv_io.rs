//! Trajectory CSV: columns `k,t,x,u,f,b,event`, one row per sampling instant
//! followed by that interval's dense rows (`event=dense`). Reals are written
//! with 17 significant digits so parsing restores them bit for bit.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use ptc_core::Trajectory;

pub const HEADER: [&str; 7] = ["k", "t", "x", "u", "f", "b", "event"];

/// One parsed CSV row. `u`, `f`, `b` are absent on the final instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub k: usize,
    pub t: f64,
    pub x: f64,
    pub u: Option<f64>,
    pub f: Option<f64>,
    pub b: Option<f64>,
    pub event: String,
}

impl Row {
    pub fn is_dense(&self) -> bool {
        self.event == "dense"
    }
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map_or(String::new(), real)
}

/// Rows in file order.
pub fn rows(traj: &Trajectory) -> Vec<Row> {
    let mut out = Vec::with_capacity(traj.steps.len() + traj.dense.len());
    let last = traj.steps.len().saturating_sub(1);
    let mut dense = traj.dense.iter().peekable();
    for (i, s) in traj.steps.iter().enumerate() {
        let mut tags = Vec::new();
        if traj.events.converged_at == Some(s.k) {
            tags.push("converged");
        }
        if i == last {
            tags.push(if traj.events.overflow {
                "overflow"
            } else if traj.events.truncated {
                "truncated"
            } else {
                "end"
            });
        }
        if tags.is_empty() {
            tags.push("sample");
        }
        out.push(Row {
            k: s.k,
            t: s.t,
            x: s.x,
            u: s.hold.map(|h| h.u),
            f: s.hold.map(|h| h.f),
            b: s.hold.map(|h| h.b),
            event: tags.join("+"),
        });
        while let Some(d) = dense.next_if(|d| d.k == s.k) {
            out.push(Row {
                k: d.k,
                t: d.t,
                x: d.x,
                u: s.hold.map(|h| h.u),
                f: s.hold.map(|h| h.f),
                b: s.hold.map(|h| h.b),
                event: "dense".into(),
            });
        }
    }
    out
}

pub fn write_csv(traj: &Trajectory, sink: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for r in rows(traj) {
        w.write_record([
            r.k.to_string(),
            real(r.t),
            real(r.x),
            opt_real(r.u),
            opt_real(r.f),
            opt_real(r.b),
            r.event,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(source: impl Read) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(source);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        bail!("unexpected CSV header {header:?}, expected {HEADER:?}");
    }
    let parse_opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            Ok(Some(s.parse().with_context(|| format!("bad real `{s}`"))?))
        }
    };
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).with_context(|| format!("line {line}: missing column {}", HEADER[j]));
        out.push(Row {
            k: field(0)?.parse().with_context(|| format!("line {line}: bad k"))?,
            t: field(1)?.parse().with_context(|| format!("line {line}: bad t"))?,
            x: field(2)?.parse().with_context(|| format!("line {line}: bad x"))?,
            u: parse_opt(field(3)?)?,
            f: parse_opt(field(4)?)?,
            b: parse_opt(field(5)?)?,
            event: field(6)?.to_string(),
        });
    }
    Ok(out)
}
