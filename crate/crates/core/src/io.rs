//! CSV layouts: comma separated, `.` decimals, header row, LF line ends.
//! Floats are written in shortest round-trip form.

use std::io::{Read, Write};

use crate::atlas::RegionCell;
use crate::dirichlet::DirichletExpansion;
use crate::error::{Error, Result};
use crate::heteroclinic::Trajectory;
use crate::pde::Snapshot;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// A numeric table with a header row.
pub fn write_table<W, I>(w: W, header: &[&str], rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// `(n, q̄_n)`.
pub fn write_coefficients<W: Write>(w: W, s: &DirichletExpansion) -> Result<()> {
    write_table(w, &["n", "qbar"], s.coeffs.iter().enumerate().map(|(i, &q)| vec![(i + 1) as f64, q]))
}

/// `(t, u₂, series, u₁)` on `ts`; times at or beyond the horizon are skipped.
pub fn write_series_profile<W: Write>(w: W, s: &DirichletExpansion, ts: &[f64]) -> Result<()> {
    let rows = ts
        .iter()
        .filter_map(|&t| s.evaluate(t).ok().map(|v| vec![t, s.u2(t), v.value, s.u1(t)]));
    write_table(w, &["t", "u2", "series", "u1"], rows)
}

pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let rows = (0..traj.len()).map(|i| vec![traj.t[i], traj.u[i], traj.du[i]]);
    write_table(w, &["t", "u", "du"], rows)
}

/// Header `t, x_0, x_1, ...`; one row per snapshot with `t` first.
pub fn write_snapshots<W: Write>(w: W, x: &[f64], snapshots: &[Snapshot]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(std::iter::once("t".to_string()).chain(x.iter().map(|v| v.to_string())))?;
    for s in snapshots {
        out.write_record(std::iter::once(s.t).chain(s.u.iter().copied()).map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Inverse of [`write_snapshots`].
pub fn read_snapshots<R: Read>(r: R) -> Result<(Vec<f64>, Vec<Snapshot>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = rdr.records();
    let header = records.next().ok_or_else(|| Error::Io("empty snapshot file".into()))??;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Io(format!("bad number `{s}`: {e}")));
    let x = header.iter().skip(1).map(parse).collect::<Result<Vec<f64>>>()?;
    let mut snaps = Vec::new();
    for rec in records {
        let rec = rec?;
        let vals = rec.iter().map(parse).collect::<Result<Vec<f64>>>()?;
        if vals.len() != x.len() + 1 {
            return Err(Error::Io(format!("snapshot row has {} values, expected {}", vals.len(), x.len() + 1)));
        }
        snaps.push(Snapshot { t: vals[0], u: vals[1..].to_vec() });
    }
    Ok((x, snaps))
}

pub fn write_front_track<W: Write>(w: W, track: &[(f64, f64)]) -> Result<()> {
    write_table(w, &["t", "X"], track.iter().map(|&(t, x)| vec![t, x]))
}

pub fn write_profile<W: Write>(w: W, profile: &[(f64, f64)]) -> Result<()> {
    write_table(w, &["xi", "u"], profile.iter().map(|&(a, b)| vec![a, b]))
}

pub fn write_region_map<W: Write>(w: W, cells: &[RegionCell]) -> Result<()> {
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    let rows = cells
        .iter()
        .map(|c| vec![c.tau, c.ln_ln_p, c.p, b(c.in_frak_i), b(c.zeta_gt_lnp), b(c.flag)]);
    write_table(w, &["tau", "ln_ln_p", "p", "in_frak_i", "zeta_gt_lnp", "flag"], rows)
}
