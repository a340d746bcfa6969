//! Panel CSV serialization. The header names every column: per period j the
//! covariate block `x{j}_1..x{j}_{d}`, then `z{j}`, `w{j}`, and the outcome
//! `y{j+1}`. The post-final covariate block is not stored and must be empty.
//!
//! Floats are written with the shortest round-tripping representation, so
//! write/read/write is byte-identical.

use latre::{LatentRecord, PanelDataset};
use std::fmt::Write as _;

/// Column layout recovered from a header row.
struct HeaderShape {
    horizon: usize,
    dims: Vec<usize>,
}

fn parse_header(line: &str) -> Result<HeaderShape, String> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    let mut dims = Vec::new();
    let mut i = 0;
    let mut j = 0;
    loop {
        let mut d = 0;
        while i < cols.len() && cols[i] == format!("x{j}_{}", d + 1) {
            d += 1;
            i += 1;
        }
        for name in [format!("z{j}"), format!("w{j}"), format!("y{}", j + 1)] {
            match cols.get(i) {
                Some(&got) if got == name => i += 1,
                Some(&got) => {
                    return Err(format!(
                        "header column {}: expected \"{name}\", got \"{got}\"",
                        i + 1
                    ))
                }
                None => return Err(format!("header ends early: expected \"{name}\"")),
            }
        }
        dims.push(d);
        j += 1;
        if i == cols.len() {
            break;
        }
    }
    // The block after the last treatment period is never serialized.
    dims.push(0);
    Ok(HeaderShape { horizon: j - 1, dims })
}

/// Renders a panel to CSV text. Fails if the post-final covariate block is
/// nonempty, since the schema has no columns for it.
pub fn panel_to_csv(data: &PanelDataset) -> Result<String, String> {
    let t = data.horizon();
    let dims = data.dims();
    if dims[t + 1] != 0 {
        return Err(String::from(
            "panel has covariates after the final treatment period; the CSV schema cannot hold them",
        ));
    }
    let mut header = Vec::new();
    for j in 0..=t {
        for k in 1..=dims[j] {
            header.push(format!("x{j}_{k}"));
        }
        header.push(format!("z{j}"));
        header.push(format!("w{j}"));
        header.push(format!("y{}", j + 1));
    }
    let mut s = header.join(",");
    s.push('\n');
    for p in data.iter_paths() {
        for j in 0..=t {
            for v in p.x(j) {
                let _ = write!(s, "{v},");
            }
            let _ = write!(s, "{},{},{}", p.z(j), p.w(j), p.y(j + 1));
            s.push(if j == t { '\n' } else { ',' });
        }
    }
    Ok(s)
}

/// Parses CSV text into a panel. Errors carry the 1-based file row number.
/// Value-level problems (nonbinary z, non-finite reals) are left for
/// validation, but fields that fail to parse at all are rejected here.
pub fn panel_from_csv(text: &str) -> Result<PanelDataset, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty input: missing header row")?;
    let shape = parse_header(header.trim_end_matches('\r'))?;
    let t = shape.horizon;
    let ncols: usize = shape.dims[..=t].iter().sum::<usize>() + 3 * (t + 1);

    let mut x: Vec<Vec<f64>> = vec![Vec::new(); t + 2];
    let mut z: Vec<Vec<u8>> = vec![Vec::new(); t + 1];
    let mut w: Vec<Vec<u8>> = vec![Vec::new(); t + 1];
    let mut y: Vec<Vec<f64>> = vec![Vec::new(); t + 1];

    for (idx, raw) in lines.enumerate() {
        let row = idx + 2;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncols {
            return Err(format!(
                "row {row}: expected {ncols} fields, found {}",
                fields.len()
            ));
        }
        let mut it = fields.iter().map(|f| f.trim());
        for j in 0..=t {
            for k in 0..shape.dims[j] {
                let tok = it.next().unwrap();
                let v: f64 = tok.parse().map_err(|_| {
                    format!("row {row}: column x{j}_{}: bad number \"{tok}\"", k + 1)
                })?;
                x[j].push(v);
            }
            let tok = it.next().unwrap();
            let zv: u8 = tok
                .parse()
                .map_err(|_| format!("row {row}: column z{j}: bad integer \"{tok}\""))?;
            z[j].push(zv);
            let tok = it.next().unwrap();
            let wv: u8 = tok
                .parse()
                .map_err(|_| format!("row {row}: column w{j}: bad integer \"{tok}\""))?;
            w[j].push(wv);
            let tok = it.next().unwrap();
            let yv: f64 = tok.parse().map_err(|_| {
                format!("row {row}: column y{}: bad number \"{tok}\"", j + 1)
            })?;
            y[j].push(yv);
        }
    }
    if z[0].is_empty() {
        return Err(String::from("no data rows after the header"));
    }
    PanelDataset::from_columns(t, shape.dims.clone(), x, z, w, y).map_err(|e| e.to_string())
}

/// Renders the generator's latent draws, one row per path.
pub fn latents_to_csv(latents: &[LatentRecord]) -> String {
    let mut s = String::from("eps0,eps1,w0_0,w0_1,w1_0,w1_1\n");
    for r in latents {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.eps0, r.eps1, r.w0_0, r.w0_1, r.w1_0, r.w1_1
        );
    }
    s
}
