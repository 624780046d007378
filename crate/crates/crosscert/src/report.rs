//! CSV and JSON writers for verdict grids and accumulators.
//!
//! Numbers are rendered with 17 significant digits so every output is
//! byte-identical across runs and round-trips to the same f64.

use std::fmt::Write as _;

use crate::crossing::{Verdict, VerdictGrid};
use crate::hough::{Accumulator, Detection};

/// 17-significant-digit rendering of a float.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    format!("{x:.16e}")
}

/// JSON string escaping for the small fixed schemas used here.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn json_array<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    let inner: Vec<String> = items.iter().map(f).collect();
    format!("[{}]", inner.join(","))
}

/// One row per cell: multi-index, center coordinates, verdict in
/// {0,1,Z}, |f(p)|, B1, B2, R. Missing B2/R render as empty fields.
pub fn verdict_grid_csv(grid: &VerdictGrid, var_names: &[String]) -> String {
    let dim = grid.disc.dim();
    let mut out = String::new();
    for k in 0..dim {
        let _ = write!(out, "j{},", k + 1);
    }
    for name in var_names {
        let _ = write!(out, "{name},");
    }
    out.push_str("verdict,abs_f,B1,B2,R\n");
    for flat in 0..grid.cells.len() {
        let idx = grid.disc.multi_index(flat);
        let center = grid.disc.center(&idx);
        for j in &idx {
            let _ = write!(out, "{j},");
        }
        for c in &center {
            let _ = write!(out, "{},", fmt_f64(*c));
        }
        let cell = &grid.cells[flat];
        let _ = write!(
            out,
            "{},{},{},",
            cell.verdict,
            fmt_f64(cell.abs_f),
            fmt_f64(cell.b1)
        );
        if let Some(b2) = cell.b2 {
            let _ = write!(out, "{}", fmt_f64(b2));
        }
        out.push(',');
        if let Some(r) = cell.radius {
            let _ = write!(out, "{}", fmt_f64(r));
        }
        out.push('\n');
    }
    out
}

/// Summary of a sweep: grid shape and per-verdict counts.
pub fn verdict_grid_json(grid: &VerdictGrid) -> String {
    format!(
        "{{\"shape\":{},\"counts\":{{\"no\":{},\"yes\":{},\"unknown\":{}}}}}",
        json_array(grid.disc.counts(), |c| c.to_string()),
        grid.count(Verdict::No),
        grid.count(Verdict::Yes),
        grid.count(Verdict::Unknown),
    )
}

/// One row per parameter cell: multi-index, center, yes and unknown counts.
pub fn accumulator_csv(acc: &Accumulator, param_names: &[String]) -> String {
    let dim = acc.disc.dim();
    let mut out = String::new();
    for k in 0..dim {
        let _ = write!(out, "j{},", k + 1);
    }
    for name in param_names {
        let _ = write!(out, "{name},");
    }
    out.push_str("yes,unknown\n");
    for flat in 0..acc.yes.len() {
        let idx = acc.disc.multi_index(flat);
        for j in &idx {
            let _ = write!(out, "{j},");
        }
        for c in &acc.disc.center(&idx) {
            let _ = write!(out, "{},", fmt_f64(*c));
        }
        let _ = writeln!(out, "{},{}", acc.yes[flat], acc.unknown[flat]);
    }
    out
}

/// Recognition report: winning parameter point, votes, ties, shape.
pub fn detection_json(acc: &Accumulator, det: &Detection) -> String {
    format!(
        "{{\"lambda\":{},\"votes\":{},\"ties\":{},\"unknown_at_peak\":{},\"shape\":{},\"num_points\":{},\"skipped_degenerate\":{}}}",
        json_array(&det.lambda, |x| fmt_f64(*x)),
        det.votes,
        json_array(&det.ties, |idx| json_array(idx, |j| j.to_string())),
        det.unknown_at_peak,
        json_array(acc.disc.counts(), |c| c.to_string()),
        acc.num_points,
        acc.skipped_degenerate,
    )
}

/// Points CSV: header row with the image variable names, one point per
/// line.
pub fn points_csv(points: &[Vec<f64>], var_names: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&var_names.join(","));
    out.push('\n');
    for p in points {
        let row: Vec<String> = p.iter().map(|x| fmt_f64(*x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parse a points CSV produced by [`points_csv`] (or hand-written with
/// the same shape). Returns the header names and the points.
pub fn parse_points_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty points file")?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let mut row = Vec::with_capacity(names.len());
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| format!("line {}: {e}", lineno + 2))?;
            row.push(v);
        }
        if row.len() != names.len() {
            return Err(format!(
                "line {}: expected {} fields, got {}",
                lineno + 2,
                names.len(),
                row.len()
            ));
        }
        points.push(row);
    }
    Ok((names, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::CertMode;
    use crate::crossing::{crossing_area, discretize, RadiusPolicy};
    use crate::parse::parse_poly;
    use crate::poly::VarSpace;

    #[test]
    fn float_format_roundtrips() {
        for x in [0.1, -67.5, 1.0 / 3.0, 2.25e-12, 0.0] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn grid_csv_and_json_are_stable() {
        let s = VarSpace::new(vec!["x", "y"]).unwrap();
        let f = parse_poly("x + y - 1", &s).unwrap();
        let d = discretize(&[(0.0, 1.0), (0.0, 1.0)], &[0.5, 0.5]).unwrap();
        let grid = crossing_area(&f, &d, CertMode::Exact, RadiusPolicy::Auto).unwrap();
        let csv1 = verdict_grid_csv(&grid, s.names());
        let grid2 = crossing_area(&f, &d, CertMode::Exact, RadiusPolicy::Auto).unwrap();
        let csv2 = verdict_grid_csv(&grid2, s.names());
        assert_eq!(csv1, csv2);
        assert_eq!(csv1.lines().count(), 10); // header + 9 cells
        let json = verdict_grid_json(&grid);
        assert!(json.starts_with("{\"shape\":[3,3]"));
    }

    #[test]
    fn points_csv_roundtrip() {
        let pts = vec![vec![0.45, 2.0], vec![4.25, 0.0]];
        let names = vec!["x".to_string(), "y".to_string()];
        let text = points_csv(&pts, &names);
        let (names2, pts2) = parse_points_csv(&text).unwrap();
        assert_eq!(names2, names);
        assert_eq!(pts2, pts);
    }
}
