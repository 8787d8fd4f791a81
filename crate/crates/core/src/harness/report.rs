//! Plots and a text summary for an experiment output directory.

use super::experiment::{SERIES_FILE, STAMP_FILE, VERDICT_FILE};
use crate::diagnostics::SeriesTable;
use crate::error::{NsasError, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Log-log plot of the chosen columns against the first column. Points with
/// non-positive coordinates are skipped.
pub fn write_loglog_svg(table: &SeriesTable, columns: &[&str], path: &Path) -> Result<()> {
    let mut curves = Vec::new();
    for &c in columns {
        let (x, y) = table.column(c)?;
        let pts: Vec<(f64, f64)> = x
            .iter()
            .zip(&y)
            .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
            .map(|(a, b)| (a.log10(), b.log10()))
            .collect();
        if pts.len() >= 2 {
            curves.push((c, pts));
        }
    }
    if curves.is_empty() {
        return Err(NsasError::Data("nothing positive to plot".into()));
    }
    let all = curves.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for d in (x0.floor() as i32)..=(x1.ceil() as i32) {
        let d = d as f64;
        if d < x0 || d > x1 {
            continue;
        }
        let _ = writeln!(
            s,
            r##"<line x1="{0:.1}" y1="{1}" x2="{0:.1}" y2="{2}" stroke="#ddd"/><text x="{0:.1}" y="{3}" text-anchor="middle">1e{4}</text>"##,
            sx(d),
            MARGIN,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 16.0,
            d
        );
    }
    for d in (y0.floor() as i32)..=(y1.ceil() as i32) {
        let d = d as f64;
        if d < y0 || d > y1 {
            continue;
        }
        let _ = writeln!(
            s,
            r##"<line x1="{1}" y1="{0:.1}" x2="{2}" y2="{0:.1}" stroke="#ddd"/><text x="{3}" y="{0:.1}" text-anchor="end">1e{4}</text>"##,
            sy(d),
            MARGIN,
            WIDTH - MARGIN,
            MARGIN - 6.0,
            d
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        table.columns[0]
    );
    for (k, (name, pts)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let ly = MARGIN + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{color}" stroke-width="2"/><text x="{3}" y="{4}">{name}</text>"#,
            WIDTH - MARGIN - 150.0,
            ly - 4.0,
            WIDTH - MARGIN - 130.0,
            WIDTH - MARGIN - 124.0,
            ly
        );
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s)?;
    Ok(())
}

/// Writes `loglog.svg` and `report.md` into `dir` from its `series.csv`,
/// `verdict.txt` and `stamp.txt`. Returns the written paths.
pub fn report(dir: &Path) -> Result<Vec<PathBuf>> {
    let table = SeriesTable::load(&dir.join(SERIES_FILE))?;
    let cols: Vec<&str> = table.columns.iter().skip(1).map(String::as_str).collect();
    // keep decaying norms; signed columns such as imaginary parts are skipped
    let plotted: Vec<&str> = cols
        .iter()
        .copied()
        .filter(|c| {
            table
                .column(c)
                .map(|(_, v)| !v.is_empty() && v.iter().all(|x| *x >= 0.0))
                .unwrap_or(false)
        })
        .collect();
    let svg = dir.join("loglog.svg");
    write_loglog_svg(&table, &plotted, &svg)?;
    let mut md = String::from("# Experiment report\n\n");
    for (title, file) in [("Verdict", VERDICT_FILE), ("Stamp", STAMP_FILE)] {
        if let Ok(text) = std::fs::read_to_string(dir.join(file)) {
            let _ = write!(md, "## {title}\n\n```\n{text}```\n\n");
        }
    }
    let _ = write!(
        md,
        "## Series\n\n{} samples of {}.\n\n![log-log](loglog.svg)\n",
        table.rows.len(),
        cols.join(", ")
    );
    let md_path = dir.join("report.md");
    std::fs::write(&md_path, md)?;
    Ok(vec![svg, md_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let mut t = SeriesTable::new(&["t", "a", "b", "c"]);
        for k in 1..20 {
            let x = k as f64;
            t.push(vec![Some(x), Some(x.powf(-0.5)), Some(1.0 / x), Some(-1.0)])
                .unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.svg");
        write_loglog_svg(&t, &["a", "b", "c"], &p).unwrap();
        let s = std::fs::read_to_string(&p).unwrap();
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(write_loglog_svg(&t, &["c"], &p).is_err());
    }

    #[test]
    fn report_reads_directory() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = SeriesTable::new(&["t", "a"]);
        t.push(vec![Some(1.0), Some(1.0)]).unwrap();
        t.push(vec![Some(2.0), Some(0.5)]).unwrap();
        t.save(&dir.path().join(SERIES_FILE)).unwrap();
        std::fs::write(dir.path().join(VERDICT_FILE), "status = PASS\n").unwrap();
        let files = report(dir.path()).unwrap();
        let md = std::fs::read_to_string(&files[1]).unwrap();
        assert!(md.contains("status = PASS"));
        assert!(files[0].exists());
        assert!(report(&dir.path().join("missing")).is_err());
    }
}
