use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Direction, PolaritySummary, ReportError};

/// One speech exported for manual annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationItem {
    pub id: String,
    pub score: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParliamentReport {
    pub parliament: String,
    pub summary: PolaritySummary,
    pub histogram: Vec<u64>,
    #[serde(default)]
    pub validation: BTreeMap<Direction, Vec<ValidationItem>>,
    /// Set when the sample was smaller than requested.
    #[serde(default)]
    pub sample_shortfall: bool,
    /// Accuracy of manual checks on the exported lists, when available.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub manual_accuracy: BTreeMap<Direction, f64>,
    #[serde(default)]
    pub max_negative: bool,
    #[serde(default)]
    pub max_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub scorer: String,
    pub seed: Option<u64>,
    pub parliaments: Vec<ParliamentReport>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::File { path: path.display().to_string(), source }
}

/// Marks the rows holding the highest negative and positive share (all rows
/// on a tie).
fn flag_maxima(rows: &mut [ParliamentReport]) {
    let max_neg = rows.iter().map(|r| r.summary.pct_negative).fold(f64::NEG_INFINITY, f64::max);
    let max_pos = rows.iter().map(|r| r.summary.pct_positive).fold(f64::NEG_INFINITY, f64::max);
    for r in rows {
        r.max_negative = r.summary.pct_negative == max_neg;
        r.max_positive = r.summary.pct_positive == max_pos;
    }
}

fn histogram_svg(parliament: &str, counts: &[u64]) -> String {
    const W: f64 = 400.0;
    const H: f64 = 200.0;
    const PAD: f64 = 24.0;
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar_w = (W - 2.0 * PAD) / counts.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(parliament));
    let _ = writeln!(
        svg,
        r##"<line x1="{PAD}" y1="{y}" x2="{x2}" y2="{y}" stroke="#333"/>"##,
        y = H - PAD,
        x2 = W - PAD
    );
    for (i, &c) in counts.iter().enumerate() {
        let h = (H - 2.0 * PAD) * c as f64 / max;
        let x = PAD + i as f64 * bar_w;
        let _ = writeln!(
            svg,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="#4a78b5"><title>{lo:.2}-{hi:.2}: {c}</title></rect>"##,
            y = H - PAD - h,
            w = bar_w * 0.9,
            lo = i as f64 / counts.len() as f64,
            hi = (i + 1) as f64 / counts.len() as f64,
        );
    }
    for (label, x) in [("0", PAD), ("1", W - PAD)] {
        let _ = writeln!(svg, r#"<text x="{x}" y="{}" font-size="10" text-anchor="middle">{label}</text>"#, H - 8.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="14" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, escape(parliament));
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `summary.csv`, `histogram_<p>.svg`, `validation_<p>_<dir>.jsonl`
/// and `report.json` into `dir`. Returns the bundle with max flags set.
pub fn render_report(
    dir: &Path,
    scorer: &str,
    seed: Option<u64>,
    mut parliaments: Vec<ParliamentReport>,
) -> Result<ReportBundle, ReportError> {
    if parliaments.is_empty() {
        return Err(ReportError::NoParliaments);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    flag_maxima(&mut parliaments);

    let csv_path = dir.join("summary.csv");
    let mut csv = String::from("parliament,n,pct_negative,pct_neutral,pct_positive,max_negative,max_positive\n");
    for p in &parliaments {
        let s = &p.summary;
        let _ = writeln!(
            csv,
            "{},{},{:.2},{:.2},{:.2},{},{}",
            p.parliament, s.n, s.pct_negative, s.pct_neutral, s.pct_positive, p.max_negative, p.max_positive
        );
    }
    fs::write(&csv_path, csv).map_err(io_err(&csv_path))?;

    for p in &parliaments {
        let svg_path = dir.join(format!("histogram_{}.svg", p.parliament));
        fs::write(&svg_path, histogram_svg(&p.parliament, &p.histogram)).map_err(io_err(&svg_path))?;
        for (direction, items) in &p.validation {
            let path: PathBuf = dir.join(format!("validation_{}_{direction}.jsonl", p.parliament));
            let mut out = Vec::new();
            for item in items {
                serde_json::to_writer(&mut out, item).expect("validation item serializes");
                out.push(b'\n');
            }
            fs::File::create(&path).and_then(|mut f| f.write_all(&out)).map_err(io_err(&path))?;
        }
    }

    let bundle = ReportBundle { scorer: scorer.to_string(), seed, parliaments };
    let json_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(&bundle).expect("bundle serializes");
    fs::write(&json_path, json + "\n").map_err(io_err(&json_path))?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: &str, summary: PolaritySummary) -> ParliamentReport {
        ParliamentReport {
            parliament: p.into(),
            summary,
            histogram: vec![1, 2, 3, 0],
            validation: BTreeMap::new(),
            sample_shortfall: false,
            manual_accuracy: BTreeMap::new(),
            max_negative: false,
            max_positive: false,
        }
    }

    #[test]
    fn anchor_rows_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            row("SI", PolaritySummary::from_percentages(58.06, 22.14)),
            row("UK", PolaritySummary::from_percentages(27.34, 59.52)),
        ];
        let bundle = render_report(dir.path(), "fixture", Some(1), rows).unwrap();
        assert!(bundle.parliaments[0].max_negative && !bundle.parliaments[0].max_positive);
        assert!(bundle.parliaments[1].max_positive && !bundle.parliaments[1].max_negative);
        assert_eq!(bundle.parliaments[0].summary.pct_neutral, 19.8);
        assert_eq!(bundle.parliaments[1].summary.pct_neutral, 13.14);

        let csv = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "SI,0,58.06,19.80,22.14,true,false");
        assert!(dir.path().join("histogram_SI.svg").exists());
        assert!(dir.path().join("histogram_UK.svg").exists());
        let back: ReportBundle =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(back, bundle);
    }

    #[test]
    fn validation_lists_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = row("BG", PolaritySummary::from_percentages(10.0, 10.0));
        r.validation.insert(
            Direction::Negative,
            vec![ValidationItem { id: "a".into(), score: 0.01, text: "full text".into() }],
        );
        render_report(dir.path(), "x", None, vec![r]).unwrap();
        let text = fs::read_to_string(dir.path().join("validation_BG_negative.jsonl")).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.contains("full text"));
    }

    #[test]
    fn empty_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(render_report(dir.path(), "x", None, vec![]), Err(ReportError::NoParliaments)));
    }
}
