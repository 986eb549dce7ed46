use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::metrics::mean_std;

/// Mean and standard deviation of cumulative regret per round.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub rounds: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Bands keyed by `(regime, kernel)` then policy.
pub type RegretBands = BTreeMap<(String, String), BTreeMap<String, Band>>;

fn format_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), detail: detail.into() }
}

fn columns(path: &Path, rdr: &mut csv::Reader<std::fs::File>, names: &[&str]) -> Result<Vec<usize>> {
    let header = rdr.headers()?.clone();
    names
        .iter()
        .map(|n| header.iter().position(|h| h == *n).ok_or_else(|| format_err(path, format!("missing column {n:?}"))))
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, c: usize, row: usize) -> Result<T> {
    rec.get(c)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format_err(path, format!("row {row}: bad value in column {c}")))
}

/// Read `regret.csv` and aggregate over seeds.
pub fn regret_bands(path: &Path) -> Result<RegretBands> {
    let mut rdr = csv::Reader::from_path(path)?;
    let c = columns(path, &mut rdr, &["regime", "kernel", "policy", "round", "cum_regret"])?;
    let mut acc: BTreeMap<(String, String), BTreeMap<String, BTreeMap<usize, Vec<f64>>>> = BTreeMap::new();
    for (j, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let round: usize = field(path, &rec, c[3], j + 1)?;
        let value: f64 = field(path, &rec, c[4], j + 1)?;
        acc.entry((rec[c[0]].to_string(), rec[c[1]].to_string()))
            .or_default()
            .entry(rec[c[2]].to_string())
            .or_default()
            .entry(round)
            .or_default()
            .push(value);
    }
    Ok(acc
        .into_iter()
        .map(|(cell, policies)| {
            let bands = policies
                .into_iter()
                .map(|(p, rounds)| {
                    let mut band = Band { rounds: Vec::new(), mean: Vec::new(), std: Vec::new() };
                    for (t, xs) in rounds {
                        let (m, s) = mean_std(&xs);
                        band.rounds.push(t);
                        band.mean.push(m);
                        band.std.push(s);
                    }
                    (p, band)
                })
                .collect();
            (cell, bands)
        })
        .collect())
}

/// Read `kernels.csv` into `family -> resource -> weights`.
pub fn read_kernels(path: &Path) -> Result<BTreeMap<String, BTreeMap<usize, Vec<f64>>>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let c = columns(path, &mut rdr, &["family", "resource", "tau", "weight"])?;
    let mut out: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for (j, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let r: usize = field(path, &rec, c[1], j + 1)?;
        let tau: usize = field(path, &rec, c[2], j + 1)?;
        let w: f64 = field(path, &rec, c[3], j + 1)?;
        let ws = out.entry(rec[c[0]].to_string()).or_default().entry(r).or_default();
        if ws.len() != tau {
            return Err(format_err(path, format!("row {}: lags out of order", j + 1)));
        }
        ws.push(w);
    }
    Ok(out)
}

const PALETTE: [&str; 9] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666", "#1f78b4"];
const W: f64 = 720.0;
const H: f64 = 440.0;
const PAD: f64 = 56.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0).max(1e-12) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0).max(1e-12) * (H - 2.0 * PAD)
    }
}

fn header(svg: &mut String, title: &str, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>
<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>
<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{ylabel}</text>
"#,
        W / 2.0,
        H - PAD,
        W - PAD,
        H - PAD,
        H - PAD,
        W / 2.0,
        H - 12.0,
        H / 2.0,
        H / 2.0,
    );
    for (v, anchor_x, anchor_y, is_x) in [
        (frame.x0, frame.px(frame.x0), H - PAD + 16.0, true),
        (frame.x1, frame.px(frame.x1), H - PAD + 16.0, true),
        (frame.y0, PAD - 6.0, frame.py(frame.y0) + 4.0, false),
        (frame.y1, PAD - 6.0, frame.py(frame.y1) + 4.0, false),
    ] {
        let anchor = if is_x { "middle" } else { "end" };
        let _ = writeln!(svg, r#"<text x="{anchor_x:.1}" y="{anchor_y:.1}" text-anchor="{anchor}">{}</text>"#, tick(v));
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.trunc() { format!("{v:.0}") } else { format!("{v:.3}") }
}

fn polyline(frame: &Frame, xs: &[f64], ys: &[f64]) -> String {
    xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y))).collect::<Vec<_>>().join(" ")
}

/// Mean line plus a ±1 std band for every policy.
pub fn regret_svg(title: &str, bands: &BTreeMap<String, Band>) -> String {
    let mut x1: f64 = 1.0;
    let mut y0: f64 = 0.0;
    let mut y1: f64 = 0.0;
    for b in bands.values() {
        x1 = x1.max(b.rounds.last().copied().unwrap_or(1) as f64);
        for (m, s) in b.mean.iter().zip(&b.std) {
            y0 = y0.min(m - s);
            y1 = y1.max(m + s);
        }
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let frame = Frame { x0: 0.0, x1, y0, y1 };
    let mut svg = String::new();
    header(&mut svg, title, &frame, "round", "cumulative regret");
    for (j, (policy, b)) in bands.iter().enumerate() {
        let color = PALETTE[j % PALETTE.len()];
        let xs: Vec<f64> = b.rounds.iter().map(|&t| t as f64).collect();
        let upper: Vec<f64> = b.mean.iter().zip(&b.std).map(|(m, s)| m + s).collect();
        let lower: Vec<f64> = b.mean.iter().zip(&b.std).map(|(m, s)| m - s).collect();
        let mut rxs = xs.clone();
        rxs.reverse();
        let mut rlower = lower.clone();
        rlower.reverse();
        let _ = writeln!(
            svg,
            r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
            polyline(&frame, &xs, &upper),
            polyline(&frame, &rxs, &rlower)
        );
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            polyline(&frame, &xs, &b.mean)
        );
        let ly = PAD + 16.0 * j as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{2}" y="{3}">{policy}</text>"#,
            W - PAD - 110.0,
            W - PAD - 92.0,
            W - PAD - 86.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// One line per resource over normalized lag.
pub fn kernel_svg(title: &str, kernels: &BTreeMap<usize, Vec<f64>>) -> String {
    let y1 = kernels.values().flatten().copied().fold(0.0, f64::max).max(1e-12) * 1.05;
    let frame = Frame { x0: 0.0, x1: 1.0, y0: 0.0, y1 };
    let mut svg = String::new();
    header(&mut svg, title, &frame, "normalized lag", "weight");
    for (j, (r, ws)) in kernels.iter().enumerate() {
        let color = PALETTE[j % PALETTE.len()];
        let n = ws.len() as f64;
        let xs: Vec<f64> = (0..ws.len()).map(|tau| (tau as f64 + 0.5) / n).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#,
            polyline(&frame, &xs, ws)
        );
        let ly = PAD + 16.0 * j as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="3"/><text x="{2}" y="{3}">resource {r}</text>"#,
            W - PAD - 110.0,
            W - PAD - 92.0,
            W - PAD - 86.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write `regret_<regime>_<kernel>.svg` per grid cell and
/// `kernels_<family>.svg` per family into `<report_dir>/plots`.
pub fn render_plots(report_dir: &Path) -> Result<Vec<PathBuf>> {
    let out_dir = report_dir.join("plots");
    std::fs::create_dir_all(&out_dir)?;
    let mut written = Vec::new();
    for ((regime, kernel), bands) in regret_bands(&report_dir.join("regret.csv"))? {
        let path = out_dir.join(format!("regret_{regime}_{kernel}.svg"));
        std::fs::write(&path, regret_svg(&format!("Cumulative regret: {regime}, {kernel}"), &bands))?;
        written.push(path);
    }
    let kpath = report_dir.join("kernels.csv");
    if kpath.exists() {
        for (family, kernels) in read_kernels(&kpath)? {
            let path = out_dir.join(format!("kernels_{family}.svg"));
            std::fs::write(&path, kernel_svg(&format!("Delay kernels: {family}"), &kernels))?;
            written.push(path);
        }
    }
    Ok(written)
}
