//! Deterministic SVG scatter plots of planar data.

use std::f64::consts::PI;
use std::fmt::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use wca::io::NormSpec;
use wca::{AnisotropicDiagram, Clustering, NormFamily, SiteSet, SymMatrix, WeightedDataSet};

const SIZE: f64 = 640.0;
const MARGIN: f64 = 24.0;
const GRID: usize = 240;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f",
];

#[derive(Deserialize)]
struct DiagramFile {
    sites: Vec<Vec<f64>>,
    sizes: Vec<f64>,
    #[serde(rename = "A", default)]
    norms: NormSpec,
}

/// Reads `{"sites": …, "sizes": …, "A": …}` as written by `wca assign --diagram`.
pub fn read_diagram(path: &Path) -> Result<AnisotropicDiagram<f64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("opening {}", path.display()))?;
    let f: DiagramFile =
        serde_json::from_str(&text).with_context(|| format!("reading {}", path.display()))?;
    let sites = SiteSet::new(&f.sites)?;
    let norms = match f.norms {
        NormSpec::Matrices(ms) => NormFamily::new(
            ms.iter()
                .map(|m| SymMatrix::from_rows(m))
                .collect::<wca::Result<Vec<_>>>()?,
        )?,
        NormSpec::Named(_) => NormFamily::identity(sites.len(), sites.dim()),
    };
    Ok(AnisotropicDiagram::new(sites, f.sizes, norms)?)
}

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Frame {
    lo: [f64; 2],
    scale: f64,
}

impl Frame {
    fn new(pts: &[&[f64]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in pts {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let span = if span > 0.0 { span } else { 1.0 };
        let pad = 0.05 * span;
        Frame {
            lo: [lo[0] - pad, lo[1] - pad],
            scale: (SIZE - 2.0 * MARGIN) / (span + 2.0 * pad),
        }
    }

    fn map(&self, p: &[f64]) -> (f64, f64) {
        (
            MARGIN + (p[0] - self.lo[0]) * self.scale,
            SIZE - MARGIN - (p[1] - self.lo[1]) * self.scale,
        )
    }

    fn unmap(&self, u: f64, v: f64) -> [f64; 2] {
        [
            self.lo[0] + (u - MARGIN) / self.scale,
            self.lo[1] + (SIZE - MARGIN - v) / self.scale,
        ]
    }
}

fn pie(out: &mut String, cx: f64, cy: f64, r: f64, fractions: &[(usize, f64)]) {
    let mut angle = -PI / 2.0;
    for &(i, f) in fractions {
        let next = angle + 2.0 * PI * f;
        let (x0, y0) = (cx + r * angle.cos(), cy + r * angle.sin());
        let (x1, y1) = (cx + r * next.cos(), cy + r * next.sin());
        let large = if next - angle > PI { 1 } else { 0 };
        writeln!(
            out,
            r#"<path d="M{cx:.2},{cy:.2} L{x0:.2},{y0:.2} A{r},{r} 0 {large} 1 {x1:.2},{y1:.2} Z" fill="{}"/>"#,
            colour(i)
        )
        .unwrap();
        angle = next;
    }
}

/// Points coloured by dominant cluster, split points as pies, sites as
/// squares and, with a diagram, cell boundaries traced on a sample grid.
pub fn render(
    x: &WeightedDataSet<f64>,
    clustering: Option<&Clustering<f64>>,
    sites: Option<&SiteSet<f64>>,
    diagram: Option<&AnisotropicDiagram<f64>>,
) -> Result<String> {
    if x.dim() != 2 {
        bail!("plots need 2-dimensional points, got dimension {}", x.dim());
    }
    if let Some(c) = clustering {
        if c.n() != x.len() {
            bail!("clustering has {} points, data has {}", c.n(), x.len());
        }
    }
    let mut all: Vec<&[f64]> = x.points().collect();
    if let Some(s) = sites {
        all.extend(s.iter());
    }
    let frame = Frame::new(&all);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )?;
    writeln!(
        out,
        r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#
    )?;

    if let Some(d) = diagram {
        let step = (SIZE - 2.0 * MARGIN) / GRID as f64;
        let label = |a: usize, b: usize| -> usize {
            let p = frame.unmap(
                MARGIN + (a as f64 + 0.5) * step,
                MARGIN + (b as f64 + 0.5) * step,
            );
            (0..d.k())
                .min_by(|&i, &l| d.g(i, &p).total_cmp(&d.g(l, &p)))
                .unwrap_or(0)
        };
        let labels: Vec<Vec<usize>> = (0..GRID)
            .map(|b| (0..GRID).map(|a| label(a, b)).collect())
            .collect();
        writeln!(out, r##"<g stroke="#444" stroke-width="1" fill="none">"##)?;
        for b in 0..GRID {
            for a in 0..GRID {
                let (u, v) = (MARGIN + a as f64 * step, MARGIN + b as f64 * step);
                if a + 1 < GRID && labels[b][a] != labels[b][a + 1] {
                    writeln!(
                        out,
                        r#"<line x1="{:.2}" y1="{v:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                        u + step,
                        u + step,
                        v + step
                    )?;
                }
                if b + 1 < GRID && labels[b][a] != labels[b + 1][a] {
                    writeln!(
                        out,
                        r#"<line x1="{u:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                        v + step,
                        u + step,
                        v + step
                    )?;
                }
            }
        }
        writeln!(out, "</g>")?;
    }

    writeln!(out, r#"<g stroke="black" stroke-width="0.5">"#)?;
    for (j, p) in x.points().enumerate() {
        let (cx, cy) = frame.map(p);
        let fractions: Vec<(usize, f64)> = match clustering {
            Some(c) => (0..c.k())
                .map(|i| (i, c.get(i, j)))
                .filter(|&(_, f)| f > 1e-9)
                .collect(),
            None => Vec::new(),
        };
        match fractions.as_slice() {
            [] => writeln!(
                out,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="black"/>"#
            )?,
            [(i, _)] => writeln!(
                out,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{}"/>"#,
                colour(*i)
            )?,
            many => pie(&mut out, cx, cy, 4.0, many),
        }
    }
    writeln!(out, "</g>")?;

    if let Some(s) = sites {
        writeln!(out, r#"<g stroke="black" stroke-width="1">"#)?;
        for (i, p) in s.iter().enumerate() {
            let (cx, cy) = frame.map(p);
            writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="9" height="9" fill="{}"/>"#,
                cx - 4.5,
                cy - 4.5,
                colour(i)
            )?;
        }
        writeln!(out, "</g>")?;
    }
    writeln!(out, "</svg>")?;
    Ok(out)
}
