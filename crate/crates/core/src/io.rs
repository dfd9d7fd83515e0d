//! File formats: CSV points, sites and clusterings, JSON problem configs
//! and coresets. Weights, fractions and coreset coordinates are written as
//! hexadecimal floats so that a write-then-read cycle is bit-exact.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::assign::MergePlan;
use crate::coreset::Coreset;
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::model::{Clustering, NormFamily, SiteSet, WeightBounds, WeightedDataSet};

/// `0x1.8p+1` style rendering of `v`; exact for every finite double.
pub fn format_hex(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    let sign = if v.is_sign_negative() { "-" } else { "" };
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 {
        (0, -1022)
    } else {
        (1, exp - 1023)
    };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{e:+}")
    }
}

/// Reads a hexadecimal float, a decimal number, or `inf`.
pub fn parse_float(s: &str) -> Option<f64> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    match lower.as_str() {
        "inf" | "+inf" | "infinity" => return Some(f64::INFINITY),
        "-inf" | "-infinity" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    if lower.contains("0x") {
        return hexf_parse::parse_hexf64(t, true).ok();
    }
    t.parse().ok()
}

fn format_err(line: u64, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("line {line}: {msg}"))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    format_err(line, e)
}

/// Rows of floats plus the header; the weight column is split off if present.
fn read_table<R: Read>(r: R, allow_weight: bool) -> Result<(Vec<Vec<f64>>, Option<Vec<f64>>)> {
    let mut rdr = csv_reader(r);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let weight_col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("weight"));
    if weight_col.is_some() && !allow_weight {
        return Err(format_err(1, "unexpected weight column"));
    }
    let cols = headers.len() - weight_col.is_some() as usize;
    if cols == 0 {
        return Err(format_err(1, "no coordinate columns"));
    }
    let mut rows = Vec::new();
    let mut weights = weight_col.map(|_| Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let mut row = Vec::with_capacity(cols);
        for (c, field) in rec.iter().enumerate() {
            let v = parse_float(field)
                .ok_or_else(|| format_err(line, format!("cannot parse {field:?} as a number")))?;
            if Some(c) == weight_col {
                weights.as_mut().expect("weight column").push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    Ok((rows, weights))
}

/// Points CSV: header row, one coordinate per column, optional `weight`
/// column (default 1).
pub fn read_points<R: Read>(r: R) -> Result<WeightedDataSet<f64>> {
    let (rows, weights) = read_table(r, true)?;
    let n = rows.len();
    WeightedDataSet::new(&rows, weights.unwrap_or_else(|| vec![1.0; n]))
}

pub fn write_points<W: Write>(w: W, x: &WeightedDataSet<f64>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..x.dim()).map(|a| format!("x{a}")).collect();
    header.push("weight".into());
    wr.write_record(&header).map_err(csv_error)?;
    for j in 0..x.len() {
        let mut rec: Vec<String> = x.point(j).iter().map(|&v| format_hex(v)).collect();
        rec.push(format_hex(x.weight(j)));
        wr.write_record(&rec).map_err(csv_error)?;
    }
    wr.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Sites CSV: header row, one coordinate per column.
pub fn read_sites<R: Read>(r: R) -> Result<SiteSet<f64>> {
    let (rows, _) = read_table(r, false)?;
    SiteSet::new(&rows)
}

pub fn write_sites<W: Write>(w: W, s: &SiteSet<f64>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let header: Vec<String> = (0..s.dim()).map(|a| format!("x{a}")).collect();
    wr.write_record(&header).map_err(csv_error)?;
    for site in s.iter() {
        let rec: Vec<String> = site.iter().map(|&v| format_hex(v)).collect();
        wr.write_record(&rec).map_err(csv_error)?;
    }
    wr.flush().map_err(|e| Error::Format(e.to_string()))
}

const FRACTION_FLOOR: f64 = 1e-9;

/// Clustering CSV: triplets `cluster,point,fraction`; fractions below `1e-9`
/// are omitted.
pub fn write_clustering<W: Write>(w: W, c: &Clustering<f64>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["cluster", "point", "fraction"])
        .map_err(csv_error)?;
    for j in 0..c.n() {
        for i in 0..c.k() {
            let v = c.get(i, j);
            if v >= FRACTION_FLOOR {
                wr.write_record([i.to_string(), j.to_string(), format_hex(v)])
                    .map_err(csv_error)?;
            }
        }
    }
    wr.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Reads triplets; `k` and `n` default to one past the largest index seen.
pub fn read_clustering<R: Read>(
    r: R,
    k: Option<usize>,
    n: Option<usize>,
) -> Result<Clustering<f64>> {
    let mut rdr = csv_reader(r);
    let mut triplets = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != 3 {
            return Err(format_err(
                line,
                format!("expected 3 fields, found {}", rec.len()),
            ));
        }
        let idx = |f: &str| {
            f.parse::<usize>()
                .map_err(|_| format_err(line, format!("cannot parse {f:?} as an index")))
        };
        let v = parse_float(&rec[2])
            .ok_or_else(|| format_err(line, format!("cannot parse {:?} as a number", &rec[2])))?;
        triplets.push((idx(&rec[0])?, idx(&rec[1])?, v));
    }
    let k = k.unwrap_or_else(|| triplets.iter().map(|t| t.0 + 1).max().unwrap_or(0));
    let n = n.unwrap_or_else(|| triplets.iter().map(|t| t.1 + 1).max().unwrap_or(0));
    let mut xi = vec![0.0; k * n];
    for (i, j, v) in triplets {
        if i >= k || j >= n {
            return Err(Error::Format(format!(
                "entry ({i}, {j}) outside a {k}×{n} clustering"
            )));
        }
        xi[i * n + j] = v;
    }
    Clustering::new(k, n, xi)
}

/// A bound value: a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundValue {
    Number(f64),
    Infinite(Infinity),
}

/// The literal `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf")]
    Inf,
}

impl BoundValue {
    pub fn value(self) -> f64 {
        match self {
            BoundValue::Number(v) => v,
            BoundValue::Infinite(Infinity::Inf) => f64::INFINITY,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v.is_infinite() {
            BoundValue::Infinite(Infinity::Inf)
        } else {
            BoundValue::Number(v)
        }
    }
}

/// Norm matrices: the literal `"identity"` or a list of `d×d` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormSpec {
    Named(NormName),
    Matrices(Vec<Vec<Vec<f64>>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormName {
    #[serde(rename = "identity")]
    Identity,
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec::Named(NormName::Identity)
    }
}

/// Problem config JSON: `k`, optional `kappa: [[lo, hi], …]` (missing means
/// unconstrained) and `A` (`"identity"` or a list of matrices).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<[BoundValue; 2]>>,
    #[serde(default, rename = "A")]
    pub norms: NormSpec,
}

impl ProblemConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Cluster count from `k`, `kappa` or the matrix list, which must agree.
    pub fn resolve_k(&self, fallback: Option<usize>) -> Result<usize> {
        let mut found: Vec<usize> = Vec::new();
        found.extend(self.k);
        found.extend(self.kappa.as_ref().map(Vec::len));
        if let NormSpec::Matrices(m) = &self.norms {
            found.push(m.len());
        }
        found.extend(fallback);
        let k = *found
            .first()
            .ok_or_else(|| Error::Format("config: cluster count k is missing".into()))?;
        if found.iter().any(|&v| v != k) {
            return Err(Error::Format(format!(
                "config: inconsistent cluster counts {found:?}"
            )));
        }
        Ok(k)
    }

    pub fn bounds(&self, k: usize) -> Result<WeightBounds<f64>> {
        match &self.kappa {
            None => Ok(WeightBounds::unconstrained(k)),
            Some(rows) => WeightBounds::new(
                rows.iter().map(|r| r[0].value()).collect(),
                rows.iter().map(|r| r[1].value()).collect(),
            ),
        }
    }

    pub fn norm_family(&self, k: usize, d: usize) -> Result<NormFamily<f64>> {
        match &self.norms {
            NormSpec::Named(NormName::Identity) => Ok(NormFamily::identity(k, d)),
            NormSpec::Matrices(ms) => {
                let mats = ms
                    .iter()
                    .map(|rows| SymMatrix::from_rows(rows))
                    .collect::<Result<Vec<_>>>()?;
                let fam = NormFamily::new(mats)?;
                if fam.dim() != d {
                    return Err(Error::DimensionMismatch {
                        what: "norm matrix",
                        index: 0,
                        expected: d,
                        found: fam.dim(),
                    });
                }
                Ok(fam)
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CoresetFile {
    dim: usize,
    points: Vec<Vec<String>>,
    weights: Vec<String>,
    source_weights: Vec<String>,
    /// Per coreset point, the `[source, mass]` pairs it received.
    preimages: Vec<Vec<(usize, String)>>,
    delta_plus: String,
    delta_minus: String,
    delta: String,
    eps: String,
    provenance: Vec<(String, f64)>,
}

fn hex_field(s: &str, what: &str) -> Result<f64> {
    parse_float(s).ok_or_else(|| Error::Format(format!("coreset: cannot parse {what} {s:?}")))
}

pub fn coreset_to_json(c: &Coreset<f64>) -> String {
    let x = c.points();
    let file = CoresetFile {
        dim: x.dim(),
        points: x
            .points()
            .map(|p| p.iter().map(|&v| format_hex(v)).collect())
            .collect(),
        weights: x.weights().iter().map(|&v| format_hex(v)).collect(),
        source_weights: c
            .plan()
            .source_weights()
            .iter()
            .map(|&v| format_hex(v))
            .collect(),
        preimages: c
            .plan()
            .preimages()
            .into_iter()
            .map(|pre| pre.into_iter().map(|(j, w)| (j, format_hex(w))).collect())
            .collect(),
        delta_plus: format_hex(c.delta_plus()),
        delta_minus: format_hex(c.delta_minus()),
        delta: format_hex(c.delta()),
        eps: format_hex(c.eps()),
        provenance: c.log().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("coreset serializes")
}

pub fn coreset_from_json(s: &str) -> Result<Coreset<f64>> {
    let f: CoresetFile =
        serde_json::from_str(s).map_err(|e| Error::Format(format!("coreset: {e}")))?;
    let mut coords = Vec::with_capacity(f.points.len() * f.dim);
    for p in &f.points {
        if p.len() != f.dim {
            return Err(Error::Format("coreset: point of wrong dimension".into()));
        }
        for v in p {
            coords.push(hex_field(v, "coordinate")?);
        }
    }
    let weights = f
        .weights
        .iter()
        .map(|v| hex_field(v, "weight"))
        .collect::<Result<Vec<_>>>()?;
    let source = f
        .source_weights
        .iter()
        .map(|v| hex_field(v, "weight"))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    for (t, pre) in f.preimages.iter().enumerate() {
        for (j, m) in pre {
            entries.push((*j, t, hex_field(m, "mass")?));
        }
    }
    let points = WeightedDataSet::from_flat(f.dim, coords, weights.clone())?;
    let plan = MergePlan::new(source, weights, entries)?;
    Coreset::new(
        points,
        plan,
        hex_field(&f.delta_plus, "delta_plus")?,
        hex_field(&f.delta_minus, "delta_minus")?,
        hex_field(&f.eps, "eps")?,
        hex_field(&f.delta, "delta")?,
        f.provenance,
    )
}
