//! Truncated attractor point clouds and their CSV, SVG and PPM renderings.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{IntMatrix, IntVector, ScaledInverse};
use crate::pairs::odometer_sums;
use crate::system::MoranSystem;

/// Points Σₖ (Rₖ⋯R₁)⁻¹dₖ for all digit strings of length N.
#[derive(Clone, Debug, Serialize)]
pub struct PointCloud {
    pub level: usize,
    pub points: Vec<Vec<f64>>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Number of digit strings, before merging coincident points.
    pub strings: usize,
    #[serde(skip)]
    numerators: Vec<IntVector>,
    #[serde(skip)]
    denominator: BigInt,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Exact coordinates as (numerator vector, common denominator).
    pub fn exact(&self) -> (&[IntVector], &BigInt) {
        (&self.numerators, &self.denominator)
    }

    fn from_points(level: usize, points: Vec<Vec<f64>>, strings: usize) -> Self {
        let n = points.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        for p in &points {
            for i in 0..n {
                min[i] = min[i].min(p[i]);
                max[i] = max[i].max(p[i]);
            }
        }
        PointCloud {
            level,
            points,
            min,
            max,
            strings,
            numerators: Vec::new(),
            denominator: BigInt::from(1),
        }
    }
}

/// Enumerates the level-N support approximation exactly.
///
/// With Pₙ = R_N⋯R₁, each point is Pₙ⁻¹x for the integer
/// x = Σₖ R_N⋯R_{k+1}dₖ, so the sums are formed in ℤⁿ and divided once.
/// Digit strings run in odometer order with d₁ fastest; coincident points
/// keep their first occurrence.
pub fn support_points(system: &MoranSystem, n_levels: usize, cap: usize) -> Result<PointCloud> {
    if n_levels == 0 {
        return Err(Error::InvalidParameter("level must be at least 1".into()));
    }
    let needed = (1..=n_levels).try_fold(1u128, |acc, k| acc.checked_mul(system.level(k).digits.len() as u128));
    let needed = needed.unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::CapExceeded { needed, cap });
    }
    let dim = system.dim();
    // tails[k] = R_N⋯R_{k+2} for level k+1
    let mut sets = vec![Vec::new(); n_levels];
    let mut tail = IntMatrix::identity(dim);
    for k in (1..=n_levels).rev() {
        sets[k - 1] = system.level(k).digits.iter().map(|d| tail.mul_vec(d)).collect();
        tail = tail.mul(&system.level(k).matrix);
    }
    let inv = ScaledInverse::of(&tail)?;
    let sums = odometer_sums(&sets, dim);
    let strings = sums.len();
    let mut seen = HashSet::with_capacity(sums.len());
    let numerators: Vec<IntVector> = sums
        .into_iter()
        .map(|x| inv.adj.mul_vec(&x))
        .filter(|v| seen.insert(v.clone()))
        .collect();
    let det = inv.det.to_f64().unwrap_or(f64::INFINITY);
    let points: Vec<Vec<f64>> = numerators
        .par_iter()
        .map(|v| v.0.iter().map(|x| ratio_f64(x, &inv.det, det)).collect())
        .collect();
    let mut cloud = PointCloud::from_points(n_levels, points, strings);
    cloud.numerators = numerators;
    cloud.denominator = inv.det;
    Ok(cloud)
}

/// x/d, exact enough even when x and d overflow f64 on their own.
fn ratio_f64(x: &BigInt, d: &BigInt, d_f: f64) -> f64 {
    match x.to_f64() {
        Some(xf) if xf.is_finite() && d_f.is_finite() => xf / d_f,
        _ => {
            let r = crate::exact::Rational::new(x.clone(), d.clone());
            crate::exact::rational_to_f64(&r)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    Ppm,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            "ppm" => Ok(Format::Ppm),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// Plot window: the unit square when the cloud fits, else its bounding box.
fn window(cloud: &PointCloud) -> ([f64; 2], f64) {
    let fits = cloud.min.iter().all(|&x| x >= 0.0) && cloud.max.iter().all(|&x| x <= 1.0);
    if fits {
        return ([0.0, 0.0], 1.0);
    }
    let lo = [cloud.min[0], cloud.min.get(1).copied().unwrap_or(0.0)];
    let span = (0..cloud.dim().min(2))
        .map(|i| cloud.max[i] - cloud.min[i])
        .fold(0.0, f64::max);
    (lo, if span > 0.0 { span } else { 1.0 })
}

fn planar(cloud: &PointCloud) -> Result<()> {
    if cloud.is_empty() {
        return Err(Error::InvalidParameter("cannot render an empty cloud".into()));
    }
    if cloud.dim() > 2 {
        return Err(Error::InvalidParameter(format!(
            "images need dimension 1 or 2, got {}",
            cloud.dim()
        )));
    }
    Ok(())
}

fn xy(p: &[f64]) -> (f64, f64) {
    (p[0], p.get(1).copied().unwrap_or(0.0))
}

pub fn write_csv<W: Write>(cloud: &PointCloud, out: W) -> Result<()> {
    if cloud.is_empty() {
        return Err(Error::InvalidParameter("cannot render an empty cloud".into()));
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for p in &cloud.points {
        w.write_record(p.iter().map(|x| x.to_string()))
            .map_err(|e| Error::Io(e.into()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads points written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            rec.iter()
                .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect()
        })
        .collect()
}

/// Square markers of side 1/(2·m^N) in window units, y pointing up.
pub fn svg_string(cloud: &PointCloud, m: u64) -> Result<String> {
    planar(cloud)?;
    let ([x0, y0], span) = window(cloud);
    let side = 1.0 / (2.0 * (m as f64).powi(cloud.level as i32));
    let mut s = String::new();
    let pad = side;
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="512" height="512" viewBox="{} {} {} {}">"#,
        -pad,
        -pad,
        1.0 + 2.0 * pad,
        1.0 + 2.0 * pad
    );
    let _ = writeln!(s, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#, -pad, -pad, 1.0 + 2.0 * pad, 1.0 + 2.0 * pad);
    for p in &cloud.points {
        let (x, y) = xy(p);
        let u = (x - x0) / span;
        let v = 1.0 - (y - y0) / span;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="black"/>"#,
            u,
            v - side,
            side,
            side
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Binary P6 raster, white background, one black pixel per point.
pub fn ppm_bytes(cloud: &PointCloud, size: usize) -> Result<Vec<u8>> {
    planar(cloud)?;
    if size < 2 {
        return Err(Error::InvalidParameter("image size must be at least 2".into()));
    }
    let ([x0, y0], span) = window(cloud);
    let header = format!("P6\n{size} {size}\n255\n");
    let mut buf = header.into_bytes();
    let start = buf.len();
    buf.resize(start + size * size * 3, 255);
    let scale = (size - 1) as f64;
    for p in &cloud.points {
        let (x, y) = xy(p);
        let col = (((x - x0) / span) * scale).round().clamp(0.0, scale) as usize;
        let row = ((1.0 - (y - y0) / span) * scale).round().clamp(0.0, scale) as usize;
        let at = start + (row * size + col) * 3;
        buf[at..at + 3].fill(0);
    }
    Ok(buf)
}

/// Count of non-white pixels in a P6 image produced by [`ppm_bytes`].
pub fn ppm_dark_pixels(bytes: &[u8]) -> Result<usize> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let s = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if s == pos {
            return Err(Error::Parse("truncated PPM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[s..pos]).into_owned());
    }
    if fields[0] != "P6" {
        return Err(Error::Parse("not a binary PPM".into()));
    }
    let body = &bytes[pos + 1..];
    Ok(body.chunks_exact(3).filter(|px| px.iter().any(|&c| c != 255)).count())
}

pub fn render_to<W: Write>(cloud: &PointCloud, format: Format, m: u64, size: usize, mut out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(cloud, out),
        Format::Svg => Ok(out.write_all(svg_string(cloud, m)?.as_bytes())?),
        Format::Ppm => Ok(out.write_all(&ppm_bytes(cloud, size)?)?),
    }
}

pub fn render(cloud: &PointCloud, format: Format, m: u64, size: usize, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    render_to(cloud, format, m, size, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Largest Euclidean distance of a point from the origin, exactly bounded
/// through its rational coordinates.
pub fn max_radius(cloud: &PointCloud) -> f64 {
    let (nums, den) = cloud.exact();
    let d = den.abs().to_f64().unwrap_or(f64::INFINITY);
    nums.iter()
        .map(|v| v.0.iter().map(|x| (x.to_f64().unwrap_or(f64::INFINITY) / d).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}
