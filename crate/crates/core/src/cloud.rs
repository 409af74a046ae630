//! Point clouds: loading, count normalization, subsample Hausdorff distance
//! and principal axes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// `n` points in `R^p`, stored row-major, with optional named per-point
/// attributes that are carried along for coloring only.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    n: usize,
    dim: usize,
    coords: Vec<f64>,
    attributes: BTreeMap<String, Vec<f64>>,
}

impl PointCloud {
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be at least 1"));
        }
        if coords.is_empty() {
            return Err(Error::invalid("point cloud is empty"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate at point {}",
                pos / dim
            )));
        }
        Ok(Self {
            n: coords.len() / dim,
            dim,
            coords,
            attributes: BTreeMap::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: rows[bad].len(),
            });
        }
        Self::new(rows.concat(), dim)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }

    /// Attach a named attribute; it must have one value per point.
    pub fn with_attribute(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: values.len(),
            });
        }
        self.attributes.insert(name.into(), values);
        Ok(self)
    }

    pub fn attribute(&self, name: &str) -> Option<&[f64]> {
        self.attributes.get(name).map(Vec::as_slice)
    }

    pub fn attributes(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.attributes
    }

    /// Move coordinate column `col` out of the point coordinates and into a
    /// named attribute (e.g. a sampling timepoint stored next to the data).
    pub fn split_attribute(self, col: usize, name: impl Into<String>) -> Result<Self> {
        if col >= self.dim || self.dim < 2 {
            return Err(Error::invalid(format!(
                "cannot split column {col} out of a {}-dimensional cloud",
                self.dim
            )));
        }
        let mut values = Vec::with_capacity(self.n);
        let mut coords = Vec::with_capacity(self.n * (self.dim - 1));
        for p in self.points() {
            values.push(p[col]);
            coords.extend(p.iter().enumerate().filter(|(k, _)| *k != col).map(|(_, v)| *v));
        }
        let mut out = PointCloud::new(coords, self.dim - 1)?;
        out.attributes = self.attributes;
        out.with_attribute(name, values)
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        let mut out = PointCloud::new(coords, self.dim)?;
        for (name, values) in &self.attributes {
            out.attributes
                .insert(name.clone(), indices.iter().map(|&i| values[i]).collect());
        }
        Ok(out)
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_csv(file, has_header, path)
}

/// Parse comma-separated numeric rows; `origin` is only used in error messages.
pub fn parse_csv<R: Read>(reader: R, has_header: bool, origin: &Path) -> Result<PointCloud> {
    let fmt = |line: usize, message: String| Error::Format {
        path: origin.to_owned(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut dim = None;
    let mut coords = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            fmt(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(fmt(
                line,
                format!("expected {expected} columns, found {}", record.len()),
            ));
        }
        for cell in record.iter() {
            let v: f64 = cell
                .parse()
                .map_err(|_| fmt(line, format!("non-numeric cell {cell:?}")))?;
            if !v.is_finite() {
                return Err(fmt(line, format!("non-finite cell {cell:?}")));
            }
            coords.push(v);
        }
    }
    match dim {
        Some(dim) => PointCloud::new(coords, dim),
        None => Err(fmt(1, "file contains no data rows".into())),
    }
}

pub fn load_off_vertices(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_off(&text, path)
}

/// Parse the vertex block of an ASCII OFF file. Faces are not read.
pub fn parse_off(text: &str, origin: &Path) -> Result<PointCloud> {
    let fmt = |line: usize, message: &str| Error::Format {
        path: origin.to_owned(),
        line,
        message: message.to_owned(),
    };
    // (1-based line number, tokens) for non-blank, non-comment lines
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let content = l.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then(|| (i + 1, content))
    });

    let (header_line, header) = lines.next().ok_or_else(|| fmt(1, "empty file"))?;
    let mut tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens[0] != "OFF" {
        return Err(fmt(header_line, "missing OFF header"));
    }
    tokens.remove(0);
    let mut counts_line = header_line;
    if tokens.is_empty() {
        let (l, rest) = lines
            .next()
            .ok_or_else(|| fmt(header_line, "missing vertex/face counts"))?;
        counts_line = l;
        tokens = rest.split_whitespace().collect();
    }
    let n_vertices: usize = tokens
        .first()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| fmt(counts_line, "invalid vertex count"))?;
    if n_vertices == 0 {
        return Err(fmt(counts_line, "empty vertex set"));
    }

    let mut coords = Vec::with_capacity(3 * n_vertices);
    for _ in 0..n_vertices {
        let (l, row) = lines.next().ok_or_else(|| {
            fmt(
                text.lines().count(),
                &format!("vertex count mismatch: header declares {n_vertices}"),
            )
        })?;
        let xyz: Vec<f64> = row
            .split_whitespace()
            .take(3)
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| fmt(l, "non-numeric vertex coordinate"))?;
        if xyz.len() != 3 {
            return Err(fmt(l, "vertex needs three coordinates"));
        }
        coords.extend(xyz);
    }
    PointCloud::new(coords, 3)
}

/// Per-row library-size normalization followed by `log(1 + .)`:
/// `x'_ij = ln(1 + scale * x_ij / sum_k x_ik)`.
pub fn normalize_counts(cloud: &PointCloud, scale: f64) -> Result<PointCloud> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid("scale must be positive"));
    }
    let mut coords = Vec::with_capacity(cloud.coords.len());
    for (i, row) in cloud.points().enumerate() {
        if row.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid(format!("row {i} has a negative count")));
        }
        let total: f64 = row.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid(format!("row {i} sums to zero")));
        }
        coords.extend(row.iter().map(|&v| (scale * v / total).ln_1p()));
    }
    let mut out = PointCloud::new(coords, cloud.dim)?;
    out.attributes = cloud.attributes.clone();
    Ok(out)
}

/// Uniform subsample without replacement of size `ceil(fraction * n)`.
pub fn subsample_indices(n: usize, fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid("subsample fraction must lie in (0, 1]"));
    }
    let size = ((fraction * n as f64).ceil() as usize).min(n);
    if size == 0 {
        return Err(Error::invalid("subsample would be empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, size).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Hausdorff distance between the cloud and the subset of its points given by
/// `subset`. Since the subset lies inside the cloud only the cloud-to-subset
/// direction can be nonzero.
pub fn hausdorff_to_subset(cloud: &PointCloud, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::invalid("subset is empty"));
    }
    let mut worst: f64 = 0.0;
    for x in cloud.points() {
        let nearest = subset
            .iter()
            .map(|&j| euclidean(x, cloud.point(j)))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    Ok(worst)
}

pub fn hausdorff_to_subsample(cloud: &PointCloud, fraction: f64, seed: u64) -> Result<f64> {
    let subset = subsample_indices(cloud.len(), fraction, seed)?;
    hausdorff_to_subset(cloud, &subset)
}

/// Principal axes of the cloud, sorted by decreasing variance.
pub fn principal_axes(cloud: &PointCloud) -> Vec<(f64, Vec<f64>)> {
    let (n, p) = (cloud.len(), cloud.dim());
    let data = DMatrix::from_row_slice(n, p, cloud.coords());
    let mean = data.row_mean();
    let mut centered = data;
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut axes: Vec<(f64, Vec<f64>)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&val, vec)| (val, vec.iter().copied().collect()))
        .collect();
    axes.sort_by(|a, b| b.0.total_cmp(&a.0));
    axes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str, header: bool) -> Result<PointCloud> {
        parse_csv(text.as_bytes(), header, Path::new("mem.csv"))
    }

    #[test]
    fn csv_basic_shapes() {
        let c = csv("0,0\n1,0\n0,1", false).unwrap();
        assert_eq!((c.len(), c.dim()), (3, 2));
        assert_eq!(c.point(2), &[0.0, 1.0]);

        let c = csv("x,y,z\n1,2,3\n4,5,6\n7,8,9\n0,0,0\n", true).unwrap();
        assert_eq!((c.len(), c.dim()), (4, 3));
    }

    #[test]
    fn csv_errors_name_the_line() {
        match csv("a,b", false) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected format error, got {other:?}"),
        }
        match csv("1,2\n3,4\n5\n", false) {
            Err(Error::Format { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("columns"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
        assert!(matches!(csv("", false), Err(Error::Format { .. })));
    }

    #[test]
    fn off_vertices() {
        let off = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let c = parse_off(off, Path::new("t.off")).unwrap();
        assert_eq!((c.len(), c.dim()), (3, 3));

        let mut cube = String::from("OFF\n# cube\n8 6 12\n");
        for i in 0..8 {
            cube.push_str(&format!("{} {} {}\n", i & 1, (i >> 1) & 1, (i >> 2) & 1));
        }
        assert_eq!(parse_off(&cube, Path::new("cube.off")).unwrap().len(), 8);

        let empty = parse_off("OFF\n0 0 0", Path::new("e.off"));
        assert!(matches!(empty, Err(Error::Format { ref message, .. }) if message.contains("empty")));

        let short = parse_off("OFF\n4 0 0\n0 0 0\n1 1 1\n", Path::new("s.off"));
        assert!(matches!(short, Err(Error::Format { ref message, .. }) if message.contains("mismatch")));
        assert!(parse_off("PLY\n1 0 0\n0 0 0", Path::new("p.off")).is_err());
    }

    #[test]
    fn normalize_counts_examples() {
        let c = PointCloud::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let out = normalize_counts(&c, 2.0).unwrap();
        assert!((out.point(0)[0] - 2f64.ln()).abs() < 1e-15);
        assert!((out.point(0)[1] - 2f64.ln()).abs() < 1e-15);

        let c = PointCloud::from_rows(&[vec![1.0, 3.0]]).unwrap();
        let out = normalize_counts(&c, 1e4).unwrap();
        assert!((out.point(0)[0] - 2501f64.ln()).abs() < 1e-12);
        assert!((out.point(0)[1] - 7501f64.ln()).abs() < 1e-12);

        let zero = PointCloud::from_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let err = normalize_counts(&zero, 1.0).unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");
        let neg = PointCloud::from_rows(&[vec![-1.0, 2.0]]).unwrap();
        assert!(normalize_counts(&neg, 1.0).is_err());
    }

    #[test]
    fn normalize_counts_is_row_local() {
        let rows = vec![vec![1.0, 2.0, 3.0], vec![0.0, 5.0, 1.0], vec![4.0, 4.0, 0.5]];
        let perm = [2, 0, 1];
        let a = normalize_counts(&PointCloud::from_rows(&rows).unwrap(), 1e4).unwrap();
        let permuted: Vec<_> = perm.iter().map(|&i| rows[i].clone()).collect();
        let b = normalize_counts(&PointCloud::from_rows(&permuted).unwrap(), 1e4).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(a.point(i), b.point(k));
        }
    }

    #[test]
    fn hausdorff_examples() {
        let line = PointCloud::new(vec![0.0, 10.0], 1).unwrap();
        assert_eq!(hausdorff_to_subset(&line, &[0]).unwrap(), 10.0);
        assert_eq!(hausdorff_to_subsample(&line, 1.0, 7).unwrap(), 0.0);
        assert!(hausdorff_to_subsample(&line, 0.0, 7).is_err());
        assert_eq!(subsample_indices(100, 1.0 / 3.0, 1).unwrap().len(), 34);
    }

    #[test]
    fn attributes_follow_points() {
        let c = PointCloud::from_rows(&[vec![0.0, 1.0, 5.0], vec![2.0, 3.0, 6.0]])
            .unwrap()
            .split_attribute(2, "time")
            .unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.attribute("time").unwrap(), &[5.0, 6.0]);
        let s = c.select(&[1]).unwrap();
        assert_eq!(s.point(0), &[2.0, 3.0]);
        assert_eq!(s.attribute("time").unwrap(), &[6.0]);
        assert!(c.clone().with_attribute("bad", vec![1.0]).is_err());
    }

    #[test]
    fn invalid_clouds_rejected() {
        assert!(PointCloud::new(vec![], 2).is_err());
        assert!(PointCloud::new(vec![1.0, f64::NAN], 2).is_err());
        assert!(PointCloud::new(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn principal_axes_of_a_flat_cloud() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i % 10) as f64, (i / 10) as f64 * 0.1, 0.0])
            .collect();
        let axes = principal_axes(&PointCloud::from_rows(&rows).unwrap());
        assert!(axes[0].0 >= axes[1].0 && axes[1].0 >= axes[2].0);
        assert!(axes[0].1[0].abs() > 0.999);
        assert!(axes[2].0.abs() < 1e-12);
    }
}
