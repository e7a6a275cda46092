//! Object × parameter tables: ingestion, validation, and seeded generators.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fmt::format_sig;
use crate::scalar::Real;

/// Default base for the exponential-ratio metric.
pub const DEFAULT_XR_BASE: f64 = 1.1;
/// Default significant digits for dataset CSV output.
pub const DEFAULT_CSV_DIGITS: usize = 12;

/// How one parameter's values are compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind<T> {
    /// Ratio similarity min/max, for intensity-like parameters.
    R,
    /// Exponential ratio `base^(-|Δ|)`, for shape/position-like parameters.
    Xr { base: T },
    /// Raw coordinate; feeds Euclidean distances instead of a monomer matrix.
    EuclideanCoordinate,
}

/// One column of a dataset: name, metric, and hybridization share.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpec<T> {
    pub name: String,
    pub metric: MetricKind<T>,
    pub weight: T,
}

impl<T: Real> ParameterSpec<T> {
    pub fn new(name: impl Into<String>, metric: MetricKind<T>, weight: T) -> Self {
        ParameterSpec { name: name.into(), metric, weight }
    }

    pub fn xr(name: impl Into<String>, base: T) -> Self {
        ParameterSpec::new(name, MetricKind::Xr { base }, T::one())
    }

    pub fn r(name: impl Into<String>) -> Self {
        ParameterSpec::new(name, MetricKind::R, T::one())
    }

    pub fn coordinate(name: impl Into<String>) -> Self {
        ParameterSpec::new(name, MetricKind::EuclideanCoordinate, T::one())
    }

    fn validate(&self) -> Result<()> {
        if let MetricKind::Xr { base } = self.metric {
            if !(base > T::one()) {
                return Err(Error::Config(format!(
                    "parameter `{}`: XR base must be > 1, got {base}",
                    self.name
                )));
            }
        }
        if !(self.weight >= T::zero()) || !self.weight.is_finite() {
            return Err(Error::Config(format!(
                "parameter `{}`: weight must be a finite nonnegative real, got {}",
                self.name, self.weight
            )));
        }
        Ok(())
    }
}

/// An immutable table of n objects described by p parameters.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    object_ids: Vec<String>,
    parameters: Vec<ParameterSpec<T>>,
    values: Vec<T>, // n × p, row major
}

impl<T: Real> Dataset<T> {
    pub fn new(
        object_ids: Vec<String>,
        parameters: Vec<ParameterSpec<T>>,
        values: Vec<T>,
    ) -> Result<Self> {
        let n = object_ids.len();
        let p = parameters.len();
        if n == 0 {
            return Err(Error::Validation("dataset needs at least one object".into()));
        }
        if p == 0 {
            return Err(Error::Validation("dataset needs at least one parameter".into()));
        }
        if values.len() != n * p {
            return Err(Error::Validation(format!(
                "expected {} values for {n}×{p}, got {}",
                n * p,
                values.len()
            )));
        }
        let mut seen = HashSet::new();
        for id in &object_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Validation(format!("duplicate object id `{id}`")));
            }
        }
        let mut seen = HashSet::new();
        for spec in &parameters {
            spec.validate()?;
            if !seen.insert(spec.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate parameter name `{}`",
                    spec.name
                )));
            }
        }
        if !parameters.iter().any(|s| s.weight > T::zero()) {
            return Err(Error::Config(
                "at least one parameter must have a positive weight".into(),
            ));
        }
        for (idx, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Validation(format!(
                    "non-finite value for object `{}`, parameter `{}`",
                    object_ids[idx / p],
                    parameters[idx % p].name
                )));
            }
        }
        // The ratio metric is sign-ambiguous on mixed-sign data.
        for (pi, spec) in parameters.iter().enumerate() {
            if spec.metric == MetricKind::R {
                for i in 0..n {
                    let v = values[i * p + pi];
                    if v < T::zero() {
                        return Err(Error::Validation(format!(
                            "parameter `{}` uses the R metric but object `{}` has negative value {v}",
                            spec.name, object_ids[i]
                        )));
                    }
                }
            }
        }
        Ok(Dataset { object_ids, parameters, values })
    }

    pub fn n_objects(&self) -> usize {
        self.object_ids.len()
    }

    pub fn n_params(&self) -> usize {
        self.parameters.len()
    }

    pub fn object_ids(&self) -> &[String] {
        &self.object_ids
    }

    pub fn parameters(&self) -> &[ParameterSpec<T>] {
        &self.parameters
    }

    #[inline]
    pub fn value(&self, object: usize, param: usize) -> T {
        self.values[object * self.parameters.len() + param]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Serialize as CSV (`id` column first) at the given number of
    /// significant digits. Loading the output and re-serializing it at the
    /// same precision reproduces the text exactly.
    pub fn to_csv(&self, sig_digits: usize) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.parameters.iter().map(|s| s.name.as_str()).collect();
        let _ = writeln!(out, "id,{}", names.join(","));
        let p = self.parameters.len();
        for (i, id) in self.object_ids.iter().enumerate() {
            let row: Vec<String> = (0..p)
                .map(|j| format_sig(self.values[i * p + j], sig_digits))
                .collect();
            let _ = writeln!(out, "{id},{}", row.join(","));
        }
        out
    }
}

/// Load a dataset from a CSV file. The header row names the parameters, the
/// first column (`id`) holds object ids, and `param_config` picks which
/// columns become parameters and how they are compared.
pub fn load_csv<T: Real>(path: impl AsRef<Path>, param_config: &[ParameterSpec<T>]) -> Result<Dataset<T>> {
    let text = std::fs::read_to_string(path)?;
    read_csv(text.as_bytes(), param_config)
}

/// [`load_csv`] over any reader.
pub fn read_csv<T: Real, R: Read>(reader: R, param_config: &[ParameterSpec<T>]) -> Result<Dataset<T>> {
    if param_config.is_empty() {
        return Err(Error::Config("parameter configuration is empty".into()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(Error::from)?.clone();
    let mut header_iter = headers.iter();
    match header_iter.next() {
        Some("id") => {}
        other => {
            return Err(Error::Parse(format!(
                "first CSV column must be `id`, got `{}`",
                other.unwrap_or("")
            )))
        }
    }
    let columns: Vec<&str> = header_iter.collect();
    let mut indices = Vec::with_capacity(param_config.len());
    for spec in param_config {
        match columns.iter().position(|c| *c == spec.name) {
            Some(pos) => indices.push(pos + 1),
            None => {
                return Err(Error::Config(format!(
                    "configured parameter `{}` does not match any CSV column",
                    spec.name
                )))
            }
        }
    }

    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(Error::from)?;
        let id = record
            .get(0)
            .ok_or_else(|| Error::Parse(format!("row {}: missing id", r + 1)))?;
        ids.push(id.to_string());
        for (spec, &col) in param_config.iter().zip(&indices) {
            let cell = record.get(col).ok_or_else(|| {
                Error::Parse(format!("row {}, column `{}`: missing value", r + 1, spec.name))
            })?;
            let v: T = cell.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "row {}, column `{}`: invalid number `{cell}`",
                    r + 1,
                    spec.name
                ))
            })?;
            values.push(v);
        }
    }
    Dataset::new(ids, param_config.to_vec(), values)
}

/// Parse a per-column metric configuration file:
///
/// ```text
/// [column_name]
/// metric = XR
/// base = 2
/// weight = 1
/// ```
///
/// `metric` is one of `R`, `XR`, `EUCLIDEAN` (alias `EUCLIDEAN_COORDINATE`);
/// `base` defaults to 1.1 and only applies to XR; `weight` defaults to 1.
pub fn parse_param_config<T: Real>(text: &str) -> Result<Vec<ParameterSpec<T>>> {
    struct Section {
        name: String,
        metric: Option<String>,
        base: Option<f64>,
        weight: Option<f64>,
    }

    let mut sections: Vec<Section> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            sections.push(Section {
                name: name.trim().to_string(),
                metric: None,
                base: None,
                weight: None,
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("metric config line {}: expected `key = value`", ln + 1))
        })?;
        let section = sections.last_mut().ok_or_else(|| {
            Error::Parse(format!(
                "metric config line {}: key before any [column] section",
                ln + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "metric" => section.metric = Some(value.to_string()),
            "base" => {
                section.base = Some(value.parse().map_err(|_| {
                    Error::Parse(format!("metric config line {}: bad base `{value}`", ln + 1))
                })?)
            }
            "weight" => {
                section.weight = Some(value.parse().map_err(|_| {
                    Error::Parse(format!("metric config line {}: bad weight `{value}`", ln + 1))
                })?)
            }
            _ => {
                return Err(Error::Parse(format!(
                    "metric config line {}: unknown key `{key}`",
                    ln + 1
                )))
            }
        }
    }

    let mut specs = Vec::with_capacity(sections.len());
    for s in sections {
        let metric = s
            .metric
            .ok_or_else(|| Error::Config(format!("column `{}`: missing `metric`", s.name)))?;
        let kind = match metric.to_ascii_uppercase().as_str() {
            "R" => MetricKind::R,
            "XR" => MetricKind::Xr {
                base: T::from_f64_lossy(s.base.unwrap_or(DEFAULT_XR_BASE)),
            },
            "EUCLIDEAN" | "EUCLIDEAN_COORDINATE" => MetricKind::EuclideanCoordinate,
            other => {
                return Err(Error::Config(format!(
                    "column `{}`: unknown metric `{other}` (expected R, XR, or EUCLIDEAN)",
                    s.name
                )))
            }
        };
        specs.push(ParameterSpec::new(
            s.name,
            kind,
            T::from_f64_lossy(s.weight.unwrap_or(1.0)),
        ));
    }
    if specs.is_empty() {
        return Err(Error::Config("metric config defines no columns".into()));
    }
    Ok(specs)
}

/// Options for [`gen_random_with`].
#[derive(Debug, Clone)]
pub struct RandomOptions<T> {
    /// XR base assigned to every generated parameter.
    pub xr_base: T,
    /// Round every drawn value to the nearest integer.
    pub integer_values: bool,
}

impl<T: Real> Default for RandomOptions<T> {
    fn default() -> Self {
        RandomOptions {
            xr_base: T::from_f64_lossy(DEFAULT_XR_BASE),
            integer_values: false,
        }
    }
}

/// Deterministic uniform random table; every parameter defaults to XR with
/// weight 1. Same arguments (including seed) produce bit-identical tables.
pub fn gen_random<T: Real>(
    n_objects: usize,
    n_params: usize,
    lo: T,
    hi: T,
    seed: u64,
) -> Result<Dataset<T>> {
    gen_random_with(n_objects, n_params, lo, hi, seed, &RandomOptions::default())
}

/// [`gen_random`] with explicit generator options.
pub fn gen_random_with<T: Real>(
    n_objects: usize,
    n_params: usize,
    lo: T,
    hi: T,
    seed: u64,
    opts: &RandomOptions<T>,
) -> Result<Dataset<T>> {
    if n_objects == 0 || n_params == 0 {
        return Err(Error::Validation("need at least one object and one parameter".into()));
    }
    if !(lo < hi) {
        return Err(Error::Validation(format!("invalid range: lo {lo} must be < hi {hi}")));
    }
    let span = hi.to_f64().unwrap() - lo.to_f64().unwrap();
    let lo_f = lo.to_f64().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_objects * n_params);
    for _ in 0..n_objects * n_params {
        let u: f64 = rng.random();
        let mut v = lo_f + u * span;
        if opts.integer_values {
            v = v.round();
        }
        values.push(T::from_f64_lossy(v));
    }
    let ids = (1..=n_objects).map(|i| format!("o{i}")).collect();
    let params = (1..=n_params)
        .map(|j| ParameterSpec::xr(format!("p{j}"), opts.xr_base))
        .collect();
    Dataset::new(ids, params, values)
}

/// One planted cluster for [`gen_scatter`].
#[derive(Debug, Clone)]
pub struct ScatterGroup<T> {
    pub center: [T; 3],
    pub spread: T,
    pub count: usize,
}

/// A generated scatter dataset plus the planted group index of each point,
/// kept aside so tests can check recovery against the ground truth.
#[derive(Debug, Clone)]
pub struct ScatterData<T> {
    pub dataset: Dataset<T>,
    pub group_labels: Vec<usize>,
}

/// Deterministic 3-D point groups: each point is its group center plus an
/// isotropic Gaussian offset (σ = spread/3) redrawn until it lies within
/// `spread`. Columns are `x`, `y`, `z` with the Euclidean-coordinate metric.
pub fn gen_scatter<T: Real>(groups: &[ScatterGroup<T>], seed: u64) -> Result<ScatterData<T>> {
    if groups.is_empty() {
        return Err(Error::Validation("scatter generator needs at least one group".into()));
    }
    for (gi, g) in groups.iter().enumerate() {
        if !(g.spread > T::zero()) {
            return Err(Error::Validation(format!("group {gi}: spread must be > 0")));
        }
        if g.count == 0 {
            return Err(Error::Validation(format!("group {gi}: count must be ≥ 1")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let spread = g.spread.to_f64().unwrap();
        let normal = Normal::new(0.0, spread / 3.0).expect("positive sigma");
        for _ in 0..g.count {
            let offset = loop {
                let r = [
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                ];
                let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                if norm <= spread {
                    break r;
                }
            };
            for d in 0..3 {
                values.push(g.center[d] + T::from_f64_lossy(offset[d]));
            }
            labels.push(gi);
        }
    }
    let n: usize = groups.iter().map(|g| g.count).sum();
    let ids = (1..=n).map(|i| format!("o{i}")).collect();
    let params = vec![
        ParameterSpec::coordinate("x"),
        ParameterSpec::coordinate("y"),
        ParameterSpec::coordinate("z"),
    ];
    Ok(ScatterData {
        dataset: Dataset::new(ids, params, values)?,
        group_labels: labels,
    })
}

/// The default four-group scatter benchmark: 16/8/8/4 points in unit-spread
/// balls whose centers sit 20 spreads apart.
pub fn benchmark_groups<T: Real>() -> Vec<ScatterGroup<T>> {
    let f = T::from_f64_lossy;
    vec![
        ScatterGroup { center: [f(0.0), f(0.0), f(0.0)], spread: T::one(), count: 16 },
        ScatterGroup { center: [f(20.0), f(0.0), f(0.0)], spread: T::one(), count: 8 },
        ScatterGroup { center: [f(0.0), f(20.0), f(0.0)], spread: T::one(), count: 8 },
        ScatterGroup { center: [f(20.0), f(20.0), f(20.0)], spread: T::one(), count: 4 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_csv_loads() {
        let specs = vec![ParameterSpec::<f64>::xr("x", 2.0)];
        let ds = read_csv("id,x\nA,1\nB,2\n".as_bytes(), &specs).unwrap();
        assert_eq!(ds.n_objects(), 2);
        assert_eq!(ds.n_params(), 1);
        assert_eq!(ds.value(0, 0), 1.0);
        assert_eq!(ds.value(1, 0), 2.0);
        assert_eq!(ds.object_ids(), &["A".to_string(), "B".to_string()]);
    }

    #[test]
    fn non_numeric_cell_reports_coordinates() {
        let specs = vec![ParameterSpec::<f64>::xr("x", 2.0)];
        let err = read_csv("id,x\nA,1\nB,abc\n".as_bytes(), &specs).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "{msg}");
        assert!(msg.contains("`x`"), "{msg}");
        assert!(msg.contains("abc"), "{msg}");
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let specs = vec![ParameterSpec::<f64>::xr("x", 2.0)];
        let err = read_csv("id,x\nA,1\nA,2\n".as_bytes(), &specs).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn missing_column_is_a_config_error() {
        let specs = vec![ParameterSpec::<f64>::xr("y", 2.0)];
        let err = read_csv("id,x\nA,1\n".as_bytes(), &specs).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(err.to_string().contains("`y`"));
    }

    #[test]
    fn mixed_metric_round_trip_preserves_fields() {
        let specs = vec![ParameterSpec::<f64>::r("a"), ParameterSpec::xr("b", 3.0)];
        let ds = Dataset::new(
            vec!["x".into(), "y".into(), "z".into()],
            specs.clone(),
            vec![1.0, 10.0, 2.5, 20.0, 4.0, 40.0],
        )
        .unwrap();
        let text = ds.to_csv(DEFAULT_CSV_DIGITS);
        let back = read_csv(text.as_bytes(), &specs).unwrap();
        assert_eq!(back.object_ids(), ds.object_ids());
        assert_eq!(back.parameters(), ds.parameters());
        assert_eq!(back.values(), ds.values());
        assert_eq!(back.to_csv(DEFAULT_CSV_DIGITS), text);
    }

    #[test]
    fn r_metric_rejects_negative_values() {
        let specs = vec![ParameterSpec::<f64>::r("a")];
        let err = Dataset::new(vec!["x".into()], specs, vec![-1.0]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn random_generator_is_seed_deterministic() {
        let a = gen_random::<f64>(20, 5, 1.0, 500.0, 7).unwrap();
        let b = gen_random::<f64>(20, 5, 1.0, 500.0, 7).unwrap();
        assert_eq!(a.values(), b.values());
        let c = gen_random::<f64>(20, 5, 1.0, 500.0, 8).unwrap();
        assert!(a.values().iter().zip(c.values()).any(|(x, y)| x != y));
        assert!(a.values().iter().all(|&v| (1.0..=500.0).contains(&v)));
    }

    #[test]
    fn random_generator_rejects_bad_range() {
        assert!(matches!(
            gen_random::<f64>(3, 3, 5.0, 5.0, 0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn random_generator_integer_mode_rounds() {
        let opts = RandomOptions { integer_values: true, ..Default::default() };
        let ds = gen_random_with::<f64>(10, 4, 1.0, 500.0, 3, &opts).unwrap();
        assert!(ds.values().iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn scatter_shapes_and_labels() {
        let groups = vec![
            ScatterGroup { center: [0.0, 0.0, 0.0], spread: 1.0, count: 16 },
            ScatterGroup { center: [10.0, 0.0, 0.0], spread: 1.0, count: 20 },
        ];
        let s = gen_scatter::<f64>(&groups, 1).unwrap();
        assert_eq!(s.dataset.n_objects(), 36);
        assert_eq!(s.dataset.n_params(), 3);
        assert_eq!(s.group_labels.iter().filter(|&&g| g == 0).count(), 16);
        // points stay within their group's spread
        for (i, &g) in s.group_labels.iter().enumerate() {
            let c = &groups[g].center;
            let d2: f64 = (0..3)
                .map(|k| (s.dataset.value(i, k) - c[k]).powi(2))
                .sum();
            assert!(d2.sqrt() <= groups[g].spread + 1e-12);
        }
    }

    #[test]
    fn scatter_single_point_and_empty_groups() {
        let one = gen_scatter::<f64>(
            &[ScatterGroup { center: [1.0, 2.0, 3.0], spread: 0.5, count: 1 }],
            9,
        )
        .unwrap();
        assert_eq!(one.dataset.n_objects(), 1);
        assert!(matches!(gen_scatter::<f64>(&[], 9), Err(Error::Validation(_))));
    }

    #[test]
    fn param_config_parses_and_validates() {
        let text = "# climate columns\n[temp]\nmetric = R\nweight = 2\n\n[lat]\nmetric = XR\nbase = 2\n\n[x]\nmetric = EUCLIDEAN\n";
        let specs: Vec<ParameterSpec<f64>> = parse_param_config(text).unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[0].metric, MetricKind::R);
        assert_eq!(specs[0].weight, 2.0);
        assert_eq!(specs[1].metric, MetricKind::Xr { base: 2.0 });
        assert_eq!(specs[2].metric, MetricKind::EuclideanCoordinate);

        assert!(parse_param_config::<f64>("[a]\nbase = 2\n").is_err());
        assert!(parse_param_config::<f64>("metric = R\n").is_err());
        assert!(parse_param_config::<f64>("[a]\nmetric = COSINE\n").is_err());
    }

    #[test]
    fn xr_base_must_exceed_one() {
        let specs = vec![ParameterSpec::<f64>::xr("x", 1.0)];
        assert!(matches!(
            Dataset::new(vec!["a".into()], specs, vec![1.0]),
            Err(Error::Config(_))
        ));
    }
}
