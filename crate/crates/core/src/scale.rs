//! Scale resolution: linear, band, point and ordinal scales over explicit or
//! data-driven domains.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::dataflow::DataflowTrace;
use crate::spec::{DomainDecl, RangeDecl, ScaleDecl, ScaleKind};
use crate::value::Value;

/// Ordinal palette (Tableau 10).
pub const PALETTE: [&str; 10] = [
    "#4c78a8", "#f58518", "#e45756", "#72b7b2", "#54a24b", "#eeca3b", "#b279a2", "#ff9da6",
    "#9d755d", "#bab0ac",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaleError {
    #[error("scale `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("scale `{0}` needs a numeric domain")]
    NonNumericDomain(String),
    #[error("scale `{scale}` reads unknown dataset `{dataset}`")]
    MissingDataset { scale: String, dataset: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleMapping {
    /// `y = slope * x + intercept`.
    Linear {
        domain: (f64, f64),
        range: (f64, f64),
        slope: f64,
        intercept: f64,
    },
    /// Band and point scales. Bands start at `start + dir * (outer + i) * step`.
    Band {
        domain: Vec<Value>,
        start: f64,
        end: f64,
        step: f64,
        padding_inner: f64,
        padding_outer: f64,
    },
    Ordinal {
        domain: Vec<Value>,
        palette: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScale {
    pub name: String,
    pub kind: ScaleKind,
    pub mapping: ScaleMapping,
}

fn key(v: &Value) -> Vec<u8> {
    let mut b = Vec::new();
    v.key_bytes(&mut b);
    b
}

impl ResolvedScale {
    /// Positional mapping. `None` for values outside a discrete domain.
    pub fn map(&self, v: &Value) -> Option<f64> {
        match &self.mapping {
            ScaleMapping::Linear { slope, intercept, .. } => v.as_f64().map(|x| slope * x + intercept),
            ScaleMapping::Band {
                domain,
                start,
                end,
                step,
                padding_outer,
                ..
            } => {
                let i = domain.iter().position(|d| d == v)?;
                let dir = if end >= start { 1.0 } else { -1.0 };
                Some(start + dir * (padding_outer + i as f64) * step)
            }
            ScaleMapping::Ordinal { .. } => None,
        }
    }

    /// Width of one band; zero for point and continuous scales.
    pub fn bandwidth(&self) -> f64 {
        match &self.mapping {
            ScaleMapping::Band {
                step, padding_inner, ..
            } if self.kind == ScaleKind::Band => step * (1.0 - padding_inner),
            _ => 0.0,
        }
    }

    /// Signed band direction: +1 when the range increases.
    pub fn direction(&self) -> f64 {
        match &self.mapping {
            ScaleMapping::Band { start, end, .. } if end < start => -1.0,
            _ => 1.0,
        }
    }

    pub fn color(&self, v: &Value) -> Option<String> {
        match &self.mapping {
            ScaleMapping::Ordinal { domain, palette } => {
                let i = domain.iter().position(|d| d == v)?;
                Some(palette[i % palette.len()].clone())
            }
            _ => None,
        }
    }

    pub fn domain_values(&self) -> Option<&[Value]> {
        match &self.mapping {
            ScaleMapping::Band { domain, .. } | ScaleMapping::Ordinal { domain, .. } => Some(domain),
            ScaleMapping::Linear { .. } => None,
        }
    }
}

pub type ScaleSet = BTreeMap<String, ResolvedScale>;

/// Values of a data-driven domain, or `None` for an explicit domain.
fn domain_source<'a>(
    decl: &ScaleDecl,
    traces: &'a BTreeMap<String, DataflowTrace>,
) -> Result<Option<Vec<&'a Value>>, ScaleError> {
    match &decl.domain {
        DomainDecl::Values(_) => Ok(None),
        DomainDecl::Data { data, fields } => {
            let trace = traces.get(data).ok_or_else(|| ScaleError::MissingDataset {
                scale: decl.name.clone(),
                dataset: data.clone(),
            })?;
            let table = trace.output();
            let mut out = Vec::new();
            for row in &table.rows {
                for f in fields {
                    out.push(row.get(f));
                }
            }
            Ok(Some(out))
        }
    }
}

fn distinct(values: impl IntoIterator<Item = Value>) -> Vec<Value> {
    let mut seen = HashSet::new();
    values
        .into_iter()
        .filter(|v| !v.is_null() && seen.insert(key(v)))
        .collect()
}

fn numeric_extent(name: &str, values: &[&Value]) -> Result<(f64, f64), ScaleError> {
    if values.is_empty() {
        return Err(ScaleError::EmptyDomain(name.to_string()));
    }
    let nums: Vec<f64> = values.iter().filter_map(|v| v.as_f64()).collect();
    if nums.is_empty() {
        return Err(ScaleError::NonNumericDomain(name.to_string()));
    }
    Ok(nums
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}

fn linear(domain: (f64, f64), range: (f64, f64)) -> ScaleMapping {
    let slope = (range.1 - range.0) / (domain.1 - domain.0);
    ScaleMapping::Linear {
        domain,
        range,
        slope,
        intercept: range.0 - slope * domain.0,
    }
}

fn pixels(decl: &ScaleDecl) -> (f64, f64) {
    match decl.range {
        RangeDecl::Pixels(a, b) => (a, b),
        _ => (0.0, 0.0),
    }
}

fn palette(decl: &ScaleDecl) -> Vec<String> {
    match &decl.range {
        RangeDecl::Colors(c) if !c.is_empty() => c.clone(),
        _ => PALETTE.iter().map(|c| c.to_string()).collect(),
    }
}

fn band_step(n: usize, padding_inner: f64, padding_outer: f64, span: f64) -> f64 {
    let denom = n as f64 - padding_inner + 2.0 * padding_outer;
    if denom > 0.0 {
        span / denom
    } else {
        0.0
    }
}

fn discrete_domain(decl: &ScaleDecl, source: Option<Vec<&Value>>) -> Result<Vec<Value>, ScaleError> {
    let domain = match (source, &decl.domain) {
        (Some(vals), _) => distinct(vals.into_iter().cloned()),
        (None, DomainDecl::Values(v)) => v.clone(),
        (None, DomainDecl::Data { .. }) => unreachable!("data domains always have a source"),
    };
    if domain.is_empty() {
        return Err(ScaleError::EmptyDomain(decl.name.clone()));
    }
    Ok(domain)
}

/// Resolve a scale against the final stage of each dataset's trace.
pub fn resolve_scale(
    decl: &ScaleDecl,
    traces: &BTreeMap<String, DataflowTrace>,
) -> Result<ResolvedScale, ScaleError> {
    let source = domain_source(decl, traces)?;
    let mapping = match decl.kind {
        ScaleKind::Linear => {
            let (mut lo, mut hi) = match (&source, &decl.domain) {
                (Some(vals), _) => numeric_extent(&decl.name, vals)?,
                (None, DomainDecl::Values(v)) => {
                    let nums: Vec<&Value> = v.iter().collect();
                    numeric_extent(&decl.name, &nums)?
                }
                (None, DomainDecl::Data { .. }) => unreachable!(),
            };
            if decl.zero {
                lo = lo.min(0.0);
                hi = hi.max(0.0);
            }
            if lo == hi {
                hi = lo + 1.0;
            }
            linear((lo, hi), pixels(decl))
        }
        ScaleKind::Band | ScaleKind::Point => {
            let domain = discrete_domain(decl, source)?;
            let (start, end) = pixels(decl);
            let padding_inner = if decl.kind == ScaleKind::Point { 1.0 } else { decl.padding_inner };
            ScaleMapping::Band {
                step: band_step(domain.len(), padding_inner, decl.padding_outer, (end - start).abs()),
                domain,
                start,
                end,
                padding_inner,
                padding_outer: decl.padding_outer,
            }
        }
        ScaleKind::Ordinal => ScaleMapping::Ordinal {
            domain: discrete_domain(decl, source)?,
            palette: palette(decl),
        },
    };
    Ok(ResolvedScale {
        name: decl.name.clone(),
        kind: decl.kind,
        mapping,
    })
}

/// Resolve a scale for the augmented layer while keeping the base layer's
/// mapping: linear scales keep slope and intercept and widen the range to the
/// new extent; band and point scales keep start, step and paddings and extend
/// the range by whole steps.
pub fn resolve_scale_extended(
    decl: &ScaleDecl,
    traces: &BTreeMap<String, DataflowTrace>,
    base: &ResolvedScale,
) -> Result<ResolvedScale, ScaleError> {
    let own = resolve_scale(decl, traces)?;
    let mapping = match (&base.mapping, own.mapping) {
        (
            ScaleMapping::Linear {
                domain: bd,
                slope,
                intercept,
                ..
            },
            ScaleMapping::Linear { domain: ad, .. },
        ) => {
            let domain = (bd.0.min(ad.0), bd.1.max(ad.1));
            ScaleMapping::Linear {
                domain,
                range: (slope * domain.0 + intercept, slope * domain.1 + intercept),
                slope: *slope,
                intercept: *intercept,
            }
        }
        (
            ScaleMapping::Band {
                start,
                end,
                step,
                padding_inner,
                padding_outer,
                ..
            },
            ScaleMapping::Band { domain, .. },
        ) => {
            let dir = if end < start { -1.0 } else { 1.0 };
            let span = step * (domain.len() as f64 - padding_inner + 2.0 * padding_outer);
            ScaleMapping::Band {
                end: start + dir * span,
                domain,
                start: *start,
                step: *step,
                padding_inner: *padding_inner,
                padding_outer: *padding_outer,
            }
        }
        (_, m) => m,
    };
    Ok(ResolvedScale { mapping, ..own })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::{ingest, DataflowTrace, SourceTag};
    use crate::spec::DatasetDecl;
    use crate::value::Row;

    fn no_traces() -> BTreeMap<String, DataflowTrace> {
        BTreeMap::new()
    }

    fn traces(name: &str, vals: &[f64]) -> BTreeMap<String, DataflowTrace> {
        let values = vals
            .iter()
            .map(|v| Row::from([("v".to_string(), Value::Number(*v))]))
            .collect();
        let mut decl = DatasetDecl::new(name, values);
        decl.fields = Some(vec!["v".into()]);
        let input = ingest(&decl, &decl.values, SourceTag::Base).unwrap();
        BTreeMap::from([(
            name.to_string(),
            DataflowTrace {
                dataset: name.into(),
                input,
                stages: vec![],
            },
        )])
    }

    #[test]
    fn linear_is_affine() {
        let decl = ScaleDecl::new(
            "x",
            ScaleKind::Linear,
            DomainDecl::Values(vec![Value::Number(0.0), Value::Number(10.0)]),
            RangeDecl::Pixels(0.0, 100.0),
        );
        let s = resolve_scale(&decl, &no_traces()).unwrap();
        assert_eq!(s.map(&Value::Number(5.0)), Some(50.0));
    }

    #[test]
    fn band_positions_follow_the_padding_formula() {
        let decl = ScaleDecl::new(
            "x",
            ScaleKind::Band,
            DomainDecl::Values(vec![Value::from("A"), Value::from("B")]),
            RangeDecl::Pixels(0.0, 100.0),
        );
        let s = resolve_scale(&decl, &no_traces()).unwrap();
        let ScaleMapping::Band { step, .. } = s.mapping else { panic!() };
        assert_eq!(step, 50.0);
        assert_eq!(s.map(&Value::from("A")), Some(2.5));
        assert_eq!(s.map(&Value::from("B")), Some(52.5));
        assert_eq!(s.bandwidth(), 45.0);
        assert_eq!(s.map(&Value::from("C")), None);
    }

    #[test]
    fn point_scale_has_no_bandwidth() {
        let decl = ScaleDecl::new(
            "x",
            ScaleKind::Point,
            DomainDecl::Values(vec![Value::from("A"), Value::from("B"), Value::from("C")]),
            RangeDecl::Pixels(0.0, 100.0),
        );
        let s = resolve_scale(&decl, &no_traces()).unwrap();
        // step = 100 / (3 - 1 + 2 * 0.5)
        assert!((s.map(&Value::from("A")).unwrap() - 100.0 / 6.0).abs() < 1e-12);
        assert!((s.map(&Value::from("C")).unwrap() - 500.0 / 6.0).abs() < 1e-12);
        assert_eq!(s.bandwidth(), 0.0);
    }

    #[test]
    fn data_driven_linear_domain_is_the_extent() {
        let decl = ScaleDecl::new(
            "y",
            ScaleKind::Linear,
            DomainDecl::Data {
                data: "t".into(),
                fields: vec!["v".into()],
            },
            RangeDecl::Pixels(0.0, 100.0),
        );
        let s = resolve_scale(&decl, &traces("t", &[3.0, 7.0, 5.0])).unwrap();
        let ScaleMapping::Linear { domain, .. } = s.mapping else { panic!() };
        assert_eq!(domain, (3.0, 7.0));
    }

    #[test]
    fn empty_data_domain_is_an_error() {
        let decl = ScaleDecl::new(
            "y",
            ScaleKind::Linear,
            DomainDecl::Data {
                data: "t".into(),
                fields: vec!["v".into()],
            },
            RangeDecl::Pixels(0.0, 100.0),
        );
        assert_eq!(
            resolve_scale(&decl, &traces("t", &[])),
            Err(ScaleError::EmptyDomain("y".into()))
        );
    }

    #[test]
    fn extended_linear_keeps_the_base_mapping() {
        let decl = ScaleDecl::new(
            "y",
            ScaleKind::Linear,
            DomainDecl::Data {
                data: "t".into(),
                fields: vec!["v".into()],
            },
            RangeDecl::Pixels(0.0, 100.0),
        );
        let base = resolve_scale(&decl, &traces("t", &[0.0, 10.0])).unwrap();
        let aug = resolve_scale_extended(&decl, &traces("t", &[0.0, 10.0, 20.0]), &base).unwrap();
        assert_eq!(aug.map(&Value::Number(5.0)), Some(50.0));
        let ScaleMapping::Linear { range, .. } = aug.mapping else { panic!() };
        assert_eq!(range, (0.0, 200.0));
    }

    #[test]
    fn ordinal_cycles_the_palette() {
        let decl = ScaleDecl::new(
            "c",
            ScaleKind::Ordinal,
            DomainDecl::Values((0..11).map(|i| Value::Number(i as f64)).collect()),
            RangeDecl::Category,
        );
        let s = resolve_scale(&decl, &no_traces()).unwrap();
        assert_eq!(s.color(&Value::Number(0.0)).unwrap(), PALETTE[0]);
        assert_eq!(s.color(&Value::Number(10.0)).unwrap(), PALETTE[0]);
    }
}
