//! Reference transforms written the slow, obvious way: quadratic scans, no
//! hashing, exact integer arithmetic where the inputs allow it.

use std::f64::consts::PI;

use augvis_core::value::Value;

/// `(key, aggregate)` per group, in order of first appearance.
pub fn aggregate(keys: &[Value], values: &[Option<f64>], op: &str) -> Vec<(Value, Option<f64>)> {
    let mut out = Vec::new();
    for (i, k) in keys.iter().enumerate() {
        if keys[..i].contains(k) {
            continue;
        }
        let members: Vec<Option<f64>> = (0..keys.len()).filter(|&j| keys[j] == *k).map(|j| values[j]).collect();
        let nums: Vec<f64> = members.iter().flatten().copied().collect();
        let agg = match op {
            "count" => Some(members.len() as f64),
            "sum" => Some(nums.iter().sum()),
            "mean" if nums.is_empty() => None,
            "mean" => Some(nums.iter().sum::<f64>() / nums.len() as f64),
            "min" => nums.iter().copied().reduce(|a, b| if b < a { b } else { a }),
            "max" => nums.iter().copied().reduce(|a, b| if b > a { b } else { a }),
            other => panic!("unknown op {other}"),
        };
        out.push((k.clone(), agg));
    }
    out
}

/// `(y0, y1)` per row: the sum of earlier group members' values, where
/// "earlier" is input order or, with `sort`, stable order of the sort values.
pub fn stack(keys: &[Value], values: &[f64], sort: Option<&[f64]>) -> Vec<(f64, f64)> {
    (0..keys.len())
        .map(|i| {
            let before = |j: usize| match sort {
                Some(s) => s[j] < s[i] || (s[j] == s[i] && j < i),
                None => j < i,
            };
            let y0: f64 = (0..keys.len())
                .filter(|&j| j != i && keys[j] == keys[i] && before(j))
                .map(|j| values[j])
                .sum();
            (y0, y0 + values[i])
        })
        .collect()
}

/// `(startAngle, endAngle)` per row; negative values count as zero.
pub fn pie(values: &[f64], start: f64) -> Vec<(f64, f64)> {
    let v: Vec<f64> = values.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = v.iter().sum();
    (0..v.len())
        .map(|i| {
            if total <= 0.0 {
                return (start, start);
            }
            let before: f64 = v[..i].iter().sum();
            (start + 2.0 * PI * before / total, start + 2.0 * PI * (before + v[i]) / total)
        })
        .collect()
}

/// A bin width `mantissa * 10^exp` with mantissa in {1, 2, 5}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub mantissa: i64,
    pub exp: i32,
}

impl Step {
    pub fn value(self) -> f64 {
        self.mantissa as f64 * 10f64.powi(self.exp)
    }
}

/// Number of bins of width `step` needed for an integer span, exactly.
fn bins_needed(span: i64, step: Step) -> i64 {
    // ceil(span / (m * 10^e)) with integer arithmetic.
    let (num, den) = if step.exp >= 0 {
        (span, step.mantissa * 10i64.pow(step.exp as u32))
    } else {
        (span * 10i64.pow((-step.exp) as u32), step.mantissa)
    };
    ((num + den - 1) / den).max(1)
}

/// Smallest {1,2,5}x10^k step covering an integer span in at most `maxbins`
/// bins, by enumerating candidates in increasing order.
pub fn nice_step(span: i64, maxbins: u32) -> Step {
    if span <= 0 {
        return Step { mantissa: 1, exp: 0 };
    }
    for exp in -6..=12 {
        for mantissa in [1, 2, 5] {
            let step = Step { mantissa, exp };
            if bins_needed(span, step) <= maxbins.max(1) as i64 {
                return step;
            }
        }
    }
    unreachable!("span too large")
}

/// `(bin0, bin1)` per integer value with an automatic extent.
pub fn bin_auto(values: &[i64], maxbins: u32) -> Vec<(f64, f64)> {
    let lo = *values.iter().min().expect("non-empty");
    let hi = *values.iter().max().expect("non-empty");
    let step = nice_step(hi - lo, maxbins);
    let count = bins_needed(hi - lo, step);
    values
        .iter()
        .map(|&v| {
            // Largest index whose lower edge is <= v, found by exact comparison.
            let scaled = |x: i64| if step.exp >= 0 { x } else { x * 10i64.pow((-step.exp) as u32) };
            let unit = if step.exp >= 0 { step.mantissa * 10i64.pow(step.exp as u32) } else { step.mantissa };
            let mut idx = 0;
            while scaled(v - lo) >= (idx + 1) * unit {
                idx += 1;
            }
            let idx = idx.min(count - 1);
            let b0 = lo as f64 + idx as f64 * step.value();
            (b0, b0 + step.value())
        })
        .collect()
}
