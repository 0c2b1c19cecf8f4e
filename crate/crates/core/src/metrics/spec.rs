//! The metric mini-language used by CLI flags and config files:
//!
//! ```text
//! builtin:<name>[,<k>=<v>...]
//! warp:base=<spec>;fiber=<spec>;f=<expr>
//! explicit:g11=<expr>,g12=<expr>,...;box=a1,b1,a2,b2[,...][;periodic=0101]
//! ```

use super::{builtin, warped_product, BuiltinParams, ChartDomain, MetricField};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};

/// Parse a metric spec string into a metric and its chart.
pub fn parse_metric_spec(spec: &str) -> Result<(MetricField, ChartDomain)> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("builtin:") {
        parse_builtin(rest)
    } else if let Some(rest) = spec.strip_prefix("warp:") {
        parse_warp(rest)
    } else if let Some(rest) = spec.strip_prefix("explicit:") {
        parse_explicit(rest)
    } else {
        Err(Error::MetricSpec(format!(
            "spec must start with `builtin:`, `warp:` or `explicit:`, got `{spec}`"
        )))
    }
}

fn parse_builtin(rest: &str) -> Result<(MetricField, ChartDomain)> {
    let mut pieces = rest.split(',');
    let name = pieces
        .next()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::MetricSpec("missing builtin name".into()))?;
    let mut params = BuiltinParams::default();
    for kv in pieces {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::MetricSpec(format!("parameter `{kv}` is not k=v")))?;
        let k = k.trim();
        if k == "f" {
            params.exprs.insert(k.to_string(), parse(v)?);
        } else {
            let value: f64 = v.trim().parse().map_err(|_| Error::BadParameter {
                name: k.to_string(),
                reason: format!("`{v}` is not a number"),
            })?;
            params.reals.insert(k.to_string(), value);
        }
    }
    builtin(name.trim(), &params)
}

fn parse_warp(rest: &str) -> Result<(MetricField, ChartDomain)> {
    let rest = rest
        .strip_prefix("base=")
        .ok_or_else(|| Error::MetricSpec("warp spec must start with `base=`".into()))?;
    let (base_spec, rest) = rest
        .split_once(";fiber=")
        .ok_or_else(|| Error::MetricSpec("warp spec is missing `;fiber=`".into()))?;
    let (fiber_spec, f_text) = rest
        .split_once(";f=")
        .ok_or_else(|| Error::MetricSpec("warp spec is missing `;f=`".into()))?;
    for (label, s) in [("base", base_spec), ("fiber", fiber_spec)] {
        if !s.starts_with("builtin:") {
            return Err(Error::MetricSpec(format!(
                "warp {label} must be a `builtin:` spec (got `{s}`); use `explicit:` for anything else"
            )));
        }
    }
    let (base, base_chart) = parse_metric_spec(base_spec)?;
    let (fiber, fiber_chart) = parse_metric_spec(fiber_spec)?;
    let f = parse(f_text)?;
    warped_product(&base, &base_chart, &fiber, &fiber_chart, f)
}

fn parse_explicit(rest: &str) -> Result<(MetricField, ChartDomain)> {
    let mut entries_text = None;
    let mut box_text = None;
    let mut periodic_text = None;
    for (idx, seg) in rest.split(';').enumerate() {
        if let Some(v) = seg.strip_prefix("box=") {
            box_text = Some(v);
        } else if let Some(v) = seg.strip_prefix("periodic=") {
            periodic_text = Some(v);
        } else if idx == 0 {
            entries_text = Some(seg);
        } else {
            return Err(Error::MetricSpec(format!("unrecognised segment `{seg}`")));
        }
    }
    let entries_text =
        entries_text.ok_or_else(|| Error::MetricSpec("explicit spec has no entries".into()))?;
    let box_text = box_text
        .ok_or_else(|| Error::MetricSpec("explicit spec needs `box=a1,b1,...`".into()))?;

    let bounds: Vec<f64> = box_text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::MetricSpec(format!("box bound `{s}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if bounds.len() % 2 != 0 || bounds.is_empty() || bounds.len() > 8 {
        return Err(Error::MetricSpec(format!(
            "box needs dim pairs of bounds, got {} numbers",
            bounds.len()
        )));
    }
    let dim = bounds.len() / 2;
    let mut lower = [0.0; 4];
    let mut upper = [0.0; 4];
    for i in 0..dim {
        lower[i] = bounds[2 * i];
        upper[i] = bounds[2 * i + 1];
    }

    let mut periodic = [false; 4];
    if let Some(p) = periodic_text {
        if p.len() != dim || !p.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::MetricSpec(format!(
                "periodic mask `{p}` must be {dim} characters of 0/1"
            )));
        }
        for (i, b) in p.bytes().enumerate() {
            periodic[i] = b == b'1';
        }
    }

    let mut upper_entries: Vec<Vec<Option<Expr>>> = vec![vec![None; dim]; dim];
    for kv in entries_text.split(',') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::MetricSpec(format!("entry `{kv}` is not gij=expr")))?;
        let k = k.trim();
        let bytes = k.as_bytes();
        if bytes.len() != 3 || bytes[0] != b'g' {
            return Err(Error::MetricSpec(format!("entry key `{k}` is not of the form gij")));
        }
        let i = (bytes[1] as char).to_digit(10);
        let j = (bytes[2] as char).to_digit(10);
        let (i, j) = match (i, j) {
            (Some(i), Some(j)) if i >= 1 && j >= 1 => (i as usize - 1, j as usize - 1),
            _ => return Err(Error::MetricSpec(format!("entry key `{k}` is not of the form gij"))),
        };
        if i >= dim || j >= dim || i > j {
            return Err(Error::MetricSpec(format!(
                "entry `{k}` outside the upper triangle of a {dim}x{dim} metric"
            )));
        }
        upper_entries[i][j] = Some(parse(v)?);
    }
    for i in 0..dim {
        if upper_entries[i][i].is_none() {
            return Err(Error::MetricSpec(format!("missing diagonal entry g{}{}", i + 1, i + 1)));
        }
    }

    let metric = MetricField::from_upper(dim, "explicit", |i, j| {
        upper_entries[i][j].clone().unwrap_or(Expr::Num(0.0))
    });
    let chart = ChartDomain::new(dim, lower, upper, periodic, [false; 4])?;
    Ok((metric, chart))
}
