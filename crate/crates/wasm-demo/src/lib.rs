//! Browser bindings. Every export returns a flat `Float64Array` whose
//! row layout is given in its doc comment.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;

use wasm_bindgen::prelude::*;
use weaklimit::families::{FamilyDescriptor, LimitData, MeasureFamily};
use weaklimit::spectral::{density_matrix, MatrixMeasure, DEFAULT_EPSILON};
use weaklimit::weak::{convergence_table, TableRow, TestFunction};

const MAX_POINTS: usize = 2001;
const MAX_N: usize = 5000;

/// `"a=1, b=0.5"` into a parameter map.
fn parse_params(text: &str) -> Result<BTreeMap<String, f64>, String> {
    let mut params = BTreeMap::new();
    for item in text
        .split([',', ';'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{item}'"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("'{}' is not a number", value.trim()))?;
        params.insert(key.trim().to_string(), value);
    }
    Ok(params)
}

fn build(family: &str, params: &str) -> Result<(MeasureFamily, LimitData), String> {
    let descriptor = FamilyDescriptor {
        name: family.to_string(),
        params: parse_params(params)?,
        cutoff_rule: String::new(),
        scaling: String::new(),
    };
    descriptor.build().map_err(|e| e.to_string())
}

/// `[xmin, xmax]` covering the bulk of the limit measure.
pub fn window(family: &str, params: &str) -> Result<Vec<f64>, String> {
    let (_, limit) = build(family, params)?;
    let (lo, hi) = limit.density_window();
    Ok(vec![lo, hi])
}

/// Rows `(x, mu11, mu12, mu22)`.
pub fn density_rows(
    family: &str,
    params: &str,
    xmin: f64,
    xmax: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in 2..={MAX_POINTS}"));
    }
    if !(xmin < xmax) {
        return Err("xmin must be below xmax".into());
    }
    let (_, limit) = build(family, params)?;
    let closed = match &limit.measure {
        _ if limit.bilateral.as_constant().is_some() => None,
        Some(m @ (MatrixMeasure::LaguerreHalf { .. } | MatrixMeasure::HermiteHalf)) => Some(m),
        _ => None,
    };
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        let x = xmin + (xmax - xmin) * i as f64 / (points - 1) as f64;
        let d = match closed {
            Some(m) => m.density(x).unwrap_or([f64::NAN; 3]),
            None => {
                density_matrix(&limit.bilateral, x, DEFAULT_EPSILON).map_err(|e| e.to_string())?
            }
        };
        out.extend_from_slice(&[x, d[0], d[1], d[2]]);
    }
    Ok(out)
}

/// Rows `(n, lhs, rhs, abs_error)`; failed rows carry NaN.
pub fn convergence_rows(
    family: &str,
    params: &str,
    k: i32,
    l: i32,
    f: &str,
    ns: &[u32],
) -> Result<Vec<f64>, String> {
    if ns.iter().any(|&n| n as usize > MAX_N) {
        return Err(format!("n is capped at {MAX_N} in the browser"));
    }
    let (family, limit) = build(family, params)?;
    let f = TestFunction::parse(f).map_err(|e| e.to_string())?;
    let ns: Vec<usize> = ns.iter().map(|&n| n as usize).collect();
    let table = convergence_table(&family, &limit, k as i64, l as i64, &f, &ns)
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * table.rows.len());
    for row in &table.rows {
        match row {
            TableRow::Ok(r) => out.extend_from_slice(&[r.n as f64, r.lhs, r.rhs, r.abs_error]),
            TableRow::Failed { n, .. } => {
                out.extend_from_slice(&[*n as f64, f64::NAN, f64::NAN, f64::NAN])
            }
        }
    }
    Ok(out)
}

/// Rows `(j, a_{n+j,n}, b_{n+j,n}, a_j, b_j)` for `|j| <= window`: the
/// member with parameter `n` read around row `n` next to the limit.
pub fn coefficient_rows(
    family: &str,
    params: &str,
    n: u32,
    window: u32,
) -> Result<Vec<f64>, String> {
    let n = n as usize;
    let window = window as usize;
    if n > MAX_N || window == 0 || window >= n {
        return Err(format!("need 1 <= window < n <= {MAX_N}"));
    }
    let (family, limit) = build(family, params)?;
    let member = family.member(n);
    let mut out = Vec::with_capacity(5 * (2 * window + 1));
    for j in -(window as i64)..=window as i64 {
        let row = (n as i64 + j) as usize;
        let a = if row == 0 { f64::NAN } else { member.a(row) };
        out.extend_from_slice(&[
            j as f64,
            a,
            member.b(row),
            limit.bilateral.a(j),
            limit.bilateral.b(j),
        ]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = densityWindow)]
pub fn density_window(family: &str, params: &str) -> Result<Vec<f64>, JsValue> {
    window(family, params).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = densityCurve)]
pub fn density_curve(
    family: &str,
    params: &str,
    xmin: f64,
    xmax: f64,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    density_rows(family, params, xmin, xmax, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = convergenceCurve)]
pub fn convergence_curve(
    family: &str,
    params: &str,
    k: i32,
    l: i32,
    f: &str,
    ns: Vec<u32>,
) -> Result<Vec<f64>, JsValue> {
    convergence_rows(family, params, k, l, f, &ns).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = coefficientProfile)]
pub fn coefficient_profile(
    family: &str,
    params: &str,
    n: u32,
    window: u32,
) -> Result<Vec<f64>, JsValue> {
    coefficient_rows(family, params, n, window).map_err(|e| JsValue::from_str(&e))
}
