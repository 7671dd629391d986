//! Browser bindings: oracle queries, region charts and small Ext tables.

use serde_json::json;
use wasm_bindgen::prelude::*;

use vanishing_core::chart::{region_e2_chart, render_svg};
use vanishing_core::cobar::ext_table;
use vanishing_core::oracle::{vanish, FieldClass, Localization, StemTable};
use vanishing_core::slice::Window;

/// Largest `t` the page may ask for; keeps the UI thread responsive.
pub const EXT_T_LIMIT: u32 = 24;

fn field_class(field: &str, q: u64) -> Result<FieldClass, String> {
    Ok(match field {
        "eta-complete" => FieldClass::EtaComplete { q },
        "nonreal" => FieldClass::NonrealChar0,
        "positive-char" => FieldClass::PositiveCharPerfectFiniteCd { q },
        "formally-real" => FieldClass::FormallyReal,
        "unspecified" => FieldClass::Unspecified,
        other => return Err(format!("unknown field class {other:?}")),
    })
}

pub fn vanish_json(m: i64, n: i64, field: &str, q: u64, prime: u64) -> Result<String, String> {
    let field = field_class(field, q)?;
    let loc = if prime == 0 { Localization::Integral } else { Localization::PLocal { p: prime } };
    let verdict = vanish(m, n, field, loc, &StemTable::seed()).map_err(|e| e.to_string())?;
    serde_json::to_string_pretty(&verdict).map_err(|e| e.to_string())
}

pub fn region_svg(m_min: i64, m_max: i64, n_min: i64, n_max: i64) -> Result<String, String> {
    let window = Window { m_min, m_max, n_min, n_max };
    if window.is_empty() {
        return Err("empty window".into());
    }
    if m_max - m_min > 200 || n_max - n_min > 400 {
        return Err("window too large for the demo".into());
    }
    let chart = region_e2_chart(window).map_err(|e| e.to_string())?;
    Ok(render_svg(&chart))
}

pub fn ext_json(p: u64, s_max: usize, t_max: u32) -> Result<String, String> {
    if t_max > EXT_T_LIMIT {
        return Err(format!("t_max is capped at {EXT_T_LIMIT} in the browser"));
    }
    let table = ext_table(p, s_max, t_max).map_err(|e| e.to_string())?;
    let mut rows: Vec<_> = table.nonzero().map(|((s, t), g)| (s, t, g.to_string())).collect();
    rows.sort();
    let rows: Vec<_> = rows.into_iter().map(|(s, t, g)| json!({"s": s, "t": t, "group": g})).collect();
    Ok(json!({"prime": p, "s_max": s_max, "t_max": t_max, "nonzero": rows}).to_string())
}

#[wasm_bindgen(js_name = vanishQuery)]
pub fn vanish_query(m: i64, n: i64, field: &str, q: u64, prime: u64) -> Result<String, JsError> {
    vanish_json(m, n, field, q, prime).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = regionChart)]
pub fn region_chart(m_min: i64, m_max: i64, n_min: i64, n_max: i64) -> Result<String, JsError> {
    region_svg(m_min, m_max, n_min, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = extGroups)]
pub fn ext_groups(p: u64, s_max: usize, t_max: u32) -> Result<String, JsError> {
    ext_json(p, s_max, t_max).map_err(|e| JsError::new(&e))
}
