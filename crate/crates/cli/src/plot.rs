//! Vega-Lite descriptions of the `fig3` panels, data inlined.

use serde_json::{json, Value};

pub struct CurvePoint {
    pub chi: f64,
    pub s_loss: f64,
    pub s_tele: f64,
    pub p_total: f64,
}

const SCHEMA: &str = "https://vega.github.io/schema/vega-lite/v5.json";

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// CHSH values against χ with the classical bound drawn at 2.
pub fn chsh_panel(points: &[CurvePoint], transmission: f64) -> Value {
    let mut values = Vec::with_capacity(2 * points.len());
    for p in points {
        values.push(json!({"chi": p.chi, "S": finite(p.s_tele), "curve": "S_tele"}));
        values.push(json!({"chi": p.chi, "S": finite(p.s_loss), "curve": "S_loss"}));
    }
    json!({
        "$schema": SCHEMA,
        "title": format!("CHSH value, T = {transmission}"),
        "width": 420,
        "height": 300,
        "data": {"values": values},
        "layer": [
            {
                "mark": "line",
                "encoding": {
                    "x": {"field": "chi", "type": "quantitative", "title": "χ"},
                    "y": {"field": "S", "type": "quantitative", "title": "S"},
                    "color": {"field": "curve", "type": "nominal"},
                    "strokeDash": {
                        "field": "curve",
                        "type": "nominal",
                        "scale": {"domain": ["S_tele", "S_loss"], "range": [[1, 0], [6, 4]]}
                    }
                }
            },
            {
                "data": {"values": [{"bound": 2.0}]},
                "mark": {"type": "rule", "color": "gray"},
                "encoding": {"y": {"field": "bound", "type": "quantitative"}}
            }
        ]
    })
}

/// Total success probability against χ on a log axis.
pub fn probability_panel(points: &[CurvePoint], transmission: f64) -> Value {
    let values: Vec<Value> = points
        .iter()
        .filter(|p| p.p_total > 0.0 && p.p_total.is_finite())
        .map(|p| json!({"chi": p.chi, "p_PS_total": p.p_total}))
        .collect();
    json!({
        "$schema": SCHEMA,
        "title": format!("Total success probability, T = {transmission}"),
        "width": 420,
        "height": 300,
        "data": {"values": values},
        "mark": "line",
        "encoding": {
            "x": {"field": "chi", "type": "quantitative", "title": "χ"},
            "y": {
                "field": "p_PS_total",
                "type": "quantitative",
                "title": "p_PS",
                "scale": {"type": "log"}
            }
        }
    })
}
