//! Static SVG charts from `plot_data.json`.

use std::fmt::Write;

use anyhow::{anyhow, Result};
use serde_json::Value;

const W: f64 = 720.0;
const H: f64 = 360.0;
const PAD_L: f64 = 56.0;
const PAD_R: f64 = 16.0;
const PAD_T: f64 = 36.0;
const PAD_B: f64 = 44.0;

/// One box: (x label, stats object with q1/median/q3/whisker_low/whisker_high/outliers).
struct BoxItem<'a> {
    label: String,
    stats: &'a Value,
}

fn num(v: &Value, key: &str) -> Result<f64> {
    v.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| anyhow!("plot data: missing number `{key}`"))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A "nice" upper bound for the y axis.
fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&m| m >= v)
        .unwrap_or(10.0 * mag)
}

fn box_chart(title: &str, y_label: &str, items: &[BoxItem], line: Option<&[Option<f64>]>) -> Result<String> {
    let mut hi: f64 = 0.0;
    for it in items {
        if !it.stats.is_null() {
            hi = hi.max(num(it.stats, "max")?);
        }
    }
    let y_max = nice_max(hi);
    let plot_w = W - PAD_L - PAD_R;
    let plot_h = H - PAD_T - PAD_B;
    let slot = plot_w / items.len().max(1) as f64;
    let y = |v: f64| PAD_T + plot_h * (1.0 - v / y_max);
    let x_mid = |i: usize| PAD_L + slot * (i as f64 + 0.5);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{PAD_L}" x2="{}" y1="{yy:.1}" y2="{yy:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
            W - PAD_R,
            PAD_L - 4.0,
            yy + 4.0,
            v
        );
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(14 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        PAD_T + plot_h / 2.0,
        escape(y_label)
    );
    let half = (slot * 0.3).min(14.0);
    for (i, it) in items.iter().enumerate() {
        let cx = x_mid(i);
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{}" text-anchor="middle">{}</text>"#,
            H - PAD_B + 16.0,
            escape(&it.label)
        );
        if it.stats.is_null() {
            continue;
        }
        let (q1, med, q3) = (num(it.stats, "q1")?, num(it.stats, "median")?, num(it.stats, "q3")?);
        let (wl, wh) = (num(it.stats, "whisker_low")?, num(it.stats, "whisker_high")?);
        let _ = writeln!(
            s,
            r##"<line x1="{cx:.1}" x2="{cx:.1}" y1="{:.1}" y2="{:.1}" stroke="#333"/>"##,
            y(wh),
            y(wl)
        );
        for w in [wl, wh] {
            let _ = writeln!(
                s,
                r##"<line x1="{:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#333"/>"##,
                cx - half / 2.0,
                cx + half / 2.0,
                y(w),
                y(w)
            );
        }
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#9ecae1" stroke="#333"/>"##,
            cx - half,
            y(q3),
            2.0 * half,
            (y(q1) - y(q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#d62728" stroke-width="2"/>"##,
            cx - half,
            cx + half,
            y(med),
            y(med)
        );
        if let Some(out) = it.stats.get("outliers").and_then(Value::as_array) {
            for o in out.iter().filter_map(Value::as_f64) {
                let _ = writeln!(
                    s,
                    r##"<circle cx="{cx:.1}" cy="{:.1}" r="2.5" fill="none" stroke="#333"/>"##,
                    y(o)
                );
            }
        }
    }
    if let Some(points) = line {
        let pts: Vec<String> = points
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| format!("{:.1},{:.1}", x_mid(i), y(v))))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#ff7f0e" stroke-width="1.5"/>"##,
                pts.join(" ")
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Returns (file name, SVG) pairs: one minimum-bid chart per setting and
/// one chart of final satisfaction rates across settings.
pub fn render_all(data: &Value) -> Result<Vec<(String, String)>> {
    let settings = data
        .get("settings")
        .and_then(Value::as_array)
        .ok_or_else(|| anyhow!("plot data has no `settings` array"))?;
    let mut out = Vec::new();
    let mut rsr_items = Vec::new();
    for st in settings {
        let id = st.get("setting_id").and_then(Value::as_u64).unwrap_or(0);
        let label = st.get("label").and_then(Value::as_str).unwrap_or("");
        let days = st
            .get("min_bid_box")
            .and_then(Value::as_array)
            .ok_or_else(|| anyhow!("setting {id}: no `min_bid_box`"))?;
        let items: Vec<BoxItem> = days
            .iter()
            .map(|d| BoxItem {
                label: d.get("day").map(Value::to_string).unwrap_or_default(),
                stats: d.get("stats").unwrap_or(&Value::Null),
            })
            .collect();
        let medians: Vec<Option<f64>> = days
            .iter()
            .map(|d| d.get("stats").and_then(|s| s.get("median")).and_then(Value::as_f64))
            .collect();
        let title = format!("Setting {id}: minimum successful bid per day ({label})");
        out.push((
            format!("setting-{id}-min-bid.svg"),
            box_chart(&title, "bid ($)", &items, Some(&medians))?,
        ));
        rsr_items.push(BoxItem {
            label: format!("{id}"),
            stats: st
                .get("rsr_e")
                .and_then(|d| d.get("stats"))
                .unwrap_or(&Value::Null),
        });
    }
    if !rsr_items.is_empty() {
        out.push((
            "rsr-e.svg".to_string(),
            box_chart("Final resource satisfaction rate by setting", "RSR_E", &rsr_items, None)?,
        ));
    }
    Ok(out)
}
