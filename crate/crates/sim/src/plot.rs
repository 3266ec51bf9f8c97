//! Minimal deterministic SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::table::Table;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 240.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 40.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub struct Panel {
    pub title: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Dashed horizontal reference line
    pub reference: Option<f64>,
    /// Decades axis; non-positive values are not drawn
    pub log_y: bool,
}

/// Decades shown below the largest value on a log axis.
const LOG_DECADES: f64 = 15.0;

fn num(x: f64) -> String {
    format!("{x:.2}")
}

/// Label with just enough digits to tell neighbours `step` apart.
fn tick_label(v: f64, step: f64) -> String {
    if v.abs() < 1e-9 * step {
        return "0".into();
    }
    let step_exp = step.log10().floor() as i32;
    if v.abs() >= 1e5 || v.abs() < 1e-3 {
        let digits = (v.abs().log10().floor() as i32 - step_exp).clamp(0, 8) as usize;
        format!("{v:.digits$e}")
    } else {
        let decimals = (-step_exp).max(0) as usize;
        format!("{v:.decimals$}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    lo.is_finite().then_some((lo, hi))
}

/// Padded y range; spans below 1e-3 of the magnitude are widened so that
/// rounding noise on a constant series draws as a flat line.
fn y_range(lo: f64, hi: f64) -> (f64, f64) {
    let min_span = 1e-3 * lo.abs().max(hi.abs());
    if hi - lo <= min_span {
        let mid = 0.5 * (lo + hi);
        let half = if min_span > 0.0 { min_span } else { 1.0 };
        return (mid - half, mid + half);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Round tick positions (1, 2 or 5 times a power of ten) inside `[lo, hi]`,
/// and their spacing.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), step)
}

/// Renders stacked panels sharing the x axis.
pub fn render(title: &str, x_label: &str, panels: &[Panel]) -> Result<String> {
    let height = MARGIN_TOP + panels.len() as f64 * (PANEL_HEIGHT + MARGIN_BOTTOM);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        num(WIDTH),
        num(height),
        num(WIDTH),
        num(height)
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, num(WIDTH / 2.0), escape(title));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    for (k, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + k as f64 * (PANEL_HEIGHT + MARGIN_BOTTOM);
        let xs = panel.series.iter().flat_map(|se| se.x.iter().copied());
        let (x0, x1) = extent(xs).ok_or_else(|| SimError::Artifact(format!("panel '{}' has no data", panel.title)))?;
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 1.0, x0 + 1.0) };
        // all-zero data has no decades to show
        let log_y = panel.log_y && panel.series.iter().any(|se| se.y.iter().any(|&y| y > 0.0 && y.is_finite()));
        let to_axis = |y: f64| if log_y { if y > 0.0 { y.log10() } else { f64::NAN } } else { y };
        let ys = panel.series.iter().flat_map(|se| se.y.iter().copied()).chain(panel.reference).map(to_axis);
        let (y0, y1) = extent(ys).ok_or_else(|| SimError::Artifact(format!("panel '{}' has no data", panel.title)))?;
        let (y0, y1) = if log_y {
            let hi = y1.ceil().max(y0.floor() + 1.0);
            (y0.floor().max(hi - LOG_DECADES), hi)
        } else {
            y_range(y0, y1)
        };
        let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| top + PANEL_HEIGHT - ((y - y0) / (y1 - y0)).max(0.0) * PANEL_HEIGHT;

        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
            num(MARGIN_LEFT),
            num(top),
            num(plot_w),
            num(PANEL_HEIGHT)
        );
        let (y_ticks, y_step) = match ticks(y0, y1) {
            (_, step) if log_y && step < 1.0 => (((y0 as i64)..=(y1 as i64)).map(|k| k as f64).collect(), 1.0),
            t => t,
        };
        for fy in y_ticks {
            let label = if log_y { format!("1e{}", fy.round() as i64) } else { tick_label(fy, y_step) };
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                num(MARGIN_LEFT - 6.0),
                num(py(fy) + 4.0),
                label
            );
        }
        let (x_ticks, x_step) = ticks(x0, x1);
        for fx in x_ticks {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                num(px(fx)),
                num(top + PANEL_HEIGHT + 16.0),
                tick_label(fx, x_step)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            num(MARGIN_LEFT + plot_w / 2.0),
            num(top - 6.0),
            escape(&panel.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            num(top + PANEL_HEIGHT / 2.0),
            num(top + PANEL_HEIGHT / 2.0),
            escape(&panel.y_label)
        );
        if let Some(r) = panel.reference {
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000" stroke-dasharray="6,4"/>"##,
                num(MARGIN_LEFT),
                num(py(to_axis(r))),
                num(MARGIN_LEFT + plot_w),
                num(py(to_axis(r)))
            );
        }
        for (j, se) in panel.series.iter().enumerate() {
            let color = COLORS[j % COLORS.len()];
            let mut pts = String::new();
            for (&x, &y) in se.x.iter().zip(&se.y) {
                let y = to_axis(y);
                if x.is_finite() && y.is_finite() {
                    let _ = write!(pts, "{},{} ", num(px(x)), num(py(y)));
                }
            }
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                pts.trim_end()
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                num(MARGIN_LEFT + 8.0),
                num(top + 16.0 + 14.0 * j as f64),
                escape(&se.label)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(MARGIN_LEFT + plot_w / 2.0),
        num(height - 4.0),
        escape(x_label)
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn require_rows(table: &Table, what: &str) -> Result<()> {
    if table.rows.is_empty() {
        return Err(SimError::Artifact(format!("{what}: table has 0 rows, nothing to plot")));
    }
    Ok(())
}

fn col(table: &Table, name: &str) -> Result<Vec<f64>> {
    table.column(name).ok_or_else(|| SimError::Artifact(format!("missing column '{name}'")))
}

fn slot_norm(table: &Table, prefix: &str, slot: char) -> Result<Vec<f64>> {
    let cols: Vec<Vec<f64>> = ['x', 'y', 'z']
        .iter()
        .map(|a| col(table, &format!("{prefix}_{slot}{a}")))
        .collect::<Result<_>>()?;
    Ok((0..table.rows.len())
        .map(|i| (cols[0][i].powi(2) + cols[1][i].powi(2) + cols[2][i].powi(2)).sqrt())
        .collect())
}

fn hours(t: &[f64]) -> Vec<f64> {
    t.iter().map(|t| t / 3600.0).collect()
}

/// Log-error magnitudes per slot from a validation table.
pub fn error_components(table: &Table) -> Result<String> {
    require_rows(table, "error components")?;
    let t = hours(&col(table, "t_s")?);
    let slots = [('p', "position error |xi_p| [m]"), ('v', "velocity error |xi_v| [m/s]"), ('r', "attitude error |xi_R| [rad]")];
    let panels = slots
        .iter()
        .map(|&(c, label)| {
            Ok(Panel {
                title: label.into(),
                y_label: label.split(' ').next().unwrap_or("").into(),
                series: vec![Series { label: "classical".into(), x: t.clone(), y: slot_norm(table, "xi_classical", c)? }],
                reference: None,
                log_y: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    render("Log-error growth", "time [h]", &panels)
}

/// Per-slot residual between the two propagation methods.
pub fn residuals(table: &Table) -> Result<String> {
    require_rows(table, "residuals")?;
    let t = hours(&col(table, "t_s")?);
    let slots = [('p', "position residual [m]"), ('v', "velocity residual [m/s]"), ('r', "attitude residual [rad]")];
    let panels = slots
        .iter()
        .map(|&(c, label)| {
            Ok(Panel {
                title: label.into(),
                y_label: label.split(' ').next().unwrap_or("").into(),
                series: vec![Series { label: "log-error minus classical".into(), x: t.clone(), y: slot_norm(table, "delta", c)? }],
                reference: None,
                log_y: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    render("Propagation residual", "time [h]", &panels)
}

/// Actual mismatch against the pointwise bound, and their ratio against 1.
pub fn bound_ratio(table: &Table) -> Result<String> {
    require_rows(table, "bound ratio")?;
    let t = hours(&col(table, "t_s")?);
    let panels = vec![
        Panel {
            title: "gravity mismatch [m/s^2]".into(),
            y_label: "acceleration".into(),
            series: vec![
                Series { label: "actual".into(), x: t.clone(), y: col(table, "actual_mismatch_m_s2")? },
                Series { label: "pointwise bound".into(), x: t.clone(), y: col(table, "pointwise_bound_m_s2")? },
            ],
            reference: None,
            log_y: false,
        },
        Panel {
            title: "actual / bound".into(),
            y_label: "ratio".into(),
            series: vec![Series { label: "ratio".into(), x: t, y: col(table, "ratio")? }],
            reference: Some(1.0),
            log_y: false,
        },
    ];
    render("Gravity mismatch bound", "time [h]", &panels)
}

/// Error norms with and without feedback against their linear predictions.
pub fn stabilization(table: &Table) -> Result<String> {
    require_rows(table, "stabilization")?;
    let t = hours(&col(table, "t_s")?);
    let env = col(table, "envelope")?;
    let mut closed = vec![
        Series { label: "truth".into(), x: t.clone(), y: col(table, "closed_loop_norm")? },
        Series { label: "linear prediction".into(), x: t.clone(), y: col(table, "closed_loop_linear_norm")? },
    ];
    if env.iter().any(|v| v.is_finite()) {
        closed.push(Series { label: "envelope".into(), x: t.clone(), y: env });
    }
    let panels = vec![
        Panel {
            title: "gravity cancellation only: |xi|".into(),
            y_label: "norm".into(),
            series: vec![
                Series { label: "truth".into(), x: t.clone(), y: col(table, "feedforward_norm")? },
                Series { label: "linear prediction".into(), x: t.clone(), y: col(table, "feedforward_linear_norm")? },
            ],
            reference: None,
            log_y: false,
        },
        Panel {
            title: "with stabilizing feedback: |xi|".into(),
            y_label: "norm".into(),
            series: closed,
            reference: None,
            log_y: true,
        },
    ];
    render("Closed-loop log-error", "time [h]", &panels)
}

pub fn write(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg).map_err(|e| SimError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bound_table(n: usize) -> Table {
        let mut t = Table::new(["t_s", "actual_mismatch_m_s2", "pointwise_bound_m_s2", "ratio"]);
        for i in 0..n {
            let a = (i as f64 * 0.1).sin().abs();
            t.push(vec![i as f64 * 10.0, a, 2.0 * a + 0.1, a / (2.0 * a + 0.1)]);
        }
        t
    }

    #[test]
    fn empty_table_is_an_error() {
        let err = bound_ratio(&bound_table(0)).unwrap_err();
        assert!(err.to_string().contains("0 rows"));
    }

    #[test]
    fn deterministic_output() {
        let a = bound_ratio(&bound_table(50)).unwrap();
        let b = bound_ratio(&bound_table(50)).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("stroke-dasharray"));
        assert_eq!(a.matches("<polyline").count(), 3);
    }

    #[test]
    fn round_ticks() {
        assert_eq!(ticks(0.0, 24.0), (vec![0.0, 5.0, 10.0, 15.0, 20.0], 5.0));
        assert_eq!(ticks(-0.3, 1.1), (vec![0.0, 0.5, 1.0], 0.5));
        let (lo, hi) = y_range(0.05 - 1e-14, 0.05 + 1e-14);
        assert!(hi - lo > 1e-5);
    }

    #[test]
    fn log_axis_labels_decades_and_tolerates_zeros() {
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|t| 10f64.powf(2.0 - 0.2 * t)).chain([0.0]).take(50).collect();
        let panel = |y: Vec<f64>| Panel {
            title: "p".into(),
            y_label: "y".into(),
            series: vec![Series { label: "s".into(), x: x.clone(), y }],
            reference: None,
            log_y: true,
        };
        let svg = render("t", "x", &[panel(y)]).unwrap();
        assert!(svg.contains(">1e2<") && svg.contains(">1e-6<"));
        assert!(render("t", "x", &[panel(vec![0.0; 50])]).is_ok());
    }

    #[test]
    fn tick_labels_resolve_the_step() {
        assert_eq!(tick_label(0.05, 1e-5), "0.05000");
        assert_eq!(tick_label(0.04999, 1e-5), "0.04999");
        assert_eq!(tick_label(2.0e6, 5e5), "2.0e6");
        assert_eq!(tick_label(15.0, 5.0), "15");
        assert_eq!(tick_label(1e-17, 0.2), "0");
    }

    #[test]
    fn constant_series_renders() {
        let mut t = Table::new(["t_s", "actual_mismatch_m_s2", "pointwise_bound_m_s2", "ratio"]);
        t.push(vec![0.0, 0.0, 0.0, 0.0]);
        t.push(vec![1.0, 0.0, 0.0, 0.0]);
        assert!(bound_ratio(&t).is_ok());
    }
}
