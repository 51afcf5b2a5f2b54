//! Hand-rolled SVG 1.1 line plots, enough for kernel curves and study
//! trends without pulling in a plotting stack. Output is deterministic:
//! fixed canvas, fixed precision coordinates.

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub color: &'a str,
    pub dashed: bool,
}

const W: f64 = 720.0;
const H: f64 = 480.0;
const ML: f64 = 82.0;
const MR: f64 = 26.0;
const MT: f64 = 46.0;
const MB: f64 = 58.0;

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(0.001..10_000.0).contains(&a) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One plot: optional log-scaled x axis, optional horizontal reference
/// line. Panics on empty input only through the range fold, so callers pass
/// at least one nonempty series.
pub fn line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    log_x: bool,
    series: &[Series],
    hline: Option<(f64, &str)>,
) -> String {
    let tx = |x: f64| if log_x { x.log10() } else { x };

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            xmin = xmin.min(tx(x));
            xmax = xmax.max(tx(x));
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if let Some((y, _)) = hline {
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if xmax - xmin < 1e-12 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if ymax - ymin < 1e-12 {
        let pad = 0.1 * ymax.abs().max(1e-9);
        ymin -= pad;
        ymax += pad;
    }
    let ypad = 0.08 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    let xpad = 0.04 * (xmax - xmin);
    xmin -= xpad;
    xmax += xpad;

    let px = |x: f64| ML + (tx(x) - xmin) / (xmax - xmin) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"#ffffff\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"26\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        (ML + W - MR) / 2.0,
        esc(title)
    ));

    // tick positions: data x values when few and log-scaled, else uniform
    let mut xticks: Vec<f64> = Vec::new();
    if log_x {
        let mut xs: Vec<f64> = series
            .iter()
            .flat_map(|s| s.points.iter().map(|&(x, _)| x))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() <= 8 {
            xticks = xs;
        }
    }
    if xticks.is_empty() {
        for i in 0..=4 {
            let t = xmin + (xmax - xmin) * f64::from(i) / 4.0;
            xticks.push(if log_x { 10f64.powf(t) } else { t });
        }
    }
    for &x in &xticks {
        let gx = px(x);
        out.push_str(&format!(
            "<line x1=\"{gx:.2}\" y1=\"{MT}\" x2=\"{gx:.2}\" y2=\"{:.2}\" stroke=\"#e4e4e4\"/>\n",
            H - MB
        ));
        out.push_str(&format!(
            "<text x=\"{gx:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            H - MB + 20.0,
            fmt_tick(x)
        ));
    }
    for i in 0..=4 {
        let y = ymin + (ymax - ymin) * f64::from(i) / 4.0;
        let gy = py(y);
        out.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{gy:.2}\" x2=\"{:.2}\" y2=\"{gy:.2}\" stroke=\"#e4e4e4\"/>\n",
            W - MR
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            ML - 8.0,
            gy + 4.0,
            fmt_tick(y)
        ));
    }
    out.push_str(&format!(
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#888888\"/>\n",
        W - ML - MR,
        H - MT - MB
    ));

    if let Some((y, label)) = hline {
        let gy = py(y);
        out.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{gy:.2}\" x2=\"{:.2}\" y2=\"{gy:.2}\" stroke=\"#777777\" \
             stroke-dasharray=\"3 4\"/>\n",
            W - MR
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" fill=\"#555555\">{}</text>\n",
            W - MR - 6.0,
            gy - 6.0,
            esc(label)
        ));
    }

    for s in series {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let dash = if s.dashed {
            " stroke-dasharray=\"7 4\""
        } else {
            ""
        };
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"{dash}/>\n",
            pts.join(" "),
            s.color
        ));
    }

    // legend, top-left inside the frame
    for (i, s) in series.iter().enumerate() {
        let y = MT + 18.0 + 18.0 * i as f64;
        let dash = if s.dashed {
            " stroke-dasharray=\"7 4\""
        } else {
            ""
        };
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" \
             stroke-width=\"1.8\"{dash}/>\n",
            ML + 12.0,
            ML + 40.0,
            s.color
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>\n",
            ML + 46.0,
            y + 4.0,
            esc(s.label)
        ));
    }

    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 14.0,
        esc(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">{}</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        esc(y_label)
    ));
    out.push_str("</svg>\n");
    out
}
