//! Minimal native SVG line charts: one polyline per series plus a shaded
//! ±std band. No plotting dependency, deterministic output.

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// One line on the chart: per-epoch mean and std, 1-based epochs.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Render a line chart with the y axis fixed to [0, 1].
pub fn line_chart(title: &str, y_label: &str, series: &[Series]) -> String {
    let max_epochs = series.iter().map(|s| s.mean.len()).max().unwrap_or(1).max(1);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let x_of = |epoch: usize| {
        MARGIN_L
            + if max_epochs > 1 {
                plot_w * (epoch as f64 - 1.0) / (max_epochs as f64 - 1.0)
            } else {
                plot_w / 2.0
            }
    };
    let y_of = |v: f64| MARGIN_T + plot_h * (1.0 - v.clamp(0.0, 1.0));

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        title
    ));

    // axes and gridlines
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#dddddd\"/>\n",
            MARGIN_L + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            y + 4.0,
            fmt(v)
        ));
    }
    let x_ticks = 6.min(max_epochs);
    for i in 0..x_ticks {
        let epoch = 1 + i * (max_epochs - 1) / x_ticks.saturating_sub(1).max(1);
        let x = x_of(epoch);
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{epoch}</text>\n",
            MARGIN_T + plot_h + 18.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">epoch</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{y_label}</text>\n",
        MARGIN_T + plot_h / 2.0
    ));
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333333\"/>\n"
    ));

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if s.mean.is_empty() {
            continue;
        }
        // shaded ±std band
        let mut band = String::from("<polygon points=\"");
        for (i, (&m, &sd)) in s.mean.iter().zip(&s.std).enumerate() {
            band.push_str(&format!("{:.2},{:.2} ", x_of(i + 1), y_of(m + sd)));
        }
        for (i, (&m, &sd)) in s.mean.iter().zip(&s.std).enumerate().rev() {
            band.push_str(&format!("{:.2},{:.2} ", x_of(i + 1), y_of(m - sd)));
        }
        band.push_str(&format!("\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n"));
        svg.push_str(&band);

        let mut line = String::from("<polyline points=\"");
        for (i, &m) in s.mean.iter().enumerate() {
            line.push_str(&format!("{:.2},{:.2} ", x_of(i + 1), y_of(m)));
        }
        line.push_str(&format!(
            "\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n"
        ));
        svg.push_str(&line);

        // legend
        let ly = MARGIN_T + 16.0 * si as f64 + 8.0;
        let lx = MARGIN_L + plot_w + 12.0;
        svg.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            lx + 18.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            lx + 24.0,
            ly + 4.0,
            s.name
        ));
    }

    svg.push_str("</svg>\n");
    svg
}
