//! Self-contained SVG line chart of cumulative regret and per-episode gap.

/// Renders two series against the episode axis. Each series is scaled to its
/// own vertical range; the legend carries the numeric maxima so the chart is
/// readable without further tooling.
pub fn regret_chart(episodes: &[usize], gaps: &[f64], cum_regret: &[f64]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const MARGIN: f64 = 50.0;
    let plot_w = W - 2.0 * MARGIN;
    let plot_h = H - 2.0 * MARGIN;

    let x_max = episodes.last().copied().unwrap_or(1).max(1) as f64;
    let x_of = |e: usize| MARGIN + plot_w * (e as f64 / x_max);
    let polyline = |values: &[f64], color: &str| -> String {
        let v_max = values.iter().cloned().fold(0.0f64, f64::max).max(1e-12);
        let pts: Vec<String> = episodes
            .iter()
            .zip(values)
            .map(|(&e, &v)| {
                let x = x_of(e);
                let y = MARGIN + plot_h * (1.0 - v / v_max);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        )
    };

    let gap_max = gaps.iter().cloned().fold(0.0f64, f64::max);
    let reg_max = cum_regret.iter().cloned().fold(0.0f64, f64::max);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    ));
    svg.push_str(&polyline(cum_regret, "#1f77b4"));
    svg.push('\n');
    svg.push_str(&polyline(gaps, "#d62728"));
    svg.push('\n');
    svg.push_str(&format!(
        "<text x=\"{m}\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\" fill=\"#1f77b4\">cumulative regret (max {reg_max:.4})</text>\n",
        m = MARGIN,
        y = MARGIN - 28.0
    ));
    svg.push_str(&format!(
        "<text x=\"{m}\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\" fill=\"#d62728\">nash gap (max {gap_max:.4})</text>\n",
        m = MARGIN,
        y = MARGIN - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"12\">episode (K = {k})</text>\n",
        x = W / 2.0 - 40.0,
        y = H - MARGIN / 3.0,
        k = episodes.last().copied().unwrap_or(0)
    ));
    svg.push_str("</svg>\n");
    svg
}
