use std::path::Path;

use oscbath::EntanglementReport;
use plotters::prelude::*;

type PlotResult = Result<(), Box<dyn std::error::Error>>;

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = 0.05 * (hi - lo).max(1e-6);
    (lo - pad, hi + pad)
}

/// −η_j (larger means more entangled) and, for three modes, the best combined variance against t.
pub fn entanglement(reports: &[EntanglementReport], path: &Path) -> PlotResult {
    let Some(last) = reports.last() else {
        return Ok(());
    };
    let t_end = last.time.max(1e-12);
    let has_variance = reports.iter().any(|r| r.best_variance.is_some());
    let root = SVGBackend::new(path, (900, if has_variance { 700 } else { 380 })).into_drawing_area();
    root.fill(&WHITE)?;
    let panels = if has_variance {
        root.split_evenly((2, 1))
    } else {
        vec![root.clone()]
    };

    let n = last.eta.len();
    let (lo, hi) = range(reports.iter().flat_map(|r| r.eta.iter().map(|e| -e)));
    let mut chart = ChartBuilder::on(&panels[0])
        .margin(12)
        .x_label_area_size(32)
        .y_label_area_size(64)
        .build_cartesian_2d(0.0..t_end, lo.min(0.0)..hi.max(0.0))?;
    chart.configure_mesh().x_desc("t").y_desc("-eta").draw()?;
    for j in 0..n {
        let color = Palette99::pick(j).to_rgba();
        chart
            .draw_series(LineSeries::new(reports.iter().map(|r| (r.time, -r.eta[j])), color))?
            .label(format!("-eta_{}", j + 1))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    chart.configure_series_labels().border_style(BLACK).background_style(WHITE).draw()?;

    if has_variance {
        let (lo, hi) = range(reports.iter().filter_map(|r| r.best_variance));
        let mut chart = ChartBuilder::on(&panels[1])
            .margin(12)
            .x_label_area_size(32)
            .y_label_area_size(64)
            .build_cartesian_2d(0.0..t_end, lo.min(0.9)..hi.max(1.1))?;
        chart.configure_mesh().x_desc("t").y_desc("min combined variance").draw()?;
        chart.draw_series(LineSeries::new(
            reports.iter().filter_map(|r| r.best_variance.map(|v| (r.time, v))),
            BLUE,
        ))?;
        chart.draw_series(LineSeries::new([(0.0, 1.0), (t_end, 1.0)], BLACK.mix(0.4)))?;
    }
    root.present()?;
    Ok(())
}
