//! Long-format plot data (gradient norm against data passes) and SVG output.

use std::path::Path;

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::trace::Trace;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub series: String,
    pub data_passes: f64,
    pub grad_norm: f64,
}

/// One `<label>-last` series per trace, plus `<label>-avg` from the
/// time-average column when `include_avg` is set. The label defaults to the
/// solver recorded in the trace header.
pub fn plot_rows(traces: &[(Option<String>, Trace)], include_avg: bool) -> Result<Vec<PlotRow>> {
    if traces.is_empty() {
        return Err(Error::invalid("no traces to plot"));
    }
    let mut out = Vec::new();
    for (i, (label, trace)) in traces.iter().enumerate() {
        let label = match label {
            Some(l) => l.clone(),
            None => trace.meta_value("solver").map_or_else(|| format!("trace{}", i + 1), str::to_string),
        };
        let last = format!("{label}-last");
        out.extend(trace.rows.iter().map(|r| PlotRow {
            series: last.clone(),
            data_passes: r.data_passes,
            grad_norm: r.grad_norm,
        }));
        if include_avg {
            let avg = format!("{label}-avg");
            out.extend(trace.rows.iter().map(|r| PlotRow {
                series: avg.clone(),
                data_passes: r.data_passes,
                grad_norm: r.grad_norm_avg,
            }));
        }
    }
    Ok(out)
}

pub fn write_plot_csv(rows: &[PlotRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    if rows.is_empty() {
        w.write_record(["series", "data_passes", "grad_norm"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Series in first-appearance order.
fn group(rows: &[PlotRow]) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let pt = (r.data_passes, r.grad_norm);
        match out.iter_mut().find(|(s, _)| *s == r.series) {
            Some((_, pts)) => pts.push(pt),
            None => out.push((r.series.clone(), vec![pt])),
        }
    }
    out
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Io(format!("plot: {e}"))
}

/// Line plot with a logarithmic gradient-norm axis. Non-positive values are
/// clipped to the smallest positive value present.
pub fn write_plot_svg(rows: &[PlotRow], path: &Path) -> Result<()> {
    let series = group(rows);
    if series.is_empty() {
        return Err(Error::invalid("no data to plot"));
    }
    let positive = rows.iter().map(|r| r.grad_norm).filter(|v| *v > 0.0 && v.is_finite());
    let y_min = positive.clone().fold(f64::INFINITY, f64::min);
    let y_max = positive.fold(0.0_f64, f64::max);
    let (y_min, y_max) = if y_min.is_finite() { (y_min, y_max.max(y_min * 10.0)) } else { (1e-16, 1.0) };
    let x_max = rows.iter().map(|r| r.data_passes).filter(|v| v.is_finite()).fold(0.0_f64, f64::max).max(1.0);

    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..x_max, (y_min * 0.5..y_max * 2.0).log_scale())
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("data passes").y_desc("gradient norm").draw().map_err(plot_err)?;
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let clipped: Vec<(f64, f64)> =
            pts.iter().map(|&(x, y)| (x, if y > 0.0 && y.is_finite() { y } else { y_min })).collect();
        chart
            .draw_series(LineSeries::new(clipped, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(name.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}
