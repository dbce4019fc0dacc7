//! SVG line charts of a table's numeric columns against its first column.

use std::path::Path;

use plotters::prelude::*;

use crate::table::Table;

const PALETTE: [RGBColor; 5] = [
    RGBColor(0x1f, 0x77, 0xb4),
    RGBColor(0xd6, 0x27, 0x28),
    RGBColor(0x2c, 0xa0, 0x2c),
    RGBColor(0x94, 0x67, 0xbd),
    RGBColor(0xff, 0x7f, 0x0e),
];

fn bounds(values: impl Iterator<Item = f64>, log: bool) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite() && (!log || *v > 0.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return None;
    }
    if lo == hi {
        return Some(if log {
            (lo / 2.0, hi * 2.0)
        } else {
            (lo - 1.0, hi + 1.0)
        });
    }
    Some((lo, hi))
}

type Series = (&'static str, Vec<(f64, f64)>);

fn draw<X, Y>(
    path: &Path,
    title: &str,
    x_desc: &str,
    x_range: X,
    y_range: Y,
    series: &[Series],
) -> Result<(), Box<dyn std::error::Error>>
where
    X: plotters::coord::ranged1d::AsRangedCoord<Value = f64>,
    Y: plotters::coord::ranged1d::AsRangedCoord<Value = f64>,
    X::CoordDescType: plotters::coord::ranged1d::ValueFormatter<f64>,
    Y::CoordDescType: plotters::coord::ranged1d::ValueFormatter<f64>,
{
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(16)
        .x_label_area_size(44)
        .y_label_area_size(80)
        .build_cartesian_2d(x_range, y_range)?;
    chart
        .configure_mesh()
        .x_desc(x_desc)
        .y_label_formatter(&|v| format!("{v:.1e}"))
        .draw()?;
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))?
            .label(*name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    root.present()?;
    Ok(())
}

/// Plots every column after the first against the first; `log` selects
/// logarithmic axes, on which non-positive values are skipped.
pub fn write_svg(table: &Table, title: &str, log: bool, path: &Path) -> Result<(), String> {
    let xs = table.column(0);
    let series: Vec<Series> = (1..table.columns.len())
        .map(|c| {
            let pts = xs
                .iter()
                .zip(table.column(c))
                .filter_map(|(x, y)| Some(((*x)?, y?)))
                .filter(|(x, y)| !log || (*x > 0.0 && *y > 0.0))
                .collect();
            (table.columns[c], pts)
        })
        .collect();
    let all = || series.iter().flat_map(|(_, p)| p.iter());
    let (Some(xr), Some(yr)) = (
        bounds(all().map(|p| p.0), log),
        bounds(all().map(|p| p.1), log),
    ) else {
        return Err("nothing to plot".into());
    };
    let x_desc = table.columns[0];
    let result = if log {
        draw(
            path,
            title,
            x_desc,
            (xr.0..xr.1).log_scale(),
            (yr.0..yr.1).log_scale(),
            &series,
        )
    } else {
        draw(path, title, x_desc, xr.0..xr.1, yr.0..yr.1, &series)
    };
    result.map_err(|e| format!("cannot write plot {}: {e}", path.display()))
}
