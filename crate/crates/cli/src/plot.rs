//! `cpplab plot` — render stored artifacts as static SVG plus a companion
//! CSV holding the plotted numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cpplab_core::analytics::spectrum_tail_intensity;
use cpplab_core::clonal::allelic_partition;
use cpplab_core::comb::CombTree;
use cpplab_core::mutation::{Mark, MarkedTree};
use cpplab_core::quad::QuadratureConfig;

use crate::config::{write_text, RunConfig};
use crate::svg::{Canvas, Scale};
use crate::{Failure, PlotStyle};

const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];

pub fn run(
    input: &Path,
    style: PlotStyle,
    config: Option<&RunConfig>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let dir = out.unwrap_or_else(|| Path::new("plots"));
    let (svg, csv, stem) = match style {
        PlotStyle::Comb => comb_plot(input)?,
        PlotStyle::Spectrum => spectrum_plot(input, config)?,
        PlotStyle::Cdf => cdf_plot(input)?,
    };
    let svg_path = write_text(dir, &format!("{stem}.svg"), &svg)?;
    let csv_path = write_text(dir, &format!("{stem}.csv"), &csv)?;
    println!("wrote {} and {}", svg_path.display(), csv_path.display());
    Ok(())
}

/// Accepts either a bare comb or a comb with marks.
fn load_tree(input: &Path) -> Result<(CombTree, Vec<Mark>), Failure> {
    let text = fs::read_to_string(input)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", input.display())))?;
    if let Ok(marked) = serde_json::from_str::<MarkedTree>(&text) {
        return Ok((marked.tree, marked.marks));
    }
    let tree = serde_json::from_str::<CombTree>(&text).map_err(|e| {
        Failure::Config(format!(
            "{} is neither a marked tree nor a comb: {e}",
            input.display()
        ))
    })?;
    Ok((tree, Vec::new()))
}

fn comb_plot(input: &Path) -> Result<(String, String, &'static str), Failure> {
    let (tree, marks) = load_tree(input)?;
    let (w, h) = (840.0, 420.0);
    let (ml, mr, mt, mb) = (55.0, 20.0, 30.0, 40.0);
    let sx = Scale::new(0.0, tree.span, ml, w - mr);
    let sy = Scale::new(0.0, tree.z, h - mb, mt);
    let mut canvas = Canvas::new(w, h);

    canvas.line(ml, sy.map(0.0), w - mr, sy.map(0.0), "#555555", 1.0);
    canvas.line(ml, sy.map(0.0), ml, mt, "#555555", 1.0);
    canvas.text(ml, h - 12.0, 12.0, "#555555", "boundary time");
    canvas.text(6.0, mt - 8.0, 12.0, "#555555", "depth");
    canvas.text(
        w * 0.35,
        16.0,
        13.0,
        "#000000",
        &format!("comb: {} teeth, span {:.4}", tree.atoms.len(), tree.span),
    );

    // Origin branch: the lineage entering at time 0 spans the full window.
    canvas.line(sx.map(0.0), sy.map(0.0), sx.map(0.0), sy.map(tree.z), "#d62728", 2.5);
    for atom in &tree.atoms {
        canvas.line(
            sx.map(atom.time),
            sy.map(0.0),
            sx.map(atom.time),
            sy.map(atom.height),
            "#1f77b4",
            1.5,
        );
    }
    for mark in &marks {
        canvas.circle(sx.map(mark.time), sy.map(mark.depth), 2.5, "#2ca02c");
    }

    let mut csv = String::from("kind,time,value\n");
    writeln!(csv, "origin,0,{}", tree.z).expect("write to string");
    for atom in &tree.atoms {
        writeln!(csv, "tooth,{},{}", atom.time, atom.height).expect("write to string");
    }
    for mark in &marks {
        writeln!(csv, "mark,{},{}", mark.time, mark.depth).expect("write to string");
    }
    Ok((canvas.finish(), csv, "comb"))
}

fn spectrum_plot(
    input: &Path,
    config: Option<&RunConfig>,
) -> Result<(String, String, &'static str), Failure> {
    let text = fs::read_to_string(input)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", input.display())))?;
    let marked = serde_json::from_str::<MarkedTree>(&text).map_err(|e| {
        Failure::Config(format!(
            "spectrum needs a marked tree (comb plus mutation marks): {e}"
        ))
    })?;
    let partition = allelic_partition(&marked);
    let mut masses: Vec<f64> = partition.alleles.iter().map(|a| a.mass).collect();
    let ancestral = partition.ancestral.total_length();
    if ancestral > 0.0 {
        masses.push(ancestral);
    }
    if masses.is_empty() {
        return Err(Failure::Config(
            "the tree carries no allelic clusters to plot".into(),
        ));
    }
    masses.sort_by(f64::total_cmp);
    let span = marked.tree.span;
    let q_max = masses.last().expect("nonempty") * 1.05;

    // Empirical tail: step function dropping at each cluster mass.
    let mut steps = vec![(0.0, masses.len() as f64 / span)];
    for (i, &m) in masses.iter().enumerate() {
        let above = (masses.len() - i - 1) as f64 / span;
        steps.push((m, (masses.len() - i) as f64 / span));
        steps.push((m, above));
    }
    steps.push((q_max, 0.0));

    let analytic: Option<Vec<(f64, f64)>> = match config {
        Some(cfg_file) => {
            let pair = cfg_file.pair()?;
            let z = cfg_file.model.z;
            let cfg = QuadratureConfig::default();
            let grid: Vec<f64> = (1..=100).map(|i| q_max * i as f64 / 100.0).collect();
            Some(
                grid.into_iter()
                    .map(|q| Ok((q, spectrum_tail_intensity(&pair, z, q, &cfg)?)))
                    .collect::<Result<Vec<_>, Failure>>()?,
            )
        }
        None => None,
    };

    let y_max = steps
        .iter()
        .map(|p| p.1)
        .chain(analytic.iter().flatten().map(|p| p.1))
        .fold(0.0f64, f64::max)
        * 1.05;
    let (w, h) = (840.0, 420.0);
    let (ml, mr, mt, mb) = (55.0, 20.0, 30.0, 40.0);
    let sx = Scale::new(0.0, q_max, ml, w - mr);
    let sy = Scale::new(0.0, y_max.max(1e-12), h - mb, mt);
    let mut canvas = Canvas::new(w, h);
    canvas.line(ml, sy.map(0.0), w - mr, sy.map(0.0), "#555555", 1.0);
    canvas.line(ml, sy.map(0.0), ml, mt, "#555555", 1.0);
    canvas.text(ml, h - 12.0, 12.0, "#555555", "cluster mass q");
    canvas.text(6.0, mt - 8.0, 12.0, "#555555", "clusters > q per unit length");
    let pixel_steps: Vec<(f64, f64)> = steps.iter().map(|&(q, v)| (sx.map(q), sy.map(v))).collect();
    canvas.polyline(&pixel_steps, PALETTE[0], 1.8);
    canvas.text(w - 260.0, mt + 8.0, 12.0, PALETTE[0], "empirical tail");
    if let Some(curve) = &analytic {
        let pixels: Vec<(f64, f64)> = curve.iter().map(|&(q, v)| (sx.map(q), sy.map(v))).collect();
        canvas.polyline(&pixels, PALETTE[3], 1.8);
        canvas.text(w - 260.0, mt + 24.0, 12.0, PALETTE[3], "analytic intensity");
    }

    let mut csv = String::from("q,empirical,analytic\n");
    for &(q, v) in &steps {
        writeln!(csv, "{q},{v},").expect("write to string");
    }
    for (q, v) in analytic.iter().flatten() {
        writeln!(csv, "{q},,{v}").expect("write to string");
    }
    Ok((canvas.finish(), csv, "spectrum"))
}

fn cdf_plot(input: &Path) -> Result<(String, String, &'static str), Failure> {
    let text = fs::read_to_string(input)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", input.display())))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Failure::Config("empty CSV".into()))?
        .split(',')
        .collect();
    let rows: Vec<Vec<&str>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').collect())
        .collect();
    if rows.is_empty() {
        return Err(Failure::Config("CSV has no data rows".into()));
    }

    // Keep the columns that parse as numbers in every row, except the
    // replicate index.
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for (j, name) in header.iter().enumerate() {
        if *name == "replicate" {
            continue;
        }
        let parsed: Option<Vec<f64>> = rows
            .iter()
            .map(|r| r.get(j).and_then(|c| c.parse::<f64>().ok()))
            .collect();
        if let Some(mut values) = parsed {
            values.sort_by(f64::total_cmp);
            columns.push((name.to_string(), values));
        }
    }
    if columns.is_empty() {
        return Err(Failure::Config("no fully numeric columns to plot".into()));
    }

    let x_min = columns
        .iter()
        .map(|(_, v)| v[0])
        .fold(f64::INFINITY, f64::min);
    let x_max = columns
        .iter()
        .map(|(_, v)| *v.last().expect("nonempty"))
        .fold(f64::NEG_INFINITY, f64::max);
    let (w, h) = (840.0, 420.0);
    let (ml, mr, mt, mb) = (55.0, 20.0, 30.0, 40.0);
    let sx = Scale::new(x_min, x_max, ml, w - mr);
    let sy = Scale::new(0.0, 1.0, h - mb, mt);
    let mut canvas = Canvas::new(w, h);
    canvas.line(ml, sy.map(0.0), w - mr, sy.map(0.0), "#555555", 1.0);
    canvas.line(ml, sy.map(0.0), ml, mt, "#555555", 1.0);
    canvas.text(ml, h - 12.0, 12.0, "#555555", "value");
    canvas.text(6.0, mt - 8.0, 12.0, "#555555", "empirical cdf");

    let mut csv = String::from("column,x,cdf\n");
    for (c, (name, values)) in columns.iter().enumerate() {
        let color = PALETTE[c % PALETTE.len()];
        let n = values.len() as f64;
        let mut points = vec![(sx.map(values[0]), sy.map(0.0))];
        for (i, &v) in values.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            points.push((sx.map(v), sy.map(i as f64 / n)));
            points.push((sx.map(v), sy.map(f)));
            writeln!(csv, "{name},{v},{f}").expect("write to string");
        }
        canvas.polyline(&points, color, 1.6);
        canvas.text(w - 200.0, mt + 8.0 + 16.0 * c as f64, 12.0, color, name);
    }
    Ok((canvas.finish(), csv, "cdf"))
}
