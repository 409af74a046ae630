//! The four subcommands. Each takes a resolved [`RunConfig`] and writes its
//! files into `config.output`.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use softmapper::cloud::principal_axes;
use softmapper::cover;
use softmapper::mapper::map_comp;
use softmapper::optimize::{build_scheme, direction_correlation, optimize};
use softmapper::persistence::{diagram, map_pers_filtration, total_persistence};
use softmapper::{
    Clusterer, Diagram, FilterFamily, FilterParams, FilterValues, FixedFilter, LinearFilter,
    MapperGraph, OptimConfig, PointCloud, Trace,
};

use crate::config::{FilterChoice, RunConfig};
use crate::export::{export_dot, learning_curve_svg, GraphDocument};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

/// A built graph with its filtration and diagram.
#[derive(Debug, Clone)]
pub struct BuildResult {
    pub graph: MapperGraph,
    pub node_values: Vec<f64>,
    pub diagram: Diagram,
}

fn filter_values(
    cloud: &PointCloud,
    choice: &FilterChoice,
    theta: &FilterParams,
) -> Result<FilterValues, CliError> {
    match *choice {
        FilterChoice::Linear => Ok(LinearFilter.evaluate(cloud, theta)?),
        FilterChoice::Axis(k) => {
            let filter = FixedFilter::coordinate(cloud, k).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(filter.evaluate(cloud, &FilterParams::new(vec![])?)?)
        }
    }
}

/// Build one Mapper graph from `values` (assignment drawn with `seed`) and
/// write mapper.json, mapper.dot and diagram.csv into `dir`.
pub fn build_into(
    dir: &Path,
    cloud: &PointCloud,
    values: &[f64],
    clusterer: &Clusterer,
    optim: &OptimConfig,
    color: Option<&str>,
    seed: u64,
) -> Result<BuildResult, CliError> {
    create_dir(dir)?;
    let scheme = build_scheme(values, optim)?;
    let e = cover::sample(&scheme, seed);
    let graph = map_comp(cloud, &e, clusterer)?;
    let fg = map_pers_filtration(&graph, values)?;
    let dgm = diagram(&fg, optim.mode);
    let node_values = fg.node_values.clone();
    let colors = match color {
        None => node_values.clone(),
        Some(name) => {
            let attr = cloud
                .attribute(name)
                .ok_or_else(|| CliError::Usage(format!("no attribute named {name:?}")))?;
            graph
                .nodes
                .iter()
                .map(|n| n.members.iter().map(|&i| attr[i]).sum::<f64>() / n.members.len() as f64)
                .collect()
        }
    };
    write(
        &dir.join("mapper.json"),
        &GraphDocument::new(&graph, &node_values, &colors).to_json(),
    )?;
    write(&dir.join("mapper.dot"), &export_dot(&graph, &colors))?;
    write(&dir.join("diagram.csv"), &dgm.to_csv())?;
    Ok(BuildResult {
        graph,
        node_values,
        diagram: dgm,
    })
}

fn graph_summary(result: &BuildResult) -> serde_json::Value {
    json!({
        "nodes": result.graph.node_count(),
        "edges": result.graph.edge_count(),
        "components": result.graph.connected_components().len(),
        "betti_1": result.graph.betti_1(),
        "total_persistence": total_persistence(&result.diagram),
    })
}

pub fn cmd_build(cfg: &RunConfig) -> Result<BuildResult, CliError> {
    let cloud = cfg.load_cloud()?;
    let choice = cfg.filter_choice()?;
    let theta = match choice {
        FilterChoice::Linear => cfg.initial_theta(cloud.dim())?,
        FilterChoice::Axis(_) => FilterParams::new(vec![])?,
    };
    let clusterer = cfg.clusterer(&cloud)?;
    let optim = cfg.optim()?;
    let fv = filter_values(&cloud, &choice, &theta)?;
    let result = build_into(
        &cfg.output,
        &cloud,
        &fv.values,
        &clusterer,
        &optim,
        cfg.color.as_deref(),
        cfg.seed,
    )?;
    let summary = json!({
        "command": "build",
        "seed": cfg.seed,
        "config_hash": cfg.hash(),
        "version": VERSION,
        "theta": theta.theta,
        "graph": graph_summary(&result),
    });
    write(&cfg.output.join("summary.json"), &pretty(&summary))?;
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub theta_initial: FilterParams,
    pub theta_final: FilterParams,
    pub trace: Trace,
    /// Agreement with the known optimal direction of a synthetic shape.
    pub correlation: Option<f64>,
    /// Same, for the top principal axis of the data.
    pub pca_correlation: Option<f64>,
    pub initial: BuildResult,
    pub last: BuildResult,
}

pub fn cmd_optimize(cfg: &RunConfig) -> Result<OptimizeResult, CliError> {
    let cloud = cfg.load_cloud()?;
    if let FilterChoice::Axis(_) = cfg.filter_choice()? {
        return Err(CliError::Usage(
            "a fixed coordinate filter has no parameters: nothing to optimize".into(),
        ));
    }
    let theta0 = cfg.initial_theta(cloud.dim())?;
    let clusterer = cfg.clusterer(&cloud)?;
    let optim = cfg.optim()?;
    create_dir(&cfg.output)?;

    let (theta_n, trace) = optimize(&cloud, &LinearFilter, &theta0, &clusterer, &optim)?;
    write(&cfg.output.join("trace.csv"), &trace.to_csv())?;
    write(
        &cfg.output.join("learning_curve.svg"),
        &learning_curve_svg(&trace.risks(), "risk"),
    )?;
    write(
        &cfg.output.join("theta_final.json"),
        &pretty(&json!({ "theta": theta_n.theta })),
    )?;

    let mut builds = Vec::with_capacity(2);
    for (name, theta) in [("initial", &theta0), ("final", &theta_n)] {
        let fv = LinearFilter.evaluate(&cloud, theta)?;
        builds.push(build_into(
            &cfg.output.join(name),
            &cloud,
            &fv.values,
            &clusterer,
            &optim,
            cfg.color.as_deref(),
            cfg.seed,
        )?);
    }
    let last = builds.pop().expect("two builds");
    let initial = builds.pop().expect("two builds");

    let target = cfg.shape()?.and_then(|s| s.optimal_direction());
    let correlation = target
        .as_ref()
        .map(|t| direction_correlation(&theta_n.theta, t));
    let pca_correlation = target.as_ref().and_then(|t| {
        principal_axes(&cloud)
            .first()
            .map(|(_, axis)| direction_correlation(axis, t))
    });
    let summary = json!({
        "command": "optimize",
        "seed": cfg.seed,
        "config_hash": cfg.hash(),
        "version": VERSION,
        "theta_initial": theta0.theta,
        "theta_final": theta_n.theta,
        "correlation": correlation,
        "pca_correlation": pca_correlation,
        "initial": graph_summary(&initial),
        "final": graph_summary(&last),
    });
    write(&cfg.output.join("summary.json"), &pretty(&summary))?;
    Ok(OptimizeResult {
        theta_initial: theta0,
        theta_final: theta_n,
        trace,
        correlation,
        pca_correlation,
        initial,
        last,
    })
}

/// Write the synthetic cloud of `cfg` as headerless CSV; returns its path.
pub fn cmd_synth(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    if cfg.synthetic.is_none() {
        return Err(CliError::Usage("synth needs --synthetic <shape>".into()));
    }
    let cloud = cfg.load_cloud()?;
    create_dir(&cfg.output)?;
    let mut text = String::new();
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let path = cfg.output.join("points.csv");
    write(&path, &text)?;
    Ok(path)
}

/// Render `graph` (a mapper.json) to `<output>/mapper.dot` and `trace` (a
/// trace.csv) to `<output>/learning_curve.svg`.
pub fn cmd_export(
    graph: Option<&Path>,
    trace: Option<&Path>,
    output: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    if graph.is_none() && trace.is_none() {
        return Err(CliError::Usage("export needs --graph and/or --trace".into()));
    }
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
    };
    create_dir(output)?;
    let mut written = Vec::new();
    if let Some(path) = graph {
        let doc = GraphDocument::from_json(&read(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let (g, values) = doc.to_graph().map_err(CliError::Usage)?;
        let out = output.join("mapper.dot");
        write(&out, &export_dot(&g, &values))?;
        written.push(out);
    }
    if let Some(path) = trace {
        let text = read(path)?;
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let risk_col = reader
            .headers()
            .ok()
            .and_then(|h| h.iter().position(|c| c == "risk"))
            .ok_or_else(|| CliError::Usage(format!("{}: no risk column", path.display())))?;
        let mut risks = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let bad = || CliError::Usage(format!("{}: bad row {}", path.display(), line + 2));
            let record = record.map_err(|_| bad())?;
            risks.push(record.get(risk_col).and_then(|v| v.parse().ok()).ok_or_else(bad)?);
        }
        let out = output.join("learning_curve.svg");
        write(&out, &learning_curve_svg(&risks, "risk"))?;
        written.push(out);
    }
    Ok(written)
}
