//! Result persistence: a full `summary.json` plus one CSV per time series.
//! Numbers are written in scientific notation with 17 significant digits so
//! rerunning the same config and seed reproduces byte-identical bodies.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::experiments::RunArtifacts;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &Path, header: &str, rows: Vec<Vec<f64>>) -> Result<()> {
    let mut body = String::with_capacity(rows.len() * 64 + header.len() + 1);
    body.push_str(header);
    body.push('\n');
    for row in rows {
        let line: Vec<String> = row.into_iter().map(fmt).collect();
        body.push_str(&line.join(","));
        body.push('\n');
    }
    fs::write(path, body)?;
    Ok(())
}

/// Write all artifacts of a run into `out_dir`, returning the paths created.
pub fn write_artifacts(run: &RunArtifacts, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();

    let summary = out_dir.join("summary.json");
    let json = serde_json::to_string_pretty(run).expect("artifacts serialize");
    fs::write(&summary, json)?;
    paths.push(summary);

    let moments = out_dir.join("moments.csv");
    write_csv(
        &moments,
        "t,mean_x,var_x,mean_pd,mean_po,mean_pc,mean_pq,var_pd,var_po,var_pc,var_pq,cov_x_pd,cov_x_po,cov_x_pc,cov_x_pq",
        run.moments
            .iter()
            .map(|m| {
                vec![
                    m.t, m.mean_x, m.var_x, m.mean_pd, m.mean_po, m.mean_pc, m.mean_pq,
                    m.var_pd, m.var_po, m.var_pc, m.var_pq, m.cov_x_pd, m.cov_x_po,
                    m.cov_x_pc, m.cov_x_pq,
                ]
            })
            .collect(),
    )?;
    paths.push(moments);

    let ur = out_dir.join("ur.csv");
    write_csv(
        &ur,
        "t,slack_osmotic,slack_drift,slack_schrodinger,slack_heisenberg,decomposition_residual",
        run.ur
            .iter()
            .map(|u| {
                vec![
                    u.t,
                    u.slack_osmotic,
                    u.slack_drift,
                    u.slack_schrodinger,
                    u.slack_heisenberg,
                    u.decomposition_residual,
                ]
            })
            .collect(),
    )?;
    paths.push(ur);

    if !run.energy.is_empty() {
        let energy = out_dir.join("energy.csv");
        write_csv(
            &energy,
            "t,E",
            run.energy.iter().map(|s| vec![s.t, s.e]).collect(),
        )?;
        paths.push(energy);
    }

    if !run.ensemble.is_empty() {
        let ensemble = out_dir.join("ensemble.csv");
        write_csv(
            &ensemble,
            "t,ks,tv,sample_mean,sample_var",
            run.ensemble
                .iter()
                .map(|s| vec![s.t, s.ks, s.tv, s.sample_mean, s.sample_var])
                .collect(),
        )?;
        paths.push(ensemble);
    }

    Ok(paths)
}
