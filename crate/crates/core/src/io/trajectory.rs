//! Trajectory directories: one UPKF file per snapshot, an index CSV and
//! the run metadata as TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field_file::{read_field, write_field};
use super::IoError;
use crate::problem::{Domain, Field, Grid, RunInfo, RunMode, Snapshot, Trajectory};

pub const INDEX_FILE: &str = "index.csv";
pub const META_FILE: &str = "run.toml";
/// Name under which front ends store the config that produced the run.
pub const CONFIG_COPY: &str = "config.toml";
const TAU_MINUS: &str = "tau_minus.upkf";
const TAU_PLUS: &str = "tau_plus.upkf";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunMeta {
    mode: String,
    gamma: f64,
    epsilon: f64,
    m_cfl: f64,
    n_tau: usize,
    fingerprint: String,
    d: usize,
    length: f64,
    t_end: f64,
    s_end: f64,
    nx: usize,
    ns: usize,
    nt: usize,
    has_tau_fields: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct IndexRow {
    step: usize,
    t: f64,
    file: String,
    grad_x_sq: f64,
    grad_s_sq: f64,
}

fn snapshot_name(step: usize) -> String {
    format!("snap_{step:07}.upkf")
}

pub fn write_trajectory(dir: &Path, traj: &Trajectory) -> Result<(), IoError> {
    std::fs::create_dir_all(dir)?;
    let g = traj.info.grid;
    let meta = RunMeta {
        mode: traj.info.mode.name().to_string(),
        gamma: traj.info.gamma,
        epsilon: traj.info.epsilon,
        m_cfl: traj.info.m_cfl,
        n_tau: traj.info.n_tau,
        fingerprint: traj.info.fingerprint.clone(),
        d: g.d,
        length: g.length,
        t_end: g.t_end,
        s_end: g.s_end,
        nx: g.nx,
        ns: g.ns,
        nt: g.nt,
        has_tau_fields: traj.tau_minus.is_some() && traj.tau_plus.is_some(),
    };
    let text = toml::to_string(&meta).map_err(|e| IoError::Format(e.to_string()))?;
    std::fs::write(dir.join(META_FILE), text)?;

    let mut index = csv::Writer::from_path(dir.join(INDEX_FILE))?;
    for snap in &traj.snapshots {
        let file = snapshot_name(snap.step);
        write_field(&dir.join(&file), &snap.field, snap.t)?;
        index.serialize(IndexRow {
            step: snap.step,
            t: snap.t,
            file,
            grad_x_sq: snap.grad_x_sq,
            grad_s_sq: snap.grad_s_sq,
        })?;
    }
    index.flush()?;
    if let (Some(m), Some(p)) = (&traj.tau_minus, &traj.tau_plus) {
        let t = g.t_at(traj.info.n_tau);
        write_field(&dir.join(TAU_MINUS), m, t)?;
        write_field(&dir.join(TAU_PLUS), p, t)?;
    }
    Ok(())
}

pub fn read_trajectory(dir: &Path) -> Result<Trajectory, IoError> {
    let text = std::fs::read_to_string(dir.join(META_FILE))?;
    let meta: RunMeta =
        toml::from_str(&text).map_err(|e| IoError::Format(format!("{META_FILE}: {e}")))?;
    let mode = RunMode::from_name(&meta.mode)
        .ok_or_else(|| IoError::Format(format!("{META_FILE}: unknown mode {:?}", meta.mode)))?;
    let domain = Domain {
        d: meta.d,
        length: meta.length,
        t_end: meta.t_end,
        s_end: meta.s_end,
    };
    let mut grid =
        Grid::new(&domain, meta.nx, meta.ns).map_err(|e| IoError::Format(e.to_string()))?;
    if meta.nt > 0 {
        grid.nt = meta.nt;
        grid.dt = meta.t_end / meta.nt as f64;
    }

    let load = |name: &str| -> Result<(f64, Field), IoError> {
        let ff = read_field(&dir.join(name))?;
        let t = ff.t;
        Ok((t, ff.into_field(grid)?))
    };
    let mut snapshots = Vec::new();
    let mut index = csv::Reader::from_path(dir.join(INDEX_FILE))?;
    for row in index.deserialize() {
        let row: IndexRow = row?;
        let (t, field) = load(&row.file)?;
        snapshots.push(Snapshot {
            step: row.step,
            t,
            field,
            grad_x_sq: row.grad_x_sq,
            grad_s_sq: row.grad_s_sq,
        });
    }
    if snapshots.is_empty() {
        return Err(IoError::Format(format!("{INDEX_FILE} lists no snapshots")));
    }
    let (tau_minus, tau_plus) = if meta.has_tau_fields {
        (Some(load(TAU_MINUS)?.1), Some(load(TAU_PLUS)?.1))
    } else {
        (None, None)
    };
    Ok(Trajectory {
        info: RunInfo {
            mode,
            gamma: meta.gamma,
            epsilon: meta.epsilon,
            grid,
            m_cfl: meta.m_cfl,
            n_tau: meta.n_tau,
            fingerprint: meta.fingerprint,
        },
        snapshots,
        tau_minus,
        tau_plus,
    })
}
