//! Trajectory records: one `trajectory-id timestep x y` record per line,
//! separated by whitespace or commas. Blank lines and `#` comments are
//! skipped.

use std::collections::BTreeMap;

use super::{Environment, Trajectory};
use crate::error::{Error, Result};

/// Parses records into trajectories ordered by id. Timesteps of each
/// trajectory must run 0, 1, 2, … and consecutive cells must be reachable
/// under the motion model.
pub fn parse_trajectories(env: &Environment, text: &str) -> Result<Vec<(String, Trajectory)>> {
    let mut by_id: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let err = |msg: String| Error::Parse(format!("line {}: {msg}", lineno + 1));
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let num = |f: &str, name: &str| {
            f.parse::<usize>()
                .map_err(|_| err(format!("{name} `{f}` is not a non-negative integer")))
        };
        let t = num(fields[1], "timestep")?;
        let x = num(fields[2], "x")?;
        let y = num(fields[3], "y")?;
        if x >= env.width() || y >= env.height() {
            return Err(err(format!(
                "({x}, {y}) outside {}x{} grid",
                env.width(),
                env.height()
            )));
        }
        by_id
            .entry(fields[0].to_string())
            .or_default()
            .push((t, env.cell(x, y)));
    }
    by_id
        .into_iter()
        .map(|(id, mut records)| {
            records.sort_by_key(|&(t, _)| t);
            if let Some((pos, &(t, _))) = records.iter().enumerate().find(|&(i, &(t, _))| t != i) {
                return Err(Error::Parse(format!(
                    "trajectory {id}: expected timestep {pos}, found {t}"
                )));
            }
            let cells = records.into_iter().map(|(_, c)| c).collect();
            let traj = Trajectory::new(env, cells)
                .map_err(|e| Error::Parse(format!("trajectory {id}: {e}")))?;
            Ok((id, traj))
        })
        .collect()
}

pub fn read_trajectories(env: &Environment, path: &std::path::Path) -> Result<Vec<(String, Trajectory)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_trajectories(env, &text)
}
