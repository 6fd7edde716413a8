//! Files written by a run: trajectory CSV, JSON report and plot data.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dynamics::Trajectory;
use crate::scenario::AuditReport;
use crate::Error;

pub const TRAJECTORY_HEADER: [&str; 20] = [
    "t", "ax", "ay", "az", "avx", "avy", "avz", "bx", "by", "bz", "bvx", "bvy", "bvz", "Px", "Py", "Pz", "Lx", "Ly",
    "Lz", "E",
];

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const REPORT_FILE: &str = "report.json";
pub const ORBIT_FILE: &str = "plot_orbit.csv";
pub const DRIFT_FILE: &str = "plot_drift.csv";

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// One row per sample; `E` is blank when the law has no potential.
pub fn write_trajectory<W: Write>(traj: &Trajectory, out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    let obs = traj.observables()?;
    for ((t, (a, b)), o) in traj.times.iter().zip(&traj.states).zip(&obs) {
        let mut row = Vec::with_capacity(20);
        row.push(num(*t));
        for v in [&a.position, &a.velocity, &b.position, &b.velocity, &o.total_momentum, &o.angular_momentum] {
            row.extend(v.iter().map(|x| num(*x)));
        }
        row.push(o.internal_energy.map(num).unwrap_or_default());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Relative orbit `x_AB(t)`.
pub fn write_orbit<W: Write>(traj: &Trajectory, out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
    w.write_record(["t", "x", "y", "z"]).map_err(csv_err)?;
    for (t, p) in traj.times.iter().zip(traj.pair_states()) {
        w.write_record([num(*t), num(p.x_ab.x), num(p.x_ab.y), num(p.x_ab.z)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Drift of the conserved quantities from their initial values. The energy
/// column is relative and blank when undefined.
pub fn write_drift<W: Write>(traj: &Trajectory, out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidArgument(e.to_string());
    w.write_record(["t", "dP", "dL", "dE_rel"]).map_err(csv_err)?;
    let obs = traj.observables()?;
    let Some(first) = obs.first() else {
        return w.flush().map_err(|e| Error::InvalidArgument(e.to_string()));
    };
    for (t, o) in traj.times.iter().zip(&obs) {
        let de = match (o.internal_energy, first.internal_energy) {
            (Some(e), Some(e0)) => num((e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE)),
            _ => String::new(),
        };
        w.write_record([
            num(*t),
            num((o.total_momentum - first.total_momentum).norm()),
            num((o.angular_momentum - first.angular_momentum).norm()),
            de,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

pub fn report_json(report: &AuditReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Writes every output file into `dir` and returns their paths. Without a
/// trajectory the CSV files hold only their headers.
pub fn write_all(dir: &Path, report: &AuditReport, traj: Option<&Trajectory>) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let open = |name: &str| -> Result<(PathBuf, fs::File), Error> {
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
        Ok((path, file))
    };
    let mut written = Vec::new();

    let (path, mut file) = open(REPORT_FILE)?;
    file.write_all(report_json(report).as_bytes()).map_err(|e| io_error(&path, e))?;
    written.push(path);

    type Writer = fn(&Trajectory, fs::File) -> Result<(), Error>;
    let csvs: [(&str, Writer, &[&str]); 3] = [
        (TRAJECTORY_FILE, write_trajectory, &TRAJECTORY_HEADER),
        (ORBIT_FILE, write_orbit, &["t", "x", "y", "z"]),
        (DRIFT_FILE, write_drift, &["t", "dP", "dL", "dE_rel"]),
    ];
    for (name, writer, header) in csvs {
        let (path, mut file) = open(name)?;
        match traj {
            Some(t) => writer(t, file)?,
            None => writeln!(file, "{}", header.join(",")).map_err(|e| io_error(&path, e))?,
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, Method};
    use crate::forces::presets;
    use crate::types::{Body, Vec3};

    #[test]
    fn trajectory_csv_shape() {
        let a = Body::new("A", 1.0, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let b = Body::new("B", 1.0, Vec3::zeros(), Vec3::zeros()).unwrap();
        let traj = integrate(&a, &b, &presets::gravity(1.0), 0.1, 0.05, Method::Rk4).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,ax,ay,az,avx,avy,avz,bx,by,bz,bvx,bvy,bvz,Px,Py,Pz,Lx,Ly,Lz,E");
        assert_eq!(lines.len(), 4);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 20));
        assert!(!lines[1].ends_with(','));
    }

    #[test]
    fn energy_blank_without_potential() {
        let a = Body::new("A", 1.0, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let b = Body::new("B", 1.0, Vec3::zeros(), Vec3::zeros()).unwrap();
        let traj = integrate(&a, &b, &presets::drag(0.1), 0.1, 0.05, Method::Rk4).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().skip(1).all(|l| l.ends_with(',')));
    }
}
