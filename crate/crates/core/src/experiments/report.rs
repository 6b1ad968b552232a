//! Deterministic CSV and text outputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::HypothesisReport;
use crate::oracle::Trajectory;
use crate::rg::{ContractionStudy, FlowReport, LinearStep, TheoryConstants};

pub const RG_CONVERGENCE_HEADER: [&str; 8] = [
    "n",
    "t",
    "A_n",
    "bq_g_n",
    "bq_f_n",
    "err_to_Afpstar",
    "theory_rate_g",
    "theory_rate_A",
];

/// 17 significant digits in scientific notation; NaN and infinities are
/// written as `NaN`, `inf`, `-inf`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

/// Writes a header and rows; an empty `rows` gives a header-only file.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    create_parent(path)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_rg_convergence(path: &Path, report: &FlowReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.t),
                num(r.a),
                num(r.bq_g),
                num(r.bq_f),
                num(r.err_to_afpstar),
                num(r.theory_rate_g),
                num(r.theory_rate_a),
            ]
        })
        .collect();
    write_csv(path, &RG_CONVERGENCE_HEADER, &rows)
}

pub fn write_rg_steps(path: &Path, report: &FlowReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .steps
        .iter()
        .enumerate()
        .map(|(n, s)| {
            vec![
                n.to_string(),
                num(s.nu_hat_zero),
                s.picard_iters.to_string(),
                num(s.picard_residual),
                opt(s.contraction_ratio),
                num(s.decomposition_residual),
            ]
        })
        .collect();
    write_csv(
        path,
        &[
            "n",
            "nu_hat_zero",
            "picard_iters",
            "picard_residual",
            "contraction_ratio",
            "decomposition_residual",
        ],
        &rows,
    )
}

/// `oracle_err[n]` is the oracle's rescaled error at `t = L^n`, when marched.
pub fn write_linear_convergence(path: &Path, steps: &[LinearStep], oracle_err: &[Option<f64>]) -> Result<()> {
    let rows: Vec<Vec<String>> = steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                s.n.to_string(),
                num(s.t),
                num(s.a),
                num(s.bq_g),
                num(s.bq_f),
                num(s.err_to_afpstar),
                opt(s.ratio),
                opt(oracle_err.get(i).copied().flatten()),
            ]
        })
        .collect();
    write_csv(
        path,
        &["n", "t", "A", "bq_g_n", "bq_f_n", "err_to_Afpstar", "ratio_g", "oracle_err"],
        &rows,
    )
}

pub struct RescaledRow {
    pub t: f64,
    pub mass: f64,
    pub bq_similarity: f64,
    pub rescaled_error: f64,
}

pub fn write_rescaled_error(path: &Path, rows: &[RescaledRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.t), num(r.mass), num(r.bq_similarity), num(r.rescaled_error)])
        .collect();
    write_csv(path, &["t", "mass", "bq_similarity", "rescaled_error"], &rows)
}

/// Snapshots whose index is in `which`, in physical-frame frequencies.
pub fn write_trajectory(path: &Path, traj: &Trajectory, which: &[usize]) -> Result<()> {
    let mut rows = Vec::new();
    for &m in which {
        let t = traj.times()[m];
        let snap = &traj.snaps()[m];
        for (w, h) in snap.grid().omegas().iter().zip(snap.hat()) {
            rows.push(vec![num(t), num(*w), num(h.re), num(h.im)]);
        }
    }
    write_csv(path, &["t", "omega", "re_hat", "im_hat"], &rows)
}

pub fn trajectory_manifest(traj: &Trajectory) -> String {
    let g = traj.base_grid();
    format!(
        "base_omega_max = {:?}\nn_points = {}\nq = {}\nsnapshots = {}\nt_final = {:?}\nsnapshot grid at time t: omega_max / t^((p+1)/d)\n",
        g.omega_max(),
        g.n_points(),
        g.q(),
        traj.times().len(),
        traj.times().last().copied().unwrap_or(1.0)
    )
}

pub struct CompareRow {
    pub n: u32,
    pub t: f64,
    pub a_rg: f64,
    pub mass_oracle: f64,
    pub discrepancy: f64,
}

pub fn write_compare(path: &Path, rows: &[CompareRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                num(r.t),
                num(r.a_rg),
                num(r.mass_oracle),
                num(r.discrepancy),
            ]
        })
        .collect();
    write_csv(path, &["n", "t", "A_rg", "mass_oracle", "discrepancy"], &rows)
}

/// `bound(L)` is the computed contraction bound at scale `L`.
pub fn write_contraction(path: &Path, study: &ContractionStudy, bound: impl Fn(f64) -> f64) -> Result<()> {
    let rows: Vec<Vec<String>> = study
        .rows
        .iter()
        .map(|r| vec![num(r.big_l), r.member.to_string(), num(r.ratio), num(bound(r.big_l))])
        .collect();
    write_csv(path, &["L", "member", "ratio", "bound"], &rows)
}

pub fn write_hypotheses(path: &Path, report: &HypothesisReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.id.label().to_string(),
                num(c.residual),
                num(c.tolerance),
                c.passed.to_string(),
            ]
        })
        .collect();
    write_csv(path, &["check", "residual", "tolerance", "passed"], &rows)
}

pub fn write_constants(path: &Path, constants: &TheoryConstants) -> Result<()> {
    let rows: Vec<Vec<String>> = constants
        .table()
        .into_iter()
        .map(|(k, v)| vec![k, v])
        .collect();
    write_csv(path, &["name", "value"], &rows)
}

/// Formats labeled values as an aligned two-column table.
pub fn table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

/// A small matplotlib script that plots the numeric columns of `csv_name`
/// against its first column on a log scale.
pub fn plot_script(csv_name: &str) -> String {
    format!(
        r#"import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv_name}"
with open(path, newline="") as fh:
    rows = list(csv.DictReader(fh))
if not rows:
    sys.exit("no rows in " + path)
x_key = list(rows[0])[0]
x = [float(r[x_key]) for r in rows]
for key in list(rows[0])[1:]:
    try:
        y = [abs(float(r[key])) for r in rows]
    except ValueError:
        continue
    if any(v > 0 for v in y):
        plt.semilogy(x, y, marker="o", label=key)
plt.xlabel(x_key)
plt.legend()
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
"#
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn empty_and_small_reports() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        write_rg_convergence(&empty, &FlowReport::default()).unwrap();
        let text = fs::read_to_string(&empty).unwrap();
        assert_eq!(text, format!("{}\n", RG_CONVERGENCE_HEADER.join(",")));

        let mut report = FlowReport::default();
        for n in 0..3 {
            report.rows.push(crate::rg::FlowRow {
                n,
                t: 2f64.powi(n as i32),
                a: 0.01,
                bq_g: 0.0,
                bq_f: 0.02,
                err_to_afpstar: 1e-3,
                theory_rate_g: 0.5,
                theory_rate_a: f64::NAN,
            });
        }
        let three = dir.path().join("sub/three.csv");
        write_rg_convergence(&three, &report).unwrap();
        let text = fs::read_to_string(&three).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(2).unwrap().starts_with("1,2.0000000000000000e0,"));
    }

    #[test]
    fn aligned_table() {
        let t = table(&[("a".into(), "1".into()), ("long".into(), "2".into())]);
        assert_eq!(t, "a     1\nlong  2\n");
    }
}
