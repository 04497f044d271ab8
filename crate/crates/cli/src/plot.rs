//! Flat CSV plot data.

use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::report::{PlotData, Report};

pub fn write_plot_csv<W: Write>(data: &PlotData, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match data {
        PlotData::Growth(rows) => {
            w.write_record(["epsilon", "distance", "log_inv_eps"])?;
            for r in rows {
                w.serialize(r)?;
            }
        }
        PlotData::Steepness(rows) => {
            w.write_record(["node_id", "g_grad_grad", "reliable"])?;
            for r in rows {
                w.serialize(r)?;
            }
        }
        PlotData::Duality(rows) => {
            w.write_record(["pair_id", "longest_path", "dual_value", "abs_diff"])?;
            for r in rows {
                w.serialize(r)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn plot_csv_bytes(data: &PlotData) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_plot_csv(data, &mut buf)?;
    Ok(buf)
}

/// Writes the plot data of the named check as CSV.
pub fn emit_plot_data(report: &Report, check: &str, path: &Path) -> Result<()> {
    let record = report.check(check).ok_or_else(|| {
        let known: Vec<&str> = report.checks.iter().filter(|c| c.plot.is_some()).map(|c| c.name.as_str()).collect();
        CliError::Argument(format!("no check `{check}` in report (checks with plot data: {})", known.join(", ")))
    })?;
    let data = record.plot.as_ref().ok_or_else(|| CliError::Argument(format!("check `{check}` carries no plot data")))?;
    std::fs::write(path, plot_csv_bytes(data)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_csv_has_documented_header() {
        let bytes = plot_csv_bytes(&PlotData::Growth(vec![(0.1, 2.5, std::f64::consts::LN_10)])).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, "epsilon,distance,log_inv_eps\n0.1,2.5,2.302585092994046\n");
    }

    #[test]
    fn steepness_csv_rows() {
        let bytes = plot_csv_bytes(&PlotData::Steepness(vec![(3, -1.0, true), (4, -0.5, false)])).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, "node_id,g_grad_grad,reliable\n3,-1.0,true\n4,-0.5,false\n");
    }
}
