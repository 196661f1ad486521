use std::io::Write;
use std::path::Path;

use super::config::OutputFormat;
use super::experiment::ExperimentSummary;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 18] = [
    "m",
    "n",
    "p0",
    "edge_flip",
    "gm_flip",
    "prior",
    "epsilon",
    "l",
    "trials",
    "mean_Q",
    "std_Q",
    "ci95_lo",
    "ci95_hi",
    "lower_bound",
    "upper_bound_stated",
    "upper_bound_certified",
    "cond_eq3",
    "cond_eq4",
];

fn csv_row(s: &ExperimentSummary) -> [String; 18] {
    [
        s.m.to_string(),
        s.n.to_string(),
        s.p0.to_string(),
        s.edge_flip.to_string(),
        s.gm_flip.to_string(),
        s.prior.clone(),
        s.epsilon.to_string(),
        s.l.to_string(),
        s.trials.to_string(),
        s.mean_q.to_string(),
        s.std_q.to_string(),
        s.ci95_lo.to_string(),
        s.ci95_hi.to_string(),
        s.bounds.lower_converse.to_string(),
        s.bounds.upper_finite_stated.to_string(),
        s.bounds.upper_finite.to_string(),
        s.bounds.conditions_met.eq3.met.to_string(),
        s.bounds.conditions_met.eq4.met.to_string(),
    ]
}

/// Write summaries as CSV (one row each) or as a JSON array.
pub fn emit_results<W: Write>(summaries: &[ExperimentSummary], format: OutputFormat, out: W) -> Result<()> {
    if summaries.is_empty() {
        return Err(Error::EmptyResults);
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for s in summaries {
                w.write_record(csv_row(s))?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, summaries)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn emit_results_to_path(summaries: &[ExperimentSummary], format: OutputFormat, path: &Path) -> Result<()> {
    if summaries.is_empty() {
        return Err(Error::EmptyResults);
    }
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    emit_results(summaries, format, file)
}

pub fn read_json_results(text: &str) -> Result<Vec<ExperimentSummary>> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{AutoOr, ExperimentConfig};
    use crate::harness::experiment::run_experiment;

    fn summary() -> ExperimentSummary {
        run_experiment(&ExperimentConfig {
            m: 16,
            n: 300,
            trials: 30,
            epsilon: AutoOr::Value(0.2),
            steps: AutoOr::Value(3),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(
            emit_results(&[], OutputFormat::Csv, Vec::new()),
            Err(Error::EmptyResults)
        ));
    }

    #[test]
    fn one_summary_one_row() {
        let mut buf = Vec::new();
        emit_results(&[summary()], OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("16,300,0.5,0.05,0.05,uniform,0.2,3,30,"));
    }

    #[test]
    fn json_round_trip() {
        let s = vec![summary(), summary()];
        let mut buf = Vec::new();
        emit_results(&s, OutputFormat::Json, &mut buf).unwrap();
        let back = read_json_results(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
