//! CSV persistence of regret records.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::experiment::RegretRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "agent,env,run,episode,regret,cum_regret";

/// Writes records as CSV. Floats use 17 significant digits, which round-trips
/// every `f64` exactly.
pub fn write_records_to<W: Write>(mut out: W, records: &[RegretRecord], agent: &str, env: &str) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{agent},{env},{},{},{:.16e},{:.16e}",
            r.run, r.episode, r.regret, r.cum_regret
        )?;
    }
    out.flush()
}

pub fn write_records(records: &[RegretRecord], agent: &str, env: &str, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records_to(BufWriter::new(file), records, agent, env).map_err(|e| Error::io(path, e))
}

/// Reads a file produced by [`write_records`]. Returns `(agent, env, record)` rows.
pub fn read_records(path: &Path) -> Result<Vec<(String, String, RegretRecord)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 {
            if line != CSV_HEADER {
                return Err(Error::config(1, format!("unexpected CSV header `{line}`")));
            }
            continue;
        }
        let bad = || Error::config(i + 1, format!("malformed CSV row `{line}`"));
        let fields: Vec<&str> = line.split(',').collect();
        let [agent, env, run, episode, regret, cum] = fields[..] else {
            return Err(bad());
        };
        rows.push((
            agent.to_string(),
            env.to_string(),
            RegretRecord {
                run: run.parse().map_err(|_| bad())?,
                episode: episode.parse().map_err(|_| bad())?,
                regret: regret.parse().map_err(|_| bad())?,
                cum_regret: cum.parse().map_err(|_| bad())?,
            },
        ));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(run: usize, episode: usize, regret: f64, cum_regret: f64) -> RegretRecord {
        RegretRecord { run, episode, regret, cum_regret }
    }

    #[test]
    fn empty_file_has_only_the_header() {
        let mut buf = Vec::new();
        write_records_to(&mut buf, &[], "ucbmq", "gridworld").unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_in_record_order() {
        let records: Vec<_> = (0..2)
            .flat_map(|run| (1..=3).map(move |ep| record(run, ep, 0.1 * ep as f64, 0.0)))
            .collect();
        let mut buf = Vec::new();
        write_records_to(&mut buf, &records, "optql", "chain").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("optql,chain,0,1,"));
        assert!(lines[6].starts_with("optql,chain,1,3,"));
        assert_eq!(lines[1], "optql,chain,0,1,1.0000000000000001e-1,0.0000000000000000e0");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_records(&[], "a", "b", Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
