//! On-disk formats. See `FORMATS.md` at the repository root for the layouts.
//!
//! All ids in files are 1-based. An individual's id is its 1-based position
//! in the dataset. Floating-point values in dataset files are
//! written with 17 significant digits so a save/load cycle is lossless.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::types::{validate_dataset, Assignment, Dataset, EmpiricalFeatureSet, GocTrace, NormMeta};

pub const META_FILE: &str = "meta.json";
pub const CANDIDATES_FILE: &str = "candidates.csv";
pub const TRUTH_FILE: &str = "truth.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Meta {
    n: usize,
    q: usize,
    #[serde(rename = "K_star")]
    k_star: Option<usize>,
    seed: Option<u64>,
    standardized: bool,
    norm_meta: Option<NormMeta>,
}

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path)?;
    Ok(ReaderBuilder::new().flexible(true).from_reader(file))
}

fn check_header(path: &Path, got: &StringRecord, expected: &[String]) -> Result<()> {
    let got: Vec<&str> = got.iter().collect();
    if got.len() != expected.len() || got.iter().zip(expected).any(|(a, b)| a.trim() != b) {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            msg: format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Iterate records, checking each has `width` fields and handing the
/// 1-based line number to the callback.
fn for_each_record(
    path: &Path,
    rdr: &mut csv::Reader<File>,
    width: usize,
    mut f: impl FnMut(usize, &StringRecord) -> Result<()>,
) -> Result<()> {
    let mut rec = StringRecord::new();
    loop {
        let more = rdr.read_record(&mut rec).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        if !more {
            return Ok(());
        }
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(parse_err(
                path,
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        f(line, &rec)?;
    }
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, rec: &StringRecord, i: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec[i].trim();
    raw.parse()
        .map_err(|e| parse_err(path, line, format!("field {}: `{raw}`: {e}", i + 1)))
}

fn candidates_header(q: usize) -> Vec<String> {
    let mut h = vec!["individual".to_string(), "candidate".to_string()];
    h.extend((1..=q).map(|l| format!("f{l}")));
    h.push("penalty".to_string());
    h
}

pub fn save_dataset(d: &Dataset, dir: &Path) -> Result<()> {
    validate_dataset(d)?;
    fs::create_dir_all(dir)?;
    let meta = Meta {
        n: d.len(),
        q: d.feature_dim,
        k_star: d.num_true_clusters(),
        seed: d.seed,
        standardized: d.standardized,
        norm_meta: d.norm_meta.clone(),
    };
    let mut json = serde_json::to_string_pretty(&meta)?;
    json.push('\n');
    fs::write(dir.join(META_FILE), json)?;

    let mut w = writer(&dir.join(CANDIDATES_FILE))?;
    w.write_record(candidates_header(d.feature_dim))?;
    let mut row = Vec::with_capacity(d.feature_dim + 3);
    for (i, set) in d.sets.iter().enumerate() {
        for j in 0..set.len() {
            row.clear();
            row.push((i + 1).to_string());
            row.push((j + 1).to_string());
            row.extend(set.candidate(j).iter().map(|&x| fmt_f64(x)));
            row.push(fmt_f64(set.penalties[j]));
            w.write_record(&row)?;
        }
    }
    w.flush()?;

    let truth = dir.join(TRUTH_FILE);
    match &d.true_labels {
        Some(labels) => write_labels(&truth, "true_cluster", labels)?,
        None if truth.exists() => fs::remove_file(truth)?,
        None => {}
    }
    Ok(())
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let meta_path = dir.join(META_FILE);
    let meta: Meta = serde_json::from_str(&fs::read_to_string(&meta_path)?).map_err(|e| Error::Schema {
        path: meta_path.clone(),
        msg: e.to_string(),
    })?;

    let path = dir.join(CANDIDATES_FILE);
    let mut rdr = reader(&path)?;
    let header = rdr.headers()?.clone();
    let expected = candidates_header(meta.q);
    check_header(&path, &header, &expected)?;

    let q = meta.q;
    let mut sets: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for_each_record(&path, &mut rdr, expected.len(), |line, rec| {
        let ind: usize = field(&path, line, rec, 0)?;
        let cand: usize = field(&path, line, rec, 1)?;
        if ind == sets.len() + 1 && cand == 1 {
            sets.push((Vec::new(), Vec::new()));
        }
        let cur = sets.len();
        let m = sets.last().map_or(0, |s| s.1.len());
        if cur == 0 || ind != cur || cand != m + 1 {
            return Err(parse_err(
                &path,
                line,
                format!("out-of-order row: individual {ind}, candidate {cand}"),
            ));
        }
        let (feats, pens) = sets.last_mut().unwrap();
        for l in 0..q {
            feats.push(field(&path, line, rec, 2 + l)?);
        }
        pens.push(field(&path, line, rec, 2 + q)?);
        Ok(())
    })?;
    if sets.len() != meta.n {
        return Err(Error::Schema {
            path,
            msg: format!("meta declares {} individuals, found {}", meta.n, sets.len()),
        });
    }

    let sets = sets
        .into_iter()
        .enumerate()
        .map(|(i, (feats, pens))| {
            let m = pens.len();
            EmpiricalFeatureSet::new(i + 1, Matrix::from_vec(m, q, feats), pens)
        })
        .collect::<Result<Vec<_>>>()?;

    let truth_path = dir.join(TRUTH_FILE);
    let true_labels = if truth_path.exists() {
        let labels = read_labels(&truth_path)?;
        if labels.len() != meta.n {
            return Err(Error::Schema {
                path: truth_path,
                msg: format!("expected {} rows, found {}", meta.n, labels.len()),
            });
        }
        Some(labels)
    } else {
        None
    };

    let mut d = Dataset::new(sets, true_labels)?;
    d.feature_dim = q;
    d.standardized = meta.standardized;
    d.norm_meta = meta.norm_meta;
    d.seed = meta.seed;
    Ok(d)
}

fn write_labels(path: &Path, column: &str, labels: &[usize]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["individual", column])?;
    for (i, l) in labels.iter().enumerate() {
        w.write_record([(i + 1).to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Read the label column of a truth file (`individual,true_cluster`) or of an
/// assignment file (`individual,cluster,candidate`).
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut rdr = reader(path)?;
    let header = rdr.headers()?.clone();
    let width = header.len();
    let ok = matches!(
        header.iter().map(str::trim).collect::<Vec<_>>().as_slice(),
        ["individual", "true_cluster"] | ["individual", "cluster", "candidate"]
    );
    if !ok {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            msg: format!(
                "expected `individual,true_cluster` or `individual,cluster,candidate`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut labels = Vec::new();
    for_each_record(path, &mut rdr, width, |line, rec| {
        let ind: usize = field(path, line, rec, 0)?;
        if ind != labels.len() + 1 {
            return Err(parse_err(path, line, format!("expected individual {}, found {ind}", labels.len() + 1)));
        }
        let label: usize = field(path, line, rec, 1)?;
        if label == 0 {
            return Err(parse_err(path, line, "cluster labels are 1-based"));
        }
        labels.push(label);
        Ok(())
    })?;
    Ok(labels)
}

/// Write `individual,cluster,candidate`. The candidate column is 1-based and
/// left empty when the method does not select candidates.
pub fn write_assignment(path: &Path, a: &Assignment) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["individual", "cluster", "candidate"])?;
    for (i, &l) in a.labels.iter().enumerate() {
        let cand = a
            .selected
            .as_ref()
            .map_or(String::new(), |s| (s[i] + 1).to_string());
        w.write_record([(i + 1).to_string(), l.to_string(), cand])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_assignment(path: &Path) -> Result<Assignment> {
    let mut rdr = reader(path)?;
    let header = rdr.headers()?.clone();
    let expected: Vec<String> = ["individual", "cluster", "candidate"].map(String::from).to_vec();
    check_header(path, &header, &expected)?;
    let mut labels = Vec::new();
    let mut selected = Vec::new();
    let mut any_empty = false;
    for_each_record(path, &mut rdr, 3, |line, rec| {
        let ind: usize = field(path, line, rec, 0)?;
        if ind != labels.len() + 1 {
            return Err(parse_err(path, line, format!("expected individual {}, found {ind}", labels.len() + 1)));
        }
        let label: usize = field(path, line, rec, 1)?;
        if label == 0 {
            return Err(parse_err(path, line, "cluster labels are 1-based"));
        }
        labels.push(label);
        if rec[2].trim().is_empty() {
            any_empty = true;
        } else {
            let c: usize = field(path, line, rec, 2)?;
            if c == 0 {
                return Err(parse_err(path, line, "candidate ids are 1-based"));
            }
            selected.push(c - 1);
        }
        Ok(())
    })?;
    let selected = if any_empty {
        if !selected.is_empty() {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                msg: "candidate column is only partially filled".into(),
            });
        }
        None
    } else {
        Some(selected)
    };
    let num_clusters = labels.iter().copied().max().unwrap_or(0);
    Ok(Assignment {
        labels,
        num_clusters,
        selected,
        centers: None,
    })
}

/// One row of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub objective: f64,
    pub n_changed_labels: usize,
    pub n_changed_candidates: usize,
}

pub fn trace_rows(trace: &GocTrace) -> Vec<TraceRow> {
    trace
        .iterations
        .iter()
        .map(|r| TraceRow {
            t: r.t,
            k: r.k,
            objective: r.objective,
            n_changed_labels: r.changed_labels,
            n_changed_candidates: r.changed_candidates,
        })
        .collect()
}

pub fn write_trace(path: &Path, trace: &GocTrace) -> Result<()> {
    write_rows(path, &trace_rows(trace))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    read_rows(path, &["t", "K", "objective", "n_changed_labels", "n_changed_candidates"])
}

/// One row of a results file. Raw rows carry `stat = "value"` and the dataset
/// seed; aggregate rows carry `dataset_id = "all"` and `stat` of `mean` or `sd`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset_id: String,
    pub method: String,
    pub oracle: String,
    #[serde(rename = "K0")]
    pub k0: String,
    pub lambda: String,
    pub ap_kind: String,
    pub quantile: String,
    pub stat: String,
    pub nmi: f64,
    pub f_measure: f64,
    pub n_clusters: f64,
    pub n_iterations: f64,
}

pub const RESULT_COLUMNS: [&str; 12] = [
    "dataset_id",
    "method",
    "oracle",
    "K0",
    "lambda",
    "ap_kind",
    "quantile",
    "stat",
    "nmi",
    "f_measure",
    "n_clusters",
    "n_iterations",
];

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_rows(path, rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    read_rows(path, &RESULT_COLUMNS)
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, columns: &[&str]) -> Result<Vec<T>> {
    let mut rdr = reader(path)?;
    let header = rdr.headers()?.clone();
    let expected: Vec<String> = columns.iter().map(|s| s.to_string()).collect();
    check_header(path, &header, &expected)?;
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let row = rec.map_err(|e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        out.push(row);
    }
    Ok(out)
}

/// Dense square matrix with no header, one row per line.
pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut f = std::io::BufWriter::new(File::create(path)?);
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(f, "{}", line.join(","))?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let file = File::open(path)?;
    let mut rdr = ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for_each_record_any(path, &mut rdr, |line, rec| {
        let row = (0..rec.len())
            .map(|i| field(path, line, rec, i))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(path, line, "ragged row"));
            }
        }
        rows.push(row);
        Ok(())
    })?;
    Ok(Matrix::from_rows(&rows))
}

fn for_each_record_any(
    path: &Path,
    rdr: &mut csv::Reader<File>,
    mut f: impl FnMut(usize, &StringRecord) -> Result<()>,
) -> Result<()> {
    let mut rec = StringRecord::new();
    while rdr.read_record(&mut rec).map_err(|e| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        parse_err(path, line, e.to_string())
    })? {
        let line = rec.position().map_or(0, |p| p.line() as usize);
        f(line, &rec)?;
    }
    Ok(())
}

/// Path of the trace file written next to an assignment file:
/// `out.csv` becomes `out.trace.csv`.
pub fn trace_path(assignment: &Path) -> PathBuf {
    let stem = assignment
        .file_stem()
        .map_or_else(|| "assignment".into(), |s| s.to_string_lossy().into_owned());
    assignment.with_file_name(format!("{stem}.trace.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::IterationRecord;

    fn tiny() -> Dataset {
        let a = EmpiricalFeatureSet::new(
            1,
            Matrix::from_rows(&[vec![0.1, 1.0 / 3.0], vec![-2.5e-300, 7.0]]),
            vec![0.0, 0.25],
        )
        .unwrap();
        let b = EmpiricalFeatureSet::unpenalized(2, Matrix::from_rows(&[vec![std::f64::consts::PI, 1e300]])).unwrap();
        let mut d = Dataset::new(vec![a, b], Some(vec![2, 1])).unwrap();
        d.seed = Some(9);
        d
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = tiny();
        save_dataset(&d, dir.path()).unwrap();
        assert_eq!(load_dataset(dir.path()).unwrap(), d);
    }

    #[test]
    fn missing_truth_loads_unlabelled() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = tiny();
        d.true_labels = None;
        save_dataset(&d, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert!(back.true_labels.is_none());
        assert_eq!(back, d);
    }

    #[test]
    fn missing_column_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&tiny(), dir.path()).unwrap();
        let p = dir.path().join(CANDIDATES_FILE);
        let text = fs::read_to_string(&p).unwrap();
        let cut: Vec<String> = text
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(3);
                f.join(",")
            })
            .collect();
        fs::write(&p, cut.join("\n") + "\n").unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::Schema { .. })));
    }

    #[test]
    fn bad_number_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        save_dataset(&tiny(), dir.path()).unwrap();
        let p = dir.path().join(CANDIDATES_FILE);
        let text = fs::read_to_string(&p).unwrap().replacen("7.0000000000000000e0", "seven", 1);
        fs::write(&p, text).unwrap();
        match load_dataset(dir.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn assignment_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        let a = Assignment {
            labels: vec![1, 2, 2],
            num_clusters: 2,
            selected: Some(vec![0, 4, 1]),
            centers: None,
        };
        write_assignment(&p, &a).unwrap();
        assert_eq!(read_assignment(&p).unwrap(), a);
        assert_eq!(read_labels(&p).unwrap(), vec![1, 2, 2]);

        let b = Assignment { selected: None, ..a };
        write_assignment(&p, &b).unwrap();
        assert_eq!(read_assignment(&p).unwrap(), b);
    }

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let trace = GocTrace {
            iterations: vec![IterationRecord {
                t: 1,
                k: 3,
                labels: vec![1],
                selected: vec![0],
                features: Matrix::zeros(1, 1),
                objective: 0.1 + 0.2,
                changed_labels: 0,
                changed_candidates: 1,
            }],
            converged: true,
            total_iterations: 1,
        };
        write_trace(&p, &trace).unwrap();
        assert_eq!(read_trace(&p).unwrap(), trace_rows(&trace));
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let m = Matrix::from_rows(&[vec![0.0, -1.0 / 7.0], vec![-1.0 / 7.0, 0.0]]);
        write_matrix(&p, &m).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), m);
    }

    #[test]
    fn trace_path_sits_beside_assignment() {
        assert_eq!(trace_path(Path::new("out/run.csv")), PathBuf::from("out/run.trace.csv"));
    }
}
