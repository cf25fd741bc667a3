use std::fmt::Write as _;
use std::path::Path;

use super::write_file;
use crate::classify::CvReport;
use crate::error::{Error, Result};

pub const METHOD_NETWORK_MDS: &str = "network_mds";
pub const METHOD_NETWORK_NO_MDS: &str = "network_nomds";
pub const METHOD_TFIDF_MDS: &str = "tfidf_mds";

/// Methods in report column order, with their column titles.
const METHODS: [(&str, &str); 3] = [
    (METHOD_NETWORK_MDS, "network+MDS"),
    (METHOD_NETWORK_NO_MDS, "network, no MDS"),
    (METHOD_TFIDF_MDS, "TF-IDF+MDS"),
];

const HEADER: &str = "method,classifier,accuracy,fold_sd,correct,total,features";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub classifier: String,
    pub accuracy: f64,
    /// Population standard deviation of the per-fold accuracies.
    pub fold_sd: f64,
    pub correct: usize,
    pub total: usize,
    /// Feature width seen by the classifier.
    pub features: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    pub documents: usize,
    pub classes: usize,
    pub rows: Vec<SummaryRow>,
    /// Chosen MDS dimension per embedded matrix.
    pub dims: Vec<(String, usize)>,
}

impl Summary {
    pub fn new(documents: usize, classes: usize) -> Self {
        Self {
            documents,
            classes,
            ..Default::default()
        }
    }

    pub(crate) fn push(&mut self, method: &str, report: &CvReport, features: usize) {
        let accs: Vec<f64> = report.folds.iter().map(|f| f.accuracy()).collect();
        let mean = accs.iter().sum::<f64>() / accs.len().max(1) as f64;
        let var = accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / accs.len().max(1) as f64;
        self.rows.push(SummaryRow {
            method: method.to_string(),
            classifier: report.classifier.clone(),
            accuracy: report.accuracy,
            fold_sd: var.sqrt(),
            correct: report.correct(),
            total: report.predictions.len(),
            features,
        });
    }

    pub fn accuracy(&self, method: &str, classifier: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.classifier == classifier)
            .map(|r| r.accuracy)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# documents={}\n# classes={}\n", self.documents, self.classes);
        if !self.dims.is_empty() {
            let dims: Vec<String> = self.dims.iter().map(|(n, d)| format!("{n}:{d}")).collect();
            let _ = writeln!(out, "# dims={}", dims.join(";"));
        }
        out.push_str(HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{:?},{:?},{},{},{}",
                r.method, r.classifier, r.accuracy, r.fold_sd, r.correct, r.total, r.features
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = Summary::default();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let bad = |m: &str| Error::parse(path, i + 1, m);
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                match k {
                    "documents" => s.documents = v.parse().map_err(|_| bad("bad document count"))?,
                    "classes" => s.classes = v.parse().map_err(|_| bad("bad class count"))?,
                    "dims" => {
                        for part in v.split(';') {
                            let (n, d) = part.split_once(':').ok_or_else(|| bad("bad dims entry"))?;
                            s.dims.push((n.to_string(), d.parse().map_err(|_| bad("bad dimension"))?));
                        }
                    }
                    _ => return Err(bad("unknown metadata key")),
                }
                continue;
            }
            if !header_seen {
                if line != HEADER {
                    return Err(bad("unexpected header"));
                }
                header_seen = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad("expected 7 fields"));
            }
            let num = |x: &str| x.parse::<f64>().map_err(|_| bad("bad number"));
            let int = |x: &str| x.parse::<usize>().map_err(|_| bad("bad integer"));
            s.rows.push(SummaryRow {
                method: f[0].to_string(),
                classifier: f[1].to_string(),
                accuracy: num(f[2])?,
                fold_sd: num(f[3])?,
                correct: int(f[4])?,
                total: int(f[5])?,
                features: int(f[6])?,
            });
        }
        Ok(s)
    }
}

fn summary_file(method: &str) -> String {
    format!("summary_{method}.csv")
}

/// Joins every per-method summary present in `dir` into `summary.csv` and a
/// plain-text grid `report.txt` with classifiers as rows and methods as columns.
pub(crate) fn write_joint_report(dir: &Path) -> Result<()> {
    let mut parts = Vec::new();
    for (method, title) in METHODS {
        let p = dir.join(summary_file(method));
        if p.is_file() {
            parts.push((title, Summary::read_csv(&p)?));
        }
    }
    let mut joint = Summary::default();
    for (_, s) in &parts {
        joint.documents = joint.documents.max(s.documents);
        joint.classes = joint.classes.max(s.classes);
        joint.rows.extend(s.rows.iter().cloned());
        joint.dims.extend(s.dims.iter().cloned());
    }
    joint.write_csv(&dir.join("summary.csv"))?;

    let mut classifiers: Vec<&str> = Vec::new();
    for r in &joint.rows {
        if !classifiers.contains(&r.classifier.as_str()) {
            classifiers.push(&r.classifier);
        }
    }
    let mut out = String::new();
    let chance = if joint.classes > 0 {
        100.0 / joint.classes as f64
    } else {
        0.0
    };
    let _ = writeln!(
        out,
        "Cross-validated accuracy (%), {} documents, {} authors, chance {:.2}\n",
        joint.documents, joint.classes, chance
    );
    let cols: Vec<(&str, &str)> = METHODS
        .iter()
        .filter(|(m, _)| joint.rows.iter().any(|r| r.method == *m))
        .copied()
        .collect();
    let table = |out: &mut String, value: &dyn Fn(&SummaryRow) -> f64| {
        let _ = write!(out, "{:<12}", "classifier");
        for (_, title) in &cols {
            let _ = write!(out, "{title:>18}");
        }
        out.push('\n');
        for c in &classifiers {
            let _ = write!(out, "{c:<12}");
            for (m, _) in &cols {
                match joint.rows.iter().find(|r| r.method == *m && r.classifier == *c) {
                    Some(r) => {
                        let _ = write!(out, "{:>18.2}", 100.0 * value(r));
                    }
                    None => {
                        let _ = write!(out, "{:>18}", "-");
                    }
                }
            }
            out.push('\n');
        }
    };
    table(&mut out, &|r| r.accuracy);
    out.push_str("\nStandard deviation across folds (%)\n\n");
    table(&mut out, &|r| r.fold_sd);
    if !joint.dims.is_empty() {
        out.push_str("\nMDS dimensions:");
        for (n, d) in &joint.dims {
            let _ = write!(out, " {n}={d}");
        }
        out.push('\n');
    }
    write_file(&dir.join("report.txt"), &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, classifier: &str, acc: f64) -> SummaryRow {
        SummaryRow {
            method: method.into(),
            classifier: classifier.into(),
            accuracy: acc,
            fold_sd: 0.05,
            correct: (acc * 80.0) as usize,
            total: 80,
            features: 12,
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = Summary {
            documents: 80,
            classes: 8,
            rows: vec![row(METHOD_NETWORK_MDS, "knn", 0.9125), row(METHOD_NETWORK_MDS, "nb", 0.1)],
            dims: vec![("degree".into(), 3), ("betweenness".into(), 2)],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        s.write_csv(&p).unwrap();
        assert_eq!(Summary::read_csv(&p).unwrap(), s);
    }

    #[test]
    fn joint_report_lists_both_methods() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Summary::new(80, 8);
        a.rows = vec![row(METHOD_NETWORK_MDS, "knn", 0.9), row(METHOD_NETWORK_MDS, "j48", 0.7)];
        a.write_csv(&dir.path().join(summary_file(METHOD_NETWORK_MDS))).unwrap();
        let mut b = Summary::new(80, 8);
        b.rows = vec![row(METHOD_TFIDF_MDS, "knn", 0.5)];
        b.write_csv(&dir.path().join(summary_file(METHOD_TFIDF_MDS))).unwrap();
        write_joint_report(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
        let knn = text.lines().find(|l| l.starts_with("knn")).unwrap();
        assert!(knn.contains("90.00") && knn.contains("50.00"), "{knn}");
        let j48 = text.lines().find(|l| l.starts_with("j48")).unwrap();
        assert!(j48.trim_end().ends_with('-'));
        let joint = Summary::read_csv(&dir.path().join("summary.csv")).unwrap();
        assert_eq!(joint.rows.len(), 3);
    }
}
