//! Corpus scoring: per-document metrics joined by id, then aggregated.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rop::{match_pred_lines, pair_counts, PairCounts, Prf};
use super::{anlsl, crr, ocrr};
use crate::model::{BBox, TextLine};
use crate::order::layout_complexity_bleu;

/// Similarity a predicted segment needs to be mapped onto a ground-truth line.
pub const LINE_MATCH_THRESHOLD: f64 = 0.85;
const BLEU_MAX_N: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Vqa,
    Ocr,
    RopLine,
    RopPara,
    Complexity,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Vqa => "vqa",
            Task::Ocr => "ocr",
            Task::RopLine => "rop_line",
            Task::RopPara => "rop_para",
            Task::Complexity => "complexity",
        }
    }

    pub fn metric_names(self) -> Vec<String> {
        match self {
            Task::Vqa => vec!["anlsl".into()],
            Task::Ocr => vec!["crr".into(), "ocrr".into()],
            Task::RopLine | Task::RopPara => {
                vec!["precision".into(), "recall".into(), "f1".into()]
            }
            Task::Complexity => (1..=BLEU_MAX_N).map(|n| format!("bleu{n}")).collect(),
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vqa" => Ok(Task::Vqa),
            "ocr" => Ok(Task::Ocr),
            "rop_line" => Ok(Task::RopLine),
            "rop_para" => Ok(Task::RopPara),
            "complexity" => Ok(Task::Complexity),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredictionOutput {
    Text(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub task: Task,
    pub output: PredictionOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtLine {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BBox>,
}

/// Ground truth for one document. Which fields matter depends on `task`:
/// `answers` for vqa, `text` for ocr, `lines` + `order` for the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub id: String,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lines: Vec<GtLine>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub order: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("prediction `{0}` has no ground truth")]
    IdMismatch(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("prediction `{id}` has the wrong output shape for task {task}")]
    OutputShape { id: String, task: &'static str },
    #[error("ground truth `{0}` has lines without boxes")]
    MissingBBox(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub id: String,
    pub missing: bool,
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<PairCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Unweighted mean over documents.
    pub macro_avg: BTreeMap<String, f64>,
    /// Pair counts pooled across documents (reading-order tasks only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub micro: Option<Prf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: Task,
    pub documents: Vec<DocumentScore>,
    pub aggregate: Aggregate,
    pub missing: usize,
}

fn unique_ids<'a>(ids: impl Iterator<Item = &'a str>) -> Result<(), MetricError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(MetricError::DuplicateId(id.to_string()));
        }
    }
    Ok(())
}

fn prf_values(p: Prf) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("precision".to_string(), p.precision),
        ("recall".to_string(), p.recall),
        ("f1".to_string(), p.f1),
    ])
}

fn score_document(
    task: Task,
    gt: &GroundTruthRecord,
    pred: Option<&PredictionRecord>,
) -> Result<DocumentScore, MetricError> {
    let shape = || MetricError::OutputShape {
        id: gt.id.clone(),
        task: task.as_str(),
    };
    let mut pairs = None;
    let values = match task {
        Task::Vqa => {
            let s = match pred.map(|p| &p.output) {
                None => 0.0,
                Some(PredictionOutput::List(v)) => anlsl(&gt.answers, v),
                Some(PredictionOutput::Text(t)) => anlsl(&gt.answers, std::slice::from_ref(t)),
            };
            BTreeMap::from([("anlsl".to_string(), s)])
        }
        Task::Ocr => {
            let (c, o) = match pred.map(|p| &p.output) {
                None => (0.0, 0.0),
                Some(PredictionOutput::Text(t)) => (crr(&gt.text, t), ocrr(&gt.text, t)),
                Some(PredictionOutput::List(_)) => return Err(shape()),
            };
            BTreeMap::from([("crr".to_string(), c), ("ocrr".to_string(), o)])
        }
        Task::RopLine | Task::RopPara => {
            let segments: &[String] = match pred.map(|p| &p.output) {
                None => &[],
                Some(PredictionOutput::List(v)) => v,
                Some(PredictionOutput::Text(_)) => return Err(shape()),
            };
            let lines: Vec<(String, String)> = gt
                .lines
                .iter()
                .map(|l| (l.id.clone(), l.text.clone()))
                .collect();
            let mapped: Vec<String> = match_pred_lines(segments, &lines, LINE_MATCH_THRESHOLD)
                .into_values()
                .collect();
            let counts = pair_counts(&mapped, &gt.order);
            pairs = Some(counts);
            prf_values(Prf::from_counts(counts))
        }
        Task::Complexity => {
            let lines = gt
                .lines
                .iter()
                .map(|l| {
                    Ok(TextLine {
                        line_id: l.id.clone(),
                        text: l.text.clone(),
                        bbox: l.bbox.ok_or_else(|| MetricError::MissingBBox(gt.id.clone()))?,
                        font_size: None,
                        font_style: None,
                        block_id: String::new(),
                    })
                })
                .collect::<Result<Vec<_>, MetricError>>()?;
            let score = layout_complexity_bleu(&gt.order, &lines, BLEU_MAX_N);
            score
                .cumulative
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("bleu{}", i + 1), *v))
                .collect()
        }
    };
    Ok(DocumentScore {
        id: gt.id.clone(),
        missing: pred.is_none() && task != Task::Complexity,
        values,
        pairs,
    })
}

/// Scores every ground-truth document of `task` against its prediction.
///
/// Records of other tasks are ignored. A missing prediction scores 0 and is
/// counted; a prediction without ground truth is an error. Layout complexity
/// depends on the ground truth alone, so predictions are optional there.
pub fn score_corpus(
    predictions: &[PredictionRecord],
    ground_truth: &[GroundTruthRecord],
    task: Task,
) -> Result<MetricReport, MetricError> {
    let preds: Vec<&PredictionRecord> = predictions.iter().filter(|p| p.task == task).collect();
    let gts: Vec<&GroundTruthRecord> = ground_truth.iter().filter(|g| g.task == task).collect();
    unique_ids(preds.iter().map(|p| p.id.as_str()))?;
    unique_ids(gts.iter().map(|g| g.id.as_str()))?;

    let gt_ids: HashSet<&str> = gts.iter().map(|g| g.id.as_str()).collect();
    if let Some(p) = preds.iter().find(|p| !gt_ids.contains(p.id.as_str())) {
        return Err(MetricError::IdMismatch(p.id.clone()));
    }
    let by_id: HashMap<&str, &PredictionRecord> =
        preds.iter().map(|p| (p.id.as_str(), *p)).collect();

    let documents = gts
        .par_iter()
        .map(|g| score_document(task, g, by_id.get(g.id.as_str()).copied()))
        .collect::<Result<Vec<_>, _>>()?;

    let mut macro_avg = BTreeMap::new();
    for name in task.metric_names() {
        let mean = if documents.is_empty() {
            0.0
        } else {
            documents.iter().map(|d| d.values[&name]).sum::<f64>() / documents.len() as f64
        };
        macro_avg.insert(name, mean);
    }
    let micro = matches!(task, Task::RopLine | Task::RopPara).then(|| {
        let total = documents
            .iter()
            .filter_map(|d| d.pairs)
            .fold(PairCounts::default(), |a, b| a + b);
        Prf::from_counts(total)
    });
    let missing = documents.iter().filter(|d| d.missing).count();
    Ok(MetricReport {
        task,
        documents,
        aggregate: Aggregate { macro_avg, micro },
        missing,
    })
}

/// Fixed-width text table: one row per document, then the aggregates.
pub fn render_table(report: &MetricReport) -> String {
    let names = report.task.metric_names();
    let id_width = report
        .documents
        .iter()
        .map(|d| d.id.chars().count())
        .chain(["micro".len(), "id".len()])
        .max()
        .unwrap_or(2);
    let col = names.iter().map(|n| n.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = write!(out, "{:<id_width$}", "id");
    for n in &names {
        let _ = write!(out, "  {n:>col$}");
    }
    out.push('\n');
    let rule = id_width + names.len() * (col + 2);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    let row = |out: &mut String, label: &str, vals: &dyn Fn(&str) -> f64, suffix: &str| {
        let _ = write!(out, "{label:<id_width$}");
        for n in &names {
            let _ = write!(out, "  {:>col$.4}", vals(n));
        }
        out.push_str(suffix);
        out.push('\n');
    };
    for d in &report.documents {
        row(&mut out, &d.id, &|n| d.values[n], if d.missing { "  (missing)" } else { "" });
    }
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    row(&mut out, "macro", &|n| report.aggregate.macro_avg[n], "");
    if let Some(m) = report.aggregate.micro {
        let v = prf_values(m);
        row(&mut out, "micro", &|n| v[n], "");
    }
    let _ = writeln!(
        out,
        "documents: {}  missing predictions: {}",
        report.documents.len(),
        report.missing
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vqa_gt(id: &str, answers: &[&str]) -> GroundTruthRecord {
        GroundTruthRecord {
            id: id.into(),
            task: Task::Vqa,
            answers: answers.iter().map(|s| s.to_string()).collect(),
            text: String::new(),
            lines: vec![],
            order: vec![],
        }
    }

    fn vqa_pred(id: &str, answers: &[&str]) -> PredictionRecord {
        PredictionRecord {
            id: id.into(),
            task: Task::Vqa,
            output: PredictionOutput::List(answers.iter().map(|s| s.to_string()).collect()),
        }
    }

    #[test]
    fn perfect_predictions() {
        let gts = vec![vqa_gt("a", &["x"]), vqa_gt("b", &["y", "z"])];
        let preds = vec![vqa_pred("a", &["x"]), vqa_pred("b", &["z", "y"])];
        let r = score_corpus(&preds, &gts, Task::Vqa).unwrap();
        assert_eq!(r.aggregate.macro_avg["anlsl"], 1.0);
        assert_eq!(r.missing, 0);
    }

    #[test]
    fn half_missing_averages_to_half() {
        let gts: Vec<_> = (0..4).map(|i| vqa_gt(&format!("d{i}"), &["ans"])).collect();
        let preds = vec![vqa_pred("d0", &["ans"]), vqa_pred("d2", &["ans"])];
        let r = score_corpus(&preds, &gts, Task::Vqa).unwrap();
        assert_eq!(r.aggregate.macro_avg["anlsl"], 0.5);
        assert_eq!(r.missing, 2);
        assert!(r.documents[1].missing);
    }

    #[test]
    fn unknown_prediction_id() {
        let gts = vec![vqa_gt("a", &["x"])];
        let preds = vec![vqa_pred("zzz", &["x"])];
        assert_eq!(
            score_corpus(&preds, &gts, Task::Vqa),
            Err(MetricError::IdMismatch("zzz".into()))
        );
    }

    #[test]
    fn duplicate_ids_rejected() {
        let gts = vec![vqa_gt("a", &["x"]), vqa_gt("a", &["y"])];
        assert!(matches!(
            score_corpus(&[], &gts, Task::Vqa),
            Err(MetricError::DuplicateId(_))
        ));
    }

    #[test]
    fn ocr_shape_checked() {
        let gt = GroundTruthRecord {
            id: "p".into(),
            task: Task::Ocr,
            answers: vec![],
            text: "abcd".into(),
            lines: vec![],
            order: vec![],
        };
        let good = PredictionRecord {
            id: "p".into(),
            task: Task::Ocr,
            output: PredictionOutput::Text("abcdabcd".into()),
        };
        let r = score_corpus(&[good.clone()], &[gt.clone()], Task::Ocr).unwrap();
        assert_eq!(r.aggregate.macro_avg["crr"], 1.0);
        assert_eq!(r.aggregate.macro_avg["ocrr"], 0.5);
        let bad = PredictionRecord {
            output: PredictionOutput::List(vec![]),
            ..good
        };
        assert!(matches!(
            score_corpus(&[bad], &[gt], Task::Ocr),
            Err(MetricError::OutputShape { .. })
        ));
    }

    fn rop_gt(id: &str, texts: &[&str]) -> GroundTruthRecord {
        let lines: Vec<GtLine> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| GtLine {
                id: format!("{id}-{i}"),
                text: t.to_string(),
                bbox: Some(BBox::new(0, i as i64 * 20, 100, i as i64 * 20 + 10)),
            })
            .collect();
        GroundTruthRecord {
            id: id.into(),
            task: Task::RopLine,
            answers: vec![],
            text: String::new(),
            order: lines.iter().map(|l| l.id.clone()).collect(),
            lines,
        }
    }

    #[test]
    fn rop_micro_pools_pairs() {
        let a = rop_gt("a", &["alpha line one", "beta line two", "gamma line three"]);
        let b = rop_gt("b", &["delta words here", "epsilon words there"]);
        let pred = PredictionRecord {
            id: "a".into(),
            task: Task::RopLine,
            output: PredictionOutput::List(vec!["alpha line one".into(), "beta line two".into()]),
        };
        let r = score_corpus(&[pred], &[a, b], Task::RopLine).unwrap();
        let micro = r.aggregate.micro.unwrap();
        assert_eq!(micro.precision, 1.0);
        assert!((micro.recall - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.missing, 1);
        assert_eq!(r.documents[0].pairs.unwrap().hits, 1);
    }

    #[test]
    fn complexity_from_ground_truth() {
        let mut g = rop_gt("c", &["one", "two", "three"]);
        g.task = Task::Complexity;
        let r = score_corpus(&[], &[g.clone()], Task::Complexity).unwrap();
        assert_eq!(r.aggregate.macro_avg["bleu1"], 1.0);
        assert_eq!(r.missing, 0);
        g.lines[0].bbox = None;
        assert_eq!(
            score_corpus(&[], &[g], Task::Complexity),
            Err(MetricError::MissingBBox("c".into()))
        );
    }

    #[test]
    fn table_lists_documents_and_macro() {
        let gts = vec![vqa_gt("doc-1", &["x"])];
        let r = score_corpus(&[], &gts, Task::Vqa).unwrap();
        let t = render_table(&r);
        assert!(t.contains("doc-1"));
        assert!(t.contains("(missing)"));
        assert!(t.contains("macro"));
        assert!(t.lines().next().unwrap().contains("anlsl"));
    }

    #[test]
    fn records_round_trip() {
        let p = vqa_pred("a", &["x", "y"]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"id":"a","task":"vqa","output":["x","y"]}"#);
        assert_eq!(serde_json::from_str::<PredictionRecord>(&s).unwrap(), p);
        let t: PredictionRecord =
            serde_json::from_str(r#"{"id":"b","task":"ocr","output":"text"}"#).unwrap();
        assert_eq!(t.output, PredictionOutput::Text("text".into()));
    }
}
