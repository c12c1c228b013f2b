use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{evaluate, ExperimentConfig, KbKind};
use crate::error::Result;
use crate::qa::QAPair;
use crate::reader::{answer, KnowledgeBase, Mode, ReaderConfig, ReaderKind, DEFAULT_MAX_SPAN};
use crate::scalar::Scalar;

/// The nine system configurations compared in the reference experiments:
/// reader only and retriever + reader without fine-tuning, reader only with
/// fine-tuning, then each knowledge base at k = 5 (512 tokens) and k = 10
/// (1024 tokens).
pub fn canonical_grid(reader_kind: ReaderKind, seed: u64) -> Vec<ExperimentConfig> {
    let cfg = |kb, k, budget, fine_tuned| ExperimentConfig { kb, k, budget, reader_kind, seed, fine_tuned };
    vec![
        cfg(KbKind::None, 0, 512, false),
        cfg(KbKind::WikiNews, 5, 512, false),
        cfg(KbKind::None, 0, 512, true),
        cfg(KbKind::News, 5, 512, true),
        cfg(KbKind::Wiki, 5, 512, true),
        cfg(KbKind::WikiNews, 5, 512, true),
        cfg(KbKind::News, 10, 1024, true),
        cfg(KbKind::Wiki, 10, 1024, true),
        cfg(KbKind::WikiNews, 10, 1024, true),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub position: usize,
    pub supporting_documents: String,
    pub model: String,
    pub k: Option<usize>,
    pub f1: f64,
    pub em: f64,
    pub rouge_l: f64,
    pub failures: usize,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub position: usize,
    pub config: ExperimentConfig,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub rows: Vec<GridRow>,
    pub skipped: Vec<SkipRecord>,
}

/// Reader settings shared by every grid entry.
#[derive(Debug, Clone)]
pub struct GridReader {
    pub endpoint: Option<String>,
    pub timeout: Duration,
    pub max_span: usize,
}

impl Default for GridReader {
    fn default() -> Self {
        GridReader { endpoint: None, timeout: Duration::from_secs(30), max_span: DEFAULT_MAX_SPAN }
    }
}

/// Evaluates every configuration on `test`, in order and without
/// de-duplication. A configuration whose knowledge base is missing from
/// `kbs`, or that is otherwise invalid, is skipped with a record.
pub fn run_experiment_grid<F: Scalar>(
    grid: &[ExperimentConfig],
    test: &[QAPair],
    kbs: &HashMap<KbKind, KnowledgeBase<F>>,
    reader: &GridReader,
) -> Result<GridOutcome> {
    let mut out = GridOutcome::default();
    for (position, cfg) in grid.iter().enumerate() {
        let skip = |reason: String| SkipRecord { position, config: cfg.clone(), reason };
        if let Err(e) = cfg.validate() {
            out.skipped.push(skip(e.to_string()));
            continue;
        }
        let kb = match cfg.kb {
            KbKind::None => None,
            kind => match kbs.get(&kind) {
                Some(kb) => Some(kb),
                None => {
                    log::warn!("grid entry {position}: no index for kb {kind}, skipping");
                    out.skipped.push(skip(format!("no index for kb {kind}")));
                    continue;
                }
            },
        };
        let rc = ReaderConfig {
            mode: if kb.is_some() { Mode::RetrieverReader } else { Mode::ReaderOnly },
            reader_kind: cfg.reader_kind,
            k: cfg.k,
            token_budget: cfg.budget,
            endpoint: reader.endpoint.clone(),
            timeout: reader.timeout,
            max_span: reader.max_span,
        };
        if let Err(e) = rc.validate(kb.is_some()) {
            out.skipped.push(skip(e.to_string()));
            continue;
        }
        let report = evaluate::<F, _, _>(test, |q| answer(q, &rc, kb).map(|a| a.answer), cfg)?;
        let as_f64 = |x: F| x.to_f64().unwrap_or(f64::NAN);
        out.rows.push(GridRow {
            position,
            supporting_documents: cfg.kb.to_string(),
            model: cfg.model_label(),
            k: (cfg.kb != KbKind::None).then_some(cfg.k),
            f1: as_f64(report.aggregates.f1),
            em: as_f64(report.aggregates.em),
            rouge_l: as_f64(report.aggregates.rouge_l),
            failures: report.failures.len(),
            config: cfg.clone(),
        });
    }
    Ok(out)
}

impl GridOutcome {
    /// Plain-text table with the columns
    /// `Supporting documents | Model | k | F1 | EM | R-L`.
    pub fn render_table(&self) -> String {
        let header = ["Supporting documents", "Model", "k", "F1", "EM", "R-L"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.supporting_documents.clone(),
                    r.model.clone(),
                    r.k.map_or_else(|| "-".to_string(), |k| k.to_string()),
                    format!("{:.1}", r.f1),
                    format!("{:.1}", r.em),
                    format!("{:.1}", r.rouge_l),
                ]
            })
            .collect();
        let mut widths = header.map(|h| h.chars().count());
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |row: &[String]| {
            let parts: Vec<String> = row
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    let pad = w - c.chars().count();
                    if i < 2 {
                        format!("{c}{}", " ".repeat(pad))
                    } else {
                        format!("{}{c}", " ".repeat(pad))
                    }
                })
                .collect();
            let _ = writeln!(out, "| {} |", parts.join(" | "));
        };
        line(&header.map(String::from));
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&rule);
        for row in &cells {
            line(row);
        }
        out
    }

    /// Writes `results.json` and `results_table.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::file(dir, e))?;
        let json = dir.join("results.json");
        std::fs::write(&json, serde_json::to_string_pretty(self)? + "\n").map_err(|e| crate::Error::file(&json, e))?;
        let table = dir.join("results_table.txt");
        std::fs::write(&table, self.render_table()).map_err(|e| crate::Error::file(&table, e))?;
        Ok(())
    }
}
