//! NMI against segmentation quality across GreedyCAS-NN batch sizes.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedAbstract;
use crate::eval::{evaluate_run, pearson, Correlation, EvalOptions, Metric};
use crate::greedy::{assignment_nmi, greedycas_nn, AssignmentRecord, GreedyConfig, SimilarityProvider};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub batch_size: usize,
    /// Corpus-level NMI of the final assignment; `None` when undefined.
    pub nmi: Option<f64>,
    pub pk: f64,
    pub wd: f64,
    pub jaccard: f64,
    pub rouge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub rows: Vec<StudyRow>,
    /// Pearson correlation of NMI with each metric, keyed by metric name.
    /// Absent when the series is too short or constant.
    pub correlations: BTreeMap<String, Option<Correlation>>,
    /// Why a correlation is absent, keyed like `correlations`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub notes: BTreeMap<String, String>,
}

impl Study {
    pub fn r(&self, m: Metric) -> Option<f64> {
        self.correlations.get(m.name()).copied().flatten().map(|c| c.r)
    }
}

pub fn check_range(sizes: &RangeInclusive<usize>, chunk_size: usize) -> Result<()> {
    if sizes.is_empty() || *sizes.start() < 2 {
        return Err(Error::Validation(format!(
            "batch sizes {}..={} must be non-empty and start at 2 or more",
            sizes.start(),
            sizes.end()
        )));
    }
    if *sizes.end() > chunk_size {
        return Err(Error::Validation(format!(
            "largest batch size {} exceeds chunk size {chunk_size}",
            sizes.end()
        )));
    }
    Ok(())
}

/// Runs GreedyCAS-NN once per batch size with everything else from `base`
/// and correlates the resulting NMI with each metric.
pub fn batch_size_study(
    corpus: &[TokenizedAbstract],
    base: &GreedyConfig,
    provider: &SimilarityProvider,
    sizes: RangeInclusive<usize>,
    eval: &EvalOptions,
) -> Result<Study> {
    check_range(&sizes, base.chunk_size)?;
    let mut rows = Vec::new();
    for b in sizes {
        let cfg = GreedyConfig {
            batch_size: b,
            ..base.clone()
        };
        let outcome = greedycas_nn(corpus, &cfg, provider)?;
        let records = AssignmentRecord::from_outcome(corpus, &outcome)?;
        let report = evaluate_run(corpus, &records, eval)?;
        rows.push(StudyRow {
            batch_size: b,
            nmi: assignment_nmi(corpus, &outcome.assignment, &cfg.nmi_options())?,
            pk: report.pk,
            wd: report.window_diff,
            jaccard: report.jaccard,
            rouge: report.rouge_mean,
        });
        log::info!("batch size {b}: pk {:.4}", report.pk);
    }

    let defined: Vec<&StudyRow> = rows.iter().filter(|r| r.nmi.is_some()).collect();
    let x: Vec<f64> = defined.iter().filter_map(|r| r.nmi).collect();
    let mut correlations = BTreeMap::new();
    let mut notes = BTreeMap::new();
    for m in Metric::ALL {
        let y: Vec<f64> = defined
            .iter()
            .map(|r| match m {
                Metric::Pk => r.pk,
                Metric::WindowDiff => r.wd,
                Metric::Jaccard => r.jaccard,
                Metric::Rouge => r.rouge,
            })
            .collect();
        match pearson(&x, &y) {
            Ok(c) => {
                correlations.insert(m.name().to_string(), Some(c));
            }
            Err(Error::DegenerateTest(msg)) => {
                correlations.insert(m.name().to_string(), None);
                notes.insert(m.name().to_string(), msg);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Study {
        rows,
        correlations,
        notes,
    })
}
