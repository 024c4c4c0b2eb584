//! Classification and regression metrics, grouped reports and intensity
//! curves.
//!
//! F1 values are on a percent scale. A class with no true positives, false
//! positives or false negatives gets F1 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::RoleLabel;
use crate::error::{Error, Result};
use crate::lir::{TruncationBucket, MAX_POLISH_STAGES};

const K: usize = RoleLabel::COUNT;

/// Gold roles in rows, predicted roles in columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; K]; K],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }

    /// `100 * 2TP / (2TP + FP + FN)`, or 0 when the denominator is 0.
    pub fn f1(&self, class: usize) -> f64 {
        let tp = self.counts[class][class];
        let fp = self.predicted(class) - tp;
        let fn_ = self.support(class) - tp;
        f1_from_counts(tp, fp, fn_)
    }

    pub fn per_class_f1(&self) -> [f64; K] {
        std::array::from_fn(|c| self.f1(c))
    }

    /// Support-weighted mean of per-class F1.
    pub fn weighted_f1(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            return 0.0;
        }
        (0..K)
            .map(|c| self.support(c) as f64 * self.f1(c))
            .sum::<f64>()
            / n as f64
    }
}

/// Percent F1 from raw counts; `2PR/(P+R)` rewritten without divisions by
/// zero.
pub fn f1_from_counts(tp: u64, fp: u64, fn_: u64) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        100.0 * (2 * tp) as f64 / denom as f64
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Invalid(format!("length mismatch: {a} gold vs {b} predicted")));
    }
    if a == 0 {
        return Err(Error::Invalid("nothing to evaluate".into()));
    }
    Ok(())
}

pub fn confusion(gold: &[usize], pred: &[usize]) -> Result<ConfusionMatrix> {
    if gold.len() != pred.len() {
        return Err(Error::Invalid(format!(
            "length mismatch: {} gold vs {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    let mut m = ConfusionMatrix::default();
    for (&g, &p) in gold.iter().zip(pred) {
        if g >= K || p >= K {
            return Err(Error::Invalid(format!("role code out of range: gold {g}, predicted {p}")));
        }
        m.counts[g][p] += 1;
    }
    Ok(m)
}

/// Per-class and weighted F1 (percent).
pub fn f1_scores(gold: &[usize], pred: &[usize]) -> Result<([f64; K], f64)> {
    check_lengths(gold.len(), pred.len())?;
    let m = confusion(gold, pred)?;
    Ok((m.per_class_f1(), m.weighted_f1()))
}

/// `(mse, mae)`.
pub fn regression_metrics(gold: &[f64], pred: &[f64]) -> Result<(f64, f64)> {
    check_lengths(gold.len(), pred.len())?;
    let n = gold.len() as f64;
    let (mut se, mut ae) = (0.0, 0.0);
    for (g, p) in gold.iter().zip(pred) {
        let d = g - p;
        se += d * d;
        ae += d.abs();
    }
    Ok((se / n, ae / n))
}

/// One evaluated document: gold labels, predictions and its metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvaluatedDoc {
    pub doc_id: String,
    pub meta: BTreeMap<String, String>,
    pub gold_role: Option<RoleLabel>,
    pub pred_role: Option<RoleLabel>,
    pub gold_lir: Option<f64>,
    pub pred_lir: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityPoint {
    pub bucket: String,
    pub count: usize,
    pub mean_gold: f64,
    pub mean_pred: f64,
}

/// Unweighted mean of the group metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAverage {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_class_f1: Option<[f64; K]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae: Option<f64>,
}

/// Metrics over a set of documents. Classification fields are present when
/// role predictions exist, regression fields when ratio predictions exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_class_f1: Option<[f64; K]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_key: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<BTreeMap<String, EvalReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_average: Option<GroupAverage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity: Option<Vec<IntensityPoint>>,
}

impl EvalReport {
    /// Metrics over `docs`; documents missing a gold label or prediction are
    /// left out of the corresponding metric.
    pub fn from_docs(docs: &[&EvaluatedDoc]) -> Result<Self> {
        let (gold_r, pred_r): (Vec<usize>, Vec<usize>) = docs
            .iter()
            .filter_map(|d| Some((d.gold_role?.code(), d.pred_role?.code())))
            .unzip();
        let (gold_l, pred_l): (Vec<f64>, Vec<f64>) = docs
            .iter()
            .filter_map(|d| Some((d.gold_lir?, d.pred_lir?)))
            .unzip();
        let cm = if gold_r.is_empty() {
            None
        } else {
            Some(confusion(&gold_r, &pred_r)?)
        };
        let reg = if gold_l.is_empty() {
            None
        } else {
            Some(regression_metrics(&gold_l, &pred_l)?)
        };
        Ok(EvalReport {
            count: docs.len(),
            per_class_f1: cm.map(|m| m.per_class_f1()),
            weighted_f1: cm.map(|m| m.weighted_f1()),
            confusion: cm,
            mse: reg.map(|r| r.0),
            mae: reg.map(|r| r.1),
            group_key: None,
            groups: None,
            group_average: None,
            intensity: None,
        })
    }

    /// Renders the headline numbers as a plain-text table.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let header = |s: &mut String| {
            let _ = writeln!(
                s,
                "{:<20} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
                "group", "n", "Human", "Creator", "Polish", "Extend", "W-F1", "MSE", "MAE"
            );
        };
        let row = |s: &mut String, name: &str, n: Option<usize>, f1: Option<[f64; K]>, w: Option<f64>, mse: Option<f64>, mae: Option<f64>| {
            let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
            let err = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
            let f = f1.map_or([None; K], |a| a.map(Some));
            let _ = writeln!(
                s,
                "{:<20} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
                name,
                n.map_or("-".to_string(), |n| n.to_string()),
                pct(f[0]),
                pct(f[1]),
                pct(f[2]),
                pct(f[3]),
                pct(w),
                err(mse),
                err(mae)
            );
        };
        header(&mut s);
        row(&mut s, "overall", Some(self.count), self.per_class_f1, self.weighted_f1, self.mse, self.mae);
        if let Some(groups) = &self.groups {
            for (name, g) in groups {
                row(&mut s, name, Some(g.count), g.per_class_f1, g.weighted_f1, g.mse, g.mae);
            }
        }
        if let Some(a) = &self.group_average {
            row(&mut s, "group average", None, a.per_class_f1, a.weighted_f1, a.mse, a.mae);
        }
        if let Some(points) = &self.intensity {
            let _ = writeln!(s, "\n{:<12} {:>6} {:>10} {:>10}", "intensity", "n", "gold LIR", "pred LIR");
            for p in points {
                let _ = writeln!(s, "{:<12} {:>6} {:>10.4} {:>10.4}", p.bucket, p.count, p.mean_gold, p.mean_pred);
            }
        }
        s
    }
}

pub const UNKNOWN_GROUP: &str = "unknown";

/// Reports per value of `meta[group_key]` (documents without the key go to
/// [`UNKNOWN_GROUP`]) and the unweighted average across groups.
pub fn grouped_report(
    docs: &[EvaluatedDoc],
    group_key: &str,
) -> Result<(BTreeMap<String, EvalReport>, GroupAverage)> {
    let mut buckets: BTreeMap<String, Vec<&EvaluatedDoc>> = BTreeMap::new();
    for d in docs {
        let key = d.meta.get(group_key).map_or(UNKNOWN_GROUP, String::as_str);
        buckets.entry(key.to_string()).or_default().push(d);
    }
    let groups = buckets
        .into_iter()
        .map(|(k, v)| Ok((k, EvalReport::from_docs(&v)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let average = macro_average(groups.values());
    Ok((groups, average))
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn macro_average<'a>(reports: impl Iterator<Item = &'a EvalReport> + Clone) -> GroupAverage {
    let per_class: Vec<[f64; K]> = reports.clone().filter_map(|r| r.per_class_f1).collect();
    GroupAverage {
        per_class_f1: (!per_class.is_empty()).then(|| {
            std::array::from_fn(|c| per_class.iter().map(|a| a[c]).sum::<f64>() / per_class.len() as f64)
        }),
        weighted_f1: mean_of(reports.clone().map(|r| r.weighted_f1)),
        mse: mean_of(reports.clone().map(|r| r.mse)),
        mae: mean_of(reports.map(|r| r.mae)),
    }
}

/// A parsed `meta.intensity` tag: `ext:Low|Medium|High` or `pol:<m>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IntensityTag {
    Extension(TruncationBucket),
    Polish(usize),
}

impl IntensityTag {
    pub fn parse(tag: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("unrecognized intensity tag {tag:?}"));
        match tag.split_once(':') {
            Some(("ext", b)) => Ok(IntensityTag::Extension(b.parse().map_err(|_| bad())?)),
            Some(("pol", m)) => {
                let m: usize = m.parse().map_err(|_| bad())?;
                if (1..=MAX_POLISH_STAGES).contains(&m) {
                    Ok(IntensityTag::Polish(m))
                } else {
                    Err(bad())
                }
            }
            _ => Err(bad()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            IntensityTag::Extension(b) => format!("ext:{b}"),
            IntensityTag::Polish(m) => format!("pol:{m}"),
        }
    }
}

pub const INTENSITY_KEY: &str = "intensity";

/// Mean gold and predicted ratio per intensity bucket: extension buckets
/// Low, Medium, High first, then polish stages in order.
pub fn intensity_curve(docs: &[EvaluatedDoc]) -> Result<Vec<IntensityPoint>> {
    let mut buckets: BTreeMap<IntensityTag, (usize, f64, f64)> = BTreeMap::new();
    for d in docs {
        let tag = d
            .meta
            .get(INTENSITY_KEY)
            .ok_or_else(|| Error::Invalid(format!("document {:?} has no intensity tag", d.doc_id)))?;
        let tag = IntensityTag::parse(tag)?;
        let gold = d
            .gold_lir
            .ok_or_else(|| Error::Invalid(format!("document {:?} has no gold ratio", d.doc_id)))?;
        let pred = d
            .pred_lir
            .ok_or_else(|| Error::Invalid(format!("document {:?} has no predicted ratio", d.doc_id)))?;
        let e = buckets.entry(tag).or_insert((0, 0.0, 0.0));
        e.0 += 1;
        e.1 += gold;
        e.2 += pred;
    }
    Ok(buckets
        .into_iter()
        .map(|(tag, (n, g, p))| IntensityPoint {
            bucket: tag.label(),
            count: n,
            mean_gold: g / n as f64,
            mean_pred: p / n as f64,
        })
        .collect())
}
