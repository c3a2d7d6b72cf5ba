use super::report::{Estimate, MetricsTable};

const NA: &str = "NA";

fn pct(e: Option<Estimate>, decimals: usize) -> String {
    e.map(|e| format!("{:.*}", decimals, e.value * 100.0)).unwrap_or_else(|| NA.into())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn subgroup_cells(t: &MetricsTable) -> (Vec<String>, Vec<Vec<String>>) {
    let header = [t.axis.header(), "Accuracy (%)", "Precision (%)", "Recall (%)", "Sensitivity (%)", "Specificity (%)"]
        .map(String::from)
        .to_vec();
    let rows = t
        .rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                pct(r.accuracy, 1),
                pct(r.precision, 1),
                pct(r.recall, 1),
                pct(r.sensitivity, 1),
                pct(r.specificity, 1),
            ]
        })
        .collect();
    (header, rows)
}

fn pathology_cells(t: &MetricsTable) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["Pathologies", "Precision (%)", "Recall (%)", "AUC"].map(String::from).to_vec();
    let rows = t
        .rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                pct(r.precision, 2),
                pct(r.recall, 2),
                r.roc_auc.map(|a| format!("{a:.3}")).unwrap_or_else(|| NA.into()),
            ]
        })
        .collect();
    (header, rows)
}

fn to_csv((header, rows): (Vec<String>, Vec<Vec<String>>)) -> String {
    let mut out = String::new();
    for line in std::iter::once(&header).chain(rows.iter()) {
        out.push_str(&line.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Left-aligned first column, right-aligned numbers, two-space gutters.
fn to_text((header, rows): (Vec<String>, Vec<Vec<String>>)) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for line in std::iter::once(&header).chain(rows.iter()) {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let pad = " ".repeat(widths[i] - c.chars().count());
                if i == 0 {
                    format!("{c}{pad}")
                } else {
                    format!("{pad}{c}")
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Columns: group, Accuracy, Precision, Recall, Sensitivity, Specificity (%),
/// one decimal.
pub fn subgroup_csv(t: &MetricsTable) -> String {
    to_csv(subgroup_cells(t))
}

pub fn subgroup_text(t: &MetricsTable) -> String {
    to_text(subgroup_cells(t))
}

/// Columns: Pathologies, Precision (%), Recall (%) with two decimals and
/// ROC-AUC with three.
pub fn pathology_csv(t: &MetricsTable) -> String {
    to_csv(pathology_cells(t))
}

pub fn pathology_text(t: &MetricsTable) -> String {
    to_text(pathology_cells(t))
}
