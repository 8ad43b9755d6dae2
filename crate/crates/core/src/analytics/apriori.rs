use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use super::{AnalyticsError, TagTransaction};
use crate::vocabulary::Vocabularies;

/// Share of transactions containing both tags.
pub fn pair_support(transactions: &[TagTransaction], tag_a: &str, tag_b: &str) -> Result<f64, AnalyticsError> {
    if transactions.is_empty() {
        return Err(AnalyticsError::EmptyTransactionSet);
    }
    let both = transactions.iter().filter(|t| t.tags.contains(tag_a) && t.tags.contains(tag_b)).count();
    Ok(both as f64 / transactions.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequentPair {
    /// Lexicographically smaller tag.
    pub a: String,
    pub b: String,
    pub count: usize,
    pub support: f64,
}

fn meets(count: usize, n: usize, min_support: f64) -> bool {
    count as f64 / n as f64 >= min_support
}

/// All tag pairs with support at least `min_support`, by support descending
/// then pair. Only tags that are frequent on their own are paired.
pub fn frequent_pairs(transactions: &[TagTransaction], min_support: f64) -> Result<Vec<FrequentPair>, AnalyticsError> {
    if !(min_support > 0.0 && min_support <= 1.0) {
        return Err(AnalyticsError::InvalidSupport(min_support));
    }
    if transactions.is_empty() {
        return Err(AnalyticsError::EmptyTransactionSet);
    }
    let n = transactions.len();

    let mut singles: BTreeMap<&str, usize> = BTreeMap::new();
    for t in transactions {
        for tag in &t.tags {
            *singles.entry(tag).or_default() += 1;
        }
    }
    let frequent: BTreeSet<&str> =
        singles.into_iter().filter(|&(_, c)| meets(c, n, min_support)).map(|(t, _)| t).collect();

    let mut pairs: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for t in transactions {
        let kept: Vec<&str> = t.tags.iter().map(String::as_str).filter(|tag| frequent.contains(tag)).collect();
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                *pairs.entry((a, b)).or_default() += 1;
            }
        }
    }
    let mut out: Vec<FrequentPair> = pairs
        .into_iter()
        .filter(|&(_, c)| meets(c, n, min_support))
        .map(|((a, b), count)| FrequentPair {
            a: a.to_string(),
            b: b.to_string(),
            count,
            support: count as f64 / n as f64,
        })
        .collect();
    out.sort_by(|x, y| y.count.cmp(&x.count).then_with(|| (&x.a, &x.b).cmp(&(&y.a, &y.b))));
    Ok(out)
}

/// Two-column report, `support,pair`, with tag labels joined by `-`.
pub fn write_pairs_report<W: Write>(
    pairs: &[FrequentPair],
    vocab: &Vocabularies,
    mut out: W,
) -> Result<(), AnalyticsError> {
    let label = |id: &str| vocab.term(id).map_or_else(|| id.to_string(), |t| t.label.clone());
    let fail = |e: std::io::Error| AnalyticsError::WriteFailure(e.to_string());
    writeln!(out, "support,pair").map_err(fail)?;
    for p in pairs {
        writeln!(out, "{:.3},{}-{}", p.support, label(&p.a), label(&p.b)).map_err(fail)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocabulary::builtin_vocabularies;

    fn tx(sets: &[&[&str]]) -> Vec<TagTransaction> {
        sets.iter().enumerate().map(|(i, s)| TagTransaction::new(format!("t{i}"), s.iter().copied())).collect()
    }

    #[test]
    fn support_basics() {
        let t = tx(&[&["joy", "drums"], &["joy", "drums", "rock"], &["joy"], &[]]);
        assert_eq!(pair_support(&t, "joy", "drums").unwrap(), 0.5);
        assert_eq!(pair_support(&t, "drums", "joy").unwrap(), 0.5);
        assert_eq!(pair_support(&t, "joy", "sadness").unwrap(), 0.0);
        assert_eq!(pair_support(&[], "a", "b"), Err(AnalyticsError::EmptyTransactionSet));
    }

    #[test]
    fn mining_orders_and_thresholds() {
        let t = tx(&[&["a", "b", "c"], &["a", "b"], &["a", "c"], &["b", "c"]]);
        let pairs = frequent_pairs(&t, 0.5).unwrap();
        let names: Vec<_> = pairs.iter().map(|p| (p.a.as_str(), p.b.as_str(), p.count)).collect();
        assert_eq!(names, [("a", "b", 2), ("a", "c", 2), ("b", "c", 2)]);
        assert!(frequent_pairs(&t, 1.0).unwrap().is_empty());
        assert!(frequent_pairs(&t, 0.0).is_err());
        assert!(frequent_pairs(&t, f64::NAN).is_err());
        assert!(frequent_pairs(&[], 0.5).is_err());
    }

    #[test]
    fn report_uses_labels() {
        let pairs = vec![FrequentPair { a: "drums".into(), b: "joy".into(), count: 2, support: 0.2012 }];
        let mut out = Vec::new();
        write_pairs_report(&pairs, &builtin_vocabularies(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "support,pair\n0.201,Drums-Joy\n");
    }
}
