use std::collections::BTreeMap;

/// Maps raw label tokens to contiguous ids `0..K`.
///
/// Tokens that all parse as numbers are ordered numerically (so `-1 < 1 < 2`
/// and `"1.0"` equals `"1"`), otherwise lexicographically.
pub(crate) fn remap_labels(tokens: &[String]) -> (Vec<usize>, Vec<String>) {
    let numeric: Option<Vec<f64>> = tokens
        .iter()
        .map(|t| t.trim().parse::<f64>().ok())
        .collect();
    match numeric {
        Some(values) => {
            let mut distinct: Vec<f64> = values.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            let ids = values
                .iter()
                .map(|v| {
                    distinct
                        .binary_search_by(|d| d.total_cmp(v))
                        .expect("present")
                })
                .collect();
            let names = distinct.iter().map(|v| format_label(*v)).collect();
            (ids, names)
        }
        None => {
            let mut map: BTreeMap<&str, usize> = BTreeMap::new();
            for t in tokens {
                map.insert(t.trim(), 0);
            }
            for (i, v) in map.values_mut().enumerate() {
                *v = i;
            }
            let ids = tokens.iter().map(|t| map[t.trim()]).collect();
            let names = map.keys().map(|k| (*k).to_string()).collect();
            (ids, names)
        }
    }
}

fn format_label(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        v.to_string()
    }
}
