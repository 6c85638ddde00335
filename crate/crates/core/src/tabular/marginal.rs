use crate::error::{invalid, Error, Result};

use super::dataset::{Schema, TabularDataset};

/// Counts over the value combinations of an attribute subset.
///
/// Attributes are kept in schema order and cells are indexed mixed-radix,
/// row-major: the first attribute is the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub attributes: Vec<usize>,
    pub counts: Vec<f64>,
}

impl Marginal {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// `S=<names>;counts=<list>`.
    pub fn dump(&self, schema: &Schema) -> String {
        let names: Vec<&str> = self.attributes.iter().map(|&a| schema.name(a)).collect();
        let counts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        format!("S={};counts={}", names.join(","), counts.join(","))
    }
}

fn normalize_subset(schema: &Schema, attrs: &[usize]) -> Result<Vec<usize>> {
    if attrs.is_empty() {
        return Err(invalid("S", "attribute subset must be nonempty"));
    }
    let mut s = attrs.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != attrs.len() {
        return Err(invalid("S", "repeated attribute"));
    }
    if let Some(&bad) = s.iter().find(|&&a| a >= schema.len()) {
        return Err(invalid("S", format!("attribute index {bad} out of range")));
    }
    Ok(s)
}

pub fn cell_index(schema: &Schema, attrs: &[usize], record: &[u32]) -> usize {
    attrs.iter().fold(0, |acc, &a| {
        acc * schema.domain(a) as usize + record[a] as usize
    })
}

pub fn marginal(data: &TabularDataset, attrs: &[usize]) -> Result<Marginal> {
    let schema = data.schema();
    let attrs = normalize_subset(schema, attrs)?;
    let cells: usize = attrs.iter().map(|&a| schema.domain(a) as usize).product();
    let mut counts = vec![0.0; cells];
    for rec in data.records() {
        counts[cell_index(schema, &attrs, rec)] += 1.0;
    }
    Ok(Marginal {
        attributes: attrs,
        counts,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    queries: Vec<(Vec<usize>, f64)>,
}

impl Workload {
    pub fn new(queries: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if queries.is_empty() {
            return Err(invalid("workload", "need at least one query"));
        }
        if queries
            .iter()
            .any(|(s, w)| s.is_empty() || !(*w >= 0.0) || !w.is_finite())
        {
            return Err(invalid(
                "workload",
                "queries need nonempty subsets and weights >= 0",
            ));
        }
        Ok(Self { queries })
    }

    pub fn queries(&self) -> &[(Vec<usize>, f64)] {
        &self.queries
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }
}

/// Every attribute subset of size `way`, in lexicographic order, each with `weight`.
pub fn all_k_way_workload(schema: &Schema, way: usize, weight: f64) -> Result<Workload> {
    let m = schema.len();
    if way == 0 || way > m {
        return Err(invalid("way", format!("need 1 <= way <= {m}, got {way}")));
    }
    let mut queries = Vec::new();
    let mut idx: Vec<usize> = (0..way).collect();
    loop {
        queries.push((idx.clone(), weight));
        // Advance to the next combination.
        let Some(i) = (0..way).rev().find(|&i| idx[i] != i + m - way) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..way {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Workload::new(queries)
}

/// (1/(q·|D|))·Σ cᵢ·‖M_Sᵢ(D) − M_Sᵢ(D̂)‖₁, with D̂ rescaled to |D| records.
pub fn workload_error(
    real: &TabularDataset,
    synth: &TabularDataset,
    workload: &Workload,
) -> Result<f64> {
    if real.schema() != synth.schema() {
        return Err(Error::Shape("datasets have different schemas".into()));
    }
    if real.is_empty() || synth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = real.len() as f64;
    let scale = n / synth.len() as f64;
    let mut total = 0.0;
    for (attrs, c) in workload.queries() {
        let a = marginal(real, attrs)?;
        let b = marginal(synth, attrs)?;
        let l1: f64 = a
            .counts
            .iter()
            .zip(&b.counts)
            .map(|(x, y)| (x - scale * y).abs())
            .sum();
        total += c * l1;
    }
    Ok(total / (workload.len() as f64 * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_schema(m: usize) -> Schema {
        let text: String = (0..m).map(|i| format!("A{i},2\n")).collect();
        Schema::parse(&text).unwrap()
    }

    #[test]
    fn one_way_counts() {
        let d = TabularDataset::new(binary_schema(1), vec![vec![0], vec![0], vec![1], vec![0]])
            .unwrap();
        assert_eq!(marginal(&d, &[0]).unwrap().counts, vec![3.0, 1.0]);
    }

    #[test]
    fn two_way_encoding_and_dump() {
        let d = TabularDataset::new(binary_schema(2), vec![vec![0, 0], vec![0, 1], vec![0, 1]])
            .unwrap();
        let m = marginal(&d, &[1, 0]).unwrap();
        assert_eq!(m.counts, vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(m.dump(d.schema()), "S=A0,A1;counts=1,2,0,0");
        assert!(marginal(&d, &[]).is_err());
        assert!(marginal(&d, &[0, 0]).is_err());
    }

    #[test]
    fn two_way_sums_to_one_way() {
        let schema = Schema::parse("A,3\nB,4\n").unwrap();
        let recs: Vec<Vec<u32>> = (0..50u32).map(|i| vec![i % 3, (i * 7) % 4]).collect();
        let d = TabularDataset::new(schema, recs).unwrap();
        let ab = marginal(&d, &[0, 1]).unwrap();
        let a = marginal(&d, &[0]).unwrap();
        let b = marginal(&d, &[1]).unwrap();
        for i in 0..3 {
            assert_eq!(
                (0..4).map(|j| ab.counts[i * 4 + j]).sum::<f64>(),
                a.counts[i]
            );
        }
        for j in 0..4 {
            assert_eq!(
                (0..3).map(|i| ab.counts[i * 4 + j]).sum::<f64>(),
                b.counts[j]
            );
        }
        assert_eq!(ab.total(), 50.0);
    }

    #[test]
    fn workload_sizes() {
        let s = binary_schema(10);
        let w = all_k_way_workload(&s, 3, 1.0).unwrap();
        assert_eq!(w.len(), 120);
        assert_eq!(w.queries()[0].0, vec![0, 1, 2]);
        assert_eq!(w.queries()[119].0, vec![7, 8, 9]);
        assert_eq!(all_k_way_workload(&s, 10, 1.0).unwrap().len(), 1);
        assert_eq!(all_k_way_workload(&s, 1, 1.0).unwrap().len(), 10);
        assert!(all_k_way_workload(&s, 11, 1.0).is_err());
    }

    #[test]
    fn workload_error_examples() {
        let s = binary_schema(2);
        let recs: Vec<Vec<u32>> = (0..10u32).map(|i| vec![i % 2, 0]).collect();
        let d = TabularDataset::new(s.clone(), recs.clone()).unwrap();
        let w = Workload::new(vec![(vec![0], 1.0)]).unwrap();
        assert_eq!(workload_error(&d, &d, &w).unwrap(), 0.0);

        let mut changed = recs.clone();
        changed[0][0] = 1 - changed[0][0];
        let d2 = TabularDataset::new(s.clone(), changed).unwrap();
        assert!((workload_error(&d, &d2, &w).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(
            workload_error(&d, &d2, &w).unwrap(),
            workload_error(&d2, &d, &w).unwrap()
        );

        // Doubling D̂ leaves the rescaled error unchanged.
        let doubled: Vec<Vec<u32>> = recs.iter().chain(recs.iter()).cloned().collect();
        let dd = TabularDataset::new(s, doubled).unwrap();
        assert_eq!(workload_error(&d, &dd, &w).unwrap(), 0.0);
    }
}
