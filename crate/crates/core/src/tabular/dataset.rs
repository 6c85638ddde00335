use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::{GroupKey, StratifiedSample, Stratum};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub domain: u32,
}

/// Ordered attribute list; the order fixes the marginal index encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    attributes: Vec<Attribute>,
}

impl Schema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        for (i, a) in attributes.iter().enumerate() {
            if a.domain == 0 {
                return Err(schema_err(
                    i + 1,
                    format!("attribute `{}` has empty domain", a.name),
                ));
            }
            if attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(schema_err(
                    i + 1,
                    format!("duplicate attribute `{}`", a.name),
                ));
            }
        }
        Ok(Self { attributes })
    }

    /// Parses `name,domain_size` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut attributes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, size) = line
                .split_once(',')
                .ok_or_else(|| schema_err(lineno + 1, "expected `name,domain_size`".into()))?;
            let domain = size.trim().parse::<u32>().map_err(|_| {
                schema_err(lineno + 1, format!("bad domain size `{}`", size.trim()))
            })?;
            attributes.push(Attribute {
                name: name.trim().to_string(),
                domain,
            });
        }
        Self::new(attributes)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::InvalidParameter {
                name: "attribute",
                reason: format!("unknown attribute `{name}`"),
            })
    }

    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    pub fn domain(&self, index: usize) -> u32 {
        self.attributes[index].domain
    }

    pub fn name(&self, index: usize) -> &str {
        &self.attributes[index].name
    }
}

fn schema_err(line: usize, reason: String) -> Error {
    Error::Data {
        location: format!("schema line {line}"),
        reason,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    schema: Schema,
    records: Vec<Vec<u32>>,
}

impl TabularDataset {
    pub fn new(schema: Schema, records: Vec<Vec<u32>>) -> Result<Self> {
        for (r, rec) in records.iter().enumerate() {
            if rec.len() != schema.len() {
                return Err(Error::Data {
                    location: format!("record {r}"),
                    reason: format!("{} values for {} attributes", rec.len(), schema.len()),
                });
            }
            for (j, &v) in rec.iter().enumerate() {
                if v >= schema.domain(j) {
                    return Err(Error::Data {
                        location: format!("record {r}, column `{}`", schema.name(j)),
                        reason: format!("value {v} outside domain 0..{}", schema.domain(j)),
                    });
                }
            }
        }
        Ok(Self { schema, records })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn records(&self) -> &[Vec<u32>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn column(&self, attr: usize) -> impl Iterator<Item = u32> + '_ {
        self.records.iter().map(move |r| r[attr])
    }

    /// Rows at the given indices, in order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            records: rows.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(self.schema.attributes.iter().map(|a| a.name.as_str()))
            .map_err(io)?;
        for rec in &self.records {
            w.write_record(rec.iter().map(|v| v.to_string()))
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads an integer-coded CSV whose header names every schema attribute.
/// Columns not in the schema are ignored.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<TabularDataset> {
    read_csv(File::open(path)?, schema)
}

pub fn read_csv<R: Read>(input: R, schema: &Schema) -> Result<TabularDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| Error::Data {
        location: "header".into(),
        reason: e.to_string(),
    })?;
    let columns = schema
        .attributes()
        .iter()
        .map(|a| {
            header
                .iter()
                .position(|h| h == a.name)
                .ok_or_else(|| Error::Data {
                    location: "header".into(),
                    reason: format!("missing column `{}`", a.name),
                })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        // Row 1 is the header.
        let row_no = i + 2;
        let row = row.map_err(|e| Error::Data {
            location: format!("row {row_no}"),
            reason: e.to_string(),
        })?;
        let mut rec = Vec::with_capacity(columns.len());
        for (j, &c) in columns.iter().enumerate() {
            let attr = &schema.attributes()[j];
            let cell = row.get(c).ok_or_else(|| Error::Data {
                location: format!("row {row_no}"),
                reason: format!("missing value for `{}`", attr.name),
            })?;
            let v = cell.parse::<u32>().map_err(|_| Error::Data {
                location: format!("row {row_no}, column `{}`", attr.name),
                reason: format!("cannot parse `{cell}` as a nonnegative integer code"),
            })?;
            if v >= attr.domain {
                return Err(Error::Data {
                    location: format!("row {row_no}, column `{}`", attr.name),
                    reason: format!("value {v} outside domain 0..{}", attr.domain),
                });
            }
            rec.push(v);
        }
        records.push(rec);
    }
    Ok(TabularDataset {
        schema: schema.clone(),
        records,
    })
}

/// Disjoint groups of row indices keyed by the grouping attributes' values.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub attributes: Vec<usize>,
    pub groups: Vec<(GroupKey, Vec<usize>)>,
}

impl Partition {
    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|(_, rows)| rows.len()).collect()
    }

    pub fn keys(&self) -> Vec<GroupKey> {
        self.groups.iter().map(|(k, _)| k.clone()).collect()
    }

    /// Values of one attribute per group, as a stratified sample.
    pub fn sample(&self, data: &TabularDataset, target: usize) -> Result<StratifiedSample> {
        self.sample_rows(data, target, |_| true)
    }

    /// Like [`Partition::sample`], restricted to rows accepted by `keep`; groups left empty are dropped.
    pub fn sample_rows(
        &self,
        data: &TabularDataset,
        target: usize,
        keep: impl Fn(usize) -> bool,
    ) -> Result<StratifiedSample> {
        let strata = self
            .groups
            .iter()
            .filter_map(|(key, rows)| {
                let values: Vec<f64> = rows
                    .iter()
                    .filter(|&&r| keep(r))
                    .map(|&r| data.records[r][target] as f64)
                    .collect();
                (!values.is_empty()).then(|| Stratum {
                    key: key.clone(),
                    values,
                })
            })
            .collect();
        StratifiedSample::new(strata)
    }
}

/// Groups rows by the given attributes; empty combinations are omitted and
/// keys are sorted. No attributes yields one group holding every row.
pub fn partition(data: &TabularDataset, group_attrs: &[usize]) -> Result<Partition> {
    if let Some(&bad) = group_attrs.iter().find(|&&a| a >= data.schema.len()) {
        return Err(Error::Data {
            location: "partition".into(),
            reason: format!("attribute index {bad} out of range"),
        });
    }
    let mut map: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for (i, rec) in data.records.iter().enumerate() {
        let key = GroupKey(group_attrs.iter().map(|&a| rec[a]).collect());
        map.entry(key).or_default().push(i);
    }
    Ok(Partition {
        attributes: group_attrs.to_vec(),
        groups: map.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Schema {
        Schema::parse("SEX,2\nAGE,9\n# comment\n\nX,3\n").unwrap()
    }

    #[test]
    fn schema_parsing() {
        let s = schema();
        assert_eq!(s.len(), 3);
        assert_eq!(s.index_of("AGE").unwrap(), 1);
        assert_eq!(s.domain(2), 3);
        assert!(Schema::parse("A,2\nA,3").is_err());
        assert!(Schema::parse("A,0").is_err());
        assert!(Schema::parse("A").is_err());
    }

    #[test]
    fn csv_reading() {
        let s = schema();
        let d = read_csv(
            "SEX,X,AGE,EXTRA\n0,1,3,zz\n1,2,8,q\n0,0,0,\n".as_bytes(),
            &s,
        )
        .unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.records()[1], vec![1, 8, 2]);

        let empty = read_csv("SEX,AGE,X\n".as_bytes(), &s).unwrap();
        assert!(empty.is_empty());

        let err = read_csv("SEX,AGE,X\n0,1,1\n1,9,0\n".as_bytes(), &s).unwrap_err();
        match err {
            Error::Data { location, .. } => {
                assert!(location.contains("row 3") && location.contains("AGE"))
            }
            e => panic!("{e:?}"),
        }
        assert!(read_csv("SEX,X\n0,1\n".as_bytes(), &s).is_err());
        assert!(read_csv("SEX,AGE,X\n0,a,1\n".as_bytes(), &s).is_err());
    }

    #[test]
    fn partition_properties() {
        let s = schema();
        let recs = vec![
            vec![0, 1, 0],
            vec![1, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 0],
            vec![0, 1, 1],
        ];
        let d = TabularDataset::new(s, recs).unwrap();
        let p = partition(&d, &[0]).unwrap();
        assert_eq!(p.k(), 2);
        assert_eq!(p.sizes().iter().sum::<usize>(), d.len());
        let p2 = partition(&d, &[0, 1]).unwrap();
        let mut seen: Vec<usize> = p2.groups.iter().flat_map(|(_, r)| r.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..d.len()).collect::<Vec<_>>());
        assert_eq!(p2.k(), 4);
        let all = partition(&d, &[]).unwrap();
        assert_eq!(all.k(), 1);
        assert_eq!(all.groups[0].0.to_string(), "all");
        let sample = p.sample(&d, 1).unwrap();
        assert_eq!(sample.strata()[0].values, vec![1.0, 2.0, 1.0]);
    }
}
