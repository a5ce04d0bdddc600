//! CSV input and output for sequence data.
//!
//! Two on-disk layouts are supported and auto-detected from the header:
//!
//! * long — `seq_id,attribute,t,value`, one row per observation
//! * wide — `seq_id,t,<attr>,<attr>,...`, one row per time step
//!
//! Times must form a contiguous `1..n` block per sequence; every error
//! names the offending CSV row. Labels live in a separate two-column file
//! (`seq_id,label` with `pos`/`neg` values).

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{AlphabetSpec, AttributeSet, Dataset, Label, LabeledExample, Mvs};
use crate::sax::RawSeries;

/// Shape of a sequence CSV, detected from its header row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFormat {
    Long,
    Wide,
}

fn detect_format(headers: &csv::StringRecord) -> Result<SequenceFormat> {
    let h: Vec<&str> = headers.iter().collect();
    if h == ["seq_id", "attribute", "t", "value"] {
        Ok(SequenceFormat::Long)
    } else if h.len() >= 3 && h[0] == "seq_id" && h[1] == "t" {
        Ok(SequenceFormat::Wide)
    } else {
        Err(Error::Validation(format!(
            "unrecognized header `{}`: expected `seq_id,attribute,t,value` (long) \
             or `seq_id,t,<attribute>,...` (wide)",
            h.join(",")
        )))
    }
}

fn parse_time(field: &str, row: usize) -> Result<u64> {
    match field.parse::<u64>() {
        Ok(t) if t >= 1 => Ok(t),
        _ => Err(Error::Validation(format!(
            "row {row}: t must be a positive integer, got {field:?}"
        ))),
    }
}

/// Cell table shared by both layouts: per sequence, per attribute, a map
/// from time to value.
struct Cells<T> {
    attrs: Vec<String>,
    seqs: Vec<(String, Vec<BTreeMap<u64, T>>)>,
}

fn read_long_cells<R: io::Read, T>(
    mut rdr: csv::Reader<R>,
    mut parse: impl FnMut(&str, usize) -> Result<T>,
) -> Result<Cells<T>> {
    let mut attrs: Vec<String> = Vec::new();
    let mut attr_ix: BTreeMap<String, usize> = BTreeMap::new();
    let mut seq_ix: BTreeMap<String, usize> = BTreeMap::new();
    let mut seqs: Vec<(String, Vec<BTreeMap<u64, T>>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2; // header is row 1
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Validation(format!(
                "row {row}: expected 4 fields, got {}",
                rec.len()
            )));
        }
        let sid = rec[0].to_string();
        if sid.is_empty() {
            return Err(Error::Validation(format!("row {row}: empty seq_id")));
        }
        let attr = rec[1].to_string();
        if attr.is_empty() {
            return Err(Error::Validation(format!("row {row}: empty attribute")));
        }
        let t = parse_time(&rec[2], row)?;
        let v = parse(&rec[3], row)?;
        let ai = *attr_ix.entry(attr.clone()).or_insert_with(|| {
            attrs.push(attr);
            attrs.len() - 1
        });
        let si = *seq_ix.entry(sid.clone()).or_insert_with(|| {
            seqs.push((sid, Vec::new()));
            seqs.len() - 1
        });
        let maps = &mut seqs[si].1;
        while maps.len() <= ai {
            maps.push(BTreeMap::new());
        }
        if maps[ai].insert(t, v).is_some() {
            return Err(Error::Validation(format!(
                "row {row}: duplicate value for sequence `{}`, attribute `{}`, t={t}",
                seqs[si].0, attrs[ai]
            )));
        }
    }
    for (_, maps) in &mut seqs {
        while maps.len() < attrs.len() {
            maps.push(BTreeMap::new());
        }
    }
    Ok(Cells { attrs, seqs })
}

fn read_wide_cells<R: io::Read, T>(
    mut rdr: csv::Reader<R>,
    mut parse: impl FnMut(&str, usize) -> Result<T>,
) -> Result<Cells<T>> {
    let headers = rdr.headers()?.clone();
    let attrs: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut seen = BTreeSet::new();
    for a in &attrs {
        if a.is_empty() || !seen.insert(a) {
            return Err(Error::Validation(format!(
                "header: attribute columns must be nonempty and distinct, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut seq_ix: BTreeMap<String, usize> = BTreeMap::new();
    let mut seqs: Vec<(String, Vec<BTreeMap<u64, T>>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        if rec.len() != 2 + attrs.len() {
            return Err(Error::Validation(format!(
                "row {row}: expected {} fields, got {}",
                2 + attrs.len(),
                rec.len()
            )));
        }
        let sid = rec[0].to_string();
        if sid.is_empty() {
            return Err(Error::Validation(format!("row {row}: empty seq_id")));
        }
        let t = parse_time(&rec[1], row)?;
        let si = *seq_ix.entry(sid.clone()).or_insert_with(|| {
            seqs.push((sid, (0..attrs.len()).map(|_| BTreeMap::new()).collect()));
            seqs.len() - 1
        });
        if seqs[si].1[0].contains_key(&t) {
            return Err(Error::Validation(format!(
                "row {row}: duplicate row for sequence `{}`, t={t}",
                seqs[si].0
            )));
        }
        for (a, field) in rec.iter().skip(2).enumerate() {
            let v = parse(field, row)?;
            seqs[si].1[a].insert(t, v);
        }
    }
    Ok(Cells { attrs, seqs })
}

/// Turn the cell table into attribute-major rows, enforcing that every
/// sequence covers times `1..n` for every attribute with no gaps.
fn cells_to_rows<T>(cells: Cells<T>) -> Result<Vec<(String, Vec<Vec<T>>)>> {
    if cells.seqs.is_empty() {
        return Err(Error::Validation("no data rows".into()));
    }
    let mut out = Vec::with_capacity(cells.seqs.len());
    for (id, maps) in cells.seqs {
        let mut len = None;
        let mut rows = Vec::with_capacity(maps.len());
        for (a, map) in maps.into_iter().enumerate() {
            let attr = &cells.attrs[a];
            if map.is_empty() {
                return Err(Error::Validation(format!(
                    "sequence `{id}`: no values for attribute `{attr}`"
                )));
            }
            let n = *map.last_key_value().expect("nonempty").0;
            if map.len() as u64 != n {
                let missing = (1..).find(|t| !map.contains_key(t)).expect("gap");
                return Err(Error::Validation(format!(
                    "sequence `{id}`, attribute `{attr}`: missing t={missing} \
                     (times must run 1..n with no gaps)"
                )));
            }
            match len {
                None => len = Some(n),
                Some(l) if l != n => {
                    return Err(Error::Validation(format!(
                        "sequence `{id}`: attribute `{attr}` has {n} observations \
                         but `{}` has {l}",
                        cells.attrs[0]
                    )));
                }
                _ => {}
            }
            rows.push(map.into_values().collect::<Vec<T>>());
        }
        out.push((id, rows));
    }
    Ok(out)
}

fn csv_reader<R: io::Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader)
}

/// Read symbolic sequences (either layout). Returns the attribute set in
/// file order together with the sequences in file order.
pub fn read_symbolic<R: io::Read>(
    reader: R,
    alphabet: &AlphabetSpec,
) -> Result<(AttributeSet, Vec<Mvs>)> {
    let mut rdr = csv_reader(reader);
    let format = detect_format(rdr.headers()?)?;
    let parse = |field: &str, row: usize| {
        alphabet.symbol(field).ok_or_else(|| {
            Error::Validation(format!(
                "row {row}: symbol {field:?} is not in the alphabet"
            ))
        })
    };
    let cells = match format {
        SequenceFormat::Long => read_long_cells(rdr, parse)?,
        SequenceFormat::Wide => read_wide_cells(rdr, parse)?,
    };
    let names = cells.attrs.clone();
    let mut seqs = Vec::new();
    for (id, rows) in cells_to_rows(cells)? {
        seqs.push(Mvs::from_rows(&id, &rows)?);
    }
    let attrs = AttributeSet::new(names.iter().map(String::as_str))?;
    Ok((attrs, seqs))
}

/// Read real-valued sequences (either layout) for discretization.
pub fn read_real<R: io::Read>(reader: R) -> Result<Vec<RawSeries>> {
    let mut rdr = csv_reader(reader);
    let format = detect_format(rdr.headers()?)?;
    let parse = |field: &str, row: usize| match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Validation(format!(
            "row {row}: value must be a finite number, got {field:?}"
        ))),
    };
    let cells = match format {
        SequenceFormat::Long => read_long_cells(rdr, parse)?,
        SequenceFormat::Wide => read_wide_cells(rdr, parse)?,
    };
    let attrs = cells.attrs.clone();
    let mut out = Vec::new();
    for (id, rows) in cells_to_rows(cells)? {
        out.push(RawSeries::new(&id, attrs.clone(), rows)?);
    }
    Ok(out)
}

/// Read a `seq_id,label` file; labels are `pos`/`neg` (or the long forms).
pub fn read_labels<R: io::Read>(reader: R) -> Result<Vec<(String, Label)>> {
    let mut rdr = csv_reader(reader);
    let headers = rdr.headers()?;
    let h: Vec<&str> = headers.iter().collect();
    if h != ["seq_id", "label"] {
        return Err(Error::Validation(format!(
            "unrecognized label header `{}`: expected `seq_id,label`",
            h.join(",")
        )));
    }
    let mut out: Vec<(String, Label)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Validation(format!(
                "row {row}: expected 2 fields, got {}",
                rec.len()
            )));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(Error::Validation(format!("row {row}: empty seq_id")));
        }
        let label = Label::parse(&rec[1]).ok_or_else(|| {
            Error::Validation(format!(
                "row {row}: unknown label {:?} (expected pos or neg)",
                &rec[1]
            ))
        })?;
        if !seen.insert(id.clone()) {
            return Err(Error::Validation(format!(
                "row {row}: duplicate label for sequence `{id}`"
            )));
        }
        out.push((id, label));
    }
    if out.is_empty() {
        return Err(Error::Validation("label file has no rows".into()));
    }
    Ok(out)
}

/// Join sequences with their labels into a dataset. Every sequence must
/// have a label and every label must name a sequence.
pub fn pair_labels(
    alphabet: AlphabetSpec,
    attributes: AttributeSet,
    seqs: Vec<Mvs>,
    labels: &[(String, Label)],
) -> Result<Dataset> {
    let by_id: BTreeMap<&str, Label> = labels.iter().map(|(s, l)| (s.as_str(), *l)).collect();
    let ids: BTreeSet<&str> = seqs.iter().map(|m| m.id()).collect();
    for (id, _) in labels {
        if !ids.contains(id.as_str()) {
            return Err(Error::Validation(format!(
                "label for unknown sequence `{id}`"
            )));
        }
    }
    let mut examples = Vec::with_capacity(seqs.len());
    for mvs in seqs {
        let label = *by_id.get(mvs.id()).ok_or_else(|| {
            Error::Validation(format!("sequence `{}` has no label", mvs.id()))
        })?;
        examples.push(LabeledExample { mvs, label });
    }
    Ok(Dataset::new(alphabet, attributes, examples))
}

/// Open a sequence file and a label file and assemble the dataset.
pub fn load_symbolic_dataset(
    sequences: &Path,
    labels: &Path,
    alphabet: &AlphabetSpec,
) -> Result<Dataset> {
    let (attrs, seqs) = read_symbolic(File::open(sequences)?, alphabet)?;
    let labels = read_labels(File::open(labels)?)?;
    pair_labels(alphabet.clone(), attrs, seqs, &labels)
}

/// Write sequences in the long layout.
pub fn write_long_symbolic<W: io::Write>(
    writer: W,
    attrs: &AttributeSet,
    alphabet: &AlphabetSpec,
    seqs: &[Mvs],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["seq_id", "attribute", "t", "value"])?;
    for m in seqs {
        for (a, name) in attrs.names().iter().enumerate() {
            for t in 1..=m.len() {
                let sym = m.coordinate(t)?[a];
                wtr.write_record([m.id(), name, &t.to_string(), alphabet.name(sym)])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Write sequences in the wide layout.
pub fn write_wide_symbolic<W: io::Write>(
    writer: W,
    attrs: &AttributeSet,
    alphabet: &AlphabetSpec,
    seqs: &[Mvs],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["seq_id".to_string(), "t".to_string()];
    header.extend(attrs.names().iter().cloned());
    wtr.write_record(&header)?;
    for m in seqs {
        for t in 1..=m.len() {
            let mut rec = vec![m.id().to_string(), t.to_string()];
            for sym in m.coordinate(t)? {
                rec.push(alphabet.name(*sym).to_string());
            }
            wtr.write_record(&rec)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Write a `seq_id,label` file.
pub fn write_labels<W: io::Write>(writer: W, labels: &[(String, Label)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["seq_id", "label"])?;
    for (id, label) in labels {
        wtr.write_record([id.as_str(), &label.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
