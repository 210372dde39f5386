//! Dataset ingestion and feature-matrix output.
//!
//! libsvm files use 1-based feature indices; they are converted to 0-based
//! indices here and nowhere else. Floats are written with 17 significant
//! digits so every value survives a write/parse round trip exactly.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::eval::csv_error;
use crate::vector::InputVector;

/// Magic number opening the binary feature-matrix format.
pub const BINARY_MAGIC: u32 = 0x5453_4B31;

/// Size in bytes of the binary header: `u32` magic, `u64` rows, `u64` columns.
pub const BINARY_HEADER_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub vectors: Vec<InputVector>,
    pub labels: Option<Vec<f64>>,
    pub dim: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_value(token: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("malformed {what} {token:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite {what} {token:?}")));
    }
    Ok(v)
}

/// Parses `<label> <index>:<value> ...` records with 1-based, strictly
/// increasing indices. `#` starts a comment; blank lines are skipped.
///
/// The dimension is the largest index seen, or `forced_dim` if given; an
/// index above `forced_dim` is an error.
pub fn parse_libsvm<R: BufRead>(mut reader: R, forced_dim: Option<usize>) -> Result<Dataset> {
    let mut records: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let text = std::str::from_utf8(&buf).map_err(|_| Error::parse(line_no, "invalid UTF-8"))?;
        let text = text.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let mut tokens = text.split_whitespace();
        let label = parse_value(tokens.next().expect("non-empty line"), line_no, "label")?;
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for token in tokens {
            let (idx, val) = token
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, format!("malformed token {token:?}")))?;
            let idx: i64 = idx
                .parse()
                .map_err(|_| Error::parse(line_no, format!("malformed index {idx:?}")))?;
            if idx <= 0 {
                return Err(Error::parse(
                    line_no,
                    format!("index must be positive, got {idx}"),
                ));
            }
            let idx = idx as usize;
            if entries.last().is_some_and(|&(last, _)| last >= idx - 1) {
                return Err(Error::parse(line_no, "indices not increasing"));
            }
            if let Some(dim) = forced_dim {
                if idx > dim {
                    return Err(Error::parse(
                        line_no,
                        format!("index {idx} exceeds dimension {dim}"),
                    ));
                }
            }
            let value = parse_value(val, line_no, "value")?;
            max_index = max_index.max(idx);
            entries.push((idx - 1, value));
        }
        records.push(entries);
        labels.push(label);
    }
    let mut dim = forced_dim.unwrap_or(max_index);
    if !records.is_empty() {
        dim = dim.max(1);
    }
    let vectors = records
        .into_iter()
        .map(|entries| InputVector::sparse(dim, entries))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        vectors,
        labels: Some(labels),
        dim,
    })
}

/// Parses comma-separated dense rows. With `has_labels` the first column is
/// the label. Rows must all have the same width; `#` lines are comments.
pub fn parse_csv_dense<R: Read>(
    reader: R,
    has_labels: bool,
    forced_dim: Option<usize>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    let mut record = csv::ByteRecord::new();
    loop {
        let more = rdr.read_byte_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::parse(line, format!("{other:?}")),
            }
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::parse(
                    line,
                    format!("ragged row: expected {w} fields, found {}", record.len()),
                ));
            }
            _ => {}
        }
        let mut fields = Vec::with_capacity(record.len());
        for field in record.iter() {
            let text =
                std::str::from_utf8(field).map_err(|_| Error::parse(line, "invalid UTF-8"))?;
            fields.push(parse_value(text, line, "value")?);
        }
        if has_labels {
            if fields.len() < 2 {
                return Err(Error::parse(line, "row has a label but no features"));
            }
            labels.push(fields.remove(0));
        }
        if let Some(dim) = forced_dim {
            if fields.len() > dim {
                return Err(Error::parse(
                    line,
                    format!("row has {} features, exceeds dimension {dim}", fields.len()),
                ));
            }
            fields.resize(dim, 0.0);
        }
        rows.push(fields);
    }
    let dim = rows.first().map_or(forced_dim.unwrap_or(0), Vec::len);
    let vectors = rows
        .into_iter()
        .map(InputVector::dense)
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        vectors,
        labels: has_labels.then_some(labels),
        dim,
    })
}

/// Writes libsvm records; a dataset without labels gets label `0`.
pub fn write_libsvm<W: Write>(dataset: &Dataset, mut writer: W) -> Result<()> {
    for (row, x) in dataset.vectors.iter().enumerate() {
        let label = dataset.labels.as_ref().map_or(0.0, |l| l[row]);
        write!(writer, "{}", fmt_f64(label))?;
        for (i, v) in x.iter() {
            write!(writer, " {}:{}", i + 1, fmt_f64(v))?;
        }
        writeln!(writer)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes dense CSV rows, labels first when present.
pub fn write_csv_dense<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (row, x) in dataset.vectors.iter().enumerate() {
        let mut fields: Vec<String> = Vec::with_capacity(x.dim() + 1);
        if let Some(labels) = &dataset.labels {
            fields.push(fmt_f64(labels[row]));
        }
        fields.extend(x.to_dense().into_iter().map(fmt_f64));
        w.write_record(&fields).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an `n x D` feature matrix as CSV, one row per input vector.
pub fn write_features_csv<W: Write>(rows: &[Vec<f64>], mut writer: W) -> Result<()> {
    for row in rows {
        let line: Vec<String> = row.iter().copied().map(fmt_f64).collect();
        writeln!(writer, "{}", line.join(","))?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the binary feature matrix: `u32` magic, `u64` n, `u64` D, then
/// `n * D` row-major `f64`, all little-endian.
pub fn write_features_binary<W: Write>(
    rows: &[Vec<f64>],
    feature_dim: usize,
    mut writer: W,
) -> Result<()> {
    if let Some(row) = rows.iter().find(|r| r.len() != feature_dim) {
        return Err(Error::dimension(format!(
            "feature row of length {} in a matrix of width {feature_dim}",
            row.len()
        )));
    }
    writer.write_all(&BINARY_MAGIC.to_le_bytes())?;
    writer.write_all(&(rows.len() as u64).to_le_bytes())?;
    writer.write_all(&(feature_dim as u64).to_le_bytes())?;
    for v in rows.iter().flatten() {
        writer.write_all(&v.to_le_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a matrix written by [`write_features_binary`].
pub fn read_features_binary<R: Read>(mut reader: R) -> Result<Vec<Vec<f64>>> {
    let mut header = [0u8; BINARY_HEADER_LEN];
    reader.read_exact(&mut header)?;
    let magic = u32::from_le_bytes(header[0..4].try_into().expect("4 bytes"));
    if magic != BINARY_MAGIC {
        return Err(Error::parse(0, format!("bad magic {magic:#010x}")));
    }
    let n = u64::from_le_bytes(header[4..12].try_into().expect("8 bytes")) as usize;
    let d = u64::from_le_bytes(header[12..20].try_into().expect("8 bytes")) as usize;
    let mut rows = Vec::with_capacity(n.min(1 << 20));
    let mut word = [0u8; 8];
    for _ in 0..n {
        let mut row = Vec::with_capacity(d.min(1 << 20));
        for _ in 0..d {
            reader.read_exact(&mut word)?;
            row.push(f64::from_le_bytes(word));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse_err(text: &str) -> (usize, String) {
        match parse_libsvm(text.as_bytes(), None) {
            Err(Error::Parse { line, message }) => (line, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn libsvm_basic_record() {
        let ds = parse_libsvm("+1 1:0.5 3:2.0\n".as_bytes(), None).unwrap();
        assert_eq!(ds.labels, Some(vec![1.0]));
        assert_eq!(ds.dim, 3);
        assert_eq!(
            ds.vectors[0].iter().collect::<Vec<_>>(),
            vec![(0, 0.5), (2, 2.0)]
        );
    }

    #[test]
    fn libsvm_comments_blank_lines_and_forced_dim() {
        let text = "# header\n\n-1 2:1.5 # trailing\n\n+1 1:1\n";
        let ds = parse_libsvm(text.as_bytes(), Some(10)).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim, 10);
        assert_eq!(ds.labels, Some(vec![-1.0, 1.0]));
        assert_eq!(ds.vectors[0].dim(), 10);
    }

    #[test]
    fn libsvm_errors_carry_line_numbers() {
        assert_eq!(
            parse_err("-1 2:1 1:1"),
            (1, "indices not increasing".into())
        );
        assert_eq!(parse_err("1 1:1\n1 2:1 2:3").0, 2);
        assert!(parse_err("1 0:1").1.contains("positive"));
        assert!(parse_err("1 -3:1").1.contains("positive"));
        assert!(parse_err("1 1-1").1.contains("malformed token"));
        assert!(parse_err("x 1:1").1.contains("label"));
        assert!(parse_err("1 1:abc").1.contains("value"));
        assert!(parse_err("1 1:nan").1.contains("non-finite"));
        assert_eq!(parse_err("1 1:1\n\n1 \u{0}:1").0, 3);
    }

    #[test]
    fn libsvm_index_beyond_forced_dim() {
        let err = parse_libsvm("1 5:1\n".as_bytes(), Some(3)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn libsvm_invalid_utf8() {
        let err = parse_libsvm(&b"1 1:1\n1 \xff:1\n"[..], None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn csv_basic_and_labels() {
        let ds = parse_csv_dense("1,0.5,0\n-1,2,3\n".as_bytes(), true, None).unwrap();
        assert_eq!(ds.dim, 2);
        assert_eq!(ds.labels, Some(vec![1.0, -1.0]));
        assert_eq!(ds.vectors[1].to_dense(), vec![2.0, 3.0]);
        let ds = parse_csv_dense("1,0.5,0\n".as_bytes(), false, Some(5)).unwrap();
        assert_eq!(ds.dim, 5);
        assert_eq!(ds.labels, None);
    }

    #[test]
    fn csv_empty_file() {
        let ds = parse_csv_dense("".as_bytes(), false, None).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.dim, 0);
    }

    #[test]
    fn csv_ragged_rows() {
        let err = parse_csv_dense("1,2,3\n4,5\n".as_bytes(), false, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn csv_bad_value() {
        let err = parse_csv_dense("1,2\n3,x\n".as_bytes(), false, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn binary_layout() {
        let rows = vec![vec![1.0, -2.0], vec![0.5, 4.0]];
        let mut buf = Vec::new();
        write_features_binary(&rows, 2, &mut buf).unwrap();
        assert_eq!(buf.len(), BINARY_HEADER_LEN + 4 * 8);
        assert_eq!(&buf[0..4], &[0x31, 0x4B, 0x53, 0x54]);
        assert_eq!(&buf[4..12], &2u64.to_le_bytes());
        assert_eq!(&buf[12..20], &2u64.to_le_bytes());
        assert_eq!(&buf[20..28], &1.0f64.to_le_bytes());
        assert_eq!(read_features_binary(&buf[..]).unwrap(), rows);
        assert!(read_features_binary(&[0u8; 20][..]).is_err());
    }

    #[test]
    fn feature_csv_uses_17_significant_digits() {
        let mut buf = Vec::new();
        write_features_csv(&[vec![0.1, -1.0]], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "1.0000000000000001e-1,-1.0000000000000000e0\n"
        );
    }

    fn sparse_dataset() -> impl Strategy<Value = Dataset> {
        (1usize..40).prop_flat_map(|dim| {
            prop::collection::vec(
                (
                    -5.0f64..5.0,
                    prop::collection::btree_map(0..dim, -1e6f64..1e6, 0..dim.min(8)),
                ),
                0..12,
            )
            .prop_map(move |rows| {
                let labels = rows.iter().map(|(l, _)| *l).collect();
                let vectors = rows
                    .into_iter()
                    .map(|(_, m)| {
                        let entries = m.into_iter().filter(|&(_, v)| v != 0.0).collect();
                        InputVector::sparse(dim, entries).unwrap()
                    })
                    .collect();
                Dataset {
                    vectors,
                    labels: Some(labels),
                    dim,
                }
            })
        })
    }

    proptest! {
        #[test]
        fn libsvm_round_trip(ds in sparse_dataset()) {
            let mut buf = Vec::new();
            write_libsvm(&ds, &mut buf).unwrap();
            let back = parse_libsvm(&buf[..], Some(ds.dim)).unwrap();
            prop_assert_eq!(back.labels, ds.labels);
            prop_assert_eq!(back.vectors.len(), ds.vectors.len());
            for (a, b) in back.vectors.iter().zip(&ds.vectors) {
                prop_assert_eq!(a.iter().collect::<Vec<_>>(), b.iter().collect::<Vec<_>>());
                prop_assert_eq!(a.dim(), b.dim());
            }
        }

        #[test]
        fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e9f64..1e9, 4), 1..10), labelled in any::<bool>()) {
            let ds = Dataset {
                vectors: rows.iter().cloned().map(|r| InputVector::dense(r).unwrap()).collect(),
                labels: labelled.then(|| (0..rows.len()).map(|i| i as f64 - 0.5).collect()),
                dim: 4,
            };
            let mut buf = Vec::new();
            write_csv_dense(&ds, &mut buf).unwrap();
            let back = parse_csv_dense(&buf[..], labelled, None).unwrap();
            prop_assert_eq!(back, ds);
        }

        #[test]
        fn parsers_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
            let _ = parse_libsvm(&bytes[..], None);
            let _ = parse_csv_dense(&bytes[..], false, None);
            let _ = parse_csv_dense(&bytes[..], true, Some(3));
        }

        #[test]
        fn parsers_never_panic_on_plausible_text(text in "[-+0-9:., #\n\ta-e]{0,200}") {
            let _ = parse_libsvm(text.as_bytes(), None);
            let _ = parse_csv_dense(text.as_bytes(), true, None);
        }
    }
}
