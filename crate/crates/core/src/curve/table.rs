//! Tabulated curve input: JSON point tables and CSV files.
//!
//! Each row is `t` followed by the group coordinates: 3 for ℝ³, 4 for SU(2)
//! as `w,x,y,z`, 9 for SO(3) in row-major order.

use std::path::Path;

use super::MIN_SAMPLES;
use crate::error::{Error, Result};
use crate::lie::{GroupKind, GroupPoint};

pub(super) fn from_rows(
    kind: GroupKind,
    rows: &[Vec<f64>],
    what: &str,
) -> Result<(Vec<f64>, Vec<GroupPoint>)> {
    let width = 1 + kind.point_dimension();
    if rows.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_SAMPLES,
            got: rows.len(),
        });
    }
    let mut t = Vec::with_capacity(rows.len());
    let mut points = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::BadCsv(format!(
                "{what} row {} has {} columns, a {} curve needs {width}",
                i + 1,
                row.len(),
                kind.name()
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadCsv(format!(
                "{what} row {} has a non-finite entry",
                i + 1
            )));
        }
        t.push(row[0]);
        points.push(
            GroupPoint::from_coords(kind, &row[1..])
                .map_err(|e| Error::BadCsv(format!("{what} row {}: {e}", i + 1)))?,
        );
    }
    Ok((t, points))
}

pub(super) fn read_csv(kind: GroupKind, path: &Path) -> Result<(Vec<f64>, Vec<GroupPoint>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::BadCsv(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::BadCsv(e.to_string()))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::BadCsv(format!("row {}: `{field}` is not a number", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    from_rows(kind, &rows, "CSV")
}

/// Grid problems in a table are reported as bad input.
pub(super) fn as_bad_table(e: Error) -> Error {
    match e {
        Error::GridMismatch(msg) => Error::BadCsv(format!("t column: {msg}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{sample_curve, CurveSource, CurveSpec};
    use crate::lie::GroupStructure;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn csv_spec(group: GroupStructure, path: &Path) -> CurveSpec {
        CurveSpec {
            group,
            source: CurveSource::Csv(path.to_path_buf()),
            t_domain: None,
            n_samples: 2048,
        }
    }

    #[test]
    fn so3_needs_nine_columns() {
        let mut text = String::from("t,a\n");
        for i in 0..20 {
            text.push_str(&format!("{},{}\n", i, i));
        }
        let f = write(&text);
        let err = sample_curve(&csv_spec(GroupStructure::so3(), f.path())).unwrap_err();
        assert!(matches!(err, Error::BadCsv(_)), "{err:?}");
    }

    #[test]
    fn reads_abelian_line() {
        let mut text = String::from("t,x,y,z\n");
        for i in 0..32 {
            let t = i as f64 * 0.125;
            text.push_str(&format!("{t},{t},{},{}\n", 2.0 * t, -t));
        }
        let f = write(&text);
        let raw = sample_curve(&csv_spec(GroupStructure::abelian(), f.path())).unwrap();
        assert_eq!(raw.len(), 32);
        assert!((raw.step() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_ragged_time() {
        let mut text = String::from("t,x,y,z\n");
        for i in 0..20 {
            text.push_str(&format!(
                "{i},0,0,{}\n",
                if i == 7 {
                    "NaN".to_string()
                } else {
                    i.to_string()
                }
            ));
        }
        let f = write(&text);
        assert!(matches!(
            sample_curve(&csv_spec(GroupStructure::abelian(), f.path())),
            Err(Error::BadCsv(_))
        ));

        let mut text = String::from("t,x,y,z\n");
        for i in 0..20 {
            let t = (i * i) as f64;
            text.push_str(&format!("{t},{t},0,0\n"));
        }
        let f = write(&text);
        assert!(matches!(
            sample_curve(&csv_spec(GroupStructure::abelian(), f.path())),
            Err(Error::BadCsv(_))
        ));
    }

    #[test]
    fn su2_sign_flips_are_undone() {
        let mut rows = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.05;
            let sign = if i % 3 == 0 { -1.0 } else { 1.0 };
            rows.push(vec![
                t,
                sign * (t / 2.0).cos(),
                sign * (t / 2.0).sin(),
                0.0,
                0.0,
            ]);
        }
        let spec = CurveSpec {
            group: GroupStructure::su2(),
            source: CurveSource::Points(rows),
            t_domain: None,
            n_samples: 20,
        };
        let raw = sample_curve(&spec).unwrap();
        let w: Vec<f64> = raw
            .points()
            .iter()
            .map(|p| match p {
                GroupPoint::Su2(q) => q.w,
                _ => unreachable!(),
            })
            .collect();
        assert!(w.iter().all(|x| x * w[0] > 0.0));
    }
}
