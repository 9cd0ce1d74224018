//! Column-named datasets, CSV ingestion and zero handling.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::Composition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    CompositionalPart,
    NumericCovariate,
    BinaryResponse,
    NumericResponse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub role: ColumnRole,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, role: ColumnRole, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            role,
            values,
        }
    }
}

/// A rectangular table of named numeric columns with declared roles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    columns: Vec<Column>,
    n_rows: usize,
}

impl Dataset {
    /// Checks equal lengths, unique names, no missing values and at most two
    /// distinct codes in binary columns.
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.values.len());
        for (i, col) in columns.iter().enumerate() {
            if columns[..i].iter().any(|c| c.name == col.name) {
                return Err(Error::DuplicateColumn(col.name.clone()));
            }
            if col.values.len() != n_rows {
                return Err(Error::DimensionMismatch(format!(
                    "column \"{}\" has {} rows, expected {n_rows}",
                    col.name,
                    col.values.len()
                )));
            }
            if let Some(row) = col.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::MissingValue {
                    row: row + 1,
                    column: col.name.clone(),
                });
            }
            if col.role == ColumnRole::BinaryResponse {
                let mut codes: Vec<f64> = Vec::new();
                for &v in &col.values {
                    if !codes.contains(&v) {
                        codes.push(v);
                    }
                }
                if codes.len() > 2 {
                    return Err(Error::InvalidInput(format!(
                        "binary column \"{}\" has {} distinct values",
                        col.name,
                        codes.len()
                    )));
                }
            }
        }
        Ok(Self { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn values(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.column(name)?.values)
    }

    /// Names of all declared compositional parts, in column order.
    pub fn part_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.role == ColumnRole::CompositionalPart)
            .map(|c| c.name.clone())
            .collect()
    }

    /// Row-wise compositions over the named parts.
    pub fn compositions<S: AsRef<str>>(&self, parts: &[S]) -> Result<Vec<Composition>> {
        let cols = parts
            .iter()
            .map(|p| {
                let col = self.column(p.as_ref())?;
                if col.role != ColumnRole::CompositionalPart {
                    return Err(Error::InvalidInput(format!(
                        "column \"{}\" is not declared as a compositional part",
                        col.name
                    )));
                }
                Ok(&col.values)
            })
            .collect::<Result<Vec<_>>>()?;
        (0..self.n_rows)
            .map(|r| Composition::validated(cols.iter().map(|c| c[r]).collect(), r))
            .collect()
    }

    /// Copy with the named part columns multiplied row-wise by `factors`.
    pub fn with_scaled_parts(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "{} scale factors for {} rows",
                factors.len(),
                self.n_rows
            )));
        }
        let mut out = self.clone();
        for col in &mut out.columns {
            if col.role == ColumnRole::CompositionalPart {
                for (v, f) in col.values.iter_mut().zip(factors) {
                    *v *= f;
                }
            }
        }
        Ok(out)
    }

    /// Adds a column, keeping the dataset invariants.
    pub fn with_column(&self, column: Column) -> Result<Self> {
        let mut cols = self.columns.clone();
        cols.push(column);
        Self::new(cols)
    }
}

/// Declared name and role of one CSV column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDecl {
    pub name: String,
    pub role: ColumnRole,
}

impl ColumnDecl {
    pub fn new(name: impl Into<String>, role: ColumnRole) -> Self {
        Self {
            name: name.into(),
            role,
        }
    }
}

/// Which columns to read from a CSV file and how to type them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub columns: Vec<ColumnDecl>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnDecl>) -> Self {
        Self { columns }
    }

    pub fn push(&mut self, name: impl Into<String>, role: ColumnRole) {
        self.columns.push(ColumnDecl::new(name, role));
    }
}

fn is_missing(cell: &str) -> bool {
    matches!(cell, "" | "NA" | "NaN" | "nan" | "null")
}

/// Reads the declared columns from a CSV file with a header row.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, schema)
}

/// Reads the declared columns from any CSV source.
///
/// Row numbers in errors are file lines, counting the header as row 1.
/// Columns not in the schema are ignored.
pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    for (i, h) in headers.iter().enumerate() {
        if headers[..i].contains(h) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    let indices = schema
        .columns
        .iter()
        .map(|decl| {
            headers
                .iter()
                .position(|h| *h == decl.name)
                .ok_or_else(|| Error::MissingColumn(decl.name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); schema.columns.len()];
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 2;
        for ((decl, &idx), out) in schema.columns.iter().zip(&indices).zip(values.iter_mut()) {
            let cell = record.get(idx).unwrap_or("");
            if is_missing(cell) {
                return Err(Error::MissingValue {
                    row,
                    column: decl.name.clone(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: decl.name.clone(),
                value: cell.to_string(),
            })?;
            out.push(v);
        }
    }
    let columns = schema
        .columns
        .iter()
        .zip(values)
        .map(|(decl, v)| Column::new(decl.name.clone(), decl.role, v))
        .collect();
    let data = Dataset::new(columns)?;
    log::info!(
        "loaded {} rows: {} parts, {} other columns",
        data.n_rows(),
        data.part_names().len(),
        data.columns().len() - data.part_names().len()
    );
    Ok(data)
}

/// Writes all columns as CSV. Values use the shortest representation that
/// parses back to the same double.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(data.columns().iter().map(|c| c.name.as_str()))?;
    for r in 0..data.n_rows() {
        wtr.write_record(data.columns().iter().map(|c| c.values[r].to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// What to do with zero parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    Reject,
    /// Zeros become `eps * row_total`; the other parts shrink
    /// proportionally so the row total is unchanged.
    MultiplicativeReplace(f64),
}

/// Enforces strictly positive parts under `policy`.
///
/// Negative parts are always an error.
pub fn validate_composition(data: &Dataset, policy: ZeroPolicy) -> Result<Dataset> {
    if let ZeroPolicy::MultiplicativeReplace(eps) = policy {
        if !(eps > 0.0 && eps < 0.1) {
            return Err(Error::InvalidInput(format!(
                "replacement eps must lie in (0, 0.1), got {eps}"
            )));
        }
    }
    let parts: Vec<usize> = data
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.role == ColumnRole::CompositionalPart)
        .map(|(i, _)| i)
        .collect();
    if parts.is_empty() {
        return Err(Error::InvalidInput("no compositional parts declared".into()));
    }

    let mut zeros = Vec::new();
    for r in 0..data.n_rows {
        for &j in &parts {
            let col = &data.columns[j];
            let v = col.values[r];
            if v < 0.0 {
                return Err(Error::NegativePart {
                    row: r + 1,
                    column: col.name.clone(),
                    value: v,
                });
            }
            if v == 0.0 {
                zeros.push((r + 1, col.name.clone()));
            }
        }
    }
    if zeros.is_empty() {
        return Ok(data.clone());
    }
    let eps = match policy {
        ZeroPolicy::Reject => return Err(Error::ZeroParts { cells: zeros }),
        ZeroPolicy::MultiplicativeReplace(eps) => eps,
    };

    let mut out = data.clone();
    for r in 0..data.n_rows {
        let total: f64 = parts.iter().map(|&j| data.columns[j].values[r]).sum();
        let n_zero = parts
            .iter()
            .filter(|&&j| data.columns[j].values[r] == 0.0)
            .count();
        if n_zero == 0 {
            continue;
        }
        if n_zero == parts.len() {
            return Err(Error::InvalidInput(format!(
                "row {} has no positive parts",
                r + 1
            )));
        }
        let shrink = 1.0 - n_zero as f64 * eps;
        if shrink <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "row {}: {n_zero} zeros with eps {eps} exhaust the row total",
                r + 1
            )));
        }
        for &j in &parts {
            let v = &mut out.columns[j].values[r];
            *v = if *v == 0.0 { eps * total } else { *v * shrink };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "\
id,study,commuting,food,hygiene,sleep,household,leisure,challenge,self_esteem,age
1,30,5,8,6,33,5,13,1,0.5,21
2,25,10,7,5,30,8,15,0,-1.2,23
3,40,4,6,4,28,3,15,1,1.1,22
";

    fn schema() -> Schema {
        let mut s = Schema::default();
        for p in ["study", "commuting", "food", "hygiene", "sleep", "household", "leisure"] {
            s.push(p, ColumnRole::CompositionalPart);
        }
        s.push("challenge", ColumnRole::BinaryResponse);
        s.push("self_esteem", ColumnRole::NumericCovariate);
        s.push("age", ColumnRole::NumericCovariate);
        s
    }

    #[test]
    fn reads_fixture() {
        let d = read_csv(FIXTURE.as_bytes(), &schema()).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.part_names().len(), 7);
        assert_eq!(d.values("age").unwrap(), &[21.0, 23.0, 22.0]);
        let comps = d.compositions(&d.part_names()).unwrap();
        assert_eq!(comps[1].parts()[0], 25.0);
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let bad = FIXTURE.replacen(",21\n", ",abc\n", 1);
        match read_csv(bad.as_bytes(), &schema()) {
            Err(Error::Parse { row, column, value }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "age");
                assert_eq!(value, "abc");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_and_duplicate_columns() {
        let mut s = schema();
        s.push("gender", ColumnRole::NumericCovariate);
        assert!(matches!(read_csv(FIXTURE.as_bytes(), &s), Err(Error::MissingColumn(c)) if c == "gender"));

        let dup = FIXTURE.replacen("age", "study", 1);
        assert!(matches!(read_csv(dup.as_bytes(), &schema()), Err(Error::DuplicateColumn(_))));

        let missing = FIXTURE.replacen(",0.5,", ",,", 1);
        assert!(matches!(
            read_csv(missing.as_bytes(), &schema()),
            Err(Error::MissingValue { row: 2, .. })
        ));
    }

    #[test]
    fn unequal_row_sums_accepted() {
        let csv = "a,b,c\n1,2,4\n100,300,120\n";
        let mut s = Schema::default();
        for p in ["a", "b", "c"] {
            s.push(p, ColumnRole::CompositionalPart);
        }
        let d = read_csv(csv.as_bytes(), &s).unwrap();
        let sums: Vec<f64> = d.compositions(&d.part_names()).unwrap().iter().map(|c| c.total()).collect();
        assert_eq!(sums, vec![7.0, 520.0]);
    }

    #[test]
    fn binary_columns_have_two_codes() {
        let csv = "a,b,y\n1,2,0\n3,4,1\n5,6,2\n";
        let mut s = Schema::default();
        s.push("a", ColumnRole::CompositionalPart);
        s.push("b", ColumnRole::CompositionalPart);
        s.push("y", ColumnRole::BinaryResponse);
        assert!(read_csv(csv.as_bytes(), &s).is_err());
    }

    fn parts_dataset(rows: &[[f64; 3]]) -> Dataset {
        let cols = (0..3)
            .map(|j| {
                Column::new(
                    format!("p{j}"),
                    ColumnRole::CompositionalPart,
                    rows.iter().map(|r| r[j]).collect(),
                )
            })
            .collect();
        Dataset::new(cols).unwrap()
    }

    #[test]
    fn zero_policies() {
        let clean = parts_dataset(&[[1.0, 2.0, 3.0]]);
        assert_eq!(validate_composition(&clean, ZeroPolicy::Reject).unwrap(), clean);

        let zero = parts_dataset(&[[1.0, 2.0, 3.0], [0.0, 50.0, 50.0]]);
        match validate_composition(&zero, ZeroPolicy::Reject) {
            Err(Error::ZeroParts { cells }) => assert_eq!(cells, vec![(2, "p0".to_string())]),
            other => panic!("{other:?}"),
        }

        let fixed = validate_composition(&zero, ZeroPolicy::MultiplicativeReplace(0.005)).unwrap();
        let row: Vec<f64> = fixed.columns().iter().map(|c| c.values[1]).collect();
        assert!((row[0] - 0.5).abs() < 1e-12);
        assert!((row[1] - 49.75).abs() < 1e-12);
        assert!((row[2] - 49.75).abs() < 1e-12);
        assert!((row.iter().sum::<f64>() - 100.0).abs() < 1e-12);
        // untouched row
        assert_eq!(fixed.columns()[0].values[0], 1.0);

        assert!(validate_composition(&zero, ZeroPolicy::MultiplicativeReplace(0.2)).is_err());
        assert!(validate_composition(&zero, ZeroPolicy::MultiplicativeReplace(0.0)).is_err());
        let neg = parts_dataset(&[[1.0, -2.0, 3.0]]);
        assert!(matches!(
            validate_composition(&neg, ZeroPolicy::MultiplicativeReplace(0.01)),
            Err(Error::NegativePart { .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = parts_dataset(&[[0.1, 1.0 / 3.0, 2.0f64.sqrt()], [1e-7, 123456.789, std::f64::consts::PI]]);
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let mut s = Schema::default();
        for j in 0..3 {
            s.push(format!("p{j}"), ColumnRole::CompositionalPart);
        }
        let back = read_csv(buf.as_slice(), &s).unwrap();
        assert_eq!(back, d);
    }
}
