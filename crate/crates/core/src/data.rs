//! Dataset ingestion: CSV parsing, schema inference, canonical value
//! rendering, tokenization, and deterministic splits.
//!
//! Tokens require exact string equality, so every raw cell is rendered into a
//! canonical form first: categorical cells are trimmed, numeric cells are
//! parsed and re-rendered with shortest-round-trip formatting (so `2`, `2.0`
//! and `2.00` all become `2`). An optional fixed-decimal quantization knob
//! coarsens numeric tokens instead.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::store::TargetValue;
use crate::token::{Token, DEFAULT_SEPARATOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
        })
    }
}

impl FromStr for ColumnKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(ColumnKind::Numeric),
            "categorical" => Ok(ColumnKind::Categorical),
            other => Err(Error::InvalidConfig(format!(
                "unknown column kind {other:?} (expected numeric or categorical)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Regression,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
        })
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classification" => Ok(Task::Classification),
            "regression" => Ok(Task::Regression),
            other => Err(Error::InvalidConfig(format!(
                "unknown task {other:?} (expected classification or regression)"
            ))),
        }
    }
}

/// What to do with a missing (empty) feature cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Reject the row (default).
    #[default]
    Reject,
    /// Skip the token; the instance gets a shorter token list.
    Skip,
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissingPolicy::Reject => "reject",
            MissingPolicy::Skip => "skip",
        })
    }
}

impl FromStr for MissingPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reject" => Ok(MissingPolicy::Reject),
            "skip" => Ok(MissingPolicy::Skip),
            other => Err(Error::InvalidConfig(format!(
                "unknown missing-value policy {other:?} (expected reject or skip)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Column layout plus the rules that turn raw cells into tokens. The token
/// separator, quantization knob, and missing-value policy live here so a
/// persisted model canonicalizes prediction inputs exactly as it did during
/// training.
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub columns: Vec<Column>,
    /// Index of the target column within `columns`.
    pub target: usize,
    pub task: Task,
    pub separator: char,
    pub quantize_decimals: Option<u8>,
    pub missing: MissingPolicy,
}

impl Schema {
    /// Number of feature columns (everything except the target).
    pub fn feature_count(&self) -> usize {
        self.columns.len() - 1
    }

    /// Feature columns in schema order, with their cell positions.
    pub fn feature_columns(&self) -> impl Iterator<Item = (usize, &Column)> {
        let target = self.target;
        self.columns
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != target)
    }

    pub fn target_column(&self) -> &Column {
        &self.columns[self.target]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target >= self.columns.len() {
            return Err(Error::InvalidConfig(
                "target column index out of range".into(),
            ));
        }
        if self.columns.len() < 2 {
            return Err(Error::InvalidConfig(
                "schema needs at least one feature column besides the target".into(),
            ));
        }
        let mut seen = HashSet::new();
        for column in &self.columns {
            if column.name.is_empty() || column.name.contains(self.separator) {
                return Err(Error::BadFeatureName(column.name.clone()));
            }
            if !seen.insert(column.name.as_str()) {
                return Err(Error::DuplicateColumn(column.name.clone()));
            }
        }
        let target_kind = self.target_column().kind;
        match self.task {
            Task::Classification if target_kind != ColumnKind::Categorical => Err(
                Error::InvalidConfig("classification target must be categorical".into()),
            ),
            Task::Regression if target_kind != ColumnKind::Numeric => Err(Error::InvalidConfig(
                "regression target must be numeric".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// One data row: raw cells in file order plus the 0-based position the row
/// had in the originally loaded file (stable across shuffles and splits).
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub index: usize,
    pub cells: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<Row>,
}

impl Dataset {
    /// Column map for rows whose cells are laid out exactly like the schema.
    pub fn identity_map(&self) -> ColumnMap {
        ColumnMap::identity(&self.schema)
    }
}

/// Canonical rendering of one raw cell. Categorical cells are trimmed;
/// numeric cells are parsed and re-rendered (shortest round-trip, or fixed
/// decimals when quantization is on). Returns `None` when a numeric cell does
/// not parse.
pub fn canonical_value(raw: &str, kind: ColumnKind, quantize_decimals: Option<u8>) -> Option<String> {
    let trimmed = raw.trim();
    match kind {
        ColumnKind::Categorical => Some(trimmed.to_string()),
        ColumnKind::Numeric => trimmed
            .parse::<f64>()
            .ok()
            .map(|v| render_numeric(v, quantize_decimals)),
    }
}

/// Shortest-round-trip decimal rendering (`format!("{v}")` never uses
/// exponent notation), with -0 collapsed into 0 and an optional fixed-decimal
/// mode. Re-rendering any output returns it unchanged.
pub fn render_numeric(v: f64, quantize_decimals: Option<u8>) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    match quantize_decimals {
        None => format!("{v}"),
        Some(k) => {
            let s = format!("{v:.prec$}", prec = k as usize);
            // "-0.00" and "0.00" must be the same token.
            if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
                s[1..].to_string()
            } else {
                s
            }
        }
    }
}

/// Options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Per-column kind overrides; these win over inference.
    pub kind_overrides: Vec<(String, ColumnKind)>,
    pub separator: char,
    pub quantize_decimals: Option<u8>,
    pub missing: MissingPolicy,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            kind_overrides: Vec::new(),
            separator: DEFAULT_SEPARATOR,
            quantize_decimals: None,
            missing: MissingPolicy::Reject,
        }
    }
}

/// Loads a training CSV: header row mandatory, kinds inferred per column
/// (numeric iff every non-empty cell parses as a decimal number), target kind
/// forced by the task. Row numbers in errors are 0-based data-row indices.
pub fn load_csv(path: &Path, target: &str, task: Task, options: &LoadOptions) -> Result<Dataset> {
    let (header, rows) = load_raw_csv(path, options.delimiter)?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let target_idx = header
        .iter()
        .position(|name| name == target)
        .ok_or_else(|| Error::MissingColumn(target.to_string()))?;
    if header.len() < 2 {
        return Err(Error::InvalidConfig(
            "dataset has no feature columns".into(),
        ));
    }
    for name in &header {
        if name.is_empty() || name.contains(options.separator) {
            return Err(Error::BadFeatureName(name.clone()));
        }
    }

    let mut kinds = infer_kinds(&header, &rows);
    for (name, kind) in &options.kind_overrides {
        let idx = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))?;
        kinds[idx] = *kind;
    }
    kinds[target_idx] = match task {
        Task::Classification => ColumnKind::Categorical,
        Task::Regression => ColumnKind::Numeric,
    };
    if task == Task::Regression {
        // The target must be numeric wherever present, whatever inference said.
        for row in &rows {
            let cell = row.cells[target_idx].trim();
            if !cell.is_empty() && cell.parse::<f64>().is_err() {
                return Err(Error::NonNumeric {
                    row: row.index,
                    column: header[target_idx].clone(),
                    value: cell.to_string(),
                });
            }
        }
    }

    let schema = Schema {
        columns: header
            .into_iter()
            .zip(kinds)
            .map(|(name, kind)| Column { name, kind })
            .collect(),
        target: target_idx,
        task,
        separator: options.separator,
        quantize_decimals: options.quantize_decimals,
        missing: options.missing,
    };
    schema.validate()?;
    Ok(Dataset { schema, rows })
}

/// Loads header and raw rows without schema interpretation. Used for
/// prediction and evaluation inputs, which are canonicalized against a
/// model's schema rather than re-inferred.
pub fn load_raw_csv(path: &Path, delimiter: u8) -> Result<(Vec<String>, Vec<Row>)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }

    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: index,
                expected: header.len(),
                found: record.len(),
            });
        }
        rows.push(Row {
            index,
            cells: record.iter().map(str::to_string).collect(),
        });
    }
    Ok((header, rows))
}

fn infer_kinds(header: &[String], rows: &[Row]) -> Vec<ColumnKind> {
    (0..header.len())
        .map(|col| {
            let numeric = rows.iter().all(|row| {
                let cell = row.cells[col].trim();
                cell.is_empty() || cell.parse::<f64>().is_ok()
            });
            if numeric {
                ColumnKind::Numeric
            } else {
                ColumnKind::Categorical
            }
        })
        .collect()
}

/// Maps a schema's columns onto the cell positions of some input layout.
/// Lets prediction CSVs reorder columns or omit the target.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    /// For each schema feature column (schema order), the cell index.
    feature_cells: Vec<usize>,
    target_cell: Option<usize>,
}

impl ColumnMap {
    pub fn identity(schema: &Schema) -> ColumnMap {
        ColumnMap {
            feature_cells: schema.feature_columns().map(|(i, _)| i).collect(),
            target_cell: Some(schema.target),
        }
    }

    /// Resolves each schema column against `header` by name.
    pub fn resolve(schema: &Schema, header: &[String], require_target: bool) -> Result<ColumnMap> {
        let mut feature_cells = Vec::with_capacity(schema.feature_count());
        for (_, column) in schema.feature_columns() {
            let idx = header
                .iter()
                .position(|h| *h == column.name)
                .ok_or_else(|| {
                    Error::SchemaMismatch(format!(
                        "feature column {:?} missing from input",
                        column.name
                    ))
                })?;
            feature_cells.push(idx);
        }
        let target_cell = header
            .iter()
            .position(|h| *h == schema.target_column().name);
        if require_target && target_cell.is_none() {
            return Err(Error::SchemaMismatch(format!(
                "target column {:?} missing from input",
                schema.target_column().name
            )));
        }
        Ok(ColumnMap {
            feature_cells,
            target_cell,
        })
    }

    pub fn has_target(&self) -> bool {
        self.target_cell.is_some()
    }
}

/// Tokenizes one row under a schema: exactly one token per feature column in
/// schema order (fewer under the skip policy), target excluded.
pub fn tokenize_row(schema: &Schema, map: &ColumnMap, row: &Row) -> Result<Vec<Token>> {
    let mut tokens = Vec::with_capacity(schema.feature_count());
    for ((_, column), &cell_idx) in schema.feature_columns().zip(&map.feature_cells) {
        let raw = row.cells.get(cell_idx).ok_or(Error::RaggedRow {
            row: row.index,
            expected: cell_idx + 1,
            found: row.cells.len(),
        })?;
        if raw.trim().is_empty() {
            match schema.missing {
                MissingPolicy::Reject => {
                    return Err(Error::MissingValue {
                        row: row.index,
                        column: column.name.clone(),
                    })
                }
                MissingPolicy::Skip => continue,
            }
        }
        let canonical = canonical_value(raw, column.kind, schema.quantize_decimals).ok_or_else(
            || Error::NonNumeric {
                row: row.index,
                column: column.name.clone(),
                value: raw.trim().to_string(),
            },
        )?;
        tokens.push(Token::new(&column.name, &canonical, schema.separator)?);
    }
    Ok(tokens)
}

/// Extracts the target of one row as a typed value.
pub fn target_value(schema: &Schema, map: &ColumnMap, row: &Row) -> Result<TargetValue> {
    let cell_idx = map.target_cell.ok_or_else(|| {
        Error::SchemaMismatch(format!(
            "target column {:?} missing from input",
            schema.target_column().name
        ))
    })?;
    let raw = row.cells.get(cell_idx).ok_or(Error::RaggedRow {
        row: row.index,
        expected: cell_idx + 1,
        found: row.cells.len(),
    })?;
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::MissingValue {
            row: row.index,
            column: schema.target_column().name.clone(),
        });
    }
    match schema.task {
        Task::Classification => Ok(TargetValue::Class(trimmed.to_string())),
        Task::Regression => trimmed
            .parse::<f64>()
            .map(TargetValue::Numeric)
            .map_err(|_| Error::NonNumeric {
                row: row.index,
                column: schema.target_column().name.clone(),
                value: trimmed.to_string(),
            }),
    }
}

/// Split fractions plus the shuffle seed. Fractions must be non-negative and
/// sum to 1 (within 1e-9); the train fraction must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train: f64, validation: f64, test: f64, seed: u64) -> Result<SplitSpec> {
        if !(train > 0.0) {
            return Err(Error::InvalidConfig(
                "train fraction must be positive".into(),
            ));
        }
        if validation < 0.0 || test < 0.0 {
            return Err(Error::InvalidConfig(
                "split fractions must be non-negative".into(),
            ));
        }
        let sum = train + validation + test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "split fractions sum to {sum}, expected 1"
            )));
        }
        Ok(SplitSpec {
            train,
            validation,
            test,
            seed,
        })
    }
}

/// Seeded uniform shuffle, then contiguous cuts at ⌊N·f_train⌋ and
/// ⌊N·(f_train+f_val)⌋. Disjoint, covering, reproducible.
pub fn split(rows: &[Row], spec: &SplitSpec) -> Result<(Vec<Row>, Vec<Row>, Vec<Row>)> {
    let n = rows.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    let a = ((n as f64) * spec.train).floor() as usize;
    let b = (((n as f64) * (spec.train + spec.validation)).floor() as usize).clamp(a, n);

    if a == 0 {
        return Err(Error::EmptySplit {
            part: "train",
            rows: n,
        });
    }
    if spec.validation > 0.0 && b == a {
        return Err(Error::EmptySplit {
            part: "validation",
            rows: n,
        });
    }
    if spec.test > 0.0 && b == n {
        return Err(Error::EmptySplit {
            part: "test",
            rows: n,
        });
    }

    let pick = |slice: &[usize]| slice.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>();
    Ok((pick(&order[..a]), pick(&order[a..b]), pick(&order[b..])))
}
