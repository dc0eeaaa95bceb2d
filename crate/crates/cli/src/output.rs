// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Tidy CSV tables and the plot manifest.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

pub fn col(name: &str, unit: &str) -> Column {
    Column {
        name: name.to_string(),
        unit: unit.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub label: String,
    /// Axis the annotation marks, "x" or "y".
    pub axis: String,
    pub value: f64,
}

/// A figure analogue: one tidy table plus plotting metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    /// File stem of the CSV.
    pub id: String,
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub x: String,
    pub x_scale: AxisScale,
    pub y: Vec<String>,
    pub y_scale: AxisScale,
    /// Column whose distinct values split the rows into series.
    pub group_by: Option<String>,
    pub annotations: Vec<Annotation>,
}

impl Figure {
    pub fn new(id: &str, title: &str, columns: Vec<Column>, x: &str, y: &[&str]) -> Self {
        Self {
            id: id.to_string(),
            title: title.to_string(),
            columns,
            rows: Vec::new(),
            x: x.to_string(),
            x_scale: AxisScale::Linear,
            y: y.iter().map(|s| s.to_string()).collect(),
            y_scale: AxisScale::Linear,
            group_by: None,
            annotations: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    fn unit_of(&self, name: &str) -> String {
        self.column_index(name)
            .map(|i| self.columns[i].unit.clone())
            .unwrap_or_default()
    }

    fn series(&self) -> Vec<SeriesEntry> {
        if self.rows.is_empty() {
            return Vec::new();
        }
        let groups: Vec<Option<String>> =
            match self.group_by.as_deref().and_then(|g| self.column_index(g)) {
                Some(i) => {
                    let mut seen = BTreeSet::new();
                    self.rows
                        .iter()
                        .map(|r| r[i].render())
                        .filter(|v| seen.insert(v.clone()))
                        .map(Some)
                        .collect()
                }
                None => vec![None],
            };
        let mut out = Vec::new();
        for g in &groups {
            for y in &self.y {
                let name = match g {
                    Some(v) => format!("{y} [{v}]"),
                    None => y.clone(),
                };
                out.push(SeriesEntry {
                    name,
                    y: y.clone(),
                    filter: g.as_ref().map(|v| Filter {
                        column: self.group_by.clone().unwrap_or_default(),
                        value: v.clone(),
                    }),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    pub column: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub name: String,
    pub y: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter: Option<Filter>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub column: String,
    pub unit: String,
    pub scale: AxisScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureEntry {
    pub id: String,
    pub title: String,
    /// CSV file name, absent when the table is empty.
    pub file: Option<String>,
    pub x: Axis,
    pub y_unit: String,
    pub y_scale: AxisScale,
    pub series: Vec<SeriesEntry>,
    pub annotations: Vec<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub recipe: String,
    pub fingerprint: String,
    pub seed: u64,
    pub figures: Vec<FigureEntry>,
}

/// Everything a recipe produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RecipeOutput {
    pub figures: Vec<Figure>,
    pub summary: serde_json::Value,
    /// Side artifacts the recipe wrote itself.
    pub extra: Vec<PathBuf>,
}

/// Provenance line written at the top of every CSV.
pub fn header_line(recipe: &str, fingerprint: &str, seed: u64) -> String {
    format!("# raqr recipe={recipe} fingerprint={fingerprint} seed={seed}\n")
}

/// CSV bytes of a figure table.
pub fn render_csv(fig: &Figure, header: &str) -> io::Result<Vec<u8>> {
    let mut buf = header.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let names: Vec<String> = fig
            .columns
            .iter()
            .map(|c| {
                if c.unit.is_empty() {
                    c.name.clone()
                } else {
                    format!("{}_{}", c.name, c.unit)
                }
            })
            .collect();
        w.write_record(&names)?;
        for row in &fig.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
    }
    Ok(buf)
}

/// Writes one CSV per non-empty figure and `manifest.json` into `dir`.
pub fn emit_plotdata(
    output: &RecipeOutput,
    dir: &Path,
    recipe: &str,
    fingerprint: &str,
    seed: u64,
) -> io::Result<(Manifest, Vec<PathBuf>)> {
    fs::create_dir_all(dir)?;
    let header = header_line(recipe, fingerprint, seed);
    let mut written = Vec::new();
    let mut figures = Vec::new();
    for fig in &output.figures {
        let file = if fig.rows.is_empty() {
            None
        } else {
            let name = format!("{}.csv", fig.id);
            let path = dir.join(&name);
            fs::write(&path, render_csv(fig, &header)?)?;
            written.push(path);
            Some(name)
        };
        let y_unit = fig.y.first().map(|y| fig.unit_of(y)).unwrap_or_default();
        figures.push(FigureEntry {
            id: fig.id.clone(),
            title: fig.title.clone(),
            file,
            x: Axis {
                column: fig.x.clone(),
                unit: fig.unit_of(&fig.x),
                scale: fig.x_scale,
            },
            y_unit,
            y_scale: fig.y_scale,
            series: fig.series(),
            annotations: fig.annotations.clone(),
        });
    }
    let manifest = Manifest {
        recipe: recipe.to_string(),
        fingerprint: fingerprint.to_string(),
        seed,
        figures,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    written.push(path);
    Ok((manifest, written))
}
