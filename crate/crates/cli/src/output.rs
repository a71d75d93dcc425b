//! Table, CSV and JSON rendering.

use std::fmt;

use clap::ValueEnum;
use qdk_core::report::MeasureReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// One printable value.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Missing,
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => {
                let s = format!("{v:.6}");
                // Round-to-zero should not print a sign.
                if s.strip_prefix('-')
                    .is_some_and(|rest| rest.bytes().all(|b| b == b'0' || b == b'.'))
                {
                    f.write_str(&s[1..])
                } else {
                    f.write_str(&s)
                }
            }
            Cell::Missing => f.write_str("n/a"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Text(t) => f.write_str(t),
        }
    }
}

/// Header plus rows.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Comma-separated, header first, LF endings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    /// Space-aligned columns.
    pub fn to_aligned(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect())
            .collect();
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|i| {
                cells
                    .iter()
                    .map(|r| r[i].len())
                    .chain([self.headers[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |items: &[String]| -> String {
            let padded: Vec<String> = items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.headers);
        for r in &cells {
            out.push_str(&line(r));
        }
        out
    }

    /// Array of objects keyed by header; numbers keep full precision.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let obj = self
                    .headers
                    .iter()
                    .zip(r)
                    .map(|(h, c)| {
                        let v = match c {
                            Cell::Num(x) => serde_json::json!(x),
                            Cell::Missing => serde_json::Value::Null,
                            Cell::Bool(b) => serde_json::json!(b),
                            Cell::Text(t) => serde_json::json!(t),
                        };
                        (h.clone(), v)
                    })
                    .collect::<serde_json::Map<_, _>>();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.to_aligned(),
            Format::Csv => self.to_csv(),
            Format::Json => {
                serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n"
            }
        }
    }
}

/// Report fields a user can select with `--measure`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, ValueEnum)]
pub enum Column {
    #[value(name = "s-a")]
    EntropyA,
    #[value(name = "s-b")]
    EntropyB,
    #[value(name = "s-ab")]
    EntropyAb,
    #[value(alias = "mutual-information")]
    Iq,
    NaiveConditionalA,
    NaiveConditionalB,
    MeasuredConditional,
    #[value(alias = "c")]
    Classical,
    Discord,
    #[value(alias = "ree")]
    RelEntOfEntanglement,
    #[value(alias = "red")]
    RelEntOfDiscord,
    ZeroDiscord,
    ZeroDiscordDistance,
}

impl Column {
    pub const ALL: [Column; 13] = [
        Column::EntropyA,
        Column::EntropyB,
        Column::EntropyAb,
        Column::Iq,
        Column::NaiveConditionalA,
        Column::NaiveConditionalB,
        Column::MeasuredConditional,
        Column::Classical,
        Column::Discord,
        Column::RelEntOfEntanglement,
        Column::RelEntOfDiscord,
        Column::ZeroDiscord,
        Column::ZeroDiscordDistance,
    ];

    pub fn header(self) -> &'static str {
        match self {
            Column::EntropyA => "s_a",
            Column::EntropyB => "s_b",
            Column::EntropyAb => "s_ab",
            Column::Iq => "iq",
            Column::NaiveConditionalA => "naive_conditional_on_a",
            Column::NaiveConditionalB => "naive_conditional_on_b",
            Column::MeasuredConditional => "measured_conditional",
            Column::Classical => "classical",
            Column::Discord => "discord",
            Column::RelEntOfEntanglement => "rel_ent_of_entanglement",
            Column::RelEntOfDiscord => "rel_ent_of_discord",
            Column::ZeroDiscord => "zero_discord",
            Column::ZeroDiscordDistance => "zero_discord_distance",
        }
    }

    pub fn needs_geometry(self) -> bool {
        matches!(self, Column::RelEntOfEntanglement | Column::RelEntOfDiscord)
    }

    pub fn cell(self, r: &MeasureReport) -> Cell {
        match self {
            Column::EntropyA => r.s_a.into(),
            Column::EntropyB => r.s_b.into(),
            Column::EntropyAb => r.s_ab.into(),
            Column::Iq => r.iq.into(),
            Column::NaiveConditionalA => r.naive_conditional_on_a.into(),
            Column::NaiveConditionalB => r.naive_conditional_on_b.into(),
            Column::MeasuredConditional => r.measured_conditional.into(),
            Column::Classical => r.classical.into(),
            Column::Discord => r.discord.into(),
            Column::RelEntOfEntanglement => r.rel_ent_of_entanglement.into(),
            Column::RelEntOfDiscord => r.rel_ent_of_discord.into(),
            Column::ZeroDiscord => r.zero_discord.into(),
            Column::ZeroDiscordDistance => r.zero_discord_distance.into(),
        }
    }
}

/// Selected columns, or all of them when none were asked for.
pub fn columns_or_all(selected: &[Column]) -> Vec<Column> {
    if selected.is_empty() {
        Column::ALL.to_vec()
    } else {
        let mut out = Vec::new();
        for c in selected {
            if !out.contains(c) {
                out.push(*c);
            }
        }
        out
    }
}

fn angles(r: &MeasureReport) -> String {
    r.measurement_angles
        .iter()
        .map(|a| format!("{a:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// A single report: key/value lines for the table format, one header row and
/// one value row for CSV, the full report object for JSON.
pub fn render_report(r: &MeasureReport, columns: &[Column], format: Format) -> String {
    if format == Format::Json {
        return serde_json::to_string_pretty(r).expect("serializable") + "\n";
    }
    let mut fields: Vec<(String, Cell)> = vec![
        ("state".into(), r.state.as_str().into()),
        ("dim_a".into(), r.dim_a.into()),
        ("dim_b".into(), r.dim_b.into()),
        ("orientation".into(), Cell::Text(r.orientation.to_string())),
    ];
    fields.extend(columns.iter().map(|c| (c.header().to_string(), c.cell(r))));
    fields.push(("measurement_angles".into(), Cell::Text(angles(r))));
    fields.push(("converged".into(), r.converged().into()));
    match format {
        Format::Csv => {
            let mut t = Table::new(fields.iter().map(|(k, _)| k.clone()));
            t.push(fields.into_iter().map(|(_, v)| v).collect());
            t.to_csv()
        }
        _ => {
            let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            fields
                .iter()
                .map(|(k, v)| format!("{k:<width$}  {v}\n"))
                .collect()
        }
    }
}
