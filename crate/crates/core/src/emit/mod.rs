//! Renderers: event logs, history tables and snapshots, DOT diagrams.

mod dot;
mod table;

pub use dot::{emit_dot, DotView};
pub use table::{
    emit_event_log, emit_history_table, fill_days, snapshot, EmitError, EventLogRow, GroupPattern, HistoryRow,
    HistoryTable, SnapshotRow, SENTINEL_TEXT,
};

/// Plain cell grid shared by the tabular outputs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TableStyle {
    #[default]
    Tsv,
    Aligned,
}

impl Table {
    pub fn render(&self, style: TableStyle) -> String {
        match style {
            TableStyle::Tsv => self.to_tsv(),
            TableStyle::Aligned => self.to_aligned(),
        }
    }

    /// Header line then rows, tab separated, LF terminated. Tabs and line
    /// breaks inside cells are escaped.
    pub fn to_tsv(&self) -> String {
        let line = |cells: &[String]| {
            let cells: Vec<String> = cells
                .iter()
                .map(|c| {
                    c.replace('\\', "\\\\")
                        .replace('\t', "\\t")
                        .replace('\n', "\\n")
                        .replace('\r', "\\r")
                })
                .collect();
            cells.join("\t") + "\n"
        };
        std::iter::once(&self.header)
            .chain(&self.rows)
            .map(|r| line(r))
            .collect()
    }

    /// Columns padded to a common width, separated by two spaces.
    pub fn to_aligned(&self) -> String {
        let cols = self.header.len();
        let mut widths = vec![0; cols];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let mut line = String::new();
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                line.push_str(cell);
                let pad = widths.get(i).copied().unwrap_or(0).saturating_sub(cell.chars().count());
                line.extend(std::iter::repeat_n(' ', pad));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}
