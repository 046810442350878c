use super::window::{FlowWindow, HistogramConfig};
use crate::ingest::Direction;
use crate::train::ClassLabel;

/// One non-zero cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub row: u16,
    pub col: u16,
    pub count: u32,
}

/// Size × time count grid, stored sparsely in column-major order.
///
/// Rows `[0, rows/2)` are forward-direction size bins and `[rows/2, rows)`
/// backward. Columns are time bins. Only non-zero cells are stored, sorted by
/// `(col, row)`, so iterating a column yields the input vector of one
/// network time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowHistogram {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
    col_start: Vec<u32>,
    pub label: Option<ClassLabel>,
}

impl FlowHistogram {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self::from_cells(rows, cols, std::iter::empty())
    }

    /// Build from `(row, col, count)` triples. Duplicates are summed and
    /// zero counts dropped. Panics if a coordinate is out of range.
    pub fn from_cells(rows: usize, cols: usize, cells: impl IntoIterator<Item = Cell>) -> Self {
        let mut cells: Vec<Cell> = cells.into_iter().filter(|c| c.count > 0).collect();
        for c in &cells {
            assert!(
                (c.row as usize) < rows && (c.col as usize) < cols,
                "cell ({}, {}) outside {rows}x{cols}",
                c.row,
                c.col
            );
        }
        cells.sort_unstable_by_key(|c| (c.col, c.row));
        cells.dedup_by(|later, kept| {
            if later.row == kept.row && later.col == kept.col {
                kept.count = kept.count.saturating_add(later.count);
                true
            } else {
                false
            }
        });
        let mut col_start = vec![0u32; cols + 1];
        for c in &cells {
            col_start[c.col as usize + 1] += 1;
        }
        for i in 0..cols {
            col_start[i + 1] += col_start[i];
        }
        FlowHistogram { rows, cols, cells, col_start, label: None }
    }

    /// From a row-major dense grid.
    pub fn from_dense(rows: usize, cols: usize, counts: &[u32]) -> Self {
        assert_eq!(counts.len(), rows * cols);
        Self::from_cells(
            rows,
            cols,
            counts.iter().enumerate().map(|(i, &count)| Cell {
                row: (i / cols) as u16,
                col: (i % cols) as u16,
                count,
            }),
        )
    }

    pub fn with_label(mut self, label: Option<ClassLabel>) -> Self {
        self.label = label;
        self
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.rows * self.cols];
        for c in &self.cells {
            out[c.row as usize * self.cols + c.col as usize] = c.count;
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Non-zero cells of one time column, sorted by row.
    pub fn column(&self, col: usize) -> &[Cell] {
        &self.cells[self.col_start[col] as usize..self.col_start[col + 1] as usize]
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.column(col)
            .binary_search_by_key(&(row as u16), |c| c.row)
            .map(|i| self.column(col)[i].count)
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().map(|c| c.count as u64).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.rows];
        for c in &self.cells {
            s[c.row as usize] += c.count as u64;
        }
        s
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|c| self.column(c).iter().map(|x| x.count as u64).sum())
            .collect()
    }
}

/// Bin every packet of `window` into one cell: the time column is
/// `floor(rel_ts / bin_seconds)` and the size row `floor(wire_len / bin_bytes)`,
/// clamped to the last row of its direction band.
pub fn build_histogram(window: &FlowWindow, cfg: &HistogramConfig) -> FlowHistogram {
    let bin_s = cfg.bin_seconds();
    let bin_b = cfg.bin_bytes();
    let band = cfg.size_bins_per_dir;
    let cells = window.packets.iter().map(|p| {
        let col = ((p.rel_ts / bin_s).floor() as usize).min(cfg.time_bins - 1);
        let within = ((p.wire_len as f64 / bin_b).floor() as usize).min(band - 1);
        let row = match p.dir {
            Direction::Forward => within,
            Direction::Backward => band + within,
        };
        Cell { row: row as u16, col: col as u16, count: 1 }
    });
    FlowHistogram::from_cells(cfg.rows(), cfg.time_bins, cells).with_label(window.label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::WindowPacket;

    fn window(packets: Vec<WindowPacket>) -> FlowWindow {
        FlowWindow { source_flow: 0, t0: 0.0, duration: 60.0, packets, label: None }
    }

    #[test]
    fn origin_packet() {
        let w = window(vec![WindowPacket { rel_ts: 0.0, wire_len: 0, dir: Direction::Forward }]);
        let h = build_histogram(&w, &HistogramConfig::default());
        assert_eq!((h.rows(), h.cols()), (300, 300));
        assert_eq!(h.get(0, 0), 1);
        assert_eq!(h.total(), 1);
        assert_eq!(h.cells().len(), 1);
    }

    #[test]
    fn clamped_backward_last_column() {
        let w = window(vec![WindowPacket {
            rel_ts: 59.999,
            wire_len: 9000,
            dir: Direction::Backward,
        }]);
        let h = build_histogram(&w, &HistogramConfig::default());
        assert_eq!(h.get(299, 299), 1);
        assert_eq!(h.total(), 1);
    }

    #[test]
    fn bin_edges() {
        let pk = |rel_ts, wire_len| WindowPacket { rel_ts, wire_len, dir: Direction::Forward };
        let w = window(vec![pk(0.2, 10), pk(0.1999, 9), pk(0.2, 10), pk(1.0, 1499), pk(1.0, 1500)]);
        let h = build_histogram(&w, &HistogramConfig::default());
        assert_eq!(h.get(1, 1), 2);
        assert_eq!(h.get(0, 0), 1);
        assert_eq!(h.get(149, 5), 2);
        assert_eq!(h.total(), 5);
    }

    #[test]
    fn dense_round_trip() {
        let mut dense = vec![0u32; 12];
        dense[1] = 3;
        dense[7] = 1;
        dense[11] = 9;
        let h = FlowHistogram::from_dense(3, 4, &dense);
        assert_eq!(h.to_dense(), dense);
        assert_eq!(h.row_sums(), vec![3, 1, 9]);
        assert_eq!(h.col_sums(), vec![0, 3, 0, 10]);
        assert_eq!(h.column(3).len(), 2);
    }
}
