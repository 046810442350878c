//! Inference-time ablations that destroy temporal structure.
//!
//! Both shuffles draw permutations from a ChaCha stream seeded only by the
//! caller's seed, so the output depends on `(histogram, seed)` alone.

use rand::seq::SliceRandom;

use super::histogram::{Cell, FlowHistogram};
use crate::seed;

fn permutation(n: usize, rng: &mut impl rand::Rng) -> Vec<u16> {
    let mut p: Vec<u16> = (0..n as u16).collect();
    p.shuffle(rng);
    p
}

/// Permute the time axis of every row independently: the cell at
/// `(r, c)` moves to `(r, perm_r[c])`, one fresh permutation per row.
pub fn shuffle_rows_independent(hist: &FlowHistogram, seed: u64) -> FlowHistogram {
    let mut rng = seed::rng(seed);
    let perms: Vec<Vec<u16>> = (0..hist.rows()).map(|_| permutation(hist.cols(), &mut rng)).collect();
    let cells = hist.cells().iter().map(|c| Cell {
        row: c.row,
        col: perms[c.row as usize][c.col as usize],
        count: c.count,
    });
    FlowHistogram::from_cells(hist.rows(), hist.cols(), cells).with_label(hist.label)
}

/// The time-column permutation drawn by [`shuffle_columns_shared`] for `seed`.
pub fn column_permutation(cols: usize, seed: u64) -> Vec<u16> {
    permutation(cols, &mut seed::rng(seed))
}

/// Move column `c` to column `perm[c]` in every row.
pub fn apply_column_permutation(hist: &FlowHistogram, perm: &[u16]) -> FlowHistogram {
    assert_eq!(perm.len(), hist.cols(), "permutation length");
    let cells = hist.cells().iter().map(|c| Cell { col: perm[c.col as usize], ..*c });
    FlowHistogram::from_cells(hist.rows(), hist.cols(), cells).with_label(hist.label)
}

pub fn invert_permutation(perm: &[u16]) -> Vec<u16> {
    let mut inv = vec![0u16; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p as usize] = i as u16;
    }
    inv
}

/// One permutation of the time columns shared by all rows; each column
/// vector moves as a unit, so packets that shared a time bin still do.
pub fn shuffle_columns_shared(hist: &FlowHistogram, seed: u64) -> FlowHistogram {
    apply_column_permutation(hist, &column_permutation(hist.cols(), seed))
}
