//! Largest plain rectangle of cells around a seed cell.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    enumerate_graphs, template_steps, BlockNode, CellPath, SplitCount, TableModule,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatRegion {
    /// Indices into the graph list.
    pub graphs: Range<usize>,
    pub records: Range<usize>,
    /// `cells[r][g]`, one row per record.
    pub cells: Vec<Vec<CellPath>>,
}

/// Cell grid of the data records: `grid[r - 1][g]` is the single instance of
/// graph `g` in record `r`, or `None` when an arbitrary split on the way holds
/// anything but exactly one part.
pub fn flat_cells(table: &TableModule) -> Vec<Vec<Option<CellPath>>> {
    let graphs = enumerate_graphs(&table.template);
    (1..table.records.len())
        .map(|r| {
            graphs
                .iter()
                .map(|g| single_instance(table, r, &g.path))
                .collect()
        })
        .collect()
}

fn single_instance(table: &TableModule, record: usize, tpath: &[usize]) -> Option<CellPath> {
    let mut block = &table.template.root;
    let mut inst = &table.records[record];
    for &step in tpath {
        let split = block.as_split()?;
        let children = inst.children()?;
        if split.count == SplitCount::Arbitrary && children.len() != 1 {
            return None;
        }
        block = &split.children[step];
        inst = &children[step];
    }
    matches!(block, BlockNode::Leaf(_)).then(|| CellPath::new(record, tpath.to_vec()))
}

/// Ordering of candidate rectangles: larger area, then wider, then longer,
/// then further left, then further up.
pub fn region_key(
    graphs: &Range<usize>,
    records: &Range<usize>,
) -> (
    usize,
    usize,
    usize,
    std::cmp::Reverse<usize>,
    std::cmp::Reverse<usize>,
) {
    let w = graphs.len();
    let h = records.len();
    (
        w * h,
        w,
        h,
        std::cmp::Reverse(graphs.start),
        std::cmp::Reverse(records.start),
    )
}

pub fn flat_region(table: &TableModule, seed: &CellPath) -> Result<FlatRegion> {
    if seed.record == 0 {
        return Err(Error::HeaderRecord);
    }
    table.leaf_at(seed)?;
    let graphs = enumerate_graphs(&table.template);
    let tpath = template_steps(&table.template.root, &seed.steps)
        .ok_or_else(|| Error::PathOutOfRange { path: seed.clone() })?;
    let Some(g0) = graphs.iter().position(|g| g.path == tpath) else {
        return Err(Error::UnknownGraph(seed.to_string()));
    };
    let grid = flat_cells(table);
    let r0 = seed.record - 1;
    let degenerate = FlatRegion {
        graphs: g0..g0 + 1,
        records: seed.record..seed.record + 1,
        cells: vec![vec![seed.clone()]],
    };
    if grid[r0][g0].is_none() {
        return Ok(degenerate);
    }
    let ok_row = |r: usize, cols: &Range<usize>| cols.clone().all(|g| grid[r][g].is_some());

    let mut best: Option<(Range<usize>, Range<usize>)> = None;
    for start in (0..=g0).rev() {
        if grid[r0][start].is_none() {
            break;
        }
        for end in g0 + 1..=graphs.len() {
            if grid[r0][end - 1].is_none() {
                break;
            }
            let cols = start..end;
            let mut top = r0;
            while top > 0 && ok_row(top - 1, &cols) {
                top -= 1;
            }
            let mut bottom = r0 + 1;
            while bottom < grid.len() && ok_row(bottom, &cols) {
                bottom += 1;
            }
            let rows = top + 1..bottom + 1;
            let better = match &best {
                None => true,
                Some((bc, br)) => region_key(&cols, &rows) > region_key(bc, br),
            };
            if better {
                best = Some((cols, rows));
            }
        }
    }
    let Some((cols, rows)) = best else {
        return Ok(degenerate);
    };
    let cells = rows
        .clone()
        .map(|r| {
            cols.clone()
                .map(|g| grid[r - 1][g].clone().expect("checked cell"))
                .collect()
        })
        .collect();
    Ok(FlatRegion {
        graphs: cols,
        records: rows,
        cells,
    })
}
