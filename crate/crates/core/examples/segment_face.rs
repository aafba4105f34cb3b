//! Quadtree segmentation of a face at several resolution levels.

use arcimboldo::fixtures;
use arcimboldo::segment::{max_depth, quadtree_rects, DEFAULT_VARIANCE_THRESHOLD};

fn main() -> arcimboldo::Result<()> {
    let face = fixtures::faces(1, 4).remove(0);
    for rl in [0.0, 0.31, 0.5, 0.75, 1.0] {
        let rects = quadtree_rects(&face, rl, DEFAULT_VARIANCE_THRESHOLD)?;
        let smallest = rects.iter().map(|(r, _)| r.w).min().unwrap_or(0);
        println!("RL {rl:.2}: depth <= {}, {:>3} regions, smallest side {smallest}", max_depth(rl), rects.len());
    }
    let rects = quadtree_rects(&face, 1.0, DEFAULT_VARIANCE_THRESHOLD)?;
    let mut grid = vec![vec!['.'; 64]; 64];
    for (r, depth) in rects {
        let mark = char::from_digit(depth as u32, 10).unwrap_or('#');
        for row in &mut grid[r.y..r.y + r.h] {
            row[r.x..r.x + r.w].fill(mark);
        }
    }
    for row in grid.iter().step_by(4) {
        println!("  {}", row.iter().step_by(2).collect::<String>());
    }
    Ok(())
}
