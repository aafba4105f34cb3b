//! Paints a face with different means and scores each result against the
//! mental image. Writes PNGs to the given directory if one is passed.

use arcimboldo::fixtures;
use arcimboldo::render::{execute, internal_eval, Brush, ExecutionConfig};

fn main() -> arcimboldo::Result<()> {
    let out_dir = std::env::args().nth(1).map(std::path::PathBuf::from);
    let mental = fixtures::faces(1, 2).remove(0);
    let base = ExecutionConfig::default();
    let plans = [
        ("default", base),
        ("few colors", ExecutionConfig { palette_size: 3, ..base }),
        ("stroke", ExecutionConfig { brush: Brush::Stroke, brush_radius: 3, ..base }),
        ("replanned", base.replanned()),
    ];
    for (name, cfg) in plans {
        let painted = execute(&mental, &cfg)?;
        let eval = internal_eval(&painted, &mental, 0.7)?;
        println!(
            "{name:<11} palette {:>2} {:?} r{}: {} colors, score {:.3} {}",
            cfg.palette_size,
            cfg.brush,
            cfg.brush_radius,
            painted.distinct_colors(),
            eval.score,
            if eval.pass { "accepted" } else { "rejected" }
        );
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
            painted.save_png(dir.join(format!("{}.png", name.replace(' ', "-"))))?;
        }
    }
    Ok(())
}
