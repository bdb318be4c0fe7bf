//! `heatmap`: rasterize the structural-semantic field of a graph export.

use std::path::Path;

use semnav_core::oracle::{Instruction, InstructionDecomposition, MockOracle, OracleTables, SemanticOracle};
use semnav_core::memory::load_graph;
use semnav_core::utility::{build_sources, rasterize_field, UtilityConfig};

use crate::img;
use crate::CliError;

#[allow(clippy::too_many_arguments)]
pub fn execute(
    graph_path: &Path,
    instruction: &str,
    tables: Option<&Path>,
    out: &Path,
    resolution: f64,
    no_boost: bool,
    scale: f64,
) -> Result<(), CliError> {
    if resolution <= 0.0 || scale <= 0.0 {
        return Err(CliError::Usage("resolution and scale must be positive".into()));
    }
    let file = std::fs::File::open(graph_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", graph_path.display())))?;
    let graph = load_graph(std::io::BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("{}: {e}", graph_path.display())))?;

    let tables = match tables {
        Some(p) => OracleTables::load(p)
            .map_err(|e| CliError::Usage(format!("tables {}: {e}", p.display())))?,
        None => OracleTables::default(),
    };
    let oracle = MockOracle::new(tables, 0.8);
    let instruction = Instruction::new(instruction, "heatmap");
    let decomposition = if no_boost {
        InstructionDecomposition::default()
    } else {
        oracle
            .decompose(&instruction)
            .map_err(|e| CliError::Usage(format!("instruction: {e}")))?
    };

    let cfg = UtilityConfig::default();
    let sources = build_sources(&graph, &instruction, &decomposition, &oracle, &cfg);

    // raster bounds: object extents plus a margin
    let mut max_x = 1.0_f64;
    let mut max_y = 1.0_f64;
    for s in &sources {
        max_x = max_x.max(s.center.x + 3.0 * s.sigma);
        max_y = max_y.max(s.center.y + 3.0 * s.sigma);
    }
    let width = (max_x / resolution).ceil() as usize;
    let height = (max_y / resolution).ceil() as usize;
    let field = rasterize_field(&sources, width, height, resolution);

    // image row 0 at the top
    let mut data = vec![0u8; width * height];
    for y in 0..height {
        for x in 0..width {
            let v = field[(height - 1 - y) * width + x];
            data[y * width + x] = ((v / scale) * 255.0).clamp(0.0, 255.0) as u8;
        }
    }
    img::write_pgm(out, width, height, &data)?;
    println!(
        "{} ({}x{} px, {} sources{})",
        out.display(),
        width,
        height,
        sources.len(),
        if no_boost { ", boost off" } else { "" }
    );
    Ok(())
}
