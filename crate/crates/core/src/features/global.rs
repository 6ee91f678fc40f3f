//! Global existence descriptor: grid-pooled regional saliency plus GIST.

use super::{RegionSaliencyFeatures, GIST_DIM, REGIONAL_DIM};
use crate::error::{Error, Result};
use crate::imaging::{sample_axis, Segmentation};

const RESIZED: usize = 300;
const GRID: usize = 5;
pub const GRID_CELLS: usize = GRID * GRID;
pub const GRID_DIM: usize = GRID_CELLS * REGIONAL_DIM;

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalFeatures {
    /// Grid block (`channel * 25 + cell`) followed by the GIST block.
    pub phi_e: Vec<f64>,
}

/// Fraction of every 5x5 cell of the 300x300 bilinear resize covered by each
/// region, so that pooling a piecewise-constant map reduces to a weighted sum.
fn cell_weights(seg: &Segmentation) -> Vec<Vec<f64>> {
    let (w, h) = (seg.width(), seg.height());
    let n = seg.n_regions();
    let cell = RESIZED / GRID;
    let per_cell = 1.0 / (cell * cell) as f64;
    let sx = w as f64 / RESIZED as f64;
    let sy = h as f64 / RESIZED as f64;
    let mut weights = vec![vec![0.0; n]; GRID_CELLS];
    for oy in 0..RESIZED {
        let (y0, y1, fy) = sample_axis((oy as f64 + 0.5) * sy - 0.5, h);
        for ox in 0..RESIZED {
            let (x0, x1, fx) = sample_axis((ox as f64 + 0.5) * sx - 0.5, w);
            let row = &mut weights[(oy / cell) * GRID + ox / cell];
            row[seg.label(x0, y0)] += (1.0 - fx) * (1.0 - fy) * per_cell;
            row[seg.label(x1, y0)] += fx * (1.0 - fy) * per_cell;
            row[seg.label(x0, y1)] += (1.0 - fx) * fy * per_cell;
            row[seg.label(x1, y1)] += fx * fy * per_cell;
        }
    }
    weights
}

/// Renders each of the 35 regional channels to pixels, resizes to 300x300,
/// averages over a 5x5 grid and appends the GIST descriptor.
pub fn global_existence(
    feats: &RegionSaliencyFeatures,
    seg: &Segmentation,
    gist512: &[f64],
) -> Result<GlobalFeatures> {
    if feats.n_regions() != seg.n_regions() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows for {} regions",
            feats.n_regions(),
            seg.n_regions()
        )));
    }
    if gist512.len() != GIST_DIM {
        return Err(Error::DimensionMismatch(format!(
            "GIST has {} entries, expected {GIST_DIM}",
            gist512.len()
        )));
    }
    let weights = cell_weights(seg);
    let mut phi_e = Vec::with_capacity(GRID_DIM + GIST_DIM);
    for ch in 0..REGIONAL_DIM {
        for cell in &weights {
            let v: f64 = cell
                .iter()
                .zip(&feats.phi_s)
                .map(|(w, row)| w * row[ch])
                .sum();
            phi_e.push(v.clamp(0.0, 1.0));
        }
    }
    phi_e.extend_from_slice(gist512);
    Ok(GlobalFeatures { phi_e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::RegionalRow;

    fn feats(rows: Vec<RegionalRow>) -> RegionSaliencyFeatures {
        RegionSaliencyFeatures::from_phi_s(rows, 1e-3).unwrap()
    }

    #[test]
    fn zero_saliency_gives_zero_grid() {
        let seg = Segmentation::from_labels(
            20,
            20,
            (0..400).map(|p| usize::from(p % 20 >= 10)).collect(),
        )
        .unwrap();
        let g =
            global_existence(&feats(vec![[0.0; REGIONAL_DIM]; 2]), &seg, &[0.5; GIST_DIM]).unwrap();
        assert_eq!(g.phi_e.len(), 1387);
        assert!(g.phi_e[..GRID_DIM].iter().all(|&v| v == 0.0));
        assert!(g.phi_e[GRID_DIM..].iter().all(|&v| v == 0.5));
    }

    #[test]
    fn single_region_unit_channel() {
        let seg = Segmentation::from_labels(17, 23, vec![0; 17 * 23]).unwrap();
        let mut row = [0.0; REGIONAL_DIM];
        row[4] = 1.0;
        let g = global_existence(&feats(vec![row]), &seg, &[0.0; GIST_DIM]).unwrap();
        for cell in 0..GRID_CELLS {
            assert!((g.phi_e[4 * GRID_CELLS + cell] - 1.0).abs() < 1e-12);
            assert_eq!(g.phi_e[3 * GRID_CELLS + cell], 0.0);
        }
    }

    #[test]
    fn left_half_salient_pools_to_left_cells() {
        let seg = Segmentation::from_labels(
            30,
            30,
            (0..900).map(|p| usize::from(p % 30 >= 15)).collect(),
        )
        .unwrap();
        let mut on = [0.0; REGIONAL_DIM];
        on[0] = 1.0;
        let g = global_existence(
            &feats(vec![on, [0.0; REGIONAL_DIM]]),
            &seg,
            &[0.0; GIST_DIM],
        )
        .unwrap();
        // columns 0-1 of the grid are inside the left half, 3-4 inside the right
        for r in 0..GRID {
            assert!((g.phi_e[r * GRID] - 1.0).abs() < 1e-12);
            assert!(g.phi_e[r * GRID + 4].abs() < 1e-12);
            assert!((g.phi_e[r * GRID + 2] - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_rows_rejected() {
        let seg = Segmentation::from_labels(4, 4, vec![0; 16]).unwrap();
        let r = global_existence(&feats(vec![[0.0; REGIONAL_DIM]; 2]), &seg, &[0.0; GIST_DIM]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}
