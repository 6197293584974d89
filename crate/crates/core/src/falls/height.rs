//! TDOA source localization by exhaustive grid search.
//!
//! Candidate positions are the centers of a regular grid over the search
//! volume; the best cell minimizes the sum of squared differences between
//! measured arrival offsets and the offsets the cell would produce. The
//! search is deliberately exhaustive: robust to noise and trivial to check
//! against the forward model.

use crate::spaces::floorplan::BoxBounds;
use crate::spaces::types::Cartesian3;

use super::FallsError;

#[derive(Debug, Clone, PartialEq)]
pub struct HeightEstimate {
    pub estimated_height_m: f64,
    /// Root-mean-square offset residual at the best cell, in µs.
    pub residual_us: f64,
    /// Center of the best cell.
    pub position: Cartesian3,
}

/// Arrival offsets (µs, relative to mic 0) a source at `p` would produce.
pub fn predicted_offsets_us(mic_positions: &[Cartesian3], p: &Cartesian3, speed_of_sound_mps: f64) -> Vec<f64> {
    let d0 = mic_positions[0].distance(p);
    mic_positions
        .iter()
        .map(|m| (m.distance(p) - d0) / speed_of_sound_mps * 1e6)
        .collect()
}

fn axis_cells(min: f64, max: f64, resolution: f64) -> usize {
    if !(max > min) {
        return 0;
    }
    ((max - min) / resolution).ceil() as usize
}

/// Grid-search the volume for the cell whose predicted offsets best match
/// the measured ones. Ties break toward the lowest z, then x, then y.
pub fn estimate_source_height(
    mic_positions: &[Cartesian3],
    offsets_us: &[f64],
    speed_of_sound_mps: f64,
    search_volume: &BoxBounds,
    grid_resolution_m: f64,
) -> Result<HeightEstimate, FallsError> {
    if mic_positions.len() < 3 {
        return Err(FallsError::DegenerateArray(format!(
            "need at least 3 microphones, got {}",
            mic_positions.len()
        )));
    }
    let spread = mic_positions
        .iter()
        .flat_map(|a| mic_positions.iter().map(move |b| a.distance(b)))
        .fold(0.0f64, f64::max);
    if spread < 1e-9 {
        return Err(FallsError::DegenerateArray("all microphones are coincident".into()));
    }
    if offsets_us.len() != mic_positions.len() {
        return Err(FallsError::OffsetCountMismatch {
            mics: mic_positions.len(),
            got: offsets_us.len(),
        });
    }
    if !(grid_resolution_m > 0.0) {
        return Err(FallsError::EmptyVolume);
    }

    let nx = axis_cells(search_volume.x_min, search_volume.x_max, grid_resolution_m);
    let ny = axis_cells(search_volume.y_min, search_volume.y_max, grid_resolution_m);
    let nz = axis_cells(search_volume.z_min, search_volume.z_max, grid_resolution_m);
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(FallsError::EmptyVolume);
    }

    let half = grid_resolution_m / 2.0;
    let mut best_sse = f64::INFINITY;
    let mut best = Cartesian3::new(0.0, 0.0, 0.0);
    // z outermost, then x, then y: with a strict improvement test, the first
    // minimum found wins, which is exactly the tie-break order.
    for iz in 0..nz {
        let z = search_volume.z_min + iz as f64 * grid_resolution_m + half;
        for ix in 0..nx {
            let x = search_volume.x_min + ix as f64 * grid_resolution_m + half;
            for iy in 0..ny {
                let y = search_volume.y_min + iy as f64 * grid_resolution_m + half;
                let cell = Cartesian3::new(x, y, z);
                let d0 = mic_positions[0].distance(&cell);
                let mut sse = 0.0;
                for (mic, measured) in mic_positions.iter().zip(offsets_us) {
                    let predicted = (mic.distance(&cell) - d0) / speed_of_sound_mps * 1e6;
                    let err = measured - predicted;
                    sse += err * err;
                }
                if sse < best_sse {
                    best_sse = sse;
                    best = cell;
                }
            }
        }
    }

    Ok(HeightEstimate {
        estimated_height_m: best.z,
        residual_us: (best_sse / mic_positions.len() as f64).sqrt(),
        position: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall_array() -> Vec<Cartesian3> {
        vec![
            Cartesian3::new(0.0, 0.0, 0.5),
            Cartesian3::new(0.0, 0.0, 1.0),
            Cartesian3::new(0.0, 0.0, 1.5),
        ]
    }

    fn volume() -> BoxBounds {
        BoxBounds {
            x_min: 0.0,
            x_max: 4.5,
            y_min: -1.0,
            y_max: 1.0,
            z_min: 0.0,
            z_max: 2.0,
        }
    }

    #[test]
    fn forward_model_matches_hand_arithmetic() {
        // Source at (2, 0, 0.2): distances 2.0224, 2.1539, 2.3854 m give
        // offsets of roughly +384 µs and +1058 µs at c = 343 m/s.
        let offsets = predicted_offsets_us(&wall_array(), &Cartesian3::new(2.0, 0.0, 0.2), 343.0);
        assert_eq!(offsets[0], 0.0);
        assert!((offsets[1] - 383.5).abs() < 1.0, "got {}", offsets[1]);
        assert!((offsets[2] - 1058.3).abs() < 1.0, "got {}", offsets[2]);
    }

    #[test]
    fn recovers_a_mid_height_source() {
        let mics = wall_array();
        let truth = Cartesian3::new(2.0, 0.0, 1.0);
        let offsets = predicted_offsets_us(&mics, &truth, 343.0);
        // Middle mic is nearer: the only nonzero offset is negative.
        assert!(offsets[1] < -170.0 && offsets[1] > -190.0);
        assert_eq!(offsets[2], 0.0);
        let est = estimate_source_height(&mics, &offsets, 343.0, &volume(), 0.025).unwrap();
        assert!(
            (est.estimated_height_m - 1.0).abs() <= 0.025,
            "estimate {} too far from 1.0",
            est.estimated_height_m
        );
    }

    #[test]
    fn recovers_a_low_source() {
        let mics = wall_array();
        let truth = Cartesian3::new(2.0, 0.0, 0.2);
        let offsets = predicted_offsets_us(&mics, &truth, 343.0);
        let est = estimate_source_height(&mics, &offsets, 343.0, &volume(), 0.025).unwrap();
        assert!(
            (est.estimated_height_m - 0.2).abs() <= 0.025,
            "estimate {} too far from 0.2",
            est.estimated_height_m
        );
    }

    #[test]
    fn residual_vanishes_for_an_on_grid_source() {
        let mics = wall_array();
        // The cell grid over `volume()` has centers at odd multiples of 0.0125.
        let truth = Cartesian3::new(2.0125, 0.0125, 0.2125);
        let offsets = predicted_offsets_us(&mics, &truth, 343.0);
        let est = estimate_source_height(&mics, &offsets, 343.0, &volume(), 0.025).unwrap();
        assert!(est.residual_us <= 1e-6, "residual {} µs", est.residual_us);
        // Equal up to the rounding in the cell-center arithmetic.
        assert!((est.estimated_height_m - truth.z).abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetric_offsets_resolve_to_the_midline() {
        // Offsets symmetric under reflection about the array midline (1.0 m):
        // the argmin is on the midline up to one cell, by the low-z tie-break.
        let mics = wall_array();
        let offsets = predicted_offsets_us(&mics, &Cartesian3::new(2.0, 0.0, 1.0), 343.0);
        let est = estimate_source_height(&mics, &offsets, 343.0, &volume(), 0.025).unwrap();
        assert!((est.estimated_height_m - 1.0).abs() <= 0.025);
    }

    #[test]
    fn fewer_than_three_mics_is_degenerate() {
        let mics = vec![Cartesian3::new(0.0, 0.0, 0.5), Cartesian3::new(0.0, 0.0, 1.5)];
        assert!(matches!(
            estimate_source_height(&mics, &[0.0, 0.0], 343.0, &volume(), 0.025),
            Err(FallsError::DegenerateArray(_))
        ));
    }

    #[test]
    fn coincident_mics_are_degenerate() {
        let mics = vec![
            Cartesian3::new(0.0, 0.0, 1.0),
            Cartesian3::new(0.0, 0.0, 1.0),
            Cartesian3::new(0.0, 0.0, 1.0),
        ];
        assert!(matches!(
            estimate_source_height(&mics, &[0.0, 0.0, 0.0], 343.0, &volume(), 0.025),
            Err(FallsError::DegenerateArray(_))
        ));
    }

    #[test]
    fn empty_volume_is_rejected() {
        let mut v = volume();
        v.x_max = v.x_min;
        assert_eq!(
            estimate_source_height(&wall_array(), &[0.0, 0.0, 0.0], 343.0, &v, 0.025).unwrap_err(),
            FallsError::EmptyVolume
        );
    }

    #[test]
    fn offset_count_must_match_the_array() {
        assert!(matches!(
            estimate_source_height(&wall_array(), &[0.0, 0.0], 343.0, &volume(), 0.025),
            Err(FallsError::OffsetCountMismatch { mics: 3, got: 2 })
        ));
    }
}
