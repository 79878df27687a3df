//! Box-counting dimension by bit interleaving.
//!
//! Each quantized point becomes a Morton code whose leading 2m bits name
//! the level-m box containing it. After sorting, boxes at every level are
//! counted in a single scan: two neighbouring codes fall in different
//! level-m boxes exactly when their highest differing bit is within the
//! first 2m bits.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldiagram::PointSet2D;
use crate::regression::fit_line;

pub const DEFAULT_BITS: u32 = 16;
pub const MIN_BITS: u32 = 4;
pub const MAX_BITS: u32 = 31;
pub const DEFAULT_FIT_RANGE: (u32, u32) = (2, 8);
/// Levels whose count reaches this fraction of the point count are left
/// out of the default fit.
pub const SATURATION_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountCurve {
    /// Bits per axis at each resolution, 1..=k.
    pub m: Vec<u32>,
    pub n_boxes: Vec<u64>,
    pub n_points: u64,
    pub d_f: Option<f64>,
    pub stderr: Option<f64>,
    pub fit_range: Option<(u32, u32)>,
    pub r2: Option<f64>,
    /// Levels inside the requested range dropped by the saturation guard.
    pub saturated: Vec<u32>,
}

impl BoxCountCurve {
    pub fn count_at(&self, m: u32) -> Option<u64> {
        self.m.iter().position(|&v| v == m).map(|i| self.n_boxes[i])
    }
}

fn check_bits(k: u32) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&k) {
        return Err(Error::InvalidConfig(format!(
            "bits per axis must be in {MIN_BITS}..={MAX_BITS}, got {k}"
        )));
    }
    Ok(())
}

/// Min-max scaling of each axis onto 2^k equal cells; the maximum lands
/// in the last cell.
pub fn quantize_points(points: &PointSet2D, k: u32) -> Result<Vec<[u32; 2]>> {
    check_bits(k)?;
    if points.is_empty() {
        return Err(Error::EmptyInput { needed: 1, got: 0 });
    }
    let qx = quantize_axis(&points.x, k, 'x')?;
    let qy = quantize_axis(&points.y, k, 'y')?;
    Ok(qx.into_iter().zip(qy).map(|(a, b)| [a, b]).collect())
}

fn quantize_axis(v: &[f64], k: u32, axis: char) -> Result<Vec<u32>> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if !(hi > lo) {
        return Err(Error::DegenerateRange { axis });
    }
    let cells = (1u64 << k) as f64;
    let top = (1u64 << k) - 1;
    let width = hi - lo;
    Ok(v.par_iter()
        .map(|&x| (((x - lo) / width * cells).floor() as u64).min(top) as u32)
        .collect())
}

/// Morton code with x bit i at position 2i+1 and y bit i at position 2i.
pub fn interleave(x: u32, y: u32) -> u64 {
    spread(x) << 1 | spread(y)
}

fn spread(v: u32) -> u64 {
    let mut v = v as u64;
    v = (v | v << 16) & 0x0000_ffff_0000_ffff;
    v = (v | v << 8) & 0x00ff_00ff_00ff_00ff;
    v = (v | v << 4) & 0x0f0f_0f0f_0f0f_0f0f;
    v = (v | v << 2) & 0x3333_3333_3333_3333;
    v = (v | v << 1) & 0x5555_5555_5555_5555;
    v
}

/// Occupied boxes at every level m = 1..=k.
pub fn box_count(grid_points: &[[u32; 2]], k: u32) -> Result<BoxCountCurve> {
    check_bits(k)?;
    if grid_points.is_empty() {
        return Err(Error::EmptyInput { needed: 1, got: 0 });
    }
    let limit = 1u64 << k;
    if let Some(&v) = grid_points.iter().flatten().find(|&&v| v as u64 >= limit) {
        return Err(Error::OutOfRange {
            value: v as u64,
            bits: k,
        });
    }
    let mut codes: Vec<u64> = grid_points
        .par_iter()
        .map(|&[x, y]| interleave(x, y))
        .collect();
    codes.par_sort_unstable();
    Ok(counts_from_sorted(
        codes.windows(2).map(|w| w[0] ^ w[1]),
        k,
        2,
        grid_points.len(),
    ))
}

/// Box counts for points in `dims` dimensions (row-major, `dims` values per
/// point). Coordinate c contributes bit i at position dims*i + (dims-1-c),
/// which reduces to [`box_count`] for dims = 2.
pub fn box_count_nd(coords: &[u32], dims: usize, k: u32) -> Result<BoxCountCurve> {
    check_bits(k)?;
    if dims == 0 || dims * k as usize > 128 {
        return Err(Error::InvalidConfig(format!(
            "{dims} dimensions at {k} bits do not fit a 128-bit code"
        )));
    }
    if coords.is_empty() || !coords.len().is_multiple_of(dims) {
        return Err(Error::EmptyInput {
            needed: dims,
            got: coords.len(),
        });
    }
    let limit = 1u64 << k;
    if let Some(&v) = coords.iter().find(|&&v| v as u64 >= limit) {
        return Err(Error::OutOfRange {
            value: v as u64,
            bits: k,
        });
    }
    let mut codes: Vec<u128> = coords
        .par_chunks(dims)
        .map(|p| {
            let mut code = 0u128;
            for i in 0..k {
                for (c, &v) in p.iter().enumerate() {
                    let bit = (v >> i) & 1;
                    code |= (bit as u128) << (dims * i as usize + dims - 1 - c);
                }
            }
            code
        })
        .collect();
    codes.par_sort_unstable();
    Ok(counts_from_sorted(
        codes.windows(2).map(|w| w[0] ^ w[1]),
        k,
        dims as u32,
        coords.len() / dims,
    ))
}

fn counts_from_sorted<T>(
    diffs: impl Iterator<Item = T>,
    k: u32,
    dims: u32,
    n: usize,
) -> BoxCountCurve
where
    T: Into<u128>,
{
    // new_boxes[m] = neighbour pairs that first separate at level m
    let mut new_boxes = vec![0u64; k as usize + 1];
    for d in diffs {
        let d: u128 = d.into();
        if d == 0 {
            continue;
        }
        let high = 127 - d.leading_zeros();
        new_boxes[(k - high / dims) as usize] += 1;
    }
    let mut total = 1u64;
    let mut n_boxes = Vec::with_capacity(k as usize);
    for m in 1..=k {
        total += new_boxes[m as usize];
        n_boxes.push(total);
    }
    BoxCountCurve {
        m: (1..=k).collect(),
        n_boxes,
        n_points: n as u64,
        d_f: None,
        stderr: None,
        fit_range: None,
        r2: None,
        saturated: Vec::new(),
    }
}

/// Slope of log2 n_boxes against m over `fit_range` (inclusive), after
/// dropping saturated levels.
pub fn fractal_dimension(curve: &BoxCountCurve, fit_range: (u32, u32)) -> Result<BoxCountCurve> {
    let (lo, hi) = fit_range;
    let limit = SATURATION_FRACTION * curve.n_points as f64;
    let mut saturated = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&m, &n) in curve.m.iter().zip(&curve.n_boxes) {
        if m < lo || m > hi {
            continue;
        }
        if n as f64 >= limit && curve.n_points > 1 {
            saturated.push(m);
            continue;
        }
        xs.push(m as f64);
        ys.push((n as f64).log2());
    }
    if !saturated.is_empty() {
        warn!(
            "box counts saturate at levels {saturated:?} ({} points); excluded from the fit",
            curve.n_points
        );
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientScales {
            needed: 3,
            got: xs.len(),
        });
    }
    let fit = fit_line(&xs, &ys);
    Ok(BoxCountCurve {
        d_f: Some(fit.slope),
        stderr: Some(fit.stderr),
        fit_range: Some((xs[0] as u32, *xs.last().unwrap() as u32)),
        r2: Some(fit.r2),
        saturated,
        ..curve.clone()
    })
}

/// Quantize, count and fit in one call.
pub fn box_dimension(points: &PointSet2D, k: u32, fit_range: (u32, u32)) -> Result<BoxCountCurve> {
    let grid = quantize_points(points, k)?;
    fractal_dimension(&box_count(&grid, k)?, fit_range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn brute(points: &[[u32; 2]], k: u32) -> Vec<u64> {
        (1..=k)
            .map(|m| {
                let shift = k - m;
                points
                    .iter()
                    .map(|&[x, y]| (x >> shift, y >> shift))
                    .collect::<HashSet<_>>()
                    .len() as u64
            })
            .collect()
    }

    #[test]
    fn interleave_bit_positions() {
        assert_eq!(interleave(1, 0), 0b10);
        assert_eq!(interleave(0, 1), 0b01);
        assert_eq!(interleave(0b10, 0), 0b1000);
        assert_eq!(interleave(u32::MAX, u32::MAX), u64::MAX);
    }

    #[test]
    fn single_point_and_saturation() {
        let c = box_count(&[[5, 9]; 10], 4).unwrap();
        assert!(c.n_boxes.iter().all(|&n| n == 1));
        let all: Vec<[u32; 2]> = (0..16).flat_map(|x| (0..16).map(move |y| [x, y])).collect();
        let c = box_count(&all, 4).unwrap();
        assert_eq!(c.n_boxes, vec![4, 16, 64, 256]);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(matches!(
            box_count(&[[16, 0]], 4),
            Err(Error::OutOfRange { value: 16, bits: 4 })
        ));
        assert!(box_count(&[[0, 0]], 3).is_err());
    }

    #[test]
    fn quantize_endpoints() {
        let p = PointSet2D::new(vec![0.0, 1.0, 0.0, 1.0], vec![0.0, 0.0, 1.0, 1.0], 1).unwrap();
        let q = quantize_points(&p, 4).unwrap();
        assert_eq!(q, vec![[0, 0], [15, 0], [0, 15], [15, 15]]);
        let flat = PointSet2D::new(vec![2.0; 3], vec![0.0, 1.0, 2.0], 1).unwrap();
        assert!(matches!(
            quantize_points(&flat, 8),
            Err(Error::DegenerateRange { axis: 'x' })
        ));
    }

    #[test]
    fn nd_matches_planar() {
        let pts: Vec<[u32; 2]> = (0..500u32)
            .map(|i| [(i * 7919) % 1024, (i * 104_729) % 1024])
            .collect();
        let flat: Vec<u32> = pts.iter().flatten().copied().collect();
        assert_eq!(
            box_count(&pts, 10).unwrap().n_boxes,
            box_count_nd(&flat, 2, 10).unwrap().n_boxes
        );
        let cube: Vec<u32> = (0..8u32)
            .flat_map(|i| [i & 1, (i >> 1) & 1, i >> 2])
            .collect();
        assert_eq!(box_count_nd(&cube, 3, 4).unwrap().n_boxes, vec![1, 1, 1, 8]);
    }

    #[test]
    fn saturated_levels_are_dropped() {
        let pts: Vec<[u32; 2]> = (0..64u32).map(|i| [i * 4, (i * 37) % 256]).collect();
        let c = box_count(&pts, 8).unwrap();
        let d = fractal_dimension(&c, (1, 8)).unwrap();
        assert!(!d.saturated.is_empty());
        assert!(d.fit_range.unwrap().1 < 8);
        assert!(matches!(
            fractal_dimension(&c, (7, 8)),
            Err(Error::InsufficientScales { .. })
        ));
    }

    proptest! {
        #[test]
        fn prefix_scan_matches_hash_oracle(
            pts in proptest::collection::vec((0u32..1 << 12, 0u32..1 << 12), 1..400),
        ) {
            let pts: Vec<[u32; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            let c = box_count(&pts, 12).unwrap();
            prop_assert_eq!(&c.n_boxes, &brute(&pts, 12));
            for (i, &n) in c.n_boxes.iter().enumerate() {
                prop_assert!(n <= (pts.len() as u64).min(4u64.pow(i as u32 + 1)));
                if i > 0 {
                    prop_assert!(n >= c.n_boxes[i - 1]);
                }
            }
            let mut rev = pts.clone();
            rev.reverse();
            prop_assert_eq!(box_count(&rev, 12).unwrap().n_boxes, c.n_boxes);
        }

        #[test]
        fn affine_rescaling_keeps_counts(
            pts in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..300),
            a in 0.5f64..20.0, b in -100f64..100.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let p = PointSet2D::new(x.clone(), y.clone(), 1).unwrap();
            let scaled = PointSet2D::new(
                x.iter().map(|v| a * v + b).collect(),
                y.iter().map(|v| a * v - b).collect(),
                1,
            ).unwrap();
            let (Ok(g1), Ok(g2)) = (quantize_points(&p, 8), quantize_points(&scaled, 8)) else {
                return Ok(());
            };
            let c1 = box_count(&g1, 8).unwrap().n_boxes;
            let c2 = box_count(&g2, 8).unwrap().n_boxes;
            // floating rounding may move a point across a cell edge
            for (u, v) in c1.iter().zip(&c2) {
                prop_assert!(u.abs_diff(*v) <= 2);
            }
        }
    }
}
