//! Network inputs built from macro observations.
//!
//! Maps go onto a fixed 4×20×20 canvas. Smaller grids sit in the top-left
//! corner and the padding reads as explored obstacle, so the extractor sees
//! a walled-off region rather than unexplored space.

use thiserror::Error;

use crate::mapping::{BeliefMap, Channel, JointObservation, MacroObservation};
use crate::nn::{Tensor, MAP_CHANNELS, MAP_SIDE};
use crate::sim::{Cell, GridDims};

/// Staleness saturates after this many timesteps.
pub const FRESHNESS_HORIZON: u32 = 50;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("grid {width}x{height} does not fit the {MAP_SIDE}x{MAP_SIDE} map canvas")]
    GridTooLarge { width: usize, height: usize },
}

/// A compact network input: map bits plus scalar features.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedObs {
    /// `MAP_CHANNELS * MAP_SIDE * MAP_SIDE` zeros and ones.
    pub map: Vec<u8>,
    pub scalars: Vec<f32>,
}

impl EncodedObs {
    pub fn map_tensor<T: crate::nn::Scalar>(&self) -> Tensor<T> {
        let data = self.map.iter().map(|&b| if b != 0 { T::one() } else { T::zero() }).collect();
        Tensor::from_vec(&[MAP_CHANNELS, MAP_SIDE, MAP_SIDE], data).expect("canvas size")
    }

    pub fn scalars_as<T: crate::nn::Scalar>(&self) -> Vec<T> {
        self.scalars.iter().map(|&x| T::of(x as f64)).collect()
    }
}

pub fn encode_map(map: &BeliefMap) -> Result<Vec<u8>, EncodingError> {
    let dims = map.dims();
    if dims.width > MAP_SIDE || dims.height > MAP_SIDE {
        return Err(EncodingError::GridTooLarge {
            width: dims.width,
            height: dims.height,
        });
    }
    let plane = MAP_SIDE * MAP_SIDE;
    let mut out = vec![0u8; MAP_CHANNELS * plane];
    for r in 0..MAP_SIDE {
        for c in 0..MAP_SIDE {
            if r >= dims.height || c >= dims.width {
                out[r * MAP_SIDE + c] = 1;
                out[plane + r * MAP_SIDE + c] = 1;
            }
        }
    }
    for (k, channel) in Channel::ALL.iter().enumerate() {
        let bits = map.channel(*channel);
        for r in 0..dims.height {
            for c in 0..dims.width {
                if bits[r * dims.width + c] {
                    out[k * plane + r * MAP_SIDE + c] = 1;
                }
            }
        }
    }
    Ok(out)
}

fn push_cell(out: &mut Vec<f32>, cell: Cell, dims: GridDims) {
    let norm = |v: usize, n: usize| if n > 1 { v as f32 / (n - 1) as f32 } else { 0.0 };
    out.push(norm(cell.row, dims.height));
    out.push(norm(cell.col, dims.width));
}

fn freshness(t: u32, last_update: u32) -> f32 {
    t.saturating_sub(last_update).min(FRESHNESS_HORIZON) as f32 / FRESHNESS_HORIZON as f32
}

/// Scalar features for one robot: position, detection flag, explored
/// fraction, candidates, then per teammate its last-known position, goal,
/// previous goal and freshness.
pub fn individual_scalars(z: &MacroObservation) -> Vec<f32> {
    let dims = z.map.dims();
    let mut out = Vec::with_capacity(12 + 7 * z.teammates.len());
    push_cell(&mut out, z.position, dims);
    out.push(if z.q { 1.0 } else { 0.0 });
    out.push(z.explored as f32 / dims.len() as f32);
    for &c in z.candidates.cells() {
        push_cell(&mut out, c, dims);
    }
    for info in z.teammates.values() {
        push_cell(&mut out, info.position, dims);
        push_cell(&mut out, info.goal, dims);
        push_cell(&mut out, info.prev_goal, dims);
        out.push(freshness(z.t, info.last_update));
    }
    out
}

/// Joint scalar features from ground truth: positions, flags, explored
/// fraction, candidates, goals, previous goals.
pub fn joint_scalars(z: &JointObservation) -> Vec<f32> {
    let dims = z.global_map.dims();
    let n = z.positions.len();
    let mut out = Vec::with_capacity(15 * n + 1);
    for &p in &z.positions {
        push_cell(&mut out, p, dims);
    }
    out.extend(z.qs.iter().map(|&q| if q { 1.0 } else { 0.0 }));
    out.push(z.explored as f32 / dims.len() as f32);
    for g in &z.candidates {
        for &c in g.cells() {
            push_cell(&mut out, c, dims);
        }
    }
    for &c in &z.goals {
        push_cell(&mut out, c, dims);
    }
    for &c in &z.prev_goals {
        push_cell(&mut out, c, dims);
    }
    out
}

pub fn encode_individual(z: &MacroObservation) -> Result<EncodedObs, EncodingError> {
    Ok(EncodedObs {
        map: encode_map(&z.map)?,
        scalars: individual_scalars(z),
    })
}

pub fn encode_joint(z: &JointObservation) -> Result<EncodedObs, EncodingError> {
    Ok(EncodedObs {
        map: encode_map(&z.global_map)?,
        scalars: joint_scalars(z),
    })
}
