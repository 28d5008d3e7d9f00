//! Shipped examples.
//!
//! The rank-2 group has multipliers 9 and 100(1 + 1e-7), so the log-ratio of
//! the generators' multipliers is far from rationals of small height. Axes
//! are placed near `i` to keep generator norms (and with them the condition
//! numbers of long products) small; neither `0` nor `infinity` lies in any
//! ping-pong disk.

use std::sync::Arc;

use crate::error::Result;
use crate::fuchsian::SchottkyGroup;
use crate::projective::ProjMat;
use crate::representation::{sym_power, Representation};

pub const RANK2_AXES: [(f64, f64, f64); 2] = [(-1.0, 1.0, 9.0), (-4.0, 3.0, 100.0 * (1.0 + 1e-7))];

/// Third axis of the rank-3 group; its generator is killed by the
/// non-injective representation.
pub const RANK3_EXTRA_AXIS: (f64, f64, f64) = (-0.2, 0.3, 100.0);

pub fn rank2_group() -> Result<Arc<SchottkyGroup>> {
    Ok(Arc::new(SchottkyGroup::from_axes(&RANK2_AXES)?))
}

pub fn rank3_group() -> Result<Arc<SchottkyGroup>> {
    let axes = [RANK2_AXES[0], RANK2_AXES[1], RANK3_EXTRA_AXIS];
    Ok(Arc::new(SchottkyGroup::from_axes(&axes)?))
}

/// `Sym^2` of the rank-2 group.
pub fn rank2_sym2() -> Result<Representation> {
    Representation::sym_power(rank2_group()?, 2)
}

/// The inclusion of the rank-2 group (`n = 1`).
pub fn rank2_inclusion() -> Result<Representation> {
    Representation::inclusion(rank2_group()?)
}

/// Rank-3 group mapped by `Sym^2` on the first two generators and trivially
/// on the third. The kernel is the normal closure of the third generator.
pub fn rank3_noninjective() -> Result<Representation> {
    let group = rank3_group()?;
    let gens = group.generators();
    let images = vec![sym_power(&gens[0], 2)?, sym_power(&gens[1], 2)?, ProjMat::identity(3)];
    Representation::new(group, images)
}
