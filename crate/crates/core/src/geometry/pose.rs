use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Statistical weight of a descriptor from the head's deviation angle off the
/// camera axis: `cos(theta)^p` below a right angle, zero at or beyond it.
pub fn pose_weight(theta: f64, p: u32) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidPoseAngle(theta));
    }
    if p < 2 {
        return Err(Error::InvalidPoseExponent(p));
    }
    if theta < FRAC_PI_2 {
        Ok(theta.cos().powi(p as i32))
    } else {
        Ok(0.0)
    }
}
